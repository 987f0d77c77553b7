//! Exact and single-pole scattering matrices on the open band.
//!
//! With the wire Ansatz `ψ_s = A_s e^{−ipx} + B_s e^{ipx}` (`x` running out
//! along the wire) and `B = S A`, matching to the intermediate DN map gives
//!
//! ```text
//! S = (iI − F̃)⁻¹ (iI + F̃),   F̃ = P^{−1/2} DN^F P^{−1/2},   P = diag(p_s).
//! ```
//!
//! For equal momenta this is the familiar `(ip − DN^F)⁻¹(ip + DN^F)`. The
//! flux scaling keeps `S` unitary when wires have different thresholds.

use alloc::vec::Vec;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::dn::SinglePoleModel;
use crate::linalg::{
    complex_identity, sym_eigen, symmetry_defect, to_complex, unitarity_defect, CMat, RMat,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScatteringError {
    #[error("open-channel momentum {p} is not positive")]
    NonPositiveMomentum { p: f64 },
    #[error("{matrix} is {rows}x{cols} but there are {channels} open channels")]
    Dimension {
        matrix: &'static str,
        rows: usize,
        cols: usize,
        channels: usize,
    },
    #[error("denominator iI − DN^F is singular at λ = {lambda}")]
    SingularDenominator { lambda: f64 },
}

/// Scattering matrix on the open channels at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    pub lambda: f64,
    /// Open-channel momentum per wire.
    pub momenta: Vec<f64>,
    pub matrix: CMat,
}

impl SMatrix {
    /// `‖S†S − I‖_F`
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    /// `‖S − Sᵀ‖_F`
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.matrix)
    }

    pub fn transmission(&self) -> RMat {
        transmission(&self.matrix)
    }
}

/// Entrywise `|S_ij|²`.
pub fn transmission(s: &CMat) -> RMat {
    s.map(|z| z.norm_sqr())
}

pub(crate) fn flux_scale(
    m: &RMat,
    momenta: &[f64],
    name: &'static str,
) -> Result<RMat, ScatteringError> {
    let n = momenta.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(ScatteringError::Dimension {
            matrix: name,
            rows: m.nrows(),
            cols: m.ncols(),
            channels: n,
        });
    }
    if let Some(&p) = momenta.iter().find(|&&p| !(p > 0.0)) {
        return Err(ScatteringError::NonPositiveMomentum { p });
    }
    let w: Vec<f64> = momenta.iter().map(|p| 1.0 / libm::sqrt(*p)).collect();
    Ok(RMat::from_fn(n, n, |i, j| w[i] * m[(i, j)] * w[j]))
}

/// `S = (iI − F̃)⁻¹(iI + F̃)` for the intermediate DN map `dnf`.
pub fn s_exact(dnf: &RMat, lambda: f64, momenta: &[f64]) -> Result<SMatrix, ScatteringError> {
    let f = to_complex(&flux_scale(dnf, momenta, "DN^F")?);
    let n = momenta.len();
    let i = complex_identity(n) * Complex64::i();
    let matrix = (&i - &f)
        .lu()
        .solve(&(&i + &f))
        .ok_or(ScatteringError::SingularDenominator { lambda })?;
    if matrix
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(ScatteringError::SingularDenominator { lambda });
    }
    Ok(SMatrix {
        lambda,
        momenta: momenta.to_vec(),
        matrix,
    })
}

/// `Θ = (ip t + α²)/(ip t − α²)` with detuning `t = λ − λ0F`; `−1` at `t = 0`.
pub fn theta_value(alpha_sq: f64, p: f64, detuning: f64) -> Complex64 {
    if detuning == 0.0 {
        return Complex64::new(-1.0, 0.0);
    }
    let ipt = Complex64::new(0.0, p * detuning);
    (ipt + alpha_sq) / (ipt - alpha_sq)
}

/// Resonance phase factor of a single-pole model at `λ`, for momentum `p`.
pub fn theta(model: &SinglePoleModel, lambda: f64, p: f64) -> Complex64 {
    theta_value(model.alpha * model.alpha, p, lambda - model.lambda0_f)
}

/// `S = P0⊥ + Σ_j Θ_j P_j`, where `P_j` are the eigenprojectors of the
/// flux-scaled residue `R̃` and `Θ_j` uses its eigenvalues in place of `α²/p`.
pub fn s_approx_from(
    residue: &RMat,
    lambda0_f: f64,
    lambda: f64,
    momenta: &[f64],
) -> Result<SMatrix, ScatteringError> {
    let r = flux_scale(residue, momenta, "residue")?;
    let n = momenta.len();
    let (values, vectors) = sym_eigen(&r).ok_or(ScatteringError::SingularDenominator { lambda })?;
    let top = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut matrix = complex_identity(n);
    let detuning = lambda - lambda0_f;
    for j in 0..n {
        if top == 0.0 || values[j].abs() <= 1e-14 * top {
            continue;
        }
        let e: DVector<f64> = vectors.column(j).into_owned();
        let proj = to_complex(&(&e * e.transpose()));
        matrix += proj * (theta_value(values[j], 1.0, detuning) - 1.0);
    }
    Ok(SMatrix {
        lambda,
        momenta: momenta.to_vec(),
        matrix,
    })
}

pub fn s_approx(
    model: &SinglePoleModel,
    lambda: f64,
    momenta: &[f64],
) -> Result<SMatrix, ScatteringError> {
    s_approx_from(&model.residue, model.lambda0_f, lambda, momenta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    SinglePole,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::SinglePole => "pole",
        }
    }
}

/// Why a sweep point carries no scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFlag {
    OutsideBand,
    NearThreshold,
    NearEigenvalue,
    SingularClosedBlock,
    SingularDenominator,
}

impl SweepFlag {
    pub fn name(self) -> &'static str {
        match self {
            SweepFlag::OutsideBand => "outside_band",
            SweepFlag::NearThreshold => "near_threshold",
            SweepFlag::NearEigenvalue => "near_eigenvalue",
            SweepFlag::SingularClosedBlock => "singular_closed_block",
            SweepFlag::SingularDenominator => "singular_denominator",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub result: Result<SMatrix, SweepFlag>,
}

impl SweepRow {
    pub fn smatrix(&self) -> Option<&SMatrix> {
        self.result.as_ref().ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub method: Method,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Largest unitarity defect over unflagged rows (`0` if there are none).
    pub fn max_unitarity_defect(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.smatrix())
            .map(SMatrix::unitarity_defect)
            .fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.result.is_err()).count()
    }
}
