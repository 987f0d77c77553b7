//! Vertex boundary conditions equivalent to a scattering matrix.
//!
//! Vertex values `ψ` and derivatives `ψ′` (taken along each wire, away from
//! the vertex) satisfy `A ψ = B ψ′`. For equal momenta and `ψ = (I + S) a`,
//! `ψ′ = ip (S − I) a` this gives
//!
//! ```text
//! A = ip (I − S),   B = −(I + S),   S = −(A − ipB)⁻¹ (A + ipB).
//! ```
//!
//! A projector pair `Qψ ψ = 0`, `Qd ψ′ = 0` has `S = Qd − Qψ`. Sending the
//! resonance factor to `−1` turns the single-pole matrix into `I − 2P0`, so the
//! low-temperature condition is `P0 ψ = 0`, `P0⊥ ψ′ = 0`
//! ([`Assignment::ResonanceLimit`]). The weighted-continuity family
//! `β⁻¹ψ1 = ψ2 = ψ3` is the opposite pair `P0⊥ ψ = 0`, `P0 ψ′ = 0`
//! ([`Assignment::WeightedContinuity`]), whose scattering matrix in this convention is
//! `2P0 − I`.

use alloc::vec::Vec;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::channels::ChannelBasis;
use crate::dn::SinglePoleModel;
use crate::linalg::{complex_identity, complex_rank, sym_eigen, to_complex, CMat, RMat};
use crate::scattering::{flux_scale, theta_value, SMatrix};

/// Deviation allowed from `P² = P`, `P = Pᵀ` when accepting a projector.
pub const PROJECTOR_TOL: f64 = 1e-10;
const WINDOW_SAMPLES: usize = 65;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VertexError {
    #[error("β = 0 decouples wire 1")]
    ZeroBeta,
    #[error("vector is not of the form (β, 1, 1) (components 2 and 3 differ by {deviation:e})")]
    Asymmetric { deviation: f64 },
    #[error("vector has norm {norm}, expected 1")]
    NotUnit { norm: f64 },
    #[error("expected a vector of length 3, got {len}")]
    Length { len: usize },
    #[error("matrix is not a symmetric projector (defect {defect:e})")]
    NotProjector { defect: f64 },
    #[error("Fermi window [{lo}, {hi}] is not inside the open band ({band_lo}, {band_hi})")]
    WindowOutsideBand {
        lo: f64,
        hi: f64,
        band_lo: f64,
        band_hi: f64,
    },
    #[error("Fermi window half-width {halfwidth} is negative or not finite")]
    InvalidWindow { halfwidth: f64 },
    #[error("momenta do not match the vertex size")]
    Dimension,
}

/// `A ψ = B ψ′` at energy `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexBc {
    pub lambda: f64,
    pub a: CMat,
    pub b: CMat,
}

impl VertexBc {
    /// `A = i(I − S)P^{1/2}√p₁`, `B = −(I + S)P^{−1/2}√p₁`; with equal momenta
    /// this is `A = ip(I − S)`, `B = −(I + S)`.
    pub fn from_smatrix(s: &SMatrix) -> Self {
        let n = s.momenta.len();
        let scale = s.momenta.first().map(|p| libm::sqrt(*p)).unwrap_or(1.0);
        let id = complex_identity(n);
        let root = CMat::from_diagonal(&DVector::from_iterator(
            n,
            s.momenta
                .iter()
                .map(|p| Complex64::new(libm::sqrt(*p) * scale, 0.0)),
        ));
        let inv_root = CMat::from_diagonal(&DVector::from_iterator(
            n,
            s.momenta
                .iter()
                .map(|p| Complex64::new(scale / libm::sqrt(*p), 0.0)),
        ));
        let a = (&id - &s.matrix) * root * Complex64::i();
        let b = -(&id + &s.matrix) * inv_root;
        Self {
            lambda: s.lambda,
            a,
            b,
        }
    }

    /// Rank of `[A | B]`; `n` for a well-posed condition.
    pub fn rank(&self) -> usize {
        let n = self.a.nrows();
        let mut ab = CMat::zeros(n, 2 * n);
        ab.view_mut((0, 0), (n, n)).copy_from(&self.a);
        ab.view_mut((0, n), (n, n)).copy_from(&self.b);
        complex_rank(&ab, 1e-12)
    }

    /// Scattering matrix of the condition for the given momenta.
    pub fn scattering_matrix(&self, momenta: &[f64]) -> Result<CMat, VertexError> {
        let n = self.a.nrows();
        if momenta.len() != n {
            return Err(VertexError::Dimension);
        }
        let x = CMat::from_fn(n, n, |i, j| self.a[(i, j)] / libm::sqrt(momenta[j]));
        let y = CMat::from_fn(n, n, |i, j| {
            self.b[(i, j)] * libm::sqrt(momenta[j]) * Complex64::i()
        });
        let s = (&x - &y)
            .lu()
            .solve(&(&x + &y))
            .ok_or(VertexError::Dimension)?;
        Ok(-s)
    }
}

/// Which side of the condition the resonance projector constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Assignment {
    /// `P0 ψ = 0`, `P0⊥ ψ′ = 0`: the limit of the single-pole matrix.
    #[default]
    ResonanceLimit,
    /// `P0⊥ ψ = 0`, `P0 ψ′ = 0`: weighted continuity along `e0`.
    WeightedContinuity,
}

/// `Qψ ψ = 0` and `Qd ψ′ = 0` with complementary orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorBc {
    pub psi: RMat,
    pub derivative: RMat,
}

impl ProjectorBc {
    pub fn from_projector(p0: &RMat, assignment: Assignment) -> Self {
        let n = p0.nrows();
        let complement = RMat::identity(n, n) - p0;
        match assignment {
            Assignment::ResonanceLimit => Self {
                psi: p0.clone(),
                derivative: complement,
            },
            Assignment::WeightedContinuity => Self {
                psi: complement,
                derivative: p0.clone(),
            },
        }
    }

    /// Largest of `‖Qψ + Qd − I‖`, `‖Qψ Qd‖`, `‖Q² − Q‖`, `‖Q − Qᵀ‖`.
    pub fn defect(&self) -> f64 {
        let n = self.psi.nrows();
        let id = RMat::identity(n, n);
        [
            (&self.psi + &self.derivative - &id).norm(),
            (&self.psi * &self.derivative).norm(),
            projector_defect(&self.psi),
            projector_defect(&self.derivative),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `S = Qd − Qψ`.
    pub fn smatrix(&self) -> CMat {
        to_complex(&(&self.derivative - &self.psi))
    }

    pub fn vertex(&self, lambda: f64) -> VertexBc {
        VertexBc {
            lambda,
            a: to_complex(&self.psi),
            b: to_complex(&self.derivative),
        }
    }
}

fn projector_defect(p: &RMat) -> f64 {
    (p * p - p).norm().max((p - p.transpose()).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiWindow {
    pub lambda_f: f64,
    pub halfwidth: f64,
}

impl FermiWindow {
    pub fn new(lambda_f: f64, halfwidth: f64) -> Result<Self, VertexError> {
        if !(halfwidth >= 0.0 && halfwidth.is_finite()) {
            return Err(VertexError::InvalidWindow { halfwidth });
        }
        Ok(Self {
            lambda_f,
            halfwidth,
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (
            self.lambda_f - self.halfwidth,
            self.lambda_f + self.halfwidth,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowTempLimit {
    pub bc: ProjectorBc,
    /// `max |Θ + 1| ≤ tol` over the window.
    pub valid: bool,
    /// Attained `max |Θ + 1|` (largest over the resonance eigen-directions).
    pub max_deviation: f64,
}

/// Replaces the single-pole matrix by its `Θ → −1` limit when the resonance
/// factor stays within `tol` of `−1` over the Fermi window.
pub fn low_temp_limit(
    model: &SinglePoleModel,
    basis: &ChannelBasis,
    window: FermiWindow,
    tol: f64,
    assignment: Assignment,
) -> Result<LowTempLimit, VertexError> {
    let (lo, hi) = window.bounds();
    let (band_lo, band_hi) = basis.band();
    if !(lo > band_lo && hi < band_hi) {
        return Err(VertexError::WindowOutsideBand {
            lo,
            hi,
            band_lo,
            band_hi,
        });
    }
    let mut samples: Vec<f64> = (0..WINDOW_SAMPLES)
        .map(|k| lo + (hi - lo) * k as f64 / (WINDOW_SAMPLES - 1) as f64)
        .collect();
    samples.push(model.lambda0_f.clamp(lo, hi));
    let mut max_deviation: f64 = 0.0;
    for lambda in samples {
        let momenta = basis
            .open_momenta(lambda)
            .map_err(|_| VertexError::WindowOutsideBand {
                lo,
                hi,
                band_lo,
                band_hi,
            })?;
        let scaled =
            flux_scale(&model.residue, &momenta, "residue").map_err(|_| VertexError::Dimension)?;
        let (values, _) = sym_eigen(&scaled).ok_or(VertexError::Dimension)?;
        let top = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let dev = values
            .iter()
            .filter(|v| top > 0.0 && v.abs() > 1e-14 * top)
            .map(|&mu| (theta_value(mu, 1.0, lambda - model.lambda0_f) + 1.0).norm())
            .fold(0.0_f64, f64::max);
        max_deviation = max_deviation.max(dev);
    }
    Ok(LowTempLimit {
        bc: ProjectorBc::from_projector(&model.projector, assignment),
        valid: max_deviation <= tol,
        max_deviation,
    })
}

/// Weighted-continuity condition `β⁻¹ψ1 = ψ2 = ψ3` with the matching weighted
/// current condition: `P0⊥ ψ = 0`, `P0 ψ′ = 0` for `P0 = e eᵀ`,
/// `e = (β, 1, 1)/√(β² + 2)`.
pub fn datta_projector(beta: f64) -> Result<ProjectorBc, VertexError> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(VertexError::ZeroBeta);
    }
    let e = DVector::from_column_slice(&[beta, 1.0, 1.0]) / libm::sqrt(beta * beta + 2.0);
    Ok(ProjectorBc::from_projector(
        &(&e * e.transpose()),
        Assignment::WeightedContinuity,
    ))
}

/// `β = e[0]/e[1]` for `e = ±(β, 1, 1)/√(β² + 2)`.
pub fn beta_from_vector(e0: &DVector<f64>, tol: f64) -> Result<f64, VertexError> {
    if e0.len() != 3 {
        return Err(VertexError::Length { len: e0.len() });
    }
    let norm = e0.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(VertexError::NotUnit { norm });
    }
    let e = if e0[1] < 0.0 { -e0 } else { e0.clone() };
    let deviation = (e[1] - e[2]).abs();
    if deviation > tol || e[1] <= tol {
        return Err(VertexError::Asymmetric { deviation });
    }
    Ok(e[0] / e[1])
}

/// Leading eigenvector of a symmetric projector.
pub fn leading_vector(p0: &RMat) -> DVector<f64> {
    let n = p0.nrows();
    match sym_eigen(p0) {
        Some((_, vectors)) if n > 0 => vectors.column(n - 1).into_owned(),
        _ => DVector::zeros(n),
    }
}

/// `S = I − 2P0`.
pub fn datta_smatrix(p0: &RMat) -> Result<CMat, VertexError> {
    let defect = projector_defect(p0);
    if !(defect <= PROJECTOR_TOL) {
        return Err(VertexError::NotProjector { defect });
    }
    let n = p0.nrows();
    Ok(to_complex(&(RMat::identity(n, n) - p0 * 2.0)))
}
