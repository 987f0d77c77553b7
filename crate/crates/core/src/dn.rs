//! Dirichlet-to-Neumann maps of the well and of the intermediate problem.
//!
//! The DN map of the well is assembled from its eigen-data as the truncated
//! spectral series
//!
//! ```text
//! DN(λ) = Σ_s φ_s φ_sᵀ / (λ − λ_s)
//! ```
//!
//! on channel coefficients (open block first). Eliminating the closed channels,
//! whose wire solutions decay like `exp(−κ x)`, gives the intermediate DN map
//!
//! ```text
//! DN^F = DN₊₊ − DN₊₋ D⁻¹ DN₋₊,    D = DN₋₋ + diag(κ),   κ = √(τ − λ) > 0.
//! ```
//!
//! Splitting off one eigen-group `U` from the series (`DN = U Uᵀ/(λ − λ0) + K0`)
//! and writing `k = K0₋₋ + diag(κ)`, the Woodbury identity gives exactly
//!
//! ```text
//! DN^F = φF M⁻¹ φFᵀ + (K0₊₊ − K0₊₋ k⁻¹ K0₋₊),
//! φF = U₊ − K0₊₋ k⁻¹ U₋,   M(λ) = (λ − λ0) I + U₋ᵀ k(λ)⁻¹ U₋,
//! ```
//!
//! so the resonances of the group are the zeros of `det M(λ)`.

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::channels::{ChannelBasis, ChannelError};
use crate::interior::{BoundaryCurrent, InteriorEigenpair, DEGENERACY_TOL};
use crate::linalg::{range_projector, spectral_norm_sym, sym_eigen, RMat};
use crate::model::JunctionSpec;

/// `D` is treated as singular above this condition number.
pub const SINGULAR_CONDITION: f64 = 1e13;
/// Relative distance to a retained eigenvalue that counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

const SCAN_POINTS: usize = 2000;
const ROOT_REL_TOL: f64 = 1e-15;
const ROOT_MAX_ITER: usize = 200;
/// Offset of the lower bracket end from the band edge.
pub const BAND_EDGE_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DnError {
    #[error("λ = {lambda} is a pole of the truncated series (eigenvalue {eigenvalue})")]
    Pole { lambda: f64, eigenvalue: f64 },
    #[error("closed-channel block D is singular at λ = {lambda} (condition {condition:e})")]
    SingularD {
        lambda: f64,
        condition: f64,
        null_vector: DVector<f64>,
    },
    #[error("{pairs} eigenpairs but {currents} boundary currents")]
    Misaligned { pairs: usize, currents: usize },
    #[error("empty eigen-group selection")]
    EmptySelection,
    #[error("selected eigenpairs are not degenerate")]
    NotDegenerate,
    #[error("eigenvalue {lambda0} is outside the open band ({lower}, {upper})")]
    OutsideBand {
        lambda0: f64,
        lower: f64,
        upper: f64,
    },
    #[error("no resonance root in ({lo}, {hi})")]
    NoRoot { lo: f64, hi: f64 },
    #[error("resonance at λ = {lambda} does not couple to the open channels")]
    Decoupled { lambda: f64 },
    #[error("residue metric is not positive definite at λ = {lambda}")]
    IndefiniteResidue { lambda: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// DN map at one `λ`, indexed by channel (open block, then closed block).
#[derive(Debug, Clone, PartialEq)]
pub struct DnMatrix {
    pub lambda: f64,
    pub matrix: RMat,
    n_open: usize,
}

impl DnMatrix {
    pub fn new(lambda: f64, matrix: RMat, n_open: usize) -> Self {
        Self {
            lambda,
            matrix,
            n_open,
        }
    }

    pub fn n_open(&self) -> usize {
        self.n_open
    }

    fn n_closed(&self) -> usize {
        self.matrix.nrows() - self.n_open
    }

    /// `P₊ DN P₊`
    pub fn open_open(&self) -> RMat {
        self.matrix
            .view((0, 0), (self.n_open, self.n_open))
            .into_owned()
    }

    /// `P₊ DN P₋`
    pub fn open_closed(&self) -> RMat {
        self.matrix
            .view((0, self.n_open), (self.n_open, self.n_closed()))
            .into_owned()
    }

    /// `P₋ DN P₊`
    pub fn closed_open(&self) -> RMat {
        self.matrix
            .view((self.n_open, 0), (self.n_closed(), self.n_open))
            .into_owned()
    }

    /// `P₋ DN P₋`
    pub fn closed_closed(&self) -> RMat {
        let c = self.n_closed();
        self.matrix
            .view((self.n_open, self.n_open), (c, c))
            .into_owned()
    }
}

fn check_aligned(pairs: &[InteriorEigenpair], currents: &[BoundaryCurrent]) -> Result<(), DnError> {
    if pairs.len() != currents.len() {
        return Err(DnError::Misaligned {
            pairs: pairs.len(),
            currents: currents.len(),
        });
    }
    Ok(())
}

fn is_pole(lambda: f64, eigenvalue: f64) -> bool {
    (lambda - eigenvalue).abs() <= POLE_TOL * eigenvalue.abs().max(1.0)
}

/// `Σ_{s ∈ idx} φ_s φ_sᵀ / (λ − λ_s)^power`, with `power ∈ {1, 2}`.
fn series<'a>(
    lambda: f64,
    pairs: &[InteriorEigenpair],
    currents: &[BoundaryCurrent],
    idx: impl Iterator<Item = usize> + 'a,
    power: i32,
    dim: usize,
) -> RMat {
    let mut m = RMat::zeros(dim, dim);
    for s in idx {
        let c = &currents[s].coefficients;
        let w = 1.0 / libm::pow(lambda - pairs[s].lambda, power as f64);
        m.ger(w, c, c, 1.0);
    }
    m
}

/// The truncated spectral series for the DN map of the well.
pub fn dn_full(
    lambda: f64,
    pairs: &[InteriorEigenpair],
    currents: &[BoundaryCurrent],
    basis: &ChannelBasis,
) -> Result<DnMatrix, DnError> {
    check_aligned(pairs, currents)?;
    if let Some(p) = pairs.iter().find(|p| is_pole(lambda, p.lambda)) {
        return Err(DnError::Pole {
            lambda,
            eigenvalue: p.lambda,
        });
    }
    let m = series(lambda, pairs, currents, 0..pairs.len(), 1, basis.len());
    Ok(DnMatrix::new(lambda, m, basis.n_open()))
}

/// The intermediate DN map on the open channels.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateDn {
    pub lambda: f64,
    pub matrix: RMat,
    /// Condition number of `D`.
    pub condition: f64,
}

/// Condition number and near-null vector of a symmetric matrix.
fn condition_sym(m: &RMat) -> (f64, DVector<f64>) {
    match sym_eigen(m) {
        Some((values, vectors)) if !values.is_empty() => {
            let (imin, vmin) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, v)| (i, v.abs()))
                .unwrap();
            let vmax = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let cond = if vmin == 0.0 {
                f64::INFINITY
            } else {
                vmax / vmin
            };
            (cond, vectors.column(imin).into_owned())
        }
        Some(_) => (1.0, DVector::zeros(0)),
        None => (f64::INFINITY, DVector::zeros(m.nrows())),
    }
}

/// Schur complement of the closed block: `DN₊₊ − DN₊₋ D⁻¹ DN₋₊` with
/// `D = DN₋₋ + diag(kminus)`.
pub fn intermediate_dn(dn: &DnMatrix, kminus: &DVector<f64>) -> Result<IntermediateDn, DnError> {
    let mut d = dn.closed_closed();
    for (i, k) in kminus.iter().enumerate() {
        d[(i, i)] += k;
    }
    let (condition, null_vector) = condition_sym(&d);
    if !(condition < SINGULAR_CONDITION) {
        return Err(DnError::SingularD {
            lambda: dn.lambda,
            condition,
            null_vector,
        });
    }
    let a = dn.open_open();
    if d.nrows() == 0 {
        return Ok(IntermediateDn {
            lambda: dn.lambda,
            matrix: a,
            condition,
        });
    }
    let singular = || DnError::SingularD {
        lambda: dn.lambda,
        condition,
        null_vector: null_vector.clone(),
    };
    let x = d.lu().solve(&dn.closed_open()).ok_or_else(singular)?;
    let matrix = a - dn.open_closed() * x;
    Ok(IntermediateDn {
        lambda: dn.lambda,
        matrix,
        condition,
    })
}

/// Interior eigenpairs together with their boundary currents.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub pairs: Vec<InteriorEigenpair>,
    pub currents: Vec<BoundaryCurrent>,
}

impl SpectralData {
    pub fn new(
        pairs: Vec<InteriorEigenpair>,
        currents: Vec<BoundaryCurrent>,
    ) -> Result<Self, DnError> {
        check_aligned(&pairs, &currents)?;
        Ok(Self { pairs, currents })
    }

    pub fn dn(&self, lambda: f64, basis: &ChannelBasis) -> Result<DnMatrix, DnError> {
        dn_full(lambda, &self.pairs, &self.currents, basis)
    }

    /// Indices of the members of eigen-group `group`.
    pub fn group_members(&self, group: usize) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&i| self.pairs[i].group == group)
            .collect()
    }

    /// Distinct groups with eigenvalue strictly inside `(lo, hi)`, as
    /// `(group id, λ, member indices)`.
    pub fn groups_in(&self, lo: f64, hi: f64) -> Vec<(usize, f64, Vec<usize>)> {
        let mut out: Vec<(usize, f64, Vec<usize>)> = Vec::new();
        for (i, p) in self.pairs.iter().enumerate() {
            if !(p.lambda > lo && p.lambda < hi) {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == p.group => last.2.push(i),
                _ => out.push((p.group, p.lambda, alloc::vec![i])),
            }
        }
        out
    }

    /// `min |λ0 − λ_r|` over retained eigenvalues outside group `group`.
    pub fn spacing(&self, group: usize) -> f64 {
        let Some(l0) = self
            .pairs
            .iter()
            .find(|p| p.group == group)
            .map(|p| p.lambda)
        else {
            return f64::NAN;
        };
        self.pairs
            .iter()
            .filter(|p| p.group != group)
            .map(|p| (p.lambda - l0).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Which members of a degenerate group form the resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupSelector {
    /// The whole degenerate group.
    Full,
    /// One member (0-based position inside the group, ordered by label).
    Member(usize),
}

impl GroupSelector {
    pub fn select(&self, members: &[usize]) -> Vec<usize> {
        match *self {
            GroupSelector::Full => members.to_vec(),
            GroupSelector::Member(k) => members.get(k).map(|&i| alloc::vec![i]).unwrap_or_default(),
        }
    }
}

/// Single-pole resonance model `DN^F ≈ Φ Φᵀ / (λ − λ0F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePoleModel {
    /// Indices (into the spectral data) of the selected eigenpairs.
    pub selected: Vec<usize>,
    /// Unperturbed eigenvalue `λ0` of the selection.
    pub lambda0: f64,
    /// Self-consistent resonance `λ0F`.
    pub lambda0_f: f64,
    /// `|det M(λ0F)|` for one member, else the smallest `|eig M(λ0F)|`.
    pub residual: f64,
    /// Residue factor `Φ` (`n_open × rank`).
    pub phi0_f: RMat,
    /// `Φ Φᵀ`.
    pub residue: RMat,
    /// `√(tr ΦΦᵀ)`, which is `‖φ0F‖` for a rank-one residue.
    pub alpha: f64,
    /// Orthogonal projector onto the range of the residue.
    pub projector: RMat,
    pub rank: usize,
    /// Non-resonant closed block `k(λ0F) = K0₋₋ + diag(κ)`.
    pub k: RMat,
    /// `λ0 − eig(U₋ᵀ k_reg(λ0)⁻¹ U₋)` with `k` frozen at `λ0` (degenerate
    /// partners left out of `k`), descending.
    pub linearized: Vec<f64>,
    /// `λ0 − tr(U₋ᵀ diag(κ(λ0))⁻¹ U₋)/r`: the shift from the bare closed channels.
    pub bare_channel: f64,
}

impl SinglePoleModel {
    /// Leading normalized boundary-current direction `e0`.
    pub fn e0(&self) -> DVector<f64> {
        let n = self.phi0_f.nrows();
        if self.rank == 0 || self.phi0_f.ncols() == 0 {
            return DVector::zeros(n);
        }
        let (_, vectors) =
            sym_eigen(&self.residue).unwrap_or((DVector::zeros(n), RMat::identity(n, n)));
        let mut v = vectors.column(n - 1).into_owned();
        // orient along the first column of Φ
        if v.dot(&self.phi0_f.column(0)) < 0.0 {
            v = -v;
        }
        v
    }

    /// `ΦΦᵀ / (λ − λ0F)`.
    pub fn dn(&self, lambda: f64) -> RMat {
        &self.residue / (lambda - self.lambda0_f)
    }
}

/// Solving `λ = λ0 − ⟨U₋, k(λ)⁻¹ U₋⟩` with `k` frozen at `λ0` reproduces a
/// linear equation `κ₂ (c + λ − λ0) = 0`; this returns its solution `λ0 − c`
/// for a supplied constant `c`.
pub fn linearized_with_constant(lambda0: f64, constant: f64) -> f64 {
    lambda0 - constant
}

/// Everything needed to evaluate `M(λ)` for one selection.
struct ResonanceSystem<'a> {
    data: &'a SpectralData,
    basis: &'a ChannelBasis,
    rest: Vec<usize>,
    u_open: RMat,
    u_closed: RMat,
    lambda0: f64,
}

struct Evaluation {
    m: RMat,
    k: RMat,
    k_inv_u: RMat,
    k_open_closed: RMat,
    kappa: DVector<f64>,
}

impl ResonanceSystem<'_> {
    fn rest_series(&self, lambda: f64, power: i32) -> RMat {
        series(
            lambda,
            &self.data.pairs,
            &self.data.currents,
            self.rest.iter().copied(),
            power,
            self.basis.len(),
        )
    }

    fn evaluate(&self, lambda: f64) -> Option<Evaluation> {
        if self
            .rest
            .iter()
            .any(|&s| is_pole(lambda, self.data.pairs[s].lambda))
        {
            return None;
        }
        let kappa = self.basis.k_minus(lambda).ok()?;
        let k0 = DnMatrix::new(lambda, self.rest_series(lambda, 1), self.basis.n_open());
        let mut k = k0.closed_closed();
        for (i, v) in kappa.iter().enumerate() {
            k[(i, i)] += v;
        }
        let k_inv_u = k.clone().lu().solve(&self.u_closed)?;
        let r = self.u_open.ncols();
        let m =
            RMat::identity(r, r) * (lambda - self.lambda0) + self.u_closed.transpose() * &k_inv_u;
        if m.iter().any(|x| !x.is_finite()) {
            return None;
        }
        Some(Evaluation {
            m,
            k,
            k_inv_u,
            k_open_closed: k0.open_closed(),
            kappa,
        })
    }

    fn closed_decoupled(&self) -> bool {
        self.u_closed.norm() <= 1e-14 * self.u_open.norm().max(1.0)
    }

    /// The same selection with its degenerate partners dropped from the rest.
    fn regular(&self) -> Self {
        let rest = self
            .rest
            .iter()
            .copied()
            .filter(|&s| !is_degenerate(self.data.pairs[s].lambda, self.lambda0))
            .collect();
        ResonanceSystem {
            data: self.data,
            basis: self.basis,
            rest,
            u_open: self.u_open.clone(),
            u_closed: self.u_closed.clone(),
            lambda0: self.lambda0,
        }
    }

    fn det(&self, lambda: f64) -> Option<f64> {
        self.evaluate(lambda).map(|e| e.m.determinant())
    }
}

/// Bisection-secant (Illinois) refinement of a sign change of `f` on `[a, b]`.
/// Returns `None` if the bracket collapses onto a pole instead of a root.
fn refine_root(
    f: impl Fn(f64) -> Option<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Option<f64> {
    let bound = fa.abs().min(fb.abs());
    let tol = ROOT_REL_TOL * a.abs().max(b.abs()).max(1.0);
    let mut side = 0;
    for _ in 0..ROOT_MAX_ITER {
        if (b - a).abs() <= tol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = match f(x) {
            Some(v) => v,
            None => {
                x = 0.5 * (a + b);
                f(x)?
            }
        };
        if fx == 0.0 {
            return Some(x);
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        // pure bisection step keeps the bracket shrinking geometrically
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let x = if fa.abs() < fb.abs() { a } else { b };
    let fx = f(x)?;
    (fx.abs() <= bound).then_some(x)
}

/// Fits the single-pole model for the eigenpairs `selection` (indices into
/// `data`, all with the same eigenvalue).
///
/// The resonance `λ0F` is the zero of `det M(λ)` closest to `λ0` from below,
/// searched on `(band lower edge + 1e-6, λ0)`. Its residue is
/// `φF N (Nᵀ M′ N)⁻¹ Nᵀ φFᵀ` with `N` the null space of `M(λ0F)`, so the
/// rank of the model equals the number of coinciding roots.
pub fn single_pole_fit(
    selection: &[usize],
    data: &SpectralData,
    basis: &ChannelBasis,
) -> Result<SinglePoleModel, DnError> {
    if selection.is_empty() {
        return Err(DnError::EmptySelection);
    }
    let lambda0 = data.pairs[selection[0]].lambda;
    if selection
        .iter()
        .any(|&i| !is_degenerate(data.pairs[i].lambda, lambda0))
    {
        return Err(DnError::NotDegenerate);
    }
    let (lower, upper) = basis.band();
    if !(lambda0 > lower && lambda0 < upper) {
        return Err(DnError::OutsideBand {
            lambda0,
            lower,
            upper,
        });
    }

    let n_open = basis.n_open();
    let n_closed = basis.n_closed();
    let r = selection.len();
    let mut u_open = RMat::zeros(n_open, r);
    let mut u_closed = RMat::zeros(n_closed, r);
    for (j, &s) in selection.iter().enumerate() {
        let c = &data.currents[s];
        u_open.set_column(j, &c.open());
        u_closed.set_column(j, &c.closed());
    }
    let rest: Vec<usize> = (0..data.pairs.len())
        .filter(|i| !selection.contains(i))
        .collect();
    let system = ResonanceSystem {
        data,
        basis,
        rest,
        u_open,
        u_closed,
        lambda0,
    };

    let bare_channel = bare_channel_value(&system);
    let linearized = linearized_values(&system);

    if system.closed_decoupled() {
        // M(λ) = (λ − λ0) I and φF = U₊.
        let phi0_f = system.u_open.clone();
        let residue = &phi0_f * phi0_f.transpose();
        let alpha = libm::sqrt(residue.trace().max(0.0));
        let (projector, rank) = range_projector(&phi0_f, 1e-10);
        if rank == 0 || alpha <= 1e-12 {
            return Err(DnError::Decoupled { lambda: lambda0 });
        }
        let k = system
            .regular()
            .evaluate(lambda0)
            .map(|e| e.k)
            .unwrap_or_else(|| RMat::zeros(n_closed, n_closed));
        return Ok(SinglePoleModel {
            selected: selection.to_vec(),
            lambda0,
            lambda0_f: lambda0,
            residual: 0.0,
            phi0_f,
            residue,
            alpha,
            projector,
            rank,
            k,
            linearized,
            bare_channel,
        });
    }

    let lambda_f = locate_root(&system, lower + BAND_EDGE_OFFSET)?;
    let eval = system.evaluate(lambda_f).ok_or(DnError::NoRoot {
        lo: lower,
        hi: lambda0,
    })?;

    let (mvals, mvecs) = sym_eigen(&eval.m).ok_or(DnError::NoRoot {
        lo: lower,
        hi: lambda0,
    })?;
    let scale = mvals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let residual = if r == 1 {
        eval.m[(0, 0)].abs()
    } else {
        mvals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()))
    };
    let null: Vec<usize> = (0..r).filter(|&i| mvals[i].abs() <= 1e-8 * scale).collect();
    let null = if null.is_empty() {
        // closest eigenvalue to zero
        let i = (0..r)
            .min_by(|&i, &j| mvals[i].abs().total_cmp(&mvals[j].abs()))
            .unwrap();
        alloc::vec![i]
    } else {
        null
    };
    let mut n_basis = RMat::zeros(r, null.len());
    for (j, &i) in null.iter().enumerate() {
        n_basis.set_column(j, &mvecs.column(i));
    }

    // φF = U₊ − K0₊₋ k⁻¹ U₋
    let phi_f = &system.u_open - &eval.k_open_closed * &eval.k_inv_u;

    // M′ = I + G′, G′ = −(k⁻¹U₋)ᵀ k′ (k⁻¹U₋), k′ = K0′₋₋ − diag(1/(2κ))
    let k0_prime =
        DnMatrix::new(lambda_f, -system.rest_series(lambda_f, 2), n_open).closed_closed();
    let mut k_prime = k0_prime;
    for (i, v) in eval.kappa.iter().enumerate() {
        k_prime[(i, i)] -= 0.5 / v;
    }
    let m_prime = RMat::identity(r, r) - eval.k_inv_u.transpose() * &k_prime * &eval.k_inv_u;
    let metric = n_basis.transpose() * &m_prime * &n_basis;
    let chol = metric
        .cholesky()
        .ok_or(DnError::IndefiniteResidue { lambda: lambda_f })?;
    // Φ = φF N L⁻ᵀ
    let l_inv_t = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or(DnError::IndefiniteResidue { lambda: lambda_f })?;
    let phi0_f = &phi_f * &n_basis * l_inv_t;
    let residue = &phi0_f * phi0_f.transpose();
    let alpha = libm::sqrt(residue.trace().max(0.0));
    let (projector, rank) = range_projector(&phi0_f, 1e-10);
    if rank == 0 || alpha <= 1e-12 {
        return Err(DnError::Decoupled { lambda: lambda_f });
    }

    Ok(SinglePoleModel {
        selected: selection.to_vec(),
        lambda0,
        lambda0_f: lambda_f,
        residual,
        phi0_f,
        residue,
        alpha,
        projector,
        rank,
        k: eval.k,
        linearized,
        bare_channel,
    })
}

fn bare_channel_value(system: &ResonanceSystem<'_>) -> f64 {
    let Ok(kappa) = system.basis.k_minus(system.lambda0) else {
        return f64::NAN;
    };
    let r = system.u_closed.ncols();
    let mut g = 0.0;
    for j in 0..r {
        for (i, k) in kappa.iter().enumerate() {
            g += system.u_closed[(i, j)] * system.u_closed[(i, j)] / k;
        }
    }
    system.lambda0 - g / r as f64
}

fn is_degenerate(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEGENERACY_TOL * a.abs().max(b.abs())
}

fn locate_root(system: &ResonanceSystem<'_>, lo: f64) -> Result<f64, DnError> {
    let lambda0 = system.lambda0;
    let none = DnError::NoRoot { lo, hi: lambda0 };

    let hi = lambda0 - 1e-9 * lambda0.abs().max(1.0);
    if !(hi > lo) {
        return Err(none);
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let f = |x: f64| system.det(x);
    let mut prev: Option<(f64, f64)> = f(hi).map(|v| (hi, v));
    for i in 1..SCAN_POINTS {
        let x = hi - i as f64 * step;
        let fx = f(x);
        if let (Some((xp, fp)), Some(fc)) = (prev, fx) {
            if fc == 0.0 {
                return Ok(x);
            }
            if (fp < 0.0) != (fc < 0.0) {
                if let Some(root) = refine_root(f, x, xp, fc, fp) {
                    return Ok(root);
                }
            }
        }
        prev = fx.map(|v| (x, v));
    }
    Err(none)
}

fn linearized_values(system: &ResonanceSystem<'_>) -> Vec<f64> {
    let lambda0 = system.lambda0;
    let frozen = system.regular();
    let Some(eval) = frozen.evaluate(lambda0) else {
        return Vec::new();
    };
    let Some((g, _)) = sym_eigen(&eval.m) else {
        return Vec::new();
    };
    let mut out: Vec<f64> = g.iter().map(|v| lambda0 - v).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Diagnostics for the single-pole approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    /// Distance from `λ0` to the nearest retained eigenvalue outside its group.
    pub rho0: f64,
    pub multiplicity: usize,
    /// Widest wire over the well diameter.
    pub delta_over_diameter: f64,
    /// Spectral norm of the regular part `K0(λ0F)` of the well DN map.
    pub regular_norm: f64,
    /// `α² / (ρ0 ‖K0‖)`.
    pub dominance: f64,
    pub pass: bool,
}

pub fn validity_report(
    spec: &JunctionSpec,
    model: &SinglePoleModel,
    data: &SpectralData,
    basis: &ChannelBasis,
) -> ValidityReport {
    let group = data.pairs[model.selected[0]].group;
    let rho0 = data.spacing(group);
    let multiplicity = data.group_members(group).len();
    let delta = spec.wires.iter().map(|w| w.width).fold(0.0, f64::max);
    let delta_over_diameter = delta / spec.well.diameter();
    let rest = (0..data.pairs.len()).filter(|i| !model.selected.contains(i));
    let k0 = series(
        model.lambda0_f,
        &data.pairs,
        &data.currents,
        rest,
        1,
        basis.len(),
    );
    let regular_norm = spectral_norm_sym(&k0);
    let dominance = model.alpha * model.alpha / (rho0 * regular_norm);
    ValidityReport {
        rho0,
        multiplicity,
        delta_over_diameter,
        regular_norm,
        dominance,
        pass: dominance >= 1.0,
    }
}

/// The λ-derivative of the truncated series, `−Σ φ_s φ_sᵀ / (λ − λ_s)²`.
pub fn dn_derivative(
    lambda: f64,
    pairs: &[InteriorEigenpair],
    currents: &[BoundaryCurrent],
    basis: &ChannelBasis,
) -> Result<DnMatrix, DnError> {
    check_aligned(pairs, currents)?;
    let m = series(lambda, pairs, currents, 0..pairs.len(), 2, basis.len());
    Ok(DnMatrix::new(lambda, -m, basis.n_open()))
}

/// Convenience: `DN^F(λ)` straight from spectral data.
pub fn intermediate_at(
    lambda: f64,
    data: &SpectralData,
    basis: &ChannelBasis,
) -> Result<IntermediateDn, DnError> {
    let dn = data.dn(lambda, basis)?;
    let kminus = basis.k_minus(lambda)?;
    intermediate_dn(&dn, &kminus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interior::{boundary_current, lowest_rect_eigenpairs, EigenRep};
    use crate::model::{builtin_example, JunctionSpec};
    use alloc::vec;

    fn small_spec(closed_modes: usize) -> JunctionSpec {
        let mut spec = builtin_example();
        spec.solver.closed_modes = closed_modes;
        spec
    }

    fn pair(lambda: f64, group: usize) -> InteriorEigenpair {
        InteriorEigenpair {
            lambda,
            rep: EigenRep::Analytic {
                m: 1,
                n: 1,
                width_a: 1.0,
                height_b: 1.0,
            },
            group,
            sign: 1.0,
        }
    }

    fn current(values: &[f64], n_open: usize) -> BoundaryCurrent {
        BoundaryCurrent::from_coefficients(DVector::from_column_slice(values), n_open)
    }

    fn example_data(spec: &JunctionSpec, basis: &ChannelBasis) -> SpectralData {
        let pairs = lowest_rect_eigenpairs(&spec.well, spec.solver.interior_modes).unwrap();
        let currents = pairs.iter().map(|p| boundary_current(p, basis)).collect();
        SpectralData::new(pairs, currents).unwrap()
    }

    #[test]
    fn schur_complement_of_a_two_by_two() {
        let dn = DnMatrix::new(0.0, RMat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]), 1);
        let f = intermediate_dn(&dn, &DVector::from_element(1, 1.0)).unwrap();
        assert!((f.matrix[(0, 0)] - 1.75).abs() < 1e-15);
    }

    #[test]
    fn decoupled_closed_block_leaves_open_block() {
        let m = RMat::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.5, -2.0, 0.0, 0.0, 0.0, 4.0]);
        let dn = DnMatrix::new(0.0, m.clone(), 2);
        let f = intermediate_dn(&dn, &DVector::from_element(1, 3.0)).unwrap();
        assert_eq!(f.matrix, m.view((0, 0), (2, 2)).into_owned());
    }

    #[test]
    fn singular_closed_block_is_reported() {
        let dn = DnMatrix::new(0.0, RMat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -2.0]), 1);
        match intermediate_dn(&dn, &DVector::from_element(1, 2.0)) {
            Err(DnError::SingularD { null_vector, .. }) => {
                assert!((null_vector[0].abs() - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_term_series() {
        let basis = ChannelBasis::new(&small_spec(2)).unwrap();
        let c = [0.3, -0.2, 0.1, 0.5, 0.0, -0.4];
        let data = SpectralData::new(vec![pair(7.0, 0)], vec![current(&c, 3)]).unwrap();
        let dn = data.dn(5.5, &basis).unwrap();
        let v = DVector::from_column_slice(&c);
        let expected = &v * v.transpose() / (5.5 - 7.0);
        assert!((dn.matrix - expected).norm() < 1e-15);
        assert!(matches!(data.dn(7.0, &basis), Err(DnError::Pole { .. })));
    }

    #[test]
    fn misaligned_data() {
        let r = SpectralData::new(vec![pair(1.0, 0), pair(2.0, 1)], vec![current(&[1.0], 1)]);
        assert_eq!(
            r,
            Err(DnError::Misaligned {
                pairs: 2,
                currents: 1
            })
        );
    }

    #[test]
    fn series_decays_like_inverse_lambda() {
        let spec = small_spec(4);
        let basis = ChannelBasis::new(&spec).unwrap();
        let data = example_data(&spec, &basis);
        let n1 = data.dn(-1e5, &basis).unwrap().matrix.norm();
        let n2 = data.dn(-1e6, &basis).unwrap().matrix.norm();
        assert!((n1 / n2 - 10.0).abs() < 0.1, "{}", n1 / n2);
    }

    #[test]
    fn constant_shift() {
        assert!((linearized_with_constant(5.0, 0.67) - 4.33).abs() < 1e-15);
    }

    #[test]
    fn no_closed_coupling_keeps_the_eigenvalue() {
        let basis = ChannelBasis::new(&small_spec(2)).unwrap();
        let a = [0.3, -0.2, 0.1, 0.0, 0.0, 0.0];
        let b = [0.1, 0.4, 0.0, 0.0, 0.0, 0.0];
        let other = [0.2, 0.2, 0.2, 0.3, -0.1, 0.2];
        let data = SpectralData::new(
            vec![pair(2.0, 0), pair(5.0, 1), pair(5.0, 1), pair(20.0, 2)],
            vec![
                current(&other, 3),
                current(&a, 3),
                current(&b, 3),
                current(&other, 3),
            ],
        )
        .unwrap();
        let single = single_pole_fit(&[1], &data, &basis).unwrap();
        assert_eq!(single.lambda0_f, 5.0);
        assert_eq!(single.rank, 1);
        let full = single_pole_fit(&data.group_members(1), &data, &basis).unwrap();
        assert_eq!(full.lambda0_f, 5.0);
        assert_eq!(full.rank, 2);
        assert!((full.projector.trace() - 2.0).abs() < 1e-12);
        let ua = DVector::from_column_slice(&a[..3]);
        let ub = DVector::from_column_slice(&b[..3]);
        let expected = &ua * ua.transpose() + &ub * ub.transpose();
        assert!((full.residue - expected).norm() < 1e-14);
    }

    #[test]
    fn eigenvalue_outside_band_is_rejected() {
        let basis = ChannelBasis::new(&small_spec(2)).unwrap();
        let data = SpectralData::new(vec![pair(2.0, 0)], vec![current(&[1.0; 6], 3)]).unwrap();
        assert!(matches!(
            single_pole_fit(&[0], &data, &basis),
            Err(DnError::OutsideBand { .. })
        ));
        assert_eq!(
            single_pole_fit(&[], &data, &basis),
            Err(DnError::EmptySelection)
        );
    }

    #[test]
    fn example_resonance_and_residue() {
        let spec = builtin_example();
        let basis = ChannelBasis::new(&spec).unwrap();
        let data = example_data(&spec, &basis);
        let members =
            data.group_members(data.pairs.iter().find(|p| p.lambda == 5.0).unwrap().group);
        let model =
            single_pole_fit(&GroupSelector::Member(0).select(&members), &data, &basis).unwrap();
        assert_eq!(data.pairs[model.selected[0]].label(), (1, 2));
        assert!(
            model.lambda0_f > 4.0 && model.lambda0_f < 5.0,
            "{}",
            model.lambda0_f
        );
        assert!(model.residual <= 1e-10);
        assert_eq!(model.rank, 1);

        let mut best = f64::INFINITY;
        for eps in [1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
            let l = model.lambda0_f + eps;
            let f = intermediate_at(l, &data, &basis).unwrap();
            best = best.min((f.matrix * eps - &model.residue).norm());
        }
        assert!(best <= 1e-6, "{best}");

        let flipped = SpectralData::new(
            data.pairs.iter().map(|p| p.negated()).collect(),
            data.pairs
                .iter()
                .map(|p| boundary_current(&p.negated(), &basis))
                .collect(),
        )
        .unwrap();
        let model2 = single_pole_fit(&model.selected, &flipped, &basis).unwrap();
        assert!((model2.lambda0_f - model.lambda0_f).abs() < 1e-13);
        assert!((model2.residue - &model.residue).norm() < 1e-12);
    }

    #[test]
    fn spacing_scales_with_the_well() {
        let spec = builtin_example();
        let basis = ChannelBasis::new(&spec).unwrap();
        let data = example_data(&spec, &basis);
        let mut small = spec.clone();
        small.well.width_a *= 0.5;
        small.well.height_b *= 0.5;
        let pairs = lowest_rect_eigenpairs(&small.well, 20).unwrap();
        let currents = pairs.iter().map(|p| boundary_current(p, &basis)).collect();
        let small_data = SpectralData::new(pairs, currents).unwrap();
        let g = data.pairs[1].group;
        assert!((small_data.spacing(g) - 4.0 * data.spacing(g)).abs() < 1e-12);
    }
}
