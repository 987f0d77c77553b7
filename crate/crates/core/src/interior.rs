//! Dirichlet eigenpairs of the well and their boundary currents.
//!
//! With zero field the eigenpairs are the separable standing waves
//! `(2/√(ab)) sin(mπξ1/a) sin(nπξ2/b)`. With a field the 5-point discretization
//! of `-Δ + ⟨𝓔, ξ⟩` is used; on a rectangle it is the Kronecker sum of two
//! tridiagonal operators, so its eigenvectors are tensor products of 1-D
//! eigenvectors.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};

use crate::channels::{ChannelBasis, TraceFunction, TrigTerm};
use crate::model::{grid_intervals, Side, WellSpec};

/// Relative tolerance for grouping equal eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-12;

const FD_EIGEN_EPS: f64 = 1e-15;
/// Iteration budget handed to the symmetric QR eigensolver.
pub const FD_EIGEN_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("well has a nonzero field; use the finite-difference eigensolver")]
    NonzeroField,
    #[error("grid too coarse: {nx} x {ny} intervals (need at least 16 per side)")]
    GridTooCoarse { nx: usize, ny: usize },
    #[error("tridiagonal eigensolver did not converge within {budget} iterations")]
    NonConvergence { budget: usize },
}

/// Tensor-product grid function `u(ξ1_i, ξ2_j) = x[i] · y[j]` on interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMode {
    pub hx: f64,
    pub hy: f64,
    /// Values at `ξ1 = i·hx`, `i = 1..Mx`.
    pub x: Vec<f64>,
    /// Values at `ξ2 = j·hy`, `j = 1..My`.
    pub y: Vec<f64>,
    /// 0-based indices of the 1-D factors.
    pub factors: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EigenRep {
    Analytic {
        m: usize,
        n: usize,
        width_a: f64,
        height_b: f64,
    },
    Grid(GridMode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorEigenpair {
    pub lambda: f64,
    pub rep: EigenRep,
    /// Equal ids mark a degenerate group; ids increase with `lambda`.
    pub group: usize,
    /// Global sign of the eigenfunction (`±1`).
    pub sign: f64,
}

impl InteriorEigenpair {
    pub fn negated(&self) -> Self {
        Self {
            sign: -self.sign,
            ..self.clone()
        }
    }

    /// Index pair for analytic eigenpairs; 1-based factor numbers for grid ones.
    pub fn label(&self) -> (usize, usize) {
        match &self.rep {
            EigenRep::Analytic { m, n, .. } => (*m, *n),
            EigenRep::Grid(g) => (g.factors.0 + 1, g.factors.1 + 1),
        }
    }

    /// Eigenfunction value (analytic only; grid modes are evaluated at nodes).
    pub fn value(&self, xi1: f64, xi2: f64) -> Option<f64> {
        match &self.rep {
            EigenRep::Analytic {
                m,
                n,
                width_a,
                height_b,
            } => Some(
                self.sign * 2.0 / libm::sqrt(width_a * height_b)
                    * libm::sin(*m as f64 * PI * xi1 / width_a)
                    * libm::sin(*n as f64 * PI * xi2 / height_b),
            ),
            EigenRep::Grid(_) => None,
        }
    }
}

/// Result of a windowed eigenvalue enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenList {
    pub pairs: Vec<InteriorEigenpair>,
    /// `true` when `max_count` cut the list short.
    pub truncated: bool,
}

fn analytic_lambda(well: &WellSpec, m: usize, n: usize) -> f64 {
    let km = m as f64 * PI / well.width_a;
    let kn = n as f64 * PI / well.height_b;
    km * km + kn * kn
}

fn analytic_pair(well: &WellSpec, m: usize, n: usize) -> InteriorEigenpair {
    InteriorEigenpair {
        lambda: analytic_lambda(well, m, n),
        rep: EigenRep::Analytic {
            m,
            n,
            width_a: well.width_a,
            height_b: well.height_b,
        },
        group: 0,
        sign: 1.0,
    }
}

fn assign_groups(pairs: &mut [InteriorEigenpair]) {
    let mut group = 0;
    for i in 0..pairs.len() {
        if i > 0 {
            let prev = pairs[i - 1].lambda;
            let cur = pairs[i].lambda;
            if (cur - prev).abs() > DEGENERACY_TOL * cur.abs().max(prev.abs()) {
                group += 1;
            }
        }
        pairs[i].group = group;
    }
}

fn sort_pairs(pairs: &mut [InteriorEigenpair]) {
    pairs.sort_by(|p, q| {
        p.lambda
            .total_cmp(&q.lambda)
            .then(p.label().cmp(&q.label()))
    });
}

/// All analytic eigenvalues with `lo < λ < hi`, sorted, capped at `max_count`.
pub fn rect_eigenpairs(
    well: &WellSpec,
    window: (f64, f64),
    max_count: usize,
) -> Result<EigenList, EigenError> {
    if well.has_field() {
        return Err(EigenError::NonzeroField);
    }
    let (lo, hi) = window;
    let mut pairs = Vec::new();
    let m_max = (libm::sqrt(hi.max(0.0)) * well.width_a / PI) as usize + 1;
    let n_max = (libm::sqrt(hi.max(0.0)) * well.height_b / PI) as usize + 1;
    for m in 1..=m_max {
        for n in 1..=n_max {
            let lambda = analytic_lambda(well, m, n);
            if lambda > lo && lambda < hi {
                pairs.push(analytic_pair(well, m, n));
            }
        }
    }
    sort_pairs(&mut pairs);
    let truncated = pairs.len() > max_count;
    pairs.truncate(max_count);
    assign_groups(&mut pairs);
    Ok(EigenList { pairs, truncated })
}

/// The `count` lowest analytic eigenpairs, ties ordered by `(m, n)`.
pub fn lowest_rect_eigenpairs(
    well: &WellSpec,
    count: usize,
) -> Result<Vec<InteriorEigenpair>, EigenError> {
    if well.has_field() {
        return Err(EigenError::NonzeroField);
    }
    // (m, n) with m or n above `count` cannot be among the lowest `count`.
    let mut pairs = Vec::with_capacity(count * count);
    for m in 1..=count {
        for n in 1..=count {
            pairs.push(analytic_pair(well, m, n));
        }
    }
    sort_pairs(&mut pairs);
    pairs.truncate(count);
    assign_groups(&mut pairs);
    Ok(pairs)
}

/// Eigenpairs of `-d²/dt² + g t` on `(0, len)` with `m` intervals, Dirichlet ends.
fn tridiagonal_modes(
    len: f64,
    m: usize,
    slope: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let h = len / m as f64;
    let dim = m - 1;
    let inv_h2 = 1.0 / (h * h);
    let mut t = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        t[(i, i)] = 2.0 * inv_h2 + slope * (i + 1) as f64 * h;
        if i + 1 < dim {
            t[(i, i + 1)] = -inv_h2;
            t[(i + 1, i)] = -inv_h2;
        }
    }
    let eig = nalgebra::SymmetricEigen::try_new(t, FD_EIGEN_EPS, FD_EIGEN_BUDGET).ok_or(
        EigenError::NonConvergence {
            budget: FD_EIGEN_BUDGET,
        },
    )?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    for &k in &order {
        values.push(eig.eigenvalues[k]);
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let norm = libm::sqrt(h * v.iter().map(|x| x * x).sum::<f64>());
        let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let first = v
            .iter()
            .copied()
            .find(|x| x.abs() > 1e-8 * peak)
            .unwrap_or(1.0);
        let scale = if first < 0.0 { -1.0 / norm } else { 1.0 / norm };
        v.iter_mut().for_each(|x| *x *= scale);
        vectors.push(v);
    }
    Ok((values, vectors))
}

/// The `count` lowest eigenpairs of the 5-point discretization of `-Δ + ⟨𝓔, ξ⟩`.
///
/// The spacing along each axis is the side length over `round(side / h)`.
/// Eigenvectors are normalized in the grid inner product `hx hy Σ u²`, and the
/// first significant component of each 1-D factor is positive.
pub fn fd_eigenpairs(
    well: &WellSpec,
    h: f64,
    count: usize,
) -> Result<Vec<InteriorEigenpair>, EigenError> {
    let mx = grid_intervals(well.width_a, h);
    let my = grid_intervals(well.height_b, h);
    if mx < 16 || my < 16 {
        return Err(EigenError::GridTooCoarse { nx: mx, ny: my });
    }
    let (vx, ex) = tridiagonal_modes(well.width_a, mx, well.field[0])?;
    let (vy, ey) = tridiagonal_modes(well.height_b, my, well.field[1])?;
    let hx = well.width_a / mx as f64;
    let hy = well.height_b / my as f64;
    let cx = count.min(vx.len());
    let cy = count.min(vy.len());
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(cx * cy);
    for (i, x) in vx.iter().take(cx).enumerate() {
        for (j, y) in vy.iter().take(cy).enumerate() {
            candidates.push((x + y, i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    candidates.truncate(count);
    let mut pairs: Vec<InteriorEigenpair> = candidates
        .into_iter()
        .map(|(lambda, i, j)| InteriorEigenpair {
            lambda,
            rep: EigenRep::Grid(GridMode {
                hx,
                hy,
                x: ex[i].clone(),
                y: ey[j].clone(),
                factors: (i, j),
            }),
            group: 0,
            sign: 1.0,
        })
        .collect();
    assign_groups(&mut pairs);
    Ok(pairs)
}

/// Channel coefficients of the outward normal derivative of an eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurrent {
    /// Aligned with the [`ChannelBasis`] ordering (open block, then closed).
    pub coefficients: DVector<f64>,
    n_open: usize,
}

impl BoundaryCurrent {
    pub fn from_coefficients(coefficients: DVector<f64>, n_open: usize) -> Self {
        Self {
            coefficients,
            n_open,
        }
    }

    pub fn open(&self) -> DVector<f64> {
        self.coefficients.rows(0, self.n_open).into_owned()
    }

    pub fn closed(&self) -> DVector<f64> {
        let n = self.coefficients.len();
        self.coefficients
            .rows(self.n_open, n - self.n_open)
            .into_owned()
    }
}

/// Outward normal derivative of `sin(mπξ1/a) sin(nπξ2/b)·(2/√(ab))` on a side,
/// as a sine in the side coordinate.
fn analytic_normal_derivative(side: Side, m: usize, n: usize, a: f64, b: f64) -> TrigTerm {
    let norm = 2.0 / libm::sqrt(a * b);
    let km = m as f64 * PI / a;
    let kn = n as f64 * PI / b;
    let parity = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let (amplitude, frequency) = match side {
        Side::Left => (-norm * km, kn),
        Side::Right => (norm * km * parity(m), kn),
        Side::Bottom => (-norm * kn, km),
        Side::Top => (norm * kn * parity(n), km),
    };
    TrigTerm {
        amplitude,
        frequency,
        phase: 0.0,
    }
}

/// Piecewise-linear interpolant of interior node values on `(0, (len+1)·h)`
/// with zero boundary values.
fn interpolate_nodes(values: &[f64], h: f64, t: f64) -> f64 {
    let s = t / h;
    if s <= 0.0 {
        return 0.0;
    }
    let i = libm::floor(s) as usize;
    let frac = s - i as f64;
    let at = |k: usize| {
        if k == 0 || k > values.len() {
            0.0
        } else {
            values[k - 1]
        }
    };
    at(i) * (1.0 - frac) + at(i + 1) * frac
}

/// Second-order one-sided outward derivative factors on a grid mode.
fn grid_normal_factor(g: &GridMode, side: Side) -> (f64, &[f64], f64) {
    let one_sided = |v: &[f64], h: f64| (4.0 * v[0] - v[1]) / (2.0 * h);
    let one_sided_end = |v: &[f64], h: f64| {
        let k = v.len();
        (v[k - 2] - 4.0 * v[k - 1]) / (2.0 * h)
    };
    match side {
        Side::Left => (-one_sided(&g.x, g.hx), &g.y, g.hy),
        Side::Right => (one_sided_end(&g.x, g.hx), &g.y, g.hy),
        Side::Bottom => (-one_sided(&g.y, g.hy), &g.x, g.hx),
        Side::Top => (one_sided_end(&g.y, g.hy), &g.x, g.hx),
    }
}

/// Projects `∂Φ/∂n` (outward from the well) on every attachment segment onto
/// that wire's transverse modes.
pub fn boundary_current(pair: &InteriorEigenpair, basis: &ChannelBasis) -> BoundaryCurrent {
    let mut coefficients = DVector::zeros(basis.len());
    for wire in 0..basis.n_wires() {
        let side = basis.side_of(wire);
        let coeffs = match &pair.rep {
            EigenRep::Analytic {
                m,
                n,
                width_a,
                height_b,
            } => {
                let term = analytic_normal_derivative(side, *m, *n, *width_a, *height_b);
                basis.trace_decompose(wire, &TraceFunction::Trig(&[term]))
            }
            EigenRep::Grid(g) => {
                let (factor, along, h) = grid_normal_factor(g, side);
                let f = |t: f64| factor * interpolate_nodes(along, h, t);
                basis.trace_decompose(wire, &TraceFunction::General(&f))
            }
        };
        for (idx, c) in basis.wire_indices(wire).zip(coeffs) {
            coefficients[idx] = pair.sign * c;
        }
    }
    BoundaryCurrent {
        coefficients,
        n_open: basis.n_open(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example;
    use crate::quadrature::integrate;
    use alloc::vec;

    fn square() -> WellSpec {
        WellSpec {
            width_a: PI,
            height_b: PI,
            field: [0.0, 0.0],
        }
    }

    #[test]
    fn band_window_of_the_square() {
        let list = rect_eigenpairs(&square(), (4.0, 16.0), 100).unwrap();
        let lambdas: Vec<f64> = list.pairs.iter().map(|p| p.lambda).collect();
        let expected = [5.0, 5.0, 8.0, 10.0, 10.0, 13.0, 13.0];
        assert_eq!(lambdas.len(), expected.len());
        for (l, e) in lambdas.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12);
        }
        let labels: Vec<(usize, usize)> = list.pairs.iter().map(|p| p.label()).collect();
        assert_eq!(
            labels,
            vec![(1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2)]
        );
        let groups: Vec<usize> = list.pairs.iter().map(|p| p.group).collect();
        assert_eq!(groups, vec![0, 0, 1, 2, 2, 3, 3]);
        assert!(!list.truncated);
    }

    #[test]
    fn ground_window_and_scaling() {
        let list = rect_eigenpairs(&square(), (0.0, 4.0), 10).unwrap();
        assert_eq!(list.pairs.len(), 1);
        assert!((list.pairs[0].lambda - 2.0).abs() < 1e-14);

        let unit = WellSpec {
            width_a: 1.0,
            height_b: 1.0,
            field: [0.0, 0.0],
        };
        let p2 = PI * PI;
        let list = rect_eigenpairs(&unit, (0.0, 9.0 * p2), 10).unwrap();
        let expected = [2.0 * p2, 5.0 * p2, 5.0 * p2, 8.0 * p2];
        assert_eq!(list.pairs.len(), 4);
        for (p, e) in list.pairs.iter().zip(expected) {
            assert!((p.lambda - e).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_flag() {
        let list = rect_eigenpairs(&square(), (4.0, 16.0), 3).unwrap();
        assert!(list.truncated);
        assert_eq!(list.pairs.len(), 3);
    }

    #[test]
    fn field_rejected_by_analytic_solver() {
        let well = WellSpec {
            field: [1.0, 0.0],
            ..square()
        };
        assert_eq!(
            rect_eigenpairs(&well, (0.0, 10.0), 5),
            Err(EigenError::NonzeroField)
        );
    }

    #[test]
    fn lowest_pairs_match_window() {
        let lowest = lowest_rect_eigenpairs(&square(), 8).unwrap();
        let labels: Vec<(usize, usize)> = lowest.iter().map(|p| p.label()).collect();
        assert_eq!(
            labels,
            vec![
                (1, 1),
                (1, 2),
                (2, 1),
                (2, 2),
                (1, 3),
                (3, 1),
                (2, 3),
                (3, 2)
            ]
        );
    }

    #[test]
    fn analytic_normalization() {
        let pair = analytic_pair(&square(), 1, 2);
        // ∫∫ Φ² = 1 by separable quadrature
        let fx = integrate(|x| libm::sin(x).powi(2), 0.0, PI, 64);
        let fy = integrate(|y| libm::sin(2.0 * y).powi(2), 0.0, PI, 64);
        assert!((4.0 / (PI * PI) * fx * fy - 1.0).abs() < 1e-13);
        let v = pair.value(PI / 2.0, PI / 4.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn example_currents() {
        let basis = ChannelBasis::new(&builtin_example()).unwrap();
        let phi0 = analytic_pair(&square(), 1, 2);
        let c = boundary_current(&phi0, &basis);
        let open = c.open();
        assert!((open[0] + 1.0 / PI.sqrt()).abs() < 1e-14);
        assert!((open[1].abs() - 16.0 * 2f64.sqrt() / (3.0 * PI * PI.sqrt())).abs() < 1e-13);
        assert!(open[2].abs() < 1e-14);
        // the wire-1 current is proportional to the l = 1 profile
        for l in 2..=basis.l_max() {
            assert!(c.coefficients[basis.index(0, l)].abs() < 1e-14);
        }
        // wire 3 couples to its l = 2 channel
        assert!(c.coefficients[basis.index(2, 2)].abs() > 0.1);
    }

    #[test]
    fn sign_flip_flips_currents() {
        let basis = ChannelBasis::new(&builtin_example()).unwrap();
        let p = analytic_pair(&square(), 2, 3);
        let a = boundary_current(&p, &basis);
        let b = boundary_current(&p.negated(), &basis);
        assert_eq!(a.coefficients, -b.coefficients);
    }

    #[test]
    fn fd_matches_analytic() {
        let pairs = fd_eigenpairs(&square(), PI / 200.0, 7).unwrap();
        let expected = [2.0, 5.0, 5.0, 8.0, 10.0, 10.0, 13.0];
        for (p, e) in pairs.iter().zip(expected) {
            assert!((p.lambda - e).abs() / e < 0.01, "{} vs {}", p.lambda, e);
        }
        // degenerate partners are grouped
        assert_eq!(pairs[1].group, pairs[2].group);
    }

    #[test]
    fn fd_weak_field_is_continuous() {
        let weak = WellSpec {
            field: [1e-6, 0.0],
            ..square()
        };
        let h = PI / 64.0;
        let a = fd_eigenpairs(&square(), h, 7).unwrap();
        let b = fd_eigenpairs(&weak, h, 7).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p.lambda - q.lambda).abs() < 1e-4);
        }
    }

    #[test]
    fn fd_ground_state_has_one_sign() {
        let well = WellSpec {
            width_a: 2.0,
            height_b: 1.3,
            field: [0.0, 0.0],
        };
        let pairs = fd_eigenpairs(&well, 0.05, 1).unwrap();
        let EigenRep::Grid(g) = &pairs[0].rep else {
            panic!()
        };
        assert!(g.x.iter().all(|&v| v > 0.0) && g.y.iter().all(|&v| v > 0.0));
        let norm = g.hx
            * g.x.iter().map(|v| v * v).sum::<f64>()
            * g.hy
            * g.y.iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fd_second_order_convergence() {
        let err = |h: f64| {
            let p = fd_eigenpairs(&square(), h, 2).unwrap();
            (p[1].lambda - 5.0).abs()
        };
        let e1 = err(PI / 40.0);
        let e2 = err(PI / 80.0);
        let order = libm::log2(e1 / e2);
        assert!((order - 2.0).abs() < 0.05, "observed order {order}");
    }

    #[test]
    fn fd_currents_converge_to_analytic() {
        let basis = ChannelBasis::new(&builtin_example()).unwrap();
        let pairs = fd_eigenpairs(&square(), PI / 200.0, 3).unwrap();
        // (1,2) is the first of the λ ≈ 5 pair
        let fd = boundary_current(&pairs[1], &basis);
        let exact = boundary_current(&analytic_pair(&square(), 1, 2), &basis);
        let diff = (&fd.coefficients - &exact.coefficients).amax();
        assert!(diff < 2e-3, "max deviation {diff}");
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(
            fd_eigenpairs(&square(), PI / 8.0, 3),
            Err(EigenError::GridTooCoarse { .. })
        ));
    }
}
