use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub(crate) type RMat = DMatrix<f64>;
pub(crate) type CMat = DMatrix<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Symmetric eigen-decomposition with eigenvalues ascending.
pub(crate) fn sym_eigen(m: &RMat) -> Option<(DVector<f64>, RMat)> {
    let n = m.nrows();
    if n == 0 {
        return Some((DVector::zeros(0), RMat::zeros(0, 0)));
    }
    let sym = 0.5 * (m + m.transpose());
    let eig = nalgebra::SymmetricEigen::try_new(sym, EIGEN_EPS, EIGEN_MAX_ITER)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = RMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Some((values, vectors))
}

pub(crate) fn spectral_norm_sym(m: &RMat) -> f64 {
    match sym_eigen(m) {
        Some((values, _)) => values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
        None => f64::NAN,
    }
}

pub(crate) fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub(crate) fn complex_identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `‖M†M − I‖_F`.
pub(crate) fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - complex_identity(n)).norm()
}

/// `‖M − Mᵀ‖_F`.
pub(crate) fn symmetry_defect(m: &CMat) -> f64 {
    (m - m.transpose()).norm()
}

/// Orthogonal projector onto the span of the columns of `m` whose Gram
/// eigenvalues exceed `rel_tol` times the largest.
pub(crate) fn range_projector(m: &RMat, rel_tol: f64) -> (RMat, usize) {
    let n = m.nrows();
    let gram = m * m.transpose();
    let Some((values, vectors)) = sym_eigen(&gram) else {
        return (RMat::zeros(n, n), 0);
    };
    let top = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut p = RMat::zeros(n, n);
    let mut rank = 0;
    if top == 0.0 {
        return (p, 0);
    }
    for k in 0..n {
        if values[k] > rel_tol * top {
            let v = vectors.column(k);
            p += v * v.transpose();
            rank += 1;
        }
    }
    (p, rank)
}

/// Numerical rank of a complex matrix via its singular values.
pub(crate) fn complex_rank(m: &CMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0_f64, |a, &v| a.max(v));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > rel_tol * top).count()
}
