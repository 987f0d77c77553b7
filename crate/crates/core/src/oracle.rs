//! Reference computations that avoid the Schur-complement route.
//!
//! [`mode_match_smatrix`] matches the full truncated channel Ansatz (open
//! channels oscillatory, closed channels decaying) directly against the
//! spectral series of the well, one incident channel at a time:
//!
//! ```text
//! (iΠ − DN) u = 2i P e_j,   Π = diag(p, iκ),   S e_j = u₊ − e_j.
//! ```

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::channels::{ChannelBasis, ChannelError};
use crate::dn::SpectralData;
use crate::linalg::CMat;
use crate::quadrature::integrate;
use crate::scattering::SMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("λ = {lambda} coincides with retained eigenvalue {eigenvalue}")]
    Pole { lambda: f64, eigenvalue: f64 },
    #[error("mode-matching system is singular at λ = {lambda}")]
    Singular { lambda: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Scattering matrix from the full mode-matching system, flux-normalized.
pub fn mode_match_smatrix(
    data: &SpectralData,
    basis: &ChannelBasis,
    lambda: f64,
) -> Result<SMatrix, OracleError> {
    let momenta = basis.open_momenta(lambda)?;
    let kappa = basis.k_minus(lambda)?;
    let n_open = basis.n_open();
    let dim = basis.len();

    let mut weights = Vec::with_capacity(data.pairs.len());
    for pair in &data.pairs {
        let gap = lambda - pair.lambda;
        if gap == 0.0 || (gap.abs() <= 1e-12 * pair.lambda.abs().max(1.0)) {
            return Err(OracleError::Pole {
                lambda,
                eigenvalue: pair.lambda,
            });
        }
        weights.push(1.0 / gap);
    }

    let mut system = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let mut v = 0.0;
            for (c, w) in data.currents.iter().zip(&weights) {
                v += w * c.coefficients[i] * c.coefficients[j];
            }
            system[(i, j)] = Complex64::new(-v, 0.0);
            system[(j, i)] = Complex64::new(-v, 0.0);
        }
    }
    for i in 0..dim {
        let diag = if i < n_open {
            Complex64::new(0.0, momenta[i])
        } else {
            Complex64::new(-kappa[i - n_open], 0.0)
        };
        system[(i, i)] += diag;
    }

    let mut rhs = CMat::zeros(dim, n_open);
    for j in 0..n_open {
        rhs[(j, j)] = Complex64::new(0.0, 2.0 * momenta[j]);
    }
    let u = system
        .lu()
        .solve(&rhs)
        .ok_or(OracleError::Singular { lambda })?;
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OracleError::Singular { lambda });
    }

    let matrix = CMat::from_fn(n_open, n_open, |i, j| {
        let s = if i == j { u[(i, j)] - 1.0 } else { u[(i, j)] };
        s * libm::sqrt(momenta[i] / momenta[j])
    });
    Ok(SMatrix {
        lambda,
        momenta,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub value: f64,
    /// `|I(2n) − I(n)|`.
    pub refinement_change: f64,
}

/// `∫ f g` over `segment` by composite Gauss–Legendre with `n_points` nodes.
pub fn overlap_quadrature(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    segment: (f64, f64),
    n_points: usize,
) -> Overlap {
    let n = n_points.max(16);
    let h = |t: f64| f(t) * g(t);
    let value = integrate(h, segment.0, segment.1, n);
    let refined = integrate(h, segment.0, segment.1, 2 * n);
    Overlap {
        value,
        refinement_change: (refined - value).abs(),
    }
}
