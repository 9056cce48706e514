//! Hermitian eigendecomposition and the functional calculus built on it.

use nalgebra::SymmetricEigen;

use super::matrix::{CMatrix, HMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;

/// Eigen-pairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are the matching orthonormal eigenvectors.
    pub vectors: CMatrix,
}

impl HermEig {
    /// `U·diag(f(λ))·U*`
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HMatrix {
        let u = self.vectors.as_dmatrix();
        let n = self.eigenvalues.len();
        let mut scaled = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let v = C64::new(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= v;
            }
        }
        HMatrix::symmetrize(&CMatrix::from_dmatrix(scaled * u.adjoint()))
    }
}

/// `A = U·diag(λ)·U*` with λ ascending.
pub fn herm_eig(a: &HMatrix) -> Result<HermEig> {
    let m = a.as_cmatrix().as_dmatrix().clone();
    let eig =
        SymmetricEigen::try_new(m, f64::EPSILON, MAX_SWEEPS).ok_or(Error::NoConvergence { iterations: MAX_SWEEPS })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence { iterations: MAX_SWEEPS });
    }
    let n = eigenvalues.len();
    let vectors = CMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { eigenvalues, vectors })
}

/// Eigenvalues only, ascending.
pub fn herm_eigenvalues(a: &HMatrix) -> Result<Vec<f64>> {
    let m = a.as_cmatrix().as_dmatrix().clone();
    let eig =
        SymmetricEigen::try_new(m, f64::EPSILON, MAX_SWEEPS).ok_or(Error::NoConvergence { iterations: MAX_SWEEPS })?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence { iterations: MAX_SWEEPS });
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Smallest eigenvalue. PSD means `margin ≥ −tol·(1+‖A‖)`, PD means `margin > tol·(1+‖A‖)`.
pub fn psd_margin(a: &HMatrix) -> Result<f64> {
    Ok(herm_eigenvalues(a)?[0])
}

/// Classification of a margin against a relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    /// Within `[-tol, tol]`; counts as semidefinite.
    Boundary,
    Negative,
}

pub fn classify_margin(margin: f64, scale: f64, tol: f64) -> Definiteness {
    let t = tol * scale;
    if margin > t {
        Definiteness::Positive
    } else if margin >= -t {
        Definiteness::Boundary
    } else {
        Definiteness::Negative
    }
}

pub fn is_psd(a: &HMatrix, tol: f64) -> Result<bool> {
    let vals = herm_eigenvalues(a)?;
    let norm = vals.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(classify_margin(vals[0], 1.0 + norm, tol) != Definiteness::Negative)
}

pub fn is_pd(a: &HMatrix, tol: f64) -> Result<bool> {
    let vals = herm_eigenvalues(a)?;
    let norm = vals.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(classify_margin(vals[0], 1.0 + norm, tol) == Definiteness::Positive)
}

/// Functional calculus `f(A) = U·diag(f(λ_i))·U*` for `f` defined on the open interval `(lo, hi)`.
pub fn func_calc(f: impl Fn(f64) -> f64, domain: (f64, f64), a: &HMatrix) -> Result<HMatrix> {
    let eig = herm_eig(a)?;
    let (lo, hi) = domain;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| !(l > lo && l < hi)) {
        return Err(Error::OutsideSpectralDomain { eigenvalue: bad, lo, hi });
    }
    Ok(eig.apply(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_matrix, MatrixKind};
    use crate::linalg::Rng;

    fn residual(a: &HMatrix, e: &HermEig) -> f64 {
        let u = &e.vectors;
        let d = CMatrix::diag_real(&e.eigenvalues);
        (&(u * &d) * &u.adjoint() - a.as_cmatrix()).op_norm()
    }

    #[test]
    fn diagonal_input_sorted() {
        let e = herm_eig(&HMatrix::diag(&[3.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        // a permutation: every entry has modulus 0 or 1
        for i in 0..2 {
            for j in 0..2 {
                let m = e.vectors.get(i, j).norm();
                assert!(m.abs() < 1e-15 || (m - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn swap_matrix_eigenvalues() {
        let a = HMatrix::new(CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let e = herm_eig(&a).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!((psd_margin(&a).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_eigenvalues() {
        let e = herm_eig(&HMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
        assert_eq!(psd_margin(&HMatrix::identity(3)).unwrap(), 1.0);
        assert_eq!(psd_margin(&HMatrix::diag(&[1.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        for seed in 0..50 {
            let mut rng = Rng::new(seed, 0);
            let n = 1 + (seed as usize % 8);
            let a = HMatrix::symmetrize(&random_matrix(MatrixKind::Hermitian, n, &mut rng));
            let e = herm_eig(&a).unwrap();
            let tol = 1e-12 * (1.0 + a.op_norm());
            assert!(residual(&a, &e) <= tol, "seed {seed}");
            let gram = &e.vectors.adjoint() * &e.vectors;
            assert!((&gram - &CMatrix::identity(n)).op_norm() <= 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn func_calc_examples() {
        let r = func_calc(f64::sqrt, (0.0, f64::INFINITY), &HMatrix::diag(&[1.0, 4.0])).unwrap();
        assert!(r.as_cmatrix().max_abs_diff(&CMatrix::diag_real(&[1.0, 2.0])) < 1e-15);

        let ones = HMatrix::new(CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        let sq = func_calc(|x| x * x, (f64::NEG_INFINITY, f64::INFINITY), &ones).unwrap();
        let want = CMatrix::from_real_rows(&[&[2.0, 2.0], &[2.0, 2.0]]);
        assert!(sq.as_cmatrix().max_abs_diff(&want) < 1e-14);

        let mut rng = Rng::new(3, 1);
        let a = HMatrix::symmetrize(&random_matrix(MatrixKind::Hermitian, 5, &mut rng));
        let same = func_calc(|x| x, (f64::NEG_INFINITY, f64::INFINITY), &a).unwrap();
        assert!(same.as_cmatrix().max_abs_diff(a.as_cmatrix()) < 1e-12 * (1.0 + a.op_norm()));
    }

    #[test]
    fn func_calc_domain_error_names_eigenvalue() {
        let err = func_calc(f64::sqrt, (0.0, f64::INFINITY), &HMatrix::diag(&[2.0, -1.5])).unwrap_err();
        assert_eq!(err, Error::OutsideSpectralDomain { eigenvalue: -1.5, lo: 0.0, hi: f64::INFINITY });
    }

    #[test]
    fn margin_classification() {
        assert_eq!(classify_margin(1e-12, 1.0, 1e-8), Definiteness::Boundary);
        assert_eq!(classify_margin(-1e-12, 1.0, 1e-8), Definiteness::Boundary);
        assert_eq!(classify_margin(1e-3, 1.0, 1e-8), Definiteness::Positive);
        assert_eq!(classify_margin(-1e-3, 1.0, 1e-8), Definiteness::Negative);
    }
}
