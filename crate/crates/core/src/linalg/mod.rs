//! Dense complex matrix kernels: Hermitian spectra, semidefinite margins, principal square
//! roots, the scalar functional calculus and seeded random ensembles.

pub mod eig;
pub mod matrix;
pub mod random;
pub mod sqrt;

pub use eig::{
    classify_margin, func_calc, herm_eig, herm_eigenvalues, is_pd, is_psd, psd_margin, Definiteness, HermEig,
};
pub use matrix::{imag_part, real_part, CMatrix, HMatrix, C64, I, MAX_COND, TOL_HERM, TOL_PSD, TOL_RECON};
pub use random::{random_matrix, MatrixKind, Rng};
pub use sqrt::{principal_sqrt, schur, Schur, TOL_BRANCH};
