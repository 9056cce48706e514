//! Concrete operator systems, points of `M_n ⊗ R`, the semidefinite order and free domains.
//!
//! A system is the real span of self-adjoint `k×k` matrices `E_1..E_m` containing the
//! identity. A level-`n` point carries complex coefficients `A_1..A_m` and realizes as the
//! `nk × nk` matrix `Σ E_j ⊗ A_j`, laid out as a `k×k` grid of `n×n` blocks.

pub mod domain;
pub mod point;
pub mod sample;
pub mod system;

pub use domain::{in_domain, order_leq, order_margin, DomainKind, DomainSpec};
pub use point::NCPoint;
pub use sample::{
    random_hermitian_point, random_psd_direction, sample_halfplane, sample_in_domain, sample_ordered_pair,
    sample_ordered_pair_with, PairOptions,
};
pub use system::{permute, shuffle_permutation, OpSysBasis};

pub(crate) use sample::target_window;
