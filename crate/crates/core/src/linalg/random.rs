//! Seeded random numbers and random matrix ensembles.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::matrix::{CMatrix, C64};

/// Shift used by [`MatrixKind::Pd`].
pub const PD_SHIFT: f64 = 0.1;

/// A ChaCha20 stream keyed by `(seed, stream)`.
///
/// ChaCha output is specified bit-for-bit, and the normal deviates use Box–Muller on top of it,
/// so a given `(seed, stream)` pair draws the same sequence on every platform.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { seed, stream, inner, spare: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random::<u64>()
    }

    /// Standard normal deviate (Box–Muller).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the log finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }
}

/// Random matrix ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// i.i.d. standard complex Gaussian entries.
    Ginibre,
    /// `(G + G*)/2` for Ginibre `G`.
    Hermitian,
    /// `G*G`.
    Psd,
    /// `G*G + 0.1·I`.
    Pd,
    /// Haar unitary: the `Q` factor of a Ginibre draw with phases fixed by `R`'s diagonal.
    Unitary,
}

pub fn ginibre(n: usize, rng: &mut Rng) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, rng.complex_normal());
        }
    }
    m
}

/// Haar-distributed unitary via modified Gram–Schmidt on Ginibre columns.
fn haar_unitary(n: usize, rng: &mut Rng) -> CMatrix {
    loop {
        let g = ginibre(n, rng);
        let mut q = g.clone();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let dot: C64 = (0..n).map(|i| q.get(i, k).conj() * q.get(i, j)).sum();
                for i in 0..n {
                    let v = q.get(i, j) - dot * q.get(i, k);
                    q.set(i, j, v);
                }
            }
            // second pass for orthogonality at machine precision
            for k in 0..j {
                let dot: C64 = (0..n).map(|i| q.get(i, k).conj() * q.get(i, j)).sum();
                for i in 0..n {
                    let v = q.get(i, j) - dot * q.get(i, k);
                    q.set(i, j, v);
                }
            }
            let norm = (0..n).map(|i| q.get(i, j).norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            // R's diagonal is real positive in Gram–Schmidt, so the phase fix is already applied.
            for i in 0..n {
                let v = q.get(i, j) / norm;
                q.set(i, j, v);
            }
        }
        if ok {
            return q;
        }
    }
}

pub fn random_matrix(kind: MatrixKind, n: usize, rng: &mut Rng) -> CMatrix {
    assert!(n >= 1, "matrix size must be positive");
    match kind {
        MatrixKind::Ginibre => ginibre(n, rng),
        MatrixKind::Hermitian => {
            let g = ginibre(n, rng);
            super::matrix::HMatrix::symmetrize(&g).into_cmatrix()
        }
        MatrixKind::Psd => {
            let g = ginibre(n, rng);
            super::matrix::HMatrix::symmetrize(&(&g.adjoint() * &g)).into_cmatrix()
        }
        MatrixKind::Pd => {
            let g = ginibre(n, rng);
            let p = &(&g.adjoint() * &g) + &CMatrix::identity(n).scale_real(PD_SHIFT);
            super::matrix::HMatrix::symmetrize(&p).into_cmatrix()
        }
        MatrixKind::Unitary => haar_unitary(n, rng),
    }
}
