//! Samplers for domain points, comparable pairs and half-plane points.

use super::domain::{in_domain, DomainSpec};
use super::point::NCPoint;
use super::system::OpSysBasis;
use crate::error::{Error, Result};
use crate::linalg::{herm_eigenvalues, random_matrix, CMatrix, HMatrix, MatrixKind, Rng, C64, I};

/// Rejection budget for domain sampling.
pub const MAX_ATTEMPTS: usize = 1000;

/// Floor added to PSD directions (relative to their norm) so `Q − P` stays strictly ordered
/// after rounding.
const DIRECTION_FLOOR: f64 = 1e-9;

const MAX_HALVINGS: usize = 64;

/// A Hermitian point with GUE coefficients, scaled so its realization has unit spectral norm.
pub fn random_hermitian_point(sys: &OpSysBasis, n: usize, rng: &mut Rng) -> NCPoint {
    loop {
        let coeffs = (0..sys.m()).map(|_| random_matrix(MatrixKind::Hermitian, n, rng)).collect();
        let p = NCPoint::new_unchecked(sys.name().to_string(), n, coeffs);
        let norm = sys.realize(&p).map(|m| m.op_norm()).unwrap_or(0.0);
        if norm > 1e-8 {
            return p.scale(C64::new(1.0 / norm, 0.0));
        }
    }
}

fn spectrum(sys: &OpSysBasis, p: &NCPoint) -> Result<Vec<f64>> {
    herm_eigenvalues(&HMatrix::symmetrize(&sys.realize(p)?))
}

/// Picks a random target interval `[c, d]` for the realization spectrum inside `(lo, hi)`.
pub(crate) fn target_window(lo: f64, hi: f64, rng: &mut Rng) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let len = hi - lo;
            let pad = 1e-3 * len;
            let width = len * rng.uniform_in(0.05, 0.9);
            let start = lo + pad + rng.uniform() * (len - width - 2.0 * pad).max(0.0);
            (start, start + width)
        }
        (true, false) => {
            let c = lo + 10f64.powf(rng.uniform_in(-1.0, 0.3));
            (c, c + 10f64.powf(rng.uniform_in(-0.5, 1.0)))
        }
        (false, true) => {
            let d = hi - 10f64.powf(rng.uniform_in(-1.0, 0.3));
            (d - 10f64.powf(rng.uniform_in(-0.5, 1.0)), d)
        }
        (false, false) => {
            let centre = rng.uniform_in(-2.0, 2.0);
            let half = 0.5 * 10f64.powf(rng.uniform_in(-0.5, 1.0));
            (centre - half, centre + half)
        }
    }
}

/// Affinely moves the spectrum of `h` onto `[c, d]`: `α·h + β·1`.
fn place_spectrum(sys: &OpSysBasis, h: &NCPoint, (c, d): (f64, f64), rng: &mut Rng) -> Result<NCPoint> {
    let spec = spectrum(sys, h)?;
    let (lmin, lmax) = (spec[0], spec[spec.len() - 1]);
    let (alpha, beta) = if lmax - lmin > 1e-12 {
        let alpha = (d - c) / (lmax - lmin);
        (alpha, c - alpha * lmin)
    } else {
        (0.0, rng.uniform_in(c, d))
    };
    h.scale(C64::new(alpha, 0.0)).add(&sys.identity_point(h.level()).scale(C64::new(beta, 0.0)))
}

/// A Hermitian point in `d` at level `n`.
pub fn sample_in_domain(sys: &OpSysBasis, d: &DomainSpec, n: usize, rng: &mut Rng) -> Result<NCPoint> {
    let window = d.kind.spectral_window().ok_or_else(|| Error::SamplingFailure {
        attempts: 0,
        reason: format!("domain `{}` has no Hermitian points", d.kind),
    })?;
    for _ in 0..MAX_ATTEMPTS {
        let h = random_hermitian_point(sys, n, rng);
        let target = target_window(window.0, window.1, rng);
        let p = place_spectrum(sys, &h, target, rng)?;
        if in_domain(sys, &p, d, 0.0) {
            return Ok(p);
        }
    }
    Err(Error::SamplingFailure { attempts: MAX_ATTEMPTS, reason: format!("no point of `{}` found", d.kind) })
}

/// A Hermitian point whose realization is PSD with unit norm, of random rank.
///
/// Drawn as `G·G*` with `G` of random width, projected onto the realization image and
/// shifted by the identity point if the projection lost positivity.
pub fn random_psd_direction(sys: &OpSysBasis, n: usize, rng: &mut Rng) -> Result<NCPoint> {
    let size = n * sys.k();
    let rank = rng.int_in(1, size);
    let mut g = CMatrix::zeros(size);
    for i in 0..size {
        for j in 0..rank {
            g.set(i, j, rng.complex_normal());
        }
    }
    let w = HMatrix::symmetrize(&(&g * &g.adjoint())).into_cmatrix();
    let h = sys.project(&w, n)?.re_point();
    let spec = spectrum(sys, &h)?;
    let norm = spec.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let shift = (-spec[0]).max(0.0) + DIRECTION_FLOOR * norm;
    let h = h.add(&sys.identity_point(n).scale(C64::new(shift, 0.0)))?;
    Ok(h.scale(C64::new(1.0 / (norm + shift), 0.0)))
}

/// Step override for [`sample_ordered_pair_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PairOptions {
    /// Fixed `t` in `Q = P + t·H`; random when `None`.
    pub step: Option<f64>,
}

/// Hermitian `P ≤ Q`, both in `d`: `Q = P + t·H` with `H` a PSD direction and `t` halved until
/// `Q` stays in the domain.
pub fn sample_ordered_pair(sys: &OpSysBasis, d: &DomainSpec, n: usize, rng: &mut Rng) -> Result<(NCPoint, NCPoint)> {
    sample_ordered_pair_with(sys, d, n, rng, PairOptions::default())
}

pub fn sample_ordered_pair_with(
    sys: &OpSysBasis,
    d: &DomainSpec,
    n: usize,
    rng: &mut Rng,
    opts: PairOptions,
) -> Result<(NCPoint, NCPoint)> {
    let p = sample_in_domain(sys, d, n, rng)?;
    let h = random_psd_direction(sys, n, rng)?;
    let mut t = match opts.step {
        Some(t) => t,
        None => 10f64.powf(rng.uniform_in(-3.0, 0.5)),
    };
    for _ in 0..MAX_HALVINGS {
        let q = p.add(&h.scale(C64::new(t, 0.0)))?;
        if t == 0.0 || in_domain(sys, &q, d, 0.0) {
            return Ok((p, q));
        }
        t *= 0.5;
    }
    Ok((p.clone(), p))
}

/// A point of `Π(R)`: `H + i·K` with `H` Hermitian and `realize(K)` positive definite.
pub fn sample_halfplane(sys: &OpSysBasis, n: usize, rng: &mut Rng) -> Result<NCPoint> {
    let h = random_hermitian_point(sys, n, rng).scale(C64::new(10f64.powf(rng.uniform_in(-0.5, 0.7)), 0.0));
    let k_dir = random_hermitian_point(sys, n, rng);
    let c = 10f64.powf(rng.uniform_in(-1.5, 0.3));
    let target = (c, c + 10f64.powf(rng.uniform_in(-0.5, 0.7)));
    let k = place_spectrum(sys, &k_dir, target, rng)?;
    h.add(&k.scale(I))
}
