//! Complex Schur form and the principal matrix square root.
//!
//! The square root follows the Björck–Hammarling scheme: reduce `A = Q·T·Q*` with `T` upper
//! triangular, take principal scalar roots on the diagonal of `T`, then fill the strict upper
//! triangle column by column with
//!
//! ```text
//! R[i,j] = (T[i,j] − Σ_{i<k<j} R[i,k]·R[k,j]) / (R[i,i] + R[j,j])
//! ```
//!
//! Every diagonal root has positive real part, so the denominators never vanish and the branch
//! is fixed by construction.

use nalgebra::DMatrix;

use super::matrix::{CMatrix, C64, TOL_RECON};
use crate::error::{Error, Result};

/// Distance (relative to `1+‖A‖`) at which an eigenvalue counts as touching `(-inf, 0]`.
pub const TOL_BRANCH: f64 = 1e-10;

const ITERATIONS_PER_EIGENVALUE: usize = 60;

/// `A = Q·T·Q*` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.n()).map(|i| self.t.get(i, i)).collect()
    }
}

#[inline]
fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Rows `k, k+1` ← `G·rows` with `G = [[c, s], [−s̄, c]]`, columns `from..`.
fn rotate_rows(h: &mut DMatrix<C64>, k: usize, c: f64, s: C64, from: usize) {
    for j in from..h.ncols() {
        let (x, y) = (h[(k, j)], h[(k + 1, j)]);
        h[(k, j)] = x * c + s * y;
        h[(k + 1, j)] = -s.conj() * x + y * c;
    }
}

/// Columns `k, k+1` ← `cols·G*`, rows `..to`.
fn rotate_cols(h: &mut DMatrix<C64>, k: usize, c: f64, s: C64, to: usize) {
    for i in 0..to {
        let (x, y) = (h[(i, k)], h[(i, k + 1)]);
        h[(i, k)] = x * c + y * s.conj();
        h[(i, k + 1)] = -x * s + y * c;
    }
}

fn hessenberg(h: &mut DMatrix<C64>, q: &mut DMatrix<C64>) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let mut v = x;
        v[0] += phase * norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv*)·H
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(r, vi)| vi.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= *vi * dot * 2.0;
            }
        }
        // H ← H·(I − 2vv*), Q ← Q·(I − 2vv*)
        for m in [&mut *h, &mut *q] {
            for i in 0..n {
                let dot: C64 = v.iter().enumerate().map(|(r, vi)| m[(i, k + 1 + r)] * vi).sum();
                for (r, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= dot * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Complex Schur decomposition by Hessenberg reduction and Wilkinson-shifted QR sweeps.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    let n = a.n();
    let mut h = a.as_dmatrix().clone();
    let mut q = DMatrix::<C64>::identity(n, n);
    hessenberg(&mut h, &mut q);

    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let budget = ITERATIONS_PER_EIGENVALUE * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n.saturating_sub(1);

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= f64::EPSILON * diag {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > budget {
            return Err(Error::NoConvergence { iterations: total });
        }

        let (a11, a12, a21, a22) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        let mu = if since_deflation % 11 == 10 {
            a22 + C64::new(0.75, 0.5) * a21.norm()
        } else {
            let half = (a11 - a22) * 0.5;
            let disc = (half * half + a12 * a21).sqrt();
            let m1 = (a11 + a22) * 0.5 + disc;
            let m2 = (a11 + a22) * 0.5 - disc;
            if (m1 - a22).norm() <= (m2 - a22).norm() {
                m1
            } else {
                m2
            }
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotate_rows(&mut h, k, c, s, k);
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            rotate_cols(&mut h, k, c, s, (k + 2).min(hi + 1));
            rotate_cols(&mut q, k, c, s, n);
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let t = CMatrix::from_dmatrix(h);
    if !t.is_finite() {
        return Err(Error::NoConvergence { iterations: total });
    }
    Ok(Schur { q: CMatrix::from_dmatrix(q), t })
}

/// Distance from `z` to the closed ray `(-inf, 0]`.
fn distance_to_cut(z: C64) -> f64 {
    if z.re <= 0.0 {
        z.im.abs()
    } else {
        z.norm()
    }
}

/// Upper-triangular principal square root of an upper-triangular `T`.
fn triangular_sqrt(t: &CMatrix) -> CMatrix {
    let n = t.n();
    let mut r = CMatrix::zeros(n);
    for i in 0..n {
        r.set(i, i, t.get(i, i).sqrt());
    }
    for j in 1..n {
        for i in (0..j).rev() {
            let mut acc = t.get(i, j);
            for k in i + 1..j {
                acc -= r.get(i, k) * r.get(k, j);
            }
            r.set(i, j, acc / (r.get(i, i) + r.get(j, j)));
        }
    }
    r
}

/// Principal square root: the unique `S` with `S² = A` and every eigenvalue of `S` in the open
/// right half-plane. Fails with [`Error::BranchCut`] when `A` has an eigenvalue within
/// `TOL_BRANCH·(1+‖A‖)` of `(-inf, 0]`.
pub fn principal_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let norm = a.op_norm();
    let tol = TOL_BRANCH * (1.0 + norm);
    let Schur { q, t } = schur(a)?;
    for i in 0..t.n() {
        let lam = t.get(i, i);
        if distance_to_cut(lam) <= tol {
            return Err(Error::BranchCut { re: lam.re, im: lam.im, tol });
        }
    }
    let r = triangular_sqrt(&t);
    let s = &(&q * &r) * &q.adjoint();
    if !s.is_finite() {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    Ok(s)
}

/// `‖S·S − A‖ / (1+‖A‖)`; used by tests and diagnostics.
pub fn sqrt_residual(s: &CMatrix, a: &CMatrix) -> f64 {
    (&(s * s) - a).op_norm() / (1.0 + a.op_norm())
}

/// Default tolerance for [`sqrt_residual`].
pub const SQRT_TOL: f64 = TOL_RECON;
