use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{run_trials, Agg, CheckConfig, CheckReport, Meta, Tag, Trial};
use crate::error::{Error, Result};
use crate::expr::FreeFunction;
use crate::linalg::{herm_eig, psd_margin, random_matrix, CMatrix, HMatrix, MatrixKind, Rng, C64, I};
use crate::opsys::{in_domain, target_window, DomainKind, DomainSpec, NCPoint, OpSysBasis};

/// Share of paths drawn with a fixed eigenbasis (`K = 0`).
const STILL_FRACTION: f64 = 0.25;

/// A path of commuting Hermitian tuples
/// `γ_i(t) = U·e^{tK}·diag(d0_i + t·Δ_i)·e^{−tK}·U*`
/// with `K` skew-Hermitian. All coordinates share the rotating eigenbasis, so they commute at
/// every `t`. The velocity at zero is `U(Δ_i + [K, D0_i])U*`; `Δ_i` is drawn so that it is
/// positive definite, and `eps` keeps it so along the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutingPath {
    pub system: String,
    pub u: CMatrix,
    pub k: CMatrix,
    pub d0: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    /// Half-width of the admissible `t` range.
    pub eps: f64,
}

fn commutator_with_diag(k: &CMatrix, d: &[f64]) -> CMatrix {
    // [K, D]_{rc} = K_{rc}·(d_c − d_r)
    CMatrix::from_fn(d.len(), |r, c| k.get(r, c) * (d[c] - d[r]))
}

fn random_shape(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| 10f64.powf(rng.uniform_in(-1.0, 1.0))).collect()
}

/// `s·shape` with `s` just past the smallest factor for which `s·shape + C ≻ 0`, where
/// `C = [K, D0]` is Hermitian. Velocities drawn this way can sit close to the boundary of the
/// cone.
fn velocity_diagonal(c: &CMatrix, shape: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    let n = c.n();
    let w = CMatrix::from_fn(n, |r, q| c.get(r, q) / (shape[r] * shape[q]).sqrt());
    let floor = (-psd_margin(&HMatrix::symmetrize(&w))?).max(0.0);
    let s =
        if floor > 0.0 { floor * (1.0 + 10f64.powf(rng.uniform_in(-3.0, -0.5))) } else { rng.uniform_in(0.05, 1.0) };
    Ok(shape.iter().map(|x| s * x).collect())
}

impl CommutingPath {
    /// Draws a path whose coordinate `i` keeps its spectrum inside `windows[i]` for `|t| < eps`.
    pub fn sample(sys: &OpSysBasis, windows: &[(f64, f64)], n: usize, rng: &mut Rng) -> Result<Self> {
        if !sys.is_diagonal() {
            return Err(Error::InvalidSystem(format!(
                "commuting paths need a diagonal system, `{}` is not",
                sys.name()
            )));
        }
        if windows.len() != sys.m() {
            return Err(Error::DimensionMismatch(format!("{} windows for {} coordinates", windows.len(), sys.m())));
        }
        let d0: Vec<Vec<f64>> = windows
            .iter()
            .map(|&(lo, hi)| {
                let (c, d) = target_window(lo, hi, rng);
                (0..n).map(|_| rng.uniform_in(c, d)).collect()
            })
            .collect();
        let spread = d0
            .iter()
            .map(|v| {
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);

        let g = random_matrix(MatrixKind::Ginibre, n, rng);
        let skew = (&g - &g.adjoint()).scale_real(0.5);
        let norm = skew.op_norm();
        let kappa = if rng.uniform() < STILL_FRACTION || norm == 0.0 {
            0.0
        } else {
            10f64.powf(rng.uniform_in(-1.0, 0.5)) / ((1.0 + spread) * norm)
        };
        let k = skew.scale_real(kappa);

        // coordinates usually share a velocity shape; the product of two coordinates
        // fails to be monotone only for such aligned velocities
        let shared = random_shape(n, rng);
        let mut delta = Vec::with_capacity(d0.len());
        for d in &d0 {
            let shape = if rng.uniform() < 0.75 { shared.clone() } else { random_shape(n, rng) };
            delta.push(velocity_diagonal(&commutator_with_diag(&k, d), &shape, rng)?);
        }

        // keep the velocity positive definite
        let mut eps = 1.0f64;
        for (d, dl) in d0.iter().zip(&delta) {
            let vel = &CMatrix::diag_real(dl) + &commutator_with_diag(&k, d);
            let vmin = psd_margin(&HMatrix::symmetrize(&vel))?;
            let drift = commutator_with_diag(&k, dl).op_norm();
            if drift > 0.0 {
                eps = eps.min(0.5 * vmin / drift);
            }
        }
        // and the spectrum inside the window
        for ((d, dl), &(lo, hi)) in d0.iter().zip(&delta).zip(windows) {
            for (&x, &v) in d.iter().zip(dl) {
                eps = eps.min(0.9 * (x - lo) / v).min(0.9 * (hi - x) / v);
            }
        }
        Ok(CommutingPath {
            system: sys.name().to_string(),
            u: random_matrix(MatrixKind::Unitary, n, rng),
            k,
            d0,
            delta,
            eps,
        })
    }

    pub fn level(&self) -> usize {
        self.u.n()
    }

    pub fn rotates(&self) -> bool {
        self.k.max_abs() > 0.0
    }

    /// `U·e^{tK}`
    fn frame(&self, t: f64) -> Result<CMatrix> {
        if !self.rotates() {
            return Ok(self.u.clone());
        }
        // K = i·H with H Hermitian, so e^{tK} = V·diag(e^{itμ})·V*
        let h = HMatrix::symmetrize(&self.k.scale(-I));
        let eig = herm_eig(&h)?;
        let n = self.level();
        let v = &eig.vectors;
        let phases =
            CMatrix::from_fn(n, |r, c| if r == c { (I * t * eig.eigenvalues[r]).exp() } else { C64::new(0.0, 0.0) });
        Ok(&self.u * &(&(v * &phases) * &v.adjoint()))
    }

    pub fn at(&self, t: f64) -> Result<NCPoint> {
        let r = self.frame(t)?;
        let ra = r.adjoint();
        let coeffs = self
            .d0
            .iter()
            .zip(&self.delta)
            .map(|(d, dl)| {
                let diag: Vec<f64> = d.iter().zip(dl).map(|(x, v)| x + t * v).collect();
                HMatrix::symmetrize(&(&(&r * &CMatrix::diag_real(&diag)) * &ra)).into_cmatrix()
            })
            .collect();
        NCPoint::new(self.system.clone(), self.level(), coeffs)
    }

    /// `γ'(0)` coordinatewise.
    pub fn velocity(&self) -> Vec<CMatrix> {
        let ua = self.u.adjoint();
        self.d0
            .iter()
            .zip(&self.delta)
            .map(|(d, dl)| {
                let v = &CMatrix::diag_real(dl) + &commutator_with_diag(&self.k, d);
                &(&self.u * &v) * &ua
            })
            .collect()
    }
}

/// Central difference `(f(γ(h)) − f(γ(−h)))/2h` on output realizations.
pub fn path_derivative(f: &FreeFunction, path: &CommutingPath, h: f64) -> Result<CMatrix> {
    let plus = f.eval_realized(&path.at(h)?)?;
    let minus = f.eval_realized(&path.at(-h)?)?;
    Ok((&plus - &minus).scale_real(0.5 / h))
}

/// Smallest eigenvalue of the path derivative divided by `1 + ‖derivative‖`.
pub fn local_margin(f: &FreeFunction, path: &CommutingPath, h: f64) -> Result<f64> {
    let d = path_derivative(f, path, h)?;
    Ok(psd_margin(&HMatrix::symmetrize(&d))? / (1.0 + d.op_norm()))
}

/// Largest step not exceeding `h` that keeps `γ(±h)` on the path's admissible range.
pub fn effective_step(path: &CommutingPath, h: f64) -> f64 {
    h.min(0.5 * path.eps)
}

/// Derivatives of `f` along commuting paths with positive definite velocity must be PSD.
pub fn check_local_monotone(f: &FreeFunction, domain: DomainKind, cfg: &CheckConfig) -> CheckReport {
    let meta = Meta {
        check: "local",
        function: f.name(),
        systems: vec![f.input().name().to_string(), f.output().name().to_string()],
        tag: Tag::Local,
    };
    let d = DomainSpec::new(domain, f.input());
    let Some(window) = domain.spectral_window() else {
        return run_trials(meta, cfg, |_, _| Trial::skipped(0));
    };
    let windows = vec![window; f.input().m()];
    run_trials(meta, cfg, |n, rng| {
        let path = match CommutingPath::sample(f.input(), &windows, n, rng) {
            Ok(p) => p,
            Err(e) => return Trial::from_error(&e, 0),
        };
        let h = effective_step(&path, cfg.step);
        let inside = [h, -h].iter().all(|&t| path.at(t).is_ok_and(|p| in_domain(f.input(), &p, &d, 0.0)));
        if !inside {
            return Trial::skipped(1);
        }
        match local_margin(f, &path, h) {
            Ok(m) => Trial::measured(m)
                .metric("min_margin", m, Agg::Min)
                .with_witness(cfg.tol, || json!({ "path": path, "step": h, "margin": m })),
            Err(e) if e.is_out_of_domain() => Trial::skipped(1),
            Err(e) => Trial::from_error(&e, 0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::catalog;

    #[test]
    fn paths_commute_and_stay_inside() {
        let sys = OpSysBasis::diagonal(2).unwrap();
        let mut rng = Rng::new(61, 0);
        for _ in 0..50 {
            let path = CommutingPath::sample(&sys, &[(0.0, 10.0), (0.0, 10.0)], 3, &mut rng).unwrap();
            for t in [-0.9 * path.eps, 0.0, 0.5 * path.eps] {
                let p = path.at(t).unwrap();
                let (a, b) = (&p.coeffs()[0], &p.coeffs()[1]);
                assert!((a * b).max_abs_diff(&(b * a)) < 1e-10);
                assert!(in_domain(&sys, &p, &DomainSpec::new(DomainKind::Interval { lo: 0.0, hi: 10.0 }, &sys), 0.0));
            }
            for v in path.velocity() {
                assert!(psd_margin(&HMatrix::symmetrize(&v)).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn velocity_matches_finite_difference() {
        let sys = OpSysBasis::scalar();
        let mut rng = Rng::new(62, 0);
        let path = loop {
            let p = CommutingPath::sample(&sys, &[(0.0, f64::INFINITY)], 3, &mut rng).unwrap();
            if p.rotates() {
                break p;
            }
        };
        let id = catalog("identity").unwrap();
        let fd = path_derivative(&id, &path, 1e-5).unwrap();
        assert!(fd.max_abs_diff(&path.velocity()[0]) < 1e-7);
    }

    #[test]
    fn catalog_verdicts() {
        let cfg = CheckConfig::new(1..=3, 100, 63, 1e-8);
        for name in ["identity", "msqrt", "neg_inverse", "geometric_mean"] {
            let r = check_local_monotone(&catalog(name).unwrap(), DomainKind::PdCone, &cfg);
            assert!(r.passed(), "{name}: {r:?}");
        }
        let cfg = CheckConfig::new([2], 100, 63, 1e-8);
        for name in ["square", "inverse"] {
            let r = check_local_monotone(&catalog(name).unwrap(), DomainKind::PdCone, &cfg);
            assert!(r.failures > 0, "{name}");
        }
    }

    #[test]
    fn rejects_non_diagonal_systems() {
        let r = CommutingPath::sample(&OpSysBasis::block2(), &[(0.0, 1.0); 4], 2, &mut Rng::new(0, 0));
        assert!(matches!(r, Err(Error::InvalidSystem(_))));
    }
}
