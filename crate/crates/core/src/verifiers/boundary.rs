use serde_json::json;

use super::report::{run_trials, Agg, CheckConfig, CheckReport, Meta, Tag, Trial};
use crate::error::Result;
use crate::expr::FreeFunction;
use crate::opsys::{sample_in_domain, DomainKind, DomainSpec, NCPoint};

/// Vertical offsets `ε = 1e-1, 1e-2, …, 1e-6`.
pub const EPSILONS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Allowed excess of `r(ε)` over the linear prediction `ε·C`.
pub const DECAY_FACTOR: f64 = 10.0;

/// `r(ε) = ‖f(A + iε·1) − f(A)‖ / (1 + ‖f(A)‖)` for each `ε` in [`EPSILONS`].
pub fn boundary_ratios(f: &FreeFunction, a: &NCPoint) -> Result<Vec<f64>> {
    let fa = f.eval_realized(a)?;
    let scale = 1.0 + fa.op_norm();
    let id = f.input().identity_point(a.level());
    EPSILONS
        .iter()
        .map(|&eps| {
            let p = a.add(&id.scale(crate::linalg::C64::new(0.0, eps)))?;
            Ok((&f.eval_realized(&p)? - &fa).op_norm() / scale)
        })
        .collect()
}

/// `min_ε (1 − r(ε) / (10·ε·C))` with `C = r(1e-1)/1e-1`; negative when some `r(ε)` decays
/// slower than linearly by more than the allowed factor.
pub fn decay_margin(ratios: &[f64]) -> f64 {
    let c = ratios[0] / EPSILONS[0];
    EPSILONS
        .iter()
        .zip(ratios)
        .map(|(&eps, &r)| {
            let bound = DECAY_FACTOR * eps * c;
            if bound > 0.0 {
                1.0 - r / bound
            } else if r == 0.0 {
                1.0
            } else {
                f64::NEG_INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Continuity of `f` as the argument approaches a Hermitian domain point vertically from the
/// half-plane. Evaluations outside the domain count as failures.
pub fn check_boundary_continuity(f: &FreeFunction, domain: DomainKind, cfg: &CheckConfig) -> CheckReport {
    let d = DomainSpec::new(domain, f.input());
    let meta = Meta {
        check: "boundary",
        function: f.name(),
        systems: vec![f.input().name().to_string(), f.output().name().to_string()],
        tag: Tag::Boundary,
    };
    run_trials(meta, cfg, |n, rng| {
        let a = match sample_in_domain(f.input(), &d, n, rng) {
            Ok(a) => a,
            Err(e) => return Trial::from_error(&e, 0),
        };
        match boundary_ratios(f, &a) {
            Ok(ratios) => {
                let m = decay_margin(&ratios);
                Trial::measured(m)
                    .metric("min_margin", m, Agg::Min)
                    .with_witness(cfg.tol, || json!({ "point": a, "ratios": ratios, "margin": m }))
            }
            Err(e) if e.is_out_of_domain() => Trial { out_of_domain: 1, ..Trial::measured(f64::NEG_INFINITY) }
                .with_witness(cfg.tol, || json!({ "point": a, "error": e.to_string() })),
            Err(e) => Trial::from_error(&e, 0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::catalog;
    use crate::opsys::OpSysBasis;

    #[test]
    fn identity_decays_exactly_linearly() {
        let f = catalog("identity").unwrap();
        let s = OpSysBasis::scalar();
        let a = s.identity_point(2).scale(crate::linalg::C64::new(3.0, 0.0));
        let r = boundary_ratios(&f, &a).unwrap();
        for (eps, ri) in EPSILONS.iter().zip(&r) {
            assert!((ri - eps / 4.0).abs() <= 1e-15, "{ri}");
        }
        assert!((decay_margin(&r) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn decay_margin_flags_slow_decay() {
        // r(ε) = √ε decays far slower than linearly
        let r: Vec<f64> = EPSILONS.iter().map(|e| e.sqrt()).collect();
        assert!(decay_margin(&r) < 0.0);
    }

    #[test]
    fn catalog_functions_are_continuous() {
        let cfg = CheckConfig::new(1..=3, 50, 71, 1e-8);
        for name in ["schur_complement", "msqrt", "geometric_mean"] {
            let r = check_boundary_continuity(&catalog(name).unwrap(), DomainKind::PdCone, &cfg);
            assert!(r.passed(), "{name}: {r:?}");
        }
    }
}
