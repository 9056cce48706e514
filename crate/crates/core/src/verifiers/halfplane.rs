use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{run_trials, Agg, CheckConfig, CheckReport, Meta, Tag, Trial};
use crate::error::Result;
use crate::expr::FreeFunction;
use crate::linalg::{imag_part, psd_margin};
use crate::opsys::{sample_halfplane, NCPoint};

/// A point of `Π` whose image leaves the closed half-plane, or where `f` is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointWitness {
    pub point: NCPoint,
    /// Scaled `Im` margin of `f(point)`; absent when evaluation failed.
    pub margin: Option<f64>,
    pub error: Option<String>,
}

/// Smallest eigenvalue of `Im realize(f(P))` divided by `1 + ‖realize(f(P))‖`.
pub fn halfplane_margin(f: &FreeFunction, p: &NCPoint) -> Result<f64> {
    let fp = f.eval_realized(p)?;
    Ok(psd_margin(&imag_part(&fp))? / (1.0 + fp.op_norm()))
}

/// `f(Π(R₁)) ⊆ closure of Π(R₂)` on sampled half-plane points. An evaluation outside the domain
/// counts as a failure: the continuation has to be defined on all of `Π(R₁)`.
pub fn check_halfplane(f: &FreeFunction, cfg: &CheckConfig) -> CheckReport {
    let meta = Meta {
        check: "halfplane",
        function: f.name(),
        systems: vec![f.input().name().to_string(), f.output().name().to_string()],
        tag: Tag::HalfPlane,
    };
    run_trials(meta, cfg, |n, rng| {
        let p = match sample_halfplane(f.input(), n, rng) {
            Ok(p) => p,
            Err(e) => return Trial::from_error(&e, 0),
        };
        match halfplane_margin(f, &p) {
            Ok(m) => Trial::measured(m)
                .metric("min_margin", m, Agg::Min)
                .with_witness(cfg.tol, || json!(PointWitness { point: p, margin: Some(m), error: None })),
            Err(e) if e.is_out_of_domain() => Trial { out_of_domain: 1, ..Trial::measured(f64::NEG_INFINITY) }
                .with_witness(cfg.tol, || json!(PointWitness { point: p, margin: None, error: Some(e.to_string()) })),
            Err(e) => Trial::from_error(&e, 0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::catalog;
    use crate::linalg::{CMatrix, C64};
    use crate::opsys::OpSysBasis;

    #[test]
    fn identity_margins_are_positive() {
        let r = check_halfplane(&catalog("identity").unwrap(), &CheckConfig::new(1..=3, 100, 5, 1e-8));
        assert!(r.passed());
        assert!(r.metrics["min_margin"] > 0.0);
    }

    #[test]
    fn schur_complement_preserves_half_plane() {
        let r = check_halfplane(&catalog("schur_complement").unwrap(), &CheckConfig::new(1..=3, 300, 6, 1e-8));
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn square_leaves_half_plane() {
        let f = catalog("square").unwrap();
        let s = OpSysBasis::scalar();
        // (−1+i)² = −2i
        let z = s.point(vec![CMatrix::scalar(C64::new(-1.0, 1.0))]).unwrap();
        assert_eq!(f.eval(&z).unwrap().coeffs()[0].get(0, 0), C64::new(0.0, -2.0));
        assert!(halfplane_margin(&f, &z).unwrap() < 0.0);

        let r = check_halfplane(&f, &CheckConfig::new(1..=2, 100, 7, 1e-8));
        assert!(r.failures > 0);
        let w: PointWitness = serde_json::from_value(r.witness.unwrap()).unwrap();
        assert!((halfplane_margin(&f, &w.point).unwrap() - w.margin.unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn inverse_maps_to_lower_half_plane() {
        let r = check_halfplane(&catalog("inverse").unwrap(), &CheckConfig::new([1, 2], 50, 8, 1e-8));
        assert_eq!(r.failures, 100);
        let r = check_halfplane(&catalog("neg_inverse").unwrap(), &CheckConfig::new([1, 2], 50, 8, 1e-8));
        assert!(r.passed());
    }
}
