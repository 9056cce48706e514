use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{run_trials, Agg, CheckConfig, CheckReport, Meta, Tag, Trial};
use crate::error::{Error, Result};
use crate::expr::FreeFunction;
use crate::linalg::{psd_margin, HMatrix, Rng, C64};
use crate::opsys::{sample_ordered_pair, DomainKind, DomainSpec, NCPoint};

const RESAMPLES: usize = 20;

/// An ordered pair `A ≤ B` with `f(A) ≰ f(B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub a: NCPoint,
    pub b: NCPoint,
    /// Scaled margin of `f(B) − f(A)`.
    pub margin: f64,
}

/// Smallest eigenvalue of `realize(f(B)) − realize(f(A))` divided by `1 + max(‖f(A)‖, ‖f(B)‖)`.
pub fn monotone_margin(f: &FreeFunction, a: &NCPoint, b: &NCPoint) -> Result<f64> {
    let fa = f.eval_realized(a)?;
    let fb = f.eval_realized(b)?;
    let scale = 1.0 + fa.op_norm().max(fb.op_norm());
    Ok(psd_margin(&HMatrix::symmetrize(&(&fb - &fa)))? / scale)
}

/// Worst margin over the sub-pairs of `A ≤ (A+B)/2 ≤ B`, and the sub-pair attaining it.
fn segment_margin(f: &FreeFunction, a: &NCPoint, b: &NCPoint) -> Result<(f64, NCPoint, NCPoint)> {
    let mid = a.add(b)?.scale(C64::new(0.5, 0.0));
    let mut worst = (monotone_margin(f, a, b)?, a.clone(), b.clone());
    for (lo, hi) in [(a, &mid), (&mid, b)] {
        let m = monotone_margin(f, lo, hi)?;
        if m < worst.0 {
            worst = (m, lo.clone(), hi.clone());
        }
    }
    Ok(worst)
}

fn trial(f: &FreeFunction, d: &DomainSpec, n: usize, tol: f64, rng: &mut Rng) -> Trial {
    let mut ood = 0;
    for _ in 0..RESAMPLES {
        let attempt = sample_ordered_pair(f.input(), d, n, rng).and_then(|(a, b)| segment_margin(f, &a, &b));
        match attempt {
            Ok((m, a, b)) => {
                let t = Trial { out_of_domain: ood, ..Trial::measured(m) };
                return t
                    .metric("min_margin", m, Agg::Min)
                    .with_witness(tol, || json!(PairWitness { a, b, margin: m }));
            }
            Err(e) if e.is_out_of_domain() => ood += 1,
            Err(e) => return Trial::from_error(&e, ood),
        }
    }
    Trial::skipped(ood)
}

/// `A ≤ B ⇒ f(A) ≤ f(B)` on sampled ordered pairs of the domain, including the segment
/// midpoint.
pub fn check_monotone(f: &FreeFunction, domain: DomainKind, cfg: &CheckConfig) -> CheckReport {
    let d = DomainSpec::new(domain, f.input());
    let meta = Meta {
        check: "monotone",
        function: f.name(),
        systems: vec![f.input().name().to_string(), f.output().name().to_string()],
        tag: Tag::Monotone,
    };
    run_trials(meta, cfg, |n, rng| trial(f, &d, n, cfg.tol, rng))
}

/// The first sampled ordered pair at `level` whose image is out of order by more than `tol`.
pub fn find_counterexample(
    f: &FreeFunction,
    domain: DomainKind,
    level: usize,
    budget: usize,
    tol: f64,
    rng: &mut Rng,
) -> Option<PairWitness> {
    let d = DomainSpec::new(domain, f.input());
    for _ in 0..budget {
        let Ok((a, b)) = sample_ordered_pair(f.input(), &d, level, rng) else { continue };
        match monotone_margin(f, &a, &b) {
            Ok(margin) if margin < -tol => return Some(PairWitness { a, b, margin }),
            _ => {}
        }
    }
    None
}

/// Re-evaluates a witness and confirms both the order of the inputs and the reported margin.
pub fn verify_pair_witness(f: &FreeFunction, w: &PairWitness, tol: f64) -> Result<f64> {
    let order = crate::opsys::order_margin(f.input(), &w.a, &w.b)?;
    if order < -tol {
        return Err(Error::Invalid(format!("witness inputs are not ordered (margin {order:e})")));
    }
    monotone_margin(f, &w.a, &w.b)
}
