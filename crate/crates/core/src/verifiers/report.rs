use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::Error;
use crate::linalg::Rng;

/// Settings shared by every check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckConfig {
    pub levels: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Finite-difference step for the local checks.
    pub step: f64,
}

impl CheckConfig {
    pub fn new(levels: impl IntoIterator<Item = usize>, trials: usize, seed: u64, tol: f64) -> Self {
        CheckConfig { levels: levels.into_iter().collect(), trials, seed, tol, step: DEFAULT_STEP }
    }
}

pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Outcome of one check over all levels and trials.
///
/// Margins are scaled and signed so that negative means violation; a trial fails when its margin
/// is below `-tol`. A failure with no finite margin (an evaluation outside the domain where the
/// check requires one) is recorded as `f64::MIN`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub function: String,
    pub systems: Vec<String>,
    pub levels: Vec<usize>,
    pub trials: usize,
    pub failures: usize,
    #[serde(serialize_with = "finite_margin")]
    pub worst_margin: f64,
    pub witness: Option<Value>,
    pub seed: u64,
    pub stream: u64,
    pub tol: f64,
    pub verdict: Verdict,
    /// Evaluations outside the domain that were re-sampled.
    pub out_of_domain: usize,
    /// Trials that produced no measurement.
    pub skipped: usize,
    /// Eigensolver non-convergence or exhausted sampling budgets.
    pub numerical_failures: usize,
    pub incomplete: bool,
    pub metrics: BTreeMap<String, f64>,
}

fn finite_margin<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(clamp_margin(*x))
}

fn clamp_margin(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        f64::MIN
    } else {
        x.min(f64::MAX)
    }
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// How a per-trial metric is combined across trials.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Agg {
    Max,
    Min,
}

/// Result of one trial, produced by a check's trial body.
#[derive(Debug, Default)]
pub(crate) struct Trial {
    pub margin: Option<f64>,
    pub witness: Option<Value>,
    pub out_of_domain: usize,
    pub numerical: bool,
    pub metrics: Vec<(&'static str, f64, Agg)>,
}

impl Trial {
    pub fn measured(margin: f64) -> Self {
        Trial { margin: Some(margin), ..Default::default() }
    }

    pub fn skipped(out_of_domain: usize) -> Self {
        Trial { out_of_domain, ..Default::default() }
    }

    /// Classifies an error that ended a trial early.
    pub fn from_error(e: &Error, out_of_domain: usize) -> Self {
        Trial { numerical: e.is_numerical_failure(), out_of_domain, ..Default::default() }
    }

    pub fn with_witness(mut self, tol: f64, make: impl FnOnce() -> Value) -> Self {
        if self.margin.is_some_and(|m| !(m >= -tol)) {
            self.witness = Some(make());
        }
        self
    }

    pub fn metric(mut self, name: &'static str, value: f64, agg: Agg) -> Self {
        self.metrics.push((name, value, agg));
        self
    }
}

/// Identifies the trial streams of each check so that no two checks share random draws.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Tag {
    Axioms = 1,
    Monotone = 2,
    HalfPlane = 3,
    Local = 4,
    Boundary = 5,
    SchurIdentity = 6,
    Loewner1d = 7,
    LoewnerMatrix = 8,
    Pick = 9,
    AmyLocal = 10,
}

impl Tag {
    pub fn base_stream(self) -> u64 {
        (self as u64) << 48
    }

    pub fn stream(self, level: usize, trial: usize) -> u64 {
        self.base_stream() | ((level as u64) << 32) | trial as u64
    }
}

pub(crate) struct Meta<'a> {
    pub check: &'a str,
    pub function: &'a str,
    pub systems: Vec<String>,
    pub tag: Tag,
}

/// Runs `body(level, rng)` for every (level, trial) with a private generator per trial, in
/// parallel, and folds the results in trial order.
pub(crate) fn run_trials<F>(meta: Meta<'_>, cfg: &CheckConfig, body: F) -> CheckReport
where
    F: Fn(usize, &mut Rng) -> Trial + Sync,
{
    let jobs: Vec<(usize, usize)> = cfg.levels.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let results: Vec<Trial> = jobs
        .par_iter()
        .map(|&(n, t)| {
            let mut rng = Rng::new(cfg.seed, meta.tag.stream(n, t));
            body(n, &mut rng)
        })
        .collect();
    fold(meta, cfg, results)
}

pub(crate) fn fold(meta: Meta<'_>, cfg: &CheckConfig, results: Vec<Trial>) -> CheckReport {
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    let mut witness: Option<(f64, Value)> = None;
    let mut out_of_domain = 0;
    let mut skipped = 0;
    let mut numerical = 0;
    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();
    for r in results {
        out_of_domain += r.out_of_domain;
        if r.numerical {
            numerical += 1;
        }
        for (name, v, agg) in r.metrics {
            let slot = metrics.entry(name.to_string()).or_insert(v);
            *slot = match agg {
                Agg::Max => slot.max(v),
                Agg::Min => slot.min(v),
            };
        }
        let Some(m) = r.margin else {
            skipped += 1;
            continue;
        };
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        if m < worst {
            worst = m;
        }
        if m < -cfg.tol {
            failures += 1;
            let better = witness.as_ref().is_none_or(|(wm, _)| m < *wm);
            if better {
                if let Some(w) = r.witness {
                    witness = Some((m, w));
                }
            }
        }
    }
    if worst == f64::INFINITY {
        worst = 0.0;
    }
    CheckReport {
        check: meta.check.to_string(),
        function: meta.function.to_string(),
        systems: meta.systems,
        levels: cfg.levels.clone(),
        trials: cfg.trials,
        failures,
        worst_margin: worst,
        witness: witness.map(|(_, w)| w),
        seed: cfg.seed,
        stream: meta.tag.base_stream(),
        tol: cfg.tol,
        verdict: if failures == 0 { Verdict::Pass } else { Verdict::Fail },
        out_of_domain,
        skipped,
        numerical_failures: numerical,
        incomplete: numerical > 0 || skipped > 0,
        metrics,
    }
}
