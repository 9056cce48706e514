//! Both sides of the monotonicity theorem as independent sampled checks.

mod axioms;
mod boundary;
mod halfplane;
mod local;
mod monotone;
mod report;
mod schur_identity;

pub use axioms::{
    check_free_axioms, direct_sum_residual, shuffle_residual, similarity_residual, similarity_residual_checked,
    AXIOM_TOL,
};
pub use boundary::{boundary_ratios, check_boundary_continuity, decay_margin, DECAY_FACTOR, EPSILONS};
pub use halfplane::{check_halfplane, halfplane_margin, PointWitness};
pub use local::{check_local_monotone, effective_step, local_margin, path_derivative, CommutingPath};
pub use monotone::{check_monotone, find_counterexample, monotone_margin, verify_pair_witness, PairWitness};
pub use report::{CheckConfig, CheckReport, Verdict, DEFAULT_STEP};
pub use schur_identity::{
    adjoint_schur_column, check_schur_im_identity, identity_residual, imaginary_identity_point, schur_column,
    IDENTITY_TOL,
};

pub(crate) use report::{run_trials, Agg, Meta, Tag, Trial};

use serde::Serialize;

use crate::error::Result;
use crate::expr::FreeFunction;
use crate::linalg::Rng;
use crate::opsys::{sample_halfplane, sample_in_domain, DomainKind, DomainSpec, NCPoint, OpSysBasis};

/// A point of the domain; the half-plane has its own sampler.
pub fn sample_point(sys: &OpSysBasis, domain: DomainKind, n: usize, rng: &mut Rng) -> Result<NCPoint> {
    match domain {
        DomainKind::HalfPlane => sample_halfplane(sys, n, rng),
        kind => sample_in_domain(sys, &DomainSpec::new(kind, sys), n, rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Consistency {
    Consistent,
    Inconsistent,
}

/// Agreement of the order side and the half-plane side for one function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equivalence {
    pub function: String,
    /// Names of the checks compared, in report order.
    pub checks: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub verdict: Consistency,
}

impl Equivalence {
    pub fn from_reports(function: &str, reports: &[CheckReport]) -> Self {
        let verdicts: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
        let agree = verdicts.windows(2).all(|w| w[0] == w[1]);
        Equivalence {
            function: function.to_string(),
            checks: reports.iter().map(|r| r.check.clone()).collect(),
            verdicts,
            verdict: if agree { Consistency::Consistent } else { Consistency::Inconsistent },
        }
    }
}

/// Runs the global order check, the local path check when the input system is diagonal, and
/// the half-plane check.
pub fn equivalence_report(f: &FreeFunction, domain: DomainKind, cfg: &CheckConfig) -> (Vec<CheckReport>, Equivalence) {
    let mut reports = vec![check_monotone(f, domain, cfg)];
    if f.input().is_diagonal() {
        reports.push(check_local_monotone(f, domain, cfg));
    }
    reports.push(check_halfplane(f, cfg));
    let eq = Equivalence::from_reports(f.name(), &reports);
    (reports, eq)
}
