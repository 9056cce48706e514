//! Named batteries of checks and the report document they produce.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{catalog, catalog_names, FreeFunction};
use crate::loewner1d::{cross_check, scalar_catalog, scalar_function, CrossCheckConfig, ScalarFunction};
use crate::verifiers::{
    check_boundary_continuity, check_free_axioms, check_halfplane, check_local_monotone, check_monotone,
    check_schur_im_identity, equivalence_report, CheckConfig, CheckReport, Consistency, Equivalence, IDENTITY_TOL,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-8;

pub const MAX_LEVEL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Equivalence,
    Axioms,
    Monotone,
    Halfplane,
    Local,
    Boundary,
    SchurIdentity,
    Loewner1d,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 9] =
        ["equivalence", "axioms", "monotone", "halfplane", "local", "boundary", "schur_identity", "loewner1d", "all"];

    /// Whether the suite acts on a single free function given by the user.
    pub fn needs_function(self) -> bool {
        !matches!(self, Suite::SchurIdentity | Suite::Loewner1d | Suite::All)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "equivalence" => Suite::Equivalence,
            "axioms" => Suite::Axioms,
            "monotone" => Suite::Monotone,
            "halfplane" => Suite::Halfplane,
            "local" => Suite::Local,
            "boundary" => Suite::Boundary,
            "schur_identity" => Suite::SchurIdentity,
            "loewner1d" => Suite::Loewner1d,
            "all" => Suite::All,
            _ => return Err(Error::Unknown { kind: "suite", name: s.to_string() }),
        })
    }
}

/// Everything that determines a report. Thread count and output path are deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub suite: Suite,
    pub function: Option<String>,
    pub expr: Option<String>,
    pub system: Option<String>,
    pub levels: [usize; 2],
    pub trials: usize,
    pub seed: u64,
    /// `None` lets each check use its own default.
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.levels;
        if lo < 1 || hi > MAX_LEVEL || lo > hi {
            return Err(Error::Invalid(format!("levels must satisfy 1 <= A <= B <= {MAX_LEVEL}, got {lo}..{hi}")));
        }
        if self.trials < 1 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Invalid(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.function.is_some() && self.expr.is_some() {
            return Err(Error::Invalid("give either a function name or an expression, not both".into()));
        }
        if self.expr.is_some() && self.system.is_none() {
            return Err(Error::Invalid("an expression needs --system".into()));
        }
        if self.suite.needs_function() && self.function.is_none() && self.expr.is_none() {
            return Err(Error::Invalid(format!("suite `{}` needs --function or --expr", self.suite_name())));
        }
        Ok(())
    }

    pub fn suite_name(&self) -> &'static str {
        Suite::NAMES[self.suite as usize]
    }

    fn check_config(&self, default_tol: f64) -> CheckConfig {
        CheckConfig::new(self.levels[0]..=self.levels[1], self.trials, self.seed, self.tol.unwrap_or(default_tol))
    }

    /// The free function named by `function` or given by `expr` over `system`.
    pub fn resolve_function(&self) -> Result<FreeFunction> {
        match (&self.function, &self.expr) {
            (Some(name), _) => catalog(name),
            (None, Some(text)) => {
                let sys = crate::opsys::OpSysBasis::builtin(self.system.as_deref().unwrap_or("scalar"))?;
                FreeFunction::from_text("expr", text, sys, crate::opsys::OpSysBasis::scalar())
            }
            (None, None) => Err(Error::Invalid("no function given".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub reports: Vec<CheckReport>,
    pub equivalences: Vec<Equivalence>,
    pub numerical_failures: usize,
    pub verdict: Overall,
}

impl ReportDocument {
    fn new(config: RunConfig, reports: Vec<CheckReport>, equivalences: Vec<Equivalence>) -> Self {
        let numerical_failures = reports.iter().map(|r| r.numerical_failures).sum();
        let ok =
            reports.iter().all(|r| r.passed()) && equivalences.iter().all(|e| e.verdict == Consistency::Consistent);
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            config,
            reports,
            equivalences,
            numerical_failures,
            verdict: if ok { Overall::Pass } else { Overall::Fail },
        }
    }

    /// 0 when everything passed, 3 on any numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.numerical_failures > 0 {
            3
        } else if self.verdict == Overall::Fail {
            1
        } else {
            0
        }
    }
}

/// A scalar catalog entry, also accepting the free catalog names of the same functions.
pub fn resolve_scalar(name: &str) -> Result<ScalarFunction> {
    let alias = match name {
        "identity" => "x",
        "msqrt" => "sqrt",
        "neg_inverse" => "neg_inv",
        other => other,
    };
    scalar_function(alias)
}

fn loewner_reports(
    functions: &[ScalarFunction],
    cfg: &CheckConfig,
    out: &mut Vec<CheckReport>,
    eqs: &mut Vec<Equivalence>,
) {
    let cc = CrossCheckConfig { matrix: cfg.clone(), configurations: cfg.trials };
    for f in functions {
        let (reports, eq) = cross_check(f, &cc);
        out.extend(reports);
        eqs.push(eq);
    }
}

fn battery(f: &FreeFunction, cfg: &CheckConfig, out: &mut Vec<CheckReport>, eqs: &mut Vec<Equivalence>) {
    out.push(check_free_axioms(f, f.domain(), cfg));
    let (reports, eq) = equivalence_report(f, f.domain(), cfg);
    out.extend(reports);
    eqs.push(eq);
    out.push(check_boundary_continuity(f, f.domain(), cfg));
}

/// Runs the configured suite. Trials run on the current rayon pool.
pub fn run_suite(config: &RunConfig) -> Result<ReportDocument> {
    config.validate()?;
    let cfg = config.check_config(DEFAULT_TOL);
    let mut reports = Vec::new();
    let mut eqs = Vec::new();
    match config.suite {
        Suite::Equivalence => {
            let f = config.resolve_function()?;
            let (r, eq) = equivalence_report(&f, f.domain(), &cfg);
            reports.extend(r);
            eqs.push(eq);
        }
        Suite::Axioms => {
            let f = config.resolve_function()?;
            reports.push(check_free_axioms(&f, f.domain(), &cfg));
        }
        Suite::Monotone => {
            let f = config.resolve_function()?;
            reports.push(check_monotone(&f, f.domain(), &cfg));
        }
        Suite::Halfplane => {
            let f = config.resolve_function()?;
            reports.push(check_halfplane(&f, &cfg));
        }
        Suite::Local => {
            let f = config.resolve_function()?;
            if !f.input().is_diagonal() {
                return Err(Error::Invalid(format!(
                    "the local suite needs a diagonal input system, `{}` is not",
                    f.input().name()
                )));
            }
            reports.push(check_local_monotone(&f, f.domain(), &cfg));
        }
        Suite::Boundary => {
            let f = config.resolve_function()?;
            reports.push(check_boundary_continuity(&f, f.domain(), &cfg));
        }
        Suite::SchurIdentity => {
            reports.push(check_schur_im_identity(&config.check_config(IDENTITY_TOL)));
        }
        Suite::Loewner1d => {
            let functions = match &config.function {
                Some(name) => vec![resolve_scalar(name)?],
                None => scalar_catalog().to_vec(),
            };
            loewner_reports(&functions, &cfg, &mut reports, &mut eqs);
        }
        Suite::All => {
            for name in catalog_names() {
                battery(&catalog(name)?, &cfg, &mut reports, &mut eqs);
            }
            reports.push(check_schur_im_identity(&config.check_config(IDENTITY_TOL)));
            loewner_reports(scalar_catalog(), &cfg, &mut reports, &mut eqs);
        }
    }
    Ok(ReportDocument::new(config.clone(), reports, eqs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suite: Suite, function: Option<&str>) -> RunConfig {
        RunConfig {
            command: "check".into(),
            suite,
            function: function.map(String::from),
            expr: None,
            system: None,
            levels: [1, 2],
            trials: 20,
            seed: 42,
            tol: None,
        }
    }

    #[test]
    fn validation() {
        assert!(config(Suite::Monotone, None).validate().is_err());
        let mut c = config(Suite::Monotone, Some("square"));
        c.levels = [0, 2];
        assert!(c.validate().is_err());
        c.levels = [1, 9];
        assert!(c.validate().is_err());
        c.levels = [1, 2];
        c.tol = Some(0.0);
        assert!(c.validate().is_err());
        let mut e = config(Suite::Monotone, None);
        e.expr = Some("X1".into());
        assert!(e.validate().is_err());
        e.system = Some("scalar".into());
        assert!(e.validate().is_ok());
        assert!(config(Suite::SchurIdentity, None).validate().is_ok());
    }

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            let s: Suite = name.parse().unwrap();
            assert_eq!(serde_json::to_value(s).unwrap(), serde_json::Value::from(name));
            assert_eq!(Suite::NAMES[s as usize], name);
        }
    }

    #[test]
    fn axioms_on_identity_have_zero_margin() {
        let doc = run_suite(&config(Suite::Axioms, Some("identity"))).unwrap();
        assert_eq!(doc.reports[0].worst_margin, 0.0);
        assert_eq!(doc.exit_code(), 0);
    }

    #[test]
    fn square_monotone_exits_one() {
        let mut c = config(Suite::Monotone, Some("square"));
        c.levels = [2, 2];
        c.trials = 300;
        let doc = run_suite(&c).unwrap();
        assert_eq!(doc.exit_code(), 1);
        assert!(doc.reports[0].witness.is_some());
    }

    #[test]
    fn local_suite_rejects_block_systems() {
        assert!(run_suite(&config(Suite::Local, Some("schur_complement"))).is_err());
    }

    #[test]
    fn expression_functions() {
        let mut c = config(Suite::Monotone, None);
        c.expr = Some("X1 + X2".into());
        c.system = Some("diagonal(2)".into());
        assert_eq!(run_suite(&c).unwrap().exit_code(), 0);
    }
}
