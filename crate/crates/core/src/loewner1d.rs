//! One-variable Löwner theory as an oracle: scalar functions lifted by the functional calculus,
//! Löwner (divided-difference) matrices and Pick matrices.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expr::FreeFunction;
use crate::linalg::{func_calc, psd_margin, CMatrix, HMatrix, Rng, C64};
use crate::opsys::{sample_ordered_pair, DomainKind, DomainSpec, OpSysBasis};
use crate::verifiers::{run_trials, Agg, CheckConfig, CheckReport, CommutingPath, Equivalence, Meta, Tag, Trial};

/// Smallest allowed gap between Löwner nodes.
pub const MIN_NODE_GAP: f64 = 1e-8;

/// A real function on `(a, b)` with its analytic continuation to the upper half-plane.
#[derive(Clone, Copy)]
pub struct ScalarFunction {
    pub name: &'static str,
    pub domain: (f64, f64),
    real: fn(f64) -> f64,
    complex: fn(C64) -> C64,
    derivative: fn(f64) -> f64,
    /// The same function in the expression language over the scalar system.
    pub expr: &'static str,
}

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarFunction").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl ScalarFunction {
    pub fn eval(&self, x: f64) -> f64 {
        (self.real)(x)
    }

    /// Principal branch on the upper half-plane.
    pub fn eval_complex(&self, z: C64) -> C64 {
        (self.complex)(z)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.domain.0 && x < self.domain.1
    }

    /// `f(A)` through the eigendecomposition.
    pub fn apply(&self, a: &HMatrix) -> Result<HMatrix> {
        func_calc(self.real, self.domain, a)
    }

    /// The matching free function over the scalar system.
    pub fn free_function(&self) -> Result<FreeFunction> {
        let s = OpSysBasis::scalar();
        Ok(FreeFunction::from_text(self.name, self.expr, s.clone(), s)?.with_domain(self.domain_kind()))
    }

    pub fn domain_kind(&self) -> DomainKind {
        match self.domain {
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => DomainKind::Full,
            (lo, hi) if lo == 0.0 && hi == f64::INFINITY => DomainKind::PdCone,
            (lo, hi) => DomainKind::Interval { lo, hi },
        }
    }
}

const POSITIVE: (f64, f64) = (0.0, f64::INFINITY);

const SCALAR_CATALOG: [ScalarFunction; 5] = [
    ScalarFunction {
        name: "x",
        domain: (f64::NEG_INFINITY, f64::INFINITY),
        real: |x| x,
        complex: |z| z,
        derivative: |_| 1.0,
        expr: "X1",
    },
    ScalarFunction {
        name: "sqrt",
        domain: POSITIVE,
        real: f64::sqrt,
        complex: |z| z.sqrt(),
        derivative: |x| 0.5 / x.sqrt(),
        expr: "sqrt(X1)",
    },
    ScalarFunction {
        name: "neg_inv",
        domain: POSITIVE,
        real: |x| -1.0 / x,
        complex: |z| -z.inv(),
        derivative: |x| 1.0 / (x * x),
        expr: "-inv(X1)",
    },
    ScalarFunction {
        name: "square",
        domain: POSITIVE,
        real: |x| x * x,
        complex: |z| z * z,
        derivative: |x| 2.0 * x,
        expr: "X1*X1",
    },
    ScalarFunction {
        name: "cube",
        domain: POSITIVE,
        real: |x| x * x * x,
        complex: |z| z * z * z,
        derivative: |x| 3.0 * x * x,
        expr: "X1*X1*X1",
    },
];

pub fn scalar_catalog() -> &'static [ScalarFunction] {
    &SCALAR_CATALOG
}

pub fn scalar_function(name: &str) -> Result<ScalarFunction> {
    SCALAR_CATALOG
        .iter()
        .find(|f| f.name == name)
        .copied()
        .ok_or_else(|| Error::Unknown { kind: "scalar function", name: name.to_string() })
}

/// Divided differences of `f` at increasing nodes, with `f'` on the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoewnerMatrix {
    pub nodes: Vec<f64>,
    pub matrix: HMatrix,
}

pub fn loewner_matrix(f: &ScalarFunction, nodes: &[f64]) -> Result<LoewnerMatrix> {
    if nodes.is_empty() {
        return Err(Error::Invalid("no nodes".into()));
    }
    if let Some(&x) = nodes.iter().find(|&&x| !f.contains(x)) {
        return Err(Error::OutsideSpectralDomain { eigenvalue: x, lo: f.domain.0, hi: f.domain.1 });
    }
    if let Some(w) = nodes.windows(2).find(|w| !(w[1] - w[0] >= MIN_NODE_GAP)) {
        return Err(Error::Invalid(format!(
            "nodes {} and {} are not increasing by at least {MIN_NODE_GAP:e}",
            w[0], w[1]
        )));
    }
    let values: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect();
    let m = CMatrix::from_fn(nodes.len(), |i, j| {
        let v = if i == j { f.derivative(nodes[i]) } else { (values[i] - values[j]) / (nodes[i] - nodes[j]) };
        C64::new(v, 0.0)
    });
    Ok(LoewnerMatrix { nodes: nodes.to_vec(), matrix: HMatrix::symmetrize(&m) })
}

/// `P_ij = (f(z_i) − conj f(z_j)) / (z_i − conj z_j)` for points of the open upper half-plane.
pub fn pick_matrix(f: &ScalarFunction, points: &[C64]) -> Result<HMatrix> {
    if let Some(z) = points.iter().find(|z| !(z.im > 0.0)) {
        return Err(Error::Invalid(format!("point {z} is not in the upper half-plane")));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b == a) {
            return Err(Error::Invalid(format!("point {a} appears twice")));
        }
    }
    let w: Vec<C64> = points.iter().map(|&z| f.eval_complex(z)).collect();
    let m = CMatrix::from_fn(points.len(), |i, j| (w[i] - w[j].conj()) / (points[i] - points[j].conj()));
    Ok(HMatrix::symmetrize(&m))
}

fn scaled_psd_margin(h: &HMatrix) -> Result<f64> {
    Ok(psd_margin(h)? / (1.0 + h.op_norm()))
}

/// Node range used by the Löwner checks.
pub const NODE_RANGE: (f64, f64) = (0.1, 10.0);

/// Number of nodes or points per random Löwner and Pick configuration.
pub const CONFIG_SIZE: usize = 5;

fn random_nodes(rng: &mut Rng, count: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.uniform_in(NODE_RANGE.0, NODE_RANGE.1)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= MIN_NODE_GAP) {
            return v;
        }
    }
}

fn random_halfplane_points(rng: &mut Rng, count: usize) -> Vec<C64> {
    (0..count).map(|_| C64::new(rng.uniform_in(-5.0, 5.0), 10f64.powf(rng.uniform_in(-1.0, 1.0)))).collect()
}

fn meta<'a>(check: &'a str, f: &'a ScalarFunction, tag: Tag) -> Meta<'a> {
    Meta { check, function: f.name, systems: vec!["scalar".into(), "scalar".into()], tag }
}

/// `A ≤ B ⇒ f(A) ≤ f(B)` through the functional calculus, on pairs with spectra in the domain.
pub fn check_1d_monotone(f: &ScalarFunction, cfg: &CheckConfig) -> CheckReport {
    let sys = OpSysBasis::scalar();
    let d = DomainSpec::new(f.domain_kind(), &sys);
    run_trials(meta("loewner1d_monotone", f, Tag::Loewner1d), cfg, |n, rng| {
        let attempt = sample_ordered_pair(&sys, &d, n, rng).and_then(|(a, b)| {
            let fa = f.apply(&HMatrix::symmetrize(&a.coeffs()[0]))?;
            let fb = f.apply(&HMatrix::symmetrize(&b.coeffs()[0]))?;
            let diff = HMatrix::symmetrize(&(fb.as_cmatrix() - fa.as_cmatrix()));
            let scale = 1.0 + fa.op_norm().max(fb.op_norm());
            Ok((psd_margin(&diff)? / scale, a, b))
        });
        match attempt {
            Ok((m, a, b)) => Trial::measured(m)
                .metric("min_margin", m, Agg::Min)
                .with_witness(cfg.tol, || json!({ "a": a, "b": b, "margin": m })),
            Err(e) if e.is_out_of_domain() => Trial::skipped(1),
            Err(e) => Trial::from_error(&e, 0),
        }
    })
}

/// PSD test of Löwner matrices at random node sets in [`NODE_RANGE`]. Levels are ignored; each
/// trial uses [`CONFIG_SIZE`] nodes.
pub fn check_loewner_matrices(f: &ScalarFunction, trials: usize, seed: u64, tol: f64) -> CheckReport {
    let cfg = CheckConfig::new([CONFIG_SIZE], trials, seed, tol);
    run_trials(meta("loewner_matrix", f, Tag::LoewnerMatrix), &cfg, |n, rng| {
        let nodes = random_nodes(rng, n);
        match loewner_matrix(f, &nodes).and_then(|l| scaled_psd_margin(&l.matrix)) {
            Ok(m) => Trial::measured(m)
                .metric("min_margin", m, Agg::Min)
                .with_witness(tol, || json!({ "nodes": nodes, "margin": m })),
            Err(e) => Trial::from_error(&e, 0),
        }
    })
}

/// PSD test of Pick matrices at random configurations of [`CONFIG_SIZE`] upper half-plane points.
pub fn check_pick_matrices(f: &ScalarFunction, trials: usize, seed: u64, tol: f64) -> CheckReport {
    let cfg = CheckConfig::new([CONFIG_SIZE], trials, seed, tol);
    run_trials(meta("pick_matrix", f, Tag::Pick), &cfg, |n, rng| {
        let points = random_halfplane_points(rng, n);
        match pick_matrix(f, &points).and_then(|p| scaled_psd_margin(&p)) {
            Ok(m) => Trial::measured(m).metric("min_margin", m, Agg::Min).with_witness(tol, || {
                let pts: Vec<[f64; 2]> = points.iter().map(|z| [z.re, z.im]).collect();
                json!({ "points": pts, "margin": m })
            }),
            Err(e) => Trial::from_error(&e, 0),
        }
    })
}

/// Settings for [`cross_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckConfig {
    /// Levels, trials, seed and tolerance of the matrix-level check.
    pub matrix: CheckConfig,
    /// Random node sets and Pick configurations.
    pub configurations: usize,
}

/// Matrix-level monotonicity, Löwner positivity and Pick positivity for one scalar function.
pub fn cross_check(f: &ScalarFunction, cfg: &CrossCheckConfig) -> (Vec<CheckReport>, Equivalence) {
    let m = &cfg.matrix;
    let reports = vec![
        check_1d_monotone(f, m),
        check_loewner_matrices(f, cfg.configurations, m.seed, m.tol),
        check_pick_matrices(f, cfg.configurations, m.seed, m.tol),
    ];
    let eq = Equivalence::from_reports(f.name, &reports);
    (reports, eq)
}

/// Pairs `t1 < t2` compared per path.
const PAIRS_PER_PATH: usize = 4;

/// The literal local definition: along commuting paths with positive definite velocity inside
/// the box `E`, `g(γ(t1)) ≤ g(γ(t2))` for `t1 < t2`.
pub fn amy_local_check(g: &FreeFunction, bbox: &[(f64, f64)], cfg: &CheckConfig) -> CheckReport {
    let meta = Meta {
        check: "amy_local",
        function: g.name(),
        systems: vec![g.input().name().to_string(), g.output().name().to_string()],
        tag: Tag::AmyLocal,
    };
    run_trials(meta, cfg, |n, rng| {
        let path = match CommutingPath::sample(g.input(), bbox, n, rng) {
            Ok(p) => p,
            Err(e) => return Trial::from_error(&e, 0),
        };
        let mut worst: Option<(f64, f64, f64)> = None;
        for _ in 0..PAIRS_PER_PATH {
            let (a, b) = (rng.uniform_in(-path.eps, path.eps), rng.uniform_in(-path.eps, path.eps));
            let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
            let step = (|| -> Result<f64> {
                let g1 = g.eval_realized(&path.at(t1)?)?;
                let g2 = g.eval_realized(&path.at(t2)?)?;
                let scale = 1.0 + g1.op_norm().max(g2.op_norm());
                Ok(psd_margin(&HMatrix::symmetrize(&(&g2 - &g1)))? / scale)
            })();
            match step {
                Ok(m) if worst.is_none_or(|w| m < w.0) => worst = Some((m, t1, t2)),
                Ok(_) => {}
                Err(e) if e.is_out_of_domain() => return Trial::skipped(1),
                Err(e) => return Trial::from_error(&e, 0),
            }
        }
        let (m, t1, t2) = worst.expect("at least one pair");
        Trial::measured(m)
            .metric("min_margin", m, Agg::Min)
            .with_witness(cfg.tol, || json!({ "path": path, "t1": t1, "t2": t2, "margin": m }))
    })
}
