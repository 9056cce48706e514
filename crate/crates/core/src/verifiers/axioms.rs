use serde_json::json;

use super::report::{run_trials, Agg, CheckConfig, CheckReport, Meta, Tag, Trial};
use super::sample_point;
use crate::error::Result;
use crate::expr::FreeFunction;
use crate::linalg::{random_matrix, CMatrix, MatrixKind, Rng, MAX_COND};
use crate::opsys::{permute, shuffle_permutation, DomainKind, NCPoint};

/// Relative residual threshold for both axioms.
pub const AXIOM_TOL: f64 = 1e-9;

const RESAMPLES: usize = 20;

/// `‖f(X⊕Y) − f(X)⊕f(Y)‖`, compared on output realizations.
pub fn direct_sum_residual(f: &FreeFunction, x: &NCPoint, y: &NCPoint) -> Result<f64> {
    let joint = f.eval_realized(&x.direct_sum(y)?)?;
    let split = f.output().realize(&f.eval(x)?.direct_sum(&f.eval(y)?)?)?;
    Ok((&joint - &split).op_norm())
}

/// `‖S⁻¹f(X)S − f(S⁻¹XS)‖`, compared on output realizations.
pub fn similarity_residual(f: &FreeFunction, x: &NCPoint, s: &CMatrix) -> Result<f64> {
    let lhs = f.output().realize(&f.eval(x)?.conjugate(s)?)?;
    let rhs = f.eval_realized(&x.conjugate(s)?)?;
    Ok((&lhs - &rhs).op_norm())
}

/// Largest entry of `realize(X⊕Y) − Π·(realize(X) ⊕ realize(Y))·Πᵀ`; zero when the layout holds.
pub fn shuffle_residual(f: &FreeFunction, x: &NCPoint, y: &NCPoint) -> Result<f64> {
    let sys = f.input();
    let joint = sys.realize(&x.direct_sum(y)?)?;
    let plain = sys.realize(x)?.direct_sum(&sys.realize(y)?);
    let perm = shuffle_permutation(sys.k(), x.level(), y.level());
    Ok(joint.max_abs_diff(&permute(&plain, &perm)))
}

fn trial(f: &FreeFunction, domain: DomainKind, n: usize, rng: &mut Rng) -> Trial {
    let mut ood = 0;
    for _ in 0..RESAMPLES {
        let attempt = (|| -> Result<Trial> {
            let x = sample_point(f.input(), domain, n, rng)?;
            let m = rng.int_in(1, n);
            let y = sample_point(f.input(), domain, m, rng)?;
            let u = random_matrix(MatrixKind::Unitary, n, rng);
            let fx = f.eval_realized(&x)?;
            let scale = 1.0 + fx.op_norm();
            let r_sum = direct_sum_residual(f, &x, &y)? / scale;
            // with S = U*, S⁻¹XS = U·X·U*
            let r_sim = similarity_residual(f, &x, &u.adjoint())? / scale;
            let shuffle = shuffle_residual(f, &x, &y)?;
            let worst = r_sum.max(r_sim);
            let margin = if shuffle > 0.0 { f64::NEG_INFINITY } else { -worst };
            Ok(Trial::measured(margin)
                .metric("max_direct_sum_residual", r_sum, Agg::Max)
                .metric("max_similarity_residual", r_sim, Agg::Max)
                .metric("max_shuffle_residual", shuffle, Agg::Max)
                .with_witness(AXIOM_TOL, || {
                    json!({ "x": x, "y": y, "unitary": u, "direct_sum_residual": r_sum,
                            "similarity_residual": r_sim, "shuffle_residual": shuffle })
                }))
        })();
        match attempt {
            Ok(t) => return Trial { out_of_domain: ood, ..t },
            Err(e) if e.is_out_of_domain() => ood += 1,
            Err(e) => return Trial::from_error(&e, ood),
        }
    }
    Trial::skipped(ood)
}

/// Direct-sum and unitary-similarity axioms on sampled domain points, plus the exact layout
/// identity for direct sums.
///
/// The margin of a trial is minus its largest relative residual, and the tolerance is fixed at
/// [`AXIOM_TOL`] whatever `cfg.tol` says.
pub fn check_free_axioms(f: &FreeFunction, domain: DomainKind, cfg: &CheckConfig) -> CheckReport {
    let cfg = CheckConfig { tol: AXIOM_TOL, ..cfg.clone() };
    let meta = Meta {
        check: "axioms",
        function: f.name(),
        systems: vec![f.input().name().to_string(), f.output().name().to_string()],
        tag: Tag::Axioms,
    };
    run_trials(meta, &cfg, |n, rng| trial(f, domain, n, rng))
}

/// Similarity with a general invertible `S`, for callers that pick `S` and `X` themselves.
pub fn similarity_residual_checked(f: &FreeFunction, x: &NCPoint, s: &CMatrix) -> Result<f64> {
    s.inverse(MAX_COND)?;
    let scale = 1.0 + f.eval_realized(x)?.op_norm();
    Ok(similarity_residual(f, x, s)? / scale)
}
