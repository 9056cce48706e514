//! The identity behind the Schur complement's half-plane property:
//! `Im f(X) = V*·(Im X)·V` with `V = [I; −X22⁻¹X21]`.
//!
//! `X·V = [f(X); 0]` and the top block of `V` is `I`, so `V*·X·V = f(X)` and
//! `V*·X*·V = f(X)*`. Subtracting gives the identity, and `V` has full column rank, so
//! `Im X ≻ 0` forces `Im f(X) ≻ 0`.

use serde_json::json;

use super::report::{run_trials, Agg, CheckConfig, CheckReport, Meta, Tag, Trial};
use crate::error::Result;
use crate::expr::{catalog, FreeFunction};
use crate::linalg::{imag_part, psd_margin, CMatrix, C64, MAX_COND};
use crate::opsys::{sample_halfplane, NCPoint, OpSysBasis};

const RESAMPLES: usize = 20;

/// Default residual tolerance, relative to `1 + ‖X‖²`.
pub const IDENTITY_TOL: f64 = 1e-10;

/// The `2n × n` column `[I; −X22⁻¹X21]`.
pub fn schur_column(x: &CMatrix, n: usize) -> Result<CMatrix> {
    let x22_inv = x.block(1, 1, n).inverse(MAX_COND)?;
    let lower = -(&x22_inv * &x.block(1, 0, n));
    Ok(stack(&CMatrix::identity(n), &lower))
}

/// The column `[I; (X22*)⁻¹X12*]`. The identity holds with it only when `X21 = X12*`.
pub fn adjoint_schur_column(x: &CMatrix, n: usize) -> Result<CMatrix> {
    let x22_adj_inv = x.block(1, 1, n).adjoint().inverse(MAX_COND)?;
    let lower = &x22_adj_inv * &x.block(0, 1, n).adjoint();
    Ok(stack(&CMatrix::identity(n), &lower))
}

fn stack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    // stored in a square 2n×2n frame; only the first n columns are used
    let n = top.n();
    let mut m = CMatrix::zeros(2 * n);
    m.set_block(0, 0, top);
    m.set_block(1, 0, bottom);
    m
}

/// `V*·M·V` for a stacked column held in the left half of a `2n×2n` frame.
fn sandwich(v: &CMatrix, m: &CMatrix, n: usize) -> CMatrix {
    (&(&v.adjoint() * m) * v).block(0, 0, n)
}

/// `(‖Im f(X) − V*(Im X)V‖, ‖X‖)` for the column `v`.
pub fn identity_residual(f: &FreeFunction, p: &NCPoint, v: &CMatrix) -> Result<(f64, f64)> {
    let x = f.input().realize(p)?;
    let n = p.level();
    let im_f = imag_part(&f.eval_realized(p)?).into_cmatrix();
    let rhs = sandwich(v, imag_part(&x).as_cmatrix(), n);
    Ok(((&im_f - &rhs).op_norm(), x.op_norm()))
}

fn trial(f: &FreeFunction, n: usize, tol: f64, rng: &mut crate::linalg::Rng) -> Trial {
    let mut ood = 0;
    for _ in 0..RESAMPLES {
        let attempt = (|| -> Result<Trial> {
            let p = sample_halfplane(f.input(), n, rng)?;
            let x = f.input().realize(&p)?;
            let v = schur_column(&x, n)?;
            let (res, norm) = identity_residual(f, &p, &v)?;
            let scaled = res / (1.0 + norm * norm);
            let fp = f.eval_realized(&p)?;
            let im_margin = psd_margin(&imag_part(&fp))?;
            let margin = if im_margin > 0.0 { -scaled } else { f64::NEG_INFINITY };
            Ok(Trial::measured(margin)
                .metric("max_scaled_residual", scaled, Agg::Max)
                .metric("min_im_margin", im_margin, Agg::Min)
                .with_witness(tol, || json!({ "point": p, "scaled_residual": scaled, "im_margin": im_margin })))
        })();
        match attempt {
            Ok(t) => return Trial { out_of_domain: ood, ..t },
            // X22 singular: measure zero in Π, re-sample
            Err(e) if e.is_out_of_domain() => ood += 1,
            Err(e) => return Trial::from_error(&e, ood),
        }
    }
    Trial::skipped(ood)
}

/// Checks the identity on sampled points of `Π(block2)` along with `Im f(X) ≻ 0`.
pub fn check_schur_im_identity(cfg: &CheckConfig) -> CheckReport {
    let f = catalog("schur_complement").expect("catalog entry");
    let meta = Meta {
        check: "schur_identity",
        function: f.name(),
        systems: vec![OpSysBasis::block2().name().to_string(), f.output().name().to_string()],
        tag: Tag::SchurIdentity,
    };
    run_trials(meta, cfg, |n, rng| trial(&f, n, cfg.tol, rng))
}

/// `X = i·1` in block2 at level `n`: diagonal blocks `i`, off-diagonal blocks zero.
pub fn imaginary_identity_point(n: usize) -> NCPoint {
    OpSysBasis::block2().identity_point(n).scale(C64::new(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    #[test]
    fn diagonal_example() {
        let f = catalog("schur_complement").unwrap();
        let p = imaginary_identity_point(1);
        let x = f.input().realize(&p).unwrap();
        let v = schur_column(&x, 1).unwrap();
        assert_eq!(v.block(1, 0, 1).max_abs(), 0.0);
        let fp = f.eval(&p).unwrap().coeffs()[0].get(0, 0);
        assert_eq!(fp, C64::new(0.0, 1.0));
        assert_eq!(identity_residual(&f, &p, &v).unwrap().0, 0.0);
    }

    #[test]
    fn hermitian_points_give_zero_on_both_sides() {
        let f = catalog("schur_complement").unwrap();
        let b = OpSysBasis::block2();
        let p = b.point([2.0, 1.0, 1.0, 0.0].iter().map(|&x| CMatrix::diag_real(&[x])).collect()).unwrap();
        let x = b.realize(&p).unwrap();
        let (res, _) = identity_residual(&f, &p, &schur_column(&x, 1).unwrap()).unwrap();
        assert!(res < 1e-15);
        assert!(imag_part(&f.eval_realized(&p).unwrap()).op_norm() < 1e-15);
    }

    #[test]
    fn adjoint_column_fails_off_the_symmetric_slice() {
        // X = [[i, 1], [0, i]]: f(X) = i, but the adjoint-built column gives V*(Im X)V = 3
        let f = catalog("schur_complement").unwrap();
        let b = OpSysBasis::block2();
        let x = CMatrix::from_rows(&[
            vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
        ])
        .unwrap();
        let p = b.decode(&x, 1).unwrap();
        let (wrong, _) = identity_residual(&f, &p, &adjoint_schur_column(&x, 1).unwrap()).unwrap();
        assert!((wrong - 2.0).abs() < 1e-14);
        let (right, _) = identity_residual(&f, &p, &schur_column(&x, 1).unwrap()).unwrap();
        assert!(right < 1e-15);
    }

    #[test]
    fn adjoint_column_is_exact_when_blocks_are_adjoint() {
        let f = catalog("schur_complement").unwrap();
        let b = OpSysBasis::block2();
        let mut rng = Rng::new(81, 0);
        for _ in 0..50 {
            let mut x = b.realize(&sample_halfplane(&b, 2, &mut rng).unwrap()).unwrap();
            x.set_block(1, 0, &x.block(0, 1, 2).adjoint());
            let p = b.decode(&x, 2).unwrap();
            let (res, norm) = identity_residual(&f, &p, &adjoint_schur_column(&x, 2).unwrap()).unwrap();
            assert!(res <= 1e-12 * (1.0 + norm * norm));
        }
    }

    #[test]
    fn random_points() {
        let r = check_schur_im_identity(&CheckConfig::new(1..=3, 200, 82, IDENTITY_TOL));
        assert!(r.passed(), "{r:?}");
        assert!(r.metrics["min_im_margin"] > 0.0);
        assert!(r.metrics["max_scaled_residual"] <= IDENTITY_TOL);
    }
}
