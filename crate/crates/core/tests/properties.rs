use proptest::prelude::*;

use ncloewner_core::expr::{catalog, catalog_names, parse_unchecked, FreeExpr};
use ncloewner_core::linalg::{
    func_calc, imag_part, is_pd, principal_sqrt, psd_margin, random_matrix, CMatrix, HMatrix, MatrixKind, Rng, C64,
};
use ncloewner_core::loewner1d::{loewner_matrix, pick_matrix, scalar_catalog};
use ncloewner_core::opsys::{
    in_domain, order_leq, permute, random_hermitian_point, sample_halfplane, sample_in_domain, shuffle_permutation,
    DomainKind, DomainSpec, OpSysBasis,
};
use ncloewner_core::suite::{run_suite, RunConfig, Suite};
use ncloewner_core::verifiers::{find_counterexample, verify_pair_witness};

fn systems() -> Vec<OpSysBasis> {
    vec![OpSysBasis::scalar(), OpSysBasis::diagonal(2).unwrap(), OpSysBasis::diagonal(3).unwrap(), OpSysBasis::block2()]
}

fn constant() -> impl Strategy<Value = C64> {
    prop_oneof![
        (0u32..400).prop_map(|v| C64::new(v as f64 / 8.0, 0.0)),
        (0u32..400).prop_map(|v| C64::new(0.0, v as f64 / 8.0 + 0.125))
    ]
}

fn expr() -> impl Strategy<Value = FreeExpr> {
    let leaf = prop_oneof![
        (1usize..12).prop_map(FreeExpr::Var),
        (1usize..3, 1usize..3).prop_map(|(p, q)| FreeExpr::Block(p, q)),
        constant().prop_map(FreeExpr::Const),
    ];
    leaf.prop_recursive(5, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FreeExpr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FreeExpr::sub(a, b)),
            // a literal on the left of `*` reads back as a scalar multiple
            (inner.clone(), inner.clone()).prop_map(|(a, b)| match a {
                FreeExpr::Const(c) => FreeExpr::ScalarMul(c, Box::new(b)),
                a => FreeExpr::mul(a, b),
            }),
            (constant(), inner.clone()).prop_map(|(c, e)| FreeExpr::ScalarMul(c, Box::new(e))),
            inner.clone().prop_map(FreeExpr::neg),
            inner.clone().prop_map(FreeExpr::inv),
            inner.prop_map(FreeExpr::sqrt),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(e in expr()) {
        prop_assert!(e.depth() <= 6);
        let text = e.to_string();
        prop_assert_eq!(parse_unchecked(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), n in 1usize..7, shift in 0.5f64..5.0) {
        let mut rng = Rng::new(seed, 0);
        let mut a = random_matrix(MatrixKind::Ginibre, n, &mut rng);
        for i in 0..n {
            a.set(i, i, a.get(i, i) + shift * n as f64);
        }
        let s = principal_sqrt(&a).unwrap();
        prop_assert!((&s * &s).max_abs_diff(&a) <= 1e-10 * (1.0 + a.op_norm()));
    }

    #[test]
    fn sqrt_keeps_the_upper_half_plane(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = Rng::new(seed, 1);
        let h = random_matrix(MatrixKind::Hermitian, n, &mut rng);
        let k = random_matrix(MatrixKind::Pd, n, &mut rng);
        let a = &h + &k.scale(C64::new(0.0, 1.0));
        prop_assume!(is_pd(&imag_part(&a), 0.0).unwrap());
        let s = principal_sqrt(&a).unwrap();
        prop_assert!(psd_margin(&imag_part(&s)).unwrap() > 0.0);
    }

    #[test]
    fn func_calc_composes(seed in any::<u64>(), n in 1usize..7) {
        let a = HMatrix::symmetrize(&random_matrix(MatrixKind::Pd, n, &mut Rng::new(seed, 2)));
        let sq = func_calc(|x| x * x, (0.0, f64::INFINITY), &a).unwrap();
        let back = func_calc(f64::sqrt, (0.0, f64::INFINITY), &sq).unwrap();
        prop_assert!(back.as_cmatrix().max_abs_diff(a.as_cmatrix()) <= 1e-9 * (1.0 + a.op_norm()));
    }

    #[test]
    fn shuffle_identity_is_exact(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut rng = Rng::new(seed, 3);
        for sys in systems() {
            let p = sample_halfplane(&sys, n, &mut rng).unwrap();
            let q = sample_halfplane(&sys, m, &mut rng).unwrap();
            let joint = sys.realize(&p.direct_sum(&q).unwrap()).unwrap();
            let separate = sys.realize(&p).unwrap().direct_sum(&sys.realize(&q).unwrap());
            let perm = shuffle_permutation(sys.k(), n, m);
            prop_assert_eq!(joint, permute(&separate, &perm));
        }
    }

    #[test]
    fn decode_inverts_realize(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = Rng::new(seed, 4);
        for sys in systems() {
            let p = sample_halfplane(&sys, n, &mut rng).unwrap();
            let back = sys.decode(&sys.realize(&p).unwrap(), n).unwrap();
            for (a, b) in p.coeffs().iter().zip(back.coeffs()) {
                prop_assert!(a.max_abs_diff(b) <= 1e-12 * (1.0 + a.max_abs()));
            }
        }
    }

    #[test]
    fn order_is_unitary_invariant(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = Rng::new(seed, 5);
        for sys in systems() {
            let p = random_hermitian_point(&sys, n, &mut rng);
            let q = random_hermitian_point(&sys, n, &mut rng);
            let u = random_matrix(MatrixKind::Unitary, n, &mut rng);
            let before = order_leq(&sys, &p, &q, 1e-9).unwrap();
            let after = order_leq(&sys, &p.conjugate(&u).unwrap(), &q.conjugate(&u).unwrap(), 1e-9).unwrap();
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn domains_closed_under_sums_and_conjugation(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut rng = Rng::new(seed, 6);
        for sys in systems() {
            for kind in [DomainKind::PdCone, DomainKind::Interval { lo: 0.5, hi: 4.0 }, DomainKind::HalfPlane] {
                let d = DomainSpec::new(kind, &sys);
                let sample = |n, rng: &mut Rng| match kind {
                    DomainKind::HalfPlane => sample_halfplane(&sys, n, rng).unwrap(),
                    _ => sample_in_domain(&sys, &d, n, rng).unwrap(),
                };
                let p = sample(n, &mut rng);
                let q = sample(m, &mut rng);
                let u = random_matrix(MatrixKind::Unitary, n, &mut rng);
                prop_assert!(in_domain(&sys, &p.direct_sum(&q).unwrap(), &d, 0.0));
                prop_assert!(in_domain(&sys, &p.conjugate(&u).unwrap(), &d, 0.0));
            }
        }
    }

    #[test]
    fn loewner_verdict_ignores_node_order(mut nodes in prop::collection::vec(0.1f64..10.0, 2..7), rot in 0usize..7) {
        nodes.sort_by(f64::total_cmp);
        prop_assume!(nodes.windows(2).all(|w| w[1] - w[0] > 1e-3));
        for f in scalar_catalog() {
            let l = loewner_matrix(f, &nodes).unwrap();
            // relabelling the nodes permutes rows and columns together
            let k = nodes.len();
            let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
            let rotated = permute(l.matrix.as_cmatrix(), &perm);
            let m0 = psd_margin(&l.matrix).unwrap();
            let m1 = psd_margin(&HMatrix::symmetrize(&rotated)).unwrap();
            prop_assert!((m0 - m1).abs() <= 1e-12 * (1.0 + l.matrix.op_norm()));
        }
    }

    #[test]
    fn pick_matrices_are_hermitian(points in prop::collection::vec((-5.0f64..5.0, 0.05f64..10.0), 1..7)) {
        let zs: Vec<C64> = points.iter().map(|&(re, im)| C64::new(re, im)).collect();
        prop_assume!(zs.iter().enumerate().all(|(i, a)| zs[..i].iter().all(|b| (a - b).norm() > 1e-9)));
        for f in scalar_catalog() {
            let p = pick_matrix(f, &zs).unwrap();
            let m = p.as_cmatrix();
            prop_assert_eq!(m, &m.adjoint());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exit_code_reflects_reports(seed in any::<u64>(), fi in 0usize..7, si in 0usize..6) {
        let name = catalog_names()[fi];
        let suite = [Suite::Equivalence, Suite::Axioms, Suite::Monotone, Suite::Halfplane, Suite::Boundary, Suite::Local][si];
        prop_assume!(suite != Suite::Local || catalog(name).unwrap().input().is_diagonal());
        let cfg = RunConfig {
            command: "check".into(),
            suite,
            function: Some(name.into()),
            expr: None,
            system: None,
            levels: [1, 2],
            trials: 8,
            seed,
            tol: None,
        };
        let doc = run_suite(&cfg).unwrap();
        let clean = doc.reports.iter().all(|r| r.passed()) && doc.reports.iter().all(|r| r.numerical_failures == 0);
        prop_assert_eq!(doc.exit_code() == 0, clean);
        prop_assert_eq!(&run_suite(&cfg).unwrap(), &doc);
    }

    #[test]
    fn found_witnesses_replay(seed in any::<u64>()) {
        let f = catalog("square").unwrap();
        let mut rng = Rng::new(seed, 7);
        if let Some(w) = find_counterexample(&f, DomainKind::PdCone, 2, 400, 1e-8, &mut rng) {
            let again = verify_pair_witness(&f, &w, 1e-8).unwrap();
            prop_assert!((again - w.margin).abs() <= 1e-10);
        }
    }
}

#[test]
fn hermitian_points_realize_hermitian() {
    let mut rng = Rng::new(8, 0);
    for sys in systems() {
        let p = random_hermitian_point(&sys, 3, &mut rng);
        let x: CMatrix = sys.realize(&p).unwrap();
        assert_eq!(x.n(), 3 * sys.k());
        assert!(x.is_hermitian(1e-14));
    }
}
