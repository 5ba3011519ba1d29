//! Property tests across modules: parser round trips, jet derivatives,
//! exact/float agreement, tensor invariants and file round trips.

use isoweyl_core::classify::{petrov_tag, SignatureProfile};
use isoweyl_core::curvature::curvature;
use isoweyl_core::generate::random_binary_spec;
use isoweyl_core::jet::{fd_check, Jet2};
use isoweyl_core::metric::{make_lemma_family, CoordFn, LemmaFamily};
use isoweyl_core::sampling::{sample_points, SamplePlan};
use isoweyl_core::scalar::{q, Func, Scalar};
use isoweyl_core::specfile::{parse_spec, write_spec};
use isoweyl_core::{parse, BigRational, Expr, MetricSpec};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-8i64..=8, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

/// Polynomial-and-elementary expressions, bounded and smooth on `[-1, 1]⁴`.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0usize..4).prop_map(Expr::var), small_rational().prop_map(Expr::Const)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), 0i64..=3).prop_map(|(a, n)| a.pow(q(n, 1))),
            inner.clone().prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
            inner.clone().prop_map(|a| Expr::Call(Func::Cos, Box::new(a))),
            // bounded argument keeps exp tame
            inner.prop_map(|a| Expr::Call(Func::Exp, Box::new(Expr::Call(Func::Sin, Box::new(a))))),
        ]
    })
}

/// Rational expressions (no transcendental functions), possibly with division.
fn rational_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0usize..4).prop_map(Expr::var), small_rational().prop_map(Expr::Const)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(b)),
            (inner, -2i64..=3).prop_map(|(a, n)| a.pow(q(n, 1))),
        ]
    })
}

fn unit_point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0f64..1.0)
}

fn rational_point() -> impl Strategy<Value = [BigRational; 4]> {
    prop::array::uniform4((-20i64..=20, 1i64..=7).prop_map(|(n, d)| q(n, d)))
}

fn f64_of(p: &[BigRational; 4]) -> [f64; 4] {
    std::array::from_fn(|i| p[i].to_f64())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_parse_round_trip(e in smooth_expr(), p in unit_point()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        let (a, b): (f64, f64) = (e.eval(&p).unwrap(), back.eval(&p).unwrap());
        prop_assert!(close(a, b, 1e-12), "{text}: {a} vs {b}");
        // non-decimal constants come back as divisions; after that the text is stable
        prop_assert_eq!(parse(&back.to_string()).unwrap(), back);
    }

    #[test]
    fn jet_derivatives_match_finite_differences(e in smooth_expr(), p in unit_point()) {
        let jet = e.eval(&Jet2::seed(&p)).unwrap();
        // the difference error grows with the derivatives themselves (e.g. sin(125 x))
        let scale = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).fold(
            1.0 + jet.value.abs() + jet.grad.iter().fold(0.0f64, |m, g| m.max(g.abs())),
            |m, (a, b)| m.max(jet.hess(a, b).abs()),
        );
        let dev = fd_check(&e, &p, 1e-5).unwrap();
        prop_assert!(dev <= 1e-4 * scale, "deviation {dev:e} at scale {scale:e}");
    }

    #[test]
    fn exact_and_float_evaluation_agree(e in rational_expr(), p in rational_point()) {
        let exact: Result<BigRational, _> = e.eval(&p);
        let float: Result<f64, _> = e.eval(&f64_of(&p));
        if let (Ok(x), Ok(y)) = (exact, float) {
            let x = x.to_f64();
            if x.is_finite() && y.is_finite() && x.abs() < 1e12 {
                prop_assert!(close(x, y, 1e-6), "{e}: exact {x} float {y}");
            }
        }
    }

    #[test]
    fn dependence_is_sound(e in smooth_expr(), p in unit_point(), k in 0usize..4, dx in -0.5f64..0.5) {
        if !e.dependence().contains(k) {
            let mut moved = p;
            moved[k] += dx;
            let (a, b): (f64, f64) = (e.eval(&p).unwrap(), e.eval(&moved).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}

fn spec_from_seed(seed: u64) -> MetricSpec {
    random_binary_spec(&mut ChaCha8Rng::seed_from_u64(seed), "prop")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_metrics_satisfy_curvature_symmetries(seed in any::<u64>()) {
        let spec = spec_from_seed(seed);
        for p in sample_points(&spec, &SamplePlan::new(3, seed)).unwrap() {
            let b = curvature(&spec, &p).unwrap();
            prop_assert!(b.symmetry_residuals().max() <= 1e-9);
        }
    }

    #[test]
    fn mixed_weyl_is_conformally_invariant(seed in any::<u64>(), k in 0usize..4, c in -1.0f64..1.0) {
        let spec = spec_from_seed(seed);
        let m = parse(&format!("exp({c}*x{} + (x{}^2)/4)", k + 1, (k + 1) % 4 + 1)).unwrap();
        let scaled = spec.clone().with_conformal(m);
        for p in sample_points(&spec, &SamplePlan::new(3, seed)).unwrap() {
            let a = curvature(&spec, &p).unwrap().weyl_mixed13;
            let b = curvature(&scaled, &p).unwrap().weyl_mixed13;
            let flat = |t: &[[[[f64; 4]; 4]; 4]; 4]| t.iter().flatten().flatten().flatten().copied().collect::<Vec<_>>();
            let (a, b) = (flat(&a), flat(&b));
            let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * scale, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn constant_rescaling_scales_curvature(seed in any::<u64>(), c in 1i64..5) {
        let spec = spec_from_seed(seed);
        let scaled = spec.clone().with_conformal(Expr::int(c));
        let c2 = (c * c) as f64;
        for p in sample_points(&spec, &SamplePlan::new(3, seed)).unwrap() {
            let a = curvature(&spec, &p).unwrap();
            let b = curvature(&scaled, &p).unwrap();
            // g → g/c²: R_ijkl scales by 1/c², the scalar by c², the residual not at all
            for (x, y) in a.riemann.iter().flatten().flatten().flatten().zip(b.riemann.iter().flatten().flatten().flatten()) {
                prop_assert!(close(*x, y * c2, 1e-10));
            }
            prop_assert!(close(a.scalar * c2, b.scalar, 1e-10));
        }
    }

    #[test]
    fn spec_files_round_trip(seed in any::<u64>()) {
        let spec = spec_from_seed(seed);
        let text = write_spec(&spec);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(write_spec(&back), text);
        for p in sample_points(&spec, &SamplePlan::new(3, seed)).unwrap() {
            let (a, b) = (spec.metric_values(&p).unwrap(), back.metric_values(&p).unwrap());
            for i in 0..4 {
                prop_assert!(close(a[i], b[i], 1e-14));
            }
        }
    }

    #[test]
    fn exact_curvature_matches_float(p in rational_point(), a in prop::array::uniform3(1i64..5)) {
        // lemma-b metrics are rational, so the exact engine applies
        let spec = make_lemma_family(LemmaFamily::B([q(a[0], 1), q(-a[1], 7), q(a[2], 3)]), Expr::int(1)).unwrap();
        let exact = curvature::<BigRational>(&spec, &p);
        let float = curvature::<f64>(&spec, &f64_of(&p));
        if let (Ok(x), Ok(y)) = (exact, float) {
            let scale = y.riemann.iter().flatten().flatten().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            for (u, v) in x.riemann.iter().flatten().flatten().flatten().zip(y.riemann.iter().flatten().flatten().flatten()) {
                prop_assert!((u.to_f64() - v).abs() <= 1e-8 * scale);
            }
            // exact Weyl of a conformally flat metric vanishes identically
            prop_assert!(x.weyl.iter().flatten().flatten().flatten().all(|w| Scalar::is_zero(w)));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_admissible(seed in any::<u64>()) {
        let spec = spec_from_seed(seed);
        let plan = SamplePlan::new(5, seed);
        let a = sample_points(&spec, &plan).unwrap();
        prop_assert_eq!(&a, &sample_points(&spec, &plan).unwrap());
        prop_assert!(a.iter().all(|p| spec.admissible(p).ok));
    }
}

proptest! {
    #[test]
    fn petrov_tag_is_scale_and_permutation_invariant(
        w1 in -5.0f64..5.0, w2 in -5.0f64..5.0, c in 0.01f64..100.0, perm in 0usize..6
    ) {
        let w = [w1, w2, -w1 - w2];
        let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
        let sig = SignatureProfile::from_signs([1, 1, 1, -1]);
        let base = petrov_tag(w, &sig, 1e-9).unwrap();
        let moved = petrov_tag(order.map(|i| c * w[i]), &sig, 1e-9).unwrap();
        if w.iter().fold(0.0f64, |m, x| m.max(x.abs())) > 1e-6 {
            prop_assert_eq!(base.kind, moved.kind);
        }
    }

    #[test]
    fn lemma_c_is_flat_for_any_functions(a in small_rational(), b in small_rational(), p in unit_point()) {
        let fs = [
            parse(&format!("2 + {a}*x1^2")).unwrap(),
            parse(&format!("exp({b}*x2)")).unwrap(),
            parse("3 + sin(x3)").unwrap(),
            parse("-(2 + x4^2)").unwrap(),
        ];
        let spec = make_lemma_family(LemmaFamily::C(fs), Expr::int(1)).unwrap();
        let spec = spec.with_domain(Default::default());
        if spec.admissible(&p).ok {
            prop_assert!(curvature(&spec, &p).unwrap().riemann_norm() <= 1e-20);
        }
    }
}

#[test]
fn constant_f_helper_is_degree_zero() {
    assert_eq!(CoordFn::constant(q(3, 1)).trimmed_poly(), Some(vec![q(3, 1)]));
}
