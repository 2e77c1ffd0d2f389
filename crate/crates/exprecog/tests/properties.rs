//! Cross-module invariants: shift algebra, determinant tests on random
//! fixtures, recovery round-trips, and parser round-trips.

use exprecog::expr::{parse_expression, Expr, Expression, Func};
use exprecog::exppoly::ExpPoly;
use exprecog::fixtures::{random_exppoly, random_exppoly_with_dimension, FixtureConfig};
use exprecog::hankel::{estimate_order, popoviciu_test, TestGrid};
use exprecog::oracle::{line_restriction, FunctionOracle};
use exprecog::poly::MultivariatePolynomial;
use exprecog::recurrence::{
    fit_recurrence, recover_1d, verify_recurrence, RecoveryConfig, RecoveryOutcome,
};
use exprecog::ronkin::{RonkinConversion, RonkinForm};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut impl Rng, dim: usize, bound: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-bound..bound)).collect()
}

/// Term-by-term comparison after normalization: same exponents (exactly, as
/// both sides copy them) and coefficients within a relative tolerance.
fn assert_exppoly_close(a: &ExpPoly, b: &ExpPoly, rel_tol: f64) {
    assert_eq!(a.terms().len(), b.terms().len(), "term counts differ");
    for (ta, tb) in a.terms().iter().zip(b.terms()) {
        for (ea, eb) in ta.exponent.iter().zip(&tb.exponent) {
            assert!((ea - eb).norm() < 1e-12, "exponents differ: {ea} vs {eb}");
        }
        let scale = ta.poly.max_coeff_magnitude().max(tb.poly.max_coeff_magnitude());
        let mut terms_b: Vec<(Vec<u32>, Complex64)> =
            tb.poly.terms().map(|(m, c)| (m.to_vec(), c)).collect();
        for (alpha, ca) in ta.poly.terms() {
            let pos = terms_b.iter().position(|(beta, _)| beta == alpha);
            let cb = match pos {
                Some(i) => terms_b.swap_remove(i).1,
                None => Complex64::new(0.0, 0.0),
            };
            assert!(
                (ca - cb).norm() <= rel_tol * scale,
                "coefficient of {alpha:?} differs: {ca} vs {cb}"
            );
        }
        for (beta, cb) in terms_b {
            assert!(
                cb.norm() <= rel_tol * scale,
                "extra coefficient {cb} at {beta:?}"
            );
        }
    }
}

#[test]
fn shift_composition_matches_single_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for dim in [1usize, 2] {
        let cfg = FixtureConfig::new(dim);
        for _ in 0..25 {
            let fx = random_exppoly(&mut rng, &cfg);
            let h = random_point(&mut rng, dim, 1.0);
            let k = random_point(&mut rng, dim, 1.0);
            let hk: Vec<f64> = h.iter().zip(&k).map(|(a, b)| a + b).collect();
            let two_step = fx.exppoly.shift(&h).unwrap().shift(&k).unwrap();
            let one_step = fx.exppoly.shift(&hk).unwrap();
            assert_exppoly_close(&two_step, &one_step, 1e-11);
        }
    }
}

#[test]
fn shift_agrees_with_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for dim in [1usize, 2] {
        let cfg = FixtureConfig::new(dim);
        for _ in 0..25 {
            let fx = random_exppoly(&mut rng, &cfg);
            let h = random_point(&mut rng, dim, 2.0);
            let shifted = fx.exppoly.shift(&h).unwrap();
            for _ in 0..4 {
                let x = random_point(&mut rng, dim, 2.0);
                let xh: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a + b).collect();
                let lhs = shifted.evaluate(&x).unwrap();
                let rhs = fx.exppoly.evaluate(&xh).unwrap();
                let scale = lhs.norm().max(rhs.norm()).max(1e-300);
                assert!(
                    (lhs - rhs).norm() <= 1e-12 * scale,
                    "shift/evaluate mismatch: {lhs} vs {rhs}"
                );
            }
        }
    }
}

#[test]
fn translation_dimension_is_shift_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for dim in [1usize, 2] {
        let cfg = FixtureConfig::new(dim);
        for _ in 0..25 {
            let fx = random_exppoly(&mut rng, &cfg);
            let h = random_point(&mut rng, dim, 1.5);
            let shifted = fx.exppoly.shift(&h).unwrap();
            assert_eq!(
                shifted.translation_space_dimension(),
                fx.exppoly.translation_space_dimension()
            );
        }
    }
}

#[test]
fn ronkin_embedding_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for dim in [1usize, 2] {
        let cfg = FixtureConfig::new(dim);
        for _ in 0..25 {
            let fx = random_exppoly(&mut rng, &cfg);
            let form = RonkinForm::from_exppoly(&fx.exppoly);
            assert!(form.total_degrees().iter().all(|&d| d <= 1));
            let back = match form.to_exppoly() {
                RonkinConversion::ExpPoly(p) => p,
                RonkinConversion::Rejected { .. } => panic!("embedding must convert back"),
            };
            for _ in 0..100 {
                let x = random_point(&mut rng, dim, 2.0);
                let a = fx.exppoly.evaluate(&x).unwrap();
                let b = back.evaluate(&x).unwrap();
                let scale = a.norm().max(b.norm()).max(1e-300);
                assert!((a - b).norm() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn symbolic_line_restriction_matches_oracle_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let cfg = FixtureConfig::new(2);
    for _ in 0..20 {
        let fx = random_exppoly(&mut rng, &cfg);
        let x0 = random_point(&mut rng, 2, 1.0);
        let mut h0 = random_point(&mut rng, 2, 1.0);
        if h0.iter().all(|&c| c.abs() < 0.1) {
            h0[0] = 1.0;
        }
        // Symbolic path: line_restriction keeps exppoly-backed oracles exact.
        let oracle = FunctionOracle::from_exppoly(fx.exppoly.clone());
        let restricted = line_restriction(&oracle, &x0, &h0).unwrap();
        assert!(restricted.as_exppoly().is_some());
        for _ in 0..100 {
            let t = rng.gen_range(-2.0..2.0);
            // Oracle path: evaluate the original function along the line.
            let point: Vec<f64> = x0.iter().zip(&h0).map(|(a, d)| a + t * d).collect();
            let a = restricted.eval(&[t]).unwrap();
            let b = oracle.eval(&point).unwrap();
            let scale = a.norm().max(b.norm()).max(1e-300);
            assert!((a - b).norm() <= 1e-10 * scale, "line mismatch at t={t}");
        }
    }
}

#[test]
fn popoviciu_generically_fails_below_the_translation_dimension() {
    // Degenerate samples, detected by every window vanishing numerically,
    // are skipped: high-degree polynomial parts draw determinants below any
    // fixed tolerance on a bounded grid. Generic fixtures must fail.
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut failed_below = 0usize;
    let mut skipped = 0usize;
    for dim in [1usize, 2] {
        let cfg = FixtureConfig::new(dim);
        for i in 0..25 {
            let fx = random_exppoly(&mut rng, &cfg);
            let n = fx.translation_dimension;
            if n < 1 {
                continue;
            }
            let f = FunctionOracle::from_exppoly(fx.exppoly.clone());
            let grid = TestGrid::default_for(dim, 1000 + i, 1e-8, 12).unwrap();
            let below = popoviciu_test(&f, n - 1, &grid).unwrap();
            if below.pass {
                skipped += 1;
            } else {
                failed_below += 1;
            }
        }
    }
    assert!(
        failed_below >= 3 * skipped,
        "below-order passes are not generic: {failed_below} failed vs {skipped} skipped"
    );
}

#[test]
fn estimate_order_never_exceeds_translation_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for dim in [1usize, 2] {
        let cfg = FixtureConfig::new(dim);
        for i in 0..25 {
            let fx = random_exppoly(&mut rng, &cfg);
            let n = fx.translation_dimension;
            let f = FunctionOracle::from_exppoly(fx.exppoly.clone());
            let grid = TestGrid::default_for(dim, 2000 + i, 1e-8, 12).unwrap();
            let est = estimate_order(&f, n + 2, &grid).unwrap();
            let found = est.order.expect("must pass at or below its dimension");
            assert!(found <= n, "estimate {found} exceeds translation dimension {n}");
        }
    }
}

#[test]
fn fitted_recurrence_verifies_at_tight_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let cfg = FixtureConfig::new(1);
    for _ in 0..30 {
        let fx = random_exppoly(&mut rng, &cfg);
        let n = fx.translation_dimension;
        let f = FunctionOracle::from_exppoly(fx.exppoly.clone());
        let bases: Vec<f64> = (0..(2 * n + 12)).map(|i| -2.0 + i as f64 * 4.0 / (2 * n + 11) as f64).collect();
        let rec = match fit_recurrence(&f, n, 0.5, &bases) {
            Ok(rec) => rec,
            Err(exprecog::Error::DegenerateOrder { .. }) => continue,
            Err(e) => panic!("unexpected fit error: {e}"),
        };
        let sweep: Vec<f64> = (0..25).map(|i| -3.0 + i as f64 * 6.0 / 24.0).collect();
        let check = verify_recurrence(&f, &rec, &sweep, 1e-9).unwrap();
        assert!(
            check.pass,
            "fitted recurrence residual {} at x={}",
            check.worst_residual, check.worst_x
        );
    }
}

#[test]
fn recovery_round_trip_100_random_1d() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let cfg = FixtureConfig::new(1);
    let config = RecoveryConfig::default();
    for case in 0..100 {
        let fx = random_exppoly(&mut rng, &cfg);
        let f = FunctionOracle::from_exppoly(fx.exppoly.clone());
        let outcome = recover_1d(&f, 8, &config).unwrap();
        let rec = match outcome {
            RecoveryOutcome::Recovered(rec) => rec,
            RecoveryOutcome::NotExponentialPolynomial { stage, detail } => panic!(
                "case {case}: fixture with dimension {} not recovered ({}: {detail})",
                fx.translation_dimension,
                stage.as_str()
            ),
        };
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut diffs = Vec::with_capacity(50);
        for _ in 0..50 {
            let x = [rng.gen_range(-2.0..2.0)];
            let want = fx.exppoly.evaluate(&x).unwrap();
            let got = rec.model.evaluate(&x).unwrap();
            scale = scale.max(want.norm());
            diffs.push((got - want).norm());
        }
        for d in diffs {
            worst = worst.max(d / scale.max(1e-300));
        }
        assert!(
            worst <= 1e-6,
            "case {case}: round-trip error {worst:.3e} (dimension {})",
            fx.translation_dimension
        );
    }
}

#[test]
fn recovery_commutes_with_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let cfg = FixtureConfig::new(1);
    let config = RecoveryConfig::default();
    let mut checked = 0;
    for _ in 0..20 {
        let fx = random_exppoly(&mut rng, &cfg);
        let f = FunctionOracle::from_exppoly(fx.exppoly.clone());
        let shifted = fx.exppoly.shift(&[1.0]).unwrap();
        let g = FunctionOracle::from_exppoly(shifted);
        let (Some(p), Some(q)) = (
            recover_1d(&f, 8, &config).unwrap().recovered().cloned(),
            recover_1d(&g, 8, &config).unwrap().recovered().cloned(),
        ) else {
            continue;
        };
        let p_shifted = p.model.shift(&[1.0]).unwrap();
        let mut scale: f64 = 0.0;
        let mut diffs = Vec::with_capacity(50);
        for _ in 0..50 {
            let x = [rng.gen_range(-2.0..2.0)];
            let a = p_shifted.evaluate(&x).unwrap();
            let b = q.model.evaluate(&x).unwrap();
            scale = scale.max(a.norm().max(b.norm()));
            diffs.push((a - b).norm());
        }
        for d in diffs {
            assert!(d <= 1e-6 * scale.max(1e-300), "shift consistency violated");
        }
        checked += 1;
    }
    assert!(checked >= 15, "too few successful recoveries: {checked}");
}

#[test]
fn expression_oracle_matches_symbolic_oracle() {
    let text = "3*exp(0.6931471805599453*x1)+1";
    let expr_oracle = FunctionOracle::from_expression(parse_expression(text, 1).unwrap());
    let ln2 = std::f64::consts::LN_2;
    let symbolic = ExpPoly::from_terms(
        1,
        vec![
            (
                MultivariatePolynomial::constant(1, Complex64::new(3.0, 0.0)),
                vec![Complex64::new(ln2, 0.0)],
            ),
            (
                MultivariatePolynomial::constant(1, Complex64::new(1.0, 0.0)),
                vec![Complex64::new(0.0, 0.0)],
            ),
        ],
    )
    .unwrap();
    let sym_oracle = FunctionOracle::from_exppoly(symbolic);
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for _ in 0..100 {
        let x = [rng.gen_range(-3.0..3.0)];
        let a = expr_oracle.eval(&x).unwrap();
        let b = sym_oracle.eval(&x).unwrap();
        let scale = a.norm().max(b.norm()).max(1.0);
        assert!((a - b).norm() <= 1e-9 * scale);
    }
}

#[test]
fn multiplicity_case_recovers() {
    // x^2 e^x has translation dimension 3 behind a single exponent.
    let p = ExpPoly::term(
        MultivariatePolynomial::from_terms(1, vec![(vec![2], Complex64::new(1.0, 0.0))]).unwrap(),
        vec![Complex64::new(1.0, 0.0)],
    )
    .unwrap();
    let f = FunctionOracle::from_exppoly(p.clone());
    let outcome = recover_1d(&f, 8, &RecoveryConfig::default()).unwrap();
    let rec = outcome.recovered().expect("x^2 e^x recovers");
    assert_eq!(rec.order, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    for _ in 0..50 {
        let x = [rng.gen_range(-2.0..2.0)];
        let want = p.evaluate(&x).unwrap();
        let got = rec.model.evaluate(&x).unwrap();
        assert!((got - want).norm() <= 1e-7 * want.norm().max(1.0));
    }
}

// ---------------------------------------------------------------------------
// Parser round-trip fuzzing
// ---------------------------------------------------------------------------

fn arb_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..dim).prop_map(Expr::Var),
        (0.0..1000.0f64).prop_map(Expr::Num),
        Just(Expr::Num(0.0)),
        Just(Expr::Num(1.0)),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (prop_oneof![
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sin),
                Just(Func::Cos)
            ], inner)
                .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, .. ProptestConfig::default() })]

    #[test]
    fn canonical_print_reparses_identically(ast in arb_expr(3)) {
        let expr = Expression::from_ast(3, ast);
        let text = expr.to_canonical_string();
        let reparsed = parse_expression(&text, 3).expect("canonical text parses");
        prop_assert_eq!(expr, reparsed);
    }
}
