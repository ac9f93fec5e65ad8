use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

use siegel_bounds::arith::{euler_phi, gcd_u};
use std::sync::OnceLock;

use siegel_bounds::bounds::sweep::{empirical_exponent_sweep, SweepFamily, SweepKind, SweepReport};
use siegel_bounds::bounds::{
    improvement_delta, in_siegel_range, theorem1_exponent, tk_exponent_formula, ExponentExpr, Symbol,
};
use siegel_bounds::forms::{HalfIntegralMatrix, JacobiDatum};
use siegel_bounds::gauss::{gauss_sum, gauss_sum_brute};
use siegel_bounds::kloosterman::{kloosterman, kloosterman_brute, EvalConfig, KloostermanParams, Strategy as Method};
use siegel_bounds::poincare::bessel_j;

/// Positive definite `2m` built from `LLᵀ + I` by doubling the diagonal.
fn half_integral(g: usize) -> impl Strategy<Value = HalfIntegralMatrix> {
    prop::collection::vec(-2i64..=2, g * g).prop_filter_map("positive definite", move |a| {
        let mut rows = vec![vec![0i64; g]; g];
        for i in 0..g {
            for j in 0..g {
                let s: i64 = (0..g).map(|k| a[i * g + k] * a[j * g + k]).sum();
                rows[i][j] = s + if i == j { 1 } else { 0 };
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] *= 2;
        }
        HalfIntegralMatrix::new(rows).ok()
    })
}

fn matrix_and_vectors(max_g: usize) -> impl Strategy<Value = (HalfIntegralMatrix, Vec<i64>, Vec<i64>)> {
    (1..=max_g).prop_flat_map(|g| {
        (half_integral(g), prop::collection::vec(-4i64..=4, g), prop::collection::vec(-4i64..=4, g))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn discriminant_splits_exactly((m, r, _) in matrix_and_vectors(4), n in -20i64..40) {
        let d = JacobiDatum::new_unchecked(n, r, m).unwrap();
        prop_assert_eq!(Ratio::from_integer(d.discriminant()), d.discriminant_split());
    }

    #[test]
    fn discriminant_is_invariant_under_translation((m, r, lambda) in matrix_and_vectors(3), n in -20i64..40) {
        // (n, r) ↦ (n + rᵀλ + m[λ], r + 2mλ) preserves D.
        let g = m.dim();
        let shifted_r: Vec<i64> = (0..g).map(|i| r[i] + (0..g).map(|j| m.twice(i, j) * lambda[j]).sum::<i64>()).collect();
        let r_dot: i64 = r.iter().zip(&lambda).map(|(a, b)| a * b).sum();
        let shifted_n = n + r_dot + (m.quadratic_form(&lambda) as i64);
        let a = JacobiDatum::new_unchecked(n, r, m.clone()).unwrap().discriminant();
        let b = JacobiDatum::new_unchecked(shifted_n, shifted_r, m).unwrap().discriminant();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gauss_twisted_multiplicativity(a in -50i64..50, b in -50i64..50, c1 in 1u64..40, c2 in 1u64..40) {
        prop_assume!(gcd_u(c1, c2) == 1);
        let whole = gauss_sum_brute(a, b, c1 * c2).unwrap();
        let left = gauss_sum_brute(a * c2 as i64, b, c1).unwrap();
        let right = gauss_sum_brute(a * c1 as i64, b, c2).unwrap();
        prop_assert!(whole.agrees_with(&(left * right), 1e-9));
    }

    #[test]
    fn gauss_assembly_matches_enumeration(a in -500i64..500, b in -500i64..500, c in 1u64..400) {
        let closed = gauss_sum(a, b, c).unwrap();
        let brute = gauss_sum_brute(a, b, c).unwrap();
        prop_assert!(closed.agrees_with(&brute, 1e-9 * c as f64));
        prop_assert!(closed.norm() <= c as f64 + closed.abs_error);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn kloosterman_conjugation_and_trivial_bound(
        (m, r, r2) in matrix_and_vectors(2),
        n in -5i64..6,
        n2 in -5i64..6,
        c in 1u64..25,
    ) {
        let neg: Vec<i64> = r2.iter().map(|x| -x).collect();
        let p = KloostermanParams::new(m.clone(), c, n, r.clone(), n2, r2).unwrap();
        let q = KloostermanParams::new(m, c, n, r, n2, neg).unwrap();
        let cfg = EvalConfig::default();
        let h = kloosterman(&p, &cfg).unwrap();
        let h_neg = kloosterman(&q, &cfg).unwrap();
        prop_assert!(h.conj().agrees_with(&h_neg, 1e-9));
        let trivial = (c as f64).powi(p.g() as i32) * euler_phi(c) as f64;
        prop_assert!(h.norm() <= trivial + h.abs_error);
    }

    #[test]
    fn kloosterman_strategies_agree(
        (m, r, r2) in matrix_and_vectors(2),
        n in -5i64..6,
        n2 in -5i64..6,
        c in 1u64..40,
    ) {
        let p = KloostermanParams::new(m, c, n, r, n2, r2).unwrap();
        let brute = kloosterman_brute(&p, u128::MAX).unwrap();
        for s in [Method::Crt, Method::Fast] {
            let v = kloosterman(&p, &EvalConfig::with_strategy(s)).unwrap();
            prop_assert!(v.agrees_with(&brute, 1e-9), "{:?}: {:?} vs {:?}", s, v, brute);
        }
    }

    #[test]
    fn bessel_three_term_recurrence(half in 2u32..20, t in 0.1f64..100.0) {
        let nu = half as f64 - 0.5;
        let below = bessel_j(nu - 1.0, t).unwrap();
        let mid = bessel_j(nu, t).unwrap();
        let above = bessel_j(nu + 1.0, t).unwrap();
        let via = 2.0 * nu / t * mid - below;
        let scale = above.abs().max(1e-300);
        // The recurrence itself loses digits when J_{ν+1} ≪ J_{ν−1}.
        let cancellation = 4.0 * f64::EPSILON * (2.0 * nu / t * mid).abs().max(below.abs());
        prop_assert!((via - above).abs() <= 1e-8 * scale + cancellation, "nu={} t={}", nu, t);
    }

    #[test]
    fn exponent_identities(g in 3u32..=40, k in 1u32..40) {
        prop_assume!(in_siegel_range(g, k));
        let d = improvement_delta(g, k).unwrap();
        prop_assert!(d < Ratio::from_integer(0));
        prop_assert_eq!(tk_exponent_formula(g, k).unwrap() - theorem1_exponent(g, k).unwrap(), -d);
        // Repeated evaluation is identical.
        prop_assert_eq!(theorem1_exponent(g, k).unwrap(), theorem1_exponent(g, k).unwrap());
    }

    #[test]
    fn expr_pow_and_substitute_compose(a in -6i64..6, b in 1i64..6, c in -6i64..6, d in 1i64..6) {
        let e = ExponentExpr::one()
            .with(Symbol::B, Ratio::new(a, b))
            .with(Symbol::D, Ratio::new(c, d))
            .with_epsilon(Ratio::from_integer(1));
        let sub = ExponentExpr::monomial(Symbol::SmallD, Ratio::new(c, d)).with(Symbol::Det2m, Ratio::new(1, b));
        let lhs = e.substitute(Symbol::B, &sub).pow(Ratio::new(1, 2));
        let rhs = e.pow(Ratio::new(1, 2)).substitute(Symbol::B, &sub);
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(e.pow(Ratio::from_integer(0)).coefficient(Symbol::D), Ratio::from_integer(0));
    }
}

fn base_sweep() -> &'static SweepReport {
    static REPORT: OnceLock<SweepReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let family = SweepFamily::from_json(
            r#"{"g":1,"k":12,"m":{"g":1,"twice_m":[[4]]},"n_range":[1,3],"r_values":[[-1],[0],[1]],"c_range":[1,30]}"#,
        )
        .unwrap();
        empirical_exponent_sweep(&family, SweepKind::Kloosterman, &EvalConfig::default()).unwrap()
    })
}

proptest! {
    #[test]
    fn sweep_fit_is_scale_consistent(log_s in -20.0f64..20.0) {
        let base = base_sweep();
        let scaled = base.rescaled(log_s.exp());
        let (a, b) = (base.regression.as_ref().unwrap(), scaled.regression.as_ref().unwrap());
        prop_assert_eq!(a.points, b.points);
        prop_assert!((a.slope - b.slope).abs() <= 1e-9);
        prop_assert!((b.intercept - a.intercept - log_s).abs() <= 1e-9 * (1.0 + log_s.abs()));
        prop_assert!((scaled.max_ratio / base.max_ratio - log_s.exp()).abs() <= 1e-12 * log_s.exp());
    }
}

#[test]
fn gauss_sum_modulo_eight_has_known_value() {
    let g = gauss_sum(1, 0, 8).unwrap();
    let expected = Complex64::from_polar(4.0, std::f64::consts::FRAC_PI_4);
    assert!((g.value - expected).norm() <= g.abs_error + 1e-12);
}
