//! Randomized invariants of the model, roots and maturity-randomized solutions.

use geostep_core::mr::{eval_eep_split_mr, eval_european_mr, solve_american_from, solve_european_mr};
use geostep_core::*;
use proptest::prelude::*;

/// Increasing rates above `floor` built from positive gaps.
fn rates(floor: f64, gaps: &[f64]) -> Vec<f64> {
    gaps.iter()
        .scan(floor, |acc, g| {
            *acc += g;
            Some(*acc)
        })
        .collect()
}

fn normalized(raw: &[f64], total: f64) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s * total).collect()
}

prop_compose! {
    fn arb_model()(
        r in 0.0..0.1f64,
        delta in 0.0..0.1f64,
        sigma in 0.08..0.5f64,
        lambda in 0.05..8.0f64,
        p in 0.1..0.9f64,
        up_gaps in prop::collection::vec(0.5..25.0f64, 1..=3),
        down_gaps in prop::collection::vec(0.5..25.0f64, 1..=3),
        up_raw in prop::collection::vec(0.1..1.0f64, 3),
        down_raw in prop::collection::vec(0.1..1.0f64, 3),
    ) -> HejdModel {
        let xi = rates(1.5, &up_gaps);
        let eta = rates(0.5, &down_gaps);
        let p_w = normalized(&up_raw[..xi.len()], p);
        let q_w = normalized(&down_raw[..eta.len()], 1.0 - p);
        HejdModel::new(r, delta, sigma, lambda, &p_w, &xi, &q_w, &eta).unwrap()
    }
}

prop_compose! {
    fn arb_spec()(strike in 50.0..150.0f64, frac in 0.3..0.99f64, rho in -50.0..0.0f64) -> DownOutStepSpec {
        DownOutStepSpec::new(strike, strike * frac, rho, 0.0).unwrap()
    }
}

/// Derivative of the exponent, written out independently.
fn exponent_slope(m: &HejdModel, t: f64) -> f64 {
    let s2 = m.sigma() * m.sigma();
    let zeta: f64 = m.up().iter().map(|c| c.weight * c.rate / (c.rate - 1.0)).sum::<f64>()
        + m.down().iter().map(|c| c.weight * c.rate / (c.rate + 1.0)).sum::<f64>()
        - 1.0;
    let b = m.r() - m.delta() - m.lambda() * zeta - 0.5 * s2;
    let jumps: f64 = m.up().iter().map(|c| c.weight * c.rate / (c.rate - t).powi(2)).sum::<f64>()
        - m.down().iter().map(|c| c.weight * c.rate / (c.rate + t).powi(2)).sum::<f64>();
    b + s2 * t + m.lambda() * jumps
}

/// Residual attainable in double precision: the larger of the nominal bound
/// and the change in the exponent across a few ulps of the root.
fn residual_floor(m: &HejdModel, t: f64, alpha: f64) -> f64 {
    let ulp = f64::EPSILON * t.abs().max(f64::MIN_POSITIVE);
    (1e-10 * alpha.max(1.0)).max(4.0 * ulp * exponent_slope(m, t).abs())
}

fn first_up_pole(m: &HejdModel) -> f64 {
    m.up().first().map_or(f64::INFINITY, |c| c.rate)
}

fn first_down_pole(m: &HejdModel) -> f64 {
    m.down().first().map_or(f64::INFINITY, |c| c.rate)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_is_convex_and_vanishes_at_zero(m in arb_model(), u in 0.02..0.98f64) {
        prop_assert!(m.laplace_exponent(0.0).unwrap().abs() < 1e-15);
        let lo = -first_down_pole(&m);
        let hi = first_up_pole(&m);
        let th = lo + u * (hi - lo);
        let h = 1e-3 * (hi - lo).min(10.0);
        prop_assume!(th - h > lo && th + h < hi);
        let f = |x: f64| m.laplace_exponent(x).unwrap();
        prop_assert!(f(th + h) - 2.0 * f(th) + f(th - h) > 0.0);
    }

    #[test]
    fn martingale_condition(m in arb_model()) {
        let v = m.laplace_exponent(1.0).unwrap();
        prop_assert!((v - (m.r() - m.delta())).abs() < 1e-12);
    }

    #[test]
    fn dual_is_an_involution(m in arb_model()) {
        let back = m.dual_model().dual.dual_model().dual;
        prop_assert!((back.lambda() - m.lambda()).abs() < 1e-10 * m.lambda().max(1.0));
        prop_assert_eq!(back.r(), m.r());
        prop_assert_eq!(back.delta(), m.delta());
        for (a, b) in back.up().iter().chain(back.down()).zip(m.up().iter().chain(m.down())) {
            prop_assert!((a.rate - b.rate).abs() < 1e-10 * b.rate);
            prop_assert!((a.weight - b.weight).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_exponent_is_reflected(m in arb_model(), u in 0.05..0.95f64) {
        let d = m.dual_model().dual;
        let lo = -first_down_pole(&m);
        let hi = first_up_pole(&m).min(30.0);
        let th = lo.max(-30.0) + u * (hi - lo.max(-30.0));
        let x = m.laplace_exponent(th).unwrap();
        let y = d.laplace_exponent(1.0 - th).unwrap();
        prop_assert!((y - (x - (m.r() - m.delta()))).abs() < 1e-8 * x.abs().max(1.0));
    }

    #[test]
    fn generator_reproduces_exponent_on_exponentials(m in arb_model()) {
        let xi = first_up_pole(&m);
        let eta = first_down_pole(&m);
        for th in [-eta / 2.0, 0.5, 1.0, (1.0 + xi) / 2.0] {
            let v = |y: f64| (th * y).exp();
            let g = m.generator_apply(&v, 0.0, &QuadConfig::default()).unwrap();
            let phi = m.laplace_exponent(th).unwrap();
            prop_assert!((g - phi).abs() < 1e-5 * phi.abs().max(1.0), "th={}: {} vs {}", th, g, phi);
        }
    }

    #[test]
    fn roots_interlace_and_solve(m in arb_model()) {
        for alpha in [0.05, 1.0, 10.0, 100.0] {
            let rs = find_roots(&m, alpha).unwrap();
            prop_assert_eq!(rs.beta.len(), m.up().len() + 1);
            prop_assert_eq!(rs.gamma.len(), m.down().len() + 1);
            for &t in rs.beta.iter().chain(&rs.gamma) {
                let res = (m.laplace_exponent(t).unwrap() - alpha).abs();
                prop_assert!(res <= residual_floor(&m, t, alpha), "alpha={} t={} res={}", alpha, t, res);
            }
            prop_assert!(rs.beta[0] > 0.0 && rs.beta[0] < first_up_pole(&m));
            for (i, c) in m.up().iter().enumerate() {
                prop_assert!(rs.beta[i] < c.rate && c.rate < rs.beta[i + 1]);
            }
            prop_assert!(rs.gamma[0] < 0.0 && rs.gamma[0] > -first_down_pole(&m));
            for (i, c) in m.down().iter().enumerate() {
                prop_assert!(rs.gamma[i] > -c.rate && -c.rate > rs.gamma[i + 1]);
            }
        }
    }

    #[test]
    fn roots_move_outward_with_level(m in arb_model(), a in 0.05..50.0f64, f in 1.01..3.0f64) {
        let lo = find_roots(&m, a).unwrap();
        let hi = find_roots(&m, a * f).unwrap();
        for (x, y) in lo.beta.iter().zip(&hi.beta) {
            prop_assert!(x < y);
        }
        for (x, y) in lo.gamma.iter().zip(&hi.gamma) {
            prop_assert!(y < x);
        }
    }

    #[test]
    fn vanishing_intensity_is_quadratic(m in arb_model(), th in -0.4..1.4f64) {
        let tiny = m.with_lambda(1e-12).unwrap();
        let s2 = m.sigma() * m.sigma();
        let q = (m.r() - m.delta() - 0.5 * s2) * th + 0.5 * s2 * th * th;
        prop_assert!((tiny.laplace_exponent(th).unwrap() - q).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contract_ordering_and_knock_rate_monotonicity(
        m in arb_model(),
        s in arb_spec(),
        theta in 0.1..20.0f64,
        u in 0.2..1.8f64,
    ) {
        let x = s.strike * u;
        let price = |rho: f64| {
            let spec = DownOutStepSpec { knock_rate: rho, ..s };
            eval_european_mr(&solve_european_mr(&m, &spec, theta).unwrap(), x)
        };
        let ladder: Vec<f64> = [-5e7, -1e7, -100.0, s.knock_rate, -1.0, 0.0].iter().map(|&r| price(r)).collect();
        let mut sorted_rates = vec![-5e7, -1e7, -100.0, s.knock_rate, -1.0, 0.0];
        sorted_rates.sort_by(f64::total_cmp);
        let sorted: Vec<f64> = sorted_rates.iter().map(|&r| price(r)).collect();
        for w in sorted.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-10 * w[1].abs().max(1.0), "{:?}", sorted);
        }
        prop_assert!(ladder[0] <= ladder[3] + 1e-10 && ladder[3] <= ladder[5] + 1e-10);
    }

    #[test]
    fn american_dominates_and_splits_add_up(m in arb_model(), s in arb_spec(), theta in 0.1..20.0f64) {
        prop_assume!(m.delta() > 0.01);
        let eu = solve_european_mr(&m, &s, theta).unwrap();
        let am = solve_american_from(eu.clone()).map_err(|e| TestCaseError::fail(format!("{e}")))?;
        let w = am.w();
        for i in 0..w.len() {
            prop_assert!((am.w_diffusion[i] + am.w_jump[i] - w[i]).abs() <= 1e-9 * w[i].abs().max(1.0));
        }
        prop_assert!(am.smooth_fit_residual <= 1e-8);
        for k in 1..40 {
            let x = s.strike * 0.05 * k as f64;
            let euro = eval_european_mr(&eu, x);
            let amer = am.price(x);
            let (eep, diff, jump) = eval_eep_split_mr(&am, x);
            prop_assert!(amer >= euro - 1e-9 * euro.max(1.0));
            prop_assert!(amer >= x - s.strike - 1e-9 * x);
            prop_assert!(eep >= -1e-9 * euro.max(1.0));
            prop_assert!((diff + jump - eep).abs() <= 1e-9 * eep.abs().max(1.0));
        }
        let b = am.boundary;
        let (_, diff, jump) = eval_eep_split_mr(&am, b);
        prop_assert!(jump.abs() <= 1e-8);
        prop_assert!((diff - (b - s.strike - eval_european_mr(&eu, b))).abs() <= 1e-8 * b);
    }

    #[test]
    fn regions_join_at_the_barrier_without_knock_rate(m in arb_model(), s in arb_spec(), theta in 0.1..20.0f64) {
        let spec = DownOutStepSpec { knock_rate: 0.0, ..s };
        let eu = solve_european_mr(&m, &spec, theta).unwrap();
        let l = spec.barrier.ln();
        let (below, d_below) = eu.value_log(l - 1e-12);
        let (above, d_above) = eu.value_log(l);
        let scale = above.abs().max(1e-3);
        prop_assert!((below - above).abs() <= 1e-8 * scale);
        prop_assert!((d_below - d_above).abs() <= 1e-8 * d_above.abs().max(1e-3));
        let plain = solve_european_mr(&m, &DownOutStepSpec { barrier: 0.0, ..spec }, theta).unwrap();
        let y = l - 0.3;
        prop_assert!((eu.value_log(y).0 - plain.value_log(y).0).abs() <= 1e-8 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn randomized_solutions_satisfy_their_equations(
        m in arb_model(),
        s in arb_spec(),
        theta in 0.1..20.0f64,
    ) {
        use geostep_core::mr::{oide_residual, OideTarget};
        let eu = solve_european_mr(&m, &s, theta).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| s.strike * (0.4 + 1.6 * (i as f64 + 0.5) / 50.0)).collect();
        let quad = QuadConfig::default();
        let r = oide_residual(&m, &s, theta, OideTarget::European(&eu), &grid, &quad).unwrap();
        prop_assert!(r <= 1e-6, "european residual {}", r);
        let am = solve_american_from(eu).map_err(|e| TestCaseError::fail(format!("{e}")))?;
        let inner: Vec<f64> = (0..50)
            .map(|i| s.barrier + (am.boundary - s.barrier) * (i as f64 + 0.5) / 50.0)
            .collect();
        let r = oide_residual(&m, &s, theta, OideTarget::American(&am), &inner, &quad).unwrap();
        prop_assert!(r <= 1e-6, "american residual {}", r);
    }
}
