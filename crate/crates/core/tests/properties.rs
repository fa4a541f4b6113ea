use momentlock::diagnostics::{study_cell, TestFunction};
use momentlock::grid::{initial_discretization, uniform_grid, QuadratureRule, RuleKind};
use momentlock::maxent::{
    dual_hessian, dual_objective, kl_divergence, pinsker_bound, solve_dual_table, total_variation_l1,
};
use momentlock::moments::MomentTable;
use momentlock::{Density64, SolverConfig64};
use proptest::prelude::*;

fn simplex(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn table(points: &[f64], degree: usize) -> MomentTable<f64> {
    let rows: Vec<Vec<f64>> = points.iter().map(|&x| (1..=degree).map(|l| x.powi(l as i32)).collect()).collect();
    MomentTable::from_rows(&rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pinsker_holds(pair in (2usize..20).prop_flat_map(|n| (
        prop::collection::vec(1e-6f64..1.0, n),
        prop::collection::vec(1e-6f64..1.0, n),
    ))) {
        let p = simplex(pair.0);
        let q = simplex(pair.1);
        let kl = kl_divergence(&p, &q).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert!(total_variation_l1(&p, &q) <= pinsker_bound(&p, &q).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_is_log_convex(
        raw in prop::collection::vec(0.01f64..1.0, 6),
        lam in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let q = simplex(raw);
        let pts: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let t = table(&pts, 2);
        let targets = [0.4, 0.25];
        let half: Vec<f64> = lam.iter().map(|v| v / 2.0).collect();
        let j0 = dual_objective(&q, &t, &targets, &[0.0, 0.0]).unwrap();
        let jh = dual_objective(&q, &t, &targets, &half).unwrap();
        let j1 = dual_objective(&q, &t, &targets, &lam).unwrap();
        prop_assert!(jh * jh <= j0 * j1 * (1.0 + 1e-12));
    }

    #[test]
    fn hessian_is_positive_semidefinite(
        raw in prop::collection::vec(0.01f64..1.0, 7),
        lam in prop::collection::vec(-2.0f64..2.0, 3),
        v in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let q = simplex(raw);
        let pts: Vec<f64> = (0..7).map(|i| i as f64 / 6.0).collect();
        let t = table(&pts, 3);
        let h = dual_hessian(&q, &t, &[0.5, 0.3, 0.2], &lam).unwrap();
        let hv = h.mul_vec(&v);
        let quad: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        prop_assert!(quad >= -1e-12);
    }

    #[test]
    fn solution_lies_on_simplex(raw in prop::collection::vec(0.05f64..1.0, 8), mix in 0.0f64..1.0) {
        let q = simplex(raw);
        let pts: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
        let t = table(&pts, 2);
        // Targets between Q's moments and those of the uniform distribution on the points.
        let targets: Vec<f64> = (0..2)
            .map(|l| {
                let eq: f64 = q.iter().enumerate().map(|(i, p)| p * t.row(i)[l]).sum();
                let eu: f64 = (0..8).map(|i| t.row(i)[l] / 8.0).sum();
                (1.0 - mix) * eq + mix * eu
            })
            .collect();
        let sol = solve_dual_table(&q, &t, &targets, &SolverConfig64::default()).unwrap();
        let sum: f64 = sol.probs.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-14);
        prop_assert!(sol.probs.iter().all(|&p| p >= 0.0));
        prop_assert!(sol.moment_residual <= 1e-8);
    }
}

#[test]
fn quadrature_orders_on_smooth_integrand() {
    let d = Density64::unit_uniform();
    for (rule, order) in [(RuleKind::Trapezoid, -2.0), (RuleKind::Simpson, -4.0)] {
        let err = |m: usize| {
            let set = uniform_grid(0.0, 1.0, m).unwrap();
            let q = initial_discretization(&d, &set, &QuadratureRule::build(rule, &set).unwrap()).unwrap();
            (q.expectation(f64::exp) - (std::f64::consts::E - 1.0)).abs()
        };
        let slope = (err(32) / err(16)).log2();
        assert!((slope - order).abs() < 0.1, "{rule:?}: {slope}");
    }
}

#[test]
fn projection_never_moves_when_moments_already_match() {
    // Simpson on the uniform density integrates quadratics exactly, so P must equal Q.
    let row = study_cell(&Density64::unit_uniform(), |x| TestFunction::SinPiX.eval(x), RuleKind::Simpson, 2, 8, &SolverConfig64::default()).unwrap();
    assert!(row.kl.unwrap() <= 1e-14, "{row:?}");
    assert!((row.e_p.unwrap() - row.e_q).abs() <= 1e-14, "{row:?}");
}
