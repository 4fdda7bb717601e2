use anash_core::construct::{compute_case4_params, compute_case5_params};
use anash_core::descent::{equalize_regrets, run_descent, EQUALIZE_TOL};
use anash_core::dual::{compute_lambda_mu, solve_dual, ConstructParams, DualSolution};
use anash_core::game::mix;
use anash_core::oracle::{certify, stationary_checks, support_enumeration, DEFAULT_MAX_N};
use anash_core::{solve, BimatrixGame, MixedStrategy, SolverConfig, StrategyProfile};
use proptest::prelude::*;

fn game(max_n: usize) -> impl Strategy<Value = BimatrixGame> {
    (2usize..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..=1.0, n * n),
            prop::collection::vec(0.0f64..=1.0, n * n),
        )
            .prop_map(move |(r, c)| BimatrixGame::new(n, r, c).unwrap())
    })
}

fn strategy(n: usize) -> impl Strategy<Value = MixedStrategy> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|mut w| {
        w[0] += 1e-3;
        MixedStrategy::project(w).unwrap()
    })
}

fn game_and_profile(max_n: usize) -> impl Strategy<Value = (BimatrixGame, StrategyProfile)> {
    game(max_n).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), strategy(n), strategy(n))
            .prop_map(|(g, x, y)| (g, StrategyProfile::new(x, y).unwrap()))
    })
}

/// Reference bilinear form written independently of the library.
fn bilinear(m: &[f64], n: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += x[i] * m[i * n + j] * y[j];
        }
    }
    total
}

fn reference_regrets(g: &BimatrixGame, x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = g.n();
    let e = |k: usize| {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        v
    };
    let r_best = (0..n)
        .map(|i| bilinear(g.row_matrix(), n, &e(i), y))
        .fold(f64::NEG_INFINITY, f64::max);
    let c_best = (0..n)
        .map(|j| bilinear(g.col_matrix(), n, x, &e(j)))
        .fold(f64::NEG_INFINITY, f64::max);
    (
        r_best - bilinear(g.row_matrix(), n, x, y),
        c_best - bilinear(g.col_matrix(), n, x, y),
    )
}

fn swap_duals(d: &DualSolution) -> DualSolution {
    DualSolution {
        w: d.z.clone(),
        z: d.w.clone(),
        p_mass: d.q_mass,
        q_mass: d.p_mass,
        a: d.b,
        b: d.a,
        row_weights: d.col_weights.clone(),
        col_weights: d.row_weights.clone(),
        degenerate_row: d.degenerate_col,
        degenerate_col: d.degenerate_row,
        ..d.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn regrets_match_reference((g, p) in game_and_profile(6)) {
        let rep = g.regret_report(&p).unwrap();
        let (rr, cr) = reference_regrets(&g, p.row.probs(), p.col.probs());
        prop_assert!((rep.row_regret - rr.max(0.0)).abs() < 1e-12);
        prop_assert!((rep.col_regret - cr.max(0.0)).abs() < 1e-12);
        prop_assert!(rep.max_regret >= 0.0 && rep.max_regret <= 1.0);
    }

    #[test]
    fn mixing_stays_in_simplex((g, p) in game_and_profile(6), t in 0.0f64..=1.0) {
        let m = mix(&p.row, &p.col, t).unwrap();
        prop_assert_eq!(m.len(), g.n());
        let sum: f64 = m.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(m.probs().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn equalization_balances_without_raising_g((g, p) in game_and_profile(6)) {
        let before = g.regret_report(&p).unwrap();
        let q = equalize_regrets(&g, &p).unwrap();
        let after = g.regret_report(&q).unwrap();
        prop_assert!((after.row_regret - after.col_regret).abs() <= EQUALIZE_TOL);
        prop_assert!(after.max_regret <= before.max_regret + 1e-9);
    }

    #[test]
    fn descent_trace_decreases_and_certifies((g, p) in game_and_profile(5)) {
        let cfg = SolverConfig::default();
        let cert = run_descent(&g, &cfg, &p).unwrap();
        for w in cert.descent_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        prop_assert!(cert.is_stationary());
        prop_assert!(cert.gamma - cert.g_value >= -cfg.delta - 1e-8);
        prop_assert_eq!(cert.descent_trace.len(), cert.iterations_used);
    }

    #[test]
    fn stationary_points_satisfy_dual_bounds((g, p) in game_and_profile(5)) {
        let cfg = SolverConfig::default();
        let cert = run_descent(&g, &cfg, &p).unwrap();
        let duals = solve_dual(&g, &cert.profile, cfg.br_tol).unwrap();
        for check in stationary_checks(&g, &cert, &duals, cfg.delta).unwrap() {
            prop_assert!(check.holds(), "{:?}", check);
        }
        let params = compute_lambda_mu(&g, &cert.profile, &duals).unwrap();
        prop_assert!(params.lambda <= 1.0 + 1e-9 && params.mu <= 1.0 + 1e-9);

        // λ and μ through the reference bilinear form
        let n = g.n();
        let (w, z) = (duals.w.probs(), duals.z.probs());
        let lam = bilinear(g.row_matrix(), n, w, z) - bilinear(g.row_matrix(), n, cert.profile.row.probs(), z);
        let mu = bilinear(g.col_matrix(), n, w, z) - bilinear(g.col_matrix(), n, w, cert.profile.col.probs());
        prop_assert!((params.lambda - lam).abs() < 1e-12);
        prop_assert!((params.mu - mu).abs() < 1e-12);
    }

    #[test]
    fn mirrored_parameters_agree_with_transposed_game(
        (g, p) in game_and_profile(5),
        w in strategy(5),
        z in strategy(5),
    ) {
        let n = g.n();
        let cut = |s: &MixedStrategy| MixedStrategy::project(s.probs()[..n].to_vec()).unwrap();
        let duals = DualSolution {
            w: cut(&w),
            z: cut(&z),
            p_mass: 0.5,
            q_mass: 0.5,
            a: 0.0,
            b: 0.0,
            dual_objective: 0.0,
            row_weights: vec![],
            col_weights: vec![],
            degenerate_row: false,
            degenerate_col: false,
        };
        let params = compute_lambda_mu(&g, &p, &duals).unwrap();
        let direct = compute_case5_params(&g, &p, &duals, &params);

        let gt = g.transposed();
        let pt = StrategyProfile::new(p.col.clone(), p.row.clone()).unwrap();
        let dt = swap_duals(&duals);
        let params_t = ConstructParams { lambda: params.mu, mu: params.lambda };
        let via_transpose = compute_case4_params(&gt, &pt, &dt, &params_t);

        match (direct, via_transpose) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.x_hat, b.y_hat);
                prop_assert_eq!(a.z_hat_index, b.w_hat_index);
                prop_assert!((a.t_c - b.t_r).abs() < 1e-12);
                prop_assert!((a.v_c - b.v_r).abs() < 1e-12);
                prop_assert!((a.lambda_hat - b.mu_hat).abs() < 1e-12);
                prop_assert_eq!(a.p.is_some(), b.p.is_some());
                if let (Some(x), Some(y)) = (a.p, b.p) { prop_assert!((x - y).abs() < 1e-12); }
                if let (Some(x), Some(y)) = (a.q, b.q) { prop_assert!((x - y).abs() < 1e-12); }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side failed: {:?} / {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn solver_output_is_certified(g in game(6)) {
        let cfg = SolverConfig::default();
        let sol = solve(&g, &cfg).unwrap();
        let (ok, rep) = certify(&g, sol.profile(), 1.0 / 3.0 + cfg.delta + 1e-6).unwrap();
        prop_assert!(ok, "{:?}", rep);
        let chosen = sol.trace.chosen().report.max_regret;
        prop_assert!(sol.trace.candidates.iter().all(|c| c.report.max_regret >= chosen));
    }

    #[test]
    fn support_enumeration_finds_certified_equilibria(g in game(4)) {
        let eqs = support_enumeration(&g, DEFAULT_MAX_N).unwrap();
        prop_assert!(!eqs.is_empty());
        for e in &eqs {
            prop_assert!(certify(&g, &e.profile, 1e-7).unwrap().0);
            prop_assert_eq!(&e.row_support, &e.profile.row.support(1e-9));
            prop_assert_eq!(&e.col_support, &e.profile.col.support(1e-9));
        }
    }

    #[test]
    fn planted_pure_equilibrium_is_found(g in game(4), i in 0usize..4, j in 0usize..4) {
        let n = g.n();
        let (i, j) = (i % n, j % n);
        let mut r = g.row_matrix().to_vec();
        let mut c = g.col_matrix().to_vec();
        r[i * n + j] = 1.0;
        c[i * n + j] = 1.0;
        let planted = BimatrixGame::new(n, r, c).unwrap();
        let target = StrategyProfile::new(MixedStrategy::pure(n, i), MixedStrategy::pure(n, j)).unwrap();
        let eqs = support_enumeration(&planted, DEFAULT_MAX_N).unwrap();
        prop_assert!(eqs.iter().any(|e| e.profile == target));
    }
}
