//! Invariants of the relaxation loop and of the solvers built on it, on
//! random graphs too large for the oracles.

use nilmas_core::greedy::{min_rho_from, StepKind};
use nilmas_core::harness::GenSpec;
use nilmas_core::solver::{
    approx_mas, baseline_random_permutation, solve_weighted, SolveConfig,
};
use nilmas_core::spectral::rho_of_boolean;
use nilmas_core::{
    min_rho_over_ball, solve_max_mas, BoolMatrix, BudgetSpec, GreedyConfig, WeightKey,
    WeightedMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;

fn traced() -> GreedyConfig {
    GreedyConfig {
        debug_asserts: true,
        record_trace: true,
        ..GreedyConfig::default()
    }
}

fn uniform_graph() -> impl Strategy<Value = BoolMatrix> {
    (2usize..30, 0.05f64..0.6, any::<u64>())
        .prop_map(|(n, p, seed)| GenSpec::uniform(n, p, seed).generate().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn trace_invariants(a in uniform_graph(), r in 0usize..4) {
        let spec = BudgetSpec::uniform(a.n(), r);
        let cfg = traced();
        let res = min_rho_over_ball(&a, &spec, &cfg).unwrap();
        prop_assert!(spec.contains(&a, &res.x_hat));
        let actual = rho_of_boolean(&res.x_hat, &cfg.eigen).unwrap();
        prop_assert!((actual - res.rho).abs() <= 1e-7 * res.rho.max(1.0));
        prop_assert!(res.rho <= rho_of_boolean(&a, &cfg.eigen).unwrap() + 1e-9);
        prop_assert_eq!(res.eig_count, res.trace.len());

        for pair in res.trace.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            prop_assert!(spec.contains(&a, &next.x));
            prop_assert!(next.rho <= prev.rho + 1e-8 * prev.rho.max(1.0));
            if next.kind == StepKind::Inner {
                // same outer iteration: rho fixed, support only shrinks
                prop_assert_eq!(next.outer, prev.outer);
                prop_assert!((next.rho - prev.rho).abs() <= 1e-8 * prev.rho.max(1.0));
                prop_assert!(next.support.is_subset(&prev.support));
            }
        }
        // no state repeats within an outer iteration
        for (k, step) in res.trace.iter().enumerate() {
            for later in &res.trace[k + 1..] {
                if later.outer == step.outer {
                    prop_assert!(later.x != step.x || later.support != step.support);
                }
            }
        }
    }

    #[test]
    fn more_budget_never_hurts(a in uniform_graph(), r in 0usize..4) {
        let cfg = GreedyConfig::default();
        let tight = min_rho_over_ball(&a, &BudgetSpec::uniform(a.n(), r), &cfg).unwrap();
        let loose = min_rho_over_ball(&a, &BudgetSpec::uniform(a.n(), r + 1), &cfg).unwrap();
        prop_assert!(loose.rho <= tight.rho + 1e-8 * tight.rho.max(1.0));
    }

    #[test]
    fn warm_start_reaches_the_same_rho(a in uniform_graph(), r in 1usize..4) {
        let cfg = GreedyConfig::default();
        let spec = BudgetSpec::uniform(a.n(), r);
        let cold = min_rho_over_ball(&a, &spec, &cfg).unwrap();
        let warm = min_rho_from(&a, &spec, cold.x_hat.clone(), &cfg).unwrap();
        prop_assert!((warm.rho - cold.rho).abs() <= 1e-8 * cold.rho.max(1.0));
    }

    #[test]
    fn deterministic(a in uniform_graph()) {
        let cfg = SolveConfig::default();
        prop_assert_eq!(solve_max_mas(&a, &cfg).unwrap(), solve_max_mas(&a, &cfg).unwrap());
    }

    #[test]
    fn max_mas_solution_shape(a in uniform_graph()) {
        let sol = solve_max_mas(&a, &SolveConfig::default()).unwrap();
        prop_assert!(sol.witness.is_acyclic());
        prop_assert!(sol.witness.is_subgraph_of(&a));
        prop_assert!(sol.per_vertex_cuts.iter().all(|&c| c <= sol.r_star));
        let r0 = a.max_in_degree();
        let bound = (usize::BITS - r0.leading_zeros()) as usize + 1;
        prop_assert!(sol.probes.len() <= bound, "{} probes for r0 {}", sol.probes.len(), r0);
        if sol.r_star > 0 {
            // one below r* is infeasible
            let below = min_rho_over_ball(&a, &BudgetSpec::uniform(a.n(), sol.r_star - 1), &GreedyConfig::default()).unwrap();
            prop_assert!(below.rho > 0.0);
        }

        let approx = approx_mas(&a, &sol.witness).unwrap();
        prop_assert!(approx.g_bar.is_acyclic());
        prop_assert!(approx.g_bar.is_subgraph_of(&a));
        prop_assert!(sol.witness.is_subgraph_of(&approx.g_bar));
        prop_assert!((0.0..=1.0).contains(&approx.gamma));
        let mut position = vec![0; a.n()];
        for (p, &v) in approx.ordering.iter().enumerate() {
            position[v] = p;
        }
        prop_assert!(approx.g_bar.edges().all(|(u, v)| position[u] < position[v]));
    }

    #[test]
    fn baseline_keeps_half_of_non_loop_edges(a in uniform_graph(), seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base = baseline_random_permutation(&a, &mut rng);
        prop_assert!(base.g_bar.is_acyclic());
        prop_assert!(2 * base.g_bar.edge_count() >= a.edge_count() - a.self_loop_count());
    }

    #[test]
    fn weighted_witness_is_feasible(
        a in uniform_graph(),
        weights in prop::collection::vec(0.1f64..5.0, 900),
        ratio in any::<bool>(),
    ) {
        let w = WeightedMatrix::from_edges(
            a.n(),
            a.edges().enumerate().map(|(k, (u, v))| (u, v, weights[k % weights.len()])),
        ).unwrap();
        let cfg = SolveConfig {
            weight_key: if ratio { WeightKey::Ratio } else { WeightKey::Product },
            ..SolveConfig::default()
        };
        let sol = solve_weighted(&w, &cfg).unwrap();
        prop_assert!(sol.witness.is_acyclic());
        prop_assert!(sol.witness.is_subgraph_of(&a));
        let spec = BudgetSpec::weighted(w.clone(), vec![sol.budget; a.n()], cfg.weight_key);
        prop_assert!(spec.contains(&a, &sol.witness));
    }

    /// Unit weights with the product key behave like count budgets.
    #[test]
    fn unit_weights_match_counts(a in uniform_graph(), r in 0usize..4) {
        let cfg = GreedyConfig::default();
        let counts = min_rho_over_ball(&a, &BudgetSpec::uniform(a.n(), r), &cfg).unwrap();
        let spec = BudgetSpec::weighted(WeightedMatrix::unit(&a), vec![r as f64; a.n()], WeightKey::Product);
        let weighted = min_rho_over_ball(&a, &spec, &cfg).unwrap();
        prop_assert!((counts.rho - weighted.rho).abs() <= 1e-8 * counts.rho.max(1.0));
    }
}
