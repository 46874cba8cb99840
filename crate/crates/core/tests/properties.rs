use proptest::prelude::*;

use schelling_core::dynamics::{
    convergence_bound, potential, potential_kind, run_dynamics, MovePolicy, PotentialKind,
};
use schelling_core::game::{is_equilibrium, social_welfare, utility};
use schelling_core::instances::{
    gen_random, random_assignment, RandomFriendship, RandomSpec, RandomTopology,
};
use schelling_core::search::{find_all_equilibria, welfare_summary, RatioResult, SearchConfig};
use schelling_core::treedp::{tree_max_welfare_equilibrium, tree_optimal_assignment};
use schelling_core::{GameInstance, Rational, UtilityModel};

fn topology(pick: u8) -> RandomTopology {
    match pick % 5 {
        0 => RandomTopology::Tree,
        1 => RandomTopology::Path,
        2 => RandomTopology::Ring,
        3 => RandomTopology::Star,
        _ => RandomTopology::Gnp { edge_prob: Rational::new(1, 2) },
    }
}

/// Small typed instance with every type populated.
fn small_instance(seed: u64, nodes: usize, sizes: Vec<usize>, stubborn: usize, pick: u8) -> Option<GameInstance> {
    let mut spec = RandomSpec::new(nodes, topology(pick), sizes, seed);
    let agents: usize = spec.strategic_per_type.iter().sum();
    if agents + stubborn >= nodes {
        return None;
    }
    spec.stubborn_per_type[0] = stubborn;
    gen_random(&spec).ok()
}

fn instances() -> impl Strategy<Value = GameInstance> {
    (any::<u64>(), 4usize..8, prop::collection::vec(1usize..3, 2..4), 0usize..2, any::<u8>())
        .prop_filter_map("needs a free node", |(seed, nodes, sizes, stubborn, pick)| {
            small_instance(seed, nodes, sizes, stubborn, pick)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn typed_and_clique_social_games_agree(inst in instances(), start in any::<u64>()) {
        let social = inst.with_friendship(inst.friendship().to_social());
        let asg = random_assignment(&inst, start).unwrap();
        for agent in 0..inst.agent_count() {
            for at in std::iter::once(asg.node_of(agent)).chain(asg.empty_nodes()) {
                prop_assert_eq!(utility(&inst, &asg, agent, at).unwrap(), utility(&social, &asg, agent, at).unwrap());
            }
        }
        prop_assert_eq!(is_equilibrium(&inst, &asg), is_equilibrium(&social, &asg));
    }

    #[test]
    fn colouring_quotient_loses_nothing(inst in instances()) {
        let social = inst.with_friendship(inst.friendship().to_social());
        let cfg = SearchConfig::default();
        let typed = welfare_summary(&inst, &cfg).unwrap();
        let labelled = welfare_summary(&social, &cfg).unwrap();
        prop_assert_eq!(typed.optimum.1, labelled.optimum.1);
        prop_assert_eq!(typed.best_equilibrium.map(|e| e.1), labelled.best_equilibrium.map(|e| e.1));
        prop_assert_eq!(typed.worst_equilibrium.map(|e| e.1), labelled.worst_equilibrium.map(|e| e.1));
        prop_assert_eq!(typed.equilibrium_count > 0, labelled.equilibrium_count > 0);
    }

    #[test]
    fn search_orders_welfare(inst in instances()) {
        let summary = welfare_summary(&inst, &SearchConfig::default()).unwrap();
        let eqs = find_all_equilibria(&inst, &SearchConfig::default()).unwrap();
        prop_assert_eq!(eqs.len(), summary.equilibrium_count);
        for (a, w) in &eqs {
            prop_assert!(is_equilibrium(&inst, a));
            prop_assert_eq!(social_welfare(&inst, a), *w);
        }
        if let (Some(worst), Some(best)) = (&summary.worst_equilibrium, &summary.best_equilibrium) {
            prop_assert!(worst.1 <= best.1 && best.1 <= summary.optimum.1);
            match (summary.price_of_anarchy(), summary.price_of_stability()) {
                (RatioResult::Value(poa), RatioResult::Value(pos)) => prop_assert!(Rational::one() <= pos && pos <= poa),
                (RatioResult::Unbounded, _) => prop_assert!(worst.1.is_zero()),
                (poa, pos) => prop_assert!(false, "unexpected ratios {poa} {pos}"),
            }
        } else {
            prop_assert_eq!(summary.price_of_anarchy(), RatioResult::NoEquilibrium);
        }
    }

    #[test]
    fn dynamics_stop_exactly_at_equilibria(inst in instances(), start in any::<u64>(), first in any::<bool>()) {
        let policy = if first { MovePolicy::FirstImprovement } else { MovePolicy::BestImprovement };
        let asg = random_assignment(&inst, start).unwrap();
        let trace = run_dynamics(&inst, &asg, policy, 200);
        prop_assert_eq!(trace.outcome.converged(), is_equilibrium(&inst, trace.outcome.assignment()));
        let mut current = asg;
        for step in &trace.steps {
            prop_assert_eq!(current.node_of(step.agent), step.from);
            prop_assert!(step.new_utility > step.old_utility);
            current = current.with_move(step.agent, step.to);
        }
        prop_assert_eq!(&current, trace.outcome.assignment());
        prop_assert_eq!(trace, run_dynamics(&inst, &random_assignment(&inst, start).unwrap(), policy, 200));
    }

    #[test]
    fn degree_two_potential_climbs_by_a_third(seed in any::<u64>(), nodes in 3usize..9, ring in any::<bool>(), start in any::<u64>()) {
        let sizes = vec![(nodes - 1) / 2, (nodes - 1) - (nodes - 1) / 2];
        prop_assume!(sizes.iter().all(|&s| s > 0));
        let shape = if ring { RandomTopology::Ring } else { RandomTopology::Path };
        let inst = gen_random(&RandomSpec::new(nodes, shape, sizes, seed)).unwrap();
        prop_assert_eq!(potential_kind(&inst), Some(PotentialKind::DegreeTwo));
        let bound = convergence_bound(&inst).unwrap();
        let trace = run_dynamics(&inst, &random_assignment(&inst, start).unwrap(), MovePolicy::BestImprovement, bound);
        prop_assert!(trace.outcome.converged());
        for step in &trace.steps {
            let delta = step.potential_after.unwrap() - step.potential_before.unwrap();
            prop_assert!(delta >= Rational::new(1, 3));
        }
    }

    #[test]
    fn linear_potential_moves_twice_the_gain(seed in any::<u64>(), nodes in 5usize..8, a in 0i64..4, b in 0i64..4, social in any::<bool>(), start in any::<u64>()) {
        let mut spec = RandomSpec::new(nodes, RandomTopology::Gnp { edge_prob: Rational::new(1, 2) }, vec![2, 1], seed);
        spec.stubborn_per_type = vec![0, 1];
        spec.model = UtilityModel::Linear { alpha: Rational::new(a, 2), beta: Rational::new(b, 3) };
        if social {
            spec.friendship = RandomFriendship::Social { edge_prob: Rational::new(1, 2) };
        }
        let inst = gen_random(&spec).unwrap();
        let asg = random_assignment(&inst, start).unwrap();
        let trace = run_dynamics(&inst, &asg, MovePolicy::BestImprovement, convergence_bound(&inst).unwrap());
        prop_assert!(trace.outcome.converged());
        for step in &trace.steps {
            let gain = step.new_utility - step.old_utility;
            let delta = step.potential_after.unwrap() - step.potential_before.unwrap();
            prop_assert_eq!(delta, Rational::from_integer(2) * gain);
        }
        let end = trace.outcome.assignment();
        prop_assert_eq!(potential(&inst, end, PotentialKind::Linear), potential(&inst, &asg, PotentialKind::Linear) + trace.steps.iter().map(|s| Rational::from_integer(2) * (s.new_utility - s.old_utility)).sum::<Rational>());
    }

    #[test]
    fn tree_program_never_beats_the_optimum(seed in any::<u64>(), nodes in 4usize..9, red in 1usize..3, blue in 1usize..3) {
        prop_assume!(red + blue < nodes);
        let inst = gen_random(&RandomSpec::new(nodes, RandomTopology::Tree, vec![red, blue], seed)).unwrap();
        let (opt_asg, opt) = tree_optimal_assignment(&inst).unwrap();
        prop_assert_eq!(social_welfare(&inst, &opt_asg), opt);
        if let Some((eq, w)) = tree_max_welfare_equilibrium(&inst).unwrap() {
            prop_assert!(is_equilibrium(&inst, &eq));
            prop_assert!(w <= opt);
        }
    }
}
