//! Best-response dynamics, the two ordinal potentials, and direct
//! equilibrium constructors for stars and graphs of maximum degree two.

use crate::error::{Error, Result};
use crate::game::{self, best_deviation_unchecked, current_utility};
use crate::model::{AgentId, Assignment, GameInstance, NodeId, UtilityModel};
use crate::rational::Rational;

/// Which improving move a dynamics step executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MovePolicy {
    /// Largest utility gain over all agents; ties by agent id, then node id.
    #[default]
    BestImprovement,
    /// Lowest-id agent that can improve, playing her best deviation.
    FirstImprovement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub agent: AgentId,
    pub from: NodeId,
    pub to: NodeId,
    pub old_utility: Rational,
    pub new_utility: Rational,
    pub potential_before: Option<Rational>,
    pub potential_after: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Converged(Assignment),
    StepLimit(Assignment),
}

impl Outcome {
    pub fn assignment(&self) -> &Assignment {
        match self {
            Outcome::Converged(a) | Outcome::StepLimit(a) => a,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Converged(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicsTrace {
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

/// Which ordinal potential, if any, is guaranteed for an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    /// Edge potential for fractional utilities on graphs of maximum degree 2.
    DegreeTwo,
    /// Sum of all agents' linear utilities.
    Linear,
}

pub fn potential_kind(instance: &GameInstance) -> Option<PotentialKind> {
    match instance.utility_model() {
        UtilityModel::Linear { .. } => Some(PotentialKind::Linear),
        UtilityModel::Fractional if instance.topology().max_degree() <= 2 => {
            Some(PotentialKind::DegreeTwo)
        }
        _ => None,
    }
}

pub fn potential(instance: &GameInstance, assignment: &Assignment, kind: PotentialKind) -> Rational {
    match kind {
        PotentialKind::DegreeTwo => potential_deg2(instance, assignment),
        PotentialKind::Linear => linear_potential_unchecked(instance, assignment),
    }
}

/// Edge sum: 1 for two adjacent friends, 0 for two adjacent enemies, 1/3
/// for an edge with an empty endpoint.
///
/// Computable on any graph; it only increases along improving moves when
/// the maximum degree is at most 2.
pub fn potential_deg2(instance: &GameInstance, assignment: &Assignment) -> Rational {
    let third = Rational::new(1, 3);
    instance
        .topology()
        .edges()
        .iter()
        .map(
            |&(u, v)| match (assignment.occupant(u), assignment.occupant(v)) {
                (Some(a), Some(b)) if instance.are_friends(a, b) => Rational::one(),
                (Some(_), Some(_)) => Rational::zero(),
                _ => third,
            },
        )
        .sum()
}

/// `sum over all agents (stubborn included) of alpha * f - beta * e`.
pub fn potential_linear(instance: &GameInstance, assignment: &Assignment) -> Result<Rational> {
    match instance.utility_model() {
        UtilityModel::Linear { .. } => Ok(linear_potential_unchecked(instance, assignment)),
        other => Err(Error::Unsupported(format!(
            "linear potential needs a linear model, got {other:?}"
        ))),
    }
}

fn linear_potential_unchecked(instance: &GameInstance, assignment: &Assignment) -> Rational {
    (0..instance.agent_count())
        .map(|agent| current_utility(instance, assignment, agent))
        .sum()
}

/// Step budget that guarantees convergence when a potential applies.
///
/// Degree two: the potential lives on `{l/3 : 0 <= l <= 3|V|}` and rises by
/// at least 1/3 per move. Linear: it lives on `{alpha*i - beta*j : 0 <= i,j <= n^2}`.
pub fn convergence_bound(instance: &GameInstance) -> Option<usize> {
    match potential_kind(instance)? {
        PotentialKind::DegreeTwo => Some(3 * instance.node_count() + 1),
        PotentialKind::Linear => {
            let grid = instance.agent_count().pow(2) + 1;
            Some(grid * grid)
        }
    }
}

/// One best-response move, or `None` iff the assignment is an equilibrium.
pub fn best_response_step(
    instance: &GameInstance,
    assignment: &Assignment,
    policy: MovePolicy,
) -> Option<(Assignment, Step)> {
    let mut chosen: Option<(AgentId, NodeId, Rational, Rational)> = None;
    for agent in instance.strategic_agents() {
        let Some(dev) = best_deviation_unchecked(instance, assignment, agent) else {
            continue;
        };
        let old = current_utility(instance, assignment, agent);
        match policy {
            MovePolicy::FirstImprovement => {
                chosen = Some((agent, dev.node, old, dev.utility));
                break;
            }
            MovePolicy::BestImprovement => {
                let gain = dev.utility - old;
                if chosen.is_none_or(|(_, _, o, n)| gain > n - o) {
                    chosen = Some((agent, dev.node, old, dev.utility));
                }
            }
        }
    }
    let (agent, to, old_utility, new_utility) = chosen?;
    let kind = potential_kind(instance);
    let next = assignment.with_move(agent, to);
    let step = Step {
        agent,
        from: assignment.node_of(agent),
        to,
        old_utility,
        new_utility,
        potential_before: kind.map(|k| potential(instance, assignment, k)),
        potential_after: kind.map(|k| potential(instance, &next, k)),
    };
    Some((next, step))
}

pub fn run_dynamics(
    instance: &GameInstance,
    start: &Assignment,
    policy: MovePolicy,
    max_steps: usize,
) -> DynamicsTrace {
    let mut current = start.clone();
    let mut steps = Vec::new();
    loop {
        if steps.len() == max_steps {
            let outcome = if game::is_equilibrium(instance, &current) {
                Outcome::Converged(current)
            } else {
                Outcome::StepLimit(current)
            };
            return DynamicsTrace { steps, outcome };
        }
        match best_response_step(instance, &current, policy) {
            Some((next, step)) => {
                steps.push(step);
                current = next;
            }
            None => {
                return DynamicsTrace {
                    steps,
                    outcome: Outcome::Converged(current),
                }
            }
        }
    }
}

/// An equilibrium for stars and graphs of maximum degree 2 (fractional
/// utilities), and for any topology under linear utilities.
pub fn construct_equilibrium_simple(instance: &GameInstance) -> Result<Assignment> {
    match instance.utility_model() {
        UtilityModel::Fractional => {
            if let Some(center) = instance.topology().star_center() {
                return star_equilibrium(instance, center);
            }
            if instance.topology().max_degree() <= 2 {
                return converge_from_canonical(instance);
            }
            Err(Error::Unsupported(
                "topology is neither a star nor of maximum degree 2".to_string(),
            ))
        }
        UtilityModel::Linear { .. } => converge_from_canonical(instance),
        UtilityModel::ModifiedFractional => Err(Error::Unsupported(
            "no existence guarantee for modified fractional utilities".to_string(),
        )),
    }
}

fn star_equilibrium(instance: &GameInstance, center: NodeId) -> Result<Assignment> {
    let strategic: Vec<AgentId> = instance.strategic_agents().collect();
    let mut leaves = instance
        .free_nodes()
        .into_iter()
        .filter(|&v| v != center);
    let center_taker = match instance.pinned_at(center) {
        Some(_) => None,
        None => strategic.first().copied(),
    };
    let mut node_of = vec![0; instance.agent_count()];
    for agent in 0..instance.agent_count() {
        node_of[agent] = if let Some(pin) = instance.pin(agent) {
            pin
        } else if Some(agent) == center_taker {
            center
        } else {
            leaves
                .next()
                .ok_or_else(|| Error::InvalidInstance("not enough free nodes".to_string()))?
        };
    }
    Assignment::new(instance, node_of)
}

fn converge_from_canonical(instance: &GameInstance) -> Result<Assignment> {
    let start = Assignment::canonical(instance)?;
    let bound = convergence_bound(instance).expect("potential applies");
    let trace = run_dynamics(instance, &start, MovePolicy::BestImprovement, bound);
    match trace.outcome {
        Outcome::Converged(a) => Ok(a),
        Outcome::StepLimit(_) => unreachable!("potential bound exceeded"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_equilibrium;
    use crate::model::{AgentKind, FriendshipSpec, Topology};

    fn path(nodes: usize) -> Topology {
        Topology::new(nodes, (1..nodes).map(|v| (v - 1, v)))
    }

    fn ring(nodes: usize) -> Topology {
        Topology::new(nodes, (0..nodes).map(|v| (v, (v + 1) % nodes)))
    }

    fn typed(topology: Topology, types: Vec<usize>) -> GameInstance {
        GameInstance::new(
            topology,
            vec![AgentKind::Strategic; types.len()],
            FriendshipSpec::typed(types),
            UtilityModel::Fractional,
        )
    }

    #[test]
    fn deg2_potential_examples() {
        // agents parked on isolated nodes: all three edges have an empty end
        let sparse = GameInstance::new(
            Topology::new(6, [(2, 3), (3, 4), (4, 5)]),
            vec![AgentKind::Strategic; 2],
            FriendshipSpec::typed(vec![0, 1]),
            UtilityModel::Fractional,
        );
        let asg = Assignment::new(&sparse, vec![0, 1]).unwrap();
        assert_eq!(potential_deg2(&sparse, &asg), Rational::one());

        let inst = typed(path(3), vec![0, 0]);
        let asg = Assignment::new(&inst, vec![0, 1]).unwrap();
        assert_eq!(potential_deg2(&inst, &asg), Rational::new(4, 3));

        let c4 = typed(ring(4), vec![0, 1]);
        let asg = Assignment::new(&c4, vec![0, 1]).unwrap();
        assert_eq!(potential_deg2(&c4, &asg), Rational::one());
    }

    #[test]
    fn linear_potential_examples() {
        let linear = UtilityModel::Linear {
            alpha: Rational::one(),
            beta: Rational::new(1, 2),
        };
        let inst = GameInstance::new(
            path(4),
            vec![AgentKind::Strategic; 2],
            FriendshipSpec::typed(vec![0, 0]),
            linear,
        );
        let adjacent = Assignment::new(&inst, vec![0, 1]).unwrap();
        assert_eq!(potential_linear(&inst, &adjacent).unwrap(), Rational::from_integer(2));
        let apart = Assignment::new(&inst, vec![0, 2]).unwrap();
        assert_eq!(potential_linear(&inst, &apart).unwrap(), Rational::zero());
        assert_eq!(
            potential_linear(&inst, &adjacent).unwrap(),
            game::social_welfare(&inst, &adjacent)
        );
        let frac = typed(path(4), vec![0, 0]);
        assert!(potential_linear(&frac, &Assignment::canonical(&frac).unwrap()).is_err());
    }

    #[test]
    fn step_on_equilibrium_is_none() {
        let inst = typed(ring(4), vec![0, 0, 0]);
        let asg = Assignment::new(&inst, vec![0, 1, 2]).unwrap();
        assert!(is_equilibrium(&inst, &asg));
        assert!(best_response_step(&inst, &asg, MovePolicy::BestImprovement).is_none());
        assert!(best_response_step(&inst, &asg, MovePolicy::FirstImprovement).is_none());
    }

    #[test]
    fn policies_pick_documented_moves() {
        // path 0..6; red 0 at node 0 beside blue 1 at node 1; red 2 at 4.
        let inst = typed(path(7), vec![0, 1, 0, 1]);
        let asg = Assignment::new(&inst, vec![0, 1, 4, 6]).unwrap();
        let (_, first) = best_response_step(&inst, &asg, MovePolicy::FirstImprovement).unwrap();
        assert_eq!(first.agent, 0);
        let (_, best) = best_response_step(&inst, &asg, MovePolicy::BestImprovement).unwrap();
        assert!(best.new_utility - best.old_utility >= first.new_utility - first.old_utility);
    }

    #[test]
    fn dynamics_on_path_converges_with_rising_potential() {
        let inst = typed(path(5), vec![0, 0, 1, 1]);
        let start = Assignment::new(&inst, vec![0, 2, 1, 3]).unwrap();
        for policy in [MovePolicy::BestImprovement, MovePolicy::FirstImprovement] {
            let trace = run_dynamics(&inst, &start, policy, convergence_bound(&inst).unwrap());
            assert!(trace.outcome.converged());
            assert!(is_equilibrium(&inst, trace.outcome.assignment()));
            for step in &trace.steps {
                let delta = step.potential_after.unwrap() - step.potential_before.unwrap();
                assert!(delta >= Rational::new(1, 3));
            }
        }
    }

    #[test]
    fn star_constructor_occupies_center() {
        let inst = GameInstance::new(
            Topology::new(5, (1..5).map(|l| (0, l))),
            vec![AgentKind::Strategic; 3],
            FriendshipSpec::typed(vec![0, 1, 2]),
            UtilityModel::Fractional,
        );
        let asg = construct_equilibrium_simple(&inst).unwrap();
        assert!(asg.occupant(0).is_some());
        assert!(is_equilibrium(&inst, &asg));
    }

    #[test]
    fn star_constructor_keeps_stubborn_center() {
        let inst = GameInstance::new(
            Topology::new(5, (1..5).map(|l| (0, l))),
            vec![
                AgentKind::Strategic,
                AgentKind::Stubborn(0),
                AgentKind::Strategic,
            ],
            FriendshipSpec::typed(vec![0, 1, 1]),
            UtilityModel::Fractional,
        );
        let asg = construct_equilibrium_simple(&inst).unwrap();
        assert_eq!(asg.occupant(0), Some(1));
        assert!(is_equilibrium(&inst, &asg));
    }

    #[test]
    fn constructor_rejects_general_graphs() {
        let k4 = Topology::new(5, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let inst = typed(k4, vec![0, 1]);
        assert!(construct_equilibrium_simple(&inst).is_err());
    }

    #[test]
    fn ring_of_three_friends_is_stable() {
        let inst = typed(ring(4), vec![0, 0, 0]);
        let asg = construct_equilibrium_simple(&inst).unwrap();
        assert!(is_equilibrium(&inst, &asg));
    }

    #[test]
    fn trace_is_deterministic() {
        let inst = typed(ring(7), vec![0, 1, 0, 1, 2, 2]);
        let start = Assignment::canonical(&inst).unwrap();
        let a = run_dynamics(&inst, &start, MovePolicy::BestImprovement, 100);
        let b = run_dynamics(&inst, &start, MovePolicy::BestImprovement, 100);
        assert_eq!(a, b);
    }
}
