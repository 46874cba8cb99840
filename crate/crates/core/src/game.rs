//! Utility evaluation, unilateral deviations and the equilibrium predicate.
//!
//! Every evaluation takes an explicit target node `at`: the agent is treated
//! as standing on `at` after vacating her current node, so current utilities
//! and hypothetical jumps share one code path.

use crate::error::{Error, Result};
use crate::model::{AgentId, Assignment, GameInstance, NodeId};
use crate::rational::Rational;

/// A strictly improving jump to an empty node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub node: NodeId,
    pub utility: Rational,
}

/// The friends of `agent`: same-type agents in typed mode, social-network
/// neighbours in social mode.
pub fn friends(instance: &GameInstance, agent: AgentId) -> Result<Vec<AgentId>> {
    check_agent(instance, agent)?;
    Ok((0..instance.agent_count())
        .filter(|&other| instance.are_friends(agent, other))
        .collect())
}

/// Friends and enemies adjacent to `at`, excluding `agent` herself.
pub fn neighbor_counts(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
    at: NodeId,
) -> Result<(usize, usize)> {
    check_target(instance, assignment, agent, at)?;
    Ok(counts_at(instance, assignment, agent, at))
}

pub fn utility(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
    at: NodeId,
) -> Result<Rational> {
    let (f, e) = neighbor_counts(instance, assignment, agent, at)?;
    Ok(instance.utility_model().evaluate(f, e))
}

/// Utility of `agent` where she currently stands.
pub fn current_utility(instance: &GameInstance, assignment: &Assignment, agent: AgentId) -> Rational {
    utility_at(instance, assignment, agent, assignment.node_of(agent))
}

/// Total utility of the strategic agents.
pub fn social_welfare(instance: &GameInstance, assignment: &Assignment) -> Rational {
    instance
        .strategic_agents()
        .map(|agent| current_utility(instance, assignment, agent))
        .sum()
}

/// The most profitable strictly improving jump of a strategic agent; ties go
/// to the smallest node id.
pub fn best_deviation(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
) -> Result<Option<Deviation>> {
    check_agent(instance, agent)?;
    if !instance.is_strategic(agent) {
        return Err(Error::StubbornAgent(agent));
    }
    Ok(best_deviation_unchecked(instance, assignment, agent))
}

pub fn is_equilibrium(instance: &GameInstance, assignment: &Assignment) -> bool {
    instance
        .strategic_agents()
        .all(|agent| !has_improving_move(instance, assignment, agent))
}

pub(crate) fn counts_at(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
    at: NodeId,
) -> (usize, usize) {
    let mut friends = 0;
    let mut enemies = 0;
    for &nb in instance.topology().neighbors(at) {
        match assignment.occupant(nb) {
            Some(other) if other != agent => {
                if instance.are_friends(agent, other) {
                    friends += 1;
                } else {
                    enemies += 1;
                }
            }
            _ => {}
        }
    }
    (friends, enemies)
}

pub(crate) fn utility_at(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
    at: NodeId,
) -> Rational {
    let (f, e) = counts_at(instance, assignment, agent, at);
    instance.utility_model().evaluate(f, e)
}

pub(crate) fn best_deviation_unchecked(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
) -> Option<Deviation> {
    let current = current_utility(instance, assignment, agent);
    let mut best: Option<Deviation> = None;
    for node in assignment.empty_nodes() {
        let value = utility_at(instance, assignment, agent, node);
        if value > current && best.is_none_or(|b| value > b.utility) {
            best = Some(Deviation {
                node,
                utility: value,
            });
        }
    }
    best
}

fn has_improving_move(instance: &GameInstance, assignment: &Assignment, agent: AgentId) -> bool {
    let current = current_utility(instance, assignment, agent);
    assignment
        .empty_nodes()
        .any(|node| utility_at(instance, assignment, agent, node) > current)
}

fn check_agent(instance: &GameInstance, agent: AgentId) -> Result<()> {
    if agent >= instance.agent_count() {
        return Err(Error::UnknownAgent(agent));
    }
    Ok(())
}

fn check_target(
    instance: &GameInstance,
    assignment: &Assignment,
    agent: AgentId,
    at: NodeId,
) -> Result<()> {
    check_agent(instance, agent)?;
    if at >= instance.node_count() {
        return Err(Error::UnknownNode(at));
    }
    match assignment.occupant(at) {
        Some(occupant) if occupant != agent => Err(Error::NodeOccupied { node: at, occupant }),
        _ => Ok(()),
    }
}
