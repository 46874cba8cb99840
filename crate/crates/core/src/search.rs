//! Exhaustive enumeration: all equilibria, optimal welfare, and exact price
//! of anarchy / stability on desk-scale instances.
//!
//! In typed mode strategic agents of one type are interchangeable, so the
//! enumeration runs over type-colourings of the free nodes; each colouring
//! is materialised as the labelled assignment that gives the lowest-id
//! agent of a type the lowest-id node of that colour. Social mode enumerates
//! every injective placement.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::game::{is_equilibrium, social_welfare};
use crate::model::{Assignment, GameInstance, NodeId};
use crate::rational::Rational;

pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest number of assignments an enumeration may visit.
    pub budget: u128,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioResult {
    Value(Rational),
    /// The optimum is positive but the relevant equilibrium has welfare <= 0.
    Unbounded,
    NoEquilibrium,
    /// Non-positive optimum with a strictly worse relevant equilibrium.
    UndefinedZeroOptimum,
}

impl fmt::Display for RatioResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioResult::Value(v) => write!(f, "{v}"),
            RatioResult::Unbounded => write!(f, "unbounded"),
            RatioResult::NoEquilibrium => write!(f, "no-equilibrium"),
            RatioResult::UndefinedZeroOptimum => write!(f, "undefined-zero-optimum"),
        }
    }
}

/// Number of assignments [`enumerate_assignments`] visits.
pub fn assignment_count(instance: &GameInstance) -> u128 {
    let free = instance.free_nodes().len() as u128;
    match instance.type_count() {
        Some(k) => {
            let sizes = strategic_type_sizes(instance, k);
            let placed: u128 = sizes.iter().map(|&s| s as u128).sum();
            if placed > free {
                return 0;
            }
            // multinomial free! / (empty! * prod size!)
            let mut total: u128 = 1;
            let mut remaining = free;
            for &size in &sizes {
                total = total.saturating_mul(binomial(remaining, size as u128));
                remaining -= size as u128;
            }
            total
        }
        None => {
            let r = instance.strategic_count() as u128;
            if r > free {
                return 0;
            }
            (0..r).fold(1u128, |acc, i| acc.saturating_mul(free - i))
        }
    }
}

/// Every valid assignment, modulo within-type relabelling in typed mode.
pub fn enumerate_assignments<'a>(
    instance: &'a GameInstance,
    config: &SearchConfig,
) -> Result<Box<dyn Iterator<Item = Assignment> + 'a>> {
    let needed = assignment_count(instance);
    if needed > config.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: config.budget,
        });
    }
    let free = instance.free_nodes();
    let strategic: Vec<usize> = instance.strategic_agents().collect();
    let base: Vec<NodeId> = (0..instance.agent_count())
        .map(|a| instance.pin(a).unwrap_or(usize::MAX))
        .collect();

    match instance.type_count() {
        Some(k) => {
            let sizes = strategic_type_sizes(instance, k);
            // colour 0 = empty, colour t + 1 = type t
            let mut colours: Vec<usize> = Vec::with_capacity(free.len());
            let placed: usize = sizes.iter().sum();
            colours.extend(std::iter::repeat_n(0, free.len().saturating_sub(placed)));
            for (t, &size) in sizes.iter().enumerate() {
                colours.extend(std::iter::repeat_n(t + 1, size));
            }
            let by_type: Vec<Vec<usize>> = (0..k)
                .map(|t| {
                    strategic
                        .iter()
                        .copied()
                        .filter(|&a| instance.type_of(a) == Some(t))
                        .collect()
                })
                .collect();
            let colourings = MultisetPermutations::new(colours);
            Ok(Box::new(colourings.map(move |colouring| {
                let mut node_of = base.clone();
                let mut next = vec![0usize; k];
                for (slot, &colour) in colouring.iter().enumerate() {
                    if colour > 0 {
                        let t = colour - 1;
                        node_of[by_type[t][next[t]]] = free[slot];
                        next[t] += 1;
                    }
                }
                Assignment::new(instance, node_of).expect("enumerated assignment is valid")
            })))
        }
        None => {
            let r = strategic.len();
            let perms = free.clone().into_iter().permutations(r);
            Ok(Box::new(perms.map(move |placement| {
                let mut node_of = base.clone();
                for (agent, node) in strategic.iter().zip(placement) {
                    node_of[*agent] = node;
                }
                Assignment::new(instance, node_of).expect("enumerated assignment is valid")
            })))
        }
    }
}

/// All equilibria with their welfare, in enumeration order.
pub fn find_all_equilibria(
    instance: &GameInstance,
    config: &SearchConfig,
) -> Result<Vec<(Assignment, Rational)>> {
    Ok(enumerate_assignments(instance, config)?
        .filter(|a| is_equilibrium(instance, a))
        .map(|a| {
            let sw = social_welfare(instance, &a);
            (a, sw)
        })
        .collect())
}

pub fn equilibrium_exists(instance: &GameInstance, config: &SearchConfig) -> Result<Option<Assignment>> {
    Ok(enumerate_assignments(instance, config)?.find(|a| is_equilibrium(instance, a)))
}

/// A welfare-maximising assignment (first in enumeration order) and its value.
pub fn optimal_welfare(instance: &GameInstance, config: &SearchConfig) -> Result<(Assignment, Rational)> {
    let mut best: Option<(Assignment, Rational)> = None;
    for assignment in enumerate_assignments(instance, config)? {
        let sw = social_welfare(instance, &assignment);
        if best.as_ref().is_none_or(|(_, b)| sw > *b) {
            best = Some((assignment, sw));
        }
    }
    best.ok_or_else(|| Error::InvalidInstance("instance has no assignment".to_string()))
}

/// Everything needed for both ratios in one pass.
#[derive(Clone, Debug)]
pub struct WelfareSummary {
    pub optimum: (Assignment, Rational),
    pub worst_equilibrium: Option<(Assignment, Rational)>,
    pub best_equilibrium: Option<(Assignment, Rational)>,
    pub equilibrium_count: usize,
}

impl WelfareSummary {
    pub fn price_of_anarchy(&self) -> RatioResult {
        ratio(self.optimum.1, self.worst_equilibrium.as_ref().map(|e| e.1))
    }

    pub fn price_of_stability(&self) -> RatioResult {
        ratio(self.optimum.1, self.best_equilibrium.as_ref().map(|e| e.1))
    }
}

pub fn welfare_summary(instance: &GameInstance, config: &SearchConfig) -> Result<WelfareSummary> {
    let mut optimum: Option<(Assignment, Rational)> = None;
    let mut worst: Option<(Assignment, Rational)> = None;
    let mut best: Option<(Assignment, Rational)> = None;
    let mut count = 0;
    for assignment in enumerate_assignments(instance, config)? {
        let sw = social_welfare(instance, &assignment);
        if optimum.as_ref().is_none_or(|(_, b)| sw > *b) {
            optimum = Some((assignment.clone(), sw));
        }
        if is_equilibrium(instance, &assignment) {
            count += 1;
            if worst.as_ref().is_none_or(|(_, w)| sw < *w) {
                worst = Some((assignment.clone(), sw));
            }
            if best.as_ref().is_none_or(|(_, b)| sw > *b) {
                best = Some((assignment, sw));
            }
        }
    }
    Ok(WelfareSummary {
        optimum: optimum
            .ok_or_else(|| Error::InvalidInstance("instance has no assignment".to_string()))?,
        worst_equilibrium: worst,
        best_equilibrium: best,
        equilibrium_count: count,
    })
}

pub fn price_of_anarchy(instance: &GameInstance, config: &SearchConfig) -> Result<RatioResult> {
    Ok(welfare_summary(instance, config)?.price_of_anarchy())
}

pub fn price_of_stability(instance: &GameInstance, config: &SearchConfig) -> Result<RatioResult> {
    Ok(welfare_summary(instance, config)?.price_of_stability())
}

/// `optimum / equilibrium` with the zero-welfare conventions.
pub fn ratio(optimum: Rational, equilibrium: Option<Rational>) -> RatioResult {
    let Some(eq) = equilibrium else {
        return RatioResult::NoEquilibrium;
    };
    if eq == optimum {
        RatioResult::Value(Rational::one())
    } else if !optimum.is_positive() {
        RatioResult::UndefinedZeroOptimum
    } else if !eq.is_positive() {
        RatioResult::Unbounded
    } else {
        RatioResult::Value(optimum / eq)
    }
}

fn strategic_type_sizes(instance: &GameInstance, k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for agent in instance.strategic_agents() {
        if let Some(t) = instance.type_of(agent) {
            sizes[t] += 1;
        }
    }
    sizes
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Distinct permutations of a multiset in lexicographic order.
struct MultisetPermutations {
    current: Option<Vec<usize>>,
}

impl MultisetPermutations {
    fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        MultisetPermutations {
            current: Some(items),
        }
    }
}

impl Iterator for MultisetPermutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let mut next = current.clone();
        if next_permutation(&mut next) {
            self.current = Some(next);
        }
        Some(current)
    }
}

fn next_permutation(items: &mut [usize]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let Some(i) = (0..items.len() - 1).rev().find(|&i| items[i] < items[i + 1]) else {
        return false;
    };
    let j = (i + 1..items.len()).rev().find(|&j| items[j] > items[i]).unwrap();
    items.swap(i, j);
    items[i + 1..].reverse();
    true
}
