//! Domain types: topologies, agent rosters, friendship, utility models,
//! game instances and assignments.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type AgentId = usize;
pub type NodeId = usize;
pub type TypeId = usize;

/// Undirected location graph. Node ids are `0..node_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    node_count: usize,
    // normalised (min, max), sorted, deduplicated; may contain self-loops or
    // out-of-range ids, which `validate` reports
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Topology {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let edges: BTreeSet<(NodeId, NodeId)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        let edges: Vec<_> = edges.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            if u != v && v < node_count {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Topology {
            node_count,
            edges,
            adjacency,
        }
    }

    pub fn empty(node_count: usize) -> Self {
        Topology::new(node_count, [])
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        self.node_count >= 1 && self.edges.len() + 1 == self.node_count && self.is_connected()
    }

    /// The center of a star: one node adjacent to every other node, all
    /// other nodes of degree 1. Requires at least two nodes.
    pub fn star_center(&self) -> Option<NodeId> {
        if self.node_count < 2 {
            return None;
        }
        let center = (0..self.node_count).find(|&v| self.degree(v) == self.node_count - 1)?;
        let leaves_ok = (0..self.node_count)
            .filter(|&v| v != center)
            .all(|v| self.degree(v) == 1);
        leaves_ok.then_some(center)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FriendshipSpec {
    /// Agents are friends iff they share a type.
    Typed {
        type_count: usize,
        type_of: Vec<TypeId>,
    },
    /// Agents are friends iff they are adjacent in a social network.
    Social { edges: Vec<(AgentId, AgentId)> },
}

impl FriendshipSpec {
    pub fn typed(type_of: Vec<TypeId>) -> Self {
        let type_count = type_of.iter().map(|&t| t + 1).max().unwrap_or(0);
        FriendshipSpec::Typed {
            type_count,
            type_of,
        }
    }

    pub fn social(edges: impl IntoIterator<Item = (AgentId, AgentId)>) -> Self {
        let edges: BTreeSet<_> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        FriendshipSpec::Social {
            edges: edges.into_iter().collect(),
        }
    }

    /// The union-of-cliques social network equivalent to a typed spec.
    pub fn to_social(&self) -> FriendshipSpec {
        match self {
            FriendshipSpec::Social { .. } => self.clone(),
            FriendshipSpec::Typed { type_of, .. } => {
                let n = type_of.len();
                let edges = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| type_of[i] == type_of[j]);
                FriendshipSpec::social(edges)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UtilityModel {
    /// `f / (f + e)`, and 0 when `f = 0`.
    Fractional,
    /// `(f + 1) / (f + e + 1)`: the agent counts herself as a friend.
    ModifiedFractional,
    /// `alpha * f - beta * e`.
    Linear { alpha: Rational, beta: Rational },
}

impl UtilityModel {
    pub fn evaluate(&self, friends: usize, enemies: usize) -> Rational {
        match *self {
            UtilityModel::Fractional => Rational::frac(friends, friends + enemies),
            UtilityModel::ModifiedFractional => {
                Rational::new(friends as i64 + 1, (friends + enemies) as i64 + 1)
            }
            UtilityModel::Linear { alpha, beta } => {
                alpha * Rational::from_integer(friends as i64)
                    - beta * Rational::from_integer(enemies as i64)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Strategic,
    /// Pinned to its preferred node forever.
    Stubborn(NodeId),
}

/// A constraint of the game definition that an instance violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    TooFewNodes { nodes: usize, agents: usize },
    NonInjectiveLambda { node: NodeId },
    SelfLoop { node: NodeId },
    EdgeOutOfRange { u: NodeId, v: NodeId },
    PinOutOfRange { agent: AgentId, node: NodeId },
    TooFewTypes { types: usize },
    EmptyType { ty: TypeId },
    TypeOutOfRange { agent: AgentId, ty: TypeId },
    RosterMismatch { agents: usize, friendship: usize },
    SocialSelfLoop { agent: AgentId },
    SocialOutOfRange { a: AgentId, b: AgentId },
    NegativeWeight,
}

impl ValidationIssue {
    /// Stable kebab-case code used in CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationIssue::TooFewNodes { .. } => "too-few-nodes",
            ValidationIssue::NonInjectiveLambda { .. } => "non-injective-lambda",
            ValidationIssue::SelfLoop { .. } => "self-loop",
            ValidationIssue::EdgeOutOfRange { .. } => "edge-out-of-range",
            ValidationIssue::PinOutOfRange { .. } => "pin-out-of-range",
            ValidationIssue::TooFewTypes { .. } => "too-few-types",
            ValidationIssue::EmptyType { .. } => "empty-type",
            ValidationIssue::TypeOutOfRange { .. } => "type-out-of-range",
            ValidationIssue::RosterMismatch { .. } => "roster-mismatch",
            ValidationIssue::SocialSelfLoop { .. } => "social-self-loop",
            ValidationIssue::SocialOutOfRange { .. } => "social-out-of-range",
            ValidationIssue::NegativeWeight => "negative-weight",
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.code())?;
        match self {
            ValidationIssue::TooFewNodes { nodes, agents } => {
                write!(f, "{nodes} nodes must exceed {agents} agents")
            }
            ValidationIssue::NonInjectiveLambda { node } => {
                write!(f, "several stubborn agents pinned to node {node}")
            }
            ValidationIssue::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            ValidationIssue::EdgeOutOfRange { u, v } => write!(f, "edge {{{u},{v}}} out of range"),
            ValidationIssue::PinOutOfRange { agent, node } => {
                write!(f, "agent {agent} pinned to missing node {node}")
            }
            ValidationIssue::TooFewTypes { types } => write!(f, "{types} types, need at least 2"),
            ValidationIssue::EmptyType { ty } => write!(f, "type {ty} has no agents"),
            ValidationIssue::TypeOutOfRange { agent, ty } => {
                write!(f, "agent {agent} has undeclared type {ty}")
            }
            ValidationIssue::RosterMismatch { agents, friendship } => {
                write!(f, "{agents} agents but friendship covers {friendship}")
            }
            ValidationIssue::SocialSelfLoop { agent } => {
                write!(f, "agent {agent} is listed as her own friend")
            }
            ValidationIssue::SocialOutOfRange { a, b } => {
                write!(f, "social edge {{{a},{b}}} out of range")
            }
            ValidationIssue::NegativeWeight => write!(f, "linear weights must be non-negative"),
        }
    }
}

/// A Schelling game: topology, strategic and stubborn agents, friendship
/// relation and utility model.
///
/// Construction never fails; call [`GameInstance::validate`] (or use
/// [`GameInstance::checked`]) before relying on the game invariants.
#[derive(Clone, Debug)]
pub struct GameInstance {
    topology: Topology,
    kinds: Vec<AgentKind>,
    friendship: FriendshipSpec,
    utility: UtilityModel,
    // n * n friend matrix
    friend: Vec<bool>,
    // node -> stubborn agent pinned there
    pinned: Vec<Option<AgentId>>,
}

impl PartialEq for GameInstance {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology
            && self.kinds == other.kinds
            && self.friendship == other.friendship
            && self.utility == other.utility
    }
}

impl GameInstance {
    pub fn new(
        topology: Topology,
        kinds: Vec<AgentKind>,
        friendship: FriendshipSpec,
        utility: UtilityModel,
    ) -> Self {
        let n = kinds.len();
        let mut friend = vec![false; n * n];
        match &friendship {
            FriendshipSpec::Typed { type_of, .. } => {
                for i in 0..n.min(type_of.len()) {
                    for j in 0..n.min(type_of.len()) {
                        friend[i * n + j] = i != j && type_of[i] == type_of[j];
                    }
                }
            }
            FriendshipSpec::Social { edges } => {
                for &(a, b) in edges {
                    if a != b && a < n && b < n {
                        friend[a * n + b] = true;
                        friend[b * n + a] = true;
                    }
                }
            }
        }
        let mut pinned = vec![None; topology.node_count()];
        for (agent, kind) in kinds.iter().enumerate() {
            if let AgentKind::Stubborn(node) = *kind {
                if node < pinned.len() && pinned[node].is_none() {
                    pinned[node] = Some(agent);
                }
            }
        }
        GameInstance {
            topology,
            kinds,
            friendship,
            utility,
            friend,
            pinned,
        }
    }

    /// Builds and validates in one step.
    pub fn checked(
        topology: Topology,
        kinds: Vec<AgentKind>,
        friendship: FriendshipSpec,
        utility: UtilityModel,
    ) -> Result<Self> {
        let instance = GameInstance::new(topology, kinds, friendship, utility);
        instance.validate().map_err(|issues| {
            let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
            Error::InvalidInstance(text.join("; "))
        })?;
        Ok(instance)
    }

    /// Every violated game invariant, or `Ok(())`.
    pub fn validate(&self) -> std::result::Result<(), Vec<ValidationIssue>> {
        let mut issues = Vec::new();
        let nodes = self.topology.node_count();
        let n = self.kinds.len();

        if nodes <= n {
            issues.push(ValidationIssue::TooFewNodes { nodes, agents: n });
        }
        for &(u, v) in self.topology.edges() {
            if u >= nodes || v >= nodes {
                issues.push(ValidationIssue::EdgeOutOfRange { u, v });
            } else if u == v {
                issues.push(ValidationIssue::SelfLoop { node: u });
            }
        }
        let mut pin_count = vec![0usize; nodes];
        for (agent, kind) in self.kinds.iter().enumerate() {
            if let AgentKind::Stubborn(node) = *kind {
                if node >= nodes {
                    issues.push(ValidationIssue::PinOutOfRange { agent, node });
                } else {
                    pin_count[node] += 1;
                }
            }
        }
        for (node, &count) in pin_count.iter().enumerate() {
            if count > 1 {
                issues.push(ValidationIssue::NonInjectiveLambda { node });
            }
        }

        match &self.friendship {
            FriendshipSpec::Typed {
                type_count,
                type_of,
            } => {
                if type_of.len() != n {
                    issues.push(ValidationIssue::RosterMismatch {
                        agents: n,
                        friendship: type_of.len(),
                    });
                }
                if *type_count < 2 {
                    issues.push(ValidationIssue::TooFewTypes { types: *type_count });
                }
                let mut sizes = vec![0usize; *type_count];
                for (agent, &ty) in type_of.iter().enumerate() {
                    if ty >= *type_count {
                        issues.push(ValidationIssue::TypeOutOfRange { agent, ty });
                    } else {
                        sizes[ty] += 1;
                    }
                }
                for (ty, &size) in sizes.iter().enumerate() {
                    if size == 0 {
                        issues.push(ValidationIssue::EmptyType { ty });
                    }
                }
            }
            FriendshipSpec::Social { edges } => {
                for &(a, b) in edges {
                    if a >= n || b >= n {
                        issues.push(ValidationIssue::SocialOutOfRange { a, b });
                    } else if a == b {
                        issues.push(ValidationIssue::SocialSelfLoop { agent: a });
                    }
                }
            }
        }

        if let UtilityModel::Linear { alpha, beta } = self.utility {
            if alpha.is_negative() || beta.is_negative() {
                issues.push(ValidationIssue::NegativeWeight);
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn agent_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[AgentKind] {
        &self.kinds
    }

    pub fn kind(&self, agent: AgentId) -> AgentKind {
        self.kinds[agent]
    }

    pub fn is_strategic(&self, agent: AgentId) -> bool {
        matches!(self.kinds[agent], AgentKind::Strategic)
    }

    pub fn pin(&self, agent: AgentId) -> Option<NodeId> {
        match self.kinds[agent] {
            AgentKind::Stubborn(node) => Some(node),
            AgentKind::Strategic => None,
        }
    }

    /// The stubborn agent pinned to `node`, if any.
    pub fn pinned_at(&self, node: NodeId) -> Option<AgentId> {
        self.pinned[node]
    }

    pub fn strategic_agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.kinds.len()).filter(move |&a| self.is_strategic(a))
    }

    pub fn stubborn_agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.kinds.len()).filter(move |&a| !self.is_strategic(a))
    }

    pub fn strategic_count(&self) -> usize {
        self.strategic_agents().count()
    }

    /// Nodes no stubborn agent is pinned to, ascending.
    pub fn free_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&v| self.pinned[v].is_none())
            .collect()
    }

    pub fn friendship(&self) -> &FriendshipSpec {
        &self.friendship
    }

    pub fn utility_model(&self) -> UtilityModel {
        self.utility
    }

    pub fn are_friends(&self, a: AgentId, b: AgentId) -> bool {
        self.friend[a * self.kinds.len() + b]
    }

    pub fn is_typed(&self) -> bool {
        matches!(self.friendship, FriendshipSpec::Typed { .. })
    }

    pub fn type_count(&self) -> Option<usize> {
        match &self.friendship {
            FriendshipSpec::Typed { type_count, .. } => Some(*type_count),
            FriendshipSpec::Social { .. } => None,
        }
    }

    pub fn type_of(&self, agent: AgentId) -> Option<TypeId> {
        match &self.friendship {
            FriendshipSpec::Typed { type_of, .. } => type_of.get(agent).copied(),
            FriendshipSpec::Social { .. } => None,
        }
    }

    /// Same instance with a different utility model.
    pub fn with_utility(&self, utility: UtilityModel) -> GameInstance {
        GameInstance::new(
            self.topology.clone(),
            self.kinds.clone(),
            self.friendship.clone(),
            utility,
        )
    }

    /// Same instance with a different friendship relation.
    pub fn with_friendship(&self, friendship: FriendshipSpec) -> GameInstance {
        GameInstance::new(self.topology.clone(), self.kinds.clone(), friendship, self.utility)
    }
}

/// Injective placement of every agent on a node, respecting stubborn pins.
#[derive(Clone, Debug)]
pub struct Assignment {
    node_of: Vec<NodeId>,
    occupant: Vec<Option<AgentId>>,
}

impl PartialEq for Assignment {
    fn eq(&self, other: &Self) -> bool {
        self.node_of == other.node_of
    }
}

impl Eq for Assignment {}

impl std::hash::Hash for Assignment {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.node_of.hash(state);
    }
}

impl PartialOrd for Assignment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Assignment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.node_of.cmp(&other.node_of)
    }
}

impl Assignment {
    pub fn new(instance: &GameInstance, node_of: Vec<NodeId>) -> Result<Self> {
        if node_of.len() != instance.agent_count() {
            return Err(Error::InvalidAssignment(format!(
                "{} positions for {} agents",
                node_of.len(),
                instance.agent_count()
            )));
        }
        let mut occupant = vec![None; instance.node_count()];
        for (agent, &node) in node_of.iter().enumerate() {
            if node >= occupant.len() {
                return Err(Error::InvalidAssignment(format!(
                    "agent {agent} placed on missing node {node}"
                )));
            }
            if let Some(other) = occupant[node] {
                return Err(Error::InvalidAssignment(format!(
                    "agents {other} and {agent} share node {node}"
                )));
            }
            if let Some(pin) = instance.pin(agent) {
                if pin != node {
                    return Err(Error::InvalidAssignment(format!(
                        "stubborn agent {agent} must stay on node {pin}"
                    )));
                }
            }
            occupant[node] = Some(agent);
        }
        Ok(Assignment { node_of, occupant })
    }

    /// Stubborn agents on their pins, strategic agents in ascending id order
    /// on the free nodes in ascending order.
    pub fn canonical(instance: &GameInstance) -> Result<Self> {
        let mut free = instance.free_nodes().into_iter();
        let mut node_of = vec![0; instance.agent_count()];
        for agent in 0..instance.agent_count() {
            node_of[agent] = match instance.pin(agent) {
                Some(node) => node,
                None => free.next().ok_or_else(|| {
                    Error::InvalidInstance("not enough free nodes".to_string())
                })?,
            };
        }
        Assignment::new(instance, node_of)
    }

    pub fn node_of(&self, agent: AgentId) -> NodeId {
        self.node_of[agent]
    }

    pub fn occupant(&self, node: NodeId) -> Option<AgentId> {
        self.occupant[node]
    }

    pub fn positions(&self) -> &[NodeId] {
        &self.node_of
    }

    pub fn is_empty_node(&self, node: NodeId) -> bool {
        self.occupant[node].is_none()
    }

    pub fn empty_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.occupant.len()).filter(move |&v| self.occupant[v].is_none())
    }

    /// Copy with `agent` moved to the empty node `to`. No pin check.
    pub fn with_move(&self, agent: AgentId, to: NodeId) -> Assignment {
        debug_assert!(self.occupant[to].is_none());
        let mut next = self.clone();
        let from = next.node_of[agent];
        next.occupant[from] = None;
        next.occupant[to] = Some(agent);
        next.node_of[agent] = to;
        next
    }
}
