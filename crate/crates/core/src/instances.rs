//! Instance families, hardness-reduction builders and seeded random
//! instances.
//!
//! Typed families use type 0 for "red" and type 1 for "blue". Node and agent
//! ids are assigned in construction order, so every builder is
//! deterministic.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AgentKind, Assignment, FriendshipSpec, GameInstance, NodeId, Topology, TypeId, UtilityModel};
use crate::rational::Rational;

const RED: TypeId = 0;
const BLUE: TypeId = 1;

/// Stubborn agents in the three-node gadget of the clique reduction.
pub const TRIAD_RED: usize = 41;
pub const TRIAD_BLUE: usize = 80;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    /// Star with `leaves` leaves; `type_sizes[t]` strategic agents of type t.
    Star { leaves: usize, type_sizes: Vec<usize> },
    Path { nodes: usize, type_sizes: Vec<usize> },
    Ring { nodes: usize, type_sizes: Vec<usize> },
    /// Four-layer tree with `2k + 1` agents per type and no equilibrium.
    NonexistenceTree { k: usize },
    /// `k` cliques of `k * l` nodes joined through a hub, with auxiliary
    /// nodes on blocks of `l` clique nodes.
    PoaCliques { k: usize, l: usize },
    /// Cliques joined through an empty hub, one stubborn agent per type.
    PoaStubbornCliques { k: usize },
    /// Star whose stubborn agents sit on leaves; `l` agents per type.
    PoaStarStubborn { k: usize, l: usize },
    /// Star with two agents in each of the first `k - 1` types and the rest
    /// in the last type; `n` agents in total.
    PoaStarTwoPerType { k: usize, n: usize },
    /// Unique equilibrium with welfare `eps`; `eps` must be `1/m`, `m >= 2`.
    PosUnbounded { eps: Rational },
    /// Unique equilibrium with welfare `(x+1)/(2x+1)` against optimum 3/2.
    PosThree { x: usize },
    /// Ten strategic agents whose best equilibrium loses 1/4 welfare.
    PosThirtyFourOver33,
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Star { leaves, type_sizes } => write!(f, "star(leaves={leaves}, types={type_sizes:?})"),
            FamilySpec::Path { nodes, type_sizes } => write!(f, "path(nodes={nodes}, types={type_sizes:?})"),
            FamilySpec::Ring { nodes, type_sizes } => write!(f, "ring(nodes={nodes}, types={type_sizes:?})"),
            FamilySpec::NonexistenceTree { k } => write!(f, "nonexistence-tree(k={k})"),
            FamilySpec::PoaCliques { k, l } => write!(f, "poa-cliques(k={k}, l={l})"),
            FamilySpec::PoaStubbornCliques { k } => write!(f, "poa-stubborn-cliques(k={k})"),
            FamilySpec::PoaStarStubborn { k, l } => write!(f, "poa-star-stubborn(k={k}, l={l})"),
            FamilySpec::PoaStarTwoPerType { k, n } => write!(f, "poa-star-two-per-type(k={k}, n={n})"),
            FamilySpec::PosUnbounded { eps } => write!(f, "pos-unbounded(eps={eps})"),
            FamilySpec::PosThree { x } => write!(f, "pos-three(x={x})"),
            FamilySpec::PosThirtyFourOver33 => write!(f, "pos-34-33"),
        }
    }
}

/// Incremental typed-instance construction.
#[derive(Default)]
struct Builder {
    nodes: usize,
    edges: Vec<(NodeId, NodeId)>,
    kinds: Vec<AgentKind>,
    types: Vec<TypeId>,
}

impl Builder {
    fn node(&mut self) -> NodeId {
        self.nodes += 1;
        self.nodes - 1
    }

    fn nodes(&mut self, count: usize) -> Vec<NodeId> {
        (0..count).map(|_| self.node()).collect()
    }

    fn edge(&mut self, u: NodeId, v: NodeId) {
        self.edges.push((u, v));
    }

    fn clique(&mut self, nodes: &[NodeId]) {
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                self.edge(u, v);
            }
        }
    }

    fn strategic(&mut self, ty: TypeId, count: usize) {
        for _ in 0..count {
            self.kinds.push(AgentKind::Strategic);
            self.types.push(ty);
        }
    }

    fn stubborn(&mut self, ty: TypeId, node: NodeId) {
        self.kinds.push(AgentKind::Stubborn(node));
        self.types.push(ty);
    }

    /// A fresh node holding a stubborn agent, joined to `anchor`.
    fn stubborn_leaf(&mut self, ty: TypeId, anchor: NodeId) -> NodeId {
        let node = self.node();
        self.edge(anchor, node);
        self.stubborn(ty, node);
        node
    }

    fn finish(self) -> GameInstance {
        GameInstance::new(
            Topology::new(self.nodes, self.edges),
            self.kinds,
            FriendshipSpec::typed(self.types),
            UtilityModel::Fractional,
        )
    }
}

fn domain(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(message()))
    }
}

pub fn gen_family(spec: &FamilySpec) -> Result<GameInstance> {
    let instance = match spec {
        FamilySpec::Star { leaves, type_sizes } => {
            domain(*leaves >= 1, || "a star needs at least one leaf".into())?;
            let edges = (1..=*leaves).map(|leaf| (0, leaf));
            simple_family(*leaves + 1, edges, type_sizes)?
        }
        FamilySpec::Path { nodes, type_sizes } => {
            domain(*nodes >= 2, || "a path needs at least two nodes".into())?;
            simple_family(*nodes, (1..*nodes).map(|v| (v - 1, v)), type_sizes)?
        }
        FamilySpec::Ring { nodes, type_sizes } => {
            domain(*nodes >= 3, || "a ring needs at least three nodes".into())?;
            simple_family(*nodes, (0..*nodes).map(|v| (v, (v + 1) % nodes)), type_sizes)?
        }
        FamilySpec::NonexistenceTree { k } => nonexistence_tree(*k)?,
        FamilySpec::PoaCliques { k, l } => poa_cliques(*k, *l)?,
        FamilySpec::PoaStubbornCliques { k } => poa_stubborn_cliques(*k)?,
        FamilySpec::PoaStarStubborn { k, l } => poa_star_stubborn(*k, *l)?,
        FamilySpec::PoaStarTwoPerType { k, n } => poa_star_two_per_type(*k, *n)?,
        FamilySpec::PosUnbounded { eps } => pos_unbounded(*eps)?,
        FamilySpec::PosThree { x } => pos_three(*x)?,
        FamilySpec::PosThirtyFourOver33 => pos_thirty_four(),
    };
    debug_assert!(instance.validate().is_ok(), "{spec} generated an invalid instance");
    Ok(instance)
}

fn simple_family(
    nodes: usize,
    edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    type_sizes: &[usize],
) -> Result<GameInstance> {
    let agents: usize = type_sizes.iter().sum();
    domain(type_sizes.len() >= 2, || "need at least two types".into())?;
    domain(type_sizes.iter().all(|&s| s > 0), || "every type needs an agent".into())?;
    domain(agents < nodes, || format!("{agents} agents do not fit {nodes} nodes with one empty"))?;
    let mut b = Builder {
        nodes,
        edges: edges.into_iter().collect(),
        ..Builder::default()
    };
    for (t, &size) in type_sizes.iter().enumerate() {
        b.strategic(t, size);
    }
    Ok(b.finish())
}

/// Root, one child, `2k - 1` grandchildren each with `k` leaf children.
fn nonexistence_tree(k: usize) -> Result<GameInstance> {
    domain(k >= 2, || "the nonexistence tree needs k >= 2".into())?;
    let mut b = Builder::default();
    let root = b.node();
    let hub = b.node();
    b.edge(root, hub);
    for _ in 0..2 * k - 1 {
        let mid = b.node();
        b.edge(hub, mid);
        for _ in 0..k {
            let leaf = b.node();
            b.edge(mid, leaf);
        }
    }
    for t in 0..k {
        b.strategic(t, 2 * k + 1);
    }
    Ok(b.finish())
}

fn poa_cliques(k: usize, l: usize) -> Result<GameInstance> {
    domain(k >= 2 && l >= 1, || "poa-cliques needs k >= 2 and l >= 1".into())?;
    let mut b = Builder::default();
    let hub = b.node();
    for i in 0..k {
        let clique = b.nodes(k * l);
        b.clique(&clique);
        // the special node is the first node of block i
        b.edge(hub, clique[i * l]);
        for block in clique.chunks(l) {
            let aux = b.node();
            for &v in block {
                b.edge(aux, v);
            }
        }
    }
    for t in 0..k {
        b.strategic(t, k * (l + 1));
    }
    Ok(b.finish())
}

fn poa_stubborn_cliques(k: usize) -> Result<GameInstance> {
    domain(k >= 2, || "poa-stubborn-cliques needs k >= 2".into())?;
    let mut b = Builder::default();
    let hub = b.node();
    if k % 2 == 1 {
        for t in 0..k {
            let clique = b.nodes(k + 1);
            b.clique(&clique);
            b.edge(hub, clique[0]);
            b.stubborn(t, clique[0]);
        }
        for t in 0..k {
            b.strategic(t, k);
        }
    } else {
        let mut anchors = Vec::new();
        for t in 0..k - 1 {
            let clique = b.nodes(k);
            b.clique(&clique);
            b.edge(hub, clique[0]);
            b.stubborn(t, clique[0]);
            anchors.push(clique[0]);
        }
        // one dummy per clique anchor, plus a dummy holding the last type's
        // stubborn agent, attached to the first anchor
        for &anchor in &anchors {
            let dummy = b.node();
            b.edge(anchor, dummy);
        }
        b.stubborn_leaf(k - 1, anchors[0]);
        for t in 0..k {
            b.strategic(t, k - 1);
        }
    }
    Ok(b.finish())
}

fn poa_star_stubborn(k: usize, l: usize) -> Result<GameInstance> {
    domain(k >= 2 && l >= 1, || "poa-star-stubborn needs k >= 2 and l >= 1".into())?;
    let mut b = Builder::default();
    let center = b.node();
    b.strategic(0, l);
    b.strategic(1, 1);
    for _ in 0..l - 1 {
        b.stubborn_leaf(1, center);
    }
    for t in 2..k {
        for _ in 0..l {
            b.stubborn_leaf(t, center);
        }
    }
    // leaves for the strategic agents plus the empty one
    for _ in 0..l + 1 {
        let leaf = b.node();
        b.edge(center, leaf);
    }
    Ok(b.finish())
}

fn poa_star_two_per_type(k: usize, n: usize) -> Result<GameInstance> {
    domain(k >= 2 && n >= 2 * k, || "poa-star-two-per-type needs k >= 2 and n >= 2k".into())?;
    let mut sizes = vec![2; k - 1];
    sizes.push(n - 2 * (k - 1));
    simple_family(n + 1, (1..=n).map(|leaf| (0, leaf)), &sizes)
}

fn pos_unbounded(eps: Rational) -> Result<GameInstance> {
    domain(
        eps.numer() == 1 && eps.denom() >= 2,
        || format!("eps must be 1/m with m >= 2, got {eps}"),
    )?;
    let m = eps.denom() as usize;
    let x = 2 * m - 2;
    let y = m - 1;
    let mut b = Builder::default();
    let z1 = b.node();
    let z2 = b.node();
    let z3 = b.node();
    b.edge(z1, z2);
    b.strategic(BLUE, 2);
    for _ in 0..x + 1 {
        b.stubborn_leaf(RED, z1);
    }
    for _ in 0..y {
        b.stubborn_leaf(RED, z3);
    }
    b.stubborn_leaf(BLUE, z3);
    Ok(b.finish())
}

fn pos_three(x: usize) -> Result<GameInstance> {
    domain(x >= 1, || "pos-three needs x >= 1".into())?;
    let mut b = Builder::default();
    let z = b.node();
    let y = b.node();
    let w = b.node();
    b.edge(y, w);
    b.strategic(BLUE, 2);
    for _ in 0..x + 1 {
        b.stubborn_leaf(BLUE, z);
    }
    for _ in 0..x {
        b.stubborn_leaf(RED, z);
    }
    b.stubborn_leaf(RED, y);
    Ok(b.finish())
}

/// Node ids of the ten-agent welfare-gap instance.
pub mod thirty_four {
    use crate::model::NodeId;
    pub const X: NodeId = 0;
    pub const Y1: NodeId = 1;
    pub const ALPHA: NodeId = 2;
    pub const Y2: NodeId = 3;
    pub const W: [NodeId; 3] = [4, 5, 6];
    pub const Z: [NodeId; 3] = [7, 8, 9];
    pub const BETA: NodeId = 10;
}

fn pos_thirty_four() -> GameInstance {
    use thirty_four::*;
    let mut b = Builder::default();
    b.nodes(11);
    for v in [Y1, ALPHA, Y2] {
        b.edge(X, v);
    }
    for v in W {
        b.edge(Y1, v);
    }
    for v in Z {
        b.edge(Y2, v);
    }
    b.edge(ALPHA, BETA);
    b.strategic(RED, 5);
    b.strategic(BLUE, 5);
    b.finish()
}

/// How padding nodes are populated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadKind {
    Strategic,
    Stubborn,
}

/// Adds `extra` isolated nodes, each holding one agent of a new type.
/// Lifts two-type constructions to more types without touching the original
/// nodes.
pub fn pad_types(instance: &GameInstance, extra: usize, kind: PadKind) -> Result<GameInstance> {
    let FriendshipSpec::Typed { type_count, type_of } = instance.friendship() else {
        return Err(Error::Unsupported("type padding needs a typed instance".into()));
    };
    let base = instance.node_count();
    let mut kinds = instance.kinds().to_vec();
    let mut types = type_of.clone();
    for i in 0..extra {
        kinds.push(match kind {
            PadKind::Strategic => AgentKind::Strategic,
            PadKind::Stubborn => AgentKind::Stubborn(base + i),
        });
        types.push(type_count + i);
    }
    let topology = Topology::new(base + extra, instance.topology().edges().iter().copied());
    Ok(GameInstance::new(
        topology,
        kinds,
        FriendshipSpec::Typed {
            type_count: type_count + extra,
            type_of: types,
        },
        instance.utility_model(),
    ))
}

/// An input graph for the reductions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl ExternalGraph {
    /// Rejects self-loops and out-of-range endpoints; duplicate edges are
    /// merged.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) leaves the {vertex_count} vertices"
                )));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(ExternalGraph {
            vertex_count,
            edges: list,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        ExternalGraph::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        ExternalGraph::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle with n >= 3 is simple")
    }

    /// Vertex 0 joined to `leaves` other vertices.
    pub fn star(leaves: usize) -> Self {
        ExternalGraph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is simple")
    }

    pub fn with_isolated(&self, extra: usize) -> Self {
        ExternalGraph {
            vertex_count: self.vertex_count + extra,
            edges: self.edges.clone(),
        }
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let key = (u.min(v), u.max(v));
        ExternalGraph {
            vertex_count: self.vertex_count,
            edges: self.edges.iter().copied().filter(|&e| e != key).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Parses the edge-list format: first line the vertex count, then one
    /// `u v` pair per line (0-indexed). Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|line| !line.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("edge list is empty".into()))?;
        let vertex_count: usize = header
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [u, v] = parts.as_slice() else {
                return Err(Error::Parse(format!("expected `u v`, got {line:?}")));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad vertex {s:?}")))
            };
            edges.push((parse(u)?, parse(v)?));
        }
        ExternalGraph::new(vertex_count, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.vertex_count);
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// A reduction instance plus the welfare threshold it encodes.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub instance: GameInstance,
    pub target: Rational,
}

/// Node ids of the parts of the clique-equilibrium gadget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueGadgetLayout {
    /// Copies of the input vertices.
    pub graph: Vec<NodeId>,
    /// Stubborn blue nodes joined to every input vertex.
    pub guards: Vec<NodeId>,
    /// Free side of the complete bipartite block.
    pub slots: Vec<NodeId>,
    /// Stubborn side of the complete bipartite block.
    pub bank: Vec<NodeId>,
    pub x: NodeId,
    pub y: NodeId,
    pub z: NodeId,
    /// Stubborn nodes of the three-node gadget.
    pub triad: Vec<NodeId>,
}

pub fn reduce_clique_equilibrium(graph: &ExternalGraph, s: usize) -> Result<GameInstance> {
    Ok(reduce_clique_equilibrium_layout(graph, s)?.0)
}

/// Equilibrium exists iff `graph` has a clique of size `s`. `s` strategic
/// red agents; everything else is stubborn.
pub fn reduce_clique_equilibrium_layout(
    graph: &ExternalGraph,
    s: usize,
) -> Result<(GameInstance, CliqueGadgetLayout)> {
    domain(s >= 5, || format!("the clique gadget needs s >= 5, got {s}"))?;
    let mut b = Builder::default();
    b.strategic(RED, s);

    let graph_nodes = b.nodes(graph.vertex_count());
    for &(u, v) in graph.edges() {
        b.edge(graph_nodes[u], graph_nodes[v]);
    }
    let guards = b.nodes(s - 2);
    for &w in &guards {
        b.stubborn(BLUE, w);
        for &v in &graph_nodes {
            b.edge(v, w);
        }
    }

    let slots = b.nodes(s - 2);
    let bank = b.nodes(4 * s);
    for (i, &r) in bank.iter().enumerate() {
        b.stubborn(if i < 2 * s + 1 { RED } else { BLUE }, r);
        for &l in &slots {
            b.edge(l, r);
        }
    }

    let x = b.node();
    let y = b.node();
    let z = b.node();
    b.edge(x, y);
    let triad = b.nodes(TRIAD_RED + TRIAD_BLUE);
    let (reds, blues) = triad.split_at(TRIAD_RED);
    for &v in reds {
        b.stubborn(RED, v);
    }
    for &v in blues {
        b.stubborn(BLUE, v);
    }
    for &v in &triad {
        b.edge(y, v);
    }
    for &v in reds[..1].iter().chain(&blues[..2]) {
        b.edge(x, v);
    }
    for &v in reds[..5].iter().chain(&blues[..7]) {
        b.edge(z, v);
    }

    let layout = CliqueGadgetLayout {
        graph: graph_nodes,
        guards,
        slots,
        bank,
        x,
        y,
        z,
        triad,
    };
    Ok((b.finish(), layout))
}

/// Optimal welfare reaches `s - 1` iff `graph` has a clique of size `s`.
/// Isolated padding nodes are appended when the graph alone leaves no empty
/// node.
pub fn reduce_clique_welfare(graph: &ExternalGraph, s: usize) -> Result<Reduction> {
    domain(s >= 2, || format!("the welfare gadget needs s >= 2, got {s}"))?;
    let mut b = Builder::default();
    b.strategic(RED, s);
    let graph_nodes = b.nodes(graph.vertex_count());
    for &(u, v) in graph.edges() {
        b.edge(graph_nodes[u], graph_nodes[v]);
    }
    let hub = b.node();
    b.stubborn(BLUE, hub);
    for &v in &graph_nodes {
        b.edge(v, hub);
    }
    let agents = s + 1;
    if b.nodes <= agents {
        b.nodes(agents + 1 - b.nodes);
    }
    Ok(Reduction {
        instance: b.finish(),
        target: Rational::from_integer(s as i64 - 1),
    })
}

/// Social game on a cycle plus an isolated node; optimal welfare reaches
/// the vertex count iff `graph` is Hamiltonian.
pub fn reduce_hamiltonian(graph: &ExternalGraph) -> Result<Reduction> {
    let n = graph.vertex_count();
    domain(n >= 3, || format!("the cycle gadget needs at least 3 vertices, got {n}"))?;
    let topology = Topology::new(n + 1, (0..n).map(|v| (v, (v + 1) % n)));
    let instance = GameInstance::new(
        topology,
        vec![AgentKind::Strategic; n],
        FriendshipSpec::social(graph.edges().iter().copied()),
        UtilityModel::Fractional,
    );
    Ok(Reduction {
        instance,
        target: Rational::from_integer(n as i64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomTopology {
    /// Each edge present independently with the given probability.
    Gnp { edge_prob: Rational },
    /// Uniform random recursive tree with shuffled labels.
    Tree,
    Path,
    Ring,
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomFriendship {
    Typed,
    /// Social network over all agents with the given edge probability.
    Social { edge_prob: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub nodes: usize,
    pub topology: RandomTopology,
    pub strategic_per_type: Vec<usize>,
    pub stubborn_per_type: Vec<usize>,
    pub friendship: RandomFriendship,
    pub model: UtilityModel,
    /// Resample the topology until it is connected.
    pub connected: bool,
    pub seed: u64,
}

impl RandomSpec {
    /// Typed, fractional, stubborn-free defaults.
    pub fn new(nodes: usize, topology: RandomTopology, strategic_per_type: Vec<usize>, seed: u64) -> Self {
        let types = strategic_per_type.len();
        RandomSpec {
            nodes,
            topology,
            strategic_per_type,
            stubborn_per_type: vec![0; types],
            friendship: RandomFriendship::Typed,
            model: UtilityModel::Fractional,
            connected: false,
            seed,
        }
    }
}

const RESAMPLE_LIMIT: usize = 1000;

pub fn gen_random(spec: &RandomSpec) -> Result<GameInstance> {
    let types = spec.strategic_per_type.len();
    domain(spec.stubborn_per_type.len() == types, || {
        "strategic and stubborn counts must list the same types".into()
    })?;
    let strategic: usize = spec.strategic_per_type.iter().sum();
    let stubborn: usize = spec.stubborn_per_type.iter().sum();
    domain(strategic + stubborn < spec.nodes, || {
        format!("{} agents need more than {} nodes", strategic + stubborn, spec.nodes)
    })?;
    if let RandomTopology::Gnp { edge_prob } = spec.topology {
        check_probability(edge_prob)?;
    }
    if let RandomFriendship::Social { edge_prob } = spec.friendship {
        check_probability(edge_prob)?;
    }
    domain(spec.topology != RandomTopology::Ring || spec.nodes >= 3, || "a ring needs three nodes".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut topology = None;
    for _ in 0..RESAMPLE_LIMIT {
        let candidate = random_topology(&mut rng, spec.nodes, spec.topology);
        if !spec.connected || candidate.is_connected() {
            topology = Some(candidate);
            break;
        }
    }
    let topology = topology.ok_or_else(|| {
        Error::InvalidParameter(format!("no connected topology after {RESAMPLE_LIMIT} samples"))
    })?;

    let pins = rand::seq::index::sample(&mut rng, spec.nodes, stubborn).into_vec();
    let mut kinds = Vec::with_capacity(strategic + stubborn);
    let mut type_of = Vec::with_capacity(strategic + stubborn);
    for (t, &count) in spec.strategic_per_type.iter().enumerate() {
        kinds.extend(std::iter::repeat_n(AgentKind::Strategic, count));
        type_of.extend(std::iter::repeat_n(t, count));
    }
    let mut pins = pins.into_iter();
    for (t, &count) in spec.stubborn_per_type.iter().enumerate() {
        for _ in 0..count {
            kinds.push(AgentKind::Stubborn(pins.next().expect("sampled enough pins")));
            type_of.push(t);
        }
    }

    let friendship = match spec.friendship {
        RandomFriendship::Typed => FriendshipSpec::Typed {
            type_count: types,
            type_of,
        },
        RandomFriendship::Social { edge_prob } => {
            let n = kinds.len();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if bernoulli(&mut rng, edge_prob) {
                        edges.push((i, j));
                    }
                }
            }
            FriendshipSpec::social(edges)
        }
    };
    Ok(GameInstance::new(topology, kinds, friendship, spec.model))
}

/// Strategic agents on a uniformly random set of free nodes, in a
/// uniformly random order; stubborn agents on their pins.
pub fn random_assignment(instance: &GameInstance, seed: u64) -> Result<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = instance.free_nodes();
    free.shuffle(&mut rng);
    let mut free = free.into_iter();
    let mut node_of = Vec::with_capacity(instance.agent_count());
    for agent in 0..instance.agent_count() {
        let node = match instance.pin(agent) {
            Some(pin) => pin,
            None => free
                .next()
                .ok_or_else(|| Error::InvalidInstance("more strategic agents than free nodes".into()))?,
        };
        node_of.push(node);
    }
    Assignment::new(instance, node_of)
}

fn check_probability(p: Rational) -> Result<()> {
    domain(!p.is_negative() && p <= Rational::one(), || {
        format!("probability {p} is outside [0, 1]")
    })
}

fn bernoulli(rng: &mut ChaCha8Rng, p: Rational) -> bool {
    rng.gen_range(0..p.denom()) < p.numer()
}

fn random_topology(rng: &mut ChaCha8Rng, nodes: usize, kind: RandomTopology) -> Topology {
    let mut labels: Vec<NodeId> = (0..nodes).collect();
    labels.shuffle(rng);
    let edges: Vec<(NodeId, NodeId)> = match kind {
        RandomTopology::Gnp { edge_prob } => {
            let mut edges = Vec::new();
            for u in 0..nodes {
                for v in u + 1..nodes {
                    if bernoulli(rng, edge_prob) {
                        edges.push((u, v));
                    }
                }
            }
            return Topology::new(nodes, edges);
        }
        RandomTopology::Tree => (1..nodes).map(|v| (rng.gen_range(0..v), v)).collect(),
        RandomTopology::Path => (1..nodes).map(|v| (v - 1, v)).collect(),
        RandomTopology::Ring => (0..nodes).map(|v| (v, (v + 1) % nodes)).collect(),
        RandomTopology::Star => (1..nodes).map(|v| (0, v)).collect(),
    };
    Topology::new(nodes, edges.into_iter().map(|(u, v)| (labels[u], labels[v])))
}
