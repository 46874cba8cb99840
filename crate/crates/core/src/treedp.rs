//! Dynamic program over rooted trees: equilibrium existence, a witness,
//! maximum-welfare equilibria and welfare-optimal assignments.
//!
//! Every node `v` gets a table describing the partial assignments of
//! `tree(v)`. A table key fixes the colour of `v`, the per-type agent counts
//! in `tree(v)` and the per-type counts among the children of `v`. Under a
//! key the table keeps the Pareto frontier of four bound vectors, all of
//! them utilities from [`UtilityGrid`] stored as grid indices:
//!
//! * `lo_deep[t]`: least utility of a strategic type-`t` agent strictly
//!   below the children of `v`;
//! * `lo_child[t]`: least utility of a strategic type-`t` agent on a child
//!   of `v`;
//! * `hi_out[t]`: best utility a type-`t` agent from outside `tree(v)` could
//!   reach on an empty node of `tree(v)` other than `v`;
//! * `hi_top`: best utility the occupant of `v` could reach by jumping to an
//!   empty node of `tree(v)` other than `v`.
//!
//! Stability only ever asks for lower bounds to be large and upper bounds
//! to be small, so a frontier entry stands for every weaker bound vector.
//! [`DpTable::admits`] answers feasibility of such a weakened key.
//!
//! Each child `v_l` of `w` is folded into the running table for `w` in turn;
//! the running tables are kept so a witness can be rebuilt from
//! backpointers.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::game::social_welfare;
use crate::model::{Assignment, GameInstance, NodeId, TypeId, UtilityModel};
use crate::rational::Rational;

/// Utilities reachable under fractional utilities with `n` agents:
/// `{i/j : 1 <= i <= j <= n}` and 0, reduced and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityGrid {
    values: Vec<Rational>,
    size: usize,
    /// `lookup[num * (size + 1) + den]` for `num <= den <= size`.
    lookup: Vec<u16>,
}

pub fn utility_grid(n: usize) -> UtilityGrid {
    UtilityGrid::new(n)
}

impl UtilityGrid {
    pub fn new(n: usize) -> Self {
        let n = n.max(1);
        let mut values: Vec<Rational> = std::iter::once(Rational::zero())
            .chain((1..=n).flat_map(|j| (1..=j).map(move |i| Rational::frac(i, j))))
            .collect();
        values.sort();
        values.dedup();
        let mut lookup = vec![0u16; (n + 1) * (n + 1)];
        for den in 0..=n {
            for num in 0..=den {
                let r = Rational::frac(num, den);
                lookup[num * (n + 1) + den] = values.binary_search(&r).expect("grid holds every fraction") as u16;
            }
        }
        UtilityGrid { values, size: n, lookup }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: u16) -> Rational {
        self.values[index as usize]
    }

    pub fn index_of(&self, value: Rational) -> Option<u16> {
        self.values.binary_search(&value).ok().map(|i| i as u16)
    }

    /// Index of 1, the neutral lower bound.
    pub fn top(&self) -> u16 {
        (self.values.len() - 1) as u16
    }

    /// Index of `num / den` (0 when `num == 0`).
    fn frac(&self, num: usize, den: usize) -> u16 {
        debug_assert!(num <= den && den <= self.size, "{num}/{den} outside the grid");
        self.lookup[num * (self.size + 1) + den]
    }

    /// Smallest index whose value is `>= value`; `len()` if there is none.
    fn ceil(&self, value: Level) -> u16 {
        match value {
            Level::Infinite => self.values.len() as u16,
            Level::Finite(r) => self.values.partition_point(|v| *v < r) as u16,
        }
    }

    /// Largest index whose value is `<= value`; `None` below zero.
    fn floor(&self, value: Level) -> Option<u16> {
        match value {
            Level::Infinite => Some(self.top()),
            Level::Finite(r) => self.values.partition_point(|v| *v <= r).checked_sub(1).map(|i| i as u16),
        }
    }
}

/// A fraction that may have a zero denominator with a positive numerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Level {
    Finite(Rational),
    Infinite,
}

fn level(num: usize, den: usize) -> Level {
    if num == 0 {
        Level::Finite(Rational::zero())
    } else if den == 0 {
        Level::Infinite
    } else {
        Level::Finite(Rational::frac(num, den))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Empty,
    Type(TypeId),
}

impl Cell {
    fn type_id(self) -> Option<TypeId> {
        match self {
            Cell::Empty => None,
            Cell::Type(t) => Some(t),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Empty => write!(f, "empty"),
            Cell::Type(t) => write!(f, "type {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DpKey {
    pub color: Cell,
    /// Agents of each type in `tree(v)`, stubborn ones included.
    pub counts: Vec<u8>,
    /// Agents of each type on the children of `v`.
    pub child_counts: Vec<u8>,
}

/// Grid indices; see the module docs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub lo_deep: Vec<u16>,
    pub lo_child: Vec<u16>,
    pub hi_out: Vec<u16>,
    pub hi_top: u16,
}

impl Bounds {
    fn neutral(k: usize, top: u16) -> Self {
        Bounds {
            lo_deep: vec![top; k],
            lo_child: vec![top; k],
            hi_out: vec![0; k],
            hi_top: 0,
        }
    }

    /// Every constraint satisfied by `other` is satisfied by `self`.
    pub fn at_least_as_strong(&self, other: &Bounds) -> bool {
        self.hi_top <= other.hi_top
            && self.lo_deep.iter().zip(&other.lo_deep).all(|(a, b)| a >= b)
            && self.lo_child.iter().zip(&other.lo_child).all(|(a, b)| a >= b)
            && self.hi_out.iter().zip(&other.hi_out).all(|(a, b)| a <= b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Back {
    Start,
    Merge { partial: u32, child: u32 },
}

#[derive(Clone, Debug)]
pub struct DpEntry {
    pub key: DpKey,
    pub bounds: Bounds,
    /// Welfare of the strategic agents in `tree(v)` other than `v`.
    pub partial_welfare: Rational,
    back: Back,
}

impl DpEntry {
    fn dominates(&self, other: &DpEntry, track_welfare: bool) -> bool {
        (!track_welfare || self.partial_welfare >= other.partial_welfare)
            && self.bounds.at_least_as_strong(&other.bounds)
    }
}

/// A finished or running table for one node. `stage` counts the children
/// folded in so far.
#[derive(Clone, Debug)]
pub struct DpTable {
    owner: NodeId,
    stage: usize,
    entries: Vec<DpEntry>,
    /// `(start, end)` of each run of equal keys in `entries`.
    groups: Vec<(usize, usize)>,
}

impl DpTable {
    fn from_map(owner: NodeId, stage: usize, map: BTreeMap<DpKey, Vec<DpEntry>>) -> Self {
        let mut entries = Vec::new();
        let mut groups = Vec::with_capacity(map.len());
        for (_, frontier) in map {
            let start = entries.len();
            entries.extend(frontier);
            groups.push((start, entries.len()));
        }
        DpTable {
            owner,
            stage,
            entries,
            groups,
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn entries(&self) -> &[DpEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &DpKey> + '_ {
        self.groups.iter().map(|&(start, _)| &self.entries[start].key)
    }

    fn group(&self, key: &DpKey) -> &[DpEntry] {
        match self.groups.binary_search_by(|&(start, _)| self.entries[start].key.cmp(key)) {
            Ok(g) => {
                let (start, end) = self.groups[g];
                &self.entries[start..end]
            }
            Err(_) => &[],
        }
    }

    /// Whether some partial assignment has this key and satisfies `bounds`.
    pub fn admits(&self, key: &DpKey, bounds: &Bounds) -> bool {
        self.group(key).iter().any(|e| e.bounds.at_least_as_strong(bounds))
    }

    /// Largest partial welfare under `key` among entries meeting `bounds`.
    pub fn best_welfare(&self, key: &DpKey, bounds: &Bounds) -> Option<Rational> {
        self.group(key)
            .iter()
            .filter(|e| e.bounds.at_least_as_strong(bounds))
            .map(|e| e.partial_welfare)
            .max()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DpMode {
    /// Equilibrium existence; welfare is not tracked.
    #[default]
    Decide,
    MaxWelfareEquilibrium,
    /// Stability is ignored; maximises welfare over all assignments.
    Optimal,
}

/// Which denominators the merge step uses for jumps onto a child node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Denominators {
    /// The parent counts as a neighbour exactly when it is occupied.
    #[default]
    Exact,
    /// The parent counts only when it shares the evaluated type, and jumps
    /// from sibling branches ignore the parent. Kept for comparison.
    SameTypeParent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct DpOptions {
    pub mode: DpMode,
    pub denominators: Denominators,
}

impl DpOptions {
    pub fn mode(mode: DpMode) -> Self {
        DpOptions {
            mode,
            ..DpOptions::default()
        }
    }

    fn stability(&self) -> bool {
        self.mode != DpMode::Optimal
    }

    fn track_welfare(&self) -> bool {
        self.mode != DpMode::Decide
    }
}

/// An accepted root entry.
#[derive(Clone, Debug)]
pub struct RootChoice {
    pub index: usize,
    pub welfare: Rational,
}

/// Rooted tree, census and grid shared by every table of one instance.
pub struct TreeDp<'a> {
    instance: &'a GameInstance,
    options: DpOptions,
    k: usize,
    grid: UtilityGrid,
    root: NodeId,
    children: Vec<Vec<NodeId>>,
    /// Post-order (children before parents).
    order: Vec<NodeId>,
    /// Type of the stubborn agent pinned on each node.
    pinned_type: Vec<Option<TypeId>>,
    strategic_total: Vec<usize>,
    census: Vec<usize>,
    /// Stubborn agents of each type in `tree(v)`.
    stubborn_below: Vec<Vec<usize>>,
    subtree_size: Vec<usize>,
    /// Empty nodes in any full assignment.
    empty_total: usize,
}

impl<'a> TreeDp<'a> {
    pub fn new(instance: &'a GameInstance, options: DpOptions) -> Result<Self> {
        let topology = instance.topology();
        if !topology.is_tree() {
            return Err(Error::Unsupported("the tree dynamic program needs a tree topology".into()));
        }
        if instance.utility_model() != UtilityModel::Fractional {
            return Err(Error::Unsupported("the tree dynamic program needs fractional utilities".into()));
        }
        let Some(k) = instance.type_count() else {
            return Err(Error::Unsupported("the tree dynamic program needs a typed instance".into()));
        };
        let n = instance.agent_count();
        if n > u8::MAX as usize {
            return Err(Error::Unsupported(format!("{n} agents exceed the table counters")));
        }
        if instance.node_count() <= n {
            return Err(Error::InvalidInstance("fewer nodes than agents plus one".into()));
        }
        let nodes = instance.node_count();
        let root = 0;

        let mut parent = vec![usize::MAX; nodes];
        let mut children = vec![Vec::new(); nodes];
        let mut preorder = Vec::with_capacity(nodes);
        let mut stack = vec![root];
        parent[root] = root;
        while let Some(v) = stack.pop() {
            preorder.push(v);
            let mut kids: Vec<NodeId> = topology
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| parent[u] == usize::MAX)
                .collect();
            kids.sort_unstable();
            for &u in &kids {
                parent[u] = v;
            }
            stack.extend(kids.iter().rev());
            children[v] = kids;
        }
        let order: Vec<NodeId> = preorder.into_iter().rev().collect();

        let mut pinned_type = vec![None; nodes];
        let mut strategic_total = vec![0; k];
        let mut census = vec![0; k];
        for agent in 0..n {
            let t = instance.type_of(agent).expect("typed instance");
            census[t] += 1;
            match instance.pin(agent) {
                Some(node) => pinned_type[node] = Some(t),
                None => strategic_total[t] += 1,
            }
        }
        let mut stubborn_below = vec![vec![0; k]; nodes];
        let mut subtree_size = vec![1; nodes];
        for &v in &order {
            if let Some(t) = pinned_type[v] {
                stubborn_below[v][t] += 1;
            }
            for &c in &children[v] {
                subtree_size[v] += subtree_size[c];
                for t in 0..k {
                    stubborn_below[v][t] += stubborn_below[c][t];
                }
            }
        }

        Ok(TreeDp {
            instance,
            options,
            k,
            grid: UtilityGrid::new(n),
            root,
            children,
            order,
            pinned_type,
            strategic_total,
            census,
            stubborn_below,
            subtree_size,
            empty_total: nodes - n,
        })
    }

    pub fn grid(&self) -> &UtilityGrid {
        &self.grid
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    fn colors(&self, v: NodeId) -> Vec<Cell> {
        match self.pinned_type[v] {
            Some(t) => vec![Cell::Type(t)],
            None => std::iter::once(Cell::Empty)
                .chain((0..self.k).filter(|&t| self.strategic_total[t] > 0).map(Cell::Type))
                .collect(),
        }
    }

    /// The table of `v` before any child is folded in.
    pub fn initial_table(&self, v: NodeId) -> Result<DpTable> {
        if v >= self.children.len() {
            return Err(Error::UnknownNode(v));
        }
        let mut map = BTreeMap::new();
        for color in self.colors(v) {
            let mut counts = vec![0u8; self.k];
            if let Cell::Type(t) = color {
                counts[t] = 1;
            }
            let key = DpKey {
                color,
                counts,
                child_counts: vec![0; self.k],
            };
            let entry = DpEntry {
                key: key.clone(),
                bounds: Bounds::neutral(self.k, self.grid.top()),
                partial_welfare: Rational::zero(),
                back: Back::Start,
            };
            map.insert(key, vec![entry]);
        }
        Ok(DpTable::from_map(v, 0, map))
    }

    /// The finished table of a leaf of the rooted tree.
    pub fn leaf_table(&self, leaf: NodeId) -> Result<DpTable> {
        if leaf < self.children.len() && !self.children[leaf].is_empty() {
            return Err(Error::InvalidParameter(format!("node {leaf} is not a leaf of the rooted tree")));
        }
        self.initial_table(leaf)
    }

    fn is_complete(&self, table: &DpTable) -> bool {
        table.stage == self.children[table.owner].len()
    }

    /// Folds the finished table of the next child into a running table.
    pub fn merge_child(&self, partial: &DpTable, child: &DpTable) -> Result<DpTable> {
        let w = partial.owner;
        let expected = self.children[w].get(partial.stage).copied();
        if expected != Some(child.owner) {
            return Err(Error::InvalidParameter(format!(
                "node {} is not child {} of node {w}",
                child.owner, partial.stage
            )));
        }
        if !self.is_complete(child) {
            return Err(Error::InvalidParameter(format!("table of node {} is unfinished", child.owner)));
        }
        let v = child.owner;
        let child_strategic = self.pinned_type[v].is_none();
        let w_strategic = self.pinned_type[w].is_none();
        let size_after = 1 + self.children[w][..=partial.stage]
            .iter()
            .map(|&c| self.subtree_size[c])
            .sum::<usize>();
        let stubborn_after: Vec<usize> = (0..self.k)
            .map(|t| {
                self.pinned_type[w].map_or(0, |p| usize::from(p == t))
                    + self.children[w][..=partial.stage]
                        .iter()
                        .map(|&c| self.stubborn_below[c][t])
                        .sum::<usize>()
            })
            .collect();
        let track = self.options.track_welfare();

        let mut map: BTreeMap<DpKey, Vec<DpEntry>> = BTreeMap::new();
        for &(a_start, a_end) in &partial.groups {
            let a_key = &partial.entries[a_start].key;
            for &(b_start, b_end) in &child.groups {
                let b_key = &child.entries[b_start].key;
                let Some(key) = self.merged_key(a_key, b_key, size_after, &stubborn_after) else {
                    continue;
                };
                let mut frontier = map.remove(&key).unwrap_or_default();
                for (ia, a) in partial.entries[a_start..a_end].iter().enumerate() {
                    for (ib, b) in child.entries[b_start..b_end].iter().enumerate() {
                        let Some((bounds, welfare)) = self.combine(a, b, child_strategic, w_strategic) else {
                            continue;
                        };
                        let candidate = DpEntry {
                            key: key.clone(),
                            bounds,
                            partial_welfare: welfare,
                            back: Back::Merge {
                                partial: (a_start + ia) as u32,
                                child: (b_start + ib) as u32,
                            },
                        };
                        insert_frontier(&mut frontier, candidate, track);
                    }
                }
                if !frontier.is_empty() {
                    map.insert(key, frontier);
                }
            }
        }
        Ok(DpTable::from_map(w, partial.stage + 1, map))
    }

    fn merged_key(
        &self,
        a: &DpKey,
        b: &DpKey,
        size_after: usize,
        stubborn_after: &[usize],
    ) -> Option<DpKey> {
        let mut counts = Vec::with_capacity(self.k);
        let mut placed = 0usize;
        for t in 0..self.k {
            let c = a.counts[t] as usize + b.counts[t] as usize;
            if c > self.strategic_total[t] + stubborn_after[t] {
                return None;
            }
            placed += c;
            counts.push(c as u8);
        }
        if size_after - placed > self.empty_total {
            return None;
        }
        let mut child_counts = a.child_counts.clone();
        if let Cell::Type(t) = b.color {
            child_counts[t] += 1;
        }
        Some(DpKey {
            color: a.color,
            counts,
            child_counts,
        })
    }

    /// Bounds and partial welfare of the union of `a` (running table of `w`)
    /// and `b` (finished table of the next child `v`), or `None` if some
    /// agent would have an improving jump between them.
    fn combine(&self, a: &DpEntry, b: &DpEntry, child_strategic: bool, w_strategic: bool) -> Option<(Bounds, Rational)> {
        let k = self.k;
        let grid = &self.grid;
        let stability = self.options.stability();
        let same_type_parent = self.options.denominators == Denominators::SameTypeParent;
        let w_type = a.key.color.type_id();
        let w_occupied = usize::from(w_type.is_some());
        let below = &b.key.child_counts;
        let below_total: usize = below.iter().map(|&c| c as usize).sum();
        let is_w = |t: TypeId| usize::from(w_type == Some(t));

        let mut bounds = a.bounds.clone();
        let mut welfare = a.partial_welfare + b.partial_welfare;

        if stability {
            for t in 0..k {
                let deep_b = b.bounds.lo_deep[t].min(b.bounds.lo_child[t]);
                let deep_a = a.bounds.lo_deep[t].min(a.bounds.lo_child[t]);
                if deep_b < a.bounds.hi_out[t] || deep_a < b.bounds.hi_out[t] {
                    return None;
                }
            }
        }

        match b.key.color {
            Cell::Type(t) => {
                if child_strategic {
                    let friends = below[t] as usize + is_w(t);
                    let utility = grid.frac(friends, below_total + w_occupied);
                    if stability {
                        let check = if same_type_parent {
                            grid.floor(level(friends, below_total + is_w(t)))?
                        } else {
                            utility
                        };
                        if check < b.bounds.hi_top || check < a.bounds.hi_out[t] {
                            return None;
                        }
                        bounds.lo_child[t] = bounds.lo_child[t].min(utility);
                    }
                    if self.options.track_welfare() {
                        welfare += grid.value(utility);
                    }
                }
                if stability {
                    for s in 0..k {
                        bounds.hi_out[s] = bounds.hi_out[s].max(b.bounds.hi_out[s]);
                    }
                    if let (Some(c), true) = (w_type, w_strategic) {
                        bounds.hi_top = bounds.hi_top.max(b.bounds.hi_out[c]);
                    }
                }
            }
            Cell::Empty => {
                if stability {
                    for s in 0..k {
                        let friends = below[s] as usize + is_w(s);
                        let value = grid.frac(friends, below_total + w_occupied);
                        // agents already placed under w, outside this branch
                        let sibling_need = if same_type_parent {
                            grid.ceil(level(friends, below_total))
                        } else {
                            value
                        };
                        if a.bounds.lo_deep[s] < sibling_need || a.bounds.lo_child[s] < sibling_need {
                            return None;
                        }
                        // agents below v that are not adjacent to it
                        let deep_need = if same_type_parent {
                            grid.ceil(level(friends, below_total + is_w(s)))
                        } else {
                            value
                        };
                        if b.bounds.lo_deep[s] < deep_need {
                            return None;
                        }
                        // agents on the children of v leave a neighbour of v
                        if below[s] > 0 {
                            let need = if same_type_parent {
                                grid.ceil(level(friends - 1, below_total - 1 + is_w(s)))
                            } else {
                                grid.frac(friends - 1, below_total - 1 + w_occupied)
                            };
                            if b.bounds.lo_child[s] < need {
                                return None;
                            }
                        }
                        bounds.hi_out[s] = bounds.hi_out[s].max(b.bounds.hi_out[s]).max(value);
                    }
                    if let (Some(c), true) = (w_type, w_strategic) {
                        let jump = grid.frac(below[c] as usize, below_total);
                        bounds.hi_top = bounds.hi_top.max(b.bounds.hi_out[c]).max(jump);
                    }
                }
            }
        }

        if stability {
            for t in 0..k {
                bounds.lo_deep[t] = bounds.lo_deep[t].min(b.bounds.lo_deep[t]).min(b.bounds.lo_child[t]);
            }
        }
        Some((bounds, welfare))
    }

    /// Acceptance at the root: full census and no improving jump onto or
    /// away from the root. Returns the entry index and total welfare.
    pub fn root_accept(&self, table: &DpTable) -> Option<RootChoice> {
        let stability = self.options.stability();
        let track = self.options.track_welfare();
        let root_strategic = self.pinned_type[table.owner].is_none();
        let mut best: Option<RootChoice> = None;
        for &(start, end) in &table.groups {
            let key = &table.entries[start].key;
            if key.counts.iter().zip(&self.census).any(|(&c, &total)| c as usize != total) {
                continue;
            }
            let kids = &key.child_counts;
            let total: usize = kids.iter().map(|&c| c as usize).sum();
            let own = match key.color {
                Cell::Type(c) if root_strategic => Some(self.grid.frac(kids[c] as usize, total)),
                _ => None,
            };
            for (offset, entry) in table.entries[start..end].iter().enumerate() {
                if stability {
                    let ok = match key.color {
                        Cell::Type(_) => own.is_none_or(|u| u >= entry.bounds.hi_top),
                        Cell::Empty => (0..self.k).all(|t| {
                            let kt = kids[t] as usize;
                            entry.bounds.lo_deep[t] >= self.grid.frac(kt, total)
                                && (kt == 0 || entry.bounds.lo_child[t] >= self.grid.frac(kt - 1, total - 1))
                        }),
                    };
                    if !ok {
                        continue;
                    }
                }
                let welfare = entry.partial_welfare + own.map_or(Rational::zero(), |u| self.grid.value(u));
                if best.as_ref().is_none_or(|b| track && welfare > b.welfare) {
                    best = Some(RootChoice {
                        index: start + offset,
                        welfare,
                    });
                }
                if !track {
                    return best;
                }
            }
        }
        best
    }

    /// Every table, indexed by node and stage.
    pub fn build(&self) -> Result<Vec<Vec<DpTable>>> {
        let mut stages: Vec<Vec<DpTable>> = vec![Vec::new(); self.children.len()];
        for &v in &self.order {
            let mut running = vec![self.initial_table(v)?];
            for &c in &self.children[v] {
                let finished = stages[c].last().expect("children come first");
                let next = self.merge_child(running.last().expect("non-empty"), finished)?;
                running.push(next);
            }
            stages[v] = running;
        }
        Ok(stages)
    }

    /// Runs the program and rebuilds an assignment for the accepted root
    /// entry.
    pub fn solve(&self) -> Result<Option<(Assignment, Rational)>> {
        let stages = self.build()?;
        let root_table = stages[self.root].last().expect("root table");
        let Some(choice) = self.root_accept(root_table) else {
            return Ok(None);
        };
        let colors = self.reconstruct(&stages, choice.index);
        let assignment = self.label(&colors)?;
        let welfare = if self.options.track_welfare() {
            choice.welfare
        } else {
            social_welfare(self.instance, &assignment)
        };
        Ok(Some((assignment, welfare)))
    }

    fn reconstruct(&self, stages: &[Vec<DpTable>], root_index: usize) -> Vec<Cell> {
        let mut colors = vec![Cell::Empty; self.children.len()];
        let mut pending = vec![(self.root, self.children[self.root].len(), root_index)];
        while let Some((v, mut stage, mut index)) = pending.pop() {
            loop {
                let entry = &stages[v][stage].entries[index];
                match entry.back {
                    Back::Start => {
                        colors[v] = entry.key.color;
                        break;
                    }
                    Back::Merge { partial, child } => {
                        let c = self.children[v][stage - 1];
                        pending.push((c, self.children[c].len(), child as usize));
                        stage -= 1;
                        index = partial as usize;
                    }
                }
            }
        }
        colors
    }

    /// Stubborn agents on their pins; strategic agents of each type in
    /// ascending id order on the nodes of that colour in ascending order.
    fn label(&self, colors: &[Cell]) -> Result<Assignment> {
        let instance = self.instance;
        let mut slots: Vec<Vec<NodeId>> = vec![Vec::new(); self.k];
        for (v, color) in colors.iter().enumerate() {
            if let (Cell::Type(t), None) = (color, self.pinned_type[v]) {
                slots[*t].push(v);
            }
        }
        let mut next = vec![0usize; self.k];
        let mut node_of = vec![0; instance.agent_count()];
        for (agent, slot) in node_of.iter_mut().enumerate() {
            *slot = match instance.pin(agent) {
                Some(node) => node,
                None => {
                    let t = instance.type_of(agent).expect("typed instance");
                    let node = *slots[t].get(next[t]).ok_or_else(|| {
                        Error::InvalidAssignment("table colouring does not match the census".into())
                    })?;
                    next[t] += 1;
                    node
                }
            };
        }
        Assignment::new(instance, node_of)
    }
}

fn insert_frontier(frontier: &mut Vec<DpEntry>, candidate: DpEntry, track_welfare: bool) {
    if frontier.iter().any(|e| e.dominates(&candidate, track_welfare)) {
        return;
    }
    frontier.retain(|e| !candidate.dominates(e, track_welfare));
    frontier.push(candidate);
}

pub fn tree_decide_equilibrium(instance: &GameInstance) -> Result<Option<Assignment>> {
    Ok(TreeDp::new(instance, DpOptions::mode(DpMode::Decide))?
        .solve()?
        .map(|(a, _)| a))
}

pub fn tree_max_welfare_equilibrium(instance: &GameInstance) -> Result<Option<(Assignment, Rational)>> {
    TreeDp::new(instance, DpOptions::mode(DpMode::MaxWelfareEquilibrium))?.solve()
}

pub fn tree_optimal_assignment(instance: &GameInstance) -> Result<(Assignment, Rational)> {
    TreeDp::new(instance, DpOptions::mode(DpMode::Optimal))?
        .solve()?
        .ok_or_else(|| Error::InvalidInstance("no assignment matches the census".into()))
}

/// Number of index combinations a dense table would need per node:
/// `(k+1) (n+1)^(2k) |grid|^(3k+1)`.
pub fn dense_table_bound(k: usize, n: usize, grid_len: usize) -> u128 {
    let pow = |base: u128, exp: usize| (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base));
    (k as u128 + 1)
        .saturating_mul(pow(n as u128 + 1, 2 * k))
        .saturating_mul(pow(grid_len as u128, 3 * k + 1))
}
