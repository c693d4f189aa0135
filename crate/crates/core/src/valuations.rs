//! Value-query oracles.
//!
//! Items are numbered `1..=m`. A [`VertexCoverValuation`] values a bundle by
//! the number of graph edges with at least one endpoint in the bundle; an
//! [`AdditiveValuation`] sums per-item weights and exists mostly as a test
//! baseline.

use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Required, Result};

/// A set of items. Grows on insert, so it is not tied to a particular `m`.
#[derive(Clone, Default)]
pub struct ItemSet {
    bits: FixedBitSet,
}

impl ItemSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(m: usize) -> Self {
        ItemSet {
            bits: FixedBitSet::with_capacity(m + 1),
        }
    }

    /// Panics on item 0, which is never a valid item.
    pub fn insert(&mut self, item: usize) -> bool {
        assert!(item >= 1, "items are numbered from 1");
        self.bits.grow(item + 1);
        !self.bits.put(item)
    }

    pub fn remove(&mut self, item: usize) -> bool {
        if item < self.bits.len() && self.bits.contains(item) {
            self.bits.set(item, false);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, item: usize) -> bool {
        self.bits.contains(item)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn max_item(&self) -> Option<usize> {
        self.bits.maximum()
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.iter().all(|j| other.contains(j))
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        let mut out = self.clone();
        out.bits.grow(other.bits.len());
        out.bits.union_with(&other.bits);
        out
    }

    pub fn intersection(&self, other: &ItemSet) -> ItemSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    /// Items `1..=m` whose bit is set in `mask` (bit `j-1` is item `j`).
    pub fn from_mask(mask: u64) -> ItemSet {
        (0..64)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| b + 1)
            .collect()
    }

    pub(crate) fn check_range(&self, m: usize) -> Result<()> {
        match self.max_item() {
            Some(item) if item > m => Err(Error::ItemOutOfRange { item, m }),
            _ => Ok(()),
        }
    }
}

impl PartialEq for ItemSet {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

impl Eq for ItemSet {}

impl Hash for ItemSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for j in self.iter() {
            j.hash(state);
        }
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ItemSet::new();
        for j in iter {
            set.insert(j);
        }
        set
    }
}

impl<const N: usize> From<[usize; N]> for ItemSet {
    fn from(items: [usize; N]) -> Self {
        items.into_iter().collect()
    }
}

impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(deserializer)?;
        if items.contains(&0) {
            return Err(serde::de::Error::custom("items are numbered from 1"));
        }
        Ok(items.into_iter().collect())
    }
}

/// A simple undirected graph on vertices `1..=m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    m: usize,
    /// Sorted, each pair stored as `(smaller, larger)`.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints and
    /// duplicate edges. `[a, b]` and `[b, a]` are the same edge.
    pub fn new(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop { vertex: a });
            }
            if a == 0 || b == 0 || a > m || b > m {
                return Err(Error::EdgeOutOfRange { a, b, m });
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            let (a, b) = w[0];
            return Err(Error::DuplicateEdge { a, b });
        }
        Ok(Graph {
            m,
            edges: normalized,
        })
    }

    pub fn empty(m: usize) -> Self {
        Graph {
            m,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// `v(S)` = number of edges of `graph` touching `S`.
#[derive(Clone, Debug)]
pub struct VertexCoverValuation {
    graph: Graph,
    /// `neighbors[j]` is δ(j); index 0 unused.
    neighbors: Vec<Vec<usize>>,
}

impl PartialEq for VertexCoverValuation {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
    }
}

impl Eq for VertexCoverValuation {}

impl VertexCoverValuation {
    pub fn new(graph: Graph) -> Self {
        let mut neighbors = vec![Vec::new(); graph.m + 1];
        for &(a, b) in &graph.edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        VertexCoverValuation { graph, neighbors }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// δ(j), sorted.
    pub fn neighbors(&self, item: usize) -> &[usize] {
        &self.neighbors[item]
    }

    /// deg(j), which is also `v({j})`.
    pub fn degree(&self, item: usize) -> usize {
        self.neighbors[item].len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveValuation {
    /// `weights[j - 1]` is the weight of item `j`.
    weights: Vec<u64>,
}

impl AdditiveValuation {
    pub fn new(weights: Vec<u64>) -> Self {
        AdditiveValuation { weights }
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, item: usize) -> u64 {
        self.weights[item - 1]
    }
}

/// A monotone normalized set function accessed by value queries.
pub trait Valuation {
    fn item_count(&self) -> usize;

    fn value(&self, set: &ItemSet) -> Result<u64>;

    /// `v(j | S) = v(S + j) - v(S)`. Asking for an item already in `S` is an
    /// error.
    fn marginal(&self, item: usize, set: &ItemSet) -> Result<u64> {
        check_marginal_args(self.item_count(), item, set)?;
        let mut with = set.clone();
        with.insert(item);
        Ok(self.value(&with)? - self.value(set)?)
    }

    /// `v({j})`.
    fn singleton(&self, item: usize) -> Result<u64> {
        self.value(&ItemSet::from_iter([item]))
    }
}

fn check_item(m: usize, item: usize) -> Result<()> {
    if item == 0 || item > m {
        Err(Error::ItemOutOfRange { item, m })
    } else {
        Ok(())
    }
}

fn check_marginal_args(m: usize, item: usize, set: &ItemSet) -> Result<()> {
    check_item(m, item)?;
    set.check_range(m)?;
    if set.contains(item) {
        return Err(Error::ItemOwned { item });
    }
    Ok(())
}

impl Valuation for VertexCoverValuation {
    fn item_count(&self) -> usize {
        self.graph.m
    }

    fn value(&self, set: &ItemSet) -> Result<u64> {
        set.check_range(self.graph.m)?;
        let covered = self
            .graph
            .edges
            .iter()
            .filter(|&&(a, b)| set.contains(a) || set.contains(b))
            .count();
        Ok(covered as u64)
    }

    /// deg(j) − |S ∩ δ(j)|.
    fn marginal(&self, item: usize, set: &ItemSet) -> Result<u64> {
        check_marginal_args(self.graph.m, item, set)?;
        let owned = self.neighbors[item]
            .iter()
            .filter(|&&k| set.contains(k))
            .count();
        Ok((self.degree(item) - owned) as u64)
    }

    fn singleton(&self, item: usize) -> Result<u64> {
        check_item(self.graph.m, item)?;
        Ok(self.degree(item) as u64)
    }
}

impl Valuation for AdditiveValuation {
    fn item_count(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ItemSet) -> Result<u64> {
        set.check_range(self.weights.len())?;
        Ok(set.iter().map(|j| self.weights[j - 1]).sum())
    }

    fn marginal(&self, item: usize, set: &ItemSet) -> Result<u64> {
        check_marginal_args(self.weights.len(), item, set)?;
        Ok(self.weights[item - 1])
    }

    fn singleton(&self, item: usize) -> Result<u64> {
        check_item(self.weights.len(), item)?;
        Ok(self.weights[item - 1])
    }
}

/// The valuation kinds an [`Instance`](crate::instances::Instance) can hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlayerValuation {
    VertexCover(VertexCoverValuation),
    Additive(AdditiveValuation),
}

impl PlayerValuation {
    pub fn as_vertex_cover(&self) -> Option<&VertexCoverValuation> {
        match self {
            PlayerValuation::VertexCover(v) => Some(v),
            PlayerValuation::Additive(_) => None,
        }
    }
}

impl Valuation for PlayerValuation {
    fn item_count(&self) -> usize {
        match self {
            PlayerValuation::VertexCover(v) => v.item_count(),
            PlayerValuation::Additive(v) => v.item_count(),
        }
    }

    fn value(&self, set: &ItemSet) -> Result<u64> {
        match self {
            PlayerValuation::VertexCover(v) => v.value(set),
            PlayerValuation::Additive(v) => v.value(set),
        }
    }

    fn marginal(&self, item: usize, set: &ItemSet) -> Result<u64> {
        match self {
            PlayerValuation::VertexCover(v) => v.marginal(item, set),
            PlayerValuation::Additive(v) => v.marginal(item, set),
        }
    }

    fn singleton(&self, item: usize) -> Result<u64> {
        match self {
            PlayerValuation::VertexCover(v) => v.singleton(item),
            PlayerValuation::Additive(v) => v.singleton(item),
        }
    }
}

impl From<VertexCoverValuation> for PlayerValuation {
    fn from(v: VertexCoverValuation) -> Self {
        PlayerValuation::VertexCover(v)
    }
}

impl From<AdditiveValuation> for PlayerValuation {
    fn from(v: AdditiveValuation) -> Self {
        PlayerValuation::Additive(v)
    }
}

/// Which property an exhaustive check found broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `v(∅) != 0`.
    Normalization,
    /// `v(S) > v(T)` for some `S ⊆ T`.
    Monotonicity,
    /// `v(j | S) < v(j | T)` for some `S ⊆ T`, `j ∉ T`.
    Submodularity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub smaller: ItemSet,
    pub larger: ItemSet,
    /// The added item, for submodularity violations.
    pub item: Option<usize>,
}

/// Default cap on the number of `(S, T)` pairs examined, i.e. `3^m`.
pub const DEFAULT_SUBMODULARITY_BUDGET: u128 = 50_000_000;

/// Exhaustively checks normalization, monotonicity and submodularity over
/// all `S ⊆ T ⊆ {1..m}`. Refuses when `3^m` exceeds `budget`.
///
/// Returns `Ok(None)` when every property holds, otherwise the first
/// violation found. Monotonicity is scanned over `(S, T)` first, then
/// submodularity over `(S, j, T)`, each in increasing bitmask order.
pub fn check_monotone_submodular<V: Valuation + ?Sized>(
    valuation: &V,
    m: usize,
    budget: u128,
) -> Result<Option<Violation>> {
    let pairs = 3u128.checked_pow(m as u32);
    if m > 30 || pairs.map_or(true, |p| p > budget) {
        return Err(Error::BudgetExceeded {
            what: "submodularity check (3^m subset pairs)",
            required: Required(pairs),
            budget,
        });
    }
    let full: u64 = (1u64 << m) - 1;
    let values = (0..=full)
        .map(|mask| valuation.value(&ItemSet::from_mask(mask)))
        .collect::<Result<Vec<u64>>>()?;
    let value = |mask: u64| values[mask as usize] as i128;

    if values[0] != 0 {
        return Ok(Some(Violation {
            kind: ViolationKind::Normalization,
            smaller: ItemSet::new(),
            larger: ItemSet::new(),
            item: None,
        }));
    }
    // Visits `small | extra` for every submask `extra` of `rest`, in
    // increasing order.
    let supersets = |small: u64, rest: u64| {
        let mut extra: Option<u64> = Some(0);
        std::iter::from_fn(move || {
            let current = extra?;
            extra = (current != rest).then(|| current.wrapping_sub(rest) & rest);
            Some(small | current)
        })
    };
    for small in 0..=full {
        for large in supersets(small, full & !small) {
            if value(small) > value(large) {
                return Ok(Some(Violation {
                    kind: ViolationKind::Monotonicity,
                    smaller: ItemSet::from_mask(small),
                    larger: ItemSet::from_mask(large),
                    item: None,
                }));
            }
        }
    }
    for small in 0..=full {
        for bit in (0..m).filter(|b| small >> b & 1 == 0) {
            let j = 1u64 << bit;
            let gain_small = value(small | j) - value(small);
            for large in supersets(small, full & !small & !j) {
                if gain_small < value(large | j) - value(large) {
                    return Ok(Some(Violation {
                        kind: ViolationKind::Submodularity,
                        smaller: ItemSet::from_mask(small),
                        larger: ItemSet::from_mask(large),
                        item: Some(bit + 1),
                    }));
                }
            }
        }
    }
    Ok(None)
}
