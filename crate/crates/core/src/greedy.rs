//! The random-order greedy loop for a fixed item order.
//!
//! Each item, in permutation order, goes to a player with the largest
//! current marginal value. Items nobody values are still assigned, so the
//! returned bundles always partition the item set.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::valuations::{ItemSet, PlayerValuation};

/// An ordering of the items `1..=m`; entry `t - 1` is the item processed at
/// step `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut seen = vec![false; m + 1];
        for &j in &order {
            if j == 0 || j > m {
                return Err(Error::NotAPermutation(format!(
                    "item {j} outside 1..={m}"
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::NotAPermutation(format!("item {j} repeated")));
            }
        }
        Ok(Permutation(order))
    }

    pub fn identity(m: usize) -> Self {
        Permutation((1..=m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    /// `positions()[j]` is the 1-based step at which item `j` is processed.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len() + 1];
        for (t, &j) in self.0.iter().enumerate() {
            pos[j] = t + 1;
        }
        pos
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses `"3,1,2"`.
    fn from_str(s: &str) -> Result<Self> {
        let order = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::NotAPermutation(format!("{t:?} is not an item")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(order)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Uniform over all `m!` orders (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Permutation {
    let mut order: Vec<usize> = (1..=m).collect();
    order.shuffle(rng);
    Permutation(order)
}

/// [`random_permutation`] driven by a fresh ChaCha8 stream for `seed`.
pub fn seeded_permutation(m: usize, seed: u64) -> Permutation {
    random_permutation(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// How to choose among players with equal maximal marginal value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TieRule {
    /// The first player in instance order.
    #[default]
    LowestIndex,
    /// Uniform among the tied players, from a ChaCha8 stream seeded per run.
    SeededRandom { seed: u64 },
}

impl TieRule {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, TieRule::LowestIndex)
    }
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieRule::LowestIndex => f.write_str("lowest-index"),
            TieRule::SeededRandom { seed } => write!(f, "seeded-random({seed})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub bundles: Vec<ItemSet>,
    pub welfare: u64,
}

impl Allocation {
    /// Bundle of each item: `owners()[j]` for `j` in `1..=m`, `None` if unassigned.
    pub fn owners(&self, m: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; m + 1];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for j in bundle.iter() {
                if j <= m {
                    owner[j] = Some(i);
                }
            }
        }
        owner
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyStep {
    pub t: usize,
    pub item: usize,
    /// `marginals[i]` is `v_i(j | S_i^{t-1})`.
    pub marginals: Vec<u64>,
    pub tie_set: Vec<usize>,
    pub winner: usize,
    pub gain: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
}

/// Per-player bundles and cached marginals, updated one assignment at a time.
///
/// For a vertex cover player `uncovered[j] = deg(j) - |S ∩ δ(j)|`, which is
/// the marginal value of `j` whenever `j ∉ S`. Winning `j` decrements the
/// counter of every neighbour of `j`.
#[derive(Clone, Debug)]
pub(crate) struct MarginalState<'a> {
    instance: &'a Instance,
    uncovered: Vec<Vec<u64>>,
    owned: Vec<ItemSet>,
    values: Vec<u64>,
}

impl<'a> MarginalState<'a> {
    pub(crate) fn new(instance: &'a Instance) -> Self {
        let m = instance.item_count();
        let uncovered = instance
            .players()
            .iter()
            .map(|p| match &p.valuation {
                PlayerValuation::VertexCover(v) => {
                    (0..=m).map(|j| if j == 0 { 0 } else { v.degree(j) as u64 }).collect()
                }
                PlayerValuation::Additive(_) => Vec::new(),
            })
            .collect();
        MarginalState {
            instance,
            uncovered,
            owned: vec![ItemSet::with_capacity(m); instance.player_count()],
            values: vec![0; instance.player_count()],
        }
    }

    pub(crate) fn reset(&mut self) {
        for (i, p) in self.instance.players().iter().enumerate() {
            if let PlayerValuation::VertexCover(v) = &p.valuation {
                for (j, slot) in self.uncovered[i].iter_mut().enumerate().skip(1) {
                    *slot = v.degree(j) as u64;
                }
            }
            self.owned[i] = ItemSet::with_capacity(self.instance.item_count());
            self.values[i] = 0;
        }
    }

    /// `v_i(j | S_i)`; `j` must not be owned by `i`.
    #[inline]
    pub(crate) fn marginal(&self, player: usize, item: usize) -> u64 {
        debug_assert!(!self.owned[player].contains(item));
        match &self.instance.players()[player].valuation {
            PlayerValuation::VertexCover(_) => self.uncovered[player][item],
            PlayerValuation::Additive(v) => v.weight(item),
        }
    }

    /// Gives `item` to `player` and returns the gain.
    pub(crate) fn assign(&mut self, player: usize, item: usize) -> u64 {
        let gain = self.marginal(player, item);
        if let PlayerValuation::VertexCover(v) = &self.instance.players()[player].valuation {
            for &k in v.neighbors(item) {
                self.uncovered[player][k] -= 1;
            }
        }
        self.owned[player].insert(item);
        self.values[player] += gain;
        gain
    }

    /// Undoes the most recent [`assign`](Self::assign) of `item` to `player`.
    pub(crate) fn unassign(&mut self, player: usize, item: usize) {
        self.owned[player].remove(item);
        if let PlayerValuation::VertexCover(v) = &self.instance.players()[player].valuation {
            for &k in v.neighbors(item) {
                self.uncovered[player][k] += 1;
            }
        }
        let gain = self.marginal(player, item);
        self.values[player] -= gain;
    }

    pub(crate) fn owned(&self, player: usize) -> &ItemSet {
        &self.owned[player]
    }

    pub(crate) fn values(&self) -> &[u64] {
        &self.values
    }

    pub(crate) fn welfare(&self) -> u64 {
        self.values.iter().sum()
    }

    pub(crate) fn into_allocation(self) -> Allocation {
        let welfare = self.welfare();
        Allocation {
            bundles: self.owned,
            welfare,
        }
    }
}

/// Source of randomness for the seeded tie rule.
pub(crate) enum Ties<'r> {
    Lowest,
    Random(&'r mut ChaCha8Rng),
}

/// One step of the loop: picks the winner for `item` and applies it.
/// `marginals` and `tie_set` are scratch buffers, left holding this step's
/// values.
#[inline]
pub(crate) fn greedy_step(
    state: &mut MarginalState<'_>,
    item: usize,
    ties: &mut Ties<'_>,
    marginals: &mut Vec<u64>,
    tie_set: &mut Vec<usize>,
) -> (usize, u64) {
    let n = state.instance.player_count();
    marginals.clear();
    marginals.extend((0..n).map(|i| state.marginal(i, item)));
    let best = *marginals.iter().max().expect("at least one player");
    tie_set.clear();
    tie_set.extend((0..n).filter(|&i| marginals[i] == best));
    let winner = match ties {
        Ties::Lowest => tie_set[0],
        Ties::Random(rng) => {
            if tie_set.len() == 1 {
                tie_set[0]
            } else {
                tie_set[rng.gen_range(0..tie_set.len())]
            }
        }
    };
    let gain = state.assign(winner, item);
    (winner, gain)
}

/// Runs the loop over `order` without recording a trace. The state is reset
/// first; on return it holds the final bundles.
pub(crate) fn run_into(state: &mut MarginalState<'_>, order: &[usize], ties: &mut Ties<'_>) {
    state.reset();
    let mut marginals = Vec::with_capacity(state.instance.player_count());
    let mut tie_set = Vec::with_capacity(state.instance.player_count());
    for &item in order {
        greedy_step(state, item, ties, &mut marginals, &mut tie_set);
    }
}

pub(crate) fn check_permutation(instance: &Instance, perm: &Permutation) -> Result<()> {
    if perm.len() != instance.item_count() {
        return Err(Error::NotAPermutation(format!(
            "{} items given, instance has {}",
            perm.len(),
            instance.item_count()
        )));
    }
    Ok(())
}

/// Processes the items in `perm` order and returns the final allocation with
/// a per-step trace.
pub fn run_greedy(
    instance: &Instance,
    perm: &Permutation,
    rule: TieRule,
) -> Result<(Allocation, GreedyTrace)> {
    check_permutation(instance, perm)?;
    let mut state = MarginalState::new(instance);
    let mut rng;
    let mut ties = match rule {
        TieRule::LowestIndex => Ties::Lowest,
        TieRule::SeededRandom { seed } => {
            rng = ChaCha8Rng::seed_from_u64(seed);
            Ties::Random(&mut rng)
        }
    };
    let mut trace = GreedyTrace::default();
    let mut marginals = Vec::new();
    let mut tie_set = Vec::new();
    for (t, &item) in perm.items().iter().enumerate() {
        let (winner, gain) = greedy_step(&mut state, item, &mut ties, &mut marginals, &mut tie_set);
        trace.steps.push(GreedyStep {
            t: t + 1,
            item,
            marginals: marginals.clone(),
            tie_set: tie_set.clone(),
            winner,
            gain,
        });
    }
    Ok((state.into_allocation(), trace))
}
