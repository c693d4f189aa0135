//! Exact optimal welfare by exhaustive search over all `n^m` assignments.

use serde::Serialize;

use crate::error::{Error, Required, Result};
use crate::greedy::{Allocation, MarginalState};
use crate::instances::Instance;
use crate::valuations::{ItemSet, Valuation};

pub const DEFAULT_OPT_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub allocation: Allocation,
    pub welfare: u64,
    /// Complete assignments evaluated (the rest were pruned).
    pub assignments_searched: u64,
    /// `owner[j - 1]` is the player holding item `j`.
    pub owner: Vec<usize>,
}

impl OptResult {
    /// `O(j)`.
    pub fn owner_of(&self, item: usize) -> usize {
        self.owner[item - 1]
    }
}

pub(crate) fn assignment_count(n: usize, m: usize) -> Option<u128> {
    (n as u128).checked_pow(u32::try_from(m).ok()?)
}

/// Finds a welfare-maximizing assignment of every item. Among optima the
/// lexicographically smallest owner vector `(O(1), O(2), ...)` wins.
///
/// The search assigns items in order `1..=m`, trying players in index
/// order, and prunes a branch when the current welfare plus the sum over the
/// remaining items of their best current marginal cannot beat the incumbent.
/// For submodular valuations that sum bounds every completion.
pub fn brute_force_opt(instance: &Instance, budget: u128) -> Result<OptResult> {
    let n = instance.player_count();
    let m = instance.item_count();
    let required = assignment_count(n, m);
    if required.map_or(true, |r| r > budget) {
        return Err(Error::BudgetExceeded {
            what: "optimal allocation (n^m assignments)",
            required: Required(required),
            budget,
        });
    }
    let mut search = Search {
        n,
        m,
        state: MarginalState::new(instance),
        current: Vec::with_capacity(m),
        best: None,
        best_welfare: 0,
        leaves: 0,
    };
    search.descend(1, 0);
    let owner = search.best.expect("at least one complete assignment");
    let mut bundles = vec![ItemSet::with_capacity(m); n];
    for (j, &i) in owner.iter().enumerate() {
        bundles[i].insert(j + 1);
    }
    debug_assert_eq!(welfare_of(instance, &bundles).ok(), Some(search.best_welfare));
    let welfare = search.best_welfare;
    Ok(OptResult {
        allocation: Allocation { bundles, welfare },
        welfare,
        assignments_searched: search.leaves,
        owner,
    })
}

struct Search<'a> {
    n: usize,
    m: usize,
    state: MarginalState<'a>,
    current: Vec<usize>,
    best: Option<Vec<usize>>,
    best_welfare: u64,
    leaves: u64,
}

impl Search<'_> {
    fn bound(&self, next_item: usize) -> u64 {
        (next_item..=self.m)
            .map(|j| (0..self.n).map(|i| self.state.marginal(i, j)).max().unwrap_or(0))
            .sum()
    }

    fn descend(&mut self, item: usize, welfare: u64) {
        if item > self.m {
            self.leaves += 1;
            if self.best.is_none() || welfare > self.best_welfare {
                self.best_welfare = welfare;
                self.best = Some(self.current.clone());
            }
            return;
        }
        if self.best.is_some() && welfare + self.bound(item) <= self.best_welfare {
            return;
        }
        for player in 0..self.n {
            let gain = self.state.assign(player, item);
            self.current.push(player);
            self.descend(item + 1, welfare + gain);
            self.current.pop();
            self.state.unassign(player, item);
        }
    }
}

/// Wraps a caller-chosen allocation as the fixed optimum, after checking
/// that it assigns every item and matches the brute-force optimal welfare.
pub fn optimum_from_bundles(
    instance: &Instance,
    bundles: Vec<ItemSet>,
    budget: u128,
) -> Result<OptResult> {
    let m = instance.item_count();
    let welfare = welfare_of(instance, &bundles)?;
    let mut owner = vec![usize::MAX; m];
    for (i, bundle) in bundles.iter().enumerate() {
        for j in bundle.iter() {
            owner[j - 1] = i;
        }
    }
    if let Some(j) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::input(format!("item {} is not assigned", j + 1)));
    }
    let best = brute_force_opt(instance, budget)?;
    if welfare != best.welfare {
        return Err(Error::input(format!(
            "allocation has welfare {welfare}, the optimum is {}",
            best.welfare
        )));
    }
    Ok(OptResult {
        allocation: Allocation { bundles, welfare },
        welfare,
        assignments_searched: best.assignments_searched,
        owner,
    })
}

/// `Σ_i v_i(S_i)` for pairwise disjoint bundles within `1..=m`.
pub fn welfare_of(instance: &Instance, bundles: &[ItemSet]) -> Result<u64> {
    if bundles.len() != instance.player_count() {
        return Err(Error::input(format!(
            "{} bundles for {} players",
            bundles.len(),
            instance.player_count()
        )));
    }
    let mut seen = ItemSet::with_capacity(instance.item_count());
    for bundle in bundles {
        bundle.check_range(instance.item_count())?;
        if !seen.is_disjoint(bundle) {
            let item = seen.intersection(bundle).iter().next().unwrap_or(0);
            return Err(Error::input(format!("item {item} appears in two bundles")));
        }
        seen = seen.union(bundle);
    }
    bundles
        .iter()
        .enumerate()
        .map(|(i, b)| instance.valuation(i).value(b))
        .sum()
}
