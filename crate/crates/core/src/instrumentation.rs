//! Per-step bookkeeping of a greedy run against a fixed optimal allocation,
//! and empirical checks of the inequalities that bound the algorithm's
//! expected welfare.
//!
//! For an item `j` processed at step `t`:
//!
//! * `O(j)` owns `j` in the fixed optimum; `C(j)` is the other player with the
//!   largest `v_i({j})` (ties to the lowest index).
//! * `b_O(j)`, `b_C(j)` count the edges at `j` in `G_{O(j)}`, `G_{C(j)}` that
//!   the algorithm had already used before step `t`, i.e.
//!   `v_i(j) - v_i(j | S_i^{t-1})`.
//! * `OPT^t = Σ_i v_i(OPT_i ∩ {items after step t} | S_i^t)`, so that
//!   `OPT^0 = OPT` and `OPT^m = 0`, and `LOSS(j) = OPT^{t-1} - OPT^t`.
//! * `ROG(j)` is the welfare gained at step `t`.
//!
//! Checks never panic on a violated inequality. They return a
//! [`ClaimReport`] with the smallest slack seen and, on failure, a witness
//! (permutation and step) that reproduces it.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::{factorial, fold_permutations, fold_samples};
use crate::error::{Error, Required, Result};
use crate::expectation::DEFAULT_PERMUTATION_BUDGET;
use crate::greedy::{
    check_permutation, greedy_step, random_permutation, MarginalState, Permutation, Ties, TieRule,
};
use crate::instances::Instance;
use crate::optimal::{brute_force_opt, OptResult, DEFAULT_OPT_BUDGET};
use crate::rational::Rational;
use crate::valuations::{Graph, PlayerValuation, Valuation};

/// `C(j)` for every item: entry `j - 1` is the competitor of item `j`.
pub fn competitor_map(instance: &Instance, opt: &OptResult) -> Result<Vec<usize>> {
    let n = instance.player_count();
    if n < 2 {
        return Err(Error::input("competitors need at least two players"));
    }
    (1..=instance.item_count())
        .map(|j| {
            let owner = opt.owner_of(j);
            let mut best: Option<(usize, u64)> = None;
            for i in (0..n).filter(|&i| i != owner) {
                let v = instance.valuation(i).singleton(j)?;
                if best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((i, v));
                }
            }
            Ok(best.expect("n >= 2").0)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub item: usize,
    /// `O(j)`.
    pub optimal_owner: usize,
    /// `C(j)`; `None` with a single player.
    pub competitor: Option<usize>,
    /// `v_{O(j)}({j})`.
    pub v_o: u64,
    /// `v_{C(j)}({j})`.
    pub v_c: Option<u64>,
    pub b_o: u64,
    pub b_c: Option<u64>,
    /// `v_{O(j)}(j | S_{O(j)}^{t-1})`.
    pub marginal_o: u64,
    /// Neighbours of `j` in `G_{O(j)}` placed before `j`; `None` when `O(j)`
    /// is not a vertex cover player.
    pub before_count: Option<u64>,
    /// `A(j)`.
    pub winner: usize,
    /// `ROG(j)`.
    pub gain: u64,
    /// `LOSS(j)`.
    pub loss: i64,
    /// `OPT^t`, after this step.
    pub opt_residual: u64,
}

/// Number of neighbours of `item` that `perm` places before it.
pub fn before_count(perm: &Permutation, item: usize, graph: &Graph) -> u64 {
    let pos = perm.positions();
    count_before(&pos, item, graph)
}

fn count_before(pos: &[usize], item: usize, graph: &Graph) -> u64 {
    graph
        .edges()
        .iter()
        .filter_map(|&(a, b)| match (a == item, b == item) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ => None,
        })
        .filter(|&k| pos[k] < pos[item])
        .count() as u64
}

/// Instance data that does not change between runs.
struct ProofContext<'a> {
    instance: &'a Instance,
    owner: Vec<usize>,
    competitor: Option<Vec<usize>>,
    /// `singleton[i][j]` is `v_i({j})`; index 0 unused.
    singleton: Vec<Vec<u64>>,
    opt_welfare: u64,
}

impl<'a> ProofContext<'a> {
    fn new(instance: &'a Instance, opt: &OptResult) -> Result<Self> {
        let m = instance.item_count();
        if opt.owner.len() != m {
            return Err(Error::input("optimal allocation does not match the instance"));
        }
        let competitor = if instance.player_count() >= 2 {
            Some(competitor_map(instance, opt)?)
        } else {
            None
        };
        let singleton = instance
            .players()
            .iter()
            .map(|p| {
                std::iter::once(Ok(0))
                    .chain((1..=m).map(|j| p.valuation.singleton(j)))
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProofContext {
            instance,
            owner: opt.owner.clone(),
            competitor,
            singleton,
            opt_welfare: opt.welfare,
        })
    }

    fn owner(&self, item: usize) -> usize {
        self.owner[item - 1]
    }

    fn competitor(&self, item: usize) -> Option<usize> {
        self.competitor.as_ref().map(|c| c[item - 1])
    }

    /// `OPT^t`: items at positions `> t` are still unallocated.
    fn residual(&self, state: &MarginalState<'_>, pos: &[usize], t: usize) -> u64 {
        let remaining = |j: usize, i: usize| pos[j] > t && self.owner(j) == i;
        self.instance
            .players()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let owned = state.owned(i);
                match &p.valuation {
                    PlayerValuation::VertexCover(v) => v
                        .graph()
                        .edges()
                        .iter()
                        .filter(|&&(a, b)| {
                            !owned.contains(a)
                                && !owned.contains(b)
                                && (remaining(a, i) || remaining(b, i))
                        })
                        .count() as u64,
                    PlayerValuation::Additive(v) => (1..=self.instance.item_count())
                        .filter(|&j| remaining(j, i))
                        .map(|j| v.weight(j))
                        .sum(),
                }
            })
            .sum()
    }
}

/// Replays one run, filling `records`. Also checks that the edge sets
/// counted by `b_O` and `b_C` are edges the algorithm actually took and that
/// no edge is counted twice.
fn annotate_into(
    ctx: &ProofContext<'_>,
    state: &mut MarginalState<'_>,
    order: &[usize],
    ties: &mut Ties<'_>,
    records: &mut Vec<StepRecord>,
) -> Result<()> {
    let instance = ctx.instance;
    let m = instance.item_count();
    state.reset();
    records.clear();
    let mut pos = vec![0; m + 1];
    for (t, &j) in order.iter().enumerate() {
        pos[j] = t + 1;
    }
    let mut taken: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut counted: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut marginals = Vec::new();
    let mut tie_set = Vec::new();
    let mut residual = ctx.residual(state, &pos, 0);
    if residual != ctx.opt_welfare {
        return Err(Error::Invariant(format!(
            "OPT^0 = {residual} but OPT = {}",
            ctx.opt_welfare
        )));
    }

    for (idx, &j) in order.iter().enumerate() {
        let t = idx + 1;
        let o = ctx.owner(j);
        let c = ctx.competitor(j);
        let v_o = ctx.singleton[o][j];
        let marginal_o = state.marginal(o, j);
        let b_o = v_o - marginal_o;
        let (v_c, b_c) = match c {
            Some(c) => {
                let v_c = ctx.singleton[c][j];
                (Some(v_c), Some(v_c - state.marginal(c, j)))
            }
            None => (None, None),
        };
        for i in std::iter::once(o).chain(c) {
            if let PlayerValuation::VertexCover(v) = &instance.players()[i].valuation {
                for &k in v.neighbors(j) {
                    if state.owned(i).contains(k) {
                        let edge = (k, j, i);
                        if !taken.contains(&edge) {
                            return Err(Error::Invariant(format!(
                                "edge {edge:?} counted at step {t} was never taken"
                            )));
                        }
                        if !counted.insert(edge) {
                            return Err(Error::Invariant(format!(
                                "edge {edge:?} counted twice (step {t})"
                            )));
                        }
                    }
                }
            }
        }
        let before = instance.valuation(o).as_vertex_cover().map(|v| count_before(&pos, j, v.graph()));

        let (winner, gain) = greedy_step(state, j, ties, &mut marginals, &mut tie_set);
        if let PlayerValuation::VertexCover(v) = &instance.players()[winner].valuation {
            for &k in v.neighbors(j) {
                if !state.owned(winner).contains(k) {
                    taken.insert((j, k, winner));
                }
            }
        }
        let next = ctx.residual(state, &pos, t);
        records.push(StepRecord {
            t,
            item: j,
            optimal_owner: o,
            competitor: c,
            v_o,
            v_c,
            b_o,
            b_c,
            marginal_o,
            before_count: before,
            winner,
            gain,
            loss: residual as i64 - next as i64,
            opt_residual: next,
        });
        residual = next;
    }
    if residual != 0 {
        return Err(Error::Invariant(format!("OPT^m = {residual}, expected 0")));
    }
    Ok(())
}

/// Replays the greedy run for `perm` and records every proof quantity.
/// `opt` is the fixed optimum that defines `O(j)`.
pub fn annotate_run(
    instance: &Instance,
    perm: &Permutation,
    rule: TieRule,
    opt: &OptResult,
) -> Result<Vec<StepRecord>> {
    check_permutation(instance, perm)?;
    let ctx = ProofContext::new(instance, opt)?;
    let mut state = MarginalState::new(instance);
    let mut rng;
    let mut ties = match rule {
        TieRule::LowestIndex => Ties::Lowest,
        TieRule::SeededRandom { seed } => {
            rng = ChaCha8Rng::seed_from_u64(seed);
            Ties::Random(&mut rng)
        }
    };
    let mut records = Vec::with_capacity(instance.item_count());
    annotate_into(&ctx, &mut state, perm.items(), &mut ties, &mut records)?;
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    /// Every order's welfare is at least OPT/2.
    HalfGuarantee,
    /// `ROG >= Σ_j (b_C(j) + b_O(j))`.
    EdgeAccounting,
    /// `Σ_j b_C(j) <= 2 ROG - OPT`.
    CorollaryCor,
    /// `LOSS(j) <= ROG(j)`, plus `v_{O(j)}(j | S)` when `A(j) != O(j)`.
    Classic,
    /// `b_O(j) <= B(j)`.
    BeforeCountBound,
    /// `B(j)` is uniform on `0..=deg(j)` over all orders.
    BeforeCountUniform,
    /// The closed form for `E[max(X, y)]`, `X` uniform on `0..=x`.
    Technical,
    /// Lower bounds on `E[ROG(j)]` from the competitor.
    Pos,
    /// `E[ROG(j)] >= E[LOSS(j)] - ...`.
    Neg,
    /// The second case of `Neg` with `<=` in place of `>=`. Informational.
    NegLiteral,
    /// `E[ROG] >= 4/7 OPT`.
    FourSevenths,
}

impl ClaimId {
    pub const ALL: [ClaimId; 11] = [
        ClaimId::HalfGuarantee,
        ClaimId::EdgeAccounting,
        ClaimId::CorollaryCor,
        ClaimId::Classic,
        ClaimId::BeforeCountBound,
        ClaimId::BeforeCountUniform,
        ClaimId::Technical,
        ClaimId::Pos,
        ClaimId::Neg,
        ClaimId::NegLiteral,
        ClaimId::FourSevenths,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClaimId::HalfGuarantee => "half_guarantee",
            ClaimId::EdgeAccounting => "edge_accounting",
            ClaimId::CorollaryCor => "corollary_cor",
            ClaimId::Classic => "classic",
            ClaimId::BeforeCountBound => "before_count_bound",
            ClaimId::BeforeCountUniform => "before_count_uniform",
            ClaimId::Technical => "technical",
            ClaimId::Pos => "pos",
            ClaimId::Neg => "neg",
            ClaimId::NegLiteral => "neg_literal",
            ClaimId::FourSevenths => "four_sevenths",
        }
    }

    pub fn from_name(name: &str) -> Option<ClaimId> {
        ClaimId::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Informational claims never fail a verification run.
    pub fn is_informational(&self) -> bool {
        matches!(self, ClaimId::NegLiteral)
    }

    fn needs_competitor(&self) -> bool {
        matches!(
            self,
            ClaimId::EdgeAccounting | ClaimId::CorollaryCor | ClaimId::Pos | ClaimId::Neg | ClaimId::NegLiteral
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    PerRun,
    PerStep,
    PerItemExpectation,
    Aggregate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Holds,
    Violated,
    Skipped,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub instance_hash: Option<String>,
    pub permutation: Option<Vec<usize>>,
    pub step: Option<usize>,
    pub item: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub claim: ClaimId,
    pub scope: Scope,
    pub status: ClaimStatus,
    /// Smallest slack observed (right side minus left side of the inequality).
    pub margin: Option<Rational>,
    /// Number of cases checked.
    pub cases: u64,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl ClaimReport {
    fn empty(claim: ClaimId, scope: Scope) -> Self {
        ClaimReport {
            claim,
            scope,
            status: ClaimStatus::Holds,
            margin: None,
            cases: 0,
            witness: None,
            note: None,
        }
    }

    fn with_status(claim: ClaimId, scope: Scope, status: ClaimStatus, note: impl Into<String>) -> Self {
        ClaimReport {
            status,
            note: Some(note.into()),
            ..ClaimReport::empty(claim, scope)
        }
    }

    pub fn holds(&self) -> bool {
        self.status == ClaimStatus::Holds
    }

    /// Records one case with the given slack; negative slack is a violation.
    fn observe(&mut self, slack: Rational, witness: impl FnOnce() -> Witness) {
        self.cases += 1;
        if self.margin.map_or(true, |m| slack < m) {
            self.margin = Some(slack);
        }
        if slack < Rational::ZERO && self.status != ClaimStatus::Violated {
            self.status = ClaimStatus::Violated;
            self.witness = Some(witness());
        }
    }

    /// Conjunction of `holds`, minimum of margins; the left witness wins.
    pub fn merge(mut self, other: ClaimReport) -> ClaimReport {
        debug_assert_eq!(self.claim, other.claim);
        self.cases += other.cases;
        self.margin = match (self.margin, other.margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let rank = |s: ClaimStatus| match s {
            ClaimStatus::Violated => 3,
            ClaimStatus::Skipped => 2,
            ClaimStatus::NotApplicable => 1,
            ClaimStatus::Holds => 0,
        };
        if rank(other.status) > rank(self.status) {
            self.status = other.status;
            self.note = other.note.or(self.note);
        }
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self
    }
}

fn step_witness(records: &[StepRecord], step: Option<usize>, detail: String) -> Witness {
    let item = step.map(|t| records[t - 1].item);
    Witness {
        instance_hash: None,
        permutation: Some(records.iter().map(|r| r.item).collect()),
        step,
        item,
        detail,
    }
}

fn int(n: i128) -> Rational {
    Rational::from_int(n)
}

/// `welfare >= Σ_j (b_C(j) + b_O(j))` for one run.
pub fn check_edge_accounting(records: &[StepRecord], welfare: u64) -> ClaimReport {
    let Some(b_c) = records.iter().map(|r| r.b_c).sum::<Option<u64>>() else {
        return ClaimReport::with_status(
            ClaimId::EdgeAccounting,
            Scope::PerRun,
            ClaimStatus::NotApplicable,
            "b_C needs a competitor (at least two players)",
        );
    };
    let b_o: u64 = records.iter().map(|r| r.b_o).sum();
    let mut report = ClaimReport::empty(ClaimId::EdgeAccounting, Scope::PerRun);
    let slack = welfare as i128 - (b_o + b_c) as i128;
    report.observe(int(slack), || {
        step_witness(records, None, format!("welfare {welfare} < Σb_O {b_o} + Σb_C {b_c}"))
    });
    report
}

/// `Σ_j b_C(j) <= 2·welfare − OPT` for one run.
pub fn check_corollary_cor(records: &[StepRecord], welfare: u64, opt_welfare: u64) -> ClaimReport {
    let Some(b_c) = records.iter().map(|r| r.b_c).sum::<Option<u64>>() else {
        return ClaimReport::with_status(
            ClaimId::CorollaryCor,
            Scope::PerRun,
            ClaimStatus::NotApplicable,
            "b_C needs a competitor (at least two players)",
        );
    };
    let mut report = ClaimReport::empty(ClaimId::CorollaryCor, Scope::PerRun);
    let slack = 2 * welfare as i128 - opt_welfare as i128 - b_c as i128;
    report.observe(int(slack), || {
        step_witness(
            records,
            None,
            format!("Σb_C {b_c} > 2·{welfare} − {opt_welfare}"),
        )
    });
    report
}

/// Per step: `LOSS(j) <= ROG(j)` when `A(j) = O(j)`, otherwise
/// `LOSS(j) <= ROG(j) + v_{O(j)}(j | S_{O(j)}^{t-1})`.
pub fn check_classic(records: &[StepRecord]) -> ClaimReport {
    let mut report = ClaimReport::empty(ClaimId::Classic, Scope::PerStep);
    for r in records {
        let allowance = if r.winner == r.optimal_owner { 0 } else { r.marginal_o };
        let slack = r.gain as i128 + allowance as i128 - r.loss as i128;
        report.observe(int(slack), || {
            step_witness(
                records,
                Some(r.t),
                format!("LOSS {} > ROG {} + {allowance}", r.loss, r.gain),
            )
        });
    }
    report
}

/// `2·welfare >= OPT` for one run.
pub fn check_half_guarantee(records: &[StepRecord], welfare: u64, opt_welfare: u64) -> ClaimReport {
    let mut report = ClaimReport::empty(ClaimId::HalfGuarantee, Scope::PerRun);
    let slack = Rational::new(2 * welfare as i128 - opt_welfare as i128, 2).expect("nonzero");
    report.observe(slack, || {
        step_witness(records, None, format!("welfare {welfare} < OPT {opt_welfare} / 2"))
    });
    report
}

/// `b_O(j) <= B(j)` at every step whose optimal owner is a vertex cover player.
pub fn check_before_count_bound(records: &[StepRecord]) -> ClaimReport {
    let mut report = ClaimReport::empty(ClaimId::BeforeCountBound, Scope::PerStep);
    for r in records {
        if let Some(before) = r.before_count {
            let slack = before as i128 - r.b_o as i128;
            report.observe(int(slack), || {
                step_witness(records, Some(r.t), format!("b_O {} > B(j) {before}", r.b_o))
            });
        }
    }
    report
}

/// `E[max(X, y)]` for `X` uniform on `0..=x`: `x/2 + (y² + y) / (2(x + 1))`
/// when `x >= y`, and `y` otherwise.
pub fn expected_max_uniform(x: u64, y: u64) -> Rational {
    let (x, y) = (x as i128, y as i128);
    if x >= y {
        let half = Rational::new(x, 2).expect("nonzero");
        let tail = Rational::new(y * y + y, 2 * (x + 1)).expect("nonzero");
        half.checked_add(tail).expect("small values")
    } else {
        Rational::from_int(y)
    }
}

/// Compares [`expected_max_uniform`] with direct enumeration for every
/// `0 <= x, y <= limit`.
pub fn check_technical(limit: u64) -> ClaimReport {
    let mut report = ClaimReport::empty(ClaimId::Technical, Scope::Aggregate);
    for x in 0..=limit {
        for y in 0..=limit {
            let total: i128 = (0..=x).map(|v| v.max(y) as i128).sum();
            let direct = Rational::new(total, x as i128 + 1).expect("nonzero");
            let formula = expected_max_uniform(x, y);
            // Equality check: slack is zero when they agree, -1 otherwise.
            let slack = if formula == direct { Rational::ZERO } else { int(-1) };
            report.observe(slack, || Witness {
                instance_hash: None,
                permutation: None,
                step: None,
                item: None,
                detail: format!("x={x}, y={y}: formula {formula}, enumeration {direct}"),
            });
        }
    }
    report
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub rule: TieRule,
    /// Exhaustive enumeration when `m!` is at most this.
    pub permutation_budget: u128,
    pub opt_budget: u128,
    /// Sampled orders when enumeration is over budget.
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    /// Fixed optimum to use instead of the lexicographically first one.
    pub opt: Option<OptResult>,
    /// Upper end of the `x, y` grid for the technical claim.
    pub technical_limit: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            rule: TieRule::LowestIndex,
            permutation_budget: DEFAULT_PERMUTATION_BUDGET,
            opt_budget: DEFAULT_OPT_BUDGET,
            samples: 10_000,
            seed: 0,
            workers: 1,
            opt: None,
            technical_limit: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Enumeration,
    Sampled,
    /// OPT could not be computed; only instance-free claims ran.
    NoOpt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub tool_version: String,
    pub instance_hash: String,
    pub tie_rule: TieRule,
    pub mode: VerifyMode,
    pub opt_welfare: Option<u64>,
    pub runs: u128,
    pub seed: Option<u64>,
    pub expected_welfare: Option<Rational>,
    pub reports: Vec<ClaimReport>,
}

impl Verification {
    pub fn report(&self, claim: ClaimId) -> Option<&ClaimReport> {
        self.reports.iter().find(|r| r.claim == claim)
    }

    /// No non-informational claim was violated.
    pub fn all_hold(&self) -> bool {
        self.reports
            .iter()
            .all(|r| r.claim.is_informational() || r.status != ClaimStatus::Violated)
    }

    pub fn any_skipped(&self) -> bool {
        self.reports.iter().any(|r| r.status == ClaimStatus::Skipped)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verification serializes")
    }
}

const PER_RUN_CLAIMS: [ClaimId; 5] = [
    ClaimId::HalfGuarantee,
    ClaimId::EdgeAccounting,
    ClaimId::CorollaryCor,
    ClaimId::Classic,
    ClaimId::BeforeCountBound,
];

/// Accumulated over many runs.
struct Tally {
    per_run: Vec<ClaimReport>,
    runs: u128,
    welfare: i128,
    /// Index `j`: sums over runs of `ROG(j)`, `LOSS(j)`, `b_C(j)`.
    rog: Vec<i128>,
    loss: Vec<i128>,
    b_c: Vec<i128>,
    /// `before_hist[j][k]`: runs where `B(j) = k`.
    before_hist: Vec<Vec<u128>>,
    records: Vec<StepRecord>,
}

impl Tally {
    fn new(m: usize) -> Self {
        Tally {
            per_run: PER_RUN_CLAIMS
                .iter()
                .map(|&c| ClaimReport::empty(c, if c == ClaimId::Classic || c == ClaimId::BeforeCountBound { Scope::PerStep } else { Scope::PerRun }))
                .collect(),
            runs: 0,
            welfare: 0,
            rog: vec![0; m + 1],
            loss: vec![0; m + 1],
            b_c: vec![0; m + 1],
            before_hist: vec![Vec::new(); m + 1],
            records: Vec::new(),
        }
    }

    fn record_run(&mut self, opt_welfare: u64) {
        let records = std::mem::take(&mut self.records);
        let welfare: u64 = records.iter().map(|r| r.gain).sum();
        let checks = [
            check_half_guarantee(&records, welfare, opt_welfare),
            check_edge_accounting(&records, welfare),
            check_corollary_cor(&records, welfare, opt_welfare),
            check_classic(&records),
            check_before_count_bound(&records),
        ];
        for (slot, check) in self.per_run.iter_mut().zip(checks) {
            let current = std::mem::replace(slot, ClaimReport::empty(check.claim, check.scope));
            *slot = current.merge(check);
        }
        self.runs += 1;
        self.welfare += welfare as i128;
        for r in &records {
            self.rog[r.item] += r.gain as i128;
            self.loss[r.item] += r.loss as i128;
            self.b_c[r.item] += r.b_c.unwrap_or(0) as i128;
            if let Some(k) = r.before_count {
                let hist = &mut self.before_hist[r.item];
                if hist.len() <= k as usize {
                    hist.resize(k as usize + 1, 0);
                }
                hist[k as usize] += 1;
            }
        }
        self.records = records;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.per_run = self
            .per_run
            .into_iter()
            .zip(other.per_run)
            .map(|(a, b)| a.merge(b))
            .collect();
        self.runs += other.runs;
        self.welfare += other.welfare;
        for j in 0..self.rog.len() {
            self.rog[j] += other.rog[j];
            self.loss[j] += other.loss[j];
            self.b_c[j] += other.b_c[j];
            let (a, b) = (&mut self.before_hist[j], &other.before_hist[j]);
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (k, &c) in b.iter().enumerate() {
                a[k] += c;
            }
        }
        self
    }
}

fn tie_source<'r>(rule: TieRule, slot: &'r mut Option<ChaCha8Rng>, stream: u64) -> Ties<'r> {
    match rule {
        TieRule::LowestIndex => Ties::Lowest,
        TieRule::SeededRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            Ties::Random(slot.insert(rng))
        }
    }
}

fn enumerate_tally(ctx: &ProofContext<'_>, rule: TieRule, workers: usize) -> Result<Tally> {
    let instance = ctx.instance;
    let m = instance.item_count();
    let (tally, _) = fold_permutations(
        m,
        workers,
        || (Tally::new(m), MarginalState::new(instance)),
        |(tally, state), rank, order| {
            let mut slot = None;
            let mut ties = tie_source(rule, &mut slot, rank as u64);
            annotate_into(ctx, state, order, &mut ties, &mut tally.records)?;
            tally.record_run(ctx.opt_welfare);
            Ok(())
        },
        |(a, state), (b, _)| (a.merge(b), state),
    )?;
    Ok(tally)
}

fn sample_tally(ctx: &ProofContext<'_>, rule: TieRule, samples: u64, seed: u64, workers: usize) -> Result<Tally> {
    let instance = ctx.instance;
    let m = instance.item_count();
    let random_ties = !rule.is_deterministic();
    let (tally, _) = fold_samples(
        samples,
        seed,
        workers,
        || (Tally::new(m), MarginalState::new(instance)),
        |(tally, state), rng, _| {
            let perm = random_permutation(m, rng);
            let mut ties = if random_ties { Ties::Random(rng) } else { Ties::Lowest };
            annotate_into(ctx, state, perm.items(), &mut ties, &mut tally.records)?;
            tally.record_run(ctx.opt_welfare);
            Ok(())
        },
        |(a, state), (b, _)| (a.merge(b), state),
    )?;
    Ok(tally)
}

fn expectation_witness(item: usize, detail: String) -> Witness {
    Witness {
        instance_hash: None,
        permutation: None,
        step: None,
        item: Some(item),
        detail,
    }
}

/// Evaluates the item-level expectation claims from an exhaustive tally.
fn pos_neg_reports(ctx: &ProofContext<'_>, tally: &Tally) -> Result<Vec<ClaimReport>> {
    let scope = Scope::PerItemExpectation;
    if ctx.competitor.is_none() {
        return Ok([ClaimId::Pos, ClaimId::Neg, ClaimId::NegLiteral]
            .into_iter()
            .map(|c| ClaimReport::with_status(c, scope, ClaimStatus::NotApplicable, "needs at least two players"))
            .collect());
    }
    let runs = i128::try_from(tally.runs).map_err(|_| Error::Overflow("run count"))?;
    let mean = |sum: i128| Rational::new(sum, runs);
    let mut pos = ClaimReport::empty(ClaimId::Pos, scope);
    let mut neg = ClaimReport::empty(ClaimId::Neg, scope);
    let mut literal = ClaimReport::empty(ClaimId::NegLiteral, scope);
    let mut literal_holds = 0;
    let mut second_case = 0;
    for j in 1..=ctx.instance.item_count() {
        let o = ctx.owner(j);
        let c = ctx.competitor(j).expect("checked above");
        let v_o = ctx.singleton[o][j] as i128;
        let v_c = ctx.singleton[c][j] as i128;
        let e_rog = mean(tally.rog[j])?;
        let e_loss = mean(tally.loss[j])?;
        let e_b_c = mean(tally.b_c[j])?;
        if v_o >= v_c {
            let bound = expected_max_uniform(v_o as u64, v_c as u64).checked_sub(e_b_c)?;
            pos.observe(e_rog.checked_sub(bound)?, || {
                expectation_witness(j, format!("E[ROG] {e_rog} < {bound} (v_O={v_o}, v_C={v_c})"))
            });
            let penalty = Rational::new(v_c * v_c + v_c, v_o + 1)?;
            let bound = e_loss.checked_sub(penalty)?;
            neg.observe(e_rog.checked_sub(bound)?, || {
                expectation_witness(j, format!("E[ROG] {e_rog} < E[LOSS] {e_loss} − {penalty}"))
            });
        } else {
            let bound = int(v_c).checked_sub(e_b_c)?;
            pos.observe(e_rog.checked_sub(bound)?, || {
                expectation_witness(j, format!("E[ROG] {e_rog} < v_C {v_c} − E[b_C] {e_b_c}"))
            });
            let bound = e_loss.checked_sub(int(v_o))?;
            neg.observe(e_rog.checked_sub(bound)?, || {
                expectation_witness(j, format!("E[ROG] {e_rog} < E[LOSS] {e_loss} − v_O {v_o}"))
            });
            second_case += 1;
            let slack = bound.checked_sub(e_rog)?;
            if slack >= Rational::ZERO {
                literal_holds += 1;
            }
            literal.observe(slack, || {
                expectation_witness(j, format!("E[ROG] {e_rog} > E[LOSS] {e_loss} − v_O {v_o}"))
            });
        }
    }
    literal.note = Some(format!(
        "the `<=` reading held for {literal_holds} of {second_case} items with v_C > v_O"
    ));
    Ok(vec![pos, neg, literal])
}

fn uniform_report(ctx: &ProofContext<'_>, tally: &Tally) -> ClaimReport {
    let mut report = ClaimReport::empty(ClaimId::BeforeCountUniform, Scope::Aggregate);
    for j in 1..=ctx.instance.item_count() {
        let Some(v) = ctx.instance.valuation(ctx.owner(j)).as_vertex_cover() else {
            continue;
        };
        let deg = v.degree(j);
        let mut hist = tally.before_hist[j].clone();
        hist.resize(deg + 1, 0);
        let expected = tally.runs / (deg as u128 + 1);
        let worst = hist
            .iter()
            .map(|&c| c as i128 - expected as i128)
            .map(i128::abs)
            .max()
            .unwrap_or(0);
        report.observe(int(-worst), || {
            expectation_witness(j, format!("counts {hist:?}, expected {expected} each"))
        });
    }
    report
}

fn four_sevenths_report(ctx: &ProofContext<'_>, tally: &Tally) -> Result<ClaimReport> {
    let mut report = ClaimReport::empty(ClaimId::FourSevenths, Scope::Aggregate);
    let runs = i128::try_from(tally.runs).map_err(|_| Error::Overflow("run count"))?;
    let expected = Rational::new(tally.welfare, runs)?;
    let bound = Rational::new(4 * ctx.opt_welfare as i128, 7)?;
    report.observe(expected.checked_sub(bound)?, || {
        expectation_witness(0, format!("E[welfare] {expected} < 4/7·OPT {bound}"))
    });
    report.witness.iter_mut().for_each(|w| w.item = None);
    Ok(report)
}

/// Expectation-level checks on `E[ROG(j)]`, `E[LOSS(j)]` and `E[b_C(j)]`
/// over all `m!` orders. Returns reports for `pos`, `neg` and `neg_literal`.
pub fn check_pos_neg(
    instance: &Instance,
    rule: TieRule,
    opt: &OptResult,
    budget: u128,
) -> Result<Vec<ClaimReport>> {
    let count = factorial(instance.item_count());
    if count.map_or(true, |c| c > budget) {
        return Err(Error::BudgetExceeded {
            what: "expectation-level claims (m! permutations)",
            required: Required(count),
            budget,
        });
    }
    let ctx = ProofContext::new(instance, opt)?;
    let tally = enumerate_tally(&ctx, rule, 1)?;
    pos_neg_reports(&ctx, &tally)
}

/// Runs every claim check on one instance: exhaustively when `m!` fits the
/// permutation budget, on sampled orders otherwise (expectation-level claims
/// are then skipped).
pub fn verify_instance(instance: &Instance, config: &VerifyConfig) -> Result<Verification> {
    let hash = instance.content_hash();
    let technical = check_technical(config.technical_limit);
    let opt = match &config.opt {
        Some(opt) => Some(opt.clone()),
        None => match brute_force_opt(instance, config.opt_budget) {
            Ok(opt) => Some(opt),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    let Some(opt) = opt else {
        let reports = ClaimId::ALL
            .into_iter()
            .map(|c| {
                if c == ClaimId::Technical {
                    technical.clone()
                } else {
                    ClaimReport::with_status(c, Scope::Aggregate, ClaimStatus::Skipped, "OPT over budget")
                }
            })
            .collect();
        return Ok(Verification {
            tool_version: crate::expectation::TOOL_VERSION.to_string(),
            instance_hash: hash,
            tie_rule: config.rule,
            mode: VerifyMode::NoOpt,
            opt_welfare: None,
            runs: 0,
            seed: None,
            expected_welfare: None,
            reports,
        });
    };
    let ctx = ProofContext::new(instance, &opt)?;
    let exhaustive = factorial(instance.item_count()).is_some_and(|c| c <= config.permutation_budget);
    let (tally, mode, seed) = if exhaustive {
        (enumerate_tally(&ctx, config.rule, config.workers)?, VerifyMode::Enumeration, None)
    } else {
        if config.samples == 0 {
            return Err(Error::input("sampled verification needs at least one sample"));
        }
        (
            sample_tally(&ctx, config.rule, config.samples, config.seed, config.workers)?,
            VerifyMode::Sampled,
            Some(config.seed),
        )
    };

    let mut reports: Vec<ClaimReport> = tally.per_run.clone();
    reports.push(technical);
    let expected_welfare;
    if exhaustive {
        reports.push(uniform_report(&ctx, &tally));
        reports.extend(pos_neg_reports(&ctx, &tally)?);
        reports.push(four_sevenths_report(&ctx, &tally)?);
        expected_welfare = Some(Rational::new(
            tally.welfare,
            i128::try_from(tally.runs).map_err(|_| Error::Overflow("run count"))?,
        )?);
    } else {
        for c in [ClaimId::BeforeCountUniform, ClaimId::Pos, ClaimId::Neg, ClaimId::NegLiteral, ClaimId::FourSevenths] {
            reports.push(ClaimReport::with_status(
                c,
                Scope::Aggregate,
                ClaimStatus::Skipped,
                "needs exhaustive enumeration (m! over budget)",
            ));
        }
        expected_welfare = None;
    }
    if ctx.competitor.is_none() {
        for r in reports.iter_mut().filter(|r| r.claim.needs_competitor()) {
            r.status = ClaimStatus::NotApplicable;
            r.note = Some("needs at least two players".to_string());
        }
    }
    for r in &mut reports {
        if let Some(w) = &mut r.witness {
            if r.claim != ClaimId::Technical {
                w.instance_hash = Some(hash.clone());
            }
        }
    }
    reports.sort_by_key(|r| ClaimId::ALL.iter().position(|c| *c == r.claim));
    Ok(Verification {
        tool_version: crate::expectation::TOOL_VERSION.to_string(),
        instance_hash: hash,
        tie_rule: config.rule,
        mode,
        opt_welfare: Some(opt.welfare),
        runs: tally.runs,
        seed,
        expected_welfare,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::{run_greedy, seeded_permutation};
    use crate::instances::{paper_lower_bound_instance, random_instance, Player};
    use crate::optimal::optimum_from_bundles;
    use crate::valuations::{AdditiveValuation, ItemSet, VertexCoverValuation};
    use proptest::prelude::*;

    /// The star / odd-matching / even-matching optimum: `({m}, {1,3,..}, {2,4,..})`.
    fn fixed_optimum(instance: &Instance) -> OptResult {
        let m = instance.item_count();
        let bundles = vec![
            ItemSet::from_iter([m]),
            (1..m).step_by(2).collect(),
            (2..m).step_by(2).collect(),
        ];
        optimum_from_bundles(instance, bundles, DEFAULT_OPT_BUDGET).unwrap()
    }

    fn perm(items: &[usize]) -> Permutation {
        Permutation::new(items.to_vec()).unwrap()
    }

    fn single_edge() -> Instance {
        let g = || VertexCoverValuation::new(Graph::new(2, [(1, 2)]).unwrap());
        Instance::new(2, vec![Player::new("a", g()), Player::new("b", g())]).unwrap()
    }

    #[test]
    fn competitors_on_the_lower_bound_instance() {
        let inst = paper_lower_bound_instance(7).unwrap();
        let opt = fixed_optimum(&inst);
        assert_eq!(opt.owner_of(1), 1);
        let c = competitor_map(&inst, &opt).unwrap();
        assert_eq!(c[0], 0);
        assert_eq!(opt.owner_of(7), 0);
        assert_eq!(c[6], 1);
    }

    #[test]
    fn isolated_item_competitor_is_lowest_other_index() {
        let inst = Instance::from_graphs(3, [Graph::new(3, [(1, 2)]).unwrap(), Graph::empty(3), Graph::empty(3)]).unwrap();
        let opt = brute_force_opt(&inst, DEFAULT_OPT_BUDGET).unwrap();
        let c = competitor_map(&inst, &opt).unwrap();
        let o3 = opt.owner_of(3);
        assert_eq!(c[2], if o3 == 0 { 1 } else { 0 });
        let records = annotate_run(&inst, &Permutation::identity(3), TieRule::LowestIndex, &opt).unwrap();
        let r3 = records.iter().find(|r| r.item == 3).unwrap();
        assert_eq!(r3.v_c, Some(0));
    }

    #[test]
    fn competitors_need_two_players() {
        let inst = Instance::from_graphs(2, [Graph::new(2, [(1, 2)]).unwrap()]).unwrap();
        let opt = brute_force_opt(&inst, 10).unwrap();
        assert!(competitor_map(&inst, &opt).is_err());
    }

    #[test]
    fn identity_order_records() {
        let inst = paper_lower_bound_instance(7).unwrap();
        let opt = fixed_optimum(&inst);
        let records = annotate_run(&inst, &Permutation::identity(7), TieRule::LowestIndex, &opt).unwrap();
        let last = &records[6];
        assert_eq!((last.t, last.item, last.optimal_owner), (7, 7, 0));
        assert_eq!(last.b_o, 6);
        assert_eq!(records.iter().map(|r| r.gain).sum::<u64>(), 6);
        assert_eq!(records.iter().map(|r| r.loss).sum::<i64>(), 11);
        assert_eq!(last.opt_residual, 0);

        let welfare = 6;
        let b: u64 = records.iter().map(|r| r.b_o + r.b_c.unwrap()).sum();
        assert!(welfare >= b);
        assert!(check_edge_accounting(&records, welfare).holds());
    }

    #[test]
    fn first_step_has_nothing_taken() {
        let inst = paper_lower_bound_instance(7).unwrap();
        let opt = fixed_optimum(&inst);
        let records = annotate_run(&inst, &perm(&[7, 1, 2, 3, 4, 5, 6]), TieRule::LowestIndex, &opt).unwrap();
        assert_eq!((records[0].b_o, records[0].b_c), (0, Some(0)));
        assert_eq!(records.iter().map(|r| r.gain).sum::<u64>(), 11);
        assert_eq!(records.iter().map(|r| r.loss).sum::<i64>(), 11);
    }

    #[test]
    fn record_invariants_hold_for_every_order() {
        let inst = paper_lower_bound_instance(5).unwrap();
        let opt = fixed_optimum(&inst);
        let mut order: Vec<usize> = (1..=5).collect();
        loop {
            let p = perm(&order);
            let records = annotate_run(&inst, &p, TieRule::LowestIndex, &opt).unwrap();
            let (alloc, _) = run_greedy(&inst, &p, TieRule::LowestIndex).unwrap();
            assert_eq!(records.iter().map(|r| r.gain).sum::<u64>(), alloc.welfare);
            assert_eq!(records.iter().map(|r| r.loss).sum::<i64>(), opt.welfare as i64);
            for r in &records {
                assert!(r.b_o <= r.v_o);
                assert!(r.b_c.unwrap() <= r.v_c.unwrap());
            }
            if !crate::enumerate::next_permutation(&mut order) {
                break;
            }
        }
    }

    #[test]
    fn expected_max_examples() {
        assert_eq!(expected_max_uniform(3, 1), Rational::new(7, 4).unwrap());
        assert_eq!(expected_max_uniform(2, 5), Rational::from_int(5));
        assert_eq!(expected_max_uniform(0, 0), Rational::ZERO);
        for x in 0..10 {
            assert_eq!(expected_max_uniform(x, x), Rational::from_int(x as i128));
        }
    }

    #[test]
    fn technical_claim_on_the_full_grid() {
        let report = check_technical(20);
        assert!(report.holds());
        assert_eq!(report.cases, 441);
        assert_eq!(report.margin, Some(Rational::ZERO));
    }

    #[test]
    fn before_count_extremes_and_uniformity() {
        let star = Graph::new(4, [(1, 4), (2, 4), (3, 4)]).unwrap();
        assert_eq!(before_count(&perm(&[4, 1, 2, 3]), 4, &star), 0);
        assert_eq!(before_count(&perm(&[1, 2, 3, 4]), 4, &star), 3);
        let mut hist = [0u32; 4];
        let mut order = vec![1, 2, 3, 4];
        loop {
            hist[before_count(&perm(&order), 4, &star) as usize] += 1;
            if !crate::enumerate::next_permutation(&mut order) {
                break;
            }
        }
        assert_eq!(hist, [6, 6, 6, 6]);
    }

    #[test]
    fn pos_neg_on_the_lower_bound_instance() {
        let inst = paper_lower_bound_instance(5).unwrap();
        let opt = brute_force_opt(&inst, DEFAULT_OPT_BUDGET).unwrap();
        let reports = check_pos_neg(&inst, TieRule::LowestIndex, &opt, DEFAULT_PERMUTATION_BUDGET).unwrap();
        let names: Vec<_> = reports.iter().map(|r| r.claim).collect();
        assert_eq!(names, [ClaimId::Pos, ClaimId::Neg, ClaimId::NegLiteral]);
        assert!(reports[0].holds(), "{:?}", reports[0]);
        assert!(reports[1].holds(), "{:?}", reports[1]);
        assert_eq!(reports[0].cases, 5);
    }

    #[test]
    fn pos_neg_on_a_single_shared_edge() {
        let inst = single_edge();
        let opt = brute_force_opt(&inst, 10).unwrap();
        let reports = check_pos_neg(&inst, TieRule::LowestIndex, &opt, 10).unwrap();
        // v_O = v_C = 1 for both items; every order has welfare 2.
        assert!(reports[0].holds() && reports[1].holds());
        assert!(reports[0].margin.unwrap() >= Rational::ZERO);
        assert!(check_pos_neg(&inst, TieRule::LowestIndex, &opt, 1).is_err());
    }

    #[test]
    fn lower_bound_family_verifies() {
        let inst = paper_lower_bound_instance(5).unwrap();
        let v = verify_instance(&inst, &VerifyConfig::default()).unwrap();
        assert_eq!(v.mode, VerifyMode::Enumeration);
        assert_eq!(v.runs, 120);
        assert_eq!(v.expected_welfare, Some(Rational::new(337, 60).unwrap()));
        assert!(v.all_hold(), "{}", v.to_json());
        assert!(!v.any_skipped());
        assert_eq!(v.reports.len(), ClaimId::ALL.len());
    }

    #[test]
    fn single_player_claims_are_not_applicable() {
        let inst = Instance::new(
            3,
            vec![Player::new("solo", VertexCoverValuation::new(Graph::new(3, [(1, 2), (2, 3)]).unwrap()))],
        )
        .unwrap();
        let v = verify_instance(&inst, &VerifyConfig::default()).unwrap();
        for c in [ClaimId::EdgeAccounting, ClaimId::CorollaryCor, ClaimId::Pos, ClaimId::Neg] {
            assert_eq!(v.report(c).unwrap().status, ClaimStatus::NotApplicable, "{c:?}");
        }
        assert!(v.report(ClaimId::HalfGuarantee).unwrap().holds());
        assert!(v.all_hold());
    }

    #[test]
    fn sampled_mode_skips_expectation_claims() {
        let inst = random_instance(2, 6, 0.5, 3).unwrap();
        let config = VerifyConfig { permutation_budget: 100, samples: 500, ..VerifyConfig::default() };
        let v = verify_instance(&inst, &config).unwrap();
        assert_eq!(v.mode, VerifyMode::Sampled);
        assert_eq!(v.runs, 500);
        assert_eq!(v.report(ClaimId::Pos).unwrap().status, ClaimStatus::Skipped);
        assert!(v.report(ClaimId::Classic).unwrap().holds());
        assert!(v.any_skipped());
    }

    #[test]
    fn verification_is_worker_independent() {
        let inst = random_instance(3, 6, 0.6, 11).unwrap();
        let one = verify_instance(&inst, &VerifyConfig::default()).unwrap();
        let four = verify_instance(&inst, &VerifyConfig { workers: 4, ..VerifyConfig::default() }).unwrap();
        assert_eq!(one.to_json(), four.to_json());
    }

    #[test]
    fn violations_carry_witnesses() {
        let records = vec![StepRecord {
            t: 1,
            item: 1,
            optimal_owner: 0,
            competitor: Some(1),
            v_o: 1,
            v_c: Some(1),
            b_o: 0,
            b_c: Some(0),
            marginal_o: 1,
            before_count: Some(0),
            winner: 1,
            gain: 0,
            loss: 2,
            opt_residual: 0,
        }];
        let report = check_classic(&records);
        assert_eq!(report.status, ClaimStatus::Violated);
        assert_eq!(report.margin, Some(Rational::from_int(-1)));
        let w = report.witness.unwrap();
        assert_eq!((w.permutation, w.step, w.item), (Some(vec![1]), Some(1), Some(1)));
        let half = check_half_guarantee(&records, 0, 2);
        assert!(!half.holds());
    }

    #[test]
    fn additive_owner_has_no_before_count() {
        let inst = Instance::new(
            2,
            vec![
                Player::new("w", AdditiveValuation::new(vec![3, 1])),
                Player::new("g", VertexCoverValuation::new(Graph::new(2, [(1, 2)]).unwrap())),
            ],
        )
        .unwrap();
        let opt = brute_force_opt(&inst, 10).unwrap();
        let records = annotate_run(&inst, &Permutation::identity(2), TieRule::LowestIndex, &opt).unwrap();
        for r in &records {
            assert_eq!(r.before_count.is_some(), r.optimal_owner == 1);
        }
        assert_eq!(records.iter().map(|r| r.loss).sum::<i64>(), opt.welfare as i64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn per_run_claims_hold(n in 1usize..4, m in 1usize..7, p in 0.0f64..1.0, seed in any::<u64>(), ps in any::<u64>(), tie in any::<u64>()) {
            let inst = random_instance(n, m, p, seed).unwrap();
            let opt = brute_force_opt(&inst, DEFAULT_OPT_BUDGET).unwrap();
            for rule in [TieRule::LowestIndex, TieRule::SeededRandom { seed: tie }] {
                let records = annotate_run(&inst, &seeded_permutation(m, ps), rule, &opt).unwrap();
                let welfare: u64 = records.iter().map(|r| r.gain).sum();
                prop_assert_eq!(records.iter().map(|r| r.loss).sum::<i64>(), opt.welfare as i64);
                prop_assert!(check_half_guarantee(&records, welfare, opt.welfare).holds());
                prop_assert!(check_classic(&records).holds());
                prop_assert!(check_before_count_bound(&records).holds());
                if n >= 2 {
                    prop_assert!(check_edge_accounting(&records, welfare).holds());
                    prop_assert!(check_corollary_cor(&records, welfare, opt.welfare).holds());
                }
            }
        }

        #[test]
        fn expectation_claims_hold(n in 2usize..4, m in 1usize..6, p in 0.0f64..1.0, seed in any::<u64>()) {
            let inst = random_instance(n, m, p, seed).unwrap();
            let v = verify_instance(&inst, &VerifyConfig::default()).unwrap();
            prop_assert!(v.all_hold(), "{}", v.to_json());
        }
    }
}
