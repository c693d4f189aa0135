//! Expected welfare of the random-order greedy algorithm, either exactly (by
//! enumerating all `m!` orders) or by seeded Monte Carlo.
//!
//! Welfare is accumulated in integers and divided once at the end, so the
//! results do not depend on the order in which permutations or samples are
//! processed.

use std::fmt;

use serde::Serialize;

use crate::enumerate::{factorial, fold_permutations, fold_samples, GENERATOR};
use crate::error::{Error, Required, Result};
use crate::greedy::{random_permutation, run_into, MarginalState, Ties, TieRule};
use crate::instances::{paper_lower_bound_instance, random_instance, Instance};
use crate::optimal::{assignment_count, brute_force_opt, DEFAULT_OPT_BUDGET};
use crate::rational::{Rational, DECIMAL_PLACES};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default cap on `m!` for exact enumeration (`10!`).
pub const DEFAULT_PERMUTATION_BUDGET: u128 = 3_628_800;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "mc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimate {
    Exact { value: Rational },
    MonteCarlo { mean: f64, stderr: f64 },
}

impl Estimate {
    pub fn mean(&self) -> f64 {
        match self {
            Estimate::Exact { value } => value.to_f64(),
            Estimate::MonteCarlo { mean, .. } => *mean,
        }
    }

    pub fn stderr(&self) -> f64 {
        match self {
            Estimate::Exact { .. } => 0.0,
            Estimate::MonteCarlo { stderr, .. } => *stderr,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Estimate::Exact { value } => Some(*value),
            Estimate::MonteCarlo { .. } => None,
        }
    }

    fn divided_by(&self, opt: u64) -> Result<Option<Estimate>> {
        if opt == 0 {
            return Ok(None);
        }
        Ok(Some(match self {
            Estimate::Exact { value } => Estimate::Exact {
                value: value.checked_div(Rational::from(opt))?,
            },
            Estimate::MonteCarlo { mean, stderr } => Estimate::MonteCarlo {
                mean: mean / opt as f64,
                stderr: stderr / opt as f64,
            },
        }))
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimate::Exact { value } if value.is_integer() => write!(f, "{value}"),
            Estimate::Exact { value } => {
                write!(f, "{value} ≈ {}", value.to_decimal_string(4))
            }
            Estimate::MonteCarlo { mean, stderr } => write!(f, "{mean:.4} ± {stderr:.4}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptSource {
    BruteForce,
    /// Closed form for the lower-bound family (`2m - 3`, the total edge
    /// count), used when brute force is over budget.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OptValue {
    pub welfare: u64,
    pub source: OptSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerEstimate {
    pub player: usize,
    pub name: String,
    pub expected: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub tool_version: String,
    pub instance_hash: String,
    pub items: usize,
    pub mode: Mode,
    pub tie_rule: TieRule,
    pub players: Vec<PlayerEstimate>,
    pub total: Estimate,
    pub opt: Option<OptValue>,
    pub ratio: Option<Estimate>,
    /// Exact mode: `m!`.
    pub permutations: Option<u128>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    /// Smallest and largest welfare over the runs.
    pub min_welfare: u64,
    pub max_welfare: u64,
}

impl ExpectationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per player plus a `total` row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = self.opt.map(|o| o.welfare.to_string()).unwrap_or_default();
        let ratio = self.ratio.map(|r| format_mean(&r)).unwrap_or_default();
        let count = self
            .permutations
            .map(|p| p.to_string())
            .or(self.samples.map(|s| s.to_string()))
            .unwrap_or_default();
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            "scope", "player", "name", "mode", "expected", "exact", "stderr", "opt", "ratio",
            "runs", "seed", "tie_rule", "instance_hash",
        ])
        .expect("in-memory csv");
        let rows = self
            .players
            .iter()
            .map(|p| ("player", p.player.to_string(), p.name.as_str(), &p.expected))
            .chain(std::iter::once(("total", String::new(), "", &self.total)));
        for (scope, player, name, est) in rows {
            w.write_record([
                scope,
                &player,
                name,
                &self.mode.to_string(),
                &format_mean(est),
                &est.exact().map(|r| r.to_string()).unwrap_or_default(),
                &format!("{:.6}", est.stderr()),
                &opt,
                &ratio,
                &count,
                &seed,
                &self.tie_rule.to_string(),
                &self.instance_hash,
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}

fn format_mean(est: &Estimate) -> String {
    match est {
        Estimate::Exact { value } => value.to_decimal_string(DECIMAL_PLACES),
        Estimate::MonteCarlo { mean, .. } => format!("{mean:.6}"),
    }
}

#[derive(Clone, Debug)]
pub struct ExpectationOptions {
    pub permutation_budget: u128,
    pub opt_budget: u128,
    pub workers: usize,
    /// Use this optimum instead of searching for one.
    pub opt: Option<OptValue>,
}

impl Default for ExpectationOptions {
    fn default() -> Self {
        ExpectationOptions {
            permutation_budget: DEFAULT_PERMUTATION_BUDGET,
            opt_budget: DEFAULT_OPT_BUDGET,
            workers: 1,
            opt: None,
        }
    }
}

fn resolve_opt(instance: &Instance, options: &ExpectationOptions) -> Result<Option<OptValue>> {
    if let Some(opt) = options.opt {
        return Ok(Some(opt));
    }
    match brute_force_opt(instance, options.opt_budget) {
        Ok(opt) => Ok(Some(OptValue {
            welfare: opt.welfare,
            source: OptSource::BruteForce,
        })),
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug)]
struct Sums {
    runs: u64,
    per_player: Vec<u128>,
    per_player_sq: Vec<u128>,
    total: u128,
    total_sq: u128,
    min: u64,
    max: u64,
}

impl Sums {
    fn new(n: usize) -> Self {
        Sums {
            runs: 0,
            per_player: vec![0; n],
            per_player_sq: vec![0; n],
            total: 0,
            total_sq: 0,
            min: u64::MAX,
            max: 0,
        }
    }

    fn record(&mut self, values: &[u64]) {
        self.runs += 1;
        let mut w = 0u128;
        for (i, &v) in values.iter().enumerate() {
            let v = v as u128;
            self.per_player[i] += v;
            self.per_player_sq[i] += v * v;
            w += v;
        }
        self.total += w;
        self.total_sq += w * w;
        self.min = self.min.min(w as u64);
        self.max = self.max.max(w as u64);
    }

    fn merge(mut self, other: Sums) -> Sums {
        self.runs += other.runs;
        for i in 0..self.per_player.len() {
            self.per_player[i] += other.per_player[i];
            self.per_player_sq[i] += other.per_player_sq[i];
        }
        self.total += other.total;
        self.total_sq += other.total_sq;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self
    }
}

fn exact_mean(sum: u128, count: u128) -> Result<Rational> {
    let num = i128::try_from(sum).map_err(|_| Error::Overflow("welfare sum"))?;
    let den = i128::try_from(count).map_err(|_| Error::Overflow("permutation count"))?;
    Rational::new(num, den)
}

/// Mean and standard error from integer sums, using the sample variance
/// `(nQ - S²) / (n(n-1))`.
fn mc_estimate(sum: u128, sum_sq: u128, n: u64) -> Result<Estimate> {
    let n128 = n as u128;
    let spread = n128
        .checked_mul(sum_sq)
        .and_then(|nq| nq.checked_sub(sum.checked_mul(sum)?))
        .ok_or(Error::Overflow("sample variance"))?;
    let variance = spread as f64 / (n128 * (n128 - 1)) as f64;
    Ok(Estimate::MonteCarlo {
        mean: sum as f64 / n as f64,
        stderr: (variance / n as f64).sqrt(),
    })
}

/// Averages each player's final value over all `m!` orders, with the
/// lowest-index tie rule.
pub fn exact_expectation(
    instance: &Instance,
    rule: TieRule,
    options: &ExpectationOptions,
) -> Result<ExpectationReport> {
    if !rule.is_deterministic() {
        return Err(Error::input(
            "exact expectation needs a deterministic tie rule (lowest-index)",
        ));
    }
    let m = instance.item_count();
    let n = instance.player_count();
    let count = factorial(m);
    if count.map_or(true, |c| c > options.permutation_budget) {
        return Err(Error::BudgetExceeded {
            what: "exact expectation (m! permutations)",
            required: Required(count),
            budget: options.permutation_budget,
        });
    }
    let count = count.expect("checked above");
    let opt = resolve_opt(instance, options)?;

    let sums = fold_permutations(
        m,
        options.workers,
        || (Sums::new(n), MarginalState::new(instance)),
        |(sums, state), _, order| {
            run_into(state, order, &mut Ties::Lowest);
            sums.record(state.values());
            Ok(())
        },
        |(a, state), (b, _)| (a.merge(b), state),
    )?
    .0;

    let players = instance
        .players()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(PlayerEstimate {
                player: i,
                name: p.name.clone(),
                expected: Estimate::Exact {
                    value: exact_mean(sums.per_player[i], count)?,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = Estimate::Exact {
        value: exact_mean(sums.total, count)?,
    };
    let ratio = match opt {
        Some(o) => total.divided_by(o.welfare)?,
        None => None,
    };
    Ok(ExpectationReport {
        tool_version: TOOL_VERSION.to_string(),
        instance_hash: instance.content_hash(),
        items: m,
        mode: Mode::Exact,
        tie_rule: rule,
        players,
        total,
        opt,
        ratio,
        permutations: Some(count),
        samples: None,
        seed: None,
        generator: None,
        min_welfare: sums.min,
        max_welfare: sums.max,
    })
}

/// Estimates the same expectation from `samples` uniformly random orders.
/// Deterministic in `(seed, samples)` for any worker count.
pub fn monte_carlo(
    instance: &Instance,
    rule: TieRule,
    samples: u64,
    seed: u64,
    options: &ExpectationOptions,
) -> Result<ExpectationReport> {
    if samples < 2 {
        return Err(Error::input(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    let m = instance.item_count();
    let n = instance.player_count();
    let opt = resolve_opt(instance, options)?;
    let random_ties = !rule.is_deterministic();

    let sums = fold_samples(
        samples,
        seed,
        options.workers,
        || (Sums::new(n), MarginalState::new(instance)),
        |(sums, state), rng, _| {
            let perm = random_permutation(m, rng);
            let mut ties = if random_ties { Ties::Random(rng) } else { Ties::Lowest };
            run_into(state, perm.items(), &mut ties);
            sums.record(state.values());
            Ok(())
        },
        |(a, state), (b, _)| (a.merge(b), state),
    )?
    .0;

    let players = instance
        .players()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(PlayerEstimate {
                player: i,
                name: p.name.clone(),
                expected: mc_estimate(sums.per_player[i], sums.per_player_sq[i], samples)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = mc_estimate(sums.total, sums.total_sq, samples)?;
    let ratio = match opt {
        Some(o) => total.divided_by(o.welfare)?,
        None => None,
    };
    Ok(ExpectationReport {
        tool_version: TOOL_VERSION.to_string(),
        instance_hash: instance.content_hash(),
        items: m,
        mode: Mode::MonteCarlo,
        tie_rule: rule,
        players,
        total,
        opt,
        ratio,
        permutations: None,
        samples: Some(samples),
        seed: Some(seed),
        generator: Some(GENERATOR.to_string()),
        min_welfare: sums.min,
        max_welfare: sums.max,
    })
}

/// Which instances a sweep builds for each `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Star plus two matchings; `m` odd and at least 5.
    Paper,
    Random { players: usize, edge_prob: f64, seed: u64 },
}

impl Family {
    pub fn instance(&self, m: usize) -> Result<Instance> {
        match *self {
            Family::Paper => paper_lower_bound_instance(m),
            Family::Random {
                players,
                edge_prob,
                seed,
            } => random_instance(players, m, edge_prob, seed),
        }
    }

    fn analytic_opt(&self, m: usize) -> Option<u64> {
        match self {
            Family::Paper => Some(2 * m as u64 - 3),
            Family::Random { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Exact,
    MonteCarlo,
    /// Exact when `m!` is within the permutation budget, Monte Carlo otherwise.
    Auto,
}

#[derive(Clone, Debug)]
pub struct SweepParams {
    pub mode: SweepMode,
    pub rule: TieRule,
    pub samples: u64,
    pub seed: u64,
    pub permutation_budget: u128,
    pub opt_budget: u128,
    pub workers: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            mode: SweepMode::Auto,
            rule: TieRule::LowestIndex,
            samples: 100_000,
            seed: 0,
            permutation_budget: DEFAULT_PERMUTATION_BUDGET,
            opt_budget: DEFAULT_OPT_BUDGET,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub mode: Mode,
    pub e_rog: Estimate,
    pub opt: OptValue,
    pub ratio: Estimate,
    /// Runs behind the estimate: `m!` in exact mode, the sample count otherwise.
    pub runs: u128,
    pub seed: Option<u64>,
    pub instance_hash: String,
}

/// `E[ROG] / OPT` for each `m`.
pub fn ratio_sweep(family: Family, ms: &[usize], params: &SweepParams) -> Result<Vec<SweepRow>> {
    if ms.is_empty() {
        return Err(Error::input("empty list of m values"));
    }
    ms.iter()
        .map(|&m| {
            let instance = family.instance(m)?;
            let n = instance.player_count();
            let opt = if assignment_count(n, m).is_some_and(|c| c <= params.opt_budget) {
                OptValue {
                    welfare: brute_force_opt(&instance, params.opt_budget)?.welfare,
                    source: OptSource::BruteForce,
                }
            } else if let Some(welfare) = family.analytic_opt(m) {
                OptValue {
                    welfare,
                    source: OptSource::Analytic,
                }
            } else {
                return Err(Error::BudgetExceeded {
                    what: "optimal allocation (n^m assignments)",
                    required: Required(assignment_count(n, m)),
                    budget: params.opt_budget,
                });
            };
            let exact = match params.mode {
                SweepMode::Exact => true,
                SweepMode::MonteCarlo => false,
                SweepMode::Auto => {
                    params.rule.is_deterministic()
                        && factorial(m).is_some_and(|c| c <= params.permutation_budget)
                }
            };
            let options = ExpectationOptions {
                permutation_budget: params.permutation_budget,
                opt_budget: params.opt_budget,
                workers: params.workers,
                opt: Some(opt),
            };
            let report = if exact {
                exact_expectation(&instance, params.rule, &options)?
            } else {
                monte_carlo(&instance, params.rule, params.samples, params.seed, &options)?
            };
            Ok(SweepRow {
                m,
                mode: report.mode,
                e_rog: report.total,
                opt,
                ratio: report
                    .ratio
                    .ok_or_else(|| Error::input(format!("OPT is 0 at m = {m}")))?,
                runs: report
                    .permutations
                    .or(report.samples.map(u128::from))
                    .unwrap_or(0),
                seed: report.seed,
                instance_hash: report.instance_hash,
            })
        })
        .collect()
}

/// Columns: `m, mode, e_rog, e_rog_stderr, opt, ratio, samples, seed,
/// opt_source`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "m", "mode", "e_rog", "e_rog_stderr", "opt", "ratio", "samples", "seed", "opt_source",
    ])
    .expect("in-memory csv");
    for row in rows {
        w.write_record([
            row.m.to_string(),
            row.mode.to_string(),
            format_mean(&row.e_rog),
            format!("{:.6}", row.e_rog.stderr()),
            row.opt.welfare.to_string(),
            format_mean(&row.ratio),
            row.runs.to_string(),
            row.seed.map(|s| s.to_string()).unwrap_or_default(),
            match row.opt.source {
                OptSource::BruteForce => "brute_force".to_string(),
                OptSource::Analytic => "analytic".to_string(),
            },
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Player;
    use crate::valuations::AdditiveValuation;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn exact_values(report: &ExpectationReport) -> Vec<Rational> {
        report.players.iter().map(|p| p.expected.exact().unwrap()).collect()
    }

    #[test]
    fn lower_bound_m5_exact() {
        let inst = paper_lower_bound_instance(5).unwrap();
        let rep = exact_expectation(&inst, TieRule::LowestIndex, &Default::default()).unwrap();
        assert_eq!(exact_values(&rep), vec![r(4, 1), r(4, 3), r(17, 60)]);
        assert_eq!(rep.total.exact(), Some(r(337, 60)));
        assert_eq!(rep.opt.unwrap().welfare, 7);
        assert_eq!(rep.ratio.unwrap().exact(), Some(r(337, 420)));
        assert_eq!(rep.permutations, Some(120));
        assert!(2 * rep.min_welfare >= 7);
    }

    #[test]
    fn exact_denominator_divides_factorial() {
        let inst = random_instance(3, 6, 0.5, 3).unwrap();
        let rep = exact_expectation(&inst, TieRule::LowestIndex, &Default::default()).unwrap();
        let total = rep.total.exact().unwrap();
        assert_eq!(720 % total.denom(), 0);
        let sum = rep
            .players
            .iter()
            .try_fold(Rational::ZERO, |acc, p| acc.checked_add(p.expected.exact().unwrap()))
            .unwrap();
        assert_eq!(sum, total);
    }

    #[test]
    fn single_additive_player_is_order_independent() {
        let inst = Instance::new(6, vec![Player::new("a", AdditiveValuation::new(vec![1, 4, 0, 2, 2, 9]))]).unwrap();
        let rep = exact_expectation(&inst, TieRule::LowestIndex, &Default::default()).unwrap();
        assert_eq!(rep.total.exact(), Some(r(18, 1)));
        let mc = monte_carlo(&inst, TieRule::LowestIndex, 100, 1, &Default::default()).unwrap();
        assert_eq!(mc.total, Estimate::MonteCarlo { mean: 18.0, stderr: 0.0 });
    }

    #[test]
    fn exact_mode_rejects_random_ties_and_big_m() {
        let inst = paper_lower_bound_instance(5).unwrap();
        assert!(exact_expectation(&inst, TieRule::SeededRandom { seed: 1 }, &Default::default()).is_err());
        let big = paper_lower_bound_instance(11).unwrap();
        assert!(matches!(
            exact_expectation(&big, TieRule::LowestIndex, &Default::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn monte_carlo_needs_two_samples() {
        let inst = paper_lower_bound_instance(5).unwrap();
        assert!(monte_carlo(&inst, TieRule::LowestIndex, 1, 0, &Default::default()).is_err());
    }

    #[test]
    fn monte_carlo_tracks_exact_m5() {
        let inst = paper_lower_bound_instance(5).unwrap();
        let mc = monte_carlo(&inst, TieRule::LowestIndex, 100_000, 5, &Default::default()).unwrap();
        let exact = 337.0 / 60.0;
        assert!((mc.total.mean() - exact).abs() <= 4.0 * mc.total.stderr());
    }

    #[test]
    fn monte_carlo_is_worker_independent() {
        let inst = paper_lower_bound_instance(9).unwrap();
        let opts = |workers| ExpectationOptions { workers, ..Default::default() };
        let a = monte_carlo(&inst, TieRule::LowestIndex, 20_000, 3, &opts(1)).unwrap();
        let b = monte_carlo(&inst, TieRule::LowestIndex, 20_000, 3, &opts(4)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn sweep_m5_row() {
        let rows = ratio_sweep(Family::Paper, &[5], &SweepParams::default()).unwrap();
        assert_eq!(rows[0].mode, Mode::Exact);
        assert_eq!(rows[0].ratio.exact(), Some(r(337, 420)));
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("m,mode,e_rog,e_rog_stderr,opt,ratio,samples,seed,opt_source\n"));
        assert!(csv.contains("5,exact,5.616667,0.000000,7,0.802381,120,,brute_force"), "{csv}");
        assert!(ratio_sweep(Family::Paper, &[], &SweepParams::default()).is_err());
    }

    #[test]
    fn sweep_uses_analytic_opt_beyond_budget() {
        let params = SweepParams { samples: 2000, seed: 1, ..Default::default() };
        let rows = ratio_sweep(Family::Paper, &[21], &params).unwrap();
        assert_eq!(rows[0].mode, Mode::MonteCarlo);
        assert_eq!(rows[0].opt, OptValue { welfare: 39, source: OptSource::Analytic });
    }
}
