//! `rog`: generate instances, run the random-order greedy algorithm, compute
//! its expected welfare, check the per-run and expected-value inequalities,
//! and sweep the approximation ratio over instance sizes.
//!
//! Exit codes: 0 success, 1 internal error or violated claim, 2 usage error,
//! 3 claims skipped under `--strict`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rog_core::expectation::{
    exact_expectation, monte_carlo, ratio_sweep, sweep_csv, ExpectationOptions, ExpectationReport,
    Family, SweepMode, SweepParams, SweepRow, DEFAULT_PERMUTATION_BUDGET, TOOL_VERSION,
};
use rog_core::greedy::{run_greedy, seeded_permutation, Permutation, TieRule};
use rog_core::instances::{load_instance, paper_lower_bound_instance, random_instance, save_instance, Instance};
use rog_core::instrumentation::{annotate_run, ClaimId, ClaimStatus, StepRecord, Verification, VerifyConfig, verify_instance};
use rog_core::optimal::{brute_force_opt, DEFAULT_OPT_BUDGET};
use rog_core::valuations::Valuation;
use serde_json::json;

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SKIPPED: u8 = 3;

#[derive(Parser)]
#[command(name = "rog", version, about = "Random-order greedy allocation with vertex cover valuations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file.
    Generate {
        #[command(subcommand)]
        family: GenerateFamily,
    },
    /// One greedy run for a given or seeded order.
    Run(RunArgs),
    /// Expected welfare per player, exactly or by Monte Carlo.
    Expect(ExpectArgs),
    /// Check the per-run and expected-value inequalities on one instance.
    Verify(VerifyArgs),
    /// Expected welfare over OPT for a list of sizes.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum GenerateFamily {
    /// Star on item m plus two interleaved matchings (m odd, at least 5).
    Paper {
        #[arg(long)]
        m: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independent Erdős–Rényi graphs, one per player.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Edge probability.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Paper,
    Random,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct SourceGroup {
    /// Instance file in JSON format.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Build the instance from a family instead of a file.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    source: SourceGroup,
    /// Item count for `--family`.
    #[arg(long)]
    m: Option<usize>,
    /// Player count for `--family random`.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Edge probability for `--family random`.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Graph seed for `--family random`.
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance, Failure> {
        if let Some(path) = &self.source.instance {
            if self.m.is_some() {
                return Err(Failure::usage("--m only applies to --family"));
            }
            return Ok(load_instance(path)?);
        }
        let m = self.m.ok_or_else(|| Failure::usage("--family needs --m"))?;
        Ok(match self.source.family.expect("clap enforces one source") {
            FamilyArg::Paper => paper_lower_bound_instance(m)?,
            FamilyArg::Random => random_instance(self.n, m, self.p, self.graph_seed)?,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TiesArg {
    LowestIndex,
    SeededRandom,
}

#[derive(Args)]
struct TieArgs {
    #[arg(long, value_enum, default_value_t = TiesArg::LowestIndex)]
    ties: TiesArg,
    /// Seed for `--ties seeded-random`.
    #[arg(long, default_value_t = 0)]
    tie_seed: u64,
}

impl TieArgs {
    fn rule(&self) -> TieRule {
        match self.ties {
            TiesArg::LowestIndex => TieRule::LowestIndex,
            TiesArg::SeededRandom => TieRule::SeededRandom { seed: self.tie_seed },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, default: Format, render: impl FnOnce(Format) -> Result<String, Failure>) -> Result<(), Failure> {
        let mut text = render(self.format.unwrap_or(default))?;
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.output {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::internal(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Processing order, e.g. `3,1,2`.
    #[arg(long, conflicts_with = "seed")]
    perm: Option<String>,
    /// Draw the order from this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    ties: TieArgs,
    /// Per-step proof quantities against the optimum (needs OPT).
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = DEFAULT_OPT_BUDGET)]
    opt_budget: u128,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Args)]
struct Budgets {
    /// Largest `m!` enumerated exactly.
    #[arg(long, default_value_t = DEFAULT_PERMUTATION_BUDGET)]
    perm_budget: u128,
    /// Largest `n^m` searched for OPT.
    #[arg(long, default_value_t = DEFAULT_OPT_BUDGET)]
    opt_budget: u128,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct ExpectArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    ties: TieArgs,
    #[command(flatten)]
    budgets: Budgets,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// `all` or a comma-separated list of claim names.
    #[arg(long, default_value = "all")]
    claims: String,
    /// Exit 3 when any selected claim was skipped.
    #[arg(long)]
    strict: bool,
    /// Sampled orders when `m!` is over the permutation budget.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    ties: TieArgs,
    #[command(flatten)]
    budgets: Budgets,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepModeArg {
    Auto,
    Exact,
    Mc,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Paper)]
    family: FamilyArg,
    /// Sizes, e.g. `5,7,9` or `5,7,...,101`.
    #[arg(long)]
    m_list: String,
    #[arg(long, value_enum, default_value_t = SweepModeArg::Auto)]
    mode: SweepModeArg,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Player count for `--family random`.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
    #[command(flatten)]
    ties: TieArgs,
    #[command(flatten)]
    budgets: Budgets,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl From<rog_core::Error> for Failure {
    fn from(e: rog_core::Error) -> Self {
        let code = if e.is_usage() { EXIT_USAGE } else { EXIT_INTERNAL };
        Failure { code, message: e.to_string() }
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let mut s = String::new();
        for (cell, w) in cells.iter().zip(&widths) {
            let _ = write!(s, "{cell:<w$}  ");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut out, header.to_vec());
    for row in rows {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn generate(family: GenerateFamily) -> Result<(), Failure> {
    let (instance, out) = match family {
        GenerateFamily::Paper { m, out } => (paper_lower_bound_instance(m)?, out),
        GenerateFamily::Random { n, m, p, seed, out } => (random_instance(n, m, p, seed)?, out),
    };
    match out {
        Some(path) => save_instance(&instance, path)?,
        None => println!("{}", instance.to_json()),
    }
    Ok(())
}

const TRACE_COLUMNS: [&str; 15] = [
    "t", "item", "winner", "gain", "optimal_owner", "competitor", "v_o", "v_c", "b_o", "b_c",
    "marginal_o", "before_count", "loss", "opt_residual", "tie_set",
];

fn trace_row(r: &StepRecord, tie_set: &[usize]) -> Vec<String> {
    // Players are shown 1-based.
    let p = |i: usize| (i + 1).to_string();
    vec![
        r.t.to_string(),
        r.item.to_string(),
        p(r.winner),
        r.gain.to_string(),
        p(r.optimal_owner),
        r.competitor.map(p).unwrap_or_default(),
        r.v_o.to_string(),
        opt_cell(r.v_c),
        r.b_o.to_string(),
        opt_cell(r.b_c),
        r.marginal_o.to_string(),
        opt_cell(r.before_count),
        r.loss.to_string(),
        r.opt_residual.to_string(),
        tie_set.iter().map(|&i| p(i)).collect::<Vec<_>>().join(" "),
    ]
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let instance = args.instance.load()?;
    let m = instance.item_count();
    let perm = match (&args.perm, args.seed) {
        (Some(text), _) => text.parse::<Permutation>()?,
        (None, Some(seed)) => seeded_permutation(m, seed),
        (None, None) => return Err(Failure::usage("give --perm or --seed")),
    };
    let rule = args.ties.rule();
    let (alloc, steps) = run_greedy(&instance, &perm, rule)?;
    let trace = if args.trace {
        let opt = brute_force_opt(&instance, args.opt_budget)?;
        Some((annotate_run(&instance, &perm, rule, &opt)?, opt.welfare))
    } else {
        None
    };
    let hash = instance.content_hash();
    args.output.emit(Format::Table, |format| {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(&json!({
                "tool_version": TOOL_VERSION,
                "instance_hash": hash,
                "seed": args.seed,
                "tie_rule": rule,
                "permutation": perm.items(),
                "allocation": alloc,
                "steps": steps.steps,
                "trace": trace.as_ref().map(|(r, _)| r),
                "opt": trace.as_ref().map(|(_, o)| o),
            }))
            .expect("json"),
            Format::Csv => match &trace {
                Some((records, _)) => csv_text(
                    &TRACE_COLUMNS,
                    records.iter().zip(&steps.steps).map(|(r, s)| trace_row(r, &s.tie_set)),
                ),
                None => csv_text(
                    &["t", "item", "winner", "gain", "marginals", "tie_set"],
                    steps.steps.iter().map(|s| {
                        let join = |v: Vec<String>| v.join(" ");
                        vec![
                            s.t.to_string(),
                            s.item.to_string(),
                            (s.winner + 1).to_string(),
                            s.gain.to_string(),
                            join(s.marginals.iter().map(u64::to_string).collect()),
                            join(s.tie_set.iter().map(|i| (i + 1).to_string()).collect()),
                        ]
                    }),
                ),
            },
            Format::Table => {
                let mut out = String::new();
                let _ = writeln!(out, "instance {hash}  tie rule {rule}  rog {TOOL_VERSION}");
                let _ = writeln!(out, "order    {perm}");
                for (i, bundle) in alloc.bundles.iter().enumerate() {
                    let items: Vec<String> = bundle.iter().map(|j| j.to_string()).collect();
                    let value = instance.valuation(i).value(bundle).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "player {} ({}): {{{}}} value {value}",
                        i + 1,
                        instance.players()[i].name,
                        items.join(",")
                    );
                }
                let _ = writeln!(out, "welfare  {}", alloc.welfare);
                if let Some((records, opt)) = &trace {
                    let _ = writeln!(out, "OPT      {opt}\n");
                    let rows: Vec<_> = records.iter().zip(&steps.steps).map(|(r, s)| trace_row(r, &s.tie_set)).collect();
                    out.push_str(&table(&TRACE_COLUMNS, &rows));
                }
                out
            }
        })
    })
}

fn expect_table(report: &ExpectationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "instance {}  mode {}  tie rule {}  rog {}",
        report.instance_hash, report.mode, report.tie_rule, report.tool_version
    );
    match (report.permutations, report.samples) {
        (Some(p), _) => {
            let _ = writeln!(out, "permutations {p}");
        }
        (None, Some(s)) => {
            let _ = writeln!(out, "samples {s}  seed {}  {}", opt_cell(report.seed), opt_cell(report.generator.as_ref()));
        }
        _ => {}
    }
    for p in &report.players {
        let _ = writeln!(out, "E[v{}] = {}", p.player + 1, p.expected);
    }
    let _ = writeln!(out, "E[welfare] = {}", report.total);
    match report.opt {
        Some(opt) => {
            let source = serde_json::to_value(opt.source).expect("json");
            let _ = writeln!(out, "OPT = {} ({})", opt.welfare, source.as_str().unwrap_or_default());
        }
        None => {
            let _ = writeln!(out, "OPT = unknown (over budget)");
        }
    }
    if let Some(ratio) = report.ratio {
        let _ = writeln!(out, "E[welfare] / OPT = {ratio}");
    }
    out
}

fn expect(args: ExpectArgs) -> Result<(), Failure> {
    let instance = args.instance.load()?;
    let options = ExpectationOptions {
        permutation_budget: args.budgets.perm_budget,
        opt_budget: args.budgets.opt_budget,
        workers: args.budgets.workers,
        opt: None,
    };
    let rule = args.ties.rule();
    let report = match args.mode {
        ModeArg::Exact => exact_expectation(&instance, rule, &options)?,
        ModeArg::Mc => monte_carlo(&instance, rule, args.samples, args.seed, &options)?,
    };
    args.output.emit(Format::Table, |format| {
        Ok(match format {
            Format::Json => report.to_json(),
            Format::Csv => report.to_csv(),
            Format::Table => expect_table(&report),
        })
    })
}

fn parse_claims(list: &str) -> Result<Vec<ClaimId>, Failure> {
    if list.trim() == "all" {
        return Ok(ClaimId::ALL.to_vec());
    }
    let claims = list
        .split(',')
        .map(|name| {
            ClaimId::from_name(name.trim()).ok_or_else(|| {
                let known: Vec<_> = ClaimId::ALL.iter().map(|c| c.name()).collect();
                Failure::usage(format!("unknown claim {name:?}; known: {}", known.join(", ")))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if claims.is_empty() {
        return Err(Failure::usage("empty claim list"));
    }
    Ok(claims)
}

fn status_name(s: ClaimStatus) -> &'static str {
    match s {
        ClaimStatus::Holds => "holds",
        ClaimStatus::Violated => "violated",
        ClaimStatus::Skipped => "skipped",
        ClaimStatus::NotApplicable => "not applicable",
    }
}

fn verify_rows(v: &Verification) -> Vec<Vec<String>> {
    v.reports
        .iter()
        .map(|r| {
            let scope = serde_json::to_value(r.scope).expect("json");
            let mut status = status_name(r.status).to_string();
            if r.claim.is_informational() {
                status.push_str(" (info)");
            }
            vec![
                r.claim.name().to_string(),
                scope.as_str().unwrap_or_default().to_string(),
                status,
                r.margin.map(|m| m.to_string()).unwrap_or_default(),
                r.cases.to_string(),
                r.witness
                    .as_ref()
                    .map(|w| {
                        let order = w
                            .permutation
                            .as_ref()
                            .map(|p| format!(" order {}", p.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")))
                            .unwrap_or_default();
                        format!("{}{order}", w.detail)
                    })
                    .or(r.note.clone())
                    .unwrap_or_default(),
            ]
        })
        .collect()
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let claims = parse_claims(&args.claims)?;
    let instance = args.instance.load()?;
    let config = VerifyConfig {
        rule: args.ties.rule(),
        permutation_budget: args.budgets.perm_budget,
        opt_budget: args.budgets.opt_budget,
        samples: args.samples,
        seed: args.seed,
        workers: args.budgets.workers,
        ..VerifyConfig::default()
    };
    let mut v = verify_instance(&instance, &config)?;
    v.reports.retain(|r| claims.contains(&r.claim));
    let header = ["claim", "scope", "status", "min_slack", "cases", "detail"];
    args.output.emit(Format::Table, |format| {
        Ok(match format {
            Format::Json => v.to_json(),
            Format::Csv => csv_text(&header, verify_rows(&v)),
            Format::Table => {
                let mode = serde_json::to_value(v.mode).expect("json");
                let mut out = format!(
                    "instance {}  tie rule {}  mode {}  runs {}  OPT {}  rog {}\n",
                    v.instance_hash,
                    v.tie_rule,
                    mode.as_str().unwrap_or_default(),
                    v.runs,
                    opt_cell(v.opt_welfare),
                    v.tool_version
                );
                out.push_str(&table(&header, &verify_rows(&v)));
                out
            }
        })
    })?;
    Ok(if !v.all_hold() {
        EXIT_INTERNAL
    } else if args.strict && v.any_skipped() {
        EXIT_SKIPPED
    } else {
        0
    })
}

/// Parses `5,7,9` and `5,7,...,101` (an arithmetic run continued from the two
/// values before `...` up to the value after it).
fn parse_m_list(text: &str) -> Result<Vec<usize>, Failure> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let mut out: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "..." {
            let (&[.., a, b], Some(end)) = (out.as_slice(), tokens.get(i + 1)) else {
                return Err(Failure::usage("`...` needs two values before it and one after"));
            };
            let end: usize = end.parse().map_err(|_| Failure::usage(format!("bad m value {end:?}")))?;
            if b <= a || end < b || (end - b) % (b - a) != 0 {
                return Err(Failure::usage(format!("{a},{b},...,{end} is not an increasing arithmetic run")));
            }
            out.extend((b + (b - a)..=end).step_by(b - a));
            i += 2;
            continue;
        }
        out.push(tokens[i].parse().map_err(|_| Failure::usage(format!("bad m value {:?}", tokens[i])))?);
        i += 1;
    }
    if out.is_empty() {
        return Err(Failure::usage("empty --m-list"));
    }
    Ok(out)
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let header = ["m", "mode", "E[welfare]", "OPT", "ratio", "runs", "seed"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let source = serde_json::to_value(r.opt.source).expect("json");
            vec![
                r.m.to_string(),
                r.mode.to_string(),
                r.e_rog.to_string(),
                format!("{} ({})", r.opt.welfare, source.as_str().unwrap_or_default()),
                r.ratio.to_string(),
                r.runs.to_string(),
                opt_cell(r.seed),
            ]
        })
        .collect();
    table(&header, &cells)
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let ms = parse_m_list(&args.m_list)?;
    let family = match args.family {
        FamilyArg::Paper => Family::Paper,
        FamilyArg::Random => Family::Random { players: args.n, edge_prob: args.p, seed: args.graph_seed },
    };
    let params = SweepParams {
        mode: match args.mode {
            SweepModeArg::Auto => SweepMode::Auto,
            SweepModeArg::Exact => SweepMode::Exact,
            SweepModeArg::Mc => SweepMode::MonteCarlo,
        },
        rule: args.ties.rule(),
        samples: args.samples,
        seed: args.seed,
        permutation_budget: args.budgets.perm_budget,
        opt_budget: args.budgets.opt_budget,
        workers: args.budgets.workers,
    };
    let rows = ratio_sweep(family, &ms, &params)?;
    args.output.emit(Format::Csv, |format| {
        Ok(match format {
            Format::Csv => sweep_csv(&rows),
            Format::Json => serde_json::to_string_pretty(&json!({
                "tool_version": TOOL_VERSION,
                "tie_rule": params.rule,
                "rows": rows,
            }))
            .expect("json"),
            Format::Table => sweep_table(&rows),
        })
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { family } => generate(family).map(|_| 0),
        Command::Run(args) => run(args).map(|_| 0),
        Command::Expect(args) => expect(args).map(|_| 0),
        Command::Verify(args) => verify(args),
        Command::Sweep(args) => sweep(args).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
