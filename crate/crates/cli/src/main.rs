use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use muskit::aspsem::{enumerate_answer_sets, subset_minimal_filter, BruteForceCap};
use muskit::bench::{load_instances, run_bench, write_csv, BenchSpec, Scoreboard};
use muskit::cnf::{parse_dimacs, CnfFormula};
use muskit::encoder::{build_program, emit_aspcore2, EncodingOptions, HeuristicFlags};
use muskit::enumerate::{
    hybrid_enumerate_with, oracle_report, EnumerationResult, HybridPolicy, RunConfig,
};
use muskit::heuristics::{BundleSummary, HeuristicBundle};
use muskit::Budget;

const EXIT_INCOMPLETE: u8 = 10;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "muskit",
    version,
    about = "Enumerate and count minimal unsatisfiable subsets of CNF formulas"
)]
struct Cli {
    /// Output format for results.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    format: Format,

    /// Seed for solver order perturbation; 0 keeps the default order.
    #[arg(long, env = "MUSKIT_SEED", global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the answer-set program for a formula in ASP-Core-2 syntax.
    Encode {
        cnf: PathBuf,
        #[command(flatten)]
        heuristics: HeuristicArgs,
        /// Seconds spent computing pruning information.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
        /// Write to this file instead of standard output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Enumerate MUSes.
    Solve {
        cnf: PathBuf,
        /// Print only the number of MUSes.
        #[arg(long)]
        count: bool,
        #[command(flatten)]
        run: RunArgs,
        /// Also write the JSON result to this file ("-" for standard output).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Count MUSes.
    Count {
        cnf: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Describe a formula and the pruning information computed for it.
    Info {
        cnf: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
        #[arg(long, default_value_t = 5000)]
        threshold: usize,
    },
    /// Classify every clause subset by brute force.
    Oracle {
        cnf: PathBuf,
        /// Largest clause count accepted.
        #[arg(long, default_value_t = 20)]
        cap: usize,
        /// Also enumerate answer sets of the program by exhaustive search.
        #[arg(long)]
        asp: bool,
        /// Largest atom count for the answer-set search.
        #[arg(long, default_value_t = 24)]
        atom_cap: usize,
    },
    /// Run named configurations over a directory of CNF files.
    Bench {
        dir: PathBuf,
        /// JSON file: {"configs": [{"name", "flags", "threshold"}]}.
        #[arg(long)]
        configs: PathBuf,
        /// Seconds per run.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Directory receiving runs.csv and scoreboard.json.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct HeuristicArgs {
    /// Restrict to the lean kernel.
    #[arg(long)]
    h1: bool,
    /// Cardinality bounds on MUS size.
    #[arg(long)]
    h2: bool,
    /// Keep MUSes inside one clause component.
    #[arg(long)]
    h3: bool,
    /// Hit every known correction set.
    #[arg(long)]
    h4: bool,
    /// Literal cover rules.
    #[arg(long)]
    h5: bool,
    /// Disable all pruning. Without any of --h1..--h5 all five are on.
    #[arg(long, conflicts_with_all = ["h1", "h2", "h3", "h4", "h5"])]
    no_heuristics: bool,
}

impl HeuristicArgs {
    fn flags(self) -> HeuristicFlags {
        let chosen = HeuristicFlags {
            h1: self.h1,
            h2: self.h2,
            h3: self.h3,
            h4: self.h4,
            h5: self.h5,
        };
        match (self.no_heuristics, chosen.any()) {
            (true, _) => HeuristicFlags::NONE,
            (false, true) => chosen,
            (false, false) => HeuristicFlags::ALL,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct RunArgs {
    #[command(flatten)]
    heuristics: HeuristicArgs,
    /// Formulas with fewer clauses take the pruned engine.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    threshold: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Stop after this many MUSes.
    #[arg(long)]
    max_results: Option<usize>,
}

impl RunArgs {
    fn budget(&self) -> Result<Budget> {
        let mut budget = Budget::unlimited();
        if let Some(t) = self.timeout {
            budget = budget.with_time_limit(seconds(t)?);
        }
        if let Some(n) = self.max_results {
            budget = budget.with_max_results(n);
        }
        Ok(budget)
    }
}

/// A usage or input problem; reported with exit code 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(e: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(InputError(e))
}

fn seconds(value: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(value)
        .map_err(|_| input_error(anyhow::anyhow!("invalid number of seconds: {value}")))
}

fn read_formula(path: &Path) -> Result<CnfFormula> {
    let bytes = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .context("reading standard input")?;
        buf
    } else {
        fs::read(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(input_error)?
    };
    let parsed = parse_dimacs(&bytes)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input_error)?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed.formula)
}

#[derive(Serialize)]
struct SolveJson<'a> {
    engine: &'static str,
    complete: bool,
    count: usize,
    muses: &'a [Vec<usize>],
    elapsed_ms: u128,
    bundle_summary: Option<&'a BundleSummary>,
}

impl<'a> SolveJson<'a> {
    fn new(r: &'a EnumerationResult) -> Self {
        SolveJson {
            engine: r.engine.name(),
            complete: r.complete,
            count: r.count,
            muses: &r.muses,
            elapsed_ms: r.elapsed.as_millis(),
            bundle_summary: r.bundle.as_ref(),
        }
    }
}

fn join(set: &[usize]) -> String {
    set.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn run_enumeration(
    cnf: &Path,
    run: &RunArgs,
    seed: u64,
) -> Result<(CnfFormula, EnumerationResult)> {
    let formula = read_formula(cnf)?;
    let policy = HybridPolicy::new(run.threshold as usize);
    let config = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let result = hybrid_enumerate_with(
        &formula,
        &policy,
        run.heuristics.flags(),
        &run.budget()?,
        &config,
    );
    if result.complete && result.count == 0 {
        eprintln!("note: formula is satisfiable");
    }
    if !result.complete {
        eprintln!(
            "note: enumeration stopped early; {} MUSes found so far",
            result.count
        );
    }
    Ok((formula, result))
}

fn finish(result: &EnumerationResult) -> u8 {
    if result.complete {
        0
    } else {
        EXIT_INCOMPLETE
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Encode {
            cnf,
            heuristics,
            timeout,
            out: target,
        } => {
            let formula = read_formula(&cnf)?;
            let flags = heuristics.flags();
            let opts = if flags.any() {
                let budget = Budget::unlimited().with_time_limit(seconds(timeout)?);
                EncodingOptions::with_heuristics(flags, HeuristicBundle::compute(&formula, &budget))
            } else {
                EncodingOptions::default()
            };
            let program = build_program(&formula, &opts)?;
            let text = emit_aspcore2(&program, &opts);
            match target {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => out.write_all(text.as_bytes())?,
            }
            Ok(0)
        }
        Command::Solve {
            cnf,
            count,
            run,
            json,
        } => {
            let (_, result) = run_enumeration(&cnf, &run, cli.seed)?;
            let doc = serde_json::to_string_pretty(&SolveJson::new(&result))?;
            let to_stdout = json.as_deref().is_some_and(|p| p.as_os_str() == "-");
            if let Some(p) = json.as_deref().filter(|_| !to_stdout) {
                fs::write(p, format!("{doc}\n"))
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if to_stdout || cli.format == Format::Json {
                writeln!(out, "{doc}")?;
            } else if count {
                writeln!(out, "{}", result.count)?;
            } else {
                for mus in &result.muses {
                    writeln!(out, "{}", join(mus))?;
                }
                writeln!(
                    out,
                    "c engine={} complete={} count={} elapsed_ms={}",
                    result.engine.name(),
                    result.complete,
                    result.count,
                    result.elapsed.as_millis()
                )?;
            }
            Ok(finish(&result))
        }
        Command::Count { cnf, run } => {
            let (_, result) = run_enumeration(&cnf, &run, cli.seed)?;
            if cli.format == Format::Json {
                let doc = serde_json::json!({
                    "engine": result.engine.name(),
                    "complete": result.complete,
                    "count": result.count,
                    "elapsed_ms": result.elapsed.as_millis(),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                writeln!(out, "{}", result.count)?;
            }
            Ok(finish(&result))
        }
        Command::Info {
            cnf,
            timeout,
            threshold,
        } => {
            if threshold == 0 {
                return Err(input_error(anyhow::anyhow!("threshold must be positive")));
            }
            let formula = read_formula(&cnf)?;
            let budget = Budget::unlimited().with_time_limit(seconds(timeout)?);
            let bundle = HeuristicBundle::compute(&formula, &budget);
            let summary = bundle.summary();
            let engine = HybridPolicy::new(threshold)
                .engine_for(formula.ncl())
                .name();
            if cli.format == Format::Json {
                let doc = serde_json::json!({
                    "nvars": formula.nvars(),
                    "ncl": formula.ncl(),
                    "engine": engine,
                    "bundle_summary": summary,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                writeln!(out, "variables: {}", formula.nvars())?;
                writeln!(out, "clauses: {}", formula.ncl())?;
                writeln!(out, "engine: {engine}")?;
                writeln!(out, "lean kernel: {} clauses", summary.kernel_size)?;
                writeln!(out, "MUS size bounds: [{}, {}]", summary.lb, summary.ub)?;
                writeln!(out, "components: {}", summary.components)?;
                writeln!(
                    out,
                    "correction sets: {}{}",
                    summary.mcs_count,
                    if summary.mcs_complete { " (all)" } else { "" }
                )?;
                writeln!(out, "cover rules: {}", summary.cover_rules)?;
            }
            Ok(0)
        }
        Command::Oracle {
            cnf,
            cap,
            asp,
            atom_cap,
        } => {
            let formula = read_formula(&cnf)?;
            let report = oracle_report(&formula, cap).map_err(|e| input_error(e.into()))?;
            let answer_sets = if asp {
                let program = build_program(&formula, &EncodingOptions::default())?;
                let all = enumerate_answer_sets(&program, BruteForceCap(atom_cap))
                    .map_err(|e| input_error(e.into()))?;
                let minimal = subset_minimal_filter(&all, &program.selector_atoms());
                Some((all.len(), minimal.len()))
            } else {
                None
            };
            if cli.format == Format::Json {
                let mut doc = serde_json::json!({
                    "cores": report.cores,
                    "mcses": report.mcses,
                    "muses": report.muses,
                });
                if let Some((all, minimal)) = answer_sets {
                    doc["answer_sets"] = all.into();
                    doc["minimal_answer_sets"] = minimal.into();
                }
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                for (name, sets) in [
                    ("core", &report.cores),
                    ("mcs", &report.mcses),
                    ("mus", &report.muses),
                ] {
                    for s in sets {
                        writeln!(out, "{name} {}", join(s))?;
                    }
                }
                writeln!(
                    out,
                    "c cores={} mcses={} muses={}",
                    report.cores.len(),
                    report.mcses.len(),
                    report.muses.len()
                )?;
                if let Some((all, minimal)) = answer_sets {
                    writeln!(out, "c answer_sets={all} minimal_answer_sets={minimal}")?;
                }
            }
            Ok(0)
        }
        Command::Bench {
            dir,
            configs,
            timeout,
            jobs,
            out: out_dir,
        } => {
            let text = fs::read_to_string(&configs)
                .with_context(|| format!("reading {}", configs.display()))
                .map_err(input_error)?;
            let spec = BenchSpec::from_json(&text).map_err(|e| input_error(e.into()))?;
            let instances = load_instances(&dir).map_err(|e| input_error(e.into()))?;
            if instances.is_empty() {
                bail!(input_error(anyhow::anyhow!(
                    "no .cnf files in {}",
                    dir.display()
                )));
            }
            let run = RunConfig {
                seed: cli.seed,
                ..RunConfig::default()
            };
            let records = run_bench(&instances, &spec.configs, seconds(timeout)?, jobs, &run);
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            write_csv(&out_dir.join("runs.csv"), &records)?;
            let board = Scoreboard::from_records(&records)?;
            board.write_json(&out_dir.join("scoreboard.json"))?;
            if cli.format == Format::Json {
                writeln!(out, "{}", serde_json::to_string_pretty(&board)?)?;
            } else {
                writeln!(
                    out,
                    "{:<20} {:>10} {:>8} {:>12}",
                    "config", "avg rank", "solved", "PAR2"
                )?;
                for c in &board.configs {
                    writeln!(
                        out,
                        "{:<20} {:>10.3} {:>8} {:>12.3}",
                        c.config,
                        c.average_rank,
                        format!("{}/{}", c.solved, c.runs),
                        c.par2
                    )?;
                }
                writeln!(out, "c ties: {}", board.tie_rule)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
