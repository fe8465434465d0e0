//! Command-line front end: robustness checks on graph files, seed sweeps of
//! scenario files, built-in reproduction presets and graph generation.
//!
//! Each command returns its report text and exit code so it can be driven
//! from tests as well as from the `rqc` binary.

pub mod presets;
pub mod scenario_file;
pub mod sweep;

use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rqc_core::graph::{gen_complete_bipartite, gen_cycle, gen_wheel, DirectedGraph, GraphError};
use rqc_core::robustness::{
    is_rs_robust_with, is_strictly_robust_with, CheckOptions, FaultModel, RobustnessError,
};
use thiserror::Error;

use presets::{format_lemma_table, lemma_table, run_preset, Preset};
use scenario_file::{ScenarioFile, ScenarioFileError};
use sweep::{sweep, write_csv, write_plotdata, SweepSummary};

/// Exit code when the checked property holds or every expectation is met.
pub const EXIT_OK: i32 = 0;
/// Exit code when the checked property fails or an expectation is missed.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage errors and unreadable input.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error(transparent)]
    Generate(#[from] GraphError),
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
    #[error(transparent)]
    Scenario(#[from] ScenarioFileError),
    #[error(transparent)]
    Engine(#[from] rqc_core::engine::EngineError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "rqc",
    version,
    about = "Resilient quantized consensus: robustness checks and QMW-MSR simulation"
)]
pub struct Cli {
    /// Offset every seed by the value of the RQC_SEED environment variable.
    #[arg(long, global = true)]
    pub seed_env: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check (r,s)-robustness or r-strict robustness with l hops.
    ///
    /// Exit code 0 if the property holds, 1 if it fails, 2 on usage errors.
    Check(CheckArgs),
    /// Run a scenario file over a range of seeds.
    Run(RunArgs),
    /// Run a built-in reproduction preset and compare with its expected outcome.
    Repro(ReproArgs),
    /// Check the cycle, complete bipartite and wheel families at their claimed hop counts.
    LemmaTable,
    /// Print a generated graph in the text format read by `check`.
    GenGraph(GenGraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Total,
    Local,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Graph file: `n <count>` then one `<src> <dst>` or `u <a> <b>` per line.
    pub graph: PathBuf,
    #[arg(short, long, default_value_t = 2)]
    pub r: usize,
    /// Ignored with --strict.
    #[arg(short, long, default_value_t = 1)]
    pub s: usize,
    #[arg(short, long, default_value_t = 1)]
    pub l: usize,
    /// Fault budget of the fault model.
    #[arg(short, long, default_value_t = 1)]
    pub f: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::Total)]
    pub model: ModelArg,
    /// Check r-strict robustness instead of (r,s)-robustness.
    #[arg(long)]
    pub strict: bool,
    /// Check N random subset pairs instead of all of them. A failure is
    /// conclusive; a pass is not.
    #[arg(long, value_name = "N")]
    pub sample: Option<usize>,
    /// Seed for --sample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Seed range `k0..k1` (end exclusive). Default: the file's seed and num_seeds.
    #[arg(long, value_parser = parse_seed_range)]
    pub seeds: Option<Range<u64>>,
    /// Directory for per-seed trace CSVs (`k,node,value,updated,role`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Directory for per-seed value matrices (one row per step).
    #[arg(long)]
    pub plotdata: Option<PathBuf>,
    /// Override the file's horizon.
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Preset name, or `all`.
    pub preset: String,
    #[arg(long, value_parser = parse_seed_range, default_value = "0..20")]
    pub seeds: Range<u64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub plotdata: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Cycle,
    Wheel,
    Bipartite,
    SixNodeWheel,
    InterleavedK66,
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Node count (cycle, wheel) or first side (bipartite).
    pub n: Option<usize>,
    /// Second side (bipartite).
    pub n2: Option<usize>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `k0..k1` with `k0 < k1`.
pub fn parse_seed_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected `k0..k1`, got `{s}`"))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad range start `{a}`"))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad range end `{b}`"))?;
    if a >= b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(a..b)
}

/// Output text and exit code of a command.
pub type Outcome = (String, i32);

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let base = if cli.seed_env {
        base_seed_from_env()?
    } else {
        0
    };
    match &cli.command {
        Command::Check(a) => cmd_check(a, base),
        Command::Run(a) => cmd_run(a, base),
        Command::Repro(a) => cmd_repro(a, base),
        Command::LemmaTable => Ok(cmd_lemma_table()),
        Command::GenGraph(a) => cmd_gen_graph(a),
    }
}

fn base_seed_from_env() -> Result<u64, CliError> {
    match std::env::var("RQC_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!("RQC_SEED must be an unsigned integer, got `{v}`"))
        }),
        Err(_) => Err(CliError::Usage(
            "--seed-env given but RQC_SEED is not set".into(),
        )),
    }
}

fn shift(range: &Range<u64>, base: u64) -> Range<u64> {
    range.start + base..range.end + base
}

pub fn load_graph(path: &Path) -> Result<DirectedGraph, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.into(),
        source,
    })?;
    text.parse().map_err(|source| CliError::Graph {
        path: path.into(),
        source,
    })
}

pub fn cmd_check(a: &CheckArgs, base_seed: u64) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let model = match a.model {
        ModelArg::Total => FaultModel::total(a.f),
        ModelArg::Local => FaultModel::local(a.f, a.l),
    };
    let opts = match a.sample {
        Some(count) => CheckOptions::sampled(count, a.seed.wrapping_add(base_seed)),
        None => CheckOptions::exhaustive(),
    };
    let start = Instant::now();
    let verdict = if a.strict {
        is_strictly_robust_with(&g, a.r, a.l, model, &opts)?
    } else {
        is_rs_robust_with(&g, a.r, a.s, a.l, model, &opts)?
    };
    let elapsed = start.elapsed().as_millis();
    let mut out = String::new();
    writeln!(out, "graph = {}", a.graph.display()).unwrap();
    writeln!(out, "nodes = {}", g.node_count()).unwrap();
    writeln!(out, "property = {}", if a.strict { "strict" } else { "rs" }).unwrap();
    writeln!(out, "r = {}", a.r).unwrap();
    writeln!(out, "s = {}", if a.strict { 1 } else { a.s }).unwrap();
    writeln!(out, "l = {}", a.l).unwrap();
    writeln!(out, "model = {model}").unwrap();
    writeln!(
        out,
        "mode = {}",
        if verdict.exhaustive {
            "exhaustive"
        } else {
            "sampled"
        }
    )
    .unwrap();
    writeln!(
        out,
        "verdict = {}",
        if verdict.holds { "holds" } else { "fails" }
    )
    .unwrap();
    match verdict.witness {
        Some(w) => writeln!(out, "witness = V1={} V2={} F={}", w.v1, w.v2, w.fault).unwrap(),
        None => writeln!(out, "witness = none").unwrap(),
    }
    writeln!(out, "elapsed_ms = {elapsed}").unwrap();
    writeln!(out, "pairs_checked = {}", verdict.pairs_checked).unwrap();
    Ok((out, if verdict.holds { EXIT_OK } else { EXIT_FAIL }))
}

pub fn cmd_run(a: &RunArgs, base_seed: u64) -> Result<Outcome, CliError> {
    let file = ScenarioFile::load(&a.scenario)?;
    let dir = a.scenario.parent().unwrap_or(Path::new("."));
    let template = file.to_scenario(dir)?;
    let seeds = a
        .seeds
        .clone()
        .unwrap_or(file.seed..file.seed + file.num_seeds.max(1));
    let scenarios: Vec<_> = shift(&seeds, base_seed)
        .map(|seed| {
            let mut sc = template.clone().with_seed(seed);
            if let Some(h) = a.horizon {
                sc.horizon = Some(h);
            }
            sc
        })
        .collect();
    let traces = sweep(&scenarios)?;
    let csv = a
        .csv
        .clone()
        .or_else(|| file.output.csv.as_ref().map(|p| dir.join(p)));
    let plot = a
        .plotdata
        .clone()
        .or_else(|| file.output.plotdata.as_ref().map(|p| dir.join(p)));
    write_outputs(csv.as_deref(), plot.as_deref(), &traces)?;
    let summary = SweepSummary::from_traces(&traces);
    let mut out = format!("scenario = {}\n", a.scenario.display());
    out.push_str(&summary.to_string());
    let clean = summary.safety_violations == 0 && summary.preservation_violations == 0;
    Ok((out, if clean { EXIT_OK } else { EXIT_FAIL }))
}

fn write_outputs(
    csv: Option<&Path>,
    plot: Option<&Path>,
    traces: &[rqc_core::engine::Trace],
) -> Result<(), CliError> {
    if let Some(dir) = csv {
        write_csv(dir, traces).map_err(|source| CliError::Write {
            path: dir.into(),
            source,
        })?;
    }
    if let Some(dir) = plot {
        write_plotdata(dir, traces).map_err(|source| CliError::Write {
            path: dir.into(),
            source,
        })?;
    }
    Ok(())
}

pub fn cmd_repro(a: &ReproArgs, base_seed: u64) -> Result<Outcome, CliError> {
    let presets: Vec<Preset> = if a.preset == "all" {
        Preset::ALL.to_vec()
    } else {
        vec![a.preset.parse().map_err(CliError::Usage)?]
    };
    let seeds = shift(&a.seeds, base_seed);
    let mut out = String::new();
    let mut all_pass = true;
    for p in presets {
        let report = run_preset(p, seeds.clone());
        all_pass &= report.pass();
        out.push_str(&report.to_string());
        out.push('\n');
        if (a.csv.is_some() || a.plotdata.is_some()) && p.scenario(0).is_some() {
            let scenarios: Vec<_> = seeds.clone().filter_map(|s| p.scenario(s)).collect();
            let traces = sweep(&scenarios)?;
            let sub = |d: &PathBuf| d.join(p.name());
            write_outputs(
                a.csv.as_ref().map(sub).as_deref(),
                a.plotdata.as_ref().map(sub).as_deref(),
                &traces,
            )?;
        }
    }
    Ok((out, if all_pass { EXIT_OK } else { EXIT_FAIL }))
}

pub fn cmd_lemma_table() -> Outcome {
    let rows = lemma_table();
    let ok = rows.iter().all(|r| r.pass());
    (
        format_lemma_table(&rows),
        if ok { EXIT_OK } else { EXIT_FAIL },
    )
}

pub fn cmd_gen_graph(a: &GenGraphArgs) -> Result<Outcome, CliError> {
    let need = |v: Option<usize>, what: &str| {
        v.ok_or_else(|| CliError::Usage(format!("{what} is required for this family")))
    };
    let g = match a.family {
        Family::Cycle => gen_cycle(need(a.n, "n")?)?,
        Family::Wheel => gen_wheel(need(a.n, "n")?)?,
        Family::Bipartite => gen_complete_bipartite(need(a.n, "n")?, need(a.n2, "n2")?)?,
        Family::SixNodeWheel => presets::six_node_wheel(),
        Family::InterleavedK66 => presets::interleaved_k66(),
    };
    let text = g.to_text();
    match &a.out {
        Some(path) => {
            fs::write(path, &text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            Ok((format!("wrote {}\n", path.display()), EXIT_OK))
        }
        None => Ok((text, EXIT_OK)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("0..20").unwrap(), 0..20);
        assert_eq!(parse_seed_range("5..6").unwrap(), 5..6);
        assert!(parse_seed_range("5..5").is_err());
        assert!(parse_seed_range("5").is_err());
        assert!(parse_seed_range("a..3").is_err());
    }

    #[test]
    fn parses_command_lines() {
        let cli = Cli::try_parse_from([
            "rqc", "check", "g.txt", "-r", "2", "-s", "2", "-l", "4", "-f", "1", "--strict",
        ])
        .unwrap();
        match cli.command {
            Command::Check(a) => assert!(a.strict && a.l == 4),
            _ => panic!(),
        }
        assert!(Cli::try_parse_from(["rqc", "run", "x.toml", "--seeds", "3..1"]).is_err());
        assert!(
            Cli::try_parse_from(["rqc", "--seed-env", "lemma-table"])
                .unwrap()
                .seed_env
        );
    }
}
