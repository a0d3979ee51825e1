//! `parbayes`: posterior marginals of a PHN network from the command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use parbayes_core::model::phn::{parse_evidence, parse_network};
use parbayes_core::{run_query, Algorithm, Engine, Error, Evidence, Network, QueryResult};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgoArg {
    Auto,
    Tree,
    Polytree,
    Junction,
    Oracle,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Auto => Algorithm::Auto,
            AlgoArg::Tree => Algorithm::Tree,
            AlgoArg::Polytree => Algorithm::Polytree,
            AlgoArg::Junction => Algorithm::Junction,
            AlgoArg::Oracle => Algorithm::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

/// Exact posterior marginals for discrete Bayesian networks.
#[derive(Debug, Parser)]
#[command(name = "parbayes", version)]
struct Args {
    /// Network file in PHN format.
    #[arg(long)]
    net: PathBuf,
    /// Evidence file with `evidence <id> <value>` lines.
    #[arg(long)]
    evidence: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    algo: AlgoArg,
    /// Include round statistics in text output.
    #[arg(long)]
    stats: bool,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputFormat,
    /// Simulate rounds on one thread instead of the thread pool.
    #[arg(long)]
    sequential: bool,
}

const EXIT_INPUT: u8 = 1;
const EXIT_IMPOSSIBLE: u8 = 2;
const EXIT_INTRACTABLE: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ImpossibleEvidence(_) => EXIT_IMPOSSIBLE,
        Error::Intractable(_) | Error::ConditionerCap { .. } => EXIT_INTRACTABLE,
        _ => EXIT_INPUT,
    }
}

fn read(path: &Path) -> Result<String, (u8, String)> {
    std::fs::read_to_string(path)
        .map_err(|e| (EXIT_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, err: Error) -> (u8, String) {
    (exit_code(&err), format!("{}: {err}", path.display()))
}

fn run(args: &Args) -> Result<String, (u8, String)> {
    let net: Network = parse_network(&read(&args.net)?).map_err(|e| with_path(&args.net, e))?;
    let evidence = match &args.evidence {
        Some(p) => parse_evidence(&read(p)?).map_err(|e| with_path(p, e))?,
        None => Evidence::empty(),
    };
    let engine = if args.sequential {
        Engine::sequential()
    } else {
        Engine::parallel()
    };
    let result = run_query(&net, &evidence, args.algo.into(), &engine)
        .map_err(|e| (exit_code(&e), e.to_string()))?;
    Ok(match args.output {
        OutputFormat::Json => serde_json::to_string_pretty(&result).expect("serializable") + "\n",
        OutputFormat::Text => render_text(&result, args.stats),
    })
}

fn render_text(r: &QueryResult, stats: bool) -> String {
    let mut out = String::new();
    let topology = r
        .topology
        .map_or("disconnected".to_string(), |t| t.to_string());
    writeln!(out, "algorithm: {} ({topology})", r.algo).unwrap();
    for (id, dist) in &r.variables {
        let probs: Vec<String> = dist.iter().map(|p| format!("{p:.6}")).collect();
        writeln!(out, "A{id}: {}", probs.join(" ")).unwrap();
    }
    if stats {
        let s = &r.stats;
        writeln!(out, "rounds: {}", s.rounds).unwrap();
        writeln!(out, "total work: {}", s.total_work).unwrap();
        writeln!(out, "peak step work: {}", s.peak_step_work).unwrap();
        writeln!(out, "active per round: {:?}", s.per_round_active).unwrap();
        if let (Some(w), Some(sep)) = (r.width, r.separator_size) {
            writeln!(out, "width: {w}, separator size: {sep}").unwrap();
        }
        if let Some(order) = &r.ordering {
            writeln!(out, "ordering: {order:?}").unwrap();
        }
        if let Some(cliques) = &r.cliques {
            writeln!(out, "cliques: {cliques:?}").unwrap();
        }
    }
    out
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(EXIT_INPUT);
        }
        Err(e) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&args) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
