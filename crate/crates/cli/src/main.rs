//! `pbnc`: reproduction driver for the truncated counterexample experiments.
//!
//! Every run resolves its configuration (JSON document, then flags), writes
//! `payload.json` and `report.json` into `<out>/<command>-<config hash>/` and
//! exits with 0 when every check passes, 1 on a failed check, 2 on a
//! configuration error and 3 on numerical non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use config::{CliError, CliResult, Format, Globals};

#[derive(Parser, Debug)]
#[command(name = "pbnc", version, about = "Polynomially bounded operators that are not similar to contractions")]
struct Cli {
    /// JSON configuration document; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parent directory of the per-run output directory [default: runs].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stdout format; `csv` also writes `table.csv` into the run directory.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; the PBNC_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficient-system checks: relations, row bound, tensor certificates.
    Coeffs(CoeffsArgs),
    /// Block Hankel construction and bound scans.
    Hankel(HankelArgs),
    /// pb probe and cb certificate for one operator bundle.
    Certify(CertifyArgs),
    /// Monte Carlo martingale identities.
    Mc(McArgs),
    /// Haar-bundle experiment at a target constant over an n grid.
    Fcn(FcnArgs),
    /// certify over an n × eps grid.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize)]
struct CoeffsArgs {
    /// car | haar_unitary | basis_vector
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    save_system: bool,
}

#[derive(Args, Debug, Serialize)]
struct HankelArgs {
    /// lacunary | ones
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplier: Option<String>,
    /// Truncation sizes, comma separated.
    #[arg(long = "d", value_delimiter = ',')]
    #[serde(rename = "d_list", skip_serializing_if = "Option::is_none")]
    d_list: Option<Vec<usize>>,
    /// Probe families, comma separated: monomial, fejer, random, ascent.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    families: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    random_polys: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ascent_restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ascent_steps: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    /// car | haar_unitary | basis_vector
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    random_polys: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ascent_steps: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct McArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    polys: Option<usize>,
    /// Checks to run, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<Vec<String>>,
}

#[derive(Args, Debug, Serialize)]
struct FcnArgs {
    /// Sizes n, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    ns: Option<Vec<usize>>,
    /// Target constant c > 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    ns: Option<Vec<usize>>,
    #[arg(long = "eps", value_delimiter = ',')]
    #[serde(rename = "eps_list", skip_serializing_if = "Option::is_none")]
    eps_list: Option<Vec<f64>>,
}

fn overrides<T: Serialize>(args: &T, seed: Option<u64>) -> CliResult<Value> {
    let mut v = serde_json::to_value(args)?;
    if let (Some(s), Value::Object(m)) = (seed, &mut v) {
        m.insert("seed".into(), s.into());
    }
    Ok(v)
}

fn thread_count(flag: Option<usize>, doc: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var("PBNC_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("PBNC_THREADS must be a positive integer, got {s:?}"))),
        Err(_) => Ok(flag.or(doc)),
    }
}

/// Returns the process exit code.
fn run(cli: Cli) -> CliResult<u8> {
    let doc = config::load_document(cli.config.as_deref())?;
    let globals = Globals {
        out: cli.out.or(doc.out).unwrap_or_else(|| PathBuf::from("runs")),
        format: cli.format.or(doc.format).unwrap_or(Format::Json),
        threads: thread_count(cli.threads, doc.threads)?,
    };
    if let Some(t) = globals.threads {
        if t == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let (name, echo, outcome) = match &cli.command {
        Command::Coeffs(a) => {
            let (cfg, echo) = config::resolve::<commands::CoeffsConfig>(&doc.params, overrides(a, cli.seed)?)?;
            let dir = output::run_dir(&globals.out, "coeffs", &echo);
            ("coeffs", echo, commands::coeffs(&cfg, &dir)?)
        }
        Command::Hankel(a) => {
            let (cfg, echo) = config::resolve::<commands::HankelConfig>(&doc.params, overrides(a, cli.seed)?)?;
            ("hankel", echo, commands::hankel(&cfg)?)
        }
        Command::Certify(a) => {
            let (cfg, echo) = config::resolve::<commands::CertifyConfig>(&doc.params, overrides(a, cli.seed)?)?;
            ("certify", echo, commands::certify_cmd(&cfg)?)
        }
        Command::Mc(a) => {
            let (cfg, echo) = config::resolve::<commands::McConfig>(&doc.params, overrides(a, cli.seed)?)?;
            ("mc", echo, commands::mc(&cfg)?)
        }
        Command::Fcn(a) => {
            let (cfg, echo) = config::resolve::<commands::FcnConfig>(&doc.params, overrides(a, cli.seed)?)?;
            ("fcn", echo, commands::fcn(&cfg)?)
        }
        Command::Sweep(a) => {
            let (cfg, echo) = config::resolve::<commands::SweepConfig>(&doc.params, overrides(a, cli.seed)?)?;
            ("sweep", echo, commands::sweep(&cfg)?)
        }
    };
    let dir = output::run_dir(&globals.out, name, &echo);
    let report = output::write_run(&dir, name, &echo, &outcome, globals.format, start.elapsed().as_millis())?;
    match (globals.format, &outcome.table) {
        (Format::Csv, Some(t)) => print!("{}", t.0),
        _ => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: value {} (expected {})", c.name, c.value, c.threshold);
    }
    Ok(if outcome.checks.iter().all(|c| c.pass) { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
