//! `lame-spectra`: monodromy, spectral sets and blow-up data from the command line.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure. Errors
//! are reported on stderr as `{"error": {"kind": ..., "message": ...}}`.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{Command, Format, JobConfig};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lame-spectra", version, about = "Monodromy, spectral sets and blow-up data for generalized Lamé equations")]
struct Cli {
    #[command(subcommand)]
    command: Option<Sub>,
    /// Job config (JSON). An artifact written by this tool is accepted as well.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true, env = "LAME_SPECTRA_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Invariants g2, g3, e_k and quasi-periods of a torus.
    Torus(Params),
    /// Monodromy matrices and their classification.
    Monodromy(Params),
    /// Compare traces with the Lamé equation at B̃ = T² - 2℘(p).
    EquivCheck(Params),
    /// Trace the spectral set σ_j as polyline arcs.
    SpectralSet(Params),
    /// Roots of the spectral polynomial and the regime of ℘(p).
    Endpoints(Params),
    /// Zero τ of the premodular form Z(r, s, ·).
    PremodularZero(Params),
    /// Blow-up sets of the curvature equation.
    Blowup(Params),
}

/// Complex values are written `re,im`.
#[derive(Args, Default)]
struct Params {
    #[arg(long, value_parser = pair, allow_hyphen_values = true)]
    tau: Option<[f64; 2]>,
    #[arg(long, value_parser = pair, allow_hyphen_values = true)]
    p: Option<[f64; 2]>,
    /// ℘(p); p is recovered by inversion.
    #[arg(long = "wp-p", visible_alias = "p-by-wp", value_parser = pair, allow_hyphen_values = true)]
    wp_p: Option<[f64; 2]>,
    #[arg(long = "T", value_parser = pair, allow_hyphen_values = true)]
    t: Option<[f64; 2]>,
    /// Parameter of the even branch.
    #[arg(long = "A", value_parser = pair, allow_hyphen_values = true)]
    a: Option<[f64; 2]>,
    /// Lamé parameter B̃.
    #[arg(long = "btilde", visible_alias = "Btilde", value_parser = pair, allow_hyphen_values = true)]
    btilde: Option<[f64; 2]>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Period index, 1 or 2.
    #[arg(long)]
    j: Option<u8>,
    /// `re_min,re_max,im_min,im_max`
    #[arg(long, value_parser = quad, allow_hyphen_values = true)]
    window: Option<[f64; 4]>,
    /// Grid nodes per side.
    #[arg(long)]
    resolution: Option<usize>,
    /// Local error tolerance of the ODE integrator.
    #[arg(long)]
    tol: Option<f64>,
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    floats::<2>(s)
}

fn quad(s: &str) -> Result<[f64; 4], String> {
    floats::<4>(s)
}

impl Sub {
    fn into_config(self) -> JobConfig {
        let (command, p) = match self {
            Sub::Torus(p) => (Command::Torus, p),
            Sub::Monodromy(p) => (Command::Monodromy, p),
            Sub::EquivCheck(p) => (Command::EquivCheck, p),
            Sub::SpectralSet(p) => (Command::SpectralSet, p),
            Sub::Endpoints(p) => (Command::Endpoints, p),
            Sub::PremodularZero(p) => (Command::PremodularZero, p),
            Sub::Blowup(p) => (Command::Blowup, p),
        };
        JobConfig {
            command,
            tau: p.tau,
            p: p.p,
            wp_p: p.wp_p,
            t: p.t,
            a: p.a,
            btilde: p.btilde,
            r: p.r,
            s: p.s,
            j: p.j,
            window: p.window,
            resolution: p.resolution,
            tol: p.tol,
            format: Format::Json,
            out: None,
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<lame_spectra::Error> for Failure {
    fn from(e: lame_spectra::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Reads a job config, or the `config` member of an earlier artifact.
fn load_config(path: &PathBuf) -> Result<JobConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let inner = match value.get("config") {
        Some(c) if value.get("provenance").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(path), None) => load_config(&path)?,
        (None, Some(sub)) => sub.into_config(),
        (Some(_), Some(_)) => return Err(Failure::Config("give either a subcommand or --config, not both".into())),
        (None, None) => return Err(Failure::Config("no subcommand given (see --help)".into())),
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    cfg.validate().map_err(|e| Failure::Config(e.0))?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Config(e.to_string()))?;
    }
    let report = commands::run(&cfg)?;
    let bytes = match cfg.format {
        Format::Json => output::json_artifact(&cfg, &report),
        Format::Csv => output::csv_artifact(&cfg, &report.arc_rows().unwrap_or_default()),
    }
    .map_err(|e| Failure::Numerical(e.to_string()))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(|e| Failure::Numerical(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, message, code) = match f {
                Failure::Config(m) => ("config", m, 2),
                Failure::Numerical(m) => ("numerical", m, 3),
            };
            let err = serde_json::json!({ "error": { "kind": kind, "message": message } });
            eprintln!("{err}");
            ExitCode::from(code)
        }
    }
}
