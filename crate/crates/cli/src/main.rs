//! `dichromat` command-line front end.
//!
//! Results go to stdout, diagnostics to stderr. Exit status: 0 on success,
//! 1 on invalid input, 2 when a size cap is exceeded, 3 when a checked bound
//! fails.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use dichromat::bounds::{verify, Check};
use dichromat::dp::{achievable_set, leaf_profile, node_profile, witness, ProfileKind};
use dichromat::metric::{iso_profile_lower_bound, params_from_str, width_lower_bound, BlockParams};
use dichromat::sweepout::{certify, default_step_bound, generate_trace, Strategy};
use dichromat::{Caps, Error};

use output::{dot_graph, json, profile_csv, profile_json, trace_csv};

const MAX_M_ENV: &str = "DICHROMAT_MAX_M";

#[derive(Debug, Parser)]
#[command(name = "dichromat", version, about = "Dichromatic edge profiles of binary trees and the width bounds built on them")]
struct Cli {
    /// Output format. Defaults to csv for `profile`, dot for `export-dot` and json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Raise or lower every dynamic-programming depth cap. Overrides DICHROMAT_MAX_M.
    #[arg(long, global = true)]
    max_m: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Node,
    Leaf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal dichromatic edge counts indexed by black nodes or black leaves.
    Profile {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short = 'm')]
        m: u32,
    },
    /// Black-node counts achievable with exactly `d` dichromatic edges.
    Bset {
        #[arg(short = 'm')]
        m: u32,
        #[arg(short = 'd')]
        d: usize,
    },
    /// Check one of the tree bounds at depth `m`.
    Verify {
        #[arg(long, value_parser = Check::from_str)]
        which: Check,
        #[arg(short = 'm')]
        m: u32,
    },
    /// Width lower bound for the block metric.
    WidthBound {
        #[arg(short = 'm')]
        m: u32,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Lower bound on the isoperimetric profile.
    IsoBound {
        #[arg(short = 'm')]
        m: u32,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Generate a sweepout and certify its special slice.
    Sweepout {
        #[arg(long, value_parser = Strategy::from_str)]
        strategy: Strategy,
        #[arg(short = 'm')]
        m: u32,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest volume change per step. Defaults to alpha / 4.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Graphviz drawing of an optimal coloring.
    ExportDot {
        #[arg(short = 'm')]
        m: u32,
        /// `b=K` for K black nodes or `t=K` for K black leaves.
        #[arg(long, value_parser = parse_witness)]
        witness: (ProfileKind, usize),
    },
}

fn parse_witness(s: &str) -> Result<(ProfileKind, usize), String> {
    let (key, value) = s.split_once('=').ok_or("expected b=K or t=K")?;
    let kind = match key {
        "b" => ProfileKind::Node,
        "t" => ProfileKind::Leaf,
        _ => return Err(format!("unknown witness index '{key}', expected b or t")),
    };
    let k = value.parse().map_err(|e| format!("bad count '{value}': {e}"))?;
    Ok((kind, k))
}

enum Failure {
    Invalid(String),
    Capacity(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            Error::CertificateViolation(_) => Failure::Verification(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Capacity(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(s) | Failure::Capacity(s) | Failure::Verification(s) => s,
        }
    }
}

/// Output text plus whether a checked bound failed.
struct Outcome {
    text: String,
    failed: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, failed: None }
    }
}

fn caps(flag: Option<u32>) -> Result<Caps, Failure> {
    let from_env = match std::env::var(MAX_M_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u32>()
                .map_err(|_| Failure::Invalid(format!("{MAX_M_ENV} must be a non-negative integer, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    Ok(match flag.or(from_env) {
        Some(max_m) => Caps::default().with_dp_cap(max_m),
        None => Caps::default(),
    })
}

fn load_params(path: Option<&PathBuf>) -> Result<BlockParams, Failure> {
    match path {
        None => Ok(BlockParams::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Invalid(format!("cannot read params file {}: {e}", p.display())))?;
            params_from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))
        }
    }
}

fn check_format(cmd: &Command, requested: Option<Format>) -> Result<Format, Failure> {
    let (default, allowed): (Format, &[Format]) = match cmd {
        Command::Profile { .. } => (Format::Csv, &[Format::Csv, Format::Json]),
        Command::Sweepout { .. } => (Format::Json, &[Format::Json, Format::Csv]),
        Command::ExportDot { .. } => (Format::Dot, &[Format::Dot, Format::Json]),
        _ => (Format::Json, &[Format::Json]),
    };
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Invalid(format!("format {f:?} is not available for this command").to_lowercase()))
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let format = check_format(&cli.command, cli.format)?;
    let caps = caps(cli.max_m)?;
    match cli.command {
        Command::Profile { kind, m } => {
            let p = match kind {
                Kind::Node => node_profile(m, &caps)?,
                Kind::Leaf => leaf_profile(m, &caps)?,
            };
            Ok(Outcome::ok(match format {
                Format::Csv => profile_csv(&p),
                _ => profile_json(&p),
            }))
        }
        Command::Bset { m, d } => Ok(Outcome::ok(json(&achievable_set(m, d, &caps)?))),
        Command::Verify { which, m } => {
            let report = verify(m, which, &caps)?;
            let failed = (!report.holds).then(|| {
                format!(
                    "{} fails at m = {}: computed {} against bound {}",
                    which.name(),
                    m,
                    report.computed_value,
                    report.paper_bound
                )
            });
            Ok(Outcome { text: json(&report), failed })
        }
        Command::WidthBound { m, params } => {
            let p = load_params(params.as_ref())?;
            Ok(Outcome::ok(json(&width_lower_bound(m, &p, &caps)?)))
        }
        Command::IsoBound { m, params } => {
            let p = load_params(params.as_ref())?;
            Ok(Outcome::ok(json(&iso_profile_lower_bound(m, &p, &caps)?)))
        }
        Command::Sweepout { strategy, m, params, seed, delta } => {
            let p = load_params(params.as_ref())?;
            if m > caps.leaf_profile {
                return Err(Failure::Capacity(
                    Error::Capacity { what: "sweepout", requested: m, cap: caps.leaf_profile }.to_string(),
                ));
            }
            let delta = delta.unwrap_or_else(|| default_step_bound(&p));
            let trace = generate_trace(strategy, m, &p, delta, seed)?;
            if format == Format::Csv {
                return Ok(Outcome::ok(trace_csv(&trace)));
            }
            let cert = certify(&trace)?;
            let failed = (!cert.meets_paper_bound)
                .then(|| format!("certificate at m = {m} has only {} disjoint pairs", cert.disjoint_count));
            Ok(Outcome { text: json(&cert), failed })
        }
        Command::ExportDot { m, witness: (kind, k) } => {
            let p = match kind {
                ProfileKind::Node => node_profile(m, &caps)?,
                ProfileKind::Leaf => leaf_profile(m, &caps)?,
            };
            let c = witness(&p, k)?;
            Ok(Outcome::ok(match format {
                Format::Dot => dot_graph(&c),
                _ => json(&c),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            match out.failed {
                Some(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
