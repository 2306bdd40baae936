//! frogrange: exact laws, moments, drift asymptotics, moment bounds, and
//! seeded Monte Carlo for the leftmost visited site of the transient frog
//! model, as reproducible CSV/JSON-emitting subcommands.

mod commands;
mod eta;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::time::{SystemTime, UNIX_EPOCH};

use frogrange_core::distribution::{cgf, DriftParam, Support};
use frogrange_core::simulator::SimConfig;

use output::{Envelope, Format, Payload};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unparseable specs: exit code 2.
    Usage(String),
    /// Mathematically invalid parameters or runtime diagnostics: exit code 3.
    Domain(String),
}

impl From<frogrange_core::Error> for CliError {
    fn from(e: frogrange_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Value of the scaled moment generating function exp(g(ln z / Z_rho)),
/// which approaches z itself as the drift vanishes.
pub fn cgf_value(drift: &DriftParam, z: f64, tol: f64) -> Result<f64, CliError> {
    if z <= 0.0 {
        return Err(CliError::Usage(format!("z must be positive, got {z}")));
    }
    let t = z.ln() / drift.z_rho();
    Ok(cgf(drift, t, tol)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SupportArg {
    Nonneg,
    Allz,
}

#[derive(Parser)]
#[command(
    name = "frogrange",
    version,
    about = "Range-minimum laws and simulators for the frog model with rightward drift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact PMF/CDF table of the range minimum for x = 0..x-max
    Dist {
        #[arg(long)]
        rho: f64,
        /// Initial configuration: const:<n> | arith:<a>,<b> | prefix:[..];tail:<spec>
        #[arg(long, default_value = "const:1")]
        eta: String,
        #[arg(long)]
        x_max: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Include the wall-clock timestamp in the output header
        #[arg(long)]
        timestamp: bool,
    },
    /// Moments m = 1..m-max: direct sum, Bell route (single-frog), Z_rho^m
    Moments {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value = "const:1")]
        eta: String,
        #[arg(long)]
        m_max: u32,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        timestamp: bool,
    },
    /// Mode window (closed form) and exact argmax of the single-frog PMF
    Mode {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        timestamp: bool,
    },
    /// One quantity across a drift sweep, long format
    Sweep {
        /// Comma-separated drift values
        #[arg(long)]
        rho: Option<String>,
        /// Geometric sweep start,factor,count (gap to 1 shrinks by factor)
        #[arg(long)]
        rho_geom: Option<String>,
        /// mean-ratio | moment-ratio | var-y | mean-y | mgf-limit | p-far | q-near | bound-gap
        #[arg(long)]
        quantity: String,
        #[arg(long, default_value = "const:1")]
        eta: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 2.0)]
        z: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        timestamp: bool,
    },
    /// Seeded Monte Carlo of the range minimum; JSON report by default
    Simulate {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value = "const:1")]
        eta: String,
        #[arg(long)]
        replicas: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SupportArg::Nonneg)]
        support: SupportArg,
        /// Run the literal time-stepped dynamics for this many steps instead
        /// of the exact sampler (validation only)
        #[arg(long)]
        horizon: Option<u64>,
        /// Total-variation budget for ignoring far-right frogs
        #[arg(long, default_value_t = 1e-6)]
        site_tol: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        timestamp: bool,
    },
    /// Log-domain moment bounds for the configuration on all of Z
    Bounds {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Evaluate delta(rho) below its native domain (assigned 1/2 there)
        #[arg(long)]
        extend_delta: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        timestamp: bool,
    },
}

fn main() {
    if let Ok(text) = std::env::var("FROGRANGE_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(text) => print!("{text}"),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn stamp(requested: bool) -> Option<u64> {
    requested.then(now)
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Dist {
            rho,
            eta,
            x_max,
            tol,
            format,
            timestamp,
        } => {
            check_tol(tol)?;
            let drift = DriftParam::from_rho(rho)?;
            let cfg = eta::parse_eta(&eta, Support::NonnegativeOnly)?;
            commands::require_nonneg(&cfg)?;
            let payload = commands::dist(&drift, &cfg, x_max, tol)?;
            Ok(render(
                "dist",
                commands::params(&[
                    ("rho", json!(rho)),
                    ("eta", json!(eta)),
                    ("x_max", json!(x_max)),
                    ("tol", json!(tol)),
                    ("format", format_name(format)),
                ]),
                payload,
                format,
                timestamp,
            ))
        }
        Command::Moments {
            rho,
            eta,
            m_max,
            tol,
            format,
            timestamp,
        } => {
            check_tol(tol)?;
            if m_max < 1 {
                return Err(CliError::Usage("m-max must be at least 1".into()));
            }
            let drift = DriftParam::from_rho(rho)?;
            let cfg = eta::parse_eta(&eta, Support::NonnegativeOnly)?;
            let payload = commands::moments(&drift, &cfg, m_max, tol)?;
            Ok(render(
                "moments",
                commands::params(&[
                    ("rho", json!(rho)),
                    ("eta", json!(eta)),
                    ("m_max", json!(m_max)),
                    ("tol", json!(tol)),
                    ("format", format_name(format)),
                ]),
                payload,
                format,
                timestamp,
            ))
        }
        Command::Mode {
            rho,
            tol,
            format,
            timestamp,
        } => {
            check_tol(tol)?;
            let drift = DriftParam::from_rho(rho)?;
            let payload = commands::mode(&drift, tol)?;
            Ok(render(
                "mode",
                commands::params(&[
                    ("rho", json!(rho)),
                    ("tol", json!(tol)),
                    ("format", format_name(format)),
                ]),
                payload,
                format,
                timestamp,
            ))
        }
        Command::Sweep {
            rho,
            rho_geom,
            quantity,
            eta,
            m,
            z,
            delta,
            n,
            alpha,
            tol,
            format,
            timestamp,
        } => {
            check_tol(tol)?;
            let rhos = match (&rho, &rho_geom) {
                (Some(list), None) => eta::parse_rho_list(list)?,
                (None, Some(geom)) => eta::parse_rho_geom(geom)?,
                _ => {
                    return Err(CliError::Usage(
                        "provide exactly one of --rho or --rho-geom".into(),
                    ))
                }
            };
            let cfg = eta::parse_eta(&eta, Support::NonnegativeOnly)?;
            let args = commands::SweepArgs {
                rhos,
                quantity: quantity.clone(),
                eta: cfg,
                m,
                z,
                delta,
                n,
                alpha,
                tol,
            };
            let payload = commands::sweep(&args)?;
            Ok(render(
                "sweep",
                commands::params(&[
                    ("rho", json!(rho.unwrap_or_default())),
                    ("rho_geom", json!(rho_geom.unwrap_or_default())),
                    ("quantity", json!(quantity)),
                    ("eta", json!(eta)),
                    ("m", json!(m)),
                    ("z", json!(z)),
                    ("delta", json!(delta)),
                    ("n", json!(n)),
                    ("alpha", json!(alpha)),
                    ("tol", json!(tol)),
                    ("format", format_name(format)),
                ]),
                payload,
                format,
                timestamp,
            ))
        }
        Command::Simulate {
            rho,
            eta,
            replicas,
            seed,
            support,
            horizon,
            site_tol,
            format,
            timestamp,
        } => {
            if replicas < 1 {
                return Err(CliError::Usage("replicas must be at least 1".into()));
            }
            let drift = DriftParam::from_rho(rho)?;
            let support_kind = match support {
                SupportArg::Nonneg => Support::NonnegativeOnly,
                SupportArg::Allz => Support::AllOfZ,
            };
            let cfg = eta::parse_eta(&eta, support_kind)?;
            let sim = SimConfig::new(drift, cfg, replicas, seed, site_tol, horizon)?;
            let payload = commands::simulate(&sim)?;
            Ok(render(
                "simulate",
                commands::params(&[
                    ("rho", json!(rho)),
                    ("eta", json!(eta)),
                    ("replicas", json!(replicas)),
                    ("seed", json!(seed)),
                    ("support", json!(match support {
                        SupportArg::Nonneg => "nonneg",
                        SupportArg::Allz => "allz",
                    })),
                    ("horizon", horizon.map_or(serde_json::Value::Null, |h| json!(h))),
                    ("site_tol", json!(site_tol)),
                    ("format", format_name(format)),
                ]),
                payload,
                format,
                timestamp,
            ))
        }
        Command::Bounds {
            rho,
            n,
            m,
            alpha,
            extend_delta,
            format,
            timestamp,
        } => {
            if n < 1 {
                return Err(CliError::Usage("n must be at least 1".into()));
            }
            if m < 1 {
                return Err(CliError::Usage("m must be at least 1".into()));
            }
            let drift = DriftParam::from_rho(rho)?;
            let payload = commands::bounds(&drift, n, m, alpha, extend_delta)?;
            Ok(render(
                "bounds",
                commands::params(&[
                    ("rho", json!(rho)),
                    ("n", json!(n)),
                    ("m", json!(m)),
                    ("alpha", json!(alpha)),
                    ("extend_delta", json!(extend_delta)),
                    ("format", format_name(format)),
                ]),
                payload,
                format,
                timestamp,
            ))
        }
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Usage(format!(
            "tolerance must lie in (0,1), got {tol}"
        )));
    }
    Ok(())
}

fn format_name(f: FormatArg) -> serde_json::Value {
    json!(match f {
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
    })
}

fn render(
    subcommand: &'static str,
    parameters: std::collections::BTreeMap<String, serde_json::Value>,
    payload: Payload,
    format: FormatArg,
    timestamp: bool,
) -> String {
    Envelope {
        subcommand,
        parameters,
        timestamp: stamp(timestamp),
        payload,
    }
    .render(format.into())
}
