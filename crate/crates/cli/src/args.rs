//! Command-line syntax.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::rows::Format;

#[derive(Debug, Parser)]
#[command(name = "uavcov", version, about = "Coverage analysis of energy-harvesting UAV-assisted mmWave networks")]
pub struct Cli {
    /// Worker threads for sweeps and simulations (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate metrics at one operating point.
    Eval(EvalArgs),
    /// Evaluate metrics and compare them with a Monte Carlo run.
    Simulate(EvalArgs),
    /// Evaluate metrics over a grid of one parameter.
    Sweep(SweepArgs),
    /// Optimize τ, ρ or the UAV height.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// A_{j,s} for every serving tier and link state.
    Association,
    /// Energy coverage P_E.
    Energy,
    /// Downlink SINR coverage P_SINR.
    Sinr,
    /// Successful transmission probability P_ST.
    Stp,
    /// Active probability and uplink SINR coverage.
    Uplink,
    /// Average uplink and downlink throughput.
    Throughput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Tau,
    Rho,
    #[value(name = "H", alias = "h")]
    Height,
}

/// Thresholds in dB; a trailing "dB" is accepted.
pub fn parse_db(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let t = t
        .strip_suffix("dB")
        .or_else(|| t.strip_suffix("db"))
        .unwrap_or(t)
        .trim();
    let v: f64 = t.parse().map_err(|_| format!("'{s}' is not a level in dB"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not a finite level"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML); the reference parameter set when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Metric to report; repeatable.
    #[arg(long = "metric", value_enum)]
    pub metrics: Vec<Metric>,

    /// Monte Carlo trials (0: analytical only).
    #[arg(long)]
    pub trials: Option<usize>,

    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    /// Energy threshold γ_E in dB(J).
    #[arg(long = "gammaE", value_parser = parse_db, allow_hyphen_values = true, default_value = "-40")]
    pub gamma_e_db: f64,

    /// Downlink SINR threshold in dB.
    #[arg(long = "gammaSINR", value_parser = parse_db, allow_hyphen_values = true, default_value = "0")]
    pub gamma_sinr_db: f64,

    /// Uplink SINR threshold in dB.
    #[arg(long = "gammaUL", value_parser = parse_db, allow_hyphen_values = true, default_value = "-20")]
    pub gamma_ul_db: f64,

    /// Power-splitting ratio ρ (default: from the scenario).
    #[arg(long)]
    pub rho: Option<f64>,

    /// Downlink duration τ in seconds (default: from the scenario).
    #[arg(long)]
    pub tau: Option<f64>,

    /// Drop every interference term.
    #[arg(long)]
    pub noise_limited: bool,

    /// Freeze the uplink LOS thinning at the mean inter-UAV distance.
    #[arg(long = "paper-literal-uplink-thinning")]
    pub fixed_uplink_thinning: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Parameter to sweep: a scenario field (file units) or gammaE, gammaSINR, gammaUL (dB).
    #[arg(long)]
    pub param: String,

    /// Comma-separated increasing grid.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "range", required_unless_present = "range")]
    pub values: Option<String>,

    /// START:STOP:STEP grid, both ends included.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, value_enum)]
    pub target: Target,

    /// Minimum average downlink throughput in bit/s (τ target).
    #[arg(long, default_value_t = 0.0)]
    pub r_min: f64,

    /// Height grid in meters for the H target, comma-separated.
    #[arg(long)]
    pub values: Option<String>,
}
