//! The output table: one schema for every subcommand.
//!
//! Probabilities are dimensionless; rates are in bit/s and times in seconds,
//! as the metric name says (`r_ul_bps`, `tau_opt_s`). `value` is the swept or
//! scanned parameter in configuration-file units (dB for thresholds).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Largest |analytical − MC| accepted regardless of the confidence interval.
pub const ABS_TOLERANCE: f64 = 0.015;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub parameter: String,
    pub value: Option<f64>,
    pub metric: String,
    pub tier: String,
    pub state: String,
    pub analytical: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_half_width: Option<f64>,
    pub abs_diff: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn new(metric: impl Into<String>, analytical: Option<f64>) -> Self {
        Row {
            parameter: String::new(),
            value: None,
            metric: metric.into(),
            tier: "total".into(),
            state: String::new(),
            analytical: analytical.filter(|v| v.is_finite()),
            mc_estimate: None,
            mc_half_width: None,
            abs_diff: None,
            status: "ok".into(),
        }
    }

    pub fn link(mut self, tier: impl ToString, state: impl ToString) -> Self {
        self.tier = tier.to_string();
        self.state = state.to_string();
        self
    }

    pub fn at(mut self, parameter: &str, value: f64) -> Self {
        self.parameter = parameter.to_string();
        self.value = Some(value);
        self
    }

    pub fn status(mut self, status: impl Into<String>) -> Self {
        self.status = status.into();
        self
    }

    /// Attach a Monte Carlo estimate and judge the agreement: |Δ| must stay
    /// within [`ABS_TOLERANCE`] and three half-widths. The half-width is
    /// floored at the binomial one of the analytical value, since it is 0
    /// when every trial agrees.
    pub fn with_mc(mut self, estimate: f64, half_width: f64, trials: usize) -> Self {
        self.mc_estimate = Some(estimate);
        self.mc_half_width = Some(half_width);
        if let Some(a) = self.analytical {
            let d = (a - estimate).abs();
            let floor = 1.96 * (a.clamp(0.0, 1.0) * (1.0 - a.clamp(0.0, 1.0)) / trials as f64).sqrt();
            self.abs_diff = Some(d);
            if d > ABS_TOLERANCE || d > 3.0 * half_width.max(floor) {
                self.status = "mismatch".into();
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if rows.is_empty() {
                w.write_record(HEADER).map_err(CliError::output)?;
            }
            for r in rows {
                w.serialize(r).map_err(CliError::output)?;
            }
            w.flush().map_err(CliError::output)
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(CliError::output)?;
            writeln!(out).map_err(CliError::output)
        }
    }
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Row>, CliError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<Vec<Row>, _>>()
        .map_err(CliError::output)
}

pub const HEADER: [&str; 10] = [
    "parameter",
    "value",
    "metric",
    "tier",
    "state",
    "analytical",
    "mc_estimate",
    "mc_half_width",
    "abs_diff",
    "status",
];
