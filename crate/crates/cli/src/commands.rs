//! Subcommands.

use rayon::prelude::*;

use uavcov::downlink::CoverageModel;
use uavcov::extensions::{noise_limited_model, noise_limited_scan, noise_limited_stp, optimal_rho};
use uavcov::uplink::{TauOutcome, UplinkModel};
use uavcov::ConfigFile;

use crate::args::{EvalArgs, Metric, OptimizeArgs, SweepArgs, Target};
use crate::eval::{evaluate, Scenario, DEFAULT_METRICS};
use crate::rows::Row;
use crate::CliError;

/// Threshold parameters a sweep may vary, in dB.
const THRESHOLDS: [&str; 3] = ["gammaE", "gammaSINR", "gammaUL"];

/// `eval` (no trials unless asked) and `simulate` (the scenario's trial count
/// unless overridden).
pub fn eval(a: &EvalArgs, simulate: bool) -> Result<Vec<Row>, CliError> {
    let sc = Scenario::from_args(&a.common)?;
    let trials = match a.common.trials {
        Some(n) => n,
        None if simulate => sc.file.mc_trials,
        None => 0,
    };
    if simulate && trials == 0 {
        return Err(CliError::Config("simulate needs at least one trial".into()));
    }
    evaluate(&sc, &a.common.metrics, trials)
}

/// Parse "a,b,c" or "start:stop:step" into a strictly increasing grid.
pub fn parse_grid(values: Option<&str>, range: Option<&str>) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Config(m);
    let grid: Vec<f64> = match (values, range) {
        (Some(v), None) => v
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("'{t}' in --values is not a number")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(r)) => {
            let parts: Vec<f64> = r
                .split(':')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad(format!("'{r}' is not START:STOP:STEP"))))
                .collect::<Result<_, _>>()?;
            let [start, stop, step] = parts[..] else {
                return Err(bad(format!("'{r}' is not START:STOP:STEP")));
            };
            if !(step > 0.0) || !(stop >= start) {
                return Err(bad(format!("range '{r}' needs STEP > 0 and STOP >= START")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + step * i as f64).collect()
        }
        _ => return Err(bad("give exactly one of --values and --range".into())),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(bad("the grid must be nonempty and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("the grid must be strictly increasing".into()));
    }
    Ok(grid)
}

/// The scenario with `param` set to `value`.
fn with_param(sc: &Scenario, param: &str, value: f64) -> Result<Scenario, CliError> {
    let mut s = sc.clone();
    match param {
        "gammaE" => s.gamma_e_db = value,
        "gammaSINR" => s.gamma_sinr_db = value,
        "gammaUL" => s.gamma_ul_db = value,
        "rho" => s.rho = Some(value),
        "tau" => s.tau = Some(value),
        _ => s.file.set_scalar(param, value)?,
    }
    s.resolve()?;
    Ok(s)
}

fn check_param(sc: &Scenario, param: &str) -> Result<(), CliError> {
    if THRESHOLDS.contains(&param) {
        return Ok(());
    }
    if (param == "rho" && sc.rho.is_some()) || (param == "tau" && sc.tau.is_some()) {
        return Err(CliError::Config(format!("--{param} conflicts with sweeping {param}")));
    }
    if ConfigFile::scalar_fields().iter().any(|f| f == param) {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "unknown sweep parameter '{param}'; expected a scenario field or one of {}",
            THRESHOLDS.join(", ")
        )))
    }
}

/// One row block per grid point, in grid order. A point that fails is
/// reported in its rows' status and the sweep goes on.
pub fn sweep(a: &SweepArgs) -> Result<Vec<Row>, CliError> {
    let sc = Scenario::from_args(&a.common)?;
    check_param(&sc, &a.param)?;
    let grid = parse_grid(a.values.as_deref(), a.range.as_deref())?;
    let trials = a.common.trials.unwrap_or(0);
    let metrics: Vec<Metric> = if a.common.metrics.is_empty() {
        DEFAULT_METRICS.to_vec()
    } else {
        a.common.metrics.clone()
    };
    let blocks: Vec<Vec<Row>> = grid
        .par_iter()
        .map(|&v| {
            let point = with_param(&sc, &a.param, v).and_then(|s| evaluate(&s, &metrics, trials));
            match point {
                Ok(rows) => rows.into_iter().map(|r| r.at(&a.param, v)).collect(),
                Err(e) => metrics
                    .iter()
                    .map(|m| {
                        Row::new(metric_name(*m), None)
                            .at(&a.param, v)
                            .status(format!("error: {e}"))
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(blocks.concat())
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Association => "association",
        Metric::Energy => "energy",
        Metric::Sinr => "sinr",
        Metric::Stp => "stp",
        Metric::Uplink => "uplink",
        Metric::Throughput => "throughput",
    }
}

pub fn optimize(a: &OptimizeArgs) -> Result<Vec<Row>, CliError> {
    let sc = Scenario::from_args(&a.common)?;
    match a.target {
        Target::Tau => optimize_tau(&sc, a.r_min),
        Target::Rho => optimize_rho(&sc),
        Target::Height => {
            let grid = match &a.values {
                Some(v) => parse_grid(Some(v), None)?,
                None => parse_grid(None, Some("0:100:5"))?,
            };
            optimize_height(&sc, &grid)
        }
    }
}

fn optimize_tau(sc: &Scenario, r_min: f64) -> Result<Vec<Row>, CliError> {
    if !(r_min >= 0.0) {
        return Err(CliError::Config(format!("--r-min must be non-negative, got {r_min}")));
    }
    let (cfg, settings) = sc.resolve()?;
    let ul = UplinkModel::new(CoverageModel::new(&cfg, &settings)?);
    match ul.optimize_tau(sc.rho(), sc.gamma_ul(), sc.gamma_sinr(), r_min)? {
        TauOutcome::Infeasible { tau_min, frame } => Err(CliError::Infeasible(format!(
            "downlink throughput constraint R_DL >= {r_min} bit/s needs tau >= {tau_min} s, beyond the frame T = {frame} s"
        ))),
        TauOutcome::Optimal { tau, result, scan } => {
            let mut rows: Vec<Row> = scan
                .iter()
                .map(|&(t, r)| Row::new("r_ul_bps", Some(r)).at("tau", t).link("scan", ""))
                .collect();
            let p_sinr = ul.dl.sinr_coverage(sc.gamma_sinr(), sc.rho())?.total;
            let tau_min = ul.tau_min(sc.gamma_ul(), p_sinr, r_min);
            rows.push(Row::new("tau_opt_s", Some(tau)));
            rows.push(Row::new("r_ul_bps", Some(result.r_ul)));
            rows.push(Row::new("r_dl_bps", Some(result.r_dl)));
            rows.push(Row::new("tau_min_s", Some(tau_min)));
            rows.push(Row::new("feasible", Some(if result.feasible { 1.0 } else { 0.0 })));
            Ok(rows)
        }
    }
}

fn optimize_rho(sc: &Scenario) -> Result<Vec<Row>, CliError> {
    let (cfg, settings) = sc.resolve()?;
    let (tau, gamma_e, gamma_sinr) = (sc.tau(), sc.gamma_e(), sc.gamma_sinr());
    let rho = optimal_rho(tau, gamma_e, gamma_sinr, &cfg)?;
    let model = noise_limited_model(&cfg, &settings)?;
    let grid: Vec<f64> = (1..100).map(|i| i as f64 * 0.01).collect();
    let scan = noise_limited_scan(&model, &grid, tau, gamma_e, gamma_sinr)?;
    let mut rows: Vec<Row> = scan
        .iter()
        .map(|&(r, p)| Row::new("stp_noise_limited", Some(p)).at("rho", r).link("scan", ""))
        .collect();
    let at = noise_limited_stp(&model, rho, tau, gamma_e, gamma_sinr)?;
    rows.push(Row::new("rho_opt", Some(rho)));
    rows.push(Row::new("stp_noise_limited", Some(at.success.total)));
    Ok(rows)
}

fn optimize_height(sc: &Scenario, grid: &[f64]) -> Result<Vec<Row>, CliError> {
    let points: Vec<Result<f64, CliError>> = grid
        .par_iter()
        .map(|&h| {
            let s = with_param(sc, "h", h)?;
            let rows = evaluate(&s, &[Metric::Stp], 0)?;
            Ok(rows.last().and_then(|r| r.analytical).unwrap_or(f64::NAN))
        })
        .collect();
    let mut rows = Vec::with_capacity(grid.len() + 2);
    let mut best: Option<(f64, f64)> = None;
    for (&h, p) in grid.iter().zip(points) {
        match p {
            Ok(v) => {
                if v.is_finite() && best.is_none_or(|b| v > b.1) {
                    best = Some((h, v));
                }
                rows.push(Row::new("stp", Some(v)).at("h", h).link("scan", ""));
            }
            Err(e) => rows.push(Row::new("stp", None).at("h", h).link("scan", "").status(format!("error: {e}"))),
        }
    }
    let (h, v) = best.ok_or_else(|| CliError::Numerical("no height on the grid could be evaluated".into()))?;
    let interior = h > grid[0] && h < grid[grid.len() - 1];
    let note = if interior { "ok" } else { "ok; maximum on the grid boundary" };
    rows.push(Row::new("h_opt_m", Some(h)).status(note));
    rows.push(Row::new("stp", Some(v)).status(note));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid(Some("5, 10,20"), None).unwrap(), vec![5.0, 10.0, 20.0]);
        assert_eq!(parse_grid(None, Some("0:1:0.25")).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid(None, Some("-40:-20:10")).unwrap(), vec![-40.0, -30.0, -20.0]);
        assert!(parse_grid(Some("3,2"), None).is_err());
        assert!(parse_grid(Some("1,1"), None).is_err());
        assert!(parse_grid(Some("a"), None).is_err());
        assert!(parse_grid(None, Some("0:1")).is_err());
        assert!(parse_grid(None, Some("0:1:0")).is_err());
        assert!(parse_grid(None, None).is_err());
    }

    #[test]
    fn sweep_parameters_are_checked() {
        let sc = Scenario {
            file: ConfigFile::default(),
            gamma_e_db: -40.0,
            gamma_sinr_db: 0.0,
            gamma_ul_db: -20.0,
            rho: Some(0.5),
            tau: None,
            noise_limited: false,
        };
        assert!(check_param(&sc, "sigma").is_ok());
        assert!(check_param(&sc, "gammaE").is_ok());
        assert!(check_param(&sc, "tau").is_ok());
        assert!(check_param(&sc, "rho").is_err());
        assert!(check_param(&sc, "nonsense").is_err());
        let s = with_param(&sc, "h", 20.0).unwrap();
        assert_eq!(s.file.h, 20.0);
        assert!(with_param(&sc, "sigma", -1.0).is_err());
    }
}
