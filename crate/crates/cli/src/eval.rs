//! Metric evaluation at one operating point.

use uavcov::downlink::{Coverage, CoverageModel};
use uavcov::extensions::noise_limited_stp;
use uavcov::montecarlo::{ActiveMode, DownlinkPlan, DownlinkProbe, Simulator};
use uavcov::units::db_to_linear;
use uavcov::uplink::UplinkModel;
use uavcov::{AnalysisSettings, ConfigFile, NetworkConfig};

use crate::args::{CommonArgs, Metric};
use crate::rows::Row;
use crate::CliError;

/// Everything that defines one evaluation point.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ConfigFile,
    pub gamma_e_db: f64,
    pub gamma_sinr_db: f64,
    pub gamma_ul_db: f64,
    /// Overrides of the file's ρ and τ.
    pub rho: Option<f64>,
    pub tau: Option<f64>,
    pub noise_limited: bool,
}

impl Scenario {
    pub fn from_args(a: &CommonArgs) -> Result<Self, CliError> {
        let mut file = match &a.config {
            Some(path) => ConfigFile::load(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            None => ConfigFile::default(),
        };
        if let Some(seed) = a.seed {
            file.mc_seed = seed;
        }
        if a.fixed_uplink_thinning {
            file.fixed_los_thinning = true;
        }
        if a.noise_limited {
            file.include_interference = false;
        }
        let sc = Scenario {
            file,
            gamma_e_db: a.gamma_e_db,
            gamma_sinr_db: a.gamma_sinr_db,
            gamma_ul_db: a.gamma_ul_db,
            rho: a.rho,
            tau: a.tau,
            noise_limited: a.noise_limited,
        };
        sc.resolve()?;
        Ok(sc)
    }

    pub fn resolve(&self) -> Result<(NetworkConfig, AnalysisSettings), CliError> {
        Ok(self.file.resolve()?)
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(self.file.rho)
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.file.tau)
    }

    pub fn gamma_e(&self) -> f64 {
        db_to_linear(self.gamma_e_db)
    }

    pub fn gamma_sinr(&self) -> f64 {
        db_to_linear(self.gamma_sinr_db)
    }

    pub fn gamma_ul(&self) -> f64 {
        db_to_linear(self.gamma_ul_db)
    }
}

/// Metrics reported when none is requested.
pub const DEFAULT_METRICS: [Metric; 2] = [Metric::Association, Metric::Stp];

fn coverage_rows(name: &str, c: &Coverage) -> Vec<Row> {
    let mut rows: Vec<Row> = c
        .links
        .iter()
        .map(|l| {
            let row = Row::new(name, Some(l.conditional)).link(l.tier, l.state);
            if l.association > 0.0 {
                row
            } else {
                row.status("undefined: zero association")
            }
        })
        .collect();
    rows.push(Row::new(name, Some(c.total)));
    rows
}

/// Rows of `metrics` at one point; Monte Carlo columns filled when `trials > 0`.
/// Per-link coverage rows hold the probability conditioned on that serving
/// link; `total` rows hold the unconditional one.
pub fn evaluate(sc: &Scenario, metrics: &[Metric], trials: usize) -> Result<Vec<Row>, CliError> {
    let metrics: Vec<Metric> = if metrics.is_empty() {
        DEFAULT_METRICS.to_vec()
    } else {
        metrics.to_vec()
    };
    let (cfg, settings) = sc.resolve()?;
    let model = CoverageModel::new(&cfg, &settings)?;
    let (rho, tau) = (sc.rho(), sc.tau());
    let (gamma_e, gamma_sinr, gamma_ul) = (sc.gamma_e(), sc.gamma_sinr(), sc.gamma_ul());
    let wants = |m: Metric| metrics.contains(&m);

    let mut energy = None;
    let mut sinr = None;
    let mut success = None;
    if wants(Metric::Stp) {
        if sc.noise_limited {
            let n = noise_limited_stp(&model, rho, tau, gamma_e, gamma_sinr)?;
            (energy, sinr, success) = (Some(n.energy), Some(n.sinr), Some(n.success));
        } else {
            let r = model.successful_transmission(gamma_e, gamma_sinr, tau, rho)?;
            (energy, sinr, success) = (Some(r.energy), Some(r.sinr), Some(r.success));
        }
    } else {
        if wants(Metric::Energy) {
            energy = Some(model.energy_coverage(gamma_e, tau, rho)?);
        }
        if wants(Metric::Sinr) {
            sinr = Some(model.sinr_coverage(gamma_sinr, rho)?);
        }
    }

    let sim = if trials > 0 {
        Some(Simulator::new(&cfg, &settings)?)
    } else {
        None
    };
    let downlink_mc = match &sim {
        Some(sim) if metrics.iter().any(|m| matches!(m, Metric::Association | Metric::Energy | Metric::Sinr | Metric::Stp)) => {
            let probe_ok = rho > 0.0 && rho < 1.0 && tau > 0.0;
            let wants_probe = wants(Metric::Energy) || wants(Metric::Sinr) || wants(Metric::Stp);
            let plan = DownlinkPlan {
                probes: if wants_probe && probe_ok {
                    vec![DownlinkProbe {
                        gamma_e,
                        gamma_sinr,
                        tau,
                        rho,
                    }]
                } else {
                    Vec::new()
                },
                ..DownlinkPlan::default()
            };
            Some(sim.simulate_downlink(&plan, trials)?)
        }
        _ => None,
    };
    let probe = downlink_mc.as_ref().and_then(|e| e.probes.first());

    let mut rows = Vec::new();
    for m in &metrics {
        match m {
            Metric::Association => {
                for (tier, state, a) in model.assoc.entries() {
                    let mut row = Row::new("association", Some(a)).link(tier, state);
                    if let Some(e) = downlink_mc.as_ref().and_then(|d| d.association(tier, state)) {
                        row = row.with_mc(e.estimate, e.half_width, e.trials);
                    }
                    rows.push(row);
                }
            }
            Metric::Energy | Metric::Sinr | Metric::Stp => {
                let (name, cov, mc) = match m {
                    Metric::Energy => ("energy", &energy, probe.map(|p| p.energy)),
                    Metric::Sinr => ("sinr", &sinr, probe.map(|p| p.sinr)),
                    _ => ("stp", &success, probe.map(|p| p.success)),
                };
                let cov = cov.as_ref().expect("computed above");
                let mut part = coverage_rows(name, cov);
                if let (Some(e), Some(total)) = (mc, part.last_mut()) {
                    *total = total.clone().with_mc(e.estimate, e.half_width, e.trials);
                }
                rows.extend(part);
            }
            Metric::Uplink => {
                let ul = UplinkModel::new(model.clone());
                let ctx = ul.context(tau, rho, gamma_ul)?;
                let p_ul = ul.sinr_coverage(&ctx)?;
                let mut a = Row::new("p_active", Some(ctx.p_active));
                let mut b = Row::new("p_ul", Some(p_ul));
                if let Some(sim) = &sim {
                    let e = sim.simulate_uplink(tau, rho, gamma_ul, ActiveMode::Simulated, trials)?;
                    a = a.with_mc(e.p_active.estimate, e.p_active.half_width, e.p_active.trials);
                    b = b.with_mc(e.coverage.estimate, e.coverage.half_width, e.coverage.trials);
                }
                rows.push(a);
                rows.push(b);
            }
            Metric::Throughput => {
                let ul = UplinkModel::new(model.clone());
                let t = ul.throughput(tau, rho, gamma_ul, gamma_sinr, 0.0)?;
                rows.push(Row::new("r_ul_bps", Some(t.r_ul)));
                rows.push(Row::new("r_dl_bps", Some(t.r_dl)));
            }
        }
    }
    Ok(rows)
}
