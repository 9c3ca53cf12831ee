//! Multi-tier multi-height networks and noise-limited closed forms.
//!
//! Extra UAV tiers need no separate code path: every module iterates over
//! the tier list, so a configuration with `tiers` set is the multi-tier
//! model. This module adds the tier bookkeeping and the noise-limited
//! special cases, where the successful-transmission probability collapses to
//! whichever of the energy and SINR constraints binds.

use serde::Serialize;

use crate::association::AssociationMatrix;
use crate::channel::LinkState;
use crate::config::{AnalysisSettings, ClusterKind, ClusterSpec, NetworkConfig};
use crate::downlink::{Coverage, CoverageModel, CoverageReport};
use crate::error::{Error, Result};
use crate::geometry::TierId;

/// Tier index sets of a multi-tier scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiTierSet {
    /// K_U: the UAV tiers with (density, power, bias, height).
    pub uav: Vec<(TierId, f64, f64, f64, f64)>,
    /// K_G: every PPP tier (UAV tiers and the ground tier).
    pub ppp: Vec<TierId>,
    /// K: K_G plus the typical UE's cluster center.
    pub all: Vec<TierId>,
    /// The UAV tier whose cluster contains the typical UE.
    pub parent: TierId,
}

impl MultiTierSet {
    pub fn from_config(cfg: &NetworkConfig) -> Self {
        let uav: Vec<_> = cfg
            .uav_tiers()
            .iter()
            .enumerate()
            .map(|(k, t)| (TierId::Uav(k), t.density, t.power, t.bias, t.height))
            .collect();
        let mut ppp: Vec<TierId> = uav.iter().map(|u| u.0).collect();
        ppp.push(TierId::Ground);
        let mut all = vec![TierId::Cluster];
        all.extend(&ppp);
        MultiTierSet {
            uav,
            ppp,
            all,
            parent: TierId::Uav(cfg.parent_tier),
        }
    }
}

/// Association probabilities over every tier of a (possibly multi-tier)
/// scenario.
pub fn multi_tier_association(cfg: &NetworkConfig, settings: &AnalysisSettings) -> Result<AssociationMatrix> {
    Ok(CoverageModel::new(cfg, settings)?.assoc)
}

/// Downlink report over every tier of a (possibly multi-tier) scenario.
pub fn multi_tier_stp(
    cfg: &NetworkConfig,
    settings: &AnalysisSettings,
    gamma_e: f64,
    gamma_sinr: f64,
) -> Result<CoverageReport> {
    CoverageModel::new(cfg, settings)?.report(gamma_e, gamma_sinr)
}

/// Which constraint binds in a noise-limited network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// F < 0 on the whole ρ range: the SINR constraint binds, P_ST = P_SINR.
    SinrLimited,
    /// F ≥ 0 on the whole ρ range: the energy constraint binds, P_ST = P_E.
    EnergyLimited,
    /// F changes sign inside the range; P_ST peaks at the root ρ*.
    InteriorOptimum,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SinrLimited => "sinr-limited",
            Regime::EnergyLimited => "energy-limited",
            Regime::InteriorOptimum => "interior-optimum",
        })
    }
}

/// F(ρ) = γ_E/(τ(1−ρ)) − γ(σ_c²/ρ + σ_n²), increasing in ρ.
pub fn f_value(rho: f64, tau: f64, gamma_e: f64, gamma_sinr: f64, cfg: &NetworkConfig) -> f64 {
    gamma_e / (tau * (1.0 - rho)) - gamma_sinr * (cfg.sigma_c2 / rho + cfg.sigma_n2)
}

/// Regime over the open interval (rho_lo, rho_hi) ⊂ (0, 1).
pub fn regime(tau: f64, gamma_e: f64, gamma_sinr: f64, cfg: &NetworkConfig, rho_lo: f64, rho_hi: f64) -> Regime {
    if f_value(rho_hi, tau, gamma_e, gamma_sinr, cfg) < 0.0 {
        Regime::SinrLimited
    } else if f_value(rho_lo, tau, gamma_e, gamma_sinr, cfg) >= 0.0 {
        Regime::EnergyLimited
    } else {
        Regime::InteriorOptimum
    }
}

/// Noise-limited successful transmission at one ρ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseLimited {
    pub rho: f64,
    pub f: f64,
    /// True when F ≥ 0 and the energy branch is used.
    pub energy_branch: bool,
    pub energy: Coverage,
    pub sinr: Coverage,
    pub success: Coverage,
}

/// Noise-limited model: the same network with every interference term
/// dropped.
pub fn noise_limited_model(cfg: &NetworkConfig, settings: &AnalysisSettings) -> Result<CoverageModel> {
    let mut s = settings.clone();
    s.include_interference = false;
    CoverageModel::new(cfg, &s)
}

/// P_ST = P_E when F ≥ 0, P_SINR otherwise, per serving pair. `model` must
/// come from [`noise_limited_model`].
pub fn noise_limited_stp(model: &CoverageModel, rho: f64, tau: f64, gamma_e: f64, gamma_sinr: f64) -> Result<NoiseLimited> {
    if model.settings.include_interference {
        return Err(Error::Domain("noise-limited evaluation needs a model without interference".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let f = f_value(rho, tau, gamma_e, gamma_sinr, &model.cfg);
    let energy = model.energy_coverage(gamma_e, tau, rho)?;
    let sinr = model.sinr_coverage(gamma_sinr, rho)?;
    let energy_branch = f >= 0.0;
    let chosen = if energy_branch { &energy } else { &sinr };
    let success = Coverage {
        total: chosen.total,
        links: chosen.links.clone(),
    };
    Ok(NoiseLimited {
        rho,
        f,
        energy_branch,
        energy,
        sinr,
        success,
    })
}

/// Root of F in (0, 1): the ρ maximizing the noise-limited STP.
///
/// F(ρ) = 0 is the quadratic aρ² + bρ − c = 0 with a = τγσ_n²,
/// b = γ_E + τγσ_c² − τγσ_n², c = τγσ_c²; its positive root is written as
/// 2c/(b + √(b² + 4ac)), which does not cancel when b > 0. Bisection on F
/// takes over when that form is inaccurate.
pub fn optimal_rho(tau: f64, gamma_e: f64, gamma_sinr: f64, cfg: &NetworkConfig) -> Result<f64> {
    let lo = 1e-12;
    let hi = 1.0 - 1e-12;
    match regime(tau, gamma_e, gamma_sinr, cfg, lo, hi) {
        Regime::InteriorOptimum => {}
        r => return Err(Error::NoInteriorOptimum { regime: r.to_string() }),
    }
    let a = tau * gamma_sinr * cfg.sigma_n2;
    let b = gamma_e + tau * gamma_sinr * cfg.sigma_c2 - a;
    let c = tau * gamma_sinr * cfg.sigma_c2;
    let disc = (b * b + 4.0 * a * c).sqrt();
    let closed = if b >= 0.0 {
        2.0 * c / (b + disc)
    } else if a > 0.0 {
        (disc - b) / (2.0 * a)
    } else {
        f64::NAN
    };
    let f = |r: f64| f_value(r, tau, gamma_e, gamma_sinr, cfg);
    let scale = gamma_e / (tau * (1.0 - closed)) + gamma_sinr * (cfg.sigma_c2 / closed + cfg.sigma_n2);
    if closed > 0.0 && closed < 1.0 && f(closed).abs() <= 1e-12 * scale {
        return Ok(closed);
    }
    Ok(bisect_root(f, lo, hi))
}

/// Root of an increasing function with f(lo) < 0 ≤ f(hi).
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Noise-limited total STP on a ρ grid.
pub fn noise_limited_scan(
    model: &CoverageModel,
    rhos: &[f64],
    tau: f64,
    gamma_e: f64,
    gamma_sinr: f64,
) -> Result<Vec<(f64, f64)>> {
    rhos.iter()
        .map(|&r| Ok((r, noise_limited_stp(model, r, tau, gamma_e, gamma_sinr)?.success.total)))
        .collect()
}

/// C′ = γ^UL σ_n² / (P_t^UL G₀ κ^L).
pub fn closed_form_constant(gamma_ul: f64, cfg: &NetworkConfig) -> f64 {
    gamma_ul * cfg.sigma_n2 / (cfg.p_t_ul * cfg.antenna.main_link_gain() * cfg.uav_path_loss.kappa(LinkState::Los))
}

/// E[e^{−C′R₀²}]: noise-limited uplink coverage for a LOS, α = 2,
/// Rayleigh-faded link to the cluster UAV at height `h`.
pub fn uplink_closed_form(c_prime: f64, cluster: &ClusterSpec, h: f64) -> f64 {
    let height = (-c_prime * h * h).exp();
    match cluster.kind {
        ClusterKind::Thomas => height / (1.0 + 2.0 * c_prime * cluster.sigma.powi(2)),
        ClusterKind::Matern => {
            let z = c_prime * cluster.r_c.powi(2);
            if z < 1e-8 {
                height * (1.0 - 0.5 * z)
            } else {
                height * -(-z).exp_m1() / z
            }
        }
    }
}

/// [`uplink_closed_form`] with C′ from the configuration.
pub fn uplink_closed_form_cfg(gamma_ul: f64, cfg: &NetworkConfig) -> f64 {
    let parent = cfg.uav_tiers()[cfg.parent_tier];
    uplink_closed_form(closed_form_constant(gamma_ul, cfg), &cfg.cluster, parent.height)
}
