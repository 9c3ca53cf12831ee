//! Scenario parameters.
//!
//! [`NetworkConfig`] holds every physical parameter in linear SI units and is
//! what the analysis and simulation read. [`ConfigFile`] is the flat on-disk
//! schema: the same names, but powers in dBm, antenna gains in dB and
//! beamwidths in degrees. Unset keys take the reference values listed in
//! [`ConfigFile::default`].

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::LinkState;
use crate::error::{ConfigErrors, Error, Result};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db, thermal_noise_power, watts_to_dbm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Thomas,
    Matern,
}

/// Spatial spread of UEs around their cluster-center UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub kind: ClusterKind,
    /// Per-axis Gaussian standard deviation (m), Thomas only.
    pub sigma: f64,
    /// Disc radius (m), Matérn only.
    pub r_c: f64,
}

impl ClusterSpec {
    pub fn thomas(sigma: f64) -> Self {
        ClusterSpec {
            kind: ClusterKind::Thomas,
            sigma,
            r_c: 0.0,
        }
    }

    pub fn matern(r_c: f64) -> Self {
        ClusterSpec {
            kind: ClusterKind::Matern,
            sigma: 0.0,
            r_c,
        }
    }

    /// The active size parameter: σ for Thomas, R_c for Matérn.
    pub fn scale(&self) -> f64 {
        match self.kind {
            ClusterKind::Thomas => self.sigma,
            ClusterKind::Matern => self.r_c,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        match self.kind {
            ClusterKind::Thomas => ClusterSpec::thomas(scale),
            ClusterKind::Matern => ClusterSpec::matern(scale),
        }
    }
}

/// Sectored antenna pattern at base stations (b) and UEs (u).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub main_bs: f64,
    pub side_bs: f64,
    pub main_ue: f64,
    pub side_ue: f64,
    /// Main-lobe beamwidths in radians.
    pub theta_bs: f64,
    pub theta_ue: f64,
}

impl AntennaPattern {
    /// Gain of a perfectly aligned serving link.
    pub fn main_link_gain(&self) -> f64 {
        self.main_bs * self.main_ue
    }

    pub fn omni() -> Self {
        AntennaPattern {
            main_bs: 1.0,
            side_bs: 1.0,
            main_ue: 1.0,
            side_ue: 1.0,
            theta_bs: 2.0 * PI,
            theta_ue: 2.0 * PI,
        }
    }
}

/// Path-loss intercepts κ and exponents α for both link states of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossPair {
    pub kappa_los: f64,
    pub kappa_nlos: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
}

impl PathLossPair {
    pub fn kappa(&self, s: LinkState) -> f64 {
        match s {
            LinkState::Los => self.kappa_los,
            LinkState::Nlos => self.kappa_nlos,
        }
    }

    pub fn alpha(&self, s: LinkState) -> f64 {
        match s {
            LinkState::Los => self.alpha_los,
            LinkState::Nlos => self.alpha_nlos,
        }
    }
}

/// An additional UAV tier in the multi-height model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavTierSpec {
    pub density: f64,
    pub power: f64,
    pub bias: f64,
    pub height: f64,
}

/// Physical scenario in linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lambda_u: f64,
    pub lambda_g: f64,
    pub p_u: f64,
    pub p_g: f64,
    pub b_u: f64,
    pub b_g: f64,
    pub h: f64,
    pub cluster: ClusterSpec,
    pub env_b: f64,
    pub env_c: f64,
    pub epsilon: f64,
    pub uav_path_loss: PathLossPair,
    pub gbs_path_loss: PathLossPair,
    pub antenna: AntennaPattern,
    pub n_los: u32,
    pub n_nlos: u32,
    pub sigma_n2: f64,
    pub sigma_c2: f64,
    pub frame: f64,
    pub tau: f64,
    pub rho: f64,
    pub p_t_ul: f64,
    pub bandwidth: f64,
    /// UAV tiers beyond the one described by `lambda_u`, `p_u`, `b_u`, `h`.
    #[serde(default)]
    pub tiers: Vec<UavTierSpec>,
    /// Which UAV tier hosts the typical UE's cluster: 0 is the primary tier,
    /// k ≥ 1 is `tiers[k - 1]`.
    #[serde(default)]
    pub parent_tier: usize,
}

/// Numerical settings that are not part of the physical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    /// Order N of the normalized-Gamma indicator approximation.
    pub gamma_order: usize,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    /// Ground-distance radius (m) of the world seen by both the analysis and
    /// the simulator.
    pub trunc_radius: f64,
    pub mc_trials: usize,
    pub mc_seed: u64,
    /// When false every interference term is dropped (noise-limited model).
    pub include_interference: bool,
    /// Uplink interferer LOS thinning by a constant probability at the mean
    /// nearest-interferer distance instead of the distance-dependent form.
    pub fixed_los_thinning: bool,
}

pub const MAX_GAMMA_ORDER: usize = 10;

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            gamma_order: 5,
            quad_rel_tol: 1e-6,
            quad_abs_tol: 1e-12,
            trunc_radius: 2000.0,
            mc_trials: 100_000,
            mc_seed: 1,
            include_interference: true,
            fixed_los_thinning: false,
        }
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        ConfigFile::default()
            .to_network()
            .expect("reference configuration converts")
    }
}

impl NetworkConfig {
    /// Check every invariant, returning all violations at once.
    pub fn validate(&self) -> std::result::Result<(), ConfigErrors> {
        let mut e = ConfigErrors::default();
        let nonneg = |e: &mut ConfigErrors, name: &str, v: f64| {
            if !(v.is_finite() && v >= 0.0) {
                e.push(name, format!("{name} must be finite and non-negative, got {v}"));
            }
        };
        let positive = |e: &mut ConfigErrors, name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                e.push(name, format!("{name} must be finite and positive, got {v}"));
            }
        };
        nonneg(&mut e, "lambda_u", self.lambda_u);
        nonneg(&mut e, "lambda_g", self.lambda_g);
        positive(&mut e, "p_u", self.p_u);
        positive(&mut e, "p_g", self.p_g);
        nonneg(&mut e, "b_u", self.b_u);
        nonneg(&mut e, "b_g", self.b_g);
        nonneg(&mut e, "h", self.h);
        match self.cluster.kind {
            ClusterKind::Thomas => positive(&mut e, "sigma", self.cluster.sigma),
            ClusterKind::Matern => positive(&mut e, "r_c", self.cluster.r_c),
        }
        positive(&mut e, "env_b", self.env_b);
        positive(&mut e, "env_c", self.env_c);
        positive(&mut e, "epsilon", self.epsilon);
        for (tier, pl) in [("uav", &self.uav_path_loss), ("gbs", &self.gbs_path_loss)] {
            positive(&mut e, &format!("kappa_los_{tier}"), pl.kappa_los);
            positive(&mut e, &format!("kappa_nlos_{tier}"), pl.kappa_nlos);
            positive(&mut e, &format!("alpha_los_{tier}"), pl.alpha_los);
            positive(&mut e, &format!("alpha_nlos_{tier}"), pl.alpha_nlos);
        }
        let a = &self.antenna;
        positive(&mut e, "side_lobe_bs", a.side_bs);
        positive(&mut e, "side_lobe_ue", a.side_ue);
        if a.main_bs < a.side_bs {
            e.push("main_lobe_bs", "main lobe gain below side lobe gain");
        }
        if a.main_ue < a.side_ue {
            e.push("main_lobe_ue", "main lobe gain below side lobe gain");
        }
        for (name, t) in [("beamwidth_bs", a.theta_bs), ("beamwidth_ue", a.theta_ue)] {
            if !(t > 0.0 && t <= 2.0 * PI + 1e-12) {
                e.push(name, format!("beamwidth must be in (0, 2π], got {t}"));
            }
        }
        if self.n_los < 1 {
            e.push("n_los", "Nakagami order must be at least 1");
        }
        if self.n_nlos < 1 {
            e.push("n_nlos", "Nakagami order must be at least 1");
        }
        nonneg(&mut e, "sigma_n2", self.sigma_n2);
        nonneg(&mut e, "sigma_c2", self.sigma_c2);
        positive(&mut e, "frame", self.frame);
        if !(self.tau >= 0.0 && self.tau <= self.frame) {
            e.push("tau", format!("tau out of [0, T], got {}", self.tau));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            e.push("rho", format!("rho out of [0,1], got {}", self.rho));
        }
        positive(&mut e, "p_t_ul", self.p_t_ul);
        positive(&mut e, "bandwidth", self.bandwidth);
        for (i, t) in self.tiers.iter().enumerate() {
            nonneg(&mut e, &format!("tiers[{i}].density"), t.density);
            positive(&mut e, &format!("tiers[{i}].power"), t.power);
            nonneg(&mut e, &format!("tiers[{i}].bias"), t.bias);
            nonneg(&mut e, &format!("tiers[{i}].height"), t.height);
        }
        if self.parent_tier > self.tiers.len() {
            e.push(
                "parent_tier",
                format!("parent tier {} does not exist", self.parent_tier),
            );
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(e)
        }
    }

    /// All UAV tiers, primary first.
    pub fn uav_tiers(&self) -> Vec<UavTierSpec> {
        let mut v = vec![UavTierSpec {
            density: self.lambda_u,
            power: self.p_u,
            bias: self.b_u,
            height: self.h,
        }];
        v.extend(self.tiers.iter().copied());
        v
    }

    /// The Nakagami order of a link in state `s`.
    pub fn nakagami(&self, s: LinkState) -> u32 {
        match s {
            LinkState::Los => self.n_los,
            LinkState::Nlos => self.n_nlos,
        }
    }
}

impl AnalysisSettings {
    pub fn validate(&self, cfg: &NetworkConfig) -> std::result::Result<(), ConfigErrors> {
        let mut e = ConfigErrors::default();
        if !(1..=MAX_GAMMA_ORDER).contains(&self.gamma_order) {
            e.push(
                "gamma_order",
                format!("gamma order must be in 1..={MAX_GAMMA_ORDER}, got {}", self.gamma_order),
            );
        }
        if !(self.quad_rel_tol > 0.0) {
            e.push("quad_rel_tol", "tolerance must be positive");
        }
        if !(self.quad_abs_tol > 0.0) {
            e.push("quad_abs_tol", "tolerance must be positive");
        }
        let support = match cfg.cluster.kind {
            ClusterKind::Thomas => 6.0 * cfg.cluster.sigma,
            ClusterKind::Matern => cfg.cluster.r_c,
        };
        if !(self.trunc_radius.is_finite() && self.trunc_radius > support) {
            e.push(
                "trunc_radius",
                format!(
                    "truncation radius {} must exceed the cluster support {support}",
                    self.trunc_radius
                ),
            );
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(e)
        }
    }
}

/// Flat configuration file schema. Powers in dBm, gains in dB, angles in
/// degrees, densities per m², lengths in m, time in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda_u: f64,
    pub lambda_g: f64,
    pub p_u_dbm: f64,
    pub p_g_dbm: f64,
    pub b_u: f64,
    pub b_g: f64,
    pub h: f64,
    pub cluster: ClusterKind,
    pub sigma: f64,
    pub r_c: f64,
    pub env_b: f64,
    pub env_c: f64,
    pub epsilon: f64,
    pub kappa_los_uav: f64,
    pub kappa_nlos_uav: f64,
    pub alpha_los_uav: f64,
    pub alpha_nlos_uav: f64,
    pub kappa_los_gbs: f64,
    pub kappa_nlos_gbs: f64,
    pub alpha_los_gbs: f64,
    pub alpha_nlos_gbs: f64,
    pub main_lobe_bs_db: f64,
    pub side_lobe_bs_db: f64,
    pub main_lobe_ue_db: f64,
    pub side_lobe_ue_db: f64,
    pub beamwidth_bs_deg: f64,
    pub beamwidth_ue_deg: f64,
    pub n_los: u32,
    pub n_nlos: u32,
    /// Thermal noise; when absent it follows from `bandwidth` and `noise_figure_db`.
    pub sigma_n2_dbm: Option<f64>,
    pub noise_figure_db: f64,
    pub sigma_c2_dbm: f64,
    pub frame: f64,
    pub tau: f64,
    pub rho: f64,
    pub p_t_ul_dbm: f64,
    pub bandwidth: f64,
    pub tiers: Vec<UavTierFile>,
    pub parent_tier: usize,
    pub gamma_order: usize,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    pub trunc_radius: f64,
    pub mc_trials: usize,
    pub mc_seed: u64,
    pub include_interference: bool,
    pub fixed_los_thinning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavTierFile {
    pub density: f64,
    pub p_dbm: f64,
    #[serde(default = "unit_bias")]
    pub bias: f64,
    pub height: f64,
}

fn unit_bias() -> f64 {
    1.0
}

impl Default for ConfigFile {
    fn default() -> Self {
        let s = AnalysisSettings::default();
        ConfigFile {
            lambda_u: 1e-4,
            lambda_g: 1e-5,
            p_u_dbm: 24.0,
            p_g_dbm: 34.0,
            b_u: 1.0,
            b_g: 1.0,
            h: 50.0,
            cluster: ClusterKind::Thomas,
            sigma: 10.0,
            r_c: 20.0,
            env_b: 0.136,
            env_c: 11.95,
            epsilon: 1.0 / 141.4,
            kappa_los_uav: 10f64.powf(3.08),
            kappa_nlos_uav: 10f64.powf(0.27),
            alpha_los_uav: 2.09,
            alpha_nlos_uav: 3.75,
            kappa_los_gbs: 10f64.powf(3.08),
            kappa_nlos_gbs: 10f64.powf(0.27),
            alpha_los_gbs: 2.09,
            alpha_nlos_gbs: 3.75,
            main_lobe_bs_db: 10.0,
            side_lobe_bs_db: -10.0,
            main_lobe_ue_db: 10.0,
            side_lobe_ue_db: -10.0,
            beamwidth_bs_deg: 30.0,
            beamwidth_ue_deg: 30.0,
            n_los: 2,
            n_nlos: 3,
            sigma_n2_dbm: None,
            noise_figure_db: 10.0,
            sigma_c2_dbm: -50.0,
            frame: 1.0,
            tau: 1.0,
            rho: 0.5,
            p_t_ul_dbm: 1.0,
            bandwidth: 100e6,
            tiers: Vec::new(),
            parent_tier: 0,
            gamma_order: s.gamma_order,
            quad_rel_tol: s.quad_rel_tol,
            quad_abs_tol: s.quad_abs_tol,
            trunc_radius: s.trunc_radius,
            mc_trials: s.mc_trials,
            mc_seed: s.mc_seed,
            include_interference: s.include_interference,
            fixed_los_thinning: s.fixed_los_thinning,
        }
    }
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Physical model in SI units, validated.
    pub fn to_network(&self) -> Result<NetworkConfig> {
        let cfg = self.build_network();
        cfg.validate()?;
        Ok(cfg)
    }

    fn build_network(&self) -> NetworkConfig {
        let cluster = match self.cluster {
            ClusterKind::Thomas => ClusterSpec::thomas(self.sigma),
            ClusterKind::Matern => ClusterSpec::matern(self.r_c),
        };
        let sigma_n2 = match self.sigma_n2_dbm {
            Some(dbm) => dbm_to_watts(dbm),
            None => thermal_noise_power(self.bandwidth, self.noise_figure_db),
        };
        NetworkConfig {
            lambda_u: self.lambda_u,
            lambda_g: self.lambda_g,
            p_u: dbm_to_watts(self.p_u_dbm),
            p_g: dbm_to_watts(self.p_g_dbm),
            b_u: self.b_u,
            b_g: self.b_g,
            h: self.h,
            cluster,
            env_b: self.env_b,
            env_c: self.env_c,
            epsilon: self.epsilon,
            uav_path_loss: PathLossPair {
                kappa_los: self.kappa_los_uav,
                kappa_nlos: self.kappa_nlos_uav,
                alpha_los: self.alpha_los_uav,
                alpha_nlos: self.alpha_nlos_uav,
            },
            gbs_path_loss: PathLossPair {
                kappa_los: self.kappa_los_gbs,
                kappa_nlos: self.kappa_nlos_gbs,
                alpha_los: self.alpha_los_gbs,
                alpha_nlos: self.alpha_nlos_gbs,
            },
            antenna: AntennaPattern {
                main_bs: db_to_linear(self.main_lobe_bs_db),
                side_bs: db_to_linear(self.side_lobe_bs_db),
                main_ue: db_to_linear(self.main_lobe_ue_db),
                side_ue: db_to_linear(self.side_lobe_ue_db),
                theta_bs: self.beamwidth_bs_deg.to_radians(),
                theta_ue: self.beamwidth_ue_deg.to_radians(),
            },
            n_los: self.n_los,
            n_nlos: self.n_nlos,
            sigma_n2,
            sigma_c2: dbm_to_watts(self.sigma_c2_dbm),
            frame: self.frame,
            tau: self.tau,
            rho: self.rho,
            p_t_ul: dbm_to_watts(self.p_t_ul_dbm),
            bandwidth: self.bandwidth,
            tiers: self
                .tiers
                .iter()
                .map(|t| UavTierSpec {
                    density: t.density,
                    power: dbm_to_watts(t.p_dbm),
                    bias: t.bias,
                    height: t.height,
                })
                .collect(),
            parent_tier: self.parent_tier,
        }
    }

    pub fn settings(&self) -> AnalysisSettings {
        AnalysisSettings {
            gamma_order: self.gamma_order,
            quad_rel_tol: self.quad_rel_tol,
            quad_abs_tol: self.quad_abs_tol,
            trunc_radius: self.trunc_radius,
            mc_trials: self.mc_trials,
            mc_seed: self.mc_seed,
            include_interference: self.include_interference,
            fixed_los_thinning: self.fixed_los_thinning,
        }
    }

    /// Physical model and numerical settings, both validated.
    pub fn resolve(&self) -> Result<(NetworkConfig, AnalysisSettings)> {
        let cfg = self.build_network();
        let settings = self.settings();
        let mut errs = cfg.validate().err().unwrap_or_default();
        if let Err(more) = settings.validate(&cfg) {
            errs.0.extend(more.0);
        }
        if errs.is_empty() {
            Ok((cfg, settings))
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Inverse of [`ConfigFile::to_network`] for the physical fields;
    /// numerical settings come from `settings`.
    pub fn from_network(cfg: &NetworkConfig, settings: &AnalysisSettings) -> Self {
        ConfigFile {
            lambda_u: cfg.lambda_u,
            lambda_g: cfg.lambda_g,
            p_u_dbm: watts_to_dbm(cfg.p_u),
            p_g_dbm: watts_to_dbm(cfg.p_g),
            b_u: cfg.b_u,
            b_g: cfg.b_g,
            h: cfg.h,
            cluster: cfg.cluster.kind,
            sigma: if cfg.cluster.kind == ClusterKind::Thomas { cfg.cluster.sigma } else { 10.0 },
            r_c: if cfg.cluster.kind == ClusterKind::Matern { cfg.cluster.r_c } else { 20.0 },
            env_b: cfg.env_b,
            env_c: cfg.env_c,
            epsilon: cfg.epsilon,
            kappa_los_uav: cfg.uav_path_loss.kappa_los,
            kappa_nlos_uav: cfg.uav_path_loss.kappa_nlos,
            alpha_los_uav: cfg.uav_path_loss.alpha_los,
            alpha_nlos_uav: cfg.uav_path_loss.alpha_nlos,
            kappa_los_gbs: cfg.gbs_path_loss.kappa_los,
            kappa_nlos_gbs: cfg.gbs_path_loss.kappa_nlos,
            alpha_los_gbs: cfg.gbs_path_loss.alpha_los,
            alpha_nlos_gbs: cfg.gbs_path_loss.alpha_nlos,
            main_lobe_bs_db: linear_to_db(cfg.antenna.main_bs),
            side_lobe_bs_db: linear_to_db(cfg.antenna.side_bs),
            main_lobe_ue_db: linear_to_db(cfg.antenna.main_ue),
            side_lobe_ue_db: linear_to_db(cfg.antenna.side_ue),
            beamwidth_bs_deg: cfg.antenna.theta_bs.to_degrees(),
            beamwidth_ue_deg: cfg.antenna.theta_ue.to_degrees(),
            n_los: cfg.n_los,
            n_nlos: cfg.n_nlos,
            sigma_n2_dbm: Some(watts_to_dbm(cfg.sigma_n2)),
            noise_figure_db: 10.0,
            sigma_c2_dbm: watts_to_dbm(cfg.sigma_c2),
            frame: cfg.frame,
            tau: cfg.tau,
            rho: cfg.rho,
            p_t_ul_dbm: watts_to_dbm(cfg.p_t_ul),
            bandwidth: cfg.bandwidth,
            tiers: cfg
                .tiers
                .iter()
                .map(|t| UavTierFile {
                    density: t.density,
                    p_dbm: watts_to_dbm(t.power),
                    bias: t.bias,
                    height: t.height,
                })
                .collect(),
            parent_tier: cfg.parent_tier,
            gamma_order: settings.gamma_order,
            quad_rel_tol: settings.quad_rel_tol,
            quad_abs_tol: settings.quad_abs_tol,
            trunc_radius: settings.trunc_radius,
            mc_trials: settings.mc_trials,
            mc_seed: settings.mc_seed,
            include_interference: settings.include_interference,
            fixed_los_thinning: settings.fixed_los_thinning,
        }
    }

    /// Names of the scalar fields a sweep may vary.
    pub fn scalar_fields() -> Vec<String> {
        match serde_json::to_value(ConfigFile::default()) {
            Ok(serde_json::Value::Object(map)) => map
                .into_iter()
                .filter(|(k, v)| v.is_number() || k == "sigma_n2_dbm")
                .map(|(k, _)| k)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Set a scalar field by name, in file units.
    pub fn set_scalar(&mut self, name: &str, value: f64) -> Result<()> {
        let mut v = serde_json::to_value(&*self).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = v
            .as_object_mut()
            .ok_or_else(|| Error::Parse("configuration is not an object".into()))?;
        let slot = obj
            .get_mut(name)
            .ok_or_else(|| Error::Domain(format!("unknown parameter '{name}'")))?;
        let is_int = slot.is_u64() || slot.is_i64();
        *slot = if is_int {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(Error::Domain(format!(
                    "parameter '{name}' takes non-negative integers, got {value}"
                )));
            }
            serde_json::Value::from(value as u64)
        } else if slot.is_number() || slot.is_null() {
            serde_json::Value::from(value)
        } else {
            return Err(Error::Domain(format!("parameter '{name}' is not a scalar")));
        };
        *self = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}
