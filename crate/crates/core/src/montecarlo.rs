//! Monte Carlo simulator of the same network, built from sampled point
//! patterns rather than from any analytical expression.
//!
//! The typical UE sits at the origin. Its cluster center is drawn from the
//! cluster offset law, every PPP tier is drawn on a disc of radius
//! `trunc_radius`, and each link gets an independent LOS/NLOS state, antenna
//! gain and Nakagami fade. The UE associates with the largest biased mean
//! received power; the serving link uses the aligned main-lobe gain.
//!
//! Trial `i` draws from ChaCha8 streams keyed by (seed, i, purpose), and
//! trials are reduced in fixed-size chunks in index order, so results do not
//! depend on the number of worker threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{gain_pmf, sample_gain, GainLevel, LinkState, Nakagami};
use crate::config::{AnalysisSettings, NetworkConfig};
use crate::downlink::InterferenceSet;
use crate::error::{Error, Result};
use crate::geometry::{poisson_count, sample_cluster_offset, Network, TierId, TierKind};
use crate::quadrature::{integrate, QuadOptions};

/// Trials per reduction chunk.
const CHUNK: usize = 1024;

/// Tail-to-window ratio of mean interference above which a warning is raised.
const TRUNCATION_LIMIT: f64 = 1e-3;

/// 1.96·√(p(1−p)/n).
pub fn confidence(p_hat: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    1.96 * (p_hat * (1.0 - p_hat) / n as f64).max(0.0).sqrt()
}

/// Empirical frequency of an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialEstimate {
    pub estimate: f64,
    pub trials: usize,
    pub half_width: f64,
    pub seed: u64,
}

impl TrialEstimate {
    pub fn from_count(hits: u64, trials: usize, seed: u64) -> Self {
        let p = if trials == 0 { f64::NAN } else { hits as f64 / trials as f64 };
        TrialEstimate {
            estimate: p,
            trials,
            half_width: confidence(p, trials),
            seed,
        }
    }
}

/// Empirical mean with a normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub trials: usize,
}

/// Thresholds evaluated jointly on every downlink realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DownlinkProbe {
    pub gamma_e: f64,
    pub gamma_sinr: f64,
    pub tau: f64,
    pub rho: f64,
}

/// What the downlink simulation measures.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DownlinkPlan {
    pub probes: Vec<DownlinkProbe>,
    /// E[e^{−tI}] over an interference subset.
    pub laplace: Vec<(f64, InterferenceSet)>,
    /// P(I > x).
    pub ccdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEstimate {
    pub probe: DownlinkProbe,
    pub energy: TrialEstimate,
    pub sinr: TrialEstimate,
    pub success: TrialEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DownlinkEstimates {
    /// Association frequency per (tier, state), in association order.
    pub association: Vec<(TierId, LinkState, TrialEstimate)>,
    pub probes: Vec<ProbeEstimate>,
    pub laplace: Vec<(f64, MeanEstimate)>,
    pub ccdf: Vec<(f64, TrialEstimate)>,
    /// Set when interference from beyond the window is not negligible.
    pub truncation_warning: Option<String>,
}

impl DownlinkEstimates {
    pub fn association(&self, tier: TierId, state: LinkState) -> Option<TrialEstimate> {
        self.association
            .iter()
            .find(|(t, s, _)| *t == tier && *s == state)
            .map(|a| a.2)
    }
}

/// How the uplink simulation obtains p_active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ActiveMode {
    /// Use this probability directly.
    Given(f64),
    /// Estimate it from downlink energy trials on the same seed.
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UplinkEstimates {
    pub p_active: TrialEstimate,
    pub coverage: TrialEstimate,
}

/// One downlink realization, reduced to what the estimators need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownlinkSample {
    pub tier: usize,
    pub state: LinkState,
    /// 3D serving distance.
    pub distance: f64,
    pub p_m: f64,
    /// Interference from the typical UE's own cluster center.
    pub i_cluster: f64,
    /// Interference from every PPP tier.
    pub i_ppp: f64,
}

impl DownlinkSample {
    pub fn interference(&self) -> f64 {
        self.i_cluster + self.i_ppp
    }
}

#[derive(Debug, Clone, Copy)]
enum Purpose {
    Geometry = 0,
    States = 1,
    Fading = 2,
    Activity = 3,
    UplinkGeometry = 4,
    UplinkStates = 5,
    UplinkFading = 6,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    tier: usize,
    x: f64,
    state: LinkState,
}

pub struct Simulator {
    pub cfg: NetworkConfig,
    pub settings: AnalysisSettings,
    pub net: Network,
    gains: [GainLevel; 4],
    fading: [Nakagami; 2],
    g0: f64,
    base: ChaCha8Rng,
}

impl Simulator {
    pub fn new(cfg: &NetworkConfig, settings: &AnalysisSettings) -> Result<Self> {
        let net = Network::new(cfg, settings)?;
        Ok(Simulator {
            cfg: cfg.clone(),
            settings: settings.clone(),
            net,
            gains: gain_pmf(&cfg.antenna),
            fading: [Nakagami::new(cfg.n_los)?, Nakagami::new(cfg.n_nlos)?],
            g0: cfg.antenna.main_link_gain(),
            base: ChaCha8Rng::seed_from_u64(settings.mc_seed),
        })
    }

    fn rng(&self, trial: u64, purpose: Purpose) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_stream(trial.wrapping_mul(8) + purpose as u64);
        r
    }

    fn state<R: Rng>(&self, tier: usize, ground: f64, rng: &mut R) -> LinkState {
        let p = self.net.tiers[tier].los.p_los_ground(ground);
        if rng.random::<f64>() < p {
            LinkState::Los
        } else {
            LinkState::Nlos
        }
    }

    /// Biased mean received power of a candidate.
    fn metric(&self, p: &Point) -> f64 {
        let t = &self.net.tiers[p.tier];
        t.power * t.bias / (t.path_loss.kappa(p.state) * p.x.powf(t.path_loss.alpha(p.state)))
    }

    fn received(&self, p: &Point, gain: f64, fade: f64) -> f64 {
        let t = &self.net.tiers[p.tier];
        t.power * gain * fade / (t.path_loss.kappa(p.state) * p.x.powf(t.path_loss.alpha(p.state)))
    }

    /// Downlink realization number `trial`.
    pub fn sample_downlink(&self, trial: u64) -> DownlinkSample {
        self.sample_downlink_into(trial, &mut Vec::new())
    }

    /// One downlink realization. `points` is scratch space.
    fn sample_downlink_into(&self, trial: u64, points: &mut Vec<Point>) -> DownlinkSample {
        let mut geo = self.rng(trial, Purpose::Geometry);
        let mut st = self.rng(trial, Purpose::States);
        let mut fd = self.rng(trial, Purpose::Fading);
        points.clear();
        let rw = self.net.trunc_radius;
        for (k, t) in self.net.tiers.iter().enumerate() {
            match t.kind {
                TierKind::Cluster => {
                    let o = sample_cluster_offset(&self.cfg.cluster, &mut geo);
                    let d = o[0].hypot(o[1]);
                    let state = self.state(k, d, &mut st);
                    points.push(Point {
                        tier: k,
                        x: t.slant_of(d),
                        state,
                    });
                }
                TierKind::Ppp => {
                    let n = poisson_count(t.density * PI * rw * rw, &mut geo);
                    for _ in 0..n {
                        let d = rw * geo.random::<f64>().sqrt();
                        let state = self.state(k, d, &mut st);
                        points.push(Point {
                            tier: k,
                            x: t.slant_of(d),
                            state,
                        });
                    }
                }
            }
        }
        // Strictly larger wins, so ties keep the earlier tier.
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let m = self.metric(p);
            if m > best_metric {
                best = i;
                best_metric = m;
            }
        }
        let serving = points[best];
        let p_m = self.received(&serving, self.g0, self.fading[serving.state.index()].sample(&mut fd));
        let (mut i_cluster, mut i_ppp) = (0.0, 0.0);
        for (i, p) in points.iter().enumerate() {
            if i == best {
                continue;
            }
            let g = sample_gain(&self.gains, &mut fd);
            let h = self.fading[p.state.index()].sample(&mut fd);
            let r = self.received(p, g, h);
            match self.net.tiers[p.tier].kind {
                TierKind::Cluster => i_cluster += r,
                TierKind::Ppp => i_ppp += r,
            }
        }
        DownlinkSample {
            tier: serving.tier,
            state: serving.state,
            distance: serving.x,
            p_m,
            i_cluster,
            i_ppp,
        }
    }

    /// Runs `trials` downlink realizations and measures `plan`.
    pub fn simulate_downlink(&self, plan: &DownlinkPlan, trials: usize) -> Result<DownlinkEstimates> {
        if trials == 0 {
            return Err(Error::Domain("at least one trial is needed".into()));
        }
        for p in &plan.probes {
            if !(p.rho > 0.0 && p.rho < 1.0) || !(p.tau > 0.0) {
                return Err(Error::Domain(format!("probe needs 0 < rho < 1 and tau > 0: {p:?}")));
            }
        }
        let ntiers = self.net.tiers.len();
        let chunks = trials.div_ceil(CHUNK);
        let parts: Vec<Acc> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = Acc::new(ntiers, plan);
                let mut points = Vec::new();
                let end = ((c + 1) * CHUNK).min(trials);
                for trial in c * CHUNK..end {
                    let s = self.sample_downlink_into(trial as u64, &mut points);
                    acc.record(&self.cfg, plan, &s);
                }
                acc
            })
            .collect();
        let mut total = Acc::new(ntiers, plan);
        for p in &parts {
            total.merge(p);
        }
        let seed = self.settings.mc_seed;
        let mut association = Vec::new();
        for (k, t) in self.net.tiers.iter().enumerate() {
            for s in LinkState::BOTH {
                association.push((t.id, s, TrialEstimate::from_count(total.assoc[k][s.index()], trials, seed)));
            }
        }
        let probes = plan
            .probes
            .iter()
            .enumerate()
            .map(|(i, &probe)| ProbeEstimate {
                probe,
                energy: TrialEstimate::from_count(total.energy[i], trials, seed),
                sinr: TrialEstimate::from_count(total.sinr[i], trials, seed),
                success: TrialEstimate::from_count(total.success[i], trials, seed),
            })
            .collect();
        let n = trials as f64;
        let laplace = plan
            .laplace
            .iter()
            .zip(&total.laplace)
            .map(|(&(t, _), &(sum, sq))| {
                let mean = sum / n;
                let var = (sq / n - mean * mean).max(0.0);
                (
                    t,
                    MeanEstimate {
                        mean,
                        half_width: 1.96 * (var / n).sqrt(),
                        trials,
                    },
                )
            })
            .collect();
        let ccdf = plan
            .ccdf
            .iter()
            .zip(&total.ccdf)
            .map(|(&x, &h)| (x, TrialEstimate::from_count(h, trials, seed)))
            .collect();
        let truncation_warning = self.truncation_warning()?;
        if let Some(w) = &truncation_warning {
            log::warn!("{w}");
        }
        Ok(DownlinkEstimates {
            association,
            probes,
            laplace,
            ccdf,
            truncation_warning,
        })
    }

    /// Compares the mean interference a PPP tier would add from beyond the
    /// window with what it contributes inside it.
    pub fn truncation_warning(&self) -> Result<Option<String>> {
        let mean_gain: f64 = self.gains.iter().map(|g| g.gain * g.prob).sum();
        let rw = self.net.trunc_radius;
        let opts = QuadOptions::new(1e-6, 0.0);
        let (mut inside, mut outside) = (0.0, 0.0);
        for t in self.net.tiers.iter().filter(|t| t.kind == TierKind::Ppp && t.density > 0.0) {
            let density = |d: f64| {
                let mut v = 0.0;
                for s in LinkState::BOTH {
                    let x = t.slant_of(d);
                    v += t.los.p_state_ground(s, d) / (t.path_loss.kappa(s) * x.powf(t.path_loss.alpha(s)));
                }
                2.0 * PI * t.density * t.power * mean_gain * v * d
            };
            let lo = if t.height > 0.0 { 0.0 } else { 1.0 };
            inside += integrate(density, lo, rw, &opts).map_err(|e| Error::Domain(e.to_string()))?.value;
            outside += integrate(density, rw, f64::INFINITY, &opts)
                .map_err(|e| Error::Domain(e.to_string()))?
                .value;
        }
        if inside > 0.0 && outside / inside > TRUNCATION_LIMIT {
            return Ok(Some(format!(
                "interference from beyond the {rw} m window is {:.1e} of the in-window mean",
                outside / inside
            )));
        }
        Ok(None)
    }

    /// Uplink SINR coverage of the typical UE towards its cluster UAV, with
    /// one potential interferer per foreign cluster active with p_active.
    pub fn simulate_uplink(&self, tau: f64, rho: f64, gamma_ul: f64, mode: ActiveMode, trials: usize) -> Result<UplinkEstimates> {
        if trials == 0 {
            return Err(Error::Domain("at least one trial is needed".into()));
        }
        let seed = self.settings.mc_seed;
        let frame = self.cfg.frame;
        let p_active = match mode {
            ActiveMode::Given(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!("p_active must lie in [0, 1], got {p}")));
                }
                TrialEstimate {
                    estimate: p,
                    trials: 0,
                    half_width: 0.0,
                    seed,
                }
            }
            ActiveMode::Simulated => {
                let need = (frame - tau) * self.cfg.p_t_ul;
                let hits: u64 = self.count_parallel(trials, |trial, points| {
                    let s = self.sample_downlink_into(trial, points);
                    need <= 0.0 || tau * (1.0 - rho) * (s.p_m + s.interference()) > need
                });
                TrialEstimate::from_count(hits, trials, seed)
            }
        };
        let p = p_active.estimate;
        let parent = &self.net.tiers[1 + self.cfg.parent_tier];
        let cl = self.net.cluster();
        let rw = self.net.trunc_radius;
        let noise = self.cfg.sigma_n2;
        let hits = self.count_parallel(trials, |trial, _| {
            let mut geo = self.rng(trial, Purpose::UplinkGeometry);
            let mut st = self.rng(trial, Purpose::UplinkStates);
            let mut fd = self.rng(trial, Purpose::UplinkFading);
            let mut act = self.rng(trial, Purpose::Activity);
            let o = sample_cluster_offset(&self.cfg.cluster, &mut geo);
            let d0 = o[0].hypot(o[1]);
            let s0 = if st.random::<f64>() < cl.los.p_los_ground(d0) {
                LinkState::Los
            } else {
                LinkState::Nlos
            };
            let x0 = cl.slant_of(d0);
            let signal = self.cfg.p_t_ul * self.g0 * self.fading[s0.index()].sample(&mut fd)
                / (cl.path_loss.kappa(s0) * x0.powf(cl.path_loss.alpha(s0)));
            // Foreign cluster centers around the receiving UAV; each holds
            // one candidate interferer.
            let n = poisson_count(parent.density * PI * rw * rw, &mut geo);
            let mut interference = 0.0;
            for _ in 0..n {
                let r = rw * geo.random::<f64>().sqrt();
                let phi = 2.0 * PI * geo.random::<f64>();
                let off = sample_cluster_offset(&self.cfg.cluster, &mut geo);
                if act.random::<f64>() >= p {
                    continue;
                }
                let v = (r * phi.cos() + off[0]).hypot(r * phi.sin() + off[1]);
                let pl = if self.settings.fixed_los_thinning {
                    parent.los.p_los_ground(0.5 / parent.density.sqrt())
                } else {
                    parent.los.p_los_ground(v)
                };
                let s = if st.random::<f64>() < pl { LinkState::Los } else { LinkState::Nlos };
                let x = parent.slant_of(v);
                let g = sample_gain(&self.gains, &mut fd);
                let h = self.fading[s.index()].sample(&mut fd);
                interference += self.cfg.p_t_ul * g * h / (parent.path_loss.kappa(s) * x.powf(parent.path_loss.alpha(s)));
            }
            if !self.settings.include_interference {
                interference = 0.0;
            }
            signal / (noise + interference) > gamma_ul
        });
        Ok(UplinkEstimates {
            p_active,
            coverage: TrialEstimate::from_count(hits, trials, seed),
        })
    }

    fn count_parallel<F>(&self, trials: usize, f: F) -> u64
    where
        F: Fn(u64, &mut Vec<Point>) -> bool + Sync,
    {
        let chunks = trials.div_ceil(CHUNK);
        let parts: Vec<u64> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut points = Vec::new();
                let end = ((c + 1) * CHUNK).min(trials);
                (c * CHUNK..end).filter(|&t| f(t as u64, &mut points)).count() as u64
            })
            .collect();
        parts.iter().sum()
    }
}

/// Per-chunk counters.
#[derive(Debug, Clone)]
struct Acc {
    assoc: Vec<[u64; 2]>,
    energy: Vec<u64>,
    sinr: Vec<u64>,
    success: Vec<u64>,
    laplace: Vec<(f64, f64)>,
    ccdf: Vec<u64>,
}

impl Acc {
    fn new(ntiers: usize, plan: &DownlinkPlan) -> Self {
        let np = plan.probes.len();
        Acc {
            assoc: vec![[0; 2]; ntiers],
            energy: vec![0; np],
            sinr: vec![0; np],
            success: vec![0; np],
            laplace: vec![(0.0, 0.0); plan.laplace.len()],
            ccdf: vec![0; plan.ccdf.len()],
        }
    }

    fn record(&mut self, cfg: &NetworkConfig, plan: &DownlinkPlan, s: &DownlinkSample) {
        self.assoc[s.tier][s.state.index()] += 1;
        let i = s.interference();
        for (k, p) in plan.probes.iter().enumerate() {
            let e = p.tau * (1.0 - p.rho) * (s.p_m + i) > p.gamma_e;
            let q = s.p_m / (cfg.sigma_c2 / p.rho + cfg.sigma_n2 + i) > p.gamma_sinr;
            self.energy[k] += u64::from(e);
            self.sinr[k] += u64::from(q);
            self.success[k] += u64::from(e && q);
        }
        for (k, &(t, set)) in plan.laplace.iter().enumerate() {
            let x = match set {
                InterferenceSet::All => i,
                InterferenceSet::Cluster => s.i_cluster,
                InterferenceSet::Ppp => s.i_ppp,
            };
            let v = (-t * x).exp();
            self.laplace[k].0 += v;
            self.laplace[k].1 += v * v;
        }
        for (k, &x) in plan.ccdf.iter().enumerate() {
            self.ccdf[k] += u64::from(i > x);
        }
    }

    fn merge(&mut self, o: &Acc) {
        for (a, b) in self.assoc.iter_mut().zip(&o.assoc) {
            a[0] += b[0];
            a[1] += b[1];
        }
        for (a, b) in [
            (&mut self.energy, &o.energy),
            (&mut self.sinr, &o.sinr),
            (&mut self.success, &o.success),
            (&mut self.ccdf, &o.ccdf),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.laplace.iter_mut().zip(&o.laplace) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }
}
