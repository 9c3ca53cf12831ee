//! Downlink energy, SINR and successful-transmission coverage.
//!
//! Threshold events on non-exponential random variables are handled with the
//! normalized-Gamma indicator approximation
//! P(X > y) ≈ E[(1 − e^{−aX/y})^N] = Σ_{n=0}^N (−1)^n C(N,n) E[e^{−naX/y}],
//! a = N(N!)^{−1/N}, which turns every coverage metric into an alternating sum
//! of interference Laplace transforms. SINR coverage uses the exact Nakagami
//! tail of the serving link instead. Conditional metrics are expectations over
//! the serving distance; all terms of one alternating sum share the quadrature
//! nodes of a single vector-valued integral.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::Serialize;

use crate::association::{association_probabilities, exclusion_radius, serving_breaks, serving_weight, AssociationMatrix};
use crate::channel::{gain_pmf, GainLevel, LinkState};
use crate::config::{AnalysisSettings, NetworkConfig};
use crate::error::{Error, QuadContext, Result};
use crate::geometry::{Network, TierId, TierKind};
use crate::quadrature::{integrate_vec, neumaier_sum, QuadOptions};

/// E^{hv} = τ(1−ρ)(P_m + I). Receiver noise is not harvested.
pub fn harvested_energy_sample(p_m: f64, interference: f64, tau: f64, rho: f64) -> f64 {
    tau * (1.0 - rho) * (p_m + interference)
}

/// SINR = P_m / (σ_c²/ρ + σ_n² + I).
pub fn sinr_sample(p_m: f64, interference: f64, rho: f64, sigma_c2: f64, sigma_n2: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Domain("SINR is undefined for rho = 0: the whole signal is harvested".into()));
    }
    Ok(p_m / (sigma_c2 / rho + sigma_n2 + interference))
}

/// a = N (N!)^{−1/N}.
pub fn gamma_constant(n: usize) -> f64 {
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    n as f64 * (-ln_fact / n as f64).exp()
}

/// C(n, k) as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Which interference terms a Laplace transform includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceSet {
    All,
    /// Only the typical UE's own cluster center (when it is not the server).
    Cluster,
    /// Only the PPP tiers.
    Ppp,
}

impl InterferenceSet {
    fn admits(self, kind: TierKind) -> bool {
        match self {
            InterferenceSet::All => true,
            InterferenceSet::Cluster => kind == TierKind::Cluster,
            InterferenceSet::Ppp => kind == TierKind::Ppp,
        }
    }
}

/// Coverage of one serving (tier, state) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkCoverage {
    pub tier: TierId,
    pub state: LinkState,
    /// A_{j,s}.
    pub association: f64,
    /// Coverage conditioned on the serving pair; NaN when A_{j,s} = 0.
    pub conditional: f64,
}

/// A coverage metric split by serving pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub total: f64,
    pub links: Vec<LinkCoverage>,
}

impl Coverage {
    /// Σ_s P^c_{j,s} A_{j,s} for one tier.
    pub fn tier_total(&self, tier: TierId) -> f64 {
        self.links
            .iter()
            .filter(|l| l.tier == tier && l.association > 0.0)
            .map(|l| l.conditional * l.association)
            .sum()
    }

    pub fn conditional(&self, tier: TierId, state: LinkState) -> Option<f64> {
        self.links
            .iter()
            .find(|l| l.tier == tier && l.state == state)
            .map(|l| l.conditional)
    }
}

/// Downlink metrics at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub gamma_e: f64,
    pub gamma_sinr: f64,
    pub tau: f64,
    pub rho: f64,
    pub gamma_order: usize,
    pub include_interference: bool,
    /// ω, the interference level separating the energy- and SINR-limited regimes.
    pub omega: f64,
    pub energy: Coverage,
    pub sinr: Coverage,
    pub success: Coverage,
}

/// Precomputed network, association probabilities and gain law.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    pub cfg: NetworkConfig,
    pub settings: AnalysisSettings,
    pub net: Network,
    pub assoc: AssociationMatrix,
    gains: [GainLevel; 4],
    g0: f64,
}

impl CoverageModel {
    pub fn new(cfg: &NetworkConfig, settings: &AnalysisSettings) -> Result<Self> {
        let net = Network::new(cfg, settings)?;
        let assoc = association_probabilities(&net, &outer_opts(settings))?;
        Ok(CoverageModel {
            cfg: cfg.clone(),
            settings: settings.clone(),
            net,
            assoc,
            gains: gain_pmf(&cfg.antenna),
            g0: cfg.antenna.main_link_gain(),
        })
    }

    fn inner_opts(&self) -> QuadOptions {
        QuadOptions::new(self.settings.quad_rel_tol * 1e-2, self.settings.quad_abs_tol * 1e-2)
    }

    fn outer_opts(&self) -> QuadOptions {
        outer_opts(&self.settings)
    }

    fn gamma_a(&self) -> f64 {
        gamma_constant(self.settings.gamma_order)
    }

    /// Laplace transform of the interference seen by a UE served by tier
    /// `j` in state `s` at 3D distance `x`, evaluated at every entry of
    /// `args`. Results are multiplied into `out`.
    pub fn laplace(&self, j: usize, s: LinkState, x: f64, args: &[f64], set: InterferenceSet, out: &mut [f64]) -> Result<()> {
        if !self.settings.include_interference {
            return Ok(());
        }
        let tj = &self.net.tiers[j];
        let opts = self.inner_opts();
        let n = args.len();
        for (k, tk) in self.net.tiers.iter().enumerate() {
            if !set.admits(tk.kind) {
                continue;
            }
            match tk.kind {
                TierKind::Cluster => {
                    if k == j {
                        continue;
                    }
                    let mut num = vec![0.0; n];
                    let mut den = 0.0;
                    for b in LinkState::BOTH {
                        let q = exclusion_radius(tk, b, tj, s, x);
                        let tail = tk.cluster_tail(b, q);
                        if tail <= 0.0 {
                            continue;
                        }
                        den += tail;
                        let lo = tk.ground_of(q.max(tk.height));
                        let nb = self.cfg.nakagami(b);
                        let (kappa, alpha) = (tk.path_loss.kappa(b), tk.path_loss.alpha(b));
                        let r = integrate_vec(
                            |d, o| {
                                let m = tk.mass_density_ground(b, d);
                                if m == 0.0 {
                                    return;
                                }
                                let base = tk.power / (kappa * tk.slant_of(d).powf(alpha) * nb as f64);
                                for (oi, &t) in o.iter_mut().zip(args) {
                                    *oi = m * self.mean_mgf(t * base, nb);
                                }
                            },
                            n,
                            lo,
                            tk.d_max,
                            &[],
                            &opts,
                        )
                        .context(|| format!("cluster interference Laplace transform ({b})"))?;
                        num.iter_mut().zip(&r.values).for_each(|(a, v)| *a += v);
                    }
                    if den > 0.0 {
                        for (o, v) in out.iter_mut().zip(&num) {
                            *o *= (v / den).clamp(0.0, 1.0);
                        }
                    }
                }
                TierKind::Ppp => {
                    if tk.density == 0.0 {
                        continue;
                    }
                    let mut expo = vec![0.0; n];
                    for b in LinkState::BOTH {
                        let q = exclusion_radius(tk, b, tj, s, x);
                        let lo = tk.ground_of(q.max(tk.height));
                        if lo >= tk.d_max {
                            continue;
                        }
                        let nb = self.cfg.nakagami(b);
                        let (kappa, alpha) = (tk.path_loss.kappa(b), tk.path_loss.alpha(b));
                        // The integrand decays like a power of d, so integrate in
                        // u = ln(d + c), which keeps it smooth across decades.
                        let c = tk.height.max(1.0);
                        let r = integrate_vec(
                            |u, o| {
                                let dc = u.exp();
                                let d = dc - c;
                                let m = tk.mass_density_ground(b, d);
                                if m == 0.0 {
                                    return;
                                }
                                let base = tk.power / (kappa * tk.slant_of(d).powf(alpha) * nb as f64);
                                for (oi, &t) in o.iter_mut().zip(args) {
                                    *oi = dc * m * self.mean_mgf_complement(t * base, nb);
                                }
                            },
                            n,
                            (lo + c).ln(),
                            (tk.d_max + c).ln(),
                            &[],
                            &opts,
                        )
                        .context(|| format!("{} interference Laplace transform ({b})", tk.id))?;
                        expo.iter_mut().zip(&r.values).for_each(|(a, v)| *a += v);
                    }
                    for (o, e) in out.iter_mut().zip(&expo) {
                        *o *= (-e).exp();
                    }
                }
            }
        }
        Ok(())
    }

    /// E_G[(1 + yG)^{−N}].
    fn mean_mgf(&self, y: f64, nb: u32) -> f64 {
        self.gains.iter().map(|g| g.prob * mgf(y * g.gain, nb)).sum()
    }

    /// E_G[1 − (1 + yG)^{−N}].
    fn mean_mgf_complement(&self, y: f64, nb: u32) -> f64 {
        self.gains.iter().map(|g| g.prob * mgf_complement(y * g.gain, nb)).sum()
    }

    /// For every serving pair with A_{j,s} > 0, integrates
    /// `serving_weight · f(j, s, x)` over the serving ground distance. The
    /// result is the joint measure; dividing by A_{j,s} gives the conditional.
    fn integrate_serving<F>(&self, dim: usize, f: F) -> Result<Vec<(usize, LinkState, Vec<f64>)>>
    where
        F: Fn(usize, LinkState, f64, &mut [f64]) -> Result<()> + Sync,
    {
        let pairs: Vec<(usize, LinkState)> = (0..self.net.tiers.len())
            .flat_map(|j| LinkState::BOTH.into_iter().map(move |s| (j, s)))
            .filter(|&(j, s)| self.assoc.get(self.net.tiers[j].id, s) > 0.0)
            .collect();
        let opts = self.outer_opts();
        pairs
            .par_iter()
            .map(|&(j, s)| {
                let tj = &self.net.tiers[j];
                let failure: RefCell<Option<Error>> = RefCell::new(None);
                let r = integrate_vec(
                    |d, o| {
                        if failure.borrow().is_some() {
                            return;
                        }
                        let w = serving_weight(&self.net, j, s, d);
                        if w == 0.0 {
                            return;
                        }
                        if let Err(e) = f(j, s, tj.slant_of(d), o) {
                            *failure.borrow_mut() = Some(e);
                            o.iter_mut().for_each(|v| *v = 0.0);
                            return;
                        }
                        o.iter_mut().for_each(|v| *v *= w);
                    },
                    dim,
                    0.0,
                    tj.d_max,
                    &serving_breaks(&self.net, j, s),
                    &opts,
                )
                .context(|| format!("serving-distance expectation ({}, {s})", tj.id));
                if let Some(e) = failure.into_inner() {
                    return Err(e);
                }
                Ok((j, s, r?.values))
            })
            .collect()
    }

    /// Builds a [`Coverage`] from joint measures of component `idx`.
    fn assemble(&self, joint: &[(usize, LinkState, Vec<f64>)], idx: usize) -> Coverage {
        let mut links = Vec::new();
        let mut parts = Vec::new();
        for (j, tier) in self.net.tiers.iter().enumerate() {
            for s in LinkState::BOTH {
                let a = self.assoc.get(tier.id, s);
                let value = joint
                    .iter()
                    .find(|(jj, ss, _)| *jj == j && *ss == s)
                    .map(|(_, _, v)| v[idx]);
                let conditional = match value {
                    Some(v) if a > 0.0 => (v / a).clamp(0.0, 1.0),
                    _ => f64::NAN,
                };
                if a > 0.0 {
                    parts.push(conditional * a);
                }
                links.push(LinkCoverage {
                    tier: tier.id,
                    state: s,
                    association: a,
                    conditional,
                });
            }
        }
        Coverage {
            total: neumaier_sum(parts).clamp(0.0, 1.0),
            links,
        }
    }

    /// Arguments â_n = a n τ(1−ρ)/γ_E, n = 0..N.
    fn energy_args(&self, gamma_e: f64, tau: f64, rho: f64) -> Vec<f64> {
        let a = self.gamma_a();
        (0..=self.settings.gamma_order)
            .map(|n| a * n as f64 * tau * (1.0 - rho) / gamma_e)
            .collect()
    }

    /// Arguments a n/x, n = 0..N, for the interference CCDF.
    fn ccdf_args(&self, x: f64) -> Vec<f64> {
        let a = self.gamma_a();
        (0..=self.settings.gamma_order).map(|n| a * n as f64 / x).collect()
    }

    /// Σ_n (−1)^n C(N,n) terms[n], checked against the floating-point budget.
    fn alternating(&self, terms: &[f64], what: &str) -> Result<f64> {
        let order = terms.len() - 1;
        let mut scale = 0.0;
        let signed: Vec<f64> = terms
            .iter()
            .enumerate()
            .map(|(n, t)| {
                let c = binomial(order, n) * t;
                scale += c.abs();
                if n % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect();
        let budget = scale * self.inner_opts().rel_tol.max(f64::EPSILON);
        if budget > CANCELLATION_LIMIT {
            return Err(Error::Cancellation {
                context: format!(
                    "{what}: order {order}, error budget {budget:.1e}"
                ),
            });
        }
        Ok(neumaier_sum(signed))
    }

    /// Conditional metrics of `plan` for a server (j, s) at 3D distance `x`,
    /// written to `out` in the order energy, SINR, CCDF (absent ones skipped).
    /// One Laplace evaluation serves every argument of every metric.
    fn point_metrics(&self, plan: &Plan, j: usize, s: LinkState, x: f64, out: &mut [f64]) -> Result<()> {
        let tj = &self.net.tiers[j];
        let ns = self.cfg.nakagami(s);
        let (kappa, alpha) = (tj.path_loss.kappa(s), tj.path_loss.alpha(s));
        let loss = kappa * x.powf(alpha);

        let mut args = Vec::with_capacity(plan.len());
        args.extend_from_slice(&plan.energy);
        let sinr_unit = plan
            .sinr
            .map(|(gamma, _)| gamma_constant(ns as usize) * gamma * loss / (tj.power * self.g0));
        if let Some(unit) = sinr_unit {
            args.extend((1..=ns).map(|n| n as f64 * unit));
        }
        args.extend_from_slice(&plan.ccdf);
        let mut lap = vec![1.0; args.len()];
        self.laplace(j, s, x, &args, InterferenceSet::All, &mut lap)?;

        let mut slot = 0;
        let mut pos = 0;
        if !plan.energy.is_empty() {
            let base = tj.power * self.g0 / (loss * ns as f64);
            let terms: Vec<f64> = (0..plan.energy.len())
                .map(|i| mgf(args[i] * base, ns) * lap[i])
                .collect();
            out[slot] = self.alternating(&terms, "energy coverage")?;
            slot += 1;
            pos += plan.energy.len();
        }
        if let Some((_, rho)) = plan.sinr {
            let noise = self.cfg.sigma_c2 / rho + self.cfg.sigma_n2;
            let terms = (1..=ns as usize).map(|n| {
                let i = pos + n - 1;
                let t = binomial(ns as usize, n) * (-args[i] * noise).exp() * lap[i];
                if n % 2 == 1 {
                    t
                } else {
                    -t
                }
            });
            out[slot] = neumaier_sum(terms);
            slot += 1;
            pos += ns as usize;
        }
        if !plan.ccdf.is_empty() {
            out[slot] = self.alternating(&lap[pos..], "interference CCDF")?;
        }
        Ok(())
    }

    fn run(&self, plan: &Plan) -> Result<Vec<(usize, LinkState, Vec<f64>)>> {
        self.integrate_serving(plan.components(), |j, s, x, o| self.point_metrics(plan, j, s, x, o))
    }

    /// Energy coverage P(E^{hv} > γ_E).
    pub fn energy_coverage(&self, gamma_e: f64, tau: f64, rho: f64) -> Result<Coverage> {
        check_energy_inputs(gamma_e, tau, rho)?;
        if rho >= 1.0 || tau == 0.0 {
            return Ok(self.constant(0.0));
        }
        let plan = Plan {
            energy: self.energy_args(gamma_e, tau, rho),
            ..Plan::default()
        };
        let joint = self.run(&plan)?;
        Ok(self.assemble(&joint, 0))
    }

    /// SINR coverage P(SINR > γ); independent of τ.
    pub fn sinr_coverage(&self, gamma_sinr: f64, rho: f64) -> Result<Coverage> {
        check_sinr_inputs(gamma_sinr, rho)?;
        if rho == 0.0 {
            return Ok(self.constant(0.0));
        }
        let plan = Plan {
            sinr: Some((gamma_sinr, rho)),
            ..Plan::default()
        };
        let joint = self.run(&plan)?;
        Ok(self.assemble(&joint, 0))
    }

    /// P(I > x) split by serving pair (conditionals are P(I > x | S_{j,s})).
    /// x ≤ 0 gives 1.
    pub fn interference_ccdf(&self, x: f64) -> Result<Coverage> {
        if x.is_nan() {
            return Err(Error::Domain("interference threshold is NaN".into()));
        }
        if x <= 0.0 {
            return Ok(self.constant(1.0));
        }
        let plan = Plan {
            ccdf: self.ccdf_args(x),
            ..Plan::default()
        };
        let joint = self.run(&plan)?;
        Ok(self.assemble(&joint, 0))
    }

    /// Unconditional E[e^{−t I}] over the interference subset `set`.
    pub fn mean_laplace(&self, t: f64, set: InterferenceSet) -> Result<f64> {
        let joint = self.integrate_serving(1, |j, s, x, o| {
            let mut l = [1.0];
            self.laplace(j, s, x, &[t], set, &mut l)?;
            o[0] = l[0];
            Ok(())
        })?;
        Ok(neumaier_sum(joint.iter().map(|(_, _, v)| v[0])))
    }

    /// ω = (γ_E/(τ(1−ρ)) − γ(σ_c²/ρ + σ_n²)) / (1 + γ).
    pub fn omega(&self, gamma_e: f64, gamma_sinr: f64, tau: f64, rho: f64) -> f64 {
        let noise = self.cfg.sigma_c2 / rho + self.cfg.sigma_n2;
        (gamma_e / (tau * (1.0 - rho)) - gamma_sinr * noise) / (1.0 + gamma_sinr)
    }

    /// Energy, SINR and successful-transmission coverage at one operating
    /// point, sharing the serving-distance quadrature.
    pub fn successful_transmission(&self, gamma_e: f64, gamma_sinr: f64, tau: f64, rho: f64) -> Result<CoverageReport> {
        check_energy_inputs(gamma_e, tau, rho)?;
        check_sinr_inputs(gamma_sinr, rho)?;
        let omega = self.omega(gamma_e, gamma_sinr, tau, rho);
        let report = |energy: Coverage, sinr: Coverage, success: Coverage| CoverageReport {
            gamma_e,
            gamma_sinr,
            tau,
            rho,
            gamma_order: self.settings.gamma_order,
            include_interference: self.settings.include_interference,
            omega,
            energy,
            sinr,
            success,
        };
        if rho == 0.0 || rho >= 1.0 || tau == 0.0 {
            // Either no decoding branch or no harvesting branch: nothing succeeds.
            let energy = self.energy_coverage(gamma_e, tau, rho)?;
            let sinr = self.sinr_coverage(gamma_sinr, rho)?;
            return Ok(report(energy, sinr, self.constant(0.0)));
        }
        // SINR gets its own quadrature so that it does not move with τ through
        // node placement shared with the energy terms.
        let sinr = self.sinr_coverage(gamma_sinr, rho)?;
        let plan = Plan {
            energy: self.energy_args(gamma_e, tau, rho),
            sinr: None,
            ccdf: if omega > 0.0 { self.ccdf_args(omega) } else { Vec::new() },
        };
        let joint = self.run(&plan)?;
        let energy = self.assemble(&joint, 0);
        // ω ≤ 0: the SINR constraint implies the energy one.
        let ccdf = if omega > 0.0 { self.assemble(&joint, 1) } else { self.constant(1.0) };
        let links: Vec<LinkCoverage> = energy
            .links
            .iter()
            .zip(&sinr.links)
            .zip(&ccdf.links)
            .map(|((e, q), f)| LinkCoverage {
                conditional: if e.association > 0.0 {
                    // The mixture treats signal and interference as independent and can
                    // overshoot the joint event slightly; cap it by the bound min(P_E, P_SINR).
                    let mixture = e.conditional * (1.0 - f.conditional) + q.conditional * f.conditional;
                    mixture.min(e.conditional).min(q.conditional).clamp(0.0, 1.0)
                } else {
                    f64::NAN
                },
                ..*e
            })
            .collect();
        let total = neumaier_sum(
            links
                .iter()
                .filter(|l| l.association > 0.0)
                .map(|l| l.conditional * l.association),
        )
        .clamp(0.0, 1.0);
        Ok(report(energy, sinr, Coverage { total, links }))
    }

    /// Report at the configuration's own τ and ρ.
    pub fn report(&self, gamma_e: f64, gamma_sinr: f64) -> Result<CoverageReport> {
        self.successful_transmission(gamma_e, gamma_sinr, self.cfg.tau, self.cfg.rho)
    }

    fn constant(&self, value: f64) -> Coverage {
        let links: Vec<LinkCoverage> = self
            .assoc
            .entries()
            .map(|(tier, state, a)| LinkCoverage {
                tier,
                state,
                association: a,
                conditional: if a > 0.0 { value } else { f64::NAN },
            })
            .collect();
        Coverage { total: value, links }
    }
}

/// Laplace arguments of the metrics evaluated in one pass.
#[derive(Debug, Clone, Default)]
struct Plan {
    energy: Vec<f64>,
    /// (γ_sinr, ρ); the arguments depend on the serving distance.
    sinr: Option<(f64, f64)>,
    ccdf: Vec<f64>,
}

impl Plan {
    fn components(&self) -> usize {
        usize::from(!self.energy.is_empty()) + usize::from(self.sinr.is_some()) + usize::from(!self.ccdf.is_empty())
    }

    fn len(&self) -> usize {
        self.energy.len() + self.ccdf.len() + if self.sinr.is_some() { MAX_NAKAGAMI } else { 0 }
    }
}

/// Capacity hint for the SINR arguments of one serving state.
const MAX_NAKAGAMI: usize = 8;

/// (1 + y)^{−N}, the Nakagami-N moment generating function at −yN.
fn mgf(y: f64, n: u32) -> f64 {
    1.0 / (1.0 + y).powi(n as i32)
}

/// 1 − (1 + y)^{−N} without cancellation for small y.
pub(crate) fn mgf_complement(y: f64, n: u32) -> f64 {
    if y < 1e-3 {
        // Binomial series: Σ_k (−1)^{k+1} C(N+k−1, k) y^k.
        let n = n as f64;
        let mut term = n * y;
        let mut sum = term;
        for k in 1..6 {
            let k = k as f64;
            term *= -(n + k) / (k + 1.0) * y;
            sum += term;
        }
        sum
    } else {
        1.0 - mgf(y, n)
    }
}

/// Largest tolerated absolute error in an alternating sum.
const CANCELLATION_LIMIT: f64 = 1e-4;

fn outer_opts(settings: &AnalysisSettings) -> QuadOptions {
    QuadOptions::new(settings.quad_rel_tol, settings.quad_abs_tol)
}

fn check_energy_inputs(gamma_e: f64, tau: f64, rho: f64) -> Result<()> {
    if !(gamma_e > 0.0 && gamma_e.is_finite()) {
        return Err(Error::Domain(format!("energy threshold must be positive, got {gamma_e}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be nonnegative, got {tau}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

fn check_sinr_inputs(gamma: f64, rho: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("SINR threshold must be positive, got {gamma}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;

    fn model_with(edit: impl FnOnce(&mut ConfigFile)) -> CoverageModel {
        let mut f = ConfigFile::default();
        edit(&mut f);
        let (cfg, settings) = f.resolve().unwrap();
        CoverageModel::new(&cfg, &settings).unwrap()
    }

    fn model() -> CoverageModel {
        model_with(|_| {})
    }

    #[test]
    fn sample_helpers() {
        assert_eq!(harvested_energy_sample(1e-6, 1e-6, 1.0, 1.0), 0.0);
        assert!((harvested_energy_sample(1.5e-6, 0.5e-6, 1.0, 0.5) - 1e-6).abs() < 1e-18);
        let e1 = harvested_energy_sample(1e-6, 2e-7, 0.3, 0.2);
        let e2 = harvested_energy_sample(1e-6, 2e-7, 0.6, 0.2);
        assert!((e2 - 2.0 * e1).abs() < 1e-20);

        let v = sinr_sample(1e-9, 0.0, 0.5, 1e-8, 4e-12).unwrap();
        assert!((v - 0.04998).abs() < 2e-5, "{v}");
        assert_eq!(sinr_sample(3e-9, 0.0, 0.7, 0.0, 1e-12).unwrap(), 3e-9 / 1e-12);
        assert!(sinr_sample(1e-9, 0.0, 0.9, 1e-8, 1e-12).unwrap() > sinr_sample(1e-9, 0.0, 0.5, 1e-8, 1e-12).unwrap());
        assert!(sinr_sample(1e-9, 0.0, 0.0, 1e-8, 1e-12).is_err());
    }

    #[test]
    fn gamma_constants() {
        assert_eq!(gamma_constant(1), 1.0);
        assert!((gamma_constant(2) - 2.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((gamma_constant(5) - 5.0 * 120f64.powf(-0.2)).abs() < 1e-14);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(10, 10), 1.0);
    }

    #[test]
    fn mgf_complement_series_matches_direct() {
        for n in 1..=4 {
            for y in [1e-9f64, 1e-6, 5e-4, 9.99e-4, 2e-3, 0.5] {
                let direct = -(-(n as f64) * y.ln_1p()).exp_m1();
                let v = mgf_complement(y, n);
                assert!((v - direct).abs() <= 1e-13 * direct.max(1e-300) + 1e-16, "{n} {y}");
            }
        }
    }

    #[test]
    fn laplace_properties() {
        let m = model();
        let ts = [0.0, 1e3, 1e5, 1e7, 1e9];
        for (j, s, x) in [(0, LinkState::Los, 60.0), (1, LinkState::Los, 80.0), (2, LinkState::Nlos, 150.0)] {
            for set in [InterferenceSet::All, InterferenceSet::Cluster, InterferenceSet::Ppp] {
                let mut l = vec![1.0; ts.len()];
                m.laplace(j, s, x, &ts, set, &mut l).unwrap();
                assert!((l[0] - 1.0).abs() < 1e-9);
                for w in l.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12, "{l:?}");
                }
                assert!(l.iter().all(|&v| v > 0.0 && v <= 1.0));
                // Log-convexity: L(t1)L(t2) ≥ L((t1+t2)/2)².
                let mut mid = [1.0];
                m.laplace(j, s, x, &[0.5 * (ts[2] + ts[3])], set, &mut mid).unwrap();
                assert!(l[2] * l[3] >= mid[0] * mid[0] - 1e-9);
            }
        }
    }

    #[test]
    fn laplace_without_interferers_is_one() {
        let m = model_with(|f| {
            f.lambda_u = 0.0;
            f.lambda_g = 0.0;
        });
        let mut l = vec![1.0; 3];
        m.laplace(0, LinkState::Los, 60.0, &[1e3, 1e6, 1e9], InterferenceSet::Ppp, &mut l).unwrap();
        assert_eq!(l, vec![1.0; 3]);
    }

    #[test]
    fn interference_switch_drops_every_term() {
        let m = model_with(|f| f.include_interference = false);
        let mut l = vec![1.0; 2];
        m.laplace(1, LinkState::Los, 80.0, &[1e6, 1e9], InterferenceSet::All, &mut l).unwrap();
        assert_eq!(l, vec![1.0; 2]);
    }

    #[test]
    fn energy_coverage_limits() {
        let m = model();
        let e = m.energy_coverage(1e-20, 1.0, 0.5).unwrap();
        assert!((e.total - 1.0).abs() < 1e-6, "{}", e.total);
        let e = m.energy_coverage(1e-4, 1.0, 1.0).unwrap();
        assert_eq!(e.total, 0.0);
        assert!(m.energy_coverage(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn totals_are_weighted_conditionals() {
        let m = model();
        let r = m.successful_transmission(1e-4, 1.0, 1.0, 0.5).unwrap();
        for c in [&r.energy, &r.sinr, &r.success] {
            let sum: f64 = c
                .links
                .iter()
                .filter(|l| l.association > 0.0)
                .map(|l| l.conditional * l.association)
                .sum();
            assert!((sum - c.total).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&c.total));
            let tiers: f64 = m.assoc.tiers.iter().map(|&t| c.tier_total(t)).sum();
            assert!((tiers - c.total).abs() < 1e-12);
        }
        assert!(r.success.total <= r.energy.total.min(r.sinr.total) + 1e-12);
    }

    #[test]
    fn sinr_limits() {
        let m = model();
        let c = m.sinr_coverage(1e-12, 0.5).unwrap();
        assert!((c.total - 1.0).abs() < 1e-6);
        assert_eq!(m.sinr_coverage(1.0, 0.0).unwrap().total, 0.0);
    }

    #[test]
    fn negative_omega_reduces_to_sinr() {
        let m = model();
        // A tiny energy threshold makes ω negative.
        let r = m.successful_transmission(1e-15, 1.0, 1.0, 0.5).unwrap();
        assert!(r.omega < 0.0);
        assert!((r.success.total - r.sinr.total).abs() < 1e-12);
    }

    #[test]
    fn interference_ccdf_edges() {
        let m = model();
        assert_eq!(m.interference_ccdf(-1.0).unwrap().total, 1.0);
        assert_eq!(m.interference_ccdf(0.0).unwrap().total, 1.0);
        let far = m.interference_ccdf(1e3).unwrap().total;
        assert!(far < 1e-6, "{far}");
    }

    #[test]
    fn cancellation_is_reported() {
        let m = model_with(|f| {
            f.gamma_order = 10;
            f.quad_rel_tol = 1e-1;
        });
        let err = m.alternating(&[1.0; 11], "test").unwrap_err();
        assert!(matches!(err, Error::Cancellation { .. }));
        let ok = model_with(|f| f.gamma_order = 10);
        assert!(ok.alternating(&[1.0; 11], "test").unwrap().abs() < 1e-12);
    }
}
