//! Uplink coverage and throughput.
//!
//! After the downlink phase of length τ, a UE whose harvested energy covers
//! (T − τ)·P_t^UL transmits to its own cluster UAV. Other clusters contribute
//! at most one active UE each, so the interferers are a thinning of the UAV
//! process by p_active, displaced by the cluster offset. By the displacement
//! theorem the displaced process is again a homogeneous PPP of density
//! p_active·λ, which collapses the double integral over (w, v) into a single
//! integral over v; [`UplinkModel::laplace_nested`] keeps the double-integral
//! form so the two can be compared.

use serde::Serialize;

use crate::channel::{gain_pmf, los_prob_a2g_ground, GainLevel, LinkState};
use crate::downlink::{binomial, gamma_constant, mgf_complement, CoverageModel};
use crate::error::{Error, QuadContext, Result};
use crate::geometry::{ClusterOffsetLaw, Tier};
use crate::quadrature::{integrate_2d_nested, integrate_vec, neumaier_sum, QuadOptions};

/// Inputs shared by every uplink quantity at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UplinkContext {
    pub tau: f64,
    pub rho: f64,
    pub gamma_ul: f64,
    /// Probability that a UE harvested enough energy to transmit.
    pub p_active: f64,
}

/// Average uplink throughput at one τ, with the downlink constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputResult {
    pub tau: f64,
    pub rho: f64,
    pub p_active: f64,
    pub p_ul: f64,
    /// R^UL in bit/s.
    pub r_ul: f64,
    /// R^DL in bit/s.
    pub r_dl: f64,
    pub r_min: f64,
    pub feasible: bool,
}

/// Outcome of the τ optimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TauOutcome {
    Optimal {
        tau: f64,
        result: ThroughputResult,
        /// (τ, R^UL) pairs visited by the coarse scan.
        scan: Vec<(f64, f64)>,
    },
    /// The downlink constraint needs τ > T.
    Infeasible { tau_min: f64, frame: f64 },
}

/// Points of the coarse τ scan before golden-section refinement.
pub const TAU_GRID: usize = 64;

#[derive(Debug, Clone)]
pub struct UplinkModel {
    pub dl: CoverageModel,
    gains: [GainLevel; 4],
}

impl UplinkModel {
    pub fn new(dl: CoverageModel) -> Self {
        let gains = gain_pmf(&dl.cfg.antenna);
        UplinkModel { dl, gains }
    }

    fn parent(&self) -> &Tier {
        &self.dl.net.tiers[1 + self.dl.cfg.parent_tier]
    }

    fn opts(&self) -> (QuadOptions, QuadOptions) {
        let s = &self.dl.settings;
        (
            QuadOptions::new(s.quad_rel_tol, s.quad_abs_tol),
            QuadOptions::new(s.quad_rel_tol * 1e-2, s.quad_abs_tol * 1e-2),
        )
    }

    /// p_active = P_E((T − τ)·P_t^UL) at the same τ and ρ.
    pub fn active_probability(&self, tau: f64, rho: f64) -> Result<f64> {
        let cfg = &self.dl.cfg;
        if !(0.0..=cfg.frame).contains(&tau) {
            return Err(Error::Domain(format!("tau must lie in [0, {}], got {tau}", cfg.frame)));
        }
        let need = (cfg.frame - tau) * cfg.p_t_ul;
        if need <= 0.0 {
            return Ok(1.0);
        }
        Ok(self.dl.energy_coverage(need, tau, rho)?.total)
    }

    pub fn context(&self, tau: f64, rho: f64, gamma_ul: f64) -> Result<UplinkContext> {
        if !(gamma_ul > 0.0 && gamma_ul.is_finite()) {
            return Err(Error::Domain(format!("uplink SINR threshold must be positive, got {gamma_ul}")));
        }
        Ok(UplinkContext {
            tau,
            rho,
            gamma_ul,
            p_active: self.active_probability(tau, rho)?,
        })
    }

    /// λ^L_user and λ^N_user with the LOS probability taken at ground
    /// distance `v` from the receiving UAV.
    pub fn user_densities(&self, ctx: &UplinkContext, v: f64) -> (f64, f64) {
        let t = self.parent();
        let pl = t.los.p_los_ground(v);
        let base = ctx.p_active * t.density;
        (base * pl, base * (1.0 - pl))
    }

    /// P(state s) of an interfering UE at ground distance v. With fixed
    /// thinning the probability is frozen at the mean nearest-interferer
    /// distance.
    fn interferer_state_prob(&self, s: LinkState, v: f64) -> f64 {
        let t = self.parent();
        let v = if self.dl.settings.fixed_los_thinning {
            0.5 / t.density.sqrt()
        } else {
            v
        };
        s.prob(los_prob_a2g_ground(v, t.height, self.dl.cfg.env_b, self.dl.cfg.env_c))
    }

    /// Σ_b P(b | v)·E_G[1 − (1 + μ P_t G/(κ^b x^α N_b))^{−N_b}] at ground
    /// distance v, for every μ in `args`.
    fn interferer_kernel(&self, v: f64, args: &[f64], out: &mut [f64]) {
        let cfg = &self.dl.cfg;
        let t = self.parent();
        let x2 = v * v + t.height * t.height;
        for b in LinkState::BOTH {
            let pb = self.interferer_state_prob(b, v);
            if pb == 0.0 {
                continue;
            }
            let nb = cfg.nakagami(b);
            let base = cfg.p_t_ul / (t.path_loss.kappa(b) * x2.powf(0.5 * t.path_loss.alpha(b)) * nb as f64);
            for (o, &mu) in out.iter_mut().zip(args) {
                let mean: f64 = self
                    .gains
                    .iter()
                    .map(|g| g.prob * mgf_complement(mu * base * g.gain, nb))
                    .sum();
                *o += pb * mean;
            }
        }
    }

    /// Uplink interference Laplace transform (both interferer states) at
    /// every μ in `args`, in the single-integral form.
    pub fn laplace(&self, ctx: &UplinkContext, args: &[f64]) -> Result<Vec<f64>> {
        let t = self.parent();
        let dens = ctx.p_active * t.density;
        if dens == 0.0 || !self.dl.settings.include_interference {
            return Ok(vec![1.0; args.len()]);
        }
        let (_, inner) = self.opts();
        let c = t.height.max(1.0);
        let rw = self.dl.net.trunc_radius;
        // Integrate in u = ln(v + c): the kernel decays as a power of v.
        let r = integrate_vec(
            |u, o| {
                let vc = u.exp();
                let v = vc - c;
                self.interferer_kernel(v, args, o);
                o.iter_mut().for_each(|x| *x *= v * vc);
            },
            args.len(),
            c.ln(),
            (rw + c).ln(),
            &[],
            &inner,
        )
        .context(|| "uplink interference Laplace transform".to_string())?;
        Ok(r.values
            .iter()
            .map(|e| (-2.0 * std::f64::consts::PI * dens * e).exp())
            .collect())
    }

    /// The same transform at one μ in the double-integral form: cluster
    /// centers at ground distance w, UE offset law f(v | w).
    pub fn laplace_nested(&self, ctx: &UplinkContext, mu: f64) -> Result<f64> {
        let t = self.parent();
        let dens = ctx.p_active * t.density;
        if dens == 0.0 || !self.dl.settings.include_interference {
            return Ok(1.0);
        }
        let law = ClusterOffsetLaw {
            cluster: self.dl.cfg.cluster,
            h: t.height,
        };
        let (outer, inner) = self.opts();
        let rw = self.dl.net.trunc_radius;
        let e = integrate_2d_nested(
            |w, v| {
                let mut k = [0.0];
                self.interferer_kernel(v, &[mu], &mut k);
                w * law.f_v(v, w) * k[0]
            },
            0.0,
            rw,
            |w| law.v_domain(w),
            &outer,
            &inner,
        )
        .context(|| "nested uplink Laplace transform".to_string())?;
        Ok((-2.0 * std::f64::consts::PI * dens * e.value).exp())
    }

    /// P(SINR^UL > γ^UL) for the typical UE transmitting to its cluster UAV.
    pub fn sinr_coverage(&self, ctx: &UplinkContext) -> Result<f64> {
        let cfg = &self.dl.cfg;
        let cl = self.dl.net.cluster();
        let g0 = cfg.antenna.main_link_gain();
        let (outer, _) = self.opts();
        let mut failure = None;
        let mut parts = Vec::new();
        for s in LinkState::BOTH {
            let ns = cfg.nakagami(s) as usize;
            let eta = gamma_constant(ns);
            let (kappa, alpha) = (cl.path_loss.kappa(s), cl.path_loss.alpha(s));
            let r = integrate_vec(
                |d, o| {
                    if failure.is_some() {
                        return;
                    }
                    let m = cl.mass_density_ground(s, d);
                    if m == 0.0 {
                        return;
                    }
                    let x = cl.slant_of(d);
                    let unit = eta * ctx.gamma_ul * kappa * x.powf(alpha) / (cfg.p_t_ul * g0);
                    let mus: Vec<f64> = (1..=ns).map(|n| n as f64 * unit).collect();
                    let lap = match self.laplace(ctx, &mus) {
                        Ok(l) => l,
                        Err(e) => {
                            failure = Some(e);
                            return;
                        }
                    };
                    let terms = (1..=ns).map(|n| {
                        let t = binomial(ns, n) * (-mus[n - 1] * cfg.sigma_n2).exp() * lap[n - 1];
                        if n % 2 == 1 {
                            t
                        } else {
                            -t
                        }
                    });
                    o[0] = m * neumaier_sum(terms);
                },
                1,
                0.0,
                cl.d_max,
                &[],
                &outer,
            )
            .context(|| format!("uplink coverage ({s})"));
            if let Some(e) = failure.take() {
                return Err(e);
            }
            parts.push(r?.values[0]);
        }
        Ok(neumaier_sum(parts).clamp(0.0, 1.0))
    }

    /// W·log2(1 + γ).
    pub fn rate_per_second(&self, gamma: f64) -> f64 {
        self.dl.cfg.bandwidth * (1.0 + gamma).log2()
    }

    /// R^UL = (T − τ)·W·log2(1 + γ^UL)·P^UL·p_active and the downlink rate
    /// R^DL = τ·W·log2(1 + γ^UL)·P_SINR(γ_sinr), where `p_sinr` is the
    /// downlink SINR coverage (independent of τ).
    pub fn throughput_with(&self, tau: f64, rho: f64, gamma_ul: f64, p_sinr: f64, r_min: f64) -> Result<ThroughputResult> {
        let frame = self.dl.cfg.frame;
        let unit = self.rate_per_second(gamma_ul);
        let r_dl = tau * unit * p_sinr;
        let ctx = self.context(tau, rho, gamma_ul)?;
        let p_ul = self.sinr_coverage(&ctx)?;
        let p_active = ctx.p_active;
        let r_ul = (frame - tau).max(0.0) * unit * p_ul * p_active;
        Ok(ThroughputResult {
            tau,
            rho,
            p_active,
            p_ul,
            r_ul,
            r_dl,
            r_min,
            feasible: r_dl >= r_min,
        })
    }

    pub fn throughput(&self, tau: f64, rho: f64, gamma_ul: f64, gamma_sinr: f64, r_min: f64) -> Result<ThroughputResult> {
        let p_sinr = self.dl.sinr_coverage(gamma_sinr, rho)?.total;
        self.throughput_with(tau, rho, gamma_ul, p_sinr, r_min)
    }

    /// Smallest τ meeting R^DL ≥ R_min.
    pub fn tau_min(&self, gamma_ul: f64, p_sinr: f64, r_min: f64) -> f64 {
        if r_min <= 0.0 {
            return 0.0;
        }
        let unit = self.rate_per_second(gamma_ul) * p_sinr;
        if unit <= 0.0 {
            return f64::INFINITY;
        }
        r_min / unit
    }

    /// Maximizes R^UL over τ ∈ [τ_min, T]: a coarse scan of [`TAU_GRID`]
    /// points, then golden-section refinement around the best one.
    pub fn optimize_tau(&self, rho: f64, gamma_ul: f64, gamma_sinr: f64, r_min: f64) -> Result<TauOutcome> {
        let frame = self.dl.cfg.frame;
        let p_sinr = self.dl.sinr_coverage(gamma_sinr, rho)?.total;
        let tau_min = self.tau_min(gamma_ul, p_sinr, r_min);
        if tau_min > frame {
            return Ok(TauOutcome::Infeasible { tau_min, frame });
        }
        let eval = |tau: f64| self.throughput_with(tau, rho, gamma_ul, p_sinr, r_min);
        let step = (frame - tau_min) / (TAU_GRID - 1) as f64;
        let mut scan = Vec::with_capacity(TAU_GRID);
        for i in 0..TAU_GRID {
            let tau = if i == TAU_GRID - 1 { frame } else { tau_min + step * i as f64 };
            scan.push((tau, eval(tau)?.r_ul));
        }
        let best = scan
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let lo = scan[best.saturating_sub(1)].0;
        let hi = scan[(best + 1).min(TAU_GRID - 1)].0;
        let tau = golden_max(|t| eval(t).map(|r| r.r_ul), lo, hi, step * 1e-4)?;
        let refined = eval(tau)?;
        let result = if refined.r_ul >= scan[best].1 {
            refined
        } else {
            eval(scan[best].0)?
        };
        Ok(TauOutcome::Optimal {
            tau: result.tau,
            result,
            scan,
        })
    }
}

/// Golden-section search for the maximum of a unimodal `f` on [a, b].
fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}
