//! Downlink association by maximum biased long-term received power.
//!
//! A typical UE served by tier j in state s at 3D distance r sees no point of
//! tier k in state b closer than the exclusion radius Q_{kj}^{sb}(r). The
//! probability of that event, times the density of the serving candidate,
//! integrates to the association probability A_{j,s}; the same integrand,
//! normalized, is the conditional serving-distance density.

use crate::channel::LinkState;
use crate::error::{Error, QuadContext, Result};
use crate::geometry::{Network, Tier, TierId, TierKind};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

/// Q_{kj}^{sb}(r) from raw parameters:
/// ((P_k B_k κ^s_j)/(P_j B_j κ^b_k) · r^{α^s_j})^{1/α^b_k}.
pub fn exclusion_radius_raw(
    pb_k: f64,
    kappa_k: f64,
    alpha_k: f64,
    pb_j: f64,
    kappa_j: f64,
    alpha_j: f64,
    r: f64,
) -> f64 {
    if pb_j <= 0.0 {
        return f64::INFINITY;
    }
    if pb_k <= 0.0 {
        return 0.0;
    }
    let ln_ratio = (pb_k * kappa_j / (pb_j * kappa_k)).ln();
    ((ln_ratio + alpha_j * r.ln()) / alpha_k).exp()
}

/// Distance below which a state-`b` point of tier `k` would beat a state-`s`
/// server of tier `j` at distance `r`.
pub fn exclusion_radius(k: &Tier, b: LinkState, j: &Tier, s: LinkState, r: f64) -> f64 {
    if std::ptr::eq(k, j) && b == s {
        return r;
    }
    exclusion_radius_raw(
        k.power * k.bias,
        k.path_loss.kappa(b),
        k.path_loss.alpha(b),
        j.power * j.bias,
        j.path_loss.kappa(s),
        j.path_loss.alpha(s),
        r,
    )
}

/// Serving distance r at which Q_{kj}^{sb}(r) equals `q`.
pub fn inverse_exclusion(k: &Tier, b: LinkState, j: &Tier, s: LinkState, q: f64) -> f64 {
    // Swapping the roles of (k, b) and (j, s) inverts the map.
    exclusion_radius(j, s, k, b, q)
}

/// Probability that no competitor beats a state-`s` candidate of tier `j`
/// located at 3D distance `x`, excluding the void of tier j's own state-s
/// points closer than x (that factor belongs to the candidate density).
pub fn competition(net: &Network, j: usize, s: LinkState, x: f64) -> f64 {
    let tj = &net.tiers[j];
    let mut f = 1.0;
    for (k, tk) in net.tiers.iter().enumerate() {
        match tk.kind {
            TierKind::Cluster => {
                if k == j {
                    continue;
                }
                let mut not_stronger = 0.0;
                for b in LinkState::BOTH {
                    let q = exclusion_radius(tk, b, tj, s, x);
                    not_stronger += tk.cluster_tail(b, q);
                }
                f *= not_stronger;
            }
            TierKind::Ppp => {
                if tk.density == 0.0 {
                    continue;
                }
                let mut m = 0.0;
                for b in LinkState::BOTH {
                    if k == j && b == s {
                        continue;
                    }
                    let q = exclusion_radius(tk, b, tj, s, x);
                    m += tk.mass(b, q);
                }
                f *= (-m).exp();
            }
        }
        if f == 0.0 {
            break;
        }
    }
    f
}

/// Joint density, per unit ground distance d of the serving point, of being
/// served by tier `j` in state `s` at that distance.
pub fn serving_weight(net: &Network, j: usize, s: LinkState, d: f64) -> f64 {
    let tj = &net.tiers[j];
    let md = tj.mass_density_ground(s, d);
    if md == 0.0 {
        return 0.0;
    }
    let own = match tj.kind {
        TierKind::Ppp => (-tj.mass_ground(s, d)).exp(),
        TierKind::Cluster => 1.0,
    };
    md * own * competition(net, j, s, tj.slant_of(d))
}

/// Ground distances of tier `j`'s server where the serving integrand has a
/// kink: some competitor's exclusion radius crosses its height or the edge
/// of its support.
pub fn serving_breaks(net: &Network, j: usize, s: LinkState) -> Vec<f64> {
    let tj = &net.tiers[j];
    let mut out = Vec::new();
    for (k, tk) in net.tiers.iter().enumerate() {
        for b in LinkState::BOTH {
            if k == j && b == s {
                continue;
            }
            for edge in [tk.height, tk.slant_of(tk.d_max)] {
                let x = inverse_exclusion(tk, b, tj, s, edge);
                if x.is_finite() && x > tj.height {
                    let d = tj.ground_of(x);
                    if d > 0.0 && d < tj.d_max {
                        out.push(d);
                    }
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// A_{j,s} for every tier and state.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    pub tiers: Vec<TierId>,
    /// probs[i][s.index()]
    pub probs: Vec<[f64; 2]>,
}

impl AssociationMatrix {
    pub fn get(&self, tier: TierId, s: LinkState) -> f64 {
        self.tiers
            .iter()
            .position(|&t| t == tier)
            .map_or(0.0, |i| self.probs[i][s.index()])
    }

    pub fn tier_total(&self, tier: TierId) -> f64 {
        self.get(tier, LinkState::Los) + self.get(tier, LinkState::Nlos)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().map(|p| p[0] + p[1]).sum()
    }

    /// (tier, state, probability) in association order.
    pub fn entries(&self) -> impl Iterator<Item = (TierId, LinkState, f64)> + '_ {
        self.tiers
            .iter()
            .zip(&self.probs)
            .flat_map(|(&t, p)| LinkState::BOTH.into_iter().map(move |s| (t, s, p[s.index()])))
    }
}

/// A_{j,s} as a single quadrature.
pub fn association_prob(net: &Network, j: usize, s: LinkState, opts: &QuadOptions) -> Result<f64> {
    let tj = &net.tiers[j];
    if tj.occurrence(s) == 0.0 {
        return Ok(0.0);
    }
    let breaks = serving_breaks(net, j, s);
    Ok(integrate_with_breaks(|d| serving_weight(net, j, s, d), 0.0, tj.d_max, &breaks, opts)
        .context(|| format!("association of tier {} {s}", tj.id))?
        .value)
}

pub fn association_probabilities(net: &Network, opts: &QuadOptions) -> Result<AssociationMatrix> {
    let mut probs = Vec::with_capacity(net.tiers.len());
    for j in 0..net.tiers.len() {
        probs.push([
            association_prob(net, j, LinkState::Los, opts)?,
            association_prob(net, j, LinkState::Nlos, opts)?,
        ]);
    }
    Ok(AssociationMatrix {
        tiers: net.tiers.iter().map(|t| t.id).collect(),
        probs,
    })
}

/// Density of the serving distance conditioned on association with tier `j`
/// in state `s`.
#[derive(Debug, Clone, Copy)]
pub struct ServingLaw<'a> {
    pub net: &'a Network,
    pub tier: usize,
    pub state: LinkState,
    pub prob: f64,
}

impl<'a> ServingLaw<'a> {
    pub fn new(net: &'a Network, tier: usize, state: LinkState, prob: f64) -> Result<Self> {
        if !(prob > 0.0) {
            return Err(Error::UndefinedConditional {
                tier: net.tiers[tier].id.to_string(),
                state: state.to_string(),
            });
        }
        Ok(ServingLaw { net, tier, state, prob })
    }

    pub fn support(&self) -> (f64, f64) {
        self.net.tiers[self.tier].support()
    }

    /// Density in 3D serving distance.
    pub fn pdf(&self, x: f64) -> f64 {
        let t = &self.net.tiers[self.tier];
        let md = t.mass_density(self.state, x);
        if md == 0.0 {
            return 0.0;
        }
        let own = match t.kind {
            TierKind::Ppp => (-t.mass(self.state, x)).exp(),
            TierKind::Cluster => 1.0,
        };
        md * own * competition(self.net, self.tier, self.state, x) / self.prob
    }

    /// ∫ pdf, evaluated in ground distance.
    pub fn mass(&self, opts: &QuadOptions) -> Result<f64> {
        let t = &self.net.tiers[self.tier];
        let breaks = serving_breaks(self.net, self.tier, self.state);
        Ok(integrate_with_breaks(
            |d| serving_weight(self.net, self.tier, self.state, d),
            0.0,
            t.d_max,
            &breaks,
            opts,
        )
        .context(|| format!("serving law of tier {} {}", t.id, self.state))?
        .value
            / self.prob)
    }

    /// CDF at 3D distance `x`.
    pub fn cdf(&self, x: f64, opts: &QuadOptions) -> Result<f64> {
        let t = &self.net.tiers[self.tier];
        if x <= t.height {
            return Ok(0.0);
        }
        let top = t.ground_of(x).min(t.d_max);
        let breaks = serving_breaks(self.net, self.tier, self.state);
        Ok(integrate_with_breaks(
            |d| serving_weight(self.net, self.tier, self.state, d),
            0.0,
            top,
            &breaks,
            opts,
        )
        .context(|| format!("serving cdf of tier {} {}", t.id, self.state))?
        .value
            / self.prob)
    }
}
