//! Link-level model: LOS probabilities, path loss, the sectored antenna gain
//! distribution and Nakagami fading.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::config::{AntennaPattern, PathLossPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    pub fn index(self) -> usize {
        match self {
            LinkState::Los => 0,
            LinkState::Nlos => 1,
        }
    }

    pub fn other(self) -> LinkState {
        match self {
            LinkState::Los => LinkState::Nlos,
            LinkState::Nlos => LinkState::Los,
        }
    }

    /// Probability of this state given the LOS probability.
    pub fn prob(self, p_los: f64) -> f64 {
        match self {
            LinkState::Los => p_los,
            LinkState::Nlos => 1.0 - p_los,
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
        })
    }
}

/// LOS probability of an air-to-ground link at 3D distance `r` from a UAV at
/// height `h`: 1/(1 + C·exp(−B(θ − C))) with θ the elevation angle in degrees.
pub fn los_prob_a2g(r: f64, h: f64, env_b: f64, env_c: f64) -> Result<f64> {
    if r < h - 1e-9 || r.is_nan() {
        return Err(Error::Domain(format!(
            "3D distance {r} below UAV height {h}"
        )));
    }
    let ratio = if r > 0.0 { (h / r).clamp(0.0, 1.0) } else { 1.0 };
    Ok(a2g_from_angle(ratio.asin().to_degrees(), env_b, env_c))
}

/// Same probability parametrized by ground distance `d`, which stays well
/// conditioned near the UAV's foot point.
pub fn los_prob_a2g_ground(d: f64, h: f64, env_b: f64, env_c: f64) -> f64 {
    a2g_from_angle(h.atan2(d).to_degrees(), env_b, env_c)
}

fn a2g_from_angle(theta_deg: f64, env_b: f64, env_c: f64) -> f64 {
    1.0 / (1.0 + env_c * (-env_b * (theta_deg - env_c)).exp())
}

/// LOS probability of a ground-to-ground link: e^{−εr}.
pub fn los_prob_g2g(r: f64, epsilon: f64) -> f64 {
    (-epsilon * r.max(0.0)).exp()
}

/// Blockage model of one tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosModel {
    AirToGround { height: f64, env_b: f64, env_c: f64 },
    GroundToGround { epsilon: f64 },
}

impl LosModel {
    /// LOS probability at ground distance `d`.
    pub fn p_los_ground(&self, d: f64) -> f64 {
        match *self {
            LosModel::AirToGround { height, env_b, env_c } => los_prob_a2g_ground(d, height, env_b, env_c),
            LosModel::GroundToGround { epsilon } => los_prob_g2g(d, epsilon),
        }
    }

    /// Probability of state `s` at ground distance `d`.
    pub fn p_state_ground(&self, s: LinkState, d: f64) -> f64 {
        s.prob(self.p_los_ground(d))
    }

    pub fn height(&self) -> f64 {
        match *self {
            LosModel::AirToGround { height, .. } => height,
            LosModel::GroundToGround { .. } => 0.0,
        }
    }
}

/// Linear path loss κ·r^α.
pub fn path_loss(r: f64, pl: &PathLossPair, s: LinkState) -> f64 {
    pl.kappa(s) * r.powf(pl.alpha(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLevel {
    pub gain: f64,
    pub prob: f64,
}

/// Distribution of the antenna gain on an interfering link, whose main lobes
/// are uniformly misaligned: (M_bM_u, M_bm_u, m_bM_u, m_bm_u).
pub fn gain_pmf(a: &AntennaPattern) -> [GainLevel; 4] {
    let pb = a.theta_bs / (2.0 * PI);
    let pu = a.theta_ue / (2.0 * PI);
    [
        GainLevel { gain: a.main_bs * a.main_ue, prob: pb * pu },
        GainLevel { gain: a.main_bs * a.side_ue, prob: pb * (1.0 - pu) },
        GainLevel { gain: a.side_bs * a.main_ue, prob: (1.0 - pb) * pu },
        GainLevel { gain: a.side_bs * a.side_ue, prob: (1.0 - pb) * (1.0 - pu) },
    ]
}

/// Draw an interferer gain from its pmf.
pub fn sample_gain<R: Rng + ?Sized>(levels: &[GainLevel; 4], rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for l in levels {
        acc += l.prob;
        if u < acc {
            return l.gain;
        }
    }
    levels[3].gain
}

/// Power gain of a Nakagami-m channel with integer order m: Γ(m, 1/m).
#[derive(Debug, Clone, Copy)]
pub struct Nakagami {
    dist: Gamma<f64>,
}

impl Nakagami {
    pub fn new(order: u32) -> Result<Self> {
        if order < 1 {
            return Err(Error::Domain("Nakagami order must be at least 1".into()));
        }
        let m = f64::from(order);
        let dist = Gamma::new(m, 1.0 / m).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(Nakagami { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

/// One fading draw h ~ Γ(order, 1/order).
pub fn sample_nakagami<R: Rng + ?Sized>(order: u32, rng: &mut R) -> Result<f64> {
    Ok(Nakagami::new(order)?.sample(rng))
}

/// E[e^{−t·h}] for h ~ Γ(m, 1/m): (1 + t/m)^{−m}.
pub fn nakagami_mgf(t: f64, order: u32) -> f64 {
    let m = f64::from(order);
    (1.0 + t / m).powf(-m)
}

/// P(h > y) for h ~ Γ(m, 1/m), exact for integer m.
pub fn nakagami_tail(y: f64, order: u32) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    let m = f64::from(order);
    let z = m * y;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..order {
        term *= z / f64::from(k);
        sum += term;
    }
    (-z).exp() * sum
}
