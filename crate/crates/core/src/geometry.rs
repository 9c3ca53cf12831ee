//! Distance distributions and point-process samplers.
//!
//! Each tier is described by two cumulative "state masses" over ground
//! distance d (3D distance x = √(d² + h²)):
//!
//! * for a PPP tier, M^s(d) = 2πλ ∫₀^d p^s(t) t dt is the mean number of
//!   state-s points within ground distance d, so e^{−M^s} is a void
//!   probability;
//! * for the cluster-center tier (a single point), M^s(d) = P(state s, D ≤ d)
//!   where D is the UE–center ground offset.
//!
//! Both are written as M(d) = ∫₀^d g(t)·t dt with a smooth radial density g,
//! which makes dM/dx = g(d)·x in 3D distance. The masses are tabulated on a
//! geometric grid and interpolated with cubic Hermite polynomials using the
//! exact derivative, except for the ground tier where a closed form exists.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{LinkState, LosModel};
use crate::config::{AnalysisSettings, ClusterKind, ClusterSpec, NetworkConfig, PathLossPair};
use crate::error::{Error, QuadContext, Result};
use crate::quadrature::{bessel_i0_scaled, integrate, QuadOptions};

/// A class of base stations seen from the typical UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TierId {
    /// The UAV at the center of the typical UE's own cluster.
    Cluster,
    /// All other UAVs of UAV tier k (0 is the primary tier).
    Uav(usize),
    /// Ground base stations.
    Ground,
}

impl fmt::Display for TierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TierId::Cluster => f.write_str("cluster"),
            TierId::Uav(0) => f.write_str("uav"),
            TierId::Uav(k) => write!(f, "uav{}", k + 1),
            TierId::Ground => f.write_str("gbs"),
        }
    }
}

/// Cumulative integral of g(t)·t on a geometric grid with Hermite interpolation.
#[derive(Debug, Clone)]
pub struct CumTable {
    d: Vec<f64>,
    m: Vec<f64>,
    dm: Vec<f64>,
}

impl CumTable {
    /// Tabulate M(d) = ∫₀^d g(t)·t dt on [0, d_max].
    pub fn build<G: Fn(f64) -> f64>(g: G, d_max: f64) -> Result<Self> {
        let d0 = 0.5f64.min(d_max / 100.0).max(1e-9);
        let mut d = vec![0.0];
        while *d.last().unwrap() < d_max {
            let last = *d.last().unwrap();
            let next = (last + 0.005 * (last + d0)).min(d_max);
            d.push(next);
        }
        let opts = QuadOptions::new(1e-12, 1e-300);
        let mut m = Vec::with_capacity(d.len());
        let mut acc = 0.0;
        m.push(0.0);
        for w in d.windows(2) {
            acc += integrate(|t| g(t) * t, w[0], w[1], &opts)
                .context(|| format!("distance table on [{}, {}]", w[0], w[1]))?
                .value;
            m.push(acc);
        }
        let dm = d.iter().map(|&t| g(t) * t).collect();
        Ok(CumTable { d, m, dm })
    }

    pub fn d_max(&self) -> f64 {
        *self.d.last().unwrap()
    }

    pub fn total(&self) -> f64 {
        *self.m.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.d.len();
        if x >= self.d[n - 1] {
            return self.m[n - 1];
        }
        let i = self.d.partition_point(|&t| t <= x).saturating_sub(1).min(n - 2);
        let (x0, x1) = (self.d[i], self.d[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.m[i] + h10 * h * self.dm[i] + h01 * self.m[i + 1] + h11 * h * self.dm[i + 1]
    }
}

#[derive(Debug, Clone)]
enum Mass {
    Table(CumTable),
    GroundLos { lambda: f64, eps: f64, d_max: f64 },
    GroundNlos { lambda: f64, eps: f64, d_max: f64 },
    Empty,
}

impl Mass {
    fn eval(&self, d: f64) -> f64 {
        match *self {
            Mass::Table(ref t) => t.eval(d),
            Mass::GroundLos { lambda, eps, d_max } => ground_los_mass(d.clamp(0.0, d_max), lambda, eps),
            Mass::GroundNlos { lambda, eps, d_max } => {
                let d = d.clamp(0.0, d_max);
                PI * lambda * d * d - ground_los_mass(d, lambda, eps)
            }
            Mass::Empty => 0.0,
        }
    }
}

/// 2πλ ∫₀^d t e^{−εt} dt in closed form, evaluated without cancellation.
fn ground_los_mass(d: f64, lambda: f64, eps: f64) -> f64 {
    let z = eps * d;
    // 1 − e^{−z}(1 + z); use the series when z is small.
    let core = if z < 1e-2 {
        // Σ_{k≥2} (−1)^k (k−1) z^k / k!
        let mut s = 0.0;
        let mut term = z;
        for k in 2..25 {
            term *= -z / k as f64;
            s -= (k as f64 - 1.0) * term;
        }
        s
    } else {
        1.0 - (-z).exp() * (1.0 + z)
    };
    2.0 * PI * lambda * core / (eps * eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierKind {
    /// A single point: the typical UE's cluster center.
    Cluster,
    /// A homogeneous PPP.
    Ppp,
}

/// One tier with everything the analysis needs.
#[derive(Debug, Clone)]
pub struct Tier {
    pub id: TierId,
    pub kind: TierKind,
    pub density: f64,
    pub power: f64,
    pub bias: f64,
    pub height: f64,
    pub los: LosModel,
    pub path_loss: PathLossPair,
    /// Ground-distance support [0, d_max].
    pub d_max: f64,
    cluster: Option<ClusterSpec>,
    mass: [Mass; 2],
}

impl Tier {
    fn radial(&self, s: LinkState, d: f64) -> f64 {
        let p = self.los.p_state_ground(s, d);
        match self.kind {
            TierKind::Ppp => 2.0 * PI * self.density * p,
            TierKind::Cluster => p * offset_radial(self.cluster.as_ref().unwrap(), d),
        }
    }

    pub fn ground_of(&self, x: f64) -> f64 {
        (x * x - self.height * self.height).max(0.0).sqrt()
    }

    pub fn slant_of(&self, d: f64) -> f64 {
        d.hypot(self.height)
    }

    /// Lowest and highest possible 3D distance.
    pub fn support(&self) -> (f64, f64) {
        (self.height, self.slant_of(self.d_max))
    }

    /// State mass up to ground distance `d`.
    pub fn mass_ground(&self, s: LinkState, d: f64) -> f64 {
        self.mass[s.index()].eval(d)
    }

    /// State mass up to 3D distance `x` (0 below the tier's height).
    pub fn mass(&self, s: LinkState, x: f64) -> f64 {
        if x <= self.height {
            return 0.0;
        }
        self.mass_ground(s, self.ground_of(x))
    }

    /// d/dx of [`Tier::mass`] at 3D distance `x`.
    pub fn mass_density(&self, s: LinkState, x: f64) -> f64 {
        if x < self.height {
            return 0.0;
        }
        let d = self.ground_of(x);
        if d > self.d_max {
            return 0.0;
        }
        self.radial(s, d) * x
    }

    /// d/dd of [`Tier::mass_ground`].
    pub fn mass_density_ground(&self, s: LinkState, d: f64) -> f64 {
        if d > self.d_max || d < 0.0 {
            return 0.0;
        }
        self.radial(s, d) * d
    }

    pub fn total_mass(&self, s: LinkState) -> f64 {
        self.mass_ground(s, self.d_max)
    }

    /// D^s: probability that the tier offers at least one state-s candidate.
    pub fn occurrence(&self, s: LinkState) -> f64 {
        let m = self.total_mass(s);
        match self.kind {
            TierKind::Ppp => -(-m).exp_m1(),
            TierKind::Cluster => m,
        }
    }

    /// Probability that no state-s point lies closer than 3D distance `x`.
    /// For the cluster tier this is 1 − P(state s, R₀ < x).
    pub fn void(&self, s: LinkState, x: f64) -> f64 {
        let m = self.mass(s, x);
        match self.kind {
            TierKind::Ppp => (-m).exp(),
            TierKind::Cluster => 1.0 - m,
        }
    }

    /// For the cluster tier: P(state s, R₀ > x).
    pub fn cluster_tail(&self, s: LinkState, x: f64) -> f64 {
        (self.total_mass(s) - self.mass(s, x)).max(0.0)
    }

    /// Unnormalized density of the nearest state-s candidate at 3D distance x:
    /// D^s times the conditional PDF.
    pub fn candidate_density(&self, s: LinkState, x: f64) -> f64 {
        let md = self.mass_density(s, x);
        if md == 0.0 {
            return 0.0;
        }
        match self.kind {
            TierKind::Ppp => md * (-self.mass(s, x)).exp(),
            TierKind::Cluster => md,
        }
    }

    pub fn law(&self, s: LinkState) -> DistanceLaw<'_> {
        DistanceLaw { tier: self, state: s }
    }
}

/// f_D(d)/d for the UE–center ground offset D.
fn offset_radial(c: &ClusterSpec, d: f64) -> f64 {
    match c.kind {
        ClusterKind::Thomas => {
            let s2 = c.sigma * c.sigma;
            (-d * d / (2.0 * s2)).exp() / s2
        }
        ClusterKind::Matern => {
            if d <= c.r_c {
                2.0 / (c.r_c * c.r_c)
            } else {
                0.0
            }
        }
    }
}

/// Conditional distance law of the nearest state-s candidate of one tier.
#[derive(Debug, Clone, Copy)]
pub struct DistanceLaw<'a> {
    pub tier: &'a Tier,
    pub state: LinkState,
}

impl DistanceLaw<'_> {
    pub fn tier_id(&self) -> TierId {
        self.tier.id
    }

    pub fn support(&self) -> (f64, f64) {
        self.tier.support()
    }

    pub fn occur_prob(&self) -> f64 {
        self.tier.occurrence(self.state)
    }

    /// P(R^s > x | a state-s candidate exists).
    pub fn ccdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        let d = self.occur_prob();
        if d <= 0.0 {
            return 0.0;
        }
        let s = self.state;
        let v = match self.tier.kind {
            TierKind::Ppp => {
                let total = self.tier.total_mass(s);
                let m = self.tier.mass(s, x);
                // e^{−m} − e^{−total}, computed as e^{−m}(1 − e^{−(total − m)})
                (-m).exp() * -(-(total - m)).exp_m1() / d
            }
            TierKind::Cluster => self.tier.cluster_tail(s, x) / d,
        };
        v.clamp(0.0, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let d = self.occur_prob();
        if d <= 0.0 {
            return 0.0;
        }
        self.tier.candidate_density(self.state, x) / d
    }
}

/// Distribution of the 3D distance R₀ = √(D² + H²) from the typical UE to its
/// cluster-center UAV, regardless of link state.
#[derive(Debug, Clone, Copy)]
pub struct R0Law {
    pub cluster: ClusterSpec,
    pub h: f64,
}

impl R0Law {
    pub fn support(&self) -> (f64, f64) {
        match self.cluster.kind {
            ClusterKind::Thomas => (self.h, f64::INFINITY),
            ClusterKind::Matern => (self.h, self.h.hypot(self.cluster.r_c)),
        }
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= self.h {
            return 1.0;
        }
        let d2 = x * x - self.h * self.h;
        match self.cluster.kind {
            ClusterKind::Thomas => (-d2 / (2.0 * self.cluster.sigma.powi(2))).exp(),
            ClusterKind::Matern => (1.0 - d2 / self.cluster.r_c.powi(2)).max(0.0),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.h {
            return 0.0;
        }
        let d = (x * x - self.h * self.h).max(0.0).sqrt();
        if self.cluster.kind == ClusterKind::Matern && d > self.cluster.r_c {
            return 0.0;
        }
        offset_radial(&self.cluster, d) * x
    }
}

/// Conditional law of the 3D distance from a UE to another cluster's UAV,
/// given the ground separation w between the UE's own UAV and that UAV.
#[derive(Debug, Clone, Copy)]
pub struct ClusterOffsetLaw {
    pub cluster: ClusterSpec,
    pub h: f64,
}

impl ClusterOffsetLaw {
    /// Density of the ground distance V between a UE and a UAV at ground
    /// distance w from the UE's cluster center.
    pub fn f_v(&self, v: f64, w: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match self.cluster.kind {
            ClusterKind::Thomas => {
                let s2 = self.cluster.sigma.powi(2);
                (v / s2) * (-(v - w).powi(2) / (2.0 * s2)).exp() * bessel_i0_scaled(v * w / s2)
            }
            ClusterKind::Matern => {
                let rc = self.cluster.r_c;
                let area = PI * rc * rc;
                if v < rc - w {
                    2.0 * v / (rc * rc)
                } else if v >= (rc - w).abs() && v <= rc + w && v > 0.0 && w > 0.0 {
                    let c = ((v * v + w * w - rc * rc) / (2.0 * v * w)).clamp(-1.0, 1.0);
                    2.0 * v * c.acos() / area
                } else {
                    0.0
                }
            }
        }
    }

    /// Density of the 3D distance x = √(v² + H²).
    pub fn pdf(&self, x: f64, w: f64) -> f64 {
        if x <= self.h {
            return 0.0;
        }
        let v = (x * x - self.h * self.h).sqrt();
        x / v * self.f_v(v, w)
    }

    /// Integration range and interior kinks of f_V(· | w).
    pub fn v_domain(&self, w: f64) -> (f64, f64, Vec<f64>) {
        match self.cluster.kind {
            ClusterKind::Thomas => {
                let s = self.cluster.sigma;
                ((w - 12.0 * s).max(0.0), w + 12.0 * s, vec![w])
            }
            ClusterKind::Matern => {
                let rc = self.cluster.r_c;
                ((w - rc).max(0.0), w + rc, vec![(rc - w).abs()])
            }
        }
    }
}

/// All tiers of a scenario, in association order: the cluster center, the
/// UAV tiers, then the ground tier.
#[derive(Debug, Clone)]
pub struct Network {
    pub tiers: Vec<Tier>,
    pub trunc_radius: f64,
}

impl Network {
    pub fn new(cfg: &NetworkConfig, settings: &AnalysisSettings) -> Result<Self> {
        cfg.validate()?;
        settings.validate(cfg)?;
        let rw = settings.trunc_radius;
        let uavs = cfg.uav_tiers();
        let parent = uavs[cfg.parent_tier];
        let a2g = |height: f64| LosModel::AirToGround {
            height,
            env_b: cfg.env_b,
            env_c: cfg.env_c,
        };
        let mut tiers = Vec::with_capacity(uavs.len() + 2);

        let cluster_dmax = match cfg.cluster.kind {
            ClusterKind::Thomas => (40.0 * cfg.cluster.sigma).min(rw),
            ClusterKind::Matern => cfg.cluster.r_c,
        };
        let mut cluster = Tier {
            id: TierId::Cluster,
            kind: TierKind::Cluster,
            density: 0.0,
            power: parent.power,
            bias: parent.bias,
            height: parent.height,
            los: a2g(parent.height),
            path_loss: cfg.uav_path_loss,
            d_max: cluster_dmax,
            cluster: Some(cfg.cluster),
            mass: [Mass::Empty, Mass::Empty],
        };
        cluster.mass = build_masses(&cluster)?;
        tiers.push(cluster);

        for (k, u) in uavs.iter().enumerate() {
            let mut t = Tier {
                id: TierId::Uav(k),
                kind: TierKind::Ppp,
                density: u.density,
                power: u.power,
                bias: u.bias,
                height: u.height,
                los: a2g(u.height),
                path_loss: cfg.uav_path_loss,
                d_max: rw,
                cluster: None,
                mass: [Mass::Empty, Mass::Empty],
            };
            t.mass = build_masses(&t)?;
            tiers.push(t);
        }

        let (lambda, eps) = (cfg.lambda_g, cfg.epsilon);
        tiers.push(Tier {
            id: TierId::Ground,
            kind: TierKind::Ppp,
            density: lambda,
            power: cfg.p_g,
            bias: cfg.b_g,
            height: 0.0,
            los: LosModel::GroundToGround { epsilon: eps },
            path_loss: cfg.gbs_path_loss,
            d_max: rw,
            cluster: None,
            mass: if lambda > 0.0 {
                [
                    Mass::GroundLos { lambda, eps, d_max: rw },
                    Mass::GroundNlos { lambda, eps, d_max: rw },
                ]
            } else {
                [Mass::Empty, Mass::Empty]
            },
        });
        Ok(Network { tiers, trunc_radius: rw })
    }

    pub fn tier(&self, id: TierId) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.id == id)
    }

    pub fn index_of(&self, id: TierId) -> Option<usize> {
        self.tiers.iter().position(|t| t.id == id)
    }

    pub fn cluster(&self) -> &Tier {
        &self.tiers[0]
    }

    /// R₀ law of the cluster tier.
    pub fn r0_law(&self) -> R0Law {
        R0Law {
            cluster: self.cluster().cluster.unwrap(),
            h: self.cluster().height,
        }
    }
}

fn build_masses(t: &Tier) -> Result<[Mass; 2]> {
    if t.kind == TierKind::Ppp && t.density == 0.0 {
        return Ok([Mass::Empty, Mass::Empty]);
    }
    let los = CumTable::build(|d| t.radial(LinkState::Los, d), t.d_max)?;
    let nlos = CumTable::build(|d| t.radial(LinkState::Nlos, d), t.d_max)?;
    Ok([Mass::Table(los), Mass::Table(nlos)])
}

/// Points of a homogeneous PPP on a disc centered at the origin.
pub fn sample_ppp_disk<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let n = poisson_count(density * PI * radius * radius, rng);
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// Distances from the origin of a disc PPP's points, appended to `out`.
pub fn sample_ppp_radii<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R, out: &mut Vec<f64>) {
    let n = poisson_count(density * PI * radius * radius, rng);
    out.extend((0..n).map(|_| radius * rng.random::<f64>().sqrt()));
}

pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive finite mean");
    let n: f64 = p.sample(rng);
    n as usize
}

/// Ground offset of a UE from its cluster center.
pub fn sample_cluster_offset<R: Rng + ?Sized>(cluster: &ClusterSpec, rng: &mut R) -> [f64; 2] {
    match cluster.kind {
        ClusterKind::Thomas => {
            let n = Normal::new(0.0, cluster.sigma).expect("positive sigma");
            [n.sample(rng), n.sample(rng)]
        }
        ClusterKind::Matern => {
            let r = cluster.r_c * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            [r * phi.cos(), r * phi.sin()]
        }
    }
}

/// Check a law: ccdf endpoints and that the pdf integrates to one.
pub fn pdf_mass(law: &DistanceLaw<'_>) -> Result<f64> {
    let tier = law.tier;
    let d = law.occur_prob();
    if d <= 0.0 {
        return Err(Error::Domain(format!("tier {} has no {} candidates", tier.id, law.state)));
    }
    // pdf(x) dx written in ground distance.
    let s = law.state;
    let f = |g: f64| {
        let md = tier.mass_density_ground(s, g);
        let w = match tier.kind {
            TierKind::Ppp => (-tier.mass_ground(s, g)).exp(),
            TierKind::Cluster => 1.0,
        };
        md * w / d
    };
    Ok(integrate(f, 0.0, tier.d_max, &QuadOptions::new(1e-10, 1e-14))
        .context(|| format!("normalization of tier {} {}", tier.id, s))?
        .value)
}
