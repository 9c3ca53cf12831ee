//! Samplers against the analytical laws they are meant to follow, by
//! Kolmogorov-Smirnov distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavcov::channel::{gain_pmf, sample_gain, Nakagami};
use uavcov::geometry::{sample_cluster_offset, sample_ppp_radii, Network};
use uavcov::{ClusterKind, ConfigFile, LinkState};

/// Critical KS distance at the 1% level.
fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

fn ks_distance(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn network(f: &ConfigFile) -> Network {
    let (cfg, settings) = f.resolve().unwrap();
    Network::new(&cfg, &settings).unwrap()
}

#[test]
fn cluster_distance_sampler_follows_r0_law() {
    for (kind, scale) in [(ClusterKind::Thomas, 10.0), (ClusterKind::Matern, 20.0)] {
        let f = ConfigFile {
            cluster: kind,
            sigma: scale,
            r_c: scale,
            ..ConfigFile::default()
        };
        let net = network(&f);
        let law = net.r0_law();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let o = sample_cluster_offset(&law.cluster, &mut rng);
                o[0].hypot(o[1]).hypot(law.h)
            })
            .collect();
        let d = ks_distance(samples, |x| 1.0 - law.ccdf(x));
        assert!(d < ks_critical(n), "{kind:?}: KS {d}");
    }
}

#[test]
fn nearest_ppp_point_is_rayleigh() {
    let density = 1e-4;
    let radius = 500.0;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 10_000;
    let mut buf = Vec::new();
    let samples: Vec<f64> = (0..n)
        .map(|_| {
            buf.clear();
            sample_ppp_radii(density, radius, &mut rng, &mut buf);
            buf.iter().copied().fold(radius, f64::min)
        })
        .collect();
    let d = ks_distance(samples, |r| 1.0 - (-density * std::f64::consts::PI * r * r).exp());
    assert!(d < ks_critical(n), "KS {d}");
}

#[test]
fn nearest_los_and_nlos_uav_follow_their_distance_laws() {
    let net = network(&ConfigFile::default());
    let tier = &net.tiers[1];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let trials = 12_000;
    let mut buf = Vec::new();
    let mut nearest = [Vec::new(), Vec::new()];
    for _ in 0..trials {
        buf.clear();
        sample_ppp_radii(tier.density, tier.d_max, &mut rng, &mut buf);
        let mut best = [f64::INFINITY; 2];
        for &d in &buf {
            let s = if rng.random::<f64>() < tier.los.p_los_ground(d) {
                LinkState::Los
            } else {
                LinkState::Nlos
            };
            best[s.index()] = best[s.index()].min(d);
        }
        for s in LinkState::BOTH {
            if best[s.index()].is_finite() {
                nearest[s.index()].push(tier.slant_of(best[s.index()]));
            }
        }
    }
    for s in LinkState::BOTH {
        let law = tier.law(s);
        let samples = std::mem::take(&mut nearest[s.index()]);
        let n = samples.len();
        let occurrence = n as f64 / trials as f64;
        assert!((occurrence - law.occur_prob()).abs() < 0.01, "{s}: {occurrence} vs {}", law.occur_prob());
        let d = ks_distance(samples, |x| 1.0 - law.ccdf(x));
        assert!(d < ks_critical(n), "{s}: KS {d} over {n}");
    }
}

#[test]
fn nakagami_sampler_matches_the_erlang_law() {
    for m in [1u32, 2, 3, 5] {
        let fading = Nakagami::new(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14 + m as u64);
        let n = 20_000;
        let samples: Vec<f64> = (0..n).map(|_| fading.sample(&mut rng)).collect();
        // Unit-mean Gamma(m, 1/m): P(h ≤ y) = 1 − e^{−my} Σ_{k<m} (my)^k/k!.
        let cdf = |y: f64| {
            let z = m as f64 * y;
            let mut term = 1.0;
            let mut sum = 0.0;
            for k in 0..m {
                if k > 0 {
                    term *= z / k as f64;
                }
                sum += term;
            }
            1.0 - (-z).exp() * sum
        };
        let d = ks_distance(samples, cdf);
        assert!(d < ks_critical(n), "m = {m}: KS {d}");
    }
}

#[test]
fn antenna_gain_sampler_matches_its_pmf() {
    let (cfg, _) = ConfigFile::default().resolve().unwrap();
    let levels = gain_pmf(&cfg.antenna);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let n = 200_000;
    // Levels can share a gain value (main·side = side·main), so compare per value.
    let mut values: Vec<(f64, f64, usize)> = Vec::new();
    for l in &levels {
        match values.iter_mut().find(|v| v.0 == l.gain) {
            Some(v) => v.1 += l.prob,
            None => values.push((l.gain, l.prob, 0)),
        }
    }
    for _ in 0..n {
        let g = sample_gain(&levels, &mut rng);
        values.iter_mut().find(|v| v.0 == g).expect("sampled gain is one of the levels").2 += 1;
    }
    for (_, p, c) in values {
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        let freq = c as f64 / n as f64;
        assert!((freq - p).abs() <= 4.0 * sd + 1e-12, "{freq} vs {p}");
    }
}
