//! Analytical quantities against Monte Carlo estimates at moderate trial
//! counts.

use uavcov::downlink::{CoverageModel, InterferenceSet};
use uavcov::montecarlo::{ActiveMode, DownlinkPlan, DownlinkProbe, Simulator};
use uavcov::uplink::{UplinkContext, UplinkModel};
use uavcov::{ConfigFile, TierId};

const TRIALS: usize = 20_000;

fn setup(f: &ConfigFile) -> (CoverageModel, Simulator) {
    let (cfg, settings) = f.resolve().unwrap();
    (
        CoverageModel::new(&cfg, &settings).unwrap(),
        Simulator::new(&cfg, &settings).unwrap(),
    )
}

#[test]
fn laplace_transforms_match_empirical_means() {
    let (m, sim) = setup(&ConfigFile::default());
    let mut plan = DownlinkPlan::default();
    for t in [1e6, 1e7, 1e8] {
        for set in [InterferenceSet::All, InterferenceSet::Cluster, InterferenceSet::Ppp] {
            plan.laplace.push((t, set));
        }
    }
    let est = sim.simulate_downlink(&plan, TRIALS).unwrap();
    for (&(t, set), (_, e)) in plan.laplace.iter().zip(&est.laplace) {
        let a = m.mean_laplace(t, set).unwrap();
        assert!((a - e.mean).abs() < 0.01, "t {t:e} {set:?}: {a} vs {}", e.mean);
    }
}

#[test]
fn interference_ccdf_tracks_simulation_within_the_gamma_approximation_error() {
    let (m, sim) = setup(&ConfigFile::default());
    let xs = [1e-9, 1e-8, 1e-7];
    let plan = DownlinkPlan {
        ccdf: xs.to_vec(),
        ..DownlinkPlan::default()
    };
    let est = sim.simulate_downlink(&plan, TRIALS).unwrap();
    for (&x, (_, e)) in xs.iter().zip(&est.ccdf) {
        let a = m.interference_ccdf(x).unwrap().total;
        // At order 5 the indicator approximation itself is off by up to ~0.02
        // in the middle of the distribution, while the Laplace transforms it is
        // built from match the simulation within noise (see the test above).
        assert!((a - e.estimate).abs() < 0.03, "x {x:e}: {a} vs {}", e.estimate);
    }
}

#[test]
fn association_and_coverage_match_at_moderate_trials() {
    let (m, sim) = setup(&ConfigFile::default());
    let plan = DownlinkPlan {
        probes: vec![DownlinkProbe {
            gamma_e: 1e-5,
            gamma_sinr: 10.0,
            tau: 1.0,
            rho: 0.3,
        }],
        ..DownlinkPlan::default()
    };
    let est = sim.simulate_downlink(&plan, TRIALS).unwrap();
    for (tier, state, a) in m.assoc.entries() {
        let e = est.association(tier, state).unwrap();
        assert!((a - e.estimate).abs() < 0.015, "{tier} {state}: {a} vs {}", e.estimate);
    }
    let r = m.successful_transmission(1e-5, 10.0, 1.0, 0.3).unwrap();
    let p = &est.probes[0];
    assert!((r.sinr.total - p.sinr.estimate).abs() < 0.015);
    assert!(m.assoc.tier_total(TierId::Cluster) > 0.3);

    // At this mid-range energy coverage the order-5 Gamma indicator
    // approximation is about 0.03 off. The simulated value sits between
    // the order-3 and order-10 approximations, so the gap is the
    // approximation's and not the Laplace transforms'.
    let hw = 2.0 * p.energy.half_width;
    assert!((r.energy.total - p.energy.estimate).abs() < 0.04);
    assert!((r.success.total - p.success.estimate).abs() < 0.04);
    let order = |n: usize| {
        let f = ConfigFile {
            gamma_order: n,
            ..ConfigFile::default()
        };
        setup(&f).0.energy_coverage(1e-5, 1.0, 0.3).unwrap().total
    };
    let (lo, hi) = (order(10), order(3));
    assert!(lo < hi);
    assert!(
        (lo - hw..=hi + hw).contains(&p.energy.estimate),
        "{} outside [{lo}, {hi}]",
        p.energy.estimate
    );
}

#[test]
fn uplink_coverage_with_partial_activity_matches_simulation() {
    let (m, sim) = setup(&ConfigFile::default());
    let ul = UplinkModel::new(m);
    let p_active = 0.5;
    // Choose the threshold where coverage sits mid-range.
    let coverage = |gamma_ul: f64| {
        let ctx = UplinkContext {
            tau: 0.5,
            rho: 0.0,
            gamma_ul,
            p_active,
        };
        ul.sinr_coverage(&ctx).unwrap()
    };
    let gamma_ul = (0..12)
        .map(|k| 10f64.powi(6 - k))
        .find(|&g| (0.2..0.8).contains(&coverage(g)))
        .unwrap();
    let a = coverage(gamma_ul);
    let e = sim
        .simulate_uplink(0.5, 0.0, gamma_ul, ActiveMode::Given(p_active), TRIALS)
        .unwrap()
        .coverage;
    assert!((a - e.estimate).abs() < 0.015, "gamma {gamma_ul:e}: {a} vs {}", e.estimate);
}

#[test]
fn doubling_the_window_moves_estimates_within_noise() {
    let plan = DownlinkPlan {
        probes: vec![DownlinkProbe {
            gamma_e: 1e-4,
            gamma_sinr: 1.0,
            tau: 1.0,
            rho: 0.5,
        }],
        ..DownlinkPlan::default()
    };
    let base = ConfigFile::default();
    let wide = ConfigFile {
        trunc_radius: 2.0 * base.trunc_radius,
        ..base.clone()
    };
    let a = setup(&base).1.simulate_downlink(&plan, TRIALS).unwrap();
    let b = setup(&wide).1.simulate_downlink(&plan, TRIALS).unwrap();
    // Independent runs: their difference has a half-width √2 times a single one.
    let (pa, pb) = (&a.probes[0], &b.probes[0]);
    for (x, y) in [(pa.energy, pb.energy), (pa.sinr, pb.sinr), (pa.success, pb.success)] {
        let hw = x.half_width.hypot(y.half_width).max(1.0 / TRIALS as f64);
        assert!((x.estimate - y.estimate).abs() <= 1.5 * hw, "{} vs {}", x.estimate, y.estimate);
    }
    for ((_, _, x), (_, _, y)) in a.association.iter().zip(&b.association) {
        let hw = x.half_width.hypot(y.half_width).max(1.0 / TRIALS as f64);
        assert!((x.estimate - y.estimate).abs() <= 1.5 * hw, "{} vs {}", x.estimate, y.estimate);
    }
}
