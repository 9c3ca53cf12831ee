//! Equivalences between independent code paths of the analytical model.

use uavcov::config::UavTierFile;
use uavcov::downlink::CoverageModel;
use uavcov::extensions::{f_value, noise_limited_model, noise_limited_stp, MultiTierSet};
use uavcov::uplink::UplinkModel;
use uavcov::{ConfigFile, LinkState, TierId};

fn model(f: &ConfigFile) -> CoverageModel {
    let (cfg, settings) = f.resolve().unwrap();
    CoverageModel::new(&cfg, &settings).unwrap()
}

#[test]
fn switched_off_interference_reduces_stp_to_the_noise_limited_cases() {
    let f = ConfigFile {
        include_interference: false,
        ..ConfigFile::default()
    };
    let (cfg, settings) = f.resolve().unwrap();
    let full = CoverageModel::new(&cfg, &settings).unwrap();
    let nl = noise_limited_model(&cfg, &settings).unwrap();
    let (gamma_e, tau) = (1e-4, cfg.frame);
    // Puts the root of F at ρ = 0.5 so the grid sees both branches.
    let gamma_sinr = gamma_e / (tau * 0.5) / (cfg.sigma_c2 / 0.5 + cfg.sigma_n2);
    let mut branches = [false; 2];
    for rho in [0.05, 0.2, 0.5, 0.8, 0.95] {
        let r = full.successful_transmission(gamma_e, gamma_sinr, tau, rho).unwrap();
        let n = noise_limited_stp(&nl, rho, tau, gamma_e, gamma_sinr).unwrap();
        branches[n.energy_branch as usize] = true;
        assert_eq!(n.energy_branch, f_value(rho, tau, gamma_e, gamma_sinr, &cfg) >= 0.0);
        // With I ≡ 0 both constraints are thresholds on the same signal, so the
        // joint event is the stricter one on every serving link.
        for ((st, e), q) in r.success.links.iter().zip(&n.energy.links).zip(&n.sinr.links) {
            if st.association > 0.0 {
                assert!((st.conditional - e.conditional.min(q.conditional)).abs() < 1e-9);
            }
        }
        // The case logic picks the stricter constraint by the sign of F; it can only
        // disagree through the Gamma-approximated energy tail.
        let d = (r.success.total - n.success.total).abs();
        assert!(d < 2e-3, "rho {rho}: {} vs {}", r.success.total, n.success.total);
    }
    assert_eq!(branches, [true, true]);
}

#[test]
fn noise_limited_scan_has_both_branches_around_the_root() {
    let f = ConfigFile {
        sigma_c2_dbm: 10.0,
        ..ConfigFile::default()
    };
    let (cfg, settings) = f.resolve().unwrap();
    let nl = noise_limited_model(&cfg, &settings).unwrap();
    let gamma_sinr = 10f64.powf(-1.5);
    let low = noise_limited_stp(&nl, 0.5, cfg.frame, 1e-4, gamma_sinr).unwrap();
    let high = noise_limited_stp(&nl, 0.95, cfg.frame, 1e-4, gamma_sinr).unwrap();
    assert!(!low.energy_branch);
    assert!(high.energy_branch);
}

#[test]
fn splitting_a_uav_tier_in_two_preserves_every_total() {
    let base = ConfigFile::default();
    let half = ConfigFile {
        lambda_u: 0.5 * base.lambda_u,
        tiers: vec![UavTierFile {
            density: 0.5 * base.lambda_u,
            p_dbm: base.p_u_dbm,
            bias: base.b_u,
            height: base.h,
        }],
        ..base.clone()
    };
    let a = model(&base);
    let b = model(&half);
    assert_eq!(MultiTierSet::from_config(&b.cfg).uav.len(), 2);

    for s in LinkState::BOTH {
        let split = b.assoc.get(TierId::Uav(0), s) + b.assoc.get(TierId::Uav(1), s);
        assert!((a.assoc.get(TierId::Uav(0), s) - split).abs() < 1e-6);
        // Identical halves share the tier's association equally.
        assert!((b.assoc.get(TierId::Uav(0), s) - b.assoc.get(TierId::Uav(1), s)).abs() < 1e-6);
        for t in [TierId::Cluster, TierId::Ground] {
            assert!((a.assoc.get(t, s) - b.assoc.get(t, s)).abs() < 1e-6);
        }
    }
    let ra = a.successful_transmission(1e-4, 1.0, a.cfg.frame, 0.5).unwrap();
    let rb = b.successful_transmission(1e-4, 1.0, b.cfg.frame, 0.5).unwrap();
    for (x, y) in [(&ra.energy, &rb.energy), (&ra.sinr, &rb.sinr), (&ra.success, &rb.success)] {
        assert!((x.total - y.total).abs() < 1e-5, "{} vs {}", x.total, y.total);
    }
}

#[test]
fn nested_uplink_laplace_matches_the_reduced_form() {
    let m = UplinkModel::new(model(&ConfigFile::default()));
    let ctx = m.context(0.5, 0.0, 0.01).unwrap();
    for mu in [1e6, 1e8, 1e10] {
        let reduced = m.laplace(&ctx, &[mu]).unwrap()[0];
        let nested = m.laplace_nested(&ctx, mu).unwrap();
        assert!((reduced - nested).abs() < 1e-5, "mu {mu}: {reduced} vs {nested}");
    }
}

#[test]
fn stp_never_exceeds_either_constituent() {
    let m = model(&ConfigFile::default());
    for (gamma_e, gamma_sinr) in [(1e-6, 1.0), (1e-4, 0.1), (1e-3, 10.0), (1e-5, 100.0)] {
        for rho in [0.1, 0.5, 0.9] {
            let r = m.successful_transmission(gamma_e, gamma_sinr, m.cfg.frame, rho).unwrap();
            assert!(r.success.total <= r.energy.total.min(r.sinr.total));
            for ((st, e), q) in r.success.links.iter().zip(&r.energy.links).zip(&r.sinr.links) {
                if st.association > 0.0 {
                    assert!(st.conditional <= e.conditional.min(q.conditional));
                }
            }
        }
    }
}
