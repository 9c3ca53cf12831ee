//! Randomized invariants of the analytical model.

use proptest::prelude::*;

use uavcov::downlink::{CoverageModel, InterferenceSet};
use uavcov::extensions::{f_value, optimal_rho, uplink_closed_form};
use uavcov::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};
use uavcov::{ClusterKind, ClusterSpec, ConfigFile};

fn model(f: &ConfigFile) -> CoverageModel {
    let (cfg, settings) = f.resolve().unwrap();
    CoverageModel::new(&cfg, &settings).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn association_is_a_distribution(
        matern in any::<bool>(),
        scale in 2.0f64..60.0,
        h in 0.0f64..150.0,
        lambda_u in 1e-6f64..1e-4,
        b_u in 0.1f64..10.0,
    ) {
        let f = ConfigFile {
            cluster: if matern { ClusterKind::Matern } else { ClusterKind::Thomas },
            sigma: scale,
            r_c: scale,
            h,
            lambda_u,
            b_u,
            ..ConfigFile::default()
        };
        let m = model(&f);
        prop_assert!((m.assoc.total() - 1.0).abs() < 1e-3);
        for (_, _, a) in m.assoc.entries() {
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn laplace_transform_is_a_decreasing_probability(t1 in 1e4f64..1e9, t2 in 1e4f64..1e9) {
        let m = model(&ConfigFile::default());
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        for set in [InterferenceSet::All, InterferenceSet::Cluster, InterferenceSet::Ppp] {
            let a = m.mean_laplace(lo, set).unwrap();
            let b = m.mean_laplace(hi, set).unwrap();
            prop_assert!(b <= a + 1e-9 && a <= 1.0 + 1e-12 && b > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn optimal_rho_is_the_root_of_f(
        gamma_e_db in -60.0f64..-20.0,
        gamma_db in -30.0f64..10.0,
        tau in 0.05f64..1.0,
        sigma_c2_dbm in -60.0f64..20.0,
    ) {
        let f = ConfigFile { sigma_c2_dbm, ..ConfigFile::default() };
        let (cfg, _) = f.resolve().unwrap();
        let (gamma_e, gamma) = (db_to_linear(gamma_e_db), db_to_linear(gamma_db));
        let rho = optimal_rho(tau, gamma_e, gamma, &cfg).unwrap();
        prop_assert!(rho > 0.0 && rho < 1.0);
        let scale = gamma_e / (tau * (1.0 - rho)) + gamma * (cfg.sigma_c2 / rho + cfg.sigma_n2);
        prop_assert!(f_value(rho, tau, gamma_e, gamma, &cfg).abs() <= 1e-9 * scale);
        // F increases through its root.
        prop_assert!(f_value(rho * 0.99, tau, gamma_e, gamma, &cfg) < 0.0);
        prop_assert!(f_value(rho + 0.01 * (1.0 - rho), tau, gamma_e, gamma, &cfg) > 0.0);
    }

    #[test]
    fn uplink_closed_form_is_a_decreasing_probability(
        c in 1e-7f64..1e-1,
        scale in 1.0f64..80.0,
        h in 0.0f64..120.0,
        matern in any::<bool>(),
    ) {
        let cluster = if matern { ClusterSpec::matern(scale) } else { ClusterSpec::thomas(scale) };
        let p = uplink_closed_form(c, &cluster, h);
        let q = uplink_closed_form(2.0 * c, &cluster, h);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(q <= p);
    }

    #[test]
    fn unit_conversions_round_trip(x in -150.0f64..80.0) {
        prop_assert!((linear_to_db(db_to_linear(x)) - x).abs() < 1e-9);
        prop_assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() < 1e-9);
    }
}
