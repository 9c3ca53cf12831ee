//! Unit conversions. Everything inside the crate works in linear SI units;
//! decibel forms only appear at the configuration and CLI boundary.

/// Power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

/// Ratio in dB to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Thermal noise power in watts: -174 dBm/Hz + 10 log10(W) + NF.
pub fn thermal_noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(thermal_noise_dbm(bandwidth_hz, noise_figure_db))
}

/// Thermal noise power in dBm.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}
