//! Coverage analysis for energy-harvesting, UAV-assisted mmWave networks whose
//! users form Poisson cluster processes around the UAVs.
//!
//! Every analytical quantity (association probabilities, energy, SINR and
//! successful-transmission coverage, uplink coverage and throughput) is
//! evaluated by adaptive quadrature, and the [`montecarlo`] module simulates
//! the same model from scratch so the two can be compared.

pub mod association;
pub mod channel;
pub mod config;
pub mod downlink;
pub mod error;
pub mod extensions;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod units;
pub mod uplink;

pub use channel::LinkState;
pub use config::{AnalysisSettings, ClusterKind, ClusterSpec, ConfigFile, NetworkConfig};
pub use error::{Error, Result};
pub use geometry::TierId;
