//! Monte Carlo simulation of spatial firewalls in wireless networks.
//!
//! Devices form a Poisson point process on a torus and link when within
//! communication range. A fraction of them become firewalls, and every device
//! within a firewall's secured zone drops out of malware propagation. The
//! remaining susceptible subgraph either winds around the torus (an outbreak
//! can spread network-wide) or splits into bounded clusters (quarantined).
//!
//! Pipeline: [`region::sample_ppp`] → [`rgg::build_rgg`] →
//! [`firewall::select_firewalls`] → [`firewall::apply_secured_zones`] →
//! [`percolation::detect_spanning`]. [`harness::run_sweep`] repeats it over a
//! grid of firewall fractions; [`epidemic::simulate_sir`] runs the SIR process
//! directly on a realization.

pub mod epidemic;
pub mod error;
pub mod firewall;
pub mod grid;
pub mod harness;
pub mod percolation;
pub mod plot;
pub mod region;
pub mod rgg;
pub mod seed;
pub mod union_find;

pub use epidemic::{simulate_sir, solve_mean_field_sir, EpidemicParams, EpidemicTrace};
pub use error::{Error, Result};
pub use firewall::{apply_secured_zones, select_firewalls, FirewallPolicy, PolicyKind, QuarantineLayout};
pub use harness::{estimate_critical_percentage, run_single, run_sweep, ExperimentConfig, SweepResult, SweepRow};
pub use percolation::{cluster_stats, detect_spanning, PercolationOutcome, SpanningRule};
pub use region::{sample_ppp, torus_distance, DeviceSet, Point, TorusRegion};
pub use rgg::{build_rgg, connected_components, AdjacencyGraph, ClusterReport};
