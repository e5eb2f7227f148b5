//! Capacity regions of the two-user asynchronous Gaussian multiple-access
//! channel under faster-than-Nyquist signaling.
//!
//! Two equivalent characterizations are implemented and cross-checked:
//!
//! * a finite-block **time-domain** picture — block-Toeplitz interference
//!   matrices, an SVD mode decomposition, and per-mode rate formulas
//!   ([`toeplitz`], [`rate_time`]);
//! * an infinite-block **spectral** picture — folded and cross spectra of
//!   the accelerated pulse integrated over the normalized band
//!   ([`pulse`], [`rate_freq`]).
//!
//! Both reduce to the same concave allocation problem ([`optim`]), from
//! which [`region`] traces capacity-region boundaries, runs convergence
//! studies of the finite-block regions toward the spectral limit, sweeps
//! the inter-user delay, and builds comparison tables. [`config`],
//! [`output`], and [`scenario`] back the `capregion` command-line tool.

pub mod config;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod output;
pub mod pulse;
pub mod quad;
pub mod rate_freq;
pub mod rate_time;
pub mod region;
pub mod scenario;
pub mod toeplitz;

pub use config::{load_scenario, parse_scenario, RunMode, ScenarioConfig};
pub use error::{CapError, CapResult};
pub use optim::{AscentParams, ModeProblem, WeightedSolution};
pub use pulse::PulseSpec;
pub use rate_freq::{rate_integrals, SpectralAllocation, SpectralGrid};
pub use rate_time::{iid_successive_baseline, rate_triple_from_modes, RateTriple};
pub use region::{
    comparison_suite, containment_deficit, convergence_study, region_deviation, tau_sweep,
    trace_boundary, RateRegion, RegionMode, RegionRequest,
};
pub use scenario::{fig1, fig2, run_scenario, selfcheck, RunSummary, SelfCheckOptions};
pub use toeplitz::{build_interference, ChannelSpec, InterferenceMatrices};
