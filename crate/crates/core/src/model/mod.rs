//! Grids, fields, flux and noise models, and the sampled certificates that a
//! configured model satisfies the growth and Lipschitz hypotheses.

mod certificate;
mod flux;
mod grid;
mod initial;
mod noise;
mod noise_path;
mod poly;
mod sim;

pub(crate) use certificate::RatioTracker;
pub use certificate::{symmetric_lattice, InequalityCheck, RATIO_SLACK};
pub use flux::{validate_flux, validate_flux_on, FluxCertificate, FluxKind, FluxModel};
pub use grid::{torus_distance, ScalarField, TorusGrid, Trajectory};
pub use initial::{make_initial, InitialKind};
pub use noise::{validate_noise, NoiseCertificate, NoiseMode, NoiseModel, Profile};
pub use noise_path::{
    NoiseKey, NoisePath, STREAM_COUPLED, STREAM_SCALING_BASE, STREAM_SCALING_SCALED,
};
pub use poly::Polynomial;
pub use sim::{SimConfig, Splitting, DEFAULT_CFL};

/// Default half-width of the state lattice used by the validators.
pub const DEFAULT_VALIDATION_RANGE: f64 = 10.0;
/// Default number of state lattice points used by the validators.
pub const DEFAULT_LATTICE_N: usize = 1024;
