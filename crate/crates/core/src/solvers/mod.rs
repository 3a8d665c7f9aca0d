//! Time integrators: the Engquist–Osher finite-volume step, the
//! Euler–Maruyama noise substep, operator-split paths of the scaled and
//! flux-free equations, and the RK4 skeleton solver.

mod finite_volume;
mod noise_step;
mod skeleton;
mod spde;

pub use finite_volume::{courant_number, deterministic_step, eo_flux, MAX_FLUX_SUBSTEPS};
pub use noise_step::stochastic_substep;
pub(crate) use noise_step::ProfileTable;
pub use skeleton::solve_skeleton;
pub use spde::{
    coupled_pair, coupled_pair_with_path, lp_moment, noise_path, solve_base_small_time,
    solve_base_small_time_on_stream, solve_base_small_time_with_path, solve_flux_free,
    solve_flux_free_with_path, solve_scaled_endpoint_on_stream, solve_scaled_spde,
    solve_scaled_spde_with_path,
};
