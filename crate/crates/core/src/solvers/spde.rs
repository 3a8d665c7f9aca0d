use super::finite_volume::advance_flux;
use super::noise_step::ProfileTable;
use crate::error::{Error, Result};
use crate::model::{
    FluxModel, NoiseKey, NoiseModel, NoisePath, ScalarField, SimConfig, Splitting, Trajectory,
    STREAM_COUPLED,
};

/// Time-discrete dynamics `du + scale ∂ₓA(u) dt = amp Σₖ gₖ dβₖ`.
struct Dynamics<'a> {
    flux: Option<&'a FluxModel>,
    noise: &'a NoiseModel,
    scale: f64,
    amp: f64,
}

/// Noise path of `cfg` for `(stream, path_index)`.
pub fn noise_path(cfg: &SimConfig, noise: &NoiseModel, stream: u64, path_index: u64) -> NoisePath {
    NoisePath::generate(
        NoiseKey::new(cfg.seed, stream, path_index),
        cfg.steps(),
        noise.len(),
        cfg.dt,
    )
}

fn check_path(cfg: &SimConfig, noise: &NoiseModel, path: &NoisePath) -> Result<()> {
    if path.modes() != noise.len() || (noise.len() > 0 && path.steps() != cfg.steps()) {
        return Err(Error::Precondition(format!(
            "noise path has {} modes x {} steps, run needs {} x {}",
            path.modes(),
            path.steps(),
            noise.len(),
            cfg.steps()
        )));
    }
    Ok(())
}

fn check_unit_horizon(cfg: &SimConfig) -> Result<()> {
    if cfg.horizon != 1.0 {
        return Err(Error::Config(format!(
            "the scaled equation is posed on [0, 1], got horizon {}",
            cfg.horizon
        )));
    }
    Ok(())
}

fn check_grid(eta: &ScalarField, cfg: &SimConfig) -> Result<()> {
    if eta.grid() != cfg.grid {
        return Err(Error::Precondition(format!(
            "initial field has {} cells, config grid has {}",
            eta.grid().cells(),
            cfg.grid.cells()
        )));
    }
    Ok(())
}

/// Runs `cfg.steps()` steps of size `dt` against `path`, recording every
/// `save_stride`-th state and the final one. Recorded times are `n · dt`.
fn integrate(
    eta: &ScalarField,
    cfg: &SimConfig,
    dt: f64,
    dyn_: &Dynamics,
    path: &NoisePath,
) -> Result<Trajectory> {
    let grid = eta.grid();
    let dx = grid.dx();
    let steps = cfg.steps();
    let table = ProfileTable::new(dyn_.noise, grid);
    let tau = dyn_.scale * dt;
    let mut values = eta.values().to_vec();
    let mut faces = Vec::with_capacity(grid.cells());
    let mut times = vec![0.0];
    let mut snapshots = vec![eta.clone()];

    for n in 0..steps {
        let db = path.increments(n);
        let step = |values: &mut Vec<f64>, faces: &mut Vec<f64>| -> Result<()> {
            match (dyn_.flux, cfg.splitting) {
                (None, _) => table.apply(values, dyn_.noise, dyn_.amp, db),
                (Some(f), Splitting::Lie) => {
                    advance_flux(values, faces, f, tau, dx, cfg.cfl)?;
                    table.apply(values, dyn_.noise, dyn_.amp, db)
                }
                (Some(f), Splitting::Strang) => {
                    advance_flux(values, faces, f, 0.5 * tau, dx, cfg.cfl)?;
                    table.apply(values, dyn_.noise, dyn_.amp, db)?;
                    advance_flux(values, faces, f, 0.5 * tau, dx, cfg.cfl)
                }
            }
        };
        step(&mut values, &mut faces).map_err(|e| e.at_step(n))?;
        let done = n + 1;
        if done % cfg.save_stride == 0 || done == steps {
            times.push(done as f64 * dt);
            snapshots.push(ScalarField::new(grid, values.clone()).map_err(|e| e.at_step(n))?);
        }
    }
    Trajectory::new(times, snapshots)
}

/// Path of the scaled equation `du + ε∂ₓA(u)dt = √ε Σₖ gₖ(x,u) dβₖ` on
/// `[0, 1]`, driven by the given noise path.
pub fn solve_scaled_spde_with_path(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    path: &NoisePath,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_unit_horizon(cfg)?;
    check_grid(eta, cfg)?;
    check_path(cfg, noise, path)?;
    let dyn_ = Dynamics {
        flux: Some(flux),
        noise,
        scale: cfg.epsilon,
        amp: cfg.epsilon.sqrt(),
    };
    integrate(eta, cfg, cfg.dt, &dyn_, path)
}

/// Path `path_index` of the scaled equation, seeded from `cfg.seed`.
pub fn solve_scaled_spde(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    path_index: u64,
) -> Result<Trajectory> {
    let path = noise_path(cfg, noise, STREAM_COUPLED, path_index);
    solve_scaled_spde_with_path(eta, cfg, flux, noise, &path).map_err(|e| e.on_path(path_index))
}

/// Path of the flux-free equation `dv = √ε Σₖ gₖ(x,v) dβₖ`.
pub fn solve_flux_free_with_path(
    eta: &ScalarField,
    cfg: &SimConfig,
    noise: &NoiseModel,
    path: &NoisePath,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_unit_horizon(cfg)?;
    check_grid(eta, cfg)?;
    check_path(cfg, noise, path)?;
    let dyn_ = Dynamics {
        flux: None,
        noise,
        scale: cfg.epsilon,
        amp: cfg.epsilon.sqrt(),
    };
    integrate(eta, cfg, cfg.dt, &dyn_, path)
}

pub fn solve_flux_free(
    eta: &ScalarField,
    cfg: &SimConfig,
    noise: &NoiseModel,
    path_index: u64,
) -> Result<Trajectory> {
    let path = noise_path(cfg, noise, STREAM_COUPLED, path_index);
    solve_flux_free_with_path(eta, cfg, noise, &path).map_err(|e| e.on_path(path_index))
}

/// `(uᵉ, vᵉ)` driven by one shared noise path.
pub fn coupled_pair_with_path(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    path: &NoisePath,
) -> Result<(Trajectory, Trajectory)> {
    let u = solve_scaled_spde_with_path(eta, cfg, flux, noise, path)?;
    let v = solve_flux_free_with_path(eta, cfg, noise, path)?;
    Ok((u, v))
}

pub fn coupled_pair(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    path_index: u64,
) -> Result<(Trajectory, Trajectory)> {
    let path = noise_path(cfg, noise, STREAM_COUPLED, path_index);
    coupled_pair_with_path(eta, cfg, flux, noise, &path).map_err(|e| e.on_path(path_index))
}

/// State at time `ε` of the unscaled equation
/// `du + ∂ₓA(u)dt = Σₖ gₖ(x,u) dβₖ`, stepped with `dt_base = ε · cfg.dt`
/// so that its time grid maps onto the grid of the scaled equation.
pub fn solve_base_small_time_with_path(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    path: &NoisePath,
) -> Result<ScalarField> {
    cfg.validate()?;
    check_unit_horizon(cfg)?;
    check_grid(eta, cfg)?;
    check_path(cfg, noise, path)?;
    let dt_base = cfg.epsilon * cfg.dt;
    if noise.len() > 0 && (path.dt() - dt_base).abs() > 1e-12 * dt_base {
        return Err(Error::Precondition(format!(
            "noise path step {} differs from the base step {dt_base}",
            path.dt()
        )));
    }
    let dyn_ = Dynamics {
        flux: Some(flux),
        noise,
        scale: 1.0,
        amp: 1.0,
    };
    let traj = integrate(eta, cfg, dt_base, &dyn_, path)?;
    Ok(traj.last().clone())
}

/// Base path for `(stream, path_index)`; Brownian increments have variance
/// `ε · cfg.dt`.
pub fn solve_base_small_time_on_stream(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    stream: u64,
    path_index: u64,
) -> Result<ScalarField> {
    let path = NoisePath::generate(
        NoiseKey::new(cfg.seed, stream, path_index),
        cfg.steps(),
        noise.len(),
        cfg.epsilon * cfg.dt,
    );
    solve_base_small_time_with_path(eta, cfg, flux, noise, &path).map_err(|e| e.on_path(path_index))
}

pub fn solve_base_small_time(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    path_index: u64,
) -> Result<ScalarField> {
    solve_base_small_time_on_stream(eta, cfg, flux, noise, STREAM_COUPLED, path_index)
}

/// Endpoint of the scaled equation for `(stream, path_index)`.
pub fn solve_scaled_endpoint_on_stream(
    eta: &ScalarField,
    cfg: &SimConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    stream: u64,
    path_index: u64,
) -> Result<ScalarField> {
    let path = noise_path(cfg, noise, stream, path_index);
    let cfg = SimConfig {
        save_stride: cfg.steps(),
        ..*cfg
    };
    solve_scaled_spde_with_path(eta, &cfg, flux, noise, &path)
        .map(|t| t.last().clone())
        .map_err(|e| e.on_path(path_index))
}

/// `max` over saved snapshots of `‖u(t)‖ₚᵖ`.
pub fn lp_moment(traj: &Trajectory, p: f64) -> f64 {
    traj.snapshots()
        .iter()
        .map(|s| s.lp_norm_pow(p))
        .fold(f64::NEG_INFINITY, f64::max)
}
