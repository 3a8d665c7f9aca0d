use crate::error::{Error, Result};
use crate::model::{FluxModel, ScalarField};

/// Engquist–Osher numerical flux
/// `F(ul, ur) = A(0) + ∫₀^ul max(a, 0) + ∫₀^ur min(a, 0)`.
#[inline]
pub fn eo_flux(ul: f64, ur: f64, flux: &FluxModel) -> f64 {
    flux.flux(0.0) + flux.positive_part(ul) + flux.negative_part(ur)
}

/// Courant number `scale · dt · sup|a| / dx` of `field` under `flux`.
pub fn courant_number(field: &ScalarField, flux: &FluxModel, scale: f64, dt: f64) -> f64 {
    let sup = flux.max_speed_on(field.min(), field.max());
    (scale * dt) * sup / field.grid().dx()
}

/// One conservative Engquist–Osher step with time step `scale · dt`.
///
/// Fails when the Courant number exceeds 1, past which the scheme is no
/// longer monotone.
pub fn deterministic_step(
    field: &ScalarField,
    flux: &FluxModel,
    scale: f64,
    dt: f64,
) -> Result<ScalarField> {
    let courant = courant_number(field, flux, scale, dt);
    if !(courant <= 1.0) {
        return Err(Error::numerical(format!(
            "CFL violated: Courant number {courant} exceeds 1"
        )));
    }
    let mut values = field.values().to_vec();
    let mut faces = Vec::new();
    eo_update(&mut values, &mut faces, flux, scale * dt, field.grid().dx());
    ScalarField::new(field.grid(), values)
}

/// Substep cap of one flux advance; beyond it the state has blown up.
pub const MAX_FLUX_SUBSTEPS: usize = 100_000;

/// Advances by the scaled time `tau = scale · dt`, split into as many equal
/// substeps as needed to keep each Courant number at or below `cfl`.
///
/// Only `tau` enters the arithmetic, so `(scale, dt)` and `(1, scale · dt)`
/// give bitwise identical results.
pub(crate) fn advance_flux(
    values: &mut [f64],
    faces: &mut Vec<f64>,
    flux: &FluxModel,
    tau: f64,
    dx: f64,
    cfl: f64,
) -> Result<()> {
    if flux.is_zero() || tau == 0.0 {
        return Ok(());
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    // The monotone scheme keeps the solution inside [lo, hi], so one
    // estimate of sup|a| covers every substep.
    let sup = flux.max_speed_on(lo, hi);
    let courant = tau * sup / dx;
    if !courant.is_finite() {
        return Err(Error::numerical(format!(
            "non-finite Courant number {courant} (state range [{lo}, {hi}])"
        )));
    }
    let needed = (courant / cfl).ceil();
    if needed > MAX_FLUX_SUBSTEPS as f64 {
        return Err(Error::numerical(format!(
            "flux advance needs {needed:e} substeps (Courant number {courant:e}, state range [{lo:e}, {hi:e}])"
        )));
    }
    let substeps = (needed as usize).max(1);
    let h = tau / substeps as f64;
    for _ in 0..substeps {
        eo_update(values, faces, flux, h, dx);
    }
    Ok(())
}

fn eo_update(values: &mut [f64], faces: &mut Vec<f64>, flux: &FluxModel, tau: f64, dx: f64) {
    let m = values.len();
    faces.clear();
    // faces[i] is the flux through the right face of cell i.
    faces.extend((0..m).map(|i| eo_flux(values[i], values[(i + 1) % m], flux)));
    let lambda = tau / dx;
    let mut left = faces[m - 1];
    for i in 0..m {
        let right = faces[i];
        values[i] -= lambda * (right - left);
        left = right;
    }
}
