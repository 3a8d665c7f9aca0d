use super::noise_step::ProfileTable;
use crate::error::{Error, Result};
use crate::model::{NoiseModel, ScalarField, Trajectory};
use crate::rate::Control;

/// Skeleton path `du = Σₖ gₖ(x,u) hₖ(t) dt` on `[0, 1]`, integrated cell by
/// cell with classical RK4 on `steps` uniform steps.
///
/// Within a step the control is frozen at the bin holding the step
/// midpoint; with `steps` a multiple of the bin count every step lies inside
/// one bin and the right-hand side is smooth on it.
pub fn solve_skeleton(
    eta: &ScalarField,
    h: &Control,
    noise: &NoiseModel,
    steps: usize,
) -> Result<Trajectory> {
    if h.modes() != noise.len() {
        return Err(Error::Precondition(format!(
            "control has {} modes, noise model has {}",
            h.modes(),
            noise.len()
        )));
    }
    if steps < h.bins() {
        return Err(Error::Precondition(format!(
            "{steps} steps cannot resolve {} control bins",
            h.bins()
        )));
    }
    let grid = eta.grid();
    let table = ProfileTable::new(noise, grid);
    let dt = 1.0 / steps as f64;
    let mut values = eta.values().to_vec();
    let mut hk = vec![0.0; noise.len()];
    let mut times = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::with_capacity(steps + 1);
    times.push(0.0);
    snapshots.push(eta.clone());

    for n in 0..steps {
        let bin = h.bin_of((n as f64 + 0.5) * dt);
        for (k, v) in hk.iter_mut().enumerate() {
            *v = h.get(k, bin);
        }
        for (i, u) in values.iter_mut().enumerate() {
            let rhs = |w: f64| -> f64 {
                noise
                    .modes()
                    .iter()
                    .zip(&hk)
                    .enumerate()
                    .map(|(k, (m, c))| m.eval_with_profile(table.phi(k, i), w) * c)
                    .sum()
            };
            let k1 = rhs(*u);
            let k2 = rhs(*u + 0.5 * dt * k1);
            let k3 = rhs(*u + 0.5 * dt * k2);
            let k4 = rhs(*u + dt * k3);
            *u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !u.is_finite() {
                return Err(Error::numerical(format!("non-finite skeleton state in cell {i}"))
                    .at_step(n));
            }
        }
        times.push((n + 1) as f64 * dt);
        snapshots.push(ScalarField::new(grid, values.clone())?);
    }
    Trajectory::new(times, snapshots)
}
