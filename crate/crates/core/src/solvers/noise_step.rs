use crate::error::{Error, Result};
use crate::model::{NoiseModel, ScalarField, TorusGrid};

/// Euler–Maruyama update `uᵢ ← uᵢ + amp Σₖ gₖ(xᵢ, uᵢ) Δβₖ`, with `g`
/// evaluated at the pre-update state.
pub fn stochastic_substep(
    field: &ScalarField,
    noise: &NoiseModel,
    amp: f64,
    increments: &[f64],
) -> Result<ScalarField> {
    if increments.len() != noise.len() {
        return Err(Error::Precondition(format!(
            "expected {} noise increments, got {}",
            noise.len(),
            increments.len()
        )));
    }
    let table = ProfileTable::new(noise, field.grid());
    let mut values = field.values().to_vec();
    table.apply(&mut values, noise, amp, increments)?;
    ScalarField::new(field.grid(), values)
}

/// `φₖ(xᵢ)` for every mode and cell centre, evaluated once per run.
#[derive(Debug, Clone)]
pub(crate) struct ProfileTable {
    cells: usize,
    phi: Vec<f64>,
}

impl ProfileTable {
    pub fn new(noise: &NoiseModel, grid: TorusGrid) -> Self {
        let cells = grid.cells();
        let phi = noise
            .modes()
            .iter()
            .flat_map(|m| (0..cells).map(move |i| m.profile.eval(grid.center(i))))
            .collect();
        Self { cells, phi }
    }

    #[inline]
    pub fn phi(&self, k: usize, i: usize) -> f64 {
        self.phi[k * self.cells + i]
    }

    pub fn apply(
        &self,
        values: &mut [f64],
        noise: &NoiseModel,
        amp: f64,
        increments: &[f64],
    ) -> Result<()> {
        if amp == 0.0 || noise.is_empty() {
            return Ok(());
        }
        for (i, u) in values.iter_mut().enumerate() {
            let mut du = 0.0;
            for (k, (mode, db)) in noise.modes().iter().zip(increments).enumerate() {
                du += mode.eval_with_profile(self.phi(k, i), *u) * db;
            }
            *u += amp * du;
            if !u.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite state in cell {i} after noise substep"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseMode;

    #[test]
    fn zero_amplitude_is_identity() {
        let grid = TorusGrid::new(8).unwrap();
        let u = ScalarField::new(grid, (0..8).map(|i| i as f64).collect()).unwrap();
        let noise = NoiseModel::new(vec![NoiseMode::additive(1.0)], 10.0).unwrap();
        assert_eq!(stochastic_substep(&u, &noise, 0.0, &[0.7]).unwrap(), u);
    }

    #[test]
    fn additive_shift() {
        let grid = TorusGrid::new(8).unwrap();
        let u = ScalarField::constant(grid, 1.0).unwrap();
        let noise = NoiseModel::new(vec![NoiseMode::additive(1.0)], 10.0).unwrap();
        let out = stochastic_substep(&u, &noise, 1.0, &[0.3]).unwrap();
        assert!(out.values().iter().all(|&v| v == 1.3));
    }

    #[test]
    fn wrong_increment_count_rejected() {
        let grid = TorusGrid::new(8).unwrap();
        let u = ScalarField::constant(grid, 1.0).unwrap();
        let noise = NoiseModel::new(vec![NoiseMode::additive(1.0)], 10.0).unwrap();
        assert!(matches!(
            stochastic_substep(&u, &noise, 1.0, &[0.3, 0.1]),
            Err(Error::Precondition(_))
        ));
    }
}
