use std::f64::consts::TAU;

use super::grid::{ScalarField, TorusGrid};
use crate::error::{Error, Result};

/// Initial data families, evaluated as exact cell averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    Constant(f64),
    /// `u_left` on `[0, x0)`, `u_right` on `[x0, 1)`: jumps at `x0` and at the wrap.
    Riemann { u_left: f64, u_right: f64, x0: f64 },
    /// `mean + amp·sin(2π·mode·x)`.
    Sine { mean: f64, amp: f64, mode: u32 },
}

pub fn make_initial(kind: InitialKind, grid: TorusGrid) -> Result<ScalarField> {
    let m = grid.cells();
    let dx = grid.dx();
    let values = match kind {
        InitialKind::Constant(c) => {
            finite(&[c])?;
            vec![c; m]
        }
        InitialKind::Riemann { u_left, u_right, x0 } => {
            finite(&[u_left, u_right, x0])?;
            if !(0.0..=1.0).contains(&x0) {
                return Err(Error::Config(format!("riemann jump x0 must lie in [0, 1], got {x0}")));
            }
            (0..m)
                .map(|i| {
                    let (a, b) = (grid.left_edge(i), grid.left_edge(i + 1));
                    let left_len = (x0.min(b) - a).max(0.0);
                    let frac = left_len / dx;
                    if frac >= 1.0 {
                        u_left
                    } else if frac <= 0.0 {
                        u_right
                    } else {
                        frac * u_left + (1.0 - frac) * u_right
                    }
                })
                .collect()
        }
        InitialKind::Sine { mean, amp, mode } => {
            finite(&[mean, amp])?;
            if mode == 0 {
                return Err(Error::Config("sine initial data needs mode >= 1".into()));
            }
            let k = TAU * mode as f64;
            (0..m)
                .map(|i| {
                    let (a, b) = (grid.left_edge(i), grid.left_edge(i + 1));
                    mean + amp * ((k * a).cos() - (k * b).cos()) / (k * dx)
                })
                .collect()
        }
    };
    ScalarField::new(grid, values)
}

fn finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Config("initial data parameters must be finite".into()))
    }
}
