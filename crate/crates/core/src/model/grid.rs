use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Uniform cell partition of the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    cells: usize,
}

impl TorusGrid {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 cells, got {cells}"
            )));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Cell centre `(i + 1/2)/M`.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.cells as f64
    }

    /// Left edge `i/M` of cell `i`.
    pub fn left_edge(&self, i: usize) -> f64 {
        i as f64 / self.cells as f64
    }

    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.cells as isize) as usize
    }
}

/// Distance on the unit circle.
pub fn torus_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Cell averages of a scalar state on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Precondition(format!(
                "field has {} values for a {}-cell grid",
                values.len(),
                grid.cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numerical(format!(
                "non-finite value {} in cell {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.cells()])
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖u‖ₚᵖ = Σ|uᵢ|ᵖ dx`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.grid.dx()
    }

    pub fn l1_distance(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Precondition("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx())
    }
}

/// Time history of a field on a shared grid, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TorusGrid,
    times: Vec<f64>,
    snapshots: Vec<ScalarField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, snapshots: Vec<ScalarField>) -> Result<Self> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(Error::Precondition(format!(
                "trajectory has {} times and {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::Precondition(format!(
                "trajectory must start at t = 0, starts at {}",
                times[0]
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        let grid = snapshots[0].grid();
        if snapshots.iter().any(|s| s.grid() != grid) {
            return Err(Error::Precondition(
                "trajectory snapshots must share one grid".into(),
            ));
        }
        Ok(Self {
            grid,
            times,
            snapshots,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[ScalarField] {
        &self.snapshots
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn initial(&self) -> &ScalarField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ScalarField {
        self.snapshots.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Keeps every `stride`-th snapshot plus the final one.
    pub fn decimate(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let n = self.len();
        let keep: Vec<usize> = (0..n)
            .filter(|i| i % stride == 0 || *i == n - 1)
            .collect();
        Trajectory {
            grid: self.grid,
            times: keep.iter().map(|&i| self.times[i]).collect(),
            snapshots: keep.iter().map(|&i| self.snapshots[i].clone()).collect(),
        }
    }

    /// CSV with header `t,cell_0,...,cell_{M-1}`, one row per snapshot.
    /// Floats use Rust's shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let m = self.grid.cells();
        let mut out = String::with_capacity(self.len() * m * 20);
        out.push('t');
        for i in 0..m {
            let _ = write!(out, ",cell_{i}");
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.snapshots) {
            let _ = write!(out, "{t}");
            for v in s.values() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
