use super::grid::TorusGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitting {
    /// Flux substep, then noise substep.
    Lie,
    /// Half flux, noise, half flux.
    Strang,
}

pub const DEFAULT_CFL: f64 = 0.45;

/// Run parameters shared by the SPDE solvers.
///
/// The step `dt` is fixed for the whole run so that coupled paths share
/// one noise path and one time grid. Flux substeps are subcycled so that
/// each one satisfies `scale · sup|a| · h / dx ≤ cfl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub epsilon: f64,
    pub grid: TorusGrid,
    pub dt: f64,
    pub horizon: f64,
    pub cfl: f64,
    pub splitting: Splitting,
    pub seed: u64,
    pub save_stride: usize,
}

impl SimConfig {
    pub fn new(epsilon: f64, grid: TorusGrid, dt: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            grid,
            dt,
            horizon: 1.0,
            cfl: DEFAULT_CFL,
            splitting: Splitting::Lie,
            seed: 0,
            save_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_splitting(mut self, splitting: Splitting) -> Self {
        self.splitting = splitting;
        self
    }

    pub fn with_save_stride(mut self, stride: usize) -> Result<Self> {
        self.save_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::Config(format!("dt must lie in (0, horizon], got {}", self.dt)));
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::Config(format!(
                "dt = {} does not divide the horizon {}",
                self.dt, self.horizon
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl fraction must lie in (0, 1), got {}", self.cfl)));
        }
        if self.save_stride == 0 {
            return Err(Error::Config("save_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}
