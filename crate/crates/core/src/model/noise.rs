use std::f64::consts::TAU;

use super::certificate::{symmetric_lattice, InequalityCheck, RatioTracker};
use super::grid::torus_distance;
use crate::error::{Error, Result};

/// Spatial profile `φ(x)` of one noise mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant,
    Cos(u32),
    Sin(u32),
}

impl Profile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Profile::Constant => 1.0,
            Profile::Cos(m) => (TAU * m as f64 * x).cos(),
            Profile::Sin(m) => (TAU * m as f64 * x).sin(),
        }
    }

    /// Lipschitz constant of `φ` with respect to torus distance.
    pub fn slope(self) -> f64 {
        match self {
            Profile::Constant => 0.0,
            Profile::Cos(m) | Profile::Sin(m) => TAU * m as f64,
        }
    }
}

/// One mode `gₖ(x,u) = σ φ(x) (α + β u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMode {
    pub sigma: f64,
    pub profile: Profile,
    pub alpha: f64,
    pub beta: f64,
}

impl NoiseMode {
    pub fn new(sigma: f64, profile: Profile, alpha: f64, beta: f64) -> Self {
        Self {
            sigma,
            profile,
            alpha,
            beta,
        }
    }

    /// `g ≡ σ`.
    pub fn additive(sigma: f64) -> Self {
        Self::new(sigma, Profile::Constant, 1.0, 0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64, u: f64) -> f64 {
        self.sigma * self.profile.eval(x) * (self.alpha + self.beta * u)
    }

    /// Same as [`eval`](Self::eval) with `φ(x)` already known.
    #[inline]
    pub fn eval_with_profile(&self, phi: f64, u: f64) -> f64 {
        self.sigma * phi * (self.alpha + self.beta * u)
    }
}

/// Finite family of noise coefficients with the constants of the
/// coefficient bounds:
///
/// * `|gₖ(x,u)| ≤ C⁰ₖ(1 + |u|)` with `C⁰ₖ = |σ|(|α| + |β|)`,
/// * `|gₖ(x,u) − gₖ(y,v)| ≤ C¹ₖ(|x−y| + |u−v|)` for `|u| ≤ R`, with
///   `C¹ₖ = |σ| max(L_φ (|α| + |β| R), |β|)`,
///
/// where `R` is the state bound the model was built for. The spatial
/// Lipschitz constant grows with `R` whenever the profile varies and the
/// state factor is not constant, so `C¹ₖ` only holds on `[−R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    modes: Vec<NoiseMode>,
    state_bound: f64,
    c0: Vec<f64>,
    c1: Vec<f64>,
}

impl NoiseModel {
    pub fn new(modes: Vec<NoiseMode>, state_bound: f64) -> Result<Self> {
        if !(state_bound.is_finite() && state_bound > 0.0) {
            return Err(Error::Config(format!(
                "noise state bound must be positive, got {state_bound}"
            )));
        }
        for (k, m) in modes.iter().enumerate() {
            if !(m.sigma.is_finite() && m.alpha.is_finite() && m.beta.is_finite()) {
                return Err(Error::Config(format!("noise mode {k} has non-finite parameters")));
            }
            if matches!(m.profile, Profile::Cos(0) | Profile::Sin(0)) {
                return Err(Error::Config(format!(
                    "noise mode {k}: trigonometric profiles need wavenumber >= 1"
                )));
            }
        }
        let sigma_sq: f64 = modes.iter().map(|m| m.sigma * m.sigma).sum();
        if !sigma_sq.is_finite() {
            return Err(Error::Config("sum of squared noise amplitudes overflows".into()));
        }
        let c0 = modes
            .iter()
            .map(|m| m.sigma.abs() * (m.alpha.abs() + m.beta.abs()))
            .collect();
        let c1 = modes
            .iter()
            .map(|m| {
                let state_factor = m.alpha.abs() + m.beta.abs() * state_bound;
                m.sigma.abs() * (m.profile.slope() * state_factor).max(m.beta.abs())
            })
            .collect();
        Ok(Self {
            modes,
            state_bound,
            c0,
            c1,
        })
    }

    /// The model with no modes: every `gₖ ≡ 0`.
    pub fn silent() -> Self {
        Self::new(Vec::new(), 1.0).expect("valid")
    }

    pub fn modes(&self) -> &[NoiseMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn state_bound(&self) -> f64 {
        self.state_bound
    }

    pub fn g(&self, k: usize, x: f64, u: f64) -> f64 {
        self.modes[k].eval(x, u)
    }

    /// `G²(x,u) = Σₖ gₖ(x,u)²`.
    pub fn g_squared(&self, x: f64, u: f64) -> f64 {
        self.modes.iter().map(|m| m.eval(x, u).powi(2)).sum()
    }

    /// `G₁,₂(x,ξ,y,ζ) = Σₖ gₖ(x,ξ) gₖ(y,ζ)`.
    pub fn cross(&self, x: f64, xi: f64, y: f64, zeta: f64) -> f64 {
        self.modes.iter().map(|m| m.eval(x, xi) * m.eval(y, zeta)).sum()
    }

    pub fn c0(&self) -> &[f64] {
        &self.c0
    }

    pub fn c1(&self) -> &[f64] {
        &self.c1
    }

    /// `D₀ = 2 Σₖ (C⁰ₖ)²`.
    pub fn d0(&self) -> f64 {
        2.0 * self.c0.iter().map(|c| c * c).sum::<f64>()
    }

    /// `D₁ = 2 Σₖ (C¹ₖ)²`.
    pub fn d1(&self) -> f64 {
        2.0 * self.c1.iter().map(|c| c * c).sum::<f64>()
    }

    /// True when every coefficient vanishes identically.
    pub fn is_silent(&self) -> bool {
        self.modes
            .iter()
            .all(|m| m.sigma == 0.0 || (m.alpha == 0.0 && m.beta == 0.0))
    }
}

/// Sampled certificate for the four noise coefficient bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCertificate {
    /// `|gₖ(x,u)| ≤ C⁰ₖ(1+|u|)`, worst over all modes.
    pub growth: InequalityCheck,
    /// `|gₖ(x,u) − gₖ(y,v)| ≤ C¹ₖ(|x−y| + |u−v|)`, worst over all modes.
    pub lipschitz: InequalityCheck,
    /// `G²(x,u) ≤ D₀(1+u²)`.
    pub g_squared: InequalityCheck,
    /// `Σₖ |gₖ(x,u) − gₖ(y,v)|² ≤ D₁(|x−y|² + |u−v|²)`.
    pub g_difference: InequalityCheck,
    pub d0: f64,
    pub d1: f64,
}

impl NoiseCertificate {
    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    pub fn checks(&self) -> [&InequalityCheck; 4] {
        [&self.growth, &self.lipschitz, &self.g_squared, &self.g_difference]
    }
}

/// Spatial sample count for single-point inequalities.
const X_FINE: usize = 64;
/// Spatial and state sample counts for the pairwise inequalities.
const X_PAIR: usize = 16;
const U_PAIR: usize = 64;

pub fn validate_noise(model: &NoiseModel, r_val: f64, lattice_n: usize) -> Result<NoiseCertificate> {
    if !(r_val.is_finite() && r_val > 0.0) {
        return Err(Error::Precondition(format!("validation range must be positive, got {r_val}")));
    }
    if lattice_n < 2 {
        return Err(Error::Precondition("validation lattice needs >= 2 points".into()));
    }
    let us = symmetric_lattice(r_val, lattice_n);
    let xs: Vec<f64> = (0..X_FINE).map(|i| i as f64 / X_FINE as f64).collect();
    let (c0, c1) = (model.c0(), model.c1());
    let (d0, d1) = (model.d0(), model.d1());

    let mut growth = RatioTracker::new("noise growth");
    let mut g_squared = RatioTracker::new("noise G^2 growth");
    for &x in &xs {
        for &u in &us {
            let mut g2 = 0.0;
            for (k, m) in model.modes().iter().enumerate() {
                let g = m.eval(x, u);
                if !g.is_finite() {
                    return Err(Error::numerical(format!("noise mode {k} not finite at ({x}, {u})")));
                }
                growth.record(g.abs(), c0[k] * (1.0 + u.abs()), &[k as f64, x, u]);
                g2 += g * g;
            }
            g_squared.record(g2, d0 * (1.0 + u * u), &[x, u]);
        }
    }

    let stride = ((lattice_n - 1) / (U_PAIR - 1)).max(1);
    let mut coarse_u: Vec<f64> = us.iter().copied().step_by(stride).collect();
    if coarse_u.last() != us.last() {
        coarse_u.push(*us.last().expect("non-empty"));
    }
    let points: Vec<(f64, f64)> = (0..X_PAIR)
        .map(|i| i as f64 / X_PAIR as f64)
        .flat_map(|x| coarse_u.iter().map(move |&u| (x, u)))
        .collect();
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|&(x, u)| model.modes().iter().map(|m| m.eval(x, u)).collect())
        .collect();

    let mut lipschitz = RatioTracker::new("noise lipschitz");
    let mut g_difference = RatioTracker::new("noise difference growth");
    for i in 0..points.len() {
        let (x, u) = points[i];
        for j in (i + 1)..points.len() {
            let (y, v) = points[j];
            let dx = torus_distance(x, y);
            let du = (u - v).abs();
            let mut sum_sq = 0.0;
            for k in 0..model.len() {
                let diff = (values[i][k] - values[j][k]).abs();
                lipschitz.record(diff, c1[k] * (dx + du), &[k as f64, x, u, y, v]);
                sum_sq += diff * diff;
            }
            g_difference.record(sum_sq, d1 * (dx * dx + du * du), &[x, u, y, v]);
        }
    }

    Ok(NoiseCertificate {
        growth: growth.finish(),
        lipschitz: lipschitz.finish(),
        g_squared: g_squared.finish(),
        g_difference: g_difference.finish(),
        d0,
        d1,
    })
}
