use std::fmt::Write as _;

use rayon::prelude::*;

use super::control::{action, Control};
use crate::error::{Error, Result};
use crate::harness::{fmt_f64, l1l1_distance};
use crate::model::{NoiseModel, ScalarField, Trajectory};
use crate::solvers::solve_skeleton;

/// Largest control dimension `K · B` accepted by [`rate_estimate`].
pub const MAX_CONTROL_DIM: usize = 512;
pub const DEFAULT_LAMBDA_LADDER: [f64; 4] = [10.0, 1e2, 1e3, 1e4];
pub const DEFAULT_BINS: usize = 16;

fn uniform_steps(target: &Trajectory) -> Result<usize> {
    let steps = target.len() - 1;
    if steps == 0 {
        return Err(Error::Precondition("target trajectory needs at least two times".into()));
    }
    for (n, &t) in target.times().iter().enumerate() {
        if (t - n as f64 / steps as f64).abs() > 1e-12 {
            return Err(Error::Precondition(
                "target trajectory must be saved on a uniform grid of [0, 1]".into(),
            ));
        }
    }
    Ok(steps)
}

/// `‖uʰ − ρ‖_{L¹L¹}` where `uʰ` is the skeleton path from `eta` on the time
/// grid of `target`.
pub fn skeleton_residual(
    h: &Control,
    eta: &ScalarField,
    target: &Trajectory,
    noise: &NoiseModel,
) -> Result<f64> {
    if eta.grid() != target.grid() {
        return Err(Error::Precondition("eta and target live on different grids".into()));
    }
    let steps = uniform_steps(target)?;
    let path = solve_skeleton(eta, h, noise, steps)?;
    l1l1_distance(&path, target)
}

/// Descent settings for [`rate_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptConfig {
    pub max_iters: usize,
    /// Stop a stage once the largest gradient entry falls below this.
    pub grad_tol: f64,
    /// Stop a stage once an accepted step lowers `Φ` by less than this, relatively.
    pub f_tol: f64,
    pub fd_step: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub tol_feas: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_iters: 400,
            grad_tol: 1e-9,
            f_tol: 1e-13,
            fd_step: 1e-4,
            armijo: 1e-4,
            max_backtracks: 60,
            tol_feas: 1e-3,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::Config("max_iters and max_backtracks must be >= 1".into()));
        }
        if !(pos(self.fd_step) && pos(self.tol_feas) && self.grad_tol >= 0.0 && self.f_tol >= 0.0)
        {
            return Err(Error::Config("optimizer tolerances must be positive".into()));
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return Err(Error::Config(format!(
                "armijo constant must lie in (0, 1/2), got {}",
                self.armijo
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateValue {
    Finite(f64),
    /// No feasible control was found.
    Infinite,
}

impl RateValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            RateValue::Finite(x) => Some(x),
            RateValue::Infinite => None,
        }
    }
}

impl std::fmt::Display for RateValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateValue::Finite(x) => write!(f, "{}", fmt_f64(*x)),
            RateValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Accepted objective values of one penalty stage, starting at the warm start.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub lambda: f64,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub i_hat: RateValue,
    pub h_opt: Control,
    /// Final residual when feasible, otherwise the smallest residual reached.
    pub residual: f64,
    /// `R(h_opt)`, reported also when infeasible.
    pub action: f64,
    pub feasible: bool,
    pub stages: Vec<StageTrace>,
}

impl RateResult {
    pub fn control_csv(&self) -> String {
        let mut out = String::from("bin,mode,value\n");
        for b in 0..self.h_opt.bins() {
            for k in 0..self.h_opt.modes() {
                let _ = writeln!(out, "{b},{k},{}", fmt_f64(self.h_opt.get(k, b)));
            }
        }
        out
    }

    pub fn report(&self) -> String {
        format!(
            "I_hat: {}\nresidual: {}\naction: {}\nfeasible: {}\n\n{}",
            self.i_hat,
            fmt_f64(self.residual),
            fmt_f64(self.action),
            self.feasible,
            self.control_csv()
        )
    }
}

struct Penalty<'a> {
    eta: &'a ScalarField,
    target: &'a Trajectory,
    noise: &'a NoiseModel,
    modes: usize,
    bins: usize,
    lambda: f64,
}

impl Penalty<'_> {
    fn control(&self, x: &[f64]) -> Result<Control> {
        Control::new(self.modes, self.bins, x.to_vec())
    }

    // (Φ, residual)
    fn eval(&self, x: &[f64]) -> Result<(f64, f64)> {
        let h = self.control(x)?;
        let r = skeleton_residual(&h, self.eta, self.target, self.noise)?;
        let phi = action(&h) + self.lambda * r * r;
        if !phi.is_finite() {
            return Err(Error::numerical(format!(
                "penalty objective is not finite (lambda = {})",
                self.lambda
            )));
        }
        Ok((phi, r))
    }

    fn phi(&self, x: &[f64]) -> Result<f64> {
        self.eval(x).map(|(p, _)| p)
    }

    fn gradient(&self, x: &[f64], step: f64) -> Result<Vec<f64>> {
        (0..x.len())
            .into_par_iter()
            .map(|j| {
                let mut xp = x.to_vec();
                xp[j] += step;
                let fp = self.phi(&xp)?;
                xp[j] = x[j] - step;
                let fm = self.phi(&xp)?;
                Ok((fp - fm) / (2.0 * step))
            })
            .collect()
    }
}

/// Central-difference gradient of `Φ_λ(h) = R(h) + λ·residual(h)²`.
pub fn penalty_gradient(
    h: &Control,
    lambda: f64,
    eta: &ScalarField,
    target: &Trajectory,
    noise: &NoiseModel,
    step: f64,
) -> Result<Vec<f64>> {
    penalty_for(h, lambda, eta, target, noise).gradient(h.values(), step)
}

/// `Φ_λ(h)`.
pub fn penalty_objective(
    h: &Control,
    lambda: f64,
    eta: &ScalarField,
    target: &Trajectory,
    noise: &NoiseModel,
) -> Result<f64> {
    penalty_for(h, lambda, eta, target, noise).phi(h.values())
}

fn penalty_for<'a>(
    h: &Control,
    lambda: f64,
    eta: &'a ScalarField,
    target: &'a Trajectory,
    noise: &'a NoiseModel,
) -> Penalty<'a> {
    Penalty {
        eta,
        target,
        noise,
        modes: h.modes(),
        bins: h.bins(),
        lambda,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Inverse-Hessian BFGS directions with Armijo backtracking. Falls back to
// steepest descent whenever the quasi-Newton direction fails to descend.
fn minimize_stage(
    pen: &Penalty<'_>,
    x: &mut Vec<f64>,
    opt: &OptConfig,
    best_residual: &mut f64,
) -> Result<StageTrace> {
    let n = x.len();
    let identity = |h: &mut Vec<f64>| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
    };
    let mut hinv = vec![0.0; n * n];
    identity(&mut hinv);
    let mut is_identity = true;

    let (mut f, r0) = pen.eval(x)?;
    *best_residual = best_residual.min(r0);
    let mut g = pen.gradient(x, opt.fd_step)?;
    let mut trace = StageTrace {
        lambda: pen.lambda,
        phi: vec![f],
    };

    for _ in 0..opt.max_iters {
        if g.iter().all(|v| v.abs() <= opt.grad_tol) {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            identity(&mut hinv);
            is_identity = true;
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut accepted = None;
        loop {
            let mut t = 1.0;
            for _ in 0..opt.max_backtracks {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                let (ft, rt) = pen.eval(&trial)?;
                if ft <= f + opt.armijo * t * slope && ft < f {
                    accepted = Some((trial, ft, rt));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() || is_identity {
                break;
            }
            identity(&mut hinv);
            is_identity = true;
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let Some((x_new, f_new, r_new)) = accepted else {
            break;
        };
        debug_assert!(f_new < f);
        *best_residual = best_residual.min(r_new);
        let g_new = pen.gradient(&x_new, opt.fd_step)?;
        let s: Vec<f64> = x_new.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            // H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j]
                        - hy[i] * s[j]
                        - s[i] * hy[j]);
                }
            }
            is_identity = false;
        }
        let decrease = f - f_new;
        *x = x_new;
        f = f_new;
        g = g_new;
        trace.phi.push(f);
        if decrease <= opt.f_tol * f.abs().max(1.0) {
            break;
        }
    }
    Ok(trace)
}

/// Penalty-method estimate of `inf { R(h) : skeleton from eta under h equals target }`
/// over piecewise-constant controls with `bins` bins.
pub fn rate_estimate(
    target: &Trajectory,
    eta: &ScalarField,
    noise: &NoiseModel,
    bins: usize,
    lambda_ladder: &[f64],
    opt: &OptConfig,
) -> Result<RateResult> {
    if bins == 0 {
        return Err(Error::Config("rate.bins must be >= 1".into()));
    }
    rate_estimate_from(target, eta, noise, Control::zeros(noise.len(), bins), lambda_ladder, opt)
}

/// As [`rate_estimate`], starting the first stage from `start`.
pub fn rate_estimate_from(
    target: &Trajectory,
    eta: &ScalarField,
    noise: &NoiseModel,
    start: Control,
    lambda_ladder: &[f64],
    opt: &OptConfig,
) -> Result<RateResult> {
    opt.validate()?;
    let (modes, bins) = (start.modes(), start.bins());
    if modes != noise.len() {
        return Err(Error::Config(format!(
            "control has {modes} modes, noise model has {}",
            noise.len()
        )));
    }
    if modes * bins > MAX_CONTROL_DIM {
        return Err(Error::Config(format!(
            "control dimension {} exceeds the cap {MAX_CONTROL_DIM}",
            modes * bins
        )));
    }
    if lambda_ladder.is_empty()
        || lambda_ladder.iter().any(|l| !(l.is_finite() && *l > 0.0))
        || lambda_ladder.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Config(
            "lambda ladder must be non-empty, positive and strictly increasing".into(),
        ));
    }
    let steps = uniform_steps(target)?;
    if steps < bins {
        return Err(Error::Config(format!(
            "target has {steps} steps, fewer than the {bins} control bins"
        )));
    }

    let mut x = start.values().to_vec();
    let mut best_residual = f64::INFINITY;
    let mut stages = Vec::with_capacity(lambda_ladder.len());
    for &lambda in lambda_ladder {
        let pen = Penalty {
            eta,
            target,
            noise,
            modes,
            bins,
            lambda,
        };
        stages.push(minimize_stage(&pen, &mut x, opt, &mut best_residual)?);
    }
    let h_opt = Control::new(modes, bins, x)?;
    let residual = skeleton_residual(&h_opt, eta, target, noise)?;
    let r_val = action(&h_opt);
    let feasible = residual <= opt.tol_feas;
    Ok(RateResult {
        i_hat: if feasible {
            RateValue::Finite(r_val)
        } else {
            RateValue::Infinite
        },
        residual: if feasible {
            residual
        } else {
            best_residual.min(residual)
        },
        action: r_val,
        feasible,
        h_opt,
        stages,
    })
}
