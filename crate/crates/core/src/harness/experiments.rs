use std::fmt::Write as _;

use rayon::prelude::*;

use super::ks::ks_two_sample;
use super::stats::{compensated_sum, wilson_interval, Z95};
use crate::error::{Error, Result};
use crate::kinetic::{
    bound_check_i, bound_check_j, martingale_sample, BoundReport, GammaEnvelope, MartingaleSample,
    MollifierPair,
};
use crate::model::{
    make_initial, FluxModel, InitialKind, NoiseMode, NoiseModel, Profile, ScalarField, TorusGrid,
    DEFAULT_VALIDATION_RANGE, SimConfig, Trajectory, STREAM_COUPLED,
    STREAM_SCALING_BASE, STREAM_SCALING_SCALED,
};
use crate::solvers::{
    coupled_pair, coupled_pair_with_path, lp_moment, noise_path, solve_base_small_time_on_stream,
    solve_scaled_endpoint_on_stream,
};

/// Initial datum and coefficient models of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub eta: ScalarField,
    pub flux: FluxModel,
    pub noise: NoiseModel,
}

impl Models {
    /// Burgers flux, a multiplicative constant-profile mode plus an additive
    /// cosine mode, and `η = 2 + 0.05 sin(2πx)`.
    pub fn reference(grid: TorusGrid) -> Result<Self> {
        Ok(Self {
            eta: make_initial(
                InitialKind::Sine {
                    mean: 2.0,
                    amp: 0.05,
                    mode: 1,
                },
                grid,
            )?,
            flux: FluxModel::burgers(),
            noise: NoiseModel::new(
                vec![
                    NoiseMode::new(0.2, Profile::Constant, 0.0, 1.0),
                    NoiseMode::new(1.0, Profile::Cos(1), 1.0, 0.0),
                ],
                DEFAULT_VALIDATION_RANGE,
            )?,
        })
    }
}

/// `∫₀¹ ‖a(t) − b(t)‖_{L¹} dt` by the trapezoid rule over the saved times.
pub fn l1l1_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::Precondition(format!(
            "trajectories live on different grids ({} vs {} cells)",
            a.grid().cells(),
            b.grid().cells()
        )));
    }
    if a.times() != b.times() {
        return Err(Error::Precondition("trajectories have different time grids".into()));
    }
    let d: Vec<f64> = a
        .snapshots()
        .iter()
        .zip(b.snapshots())
        .map(|(x, y)| x.l1_distance(y))
        .collect::<Result<_>>()?;
    let t = a.times();
    let parts: Vec<f64> = (0..t.len() - 1)
        .map(|n| 0.5 * (t[n + 1] - t[n]) * (d[n] + d[n + 1]))
        .collect();
    Ok(compensated_sum(&parts))
}

/// Tail probability estimate with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub n: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(hits, n, Z95);
        Self {
            n,
            hits,
            p_hat: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
            ci_lo,
            ci_hi,
        }
    }
}

fn cfg_at(cfg: &SimConfig, epsilon: f64, seed: u64) -> Result<SimConfig> {
    Ok(cfg.with_epsilon(epsilon)?.with_seed(seed))
}

/// `‖uᵉ − vᵉ‖_{L¹L¹}` for coupled paths `0..n`, in path order.
pub fn tail_distances(
    epsilon: f64,
    n: u64,
    cfg: &SimConfig,
    models: &Models,
    base_seed: u64,
) -> Result<Vec<f64>> {
    let cfg = cfg_at(cfg, epsilon, base_seed)?;
    (0..n)
        .into_par_iter()
        .map(|p| {
            let (u, v) = coupled_pair(&models.eta, &cfg, &models.flux, &models.noise, p)?;
            l1l1_distance(&u, &v).map_err(|e| e.on_path(p))
        })
        .collect()
}

/// `P(‖uᵉ − vᵉ‖_{L¹L¹} > ι)` from `n` coupled paths.
pub fn estimate_tail(
    epsilon: f64,
    iota: f64,
    n: u64,
    cfg: &SimConfig,
    models: &Models,
    base_seed: u64,
) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::Precondition("need at least one path".into()));
    }
    if !(iota > 0.0) {
        return Err(Error::Precondition(format!("iota must be positive, got {iota}")));
    }
    let d = tail_distances(epsilon, n, cfg, models, base_seed)?;
    Ok(MCEstimate::from_counts(d.iter().filter(|&&x| x > iota).count() as u64, n))
}

/// One row of the exponential-equivalence scan. `eps_log_p` is `−∞` when no
/// path exceeded the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub epsilon: f64,
    pub iota: f64,
    pub estimate: MCEstimate,
    pub eps_log_p: f64,
}

/// Closing schedule `γ = δ = √ε`, `p = 1/ε` for a ladder value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleRow {
    pub epsilon: f64,
    pub gamma: f64,
    pub delta: f64,
    pub p: f64,
}

impl ScheduleRow {
    pub fn for_epsilon(epsilon: f64) -> Self {
        let r = epsilon.sqrt();
        Self {
            epsilon,
            gamma: r,
            delta: r,
            p: 1.0 / epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub schedule: Vec<ScheduleRow>,
}

pub const SCAN_CSV_HEADER: &str = "epsilon,iota,n,hits,p_hat,ci_lo,ci_hi,eps_log_p";

/// Full round-trip decimal, with `-inf` / `inf` / `nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCAN_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let e = &r.estimate;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(r.epsilon),
                fmt_f64(r.iota),
                e.n,
                e.hits,
                fmt_f64(e.p_hat),
                fmt_f64(e.ci_lo),
                fmt_f64(e.ci_hi),
                fmt_f64(r.eps_log_p)
            );
        }
        out
    }

    pub fn schedule_csv(&self) -> String {
        let mut out = String::from("epsilon,gamma,delta,p\n");
        for s in &self.schedule {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(s.epsilon),
                fmt_f64(s.gamma),
                fmt_f64(s.delta),
                fmt_f64(s.p)
            );
        }
        out
    }

    /// True when `ε log p̂` strictly decreases down the rows and every row
    /// has at least one hit.
    pub fn strictly_decreasing_with_hits(&self) -> bool {
        self.rows.iter().all(|r| r.estimate.hits > 0)
            && self.rows.windows(2).all(|w| w[1].eps_log_p < w[0].eps_log_p)
    }
}

/// `ε log P(‖uᵉ − vᵉ‖ > ι)` over a descending ladder of `ε`.
pub fn exp_equiv_scan(
    ladder: &[f64],
    iota: f64,
    n: u64,
    cfg: &SimConfig,
    models: &Models,
) -> Result<ScanTable> {
    if ladder.is_empty() {
        return Err(Error::Precondition("empty epsilon ladder".into()));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("epsilon ladder must be strictly descending".into()));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let estimate = estimate_tail(eps, iota, n, cfg, models, cfg.seed)?;
        let eps_log_p = if estimate.hits == 0 {
            f64::NEG_INFINITY
        } else {
            eps * estimate.p_hat.ln()
        };
        rows.push(ScanRow {
            epsilon: eps,
            iota,
            estimate,
            eps_log_p,
        });
    }
    let schedule = ladder.iter().map(|&e| ScheduleRow::for_epsilon(e)).collect();
    Ok(ScanTable { rows, schedule })
}

/// Scalar summaries compared by the scaling check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    Mass,
    L2Norm,
    MaxVal,
}

impl Functional {
    pub fn name(self) -> &'static str {
        match self {
            Functional::Mass => "mass",
            Functional::L2Norm => "l2norm",
            Functional::MaxVal => "maxval",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mass" => Some(Functional::Mass),
            "l2norm" => Some(Functional::L2Norm),
            "maxval" => Some(Functional::MaxVal),
            _ => None,
        }
    }

    pub fn eval(self, u: &ScalarField) -> f64 {
        match self {
            Functional::Mass => u.mean(),
            Functional::L2Norm => u.lp_norm_pow(2.0).sqrt(),
            Functional::MaxVal => u.max(),
        }
    }
}

/// Outcome of comparing one functional between the two samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingOutcome {
    /// Two-sample Kolmogorov–Smirnov test.
    Ks { statistic: f64, p_value: f64 },
    /// Both samples are constant: compare their common values directly.
    Exact { difference: f64 },
}

/// Tolerance of the exact-equality branch.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingResult {
    pub functional: Functional,
    pub outcome: ScalingOutcome,
}

impl ScalingResult {
    /// KS p-value above `alpha`, or the exact difference within tolerance.
    pub fn pass(&self, alpha: f64) -> bool {
        match self.outcome {
            ScalingOutcome::Ks { p_value, .. } => p_value > alpha,
            ScalingOutcome::Exact { difference } => difference <= EXACT_TOLERANCE,
        }
    }
}

/// Minimum sample size per side for [`scaling_check`].
pub const MIN_SCALING_SAMPLE: u64 = 200;

/// Compares the law of the unscaled solution at time `ε` with the law of the
/// scaled solution at time 1, using disjoint noise streams for the two
/// samples.
pub fn scaling_check(
    epsilon: f64,
    functionals: &[Functional],
    n: u64,
    cfg: &SimConfig,
    models: &Models,
) -> Result<Vec<ScalingResult>> {
    if n < MIN_SCALING_SAMPLE {
        return Err(Error::Precondition(format!(
            "scaling check needs at least {MIN_SCALING_SAMPLE} paths per sample, got {n}"
        )));
    }
    let cfg = cfg.with_epsilon(epsilon)?;
    let m = models;
    let base: Vec<ScalarField> = (0..n)
        .into_par_iter()
        .map(|p| {
            solve_base_small_time_on_stream(&m.eta, &cfg, &m.flux, &m.noise, STREAM_SCALING_BASE, p)
        })
        .collect::<Result<_>>()?;
    let scaled: Vec<ScalarField> = (0..n)
        .into_par_iter()
        .map(|p| {
            solve_scaled_endpoint_on_stream(&m.eta, &cfg, &m.flux, &m.noise, STREAM_SCALING_SCALED, p)
        })
        .collect::<Result<_>>()?;
    Ok(functionals
        .iter()
        .map(|&f| {
            let a: Vec<f64> = base.iter().map(|u| f.eval(u)).collect();
            let b: Vec<f64> = scaled.iter().map(|u| f.eval(u)).collect();
            let constant = |x: &[f64]| x.iter().all(|&v| v == x[0]);
            let outcome = if constant(&a) && constant(&b) {
                ScalingOutcome::Exact {
                    difference: (a[0] - b[0]).abs(),
                }
            } else {
                let (statistic, p_value) = ks_two_sample(&a, &b);
                ScalingOutcome::Ks { statistic, p_value }
            };
            ScalingResult {
                functional: f,
                outcome,
            }
        })
        .collect())
}

/// Moment estimates `E max_t ‖·‖ₚᵖ` for one `ε`, in the order of `p_list`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub epsilon: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub p_list: Vec<f64>,
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    /// `(max, max/min)` over the ladder of the `u` and `v` columns for `p_list[j]`.
    pub fn spread(&self, j: usize) -> ((f64, f64), (f64, f64)) {
        let col = |pick: &dyn Fn(&MomentRow) -> f64| {
            let xs: Vec<f64> = self.rows.iter().map(pick).collect();
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            (max, max / min)
        };
        (col(&|r| r.u[j]), col(&|r| r.v[j]))
    }

    pub fn all_finite(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.u.iter().chain(&r.v).all(|x| x.is_finite()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon");
        for p in &self.p_list {
            let _ = write!(out, ",u_p{},v_p{}", fmt_f64(*p), fmt_f64(*p));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&fmt_f64(r.epsilon));
            for j in 0..self.p_list.len() {
                let _ = write!(out, ",{},{}", fmt_f64(r.u[j]), fmt_f64(r.v[j]));
            }
            out.push('\n');
        }
        out
    }
}

/// Uniform-in-`ε` moment scan over coupled paths `0..n`.
pub fn moment_scan(
    ladder: &[f64],
    p_list: &[f64],
    n: u64,
    cfg: &SimConfig,
    models: &Models,
) -> Result<MomentTable> {
    if p_list.is_empty() || p_list.iter().any(|&p| !(1.0..=8.0).contains(&p)) {
        return Err(Error::Precondition("moment orders must lie in [1, 8]".into()));
    }
    if n == 0 || ladder.is_empty() {
        return Err(Error::Precondition("need at least one path and one epsilon".into()));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let c = cfg.with_epsilon(eps)?;
        let per_path: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|p| {
                let (u, v) = coupled_pair(&models.eta, &c, &models.flux, &models.noise, p)?;
                Ok((
                    p_list.iter().map(|&q| lp_moment(&u, q)).collect(),
                    p_list.iter().map(|&q| lp_moment(&v, q)).collect(),
                ))
            })
            .collect::<Result<_>>()?;
        let mean = |j: usize, side: usize| {
            let xs: Vec<f64> = per_path
                .iter()
                .map(|(a, b)| if side == 0 { a[j] } else { b[j] })
                .collect();
            compensated_sum(&xs) / n as f64
        };
        rows.push(MomentRow {
            epsilon: eps,
            u: (0..p_list.len()).map(|j| mean(j, 0)).collect(),
            v: (0..p_list.len()).map(|j| mean(j, 1)).collect(),
        });
    }
    Ok(MomentTable {
        p_list: p_list.to_vec(),
        rows,
    })
}

/// Per-path bound reports and martingale samples from one batch of coupled
/// paths saved at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRun {
    pub reports: Vec<BoundReport>,
    pub martingale: Vec<MartingaleSample>,
}

impl CertificateRun {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| !r.pass).count()
    }
}

/// Runs `J̃₁`, `J̃₂` and `Ĩ` certificates and the `K̃` sample on coupled
/// paths `0..n`.
pub fn certificate_run(
    n: u64,
    cfg: &SimConfig,
    models: &Models,
    moll: &MollifierPair,
    envelope: &GammaEnvelope,
) -> Result<CertificateRun> {
    let cfg = cfg.with_save_stride(1)?;
    let per_path: Vec<(Vec<BoundReport>, MartingaleSample)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let tag = |e: Error| e.on_path(p);
            let path = noise_path(&cfg, &models.noise, STREAM_COUPLED, p);
            let (u, v) = coupled_pair_with_path(&models.eta, &cfg, &models.flux, &models.noise, &path)
                .map_err(tag)?;
            let (j1, j2) = bound_check_j(&u, &v, moll, cfg.epsilon, &models.noise).map_err(tag)?;
            let i = bound_check_i(&u, &v, moll, cfg.epsilon, &models.flux, envelope).map_err(tag)?;
            let k = martingale_sample(&u, &v, &path, moll, cfg.epsilon, &models.noise).map_err(tag)?;
            Ok((vec![j1.with_path(p), j2.with_path(p), i.with_path(p)], k))
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::with_capacity(3 * per_path.len());
    let mut martingale = Vec::with_capacity(per_path.len());
    for (r, k) in per_path {
        reports.extend(r);
        martingale.push(k);
    }
    Ok(CertificateRun {
        reports,
        martingale,
    })
}
