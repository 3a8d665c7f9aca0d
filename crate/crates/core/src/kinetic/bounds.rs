use std::fmt::Write as _;

use super::mollifier::{MollifierPair, SpatialKernel};
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::model::{symmetric_lattice, FluxModel, InequalityCheck, NoiseModel, Trajectory};
use crate::solvers::lp_moment;

/// Relative slack in `lhs ≤ rhs (1 + BOUND_SLACK)`.
pub const BOUND_SLACK: f64 = 1e-9;

/// One checked inequality `lhs ≤ rhs` with its run context.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub path: Option<u64>,
    pub epsilon: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(name: &str, epsilon: f64, moll: &MollifierPair, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            path: None,
            epsilon,
            gamma: moll.gamma(),
            delta: moll.delta(),
            lhs,
            rhs,
            pass: lhs <= rhs * (1.0 + BOUND_SLACK),
        }
    }

    pub fn with_path(mut self, path: u64) -> Self {
        self.path = Some(path);
        self
    }
}

pub const BOUND_CSV_HEADER: &str = "name,path,epsilon,gamma,delta,lhs,rhs,pass";

/// CSV export, one row per report; a missing path id is left empty.
pub fn bound_reports_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from(BOUND_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let path = r.path.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:?},{:?},{:?},{:?},{:?},{}",
            r.name, path, r.epsilon, r.gamma, r.delta, r.lhs, r.rhs, r.pass
        );
    }
    out
}

fn check_pair(u: &Trajectory, v: &Trajectory) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::Precondition(format!(
            "trajectories live on different grids ({} vs {} cells)",
            u.grid().cells(),
            v.grid().cells()
        )));
    }
    if u.times() != v.times() {
        return Err(Error::Precondition("trajectories have different time grids".into()));
    }
    Ok(())
}

/// Left Riemann sum `Σₙ (tₙ₊₁ − tₙ) F(n)` with running partial sums.
fn left_riemann(times: &[f64], mut f: impl FnMut(usize) -> f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut partial = Vec::with_capacity(times.len());
    partial.push(0.0);
    for n in 0..times.len() - 1 {
        acc += (times[n + 1] - times[n]) * f(n);
        partial.push(acc);
    }
    partial
}

/// `Σᵢ Σⱼ coef(j) F(uᵢ, v_{i−j}) dx²` at one snapshot.
fn snapshot_sum(
    u: &[f64],
    v: &[f64],
    sk: &SpatialKernel,
    mut f: impl FnMut(usize, f64, f64) -> f64,
) -> f64 {
    let cells = u.len();
    let mut total = 0.0;
    for (i, &a) in u.iter().enumerate() {
        for idx in 0..sk.offsets.len() {
            total += f(idx, a, v[sk.partner(i, idx, cells)]);
        }
    }
    total * sk.dx * sk.dx
}

/// `ε D₁ γ²/δ`.
pub fn j1_bound(epsilon: f64, d1: f64, moll: &MollifierPair) -> f64 {
    epsilon * (d1 * moll.gamma() * moll.gamma() / moll.delta())
}

/// `ε δ D₁ C_ψ`.
pub fn j2_bound(epsilon: f64, d1: f64, moll: &MollifierPair) -> f64 {
    epsilon * (moll.delta() * d1 * moll.c_psi())
}

/// Certificates for the two noise-correction integrals
///
/// * `J̃₁ = ε D₁ ∫ ∫∫ ρ_γ(x−y)|x−y|² ψ_δ(u(x,s) − v(y,s)) dx dy ds ≤ ε D₁ γ²/δ`,
/// * `J̃₂ = ε D₁ ∫ ∫∫ ρ_γ ψ_δ(d) d² I_{|d|≤δ} dx dy ds ≤ ε δ D₁ C_ψ`,
///   with `d = u(x,s) − v(y,s)`.
pub fn bound_check_j(
    u: &Trajectory,
    v: &Trajectory,
    moll: &MollifierPair,
    epsilon: f64,
    noise: &NoiseModel,
) -> Result<(BoundReport, BoundReport)> {
    check_pair(u, v)?;
    let sk = moll.spatial(u.grid())?;
    let d1 = noise.d1();
    let delta = moll.delta();
    let (us, vs) = (u.snapshots(), v.snapshots());
    let j1 = left_riemann(u.times(), |n| {
        snapshot_sum(us[n].values(), vs[n].values(), &sk, |idx, a, b| {
            sk.weights[idx] * sk.z[idx] * sk.z[idx] * moll.psi_delta(a - b)
        })
    });
    let j2 = left_riemann(u.times(), |n| {
        snapshot_sum(us[n].values(), vs[n].values(), &sk, |idx, a, b| {
            let d = a - b;
            if d.abs() <= delta {
                sk.weights[idx] * moll.psi_delta(d) * d * d
            } else {
                0.0
            }
        })
    });
    let lhs1 = epsilon * d1 * j1.last().copied().unwrap_or(0.0);
    let lhs2 = epsilon * d1 * j2.last().copied().unwrap_or(0.0);
    Ok((
        BoundReport::new("J1", epsilon, moll, lhs1, j1_bound(epsilon, d1, moll)),
        BoundReport::new("J2", epsilon, moll, lhs2, j2_bound(epsilon, d1, moll)),
    ))
}

/// Validated constant `C(q₀)` of the envelope
/// `Γ(ξ,ζ) ≤ C(q₀)(1 + |ξ|^{q₀+1} + |ζ|^{q₀+1} + δ^{q₀+1})`, where
/// `Γ(ξ,ζ) = ∫_{−∞}^ξ (1 + |ξ'|^{q₀}) X((ξ' − ζ)/δ) dξ'`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEnvelope {
    pub q0: f64,
    pub delta: f64,
    pub range: f64,
    pub constant: f64,
    pub check: InequalityCheck,
}

/// `C(q₀) = max(1, 2^{q₀})`.
pub fn envelope_constant(q0: f64) -> f64 {
    2f64.powf(q0).max(1.0)
}

// Primitive of 1 + |s|^q.
fn growth_primitive(s: f64, q: f64) -> f64 {
    s + s.signum() * s.abs().powf(q + 1.0) / (q + 1.0)
}

/// `Γ(ξ, ζ)` by Gauss–Legendre on the transition band and closed form above it.
pub fn gamma_function(xi: f64, zeta: f64, q0: f64, moll: &MollifierPair) -> f64 {
    let d = moll.delta();
    let lo = zeta - d;
    if xi <= lo {
        return 0.0;
    }
    let gl = gauss();
    let top = xi.min(zeta + d);
    let f = |s: f64| (1.0 + s.abs().powf(q0)) * moll.chi_delta(s - zeta);
    let mut total = if lo < 0.0 && top > 0.0 {
        gl.composite(lo, 0.0, 2, f) + gl.composite(0.0, top, 2, f)
    } else {
        gl.composite(lo, top, 2, f)
    };
    if xi > zeta + d {
        total += growth_primitive(xi, q0) - growth_primitive(zeta + d, q0);
    }
    total
}

fn gauss() -> &'static GaussLegendre {
    static GL: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(16))
}

impl GammaEnvelope {
    /// Checks the envelope on the `lattice_n × lattice_n` lattice of
    /// `[−range, range]²`.
    pub fn validate(q0: f64, moll: &MollifierPair, range: f64, lattice_n: usize) -> Result<Self> {
        if !(q0 > 1.0) || !(range > 0.0) || lattice_n < 2 {
            return Err(Error::Precondition(format!(
                "envelope needs q0 > 1, range > 0, lattice_n >= 2 (got {q0}, {range}, {lattice_n})"
            )));
        }
        let c = envelope_constant(q0);
        let d = moll.delta();
        let lattice = symmetric_lattice(range, lattice_n);
        let mut tracker = crate::model::RatioTracker::new("gamma envelope");
        for &xi in &lattice {
            for &zeta in &lattice {
                let g = gamma_function(xi, zeta, q0, moll);
                if !g.is_finite() {
                    return Err(Error::numerical(format!("non-finite envelope at ({xi}, {zeta})")));
                }
                let rhs = c * (1.0 + xi.abs().powf(q0 + 1.0) + zeta.abs().powf(q0 + 1.0) + d.powf(q0 + 1.0));
                tracker.record(g, rhs, &[xi, zeta]);
            }
        }
        Ok(Self {
            q0,
            delta: d,
            range,
            constant: c,
            check: tracker.finish(),
        })
    }
}

/// `2ε γ⁻¹ N C (1 + δ^{q₀+1}) + 2ε γ⁻¹ N C (μᵤ + μᵥ)`, where `μ` are the
/// running maxima of `‖·‖_{q₀+1}^{q₀+1}`. Linear in `ε` by construction.
pub fn i_bound(
    epsilon: f64,
    moll: &MollifierPair,
    cal_n: f64,
    c_q0: f64,
    q0: f64,
    mu_u: f64,
    mu_v: f64,
) -> f64 {
    let base = 2.0 / moll.gamma() * cal_n * c_q0;
    epsilon * (base * (1.0 + moll.delta().powf(q0 + 1.0)) + base * (mu_u + mu_v))
}

/// Inner state integral of the flux term for one pair of values,
/// `W(u, v) = ∫∫ (f₁ f̄₂ + f̄₁ f₂) a(ξ) ψ_δ(ξ − ζ) dξ dζ`
/// `= ∫_{−∞}^u a(ξ) X((ξ−v)/δ) dξ + ∫_u^∞ a(ξ)(1 − X((ξ−v)/δ)) dξ`.
pub fn flux_wedge(a: f64, b: f64, flux: &FluxModel, moll: &MollifierPair) -> f64 {
    let d = moll.delta();
    let (lo, hi) = (b - d, b + d);
    let gl = gauss();
    let mut w = 0.0;
    if a > lo {
        let top = a.min(hi);
        w += gl.composite(lo, top, 2, |s| flux.speed(s) * moll.chi_delta(s - b));
        if a > hi {
            w += flux.flux(a) - flux.flux(hi);
        }
    }
    if a < hi {
        let bot = a.max(lo);
        w += gl.composite(bot, hi, 2, |s| flux.speed(s) * (1.0 - moll.chi_delta(s - b)));
        if a < lo {
            w += flux.flux(lo) - flux.flux(a);
        }
    }
    w
}

/// Certificate for the flux term
/// `Ĩ(t) = ε ∫₀ᵗ ∫∫ ρ_γ'(x−y) W(u(x,s), v(y,s)) dx dy ds`:
/// `max_t |Ĩ(t)|` against [`i_bound`] with the validated `C(q₀)`.
pub fn bound_check_i(
    u: &Trajectory,
    v: &Trajectory,
    moll: &MollifierPair,
    epsilon: f64,
    flux: &FluxModel,
    envelope: &GammaEnvelope,
) -> Result<BoundReport> {
    check_pair(u, v)?;
    if !envelope.check.pass {
        return Err(Error::Precondition(format!(
            "Gamma envelope fails with ratio {}",
            envelope.check.worst_ratio
        )));
    }
    if envelope.delta != moll.delta() || envelope.q0 != flux.q0() {
        return Err(Error::Precondition(
            "Gamma envelope was validated for a different (q0, delta)".into(),
        ));
    }
    let sup = u
        .snapshots()
        .iter()
        .chain(v.snapshots())
        .map(|s| s.sup_norm())
        .fold(0.0, f64::max);
    if sup > envelope.range {
        return Err(Error::Precondition(format!(
            "state range {sup} exceeds the envelope lattice range {}",
            envelope.range
        )));
    }
    let sk = moll.spatial(u.grid())?;
    let (us, vs) = (u.snapshots(), v.snapshots());
    let partial = if flux.is_zero() {
        vec![0.0; u.len()]
    } else {
        left_riemann(u.times(), |n| {
            snapshot_sum(us[n].values(), vs[n].values(), &sk, |idx, a, b| {
                sk.slopes[idx] * flux_wedge(a, b, flux, moll)
            })
        })
    };
    let lhs = epsilon * partial.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let q0 = flux.q0();
    let rhs = i_bound(
        epsilon,
        moll,
        flux.cal_n(),
        envelope.constant,
        q0,
        lp_moment(u, q0 + 1.0),
        lp_moment(v, q0 + 1.0),
    );
    Ok(BoundReport::new("I", epsilon, moll, lhs, rhs))
}
