use super::certificate::{symmetric_lattice, InequalityCheck, RatioTracker};
use super::poly::Polynomial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FluxKind {
    Zero,
    /// `A(u) = c·u`.
    Linear { speed: f64 },
    /// `A(u) = u²/2`.
    Burgers,
    /// `A(u) = Σⱼ cⱼ uʲ`, coefficients ascending.
    Polynomial { coefficients: Vec<f64> },
}

/// Flux `A`, its derivative `a = A'`, and the declared growth constants
/// `(q₀, N(q₀))` of `|a(ξ)| ≤ N(q₀)(1 + |ξ|^q₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxModel {
    kind: FluxKind,
    q0: f64,
    cal_n: f64,
    flux: Polynomial,
    speed: Polynomial,
    /// Real roots of `a`, where the Engquist–Osher split changes branch.
    speed_roots: Vec<f64>,
    /// Real roots of `a'`, for range maxima of `|a|`.
    speed_crit: Vec<f64>,
}

impl FluxModel {
    pub fn new(kind: FluxKind, q0: f64, cal_n: f64) -> Result<Self> {
        if !(q0.is_finite() && q0 > 1.0) {
            return Err(Error::Config(format!("flux growth degree q0 must exceed 1, got {q0}")));
        }
        if !(cal_n.is_finite() && cal_n >= 0.0) {
            return Err(Error::Config(format!("flux constant N(q0) must be >= 0, got {cal_n}")));
        }
        let coeffs = match &kind {
            FluxKind::Zero => vec![],
            FluxKind::Linear { speed } => vec![0.0, *speed],
            FluxKind::Burgers => vec![0.0, 0.0, 0.5],
            FluxKind::Polynomial { coefficients } => coefficients.clone(),
        };
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("flux coefficients must be finite".into()));
        }
        let flux = Polynomial::new(coeffs);
        let speed = flux.derivative();
        let speed_roots = speed.real_roots();
        let speed_crit = speed.derivative().real_roots();
        Ok(Self {
            kind,
            q0,
            cal_n,
            flux,
            speed,
            speed_roots,
            speed_crit,
        })
    }

    pub fn zero() -> Self {
        Self::new(FluxKind::Zero, 2.0, 0.0).expect("valid")
    }

    pub fn burgers() -> Self {
        Self::new(FluxKind::Burgers, 2.0, 1.0).expect("valid")
    }

    pub fn kind(&self) -> &FluxKind {
        &self.kind
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn cal_n(&self) -> f64 {
        self.cal_n
    }

    pub fn is_zero(&self) -> bool {
        self.flux.degree() == 0
    }

    pub fn flux(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear { speed } => speed * u,
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::Polynomial { .. } => self.flux.eval(u),
        }
    }

    pub fn speed(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear { speed } => speed,
            FluxKind::Burgers => u,
            FluxKind::Polynomial { .. } => self.speed.eval(u),
        }
    }

    /// `sup |a|` over the state interval `[lo, hi]`.
    pub fn max_speed_on(&self, lo: f64, hi: f64) -> f64 {
        match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear { speed } => speed.abs(),
            FluxKind::Burgers => lo.abs().max(hi.abs()),
            FluxKind::Polynomial { .. } => self.speed.max_abs_on(lo, hi, &self.speed_crit),
        }
    }

    /// `∫₀ᵘ max(a(s), 0) ds`.
    pub fn positive_part(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear { speed } => speed.max(0.0) * u,
            FluxKind::Burgers => {
                let p = u.max(0.0);
                0.5 * p * p
            }
            FluxKind::Polynomial { .. } => self.split_integral(u, true),
        }
    }

    /// `∫₀ᵘ min(a(s), 0) ds`.
    pub fn negative_part(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear { speed } => speed.min(0.0) * u,
            FluxKind::Burgers => {
                let m = u.min(0.0);
                0.5 * m * m
            }
            FluxKind::Polynomial { .. } => self.split_integral(u, false),
        }
    }

    // On each piece between consecutive roots of `a` the sign of `a` is
    // fixed, so the clipped integral is the clipped increment of `A`.
    fn split_integral(&self, u: f64, positive: bool) -> f64 {
        let (lo, hi, sign) = if u >= 0.0 { (0.0, u, 1.0) } else { (u, 0.0, -1.0) };
        let mut total = 0.0;
        let mut a_left = self.flux.eval(lo);
        for &r in self.speed_roots.iter().filter(|&&r| r > lo && r < hi) {
            let a_r = self.flux.eval(r);
            total += clip(a_r - a_left, positive);
            a_left = a_r;
        }
        total += clip(self.flux.eval(hi) - a_left, positive);
        sign * total
    }
}

fn clip(x: f64, positive: bool) -> f64 {
    if positive {
        x.max(0.0)
    } else {
        x.min(0.0)
    }
}

/// Sampled certificate for the two flux growth inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxCertificate {
    /// `|a(ξ)| ≤ N(q₀)(1 + |ξ|^q₀)`.
    pub growth: InequalityCheck,
    /// `|a(ξ) − a(ζ)| ≤ N(q₀)(1 + |ξ|^{q₀−1} + |ζ|^{q₀−1}) |ξ − ζ|`.
    pub lipschitz: InequalityCheck,
}

impl FluxCertificate {
    pub fn pass(&self) -> bool {
        self.growth.pass && self.lipschitz.pass
    }

    pub fn checks(&self) -> [&InequalityCheck; 2] {
        [&self.growth, &self.lipschitz]
    }
}

pub fn validate_flux(model: &FluxModel, r_val: f64, lattice_n: usize) -> Result<FluxCertificate> {
    if !(r_val.is_finite() && r_val > 0.0) {
        return Err(Error::Precondition(format!("validation range must be positive, got {r_val}")));
    }
    if lattice_n < 100 {
        return Err(Error::Precondition(format!("validation lattice needs >= 100 points, got {lattice_n}")));
    }
    validate_flux_on(model, &symmetric_lattice(r_val, lattice_n))
}

/// Flux certificate on an explicit state lattice.
pub fn validate_flux_on(model: &FluxModel, lattice: &[f64]) -> Result<FluxCertificate> {
    let (q0, n) = (model.q0, model.cal_n);
    let speeds: Vec<f64> = lattice.iter().map(|&x| model.speed(x)).collect();
    if let Some(i) = speeds.iter().position(|s| !s.is_finite()) {
        return Err(Error::numerical(format!(
            "flux speed not finite at state {}",
            lattice[i]
        )));
    }

    let mut growth = RatioTracker::new("flux growth");
    for (&x, &a) in lattice.iter().zip(&speeds) {
        growth.record(a.abs(), n * (1.0 + x.abs().powf(q0)), &[x]);
    }

    let powers: Vec<f64> = lattice.iter().map(|x| x.abs().powf(q0 - 1.0)).collect();
    let mut lipschitz = RatioTracker::new("flux lipschitz");
    for i in 0..lattice.len() {
        let (x, ax) = (lattice[i], speeds[i]);
        for j in (i + 1)..lattice.len() {
            let (z, az) = (lattice[j], speeds[j]);
            let upsilon = n * (1.0 + powers[i] + powers[j]);
            lipschitz.record((ax - az).abs(), upsilon * (x - z).abs(), &[x, z]);
        }
    }

    Ok(FluxCertificate {
        growth: growth.finish(),
        lipschitz: lipschitz.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_speed() -> FluxModel {
        // A = ξ⁴/4 so a = ξ³.
        FluxModel::new(
            FluxKind::Polynomial {
                coefficients: vec![0.0, 0.0, 0.0, 0.0, 0.25],
            },
            2.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn burgers_passes() {
        let cert = validate_flux(&FluxModel::burgers(), 10.0, 1024).unwrap();
        assert!(cert.pass(), "{cert:?}");
        assert!(cert.growth.worst_ratio <= 0.5 + 1e-12);
    }

    #[test]
    fn zero_flux_passes_with_zero_constant() {
        let m = FluxModel::new(FluxKind::Zero, 3.5, 0.0).unwrap();
        let cert = validate_flux(&m, 10.0, 200).unwrap();
        assert!(cert.pass());
        assert_eq!(cert.growth.worst_ratio, 0.0);
    }

    #[test]
    fn cubic_speed_fails_quadratic_growth() {
        let cert = validate_flux(&cubic_speed(), 10.0, 1001).unwrap();
        assert!(!cert.growth.pass);
        // Worst at the lattice edge: 1000 / 101.
        assert!((cert.growth.worst_ratio - 1000.0 / 101.0).abs() < 1e-9);
        assert_eq!(cert.growth.worst_at[0].abs(), 10.0);
    }

    #[test]
    fn preconditions() {
        assert!(validate_flux(&FluxModel::burgers(), 0.0, 200).is_err());
        assert!(validate_flux(&FluxModel::burgers(), 1.0, 99).is_err());
        assert!(FluxModel::new(FluxKind::Burgers, 1.0, 1.0).is_err());
        assert!(FluxModel::new(FluxKind::Burgers, 2.0, -1.0).is_err());
    }

    #[test]
    fn split_parts_sum_to_flux_increment() {
        let models = [
            FluxModel::burgers(),
            FluxModel::new(FluxKind::Linear { speed: -0.7 }, 2.0, 1.0).unwrap(),
            cubic_speed(),
            FluxModel::new(
                FluxKind::Polynomial {
                    coefficients: vec![0.3, 1.0, -1.5, 0.0, 0.25],
                },
                3.0,
                5.0,
            )
            .unwrap(),
        ];
        for m in &models {
            for &u in &[-2.3, -0.4, 0.0, 0.9, 1.7] {
                let lhs = m.positive_part(u) + m.negative_part(u);
                let rhs = m.flux(u) - m.flux(0.0);
                assert!((lhs - rhs).abs() < 1e-12, "{:?} u={u}", m.kind());
                assert!(m.positive_part(u) * u.signum() >= -1e-15);
            }
        }
    }

    #[test]
    fn polynomial_split_matches_quadrature() {
        // a(s) = 1 - 3s + s³ changes sign three times.
        let m = FluxModel::new(
            FluxKind::Polynomial {
                coefficients: vec![0.3, 1.0, -1.5, 0.0, 0.25],
            },
            3.0,
            5.0,
        )
        .unwrap();
        for &u in &[-2.5, -1.0, 0.5, 1.2, 2.5] {
            let n = 200_000;
            let h = u / n as f64;
            let (mut pos, mut neg) = (0.0, 0.0);
            for i in 0..n {
                let s = (i as f64 + 0.5) * h;
                let a = m.speed(s);
                pos += a.max(0.0) * h;
                neg += a.min(0.0) * h;
            }
            assert!((m.positive_part(u) - pos).abs() < 1e-6, "u={u}");
            assert!((m.negative_part(u) - neg).abs() < 1e-6, "u={u}");
        }
    }

    #[test]
    fn max_speed_includes_interior_extrema() {
        // a(s) = 1 - 3s + s³ has a local max at s = -1 (value 3).
        let m = FluxModel::new(
            FluxKind::Polynomial {
                coefficients: vec![0.0, 1.0, -1.5, 0.0, 0.25],
            },
            3.0,
            5.0,
        )
        .unwrap();
        assert!((m.max_speed_on(-1.5, -0.5) - 3.0).abs() < 1e-12);
        assert!((FluxModel::burgers().max_speed_on(-3.0, 1.0) - 3.0).abs() < 1e-15);
    }
}
