use std::sync::OnceLock;

use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::model::TorusGrid;

/// Unnormalised bump `exp(−1/(1−s²))` on `(−1, 1)`.
#[inline]
fn raw_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// `d/ds exp(−1/(1−s²))`.
#[inline]
fn raw_bump_slope(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        raw_bump(s) * (-2.0 * s / (q * q))
    }
}

/// Number of table intervals on `[-1, 1]`.
const TABLE_INTERVALS: usize = 4096;

/// The normalised bump `ψ` with tabulated primitives
/// `X(r) = ∫_{−∞}^r ψ` and `Ξ(r) = ∫_{−∞}^r X`.
#[derive(Debug)]
pub struct BumpKernel {
    norm: f64,
    h: f64,
    chi: Vec<f64>,
    xi: Vec<f64>,
}

impl BumpKernel {
    /// Shared instance, built on first use.
    pub fn get() -> &'static BumpKernel {
        static KERNEL: OnceLock<BumpKernel> = OnceLock::new();
        KERNEL.get_or_init(BumpKernel::build)
    }

    fn build() -> Self {
        let gl = GaussLegendre::new(16);
        let mass = gl.composite(-1.0, 1.0, 256, raw_bump);
        let norm = 1.0 / mass;
        let n = TABLE_INTERVALS;
        let h = 2.0 / n as f64;
        let node = |m: usize| -1.0 + m as f64 * h;
        let mut chi = vec![0.0; n + 1];
        for m in 0..n {
            chi[m + 1] = chi[m] + norm * gl.integrate(node(m), node(m + 1), raw_bump);
        }
        // Ξ from the exact integral of the cubic Hermite interpolant of X.
        let mut xi = vec![0.0; n + 1];
        for m in 0..n {
            let (p0, p1) = (norm * raw_bump(node(m)), norm * raw_bump(node(m + 1)));
            xi[m + 1] = xi[m] + 0.5 * h * (chi[m] + chi[m + 1]) + h * h * (p0 - p1) / 12.0;
        }
        Self { norm, h, chi, xi }
    }

    /// `ψ(s)`.
    #[inline]
    pub fn psi(&self, s: f64) -> f64 {
        self.norm * raw_bump(s)
    }

    /// `ψ'(s)`.
    #[inline]
    pub fn psi_slope(&self, s: f64) -> f64 {
        self.norm * raw_bump_slope(s)
    }

    /// Normalising constant of `ψ`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `C_ψ = sup ψ = ψ(0)`.
    pub fn c_psi(&self) -> f64 {
        self.psi(0.0)
    }

    fn locate(&self, r: f64) -> (usize, f64) {
        let pos = (r + 1.0) / self.h;
        let m = (pos.floor() as usize).min(TABLE_INTERVALS - 1);
        (m, pos - m as f64)
    }

    #[inline]
    fn hermite(&self, m: usize, t: f64, f: &[f64], df0: f64, df1: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * f[m] + h10 * self.h * df0 + h01 * f[m + 1] + h11 * self.h * df1
    }

    /// `X(r)`, the distribution function of `ψ`.
    pub fn chi(&self, r: f64) -> f64 {
        if r <= -1.0 {
            return 0.0;
        }
        if r >= 1.0 {
            return 1.0;
        }
        let (m, t) = self.locate(r);
        let a = -1.0 + m as f64 * self.h;
        self.hermite(m, t, &self.chi, self.psi(a), self.psi(a + self.h))
    }

    /// `Ξ(r)`; equals `r` for `r ≥ 1` and `0` for `r ≤ −1`.
    pub fn xi(&self, r: f64) -> f64 {
        if r <= -1.0 {
            return 0.0;
        }
        if r >= 1.0 {
            return r;
        }
        let (m, t) = self.locate(r);
        self.hermite(m, t, &self.xi, self.chi[m], self.chi[m + 1])
    }

    /// Table values of `X` and `Ξ` at `r = 1`.
    pub fn table_ends(&self) -> (f64, f64) {
        (self.chi[TABLE_INTERVALS], self.xi[TABLE_INTERVALS])
    }
}

/// Kernel pair `ρ_γ` (space) and `ψ_δ` (state) of the doubling argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierPair {
    gamma: f64,
    delta: f64,
}

/// Values of `ρ_γ` and `ρ_γ'` at the grid offsets `z = j·dx`, `|z| < γ`.
///
/// Weights are normalised so that `Σⱼ wⱼ dx = 1`; the slopes carry the same
/// normalising factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialKernel {
    pub offsets: Vec<isize>,
    pub z: Vec<f64>,
    pub weights: Vec<f64>,
    pub slopes: Vec<f64>,
    pub dx: f64,
}

impl MollifierPair {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::Config(format!("gamma must lie in (0, 1/2), got {gamma}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { gamma, delta })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kernel(&self) -> &'static BumpKernel {
        BumpKernel::get()
    }

    pub fn c_psi(&self) -> f64 {
        self.kernel().c_psi()
    }

    /// `ρ_γ(z) = ρ(z/γ)/γ` with continuous normalisation.
    pub fn rho(&self, z: f64) -> f64 {
        self.kernel().psi(z / self.gamma) / self.gamma
    }

    /// `ψ_δ(w) = ψ(w/δ)/δ`.
    #[inline]
    pub fn psi_delta(&self, w: f64) -> f64 {
        self.kernel().psi(w / self.delta) / self.delta
    }

    /// `X(w/δ)`.
    #[inline]
    pub fn chi_delta(&self, w: f64) -> f64 {
        self.kernel().chi(w / self.delta)
    }

    /// Discrete `ρ_γ` on `grid`; needs `γ ≥ dx`.
    pub fn spatial(&self, grid: TorusGrid) -> Result<SpatialKernel> {
        let dx = grid.dx();
        if self.gamma < dx {
            return Err(Error::Precondition(format!(
                "gamma = {} is below the cell width {dx}",
                self.gamma
            )));
        }
        let reach = (self.gamma / dx).ceil() as isize;
        let k = self.kernel();
        let mut offsets = Vec::new();
        let mut z = Vec::new();
        let mut raw = Vec::new();
        let mut raw_slopes = Vec::new();
        for j in -reach..=reach {
            let zj = j as f64 * dx;
            if zj.abs() < self.gamma {
                offsets.push(j);
                z.push(zj);
                raw.push(k.psi(zj / self.gamma));
                raw_slopes.push(k.psi_slope(zj / self.gamma) / self.gamma);
            }
        }
        let mass: f64 = raw.iter().sum::<f64>() * dx;
        let weights = raw.iter().map(|w| w / mass).collect();
        let slopes = raw_slopes.iter().map(|w| w / mass).collect();
        Ok(SpatialKernel {
            offsets,
            z,
            weights,
            slopes,
            dx,
        })
    }
}

impl SpatialKernel {
    /// Index `i − j` of the partner cell `y = x − z` on `cells` cells.
    #[inline]
    pub fn partner(&self, i: usize, idx: usize, cells: usize) -> usize {
        (i as isize - self.offsets[idx]).rem_euclid(cells as isize) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_constants() {
        let k = BumpKernel::get();
        let gl = GaussLegendre::new(16);
        let mass = gl.composite(-1.0, 1.0, 64, |s| k.psi(s));
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((k.norm() - 1.0 / 0.443_993_816_168_079_4).abs() < 1e-9);
        assert!((k.c_psi() - k.norm() / std::f64::consts::E).abs() < 1e-15);
        let (x1, xi1) = k.table_ends();
        assert!((x1 - 1.0).abs() < 1e-13);
        assert!((xi1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn primitives_against_direct_quadrature() {
        let k = BumpKernel::get();
        let gl = GaussLegendre::new(16);
        for i in 0..=40 {
            let r = -1.2 + 2.4 * i as f64 / 40.0;
            let lo = -1.0;
            let hi = r.clamp(-1.0, 1.0);
            let x_direct = if hi > lo { gl.composite(lo, hi, 32, |s| k.psi(s)) } else { 0.0 };
            assert!((k.chi(r) - x_direct).abs() < 1e-11, "X({r})");
            let xi_direct = if hi > lo {
                gl.composite(lo, hi, 32, |s| gl.composite(-1.0, s.max(-1.0), 8, |t| k.psi(t)))
                    + (r - hi).max(0.0)
            } else {
                0.0
            };
            assert!((k.xi(r) - xi_direct).abs() < 1e-10, "Xi({r})");
        }
    }

    #[test]
    fn symmetry() {
        let k = BumpKernel::get();
        for i in 0..50 {
            let r = i as f64 / 50.0;
            assert!((k.chi(r) + k.chi(-r) - 1.0).abs() < 1e-13);
            assert_eq!(k.psi(r), k.psi(-r));
        }
        assert!(k.xi(0.0) <= 0.5);
    }

    #[test]
    fn spatial_weights_normalised() {
        let m = MollifierPair::new(0.1, 0.05).unwrap();
        let grid = TorusGrid::new(64).unwrap();
        let s = m.spatial(grid).unwrap();
        let mass: f64 = s.weights.iter().sum::<f64>() * s.dx;
        assert!((mass - 1.0).abs() < 1e-14);
        let first: f64 = s.slopes.iter().sum::<f64>();
        assert!(first.abs() < 1e-10);
        assert!(m.spatial(TorusGrid::new(8).unwrap()).is_err());
    }
}
