use crate::error::{Error, Result};
use crate::model::ScalarField;

/// Uniform midpoint grid `ξₘ = lo + (m + ½)·dxi`, `m < n`, in state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiGrid {
    pub lo: f64,
    pub dxi: f64,
    pub n: usize,
}

impl XiGrid {
    /// Grid covering `[lo, hi]`, with `lo` snapped down to a multiple of `dxi`.
    pub fn covering(lo: f64, hi: f64, dxi: f64) -> Result<Self> {
        if !(dxi > 0.0 && dxi.is_finite()) {
            return Err(Error::Precondition(format!("dxi must be positive, got {dxi}")));
        }
        let start = (lo / dxi).floor() * dxi;
        let n = ((hi - start) / dxi).ceil() as usize;
        Ok(Self { lo: start, dxi, n })
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.n as f64 * self.dxi
    }

    #[inline]
    pub fn node(&self, m: usize) -> f64 {
        self.lo + (m as f64 + 0.5) * self.dxi
    }

    fn require_cover(&self, lo: f64, hi: f64) -> Result<()> {
        if self.lo > lo || self.hi() < hi {
            return Err(Error::Precondition(format!(
                "xi-grid [{}, {}] does not cover [{lo}, {hi}]",
                self.lo,
                self.hi()
            )));
        }
        Ok(())
    }
}

fn same_grid(u: &ScalarField, v: &ScalarField) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::Precondition(format!(
            "fields live on different grids ({} vs {} cells)",
            u.grid().cells(),
            v.grid().cells()
        )));
    }
    Ok(())
}

/// `f(x, ξ) = I_{u(x) > ξ}` sampled on `grid` for one cell value.
pub fn kinetic_indicator(u: f64, grid: &XiGrid) -> Vec<bool> {
    (0..grid.n).map(|m| u > grid.node(m)).collect()
}

/// `(∫∫ f₁ f̄₂, ∫∫ f̄₁ f₂)` on an explicit state grid, with `f₁ = I_{u>ξ}`,
/// `f₂ = I_{v>ξ}` and `f̄ = 1 − f`.
pub fn bracket_identity_on(u: &ScalarField, v: &ScalarField, grid: &XiGrid) -> Result<(f64, f64)> {
    same_grid(u, v)?;
    let lo = u.min().min(v.min()) - 1.0;
    let hi = u.max().max(v.max()) + 1.0;
    grid.require_cover(lo, hi)?;
    let dx = u.grid().dx();
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (&a, &b) in u.values().iter().zip(v.values()) {
        let mut p = 0usize;
        let mut q = 0usize;
        for m in 0..grid.n {
            let xi = grid.node(m);
            let f1 = a > xi;
            let f2 = b > xi;
            p += (f1 && !f2) as usize;
            q += (!f1 && f2) as usize;
        }
        plus += p as f64 * grid.dxi * dx;
        minus += q as f64 * grid.dxi * dx;
    }
    Ok((plus, minus))
}

/// Bracket pair on a grid of step `dxi` covering `[min − 1, max + 1]`.
pub fn bracket_identity(u: &ScalarField, v: &ScalarField, dxi: f64) -> Result<(f64, f64)> {
    same_grid(u, v)?;
    let lo = u.min().min(v.min()) - 1.0;
    let hi = u.max().max(v.max()) + 1.0;
    bracket_identity_on(u, v, &XiGrid::covering(lo, hi, dxi)?)
}

/// `∫∫ |I_{u>ξ} − I_{0>ξ}| dξ dx` by midpoint quadrature.
pub fn correction_mass(u: &ScalarField, dxi: f64) -> Result<f64> {
    let lo = u.min().min(0.0) - 1.0;
    let hi = u.max().max(0.0) + 1.0;
    let grid = XiGrid::covering(lo, hi, dxi)?;
    let dx = u.grid().dx();
    let mut total = 0.0;
    for &a in u.values() {
        let count = (0..grid.n)
            .filter(|&m| {
                let xi = grid.node(m);
                (a > xi) != (0.0 > xi)
            })
            .count();
        total += count as f64 * grid.dxi * dx;
    }
    Ok(total)
}
