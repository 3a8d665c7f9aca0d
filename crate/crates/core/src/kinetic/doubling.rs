use super::brackets::bracket_identity;
use super::mollifier::{MollifierPair, SpatialKernel};
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::model::ScalarField;

/// State step of the bracket quadrature inside [`error_term`].
pub const ERROR_TERM_DXI: f64 = 1e-4;

fn paired(u: &ScalarField, v: &ScalarField, moll: &MollifierPair) -> Result<SpatialKernel> {
    if u.grid() != v.grid() {
        return Err(Error::Precondition(format!(
            "fields live on different grids ({} vs {} cells)",
            u.grid().cells(),
            v.grid().cells()
        )));
    }
    moll.spatial(u.grid())
}

/// `Σᵢ Σⱼ wⱼ F(uᵢ, v_{i−j}) dx²`.
fn kernel_sum(
    u: &ScalarField,
    v: &ScalarField,
    sk: &SpatialKernel,
    weights: &[f64],
    mut f: impl FnMut(f64, f64) -> f64,
) -> f64 {
    let cells = u.grid().cells();
    let (uv, vv) = (u.values(), v.values());
    let mut total = 0.0;
    for (i, &a) in uv.iter().enumerate() {
        let mut row = 0.0;
        for (idx, w) in weights.iter().enumerate() {
            row += w * f(a, vv[sk.partner(i, idx, cells)]);
        }
        total += row;
    }
    total * sk.dx * sk.dx
}

/// Doubling functional
/// `R = ∫∫ ρ_γ(x−y) ∫∫ ψ_δ(ξ−ζ) (f₁ f̄₂ + f̄₁ f₂) dξ dζ dx dy`
/// for `f₁ = I_{u>ξ}`, `f₂ = I_{v>ζ}`, using the closed form
/// `∫∫ f₁ f̄₂ ψ_δ = δ Ξ((u−v)/δ)`.
pub fn doubling_functional(u: &ScalarField, v: &ScalarField, moll: &MollifierPair) -> Result<f64> {
    let sk = paired(u, v, moll)?;
    let k = moll.kernel();
    let d = moll.delta();
    Ok(kernel_sum(u, v, &sk, &sk.weights, |a, b| {
        d * (k.xi((a - b) / d) + k.xi((b - a) / d))
    }))
}

/// Same functional by direct Gauss–Legendre quadrature of the `(ξ, ζ)`
/// integrals, without the tabulated primitives.
pub fn doubling_functional_brute_force(
    u: &ScalarField,
    v: &ScalarField,
    moll: &MollifierPair,
) -> Result<f64> {
    let sk = paired(u, v, moll)?;
    let gl = GaussLegendre::new(12);
    let d = moll.delta();
    let panels = 24;
    let inner = |xi: f64, lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        gl.composite(lo, hi, panels, |zeta| moll.psi_delta(xi - zeta))
    };
    // Outer integrals are split where the inner limits change form.
    let pair = |a: f64, b: f64| -> f64 {
        let outer = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| -> f64 {
            if hi <= lo {
                0.0
            } else {
                gl.composite(lo, hi, panels, f)
            }
        };
        // f₁ f̄₂: ξ < a, ζ ≥ b.
        let t1 = outer(b - d, a.min(b + d), &|xi| inner(xi, b.max(xi - d), xi + d))
            + (a - (b + d)).max(0.0);
        // f̄₁ f₂: ξ ≥ a, ζ < b.
        let t2 = outer(a.max(b - d), b + d, &|xi| inner(xi, xi - d, b.min(xi + d)))
            + ((b - d) - a).max(0.0);
        t1 + t2
    };
    Ok(kernel_sum(u, v, &sk, &sk.weights, pair))
}

/// `∫∫ ρ_γ(x−y) |u(x) − v(y)| dx dy`.
pub fn smeared_l1(u: &ScalarField, v: &ScalarField, moll: &MollifierPair) -> Result<f64> {
    let sk = paired(u, v, moll)?;
    Ok(kernel_sum(u, v, &sk, &sk.weights, |a, b| (a - b).abs()))
}

/// Error term `E = R − ∫∫ (f₁ f̄₂ + f̄₁ f₂) dξ dx`, the identity part taken
/// from [`bracket_identity`] at step [`ERROR_TERM_DXI`]. Signed.
pub fn error_term(u: &ScalarField, v: &ScalarField, moll: &MollifierPair) -> Result<f64> {
    let r = doubling_functional(u, v, moll)?;
    let (plus, minus) = bracket_identity(u, v, ERROR_TERM_DXI)?;
    Ok(r - (plus + minus))
}

/// State mollification part `H₂ = R − ∫∫ ρ_γ(x−y) |u(x) − v(y)| dx dy`.
pub fn mollification_error(u: &ScalarField, v: &ScalarField, moll: &MollifierPair) -> Result<f64> {
    let sk = paired(u, v, moll)?;
    let k = moll.kernel();
    let d = moll.delta();
    Ok(kernel_sum(u, v, &sk, &sk.weights, |a, b| {
        d * (k.xi((a - b) / d) + k.xi((b - a) / d)) - (a - b).abs()
    }))
}

/// Spatial mollification part `H₁ = ∫∫ ρ_γ(x−y)|u(x) − v(y)| − ∫ |u − v|`.
pub fn shift_error(u: &ScalarField, v: &ScalarField, moll: &MollifierPair) -> Result<f64> {
    Ok(smeared_l1(u, v, moll)? - u.l1_distance(v)?)
}

/// `ω(γ) = max_{|z|<γ} ∫ |v(x − z) − v(x)| dx` over grid shifts `z`.
pub fn l1_modulus(v: &ScalarField, gamma: f64) -> f64 {
    let m = v.grid().cells();
    let dx = v.grid().dx();
    let vals = v.values();
    let reach = (gamma / dx).ceil() as isize;
    let mut worst: f64 = 0.0;
    for j in -reach..=reach {
        if (j as f64 * dx).abs() >= gamma {
            continue;
        }
        let s: f64 = (0..m)
            .map(|i| (vals[(i as isize - j).rem_euclid(m as isize) as usize] - vals[i]).abs())
            .sum();
        worst = worst.max(s * dx);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TorusGrid;

    #[test]
    fn equal_constants() {
        let grid = TorusGrid::new(32).unwrap();
        let moll = MollifierPair::new(0.1, 0.1).unwrap();
        let c = ScalarField::constant(grid, 0.4).unwrap();
        let r = doubling_functional(&c, &c, &moll).unwrap();
        let want = 2.0 * 0.1 * moll.kernel().xi(0.0);
        assert!((r - want).abs() < 1e-14);
        assert!(r <= 0.1);
        assert!(error_term(&c, &c, &moll).unwrap().abs() <= 0.1);
    }

    #[test]
    fn separated_constants() {
        let grid = TorusGrid::new(32).unwrap();
        let moll = MollifierPair::new(0.1, 0.1).unwrap();
        let u = ScalarField::constant(grid, 2.0).unwrap();
        let v = ScalarField::constant(grid, 0.0).unwrap();
        let r = doubling_functional(&u, &v, &moll).unwrap();
        assert!((r - 2.0).abs() <= 4.0 * 0.1);
    }

    #[test]
    fn brute_force_constants() {
        let grid = TorusGrid::new(16).unwrap();
        let moll = MollifierPair::new(0.2, 0.1).unwrap();
        for (a, b) in [(0.0, 0.0), (0.05, 0.0), (0.3, 0.0), (-0.07, 0.02)] {
            let u = ScalarField::constant(grid, a).unwrap();
            let v = ScalarField::constant(grid, b).unwrap();
            let fast = doubling_functional(&u, &v, &moll).unwrap();
            let slow = doubling_functional_brute_force(&u, &v, &moll).unwrap();
            assert!((fast - slow).abs() < 1e-9, "{a} {b}: {fast} vs {slow}");
        }
    }

    #[test]
    fn gamma_below_cell_rejected() {
        let grid = TorusGrid::new(4).unwrap();
        let moll = MollifierPair::new(0.1, 0.1).unwrap();
        let c = ScalarField::constant(grid, 0.0).unwrap();
        assert!(matches!(doubling_functional(&c, &c, &moll), Err(Error::Precondition(_))));
    }
}
