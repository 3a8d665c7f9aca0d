use super::mollifier::MollifierPair;
use crate::error::{Error, Result};
use crate::harness::{mean_and_se, Z95};
use crate::model::{NoiseModel, NoisePath, Trajectory};
use crate::solvers::ProfileTable;

/// Minimum ensemble size for [`martingale_diagnostic`].
pub const MIN_MARTINGALE_PATHS: usize = 100;

/// One path of the stochastic term
/// `K̃(t) = 2√ε Σₖ ∫₀ᵗ ∫∫ (gₖ(x,u) − gₖ(y,v)) ρ_γ(x−y) X((u−v)/δ) dx dy dβₖ`,
/// accumulated step by step at the left-endpoint state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleSample {
    /// `K̃(1)`.
    pub terminal: f64,
    /// `max_n K̃(tₙ)²`.
    pub sup_square: f64,
    /// Discrete quadratic variation `Σₙ (ΔK̃ₙ)²` predicted from the
    /// integrand, `4ε Σₙ Σₖ Sₖ(n)² dt`.
    pub quadratic_variation: f64,
}

/// `K̃` along one coupled pair saved at every step, with the noise path
/// that drove it.
pub fn martingale_sample(
    u: &Trajectory,
    v: &Trajectory,
    path: &NoisePath,
    moll: &MollifierPair,
    epsilon: f64,
    noise: &NoiseModel,
) -> Result<MartingaleSample> {
    if u.grid() != v.grid() || u.times() != v.times() {
        return Err(Error::Precondition("trajectories are not on a shared grid".into()));
    }
    let modes = noise.len();
    if modes == 0 || noise.is_silent() {
        return Ok(MartingaleSample {
            terminal: 0.0,
            sup_square: 0.0,
            quadratic_variation: 0.0,
        });
    }
    if path.modes() != modes || u.len() != path.steps() + 1 {
        return Err(Error::Precondition(format!(
            "need one snapshot per noise step: {} snapshots for {} steps",
            u.len(),
            path.steps()
        )));
    }
    let grid = u.grid();
    let cells = grid.cells();
    let sk = moll.spatial(grid)?;
    let table = ProfileTable::new(noise, grid);
    let amp = 2.0 * epsilon.sqrt();
    let dx2 = sk.dx * sk.dx;
    let mut s = vec![0.0; modes];
    let mut gu = vec![0.0; modes * cells];
    let mut gv = vec![0.0; modes * cells];
    let (mut k, mut sup_square, mut qv) = (0.0f64, 0.0f64, 0.0f64);

    for n in 0..path.steps() {
        let (us, vs) = (u.snapshots()[n].values(), v.snapshots()[n].values());
        for (m, mode) in noise.modes().iter().enumerate() {
            for i in 0..cells {
                gu[m * cells + i] = mode.eval_with_profile(table.phi(m, i), us[i]);
                gv[m * cells + i] = mode.eval_with_profile(table.phi(m, i), vs[i]);
            }
        }
        s.iter_mut().for_each(|x| *x = 0.0);
        for (i, &a) in us.iter().enumerate() {
            for (idx, w) in sk.weights.iter().enumerate() {
                let y = sk.partner(i, idx, cells);
                let c = w * moll.chi_delta(a - vs[y]);
                if c == 0.0 {
                    continue;
                }
                for (m, sm) in s.iter_mut().enumerate() {
                    *sm += (gu[m * cells + i] - gv[m * cells + y]) * c;
                }
            }
        }
        let db = path.increments(n);
        let mut dk = 0.0;
        let mut s2 = 0.0;
        for m in 0..modes {
            let sm = s[m] * dx2;
            dk += sm * db[m];
            s2 += sm * sm;
        }
        k += amp * dk;
        qv += amp * amp * s2 * path.dt();
        sup_square = sup_square.max(k * k);
    }
    Ok(MartingaleSample {
        terminal: k,
        sup_square,
        quadratic_variation: qv,
    })
}

/// Ensemble checks on `K̃`: the 95% interval for `E K̃(1)` must contain 0,
/// and Doob's inequality `E sup K̃² ≤ 4 E⟨K̃⟩₁` must hold up to three
/// standard errors of the ratio estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub n: usize,
    pub mean_terminal: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_covers_zero: bool,
    pub mean_sup_square: f64,
    pub mean_quadratic_variation: f64,
    /// `mean(sup K̃²) / mean(⟨K̃⟩₁)`; 0 when both vanish.
    pub doob_ratio: f64,
    /// Relative standard error of `doob_ratio` (delta method).
    pub doob_ratio_se: f64,
    pub doob_pass: bool,
}

impl MartingaleReport {
    pub fn pass(&self) -> bool {
        self.mean_covers_zero && self.doob_pass
    }
}

pub fn martingale_diagnostic(samples: &[MartingaleSample]) -> Result<MartingaleReport> {
    let n = samples.len();
    if n < MIN_MARTINGALE_PATHS {
        return Err(Error::Precondition(format!(
            "martingale diagnostic needs at least {MIN_MARTINGALE_PATHS} paths, got {n}"
        )));
    }
    let term: Vec<f64> = samples.iter().map(|s| s.terminal).collect();
    let sup: Vec<f64> = samples.iter().map(|s| s.sup_square).collect();
    let qv: Vec<f64> = samples.iter().map(|s| s.quadratic_variation).collect();
    let (mean_terminal, se_terminal) = mean_and_se(&term);
    let (ci_lo, ci_hi) = (mean_terminal - Z95 * se_terminal, mean_terminal + Z95 * se_terminal);
    let (ms, ses) = mean_and_se(&sup);
    let (mq, seq) = mean_and_se(&qv);
    let (doob_ratio, doob_ratio_se) = if ms == 0.0 && mq == 0.0 {
        (0.0, 0.0)
    } else {
        let nf = n as f64;
        let cov = sup
            .iter()
            .zip(&qv)
            .map(|(a, b)| (a - ms) * (b - mq))
            .sum::<f64>()
            / (nf - 1.0)
            / nf;
        let rel2 = (ses / ms).powi(2) + (seq / mq).powi(2) - 2.0 * cov / (ms * mq);
        (ms / mq, rel2.max(0.0).sqrt())
    };
    Ok(MartingaleReport {
        n,
        mean_terminal,
        ci_lo,
        ci_hi,
        mean_covers_zero: ci_lo <= 0.0 && 0.0 <= ci_hi,
        mean_sup_square: ms,
        mean_quadratic_variation: mq,
        doob_ratio,
        doob_ratio_se,
        doob_pass: doob_ratio <= 4.0 * (1.0 + 3.0 * doob_ratio_se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_paths() {
        let s = MartingaleSample {
            terminal: 0.0,
            sup_square: 0.0,
            quadratic_variation: 0.0,
        };
        assert!(matches!(martingale_diagnostic(&[s; 10]), Err(Error::Precondition(_))));
        let r = martingale_diagnostic(&[s; 100]).unwrap();
        assert!(r.pass());
        assert_eq!(r.doob_ratio, 0.0);
    }
}
