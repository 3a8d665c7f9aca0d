use crate::error::{Error, Result};

/// Piecewise-constant control `hₖ(t)` on `B` uniform bins of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    modes: usize,
    bins: usize,
    /// Row-major `modes × bins`.
    values: Vec<f64>,
}

impl Control {
    pub fn new(modes: usize, bins: usize, values: Vec<f64>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("a control needs at least one bin".into()));
        }
        if values.len() != modes * bins {
            return Err(Error::Precondition(format!(
                "control of {modes} modes x {bins} bins needs {} values, got {}",
                modes * bins,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::numerical(format!("non-finite control value {v}")));
        }
        Ok(Self {
            modes,
            bins,
            values,
        })
    }

    pub fn zeros(modes: usize, bins: usize) -> Self {
        Self::constant(modes, bins, &vec![0.0; modes])
    }

    /// `hₖ ≡ levels[k]`.
    pub fn constant(modes: usize, bins: usize, levels: &[f64]) -> Self {
        assert_eq!(levels.len(), modes);
        assert!(bins > 0);
        let values = levels
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, bins))
            .collect();
        Self {
            modes,
            bins,
            values,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mode: usize, bin: usize) -> f64 {
        self.values[mode * self.bins + bin]
    }

    /// Bin holding time `t`, with `t = 1` assigned to the last bin.
    pub fn bin_of(&self, t: f64) -> usize {
        ((t * self.bins as f64).floor().max(0.0) as usize).min(self.bins - 1)
    }

    /// `hₖ(t)`.
    pub fn at(&self, mode: usize, t: f64) -> f64 {
        self.get(mode, self.bin_of(t))
    }

    /// Same control on `factor` times as many bins.
    pub fn refine(&self, factor: usize) -> Control {
        assert!(factor >= 1);
        let bins = self.bins * factor;
        let values = (0..self.modes)
            .flat_map(|k| (0..bins).map(move |b| (k, b / factor)))
            .map(|(k, b)| self.get(k, b))
            .collect();
        Control {
            modes: self.modes,
            bins,
            values,
        }
    }
}

/// `R(h) = ½ Σₖ ∫₀¹ hₖ(t)² dt`, exact for piecewise-constant controls.
pub fn action(h: &Control) -> f64 {
    0.5 * h.values.iter().map(|v| v * v).sum::<f64>() / h.bins as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_examples() {
        assert_eq!(action(&Control::zeros(3, 4)), 0.0);
        assert!((action(&Control::constant(1, 8, &[0.7])) - 0.245).abs() < 1e-15);
        assert_eq!(action(&Control::constant(2, 5, &[1.0, 2.0])), 2.5);
    }

    #[test]
    fn refine_preserves_action_and_values() {
        let h = Control::new(2, 3, vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.5]).unwrap();
        let r = h.refine(4);
        assert_eq!(r.bins(), 12);
        assert!((action(&r) - action(&h)).abs() < 1e-14);
        for k in 0..2 {
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                assert_eq!(r.at(k, t), h.at(k, t));
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Control::new(1, 0, vec![]).is_err());
        assert!(Control::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Control::new(1, 1, vec![f64::NAN]).is_err());
    }
}
