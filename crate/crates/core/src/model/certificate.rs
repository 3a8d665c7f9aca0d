/// Slack allowed on sampled inequality ratios for floating-point roundoff.
pub const RATIO_SLACK: f64 = 1e-12;

/// Outcome of one sampled inequality `lhs ≤ rhs` over a validation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: String,
    pub pass: bool,
    /// Largest `lhs / rhs` attained; `+inf` when some `rhs` is zero but `lhs` is not.
    pub worst_ratio: f64,
    /// Lattice coordinates at which the worst ratio was attained.
    pub worst_at: Vec<f64>,
    pub samples: usize,
}

/// Running maximum of `lhs / rhs` over lattice samples.
#[derive(Debug)]
pub(crate) struct RatioTracker {
    name: String,
    worst: f64,
    worst_at: Vec<f64>,
    samples: usize,
}

impl RatioTracker {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            worst: 0.0,
            worst_at: Vec::new(),
            samples: 0,
        }
    }

    pub fn record(&mut self, lhs: f64, rhs: f64, at: &[f64]) {
        self.samples += 1;
        let ratio = if lhs <= 0.0 {
            0.0
        } else if rhs <= 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        if ratio > self.worst || self.samples == 1 {
            self.worst = ratio;
            self.worst_at = at.to_vec();
        }
    }

    pub fn finish(self) -> InequalityCheck {
        InequalityCheck {
            pass: self.worst <= 1.0 + RATIO_SLACK,
            name: self.name,
            worst_ratio: self.worst,
            worst_at: self.worst_at,
            samples: self.samples,
        }
    }
}

/// `n` equispaced points covering `[-r, r]` inclusive.
pub fn symmetric_lattice(r: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64)
        .collect()
}
