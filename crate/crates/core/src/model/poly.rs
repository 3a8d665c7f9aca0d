/// Dense real polynomial, coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    /// All distinct real roots, ascending.
    ///
    /// Roots of the derivative split the line into monotone pieces, each
    /// holding at most one root, which is then bracketed and bisected.
    pub fn real_roots(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        if n <= 1 {
            return Vec::new();
        }
        if n == 2 {
            return vec![-self.coeffs[0] / self.coeffs[1]];
        }
        let lead = self.coeffs[n - 1];
        // Cauchy bound on root magnitude.
        let bound = 1.0
            + self.coeffs[..n - 1]
                .iter()
                .map(|c| (c / lead).abs())
                .fold(0.0, f64::max);
        let scale = self.coeffs.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
        let crit = self.derivative().real_roots();
        let mut knots = Vec::with_capacity(crit.len() + 2);
        knots.push(-bound);
        knots.extend(crit.iter().copied().filter(|c| c.abs() < bound));
        knots.push(bound);

        let mut roots: Vec<f64> = Vec::new();
        let near_zero = |x: f64| self.eval(x).abs() <= 1e-12 * scale * (1.0 + x.abs().powi(n as i32 - 1));
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if near_zero(lo) {
                roots.push(lo);
                continue;
            }
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo.signum() != fhi.signum() && !near_zero(hi) {
                roots.push(bisect(|x| self.eval(x), lo, hi));
            }
        }
        if near_zero(bound) {
            roots.push(bound);
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        roots
    }

    /// `max |p|` over `[lo, hi]`.
    pub fn max_abs_on(&self, lo: f64, hi: f64, critical_points: &[f64]) -> f64 {
        let mut m = self.eval(lo).abs().max(self.eval(hi).abs());
        for &c in critical_points {
            if c > lo && c < hi {
                m = m.max(self.eval(c).abs());
            }
        }
        m
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
