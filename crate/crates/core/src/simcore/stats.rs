use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided normal quantile for a central interval of coverage `level`.
pub fn z_for_level(level: f64) -> f64 {
    let n = Normal::standard();
    n.inverse_cdf(0.5 + 0.5 * level)
}

/// `(k/n, half-width)`: normal approximation, Wilson interval near 0 and 1.
pub fn proportion_ci(k: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = k as f64 / nf;
    let var = p * (1.0 - p) / nf;
    let half = if (0.05..=0.95).contains(&p) {
        z * var.sqrt()
    } else {
        let z2 = z * z;
        z / (1.0 + z2 / nf) * (var + z2 / (4.0 * nf * nf)).sqrt()
    };
    (p, half)
}

/// Compensated (Neumaier) sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Count, sum and sum of squares, merged in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MeanAccumulator {
    pub(crate) count: u64,
    sum: NeumaierSum,
    sum_sq: NeumaierSum,
}

impl MeanAccumulator {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub(crate) fn merge(&mut self, other: &MeanAccumulator) {
        self.count += other.count;
        self.sum.add(other.sum.value());
        self.sum_sq.add(other.sum_sq.value());
    }

    pub(crate) fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    pub(crate) fn standard_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.mean();
        let var = ((self.sum_sq.value() - n * m * m) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_sigma_level() {
        assert_relative_eq!(z_for_level(super::super::ONE_SIGMA), 1.0, max_relative = 1e-9);
        assert_relative_eq!(z_for_level(0.95), 1.959_963_984_540_054, max_relative = 1e-9);
    }

    #[test]
    fn interval_switches_to_wilson_in_tails() {
        let (p, h) = proportion_ci(500, 1000, 1.0);
        assert_eq!(p, 0.5);
        assert_relative_eq!(h, (0.25f64 / 1000.0).sqrt(), max_relative = 1e-12);
        let (p, h) = proportion_ci(0, 1000, 1.0);
        assert_eq!(p, 0.0);
        assert!(h > 0.0);
        let (_, h) = proportion_ci(1000, 1000, 2.0);
        assert!(h > 0.0);
    }

    #[test]
    fn compensated_sum() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn mean_and_error() {
        let mut a = MeanAccumulator::default();
        let mut b = MeanAccumulator::default();
        for x in [1.0, 2.0, 3.0] {
            a.push(x);
        }
        b.push(4.0);
        a.merge(&b);
        assert_eq!(a.mean(), 2.5);
        assert_relative_eq!(a.standard_error(), (5.0f64 / 3.0 / 4.0).sqrt(), max_relative = 1e-12);
    }
}
