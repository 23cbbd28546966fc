//! Signed log-magnitude arithmetic and deterministic summation.
//!
//! Coefficient magnitudes like `h(k)` overflow the double range long before
//! the quantities we actually report do, so every long sum in the crate is
//! carried as `sign * exp(log_abs)` and accumulated with the max-factored
//! log-sum-exp trick. Deterministic pairwise reduction keeps Monte Carlo
//! aggregates independent of worker count.

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Zero is `sign == 0`, `log_abs == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSigned {
    pub log_abs: f64,
    pub sign: i8,
}

impl LogSigned {
    pub const ZERO: LogSigned = LogSigned {
        log_abs: f64::NEG_INFINITY,
        sign: 0,
    };

    pub fn new(log_abs: f64, sign: i8) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { log_abs, sign }
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                log_abs: x.abs().ln(),
                sign: if x > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// Back to a plain double; overflows to +-inf for huge magnitudes.
    pub fn value(self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.log_abs + other.log_abs, self.sign * other.sign)
    }

    pub fn neg(self) -> Self {
        Self::new(self.log_abs, -self.sign)
    }

    /// Multiply by `exp(dlog)` without leaving log space.
    pub fn scale_log(self, dlog: f64) -> Self {
        Self::new(self.log_abs + dlog, self.sign)
    }

    pub fn abs(self) -> Self {
        Self::new(self.log_abs, self.sign.abs())
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(self) -> Self {
        debug_assert!(self.sign >= 0);
        Self::new(self.log_abs * 0.5, self.sign)
    }
}

/// Accumulator for `sum_i sign_i * exp(log_i)` that factors out the running
/// maximum log so the partial sums stay in range. Positive and negative mass
/// are compensated separately (Neumaier).
#[derive(Debug, Clone)]
pub struct SignedLogSum {
    max_log: f64,
    pos: f64,
    pos_c: f64,
    neg: f64,
    neg_c: f64,
}

impl Default for SignedLogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl SignedLogSum {
    pub fn new() -> Self {
        Self {
            max_log: f64::NEG_INFINITY,
            pos: 0.0,
            pos_c: 0.0,
            neg: 0.0,
            neg_c: 0.0,
        }
    }

    pub fn push(&mut self, term: LogSigned) {
        if term.sign == 0 {
            return;
        }
        if term.log_abs > self.max_log {
            let scale = if self.max_log == f64::NEG_INFINITY {
                0.0
            } else {
                (self.max_log - term.log_abs).exp()
            };
            self.pos *= scale;
            self.pos_c *= scale;
            self.neg *= scale;
            self.neg_c *= scale;
            self.max_log = term.log_abs;
        }
        let w = (term.log_abs - self.max_log).exp();
        if term.sign > 0 {
            neumaier_add(&mut self.pos, &mut self.pos_c, w);
        } else {
            neumaier_add(&mut self.neg, &mut self.neg_c, w);
        }
    }

    pub fn push_log(&mut self, log_abs: f64, sign: i8) {
        self.push(LogSigned::new(log_abs, sign));
    }

    pub fn total(&self) -> LogSigned {
        if self.max_log == f64::NEG_INFINITY {
            return LogSigned::ZERO;
        }
        let s = (self.pos + self.pos_c) - (self.neg + self.neg_c);
        if s == 0.0 {
            LogSigned::ZERO
        } else {
            LogSigned::new(self.max_log + s.abs().ln(), if s > 0.0 { 1 } else { -1 })
        }
    }
}

/// One Neumaier step: `sum += x` with running compensation `c`.
#[inline]
pub fn neumaier_add(sum: &mut f64, c: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *c += (*sum - t) + x;
    } else {
        *c += (x - t) + *sum;
    }
    *sum = t;
}

/// Compensated sequential sum.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &v in values {
        neumaier_add(&mut s, &mut c, v);
    }
    s + c
}

/// Sum over a fixed binary tree of indices. The result depends only on the
/// slice contents, never on thread scheduling, so Monte Carlo reductions are
/// reproducible across worker counts.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return neumaier_sum(values);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean and standard error via the fixed-tree reduction.
/// Returns `(mean, std_error, sample_variance)`; SE is 0 for n < 2.
pub fn mean_and_se(values: &[f64]) -> (f64, f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / m as f64;
    if m < 2 {
        return (mean, 0.0, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (m as f64 - 1.0);
    (mean, (var / m as f64).sqrt(), var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_logsum_matches_direct() {
        let xs = [3.25, -1.5, 0.125, -2.0, 7.75];
        let mut acc = SignedLogSum::new();
        for &x in &xs {
            acc.push(LogSigned::from_value(x));
        }
        let direct: f64 = xs.iter().sum();
        assert!((acc.total().value() - direct).abs() < 1e-14 * direct.abs());
    }

    #[test]
    fn logsum_survives_huge_magnitudes() {
        // exp(1000) - exp(1000) + exp(999) without overflow
        let mut acc = SignedLogSum::new();
        acc.push_log(1000.0, 1);
        acc.push_log(1000.0, -1);
        acc.push_log(999.0, 1);
        let t = acc.total();
        assert_eq!(t.sign, 1);
        assert!((t.log_abs - 999.0).abs() < 1e-12);
    }

    #[test]
    fn cancellation_to_zero() {
        let mut acc = SignedLogSum::new();
        acc.push(LogSigned::from_value(5.0));
        acc.push(LogSigned::from_value(-5.0));
        assert!(acc.total().is_zero());
    }

    #[test]
    fn pairwise_is_order_of_magnitude_accurate() {
        let v: Vec<f64> = (0..100_000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let s = pairwise_sum(&v);
        // harmonic number H_100000
        let mut exact = 0.0f64;
        let mut c = 0.0;
        for i in (0..100_000).rev() {
            neumaier_add(&mut exact, &mut c, 1.0 / (i as f64 + 1.0));
        }
        assert!((s - (exact + c)).abs() < 1e-10);
    }
}
