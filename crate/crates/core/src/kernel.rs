//! The variance function `f_n(x) = sum_k c_k^2 x^k` and its relatives.
//!
//! Everything the density formulas need reduces to `f_n` and the weighted
//! sums `sum k c_k^2 x^{k-1}`, `sum k^2 c_k^2 x^{k-1}`, all evaluated in log
//! space with the maximum term factored out: near `x -> 1` with large `L` the
//! terms are sharply peaked and naive accumulation would overflow long before
//! the log of the sum does. Direct summation is the evaluator of record; the
//! recursions of the binomial kernels serve as test oracles only, because
//! they lose accuracy near the `x = 1` pole where the density analysis
//! concentrates.

use crate::error::Error;
use crate::logsum::{neumaier_add, LogSigned};
use crate::profiles::{CoefficientProfile, GeneralizedPolynomial};
use crate::Result;

/// Precomputed log-squared-coefficients of one realized profile.
#[derive(Debug, Clone)]
pub struct VarianceKernel {
    /// `log(c_k^2)`; `-inf` entries mark zero coefficients.
    log_c2: Vec<f64>,
    /// `log|c_k|` with sign, for mean functions.
    coeff_logs: Vec<LogSigned>,
}

/// Value of `f` together with its logarithm (the log stays finite when the
/// value overflows).
#[derive(Debug, Clone, Copy)]
pub struct FValue {
    pub value: f64,
    pub log_value: f64,
}

/// Logs of the moment sums at one point `x = t^2`:
/// `p = f(x)`, `fp = f'(x)`, `q = sum k^2 c_k^2 x^{k-1}`, `fpp = f''(x)`.
#[derive(Debug, Clone, Copy)]
pub struct MomentLogs {
    pub log_p: f64,
    pub log_fp: f64,
    pub log_q: f64,
    pub log_fpp: f64,
}

impl VarianceKernel {
    pub fn from_profile(profile: &CoefficientProfile) -> Result<Self> {
        let seq = profile.coeff_sequence()?;
        Ok(Self {
            log_c2: seq.logs.iter().map(|l| 2.0 * l.log_abs).collect(),
            coeff_logs: seq.logs,
        })
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        let coeff_logs: Vec<LogSigned> = coeffs.iter().map(|&c| LogSigned::from_value(c)).collect();
        Self {
            log_c2: coeff_logs.iter().map(|l| 2.0 * l.log_abs).collect(),
            coeff_logs,
        }
    }

    pub fn degree(&self) -> usize {
        self.log_c2.len() - 1
    }

    pub fn coeff_logs(&self) -> &[LogSigned] {
        &self.coeff_logs
    }

    fn require_nonneg(x: f64) -> Result<()> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!(
                "variance kernel evaluates at x = t^2 >= 0, got {x}"
            )));
        }
        Ok(())
    }

    /// `f(x) = sum c_k^2 x^k` by log-sum-exp with compensated accumulation;
    /// exact `c_0^2` at x = 0.
    pub fn eval_f(&self, x: f64) -> Result<FValue> {
        Self::require_nonneg(x)?;
        let m = self.moment_logs(x)?;
        Ok(FValue {
            value: m.log_p.exp(),
            log_value: m.log_p,
        })
    }

    /// `(f, f', f'')` at x; values may overflow to `inf` for extreme inputs,
    /// the log forms from [`Self::moment_logs`] do not.
    pub fn eval_f_derivs(&self, x: f64) -> Result<(f64, f64, f64)> {
        let m = self.moment_logs(x)?;
        Ok((m.log_p.exp(), m.log_fp.exp(), m.log_fpp.exp()))
    }

    /// All four nonnegative moment sums in one pass: a single max is factored
    /// out of `c_k^2 x^k` and the weights `k`, `k^2`, `k(k-1)` ride along, so
    /// each term costs one `exp`.
    pub fn moment_logs(&self, x: f64) -> Result<MomentLogs> {
        Self::require_nonneg(x)?;
        let logs = &self.log_c2;
        if x == 0.0 {
            let lc = |k: usize| logs.get(k).copied().unwrap_or(f64::NEG_INFINITY);
            return Ok(MomentLogs {
                log_p: lc(0),
                log_fp: lc(1),
                log_q: lc(1),
                log_fpp: std::f64::consts::LN_2 + lc(2),
            });
        }
        let lx = x.ln();
        let mut max_log = f64::NEG_INFINITY;
        for (k, &lc) in logs.iter().enumerate() {
            let t = lc + k as f64 * lx;
            if t > max_log {
                max_log = t;
            }
        }
        if max_log == f64::NEG_INFINITY {
            return Err(Error::Domain("kernel has no nonzero coefficient".into()));
        }
        let (mut s0, mut c0) = (0.0, 0.0);
        let (mut s1, mut c1) = (0.0, 0.0);
        let (mut s2, mut c2) = (0.0, 0.0);
        for (k, &lc) in logs.iter().enumerate() {
            let t = lc + k as f64 * lx;
            if t == f64::NEG_INFINITY {
                continue;
            }
            let e = (t - max_log).exp();
            let kf = k as f64;
            neumaier_add(&mut s0, &mut c0, e);
            neumaier_add(&mut s1, &mut c1, kf * e);
            neumaier_add(&mut s2, &mut c2, kf * kf * e);
        }
        let s0 = s0 + c0;
        let s1 = s1 + c1;
        let s2 = s2 + c2;
        Ok(MomentLogs {
            log_p: max_log + s0.ln(),
            log_fp: max_log + s1.ln() - lx,
            log_q: max_log + s2.ln() - lx,
            log_fpp: max_log + (s2 - s1).max(0.0).ln() - 2.0 * lx,
        })
    }
}

/// Signed log of the generalized binomial coefficient `b_{k,L}`, defined for
/// every real `L` (negative factors flip the sign; `L` in `{0,-1,-2,...}`
/// eventually yields exact zeros).
pub fn binom_coeff_signed(l: f64, k: u64) -> LogSigned {
    let mut log_abs = 0.0;
    let mut sign = 1i8;
    for j in 0..k {
        let factor = l + j as f64;
        if factor == 0.0 {
            return LogSigned::ZERO;
        }
        if factor < 0.0 {
            sign = -sign;
        }
        log_abs += factor.abs().ln() - ((j + 1) as f64).ln();
    }
    LogSigned::new(log_abs, sign)
}

/// `f_{n,L}(x) = sum_{k<=n} b_{k,L} x^k` by direct compensated summation with
/// the iterative term recurrence `term_{k+1} = term_k * x (L+k)/(k+1)`.
///
/// Within `1e-12` of `x = 1` the exact hockey-stick value
/// `f_{n,L}(1) = b_{n,L+1}` is returned instead, removing the recursion pole.
pub fn f_binomial(n: usize, l: f64, x: f64) -> f64 {
    if (x - 1.0).abs() < 1e-12 {
        return binom_coeff_signed(l + 1.0, n as u64).value();
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    for k in 0..n {
        term *= x * (l + k as f64) / (k as f64 + 1.0);
        neumaier_add(&mut sum, &mut comp, term);
    }
    sum + comp
}

/// `~f_{n,L}(x) = x^n f_{n,L}(1/x) / b_{n,L} = sum_k (b_{n-k,L}/b_{n,L}) x^k`
/// by direct summation of the ratio form
/// `ratio_k = ratio_{k-1} * (n-k+1)/(L+n-k)`.
///
/// Requires `L + n - k != 0` along the way, i.e. `L` not in
/// `{0, -1, ..., -(n-1)}`.
pub fn f_reciprocal(n: usize, l: f64, x: f64) -> Result<f64> {
    let mut ratio = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    for k in 1..=n {
        let denom = l + (n - k) as f64;
        if denom == 0.0 {
            return Err(Error::Domain(format!(
                "f_reciprocal undefined: L = {l} hits a pole at k = {k} (n = {n})"
            )));
        }
        ratio *= (n - k + 1) as f64 / denom;
        neumaier_add(&mut sum, &mut comp, ratio * x.powi(k as i32));
    }
    Ok(sum + comp)
}

/// The limiting variance function
/// `f_inf(x) = g(x) + sum_m alpha_m (1-x)^{-L_m}` with polynomial head `g`.
#[derive(Debug, Clone)]
pub struct LimitingKernel {
    h: GeneralizedPolynomial,
    head: Vec<f64>,
}

impl LimitingKernel {
    pub fn new(h: GeneralizedPolynomial, head: Vec<f64>) -> Self {
        Self { h, head }
    }

    pub fn from_profile(profile: &CoefficientProfile) -> Option<Self> {
        profile.limiting().map(|d| Self::new(d.h, d.head))
    }

    pub fn genpoly(&self) -> &GeneralizedPolynomial {
        &self.h
    }

    /// Closed-form `(f_inf, f_inf', f_inf'')` at `x in [0, 1)`; no
    /// truncation error.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "f_inf is defined on [0, 1), got {x}"
            )));
        }
        let om = 1.0 - x;
        let (mut f, mut f1, mut f2) = (0.0f64, 0.0, 0.0);
        for t in self.h.terms() {
            let l = t.exponent;
            let a = t.coefficient;
            let base = a * om.powf(-l);
            f += base;
            f1 += base * l / om;
            f2 += base * l * (l + 1.0) / (om * om);
        }
        let mut xp = 1.0;
        for (k, &g) in self.head.iter().enumerate() {
            let kf = k as f64;
            f += g * xp;
            if k >= 1 {
                f1 += g * kf * xp / x.max(f64::MIN_POSITIVE);
            }
            if k >= 2 {
                f2 += g * kf * (kf - 1.0) * xp / (x * x).max(f64::MIN_POSITIVE);
            }
            xp *= x;
        }
        Ok((f, f1, f2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ProfileKind;

    fn kac_kernel(n: usize) -> VarianceKernel {
        VarianceKernel::from_profile(&CoefficientProfile::new(ProfileKind::Kac, n)).unwrap()
    }

    #[test]
    fn kac_geometric_series() {
        for n in [1usize, 4, 16, 200] {
            let k = kac_kernel(n);
            let f = k.eval_f(0.5).unwrap().value;
            let exact = 2.0 * (1.0 - 0.5f64.powi(n as i32 + 1));
            assert!((f - exact).abs() <= 1e-14 * exact, "n={n}");
        }
    }

    #[test]
    fn value_at_zero_is_c0_squared() {
        let k = VarianceKernel::from_coeffs(&[3.0, 1.0, 2.0]);
        assert_eq!(k.eval_f(0.0).unwrap().value, 9.0);
    }

    #[test]
    fn negative_x_rejected() {
        assert!(kac_kernel(4).eval_f(-0.1).is_err());
    }

    #[test]
    fn kac_derivative_sums_at_one() {
        // n=2: f=3, f'=3, f''=2
        let k = kac_kernel(2);
        let (f, f1, f2) = k.eval_f_derivs(1.0).unwrap();
        assert!((f - 3.0).abs() < 1e-13);
        assert!((f1 - 3.0).abs() < 1e-13);
        assert!((f2 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = VarianceKernel::from_profile(&CoefficientProfile::new(
            ProfileKind::Hyperbolic { l: 2.5 },
            40,
        ))
        .unwrap();
        for &x in &[0.1, 0.35, 0.7, 0.95] {
            let (_, f1, f2) = k.eval_f_derivs(x).unwrap();
            let h = 1e-6 * x.max(0.1);
            let fp = k.eval_f(x + h).unwrap().value;
            let fm = k.eval_f(x - h).unwrap().value;
            let f0 = k.eval_f(x).unwrap().value;
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            assert!((f1 - d1).abs() <= 1e-6 * f1.abs(), "x={x}");
            assert!((f2 - d2).abs() <= 1e-4 * f2.abs(), "x={x}");
        }
    }

    #[test]
    fn hyperbolic_log_ratio_limit_at_zero() {
        // f'/f at x -> 0 tends to c_1^2/c_0^2 = L
        let l = 3.5;
        let k = VarianceKernel::from_profile(&CoefficientProfile::new(
            ProfileKind::Hyperbolic { l },
            60,
        ))
        .unwrap();
        let x = 1e-9;
        let (f, f1, _) = k.eval_f_derivs(x).unwrap();
        assert!((f1 / f - l).abs() < 1e-7);
    }

    #[test]
    fn scaling_moves_f_quadratically_and_cancels_in_ratios() {
        let base: Vec<f64> = (0..30).map(|k| 1.0 + (k as f64 * 0.37).sin()).collect();
        let lam = 3.7e2;
        let scaled: Vec<f64> = base.iter().map(|c| lam * c).collect();
        let k0 = VarianceKernel::from_coeffs(&base);
        let k1 = VarianceKernel::from_coeffs(&scaled);
        for &x in &[0.2, 0.8, 1.3] {
            let (f0, f10, f20) = k0.eval_f_derivs(x).unwrap();
            let (f1, f11, f21) = k1.eval_f_derivs(x).unwrap();
            assert!((f1 / f0 - lam * lam).abs() < 1e-10 * lam * lam);
            let r0 = f10 / f0;
            let r1 = f11 / f1;
            assert!((r0 - r1).abs() <= 1e-12 * r0.abs());
            let s0 = f20 / f0 - r0 * r0;
            let s1 = f21 / f1 - r1 * r1;
            assert!((s0 - s1).abs() <= 1e-12 * (1.0 + s0.abs()));
        }
    }

    #[test]
    fn binomial_kernel_geometric_for_l_one() {
        for &x in &[-0.9, -0.5, 0.3, 0.9, 0.999] {
            let n = 50;
            let got = f_binomial(n, 1.0, x);
            let exact = (1.0 - x.powi(n as i32 + 1)) / (1.0 - x);
            assert!((got - exact).abs() <= 1e-12 * exact.abs(), "x={x}");
        }
    }

    #[test]
    fn binomial_recursion_cross_check() {
        // f_{n,L} = f_{n,L-1}/(1-x) - b_{n,L} x^{n+1}/(1-x)
        let (n, l, x) = (50usize, 2.5f64, 0.9f64);
        let lhs = f_binomial(n, l, x);
        let b = binom_coeff_signed(l, n as u64).value();
        let rhs = f_binomial(n, l - 1.0, x) / (1.0 - x) - b * x.powi(n as i32 + 1) / (1.0 - x);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
    }

    #[test]
    fn hockey_stick_at_one() {
        // sum_{k<=n} b_{k,L} = b_{n,L+1}, checked against the direct sum
        for &l in &[0.5, 1.0, 3.0] {
            let n = 30;
            let direct: f64 = (0..=n as u64).map(|k| binom_coeff_signed(l, k).value()).sum();
            let hs = binom_coeff_signed(l + 1.0, n as u64).value();
            assert!((direct - hs).abs() <= 1e-11 * hs.abs(), "L={l}");
            assert_eq!(f_binomial(n, l, 1.0), hs);
        }
    }

    #[test]
    fn binomial_alternating_bound_on_negative_axis() {
        // for L >= 1 and x in [-1, 0], |f_{n,L}(x)| <= 1 (alternating sum
        // with decreasing term modulus)
        for &l in &[1.0, 2.0, 4.0] {
            for &x in &[-1.0, -0.7, -0.25] {
                for n in [5usize, 21, 100] {
                    let v = f_binomial(n, l, x);
                    assert!(v.abs() <= 1.0 + 1e-12, "L={l} x={x} n={n} v={v}");
                }
            }
        }
    }

    #[test]
    fn reciprocal_kernel_geometric_for_l_one() {
        let n = 40;
        for &x in &[0.0, 0.3, 0.9] {
            let got = f_reciprocal(n, 1.0, x).unwrap();
            let exact = (1.0 - x.powi(n as i32 + 1)) / (1.0 - x);
            assert!((got - exact).abs() <= 1e-12 * exact.abs());
        }
        assert_eq!(f_reciprocal(17, 2.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn reciprocal_recursion_cross_check() {
        // ~f_{n,L} = 1/(1-x) - x/(1-x) * (L-1)/(L+n-1) * ~f_{n,L-1}
        for &(n, l, x) in &[(50usize, 2.5f64, 0.9f64), (80, 7.0, -0.5), (120, 3.5, 0.999)] {
            let lhs = f_reciprocal(n, l, x).unwrap();
            let rhs = 1.0 / (1.0 - x)
                - x / (1.0 - x) * ((l - 1.0) / (l + n as f64 - 1.0))
                    * f_reciprocal(n, l - 1.0, x).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0),
                "n={n} L={l} x={x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn reciprocal_pole_detected() {
        assert!(f_reciprocal(5, 0.0, 0.5).is_err());
        assert!(f_reciprocal(5, -2.0, 0.5).is_err());
    }

    #[test]
    fn limiting_pure_hyperbolic() {
        let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(2.0).unwrap(), vec![]);
        let (f, f1, f2) = lk.eval(0.75).unwrap();
        // (1-x)^{-2} and derivatives
        assert!((f - 16.0).abs() < 1e-12);
        assert!((f1 - 128.0).abs() < 1e-10);
        assert!((f2 - 1536.0).abs() < 1e-9);
    }

    #[test]
    fn limiting_kac_value() {
        let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(1.0).unwrap(), vec![]);
        assert!((lk.eval(0.75).unwrap().0 - 4.0).abs() < 1e-13);
        assert!(lk.eval(1.0).is_err());
    }

    #[test]
    fn truncation_converges_to_limit() {
        // u_n(x) = f_n(x)/f_inf(x) -> 1 monotonically at fixed x = 0.9
        let x = 0.9f64;
        for &l in &[1.0, 2.0, 4.0] {
            let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(l).unwrap(), vec![]);
            let fi = lk.eval(x).unwrap().0;
            let mut prev_gap = f64::INFINITY;
            for p in 6..=14 {
                let n = 1usize << p;
                let prof = CoefficientProfile::new(ProfileKind::Hyperbolic { l }, n);
                let f = VarianceKernel::from_profile(&prof)
                    .unwrap()
                    .eval_f(x)
                    .unwrap()
                    .value;
                let gap = (f / fi - 1.0).abs();
                assert!(gap <= prev_gap * (1.0 + 1e-12), "L={l} n={n}");
                prev_gap = gap;
            }
            assert!(prev_gap < 1e-12);
        }
    }
}
