//! Exact densities of real zeros in the Gaussian case.
//!
//! The production evaluator is the log-variance form
//! `rho(t) = (1/pi) sqrt(g'(t^2) + t^2 g''(t^2))` with `g = log f`; expanded
//! in the moment sums it is `sqrt(P Q - R^2) / (pi P)` with `P = f(x)`,
//! `Q = sum k^2 c_k^2 x^{k-1}`, `R^2 = x f'(x)^2`, all combined in log space
//! so that degrees in the tens of thousands stay finite.
//!
//! The `O(n^2)` pairwise form
//! `rho^2 = (1/pi^2) sum_{k<m} (m-k)^2 c_k^2 c_m^2 x^{k+m-1} / f(x)^2`
//! is kept as an independent oracle. The pair sum runs over unordered pairs:
//! the ordered variant would double the numerator and make a Gaussian linear
//! polynomial integrate to sqrt(2) real roots instead of its almost-sure 1.

use crate::error::Error;
use crate::kernel::{LimitingKernel, VarianceKernel};
use crate::logsum::{LogSigned, SignedLogSum};
use crate::profiles::{CoefficientProfile, ProfileKind};
use crate::quad::{self, Interval, QuadResult};
use crate::special::erf_paper;
use crate::Result;
use serde::Serialize;
use std::f64::consts::PI;

/// Which evaluator produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    EkLogvar,
    EkRaw,
    KacClosed,
    KacriceMean,
    Limiting,
}

/// A sampled density curve, CSV-ready.
#[derive(Debug, Clone, Serialize)]
pub struct DensityCurve {
    pub t: Vec<f64>,
    pub rho: Vec<f64>,
    pub method: DensityMethod,
    pub n: usize,
    pub profile_id: String,
}

/// Relative clamp for the radicand `S = PQ - R^2`: analytically `S >= 0`, so
/// negatives up to this size are roundoff and map to density 0; anything
/// larger is a numerical breakdown the caller must address.
const RADICAND_CLAMP: f64 = 1e-12;

/// Log of `S = P Q - R^2` given the moment logs; `Ok(-inf)` encodes `S = 0`.
fn log_radicand(log_p: f64, log_q: f64, log_r2: f64) -> Result<f64> {
    let log_pq = log_p + log_q;
    if log_r2 == f64::NEG_INFINITY {
        return Ok(log_pq);
    }
    let d = log_r2 - log_pq;
    if d >= 0.0 {
        if d <= RADICAND_CLAMP {
            return Ok(f64::NEG_INFINITY);
        }
        return Err(Error::NumericalBreakdown(format!(
            "radicand P*Q - R^2 negative beyond clamp: log(R^2/PQ) = {d:.3e}"
        )));
    }
    Ok(log_pq + (-d.exp()).ln_1p())
}

/// Density of real zeros by the log-variance form; even in `t`.
pub fn density_ek(kernel: &VarianceKernel, t: f64) -> Result<f64> {
    let x = t * t;
    let m = kernel.moment_logs(x)?;
    let log_r2 = if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln() + 2.0 * m.log_fp
    };
    let log_s = log_radicand(m.log_p, m.log_q, log_r2)?;
    Ok((0.5 * log_s - m.log_p).exp() / PI)
}

/// Independent oracle: the raw pairwise form, `O(n^2)` in the degree.
pub fn density_ek_pairwise(kernel: &VarianceKernel, t: f64) -> Result<f64> {
    let x = t * t;
    let m = kernel.moment_logs(x)?;
    let logs: Vec<f64> = kernel
        .coeff_logs()
        .iter()
        .map(|l| 2.0 * l.log_abs)
        .collect();
    let lx = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    let mut max_log = f64::NEG_INFINITY;
    let n = logs.len();
    let term = |k: usize, mm: usize| -> f64 {
        let e = (k + mm) as i64 - 1;
        let pow = if e == 0 {
            0.0
        } else if lx == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        } else {
            e as f64 * lx
        };
        logs[k] + logs[mm] + 2.0 * ((mm - k) as f64).ln() + pow
    };
    for k in 0..n {
        for mm in (k + 1)..n {
            max_log = max_log.max(term(k, mm));
        }
    }
    if max_log == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let mut s = 0.0;
    let mut c = 0.0;
    for k in 0..n {
        for mm in (k + 1)..n {
            let t = term(k, mm);
            if t > f64::NEG_INFINITY {
                crate::logsum::neumaier_add(&mut s, &mut c, (t - max_log).exp());
            }
        }
    }
    let log_num = max_log + (s + c).ln();
    Ok((0.5 * log_num - m.log_p).exp() / PI)
}

/// Closed-form Kac density
/// `rho_n(t) = (1/pi) sqrt( 1/(t^2-1)^2 - (n+1)^2 t^{2n} / (t^{2n+2}-1)^2 )`,
/// evaluated through `expm1`/`log1p` so the cancellation between the two
/// poles stays controlled near `|t| = 1`; at `|t| = 1` the limit
/// `sqrt(n(n+2)/12)/pi` is returned, and `|t| > 1` maps through the
/// self-reciprocal symmetry `rho(t) = rho(1/t)/t^2`.
pub fn kac_density_closed(n: usize, t: f64) -> f64 {
    let at = t.abs();
    if at > 1.0 {
        let inv = 1.0 / at;
        return kac_density_closed(n, inv) * inv * inv;
    }
    let x = at * at;
    let s = 1.0 - x;
    let nf = n as f64;
    if s < 1e-14 {
        return (nf * (nf + 2.0) / 12.0).sqrt() / PI;
    }
    let m = nf + 1.0;
    // u = (1 - x^m) / (m s), accurate for any m s
    let u = -f64::exp_m1(m * f64::ln_1p(-s)) / (m * s);
    // r = m^2 s^2 x^{m-1} / (1-x^m)^2, in the cancellation-free form
    let log_r = (m - 1.0) * f64::ln_1p(-s) - 2.0 * u.ln();
    let one_minus_r = -f64::exp_m1(log_r);
    let radicand = one_minus_r.max(0.0) / (s * s);
    radicand.sqrt() / PI
}

/// Gaussian mean structure `m(t) = mu * sum c_k t^k - shift(t)` for the
/// Kac-Rice decomposition; `shift` is a deterministic polynomial in monomial
/// order (crossing counts are counts of `P_n - shift` at zero level).
#[derive(Debug, Clone, Default)]
pub struct MeanSpec {
    pub mu: f64,
    pub shift: Vec<f64>,
}

impl MeanSpec {
    pub fn mean_only(mu: f64) -> Self {
        Self { mu, shift: vec![] }
    }

    /// `(m(t), m'(t))` as signed logs.
    fn eval(&self, coeff_logs: &[LogSigned], t: f64) -> (LogSigned, LogSigned) {
        let lt = LogSigned::from_value(t);
        let mu = LogSigned::from_value(self.mu);
        let mut m = SignedLogSum::new();
        let mut m1 = SignedLogSum::new();
        if !mu.is_zero() {
            for (k, &lc) in coeff_logs.iter().enumerate() {
                if lc.is_zero() {
                    continue;
                }
                let kf = k as f64;
                // mu c_k t^k
                if k == 0 {
                    m.push(mu.mul(lc));
                } else if !lt.is_zero() {
                    let tk = LogSigned::new(kf * lt.log_abs, if lt.sign < 0 && k % 2 == 1 { -1 } else { 1 });
                    m.push(mu.mul(lc).mul(tk));
                }
                // mu k c_k t^{k-1}
                if k == 1 {
                    m1.push(mu.mul(lc));
                } else if k >= 2 && !lt.is_zero() {
                    let tk = LogSigned::new(
                        (kf - 1.0) * lt.log_abs,
                        if lt.sign < 0 && (k - 1) % 2 == 1 { -1 } else { 1 },
                    );
                    m1.push(mu.mul(lc).scale_log(kf.ln()).mul(tk));
                }
            }
        }
        for (j, &a) in self.shift.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let la = LogSigned::from_value(-a);
            let jf = j as f64;
            if j == 0 {
                m.push(la);
            } else if !lt.is_zero() {
                let tj = LogSigned::new(jf * lt.log_abs, if lt.sign < 0 && j % 2 == 1 { -1 } else { 1 });
                m.push(la.mul(tj));
            }
            if j == 1 {
                m1.push(la);
            } else if j >= 2 && !lt.is_zero() {
                let tj = LogSigned::new(
                    (jf - 1.0) * lt.log_abs,
                    if lt.sign < 0 && (j - 1) % 2 == 1 { -1 } else { 1 },
                );
                m1.push(la.scale_log(jf.ln()).mul(tj));
            }
        }
        (m.total(), m1.total())
    }
}

/// The means, variances and covariance entering the Kac-Rice decomposition
/// at one point, in plain doubles (use the density functions for extreme
/// degrees; these are for inspection and invariant checks).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KacRiceTerms {
    pub m: f64,
    pub m_prime: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

pub fn kacrice_terms(kernel: &VarianceKernel, mean: &MeanSpec, t: f64) -> Result<KacRiceTerms> {
    let x = t * t;
    let ml = kernel.moment_logs(x)?;
    let (m, m1) = mean.eval(kernel.coeff_logs(), t);
    let p = ml.log_p.exp();
    let q = ml.log_q.exp();
    let r = t.signum() * (0.5 * x.ln() + ml.log_fp).exp();
    let r = if x == 0.0 { 0.0 } else { r };
    let log_r2 = if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln() + 2.0 * ml.log_fp
    };
    let s = log_radicand(ml.log_p, ml.log_q, log_r2)?.exp();
    Ok(KacRiceTerms {
        m: m.value(),
        m_prime: m1.value(),
        p,
        q,
        r,
        s,
    })
}

/// Density of real zeros of a Gaussian polynomial with nonzero mean
/// structure: the integrand of `I_1 + I_2`,
///
/// `I_1: (sqrt(S)/(pi P)) exp(-(m^2 Q + m'^2 P - 2 m m' R)/(2S))`
/// `I_2: (sqrt(2) |m'P - mR| / (pi P^{3/2})) exp(-m^2/(2P)) erf(|m'P - mR| / sqrt(2 P S))`
///
/// with `erf` in the unnormalized convention `int_0^x e^{-s^2} ds`. With
/// `mu = 0` and no shift this reduces pointwise to [`density_ek`]. When
/// `S = 0` (degenerate covariance) the `I_1` exponential factor is taken as
/// 0 for a positive numerator and 1 for a zero one, and the erf saturates.
pub fn kacrice_mean_density(kernel: &VarianceKernel, mean: &MeanSpec, t: f64) -> Result<f64> {
    let x = t * t;
    let ml = kernel.moment_logs(x)?;
    let log_r2 = if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln() + 2.0 * ml.log_fp
    };
    let log_s = log_radicand(ml.log_p, ml.log_q, log_r2)?;
    let (m, m1) = mean.eval(kernel.coeff_logs(), t);
    let r_sign: i8 = if x == 0.0 || t == 0.0 {
        0
    } else if t > 0.0 {
        1
    } else {
        -1
    };
    let log_r_abs = 0.5 * log_r2;

    // X = m^2 Q + m'^2 P - 2 m m' R  (PSD quadratic form; clamp roundoff)
    let mut xsum = SignedLogSum::new();
    xsum.push(LogSigned::new(2.0 * m.log_abs + ml.log_q, if m.is_zero() { 0 } else { 1 }));
    xsum.push(LogSigned::new(
        2.0 * m1.log_abs + ml.log_p,
        if m1.is_zero() { 0 } else { 1 },
    ));
    xsum.push(LogSigned::new(
        std::f64::consts::LN_2 + m.log_abs + m1.log_abs + log_r_abs,
        -(m.sign * m1.sign * r_sign),
    ));
    let x_form = xsum.total();
    let log_x = if x_form.sign <= 0 {
        f64::NEG_INFINITY
    } else {
        x_form.log_abs
    };

    // I1
    let exp1 = if log_s == f64::NEG_INFINITY {
        if log_x == f64::NEG_INFINITY {
            1.0
        } else {
            0.0
        }
    } else {
        (-((log_x - std::f64::consts::LN_2 - log_s).exp())).exp()
    };
    let i1 = (0.5 * log_s - ml.log_p).exp() / PI * exp1;

    // I2
    let mut eta = SignedLogSum::new();
    eta.push(LogSigned::new(m1.log_abs + ml.log_p, m1.sign));
    eta.push(LogSigned::new(m.log_abs + log_r_abs, -(m.sign * r_sign)));
    let eta = eta.total();
    let i2 = if eta.is_zero() {
        0.0
    } else {
        let arg = if log_s == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            (eta.log_abs - 0.5 * (std::f64::consts::LN_2 + ml.log_p + log_s)).exp()
        };
        let ln_coef =
            0.5 * std::f64::consts::LN_2 + eta.log_abs - 1.5 * ml.log_p - PI.ln();
        let e2 = (2.0 * m.log_abs - std::f64::consts::LN_2 - ml.log_p).exp();
        (ln_coef - e2 + erf_paper(arg).ln()).exp()
    };
    Ok(i1 + i2)
}

/// Limiting density `rho_inf(t) = (1/pi) sqrt(g'(t^2) + t^2 g''(t^2))` with
/// `g = log f_inf`; defined for `|t| < 1`.
pub fn limiting_density(lk: &LimitingKernel, t: f64) -> Result<f64> {
    if t.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "limiting density lives on |t| < 1, got {t}"
        )));
    }
    let x = t * t;
    let (f, f1, f2) = lk.eval(x)?;
    let g1 = f1 / f;
    let g2 = f2 / f - g1 * g1;
    let rad = g1 + x * g2;
    if rad < -RADICAND_CLAMP * g1.abs().max(1.0) {
        return Err(Error::NumericalBreakdown(format!(
            "negative limiting radicand {rad:.3e} at t = {t}"
        )));
    }
    Ok(rad.max(0.0).sqrt() / PI)
}

/// Target relative tolerance for expected counts.
pub const COUNT_REL_TOL: f64 = 1e-9;

/// Expected number of real zeros in an interval by adaptive quadrature of the
/// mean-zero density.
pub fn expected_count_ek(kernel: &VarianceKernel, interval: Interval) -> Result<QuadResult> {
    // surface domain/breakdown errors before entering the integrator
    density_ek(kernel, 0.9)?;
    let n = kernel.degree();
    Ok(quad::integrate_density(
        |t| density_ek(kernel, t).expect("density breakdown inside quadrature"),
        interval,
        n.max(1),
        COUNT_REL_TOL,
    ))
}

/// Expected count for the nonzero-mean / shifted case via `I_1 + I_2`.
pub fn expected_count_kacrice(
    kernel: &VarianceKernel,
    mean: &MeanSpec,
    interval: Interval,
) -> Result<QuadResult> {
    kacrice_mean_density(kernel, mean, 0.9)?;
    let n = kernel.degree();
    Ok(quad::integrate_density(
        |t| kacrice_mean_density(kernel, mean, t).expect("density breakdown inside quadrature"),
        interval,
        n.max(1),
        COUNT_REL_TOL,
    ))
}

/// Expected count from the closed-form Kac density.
pub fn expected_count_kac_closed(n: usize, interval: Interval) -> QuadResult {
    quad::integrate_density(
        |t| kac_density_closed(n, t),
        interval,
        n.max(1),
        COUNT_REL_TOL,
    )
}

/// Expected number of crossings of the graph of `P_n` with the graph of a
/// deterministic polynomial `shift`: the zero count of `P_n - shift`, i.e.
/// the Kac-Rice count with mean `m(t) = mu sum c_k t^k - shift(t)`.
pub fn crossing_count(
    kernel: &VarianceKernel,
    mu: f64,
    shift: &[f64],
    interval: Interval,
) -> Result<QuadResult> {
    let mean = MeanSpec {
        mu,
        shift: shift.to_vec(),
    };
    expected_count_kacrice(kernel, &mean, interval)
}

/// The coefficient of `log n` in the expected real-zero count.
///
/// Mean zero: `(1 + sqrt(d+1))/pi` where `d` is the degree of the
/// generalized polynomial with `c_k^2 = h(k)` (hyperbolic `L` gives
/// `(1+sqrt(L))/pi`, the d-th Kac derivative `(1+sqrt(2d+1))/pi`).
/// Nonzero mean: `(1 + sqrt(2 rho + 1))/(2 pi)` with `rho` the (integer)
/// classical degree of the coefficients.
pub fn predicted_slope(profile: &CoefficientProfile, mu: f64) -> Result<f64> {
    if mu == 0.0 {
        let d = match &profile.kind {
            ProfileKind::Kac => 0.0,
            ProfileKind::Hyperbolic { l } => l - 1.0,
            ProfileKind::KacDerivative { d } => 2.0 * f64::from(*d),
            ProfileKind::GenpolySqrt { h, .. } => h.degree(),
            ProfileKind::PowerLaw { rho, .. } => 2.0 * rho,
            ProfileKind::Explicit { .. } => {
                return Err(Error::Domain(
                    "no slope prediction for explicit coefficient lists".into(),
                ))
            }
        };
        return Ok((1.0 + (d + 1.0).sqrt()) / PI);
    }
    let rho = match &profile.kind {
        ProfileKind::Kac => 0.0,
        ProfileKind::Hyperbolic { l } if *l == 1.0 => 0.0,
        ProfileKind::KacDerivative { d } => f64::from(*d),
        ProfileKind::PowerLaw { rho, .. } if rho.fract() == 0.0 && *rho >= 0.0 => *rho,
        other => {
            return Err(Error::Domain(format!(
                "nonzero-mean slope needs classical integer-degree coefficients, not {other:?}"
            )))
        }
    };
    Ok((1.0 + (2.0 * rho + 1.0).sqrt()) / (2.0 * PI))
}

/// Sample a density evaluator over a grid into a curve.
pub fn sample_curve<F: Fn(f64) -> Result<f64>>(
    f: F,
    grid: &[f64],
    method: DensityMethod,
    n: usize,
    profile_id: &str,
) -> Result<DensityCurve> {
    let mut rho = Vec::with_capacity(grid.len());
    for &t in grid {
        rho.push(f(t)?);
    }
    Ok(DensityCurve {
        t: grid.to_vec(),
        rho,
        method,
        n,
        profile_id: profile_id.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{CoefficientProfile, GeneralizedPolynomial, ProfileKind};

    fn kac(n: usize) -> VarianceKernel {
        VarianceKernel::from_profile(&CoefficientProfile::new(ProfileKind::Kac, n)).unwrap()
    }

    #[test]
    fn kac_density_at_zero_is_one_over_pi() {
        for n in [1usize, 2, 8, 64, 1024] {
            let rho = density_ek(&kac(n), 0.0).unwrap();
            assert!((rho - 1.0 / PI).abs() <= 1e-12, "n={n}: {rho}");
        }
    }

    #[test]
    fn kac_n1_is_cauchy() {
        let k = kac(1);
        for &t in &[0.0, 0.3, -0.7, 1.0, 2.5, -10.0] {
            let want = 1.0 / (PI * (1.0 + t * t));
            let got = density_ek(&k, t).unwrap();
            assert!((got - want).abs() <= 1e-13 * want, "t={t}");
        }
    }

    #[test]
    fn kac_n2_value_at_one() {
        let rho = density_ek(&kac(2), 1.0).unwrap();
        let want = (2.0f64 / 3.0).sqrt() / PI;
        assert!((rho - want).abs() < 1e-14);
        assert!((want - 0.2598994559845069).abs() < 1e-12);
    }

    #[test]
    fn pairwise_oracle_agrees_with_logvar() {
        for n in [1usize, 2, 7, 33, 128] {
            let k = kac(n);
            for &t in &[0.0, 0.2, 0.77, 0.999, 1.0, 1.2, 5.0] {
                let a = density_ek(&k, t).unwrap();
                let b = density_ek_pairwise(&k, t).unwrap();
                assert!(
                    (a - b).abs() <= 1e-11 * (1.0 + a),
                    "n={n} t={t}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn pairwise_oracle_nontrivial_profile() {
        let prof = CoefficientProfile::new(ProfileKind::Hyperbolic { l: 4.0 }, 96);
        let k = VarianceKernel::from_profile(&prof).unwrap();
        for &t in &[0.1, 0.6, 0.95] {
            let a = density_ek(&k, t).unwrap();
            let b = density_ek_pairwise(&k, t).unwrap();
            assert!((a - b).abs() <= 1e-11 * (1.0 + a));
        }
    }

    #[test]
    fn density_is_even() {
        let k = kac(17);
        for &t in &[0.3, 0.9, 1.5] {
            assert_eq!(density_ek(&k, t).unwrap(), density_ek(&k, -t).unwrap());
        }
    }

    #[test]
    fn closed_form_matches_logvar_kac() {
        for n in [1usize, 2, 16, 256] {
            let k = kac(n);
            for &t in &[0.0, 0.4, 0.9, 0.9989, 1.0011, 1.5, 4.0] {
                let a = density_ek(&k, t).unwrap();
                let b = kac_density_closed(n, t);
                assert!(
                    (a - b).abs() <= 1e-10 * (1.0 + a),
                    "n={n} t={t}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn closed_form_limit_values_on_circle() {
        assert!((kac_density_closed(1, 0.0) - 1.0 / PI).abs() < 1e-15);
        let want = (8.0f64 / 12.0).sqrt() / PI;
        assert!((kac_density_closed(2, 1.0) - want).abs() < 1e-15);
        assert!((kac_density_closed(2, -1.0) - want).abs() < 1e-15);
    }

    #[test]
    fn expected_count_kac_n1_is_one() {
        let r = expected_count_ek(&kac(1), Interval::RealLine).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn kac_doubling_difference_approaches_two_over_pi_log_two() {
        let e1 = expected_count_ek(&kac(4096), Interval::RealLine).unwrap().value;
        let e2 = expected_count_ek(&kac(8192), Interval::RealLine).unwrap().value;
        let want = 2.0 / PI * 2.0f64.ln();
        assert!(((e2 - e1) - want).abs() < 0.01, "{}", e2 - e1);
    }

    #[test]
    fn count_bounded_by_degree() {
        for n in [1usize, 16, 256, 4096] {
            let r = expected_count_ek(&kac(n), Interval::RealLine).unwrap();
            assert!(r.value <= n as f64);
        }
    }

    #[test]
    fn reciprocal_interval_identity_for_kac() {
        // self-reciprocal coefficients: E N[1,2] = E N[1/2,1]
        let k = kac(64);
        let a = expected_count_ek(&k, Interval::Range(1.0, 2.0)).unwrap().value;
        let b = expected_count_ek(&k, Interval::Range(0.5, 1.0)).unwrap().value;
        assert!((a - b).abs() < 1e-8 * (1.0 + a), "{a} vs {b}");
    }

    #[test]
    fn kacrice_reduces_to_ek_at_zero_mean() {
        let prof = CoefficientProfile::new(ProfileKind::Hyperbolic { l: 2.0 }, 48);
        let k = VarianceKernel::from_profile(&prof).unwrap();
        let mean = MeanSpec::mean_only(0.0);
        for &t in &[0.0, 0.5, -0.9, 1.3] {
            let a = density_ek(&k, t).unwrap();
            let b = kacrice_mean_density(&k, &mean, t).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a), "t={t}");
        }
    }

    #[test]
    fn kacrice_terms_invariants() {
        let k = kac(32);
        let mean = MeanSpec::mean_only(1.0);
        for &t in &[-1.5, -0.8, 0.0, 0.3, 0.9, 1.1] {
            let terms = kacrice_terms(&k, &mean, t).unwrap();
            assert!(terms.p > 0.0);
            assert!(terms.q >= 0.0);
            assert!(terms.s >= -1e-10 * terms.p * terms.q);
        }
    }

    #[test]
    fn crossing_with_zero_shift_equals_plain_count() {
        let k = kac(16);
        let a = crossing_count(&k, 0.0, &[], Interval::RealLine).unwrap().value;
        let b = expected_count_ek(&k, Interval::RealLine).unwrap().value;
        assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }

    #[test]
    fn crossing_level_line_linear_case() {
        // xi_0 + xi_1 t = T has exactly one solution almost surely
        for &level in &[0.0, 1.0, -3.5] {
            let k = kac(1);
            let r = crossing_count(&k, 0.0, &[level], Interval::RealLine).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "T={level}: {}", r.value);
        }
    }

    #[test]
    fn limiting_density_pure_hyperbolic() {
        for &l in &[1.0f64, 2.0, 4.0] {
            let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(l).unwrap(), vec![]);
            for &t in &[0.0, 0.4, 0.9, 0.99] {
                let got = limiting_density(&lk, t).unwrap();
                let want = l.sqrt() / (PI * (1.0 - t * t));
                assert!((got - want).abs() <= 1e-10 * want, "L={l} t={t}");
            }
        }
        let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(1.0).unwrap(), vec![]);
        assert!((limiting_density(&lk, 0.0).unwrap() - 1.0 / PI).abs() < 1e-14);
        assert!(limiting_density(&lk, 1.0).is_err());
    }

    #[test]
    fn limiting_pole_coefficient() {
        // rho_inf(t) (1 - t^2) -> sqrt(L_d)/pi as t -> 1
        let l = 3.0f64;
        let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(l).unwrap(), vec![]);
        let t = 0.99999f64;
        let v = limiting_density(&lk, t).unwrap() * (1.0 - t * t);
        assert!((v - l.sqrt() / PI).abs() < 1e-4);
    }

    #[test]
    fn finite_n_density_approaches_limit() {
        // |rho_n(0.9) - rho_inf(0.9)| decreases monotonically over doubling n
        for &l in &[1.0f64, 2.0, 4.0] {
            let lk = LimitingKernel::new(GeneralizedPolynomial::binomial(l).unwrap(), vec![]);
            let target = limiting_density(&lk, 0.9).unwrap();
            let mut prev = f64::INFINITY;
            for p in 6..=13 {
                let n = 1usize << p;
                let k = VarianceKernel::from_profile(&CoefficientProfile::new(
                    ProfileKind::Hyperbolic { l },
                    n,
                ))
                .unwrap();
                let gap = (density_ek(&k, 0.9).unwrap() - target).abs();
                assert!(gap <= prev * (1.0 + 1e-9), "L={l} n={n}");
                prev = gap;
            }
        }
    }

    #[test]
    fn slope_predictions() {
        let cases: Vec<(CoefficientProfile, f64, f64)> = vec![
            (CoefficientProfile::new(ProfileKind::Kac, 8), 0.0, 2.0 / PI),
            (
                CoefficientProfile::new(ProfileKind::Hyperbolic { l: 4.0 }, 8),
                0.0,
                3.0 / PI,
            ),
            (
                CoefficientProfile::new(ProfileKind::KacDerivative { d: 1 }, 8),
                0.0,
                (1.0 + 3.0f64.sqrt()) / PI,
            ),
            (CoefficientProfile::new(ProfileKind::Kac, 8), 1.0, 1.0 / PI),
        ];
        for (prof, mu, want) in cases {
            let got = predicted_slope(&prof, mu).unwrap();
            assert!((got - want).abs() < 1e-15, "{}: {got} vs {want}", prof.id());
        }
        // nonzero mean with fractional growth exponent is outside the theorem
        let frac = CoefficientProfile::new(
            ProfileKind::PowerLaw {
                rho: 0.5,
                scale: 1.0,
            },
            8,
        );
        assert!(predicted_slope(&frac, 1.0).is_err());
    }
}
