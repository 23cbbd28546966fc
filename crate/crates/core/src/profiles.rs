//! Deterministic coefficient sequences.
//!
//! A profile produces the sequence `c_0..c_n` of the random polynomial
//! `P_n(x) = sum c_k xi_k x^k`. The named families (Kac, hyperbolic,
//! derivatives of Kac, power law) are all controlled, for k large, by a
//! generalized polynomial `h(k) = sum_j alpha_j * L_j(L_j+1)...(L_j+k-1)/k!`
//! with `0 < L_0 < ... < L_d` and `alpha_d != 0`; the degree of `h` is
//! `L_d - 1` and may be fractional. Magnitudes are carried in log space
//! alongside their sign because `h(k)` overflows doubles for large `L`, `k`.

use crate::error::Error;
use crate::logsum::{LogSigned, SignedLogSum};
use crate::Result;
use serde::{Deserialize, Serialize};

/// One term `alpha * L(L+1)...(L+k-1)/k!` of a generalized polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenPolyTerm {
    /// Exponent `L > 0`.
    pub exponent: f64,
    /// Coefficient `alpha`.
    pub coefficient: f64,
}

/// A generalized polynomial: strictly increasing positive exponents, nonzero
/// leading coefficient. Degree is `L_d - 1 > -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenPoly")]
pub struct GeneralizedPolynomial {
    terms: Vec<GenPolyTerm>,
}

/// Wire form; deserialization funnels through [`GeneralizedPolynomial::new`]
/// so invalid exponent orderings cannot enter through configs.
#[derive(Deserialize)]
struct RawGenPoly {
    terms: Vec<GenPolyTerm>,
}

impl TryFrom<RawGenPoly> for GeneralizedPolynomial {
    type Error = Error;

    fn try_from(raw: RawGenPoly) -> Result<Self> {
        Self::new(raw.terms)
    }
}

impl GeneralizedPolynomial {
    pub fn new(terms: Vec<GenPolyTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidProfile(
                "generalized polynomial needs at least one term".into(),
            ));
        }
        for w in terms.windows(2) {
            if !(w[0].exponent < w[1].exponent) {
                return Err(Error::InvalidProfile(
                    "exponents must be strictly increasing".into(),
                ));
            }
        }
        if terms[0].exponent <= 0.0 || !terms[0].exponent.is_finite() {
            return Err(Error::InvalidProfile("exponents must be positive".into()));
        }
        let last = terms.last().unwrap();
        if last.coefficient == 0.0 || !last.coefficient.is_finite() {
            return Err(Error::InvalidProfile(
                "leading coefficient must be nonzero".into(),
            ));
        }
        Ok(Self { terms })
    }

    /// Single term `alpha = 1` with exponent `l`; `h(k)` is then the
    /// generalized binomial coefficient itself.
    pub fn binomial(l: f64) -> Result<Self> {
        Self::new(vec![GenPolyTerm {
            exponent: l,
            coefficient: 1.0,
        }])
    }

    /// Degree `L_d - 1`; always greater than -1.
    pub fn degree(&self) -> f64 {
        self.terms.last().unwrap().exponent - 1.0
    }

    pub fn terms(&self) -> &[GenPolyTerm] {
        &self.terms
    }

    /// `h(k)` as a signed log value, summed term by term in log space.
    pub fn eval_log(&self, k: u64) -> LogSigned {
        let mut acc = SignedLogSum::new();
        for t in &self.terms {
            let lb = binom_coeff_log(t.exponent, k).expect("validated exponent");
            acc.push(LogSigned::from_value(t.coefficient).scale_log(lb));
        }
        acc.total()
    }

    /// `h(k)` as a plain double; may overflow to +-inf for large `k`, `L`.
    pub fn eval(&self, k: u64) -> f64 {
        self.eval_log(k).value()
    }

    /// Express a classical polynomial `p(k) = sum_j a_j k^j` (coefficients in
    /// increasing degree order) in the binomial basis `C(k+j, j)`, i.e. with
    /// exponents `L_j = j + 1`. Solves the triangular change of basis by
    /// back-substitution from the top degree.
    pub fn from_classical(monomial: &[f64]) -> Result<Self> {
        let mut coeffs = monomial.to_vec();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        let d = coeffs.len() - 1;
        if coeffs[d] == 0.0 {
            return Err(Error::InvalidProfile(
                "classical polynomial must be nonzero".into(),
            ));
        }
        // basis[j] = monomial coefficients of C(k+j, j) = (k+1)...(k+j)/j!
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
        basis.push(vec![1.0]);
        for j in 1..=d {
            let prev = &basis[j - 1];
            // multiply by (k + j) / j
            let mut next = vec![0.0; j + 1];
            for (i, &p) in prev.iter().enumerate() {
                next[i + 1] += p / j as f64;
                next[i] += p * j as f64 / j as f64;
            }
            basis.push(next);
        }
        let mut residual = coeffs;
        let mut alphas = vec![0.0; d + 1];
        for j in (0..=d).rev() {
            let lead = basis[j][j];
            let a = residual.get(j).copied().unwrap_or(0.0) / lead;
            alphas[j] = a;
            for (i, &b) in basis[j].iter().enumerate() {
                residual[i] -= a * b;
            }
        }
        let terms: Vec<GenPolyTerm> = alphas
            .iter()
            .enumerate()
            .filter(|&(j, &a)| a != 0.0 || j == d)
            .map(|(j, &a)| GenPolyTerm {
                exponent: (j + 1) as f64,
                coefficient: a,
            })
            .collect();
        Self::new(terms)
    }
}

/// Natural log of the generalized binomial coefficient
/// `L(L+1)...(L+k-1)/k!`, i.e. `sum_{j<k} [ln(L+j) - ln(j+1)]`.
/// Exactly 0 at `k = 0`. Requires `L > 0`.
pub fn binom_coeff_log(l: f64, k: u64) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Domain(format!(
            "binom_coeff_log requires L > 0, got {l}"
        )));
    }
    let mut s = 0.0;
    let mut c = 0.0;
    for j in 0..k {
        let j = j as f64;
        crate::logsum::neumaier_add(&mut s, &mut c, (l + j).ln() - (j + 1.0).ln());
    }
    Ok(s + c)
}

/// `h(k)` for a generalized polynomial, through the signed log-space sum.
pub fn eval_genpoly(h: &GeneralizedPolynomial, k: u64) -> f64 {
    h.eval(k)
}

/// The deterministic coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// All coefficients 1.
    Kac,
    /// `c_i = sqrt(L(L+1)...(L+i-1)/i!)`, `L > 0`; `L = 1` recovers Kac.
    Hyperbolic { l: f64 },
    /// Coefficients of the d-th derivative of the Kac polynomial of degree n:
    /// `c_i = (i+1)(i+2)...(i+d)` for `i = 0..n-d`.
    KacDerivative { d: u32 },
    /// `c_i = scale * i^rho` with `rho > -1/2`; `c_0 = scale`.
    PowerLaw { rho: f64, scale: f64 },
    /// `c_i = sqrt(h(i))` for `i >= n0` (requires `h(i) > 0` there);
    /// heads `i < n0` use `sqrt(max(h(i), 0))`.
    GenpolySqrt {
        h: GeneralizedPolynomial,
        n0: usize,
    },
    /// Coefficients given verbatim.
    Explicit { values: Vec<f64> },
}

/// A profile plus the degree it is instantiated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    #[serde(flatten)]
    pub kind: ProfileKind,
    pub n: usize,
}

/// The produced sequence, with a parallel log-magnitude representation.
#[derive(Debug, Clone)]
pub struct CoeffSequence {
    pub values: Vec<f64>,
    pub logs: Vec<LogSigned>,
}

impl CoeffSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    fn from_logs(logs: Vec<LogSigned>) -> Self {
        let values = logs.iter().map(|l| l.value()).collect();
        Self { values, logs }
    }

    fn from_values(values: Vec<f64>) -> Self {
        let logs = values.iter().map(|&v| LogSigned::from_value(v)).collect();
        Self { values, logs }
    }
}

/// Empirical Condition-1 report: `tau1 * i^rho <= |c_i| <= tau2 * i^rho`
/// over `N0 <= i <= n`, plus the head bound `|c_i| <= tau2` for `i < N0`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub rho: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub n0: usize,
}

/// Description of the limiting variance function
/// `f_inf(x) = g(x) + sum_m alpha_m (1-x)^{-L_m}` for profiles whose squared
/// coefficients are exactly a generalized polynomial from index `n0` on.
#[derive(Debug, Clone)]
pub struct LimitingDescription {
    /// `c_k^2 = h(k)` for `k >= n0`.
    pub h: GeneralizedPolynomial,
    /// Head correction `g(x) = sum_{k<n0} [c_k^2 - h(k)] x^k`.
    pub head: Vec<f64>,
}

impl CoefficientProfile {
    pub fn new(kind: ProfileKind, n: usize) -> Self {
        Self { kind, n }
    }

    /// Short identifier used in curve/report metadata.
    pub fn id(&self) -> String {
        match &self.kind {
            ProfileKind::Kac => format!("kac(n={})", self.n),
            ProfileKind::Hyperbolic { l } => format!("hyperbolic(L={l},n={})", self.n),
            ProfileKind::KacDerivative { d } => format!("kac_derivative(d={d},n={})", self.n),
            ProfileKind::PowerLaw { rho, scale } => {
                format!("power_law(rho={rho},scale={scale},n={})", self.n)
            }
            ProfileKind::GenpolySqrt { h, n0 } => format!(
                "genpoly_sqrt(deg={},terms={},n0={n0},n={})",
                h.degree(),
                h.terms().len(),
                self.n
            ),
            ProfileKind::Explicit { values } => format!("explicit(len={})", values.len()),
        }
    }

    /// Growth exponent `rho` of `|c_i| ~ i^rho`. `None` for explicit lists
    /// (validation estimates it by regression instead).
    pub fn growth_exponent(&self) -> Option<f64> {
        match &self.kind {
            ProfileKind::Kac => Some(0.0),
            ProfileKind::Hyperbolic { l } => Some((l - 1.0) / 2.0),
            ProfileKind::KacDerivative { d } => Some(f64::from(*d)),
            ProfileKind::PowerLaw { rho, .. } => Some(*rho),
            ProfileKind::GenpolySqrt { h, .. } => Some(h.degree() / 2.0),
            ProfileKind::Explicit { .. } => None,
        }
    }

    /// Head-exception index `N_0` below which Condition 1 only demands
    /// boundedness.
    pub fn head_index(&self) -> usize {
        match &self.kind {
            ProfileKind::GenpolySqrt { n0, .. } => *n0,
            // i^rho is degenerate at i = 0
            ProfileKind::PowerLaw { .. } => 1,
            _ => 0,
        }
    }

    /// Produce `c_0..c_n` (shorter for `kac_derivative`, whose realized
    /// degree is `n - d`).
    pub fn coeff_sequence(&self) -> Result<CoeffSequence> {
        match &self.kind {
            ProfileKind::Kac => Ok(CoeffSequence::from_values(vec![1.0; self.n + 1])),
            ProfileKind::Hyperbolic { l } => {
                if !(*l > 0.0) {
                    return Err(Error::InvalidProfile(format!(
                        "hyperbolic profile requires L > 0, got {l}"
                    )));
                }
                let logs = (0..=self.n as u64)
                    .map(|i| LogSigned::new(0.5 * binom_coeff_log(*l, i).unwrap(), 1))
                    .collect();
                Ok(CoeffSequence::from_logs(logs))
            }
            ProfileKind::KacDerivative { d } => {
                let d = *d as usize;
                if self.n < d {
                    return Err(Error::InvalidProfile(format!(
                        "kac_derivative needs n >= d (n={}, d={d})",
                        self.n
                    )));
                }
                // plain products stay exact in f64 well past any degree the
                // double range admits for these coefficients
                let values = (0..=(self.n - d) as u64)
                    .map(|i| (1..=d as u64).map(|j| (i + j) as f64).product())
                    .collect();
                Ok(CoeffSequence::from_values(values))
            }
            ProfileKind::PowerLaw { rho, scale } => {
                if !(*rho > -0.5) {
                    return Err(Error::InvalidProfile(format!(
                        "power_law requires rho > -1/2, got {rho}"
                    )));
                }
                if !(*scale > 0.0) {
                    return Err(Error::InvalidProfile("power_law requires scale > 0".into()));
                }
                let values = (0..=self.n)
                    .map(|i| {
                        if i == 0 {
                            *scale
                        } else {
                            scale * (i as f64).powf(*rho)
                        }
                    })
                    .collect();
                Ok(CoeffSequence::from_values(values))
            }
            ProfileKind::GenpolySqrt { h, n0 } => {
                let mut logs = Vec::with_capacity(self.n + 1);
                for i in 0..=self.n as u64 {
                    let hv = h.eval_log(i);
                    if i >= *n0 as u64 {
                        if hv.sign <= 0 {
                            return Err(Error::InvalidProfile(format!(
                                "genpoly_sqrt requires h(k) > 0 for k >= N0; h({i}) <= 0"
                            )));
                        }
                        logs.push(hv.sqrt());
                    } else if hv.sign > 0 {
                        logs.push(hv.sqrt());
                    } else {
                        logs.push(LogSigned::ZERO);
                    }
                }
                Ok(CoeffSequence::from_logs(logs))
            }
            ProfileKind::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidProfile("explicit profile is empty".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidProfile(
                        "explicit profile has non-finite entries".into(),
                    ));
                }
                Ok(CoeffSequence::from_values(values.clone()))
            }
        }
    }

    /// Empirical Condition-1 validation over the produced sequence: reports
    /// the tightest `tau1, tau2` and rejects profiles with vanishing tail
    /// coefficients (`tau1 = 0`), for which no such constants exist.
    pub fn validate(&self) -> Result<ConditionReport> {
        let seq = self.coeff_sequence()?;
        let n0 = self.head_index();
        let rho = match self.growth_exponent() {
            Some(r) => r,
            None => estimate_growth_exponent(&seq.values, n0),
        };
        let mut tau1 = f64::INFINITY;
        let mut tau2: f64 = 0.0;
        for (i, &v) in seq.values.iter().enumerate() {
            let a = v.abs();
            if i < n0 {
                tau2 = tau2.max(a);
                continue;
            }
            let scale = if i == 0 { 1.0 } else { (i as f64).powf(rho) };
            tau1 = tau1.min(a / scale);
            tau2 = tau2.max(a / scale);
        }
        if !(tau1 > 0.0) || !tau2.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "profile violates Condition 1: tau1={tau1}, tau2={tau2} at rho={rho}"
            )));
        }
        Ok(ConditionReport { rho, tau1, tau2, n0 })
    }

    /// The exact limiting description `c_k^2 = h(k)` (k >= n0) when the
    /// family admits one; `None` for power-law and explicit profiles.
    pub fn limiting(&self) -> Option<LimitingDescription> {
        match &self.kind {
            ProfileKind::Kac => Some(LimitingDescription {
                h: GeneralizedPolynomial::binomial(1.0).unwrap(),
                head: vec![],
            }),
            ProfileKind::Hyperbolic { l } => Some(LimitingDescription {
                h: GeneralizedPolynomial::binomial(*l).unwrap(),
                head: vec![],
            }),
            ProfileKind::KacDerivative { d } => {
                // c_i^2 = [(i+1)...(i+d)]^2, a classical polynomial of degree 2d
                let d = *d as usize;
                let mut poly = vec![1.0];
                for j in 1..=d as u64 {
                    // multiply by (k + j)
                    let mut next = vec![0.0; poly.len() + 1];
                    for (i, &p) in poly.iter().enumerate() {
                        next[i + 1] += p;
                        next[i] += p * j as f64;
                    }
                    poly = next;
                }
                let squared = poly_mul(&poly, &poly);
                Some(LimitingDescription {
                    h: GeneralizedPolynomial::from_classical(&squared).unwrap(),
                    head: vec![],
                })
            }
            ProfileKind::GenpolySqrt { h, n0 } => {
                let mut head = Vec::with_capacity(*n0);
                for k in 0..*n0 as u64 {
                    let hv = h.eval(k);
                    let c2 = hv.max(0.0);
                    head.push(c2 - hv);
                }
                Some(LimitingDescription { h: h.clone(), head })
            }
            ProfileKind::PowerLaw { .. } | ProfileKind::Explicit { .. } => None,
        }
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Log-log least-squares estimate of the growth exponent of an explicit
/// sequence, over indices `max(n0, 1)..`.
fn estimate_growth_exponent(values: &[f64], n0: usize) -> f64 {
    let lo = n0.max(1);
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(lo)
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| ((i as f64).ln(), v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        0.0
    } else {
        (m * sxy - sx * sy) / denom
    }
}
