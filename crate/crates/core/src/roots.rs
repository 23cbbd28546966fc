//! Complex root solving and real-root classification for realized samples.
//!
//! The solver is Aberth-Ehrlich simultaneous iteration on the trimmed
//! polynomial, started on a Cauchy-style circle of radius `|a_0/a_n|^{1/n}`
//! with deterministic jitter from the sample's seed path, then polished by
//! Newton. A root is accepted as real only if its imaginary part is below the
//! scale-aware tolerance AND a Newton iteration restricted to the real line
//! confirms a real zero at the same spot; near `|t| = 1` roots cluster at
//! spacing ~1/n and a bare imaginary-part threshold misclassifies, which
//! would bias every count statistic downstream.

use crate::atoms::SeedStream;
use crate::error::Error;
use crate::Result;
use num_complex::Complex64;

/// Relative imaginary-part tolerance for real classification.
pub const IM_TOL: f64 = 1e-9;
/// Conjugate pairing tolerance (also the coincidence scale at which
/// numerically merged multiple roots are accepted).
pub const PAIR_TOL: f64 = 1e-7;
/// Aberth convergence: max relative correction below this.
const CORRECTION_TOL: f64 = 1e-13;
const MAX_ITER: usize = 500;
const RESTARTS: usize = 3;

/// One realized polynomial with its solved and classified roots.
#[derive(Debug, Clone)]
pub struct RootSample {
    /// Realized coefficients `a_k = c_k xi_k`, increasing degree.
    pub coeffs: Vec<f64>,
    /// Degree after trimming exact leading zeros.
    pub effective_degree: usize,
    pub roots: Vec<Complex64>,
    /// `|P(root)| / sum_k |a_k| |root|^k` per root.
    pub residuals: Vec<f64>,
    /// Parallel to `roots`: true for roots counted on the real line.
    pub real_flags: Vec<bool>,
}

impl RootSample {
    pub fn real_roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots
            .iter()
            .zip(&self.real_flags)
            .filter(|(_, &f)| f)
            .map(|(z, _)| z.re)
    }

    pub fn real_count(&self) -> usize {
        self.real_flags.iter().filter(|&&f| f).count()
    }

    /// Roots strictly in the upper half plane (one per conjugate pair).
    pub fn upper_half_roots(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .zip(&self.real_flags)
            .filter(|(z, &flag)| !flag && z.im > 0.0)
            .map(|(z, _)| *z)
    }
}

/// Evaluate `P` and `P'` at a complex point by one Horner pass.
#[inline]
fn horner_both(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let n = coeffs.len();
    let (zr, zi) = (z.re, z.im);
    let mut pr = coeffs[n - 1];
    let mut pi = 0.0f64;
    let mut dr = 0.0f64;
    let mut di = 0.0f64;
    for k in (0..n - 1).rev() {
        // d = d*z + p
        let ndr = dr * zr - di * zi + pr;
        let ndi = dr * zi + di * zr + pi;
        dr = ndr;
        di = ndi;
        // p = p*z + a_k
        let npr = pr * zr - pi * zi + coeffs[k];
        let npi = pr * zi + pi * zr;
        pr = npr;
        pi = npi;
    }
    (Complex64::new(pr, pi), Complex64::new(dr, di))
}

/// Evaluate `P` and `P'` for complex coefficients.
#[inline]
fn horner_both_c(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let n = coeffs.len();
    let mut p = coeffs[n - 1];
    let mut d = Complex64::new(0.0, 0.0);
    for k in (0..n - 1).rev() {
        d = d * z + p;
        p = p * z + coeffs[k];
    }
    (p, d)
}

/// `sum_k |a_k| |z|^k`, the backward-error scale at `z`.
fn magnitude_bound(coeffs: &[f64], z: Complex64) -> f64 {
    let az = z.norm();
    let mut s = 0.0;
    for &a in coeffs.iter().rev() {
        s = s * az + a.abs();
    }
    s
}

fn magnitude_bound_c(coeffs: &[Complex64], z: Complex64) -> f64 {
    let az = z.norm();
    let mut s = 0.0;
    for a in coeffs.iter().rev() {
        s = s * az + a.norm();
    }
    s
}

fn initial_points(n: usize, a0: f64, an: f64, stream: &SeedStream, attempt: usize) -> Vec<Complex64> {
    let mut r0 = (a0 / an).powf(1.0 / n as f64);
    if !r0.is_finite() || r0 == 0.0 {
        r0 = 1.0;
    }
    r0 = r0.clamp(1e-6, 1e6);
    let mut rng = stream.child(attempt as u64).rng();
    let phase = 0.3999 + 0.17 * attempt as f64;
    (0..n)
        .map(|j| {
            let mut jit = crate::atoms::StreamRng::uniform01(&mut rng) - 0.5;
            jit *= 0.1 + 0.2 * attempt as f64;
            let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64 + phase;
            Complex64::from_polar(r0 * (1.0 + jit), ang)
        })
        .collect()
}

fn aberth_sweeps<E, B>(eval: &E, bound: &B, z: &mut [Complex64]) -> bool
where
    E: Fn(Complex64) -> (Complex64, Complex64),
    B: Fn(Complex64) -> f64,
{
    let n = z.len();
    let mut locked = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all_locked = true;
        for i in 0..n {
            if locked[i] {
                continue;
            }
            let (p, dp) = eval(z[i]);
            let scale = bound(z[i]);
            if p.norm() <= 2.0 * f64::EPSILON * scale {
                locked[i] = true;
                continue;
            }
            if dp.norm() == 0.0 {
                // stationary start; nudge deterministically
                z[i] += Complex64::new(1e-6, 1e-6) * (1.0 + z[i].norm());
                all_locked = false;
                continue;
            }
            let newton = p / dp;
            // repulsion sum over the other iterates
            let (zr, zi) = (z[i].re, z[i].im);
            let mut sr = 0.0f64;
            let mut si = 0.0f64;
            for (j, zj) in z.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dr = zr - zj.re;
                let di = zi - zj.im;
                let d2 = dr * dr + di * di;
                if d2 == 0.0 {
                    continue;
                }
                sr += dr / d2;
                si += -di / d2;
            }
            let denom = Complex64::new(1.0 - (newton.re * sr - newton.im * si),
                                       -(newton.re * si + newton.im * sr));
            let w = if denom.norm() < 1e-300 { newton } else { newton / denom };
            z[i] -= w;
            if w.norm() <= CORRECTION_TOL * (1.0 + z[i].norm()) {
                locked[i] = true;
            } else {
                all_locked = false;
            }
        }
        if all_locked {
            return true;
        }
    }
    false
}

fn polish_newton<E>(eval: &E, z: Complex64) -> Complex64
where
    E: Fn(Complex64) -> (Complex64, Complex64),
{
    let mut best = z;
    let mut best_res = eval(z).0.norm();
    let mut cur = z;
    for _ in 0..3 {
        let (p, dp) = eval(cur);
        if dp.norm() == 0.0 {
            break;
        }
        cur -= p / dp;
        let pn = eval(cur).0.norm();
        if pn < best_res {
            best_res = pn;
            best = cur;
        } else {
            break;
        }
    }
    best
}

/// Newton restricted to the real line, used to confirm real classifications.
fn real_newton(coeffs: &[f64], start: f64) -> Option<f64> {
    let mut x = start;
    for _ in 0..12 {
        let mut p = coeffs[coeffs.len() - 1];
        let mut d = 0.0f64;
        for k in (0..coeffs.len() - 1).rev() {
            d = d * x + p;
            p = p * x + coeffs[k];
        }
        if d == 0.0 {
            return None;
        }
        let step = p / d;
        x -= step;
        if !x.is_finite() {
            return None;
        }
        if step.abs() <= 1e-13 * (1.0 + x.abs()) {
            return Some(x);
        }
    }
    None
}

/// Solve all complex roots of the realized polynomial and classify them.
///
/// Exact zero coefficients are trimmed at the leading end (the effective
/// degree is recorded) and factored at the constant end (zero roots).
/// Non-convergence after the jittered restarts is an error; callers exclude
/// and count such samples rather than resampling, which would bias the
/// estimators.
pub fn find_roots(coeffs: &[f64], stream: &SeedStream) -> Result<RootSample> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == 0.0 {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::DegenerateSample(
            "identically zero polynomial".into(),
        ));
    }
    let trimmed = &coeffs[..hi];
    let effective_degree = hi - 1;
    let mut lo = 0;
    while trimmed[lo] == 0.0 {
        lo += 1;
    }
    let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); lo];
    let core = &trimmed[lo..];
    let deg = core.len() - 1;

    // scale-invariant normalization for conditioning
    let maxmag = core.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let scaled: Vec<f64> = core.iter().map(|a| a / maxmag).collect();

    if deg == 1 {
        roots.push(Complex64::new(-scaled[0] / scaled[1], 0.0));
    } else if deg == 2 {
        let (a, b, c) = (scaled[2], scaled[1], scaled[0]);
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let (r1, r2) = if q != 0.0 {
                (q / a, c / q)
            } else {
                (0.0, 0.0)
            };
            roots.push(Complex64::new(r1, 0.0));
            roots.push(Complex64::new(r2, 0.0));
        } else {
            let re = -b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a);
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        }
    } else if deg >= 3 {
        let eval = |z: Complex64| horner_both(&scaled, z);
        let bound = |z: Complex64| magnitude_bound(&scaled, z);
        let mut solved = None;
        for attempt in 0..RESTARTS {
            let mut z = initial_points(deg, scaled[0].abs(), scaled[deg].abs(), stream, attempt);
            if aberth_sweeps(&eval, &bound, &mut z) {
                solved = Some(z);
                break;
            }
        }
        let z = solved.ok_or_else(|| {
            Error::DegenerateSample(format!(
                "Aberth iteration failed after {RESTARTS} restarts (degree {deg})"
            ))
        })?;
        for zi in z {
            roots.push(polish_newton(&eval, zi));
        }
    }

    // residuals against the trimmed polynomial
    let residuals: Vec<f64> = roots
        .iter()
        .map(|&z| {
            let (p, _) = horner_both(trimmed, z);
            p.norm() / magnitude_bound(trimmed, z).max(f64::MIN_POSITIVE)
        })
        .collect();

    let real_flags = classify_real(trimmed, &roots, IM_TOL)?;
    Ok(RootSample {
        coeffs: coeffs.to_vec(),
        effective_degree,
        roots,
        residuals,
        real_flags,
    })
}

/// All complex roots of a complex-coefficient polynomial (no real/conjugate
/// classification; used by the complex-Gaussian experiments).
pub fn find_roots_complex(coeffs: &[Complex64], stream: &SeedStream) -> Result<Vec<Complex64>> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == Complex64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::DegenerateSample(
            "identically zero polynomial".into(),
        ));
    }
    let trimmed = &coeffs[..hi];
    let mut lo = 0;
    while trimmed[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); lo];
    let core = &trimmed[lo..];
    let deg = core.len() - 1;
    if deg == 0 {
        return Ok(roots);
    }
    let maxmag = core.iter().fold(0.0f64, |m, a| m.max(a.norm()));
    let scaled: Vec<Complex64> = core.iter().map(|a| a / maxmag).collect();
    if deg == 1 {
        roots.push(-scaled[0] / scaled[1]);
        return Ok(roots);
    }
    let eval = |z: Complex64| horner_both_c(&scaled, z);
    let bound = |z: Complex64| magnitude_bound_c(&scaled, z);
    let mut solved = None;
    for attempt in 0..RESTARTS {
        let mut z = initial_points(deg, scaled[0].norm(), scaled[deg].norm(), stream, attempt);
        if aberth_sweeps(&eval, &bound, &mut z) {
            solved = Some(z);
            break;
        }
    }
    let z = solved.ok_or_else(|| {
        Error::DegenerateSample(format!(
            "Aberth iteration failed after {RESTARTS} restarts (degree {deg})"
        ))
    })?;
    for zi in z {
        roots.push(polish_newton(&eval, zi));
    }
    Ok(roots)
}

/// Classify roots as real or members of conjugate pairs.
///
/// Real: `|Im z| <= tol (1+|z|)` and the restricted real Newton iteration
/// from `Re z` lands within the same tolerance. Everything else must match a
/// conjugate partner within [`PAIR_TOL`]; an unmatched non-real root fails
/// the classification and flags the sample.
pub fn classify_real(coeffs: &[f64], roots: &[Complex64], tol: f64) -> Result<Vec<bool>> {
    let mut flags = vec![false; roots.len()];
    let mut leftover: Vec<usize> = Vec::new();
    for (i, z) in roots.iter().enumerate() {
        let scale = 1.0 + z.norm();
        if z.im.abs() <= tol * scale {
            if z.im == 0.0 && z.re == 0.0 {
                flags[i] = true; // factored zero roots are exact
                continue;
            }
            if let Some(x) = real_newton(coeffs, z.re) {
                if (x - z.re).abs() <= tol * scale {
                    flags[i] = true;
                    continue;
                }
            }
        }
        leftover.push(i);
    }
    // greedy conjugate matching among the rest
    let mut unmatched: Vec<usize> = leftover;
    while let Some(i) = unmatched.pop() {
        let zi = roots[i];
        let mut best: Option<(usize, f64)> = None;
        for (slot, &j) in unmatched.iter().enumerate() {
            let d = (roots[j] - zi.conj()).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((slot, d));
            }
        }
        match best {
            Some((slot, d)) if d <= PAIR_TOL * (1.0 + zi.norm()) => {
                unmatched.swap_remove(slot);
            }
            _ => {
                return Err(Error::DegenerateSample(format!(
                    "unpaired non-real root at {zi}"
                )))
            }
        }
    }
    Ok(flags)
}

/// Sets roots are counted in. All sets are closed; boundary ties within the
/// scale-aware tolerance resolve toward inclusion.
#[derive(Debug, Clone, Copy)]
pub enum RootSet {
    /// Real interval `[a, b]`; endpoints may be infinite. Counts real roots.
    Interval(f64, f64),
    /// Closed disk `B(center, r)`. Counts all roots.
    Disk(Complex64, f64),
    /// Closed annulus `r_in <= |z - center| <= r_out`.
    Annulus(Complex64, f64, f64),
}

/// Count roots (with multiplicity) in a set.
pub fn count_in_set(sample: &RootSample, set: &RootSet) -> usize {
    match *set {
        RootSet::Interval(a, b) => {
            let eps = 1e-12 * (1.0 + a.abs().min(1e12) + b.abs().min(1e12));
            sample
                .real_roots()
                .filter(|&x| x >= a - eps && x <= b + eps)
                .count()
        }
        RootSet::Disk(center, r) => {
            let eps = 1e-12 * (1.0 + r + center.norm());
            sample
                .roots
                .iter()
                .filter(|z| (**z - center).norm() <= r + eps)
                .count()
        }
        RootSet::Annulus(center, r_in, r_out) => {
            let eps = 1e-12 * (1.0 + r_out + center.norm());
            sample
                .roots
                .iter()
                .filter(|z| {
                    let d = (**z - center).norm();
                    d >= r_in - eps && d <= r_out + eps
                })
                .count()
        }
    }
}

/// Coefficients of the reciprocal polynomial `Q(z) = z^n P(1/z) / a_n`: the
/// reversed sequence divided by the leading coefficient. Nonzero roots of `Q`
/// are reciprocals of roots of `P`. Returns the coefficients and whether
/// leading zeros had to be trimmed first.
pub fn reciprocal_transform(coeffs: &[f64]) -> Result<(Vec<f64>, bool)> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == 0.0 {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::Domain("cannot reverse the zero polynomial".into()));
    }
    let trimmed = hi != coeffs.len();
    let an = coeffs[hi - 1];
    let q: Vec<f64> = coeffs[..hi].iter().rev().map(|a| a / an).collect();
    Ok((q, trimmed))
}

/// Jensen-type bound on the number of zeros in `B(z, s)`:
/// `(log M - log |P(z)|) / log(R/s)` with `M = max |P|` over 64 points on
/// the circle `|w - z| = R`. Requires `|P(z)| > 0` and `0 < s < R`.
pub fn jensen_root_bound(coeffs: &[f64], z: Complex64, s: f64, r: f64) -> Result<f64> {
    if !(0.0 < s && s < r) {
        return Err(Error::Domain(format!(
            "jensen bound needs 0 < s < R, got s={s}, R={r}"
        )));
    }
    let (pz, _) = horner_both(coeffs, z);
    let scale = magnitude_bound(coeffs, z);
    if pz.norm() <= 1e-14 * scale {
        return Err(Error::Domain(
            "jensen bound undefined: |P(z)| vanishes at the center".into(),
        ));
    }
    let mut max_mod: f64 = 0.0;
    for j in 0..64 {
        let ang = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
        let w = z + Complex64::from_polar(r, ang);
        let (pw, _) = horner_both(coeffs, w);
        max_mod = max_mod.max(pw.norm());
    }
    Ok((max_mod.ln() - pz.norm().ln()) / (r / s).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream() -> SeedStream {
        SeedStream::new(12345)
    }

    #[test]
    fn quadratic_real_pair() {
        // x^2 - 1
        let s = find_roots(&[-1.0, 0.0, 1.0], &stream()).unwrap();
        assert_eq!(s.effective_degree, 2);
        assert_eq!(s.real_count(), 2);
        let mut re: Vec<f64> = s.real_roots().collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-14);
        assert!((re[1] - 1.0).abs() < 1e-14);
        assert!(s.residuals.iter().all(|&r| r < 1e-14));
    }

    #[test]
    fn quadratic_conjugate_pair() {
        // x^2 + 1
        let s = find_roots(&[1.0, 0.0, 1.0], &stream()).unwrap();
        assert_eq!(s.real_count(), 0);
        assert_eq!(s.roots.len(), 2);
        assert!((s.roots[0].im + s.roots[1].im).abs() < 1e-14);
        // parity: 2 - 0 even
        assert_eq!((s.effective_degree - s.real_count()) % 2, 0);
    }

    #[test]
    fn double_root_with_complex_pair() {
        // (x-1)^2 (x^2 + x + 1) = x^4 - x^3 - x^2 ... expand:
        // (x^2 - 2x + 1)(x^2 + x + 1) = x^4 - x^3 - 2x + 1... compute:
        // x^4 + x^3 + x^2 - 2x^3 - 2x^2 - 2x + x^2 + x + 1
        // = x^4 - x^3 + 0x^2 - x + 1
        let coeffs = [1.0, -1.0, 0.0, -1.0, 1.0];
        let s = find_roots(&coeffs, &stream()).unwrap();
        assert_eq!(s.real_count(), 2, "double real root carries multiplicity 2");
        for x in s.real_roots() {
            assert!((x - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn interval_and_disk_counts() {
        let s = find_roots(&[-1.0, 0.0, 1.0], &stream()).unwrap();
        assert_eq!(count_in_set(&s, &RootSet::Interval(0.0, 2.0)), 1);
        assert_eq!(
            count_in_set(&s, &RootSet::Disk(Complex64::new(0.0, 0.0), 1.5)),
            2
        );
        assert_eq!(
            count_in_set(
                &s,
                &RootSet::Annulus(Complex64::new(0.0, 0.0), 0.5, 1.0)
            ),
            2
        );
    }

    #[test]
    fn boundary_inclusive() {
        let s = find_roots(&[-1.0, 0.0, 1.0], &stream()).unwrap();
        assert_eq!(count_in_set(&s, &RootSet::Interval(1.0, 2.0)), 1);
        assert_eq!(
            count_in_set(&s, &RootSet::Disk(Complex64::new(0.0, 0.0), 1.0)),
            2
        );
    }

    #[test]
    fn zero_roots_factored() {
        // x^2 (x - 2) = -2x^2 + x^3
        let s = find_roots(&[0.0, 0.0, -2.0, 1.0], &stream()).unwrap();
        assert_eq!(s.effective_degree, 3);
        assert_eq!(s.real_count(), 3);
        assert_eq!(count_in_set(&s, &RootSet::Interval(-0.5, 0.5)), 2);
    }

    #[test]
    fn reciprocal_of_selfreciprocal() {
        let (q, trimmed) = reciprocal_transform(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(!trimmed);
        assert_eq!(q, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn reciprocal_linear() {
        // P = 2x - 1: Q(z) = (-z + 2)/2, root 2 = 1/(1/2)
        let (q, _) = reciprocal_transform(&[-1.0, 2.0]).unwrap();
        assert_eq!(q, vec![1.0, -0.5]);
        let s = find_roots(&q, &stream()).unwrap();
        assert!((s.roots[0].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_root_map() {
        let coeffs = [2.0, -3.0, 0.5, 1.0, -0.75];
        let p = find_roots(&coeffs, &stream()).unwrap();
        let (qc, _) = reciprocal_transform(&coeffs).unwrap();
        let q = find_roots(&qc, &stream()).unwrap();
        let mut inv: Vec<Complex64> = p.roots.iter().map(|z| 1.0 / z).collect();
        let mut qr = q.roots.clone();
        inv.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        qr.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (a, b) in inv.iter().zip(&qr) {
            assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn jensen_bound_constant_poly() {
        let b = jensen_root_bound(&[1.0], Complex64::new(0.0, 0.0), 0.5, 2.0).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn jensen_bound_hand_case() {
        // P = z^2 - 1/4 at z=0, s=0.6, R=2: max|P| on |z|=2 is 4.25
        let b =
            jensen_root_bound(&[-0.25, 0.0, 1.0], Complex64::new(0.0, 0.0), 0.6, 2.0).unwrap();
        let want = (4.25f64 / 0.25).ln() / (2.0f64 / 0.6).ln();
        assert!((b - want).abs() < 1e-12);
        assert!(b >= 2.0);
    }

    #[test]
    fn jensen_rejects_center_zero() {
        assert!(
            jensen_root_bound(&[-1.0, 0.0, 1.0], Complex64::new(1.0, 0.0), 0.1, 1.0).is_err()
        );
    }

    #[test]
    fn wilkinson_like_moderate_degree() {
        // (x-1)(x-2)...(x-6) expanded
        let mut c = vec![1.0f64];
        for r in 1..=6 {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r as f64 * a;
            }
            c = next;
        }
        let s = find_roots(&c, &stream()).unwrap();
        assert_eq!(s.real_count(), 6);
        let mut re: Vec<f64> = s.real_roots().collect();
        re.sort_by(f64::total_cmp);
        for (i, x) in re.iter().enumerate() {
            assert!((x - (i as f64 + 1.0)).abs() < 1e-8, "root {i}: {x}");
        }
    }
}
