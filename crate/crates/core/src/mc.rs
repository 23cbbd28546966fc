//! Monte Carlo experiments over realized random polynomials.
//!
//! Samples are partitioned across workers by index; per-sample work is pure
//! given its seed path, and aggregation runs over a fixed tree of sample
//! indices, so floating-point results are independent of scheduling and a
//! rerun with the same `root_seed` is bit-identical at any worker count.
//! Degenerate samples (solver failures) are excluded and counted, never
//! resampled in place, which would silently bias the estimators.

use crate::atoms::{self, AtomSpec, SeedStream};
use crate::error::Error;
use crate::exec;
use crate::logsum::{mean_and_se, pairwise_sum};
use crate::profiles::{CoeffSequence, CoefficientProfile, ProfileKind};
use crate::roots::{self, RootSample, RootSet};
use crate::Result;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::time::Instant;

/// Stream-tree domains under the experiment root.
const DOM_COEFF: u64 = 1;
const DOM_SOLVER: u64 = 2;

/// One named statistic of a report.
#[derive(Debug, Clone, Serialize)]
pub struct Stat {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub excluded: usize,
}

/// Aggregated Monte Carlo output: configuration echo, per-statistic
/// estimates with standard errors and exclusion accounting, the root seed,
/// and wall time. `standard error = sample sd / sqrt(sample count)`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: serde_json::Value,
    pub root_seed: u64,
    pub stats: Vec<Stat>,
    pub wall_secs: f64,
}

impl ExperimentReport {
    pub fn stat(&self, name: &str) -> Option<&Stat> {
        self.stats.iter().find(|s| s.name == name)
    }
}

/// Realize `a_k = c_k xi_k` for one sample. Magnitudes are assembled in log
/// space and normalized by the largest one (roots are scale invariant), so
/// profiles whose coefficients overflow doubles still realize cleanly.
pub fn realize_real(
    seq: &CoeffSequence,
    atom: AtomSpec,
    sample_stream: &SeedStream,
) -> Result<Vec<f64>> {
    let n = seq.len();
    let mut logs = Vec::with_capacity(n);
    let mut max_log = f64::NEG_INFINITY;
    for k in 0..n {
        let xi = atoms::sample_real(atom, &sample_stream.child(k as u64))?;
        let cl = seq.logs[k];
        let sign = cl.sign as f64 * xi.signum();
        let lg = cl.log_abs + xi.abs().ln();
        if lg > max_log {
            max_log = lg;
        }
        logs.push((lg, sign));
    }
    if max_log == f64::NEG_INFINITY {
        return Err(Error::DegenerateSample("all coefficients vanished".into()));
    }
    // keep well-scaled profiles bit-for-bit as c_k * xi_k
    if max_log.abs() < 200.0 {
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let xi = atoms::sample_real(atom, &sample_stream.child(k as u64))?;
            out.push(seq.values[k] * xi);
        }
        Ok(out)
    } else {
        Ok(logs
            .into_iter()
            .map(|(lg, sign)| sign * (lg - max_log).exp())
            .collect())
    }
}

/// Complex realization for complex-Gaussian experiments.
pub fn realize_complex(
    seq: &CoeffSequence,
    atom: AtomSpec,
    sample_stream: &SeedStream,
) -> Result<Vec<Complex64>> {
    let n = seq.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let xi = atoms::sample_complex(atom, &sample_stream.child(k as u64))?;
        out.push(xi * seq.values[k]);
    }
    Ok(out)
}

/// Solve one sample: realize coefficients at `(root, DOM_COEFF, index)` and
/// run the root engine with jitter keyed by `(root, DOM_SOLVER, index)`.
pub fn solve_sample(
    seq: &CoeffSequence,
    atom: AtomSpec,
    root: &SeedStream,
    index: usize,
) -> Result<RootSample> {
    let coeffs = realize_real(seq, atom, &root.child(DOM_COEFF).child(index as u64))?;
    roots::find_roots(&coeffs, &root.child(DOM_SOLVER).child(index as u64))
}

fn gather<T>(outcomes: Vec<Result<T>>) -> Result<(Vec<T>, usize)> {
    let total = outcomes.len();
    let mut ok = Vec::with_capacity(total);
    let mut excluded = 0usize;
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(Error::DegenerateSample(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if ok.is_empty() {
        return Err(Error::DegenerateSample(format!(
            "all {total} samples degenerate"
        )));
    }
    Ok((ok, excluded))
}

/// Mean and standard error of the real-zero count in an interval
/// (endpoints may be infinite).
pub fn mc_expected_count(
    profile: &CoefficientProfile,
    atom: AtomSpec,
    interval: (f64, f64),
    samples: usize,
    root_seed: u64,
) -> Result<ExperimentReport> {
    if samples < 2 {
        return Err(Error::InvalidConfig("mc_expected_count needs samples >= 2".into()));
    }
    let t0 = Instant::now();
    let seq = profile.coeff_sequence()?;
    let root = SeedStream::new(root_seed);
    let set = RootSet::Interval(interval.0, interval.1);
    let outcomes = exec::map_indexed(samples, |i| {
        solve_sample(&seq, atom, &root, i).map(|s| roots::count_in_set(&s, &set) as f64)
    });
    let (counts, excluded) = gather(outcomes)?;
    let (mean, se, _) = mean_and_se(&counts);
    Ok(ExperimentReport {
        config: json!({
            "op": "mc_expected_count",
            "profile": profile.id(),
            "atom": atom.id(),
            "interval": [interval.0, interval.1],
            "samples": samples,
        }),
        root_seed,
        stats: vec![Stat {
            name: "expected_count".into(),
            estimate: mean,
            std_error: se,
            samples: counts.len(),
            excluded,
        }],
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Sample variance of `N(R)` with a jackknife standard error.
pub fn mc_variance_count(
    profile: &CoefficientProfile,
    atom: AtomSpec,
    samples: usize,
    root_seed: u64,
) -> Result<ExperimentReport> {
    if samples < 30 {
        return Err(Error::InvalidConfig("mc_variance_count needs samples >= 30".into()));
    }
    let t0 = Instant::now();
    let seq = profile.coeff_sequence()?;
    let root = SeedStream::new(root_seed);
    let outcomes = exec::map_indexed(samples, |i| {
        solve_sample(&seq, atom, &root, i).map(|s| s.real_count() as f64)
    });
    let (counts, excluded) = gather(outcomes)?;
    let (mean, mean_se, var) = mean_and_se(&counts);
    let jack_se = jackknife_variance_se(&counts);
    Ok(ExperimentReport {
        config: json!({
            "op": "mc_variance_count",
            "profile": profile.id(),
            "atom": atom.id(),
            "samples": samples,
        }),
        root_seed,
        stats: vec![
            Stat {
                name: "variance".into(),
                estimate: var,
                std_error: jack_se,
                samples: counts.len(),
                excluded,
            },
            Stat {
                name: "mean_count".into(),
                estimate: mean,
                std_error: mean_se,
                samples: counts.len(),
                excluded,
            },
        ],
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Jackknife SE of the unbiased sample variance, leave-one-out over the
/// fixed sample order.
fn jackknife_variance_se(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 3 {
        return 0.0;
    }
    let mf = m as f64;
    let s1 = pairwise_sum(values);
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let s2 = pairwise_sum(&sq);
    let mut thetas = Vec::with_capacity(m);
    for &v in values {
        let s1i = s1 - v;
        let s2i = s2 - v * v;
        let mean_i = s1i / (mf - 1.0);
        let var_i = (s2i - (mf - 1.0) * mean_i * mean_i) / (mf - 2.0);
        thetas.push(var_i);
    }
    let theta_bar = pairwise_sum(&thetas) / mf;
    let dev: Vec<f64> = thetas.iter().map(|t| (t - theta_bar) * (t - theta_bar)).collect();
    ((mf - 1.0) / mf * pairwise_sum(&dev)).sqrt()
}

/// Binned empirical density of real zeros, directly comparable to a
/// [`crate::density::DensityCurve`]: per bin, (count of real roots) /
/// (samples * bin width), with the per-bin standard error.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
    pub excluded: usize,
    pub root_seed: u64,
}

pub fn empirical_density(
    profile: &CoefficientProfile,
    atom: AtomSpec,
    bins: usize,
    range: (f64, f64),
    samples: usize,
    root_seed: u64,
) -> Result<Histogram> {
    if bins < 1 || !(range.0 < range.1) {
        return Err(Error::InvalidConfig("empirical_density needs bins >= 1 and lo < hi".into()));
    }
    let seq = profile.coeff_sequence()?;
    let root = SeedStream::new(root_seed);
    let width = (range.1 - range.0) / bins as f64;
    // sparse per-sample bin counts keep the parallel map small
    let outcomes = exec::map_indexed(samples, |i| {
        solve_sample(&seq, atom, &root, i).map(|s| {
            let mut hits: Vec<(u32, u32)> = Vec::new();
            for x in s.real_roots() {
                if x < range.0 || x >= range.1 {
                    continue;
                }
                let b = (((x - range.0) / width) as usize).min(bins - 1) as u32;
                match hits.iter_mut().find(|(bb, _)| *bb == b) {
                    Some((_, c)) => *c += 1,
                    None => hits.push((b, 1)),
                }
            }
            hits
        })
    });
    let (per_sample, excluded) = gather(outcomes)?;
    let m = per_sample.len();
    let mut count = vec![0u64; bins];
    let mut count_sq = vec![0u64; bins];
    for hits in &per_sample {
        for &(b, c) in hits {
            count[b as usize] += u64::from(c);
            count_sq[b as usize] += u64::from(c) * u64::from(c);
        }
    }
    let mf = m as f64;
    let mut density = Vec::with_capacity(bins);
    let mut std_error = Vec::with_capacity(bins);
    for b in 0..bins {
        let mean = count[b] as f64 / mf;
        let var = (count_sq[b] as f64 - mf * mean * mean) / (mf - 1.0);
        density.push(mean / width);
        std_error.push((var.max(0.0) / mf).sqrt() / width);
    }
    let edges = (0..=bins).map(|b| range.0 + b as f64 * width).collect();
    Ok(Histogram {
        edges,
        density,
        std_error,
        samples: m,
        excluded,
        root_seed,
    })
}

/// Microscopic observation window: scale `delta`, centers with
/// `|center| in I(delta)`, rescaled coordinates `z_check = z / (1e-3 delta)`,
/// and the radial bump test function's support radius in rescaled units
/// (1e-3 is the theorems' radius; probes may widen it to get desk-scale hit
/// rates).
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationWindow {
    pub delta: f64,
    pub centers: Vec<Complex64>,
    pub support_radius: f64,
}

impl CorrelationWindow {
    pub const THEOREM_RADIUS: f64 = 1e-3;

    pub fn new(delta: f64, centers: Vec<Complex64>, support_radius: f64) -> Self {
        Self {
            delta,
            centers,
            support_radius,
        }
    }

    /// Default placement: all centers on the positive real axis at
    /// `|z| = 1 - 1.5 delta`, the middle of `I(delta)`.
    pub fn centered(delta: f64, count: usize, support_radius: f64) -> Self {
        let r = 1.0 - 1.5 * delta;
        Self::new(
            delta,
            (0..count).map(|_| Complex64::new(r, 0.0)).collect(),
            support_radius,
        )
    }

    pub fn rescale_factor(&self) -> f64 {
        1e-3 * self.delta
    }

    /// `I(delta)`: `[1-2d, 1-d]` for `d >= 1/(10n)`, else `[1-1/n, 1+1/n]`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(0.0 < self.delta && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "window delta must be in (0,1), got {}",
                self.delta
            )));
        }
        let (lo, hi) = if self.delta >= 1.0 / (10.0 * n as f64) {
            (1.0 - 2.0 * self.delta, 1.0 - self.delta)
        } else {
            (1.0 - 1.0 / n as f64, 1.0 + 1.0 / n as f64)
        };
        for c in &self.centers {
            let r = c.norm();
            if !(lo - 1e-12 <= r && r <= hi + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "window center |{c}| = {r} outside I(delta) = [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// The standard compactly supported mollifier `exp(-1/(1-|u|^2))` scaled to
/// a given radius and normalized to unit integral (1D for real slots, 2D for
/// complex slots).
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    radius: f64,
    norm_1d: f64,
    norm_2d: f64,
}

impl Bump {
    pub fn new(radius: f64) -> Self {
        // int_{-1}^{1} e^{-1/(1-u^2)} du and the 2D disk integral
        let i1 = crate::quad::integrate(
            |u| (-1.0 / (1.0 - u * u)).exp(),
            -1.0,
            1.0,
            1e-13,
            0.0,
            40,
        )
        .value;
        let i2 = crate::quad::integrate(
            |r| 2.0 * std::f64::consts::PI * r * (-1.0 / (1.0 - r * r)).exp(),
            0.0,
            1.0,
            1e-13,
            0.0,
            40,
        )
        .value;
        Self {
            radius,
            norm_1d: 1.0 / (radius * i1),
            norm_2d: 1.0 / (radius * radius * i2),
        }
    }

    #[inline]
    pub fn eval_1d(&self, u: f64) -> f64 {
        let v = u / self.radius;
        let w = 1.0 - v * v;
        if w <= 0.0 {
            0.0
        } else {
            self.norm_1d * (-1.0 / w).exp()
        }
    }

    #[inline]
    pub fn eval_2d(&self, u: Complex64) -> f64 {
        let v2 = (u.re * u.re + u.im * u.im) / (self.radius * self.radius);
        let w = 1.0 - v2;
        if w <= 0.0 {
            0.0
        } else {
            self.norm_2d * (-1.0 / w).exp()
        }
    }
}

/// Monte Carlo estimate of a correlation integral against the product bump.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationEstimate {
    pub k: usize,
    pub l: usize,
    pub window: CorrelationWindow,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub excluded: usize,
    pub root_seed: u64,
}

/// Sum of `prod_a f(slot_a, root_{i_a})` over ordered tuples of distinct
/// root indices.
fn distinct_tuple_sum(values_per_slot: &[Vec<(usize, f64)>]) -> f64 {
    fn rec(slots: &[Vec<(usize, f64)>], used: &mut Vec<usize>, level: usize) -> f64 {
        if level == slots.len() {
            return 1.0;
        }
        let mut acc = 0.0;
        for &(idx, val) in &slots[level] {
            if used.contains(&idx) {
                continue;
            }
            used.push(idx);
            acc += val * rec(slots, used, level + 1);
            used.pop();
        }
        acc
    }
    if values_per_slot.is_empty() {
        return 1.0;
    }
    rec(values_per_slot, &mut Vec::new(), 0)
}

/// Per-sample estimator value for the mixed `(k, l)` correlation: real roots
/// fill the first `k` slots, upper-half-plane roots the last `l`, all in
/// rescaled coordinates.
fn mixed_correlation_value(
    sample: &RootSample,
    window: &CorrelationWindow,
    k: usize,
    l: usize,
    bump: &Bump,
) -> f64 {
    let lam = window.rescale_factor();
    let real_slots: Vec<Vec<(usize, f64)>> = (0..k)
        .map(|a| {
            let c = window.centers[a].re / lam;
            sample
                .real_roots()
                .enumerate()
                .filter_map(|(i, x)| {
                    let v = bump.eval_1d(x / lam - c);
                    (v > 0.0).then_some((i, v))
                })
                .collect()
        })
        .collect();
    let upper: Vec<Complex64> = sample.upper_half_roots().collect();
    let complex_slots: Vec<Vec<(usize, f64)>> = (0..l)
        .map(|b| {
            let c = window.centers[k + b] / lam;
            upper
                .iter()
                .enumerate()
                .filter_map(|(j, z)| {
                    let v = bump.eval_2d(z / lam - c);
                    (v > 0.0).then_some((j, v))
                })
                .collect()
        })
        .collect();
    distinct_tuple_sum(&real_slots) * distinct_tuple_sum(&complex_slots)
}

/// Per-sample value for the complex k-point correlation over all roots.
fn complex_correlation_value(
    roots: &[Complex64],
    centers: &[Complex64],
    lam: f64,
    bump: &Bump,
) -> f64 {
    let slots: Vec<Vec<(usize, f64)>> = centers
        .iter()
        .map(|c| {
            let cc = c / lam;
            roots
                .iter()
                .enumerate()
                .filter_map(|(i, z)| {
                    let v = bump.eval_2d(z / lam - cc);
                    (v > 0.0).then_some((i, v))
                })
                .collect()
        })
        .collect();
    distinct_tuple_sum(&slots)
}

/// Monte Carlo estimate of `int G rho^{(k,l)}` (real atoms, mixed
/// correlation) or `int G rho^{(k)}` (complex atoms, `l` must be 0).
pub fn correlation_estimate(
    profile: &CoefficientProfile,
    atom: AtomSpec,
    window: &CorrelationWindow,
    orders: (usize, usize),
    samples: usize,
    root_seed: u64,
) -> Result<CorrelationEstimate> {
    let (k, l) = orders;
    if k + l == 0 {
        return Err(Error::InvalidConfig("correlation orders need k + l >= 1".into()));
    }
    if window.centers.len() != k + l {
        return Err(Error::InvalidConfig(format!(
            "window has {} centers for orders ({k},{l})",
            window.centers.len()
        )));
    }
    window.validate(profile.n)?;
    if atom.is_complex() && l != 0 {
        return Err(Error::InvalidConfig(
            "complex atoms use the complex k-point correlation (l = 0)".into(),
        ));
    }
    let seq = profile.coeff_sequence()?;
    let root = SeedStream::new(root_seed);
    let bump = Bump::new(window.support_radius);
    let lam = window.rescale_factor();
    let outcomes = exec::map_indexed(samples, |i| {
        if atom.is_complex() {
            let coeffs = realize_complex(&seq, atom, &root.child(DOM_COEFF).child(i as u64))?;
            let zs = roots::find_roots_complex(&coeffs, &root.child(DOM_SOLVER).child(i as u64))?;
            Ok(complex_correlation_value(&zs, &window.centers, lam, &bump))
        } else {
            solve_sample(&seq, atom, &root, i)
                .map(|s| mixed_correlation_value(&s, window, k, l, &bump))
        }
    });
    let (values, excluded) = gather(outcomes)?;
    let (mean, se, _) = mean_and_se(&values);
    Ok(CorrelationEstimate {
        k,
        l,
        window: window.clone(),
        estimate: mean,
        std_error: se,
        samples: values.len(),
        excluded,
        root_seed,
    })
}

/// Empirical `P(N(B(x, gamma)) >= 2)` per gamma: the repulsion probe.
/// Ball radii are taken in the unrescaled plane (the rescaling is a
/// bijection on root sets, so only the constant of the `gamma^{3/2}` law
/// moves, not the log-log slope).
pub fn repulsion_probe(
    profile: &CoefficientProfile,
    atom: AtomSpec,
    center: f64,
    gammas: &[f64],
    samples: usize,
    root_seed: u64,
) -> Result<ExperimentReport> {
    let delta = (1.0 - center.abs()) / 1.5;
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "repulsion center must satisfy |x| < 1, got {center}"
        )));
    }
    let t0 = Instant::now();
    let seq = profile.coeff_sequence()?;
    let root = SeedStream::new(root_seed);
    let c = Complex64::new(center, 0.0);
    let gammas_v = gammas.to_vec();
    let outcomes = exec::map_indexed(samples, |i| {
        solve_sample(&seq, atom, &root, i).map(|s| {
            gammas_v
                .iter()
                .map(|&g| u8::from(roots::count_in_set(&s, &RootSet::Disk(c, g)) >= 2))
                .collect::<Vec<u8>>()
        })
    });
    let (per_sample, excluded) = gather(outcomes)?;
    let m = per_sample.len() as f64;
    let mut stats = Vec::with_capacity(gammas.len());
    for (gi, &g) in gammas.iter().enumerate() {
        let hits: u64 = per_sample.iter().map(|v| u64::from(v[gi])).sum();
        let p = hits as f64 / m;
        let se = (p * (1.0 - p) / m).sqrt();
        stats.push(Stat {
            name: format!("p_ge2(gamma={g})"),
            estimate: p,
            std_error: se,
            samples: per_sample.len(),
            excluded,
        });
    }
    Ok(ExperimentReport {
        config: json!({
            "op": "repulsion_probe",
            "profile": profile.id(),
            "atom": atom.id(),
            "center": center,
            "delta": delta,
            "gammas": gammas,
            "samples": samples,
        }),
        root_seed,
        stats,
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Empirical `P(|sum a_i xi_i - z| <= radius)`: the anti-concentration probe.
pub fn anticoncentration_probe(
    atom: AtomSpec,
    weights: &[f64],
    z: Complex64,
    radius: f64,
    samples: usize,
    root_seed: u64,
) -> Result<ExperimentReport> {
    if weights.is_empty() {
        return Err(Error::InvalidConfig("anticoncentration needs weights".into()));
    }
    let t0 = Instant::now();
    let root = SeedStream::new(root_seed);
    let weights_v = weights.to_vec();
    let outcomes: Vec<Result<f64>> = exec::map_indexed(samples, |i| {
        let stream = root.child(DOM_COEFF).child(i as u64);
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, &a) in weights_v.iter().enumerate() {
            let xi = atoms::sample_complex(atom, &stream.child(k as u64))?;
            sum += a * xi;
        }
        Ok(f64::from(u8::from((sum - z).norm() <= radius)))
    });
    let (vals, excluded) = gather(outcomes)?;
    let m = vals.len() as f64;
    let p = pairwise_sum(&vals) / m;
    let se = (p * (1.0 - p) / m).sqrt();
    Ok(ExperimentReport {
        config: json!({
            "op": "anticoncentration_probe",
            "atom": atom.id(),
            "n": weights.len(),
            "z": [z.re, z.im],
            "radius": radius,
            "samples": samples,
        }),
        root_seed,
        stats: vec![Stat {
            name: "probability".into(),
            estimate: p,
            std_error: se,
            samples: vals.len(),
            excluded,
        }],
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Rotation-invariance check for complex-Gaussian hyperbolic truncations:
/// compares the k-point correlation estimate at the window's centers against
/// the estimate at `e^{i theta}` times the centers with the rotated (radial,
/// hence identical) test function, on the same samples. Reports the gap, a
/// quadrature-combined joint SE, and both one-sided estimates.
pub fn rotation_invariance_check(
    l: f64,
    n: usize,
    window: &CorrelationWindow,
    theta: f64,
    atom: AtomSpec,
    samples: usize,
    root_seed: u64,
) -> Result<ExperimentReport> {
    if !atom.is_complex() {
        return Err(Error::InvalidAtom(
            "rotation invariance requires complex Gaussian atoms".into(),
        ));
    }
    let profile = CoefficientProfile::new(ProfileKind::Hyperbolic { l }, n);
    window.validate(n)?;
    let t0 = Instant::now();
    let seq = profile.coeff_sequence()?;
    let root = SeedStream::new(root_seed);
    let bump = Bump::new(window.support_radius);
    let lam = window.rescale_factor();
    let rot = Complex64::from_polar(1.0, theta);
    let rotated: Vec<Complex64> = window.centers.iter().map(|c| c * rot).collect();
    let outcomes = exec::map_indexed(samples, |i| {
        let coeffs = realize_complex(&seq, atom, &root.child(DOM_COEFF).child(i as u64))?;
        let zs = roots::find_roots_complex(&coeffs, &root.child(DOM_SOLVER).child(i as u64))?;
        let a = complex_correlation_value(&zs, &window.centers, lam, &bump);
        let b = complex_correlation_value(&zs, &rotated, lam, &bump);
        Ok((a, b))
    });
    let (pairs, excluded) = gather(outcomes)?;
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (ma, sa, _) = mean_and_se(&a);
    let (mb, sb, _) = mean_and_se(&b);
    let joint = (sa * sa + sb * sb).sqrt();
    Ok(ExperimentReport {
        config: json!({
            "op": "rotation_invariance_check",
            "L": l,
            "n": n,
            "theta": theta,
            "samples": samples,
            "delta": window.delta,
        }),
        root_seed,
        stats: vec![
            Stat {
                name: "gap".into(),
                estimate: (ma - mb).abs(),
                std_error: joint,
                samples: pairs.len(),
                excluded,
            },
            Stat {
                name: "estimate_base".into(),
                estimate: ma,
                std_error: sa,
                samples: pairs.len(),
                excluded,
            },
            Stat {
                name: "estimate_rotated".into(),
                estimate: mb,
                std_error: sb,
                samples: pairs.len(),
                excluded,
            },
        ],
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Gap between two atoms' expected-count estimates, with the SEs combined in
/// quadrature (the significance convention used across the suite is 4 SE).
pub fn compare_atoms(
    profile: &CoefficientProfile,
    atom_a: AtomSpec,
    atom_b: AtomSpec,
    interval: (f64, f64),
    samples: usize,
    root_seed: u64,
) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let ra = mc_expected_count(profile, atom_a, interval, samples, root_seed)?;
    let rb = mc_expected_count(profile, atom_b, interval, samples, root_seed)?;
    let sa = ra.stat("expected_count").unwrap();
    let sb = rb.stat("expected_count").unwrap();
    let joint = (sa.std_error.powi(2) + sb.std_error.powi(2)).sqrt();
    Ok(ExperimentReport {
        config: json!({
            "op": "compare_atoms",
            "profile": profile.id(),
            "atoms": [atom_a.id(), atom_b.id()],
            "interval": [interval.0, interval.1],
            "samples": samples,
        }),
        root_seed,
        stats: vec![
            Stat {
                name: "gap".into(),
                estimate: (sa.estimate - sb.estimate).abs(),
                std_error: joint,
                samples: sa.samples.min(sb.samples),
                excluded: sa.excluded + sb.excluded,
            },
            Stat {
                name: format!("count[{}]", atom_a.id()),
                estimate: sa.estimate,
                std_error: sa.std_error,
                samples: sa.samples,
                excluded: sa.excluded,
            },
            Stat {
                name: format!("count[{}]", atom_b.id()),
                estimate: sb.estimate,
                std_error: sb.std_error,
                samples: sb.samples,
                excluded: sb.excluded,
            },
        ],
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Mean, standard error, and (given a variance bound) the Chebyshev tail
/// bound `P(|S - target| >= lambda) <= bound / (m lambda^2)` of the Monte
/// Carlo sampling lemma.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McMean {
    pub mean: f64,
    pub std_error: f64,
    pub chebyshev_bound: Option<f64>,
}

pub fn mc_mean(values: &[f64], variance_bound: Option<f64>, lambda: Option<f64>) -> Result<McMean> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("mc_mean needs a nonempty sequence".into()));
    }
    let (mean, se, _) = mean_and_se(values);
    let chebyshev = match (variance_bound, lambda) {
        (Some(vb), Some(lam)) if lam > 0.0 => {
            Some(vb / (values.len() as f64 * lam * lam))
        }
        _ => None,
    };
    Ok(McMean {
        mean,
        std_error: se,
        chebyshev_bound: chebyshev,
    })
}

/// Least-squares fit of counts against `ln n`, plus the pairwise doubling
/// slopes `(E N_{2n} - E N_n)/ln 2`. The `O(1)` intercept claims are tested
/// as bounded residuals, never as vanishing ones.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub pairwise_slopes: Vec<f64>,
}

pub fn slope_fit(ns: &[usize], counts: &[f64]) -> Result<SlopeFit> {
    if ns.len() != counts.len() || ns.len() < 3 {
        return Err(Error::InvalidConfig(
            "slope_fit needs >= 3 (n, count) pairs of equal length".into(),
        ));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let m = xs.len() as f64;
    let sx = pairwise_sum(&xs);
    let sy = pairwise_sum(counts);
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(counts).map(|(x, y)| x * y).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let residuals = xs
        .iter()
        .zip(counts)
        .map(|(x, y)| y - (slope * x + intercept))
        .collect();
    let pairwise_slopes = xs
        .windows(2)
        .zip(counts.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    Ok(SlopeFit {
        slope,
        intercept,
        residuals,
        pairwise_slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ProfileKind;

    fn kac(n: usize) -> CoefficientProfile {
        CoefficientProfile::new(ProfileKind::Kac, n)
    }

    #[test]
    fn linear_polynomial_always_one_root() {
        let r = mc_expected_count(
            &kac(1),
            AtomSpec::Gaussian { mean: 0.0 },
            (f64::NEG_INFINITY, f64::INFINITY),
            500,
            42,
        )
        .unwrap();
        let s = r.stat("expected_count").unwrap();
        assert_eq!(s.estimate, 1.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.excluded, 0);
    }

    #[test]
    fn variance_zero_for_linear() {
        let r = mc_variance_count(&kac(1), AtomSpec::Gaussian { mean: 0.0 }, 64, 7).unwrap();
        assert_eq!(r.stat("variance").unwrap().estimate, 0.0);
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let run = |workers| {
            exec::with_workers(Some(workers), || {
                mc_expected_count(
                    &kac(24),
                    AtomSpec::Rademacher,
                    (f64::NEG_INFINITY, f64::INFINITY),
                    300,
                    99,
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(2);
        let sa = a.stat("expected_count").unwrap();
        let sb = b.stat("expected_count").unwrap();
        assert_eq!(sa.estimate.to_bits(), sb.estimate.to_bits());
        assert_eq!(sa.std_error.to_bits(), sb.std_error.to_bits());
    }

    #[test]
    fn histogram_matches_cauchy_shape() {
        let h = empirical_density(
            &kac(1),
            AtomSpec::Gaussian { mean: 0.0 },
            8,
            (-2.0, 2.0),
            4000,
            5,
        )
        .unwrap();
        for b in 0..8 {
            let mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
            let want = 1.0 / (std::f64::consts::PI * (1.0 + mid * mid));
            assert!(
                (h.density[b] - want).abs() <= 4.0 * h.std_error[b] + 0.02,
                "bin {b}: {} vs {want}",
                h.density[b]
            );
        }
    }

    #[test]
    fn histogram_symmetry_mean_zero() {
        let h = empirical_density(
            &kac(16),
            AtomSpec::Gaussian { mean: 0.0 },
            10,
            (-2.5, 2.5),
            4000,
            11,
        )
        .unwrap();
        for b in 0..5 {
            let mirror = 9 - b;
            let joint = (h.std_error[b].powi(2) + h.std_error[mirror].powi(2)).sqrt();
            assert!(
                (h.density[b] - h.density[mirror]).abs() <= 4.0 * joint + 1e-12,
                "bins {b}/{mirror}"
            );
        }
    }

    #[test]
    fn correlation_k2_vanishes_with_single_root() {
        // n = 1: one root total, no distinct pairs
        let w = CorrelationWindow::new(
            0.05,
            vec![Complex64::new(0.925, 0.0), Complex64::new(0.925, 0.0)],
            100.0,
        );
        let est = correlation_estimate(
            &kac(1),
            AtomSpec::Gaussian { mean: 0.0 },
            &w,
            (2, 0),
            400,
            3,
        )
        .unwrap();
        assert_eq!(est.estimate, 0.0);
    }

    #[test]
    fn correlation_k1_matches_cauchy_closed_form() {
        // n = 1 Kac: exact Cauchy density; compare int G(t_check) rho dt
        let delta = 0.05;
        let w = CorrelationWindow::centered(delta, 1, 1000.0);
        let est = correlation_estimate(
            &kac(1),
            AtomSpec::Gaussian { mean: 0.0 },
            &w,
            (1, 0),
            30_000,
            17,
        )
        .unwrap();
        let lam = w.rescale_factor();
        let c = w.centers[0].re;
        let bump = Bump::new(w.support_radius);
        let oracle = crate::quad::integrate(
            |u| {
                let t = c + lam * u;
                bump.eval_1d(u) * lam / (std::f64::consts::PI * (1.0 + t * t))
            },
            -w.support_radius,
            w.support_radius,
            1e-11,
            0.0,
            40,
        )
        .value;
        assert!(
            (est.estimate - oracle).abs() <= 3.0 * est.std_error,
            "{} vs {oracle} (se {})",
            est.estimate,
            est.std_error
        );
    }

    #[test]
    fn window_center_validation() {
        let w = CorrelationWindow::new(0.05, vec![Complex64::new(0.5, 0.0)], 1e-3);
        assert!(w.validate(100).is_err());
        let ok = CorrelationWindow::centered(0.05, 1, 1e-3);
        assert!(ok.validate(100).is_ok());
    }

    #[test]
    fn repulsion_single_root_never_two() {
        let r = repulsion_probe(
            &kac(1),
            AtomSpec::Gaussian { mean: 0.0 },
            0.97,
            &[0.02, 0.01],
            300,
            21,
        )
        .unwrap();
        for s in &r.stats {
            assert_eq!(s.estimate, 0.0);
        }
    }

    #[test]
    fn anticoncentration_exact_small_rademacher() {
        // n = 4, radius 1/2: P(S = 0) = C(4,2)/2^4 = 0.375
        let r = anticoncentration_probe(
            AtomSpec::Rademacher,
            &[1.0; 4],
            Complex64::new(0.0, 0.0),
            0.5,
            40_000,
            13,
        )
        .unwrap();
        let s = r.stat("probability").unwrap();
        assert!(
            (s.estimate - 0.375).abs() <= 3.0 * s.std_error,
            "{} (se {})",
            s.estimate,
            s.std_error
        );
    }

    #[test]
    fn rotation_gap_zero_at_theta_zero() {
        let w = CorrelationWindow::centered(0.05, 1, 200.0);
        let r = rotation_invariance_check(
            1.0,
            32,
            &w,
            0.0,
            AtomSpec::ComplexGaussian,
            200,
            31,
        )
        .unwrap();
        assert_eq!(r.stat("gap").unwrap().estimate, 0.0);
    }

    #[test]
    fn rotation_rejects_real_atoms() {
        let w = CorrelationWindow::centered(0.05, 1, 200.0);
        assert!(rotation_invariance_check(
            1.0,
            16,
            &w,
            0.5,
            AtomSpec::Gaussian { mean: 0.0 },
            10,
            1
        )
        .is_err());
    }

    #[test]
    fn mc_mean_constant_sequence() {
        let m = mc_mean(&[2.5; 40], Some(0.25), Some(0.05)).unwrap();
        assert_eq!(m.mean, 2.5);
        assert_eq!(m.std_error, 0.0);
        // 0.25 / (40 * 0.0025) = 2.5
        assert!((m.chebyshev_bound.unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_bound_monotone_in_m() {
        let b1 = mc_mean(&vec![0.0; 100], Some(1.0), Some(0.1))
            .unwrap()
            .chebyshev_bound
            .unwrap();
        let b2 = mc_mean(&vec![0.0; 1000], Some(1.0), Some(0.1))
            .unwrap()
            .chebyshev_bound
            .unwrap();
        assert!(b2 < b1);
    }

    #[test]
    fn slope_fit_exact_line() {
        let ns = [64usize, 128, 256, 512];
        let counts: Vec<f64> = ns.iter().map(|&n| 1.5 * (n as f64).ln() + 0.25).collect();
        let fit = slope_fit(&ns, &counts).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.intercept - 0.25).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        for p in fit.pairwise_slopes {
            assert!((p - 1.5).abs() < 1e-12);
        }
    }
}
