//! Adaptive Gauss-Kronrod quadrature with the endpoint handling the density
//! integrals need: bisection on the 15-point rule, panel splits at the
//! `1 -+ 1/n` pivots where the real-zero density peaks, logarithmic
//! substitution `1 - t = e^{-u}` on the panels approaching +-1, and the
//! rational map `t = u/(1-|u|)` for infinite endpoints.

use serde::Serialize;

/// Kronrod nodes for the 15-point rule on [-1, 1] (nonnegative half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], ...).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    /// False when refinement hit the depth limit before the tolerance;
    /// the value and estimated error are still reported.
    pub converged: bool,
    pub panels: usize,
}

impl QuadResult {
    fn merge(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            converged: self.converged && other.converged,
            panels: self.panels + other.panels,
        }
    }
}

/// One 15-point Kronrod evaluation on [a, b]: returns (value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let raw = ((res_k - res_g) * half).abs();
    // standard QUADPACK error rescaling
    let mut err = raw;
    if res_asc != 0.0 && raw != 0.0 {
        err = res_asc * 1.0f64.min((200.0 * raw / res_asc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > err {
        err = floor;
    }
    (value, err)
}

/// Adaptive bisection to `|error| <= max(abs_tol, rel_tol * |value|)`.
/// Past `max_depth` the panel is accepted with its estimated error and the
/// result is marked unconverged.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> QuadResult {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        rel_tol: f64,
        abs_tol: f64,
        depth: u32,
    ) -> QuadResult {
        let (value, err) = gk15(f, a, b);
        if err <= abs_tol.max(rel_tol * value.abs()) || (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            return QuadResult {
                value,
                abs_error: err,
                converged: true,
                panels: 1,
            };
        }
        if depth == 0 {
            return QuadResult {
                value,
                abs_error: err,
                converged: false,
                panels: 1,
            };
        }
        let mid = 0.5 * (a + b);
        let left = recurse(f, a, mid, rel_tol, 0.5 * abs_tol, depth - 1);
        let right = recurse(f, mid, b, rel_tol, 0.5 * abs_tol, depth - 1);
        left.merge(right)
    }
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
            panels: 0,
        };
    }
    recurse(&f, a, b, rel_tol, abs_tol, max_depth)
}

/// Integration range for expected counts; `Range` endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Interval {
    RealLine,
    Range(f64, f64),
}

impl Interval {
    fn bounds(self) -> (f64, f64) {
        match self {
            Interval::RealLine => (f64::NEG_INFINITY, f64::INFINITY),
            Interval::Range(a, b) => (a, b),
        }
    }
}

/// Maximum bisection depth; refinement past this reports estimated error.
pub const MAX_DEPTH: u32 = 60;

/// Integrate a real-zero density over an interval.
///
/// Splits at `+-(1 - 1/n)`, `+-1`, `+-(1 + 1/n)` and `+-1/2`, `+-2`; the
/// long panels hugging `+-1` are integrated in the variable `u` with
/// `dist(t, +-1) = e^{-u}`, which flattens the `1/(1-|t|)` growth; infinite
/// tails use `t = u/(1-|u|)`.
pub fn integrate_density<F: Fn(f64) -> f64>(
    density: F,
    interval: Interval,
    n: usize,
    rel_tol: f64,
) -> QuadResult {
    let (a, b) = interval.bounds();
    if !(a < b) {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
            panels: 0,
        };
    }
    let w = 1.0 / (n.max(2) as f64);
    let mut cuts: Vec<f64> = Vec::new();
    for p in [
        -2.0,
        -1.0 - w,
        -1.0,
        -1.0 + w,
        -0.5,
        0.5,
        1.0 - w,
        1.0,
        1.0 + w,
        2.0,
    ] {
        if p > a && p < b {
            cuts.push(p);
        }
    }
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    // first pass: coarse panel values to set the absolute budget
    let mut coarse = 0.0f64;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        coarse += panel(&density, lo, hi, w, 1e-4, f64::MAX).value.abs();
    }
    let budget = rel_tol * coarse.max(1e-300) / edges.len().max(1) as f64;

    let mut total = QuadResult {
        value: 0.0,
        abs_error: 0.0,
        converged: true,
        panels: 0,
    };
    for pair in edges.windows(2) {
        total = total.merge(panel(&density, pair[0], pair[1], w, rel_tol, budget));
    }
    total
}

fn panel<F: Fn(f64) -> f64>(
    density: &F,
    lo: f64,
    hi: f64,
    w: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> QuadResult {
    // infinite tails: t = u/(1-|u|), dt = du/(1-|u|)^2
    if hi == f64::INFINITY {
        let ua = lo / (1.0 + lo.abs());
        return integrate(
            |u| {
                let d = 1.0 - u.abs();
                density(u / d) / (d * d)
            },
            ua,
            1.0,
            rel_tol,
            abs_tol,
            MAX_DEPTH,
        );
    }
    if lo == f64::NEG_INFINITY {
        let ub = hi / (1.0 + hi.abs());
        return integrate(
            |u| {
                let d = 1.0 - u.abs();
                density(u / d) / (d * d)
            },
            -1.0,
            ub,
            rel_tol,
            abs_tol,
            MAX_DEPTH,
        );
    }
    // panels flush against +-1 from either side: substitute dist = e^{-u}
    let anchors = [1.0f64, -1.0];
    for anchor in anchors {
        let dlo = (lo - anchor).abs();
        let dhi = (hi - anchor).abs();
        let near = dlo.min(dhi);
        let far = dlo.max(dhi);
        // apply only to the long inner/outer panels, not the tiny 1/n caps
        if (near - w).abs() <= 1e-12 && far > 4.0 * w {
            let sign = if (lo + hi) * 0.5 > anchor { 1.0 } else { -1.0 };
            let (ua, ub) = (-far.ln(), -near.ln());
            return integrate(
                |u| {
                    let e = (-u).exp();
                    density(anchor + sign * e) * e
                },
                ua,
                ub,
                rel_tol,
                abs_tol,
                MAX_DEPTH,
            );
        }
    }
    integrate(density, lo, hi, rel_tol, abs_tol, MAX_DEPTH)
}
