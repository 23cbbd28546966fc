//! Unit-variance atom distributions and deterministic, splittable streams.
//!
//! Every random draw in the crate is keyed by `(root_seed, path)` where the
//! path identifies (experiment, sample index, coefficient index). Streams are
//! derived by counter-style hashing rather than sequential generation, so the
//! draw at a given path never depends on thread scheduling and experiments
//! replay bit-identically at any worker count.

use crate::error::Error;
use crate::Result;
use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Distribution of the random multipliers `xi_k`; all have unit variance
/// (complex: Var Re = Var Im = 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AtomSpec {
    Gaussian { mean: f64 },
    Rademacher,
    UniformUnitvar,
    ComplexGaussian,
}

impl AtomSpec {
    pub fn is_complex(self) -> bool {
        matches!(self, AtomSpec::ComplexGaussian)
    }

    pub fn mean(self) -> f64 {
        match self {
            AtomSpec::Gaussian { mean } => mean,
            _ => 0.0,
        }
    }

    pub fn id(self) -> String {
        match self {
            AtomSpec::Gaussian { mean } => {
                if mean == 0.0 {
                    "gaussian".into()
                } else {
                    format!("gaussian(mu={mean})")
                }
            }
            AtomSpec::Rademacher => "rademacher".into(),
            AtomSpec::UniformUnitvar => "uniform_unitvar".into(),
            AtomSpec::ComplexGaussian => "complex_gaussian".into(),
        }
    }

    /// Analytic absolute moment `E|xi|^3`, recorded in reports as the
    /// `2 + eps` moment bound (at `eps = 1`); never used in computation.
    pub fn abs_third_moment(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            // E|Z + mu|^3 for Z standard normal, via the folded normal:
            // closed form below reduces to 2 sqrt(2/pi) at mu = 0.
            AtomSpec::Gaussian { mean } => folded_normal_third_moment(mean),
            AtomSpec::Rademacher => 1.0,
            // int |x|^3 / (2 sqrt3) over [-sqrt3, sqrt3] = 3 sqrt3 / 4
            AtomSpec::UniformUnitvar => 0.75 * 3.0f64.sqrt(),
            // |xi| is Rayleigh(sigma = 1/sqrt2): E|xi|^3 = 3 sigma^3 sqrt(pi/2)
            AtomSpec::ComplexGaussian => {
                let sigma = 0.5f64.sqrt();
                3.0 * sigma.powi(3) * (PI / 2.0).sqrt()
            }
        }
    }
}

fn folded_normal_third_moment(mu: f64) -> f64 {
    use crate::special::erf_std;
    use std::f64::consts::PI;
    // E|Z+mu|^3 = (mu^2+2) mu erf(mu/sqrt2) + sqrt(2/pi) (mu^2+2) e^{-mu^2/2}
    //             ... assembled from folded-normal raw moments
    let phi = (-0.5 * mu * mu).exp() / (2.0 * PI).sqrt();
    let big_phi = 0.5 * (1.0 + erf_std(mu / 2.0f64.sqrt()));
    // m3 = mu(mu^2+3) (2 Phi(mu) - 1) + 2 phi(mu) (mu^2 + 2)
    mu * (mu * mu + 3.0) * (2.0 * big_phi - 1.0) + 2.0 * phi * (mu * mu + 2.0)
}

/// Exact analytic moment `E[xi^order]` for orders 1..=4. The complex Gaussian
/// returns 0 for all four (rotation invariance kills every pseudo-moment).
pub fn moment(spec: AtomSpec, order: u32) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidAtom(format!(
            "moment order must be 1..=4, got {order}"
        )));
    }
    Ok(match spec {
        AtomSpec::Gaussian { mean } => {
            let mu = mean;
            match order {
                1 => mu,
                2 => mu * mu + 1.0,
                3 => mu * mu * mu + 3.0 * mu,
                _ => mu.powi(4) + 6.0 * mu * mu + 3.0,
            }
        }
        AtomSpec::Rademacher => {
            if order % 2 == 0 {
                1.0
            } else {
                0.0
            }
        }
        AtomSpec::UniformUnitvar => {
            // U[-a, a] with a = sqrt3: E X^{2m} = a^{2m} / (2m+1)
            match order {
                1 | 3 => 0.0,
                2 => 1.0,
                _ => 9.0 / 5.0,
            }
        }
        AtomSpec::ComplexGaussian => 0.0,
    })
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output mixing; bijective on u64.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// A position in the deterministic stream tree. Children are derived by
/// hashing, so streams at distinct paths are statistically independent and a
/// stream's draws depend only on `(root_seed, path)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    root_seed: u64,
    key: u64,
}

impl SeedStream {
    pub fn new(root_seed: u64) -> Self {
        Self {
            root_seed,
            key: mix64(root_seed ^ 0x5851_F42D_4C95_7F2D),
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    /// Derive the child stream at `index`. Distinct indices give distinct
    /// keys (the index map is injective and the mixer bijective).
    pub fn child(&self, index: u64) -> Self {
        let salted = mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        Self {
            root_seed: self.root_seed,
            key: mix64(self.key ^ salted),
        }
    }

    /// Descend a whole path at once.
    pub fn descend(&self, path: &[u64]) -> Self {
        let mut s = *self;
        for &p in path {
            s = s.child(p);
        }
        s
    }

    /// A generator positioned at this stream; successive outputs walk the
    /// SplitMix64 counter from the derived key.
    pub fn rng(&self) -> StreamRng {
        StreamRng { state: self.key }
    }
}

/// Counter-based generator: state advances by the golden gamma, output is the
/// SplitMix64 finalizer. Cheap enough to instantiate per (sample, coefficient).
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        let mut chunks = dest.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rem = chunks.into_remainder();
        if !rem.is_empty() {
            let bytes = self.next_u64().to_le_bytes();
            rem.copy_from_slice(&bytes[..rem.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

impl StreamRng {
    /// Uniform in [0, 1) from the top 53 bits.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One real or complex draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomValue {
    Real(f64),
    Complex(Complex64),
}

/// Draw one value of the atom at the given stream position.
pub fn sample_atom(spec: AtomSpec, stream: &SeedStream) -> AtomValue {
    match spec {
        AtomSpec::ComplexGaussian => AtomValue::Complex(sample_complex(spec, stream).unwrap()),
        _ => AtomValue::Real(sample_real(spec, stream).unwrap()),
    }
}

/// Real-valued draw; errors for complex atoms.
pub fn sample_real(spec: AtomSpec, stream: &SeedStream) -> Result<f64> {
    let mut rng = stream.rng();
    Ok(match spec {
        AtomSpec::Gaussian { mean } => {
            let z: f64 = StandardNormal.sample(&mut rng);
            z + mean
        }
        AtomSpec::Rademacher => {
            if rng.next_u64() >> 63 == 1 {
                1.0
            } else {
                -1.0
            }
        }
        AtomSpec::UniformUnitvar => {
            let a = 3.0f64.sqrt();
            (2.0 * rng.uniform01() - 1.0) * a
        }
        AtomSpec::ComplexGaussian => {
            return Err(Error::InvalidAtom(
                "complex_gaussian cannot produce a real draw".into(),
            ))
        }
    })
}

/// Complex-valued draw: real atoms embed on the real axis; the complex
/// Gaussian has independent N(0, 1/2) real and imaginary parts.
pub fn sample_complex(spec: AtomSpec, stream: &SeedStream) -> Result<Complex64> {
    match spec {
        AtomSpec::ComplexGaussian => {
            let mut rng = stream.rng();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let s = 0.5f64.sqrt();
            Ok(Complex64::new(re * s, im * s))
        }
        _ => Ok(Complex64::new(sample_real(spec, stream)?, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(spec: AtomSpec, count: usize, seed: u64) -> Vec<f64> {
        let root = SeedStream::new(seed);
        (0..count as u64)
            .map(|i| sample_real(spec, &root.child(i)).unwrap())
            .collect()
    }

    #[test]
    fn rademacher_values_and_mean() {
        let v = draws(AtomSpec::Rademacher, 1_000_000, 7);
        assert!(v.iter().all(|&x| x == 1.0 || x == -1.0));
        let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 4.0 / (v.len() as f64).sqrt());
    }

    #[test]
    fn uniform_support_and_variance() {
        let a = 3.0f64.sqrt();
        let v = draws(AtomSpec::UniformUnitvar, 1_000_000, 11);
        assert!(v.iter().all(|&x| -a <= x && x < a));
        let var: f64 = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((var - 1.0).abs() < 0.01, "var={var}");
    }

    #[test]
    fn gaussian_mean_within_four_sigma() {
        let v = draws(AtomSpec::Gaussian { mean: 0.0 }, 1_000_000, 3);
        let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 4.0 / (v.len() as f64).sqrt());
    }

    #[test]
    fn complex_gaussian_component_variances() {
        let root = SeedStream::new(5);
        let n = 400_000;
        let (mut vr, mut vi) = (0.0, 0.0);
        for i in 0..n as u64 {
            let z = sample_complex(AtomSpec::ComplexGaussian, &root.child(i)).unwrap();
            vr += z.re * z.re;
            vi += z.im * z.im;
        }
        assert!((vr / n as f64 - 0.5).abs() < 0.01);
        assert!((vi / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn exact_moments() {
        assert_eq!(moment(AtomSpec::Rademacher, 2).unwrap(), 1.0);
        assert_eq!(moment(AtomSpec::UniformUnitvar, 4).unwrap(), 9.0 / 5.0);
        assert_eq!(moment(AtomSpec::Gaussian { mean: 0.0 }, 2).unwrap(), 1.0);
        assert!(moment(AtomSpec::Rademacher, 5).is_err());
    }

    #[test]
    fn second_order_matching_of_mean_zero_atoms() {
        let atoms = [
            AtomSpec::Gaussian { mean: 0.0 },
            AtomSpec::Rademacher,
            AtomSpec::UniformUnitvar,
        ];
        for spec in atoms {
            assert_eq!(moment(spec, 1).unwrap(), 0.0);
            assert_eq!(moment(spec, 2).unwrap(), 1.0);
        }
    }

    #[test]
    fn streams_are_path_determined() {
        let root = SeedStream::new(42);
        let a = root.descend(&[3, 17]);
        let b = root.child(3).child(17);
        assert_eq!(a, b);
        // order of derivation does not leak state
        let _ = root.child(9999).rng().next_u64();
        let c = root.child(3).child(17);
        assert_eq!(
            sample_real(AtomSpec::Gaussian { mean: 0.0 }, &c).unwrap(),
            sample_real(AtomSpec::Gaussian { mean: 0.0 }, &a).unwrap()
        );
    }

    #[test]
    fn distinct_paths_differ() {
        let root = SeedStream::new(0);
        let x = sample_real(AtomSpec::Gaussian { mean: 0.0 }, &root.child(0)).unwrap();
        let y = sample_real(AtomSpec::Gaussian { mean: 0.0 }, &root.child(1)).unwrap();
        assert_ne!(x, y);
    }
}
