//! Statistics of real roots of random polynomials `P_n(x) = sum c_k xi_k x^k`
//! with deterministic, polynomially growing coefficients `c_k` and unit-variance
//! random multipliers `xi_k`.
//!
//! The crate has two halves that check each other:
//!
//! * an analytic half ([`kernel`], [`density`]) that evaluates the exact
//!   Gaussian-case density of real zeros through the variance function
//!   `f_n(x) = sum c_k^2 x^k`, its limiting form, the closed-form Kac density,
//!   and expected counts by adaptive quadrature;
//! * a sampling half ([`roots`], [`mc`]) that realizes polynomials from
//!   deterministic seed streams, solves for all complex roots, and estimates
//!   counts, densities, correlation integrals, repulsion and anti-concentration
//!   probabilities by Monte Carlo.
//!
//! Monte Carlo sample loops run data-parallel under the `parallel` feature
//! (rayon); disabling the feature gives a sequential build with bit-identical
//! results, since all reductions run over a fixed tree of sample indices.

pub mod atoms;
pub mod density;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod logsum;
pub mod mc;
pub mod profiles;
pub mod quad;
pub mod roots;
pub mod selftest;
pub mod special;

pub use error::Error;

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
