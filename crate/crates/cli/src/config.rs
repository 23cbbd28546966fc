//! Experiment configuration: a JSON document (via `--config`) merged with
//! command-line flags, flags winning. Everything is validated before any
//! computation; an invalid configuration produces a single structured error.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use randpoly_core::atoms::AtomSpec;
use randpoly_core::profiles::{CoefficientProfile, GeneralizedPolynomial, ProfileKind};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Flat option bag; the per-command runners pull and validate what they need.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub profile: Option<String>,
    pub atoms: Option<String>,
    pub atom: Option<String>,
    pub n: Option<usize>,
    pub n_grid: Option<String>,
    pub mu: Option<f64>,
    pub interval: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<String>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub method: Option<String>,
    pub bins: Option<usize>,
    pub center: Option<f64>,
    pub gammas: Option<String>,
    pub weights: Option<String>,
    pub z: Option<String>,
    pub radius: Option<f64>,
    pub delta: Option<f64>,
    pub orders: Option<String>,
    pub theta: Option<f64>,
    pub support_radius: Option<f64>,
    pub dump_roots: Option<bool>,
}

impl ExperimentConfig {
    /// Overlay: any field set in `flags` replaces the file value.
    pub fn merged_with(mut self, flags: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take!(
            command, profile, atoms, atom, n, n_grid, mu, interval, samples, seed, workers, out,
            grid, method, bins, center, gammas, weights, z, radius, delta, orders, theta,
            support_radius, dump_roots
        );
        self
    }

    pub fn root_seed(&self) -> Result<u64> {
        match &self.seed {
            None => Ok(0),
            Some(s) => parse_seed(s),
        }
    }
}

/// Root seed as decimal or 0x-prefixed hex.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).with_context(|| format!("invalid hex seed {s:?}"))
    } else {
        s.parse::<u64>().with_context(|| format!("invalid seed {s:?}"))
    }
}

/// Profile specification: either a JSON object with a `kind` discriminator or
/// the compact `name:key=value,...` form (`kac`, `hyperbolic:L=4`,
/// `kac_derivative:d=1`, `power_law:rho=0.5,scale=1`, `explicit:1,2,3`,
/// `explicit:@coeffs.csv`).
pub fn parse_profile(spec: &str, n: Option<usize>) -> Result<CoefficientProfile> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        let mut v: serde_json::Value =
            serde_json::from_str(spec).context("profile JSON unparseable")?;
        let n_field = v.get("n").and_then(|x| x.as_u64()).map(|x| x as usize);
        if let Some(obj) = v.as_object_mut() {
            obj.remove("n");
        }
        let kind: ProfileKind = serde_json::from_value(v).context("profile JSON invalid")?;
        let n = n
            .or(n_field)
            .ok_or_else(|| anyhow!("profile needs a degree: pass --n or a JSON \"n\" field"))?;
        return Ok(CoefficientProfile::new(kind, n));
    }
    let (name, args) = match spec.split_once(':') {
        Some((a, b)) => (a, b),
        None => (spec, ""),
    };
    let kv = parse_kv(args);
    let kind = match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "kac" => ProfileKind::Kac,
        "hyperbolic" => ProfileKind::Hyperbolic {
            l: kv_num(&kv, &["l"], args)?,
        },
        "kac_derivative" => ProfileKind::KacDerivative {
            d: kv_num(&kv, &["d"], args)? as u32,
        },
        "power_law" => ProfileKind::PowerLaw {
            rho: kv_num(&kv, &["rho"], "")?,
            scale: kv.iter().find(|(k, _)| k == "scale").map_or(Ok(1.0), |(_, v)| {
                v.parse::<f64>().context("bad scale")
            })?,
        },
        "explicit" => {
            let values = if let Some(path) = args.strip_prefix('@') {
                read_csv_values(path)?
            } else {
                args.split(',')
                    .map(|t| t.trim().parse::<f64>().context("bad explicit coefficient"))
                    .collect::<Result<Vec<f64>>>()?
            };
            let len = values.len();
            if len == 0 {
                bail!("explicit profile has no coefficients");
            }
            return Ok(CoefficientProfile::new(
                ProfileKind::Explicit { values },
                len - 1,
            ));
        }
        other => bail!("unknown profile kind {other:?}"),
    };
    let n = n.ok_or_else(|| anyhow!("profile {name:?} needs --n"))?;
    Ok(CoefficientProfile::new(kind, n))
}

fn parse_kv(args: &str) -> Vec<(String, String)> {
    args.split(',')
        .filter(|s| !s.is_empty())
        .filter_map(|pair| {
            pair.split_once('=')
                .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
        })
        .collect()
}

fn kv_num(kv: &[(String, String)], keys: &[&str], bare: &str) -> Result<f64> {
    for (k, v) in kv {
        if keys.contains(&k.as_str()) {
            return v.parse::<f64>().with_context(|| format!("bad value for {k}"));
        }
    }
    // allow the bare form `hyperbolic:4`
    if !bare.is_empty() && !bare.contains('=') && !bare.contains(',') {
        return bare.trim().parse::<f64>().context("bad parameter");
    }
    bail!("missing parameter {:?}", keys[0])
}

fn read_csv_values(path: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let mut out = Vec::new();
    for line in text.lines() {
        for tok in line.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            out.push(tok.parse::<f64>().with_context(|| format!("bad value {tok:?} in {path}"))?);
        }
    }
    Ok(out)
}

/// `gaussian`, `gaussian:mu=1` (or `gaussian:1`), `rademacher`,
/// `uniform_unitvar` (alias `uniform`), `complex_gaussian` (alias `complex`).
pub fn parse_atom(spec: &str) -> Result<AtomSpec> {
    let spec = spec.trim();
    let (name, args) = match spec.split_once(':') {
        Some((a, b)) => (a, b),
        None => (spec, ""),
    };
    Ok(match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "gaussian" => {
            let mean = if args.is_empty() {
                0.0
            } else {
                kv_num(&parse_kv(args), &["mu", "mean"], args)?
            };
            AtomSpec::Gaussian { mean }
        }
        "rademacher" => AtomSpec::Rademacher,
        "uniform" | "uniform_unitvar" => AtomSpec::UniformUnitvar,
        "complex" | "complex_gaussian" => AtomSpec::ComplexGaussian,
        other => bail!("unknown atom {other:?}"),
    })
}

/// `all` or `a:b` with `-inf`/`inf` endpoints allowed.
pub fn parse_interval(spec: &str) -> Result<(f64, f64)> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("all") {
        return Ok((f64::NEG_INFINITY, f64::INFINITY));
    }
    let (a, b) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("interval must be `all` or `a:b`, got {spec:?}"))?;
    let parse_end = |s: &str| -> Result<f64> {
        match s.trim() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            t => t.parse::<f64>().with_context(|| format!("bad endpoint {t:?}")),
        }
    };
    let (lo, hi) = (parse_end(a)?, parse_end(b)?);
    if !(lo < hi) {
        bail!("interval endpoints must satisfy lo < hi, got {lo}:{hi}");
    }
    Ok((lo, hi))
}

/// `lo:hi:points` for density grids.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:hi:points, got {spec:?}");
    }
    let lo: f64 = parts[0].parse().context("bad grid lo")?;
    let hi: f64 = parts[1].parse().context("bad grid hi")?;
    let points: usize = parts[2].parse().context("bad grid points")?;
    if !(lo < hi) || points < 2 {
        bail!("grid needs lo < hi and points >= 2");
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

/// `start:stop:xF` (geometric by factor F) or a comma list of degrees.
pub fn parse_n_grid(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if spec.contains(',') {
        return spec
            .split(',')
            .map(|t| t.trim().parse::<usize>().context("bad n in list"))
            .collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 || !parts[2].starts_with('x') {
        bail!("n-grid must be start:stop:xF or a comma list, got {spec:?}");
    }
    let start: usize = parts[0].parse().context("bad n-grid start")?;
    let stop: usize = parts[1].parse().context("bad n-grid stop")?;
    let factor: f64 = parts[2][1..].parse().context("bad n-grid factor")?;
    if start == 0 || stop < start || factor <= 1.0 {
        bail!("n-grid needs 0 < start <= stop and factor > 1");
    }
    let mut out = Vec::new();
    let mut n = start as f64;
    while (n as usize) <= stop {
        out.push(n.round() as usize);
        n *= factor;
    }
    Ok(out)
}

/// Comma list, `ones:N` for N unit weights, or `@file.csv`.
pub fn parse_weights(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("ones:") {
        let n: usize = rest.parse().context("bad weight count")?;
        return Ok(vec![1.0; n]);
    }
    if let Some(path) = spec.strip_prefix('@') {
        return read_csv_values(path);
    }
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().context("bad weight"))
        .collect()
}

/// `re` or `re,im`.
pub fn parse_complex(spec: &str) -> Result<Complex64> {
    match spec.split_once(',') {
        None => Ok(Complex64::new(spec.trim().parse().context("bad real part")?, 0.0)),
        Some((re, im)) => Ok(Complex64::new(
            re.trim().parse().context("bad real part")?,
            im.trim().parse().context("bad imaginary part")?,
        )),
    }
}

/// Comma list of gamma radii.
pub fn parse_gammas(spec: &str) -> Result<Vec<f64>> {
    let v: Result<Vec<f64>> = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>().context("bad gamma"))
        .collect();
    let v = v?;
    if v.is_empty() || v.iter().any(|&g| !(g > 0.0)) {
        bail!("gammas must be positive");
    }
    Ok(v)
}

/// Re-export used by genpoly JSON configs (kept for API completeness).
pub fn parse_genpoly(spec: &str) -> Result<GeneralizedPolynomial> {
    serde_json::from_str(spec).context("generalized polynomial JSON invalid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_compact_forms() {
        assert!(matches!(
            parse_profile("kac", Some(8)).unwrap().kind,
            ProfileKind::Kac
        ));
        match parse_profile("hyperbolic:L=4", Some(8)).unwrap().kind {
            ProfileKind::Hyperbolic { l } => assert_eq!(l, 4.0),
            k => panic!("{k:?}"),
        }
        match parse_profile("hyperbolic:4", Some(8)).unwrap().kind {
            ProfileKind::Hyperbolic { l } => assert_eq!(l, 4.0),
            k => panic!("{k:?}"),
        }
        match parse_profile("explicit:1, 2,3", None).unwrap().kind {
            ProfileKind::Explicit { values } => assert_eq!(values, vec![1.0, 2.0, 3.0]),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn profile_json_form() {
        let p = parse_profile(r#"{"kind":"hyperbolic","l":2.5,"n":16}"#, None).unwrap();
        assert_eq!(p.n, 16);
    }

    #[test]
    fn atoms_and_intervals() {
        assert_eq!(
            parse_atom("gaussian:mu=1").unwrap(),
            AtomSpec::Gaussian { mean: 1.0 }
        );
        assert_eq!(parse_atom("uniform").unwrap(), AtomSpec::UniformUnitvar);
        assert_eq!(
            parse_interval("all").unwrap(),
            (f64::NEG_INFINITY, f64::INFINITY)
        );
        assert_eq!(parse_interval("0.5:0.9").unwrap(), (0.5, 0.9));
        assert!(parse_interval("2:1").is_err());
    }

    #[test]
    fn n_grid_forms() {
        assert_eq!(
            parse_n_grid("256:2048:x2").unwrap(),
            vec![256, 512, 1024, 2048]
        );
        assert_eq!(parse_n_grid("64,128").unwrap(), vec![64, 128]);
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0xff").unwrap(), 255);
        assert!(parse_seed("nope").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig {
            samples: Some(10),
            n: Some(4),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            samples: Some(99),
            ..Default::default()
        };
        let merged = file.merged_with(flags);
        assert_eq!(merged.samples, Some(99));
        assert_eq!(merged.n, Some(4));
    }
}
