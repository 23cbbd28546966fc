//! Configuration-driven experiment runner: density curves, expected counts by
//! quadrature, Monte Carlo counting/variance/correlation, repulsion and
//! anti-concentration probes, atom comparisons, slope fits, and the fast
//! selftest. One binary, subcommands, JSON configs with flag overrides.

mod config;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use output::{Csv, CsvCell, Manifest};
use randpoly_core::atoms::AtomSpec;
use randpoly_core::density::{self, DensityMethod, MeanSpec};
use randpoly_core::kernel::{LimitingKernel, VarianceKernel};
use randpoly_core::mc::{self, CorrelationWindow};
use randpoly_core::profiles::CoefficientProfile;
use randpoly_core::quad::Interval;
use randpoly_core::{exec, selftest};
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "randpoly", version, about = "Real-root statistics of random polynomials")]
struct Cli {
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: RANDPOLY_WORKERS or all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Root seed (decimal or 0x hex).
    #[arg(long, global = true)]
    seed: Option<String>,

    /// Output path for the main artifact; a manifest is written next to it.
    /// Without it, the report JSON goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Default, Clone)]
struct CommonArgs {
    /// Coefficient profile (kac | hyperbolic:L=4 | kac_derivative:d=1 |
    /// power_law:rho=0.5 | explicit:1,2,3 | explicit:@file.csv | JSON).
    #[arg(long)]
    profile: Option<String>,
    /// Polynomial degree.
    #[arg(long)]
    n: Option<usize>,
    /// Atom distribution (gaussian[:mu=..] | rademacher | uniform_unitvar |
    /// complex_gaussian).
    #[arg(long)]
    atom: Option<String>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Interval `all` or `a:b` (inf endpoints allowed).
    #[arg(long)]
    interval: Option<String>,
    /// Atom mean for Gaussian Kac-Rice paths.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Density curve over a t-grid as CSV (t, rho, method, n).
    Density {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid `lo:hi:points`.
        #[arg(long)]
        grid: Option<String>,
        /// ek | ek_raw | kac | kacrice | limiting (default ek).
        #[arg(long)]
        method: Option<String>,
    },
    /// Expected real-zero count by adaptive quadrature.
    Expect {
        #[command(flatten)]
        common: CommonArgs,
        /// ek | kac | kacrice (default ek; kacrice when --mu is set).
        #[arg(long)]
        method: Option<String>,
    },
    /// Monte Carlo expected count in an interval.
    McCount {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo variance of the real-zero count.
    McVar {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo correlation estimate in a microscopic window.
    McCorr {
        #[command(flatten)]
        common: CommonArgs,
        /// Orders `k,l`.
        #[arg(long)]
        orders: Option<String>,
        /// Window scale delta (default 0.05); centers sit at |z| = 1-1.5 delta.
        #[arg(long)]
        delta: Option<f64>,
        /// Bump support radius in rescaled units (default the theorems' 1e-3).
        #[arg(long)]
        support_radius: Option<f64>,
    },
    /// Repulsion probe: P(at least 2 roots in B(center, gamma)) per gamma.
    ProbeRepulsion {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        center: Option<f64>,
        /// Comma list of ball radii.
        #[arg(long)]
        gammas: Option<String>,
    },
    /// Anti-concentration probe: P(|sum a_i xi_i - z| <= radius).
    ProbeAnticonc {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma list, `ones:N`, or `@file.csv`.
        #[arg(long)]
        weights: Option<String>,
        /// Target point `re` or `re,im`.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Expected-count gap between two atoms at the same profile.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Two atoms, comma separated (e.g. gaussian,rademacher).
        #[arg(long)]
        atoms: Option<String>,
        /// Profile(s); a single profile spec.
        #[arg(long)]
        profiles: Option<String>,
    },
    /// Expected counts over an n-grid plus the fitted slope per ln n.
    Slopes {
        #[command(flatten)]
        common: CommonArgs,
        /// `start:stop:xF` or comma list.
        #[arg(long)]
        n_grid: Option<String>,
        /// quad (default) or mc.
        #[arg(long)]
        method: Option<String>,
    },
    /// Run the fast acceptance subset and print a pass/fail table.
    Selftest,
}

fn main() {
    let exit = match run() {
        Ok(code) => code,
        Err(e) => {
            let err = json!({"error": {"message": format!("{e:#}")}});
            eprintln!("{}", serde_json::to_string(&err).unwrap());
            2
        }
    };
    std::process::exit(exit);
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    let file_cfg: ExperimentConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).context("config file invalid")?
        }
        None => ExperimentConfig::default(),
    };
    let command = cli
        .command
        .as_ref()
        .map(command_name)
        .or(file_cfg.command.clone().map(|c| c.leak() as &'static str))
        .ok_or_else(|| anyhow!("no command given (flag or config \"command\")"))?;

    let flag_cfg = flags_to_config(&cli);
    let cfg = file_cfg.merged_with(flag_cfg);

    let workers = cfg.workers.or_else(|| {
        std::env::var("RANDPOLY_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let cfg_for_run = cfg.clone();
    exec::with_workers(workers, move || dispatch(command, cfg_for_run))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Density { .. } => "density",
        Command::Expect { .. } => "expect",
        Command::McCount { .. } => "mc-count",
        Command::McVar { .. } => "mc-var",
        Command::McCorr { .. } => "mc-corr",
        Command::ProbeRepulsion { .. } => "probe-repulsion",
        Command::ProbeAnticonc { .. } => "probe-anticonc",
        Command::Compare { .. } => "compare",
        Command::Slopes { .. } => "slopes",
        Command::Selftest => "selftest",
    }
}

fn flags_to_config(cli: &Cli) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        workers: cli.workers,
        seed: cli.seed.clone(),
        out: cli.out.clone(),
        ..Default::default()
    };
    let Some(cmd) = &cli.command else { return cfg };
    let common = match cmd {
        Command::Density { common, .. }
        | Command::Expect { common, .. }
        | Command::McCount { common }
        | Command::McVar { common }
        | Command::McCorr { common, .. }
        | Command::ProbeRepulsion { common, .. }
        | Command::ProbeAnticonc { common, .. }
        | Command::Compare { common, .. }
        | Command::Slopes { common, .. } => common.clone(),
        Command::Selftest => CommonArgs::default(),
    };
    cfg.profile = common.profile;
    cfg.n = common.n;
    cfg.atom = common.atom;
    cfg.samples = common.samples;
    cfg.interval = common.interval;
    cfg.mu = common.mu;
    match cmd {
        Command::Density { grid, method, .. } => {
            cfg.grid = grid.clone();
            cfg.method = method.clone();
        }
        Command::Expect { method, .. } => cfg.method = method.clone(),
        Command::McCorr {
            orders,
            delta,
            support_radius,
            ..
        } => {
            cfg.orders = orders.clone();
            cfg.delta = *delta;
            cfg.support_radius = *support_radius;
        }
        Command::ProbeRepulsion { center, gammas, .. } => {
            cfg.center = *center;
            cfg.gammas = gammas.clone();
        }
        Command::ProbeAnticonc {
            weights, z, radius, ..
        } => {
            cfg.weights = weights.clone();
            cfg.z = z.clone();
            cfg.radius = *radius;
        }
        Command::Compare {
            atoms, profiles, ..
        } => {
            cfg.atoms = atoms.clone();
            if cfg.profile.is_none() {
                cfg.profile = profiles.clone();
            }
        }
        Command::Slopes { n_grid, method, .. } => {
            cfg.n_grid = n_grid.clone();
            cfg.method = method.clone();
        }
        _ => {}
    }
    cfg
}

fn need<T: Clone>(v: &Option<T>, what: &str) -> Result<T> {
    v.clone().ok_or_else(|| anyhow!("missing required setting --{what}"))
}

fn profile_from(cfg: &ExperimentConfig) -> Result<CoefficientProfile> {
    let spec = need(&cfg.profile, "profile")?;
    let p = config::parse_profile(&spec, cfg.n)?;
    p.validate()
        .map_err(|e| anyhow!("profile rejected: {e}"))?;
    Ok(p)
}

fn interval_from(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    match &cfg.interval {
        None => Ok((f64::NEG_INFINITY, f64::INFINITY)),
        Some(s) => config::parse_interval(s),
    }
}

fn emit(cfg: &ExperimentConfig, body: serde_json::Value, csv: Option<String>, t0: Instant) -> Result<i32> {
    let echo = serde_json::to_value(cfg)?;
    let seed = cfg.root_seed()?;
    match &cfg.out {
        Some(path) => {
            let mut outputs = vec![path.display().to_string()];
            if let Some(csv_body) = &csv {
                output::write_atomic(path, csv_body.as_bytes())?;
                let json_path = path.with_extension("json");
                output::write_atomic(&json_path, serde_json::to_string_pretty(&body)?.as_bytes())?;
                outputs.push(json_path.display().to_string());
            } else {
                output::write_atomic(path, serde_json::to_string_pretty(&body)?.as_bytes())?;
            }
            let manifest = Manifest::new(echo, seed, t0.elapsed().as_secs_f64(), outputs);
            let mpath = path.with_extension("manifest.json");
            output::write_atomic(&mpath, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        }
        None => {
            let manifest = Manifest::new(echo, seed, t0.elapsed().as_secs_f64(), vec![]);
            let doc = json!({"report": body, "manifest": manifest});
            if let Some(csv_body) = csv {
                print!("{csv_body}");
                eprintln!("{}", serde_json::to_string(&doc)?);
            } else {
                println!("{}", serde_json::to_string_pretty(&doc)?);
            }
        }
    }
    Ok(0)
}

fn dispatch(command: &str, cfg: ExperimentConfig) -> Result<i32> {
    let t0 = Instant::now();
    match command {
        "density" => {
            let profile = profile_from(&cfg)?;
            let grid = config::parse_grid(cfg.grid.as_deref().unwrap_or("-2:2:401"))?;
            let method = cfg.method.as_deref().unwrap_or("ek");
            let kernel = VarianceKernel::from_profile(&profile)?;
            let mu = cfg.mu.unwrap_or(0.0);
            let (tag, curve) = match method {
                "ek" => (
                    DensityMethod::EkLogvar,
                    density::sample_curve(
                        |t| density::density_ek(&kernel, t),
                        &grid,
                        DensityMethod::EkLogvar,
                        profile.n,
                        &profile.id(),
                    )?,
                ),
                "ek_raw" => (
                    DensityMethod::EkRaw,
                    density::sample_curve(
                        |t| density::density_ek_pairwise(&kernel, t),
                        &grid,
                        DensityMethod::EkRaw,
                        profile.n,
                        &profile.id(),
                    )?,
                ),
                "kac" => (
                    DensityMethod::KacClosed,
                    density::sample_curve(
                        |t| Ok(density::kac_density_closed(profile.n, t)),
                        &grid,
                        DensityMethod::KacClosed,
                        profile.n,
                        &profile.id(),
                    )?,
                ),
                "kacrice" => {
                    let mean = MeanSpec::mean_only(mu);
                    (
                        DensityMethod::KacriceMean,
                        density::sample_curve(
                            |t| density::kacrice_mean_density(&kernel, &mean, t),
                            &grid,
                            DensityMethod::KacriceMean,
                            profile.n,
                            &profile.id(),
                        )?,
                    )
                }
                "limiting" => {
                    let lk = LimitingKernel::from_profile(&profile).ok_or_else(|| {
                        anyhow!("profile {} has no exact limiting kernel", profile.id())
                    })?;
                    (
                        DensityMethod::Limiting,
                        density::sample_curve(
                            |t| density::limiting_density(&lk, t),
                            &grid,
                            DensityMethod::Limiting,
                            profile.n,
                            &profile.id(),
                        )?,
                    )
                }
                other => bail!("unknown density method {other:?}"),
            };
            let mut csv = Csv::new(&["t", "rho", "method", "n"]);
            for (t, rho) in curve.t.iter().zip(&curve.rho) {
                csv.row(&[
                    CsvCell::Num(*t),
                    CsvCell::Num(*rho),
                    CsvCell::Str(format!("{tag:?}")),
                    CsvCell::Int(profile.n as i64),
                ]);
            }
            emit(&cfg, serde_json::to_value(&curve)?, Some(csv.into_string()), t0)
        }
        "expect" => {
            let profile = profile_from(&cfg)?;
            let (lo, hi) = interval_from(&cfg)?;
            let interval = Interval::Range(lo, hi);
            let kernel = VarianceKernel::from_profile(&profile)?;
            let mu = cfg.mu.unwrap_or(0.0);
            let method = cfg
                .method
                .clone()
                .unwrap_or_else(|| if mu != 0.0 { "kacrice".into() } else { "ek".into() });
            let r = match method.as_str() {
                "ek" => density::expected_count_ek(&kernel, interval)?,
                "kac" => density::expected_count_kac_closed(profile.n, interval),
                "kacrice" => density::expected_count_kacrice(
                    &kernel,
                    &MeanSpec::mean_only(mu),
                    interval,
                )?,
                other => bail!("unknown expect method {other:?}"),
            };
            emit(
                &cfg,
                json!({
                    "expected_count": r.value,
                    "abs_error": r.abs_error,
                    "converged": r.converged,
                    "method": method,
                    "profile": profile.id(),
                    "interval": [lo, hi],
                }),
                None,
                t0,
            )
        }
        "mc-count" => {
            let profile = profile_from(&cfg)?;
            let atom = config::parse_atom(&need(&cfg.atom, "atom")?)?;
            let interval = interval_from(&cfg)?;
            let report = mc::mc_expected_count(
                &profile,
                atom,
                interval,
                need(&cfg.samples, "samples")?,
                cfg.root_seed()?,
            )?;
            emit(&cfg, serde_json::to_value(&report)?, None, t0)
        }
        "mc-var" => {
            let profile = profile_from(&cfg)?;
            let atom = config::parse_atom(&need(&cfg.atom, "atom")?)?;
            let report = mc::mc_variance_count(
                &profile,
                atom,
                need(&cfg.samples, "samples")?,
                cfg.root_seed()?,
            )?;
            emit(&cfg, serde_json::to_value(&report)?, None, t0)
        }
        "mc-corr" => {
            let profile = profile_from(&cfg)?;
            let atom = config::parse_atom(&need(&cfg.atom, "atom")?)?;
            let orders_s = cfg.orders.clone().unwrap_or_else(|| "1,0".into());
            let (k, l) = orders_s
                .split_once(',')
                .map(|(a, b)| (a.trim().parse::<usize>(), b.trim().parse::<usize>()))
                .ok_or_else(|| anyhow!("orders must be k,l"))?;
            let (k, l) = (k.context("bad k")?, l.context("bad l")?);
            let delta = cfg.delta.unwrap_or(0.05);
            let radius = cfg.support_radius.unwrap_or(CorrelationWindow::THEOREM_RADIUS);
            let window = CorrelationWindow::centered(delta, k + l, radius);
            let est = mc::correlation_estimate(
                &profile,
                atom,
                &window,
                (k, l),
                need(&cfg.samples, "samples")?,
                cfg.root_seed()?,
            )?;
            emit(&cfg, serde_json::to_value(&est)?, None, t0)
        }
        "probe-repulsion" => {
            let profile = profile_from(&cfg)?;
            let atom = config::parse_atom(&need(&cfg.atom, "atom")?)?;
            let gammas = config::parse_gammas(&need(&cfg.gammas, "gammas")?)?;
            let report = mc::repulsion_probe(
                &profile,
                atom,
                need(&cfg.center, "center")?,
                &gammas,
                need(&cfg.samples, "samples")?,
                cfg.root_seed()?,
            )?;
            // fitted log-log slope over the strictly positive estimates
            let pts: Vec<(f64, f64)> = gammas
                .iter()
                .zip(&report.stats)
                .filter(|(_, s)| s.estimate > 0.0)
                .map(|(g, s)| (g.ln(), s.estimate.ln()))
                .collect();
            let slope = if pts.len() >= 2 {
                let m = pts.len() as f64;
                let sx: f64 = pts.iter().map(|p| p.0).sum();
                let sy: f64 = pts.iter().map(|p| p.1).sum();
                let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
                let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
                Some((m * sxy - sx * sy) / (m * sxx - sx * sx))
            } else {
                None
            };
            let mut body = serde_json::to_value(&report)?;
            body["loglog_slope"] = json!(slope);
            emit(&cfg, body, None, t0)
        }
        "probe-anticonc" => {
            let atom = config::parse_atom(&need(&cfg.atom, "atom")?)?;
            let weights = config::parse_weights(&need(&cfg.weights, "weights")?)?;
            let z = config::parse_complex(cfg.z.as_deref().unwrap_or("0"))?;
            let report = mc::anticoncentration_probe(
                atom,
                &weights,
                z,
                need(&cfg.radius, "radius")?,
                need(&cfg.samples, "samples")?,
                cfg.root_seed()?,
            )?;
            emit(&cfg, serde_json::to_value(&report)?, None, t0)
        }
        "compare" => {
            let profile = profile_from(&cfg)?;
            let atoms_s = need(&cfg.atoms, "atoms")?;
            let (a, b) = atoms_s
                .split_once(',')
                .ok_or_else(|| anyhow!("compare needs two atoms, comma separated"))?;
            let interval = interval_from(&cfg)?;
            let report = mc::compare_atoms(
                &profile,
                config::parse_atom(a)?,
                config::parse_atom(b)?,
                interval,
                need(&cfg.samples, "samples")?,
                cfg.root_seed()?,
            )?;
            emit(&cfg, serde_json::to_value(&report)?, None, t0)
        }
        "slopes" => {
            let spec = need(&cfg.profile, "profile")?;
            let ns = config::parse_n_grid(&need(&cfg.n_grid, "n-grid")?)?;
            let mu = cfg.mu.unwrap_or(0.0);
            let method = cfg.method.clone().unwrap_or_else(|| "quad".into());
            let mut counts = Vec::with_capacity(ns.len());
            for &n in &ns {
                let profile = config::parse_profile(&spec, Some(n))?;
                let value = match method.as_str() {
                    "quad" => {
                        let kernel = VarianceKernel::from_profile(&profile)?;
                        if mu == 0.0 {
                            density::expected_count_ek(&kernel, Interval::RealLine)?.value
                        } else {
                            density::expected_count_kacrice(
                                &kernel,
                                &MeanSpec::mean_only(mu),
                                Interval::RealLine,
                            )?
                            .value
                        }
                    }
                    "mc" => {
                        let atom = config::parse_atom(
                            cfg.atom.as_deref().unwrap_or("gaussian"),
                        )?;
                        let report = mc::mc_expected_count(
                            &profile,
                            atom,
                            (f64::NEG_INFINITY, f64::INFINITY),
                            need(&cfg.samples, "samples")?,
                            cfg.root_seed()?,
                        )?;
                        report.stat("expected_count").unwrap().estimate
                    }
                    other => bail!("unknown slopes method {other:?}"),
                };
                counts.push(value);
            }
            let fit = mc::slope_fit(&ns, &counts)?;
            let predicted = config::parse_profile(&spec, Some(ns[0]))
                .ok()
                .and_then(|p| density::predicted_slope(&p, mu).ok());
            let mut csv = Csv::new(&["n", "expected_count"]);
            for (n, c) in ns.iter().zip(&counts) {
                csv.row(&[CsvCell::Int(*n as i64), CsvCell::Num(*c)]);
            }
            emit(
                &cfg,
                json!({
                    "n": ns,
                    "counts": counts,
                    "fit": fit,
                    "predicted_slope": predicted,
                    "mu": mu,
                }),
                Some(csv.into_string()),
                t0,
            )
        }
        "selftest" => {
            let results = selftest::run_fast(cfg.root_seed()?);
            println!("{:<4} {:<60} {}", "id", "criterion", "status");
            let mut all_ok = true;
            for r in &results {
                println!(
                    "{:<4} {:<60} {} ({})",
                    r.id,
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.details
                );
                all_ok &= r.passed;
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        other => bail!("unknown command {other:?}"),
    }
}
