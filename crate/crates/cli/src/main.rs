use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use ncgeo::geometry::{
    epsilon_isometric_lift, minimal_geodesic, quotient_distance, unitary_distance, QuotientDistanceOptions,
};
use ncgeo::io::{from_json, AlgebraSpec, CurveSpec, SubspaceSpec};
use ncgeo::linalg::{even_exponent, fold_symbol, ComplexMatrix};
use ncgeo::models::{build_model_space, ModelSpec};
use ncgeo::projection::{best_approximant, quotient_norm, DEFAULT_TOL};
use ncgeo::verify::{run_verification_suite, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "ncgeo", version, about = "Schatten p-norm geometry of unitary groups and their homogeneous spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded verification suites and print the JSON report.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated matrix sizes.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Comma-separated subset of core, projection, geometry, models.
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rectifiable distance between two unitaries.
    Distance {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        /// Exponent, or `inf` for the operator norm.
        #[arg(long, value_parser = parse_exponent)]
        p: f64,
        /// Algebra description; defaults to the full matrix algebra.
        #[arg(long)]
        algebra: Option<PathBuf>,
    },
    /// Quotient distance between the points `u . x` and `v . x` of a model space.
    Qdistance {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long, value_parser = parse_exponent)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        multistarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Best approximant of a skew-Hermitian element from a subspace.
    Project {
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        z: PathBuf,
        #[arg(long, value_parser = parse_exponent)]
        p: f64,
    },
    /// Minimal geodesic from the basepoint of a model space to `target . x`.
    Geodesic {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 4)]
        multistarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Epsilon-isometric lift of an orbit curve.
    Lift {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        eps: f64,
    },
    /// Fold the spectrum of a Hermitian matrix into [-pi, pi].
    Fold {
        #[arg(long)]
        z: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Violations,
}

impl From<ncgeo::Error> for Failure {
    fn from(e: ncgeo::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    if matches!(s, "inf" | "infinity" | "Infinity") {
        return Ok(f64::INFINITY);
    }
    let p: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if p >= 1.0 {
        Ok(p)
    } else {
        Err("p must be at least 1".into())
    }
}

fn read<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn model_space(path: &Path) -> Result<ncgeo::geometry::HomSpace, Failure> {
    let spec: ModelSpec = read(path)?;
    Ok(build_model_space(&spec)?)
}

/// Writes one record to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn exponent_json(p: f64) -> Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

fn verify(
    config: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<usize>,
    dims: Option<Vec<usize>>,
    p: Option<Vec<f64>>,
    suites: Option<Vec<String>>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = match &config {
        Some(path) => read::<SuiteConfig>(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    if let Some(dims) = dims {
        cfg.dims = dims;
    }
    if let Some(p) = p {
        cfg.p_list = p;
    }
    if let Some(names) = suites {
        cfg.suites = names
            .iter()
            .map(|s| serde_json::from_value::<Suite>(json!(s)).map_err(|_| Failure::Usage(format!("unknown suite `{s}`"))))
            .collect::<Result<_, _>>()?;
    }
    let report = run_verification_suite(&cfg)?;
    let text = report.to_json();
    if let Some(path) = out {
        fs::write(&path, format!("{text}\n")).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    emit(&text);
    eprint!("{}", report.summary_table());
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let output = match cli.command {
        Command::Verify { config, seed, trials, dims, p, suites, out } => {
            return verify(config, seed, trials, dims, p, suites, out);
        }
        Command::Distance { u, v, p, algebra } => {
            let u: ComplexMatrix = read(&u)?;
            let v: ComplexMatrix = read(&v)?;
            let alg = match algebra {
                Some(path) => read::<AlgebraSpec>(&path)?.build()?,
                None => AlgebraSpec::full(u.dim()).build()?,
            };
            json!({ "p": exponent_json(p), "d_p": unitary_distance(&u, &v, p, &alg)? })
        }
        Command::Qdistance { space, u, v, p, multistarts, seed } => {
            let space = model_space(&space)?;
            let u: ComplexMatrix = read(&u)?;
            let v: ComplexMatrix = read(&v)?;
            let opts = QuotientDistanceOptions { multistarts, seed, ..Default::default() };
            let qd = quotient_distance(&space, &u, &v, p, &opts)?;
            let mut record = serde_json::to_value(&qd).map_err(|e| Failure::Usage(e.to_string()))?;
            record["p"] = exponent_json(p);
            record
        }
        Command::Project { subspace, z, p } => {
            let g = read::<SubspaceSpec>(&subspace)?.build()?;
            let z: ComplexMatrix = read(&z)?;
            match even_exponent(p) {
                Ok(k) => serde_json::to_value(best_approximant(&z, &g, k, DEFAULT_TOL)?)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                Err(_) => {
                    let q = quotient_norm(&z, &g, p)?;
                    json!({
                        "p": exponent_json(p),
                        "projection": q.approximant,
                        "residual": &z - &q.approximant,
                        "quotient_norm": q.value,
                        "certified": q.certified,
                    })
                }
            }
        }
        Command::Geodesic { space, target, p, multistarts, seed } => {
            let space = model_space(&space)?;
            let target: ComplexMatrix = read(&target)?;
            let opts = QuotientDistanceOptions { multistarts, seed, ..Default::default() };
            serde_json::to_value(minimal_geodesic(&space, &target, p, &opts)?).map_err(|e| Failure::Usage(e.to_string()))?
        }
        Command::Lift { space, curve, p, eps } => {
            let space = model_space(&space)?;
            let curve = read::<CurveSpec>(&curve)?.build()?;
            let lift = epsilon_isometric_lift(&curve, &space, p, eps)?;
            json!({
                "p": p,
                "eps": eps,
                "length_beta": lift.length_beta,
                "quotient_length": lift.quotient_length,
                "excess": lift.excess(),
                "vertices": lift.vertices,
                "max_interpolation_error": lift.max_interpolation_error,
                "max_point_mismatch": lift.max_point_mismatch,
                "ode": {
                    "restarts": lift.ode.restarts,
                    "substeps": lift.ode.substeps,
                    "max_defect": lift.ode.max_defect,
                    "max_projection_displacement": lift.ode.max_projection_displacement,
                },
                "beta": CurveSpec::from(&lift.beta),
            })
        }
        Command::Fold { z } => {
            let z: ComplexMatrix = read(&z)?;
            json!({ "folded": fold_symbol(&z)? })
        }
    };
    emit(&serde_json::to_string_pretty(&output).expect("json values serialize"));
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
