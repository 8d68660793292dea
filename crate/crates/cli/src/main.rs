use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use polyface::angles::{
    angle_sum, curvature_sweep, derive_seed, perles_check, prop_angle_sum_check, SamplingConfig,
    Verdict, DEFAULT_SAMPLES, DEFAULT_SIGMA,
};
use polyface::bounds::{barany_check, bjorner_check, bound_report, xue_check};
use polyface::corpus::{family_corpus, run_corpus, to_csv, CorpusOptions, CorpusRow};
use polyface::generators::{generate, Family, FamilySpec};
use polyface::projection::{analyze, sample_directions, Direction, GeneralPosition};
use polyface::{face_lattice, PolyError, Polytope, Vector};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "polyface", version, about = "Face numbers, solid angles and shadows of convex polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Polytope JSON as written by `gen`.
    #[arg(long, short, conflicts_with = "family")]
    input: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Vertex count for cyclic and random-sphere.
    #[arg(long)]
    n: Option<usize>,
    /// Which random-sphere instance to draw.
    #[arg(long, default_value_t = 0)]
    instance: u64,
}

impl Source {
    fn load(&self) -> Result<Polytope> {
        if let Some(path) = &self.input {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            return Ok(Polytope::from_json(&text)?);
        }
        let family = self
            .family
            .ok_or_else(|| CliError::BadArguments("need --input or --family".into()))?;
        let mut spec = FamilySpec::new(family, self.dim).with_seed(self.instance);
        if let Some(n) = self.n {
            spec = spec.with_n(n);
        }
        Ok(generate(&spec)?)
    }
}

#[derive(Args)]
struct Sampling {
    /// Samples per solid angle.
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "tolerance-sigma", default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
}

impl Sampling {
    fn config(&self) -> SamplingConfig {
        SamplingConfig { samples: self.samples, seed: self.seed, sigma: self.sigma }
    }
}

/// `a..b`, `a..=b` (both inclusive) or a single dimension.
#[derive(Clone, Debug)]
struct Dims(RangeInclusive<usize>);

impl FromStr for Dims {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(Dims(lo..=hi))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a polytope and write it as JSON.
    Gen {
        #[command(flatten)]
        source: Source,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// f-vector, dimension, simple/simplicial and the Euler check.
    Describe {
        #[command(flatten)]
        source: Source,
    },
    /// Face-number bounds with the Bárány, Xue and Björner checks.
    VerifyBounds {
        #[command(flatten)]
        source: Source,
        /// Emit the bound table as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Angle sums, curvature checks and the angle-sum lower bounds.
    Angles {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampling: Sampling,
        /// Sampled directions for the projection bound.
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        directions: u64,
    },
    /// Shadow, upper/lower complexes, diagram vertices and gap checks.
    Project {
        #[command(flatten)]
        source: Source,
        /// Comma-separated integer direction in intrinsic coordinates.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        directions: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Batch run over families and dimensions, CSV summary.
    Corpus {
        #[arg(long, value_delimiter = ',')]
        families: Vec<Family>,
        #[arg(long, default_value = "2..6")]
        dims: Dims,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        directions: u64,
        /// Samples per solid angle; angle checks only run up to --max-angle-dim.
        #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 3)]
        max_angle_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "tolerance-sigma", default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Text on stdout plus, for failed hard checks, a JSON counterexample.
struct Outcome {
    text: String,
    counterexample: Option<Value>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, counterexample: None }
    }

    fn checked(text: String, failures: Vec<Value>) -> Self {
        let counterexample = (!failures.is_empty()).then_some(Value::Array(failures));
        Outcome { text, counterexample }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn write_to(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source }),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn describe(p: &Polytope) -> Result<Outcome> {
    let fv = face_lattice(p)?.f_vector()?;
    let report = json!({
        "dim": p.dim,
        "vertices": p.vertex_count(),
        "f_vector": fv.counts,
        "simple": p.is_simple(),
        "simplicial": p.is_simplicial(),
        "euler_characteristic": fv.euler_characteristic(),
        "euler_holds": fv.euler_holds(),
    });
    let failures = if fv.euler_holds() { vec![] } else { vec![report.clone()] };
    Ok(Outcome::checked(pretty(&report), failures))
}

fn verify_bounds(p: &Polytope, csv: bool) -> Result<Outcome> {
    let fv = face_lattice(p)?.f_vector()?;
    let (simple, simplicial) = (p.is_simple(), p.is_simplicial());
    let bounds = bound_report(&fv, simple, simplicial)?;
    let barany = barany_check(&fv);
    let xue = xue_check(&fv)?;
    let bjorner = bjorner_check(&fv, simple, simplicial);
    let mut failures = Vec::new();
    for r in bounds.rows.iter().filter(|r| !r.consistent()) {
        failures.push(json!({ "check": "bounds", "row": r }));
    }
    if !barany.holds {
        failures.push(json!({ "check": "barany", "report": barany }));
    }
    if !xue.holds {
        failures.push(json!({ "check": "xue", "report": xue }));
    }
    if !bjorner.holds {
        failures.push(json!({ "check": "bjorner", "report": bjorner }));
    }
    let text = if csv {
        let mut s = String::from(polyface::bounds::BoundReport::CSV_HEADER);
        for row in bounds.csv_rows() {
            s.push('\n');
            s.push_str(&row);
        }
        s
    } else {
        pretty(&json!({ "bounds": bounds, "barany": barany, "xue": xue, "bjorner": bjorner }))
    };
    Ok(Outcome::checked(text, failures))
}

fn angles(p: &Polytope, sampling: &Sampling, directions: usize) -> Result<Outcome> {
    let cfg = sampling.config();
    let d = p.dim as i64;
    let mut failures = Vec::new();
    let mut sums = Vec::new();
    for k in 0..=d {
        let s = angle_sum(p, k, &cfg.with_seed(derive_seed(cfg.seed, k as u64)))?;
        sums.push(json!({ "k": k, "sum": s.sum, "stderr": s.stderr }));
    }

    let mut lower = Vec::new();
    for k in 0..d {
        let r = prop_angle_sum_check(p, k, &cfg.with_seed(derive_seed(cfg.seed, k as u64)))?;
        if r.verdict.is_hard_failure() {
            failures.push(json!({ "check": "angle_sum_lower_bound", "report": r }));
        }
        lower.push(r);
    }

    let dirs = if d >= 2 {
        match sample_directions(p, directions, derive_seed(cfg.seed, u64::MAX)) {
            Ok(v) => Some(v),
            Err(PolyError::TooLarge(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let perles = match &dirs {
        Some(dirs) => {
            let mut out = Vec::new();
            for k in 0..d {
                let r = perles_check(p, k, dirs, &cfg.with_seed(derive_seed(cfg.seed, k as u64)))?;
                if r.check.verdict.is_hard_failure() {
                    failures.push(json!({ "check": "perles", "report": r }));
                }
                out.push(json!(r));
            }
            Value::Array(out)
        }
        None => Value::String("skipped".into()),
    };

    let curvature = curvature_sweep(p, &cfg)?;
    let mut strict_max: Option<f64> = None;
    for r in &curvature {
        if r.verdict == Verdict::Fail {
            failures.push(json!({ "check": "curvature", "report": r }));
        }
        if r.face_dim < d - 2 {
            strict_max = Some(strict_max.map_or(r.sum, |m: f64| m.max(r.sum)));
        }
    }
    let report = json!({
        "dim": d,
        "sampling": cfg,
        "angle_sums": sums,
        "angle_sum_lower_bounds": lower,
        "perles": perles,
        "curvature": {
            "faces": curvature.len(),
            "flagged_equality": curvature.iter().filter(|r| r.flagged_equality).count(),
            "max_sum_below_codim_2": strict_max,
            "reports": curvature,
        },
    });
    Ok(Outcome::checked(pretty(&report), failures))
}

fn parse_direction(p: &Polytope, text: &str) -> Result<Direction> {
    let coords = text
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::BadArguments(format!("direction {text:?}: {e}")))?;
    if coords.len() != p.dim {
        return Err(CliError::BadArguments(format!(
            "direction has {} coordinates, polytope has dimension {}",
            coords.len(),
            p.dim
        )));
    }
    let v = Vector::from_ints(&coords);
    match GeneralPosition::new(p) {
        Ok(gp) => {
            let dir = gp.check(v);
            if dir.verified {
                Ok(dir)
            } else {
                Err(PolyError::NotGeneralPosition.into())
            }
        }
        // too many vertex subsets to verify; shadow() still rejects a
        // direction orthogonal to a facet normal
        Err(PolyError::TooLarge(_)) => Ok(Direction { v, verified: false }),
        Err(e) => Err(e.into()),
    }
}

fn project(p: &Polytope, direction: Option<&str>, count: usize, seed: u64) -> Result<Outcome> {
    let dirs = match direction {
        Some(text) => vec![parse_direction(p, text)?],
        None => sample_directions(p, count, seed)?,
    };
    let lattice = face_lattice(p)?;
    let fv = lattice.f_vector()?;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for dir in &dirs {
        let r = analyze(p, &lattice, dir)?.report(&fv)?;
        if !r.holds() {
            failures.push(json!(r));
        }
        reports.push(json!({ "verified": dir.verified, "report": r }));
    }
    let out = json!({ "dim": p.dim, "f_vector": fv.counts, "projections": reports });
    Ok(Outcome::checked(pretty(&out), failures))
}

fn corpus(
    families: &[Family],
    dims: &Dims,
    opts: &CorpusOptions,
    output: Option<&Path>,
) -> Result<Outcome> {
    let families = if families.is_empty() { &Family::ALL[..] } else { families };
    let out = run_corpus(&family_corpus(families, dims.0.clone()), opts);
    write_to(output, &to_csv(&out.rows))?;
    let mut failures: Vec<Value> =
        out.rows.iter().filter(|r| r.failed()).map(|r: &CorpusRow| json!(r)).collect();
    failures.extend(out.errors.iter().map(|e| json!({ "error": e })));
    Ok(Outcome::checked(String::new(), failures))
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Gen { source, output } => {
            if source.family.is_none() {
                return Err(CliError::BadArguments("gen needs --family".into()));
            }
            let json = source.load()?.to_json();
            match output {
                Some(path) => {
                    write_to(Some(&path), &json)?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(json)),
            }
        }
        Command::Describe { source } => describe(&source.load()?),
        Command::VerifyBounds { source, csv } => verify_bounds(&source.load()?, csv),
        Command::Angles { source, sampling, directions } => {
            angles(&source.load()?, &sampling, directions as usize)
        }
        Command::Project { source, direction, directions, seed } => {
            project(&source.load()?, direction.as_deref(), directions as usize, seed)
        }
        Command::Corpus { families, dims, directions, samples, max_angle_dim, seed, sigma, output } => {
            let opts = CorpusOptions { directions: directions as usize, samples, max_angle_dim, seed, sigma };
            corpus(&families, &dims, &opts, output.as_deref())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("POLYFACE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::BadArguments(format!("POLYFACE_THREADS={value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::BadArguments(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli));
    match result {
        Ok(outcome) => {
            if !outcome.text.is_empty() {
                if let Err(e) = write_to(None, &outcome.text) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            match outcome.counterexample {
                None => ExitCode::SUCCESS,
                Some(dump) => {
                    eprintln!("{}", pretty(&json!({ "counterexample": dump })));
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
