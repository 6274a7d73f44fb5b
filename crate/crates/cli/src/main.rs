use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use sparsetrace::experiments::{gallery, trace_table};
use sparsetrace::mixedvol::mixed_volume;
use sparsetrace::polysys::{random_system, SolutionsJson, SparseSystem};
use sparsetrace::solver::{is_bernstein_generic, solve_torus, SolverConfig};
use sparsetrace::supports::{
    collection_lattice, format_rational, is_abundant, is_lacunary, is_strictly_triangular,
    is_triangular, offset_collection, parse_rational, tal_candidate, unnecessary_candidate,
    SupportCollection,
};
use sparsetrace::tracetest::{constant_sparse_trace_test, sparse_trace_test, TraceConfig, Verdict};
use sparsetrace::Error;

#[derive(Parser, Debug)]
#[command(
    name = "sparsetrace",
    version,
    about = "Trace tests for sparse polynomial systems on the torus"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "SPARSETRACE_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for path tracking (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the result here instead of stdout, with a run manifest next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice, mixed volume, structure flags and offset candidates of a support file.
    Analyze { supports: PathBuf },
    /// All torus solutions of a system file.
    Solve { system: PathBuf },
    /// A system with random coefficients on a support file.
    Random { supports: PathBuf },
    /// Mixed volume of a support file.
    Mixedvol { supports: PathBuf },
    /// Completeness test of a solution file (exit 0 pass, 1 fail, 2 abort).
    TraceTest {
        system: PathBuf,
        solutions: PathBuf,
        /// Run the constant-trace variant on the unnecessary support.
        #[arg(long)]
        constant: bool,
        /// Support file with the varied subset (default: the offset candidate).
        #[arg(long)]
        b_set: Option<PathBuf>,
        /// Relative tolerance of the trace comparison.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Accept the varied subset without checking it against the candidate.
        #[arg(long)]
        assume_candidate: bool,
        /// Accept a varied subset that is not abundant.
        #[arg(long)]
        allow_non_abundant: bool,
        /// Fresh auxiliary systems to try after a path failure.
        #[arg(long, default_value_t = 0)]
        resample: usize,
    },
    /// Reproducible experiment suites.
    Experiments { suite: Suite },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Table1,
    Gallery,
}

/// Provenance record written next to every output file.
#[derive(Serialize)]
struct RunManifest {
    command: Vec<String>,
    input_digests: Vec<(String, String)>,
    seed: u64,
    config_overrides: Value,
    version: &'static str,
    output_digest: String,
    wall_time_seconds: f64,
}

struct Outcome {
    body: Value,
    exit: u8,
}

fn read(path: &Path, inputs: &mut Vec<(String, String)>) -> Result<String, Error> {
    let bytes = fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    inputs.push((path.display().to_string(), sha256(&bytes)));
    String::from_utf8(bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn sha256(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn load_supports(
    path: &Path,
    inputs: &mut Vec<(String, String)>,
) -> Result<SupportCollection, Error> {
    SupportCollection::from_json(&read(path, inputs)?).map_err(|e| in_file(path, e))
}

fn load_system(
    path: &Path,
    inputs: &mut Vec<(String, String)>,
) -> Result<SparseSystem<f64>, Error> {
    SparseSystem::from_json(&read(path, inputs)?).map_err(|e| in_file(path, e))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn analyze(c: &SupportCollection) -> Result<Value, Error> {
    let lattice = collection_lattice::<num_bigint::BigInt>(c);
    let mv = mixed_volume(c)?;
    let witness = is_triangular(c)?;
    let strict = match &witness {
        Some(w) => Some(is_strictly_triangular(c, w)?),
        None => None,
    };
    let mut offsets = serde_json::Map::new();
    for k in ["0", "1/2", "1"] {
        let q = parse_rational(k)?;
        offsets.insert(
            format_rational(&q),
            to_value(&offset_collection(c, &q, 0)?.to_json_value()),
        );
    }
    let tal = tal_candidate(c)?;
    let un = unnecessary_candidate(c)?;
    Ok(json!({
        "n": c.dim(),
        "total_points": c.total_points(),
        "mixed_volume": mv.to_string(),
        "lattice_rank": lattice.rank,
        "lattice_index": lattice.index_string(),
        "lacunary": is_lacunary(c),
        "triangular_witness": witness,
        "strictly_triangular": strict,
        "offsets": offsets,
        "tal_candidate": tal.to_json_value(),
        "unnecessary_candidate": un.to_json_value(),
        "tal_candidate_abundant": is_abundant(&tal),
    }))
}

fn run(
    cli: &Cli,
    inputs: &mut Vec<(String, String)>,
    overrides: &mut Value,
) -> Result<Outcome, Error> {
    let seed = cli.seed;
    let solver = SolverConfig::<f64>::default();
    let ok = |body: Value| Ok(Outcome { body, exit: 0 });
    match &cli.command {
        Command::Analyze { supports } => ok(analyze(&load_supports(supports, inputs)?)?),
        Command::Mixedvol { supports } => {
            let c = load_supports(supports, inputs)?;
            ok(json!({ "mixed_volume": mixed_volume(&c)?.to_string() }))
        }
        Command::Random { supports } => {
            let c = load_supports(supports, inputs)?;
            ok(to_value(&random_system::<f64>(&c, seed).to_json_value()))
        }
        Command::Solve { system } => {
            let f = load_system(system, inputs)?;
            let s = solve_torus(&f, seed, &solver)?;
            let mut body = to_value(&s.to_json_value());
            body["conditions"] = to_value(&s.conditions);
            body["flags"] = to_value(&s.flags);
            body["path_counts"] = to_value(&s.path_counts);
            body["attempts_used"] = to_value(&s.attempts_used);
            body["bernstein_generic"] = Value::Bool(is_bernstein_generic(&f, &s));
            ok(body)
        }
        Command::TraceTest {
            system,
            solutions,
            constant,
            b_set,
            tol,
            assume_candidate,
            allow_non_abundant,
            resample,
        } => {
            let f = load_system(system, inputs)?;
            let text = read(solutions, inputs)?;
            let s = SolutionsJson::from_json(&text)
                .and_then(|j| j.torus_points::<f64>())
                .map_err(|e| in_file(solutions, e))?;
            let c = f.collection().clone();
            let b = match b_set {
                Some(p) => load_supports(p, inputs)?,
                None if *constant => unnecessary_candidate(&c)?,
                None => tal_candidate(&c)?,
            };
            let mut cfg = TraceConfig::<f64>::default();
            cfg.options.rel_tol = *tol;
            cfg.options.assume_candidate = *assume_candidate;
            cfg.options.require_abundant = !allow_non_abundant;
            cfg.options.resample_attempts = *resample;
            *overrides = json!({
                "constant": constant,
                "tol": tol,
                "assume_candidate": assume_candidate,
                "allow_non_abundant": allow_non_abundant,
                "resample": resample,
            });
            let report = if *constant {
                constant_sparse_trace_test(&c, &f, &s, &b, seed, &cfg)?
            } else {
                sparse_trace_test(&c, &f, &s, &b, seed, &cfg)?
            };
            let exit = if report.verdict == Verdict::Pass {
                0
            } else {
                1
            };
            Ok(Outcome {
                body: to_value(&report),
                exit,
            })
        }
        Command::Experiments { suite } => match suite {
            Suite::Table1 => ok(to_value(&trace_table(seed, &solver)?)),
            Suite::Gallery => ok(to_value(&gallery(seed, &solver)?)),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut inputs = Vec::new();
    let mut overrides = Value::Object(Default::default());
    let outcome = match run(&cli, &mut inputs, &mut overrides) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = serde_json::to_string_pretty(&outcome.body).expect("serializable") + "\n";
    match &cli.out {
        None => print!("{text}"),
        Some(path) => {
            if let Some(jobs) = cli.jobs {
                overrides["jobs"] = jobs.into();
            }
            let manifest = RunManifest {
                command: std::env::args().collect(),
                input_digests: inputs,
                seed: cli.seed,
                config_overrides: overrides,
                version: env!("CARGO_PKG_VERSION"),
                output_digest: sha256(text.as_bytes()),
                wall_time_seconds: start.elapsed().as_secs_f64(),
            };
            let mut manifest_path = path.clone().into_os_string();
            manifest_path.push(".manifest.json");
            let manifest_text =
                serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
            if let Err(e) =
                fs::write(path, &text).and_then(|_| fs::write(&manifest_path, manifest_text))
            {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(outcome.exit)
}
