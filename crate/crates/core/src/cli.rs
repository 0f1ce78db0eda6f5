//! `dmapx` command line.
//!
//! Every subcommand prints a single-line JSON summary on stdout. Exit codes:
//! 0 success, 2 usage or invalid input, 3 numerical failure, 4 I/O.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{confusion_report, sign_cluster};
use crate::dataset::{load_points, subsample_indices, write_atomic};
use crate::diffusion::{embed, write_eigenvalues, write_embedding};
use crate::error::{Error, Result};
use crate::kernel::epsilon_heuristic;
use crate::oracles::TestFunction;
use crate::potentials::PotentialSpec;
use crate::recipes::{self, GeneratorCheckConfig, OracleOuConfig, Recipe};
use crate::sampler::{langevin_sample, SamplerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "dmapx", version, about = "Anisotropic diffusion maps on point clouds")]
struct Cli {
    /// Worker threads for parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Langevin samples of e^{-U}.
    Sample(SampleArgs),
    /// Uniform subsample without replacement.
    Subsample(SubsampleArgs),
    /// Diffusion-map eigenvalues and embedding of a point CSV.
    Embed(EmbedArgs),
    /// Sign clustering of one embedding coordinate.
    Cluster(ClusterArgs),
    /// Compare the OU chain spectrum with its closed form.
    OracleOu(OracleOuArgs),
    /// Compare the discrete generator with its continuum limit.
    GeneratorCheck(GeneratorCheckArgs),
    /// Rerun one of the built-in examples.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// `name:key=value,...`, e.g. `doublewell2d` or `parabolic1d:tau=1`.
    #[arg(long)]
    potential: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Start point, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Confine to the potential's reference box.
    #[arg(long = "box")]
    confine: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SubsampleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Input has a trailing label column.
    #[arg(long)]
    labels: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Input has a trailing label column (ignored for the embedding).
    #[arg(long)]
    labels: bool,
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Kernel width, or `auto` for the median-distance heuristic.
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: Epsilon,
    /// Eigenpairs to compute, including the trivial one.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Diffusion time m: coordinates are λ^m ψ.
    #[arg(long, default_value_t = 1)]
    time: u32,
    #[arg(long)]
    out_embedding: PathBuf,
    #[arg(long)]
    out_eigen: PathBuf,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    /// Embedding CSV (`id,psi1,...`).
    #[arg(long = "in")]
    input: PathBuf,
    /// 1-based embedding coordinate to threshold at zero.
    #[arg(long, default_value_t = 1)]
    component: usize,
    /// Labeled point CSV giving the true classes, same row order.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write `id,cluster` rows here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleOuArgs {
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GeneratorCheckArgs {
    #[arg(long, default_value = "parabolic1d:tau=1")]
    potential: String,
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 8000)]
    n: usize,
    #[arg(long, default_value = "sin")]
    testfn: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// fig-harmonic | fig-doublewell | fig-triplewell | iris
    recipe: String,
    #[arg(long)]
    out_dir: PathBuf,
    /// Labeled iris CSV (required for `iris`).
    #[arg(long)]
    iris: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
enum Epsilon {
    Auto,
    Value(f64),
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("alpha must lie in [0, 1], got {v}"))
    }
}

fn parse_epsilon(s: &str) -> std::result::Result<Epsilon, String> {
    if s == "auto" {
        return Ok(Epsilon::Auto);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is neither a number nor 'auto'"))?;
    if v > 0.0 && v.is_finite() {
        Ok(Epsilon::Value(v))
    } else {
        Err(format!("epsilon must be positive, got {v}"))
    }
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("--threads ignored: {e}");
        }
    }
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cmd: Command) -> Result<Value> {
    match cmd {
        Command::Sample(a) => sample(a),
        Command::Subsample(a) => subsample(a),
        Command::Embed(a) => embed_cmd(a),
        Command::Cluster(a) => cluster(a),
        Command::OracleOu(a) => oracle_ou(a),
        Command::GeneratorCheck(a) => generator_check(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

fn sample(a: SampleArgs) -> Result<Value> {
    let spec = PotentialSpec::parse(&a.potential)?;
    let x0 = a.x0.unwrap_or_else(|| vec![0.0; spec.dim()]);
    let mut cfg = SamplerConfig::new(x0, a.n, a.seed);
    cfg.dt = a.dt;
    cfg.thin = a.thin;
    if let Some(b) = a.burn_in {
        cfg.burn_in = b;
    }
    if a.confine {
        cfg = cfg.with_bounds(spec.reference_box());
    }
    log::info!("sampling {} points from {spec}", a.n);
    let cloud = langevin_sample(&spec, &cfg)?;
    cloud.save(&a.out, None)?;
    Ok(json!({
        "command": "sample",
        "potential": spec.to_string(),
        "n": cloud.len(),
        "seed": a.seed,
        "out": a.out,
    }))
}

fn subsample(a: SubsampleArgs) -> Result<Value> {
    if a.n == 0 {
        return Err(Error::invalid("--n must be >= 1"));
    }
    let data = load_points(&a.input, a.labels)?;
    let idx = subsample_indices(data.cloud.len(), a.n, a.seed);
    let picked = data.select(&idx);
    let names: Option<Vec<usize>> = picked.labels.clone();
    picked.cloud.save(&a.out, names.as_deref())?;
    Ok(json!({
        "command": "subsample",
        "n_in": data.cloud.len(),
        "n": picked.cloud.len(),
        "seed": a.seed,
        "out": a.out,
    }))
}

fn embed_cmd(a: EmbedArgs) -> Result<Value> {
    let data = load_points(&a.input, a.labels)?;
    let eps = match a.epsilon {
        Epsilon::Value(v) => v,
        Epsilon::Auto => epsilon_heuristic(&data.cloud)?,
    };
    if a.k == 0 || a.k > data.cloud.len() {
        return Err(Error::invalid(format!(
            "--k must be in 1..={}, got {}",
            data.cloud.len(),
            a.k
        )));
    }
    log::info!("embedding {} points, epsilon={eps}, alpha={}", data.cloud.len(), a.alpha);
    let pipe = recipes::run_pipeline(&data.cloud, eps, a.alpha, a.k)?;
    let emb = embed(&pipe.decomposition, a.time);
    write_eigenvalues(&a.out_eigen, &pipe.decomposition.lambdas)?;
    write_embedding(&a.out_embedding, &emb)?;
    Ok(json!({
        "command": "embed",
        "n": data.cloud.len(),
        "epsilon": eps,
        "alpha": a.alpha,
        "k": a.k,
        "time": a.time,
        "lambdas": pipe.decomposition.lambdas,
        "out_embedding": a.out_embedding,
        "out_eigen": a.out_eigen,
    }))
}

fn cluster(a: ClusterArgs) -> Result<Value> {
    let emb = load_points(&a.input, false)?.cloud;
    // Column 0 is the id.
    if a.component == 0 || a.component >= emb.dim() {
        return Err(Error::invalid(format!(
            "--component must be in 1..={}, got {}",
            emb.dim().saturating_sub(1),
            a.component
        )));
    }
    let labels = sign_cluster(&emb.coordinate(a.component));
    let sizes = [labels.iter().filter(|&&l| l == 0).count(), labels.iter().filter(|&&l| l == 1).count()];
    let mut summary = json!({
        "command": "cluster",
        "n": labels.len(),
        "component": a.component,
        "cluster_sizes": sizes,
    });
    if let Some(path) = &a.labels {
        let truth = load_points(path, true)?;
        let t = truth.labels.expect("loaded with labels");
        let report = confusion_report(&labels, &t)?;
        summary["errors"] = json!(report.errors);
        if let Some(r) = &a.report {
            recipes::write_json(r, &report)?;
            summary["report"] = json!(r);
        }
    } else if let Some(r) = &a.report {
        recipes::write_json(r, &json!({ "cluster_sizes": sizes }))?;
        summary["report"] = json!(r);
    }
    if let Some(out) = &a.out {
        write_labels(out, &labels)?;
        summary["out"] = json!(out);
    }
    Ok(summary)
}

fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    use std::io::Write;
    write_atomic(path, |w| {
        writeln!(w, "id,cluster")?;
        for (i, l) in labels.iter().enumerate() {
            writeln!(w, "{i},{l}")?;
        }
        Ok(())
    })
}

fn oracle_ou(a: OracleOuArgs) -> Result<Value> {
    let report = recipes::oracle_ou(&OracleOuConfig {
        n: a.n,
        tau: a.tau,
        epsilon: a.epsilon,
        kmax: a.kmax,
        seed: a.seed,
    })?;
    if let Some(r) = &a.report {
        recipes::write_json(r, &report)?;
    }
    let mut v = serde_json::to_value(&report).expect("plain struct");
    v["command"] = json!("oracle-ou");
    Ok(v)
}

fn generator_check(a: GeneratorCheckArgs) -> Result<Value> {
    if !(a.epsilon > 0.0) {
        return Err(Error::invalid("--epsilon must be positive"));
    }
    let cfg = GeneratorCheckConfig::new(
        PotentialSpec::parse(&a.potential)?,
        a.alpha,
        a.epsilon,
        a.n,
        TestFunction::parse(&a.testfn)?,
        a.seed,
    );
    let report = recipes::generator_check(&cfg)?;
    if let Some(r) = &a.report {
        recipes::write_json(r, &report)?;
    }
    let mut v = serde_json::to_value(&report).expect("plain struct");
    v["command"] = json!("generator-check");
    Ok(v)
}

fn reproduce(a: ReproduceArgs) -> Result<Value> {
    let recipe = Recipe::parse(&a.recipe)?;
    let dir = a.out_dir.as_path();
    log::info!("reproducing {}", recipe.name());
    let (report, outputs) = match recipe {
        Recipe::FigHarmonic => {
            let (r, o) = recipes::fig_harmonic(Some(dir))?;
            (serde_json::to_value(r), o)
        }
        Recipe::FigDoublewell => {
            let (r, o) = recipes::fig_doublewell(Some(dir))?;
            (serde_json::to_value(r), o)
        }
        Recipe::FigTriplewell => {
            let (r, o) = recipes::fig_triplewell(Some(dir))?;
            (serde_json::to_value(r), o)
        }
        Recipe::Iris => {
            let path = a
                .iris
                .as_ref()
                .ok_or_else(|| Error::invalid("the iris recipe needs --iris <labeled CSV>"))?;
            let data = load_points(path, true)?;
            let (r, o) = recipes::iris(&data, &recipes::IRIS_EPSILONS, Some(dir))?;
            (serde_json::to_value(r), o)
        }
    };
    Ok(json!({
        "command": "reproduce",
        "recipe": recipe.name(),
        "files": outputs.files,
        "report": report.expect("plain struct"),
    }))
}
