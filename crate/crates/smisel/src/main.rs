use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use smisel::emb1::write_emb1_file;
use smisel::pipeline::{
    cmd_batch, cmd_bench, cmd_compare, cmd_select, BenchRequest, CompareRequest, SelectRequest,
    SelectionParams, Strategy,
};
use smisel::report::to_json;
use smisel::verify::{run_verify, VerifyOptions};
use smisel_core::{synth, GreedyMode, KernelTransform};

const EXIT_ERROR: u8 = 1;
const EXIT_PROPERTY_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "smisel", version, about = "Query-driven video frame selection with submodular mutual information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select frames for one video and write a JSON report.
    Select(SelectArgs),
    /// Run every entry of a JSON-lines manifest.
    Batch(BatchArgs),
    /// Run several strategies on one shared kernel and compare them.
    Compare(CompareArgs),
    /// Run the property self-test suite.
    Verify(VerifyArgs),
    /// Time kernel construction and selection on a synthetic instance.
    Bench(BenchArgs),
    /// Write seeded random frame and query EMB1 files.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    ClampZero,
    AffineUnit,
    Raw,
}

impl From<TransformArg> for KernelTransform {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::ClampZero => KernelTransform::ClampZero,
            TransformArg::AffineUnit => KernelTransform::AffineUnit,
            TransformArg::Raw => KernelTransform::Raw,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Naive,
    Lazy,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Flmi,
    Gcmi,
    FacilityLocation,
    Uniform,
    Random,
}

impl From<ObjectiveArg> for Strategy {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Flmi => Strategy::Flmi,
            ObjectiveArg::Gcmi => Strategy::Gcmi,
            ObjectiveArg::FacilityLocation => Strategy::FacilityLocation,
            ObjectiveArg::Uniform => Strategy::Uniform,
            ObjectiveArg::Random => Strategy::Random,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// FLMI query-coverage weight.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// GCMI scale.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Seed of the random baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "clamp-zero")]
    transform: TransformArg,
    #[arg(long, value_enum, default_value = "lazy")]
    mode: ModeArg,
    /// Write null timings so reports are byte-reproducible.
    #[arg(long)]
    stable: bool,
}

impl ParamArgs {
    fn params(&self) -> SelectionParams {
        SelectionParams {
            eta: self.eta,
            lambda: self.lambda,
            seed: self.seed,
            transform: self.transform.into(),
            mode: match self.mode {
                ModeArg::Naive => GreedyMode::Naive,
                ModeArg::Lazy => GreedyMode::Lazy,
            },
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    frames: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    #[arg(long)]
    budget: usize,
    /// Report file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Defaults to the frames file stem.
    #[arg(long)]
    sample_id: Option<String>,
    /// Also dump the kernel blocks as `<PREFIX>.gg.emb1`, `<PREFIX>.gq.emb1`, `<PREFIX>.kernel.json`.
    #[arg(long, value_name = "PREFIX")]
    dump_kernel: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    frames: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    budget: usize,
    /// Comma-separated strategies, e.g. `uniform,gcmi,flmi`.
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., required = true)]
    strategies: Vec<ObjectiveArg>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    sample_id: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,10,12")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    budgets: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 512)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long, default_value_t = 12)]
    budget: usize,
    #[arg(long, value_enum, default_value = "flmi")]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "clamp-zero")]
    transform: TransformArg,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes `<PREFIX>.frames.emb1` and `<PREFIX>.queries.emb1`.
    #[arg(long, value_name = "PREFIX")]
    out_prefix: PathBuf,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".to_string())
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Select(args) => {
            let req = SelectRequest {
                sample_id: args.sample_id.unwrap_or_else(|| stem(&args.frames)),
                frames: args.frames,
                queries: args.queries,
                strategy: args.objective.into(),
                budget: args.budget,
                params: args.params.params(),
                stable: args.params.stable,
            };
            cmd_select(&req, args.output.as_deref(), args.dump_kernel.as_deref())?;
        }
        Command::Batch(args) => {
            let summary = cmd_batch(&args.manifest, &args.out_dir, &args.params.params(), args.params.stable)?;
            println!("batch: {} ok, {} failed", summary.ok, summary.failed);
        }
        Command::Compare(args) => {
            let req = CompareRequest {
                sample_id: args.sample_id.unwrap_or_else(|| stem(&args.frames)),
                frames: args.frames,
                queries: args.queries,
                strategies: args.strategies.into_iter().map(Strategy::from).collect(),
                budget: args.budget,
                params: args.params.params(),
                stable: args.params.stable,
            };
            cmd_compare(&req, args.output.as_deref())?;
        }
        Command::Verify(args) => {
            let outcome = run_verify(&VerifyOptions {
                sizes: args.sizes,
                budgets: args.budgets,
                trials: args.trials,
                seed: args.seed,
                ..VerifyOptions::default()
            })?;
            if outcome.vacuous {
                eprintln!("warning: 0 trials requested; all properties pass vacuously");
            }
            for result in &outcome.results {
                println!("{result}");
            }
            if !outcome.passed() {
                return Ok(ExitCode::from(EXIT_PROPERTY_FAILURE));
            }
        }
        Command::Bench(args) => {
            let summary = cmd_bench(&BenchRequest {
                n: args.n,
                d: args.d,
                q: args.q,
                budget: args.budget,
                objective: args.objective.into(),
                repetitions: args.repetitions,
                seed: args.seed,
                params: SelectionParams {
                    transform: args.transform.into(),
                    ..SelectionParams::default()
                },
            })?;
            print!("{}", to_json(&summary));
        }
        Command::Synth(args) => {
            let (frames, queries) = synth::random_embeddings(args.seed, args.n, args.q, args.d)?;
            let mut frames_path = args.out_prefix.clone().into_os_string();
            frames_path.push(".frames.emb1");
            let mut queries_path = args.out_prefix.into_os_string();
            queries_path.push(".queries.emb1");
            write_emb1_file(&frames, Path::new(&frames_path))?;
            write_emb1_file(&queries, Path::new(&queries_path))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
