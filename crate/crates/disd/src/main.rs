use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use disd::commands::{self, UnitarySource};
use disd::{CliError, CliResult, RunConfig};
use disd_core::decompose::DecompositionOptions;
use disd_core::qcore::state::Dims;

#[derive(Parser)]
#[command(name = "disd", version, about = "Tripartite A+C+B decoherence-shielding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted and the config has no path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact trajectory with correlation, entropy and product-form residual columns.
    Simulate(RunArgs),
    /// One row per coupling grid point.
    Sweep(RunArgs),
    /// Sampled signaling in both directions and A:B mutual information.
    Locality(RunArgs),
    /// Best sequential factorization of a unitary.
    Decompose(DecomposeArgs),
    /// Dump the configured model as an explicit-matrix config.
    MakeModel(RunArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// JSON file with `matrix` (rows of [re, im]) and optional `dims`.
    #[arg(long, conflicts_with_all = ["plant", "haar", "identity"])]
    unitary: Option<PathBuf>,
    /// Planted sequential instance, `seed=N`.
    #[arg(long, value_parser = parse_seed_arg, conflicts_with_all = ["haar", "identity"])]
    plant: Option<u64>,
    /// Haar-random instance, `seed=N`.
    #[arg(long, value_parser = parse_seed_arg, conflicts_with = "identity")]
    haar: Option<u64>,
    /// The identity on the configured dims.
    #[arg(long)]
    identity: bool,
    /// Takes dims from a run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `a,c,b`; overrides the config. Defaults to 2,2,2.
    #[arg(long, value_parser = parse_dims_arg)]
    dims: Option<(usize, usize, usize)>,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Seed for restart initializations.
    #[arg(long)]
    seed: Option<u64>,
    /// Include the recovered factors in the report.
    #[arg(long)]
    dump_factors: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seed_arg(s: &str) -> Result<u64, String> {
    let value = s.strip_prefix("seed=").unwrap_or(s);
    value.parse().map_err(|_| format!("expected seed=<int>, got {s:?}"))
}

fn parse_dims_arg(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad dimension {p:?}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, c, b] => Ok((a, c, b)),
        _ => Err(format!("expected a,c,b, got {s:?}")),
    }
}

fn load(args: &RunArgs) -> CliResult<(RunConfig, Option<PathBuf>)> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.as_ref().map(PathBuf::from)));
    Ok((cfg, out))
}

fn run_with(args: &RunArgs, body: fn(&RunConfig) -> CliResult<String>) -> CliResult<()> {
    let (cfg, out) = load(args)?;
    commands::emit(&body(&cfg)?, out.as_deref())
}

fn run_decompose(args: &DecomposeArgs) -> CliResult<()> {
    let cfg = args.config.as_deref().map(RunConfig::load).transpose()?;
    let (a, c, b) = args
        .dims
        .or_else(|| cfg.as_ref().map(|c| (c.dims.a, c.dims.c, c.dims.b)))
        .unwrap_or((2, 2, 2));
    let dims = Dims::new(a, c, b)?;
    let source = match (&args.unitary, args.plant, args.haar, args.identity) {
        (Some(p), ..) => UnitarySource::File(p.clone()),
        (None, Some(seed), ..) => UnitarySource::Plant(seed),
        (None, None, Some(seed), _) => UnitarySource::Haar(seed),
        (None, None, None, true) => UnitarySource::Identity,
        _ => {
            return Err(CliError::Config(
                "decompose needs one of --unitary, --plant, --haar or --identity".into(),
            ))
        }
    };
    let opts = DecompositionOptions {
        restarts: args.restarts,
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0),
    };
    let text = commands::decompose(&source, dims, &opts, args.dump_factors)?;
    commands::emit(&text, args.out.as_deref().map(Path::new))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => run_with(a, commands::simulate),
        Command::Sweep(a) => run_with(a, commands::sweep),
        Command::Locality(a) => run_with(a, commands::locality),
        Command::MakeModel(a) => run_with(a, commands::make_model),
        Command::Decompose(a) => run_decompose(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
