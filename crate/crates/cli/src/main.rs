use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dixtrace_cli::{execute, parse_batch, parse_config, CliError, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "dixtrace", version, about = "Run trace and spectral experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a JSON array of configs; each should name its own output path.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    WeierstrassTrace(KindArgs),
    Measurability(KindArgs),
    SingularValueSweep(KindArgs),
    KernelCheck(KindArgs),
    Winding(KindArgs),
    NcTorus(KindArgs),
    HnCheck(KindArgs),
    FourierTrace(KindArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also write the experiment's truncated operator as JSON.
    #[arg(long)]
    dump_operator: Option<PathBuf>,
}

#[derive(Args)]
struct KindArgs {
    /// Parameters as an inline JSON object or a path to a JSON file.
    #[arg(long)]
    params: String,
    #[arg(long)]
    max_matrix: Option<usize>,
    #[arg(long)]
    max_tuples: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))
}

fn apply_out(cfg: &mut ExperimentConfig, out: &OutArgs) {
    if let Some(p) = &out.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = out.format {
        cfg.output.format = Some(match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        });
    }
}

fn kind_config(kind: &str, args: &KindArgs) -> Result<ExperimentConfig, CliError> {
    let text = if args.params.trim_start().starts_with('{') {
        args.params.clone()
    } else {
        read(&PathBuf::from(&args.params))?
    };
    let params: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("params: {e}")))?;
    let mut doc = serde_json::json!({ "kind": kind, "params": params });
    if args.max_matrix.is_some() || args.max_tuples.is_some() {
        let mut limits = serde_json::Map::new();
        if let Some(m) = args.max_matrix {
            limits.insert("max_matrix".into(), m.into());
        }
        if let Some(t) = args.max_tuples {
            limits.insert("max_tuples".into(), t.into());
        }
        doc["limits"] = limits.into();
    }
    parse_config(&doc.to_string())
}

fn emit(bytes: Option<Vec<u8>>) -> Result<(), CliError> {
    if let Some(b) = bytes {
        std::io::stdout().write_all(&b)?;
    }
    Ok(())
}

fn run_batch(configs: Vec<ExperimentConfig>, jobs: usize) -> Result<(), CliError> {
    if configs.iter().any(|c| c.output.path.is_none()) {
        return Err(CliError::Validation("every batch entry needs output.path".into()));
    }
    let jobs = jobs.max(1);
    let chunks: Vec<&[ExperimentConfig]> = configs.chunks(configs.len().div_ceil(jobs).max(1)).collect();
    let results: Vec<Result<(), CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| s.spawn(move || chunk.iter().try_for_each(|c| execute(c, None).map(|_| ()))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::Compute("worker panicked".into())))).collect()
    });
    results.into_iter().collect()
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (kind, args) = match cli.command {
        Command::Run { config, out } => {
            let mut cfg = parse_config(&read(&config)?)?;
            apply_out(&mut cfg, &out);
            return emit(execute(&cfg, out.dump_operator.as_deref())?);
        }
        Command::Batch { config, jobs } => return run_batch(parse_batch(&read(&config)?)?, jobs),
        Command::WeierstrassTrace(a) => ("weierstrass_trace", a),
        Command::Measurability(a) => ("measurability", a),
        Command::SingularValueSweep(a) => ("singular_value_sweep", a),
        Command::KernelCheck(a) => ("kernel_check", a),
        Command::Winding(a) => ("winding", a),
        Command::NcTorus(a) => ("nc_torus", a),
        Command::HnCheck(a) => ("hn_check", a),
        Command::FourierTrace(a) => ("fourier_trace", a),
    };
    let mut cfg = kind_config(kind, &args)?;
    apply_out(&mut cfg, &args.out);
    emit(execute(&cfg, args.out.dump_operator.as_deref())?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dixtrace: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
