use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use xxz_lindblad_cli::run::record_error;
use xxz_lindblad_cli::{run, CliError, RunConfig, Task};

#[derive(Debug, Parser)]
#[command(name = "xxz-relax", version, about = "Relaxation spectra and Mpemba checks for the dephased XXZ chain")]
struct Args {
    /// TOML config, or a JSON config or manifest.
    #[arg(short, long)]
    config: PathBuf,

    /// Task to run instead of the config's list; repeatable.
    #[arg(long = "task", value_name = "TASK")]
    tasks: Vec<String>,

    /// Output directory, overriding the config.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, env = "XXZ_RELAX_THREADS")]
    threads: Option<usize>,

    /// Suppress progress messages.
    #[arg(short, long)]
    quiet: bool,
}

fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if !args.tasks.is_empty() {
        config.tasks = args.tasks.iter().map(|t| Task::parse(t)).collect::<Result<_, _>>()?;
    }
    if let Some(dir) = &args.output {
        config.output_dir = dir.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", CliError::Config(format!("thread pool: {e}")).to_json());
            return ExitCode::from(2);
        }
    }
    let config = resolve(&args);
    let result = config.as_ref().map_err(|_| ()).ok().map(|c| run(c, args.quiet));
    let err = match (config, result) {
        (Ok(_), Some(Ok(manifest))) => {
            if !args.quiet {
                eprintln!("done in {:.2} s", manifest.total_seconds);
            }
            return ExitCode::SUCCESS;
        }
        (Ok(c), Some(Err(e))) => {
            record_error(&c.output_dir, &e);
            e
        }
        (Err(e), _) => {
            if let Some(dir) = &args.output {
                record_error(dir, &e);
            }
            e
        }
        (Ok(_), None) => unreachable!(),
    };
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}
