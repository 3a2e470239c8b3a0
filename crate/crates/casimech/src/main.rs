use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use casimech::cli::{Run, ScenarioKind};
use casimech::Error;

/// Cavity field coupled to a quantized movable mirror: perturbative
/// dynamics, Casimir force and exact Fock-space checks.
#[derive(Parser, Debug)]
#[command(name = "casimech", version)]
struct Args {
    /// Scenario to run; must match the `scenario` key of the config.
    scenario: ScenarioKind,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output` from the config, else ".").
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "CASIMECH_THREADS")]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Args) -> Result<Vec<PathBuf>, Error> {
    let mut run = Run::from_file(&args.config)?;
    if run.config.scenario != args.scenario {
        return Err(Error::Parse(format!(
            "scenario {} does not match the config ({})",
            args.scenario.name(),
            run.config.scenario.name()
        )));
    }
    if let Some(s) = args.seed {
        run.config.seed = s;
    }
    let out = args.out.or_else(|| run.config.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Parse("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Numerical(e.to_string()))?;
    for w in run.config.system.build()?.warnings() {
        eprintln!("warning: {w}");
    }
    pool.install(|| run.execute(&out))
}
