use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfp_core::scenarios::presets::PRESETS;

mod config;
mod run;

use config::ScenarioConfig;

const EXIT_INVARIANT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "qfp", version, about = "Build and certify coarse-grained weak-coupling generators")]
struct Cli {
    /// Output directory (overrides `output.dir` in the config)
    #[arg(long, global = true, env = "QFP_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads for the per-coupling jobs (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for the certificate probe states (overrides `seed` in the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write CSV and JSON results
    Run { config: PathBuf },
    /// Parse and check a scenario without running the numerics
    Validate { config: PathBuf },
    /// Inspect the built-in models
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand, Debug)]
enum PresetsAction {
    /// List preset names with their scenario kind
    List,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ExitCode> {
    match config::load(path) {
        Ok(mut cfg) => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            Ok(cfg)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            Err(ExitCode::from(EXIT_CONFIG))
        }
    }
}

fn run(cli: &Cli, path: &Path) -> ExitCode {
    let cfg = match load(path, cli.seed) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("qfp-out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_CONFIG);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_INVARIANT);
        }
    };
    let outcome = pool.install(|| run::execute(&cfg)).and_then(|report| {
        let written = run::write_outputs(&cfg, &report, &dir)?;
        Ok((report, written))
    });
    match outcome {
        Ok((report, written)) => {
            for r in &report.results {
                println!(
                    "λ = {:<10} T = {:<12.6e} certificate {} sup error {}",
                    r.lambda,
                    r.coarse_graining_time,
                    if r.certificate_passed { "ok" } else { "FAILED" },
                    r.sup_error_norm.map(|e| format!("{e:.6e}")).unwrap_or_else(|| "-".into())
                );
            }
            if let Some(d) = &report.gibbs_distance {
                println!("gibbs distances {d:?}");
            }
            println!("wrote {} and {}", written.csv.display(), written.json.display());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                for w in &report.witnesses {
                    eprintln!("invariant failure: {w}");
                }
                ExitCode::from(EXIT_INVARIANT)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}

fn validate(cli: &Cli, path: &Path) -> ExitCode {
    let cfg = match load(path, cli.seed) {
        Ok(c) => c,
        Err(code) => return code,
    };
    println!("ok");
    if let Some(p) = &cfg.preset {
        println!("  preset {p}");
    }
    println!(
        "  kind {:?}, dimension {} (full {}), {} coupling(s), {} time sample(s) per coupling",
        cfg.kind,
        cfg.model.dim(),
        cfg.model.full_dim(),
        cfg.schedules.len(),
        cfg.time_grid.times(cfg.schedules[0].lambda).len()
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Validate { config } => validate(&cli, config),
        Command::Presets {
            action: PresetsAction::List,
        } => {
            for p in PRESETS {
                println!("{:<18} {:<10} {}", p.name, p.kind.as_str(), p.description);
            }
            ExitCode::SUCCESS
        }
    }
}
