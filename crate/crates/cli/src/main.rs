use clap::{Parser, Subcommand, ValueEnum};
use semiprop_cli::check::{run_properties, write_report};
use semiprop_cli::config::{FamilyBlock, ScenarioConfig};
use semiprop_cli::run::run_scenario;
use semiprop_cli::{init_thread_pool, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "semiprop", version, about = "Semiclassical coherent-state propagators checked against exact propagation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Canonical,
    Spin,
    Sun,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write CSV/JSON comparisons
    Run {
        config: PathBuf,
        /// Newton residual tolerance (overrides run.tol)
        #[arg(long)]
        tol: Option<f64>,
        /// Number of random seeds (overrides run.seeds.count)
        #[arg(long)]
        seeds: Option<usize>,
        /// Drop contributions with |exp(iS/hbar + Lambda)| > 1 + 1e-6
        #[arg(long)]
        filter_spurious: bool,
        /// Output directory (overrides output.dir; default: current directory)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the geometry and propagator property suites for one family
    Check {
        #[arg(long, value_enum)]
        family: Kind,
        /// Spin quantum numbers, one per site
        #[arg(long = "J", value_delimiter = ',', default_values_t = vec![0.5])]
        j: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "N", default_value_t = 2)]
        big_n: u32,
        /// Canonical modes
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        cutoff: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    init_thread_pool()?;
    match cli.command {
        Command::Run { config, tol, seeds, filter_spurious, out_dir } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(t) = tol {
                cfg.run.tol = t;
            }
            if let Some(s) = seeds {
                cfg.run.seeds.count = s;
            }
            cfg.run.filter_spurious |= filter_spurious;
            let dir = out_dir.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| ".".into());
            let stem = cfg.output.stem.clone().unwrap_or_else(|| {
                config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
            });
            let report = run_scenario(&cfg, &dir, &stem)?;
            for r in &report.rows {
                match &r.error {
                    None => println!("t={:.6} n_traj={} rel_err={:.3e}", r.t, r.n_traj, r.rel_err),
                    Some(e) => println!("t={:.6} failed: {e}", r.t),
                }
            }
            for p in &report.outputs {
                println!("wrote {}", p.display());
            }
            Ok(if report.failed_samples > 0 { 2 } else { 0 })
        }
        Command::Check { family, j, n, big_n, d, cutoff, hbar, out_dir } => {
            let block = match family {
                Kind::Canonical => FamilyBlock::Canonical { d, cutoff, hbar },
                Kind::Spin => FamilyBlock::Spin { j, hbar },
                Kind::Sun => FamilyBlock::Sun { n, big_n, hbar },
            };
            let report = run_properties(&block)?;
            for line in report.lines() {
                println!("{line}");
            }
            println!("wrote {}", write_report(&report, &out_dir)?.display());
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
