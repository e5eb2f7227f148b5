use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use capregion::scenario::{fig1, fig2, run_scenario, selfcheck, RunSummary, SelfCheckOptions};
use capregion::{load_scenario, CapResult};

#[derive(Parser)]
#[command(
    name = "capregion",
    version,
    about = "Capacity regions of the two-user asynchronous MAC with faster-than-Nyquist signaling"
)]
struct Cli {
    /// Worker threads for boundary tracing (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory that receives CSV/SVG artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario configuration file (dotted key = value format).
    Run {
        /// Path to the scenario file.
        config: PathBuf,
        /// Validate the configuration and exit without computing.
        #[arg(long)]
        dry_run: bool,
    },
    /// Reproduce the capacity-region comparison figure (8 CSV curves + SVG).
    Fig1 {
        /// Optimizer seed (results are deterministic per seed).
        #[arg(long, default_value_t = 2026)]
        seed: u64,
    },
    /// Reproduce the delay-sweep figure (CSV with argmax flag + SVG).
    Fig2 {
        #[arg(long, default_value_t = 2026)]
        seed: u64,
    },
    /// Run the fast invariant suite and exit 0 iff every check passes.
    Selfcheck {
        /// Fault-injection hook: scales pulse autocorrelation samples; any
        /// value other than 1.0 must make the suite fail.
        #[arg(long, default_value_t = 1.0)]
        pulse_scale: f64,
    },
}

const FIG_PRECISION: usize = 11;

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
        {
            eprintln!("error: cannot configure {k} worker threads: {e}");
            return ExitCode::from(2);
        }
    }

    let result: CapResult<RunSummary> = match &cli.cmd {
        Cmd::Run { config, dry_run } => {
            load_scenario(config).and_then(|cfg| run_scenario(&cfg, &cli.out_dir, *dry_run))
        }
        Cmd::Fig1 { seed } => fig1(&cli.out_dir, *seed, FIG_PRECISION),
        Cmd::Fig2 { seed } => fig2(&cli.out_dir, *seed, FIG_PRECISION),
        Cmd::Selfcheck { pulse_scale } => {
            let report = selfcheck(&SelfCheckOptions {
                pulse_scale: *pulse_scale,
            });
            for line in report.render() {
                println!("{line}");
            }
            return if report.all_passed() {
                println!("selfcheck: all checks passed");
                ExitCode::SUCCESS
            } else {
                println!("selfcheck: FAILED");
                ExitCode::from(1)
            };
        }
    };

    match result {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for path in &summary.artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
