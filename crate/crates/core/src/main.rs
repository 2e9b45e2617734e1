use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use usv_coverage::checks::suites;
use usv_coverage::harness::{self, plots, Fidelity, Mode, SimConfig, SimLog};
use usv_coverage::vehicle::build_lawnmower;

#[derive(Parser)]
#[command(version, about = "Persistent coverage path generation for constant-speed surface vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its logs.
    Sim(RunArgs),
    /// Run a scenario with the lawnmower baseline.
    Baseline(RunArgs),
    /// Run the randomized invariant and oracle suites.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only run suites whose name contains this text.
        #[arg(long)]
        only: Option<String>,
    },
    /// Turn exported logs into plot-ready tables.
    ExportPlots {
        /// Directory holding the logs written by `sim` or `baseline`.
        #[arg(long, default_value = "out")]
        input: PathBuf,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    fidelity: Option<Fidelity>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn config(&self) -> usv_coverage::error::Result<SimConfig> {
        let mut c = SimConfig::load(&self.scenario)?;
        if let Some(d) = self.duration {
            c.duration_s = d;
        }
        if let Some(dt) = self.dt {
            c.dt_s = dt;
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        if let Some(f) = self.fidelity {
            c.fidelity = f;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

fn simulate(args: &RunArgs, force_baseline: bool) -> usv_coverage::error::Result<()> {
    let mut config = args.config()?;
    if force_baseline {
        config.mode = Mode::Baseline;
    }
    if config.mode == Mode::Baseline {
        std::fs::create_dir_all(&args.out)?;
        for i in 0..config.n() {
            let plan = build_lawnmower(&config.baseline_region(i), config.baseline.stripe_width_m, config.baseline.waypoint_spacing_m)?;
            plan.write_csv(std::fs::File::create(args.out.join(format!("plan_{i}.csv")))?)?;
        }
    }
    let start = Instant::now();
    let log = harness::run(&config)?;
    log.export(&args.out)?;
    let last = log.field.last().map_or(f64::NAN, |f| f.phi_sum);
    println!(
        "{}: {} steps, final phi sum {:.3}, {:.1} s wall, logs in {}",
        config.name,
        log.field.len(),
        last,
        start.elapsed().as_secs_f64(),
        args.out.display()
    );
    Ok(())
}

fn check(seed: u64, only: Option<&str>) -> bool {
    let mut all = true;
    for report in suites::run_all(seed) {
        if only.is_none_or(|o| report.name.contains(o)) {
            println!("{report}");
            all &= report.passed;
        }
    }
    all
}

fn export_plots(input: &std::path::Path, out: &std::path::Path) -> usv_coverage::error::Result<()> {
    let log = SimLog::import(input)?;
    plots::export_plot_tables(&log, out)?;
    println!("plot tables in {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sim(a) => simulate(a, false),
        Command::Baseline(a) => simulate(a, true),
        Command::Check { seed, only } => {
            return if check(*seed, only.as_deref()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
        Command::ExportPlots { input, out } => export_plots(input, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
