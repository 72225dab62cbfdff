use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use sfsim::io;
use sfsim::report;
use sfsim::runner::{self, ScanGrid};
use sfsim::scenario::{self, Preset};
use sfsim_core::analysis::{
    calibrate_edge_swing, classical_pulse_visibility, find_histogram_peaks, fit_fringe,
    visibility_from_profiles,
};
use sfsim_core::pipeline::SimulationConfig;

/// Simulator of pulsed 1550 nm energy-time-entangled pair generation,
/// up-conversion to 516.7 nm, and sum-frequency interference in a folded
/// interferometer with a 36 mm arm imbalance.
#[derive(Parser)]
#[command(name = "sfsim", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file overriding the calibrated operating point.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master RNG seed; identical seeds reproduce identical outputs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = auto). The outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a canned experiment preset.
    Run {
        #[arg(long, value_enum)]
        preset: Preset,
    },
    /// Phase-averaged coincidence histogram (three-peak structure).
    Histogram {
        #[arg(long, default_value_t = scenario::HISTOGRAM_PHASE_STEPS)]
        phase_steps: u32,
        #[arg(long, default_value_t = scenario::HISTOGRAM_PULSES_PER_STEP)]
        pulses_per_step: u64,
    },
    /// Two-photon fringe scan versus path-length displacement.
    Scan {
        /// mc (event-by-event) or analytic (closed form).
        #[arg(long, default_value = "mc")]
        engine: String,
        #[arg(long, default_value_t = scenario::SCAN_START_NM)]
        start: f64,
        #[arg(long, default_value_t = scenario::SCAN_STOP_NM)]
        stop: f64,
        #[arg(long, default_value_t = scenario::QUANTUM_SCAN_STEP_NM)]
        step: f64,
        #[arg(long, default_value_t = scenario::QUANTUM_SCAN_PULSES_PER_POINT)]
        pulses_per_point: u64,
    },
    /// Classical up-converted fringe scan (closed form).
    Classical {
        #[arg(long, default_value_t = scenario::SCAN_START_NM)]
        start: f64,
        #[arg(long, default_value_t = scenario::SCAN_STOP_NM)]
        stop: f64,
        #[arg(long, default_value_t = scenario::CLASSICAL_SCAN_STEP_NM)]
        step: f64,
        /// Restrict the pulse-area integral to the flat-top window.
        #[arg(long)]
        windowed: bool,
    },
    /// Classical pulse profiles at a bright and a dark fringe point.
    Profiles {
        #[arg(long, default_value_t = scenario::PROFILE_GRID_PS)]
        grid_ps: f64,
    },
    /// Event-rate bookkeeping summary.
    Rates {
        #[arg(long, default_value_t = 2_000_000)]
        pulses: u64,
    },
    /// Re-derive the modulator edge swing from the classical visibility
    /// target.
    Calibrate {
        #[arg(long, default_value_t = scenario::CLASSICAL_FULL_VISIBILITY_TARGET)]
        target: f64,
    },
}

fn load_config(common: &Common) -> Result<SimulationConfig> {
    match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow!("reading {}: {e}", path.display()))?;
            scenario::parse_scenario(&text)
        }
        None => Ok(scenario::operating_config()),
    }
}

fn cmd_histogram(cfg: &SimulationConfig, common: &Common, steps: u32, pulses: u64) -> Result<()> {
    let hist = runner::phase_averaged_histogram(cfg, steps, pulses, common.seed, common.jobs)?;
    let path = common.out.join("histogram.csv");
    io::write_histogram_csv(&path, &hist)?;
    let peaks = find_histogram_peaks(&hist, cfg.interferometer.delay_ps().abs());
    println!(
        "histogram: {} phase steps x {} pulses, {} coincidences in +-500 ps",
        steps,
        pulses,
        hist.total()
    );
    println!("peaks at {:?} ps (expected 0 and +-{:.1})", peaks, cfg.interferometer.delay_ps());
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_scan(
    cfg: &SimulationConfig,
    common: &Common,
    engine: &str,
    grid: ScanGrid,
) -> Result<()> {
    let scan = match engine {
        "mc" => runner::run_quantum_scan(cfg, &grid, common.seed, common.jobs)?,
        "analytic" => runner::analytic_quantum_scan(cfg, &grid)?,
        other => return Err(anyhow!("unknown engine `{other}` (mc|analytic)")),
    };
    let path = common.out.join(format!("fringe_{engine}.csv"));
    io::write_fringe_csv(&path, &scan)?;
    match fit_fringe(&scan) {
        Ok(fit) => println!(
            "fit: period {:.2} nm, visibility {:.3}, offset {:.1}, residual rms {:.2}",
            fit.period_nm, fit.visibility, fit.offset, fit.residual_rms
        ),
        Err(e) => println!("fit failed: {e}"),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_classical(
    cfg: &SimulationConfig,
    common: &Common,
    start: f64,
    stop: f64,
    step: f64,
    windowed: bool,
) -> Result<()> {
    let window = windowed.then_some(scenario::PROFILE_WINDOW_NS);
    let points = runner::classical_scan(cfg, start, stop, step, window)?;
    let path = common.out.join("classical.csv");
    io::write_classical_csv(&path, &points)?;
    let vis = classical_pulse_visibility(
        cfg.interferometer.delta_l_nm,
        &cfg.train,
        &cfg.interferometer,
        window,
    );
    let label = if windowed { "windowed" } else { "full-pulse" };
    println!("classical {label} fringe visibility {vis:.3}");
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_profiles(cfg: &SimulationConfig, common: &Common, grid_ps: f64) -> Result<()> {
    let (bright_off, dark_off) = runner::classical_extrema_offsets(cfg);
    let (t_ns, bright, dark) = runner::pulse_profiles(cfg, bright_off, dark_off, grid_ps)?;
    let path = common.out.join("profiles.csv");
    io::write_profiles_csv(&path, &t_ns, &bright, &dark)?;
    let full = visibility_from_profiles(
        &t_ns,
        &bright,
        &dark,
        t_ns[0],
        *t_ns.last().expect("nonempty grid"),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let (w0, w1) = scenario::PROFILE_WINDOW_NS;
    let windowed = visibility_from_profiles(&t_ns, &bright, &dark, w0, w1)
        .map_err(|e| anyhow!("{e}"))?;
    println!(
        "profile visibility: full pulse {full:.3}, {w0}-{w1} ns window {windowed:.3}"
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_rates(cfg: &SimulationConfig, common: &Common, pulses: u64) -> Result<()> {
    let mut cfg = cfg.clone();
    cfg.train.pulse_count = pulses;
    let r = report::rates_report(&cfg, common.seed, common.jobs)?;
    print!("{}", report::format_rates(&r));
    Ok(())
}

fn cmd_calibrate(cfg: &SimulationConfig, target: f64) -> Result<()> {
    let beta = calibrate_edge_swing(
        target,
        scenario::EDGE_SWING_BRACKET,
        cfg.interferometer.delta_l_nm,
        &cfg.train,
        &cfg.interferometer,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let calibrated = sfsim_core::source::PulseTrainConfig {
        edge_swing_beta_rad: beta,
        ..cfg.train.clone()
    };
    let full = classical_pulse_visibility(
        cfg.interferometer.delta_l_nm,
        &calibrated,
        &cfg.interferometer,
        None,
    );
    let windowed = classical_pulse_visibility(
        cfg.interferometer.delta_l_nm,
        &calibrated,
        &cfg.interferometer,
        Some(scenario::PROFILE_WINDOW_NS),
    );
    println!("edge swing beta = {beta:.6} rad for full-pulse visibility {target:.3}");
    println!("check: full-pulse {full:.4}, windowed {windowed:.4}");
    println!("frozen operating value: {:.6} rad", scenario::EDGE_SWING_BETA_RAD);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli.common)?;
    match &cli.command {
        Command::Run { preset } => match preset {
            Preset::Histogram => cmd_histogram(
                &cfg,
                &cli.common,
                scenario::HISTOGRAM_PHASE_STEPS,
                scenario::HISTOGRAM_PULSES_PER_STEP,
            ),
            Preset::QuantumFringe => cmd_scan(
                &cfg,
                &cli.common,
                "mc",
                ScanGrid {
                    start_nm: scenario::SCAN_START_NM,
                    stop_nm: scenario::SCAN_STOP_NM,
                    step_nm: scenario::QUANTUM_SCAN_STEP_NM,
                    pulses_per_point: scenario::QUANTUM_SCAN_PULSES_PER_POINT,
                },
            ),
            Preset::ClassicalFringe => cmd_classical(
                &cfg,
                &cli.common,
                scenario::SCAN_START_NM,
                scenario::SCAN_STOP_NM,
                scenario::CLASSICAL_SCAN_STEP_NM,
                false,
            ),
            Preset::Profiles => cmd_profiles(&cfg, &cli.common, scenario::PROFILE_GRID_PS),
            Preset::Rates => cmd_rates(&cfg, &cli.common, 2_000_000),
        },
        Command::Histogram { phase_steps, pulses_per_step } => {
            cmd_histogram(&cfg, &cli.common, *phase_steps, *pulses_per_step)
        }
        Command::Scan { engine, start, stop, step, pulses_per_point } => cmd_scan(
            &cfg,
            &cli.common,
            engine,
            ScanGrid {
                start_nm: *start,
                stop_nm: *stop,
                step_nm: *step,
                pulses_per_point: *pulses_per_point,
            },
        ),
        Command::Classical { start, stop, step, windowed } => {
            cmd_classical(&cfg, &cli.common, *start, *stop, *step, *windowed)
        }
        Command::Profiles { grid_ps } => cmd_profiles(&cfg, &cli.common, *grid_ps),
        Command::Rates { pulses } => cmd_rates(&cfg, &cli.common, *pulses),
        Command::Calibrate { target } => cmd_calibrate(&cfg, *target),
    }
}
