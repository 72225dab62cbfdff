//! Threaded simulation driver.
//!
//! Pulses are independent by construction (counter-keyed per-pulse RNG), so
//! the train is split into contiguous chunks, simulated on worker threads,
//! and merged deterministically: results are identical for any `--jobs`.

use anyhow::{anyhow, Context, Result};
use sfsim_core::analysis::{
    classical_pulse_area, coincidences_in_window, estimate_accidentals, FringeSample, FringeScan,
};
use sfsim_core::detection::{correlate, CorrelationHistogram};
use sfsim_core::interferometer::classical_intensity;
use sfsim_core::pipeline::{
    analytic_scan_point, detector_times, finalize, simulate_pulse_range, SimulationConfig,
    TaggedEvent, COINCIDENCE_HALF_WINDOW_PS, HISTOGRAM_BIN_PS,
};
use sfsim_core::units::TELECOM_WAVELENGTH_NM;

/// Resolve a `--jobs` request; 0 means "use the available parallelism".
pub fn resolve_jobs(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Simulate the configured pulse train on `jobs` threads and return the
/// finalized tag stream.
pub fn run_tags(
    cfg: &SimulationConfig,
    seed: u64,
    stream: u64,
    jobs: usize,
) -> Result<Vec<TaggedEvent>> {
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    let pulses = cfg.train.pulse_count;
    let jobs = resolve_jobs(jobs).min(pulses.max(1) as usize);

    let chunk = pulses.div_ceil(jobs as u64);
    let mut partials: Vec<Result<Vec<TaggedEvent>>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs as u64)
            .map(|j| {
                let lo = j * chunk;
                let hi = ((j + 1) * chunk).min(pulses);
                scope.spawn(move || {
                    simulate_pulse_range(cfg, seed, stream, lo..hi)
                        .map_err(|e| anyhow!("{e}"))
                })
            })
            .collect();
        partials = handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect();
    });

    let mut events = Vec::new();
    for partial in partials {
        events.extend(partial?);
    }
    Ok(finalize(events, &cfg.apd))
}

/// Selected counts extracted from one finalized tag stream.
pub struct PointCounts {
    pub coincidences: u64,
    pub accidentals: u64,
    pub singles: [u64; 2],
}

pub fn count_point(cfg: &SimulationConfig, events: &[TaggedEvent]) -> Result<PointCounts> {
    let (det1, det2) = detector_times(events);
    let coincidences = coincidences_in_window(&det1, &det2, COINCIDENCE_HALF_WINDOW_PS)
        .map_err(|e| anyhow!("{e}"))?;
    let accidentals = estimate_accidentals(
        &det1,
        &det2,
        cfg.train.period_ps() as i64,
        COINCIDENCE_HALF_WINDOW_PS,
    )
    .map_err(|e| anyhow!("{e}"))?;
    Ok(PointCounts {
        coincidences,
        accidentals,
        singles: [det1.len() as u64, det2.len() as u64],
    })
}

/// Scan grid description: displacements are applied on top of the base
/// path-length difference in the configuration.
#[derive(Debug, Clone, Copy)]
pub struct ScanGrid {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub step_nm: f64,
    pub pulses_per_point: u64,
}

impl ScanGrid {
    pub fn offsets(&self) -> Result<Vec<f64>> {
        if !(self.step_nm > 0.0 && self.stop_nm >= self.start_nm) {
            return Err(anyhow!("scan grid must have positive step and stop >= start"));
        }
        let n = ((self.stop_nm - self.start_nm) / self.step_nm).round() as usize + 1;
        Ok((0..n).map(|i| self.start_nm + i as f64 * self.step_nm).collect())
    }
}

/// Monte-Carlo two-photon fringe scan. Each point uses an independent RNG
/// stream keyed by its index, so the scan is reproducible point by point.
pub fn run_quantum_scan(
    base: &SimulationConfig,
    grid: &ScanGrid,
    seed: u64,
    jobs: usize,
) -> Result<FringeScan> {
    let mut samples = Vec::new();
    for (i, offset) in grid.offsets()?.into_iter().enumerate() {
        let mut cfg = base.clone();
        cfg.train.pulse_count = grid.pulses_per_point;
        cfg.interferometer.delta_l_nm = base.interferometer.delta_l_nm + offset;
        let events = run_tags(&cfg, seed, i as u64, jobs)
            .with_context(|| format!("scan point at offset {offset} nm"))?;
        let counts = count_point(&cfg, &events)?;
        samples.push(FringeSample {
            delta_l_nm: offset,
            coincidences: counts.coincidences,
            accidentals: counts.accidentals,
        });
    }
    Ok(FringeScan { samples, step_nm: grid.step_nm })
}

/// Closed-form expectation of the same scan; accidentals are zero in the
/// ideal engine.
pub fn analytic_quantum_scan(base: &SimulationConfig, grid: &ScanGrid) -> Result<FringeScan> {
    let mut samples = Vec::new();
    for offset in grid.offsets()? {
        let mut cfg = base.clone();
        cfg.train.pulse_count = grid.pulses_per_point;
        cfg.interferometer.delta_l_nm = base.interferometer.delta_l_nm + offset;
        let expected = analytic_scan_point(&cfg).map_err(|e| anyhow!("{e}"))?;
        samples.push(FringeSample {
            delta_l_nm: offset,
            coincidences: expected.coincidences.round() as u64,
            accidentals: 0,
        });
    }
    Ok(FringeScan { samples, step_nm: grid.step_nm })
}

/// Classical fringe scan: time-integrated up-converted intensity versus
/// path-length displacement (closed form).
pub fn classical_scan(
    base: &SimulationConfig,
    start_nm: f64,
    stop_nm: f64,
    step_nm: f64,
    window_ns: Option<(f64, f64)>,
) -> Result<Vec<(f64, f64)>> {
    if !(step_nm > 0.0 && stop_nm >= start_nm) {
        return Err(anyhow!("scan grid must have positive step and stop >= start"));
    }
    let n = ((stop_nm - start_nm) / step_nm).round() as usize + 1;
    Ok((0..n)
        .map(|i| {
            let offset = start_nm + i as f64 * step_nm;
            let delta = base.interferometer.delta_l_nm + offset;
            let area =
                classical_pulse_area(delta, &base.train, &base.interferometer, window_ns);
            (offset, area)
        })
        .collect())
}

/// Path-length displacements (relative to the base ΔL) of the nearest
/// classical fringe maximum and minimum.
pub fn classical_extrema_offsets(base: &SimulationConfig) -> (f64, f64) {
    let period = TELECOM_WAVELENGTH_NM / 3.0;
    let mut best_max = (f64::NEG_INFINITY, 0.0);
    let mut best_min = (f64::INFINITY, 0.0);
    for i in 0..192 {
        let offset = i as f64 * period / 192.0;
        let area = classical_pulse_area(
            base.interferometer.delta_l_nm + offset,
            &base.train,
            &base.interferometer,
            None,
        );
        if area > best_max.0 {
            best_max = (area, offset);
        }
        if area < best_min.0 {
            best_min = (area, offset);
        }
    }
    (best_max.1, best_min.1)
}

/// Classical intensity profiles over the pulse at two path differences, on
/// a common time grid.
pub fn pulse_profiles(
    base: &SimulationConfig,
    offset_bright_nm: f64,
    offset_dark_nm: f64,
    grid_ps: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if !(grid_ps > 0.0) {
        return Err(anyhow!("profile grid step must be positive"));
    }
    let t0 = 0.0;
    let t1 = base.train.support_end_ps() + 500.0;
    let n = ((t1 - t0) / grid_ps) as usize + 1;
    let mut t_ns = Vec::with_capacity(n);
    let mut bright = Vec::with_capacity(n);
    let mut dark = Vec::with_capacity(n);
    for i in 0..n {
        let t = t0 + i as f64 * grid_ps;
        t_ns.push(t * 1e-3);
        bright.push(classical_intensity(
            base.interferometer.delta_l_nm + offset_bright_nm,
            t,
            &base.train,
            &base.interferometer,
        ));
        dark.push(classical_intensity(
            base.interferometer.delta_l_nm + offset_dark_nm,
            t,
            &base.train,
            &base.interferometer,
        ));
    }
    Ok((t_ns, bright, dark))
}

/// Correlation histogram accumulated over a grid of fringe phases, so the
/// central-peak interference term averages out and the peak-area ratios can
/// be read off directly.
pub fn phase_averaged_histogram(
    base: &SimulationConfig,
    phase_steps: u32,
    pulses_per_step: u64,
    seed: u64,
    jobs: usize,
) -> Result<CorrelationHistogram> {
    if phase_steps == 0 {
        return Err(anyhow!("phase_steps must be positive"));
    }
    let period = TELECOM_WAVELENGTH_NM / 6.0;
    let mut accumulated: Option<CorrelationHistogram> = None;
    for k in 0..phase_steps {
        let mut cfg = base.clone();
        cfg.train.pulse_count = pulses_per_step;
        cfg.interferometer.delta_l_nm =
            base.interferometer.delta_l_nm + k as f64 * period / phase_steps as f64;
        let events = run_tags(&cfg, seed, 0x1000 + k as u64, jobs)?;
        let (det1, det2) = detector_times(&events);
        let hist =
            correlate(&det1, &det2, 500, HISTOGRAM_BIN_PS).map_err(|e| anyhow!("{e}"))?;
        match &mut accumulated {
            None => accumulated = Some(hist),
            Some(acc) => {
                for (slot, c) in acc.counts.iter_mut().zip(hist.counts) {
                    *slot += c;
                }
            }
        }
    }
    Ok(accumulated.expect("at least one phase step"))
}
