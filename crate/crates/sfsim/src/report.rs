//! Event-rate bookkeeping report.

use anyhow::Result;
use sfsim_core::analysis::event_probability;
use sfsim_core::pipeline::{analytic_scan_point, SimulationConfig};
use sfsim_core::source::mean_pairs_per_pulse;
use sfsim_core::units::TELECOM_WAVELENGTH_NM;

use crate::runner::{count_point, run_tags};
use crate::scenario;

/// Reference mode-locked-laser system the per-pulse bookkeeping is compared
/// against: 76 MHz repetition rate, 4800 selected coincidences per second.
pub const REFERENCE_REPETITION_MHZ: f64 = 76.0;
pub const REFERENCE_COINCIDENCE_RATE_PER_S: f64 = 4_800.0;

#[derive(Debug, Clone)]
pub struct RatesReport {
    pub repetition_rate_mhz: f64,
    pub pump_power_mw: f64,
    pub mean_pairs_per_pulse: f64,
    pub duration_s: f64,
    pub singles_rate_per_s: [f64; 2],
    pub coincidence_rate_per_s: f64,
    pub accidental_rate_per_s: f64,
    pub coincidence_probability_per_pulse: f64,
    pub analytic_coincidence_rate_per_s: f64,
    pub reference_probability_per_pulse: f64,
}

/// Monte-Carlo rate measurement at the bright-fringe operating point.
pub fn rates_report(cfg: &SimulationConfig, seed: u64, jobs: usize) -> Result<RatesReport> {
    // Snap to the nearest two-photon fringe maximum so the selected rate is
    // quoted at peak.
    let period = TELECOM_WAVELENGTH_NM / 6.0;
    let mut cfg = cfg.clone();
    cfg.interferometer.delta_l_nm = (cfg.interferometer.delta_l_nm / period).round() * period;

    let events = run_tags(&cfg, seed, 0, jobs)?;
    let counts = count_point(&cfg, &events)?;
    let duration_s = cfg.train.pulse_count as f64 * cfg.train.period_ps() * 1e-12;
    let analytic = analytic_scan_point(&cfg).map_err(|e| anyhow::anyhow!("{e}"))?;

    let coincidence_rate = counts.coincidences as f64 / duration_s;
    Ok(RatesReport {
        repetition_rate_mhz: cfg.train.repetition_rate_mhz,
        pump_power_mw: cfg.spdc.pump_power_mw,
        mean_pairs_per_pulse: mean_pairs_per_pulse(&cfg.spdc, &cfg.train),
        duration_s,
        singles_rate_per_s: [
            counts.singles[0] as f64 / duration_s,
            counts.singles[1] as f64 / duration_s,
        ],
        coincidence_rate_per_s: coincidence_rate,
        accidental_rate_per_s: counts.accidentals as f64 / duration_s,
        coincidence_probability_per_pulse: event_probability(
            coincidence_rate,
            cfg.train.repetition_rate_mhz,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?,
        analytic_coincidence_rate_per_s: analytic.coincidences / duration_s,
        reference_probability_per_pulse: event_probability(
            REFERENCE_COINCIDENCE_RATE_PER_S,
            REFERENCE_REPETITION_MHZ,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?,
    })
}

pub fn format_rates(r: &RatesReport) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line("event-rate summary".into());
    line("==================".into());
    line(format!("calibration: edge swing {:.6} rad, mode overlap {:.3}, APD qe {:.2}",
        scenario::EDGE_SWING_BETA_RAD,
        scenario::MODE_OVERLAP_VISIBILITY,
        0.26));
    line(format!("repetition rate        {:>12.3} MHz", r.repetition_rate_mhz));
    line(format!("pump power             {:>12.3} mW", r.pump_power_mw));
    line(format!("mean pairs per pulse   {:>12.4}", r.mean_pairs_per_pulse));
    line(format!("simulated span         {:>12.3} s", r.duration_s));
    line(format!(
        "singles rate           {:>12.0} /s (det 1), {:.0} /s (det 2)",
        r.singles_rate_per_s[0], r.singles_rate_per_s[1]
    ));
    line(format!("selected coincidences  {:>12.0} /s", r.coincidence_rate_per_s));
    line(format!("  closed-form expectation {:>9.0} /s", r.analytic_coincidence_rate_per_s));
    line(format!("accidental estimate    {:>12.1} /s", r.accidental_rate_per_s));
    line(format!(
        "coincidence probability per pulse  {:.2e}",
        r.coincidence_probability_per_pulse
    ));
    line(format!(
        "reference system ({} MHz, {} /s)   {:.2e} per pulse",
        REFERENCE_REPETITION_MHZ,
        REFERENCE_COINCIDENCE_RATE_PER_S,
        r.reference_probability_per_pulse
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::operating_config;

    #[test]
    fn report_rates_are_consistent() {
        let mut cfg = operating_config();
        cfg.train.pulse_count = 400_000;
        let r = rates_report(&cfg, 4, 0).unwrap();
        assert!((r.mean_pairs_per_pulse - 0.09).abs() < 1e-12);
        assert!((r.duration_s - 0.1).abs() < 1e-9);
        // MC coincidence rate near the closed-form expectation (3.5σ).
        let expected = r.analytic_coincidence_rate_per_s;
        let sigma = (expected * r.duration_s).sqrt() / r.duration_s;
        assert!(
            (r.coincidence_rate_per_s - expected).abs() < 3.5 * sigma,
            "rate {} vs {}",
            r.coincidence_rate_per_s,
            expected
        );
        // Probability bookkeeping matches the rate.
        assert!(
            (r.coincidence_probability_per_pulse - r.coincidence_rate_per_s / 4.0e6).abs()
                < 1e-12
        );
        assert!((r.reference_probability_per_pulse - 6.316e-5).abs() < 1e-7);
        let text = format_rates(&r);
        assert!(text.contains("selected coincidences"));
    }
}
