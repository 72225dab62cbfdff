//! Pulsed pump synthesis and per-pulse photon-pair sampling.
//!
//! The pump is a 4 MHz train of flat-topped pulses carved by an intensity
//! modulator. The modulator adds a fast phase swing at the rise/fall edges,
//! modeled as `φ_p(t) = β · e'(t) / max|e'|`: a transient localized on the
//! edges, zero on the flat top and outside the pulse. Photon pairs inherit
//! twice this phase through the second-harmonic SPDC pump.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::rng;
use crate::{Error, Result};

/// Pump envelope family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeShape {
    /// Flat top with raised-cosine rise/fall of width FWHM/5.
    RaisedCosineFlattop,
    Gaussian,
}

/// Pump pulse train parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrainConfig {
    pub repetition_rate_mhz: f64,
    /// Envelope FWHM, ns.
    pub pulse_duration_ns: f64,
    pub envelope_shape: EnvelopeShape,
    /// Peak amplitude of the edge phase swing, radians.
    pub edge_swing_beta_rad: f64,
    pub pulse_count: u64,
}

/// Lead time between the start of a repetition period and the first nonzero
/// envelope sample, ps. Puts the default 7.5 ns pulse at 0.5-9.5 ns so the
/// flat top spans 2-8 ns.
const PULSE_LEAD_PS: f64 = 500.0;

impl Default for PulseTrainConfig {
    fn default() -> Self {
        PulseTrainConfig {
            repetition_rate_mhz: 4.0,
            pulse_duration_ns: 7.5,
            envelope_shape: EnvelopeShape::RaisedCosineFlattop,
            edge_swing_beta_rad: 0.0,
            pulse_count: 100_000,
        }
    }
}

impl PulseTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.repetition_rate_mhz.is_finite() && self.repetition_rate_mhz > 0.0) {
            return Err(Error::InvalidConfig("repetition_rate_mhz must be positive"));
        }
        if !(self.pulse_duration_ns.is_finite() && self.pulse_duration_ns > 0.0) {
            return Err(Error::InvalidConfig("pulse_duration_ns must be positive"));
        }
        if self.period_ps() <= self.pulse_duration_ns * 1e3 {
            return Err(Error::InvalidConfig(
                "repetition period must exceed the pulse duration",
            ));
        }
        if self.support_end_ps() >= self.period_ps() {
            return Err(Error::InvalidConfig(
                "pulse support does not fit inside the repetition period",
            ));
        }
        if !(self.edge_swing_beta_rad.is_finite() && self.edge_swing_beta_rad >= 0.0) {
            return Err(Error::InvalidConfig("edge_swing_beta_rad must be >= 0"));
        }
        Ok(())
    }

    /// Repetition period, ps.
    pub fn period_ps(&self) -> f64 {
        1e6 / self.repetition_rate_mhz
    }

    /// Envelope FWHM, ps.
    pub fn fwhm_ps(&self) -> f64 {
        self.pulse_duration_ns * 1e3
    }

    /// Width of each raised-cosine ramp, ps.
    pub fn ramp_ps(&self) -> f64 {
        self.fwhm_ps() / 5.0
    }

    /// Pulse center within the repetition period, ps.
    pub fn center_ps(&self) -> f64 {
        PULSE_LEAD_PS + 0.5 * (self.fwhm_ps() + self.ramp_ps())
    }

    /// First instant of nonzero envelope, ps.
    pub fn support_start_ps(&self) -> f64 {
        match self.envelope_shape {
            EnvelopeShape::RaisedCosineFlattop => PULSE_LEAD_PS,
            // Truncate the Gaussian at 3 FWHM from center.
            EnvelopeShape::Gaussian => (self.center_ps() - 3.0 * self.fwhm_ps()).max(0.0),
        }
    }

    /// Last instant of nonzero envelope, ps.
    pub fn support_end_ps(&self) -> f64 {
        match self.envelope_shape {
            EnvelopeShape::RaisedCosineFlattop => {
                PULSE_LEAD_PS + self.fwhm_ps() + self.ramp_ps()
            }
            EnvelopeShape::Gaussian => self.center_ps() + 3.0 * self.fwhm_ps(),
        }
    }
}

/// Pump field amplitude envelope, unit peak, FWHM = `pulse_duration`.
pub fn pump_envelope(t_in_pulse_ps: f64, cfg: &PulseTrainConfig) -> f64 {
    let d = libm::fabs(t_in_pulse_ps - cfg.center_ps());
    match cfg.envelope_shape {
        EnvelopeShape::RaisedCosineFlattop => {
            let w = cfg.ramp_ps();
            let flat = 0.5 * (cfg.fwhm_ps() - w);
            if d <= flat {
                1.0
            } else if d >= flat + w {
                0.0
            } else {
                0.5 * (1.0 + libm::cos(core::f64::consts::PI * (d - flat) / w))
            }
        }
        EnvelopeShape::Gaussian => {
            if t_in_pulse_ps < cfg.support_start_ps() || t_in_pulse_ps > cfg.support_end_ps() {
                0.0
            } else {
                let k = 4.0 * core::f64::consts::LN_2 / (cfg.fwhm_ps() * cfg.fwhm_ps());
                libm::exp(-k * d * d)
            }
        }
    }
}

/// Modulator phase transient, `β · e'(t) / max|e'|`.
pub fn pump_phase(t_in_pulse_ps: f64, cfg: &PulseTrainConfig) -> f64 {
    let beta = cfg.edge_swing_beta_rad;
    if beta == 0.0 {
        return 0.0;
    }
    let t = t_in_pulse_ps;
    let c = cfg.center_ps();
    match cfg.envelope_shape {
        EnvelopeShape::RaisedCosineFlattop => {
            let w = cfg.ramp_ps();
            let flat = 0.5 * (cfg.fwhm_ps() - w);
            let d = libm::fabs(t - c);
            if d <= flat || d >= flat + w {
                0.0
            } else {
                // e' = ±(π/2w)·sin(πs) on the ramps; max|e'| = π/2w.
                let s = (d - flat) / w;
                let mag = libm::sin(core::f64::consts::PI * s);
                if t < c {
                    beta * mag
                } else {
                    -beta * mag
                }
            }
        }
        EnvelopeShape::Gaussian => {
            if t < cfg.support_start_ps() || t > cfg.support_end_ps() {
                return 0.0;
            }
            let k = 4.0 * core::f64::consts::LN_2 / (cfg.fwhm_ps() * cfg.fwhm_ps());
            // e' = -2kΔ·e; |e'| peaks at Δ = 1/sqrt(2k).
            let delta = t - c;
            let e = libm::exp(-k * delta * delta);
            let max_slope = libm::sqrt(2.0 * k) * libm::exp(-0.5);
            beta * (-2.0 * k * delta * e) / max_slope
        }
    }
}

/// Numerical time-derivative of [`pump_phase`], rad/ps (central difference).
pub fn pump_phase_rate(t_in_pulse_ps: f64, cfg: &PulseTrainConfig) -> f64 {
    const H_PS: f64 = 1.0;
    (pump_phase(t_in_pulse_ps + H_PS, cfg) - pump_phase(t_in_pulse_ps - H_PS, cfg)) / (2.0 * H_PS)
}

/// SPDC source parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcConfig {
    pub pump_power_mw: f64,
    /// Generated pairs per mW of average pump power per second.
    pub pair_yield_per_mw_s: f64,
    pub signal_wavelength_nm: f64,
    /// Single-photon coherence time τ₁, ps. Must stay well below the
    /// interferometer delay for the side peaks to be distinguishable.
    pub coherence_time_ps: f64,
}

impl Default for SpdcConfig {
    fn default() -> Self {
        SpdcConfig {
            pump_power_mw: 9.0,
            pair_yield_per_mw_s: 4.0e4,
            signal_wavelength_nm: crate::units::TELECOM_WAVELENGTH_NM,
            coherence_time_ps: 1.0,
        }
    }
}

impl SpdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump_power_mw.is_finite() && self.pump_power_mw >= 0.0) {
            return Err(Error::InvalidConfig("pump_power_mw must be >= 0"));
        }
        if !(self.pair_yield_per_mw_s.is_finite() && self.pair_yield_per_mw_s > 0.0) {
            return Err(Error::InvalidConfig("pair_yield_per_mw_s must be positive"));
        }
        if !(self.signal_wavelength_nm.is_finite() && self.signal_wavelength_nm > 0.0) {
            return Err(Error::InvalidConfig("signal_wavelength_nm must be positive"));
        }
        if !(self.coherence_time_ps.is_finite() && self.coherence_time_ps > 0.0) {
            return Err(Error::InvalidConfig("coherence_time_ps must be positive"));
        }
        Ok(())
    }
}

/// Where a detected photon came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonOrigin {
    Signal,
    Idler,
    Noise,
    Dark,
}

/// One photon in flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonRecord {
    /// Absolute emission time, ps.
    pub emission_time_ps: f64,
    pub wavelength_nm: f64,
    /// Phase carried from the field that created the photon, radians.
    pub phase_rad: f64,
    pub origin: PhotonOrigin,
}

/// A correlated signal/idler pair with its shared sum-phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    /// Absolute emission time, ps. Signal and idler share it.
    pub emission_time_ps: f64,
    pub pulse_index: u64,
    pub signal: PhotonRecord,
    pub idler: PhotonRecord,
    /// Sum of the two photon phases; `2·φ_p(t)` at creation (SH pump),
    /// `6·φ_p(t)` after up-conversion.
    pub sum_phase_rad: f64,
    /// Two-photon coherence time, ns; tracks the pump pulse duration.
    pub sum_coherence_time_ns: f64,
}

impl PairRecord {
    /// Emission time relative to the start of the owning pulse, ps.
    pub fn time_in_pulse_ps(&self, train: &PulseTrainConfig) -> f64 {
        self.emission_time_ps - self.pulse_index as f64 * train.period_ps()
    }
}

/// Mean number of generated pairs per pump pulse,
/// `μ = pair_yield · pump_power / repetition_rate`.
pub fn mean_pairs_per_pulse(cfg: &SpdcConfig, train: &PulseTrainConfig) -> f64 {
    cfg.pair_yield_per_mw_s * cfg.pump_power_mw / (train.repetition_rate_mhz * 1e6)
}

/// Sample an emission time within the pulse with density ∝ envelope²(t).
pub(crate) fn sample_emission_time(
    train: &PulseTrainConfig,
    rng: &mut impl RngCore,
) -> f64 {
    let lo = train.support_start_ps();
    let hi = train.support_end_ps();
    loop {
        let t = lo + (hi - lo) * rng::uniform(rng);
        let e = pump_envelope(t, train);
        if rng::uniform(rng) < e * e {
            return t;
        }
    }
}

/// Sample the photon pairs emitted in one pump pulse.
///
/// The pair count is Poisson with mean [`mean_pairs_per_pulse`]; emission
/// times follow the envelope intensity; both photons are degenerate at the
/// signal wavelength and the pair sum-phase is twice the pump phase at the
/// emission time.
pub fn sample_pairs(
    pulse_index: u64,
    spdc: &SpdcConfig,
    train: &PulseTrainConfig,
    rng: &mut impl RngCore,
) -> Vec<PairRecord> {
    let mu = mean_pairs_per_pulse(spdc, train);
    let n = rng::poisson(rng, mu);
    let mut pairs = Vec::with_capacity(n as usize);
    let pulse_start = pulse_index as f64 * train.period_ps();
    for _ in 0..n {
        let t = sample_emission_time(train, rng);
        let phase = pump_phase(t, train);
        let photon = |origin| PhotonRecord {
            emission_time_ps: pulse_start + t,
            wavelength_nm: spdc.signal_wavelength_nm,
            phase_rad: phase,
            origin,
        };
        pairs.push(PairRecord {
            emission_time_ps: pulse_start + t,
            pulse_index,
            signal: photon(PhotonOrigin::Signal),
            idler: photon(PhotonOrigin::Idler),
            sum_phase_rad: 2.0 * phase,
            sum_coherence_time_ns: train.pulse_duration_ns,
        });
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::pulse_rng;

    fn train() -> PulseTrainConfig {
        PulseTrainConfig::default()
    }

    #[test]
    fn default_config_is_valid() {
        train().validate().unwrap();
        SpdcConfig::default().validate().unwrap();
    }

    #[test]
    fn envelope_peaks_at_one_and_vanishes_outside() {
        let cfg = train();
        assert_eq!(pump_envelope(cfg.center_ps(), &cfg), 1.0);
        assert_eq!(pump_envelope(0.0, &cfg), 0.0);
        assert_eq!(pump_envelope(cfg.period_ps() - 1.0, &cfg), 0.0);
    }

    #[test]
    fn envelope_fwhm_matches_duration() {
        let cfg = train();
        let half = 0.5 * cfg.fwhm_ps();
        for t in [cfg.center_ps() - half, cfg.center_ps() + half] {
            assert!((pump_envelope(t, &cfg) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_intensity_area_close_to_fwhm() {
        // Numeric quadrature oracle: the effective duration ∫e² should sit
        // within 10% of the FWHM for the flattop shape.
        let cfg = train();
        let mut area = 0.0;
        let dt = 0.5;
        let mut t = cfg.support_start_ps();
        while t < cfg.support_end_ps() {
            let e = pump_envelope(t, &cfg);
            area += e * e * dt;
            t += dt;
        }
        let fwhm = cfg.fwhm_ps();
        assert!(
            (area - fwhm).abs() < 0.1 * fwhm,
            "effective duration {area} vs FWHM {fwhm}"
        );
    }

    #[test]
    fn phase_is_zero_on_the_flat_top() {
        let mut cfg = train();
        cfg.edge_swing_beta_rad = 2.0;
        assert_eq!(pump_phase(cfg.center_ps(), &cfg), 0.0);
        assert_eq!(pump_phase(0.0, &cfg), 0.0);
    }

    #[test]
    fn phase_reaches_beta_at_the_steepest_rising_edge() {
        let mut cfg = train();
        cfg.edge_swing_beta_rad = 2.0;
        // Steepest point of the rising ramp: halfway up.
        let t = cfg.support_start_ps() + 0.5 * cfg.ramp_ps();
        assert!((pump_phase(t, &cfg) - 2.0).abs() < 1e-9);
        // Falling edge mirrors to -beta.
        let t = cfg.support_end_ps() - 0.5 * cfg.ramp_ps();
        assert!((pump_phase(t, &cfg) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_phase_is_bounded_by_beta() {
        let cfg = PulseTrainConfig {
            envelope_shape: EnvelopeShape::Gaussian,
            edge_swing_beta_rad: 1.5,
            ..train()
        };
        let mut max = 0.0f64;
        let mut t = cfg.support_start_ps();
        while t < cfg.support_end_ps() {
            max = max.max(pump_phase(t, &cfg).abs());
            t += 1.0;
        }
        assert!(max <= 1.5 + 1e-9);
        assert!(max > 1.49, "normalization should reach beta, got {max}");
    }

    #[test]
    fn mean_pairs_examples() {
        let t = train();
        let mut spdc = SpdcConfig::default();
        assert!((mean_pairs_per_pulse(&spdc, &t) - 0.09).abs() < 1e-12);
        spdc.pump_power_mw = 3.0;
        assert!((mean_pairs_per_pulse(&spdc, &t) - 0.03).abs() < 1e-12);
        spdc.pump_power_mw = 0.0;
        assert_eq!(mean_pairs_per_pulse(&spdc, &t), 0.0);
    }

    #[test]
    fn zero_mean_yields_no_pairs() {
        let t = train();
        let spdc = SpdcConfig { pump_power_mw: 0.0, ..SpdcConfig::default() };
        let mut rng = pulse_rng(9, 0, 0);
        for idx in 0..100 {
            assert!(sample_pairs(idx, &spdc, &t, &mut rng).is_empty());
        }
    }

    #[test]
    fn pair_count_matches_poisson_mean() {
        let t = train();
        let spdc = SpdcConfig::default();
        let pulses = 200_000u64;
        let mut total = 0usize;
        for idx in 0..pulses {
            let mut rng = pulse_rng(3, 0, idx);
            total += sample_pairs(idx, &spdc, &t, &mut rng).len();
        }
        let mean = total as f64 / pulses as f64;
        let tol = 3.0 * (0.09f64 / pulses as f64).sqrt();
        assert!((mean - 0.09).abs() < tol, "sample mean {mean}");
    }

    #[test]
    fn emission_times_follow_envelope_intensity() {
        // Binned χ² goodness-of-fit against envelope² at the 1% level.
        let t = train();
        let spdc = SpdcConfig { pump_power_mw: 90.0, ..SpdcConfig::default() };
        let bins = 40usize;
        let lo = t.support_start_ps();
        let hi = t.support_end_ps();
        let width = (hi - lo) / bins as f64;

        let mut observed = vec![0u64; bins];
        for idx in 0..40_000u64 {
            let mut rng = pulse_rng(4, 0, idx);
            for pair in sample_pairs(idx, &spdc, &t, &mut rng) {
                let tp = pair.time_in_pulse_ps(&t);
                let b = (((tp - lo) / width) as usize).min(bins - 1);
                observed[b] += 1;
            }
        }
        let total: u64 = observed.iter().sum();
        assert!(total > 30_000, "need statistics, got {total}");

        // Expected weights from fine quadrature of envelope².
        let mut weights = vec![0.0f64; bins];
        let steps_per_bin = 200;
        for (b, wslot) in weights.iter_mut().enumerate() {
            let mut acc = 0.0;
            for s in 0..steps_per_bin {
                let tt = lo + (b as f64 + (s as f64 + 0.5) / steps_per_bin as f64) * width;
                let e = pump_envelope(tt, &t);
                acc += e * e;
            }
            *wslot = acc;
        }
        let wsum: f64 = weights.iter().sum();

        let mut chi2 = 0.0;
        for b in 0..bins {
            let expected = total as f64 * weights[b] / wsum;
            if expected > 0.0 {
                let d = observed[b] as f64 - expected;
                chi2 += d * d / expected;
            }
        }
        // χ² critical value at 1% for 39 degrees of freedom.
        assert!(chi2 < 62.43, "chi2 = {chi2}");
    }

    #[test]
    fn pairs_never_fall_outside_the_envelope_support() {
        let t = train();
        let spdc = SpdcConfig { pump_power_mw: 90.0, ..SpdcConfig::default() };
        for idx in 0..5_000u64 {
            let mut rng = pulse_rng(5, 0, idx);
            for pair in sample_pairs(idx, &spdc, &t, &mut rng) {
                let tp = pair.time_in_pulse_ps(&t);
                assert!(pump_envelope(tp, &t) > 0.0, "pair at dead time {tp}");
                assert_eq!(pair.signal.emission_time_ps, pair.idler.emission_time_ps);
            }
        }
    }

    #[test]
    fn sum_phase_doubles_the_pump_phase() {
        let mut t = train();
        t.edge_swing_beta_rad = 1.3;
        let spdc = SpdcConfig { pump_power_mw: 900.0, ..SpdcConfig::default() };
        let mut rng = pulse_rng(6, 0, 0);
        let pairs = sample_pairs(0, &spdc, &t, &mut rng);
        assert!(!pairs.is_empty());
        for pair in pairs {
            let expect = 2.0 * pump_phase(pair.time_in_pulse_ps(&t), &t);
            assert!((pair.sum_phase_rad - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_seed_reproduces_pairs_exactly() {
        let t = train();
        let spdc = SpdcConfig::default();
        let run = || -> Vec<PairRecord> {
            (0..2_000u64)
                .flat_map(|idx| {
                    let mut rng = pulse_rng(7, 3, idx);
                    sample_pairs(idx, &spdc, &t, &mut rng)
                })
                .collect()
        };
        assert_eq!(run(), run());
    }
}
