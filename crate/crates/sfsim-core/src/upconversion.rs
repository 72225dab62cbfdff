//! Quantum frequency up-conversion of the 1550 nm pairs to 516.7 nm.
//!
//! Each photon converts independently with the configured internal
//! efficiency. Unconverted telecom photons are dropped: the dichroic optics
//! and visible-band APDs downstream never see them. A converted photon gains
//! the second-harmonic pump phase `2·φ_p(t)`, so a fully converted pair ends
//! up with sum-phase `6·φ_p(t)`.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::rng;
use crate::source::{
    pump_phase, sample_emission_time, PairRecord, PhotonOrigin, PhotonRecord, PulseTrainConfig,
};
use crate::units::{sum_frequency_wavelength, Length};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UpconversionConfig {
    /// Per-photon conversion probability.
    pub internal_efficiency: f64,
    /// Mean up-conversion noise photons per pulse.
    pub noise_rate_per_pulse: f64,
    /// SH pump wavelength, nm.
    pub pump_wavelength_nm: f64,
    /// Wavelength the converter is tuned for, nm.
    pub input_wavelength_nm: f64,
}

impl Default for UpconversionConfig {
    fn default() -> Self {
        UpconversionConfig {
            internal_efficiency: 0.96,
            noise_rate_per_pulse: 0.02,
            pump_wavelength_nm: crate::units::PUMP_WAVELENGTH_NM,
            input_wavelength_nm: crate::units::TELECOM_WAVELENGTH_NM,
        }
    }
}

impl UpconversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.internal_efficiency) {
            return Err(Error::InvalidConfig("internal_efficiency must be in [0, 1]"));
        }
        if !(self.noise_rate_per_pulse.is_finite() && self.noise_rate_per_pulse >= 0.0) {
            return Err(Error::InvalidConfig("noise_rate_per_pulse must be >= 0"));
        }
        if !(self.pump_wavelength_nm.is_finite() && self.pump_wavelength_nm > 0.0) {
            return Err(Error::InvalidConfig("pump_wavelength_nm must be positive"));
        }
        if !(self.input_wavelength_nm.is_finite() && self.input_wavelength_nm > 0.0) {
            return Err(Error::InvalidConfig("input_wavelength_nm must be positive"));
        }
        Ok(())
    }

    /// Wavelength of a converted photon, nm.
    pub fn output_wavelength_nm(&self) -> f64 {
        sum_frequency_wavelength(
            Length::from_nm(self.input_wavelength_nm),
            Length::from_nm(self.pump_wavelength_nm),
        )
        .map(Length::nm)
        .unwrap_or(f64::NAN)
    }
}

/// Result of feeding one pair through the converter.
#[derive(Debug, Clone, PartialEq)]
pub enum UpconvertOutcome {
    /// Both photons converted; the pair survives with updated wavelengths
    /// and sum-phase.
    Pair(PairRecord),
    /// Exactly one photon converted; its partner is lost and the survivor
    /// continues as an incoherent single.
    BrokenSingle(PhotonRecord),
    /// Neither photon converted.
    Lost,
}

/// Convert one pair. Errors if the pair is not at the converter's design
/// wavelength.
pub fn upconvert_pair(
    pair: &PairRecord,
    cfg: &UpconversionConfig,
    train: &PulseTrainConfig,
    rng: &mut impl RngCore,
) -> Result<UpconvertOutcome> {
    for photon in [&pair.signal, &pair.idler] {
        if libm::fabs(photon.wavelength_nm - cfg.input_wavelength_nm) > 1e-6 {
            return Err(Error::WavelengthMismatch {
                expected_nm: cfg.input_wavelength_nm,
                actual_nm: photon.wavelength_nm,
            });
        }
    }
    let signal_converts = rng::bernoulli(rng, cfg.internal_efficiency);
    let idler_converts = rng::bernoulli(rng, cfg.internal_efficiency);
    let out_nm = cfg.output_wavelength_nm();
    let t_in_pulse = pair.time_in_pulse_ps(train);
    let sh_phase = 2.0 * pump_phase(t_in_pulse, train);

    let convert = |photon: &PhotonRecord| PhotonRecord {
        wavelength_nm: out_nm,
        phase_rad: photon.phase_rad + sh_phase,
        ..*photon
    };

    Ok(match (signal_converts, idler_converts) {
        (true, true) => UpconvertOutcome::Pair(PairRecord {
            signal: convert(&pair.signal),
            idler: convert(&pair.idler),
            // Each photon gains 2·φ_p from the SH pump: 2·φ_p + 2·(2·φ_p).
            sum_phase_rad: pair.sum_phase_rad + 2.0 * sh_phase,
            ..pair.clone()
        }),
        (true, false) => UpconvertOutcome::BrokenSingle(convert(&pair.signal)),
        (false, true) => UpconvertOutcome::BrokenSingle(convert(&pair.idler)),
        (false, false) => UpconvertOutcome::Lost,
    })
}

/// Incoherent noise photons generated by the converter in one pulse:
/// Poisson count, envelope-following emission times, uniform random phase.
pub fn sample_noise_photons(
    cfg: &UpconversionConfig,
    pulse_index: u64,
    train: &PulseTrainConfig,
    rng: &mut impl RngCore,
) -> Vec<PhotonRecord> {
    let n = rng::poisson(rng, cfg.noise_rate_per_pulse);
    let mut photons = Vec::with_capacity(n as usize);
    let pulse_start = pulse_index as f64 * train.period_ps();
    let out_nm = cfg.output_wavelength_nm();
    for _ in 0..n {
        let t = sample_emission_time(train, rng);
        photons.push(PhotonRecord {
            emission_time_ps: pulse_start + t,
            wavelength_nm: out_nm,
            phase_rad: 2.0 * core::f64::consts::PI * rng::uniform(rng),
            origin: PhotonOrigin::Noise,
        });
    }
    photons
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::pulse_rng;
    use crate::source::{sample_pairs, SpdcConfig};

    fn one_pair(seed: u64) -> (PairRecord, PulseTrainConfig) {
        let train = PulseTrainConfig::default();
        let spdc = SpdcConfig { pump_power_mw: 4000.0, ..SpdcConfig::default() };
        let mut rng = pulse_rng(seed, 0, 0);
        let pair = sample_pairs(0, &spdc, &train, &mut rng).remove(0);
        (pair, train)
    }

    #[test]
    fn unit_efficiency_always_converts_both() {
        let (pair, train) = one_pair(11);
        let cfg = UpconversionConfig { internal_efficiency: 1.0, ..Default::default() };
        let mut rng = pulse_rng(11, 1, 0);
        for _ in 0..50 {
            match upconvert_pair(&pair, &cfg, &train, &mut rng).unwrap() {
                UpconvertOutcome::Pair(p) => {
                    assert!((p.signal.wavelength_nm - 516.6667).abs() < 1e-3);
                    assert!((p.idler.wavelength_nm - 516.6667).abs() < 1e-3);
                }
                other => panic!("expected converted pair, got {other:?}"),
            }
        }
    }

    #[test]
    fn survival_fractions_follow_the_binomial_law() {
        let (pair, train) = one_pair(12);
        let cfg = UpconversionConfig::default();
        let trials = 100_000u32;
        let (mut both, mut single) = (0u32, 0u32);
        let mut rng = pulse_rng(12, 1, 0);
        for _ in 0..trials {
            match upconvert_pair(&pair, &cfg, &train, &mut rng).unwrap() {
                UpconvertOutcome::Pair(_) => both += 1,
                UpconvertOutcome::BrokenSingle(_) => single += 1,
                UpconvertOutcome::Lost => {}
            }
        }
        let n = trials as f64;
        let p_both = 0.96f64 * 0.96;
        let p_single = 2.0 * 0.96 * 0.04;
        let tol_both = 3.0 * (p_both * (1.0 - p_both) / n).sqrt();
        let tol_single = 3.0 * (p_single * (1.0 - p_single) / n).sqrt();
        assert!((both as f64 / n - p_both).abs() < tol_both);
        assert!((single as f64 / n - p_single).abs() < tol_single);
    }

    #[test]
    fn sum_phase_becomes_six_times_the_pump_phase() {
        let mut train = PulseTrainConfig::default();
        train.edge_swing_beta_rad = 0.8;
        let spdc = SpdcConfig { pump_power_mw: 4000.0, ..SpdcConfig::default() };
        let cfg = UpconversionConfig { internal_efficiency: 1.0, ..Default::default() };
        let mut rng = pulse_rng(13, 0, 0);
        let pairs = sample_pairs(0, &spdc, &train, &mut rng);
        assert!(!pairs.is_empty());
        for pair in pairs {
            match upconvert_pair(&pair, &cfg, &train, &mut rng).unwrap() {
                UpconvertOutcome::Pair(p) => {
                    let phi = pump_phase(p.time_in_pulse_ps(&train), &train);
                    assert!(
                        (p.sum_phase_rad - 6.0 * phi).abs() < 1e-12,
                        "sum phase {} vs 6·φ_p {}",
                        p.sum_phase_rad,
                        6.0 * phi
                    );
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn flat_top_pair_has_zero_sum_phase() {
        let mut train = PulseTrainConfig::default();
        train.edge_swing_beta_rad = 0.8;
        let mut pair = one_pair(14).0;
        // Force emission onto the flat top.
        pair.emission_time_ps = train.center_ps();
        pair.signal.emission_time_ps = pair.emission_time_ps;
        pair.idler.emission_time_ps = pair.emission_time_ps;
        pair.sum_phase_rad = 0.0;
        let cfg = UpconversionConfig { internal_efficiency: 1.0, ..Default::default() };
        let mut rng = pulse_rng(14, 1, 0);
        match upconvert_pair(&pair, &cfg, &train, &mut rng).unwrap() {
            UpconvertOutcome::Pair(p) => assert_eq!(p.sum_phase_rad, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_wavelength_is_a_config_error() {
        let (mut pair, train) = one_pair(15);
        pair.signal.wavelength_nm = 516.7;
        let cfg = UpconversionConfig::default();
        let mut rng = pulse_rng(15, 1, 0);
        assert!(matches!(
            upconvert_pair(&pair, &cfg, &train, &mut rng),
            Err(Error::WavelengthMismatch { .. })
        ));
    }

    #[test]
    fn zero_noise_rate_gives_no_photons() {
        let train = PulseTrainConfig::default();
        let cfg = UpconversionConfig { noise_rate_per_pulse: 0.0, ..Default::default() };
        let mut rng = pulse_rng(16, 0, 0);
        for idx in 0..100 {
            assert!(sample_noise_photons(&cfg, idx, &train, &mut rng).is_empty());
        }
    }

    #[test]
    fn noise_rate_mean_matches() {
        let train = PulseTrainConfig::default();
        let cfg = UpconversionConfig { noise_rate_per_pulse: 0.01, ..Default::default() };
        let pulses = 300_000u64;
        let mut total = 0usize;
        for idx in 0..pulses {
            let mut rng = pulse_rng(17, 0, idx);
            total += sample_noise_photons(&cfg, idx, &train, &mut rng).len();
        }
        let mean = total as f64 / pulses as f64;
        let tol = 3.0 * (0.01f64 / pulses as f64).sqrt();
        assert!((mean - 0.01).abs() < tol, "noise mean {mean}");
    }
}
