//! Folded Franson (asymmetric Michelson) transfer.
//!
//! Closed-form classical fringe, closed-form two-photon outcome
//! distribution, and Monte-Carlo routing of pairs to output arrival times.
//!
//! The two-photon amplitudes that interfere are "both photons short" and
//! "both photons long"; they oscillate at the pair sum frequency, giving a
//! fringe period of 1550/6 nm. The mixed short/long amplitudes are
//! time-distinguishable (the single-photon coherence time is far below the
//! arm delay) and contribute the flat side peaks at ±ΔL/c.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::rng;
use crate::source::{pump_phase_rate, PairRecord, PhotonRecord, PulseTrainConfig};
use crate::units::{
    fringe_phase, sum_frequency_wavelength, time_delay, Length, PhaseModel,
    PUMP_WAVELENGTH_NM, TELECOM_WAVELENGTH_NM,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    /// Total optical path-length difference, nm (base offset plus any scan
    /// displacement).
    pub delta_l_nm: f64,
    /// Residual visibility factor from imperfect spatial mode overlap.
    pub mode_overlap_visibility: f64,
    /// Beam-splitter power splitting ratio.
    pub splitting_ratio: f64,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        InterferometerConfig {
            delta_l_nm: 36.0e6,
            mode_overlap_visibility: 1.0,
            splitting_ratio: 0.5,
        }
    }
}

impl InterferometerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.delta_l_nm.is_finite() {
            return Err(Error::InvalidConfig("delta_l_nm must be finite"));
        }
        if !(0.0..=1.0).contains(&self.mode_overlap_visibility) {
            return Err(Error::InvalidConfig("mode_overlap_visibility must be in [0, 1]"));
        }
        if !(self.splitting_ratio > 0.0 && self.splitting_ratio < 1.0) {
            return Err(Error::InvalidConfig("splitting_ratio must be in (0, 1)"));
        }
        Ok(())
    }

    /// Arm arrival-time delay `ΔL/c`, ps.
    pub fn delay_ps(&self) -> f64 {
        time_delay(Length::from_nm(self.delta_l_nm)).map(|t| t.ps()).unwrap_or(f64::NAN)
    }

    /// Whether the side peaks are time-distinguishable from the central one
    /// for the given single-photon coherence time. The side/central
    /// separation argument requires `τ₁ ≪ |Δτ_L|`.
    pub fn resolves_side_peaks(&self, coherence_time_ps: f64) -> bool {
        coherence_time_ps * 10.0 <= libm::fabs(self.delay_ps())
    }

    /// Per-arm single-photon exit probability toward the detection port,
    /// `s(1-s)` (one reflection plus one transmission).
    fn arm_exit_probability(&self) -> f64 {
        self.splitting_ratio * (1.0 - self.splitting_ratio)
    }
}

/// Wavelength the interferometer and detectors are aligned for, nm.
pub fn design_wavelength_nm() -> f64 {
    sum_frequency_wavelength(
        Length::from_nm(TELECOM_WAVELENGTH_NM),
        Length::from_nm(PUMP_WAVELENGTH_NM),
    )
    .map(Length::nm)
    .unwrap_or(f64::NAN)
}

/// Interferometer phase of the classical up-converted beam at the given
/// path difference, including the edge-chirp dephasing term.
fn classical_phase(delta_l_nm: f64, t_in_pulse_ps: f64, train: &PulseTrainConfig) -> f64 {
    let delta_l = Length::from_nm(delta_l_nm);
    let base = fringe_phase(delta_l, Length::from_nm(TELECOM_WAVELENGTH_NM), PhaseModel::CLASSICAL)
        .unwrap_or(f64::NAN);
    let delay = time_delay(delta_l).map(|t| t.ps()).unwrap_or(f64::NAN);
    base + 3.0 * delay * pump_phase_rate(t_in_pulse_ps, train)
}

/// Sum-frequency phase of the two-photon SS/LL interference, including the
/// edge-chirp dephasing term.
fn pair_sum_phase(delta_l_nm: f64, t_in_pulse_ps: f64, train: &PulseTrainConfig) -> f64 {
    let delta_l = Length::from_nm(delta_l_nm);
    let base = fringe_phase(delta_l, Length::from_nm(TELECOM_WAVELENGTH_NM), PhaseModel::PAIR_SUM)
        .unwrap_or(f64::NAN);
    let delay = time_delay(delta_l).map(|t| t.ps()).unwrap_or(f64::NAN);
    base + 6.0 * delay * pump_phase_rate(t_in_pulse_ps, train)
}

/// Classical interference intensity of the up-converted beam,
/// `I(t) ∝ e(t)² · [1 + V·cos(φ₃ + 3·Δτ_L·φ̇_p(t))]`.
pub fn classical_intensity(
    delta_l_nm: f64,
    t_in_pulse_ps: f64,
    train: &PulseTrainConfig,
    ifm: &InterferometerConfig,
) -> f64 {
    let e = crate::source::pump_envelope(t_in_pulse_ps, train);
    if e == 0.0 {
        return 0.0;
    }
    let v = ifm.mode_overlap_visibility;
    e * e * (1.0 + v * libm::cos(classical_phase(delta_l_nm, t_in_pulse_ps, train)))
}

/// Joint outcome probabilities for one up-converted pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcomeDistribution {
    /// Both photons took the same arm: coincidence at Δτ = 0.
    pub p_central: f64,
    /// Signal short, idler long: coincidence at Δτ = +ΔL/c.
    pub p_side_plus: f64,
    /// Signal long, idler short.
    pub p_side_minus: f64,
    /// Not both photons reached the detection port.
    pub p_undetected: f64,
}

impl PairOutcomeDistribution {
    pub fn sum(&self) -> f64 {
        self.p_central + self.p_side_plus + self.p_side_minus + self.p_undetected
    }
}

/// Closed-form outcome distribution for an up-converted pair.
///
/// With per-arm exit probability `q = s(1-s)`:
/// `p_central = 2q²·[1 + V·cos(φ₆ + 6·Δτ_L·φ̇_p(t))]`, each side peak `q²`.
pub fn pair_outcome_distribution(
    pair: &PairRecord,
    ifm: &InterferometerConfig,
    train: &PulseTrainConfig,
) -> Result<PairOutcomeDistribution> {
    let expected = design_wavelength_nm();
    for photon in [&pair.signal, &pair.idler] {
        if libm::fabs(photon.wavelength_nm - expected) > 0.1 {
            return Err(Error::WavelengthMismatch {
                expected_nm: expected,
                actual_nm: photon.wavelength_nm,
            });
        }
    }
    let q = ifm.arm_exit_probability();
    let v = ifm.mode_overlap_visibility;
    let phi = pair_sum_phase(ifm.delta_l_nm, pair.time_in_pulse_ps(train), train);
    let p_central = 2.0 * q * q * (1.0 + v * libm::cos(phi));
    let p_side = q * q;
    Ok(PairOutcomeDistribution {
        p_central,
        p_side_plus: p_side,
        p_side_minus: p_side,
        p_undetected: 1.0 - p_central - 2.0 * p_side,
    })
}

/// One photon leaving the detection port at an absolute arrival time.
pub type RoutedPhoton = (PhotonRecord, f64);

/// Monte-Carlo routing of a pair to output arrival times.
///
/// Central events put both photons at the emission time; side events offset
/// one photon by ±ΔL/c. The `p_undetected` remainder is subdivided so that
/// each photon's detection-port marginal stays `2q` independent of ΔL:
/// either photon can still exit alone while its partner returns toward the
/// source.
pub fn route_pair(
    pair: &PairRecord,
    ifm: &InterferometerConfig,
    train: &PulseTrainConfig,
    rng: &mut impl RngCore,
) -> Result<Vec<RoutedPhoton>> {
    let dist = pair_outcome_distribution(pair, ifm, train)?;
    let q = ifm.arm_exit_probability();
    let delay = ifm.delay_ps();
    let t = pair.emission_time_ps;

    // Joint both-exit probability plus the single-exit remainders.
    let p_both = dist.p_central + dist.p_side_plus + dist.p_side_minus;
    let p_signal_only = 2.0 * q - p_both;
    let p_idler_only = p_signal_only;

    let mut u = rng::uniform(rng);
    let mut out = Vec::new();
    if u < dist.p_central {
        out.push((pair.signal, t));
        out.push((pair.idler, t));
        return Ok(out);
    }
    u -= dist.p_central;
    if u < dist.p_side_plus {
        out.push((pair.signal, t));
        out.push((pair.idler, t + delay));
        return Ok(out);
    }
    u -= dist.p_side_plus;
    if u < dist.p_side_minus {
        out.push((pair.signal, t + delay));
        out.push((pair.idler, t));
        return Ok(out);
    }
    u -= dist.p_side_minus;
    if u < p_signal_only {
        let arm = if rng::bernoulli(rng, 0.5) { t } else { t + delay };
        out.push((pair.signal, arm));
        return Ok(out);
    }
    u -= p_signal_only;
    if u < p_idler_only {
        let arm = if rng::bernoulli(rng, 0.5) { t } else { t + delay };
        out.push((pair.idler, arm));
        return Ok(out);
    }
    Ok(out)
}

/// Route an incoherent single photon (broken pair, noise). No single-photon
/// interference: each arm passes it toward the port with probability
/// `q = s(1-s)`.
pub fn route_single(
    photon: &PhotonRecord,
    ifm: &InterferometerConfig,
    rng: &mut impl RngCore,
) -> Option<RoutedPhoton> {
    let q = ifm.arm_exit_probability();
    let u = rng::uniform(rng);
    if u < q {
        Some((*photon, photon.emission_time_ps))
    } else if u < 2.0 * q {
        Some((*photon, photon.emission_time_ps + ifm.delay_ps()))
    } else {
        None
    }
}
