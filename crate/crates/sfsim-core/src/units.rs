//! Shared physical constants, unit conventions and closed-form kernels.
//!
//! Conventions used throughout the crate: lengths are real nanometers,
//! timestamps and intervals are picoseconds (integer ps once a detector tag
//! exists), phases are radians. `c` is the exact SI value; path-length
//! differences are optical path lengths, so no refractive-index correction
//! is applied anywhere.

use crate::{Error, Result};

/// Exact SI speed of light expressed in the crate's units (nm per ps).
pub const SPEED_OF_LIGHT_NM_PER_PS: f64 = 299_792.458;

/// Wavelength of the original telecom-band photons, nm.
pub const TELECOM_WAVELENGTH_NM: f64 = 1550.0;

/// Second-harmonic pump wavelength, nm.
pub const PUMP_WAVELENGTH_NM: f64 = 775.0;

/// A length in nanometers. Path-length differences may carry either sign;
/// wavelengths must be strictly positive where an operation requires one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Length(f64);

impl Length {
    pub const fn from_nm(nm: f64) -> Self {
        Length(nm)
    }

    pub const fn from_mm(mm: f64) -> Self {
        Length(mm * 1e6)
    }

    pub const fn nm(self) -> f64 {
        self.0
    }
}

/// A time interval in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimeInterval(f64);

impl TimeInterval {
    pub const fn from_ps(ps: f64) -> Self {
        TimeInterval(ps)
    }

    pub const fn from_ns(ns: f64) -> Self {
        TimeInterval(ns * 1e3)
    }

    pub const fn ps(self) -> f64 {
        self.0
    }
}

/// Phase multiplier relative to the 1550 nm pump field.
///
/// `m = 3` describes the up-converted classical beam, `m = 6` the pair
/// sum-phase; `1` and `2` cover the raw telecom field and its second
/// harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseModel {
    harmonic_order: u32,
}

impl PhaseModel {
    pub fn new(harmonic_order: u32) -> Result<Self> {
        match harmonic_order {
            1 | 2 | 3 | 6 => Ok(PhaseModel { harmonic_order }),
            other => Err(Error::InvalidHarmonicOrder(other)),
        }
    }

    /// Classical up-converted beam (telecom + SH pump).
    pub const CLASSICAL: PhaseModel = PhaseModel { harmonic_order: 3 };

    /// Up-converted pair sum-phase.
    pub const PAIR_SUM: PhaseModel = PhaseModel { harmonic_order: 6 };

    pub const fn harmonic_order(self) -> u32 {
        self.harmonic_order
    }

    /// Fringe period implied by this model for the given base wavelength.
    pub fn fringe_period(self, base_wavelength: Length) -> f64 {
        base_wavelength.nm() / self.harmonic_order as f64
    }
}

/// Arrival-time difference produced by an optical path-length difference,
/// `ΔL / c`. Sign is preserved.
pub fn time_delay(delta_l: Length) -> Result<TimeInterval> {
    if !delta_l.nm().is_finite() {
        return Err(Error::NonFinite("path-length difference"));
    }
    Ok(TimeInterval::from_ps(delta_l.nm() / SPEED_OF_LIGHT_NM_PER_PS))
}

/// Output wavelength of sum-frequency generation, `1/(1/λa + 1/λb)`.
pub fn sum_frequency_wavelength(lambda_a: Length, lambda_b: Length) -> Result<Length> {
    for lambda in [lambda_a, lambda_b] {
        if !lambda.nm().is_finite() {
            return Err(Error::NonFinite("wavelength"));
        }
        if lambda.nm() <= 0.0 {
            return Err(Error::NonPositiveWavelength(lambda.nm()));
        }
    }
    Ok(Length::from_nm(1.0 / (1.0 / lambda_a.nm() + 1.0 / lambda_b.nm())))
}

/// Interferometer phase `m · 2π · ΔL / λ_base` accumulated by a field of
/// harmonic order `m` over a path-length difference `ΔL`.
pub fn fringe_phase(delta_l: Length, base_wavelength: Length, model: PhaseModel) -> Result<f64> {
    if !delta_l.nm().is_finite() {
        return Err(Error::NonFinite("path-length difference"));
    }
    if !base_wavelength.nm().is_finite() {
        return Err(Error::NonFinite("wavelength"));
    }
    if base_wavelength.nm() <= 0.0 {
        return Err(Error::NonPositiveWavelength(base_wavelength.nm()));
    }
    let m = model.harmonic_order() as f64;
    Ok(m * 2.0 * core::f64::consts::PI * delta_l.nm() / base_wavelength.nm())
}
