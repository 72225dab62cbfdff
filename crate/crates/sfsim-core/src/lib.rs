//! Simulation kernel for sum-frequency interference of up-converted photon
//! pairs in a folded Franson (asymmetric Michelson) interferometer.
//!
//! The crate is split along the physical signal chain: a pulsed pump source
//! generating photon pairs ([`source`]), frequency up-conversion of those
//! pairs ([`upconversion`]), the interferometer transfer ([`interferometer`]),
//! detector and time-interval-analyzer emulation ([`detection`]) and the
//! downstream estimators ([`analysis`]). [`pipeline`] wires the stages into
//! reproducible, seedable end-to-end runs with both a Monte-Carlo and a
//! closed-form analytic engine.
//!
//! Everything here is `no_std` + `alloc`; file formats, CLI and threading
//! live in the companion `sfsim` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod analysis;
pub mod detection;
pub mod interferometer;
pub mod pipeline;
pub mod rng;
pub mod source;
pub mod units;
pub mod upconversion;

use core::fmt;

/// Errors raised by kernel operations when a contract is violated.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric input was NaN or infinite.
    NonFinite(&'static str),
    /// A wavelength was zero or negative.
    NonPositiveWavelength(f64),
    /// Phase harmonic order outside the supported set {1, 2, 3, 6}.
    InvalidHarmonicOrder(u32),
    /// A configuration invariant failed; the message names the field.
    InvalidConfig(&'static str),
    /// A photon reached a stage tuned for a different wavelength.
    WavelengthMismatch { expected_nm: f64, actual_nm: f64 },
    /// Tag streams handed to `correlate` must be sorted per detector.
    UnsortedTags,
    /// Two profiles were not sampled on the same time grid.
    GridMismatch,
    /// A fringe scan carried no modulation to fit.
    DegenerateScan(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite(what) => write!(f, "non-finite value for {what}"),
            Error::NonPositiveWavelength(v) => {
                write!(f, "wavelength must be positive, got {v} nm")
            }
            Error::InvalidHarmonicOrder(m) => {
                write!(f, "harmonic order {m} not in {{1, 2, 3, 6}}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::WavelengthMismatch { expected_nm, actual_nm } => write!(
                f,
                "photon at {actual_nm} nm fed to a stage expecting {expected_nm} nm"
            ),
            Error::UnsortedTags => write!(f, "tag stream is not time-sorted"),
            Error::GridMismatch => write!(f, "profiles are not on a common time grid"),
            Error::DegenerateScan(msg) => write!(f, "degenerate fringe scan: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
