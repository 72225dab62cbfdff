//! APD and time-interval-analyzer emulation.
//!
//! Photons leaving the interferometer are split 50/50 onto two fiber-coupled
//! APDs. Each detection survives with the quantum efficiency, is smeared by
//! Gaussian timing jitter (the quoted 50 ps is a FWHM), and is suppressed if
//! it lands within the dead time of the same detector's previous accepted
//! tag. The analyzer bins start-stop differences at 25 ps.

use alloc::{vec, vec::Vec};
use rand_core::RngCore;

use crate::rng;
use crate::{Error, Result};

/// FWHM of a Gaussian in units of its σ, `2·sqrt(2·ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, PartialEq)]
pub struct ApdConfig {
    pub quantum_efficiency: f64,
    pub jitter_fwhm_ps: f64,
    pub dead_time_ns: f64,
    pub dark_rate_per_s: f64,
}

impl Default for ApdConfig {
    fn default() -> Self {
        ApdConfig {
            // Free parameter; chosen so the end-to-end selected coincidence
            // rate lands near 2000/s at the 9 mW operating point.
            quantum_efficiency: 0.26,
            jitter_fwhm_ps: 50.0,
            dead_time_ns: 50.0,
            dark_rate_per_s: 100.0,
        }
    }
}

impl ApdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return Err(Error::InvalidConfig("quantum_efficiency must be in [0, 1]"));
        }
        if !(self.jitter_fwhm_ps.is_finite() && self.jitter_fwhm_ps >= 0.0) {
            return Err(Error::InvalidConfig("jitter_fwhm_ps must be >= 0"));
        }
        if !(self.dead_time_ns.is_finite() && self.dead_time_ns >= 0.0) {
            return Err(Error::InvalidConfig("dead_time_ns must be >= 0"));
        }
        if !(self.dark_rate_per_s.is_finite() && self.dark_rate_per_s >= 0.0) {
            return Err(Error::InvalidConfig("dark_rate_per_s must be >= 0"));
        }
        Ok(())
    }

    pub fn jitter_sigma_ps(&self) -> f64 {
        self.jitter_fwhm_ps / FWHM_PER_SIGMA
    }

    pub fn dead_time_ps(&self) -> i64 {
        (self.dead_time_ns * 1e3) as i64
    }
}

/// One detector click: detector id (1 or 2) and timestamp in integer ps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimeTag {
    pub time_ps: i64,
    pub detector: u8,
}

/// Detect one arriving photon: 50/50 fan-out onto the two APDs, survival
/// with the quantum efficiency, Gaussian time smearing.
///
/// Dead-time suppression is a stream property and is applied separately by
/// [`apply_dead_time`] after the tags of all pulses are merged in time
/// order, so batches of pulses can be simulated independently.
pub fn detect(arrival_ps: f64, apd: &ApdConfig, rng: &mut impl RngCore) -> Option<TimeTag> {
    let detector = if rng::bernoulli(rng, 0.5) { 1u8 } else { 2u8 };
    if !rng::bernoulli(rng, apd.quantum_efficiency) {
        return None;
    }
    let smeared = arrival_ps + apd.jitter_sigma_ps() * rng::standard_normal(rng);
    Some(TimeTag { time_ps: libm::round(smeared) as i64, detector })
}

/// Drop every tag that falls within the dead time of the same detector's
/// previous accepted tag. Input must be sorted by time; the first tag of
/// each detector always survives.
pub fn apply_dead_time(tags: &[TimeTag], apd: &ApdConfig) -> Result<Vec<TimeTag>> {
    if tags.windows(2).any(|w| w[0].time_ps > w[1].time_ps) {
        return Err(Error::UnsortedTags);
    }
    let dead = apd.dead_time_ps();
    if dead == 0 {
        return Ok(tags.to_vec());
    }
    let mut last: [Option<i64>; 2] = [None, None];
    let mut out = Vec::with_capacity(tags.len());
    for &tag in tags {
        let slot = (tag.detector - 1) as usize;
        match last[slot] {
            Some(prev) if tag.time_ps - prev < dead => {}
            _ => {
                last[slot] = Some(tag.time_ps);
                out.push(tag);
            }
        }
    }
    Ok(out)
}

/// Homogeneous Poisson dark counts on both detectors over `[start, end)` ps.
pub fn generate_dark_counts(
    apd: &ApdConfig,
    start_ps: f64,
    end_ps: f64,
    rng: &mut impl RngCore,
) -> Vec<TimeTag> {
    let rate_per_ps = apd.dark_rate_per_s * 1e-12;
    let mut out = Vec::new();
    if rate_per_ps <= 0.0 || end_ps <= start_ps {
        return out;
    }
    for detector in [1u8, 2u8] {
        let mut t = start_ps;
        loop {
            t += rng::exponential(rng, rate_per_ps);
            if t >= end_ps {
                break;
            }
            out.push(TimeTag { time_ps: libm::round(t) as i64, detector });
        }
    }
    out
}

/// Binned start-stop time differences.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    pub bin_width_ps: i64,
    /// Left edge of the first bin, ps.
    pub origin_ps: f64,
    pub counts: Vec<u64>,
}

impl CorrelationHistogram {
    pub fn bin_center_ps(&self, index: usize) -> f64 {
        self.origin_ps + (index as f64 + 0.5) * self.bin_width_ps as f64
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn assert_sorted(times: &[i64]) -> Result<()> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedTags);
    }
    Ok(())
}

/// Histogram Δτ = t₂ − t₁ over every cross-detector tag pair with
/// |Δτ| ≤ `window_span_ps`, binned at `bin_width_ps` with bin centers on
/// multiples of the bin width.
pub fn correlate(
    detector1: &[i64],
    detector2: &[i64],
    window_span_ps: i64,
    bin_width_ps: i64,
) -> Result<CorrelationHistogram> {
    if bin_width_ps <= 0 || window_span_ps <= 0 {
        return Err(Error::InvalidConfig("window span and bin width must be positive"));
    }
    assert_sorted(detector1)?;
    assert_sorted(detector2)?;

    let half_bins = window_span_ps / bin_width_ps;
    let n_bins = (2 * half_bins + 1) as usize;
    let mut counts = vec![0u64; n_bins];

    let mut lo = 0usize;
    for &t1 in detector1 {
        while lo < detector2.len() && detector2[lo] < t1 - window_span_ps {
            lo += 1;
        }
        for &t2 in &detector2[lo..] {
            if t2 > t1 + window_span_ps {
                break;
            }
            let dtau = t2 - t1;
            // Nearest bin center; centers sit on multiples of the width.
            let idx = (2 * dtau + bin_width_ps).div_euclid(2 * bin_width_ps) + half_bins;
            if (0..n_bins as i64).contains(&idx) {
                counts[idx as usize] += 1;
            }
        }
    }

    Ok(CorrelationHistogram {
        bin_width_ps,
        origin_ps: -(half_bins as f64 + 0.5) * bin_width_ps as f64,
        counts,
    })
}
