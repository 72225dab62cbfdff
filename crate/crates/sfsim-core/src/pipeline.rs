//! End-to-end event pipeline: pump pulses → pair generation → up-conversion
//! → interferometer routing → detection, plus a closed-form expectation
//! engine used to cross-validate the Monte-Carlo chain.
//!
//! Determinism: every pulse owns a counter-derived RNG, so pulses can be
//! simulated in any order (or in parallel) and still reproduce bit-identical
//! tag streams. Dead time couples neighbouring pulses, so it is applied in a
//! single pass after the candidate tags of all pulses are merged.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::analysis::{coincidences_in_window, estimate_accidentals};
use crate::detection::{detect, generate_dark_counts, ApdConfig, TimeTag};
use crate::interferometer::{
    design_wavelength_nm, pair_outcome_distribution, route_pair, route_single,
    InterferometerConfig,
};
use crate::source::{
    mean_pairs_per_pulse, pump_envelope, sample_pairs, PairRecord, PhotonOrigin, PhotonRecord,
    PulseTrainConfig, SpdcConfig,
};
use crate::upconversion::{
    sample_noise_photons, upconvert_pair, UpconversionConfig, UpconvertOutcome,
};
use crate::{rng, Error, Result};

/// Start-stop selection window half-width, ps: |Δτ| < 46 keeps the central
/// coincidence peak while excluding the ±120 ps side peaks.
pub const COINCIDENCE_HALF_WINDOW_PS: i64 = 46;

/// Time-interval-analyzer bin width, ps.
pub const HISTOGRAM_BIN_PS: i64 = 25;

/// Full simulation parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub train: PulseTrainConfig,
    pub spdc: SpdcConfig,
    pub upconversion: UpconversionConfig,
    pub interferometer: InterferometerConfig,
    pub apd: ApdConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            train: PulseTrainConfig::default(),
            spdc: SpdcConfig::default(),
            upconversion: UpconversionConfig::default(),
            interferometer: InterferometerConfig::default(),
            apd: ApdConfig::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.spdc.validate()?;
        self.upconversion.validate()?;
        self.interferometer.validate()?;
        self.apd.validate()?;
        if libm::fabs(self.spdc.signal_wavelength_nm - self.upconversion.input_wavelength_nm)
            > 1e-6
        {
            return Err(Error::InvalidConfig(
                "converter must be tuned to the SPDC signal wavelength",
            ));
        }
        Ok(())
    }
}

/// Provenance of a candidate detector tag, kept alongside the tag so that
/// coincidence populations can be audited after the fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventOrigin {
    /// Photon of a pair that exited on the same arm as its partner.
    PairCentral,
    /// Photon of a pair whose partner took the other arm.
    PairSide,
    /// Photon of a surviving pair whose partner went back toward the source.
    PairSingle,
    /// Photon whose partner failed up-conversion.
    BrokenSingle,
    Noise,
    Dark,
}

/// A candidate detector tag with provenance. Both photons of a routed pair
/// share one `event_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TaggedEvent {
    pub time_ps: i64,
    pub detector: u8,
    pub event_id: u64,
    pub origin: EventOrigin,
}

impl TaggedEvent {
    pub fn tag(&self) -> TimeTag {
        TimeTag { time_ps: self.time_ps, detector: self.detector }
    }
}

const EVENTS_PER_PULSE_ID_SPACE: u64 = 1 << 16;

/// Simulate one pump pulse to candidate tags (no dead time yet).
///
/// The draw order is fixed — pairs, per-pair conversion and routing and
/// detection, converter noise, dark counts — so a (seed, stream, pulse)
/// triple always reproduces the same tags.
pub fn simulate_pulse(
    cfg: &SimulationConfig,
    master_seed: u64,
    stream: u64,
    pulse_index: u64,
) -> Result<Vec<TaggedEvent>> {
    let mut rng = rng::pulse_rng(master_seed, stream, pulse_index);
    let mut out = Vec::new();
    let mut counter = 0u64;
    let next_id = |counter: &mut u64| {
        let id = pulse_index * EVENTS_PER_PULSE_ID_SPACE + *counter;
        *counter += 1;
        id
    };

    let push_detection = |out: &mut Vec<TaggedEvent>,
                              rng: &mut dyn RngCore,
                              arrival_ps: f64,
                              origin: EventOrigin,
                              event_id: u64| {
        let mut rng = rng;
        if let Some(tag) = detect(arrival_ps, &cfg.apd, &mut rng) {
            out.push(TaggedEvent {
                time_ps: tag.time_ps,
                detector: tag.detector,
                event_id,
                origin,
            });
        }
    };

    for pair in sample_pairs(pulse_index, &cfg.spdc, &cfg.train, &mut rng) {
        let event_id = next_id(&mut counter);
        match upconvert_pair(&pair, &cfg.upconversion, &cfg.train, &mut rng)? {
            UpconvertOutcome::Pair(converted) => {
                let routed =
                    route_pair(&converted, &cfg.interferometer, &cfg.train, &mut rng)?;
                let origin = match routed.len() {
                    2 if routed[0].1 == routed[1].1 => EventOrigin::PairCentral,
                    2 => EventOrigin::PairSide,
                    _ => EventOrigin::PairSingle,
                };
                for (_, arrival) in routed {
                    push_detection(&mut out, &mut rng, arrival, origin, event_id);
                }
            }
            UpconvertOutcome::BrokenSingle(photon) => {
                if let Some((_, arrival)) =
                    route_single(&photon, &cfg.interferometer, &mut rng)
                {
                    push_detection(
                        &mut out,
                        &mut rng,
                        arrival,
                        EventOrigin::BrokenSingle,
                        event_id,
                    );
                }
            }
            UpconvertOutcome::Lost => {}
        }
    }

    for photon in sample_noise_photons(&cfg.upconversion, pulse_index, &cfg.train, &mut rng) {
        let event_id = next_id(&mut counter);
        if let Some((_, arrival)) = route_single(&photon, &cfg.interferometer, &mut rng) {
            push_detection(&mut out, &mut rng, arrival, EventOrigin::Noise, event_id);
        }
    }

    let pulse_start = pulse_index as f64 * cfg.train.period_ps();
    for tag in generate_dark_counts(
        &cfg.apd,
        pulse_start,
        pulse_start + cfg.train.period_ps(),
        &mut rng,
    ) {
        let event_id = next_id(&mut counter);
        out.push(TaggedEvent {
            time_ps: tag.time_ps,
            detector: tag.detector,
            event_id,
            origin: EventOrigin::Dark,
        });
    }

    Ok(out)
}

/// Candidate tags for a contiguous pulse range, unsorted across pulses.
pub fn simulate_pulse_range(
    cfg: &SimulationConfig,
    master_seed: u64,
    stream: u64,
    pulses: core::ops::Range<u64>,
) -> Result<Vec<TaggedEvent>> {
    let mut out = Vec::new();
    for pulse_index in pulses {
        out.extend(simulate_pulse(cfg, master_seed, stream, pulse_index)?);
    }
    Ok(out)
}

/// Merge candidate tags into the final stream: time-sort (ties broken by
/// detector and event id, so the order never depends on production order)
/// and apply per-detector dead time.
pub fn finalize(mut events: Vec<TaggedEvent>, apd: &ApdConfig) -> Vec<TaggedEvent> {
    events.sort_unstable();
    let dead = apd.dead_time_ps();
    if dead == 0 {
        return events;
    }
    let mut last: [Option<i64>; 2] = [None, None];
    let mut out = Vec::with_capacity(events.len());
    for event in events {
        let slot = (event.detector - 1) as usize;
        match last[slot] {
            Some(prev) if event.time_ps - prev < dead => {}
            _ => {
                last[slot] = Some(event.time_ps);
                out.push(event);
            }
        }
    }
    out
}

/// Full run over `train.pulse_count` pulses, finalized.
pub fn simulate_tags(
    cfg: &SimulationConfig,
    master_seed: u64,
    stream: u64,
) -> Result<Vec<TaggedEvent>> {
    cfg.validate()?;
    let raw = simulate_pulse_range(cfg, master_seed, stream, 0..cfg.train.pulse_count)?;
    Ok(finalize(raw, &cfg.apd))
}

/// Split a finalized stream into per-detector sorted timestamp vectors.
pub fn detector_times(events: &[TaggedEvent]) -> (Vec<i64>, Vec<i64>) {
    let mut det1 = Vec::new();
    let mut det2 = Vec::new();
    for event in events {
        match event.detector {
            1 => det1.push(event.time_ps),
            _ => det2.push(event.time_ps),
        }
    }
    det1.sort_unstable();
    det2.sort_unstable();
    (det1, det2)
}

/// Window-selected coincidence populations, classified by provenance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoincidenceBreakdown {
    /// Both tags from the same pair, same-arm outcome.
    pub central: u64,
    /// Both tags from the same pair, opposite-arm outcome (leakage when the
    /// window is the central one).
    pub side: u64,
    /// Tags from unrelated events.
    pub accidental: u64,
}

impl CoincidenceBreakdown {
    pub fn total(&self) -> u64 {
        self.central + self.side + self.accidental
    }
}

/// Classify every cross-detector pair with `|Δτ| < half_window` by whether
/// the two tags share an originating pair.
pub fn coincidence_breakdown(
    events: &[TaggedEvent],
    half_window_ps: i64,
) -> Result<CoincidenceBreakdown> {
    if half_window_ps <= 0 {
        return Err(Error::InvalidConfig("half_window_ps must be positive"));
    }
    let mut det1: Vec<&TaggedEvent> = events.iter().filter(|e| e.detector == 1).collect();
    let mut det2: Vec<&TaggedEvent> = events.iter().filter(|e| e.detector != 1).collect();
    det1.sort_unstable_by_key(|e| e.time_ps);
    det2.sort_unstable_by_key(|e| e.time_ps);

    let mut breakdown = CoincidenceBreakdown::default();
    let mut lo = 0usize;
    for e1 in &det1 {
        while lo < det2.len() && det2[lo].time_ps <= e1.time_ps - half_window_ps {
            lo += 1;
        }
        for e2 in &det2[lo..] {
            if e2.time_ps >= e1.time_ps + half_window_ps {
                break;
            }
            if e1.event_id == e2.event_id && e1.origin == e2.origin {
                match e1.origin {
                    EventOrigin::PairCentral => breakdown.central += 1,
                    EventOrigin::PairSide => breakdown.side += 1,
                    _ => breakdown.accidental += 1,
                }
            } else {
                breakdown.accidental += 1;
            }
        }
    }
    Ok(breakdown)
}

/// One Monte-Carlo path-length scan point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPointResult {
    pub delta_l_nm: f64,
    pub coincidences: u64,
    pub accidentals: u64,
    /// Selected singles per detector.
    pub singles: [u64; 2],
}

/// Simulate one scan point: full pulse train at the configured ΔL, central
/// window selection, shifted-window accidental estimate.
pub fn run_scan_point(
    cfg: &SimulationConfig,
    master_seed: u64,
    stream: u64,
) -> Result<ScanPointResult> {
    let events = simulate_tags(cfg, master_seed, stream)?;
    let (det1, det2) = detector_times(&events);
    let coincidences = coincidences_in_window(&det1, &det2, COINCIDENCE_HALF_WINDOW_PS)?;
    let accidentals = estimate_accidentals(
        &det1,
        &det2,
        cfg.train.period_ps() as i64,
        COINCIDENCE_HALF_WINDOW_PS,
    )?;
    Ok(ScanPointResult {
        delta_l_nm: cfg.interferometer.delta_l_nm,
        coincidences,
        accidentals,
        singles: [det1.len() as u64, det2.len() as u64],
    })
}

// ---------------------------------------------------------------------------
// Closed-form expectation engine.
// ---------------------------------------------------------------------------

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2))
}

/// σ of the coincidence time-difference peak: two independent jitters.
pub fn coincidence_sigma_ps(apd: &ApdConfig) -> f64 {
    apd.jitter_sigma_ps() * core::f64::consts::SQRT_2
}

/// Probability that a jittered Δτ drawn around `center_ps` lands inside
/// `|Δτ| < half_window`.
fn window_acceptance(center_ps: f64, sigma_ps: f64, half_window_ps: f64) -> f64 {
    if sigma_ps == 0.0 {
        return if libm::fabs(center_ps) < half_window_ps { 1.0 } else { 0.0 };
    }
    normal_cdf((half_window_ps - center_ps) / sigma_ps)
        - normal_cdf((-half_window_ps - center_ps) / sigma_ps)
}

/// Fraction of side-peak coincidences that leak into the central selection
/// window through detector jitter.
pub fn side_leakage_fraction(cfg: &SimulationConfig) -> f64 {
    window_acceptance(
        libm::fabs(cfg.interferometer.delay_ps()),
        coincidence_sigma_ps(&cfg.apd),
        COINCIDENCE_HALF_WINDOW_PS as f64,
    )
}

fn probe_pair(t_in_pulse_ps: f64, train: &PulseTrainConfig) -> PairRecord {
    let photon = |origin| PhotonRecord {
        emission_time_ps: t_in_pulse_ps,
        wavelength_nm: design_wavelength_nm(),
        phase_rad: 0.0,
        origin,
    };
    PairRecord {
        emission_time_ps: t_in_pulse_ps,
        pulse_index: 0,
        signal: photon(PhotonOrigin::Signal),
        idler: photon(PhotonOrigin::Idler),
        sum_phase_rad: 0.0,
        sum_coherence_time_ns: train.pulse_duration_ns,
    }
}

/// Average of `f(t)` over the pulse, weighted by the emission density
/// envelope²(t).
pub fn envelope_average(train: &PulseTrainConfig, mut f: impl FnMut(f64) -> f64) -> f64 {
    let lo = train.support_start_ps();
    let hi = train.support_end_ps();
    let steps = 4000usize;
    let dt = (hi - lo) / steps as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..steps {
        let t = lo + (i as f64 + 0.5) * dt;
        let e = pump_envelope(t, train);
        let w = e * e;
        num += w * f(t);
        den += w;
    }
    num / den
}

/// Chirp-and-envelope-averaged same-arm outcome probability ⟨p_central⟩.
pub fn mean_central_probability(cfg: &SimulationConfig) -> Result<f64> {
    cfg.interferometer.validate()?;
    let mut first_err = None;
    let mean = envelope_average(&cfg.train, |t| {
        match pair_outcome_distribution(&probe_pair(t, &cfg.train), &cfg.interferometer, &cfg.train)
        {
            Ok(d) => d.p_central,
            Err(e) => {
                first_err.get_or_insert(e);
                0.0
            }
        }
    });
    match first_err {
        Some(e) => Err(e),
        None => Ok(mean),
    }
}

/// Expected counts at one scan point under the closed-form engine. The
/// engine is ideal on the background side: accidentals, noise and dark
/// contributions to the coincidence window are treated as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticScanPoint {
    pub delta_l_nm: f64,
    pub coincidences: f64,
    pub singles: [f64; 2],
}

/// Closed-form expectation of [`run_scan_point`].
pub fn analytic_scan_point(cfg: &SimulationConfig) -> Result<AnalyticScanPoint> {
    cfg.validate()?;
    let pulses = cfg.train.pulse_count as f64;
    let mu = mean_pairs_per_pulse(&cfg.spdc, &cfg.train);
    let eta = cfg.upconversion.internal_efficiency;
    let qe = cfg.apd.quantum_efficiency;
    let s = cfg.interferometer.splitting_ratio;
    let q = s * (1.0 - s);
    let sigma = coincidence_sigma_ps(&cfg.apd);
    let half_window = COINCIDENCE_HALF_WINDOW_PS as f64;

    let p_central = mean_central_probability(cfg)?;
    let p_side_total = 2.0 * q * q;
    let delay = libm::fabs(cfg.interferometer.delay_ps());

    // A coincidence needs the two photons on different detectors and both
    // surviving the quantum efficiency: 2·(qe/2)² = qe²/2.
    let split_qe = qe * qe / 2.0;
    let central = mu * eta * eta * p_central * split_qe * window_acceptance(0.0, sigma, half_window);
    let side_leak =
        mu * eta * eta * p_side_total * split_qe * window_acceptance(delay, sigma, half_window);

    // Per-detector singles: every generated photon reaches the detection
    // port with probability 2q regardless of its partner, then the 50/50
    // fan-out and quantum efficiency; plus converter noise and dark counts.
    let per_photon = 2.0 * q * 0.5 * qe;
    let singles_rate = 2.0 * mu * eta * per_photon
        + cfg.upconversion.noise_rate_per_pulse * per_photon
        + cfg.apd.dark_rate_per_s * 1e-12 * cfg.train.period_ps();

    Ok(AnalyticScanPoint {
        delta_l_nm: cfg.interferometer.delta_l_nm,
        coincidences: pulses * (central + side_leak),
        singles: [pulses * singles_rate, pulses * singles_rate],
    })
}

/// Expected correlation-histogram contents: three Gaussian peaks (central
/// interference peak and the two side peaks at ±ΔL/c) integrated over the
/// analyzer bins. Background coincidences are not modeled.
pub fn analytic_histogram(
    cfg: &SimulationConfig,
    window_span_ps: i64,
    bin_width_ps: i64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if bin_width_ps <= 0 || window_span_ps <= 0 {
        return Err(Error::InvalidConfig("window span and bin width must be positive"));
    }
    let pulses = cfg.train.pulse_count as f64;
    let mu = mean_pairs_per_pulse(&cfg.spdc, &cfg.train);
    let eta = cfg.upconversion.internal_efficiency;
    let qe = cfg.apd.quantum_efficiency;
    let s = cfg.interferometer.splitting_ratio;
    let q = s * (1.0 - s);
    let sigma = coincidence_sigma_ps(&cfg.apd);
    let split_qe = qe * qe / 2.0;
    let scale = pulses * mu * eta * eta * split_qe;

    let delay = cfg.interferometer.delay_ps();
    let peaks = [
        (0.0, scale * mean_central_probability(cfg)?),
        (delay, scale * q * q),
        (-delay, scale * q * q),
    ];

    let half_bins = window_span_ps / bin_width_ps;
    let n_bins = (2 * half_bins + 1) as usize;
    let mut expected = alloc::vec![0.0f64; n_bins];
    for (i, slot) in expected.iter_mut().enumerate() {
        let center = (i as i64 - half_bins) as f64 * bin_width_ps as f64;
        let lo = center - 0.5 * bin_width_ps as f64;
        let hi = center + 0.5 * bin_width_ps as f64;
        for (peak_center, area) in peaks {
            *slot += area
                * (normal_cdf((hi - peak_center) / sigma) - normal_cdf((lo - peak_center) / sigma));
        }
    }
    Ok(expected)
}
