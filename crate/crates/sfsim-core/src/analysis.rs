//! Estimators downstream of raw tag streams and histograms: peak finding,
//! windowed coincidence counting, accidental estimation, fringe fitting,
//! pulse-profile visibility and event-rate bookkeeping.

use alloc::vec::Vec;

use crate::detection::CorrelationHistogram;
use crate::interferometer::{classical_intensity, InterferometerConfig};
use crate::source::PulseTrainConfig;
use crate::{Error, Result};

/// One point of a path-length scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeSample {
    pub delta_l_nm: f64,
    pub coincidences: u64,
    pub accidentals: u64,
}

impl FringeSample {
    /// Accidental-subtracted coincidences; may go negative on fluctuations.
    pub fn net(&self) -> f64 {
        subtract_accidentals(self.coincidences, self.accidentals)
    }
}

/// Ordered (ΔL, coincidences, accidentals) samples with a uniform step.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub samples: Vec<FringeSample>,
    pub step_nm: f64,
}

impl FringeScan {
    pub fn validate(&self) -> Result<()> {
        if self.step_nm <= 0.0 {
            return Err(Error::InvalidConfig("scan step must be positive"));
        }
        for w in self.samples.windows(2) {
            let gap = w[1].delta_l_nm - w[0].delta_l_nm;
            if gap <= 0.0 || libm::fabs(gap - self.step_nm) > 1e-6 * self.step_nm.max(1.0) {
                return Err(Error::InvalidConfig("scan positions must increase by a uniform step"));
            }
        }
        Ok(())
    }
}

/// Least-squares fit of `a + b·cos(2πΔL/P + φ)` to a fringe scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub period_nm: f64,
    pub visibility: f64,
    pub phase_rad: f64,
    pub offset: f64,
    pub residual_rms: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Local maxima above a `median + 5·MAD` noise floor, refined by 3-point
/// parabolic interpolation and merged within half the expected separation.
pub fn find_histogram_peaks(
    hist: &CorrelationHistogram,
    expected_separation_ps: f64,
) -> Vec<f64> {
    let counts: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    if counts.len() < 3 {
        return Vec::new();
    }
    let mut sorted = counts.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let med = median(&sorted);
    let mut deviations: Vec<f64> = counts.iter().map(|c| libm::fabs(c - med)).collect();
    deviations.sort_unstable_by(f64::total_cmp);
    let mad = median(&deviations);
    let floor = med + 5.0 * mad;

    let mut peaks: Vec<(f64, f64)> = Vec::new(); // (center_ps, height)
    for i in 1..counts.len() - 1 {
        let (l, c, r) = (counts[i - 1], counts[i], counts[i + 1]);
        if c <= floor || c < l || c <= r {
            continue;
        }
        // Parabolic vertex through the three bins.
        let denom = l - 2.0 * c + r;
        let shift = if denom == 0.0 { 0.0 } else { 0.5 * (l - r) / denom };
        let center = hist.bin_center_ps(i) + shift * hist.bin_width_ps as f64;
        peaks.push((center, c));
    }

    // Merge peaks closer than half the expected separation, keeping the
    // tallest of each cluster.
    let min_gap = 0.5 * expected_separation_ps;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for peak in peaks {
        match merged.last_mut() {
            Some(last) if peak.0 - last.0 < min_gap => {
                if peak.1 > last.1 {
                    *last = peak;
                }
            }
            _ => merged.push(peak),
        }
    }
    merged.into_iter().map(|(center, _)| center).collect()
}

fn check_sorted(times: &[i64]) -> Result<()> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedTags);
    }
    Ok(())
}

/// Count cross-detector tag pairs with `|t₂ − t₁| < half_window`.
pub fn coincidences_in_window(
    detector1: &[i64],
    detector2: &[i64],
    half_window_ps: i64,
) -> Result<u64> {
    if half_window_ps <= 0 {
        return Err(Error::InvalidConfig("half_window_ps must be positive"));
    }
    check_sorted(detector1)?;
    check_sorted(detector2)?;
    let mut count = 0u64;
    let mut lo = 0usize;
    for &t1 in detector1 {
        while lo < detector2.len() && detector2[lo] <= t1 - half_window_ps {
            lo += 1;
        }
        for &t2 in &detector2[lo..] {
            if t2 >= t1 + half_window_ps {
                break;
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Accidental-coincidence estimator: the same window count with the
/// detector-2 stream shifted by exactly one pump period, so only events
/// from adjacent pulses (necessarily uncorrelated) are paired.
pub fn estimate_accidentals(
    detector1: &[i64],
    detector2: &[i64],
    pulse_period_ps: i64,
    half_window_ps: i64,
) -> Result<u64> {
    if pulse_period_ps <= 0 {
        return Err(Error::InvalidConfig("pulse_period_ps must be positive"));
    }
    check_sorted(detector1)?;
    check_sorted(detector2)?;
    let shifted: Vec<i64> = detector2.iter().map(|&t| t - pulse_period_ps).collect();
    coincidences_in_window(detector1, &shifted, half_window_ps)
}

/// Raw minus accidental; negative values from fluctuations are preserved so
/// downstream fits stay unbiased.
pub fn subtract_accidentals(raw: u64, accidental: u64) -> f64 {
    raw as f64 - accidental as f64
}

/// Events per pulse implied by a count rate and pump repetition rate.
pub fn event_probability(rate_per_s: f64, repetition_mhz: f64) -> Result<f64> {
    if !(repetition_mhz.is_finite() && repetition_mhz > 0.0) {
        return Err(Error::InvalidConfig("repetition_mhz must be positive"));
    }
    Ok(rate_per_s / (repetition_mhz * 1e6))
}

/// Sum of squared residuals of the best linear fit
/// `a + b·cos(2πx/p) + c·sin(2πx/p)`, together with `(a, b, c)`.
fn sinusoid_ls(xs: &[f64], ys: &[f64], period: f64) -> (f64, [f64; 3]) {
    let omega = 2.0 * core::f64::consts::PI / period;
    // Normal equations for the 3-parameter linear model.
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let basis = [1.0, libm::cos(omega * x), libm::sin(omega * x)];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut a = m;
    let mut b = rhs;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        if libm::fabs(a[col][col]) < 1e-12 {
            return (f64::INFINITY, [0.0; 3]);
        }
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut sol = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc -= a[col][k] * sol[k];
        }
        sol[col] = acc / a[col][col];
    }
    let mut ssr = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let model = sol[0] + sol[1] * libm::cos(omega * x) + sol[2] * libm::sin(omega * x);
        let r = y - model;
        ssr += r * r;
    }
    (ssr, sol)
}

/// Candidate period grid for the periodogram bootstrap, nm.
const PERIOD_GRID_MIN_NM: f64 = 1.0;
const PERIOD_GRID_MAX_NM: f64 = 2000.0;

/// Fit `a + b·cos(2πΔL/P + φ)` to the accidental-subtracted scan.
///
/// The period is bootstrapped from a discrete periodogram (1 nm grid over
/// 1-2000 nm) and refined by golden-section search on the residual; plain
/// least squares on the period alone is non-convex.
pub fn fit_fringe(scan: &FringeScan) -> Result<FringeFit> {
    scan.validate()?;
    if scan.samples.len() < 8 {
        return Err(Error::DegenerateScan("need at least 8 scan points"));
    }
    let xs: Vec<f64> = scan.samples.iter().map(|s| s.delta_l_nm).collect();
    let ys: Vec<f64> = scan.samples.iter().map(|s| s.net()).collect();
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread == 0.0 {
        return Err(Error::DegenerateScan("scan is constant"));
    }

    let mut best_period = PERIOD_GRID_MIN_NM;
    let mut best_ssr = f64::INFINITY;
    let mut period = PERIOD_GRID_MIN_NM;
    while period <= PERIOD_GRID_MAX_NM {
        let (ssr, _) = sinusoid_ls(&xs, &ys, period);
        if ssr < best_ssr {
            best_ssr = ssr;
            best_period = period;
        }
        period += 1.0;
    }

    // Golden-section refinement around the grid winner.
    let phi_inv = 0.618_033_988_749_894_9;
    let mut lo = (best_period - 1.5).max(PERIOD_GRID_MIN_NM * 0.5);
    let mut hi = best_period + 1.5;
    let mut x1 = hi - phi_inv * (hi - lo);
    let mut x2 = lo + phi_inv * (hi - lo);
    let mut f1 = sinusoid_ls(&xs, &ys, x1).0;
    let mut f2 = sinusoid_ls(&xs, &ys, x2).0;
    for _ in 0..64 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi_inv * (hi - lo);
            f1 = sinusoid_ls(&xs, &ys, x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi_inv * (hi - lo);
            f2 = sinusoid_ls(&xs, &ys, x2).0;
        }
    }
    let refined = 0.5 * (lo + hi);
    let (ssr, [offset, b, c]) = sinusoid_ls(&xs, &ys, refined);
    if !ssr.is_finite() {
        return Err(Error::DegenerateScan("singular least-squares system"));
    }
    if offset <= 0.0 {
        return Err(Error::DegenerateScan("non-positive fitted offset"));
    }
    let amplitude = libm::sqrt(b * b + c * c);
    Ok(FringeFit {
        period_nm: refined,
        visibility: amplitude / offset,
        phase_rad: libm::atan2(-c, b),
        offset,
        residual_rms: libm::sqrt(ssr / xs.len() as f64),
    })
}

/// Trapezoidal integral of a sampled profile over `[t0, t1]`, with linear
/// interpolation at the window edges.
fn integrate_window(t: &[f64], y: &[f64], t0: f64, t1: f64) -> f64 {
    let value_at = |x: f64| -> f64 {
        match t.iter().position(|&ti| ti >= x) {
            Some(0) => y[0],
            None => y[y.len() - 1],
            Some(i) => {
                let f = (x - t[i - 1]) / (t[i] - t[i - 1]);
                y[i - 1] + f * (y[i] - y[i - 1])
            }
        }
    };
    let mut acc = 0.0;
    let mut prev_t = t0;
    let mut prev_y = value_at(t0);
    for (&ti, &yi) in t.iter().zip(y) {
        if ti <= t0 {
            continue;
        }
        if ti >= t1 {
            break;
        }
        acc += 0.5 * (prev_y + yi) * (ti - prev_t);
        prev_t = ti;
        prev_y = yi;
    }
    acc + 0.5 * (prev_y + value_at(t1)) * (t1 - prev_t)
}

/// Interference visibility from a bright-fringe and a dark-fringe temporal
/// profile on a common time grid: `(∫A − ∫B) / (∫A + ∫B)` over `[t0, t1]`.
pub fn visibility_from_profiles(
    t_ns: &[f64],
    profile_a: &[f64],
    profile_b: &[f64],
    t0_ns: f64,
    t1_ns: f64,
) -> Result<f64> {
    if t_ns.len() != profile_a.len() || t_ns.len() != profile_b.len() || t_ns.len() < 2 {
        return Err(Error::GridMismatch);
    }
    if !(t0_ns < t1_ns) {
        return Err(Error::InvalidConfig("profile window must have t0 < t1"));
    }
    if t0_ns < t_ns[0] - 1e-9 || t1_ns > t_ns[t_ns.len() - 1] + 1e-9 {
        return Err(Error::GridMismatch);
    }
    let a = integrate_window(t_ns, profile_a, t0_ns, t1_ns);
    let b = integrate_window(t_ns, profile_b, t0_ns, t1_ns);
    if a + b == 0.0 {
        return Err(Error::DegenerateScan("profiles carry no intensity in the window"));
    }
    Ok((a - b) / (a + b))
}

/// Time-integrated intensity of the classical up-converted interference
/// output at one path difference, optionally restricted to a window within
/// the pulse.
pub fn classical_pulse_area(
    delta_l_nm: f64,
    train: &PulseTrainConfig,
    ifm: &InterferometerConfig,
    window_ns: Option<(f64, f64)>,
) -> f64 {
    let (t0, t1) = match window_ns {
        Some((a, b)) => (a * 1e3, b * 1e3),
        None => (train.support_start_ps(), train.support_end_ps()),
    };
    // The chirp term oscillates quickly on the ramps; keep the quadrature
    // step near 2 ps.
    let steps = 4000;
    let dt = (t1 - t0) / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let t = t0 + i as f64 * dt;
        let weight = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += weight * classical_intensity(delta_l_nm, t, train, ifm);
    }
    acc * dt
}

/// Pulse-area fringe visibility of the classical up-converted beam at a
/// base path difference, computed by scanning one classical fringe period
/// and integrating the intensity over the pulse (optionally windowed).
pub fn classical_pulse_visibility(
    delta_l_base_nm: f64,
    train: &PulseTrainConfig,
    ifm: &InterferometerConfig,
    window_ns: Option<(f64, f64)>,
) -> f64 {
    let period = crate::units::TELECOM_WAVELENGTH_NM / 3.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let scan_points = 64;
    for i in 0..scan_points {
        let delta = delta_l_base_nm + i as f64 * period / scan_points as f64;
        let a = classical_pulse_area(delta, train, ifm, window_ns);
        max = max.max(a);
        min = min.min(a);
    }
    (max - min) / (max + min)
}

/// Calibrate the modulator edge phase swing β so that the classical
/// full-pulse visibility hits `target` at the given base path difference.
///
/// `bracket` selects the dephasing branch; the classical visibility is not
/// monotone in β, so the bracket must contain exactly the intended
/// crossing. The search scans for a sign change, then bisects.
pub fn calibrate_edge_swing(
    target_visibility: f64,
    bracket: (f64, f64),
    delta_l_base_nm: f64,
    train_template: &PulseTrainConfig,
    ifm: &InterferometerConfig,
) -> Result<f64> {
    if !(0.0 < target_visibility && target_visibility <= 1.0) {
        return Err(Error::InvalidConfig("target visibility must be in (0, 1]"));
    }
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidConfig("calibration bracket must satisfy 0 <= lo < hi"));
    }
    let vis = |beta: f64| -> f64 {
        let train = PulseTrainConfig { edge_swing_beta_rad: beta, ..train_template.clone() };
        classical_pulse_visibility(delta_l_base_nm, &train, ifm, None)
    };
    let scan_steps = 64;
    let mut prev_beta = lo;
    let mut prev_f = vis(prev_beta) - target_visibility;
    let mut found: Option<(f64, f64)> = None;
    for i in 1..=scan_steps {
        let beta = lo + (hi - lo) * i as f64 / scan_steps as f64;
        let f = vis(beta) - target_visibility;
        if prev_f == 0.0 || prev_f * f < 0.0 {
            found = Some((prev_beta, beta));
            break;
        }
        prev_beta = beta;
        prev_f = f;
    }
    let (mut a, mut b) = found.ok_or(Error::InvalidConfig(
        "calibration target not reachable inside the bracket",
    ))?;
    let mut fa = vis(a) - target_visibility;
    for _ in 0..48 {
        let mid = 0.5 * (a + b);
        let fm = vis(mid) - target_visibility;
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::CorrelationHistogram;
    use crate::rng::{self, pulse_rng};
    use proptest::prelude::*;

    fn synthetic_scan(period: f64, visibility: f64, offset: f64, n: usize, step: f64) -> FringeScan {
        let samples = (0..n)
            .map(|i| {
                let x = i as f64 * step;
                let y = offset
                    * (1.0 + visibility * libm::cos(2.0 * core::f64::consts::PI * x / period));
                FringeSample {
                    delta_l_nm: x,
                    coincidences: libm::round(y) as u64,
                    accidentals: 0,
                }
            })
            .collect();
        FringeScan { samples, step_nm: step }
    }

    #[test]
    fn flat_histogram_has_no_peaks() {
        let hist = CorrelationHistogram {
            bin_width_ps: 25,
            origin_ps: -512.5,
            counts: vec![7; 41],
        };
        assert!(find_histogram_peaks(&hist, 120.0).is_empty());
    }

    #[test]
    fn synthetic_gaussian_peak_is_recovered_within_one_ps() {
        let truth = 137.0;
        let sigma = 30.0;
        let mut counts = vec![0u64; 41];
        for i in 0..41 {
            let center = -500.0 + i as f64 * 25.0;
            let z = (center - truth) / sigma;
            counts[i] = libm::round(10_000.0 * libm::exp(-0.5 * z * z)) as u64;
        }
        let hist = CorrelationHistogram { bin_width_ps: 25, origin_ps: -512.5, counts };
        let peaks = find_histogram_peaks(&hist, 120.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0] - truth).abs() < 1.0, "peak at {}", peaks[0]);
    }

    #[test]
    fn three_peak_histogram_is_resolved() {
        let mut counts = vec![2u64; 41];
        for (center, height) in [(-120.0, 800.0), (0.0, 1500.0), (120.0, 800.0)] {
            for i in 0..41 {
                let bin_center = -500.0 + i as f64 * 25.0;
                let z: f64 = (bin_center - center) / 30.0;
                counts[i] += libm::round(height * libm::exp(-0.5 * z * z)) as u64;
            }
        }
        let hist = CorrelationHistogram { bin_width_ps: 25, origin_ps: -512.5, counts };
        let peaks = find_histogram_peaks(&hist, 120.0);
        assert_eq!(peaks.len(), 3, "peaks {peaks:?}");
        for (peak, truth) in peaks.iter().zip([-120.0, 0.0, 120.0]) {
            assert!((peak - truth).abs() < 3.0, "peak {peak} vs {truth}");
        }
    }

    #[test]
    fn empty_streams_have_no_coincidences() {
        assert_eq!(coincidences_in_window(&[], &[], 46).unwrap(), 0);
        assert_eq!(coincidences_in_window(&[1, 2], &[], 46).unwrap(), 0);
    }

    #[test]
    fn wide_window_counts_every_pair() {
        let d1 = vec![0, 100, 200];
        let d2 = vec![50, 150];
        assert_eq!(coincidences_in_window(&d1, &d2, 1_000_000).unwrap(), 6);
    }

    #[test]
    fn window_boundary_is_strict() {
        assert_eq!(coincidences_in_window(&[0], &[45], 46).unwrap(), 1);
        assert_eq!(coincidences_in_window(&[0], &[46], 46).unwrap(), 0);
        assert_eq!(coincidences_in_window(&[0], &[-46], 46).unwrap(), 0);
    }

    #[test]
    fn accidental_estimator_sees_shifted_pairs() {
        // det2 events exactly one period after det1 events.
        let d1 = vec![0, 500_000];
        let d2 = vec![250_010, 750_010];
        assert_eq!(estimate_accidentals(&d1, &d2, 250_000, 46).unwrap(), 2);
        // Without the shift those pairs are far outside the window.
        assert_eq!(coincidences_in_window(&d1, &d2, 46).unwrap(), 0);
    }

    #[test]
    fn subtraction_examples() {
        assert_eq!(subtract_accidentals(0, 0), 0.0);
        assert_eq!(subtract_accidentals(100, 20), 80.0);
        assert_eq!(subtract_accidentals(10, 25), -15.0);
    }

    #[test]
    fn noiseless_fit_round_trips() {
        let scan = synthetic_scan(258.33, 0.70, 5_000.0, 267, 6.0);
        let fit = fit_fringe(&scan).unwrap();
        assert!((fit.period_nm - 258.33).abs() < 0.5, "period {}", fit.period_nm);
        assert!((fit.visibility - 0.70).abs() < 0.01, "visibility {}", fit.visibility);
        assert!(fit.residual_rms < 1.0);
    }

    #[test]
    fn constant_scan_is_rejected() {
        let samples = (0..32)
            .map(|i| FringeSample {
                delta_l_nm: i as f64 * 6.0,
                coincidences: 500,
                accidentals: 0,
            })
            .collect();
        let scan = FringeScan { samples, step_nm: 6.0 };
        assert!(matches!(fit_fringe(&scan), Err(Error::DegenerateScan(_))));
    }

    #[test]
    fn flat_noisy_scan_fits_with_tiny_visibility() {
        let mut rng = pulse_rng(41, 0, 0);
        let samples = (0..267)
            .map(|i| FringeSample {
                delta_l_nm: i as f64 * 6.0,
                coincidences: 5_000 + (rng::uniform(&mut rng) * 10.0) as u64,
                accidentals: 0,
            })
            .collect();
        let scan = FringeScan { samples, step_nm: 6.0 };
        match fit_fringe(&scan) {
            Ok(fit) => assert!(fit.visibility < 0.02, "visibility {}", fit.visibility),
            Err(Error::DegenerateScan(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn nonuniform_step_is_rejected() {
        let mut scan = synthetic_scan(258.33, 0.7, 1000.0, 32, 6.0);
        scan.samples[10].delta_l_nm += 2.0;
        assert!(fit_fringe(&scan).is_err());
    }

    #[test]
    fn identical_profiles_have_zero_visibility() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&x| 1.0 + x).collect();
        let v = visibility_from_profiles(&t, &y, &y, 1.0, 8.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn profile_visibility_matches_closed_form() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let a: Vec<f64> = t.iter().map(|_| 1.7).collect();
        let b: Vec<f64> = t.iter().map(|_| 0.3).collect();
        let v = visibility_from_profiles(&t, &a, &b, 2.0, 8.0).unwrap();
        assert!((v - 0.7).abs() < 1e-9, "visibility {v}");
    }

    #[test]
    fn mismatched_grids_error() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y9 = vec![1.0; 9];
        let y10 = vec![1.0; 10];
        assert_eq!(
            visibility_from_profiles(&t, &y9, &y10, 0.0, 5.0),
            Err(Error::GridMismatch)
        );
        // Window outside the sampled range is also a contract error.
        assert!(visibility_from_profiles(&t, &y10, &y10, -5.0, 5.0).is_err());
    }

    #[test]
    fn classical_visibility_without_chirp_is_the_mode_overlap() {
        let train = PulseTrainConfig::default();
        let ifm = InterferometerConfig { mode_overlap_visibility: 0.834, ..Default::default() };
        // The fringe-extremum scan runs on a 64-point grid, so the sampled
        // extrema can sit up to ~V·(1−cos(π/64)) ≈ 1e-3 below the truth.
        let full = classical_pulse_visibility(36.0e6, &train, &ifm, None);
        assert!((full - 0.834).abs() < 2e-3, "full-pulse visibility {full}");
        let windowed = classical_pulse_visibility(36.0e6, &train, &ifm, Some((2.5, 7.5)));
        assert!((windowed - 0.834).abs() < 2e-3, "windowed visibility {windowed}");
    }

    #[test]
    fn edge_swing_calibration_round_trips() {
        // The frozen operating point: with mode overlap 0.834 the edge
        // swing that washes the full-pulse classical visibility down to
        // 0.690 is β ≈ 11.746 rad, and the same β leaves the windowed
        // (flat-top only) visibility at the bare mode overlap.
        let train = PulseTrainConfig::default();
        let ifm = InterferometerConfig { mode_overlap_visibility: 0.834, ..Default::default() };
        let beta =
            calibrate_edge_swing(0.690, (11.0, 12.5), 36.0e6, &train, &ifm).unwrap();
        std::println!("calibrated edge swing beta = {beta:.6} rad");
        assert!((beta - 11.746).abs() < 0.05, "beta {beta}");
        let calibrated = PulseTrainConfig { edge_swing_beta_rad: beta, ..train.clone() };
        let full = classical_pulse_visibility(36.0e6, &calibrated, &ifm, None);
        assert!((full - 0.690).abs() < 1e-4, "full-pulse visibility {full}");
        let windowed = classical_pulse_visibility(36.0e6, &calibrated, &ifm, Some((2.5, 7.5)));
        assert!((windowed - 0.834).abs() < 0.002, "windowed visibility {windowed}");
    }

    #[test]
    fn event_probability_examples() {
        assert_eq!(event_probability(2_000.0, 4.0).unwrap(), 5e-4);
        let walther = event_probability(4_800.0, 76.0).unwrap();
        assert!((walther - 6.3e-5).abs() < 0.1e-5, "got {walther}");
        assert_eq!(event_probability(0.0, 76.0).unwrap(), 0.0);
        assert!(event_probability(1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn fit_is_scale_equivariant(k in 2u64..20) {
            let base = synthetic_scan(258.33, 0.65, 2_000.0, 200, 6.0);
            let scaled = FringeScan {
                samples: base
                    .samples
                    .iter()
                    .map(|s| FringeSample {
                        coincidences: s.coincidences * k,
                        accidentals: s.accidentals * k,
                        ..*s
                    })
                    .collect(),
                step_nm: base.step_nm,
            };
            let f0 = fit_fringe(&base).unwrap();
            let f1 = fit_fringe(&scaled).unwrap();
            prop_assert!((f0.period_nm - f1.period_nm).abs() < 1e-6);
            prop_assert!((f0.visibility - f1.visibility).abs() < 1e-3);
            prop_assert!((f0.phase_rad - f1.phase_rad).abs() < 1e-3);
            // Offset scales with the counts.
            prop_assert!((f1.offset / f0.offset - k as f64).abs() < 1e-3 * k as f64);
        }

        #[test]
        fn periodogram_recovers_periods_in_range(period in 100.0f64..1000.0) {
            // Noiseless sweep oracle: < 1% period error.
            let step = period / 20.0;
            let scan = synthetic_scan(period, 0.8, 10_000.0, 80, step);
            let fit = fit_fringe(&scan).unwrap();
            prop_assert!(
                (fit.period_nm - period).abs() < 0.01 * period,
                "fit {} vs {}", fit.period_nm, period
            );
        }

        #[test]
        fn window_count_matches_brute_force(
            mut t1 in prop::collection::vec(-5_000i64..5_000, 0..80),
            mut t2 in prop::collection::vec(-5_000i64..5_000, 0..80),
            half in 1i64..400,
        ) {
            t1.sort_unstable();
            t2.sort_unstable();
            let fast = coincidences_in_window(&t1, &t2, half).unwrap();
            let brute = t1
                .iter()
                .flat_map(|a| t2.iter().map(move |b| b - a))
                .filter(|d| d.abs() < half)
                .count() as u64;
            prop_assert_eq!(fast, brute);
        }
    }
}
