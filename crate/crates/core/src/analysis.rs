//! Post-processing of energy traces: damping-rate fits, grid-size
//! extrapolation, moment-order convergence and recurrence detection.

use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{abs, exp, ln, sqrt};
use crate::simulation::EnergyTrace;

/// Indices of strict local maxima: `x[i−1] < x[i] > x[i+1]`. End points
/// and plateaus never qualify, so two adjacent samples are never both
/// reported.
pub fn find_peaks(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i - 1] < values[i] && values[i] > values[i + 1])
        .collect()
}

/// Ordinary least-squares line `y = a + b·x`; returns `(a, b, rms)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    (intercept, slope, sqrt(ss / n))
}

/// Exponential envelope fitted through the peaks of `√E_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingFit {
    /// Slope of `ln(peak)` against time.
    pub gamma: f64,
    /// Intercept of `ln(peak)` at `t = 0`.
    pub intercept: f64,
    /// `(t, √E_h)` of the peaks used, in time order.
    pub peaks: Vec<(f64, f64)>,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
}

impl DampingFit {
    /// Envelope value `exp(γt + c)`.
    pub fn envelope(&self, t: f64) -> f64 {
        exp(self.gamma * t + self.intercept)
    }
}

fn peaks_in(t: &[f64], amp: &[f64], window: (f64, f64)) -> Vec<(f64, f64)> {
    find_peaks(amp)
        .into_iter()
        .filter(|&i| t[i] >= window.0 && t[i] <= window.1)
        .map(|i| (t[i], amp[i]))
        .collect()
}

fn fit_points(peaks: Vec<(f64, f64)>) -> Result<DampingFit, Error> {
    if peaks.len() < 3 {
        return Err(Error::InsufficientPeaks { found: peaks.len() });
    }
    let logs: Vec<(f64, f64)> = peaks.iter().map(|&(t, a)| (t, ln(a))).collect();
    let (intercept, gamma, residual) = least_squares(&logs);
    if !gamma.is_finite() {
        return Err(Error::NonFinite { cell: 0 });
    }
    Ok(DampingFit { gamma, intercept, peaks, residual })
}

/// Fits `ln(peak) = c + γt` to the strict local maxima of `amp(t)` that
/// fall inside `window`.
pub fn fit_envelope(t: &[f64], amp: &[f64], window: (f64, f64)) -> Result<DampingFit, Error> {
    if t.len() != amp.len() {
        return Err(Error::LengthMismatch { expected: t.len(), found: amp.len() });
    }
    fit_points(peaks_in(t, amp, window))
}

/// Damping rate of `√E_h` over `window = (t_min, t_max)`.
pub fn fit_damping_rate(trace: &EnergyTrace, window: (f64, f64)) -> Result<DampingFit, Error> {
    fit_envelope(&trace.times(), &trace.field_amplitude(), window)
}

/// Default fit window: from the first peak up to the last peak that still
/// follows the envelope, or the end of the trace when no recurrence shows.
///
/// The envelope is grown one peak at a time; the first peak that departs
/// from the running fit by more than a factor `threshold`, above or below,
/// ends the window.
pub fn auto_window(trace: &EnergyTrace, threshold: f64) -> (f64, f64) {
    let t = trace.times();
    let amp = trace.field_amplitude();
    let t_end = t.last().copied().unwrap_or(0.0);
    let peaks = peaks_in(&t, &amp, (f64::NEG_INFINITY, f64::INFINITY));
    if peaks.len() < 3 {
        return (t.first().copied().unwrap_or(0.0), t_end);
    }
    let mut used = 3;
    while used < peaks.len() {
        let Ok(fit) = fit_points(peaks[..used].to_vec()) else { break };
        let (tp, ap) = peaks[used];
        let env = fit.envelope(tp);
        if ap > threshold * env || ap * threshold < env {
            return (peaks[0].0, peaks[used - 1].0);
        }
        used += 1;
    }
    (peaks[0].0, t_end)
}

/// Recurrence onset: the consecutive peak times `(t_lo, t_hi)` around the
/// first peak after the fitted range that exceeds `threshold · exp(γt + c)`.
pub fn detect_recurrence(trace: &EnergyTrace, fit: &DampingFit, threshold: f64) -> Result<(f64, f64), Error> {
    detect_recurrence_in(&trace.times(), &trace.field_amplitude(), fit, threshold)
}

/// [`detect_recurrence`] on raw samples.
pub fn detect_recurrence_in(t: &[f64], amp: &[f64], fit: &DampingFit, threshold: f64) -> Result<(f64, f64), Error> {
    if !(threshold > 1.0) {
        return Err(Error::OutOfRange { name: "threshold", value: threshold });
    }
    let start = fit.peaks.first().map(|p| p.0).unwrap_or(f64::NEG_INFINITY);
    let peaks = peaks_in(t, amp, (start, f64::INFINITY));
    for w in peaks.windows(2) {
        let (t_hi, a_hi) = w[1];
        if a_hi > threshold * fit.envelope(t_hi) {
            return Ok((w[0].0, t_hi));
        }
    }
    Err(Error::NoRecurrence)
}

/// Least-squares line `γ(Δx) = γ₀ + γ₁Δx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationFit {
    /// Limit `Δx → 0`.
    pub gamma0: f64,
    pub gamma1: f64,
    pub points: Vec<(f64, f64)>,
    /// RMS residual of the line.
    pub residual: f64,
}

/// Fits `γ = γ₀ + γ₁Δx` through `(Δx, γ)` points.
pub fn extrapolate_rate(points: &[(f64, f64)]) -> Result<ExtrapolationFit, Error> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints { found: points.len() });
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::DuplicateSpacing(a.0));
        }
    }
    let (gamma0, gamma1, residual) = least_squares(points);
    Ok(ExtrapolationFit { gamma0, gamma1, points: points.to_vec(), residual })
}

/// Log-differences of rates over an arithmetic sequence of orders.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentConvergence {
    /// `(M_i, ln|γ_i − γ_{i−1}|)` for `i ≥ 1`.
    pub log_differences: Vec<(usize, f64)>,
    /// Slope of the log-differences against `M`, i.e. `ΔM`-free `ln λ`.
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Checks the exponential-convergence ansatz `γ_M − γ_∞ ∝ λ^M`: returns
/// `ln|γ_i − γ_{i−1}|` per order and its least-squares slope in `M`.
///
/// Needs at least three rates, a constant positive step in `M`, and
/// successive differences of one strict sign.
pub fn moment_convergence(rates: &[(usize, f64)]) -> Result<MomentConvergence, Error> {
    if rates.len() < 3 {
        return Err(Error::InsufficientPoints { found: rates.len() });
    }
    let step = rates[1].0 as i64 - rates[0].0 as i64;
    if step <= 0 || rates.windows(2).any(|w| w[1].0 as i64 - w[0].0 as i64 != step) {
        return Err(Error::NotArithmetic);
    }
    let diffs: Vec<f64> = rates.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let positive = diffs.iter().all(|d| *d > 0.0);
    let negative = diffs.iter().all(|d| *d < 0.0);
    if !(positive || negative) {
        return Err(Error::NotMonotone);
    }
    let log_differences: Vec<(usize, f64)> =
        rates[1..].iter().zip(&diffs).map(|(r, d)| (r.0, ln(abs(*d)))).collect();
    let pts: Vec<(f64, f64)> = log_differences.iter().map(|&(m, l)| (m as f64, l)).collect();
    let (intercept, slope, residual) = least_squares(&pts);
    Ok(MomentConvergence { log_differences, slope, intercept, residual })
}

/// Pearson correlation of two equally long samples.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / sqrt(sxx * syy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::TraceRow;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace_of(f: impl Fn(f64) -> f64, t_end: f64, dt: f64) -> EnergyTrace {
        let n = (t_end / dt) as usize;
        let rows = (0..=n)
            .map(|i| {
                let t = i as f64 * dt;
                let a = f(t);
                TraceRow { t, e_h: a * a, e_p: 1.0, e_total: 1.0 + a * a, mass: 1.0, momentum: 0.0 }
            })
            .collect();
        EnergyTrace { rows }
    }

    #[test]
    fn strict_peaks() {
        assert_eq!(find_peaks(&[0.0, 1.0, 0.0, 2.0, 2.0, 1.0, 3.0, 1.0]), vec![1, 6]);
        assert!(find_peaks(&[1.0; 10]).is_empty());
        assert!(find_peaks(&[1.0, 2.0]).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..1.0)).collect();
        let p = find_peaks(&xs);
        assert!(p.windows(2).all(|w| w[1] >= w[0] + 2));
    }

    #[test]
    fn recovers_synthetic_rate() {
        let tr = trace_of(|t| (-0.1533 * t).exp() * (1.4 * t).cos().abs(), 40.0, 1e-3);
        let fit = fit_damping_rate(&tr, (0.0, 40.0)).unwrap();
        assert!((fit.gamma + 0.1533).abs() < 1e-3, "{}", fit.gamma);
        assert!(fit.peaks.len() >= 3);
        assert!(fit.peaks.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn undamped_oscillation_has_zero_rate() {
        let tr = trace_of(|t| 0.7 * (2.0 * core::f64::consts::PI * t).sin().abs() + 0.1, 30.0, 1e-3);
        let fit = fit_damping_rate(&tr, (0.0, 30.0)).unwrap();
        assert!(fit.gamma.abs() < 1e-9);
        let flat = trace_of(|_| 0.5, 10.0, 0.01);
        assert!(matches!(fit_damping_rate(&flat, (0.0, 10.0)), Err(Error::InsufficientPeaks { found: 0 })));
    }

    #[test]
    fn fit_is_scale_invariant() {
        let f = |t: f64| (-0.08 * t).exp() * (1.1 * t).cos().abs() * (1.0 + 0.05 * (0.3 * t).sin());
        let a = fit_damping_rate(&trace_of(f, 30.0, 1e-3), (0.0, 30.0)).unwrap();
        let b = fit_damping_rate(&trace_of(|t| 37.0 * f(t), 30.0, 1e-3), (0.0, 30.0)).unwrap();
        assert!((a.gamma - b.gamma).abs() < 1e-12);
        assert_eq!(a.peaks.len(), b.peaks.len());
    }

    #[test]
    fn extrapolation_on_a_line() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| (h, -0.15 + 2.0 * h)).collect();
        let fit = extrapolate_rate(&pts).unwrap();
        assert!((fit.gamma0 + 0.15).abs() < 1e-13);
        assert!((fit.gamma1 - 2.0).abs() < 1e-13);
        assert!(fit.residual < 1e-13);
        assert!(matches!(extrapolate_rate(&pts[..2]), Err(Error::InsufficientPoints { .. })));
        let dup = [(0.1, 1.0), (0.2, 2.0), (0.1, 1.5)];
        assert!(matches!(extrapolate_rate(&dup), Err(Error::DuplicateSpacing(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let (g0, g1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-5.0..5.0));
            let pts: Vec<(f64, f64)> = (0..rng.gen_range(3..8))
                .map(|i| {
                    let h = 0.01 * (i + 1) as f64 + rng.gen_range(0.0..0.005);
                    (h, g0 + g1 * h)
                })
                .collect();
            let fit = extrapolate_rate(&pts).unwrap();
            assert!((fit.gamma0 - g0).abs() < 1e-13 && (fit.gamma1 - g1).abs() < 1e-11);
        }
    }

    #[test]
    fn moment_convergence_on_exact_ansatz() {
        let rates: Vec<(usize, f64)> = (0..6).map(|i| {
            let m = 10 + 2 * i;
            (m, -0.15 + 0.01 * 2f64.powi(-(m as i32)))
        }).collect();
        let mc = moment_convergence(&rates).unwrap();
        assert_eq!(mc.log_differences.len(), 5);
        assert!((mc.slope + 2f64.ln()).abs() < 1e-9);
        assert!(mc.residual < 1e-9);

        let flat = [(10, -0.1), (12, -0.1), (14, -0.1)];
        assert!(matches!(moment_convergence(&flat), Err(Error::NotMonotone)));
        let gap = [(10, -0.1), (12, -0.2), (15, -0.25)];
        assert!(matches!(moment_convergence(&gap), Err(Error::NotArithmetic)));
        let zig = [(10, -0.1), (12, -0.2), (14, -0.15)];
        assert!(matches!(moment_convergence(&zig), Err(Error::NotMonotone)));
    }

    #[test]
    fn recurrence_bracket() {
        let env = |t: f64| (-0.1 * t).exp() * (1.4 * t).cos().abs();
        let clean = trace_of(env, 60.0, 1e-3);
        let fit = fit_damping_rate(&clean, (0.0, 30.0)).unwrap();
        assert!(matches!(detect_recurrence(&clean, &fit, 10.0), Err(Error::NoRecurrence)));

        let bumped = trace_of(|t| env(t) + if t >= 40.0 { (1.4 * t).cos().abs() } else { 0.0 }, 60.0, 1e-3);
        let fit = fit_damping_rate(&bumped, (0.0, 30.0)).unwrap();
        let (lo, hi) = detect_recurrence(&bumped, &fit, 10.0).unwrap();
        assert!(lo < 40.0 && 40.0 <= hi, "({lo}, {hi})");
        assert!(detect_recurrence(&bumped, &fit, 1.0).is_err());

        let w = auto_window(&bumped, 10.0);
        assert!(w.1 < 40.0 && w.1 > 35.0, "{w:?}");
        let w = auto_window(&clean, 10.0);
        assert_eq!(w.1, 60.0);
    }

    #[test]
    fn correlation_of_lines() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&x, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-14);
        assert!((correlation(&x, &[8.0, 6.0, 4.0, 2.0]) + 1.0).abs() < 1e-14);
    }
}
