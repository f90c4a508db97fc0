//! Fixed-point / limit-cycle classification of trajectory tails.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use super::integrate::{integrate_observe, IntegratorControls, Trajectory};
use super::MeanFieldODEState;
use crate::error::Result;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorControls {
    /// Time discarded before analysis.
    pub transient: f64,
    /// Length of each of the two analysis windows.
    pub window: f64,
    /// Fixed point when every sample stays within `fp_tol * |state|` of the last.
    pub fp_tol: f64,
    /// Minimum half peak-to-peak amplitude relative to `|state|` for a cycle.
    pub amplitude_floor: f64,
    /// Relative agreement required between the two window periods.
    pub period_tol: f64,
    /// Relative agreement required between the RMS amplitudes of the two
    /// windows.
    pub amplitude_tol: f64,
    /// Allowed scatter, relative to the amplitude, of the maxima that
    /// occupy the same place in successive periods.
    pub peak_tol: f64,
    /// Integration budget used by [`settle`].
    pub max_time: f64,
}

impl AttractorControls {
    /// Transient `max(20 / kappa, 1000)`, windows of 500.
    pub fn for_kappa(kappa: f64) -> Self {
        let transient = if kappa > 0.0 { (20.0 / kappa).max(1e3) } else { 1e3 };
        Self {
            transient,
            window: 500.0,
            fp_tol: 1e-6,
            amplitude_floor: 1e-3,
            period_tol: 0.01,
            amplitude_tol: 2e-3,
            peak_tol: 1e-2,
            max_time: transient + 2e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorKind {
    FixedPoint,
    LimitCycle,
    Unresolved,
}

impl AttractorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttractorKind::FixedPoint => "fixed_point",
            AttractorKind::LimitCycle => "limit_cycle",
            AttractorKind::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    pub fixed_state: Option<MeanFieldODEState>,
    pub period: Option<f64>,
    /// Half peak-to-peak amplitude of the dominant observable.
    pub amplitude: Option<f64>,
    /// Start of the analysed windows.
    pub transient_time: f64,
    pub final_state: MeanFieldODEState,
    /// Minimum and maximum `|alpha|` over the analysed windows.
    pub alpha_range: (f64, f64),
}

fn observables(s: &MeanFieldODEState) -> [f64; 4] {
    [s.alpha.re, s.alpha.im, s.alpha.norm_sqr(), s.lambda_exp[(0, 0)].re]
}

/// Period from the first autocorrelation peak after the first zero
/// crossing, refined by a parabola through the peak and its neighbours.
/// Returns `(period, normalized peak height)`.
fn autocorrelation_period(x: &[f64], dt: f64) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 8 {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let r0: f64 = y.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if r0 <= 0.0 {
        return None;
    }
    let max_lag = n / 2;
    let r = |lag: usize| -> f64 {
        let m = n - lag;
        y[..m].iter().zip(&y[lag..]).map(|(a, b)| a * b).sum::<f64>() / (m as f64 * r0)
    };
    let mut vals = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        vals.push(r(lag));
    }
    let zero = vals.iter().position(|&v| v < 0.0)?;
    for lag in zero.max(1)..max_lag {
        if vals[lag] > 0.0 && vals[lag] >= vals[lag - 1] && vals[lag] >= vals[lag + 1] {
            let (a, b, c) = (vals[lag - 1], vals[lag], vals[lag + 1]);
            let den = a - 2.0 * b + c;
            let shift = if den.abs() > 1e-300 { 0.5 * (a - c) / den } else { 0.0 };
            return Some(((lag as f64 + shift.clamp(-0.5, 0.5)) * dt, b));
        }
    }
    None
}

/// RMS deviation from the mean over the largest whole number of periods at
/// the end of `x`.
fn rms_over_periods(x: &[f64], dt: f64, period: f64) -> Option<f64> {
    let span = (x.len() - 1) as f64 * dt;
    let cycles = (span / period).floor();
    if cycles < 2.0 {
        return None;
    }
    let n = ((cycles * period / dt).round() as usize).min(x.len());
    let tail = &x[x.len() - n..];
    let mean = tail.iter().sum::<f64>() / n as f64;
    Some((tail.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt())
}

/// Local maxima of `x`, each refined by a parabola through the sample
/// maximum and its neighbours.
fn refined_peaks(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
        if b > a && b >= c {
            let den = a - 2.0 * b + c;
            out.push(if den < 0.0 { b - (a - c) * (a - c) / (8.0 * den) } else { b });
        }
    }
    out
}

/// Whether the maxima of `x` repeat from one period to the next: with `m`
/// maxima per period, every maximum must lie within `tol` of the one at the
/// same position in the first period. Modulated (quasi-periodic) and
/// drifting oscillations fail this even when their period is well defined.
fn peaks_repeat(x: &[f64], dt: f64, period: f64, tol: f64) -> bool {
    let peaks = refined_peaks(x);
    let cycles = (x.len() - 1) as f64 * dt / period;
    let m = (peaks.len() as f64 / cycles).round() as usize;
    if m == 0 || peaks.len() < 2 * m {
        return false;
    }
    if (peaks.len() as f64 - m as f64 * cycles).abs() > m as f64 + 1.0 {
        return false;
    }
    peaks.iter().enumerate().all(|(i, p)| (p - peaks[i % m]).abs() <= tol)
}

/// Classifies the last two analysis windows of a trajectory.
pub fn detect_attractor(traj: &Trajectory, c: &AttractorControls) -> AttractorReport {
    let last = *traj.states.last().expect("trajectory holds at least the initial state");
    let t_end = *traj.times.last().unwrap();
    let start = (t_end - 2.0 * c.window).max(c.transient);
    let mut report = AttractorReport {
        kind: AttractorKind::Unresolved,
        fixed_state: None,
        period: None,
        amplitude: None,
        transient_time: start,
        final_state: last,
        alpha_range: (last.alpha.norm(), last.alpha.norm()),
    };
    if t_end - start < 2.0 * c.window * (1.0 - 1e-9) {
        return report;
    }
    let first = traj.times.iter().position(|&t| t >= start - 1e-9).unwrap();
    let states = &traj.states[first..];
    let times = &traj.times[first..];
    if states.len() < 16 {
        return report;
    }
    let (amin, amax) = states
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), s| (lo.min(s.alpha.norm()), hi.max(s.alpha.norm())));
    report.alpha_range = (amin, amax);

    let ref_arr = last.to_array();
    let scale = last.norm().max(1.0);
    let max_dev = states
        .iter()
        .map(|s| {
            s.to_array()
                .iter()
                .zip(&ref_arr)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0_f64, f64::max);
    if max_dev <= c.fp_tol * scale {
        report.kind = AttractorKind::FixedPoint;
        report.fixed_state = Some(last);
        return report;
    }

    let mid = times.iter().position(|&t| t >= start + c.window).unwrap_or(times.len() / 2);
    let series: Vec<[f64; 4]> = states.iter().map(observables).collect();
    let spread = |range: &[[f64; 4]], k: usize| {
        let (lo, hi) = range
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o[k]), hi.max(o[k])));
        0.5 * (hi - lo)
    };
    let dominant = (0..4)
        .max_by(|&a, &b| spread(&series, a).total_cmp(&spread(&series, b)))
        .unwrap();
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let (w1, w2) = series.split_at(mid);
    let a1 = spread(w1, dominant);
    let a2 = spread(w2, dominant);
    if a1.min(a2) < c.amplitude_floor * scale {
        return report;
    }
    let sig = |w: &[[f64; 4]]| w.iter().map(|o| o[dominant]).collect::<Vec<f64>>();
    let (s1, s2) = (sig(w1), sig(w2));
    let (p1, p2) = match (autocorrelation_period(&s1, dt), autocorrelation_period(&s2, dt)) {
        (Some(a), Some(b)) => (a, b),
        _ => return report,
    };
    if p1.1 < 0.8 || p2.1 < 0.8 {
        return report;
    }
    if (p1.0 - p2.0).abs() > c.period_tol * p1.0.max(p2.0) {
        return report;
    }
    // Stationarity: RMS amplitudes over whole periods at the end of each
    // window must agree, which rejects slowly growing or decaying spirals.
    let period = 0.5 * (p1.0 + p2.0);
    let (r1, r2) = match (rms_over_periods(&s1, dt, period), rms_over_periods(&s2, dt, period)) {
        (Some(a), Some(b)) => (a, b),
        _ => return report,
    };
    if (r1 - r2).abs() > c.amplitude_tol * r1.max(r2) {
        return report;
    }
    let whole: Vec<f64> = series.iter().map(|o| o[dominant]).collect();
    if !peaks_repeat(&whole, dt, period, c.peak_tol * a1.max(a2)) {
        return report;
    }
    report.kind = AttractorKind::LimitCycle;
    report.period = Some(period);
    report.amplitude = Some(a2);
    report
}

/// Integrates from `s0`, analyses two windows after the transient, and keeps
/// extending by further window pairs while the result is unresolved and the
/// time budget allows.
pub fn settle(
    s0: &MeanFieldODEState,
    p: &ModelParams,
    integ: &IntegratorControls,
    c: &AttractorControls,
) -> Result<AttractorReport> {
    let pre = integrate_observe(s0, p, 0.0, c.transient, integ, |_, _| {})?;
    let mut t = pre.final_time;
    let mut state = pre.final_state;
    loop {
        let mut times = Vec::new();
        let mut states = Vec::new();
        let stats = integrate_observe(&state, p, t, t + 2.0 * c.window, integ, |tt, s| {
            times.push(tt);
            states.push(*s);
        })?;
        let traj = Trajectory { times, states, stats };
        let local = AttractorControls { transient: t, ..*c };
        let report = detect_attractor(&traj, &local);
        t = stats.final_time;
        state = stats.final_state;
        if report.kind != AttractorKind::Unresolved || t + 2.0 * c.window > c.max_time {
            return Ok(report);
        }
    }
}

/// Constant-state helper used by tests and callers that already hold a
/// converged state.
pub fn fixed_point_report(s: MeanFieldODEState) -> AttractorReport {
    AttractorReport {
        kind: AttractorKind::FixedPoint,
        fixed_state: Some(s),
        period: None,
        amplitude: None,
        transient_time: 0.0,
        final_state: s,
        alpha_range: (s.alpha.norm(), s.alpha.norm()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IntegrationStats;
    use num_complex::Complex64 as C64;

    fn synthetic<F: Fn(f64) -> C64>(f: F, t_end: f64, dt: f64) -> Trajectory {
        let n = (t_end / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let states: Vec<MeanFieldODEState> = times.iter().map(|&t| MeanFieldODEState::normal(f(t))).collect();
        let last = *states.last().unwrap();
        Trajectory {
            times,
            states,
            stats: IntegrationStats {
                final_time: t_end,
                final_state: last,
                accepted_steps: 0,
                rejected_steps: 0,
                max_casimir_drift: 0.0,
                max_hermiticity_error: 0.0,
            },
        }
    }

    fn controls() -> AttractorControls {
        AttractorControls {
            transient: 100.0,
            window: 500.0,
            ..AttractorControls::for_kappa(0.1)
        }
    }

    #[test]
    fn constant_is_fixed_point() {
        let tr = synthetic(|_| C64::new(0.2, 0.1), 1200.0, 0.5);
        let r = detect_attractor(&tr, &controls());
        assert_eq!(r.kind, AttractorKind::FixedPoint);
        assert_eq!(r.fixed_state.unwrap().alpha, C64::new(0.2, 0.1));
    }

    #[test]
    fn sinusoid_period_within_one_percent() {
        for period in [3.7, 17.0, 61.0] {
            for dt in [0.1, 0.05] {
                let w = core::f64::consts::TAU / period;
                let tr = synthetic(|t| C64::new(0.3 + 0.05 * (w * t).sin(), 0.0), 1200.0, dt);
                let r = detect_attractor(&tr, &controls());
                assert_eq!(r.kind, AttractorKind::LimitCycle, "period {period}");
                assert!((r.period.unwrap() - period).abs() < 0.01 * period);
                assert!((r.amplitude.unwrap() - 0.05).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn decaying_spiral_is_not_a_cycle() {
        let tr = synthetic(|t| C64::new(0.3 + 0.05 * (-1e-3 * t).exp() * t.sin(), 0.0), 1200.0, 0.1);
        assert_eq!(detect_attractor(&tr, &controls()).kind, AttractorKind::Unresolved);
    }

    #[test]
    fn slowly_growing_spiral_is_not_a_cycle() {
        // one percent growth per window
        let tr = synthetic(|t| C64::new(0.3 + 0.05 * (2e-5 * t).exp() * (2.0 * t).sin(), 0.0), 1200.0, 0.1);
        assert_eq!(detect_attractor(&tr, &controls()).kind, AttractorKind::Unresolved);
    }

    #[test]
    fn modulated_oscillation_is_not_a_cycle() {
        let w2 = core::f64::consts::TAU / 37.3;
        let tr = synthetic(
            |t| C64::new(0.3 + 0.05 * (1.0 + 0.2 * (w2 * t).sin()) * (3.1 * t).sin(), 0.0),
            1200.0,
            0.1,
        );
        assert_eq!(detect_attractor(&tr, &controls()).kind, AttractorKind::Unresolved);
    }

    #[test]
    fn cycle_with_two_maxima_per_period() {
        for dt in [0.1, 0.05] {
            let tr = synthetic(|t| C64::new(0.3 + 0.05 * (t.sin() + 0.8 * (2.0 * t + 0.3).sin()), 0.0), 1200.0, dt);
            let r = detect_attractor(&tr, &controls());
            assert_eq!(r.kind, AttractorKind::LimitCycle, "dt {dt}");
            assert!((r.period.unwrap() - core::f64::consts::TAU).abs() < 0.01 * core::f64::consts::TAU);
        }
    }

    #[test]
    fn short_trajectory_is_unresolved() {
        let tr = synthetic(|_| C64::new(0.2, 0.0), 500.0, 0.5);
        assert_eq!(detect_attractor(&tr, &controls()).kind, AttractorKind::Unresolved);
    }

    #[test]
    fn tiny_oscillation_below_floor_is_unresolved() {
        let tr = synthetic(|t| C64::new(0.3 + 1e-5 * t.sin(), 0.0), 1200.0, 0.1);
        assert_eq!(detect_attractor(&tr, &controls()).kind, AttractorKind::Unresolved);
    }
}
