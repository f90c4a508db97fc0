//! Adaptive Dormand-Prince 5(4) integration of the mean-field equations.
//!
//! After every accepted step the atomic matrix is re-symmetrized and, unless
//! disabled, its spectrum is restored to that of the initial state. The flow
//! is unitary on the atoms, so this projection only removes integration error
//! from the invariants `Tr rho^n`.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use super::{eom_rhs, MeanFieldODEState, STATE_DIM};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorControls {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Output sampling interval; steps are shortened to land on sample times.
    pub stride: f64,
    /// Restore the initial spectrum of the atomic matrix after each step.
    pub project_invariants: bool,
    /// Abort when the relative Casimir drift exceeds this value.
    pub drift_limit: Option<f64>,
    pub min_step: f64,
    pub max_steps: u64,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: 0.1,
            stride: 0.1,
            project_invariants: true,
            drift_limit: None,
            min_step: 1e-12,
            max_steps: u64::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationStats {
    pub final_time: f64,
    pub final_state: MeanFieldODEState,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// Largest relative deviation of `(Tr rho, Tr rho^2, Tr rho^3)` from
    /// their initial values along the stored trajectory.
    pub max_casimir_drift: f64,
    pub max_hermiticity_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldODEState>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// The system is autonomous, so the stage times c_i are not needed.
type Vec20 = [f64; STATE_DIM];

fn rhs(x: &Vec20, p: &ModelParams) -> Vec20 {
    eom_rhs(&MeanFieldODEState::from_array(x), p).to_array()
}

fn axpy(base: &Vec20, h: f64, terms: &[(f64, &Vec20)]) -> Vec20 {
    let mut out = *base;
    for (c, k) in terms {
        let w = h * c;
        for i in 0..STATE_DIM {
            out[i] += w * k[i];
        }
    }
    out
}

fn relative_drift(c: [f64; 3], c0: [f64; 3]) -> f64 {
    (0..3).fold(0.0_f64, |m, i| m.max((c[i] - c0[i]).abs() / c0[i].abs().max(f64::MIN_POSITIVE)))
}

/// Hermitian part of the atomic matrix with its spectrum replaced by
/// `target` (ascending).
fn project(s: &mut MeanFieldODEState, target: Option<&[f64; 3]>) {
    let half = C64::new(0.5, 0.0);
    let herm = (s.lambda_exp + s.lambda_exp.adjoint()) * half;
    s.lambda_exp = match target {
        None => herm,
        Some(t) => {
            let eig = nalgebra::linalg::SymmetricEigen::new(herm);
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let mut out = Matrix3::<C64>::zeros();
            for (k, &i) in order.iter().enumerate() {
                let v: Vector3<C64> = eig.eigenvectors.column(i).into_owned();
                out += v * v.adjoint() * C64::new(t[k], 0.0);
            }
            out
        }
    };
}

fn spectrum(s: &MeanFieldODEState) -> [f64; 3] {
    let half = C64::new(0.5, 0.0);
    let herm = (s.lambda_exp + s.lambda_exp.adjoint()) * half;
    let ev = nalgebra::linalg::SymmetricEigen::new(herm).eigenvalues;
    let mut v = [ev[0], ev[1], ev[2]];
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Integrates from `t0` to `t_end`, calling `observe(t, state)` at `t0` and
/// at every multiple of the stride after it (and at `t_end`).
pub fn integrate_observe<F>(
    s0: &MeanFieldODEState,
    p: &ModelParams,
    t0: f64,
    t_end: f64,
    controls: &IntegratorControls,
    mut observe: F,
) -> Result<IntegrationStats>
where
    F: FnMut(f64, &MeanFieldODEState),
{
    let target = spectrum(s0);
    let c0 = s0.casimirs();
    let mut stats = IntegrationStats {
        final_time: t0,
        final_state: *s0,
        accepted_steps: 0,
        rejected_steps: 0,
        max_casimir_drift: 0.0,
        max_hermiticity_error: s0.hermiticity_error(),
    };
    observe(t0, s0);
    if !(t_end > t0) {
        return Ok(stats);
    }
    let stride = if controls.stride > 0.0 { controls.stride } else { t_end - t0 };
    let mut t = t0;
    let mut x = s0.to_array();
    let mut h = controls.max_step.min(0.01).min(t_end - t0);
    let mut sample = 1u64;
    let mut next_out = (t0 + stride).min(t_end);
    let mut prev_ratio: f64 = 1e-4;

    while t < t_end {
        if stats.accepted_steps + stats.rejected_steps >= controls.max_steps {
            return Err(Error::StepSizeUnderflow(t));
        }
        // `h` is the controller's step; `hs` may be shortened to hit a sample time
        let clipped = t + h >= next_out;
        let hs = if clipped { next_out - t } else { h };
        let k1 = rhs(&x, p);
        let k2 = rhs(&axpy(&x, hs, &[(A21, &k1)]), p);
        let k3 = rhs(&axpy(&x, hs, &[(A31, &k1), (A32, &k2)]), p);
        let k4 = rhs(&axpy(&x, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]), p);
        let k5 = rhs(&axpy(&x, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]), p);
        let k6 = rhs(
            &axpy(&x, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            p,
        );
        let xn = axpy(&x, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(&xn, p);
        let mut err_sq = 0.0;
        for i in 0..STATE_DIM {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = controls.atol + controls.rtol * x[i].abs().max(xn[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / STATE_DIM as f64).sqrt();
        if !err.is_finite() {
            h = hs * 0.2;
            stats.rejected_steps += 1;
            if h < controls.min_step {
                return Err(Error::StepSizeUnderflow(t));
            }
            continue;
        }
        if err <= 1.0 {
            t = if clipped { next_out } else { t + hs };
            let mut s = MeanFieldODEState::from_array(&xn);
            project(&mut s, controls.project_invariants.then_some(&target));
            x = s.to_array();
            stats.accepted_steps += 1;
            stats.max_hermiticity_error = stats.max_hermiticity_error.max(s.hermiticity_error());
            let drift = relative_drift(s.casimirs(), c0);
            stats.max_casimir_drift = stats.max_casimir_drift.max(drift);
            if let Some(limit) = controls.drift_limit {
                if drift > limit {
                    return Err(Error::ConstraintDriftExceeded { t, drift });
                }
            }
            if clipped {
                observe(t, &s);
                sample += 1;
                next_out = (t0 + stride * sample as f64).min(t_end);
                if t_end - next_out < 1e-12 * stride {
                    next_out = t_end;
                }
            }
            // PI step-size controller
            let e = err.max(1e-10);
            let factor = (0.9 * e.powf(-0.7 / 5.0) * prev_ratio.powf(0.4 / 5.0)).clamp(0.2, 5.0);
            prev_ratio = e;
            if !(clipped && factor >= 1.0 && hs < h) {
                h = hs * factor;
            }
            h = h.min(controls.max_step);
        } else {
            stats.rejected_steps += 1;
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < controls.min_step {
                return Err(Error::StepSizeUnderflow(t));
            }
        }
    }
    stats.final_time = t;
    stats.final_state = MeanFieldODEState::from_array(&x);
    Ok(stats)
}

/// Integrates and stores the sampled trajectory.
pub fn integrate(
    s0: &MeanFieldODEState,
    p: &ModelParams,
    t_end: f64,
    controls: &IntegratorControls,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let stats = integrate_observe(s0, p, 0.0, t_end, controls, |t, s| {
        times.push(t);
        states.push(*s);
    })?;
    Ok(Trajectory { times, states, stats })
}
