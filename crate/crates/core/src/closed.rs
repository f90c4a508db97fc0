//! Closed-system mean-field phases: the energy landscape, its extrema,
//! Hopfield-Bogoliubov spectra with symplectic norms, and the phase label of
//! a parameter point.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fluctuations::{build_ns_form, QuadraticForm, MIN_HP_K};
use crate::linalg::{clusters, eigenspace, eigenvalues, hermitian_eigen, max_abs};
use crate::model::{derived_scalars, effective_fields, ModelParams};

/// Imaginary parts below this count as real frequencies.
pub const DEFAULT_SPECTRUM_TOL: f64 = 1e-6;

/// Residual bound for the equilibrium equations.
pub const EQUILIBRIUM_TOL: f64 = 1e-10;

/// Mean-field amplitudes per `sqrt(N)`: the cavity field and the two
/// Holstein-Primakoff atomic amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParams {
    pub alpha: C64,
    pub beta1: C64,
    pub beta2: C64,
}

impl OrderParams {
    pub fn normal() -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            alpha: z,
            beta1: z,
            beta2: z,
        }
    }

    /// `1 - |beta1|^2 - |beta2|^2`, the ground-level population.
    pub fn k(&self) -> f64 {
        1.0 - self.beta1.norm_sqr() - self.beta2.norm_sqr()
    }

    /// Single-atom state vector `(sqrt(k), beta1, beta2)`.
    pub fn atom_state(&self) -> [C64; 3] {
        [C64::new(self.k().max(0.0).sqrt(), 0.0), self.beta1, self.beta2]
    }

    /// Order parameters under `a -> -a`, which maps fixed points to fixed points.
    pub fn parity_partner(&self) -> Self {
        Self {
            alpha: -self.alpha,
            beta1: -self.beta1,
            beta2: -self.beta2,
        }
    }
}

/// Mean-field energy per atom of the product state described by `op`.
pub fn me_energy(p: &ModelParams, op: &OrderParams) -> f64 {
    let k = op.k();
    let m = effective_fields(p, op.alpha);
    let g = 2.0 * (m[0] * op.beta1.conj() + m[1] * op.beta2.conj()).re;
    p.omega() * op.alpha.norm_sqr()
        + p.omega0() * (op.beta1.norm_sqr() + op.beta2.norm_sqr())
        + k.max(0.0).sqrt() * g
}

/// Energy per atom after minimizing over the atomic amplitudes at fixed
/// `alpha`; zero at `alpha = 0`, consistent with [`me_energy`].
pub fn me_landscape(alpha: C64, p: &ModelParams) -> Result<f64> {
    let d = derived_scalars(p);
    let q = 8.0 * d.b_param * (alpha * alpha).re + 4.0 * d.l_param * alpha.norm_sqr();
    let w0 = p.omega0();
    let arg = q + w0 * w0;
    if !(arg > 0.0) {
        return Err(Error::DomainError(arg));
    }
    Ok(p.omega() * alpha.norm_sqr() + 0.5 * w0 - 0.5 * arg.sqrt())
}

/// `(2|B| + L)^2 - omega^2 omega0^2`: negative in the normal phase.
pub fn np_boundary_residual(p: &ModelParams) -> f64 {
    let d = derived_scalars(p);
    let a = 2.0 * d.b_param.abs() + d.l_param;
    a * a - (p.omega() * p.omega0()).powi(2)
}

/// Superradiant `|alpha|`.
pub fn sp_amplitude(p: &ModelParams) -> Result<f64> {
    let r = np_boundary_residual(p);
    if r < 0.0 {
        return Err(Error::NotSuperradiant(r));
    }
    let d = derived_scalars(p);
    let a = 2.0 * d.b_param.abs() + d.l_param;
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok((r / (4.0 * a * p.omega() * p.omega())).sqrt())
}

/// Negated Wirtinger gradient `-(dE/dbeta1*, dE/dbeta1, dE/dbeta2*, dE/dbeta2)`
/// of [`me_energy`]; vanishes at equilibrium.
pub fn equilibrium_residuals(p: &ModelParams, op: &OrderParams) -> [C64; 4] {
    let k = op.k();
    let sk = k.sqrt();
    let m = effective_fields(p, op.alpha);
    let b = [op.beta1, op.beta2];
    let g = 2.0 * (m[0] * b[0].conj() + m[1] * b[1].conj()).re;
    let r = |mu: usize| b[mu] * p.omega0() + m[mu] * sk - b[mu] * (g / (2.0 * sk));
    let (r1, r2) = (r(0), r(1));
    [-r1, -r1.conj(), -r2, -r2.conj()]
}

/// Atomic amplitudes minimizing the energy at cavity amplitude `alpha`.
///
/// The optimum is the lowest eigenvector of the single-atom mean-field
/// Hamiltonian, which has a closed form; the phase is fixed by a real
/// positive ground-level amplitude. The result is checked against the
/// equilibrium equations.
pub fn solve_order_params(alpha: C64, p: &ModelParams) -> Result<OrderParams> {
    let m = effective_fields(p, alpha);
    let msq = m[0].norm_sqr() + m[1].norm_sqr();
    if msq == 0.0 {
        return Ok(OrderParams {
            alpha,
            ..OrderParams::normal()
        });
    }
    let w0 = p.omega0();
    let r = (w0 * w0 + 4.0 * msq).sqrt();
    let scale = -(2.0 / (r * (r + w0))).sqrt();
    let op = OrderParams {
        alpha,
        beta1: m[0] * scale,
        beta2: m[1] * scale,
    };
    let k = op.k();
    if k < MIN_HP_K {
        return Err(Error::UnphysicalState(k));
    }
    let res = equilibrium_residuals(p, &op)
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let scale = 1.0 + msq.sqrt() + w0;
    if res > EQUILIBRIUM_TOL * scale {
        return Err(Error::NoConvergence(res));
    }
    Ok(op)
}

/// Excitation frequencies and symplectic norms of a quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Eigenvalues of the dynamical matrix sorted by (Re, Im).
    pub frequencies: Vec<C64>,
    /// `+1` (particle-like) or `-1` (hole-like) for real modes, `0` for
    /// complex modes whose symplectic norm vanishes.
    pub symplectic_norms: Vec<f64>,
    pub is_real: bool,
    pub max_abs_imag: f64,
}

impl SpectrumResult {
    /// The lowest non-negative real frequency and its norm.
    pub fn soft_mode(&self) -> Option<(f64, f64)> {
        self.frequencies
            .iter()
            .zip(&self.symplectic_norms)
            .filter(|(w, n)| w.re >= 0.0 && **n != 0.0)
            .map(|(w, n)| (w.re, *n))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// The smallest `|Re w|` over all modes.
    pub fn min_abs_real(&self) -> f64 {
        self.frequencies.iter().fold(f64::INFINITY, |m, w| m.min(w.re.abs()))
    }
}

/// Eigenfrequencies of the dynamical matrix with the sign of `v^dag I_z v`
/// for each mode, `I_z = diag(1_n, -1_n)`.
pub fn hb_spectrum(q: &QuadraticForm, tol: f64) -> Result<SpectrumResult> {
    let d = q.dynamical_matrix();
    let n = q.modes();
    let freqs = eigenvalues(&d)?;
    let scale = max_abs(&d).max(1.0);
    let mut norms = alloc::vec![0.0; freqs.len()];
    let iz = DVector::<C64>::from_fn(2 * n, |i, _| C64::new(if i < n { 1.0 } else { -1.0 }, 0.0));
    for cluster in clusters(&freqs, 1e-7 * scale) {
        let mean = cluster.iter().map(|&i| freqs[i]).sum::<C64>() / (cluster.len() as f64);
        let basis = eigenspace(&d, mean, cluster.len());
        if basis.len() != cluster.len() {
            return Err(Error::EigensolverFailure);
        }
        let m = basis.len();
        let g = DMatrix::<C64>::from_fn(m, m, |a, b| {
            basis[a]
                .iter()
                .zip(basis[b].iter())
                .zip(iz.iter())
                .map(|((x, y), s)| x.conj() * s * y)
                .sum()
        });
        let (vals, _) = hermitian_eigen(&g);
        for (slot, &idx) in cluster.iter().enumerate() {
            let v = vals[slot];
            norms[idx] = if v.abs() > 1e-6 { v.signum() } else { 0.0 };
        }
    }
    let max_abs_imag = freqs.iter().fold(0.0_f64, |m, w| m.max(w.im.abs()));
    Ok(SpectrumResult {
        is_real: max_abs_imag < tol,
        max_abs_imag,
        frequencies: freqs,
        symplectic_norms: norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClosedPhase {
    Np,
    /// Real cavity field, `B > 0`.
    Sp1,
    /// Imaginary cavity field, `B < 0`.
    Sp2,
    /// Superradiant ring on the `B = 0` line with a free field phase.
    SpU1,
    /// Spectrally stable empty-cavity state coexisting with a superradiant one.
    ENp,
}

impl ClosedPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            ClosedPhase::Np => "NP",
            ClosedPhase::Sp1 => "SP1",
            ClosedPhase::Sp2 => "SP2",
            ClosedPhase::SpU1 => "SPU1",
            ClosedPhase::ENp => "eNP",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEntry {
    pub phase: ClosedPhase,
    pub order_params: OrderParams,
    /// Energy per atom.
    pub energy: f64,
    pub spectrum: SpectrumResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedPhasePoint {
    /// Stable phases in label order.
    pub stable: Vec<PhaseEntry>,
    pub np_residual: f64,
    /// Spectrum around the empty-cavity state whether or not it is stable.
    pub np_spectrum: SpectrumResult,
}

impl ClosedPhasePoint {
    pub fn phases(&self) -> Vec<ClosedPhase> {
        self.stable.iter().map(|e| e.phase).collect()
    }
    pub fn has(&self, phase: ClosedPhase) -> bool {
        self.stable.iter().any(|e| e.phase == phase)
    }
    pub fn entry(&self, phase: ClosedPhase) -> Option<&PhaseEntry> {
        self.stable.iter().find(|e| e.phase == phase)
    }
}

/// `|B|` below `BALANCE_TOL * L` is treated as the U(1) line.
pub const BALANCE_TOL: f64 = 1e-12;

/// Superradiant candidate from the closed-form solutions, if any.
pub fn sp_candidate(p: &ModelParams) -> Option<(ClosedPhase, C64)> {
    if np_boundary_residual(p) <= 0.0 {
        return None;
    }
    let d = derived_scalars(p);
    let x = sp_amplitude(p).ok()?;
    if d.b_param.abs() <= BALANCE_TOL * d.l_param {
        Some((ClosedPhase::SpU1, C64::new(x, 0.0)))
    } else if d.b_param > 0.0 {
        Some((ClosedPhase::Sp1, C64::new(x, 0.0)))
    } else {
        Some((ClosedPhase::Sp2, C64::new(0.0, x)))
    }
}

pub fn classify_closed(p: &ModelParams, tol: f64) -> Result<ClosedPhasePoint> {
    let residual = np_boundary_residual(p);
    let np_op = OrderParams::normal();
    let np_spectrum = hb_spectrum(&build_ns_form(p, &np_op)?, tol)?;
    let mut stable = Vec::new();
    if np_spectrum.is_real {
        stable.push(PhaseEntry {
            phase: if residual > 0.0 { ClosedPhase::ENp } else { ClosedPhase::Np },
            order_params: np_op,
            energy: 0.0,
            spectrum: np_spectrum.clone(),
        });
    }
    if let Some((phase, alpha)) = sp_candidate(p) {
        let op = solve_order_params(alpha, p)?;
        let spectrum = hb_spectrum(&build_ns_form(p, &op)?, tol)?;
        if spectrum.is_real {
            stable.push(PhaseEntry {
                phase,
                order_params: op,
                energy: me_landscape(alpha, p)?,
                spectrum,
            });
        }
    }
    stable.sort_by_key(|e| e.phase);
    Ok(ClosedPhasePoint {
        stable,
        np_residual: residual,
        np_spectrum,
    })
}
