//! Mean-field equations of motion for the cavity amplitude and the atomic
//! expectation matrix, plus dark states and fidelities.
//!
//! `lambda_exp[(i, j)] = <Lambda_ij> / N`, i.e. the transpose of the
//! single-atom density matrix.

mod attractor;
mod integrate;

pub use attractor::{detect_attractor, fixed_point_report, settle, AttractorControls, AttractorKind, AttractorReport};
pub use integrate::{integrate, integrate_observe, IntegrationStats, IntegratorControls, Trajectory};

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{atom_hamiltonian, wrap, ModelParams};

/// Number of real coordinates of a [`MeanFieldODEState`].
pub const STATE_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldODEState {
    pub alpha: C64,
    pub lambda_exp: Matrix3<C64>,
}

impl MeanFieldODEState {
    /// Empty cavity field `alpha` with every atom in `|0>`.
    pub fn normal(alpha: C64) -> Self {
        Self::from_pure(alpha, [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)])
    }

    /// Product state with every atom in `psi` (normalized here).
    pub fn from_pure(alpha: C64, psi: [C64; 3]) -> Self {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = Vector3::new(psi[0] / norm, psi[1] / norm, psi[2] / norm);
        Self {
            alpha,
            lambda_exp: Matrix3::from_fn(|i, j| v[i].conj() * v[j]),
        }
    }

    /// Single-atom density matrix.
    pub fn density(&self) -> Matrix3<C64> {
        self.lambda_exp.transpose()
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        let mut x = [0.0; STATE_DIM];
        x[0] = self.alpha.re;
        x[1] = self.alpha.im;
        for i in 0..3 {
            for j in 0..3 {
                let z = self.lambda_exp[(i, j)];
                x[2 + 3 * i + j] = z.re;
                x[11 + 3 * i + j] = z.im;
            }
        }
        x
    }

    pub fn from_array(x: &[f64; STATE_DIM]) -> Self {
        Self {
            alpha: C64::new(x[0], x[1]),
            lambda_exp: Matrix3::from_fn(|i, j| C64::new(x[2 + 3 * i + j], x[11 + 3 * i + j])),
        }
    }

    /// Euclidean norm of the real coordinates.
    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.lambda_exp - self.lambda_exp.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `(Tr rho, Tr rho^2, Tr rho^3)`; all equal `1` for a pure state.
    pub fn casimirs(&self) -> [f64; 3] {
        let r = self.density();
        let r2 = r * r;
        [r.trace().re, r2.trace().re, (r2 * r).trace().re]
    }

    /// Cavity field and state seen by the `|0>`-empty inverted family, or
    /// `None` when level `|0>` is populated.
    pub fn inverted_coordinates(&self, tol: f64) -> Option<(f64, f64)> {
        if self.lambda_exp[(0, 0)].re > tol {
            return None;
        }
        let n1 = self.lambda_exp[(1, 1)].re.clamp(0.0, 1.0);
        // <Lambda_12> = psi_1* psi_2 = sqrt(n1 n2) e^{i theta}
        let theta = wrap(self.lambda_exp[(1, 2)].arg(), core::f64::consts::TAU);
        Some((n1, theta))
    }
}

/// Time derivative of the mean-field state.
pub fn eom_rhs(s: &MeanFieldODEState, p: &ModelParams) -> MeanFieldODEState {
    let (sn, cs) = (p.phi().sin(), p.phi().cos());
    let l = &s.lambda_exp;
    let i = C64::i();
    let dalpha = -(i * p.omega() + p.kappa()) * s.alpha
        - i * p.lambda1() * (l[(1, 0)] * cs + l[(0, 1)] * sn)
        - p.lambda2() * (l[(2, 0)] * cs + l[(0, 2)] * sn);
    let ht = atom_hamiltonian(p, s.alpha).transpose();
    let dl = (ht * l - l * ht) * i;
    MeanFieldODEState {
        alpha: dalpha,
        lambda_exp: dl,
    }
}

/// Mean-field energy per atom, `omega |alpha|^2 + Tr(h rho)`; conserved when
/// `kappa = 0`.
pub fn mean_field_energy(s: &MeanFieldODEState, p: &ModelParams) -> f64 {
    let h = atom_hamiltonian(p, s.alpha);
    let tr: C64 = h.component_mul(&s.lambda_exp).iter().sum();
    p.omega() * s.alpha.norm_sqr() + tr.re
}

/// Jacobian of the equations of motion at a pure product state, restricted
/// to the 6-dimensional tangent space `(alpha, z1, z2)` where `z_j` move the
/// atomic state along two unit vectors orthogonal to `psi`. Central
/// differences with step `eps`.
pub fn tangent_jacobian(alpha: C64, psi: [C64; 3], p: &ModelParams, eps: f64) -> DMatrix<f64> {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v = Vector3::new(psi[0] / norm, psi[1] / norm, psi[2] / norm);
    let (e1, e2) = orthonormal_complement(&v);
    let base = MeanFieldODEState::from_pure(alpha, [v[0], v[1], v[2]]);
    let embed = |d: &[f64; 6]| {
        let dpsi = e1 * C64::new(d[2], d[3]) + e2 * C64::new(d[4], d[5]);
        // delta rho = dpsi psi^dag + psi dpsi^dag, delta lambda = delta rho^T
        let drho = dpsi * v.adjoint() + v * dpsi.adjoint();
        MeanFieldODEState {
            alpha: base.alpha + C64::new(d[0], d[1]),
            lambda_exp: base.lambda_exp + drho.transpose(),
        }
    };
    let project = |ds: &MeanFieldODEState| {
        let drho = ds.lambda_exp.transpose();
        let z1 = (e1.adjoint() * drho * v)[(0, 0)];
        let z2 = (e2.adjoint() * drho * v)[(0, 0)];
        [ds.alpha.re, ds.alpha.im, z1.re, z1.im, z2.re, z2.im]
    };
    let mut jac = DMatrix::<f64>::zeros(6, 6);
    for col in 0..6 {
        let mut d = [0.0; 6];
        d[col] = eps;
        let fp = eom_rhs(&embed(&d), p);
        d[col] = -eps;
        let fm = eom_rhs(&embed(&d), p);
        let diff = MeanFieldODEState {
            alpha: (fp.alpha - fm.alpha) / (2.0 * eps),
            lambda_exp: (fp.lambda_exp - fm.lambda_exp) / C64::new(2.0 * eps, 0.0),
        };
        let col_v = project(&diff);
        for row in 0..6 {
            jac[(row, col)] = col_v[row];
        }
    }
    jac
}

fn orthonormal_complement(v: &Vector3<C64>) -> (Vector3<C64>, Vector3<C64>) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()));
    let mut basis: [Vector3<C64>; 2] = [Vector3::zeros(), Vector3::zeros()];
    let mut found = 0;
    for &idx in &order {
        if found == 2 {
            break;
        }
        let mut u = Vector3::<C64>::zeros();
        u[idx] = C64::new(1.0, 0.0);
        u -= v * (v.adjoint() * u)[(0, 0)];
        for b in basis.iter().take(found) {
            u -= b * (b.adjoint() * u)[(0, 0)];
        }
        let n = u.norm();
        if n > 1e-8 {
            basis[found] = u / C64::new(n, 0.0);
            found += 1;
        }
    }
    (basis[0], basis[1])
}

/// Collective dark state: every atom in `i sin(nu)|1> + cos(nu)|2>` with
/// `tan(nu) = lambda2 / lambda1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub nu: f64,
    pub single_atom_density: Matrix3<C64>,
    /// Population of `|1>`, `sin^2(nu)`.
    pub n1_frac: f64,
    /// Relative phase in the inverted parametrization
    /// `sqrt(n1)|1> + sqrt(1 - n1) e^{i theta}|2>`.
    pub theta: f64,
}

impl TargetState {
    /// The target for an arbitrary mixing angle.
    pub fn with_nu(nu: f64) -> Self {
        let psi = Vector3::new(C64::new(0.0, 0.0), C64::new(0.0, nu.sin()), C64::new(nu.cos(), 0.0));
        Self {
            nu,
            single_atom_density: psi * psi.adjoint(),
            n1_frac: nu.sin().powi(2),
            theta: 1.5 * core::f64::consts::PI,
        }
    }

    /// The corresponding mean-field state with an empty cavity.
    pub fn as_state(&self) -> MeanFieldODEState {
        MeanFieldODEState {
            alpha: C64::new(0.0, 0.0),
            lambda_exp: self.single_atom_density.transpose(),
        }
    }
}

pub fn dark_state(p: &ModelParams) -> Result<TargetState> {
    if p.lambda1() == 0.0 && p.lambda2() == 0.0 {
        return Err(Error::BothCouplingsZero);
    }
    Ok(TargetState::with_nu(p.lambda2().atan2(p.lambda1())))
}

/// How the overlap of single-atom states is lifted to the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityMap {
    /// `Tr(rho_s rho_d)` of the single-atom states.
    SingleAtom,
    /// The product-state overlap, the single-atom value raised to `N`.
    ManyBody { n_atoms: f64 },
}

/// `Tr(rho_s rho_d)` for a converged steady state.
pub fn fidelity(steady: &AttractorReport, target: &TargetState, map: FidelityMap) -> Result<f64> {
    match (steady.kind, steady.fixed_state) {
        (AttractorKind::FixedPoint, Some(s)) => Ok(state_fidelity(&s, target, map)),
        _ => Err(Error::NotConverged),
    }
}

/// Overlap of an arbitrary mean-field state with the target.
pub fn state_fidelity(s: &MeanFieldODEState, target: &TargetState, map: FidelityMap) -> f64 {
    let f = (s.density() * target.single_atom_density).trace().re.clamp(0.0, 1.0);
    match map {
        FidelityMap::SingleAtom => f,
        FidelityMap::ManyBody { n_atoms } => f.powf(n_atoms),
    }
}
