//! Quadratic fluctuation Hamiltonians `h2 = a^dag H a + a K a + a^dag K* a^dag`
//! around mean-field states.
//!
//! Around normal and superradiant states the basis is `(c, d1, d2)`: the
//! cavity fluctuation and the two Holstein-Primakoff atomic modes. Around
//! inverted states (level `|0>` empty) the basis is `(c, d0)`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::closed::OrderParams;
use crate::error::{Error, Result};
use crate::model::{effective_fields, ModelParams};

/// Holstein-Primakoff states with `k` below this are rejected.
pub const MIN_HP_K: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Three modes `(c, d1, d2)` around a state with level `|0>` occupied.
    NormalSuperradiant,
    /// Two modes `(c, d0)` around a state with level `|0>` empty.
    Inverted,
}

/// The `(H, K)` pair of a bosonic quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    h: DMatrix<C64>,
    k: DMatrix<C64>,
    sector: Sector,
}

impl QuadraticForm {
    /// Validates `H = H^dag` and `K = K^T` to `1e-12` relative.
    pub fn new(h: DMatrix<C64>, k: DMatrix<C64>, sector: Sector) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || k.nrows() != n || k.ncols() != n {
            return Err(Error::InvalidParams("H and K must be square and of equal size"));
        }
        let expected = match sector {
            Sector::NormalSuperradiant => 3,
            Sector::Inverted => 2,
        };
        if n != expected {
            return Err(Error::InvalidParams("matrix size does not match the sector"));
        }
        if h.iter().chain(k.iter()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParams("non-finite fluctuation matrix entry"));
        }
        let scale = h.iter().chain(k.iter()).fold(1.0_f64, |m, z| m.max(z.norm()));
        let herm = (&h - h.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let sym = (&k - k.transpose()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if herm > SYMMETRY_TOL * scale {
            return Err(Error::InvalidParams("H is not Hermitian"));
        }
        if sym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidParams("K is not symmetric"));
        }
        Ok(Self { h, k, sector })
    }

    pub fn h(&self) -> &DMatrix<C64> {
        &self.h
    }
    pub fn k(&self) -> &DMatrix<C64> {
        &self.k
    }
    pub fn sector(&self) -> Sector {
        self.sector
    }
    pub fn modes(&self) -> usize {
        self.h.nrows()
    }

    /// Heisenberg-equation generator `((H, 2K*), (-2K, -H*))` acting on
    /// `(a, a^dag)`; its eigenvalues are the excitation frequencies.
    pub fn dynamical_matrix(&self) -> DMatrix<C64> {
        let n = self.modes();
        let two = C64::new(2.0, 0.0);
        let mut d = DMatrix::<C64>::zeros(2 * n, 2 * n);
        d.view_mut((0, 0), (n, n)).copy_from(&self.h);
        d.view_mut((0, n), (n, n)).copy_from(&(self.k.map(|z| z.conj()) * two));
        d.view_mut((n, 0), (n, n)).copy_from(&(&self.k * (-two)));
        d.view_mut((n, n), (n, n)).copy_from(&(-self.h.map(|z| z.conj())));
        d
    }
}

/// Photon-atom mixing auxiliary for the `d_mu` mode coupled through `lambda`,
/// evaluated at mixing angle `angle`.
pub fn j_aux(beta_own: C64, k: f64, lambda: f64, angle: f64) -> C64 {
    let (s, c) = (angle.sin(), angle.cos());
    let bc = beta_own.conj();
    (-(bc * bc) * c - s * beta_own.norm_sqr() + 2.0 * s * k) * (lambda / (2.0 * k.sqrt()))
}

/// Cross-level photon-atom auxiliary. `first` selects the `beta1* beta2` or
/// `beta1 beta2*` ordering of the sine term.
pub fn g_aux(beta1: C64, beta2: C64, k: f64, lambda: f64, angle: f64, first: bool) -> C64 {
    let (s, c) = (angle.sin(), angle.cos());
    let i = C64::i();
    let cross = if first { beta2.conj() * beta1 } else { beta1.conj() * beta2 };
    (i * c * beta2.conj() * beta1.conj() + i * s * cross) * (lambda / (2.0 * k.sqrt()))
}

/// Scaled couplings of an inverted state with `|1>` population `n1_frac`:
/// `eta1 = sqrt(n1) lambda1`, `eta2 = sqrt(1 - n1) lambda2`.
pub fn etas(p: &ModelParams, n1_frac: f64) -> (f64, f64) {
    let n1 = n1_frac.clamp(0.0, 1.0);
    (n1.sqrt() * p.lambda1(), (1.0 - n1).sqrt() * p.lambda2())
}

/// Fluctuation form around a normal or superradiant Holstein-Primakoff state.
pub fn build_ns_form(p: &ModelParams, op: &OrderParams) -> Result<QuadraticForm> {
    let k = op.k();
    if !(k > MIN_HP_K) {
        return Err(Error::UnphysicalState(k));
    }
    let (b1, b2) = (op.beta1, op.beta2);
    let (phi, l1, l2) = (p.phi(), p.lambda1(), p.lambda2());
    let q = core::f64::consts::FRAC_PI_2 - phi;
    let i = C64::i();
    let half = C64::new(0.5, 0.0);

    let j1 = j_aux(b1, k, l1, phi);
    let j2 = j_aux(b2, k, l2, phi);
    let g1 = g_aux(b1, b2, k, l1, phi, true);
    let g2 = g_aux(b1, b2, k, l2, phi, false);
    let j1q = j_aux(b1, k, l1, q);
    let j2q = j_aux(b2, k, l2, q);
    let g1q = g_aux(b1, b2, k, l1, q, true);
    let g2q = g_aux(b1, b2, k, l2, q, false);

    let mut h = DMatrix::<C64>::zeros(3, 3);
    let mut km = DMatrix::<C64>::zeros(3, 3);
    h[(0, 0)] = C64::new(p.omega(), 0.0);
    h[(0, 1)] = g2 + j1;
    h[(0, 2)] = i * g1 - i * j2;
    km[(0, 1)] = (j1q - g2q) * half;
    km[(0, 2)] = i * (g1q + j2q) * half;

    let block = atom_block(p, op);
    for a in 0..2 {
        for b in 0..2 {
            h[(a + 1, b + 1)] = block.0[a][b];
            km[(a + 1, b + 1)] = block.1[a][b] * half;
        }
    }
    for a in 1..3 {
        h[(a, 0)] = h[(0, a)].conj();
        km[(a, 0)] = km[(0, a)];
    }
    // Remove roundoff asymmetry before validation.
    let h = (&h + h.adjoint()) * half;
    let km = (&km + km.transpose()) * half;
    QuadraticForm::new(h, km, Sector::NormalSuperradiant)
}

/// Second Wirtinger derivatives of the mean-field energy in the atomic
/// directions: `(d^2 E / d beta_mu* d beta_nu, d^2 E / d beta_mu d beta_nu)`.
///
/// With `g = sum_mu (M_mu beta_mu* + M_mu* beta_mu)` the atomic part of the
/// energy is `omega0 |beta|^2 + sqrt(k) g`.
fn atom_block(p: &ModelParams, op: &OrderParams) -> ([[C64; 2]; 2], [[C64; 2]; 2]) {
    let k = op.k();
    let sk = k.sqrt();
    let k32 = k * sk;
    let m = effective_fields(p, op.alpha);
    let b = [op.beta1, op.beta2];
    let g: f64 = (0..2).map(|mu| 2.0 * (m[mu] * b[mu].conj()).re).sum();
    let mut hh = [[C64::new(0.0, 0.0); 2]; 2];
    let mut kk = [[C64::new(0.0, 0.0); 2]; 2];
    for mu in 0..2 {
        for nu in 0..2 {
            let delta = if mu == nu { 1.0 } else { 0.0 };
            hh[mu][nu] = C64::new(p.omega0() * delta - delta * g / (2.0 * sk), 0.0)
                - b[mu] * b[nu].conj() * (g / (4.0 * k32))
                - b[mu] * m[nu].conj() / (2.0 * sk)
                - b[nu].conj() * m[mu] / (2.0 * sk);
            kk[mu][nu] = -b[mu].conj() * b[nu].conj() * (g / (4.0 * k32))
                - b[mu].conj() * m[nu].conj() / (2.0 * sk)
                - b[nu].conj() * m[mu].conj() / (2.0 * sk);
        }
    }
    (hh, kk)
}

/// Fluctuation form around the inverted state
/// `sqrt(n1)|1> + sqrt(1 - n1) e^{i theta}|2>` with an empty cavity.
pub fn build_inverted_form(p: &ModelParams, n1_frac: f64, theta: f64) -> QuadraticForm {
    let (e1, e2) = etas(p, n1_frac);
    let (s, c) = (p.phi().sin(), p.phi().cos());
    let i = C64::i();
    let em = C64::from_polar(1.0, -theta);
    let ep = C64::from_polar(1.0, theta);
    let off_h = (C64::new(e1, 0.0) - i * e2 * em) * c;
    let off_k = (C64::new(e1, 0.0) + i * e2 * em) * (0.5 * s);
    let z = C64::new(0.0, 0.0);
    debug_assert!((off_h.conj() - (C64::new(e1, 0.0) + i * e2 * ep) * c).norm() < 1e-12);
    let h = DMatrix::from_row_slice(2, 2, &[C64::new(p.omega(), 0.0), off_h, off_h.conj(), C64::new(-p.omega0(), 0.0)]);
    let k = DMatrix::from_row_slice(2, 2, &[z, off_k, off_k, z]);
    QuadraticForm {
        h,
        k,
        sector: Sector::Inverted,
    }
}

/// Numerical Wirtinger Hessian `(d^2 f / dz_i* dz_j, d^2 f / dz_i dz_j)` of a
/// real function of complex variables by central differences.
pub fn numerical_wirtinger_hessian<F>(f: F, z: &[C64], step: f64) -> (DMatrix<C64>, DMatrix<C64>)
where
    F: Fn(&[C64]) -> f64,
{
    let n = z.len();
    let m = 2 * n;
    let eval = |x: &[f64]| {
        let zz: Vec<C64> = (0..n).map(|i| C64::new(x[i], x[n + i])).collect();
        f(&zz)
    };
    let x0: Vec<f64> = z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect();
    let mut hr = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut x = x0.clone();
            let mut val = 0.0;
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                x.copy_from_slice(&x0);
                x[a] += sa * step;
                x[b] += sb * step;
                val += w * eval(&x);
            }
            hr[(a, b)] = val / (4.0 * step * step);
        }
    }
    let mut h = DMatrix::<C64>::zeros(n, n);
    let mut k = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = hr[(i, j)];
            let d = hr[(n + i, n + j)];
            let bb = hr[(i, n + j)];
            let cc = hr[(n + i, j)];
            h[(i, j)] = C64::new(a + d, -(bb - cc)) * 0.25;
            k[(i, j)] = C64::new(a - d, -(bb + cc)) * 0.25;
        }
    }
    (h, k)
}
