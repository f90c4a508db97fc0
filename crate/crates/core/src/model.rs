//! Model constants, derived scalars, symmetry classification and the
//! mapping from Raman-scheme laser parameters.
//!
//! All frequencies are measured in units of the reference frequency
//! `w~ = sqrt(omega * omega0)` with `hbar = 1`.

use alloc::format;
use alloc::string::String;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Default tolerance used by [`classify_symmetry`].
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-10;

/// The seven model constants.
///
/// Construct through [`ModelParams::new`] (or the `with_*` helpers) so that
/// the invariants hold: positive frequencies, non-negative couplings and
/// loss, at least one atom, and `phi` folded into `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    omega: f64,
    omega0: f64,
    lambda1: f64,
    lambda2: f64,
    phi: f64,
    kappa: f64,
    n_atoms: f64,
}

/// Folds an angle into `[0, pi)`. The Hamiltonian is invariant under
/// `phi -> phi + pi` combined with `a -> -a`.
pub fn normalize_phi(phi: f64) -> f64 {
    wrap(phi, PI)
}

/// Reduces `x` into `[0, period)`.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x - (x / period).floor() * period;
    if r >= period || r < 0.0 {
        0.0
    } else {
        r
    }
}

impl ModelParams {
    pub fn new(
        omega: f64,
        omega0: f64,
        lambda1: f64,
        lambda2: f64,
        phi: f64,
        kappa: f64,
        n_atoms: f64,
    ) -> Result<Self> {
        let all = [omega, omega0, lambda1, lambda2, phi, kappa, n_atoms];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite value"));
        }
        if omega <= 0.0 || omega0 <= 0.0 {
            return Err(Error::InvalidParams("omega and omega0 must be positive"));
        }
        if lambda1 < 0.0 || lambda2 < 0.0 {
            return Err(Error::InvalidParams("couplings must be non-negative"));
        }
        if kappa < 0.0 {
            return Err(Error::InvalidParams("kappa must be non-negative"));
        }
        if n_atoms < 1.0 {
            return Err(Error::InvalidParams("n_atoms must be at least 1"));
        }
        Ok(Self {
            omega,
            omega0,
            lambda1,
            lambda2,
            phi: normalize_phi(phi),
            kappa,
            n_atoms,
        })
    }

    /// The reference parameters of the bundled recipes: `omega = 4 omega0 = 2`,
    /// `phi = pi/4`, no coupling, no loss, one atom.
    pub fn reference() -> Self {
        Self {
            omega: 2.0,
            omega0: 0.5,
            lambda1: 0.0,
            lambda2: 0.0,
            phi: PI / 4.0,
            kappa: 0.0,
            n_atoms: 1.0,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn n_atoms(&self) -> f64 {
        self.n_atoms
    }

    pub fn with_frequencies(self, omega: f64, omega0: f64) -> Result<Self> {
        Self::new(omega, omega0, self.lambda1, self.lambda2, self.phi, self.kappa, self.n_atoms)
    }
    pub fn with_couplings(self, lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, lambda1, lambda2, self.phi, self.kappa, self.n_atoms)
    }
    /// Sets the couplings from a radius `lambda_r` and mixing angle `nu`
    /// with `tan(nu) = lambda2 / lambda1`.
    pub fn with_polar_couplings(self, lambda_r: f64, nu: f64) -> Result<Self> {
        self.with_couplings(lambda_r * nu.cos(), lambda_r * nu.sin())
    }
    pub fn with_phi(self, phi: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, self.lambda1, self.lambda2, phi, self.kappa, self.n_atoms)
    }
    pub fn with_kappa(self, kappa: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, self.lambda1, self.lambda2, self.phi, kappa, self.n_atoms)
    }
    pub fn with_n_atoms(self, n_atoms: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, self.lambda1, self.lambda2, self.phi, self.kappa, n_atoms)
    }

    /// Returns the same physics expressed in units of `sqrt(omega * omega0)`,
    /// together with that reference frequency in the original units.
    pub fn in_reference_units(self) -> (Self, f64) {
        let w = (self.omega * self.omega0).sqrt();
        let p = Self {
            omega: self.omega / w,
            omega0: self.omega0 / w,
            lambda1: self.lambda1 / w,
            lambda2: self.lambda2 / w,
            kappa: self.kappa / w,
            ..self
        };
        (p, w)
    }

    /// Canonical `key = value` serialization, one field per line, with
    /// round-trip precision.
    pub fn to_kv_string(&self) -> String {
        format!(
            "omega = {:e}\nomega0 = {:e}\nlambda1 = {:e}\nlambda2 = {:e}\nphi = {:e}\nkappa = {:e}\nn_atoms = {:e}\n",
            self.omega, self.omega0, self.lambda1, self.lambda2, self.phi, self.kappa, self.n_atoms
        )
    }

    /// Parses the format written by [`ModelParams::to_kv_string`].
    ///
    /// Blank lines and `#` comments are ignored; keys that are absent keep
    /// their [`ModelParams::reference`] value.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let r = Self::reference();
        let mut v = [r.omega, r.omega0, r.lambda1, r.lambda2, r.phi, r.kappa, r.n_atoms];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let idx = field_index(key.trim())
                .ok_or_else(|| Error::Parse(format!("line {}: unknown key `{}`", lineno + 1, key.trim())))?;
            v[idx] = value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: `{}` is not a number", lineno + 1, value.trim())))?;
        }
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6])
    }
}

fn field_index(key: &str) -> Option<usize> {
    ["omega", "omega0", "lambda1", "lambda2", "phi", "kappa", "n_atoms"]
        .iter()
        .position(|k| *k == key)
}

/// Which global sign of the scaled inverted-state parameter is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaConvention {
    /// `[(kappa^2 + omega^2 + omega0^2) cos 2phi - 2 omega omega0] / [...]` as written.
    Literal,
    /// The negated expression. With it, `phi = pi/2` gives `1` and a vanishing
    /// inverted region, and `phi = 0` gives `-1` and the full region.
    Negated,
}

impl OmegaConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            OmegaConvention::Literal => "literal",
            OmegaConvention::Negated => "negated",
        }
    }
}

/// Convention reported by [`derived_scalars`]; selected by agreement between
/// the analytic area and the numerically classified inverted region.
pub const RESOLVED_OMEGA_CONVENTION: OmegaConvention = OmegaConvention::Negated;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScalars {
    pub b_param: f64,
    pub l_param: f64,
    pub lambda_r: f64,
    /// Scaled inverted-state parameter in the resolved convention.
    pub omega_scaled: f64,
    pub lambda_c: f64,
}

/// The scaled parameter exactly as the literal expression reads.
pub fn omega_literal(p: &ModelParams) -> f64 {
    let s = p.kappa * p.kappa + p.omega * p.omega + p.omega0 * p.omega0;
    let c2 = (2.0 * p.phi).cos();
    let num = s * c2 - 2.0 * p.omega0 * p.omega;
    let den = s - 2.0 * p.omega0 * p.omega * c2;
    if den <= f64::EPSILON * s {
        // kappa = 0, omega = omega0, phi = 0: both vanish, the limit along phi is 1
        return 1.0;
    }
    (num / den).clamp(-1.0, 1.0)
}

/// The scaled parameter under a chosen convention.
pub fn omega_scaled(p: &ModelParams, convention: OmegaConvention) -> f64 {
    match convention {
        OmegaConvention::Literal => omega_literal(p),
        OmegaConvention::Negated => -omega_literal(p),
    }
}

pub fn derived_scalars(p: &ModelParams) -> DerivedScalars {
    let l1s = p.lambda1 * p.lambda1;
    let l2s = p.lambda2 * p.lambda2;
    DerivedScalars {
        b_param: p.phi.cos() * p.phi.sin() * (l1s - l2s),
        l_param: l1s + l2s,
        lambda_r: (l1s + l2s).sqrt(),
        omega_scaled: omega_scaled(p, RESOLVED_OMEGA_CONVENTION),
        lambda_c: (p.omega * p.omega0 / 2.0).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    /// `phi` is a multiple of `pi/2`: only co- or only counter-rotating terms.
    U1TavisCummings,
    /// `lambda1 = lambda2`.
    U1Balanced,
    Z2xZ2Generic,
}

impl SymmetryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryClass::U1TavisCummings => "U1_TavisCummings",
            SymmetryClass::U1Balanced => "U1_Balanced",
            SymmetryClass::Z2xZ2Generic => "Z2xZ2_Generic",
        }
    }
}

pub fn classify_symmetry(p: &ModelParams, tol: f64) -> SymmetryClass {
    let to_grid = (p.phi / FRAC_PI_2).round() * FRAC_PI_2;
    if (p.phi - to_grid).abs() <= tol {
        SymmetryClass::U1TavisCummings
    } else if (p.lambda1 - p.lambda2).abs() <= tol {
        SymmetryClass::U1Balanced
    } else {
        SymmetryClass::Z2xZ2Generic
    }
}

/// Laser, cavity and atom parameters of the two-photon Raman scheme.
///
/// Any consistent frequency unit may be used; the mapping returns the model
/// in reference units together with the reference frequency in these units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanInputs {
    pub rabi_s1: f64,
    pub rabi_s2: f64,
    pub rabi_r1: f64,
    pub rabi_r2: f64,
    pub delta_s1: f64,
    pub delta_s2: f64,
    pub delta_r1: f64,
    pub delta_r2: f64,
    pub g_r: f64,
    pub g_s: f64,
    pub omega_cavity_bare: f64,
    pub laser_r1: f64,
    pub laser_r2: f64,
    pub laser_s1: f64,
    pub laser_s2: f64,
    pub level_g1: f64,
    pub level_g2: f64,
    /// Relative laser phase; the model requires `pi/2`.
    pub relative_phase: f64,
    pub n_atoms: f64,
    pub kappa: f64,
    /// Relative tolerance for the consistency conditions.
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanMapping {
    pub params: ModelParams,
    /// `sqrt(omega * omega0)` in the input units.
    pub reference_frequency: f64,
    /// Whether every detuning exceeds every Rabi frequency and single-photon
    /// coupling by at least a factor of ten.
    pub adiabatic_ok: bool,
    /// Whether the detuning and phase conditions that remove the extra
    /// cavity Stark terms hold within tolerance.
    pub conditions_ok: bool,
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn raman_map(r: &RamanInputs) -> Result<RamanMapping> {
    let dets = [r.delta_s1, r.delta_s2, r.delta_r1, r.delta_r2];
    if dets.iter().any(|d| *d == 0.0) {
        return Err(Error::ZeroDetuning);
    }
    let sqn = r.n_atoms.sqrt();
    let l1s = sqn * r.rabi_s1 * r.g_s / (2.0 * r.delta_s1);
    let l2s = sqn * r.rabi_s2 * r.g_s / (2.0 * r.delta_s2);
    let l1r = sqn * r.rabi_r1 * r.g_r / (2.0 * r.delta_r1);
    let l2r = sqn * r.rabi_r2 * r.g_r / (2.0 * r.delta_r2);
    let lambda1 = l1s.hypot(l1r);
    let lambda2 = l2s.hypot(l2r);
    let phi1 = normalize_phi(l1s.atan2(l1r));
    let phi2 = normalize_phi(l2s.atan2(l2r));
    let phi = match (lambda1 > 0.0, lambda2 > 0.0) {
        (true, true) => {
            let d = (phi1 - phi2).abs();
            if d.min(PI - d) > r.tol.max(1e-12) {
                return Err(Error::InconsistentRaman(phi1, phi2));
            }
            phi1
        }
        (true, false) => phi1,
        (false, true) => phi2,
        (false, false) => 0.0,
    };

    // Stark shift on the cavity: sum_mu Lambda_mu,mu = N, so the shift is N g_r / Delta_r1.
    let omega_a = r.omega_cavity_bare - (r.laser_r1 + r.laser_s1) / 2.0;
    let omega = omega_a + r.n_atoms * r.g_r / r.delta_r1;
    let w00 = r.rabi_r1 * r.rabi_r1 / (4.0 * r.delta_r1) + r.rabi_r2 * r.rabi_r2 / (4.0 * r.delta_r2);
    let w10 = r.level_g1 + r.rabi_s1 * r.rabi_s1 / (4.0 * r.delta_s1) - (r.laser_r1 - r.laser_s1) / 2.0;
    let w20 = r.level_g2 + r.rabi_s2 * r.rabi_s2 / (4.0 * r.delta_s2) - (r.laser_r2 - r.laser_s2) / 2.0;
    // Lambda_00 = N - Lambda_11 - Lambda_22 moves the ground-level shift onto omega0.
    let omega0 = w10 - w00;

    let u = r.g_r / r.delta_r1;
    let conditions_ok = rel_close(u, r.g_r / r.delta_r2, r.tol)
        && rel_close(u, r.g_s / r.delta_s1 + r.g_s / r.delta_s2, r.tol)
        && (r.relative_phase - FRAC_PI_2).abs() <= r.tol
        && rel_close(w10, w20, r.tol);
    let biggest = [r.rabi_s1, r.rabi_s2, r.rabi_r1, r.rabi_r2, r.g_r, r.g_s]
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let smallest_det = dets.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let adiabatic_ok = smallest_det >= 10.0 * biggest;

    let raw = ModelParams::new(omega, omega0, lambda1, lambda2, phi, r.kappa, r.n_atoms)?;
    let (params, reference_frequency) = raw.in_reference_units();
    Ok(RamanMapping {
        params,
        reference_frequency,
        adiabatic_ok,
        conditions_ok,
    })
}

/// Effective fields `(M1, M2)` felt by the atoms for cavity amplitude `alpha`:
/// `M1 = lambda1 (sin(phi) alpha + cos(phi) alpha*)` and
/// `M2 = i lambda2 (sin(phi) alpha - cos(phi) alpha*)`.
pub fn effective_fields(p: &ModelParams, alpha: C64) -> [C64; 2] {
    let (s, c) = (p.phi.sin(), p.phi.cos());
    let ac = alpha.conj();
    [
        (alpha * s + ac * c) * p.lambda1,
        C64::i() * (alpha * s - ac * c) * p.lambda2,
    ]
}

/// Single-atom mean-field Hamiltonian in the basis `(|0>, |1>, |2>)`.
pub fn atom_hamiltonian(p: &ModelParams, alpha: C64) -> Matrix3<C64> {
    let [m1, m2] = effective_fields(p, alpha);
    let w0 = C64::new(p.omega0, 0.0);
    let z = C64::new(0.0, 0.0);
    Matrix3::new(z, m1.conj(), m2.conj(), m1, w0, z, m2, z, w0)
}
