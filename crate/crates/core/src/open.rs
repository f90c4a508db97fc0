//! Open-system (cavity loss `kappa`) steady states, third-quantization
//! rapidities, phase classification, and the stable inverted-state region.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector4};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::closed::{sp_candidate, OrderParams};
use crate::dynamics::{
    settle, AttractorControls, AttractorKind, AttractorReport, IntegratorControls, MeanFieldODEState,
};
use crate::error::{Error, Result};
use crate::fluctuations::{build_inverted_form, build_ns_form, QuadraticForm, Sector};
use crate::linalg::eigenvalues;
use crate::model::{effective_fields, omega_literal, ModelParams, OmegaConvention};

/// Rapidities with `|Re zeta|` below this are marginal.
pub const RAPIDITY_TOL: f64 = 1e-8;
/// Fixed points closer than this in `(M1, M2)` are the same.
pub const DEDUP_TOL: f64 = 1e-8;
/// Half-width of the seed lattice in `(Re M1, Im M1, Re M2, Im M2)`.
pub const SEED_RADIUS: f64 = 2.0;

/// Smallest grid per axis accepted by [`inverted_region`].
pub const MIN_INVERTED_GRID: usize = 32;

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-13;
const NULLITY_TOL: f64 = 1e-7;

/// How many copies of a fixed point the symmetries generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Single,
    /// The point and its `M -> -M` partner; only one is stored.
    Z2Pair,
    /// A member of a continuous (U(1)) family.
    Continuous,
}

impl Multiplicity {
    pub fn as_str(self) -> &'static str {
        match self {
            Multiplicity::Single => "1",
            Multiplicity::Z2Pair => "2",
            Multiplicity::Continuous => "continuous",
        }
    }
}

/// A mean-field fixed point of the open system with the atoms in the lower
/// eigenstate of the single-atom Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyAtomicState {
    /// `<Lambda_ij> / N`.
    pub lambda_exp: Matrix3<C64>,
    /// `<a> / sqrt(N)`.
    pub cavity_alpha: C64,
    pub m1: C64,
    pub m2: C64,
    pub multiplicity: Multiplicity,
}

impl SteadyAtomicState {
    /// The state with the atoms in `|0>` and an empty cavity.
    pub fn normal() -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            lambda_exp: lambda_from_fields([z, z], 1.0),
            cavity_alpha: z,
            m1: z,
            m2: z,
            multiplicity: Multiplicity::Single,
        }
    }

    pub fn is_normal(&self) -> bool {
        self.m1.norm() + self.m2.norm() == 0.0
    }

    /// Holstein-Primakoff amplitudes `beta_mu = <Lambda_0mu> / sqrt(<Lambda_00>)`.
    pub fn order_params(&self) -> OrderParams {
        let sk = self.lambda_exp[(0, 0)].re.sqrt();
        OrderParams {
            alpha: self.cavity_alpha,
            beta1: self.lambda_exp[(0, 1)] / sk,
            beta2: self.lambda_exp[(0, 2)] / sk,
        }
    }

    pub fn ode_state(&self) -> MeanFieldODEState {
        MeanFieldODEState {
            alpha: self.cavity_alpha,
            lambda_exp: self.lambda_exp,
        }
    }

    /// `(Tr - 1, Tr rho^2 - 1, Tr rho^3 - 1)`; all vanish for the pure
    /// product states returned here.
    pub fn constraint_residuals(&self) -> [f64; 3] {
        let c = self.ode_state().casimirs();
        [c[0] - 1.0, c[1] - 1.0, c[2] - 1.0]
    }
}

/// `<Lambda_ij>/N` of the lower eigenstate of the single-atom Hamiltonian with
/// fields `m`.
fn lambda_from_fields(m: [C64; 2], omega0: f64) -> Matrix3<C64> {
    let msq = m[0].norm_sqr() + m[1].norm_sqr();
    let r = (omega0 * omega0 + 4.0 * msq).sqrt();
    let scale = -(2.0 / (r * (r + omega0))).sqrt();
    let psi = [C64::new(((omega0 + r) / (2.0 * r)).sqrt(), 0.0), m[0] * scale, m[1] * scale];
    Matrix3::from_fn(|i, j| psi[i].conj() * psi[j])
}

/// Stationary cavity amplitude driven by the atomic coherences.
fn alpha_from_lambda(p: &ModelParams, l: &Matrix3<C64>) -> C64 {
    let (s, c) = (p.phi().sin(), p.phi().cos());
    let i = C64::i();
    let drive = -i * p.lambda1() * (l[(1, 0)] * c + l[(0, 1)] * s) - p.lambda2() * (l[(2, 0)] * c + l[(0, 2)] * s);
    drive / (i * p.omega() + p.kappa())
}

fn to_fields(x: &Vector4<f64>) -> [C64; 2] {
    [C64::new(x[0], x[1]), C64::new(x[2], x[3])]
}

fn to_vec(m: [C64; 2]) -> Vector4<f64> {
    Vector4::new(m[0].re, m[0].im, m[1].re, m[1].im)
}

/// The self-consistency map `M -> M(alpha(<Lambda>(M)))` without the `1/R`
/// factor; it is real-linear in `M`.
pub fn linear_part(p: &ModelParams) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    for col in 0..4 {
        let mut e = Vector4::zeros();
        e[col] = 1.0;
        let m = to_fields(&e);
        // <Lambda_0mu> = -M_mu / R, so the map with R = 1 is linear in M.
        let l = Matrix3::from_fn(|i, j| match (i, j) {
            (0, 1) => -m[0],
            (0, 2) => -m[1],
            (1, 0) => -m[0].conj(),
            (2, 0) => -m[1].conj(),
            _ => C64::new(0.0, 0.0),
        });
        let out = effective_fields(p, alpha_from_lambda(p, &l));
        a.set_column(col, &to_vec(out));
    }
    a
}

/// Residual `F(M) = M(alpha(M)) - M` of the steady-state equations, on
/// `(Re M1, Im M1, Re M2, Im M2)`.
pub fn sp_residual(p: &ModelParams, x: &[f64; 4]) -> [f64; 4] {
    let v = Vector4::from_column_slice(x);
    let f = residual_with(&linear_part(p), p.omega0(), &v);
    [f[0], f[1], f[2], f[3]]
}

fn residual_with(a: &Matrix4<f64>, omega0: f64, x: &Vector4<f64>) -> Vector4<f64> {
    let r = (omega0 * omega0 + 4.0 * x.norm_squared()).sqrt();
    a * x / r - x
}

fn jacobian_with(a: &Matrix4<f64>, omega0: f64, x: &Vector4<f64>) -> Matrix4<f64> {
    let r = (omega0 * omega0 + 4.0 * x.norm_squared()).sqrt();
    let ax = a * x;
    a / r - (ax * x.transpose()) * (4.0 / (r * r * r)) - Matrix4::identity()
}

fn newton(a: &Matrix4<f64>, omega0: f64, seed: Vector4<f64>) -> Option<Vector4<f64>> {
    let mut x = seed;
    let mut f = residual_with(a, omega0, &x);
    for _ in 0..NEWTON_MAX_ITER {
        let fnorm = f.norm();
        if fnorm <= NEWTON_TOL * (1.0 + x.norm()) {
            return Some(x);
        }
        let j = jacobian_with(a, omega0, &x);
        let step = j.lu().solve(&(-f))?;
        let mut t = 1.0;
        loop {
            let trial = x + step * t;
            let ft = residual_with(a, omega0, &trial);
            if ft.norm() < (1.0 - 1e-4 * t) * fnorm || t < 1e-6 {
                x = trial;
                f = ft;
                break;
            }
            t *= 0.5;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    (f.norm() <= 1e3 * NEWTON_TOL * (1.0 + x.norm())).then_some(x)
}

/// Deterministic seeds: the `5^4` lattice over `[-SEED_RADIUS, SEED_RADIUS]`
/// plus the closed-system superradiant fields when they exist.
pub fn default_seeds(p: &ModelParams) -> Vec<[C64; 2]> {
    let ticks = [-SEED_RADIUS, -0.5 * SEED_RADIUS, 0.0, 0.5 * SEED_RADIUS, SEED_RADIUS];
    let mut seeds = Vec::with_capacity(626);
    if let Some((_, alpha)) = sp_candidate(p) {
        seeds.push(effective_fields(p, alpha));
    }
    for &a in &ticks {
        for &b in &ticks {
            for &c in &ticks {
                for &d in &ticks {
                    seeds.push([C64::new(a, b), C64::new(c, d)]);
                }
            }
        }
    }
    seeds
}

/// Fixed points found from a seed set.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadySolveResult {
    /// The normal state first, then the distinct nonzero fixed points by
    /// increasing `|M|`.
    pub states: Vec<SteadyAtomicState>,
    /// Seeds whose Newton iteration did not converge.
    pub failed_seeds: usize,
}

impl SteadySolveResult {
    pub fn superradiant(&self) -> &[SteadyAtomicState] {
        &self.states[1..]
    }
}

/// Steady state for a given field pair, without checking self-consistency.
pub fn steady_state_from_fields(p: &ModelParams, m: [C64; 2]) -> SteadyAtomicState {
    let lambda_exp = lambda_from_fields(m, p.omega0());
    SteadyAtomicState {
        lambda_exp,
        cavity_alpha: alpha_from_lambda(p, &lambda_exp),
        m1: m[0],
        m2: m[1],
        multiplicity: Multiplicity::Single,
    }
}

/// Solves the steady-state equations from [`default_seeds`] plus `extra_seeds`.
pub fn solve_sp_steady(p: &ModelParams, extra_seeds: &[[C64; 2]]) -> SteadySolveResult {
    let a = linear_part(p);
    let w0 = p.omega0();
    let mut found: Vec<(Vector4<f64>, Multiplicity)> = Vec::new();
    let mut failed = 0;
    let seeds = default_seeds(p);
    for seed in seeds.iter().chain(extra_seeds) {
        let x = match newton(&a, w0, to_vec(*seed)) {
            Some(x) => x,
            None => {
                failed += 1;
                continue;
            }
        };
        let scale = 1.0 + x.norm();
        // Near threshold the residual is almost flat around M = 0, so tiny
        // iterates pass the absolute test; a nonzero root must also be
        // accurate relative to its own size.
        if x.norm() <= DEDUP_TOL || residual_with(&a, w0, &x).norm() > 1e3 * NEWTON_TOL * x.norm() {
            continue;
        }
        let nullity = jacobian_with(&a, w0, &x)
            .singular_values()
            .iter()
            .fold(f64::INFINITY, |m, &s| m.min(s));
        let continuous = nullity < NULLITY_TOL;
        let duplicate = found.iter().any(|(y, mult)| {
            if continuous && *mult == Multiplicity::Continuous {
                (y.norm() - x.norm()).abs() <= 1e3 * DEDUP_TOL * scale
            } else {
                (y - x).norm() <= DEDUP_TOL * scale || (y + x).norm() <= DEDUP_TOL * scale
            }
        });
        if !duplicate {
            let mult = if continuous { Multiplicity::Continuous } else { Multiplicity::Z2Pair };
            found.push((x, mult));
        }
    }
    found.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));
    let mut states = Vec::with_capacity(found.len() + 1);
    states.push(SteadyAtomicState::normal());
    for (x, mult) in found {
        let mut s = steady_state_from_fields(p, to_fields(&x));
        s.multiplicity = mult;
        states.push(s);
    }
    SteadySolveResult {
        states,
        failed_seeds: failed,
    }
}

/// `chi = 1/2 ((i H* + M, -2i K), (2i K*, -i H + M))` with cavity loss
/// `kappa` on the photon mode (index 0) of both blocks.
pub fn shape_matrix(q: &QuadraticForm, kappa: f64) -> DMatrix<C64> {
    let n = q.modes();
    let i = C64::i();
    let h = q.h();
    let k = q.k();
    let mut chi = DMatrix::<C64>::zeros(2 * n, 2 * n);
    chi.view_mut((0, 0), (n, n)).copy_from(&(h.map(|z| z.conj()) * i));
    chi.view_mut((0, n), (n, n)).copy_from(&(k * (-2.0 * i)));
    chi.view_mut((n, 0), (n, n)).copy_from(&(k.map(|z| z.conj()) * (2.0 * i)));
    chi.view_mut((n, n), (n, n)).copy_from(&(h * (-i)));
    chi[(0, 0)] += kappa;
    chi[(n, n)] += kappa;
    chi * C64::new(0.5, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RapiditySet {
    /// Sorted by `(Re, Im)`.
    pub zetas: Vec<C64>,
    pub min_real: f64,
}

impl RapiditySet {
    /// `min Re zeta >= -tol`.
    pub fn is_stable(&self, tol: f64) -> bool {
        self.min_real >= -tol
    }

    pub fn stability(&self, tol: f64) -> Stability {
        if self.min_real >= tol {
            Stability::Stable
        } else if self.min_real > -tol {
            Stability::Marginal
        } else {
            Stability::Unstable
        }
    }
}

pub fn rapidities(chi: &DMatrix<C64>) -> Result<RapiditySet> {
    if chi.nrows() != chi.ncols() {
        return Err(Error::InvalidParams("shape matrix must be square"));
    }
    let zetas = eigenvalues(chi)?;
    let min_real = zetas.iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    Ok(RapiditySet { zetas, min_real })
}

/// Rapidities about a normal or superradiant steady state.
pub fn steady_rapidities(p: &ModelParams, s: &SteadyAtomicState) -> Result<RapiditySet> {
    let q = build_ns_form(p, &s.order_params())?;
    rapidities(&shape_matrix(&q, p.kappa()))
}

/// Rapidities about the inverted state with `|1>` population `n1_frac` and
/// relative phase `theta`.
pub fn inverted_rapidities(p: &ModelParams, n1_frac: f64, theta: f64) -> Result<RapiditySet> {
    let q = build_inverted_form(p, n1_frac, theta);
    debug_assert_eq!(q.sector(), Sector::Inverted);
    rapidities(&shape_matrix(&q, p.kappa()))
}

/// Stable part of the `(theta, n1)` rectangle `[0, 2 pi) x [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedRegion {
    /// Points `(theta, n1)` on the numerically located stability boundary.
    pub boundary_samples: Vec<(f64, f64)>,
    /// Numeric area per atom.
    pub area: f64,
    /// The scaled parameter in the convention that matches the numerics.
    pub omega_used: f64,
    /// Convention whose analytic area agrees with `area`, if any.
    pub matched_convention: Option<OmegaConvention>,
    pub analytic_area_literal: f64,
    pub analytic_area_negated: f64,
    pub n_theta: usize,
    pub n_n1: usize,
}

impl InvertedRegion {
    pub fn is_empty(&self) -> bool {
        self.area <= 0.0
    }
}

/// Closed-form area per atom of the stable inverted region, evaluated with the
/// scaled parameter taken in `convention`.
pub fn analytic_area(p: &ModelParams, convention: OmegaConvention) -> f64 {
    let om = match convention {
        OmegaConvention::Literal => omega_literal(p),
        OmegaConvention::Negated => -omega_literal(p),
    };
    let (l1s, l2s) = (p.lambda1().powi(2), p.lambda2().powi(2));
    let pi = core::f64::consts::PI;
    if l1s * l2s == 0.0 {
        let sign = if om > 0.0 {
            1.0
        } else if om < 0.0 {
            -1.0
        } else {
            0.0
        };
        return pi * (1.0 - sign);
    }
    let den = (om * om * (l1s - l2s).powi(2) + 4.0 * l1s * l2s).sqrt();
    (pi * (1.0 - om * (l1s + l2s) / den)).clamp(0.0, 2.0 * pi)
}

const BISECTION_STEPS: usize = 52;

fn inverted_stable(p: &ModelParams, n1: f64, theta: f64) -> bool {
    inverted_rapidities(p, n1, theta)
        .map(|r| r.is_stable(RAPIDITY_TOL))
        .unwrap_or(false)
}

/// Stable length along one `theta` row and the boundary crossings.
fn stable_row(p: &ModelParams, theta: f64, n_n1: usize, crossings: &mut Vec<(f64, f64)>) -> f64 {
    let nodes: Vec<f64> = (0..n_n1).map(|j| j as f64 / (n_n1 - 1) as f64).collect();
    let flags: Vec<bool> = nodes.iter().map(|&x| inverted_stable(p, x, theta)).collect();
    let mut length = 0.0;
    for j in 0..n_n1 - 1 {
        let (a, b) = (nodes[j], nodes[j + 1]);
        match (flags[j], flags[j + 1]) {
            (true, true) => length += b - a,
            (false, false) => {}
            (fa, _) => {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if inverted_stable(p, mid, theta) == fa {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = 0.5 * (lo + hi);
                crossings.push((theta, x));
                length += if fa { x - a } else { b - x };
            }
        }
    }
    length
}

/// Numerically classifies the inverted family on `n_theta` rows (at cell
/// midpoints in `theta`) and `n_n1` nodes in `n1` (endpoints included),
/// refining each stability change by bisection. The area is the sum of the
/// row lengths times the row spacing.
pub fn inverted_region(p: &ModelParams, n_theta: usize, n_n1: usize) -> Result<InvertedRegion> {
    if n_theta < MIN_INVERTED_GRID || n_n1 < MIN_INVERTED_GRID {
        return Err(Error::InvalidParams("inverted-region grid must be at least 32 x 32"));
    }
    let tau = core::f64::consts::TAU;
    let dtheta = tau / n_theta as f64;
    let mut boundary = Vec::new();
    let mut area = 0.0;
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) * dtheta;
        area += dtheta * stable_row(p, theta, n_n1, &mut boundary);
    }
    let lit = analytic_area(p, OmegaConvention::Literal);
    let neg = analytic_area(p, OmegaConvention::Negated);
    // Agreement within the grid resolution: rows are exact up to the midpoint
    // rule, so the error is O(dtheta^2) relative plus an absolute floor.
    let tol = 0.02 * area.max(lit.min(neg)) + 4.0 * dtheta * dtheta;
    let matched = match ((area - lit).abs() <= tol, (area - neg).abs() <= tol) {
        (true, false) => Some(OmegaConvention::Literal),
        (false, true) => Some(OmegaConvention::Negated),
        (true, true) => Some(crate::model::RESOLVED_OMEGA_CONVENTION),
        (false, false) => None,
    };
    let omega_used = match matched.unwrap_or(crate::model::RESOLVED_OMEGA_CONVENTION) {
        OmegaConvention::Literal => omega_literal(p),
        OmegaConvention::Negated => -omega_literal(p),
    };
    Ok(InvertedRegion {
        boundary_samples: boundary,
        area,
        omega_used,
        matched_convention: matched,
        analytic_area_literal: lit,
        analytic_area_negated: neg,
        n_theta,
        n_n1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpenPhase {
    Np,
    Sp,
    Os,
    Inverted,
}

impl OpenPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            OpenPhase::Np => "NP",
            OpenPhase::Sp => "SP",
            OpenPhase::Os => "OS",
            OpenPhase::Inverted => "INV",
        }
    }
}

/// A steady state with its rapidities and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessedState {
    pub state: SteadyAtomicState,
    pub rapidities: RapiditySet,
    /// Stability after any dynamical confirmation of marginal cases.
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenPhasePoint {
    pub np: AssessedState,
    pub sp: Vec<AssessedState>,
    pub inverted: InvertedRegion,
    /// Present when the normal and superradiant states are both unstable.
    pub long_time: Option<AttractorReport>,
    pub failed_seeds: usize,
}

impl OpenPhasePoint {
    /// Stable phases, sorted.
    pub fn phases(&self) -> Vec<OpenPhase> {
        let mut out = Vec::new();
        if self.np.stability == Stability::Stable {
            out.push(OpenPhase::Np);
        }
        if self.sp.iter().any(|s| s.stability == Stability::Stable) {
            out.push(OpenPhase::Sp);
        }
        if matches!(self.long_time, Some(r) if r.kind == AttractorKind::LimitCycle) {
            out.push(OpenPhase::Os);
        }
        if !self.inverted.is_empty() {
            out.push(OpenPhase::Inverted);
        }
        out
    }

    pub fn has(&self, phase: OpenPhase) -> bool {
        self.phases().contains(&phase)
    }

    /// Compact label such as `NP+SP`, or `none`.
    pub fn label(&self) -> alloc::string::String {
        let ph = self.phases();
        if ph.is_empty() {
            return "none".into();
        }
        ph.iter().map(|p| p.as_str()).collect::<Vec<_>>().join("+")
    }

    /// Largest `|alpha|` among the stable superradiant states.
    pub fn sp_alpha(&self) -> Option<f64> {
        self.sp
            .iter()
            .filter(|s| s.stability == Stability::Stable)
            .map(|s| s.state.cavity_alpha.norm())
            .fold(None, |m, a| Some(m.map_or(a, |x: f64| x.max(a))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenControls {
    pub extra_seeds: Vec<[C64; 2]>,
    pub inverted_grid: (usize, usize),
    /// Margin on `min Re zeta`; smaller magnitudes are marginal.
    pub rapidity_tol: f64,
    /// Run trajectories for OS detection and marginal verdicts.
    pub use_dynamics: bool,
    pub integrator: IntegratorControls,
    /// `None` selects [`AttractorControls::for_kappa`].
    pub attractor: Option<AttractorControls>,
    /// Initial cavity amplitude of the OS probe trajectory.
    pub probe_alpha: f64,
}

impl Default for OpenControls {
    fn default() -> Self {
        Self {
            extra_seeds: Vec::new(),
            inverted_grid: (MIN_INVERTED_GRID, MIN_INVERTED_GRID),
            rapidity_tol: RAPIDITY_TOL,
            use_dynamics: true,
            integrator: IntegratorControls::default(),
            attractor: None,
            probe_alpha: 0.01,
        }
    }
}

fn confirm_marginal(
    p: &ModelParams,
    s: &SteadyAtomicState,
    c: &OpenControls,
    ac: &AttractorControls,
) -> Result<Stability> {
    let mut start = s.ode_state();
    start.alpha += C64::new(1e-3, 1e-3);
    let report = settle(&start, p, &c.integrator, ac)?;
    Ok(match (report.kind, report.fixed_state) {
        (AttractorKind::FixedPoint, Some(f)) if (f.alpha - s.cavity_alpha).norm() < 1e-4 => Stability::Stable,
        (AttractorKind::Unresolved, _) => Stability::Marginal,
        _ => Stability::Unstable,
    })
}

fn assess(p: &ModelParams, s: SteadyAtomicState, c: &OpenControls, ac: &AttractorControls) -> Result<AssessedState> {
    let rapidities = steady_rapidities(p, &s)?;
    let mut stability = rapidities.stability(c.rapidity_tol);
    if stability == Stability::Marginal && c.use_dynamics {
        stability = confirm_marginal(p, &s, c, ac)?;
    }
    Ok(AssessedState {
        state: s,
        rapidities,
        stability,
    })
}

/// Stability of the normal, superradiant and inverted states, plus a
/// trajectory-level check for oscillation when no fixed point is stable.
pub fn classify_open(p: &ModelParams, c: &OpenControls) -> Result<OpenPhasePoint> {
    let ac = c.attractor.unwrap_or_else(|| AttractorControls::for_kappa(p.kappa()));
    let solved = solve_sp_steady(p, &c.extra_seeds);
    let mut states = solved.states.into_iter();
    let np = assess(p, states.next().expect("normal state is always present"), c, &ac)?;
    let sp = states.map(|s| assess(p, s, c, &ac)).collect::<Result<Vec<_>>>()?;
    let inverted = inverted_region(p, c.inverted_grid.0, c.inverted_grid.1)?;
    let none_stable = np.stability == Stability::Unstable && sp.iter().all(|s| s.stability == Stability::Unstable);
    let long_time = if none_stable && c.use_dynamics {
        let s0 = MeanFieldODEState::normal(C64::new(c.probe_alpha, 0.0));
        Some(settle(&s0, p, &c.integrator, &ac)?)
    } else {
        None
    };
    Ok(OpenPhasePoint {
        np,
        sp,
        inverted,
        long_time,
        failed_seeds: solved.failed_seeds,
    })
}
