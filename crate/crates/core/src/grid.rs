//! One- and two-dimensional parameter grids and sequential sweeps over them.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Lambda1,
    Lambda2,
    Phi,
    /// `sqrt(lambda1^2 + lambda2^2)`.
    LambdaR,
    /// Mixing angle `atan2(lambda2, lambda1)`.
    Nu,
    Kappa,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::Lambda1, Axis::Lambda2, Axis::Phi, Axis::LambdaR, Axis::Nu, Axis::Kappa];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Lambda1 => "lambda1",
            Axis::Lambda2 => "lambda2",
            Axis::Phi => "phi",
            Axis::LambdaR => "lambda_r",
            Axis::Nu => "nu",
            Axis::Kappa => "kappa",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Axis::Phi | Axis::Nu => "rad",
            _ => "omega_ref",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        Axis::ALL.iter().copied().find(|a| a.name() == s)
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(axis: Axis, start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidParams("axis bounds must be finite"));
        }
        Ok(Self { axis, start, stop, count })
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x: AxisRange,
    pub y: Option<AxisRange>,
    /// Fixed `lambda2 / lambda1`, used with a `lambda_r` axis.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    /// `NaN` on one-dimensional grids.
    pub y: f64,
}

impl GridSpec {
    pub fn line(x: AxisRange) -> Self {
        Self { x, y: None, ratio: None }
    }

    pub fn plane(x: AxisRange, y: AxisRange) -> Self {
        Self {
            x,
            y: Some(y),
            ratio: None,
        }
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = Some(ratio);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(y) = &self.y {
            if y.axis == self.x.axis {
                return Err(Error::InvalidParams("grid axes must differ"));
            }
        }
        if let Some(r) = self.ratio {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidParams("coupling ratio must be finite and non-negative"));
            }
            if self.axes().any(|a| matches!(a, Axis::Lambda1 | Axis::Lambda2 | Axis::Nu)) {
                return Err(Error::InvalidParams("a coupling ratio conflicts with lambda1, lambda2 or nu axes"));
            }
        }
        Ok(())
    }

    fn axes(&self) -> impl Iterator<Item = Axis> + '_ {
        core::iter::once(self.x.axis).chain(self.y.map(|y| y.axis))
    }

    pub fn len(&self) -> usize {
        self.x.count * self.y.map_or(1, |y| y.count)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row-major order: `x` varies fastest.
    pub fn points(&self) -> Vec<GridPoint> {
        let ny = self.y.map_or(1, |y| y.count);
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..ny {
            for ix in 0..self.x.count {
                out.push(GridPoint {
                    ix,
                    iy,
                    x: self.x.value(ix),
                    y: self.y.map_or(f64::NAN, |y| y.value(iy)),
                });
            }
        }
        out
    }

    /// `base` with the grid coordinates of `pt` applied.
    pub fn apply(&self, base: &ModelParams, pt: &GridPoint) -> Result<ModelParams> {
        let mut vals: Vec<(Axis, f64)> = alloc::vec![(self.x.axis, pt.x)];
        if let Some(y) = &self.y {
            vals.push((y.axis, pt.y));
        }
        let get = |a: Axis| vals.iter().find(|(b, _)| *b == a).map(|(_, v)| *v);
        let mut p = *base;
        if let Some(v) = get(Axis::Phi) {
            p = p.with_phi(v)?;
        }
        if let Some(v) = get(Axis::Kappa) {
            p = p.with_kappa(v)?;
        }
        let polar = get(Axis::LambdaR).is_some() || get(Axis::Nu).is_some() || self.ratio.is_some();
        if polar {
            let lr = get(Axis::LambdaR).unwrap_or_else(|| p.lambda1().hypot(p.lambda2()));
            let nu = match (get(Axis::Nu), self.ratio) {
                (Some(nu), _) => nu,
                (None, Some(r)) => r.atan(),
                (None, None) => p.lambda2().atan2(p.lambda1()),
            };
            p = p.with_polar_couplings(lr, nu)?;
        }
        let l1 = get(Axis::Lambda1).unwrap_or(p.lambda1());
        let l2 = get(Axis::Lambda2).unwrap_or(p.lambda2());
        p.with_couplings(l1, l2)
    }
}

/// Evaluates `f` at every grid point in grid order.
pub fn sweep<T, F>(grid: &GridSpec, base: &ModelParams, mut f: F) -> Vec<(GridPoint, Result<T>)>
where
    F: FnMut(&ModelParams) -> Result<T>,
{
    grid.points()
        .into_iter()
        .map(|pt| {
            let r = grid.apply(base, &pt).and_then(|p| f(&p));
            (pt, r)
        })
        .collect()
}
