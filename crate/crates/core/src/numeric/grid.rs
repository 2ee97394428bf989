//! Periodic grids and central finite differences.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Accuracy order of the central first-derivative stencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u32")]
pub enum FdOrder {
    Two,
    Four,
    Six,
}

impl FdOrder {
    pub fn order(self) -> u32 {
        match self {
            FdOrder::Two => 2,
            FdOrder::Four => 4,
            FdOrder::Six => 6,
        }
    }

    pub fn half_width(self) -> usize {
        self.order() as usize / 2
    }

    /// Weights `c_k` of `(f(x+kh) − f(x−kh))`, `k = 1..=half_width`, per unit `h`.
    fn weights(self) -> &'static [f64] {
        match self {
            FdOrder::Two => &[0.5],
            FdOrder::Four => &[2.0 / 3.0, -1.0 / 12.0],
            FdOrder::Six => &[0.75, -0.15, 1.0 / 60.0],
        }
    }
}

impl From<FdOrder> for u32 {
    fn from(f: FdOrder) -> u32 {
        f.order()
    }
}

impl TryFrom<u32> for FdOrder {
    type Error = Error;
    fn try_from(v: u32) -> Result<FdOrder> {
        match v {
            2 => Ok(FdOrder::Two),
            4 => Ok(FdOrder::Four),
            6 => Ok(FdOrder::Six),
            _ => Err(Error::Config(format!("fd order must be 2, 4 or 6, got {v}"))),
        }
    }
}

impl FromStr for FdOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<FdOrder> {
        let v: u32 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid fd order `{s}`")))?;
        FdOrder::try_from(v)
    }
}

impl fmt::Display for FdOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.order())
    }
}

/// Uniform periodic grid of period `2π` on the first `active` coordinate
/// axes of an `n`-dimensional torus. Fields are constant along the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridDomain {
    pub n: usize,
    pub active: usize,
    pub resolution: usize,
}

pub const MAX_ACTIVE_AXES: usize = 3;
pub const MIN_RESOLUTION: usize = 8;

impl GridDomain {
    pub fn new(n: usize, active: usize, resolution: usize) -> Result<GridDomain> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "numeric grids need even n ≥ 2, got {n}"
            )));
        }
        if active == 0 || active > MAX_ACTIVE_AXES || active > n {
            return Err(Error::Config(format!(
                "active axes must lie in 1..={}, got {active}",
                MAX_ACTIVE_AXES.min(n)
            )));
        }
        if resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
            )));
        }
        Ok(GridDomain { n, active, resolution })
    }

    pub fn npts(&self) -> usize {
        self.resolution.pow(self.active as u32)
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.resolution as f64
    }

    fn stride(&self, axis: usize) -> usize {
        self.resolution.pow(axis as u32)
    }

    /// Coordinates of grid point `p`; inactive entries are zero.
    pub fn point(&self, p: usize) -> [f64; MAX_ACTIVE_AXES] {
        let h = self.spacing();
        let mut x = [0.0; MAX_ACTIVE_AXES];
        let mut rest = p;
        for xi in x.iter_mut().take(self.active) {
            *xi = (rest % self.resolution) as f64 * h;
            rest /= self.resolution;
        }
        x
    }

    pub fn sample(&self, f: impl Fn(&[f64; MAX_ACTIVE_AXES]) -> f64) -> Vec<f64> {
        (0..self.npts()).map(|p| f(&self.point(p))).collect()
    }

    /// Errors when a chain of `order` nested stencils would wrap around the grid.
    pub fn check_stencil(&self, order: usize, fd: FdOrder) -> Result<()> {
        if 2 * order * fd.half_width() >= self.resolution {
            return Err(Error::Numeric(format!(
                "{order} nested derivatives of fd order {fd} need more than {} points per axis",
                self.resolution
            )));
        }
        Ok(())
    }

    /// `∂u/∂x^axis`, written into `out`; zero off the active axes.
    pub fn partial_into(&self, u: &[f64], axis: usize, fd: FdOrder, out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.npts());
        if axis >= self.active {
            out.fill(0.0);
            return;
        }
        let r = self.resolution;
        let stride = self.stride(axis);
        let block = stride * r;
        let inv_h = 1.0 / self.spacing();
        let w = fd.weights();
        for base in (0..u.len()).step_by(block) {
            for inner in 0..stride {
                let at = |i: usize| base + inner + (i % r) * stride;
                for i in 0..r {
                    let mut acc = 0.0;
                    for (k, wk) in w.iter().enumerate() {
                        let k = k + 1;
                        acc += wk * (u[at(i + k)] - u[at(i + r - k)]);
                    }
                    out[at(i)] = acc * inv_h;
                }
            }
        }
    }

    pub fn partial(&self, u: &[f64], axis: usize, fd: FdOrder) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.partial_into(u, axis, fd, &mut out);
        out
    }
}
