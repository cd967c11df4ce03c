use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evenly spaced sample points on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Axis { min, max, count }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::InvalidParams(format!("bad axis range [{}, {}]", self.min, self.max)));
        }
        if self.count == 0 || (self.count == 1 && self.max != self.min) {
            return Err(Error::InvalidParams(format!("axis needs at least two points, got {}", self.count)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }

    fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}

/// Rectangular sampling of the phase plane `α = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: Axis,
    pub y: Axis,
}

impl GridSpec {
    pub fn square(half_width: f64, count: usize) -> Self {
        let a = Axis::new(-half_width, half_width, count);
        GridSpec { x: a, y: a }
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()
    }
}

/// Q-function samples, `values[iy][ix]` at `x_axis[ix] + i y_axis[iy]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Riemann sum of the samples; close to 1 when the grid encloses the state.
    pub normalization_estimate: f64,
}

impl QGrid {
    pub fn from_fn<F>(spec: &GridSpec, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> f64,
    {
        spec.validate()?;
        let x_axis = spec.x.points();
        let y_axis = spec.y.points();
        let values: Vec<Vec<f64>> = y_axis
            .iter()
            .map(|&y| x_axis.iter().map(|&x| f(Complex64::new(x, y))).collect())
            .collect();
        let total: f64 = values.iter().flatten().sum();
        let normalization_estimate = total * spec.x.step() * spec.y.step();
        Ok(QGrid { x_axis, y_axis, values, normalization_estimate })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(ix, iy)` of the largest sample, first in row-major order on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut v = f64::NEG_INFINITY;
        for (iy, row) in self.values.iter().enumerate() {
            for (ix, &q) in row.iter().enumerate() {
                if q > v {
                    v = q;
                    best = (ix, iy);
                }
            }
        }
        best
    }

    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.x_axis[ix], self.y_axis[iy])
    }

    /// Strict local maxima over the 8-neighbourhood whose height is at least
    /// `rel_floor` times the global maximum, sorted by decreasing height.
    pub fn local_maxima(&self, rel_floor: f64) -> Vec<(usize, usize)> {
        let ny = self.values.len();
        let nx = self.x_axis.len();
        let floor = rel_floor * self.max();
        let mut out = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.values[iy][ix];
                if v < floor {
                    continue;
                }
                let mut is_max = true;
                'nb: for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                            continue;
                        }
                        let w = self.values[jy as usize][jx as usize];
                        // ties broken towards the earlier cell so plateaus count once
                        let earlier = (jy, jx) < (iy as i64, ix as i64);
                        if w > v || (w == v && earlier) {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    out.push((ix, iy));
                }
            }
        }
        out.sort_by(|a, b| self.values[b.1][b.0].total_cmp(&self.values[a.1][a.0]));
        out
    }

    /// Largest absolute pointwise difference; errors if the axes differ.
    pub fn max_abs_diff(&self, other: &QGrid) -> Result<f64> {
        if self.x_axis != other.x_axis || self.y_axis != other.y_axis {
            return Err(Error::Dimension("Q grids are sampled on different axes".into()));
        }
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
