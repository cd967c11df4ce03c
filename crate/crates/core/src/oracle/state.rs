use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::ops::{decode, LadderString, SparseOp};
use crate::error::{Error, Result};
use crate::qgrid::{GridSpec, QGrid};

/// Steady-state density matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyDensityMatrix {
    pub dims: Vec<usize>,
    pub rho: Vec<Complex64>,
    /// `‖L vec(ρ)‖₂` of the returned state.
    pub residual_norm: f64,
    pub truncation_converged: bool,
}

impl SteadyDensityMatrix {
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[i * self.dim() + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `tr(ρ A)`.
    pub fn expect(&self, op: &SparseOp) -> Complex64 {
        op.entries.iter().map(|&(r, c, v)| v * self.get(c, r)).sum()
    }

    pub fn expect_string(&self, s: &LadderString) -> Result<Complex64> {
        let op = SparseOp::from_terms(&self.dims, &[(Complex64::new(1.0, 0.0), s.clone())])?;
        Ok(self.expect(&op))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    /// Reduced state of one mode.
    pub fn reduced(&self, mode: usize) -> Result<SteadyDensityMatrix> {
        if mode >= self.dims.len() {
            return Err(Error::Dimension(format!("no mode {mode} in dims {:?}", self.dims)));
        }
        let d = self.dim();
        let dm = self.dims[mode];
        let mut out = vec![Complex64::new(0.0, 0.0); dm * dm];
        let mut oi = vec![0; self.dims.len()];
        let mut oj = vec![0; self.dims.len()];
        for i in 0..d {
            decode(i, &self.dims, &mut oi);
            for j in 0..d {
                decode(j, &self.dims, &mut oj);
                let same_rest = (0..self.dims.len()).all(|k| k == mode || oi[k] == oj[k]);
                if same_rest {
                    out[oi[mode] * dm + oj[mode]] += self.get(i, j);
                }
            }
        }
        Ok(SteadyDensityMatrix {
            dims: vec![dm],
            rho: out,
            residual_norm: self.residual_norm,
            truncation_converged: self.truncation_converged,
        })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let d = self.dim();
        let m = faer::Mat::<Complex64>::from_fn(d, d, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()));
        let ev = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::NoConvergence(format!("eigenvalue solver: {e:?}")))?;
        Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// `Q(α) = ⟨α|ρ|α⟩/π` of a single-mode state.
pub fn qfunction_from_rho(state: &SteadyDensityMatrix, grid: &GridSpec) -> Result<QGrid> {
    if state.dims.len() != 1 {
        return Err(Error::Dimension("Q-function needs a single-mode state; reduce first".into()));
    }
    let d = state.dim();
    QGrid::from_fn(grid, |alpha| {
        let mut coh = Vec::with_capacity(d);
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..d {
            coh.push(c);
            c *= alpha / ((n + 1) as f64).sqrt();
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..d {
                row += state.get(i, j) * coh[j];
            }
            acc += coh[i].conj() * row;
        }
        acc.re / PI
    })
}
