//! Brute-force steady states of Lindblad master equations in a truncated
//! Fock basis.
//!
//! Density matrices are vectorized by stacking columns, so `ρ[i, j]` sits
//! at index `i + D·j` and `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

mod models;
mod ops;
mod solve;
mod state;

pub use models::{paramp_spec, transmon_cavity_spec, CAVITY, TRANSMON};
pub use ops::{Ladder, LadderString, SparseOp};
pub use solve::{converged_solve, steady_state, ConvergedSolve, ConvergenceOptions, SolverOptions};
pub use state::{qfunction_from_rho, SteadyDensityMatrix};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the product of mode dimensions.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockOperatorSpec {
    pub dims: Vec<usize>,
    pub hamiltonian_terms: Vec<(Complex64, LadderString)>,
    /// Collapse operators with the rate absorbed into the amplitude.
    pub collapse_ops: Vec<(Complex64, LadderString)>,
    pub dim_cap: usize,
}

impl FockOperatorSpec {
    pub fn new(dims: Vec<usize>) -> Self {
        FockOperatorSpec { dims, hamiltonian_terms: Vec::new(), collapse_ops: Vec::new(), dim_cap: DEFAULT_DIM_CAP }
    }

    pub fn hamiltonian(mut self, coeff: Complex64, op: LadderString) -> Self {
        self.hamiltonian_terms.push((coeff, op));
        self
    }

    pub fn collapse(mut self, amplitude: Complex64, op: LadderString) -> Self {
        self.collapse_ops.push((amplitude, op));
        self
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::Dimension(format!("every mode needs at least two levels, got {:?}", self.dims)));
        }
        let total = self.dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t <= self.dim_cap => Ok(()),
            _ => Err(Error::Dimension(format!("dims {:?} exceed the cap of {}", self.dims, self.dim_cap))),
        }
    }

    pub fn hamiltonian_matrix(&self) -> Result<SparseOp> {
        self.validate()?;
        let h = SparseOp::from_terms(&self.dims, &self.hamiltonian_terms)?;
        let scale = h.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max);
        if h.hermiticity_defect() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidParams("hamiltonian terms are not hermitian".into()));
        }
        Ok(h)
    }

    pub fn collapse_matrices(&self) -> Result<Vec<SparseOp>> {
        self.validate()?;
        self.collapse_ops
            .iter()
            .map(|(amp, s)| SparseOp::from_terms(&self.dims, &[(*amp, s.clone())]))
            .collect()
    }
}

/// Liouvillian superoperator `−i[H, ·] + Σ D[c_k]` acting on `vec(ρ)`.
pub fn build_liouvillian(spec: &FockOperatorSpec) -> Result<SparseOp> {
    let h = spec.hamiltonian_matrix()?;
    let cs = spec.collapse_matrices()?;
    let d = spec.total_dim();
    let i = Complex64::i();
    let mut k_terms: Vec<(usize, usize, Complex64)> = h.entries.iter().map(|&(r, c, v)| (r, c, -i * v)).collect();
    for c in &cs {
        let cdc = c.adjoint().mul(c);
        k_terms.extend(cdc.entries.iter().map(|&(r, cc, v)| (r, cc, -0.5 * v)));
    }
    let mut t: Vec<(usize, usize, Complex64)> = Vec::new();
    for &(r, c, v) in &k_terms {
        for j in 0..d {
            t.push((r + d * j, c + d * j, v));
            t.push((j + d * r, j + d * c, v.conj()));
        }
    }
    for c in &cs {
        for &(r1, c1, v1) in &c.entries {
            for &(r2, c2, v2) in &c.entries {
                t.push((r1 + d * r2, c1 + d * c2, v1 * v2.conj()));
            }
        }
    }
    Ok(SparseOp::from_triplets(d * d, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn two_level_decay() {
        let g: f64 = 0.7;
        let spec = FockOperatorSpec::new(vec![2]).collapse(Complex64::new(g.sqrt(), 0.0), LadderString::destroy(0));
        let l = build_liouvillian(&spec).unwrap();
        assert_eq!(l.n, 4);
        // ρ = |1><1| has vec index 1 + 2·1 = 3
        let mut rho = vec![Complex64::new(0.0, 0.0); 4];
        rho[3] = one();
        let dr = l.apply(&rho);
        assert!((dr[3] + g).norm() < 1e-15);
        assert!((dr[0] - g).norm() < 1e-15);
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let spec = FockOperatorSpec::new(vec![4, 3])
            .hamiltonian(Complex64::new(1.3, 0.0), LadderString::normal(0, 1, 1))
            .hamiltonian(Complex64::new(0.0, 0.4), LadderString::create(0))
            .hamiltonian(Complex64::new(0.0, -0.4), LadderString::destroy(0))
            .hamiltonian(Complex64::new(0.0, 0.9), LadderString::destroy(0).then(&LadderString::create(1)))
            .hamiltonian(Complex64::new(0.0, -0.9), LadderString::create(0).then(&LadderString::destroy(1)))
            .hamiltonian(Complex64::new(-0.6, 0.0), LadderString::normal(1, 2, 2))
            .collapse(Complex64::new(1.1, 0.0), LadderString::destroy(0))
            .collapse(Complex64::new(0.3, 0.0), LadderString::destroy(1));
        let l = build_liouvillian(&spec).unwrap();
        let d = spec.total_dim();
        let mut col_trace = vec![Complex64::new(0.0, 0.0); l.n];
        for &(r, c, v) in &l.entries {
            if r % d == r / d {
                col_trace[c] += v;
            }
        }
        assert!(col_trace.iter().all(|v| v.norm() < 1e-12));

        let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..=i {
                let v = Complex64::new(((i * 7 + j * 3) % 5) as f64 * 0.1, if i == j { 0.0 } else { (i + j) as f64 * 0.05 });
                rho[i + d * j] = v;
                rho[j + d * i] = v.conj();
            }
        }
        let dr = l.apply(&rho);
        for i in 0..d {
            for j in 0..d {
                assert!((dr[i + d * j] - dr[j + d * i].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(FockOperatorSpec::new(vec![1]).validate().is_err());
        assert!(FockOperatorSpec::new(vec![100, 100]).validate().is_err());
        let bad = FockOperatorSpec::new(vec![3]).hamiltonian(Complex64::new(0.0, 1.0), LadderString::create(0));
        assert!(matches!(build_liouvillian(&bad), Err(Error::InvalidParams(_))));
        let wrong_mode = FockOperatorSpec::new(vec![3]).collapse(one(), LadderString::destroy(1));
        assert!(matches!(build_liouvillian(&wrong_mode), Err(Error::Dimension(_))));
    }
}
