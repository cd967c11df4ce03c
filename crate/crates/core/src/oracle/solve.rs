use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{LadderString, SparseOp};
use super::state::SteadyDensityMatrix;
use super::{build_liouvillian, FockOperatorSpec, DEFAULT_DIM_CAP};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest superoperator size solved by sparse LU; above it GMRES is used.
    pub direct_limit: usize,
    pub gmres_restart: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
    /// Relative residual above which the kernel is declared not one-dimensional.
    pub singular_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            direct_limit: 250_000,
            gmres_restart: 80,
            gmres_tol: 1e-13,
            gmres_max_iter: 50_000,
            singular_tol: 1e-6,
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Trace-constrained system: row 0 of `L` replaced by the trace functional.
fn constrained(l: &SparseOp, d: usize) -> SparseOp {
    let mut t: Vec<(usize, usize, Complex64)> = l.entries.iter().copied().filter(|e| e.0 != 0).collect();
    t.extend((0..d).map(|i| (0, i + d * i, Complex64::new(1.0, 0.0))));
    SparseOp::from_triplets(l.n, t)
}

fn solve_direct(m: &SparseOp) -> Result<Vec<Complex64>> {
    let triplets: Vec<Triplet<usize, usize, Complex64>> =
        m.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(m.n, m.n, &triplets)
        .map_err(|e| Error::Dimension(format!("sparse assembly failed: {e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::SingularSystem(format!("sparse LU failed: {e:?}")))?;
    let mut b = Mat::<Complex64>::zeros(m.n, 1);
    b[(0, 0)] = Complex64::new(1.0, 0.0);
    let x = lu.solve(&b);
    Ok((0..m.n).map(|i| x[(i, 0)]).collect())
}

/// Restarted GMRES with a Jacobi right preconditioner for `M x = e₀`.
fn solve_gmres(m: &SparseOp, opts: &SolverOptions) -> Result<Vec<Complex64>> {
    let n = m.n;
    let mut diag = vec![Complex64::new(1.0, 0.0); n];
    for &(r, c, v) in &m.entries {
        if r == c && v.norm() > 0.0 {
            diag[r] = v;
        }
    }
    let precond = |v: &[Complex64]| -> Vec<Complex64> { v.iter().zip(&diag).map(|(a, d)| a / d).collect() };
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[0] = Complex64::new(1.0, 0.0);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let restart = opts.gmres_restart.max(2);
    let mut iters = 0;
    while iters < opts.gmres_max_iter {
        let ax = m.apply(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let beta = norm(&r);
        if beta <= opts.gmres_tol {
            return Ok(x);
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![Complex64::new(0.0, 0.0); restart]; restart + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); restart];
        let mut sn = vec![Complex64::new(0.0, 0.0); restart];
        let mut g = vec![Complex64::new(0.0, 0.0); restart + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            iters += 1;
            let mut w = m.apply(&precond(&basis[k]));
            for (i, v) in basis.iter().enumerate() {
                let hij: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[i][k] = hij;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            }
            let wn = norm(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k].norm_sqr() + h[k + 1][k].norm_sqr()).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = Complex64::new(denom, 0.0);
            h[k + 1][k] = Complex64::new(0.0, 0.0);
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            if g[k + 1].norm() <= opts.gmres_tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![Complex64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![Complex64::new(0.0, 0.0); n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vi)| *u += yi * vi);
        }
        x.iter_mut().zip(precond(&update)).for_each(|(xi, u)| *xi += u);
    }
    Err(Error::NoConvergence(format!("GMRES did not reach {} in {} iterations", opts.gmres_tol, opts.gmres_max_iter)))
}

/// Solves `L ρ = 0` with `tr ρ = 1`.
pub fn steady_state(l: &SparseOp, dims: &[usize], opts: &SolverOptions) -> Result<SteadyDensityMatrix> {
    let d: usize = dims.iter().product();
    if l.n != d * d {
        return Err(Error::Dimension(format!("Liouvillian of size {} does not match dims {dims:?}", l.n)));
    }
    let m = constrained(l, d);
    let x = if l.n <= opts.direct_limit { solve_direct(&m)? } else { solve_gmres(&m, opts)? };
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularSystem("non-finite steady-state solution".into()));
    }
    let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            rho[i * d + j] = 0.5 * (x[i + d * j] + x[j + d * i].conj());
        }
    }
    let tr: Complex64 = (0..d).map(|i| rho[i * d + i]).sum();
    if tr.norm() == 0.0 {
        return Err(Error::SingularSystem("steady state has zero trace".into()));
    }
    rho.iter_mut().for_each(|v| *v /= tr.re);
    let mut vec_rho = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            vec_rho[i + d * j] = rho[i * d + j];
        }
    }
    let residual_norm = norm(&l.apply(&vec_rho));
    let l_scale = l.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max);
    if residual_norm > opts.singular_tol * l_scale.max(1.0) * norm(&vec_rho) {
        return Err(Error::SingularSystem(format!("steady-state residual {residual_norm:.3e} too large")));
    }
    Ok(SteadyDensityMatrix { dims: dims.to_vec(), rho, residual_norm, truncation_converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub rel_tol: f64,
    /// Absolute tolerance for observables that vanish.
    pub abs_floor: f64,
    pub growth: f64,
    pub dim_cap: usize,
    pub solver: SolverOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions { rel_tol: 1e-8, abs_floor: 1e-12, growth: 1.5, dim_cap: DEFAULT_DIM_CAP, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergedSolve {
    /// Observables from the largest truncation solved.
    pub values: Vec<Complex64>,
    pub dims_used: Vec<usize>,
    /// Smallest truncation whose observables already agreed with `dims_used`.
    pub converged_from: Option<Vec<usize>>,
    pub truncation_converged: bool,
    pub state: SteadyDensityMatrix,
}

/// Grows every mode by `growth` until all observables settle or the cap is hit.
pub fn converged_solve<F>(
    build: F,
    observables: &[LadderString],
    start_dims: &[usize],
    opts: &ConvergenceOptions,
) -> Result<ConvergedSolve>
where
    F: Fn(&[usize]) -> Result<FockOperatorSpec>,
{
    if !(opts.growth > 1.0) {
        return Err(Error::InvalidParams(format!("growth factor must exceed 1, got {}", opts.growth)));
    }
    let mut dims = start_dims.to_vec();
    let mut previous: Option<(Vec<usize>, Vec<Complex64>)> = None;
    let mut last: Option<ConvergedSolve> = None;
    loop {
        let mut spec = build(&dims)?;
        spec.dim_cap = opts.dim_cap;
        if spec.validate().is_err() {
            if let Some(mut out) = last {
                out.truncation_converged = false;
                return Ok(out);
            }
            spec.validate()?;
        }
        let l = build_liouvillian(&spec)?;
        let state = steady_state(&l, &spec.dims, &opts.solver)?;
        let values = observables.iter().map(|o| state.expect_string(o)).collect::<Result<Vec<_>>>()?;
        if let Some((pdims, pvals)) = &previous {
            let settled = values
                .iter()
                .zip(pvals)
                .all(|(v, p)| (v - p).norm() <= opts.rel_tol * v.norm() + opts.abs_floor);
            if settled {
                let mut state = state;
                state.truncation_converged = true;
                return Ok(ConvergedSolve {
                    values,
                    dims_used: dims,
                    converged_from: Some(pdims.clone()),
                    truncation_converged: true,
                    state,
                });
            }
        }
        previous = Some((dims.clone(), values.clone()));
        last = Some(ConvergedSolve { values, dims_used: dims.clone(), converged_from: None, truncation_converged: false, state });
        dims = dims.iter().map(|&d| ((d as f64) * opts.growth).ceil() as usize).collect();
    }
}
