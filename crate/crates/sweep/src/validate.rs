//! Analytic-versus-oracle comparisons.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fpsteady::oracle::{
    converged_solve, paramp_spec, qfunction_from_rho, transmon_cavity_spec, ConvergenceOptions, LadderString, CAVITY,
    TRANSMON,
};
use fpsteady::paramp::{self, ParampParams};
use fpsteady::qgrid::GridSpec;
use fpsteady::specfn::SeriesControl;
use fpsteady::transmon::{self, TransmonCavityParams};

pub const REL_TOL: f64 = 1e-6;
pub const ABS_FLOOR: f64 = 1e-9;
pub const MAX_MEAN_PHOTONS: f64 = 10.0;

/// Excess of `|a − o|` over the allowed error; at most 1 means agreement.
fn excess(a: Complex64, o: Complex64) -> f64 {
    (a - o).norm() / (REL_TOL * o.norm()).max(ABS_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParampAgreement {
    pub params: ParampParams,
    pub mean_photons: f64,
    pub oracle_dim: usize,
    pub truncation_converged: bool,
    /// Worst error over the tolerance for each group; ≤ 1 passes.
    pub moments: f64,
    pub pn: f64,
    pub q: f64,
}

impl ParampAgreement {
    pub fn pass(&self) -> bool {
        self.truncation_converged && self.moments <= 1.0 && self.pn <= 1.0 && self.q <= 1.0
    }
}

/// Parameter sets with `γ₁ = 1`, `U ≠ 0`, real `ε₁ ≥ 0`, `γ₂ ≥ 0` and at most
/// [`MAX_MEAN_PHOTONS`] photons, drawn reproducibly from `seed`.
pub fn random_paramp_sets(count: usize, seed: u64) -> Vec<ParampParams> {
    let ctl = SeriesControl::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u_mag = rng.gen_range(0.3..6.0);
        let p = ParampParams {
            delta: rng.gen_range(-6.0..6.0),
            eps1: Complex64::new(if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..3.0) }, 0.0),
            eps2: Complex64::from_polar(rng.gen_range(0.0..6.0), rng.gen_range(0.0..std::f64::consts::TAU)),
            u: if rng.gen_bool(0.5) { u_mag } else { -u_mag },
            gamma1: 1.0,
            gamma2: if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.5) },
        };
        let Ok(k) = paramp::kernel(&p, &ctl) else { continue };
        if k.moment(1, 1).re <= MAX_MEAN_PHOTONS {
            out.push(p);
        }
    }
    out
}

/// Normally ordered index pairs with `n + m ≤ max`.
pub fn normal_orders(max: usize) -> Vec<(usize, usize)> {
    (0..=max).flat_map(|n| (0..=max - n).map(move |m| (n, m))).collect()
}

/// Moments up to order 4, `P(n ≤ 20)` and a 41×41 Q grid against the oracle.
pub fn paramp_agreement(p: &ParampParams) -> fpsteady::Result<ParampAgreement> {
    let ctl = SeriesControl::default();
    let k = paramp::kernel(p, &ctl)?;
    let orders = normal_orders(4);
    let obs: Vec<LadderString> = orders.iter().map(|&(n, m)| LadderString::normal(0, n, m)).collect();
    let sol = converged_solve(|d| paramp_spec(p, d[0]), &obs, &[20], &ConvergenceOptions::default())?;
    let moments = orders.iter().zip(&sol.values).map(|(&(n, m), &o)| excess(k.moment(n, m), o)).fold(0.0, f64::max);
    let diag = sol.state.diagonal();
    let pn = (0..=20)
        .map(|n| excess(Complex64::new(k.pn(n), 0.0), Complex64::new(diag.get(n).copied().unwrap_or(0.0), 0.0)))
        .fold(0.0, f64::max);
    let mean = k.moment(1, 1).re;
    let grid = GridSpec::square((2.0 * mean.sqrt() + 3.0).min(10.0), 41);
    let qa = paramp::qfunction(p, &grid, &ctl)?;
    let qo = qfunction_from_rho(&sol.state, &grid)?;
    let q = qa
        .values
        .iter()
        .flatten()
        .zip(qo.values.iter().flatten())
        .map(|(&a, &o)| excess(Complex64::new(a, 0.0), Complex64::new(o, 0.0)))
        .fold(0.0, f64::max);
    Ok(ParampAgreement {
        params: *p,
        mean_photons: mean,
        oracle_dim: sol.dims_used[0],
        truncation_converged: sol.truncation_converged,
        moments,
        pn,
        q,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmonAgreement {
    pub cavity_photons: f64,
    /// Relative errors of `⟨a⟩`, `⟨b⟩`, `⟨b†b⟩`.
    pub rel_errors: [f64; 3],
    pub dims: Vec<usize>,
    pub truncation_converged: bool,
}

/// Adiabatic-elimination results against the two-mode oracle, solved at fixed `dims`.
pub fn transmon_agreement(p: &TransmonCavityParams, dims: [usize; 2]) -> fpsteady::Result<TransmonAgreement> {
    let ctl = SeriesControl::default();
    let spec = transmon_cavity_spec(p, dims)?;
    let l = fpsteady::oracle::build_liouvillian(&spec)?;
    let state = fpsteady::oracle::steady_state(&l, &spec.dims, &Default::default())?;
    let ex = |s: LadderString| state.expect_string(&s);
    let oracle = [
        ex(LadderString::destroy(CAVITY))?,
        ex(LadderString::destroy(TRANSMON))?,
        ex(LadderString::normal(TRANSMON, 1, 1))?,
    ];
    let analytic = [
        transmon::cavity_moment(p, 0, 1, &ctl)?,
        transmon::transmon_moment(p, 0, 1, &ctl)?,
        transmon::transmon_moment(p, 1, 1, &ctl)?,
    ];
    let rel_errors = [0, 1, 2].map(|i| (analytic[i] - oracle[i]).norm() / oracle[i].norm().max(ABS_FLOOR));
    // truncation check: the top Fock level of each mode must be negligible
    let mut tail = 0.0f64;
    for mode in [CAVITY, TRANSMON] {
        let d = state.reduced(mode)?.diagonal();
        tail = tail.max(*d.last().unwrap_or(&0.0));
    }
    Ok(TransmonAgreement {
        cavity_photons: ex(LadderString::normal(CAVITY, 1, 1))?.re,
        rel_errors,
        dims: dims.to_vec(),
        truncation_converged: tail < 1e-6,
    })
}

/// Weak dispersive drive with `γc/γt = ratio`, scaled down from the dispersive
/// figures so that both modes fit small truncations.
pub fn dispersive_test_point(ratio: f64) -> TransmonCavityParams {
    TransmonCavityParams {
        delta_c: 10.0,
        delta_ct: 30.0,
        g: 8.0,
        chi: -6.0,
        gamma_c: 20.0,
        gamma_t: 20.0 / ratio,
        epsilon: Complex64::new(3.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// The full oracle suite behind the `validate` subcommand.
pub fn run_validation(random_sets: usize, seed: u64) -> Vec<CheckLine> {
    let mut sets = random_paramp_sets(random_sets, seed);
    sets.push(ParampParams {
        delta: 1.5,
        eps1: Complex64::new(1.2, 0.0),
        eps2: Complex64::new(0.0, 0.0),
        u: -2.0,
        gamma1: 0.7,
        gamma2: 0.2,
    });
    let mut lines: Vec<CheckLine> = sets
        .par_iter()
        .enumerate()
        .map(|(i, p)| match paramp_agreement(p) {
            Ok(a) => CheckLine {
                name: format!("parametric set {i}"),
                pass: a.pass(),
                detail: format!(
                    "n={:.3} dim={} moments={:.2e} pn={:.2e} q={:.2e} (x tolerance)",
                    a.mean_photons, a.oracle_dim, a.moments, a.pn, a.q
                ),
            },
            Err(e) => CheckLine { name: format!("parametric set {i}"), pass: false, detail: e.to_string() },
        })
        .collect();
    let p = dispersive_test_point(20.0);
    lines.push(match transmon_agreement(&p, [15, 8]) {
        Ok(a) => CheckLine {
            name: "transmon weak dispersive drive".into(),
            pass: a.truncation_converged && a.rel_errors.iter().all(|&e| e <= 0.05),
            detail: format!("relative errors a={:.2e} b={:.2e} n_b={:.2e}", a.rel_errors[0], a.rel_errors[1], a.rel_errors[2]),
        },
        Err(e) => CheckLine { name: "transmon weak dispersive drive".into(), pass: false, detail: e.to_string() },
    });
    lines
}
