//! Cavity coupled to a Duffing transmon, with the cavity adiabatically
//! eliminated.
//!
//! Model: `H = Δc a†a + i(ε a† − ε* a) + ig(a b† − a† b) + Δt b†b + (χ/2) b†²b²`,
//! losses `√γc a` and `√γt b`, with `Δt = Δc + Δct`. All rates share one
//! angular unit chosen by the caller.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::AmplitudeKernel;
use crate::qgrid::{GridSpec, QGrid};
use crate::specfn::{hyp0f2_log, hyp0f2_log_ratio, log_pochhammer, SeriesControl};

/// Highest `n + m` accepted by [`cavity_moment`].
pub const MAX_CAVITY_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonCavityParams {
    pub delta_c: f64,
    pub delta_ct: f64,
    pub g: f64,
    pub chi: f64,
    pub gamma_c: f64,
    pub gamma_t: f64,
    pub epsilon: Complex64,
}

impl TransmonCavityParams {
    pub fn validate(&self) -> Result<()> {
        let reals = [self.delta_c, self.delta_ct, self.g, self.chi, self.gamma_c, self.gamma_t];
        if reals.iter().any(|v| !v.is_finite()) || !self.epsilon.re.is_finite() || !self.epsilon.im.is_finite() {
            return Err(Error::InvalidParams("transmon parameters must be finite".into()));
        }
        if self.gamma_c <= 0.0 {
            return Err(Error::InvalidParams(format!("gamma_c must be positive, got {}", self.gamma_c)));
        }
        if self.gamma_t < 0.0 {
            return Err(Error::InvalidParams(format!("gamma_t must be nonnegative, got {}", self.gamma_t)));
        }
        if self.chi == 0.0 {
            return Err(Error::InvalidParams("chi must be nonzero".into()));
        }
        Ok(())
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_c + self.delta_ct
    }
}

/// Complex parameters of the single-oscillator model left after elimination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDuffingParams {
    /// `γ̃c = γc + 2iΔc`
    pub gamma_c_eff: Complex64,
    /// `γ̃t = γt + 2iΔt + 4g²/γ̃c`
    pub gamma_t_eff: Complex64,
    /// `ε̃ = 2gε/γ̃c`
    pub eps_eff: Complex64,
    /// `d = γ̃t/(iχ)`, the Gamma-function shift of the moment formula.
    pub d: Complex64,
    /// `2ε̃/(iχ)`; moments are `drive^m drive*^n / ((d)_m (d*)_n)` times a ₀F₂ ratio.
    pub drive: Complex64,
}

impl EffectiveDuffingParams {
    /// Argument `2|drive|²` of the hypergeometric normalization.
    pub fn hyp_argument(&self) -> f64 {
        2.0 * self.drive.norm_sqr()
    }
}

pub fn effective_params(p: &TransmonCavityParams) -> Result<EffectiveDuffingParams> {
    p.validate()?;
    let i = Complex64::i();
    let gamma_c_eff = Complex64::new(p.gamma_c, 2.0 * p.delta_c);
    let gamma_t_eff = Complex64::new(p.gamma_t, 2.0 * p.delta_t()) + 4.0 * p.g * p.g / gamma_c_eff;
    let eps_eff = 2.0 * p.g * p.epsilon / gamma_c_eff;
    let d = gamma_t_eff / (i * p.chi);
    let drive = 2.0 * eps_eff / (i * p.chi);
    Ok(EffectiveDuffingParams { gamma_c_eff, gamma_t_eff, eps_eff, d, drive })
}

/// Normally ordered moments `⟨x†ⁿ xᵐ⟩` for `n, m ≤ max_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub max_order: usize,
    entries: Vec<Complex64>,
}

impl MomentTable {
    pub fn build<F>(max_order: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<Complex64>,
    {
        let w = max_order + 1;
        let mut entries = vec![Complex64::new(0.0, 0.0); w * w];
        for n in 0..w {
            for m in n..w {
                let v = f(n, m)?;
                if n == m {
                    entries[n * w + m] = Complex64::new(v.re, 0.0);
                } else {
                    entries[n * w + m] = v;
                    entries[m * w + n] = v.conj();
                }
            }
        }
        Ok(MomentTable { max_order, entries })
    }

    /// `⟨x†ⁿ xᵐ⟩`; `None` above `max_order`.
    pub fn get(&self, n: usize, m: usize) -> Option<Complex64> {
        let w = self.max_order + 1;
        (n < w && m < w).then(|| self.entries[n * w + m])
    }
}

/// `⟨b†ⁿ bᵐ⟩` of the transmon.
pub fn transmon_moment(p: &TransmonCavityParams, n: usize, m: usize, ctl: &SeriesControl) -> Result<Complex64> {
    let e = effective_params(p)?;
    duffing_moment(e.d, e.drive, n, m, ctl)
}

/// Moments of the complex-Kerr steady state with shift `d` and drive `c`.
pub(crate) fn duffing_moment(d: Complex64, c: Complex64, n: usize, m: usize, ctl: &SeriesControl) -> Result<Complex64> {
    if n == 0 && m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if c.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let x = 2.0 * c.norm_sqr();
    let ratio = hyp0f2_log_ratio(d, d.conj(), m, n, x, ctl)?;
    let log_pre = m as f64 * c.ln() + n as f64 * c.conj().ln();
    let log_poch = log_pochhammer(d, m)? + log_pochhammer(d.conj(), n)?;
    Ok((log_pre - log_poch + ratio).exp())
}

pub fn transmon_moments(p: &TransmonCavityParams, max_order: usize, ctl: &SeriesControl) -> Result<MomentTable> {
    let e = effective_params(p)?;
    MomentTable::build(max_order, |n, m| duffing_moment(e.d, e.drive, n, m, ctl))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `⟨a†ⁿ aᵐ⟩` of the cavity, from `a = (2/γ̃c)(ε − g b)`.
pub fn cavity_moment(p: &TransmonCavityParams, n: usize, m: usize, ctl: &SeriesControl) -> Result<Complex64> {
    if n + m > MAX_CAVITY_ORDER {
        return Err(Error::InvalidParams(format!(
            "cavity moments are limited to n + m <= {MAX_CAVITY_ORDER}, got {}",
            n + m
        )));
    }
    let e = effective_params(p)?;
    let table = MomentTable::build(n.max(m), |k, j| duffing_moment(e.d, e.drive, k, j, ctl))?;
    let eps = p.epsilon;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=m {
        for k in 0..=n {
            let coeff = binomial(m, j) * binomial(n, k) * (-p.g).powi((j + k) as i32);
            let drive = eps.powu((m - j) as u32) * eps.conj().powu((n - k) as u32);
            acc += coeff * drive * table.get(k, j).expect("within table");
        }
    }
    if n == m {
        return Ok(Complex64::new((2.0 / e.gamma_c_eff).norm_sqr().powi(n as i32) * acc.re, 0.0));
    }
    let pre = (2.0 / e.gamma_c_eff).powu(m as u32) * (2.0 / e.gamma_c_eff.conj()).powu(n as u32);
    Ok(pre * acc)
}

pub fn cavity_moments(p: &TransmonCavityParams, max_order: usize, ctl: &SeriesControl) -> Result<MomentTable> {
    if 2 * max_order > MAX_CAVITY_ORDER {
        return Err(Error::InvalidParams(format!("cavity moment table order {max_order} too large")));
    }
    MomentTable::build(max_order, |n, m| cavity_moment(p, n, m, ctl))
}

/// Reflected amplitude `|1 − γc⟨a⟩/ε|`.
pub fn reflection(p: &TransmonCavityParams, ctl: &SeriesControl) -> Result<f64> {
    if p.epsilon.norm() == 0.0 {
        return Err(Error::Domain("reflection needs a nonzero drive".into()));
    }
    let a = cavity_moment(p, 0, 1, ctl)?;
    Ok((1.0 - p.gamma_c * a / p.epsilon).norm())
}

/// Drive detunings `Δc` at which the `k`-th transmon transition is resonant,
/// i.e. real roots of `Δc + Δct − 4g²Δc/(γc² + 4Δc²) = kχ`, ascending.
pub fn predict_peaks(p: &TransmonCavityParams, k: usize) -> Vec<f64> {
    let c0 = p.delta_ct - k as f64 * p.chi;
    let gc2 = p.gamma_c * p.gamma_c;
    let g2 = p.g * p.g;
    let coeffs = [4.0, 4.0 * c0, gc2 - 4.0 * g2, c0 * gc2];
    let scale = c0.abs().max(p.g.abs()).max(p.gamma_c).max(1.0);
    let mut roots = real_cubic_roots(coeffs);
    for r in roots.iter_mut() {
        *r = newton_polish(coeffs, *r);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
    roots
}

/// Residual of the peak condition, for checking roots.
pub fn peak_residual(p: &TransmonCavityParams, k: usize, delta_c: f64) -> f64 {
    let lhs = delta_c + p.delta_ct - 4.0 * p.g * p.g * delta_c / (p.gamma_c * p.gamma_c + 4.0 * delta_c * delta_c);
    lhs - k as f64 * p.chi
}

fn eval_cubic(c: [f64; 4], x: f64) -> (f64, f64) {
    let v = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
    let dv = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
    (v, dv)
}

fn newton_polish(c: [f64; 4], mut x: f64) -> f64 {
    for _ in 0..8 {
        let (v, dv) = eval_cubic(c, x);
        if dv == 0.0 || v == 0.0 {
            break;
        }
        let step = v / dv;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// Real roots of `c0 x³ + c1 x² + c2 x + c3` (`c0 ≠ 0`).
fn real_cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let (a, b, cc) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let tol = 1e-12 * ((q / 2.0).powi(2) + (p / 3.0).abs().powi(3)).max(f64::MIN_POSITIVE);
    if disc > tol {
        let sq = disc.sqrt();
        let t = (-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt();
        return vec![t - shift];
    }
    if p.abs() < 1e-300 {
        return vec![-q.cbrt() - shift];
    }
    let r = 2.0 * (-p / 3.0).max(0.0).sqrt();
    let arg = if r > 0.0 { (3.0 * q / (p * r)).clamp(-1.0, 1.0) } else { 0.0 };
    let phi = arg.acos() / 3.0;
    (0..3)
        .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
        .collect()
}

/// Transmon photon-number distribution `P(n)`.
pub fn transmon_pn(p: &TransmonCavityParams, n: usize, ctl: &SeriesControl) -> Result<f64> {
    let e = effective_params(p)?;
    let c2 = e.drive.norm_sqr();
    if c2 == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let d = e.d;
    let log_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
    let num = hyp0f2_log(d + n as f64, d.conj() + n as f64, c2, ctl)?;
    let den = hyp0f2_log(d, d.conj(), 2.0 * c2, ctl)?;
    let poch = log_pochhammer(d, n)?;
    let log_p = n as f64 * c2.ln() - log_fact - 2.0 * poch.re + num.re - den.re;
    Ok(log_p.exp())
}

/// Amplitude kernel of the transmon steady state.
pub fn transmon_kernel(p: &TransmonCavityParams, ctl: &SeriesControl) -> Result<AmplitudeKernel> {
    let e = effective_params(p)?;
    AmplitudeKernel::duffing(e.d, e.drive, ctl)
}

/// `Q(α) = ⟨α|ρ|α⟩/π` of the transmon on `α = x + iy`.
pub fn transmon_qfunction(p: &TransmonCavityParams, grid: &GridSpec, ctl: &SeriesControl) -> Result<QGrid> {
    let k = transmon_kernel(p, ctl)?;
    QGrid::from_fn(grid, |a| k.q(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingValidity {
    pub levels_in_well: f64,
    pub mean_excitation: f64,
    pub valid: bool,
}

/// Compares `⟨b†b⟩` with the number of bound states `√(E_J/8E_C)`.
pub fn duffing_validity(p: &TransmonCavityParams, ej_over_ec: f64, ctl: &SeriesControl) -> Result<DuffingValidity> {
    if !(ej_over_ec > 0.0 && ej_over_ec.is_finite()) {
        return Err(Error::InvalidParams(format!("E_J/E_C must be positive, got {ej_over_ec}")));
    }
    let levels_in_well = (ej_over_ec / 8.0).sqrt();
    let mean_excitation = transmon_moment(p, 1, 1, ctl)?.re;
    Ok(DuffingValidity { levels_in_well, mean_excitation, valid: mean_excitation < levels_in_well })
}

/// `E_J/E_C` of a transmon with frequency `ω_t = √(8 E_J E_C) − E_C`.
pub fn ej_over_ec(omega_t: f64, e_c: f64) -> f64 {
    let r = (omega_t + e_c) / e_c;
    r * r / 8.0
}
