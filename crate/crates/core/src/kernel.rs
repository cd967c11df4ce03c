//! Scaled amplitude sequences behind the closed-form steady states.
//!
//! Both models have a steady state of the form
//! `ρ ∝ Σ_jk a_j a_k* ...`, where moments, photon statistics and the
//! Q-function are all quadratic forms in one complex sequence `a_k`.
//! The kernel stores `c_k = a_k √(2^k / k!)`, which stays O(1) where the
//! raw `a_k` overflow, normalized so that `max |c_k| = 1`.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::specfn::{check_nonzero, check_pole, SeriesControl};

const RESCALE_ABOVE: f64 = 1e100;
const CONSECUTIVE_SMALL: usize = 5;
/// Extra entries kept past the truncation point for shifted moment sums.
const PAD: usize = 24;
const COMPONENT_CUTOFF: f64 = 1e-20;

#[derive(Debug, Clone)]
pub struct AmplitudeKernel {
    c: Vec<Complex64>,
    norm: f64,
    converged_at: usize,
    components: OnceLock<Vec<Vec<Complex64>>>,
}

impl AmplitudeKernel {
    /// Builds `c_0 = 1`, `c_1`, then `c_{k+1} = step(k, c_{k-1}, c_k)` for `k ≥ 1`.
    ///
    /// Generation stops once `|c_k|²` has stayed below `rel_tol² · Σ|c|²`
    /// for five consecutive indices, not before `min_terms`.
    pub fn generate<F>(c1: Complex64, min_terms: usize, ctl: &SeriesControl, mut step: F) -> Result<Self>
    where
        F: FnMut(usize, Complex64, Complex64) -> Complex64,
    {
        ctl.validate()?;
        let mut c = vec![Complex64::new(1.0, 0.0), c1];
        let mut total = 1.0 + c1.norm_sqr();
        let mut small_run = 0;
        let threshold = ctl.rel_tol * ctl.rel_tol;
        let mut converged_at = None;
        let mut k = 1;
        loop {
            if converged_at.is_none() {
                let last = c[k].norm_sqr();
                if last <= threshold * total && last <= c[k - 1].norm_sqr() {
                    small_run += 1;
                } else {
                    small_run = 0;
                }
                if small_run >= CONSECUTIVE_SMALL && k + 1 >= min_terms {
                    converged_at = Some(k + 1);
                }
            }
            if let Some(at) = converged_at {
                if c.len() >= at + PAD {
                    break;
                }
            }
            if k + 1 >= ctl.max_terms {
                return Err(Error::NonConvergence { what: "amplitude sequence", terms: ctl.max_terms });
            }
            let next = step(k, c[k - 1], c[k]);
            if !next.re.is_finite() || !next.im.is_finite() {
                return Err(Error::Domain(format!("amplitude recurrence produced {next} at index {}", k + 1)));
            }
            c.push(next);
            k += 1;
            if next.norm() > RESCALE_ABOVE {
                let f = 1.0 / next.norm();
                c.iter_mut().for_each(|v| *v *= f);
                total *= f * f;
            }
            total += c[k].norm_sqr();
        }
        let peak = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        c.iter_mut().for_each(|v| *v /= peak);
        let norm = c.iter().map(|v| v.norm_sqr()).sum();
        Ok(AmplitudeKernel { c, norm, converged_at: converged_at.unwrap_or(0), components: OnceLock::new() })
    }

    /// Sequence for the complex-Kerr steady state with `a_k = C^k / Γ(D + k)`.
    pub fn duffing(d: Complex64, c_amp: Complex64, ctl: &SeriesControl) -> Result<Self> {
        check_nonzero("Duffing parameter D", d)?;
        let c1 = c_amp * 2f64.sqrt() / d;
        Self::generate(c1, 2, ctl, |k, _, ck| {
            let kf = k as f64;
            ck * c_amp * (2.0 / (kf + 1.0)).sqrt() / (d + kf)
        })
    }

    /// Sequence `a_k = (−s)^k ₂F₁(−k, A−B; 2A; 2)` via the contiguous recurrence.
    pub fn parametric(s: Complex64, a: Complex64, b: Complex64, ctl: &SeriesControl) -> Result<Self> {
        let two_a = 2.0 * a;
        check_pole("parametric parameter 2A", two_a)?;
        let c1 = -s * (b / a) * 2f64.sqrt();
        Self::generate(c1, 2, ctl, |k, ckm1, ck| {
            let kf = k as f64;
            let first = 2.0 * b * (-s) * (2.0 / (kf + 1.0)).sqrt() * ck;
            let second = kf * s * s * (4.0 / (kf * (kf + 1.0))).sqrt() * ckm1;
            (first + second) / (two_a + kf)
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    /// Number of sequence entries needed to reach the truncation tolerance.
    pub fn terms(&self) -> usize {
        self.converged_at
    }

    /// `⟨x†ⁿ xᵐ⟩`.
    pub fn moment(&self, n: usize, m: usize) -> Complex64 {
        let len = self.c.len();
        let top = n.max(m);
        if top >= len {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..len - top {
            let w = shift_factor(j, m) * shift_factor(j, n);
            acc += self.c[j + m] * self.c[j + n].conj() * w;
        }
        acc / self.norm
    }

    /// Photon-number probability `P(n)`.
    pub fn pn(&self, n: usize) -> f64 {
        let mut acc = 0.0;
        let mut log_binom = 0.0;
        for i in n..self.c.len() {
            let j = i - n;
            if j > 0 {
                log_binom += ((i as f64) / (j as f64)).ln();
            }
            let mag = self.c[i].norm_sqr();
            if mag > 0.0 {
                acc += mag * (log_binom - i as f64 * LN_2).exp();
            }
        }
        acc / self.norm
    }

    /// Mixture components: `ρ = Σ_j |φ_j⟩⟨φ_j|` with
    /// `φ_j[m] = c_{j+m} √C(j+m, m) 2^{−(j+m)/2} / √Σ|c|²`.
    pub fn components(&self) -> &[Vec<Complex64>] {
        self.components.get_or_init(|| {
            let len = self.c.len();
            let inv = 1.0 / self.norm.sqrt();
            let mut lf = vec![0.0f64; len + 1];
            for i in 1..=len {
                lf[i] = lf[i - 1] + (i as f64).ln();
            }
            let mut out = Vec::new();
            for j in 0..len {
                let mut phi: Vec<Complex64> = (0..len - j)
                    .map(|m| {
                        let i = j + m;
                        let w = 0.5 * (lf[i] - lf[j] - lf[m]) - 0.5 * i as f64 * LN_2;
                        self.c[i] * (w.exp() * inv)
                    })
                    .collect();
                while phi.last().is_some_and(|v| v.norm() < COMPONENT_CUTOFF) {
                    phi.pop();
                }
                if !phi.is_empty() {
                    out.push(phi);
                }
            }
            out
        })
    }

    /// `Q(γ) = ⟨γ|ρ|γ⟩ / π`.
    pub fn q(&self, gamma: Complex64) -> f64 {
        let comps = self.components();
        let width = comps.iter().map(|v| v.len()).max().unwrap_or(0);
        let mut coh = Vec::with_capacity(width);
        let mut v = Complex64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
        let gc = gamma.conj();
        for n in 0..width {
            coh.push(v);
            v *= gc / ((n + 1) as f64).sqrt();
        }
        let total: f64 = comps
            .iter()
            .map(|phi| phi.iter().zip(&coh).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
            .sum();
        total / PI
    }
}

/// `Π_{i=1..m} √((j + i) / 2)`.
fn shift_factor(j: usize, m: usize) -> f64 {
    (1..=m).map(|i| ((j + i) as f64 / 2.0).sqrt()).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfn::{hyp0f2_log_ratio, hyp2f1_terminating, log_pochhammer};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_sequence() {
        let ctl = SeriesControl::default();
        let k = AmplitudeKernel::duffing(c(3.0, 1.0), c(0.0, 0.0), &ctl).unwrap();
        assert_eq!(k.moment(0, 0), c(1.0, 0.0));
        assert_eq!(k.moment(1, 0), c(0.0, 0.0));
        assert!((k.pn(0) - 1.0).abs() < 1e-15);
        assert!((k.q(c(0.7, -0.2)) - (-0.53f64).exp() / PI).abs() < 1e-15);
    }

    #[test]
    fn duffing_moments_match_hypergeometric_ratio() {
        let ctl = SeriesControl::default();
        let d = c(0.4, -2.5);
        let amp = c(1.3, 0.8);
        let k = AmplitudeKernel::duffing(d, amp, &ctl).unwrap();
        let x = 2.0 * amp.norm_sqr();
        for (n, m) in [(0, 1), (1, 1), (2, 1), (0, 3), (2, 2)] {
            let lr = hyp0f2_log_ratio(d, d.conj(), m, n, x, &ctl).unwrap();
            let pre = amp.powu(m as u32) * amp.conj().powu(n as u32);
            let poch = log_pochhammer(d, m).unwrap() + log_pochhammer(d.conj(), n).unwrap();
            let want = pre * (lr - poch).exp();
            let got = k.moment(n, m);
            assert!((got - want).norm() < 1e-12 * want.norm().max(1e-3), "({n},{m}): {got} vs {want}");
        }
    }

    #[test]
    fn parametric_sequence_matches_direct_hypergeometric() {
        let ctl = SeriesControl::default();
        let s = c(0.9, -0.4);
        let a = c(0.3, -0.6);
        let b = c(-0.2, 0.5);
        let k = AmplitudeKernel::parametric(s, a, b, &ctl).unwrap();
        let cs = k.coefficients();
        let ratio = cs[7] / cs[3];
        let raw = |n: usize| {
            let f = hyp2f1_terminating(n, a - b, 2.0 * a, 2.0, &ctl).unwrap().value;
            let fact: f64 = (1..=n).map(|i| i as f64).product();
            (-s).powu(n as u32) * f * (2f64.powi(n as i32) / fact).sqrt()
        };
        let want = raw(7) / raw(3);
        assert!((ratio - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn photon_distribution_is_normalized() {
        let ctl = SeriesControl::default();
        let k = AmplitudeKernel::parametric(c(1.1, 0.3), c(0.2, -1.0), c(0.5, 0.1), &ctl).unwrap();
        let total: f64 = (0..k.coefficients().len()).map(|n| k.pn(n)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = (0..k.coefficients().len()).map(|n| n as f64 * k.pn(n)).sum();
        assert!((mean - k.moment(1, 1).re).abs() < 1e-10 * mean);
    }

    #[test]
    fn q_integrates_to_one() {
        let ctl = SeriesControl::default();
        let k = AmplitudeKernel::duffing(c(1.0, -3.0), c(2.0, 1.0), &ctl).unwrap();
        let h = 0.1;
        let mut total = 0.0;
        for ix in -80..=80 {
            for iy in -80..=80 {
                total += k.q(c(ix as f64 * h, iy as f64 * h)) * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn doubling_max_terms_is_stable() {
        let ctl = SeriesControl::default();
        let a = AmplitudeKernel::duffing(c(0.2, 4.0), c(3.0, 0.0), &ctl).unwrap();
        let b = AmplitudeKernel::duffing(c(0.2, 4.0), c(3.0, 0.0), &ctl.with_max_terms(2 * ctl.max_terms)).unwrap();
        assert_eq!(a.moment(1, 1), b.moment(1, 1));
        let tiny = ctl.with_max_terms(5);
        assert!(matches!(
            AmplitudeKernel::duffing(c(0.2, 4.0), c(3.0, 0.0), &tiny),
            Err(Error::NonConvergence { .. })
        ));
    }
}
