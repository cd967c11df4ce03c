//! `₀F₂(; a1, a2; x)` evaluated in log space.
//!
//! For the drive strengths of interest the argument reaches 1e6 and beyond,
//! where the raw series overflows long before it converges. Terms are
//! therefore carried with a shared running scale factor.

use num_complex::Complex64;

use super::{check_pole, CompensatedSum, SeriesControl};
use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e250;
const CONSECUTIVE_SMALL: usize = 3;

struct ScaledSeries {
    a1: Complex64,
    a2: Complex64,
    term: Complex64,
    sum: CompensatedSum,
    small_run: usize,
}

impl ScaledSeries {
    fn new(a1: Complex64, a2: Complex64, ctl: &SeriesControl) -> Self {
        let mut sum = CompensatedSum::new(ctl.use_compensated_sum);
        sum.add(Complex64::new(1.0, 0.0));
        ScaledSeries { a1, a2, term: Complex64::new(1.0, 0.0), sum, small_run: 0 }
    }

    /// Advance from term `j` to term `j + 1`; returns the magnitude of the ratio.
    fn step(&mut self, j: usize, x: f64, rel_tol: f64) -> f64 {
        let jf = j as f64;
        let ratio = x / ((jf + 1.0) * (self.a1 + jf) * (self.a2 + jf));
        self.term *= ratio;
        self.sum.add(self.term);
        let r = ratio.norm();
        if r < 0.5 && self.term.norm() <= rel_tol * self.sum.value().norm() {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        r
    }

    fn converged(&self) -> bool {
        self.small_run >= CONSECUTIVE_SMALL
    }

    fn magnitude(&self) -> f64 {
        self.term.norm().max(self.sum.value().norm())
    }

    fn rescale(&mut self, f: f64) {
        self.term *= f;
        self.sum.scale(f);
    }
}

fn check_argument(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("0F2 argument must be finite and nonnegative, got {x}")));
    }
    Ok(())
}

fn finish_log(sum: Complex64) -> Result<Complex64> {
    if sum.norm() == 0.0 || !sum.norm().is_finite() {
        return Err(Error::Domain("0F2 series sum vanished or overflowed".into()));
    }
    Ok(sum.ln())
}

/// `log ₀F₂(; a1, a2; x)` for real `x ≥ 0`.
pub fn hyp0f2_log(a1: Complex64, a2: Complex64, x: f64, ctl: &SeriesControl) -> Result<Complex64> {
    ctl.validate()?;
    check_pole("0F2 parameter a1", a1)?;
    check_pole("0F2 parameter a2", a2)?;
    check_argument(x)?;
    if x == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut s = ScaledSeries::new(a1, a2, ctl);
    let mut log_scale = 0.0;
    for j in 0..ctl.max_terms {
        s.step(j, x, ctl.rel_tol);
        let m = s.magnitude();
        if m > RESCALE_ABOVE {
            s.rescale(1.0 / m);
            log_scale += m.ln();
        }
        if s.converged() {
            return Ok(finish_log(s.sum.value())? + log_scale);
        }
    }
    Err(Error::NonConvergence { what: "0F2 series", terms: ctl.max_terms })
}

/// `log[₀F₂(; a1+m, a2+n; x) / ₀F₂(; a1, a2; x)]`.
///
/// Both series are summed in lockstep under one scale factor, so the ratio
/// stays finite when the individual functions would overflow.
pub fn hyp0f2_log_ratio(
    a1: Complex64,
    a2: Complex64,
    m: usize,
    n: usize,
    x: f64,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    ctl.validate()?;
    check_pole("0F2 parameter a1", a1)?;
    check_pole("0F2 parameter a2", a2)?;
    let b1 = a1 + m as f64;
    let b2 = a2 + n as f64;
    check_pole("0F2 parameter a1 + m", b1)?;
    check_pole("0F2 parameter a2 + n", b2)?;
    check_argument(x)?;
    if x == 0.0 || (m == 0 && n == 0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut num = ScaledSeries::new(b1, b2, ctl);
    let mut den = ScaledSeries::new(a1, a2, ctl);
    for j in 0..ctl.max_terms {
        num.step(j, x, ctl.rel_tol);
        den.step(j, x, ctl.rel_tol);
        let m = num.magnitude().max(den.magnitude());
        if m > RESCALE_ABOVE {
            num.rescale(1.0 / m);
            den.rescale(1.0 / m);
        }
        if num.converged() && den.converged() {
            return Ok(finish_log(num.sum.value())? - finish_log(den.sum.value())?);
        }
    }
    Err(Error::NonConvergence { what: "0F2 ratio series", terms: ctl.max_terms })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close_log(a: Complex64, b: Complex64, tol: f64) -> bool {
        let d = a - b;
        let wrapped = d.im - TAU * (d.im / TAU).round();
        d.re.abs() <= tol * b.norm().max(1.0) && wrapped.abs() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn identical_parameters_give_zero() {
        let ctl = SeriesControl::default();
        let r = hyp0f2_log_ratio(c(0.3, 1.0), c(0.3, -1.0), 0, 0, 12.0, &ctl).unwrap();
        assert_eq!(r, c(0.0, 0.0));
        let r = hyp0f2_log_ratio(c(0.3, 1.0), c(0.3, -1.0), 3, 2, 0.0, &ctl).unwrap();
        assert_eq!(r, c(0.0, 0.0));
    }

    // 200-term direct summation, 50 digits.
    #[test]
    fn small_integer_parameters() {
        let ctl = SeriesControl::default();
        let r = hyp0f2_log_ratio(c(2.0, 0.0), c(2.0, 0.0), 1, 0, 1.0, &ctl).unwrap();
        assert!((r - c(-0.074_239_745_152_317_18, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_parameters_near_poles() {
        let ctl = SeriesControl::default();
        let a1 = c(-3.7, 0.2);
        let r = hyp0f2_log_ratio(a1, a1.conj(), 2, 1, 50.0, &ctl).unwrap();
        let want = c(0.520_721_520_665_793_9, 2.991_765_503_870_778_7);
        assert!(close_log(r, want, 1e-12), "{r} vs {want}");
    }

    #[test]
    fn large_argument_stays_finite() {
        let ctl = SeriesControl::default();
        let r = hyp0f2_log_ratio(c(0.5, 2.0), c(0.5, -1.0), 1, 0, 1e4, &ctl).unwrap();
        let want = c(-2.355_820_507_117_873, 1.247_978_273_299_122);
        assert!(close_log(r, want, 1e-12), "{r} vs {want}");
        let l = hyp0f2_log(c(1.5, 2.0), c(0.5, -1.0), 1e6, &ctl).unwrap();
        let want = c(290.877_615_515_998_87, -2.931_939_925_182_549_4);
        assert!(close_log(l, want, 1e-13), "{l} vs {want}");
    }

    #[test]
    fn errors() {
        let ctl = SeriesControl::default();
        assert!(matches!(
            hyp0f2_log_ratio(c(-2.0, 0.0), c(1.0, 0.0), 0, 0, 1.0, &ctl),
            Err(Error::Pole { .. })
        ));
        assert!(matches!(
            hyp0f2_log_ratio(c(-2.5, 0.0), c(1.0, 0.0), 0, 0, -1.0, &ctl),
            Err(Error::Domain(_))
        ));
        let tiny = ctl.with_max_terms(3);
        assert!(matches!(
            hyp0f2_log_ratio(c(1.0, 0.0), c(1.0, 0.0), 1, 1, 1e5, &tiny),
            Err(Error::NonConvergence { .. })
        ));
    }
}
