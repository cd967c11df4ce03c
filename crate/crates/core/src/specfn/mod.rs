//! Complex special functions used by the steady-state formulas.
//!
//! Everything here is a pure function of its arguments. Series are
//! truncated according to a [`SeriesControl`].

mod exact;
mod gamma;
mod hyp0f2;
mod hyp2f1;

pub use gamma::{log_gamma, log_pochhammer};
pub use hyp0f2::{hyp0f2_log, hyp0f2_log_ratio};
pub use hyp2f1::{hyp2f1_terminating, Hyp2F1};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance below which a value counts as a nonpositive integer.
pub const POLE_TOL: f64 = 1e-12;

/// Cancellation indicator above which the exact re-summation kicks in.
pub const CANCELLATION_LIMIT: f64 = 1e6;

/// Truncation policy for every infinite sum in the crate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub use_compensated_sum: bool,
    /// Re-sum terminating series exactly when cancellation is severe.
    pub extended_fallback: bool,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-14,
            max_terms: 10_000,
            use_compensated_sum: true,
            extended_fallback: true,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParams(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidParams("max_terms must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_max_terms(self, max_terms: usize) -> Self {
        SeriesControl { max_terms, ..self }
    }
}

/// True when `z` lies within [`POLE_TOL`] of 0, -1, -2, ...
pub fn is_nonpositive_integer(z: Complex64) -> bool {
    if z.im.abs() > POLE_TOL || z.re > POLE_TOL {
        return false;
    }
    (z.re - z.re.round()).abs() <= POLE_TOL
}

pub(crate) fn check_pole(what: &'static str, z: Complex64) -> Result<()> {
    if is_nonpositive_integer(z) {
        Err(Error::Pole { what, at: z })
    } else {
        Ok(())
    }
}

pub(crate) fn check_nonzero(what: &'static str, z: Complex64) -> Result<()> {
    if z.norm() <= POLE_TOL {
        Err(Error::Pole { what, at: z })
    } else {
        Ok(())
    }
}

/// Principal-branch power `exp(expnt * Log(base))`.
///
/// With this definition `conj(base^expnt) == conj(base)^conj(expnt)` holds
/// everywhere off the negative real axis, and on it up to the sign of a
/// signed zero.
pub fn complex_power(base: Complex64, expnt: Complex64) -> Result<Complex64> {
    if base == Complex64::new(0.0, 0.0) {
        if expnt.im == 0.0 && expnt.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::Domain(format!("0 raised to {expnt}")));
    }
    Ok((expnt * base.ln()).exp())
}

/// Kahan-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
    compensated: bool,
}

impl CompensatedSum {
    pub(crate) fn new(compensated: bool) -> Self {
        CompensatedSum { compensated, ..Default::default() }
    }

    pub(crate) fn add(&mut self, x: Complex64) {
        if !self.compensated {
            self.sum += x;
            return;
        }
        neumaier_step(&mut self.sum.re, &mut self.comp.re, x.re);
        neumaier_step(&mut self.sum.im, &mut self.comp.im, x.im);
    }

    pub(crate) fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }

    pub(crate) fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier_step(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_of_one_is_one() {
        for e in [c(0.3, -2.0), c(-5.0, 0.0), c(0.0, 7.0)] {
            let p = complex_power(c(1.0, 0.0), e).unwrap();
            assert!((p - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sqrt_of_minus_one_is_i() {
        let p = complex_power(c(-1.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((p - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_base() {
        assert_eq!(complex_power(c(0.0, 0.0), c(2.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(complex_power(c(0.0, 0.0), c(0.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(complex_power(c(0.0, 0.0), c(-1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn pole_detection() {
        assert!(is_nonpositive_integer(c(0.0, 0.0)));
        assert!(is_nonpositive_integer(c(-3.0 + 1e-13, 0.0)));
        assert!(!is_nonpositive_integer(c(-3.0, 1e-9)));
        assert!(!is_nonpositive_integer(c(2.0, 0.0)));
        assert!(!is_nonpositive_integer(c(-2.5, 0.0)));
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::new(true);
        acc.add(c(1e16, 0.0));
        for _ in 0..1000 {
            acc.add(c(1.0, 0.0));
        }
        acc.add(c(-1e16, 0.0));
        assert_eq!(acc.value().re, 1000.0);
    }

    #[test]
    fn control_validation() {
        assert!(SeriesControl::default().validate().is_ok());
        let bad = SeriesControl { rel_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(SeriesControl::default().with_max_terms(0).validate().is_err());
    }
}
