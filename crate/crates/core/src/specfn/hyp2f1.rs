use num_complex::Complex64;

use super::exact::ExactComplex;
use super::{check_nonzero, CompensatedSum, SeriesControl, CANCELLATION_LIMIT};
use crate::error::Result;

/// Value of a terminating `₂F₁` together with its conditioning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1 {
    pub value: Complex64,
    /// Largest partial-sum magnitude over the magnitude of the result.
    pub cancellation: f64,
    /// True when the value came from the exact re-summation.
    pub extended: bool,
}

impl Hyp2F1 {
    /// Severe cancellation that was not repaired by the exact path.
    pub fn flagged(&self) -> bool {
        !self.extended && self.cancellation > CANCELLATION_LIMIT
    }
}

/// `₂F₁(−jneg, b; c; z)`, a polynomial of degree `jneg` in `z`.
pub fn hyp2f1_terminating(
    jneg: usize,
    b: Complex64,
    c: Complex64,
    z: f64,
    ctl: &SeriesControl,
) -> Result<Hyp2F1> {
    ctl.validate()?;
    for k in 0..jneg {
        check_nonzero("2F1 denominator (c)_k", c + k as f64)?;
    }
    let mut sum = CompensatedSum::new(ctl.use_compensated_sum);
    let mut term = Complex64::new(1.0, 0.0);
    sum.add(term);
    let mut peak = 1.0f64;
    for k in 0..jneg {
        let kf = k as f64;
        term *= (kf - jneg as f64) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum.add(term);
        peak = peak.max(sum.value().norm()).max(term.norm());
    }
    let value = sum.value();
    let cancellation = if value.norm() > 0.0 { peak / value.norm() } else { f64::INFINITY };
    if cancellation > CANCELLATION_LIMIT && ctl.extended_fallback {
        let exact = exact_sum(jneg, b, c, z)?;
        return Ok(Hyp2F1 { value: exact, cancellation, extended: true });
    }
    Ok(Hyp2F1 { value, cancellation, extended: false })
}

fn exact_sum(jneg: usize, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    let b = ExactComplex::from_f64(b)?;
    let c = ExactComplex::from_f64(c)?;
    let z = ExactComplex::from_f64(Complex64::new(z, 0.0))?;
    let mut term = ExactComplex::from_int(1);
    let mut sum = term.clone();
    for k in 0..jneg {
        let ki = ExactComplex::from_int(k as i64);
        let num = ExactComplex::from_int(k as i64 - jneg as i64).mul(&b.add(&ki)).mul(&z);
        let den = c.add(&ki).mul(&ExactComplex::from_int(k as i64 + 1));
        term = term.mul(&num).div(&den)?;
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    Ok(sum.to_f64())
}
