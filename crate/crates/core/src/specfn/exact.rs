//! Exact complex-rational arithmetic for re-summing badly cancelling series.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ExactComplex {
    re: BigRational,
    im: BigRational,
}

fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x} in exact path")))
}

impl ExactComplex {
    pub(crate) fn from_f64(z: Complex64) -> Result<Self> {
        Ok(ExactComplex { re: rational(z.re)?, im: rational(z.im)? })
    }

    pub(crate) fn from_int(k: i64) -> Self {
        ExactComplex { re: BigRational::from_integer(BigInt::from(k)), im: BigRational::zero() }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub(crate) fn add(&self, o: &Self) -> Self {
        ExactComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub(crate) fn mul(&self, o: &Self) -> Self {
        ExactComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub(crate) fn div(&self, o: &Self) -> Result<Self> {
        let den = &o.re * &o.re + &o.im * &o.im;
        if den.is_zero() {
            return Err(Error::Domain("division by zero in exact path".into()));
        }
        Ok(ExactComplex {
            re: (&self.re * &o.re + &self.im * &o.im) / &den,
            im: (&self.im * &o.re - &self.re * &o.im) / &den,
        })
    }

    pub(crate) fn to_f64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}
