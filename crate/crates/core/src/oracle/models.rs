use num_complex::Complex64;

use super::ops::LadderString;
use super::FockOperatorSpec;
use crate::error::Result;
use crate::paramp::ParampParams;
use crate::transmon::TransmonCavityParams;

pub const CAVITY: usize = 0;
pub const TRANSMON: usize = 1;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-mode parametric Duffing oscillator truncated at `dim` levels.
pub fn paramp_spec(p: &ParampParams, dim: usize) -> Result<FockOperatorSpec> {
    p.validate()?;
    let i = Complex64::i();
    let mut s = FockOperatorSpec::new(vec![dim])
        .hamiltonian(re(p.delta), LadderString::normal(0, 1, 1))
        .hamiltonian(i * p.eps1, LadderString::create(0))
        .hamiltonian(-i * p.eps1.conj(), LadderString::destroy(0))
        .hamiltonian(0.5 * i * p.eps2, LadderString::normal(0, 2, 0))
        .hamiltonian(-0.5 * i * p.eps2.conj(), LadderString::normal(0, 0, 2))
        .hamiltonian(re(0.5 * p.u), LadderString::normal(0, 2, 2))
        .collapse(re((2.0 * p.gamma1).sqrt()), LadderString::destroy(0));
    if p.gamma2 > 0.0 {
        s = s.collapse(re(p.gamma2.sqrt()), LadderString::normal(0, 0, 2));
    }
    Ok(s)
}

/// Cavity (mode 0) coupled to a Duffing transmon (mode 1).
pub fn transmon_cavity_spec(p: &TransmonCavityParams, dims: [usize; 2]) -> Result<FockOperatorSpec> {
    p.validate()?;
    let i = Complex64::i();
    let a = LadderString::destroy(CAVITY);
    let ad = LadderString::create(CAVITY);
    let b = LadderString::destroy(TRANSMON);
    let bd = LadderString::create(TRANSMON);
    let mut s = FockOperatorSpec::new(dims.to_vec())
        .hamiltonian(re(p.delta_c), LadderString::normal(CAVITY, 1, 1))
        .hamiltonian(i * p.epsilon, ad.clone())
        .hamiltonian(-i * p.epsilon.conj(), a.clone())
        .hamiltonian(i * p.g, a.clone().then(&bd))
        .hamiltonian(-i * p.g, ad.then(&b))
        .hamiltonian(re(p.delta_t()), LadderString::normal(TRANSMON, 1, 1))
        .hamiltonian(re(0.5 * p.chi), LadderString::normal(TRANSMON, 2, 2))
        .collapse(re(p.gamma_c.sqrt()), a);
    if p.gamma_t > 0.0 {
        s = s.collapse(re(p.gamma_t.sqrt()), b);
    }
    Ok(s)
}
