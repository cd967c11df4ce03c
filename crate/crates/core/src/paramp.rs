//! Duffing oscillator under coherent and parametric drive with one- and
//! two-photon loss.
//!
//! Model: `H = Δc†c + i(ε₁c† − ε₁*c) + (i/2)(ε₂c†² − ε₂*c²) + (U/2)c†²c²`,
//! losses `√(2γ₁) c` and `√γ₂ c²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::AmplitudeKernel;
use crate::qgrid::{GridSpec, QGrid};
use crate::specfn::SeriesControl;
use crate::transmon::MomentTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParampParams {
    pub delta: f64,
    pub eps1: Complex64,
    pub eps2: Complex64,
    pub u: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl ParampParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.delta, self.u, self.gamma1, self.gamma2, self.eps1.re, self.eps1.im, self.eps2.re, self.eps2.im];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parametric oscillator parameters must be finite".into()));
        }
        if self.gamma1 <= 0.0 {
            return Err(Error::InvalidParams(format!("gamma1 must be positive, got {}", self.gamma1)));
        }
        if self.gamma2 < 0.0 {
            return Err(Error::InvalidParams(format!("gamma2 must be nonnegative, got {}", self.gamma2)));
        }
        if self.gamma2 == 0.0 && self.u == 0.0 {
            return Err(Error::InvalidParams("gamma2 and u cannot both vanish".into()));
        }
        Ok(())
    }

    pub fn derived(&self) -> Result<DerivedParampParams> {
        self.validate()?;
        let kappa1 = Complex64::new(self.gamma1, self.delta);
        let kappa2 = Complex64::new(self.gamma2, self.u);
        let a_const = kappa1 / kappa2;
        let (sqrt_ratio, b_const) = if self.eps2.norm() == 0.0 {
            (Complex64::new(0.0, 0.0), None)
        } else {
            let s = (self.eps2 / kappa2).sqrt();
            (s, Some(-self.eps1 / (kappa2 * s)))
        };
        Ok(DerivedParampParams { kappa1, kappa2, a_const, b_const, sqrt_ratio })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParampParams {
    /// `κ₁ = γ₁ + iΔ`
    pub kappa1: Complex64,
    /// `κ₂ = γ₂ + iU`
    pub kappa2: Complex64,
    /// `A = κ₁/κ₂`
    pub a_const: Complex64,
    /// `B = −ε₁/(κ₂ √(ε₂/κ₂))`; absent without parametric drive.
    pub b_const: Option<Complex64>,
    /// Principal `√(ε₂/κ₂)`, shared by every factor of the moment sums.
    pub sqrt_ratio: Complex64,
}

/// Amplitude kernel of the steady state.
///
/// Without parametric drive the model is a coherently driven complex-Kerr
/// oscillator and uses the Duffing sequence with `d = 2κ₁/κ₂`, `C = 2ε₁/κ₂`.
pub fn kernel(p: &ParampParams, ctl: &SeriesControl) -> Result<AmplitudeKernel> {
    let dp = p.derived()?;
    match dp.b_const {
        None => AmplitudeKernel::duffing(2.0 * dp.a_const, 2.0 * p.eps1 / dp.kappa2, ctl),
        Some(b) => AmplitudeKernel::parametric(dp.sqrt_ratio, dp.a_const, b, ctl),
    }
}

/// `⟨c†ᵐ cⁿ⟩`.
pub fn moment(p: &ParampParams, m: usize, n: usize, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(kernel(p, ctl)?.moment(m, n))
}

pub fn moments(p: &ParampParams, max_order: usize, ctl: &SeriesControl) -> Result<MomentTable> {
    let k = kernel(p, ctl)?;
    MomentTable::build(max_order, |m, n| Ok(k.moment(m, n)))
}

pub fn pn(p: &ParampParams, n: usize, ctl: &SeriesControl) -> Result<f64> {
    Ok(kernel(p, ctl)?.pn(n))
}

pub fn qfunction(p: &ParampParams, grid: &GridSpec, ctl: &SeriesControl) -> Result<QGrid> {
    let k = kernel(p, ctl)?;
    QGrid::from_fn(grid, |a| k.q(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    One,
    Two,
    Three,
}

impl Phase {
    pub fn stable_count(self) -> usize {
        match self {
            Phase::One => 1,
            Phase::Two => 2,
            Phase::Three => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub alpha: Complex64,
    pub stable: bool,
    pub eigenvalues: [Complex64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
    pub phase: Phase,
    /// Some eigenvalue sits on the imaginary axis; the parameters lie on a phase line.
    pub on_boundary: bool,
}

/// Eigenvalues of the real linearization `δα̇ = P δα + Q δα*`.
pub fn jacobian_eigenvalues(p: &ParampParams, alpha: Complex64) -> [Complex64; 2] {
    let kappa1 = Complex64::new(p.gamma1, p.delta);
    let i = Complex64::i();
    let pp = -kappa1 - 2.0 * i * p.u * alpha.norm_sqr();
    let qq = p.eps2 - i * p.u * alpha * alpha;
    let j = [[(pp + qq).re, -(pp - qq).im], [(pp + qq).im, (pp - qq).re]];
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let root = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    [tr / 2.0 + root, tr / 2.0 - root]
}

/// Mean-field fixed points for `ε₁ = 0`, `γ₂ = 0`.
pub fn classical_fixed_points(p: &ParampParams) -> Result<FixedPointSet> {
    p.validate()?;
    if p.eps1.norm() != 0.0 || p.gamma2 != 0.0 {
        return Err(Error::Domain("mean-field classification needs eps1 = 0 and gamma2 = 0".into()));
    }
    if p.u == 0.0 {
        return Err(Error::Domain("mean-field classification needs u != 0".into()));
    }
    let scale = p.gamma1.max(p.delta.abs()).max(p.eps2.norm());
    let marginal = 1e-12 * scale;
    let mut on_boundary = false;
    let mut make = |alpha: Complex64| {
        let eigenvalues = jacobian_eigenvalues(p, alpha);
        let top = eigenvalues[0].re.max(eigenvalues[1].re);
        if top.abs() <= marginal {
            on_boundary = true;
        }
        FixedPoint { alpha, stable: top < -marginal, eigenvalues }
    };
    let mut points = vec![make(Complex64::new(0.0, 0.0))];
    let e2 = p.eps2.norm_sqr();
    let g2 = p.gamma1 * p.gamma1;
    if e2 >= g2 {
        let root = (e2 - g2).sqrt();
        let mut radii: Vec<f64> = [-p.delta + root, -p.delta - root].iter().map(|v| v / p.u).collect();
        radii.dedup();
        for r2 in radii {
            if r2 <= 0.0 {
                continue;
            }
            let rhs = Complex64::new(p.gamma1, p.delta + p.u * r2) / p.eps2;
            let phi = -rhs.arg() / 2.0;
            let alpha = Complex64::from_polar(r2.sqrt(), phi);
            points.push(make(alpha));
            points.push(make(-alpha));
        }
    }
    let stable = points.iter().filter(|f| f.stable).count();
    let phase = match stable {
        0 | 1 => Phase::One,
        2 => Phase::Two,
        _ => Phase::Three,
    };
    Ok(FixedPointSet { points, phase, on_boundary })
}

/// Phase predicted by the boundary lines alone, for cross-checking.
pub fn phase_from_boundaries(delta: f64, eps2_abs: f64, gamma1: f64, u: f64) -> Phase {
    let above_threshold = eps2_abs * eps2_abs - delta * delta > gamma1 * gamma1;
    if above_threshold {
        Phase::Two
    } else if eps2_abs > gamma1 && delta * u < 0.0 {
        Phase::Three
    } else {
        Phase::One
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureUncertainty {
    pub value: f64,
    pub theta_star: f64,
}

/// Smallest quadrature variance `⟨c†c⟩ − |⟨cc⟩| + ½` and the angle reaching it.
///
/// The quadrature is `X_θ = (c e^{iθ} + c† e^{−iθ})/√2`, with vacuum value ½.
/// The coherent amplitude `⟨c⟩` is not subtracted.
pub fn min_quadrature_uncertainty(p: &ParampParams, ctl: &SeriesControl) -> Result<QuadratureUncertainty> {
    let k = kernel(p, ctl)?;
    let n = k.moment(1, 1).re;
    let m = k.moment(0, 2);
    let theta_star = (std::f64::consts::PI - m.arg()) / 2.0;
    Ok(QuadratureUncertainty { value: n - m.norm() + 0.5, theta_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatMetrics {
    pub peak_positions: [Complex64; 2],
    pub peak_value: f64,
    pub bridge_value: f64,
    pub bridge_ratio: f64,
    pub mean_photons: f64,
}

const BRIDGE_SAMPLES: usize = 401;
const PEAK_FLOOR: f64 = 0.05;

/// Peak and bridge heights of a two-lobed Q-function.
///
/// The bridge is the minimum of Q on the segment joining the two highest
/// grid maxima, sampled directly from the analytic Q.
pub fn cat_metrics(p: &ParampParams, grid: &GridSpec, ctl: &SeriesControl) -> Result<CatMetrics> {
    let k = kernel(p, ctl)?;
    let q = QGrid::from_fn(grid, |a| k.q(a))?;
    let maxima = q.local_maxima(PEAK_FLOOR);
    if maxima.len() < 2 {
        return Err(Error::DegenerateState(format!("expected two Q maxima, found {}", maxima.len())));
    }
    let (a, b) = (maxima[0], maxima[1]);
    let cells = (a.0 as i64 - b.0 as i64).abs().max((a.1 as i64 - b.1 as i64).abs());
    if cells < 2 {
        return Err(Error::DegenerateState("Q maxima are adjacent grid cells".into()));
    }
    let pa = q.point(a.0, a.1);
    let pb = q.point(b.0, b.1);
    let peak_value = q.values[a.1][a.0].max(q.values[b.1][b.0]);
    let bridge_value = (0..BRIDGE_SAMPLES)
        .map(|i| {
            let t = i as f64 / (BRIDGE_SAMPLES - 1) as f64;
            k.q(pa + (pb - pa) * t)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(CatMetrics {
        peak_positions: [pa, pb],
        peak_value,
        bridge_value,
        bridge_ratio: bridge_value / peak_value,
        mean_photons: k.moment(1, 1).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig6(eps2: f64) -> ParampParams {
        ParampParams {
            delta: -12.0,
            eps1: Complex64::new(0.0, 0.0),
            eps2: Complex64::new(eps2, 0.0),
            u: 5.0,
            gamma1: 1.0,
            gamma2: 0.0,
        }
    }

    #[test]
    fn vacuum() {
        let ctl = SeriesControl::default();
        let p = fig6(0.0);
        assert_eq!(moment(&p, 0, 0, &ctl).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(moment(&p, 1, 1, &ctl).unwrap(), Complex64::new(0.0, 0.0));
        assert!((pn(&p, 0, &ctl).unwrap() - 1.0).abs() < 1e-15);
        let u = min_quadrature_uncertainty(&p, &ctl).unwrap();
        assert!((u.value - 0.5).abs() < 1e-15);
        let grid = GridSpec::square(3.0, 31);
        assert!(matches!(cat_metrics(&p, &grid, &ctl), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn invalid_parameters() {
        let mut p = fig6(2.0);
        p.gamma1 = 0.0;
        assert!(p.validate().is_err());
        let mut p = fig6(2.0);
        p.u = 0.0;
        assert!(p.validate().is_err());
        p.gamma2 = 0.1;
        assert!(p.validate().is_ok());
        assert!(classical_fixed_points(&p).is_err());
    }

    #[test]
    fn parity_with_zero_coherent_drive() {
        let ctl = SeriesControl::default();
        let p = fig6(4.25);
        let k = kernel(&p, &ctl).unwrap();
        assert!(k.moment(0, 1).norm() < 1e-14);
        assert!(k.moment(1, 2).norm() < 1e-14);
        let a = Complex64::new(0.7, -1.3);
        assert!((k.q(a) - k.q(-a)).abs() < 1e-14);
    }

    #[test]
    fn phases_match_boundary_lines() {
        let one = classical_fixed_points(&fig6(0.5)).unwrap();
        assert_eq!(one.phase, Phase::One);
        assert_eq!(one.points.len(), 1);
        let three = classical_fixed_points(&fig6(4.25)).unwrap();
        assert_eq!(three.phase, Phase::Three);
        assert_eq!(three.points.len(), 5);
        let two = classical_fixed_points(&fig6(12.5)).unwrap();
        assert_eq!(two.phase, Phase::Two);
        assert!(!two.points[0].stable);
        for (d, e) in [(-12.0, 0.5), (-12.0, 4.0), (-12.0, 13.0), (3.0, 2.0), (3.0, 3.5)] {
            let mut p = fig6(e);
            p.delta = d;
            let f = classical_fixed_points(&p).unwrap();
            assert_eq!(f.phase, phase_from_boundaries(d, e, 1.0, 5.0), "Δ={d} ε₂={e}");
        }
    }

    #[test]
    fn nonzero_fixed_points_are_stationary() {
        let p = fig6(4.25);
        let kappa1 = Complex64::new(p.gamma1, p.delta);
        for f in classical_fixed_points(&p).unwrap().points {
            let a = f.alpha;
            let flow = -(kappa1 + Complex64::i() * p.u * a.norm_sqr()) * a + p.eps2 * a.conj();
            assert!(flow.norm() < 1e-12, "{a}: {flow}");
        }
    }

    #[test]
    fn coherent_only_routes_to_duffing() {
        let ctl = SeriesControl::default();
        let mut p = fig6(0.0);
        p.eps1 = Complex64::new(3.0, 0.0);
        let a = moment(&p, 0, 1, &ctl).unwrap();
        p.eps2 = Complex64::new(1e-7, 0.0);
        let b = moment(&p, 0, 1, &ctl).unwrap();
        assert!((a - b).norm() < 1e-5 * a.norm(), "{a} vs {b}");
    }
}
