//! Registry of named observables.
//!
//! | name | models | columns |
//! |---|---|---|
//! | `a`, `b` | transmon | complex `⟨a⟩`, `⟨b⟩` |
//! | `abs_a`, `abs_b` | transmon | `|⟨a⟩|`, `|⟨b⟩|` |
//! | `n_a`, `n_b` | transmon | `⟨a†a⟩`, `⟨b†b⟩` |
//! | `moment_a(n,m)`, `moment_b(n,m)` | transmon | complex `⟨x†ⁿxᵐ⟩` |
//! | `reflection` | transmon | `R = |1 − γc⟨a⟩/ε|` |
//! | `peaks(k)` | analytic transmon | root count and up to three predicted `Δc` (MHz) |
//! | `c`, `abs_c`, `n_c`, `moment(n,m)` | parametric | as above for mode `c` |
//! | `dx_min` | parametric | `ΔX_min` and the optimal angle |
//! | `phase` | analytic parametric | stable fixed points, boundary prediction, boundary flag |
//! | `cat` | analytic parametric | peak, bridge, bridge ratio, mean photons |
//! | `pn(N)` | all | `P(0..=N)` of the transmon or parametric mode |
//! | `q_maxima` | all | number of Q local maxima above 5% of the peak |
//! | `qgrid` | all | full Q grid, written to its own files |

use std::fmt;

use crate::config::{ModelKind, OracleTarget};
use crate::error::{Result, SweepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cavity,
    Transmon,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Amplitude(Mode),
    AbsAmplitude(Mode),
    Number(Mode),
    Moment(Mode, usize, usize),
    Reflection,
    Peaks(usize),
    DxMin,
    Phase,
    Cat,
    Pn(usize),
    QMaxima,
    QGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Real,
    Complex,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

fn col(name: impl Into<String>, kind: ColumnKind) -> Column {
    Column { name: name.into(), kind }
}

/// Relative floor for counting Q maxima.
pub const Q_MAXIMA_FLOOR: f64 = 0.05;
pub const MAX_PN: usize = 200;
const MAX_MOMENT: usize = 8;

fn parse_args(args: &str) -> Option<Vec<usize>> {
    args.split(',').map(|s| s.trim().parse().ok()).collect()
}

impl Observable {
    pub fn parse(s: &str, target: OracleTarget, model: ModelKind) -> Result<Self> {
        let bad = |why: &str| SweepError::Config(format!("observable `{s}`: {why}"));
        let s = s.trim();
        let (head, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], parse_args(&s[i + 1..s.len() - 1]).ok_or_else(|| bad("bad arguments"))?),
            Some(_) => return Err(bad("unbalanced parentheses")),
            None => (s, Vec::new()),
        };
        let transmon = target == OracleTarget::TransmonCavity;
        let analytic = model != ModelKind::Oracle;
        let nargs = |n: usize| if args.len() == n { Ok(()) } else { Err(bad(&format!("expects {n} arguments"))) };
        let o = match (head, transmon) {
            ("a", true) => Observable::Amplitude(Mode::Cavity),
            ("b", true) => Observable::Amplitude(Mode::Transmon),
            ("c", false) => Observable::Amplitude(Mode::Single),
            ("abs_a", true) => Observable::AbsAmplitude(Mode::Cavity),
            ("abs_b", true) => Observable::AbsAmplitude(Mode::Transmon),
            ("abs_c", false) => Observable::AbsAmplitude(Mode::Single),
            ("n_a", true) => Observable::Number(Mode::Cavity),
            ("n_b", true) => Observable::Number(Mode::Transmon),
            ("n_c", false) => Observable::Number(Mode::Single),
            ("moment_a", true) | ("moment_b", true) | ("moment", false) => {
                nargs(2)?;
                if args[0] + args[1] > MAX_MOMENT {
                    return Err(bad(&format!("order above {MAX_MOMENT}")));
                }
                let mode = match head {
                    "moment_a" => Mode::Cavity,
                    "moment_b" => Mode::Transmon,
                    _ => Mode::Single,
                };
                Observable::Moment(mode, args[0], args[1])
            }
            ("reflection", true) => Observable::Reflection,
            ("peaks", true) if analytic => {
                nargs(1)?;
                Observable::Peaks(args[0])
            }
            ("dx_min", false) => Observable::DxMin,
            ("phase", false) if analytic => Observable::Phase,
            ("cat", false) if analytic => Observable::Cat,
            ("pn", _) => {
                nargs(1)?;
                if args[0] > MAX_PN {
                    return Err(bad(&format!("at most pn({MAX_PN})")));
                }
                Observable::Pn(args[0])
            }
            ("q_maxima", _) => Observable::QMaxima,
            ("qgrid", _) => Observable::QGrid,
            _ => return Err(bad("not available for this model")),
        };
        if !args.is_empty() && matches!(o, Observable::Amplitude(_) | Observable::QGrid | Observable::Cat) {
            return Err(bad("takes no arguments"));
        }
        Ok(o)
    }

    pub fn needs_qgrid(&self) -> bool {
        matches!(self, Observable::QMaxima | Observable::QGrid | Observable::Cat)
    }

    /// Table columns; `QGrid` writes separate files and has none.
    pub fn columns(&self) -> Vec<Column> {
        use ColumnKind::*;
        let suffix = |m: Mode| match m {
            Mode::Cavity => "a",
            Mode::Transmon => "b",
            Mode::Single => "c",
        };
        match *self {
            Observable::Amplitude(m) => vec![col(suffix(m), Complex)],
            Observable::AbsAmplitude(m) => vec![col(format!("abs_{}", suffix(m)), Real)],
            Observable::Number(m) => vec![col(format!("n_{}", suffix(m)), Real)],
            Observable::Moment(m, n, k) => vec![col(format!("moment_{}_{n}_{k}", suffix(m)), Complex)],
            Observable::Reflection => vec![col("reflection", Real)],
            Observable::Peaks(k) => {
                let mut v = vec![col(format!("peaks_{k}_count"), Integer)];
                v.extend((0..3).map(|i| col(format!("peaks_{k}_{i}"), Real)));
                v
            }
            Observable::DxMin => vec![col("dx_min", Real), col("dx_theta", Real)],
            Observable::Phase => vec![col("stable_points", Integer), col("boundary_phase", Integer), col("on_boundary", Integer)],
            Observable::Cat => vec![
                col("cat_peak", Real),
                col("cat_bridge", Real),
                col("cat_bridge_ratio", Real),
                col("cat_mean_photons", Real),
            ],
            Observable::Pn(n) => (0..=n).map(|i| col(format!("pn_{i}"), Real)).collect(),
            Observable::QMaxima => vec![col("q_maxima", Integer)],
            Observable::QGrid => Vec::new(),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |m: Mode| match m {
            Mode::Cavity => "a",
            Mode::Transmon => "b",
            Mode::Single => "c",
        };
        match *self {
            Observable::Amplitude(m) => write!(f, "{}", s(m)),
            Observable::AbsAmplitude(m) => write!(f, "abs_{}", s(m)),
            Observable::Number(m) => write!(f, "n_{}", s(m)),
            Observable::Moment(Mode::Single, n, m) => write!(f, "moment({n},{m})"),
            Observable::Moment(mode, n, m) => write!(f, "moment_{}({n},{m})", s(mode)),
            Observable::Reflection => write!(f, "reflection"),
            Observable::Peaks(k) => write!(f, "peaks({k})"),
            Observable::DxMin => write!(f, "dx_min"),
            Observable::Phase => write!(f, "phase"),
            Observable::Cat => write!(f, "cat"),
            Observable::Pn(n) => write!(f, "pn({n})"),
            Observable::QMaxima => write!(f, "q_maxima"),
            Observable::QGrid => write!(f, "qgrid"),
        }
    }
}
