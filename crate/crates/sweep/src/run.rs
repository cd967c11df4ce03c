use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use fpsteady::kernel::AmplitudeKernel;
use fpsteady::oracle::{
    converged_solve, paramp_spec, qfunction_from_rho, transmon_cavity_spec, ConvergedSolve, ConvergenceOptions,
    LadderString, CAVITY, TRANSMON,
};
use fpsteady::paramp::{self, ParampParams};
use fpsteady::qgrid::{GridSpec, QGrid};
use fpsteady::specfn::SeriesControl;
use fpsteady::transmon::{self, TransmonCavityParams};

use crate::config::{from_angular, ModelKind, OracleModelConfig, PointParams, SweepConfig, Units};
use crate::error::Result;
use crate::observable::{Column, Mode, Observable, Q_MAXIMA_FLOOR};

/// One table entry. `Missing` marks a value that does not exist (an absent
/// peak root), `Failed` an evaluation error recorded in the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    Integer(i64),
    Missing,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub observable: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PointDiagnostics {
    /// Amplitude-sequence length needed for convergence (analytic models).
    pub series_terms: Option<usize>,
    /// Final truncation and whether observables settled (oracle model).
    pub oracle_dims: Option<Vec<usize>>,
    pub truncation_converged: Option<bool>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    /// Swept parameter values in config units.
    pub coords: Vec<f64>,
    pub cells: Vec<Cell>,
    pub diagnostics: PointDiagnostics,
    pub qgrid: Option<QGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub point: usize,
    pub quantity: String,
    pub analytic: [f64; 2],
    pub oracle: [f64; 2],
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    /// Unix time of the run; absent unless requested so output stays reproducible.
    pub generated_unix: Option<u64>,
    pub config: SweepConfig,
}

impl Manifest {
    pub fn new(cfg: &SweepConfig, stamp: bool) -> Self {
        let generated_unix = stamp.then(|| {
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        });
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema_version: cfg.schema_version,
            generated_unix,
            config: cfg.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub manifest: Manifest,
    pub axis_names: Vec<String>,
    pub axis_points: Vec<Vec<f64>>,
    pub columns: Vec<Column>,
    /// Row-major over the axes, first axis outermost.
    pub points: Vec<PointResult>,
    pub oracle_checks: Vec<OracleCheck>,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of a real or integer column; failures become NaN.
    pub fn real_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(
            self.points
                .iter()
                .map(|p| match p.cells[i] {
                    Cell::Real(v) => v,
                    Cell::Integer(v) => v as f64,
                    Cell::Complex(z) => z.norm(),
                    Cell::Missing | Cell::Failed => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn failure_count(&self) -> usize {
        self.points.iter().map(|p| p.diagnostics.failures.len()).sum()
    }
}

/// Options that are not part of the config because they must not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub stamp: bool,
}

pub fn run_sweep(cfg: &SweepConfig, opts: RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let observables = cfg.parsed_observables()?;
    let axis_points = cfg.axis_points()?;
    let axis_names: Vec<String> = cfg.axes.iter().map(|a| a.param.clone()).collect();
    let columns: Vec<Column> = observables.iter().flat_map(|o| o.columns()).collect();
    let coords = grid_coords(&axis_points);
    let grid = cfg.qgrid.map(|q| q.spec());
    let points: Vec<PointResult> = coords
        .into_par_iter()
        .map(|c| {
            let assign: Vec<(&str, f64)> = axis_names.iter().map(|s| s.as_str()).zip(c.iter().copied()).collect();
            let mut point = match cfg.point_params(&assign) {
                Ok(p) => evaluate(cfg, &observables, &p, grid.as_ref()),
                Err(e) => failed_point(&observables, "config", &e.to_string()),
            };
            point.coords = c;
            point
        })
        .collect();
    let oracle_checks = match cfg.oracle_check {
        Some(c) if c.enabled => spot_checks(cfg, &axis_names, &points, c.max_points, c.seed, c.tolerance),
        _ => Vec::new(),
    };
    Ok(SweepResult {
        manifest: Manifest::new(cfg, opts.stamp),
        axis_names,
        axis_points,
        columns,
        points,
        oracle_checks,
    })
}

fn grid_coords(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for ax in axes {
        out = out.into_iter().flat_map(|prefix| ax.iter().map(move |&v| [prefix.clone(), vec![v]].concat())).collect();
    }
    out
}

fn failed_point(observables: &[Observable], kind: &str, message: &str) -> PointResult {
    let width: usize = observables.iter().map(|o| o.columns().len()).sum();
    PointResult {
        coords: Vec::new(),
        cells: vec![Cell::Failed; width],
        diagnostics: PointDiagnostics {
            failures: observables
                .iter()
                .map(|o| Failure { observable: o.to_string(), kind: kind.into(), message: message.into() })
                .collect(),
            ..Default::default()
        },
        qgrid: None,
    }
}

/// Observable values at one parameter point, independent of the grid.
pub fn evaluate(cfg: &SweepConfig, observables: &[Observable], params: &PointParams, grid: Option<&GridSpec>) -> PointResult {
    let ctl = SeriesControl::default();
    let src = match (cfg.model, params) {
        (ModelKind::Oracle, _) => Source::oracle(cfg.oracle.as_ref().expect("validated"), params, observables),
        (_, PointParams::Transmon(p)) => Source::Transmon { p: *p, kernel: transmon::transmon_kernel(p, &ctl) },
        (_, PointParams::Paramp(p)) => Source::Paramp { p: *p, kernel: paramp::kernel(p, &ctl) },
    };
    let mut cells = Vec::new();
    let mut diagnostics = PointDiagnostics::default();
    match &src {
        Source::Transmon { kernel: Ok(k), .. } | Source::Paramp { kernel: Ok(k), .. } => {
            diagnostics.series_terms = Some(k.terms())
        }
        Source::Oracle { solve: Ok(s), .. } => {
            diagnostics.oracle_dims = Some(s.dims_used.clone());
            diagnostics.truncation_converged = Some(s.truncation_converged);
        }
        _ => {}
    }
    let mut qgrid = None;
    for o in observables {
        let width = o.columns().len();
        match src.eval(o, cfg.units, grid, &ctl) {
            Ok(Value::Cells(v)) => {
                debug_assert_eq!(v.len(), width);
                cells.extend(v)
            }
            Ok(Value::Grid(g)) => qgrid = Some(g),
            Err(e) => {
                cells.extend(std::iter::repeat_n(Cell::Failed, width));
                diagnostics.failures.push(Failure { observable: o.to_string(), kind: e.kind().into(), message: e.to_string() });
            }
        }
    }
    PointResult { coords: Vec::new(), cells, diagnostics, qgrid }
}

enum Value {
    Cells(Vec<Cell>),
    Grid(QGrid),
}

enum Source {
    Transmon { p: TransmonCavityParams, kernel: fpsteady::Result<AmplitudeKernel> },
    Paramp { p: ParampParams, kernel: fpsteady::Result<AmplitudeKernel> },
    Oracle { transmon: bool, params: PointParams, solve: fpsteady::Result<ConvergedSolve> },
}

fn one(v: f64) -> Value {
    Value::Cells(vec![Cell::Real(v)])
}

fn onez(z: Complex64) -> Value {
    Value::Cells(vec![Cell::Complex(z)])
}

fn count_maxima(q: &QGrid) -> Value {
    Value::Cells(vec![Cell::Integer(q.local_maxima(Q_MAXIMA_FLOOR).len() as i64)])
}

fn no_grid() -> fpsteady::Error {
    fpsteady::Error::InvalidParams("no qgrid configured".into())
}

fn dx_from(n: f64, m: Complex64) -> Value {
    let theta = (std::f64::consts::PI - m.arg()) / 2.0;
    Value::Cells(vec![Cell::Real(n - m.norm() + 0.5), Cell::Real(theta)])
}

impl Source {
    fn oracle(o: &OracleModelConfig, params: &PointParams, observables: &[Observable]) -> Self {
        let mut strings: Vec<LadderString> = Vec::new();
        let transmon = matches!(params, PointParams::Transmon(_));
        for ob in observables {
            strings.extend(oracle_strings(ob, transmon));
        }
        if strings.is_empty() {
            let mode = if transmon { TRANSMON } else { 0 };
            strings.push(LadderString::normal(mode, 1, 1));
        }
        let opts = ConvergenceOptions { rel_tol: o.rel_tol, dim_cap: o.dim_cap, ..Default::default() };
        let solve = match params {
            PointParams::Transmon(p) => converged_solve(|d| transmon_cavity_spec(p, [d[0], d[1]]), &strings, &o.dims, &opts),
            PointParams::Paramp(p) => converged_solve(|d| paramp_spec(p, d[0]), &strings, &o.dims, &opts),
        };
        Source::Oracle { transmon, params: *params, solve }
    }

    fn eval(&self, o: &Observable, units: Units, grid: Option<&GridSpec>, ctl: &SeriesControl) -> fpsteady::Result<Value> {
        match self {
            Source::Transmon { p, kernel } => eval_transmon(p, kernel, o, units, grid, ctl),
            Source::Paramp { p, kernel } => eval_paramp(p, kernel, o, grid, ctl),
            Source::Oracle { transmon, params, solve } => {
                let s = solve.as_ref().map_err(|e| e.clone())?;
                eval_oracle(s, *transmon, params, o, grid)
            }
        }
    }
}

fn kernel_ref(k: &fpsteady::Result<AmplitudeKernel>) -> fpsteady::Result<&AmplitudeKernel> {
    k.as_ref().map_err(|e| e.clone())
}

fn eval_transmon(
    p: &TransmonCavityParams,
    kernel: &fpsteady::Result<AmplitudeKernel>,
    o: &Observable,
    units: Units,
    grid: Option<&GridSpec>,
    ctl: &SeriesControl,
) -> fpsteady::Result<Value> {
    let moment = |mode: Mode, n: usize, m: usize| match mode {
        Mode::Cavity => transmon::cavity_moment(p, n, m, ctl),
        _ => transmon::transmon_moment(p, n, m, ctl),
    };
    Ok(match *o {
        Observable::Amplitude(mode) => onez(moment(mode, 0, 1)?),
        Observable::AbsAmplitude(mode) => one(moment(mode, 0, 1)?.norm()),
        Observable::Number(mode) => one(moment(mode, 1, 1)?.re),
        Observable::Moment(mode, n, m) => onez(moment(mode, n, m)?),
        Observable::Reflection => one(transmon::reflection(p, ctl)?),
        Observable::Peaks(k) => {
            let roots = transmon::predict_peaks(p, k);
            let mut v = vec![Cell::Integer(roots.len() as i64)];
            v.extend((0..3).map(|i| roots.get(i).map_or(Cell::Missing, |&r| Cell::Real(from_angular(r, units)))));
            Value::Cells(v)
        }
        Observable::Pn(n) => {
            Value::Cells((0..=n).map(|i| transmon::transmon_pn(p, i, ctl).map(Cell::Real)).collect::<fpsteady::Result<_>>()?)
        }
        Observable::QMaxima | Observable::QGrid => {
            let k = kernel_ref(kernel)?;
            let q = QGrid::from_fn(grid.ok_or_else(no_grid)?, |a| k.q(a))?;
            if *o == Observable::QGrid {
                Value::Grid(q)
            } else {
                count_maxima(&q)
            }
        }
        Observable::DxMin | Observable::Phase | Observable::Cat => {
            return Err(fpsteady::Error::InvalidParams(format!("{o} is not a transmon observable")))
        }
    })
}

fn eval_paramp(
    p: &ParampParams,
    kernel: &fpsteady::Result<AmplitudeKernel>,
    o: &Observable,
    grid: Option<&GridSpec>,
    ctl: &SeriesControl,
) -> fpsteady::Result<Value> {
    if *o == Observable::Phase {
        let set = paramp::classical_fixed_points(p)?;
        let stable = set.points.iter().filter(|f| f.stable).count();
        let predicted = paramp::phase_from_boundaries(p.delta, p.eps2.norm(), p.gamma1, p.u).stable_count();
        return Ok(Value::Cells(vec![
            Cell::Integer(stable as i64),
            Cell::Integer(predicted as i64),
            Cell::Integer(set.on_boundary as i64),
        ]));
    }
    if *o == Observable::Cat {
        let m = paramp::cat_metrics(p, grid.ok_or_else(no_grid)?, ctl)?;
        return Ok(Value::Cells(
            [m.peak_value, m.bridge_value, m.bridge_ratio, m.mean_photons].into_iter().map(Cell::Real).collect(),
        ));
    }
    let k = kernel_ref(kernel)?;
    Ok(match *o {
        Observable::Amplitude(_) => onez(k.moment(0, 1)),
        Observable::AbsAmplitude(_) => one(k.moment(0, 1).norm()),
        Observable::Number(_) => one(k.moment(1, 1).re),
        Observable::Moment(_, n, m) => onez(k.moment(n, m)),
        Observable::DxMin => dx_from(k.moment(1, 1).re, k.moment(0, 2)),
        Observable::Pn(n) => Value::Cells((0..=n).map(|i| Cell::Real(k.pn(i))).collect()),
        Observable::QMaxima | Observable::QGrid => {
            let q = QGrid::from_fn(grid.ok_or_else(no_grid)?, |a| k.q(a))?;
            if *o == Observable::QGrid {
                Value::Grid(q)
            } else {
                count_maxima(&q)
            }
        }
        _ => return Err(fpsteady::Error::InvalidParams(format!("{o} is not a parametric observable"))),
    })
}

fn mode_index(mode: Mode) -> usize {
    match mode {
        Mode::Cavity => CAVITY,
        Mode::Transmon => TRANSMON,
        Mode::Single => 0,
    }
}

fn oracle_strings(o: &Observable, transmon: bool) -> Vec<LadderString> {
    let field = if transmon { TRANSMON } else { 0 };
    match *o {
        Observable::Amplitude(m) | Observable::AbsAmplitude(m) => vec![LadderString::destroy(mode_index(m))],
        Observable::Number(m) => vec![LadderString::normal(mode_index(m), 1, 1)],
        Observable::Moment(m, n, k) => vec![LadderString::normal(mode_index(m), n, k)],
        Observable::Reflection => vec![LadderString::destroy(CAVITY)],
        Observable::DxMin => vec![LadderString::normal(field, 1, 1), LadderString::normal(field, 0, 2)],
        _ => Vec::new(),
    }
}

fn eval_oracle(s: &ConvergedSolve, transmon: bool, params: &PointParams, o: &Observable, grid: Option<&GridSpec>) -> fpsteady::Result<Value> {
    let field_state = || if transmon { s.state.reduced(TRANSMON) } else { Ok(s.state.clone()) };
    let ex = |l: LadderString| s.state.expect_string(&l);
    Ok(match *o {
        Observable::Amplitude(m) => onez(ex(LadderString::destroy(mode_index(m)))?),
        Observable::AbsAmplitude(m) => one(ex(LadderString::destroy(mode_index(m)))?.norm()),
        Observable::Number(m) => one(ex(LadderString::normal(mode_index(m), 1, 1))?.re),
        Observable::Moment(m, n, k) => onez(ex(LadderString::normal(mode_index(m), n, k))?),
        Observable::Reflection => {
            let PointParams::Transmon(p) = params else { unreachable!("reflection is transmon-only") };
            if p.epsilon.norm() == 0.0 {
                return Err(fpsteady::Error::Domain("reflection needs a nonzero drive".into()));
            }
            let a = ex(LadderString::destroy(CAVITY))?;
            one((1.0 - p.gamma_c * a / p.epsilon).norm())
        }
        Observable::DxMin => {
            let f = if transmon { TRANSMON } else { 0 };
            dx_from(ex(LadderString::normal(f, 1, 1))?.re, ex(LadderString::normal(f, 0, 2))?)
        }
        Observable::Pn(n) => {
            let d = field_state()?.diagonal();
            Value::Cells((0..=n).map(|i| Cell::Real(d.get(i).copied().unwrap_or(0.0))).collect())
        }
        Observable::QMaxima | Observable::QGrid => {
            let q = qfunction_from_rho(&field_state()?, grid.ok_or_else(no_grid)?)?;
            if *o == Observable::QGrid {
                Value::Grid(q)
            } else {
                count_maxima(&q)
            }
        }
        Observable::Peaks(_) | Observable::Phase | Observable::Cat => {
            return Err(fpsteady::Error::InvalidParams(format!("{o} has no oracle counterpart")))
        }
    })
}

/// Quantities compared in spot checks, with oracle starting truncations.
fn check_quantities(transmon: bool) -> (Vec<(&'static str, LadderString)>, Vec<usize>) {
    if transmon {
        (
            vec![
                ("a", LadderString::destroy(CAVITY)),
                ("b", LadderString::destroy(TRANSMON)),
                ("n_b", LadderString::normal(TRANSMON, 1, 1)),
            ],
            vec![10, 6],
        )
    } else {
        (
            vec![
                ("c", LadderString::destroy(0)),
                ("n_c", LadderString::normal(0, 1, 1)),
                ("moment_c_0_2", LadderString::normal(0, 0, 2)),
            ],
            vec![20],
        )
    }
}

fn analytic_check_values(params: &PointParams, ctl: &SeriesControl) -> fpsteady::Result<Vec<Complex64>> {
    match params {
        PointParams::Transmon(p) => Ok(vec![
            transmon::cavity_moment(p, 0, 1, ctl)?,
            transmon::transmon_moment(p, 0, 1, ctl)?,
            transmon::transmon_moment(p, 1, 1, ctl)?,
        ]),
        PointParams::Paramp(p) => {
            let k = paramp::kernel(p, ctl)?;
            Ok(vec![k.moment(0, 1), k.moment(1, 1), k.moment(0, 2)])
        }
    }
}

/// Relative difference with a 1e-9 absolute floor.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-9)
}

fn spot_checks(cfg: &SweepConfig, axis_names: &[String], points: &[PointResult], max_points: usize, seed: u64, tol: f64) -> Vec<OracleCheck> {
    if points.is_empty() || max_points == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, points.len(), max_points.min(points.len())).into_vec();
    chosen.sort_unstable();
    let ctl = SeriesControl::default();
    chosen
        .into_par_iter()
        .flat_map_iter(|i| {
            let assign: Vec<(&str, f64)> = axis_names.iter().map(|s| s.as_str()).zip(points[i].coords.iter().copied()).collect();
            let mut out = Vec::new();
            let Ok(params) = cfg.point_params(&assign) else { return out };
            let transmon = matches!(params, PointParams::Transmon(_));
            let (quantities, dims) = check_quantities(transmon);
            let strings: Vec<LadderString> = quantities.iter().map(|q| q.1.clone()).collect();
            let opts = ConvergenceOptions { rel_tol: 1e-9, ..Default::default() };
            let solved = match &params {
                PointParams::Transmon(p) => converged_solve(|d| transmon_cavity_spec(p, [d[0], d[1]]), &strings, &dims, &opts),
                PointParams::Paramp(p) => converged_solve(|d| paramp_spec(p, d[0]), &strings, &dims, &opts),
            };
            let analytic = analytic_check_values(&params, &ctl);
            for (j, (name, _)) in quantities.iter().enumerate() {
                let (a, o) = match (&analytic, &solved) {
                    (Ok(a), Ok(s)) => (a[j], s.values[j]),
                    _ => (Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)),
                };
                let rel_error = rel_diff(a, o);
                out.push(OracleCheck {
                    point: i,
                    quantity: (*name).into(),
                    analytic: [a.re, a.im],
                    oracle: [o.re, o.im],
                    rel_error,
                    pass: rel_error <= tol,
                });
            }
            out
        })
        .collect()
}
