//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fpsteady::kernel::AmplitudeKernel;
use fpsteady::paramp::{self, ParampParams};
use fpsteady::specfn::SeriesControl;
use fpsteady::transmon::{self, TransmonCavityParams};
use fpsteady_sweep::figures::bundled;
use fpsteady_sweep::run::{run_sweep, Cell, RunOptions, SweepResult};
use fpsteady_sweep::validate::{dispersive_test_point, paramp_agreement, random_paramp_sets, transmon_agreement};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sweep(name: &str) -> SweepResult {
    run_sweep(&bundled(name).unwrap(), RunOptions::default()).unwrap()
}

fn value(c: &Cell) -> f64 {
    match c {
        Cell::Real(v) => *v,
        Cell::Integer(v) => *v as f64,
        other => panic!("not a real cell: {other:?}"),
    }
}

fn column(r: &SweepResult, name: &str) -> Vec<f64> {
    let i = r.column_index(name).unwrap_or_else(|| panic!("no column {name}"));
    r.points.iter().map(|p| value(&p.cells[i])).collect()
}

fn axis(r: &SweepResult, name: &str) -> usize {
    r.axis_names.iter().position(|a| a == name).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let sets = random_paramp_sets(20, 1);
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (i, p) in sets.iter().enumerate() {
        match paramp_agreement(p) {
            Ok(a) => {
                worst = worst.max(a.moments).max(a.pn).max(a.q);
                if !a.pass() {
                    failed.push(i);
                }
            }
            Err(_) => failed.push(i),
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} sets, worst error {:.2e} of tolerance, failing sets {failed:?}", sets.len(), worst),
    )
}

/// Per value of `u`: (min ΔX over ε₂, ε₂ at the minimum).
fn squeezing_minima(r: &SweepResult) -> Vec<(f64, f64, f64)> {
    let (iu, ie) = (axis(r, "u"), axis(r, "eps2"));
    let dx = column(r, "dx_min");
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for (p, &v) in r.points.iter().zip(&dx) {
        let (u, e) = (p.coords[iu], p.coords[ie]);
        match out.iter_mut().find(|m| m.0 == u) {
            Some(m) if v < m.1 => *m = (u, v, e),
            Some(_) => {}
            None => out.push((u, v, e)),
        }
    }
    out
}

fn squeezing_floor() -> Outcome {
    let weak = squeezing_minima(&sweep("squeezing_weak_kerr"));
    let (_, v, e) = *weak.iter().find(|m| m.0 == 0.001).unwrap();
    let rel = (v - 0.25).abs() / 0.25;
    outcome(rel <= 0.02, format!("U=0.001: min dX={v:.5} at eps2={e:.3}, {:.2}% from 0.25 (limit 2%)", 100.0 * rel))
}

fn squeezing_threshold() -> Outcome {
    let strong = squeezing_minima(&sweep("squeezing_strong_kerr"));
    let mut pass = true;
    let mut parts = Vec::new();
    for u in [20.0, 50.0] {
        let (_, v, e) = *strong.iter().find(|m| m.0 == u).unwrap();
        let ok = (v - 0.36).abs() <= 0.036 && (e - u / 3.0).abs() <= 0.25 * u / 3.0;
        pass &= ok;
        parts.push(format!("U={u}: min dX={v:.5} at eps2={e:.2} (U/3={:.2})", u / 3.0));
    }
    outcome(pass, parts.join("; "))
}

fn phase_diagram() -> Outcome {
    let r = sweep("phase_diagram");
    let (id, ie) = (axis(&r, "delta"), axis(&r, "eps2"));
    let deltas = &r.axis_points[id];
    let eps = &r.axis_points[ie];
    let (dd, de) = (deltas[1] - deltas[0], eps[1] - eps[0]);
    let u = r.manifest.config.params["u"].to_complex().re;
    let stable = column(&r, "stable_points");
    let mut misplaced = 0;
    let mut flag_mismatch = 0;
    for (p, &n) in r.points.iter().zip(&stable) {
        let (d, e) = (p.coords[id], p.coords[ie]);
        let expected = paramp::phase_from_boundaries(d, e, 1.0, u).stable_count() as f64;
        if n != expected {
            // allowed only when a boundary line passes within one cell
            let near = |f: &dyn Fn(f64, f64) -> f64| {
                let corners = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)];
                let signs: Vec<bool> = corners.iter().map(|(a, b)| f(d + a * dd, e + b * de) > 0.0).collect();
                signs.iter().any(|&s| s != signs[0])
            };
            if !(near(&|_, e| e.abs() - 1.0) || near(&|d, e| e * e - d * d - 1.0)) {
                misplaced += 1;
            }
        }
        let q = ParampParams {
            delta: d,
            eps1: Complex64::new(0.0, 0.0),
            eps2: Complex64::new(e, 0.0),
            u,
            gamma1: 1.0,
            gamma2: 0.0,
        };
        let set = paramp::classical_fixed_points(&q).unwrap();
        for fp in &set.points {
            let direct = paramp::jacobian_eigenvalues(&q, fp.alpha).iter().all(|l| l.re < 0.0);
            if direct != fp.stable {
                flag_mismatch += 1;
            }
        }
    }
    outcome(
        misplaced == 0 && flag_mismatch == 0,
        format!(
            "{}x{} grid: {misplaced} cells misclassified away from the boundary lines, {flag_mismatch} stability flags disagree with the Jacobian",
            deltas.len(),
            eps.len()
        ),
    )
}

fn maxima_by_drive(name: &str) -> Vec<(f64, usize)> {
    let r = sweep(name);
    let counts = column(&r, "q_maxima");
    r.points.iter().zip(counts).map(|(p, c)| (p.coords[0], c as usize)).collect()
}

fn transition_detuning_12() -> Outcome {
    let m = maxima_by_drive("transition_detuning_12");
    let count = |e: f64| m.iter().find(|x| x.0 == e).unwrap().1;
    let pass = count(2.0) == 1 && count(4.25) == 3 && count(6.25) == 2;
    outcome(pass, format!("local maxima per eps2: {m:?}; expected 1, 3, 2 at 2, 4.25, 6.25"))
}

fn transition_detuning_8() -> Outcome {
    let m = maxima_by_drive("transition_detuning_8");
    let pass = m.iter().all(|x| x.1 < 3);
    outcome(pass, format!("local maxima per eps2: {m:?}; expected fewer than 3 everywhere"))
}

fn cats() -> Outcome {
    let mut photons = Vec::new();
    let mut ratios = Vec::new();
    for name in ["cat_a", "cat_b", "cat_c", "cat_d"] {
        let r = sweep(name);
        photons.push(column(&r, "cat_mean_photons")[0]);
        ratios.push(column(&r, "cat_bridge_ratio")[0]);
    }
    let photons_ok = photons.iter().all(|n| (n - 2.2).abs() <= 0.05 * 2.2);
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = ratios[3] < 0.05;
    outcome(
        photons_ok && monotone && last,
        format!(
            "mean photons {:.4?} (2.2 +/- 5%: {photons_ok}); bridge ratios {:.4?} (decreasing: {monotone}, last < 0.05: {last})",
            photons, ratios
        ),
    )
}

fn vacuum_rabi() -> Outcome {
    let r = sweep("resonant_rabi");
    let cfg = &r.manifest.config;
    let param = |k: &str| cfg.params[k].to_complex().re;
    let (ic, ie) = (axis(&r, "delta_c"), axis(&r, "epsilon"));
    let detunings = &r.axis_points[ic];
    let low = r.axis_points[ie][0];
    let abs_a = column(&r, "abs_a");
    let row: Vec<f64> = r.points.iter().zip(&abs_a).filter(|(p, _)| p.coords[ie] == low).map(|(_, &v)| v).collect();
    let peak = row.iter().copied().fold(0.0, f64::max);
    let ridges: Vec<usize> =
        (1..row.len() - 1).filter(|&i| row[i] > row[i - 1] && row[i] > row[i + 1] && row[i] > 0.1 * peak).collect();
    let step = detunings[1] - detunings[0];
    let g = param("g");
    let separation = if ridges.len() == 2 { detunings[ridges[1]] - detunings[ridges[0]] } else { f64::NAN };
    let split_ok = ridges.len() == 2 && (separation - 2.0 * g).abs() <= step;
    let zero = detunings.iter().position(|&d| d == 0.0).unwrap();
    let null_ok = row[zero] < row[zero - 1] && row[zero] < row[zero + 1] && row[zero] < 0.01 * peak;

    let p = TransmonCavityParams {
        delta_c: 0.0,
        delta_ct: param("delta_ct"),
        g,
        chi: param("chi"),
        gamma_c: param("gamma_c"),
        gamma_t: param("gamma_t"),
        epsilon: Complex64::new(low, 0.0),
    };
    let mut roots = transmon::predict_peaks(&p, 0);
    roots.sort_by(f64::total_cmp);
    let w = (g * g - p.gamma_c * p.gamma_c / 4.0).sqrt();
    let expect = [-w, 0.0, w];
    let roots_ok = roots.len() == 3 && roots.iter().zip(expect).all(|(a, b)| (a - b).abs() <= 1e-9 * w);
    outcome(
        split_ok && null_ok && roots_ok,
        format!(
            "{} ridges separated by {separation:.1} (2g = {:.1}, cell {step}); |a| at 0 is {:.2e} of the peak; k=0 peaks {roots:.9?}",
            ridges.len(),
            2.0 * g,
            row[zero] / peak
        ),
    )
}

fn adiabatic_elimination() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = false;
    for ratio in [20.0, 10.0, 5.0] {
        let p = dispersive_test_point(ratio);
        match transmon_agreement(&p, [15, 8]) {
            Ok(a) => {
                let worst = a.rel_errors.iter().copied().fold(0.0, f64::max);
                if ratio == 20.0 {
                    pass = a.truncation_converged && a.cavity_photons <= 3.0 && worst <= 0.05;
                }
                lines.push(format!(
                    "ratio {ratio}: errors a={:.2e} b={:.2e} n_b={:.2e}",
                    a.rel_errors[0], a.rel_errors[1], a.rel_errors[2]
                ));
            }
            Err(e) => lines.push(format!("ratio {ratio}: {e}")),
        }
    }
    outcome(pass, lines.join("; "))
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()) + 1e-14
}

fn random_paramp(rng: &mut ChaCha8Rng) -> ParampParams {
    let u = rng.gen_range(0.3..6.0);
    ParampParams {
        delta: rng.gen_range(-6.0..6.0),
        eps1: Complex64::new(rng.gen_range(0.0..2.5), 0.0),
        eps2: Complex64::from_polar(rng.gen_range(0.0..5.0), rng.gen_range(0.0..std::f64::consts::TAU)),
        u: if rng.gen_bool(0.5) { u } else { -u },
        gamma1: rng.gen_range(0.3..2.0),
        gamma2: rng.gen_range(0.0..1.5),
    }
}

fn random_transmon(rng: &mut ChaCha8Rng) -> TransmonCavityParams {
    let chi = rng.gen_range(1.0..60.0);
    TransmonCavityParams {
        delta_c: rng.gen_range(-60.0..60.0),
        delta_ct: rng.gen_range(-200.0..200.0),
        g: rng.gen_range(0.5..40.0),
        chi: if rng.gen_bool(0.5) { chi } else { -chi },
        gamma_c: rng.gen_range(1.0..40.0),
        gamma_t: rng.gen_range(0.05..5.0),
        epsilon: Complex64::from_polar(rng.gen_range(0.0..8.0), rng.gen_range(0.0..std::f64::consts::TAU)),
    }
}

fn kernel_props(k: &AmplitudeKernel, fails: &mut Vec<&'static str>) {
    for n in 0..=4 {
        for m in 0..=4 {
            if !close(k.moment(n, m), k.moment(m, n).conj(), 1e-10) {
                fails.push("hermiticity");
            }
        }
        let d = k.moment(n, n);
        if d.im.abs() > 1e-10 * d.norm() || d.re < 0.0 {
            fails.push("positivity");
        }
    }
    if k.moment(1, 2).norm_sqr() > k.moment(1, 1).re * k.moment(2, 2).re * (1.0 + 1e-10) {
        fails.push("cauchy-schwarz");
    }
}

fn property_suites() -> Outcome {
    let ctl = SeriesControl::default();
    let doubled = ctl.with_max_terms(2 * ctl.max_terms);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fails: Vec<&'static str> = Vec::new();
    let mut draws = [0usize; 2];
    while draws[0] < 100 {
        let p = random_transmon(&mut rng);
        let Ok(k) = transmon::transmon_kernel(&p, &ctl) else { continue };
        draws[0] += 1;
        kernel_props(&k, &mut fails);
        let conj = TransmonCavityParams {
            delta_c: -p.delta_c,
            delta_ct: -p.delta_ct,
            chi: -p.chi,
            epsilon: p.epsilon.conj(),
            ..p
        };
        let kc = transmon::transmon_kernel(&conj, &ctl).unwrap();
        if !(0..=3).all(|n| (0..=3).all(|m| close(kc.moment(n, m), k.moment(n, m).conj(), 1e-9))) {
            fails.push("conjugation identity (transmon)");
        }
        let kd = transmon::transmon_kernel(&p, &doubled).unwrap();
        if !(0..=3).all(|n| (0..=3).all(|m| close(kd.moment(n, m), k.moment(n, m), ctl.rel_tol))) {
            fails.push("series doubling (transmon)");
        }
    }
    while draws[1] < 100 {
        let p = random_paramp(&mut rng);
        let Ok(k) = paramp::kernel(&p, &ctl) else { continue };
        if k.moment(1, 1).re > 20.0 {
            continue;
        }
        draws[1] += 1;
        kernel_props(&k, &mut fails);
        let conj = ParampParams { delta: -p.delta, u: -p.u, eps1: p.eps1.conj(), eps2: p.eps2.conj(), ..p };
        let kc = paramp::kernel(&conj, &ctl).unwrap();
        if !(0..=3).all(|n| (0..=3).all(|m| close(kc.moment(n, m), k.moment(n, m).conj(), 1e-9))) {
            fails.push("conjugation identity (parametric)");
        }
        let kd = paramp::kernel(&p, &doubled).unwrap();
        if !(0..=3).all(|n| (0..=3).all(|m| close(kd.moment(n, m), k.moment(n, m), ctl.rel_tol))) {
            fails.push("series doubling (parametric)");
        }

        let even = ParampParams { eps1: Complex64::new(0.0, 0.0), ..p };
        let Ok(ke) = paramp::kernel(&even, &ctl) else { continue };
        let g = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if (ke.q(g) - ke.q(-g)).abs() > 1e-10 || ke.moment(0, 1).norm() > 1e-12 || ke.moment(1, 2).norm() > 1e-12 {
            fails.push("parity");
        }
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let rotated = ParampParams { eps2: even.eps2 * Complex64::from_polar(1.0, phi), ..even };
        let Ok(kr) = paramp::kernel(&rotated, &ctl) else { continue };
        let cov_m = [(0, 2), (1, 1), (1, 3)].iter().all(|&(m, n)| {
            close(kr.moment(m, n), ke.moment(m, n) * Complex64::from_polar(1.0, (n as f64 - m as f64) * phi / 2.0), 1e-9)
        });
        let cov_q = (kr.q(g * Complex64::from_polar(1.0, phi / 2.0)) - ke.q(g)).abs() <= 1e-10;
        if !(cov_m && cov_q) {
            fails.push("drive-phase covariance");
        }
    }
    fails.sort();
    fails.dedup();
    outcome(fails.is_empty(), format!("{} transmon and {} parametric draws; failing properties {fails:?}", draws[0], draws[1]))
}

fn collect(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let st = Command::new(env!("CARGO_BIN_EXE_fpsteady")).args(["figures", "-o"]).arg(d.path()).output().unwrap();
        if !st.status.success() {
            return outcome(false, format!("figures failed: {}", String::from_utf8_lossy(&st.stderr)));
        }
    }
    let (a, b) = (collect(dirs[0].path()), collect(dirs[1].path()));
    let same = a == b;
    let bytes: usize = a.iter().map(|f| f.1.len()).sum();
    outcome(same && !a.is_empty(), format!("{} files, {bytes} bytes, identical across two runs: {same}", a.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("exact parametric model matches the Lindblad oracle", oracle_equivalence),
        ("squeezing floor at weak Kerr", squeezing_floor),
        ("squeezing limit and threshold at strong Kerr", squeezing_threshold),
        ("classical phase diagram", phase_diagram),
        ("Q-function maxima across transitions at detuning -12", transition_detuning_12),
        ("Q-function maxima stay below three at detuning -8", transition_detuning_8),
        ("cat-state distortion by two-photon loss", cats),
        ("vacuum Rabi splitting", vacuum_rabi),
        ("adiabatic elimination against the two-mode oracle", adiabatic_elimination),
        ("property suites", property_suites),
        ("figure outputs are byte-identical across runs", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let o = check();
        let secs = t.elapsed().as_secs_f64();
        println!("{} {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{}/{} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
