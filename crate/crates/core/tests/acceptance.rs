//! Acceptance suite: one line per primary criterion.
//!
//! Runs as a plain binary (`cargo test --test acceptance`). Failing criteria
//! are reported, not hidden; set `QFLAB_ACCEPTANCE_STRICT=1` to turn any
//! FAIL into a nonzero exit.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qflab::cli::config::{construction_solver, ConstructFile};
use qflab::cli::output::sha256_file;
use qflab::construction::{
    load_artifact, run_construction, unitary_transfer_check, write_artifact, Construction, ConstructionConfig,
    GridConfig,
};
use qflab::grid::{make_base_weight, make_grid, norm_w, Grid, SampledFunction};
use qflab::solver::{constrained_lsq, lq_ball_projection, SolverConfig, SynthesisSystem};
use qflab::trigpoly::lq_norm;
use qflab::verify::{
    bessel_bound, bessel_monotonicity, default_battery, frame_failure_probe, hadamard_residual, nested_weights,
    normalized, qf_battery, rebuild_steps, recheck_steps, QfOptions, QfRow, TestFunction, VerifyOptions,
};

const BESSEL_GROWTH: f64 = 1.1;
const MONOTONE_TOL: f64 = 1e-8;
const ETA_REL: f64 = 1e-12;
const QF_EPS: f64 = 0.1;
const QF_Q: f64 = 3.0;
const QF_STABILITY: f64 = 0.2;
const TRANSFER_TOL: f64 = 1e-4;
const PROJECTION_TOL: f64 = 1e-6;
const LSQ_TOL: f64 = 1e-4;
const GRADIENT_REL: f64 = 1e-5;
const FRAME_DROP: f64 = 1e-2;
/// "Exactly ‖h‖²" on a finite grid: the only error is the truncated weight tail.
const CONTROL_REL: f64 = 1e-6;
const HADAMARD_PLATEAU: f64 = 0.5;
const ATOM_RESIDUAL: f64 = 1e-6;

const SECTIONS: [usize; 5] = [10, 25, 50, 100, 200];
const QF_SECTIONS: [usize; 4] = [12, 25, 50, 100];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Result<Outcome, String> + 'a>);

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn default_run() -> Result<Construction, String> {
    let f = ConstructFile::default();
    run_construction(&f.construction, &f.solver).map_err(err)
}

fn sparsity(c: &Construction) -> Result<Outcome, String> {
    let v = c.spectrum.first_sparsity_violation();
    let worst = c
        .spectrum
        .lambdas
        .windows(2)
        .zip(&c.spectrum.epsilons)
        .map(|(w, e)| w[1] / w[0] - (1.0 + e))
        .fold(f64::INFINITY, f64::min);
    Ok(outcome(
        v.is_none() && c.spectrum.lambdas.len() > 1,
        format!("{} terms, smallest margin ratio-(1+eps) = {worst:.3e}", c.spectrum.lambdas.len()),
    ))
}

fn block_conditions(c: &Construction) -> Result<Outcome, String> {
    let mut failures = Vec::new();
    for s in &c.steps {
        for f in s.conditions.failures() {
            failures.push(format!("k={}: {f}", s.k));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} blocks, all four conditions hold", c.steps.len())
    } else {
        failures.join("; ")
    };
    Ok(outcome(failures.is_empty() && !c.steps.is_empty(), detail))
}

fn per_step_error(c: &Construction) -> Result<Outcome, String> {
    let mut pass = !c.steps.is_empty();
    let mut parts = Vec::new();
    for s in &c.steps {
        pass &= s.err_w < 1.0 / s.k as f64;
        parts.push(format!("k={} {:.4}<{:.4}", s.k, s.err_w, 1.0 / s.k as f64));
    }
    Ok(outcome(pass, parts.join(", ")))
}

fn weight_sandwich(c: &Construction) -> Result<Outcome, String> {
    let dir = tempfile::tempdir().map_err(err)?;
    write_artifact(c, dir.path()).map_err(err)?;
    let art = load_artifact(dir.path()).map_err(err)?;
    let (v, steps) = rebuild_steps(&art).map_err(err)?;
    let sandwich = art.w.values().iter().zip(v.values()).all(|(w, v)| *w > 0.0 && w <= v);
    let rows = recheck_steps(&art, &steps).map_err(err)?;
    let eta_err = rows.iter().map(|r| r.eta_rel_err).fold(0.0, f64::max);
    Ok(outcome(
        sandwich && eta_err <= ETA_REL,
        format!("0<w<=v: {sandwich}, max eta rel err {eta_err:.2e} (tol {ETA_REL:.0e})"),
    ))
}

fn bessel(c: &Construction) -> Result<Outcome, String> {
    let lambdas = &c.spectrum.lambdas;
    let rows = bessel_bound(lambdas, &c.weight.w, &SECTIONS).map_err(err)?;
    let base = rows[0].max_eig;
    let sup = rows.iter().map(|r| r.max_eig).fold(0.0, f64::max);
    let stable = sup <= BESSEL_GROWTH * base;
    let nested = nested_weights(&c.weight.v, &c.weight.steps).map_err(err)?;
    let mono = bessel_monotonicity(lambdas, &nested, &SECTIONS).map_err(err)?;
    let mono_ok = mono
        .iter()
        .all(|r| r.max_eig_smaller <= r.max_eig_larger * (1.0 + MONOTONE_TOL));
    Ok(outcome(
        stable && mono_ok,
        format!(
            "max eig at 10: {base:.4e}, sup over 10..200: {sup:.4e} (ratio {:.2}, limit {BESSEL_GROWTH}); monotone on {} nested pairs: {mono_ok}",
            sup / base,
            mono.len()
        ),
    ))
}

fn battery_max_radius(rows: &[QfRow]) -> f64 {
    if rows.iter().all(|r| r.reached) {
        rows.iter().map(|r| r.radius).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    }
}

fn qf_rows(c: &Construction, sections: &[usize]) -> Result<Vec<QfRow>, String> {
    let opts = QfOptions { q: QF_Q, target_eps: QF_EPS, section_sizes: sections.to_vec(), ..QfOptions::default() };
    qf_battery(&default_battery(), &c.spectrum.lambdas, &c.weight.w, &opts, &VerifyOptions::default().solver)
        .map_err(err)
}

fn qf_demo(c: &Construction, base: &[QfRow]) -> Result<Outcome, String> {
    let refined_cfg = ConstructionConfig {
        grid: GridConfig { points_per_unit: 2 * GridConfig::default().points_per_unit, ..GridConfig::default() },
        ..ConstructionConfig::default()
    };
    let refined = run_construction(&refined_cfg, &construction_solver()).map_err(err)?;
    let fine = qf_rows(&refined, &QF_SECTIONS)?;
    let doubled: Vec<usize> = QF_SECTIONS.iter().map(|s| 2 * s).collect();
    let grown = qf_rows(c, &doubled)?;
    let r0 = battery_max_radius(base);
    let (r1, r2) = (battery_max_radius(&fine), battery_max_radius(&grown));
    let reached = base.iter().filter(|r| r.reached).count();
    let stable = r0.is_finite()
        && r1.is_finite()
        && r2.is_finite()
        && (r1 - r0).abs() <= QF_STABILITY * r0
        && (r2 - r0).abs() <= QF_STABILITY * r0;
    let floor = base.iter().map(|r| r.achieved_error).fold(0.0, f64::max);
    Ok(outcome(
        stable,
        format!(
            "reached eps={QF_EPS} for {reached}/{} (worst error {floor:.3}); battery-max radius base {r0:.4}, 2x grid {r1:.4}, 2x sections {r2:.4}",
            base.len()
        ),
    ))
}

fn unitary_transfer(c: &Construction, base: &[QfRow]) -> Result<Outcome, String> {
    let w = &c.weight.w;
    let mut worst = 0.0f64;
    for (row, t) in base.iter().zip(default_battery()) {
        let f = normalized(&t.sample(c.grid), w).map_err(err)?;
        let coeffs: Vec<Complex64> = row.coeffs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let lam = &c.spectrum.lambdas[..row.section_size.min(coeffs.len())];
        let (e, tr) = unitary_transfer_check(&f, w, &coeffs[..lam.len()], lam).map_err(err)?;
        let fnorm = norm_w(&f, w).map_err(err)?;
        worst = worst.max((e - tr).abs() / fnorm);
    }
    Ok(outcome(
        worst <= TRANSFER_TOL,
        format!("max |err_exp - err_trans|/|f| over {} functions: {worst:.2e}", base.len()),
    ))
}

/// Scalar-KKT brute force: bisect the multiplier, bisect each scalar
/// equation `x + κ x^{q-1} = y`.
fn projection_oracle(y: &[f64], q: f64, radius: f64) -> Vec<f64> {
    let solve_x = |yi: f64, kappa: f64| {
        let (mut a, mut b) = (0.0, yi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m + kappa * m.powf(q - 1.0) > yi {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    let excess = |kappa: f64| y.iter().map(|&yi| solve_x(yi, kappa).powf(q)).sum::<f64>() - radius.powf(q);
    let mut hi = 1e-12;
    while excess(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if excess(m) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    y.iter().map(|&yi| solve_x(yi, hi)).collect()
}

fn realify(g: &DMatrix<Complex64>) -> DMatrix<f64> {
    let k = g.nrows();
    DMatrix::from_fn(2 * k, 2 * k, |r, c| {
        let z = g[(r % k, c % k)];
        match (r < k, c < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Minimizer of `F(c) + (ν/q)‖c‖_q^q` by damped Newton on the realified
/// problem.
fn penalized_newton(sys: &SynthesisSystem, b: &DVector<Complex64>, fnorm2: f64, q: f64, nu: f64) -> DVector<Complex64> {
    let k = b.len();
    let gr = realify(sys.gram());
    let phi = |c: &DVector<Complex64>| {
        sys.objective(fnorm2, b, c) + nu / q * c.iter().map(|z| z.norm().powf(q)).sum::<f64>()
    };
    let mut c = DVector::<Complex64>::zeros(k);
    for _ in 0..200 {
        let g = sys.gradient(b, &c) + c.map(|z| z * z.norm().powf(q - 2.0) * nu);
        let gv = DVector::from_fn(2 * k, |i, _| if i < k { g[i].re } else { g[i - k].im });
        if gv.norm() < 1e-14 {
            break;
        }
        let mut h = gr.clone();
        for a in 0..k {
            let m = c[a].norm();
            let s = nu * m.powf(q - 2.0);
            let (ux, uy) = if m > 0.0 { (c[a].re / m, c[a].im / m) } else { (0.0, 0.0) };
            h[(a, a)] += s * (1.0 + (q - 2.0) * ux * ux);
            h[(k + a, k + a)] += s * (1.0 + (q - 2.0) * uy * uy);
            h[(a, k + a)] += s * (q - 2.0) * ux * uy;
            h[(k + a, a)] += s * (q - 2.0) * ux * uy;
        }
        let d = h.lu().solve(&(-&gv)).expect("regularized Hessian");
        let dc = DVector::from_fn(k, |a, _| Complex64::new(d[a], d[k + a]));
        let f0 = phi(&c);
        let mut t = 1.0;
        while phi(&(&c + &dc * Complex64::new(t, 0.0))) > f0 + 1e-4 * t * gv.dot(&d) && t > 1e-12 {
            t *= 0.5;
        }
        c += dc * Complex64::new(t, 0.0);
    }
    c
}

/// Dense oracle for the ball-constrained least squares: the free minimizer
/// if feasible, else bisection on the multiplier until `‖c(ν)‖_q = radius`.
fn lsq_oracle(sys: &SynthesisSystem, f: &SampledFunction, q: f64, radius: f64) -> (f64, DVector<Complex64>) {
    let b = sys.rhs(f).unwrap();
    let fnorm2 = norm_w(f, sys.weight()).unwrap().powi(2);
    let free = sys.gram().clone().lu().solve(&b).unwrap();
    if lq_norm(free.as_slice(), q).unwrap() <= radius {
        return (sys.objective(fnorm2, &b, &free), free);
    }
    let norm_at = |nu: f64| lq_norm(penalized_newton(sys, &b, fnorm2, q, nu).as_slice(), q).unwrap();
    let (mut lo, mut hi) = (0.0, 1.0);
    while norm_at(hi) > radius {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = penalized_newton(sys, &b, fnorm2, q, hi);
    (sys.objective(fnorm2, &b, &c), c)
}

fn solver_oracles() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut proj_err = 0.0f64;
    for trial in 0..60 {
        let q = [2.5, 3.0, 4.0, 6.0][trial % 4];
        let n = 1 + trial % 8;
        let c: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let radius = 0.5 * lq_norm(&c, q).unwrap();
        let p = lq_ball_projection(&c, q, radius);
        let y: Vec<f64> = c.iter().map(|z| z.norm()).collect();
        for ((pz, o), z) in p.iter().zip(projection_oracle(&y, q, radius)).zip(&c) {
            let expect = if z.norm() > 0.0 { z * (o / z.norm()) } else { Complex64::new(0.0, 0.0) };
            proj_err = proj_err.max((pz - expect).norm());
        }
    }

    let grid = Grid::with_offset(PI, 64, 2.0 * PI / 64.0 / 7.0).map_err(err)?;
    let (v, _) = make_base_weight(&grid, 1.0).map_err(err)?;
    let sys = SynthesisSystem::new(vec![-1.5, -0.2, 0.7, 1.0, 2.4], v).map_err(err)?;
    let f = SampledFunction::from_fn(grid, |x| Complex64::new(2.0 * (0.9 * x).cos() + x, (1.3 * x).sin() - 0.5));
    let cfg = SolverConfig { tolerance: 1e-12, ..SolverConfig::default() };
    let mut lsq_err = 0.0f64;
    for (q, radius) in [(3.0, 1.0), (4.0, 0.6), (3.0, 50.0)] {
        let got = constrained_lsq(&sys, &f, q, radius, &cfg).map_err(err)?;
        let (obj, c) = lsq_oracle(&sys, &f, q, radius);
        lsq_err = lsq_err.max((0.5 * got.residual_norm.powi(2) - obj).abs());
        for (a, b) in got.coeffs.iter().zip(c.iter()) {
            lsq_err = lsq_err.max((a - b).norm());
        }
    }

    let b = sys.rhs(&f).map_err(err)?;
    let direct = |c: &DVector<Complex64>| 0.5 * sys.residual_norm(&f, c.as_slice()).unwrap().powi(2);
    let mut grad_err = 0.0f64;
    for _ in 0..10 {
        let c = DVector::from_fn(5, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let g = sys.gradient(&b, &c);
        let h = 1e-5;
        for a in 0..5 {
            for (unit, exact) in [(Complex64::new(1.0, 0.0), g[a].re), (Complex64::new(0.0, 1.0), g[a].im)] {
                let (mut cp, mut cm) = (c.clone(), c.clone());
                cp[a] += unit * h;
                cm[a] -= unit * h;
                let fd = (direct(&cp) - direct(&cm)) / (2.0 * h);
                grad_err = grad_err.max((fd - exact).abs() / exact.abs().max(1.0));
            }
        }
    }
    Ok(outcome(
        proj_err <= PROJECTION_TOL && lsq_err <= LSQ_TOL && grad_err <= GRADIENT_REL,
        format!("projection {proj_err:.1e} (tol {PROJECTION_TOL:.0e}), lsq {lsq_err:.1e} (tol {LSQ_TOL:.0e}), gradient {grad_err:.1e} (tol {GRADIENT_REL:.0e})"),
    ))
}

fn frame(c: &Construction) -> Result<Outcome, String> {
    let rows = frame_failure_probe(&c.spectrum.lambdas, &c.weight.w, &SECTIONS).map_err(err)?;
    let (m10, m200) = (rows[0].min_eig, rows[rows.len() - 1].min_eig);
    let drops = m200 < FRAME_DROP * m10;

    let grid = make_grid(64.0 * PI, 64).map_err(err)?;
    let (v, _) = make_base_weight(&grid, 1.0).map_err(err)?;
    let even: Vec<f64> = (1..=200).map(|n| 2.0 * n as f64).collect();
    let ctrl = frame_failure_probe(&even, &v, &SECTIONS).map_err(err)?;
    // ‖h‖² for the unit triangle.
    let h2 = 1.0;
    let dev = ctrl
        .iter()
        .map(|r| ((r.min_eig - h2).abs()).max((r.max_eig - h2).abs()))
        .fold(0.0, f64::max);
    Ok(outcome(
        drops && dev <= CONTROL_REL,
        format!(
            "min eig 10: {m10:.3e}, 200: {m200:.3e} (ratio {:.1e}, limit {FRAME_DROP:.0e}); control |eig - |h|^2| <= {dev:.1e}",
            m200 / m10
        ),
    ))
}

fn hadamard(c: &Construction) -> Result<Outcome, String> {
    let w = &c.weight.w;
    let bump = normalized(&TestFunction::Bump { center: 0.0, width: 1.0, omega: 0.0 }.sample(c.grid), w).map_err(err)?;
    let r10 = hadamard_residual(2.0, &bump, w, 10).map_err(err)?;
    let r60 = hadamard_residual(2.0, &bump, w, 60).map_err(err)?;
    let atom = normalized(&SampledFunction::from_fn(c.grid, |x| Complex64::from_polar(1.0, 8.0 * x)), w).map_err(err)?;
    let ra = hadamard_residual(2.0, &atom, w, 10).map_err(err)?;
    Ok(outcome(
        r60 > HADAMARD_PLATEAU * r10 && ra < ATOM_RESIDUAL,
        format!("bump residual N=10 {r10:.4}, N=60 {r60:.4}; atom 2^3 residual {ra:.1e}"),
    ))
}

fn hashes(dir: &Path) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(err)? {
        let p = e.map_err(err)?.path();
        out.push((p.file_name().unwrap().to_string_lossy().into_owned(), sha256_file(&p).map_err(err)?));
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Result<Outcome, String> {
    let mut sets = Vec::new();
    for _ in 0..2 {
        let c = default_run()?;
        let dir = tempfile::tempdir().map_err(err)?;
        write_artifact(&c, dir.path()).map_err(err)?;
        sets.push(hashes(dir.path())?);
    }
    Ok(outcome(sets[0] == sets[1], format!("{} files compared by sha256", sets[0].len())))
}

fn main() {
    let start = Instant::now();
    let c = match default_run() {
        Ok(c) => c,
        Err(e) => {
            println!("acceptance: default construction failed: {e}");
            std::process::exit(1);
        }
    };
    // Shared by the QF and transfer criteria.
    let base = qf_rows(&c, &QF_SECTIONS);
    let with_base = |f: fn(&Construction, &[QfRow]) -> Result<Outcome, String>| {
        let c = &c;
        let base = &base;
        Box::new(move || match base {
            Ok(rows) => f(c, rows),
            Err(e) => Err(e.clone()),
        }) as Box<dyn FnOnce() -> Result<Outcome, String>>
    };
    let criteria: Vec<Criterion> = vec![
        ("sparsity", Box::new(|| sparsity(&c))),
        ("block_conditions", Box::new(|| block_conditions(&c))),
        ("per_step_error", Box::new(|| per_step_error(&c))),
        ("weight_sandwich", Box::new(|| weight_sandwich(&c))),
        ("bessel", Box::new(|| bessel(&c))),
        ("qf_demonstration", with_base(qf_demo)),
        ("unitary_transfer", with_base(unitary_transfer)),
        ("solver_oracles", Box::new(solver_oracles)),
        ("frame_failure", Box::new(|| frame(&c))),
        ("hadamard", Box::new(|| hadamard(&c))),
        ("determinism", Box::new(determinism)),
    ];
    let total = criteria.len();
    let mut passed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        passed += o.pass as usize;
        println!(
            "[PRIMARY] {name:<18} {}  {}  ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{total} passed in {:.1}s", start.elapsed().as_secs_f64());
    if passed < total && std::env::var_os("QFLAB_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
