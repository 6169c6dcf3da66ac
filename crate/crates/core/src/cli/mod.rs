//! The `qflab` command line: argument parsing, dispatch and exit codes.
//!
//! Exit code 0 means success, 1 that the run completed but an asserted
//! property failed, 2 a usage or configuration error.

pub mod config;
pub mod output;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::block::{assemble_block, check_block, plan_block, BlockOptions};
use crate::cells;
use crate::construction::{load_artifact, run_construction, write_artifact, FamilyMember};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid, SampledFunction};
use crate::io::{read_sampled, write_trigpoly};
use crate::landau::{build_landau, offsets_in_range};
use crate::menshov::{build_menshov, MenshovOptions};
use crate::solver::{constrained_lsq, write_trace, SynthesisSystem};
use crate::verify::{default_battery, normalized, parse_suites, qf_approximate, run_verify, QfOptions, VerifyReport};
use output::{write_json, write_manifest, Table};

pub use report::{build_summary, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qflab", version, about = "Sparse exponential systems in weighted L²: construction and verification")]
pub struct Cli {
    /// Write per-iteration solver traces (trace.csv) where the subcommand runs a traced solve.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build Λ, the weight w and the generator g.
    Construct(ConstructArgs),
    /// Build one integer-spectrum polynomial that is ≈ 1 off a small set.
    Menshov(MenshovArgs),
    /// Approximate a target in measure with near-integer frequencies.
    Landau(LandauArgs),
    /// Plan, place and check one sparse block.
    Block(BlockArgs),
    /// Run verification suites on a construction artifact.
    Verify(VerifyArgs),
    /// ℓ_q-bounded approximation of one function on an artifact.
    Approx(ApproxArgs),
    /// Summarize an artifact and its verification report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// TOML file, or `default`.
    #[arg(long, default_value = "default")]
    pub config: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Half width T of the grid [-T, T]; accepts multiples of pi such as `4pi`.
    #[arg(long, default_value = "pi", value_parser = parse_real)]
    pub half_width: f64,
    /// Points per unit length.
    #[arg(long, default_value_t = 32)]
    pub ppu: usize,
}

#[derive(Debug, Args)]
pub struct MenshovArgs {
    #[arg(long)]
    pub mu: f64,
    /// `lo,hi`, e.g. `-pi,pi`.
    #[arg(long, default_value = "-pi,pi", value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    #[arg(long, default_value_t = 1)]
    pub k_start: usize,
    #[arg(long, default_value_t = 256)]
    pub k_max: usize,
    /// Solver TOML file, or `default`.
    #[arg(long, default_value = "default")]
    pub config: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LandauArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long, default_value = "-pi,pi", value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    /// CSV (x, re, im) on the grid given by --half-width/--ppu, or
    /// `bump:OMEGA` / `sign_bump:OMEGA` supported on [-support, support].
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 1)]
    pub support: usize,
    #[arg(long, default_value_t = 64)]
    pub n_cap: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "default")]
    pub config: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    #[arg(long)]
    pub delta: f64,
    /// Dilation base; the first block frequency is at least d.
    #[arg(long, default_value_t = 1)]
    pub d: u64,
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 1)]
    pub support: usize,
    #[arg(long, default_value = "-pi,pi", value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    #[arg(long, default_value_t = 64)]
    pub n_cap: usize,
    #[arg(long, default_value_t = 256)]
    pub k_max: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "default")]
    pub config: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub artifact_dir: PathBuf,
    /// Comma-separated suites or `all`: bessel, qf, dual, frame, hadamard, density, decay.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Verify TOML file, or `default`.
    #[arg(long, default_value = "default")]
    pub config: String,
    /// Defaults to `<artifact-dir>/verify`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[arg(long)]
    pub artifact_dir: PathBuf,
    /// CSV (x, re, im) on the artifact grid, or `battery:INDEX`.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 3.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Increasing section sizes.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub sections: Vec<usize>,
    #[arg(long, default_value = "default")]
    pub config: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub artifact_dir: PathBuf,
    /// Defaults to `<artifact-dir>/report`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// A real number, optionally written as a multiple of pi (`pi`, `-2pi`,
/// `0.5pi`).
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let v = if let Some(head) = t.strip_suffix("pi") {
        let m = match head {
            "" => 1.0,
            "-" => -1.0,
            h => h.trim_end_matches('*').parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"))?,
        };
        m * std::f64::consts::PI
    } else {
        t.parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

pub fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let (lo, hi) = (parse_real(a)?, parse_real(b)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("interval {s:?} is empty"))
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_)
        | Error::ConditionFailure(_)
        | Error::StepFailure { .. }
        | Error::NonConvergence { .. }
        | Error::Infeasible { .. } => EXIT_ASSERTION,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QFLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::invalid(format!("QFLAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::invalid("QFLAB_THREADS must be positive"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match run(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_ASSERTION,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// `Ok(false)` when the run finished but an asserted property failed.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Construct(a) => construct(a),
        Command::Menshov(a) => menshov(a),
        Command::Landau(a) => landau(a),
        Command::Block(a) => block(a),
        Command::Verify(a) => verify(a),
        Command::Approx(a) => approx(a, cli.trace),
        Command::Report(a) => report::report(&a.artifact_dir, a.out_dir.as_deref()),
    }
}

fn load_target(spec: &str, grid: Grid, support: usize) -> Result<(SampledFunction, String)> {
    let member = if let Some(o) = spec.strip_prefix("bump:") {
        Some(FamilyMember::Bump { omega: parse_real(o).map_err(Error::invalid)? })
    } else if let Some(o) = spec.strip_prefix("sign_bump:") {
        Some(FamilyMember::SignBump { omega: parse_real(o).map_err(Error::invalid)? })
    } else {
        None
    };
    match member {
        Some(m) => Ok((m.sample(grid, support), m.id())),
        None => {
            let f = std::fs::File::open(spec).map_err(|e| Error::Parse(format!("cannot open target {spec}: {e}")))?;
            Ok((read_sampled(&grid, std::io::BufReader::new(f))?, spec.to_string()))
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_poly(path: PathBuf, p: &crate::trigpoly::TrigPoly, files: &mut Vec<PathBuf>) -> Result<()> {
    write_trigpoly(p, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    files.push(path);
    Ok(())
}

fn construct(a: &ConstructArgs) -> Result<bool> {
    let mut cfg = config::load_construct(Some(&a.config))?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.solver.seed = cfg.seed;
    let c = run_construction(&cfg.construction, &cfg.solver)?;
    let mut files = write_artifact(&c, &a.out_dir)?;
    let cfg_path = a.out_dir.join("config.toml");
    std::fs::write(&cfg_path, toml::to_string(&cfg).map_err(|e| Error::Parse(e.to_string()))?)?;
    files.push(cfg_path);
    write_manifest(&a.out_dir, "construct", &cfg, &files)?;

    let mut ok = c.spectrum.first_sparsity_violation().is_none();
    println!(
        "spectrum: {} terms, max {:.6e}, separation {:.6}, sparsity {}",
        c.spectrum.lambdas.len(),
        c.spectrum.lambdas.last().copied().unwrap_or(0.0),
        c.spectrum.separation,
        if ok { "ok" } else { "VIOLATED" }
    );
    for s in &c.steps {
        let pass = s.failures.is_empty() && s.exceptional_ok && s.error_ok;
        ok &= pass;
        println!(
            "step {}: n_k={} d={} K={} N={} exceptional_ok={} error_ok={}{}",
            s.k,
            s.n_k,
            s.d,
            s.plan.k,
            s.plan.n,
            s.exceptional_ok,
            s.error_ok,
            if s.failures.is_empty() { String::new() } else { format!(" failures: {}", s.failures.join("; ")) }
        );
    }
    if let Some(k) = c.halted_at {
        println!("halted at step {k}");
        ok = false;
    }
    Ok(ok)
}

#[derive(Serialize)]
struct MenshovRun<'a> {
    mu: f64,
    interval: [f64; 2],
    options: &'a MenshovOptions,
    solver: &'a config::SolverFile,
}

fn menshov(a: &MenshovArgs) -> Result<bool> {
    let sf = config::load_solver(Some(&a.config))?;
    let mut solver = sf.solver.clone();
    solver.seed = sf.seed;
    let opts = MenshovOptions { k_start: a.k_start, k_max: a.k_max, ..MenshovOptions::default() };
    let res = build_menshov(a.interval, a.mu, &opts, &solver)?;
    create_dir(&a.out)?;
    let mut files = Vec::new();
    write_poly(a.out.join("a.csv"), &res.poly, &mut files)?;
    let cert = a.out.join("certificate.json");
    write_json(&cert, &res.certificate)?;
    files.push(cert);
    let run = MenshovRun { mu: a.mu, interval: [a.interval.0, a.interval.1], options: &opts, solver: &sf };
    write_manifest(&a.out, "menshov", &run, &files)?;
    let c = &res.certificate;
    println!(
        "K={} norm={:.6e} measure={:.6e} accepted={}",
        c.k, c.mu_achieved_norm, c.mu_achieved_measure, c.accepted
    );
    Ok(c.accepted)
}

#[derive(Serialize)]
struct TargetRun<'a> {
    target: &'a str,
    support: usize,
    interval: [f64; 2],
    half_width: f64,
    ppu: usize,
    solver: &'a config::SolverFile,
}

fn landau(a: &LandauArgs) -> Result<bool> {
    let sf = config::load_solver(Some(&a.config))?;
    let mut solver = sf.solver.clone();
    solver.seed = sf.seed;
    let grid = make_grid(a.grid.half_width, a.grid.ppu)?;
    let (f, _) = load_target(&a.target, grid, a.support)?;
    let res = build_landau(a.interval, a.xi, &f, a.n_cap, &solver)?;
    create_dir(&a.out)?;
    let mut files = Vec::new();
    write_poly(a.out.join("b.csv"), &res.poly, &mut files)?;
    let plan = a.out.join("plan.json");
    write_json(&plan, &res.plan)?;
    files.push(plan);
    let run = TargetRun {
        target: &a.target,
        support: a.support,
        interval: [a.interval.0, a.interval.1],
        half_width: a.grid.half_width,
        ppu: a.grid.ppu,
        solver: &sf,
    };
    write_manifest(&a.out, "landau", &run, &files)?;
    let offsets_ok = offsets_in_range(&res.plan);
    println!(
        "N={} measure={:.6e} accepted={} offsets_ok={}",
        res.plan.n, res.plan.achieved_measure, res.plan.accepted, offsets_ok
    );
    Ok(res.plan.accepted && offsets_ok)
}

fn block(a: &BlockArgs) -> Result<bool> {
    let sf = config::load_solver(Some(&a.config))?;
    let mut solver = sf.solver.clone();
    solver.seed = sf.seed;
    let grid = make_grid(a.grid.half_width, a.grid.ppu)?;
    let (f, id) = load_target(&a.target, grid, a.support)?;
    let opts = BlockOptions {
        landau_n_cap: a.n_cap,
        menshov: MenshovOptions { k_max: a.k_max, ..MenshovOptions::default() },
    };
    let plan = plan_block(a.interval, a.delta, &f, &id, &opts, &solver)?;
    let blk = assemble_block(&plan, a.d)?;
    let cond = check_block(&plan, &blk, &f)?;
    create_dir(&a.out)?;
    let mut files = Vec::new();
    write_poly(a.out.join("q.csv"), &blk.q, &mut files)?;
    write_poly(a.out.join("a.csv"), &plan.a, &mut files)?;
    write_poly(a.out.join("b.csv"), &plan.b, &mut files)?;
    #[derive(Serialize)]
    struct BlockReport<'a> {
        plan: &'a crate::block::BlockPlanRecord,
        d: u64,
        dilations: &'a [f64],
        block_spectra: &'a [[f64; 2]],
        conditions: &'a crate::block::BlockConditions,
        failures: Vec<String>,
    }
    let rep = a.out.join("conditions.json");
    write_json(
        &rep,
        &BlockReport {
            plan: &plan.record,
            d: blk.d,
            dilations: &blk.r,
            block_spectra: &blk.block_spectra,
            conditions: &cond,
            failures: cond.failures(),
        },
    )?;
    files.push(rep);
    let run = TargetRun {
        target: &a.target,
        support: a.support,
        interval: [a.interval.0, a.interval.1],
        half_width: a.grid.half_width,
        ppu: a.grid.ppu,
        solver: &sf,
    };
    write_manifest(&a.out, "block", &run, &files)?;
    println!(
        "K={} N={} mu={:.6e} norm={} start={} ratio={} measure={}",
        plan.record.k, plan.record.n, plan.record.mu, cond.norm_ok, cond.start_ok, cond.ratio_ok, cond.measure_ok
    );
    for msg in cond.failures() {
        println!("  {msg}");
    }
    Ok(cond.all_pass())
}

/// Per-suite CSV tables for a verification report.
pub fn write_verify_tables(rep: &VerifyReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut t = Table::new(&["name", "pass", "detail"]);
    for c in &rep.checks {
        t.row(cells![c.name.clone(), c.pass, c.detail.clone()]);
    }
    files.push(t.write(&dir.join("checks.csv"))?);
    let mut t = Table::new(&["k", "eta_stored", "eta_recomputed", "eta_rel_err", "err_w", "error_ok", "complement_measure", "exceptional_ok"]);
    for s in &rep.steps {
        t.row(cells![s.k, s.eta_stored, s.eta_recomputed, s.eta_rel_err, s.err_w, s.error_ok, s.complement_measure, s.exceptional_ok]);
    }
    files.push(t.write(&dir.join("steps.csv"))?);
    if let Some(rows) = &rep.bessel {
        let mut t = Table::new(&["size", "max_eig", "bessel_sq"]);
        for r in rows {
            t.row(cells![r.size, r.max_eig, r.bessel_sq]);
        }
        files.push(t.write(&dir.join("bessel.csv"))?);
    }
    if let Some(rows) = &rep.monotonicity {
        let mut t = Table::new(&["weight", "size", "max_eig_larger", "max_eig_smaller", "holds"]);
        for r in rows {
            t.row(cells![r.weight, r.size, r.max_eig_larger, r.max_eig_smaller, r.holds]);
        }
        files.push(t.write(&dir.join("monotonicity.csv"))?);
    }
    if let Some(rows) = &rep.frame {
        let mut t = Table::new(&["size", "min_eig", "max_eig"]);
        for r in rows {
            t.row(cells![r.size, r.min_eig, r.max_eig]);
        }
        files.push(t.write(&dir.join("frame.csv"))?);
    }
    if let Some(rows) = &rep.qf {
        let mut t = Table::new(&["f_id", "q", "target_eps", "reached", "section_size", "radius", "achieved_error", "coeff_norm", "ratio"]);
        for r in rows {
            t.row(cells![r.f_id.clone(), r.q, r.target_eps, r.reached, r.section_size, r.radius, r.achieved_error, r.coeff_norm, r.ratio]);
        }
        files.push(t.write(&dir.join("qf.csv"))?);
    }
    if let Some(rows) = &rep.dual {
        let mut t = Table::new(&["f_id", "p", "section_size", "f_norm", "moments_lp", "ratio"]);
        for r in rows {
            t.row(cells![r.f_id.clone(), r.p, r.section_size, r.f_norm, r.moments_lp, r.ratio]);
        }
        files.push(t.write(&dir.join("dual.csv"))?);
    }
    if let Some(rows) = &rep.duality {
        let mut t = Table::new(&["f_id", "section_size", "p", "dual_ratio", "radius_bound", "holds"]);
        for r in rows {
            t.row(cells![r.f_id.clone(), r.section_size, r.p, r.dual_ratio, r.radius_bound, r.holds]);
        }
        files.push(t.write(&dir.join("duality.csv"))?);
    }
    if let Some(rows) = &rep.hadamard {
        let mut t = Table::new(&["N", "residual"]);
        for r in rows {
            t.row(cells![r.n, r.residual]);
        }
        files.push(t.write(&dir.join("hadamard.csv"))?);
    }
    if let Some(d) = &rep.density {
        let mut t = Table::new(&["window", "inf_count", "estimate"]);
        for r in &d.rows {
            t.row(cells![r.window, r.inf_count, r.estimate]);
        }
        files.push(t.write(&dir.join("density.csv"))?);
    }
    if let Some(rows) = &rep.decay {
        let mut t = Table::new(&["radius", "mass"]);
        for r in rows {
            t.row(cells![r.radius, r.mass]);
        }
        files.push(t.write(&dir.join("decay.csv"))?);
    }
    Ok(files)
}

fn verify(a: &VerifyArgs) -> Result<bool> {
    let vf = config::load_verify(Some(&a.config))?;
    let suites = parse_suites(&a.suite)?;
    let art = load_artifact(&a.artifact_dir)?;
    let mut opts = vf.verify.clone();
    opts.solver.seed = vf.seed;
    let rep = run_verify(&art, &suites, &opts)?;
    let out = a.out_dir.clone().unwrap_or_else(|| a.artifact_dir.join("verify"));
    create_dir(&out)?;
    let mut files = write_verify_tables(&rep, &out)?;
    let path = out.join("report.json");
    write_json(&path, &rep)?;
    files.push(path);
    write_manifest(&out, "verify", &vf, &files)?;
    for c in &rep.checks {
        println!("{:<20} {}  {}", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail);
    }
    Ok(rep.all_pass())
}

fn approx(a: &ApproxArgs, trace: bool) -> Result<bool> {
    let sf = config::load_solver(Some(&a.config))?;
    let mut solver = sf.solver.clone();
    solver.seed = sf.seed;
    let art = load_artifact(&a.artifact_dir)?;
    let (f, id) = if let Some(i) = a.target.strip_prefix("battery:") {
        let battery = default_battery();
        let idx: usize = i.parse().map_err(|_| Error::invalid(format!("bad battery index {i:?}")))?;
        let t = battery
            .get(idx)
            .ok_or_else(|| Error::invalid(format!("battery index {idx} out of range (0..{})", battery.len())))?;
        (t.sample(art.grid), t.id())
    } else {
        let file = std::fs::File::open(&a.target).map_err(|e| Error::Parse(format!("cannot open target {}: {e}", a.target)))?;
        (read_sampled(&art.grid, std::io::BufReader::new(file))?, a.target.clone())
    };
    let f = normalized(&f, &art.w)?;
    let opts = QfOptions { q: a.q, target_eps: a.eps, section_sizes: a.sections.clone(), ..QfOptions::default() };
    let row = qf_approximate(&f, &id, &art.lambdas, &art.w, &opts, &solver)?;
    create_dir(&a.out)?;
    let mut files = Vec::new();
    let path = a.out.join("approx.json");
    write_json(&path, &row)?;
    files.push(path);
    let coeffs: Vec<Complex64> = row.coeffs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    if row.section_size > 0 {
        let poly = crate::trigpoly::TrigPoly::new(art.lambdas[..row.section_size].to_vec(), coeffs)?;
        write_poly(a.out.join("coeffs.csv"), &poly, &mut files)?;
        if trace {
            let sys = SynthesisSystem::new(art.lambdas[..row.section_size].to_vec(), art.w.clone())?;
            let traced = constrained_lsq(&sys, &f, a.q, row.radius, &crate::solver::SolverConfig { trace: true, ..solver.clone() })?;
            let path = a.out.join("trace.csv");
            write_trace(&traced.trace, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            files.push(path);
        }
    }
    #[derive(Serialize)]
    struct ApproxRun<'a> {
        artifact_dir: String,
        target: &'a str,
        options: &'a QfOptions,
        solver: &'a config::SolverFile,
    }
    let run = ApproxRun { artifact_dir: a.artifact_dir.display().to_string(), target: &a.target, options: &opts, solver: &sf };
    write_manifest(&a.out, "approx", &run, &files)?;
    println!(
        "{}: reached={} section={} radius={:.6e} error={:.6e} C(q)={:.6e}",
        row.f_id, row.reached, row.section_size, row.radius, row.achieved_error, row.ratio
    );
    Ok(row.reached)
}
