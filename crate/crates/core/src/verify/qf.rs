//! Approximation with ℓ_q-bounded coefficients over a battery of test
//! functions, and the dual inequality check.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_w, sinc, Grid, SampledFunction, WeightSamples};
use crate::solver::{constrained_lsq, SolverConfig, SynthesisSystem};
use crate::trigpoly::lq_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Atom { lambda: f64 },
    /// `cos²(π(x-c)/2r)·e^{iωx}` on `|x - c| < r`.
    Bump { center: f64, width: f64, omega: f64 },
    /// The bump times `sign(x - c)`.
    SignBump { center: f64, width: f64, omega: f64 },
    /// `Σ_{|m| ≤ terms} c_m sinc(b x - mπ)` with seeded uniform complex `c_m`;
    /// band-limited to `[-b, b]`.
    BandLimited { seed: u64, terms: usize, band: f64 },
}

impl TestFunction {
    pub fn id(&self) -> String {
        match self {
            TestFunction::Atom { lambda } => format!("atom({lambda})"),
            TestFunction::Bump { center, width, omega } => format!("bump({center},{width},{omega})"),
            TestFunction::SignBump { center, width, omega } => format!("sign_bump({center},{width},{omega})"),
            TestFunction::BandLimited { seed, terms, band } => format!("band_limited({seed},{terms},{band})"),
        }
    }

    pub fn sample(&self, grid: Grid) -> SampledFunction {
        let bump = |x: f64, c: f64, r: f64| {
            let u = (x - c) / r;
            if u.abs() < 1.0 {
                (0.5 * PI * u).cos().powi(2)
            } else {
                0.0
            }
        };
        match *self {
            TestFunction::Atom { lambda } => SampledFunction::from_fn(grid, |x| Complex64::from_polar(1.0, lambda * x)),
            TestFunction::Bump { center, width, omega } => {
                SampledFunction::from_fn(grid, |x| Complex64::from_polar(bump(x, center, width), omega * x))
            }
            TestFunction::SignBump { center, width, omega } => SampledFunction::from_fn(grid, |x| {
                Complex64::from_polar((x - center).signum() * bump(x, center, width), omega * x)
            }),
            TestFunction::BandLimited { seed, terms, band } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = terms as i64;
                let c: Vec<(f64, Complex64)> = (-m..=m)
                    .map(|k| (k as f64 * PI, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                    .collect();
                SampledFunction::from_fn(grid, |x| c.iter().map(|(s, a)| a * sinc(band * x - s)).sum())
            }
        }
    }
}

/// Ten functions: one atom, four bumps, two sign bumps, three band-limited.
pub fn default_battery() -> Vec<TestFunction> {
    use TestFunction::*;
    vec![
        Atom { lambda: 2.0 },
        Bump { center: 0.0, width: 1.0, omega: 0.0 },
        Bump { center: 0.5, width: 2.0, omega: 3.0 },
        Bump { center: -1.0, width: 4.0, omega: -2.0 },
        Bump { center: 2.0, width: 3.0, omega: 0.7 },
        SignBump { center: 0.0, width: 2.0, omega: 0.0 },
        SignBump { center: 0.3, width: 3.0, omega: 1.5 },
        BandLimited { seed: 1, terms: 4, band: 1.0 },
        BandLimited { seed: 2, terms: 6, band: 2.0 },
        BandLimited { seed: 3, terms: 8, band: 4.0 },
    ]
}

/// `f / ‖f‖_w`.
pub fn normalized(f: &SampledFunction, w: &WeightSamples) -> Result<SampledFunction> {
    let n = norm_w(f, w)?;
    if !(n > 0.0) {
        return Err(Error::invalid("test function has zero weighted norm"));
    }
    Ok(f.scaled(Complex64::new(1.0 / n, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QfOptions {
    pub q: f64,
    pub target_eps: f64,
    /// Increasing radii tried in turn; the first success is refined by
    /// bisection against its predecessor.
    pub radius_schedule: Vec<f64>,
    /// Increasing section sizes (initial segments of Λ).
    pub section_sizes: Vec<usize>,
    pub bisection_steps: usize,
}

impl Default for QfOptions {
    fn default() -> Self {
        QfOptions {
            q: 3.0,
            target_eps: 0.1,
            radius_schedule: (0..16).map(|j| 0.25 * 2f64.powi(j)).collect(),
            section_sizes: vec![25, 50, 100, 200],
            bisection_steps: 8,
        }
    }
}

impl QfOptions {
    fn validate(&self, n_lambdas: usize) -> Result<()> {
        if !(self.q > 2.0) || !self.q.is_finite() {
            return Err(Error::invalid(format!("q must exceed 2, got {}", self.q)));
        }
        if !(self.target_eps > 0.0) {
            return Err(Error::invalid("target_eps must be positive"));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|p| p[0] < p[1]);
        if self.radius_schedule.is_empty() || !increasing(&self.radius_schedule) || self.radius_schedule[0] <= 0.0 {
            return Err(Error::invalid("radius_schedule must be positive and increasing"));
        }
        if self.section_sizes.is_empty()
            || self.section_sizes.windows(2).any(|p| p[0] >= p[1])
            || self.section_sizes[0] == 0
        {
            return Err(Error::invalid("section_sizes must be positive and increasing"));
        }
        if *self.section_sizes.last().unwrap() > n_lambdas {
            return Err(Error::invalid(format!(
                "section size {} exceeds the {n_lambdas} available frequencies",
                self.section_sizes.last().unwrap()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfRow {
    pub f_id: String,
    pub q: f64,
    pub target_eps: f64,
    pub reached: bool,
    pub section_size: usize,
    pub radius: f64,
    pub achieved_error: f64,
    pub coeff_norm: f64,
    /// `‖c‖_q / ‖f‖_w`: the empirical `C(q)` for this function.
    pub ratio: f64,
    pub f_norm: f64,
    /// `[re, im]` per coefficient, aligned with the section's frequencies.
    pub coeffs: Vec<[f64; 2]>,
}

fn row(f_id: &str, opts: &QfOptions, section: usize, radius: f64, f_norm: f64, c: &[Complex64], err: f64) -> Result<QfRow> {
    let cn = lq_norm(c, opts.q)?;
    Ok(QfRow {
        f_id: f_id.to_string(),
        q: opts.q,
        target_eps: opts.target_eps,
        reached: err < opts.target_eps || (c.iter().all(|z| z.norm() == 0.0) && f_norm <= opts.target_eps),
        section_size: section,
        radius,
        achieved_error: err,
        coeff_norm: cn,
        ratio: cn / f_norm,
        f_norm,
        coeffs: c.iter().map(|z| [z.re, z.im]).collect(),
    })
}

/// Smallest error reachable on the section with unbounded coefficients.
fn least_squares_floor(sys: &SynthesisSystem, f: &SampledFunction, f_norm: f64) -> Result<f64> {
    let b = sys.rhs(f)?;
    let g = sys.gram().clone();
    let svd = g.svd(true, true);
    let cutoff = 1e-13 * svd.singular_values.max();
    let c: DVector<Complex64> = svd.solve(&b, cutoff).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((f_norm * f_norm - c.dotc(&b).re).max(0.0).sqrt())
}

/// Runs the radius schedule over each section in turn; `systems` must be
/// built on initial segments of Λ in increasing size.
pub fn qf_approximate_on(
    f: &SampledFunction,
    f_id: &str,
    systems: &[SynthesisSystem],
    opts: &QfOptions,
    cfg: &SolverConfig,
) -> Result<QfRow> {
    let w = systems
        .first()
        .ok_or_else(|| Error::invalid("no sections"))?
        .weight();
    let f_norm = norm_w(f, w)?;
    if (f_norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("f must be normalized in L²_w, has norm {f_norm}")));
    }
    if f_norm <= opts.target_eps {
        return row(f_id, opts, 0, 0.0, f_norm, &[], f_norm);
    }
    let mut best: Option<QfRow> = None;
    for sys in systems {
        let section = sys.freqs().len();
        let floor = least_squares_floor(sys, f, f_norm)?;
        if floor >= opts.target_eps {
            log::debug!("{f_id}: section {section} floor {floor:.4} ≥ target");
            let radius = *opts.radius_schedule.last().unwrap();
            let sol = constrained_lsq(sys, f, opts.q, radius, cfg)?;
            let r = row(f_id, opts, section, radius, f_norm, &sol.coeffs, sol.residual_norm)?;
            if best.as_ref().is_none_or(|b| r.achieved_error < b.achieved_error) {
                best = Some(r);
            }
            continue;
        }
        let mut lo = 0.0;
        for &radius in &opts.radius_schedule {
            let sol = constrained_lsq(sys, f, opts.q, radius, cfg)?;
            if sol.residual_norm < opts.target_eps {
                let mut hit = (radius, sol);
                let mut hi = radius;
                for _ in 0..opts.bisection_steps {
                    let mid = 0.5 * (lo + hi);
                    let s = constrained_lsq(sys, f, opts.q, mid, cfg)?;
                    if s.residual_norm < opts.target_eps {
                        hi = mid;
                        hit = (mid, s);
                    } else {
                        lo = mid;
                    }
                }
                return row(f_id, opts, section, hit.0, f_norm, &hit.1.coeffs, hit.1.residual_norm);
            }
            lo = radius;
            let r = row(f_id, opts, section, radius, f_norm, &sol.coeffs, sol.residual_norm)?;
            if best.as_ref().is_none_or(|b| r.achieved_error < b.achieved_error) {
                best = Some(r);
            }
        }
    }
    Ok(best.expect("at least one section is tried"))
}

pub fn section_systems(lambdas: &[f64], w: &WeightSamples, sizes: &[usize]) -> Result<Vec<SynthesisSystem>> {
    sizes
        .iter()
        .map(|&s| SynthesisSystem::new(lambdas[..s].to_vec(), w.clone()))
        .collect()
}

/// QF probe for one normalized `f`.
pub fn qf_approximate(
    f: &SampledFunction,
    f_id: &str,
    lambdas: &[f64],
    w: &WeightSamples,
    opts: &QfOptions,
    cfg: &SolverConfig,
) -> Result<QfRow> {
    opts.validate(lambdas.len())?;
    let systems = section_systems(lambdas, w, &opts.section_sizes)?;
    qf_approximate_on(f, f_id, &systems, opts, cfg)
}

/// Runs [`qf_approximate`] for every battery member, sharing the section
/// Gram matrices.
pub fn qf_battery(
    battery: &[TestFunction],
    lambdas: &[f64],
    w: &WeightSamples,
    opts: &QfOptions,
    cfg: &SolverConfig,
) -> Result<Vec<QfRow>> {
    opts.validate(lambdas.len())?;
    let systems = section_systems(lambdas, w, &opts.section_sizes)?;
    battery
        .iter()
        .map(|t| {
            let f = normalized(&t.sample(*w.grid()), w)?;
            qf_approximate_on(&f, &t.id(), &systems, opts, cfg)
        })
        .collect()
}

/// Recomputes a row's residual and coefficient norm from its stored
/// coefficients: `(residual, ‖c‖_q)`.
pub fn recheck_row(rowv: &QfRow, f: &SampledFunction, lambdas: &[f64], w: &WeightSamples) -> Result<(f64, f64)> {
    let c: Vec<Complex64> = rowv.coeffs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    let sys = SynthesisSystem::new(lambdas[..rowv.section_size].to_vec(), w.clone())?;
    Ok((sys.residual_norm(f, &c)?, lq_norm(&c, rowv.q)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRow {
    pub f_id: String,
    pub p: f64,
    pub section_size: usize,
    pub f_norm: f64,
    pub moments_lp: f64,
    /// `‖f‖_w / ‖(⟨f, e^{iλx}⟩_w)‖_{ℓ_p}`; `+∞` when every moment vanishes.
    #[serde(with = "crate::io::nonfinite")]
    pub ratio: f64,
}

pub fn dual_check(f: &SampledFunction, f_id: &str, lambdas: &[f64], w: &WeightSamples, p: f64) -> Result<DualRow> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::invalid(format!("p must lie in (1, 2), got {p}")));
    }
    let sys = SynthesisSystem::new(lambdas.to_vec(), w.clone())?;
    let b = sys.rhs(f)?;
    let f_norm = norm_w(f, w)?;
    let moments_lp = lq_norm(b.as_slice(), p)?;
    // |⟨f, e^{iλx}⟩_w| ≤ ‖f‖_w·√mass; far below that counts as zero.
    let scale = f_norm * w.mass().sqrt() * (lambdas.len() as f64).max(1.0);
    let ratio = if moments_lp <= 1e-12 * scale { f64::INFINITY } else { f_norm / moments_lp };
    Ok(DualRow { f_id: f_id.to_string(), p, section_size: lambdas.len(), f_norm, moments_lp, ratio })
}
