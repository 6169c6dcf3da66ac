//! Numerical checks on a constructed `(Λ, w, g)`: Gram-section Bessel and
//! frame probes, ℓ_q-bounded approximation, the dual inequality, lacunary
//! incompleteness, lower density and generator decay.

pub mod eig;
mod gram;
mod probes;
mod qf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gram::{
    bessel_bound, bessel_monotonicity, frame_failure_probe, gram_matrix, gram_sections, BesselRow, FrameRow,
    GramSection, MonotonicityRow, EIG_MAX_ITER, EIG_TOLERANCE,
};
pub use probes::{
    generator_decay_report, hadamard_probe, hadamard_residual, lower_density, DecayRow, DensityEstimate, DensityRow,
    HadamardRow,
};
pub use qf::{
    default_battery, dual_check, normalized, qf_approximate, qf_approximate_on, qf_battery, recheck_row,
    section_systems, DualRow, QfOptions, QfRow, TestFunction,
};

use crate::construction::{eta, exceptional_mask, realize_weight, Artifact, StepWeight};
use crate::error::{Error, Result};
use crate::grid::{make_base_weight, norm_w, WeightSamples};
use crate::solver::SolverConfig;
use crate::trigpoly::evaluate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bessel,
    Qf,
    Dual,
    Frame,
    Hadamard,
    Density,
    Decay,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Bessel,
        Suite::Qf,
        Suite::Dual,
        Suite::Frame,
        Suite::Hadamard,
        Suite::Density,
        Suite::Decay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bessel => "bessel",
            Suite::Qf => "qf",
            Suite::Dual => "dual",
            Suite::Frame => "frame",
            Suite::Hadamard => "hadamard",
            Suite::Density => "density",
            Suite::Decay => "decay",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses one suite name, or `all`.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(part.trim().parse()?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}; expected one of bessel, qf, dual, frame, hadamard, density, decay, all")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub section_sizes: Vec<usize>,
    pub qf: QfOptions,
    pub dual_p: f64,
    pub battery: Vec<TestFunction>,
    pub hadamard_ratio: f64,
    pub hadamard_counts: Vec<usize>,
    /// Window lengths; empty means `10, 100, 1000, λ_max/4` (those that fit).
    pub density_windows: Vec<f64>,
    /// Radii as fractions of the dual grid's half width.
    pub decay_fractions: Vec<f64>,
    pub solver: SolverConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            section_sizes: vec![10, 25, 50, 100, 200],
            qf: QfOptions::default(),
            dual_p: 1.5,
            battery: default_battery(),
            hadamard_ratio: 2.0,
            hadamard_counts: vec![0, 10, 20, 30, 40, 50, 60],
            density_windows: Vec::new(),
            decay_fractions: vec![0.0, 0.125, 0.25, 0.5, 1.0],
            solver: SolverConfig { max_iterations: 5000, tolerance: 1e-9, ..SolverConfig::default() },
        }
    }
}

/// One assertable invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecheck {
    pub k: usize,
    #[serde(with = "crate::io::nonfinite")]
    pub eta_stored: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub eta_recomputed: f64,
    pub eta_rel_err: f64,
    pub err_w: f64,
    /// `‖f_k - Q_k‖_{L²_w} < 1/k`.
    pub error_ok: bool,
    pub complement_measure: f64,
    /// `m{[-k, k] \ E_k} < δ_k`.
    pub exceptional_ok: bool,
}

/// Per-step data rebuilt from the serialized `Q_k`, `f_k` and configuration.
pub fn rebuild_steps(art: &Artifact) -> Result<(WeightSamples, Vec<StepWeight>)> {
    let (v, _) = make_base_weight(&art.grid, art.config.support_halfwidth)?;
    let appended: Vec<_> = art.steps.iter().filter(|s| s.appended).collect();
    let mut out = Vec::new();
    for ((s, q), f) in appended.iter().zip(&art.q).zip(&art.f) {
        let qv = evaluate(q, &art.grid);
        let err_v = norm_w(&f.sub(&qv)?, &v)?;
        out.push(StepWeight {
            k: s.k,
            delta: s.delta,
            eta: eta(s.k, err_v),
            e_mask: exceptional_mask(f, &qv, s.k, s.delta),
            q: q.clone(),
            f: f.clone(),
        });
    }
    Ok((v, out))
}

/// `[v, w_1, …, w_K]`: the base weight and the weight after each step.
pub fn nested_weights(v: &WeightSamples, steps: &[StepWeight]) -> Result<Vec<WeightSamples>> {
    (0..=steps.len()).map(|j| realize_weight(v, &steps[..j])).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn recheck_steps(art: &Artifact, steps: &[StepWeight]) -> Result<Vec<StepRecheck>> {
    let stored: Vec<_> = art.steps.iter().filter(|s| s.appended).collect();
    let step = art.grid.step();
    steps
        .iter()
        .zip(stored)
        .map(|(s, r)| {
            let err_w = norm_w(&s.f.sub(&evaluate(&s.q, &art.grid))?, &art.w)?;
            let range = art.grid.index_range(-(s.k as f64), s.k as f64);
            let complement = range.filter(|&j| !s.e_mask[j]).count() as f64 * step;
            Ok(StepRecheck {
                k: s.k,
                eta_stored: r.eta,
                eta_recomputed: s.eta,
                eta_rel_err: rel(r.eta, s.eta),
                err_w,
                error_ok: err_w < 1.0 / s.k as f64,
                complement_measure: complement,
                exceptional_ok: complement < s.delta,
            })
        })
        .collect()
}

/// Dual ratio against the ℓ_q radius that achieved the target on the same
/// section; reported, not asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub f_id: String,
    pub section_size: usize,
    pub p: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub dual_ratio: f64,
    pub radius_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<Suite>,
    pub checks: Vec<Check>,
    pub steps: Vec<StepRecheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bessel: Option<Vec<BesselRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<Vec<MonotonicityRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<FrameRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qf: Option<Vec<QfRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<DualRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<Vec<DualityRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hadamard: Option<Vec<HadamardRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<Vec<DecayRow>>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn fitting_sizes(sizes: &[usize], n: usize) -> Vec<usize> {
    sizes.iter().copied().filter(|&s| s > 0 && s <= n).collect()
}

/// Artifact integrity checks followed by the requested suites.
pub fn run_verify(art: &Artifact, suites: &[Suite], opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rep = VerifyReport { suites: suites.to_vec(), ..VerifyReport::default() };
    let lambdas = &art.lambdas;
    let w = &art.w;

    let violation = lambdas
        .windows(2)
        .zip(&art.epsilons)
        .position(|(p, e)| !(p[1] / p[0] > 1.0 + e));
    rep.checks.push(Check::new(
        "sparsity",
        violation.is_none(),
        match violation {
            None => format!("{} ratios exceed 1 + eps", lambdas.len().saturating_sub(1)),
            Some(i) => format!("ratio {} fails at n = {}", lambdas[i + 1] / lambdas[i], i + 1),
        },
    ));
    let (v, steps) = rebuild_steps(art)?;
    let nested = nested_weights(&v, &steps)?;
    let sandwich = w.values().iter().zip(v.values()).all(|(a, b)| *a > 0.0 && a <= b);
    rep.checks.push(Check::new("weight_sandwich", sandwich, "0 < w <= v at every grid point"));
    let rebuilt = nested.last().expect("base weight is always present");
    let w_err = rebuilt
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| rel(*a, *b))
        .fold(0.0, f64::max);
    rep.checks.push(Check::new("weight_rebuild", w_err <= 1e-12, format!("max relative error {w_err:.3e}")));
    rep.steps = recheck_steps(art, &steps)?;
    let eta_err = rep.steps.iter().map(|s| s.eta_rel_err).fold(0.0, f64::max);
    rep.checks.push(Check::new("eta_rebuild", eta_err <= 1e-12, format!("max relative error {eta_err:.3e}")));
    let error_ok = rep.steps.iter().all(|s| s.error_ok);
    rep.checks.push(Check::new(
        "per_step_error",
        error_ok,
        rep.steps
            .iter()
            .map(|s| format!("k={}: {:.4e}", s.k, s.err_w))
            .collect::<Vec<_>>()
            .join(", "),
    ));

    let sizes = fitting_sizes(&opts.section_sizes, lambdas.len());
    for &suite in suites {
        log::info!("verify: running {suite}");
        match suite {
            Suite::Bessel => {
                if sizes.is_empty() {
                    rep.bessel = Some(Vec::new());
                    continue;
                }
                rep.bessel = Some(bessel_bound(lambdas, w, &sizes)?);
                let mono = bessel_monotonicity(lambdas, &nested, &sizes)?;
                let ok = mono.iter().all(|r| r.holds);
                rep.checks.push(Check::new("bessel_monotonicity", ok, format!("{} nested pairs", mono.len())));
                rep.monotonicity = Some(mono);
            }
            Suite::Frame => {
                let rows = if sizes.is_empty() { Vec::new() } else { frame_failure_probe(lambdas, w, &sizes)? };
                let psd = rows.iter().all(|r| r.min_eig >= -1e-8 * r.max_eig);
                rep.checks.push(Check::new("gram_psd", psd, "min_eig >= -1e-8 max_eig on every section"));
                rep.frame = Some(rows);
            }
            Suite::Qf => {
                let mut qopts = opts.qf.clone();
                qopts.section_sizes = fitting_sizes(&qopts.section_sizes, lambdas.len());
                if qopts.section_sizes.is_empty() {
                    rep.qf = Some(Vec::new());
                    continue;
                }
                let rows = qf_battery(&opts.battery, lambdas, w, &qopts, &opts.solver)?;
                let mut worst = 0.0f64;
                let mut ok = true;
                for (row, t) in rows.iter().zip(&opts.battery) {
                    if row.section_size == 0 {
                        continue;
                    }
                    let f = normalized(&t.sample(art.grid), w)?;
                    let (res, cn) = recheck_row(row, &f, lambdas, w)?;
                    worst = worst.max((res - row.achieved_error).abs());
                    ok &= cn <= row.radius * (1.0 + 1e-9) && (res - row.achieved_error).abs() <= 1e-9;
                }
                rep.checks.push(Check::new("qf_feasibility", ok, format!("max residual mismatch {worst:.3e}")));
                rep.qf = Some(rows);
            }
            Suite::Dual => {
                if lambdas.is_empty() {
                    rep.dual = Some(Vec::new());
                    continue;
                }
                let section = &lambdas[..sizes.last().copied().unwrap_or(lambdas.len())];
                let rows = opts
                    .battery
                    .iter()
                    .map(|t| {
                        let f = normalized(&t.sample(art.grid), w)?;
                        dual_check(&f, &t.id(), section, w, opts.dual_p)
                    })
                    .collect::<Result<Vec<_>>>()?;
                rep.dual = Some(rows);
            }
            Suite::Hadamard => {
                let f = normalized(
                    &TestFunction::Bump { center: 0.0, width: 1.0, omega: 0.0 }.sample(art.grid),
                    w,
                )?;
                rep.hadamard = Some(hadamard_probe(opts.hadamard_ratio, &f, w, &opts.hadamard_counts)?);
            }
            Suite::Density => {
                if lambdas.len() < 2 {
                    rep.density = Some(DensityEstimate { rows: Vec::new() });
                    continue;
                }
                let span = lambdas[lambdas.len() - 1] - lambdas[0];
                let windows: Vec<f64> = if opts.density_windows.is_empty() {
                    [10.0, 100.0, 1000.0, lambdas[lambdas.len() - 1] / 4.0]
                        .into_iter()
                        .filter(|&x| x <= span)
                        .collect()
                } else {
                    opts.density_windows.clone()
                };
                rep.density = Some(lower_density(lambdas, &windows)?);
            }
            Suite::Decay => {
                let half = art.g.grid().half_width();
                let radii: Vec<f64> = opts.decay_fractions.iter().map(|f| f * half).collect();
                let rows = generator_decay_report(&art.g, &radii);
                let sorted = radii.windows(2).all(|p| p[0] <= p[1]);
                let mono = rows.windows(2).all(|p| p[1].mass >= p[0].mass);
                rep.checks.push(Check::new("decay_monotone", !sorted || mono, "windowed mass nondecreasing in R"));
                rep.decay = Some(rows);
            }
        }
    }
    if let (Some(qf), Some(_)) = (&rep.qf, &rep.dual) {
        // ‖f‖(1 - ε) ≤ ‖c‖_q·‖(⟨f, e^{iλx}⟩)‖_p for conjugate exponents, on
        // the section where the approximation succeeded.
        let mut rows = Vec::new();
        for (row, t) in qf.iter().zip(&opts.battery) {
            if !row.reached || row.section_size == 0 {
                continue;
            }
            let p = row.q / (row.q - 1.0);
            let f = normalized(&t.sample(art.grid), w)?;
            let d = dual_check(&f, &row.f_id, &lambdas[..row.section_size], w, p)?;
            let bound = row.radius / (1.0 - row.achieved_error);
            rows.push(DualityRow {
                f_id: row.f_id.clone(),
                section_size: row.section_size,
                p,
                dual_ratio: d.ratio,
                radius_bound: bound,
                holds: d.ratio <= bound * (1.0 + 1e-6),
            });
        }
        rep.duality = Some(rows);
    }
    Ok(rep)
}
