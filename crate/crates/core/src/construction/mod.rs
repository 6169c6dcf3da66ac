//! The inductive construction of the spectrum Λ, the weight `w ≤ v` and the
//! generator `g = (√w)^`.
//!
//! Step `k` plans a block for `f_k` on `I_k ⊇ [-k, k]` with `δ_k = 2^{-k}`,
//! pads Λ with filler frequencies until the sparsity budget `ε_n` drops
//! below the block's `l_k`, places the block with the smallest admissible
//! `d_k`, and records the set `E_k` where `|f_k - Q_k| < δ_k` together with
//! the damping factor `η_k = (2k‖f_k - Q_k‖_{L²_v})^{-2}`.

mod artifact;
mod generator;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use artifact::{load_artifact, write_artifact, Artifact, ARTIFACT_VERSION};
pub use generator::{
    compute_generator, inner_products_both_sides, transform, u_w, unitary_transfer_check, Generator,
};

use crate::block::{assemble_block, check_block, plan_block, BlockConditions, BlockOptions, BlockPlanRecord};
use crate::error::{Error, Result};
use crate::grid::{make_base_weight, make_grid, norm_w, Grid, SampledFunction, WeightSamples};
use crate::menshov::MenshovOptions;
use crate::solver::SolverConfig;
use crate::trigpoly::{evaluate, TrigPoly};

/// Multiplicative margin of the filler rule.
pub const FILLER_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonProfile {
    /// `ε_n = c / log(n + 2)`.
    Log { c: f64 },
    /// `ε_n = value`; not decreasing, for exercising the filler rule.
    Constant { value: f64 },
}

impl EpsilonProfile {
    /// `ε_n` for the 1-based index `n`.
    pub fn eps(&self, n: usize) -> f64 {
        match *self {
            EpsilonProfile::Log { c } => c / ((n + 2) as f64).ln(),
            EpsilonProfile::Constant { value } => value,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonProfile::Log { c } => c > 0.0 && c.is_finite(),
            EpsilonProfile::Constant { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("epsilon profile needs a positive finite constant"))
        }
    }
}

/// One member of the target family; step `k` uses it on `[-k, k]` as
/// `s(x)·cos²(πx/2k)·e^{iωx}`, with `s = sign` for `sign_bump` and 1
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyMember {
    Bump { omega: f64 },
    SignBump { omega: f64 },
}

impl FamilyMember {
    pub fn id(&self) -> String {
        match self {
            FamilyMember::Bump { omega } => format!("bump(omega={omega})"),
            FamilyMember::SignBump { omega } => format!("sign_bump(omega={omega})"),
        }
    }

    pub fn eval(&self, x: f64, k: f64) -> Complex64 {
        if x.abs() >= k {
            return Complex64::new(0.0, 0.0);
        }
        let c = (0.5 * PI * x / k).cos();
        let (s, omega) = match *self {
            FamilyMember::Bump { omega } => (1.0, omega),
            FamilyMember::SignBump { omega } => (x.signum(), omega),
        };
        Complex64::from_polar(s * c * c, omega * x)
    }

    pub fn sample(&self, grid: Grid, k: usize) -> SampledFunction {
        SampledFunction::from_fn(grid, |x| self.eval(x, k as f64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `T / π` for the interval `[-T, T]`.
    pub half_width_over_pi: f64,
    pub points_per_unit: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_width_over_pi: 64.0,
            points_per_unit: 32,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        make_grid(self.half_width_over_pi * PI, self.points_per_unit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    /// Record the failed conditions and keep the block.
    Continue,
    /// Stop before appending the failed block.
    Halt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructionConfig {
    pub epsilon: EpsilonProfile,
    pub family: Vec<FamilyMember>,
    pub steps: usize,
    pub grid: GridConfig,
    /// Half-width `a` of the support of `(√v)^`.
    pub support_halfwidth: f64,
    /// Minimal gap δ₀ between consecutive frequencies.
    pub min_separation: f64,
    /// First filler frequency.
    pub lambda_start: f64,
    /// After the last step, fillers continue until Λ has this many terms.
    pub tail_len: usize,
    pub block: BlockOptions,
    pub on_failure: FailurePolicy,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            epsilon: EpsilonProfile::Log { c: 0.2 },
            family: vec![
                FamilyMember::Bump { omega: 0.7 },
                FamilyMember::SignBump { omega: 0.0 },
                FamilyMember::Bump { omega: -1.3 },
                FamilyMember::SignBump { omega: 0.4 },
            ],
            steps: 4,
            grid: GridConfig::default(),
            support_halfwidth: 1.0,
            min_separation: 2.0,
            lambda_start: 2.0,
            tail_len: 200,
            block: BlockOptions {
                landau_n_cap: 2,
                menshov: MenshovOptions {
                    k_start: 1,
                    k_max: 8,
                    gamma_start: 1.0,
                    gamma_max: 4096.0,
                },
            },
            on_failure: FailurePolicy::Continue,
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<()> {
        self.epsilon.validate()?;
        if self.family.len() < self.steps {
            return Err(Error::invalid(format!(
                "{} steps need at least as many family members, got {}",
                self.steps,
                self.family.len()
            )));
        }
        if !(self.support_halfwidth > 0.0) {
            return Err(Error::invalid("support_halfwidth must be positive"));
        }
        if !(self.min_separation > 1.0) {
            return Err(Error::invalid("min_separation must exceed 1"));
        }
        if !(self.lambda_start > 0.0) {
            return Err(Error::invalid("lambda_start must be positive"));
        }
        let grid = self.grid.build()?;
        let reach = step_interval(self.steps.max(1)).1;
        if reach > grid.half_width() {
            return Err(Error::invalid(format!(
                "grid half width {} does not cover the last step's interval [-{reach}, {reach}]",
                grid.half_width()
            )));
        }
        Ok(())
    }
}

/// `I_k = [-πs, πs]` with `s = ⌈k/π⌉`: the smallest whole number of periods
/// covering `[-k, k]`.
pub fn step_interval(k: usize) -> (f64, f64) {
    let s = (k as f64 / PI).ceil().max(1.0);
    (-PI * s, PI * s)
}

/// `max(λ(1+ε), λ+δ₀)·(1 + 10⁻⁶)`.
pub fn next_filler(lambda: f64, eps: f64, min_sep: f64) -> f64 {
    (lambda * (1.0 + eps)).max(lambda + min_sep) * (1.0 + FILLER_MARGIN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeq {
    pub lambdas: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Smallest gap between consecutive terms (`+∞` below two terms).
    #[serde(with = "crate::io::nonfinite")]
    pub separation: f64,
}

impl SpectrumSeq {
    /// First index (0-based) where `λ_{n+1}/λ_n > 1 + ε_n` fails.
    pub fn first_sparsity_violation(&self) -> Option<usize> {
        self.lambdas
            .windows(2)
            .zip(&self.epsilons)
            .position(|(w, e)| !(w[1] / w[0] > 1.0 + e))
    }
}

fn separation(lambdas: &[f64]) -> f64 {
    lambdas.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
pub struct StepWeight {
    pub k: usize,
    pub delta: f64,
    pub eta: f64,
    /// `E_k` as a mask over grid points.
    pub e_mask: Vec<bool>,
    pub q: TrigPoly,
    pub f: SampledFunction,
}

#[derive(Debug, Clone)]
pub struct WeightModel {
    pub v: WeightSamples,
    /// `(√v)^` sampled on the dual grid.
    pub h: SampledFunction,
    pub steps: Vec<StepWeight>,
    pub w: WeightSamples,
}

impl WeightModel {
    /// `v·min(1, inf_{j ≤ upto} (1 on E_j, η_j off E_j))`.
    pub fn partial_weight(&self, upto: usize) -> Result<WeightSamples> {
        realize_weight(&self.v, &self.steps[..upto.min(self.steps.len())])
    }
}

/// Factor by which step `s` damps the base weight at grid point `j`.
fn damping(s: &StepWeight, j: usize) -> f64 {
    if s.e_mask[j] {
        1.0
    } else {
        s.eta
    }
}

pub fn realize_weight(v: &WeightSamples, steps: &[StepWeight]) -> Result<WeightSamples> {
    let values = v
        .values()
        .iter()
        .enumerate()
        .map(|(j, vj)| {
            let f = steps.iter().map(|s| damping(s, j)).fold(1.0, f64::min);
            vj * f
        })
        .collect();
    WeightSamples::new(*v.grid(), values)
}

/// `(2k‖f_k - Q_k‖_{L²_v})^{-2}`; `+∞` for an exact fit.
pub fn eta(k: usize, err_v: f64) -> f64 {
    let s = 2.0 * k as f64 * err_v;
    if s == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (s * s)
    }
}

/// `E_k = {x_j ∈ [-k, k] : |f_k - Q_k| < δ_k}`.
pub fn exceptional_mask(f: &SampledFunction, q: &SampledFunction, k: usize, delta: f64) -> Vec<bool> {
    let grid = f.grid();
    let range = grid.index_range(-(k as f64), k as f64);
    f.values()
        .iter()
        .zip(q.values())
        .enumerate()
        .map(|(j, (a, b))| range.contains(&j) && (a - b).norm() < delta)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub k: usize,
    pub delta: f64,
    pub f_id: String,
    pub interval: [f64; 2],
    pub l: f64,
    /// 1-based index of the first block frequency.
    pub n_k: usize,
    pub fillers: usize,
    pub d: u64,
    pub plan: BlockPlanRecord,
    pub conditions: BlockConditions,
    pub failures: Vec<String>,
    /// Number of nonzero terms appended to Λ.
    pub spec_len: usize,
    pub err_v: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub eta: f64,
    /// `m{[-k, k] \ E_k}` and whether it is `< δ_k`.
    pub complement_measure: f64,
    pub exceptional_ok: bool,
    /// `‖f_k - Q_k‖_{L²_w}` with the final weight, and whether it is `< 1/k`.
    #[serde(with = "crate::io::nonfinite")]
    pub err_w: f64,
    pub error_ok: bool,
    /// Right side of `‖f_k - Q_k‖²_w ≤ δ_k²∫_{E_k}v + η_k∫_{off E_k}|f_k-Q_k|²v`.
    #[serde(with = "crate::io::nonfinite")]
    pub error_bound: f64,
    pub appended: bool,
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub config: ConstructionConfig,
    pub grid: Grid,
    pub spectrum: SpectrumSeq,
    pub weight: WeightModel,
    pub generator: Generator,
    pub steps: Vec<StepReport>,
    /// Step at which a `halt` policy stopped the induction.
    pub halted_at: Option<usize>,
}

/// Smallest positive integer `d` with `d/λ > 1 + ε` and
/// `β₁ + d ≥ λ + δ₀`.
pub fn smallest_d(lambda_prev: Option<(f64, f64)>, beta1: f64, min_sep: f64) -> u64 {
    let Some((lam, eps)) = lambda_prev else {
        return 1;
    };
    let mut d = ((lam * (1.0 + eps)).floor() as u64).max(1);
    while !(d as f64 / lam > 1.0 + eps) || beta1 + (d as f64) < lam + min_sep {
        d += 1;
    }
    d
}

pub fn run_construction(config: &ConstructionConfig, cfg: &SolverConfig) -> Result<Construction> {
    config.validate()?;
    cfg.validate()?;
    let grid = config.grid.build()?;
    let (v, h) = make_base_weight(&grid, config.support_halfwidth)?;
    let eps = |n: usize| config.epsilon.eps(n);
    let mut lambdas: Vec<f64> = Vec::new();
    let mut steps_w: Vec<StepWeight> = Vec::new();
    let mut reports: Vec<StepReport> = Vec::new();
    let mut halted_at = None;

    let push_filler = |lambdas: &mut Vec<f64>| {
        let next = match lambdas.last() {
            None => config.lambda_start,
            Some(&l) => next_filler(l, eps(lambdas.len()), config.min_separation),
        };
        lambdas.push(next);
    };

    for k in 1..=config.steps {
        let delta = 0.5f64.powi(k as i32);
        let member = &config.family[k - 1];
        let f = member.sample(grid, k);
        let interval = step_interval(k);
        let plan = plan_block(interval, delta, &f, &member.id(), &config.block, cfg)?;
        let l = plan.record.l;

        let start = lambdas.len() + 1;
        let mut n_k = start;
        while !(eps(n_k) < l) {
            n_k += 1;
            if n_k > start + 10_000_000 {
                return Err(Error::StepFailure {
                    step: k,
                    reason: format!("epsilon never drops below l = {l}"),
                });
            }
        }
        let mut trial = lambdas.clone();
        while trial.len() + 1 < n_k {
            push_filler(&mut trial);
        }
        let fillers = trial.len() - lambdas.len();
        let prev = trial.last().map(|&lam| (lam, eps(trial.len())));
        let beta1 = plan.b.freqs()[0];
        let d = smallest_d(prev, beta1, config.min_separation);
        let block = assemble_block(&plan, d)?;
        let conditions = check_block(&plan, &block, &f)?;
        let failures = conditions.failures();
        let spec = block.q.spectrum();
        let qv = evaluate(&block.q, &grid);
        let err_v = norm_w(&f.sub(&qv)?, &v)?;
        let e_mask = exceptional_mask(&f, &qv, k, delta);
        let in_range = grid.index_range(-(k as f64), k as f64);
        let complement = in_range.clone().filter(|&j| !e_mask[j]).count() as f64 * grid.step();

        let halt = !failures.is_empty() && config.on_failure == FailurePolicy::Halt;
        if !failures.is_empty() {
            log::warn!("step {k}: {}", failures.join("; "));
        }
        let appended = !halt;
        if appended {
            lambdas = trial;
            lambdas.extend_from_slice(spec.freqs());
            steps_w.push(StepWeight {
                k,
                delta,
                eta: eta(k, err_v),
                e_mask,
                q: block.q.clone(),
                f: f.clone(),
            });
        }
        reports.push(StepReport {
            k,
            delta,
            f_id: member.id(),
            interval: [interval.0, interval.1],
            l,
            n_k,
            fillers,
            d,
            plan: plan.record,
            conditions,
            failures,
            spec_len: spec.len(),
            err_v,
            eta: eta(k, err_v),
            complement_measure: complement,
            exceptional_ok: complement < delta,
            err_w: f64::NAN,
            error_ok: false,
            error_bound: f64::NAN,
            appended,
        });
        if halt {
            halted_at = Some(k);
            break;
        }
    }
    if !reports.is_empty() && halted_at.is_none() {
        while lambdas.len() < config.tail_len {
            push_filler(&mut lambdas);
        }
    }

    let w = realize_weight(&v, &steps_w)?;
    for (r, s) in reports.iter_mut().filter(|r| r.appended).zip(&steps_w) {
        let diff = s.f.sub(&evaluate(&s.q, &grid))?;
        r.err_w = norm_w(&diff, &w)?;
        r.error_ok = r.err_w < 1.0 / s.k as f64;
        let step = grid.step();
        let bound: f64 = diff
            .values()
            .iter()
            .zip(v.values())
            .enumerate()
            .map(|(j, (z, vj))| {
                if s.e_mask[j] {
                    s.delta * s.delta * vj
                } else {
                    s.eta.min(1.0) * z.norm_sqr() * vj
                }
            })
            .sum::<f64>()
            * step;
        r.error_bound = bound;
    }

    let epsilons: Vec<f64> = (1..=lambdas.len()).map(eps).collect();
    let spectrum = SpectrumSeq {
        separation: separation(&lambdas),
        lambdas,
        epsilons,
    };
    let generator = compute_generator(&w);
    Ok(Construction {
        config: config.clone(),
        grid,
        spectrum,
        weight: WeightModel { v, h, steps: steps_w, w },
        generator,
        steps: reports,
        halted_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(steps: usize) -> ConstructionConfig {
        ConstructionConfig {
            steps,
            grid: GridConfig { half_width_over_pi: 8.0, points_per_unit: 16 },
            tail_len: 60,
            ..ConstructionConfig::default()
        }
    }

    fn quick_solver() -> SolverConfig {
        SolverConfig { max_iterations: 30, tolerance: 1e-6, ..SolverConfig::default() }
    }

    #[test]
    fn zero_steps_is_the_base_case() {
        let c = run_construction(&small_config(0), &quick_solver()).unwrap();
        assert!(c.spectrum.lambdas.is_empty());
        assert_eq!(c.weight.w, c.weight.v);
        let diff = c.generator.g.sub(&c.weight.h).unwrap();
        assert!(diff.norm_l2() < 1e-2 * c.weight.h.norm_l2());
    }

    #[test]
    fn constant_profile_fillers() {
        let mut lam = vec![2.0];
        for _ in 0..20 {
            let l = *lam.last().unwrap();
            lam.push(next_filler(l, 0.5, 2.0));
        }
        assert!(lam.windows(2).all(|w| w[1] / w[0] >= 1.5000001 * (1.0 - 1e-15)));
        assert!(lam.windows(2).all(|w| w[1] - w[0] >= 2.0));
    }

    #[test]
    fn smallest_d_rules() {
        assert_eq!(smallest_d(None, 1.1, 2.0), 1);
        // 10·1.1 = 11 is not strictly exceeded by 11.
        assert_eq!(smallest_d(Some((10.0, 0.1)), 1.5, 2.0), 12);
        // Separation can force a larger d.
        assert_eq!(smallest_d(Some((2.0, 0.01)), 1.0, 2.0), 3);
    }

    #[test]
    fn step_intervals_cover_support() {
        for k in 1..10 {
            let (lo, hi) = step_interval(k);
            assert!(lo <= -(k as f64) && hi >= k as f64);
            assert!(((hi - lo) / (2.0 * PI)).fract().abs() < 1e-12);
        }
    }

    #[test]
    fn two_steps_sparsity_and_weight() {
        let c = run_construction(&small_config(2), &quick_solver()).unwrap();
        assert_eq!(c.steps.len(), 2);
        assert_eq!(c.spectrum.first_sparsity_violation(), None);
        assert!(c.spectrum.separation >= 2.0);
        assert!(c.spectrum.lambdas.len() >= 60);
        let (v, w) = (c.weight.v.values(), c.weight.w.values());
        assert!(w.iter().zip(v).all(|(a, b)| *a > 0.0 && a <= b));
        for r in &c.steps {
            assert!(r.error_ok, "step {}: {} vs {}", r.k, r.err_w, 1.0 / r.k as f64);
            assert!(r.err_w * r.err_w <= r.error_bound * (1.0 + 1e-12));
            assert!(r.conditions.start_ok && r.conditions.ratio_ok);
        }
        // Points inside every E_k keep the base weight.
        for j in 0..c.grid.n_points() {
            if c.weight.steps.iter().all(|s| s.e_mask[j]) {
                assert_eq!(w[j], v[j]);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn fillers_respect_ratio_and_gap(
            start in 1.0f64..1e6,
            eps in proptest::collection::vec(1e-4f64..1.0, 1..50),
            sep in 0.0f64..10.0,
        ) {
            let mut lam = start;
            for e in eps {
                let next = next_filler(lam, e, sep);
                proptest::prop_assert!(next / lam > 1.0 + e);
                proptest::prop_assert!(next - lam >= sep);
                lam = next;
            }
        }
    }
}
