//! Sparse blocks `Q(x) = Σ_n b_n e^{iβ_n x} A(r_n x)` built from a measure
//! approximant `B` and a Menshov polynomial `A`, with `r_n = d(K+1)^{n-1}`.
//!
//! The plan fixes everything except `d`: `ξ = δ/2` for `B`,
//! `μ = δ / (2N·max(1, ‖B‖_{2+δ}))` for `A`, and `l = 1/(2+K)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{bad_set_measure, SampledFunction};
use crate::landau::{build_landau, LandauPlan};
use crate::menshov::{build_menshov, MenshovCertificate, MenshovOptions};
use crate::solver::SolverConfig;
use crate::trigpoly::{coeff_norm, concat_blocks, evaluate, modulate_dilate, TrigPoly};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockOptions {
    /// Largest term count for `B`.
    pub landau_n_cap: usize,
    pub menshov: MenshovOptions,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions {
            landau_n_cap: 64,
            menshov: MenshovOptions::default(),
        }
    }
}

/// Serializable part of a [`BlockPlan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlanRecord {
    pub delta: f64,
    pub f_id: String,
    pub interval: [f64; 2],
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mu: f64,
    pub l: f64,
    pub b_norm: f64,
    pub landau: LandauPlan,
    pub menshov: MenshovCertificate,
}

#[derive(Debug, Clone)]
pub struct BlockPlan {
    pub b: TrigPoly,
    pub a: TrigPoly,
    pub record: BlockPlanRecord,
}

/// `δ / (2N·max(1, ‖B‖_{2+δ}))`.
pub fn block_mu(delta: f64, n: usize, b_norm: f64) -> f64 {
    delta / (2.0 * n as f64 * b_norm.max(1.0))
}

/// `1 / (2 + K)`.
pub fn block_l(k: usize) -> f64 {
    1.0 / (2.0 + k as f64)
}

/// `r_n = d(K+1)^{n-1}` for `n = 1..=count`.
pub fn dilations(d: u64, k: usize, count: usize) -> Vec<f64> {
    let base = (k + 1) as f64;
    (0..count).map(|n| d as f64 * base.powi(n as i32)).collect()
}

pub fn plan_block(
    interval: (f64, f64),
    delta: f64,
    f: &SampledFunction,
    f_id: &str,
    opts: &BlockOptions,
    cfg: &SolverConfig,
) -> Result<BlockPlan> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let landau = build_landau(interval, 0.5 * delta, f, opts.landau_n_cap, cfg)?;
    let n = landau.poly.len();
    let b_norm = coeff_norm(&landau.poly, 2.0 + delta)?;
    let mu = block_mu(delta, n, b_norm);
    let menshov = build_menshov(interval, mu, &opts.menshov, cfg)?;
    let k = menshov.poly.len();
    Ok(BlockPlan {
        b: landau.poly,
        a: menshov.poly,
        record: BlockPlanRecord {
            delta,
            f_id: f_id.to_string(),
            interval: [interval.0, interval.1],
            k,
            n,
            mu,
            l: block_l(k),
            b_norm,
            landau: landau.plan,
            menshov: menshov.certificate,
        },
    })
}

#[derive(Debug, Clone)]
pub struct SparseBlock {
    pub q: TrigPoly,
    pub d: u64,
    pub r: Vec<f64>,
    /// `[min, max]` of each `J_n`.
    pub block_spectra: Vec<[f64; 2]>,
}

pub fn assemble_block(plan: &BlockPlan, d: u64) -> Result<SparseBlock> {
    if d == 0 {
        return Err(Error::invalid("d must be a positive integer"));
    }
    let k = plan.a.len();
    let r = dilations(d, k, plan.b.len());
    let pieces = plan
        .b
        .terms()
        .zip(&r)
        .map(|((beta, b), &rn)| modulate_dilate(&plan.a, rn, beta, b))
        .collect::<Result<Vec<_>>>()?;
    let block_spectra = pieces
        .iter()
        .filter_map(|p| Some([p.min_freq()?, p.max_freq()?]))
        .collect();
    let q = concat_blocks(&pieces)?;
    Ok(SparseBlock { q, d, r, block_spectra })
}

/// Measured values behind the four block conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConditions {
    pub delta: f64,
    pub q_norm: f64,
    pub a_norm: f64,
    pub b_norm: f64,
    /// `‖Q‖_{2+δ} < δ`.
    pub norm_ok: bool,
    #[serde(with = "crate::io::nonfinite")]
    pub lambda1: f64,
    pub d: u64,
    /// `λ₁ ≥ d`.
    pub start_ok: bool,
    #[serde(with = "crate::io::nonfinite")]
    pub min_ratio: f64,
    pub ratio_bound: f64,
    /// Every adjacent ratio exceeds `1 + l`.
    pub ratio_ok: bool,
    pub bad_measure: f64,
    /// One grid step of slack on the measure.
    pub measure_tolerance: f64,
    /// `m{x ∈ I : |f - Q| > δ} < δ`.
    pub measure_ok: bool,
    pub measure_f_b: f64,
    pub measure_b_q: f64,
    /// `m{|f-Q|>δ} ≤ m{|f-B|>δ/2} + m{|B-Q|>δ/2}`.
    pub cascade_holds: bool,
}

impl BlockConditions {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.norm_ok {
            out.push(format!("coefficient norm {:.6e} ≥ delta {}", self.q_norm, self.delta));
        }
        if !self.start_ok {
            out.push(format!("first frequency {} < d {}", self.lambda1, self.d));
        }
        if !self.ratio_ok {
            out.push(format!("min ratio {:.9} ≤ {:.9}", self.min_ratio, self.ratio_bound));
        }
        if !self.measure_ok {
            out.push(format!("bad-set measure {:.6} ≥ delta {}", self.bad_measure, self.delta));
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.norm_ok && self.start_ok && self.ratio_ok && self.measure_ok
    }

    pub fn into_result(self) -> Result<Self> {
        if self.all_pass() {
            Ok(self)
        } else {
            Err(Error::ConditionFailure(self.failures().join("; ")))
        }
    }
}

/// Smallest `λ_{m+1}/λ_m` over the polynomial's frequency list, or `+∞`
/// for fewer than two terms.
pub fn min_adjacent_ratio(freqs: &[f64]) -> f64 {
    freqs
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::INFINITY, f64::min)
}

pub fn check_block(plan: &BlockPlan, block: &SparseBlock, f: &SampledFunction) -> Result<BlockConditions> {
    let delta = plan.record.delta;
    let q = 2.0 + delta;
    let grid = f.grid();
    let interval = (plan.record.interval[0], plan.record.interval[1]);
    let q_norm = coeff_norm(&block.q, q)?;
    let lambda1 = block.q.min_freq().unwrap_or(f64::INFINITY);
    let ratio_bound = 1.0 + plan.record.l;
    let min_ratio = min_adjacent_ratio(block.q.freqs());
    let qv = evaluate(&block.q, grid);
    let bv = evaluate(&plan.b, grid);
    let bad_measure = bad_set_measure(f, &qv, delta, interval)?;
    let measure_f_b = bad_set_measure(f, &bv, 0.5 * delta, interval)?;
    let measure_b_q = bad_set_measure(&bv, &qv, 0.5 * delta, interval)?;
    let tol = grid.step();
    Ok(BlockConditions {
        delta,
        q_norm,
        a_norm: coeff_norm(&plan.a, q)?,
        b_norm: coeff_norm(&plan.b, q)?,
        norm_ok: q_norm < delta,
        lambda1,
        d: block.d,
        start_ok: lambda1 >= block.d as f64,
        min_ratio,
        ratio_bound,
        ratio_ok: min_ratio > ratio_bound,
        bad_measure,
        measure_tolerance: tol,
        measure_ok: bad_measure < delta + tol,
        measure_f_b,
        measure_b_q,
        cascade_holds: bad_measure <= measure_f_b + measure_b_q,
    })
}

/// Coefficients of `Q` grouped per `J_n`, for the multiplicativity identity
/// `‖Q‖_q^q = Σ_n |b_n|^q ‖A‖_q^q`.
pub fn block_norm_identity(plan: &BlockPlan, block: &SparseBlock, q: f64) -> Result<(f64, f64)> {
    let lhs = coeff_norm(&block.q, q)?.powf(q);
    let a = coeff_norm(&plan.a, q)?.powf(q);
    let rhs: f64 = plan.b.coeffs().iter().map(|b: &Complex64| b.norm().powf(q) * a).sum();
    Ok((lhs, rhs))
}
