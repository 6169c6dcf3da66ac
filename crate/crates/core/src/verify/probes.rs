//! Lacunary incompleteness, lower density and generator decay diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_w, SampledFunction, WeightSamples};

/// Residual of the unconstrained weighted least-squares fit of `f` by
/// `e^{i c^n x}`, `n = 1..=count`.
pub fn hadamard_residual(c_ratio: f64, f: &SampledFunction, w: &WeightSamples, count: usize) -> Result<f64> {
    if !(c_ratio > 1.0) {
        return Err(Error::invalid(format!("c_ratio must exceed 1, got {c_ratio}")));
    }
    f.grid().same_as(w.grid())?;
    if count == 0 {
        return norm_w(f, w);
    }
    let grid = w.grid();
    let step = grid.step();
    let sw: Vec<f64> = w.values().iter().map(|v| (v * step).sqrt()).collect();
    let freqs: Vec<f64> = (1..=count as i32).map(|n| c_ratio.powi(n)).collect();
    let a = DMatrix::from_fn(grid.n_points(), count, |j, k| Complex64::from_polar(sw[j], freqs[k] * grid.x(j)));
    let y = DVector::from_iterator(grid.n_points(), f.values().iter().zip(&sw).map(|(z, s)| z * *s));
    let svd = a.clone().svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    let c = svd.solve(&y, cutoff).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((a * c - y).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub residual: f64,
}

pub fn hadamard_probe(c_ratio: f64, f: &SampledFunction, w: &WeightSamples, counts: &[usize]) -> Result<Vec<HadamardRow>> {
    counts
        .iter()
        .map(|&n| Ok(HadamardRow { n, residual: hadamard_residual(c_ratio, f, w, n)? }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub window: f64,
    pub inf_count: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub rows: Vec<DensityRow>,
}

/// Infimum over `a ∈ [λ_1, λ_max - W]` of `#(Λ ∩ [a, a + W)) / W`.
///
/// The count only drops when `a` passes a point, so it suffices to try
/// `a = λ_1`, `a` just after each `λ_i`, and the right end.
pub fn lower_density(lambdas: &[f64], windows: &[f64]) -> Result<DensityEstimate> {
    if lambdas.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::invalid("lambdas must be strictly increasing"));
    }
    let (Some(&first), Some(&last)) = (lambdas.first(), lambdas.last()) else {
        return Err(Error::invalid("empty spectrum"));
    };
    // #{λ ∈ [lo, hi)} and #{λ ∈ (lo, hi]}.
    let half_open = |lo: f64, hi: f64| lambdas.partition_point(|&l| l < hi) - lambdas.partition_point(|&l| l < lo);
    let open_closed = |lo: f64, hi: f64| lambdas.partition_point(|&l| l <= hi) - lambdas.partition_point(|&l| l <= lo);
    let rows = windows
        .iter()
        .map(|&wl| {
            if !(wl > 0.0) || wl > last - first {
                return Err(Error::invalid(format!(
                    "window {wl} must lie in (0, {}]",
                    last - first
                )));
            }
            let right = last - wl;
            let mut inf = half_open(first, first + wl).min(half_open(right, last));
            for &l in lambdas.iter().take_while(|&&l| l < right) {
                inf = inf.min(open_closed(l, l + wl));
            }
            Ok(DensityRow { window: wl, inf_count: inf, estimate: inf as f64 / wl })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityEstimate { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub radius: f64,
    pub mass: f64,
}

/// `∫_{|t|<R} |g|` on the grid for each `R`.
pub fn generator_decay_report(g: &SampledFunction, radii: &[f64]) -> Vec<DecayRow> {
    radii
        .iter()
        .map(|&r| DecayRow { radius: r, mass: g.windowed_l1(r) })
        .collect()
}
