//! Gram sections `⟨e^{iλ_m x}, e^{iλ_n x}⟩_{L²_w}` over initial segments of
//! Λ, and the Bessel and frame-failure probes built on them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eig::{max_eigenvalue, min_eigenvalue};
use crate::error::{Error, Result};
use crate::grid::WeightSamples;
use crate::solver::SynthesisSystem;

pub const EIG_TOLERANCE: f64 = 1e-8;
pub const EIG_MAX_ITER: usize = 20_000;
const EIG_SEED: u64 = 0x5eed;

pub fn gram_matrix(lambdas: &[f64], w: &WeightSamples) -> Result<DMatrix<Complex64>> {
    Ok(SynthesisSystem::new(lambdas.to_vec(), w.clone())?.gram().clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSection {
    pub size: usize,
    #[serde(with = "crate::io::nonfinite")]
    pub min_eig: f64,
    pub max_eig: f64,
    pub converged: bool,
}

fn check_sizes(lambdas: &[f64], sizes: &[usize]) -> Result<usize> {
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if largest > lambdas.len() {
        return Err(Error::invalid(format!(
            "section of size {largest} requested from a spectrum of {} terms",
            lambdas.len()
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::invalid("section sizes must be positive"));
    }
    Ok(largest)
}

fn leading(g: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    g.view((0, 0), (n, n)).into_owned()
}

/// Extreme eigenvalues of the Gram matrix of `λ_1..λ_s` for every `s` in
/// `sizes`.
pub fn gram_sections(lambdas: &[f64], w: &WeightSamples, sizes: &[usize], with_min: bool) -> Result<Vec<GramSection>> {
    let largest = check_sizes(lambdas, sizes)?;
    let g = gram_matrix(&lambdas[..largest], w)?;
    Ok(sizes
        .iter()
        .map(|&s| {
            let sub = leading(&g, s);
            let mx = max_eigenvalue(&sub, EIG_TOLERANCE, EIG_MAX_ITER, EIG_SEED);
            let mn = if with_min {
                min_eigenvalue(&sub, mx.value, EIG_TOLERANCE, EIG_MAX_ITER, EIG_SEED)
            } else {
                mx
            };
            if !(mx.converged && mn.converged) {
                log::warn!("gram section {s}: eigen-iteration hit its budget");
            }
            GramSection {
                size: s,
                min_eig: if with_min { mn.value } else { f64::NAN },
                max_eig: mx.value,
                converged: mx.converged && mn.converged,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselRow {
    pub size: usize,
    pub max_eig: f64,
    /// Running supremum over the sizes so far: the empirical `C′²`.
    pub bessel_sq: f64,
}

pub fn bessel_bound(lambdas: &[f64], w: &WeightSamples, sizes: &[usize]) -> Result<Vec<BesselRow>> {
    let mut sup = 0.0f64;
    Ok(gram_sections(lambdas, w, sizes, false)?
        .into_iter()
        .map(|s| {
            sup = sup.max(s.max_eig);
            BesselRow { size: s.size, max_eig: s.max_eig, bessel_sq: sup }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRow {
    pub size: usize,
    pub min_eig: f64,
    pub max_eig: f64,
}

pub fn frame_failure_probe(lambdas: &[f64], w: &WeightSamples, sizes: &[usize]) -> Result<Vec<FrameRow>> {
    Ok(gram_sections(lambdas, w, sizes, true)?
        .into_iter()
        .map(|s| FrameRow { size: s.size, min_eig: s.min_eig, max_eig: s.max_eig })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityRow {
    /// Index of the smaller weight in the nested list.
    pub weight: usize,
    pub size: usize,
    pub max_eig_larger: f64,
    pub max_eig_smaller: f64,
    pub holds: bool,
}

/// For a list `w_0 ≥ w_1 ≥ …` checks that no section's largest eigenvalue
/// grows from `w_{j-1}` to `w_j`, up to the eigen-iteration tolerance.
pub fn bessel_monotonicity(lambdas: &[f64], weights: &[WeightSamples], sizes: &[usize]) -> Result<Vec<MonotonicityRow>> {
    for pair in weights.windows(2) {
        if pair[1].values().iter().zip(pair[0].values()).any(|(a, b)| a > b) {
            return Err(Error::invalid("weights are not pointwise nested"));
        }
    }
    let per_weight = weights
        .iter()
        .map(|w| bessel_bound(lambdas, w, sizes))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (j, pair) in per_weight.windows(2).enumerate() {
        for (a, b) in pair[0].iter().zip(&pair[1]) {
            rows.push(MonotonicityRow {
                weight: j + 1,
                size: a.size,
                max_eig_larger: a.max_eig,
                max_eig_smaller: b.max_eig,
                holds: b.max_eig <= a.max_eig * (1.0 + EIG_TOLERANCE),
            });
        }
    }
    Ok(rows)
}
