//! The transform `u ↦ (1/√2π)∫u(x)e^{ixt}dx` between the analysis grid and
//! its dual, and the generator `g = (√w)^`.
//!
//! On the grid the transform is one inverse FFT with a phase correction; it
//! satisfies discrete Parseval exactly: `Σ|û|²·Δt = Σ|u|²·step`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::grid::{inner_product_w, norm_w, SampledFunction, WeightSamples};

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// Samples of `g` on the dual grid of the weight's grid.
    pub g: SampledFunction,
}

/// `(step/√2π) Σ_j u_j e^{i x_j t_m}` for every dual-grid point `t_m`.
pub fn transform(u: &SampledFunction) -> SampledFunction {
    let grid = u.grid();
    let dual = grid.dual();
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| if j % 2 == 0 { *z } else { -z })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let x0 = grid.x(0);
    let scale = grid.step() / (2.0 * PI).sqrt();
    let values = buf
        .iter()
        .enumerate()
        .map(|(m, z)| z * Complex64::from_polar(scale, x0 * dual.x(m)))
        .collect();
    SampledFunction::new(dual, values).expect("transform of finite samples is finite")
}

pub fn compute_generator(w: &WeightSamples) -> Generator {
    Generator {
        g: transform(&w.sqrt_samples()),
    }
}

/// `U_w f = (f√w)^`.
pub fn u_w(f: &SampledFunction, w: &WeightSamples) -> Result<SampledFunction> {
    let prod: Vec<Complex64> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(z, wt)| z * wt.sqrt())
        .collect();
    Ok(transform(&SampledFunction::new(*w.grid(), prod)?))
}

/// `(‖f - Σc e^{iλx}‖_{L²_w}, ‖U_w f - Σ c·U_w e^{iλx}‖_{L²})`.
///
/// `U_w e^{iλx}` is the translate `g(· + λ)` of the generator; on the grid
/// it is computed by transforming `e^{iλx}√w` directly, since `λ` is not a
/// multiple of the dual step.
pub fn unitary_transfer_check(
    f: &SampledFunction,
    w: &WeightSamples,
    coeffs: &[Complex64],
    lambdas: &[f64],
) -> Result<(f64, f64)> {
    if coeffs.len() != lambdas.len() {
        return Err(crate::Error::invalid("one coefficient per frequency"));
    }
    let grid = *f.grid();
    let combo = SampledFunction::from_fn(grid, |x| {
        coeffs
            .iter()
            .zip(lambdas)
            .map(|(c, l)| c * Complex64::from_polar(1.0, l * x))
            .sum()
    });
    let err_exp = norm_w(&f.sub(&combo)?, w)?;
    let mut acc = u_w(f, w)?;
    for (c, l) in coeffs.iter().zip(lambdas) {
        let atom = SampledFunction::from_fn(grid, |x| Complex64::from_polar(1.0, l * x));
        acc = acc.sub(&u_w(&atom, w)?.scaled(*c))?;
    }
    Ok((err_exp, acc.norm_l2()))
}

/// `⟨f, g⟩_w` and `⟨U_w f, U_w g⟩` for a unitarity spot check.
pub fn inner_products_both_sides(
    f: &SampledFunction,
    g: &SampledFunction,
    w: &WeightSamples,
) -> Result<(Complex64, Complex64)> {
    let lhs = inner_product_w(f, g, w)?;
    let (uf, ug) = (u_w(f, w)?, u_w(g, w)?);
    let rhs: Complex64 = uf
        .values()
        .iter()
        .zip(ug.values())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * uf.grid().step();
    Ok((lhs, rhs))
}
