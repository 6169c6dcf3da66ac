//! Trigonometric polynomials `Σ c_m e^{i λ_m x}` with real, strictly
//! increasing frequencies.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};

/// Coefficients below this modulus are not part of the spectrum.
pub const SPECTRUM_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    freqs: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(freqs: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::invalid(format!(
                "{} frequencies but {} coefficients",
                freqs.len(),
                coeffs.len()
            )));
        }
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("frequencies must be finite"));
        }
        if let Some(w) = freqs.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(format!(
                "frequencies must be strictly increasing (index {w}: {} then {})",
                freqs[w],
                freqs[w + 1]
            )));
        }
        if coeffs.iter().any(|c| c.re.is_nan() || c.im.is_nan()) {
            return Err(Error::invalid("coefficients must not be NaN"));
        }
        Ok(TrigPoly { freqs, coeffs })
    }

    pub fn empty() -> Self {
        TrigPoly::default()
    }

    pub fn monomial(freq: f64, coeff: Complex64) -> Self {
        TrigPoly {
            freqs: vec![freq],
            coeffs: vec![coeff],
        }
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.freqs.iter().copied().zip(self.coeffs.iter().copied())
    }

    pub fn min_freq(&self) -> Option<f64> {
        self.freqs.first().copied()
    }

    pub fn max_freq(&self) -> Option<f64> {
        self.freqs.last().copied()
    }

    /// Value at a single point, summed in frequency order with Neumaier
    /// compensation.
    pub fn eval_at(&self, x: f64) -> Complex64 {
        let mut acc = Compensated::default();
        for (f, c) in self.terms() {
            let (s, co) = (f * x).sin_cos();
            acc.add(c * Complex64::new(co, s));
        }
        acc.total()
    }

    /// The polynomial restricted to its spectrum: terms with `|c| < 1e-14`
    /// dropped.
    pub fn spectrum(&self) -> TrigPoly {
        let (freqs, coeffs) = self
            .terms()
            .filter(|(_, c)| c.norm() >= SPECTRUM_CUTOFF)
            .unzip();
        TrigPoly { freqs, coeffs }
    }

    /// Coefficient-wise sum; frequencies present in both are merged.
    pub fn sum(&self, other: &TrigPoly) -> TrigPoly {
        let mut freqs = Vec::with_capacity(self.len() + other.len());
        let mut coeffs = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let take_left = j >= other.len() || (i < self.len() && self.freqs[i] < other.freqs[j]);
            let take_right = i >= self.len() || (j < other.len() && other.freqs[j] < self.freqs[i]);
            if take_left {
                freqs.push(self.freqs[i]);
                coeffs.push(self.coeffs[i]);
                i += 1;
            } else if take_right {
                freqs.push(other.freqs[j]);
                coeffs.push(other.coeffs[j]);
                j += 1;
            } else {
                freqs.push(self.freqs[i]);
                coeffs.push(self.coeffs[i] + other.coeffs[j]);
                i += 1;
                j += 1;
            }
        }
        TrigPoly { freqs, coeffs }
    }
}

#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: Complex64,
    err: Complex64,
}

impl Compensated {
    fn add(&mut self, v: Complex64) {
        let (re, ere) = two_sum(self.sum.re, v.re);
        let (im, eim) = two_sum(self.sum.im, v.im);
        self.sum = Complex64::new(re, im);
        self.err += Complex64::new(ere, eim);
    }

    fn total(&self) -> Complex64 {
        self.sum + self.err
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, err)
}

/// Samples the polynomial on every grid point by direct summation. Each
/// point is summed independently, so the result does not depend on how the
/// grid is split across threads.
pub fn evaluate(p: &TrigPoly, grid: &Grid) -> SampledFunction {
    let values: Vec<Complex64> = (0..grid.n_points())
        .into_par_iter()
        .with_min_len(256)
        .map(|j| p.eval_at(grid.x(j)))
        .collect();
    SampledFunction::new(*grid, values).expect("finite frequencies give finite samples")
}

/// `(Σ |c|^q)^{1/q}` for `q ≥ 1`, computed with the largest modulus factored
/// out.
pub fn coeff_norm(p: &TrigPoly, q: f64) -> Result<f64> {
    lq_norm(p.coeffs(), q)
}

pub fn lq_norm(c: &[Complex64], q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("norm index must be at least 1, got {q}")));
    }
    let m = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(m);
    }
    let s: f64 = c.iter().map(|z| (z.norm() / m).powf(q)).sum();
    Ok(m * s.powf(1.0 / q))
}

/// `b·e^{iβx}·A(rx)`: frequencies `β + r·λ`, coefficients `b·a`.
pub fn modulate_dilate(a: &TrigPoly, r: f64, beta: f64, b: Complex64) -> Result<TrigPoly> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("dilation must be positive, got {r}")));
    }
    if !beta.is_finite() {
        return Err(Error::invalid("modulation must be finite"));
    }
    let freqs: Vec<f64> = a.freqs.iter().map(|f| beta + r * f).collect();
    let coeffs = a.coeffs.iter().map(|c| b * c).collect();
    TrigPoly::new(freqs, coeffs)
}

/// Concatenates blocks whose spectra are ordered left to right.
pub fn concat_blocks(blocks: &[TrigPoly]) -> Result<TrigPoly> {
    let mut out = TrigPoly::empty();
    let mut prev_max: Option<f64> = None;
    for (index, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            continue;
        }
        let lo = block.freqs[0];
        if let Some(pm) = prev_max {
            if !(pm < lo) {
                return Err(Error::Overlap {
                    index,
                    prev_max: pm,
                    next_min: lo,
                });
            }
        }
        prev_max = block.max_freq();
        out.freqs.extend_from_slice(&block.freqs);
        out.coeffs.extend_from_slice(&block.coeffs);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product_w, make_grid, WeightSamples};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TrigPoly::new(vec![1.0, 1.0], vec![c(1.0), c(1.0)]).is_err());
        assert!(TrigPoly::new(vec![1.0], vec![]).is_err());
        assert!(TrigPoly::new(vec![1.0], vec![Complex64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let g = make_grid(PI, 8).unwrap();
        let one = evaluate(&TrigPoly::monomial(0.0, c(1.0)), &g);
        assert!(one.values().iter().all(|z| *z == c(1.0)));
        let zero = evaluate(&TrigPoly::empty(), &g);
        assert!(zero.values().iter().all(|z| z.norm() == 0.0));
        let cos = TrigPoly::new(vec![-1.0, 1.0], vec![c(0.5), c(0.5)]).unwrap();
        assert!((cos.eval_at(0.0) - c(1.0)).norm() < 1e-15);
        assert!((cos.eval_at(PI) - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let z = Complex64::new(0.3, -0.4);
        let p = TrigPoly::monomial(2.0, z);
        for q in [1.0, 2.0, 2.5, 7.0] {
            assert!((coeff_norm(&p, q).unwrap() - 0.5).abs() < 1e-15);
        }
        let p = TrigPoly::new(vec![1.0, 2.0, 3.0, 4.0], vec![c(1.0); 4]).unwrap();
        assert!((coeff_norm(&p, 2.0).unwrap() - 2.0).abs() < 1e-15);
        let p = TrigPoly::new(vec![1.0, 2.0], vec![c(3.0), c(4.0)]).unwrap();
        assert!((coeff_norm(&p, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((coeff_norm(&p, 64.0).unwrap() - 4.0).abs() < 1e-2);
        assert!(coeff_norm(&p, 0.5).is_err());
    }

    #[test]
    fn modulate_dilate_examples() {
        let a = TrigPoly::monomial(1.0, c(1.0));
        let out = modulate_dilate(&a, 2.0, 0.5, c(1.0)).unwrap();
        assert_eq!(out.freqs(), &[2.5]);
        assert_eq!(out.coeffs(), &[c(1.0)]);
        let a = TrigPoly::new(vec![1.0, 2.0, 3.0], vec![c(1.0), c(2.0), c(3.0)]).unwrap();
        let out = modulate_dilate(&a, 5.0, 1.2, c(0.0)).unwrap();
        assert!(out.coeffs().iter().all(|z| z.norm() == 0.0));
        let out = modulate_dilate(&a, 5.0, 1.2, c(1.0)).unwrap();
        for (got, want) in out.freqs().iter().zip([6.2, 11.2, 16.2]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(modulate_dilate(&a, 0.0, 1.0, c(1.0)).is_err());
    }

    #[test]
    fn concat_examples() {
        let a = TrigPoly::monomial(1.0, c(1.0));
        assert_eq!(concat_blocks(std::slice::from_ref(&a)).unwrap(), a);
        let b = TrigPoly::monomial(2.0, c(2.0));
        let ab = concat_blocks(&[a.clone(), b]).unwrap();
        assert_eq!(ab.freqs(), &[1.0, 2.0]);
        let hi = TrigPoly::new(vec![6.2, 11.2, 16.2], vec![c(1.0); 3]).unwrap();
        let lo = TrigPoly::monomial(10.0, c(1.0));
        assert!(matches!(
            concat_blocks(&[hi, lo]),
            Err(Error::Overlap { index: 1, .. })
        ));
    }

    #[test]
    fn spectrum_prunes_tiny_coefficients() {
        let p = TrigPoly::new(vec![1.0, 2.0, 3.0], vec![c(1.0), c(1e-15), c(-2.0)]).unwrap();
        assert_eq!(p.spectrum().freqs(), &[1.0, 3.0]);
    }

    #[test]
    fn parseval_on_full_period_grid() {
        let g = make_grid(PI, 16).unwrap();
        let w = WeightSamples::constant(g, 1.0).unwrap();
        let p = TrigPoly::new(
            vec![-3.0, 0.0, 2.0, 5.0, 7.0],
            vec![
                Complex64::new(0.5, 0.1),
                c(-1.0),
                Complex64::new(0.0, 2.0),
                c(0.25),
                Complex64::new(-0.3, 0.3),
            ],
        )
        .unwrap();
        let s = evaluate(&p, &g);
        let energy = inner_product_w(&s, &s, &w).unwrap().re / (2.0 * PI);
        let n2 = coeff_norm(&p, 2.0).unwrap();
        assert!((energy - n2 * n2).abs() < 1e-8);
    }

    fn arb_poly() -> impl Strategy<Value = TrigPoly> {
        prop::collection::vec((0.01f64..3.0, -2.0f64..2.0, -2.0f64..2.0), 1..12).prop_map(|v| {
            let mut f = 0.0;
            let mut freqs = Vec::new();
            let mut coeffs = Vec::new();
            for (gap, re, im) in v {
                f += gap;
                freqs.push(f - 5.0);
                coeffs.push(Complex64::new(re, im));
            }
            TrigPoly::new(freqs, coeffs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn evaluation_is_linear(p in arb_poly(), q in arb_poly()) {
            let g = make_grid(3.0, 4).unwrap();
            let lhs = evaluate(&p.sum(&q), &g);
            let (ep, eq) = (evaluate(&p, &g), evaluate(&q, &g));
            for ((l, a), b) in lhs.values().iter().zip(ep.values()).zip(eq.values()) {
                let scale = 1.0 + a.norm() + b.norm();
                prop_assert!((l - a - b).norm() <= 1e-12 * scale * 12.0);
            }
        }

        #[test]
        fn norms_decrease_in_index(p in arb_poly(), q1 in 1.0f64..8.0, dq in 0.0f64..8.0) {
            let a = coeff_norm(&p, q1).unwrap();
            let b = coeff_norm(&p, q1 + dq).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-12));
        }

        #[test]
        fn modulation_scales_norms(p in arb_poly(), r in 0.1f64..10.0, beta in -5.0f64..5.0,
                                   bre in -3.0f64..3.0, bim in -3.0f64..3.0, q in 1.0f64..6.0) {
            let b = Complex64::new(bre, bim);
            let out = modulate_dilate(&p, r, beta, b).unwrap();
            let lhs = coeff_norm(&out, q).unwrap();
            let rhs = b.norm() * coeff_norm(&p, q).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }
}
