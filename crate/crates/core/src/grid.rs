//! Uniform grids over symmetric intervals, complex samples on them, weights,
//! and the quadratures everything else is built from.
//!
//! The real line is truncated to `[-T, T]` and discretized with a uniform
//! step. Points are shifted by a fixed fraction of the step (`step / 7`) so
//! that the isolated zeros of the base weight never land on a grid point.
//! All integrals are Riemann sums with positive unit weights `step`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_points: usize,
    step: f64,
    offset: f64,
}

/// Builds the grid on `[-half_width, half_width]` with
/// `ceil(2 * half_width * points_per_unit)` points.
pub fn make_grid(half_width: f64, points_per_unit: usize) -> Result<Grid> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::invalid(format!(
            "grid half width must be positive, got {half_width}"
        )));
    }
    if points_per_unit == 0 {
        return Err(Error::invalid("points_per_unit must be positive"));
    }
    let n_points = (2.0 * half_width * points_per_unit as f64).ceil() as usize;
    let n_points = n_points.max(2);
    let step = 2.0 * half_width / n_points as f64;
    Grid::with_offset(half_width, n_points, step / 7.0)
}

impl Grid {
    pub fn with_offset(half_width: f64, n_points: usize, offset: f64) -> Result<Grid> {
        if !(half_width > 0.0) || n_points < 2 {
            return Err(Error::invalid("grid needs half_width > 0 and at least 2 points"));
        }
        let step = 2.0 * half_width / n_points as f64;
        if !(0.0..step).contains(&offset) {
            return Err(Error::invalid("grid offset must lie in [0, step)"));
        }
        Ok(Grid {
            half_width,
            n_points,
            step,
            offset,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + self.offset + j as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Range of indices whose points lie in the closed interval `[lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = ((lo + self.half_width - self.offset) / self.step).ceil().max(0.0) as usize;
        let mut start = first.min(self.n_points);
        while start > 0 && self.x(start - 1) >= lo {
            start -= 1;
        }
        while start < self.n_points && self.x(start) < lo {
            start += 1;
        }
        let mut end = start;
        let guess = ((hi + self.half_width - self.offset) / self.step).floor();
        if guess >= 0.0 {
            end = end.max((guess as usize + 1).min(self.n_points));
        }
        while end > start && self.x(end - 1) > hi {
            end -= 1;
        }
        while end < self.n_points && self.x(end) <= hi {
            end += 1;
        }
        start..end
    }

    pub fn check_interval(&self, lo: f64, hi: f64) -> Result<()> {
        let tol = 1e-12 * self.half_width.max(1.0);
        if !(lo <= hi) || lo < -self.half_width - tol || hi > self.half_width + tol {
            return Err(Error::IntervalOutsideGrid {
                lo,
                hi,
                span_lo: -self.half_width,
                span_hi: self.half_width,
            });
        }
        Ok(())
    }

    /// The frequency grid paired with this grid by the discrete Fourier
    /// transform: same number of points, spacing `2π / (n·step)`, starting
    /// at `-π / step`.
    pub fn dual(&self) -> Grid {
        let n = self.n_points;
        let step_t = 2.0 * PI / (n as f64 * self.step);
        Grid {
            half_width: 0.5 * n as f64 * step_t,
            n_points: n,
            step: step_t,
            offset: 0.0,
        }
    }

    pub(crate) fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        SampledFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, s: Complex64) -> SampledFunction {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|z| z * s).collect(),
        }
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.grid.same_as(&other.grid)?;
        Ok(SampledFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.grid.same_as(&other.grid)?;
        Ok(SampledFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Unweighted L² norm on the grid.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.step()).sqrt()
    }

    /// L¹ norm restricted to `|x| < radius`.
    pub fn windowed_l1(&self, radius: f64) -> f64 {
        self.grid
            .points()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() < radius)
            .map(|(_, z)| z.norm())
            .sum::<f64>()
            * self.grid.step()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSamples {
    grid: Grid,
    values: Vec<f64>,
    mass: f64,
}

impl WeightSamples {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::invalid(format!(
                "expected {} weight samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some((j, w)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(Error::invalid(format!(
                "weight must be positive and finite at every grid point (index {j}: {w})"
            )));
        }
        let mass = values.iter().sum::<f64>() * grid.step();
        Ok(WeightSamples { grid, values, mass })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n_points()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn scaled(&self, s: f64) -> Result<WeightSamples> {
        Self::new(self.grid, self.values.iter().map(|w| w * s).collect())
    }

    /// Pointwise square root as a complex sample vector.
    pub fn sqrt_samples(&self) -> SampledFunction {
        SampledFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|w| Complex64::new(w.sqrt(), 0.0))
                .collect(),
        }
    }
}

/// `∫ f·conj(g)·w dx` as a Riemann sum on the shared grid.
pub fn inner_product_w(
    f: &SampledFunction,
    g: &SampledFunction,
    w: &WeightSamples,
) -> Result<Complex64> {
    f.grid.same_as(&g.grid)?;
    f.grid.same_as(&w.grid)?;
    let s: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .zip(&w.values)
        .map(|((a, b), wt)| a * b.conj() * *wt)
        .sum();
    Ok(s * f.grid.step())
}

pub fn norm_w(f: &SampledFunction, w: &WeightSamples) -> Result<f64> {
    f.grid.same_as(&w.grid)?;
    let s: f64 = f
        .values
        .iter()
        .zip(&w.values)
        .map(|(a, wt)| a.norm_sqr() * wt)
        .sum();
    Ok((s * f.grid.step()).sqrt())
}

/// Measure of `{x ∈ [lo, hi] : |f(x) - g(x)| > threshold}`, counted as
/// `step` times the number of offending grid points.
pub fn bad_set_measure(
    f: &SampledFunction,
    g: &SampledFunction,
    threshold: f64,
    interval: (f64, f64),
) -> Result<f64> {
    f.grid.same_as(&g.grid)?;
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold must be positive"));
    }
    let (lo, hi) = interval;
    f.grid.check_interval(lo, hi)?;
    let count = f.grid.index_range(lo, hi)
        .filter(|&j| (f.values[j] - g.values[j]).norm() > threshold)
        .count();
    Ok(count as f64 * f.grid.step())
}

/// Normalizing constant of `√v(x) = c·sinc²(a x / 2)` that makes `∫v = 1`
/// on the whole line.
pub fn base_weight_constant(a: f64) -> f64 {
    (3.0 * a / (4.0 * PI)).sqrt()
}

/// `sin(u)/u` with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Base weight `v` with `(√v)^` equal to a triangle supported on `[-a, a]`,
/// together with that triangle `h` sampled on the dual (frequency) grid.
pub fn make_base_weight(
    grid: &Grid,
    time_support_halfwidth: f64,
) -> Result<(WeightSamples, SampledFunction)> {
    let a = time_support_halfwidth;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("time support half-width must be positive"));
    }
    let c = base_weight_constant(a);
    let sqrt_v: Vec<f64> = grid
        .points()
        .map(|x| {
            let s = sinc(0.5 * a * x);
            c * s * s
        })
        .collect();
    let v = WeightSamples::new(*grid, sqrt_v.iter().map(|s| s * s).collect())?;
    let peak = c * (2.0 * PI).sqrt() / a;
    let h = SampledFunction::from_fn(grid.dual(), |t| {
        Complex64::new(peak * (1.0 - t.abs() / a).max(0.0), 0.0)
    });
    Ok((v, h))
}
