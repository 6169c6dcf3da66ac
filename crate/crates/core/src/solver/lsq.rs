use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{lq_ball_projection, SolverConfig, StepRule, TraceRow};
use crate::error::{Error, Result};
use crate::grid::{norm_w, Grid, SampledFunction, WeightSamples};

/// Exponentials `e^{iλx}` sampled on a grid, viewed as a synthesis operator
/// into `L²_w`. The weighted Gram matrix is formed once at construction.
#[derive(Debug, Clone)]
pub struct SynthesisSystem {
    freqs: Vec<f64>,
    grid: Grid,
    weight: WeightSamples,
    gram: DMatrix<Complex64>,
}

impl SynthesisSystem {
    pub fn new(freqs: Vec<f64>, weight: WeightSamples) -> Result<Self> {
        if freqs.windows(2).any(|w| !(w[0] < w[1])) || freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("frequencies must be finite and strictly increasing"));
        }
        let grid = *weight.grid();
        let k = freqs.len();
        let step = grid.step();
        let cols: Vec<Vec<Complex64>> = freqs
            .par_iter()
            .map(|&l| grid.points().map(|x| Complex64::from_polar(1.0, l * x)).collect())
            .collect();
        let wv = weight.values();
        let entries: Vec<(usize, usize, Complex64)> = (0..k)
            .into_par_iter()
            .flat_map_iter(|a| {
                let cols = &cols;
                (a..k).map(move |b| {
                    let s: Complex64 = cols[a]
                        .iter()
                        .zip(&cols[b])
                        .zip(wv)
                        .map(|((ea, eb), w)| ea.conj() * eb * *w)
                        .sum();
                    (a, b, s * step)
                })
            })
            .collect();
        let mut gram = DMatrix::zeros(k, k);
        for (a, b, s) in entries {
            gram[(a, b)] = s;
            gram[(b, a)] = s.conj();
        }
        for a in 0..k {
            gram[(a, a)].im = 0.0;
        }
        Ok(SynthesisSystem {
            freqs,
            grid,
            weight,
            gram,
        })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weight(&self) -> &WeightSamples {
        &self.weight
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    /// `b_a = ⟨f, e^{iλ_a x}⟩_w`.
    pub fn rhs(&self, f: &SampledFunction) -> Result<DVector<Complex64>> {
        f.grid().same_as(&self.grid)?;
        let step = self.grid.step();
        let wv = self.weight.values();
        let fv = f.values();
        let b: Vec<Complex64> = self
            .freqs
            .par_iter()
            .map(|&l| {
                let s: Complex64 = self
                    .grid
                    .points()
                    .zip(fv)
                    .zip(wv)
                    .map(|((x, fx), w)| fx * Complex64::from_polar(1.0, -l * x) * *w)
                    .sum();
                s * step
            })
            .collect();
        Ok(DVector::from_vec(b))
    }

    /// `Σ c_a e^{iλ_a x}` on the grid.
    pub fn synthesize(&self, c: &[Complex64]) -> SampledFunction {
        let freqs = &self.freqs;
        let values: Vec<Complex64> = (0..self.grid.n_points())
            .into_par_iter()
            .map(|j| {
                let x = self.grid.x(j);
                freqs
                    .iter()
                    .zip(c)
                    .map(|(l, ca)| ca * Complex64::from_polar(1.0, l * x))
                    .sum()
            })
            .collect();
        SampledFunction::new(self.grid, values).expect("finite synthesis")
    }

    /// `‖f - Σ c e^{iλx}‖_w`, evaluated directly on the samples.
    pub fn residual_norm(&self, f: &SampledFunction, c: &[Complex64]) -> Result<f64> {
        norm_w(&f.sub(&self.synthesize(c))?, &self.weight)
    }

    /// `½‖f - Σ c e^{iλx}‖²_w` through the Gram form.
    pub fn objective(&self, fnorm2: f64, b: &DVector<Complex64>, c: &DVector<Complex64>) -> f64 {
        let gc = &self.gram * c;
        0.5 * (fnorm2 - 2.0 * c.dotc(b).re + c.dotc(&gc).re)
    }

    /// Complex gradient `Gc - b`; its real and imaginary parts are the
    /// partial derivatives with respect to `Re c` and `Im c`.
    pub fn gradient(&self, b: &DVector<Complex64>, c: &DVector<Complex64>) -> DVector<Complex64> {
        &self.gram * c - b
    }

    /// Largest Gram eigenvalue by power iteration.
    fn lipschitz(&self, seed: u64) -> f64 {
        let k = self.freqs.len();
        if k == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = DVector::from_fn(k, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        v /= Complex64::new(v.norm(), 0.0);
        let mut lam = 0.0;
        for _ in 0..500 {
            let w = &self.gram * &v;
            let n = w.norm();
            if n == 0.0 {
                return 0.0;
            }
            let next = v.dotc(&w).re;
            v = w / Complex64::new(n, 0.0);
            if (next - lam).abs() <= 1e-10 * next.abs() {
                lam = next;
                break;
            }
            lam = next;
        }
        // Power iteration approaches from below; pad for safety.
        lam.max(0.0) * 1.02 + 1e-300
    }
}

#[derive(Debug, Clone)]
pub struct LsqSolution {
    pub coeffs: Vec<Complex64>,
    /// Achieved `‖f - Σ c e^{iλx}‖_w`.
    pub residual_norm: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out before the stopping test
    /// passed; the coefficients are then the best iterate seen.
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Minimizes `‖f - Σ c_a e^{iλ_a x}‖_w` over `‖c‖_q ≤ radius` by monotone
/// FISTA with adaptive restart and exact ℓ_q-ball projection.
///
/// Stops when the gradient mapping is below `tolerance·(1 + ‖b‖)`, or when
/// a projected-gradient step from the incumbent no longer decreases the
/// objective.
pub fn constrained_lsq(
    sys: &SynthesisSystem,
    f: &SampledFunction,
    q: f64,
    radius: f64,
    cfg: &SolverConfig,
) -> Result<LsqSolution> {
    cfg.validate()?;
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::invalid(format!("q must exceed 2, got {q}")));
    }
    if !(radius >= 0.0) {
        return Err(Error::invalid("radius must be nonnegative"));
    }
    let k = sys.freqs.len();
    let fnorm = norm_w(f, &sys.weight)?;
    let zero = vec![Complex64::new(0.0, 0.0); k];
    if radius == 0.0 || k == 0 {
        f.grid().same_as(&sys.grid)?;
        return Ok(LsqSolution {
            coeffs: zero,
            residual_norm: fnorm,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let fnorm2 = fnorm * fnorm;
    let b = sys.rhs(f)?;
    let tol = cfg.tolerance * (1.0 + b.norm());
    let lmax = sys.lipschitz(cfg.seed);
    if lmax <= 1e-300 {
        return Ok(LsqSolution {
            coeffs: zero,
            residual_norm: fnorm,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let proj = |v: &DVector<Complex64>| DVector::from_vec(lq_ball_projection(v.as_slice(), q, radius));

    let mut lip = match cfg.step_rule {
        StepRule::Fixed => lmax,
        StepRule::Backtracking => lmax / 4.0,
    };
    let mut x = DVector::<Complex64>::zeros(k);
    let mut fx = sys.objective(fnorm2, &b, &x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut restarted = false;
    let mut it = 0;
    while it < cfg.max_iterations {
        it += 1;
        let gy = sys.gradient(&b, &y);
        let fy = sys.objective(fnorm2, &b, &y);
        // Backtracking on the quadratic upper bound at y.
        let z = loop {
            let z = proj(&(&y - &gy * Complex64::new(1.0 / lip, 0.0)));
            if cfg.step_rule == StepRule::Fixed {
                break z;
            }
            let d = &z - &y;
            let bound = fy + gy.dotc(&d).re + 0.5 * lip * d.norm_squared();
            if sys.objective(fnorm2, &b, &z) <= bound + 1e-14 * fy.abs().max(1.0) || lip >= lmax {
                break z;
            }
            lip = (lip * 2.0).min(lmax);
        };
        let fz = sys.objective(fnorm2, &b, &z);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if fz < fx {
            y = &z + (&z - &x) * Complex64::new((t - 1.0) / t_next, 0.0);
            x = z;
            fx = fz;
            t = t_next;
        } else if restarted {
            // A plain projected-gradient step from the incumbent failed to
            // decrease the objective: stationary up to round-off.
            converged = true;
            break;
        } else {
            // Restart from the incumbent.
            y = x.clone();
            t = 1.0;
            restarted = true;
            continue;
        }
        restarted = false;
        if cfg.trace {
            trace.push(TraceRow {
                iteration: it,
                objective: fx,
                constraint_violation: (crate::trigpoly::lq_norm(x.as_slice(), q)? - radius).max(0.0),
            });
        }
        // Gradient mapping at the incumbent.
        let gx = sys.gradient(&b, &x);
        let px = proj(&(&x - &gx * Complex64::new(1.0 / lmax, 0.0)));
        let gm = (&x - &px).norm() * lmax;
        if gm <= tol {
            converged = true;
            break;
        }
        if cfg.step_rule == StepRule::Backtracking {
            lip = (lip * 0.9).max(lmax * 1e-6);
        }
    }
    if !converged {
        log::warn!("constrained_lsq: iteration budget {} exhausted", cfg.max_iterations);
    }
    let coeffs: Vec<Complex64> = x.iter().copied().collect();
    let residual_norm = sys.residual_norm(f, &coeffs)?;
    Ok(LsqSolution {
        coeffs,
        residual_norm,
        iterations: it,
        converged,
        trace,
    })
}
