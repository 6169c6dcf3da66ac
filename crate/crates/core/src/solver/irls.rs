use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::SampledFunction;

#[derive(Debug, Clone)]
pub struct IrlsResult {
    pub coeffs: Vec<Complex64>,
    /// Measure of `{x ∈ I : |f - Σ c e^{iλx}| > threshold}` for the returned
    /// coefficients.
    pub bad_measure: f64,
    /// The same measure for the plain least-squares fit (iteration 0).
    pub baseline_measure: f64,
    pub iterations: usize,
    /// False when the bad-set measure had not settled within the budget.
    pub converged: bool,
}

/// Fits `f` on `interval` in measure: least squares alternated with hard
/// exclusion of the worst-fitting grid points, up to a total excluded measure
/// of `excluded_measure_budget`.
///
/// The iterate with the smallest bad-set measure at `threshold` is returned.
pub fn irls_measure_fit(
    freqs: &[f64],
    f: &SampledFunction,
    interval: (f64, f64),
    excluded_measure_budget: f64,
    threshold: f64,
    cfg: &SolverConfig,
) -> Result<IrlsResult> {
    cfg.validate()?;
    let grid = f.grid();
    let (lo, hi) = interval;
    grid.check_interval(lo, hi)?;
    if !(excluded_measure_budget > 0.0) || excluded_measure_budget >= hi - lo {
        return Err(Error::invalid(format!(
            "excluded measure budget {excluded_measure_budget} must lie in (0, {})",
            hi - lo
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold must be positive"));
    }
    let k = freqs.len();
    let zero = vec![Complex64::new(0.0, 0.0); k];
    let idx: Vec<usize> = grid.index_range(lo, hi).collect();
    let step = grid.step();
    let fv: Vec<Complex64> = idx.iter().map(|&j| f.values()[j]).collect();
    let bad_of = |res: &[f64]| res.iter().filter(|r| **r > threshold).count() as f64 * step;

    if k == 0 || fv.iter().all(|z| z.norm() == 0.0) {
        let res: Vec<f64> = fv.iter().map(|z| z.norm()).collect();
        let m = bad_of(&res);
        return Ok(IrlsResult {
            coeffs: zero,
            bad_measure: m,
            baseline_measure: m,
            iterations: 0,
            converged: true,
        });
    }

    let e = DMatrix::from_fn(idx.len(), k, |r, a| {
        Complex64::from_polar(1.0, freqs[a] * grid.x(idx[r]))
    });
    let target = DVector::from_vec(fv.clone());
    let residuals = |c: &DVector<Complex64>| -> Vec<f64> {
        (&e * c - &target).iter().map(|z| z.norm()).collect()
    };
    let mut keep = vec![true; idx.len()];
    let solve = |keep: &[bool]| -> Result<DVector<Complex64>> {
        let rows: Vec<usize> = (0..keep.len()).filter(|&r| keep[r]).collect();
        let a = DMatrix::from_fn(rows.len(), k, |r, c| e[(rows[r], c)]);
        let rhs = DVector::from_fn(rows.len(), |r, _| target[rows[r]]);
        let svd = a.svd(true, true);
        let eps = 1e-12 * svd.singular_values.max();
        svd.solve(&rhs, eps)
            .map_err(|msg| Error::invalid(format!("least-squares solve failed: {msg}")))
    };

    let n_excluded = ((excluded_measure_budget / step).floor() as usize).min(idx.len().saturating_sub(1));
    let c0 = solve(&keep)?;
    let res0 = residuals(&c0);
    let baseline = bad_of(&res0);
    let mut best = (baseline, c0);
    let tol = cfg.tolerance * (hi - lo);
    let mut converged = baseline == 0.0;
    let mut it = 0;
    // Two exclusion rules, each iterated to its own fixed point: the worst
    // points individually, and the worst points after averaging residuals
    // over a window of the budget's width. The second produces contiguous
    // gaps, which is what lets a fit escape a jump of the target.
    if !converged {
        converged = true;
        for windowed in [false, true] {
            let mut res = res0.clone();
            let mut prev = baseline;
            let mut prev_keep: Option<Vec<bool>> = None;
            let mut settled = false;
            for _ in 0..cfg.max_iterations {
                it += 1;
                let ranking = if windowed {
                    window_average(&res, n_excluded.max(1))
                } else {
                    res.clone()
                };
                let mut order: Vec<usize> = (0..idx.len()).collect();
                order.sort_by(|&a, &b| ranking[b].total_cmp(&ranking[a]).then(a.cmp(&b)));
                keep.iter_mut().for_each(|k| *k = true);
                for &r in &order[..n_excluded] {
                    keep[r] = false;
                }
                let c = solve(&keep)?;
                res = residuals(&c);
                let m = bad_of(&res);
                if m < best.0 {
                    best = (m, c);
                }
                let same_set = prev_keep.as_deref() == Some(keep.as_slice());
                if (m - prev).abs() <= tol && same_set {
                    settled = true;
                    break;
                }
                prev = m;
                prev_keep = Some(keep.clone());
            }
            converged &= settled;
        }
    }
    if !converged {
        log::warn!("irls_measure_fit: bad-set measure still moving after {it} iterations");
    }
    Ok(IrlsResult {
        coeffs: best.1.iter().copied().collect(),
        bad_measure: best.0,
        baseline_measure: baseline,
        iterations: it,
        converged,
    })
}

/// Centered moving sum over `width` samples divided by `width`. Samples past
/// either end count as zero, so a window hanging outside the interval is not
/// favored: the part outside would waste exclusion budget.
fn window_average(r: &[f64], width: usize) -> Vec<f64> {
    let n = r.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, v) in r.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2);
            let hi = (i + width - width / 2).min(n);
            (prefix[hi] - prefix[lo]) / width as f64
        })
        .collect()
}
