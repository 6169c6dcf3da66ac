//! Approximation in measure by `B(x) = Σ_{n=1}^N b_n e^{iβ_n x}` with
//! near-integer frequencies `β_n ∈ [n, n + ξ)`.
//!
//! Offsets are `ξ·frac(nγ)` with γ the golden-ratio conjugate. The term
//! count doubles up to a cap; each fit is an exclusion IRLS with budget
//! `ξ/2` and threshold `ξ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{bad_set_measure, SampledFunction};
use crate::solver::{irls_measure_fit, SolverConfig};
use crate::trigpoly::{evaluate, TrigPoly};

/// `(√5 - 1) / 2`.
pub const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandauPlan {
    #[serde(rename = "N")]
    pub n: usize,
    pub xi: f64,
    pub beta: Vec<f64>,
    pub achieved_measure: f64,
    pub accepted: bool,
    /// Analysis grid points per unit length.
    pub grid_density: f64,
    /// `(N, measure at that N, best measure so far)` for every N tried.
    pub history: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LandauResult {
    pub poly: TrigPoly,
    pub plan: LandauPlan,
}

impl LandauResult {
    pub fn into_accepted(self) -> Result<(TrigPoly, LandauPlan)> {
        if self.plan.accepted {
            Ok((self.poly, self.plan))
        } else {
            Err(Error::BudgetExceeded(format!(
                "measure approximation with xi={} reached {:.4} at N={}",
                self.plan.xi, self.plan.achieved_measure, self.plan.n
            )))
        }
    }
}

/// `β_n = n + ξ·frac(nγ)` for `n = 1..=count`.
pub fn landau_frequencies(count: usize, xi: f64) -> Vec<f64> {
    (1..=count)
        .map(|n| {
            let t = n as f64 * GOLDEN_CONJUGATE;
            n as f64 + xi * (t - t.floor())
        })
        .collect()
}

/// True iff `0 ≤ β_n - n < ξ` for every n.
pub fn offsets_in_range(plan: &LandauPlan) -> bool {
    plan.beta.iter().enumerate().all(|(i, b)| {
        let off = b - (i + 1) as f64;
        (0.0..plan.xi).contains(&off)
    })
}

/// Tries `N = 1, 2, 4, …` (the last value clipped to `n_cap`) and returns
/// the first fit with `m{x ∈ I : |f - B| > ξ} < ξ`, or the best one with
/// `accepted = false`.
pub fn build_landau(
    interval: (f64, f64),
    xi: f64,
    f: &SampledFunction,
    n_cap: usize,
    cfg: &SolverConfig,
) -> Result<LandauResult> {
    cfg.validate()?;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::invalid(format!("xi must lie in (0, 1), got {xi}")));
    }
    if n_cap == 0 {
        return Err(Error::invalid("n_cap must be at least 1"));
    }
    let grid = f.grid();
    let (lo, hi) = interval;
    grid.check_interval(lo, hi)?;
    let inside = grid.index_range(lo, hi);
    let outside_max = f
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| !inside.contains(j))
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    if outside_max > 1e-12 {
        return Err(Error::invalid(format!(
            "target is not supported in [{lo}, {hi}] (|f| = {outside_max:.3e} outside)"
        )));
    }

    let mut best: Option<LandauResult> = None;
    let mut history = Vec::new();
    let mut n = 1usize;
    loop {
        let freqs = landau_frequencies(n, xi);
        let fit = irls_measure_fit(&freqs, f, interval, 0.5 * xi, xi, cfg)?;
        let poly = TrigPoly::new(freqs.clone(), fit.coeffs)?;
        let measure = bad_set_measure(f, &evaluate(&poly, grid), xi, interval)?;
        let improved = best.as_ref().is_none_or(|b| measure < b.plan.achieved_measure);
        if improved {
            best = Some(LandauResult {
                poly,
                plan: LandauPlan {
                    n,
                    xi,
                    beta: freqs,
                    achieved_measure: measure,
                    accepted: measure < xi,
                    grid_density: 1.0 / grid.step(),
                    history: Vec::new(),
                },
            });
        }
        let best_so_far = best.as_ref().map(|b| b.plan.achieved_measure).unwrap_or(measure);
        history.push((n, measure, best_so_far));
        log::debug!("landau N={n}: measure {measure:.4} (best {best_so_far:.4})");
        if measure < xi || n >= n_cap {
            break;
        }
        n = (2 * n).min(n_cap);
    }
    let mut best = best.expect("at least one term count is tried");
    best.plan.history = history;
    if !best.plan.accepted {
        log::warn!(
            "landau xi={xi}: best measure {:.4} at N={} (cap {n_cap})",
            best.plan.achieved_measure,
            best.plan.n
        );
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    const FULL: (f64, f64) = (-PI, PI);

    #[test]
    fn zero_target_needs_one_term() {
        let g = make_grid(PI, 32).unwrap();
        let f = SampledFunction::zeros(g);
        let r = build_landau(FULL, 0.1, &f, 64, &SolverConfig::default()).unwrap();
        assert_eq!(r.plan.n, 1);
        assert_eq!(r.plan.achieved_measure, 0.0);
        assert!(r.poly.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn first_candidate_is_exact() {
        let xi = 0.1;
        let beta = 1.0 + xi * GOLDEN_CONJUGATE;
        let g = make_grid(PI, 32).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::from_polar(1.0, beta * x));
        let r = build_landau(FULL, xi, &f, 64, &SolverConfig::default()).unwrap();
        assert_eq!(r.plan.n, 1);
        let res = evaluate(&r.poly, &g).sub(&f).unwrap();
        assert!(res.values().iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn offset_boundaries() {
        let mut plan = LandauPlan {
            n: 3,
            xi: 0.2,
            beta: vec![1.0, 2.0, 3.0],
            achieved_measure: 0.0,
            accepted: true,
            grid_density: 1.0,
            history: vec![],
        };
        assert!(offsets_in_range(&plan));
        plan.beta[1] = 2.2;
        assert!(!offsets_in_range(&plan));
        plan.beta = landau_frequencies(10_000, 0.2);
        assert!(offsets_in_range(&plan));
        assert!(plan.beta.windows(2).all(|w| w[0] < w[1]));
        assert!(plan.beta[0] >= 1.0);
    }

    #[test]
    fn near_integer_target_in_measure() {
        let xi = 0.1;
        let g = make_grid(PI, 32).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::from_polar(1.0, 1.05 * x));
        let cfg = SolverConfig { max_iterations: 40, tolerance: 1e-6, ..SolverConfig::default() };
        let r = build_landau(FULL, xi, &f, 64, &cfg).unwrap();
        assert!(r.plan.accepted, "{:?}", r.plan.history);
        assert!(r.plan.achieved_measure < xi);
        // Min-so-far column never increases.
        assert!(r.plan.history.windows(2).all(|w| w[1].2 <= w[0].2));
    }

    #[test]
    fn deterministic() {
        let g = make_grid(PI, 16).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new(x.signum() * (1.0 - (x / PI).powi(2)), 0.0));
        let cfg = SolverConfig { max_iterations: 20, tolerance: 1e-6, ..SolverConfig::default() };
        let a = build_landau(FULL, 0.3, &f, 16, &cfg).unwrap();
        let b = build_landau(FULL, 0.3, &f, 16, &cfg).unwrap();
        assert_eq!(a.poly, b.poly);
        assert_eq!(a.plan, b.plan);
    }

    #[test]
    fn rejects_target_outside_interval() {
        let g = make_grid(4.0, 8).unwrap();
        let f = SampledFunction::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!(build_landau((-1.0, 1.0), 0.1, &f, 4, &SolverConfig::default()).is_err());
        assert!(build_landau((-4.0, 4.0), 1.0, &f, 4, &SolverConfig::default()).is_err());
    }
}
