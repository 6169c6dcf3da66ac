use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::interp::exp_matrix;
use super::SolverConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PenalizedFit {
    pub coeffs: Vec<Complex64>,
    /// `(1/p)‖a‖_p^p + (γ/2J)‖Ea - v‖²` at the returned point.
    pub objective: f64,
    /// Root mean square of `Ea - v` over the nodes.
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton for
/// `min_a (1/p)Σ|a_k|^p + (γ/2J)Σ_j |Σ_k a_k e^{iλ_k x_j} - v_j|²`
/// with `p ≥ 2`, in realified coordinates `(Re a, Im a)`.
///
/// `warm` seeds the iteration, which matters when the caller sweeps γ.
pub fn penalized_lp_fit(
    freqs: &[f64],
    points: &[f64],
    targets: &[Complex64],
    p: f64,
    gamma: f64,
    warm: Option<&[Complex64]>,
    cfg: &SolverConfig,
) -> Result<PenalizedFit> {
    cfg.validate()?;
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::invalid(format!("penalized fit needs p ≥ 2, got {p}")));
    }
    if !(gamma > 0.0) || points.is_empty() || points.len() != targets.len() {
        return Err(Error::invalid("penalized fit needs γ > 0 and one target per node"));
    }
    let k = freqs.len();
    let nj = points.len() as f64;
    let e = exp_matrix(freqs, points);
    let v = DVector::from_column_slice(targets);
    let eh = e.adjoint();
    let ehe = &eh * &e;
    let ehv = &eh * &v;
    let scale = gamma / nj;

    let value = |a: &DVector<Complex64>| -> (f64, f64) {
        let r = &e * a - &v;
        let pen = a.iter().map(|z| z.norm().powf(p)).sum::<f64>() / p;
        let rr = r.norm_squared();
        (pen + 0.5 * scale * rr, (rr / nj).sqrt())
    };

    let mut a = match warm {
        Some(w) if w.len() == k => DVector::from_column_slice(w),
        Some(_) => return Err(Error::invalid("warm start has the wrong length")),
        None => DVector::zeros(k),
    };
    let (mut val, mut rms) = value(&a);
    let gscale = 1.0 + scale * ehv.norm();
    let mut converged = false;
    let mut it = 0;
    while it < cfg.max_iterations {
        let grad = a.map(|z| z * z.norm().powf(p - 2.0)) + (&ehe * &a - &ehv) * Complex64::new(scale, 0.0);
        let mut g = DVector::zeros(2 * k);
        for i in 0..k {
            g[i] = grad[i].re;
            g[k + i] = grad[i].im;
        }
        if g.norm() <= cfg.tolerance * gscale {
            converged = true;
            break;
        }
        it += 1;
        let mut h = DMatrix::<f64>::zeros(2 * k, 2 * k);
        for c in 0..k {
            for r in 0..k {
                let z = ehe[(r, c)] * scale;
                h[(r, c)] = z.re;
                h[(k + r, k + c)] = z.re;
                h[(r, k + c)] = -z.im;
                h[(k + r, c)] = z.im;
            }
        }
        for i in 0..k {
            let m = a[i].norm();
            let s = m.powf(p - 2.0);
            let (ux, uy) = if m > 0.0 { (a[i].re / m, a[i].im / m) } else { (0.0, 0.0) };
            h[(i, i)] += s * (1.0 + (p - 2.0) * ux * ux);
            h[(k + i, k + i)] += s * (1.0 + (p - 2.0) * uy * uy);
            h[(i, k + i)] += s * (p - 2.0) * ux * uy;
            h[(k + i, i)] += s * (p - 2.0) * ux * uy;
        }
        let ridge = 1e-12 * (0..2 * k).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
        for i in 0..2 * k {
            h[(i, i)] += ridge;
        }
        let d = match h.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => -g.clone(),
        };
        let slope = g.dot(&d);
        let (d, slope) = if slope < 0.0 { (d, slope) } else { (-g.clone(), -g.norm_squared()) };
        let dir = DVector::from_fn(k, |i, _| Complex64::new(d[i], d[k + i]));
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-16 {
            let cand = &a + &dir * Complex64::new(t, 0.0);
            let (cv, cr) = value(&cand);
            if cv <= val + 1e-4 * t * slope {
                let change = val - cv;
                a = cand;
                val = cv;
                rms = cr;
                accepted = true;
                if change <= 1e-15 * val.abs().max(1e-300) {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    Ok(PenalizedFit {
        coeffs: a.iter().copied().collect(),
        objective: val,
        residual_rms: rms,
        iterations: it,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn quadratic_case_has_closed_form() {
        // p = 2 is ridge regression: (I + (γ/J) E^H E) a = (γ/J) E^H v.
        let freqs = [1.0, 2.0, 3.0];
        let pts = [0.3, 1.1, 2.0, 4.0];
        let v = [c(1.0), c(0.5), Complex64::new(0.0, 1.0), c(-1.0)];
        let r = penalized_lp_fit(&freqs, &pts, &v, 2.0, 3.0, None, &SolverConfig::default()).unwrap();
        let e = exp_matrix(&freqs, &pts);
        let s = Complex64::new(3.0 / 4.0, 0.0);
        let lhs = DMatrix::identity(3, 3) + e.adjoint() * &e * s;
        let rhs = e.adjoint() * DVector::from_column_slice(&v) * s;
        let exact = lhs.lu().solve(&rhs).unwrap();
        for (a, b) in r.coeffs.iter().zip(exact.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn stationary_for_p_above_two() {
        let freqs: Vec<f64> = (1..=12).map(|k| k as f64).collect();
        let pts: Vec<f64> = (0..30).map(|j| 0.2 + 6.0 * j as f64 / 30.0).collect();
        let v = vec![c(1.0); 30];
        let cfg = SolverConfig { tolerance: 1e-12, ..SolverConfig::default() };
        let r = penalized_lp_fit(&freqs, &pts, &v, 2.7, 10.0, None, &cfg).unwrap();
        assert!(r.converged);
        // Perturbations in random directions never lower the objective.
        let e = exp_matrix(&freqs, &pts);
        let obj = |a: &[Complex64]| {
            let av = DVector::from_column_slice(a);
            a.iter().map(|z| z.norm().powf(2.7)).sum::<f64>() / 2.7
                + 5.0 / 30.0 * (&e * av - DVector::from_column_slice(&v)).norm_squared()
        };
        assert!((obj(&r.coeffs) - r.objective).abs() < 1e-12 * r.objective.max(1.0));
        for s in 0..24 {
            let mut a = r.coeffs.clone();
            let i = s % 12;
            a[i] += if s < 12 { c(1e-4) } else { Complex64::new(0.0, 1e-4) };
            assert!(obj(&a) >= r.objective - 1e-14);
        }
    }

    #[test]
    fn larger_penalty_fits_better() {
        let freqs: Vec<f64> = (1..=16).map(|k| k as f64).collect();
        let pts: Vec<f64> = (0..64).map(|j| 0.3 + 5.7 * j as f64 / 64.0).collect();
        let v = vec![c(1.0); 64];
        let cfg = SolverConfig::default();
        let mut last = f64::INFINITY;
        let mut warm: Option<Vec<Complex64>> = None;
        for gamma in [1.0, 4.0, 16.0, 64.0] {
            let r = penalized_lp_fit(&freqs, &pts, &v, 2.5, gamma, warm.as_deref(), &cfg).unwrap();
            assert!(r.residual_rms <= last + 1e-12);
            last = r.residual_rms;
            warm = Some(r.coeffs);
        }
    }
}
