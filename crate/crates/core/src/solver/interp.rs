use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{SolverConfig, TraceRow};
use crate::error::{Error, Result};
use crate::trigpoly::lq_norm;

#[derive(Debug, Clone)]
pub struct InterpolationResult {
    pub coeffs: Vec<Complex64>,
    /// `‖c‖_p` at the returned point.
    pub objective: f64,
    /// `‖Σ c_k e^{iλ_k x_j} - v_j‖₂` over the constraints. Stationarity holds
    /// by construction of the primal point from the dual one, so this is the
    /// full KKT residual.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

pub(crate) fn exp_matrix(freqs: &[f64], points: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(points.len(), freqs.len(), |j, k| {
        Complex64::from_polar(1.0, freqs[k] * points[j])
    })
}

/// Minimizes `‖c‖_p` subject to `Σ_k c_k e^{iλ_k x_j} = v_j` for every
/// constraint point, with fewer constraints than frequencies.
///
/// Solved through the smooth dual `min_y (1/p')‖Φ^H y‖_{p'}^{p'} - Re⟨y, v⟩`
/// by damped Newton in realified coordinates; the primal point is
/// `c = |z|^{p'-2} z` with `z = Φ^H y`.
pub fn min_lp_interpolation(
    freqs: &[f64],
    points: &[f64],
    targets: &[Complex64],
    p: f64,
    cfg: &SolverConfig,
) -> Result<InterpolationResult> {
    cfg.validate()?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("norm index must exceed 1, got {p}")));
    }
    if points.len() != targets.len() {
        return Err(Error::invalid("one target value per constraint point"));
    }
    let (nc, nf) = (points.len(), freqs.len());
    if nc >= nf {
        return Err(Error::invalid(format!(
            "{nc} constraints for {nf} frequencies: the interpolation problem must be underdetermined"
        )));
    }
    let vnorm = targets.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if vnorm == 0.0 {
        return Ok(InterpolationResult {
            coeffs: vec![Complex64::new(0.0, 0.0); nf],
            objective: 0.0,
            kkt_residual: 0.0,
            iterations: 0,
            trace: Vec::new(),
        });
    }

    let phi = exp_matrix(freqs, points);
    let v = DVector::from_column_slice(targets);

    // Minimum ℓ₂ solution doubles as the feasibility test and the p = 2 answer.
    let svd = phi.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let c2 = svd
        .solve(&v, 1e-12 * smax)
        .map_err(|e| Error::invalid(format!("svd solve failed: {e}")))?;
    let res2 = (&phi * &c2 - &v).norm();
    if res2 > 1e-8 * (1.0 + vnorm) {
        return Err(Error::Infeasible { residual: res2 });
    }
    if p == 2.0 {
        let coeffs: Vec<Complex64> = c2.iter().copied().collect();
        return Ok(InterpolationResult {
            objective: lq_norm(&coeffs, 2.0)?,
            coeffs,
            kkt_residual: res2,
            iterations: 0,
            trace: Vec::new(),
        });
    }

    let pd = p / (p - 1.0);
    let gram = &phi * phi.adjoint();
    let y2 = gram
        .clone()
        .svd(true, true)
        .solve(&v, 1e-14 * gram.norm())
        .map_err(|e| Error::invalid(format!("svd solve failed: {e}")))?;
    let rms = (c2.norm_squared() / nf as f64).sqrt().max(1e-300);
    let mut y = y2 * Complex64::new(rms.powf(p - 2.0), 0.0);

    let phi_h = phi.adjoint();
    let dual_value = |y: &DVector<Complex64>| -> (f64, DVector<Complex64>) {
        let z = &phi_h * y;
        let val = z.iter().map(|zk| zk.norm().powf(pd)).sum::<f64>() / pd - y.dotc(&v).re;
        (val, z)
    };
    let primal = |z: &DVector<Complex64>| -> DVector<Complex64> {
        z.map(|zk| {
            let m = zk.norm();
            if m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                zk * m.powf(pd - 2.0)
            }
        })
    };

    let tol = cfg.tolerance * (1.0 + vnorm);
    let mut trace = Vec::new();
    let (mut val, mut z) = dual_value(&y);
    for it in 0..cfg.max_iterations {
        let c = primal(&z);
        let grad = &phi * &c - &v;
        let gnorm = grad.norm();
        if cfg.trace {
            trace.push(TraceRow {
                iteration: it,
                objective: lq_norm(c.as_slice(), p)?,
                constraint_violation: gnorm,
            });
        }
        if gnorm <= tol {
            let coeffs: Vec<Complex64> = c.iter().copied().collect();
            return Ok(InterpolationResult {
                objective: lq_norm(&coeffs, p)?,
                coeffs,
                kkt_residual: gnorm,
                iterations: it,
                trace,
            });
        }
        let h = realified_hessian(&phi, &z, pd);
        let mut g = DVector::zeros(2 * nc);
        for j in 0..nc {
            g[j] = grad[j].re;
            g[nc + j] = grad[j].im;
        }
        let ridge = 1e-13 * (h.trace() / (2 * nc) as f64).max(1e-300);
        let hreg = &h + DMatrix::identity(2 * nc, 2 * nc) * ridge;
        let step = match hreg.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => hreg
                .lu()
                .solve(&(-&g))
                .unwrap_or_else(|| -g.clone()),
        };
        // Fall back to steepest descent if the Newton step is not a descent
        // direction (only possible through round-off in the ridge solve).
        let (dir, slope) = if g.dot(&step) < 0.0 {
            (
                DVector::from_fn(nc, |j, _| Complex64::new(step[j], step[nc + j])),
                g.dot(&step),
            )
        } else {
            (-grad.clone(), -g.norm_squared())
        };
        let mut t = 1.0;
        loop {
            let cand = &y + &dir * Complex64::new(t, 0.0);
            let (cv, cz) = dual_value(&cand);
            if cv <= val + 1e-4 * t * slope || t < 1e-20 {
                y = cand;
                val = cv;
                z = cz;
                break;
            }
            t *= 0.5;
        }
    }
    let c = primal(&z);
    let last = (&phi * &c - &v).norm();
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        last_change: last,
    })
}

/// Hessian of `y ↦ (1/p')Σ|(Φ^H y)_k|^{p'}` in the coordinates
/// `(Re y, Im y)`.
fn realified_hessian(phi: &DMatrix<Complex64>, z: &DVector<Complex64>, pd: f64) -> DMatrix<f64> {
    let (nc, nf) = phi.shape();
    let zmax = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * zmax.max(1e-300);
    // Jacobian of (Re z_k, Im z_k) with respect to (Re y, Im y).
    let mut jac = DMatrix::<f64>::zeros(2 * nf, 2 * nc);
    let mut mj = DMatrix::<f64>::zeros(2 * nf, 2 * nc);
    for k in 0..nf {
        for j in 0..nc {
            let e = phi[(j, k)].conj();
            jac[(2 * k, j)] = e.re;
            jac[(2 * k, nc + j)] = -e.im;
            jac[(2 * k + 1, j)] = e.im;
            jac[(2 * k + 1, nc + j)] = e.re;
        }
        let m = z[k].norm().max(floor);
        let (ux, uy) = if z[k].norm() > 0.0 {
            (z[k].re / z[k].norm(), z[k].im / z[k].norm())
        } else {
            (1.0, 0.0)
        };
        let s = m.powf(pd - 2.0);
        let a = s * (1.0 + (pd - 2.0) * ux * ux);
        let b = s * (pd - 2.0) * ux * uy;
        let d = s * (1.0 + (pd - 2.0) * uy * uy);
        for col in 0..2 * nc {
            let r0 = jac[(2 * k, col)];
            let r1 = jac[(2 * k + 1, col)];
            mj[(2 * k, col)] = a * r0 + b * r1;
            mj[(2 * k + 1, col)] = b * r0 + d * r1;
        }
    }
    jac.transpose() * mj
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SolverConfig {
        SolverConfig {
            tolerance: 1e-11,
            max_iterations: 500,
            ..SolverConfig::default()
        }
    }

    fn int_freqs(k: usize) -> Vec<f64> {
        (1..=k).map(|x| x as f64).collect()
    }

    #[test]
    fn least_norm_two_terms() {
        let r = min_lp_interpolation(&int_freqs(2), &[0.0], &[Complex64::new(1.0, 0.0)], 2.0, &cfg())
            .unwrap();
        for c in &r.coeffs {
            assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        // Same answer from the Newton path at p close to 2.
        let r = min_lp_interpolation(&int_freqs(2), &[0.0], &[Complex64::new(1.0, 0.0)], 2.5, &cfg())
            .unwrap();
        for c in &r.coeffs {
            assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_targets() {
        let r = min_lp_interpolation(&int_freqs(5), &[0.1, 0.7], &[Complex64::new(0.0, 0.0); 2], 3.0, &cfg())
            .unwrap();
        assert!(r.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rejects_overdetermined_and_inconsistent() {
        let pts = [0.0, 1.0];
        let v = [Complex64::new(1.0, 0.0); 2];
        assert!(min_lp_interpolation(&int_freqs(2), &pts, &v, 2.5, &cfg()).is_err());
        // Repeated point with different values has no solution.
        let pts = [0.3, 0.3];
        let v = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(matches!(
            min_lp_interpolation(&int_freqs(4), &pts, &v, 2.5, &cfg()),
            Err(Error::Infeasible { .. })
        ));
    }

    /// Gradient descent on `‖c‖_p^p` restricted to the affine solution set
    /// `c₂ + N w`, with `N` an orthonormal null-space basis from the SVD.
    fn affine_descent_oracle(
        freqs: &[f64],
        points: &[f64],
        targets: &[Complex64],
        p: f64,
        starts: usize,
        seed: u64,
    ) -> f64 {
        let phi = exp_matrix(freqs, points);
        let v = DVector::from_column_slice(targets);
        let svd = phi.clone().svd(true, true);
        let c2 = svd.solve(&v, 1e-12).unwrap();
        // Null space from a full SVD of the adjoint's complement.
        let full = phi.adjoint() * &phi;
        let eig = full.symmetric_eigen();
        let nf = freqs.len();
        let cols: Vec<DVector<Complex64>> = (0..nf)
            .filter(|&i| eig.eigenvalues[i].abs() < 1e-9)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obj = |c: &DVector<Complex64>| c.iter().map(|z| z.norm().powf(p)).sum::<f64>();
        let mut best = f64::INFINITY;
        for _ in 0..starts {
            let mut w: Vec<Complex64> = cols
                .iter()
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let build = |w: &[Complex64]| {
                let mut c = c2.clone();
                for (col, wi) in cols.iter().zip(w) {
                    c += col * *wi;
                }
                c
            };
            let mut step = 0.05;
            let mut cur = obj(&build(&w));
            for _ in 0..20_000 {
                let c = build(&w);
                let g = c.map(|z| if z.norm() == 0.0 { z } else { z * z.norm().powf(p - 2.0) * p });
                let gw: Vec<Complex64> = cols.iter().map(|col| col.dotc(&g)).collect();
                let trial: Vec<Complex64> = w.iter().zip(&gw).map(|(a, b)| a - b * step).collect();
                let tv = obj(&build(&trial));
                if tv < cur {
                    w = trial;
                    cur = tv;
                    step *= 1.2;
                } else {
                    step *= 0.5;
                    if step < 1e-16 {
                        break;
                    }
                }
            }
            best = best.min(cur);
        }
        best.powf(1.0 / p)
    }

    #[test]
    fn matches_affine_descent_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let pts: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let targets: Vec<Complex64> = (0..3)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let r = min_lp_interpolation(&int_freqs(8), &pts, &targets, 2.5, &cfg()).unwrap();
        assert!(r.kkt_residual < 1e-9);
        let oracle = affine_descent_oracle(&int_freqs(8), &pts, &targets, 2.5, 20, 7);
        assert!((r.objective - oracle).abs() < 1e-4, "{} vs {oracle}", r.objective);
    }

    #[test]
    fn objective_nonincreasing_in_degree() {
        let pts = [-2.0, -0.5, 1.0, 2.5];
        let targets = [Complex64::new(1.0, 0.0); 4];
        let mut last = f64::INFINITY;
        for k in 5..14 {
            let r = min_lp_interpolation(&int_freqs(k), &pts, &targets, 2.3, &cfg()).unwrap();
            assert!(r.objective <= last * (1.0 + 1e-9), "K={k}");
            last = r.objective;
        }
    }

    #[test]
    fn works_below_two() {
        let pts = [0.4, 1.9];
        let targets = [Complex64::new(1.0, 0.5), Complex64::new(-0.2, 1.0)];
        let r = min_lp_interpolation(&int_freqs(6), &pts, &targets, 1.5, &cfg()).unwrap();
        assert!(r.kkt_residual < 1e-9);
        let oracle = affine_descent_oracle(&int_freqs(6), &pts, &targets, 1.5, 10, 3);
        assert!(r.objective <= oracle + 1e-4);
    }
}
