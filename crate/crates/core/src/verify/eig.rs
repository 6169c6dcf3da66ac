//! Extreme eigenvalues of Hermitian positive semidefinite matrices by power
//! and shifted inverse iteration.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn start_vector(n: usize, seed: u64) -> DVector<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

fn rayleigh(g: &DMatrix<Complex64>, v: &DVector<Complex64>) -> (f64, f64) {
    let gv = g * v;
    let rho = v.dotc(&gv).re;
    let r = (gv - v * Complex64::new(rho, 0.0)).norm();
    (rho, r)
}

/// Largest eigenvalue; stops once the residual `‖Gv - ρv‖` is below
/// `tol·ρ`.
pub fn max_eigenvalue(g: &DMatrix<Complex64>, tol: f64, max_iter: usize, seed: u64) -> EigEstimate {
    let n = g.nrows();
    if n == 0 {
        return EigEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let mut v = start_vector(n, seed);
    let mut rho = 0.0;
    for it in 1..=max_iter {
        let w = g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return EigEstimate { value: 0.0, iterations: it, converged: true };
        }
        v = w / Complex64::new(norm, 0.0);
        let (r, res) = rayleigh(g, &v);
        rho = r;
        if res <= tol * rho.abs() {
            return EigEstimate { value: rho, iterations: it, converged: true };
        }
    }
    EigEstimate { value: rho, iterations: max_iter, converged: false }
}

/// Smallest eigenvalue of a positive semidefinite `G`, by inverse iteration
/// on `G + τI` with `τ` the smallest power-of-ten multiple of
/// `1e-14·max_eig` that admits a Cholesky factor.
pub fn min_eigenvalue(g: &DMatrix<Complex64>, max_eig: f64, tol: f64, max_iter: usize, seed: u64) -> EigEstimate {
    let n = g.nrows();
    if n == 0 {
        return EigEstimate { value: 0.0, iterations: 0, converged: true };
    }
    if n == 1 {
        return EigEstimate { value: g[(0, 0)].re, iterations: 0, converged: true };
    }
    let scale = max_eig.abs().max(f64::MIN_POSITIVE);
    let mut tau = 1e-14 * scale;
    let chol = loop {
        let shifted = g + DMatrix::from_diagonal_element(n, n, Complex64::new(tau, 0.0));
        if let Some(c) = Cholesky::new(shifted) {
            break c;
        }
        tau *= 10.0;
        if tau > scale {
            return EigEstimate { value: 0.0, iterations: 0, converged: false };
        }
    };
    let mut v = start_vector(n, seed);
    let mut rho = f64::INFINITY;
    for it in 1..=max_iter {
        let w = chol.solve(&v);
        let norm = w.norm();
        v = w / Complex64::new(norm, 0.0);
        let (r, res) = rayleigh(g, &v);
        let change = (r - rho).abs();
        rho = r;
        // Absolute accuracy near zero is limited by the scale of G.
        if res <= tol * rho.abs().max(1e-12 * scale) || change <= 1e-15 * scale {
            return EigEstimate { value: rho, iterations: it, converged: true };
        }
    }
    EigEstimate { value: rho, iterations: max_iter, converged: false }
}
