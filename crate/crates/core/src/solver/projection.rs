use num_complex::Complex64;

use crate::trigpoly::lq_norm;

/// Euclidean projection of `c` onto `{z : ‖z‖_q ≤ radius}` for `q > 2`.
///
/// Phases are kept; the moduli `y` are mapped to `x_i(θ)` solving
/// `x + θ q x^{q-1} = y_i`, and the multiplier θ is the root of
/// `Σ x_i(θ)^q = radius^q`, found by safeguarded Newton inside a shrinking
/// bracket. The returned point is taken from the feasible side of the
/// bracket.
pub fn lq_ball_projection(c: &[Complex64], q: f64, radius: f64) -> Vec<Complex64> {
    assert!(q > 2.0, "ℓ_q-ball projection needs q > 2");
    let radius = radius.max(0.0);
    if radius == 0.0 {
        return vec![Complex64::new(0.0, 0.0); c.len()];
    }
    let norm = lq_norm(c, q).expect("q > 2");
    if norm <= radius {
        return c.to_vec();
    }
    // Work in the unit ball.
    let y: Vec<f64> = c.iter().map(|z| z.norm() / radius).collect();
    let ymax = y.iter().cloned().fold(0.0, f64::max);

    let mut x = y.clone();
    let mut dx = vec![0.0; y.len()];
    let eval = |theta: f64, x: &mut [f64], dx: &mut [f64]| -> (f64, f64) {
        let kappa = theta * q;
        let mut phi = -1.0;
        let mut dphi = 0.0;
        for ((&yi, xi), di) in y.iter().zip(x.iter_mut()).zip(dx.iter_mut()) {
            let xv = shrink(yi, kappa, q);
            *xi = xv;
            if xv > 0.0 {
                let xq1 = xv.powf(q - 1.0);
                let d = -q * xq1 / (1.0 + kappa * (q - 1.0) * xv.powf(q - 2.0));
                *di = d;
                phi += xq1 * xv;
                dphi += q * xq1 * d;
            } else {
                *di = 0.0;
            }
        }
        (phi, dphi)
    };

    // φ(0) > 0 and φ decreases to -1 as θ grows, so doubling terminates.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64 / ymax.powf(q - 2.0).max(1e-300);
    while eval(hi, &mut x, &mut dx).0 > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (phi, dphi) = eval(theta, &mut x, &mut dx);
        if phi > 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi || phi.abs() < 1e-15 {
            break;
        }
        let newton = theta - phi / dphi;
        theta = if dphi < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (phi, _) = eval(theta, &mut x, &mut dx);
    if phi > 0.0 {
        // Round-off leaves the point a hair outside; pull it onto the sphere.
        let s = (1.0 + phi).powf(-1.0 / q);
        x.iter_mut().for_each(|xi| *xi *= s);
    }
    c.iter()
        .zip(&x)
        .map(|(z, xi)| {
            let m = z.norm();
            if m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z * (xi * radius / m)
            }
        })
        .collect()
}

/// Root of `x + κ x^{q-1} = y` on `[0, y]`. The left side is convex and
/// increasing, so Newton from `x = y` decreases monotonically to the root.
fn shrink(y: f64, kappa: f64, q: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if kappa == 0.0 {
        return y;
    }
    // Start from the smaller of y and the root of κ x^{q-1} = y; both are
    // upper bounds for the root.
    let mut x = y.min((y / kappa).powf(1.0 / (q - 1.0)));
    for _ in 0..100 {
        let xq2 = x.powf(q - 2.0);
        let g = x + kappa * xq2 * x - y;
        let dg = 1.0 + kappa * (q - 1.0) * xq2;
        let next = (x - g / dg).max(0.0);
        if (x - next).abs() <= 1e-16 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}
