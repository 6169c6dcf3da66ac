//! Polynomials `A(x) = Σ_{k=1}^K a_k e^{ikx}` with a small `ℓ_{2+μ}`
//! coefficient norm that stay within `μ` of 1 outside a set of measure `< μ`.
//!
//! Each degree is solved as a penalized problem
//! `min (1/p)‖a‖_p^p + (γ/2)·mean_j |A(x_j) - 1|²`, `p = 2 + μ`, with the
//! nodes `x_j` spread over one period minus a window centered at 0, and γ
//! swept upward from a warm start. Every candidate is certified on a fine
//! periodic grid with a Bernstein margin, so the reported bad-set measure
//! bounds the true one.
//!
//! Because the spectrum has no constant term, `∫A = 0` over a period, which
//! forces `‖a‖₂ ≥ (1-μ)·sqrt((2π-β)/β)` when `|A - 1| ≤ μ` off a set of
//! measure `β` per period. [`menshov_norm_lower_bound`] exposes this so that
//! callers can tell an impossible request from a solver shortfall.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{penalized_lp_fit, SolverConfig};
use crate::trigpoly::{coeff_norm, TrigPoly};

/// Fine-grid points per period per unit of degree used for certification.
pub const CERTIFY_POINTS_PER_DEGREE: usize = 256;
/// Bernstein margin allowed, as a fraction of μ.
pub const SLACK_FRACTION: f64 = 1e-3;
const MAX_CERTIFY_POINTS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenshovCertificate {
    #[serde(rename = "K")]
    pub k: usize,
    pub mu: f64,
    pub mu_achieved_norm: f64,
    pub mu_achieved_measure: f64,
    pub excluded_window: [f64; 2],
    /// Penalty nodes per unit length.
    pub constraint_grid_density: f64,
    /// Certification cells per unit length.
    pub certify_grid_density: f64,
    /// Smallest `‖a‖_{2+μ}` any degree-K polynomial with measure `< μ` on the
    /// interval can have.
    pub norm_lower_bound: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct MenshovResult {
    pub poly: TrigPoly,
    pub certificate: MenshovCertificate,
}

impl MenshovResult {
    /// The polynomial and certificate if both conditions hold, otherwise
    /// `BudgetExceeded` describing the best attempt.
    pub fn into_accepted(self) -> Result<(TrigPoly, MenshovCertificate)> {
        if self.certificate.accepted {
            Ok((self.poly, self.certificate))
        } else {
            let c = &self.certificate;
            Err(Error::BudgetExceeded(format!(
                "menshov polynomial for mu={} not found; best K={} norm={:.4} measure={:.4} (norm lower bound {:.4})",
                c.mu, c.k, c.mu_achieved_norm, c.mu_achieved_measure, c.norm_lower_bound
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MenshovOptions {
    pub k_start: usize,
    /// Largest degree tried; degrees double from `k_start`.
    pub k_max: usize,
    /// Penalty sweep `γ = gamma_start · 2^i` up to `gamma_max`.
    pub gamma_start: f64,
    pub gamma_max: f64,
}

impl Default for MenshovOptions {
    fn default() -> Self {
        MenshovOptions {
            k_start: 1,
            k_max: 256,
            gamma_start: 1.0,
            gamma_max: 4096.0,
        }
    }
}

/// Number of full periods the interval covers (at least 1 for the window
/// scaling, possibly 0 for the lower bound).
fn periods(interval: (f64, f64)) -> f64 {
    (interval.1 - interval.0) / (2.0 * PI)
}

/// Lower bound for `‖a‖_p`, `p = 2 + μ`, over degree-`k` polynomials with
/// frequencies `1..k` whose bad set on `interval` has measure `< μ`.
///
/// Only whole periods inside the interval constrain the per-period bad
/// measure; on an interval shorter than a period the bound is 0.
pub fn menshov_norm_lower_bound(mu: f64, k: usize, interval: (f64, f64)) -> f64 {
    let whole = periods(interval).floor();
    if whole < 1.0 || mu >= 1.0 || k == 0 {
        return 0.0;
    }
    let beta = (mu / whole).min(2.0 * PI);
    let l2 = (1.0 - mu) * ((2.0 * PI - beta) / beta).sqrt();
    let p = 2.0 + mu;
    (k as f64).powf(1.0 / p - 0.5) * l2
}

/// Smallest degree at which [`menshov_norm_lower_bound`] drops below `μ`,
/// or `None` if that exceeds `limit`.
pub fn menshov_min_degree(mu: f64, interval: (f64, f64), limit: usize) -> Option<usize> {
    let b1 = menshov_norm_lower_bound(mu, 1, interval);
    if b1 < mu {
        return Some(1);
    }
    // The bound is K^{1/p - 1/2} · b1; invert and check the neighbors.
    let p = 2.0 + mu;
    let k = (mu / b1).powf(1.0 / (1.0 / p - 0.5)).ceil();
    if !k.is_finite() || k > limit as f64 {
        return None;
    }
    let mut k = (k as usize).max(1);
    while k > 1 && menshov_norm_lower_bound(mu, k - 1, interval) < mu {
        k -= 1;
    }
    while menshov_norm_lower_bound(mu, k, interval) >= mu {
        k += 1;
    }
    (k <= limit).then_some(k)
}

/// Width of the window excluded in each period.
pub fn window_width(mu: f64, interval: (f64, f64)) -> f64 {
    mu / (2.0 * periods(interval).max(1.0))
}

/// Penalty nodes: `4K` midpoints of an equal partition of the period minus
/// the window `(-m/2, m/2)`.
fn nodes(k: usize, window: f64) -> Vec<f64> {
    let j = 4 * k;
    let span = 2.0 * PI - window;
    (0..j)
        .map(|i| 0.5 * window + span * (i as f64 + 0.5) / j as f64)
        .collect()
}

/// Values of `A` at `-π + j·2π/M`, `j = 0..M`, via one inverse FFT.
fn periodic_samples(a: &TrigPoly, m: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (f, c) in a.terms() {
        let k = f.round() as i64;
        let idx = k.rem_euclid(m as i64) as usize;
        buf[idx] += c * Complex64::from_polar(1.0, -PI * k as f64);
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Certified measure of `{x ∈ interval : |A(x) - 1| > μ}` for a polynomial
/// with integer frequencies in `1..=K`, together with the number of cells
/// per period used.
///
/// The period is split into `M` cells around the sample points. A cell
/// counts as bad when its center value misses 1 by more than `μ` minus the
/// Bernstein margin `(h/2)·K·‖A‖_∞`, where
/// `‖A‖_∞ ≤ max_j |A(x_j)| / (1 - K h / 2)`. `M` starts at
/// `points_per_degree · K` and is refined until the margin is at most
/// `SLACK_FRACTION · μ`. Cells are tiled over the interval by periodicity;
/// any cell touching the interval is counted.
pub fn certify_measure(
    a: &TrigPoly,
    mu: f64,
    interval: (f64, f64),
    points_per_degree: usize,
) -> (f64, usize) {
    let k = a.max_freq().unwrap_or(1.0).round().max(1.0) as usize;
    let mut m = (points_per_degree.max(8) * k).next_power_of_two();
    let (vals, slack, h) = loop {
        let h = 2.0 * PI / m as f64;
        let vals = periodic_samples(a, m);
        let grid_max = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let kh2 = k as f64 * h / 2.0;
        let slack = kh2 * grid_max / (1.0 - kh2);
        if slack <= SLACK_FRACTION * mu || m >= MAX_CERTIFY_POINTS {
            break (vals, slack, h);
        }
        let need = (2.0 * m as f64 * slack / (SLACK_FRACTION * mu)).ceil() as usize;
        m = need.next_power_of_two().min(MAX_CERTIFY_POINTS);
    };
    let bad: Vec<bool> = vals.iter().map(|z| (z - 1.0).norm() > mu - slack).collect();
    let (lo, hi) = interval;
    let first = ((lo + PI) / h - 0.5).ceil() as i64;
    let last = ((hi + PI) / h + 0.5).floor() as i64;
    let count = (first..=last)
        .filter(|j| bad[j.rem_euclid(m as i64) as usize])
        .count();
    (count as f64 * h, m)
}

fn certificate_for(
    a: &TrigPoly,
    mu: f64,
    interval: (f64, f64),
    window: f64,
) -> Result<MenshovCertificate> {
    let k = a.len();
    let norm = coeff_norm(a, 2.0 + mu)?;
    let (measure, m) = certify_measure(a, mu, interval, CERTIFY_POINTS_PER_DEGREE);
    Ok(MenshovCertificate {
        k,
        mu,
        mu_achieved_norm: norm,
        mu_achieved_measure: measure,
        excluded_window: [-0.5 * window, 0.5 * window],
        constraint_grid_density: 4.0 * k as f64 / (2.0 * PI),
        certify_grid_density: m as f64 / (2.0 * PI),
        norm_lower_bound: menshov_norm_lower_bound(mu, k, interval),
        accepted: norm < mu && measure < mu,
    })
}

/// `max(norm, measure) / μ`; below 1 means accepted.
fn score(c: &MenshovCertificate) -> f64 {
    c.mu_achieved_norm.max(c.mu_achieved_measure) / c.mu
}

/// Best certified polynomial of exact degree `k` over the γ sweep.
pub fn solve_degree(
    interval: (f64, f64),
    mu: f64,
    k: usize,
    opts: &MenshovOptions,
    cfg: &SolverConfig,
) -> Result<MenshovResult> {
    let window = window_width(mu, interval);
    let xs = nodes(k, window);
    let targets = vec![Complex64::new(1.0, 0.0); xs.len()];
    let freqs: Vec<f64> = (1..=k).map(|f| f as f64).collect();
    let mut warm: Option<Vec<Complex64>> = None;
    let mut best: Option<MenshovResult> = None;
    let mut gamma = opts.gamma_start;
    while gamma <= opts.gamma_max * (1.0 + 1e-12) {
        let fit = penalized_lp_fit(&freqs, &xs, &targets, 2.0 + mu, gamma, warm.as_deref(), cfg)?;
        let poly = TrigPoly::new(freqs.clone(), fit.coeffs.clone())?;
        let cert = certificate_for(&poly, mu, interval, window)?;
        log::debug!(
            "menshov K={k} gamma={gamma}: norm {:.4} measure {:.4}",
            cert.mu_achieved_norm,
            cert.mu_achieved_measure
        );
        let better = best.as_ref().is_none_or(|b| score(&cert) < score(&b.certificate));
        let done = cert.accepted;
        let norm_exceeded = cert.mu_achieved_norm >= mu;
        if better {
            best = Some(MenshovResult { poly, certificate: cert });
        }
        // Larger γ only raises the norm; once it is over budget, stop.
        if done || norm_exceeded {
            break;
        }
        warm = Some(fit.coeffs);
        gamma *= 2.0;
    }
    best.ok_or_else(|| Error::invalid("empty penalty sweep: gamma_start exceeds gamma_max"))
}

/// Doubles the degree from `opts.k_start` until a certified polynomial is
/// found or `opts.k_max` is passed. The returned result carries
/// `accepted = false` and the best attempt if none was found.
pub fn build_menshov(
    interval: (f64, f64),
    mu: f64,
    opts: &MenshovOptions,
    cfg: &SolverConfig,
) -> Result<MenshovResult> {
    cfg.validate()?;
    let (lo, hi) = interval;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("interval must be a nondegenerate segment"));
    }
    if window_width(mu, interval) >= 2.0 * PI {
        return Err(Error::invalid("mu too large: the excluded window covers a full period"));
    }
    if opts.k_start == 0 || opts.k_max < opts.k_start {
        return Err(Error::invalid("need 1 ≤ k_start ≤ k_max"));
    }
    if !(opts.gamma_start > 0.0) || opts.gamma_max < opts.gamma_start {
        return Err(Error::invalid("need 0 < gamma_start ≤ gamma_max"));
    }
    let mut best: Option<MenshovResult> = None;
    let mut k = opts.k_start;
    while k <= opts.k_max {
        let r = solve_degree(interval, mu, k, opts, cfg)?;
        let accepted = r.certificate.accepted;
        if best.as_ref().is_none_or(|b| score(&r.certificate) < score(&b.certificate)) {
            best = Some(r);
        }
        if accepted {
            break;
        }
        k *= 2;
    }
    let best = best.expect("at least one degree is tried");
    if !best.certificate.accepted {
        log::warn!(
            "menshov mu={mu}: no certified polynomial up to K={}; best K={} norm {:.4} measure {:.4}",
            opts.k_max,
            best.certificate.k,
            best.certificate.mu_achieved_norm,
            best.certificate.mu_achieved_measure
        );
    }
    Ok(best)
}
