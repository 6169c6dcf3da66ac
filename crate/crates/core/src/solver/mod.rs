//! Convex kernels: ℓ_q-ball projection, ℓ_p-minimal interpolation,
//! ball-constrained weighted least squares, and hard-exclusion IRLS.
//!
//! Complex unknowns are handled in realified form where second-order
//! information is needed; all norms are taken on complex moduli.

mod interp;
mod irls;
mod lsq;
mod penalized;
mod projection;

pub use interp::{min_lp_interpolation, InterpolationResult};
pub use irls::{irls_measure_fit, IrlsResult};
pub use lsq::{constrained_lsq, LsqSolution, SynthesisSystem};
pub use penalized::{penalized_lp_fit, PenalizedFit};
pub use projection::lq_ball_projection;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    Fixed,
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative stopping tolerance.
    pub tolerance: f64,
    pub step_rule: StepRule,
    pub seed: u64,
    /// Record per-iteration rows in the returned trace.
    #[serde(default)]
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 20_000,
            tolerance: 1e-10,
            step_rule: StepRule::Backtracking,
            seed: 0,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.max_iterations == 0 {
            return Err(crate::Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(crate::Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub constraint_violation: f64,
}

pub fn write_trace<W: std::io::Write>(rows: &[TraceRow], out: W) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "objective", "constraint_violation"])?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            crate::io::fmt_f64(r.objective),
            crate::io::fmt_f64(r.constraint_violation),
        ])?;
    }
    w.flush()?;
    Ok(())
}
