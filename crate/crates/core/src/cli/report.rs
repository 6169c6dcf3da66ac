//! `qflab report`: a summary of an artifact and, when present, of its
//! verification report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{write_json, write_manifest, Table};
use crate::cells;
use crate::construction::{load_artifact, Artifact};
use crate::error::{Error, Result};
use crate::verify::{Check, VerifyReport};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepSummary {
    pub k: usize,
    pub f_id: String,
    pub delta: f64,
    pub n_k: usize,
    pub d: u64,
    #[serde(rename = "K")]
    pub big_k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mu: f64,
    pub norm_ok: bool,
    pub start_ok: bool,
    pub ratio_ok: bool,
    pub measure_ok: bool,
    pub exceptional_ok: bool,
    pub error_ok: bool,
    pub appended: bool,
}

impl StepSummary {
    pub fn all_pass(&self) -> bool {
        self.norm_ok && self.start_ok && self.ratio_ok && self.measure_ok && self.exceptional_ok && self.error_ok
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub n_lambdas: usize,
    pub lambda_max: f64,
    pub min_gap: f64,
    /// 0-based index of the first failing ratio, if any.
    pub sparsity_violation: Option<usize>,
    pub halted_at: Option<usize>,
    pub steps: Vec<StepSummary>,
    /// Copied from the verification report; empty without one.
    pub checks: Vec<Check>,
    pub verify_report: Option<String>,
}

pub fn build_summary(art: &Artifact, verify: Option<&VerifyReport>, verify_path: Option<&Path>) -> Summary {
    let spectrum = crate::construction::SpectrumSeq {
        lambdas: art.lambdas.clone(),
        epsilons: art.epsilons.clone(),
        separation: 0.0,
    };
    Summary {
        n_lambdas: art.lambdas.len(),
        lambda_max: art.lambdas.last().copied().unwrap_or(0.0),
        min_gap: art.lambdas.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        sparsity_violation: spectrum.first_sparsity_violation(),
        halted_at: art.halted_at,
        steps: art
            .steps
            .iter()
            .map(|s| StepSummary {
                k: s.k,
                f_id: s.f_id.clone(),
                delta: s.delta,
                n_k: s.n_k,
                d: s.d,
                big_k: s.plan.k,
                n: s.plan.n,
                mu: s.plan.mu,
                norm_ok: s.conditions.norm_ok,
                start_ok: s.conditions.start_ok,
                ratio_ok: s.conditions.ratio_ok,
                measure_ok: s.conditions.measure_ok,
                exceptional_ok: s.exceptional_ok,
                error_ok: s.error_ok,
                appended: s.appended,
            })
            .collect(),
        checks: verify.map(|r| r.checks.clone()).unwrap_or_default(),
        verify_report: verify_path.map(|p| p.display().to_string()),
    }
}

fn mark(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn summary_text(s: &Summary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "terms        {}", s.n_lambdas);
    let _ = writeln!(t, "lambda_max   {:.6e}", s.lambda_max);
    let _ = writeln!(t, "min gap      {:.6}", s.min_gap);
    let _ = writeln!(
        t,
        "sparsity     {}",
        match s.sparsity_violation {
            None => "pass".to_string(),
            Some(i) => format!("FAIL at n={}", i + 1),
        }
    );
    if let Some(k) = s.halted_at {
        let _ = writeln!(t, "halted at    step {k}");
    }
    let _ = writeln!(t);
    let _ = writeln!(
        t,
        "{:>3} {:<22} {:>5} {:>12} {:>4} {:>4} {:>10}  {:<4} {:<4} {:<4} {:<4} {:<4} {:<4}",
        "k", "f", "n_k", "d", "K", "N", "mu", "norm", "start", "ratio", "meas", "E_k", "err"
    );
    for r in &s.steps {
        let _ = writeln!(
            t,
            "{:>3} {:<22} {:>5} {:>12} {:>4} {:>4} {:>10.3e}  {:<4} {:<4} {:<4} {:<4} {:<4} {:<4}",
            r.k,
            r.f_id,
            r.n_k,
            r.d,
            r.big_k,
            r.n,
            r.mu,
            mark(r.norm_ok),
            mark(r.start_ok),
            mark(r.ratio_ok),
            mark(r.measure_ok),
            mark(r.exceptional_ok),
            mark(r.error_ok)
        );
    }
    if !s.checks.is_empty() {
        let _ = writeln!(t);
        for c in &s.checks {
            let _ = writeln!(t, "{:<20} {}  {}", c.name, mark(c.pass), c.detail);
        }
    }
    t
}

/// Looks for `report.json` in `<dir>/verify`, then in `dir`.
fn find_verify_report(dir: &Path) -> Result<Option<(PathBuf, VerifyReport)>> {
    for p in [dir.join("verify").join("report.json"), dir.join("report.json")] {
        if p.is_file() {
            let text = std::fs::read_to_string(&p)?;
            let rep: VerifyReport = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            return Ok(Some((p, rep)));
        }
    }
    Ok(None)
}

pub(super) fn report(artifact_dir: &Path, out_dir: Option<&Path>) -> Result<bool> {
    let art = load_artifact(artifact_dir)?;
    let found = find_verify_report(artifact_dir)?;
    let out = out_dir.map(Path::to_path_buf).unwrap_or_else(|| artifact_dir.join("report"));
    std::fs::create_dir_all(&out)?;
    let summary = build_summary(&art, found.as_ref().map(|f| &f.1), found.as_ref().map(|f| f.0.as_path()));
    let mut files = Vec::new();

    let p = out.join("summary.json");
    write_json(&p, &summary)?;
    files.push(p);
    let text = summary_text(&summary);
    let p = out.join("summary.txt");
    std::fs::write(&p, &text)?;
    files.push(p);

    let mut t = Table::new(&["n", "lambda_n", "lambda_next", "ratio", "one_plus_eps", "holds"]);
    for (i, (w, e)) in art.lambdas.windows(2).zip(&art.epsilons).enumerate() {
        let r = w[1] / w[0];
        t.row(cells![i + 1, w[0], w[1], r, 1.0 + e, r > 1.0 + e]);
    }
    files.push(t.write(&out.join("ratio_curve.csv"))?);

    if let Some((_, rep)) = &found {
        let mut t = Table::new(&["source", "size", "min_eig", "max_eig"]);
        for r in rep.bessel.iter().flatten() {
            t.row(cells!["bessel", r.size, f64::NAN, r.max_eig]);
        }
        for r in rep.frame.iter().flatten() {
            t.row(cells!["frame", r.size, r.min_eig, r.max_eig]);
        }
        files.push(t.write(&out.join("eigen_curve.csv"))?);
        let mut t = Table::new(&["f_id", "q", "section_size", "radius", "achieved_error", "ratio", "reached"]);
        for r in rep.qf.iter().flatten() {
            t.row(cells![r.f_id.clone(), r.q, r.section_size, r.radius, r.achieved_error, r.ratio, r.reached]);
        }
        files.push(t.write(&out.join("cq.csv"))?);
    }

    #[derive(Serialize)]
    struct ReportRun {
        artifact_dir: String,
    }
    write_manifest(&out, "report", &ReportRun { artifact_dir: artifact_dir.display().to_string() }, &files)?;
    print!("{text}");
    Ok(true)
}
