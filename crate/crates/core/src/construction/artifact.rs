//! On-disk form of a construction run, readable without rerunning it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Construction, ConstructionConfig, StepReport};
use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, WeightSamples};
use crate::io::{
    read_lambdas, read_sampled, read_trigpoly, read_weight, write_lambdas, write_sampled, write_trigpoly,
    write_weight,
};
use crate::trigpoly::TrigPoly;

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepsFile {
    version: u32,
    config: ConstructionConfig,
    halted_at: Option<usize>,
    n_lambdas: usize,
    #[serde(with = "crate::io::nonfinite")]
    separation: f64,
    sparsity_violation: Option<usize>,
    steps: Vec<StepReport>,
}

/// A construction read back from disk.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub config: ConstructionConfig,
    pub grid: Grid,
    pub lambdas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub w: WeightSamples,
    pub g: SampledFunction,
    pub steps: Vec<StepReport>,
    /// `Q_k` and `f_k` for every appended step, in order.
    pub q: Vec<TrigPoly>,
    pub f: Vec<SampledFunction>,
    pub halted_at: Option<usize>,
}

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let p = dir.join(name);
    let f = File::create(&p)?;
    written.push(p);
    Ok(BufWriter::new(f))
}

/// Writes `lambda.csv`, `weight.csv`, `generator.csv`, `steps.json` and
/// `q_k.csv`/`f_k.csv` per appended step. Returns the paths written.
pub fn write_artifact(c: &Construction, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write_lambdas(
        &c.spectrum.lambdas,
        &c.spectrum.epsilons,
        create(dir, "lambda.csv", &mut written)?,
    )?;
    write_weight(&c.weight.w, create(dir, "weight.csv", &mut written)?)?;
    write_sampled(&c.generator.g, create(dir, "generator.csv", &mut written)?)?;
    for s in &c.weight.steps {
        write_trigpoly(&s.q, create(dir, &format!("q_{}.csv", s.k), &mut written)?)?;
        write_sampled(&s.f, create(dir, &format!("f_{}.csv", s.k), &mut written)?)?;
    }
    let file = StepsFile {
        version: ARTIFACT_VERSION,
        config: c.config.clone(),
        halted_at: c.halted_at,
        n_lambdas: c.spectrum.lambdas.len(),
        separation: c.spectrum.separation,
        sparsity_violation: c.spectrum.first_sparsity_violation(),
        steps: c.steps.clone(),
    };
    let mut out = create(dir, "steps.json", &mut written)?;
    serde_json::to_writer_pretty(&mut out, &file)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(written)
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(dir.join(name))?))
}

pub fn load_artifact(dir: &Path) -> Result<Artifact> {
    let required = ["steps.json", "lambda.csv", "weight.csv", "generator.csv"];
    let missing: Vec<String> = required
        .iter()
        .filter(|n| !dir.join(n).is_file())
        .map(|n| n.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    let file: StepsFile = serde_json::from_reader(open(dir, "steps.json")?)?;
    if file.version != ARTIFACT_VERSION {
        return Err(Error::Parse(format!(
            "artifact version {} is not supported (expected {ARTIFACT_VERSION})",
            file.version
        )));
    }
    let grid = file.config.grid.build()?;
    let appended: Vec<usize> = file.steps.iter().filter(|s| s.appended).map(|s| s.k).collect();
    let missing: Vec<String> = appended
        .iter()
        .flat_map(|k| [format!("q_{k}.csv"), format!("f_{k}.csv")])
        .filter(|n| !dir.join(n).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    let (lambdas, epsilons) = read_lambdas(open(dir, "lambda.csv")?)?;
    let w = read_weight(&grid, open(dir, "weight.csv")?)?;
    let g = read_sampled(&grid.dual(), open(dir, "generator.csv")?)?;
    let mut q = Vec::new();
    let mut f = Vec::new();
    for k in appended {
        q.push(read_trigpoly(open(dir, &format!("q_{k}.csv"))?)?);
        f.push(read_sampled(&grid, open(dir, &format!("f_{k}.csv"))?)?);
    }
    Ok(Artifact {
        config: file.config,
        grid,
        lambdas,
        epsilons,
        w,
        g,
        steps: file.steps,
        q,
        f,
        halted_at: file.halted_at,
    })
}
