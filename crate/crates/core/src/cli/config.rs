//! Versioned TOML run configurations. Unknown keys are rejected at every
//! level.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::construction::ConstructionConfig;
use crate::error::{Error, Result};
use crate::solver::SolverConfig;
use crate::verify::VerifyOptions;

pub const CONFIG_VERSION: u32 = 1;

/// Solver settings used by `construct` unless the file overrides them.
pub fn construction_solver() -> SolverConfig {
    SolverConfig { max_iterations: 200, tolerance: 1e-8, ..SolverConfig::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructFile {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "construction_solver")]
    pub solver: SolverConfig,
    #[serde(default)]
    pub construction: ConstructionConfig,
}

impl Default for ConstructFile {
    fn default() -> Self {
        ConstructFile {
            version: CONFIG_VERSION,
            seed: 0,
            solver: construction_solver(),
            construction: ConstructionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifyOptions,
}

impl Default for VerifyFile {
    fn default() -> Self {
        VerifyFile { version: CONFIG_VERSION, seed: 0, verify: VerifyOptions::default() }
    }
}

/// Solver-only file for `menshov`, `landau`, `block` and `approx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFile {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

trait Versioned {
    fn version(&self) -> u32;
}

impl Versioned for ConstructFile {
    fn version(&self) -> u32 {
        self.version
    }
}

impl Versioned for VerifyFile {
    fn version(&self) -> u32 {
        self.version
    }
}

impl Versioned for SolverFile {
    fn version(&self) -> u32 {
        self.version
    }
}

fn parse<T: DeserializeOwned + Versioned>(text: &str, origin: &str) -> Result<T> {
    let cfg: T = toml::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))?;
    if cfg.version() != CONFIG_VERSION {
        return Err(Error::Parse(format!(
            "{origin}: config version {} is not supported (expected {CONFIG_VERSION})",
            cfg.version()
        )));
    }
    Ok(cfg)
}

fn load<T: DeserializeOwned + Versioned + Default>(spec: Option<&str>) -> Result<T> {
    match spec {
        None | Some("default") => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| Error::Parse(format!("cannot read config {path}: {e}")))?;
            parse(&text, path)
        }
    }
}

pub fn load_construct(spec: Option<&str>) -> Result<ConstructFile> {
    let cfg: ConstructFile = load(spec)?;
    cfg.construction.validate()?;
    cfg.solver.validate()?;
    Ok(cfg)
}

pub fn load_verify(spec: Option<&str>) -> Result<VerifyFile> {
    let cfg: VerifyFile = load(spec)?;
    cfg.verify.solver.validate()?;
    Ok(cfg)
}

impl Default for SolverFile {
    fn default() -> Self {
        SolverFile { version: CONFIG_VERSION, seed: 0, solver: SolverConfig::default() }
    }
}

pub fn load_solver(spec: Option<&str>) -> Result<SolverFile> {
    let cfg: SolverFile = load(spec)?;
    cfg.solver.validate()?;
    Ok(cfg)
}

pub fn parse_construct(text: &str) -> Result<ConstructFile> {
    parse(text, "<inline>")
}
