//! TOML documents describing runs and parameter sweeps.
//!
//! The document layer stays deliberately dumb: flat key/value structs that
//! mirror the file format one-to-one, with every omitted key `None`. All
//! interpretation — defaults, model/profile name parsing, invariant checks —
//! happens in [`RunDocument::resolve`], which hands back a validated
//! [`RunConfig`]. Rendering a document and parsing it back is lossless, so
//! manifests can echo exactly the configuration a run used.

use crate::model::ModelKind;
use crate::stepper::{
    Corrector, RunConfig, DEFAULT_CORRECTOR_MAX_ITERS, DEFAULT_CORRECTOR_TOLERANCE,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Malformed TOML or keys outside the schema (the message names the
    /// offending key).
    #[error("{0}")]
    Parse(String),
    /// Well-formed document whose values do not describe a valid run.
    #[error("{0}")]
    Invalid(String),
}

/// A single-run document. Only `model`, `f0`, and `v0` are mandatory; every
/// other key falls back to the solver defaults when omitted (with `t_max`
/// derived from the predicted blow-up time where possible).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub model: String,
    pub f0: f64,
    pub v0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_outer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl RunDocument {
    /// Document with only the mandatory keys set; everything else defaults.
    pub fn new(model: impl Into<String>, f0: f64, v0: f64) -> Self {
        Self {
            model: model.into(),
            f0,
            v0,
            dr: None,
            dt: None,
            r_max: None,
            profile: None,
            boundary_outer: None,
            t_max: None,
            stop_fraction: None,
            snapshot_stride: None,
            corrector_tolerance: None,
            corrector_max_iters: None,
            output_dir: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("a flat key/value document always serializes")
    }

    /// Fully-populated document echoing a resolved configuration, for
    /// manifests. A fixed-iteration corrector is echoed as tolerance 0 (the
    /// loop then always runs to its iteration cap, which is what fixed
    /// iterations do).
    pub fn from_config(config: &RunConfig, output_dir: Option<&Path>) -> Self {
        let (tolerance, max_iters) = match config.corrector {
            Corrector::Tolerance {
                tolerance,
                max_iterations,
            } => (tolerance, max_iterations),
            Corrector::FixedIterations(n) => (0.0, n),
        };
        Self {
            model: config.model.to_string(),
            f0: config.f0,
            v0: config.v0,
            dr: Some(config.dr),
            dt: Some(config.dt),
            r_max: Some(config.r_max),
            profile: Some(config.profile.to_string()),
            boundary_outer: Some(config.boundary_outer.to_string()),
            t_max: Some(config.t_max),
            stop_fraction: Some(config.stop_fraction),
            snapshot_stride: Some(config.snapshot_stride),
            corrector_tolerance: Some(tolerance),
            corrector_max_iters: Some(max_iters),
            output_dir: output_dir.map(|p| p.display().to_string()),
        }
    }

    /// Interpret the document: parse names, fill defaults, validate, and
    /// return the run configuration plus the requested output directory.
    pub fn resolve(&self) -> Result<(RunConfig, Option<PathBuf>), ConfigError> {
        let model: ModelKind = self.model.parse().map_err(ConfigError::Invalid)?;

        let mut config = if self.v0 == 0.0 {
            let t_max = self.t_max.ok_or_else(|| {
                ConfigError::Invalid(
                    "t_max is required when v0 = 0: there is no blow-up time to derive it from"
                        .to_string(),
                )
            })?;
            RunConfig::stationary(model, self.f0, t_max)
        } else {
            RunConfig::new(model, self.f0, self.v0)
        }
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

        if let Some(profile) = &self.profile {
            config = config.with_profile(profile.parse().map_err(ConfigError::Invalid)?);
        }
        if let Some(boundary) = &self.boundary_outer {
            config.boundary_outer = boundary.parse().map_err(ConfigError::Invalid)?;
        }
        let (r_max, dr) = (
            self.r_max.unwrap_or(config.r_max),
            self.dr.unwrap_or(config.dr),
        );
        config = config.with_grid(r_max, dr);
        if let Some(dt) = self.dt {
            config = config.with_dt(dt);
        }
        if let Some(t_max) = self.t_max {
            config = config.with_t_max(t_max);
        }
        if let Some(stop_fraction) = self.stop_fraction {
            config = config.with_stop_fraction(stop_fraction);
        }
        if let Some(stride) = self.snapshot_stride {
            config = config.with_snapshot_stride(stride);
        }
        if self.corrector_tolerance.is_some() || self.corrector_max_iters.is_some() {
            config = config.with_corrector(Corrector::Tolerance {
                tolerance: self
                    .corrector_tolerance
                    .unwrap_or(DEFAULT_CORRECTOR_TOLERANCE),
                max_iterations: self.corrector_max_iters.unwrap_or(DEFAULT_CORRECTOR_MAX_ITERS),
            });
        }

        config
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok((config, self.output_dir.as_ref().map(PathBuf::from)))
    }
}

/// One (f₀, v₀) pair inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCase {
    pub f0: f64,
    pub v0: f64,
}

/// A sweep document: shared settings at the top level (same keys as a run
/// document minus `f0`/`v0`) and a `[[cases]]` table per parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDocument {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_outer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    // Array-of-tables must come after the scalar keys in rendered TOML.
    #[serde(default)]
    pub cases: Vec<SweepCase>,
}

impl SweepDocument {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("a flat document with case tables always serializes")
    }

    /// One run document per case, shared settings applied to each.
    fn case_document(&self, case: SweepCase) -> RunDocument {
        RunDocument {
            model: self.model.clone(),
            f0: case.f0,
            v0: case.v0,
            dr: self.dr,
            dt: self.dt,
            r_max: self.r_max,
            profile: self.profile.clone(),
            boundary_outer: self.boundary_outer.clone(),
            t_max: self.t_max,
            stop_fraction: self.stop_fraction,
            snapshot_stride: self.snapshot_stride,
            corrector_tolerance: self.corrector_tolerance,
            corrector_max_iters: self.corrector_max_iters,
            output_dir: None,
        }
    }

    /// Resolve every case to a validated run configuration, in document
    /// order. A sweep with no cases is a configuration error.
    pub fn resolve(&self) -> Result<(Vec<RunConfig>, Option<PathBuf>), ConfigError> {
        if self.cases.is_empty() {
            return Err(ConfigError::Invalid(
                "sweep has no cases: add at least one [[cases]] table with f0 and v0".to_string(),
            ));
        }
        let mut configs = Vec::with_capacity(self.cases.len());
        for case in &self.cases {
            let (config, _) = self.case_document(*case).resolve()?;
            configs.push(config);
        }
        Ok((configs, self.output_dir.as_ref().map(PathBuf::from)))
    }
}
