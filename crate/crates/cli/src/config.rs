//! TOML run configuration.

use std::path::{Path, PathBuf};

use exterior_foliation::continuation::ContinuationOptions;
use exterior_foliation::geometry::{circumradius, DomainSpec, ExteriorDomain};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Domain(#[from] exterior_foliation::Error),
}

/// Slope grid given either directly or as Gauss-map angles in degrees.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
}

/// Single-leaf settings for `foliate solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Truncation radius, absolute.
    pub r_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<SlopeGrid>,
    #[serde(default)]
    pub continuation: ContinuationOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
}

fn angle_to_slope(gamma: f64) -> Result<f64, ConfigError> {
    if !(gamma.abs() < 90.0) {
        return Err(ConfigError::Invalid(format!("angle {gamma} must lie strictly between -90 and 90 degrees")));
    }
    Ok(gamma.to_radians().tan())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn domain(&self) -> Result<ExteriorDomain, ConfigError> {
        Ok(ExteriorDomain::try_from(self.domain.clone())?)
    }

    /// Strictly increasing slope grid, if one is configured.
    pub fn slope_grid(&self) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(g) = &self.slopes else { return Ok(None) };
        let s = match (&g.s, &g.gamma) {
            (Some(s), None) => s.clone(),
            (None, Some(gamma)) => gamma.iter().map(|&a| angle_to_slope(a)).collect::<Result<_, _>>()?,
            _ => return Err(ConfigError::Invalid("[slopes] needs exactly one of `s` and `gamma`".into())),
        };
        if s.is_empty() || s.iter().any(|v| !v.is_finite()) || s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ConfigError::Invalid("slope grid must be nonempty, finite and strictly increasing".into()));
        }
        Ok(Some(s))
    }

    /// Slope of the `[solve]` leaf, if configured.
    pub fn solve_slope(&self) -> Result<Option<(f64, f64)>, ConfigError> {
        let Some(sec) = &self.solve else { return Ok(None) };
        let s = match (sec.s, sec.gamma) {
            (Some(s), None) if s.is_finite() => s,
            (None, Some(g)) => angle_to_slope(g)?,
            _ => return Err(ConfigError::Invalid("[solve] needs exactly one finite `s` or `gamma`".into())),
        };
        Ok(Some((s, sec.r_out)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let domain = self.domain()?;
        self.continuation.validate()?;
        self.slope_grid()?;
        if let Some((_, r_out)) = self.solve_slope()? {
            let varrho = circumradius(&domain)?;
            if !(r_out > varrho) || !r_out.is_finite() {
                return Err(ConfigError::Invalid(format!("r_out = {r_out} must exceed the circumradius {varrho}")));
            }
        }
        Ok(())
    }
}
