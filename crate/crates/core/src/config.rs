//! Run configuration: a sectioned TOML document validated into a model,
//! tolerances and run settings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::geometry::SaddleSpectrum;
use crate::maps::{Model, StopRule, TransitionSpec};
use crate::precision::PrecisionMode;
use crate::switching::{Neighbourhoods, SwitchTolerances};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "HSWITCH_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {message}")]
    Field { key: String, message: String },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Hypothesis(ModelError),
}

impl ConfigError {
    fn field(key: &str, message: impl ToString) -> Self {
        ConfigError::Field { key: key.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub c: f64,
    pub e: f64,
    pub alpha: f64,
    /// Acknowledges a run with `C <= E`.
    pub contrast: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { c: 2.0, e: 1.0, alpha: 1.0, contrast: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionSection {
    pub a: [[f64; 2]; 2],
    pub mu: f64,
    pub tau: f64,
    pub r_max: f64,
}

impl Default for TransitionSection {
    fn default() -> Self {
        Self { a: [[1.0, 0.0], [0.0, 1.0]], mu: 0.0, tau: 1.0, r_max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSection {
    pub bisection_rel: f64,
    pub stable_rel: f64,
    pub underflow_floor: f64,
    pub probes_per_ring: usize,
    pub max_rings: usize,
    pub core_fraction: f64,
}

impl Default for TolerancesSection {
    fn default() -> Self {
        let t = SwitchTolerances::default();
        Self {
            bisection_rel: t.bisection_rel,
            stable_rel: t.stable_rel,
            underflow_floor: StopRule::default().underflow_floor,
            probes_per_ring: t.probes_per_ring,
            max_rings: t.max_rings,
            core_fraction: t.core_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionKind {
    Binary64,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub precision: PrecisionKind,
    /// Mantissa bits for extended precision.
    pub bits: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 0, precision: PrecisionKind::Binary64, bits: 128 }
    }
}

/// The document as written, with defaults filled in.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub spectrum: SpectrumSection,
    pub transition: TransitionSection,
    pub tolerances: TolerancesSection,
    pub run: RunSection,
    pub neighbourhoods: Neighbourhoods,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub raw: RawConfig,
    #[serde(skip)]
    pub model: Model,
    #[serde(skip)]
    pub precision: PrecisionMode,
    #[serde(skip)]
    pub tolerances: SwitchTolerances,
    #[serde(skip)]
    pub stop: StopRule,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.raw.run.seed
    }

    pub fn neighbourhoods(&self) -> Neighbourhoods {
        self.raw.neighbourhoods
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        validate(RawConfig::default()).expect("defaults are valid")
    }
}

pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let msg = e.inner().message().to_string();
        ConfigError::field(if key == "." { "<document>" } else { &key }, msg)
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    validate(parse_raw(text)?)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text)
}

pub fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let s = raw.spectrum;
    let spectrum = if s.contrast {
        SaddleSpectrum::contrast(s.c, s.e, s.alpha)
    } else {
        SaddleSpectrum::new(s.c, s.e, s.alpha)
    }
    .map_err(ConfigError::Hypothesis)?;

    let t = raw.transition;
    let transition = TransitionSpec::new(t.a, t.mu, t.tau, t.r_max).map_err(|e| {
        let key = match &e {
            ModelError::InvalidParameter(m) if m.starts_with("transition matrix") => "transition.a",
            ModelError::InvalidParameter(m) if m.starts_with("mu") => "transition.mu",
            ModelError::InvalidParameter(m) if m.starts_with("tau") => "transition.tau",
            _ => "transition.r_max",
        };
        ConfigError::field(key, e)
    })?;

    let tl = raw.tolerances;
    let unit = |key: &str, v: f64| {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(ConfigError::field(key, format!("{v} must lie in (0, 1)")))
        }
    };
    unit("tolerances.bisection_rel", tl.bisection_rel)?;
    unit("tolerances.stable_rel", tl.stable_rel)?;
    unit("tolerances.core_fraction", tl.core_fraction)?;
    if !(tl.underflow_floor >= 0.0 && tl.underflow_floor < 1.0) {
        return Err(ConfigError::field("tolerances.underflow_floor", "must lie in [0, 1)"));
    }
    if tl.probes_per_ring < 4 {
        return Err(ConfigError::field("tolerances.probes_per_ring", "must be at least 4"));
    }
    if tl.max_rings == 0 {
        return Err(ConfigError::field("tolerances.max_rings", "must be at least 1"));
    }

    let precision = match raw.run.precision {
        PrecisionKind::Binary64 => PrecisionMode::Binary64,
        PrecisionKind::Extended => {
            if !(64..=65536).contains(&raw.run.bits) {
                return Err(ConfigError::field("run.bits", "must lie in 64..=65536"));
            }
            PrecisionMode::Extended { bits: raw.run.bits }
        }
    };
    raw.neighbourhoods.validate().map_err(|e| ConfigError::field("neighbourhoods", e))?;

    Ok(RunConfig {
        raw,
        model: Model::new(spectrum, transition),
        precision,
        tolerances: SwitchTolerances {
            bisection_rel: tl.bisection_rel,
            stable_rel: tl.stable_rel,
            probes_per_ring: tl.probes_per_ring,
            max_rings: tl.max_rings,
            core_fraction: tl.core_fraction,
        },
        stop: StopRule { stable_tol: 0.0, underflow_floor: tl.underflow_floor },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_canonical() {
        let c = parse_config("").unwrap();
        assert_eq!(c.model, Model::default());
        assert_eq!(c.precision, PrecisionMode::Binary64);
        assert_eq!(c.tolerances, SwitchTolerances::default());
    }

    #[test]
    fn contrast_needs_acknowledgement() {
        let doc = "[spectrum]\nc = 1.0\ne = 2.0\n";
        assert!(matches!(parse_config(doc), Err(ConfigError::Hypothesis(ModelError::HypothesisViolation(_)))));
        let ok = parse_config(&format!("{doc}contrast = true\n")).unwrap();
        assert!((ok.model.spectrum.delta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_config_error() {
        let err = parse_config("[transition]\na = [[1.0, 2.0], [2.0, 4.0]]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Field { ref key, .. } if key == "transition.a"), "{err}");
    }

    #[test]
    fn errors_name_the_key() {
        let err = parse_config("[transition]\nmu = \"big\"\n").unwrap_err();
        assert!(matches!(err, ConfigError::Field { ref key, .. } if key == "transition.mu"), "{err}");
        let err = parse_config("[run]\nseeed = 3\n").unwrap_err();
        assert!(err.to_string().contains("seeed"), "{err}");
    }

    #[test]
    fn extended_precision_and_sections() {
        let c = parse_config(
            "[run]\nprecision = \"extended\"\nbits = 256\nseed = 9\n[tolerances]\nstable_rel = 1e-12\n",
        )
        .unwrap();
        assert_eq!(c.precision, PrecisionMode::Extended { bits: 256 });
        assert_eq!(c.seed(), 9);
        assert_eq!(c.tolerances.stable_rel, 1e-12);
    }
}
