//! Pipeline settings.
//!
//! Values come from command-line flags, then a flat JSON config file, then
//! built-in defaults, in that order of precedence.

use std::path::{Path, PathBuf};

use phonoclust_core::cluster::DbscanConfig;
use phonoclust_core::segment::SegmentConfig;
use phonoclust_core::seqmatch::DEFAULT_MAX_LEN;
use phonoclust_core::{PoseSequence, Side, SimilarityConfig};
use serde::Deserialize;

use crate::error::DataError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    Grouping,
    Dbscan,
}

/// Hand whose phonemes feed the distance-matrix stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Right,
    Left,
}

impl Hand {
    pub fn side(self) -> Side {
        match self {
            Hand::Right => Side::Right,
            Hand::Left => Side::Left,
        }
    }
}

/// Partial settings; `None` defers to the next source.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub fps: Option<f64>,
    pub min_phoneme_len: Option<usize>,
    pub smoothing: Option<bool>,
    pub threshold: Option<f64>,
    pub deletion_cost: Option<f64>,
    pub eps: Option<f64>,
    pub min_samples: Option<usize>,
    pub max_span_len: Option<usize>,
    pub method: Option<ClusterMethod>,
    pub hand: Option<Hand>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
        let layer: Self = serde_json::from_str(&text).map_err(|e| DataError::json(path, e))?;
        layer.validate().map_err(|e| DataError::new(path, e))?;
        Ok(layer)
    }

    /// Range checks on the fields that are set.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(fps) = self.fps {
            if !(fps > 0.0 && fps.is_finite()) {
                return Err(format!("fps must be positive, got {fps}"));
            }
        }
        if self.min_phoneme_len == Some(0) {
            return Err("min_phoneme_len must be at least 1".into());
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(format!("threshold must lie in [0, 1], got {t}"));
            }
        }
        if let Some(c) = self.deletion_cost {
            if !(c >= 1.0 && c.is_finite()) {
                return Err(format!("deletion_cost must be a finite value of at least 1, got {c}"));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(format!("eps must be finite and positive, got {eps}"));
            }
        }
        if self.min_samples == Some(0) {
            return Err("min_samples must be at least 1".into());
        }
        if self.max_span_len == Some(0) {
            return Err("max_span_len must be at least 1".into());
        }
        Ok(())
    }

    /// Fields of `self` win over those of `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            fps: self.fps.or(lower.fps),
            min_phoneme_len: self.min_phoneme_len.or(lower.min_phoneme_len),
            smoothing: self.smoothing.or(lower.smoothing),
            threshold: self.threshold.or(lower.threshold),
            deletion_cost: self.deletion_cost.or(lower.deletion_cost),
            eps: self.eps.or(lower.eps),
            min_samples: self.min_samples.or(lower.min_samples),
            max_span_len: self.max_span_len.or(lower.max_span_len),
            method: self.method.or(lower.method),
            hand: self.hand.or(lower.hand),
            input: self.input.or(lower.input),
            output: self.output.or(lower.output),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub fps: f64,
    pub min_phoneme_len: usize,
    pub smoothing: bool,
    pub threshold: f64,
    pub deletion_cost: f64,
    pub eps: f64,
    pub min_samples: usize,
    pub max_span_len: usize,
    pub method: ClusterMethod,
    pub hand: Hand,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let seg = SegmentConfig::default();
        let sim = SimilarityConfig::default();
        Self {
            fps: PoseSequence::DEFAULT_FPS,
            min_phoneme_len: seg.min_len,
            smoothing: seg.smoothing,
            threshold: sim.threshold(),
            deletion_cost: sim.deletion_cost(),
            eps: DbscanConfig::DEFAULT_EPS,
            min_samples: 3,
            max_span_len: DEFAULT_MAX_LEN,
            method: ClusterMethod::Grouping,
            hand: Hand::Right,
            input: None,
            output: None,
        }
    }
}

impl PipelineConfig {
    /// Fills every unset field of `layer` from the defaults.
    pub fn resolve(layer: ConfigLayer) -> Self {
        let d = Self::default();
        Self {
            fps: layer.fps.unwrap_or(d.fps),
            min_phoneme_len: layer.min_phoneme_len.unwrap_or(d.min_phoneme_len),
            smoothing: layer.smoothing.unwrap_or(d.smoothing),
            threshold: layer.threshold.unwrap_or(d.threshold),
            deletion_cost: layer.deletion_cost.unwrap_or(d.deletion_cost),
            eps: layer.eps.unwrap_or(d.eps),
            min_samples: layer.min_samples.unwrap_or(d.min_samples),
            max_span_len: layer.max_span_len.unwrap_or(d.max_span_len),
            method: layer.method.unwrap_or(d.method),
            hand: layer.hand.unwrap_or(d.hand),
            input: layer.input,
            output: layer.output,
        }
    }

    pub fn similarity(&self) -> SimilarityConfig {
        SimilarityConfig::new(self.threshold, self.deletion_cost).expect("validated ranges")
    }

    pub fn dbscan(&self) -> DbscanConfig {
        DbscanConfig::new(self.eps, self.min_samples).expect("validated ranges")
    }

    pub fn segmentation(&self) -> SegmentConfig {
        SegmentConfig {
            min_len: self.min_phoneme_len,
            smoothing: self.smoothing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let flags = ConfigLayer {
            threshold: Some(0.7),
            ..Default::default()
        };
        let file: ConfigLayer = serde_json::from_str(r#"{"threshold":0.2,"eps":0.3}"#).unwrap();
        let cfg = PipelineConfig::resolve(flags.over(file));
        assert_eq!(cfg.threshold, 0.7);
        assert_eq!(cfg.eps, 0.3);
        assert_eq!(cfg.min_samples, 3);
        assert_eq!(cfg.fps, 25.0);
    }

    #[test]
    fn unknown_and_out_of_range_keys() {
        assert!(serde_json::from_str::<ConfigLayer>(r#"{"treshold":0.2}"#).is_err());
        let bad: ConfigLayer = serde_json::from_str(r#"{"threshold":1.5}"#).unwrap();
        assert!(bad.validate().is_err());
        let bad: ConfigLayer = serde_json::from_str(r#"{"deletion_cost":0.5}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
