//! Sweep configuration file: the grid, the clip, the dataset model and the
//! selection policy, in one YAML document.
//!
//! ```yaml
//! codecs: [svtav1]
//! crf: 16-25            # range `lo-hi` or a list [16, 22, 25]
//! presets:
//!   svtav1: ["5", "6", "7", "8"]
//! clip:
//!   yuv: clip.yuv       # or `manifest: seq.yaml` for a raw bayer sequence
//!   width: 64
//!   height: 64
//!   fps: 30
//! dataset:
//!   full_rate_streams: 11
//!   half_rate_streams: 6
//!   stream_duration_s: 7200
//!   clip_duration_s: 60
//! policy:
//!   vmaf_floor: 99.5
//!   time_budget_days: 5.0
//! scorer: psnr          # or `vmaf`
//! workers: 2
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::encode::{Codec, Preset};
use crate::quality::VmafTool;

use super::{DatasetModel, SelectionPolicy, SweepError, SweepPoint};

/// `lo-hi` inclusive range or explicit list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CrfSpec {
    Range(String),
    List(Vec<u8>),
}

impl CrfSpec {
    pub fn values(&self) -> Result<Vec<u8>, SweepError> {
        match self {
            CrfSpec::List(values) => Ok(values.clone()),
            CrfSpec::Range(text) => parse_range(text),
        }
    }
}

/// Parses `16-25` into the inclusive list, or a single number into itself.
pub fn parse_range(text: &str) -> Result<Vec<u8>, SweepError> {
    let bad = || SweepError::Config(format!("bad range `{text}`, expected `lo-hi` or a number"));
    match text.split_once('-') {
        Some((lo, hi)) => {
            let lo: u8 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u8 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            Ok((lo..=hi).collect())
        }
        None => Ok(vec![text.trim().parse().map_err(|_| bad())?]),
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ClipSpec {
    #[serde(default)]
    pub yuv: Option<PathBuf>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub height: Option<u32>,
    #[serde(default)]
    pub fps: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct DatasetSpec {
    pub full_rate_streams: u32,
    pub half_rate_streams: u32,
    pub stream_duration_s: f64,
    pub clip_duration_s: f64,
}

impl From<DatasetSpec> for DatasetModel {
    fn from(s: DatasetSpec) -> Self {
        DatasetModel {
            full_rate_streams: s.full_rate_streams,
            half_rate_streams: s.half_rate_streams,
            stream_duration_s: s.stream_duration_s,
            clip_duration_s: s.clip_duration_s,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct PolicySpec {
    pub vmaf_floor: f64,
    pub time_budget_days: f64,
}

impl From<PolicySpec> for SelectionPolicy {
    fn from(s: PolicySpec) -> Self {
        SelectionPolicy::new(s.vmaf_floor, s.time_budget_days)
    }
}

#[derive(Debug, Clone, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Psnr,
    Vmaf,
}

/// Parsed sweep configuration.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub codecs: Vec<String>,
    pub crf: CrfSpec,
    pub presets: BTreeMap<String, Vec<String>>,
    pub clip: ClipSpec,
    pub dataset: DatasetSpec,
    pub policy: PolicySpec,
    #[serde(default)]
    pub scorer: ScorerKind,
    #[serde(default)]
    pub vmaf: Option<VmafTool>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Inline encoder templates; omitted entries fall back to defaults.
    #[serde(default)]
    pub encoders: Option<BTreeMap<String, crate::tool::CommandTemplate>>,
}

impl SweepConfig {
    pub fn from_yaml(text: &str) -> Result<Self, SweepError> {
        serde_yaml::from_str(text).map_err(|e| SweepError::Config(e.to_string()))
    }

    /// Expands the codec x crf x preset grid.
    pub fn grid(&self) -> Result<Vec<SweepPoint>, SweepError> {
        let crfs = self.crf.values()?;
        let mut points = Vec::new();
        for codec_name in &self.codecs {
            let codec = Codec::from_str(codec_name)
                .map_err(|e| SweepError::Config(e.to_string()))?;
            let presets = self.presets.get(codec_name).ok_or_else(|| {
                SweepError::Config(format!("no presets listed for codec `{codec_name}`"))
            })?;
            for &crf in &crfs {
                for preset_text in presets {
                    let preset = Preset::parse(codec, preset_text)
                        .map_err(|e| SweepError::Config(e.to_string()))?;
                    points.push(SweepPoint { codec, crf, preset });
                }
            }
        }
        if points.is_empty() {
            return Err(SweepError::Config("empty sweep grid".to_string()));
        }
        Ok(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
codecs: [svtav1]
crf: 16-18
presets:
  svtav1: ["5", "6"]
clip:
  yuv: clip.yuv
  width: 64
  height: 64
  fps: 30
dataset:
  full_rate_streams: 11
  half_rate_streams: 6
  stream_duration_s: 7200
  clip_duration_s: 60
policy:
  vmaf_floor: 99.5
  time_budget_days: 5.0
"#;

    #[test]
    fn grid_expands_ranges() {
        let config = SweepConfig::from_yaml(SAMPLE).unwrap();
        let grid = config.grid().unwrap();
        assert_eq!(grid.len(), 6);
        assert_eq!(
            grid[0],
            SweepPoint {
                codec: Codec::SvtAv1,
                crf: 16,
                preset: Preset::Level(5)
            }
        );
        assert_eq!(config.scorer, ScorerKind::Psnr);
        let model: DatasetModel = config.dataset.into();
        assert_eq!(model.effective_streams(), 14.0);
    }

    #[test]
    fn crf_list_form() {
        let text = SAMPLE.replace("crf: 16-18", "crf: [22, 25]");
        let config = SweepConfig::from_yaml(&text).unwrap();
        assert_eq!(config.crf.values().unwrap(), vec![22, 25]);
    }

    #[test]
    fn bad_range_is_config_error() {
        assert!(parse_range("25-16").is_err());
        assert!(parse_range("fast").is_err());
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert_eq!(parse_range("5-8").unwrap(), vec![5, 6, 7, 8]);
    }

    #[test]
    fn invalid_preset_for_codec_rejected() {
        let text = SAMPLE.replace("[\"5\", \"6\"]", "[\"medium\"]");
        let config = SweepConfig::from_yaml(&text).unwrap();
        assert!(matches!(config.grid(), Err(SweepError::Config(_))));
    }
}
