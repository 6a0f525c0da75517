//! CRF x preset benchmarking: grid sweeps, quality-floor filtering,
//! operating-point selection, and full-dataset extrapolation.
//!
//! A sweep encodes one short clip at every grid point, scores each output
//! against the YUV444 ground truth, and extrapolates bitrate and encode time
//! to the full dataset the clip stands in for. Selection then minimizes
//! output size among the points that clear the quality floor and the time
//! budget.

mod report;
mod run;
mod subsample;

pub mod config;

pub use report::{parse_report_csv, render_report, ReportFormat, REPORT_COLUMNS};
pub use run::{run_sweep, SweepContext, SweepFailure, SweepOutcome, SweepPoint};
pub use subsample::{
    subsample_bundle, subsample_document, subsample_indices, SubsampleOutcome, SubsampleRequest,
};

use thiserror::Error;

use crate::encode::{Codec, Preset};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("no feasible setting: no record clears the policy thresholds")]
    NoFeasibleSetting,
    #[error("subsample step must be at least 1")]
    ZeroStep,
    #[error("frame count must be at least 1")]
    ZeroFrameCount,
    #[error("all {failed} sweep points failed; first error: {first}")]
    AllPointsFailed { failed: usize, first: String },
    #[error("sweep configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Encode(#[from] crate::encode::EncodeError),
    #[error(transparent)]
    Quality(#[from] crate::quality::QualityError),
    #[error(transparent)]
    Sidecar(#[from] crate::sidecar::SidecarError),
    #[error(transparent)]
    Decode(#[from] crate::decode::DecodeError),
    #[error(transparent)]
    Pixel(#[from] crate::pixel::PixelError),
    #[error("workspace: {0}")]
    Workspace(std::io::Error),
}

/// One benchmarked grid point with its derived full-dataset costs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub codec: Codec,
    pub crf: u8,
    pub preset: Preset,
    pub encode_time_s: f64,
    pub size_bytes: u64,
    pub bitrate_kbps: f64,
    pub vmaf_mean: f64,
    /// Extrapolated dataset size, GB (10^9 bytes).
    pub full_size_gb: f64,
    /// Extrapolated serial encode time for the dataset, days.
    pub full_time_days: f64,
}

impl SweepRecord {
    pub fn size_mib(&self) -> f64 {
        self.size_bytes as f64 / f64::from(1u32 << 20)
    }

    /// Deterministic report ordering key.
    pub fn sort_key(&self) -> (Codec, u8, Preset) {
        (self.codec, self.crf, self.preset)
    }
}

/// Shape of the dataset a clip benchmark extrapolates to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetModel {
    pub full_rate_streams: u32,
    pub half_rate_streams: u32,
    /// Length of each stream, seconds.
    pub stream_duration_s: f64,
    /// Length of the benchmark clip, seconds.
    pub clip_duration_s: f64,
}

impl DatasetModel {
    /// Full-rate-equivalent stream count: half-rate streams count half.
    pub fn effective_streams(&self) -> f64 {
        f64::from(self.full_rate_streams) + f64::from(self.half_rate_streams) / 2.0
    }

    /// How many clip-lengths the whole dataset spans.
    pub fn clip_multiplier(&self) -> f64 {
        self.effective_streams() * self.stream_duration_s / self.clip_duration_s
    }
}

/// Full-rate-equivalent stream count for a dataset.
pub fn effective_streams(model: &DatasetModel) -> f64 {
    model.effective_streams()
}

const BYTES_PER_SEC_PER_KBPS: f64 = 125.0;

/// Dataset size in GB (10^9 bytes) if every stream sustains `bitrate_kbps`.
pub fn extrapolate_full_size(bitrate_kbps: f64, model: &DatasetModel) -> f64 {
    bitrate_kbps * BYTES_PER_SEC_PER_KBPS * model.effective_streams() * model.stream_duration_s
        / 1e9
}

/// Serial single-worker encode time for the dataset, in days, given the
/// measured encode time of one clip.
pub fn extrapolate_full_time(clip_encode_time_s: f64, model: &DatasetModel) -> f64 {
    clip_encode_time_s * model.clip_multiplier() / 86_400.0
}

/// Raw sensor data rate in bytes per second.
pub fn estimate_raw_rate(width: u32, height: u32, bytes_per_pixel: u32, fps: f64) -> f64 {
    f64::from(width) * f64::from(height) * f64::from(bytes_per_pixel) * fps
}

/// Mean encoded frame size in kB (1000 bytes).
pub fn avg_frame_size(encoded_size_bytes: u64, frame_count: u64) -> Result<f64, SweepError> {
    if frame_count == 0 {
        return Err(SweepError::ZeroFrameCount);
    }
    Ok(encoded_size_bytes as f64 / frame_count as f64 / 1000.0)
}

/// The operating-point policy: a quality floor, a time budget, and
/// size-minimizing selection with fixed tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionPolicy {
    /// Minimum acceptable mean VMAF, 0-100.
    pub vmaf_floor: f64,
    /// Maximum acceptable extrapolated encode time, days.
    pub time_budget_days: f64,
}

impl SelectionPolicy {
    pub fn new(vmaf_floor: f64, time_budget_days: f64) -> Self {
        Self {
            vmaf_floor,
            time_budget_days,
        }
    }

    pub fn admits(&self, record: &SweepRecord) -> bool {
        record.vmaf_mean >= self.vmaf_floor && record.full_time_days <= self.time_budget_days
    }
}

/// Records clearing both policy thresholds, input order preserved.
pub fn filter_candidates(records: &[SweepRecord], policy: &SelectionPolicy) -> Vec<SweepRecord> {
    records
        .iter()
        .filter(|r| policy.admits(r))
        .cloned()
        .collect()
}

/// The operating point: smallest output size among admitted records; ties go
/// to the smaller full-dataset time, then to the larger crf.
pub fn select_setting(
    records: &[SweepRecord],
    policy: &SelectionPolicy,
) -> Result<SweepRecord, SweepError> {
    filter_candidates(records, policy)
        .into_iter()
        .min_by(|a, b| {
            a.size_bytes
                .cmp(&b.size_bytes)
                .then(a.full_time_days.total_cmp(&b.full_time_days))
                .then(b.crf.cmp(&a.crf))
        })
        .ok_or(SweepError::NoFeasibleSetting)
}
