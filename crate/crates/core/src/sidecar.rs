//! The YAML sidecar that travels next to every encoded video.
//!
//! The video container stores pixels; the sidecar stores everything else:
//! per-frame timestamps, sequence numbers, the frame id, topic names and the
//! camera calibration. Replaying a bundle reads both files and republishes
//! frames on their recorded stamps, so the sidecar is the authoritative
//! timeline — nothing in this crate reorders or rewrites stamps.
//!
//! The on-disk dialect is a small YAML subset: scalars, sequences and
//! mappings. Stamps are `{sec: int, nsec: int}` mappings, matrices are flat
//! numeric sequences. The sidecar filename is the video filename with its
//! extension replaced by `.yaml`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sidecar schema version written and accepted by this crate.
pub const FORMAT_VERSION: u32 = 1;

pub const NANOS_PER_SEC: u32 = 1_000_000_000;

/// A recorded capture time: whole seconds plus a nanosecond remainder.
///
/// Ordering is lexicographic on `(sec, nsec)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct FrameStamp {
    pub sec: u64,
    pub nsec: u32,
}

impl FrameStamp {
    pub fn new(sec: u64, nsec: u32) -> Result<Self, SidecarError> {
        if nsec >= NANOS_PER_SEC {
            return Err(SidecarError::InvalidStamp { sec, nsec });
        }
        Ok(Self { sec, nsec })
    }

    pub fn as_nanos(&self) -> u128 {
        u128::from(self.sec) * u128::from(NANOS_PER_SEC) + u128::from(self.nsec)
    }

    pub fn from_nanos(nanos: u128) -> Self {
        let per = u128::from(NANOS_PER_SEC);
        Self {
            sec: (nanos / per) as u64,
            nsec: (nanos % per) as u32,
        }
    }

    pub fn as_secs_f64(&self) -> f64 {
        self.sec as f64 + f64::from(self.nsec) / f64::from(NANOS_PER_SEC)
    }

    /// Elapsed seconds from `earlier` to `self`; negative if `self` is earlier.
    pub fn seconds_since(&self, earlier: FrameStamp) -> f64 {
        let a = self.as_nanos() as i128;
        let b = earlier.as_nanos() as i128;
        (a - b) as f64 / f64::from(NANOS_PER_SEC)
    }

    pub fn add_nanos(&self, nanos: u128) -> Self {
        Self::from_nanos(self.as_nanos() + nanos)
    }
}

impl fmt::Display for FrameStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}", self.sec, self.nsec)
    }
}

/// Per-frame metadata carried alongside pixel data through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMetadata {
    pub seq: u64,
    pub stamp: FrameStamp,
    pub frame_id: String,
}

/// Camera calibration and distortion description, stored once per bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraInfo {
    pub width: u32,
    pub height: u32,
    pub distortion_model: String,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    /// 3x3 intrinsic matrix, row-major.
    #[serde(rename = "K")]
    pub k: [f64; 9],
    /// 3x3 rectification matrix, row-major.
    #[serde(rename = "R")]
    pub r: [f64; 9],
    /// 3x4 projection matrix, row-major.
    #[serde(rename = "P")]
    pub p: [f64; 12],
}

impl CameraInfo {
    /// A plausible default calibration for synthetic sequences that have none.
    pub fn synthetic(width: u32, height: u32) -> Self {
        let (w, h) = (f64::from(width), f64::from(height));
        Self {
            width,
            height,
            distortion_model: "plumb_bob".to_string(),
            d: vec![0.0; 5],
            k: [w, 0.0, w / 2.0, 0.0, w, h / 2.0, 0.0, 0.0, 1.0],
            r: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            p: [
                w,
                0.0,
                w / 2.0,
                0.0,
                0.0,
                w,
                h / 2.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
            ],
        }
    }
}

/// One `{seq, stamp}` entry in the sidecar frame list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub seq: u64,
    pub stamp: FrameStamp,
}

/// The full sidecar document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidecarDocument {
    pub format_version: u32,
    pub image_topic: String,
    pub camera_info_topic: String,
    pub frame_id: String,
    /// Pixel format of the original sensor stream, e.g. `bayer_gbrg8`.
    pub source_encoding: String,
    pub width: u32,
    pub height: u32,
    pub fps_nominal: f64,
    pub camera_info: CameraInfo,
    pub frames: Vec<FrameEntry>,
}

impl SidecarDocument {
    pub fn first_stamp(&self) -> Option<FrameStamp> {
        self.frames.first().map(|f| f.stamp)
    }

    pub fn last_stamp(&self) -> Option<FrameStamp> {
        self.frames.last().map(|f| f.stamp)
    }

    /// Sidecar path for a video path: extension replaced by `.yaml`.
    pub fn path_for_video(video: &Path) -> PathBuf {
        video.with_extension("yaml")
    }
}

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("sidecar is not well-formed YAML: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("missing mandatory field `{field}`")]
    MissingField { field: &'static str },
    #[error("unknown format_version {found} (supported: {FORMAT_VERSION})")]
    UnknownFormatVersion { found: u32 },
    #[error("frames list is empty")]
    EmptyFrames,
    #[error("invalid stamp {sec}.{nsec}: nsec must be below 1e9")]
    InvalidStamp { sec: u64, nsec: u32 },
    #[error(
        "non-monotonic stamps: frames[{index}] has stamp {current} not after {previous}"
    )]
    NonMonotonicStamps {
        index: usize,
        previous: FrameStamp,
        current: FrameStamp,
    },
    #[error("non-monotonic seq: frames[{index}] has seq {current} not after {previous}")]
    NonMonotonicSeq {
        index: usize,
        previous: u64,
        current: u64,
    },
    #[error("intrinsics shape: `{field}` has {got} entries, expected {expected}")]
    IntrinsicsShape {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(
        "camera_info dimensions {info_width}x{info_height} do not match video dimensions {width}x{height}"
    )]
    CameraDimensionMismatch {
        width: u32,
        height: u32,
        info_width: u32,
        info_height: u32,
    },
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

/// Loosely-typed mirror of the document, used to produce named validation
/// errors instead of raw serde messages.
#[derive(Debug, Deserialize)]
struct RawSidecar {
    format_version: Option<u32>,
    image_topic: Option<String>,
    camera_info_topic: Option<String>,
    frame_id: Option<String>,
    source_encoding: Option<String>,
    width: Option<u32>,
    height: Option<u32>,
    fps_nominal: Option<f64>,
    camera_info: Option<RawCameraInfo>,
    frames: Option<Vec<FrameEntry>>,
}

#[derive(Debug, Deserialize)]
struct RawCameraInfo {
    width: Option<u32>,
    height: Option<u32>,
    distortion_model: Option<String>,
    #[serde(rename = "D", default)]
    d: Vec<f64>,
    #[serde(rename = "K")]
    k: Option<Vec<f64>>,
    #[serde(rename = "R")]
    r: Option<Vec<f64>>,
    #[serde(rename = "P")]
    p: Option<Vec<f64>>,
}

fn require<T>(value: Option<T>, field: &'static str) -> Result<T, SidecarError> {
    value.ok_or(SidecarError::MissingField { field })
}

fn matrix<const N: usize>(
    values: Option<Vec<f64>>,
    field: &'static str,
) -> Result<[f64; N], SidecarError> {
    let values = require(values, field)?;
    let got = values.len();
    values
        .try_into()
        .map_err(|_| SidecarError::IntrinsicsShape {
            field,
            expected: N,
            got,
        })
}

impl RawCameraInfo {
    fn validate(self) -> Result<CameraInfo, SidecarError> {
        Ok(CameraInfo {
            width: require(self.width, "camera_info.width")?,
            height: require(self.height, "camera_info.height")?,
            distortion_model: require(self.distortion_model, "camera_info.distortion_model")?,
            d: self.d,
            k: matrix::<9>(self.k, "camera_info.K")?,
            r: matrix::<9>(self.r, "camera_info.R")?,
            p: matrix::<12>(self.p, "camera_info.P")?,
        })
    }
}

/// Checks every document invariant: version, non-empty monotonic frame list,
/// stamp ranges, and dimension agreement with the camera calibration.
pub fn validate_document(doc: &SidecarDocument) -> Result<(), SidecarError> {
    if doc.format_version != FORMAT_VERSION {
        return Err(SidecarError::UnknownFormatVersion {
            found: doc.format_version,
        });
    }
    if doc.frames.is_empty() {
        return Err(SidecarError::EmptyFrames);
    }
    validate_frame_order(&doc.frames)?;
    if !(doc.fps_nominal.is_finite() && doc.fps_nominal > 0.0) {
        return Err(SidecarError::InvalidField {
            field: "fps_nominal",
            reason: format!("{} is not a positive rate", doc.fps_nominal),
        });
    }
    if doc.camera_info.width != doc.width || doc.camera_info.height != doc.height {
        return Err(SidecarError::CameraDimensionMismatch {
            width: doc.width,
            height: doc.height,
            info_width: doc.camera_info.width,
            info_height: doc.camera_info.height,
        });
    }
    Ok(())
}

/// Checks that stamps and seq numbers are strictly increasing and nsec is in
/// range. Shared with the raw-sequence manifest, which uses the same layout.
pub fn validate_frame_order(frames: &[FrameEntry]) -> Result<(), SidecarError> {
    for (index, entry) in frames.iter().enumerate() {
        if entry.stamp.nsec >= NANOS_PER_SEC {
            return Err(SidecarError::InvalidStamp {
                sec: entry.stamp.sec,
                nsec: entry.stamp.nsec,
            });
        }
        if index > 0 {
            let prev = &frames[index - 1];
            if entry.stamp <= prev.stamp {
                return Err(SidecarError::NonMonotonicStamps {
                    index,
                    previous: prev.stamp,
                    current: entry.stamp,
                });
            }
            if entry.seq <= prev.seq {
                return Err(SidecarError::NonMonotonicSeq {
                    index,
                    previous: prev.seq,
                    current: entry.seq,
                });
            }
        }
    }
    Ok(())
}

/// Nominal rate derived from the first/last stamp of a frame list.
pub fn derive_fps(frames: &[FrameEntry]) -> Option<f64> {
    if frames.len() < 2 {
        return None;
    }
    let span = frames
        .last()
        .unwrap()
        .stamp
        .seconds_since(frames.first().unwrap().stamp);
    if span <= 0.0 {
        return None;
    }
    Some((frames.len() - 1) as f64 / span)
}

/// Parses and fully validates a sidecar document.
///
/// `fps_nominal` is the only optional field: when absent it is derived from
/// the stamp span. Everything else missing or malformed yields a named
/// validation error.
pub fn parse_sidecar(text: &str) -> Result<SidecarDocument, SidecarError> {
    let raw: RawSidecar = serde_yaml::from_str(text)?;
    let frames = require(raw.frames, "frames")?;
    let fps_nominal = match raw.fps_nominal {
        Some(fps) => fps,
        None => derive_fps(&frames).ok_or(SidecarError::MissingField {
            field: "fps_nominal",
        })?,
    };
    let doc = SidecarDocument {
        format_version: require(raw.format_version, "format_version")?,
        image_topic: require(raw.image_topic, "image_topic")?,
        camera_info_topic: require(raw.camera_info_topic, "camera_info_topic")?,
        frame_id: require(raw.frame_id, "frame_id")?,
        source_encoding: require(raw.source_encoding, "source_encoding")?,
        width: require(raw.width, "width")?,
        height: require(raw.height, "height")?,
        fps_nominal,
        camera_info: require(raw.camera_info, "camera_info")?.validate()?,
        frames,
    };
    validate_document(&doc)?;
    Ok(doc)
}

/// Serializes a validated document. Key order follows the struct definition,
/// so two serializations of the same document are byte-identical.
pub fn serialize_sidecar(doc: &SidecarDocument) -> Result<String, SidecarError> {
    validate_document(doc)?;
    Ok(serde_yaml::to_string(doc)?)
}

/// One decoded-video property that disagrees with the sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleMismatch {
    FrameCount { sidecar: usize, video: usize },
    Width { sidecar: u32, video: u32 },
    Height { sidecar: u32, video: u32 },
}

impl fmt::Display for BundleMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleMismatch::FrameCount { sidecar, video } => write!(
                f,
                "frame count mismatch: sidecar lists {sidecar} stamps, video decodes to {video} frames"
            ),
            BundleMismatch::Width { sidecar, video } => {
                write!(f, "width mismatch: sidecar {sidecar}, video {video}")
            }
            BundleMismatch::Height { sidecar, video } => {
                write!(f, "height mismatch: sidecar {sidecar}, video {video}")
            }
        }
    }
}

/// Result of cross-checking a sidecar against the decoded video.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub mismatches: Vec<BundleMismatch>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "bundle consistent");
        }
        for (i, m) in self.mismatches.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Compares the sidecar against what the video actually decodes to. Every
/// mismatch is reported; an empty report means the bundle is replayable.
pub fn validate_bundle(
    doc: &SidecarDocument,
    video_frame_count: usize,
    video_width: u32,
    video_height: u32,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if doc.frames.len() != video_frame_count {
        report.mismatches.push(BundleMismatch::FrameCount {
            sidecar: doc.frames.len(),
            video: video_frame_count,
        });
    }
    if doc.width != video_width {
        report.mismatches.push(BundleMismatch::Width {
            sidecar: doc.width,
            video: video_width,
        });
    }
    if doc.height != video_height {
        report.mismatches.push(BundleMismatch::Height {
            sidecar: doc.height,
            video: video_height,
        });
    }
    report
}
