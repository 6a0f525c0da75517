//! Camera-sequence bundling toolkit.
//!
//! A bundle is an encoded video file plus a YAML sidecar carrying everything
//! the container cannot: per-frame timestamps, sequence numbers, frame ids,
//! topic names and camera intrinsics. This crate provides the pieces that
//! produce, evaluate and replay such bundles:
//!
//! * [`pixel`] — GBRG bayer demosaicing, RGB/YUV444 conversion, raw frame
//!   sequence ingestion and planar YUV stream I/O.
//! * [`sidecar`] — the sidecar document: parsing, serialization, validation.
//! * [`encode`] — external encoder drivers (command templates), timing and
//!   bitrate accounting, and the raw-sequence-to-bundle conversion pipeline.
//! * [`quality`] — native PSNR scoring and an external VMAF tool driver.
//! * [`sweep`] — CRF/preset grid benchmarking, quality-floor filtering,
//!   operating-point selection, full-dataset extrapolation and reports.
//! * [`replay`] — bundle playback: pure schedule planning, rate/offset/loop
//!   semantics, simulated-clock publication and pluggable sinks.
//! * [`wire`] — the length-prefixed binary message format used by the TCP
//!   sink.

pub mod decode;
pub mod encode;
pub mod pixel;
pub mod quality;
pub mod refdata;
pub mod replay;
pub mod sidecar;
pub mod sweep;
pub mod tool;
pub mod wire;

pub use decode::{DecodedVideo, RawYuvDecoder, VideoDecoder};
pub use encode::{Codec, EncodeJob, EncodeReport, Preset, YuvStreamDesc};
pub use pixel::{BayerFrame, RgbFrame, Yuv444Frame};
pub use quality::{FrameScores, QualitySummary};
pub use replay::{PlaybackOptions, PlaybackSummary, ReplaySession};
pub use sidecar::{CameraInfo, FrameMetadata, FrameStamp, SidecarDocument};
pub use sweep::{DatasetModel, SelectionPolicy, SweepRecord};
