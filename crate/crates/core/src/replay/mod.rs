//! Bundle replay: republishing decoded frames on their recorded stamps.
//!
//! Timing is split in two: [`plan_schedule`] is a pure function from the
//! sidecar timeline and the playback options to an ordered event list, and
//! [`run_playback`] dispatches that list against the wall clock with a
//! decode-ahead producer. Message stamps are always the recorded ones — rate
//! scaling compresses or stretches wall time, never the simulated clock.

mod playback;
mod schedule;
pub mod sink;

pub use playback::{run_playback, JitterStats, PlaybackSummary, DECODE_AHEAD_FRAMES};
pub use schedule::{plan_schedule, EventKind, Schedule, ScheduleEvent};
pub use sink::{DirectorySink, NullSink, PlaybackSink, SinkError, TcpSink};

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::decode::{DecodeError, DecodedVideo, VideoDecoder};
use crate::sidecar::{
    parse_sidecar, validate_bundle, FrameStamp, SidecarDocument, SidecarError, ValidationReport,
};

pub const DEFAULT_CLOCK_HZ: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("playback rate {rate} must be positive")]
    InvalidRate { rate: f64 },
    #[error("clock frequency {hz} must be positive when publishing the clock")]
    InvalidClockHz { hz: f64 },
    #[error("start offset {offset_s} s lies beyond the last stamp {last}; empty schedule")]
    EmptySchedule { offset_s: f64, last: FrameStamp },
    #[error("bundle failed validation: {report}")]
    Validation { report: ValidationReport },
    #[error(transparent)]
    Sidecar(#[from] SidecarError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("sidecar {path}: {source}")]
    SidecarIo {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("sink failed after {} frames: {message}", summary.frames_published)]
    SinkAborted {
        message: String,
        summary: Box<PlaybackSummary>,
    },
}

/// How to play a bundle back.
#[derive(Debug, Clone)]
pub struct PlaybackOptions {
    /// Wall-time speed multiplier; 2.0 plays twice as fast.
    pub rate: f64,
    /// Seconds of timeline skipped from the first stamp.
    pub start_offset_s: f64,
    pub loop_playback: bool,
    /// Publish simulated-clock ticks spanning the window.
    pub clock_master: bool,
    /// Clock publication frequency in simulated time.
    pub clock_hz: f64,
    /// Topic renames applied at publish time.
    pub remappings: BTreeMap<String, String>,
    /// Wall-clock cutoff; mainly for bounded loop playback.
    pub max_duration_s: Option<f64>,
}

impl Default for PlaybackOptions {
    fn default() -> Self {
        Self {
            rate: 1.0,
            start_offset_s: 0.0,
            loop_playback: false,
            clock_master: false,
            clock_hz: DEFAULT_CLOCK_HZ,
            remappings: BTreeMap::new(),
            max_duration_s: None,
        }
    }
}

impl PlaybackOptions {
    pub fn validate(&self) -> Result<(), ReplayError> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(ReplayError::InvalidRate { rate: self.rate });
        }
        if self.clock_master && !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(ReplayError::InvalidClockHz { hz: self.clock_hz });
        }
        Ok(())
    }

    pub fn remapped<'a>(&'a self, topic: &'a str) -> &'a str {
        self.remappings.get(topic).map(String::as_str).unwrap_or(topic)
    }
}

/// A loaded, validated bundle ready for playback.
pub struct ReplaySession {
    pub document: SidecarDocument,
    pub video: Box<dyn DecodedVideo>,
    pub frame_count: usize,
    pub first_stamp: FrameStamp,
    pub last_stamp: FrameStamp,
}

/// Loads a bundle: parses the sidecar, opens the video through the decoder,
/// and refuses anything that fails [`validate_bundle`].
pub fn load_bundle(
    video_path: &Path,
    sidecar_path: &Path,
    decoder: &dyn VideoDecoder,
) -> Result<ReplaySession, ReplayError> {
    let text = std::fs::read_to_string(sidecar_path).map_err(|e| ReplayError::SidecarIo {
        path: sidecar_path.to_path_buf(),
        source: e,
    })?;
    let document = parse_sidecar(&text)?;
    let video = decoder.open(video_path, document.width, document.height)?;
    let report = validate_bundle(&document, video.frame_count(), video.width(), video.height());
    if !report.passed() {
        return Err(ReplayError::Validation { report });
    }
    let first_stamp = document.first_stamp().expect("validated documents have frames");
    let last_stamp = document.last_stamp().expect("validated documents have frames");
    Ok(ReplaySession {
        frame_count: video.frame_count(),
        document,
        video,
        first_stamp,
        last_stamp,
    })
}
