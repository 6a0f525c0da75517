//! Pure schedule planning.
//!
//! The schedule is the full event list of one playback pass: a camera_info
//! and frame event at every kept stamp, plus clock ticks at the configured
//! simulated interval when this player is the clock master. Events are
//! ordered by simulated time with ties broken clock, camera_info, frame, so
//! followers see time advance before the payload it stamps.

use std::time::Duration;

use crate::sidecar::{FrameStamp, SidecarDocument, NANOS_PER_SEC};

use super::{PlaybackOptions, ReplayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    ClockTick,
    /// Calibration for the frame at this source index.
    CameraInfo(usize),
    /// The frame at this source index.
    Frame(usize),
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            EventKind::ClockTick => 0,
            EventKind::CameraInfo(_) => 1,
            EventKind::Frame(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEvent {
    pub sim_time: FrameStamp,
    pub kind: EventKind,
}

/// One pass of playback, with everything needed to map simulated times onto
/// wall deadlines.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub window_start: FrameStamp,
    pub window_end: FrameStamp,
    pub rate: f64,
    pub events: Vec<ScheduleEvent>,
}

impl Schedule {
    /// Wall-clock offset of an event from the start of its pass.
    pub fn wall_offset(&self, event: &ScheduleEvent) -> Duration {
        let sim_ns = event.sim_time.as_nanos() - self.window_start.as_nanos();
        Duration::from_secs_f64(sim_ns as f64 / f64::from(NANOS_PER_SEC) / self.rate)
    }

    /// Wall-clock length of one pass.
    pub fn wall_span(&self) -> Duration {
        let sim_ns = self.window_end.as_nanos() - self.window_start.as_nanos();
        Duration::from_secs_f64(sim_ns as f64 / f64::from(NANOS_PER_SEC) / self.rate)
    }

    pub fn frame_indices(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Frame(i) => Some(i),
                _ => None,
            })
            .collect()
    }
}

/// Plans one playback pass from the sidecar timeline. Pure: identical
/// inputs produce identical schedules.
pub fn plan_schedule(
    doc: &SidecarDocument,
    options: &PlaybackOptions,
) -> Result<Schedule, ReplayError> {
    options.validate()?;
    let first = doc.first_stamp().expect("validated documents have frames");
    let last = doc.last_stamp().expect("validated documents have frames");

    let offset_ns = (options.start_offset_s.max(0.0) * f64::from(NANOS_PER_SEC)).round() as u128;
    let window_start = first.add_nanos(offset_ns);
    if window_start > last {
        return Err(ReplayError::EmptySchedule {
            offset_s: options.start_offset_s,
            last,
        });
    }

    let mut events = Vec::new();
    for (index, entry) in doc.frames.iter().enumerate() {
        if entry.stamp >= window_start {
            events.push(ScheduleEvent {
                sim_time: entry.stamp,
                kind: EventKind::CameraInfo(index),
            });
            events.push(ScheduleEvent {
                sim_time: entry.stamp,
                kind: EventKind::Frame(index),
            });
        }
    }
    if options.clock_master {
        let step_ns = (f64::from(NANOS_PER_SEC) / options.clock_hz).round().max(1.0) as u128;
        let start_ns = window_start.as_nanos();
        let end_ns = last.as_nanos();
        let mut k = 0u128;
        loop {
            let t = start_ns + k * step_ns;
            if t > end_ns {
                break;
            }
            events.push(ScheduleEvent {
                sim_time: FrameStamp::from_nanos(t),
                kind: EventKind::ClockTick,
            });
            k += 1;
        }
    }
    // Stable sort keeps frame events in index order at equal stamps.
    events.sort_by_key(|e| (e.sim_time, e.kind.rank()));
    Ok(Schedule {
        window_start,
        window_end: last,
        rate: options.rate,
        events,
    })
}
