//! Wall-clock dispatch of a planned schedule.
//!
//! Two roles: a producer thread decodes frames up to a bounded lookahead,
//! and the scheduler (caller's thread) sleeps to each event deadline and
//! publishes. A frame that is not decoded by its deadline is counted
//! dropped and playback moves on; the scheduler never stalls the timeline
//! waiting for the decoder. In loop mode passes repeat seamlessly, one
//! nominal frame interval apart, against a monotonically advancing wall
//! clock.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{Receiver, RecvTimeoutError, SyncSender};
use std::time::{Duration, Instant};

use crate::pixel::RgbFrame;
use crate::sidecar::FrameMetadata;

use super::schedule::EventKind;
use super::sink::PlaybackSink;
use super::{plan_schedule, PlaybackOptions, ReplayError, ReplaySession};

/// Bound on decoded-but-unpublished frames held in memory.
pub const DECODE_AHEAD_FRAMES: usize = 64;

/// Delivery-error statistics for frame events, seconds late vs deadline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JitterStats {
    pub count: usize,
    pub mean_s: f64,
    pub median_s: f64,
    pub max_s: f64,
}

impl JitterStats {
    fn from_samples(mut samples: Vec<f64>) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        samples.sort_by(f64::total_cmp);
        let count = samples.len();
        Self {
            count,
            mean_s: samples.iter().sum::<f64>() / count as f64,
            median_s: samples[count / 2],
            max_s: samples[count - 1],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlaybackSummary {
    pub frames_published: usize,
    pub frames_dropped: usize,
    pub camera_infos_published: usize,
    pub clock_ticks_published: usize,
    pub passes_completed: usize,
    pub wall_duration_s: f64,
    pub jitter: JitterStats,
}

fn sleep_until(deadline: Instant) {
    loop {
        let now = Instant::now();
        if now >= deadline {
            return;
        }
        std::thread::sleep(deadline - now);
    }
}

type DecodedItem = (usize, usize, RgbFrame); // (pass, frame index, pixels)

fn decode_producer(
    session_video: &mut Box<dyn crate::decode::DecodedVideo>,
    frame_indices: &[usize],
    looping: bool,
    stop: &AtomicBool,
    tx: SyncSender<DecodedItem>,
) {
    let mut pass = 0usize;
    loop {
        for &index in frame_indices {
            if stop.load(Ordering::Relaxed) {
                return;
            }
            let frame = match session_video.read_rgb(index) {
                Ok(frame) => frame,
                // Surface decode trouble as a missing frame: the scheduler
                // counts it dropped when the deadline passes.
                Err(_) => continue,
            };
            if tx.send((pass, index, frame)).is_err() {
                return;
            }
        }
        if !looping {
            return;
        }
        pass += 1;
    }
}

struct FrameFetcher {
    rx: Receiver<DecodedItem>,
    pending: Option<DecodedItem>,
}

impl FrameFetcher {
    /// Waits for (pass, index) until `deadline`; `None` means not decoded in
    /// time. Stale earlier frames are discarded as they surface.
    fn fetch(&mut self, pass: usize, index: usize, deadline: Instant) -> Option<RgbFrame> {
        loop {
            if let Some((p, i, frame)) = self.pending.take() {
                if (p, i) == (pass, index) {
                    return Some(frame);
                }
                if (p, i) > (pass, index) {
                    // Decoder is ahead of a frame we abandoned; keep it.
                    self.pending = Some((p, i, frame));
                    return None;
                }
                // Stale frame from a missed deadline: discard and keep waiting.
                continue;
            }
            let timeout = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(timeout) {
                Ok(item) => self.pending = Some(item),
                Err(RecvTimeoutError::Timeout) | Err(RecvTimeoutError::Disconnected) => {
                    return None
                }
            }
        }
    }
}

/// Plays a session against the wall clock, dispatching to `sink`.
pub fn run_playback(
    session: &mut ReplaySession,
    options: &PlaybackOptions,
    sink: &mut dyn PlaybackSink,
) -> Result<PlaybackSummary, ReplayError> {
    let schedule = plan_schedule(&session.document, options)?;
    let frame_indices = schedule.frame_indices();
    let image_topic = options.remapped(&session.document.image_topic).to_string();
    let info_topic = options
        .remapped(&session.document.camera_info_topic)
        .to_string();

    // One nominal frame interval separates the last frame of a pass from the
    // first frame of the next.
    let pass_gap = Duration::from_secs_f64(
        1.0 / session.document.fps_nominal / options.rate,
    );
    let pass_span = schedule.wall_span() + pass_gap;
    let max_duration = options.max_duration_s.map(Duration::from_secs_f64);

    let stop = AtomicBool::new(false);
    let (tx, rx) = std::sync::mpsc::sync_channel::<DecodedItem>(DECODE_AHEAD_FRAMES);

    let document = &session.document;
    let video = &mut session.video;
    let looping = options.loop_playback;

    std::thread::scope(|scope| {
        let producer_indices = frame_indices.clone();
        let stop_ref = &stop;
        scope.spawn(move || {
            decode_producer(video, &producer_indices, looping, stop_ref, tx);
        });

        let mut fetcher = FrameFetcher { rx, pending: None };
        let mut summary = PlaybackSummary::default();
        let mut lateness = Vec::new();
        let t0 = Instant::now();
        let mut aborted: Option<ReplayError> = None;

        'passes: for pass in 0usize.. {
            let pass_base = t0 + pass_span.mul_f64(pass as f64);
            if let Some(max) = max_duration {
                if pass_base.duration_since(t0) > max {
                    break;
                }
            }
            for event in &schedule.events {
                let deadline = pass_base + schedule.wall_offset(event);
                if let Some(max) = max_duration {
                    if deadline.duration_since(t0) > max {
                        break 'passes;
                    }
                }
                let publish_result = match event.kind {
                    EventKind::ClockTick => {
                        sleep_until(deadline);
                        summary.clock_ticks_published += 1;
                        sink.publish_clock(event.sim_time)
                    }
                    EventKind::CameraInfo(_) => {
                        sleep_until(deadline);
                        summary.camera_infos_published += 1;
                        sink.publish_camera_info(
                            &info_topic,
                            event.sim_time,
                            &document.frame_id,
                            &document.camera_info,
                        )
                    }
                    EventKind::Frame(index) => {
                        match fetcher.fetch(pass, index, deadline) {
                            Some(frame) => {
                                sleep_until(deadline);
                                lateness.push(
                                    Instant::now()
                                        .saturating_duration_since(deadline)
                                        .as_secs_f64(),
                                );
                                summary.frames_published += 1;
                                let meta = FrameMetadata {
                                    seq: document.frames[index].seq,
                                    stamp: event.sim_time,
                                    frame_id: document.frame_id.clone(),
                                };
                                sink.publish_frame(&image_topic, &meta, &frame)
                            }
                            None => {
                                summary.frames_dropped += 1;
                                Ok(())
                            }
                        }
                    }
                };
                if let Err(e) = publish_result {
                    aborted = Some(ReplayError::SinkAborted {
                        message: e.to_string(),
                        summary: Box::new(PlaybackSummary::default()),
                    });
                    break 'passes;
                }
            }
            summary.passes_completed += 1;
            if !options.loop_playback {
                break;
            }
        }

        stop.store(true, Ordering::Relaxed);
        drop(fetcher); // closes the channel so a blocked producer exits

        summary.wall_duration_s = t0.elapsed().as_secs_f64();
        summary.jitter = JitterStats::from_samples(lateness);
        match aborted {
            Some(ReplayError::SinkAborted { message, .. }) => Err(ReplayError::SinkAborted {
                message,
                summary: Box::new(summary),
            }),
            Some(other) => Err(other),
            None => Ok(summary),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_stats_from_samples() {
        let stats = JitterStats::from_samples(vec![0.004, 0.001, 0.002]);
        assert_eq!(stats.count, 3);
        assert_eq!(stats.median_s, 0.002);
        assert_eq!(stats.max_s, 0.004);
        assert!((stats.mean_s - 0.007 / 3.0).abs() < 1e-12);
        assert_eq!(JitterStats::from_samples(vec![]), JitterStats::default());
    }
}
