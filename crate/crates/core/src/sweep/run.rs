//! Executing a sweep grid: encode, score, derive, aggregate.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::encode::{run_encode, Codec, EncodeJob, EncoderTemplateSet, Preset, YuvStreamDesc};
use crate::quality::Scorer;

use super::{
    extrapolate_full_size, extrapolate_full_time, DatasetModel, SweepError, SweepRecord,
};

/// One grid point to benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SweepPoint {
    pub codec: Codec,
    pub crf: u8,
    pub preset: Preset,
}

impl std::fmt::Display for SweepPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} crf {} preset {}", self.codec, self.crf, self.preset)
    }
}

/// Everything a sweep needs besides the grid itself.
pub struct SweepContext<'a> {
    /// Prepared ground-truth clip; also the encoder input.
    pub clip: YuvStreamDesc,
    pub templates: &'a EncoderTemplateSet,
    pub scorer: &'a dyn Scorer,
    pub model: DatasetModel,
    pub workers: usize,
    /// Where encoded outputs are written (one file per grid point).
    pub workdir: &'a Path,
    /// Keep encoded outputs instead of deleting them after scoring.
    pub keep_outputs: bool,
}

#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub point: SweepPoint,
    pub error: String,
}

#[derive(Debug)]
pub struct SweepOutcome {
    /// One record per successful grid point, in (codec, crf, preset) order.
    pub records: Vec<SweepRecord>,
    /// Failed grid points, same ordering.
    pub failures: Vec<SweepFailure>,
}

fn bench_point(point: &SweepPoint, ctx: &SweepContext<'_>) -> Result<SweepRecord, SweepError> {
    let output = ctx.workdir.join(format!(
        "{}-crf{}-p{}.mp4",
        point.codec, point.crf, point.preset
    ));
    let job = EncodeJob {
        codec: point.codec,
        crf: point.crf,
        preset: point.preset,
        input: ctx.clip.clone(),
        output: output.clone(),
    };
    let encode = run_encode(&job, ctx.templates.get(point.codec)?)?;
    let quality = ctx.scorer.score(&ctx.clip.path, &output);
    if !ctx.keep_outputs {
        let _ = std::fs::remove_file(&output);
    }
    let quality = quality?;
    Ok(SweepRecord {
        codec: point.codec,
        crf: point.crf,
        preset: point.preset,
        encode_time_s: encode.wall_time_s,
        size_bytes: encode.output_size,
        bitrate_kbps: encode.bitrate_kbps,
        vmaf_mean: quality.mean,
        full_size_gb: extrapolate_full_size(encode.bitrate_kbps, &ctx.model),
        full_time_days: extrapolate_full_time(encode.wall_time_s, &ctx.model),
    })
}

/// Benchmarks every grid point. Points run concurrently up to
/// `ctx.workers`; per-point failures are recorded and the sweep continues.
/// Output order is always (codec, crf, preset), regardless of completion
/// order. A sweep where every point failed is an error.
pub fn run_sweep(points: &[SweepPoint], ctx: &SweepContext<'_>) -> Result<SweepOutcome, SweepError> {
    let mut ordered: Vec<SweepPoint> = points.to_vec();
    ordered.sort();
    ordered.dedup();

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SweepRecord, SweepError>>>> =
        Mutex::new((0..ordered.len()).map(|_| None).collect());
    let workers = ctx.workers.max(1).min(ordered.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= ordered.len() {
                    break;
                }
                let result = bench_point(&ordered[i], ctx);
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (point, slot) in ordered.iter().zip(slots.into_inner().unwrap()) {
        match slot.expect("every point visited") {
            Ok(record) => records.push(record),
            Err(error) => failures.push(SweepFailure {
                point: *point,
                error: error.to_string(),
            }),
        }
    }
    if records.is_empty() && !failures.is_empty() {
        return Err(SweepError::AllPointsFailed {
            failed: failures.len(),
            first: failures[0].error.clone(),
        });
    }
    Ok(SweepOutcome { records, failures })
}
