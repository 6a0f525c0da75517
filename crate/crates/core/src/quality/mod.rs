//! Quality scoring of compressed video against YUV444 ground truth.
//!
//! PSNR is computed natively so the pipeline is testable with nothing
//! installed; perceptual scoring drives an external VMAF tool (see [`vmaf`]).
//! Both produce per-frame score lists that aggregate to a mean — the mean is
//! what selection policies compare against the quality floor.

pub mod vmaf;

pub use vmaf::{run_external_vmaf, VmafTool};

use std::path::Path;

use thiserror::Error;

use crate::decode::{DecodeError, VideoDecoder};
use crate::pixel::{PixelError, Yuv444Frame, YuvStreamReader};
use crate::tool::{TemplateError, ToolError};

/// Score assigned when reference and distorted frames are identical.
pub const PSNR_CAP_DB: f64 = 100.0;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("frame count mismatch: reference has {reference}, distorted has {distorted}")]
    FrameCountMismatch { reference: usize, distorted: usize },
    #[error(
        "dimension mismatch: reference {ref_width}x{ref_height}, distorted {dist_width}x{dist_height}"
    )]
    DimensionMismatch {
        ref_width: u32,
        ref_height: u32,
        dist_width: u32,
        dist_height: u32,
    },
    #[error("no frame scores to aggregate")]
    EmptyScores,
    #[error(transparent)]
    Pixel(#[from] PixelError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("environment: {0}")]
    Environment(#[from] ToolError),
    #[error("scoring tool exited with status {exit_code}: {diagnostics}")]
    ToolFailure { exit_code: i32, diagnostics: String },
    #[error("score report at `{json_path}`: {reason}")]
    ReportParse { json_path: String, reason: String },
    #[error("report I/O: {0}")]
    ReportIo(std::io::Error),
}

/// Ordered per-frame scores: dimensionless for VMAF, dB for PSNR.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScores(pub Vec<f64>);

impl FrameScores {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Aggregated quality of one video: per-frame scores plus mean and min.
#[derive(Debug, Clone, PartialEq)]
pub struct QualitySummary {
    pub metric: String,
    pub scores: Vec<f64>,
    pub mean: f64,
    pub min: f64,
}

/// Mean-of-frames aggregation; the mean is the video's score.
pub fn aggregate(metric: &str, scores: &FrameScores) -> Result<QualitySummary, QualityError> {
    if scores.is_empty() {
        return Err(QualityError::EmptyScores);
    }
    let sum: f64 = scores.0.iter().sum();
    let min = scores.0.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(QualitySummary {
        metric: metric.to_string(),
        scores: scores.0.clone(),
        mean: sum / scores.len() as f64,
        min,
    })
}

/// PSNR of one frame pair over all 3*W*H samples, capped at
/// [`PSNR_CAP_DB`] for identical frames.
pub fn psnr_frame(reference: &Yuv444Frame, distorted: &Yuv444Frame) -> Result<f64, QualityError> {
    if reference.width() != distorted.width() || reference.height() != distorted.height() {
        return Err(QualityError::DimensionMismatch {
            ref_width: reference.width(),
            ref_height: reference.height(),
            dist_width: distorted.width(),
            dist_height: distorted.height(),
        });
    }
    let mut sum_sq: u64 = 0;
    for (a, b) in [
        (reference.y(), distorted.y()),
        (reference.u(), distorted.u()),
        (reference.v(), distorted.v()),
    ] {
        for (&x, &y) in a.iter().zip(b) {
            let d = i64::from(x) - i64::from(y);
            sum_sq += (d * d) as u64;
        }
    }
    if sum_sq == 0 {
        return Ok(PSNR_CAP_DB);
    }
    let samples = 3.0 * reference.width() as f64 * reference.height() as f64;
    let mse = sum_sq as f64 / samples;
    Ok((10.0 * (255.0 * 255.0 / mse).log10()).min(PSNR_CAP_DB))
}

/// Frame-by-frame PSNR of two raw YUV444 streams of equal shape.
pub fn psnr_sequence(
    reference: &Path,
    distorted: &Path,
    width: u32,
    height: u32,
) -> Result<QualitySummary, QualityError> {
    let mut ref_reader = YuvStreamReader::open(reference, width, height)?;
    let mut dist_reader = YuvStreamReader::open(distorted, width, height)?;
    if ref_reader.frame_count() != dist_reader.frame_count() {
        return Err(QualityError::FrameCountMismatch {
            reference: ref_reader.frame_count(),
            distorted: dist_reader.frame_count(),
        });
    }
    let scores: Vec<f64> = (0..ref_reader.frame_count())
        .map(|i| {
            let r = ref_reader.read_frame(i)?;
            let d = dist_reader.read_frame(i)?;
            psnr_frame(&r, &d)
        })
        .collect::<Result<_, _>>()?;
    aggregate("psnr", &FrameScores(scores))
}

/// Scores an encoded file against raw YUV444 ground truth.
pub trait Scorer: Send + Sync {
    fn metric(&self) -> &str;
    fn score(&self, reference: &Path, distorted: &Path) -> Result<QualitySummary, QualityError>;
}

/// Native PSNR scorer. With a decoder, `distorted` may be any container the
/// decoder understands; without one it must already be a raw YUV444 stream.
pub struct PsnrScorer<'a> {
    pub width: u32,
    pub height: u32,
    pub decoder: Option<&'a (dyn VideoDecoder + Sync)>,
}

impl Scorer for PsnrScorer<'_> {
    fn metric(&self) -> &str {
        "psnr"
    }

    fn score(&self, reference: &Path, distorted: &Path) -> Result<QualitySummary, QualityError> {
        match self.decoder {
            None => psnr_sequence(reference, distorted, self.width, self.height),
            Some(decoder) => {
                let mut video = decoder.open(distorted, self.width, self.height)?;
                let mut ref_reader = YuvStreamReader::open(reference, self.width, self.height)?;
                if ref_reader.frame_count() != video.frame_count() {
                    return Err(QualityError::FrameCountMismatch {
                        reference: ref_reader.frame_count(),
                        distorted: video.frame_count(),
                    });
                }
                let scores: Vec<f64> = (0..video.frame_count())
                    .map(|i| {
                        let r = ref_reader.read_frame(i)?;
                        let d = video.read_yuv(i)?;
                        psnr_frame(&r, &d)
                    })
                    .collect::<Result<_, _>>()?;
                aggregate("psnr", &FrameScores(scores))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pixel::write_yuv444_stream;

    fn flat(fill: u8) -> Yuv444Frame {
        Yuv444Frame::new(2, 2, vec![fill; 4], vec![fill; 4], vec![fill; 4]).unwrap()
    }

    #[test]
    fn identical_frames_hit_the_cap() {
        assert_eq!(psnr_frame(&flat(42), &flat(42)).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn single_sample_full_error_matches_formula() {
        let reference = flat(0);
        let mut y = vec![0u8; 4];
        y[0] = 255;
        let distorted = Yuv444Frame::new(2, 2, y, vec![0; 4], vec![0; 4]).unwrap();
        let psnr = psnr_frame(&reference, &distorted).unwrap();
        // MSE = 255^2 / 12, so PSNR = 10 log10(12).
        assert!((psnr - 10.0 * 12f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn swapping_reference_and_distorted_is_symmetric() {
        let a = Yuv444Frame::new(2, 2, vec![9, 0, 3, 200], vec![4; 4], vec![5; 4]).unwrap();
        let b = Yuv444Frame::new(2, 2, vec![0, 7, 3, 100], vec![4; 4], vec![9; 4]).unwrap();
        assert_eq!(psnr_frame(&a, &b).unwrap(), psnr_frame(&b, &a).unwrap());
    }

    #[test]
    fn psnr_strictly_decreases_with_error_magnitude() {
        let reference = flat(0);
        let mut previous = f64::INFINITY;
        for error in 1..=255u16 {
            let mut y = vec![0u8; 4];
            y[0] = error as u8;
            let distorted = Yuv444Frame::new(2, 2, y, vec![0; 4], vec![0; 4]).unwrap();
            let psnr = psnr_frame(&reference, &distorted).unwrap();
            assert!(psnr < previous, "error {error}: {psnr} !< {previous}");
            previous = psnr;
        }
    }

    #[test]
    fn sequence_count_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let ten: Vec<Yuv444Frame> = (0..10).map(|_| flat(1)).collect();
        let nine: Vec<Yuv444Frame> = (0..9).map(|_| flat(1)).collect();
        let a = dir.path().join("a.yuv");
        let b = dir.path().join("b.yuv");
        write_yuv444_stream(ten.iter(), &a).unwrap();
        write_yuv444_stream(nine.iter(), &b).unwrap();
        assert!(matches!(
            psnr_sequence(&a, &b, 2, 2),
            Err(QualityError::FrameCountMismatch {
                reference: 10,
                distorted: 9
            })
        ));
    }

    #[test]
    fn aggregate_mean_and_min() {
        let summary = aggregate("vmaf", &FrameScores(vec![99.0, 100.0])).unwrap();
        assert!((summary.mean - 99.5).abs() < 1e-12);
        assert_eq!(summary.min, 99.0);

        let constant = aggregate("vmaf", &FrameScores(vec![7.5; 31])).unwrap();
        assert_eq!(constant.mean, 7.5);
        assert_eq!(constant.min, 7.5);

        assert!(matches!(
            aggregate("vmaf", &FrameScores(vec![])),
            Err(QualityError::EmptyScores)
        ));
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let mut scores: Vec<f64> = (0..100).map(|i| (i * 37 % 101) as f64 / 3.0).collect();
        let forward = aggregate("m", &FrameScores(scores.clone())).unwrap();
        scores.reverse();
        let backward = aggregate("m", &FrameScores(scores)).unwrap();
        assert!((forward.mean - backward.mean).abs() < 1e-9);
        assert_eq!(forward.min, backward.min);
    }
}
