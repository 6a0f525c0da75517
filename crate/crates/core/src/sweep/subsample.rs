//! Frame-rate subsampling: keep every n-th frame of a bundle and re-encode.
//!
//! Kept frames retain their original stamps and seq numbers; only the
//! nominal rate is divided. The stamp list of the result is therefore a
//! strict subsequence of the original timeline.

use std::path::{Path, PathBuf};

use crate::decode::VideoDecoder;
use crate::encode::{
    run_encode, Codec, EncodeJob, EncodeReport, EncoderTemplateSet, Preset, YuvStreamDesc,
};
use crate::pixel::YuvStreamWriter;
use crate::sidecar::{serialize_sidecar, SidecarDocument};

use super::SweepError;

/// Source indices kept by an every-n-th subsampling: 0, n, 2n, ...
pub fn subsample_indices(frame_count: usize, n: usize) -> Result<Vec<usize>, SweepError> {
    if n == 0 {
        return Err(SweepError::ZeroStep);
    }
    Ok((0..frame_count).step_by(n).collect())
}

/// Sidecar of the subsampled bundle: every n-th frame entry verbatim,
/// nominal fps divided by n.
pub fn subsample_document(doc: &SidecarDocument, n: usize) -> Result<SidecarDocument, SweepError> {
    let indices = subsample_indices(doc.frames.len(), n)?;
    let mut out = doc.clone();
    out.frames = indices.iter().map(|&i| doc.frames[i]).collect();
    out.fps_nominal = doc.fps_nominal / n as f64;
    Ok(out)
}

pub struct SubsampleRequest<'a> {
    pub video: &'a Path,
    pub sidecar: &'a Path,
    pub output_video: &'a Path,
    pub n: usize,
    pub codec: Codec,
    pub crf: u8,
    pub preset: Preset,
    pub templates: &'a EncoderTemplateSet,
    pub decoder: &'a dyn VideoDecoder,
}

#[derive(Debug)]
pub struct SubsampleOutcome {
    pub video_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub frame_count: usize,
    pub encode: EncodeReport,
}

/// Decodes a bundle, keeps every n-th frame, re-encodes with the given
/// settings and writes the subsampled sidecar next to the new video.
pub fn subsample_bundle(req: &SubsampleRequest<'_>) -> Result<SubsampleOutcome, SweepError> {
    let text = std::fs::read_to_string(req.sidecar).map_err(SweepError::Workspace)?;
    let doc = crate::sidecar::parse_sidecar(&text)?;
    let sub_doc = subsample_document(&doc, req.n)?;

    let mut video = req.decoder.open(req.video, doc.width, doc.height)?;
    let indices = subsample_indices(video.frame_count(), req.n)?;

    let workspace = tempfile::tempdir().map_err(SweepError::Workspace)?;
    let yuv_path = workspace.path().join("subsampled.yuv");
    let mut writer = YuvStreamWriter::create(&yuv_path, doc.width, doc.height)?;
    for &i in &indices {
        writer.write_frame(&video.read_yuv(i)?)?;
    }
    writer.finish()?;

    let job = EncodeJob {
        codec: req.codec,
        crf: req.crf,
        preset: req.preset,
        input: YuvStreamDesc {
            path: yuv_path,
            width: doc.width,
            height: doc.height,
            fps: sub_doc.fps_nominal,
        },
        output: req.output_video.to_path_buf(),
    };
    let encode = run_encode(&job, req.templates.get(req.codec)?)?;

    let sidecar_path = SidecarDocument::path_for_video(req.output_video);
    std::fs::write(&sidecar_path, serialize_sidecar(&sub_doc)?)
        .map_err(SweepError::Workspace)?;

    Ok(SubsampleOutcome {
        video_path: req.output_video.to_path_buf(),
        sidecar_path,
        frame_count: indices.len(),
        encode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sidecar::{CameraInfo, FrameEntry, FrameStamp, FORMAT_VERSION};

    fn doc(frames: usize, fps: f64) -> SidecarDocument {
        SidecarDocument {
            format_version: FORMAT_VERSION,
            image_topic: "/camera/image_raw".to_string(),
            camera_info_topic: "/camera/camera_info".to_string(),
            frame_id: "camera".to_string(),
            source_encoding: "bayer_gbrg8".to_string(),
            width: 2,
            height: 2,
            fps_nominal: fps,
            camera_info: CameraInfo::synthetic(2, 2),
            frames: (0..frames)
                .map(|i| FrameEntry {
                    seq: i as u64,
                    stamp: FrameStamp::from_nanos(i as u128 * 1_000_000_000 / fps as u128),
                })
                .collect(),
        }
    }

    #[test]
    fn every_second_frame_of_3600() {
        let original = doc(3600, 60.0);
        let sub = subsample_document(&original, 2).unwrap();
        assert_eq!(sub.frames.len(), 1800);
        assert!((sub.fps_nominal - 30.0).abs() < 1e-12);
        for (k, entry) in sub.frames.iter().enumerate() {
            assert_eq!(*entry, original.frames[2 * k]);
        }
    }

    #[test]
    fn step_one_is_identity_on_stamps() {
        let original = doc(100, 30.0);
        let sub = subsample_document(&original, 1).unwrap();
        assert_eq!(sub.frames, original.frames);
        assert_eq!(sub.fps_nominal, original.fps_nominal);
    }

    #[test]
    fn ten_frames_step_three() {
        assert_eq!(subsample_indices(10, 3).unwrap(), vec![0, 3, 6, 9]);
    }

    #[test]
    fn ceil_division_count() {
        for count in [1usize, 7, 100, 3599] {
            for n in 1..=7usize {
                let kept = subsample_indices(count, n).unwrap().len();
                assert_eq!(kept, count.div_ceil(n), "count {count} n {n}");
            }
        }
    }

    #[test]
    fn zero_step_rejected() {
        assert!(matches!(
            subsample_indices(10, 0),
            Err(SweepError::ZeroStep)
        ));
    }
}
