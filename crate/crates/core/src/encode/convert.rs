//! The convert pipeline: raw bayer sequence -> encoded video + sidecar.
//!
//! Frames stream through debayer and YUV conversion into a temporary planar
//! file, the encoder runs over that, and the sidecar is written with the
//! manifest's stamps copied verbatim. On any failure the partial video and
//! sidecar are removed.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::decode::{DecodeError, VideoDecoder};
use crate::pixel::{
    debayer_gbrg8, open_sequence, rgb_to_yuv444, YuvStreamWriter, PIXEL_FORMAT_BAYER_GBRG8,
};
use crate::pixel::{ManifestError, PixelError};
use crate::sidecar::{
    serialize_sidecar, validate_bundle, CameraInfo, FrameEntry, SidecarDocument, SidecarError,
    ValidationReport, FORMAT_VERSION,
};

use super::{run_encode, Codec, EncodeError, EncodeJob, EncodeReport, EncoderTemplateSet, Preset,
    YuvStreamDesc};

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Pixel(#[from] PixelError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Sidecar(#[from] SidecarError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("converted bundle failed validation: {report}")]
    Inconsistent { report: ValidationReport },
    #[error("convert workspace: {0}")]
    Workspace(std::io::Error),
}

/// Parameters for one conversion.
pub struct ConvertRequest<'a> {
    pub manifest_path: &'a Path,
    pub output_video: &'a Path,
    pub codec: Codec,
    pub crf: u8,
    pub preset: Preset,
    pub templates: &'a EncoderTemplateSet,
    /// When set, the finished bundle is decoded back and cross-checked
    /// against the sidecar before the call returns.
    pub probe: Option<&'a dyn VideoDecoder>,
}

#[derive(Debug)]
pub struct ConvertOutcome {
    pub video_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub frame_count: usize,
    pub encode: EncodeReport,
}

pub fn convert_bundle(req: &ConvertRequest<'_>) -> Result<ConvertOutcome, ConvertError> {
    let video_path = req.output_video.to_path_buf();
    let sidecar_path = SidecarDocument::path_for_video(&video_path);
    let outcome = convert_inner(req, &video_path, &sidecar_path);
    if outcome.is_err() {
        let _ = std::fs::remove_file(&video_path);
        let _ = std::fs::remove_file(&sidecar_path);
    }
    outcome
}

fn convert_inner(
    req: &ConvertRequest<'_>,
    video_path: &Path,
    sidecar_path: &Path,
) -> Result<ConvertOutcome, ConvertError> {
    let reader = open_sequence(req.manifest_path)?;
    let manifest = reader.manifest().clone();

    let workspace = tempfile::tempdir().map_err(ConvertError::Workspace)?;
    let yuv_path = workspace.path().join("sequence.yuv");
    let mut writer = YuvStreamWriter::create(&yuv_path, manifest.width, manifest.height)?;
    let mut entries = Vec::with_capacity(reader.len());
    for item in reader {
        let (meta, bayer) = item?;
        let rgb = debayer_gbrg8(&bayer)?;
        writer.write_frame(&rgb_to_yuv444(&rgb))?;
        entries.push(FrameEntry {
            seq: meta.seq,
            stamp: meta.stamp,
        });
    }
    writer.finish()?;
    let frame_count = entries.len();

    let job = EncodeJob {
        codec: req.codec,
        crf: req.crf,
        preset: req.preset,
        input: YuvStreamDesc {
            path: yuv_path,
            width: manifest.width,
            height: manifest.height,
            fps: manifest.fps_nominal,
        },
        output: video_path.to_path_buf(),
    };
    let encode = run_encode(&job, req.templates.get(req.codec)?)?;

    let camera_info = manifest
        .camera_info
        .clone()
        .unwrap_or_else(|| CameraInfo::synthetic(manifest.width, manifest.height));
    let doc = SidecarDocument {
        format_version: FORMAT_VERSION,
        image_topic: manifest.image_topic.clone(),
        camera_info_topic: manifest.camera_info_topic.clone(),
        frame_id: manifest.frame_id.clone(),
        source_encoding: PIXEL_FORMAT_BAYER_GBRG8.to_string(),
        width: manifest.width,
        height: manifest.height,
        fps_nominal: manifest.fps_nominal,
        camera_info,
        frames: entries,
    };
    std::fs::write(sidecar_path, serialize_sidecar(&doc)?)
        .map_err(|e| PixelError::io(format!("writing {}", sidecar_path.display()), e))?;

    if let Some(decoder) = req.probe {
        let video = decoder.open(video_path, doc.width, doc.height)?;
        let report = validate_bundle(&doc, video.frame_count(), video.width(), video.height());
        if !report.passed() {
            return Err(ConvertError::Inconsistent { report });
        }
    }

    Ok(ConvertOutcome {
        video_path: video_path.to_path_buf(),
        sidecar_path: sidecar_path.to_path_buf(),
        frame_count,
        encode,
    })
}
