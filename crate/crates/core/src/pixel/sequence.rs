//! Raw-sequence ingestion: a YAML manifest naming timestamped bayer frames.
//!
//! The manifest shares the sidecar dialect (same stamp and camera_info
//! layout) plus a `pixel_format` tag and frame locators. Frames live either
//! in one packed file of concatenated W*H-byte mosaics (`data: <path>`,
//! preferred) or in one file per frame (`file:` on each entry). Paths are
//! resolved relative to the manifest's directory.

use std::fs::File;
use std::io::{BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::sidecar::{
    derive_fps, validate_frame_order, CameraInfo, FrameEntry, FrameMetadata, FrameStamp,
    SidecarError,
};

use super::{BayerFrame, PixelError};

pub const PIXEL_FORMAT_BAYER_GBRG8: &str = "bayer_gbrg8";

const DEFAULT_IMAGE_TOPIC: &str = "/camera/image_raw";
const DEFAULT_CAMERA_INFO_TOPIC: &str = "/camera/camera_info";
const DEFAULT_FRAME_ID: &str = "camera";

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest is not well-formed YAML: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("missing mandatory field `{field}`")]
    MissingField { field: &'static str },
    #[error("unsupported pixel_format `{found}` (supported: {PIXEL_FORMAT_BAYER_GBRG8})")]
    UnsupportedPixelFormat { found: String },
    #[error("frame {index}: no locator; provide `data` at top level or `file` per frame")]
    MissingLocator { index: usize },
    #[error("frame {index}: has `file` but the manifest also names a packed `data` file")]
    ConflictingLocator { index: usize },
    #[error("{0}")]
    Order(#[from] SidecarError),
    #[error("locator {locator}: {reason}")]
    Unresolvable { locator: String, reason: String },
    #[error("{0}")]
    Pixel(#[from] PixelError),
}

/// Where one frame's bytes live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameLocator {
    /// Frame `index` within a packed file of concatenated mosaics.
    Packed { file: PathBuf, index: u64 },
    /// A standalone file holding exactly one mosaic.
    File(PathBuf),
}

impl std::fmt::Display for FrameLocator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameLocator::Packed { file, index } => {
                write!(f, "{}#{}", file.display(), index)
            }
            FrameLocator::File(path) => write!(f, "{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestFrame {
    pub seq: u64,
    pub stamp: FrameStamp,
    pub locator: FrameLocator,
}

/// A validated raw-sequence description.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub width: u32,
    pub height: u32,
    pub pixel_format: String,
    pub fps_nominal: f64,
    pub image_topic: String,
    pub camera_info_topic: String,
    pub frame_id: String,
    pub camera_info: Option<CameraInfo>,
    pub frames: Vec<ManifestFrame>,
}

impl SequenceManifest {
    pub fn frame_size(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn stamps(&self) -> Vec<FrameStamp> {
        self.frames.iter().map(|f| f.stamp).collect()
    }
}

#[derive(Debug, Deserialize)]
struct RawManifest {
    #[serde(default)]
    format_version: Option<u32>,
    pixel_format: Option<String>,
    width: Option<u32>,
    height: Option<u32>,
    fps_nominal: Option<f64>,
    image_topic: Option<String>,
    camera_info_topic: Option<String>,
    frame_id: Option<String>,
    camera_info: Option<CameraInfo>,
    data: Option<PathBuf>,
    frames: Option<Vec<RawManifestFrame>>,
}

#[derive(Debug, Deserialize)]
struct RawManifestFrame {
    seq: u64,
    stamp: FrameStamp,
    file: Option<PathBuf>,
}

/// Parses a manifest, resolving frame locators against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<SequenceManifest, ManifestError> {
    let raw: RawManifest = serde_yaml::from_str(text)?;
    let _ = raw.format_version; // accepted for dialect symmetry, single version
    let pixel_format = raw
        .pixel_format
        .ok_or(ManifestError::MissingField {
            field: "pixel_format",
        })?;
    if pixel_format != PIXEL_FORMAT_BAYER_GBRG8 {
        return Err(ManifestError::UnsupportedPixelFormat {
            found: pixel_format,
        });
    }
    let width = raw.width.ok_or(ManifestError::MissingField { field: "width" })?;
    let height = raw
        .height
        .ok_or(ManifestError::MissingField { field: "height" })?;
    let raw_frames = raw
        .frames
        .ok_or(ManifestError::MissingField { field: "frames" })?;
    if raw_frames.is_empty() {
        return Err(SidecarError::EmptyFrames.into());
    }

    let packed = raw.data.map(|p| base_dir.join(p));
    let mut frames = Vec::with_capacity(raw_frames.len());
    for (index, rf) in raw_frames.into_iter().enumerate() {
        let locator = match (&packed, rf.file) {
            (Some(_), Some(_)) => return Err(ManifestError::ConflictingLocator { index }),
            (Some(file), None) => FrameLocator::Packed {
                file: file.clone(),
                index: index as u64,
            },
            (None, Some(path)) => FrameLocator::File(base_dir.join(path)),
            (None, None) => return Err(ManifestError::MissingLocator { index }),
        };
        frames.push(ManifestFrame {
            seq: rf.seq,
            stamp: rf.stamp,
            locator,
        });
    }

    let entries: Vec<FrameEntry> = frames
        .iter()
        .map(|f| FrameEntry {
            seq: f.seq,
            stamp: f.stamp,
        })
        .collect();
    validate_frame_order(&entries)?;

    let fps_nominal = match raw.fps_nominal {
        Some(fps) => fps,
        None => derive_fps(&entries).ok_or(ManifestError::MissingField {
            field: "fps_nominal",
        })?,
    };

    Ok(SequenceManifest {
        width,
        height,
        pixel_format,
        fps_nominal,
        image_topic: raw
            .image_topic
            .unwrap_or_else(|| DEFAULT_IMAGE_TOPIC.to_string()),
        camera_info_topic: raw
            .camera_info_topic
            .unwrap_or_else(|| DEFAULT_CAMERA_INFO_TOPIC.to_string()),
        frame_id: raw.frame_id.unwrap_or_else(|| DEFAULT_FRAME_ID.to_string()),
        camera_info: raw.camera_info,
        frames,
    })
}

/// Iterator over a sequence's frames, in stamp order.
pub struct SequenceReader {
    manifest: SequenceManifest,
    packed: Option<BufReader<File>>,
    next: usize,
}

impl SequenceReader {
    pub fn manifest(&self) -> &SequenceManifest {
        &self.manifest
    }

    pub fn len(&self) -> usize {
        self.manifest.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.frames.is_empty()
    }

    fn read_frame(&mut self, index: usize) -> Result<BayerFrame, ManifestError> {
        let frame_size = self.manifest.frame_size() as usize;
        let mut buf = vec![0u8; frame_size];
        let entry = &self.manifest.frames[index];
        match &entry.locator {
            FrameLocator::Packed { index, .. } => {
                let reader = self.packed.as_mut().expect("packed reader opened at open()");
                reader
                    .seek(SeekFrom::Start(index * frame_size as u64))
                    .and_then(|_| reader.read_exact(&mut buf))
                    .map_err(|e| PixelError::io(format!("reading {}", entry.locator), e))?;
            }
            FrameLocator::File(path) => {
                let mut file = File::open(path)
                    .map_err(|e| PixelError::io(format!("opening {}", entry.locator), e))?;
                file.read_exact(&mut buf)
                    .map_err(|e| PixelError::io(format!("reading {}", entry.locator), e))?;
            }
        }
        Ok(BayerFrame::new(
            self.manifest.width,
            self.manifest.height,
            buf,
        )?)
    }
}

impl Iterator for SequenceReader {
    type Item = Result<(FrameMetadata, BayerFrame), ManifestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.manifest.frames.len() {
            return None;
        }
        let index = self.next;
        self.next += 1;
        let entry = &self.manifest.frames[index];
        let meta = FrameMetadata {
            seq: entry.seq,
            stamp: entry.stamp,
            frame_id: self.manifest.frame_id.clone(),
        };
        Some(self.read_frame(index).map(|frame| (meta, frame)))
    }
}

/// Opens a sequence for reading: parses the manifest and verifies every
/// frame locator is resolvable before yielding anything.
pub fn open_sequence(manifest_path: &Path) -> Result<SequenceReader, ManifestError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| {
        PixelError::io(format!("reading manifest {}", manifest_path.display()), e)
    })?;
    let base_dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let manifest = parse_manifest(&text, base_dir)?;
    let frame_size = manifest.frame_size();

    let mut packed = None;
    for frame in &manifest.frames {
        match &frame.locator {
            FrameLocator::Packed { file, index } => {
                if packed.is_none() {
                    let len = std::fs::metadata(file)
                        .map_err(|e| ManifestError::Unresolvable {
                            locator: frame.locator.to_string(),
                            reason: e.to_string(),
                        })?
                        .len();
                    let needed = frame_size * manifest.frames.len() as u64;
                    if len < needed {
                        return Err(ManifestError::Unresolvable {
                            locator: frame.locator.to_string(),
                            reason: format!(
                                "packed file holds {len} bytes, {needed} needed for {} frames",
                                manifest.frames.len()
                            ),
                        });
                    }
                    packed = Some(BufReader::new(File::open(file).map_err(|e| {
                        ManifestError::Unresolvable {
                            locator: frame.locator.to_string(),
                            reason: e.to_string(),
                        }
                    })?));
                }
                let _ = index;
            }
            FrameLocator::File(path) => {
                let len = std::fs::metadata(path)
                    .map_err(|e| ManifestError::Unresolvable {
                        locator: frame.locator.to_string(),
                        reason: e.to_string(),
                    })?
                    .len();
                if len != frame_size {
                    return Err(ManifestError::Unresolvable {
                        locator: frame.locator.to_string(),
                        reason: format!("frame file holds {len} bytes, expected {frame_size}"),
                    });
                }
            }
        }
    }

    Ok(SequenceReader {
        manifest,
        packed,
        next: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_manifest(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("seq.yaml");
        std::fs::write(&path, body).unwrap();
        path
    }

    fn packed_sequence(dir: &Path, frames: usize) -> PathBuf {
        let mut f = File::create(dir.join("frames.raw")).unwrap();
        for i in 0..frames {
            f.write_all(&vec![i as u8; 4]).unwrap();
        }
        write_manifest(
            dir,
            "pixel_format: bayer_gbrg8\n\
             width: 2\n\
             height: 2\n\
             data: frames.raw\n\
             frames:\n\
             - {seq: 0, stamp: {sec: 0, nsec: 0}}\n\
             - {seq: 1, stamp: {sec: 0, nsec: 100000000}}\n\
             - {seq: 2, stamp: {sec: 0, nsec: 200000000}}\n",
        )
    }

    #[test]
    fn packed_sequence_yields_frames_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = packed_sequence(dir.path(), 3);
        let reader = open_sequence(&manifest).unwrap();
        assert_eq!(reader.len(), 3);
        let frames: Vec<_> = reader.map(Result::unwrap).collect();
        assert_eq!(frames.len(), 3);
        for (i, (meta, frame)) in frames.iter().enumerate() {
            assert_eq!(meta.seq, i as u64);
            assert!(frame.data().iter().all(|&b| b == i as u8));
        }
        assert!(frames.windows(2).all(|w| w[0].0.stamp < w[1].0.stamp));
    }

    #[test]
    fn absent_frame_file_names_the_locator() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_manifest(
            dir.path(),
            "pixel_format: bayer_gbrg8\n\
             width: 2\n\
             height: 2\n\
             fps_nominal: 10.0\n\
             frames:\n\
             - {seq: 0, stamp: {sec: 0, nsec: 0}, file: gone.raw}\n",
        );
        match open_sequence(&manifest) {
            Err(ManifestError::Unresolvable { locator, .. }) => {
                assert!(locator.contains("gone.raw"), "locator = {locator}");
            }
            Err(other) => panic!("expected unresolvable locator, got {other:?}"),
            Ok(_) => panic!("expected unresolvable locator, got a reader"),
        }
    }

    #[test]
    fn non_increasing_stamps_rejected() {
        let dir = tempfile::tempdir().unwrap();
        File::create(dir.path().join("frames.raw"))
            .unwrap()
            .write_all(&[0; 8])
            .unwrap();
        let manifest = write_manifest(
            dir.path(),
            "pixel_format: bayer_gbrg8\n\
             width: 2\n\
             height: 2\n\
             data: frames.raw\n\
             frames:\n\
             - {seq: 0, stamp: {sec: 2, nsec: 0}}\n\
             - {seq: 1, stamp: {sec: 1, nsec: 0}}\n",
        );
        assert!(matches!(
            open_sequence(&manifest),
            Err(ManifestError::Order(SidecarError::NonMonotonicStamps { .. }))
        ));
    }

    #[test]
    fn fps_defaults_from_stamps() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = packed_sequence(dir.path(), 3);
        let reader = open_sequence(&manifest).unwrap();
        assert!((reader.manifest().fps_nominal - 10.0).abs() < 1e-9);
    }
}
