//! Pluggable decoded-frame sources.
//!
//! Replay and validation need frames back out of a bundle, but the container
//! codecs live in external tools. `VideoDecoder` abstracts that: the raw
//! decoder interprets a file as a bare planar YUV444 stream (stub-encoder
//! flows, tests), the command decoder shells out to convert a container into
//! such a stream first and then reads it the same way.

use std::path::Path;

use thiserror::Error;

use crate::pixel::{yuv444_to_rgb, PixelError, RgbFrame, Yuv444Frame, YuvStreamReader};
use crate::tool::{run_tool, CommandTemplate, TemplateError, ToolError};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Pixel(#[from] PixelError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("environment: {0}")]
    Environment(#[from] ToolError),
    #[error("decoder exited with status {exit_code}: {diagnostics}")]
    DecoderFailure { exit_code: i32, diagnostics: String },
    #[error("decode workspace: {0}")]
    Workspace(std::io::Error),
}

/// Random access to the decoded frames of one video.
pub trait DecodedVideo: Send {
    fn frame_count(&self) -> usize;
    fn width(&self) -> u32;
    fn height(&self) -> u32;

    fn read_yuv(&mut self, index: usize) -> Result<Yuv444Frame, DecodeError>;

    fn read_rgb(&mut self, index: usize) -> Result<RgbFrame, DecodeError> {
        Ok(yuv444_to_rgb(&self.read_yuv(index)?))
    }
}

/// Opens a video file for decoded-frame access. `width`/`height` come from
/// the sidecar; raw streams have no header to learn them from.
pub trait VideoDecoder {
    fn open(
        &self,
        video: &Path,
        width: u32,
        height: u32,
    ) -> Result<Box<dyn DecodedVideo>, DecodeError>;
}

struct RawYuvVideo {
    reader: YuvStreamReader,
}

impl DecodedVideo for RawYuvVideo {
    fn frame_count(&self) -> usize {
        self.reader.frame_count()
    }

    fn width(&self) -> u32 {
        self.reader.width()
    }

    fn height(&self) -> u32 {
        self.reader.height()
    }

    fn read_yuv(&mut self, index: usize) -> Result<Yuv444Frame, DecodeError> {
        Ok(self.reader.read_frame(index)?)
    }
}

/// Treats the video file itself as a raw planar YUV444 stream.
#[derive(Debug, Clone, Copy, Default)]
pub struct RawYuvDecoder;

impl VideoDecoder for RawYuvDecoder {
    fn open(
        &self,
        video: &Path,
        width: u32,
        height: u32,
    ) -> Result<Box<dyn DecodedVideo>, DecodeError> {
        Ok(Box::new(RawYuvVideo {
            reader: YuvStreamReader::open(video, width, height)?,
        }))
    }
}

struct CommandVideo {
    reader: YuvStreamReader,
    // Keeps the decoded temp stream alive for the reader's lifetime.
    _workspace: tempfile::TempDir,
}

impl DecodedVideo for CommandVideo {
    fn frame_count(&self) -> usize {
        self.reader.frame_count()
    }

    fn width(&self) -> u32 {
        self.reader.width()
    }

    fn height(&self) -> u32 {
        self.reader.height()
    }

    fn read_yuv(&mut self, index: usize) -> Result<Yuv444Frame, DecodeError> {
        Ok(self.reader.read_frame(index)?)
    }
}

/// Decodes a container through an external command that must produce a raw
/// planar YUV444 stream at `{output}`.
///
/// Required placeholders: `{input}`, `{output}`. Optional: `{width}`,
/// `{height}`, `{pix_fmt}`.
#[derive(Debug, Clone)]
pub struct CommandDecoder {
    pub template: CommandTemplate,
}

impl CommandDecoder {
    pub fn new(template: CommandTemplate) -> Self {
        Self { template }
    }
}

impl Default for CommandDecoder {
    fn default() -> Self {
        Self::new(CommandTemplate::new(
            "ffmpeg",
            &[
                "-hide_banner",
                "-loglevel",
                "error",
                "-y",
                "-i",
                "{input}",
                "-f",
                "rawvideo",
                "-pix_fmt",
                "{pix_fmt}",
                "{output}",
            ],
        ))
    }
}

impl VideoDecoder for CommandDecoder {
    fn open(
        &self,
        video: &Path,
        width: u32,
        height: u32,
    ) -> Result<Box<dyn DecodedVideo>, DecodeError> {
        let workspace = tempfile::tempdir().map_err(DecodeError::Workspace)?;
        let raw_path = workspace.path().join("decoded.yuv");
        let input = video.display().to_string();
        let output = raw_path.display().to_string();
        let w = width.to_string();
        let h = height.to_string();
        let args = self.template.expand(
            &[("input", input.as_str()), ("output", output.as_str())],
            &[
                ("width", w.as_str()),
                ("height", h.as_str()),
                ("pix_fmt", "yuv444p"),
            ],
        )?;
        let run = run_tool(&self.template.program, &args, None)?;
        if !run.success() {
            return Err(DecodeError::DecoderFailure {
                exit_code: run.exit_code,
                diagnostics: run.stderr_tail(),
            });
        }
        Ok(Box::new(CommandVideo {
            reader: YuvStreamReader::open(&raw_path, width, height)?,
            _workspace: workspace,
        }))
    }
}
