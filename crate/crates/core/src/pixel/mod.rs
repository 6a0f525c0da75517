//! Raw-frame representations and the conversions between them.
//!
//! The sensor path is: GBRG bayer mosaic -> interleaved RGB -> planar YUV444.
//! YUV444 streams are both the encoder input and the quality-scoring ground
//! truth, so conversions here are deterministic and integer-exact: averages
//! and matrix outputs round half up, then clamp to `[0, 255]`.

mod color;
mod debayer;
mod sequence;
mod yuv;

pub use color::{rgb_to_yuv444, yuv444_to_rgb};
pub use debayer::debayer_gbrg8;
pub use sequence::{
    open_sequence, parse_manifest, FrameLocator, ManifestError, ManifestFrame, SequenceManifest,
    SequenceReader, PIXEL_FORMAT_BAYER_GBRG8,
};
pub use yuv::{
    read_yuv444_stream, write_yuv444_stream, YuvStreamReader, YuvStreamWriter,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PixelError {
    #[error("invalid mosaic: {width}x{height} must be even and at least 2 in both dimensions")]
    InvalidMosaic { width: u32, height: u32 },
    #[error("frame data length {got} does not match {expected} for {width}x{height}")]
    DataLength {
        width: u32,
        height: u32,
        expected: usize,
        got: usize,
    },
    #[error(
        "frame dimensions {width}x{height} do not match stream dimensions {stream_width}x{stream_height}"
    )]
    DimensionMismatch {
        width: u32,
        height: u32,
        stream_width: u32,
        stream_height: u32,
    },
    #[error("{path}: stream length {len} is not a multiple of the {frame_size}-byte frame size")]
    TruncatedStream {
        path: std::path::PathBuf,
        len: u64,
        frame_size: u64,
    },
    #[error("frame index {index} out of range ({count} frames)")]
    FrameIndex { index: usize, count: usize },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl PixelError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        PixelError::Io {
            context: context.into(),
            source,
        }
    }
}

/// A single-channel GBRG mosaic frame: even rows alternate G,B; odd rows R,G.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BayerFrame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl BayerFrame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, PixelError> {
        if width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 {
            return Err(PixelError::InvalidMosaic { width, height });
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(PixelError::DataLength {
                width,
                height,
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn sample(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }
}

/// Interleaved 8-bit R,G,B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbFrame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, PixelError> {
        let expected = 3 * width as usize * height as usize;
        if data.len() != expected {
            return Err(PixelError::DataLength {
                width,
                height,
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> (u8, u8, u8) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }
}

/// Planar full-resolution luma + chroma, one byte per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Yuv444Frame {
    width: u32,
    height: u32,
    y: Vec<u8>,
    u: Vec<u8>,
    v: Vec<u8>,
}

impl Yuv444Frame {
    pub fn new(
        width: u32,
        height: u32,
        y: Vec<u8>,
        u: Vec<u8>,
        v: Vec<u8>,
    ) -> Result<Self, PixelError> {
        let expected = width as usize * height as usize;
        for plane in [&y, &u, &v] {
            if plane.len() != expected {
                return Err(PixelError::DataLength {
                    width,
                    height,
                    expected,
                    got: plane.len(),
                });
            }
        }
        Ok(Self {
            width,
            height,
            y,
            u,
            v,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn u(&self) -> &[u8] {
        &self.u
    }

    pub fn v(&self) -> &[u8] {
        &self.v
    }

    /// Bytes per frame in a planar 4:4:4 stream.
    pub fn byte_len(&self) -> usize {
        3 * self.width as usize * self.height as usize
    }
}
