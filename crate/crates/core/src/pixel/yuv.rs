//! Raw planar YUV444 stream I/O: frame-ordered Y,U,V planes, no container.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::{PixelError, Yuv444Frame};

/// Streams frames to a raw planar file, enforcing uniform dimensions.
pub struct YuvStreamWriter {
    out: BufWriter<File>,
    path: PathBuf,
    width: u32,
    height: u32,
    frames: u64,
}

impl YuvStreamWriter {
    pub fn create(path: &Path, width: u32, height: u32) -> Result<Self, PixelError> {
        let file = File::create(path)
            .map_err(|e| PixelError::io(format!("creating {}", path.display()), e))?;
        Ok(Self {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
            width,
            height,
            frames: 0,
        })
    }

    pub fn write_frame(&mut self, frame: &Yuv444Frame) -> Result<(), PixelError> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(PixelError::DimensionMismatch {
                width: frame.width(),
                height: frame.height(),
                stream_width: self.width,
                stream_height: self.height,
            });
        }
        let write = |out: &mut BufWriter<File>, plane: &[u8]| {
            out.write_all(plane)
                .map_err(|e| PixelError::io(format!("writing {}", self.path.display()), e))
        };
        write(&mut self.out, frame.y())?;
        write(&mut self.out, frame.u())?;
        write(&mut self.out, frame.v())?;
        self.frames += 1;
        Ok(())
    }

    /// Flushes and returns the total byte count written.
    pub fn finish(mut self) -> Result<u64, PixelError> {
        self.out
            .flush()
            .map_err(|e| PixelError::io(format!("flushing {}", self.path.display()), e))?;
        Ok(self.frames * 3 * u64::from(self.width) * u64::from(self.height))
    }

    pub fn frames_written(&self) -> u64 {
        self.frames
    }
}

/// Writes frames as one raw planar stream and returns the byte count.
pub fn write_yuv444_stream<'a, I>(frames: I, path: &Path) -> Result<u64, PixelError>
where
    I: IntoIterator<Item = &'a Yuv444Frame>,
{
    let mut iter = frames.into_iter();
    let first = match iter.next() {
        Some(f) => f,
        None => {
            // Zero frames: an empty file with no dimensions to enforce.
            File::create(path)
                .map_err(|e| PixelError::io(format!("creating {}", path.display()), e))?;
            return Ok(0);
        }
    };
    let mut writer = YuvStreamWriter::create(path, first.width(), first.height())?;
    writer.write_frame(first)?;
    for frame in iter {
        writer.write_frame(frame)?;
    }
    writer.finish()
}

/// Random-access reader over a raw planar stream of known dimensions.
pub struct YuvStreamReader {
    file: BufReader<File>,
    path: PathBuf,
    width: u32,
    height: u32,
    frame_count: usize,
}

impl YuvStreamReader {
    pub fn open(path: &Path, width: u32, height: u32) -> Result<Self, PixelError> {
        let file =
            File::open(path).map_err(|e| PixelError::io(format!("opening {}", path.display()), e))?;
        let len = file
            .metadata()
            .map_err(|e| PixelError::io(format!("stat {}", path.display()), e))?
            .len();
        let frame_size = 3 * u64::from(width) * u64::from(height);
        if frame_size == 0 || len % frame_size != 0 {
            return Err(PixelError::TruncatedStream {
                path: path.to_path_buf(),
                len,
                frame_size,
            });
        }
        Ok(Self {
            file: BufReader::new(file),
            path: path.to_path_buf(),
            width,
            height,
            frame_count: (len / frame_size) as usize,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn read_frame(&mut self, index: usize) -> Result<Yuv444Frame, PixelError> {
        if index >= self.frame_count {
            return Err(PixelError::FrameIndex {
                index,
                count: self.frame_count,
            });
        }
        let plane = self.width as usize * self.height as usize;
        let offset = index as u64 * 3 * plane as u64;
        self.file
            .seek(SeekFrom::Start(offset))
            .map_err(|e| PixelError::io(format!("seeking {}", self.path.display()), e))?;
        let mut read_plane = || -> Result<Vec<u8>, PixelError> {
            let mut buf = vec![0u8; plane];
            self.file
                .read_exact(&mut buf)
                .map_err(|e| PixelError::io(format!("reading {}", self.path.display()), e))?;
            Ok(buf)
        };
        let y = read_plane()?;
        let u = read_plane()?;
        let v = read_plane()?;
        Yuv444Frame::new(self.width, self.height, y, u, v)
    }
}

/// Reads an entire stream into memory; test-sized inputs only.
pub fn read_yuv444_stream(
    path: &Path,
    width: u32,
    height: u32,
) -> Result<Vec<Yuv444Frame>, PixelError> {
    let mut reader = YuvStreamReader::open(path, width, height)?;
    (0..reader.frame_count())
        .map(|i| reader.read_frame(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(width: u32, height: u32, fill: u8) -> Yuv444Frame {
        let n = (width * height) as usize;
        Yuv444Frame::new(
            width,
            height,
            vec![fill; n],
            vec![fill.wrapping_add(1); n],
            vec![fill.wrapping_add(2); n],
        )
        .unwrap()
    }

    #[test]
    fn single_frame_size() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.yuv");
        let frames = vec![frame(2, 2, 9)];
        let bytes = write_yuv444_stream(frames.iter(), &path).unwrap();
        assert_eq!(bytes, 12);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 12);
    }

    #[test]
    fn ten_frames_size_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ten.yuv");
        let frames: Vec<_> = (0..10).map(|i| frame(2, 2, i as u8 * 3)).collect();
        let bytes = write_yuv444_stream(frames.iter(), &path).unwrap();
        assert_eq!(bytes, 120);
        let back = read_yuv444_stream(&path, 2, 2).unwrap();
        assert_eq!(back, frames);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.yuv");
        let frames = vec![frame(2, 2, 1), frame(4, 2, 1)];
        assert!(matches!(
            write_yuv444_stream(frames.iter(), &path),
            Err(PixelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn truncated_stream_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.yuv");
        std::fs::write(&path, [0u8; 13]).unwrap();
        assert!(matches!(
            YuvStreamReader::open(&path, 2, 2),
            Err(PixelError::TruncatedStream { .. })
        ));
    }
}
