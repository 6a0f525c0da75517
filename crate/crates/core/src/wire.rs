//! Length-prefixed binary message format for replay transports.
//!
//! Every record is little-endian throughout:
//!
//! ```text
//! record    := total_len: u32 | magic: u32 | kind: u8 | body
//! ```
//!
//! `total_len` counts everything after itself (magic, kind and body). The
//! magic is the bytes `VBW1` (`0x31574256` as a little-endian u32). Kinds:
//! `1` frame, `2` camera_info, `3` clock.
//!
//! ```text
//! frame body  := topic: str8 | sec: u64 | nsec: u32 | frame_id: str8
//!              | encoding: u8 | width: u32 | height: u32 | stride: u32
//!              | payload_len: u32 | payload bytes
//! camera body := topic: str8 | sec: u64 | nsec: u32 | frame_id: str8
//!              | width: u32 | height: u32 | model: str8
//!              | d_len: u16 | D: f64 * d_len | K: f64 * 9 | R: f64 * 9
//!              | P: f64 * 12
//! clock body  := sec: u64 | nsec: u32
//! ```
//!
//! `str8` is a u8 length followed by that many UTF-8 bytes, so topics, frame
//! ids and model names are capped at 255 bytes. Encoding tag `1` is rgb8
//! (stride = 3 * width). Floats travel as their IEEE-754 bit patterns.

use std::io::Read;

use thiserror::Error;

use crate::pixel::RgbFrame;
use crate::sidecar::{CameraInfo, FrameMetadata, FrameStamp};

pub const MAGIC: u32 = u32::from_le_bytes(*b"VBW1");

pub const KIND_FRAME: u8 = 1;
pub const KIND_CAMERA_INFO: u8 = 2;
pub const KIND_CLOCK: u8 = 3;

pub const ENCODING_RGB8: u8 = 1;

/// Records larger than this are rejected on read.
pub const MAX_RECORD_LEN: u32 = 256 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("{what} is {len} bytes; the wire format caps it at 255")]
    StringTooLong { what: &'static str, len: usize },
    #[error("record truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("bad magic {found:#010x}, expected {MAGIC:#010x}")]
    BadMagic { found: u32 },
    #[error("unknown message kind {kind}")]
    UnknownKind { kind: u8 },
    #[error("unknown pixel encoding tag {tag}")]
    UnknownEncoding { tag: u8 },
    #[error("record length {len} exceeds the {MAX_RECORD_LEN}-byte cap")]
    OversizedRecord { len: u32 },
    #[error("string field is not UTF-8")]
    BadUtf8,
    #[error("trailing bytes after record body: {extra}")]
    TrailingBytes { extra: usize },
    #[error("stream read: {0}")]
    Io(#[from] std::io::Error),
}

/// A decoded wire record.
#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    Frame {
        topic: String,
        stamp: FrameStamp,
        frame_id: String,
        encoding: u8,
        width: u32,
        height: u32,
        stride: u32,
        payload: Vec<u8>,
    },
    CameraInfo {
        topic: String,
        stamp: FrameStamp,
        frame_id: String,
        info: CameraInfo,
    },
    Clock {
        stamp: FrameStamp,
    },
}

struct RecordWriter {
    buf: Vec<u8>,
}

impl RecordWriter {
    fn new(kind: u8) -> Self {
        let mut buf = Vec::with_capacity(64);
        buf.extend_from_slice(&[0; 4]); // total_len backpatched in finish()
        buf.extend_from_slice(&MAGIC.to_le_bytes());
        buf.push(kind);
        Self { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    fn str8(&mut self, what: &'static str, s: &str) -> Result<(), WireError> {
        if s.len() > 255 {
            return Err(WireError::StringTooLong { what, len: s.len() });
        }
        self.u8(s.len() as u8);
        self.buf.extend_from_slice(s.as_bytes());
        Ok(())
    }

    fn stamp(&mut self, stamp: FrameStamp) {
        self.u64(stamp.sec);
        self.u32(stamp.nsec);
    }

    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
    }

    fn finish(mut self) -> Vec<u8> {
        let total = (self.buf.len() - 4) as u32;
        self.buf[..4].copy_from_slice(&total.to_le_bytes());
        self.buf
    }
}

/// Serializes an RGB frame message.
pub fn frame_to_wire(
    frame: &RgbFrame,
    meta: &FrameMetadata,
    topic: &str,
) -> Result<Vec<u8>, WireError> {
    let mut w = RecordWriter::new(KIND_FRAME);
    w.str8("topic", topic)?;
    w.stamp(meta.stamp);
    w.str8("frame_id", &meta.frame_id)?;
    w.u8(ENCODING_RGB8);
    w.u32(frame.width());
    w.u32(frame.height());
    w.u32(3 * frame.width());
    w.bytes(frame.data());
    Ok(w.finish())
}

/// Serializes a camera-calibration message.
pub fn camera_info_to_wire(
    info: &CameraInfo,
    stamp: FrameStamp,
    topic: &str,
    frame_id: &str,
) -> Result<Vec<u8>, WireError> {
    let mut w = RecordWriter::new(KIND_CAMERA_INFO);
    w.str8("topic", topic)?;
    w.stamp(stamp);
    w.str8("frame_id", frame_id)?;
    w.u32(info.width);
    w.u32(info.height);
    w.str8("distortion_model", &info.distortion_model)?;
    w.u16(info.d.len() as u16);
    for &v in &info.d {
        w.f64(v);
    }
    for &v in &info.k {
        w.f64(v);
    }
    for &v in &info.r {
        w.f64(v);
    }
    for &v in &info.p {
        w.f64(v);
    }
    Ok(w.finish())
}

/// Serializes a simulated-clock tick: a fixed-size record carrying exactly
/// the two stamp integers.
pub fn clock_to_wire(stamp: FrameStamp) -> Vec<u8> {
    let mut w = RecordWriter::new(KIND_CLOCK);
    w.stamp(stamp);
    w.finish()
}

struct RecordReader<'a> {
    buf: &'a [u8],
}

impl<'a> RecordReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated {
                needed: n - self.buf.len(),
            });
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, WireError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn str8(&mut self) -> Result<String, WireError> {
        let len = self.u8()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| WireError::BadUtf8)
    }

    fn stamp(&mut self) -> Result<FrameStamp, WireError> {
        Ok(FrameStamp {
            sec: self.u64()?,
            nsec: self.u32()?,
        })
    }

    fn f64_array<const N: usize>(&mut self) -> Result<[f64; N], WireError> {
        let mut out = [0.0; N];
        for slot in &mut out {
            *slot = self.f64()?;
        }
        Ok(out)
    }
}

/// Parses one complete record (including the length prefix) from a byte
/// slice. Trailing bytes beyond the record are an error; use
/// [`read_message`] for streams.
pub fn parse_message(bytes: &[u8]) -> Result<WireMessage, WireError> {
    let mut r = RecordReader { buf: bytes };
    let total = r.u32()?;
    if total > MAX_RECORD_LEN {
        return Err(WireError::OversizedRecord { len: total });
    }
    let body = r.take(total as usize)?;
    if !r.buf.is_empty() {
        return Err(WireError::TrailingBytes { extra: r.buf.len() });
    }
    parse_record_body(body)
}

fn parse_record_body(body: &[u8]) -> Result<WireMessage, WireError> {
    let mut r = RecordReader { buf: body };
    let magic = r.u32()?;
    if magic != MAGIC {
        return Err(WireError::BadMagic { found: magic });
    }
    let kind = r.u8()?;
    let message = match kind {
        KIND_FRAME => {
            let topic = r.str8()?;
            let stamp = r.stamp()?;
            let frame_id = r.str8()?;
            let encoding = r.u8()?;
            if encoding != ENCODING_RGB8 {
                return Err(WireError::UnknownEncoding { tag: encoding });
            }
            let width = r.u32()?;
            let height = r.u32()?;
            let stride = r.u32()?;
            let payload_len = r.u32()? as usize;
            let payload = r.take(payload_len)?.to_vec();
            WireMessage::Frame {
                topic,
                stamp,
                frame_id,
                encoding,
                width,
                height,
                stride,
                payload,
            }
        }
        KIND_CAMERA_INFO => {
            let topic = r.str8()?;
            let stamp = r.stamp()?;
            let frame_id = r.str8()?;
            let width = r.u32()?;
            let height = r.u32()?;
            let distortion_model = r.str8()?;
            let d_len = r.u16()? as usize;
            let mut d = Vec::with_capacity(d_len);
            for _ in 0..d_len {
                d.push(r.f64()?);
            }
            WireMessage::CameraInfo {
                topic,
                stamp,
                frame_id,
                info: CameraInfo {
                    width,
                    height,
                    distortion_model,
                    d,
                    k: r.f64_array::<9>()?,
                    r: r.f64_array::<9>()?,
                    p: r.f64_array::<12>()?,
                },
            }
        }
        KIND_CLOCK => WireMessage::Clock { stamp: r.stamp()? },
        other => return Err(WireError::UnknownKind { kind: other }),
    };
    if !r.buf.is_empty() {
        return Err(WireError::TrailingBytes { extra: r.buf.len() });
    }
    Ok(message)
}

/// Reads the next record from a byte stream. Returns `None` on a clean EOF
/// at a record boundary.
pub fn read_message<R: Read>(reader: &mut R) -> Result<Option<WireMessage>, WireError> {
    let mut len_buf = [0u8; 4];
    match reader.read_exact(&mut len_buf) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let total = u32::from_le_bytes(len_buf);
    if total > MAX_RECORD_LEN {
        return Err(WireError::OversizedRecord { len: total });
    }
    let mut body = vec![0u8; total as usize];
    reader.read_exact(&mut body)?;
    parse_record_body(&body).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(sec: u64, nsec: u32) -> FrameMetadata {
        FrameMetadata {
            seq: 0,
            stamp: FrameStamp { sec, nsec },
            frame_id: "cam".to_string(),
        }
    }

    #[test]
    fn frame_record_length_arithmetic() {
        let frame = RgbFrame::new(2, 2, (1..=12).collect()).unwrap();
        let bytes = frame_to_wire(&frame, &meta(1, 2), "t").unwrap();
        // header: len 4 + magic 4 + kind 1; topic 1+1; stamp 12; frame_id
        // 1+3; encoding 1; dims/stride 12; payload len 4 + 12.
        assert_eq!(bytes.len(), 4 + 4 + 1 + 2 + 12 + 4 + 1 + 12 + 4 + 12);
        match parse_message(&bytes).unwrap() {
            WireMessage::Frame {
                payload, stride, ..
            } => {
                assert_eq!(payload.len(), 12);
                assert_eq!(stride, 6);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn clock_record_is_fixed_size() {
        let bytes = clock_to_wire(FrameStamp {
            sec: 5,
            nsec: 250_000_000,
        });
        assert_eq!(bytes.len(), 4 + 4 + 1 + 8 + 4);
        match parse_message(&bytes).unwrap() {
            WireMessage::Clock { stamp } => {
                assert_eq!(stamp.sec, 5);
                assert_eq!(stamp.nsec, 250_000_000);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn camera_info_round_trips() {
        let info = CameraInfo::synthetic(640, 480);
        let stamp = FrameStamp { sec: 9, nsec: 1 };
        let bytes = camera_info_to_wire(&info, stamp, "/cam/info", "cam0").unwrap();
        match parse_message(&bytes).unwrap() {
            WireMessage::CameraInfo {
                topic,
                stamp: s,
                frame_id,
                info: parsed,
            } => {
                assert_eq!(topic, "/cam/info");
                assert_eq!(s, stamp);
                assert_eq!(frame_id, "cam0");
                assert_eq!(parsed, info);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn oversized_topic_rejected() {
        let frame = RgbFrame::new(2, 2, vec![0; 12]).unwrap();
        let topic = "x".repeat(256);
        assert!(matches!(
            frame_to_wire(&frame, &meta(0, 0), &topic),
            Err(WireError::StringTooLong { what: "topic", .. })
        ));
        let mut m = meta(0, 0);
        m.frame_id = "y".repeat(300);
        assert!(matches!(
            frame_to_wire(&frame, &m, "t"),
            Err(WireError::StringTooLong {
                what: "frame_id",
                ..
            })
        ));
    }

    #[test]
    fn corrupt_magic_and_kind_rejected() {
        let mut bytes = clock_to_wire(FrameStamp { sec: 0, nsec: 0 });
        bytes[4] ^= 0xff;
        assert!(matches!(
            parse_message(&bytes),
            Err(WireError::BadMagic { .. })
        ));

        let mut bytes = clock_to_wire(FrameStamp { sec: 0, nsec: 0 });
        bytes[8] = 42; // kind byte
        assert!(matches!(
            parse_message(&bytes),
            Err(WireError::UnknownKind { kind: 42 })
        ));
    }

    #[test]
    fn stream_reader_yields_records_then_eof() {
        let mut stream = Vec::new();
        stream.extend(clock_to_wire(FrameStamp { sec: 1, nsec: 0 }));
        stream.extend(clock_to_wire(FrameStamp { sec: 2, nsec: 0 }));
        let mut cursor = std::io::Cursor::new(stream);
        let first = read_message(&mut cursor).unwrap().unwrap();
        assert_eq!(
            first,
            WireMessage::Clock {
                stamp: FrameStamp { sec: 1, nsec: 0 }
            }
        );
        assert!(read_message(&mut cursor).unwrap().is_some());
        assert!(read_message(&mut cursor).unwrap().is_none());
    }

    #[test]
    fn truncated_record_rejected() {
        let bytes = clock_to_wire(FrameStamp { sec: 1, nsec: 0 });
        assert!(matches!(
            parse_message(&bytes[..bytes.len() - 1]),
            Err(WireError::Truncated { .. })
        ));
    }
}
