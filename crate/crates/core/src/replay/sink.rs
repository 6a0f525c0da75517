//! Built-in playback sinks: null (timing), directory (frames on disk),
//! and a TCP publisher speaking the wire format.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::pixel::RgbFrame;
use crate::sidecar::{CameraInfo, FrameMetadata, FrameStamp};
use crate::wire;

#[derive(Debug, Error)]
pub enum SinkError {
    #[error("sink I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Wire(#[from] wire::WireError),
    #[error("{0}")]
    Other(String),
}

/// Receives playback events, serially, from the scheduler.
pub trait PlaybackSink {
    fn publish_frame(
        &mut self,
        topic: &str,
        meta: &FrameMetadata,
        frame: &RgbFrame,
    ) -> Result<(), SinkError>;

    fn publish_camera_info(
        &mut self,
        topic: &str,
        stamp: FrameStamp,
        frame_id: &str,
        info: &CameraInfo,
    ) -> Result<(), SinkError>;

    fn publish_clock(&mut self, stamp: FrameStamp) -> Result<(), SinkError>;
}

/// Counts events and otherwise discards them; the timing-test sink.
#[derive(Debug, Default)]
pub struct NullSink {
    pub frames: usize,
    pub camera_infos: usize,
    pub clocks: usize,
}

impl PlaybackSink for NullSink {
    fn publish_frame(&mut self, _: &str, _: &FrameMetadata, _: &RgbFrame) -> Result<(), SinkError> {
        self.frames += 1;
        Ok(())
    }

    fn publish_camera_info(
        &mut self,
        _: &str,
        _: FrameStamp,
        _: &str,
        _: &CameraInfo,
    ) -> Result<(), SinkError> {
        self.camera_infos += 1;
        Ok(())
    }

    fn publish_clock(&mut self, _: FrameStamp) -> Result<(), SinkError> {
        self.clocks += 1;
        Ok(())
    }
}

/// Writes frames to `frames/NNNNNN.ppm` plus a `stamps.csv` row per frame.
pub struct DirectorySink {
    frames_dir: PathBuf,
    stamps: BufWriter<File>,
    camera_info_path: PathBuf,
    camera_info_written: bool,
    index: usize,
}

impl DirectorySink {
    pub fn create(dir: &Path) -> Result<Self, SinkError> {
        let frames_dir = dir.join("frames");
        std::fs::create_dir_all(&frames_dir)?;
        let mut stamps = BufWriter::new(File::create(dir.join("stamps.csv"))?);
        writeln!(stamps, "index,seq,sec,nsec,file")?;
        Ok(Self {
            frames_dir,
            stamps,
            camera_info_path: dir.join("camera_info.yaml"),
            camera_info_written: false,
            index: 0,
        })
    }
}

fn write_ppm(path: &Path, frame: &RgbFrame) -> Result<(), SinkError> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P6\n{} {}\n255\n", frame.width(), frame.height())?;
    out.write_all(frame.data())?;
    out.flush()?;
    Ok(())
}

impl PlaybackSink for DirectorySink {
    fn publish_frame(
        &mut self,
        _topic: &str,
        meta: &FrameMetadata,
        frame: &RgbFrame,
    ) -> Result<(), SinkError> {
        let name = format!("{:06}.ppm", self.index);
        write_ppm(&self.frames_dir.join(&name), frame)?;
        writeln!(
            self.stamps,
            "{},{},{},{},frames/{}",
            self.index, meta.seq, meta.stamp.sec, meta.stamp.nsec, name
        )?;
        self.stamps.flush()?;
        self.index += 1;
        Ok(())
    }

    fn publish_camera_info(
        &mut self,
        _topic: &str,
        _stamp: FrameStamp,
        _frame_id: &str,
        info: &CameraInfo,
    ) -> Result<(), SinkError> {
        if !self.camera_info_written {
            let text = serde_yaml::to_string(info)
                .map_err(|e| SinkError::Other(format!("camera_info serialize: {e}")))?;
            std::fs::write(&self.camera_info_path, text)?;
            self.camera_info_written = true;
        }
        Ok(())
    }

    fn publish_clock(&mut self, _: FrameStamp) -> Result<(), SinkError> {
        Ok(())
    }
}

/// Listening TCP publisher: every record goes to every connected client as
/// one length-prefixed wire message. Clients may connect and drop at any
/// time; a write failure just removes that client.
pub struct TcpSink {
    local_addr: SocketAddr,
    clients: Arc<Mutex<Vec<TcpStream>>>,
}

impl TcpSink {
    pub fn bind(addr: &str) -> Result<Self, SinkError> {
        let listener = TcpListener::bind(addr)?;
        let local_addr = listener.local_addr()?;
        let clients: Arc<Mutex<Vec<TcpStream>>> = Arc::new(Mutex::new(Vec::new()));
        let accept_clients = Arc::clone(&clients);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                match stream {
                    Ok(stream) => {
                        let _ = stream.set_nodelay(true);
                        accept_clients.lock().unwrap().push(stream);
                    }
                    Err(_) => break,
                }
            }
        });
        Ok(Self {
            local_addr,
            clients,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn client_count(&self) -> usize {
        self.clients.lock().unwrap().len()
    }

    fn broadcast(&mut self, record: &[u8]) -> Result<(), SinkError> {
        let mut clients = self.clients.lock().unwrap();
        clients.retain_mut(|stream| stream.write_all(record).is_ok());
        Ok(())
    }
}

impl PlaybackSink for TcpSink {
    fn publish_frame(
        &mut self,
        topic: &str,
        meta: &FrameMetadata,
        frame: &RgbFrame,
    ) -> Result<(), SinkError> {
        let record = wire::frame_to_wire(frame, meta, topic)?;
        self.broadcast(&record)
    }

    fn publish_camera_info(
        &mut self,
        topic: &str,
        stamp: FrameStamp,
        frame_id: &str,
        info: &CameraInfo,
    ) -> Result<(), SinkError> {
        let record = wire::camera_info_to_wire(info, stamp, topic, frame_id)?;
        self.broadcast(&record)
    }

    fn publish_clock(&mut self, stamp: FrameStamp) -> Result<(), SinkError> {
        let record = wire::clock_to_wire(stamp);
        self.broadcast(&record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_sink_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = DirectorySink::create(dir.path()).unwrap();
        let frame = RgbFrame::new(2, 2, (0..12).collect()).unwrap();
        let meta = FrameMetadata {
            seq: 41,
            stamp: FrameStamp { sec: 3, nsec: 7 },
            frame_id: "cam".to_string(),
        };
        sink.publish_frame("/t", &meta, &frame).unwrap();
        sink.publish_camera_info("/ci", meta.stamp, "cam", &CameraInfo::synthetic(2, 2))
            .unwrap();

        let ppm = std::fs::read(dir.path().join("frames/000000.ppm")).unwrap();
        assert!(ppm.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(&ppm[ppm.len() - 12..], frame.data());

        let csv = std::fs::read_to_string(dir.path().join("stamps.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,41,3,7,"));
        assert!(dir.path().join("camera_info.yaml").exists());
    }

    #[test]
    fn tcp_sink_broadcasts_records() {
        use crate::wire::{read_message, WireMessage};

        let mut sink = TcpSink::bind("127.0.0.1:0").unwrap();
        let mut client = TcpStream::connect(sink.local_addr()).unwrap();
        // Wait for the accept thread to register the client.
        for _ in 0..100 {
            if sink.client_count() == 1 {
                break;
            }
            std::thread::sleep(std::time::Duration::from_millis(2));
        }
        assert_eq!(sink.client_count(), 1);

        sink.publish_clock(FrameStamp { sec: 8, nsec: 9 }).unwrap();
        let message = read_message(&mut client).unwrap().unwrap();
        assert_eq!(
            message,
            WireMessage::Clock {
                stamp: FrameStamp { sec: 8, nsec: 9 }
            }
        );
    }
}
