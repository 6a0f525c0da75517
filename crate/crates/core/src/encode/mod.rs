//! External encoder orchestration: job validation, command expansion,
//! timing, size and bitrate accounting.
//!
//! Encoders are never linked; each codec maps to a command template (an
//! FFmpeg-style default is built in) that consumes a raw planar YUV444
//! stream and produces a container file. Wall time is measured around the
//! child process, output size is read back from the produced file, and
//! bitrate is derived from output size over clip duration.

mod convert;

pub use convert::{convert_bundle, ConvertError, ConvertOutcome, ConvertRequest};

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tool::{run_tool, CommandTemplate, TemplateError, ToolError};

/// Kilobits per second from bytes over a duration (1 kb = 1000 bits).
pub fn compute_bitrate(size_bytes: u64, duration_s: f64) -> Result<f64, EncodeError> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(EncodeError::NonPositiveDuration {
            duration: duration_s,
        });
    }
    Ok(size_bytes as f64 * 8.0 / duration_s / 1000.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Codec {
    X264,
    X265,
    SvtAv1,
}

impl Codec {
    pub const ALL: [Codec; 3] = [Codec::X264, Codec::X265, Codec::SvtAv1];

    pub fn name(&self) -> &'static str {
        match self {
            Codec::X264 => "x264",
            Codec::X265 => "x265",
            Codec::SvtAv1 => "svtav1",
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Codec {
    type Err = EncodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x264" => Ok(Codec::X264),
            "x265" => Ok(Codec::X265),
            "svtav1" => Ok(Codec::SvtAv1),
            other => Err(EncodeError::UnknownCodec {
                name: other.to_string(),
            }),
        }
    }
}

/// Named speed ladder shared by x264 and x265, fastest first.
pub const NAMED_PRESETS: [&str; 10] = [
    "ultrafast",
    "superfast",
    "veryfast",
    "faster",
    "fast",
    "medium",
    "slow",
    "slower",
    "veryslow",
    "placebo",
];

/// Encoder speed knob: a named rung for x264/x265, an integer level 0-13
/// for svtav1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Named(u8),
    Level(u8),
}

impl Preset {
    pub const MAX_LEVEL: u8 = 13;

    /// Parses a preset string in the context of a codec.
    pub fn parse(codec: Codec, s: &str) -> Result<Self, EncodeError> {
        match codec {
            Codec::X264 | Codec::X265 => NAMED_PRESETS
                .iter()
                .position(|&name| name == s)
                .map(|i| Preset::Named(i as u8))
                .ok_or_else(|| EncodeError::InvalidPreset {
                    codec,
                    preset: s.to_string(),
                }),
            Codec::SvtAv1 => s
                .parse::<u8>()
                .ok()
                .filter(|&level| level <= Self::MAX_LEVEL)
                .map(Preset::Level)
                .ok_or_else(|| EncodeError::InvalidPreset {
                    codec,
                    preset: s.to_string(),
                }),
        }
    }

    pub fn valid_for(&self, codec: Codec) -> bool {
        match (self, codec) {
            (Preset::Named(i), Codec::X264 | Codec::X265) => (*i as usize) < NAMED_PRESETS.len(),
            (Preset::Level(level), Codec::SvtAv1) => *level <= Self::MAX_LEVEL,
            _ => false,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Named(i) => f.write_str(NAMED_PRESETS[*i as usize]),
            Preset::Level(level) => write!(f, "{level}"),
        }
    }
}

impl PartialOrd for Preset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Preset {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Preset::Named(a), Preset::Named(b)) => a.cmp(b),
            (Preset::Level(a), Preset::Level(b)) => a.cmp(b),
            (Preset::Named(_), Preset::Level(_)) => std::cmp::Ordering::Less,
            (Preset::Level(_), Preset::Named(_)) => std::cmp::Ordering::Greater,
        }
    }
}

pub const CRF_MAX: u8 = 51;

/// Raw planar YUV444 input stream description.
#[derive(Debug, Clone, PartialEq)]
pub struct YuvStreamDesc {
    pub path: PathBuf,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
}

impl YuvStreamDesc {
    pub fn frame_size(&self) -> u64 {
        3 * u64::from(self.width) * u64::from(self.height)
    }
}

/// One encode request: codec, quality, speed, input stream, output path.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeJob {
    pub codec: Codec,
    pub crf: u8,
    pub preset: Preset,
    pub input: YuvStreamDesc,
    pub output: PathBuf,
}

impl EncodeJob {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.crf > CRF_MAX {
            return Err(EncodeError::CrfOutOfRange { crf: self.crf });
        }
        if !self.preset.valid_for(self.codec) {
            return Err(EncodeError::InvalidPreset {
                codec: self.codec,
                preset: self.preset.to_string(),
            });
        }
        if !(self.input.fps.is_finite() && self.input.fps > 0.0) {
            return Err(EncodeError::InvalidFps {
                fps: self.input.fps,
            });
        }
        Ok(())
    }
}

/// Measured outcome of one encode.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeReport {
    pub wall_time_s: f64,
    pub output_size: u64,
    pub bitrate_kbps: f64,
    pub exit_code: i32,
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("crf {crf} out of range 0..={CRF_MAX}")]
    CrfOutOfRange { crf: u8 },
    #[error("preset `{preset}` is not valid for codec {codec}")]
    InvalidPreset { codec: Codec, preset: String },
    #[error("unknown codec `{name}` (known: x264, x265, svtav1)")]
    UnknownCodec { name: String },
    #[error("fps {fps} is not a positive rate")]
    InvalidFps { fps: f64 },
    #[error("duration {duration} s is not positive")]
    NonPositiveDuration { duration: f64 },
    #[error("no encoder template configured for codec {codec}")]
    NoTemplate { codec: Codec },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(
        "input stream {path}: length {len} is not a positive multiple of the {frame_size}-byte frame size"
    )]
    BadInputStream {
        path: PathBuf,
        len: u64,
        frame_size: u64,
    },
    #[error("input stream {path}: {source}")]
    InputIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("environment: {0}")]
    Environment(#[from] ToolError),
    #[error("encoder exited with status {exit_code}: {diagnostics}")]
    EncoderFailure { exit_code: i32, diagnostics: String },
    #[error("encoder produced no readable output at {path}: {source}")]
    MissingOutput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Per-codec encoder command templates.
///
/// Template placeholders: `{input}`, `{output}`, `{crf}`, `{preset}`,
/// `{fps}`, `{width}`, `{height}`, `{pix_fmt}` — each must appear exactly
/// once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EncoderTemplateSet {
    templates: BTreeMap<String, CommandTemplate>,
}

impl EncoderTemplateSet {
    pub fn new() -> Self {
        Self {
            templates: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, codec: Codec, template: CommandTemplate) {
        self.templates.insert(codec.name().to_string(), template);
    }

    pub fn get(&self, codec: Codec) -> Result<&CommandTemplate, EncodeError> {
        self.templates
            .get(codec.name())
            .ok_or(EncodeError::NoTemplate { codec })
    }

    pub fn from_yaml(text: &str) -> Result<Self, serde_yaml::Error> {
        serde_yaml::from_str(text)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("template map serializes")
    }
}

impl Default for EncoderTemplateSet {
    fn default() -> Self {
        let mut set = Self::new();
        for (codec, lib) in [
            (Codec::X264, "libx264"),
            (Codec::X265, "libx265"),
            (Codec::SvtAv1, "libsvtav1"),
        ] {
            set.insert(
                codec,
                CommandTemplate::new(
                    "ffmpeg",
                    &[
                        "-hide_banner",
                        "-loglevel",
                        "error",
                        "-y",
                        "-f",
                        "rawvideo",
                        "-pix_fmt",
                        "{pix_fmt}",
                        "-s",
                        "{width}x{height}",
                        "-r",
                        "{fps}",
                        "-i",
                        "{input}",
                        "-c:v",
                        lib,
                        "-crf",
                        "{crf}",
                        "-preset",
                        "{preset}",
                        "{output}",
                    ],
                ),
            );
        }
        set
    }
}

/// Expands a job against a template into the full argument vector,
/// program first. Numeric parameters render in decimal.
pub fn build_encoder_command(
    job: &EncodeJob,
    template: &CommandTemplate,
) -> Result<Vec<String>, EncodeError> {
    job.validate()?;
    let crf = job.crf.to_string();
    let preset = job.preset.to_string();
    let fps = format_f64(job.input.fps);
    let width = job.input.width.to_string();
    let height = job.input.height.to_string();
    let input = job.input.path.display().to_string();
    let output = job.output.display().to_string();
    let args = template.expand(
        &[
            ("input", input.as_str()),
            ("output", output.as_str()),
            ("crf", crf.as_str()),
            ("preset", preset.as_str()),
            ("fps", fps.as_str()),
            ("width", width.as_str()),
            ("height", height.as_str()),
            ("pix_fmt", "yuv444p"),
        ],
        &[],
    )?;
    let mut argv = Vec::with_capacity(args.len() + 1);
    argv.push(template.program.clone());
    argv.extend(args);
    Ok(argv)
}

/// `30` rather than `30.0` for integral rates; shortest round-trip otherwise.
fn format_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Validates the input stream, runs the encoder, and measures the result.
pub fn run_encode(job: &EncodeJob, template: &CommandTemplate) -> Result<EncodeReport, EncodeError> {
    let argv = build_encoder_command(job, template)?;
    let frame_size = job.input.frame_size();
    let len = std::fs::metadata(&job.input.path)
        .map_err(|e| EncodeError::InputIo {
            path: job.input.path.clone(),
            source: e,
        })?
        .len();
    if len == 0 || frame_size == 0 || len % frame_size != 0 {
        return Err(EncodeError::BadInputStream {
            path: job.input.path.clone(),
            len,
            frame_size,
        });
    }
    let frame_count = len / frame_size;
    let duration_s = frame_count as f64 / job.input.fps;

    let run = run_tool(&argv[0], &argv[1..], None)?;
    if !run.success() {
        return Err(EncodeError::EncoderFailure {
            exit_code: run.exit_code,
            diagnostics: run.stderr_tail(),
        });
    }
    let output_size = std::fs::metadata(&job.output)
        .map_err(|e| EncodeError::MissingOutput {
            path: job.output.clone(),
            source: e,
        })?
        .len();
    Ok(EncodeReport {
        wall_time_s: run.wall.as_secs_f64(),
        output_size,
        bitrate_kbps: compute_bitrate(output_size, duration_s)?,
        exit_code: run.exit_code,
    })
}

/// Runs jobs on up to `workers` threads; results come back in job order
/// regardless of completion order.
pub fn run_encode_batch(
    jobs: &[EncodeJob],
    templates: &EncoderTemplateSet,
    workers: usize,
) -> Vec<Result<EncodeReport, EncodeError>> {
    let workers = workers.max(1).min(jobs.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<EncodeReport, EncodeError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let result = templates
                    .get(jobs[i].codec)
                    .and_then(|t| run_encode(&jobs[i], t));
                results.lock().unwrap()[i] = Some(result);
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job index visited"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::path::Path;

    fn desc(dir: &Path) -> YuvStreamDesc {
        YuvStreamDesc {
            path: dir.join("in.yuv"),
            width: 2,
            height: 2,
            fps: 10.0,
        }
    }

    fn job(codec: Codec, crf: u8, preset: Preset, dir: &Path) -> EncodeJob {
        EncodeJob {
            codec,
            crf,
            preset,
            input: desc(dir),
            output: dir.join("out.mp4"),
        }
    }

    /// A stub "encoder" template: copies input to output, swallowing the
    /// remaining parameters as unused shell arguments.
    pub(crate) fn copy_encoder_template() -> CommandTemplate {
        CommandTemplate::new(
            "/bin/sh",
            &[
                "-c",
                "cp \"$0\" \"$1\"",
                "{input}",
                "{output}",
                "{crf}",
                "{preset}",
                "{fps}",
                "{width}",
                "{height}",
                "{pix_fmt}",
            ],
        )
    }

    pub(crate) fn failing_encoder_template() -> CommandTemplate {
        CommandTemplate::new(
            "/bin/sh",
            &[
                "-c",
                "echo boom >&2; exit 1",
                "{input}",
                "{output}",
                "{crf}",
                "{preset}",
                "{fps}",
                "{width}",
                "{height}",
                "{pix_fmt}",
            ],
        )
    }

    #[test]
    fn svtav1_tokens_rendered_decimal() {
        let dir = tempfile::tempdir().unwrap();
        let job = job(Codec::SvtAv1, 22, Preset::Level(6), dir.path());
        let argv = build_encoder_command(&job, EncoderTemplateSet::default().get(Codec::SvtAv1).unwrap())
            .unwrap();
        assert!(argv.contains(&"22".to_string()));
        assert!(argv.contains(&"6".to_string()));
        assert!(argv.contains(&"yuv444p".to_string()));
        assert!(argv.contains(&"2x2".to_string()));
        assert!(argv.contains(&"10".to_string()));
    }

    #[test]
    fn x264_named_preset_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let preset = Preset::parse(Codec::X264, "medium").unwrap();
        let job = job(Codec::X264, 19, preset, dir.path());
        let argv = build_encoder_command(&job, EncoderTemplateSet::default().get(Codec::X264).unwrap())
            .unwrap();
        assert!(argv.contains(&"19".to_string()));
        assert!(argv.contains(&"medium".to_string()));
    }

    #[test]
    fn crf_52_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let job = job(Codec::X264, 52, Preset::Named(5), dir.path());
        assert!(matches!(
            build_encoder_command(&job, EncoderTemplateSet::default().get(Codec::X264).unwrap()),
            Err(EncodeError::CrfOutOfRange { crf: 52 })
        ));
    }

    #[test]
    fn preset_codec_mismatch_rejected() {
        assert!(Preset::parse(Codec::SvtAv1, "medium").is_err());
        assert!(Preset::parse(Codec::SvtAv1, "14").is_err());
        assert!(Preset::parse(Codec::X264, "6").is_err());
        assert!(!Preset::Level(6).valid_for(Codec::X265));
        assert_eq!(Preset::parse(Codec::SvtAv1, "6").unwrap(), Preset::Level(6));
    }

    #[test]
    fn command_expansion_injective_in_crf_preset() {
        let dir = tempfile::tempdir().unwrap();
        let template = EncoderTemplateSet::default();
        let template = template.get(Codec::SvtAv1).unwrap();
        let mut seen = std::collections::HashSet::new();
        for crf in [16u8, 22, 25] {
            for level in [5u8, 6, 7] {
                let job = job(Codec::SvtAv1, crf, Preset::Level(level), dir.path());
                let argv = build_encoder_command(&job, template).unwrap();
                assert!(seen.insert(argv), "collision at crf {crf} preset {level}");
            }
        }
    }

    #[test]
    fn bitrate_matches_published_rows() {
        // 333.0 MiB over 60 s.
        let kbps = compute_bitrate(349_207_500, 60.0).unwrap();
        assert!((kbps - 46_561.0).abs() < 1e-9);
        assert!((349_207_500.0 / f64::from(1u32 << 20) - 333.03).abs() < 0.005);

        let kbps = compute_bitrate(373_590_000, 60.0).unwrap();
        assert!((kbps - 49_812.0).abs() < 1e-9);

        assert_eq!(compute_bitrate(0, 60.0).unwrap(), 0.0);
        assert!(compute_bitrate(1, 0.0).is_err());
        assert!(compute_bitrate(1, -5.0).is_err());
    }

    #[test]
    fn bitrate_is_linear_in_size() {
        for size in [1u64, 1000, 123_456_789] {
            let one = compute_bitrate(size, 7.5).unwrap();
            let two = compute_bitrate(2 * size, 7.5).unwrap();
            assert!((two - 2.0 * one).abs() < 1e-9 * two.max(1.0));
        }
    }

    #[test]
    fn stub_copy_encoder_round_trips_size() {
        let dir = tempfile::tempdir().unwrap();
        let job = job(Codec::SvtAv1, 22, Preset::Level(6), dir.path());
        let mut f = std::fs::File::create(&job.input.path).unwrap();
        f.write_all(&vec![7u8; 12 * 10]).unwrap(); // 10 frames of 2x2
        drop(f);
        let report = run_encode(&job, &copy_encoder_template()).unwrap();
        assert_eq!(report.output_size, 120);
        assert_eq!(report.exit_code, 0);
        // 120 bytes over 1 s of 10 fps video.
        assert!((report.bitrate_kbps - 0.96).abs() < 1e-12);
        assert!(report.wall_time_s > 0.0);
    }

    #[test]
    fn failing_encoder_reports_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let job = job(Codec::SvtAv1, 22, Preset::Level(6), dir.path());
        std::fs::write(&job.input.path, vec![0u8; 12]).unwrap();
        match run_encode(&job, &failing_encoder_template()) {
            Err(EncodeError::EncoderFailure {
                exit_code: 1,
                diagnostics,
            }) => assert!(diagnostics.contains("boom")),
            other => panic!("expected encoder failure, got {other:?}"),
        }
    }

    #[test]
    fn missing_executable_is_environment() {
        let dir = tempfile::tempdir().unwrap();
        let job = job(Codec::SvtAv1, 22, Preset::Level(6), dir.path());
        std::fs::write(&job.input.path, vec![0u8; 12]).unwrap();
        let template = CommandTemplate::new(
            "no-such-encoder-354",
            &[
                "{input}", "{output}", "{crf}", "{preset}", "{fps}", "{width}", "{height}",
                "{pix_fmt}",
            ],
        );
        assert!(matches!(
            run_encode(&job, &template),
            Err(EncodeError::Environment(ToolError::Missing { .. }))
        ));
    }

    #[test]
    fn truncated_input_stream_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let job = job(Codec::SvtAv1, 22, Preset::Level(6), dir.path());
        std::fs::write(&job.input.path, vec![0u8; 13]).unwrap();
        assert!(matches!(
            run_encode(&job, &copy_encoder_template()),
            Err(EncodeError::BadInputStream { .. })
        ));
    }

    #[test]
    fn batch_results_in_job_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("in.yuv"), vec![1u8; 24]).unwrap();
        let mut templates = EncoderTemplateSet::new();
        templates.insert(Codec::SvtAv1, copy_encoder_template());
        let jobs: Vec<EncodeJob> = (0..6)
            .map(|i| EncodeJob {
                codec: Codec::SvtAv1,
                crf: 16 + i,
                preset: Preset::Level(6),
                input: desc(dir.path()),
                output: dir.path().join(format!("out{i}.bin")),
            })
            .collect();
        let reports = run_encode_batch(&jobs, &templates, 3);
        assert_eq!(reports.len(), 6);
        for r in reports {
            assert_eq!(r.unwrap().output_size, 24);
        }
    }
}
