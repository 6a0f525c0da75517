//! Embedded reference sweep measurements.
//!
//! Three codec sweeps over the same 60 s, 2048x2448 @ 60 Hz test clip,
//! recorded on a fixed software-encoding host. They ship with the crate so
//! the report arithmetic (bitrate/size reconciliation, full-dataset
//! extrapolation, quality-floor filtering and operating-point selection) is
//! regression-tested without any encoder installed. Sizes are container
//! bytes printed in MiB; bitrates are kilobits per second.

use crate::encode::{Codec, Preset};
use crate::sweep::{extrapolate_full_size, extrapolate_full_time, DatasetModel, SweepRecord};

/// Duration of the measured clip, seconds.
pub const CLIP_DURATION_S: f64 = 60.0;

/// The dataset the measurements extrapolate to: 11 full-rate streams plus 6
/// half-rate streams, each 2 hours, benchmarked with 60 s clips.
pub const REFERENCE_MODEL: DatasetModel = DatasetModel {
    full_rate_streams: 11,
    half_rate_streams: 6,
    stream_duration_s: 7200.0,
    clip_duration_s: CLIP_DURATION_S,
};

/// One measured sweep row as printed in the reference report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredRow {
    pub codec: Codec,
    pub crf: u8,
    pub preset: &'static str,
    /// Clip encode wall time; absent where the report printed only the
    /// extrapolated full-dataset time.
    pub encode_time_s: Option<f64>,
    pub bitrate_kbps: f64,
    pub size_mib: f64,
    pub vmaf: f64,
    pub full_size_gb: Option<f64>,
    pub full_time_days: Option<f64>,
}

impl MeasuredRow {
    pub fn size_bytes(&self) -> u64 {
        (self.size_mib * f64::from(1u32 << 20)).round() as u64
    }

    pub fn preset(&self) -> Preset {
        Preset::parse(self.codec, self.preset).expect("embedded presets are valid")
    }

    /// Reconstructs a [`SweepRecord`], preferring printed extrapolations and
    /// deriving the rest from the measured columns.
    pub fn to_record(&self, model: &DatasetModel) -> SweepRecord {
        let full_time_days = self.full_time_days.unwrap_or_else(|| {
            extrapolate_full_time(self.encode_time_s.unwrap_or(0.0), model)
        });
        SweepRecord {
            codec: self.codec,
            crf: self.crf,
            preset: self.preset(),
            encode_time_s: self
                .encode_time_s
                .unwrap_or_else(|| full_time_days * 86_400.0 * model.clip_duration_s
                    / (model.effective_streams() * model.stream_duration_s)),
            size_bytes: self.size_bytes(),
            bitrate_kbps: self.bitrate_kbps,
            vmaf_mean: self.vmaf,
            full_size_gb: self
                .full_size_gb
                .unwrap_or_else(|| extrapolate_full_size(self.bitrate_kbps, model)),
            full_time_days,
        }
    }
}

macro_rules! rows {
    ($codec:expr; $(($time:expr, $crf:expr, $preset:expr, $kbps:expr, $mib:expr, $vmaf:expr)),+ $(,)?) => {
        &[$(MeasuredRow {
            codec: $codec,
            crf: $crf,
            preset: $preset,
            encode_time_s: Some($time),
            bitrate_kbps: $kbps as f64,
            size_mib: $mib as f64,
            vmaf: $vmaf,
            full_size_gb: None,
            full_time_days: None,
        }),+]
    };
}

/// x264 sweep, sorted by VMAF.
pub const X264_SWEEP: &[MeasuredRow] = rows![Codec::X264;
    (93.06, 19, "medium", 46_561, 333, 98.78),
    (271.86, 19, "slower", 45_341, 324, 98.93),
    (170.82, 19, "slow", 46_851, 335, 98.94),
    (502.79, 19, "veryslow", 44_245, 316, 98.97),
    (1954.65, 19, "placebo", 46_401, 332, 99.10),
    (96.74, 18, "medium", 55_101, 394, 99.14),
    (288.28, 18, "slower", 53_413, 382, 99.22),
    (181.70, 18, "slow", 55_354, 396, 99.22),
    (528.76, 18, "veryslow", 52_149, 373, 99.24),
    (1994.10, 18, "placebo", 54_711, 391, 99.32),
    (100.81, 17, "medium", 65_651, 470, 99.33),
    (192.92, 17, "slow", 65_823, 471, 99.37),
    (308.21, 17, "slower", 63_285, 453, 99.38),
    (560.15, 17, "veryslow", 61_941, 443, 99.38),
    (105.06, 16, "medium", 78_577, 562, 99.43),
    (2041.67, 17, "placebo", 64_999, 465, 99.44),
    (206.21, 16, "slow", 78_642, 562, 99.46),
    (592.37, 16, "veryslow", 73_964, 529, 99.47),
    (328.06, 16, "slower", 75_361, 539, 99.47),
    (2087.55, 16, "placebo", 77_654, 555, 99.49),
];

/// x265 sweep, sorted by VMAF.
pub const X265_SWEEP: &[MeasuredRow] = rows![Codec::X265;
    (5808.90, 20, "veryslow", 43_602, 312, 99.23),
    (295.81, 17, "medium", 64_506, 461, 99.24),
    (724.26, 19, "slow", 49_860, 357, 99.30),
    (10772.59, 20, "placebo", 46_148, 330, 99.32),
    (3487.48, 19, "slower", 51_473, 368, 99.37),
    (6205.14, 19, "veryslow", 51_479, 368, 99.38),
    (313.50, 16, "medium", 76_809, 549, 99.40),
    (749.04, 18, "slow", 59_219, 424, 99.43),
    (11293.54, 19, "placebo", 54_470, 390, 99.44),
    (3722.43, 18, "slower", 60_926, 436, 99.47),
    (6608.98, 18, "veryslow", 60_942, 435, 99.48),
    (785.58, 17, "slow", 70_482, 504, 99.50),
    (11774.43, 18, "placebo", 64_409, 461, 99.51),
    (3977.30, 17, "slower", 72_232, 517, 99.52),
    (7041.76, 17, "veryslow", 72_240, 517, 99.53),
    (832.83, 16, "slow", 83_992, 600, 99.55),
    (12337.12, 17, "placebo", 76_237, 545, 99.55),
    (4260.37, 16, "slower", 85_720, 613, 99.55),
    (7571.67, 16, "veryslow", 85_716, 613, 99.56),
    (13015.65, 16, "placebo", 90_273, 646, 99.57),
];

macro_rules! svt_rows {
    ($(($crf:expr, $preset:expr, $kbps:expr, $mib:expr, $vmaf:expr, $full_gb:expr, $full_days:expr)),+ $(,)?) => {
        &[$(MeasuredRow {
            codec: Codec::SvtAv1,
            crf: $crf,
            preset: stringify!($preset),
            encode_time_s: None,
            bitrate_kbps: $kbps as f64,
            size_mib: $mib as f64,
            vmaf: $vmaf,
            full_size_gb: Some($full_gb as f64),
            full_time_days: Some($full_days),
        }),+]
    };
}

/// svtav1 sweep filtered to VMAF above 99.45 and clip encode times under
/// 1000 s by the reference report; includes its printed full-dataset columns.
pub const SVTAV1_SWEEP: &[MeasuredRow] = svt_rows![
    (24, 5, 44_298, 317, 99.46, 557, 7.99),
    (21, 7, 52_904, 378, 99.47, 665, 2.65),
    (23, 6, 47_116, 337, 99.47, 592, 4.94),
    (17, 8, 72_933, 522, 99.49, 917, 1.61),
    (22, 6, 49_812, 356, 99.50, 626, 4.87),
    (22, 5, 49_608, 355, 99.51, 624, 8.12),
    (16, 8, 78_263, 560, 99.51, 984, 1.62),
    (19, 7, 62_127, 444, 99.52, 781, 2.72),
    (21, 6, 52_941, 379, 99.52, 666, 4.95),
    (21, 5, 52_477, 375, 99.53, 660, 8.20),
    (20, 6, 57_046, 408, 99.54, 717, 5.00),
    (20, 5, 55_718, 399, 99.54, 701, 8.28),
    (17, 7, 71_748, 513, 99.55, 902, 2.81),
    (19, 6, 61_599, 441, 99.55, 774, 5.07),
    (16, 7, 77_582, 555, 99.56, 975, 2.88),
    (19, 5, 60_055, 430, 99.56, 755, 8.41),
    (18, 5, 64_473, 461, 99.57, 811, 8.51),
    (17, 6, 71_216, 509, 99.57, 895, 5.20),
    (16, 5, 73_853, 528, 99.58, 929, 8.73),
];

/// All three sweeps.
pub fn all_rows() -> impl Iterator<Item = &'static MeasuredRow> {
    SVTAV1_SWEEP
        .iter()
        .chain(X264_SWEEP.iter())
        .chain(X265_SWEEP.iter())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_counts() {
        assert_eq!(SVTAV1_SWEEP.len(), 19);
        assert_eq!(X264_SWEEP.len(), 20);
        assert_eq!(X265_SWEEP.len(), 20);
    }

    #[test]
    fn presets_all_parse() {
        for row in all_rows() {
            let _ = row.preset();
        }
    }

    #[test]
    fn effective_streams_of_reference_model() {
        assert_eq!(REFERENCE_MODEL.effective_streams(), 14.0);
    }
}
