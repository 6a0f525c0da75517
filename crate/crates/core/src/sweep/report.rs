//! Sweep report rendering: CSV for machines, Markdown for humans.
//!
//! Column order is fixed; numeric fields print in shortest round-trip form,
//! so a rendered CSV parses back to the exact records.

use std::str::FromStr;

use crate::encode::{Codec, Preset};

use super::{SweepError, SweepRecord};

pub const REPORT_COLUMNS: [&str; 9] = [
    "codec",
    "crf",
    "preset",
    "encode_time_s",
    "size_bytes",
    "bitrate_kbps",
    "vmaf_mean",
    "full_size_gb",
    "full_time_days",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

fn fields(record: &SweepRecord) -> [String; 9] {
    [
        record.codec.to_string(),
        record.crf.to_string(),
        record.preset.to_string(),
        record.encode_time_s.to_string(),
        record.size_bytes.to_string(),
        record.bitrate_kbps.to_string(),
        record.vmaf_mean.to_string(),
        record.full_size_gb.to_string(),
        record.full_time_days.to_string(),
    ]
}

/// Renders records in a fixed column order. Row order follows the input;
/// callers wanting canonical order sort by [`SweepRecord::sort_key`] first.
pub fn render_report(records: &[SweepRecord], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = REPORT_COLUMNS.join(",");
            out.push('\n');
            for record in records {
                out.push_str(&fields(record).join(","));
                out.push('\n');
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = format!("| {} |\n", REPORT_COLUMNS.join(" | "));
            out.push_str(&format!("|{}\n", " --- |".repeat(REPORT_COLUMNS.len())));
            for record in records {
                out.push_str(&format!("| {} |\n", fields(record).join(" | ")));
            }
            out
        }
    }
}

/// Parses a CSV report back into records.
pub fn parse_report_csv(text: &str) -> Result<Vec<SweepRecord>, SweepError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SweepError::Config("empty report".to_string()))?;
    if header != REPORT_COLUMNS.join(",") {
        return Err(SweepError::Config(format!(
            "unexpected report header `{header}`"
        )));
    }
    lines
        .filter(|line| !line.is_empty())
        .map(parse_row)
        .collect()
}

fn parse_row(line: &str) -> Result<SweepRecord, SweepError> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != REPORT_COLUMNS.len() {
        return Err(SweepError::Config(format!(
            "row has {} columns, expected {}: `{line}`",
            cols.len(),
            REPORT_COLUMNS.len()
        )));
    }
    let bad = |what: &str| SweepError::Config(format!("bad {what} in `{line}`"));
    let codec = Codec::from_str(cols[0]).map_err(|_| bad("codec"))?;
    Ok(SweepRecord {
        codec,
        crf: cols[1].parse().map_err(|_| bad("crf"))?,
        preset: Preset::parse(codec, cols[2]).map_err(|_| bad("preset"))?,
        encode_time_s: cols[3].parse().map_err(|_| bad("encode_time_s"))?,
        size_bytes: cols[4].parse().map_err(|_| bad("size_bytes"))?,
        bitrate_kbps: cols[5].parse().map_err(|_| bad("bitrate_kbps"))?,
        vmaf_mean: cols[6].parse().map_err(|_| bad("vmaf_mean"))?,
        full_size_gb: cols[7].parse().map_err(|_| bad("full_size_gb"))?,
        full_time_days: cols[8].parse().map_err(|_| bad("full_time_days"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refdata::{self, REFERENCE_MODEL};

    fn sample_records() -> Vec<SweepRecord> {
        refdata::all_rows()
            .map(|r| r.to_record(&REFERENCE_MODEL))
            .collect()
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            render_report(&[], ReportFormat::Csv),
            format!("{}\n", REPORT_COLUMNS.join(","))
        );
        assert_eq!(parse_report_csv(&render_report(&[], ReportFormat::Csv)).unwrap(), vec![]);
    }

    #[test]
    fn single_record_round_trips() {
        let records = sample_records()[..1].to_vec();
        let csv = render_report(&records, ReportFormat::Csv);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(parse_report_csv(&csv).unwrap(), records);
    }

    #[test]
    fn rendering_is_deterministic() {
        let records = sample_records();
        assert_eq!(
            render_report(&records, ReportFormat::Csv),
            render_report(&records, ReportFormat::Csv)
        );
        assert_eq!(
            render_report(&records, ReportFormat::Markdown),
            render_report(&records, ReportFormat::Markdown)
        );
    }

    #[test]
    fn all_fixture_records_round_trip_losslessly() {
        let records = sample_records();
        let csv = render_report(&records, ReportFormat::Csv);
        let parsed = parse_report_csv(&csv).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn markdown_has_separator_and_rows() {
        let records = sample_records()[..2].to_vec();
        let md = render_report(&records, ReportFormat::Markdown);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].contains("---"));
    }
}
