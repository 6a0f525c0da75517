//! External VMAF tool driver.
//!
//! The model itself is upstream; this module invokes a configured command
//! with `{reference}`, `{distorted}` and `{report}` placeholders and pulls
//! per-frame scores out of the JSON report it leaves behind. The extraction
//! paths are configuration with defaults matching the common open-source
//! report layout: a `frames` array whose entries carry `metrics.vmaf`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{aggregate, FrameScores, QualityError, QualitySummary, Scorer};
use crate::tool::{run_tool, CommandTemplate};

/// Configuration for the external scoring tool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VmafTool {
    pub template: CommandTemplate,
    /// Dot-path to the per-frame array in the JSON report.
    #[serde(default = "default_frames_path")]
    pub frames_path: String,
    /// Dot-path from a frame entry to its score.
    #[serde(default = "default_frame_score_path")]
    pub frame_score_path: String,
}

fn default_frames_path() -> String {
    "frames".to_string()
}

fn default_frame_score_path() -> String {
    "metrics.vmaf".to_string()
}

impl Default for VmafTool {
    fn default() -> Self {
        Self {
            template: CommandTemplate::new(
                "vmaf",
                &[
                    "--reference",
                    "{reference}",
                    "--distorted",
                    "{distorted}",
                    "--json",
                    "--output",
                    "{report}",
                ],
            ),
            frames_path: default_frames_path(),
            frame_score_path: default_frame_score_path(),
        }
    }
}

fn lookup<'a>(
    root: &'a serde_json::Value,
    dot_path: &str,
) -> Result<&'a serde_json::Value, QualityError> {
    let mut node = root;
    for key in dot_path.split('.') {
        node = node.get(key).ok_or_else(|| QualityError::ReportParse {
            json_path: dot_path.to_string(),
            reason: format!("key `{key}` not found"),
        })?;
    }
    Ok(node)
}

impl VmafTool {
    /// Runs the tool and parses per-frame scores from its JSON report.
    pub fn run(&self, reference: &Path, distorted: &Path) -> Result<FrameScores, QualityError> {
        let workspace = tempfile::tempdir().map_err(QualityError::ReportIo)?;
        let report_path = workspace.path().join("report.json");
        let reference = reference.display().to_string();
        let distorted = distorted.display().to_string();
        let report = report_path.display().to_string();
        let args = self.template.expand(
            &[
                ("reference", reference.as_str()),
                ("distorted", distorted.as_str()),
                ("report", report.as_str()),
            ],
            &[],
        )?;
        let run = run_tool(&self.template.program, &args, None)?;
        if !run.success() {
            return Err(QualityError::ToolFailure {
                exit_code: run.exit_code,
                diagnostics: run.stderr_tail(),
            });
        }
        let text = std::fs::read_to_string(&report_path).map_err(QualityError::ReportIo)?;
        self.parse_report(&text)
    }

    /// Extracts per-frame scores from report text using the configured paths.
    pub fn parse_report(&self, text: &str) -> Result<FrameScores, QualityError> {
        let root: serde_json::Value =
            serde_json::from_str(text).map_err(|e| QualityError::ReportParse {
                json_path: self.frames_path.clone(),
                reason: format!("invalid JSON: {e}"),
            })?;
        let frames = lookup(&root, &self.frames_path)?
            .as_array()
            .ok_or_else(|| QualityError::ReportParse {
                json_path: self.frames_path.clone(),
                reason: "not an array".to_string(),
            })?;
        if frames.is_empty() {
            return Err(QualityError::ReportParse {
                json_path: self.frames_path.clone(),
                reason: "frame list is empty".to_string(),
            });
        }
        let scores = frames
            .iter()
            .map(|frame| {
                lookup(frame, &self.frame_score_path)?.as_f64().ok_or_else(|| {
                    QualityError::ReportParse {
                        json_path: self.frame_score_path.clone(),
                        reason: "score is not a number".to_string(),
                    }
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(FrameScores(scores))
    }
}

/// Spec'd entry point: run the configured tool, return per-frame scores.
pub fn run_external_vmaf(
    reference: &Path,
    distorted: &Path,
    tool: &VmafTool,
) -> Result<FrameScores, QualityError> {
    tool.run(reference, distorted)
}

/// [`Scorer`] adapter over the external tool.
pub struct VmafScorer {
    pub tool: VmafTool,
}

impl Scorer for VmafScorer {
    fn metric(&self) -> &str {
        "vmaf"
    }

    fn score(&self, reference: &Path, distorted: &Path) -> Result<QualitySummary, QualityError> {
        let scores = self.tool.run(reference, distorted)?;
        aggregate("vmaf", &scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tool::ToolError;

    /// Stub tool that writes a fixed JSON report to the `{report}` path.
    fn stub_tool(json: &str) -> VmafTool {
        VmafTool {
            template: CommandTemplate::new(
                "/bin/sh",
                &[
                    "-c",
                    "printf '%s' \"$0\" > \"$3\"",
                    json,
                    "{reference}",
                    "{distorted}",
                    "{report}",
                ],
            ),
            ..VmafTool::default()
        }
    }

    #[test]
    fn stub_report_scores_extracted() {
        let tool = stub_tool(
            r#"{"frames":[{"metrics":{"vmaf":99.0}},{"metrics":{"vmaf":100.0}}]}"#,
        );
        let scores = tool.run(Path::new("r"), Path::new("d")).unwrap();
        assert_eq!(scores.0, vec![99.0, 100.0]);
    }

    #[test]
    fn empty_frame_list_is_parse_error() {
        let tool = stub_tool(r#"{"frames":[]}"#);
        match tool.run(Path::new("r"), Path::new("d")) {
            Err(QualityError::ReportParse { json_path, .. }) => assert_eq!(json_path, "frames"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_score_key_names_the_configured_path() {
        let tool = stub_tool(r#"{"frames":[{"metrics":{"psnr":50.0}}]}"#);
        match tool.run(Path::new("r"), Path::new("d")) {
            Err(QualityError::ReportParse { json_path, .. }) => {
                assert_eq!(json_path, "metrics.vmaf");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn absent_tool_is_environment_error() {
        let tool = VmafTool {
            template: CommandTemplate::new(
                "no-such-vmaf-binary-099",
                &["{reference}", "{distorted}", "{report}"],
            ),
            ..VmafTool::default()
        };
        assert!(matches!(
            tool.run(Path::new("r"), Path::new("d")),
            Err(QualityError::Environment(ToolError::Missing { .. }))
        ));
    }

    #[test]
    fn custom_extraction_paths() {
        let tool = VmafTool {
            frames_path: "result.per_frame".to_string(),
            frame_score_path: "score".to_string(),
            ..stub_tool(r#"{"result":{"per_frame":[{"score":12.5},{"score":13.5}]}}"#)
        };
        let scores = tool.run(Path::new("r"), Path::new("d")).unwrap();
        assert_eq!(scores.0, vec![12.5, 13.5]);
    }
}
