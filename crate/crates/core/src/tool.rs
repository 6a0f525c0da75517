//! Command templates and child-process execution for external tools.
//!
//! Encoders, decoders and quality scorers are configured as an executable
//! plus an argument template. Placeholders like `{input}` are substituted at
//! expansion time; each caller states which placeholders are required
//! (exactly one use) and which are optional (at most one use). Unknown brace
//! tokens pass through verbatim so shell-ish arguments stay untouched.

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("placeholder {{{name}}} missing from template")]
    MissingPlaceholder { name: &'static str },
    #[error("placeholder {{{name}}} appears {count} times, expected once")]
    DuplicatePlaceholder { name: &'static str, count: usize },
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("executable `{program}` not found on PATH")]
    Missing { program: String },
    #[error("failed to run `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
}

/// An external program invocation with placeholder arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandTemplate {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandTemplate {
    pub fn new(program: impl Into<String>, args: &[&str]) -> Self {
        Self {
            program: program.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Substitutes placeholders and enforces use counts.
    pub fn expand(
        &self,
        required: &[(&'static str, &str)],
        optional: &[(&'static str, &str)],
    ) -> Result<Vec<String>, TemplateError> {
        let mut counts = vec![0usize; required.len() + optional.len()];
        let subs: Vec<(&'static str, &str)> =
            required.iter().chain(optional.iter()).copied().collect();
        let expanded = self
            .args
            .iter()
            .map(|arg| {
                let mut out = arg.clone();
                for (i, (name, value)) in subs.iter().enumerate() {
                    let token = format!("{{{name}}}");
                    let hits = out.matches(&token).count();
                    if hits > 0 {
                        counts[i] += hits;
                        out = out.replace(&token, value);
                    }
                }
                out
            })
            .collect();
        for (i, (name, _)) in subs.iter().enumerate() {
            let count = counts[i];
            let is_required = i < required.len();
            if is_required && count == 0 {
                return Err(TemplateError::MissingPlaceholder { name });
            }
            if count > 1 {
                return Err(TemplateError::DuplicatePlaceholder { name, count });
            }
        }
        Ok(expanded)
    }
}

/// Captured result of one tool run.
#[derive(Debug)]
pub struct ToolRun {
    pub exit_code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub wall: Duration,
}

impl ToolRun {
    pub fn success(&self) -> bool {
        self.exit_code == 0
    }

    /// Last few stderr lines, for error messages.
    pub fn stderr_tail(&self) -> String {
        let text = String::from_utf8_lossy(&self.stderr);
        let lines: Vec<&str> = text.lines().rev().take(8).collect();
        lines.into_iter().rev().collect::<Vec<_>>().join("\n")
    }
}

/// Runs `program args...` to completion, capturing output and wall time.
/// A missing executable is an environment error, distinct from tool failure.
pub fn run_tool(program: &str, args: &[String], cwd: Option<&Path>) -> Result<ToolRun, ToolError> {
    let mut cmd = Command::new(program);
    cmd.args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    let start = Instant::now();
    let output = cmd.output().map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ToolError::Missing {
                program: program.to_string(),
            }
        } else {
            ToolError::Spawn {
                program: program.to_string(),
                source: e,
            }
        }
    })?;
    let wall = start.elapsed();
    Ok(ToolRun {
        exit_code: output.status.code().unwrap_or(-1),
        stdout: output.stdout,
        stderr: output.stderr,
        wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_substitutes_and_counts() {
        let t = CommandTemplate {
            program: "enc".into(),
            args: vec!["-s".into(), "{width}x{height}".into(), "{input}".into()],
        };
        let args = t
            .expand(
                &[("input", "in.yuv"), ("width", "4"), ("height", "2")],
                &[],
            )
            .unwrap();
        assert_eq!(args, vec!["-s", "4x2", "in.yuv"]);
    }

    #[test]
    fn missing_required_placeholder_rejected() {
        let t = CommandTemplate {
            program: "enc".into(),
            args: vec!["{input}".into()],
        };
        assert!(matches!(
            t.expand(&[("input", "a"), ("output", "b")], &[]),
            Err(TemplateError::MissingPlaceholder { name: "output" })
        ));
    }

    #[test]
    fn duplicate_placeholder_rejected() {
        let t = CommandTemplate {
            program: "enc".into(),
            args: vec!["{input}".into(), "{input}".into()],
        };
        assert!(matches!(
            t.expand(&[("input", "a")], &[]),
            Err(TemplateError::DuplicatePlaceholder {
                name: "input",
                count: 2
            })
        ));
    }

    #[test]
    fn unknown_tokens_pass_through() {
        let t = CommandTemplate {
            program: "enc".into(),
            args: vec!["{not_a_placeholder}".into(), "{input}".into()],
        };
        let args = t.expand(&[("input", "a")], &[]).unwrap();
        assert_eq!(args[0], "{not_a_placeholder}");
    }

    #[test]
    fn missing_executable_is_environment_error() {
        let err = run_tool("definitely-not-a-real-binary-470", &[], None).unwrap_err();
        assert!(matches!(err, ToolError::Missing { .. }));
    }

    #[test]
    fn captures_exit_and_output() {
        let run = run_tool(
            "/bin/sh",
            &["-c".to_string(), "echo out; echo err >&2; exit 3".to_string()],
            None,
        )
        .unwrap();
        assert_eq!(run.exit_code, 3);
        assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "out");
        assert!(run.stderr_tail().contains("err"));
    }
}
