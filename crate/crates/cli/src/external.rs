//! Objectives evaluated by an external program.
//!
//! The program is started once per query. It receives the point as one
//! line of space-separated decimals on standard input and must print the
//! objective value as the first line of standard output, then exit with
//! status 0.

use std::io::Write;
use std::process::{Command, Stdio};

use pseudobo::optimizer::Objective;
use pseudobo::{Error, Result};

#[derive(Debug, Clone)]
pub struct ExternalObjective {
    program: String,
    args: Vec<String>,
}

impl ExternalObjective {
    /// `command[0]` is the program, the rest its arguments.
    pub fn new(command: &[String]) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Config("external objective needs a command".into()))?;
        Ok(Self {
            program: program.clone(),
            args: args.to_vec(),
        })
    }
}

pub fn format_point(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

/// The first line of `stdout` as a number.
pub fn parse_value(stdout: &str) -> Result<f64> {
    let line = stdout.lines().next().unwrap_or("").trim();
    line.parse()
        .map_err(|_| Error::Objective(format!("expected a number on stdout, got {line:?}")))
}

impl Objective for ExternalObjective {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let fail = |what: String| Error::Objective(format!("{}: {what}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| fail(format!("cannot start: {e}")))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            let line = format!("{}\n", format_point(x));
            if let Err(e) = stdin.write_all(line.as_bytes()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(fail(format!("cannot write point: {e}")));
                }
            }
        }
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        if !out.status.success() {
            return Err(fail(format!("exited with {}", out.status)));
        }
        parse_value(&String::from_utf8_lossy(&out.stdout))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(script: &str) -> ExternalObjective {
        ExternalObjective::new(&["sh".into(), "-c".into(), script.into()]).unwrap()
    }

    #[test]
    fn points_round_trip_through_text() {
        let x = [0.1, -2.5e-12, 3.0, 1.0 / 3.0];
        let back: Vec<f64> = format_point(&x).split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(back, x);
    }

    #[test]
    fn first_stdout_line_is_the_value() {
        assert_eq!(parse_value(" 1.25 \nnoise\n").unwrap(), 1.25);
        assert!(matches!(parse_value(""), Err(Error::Objective(_))));
        assert!(matches!(parse_value("loss=3"), Err(Error::Objective(_))));
    }

    #[test]
    fn sums_coordinates() {
        let mut obj = sh("read a b; awk -v a=\"$a\" -v b=\"$b\" 'BEGIN { print a + b }'");
        let v = obj.evaluate(&[0.5, 2.0]).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn failures_are_objective_errors() {
        assert!(matches!(sh("exit 3").evaluate(&[1.0]), Err(Error::Objective(_))));
        assert!(matches!(sh("echo nope").evaluate(&[1.0]), Err(Error::Objective(_))));
        let mut missing = ExternalObjective::new(&["/nonexistent/objective".into()]).unwrap();
        assert!(matches!(missing.evaluate(&[1.0]), Err(Error::Objective(_))));
        assert!(ExternalObjective::new(&[]).is_err());
    }
}
