//! Reusable `affect-predict/1` conformance checker for predictor adapters.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use super::CommandSpec;
use super::process::Session;
use super::protocol::PredictionRequest;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub checks: Vec<Check>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &'static str, outcome: Result<String, String>) -> bool {
        let passed = outcome.is_ok();
        let detail = outcome.unwrap_or_else(|e| e);
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
        passed
    }
}

impl fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Runs the predictor over `frames` and checks: handshake, id echo across all
/// requests, range and null semantics, graceful handling of an unreadable frame
/// (must answer `face_detected: false` and keep serving), and determinism on a
/// repeated frame. `frames` must be non-empty.
pub fn check_conformance(cmd: &CommandSpec, frames: &[PathBuf]) -> ConformanceReport {
    let mut report = ConformanceReport { checks: Vec::new() };
    let mut session = match Session::start(cmd) {
        Ok(s) => {
            report.record("handshake", Ok("affect-predict/1 acknowledged".into()));
            s
        }
        Err(e) => {
            report.record("handshake", Err(e.to_string()));
            return report;
        }
    };
    if frames.is_empty() {
        report.record("id bijection", Err("no sample frames supplied".into()));
        return report;
    }

    let mut next_id = 0u64;
    let mut request = |path: String| {
        let req = PredictionRequest {
            id: next_id,
            frame_path: path,
        };
        next_id += 1;
        req
    };

    let mut first = None;
    let mut bijection = Ok(format!("{} responses echoed their ids", frames.len()));
    for path in frames {
        let req = request(path.to_string_lossy().into_owned());
        match session.predict(&req) {
            Ok(resp) => {
                first.get_or_insert(resp);
            }
            Err(e) => {
                bijection = Err(format!("request {}: {e}", req.id));
                break;
            }
        }
    }
    // parse_response enforces range and null rules, so both checks share one pass.
    let ok = bijection.is_ok();
    report.record("id bijection", bijection);
    report.record(
        "value range",
        if ok {
            Ok("all values within [-1, 1] with consistent null semantics".into())
        } else {
            Err("not evaluated: id check failed".into())
        },
    );
    if !ok {
        return report;
    }

    let missing = frames[0].with_file_name("__affectbench_missing_frame__.png");
    let req = request(missing.to_string_lossy().into_owned());
    let invalid_ok = match session.predict(&req) {
        Ok(r) if !r.face_detected => Ok("unreadable frame answered with face_detected=false".into()),
        Ok(_) => Err("unreadable frame reported a detected face".into()),
        Err(e) => Err(e.to_string()),
    };
    if !report.record("invalid face", invalid_ok) {
        return report;
    }

    let req = request(frames[0].to_string_lossy().into_owned());
    let determinism = match (session.predict(&req), first) {
        (Ok(again), Some(first)) => {
            if again.arousal == first.arousal && again.valence == first.valence {
                Ok("repeated frame gave identical output".into())
            } else {
                Err(format!(
                    "repeated frame differed: ({:?}, {:?}) vs ({:?}, {:?})",
                    first.arousal, first.valence, again.arousal, again.valence
                ))
            }
        }
        (Err(e), _) => Err(e.to_string()),
        (Ok(_), None) => Err("no reference response".into()),
    };
    report.record("determinism", determinism);
    let _ = session.finish();
    report
}
