//! Child-process predictor sessions.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::CommandSpec;
use super::protocol::{self, PredictionRequest, PredictionResponse};
use crate::error::PredictorError;

/// A live streaming session: handshake done, requests answered one at a time.
pub struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    last_good: Option<u64>,
}

impl Session {
    pub fn start(cmd: &CommandSpec) -> Result<Self, PredictorError> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| PredictorError::Spawn {
                program: cmd.program.clone(),
                source,
            })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let session = Session {
            child,
            stdin,
            lines,
            timeout: cmd.timeout(),
            last_good: None,
        };
        match session.lines.recv_timeout(session.timeout) {
            Ok(Ok(line)) => protocol::parse_handshake(&line)?,
            Ok(Err(e)) => return Err(PredictorError::Handshake(e.to_string())),
            Err(RecvTimeoutError::Timeout) => {
                return Err(PredictorError::Handshake(format!(
                    "no handshake within {:.1} s",
                    session.timeout.as_secs_f64()
                )));
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(PredictorError::Handshake(
                    "predictor exited before sending a handshake".into(),
                ));
            }
        }
        Ok(session)
    }

    pub fn predict(&mut self, req: &PredictionRequest) -> Result<PredictionResponse, PredictorError> {
        let mut line = serde_json::to_string(req).expect("request serializes");
        line.push('\n');
        let stdin = self.stdin.as_mut().expect("session open");
        if let Err(e) = stdin.write_all(line.as_bytes()).and_then(|()| stdin.flush()) {
            return Err(self.partial(format!("write failed: {e}")));
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => {
                let response = protocol::parse_response(&line, req.id)?;
                self.last_good = Some(req.id);
                Ok(response)
            }
            Ok(Err(e)) => Err(self.partial(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Disconnected) => Err(self.partial("predictor exited".into())),
            Err(RecvTimeoutError::Timeout) => Err(PredictorError::Timeout {
                id: req.id,
                seconds: self.timeout.as_secs_f64(),
            }),
        }
    }

    pub fn last_good(&self) -> Option<u64> {
        self.last_good
    }

    /// Closes stdin and waits for the child to exit.
    pub fn finish(mut self) -> Result<(), PredictorError> {
        drop(self.stdin.take());
        let deadline = Instant::now() + self.timeout;
        loop {
            if self.child.try_wait()?.is_some() {
                return Ok(());
            }
            if Instant::now() >= deadline {
                let _ = self.child.kill();
                let _ = self.child.wait();
                return Ok(());
            }
            thread::sleep(Duration::from_millis(5));
        }
    }

    fn partial(&self, reason: String) -> PredictorError {
        PredictorError::Partial {
            last_good: self.last_good,
            reason,
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        drop(self.stdin.take());
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}

pub fn run_streaming(
    cmd: &CommandSpec,
    requests: &[PredictionRequest],
) -> Result<Vec<PredictionResponse>, PredictorError> {
    let mut session = Session::start(cmd)?;
    let responses = requests
        .iter()
        .map(|req| session.predict(req))
        .collect::<Result<Vec<_>, _>>()?;
    session.finish()?;
    Ok(responses)
}

#[derive(Debug, Serialize, Deserialize)]
struct BatchRow {
    id: u64,
    #[serde(default)]
    arousal: Option<f64>,
    #[serde(default)]
    valence: Option<f64>,
    face_detected: bool,
}

static BATCH_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Batch mode: `program args... --batch in.csv out.csv`.
///
/// `in.csv` has columns `id,frame_path`; the predictor writes `out.csv` with
/// `id,arousal,valence,face_detected` (empty cells for missing values).
pub fn run_batch(
    cmd: &CommandSpec,
    requests: &[PredictionRequest],
) -> Result<Vec<PredictionResponse>, PredictorError> {
    let dir = std::env::temp_dir().join(format!(
        "affectbench-batch-{}-{}",
        std::process::id(),
        BATCH_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir)?;
    let result = run_batch_in(cmd, requests, &dir);
    let _ = fs::remove_dir_all(&dir);
    result
}

fn run_batch_in(
    cmd: &CommandSpec,
    requests: &[PredictionRequest],
    dir: &Path,
) -> Result<Vec<PredictionResponse>, PredictorError> {
    let input = dir.join("in.csv");
    let output = dir.join("out.csv");
    write_batch_requests(&input, requests)?;

    let mut child = Command::new(&cmd.program)
        .args(&cmd.args)
        .arg("--batch")
        .arg(&input)
        .arg(&output)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|source| PredictorError::Spawn {
            program: cmd.program.clone(),
            source,
        })?;
    let budget = cmd.timeout().saturating_mul(requests.len().max(1) as u32);
    let deadline = Instant::now() + budget;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(PredictorError::Timeout {
                id: requests.first().map_or(0, |r| r.id),
                seconds: budget.as_secs_f64(),
            });
        }
        thread::sleep(Duration::from_millis(5));
    };
    if !status.success() {
        return Err(PredictorError::Partial {
            last_good: None,
            reason: format!("batch predictor exited with {status}"),
        });
    }
    let responses = read_batch_responses(&output)?;
    reconcile_batch(requests, responses)
}

pub fn write_batch_requests(path: &Path, requests: &[PredictionRequest]) -> Result<(), PredictorError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in requests {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_batch_requests(path: &Path) -> Result<Vec<PredictionRequest>, PredictorError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_batch_responses(path: &Path, responses: &[PredictionResponse]) -> Result<(), PredictorError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in responses {
        w.serialize(BatchRow {
            id: r.id,
            arousal: r.arousal,
            valence: r.valence,
            face_detected: r.face_detected,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_batch_responses(path: &Path) -> Result<Vec<PredictionResponse>, PredictorError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize::<BatchRow>()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            Ok(PredictionResponse {
                id: row.id,
                arousal: row.arousal,
                valence: row.valence,
                face_detected: row.face_detected,
            })
        })
        .collect()
}

/// Orders batch output by request, requiring an id bijection and valid values.
fn reconcile_batch(
    requests: &[PredictionRequest],
    responses: Vec<PredictionResponse>,
) -> Result<Vec<PredictionResponse>, PredictorError> {
    let mut by_id = std::collections::HashMap::with_capacity(responses.len());
    for r in responses {
        r.validate()?;
        if by_id.insert(r.id, r).is_some() {
            return Err(PredictorError::Protocol(format!("duplicate id {} in batch output", r.id)));
        }
    }
    let mut ordered = Vec::with_capacity(requests.len());
    for req in requests {
        match by_id.remove(&req.id) {
            Some(r) => ordered.push(r),
            None => {
                return Err(PredictorError::Reconciliation {
                    expected: requests.len(),
                    got: ordered.len() + by_id.len(),
                });
            }
        }
    }
    if let Some(extra) = by_id.keys().min() {
        return Err(PredictorError::Protocol(format!("unknown id {extra} in batch output")));
    }
    Ok(ordered)
}

fn csv_err(e: csv::Error) -> PredictorError {
    PredictorError::Protocol(format!("batch CSV: {e}"))
}

