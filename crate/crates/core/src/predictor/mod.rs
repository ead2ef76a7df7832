//! Running frame-wise arousal-valence predictors.
//!
//! External predictors are child processes speaking newline-delimited JSON
//! (`affect-predict/1`, see [`protocol`]) or, in batch mode, exchanging CSV
//! files. The built-in [`mock`] predictor is a closed-form stand-in used for
//! end-to-end runs without a deep model.

pub mod conformance;
pub mod mock;
pub mod process;
pub mod protocol;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corruption::Condition;
use crate::error::{Error, PredictorError, Result};
use crate::frame::{FrameRef, load_frame};

pub use protocol::{PredictionRequest, PredictionResponse};

pub const DEFAULT_TIMEOUT_SECS: f64 = 30.0;

/// One prediction. `valid` holds exactly when both values are present and in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffectSample {
    pub frame_index: u64,
    pub arousal: Option<f64>,
    pub valence: Option<f64>,
    pub valid: bool,
}

impl AffectSample {
    pub fn new(frame_index: u64, arousal: Option<f64>, valence: Option<f64>) -> Self {
        let valid = matches!((arousal, valence), (Some(a), Some(v)) if in_range(a) && in_range(v));
        AffectSample {
            frame_index,
            arousal,
            valence,
            valid,
        }
    }

    pub fn valid(frame_index: u64, arousal: f64, valence: f64) -> Self {
        AffectSample::new(frame_index, Some(arousal), Some(valence))
    }

    pub fn invalid(frame_index: u64) -> Self {
        AffectSample::new(frame_index, None, None)
    }

    pub fn value(&self, dim: Dimension) -> Option<f64> {
        match dim {
            Dimension::Arousal => self.arousal,
            Dimension::Valence => self.valence,
        }
    }
}

pub fn in_range(v: f64) -> bool {
    (-1.0..=1.0).contains(&v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Arousal,
    Valence,
}

impl Dimension {
    pub const BOTH: [Dimension; 2] = [Dimension::Arousal, Dimension::Valence];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Arousal => "arousal",
            Dimension::Valence => "valence",
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-frame predictions for one participant under one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct AffectSequence {
    pub participant_id: String,
    pub condition: Condition,
    samples: Vec<AffectSample>,
}

impl AffectSequence {
    pub fn new(
        participant_id: impl Into<String>,
        condition: Condition,
        samples: Vec<AffectSample>,
    ) -> Result<Self> {
        if let Some(w) = samples.windows(2).find(|w| w[0].frame_index >= w[1].frame_index) {
            return Err(Error::validation(format!(
                "frame indices must be strictly increasing ({} then {})",
                w[0].frame_index, w[1].frame_index
            )));
        }
        Ok(AffectSequence {
            participant_id: participant_id.into(),
            condition,
            samples,
        })
    }

    pub fn samples(&self) -> &[AffectSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// How to obtain predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PredictorSpec {
    /// The built-in closed-form predictor, evaluated in process.
    Mock,
    Command(CommandSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandSpec {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Use `--batch in.csv out.csv` instead of the streaming protocol.
    #[serde(default)]
    pub batch: bool,
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

impl CommandSpec {
    pub fn new(program: impl Into<String>) -> Self {
        CommandSpec {
            program: program.into(),
            args: Vec::new(),
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            batch: false,
        }
    }

    pub fn arg(mut self, arg: impl Into<String>) -> Self {
        self.args.push(arg.into());
        self
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs.max(0.0))
    }
}

/// Predicts every frame in order. Request ids are the positions in `frames`.
pub fn run_predictor(
    spec: &PredictorSpec,
    participant_id: &str,
    condition: Condition,
    frames: &[FrameRef],
) -> Result<AffectSequence> {
    let samples = predict_frames(spec, frames, 0)?;
    AffectSequence::new(participant_id, condition, samples)
}

/// Predicts `frames`, numbering requests from `first_id`. Output order follows input order.
pub fn predict_frames(
    spec: &PredictorSpec,
    frames: &[FrameRef],
    first_id: u64,
) -> Result<Vec<AffectSample>> {
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let requests: Vec<PredictionRequest> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| PredictionRequest {
            id: first_id + i as u64,
            frame_path: f.source_path.to_string_lossy().into_owned(),
        })
        .collect();
    let responses = match spec {
        PredictorSpec::Mock => {
            return frames
                .iter()
                .map(|f| {
                    let (arousal, valence) = mock::mock_predict(&load_frame(&f.source_path)?);
                    Ok(AffectSample::valid(f.frame_index, arousal, valence))
                })
                .collect();
        }
        PredictorSpec::Command(cmd) if cmd.batch => process::run_batch(cmd, &requests)?,
        PredictorSpec::Command(cmd) => process::run_streaming(cmd, &requests)?,
    };
    if responses.len() != frames.len() {
        return Err(PredictorError::Reconciliation {
            expected: frames.len(),
            got: responses.len(),
        }
        .into());
    }
    Ok(frames
        .iter()
        .zip(responses)
        .map(|(f, r)| r.into_sample(f.frame_index))
        .collect())
}

/// Frames paired with the path a predictor should read; convenience for tests and tools.
pub fn frame_refs(participant_id: &str, paths: impl IntoIterator<Item = PathBuf>) -> Vec<FrameRef> {
    paths
        .into_iter()
        .enumerate()
        .map(|(i, source_path)| FrameRef {
            participant_id: participant_id.to_string(),
            frame_index: i as u64,
            source_path,
        })
        .collect()
}
