//! Corruption-robustness evaluation for frame-wise arousal-valence predictors.
//!
//! The pipeline crops each participant's frames to a face box, renders five
//! degraded variants (lighter, darker, gaussian blur, salt-and-pepper noise,
//! horizontal motion), runs a predictor over every variant, and measures how
//! far each condition's predictions drift from the original ones.

pub mod corruption;
pub mod error;
pub mod frame;
pub mod harness;
pub mod metrics;
pub mod predictor;
pub mod rng;
pub mod synthetic;

pub use corruption::{Condition, CorruptionKind, CorruptionSpec, apply};
pub use error::{Error, PredictorError, Result};
pub use frame::{BoundingBox, Frame, FrameRef, crop, load_frame, save_frame};
pub use metrics::{AgreementStats, ccc, pearson};
pub use predictor::{AffectSample, AffectSequence, Dimension, PredictorSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
