//! Closed-form stand-in predictor.
//!
//! With per-pixel luminance `l = (r + g + b) / 3`, mean `L` and population
//! standard deviation `S` over the frame:
//!
//! ```text
//! arousal = clamp(2 L / 255 - 1, -1, 1)
//! valence = clamp(1 - 2 S / 128, -1, 1)
//! ```
//!
//! Brighter frames read as more aroused, higher-contrast frames as less pleasant.

use std::io::{BufRead, Write};
use std::path::Path;

use super::process::{read_batch_requests, write_batch_responses};
use super::protocol::{Handshake, PredictionRequest, PredictionResponse};
use crate::error::PredictorError;
use crate::frame::{Frame, load_frame};

pub fn mock_predict(frame: &Frame) -> (f64, f64) {
    let n = frame.pixels().len() as f64;
    let lum = |p: &[u8; 3]| (f64::from(p[0]) + f64::from(p[1]) + f64::from(p[2])) / 3.0;
    let mean = frame.pixels().iter().map(lum).sum::<f64>() / n;
    let var = frame
        .pixels()
        .iter()
        .map(|p| (lum(p) - mean).powi(2))
        .sum::<f64>()
        / n;
    let arousal = (2.0 * mean / 255.0 - 1.0).clamp(-1.0, 1.0);
    let valence = (1.0 - 2.0 * var.sqrt() / 128.0).clamp(-1.0, 1.0);
    (arousal, valence)
}

fn respond(req: &PredictionRequest) -> PredictionResponse {
    match load_frame(&req.frame_path) {
        Ok(frame) => {
            let (a, v) = mock_predict(&frame);
            PredictionResponse::detected(req.id, a, v)
        }
        Err(e) => {
            eprintln!("mock predictor: {e}");
            PredictionResponse::no_face(req.id)
        }
    }
}

/// Serves the streaming protocol until `input` reaches EOF. Unreadable frames
/// are answered with `face_detected: false`.
pub fn serve(input: impl BufRead, mut output: impl Write) -> Result<(), PredictorError> {
    writeln!(output, "{}", serde_json::to_string(&Handshake::current()).expect("serializes"))?;
    output.flush()?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: PredictionRequest = serde_json::from_str(&line)
            .map_err(|e| PredictorError::Protocol(format!("malformed request: {e}")))?;
        let resp = respond(&req);
        writeln!(output, "{}", serde_json::to_string(&resp).expect("serializes"))?;
        output.flush()?;
    }
    Ok(())
}

pub fn serve_batch(input: &Path, output: &Path) -> Result<(), PredictorError> {
    let requests = read_batch_requests(input)?;
    let responses: Vec<_> = requests.iter().map(respond).collect();
    write_batch_responses(output, &responses)
}
