//! Procedural face-like frame sequences for end-to-end runs without real data.
//!
//! Each participant is a 96x96 scene: a skin-toned ellipse with eyes, brows and
//! a mouth whose curvature drifts over time, on a cool background. Scene
//! illumination follows a skewed periodic trajectory, so most frames are dim and
//! a minority are well lit; per-pixel texture is drawn from the counter-based
//! stream so every frame differs slightly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::corruption::CorruptionKind;
use crate::error::{Error, Result};
use crate::frame::{BoundingBox, Frame, save_frame};
use crate::harness::manifest::{ParticipantEntry, StudyManifest};
use crate::predictor::PredictorSpec;
use crate::rng::{self, Stream};

pub const FRAME_SIZE: u32 = 96;
pub const FACE_BOX: BoundingBox = BoundingBox {
    x: 16,
    y: 8,
    w: 64,
    h: 80,
};

const SKIN: [f64; 3] = [186.0, 150.0, 128.0];
const BACKGROUND: [f64; 3] = [70.0, 86.0, 104.0];
const FEATURE: [f64; 3] = [40.0, 30.0, 30.0];
const LIPS: [f64; 3] = [150.0, 70.0, 72.0];

#[derive(Debug, Clone, Copy)]
struct Trajectory {
    period: f64,
    phase: f64,
    floor: f64,
    smile_period: f64,
}

impl Trajectory {
    fn for_participant(seed: u64, index: usize) -> Self {
        let mut s = Stream::new(rng::derive(seed, index as u64));
        Trajectory {
            period: s.range_f64(45.0, 80.0),
            phase: s.range_f64(0.0, std::f64::consts::TAU),
            floor: s.range_f64(0.04, 0.08),
            smile_period: s.range_f64(90.0, 160.0),
        }
    }

    fn illumination(&self, t: f64) -> f64 {
        let wave = 0.5 * (1.0 + (std::f64::consts::TAU * t / self.period + self.phase).sin());
        self.floor + (1.0 - self.floor) * wave.powi(3)
    }

    fn smile(&self, t: f64) -> f64 {
        (std::f64::consts::TAU * t / self.smile_period).sin()
    }
}

fn base_color(x: f64, y: f64, smile: f64) -> [f64; 3] {
    let (cx, cy) = (48.0, 48.0);
    let (dx, dy) = ((x - cx) / 28.0, (y - cy) / 36.0);
    if dx * dx + dy * dy > 1.0 {
        return BACKGROUND;
    }
    for ex in [37.0, 59.0] {
        let (ux, uy) = ((x - ex) / 5.0, (y - 40.0) / 3.0);
        if ux * ux + uy * uy <= 1.0 {
            return FEATURE;
        }
        if (y - 33.0).abs() < 1.0 && (x - ex).abs() < 6.0 {
            return FEATURE;
        }
    }
    let mouth_curve = 66.0 - 3.0 * smile * (1.0 - ((x - cx) / 11.0).powi(2));
    if (x - cx).abs() <= 11.0 && (y - mouth_curve).abs() <= 1.5 {
        return LIPS;
    }
    SKIN
}

/// Renders frame `t` of participant `index`.
pub fn render_frame(seed: u64, index: usize, t: usize) -> Frame {
    let traj = Trajectory::for_participant(seed, index);
    let tf = t as f64;
    let light = traj.illumination(tf);
    let smile = traj.smile(tf);
    let key = rng::derive(rng::derive(seed, index as u64), t as u64);
    Frame::from_fn(FRAME_SIZE, FRAME_SIZE, |x, y| {
        let base = base_color(f64::from(x), f64::from(y), smile);
        let grain = (rng::uniform(key, u64::from(y * FRAME_SIZE + x)) - 0.5) * 8.0;
        base.map(|c| (c * light + grain).round().clamp(0.0, 255.0) as u8)
    })
    .expect("fixed positive dimensions")
}

/// Writes `participants` sequences of `frames` frames under `root/frames/` and a
/// manifest at `root/manifest.json` (mock predictor, all five default conditions,
/// output under `root/out`). Returns the manifest path.
pub fn generate_study(root: &Path, participants: usize, frames: usize, seed: u64) -> Result<PathBuf> {
    let mut entries = Vec::with_capacity(participants);
    for p in 0..participants {
        let id = format!("p{:02}", p + 1);
        let dir = root.join("frames").join(&id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for t in 0..frames {
            save_frame(&render_frame(seed, p, t), dir.join(format!("{t:06}.png")))?;
        }
        entries.push(ParticipantEntry {
            id: id.clone(),
            frames_dir: PathBuf::from("frames").join(&id),
            bbox: FACE_BOX,
            exclude_ranges: Vec::new(),
            index_map: Default::default(),
        });
    }
    let manifest = StudyManifest {
        participants: entries,
        conditions: CorruptionKind::ALL.iter().map(|k| k.default_spec()).collect(),
        predictor: PredictorSpec::Mock,
        output_dir: PathBuf::from("out"),
        global_seed: seed,
        zero_tolerance: 0.0,
    };
    let path = root.join("manifest.json");
    fs::write(&path, manifest.to_json() + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_are_deterministic_and_vary() {
        assert_eq!(render_frame(1, 0, 5), render_frame(1, 0, 5));
        assert_ne!(render_frame(1, 0, 5), render_frame(1, 0, 6));
        assert_ne!(render_frame(1, 0, 5), render_frame(1, 1, 5));
    }

    #[test]
    fn lighter_gain_never_saturates() {
        // the brightest channel at full illumination stays below 255 / 1.3
        let max = (0..200)
            .map(|t| render_frame(3, 0, t))
            .flat_map(|f| f.into_pixels())
            .flatten()
            .max()
            .unwrap();
        assert!(f64::from(max) * 1.3 < 255.5, "max channel {max}");
    }
}
