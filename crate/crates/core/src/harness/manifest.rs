//! Study manifests and their validation into an executable plan.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corruption::{CorruptionKind, CorruptionSpec};
use crate::error::{Error, Result};
use crate::frame::{BoundingBox, FrameRef, frame_dimensions};
use crate::predictor::PredictorSpec;

/// Declarative description of a study run, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyManifest {
    pub participants: Vec<ParticipantEntry>,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<CorruptionSpec>,
    #[serde(default = "default_predictor")]
    pub predictor: PredictorSpec,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub global_seed: u64,
    #[serde(default)]
    pub zero_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantEntry {
    pub id: String,
    pub frames_dir: PathBuf,
    pub bbox: BoundingBox,
    /// Inclusive `[start, end]` frame-index intervals to drop.
    #[serde(default)]
    pub exclude_ranges: Vec<[u64; 2]>,
    /// Explicit file name -> frame index overrides for non-contiguous exports.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub index_map: BTreeMap<String, u64>,
}

fn default_conditions() -> Vec<CorruptionSpec> {
    CorruptionKind::ALL.iter().map(|k| k.default_spec()).collect()
}

fn default_predictor() -> PredictorSpec {
    PredictorSpec::Mock
}

impl StudyManifest {
    /// Reads a manifest; relative paths are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: StudyManifest = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        manifest.resolve_paths(base);
        Ok(manifest)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.output_dir);
        for p in &mut self.participants {
            resolve(&mut p.frames_dir);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Command-line overrides applied on top of a manifest.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub global_seed: Option<u64>,
    pub conditions: Option<Vec<CorruptionKind>>,
    pub workers: Option<usize>,
    pub zero_tolerance: Option<f64>,
    pub batch_mode: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantPlan {
    pub id: String,
    pub bbox: BoundingBox,
    /// Source frames after exclusions, in frame-index order.
    pub frames: Vec<FrameRef>,
}

impl ParticipantPlan {
    pub fn expected_frames(&self) -> usize {
        self.frames.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub participants: Vec<ParticipantPlan>,
    pub conditions: Vec<CorruptionSpec>,
    pub predictor: PredictorSpec,
    pub output_dir: PathBuf,
    pub global_seed: u64,
    pub zero_tolerance: f64,
    pub workers: usize,
}

fn check_ranges(pid: &str, ranges: &[[u64; 2]]) -> Result<()> {
    for [start, end] in ranges {
        if start > end {
            return Err(Error::validation(format!(
                "participant `{pid}`: exclude range [{start}, {end}] is reversed"
            )));
        }
    }
    for w in ranges.windows(2) {
        if w[1][0] <= w[0][1] {
            return Err(Error::validation(format!(
                "participant `{pid}`: exclude ranges [{}, {}] and [{}, {}] overlap or are out of order",
                w[0][0], w[0][1], w[1][0], w[1][1]
            )));
        }
    }
    Ok(())
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "participant id `{id}` must be non-empty and use only ASCII letters, digits, '-', '_' or '.'"
        )))
    }
}

fn is_frame_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("ppm"))
}

/// Lists a participant's frames, assigns indices, and drops excluded ranges.
fn enumerate_frames(entry: &ParticipantEntry) -> Result<Vec<FrameRef>> {
    let dir = &entry.frames_dir;
    if !dir.is_dir() {
        return Err(Error::validation(format!(
            "participant `{}`: frames directory {} does not exist",
            entry.id,
            dir.display()
        )));
    }
    let listing = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::new();
    let mut seen = HashSet::new();
    for item in listing {
        let path = item.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || !is_frame_file(&path) {
            continue;
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let frame_index = match entry.index_map.get(name) {
            Some(&i) => i,
            None => stem.parse::<u64>().map_err(|_| {
                Error::validation(format!(
                    "participant `{}`: cannot derive a frame index from {} (numeric file names or an index_map entry required)",
                    entry.id,
                    path.display()
                ))
            })?,
        };
        if !seen.insert(frame_index) {
            return Err(Error::validation(format!(
                "participant `{}`: duplicate frame index {frame_index} ({})",
                entry.id,
                path.display()
            )));
        }
        frames.push(FrameRef {
            participant_id: entry.id.clone(),
            frame_index,
            source_path: path,
        });
    }
    if frames.is_empty() {
        return Err(Error::validation(format!(
            "participant `{}`: no PNG or PPM frames in {}",
            entry.id,
            dir.display()
        )));
    }
    frames.sort_by_key(|f| f.frame_index);
    frames.retain(|f| {
        !entry
            .exclude_ranges
            .iter()
            .any(|[s, e]| (*s..=*e).contains(&f.frame_index))
    });
    if frames.is_empty() {
        return Err(Error::validation(format!(
            "participant `{}`: every frame is excluded",
            entry.id
        )));
    }
    Ok(frames)
}

/// Validates a manifest and enumerates every participant's frames.
pub fn ingest(manifest: &StudyManifest, options: &RunOptions) -> Result<StudyPlan> {
    if manifest.participants.is_empty() {
        return Err(Error::validation("manifest lists no participants"));
    }
    let mut ids = HashSet::new();
    for p in &manifest.participants {
        check_id(&p.id)?;
        if !ids.insert(p.id.as_str()) {
            return Err(Error::validation(format!("duplicate participant id `{}`", p.id)));
        }
        check_ranges(&p.id, &p.exclude_ranges)?;
    }

    let mut kinds = HashSet::new();
    for c in &manifest.conditions {
        c.validate()?;
        if !kinds.insert(c.kind()) {
            return Err(Error::validation(format!("condition `{}` listed twice", c.kind())));
        }
    }
    let conditions = match &options.conditions {
        None => manifest.conditions.clone(),
        Some(selected) => {
            let mut out = Vec::new();
            for kind in selected {
                if out.iter().any(|c: &CorruptionSpec| c.kind() == *kind) {
                    continue;
                }
                let spec = manifest
                    .conditions
                    .iter()
                    .find(|c| c.kind() == *kind)
                    .copied()
                    .unwrap_or_else(|| kind.default_spec());
                out.push(spec);
            }
            out
        }
    };

    let zero_tolerance = options.zero_tolerance.unwrap_or(manifest.zero_tolerance);
    if !(zero_tolerance >= 0.0 && zero_tolerance.is_finite()) {
        return Err(Error::validation(format!(
            "zero tolerance must be a non-negative number, got {zero_tolerance}"
        )));
    }
    let workers = options.workers.unwrap_or(1);
    if workers == 0 {
        return Err(Error::validation("--workers must be at least 1"));
    }

    let mut predictor = manifest.predictor.clone();
    if options.batch_mode {
        match &mut predictor {
            PredictorSpec::Command(cmd) => cmd.batch = true,
            PredictorSpec::Mock => {}
        }
    }

    let mut participants = Vec::with_capacity(manifest.participants.len());
    for entry in &manifest.participants {
        let frames = enumerate_frames(entry)?;
        let mut sample = vec![&frames[0], &frames[frames.len() / 2], &frames[frames.len() - 1]];
        sample.dedup_by_key(|f| f.frame_index);
        for f in sample {
            let (w, h) = frame_dimensions(&f.source_path)?;
            if !entry.bbox.fits(w, h) {
                let b = entry.bbox;
                return Err(Error::validation(format!(
                    "participant `{}`: bounding box ({}, {}, {}, {}) exceeds {w}x{h} frame {}",
                    entry.id,
                    b.x,
                    b.y,
                    b.w,
                    b.h,
                    f.source_path.display()
                )));
            }
        }
        participants.push(ParticipantPlan {
            id: entry.id.clone(),
            bbox: entry.bbox,
            frames,
        });
    }

    Ok(StudyPlan {
        participants,
        conditions,
        predictor,
        output_dir: options
            .output_dir
            .clone()
            .unwrap_or_else(|| manifest.output_dir.clone()),
        global_seed: options.global_seed.unwrap_or(manifest.global_seed),
        zero_tolerance,
        workers,
    })
}
