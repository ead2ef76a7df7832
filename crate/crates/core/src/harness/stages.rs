//! Pipeline stages: corrupt, predict, evaluate, report.
//!
//! Output tree under the study's output directory:
//!
//! ```text
//! <condition>/<participant>/<frame>.png       cropped originals and corrupted frames
//! predictions/<participant>/<condition>.csv
//! evaluation/<participant>/<condition>_<dimension>.json
//! deviations/<participant>/<condition>_<dimension>.csv
//! report/{summary.csv, summary.json, ccc_distribution.csv, trends.csv, metadata.json}
//! ledger.json                                 content hashes of completed units
//! run.log                                     timestamped record of executed units
//! ```
//!
//! Every unit is fingerprinted from its inputs; a unit whose fingerprint matches
//! the ledger and whose outputs exist is skipped without writing anything.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use super::ledger::{Fingerprint, Ledger};
use super::manifest::{ParticipantPlan, StudyPlan};
use crate::corruption::{self, Condition, CorruptionKind, CorruptionSpec};
use crate::error::{Error, Result};
use crate::frame::{FrameRef, crop, load_frame, save_frame};
use crate::metrics::aggregate::{write_summary_csv, Summary};
use crate::metrics::{self, AgreementStats};
use crate::predictor::{self, AffectSample, AffectSequence, Dimension, PredictorSpec};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Corrupt,
    Predict,
    Evaluate,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Corrupt => "corrupt",
            Stage::Predict => "predict",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub executed: Vec<String>,
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
}

impl StageOutcome {
    fn new(stage: Stage) -> Self {
        StageOutcome {
            stage,
            executed: Vec::new(),
            skipped: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }
}

/// Paths of every artifact in the output tree.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn frame_dir(&self, condition: Condition, participant: &str) -> PathBuf {
        self.root.join(condition.as_str()).join(participant)
    }

    pub fn frame_path(&self, condition: Condition, frame: &FrameRef) -> PathBuf {
        self.frame_dir(condition, &frame.participant_id)
            .join(format!("{}.png", frame_stem(frame)))
    }

    pub fn predictions(&self, participant: &str, condition: Condition) -> PathBuf {
        self.root
            .join("predictions")
            .join(participant)
            .join(format!("{condition}.csv"))
    }

    pub fn evaluation(&self, participant: &str, condition: Condition, dim: Dimension) -> PathBuf {
        self.root
            .join("evaluation")
            .join(participant)
            .join(format!("{condition}_{dim}.json"))
    }

    pub fn deviations(&self, participant: &str, condition: Condition, dim: Dimension) -> PathBuf {
        self.root
            .join("deviations")
            .join(participant)
            .join(format!("{condition}_{dim}.csv"))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn summary_csv(&self) -> PathBuf {
        self.report_dir().join("summary.csv")
    }
}

fn frame_stem(frame: &FrameRef) -> String {
    frame
        .source_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("{:06}", frame.frame_index))
}

fn unit_key(stage: Stage, participant: &str, condition: Condition) -> String {
    format!("{stage}/{participant}/{condition}")
}

fn cell_name(participant: &str, condition: Condition) -> String {
    format!("participant `{participant}`, condition `{condition}`")
}

fn conditions_with_original(plan: &StudyPlan) -> Vec<Condition> {
    std::iter::once(Condition::Original)
        .chain(plan.conditions.iter().map(|c| Condition::Corrupted(c.kind())))
        .collect()
}

/// Noise key for one participant; frames then derive their own key from it.
pub fn participant_noise_seed(global_seed: u64, spec_seed: u64, participant: &str) -> u64 {
    rng::derive(rng::derive(global_seed, rng::hash_str(participant)), spec_seed)
}

/// The spec actually applied to a participant's frames.
pub fn effective_spec(plan: &StudyPlan, spec: &CorruptionSpec, participant: &str) -> CorruptionSpec {
    match *spec {
        CorruptionSpec::Noise { seed, .. } => {
            spec.with_seed(participant_noise_seed(plan.global_seed, seed, participant))
        }
        other => other,
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::validation(format!("cannot start {workers} workers: {e}")))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn reset_dir(path: &Path) -> Result<()> {
    if path.exists() {
        fs::remove_dir_all(path).map_err(|e| Error::io(path, e))?;
    }
    create_dir(path)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn append_log(layout: &Layout, outcome: &StageOutcome) -> Result<()> {
    if outcome.executed.is_empty() {
        return Ok(());
    }
    let path = layout.root().join("run.log");
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    let mut line = format!("{ts} {}: ran {}", outcome.stage, outcome.executed.join(" "));
    for w in &outcome.warnings {
        line.push_str(&format!("\n{ts} {}: warning: {w}", outcome.stage));
    }
    writeln!(f, "{line}").map_err(|e| Error::io(&path, e))
}

fn original_fingerprint(p: &ParticipantPlan) -> Result<String> {
    let mut fp = Fingerprint::new("original");
    fp.text("participant", &p.id)
        .text("bbox", &serde_json::to_string(&p.bbox).expect("bbox serializes"));
    for f in &p.frames {
        let bytes = fs::read(&f.source_path).map_err(|e| Error::io(&f.source_path, e))?;
        fp.field("index", &f.frame_index.to_le_bytes())
            .text("stem", &frame_stem(f))
            .field("content", &bytes);
    }
    Ok(fp.finish())
}

fn corrupt_fingerprint(original: &str, spec: &CorruptionSpec) -> String {
    let mut fp = Fingerprint::new("corrupt");
    fp.text("original", original)
        .text("spec", &serde_json::to_string(spec).expect("spec serializes"));
    fp.finish()
}

pub fn run_corruption_stage(plan: &StudyPlan) -> Result<StageOutcome> {
    let layout = Layout::new(&plan.output_dir);
    let mut ledger = Ledger::open(layout.root())?;
    let pool = thread_pool(plan.workers)?;
    let mut outcome = StageOutcome::new(Stage::Corrupt);

    for p in &plan.participants {
        let original = original_fingerprint(p)?;
        let mut units: Vec<(Condition, Option<CorruptionSpec>, String)> =
            vec![(Condition::Original, None, original.clone())];
        for spec in &plan.conditions {
            let spec = effective_spec(plan, spec, &p.id);
            let hash = corrupt_fingerprint(&original, &spec);
            units.push((Condition::Corrupted(spec.kind()), Some(spec), hash));
        }
        let stale: Vec<_> = units
            .into_iter()
            .filter(|(cond, _, hash)| {
                let fresh = ledger.is_current(&unit_key(Stage::Corrupt, &p.id, *cond), hash)
                    && p.frames.iter().all(|f| layout.frame_path(*cond, f).is_file());
                if fresh {
                    outcome.skipped.push(unit_key(Stage::Corrupt, &p.id, *cond));
                }
                !fresh
            })
            .collect();
        if stale.is_empty() {
            continue;
        }
        for (cond, _, _) in &stale {
            reset_dir(&layout.frame_dir(*cond, &p.id))?;
        }
        pool.install(|| {
            p.frames.par_iter().try_for_each(|f| {
                let source = load_frame(&f.source_path)?;
                let cropped = crop(&source, &p.bbox)?;
                for (cond, spec, _) in &stale {
                    let out = match spec {
                        None => cropped.clone(),
                        Some(spec) => corruption::apply(&cropped, spec, f.frame_index)?,
                    };
                    save_frame(&out, layout.frame_path(*cond, f))?;
                }
                Ok::<_, Error>(())
            })
        })
        .map_err(|e| e.in_cell(format!("participant `{}`", p.id)))?;
        for (cond, _, hash) in stale {
            let key = unit_key(Stage::Corrupt, &p.id, cond);
            outcome.executed.push(key.clone());
            ledger.record(key, hash);
        }
    }
    ledger.save()?;
    append_log(&layout, &outcome)?;
    Ok(outcome)
}

/// Runs the predictor over `frames` split into `workers` contiguous partitions.
/// Each partition of an external predictor gets its own child process.
pub fn predict_partitioned(
    spec: &PredictorSpec,
    frames: &[FrameRef],
    pool: &rayon::ThreadPool,
) -> Result<Vec<AffectSample>> {
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let workers = pool.current_num_threads().max(1);
    let chunk = match spec {
        PredictorSpec::Mock => 16,
        PredictorSpec::Command(_) => frames.len().div_ceil(workers),
    };
    let parts = pool.install(|| {
        frames
            .par_chunks(chunk)
            .enumerate()
            .map(|(i, part)| predictor::predict_frames(spec, part, (i * chunk) as u64))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub const PREDICTION_HEADER: [&str; 6] = [
    "participant_id",
    "condition",
    "frame_index",
    "arousal",
    "valence",
    "valid",
];

pub fn write_predictions_csv(path: &Path, seq: &AffectSequence) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::validation(format!("{}: {e}", path.display()));
    w.write_record(PREDICTION_HEADER).map_err(csv_err)?;
    for s in seq.samples() {
        w.write_record([
            seq.participant_id.clone(),
            seq.condition.to_string(),
            s.frame_index.to_string(),
            fmt_opt(s.arousal),
            fmt_opt(s.valence),
            s.valid.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
    write_file(path, &bytes)
}

pub fn read_predictions_csv(path: &Path) -> Result<AffectSequence> {
    let bad = |msg: String| Error::validation(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
        _ => bad(e.to_string()),
    })?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(PREDICTION_HEADER) {
        return Err(bad(format!("unexpected header {:?}", header)));
    }
    let mut participant = None;
    let mut condition = None;
    let mut samples = Vec::new();
    for record in r.records() {
        let rec = record.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<Option<f64>> {
            let field = &rec[i];
            if field.is_empty() {
                Ok(None)
            } else {
                field
                    .parse()
                    .map(Some)
                    .map_err(|_| bad(format!("bad number `{field}`")))
            }
        };
        let frame_index: u64 = rec[2].parse().map_err(|_| bad(format!("bad frame index `{}`", &rec[2])))?;
        let sample = AffectSample::new(frame_index, num(3)?, num(4)?);
        let flag: bool = rec[5].parse().map_err(|_| bad(format!("bad valid flag `{}`", &rec[5])))?;
        if flag != sample.valid {
            return Err(bad(format!("valid flag disagrees with values at frame {frame_index}")));
        }
        let cond: Condition = rec[1].parse()?;
        if *participant.get_or_insert_with(|| rec[0].to_string()) != rec[0] || *condition.get_or_insert(cond) != cond {
            return Err(bad("mixed participants or conditions".into()));
        }
        samples.push(sample);
    }
    let (Some(participant), Some(condition)) = (participant, condition) else {
        return Err(bad("no prediction rows".into()));
    };
    AffectSequence::new(participant, condition, samples)
}

pub fn run_prediction_stage(plan: &StudyPlan) -> Result<StageOutcome> {
    let layout = Layout::new(&plan.output_dir);
    let mut ledger = Ledger::open(layout.root())?;
    let pool = thread_pool(plan.workers)?;
    let mut outcome = StageOutcome::new(Stage::Predict);
    let predictor_json = serde_json::to_string(&plan.predictor).expect("predictor serializes");

    for p in &plan.participants {
        for cond in conditions_with_original(plan) {
            let upstream = ledger
                .get(&unit_key(Stage::Corrupt, &p.id, cond))
                .map(str::to_owned)
                .ok_or_else(|| {
                    Error::validation(format!(
                        "no {cond} frames for participant `{}`; run the corrupt stage first",
                        p.id
                    ))
                })?;
            let mut fp = Fingerprint::new("predict");
            fp.text("frames", &upstream).text("predictor", &predictor_json);
            let hash = fp.finish();
            let key = unit_key(Stage::Predict, &p.id, cond);
            let out = layout.predictions(&p.id, cond);
            if ledger.is_current(&key, &hash) && out.is_file() {
                outcome.skipped.push(key);
                continue;
            }
            let frames: Vec<FrameRef> = p
                .frames
                .iter()
                .map(|f| FrameRef {
                    participant_id: p.id.clone(),
                    frame_index: f.frame_index,
                    source_path: layout.frame_path(cond, f),
                })
                .collect();
            let samples = predict_partitioned(&plan.predictor, &frames, &pool)
                .map_err(|e| e.in_cell(cell_name(&p.id, cond)))?;
            if samples.len() != p.expected_frames() {
                return Err(Error::from(crate::error::PredictorError::Reconciliation {
                    expected: p.expected_frames(),
                    got: samples.len(),
                })
                .in_cell(cell_name(&p.id, cond)));
            }
            let seq = AffectSequence::new(p.id.clone(), cond, samples)?;
            let invalid = seq.samples().iter().filter(|s| !s.valid).count();
            if invalid > 0 {
                outcome.warn(format!(
                    "{}: {invalid} of {} frames without a valid prediction",
                    cell_name(&p.id, cond),
                    seq.len()
                ));
            }
            write_predictions_csv(&out, &seq)?;
            outcome.executed.push(key.clone());
            ledger.record(key, hash);
        }
    }
    ledger.save()?;
    append_log(&layout, &outcome)?;
    Ok(outcome)
}

pub fn write_deviation_csv(path: &Path, series: &metrics::DeviationSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::validation(format!("{}: {e}", path.display()));
    w.write_record(["frame_index", "original", "condition_value", "delta"])
        .map_err(csv_err)?;
    for p in &series.points {
        w.write_record([
            p.frame_index.to_string(),
            p.original.to_string(),
            p.condition_value.to_string(),
            p.delta.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
    write_file(path, &bytes)
}

fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

pub fn run_evaluation_stage(plan: &StudyPlan) -> Result<StageOutcome> {
    let layout = Layout::new(&plan.output_dir);
    let mut ledger = Ledger::open(layout.root())?;
    let mut outcome = StageOutcome::new(Stage::Evaluate);

    for p in &plan.participants {
        let orig_key = unit_key(Stage::Predict, &p.id, Condition::Original);
        let orig_path = layout.predictions(&p.id, Condition::Original);
        let orig_hash = match ledger.get(&orig_key) {
            Some(h) if orig_path.is_file() => h.to_owned(),
            _ => {
                return Err(Error::validation(format!(
                    "missing original prediction sequence for participant `{}`",
                    p.id
                )));
            }
        };
        let mut original: Option<AffectSequence> = None;
        let mut evaluated_any = false;

        for spec in &plan.conditions {
            let cond = Condition::Corrupted(spec.kind());
            let cond_path = layout.predictions(&p.id, cond);
            let Some(cond_hash) = ledger
                .get(&unit_key(Stage::Predict, &p.id, cond))
                .filter(|_| cond_path.is_file())
                .map(str::to_owned)
            else {
                outcome.warn(format!("{}: no predictions, skipped", cell_name(&p.id, cond)));
                continue;
            };
            evaluated_any = true;
            let mut fp = Fingerprint::new("evaluate");
            fp.text("original", &orig_hash)
                .text("condition", &cond_hash)
                .field("zero_tolerance", &plan.zero_tolerance.to_le_bytes());
            let hash = fp.finish();
            let key = unit_key(Stage::Evaluate, &p.id, cond);
            let outputs_exist = Dimension::BOTH
                .iter()
                .all(|&d| layout.deviations(&p.id, cond, d).is_file());
            if ledger.is_current(&key, &hash) && outputs_exist {
                outcome.skipped.push(key);
                continue;
            }

            if original.is_none() {
                original = Some(read_predictions_csv(&orig_path)?);
            }
            let orig = original.as_ref().expect("loaded above");
            let condition_seq = read_predictions_csv(&cond_path)?;
            let paired = metrics::align(orig, &condition_seq)?;
            for dim in Dimension::BOTH {
                let series = metrics::deviation(&paired, dim);
                write_deviation_csv(&layout.deviations(&p.id, cond, dim), &series)?;
                let json_path = layout.evaluation(&p.id, cond, dim);
                if paired.len() < 2 {
                    outcome.warn(format!(
                        "{}, {dim}: only {} paired samples, cell skipped",
                        cell_name(&p.id, cond),
                        paired.len()
                    ));
                    if json_path.exists() {
                        fs::remove_file(&json_path).map_err(|e| Error::io(&json_path, e))?;
                    }
                    continue;
                }
                let stats = metrics::agreement(&paired, dim, plan.zero_tolerance)?;
                write_file(&json_path, &to_json_bytes(&stats))?;
            }
            outcome.executed.push(key.clone());
            ledger.record(key, hash);
        }
        if !evaluated_any {
            return Err(Error::validation(format!(
                "participant `{}`: no condition predictions to evaluate",
                p.id
            )));
        }
    }
    ledger.save()?;
    append_log(&layout, &outcome)?;
    Ok(outcome)
}

/// Provenance recorded next to every report.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ReportMetadata {
    pub toolkit_version: String,
    pub moment_convention: String,
    pub ccc_form: String,
    pub pairing: String,
    pub rounding: String,
    pub trend_aggregation: String,
    pub zero_tolerance: f64,
    pub global_seed: u64,
    pub conditions: Vec<CorruptionSpec>,
    pub participants: Vec<String>,
}

impl ReportMetadata {
    pub fn for_plan(plan: &StudyPlan) -> Self {
        let mut conditions = plan.conditions.clone();
        conditions.sort_by_key(|c| c.kind());
        ReportMetadata {
            toolkit_version: crate::VERSION.to_string(),
            moment_convention: "population (divide by n)".into(),
            ccc_form: "2 cov(x, y) / (var x + var y + (mean x - mean y)^2)".into(),
            pairing: "inner join on frame_index; frames invalid in either sequence dropped".into(),
            rounding: "round half away from zero, then clamp to [0, 255]".into(),
            trend_aggregation:
                "trend_participant_mean: unweighted mean of per-participant percentages; trend_pooled: counts over all paired frames"
                    .into(),
            zero_tolerance: plan.zero_tolerance,
            global_seed: plan.global_seed,
            conditions,
            participants: plan.participants.iter().map(|p| p.id.clone()).collect(),
        }
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    metadata: &'a ReportMetadata,
    summary: &'a Summary,
}

pub fn run_report_stage(plan: &StudyPlan) -> Result<StageOutcome> {
    let layout = Layout::new(&plan.output_dir);
    let mut ledger = Ledger::open(layout.root())?;
    let mut outcome = StageOutcome::new(Stage::Report);
    let metadata = ReportMetadata::for_plan(plan);
    let mut kinds: Vec<CorruptionKind> = plan.conditions.iter().map(|c| c.kind()).collect();
    kinds.sort();

    let mut fp = Fingerprint::new("report");
    fp.text("metadata", &serde_json::to_string(&metadata).expect("serializes"));
    let mut stats: Vec<AgreementStats> = Vec::new();
    let mut cells = Vec::new();
    for p in &plan.participants {
        for &kind in &kinds {
            let cond = Condition::Corrupted(kind);
            let Some(h) = ledger.get(&unit_key(Stage::Evaluate, &p.id, cond)) else {
                continue;
            };
            fp.text("cell", &unit_key(Stage::Evaluate, &p.id, cond)).text("hash", h);
            cells.push((p.id.clone(), cond));
        }
    }
    let hash = fp.finish();
    let files = [
        "summary.csv",
        "summary.json",
        "ccc_distribution.csv",
        "trends.csv",
        "metadata.json",
    ];
    let dir = layout.report_dir();
    if ledger.is_current("report", &hash) && files.iter().all(|f| dir.join(f).is_file()) {
        outcome.skipped.push("report".into());
        return Ok(outcome);
    }

    for (pid, cond) in &cells {
        for dim in Dimension::BOTH {
            let path = layout.evaluation(pid, *cond, dim);
            if !path.is_file() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            stats.push(
                serde_json::from_str(&text)
                    .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?,
            );
        }
    }
    if stats.is_empty() {
        return Err(Error::validation(
            "no evaluated cells to report; run the evaluate stage first",
        ));
    }
    let summary = metrics::aggregate(&stats)?;

    let mut table = Vec::new();
    write_summary_csv(&summary.table(&kinds), &mut table)?;
    write_file(&dir.join("summary.csv"), &table)?;
    write_file(
        &dir.join("summary.json"),
        &to_json_bytes(&ReportJson {
            metadata: &metadata,
            summary: &summary,
        }),
    )?;
    write_file(&dir.join("metadata.json"), &to_json_bytes(&metadata))?;

    let mut dist = String::from("condition,dimension,participant,ccc\n");
    let mut trends = String::from("condition,dimension,scheme,pos_pct,neg_pct,zero_pct,n\n");
    for c in &summary.cells {
        for v in &c.ccc_distribution {
            dist.push_str(&format!("{},{},{},{}\n", c.condition, c.dimension, v.participant, v.ccc));
        }
        let m = c.trend_participant_mean;
        trends.push_str(&format!(
            "{},{},participant_mean,{},{},{},{}\n",
            c.condition, c.dimension, m.pos_pct, m.neg_pct, m.zero_pct, c.participants
        ));
        let t = c.trend_pooled;
        trends.push_str(&format!(
            "{},{},pooled,{},{},{},{}\n",
            c.condition, c.dimension, t.pos_pct, t.neg_pct, t.zero_pct, c.pooled_n
        ));
    }
    write_file(&dir.join("ccc_distribution.csv"), dist.as_bytes())?;
    write_file(&dir.join("trends.csv"), trends.as_bytes())?;

    outcome.executed.push("report".into());
    ledger.record("report".into(), hash);
    ledger.save()?;
    append_log(&layout, &outcome)?;
    Ok(outcome)
}

/// All four stages in order.
pub fn run_all(plan: &StudyPlan) -> Result<Vec<StageOutcome>> {
    Ok(vec![
        run_corruption_stage(plan)?,
        run_prediction_stage(plan)?,
        run_evaluation_stage(plan)?,
        run_report_stage(plan)?,
    ])
}
