//! The five image-degradation conditions.
//!
//! All operators are pure, preserve frame dimensions, and emit channels in
//! `[0, 255]`. Real-valued intermediate results are rounded once, half away
//! from zero, then clamped.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, Rgb};
use crate::rng;

pub const DEFAULT_LIGHTER_GAIN: f64 = 1.3;
pub const DEFAULT_DARKER_GAIN: f64 = 0.7;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_FLIP_PROBABILITY: f64 = 0.01;
pub const DEFAULT_SHIFT: u32 = 10;

#[inline]
fn round_clamp(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn adjust_brightness(frame: &Frame, gain: f64) -> Result<Frame> {
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::validation(format!("brightness gain must be positive, got {gain}")));
    }
    let pixels = frame
        .pixels()
        .iter()
        .map(|p| p.map(|c| round_clamp(f64::from(c) * gain)))
        .collect();
    Ok(frame.with_pixels(pixels))
}

/// Normalized 1D Gaussian taps for offsets `-r..=r`, `r = ceil(3 * sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::validation(format!("blur sigma must be positive, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn gaussian_blur(frame: &Frame, sigma: f64) -> Result<Frame> {
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as i64;
    let w = frame.width() as usize;
    let h = frame.height() as usize;
    let clamp = |i: i64, n: usize| i.clamp(0, n as i64 - 1) as usize;

    let mut horizontal = vec![[0.0f64; 3]; w * h];
    horizontal
        .par_chunks_mut(w)
        .zip(frame.pixels().par_chunks(w))
        .for_each(|(out, row)| {
            for (x, acc) in out.iter_mut().enumerate() {
                for (k, weight) in kernel.iter().enumerate() {
                    let src = row[clamp(x as i64 + k as i64 - radius, w)];
                    for c in 0..3 {
                        acc[c] += weight * f64::from(src[c]);
                    }
                }
            }
        });

    let mut pixels = vec![[0u8; 3]; w * h];
    pixels.par_chunks_mut(w).enumerate().for_each(|(y, out)| {
        for (x, px) in out.iter_mut().enumerate() {
            let mut acc = [0.0f64; 3];
            for (k, weight) in kernel.iter().enumerate() {
                let src = horizontal[clamp(y as i64 + k as i64 - radius, h) * w + x];
                for c in 0..3 {
                    acc[c] += weight * src[c];
                }
            }
            *px = acc.map(round_clamp);
        }
    });
    Ok(frame.with_pixels(pixels))
}

/// Whole-pixel salt-and-pepper noise.
///
/// Pixel `p` (row-major) draws `u1 = uniform(key, 2p)` and `u2 = uniform(key, 2p + 1)`
/// with `key = mix64(seed)`; if `u1 < flip_probability` it becomes white when
/// `u2 < 0.5`, black otherwise.
pub fn salt_pepper(frame: &Frame, flip_probability: f64, seed: u64) -> Result<Frame> {
    if !(0.0..=1.0).contains(&flip_probability) {
        return Err(Error::validation(format!(
            "flip probability must lie in [0, 1], got {flip_probability}"
        )));
    }
    let key = rng::mix64(seed);
    let pixels = frame
        .pixels()
        .par_iter()
        .enumerate()
        .map(|(p, &px)| {
            let p = p as u64;
            if rng::uniform(key, 2 * p) < flip_probability {
                if rng::uniform(key, 2 * p + 1) < 0.5 {
                    [255; 3]
                } else {
                    [0; 3]
                }
            } else {
                px
            }
        })
        .collect();
    Ok(frame.with_pixels(pixels))
}

/// Translates content right by `shift` pixels, replicating the left edge.
pub fn horizontal_motion(frame: &Frame, shift: u32) -> Frame {
    let w = frame.width() as usize;
    let shift = shift as usize;
    let mut pixels: Vec<Rgb> = Vec::with_capacity(frame.pixels().len());
    for row in frame.rows() {
        pixels.extend((0..w).map(|x| row[x.saturating_sub(shift)]));
    }
    frame.with_pixels(pixels)
}

/// Condition names, in the canonical reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorruptionKind {
    Lighter,
    Darker,
    Gaussian,
    Noise,
    Motion,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 5] = [
        CorruptionKind::Lighter,
        CorruptionKind::Darker,
        CorruptionKind::Gaussian,
        CorruptionKind::Noise,
        CorruptionKind::Motion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionKind::Lighter => "lighter",
            CorruptionKind::Darker => "darker",
            CorruptionKind::Gaussian => "gaussian",
            CorruptionKind::Noise => "noise",
            CorruptionKind::Motion => "motion",
        }
    }

    pub fn default_spec(self) -> CorruptionSpec {
        match self {
            CorruptionKind::Lighter => CorruptionSpec::Lighter {
                gain: DEFAULT_LIGHTER_GAIN,
            },
            CorruptionKind::Darker => CorruptionSpec::Darker {
                gain: DEFAULT_DARKER_GAIN,
            },
            CorruptionKind::Gaussian => CorruptionSpec::Gaussian {
                sigma: DEFAULT_SIGMA,
            },
            CorruptionKind::Noise => CorruptionSpec::Noise {
                flip_probability: DEFAULT_FLIP_PROBABILITY,
                seed: 0,
            },
            CorruptionKind::Motion => CorruptionSpec::Motion {
                shift: DEFAULT_SHIFT,
            },
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorruptionKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::validation(format!("unknown condition `{s}`")))
    }
}

/// Label of a prediction sequence: the untouched crop or one of the conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Original,
    Corrupted(CorruptionKind),
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Original => "original",
            Condition::Corrupted(kind) => kind.as_str(),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("original") {
            Ok(Condition::Original)
        } else {
            s.parse().map(Condition::Corrupted)
        }
    }
}

impl From<CorruptionKind> for Condition {
    fn from(kind: CorruptionKind) -> Self {
        Condition::Corrupted(kind)
    }
}

impl Serialize for Condition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A fully parameterized condition. Serialized as a JSON object tagged by `kind`;
/// omitted parameters take their defaults and parameters foreign to the kind are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorruptionSpec {
    Lighter {
        #[serde(default = "default_lighter_gain")]
        gain: f64,
    },
    Darker {
        #[serde(default = "default_darker_gain")]
        gain: f64,
    },
    Gaussian {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Noise {
        #[serde(default = "default_flip_probability")]
        flip_probability: f64,
        #[serde(default)]
        seed: u64,
    },
    Motion {
        #[serde(default = "default_shift")]
        shift: u32,
    },
}

fn default_lighter_gain() -> f64 {
    DEFAULT_LIGHTER_GAIN
}
fn default_darker_gain() -> f64 {
    DEFAULT_DARKER_GAIN
}
fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}
fn default_flip_probability() -> f64 {
    DEFAULT_FLIP_PROBABILITY
}
fn default_shift() -> u32 {
    DEFAULT_SHIFT
}

impl CorruptionSpec {
    pub fn kind(&self) -> CorruptionKind {
        match self {
            CorruptionSpec::Lighter { .. } => CorruptionKind::Lighter,
            CorruptionSpec::Darker { .. } => CorruptionKind::Darker,
            CorruptionSpec::Gaussian { .. } => CorruptionKind::Gaussian,
            CorruptionSpec::Noise { .. } => CorruptionKind::Noise,
            CorruptionSpec::Motion { .. } => CorruptionKind::Motion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CorruptionSpec::Lighter { gain } | CorruptionSpec::Darker { gain } => {
                if !(gain > 0.0 && gain.is_finite()) {
                    return Err(Error::validation(format!(
                        "{}: gain must be positive, got {gain}",
                        self.kind()
                    )));
                }
            }
            CorruptionSpec::Gaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::validation(format!(
                        "gaussian: sigma must be positive, got {sigma}"
                    )));
                }
            }
            CorruptionSpec::Noise {
                flip_probability, ..
            } => {
                if !(0.0..=1.0).contains(&flip_probability) {
                    return Err(Error::validation(format!(
                        "noise: flip_probability must lie in [0, 1], got {flip_probability}"
                    )));
                }
            }
            CorruptionSpec::Motion { .. } => {}
        }
        Ok(())
    }

    /// Replaces the noise seed; other kinds are returned unchanged.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            CorruptionSpec::Noise {
                flip_probability, ..
            } => CorruptionSpec::Noise {
                flip_probability,
                seed: new_seed,
            },
            other => other,
        }
    }
}

/// Applies `spec` to one frame of a sequence. Noise draws from the per-frame key
/// `derive(seed, frame_index)`.
pub fn apply(frame: &Frame, spec: &CorruptionSpec, frame_index: u64) -> Result<Frame> {
    match *spec {
        CorruptionSpec::Lighter { gain } | CorruptionSpec::Darker { gain } => {
            adjust_brightness(frame, gain)
        }
        CorruptionSpec::Gaussian { sigma } => gaussian_blur(frame, sigma),
        CorruptionSpec::Noise {
            flip_probability,
            seed,
        } => salt_pepper(frame, flip_probability, rng::derive(seed, frame_index)),
        CorruptionSpec::Motion { shift } => Ok(horizontal_motion(frame, shift)),
    }
}
