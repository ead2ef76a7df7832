//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use affectbench::Frame;
use affectbench::rng::Stream;

pub fn random_frame(stream: &mut Stream, w: u32, h: u32) -> Frame {
    Frame::from_fn(w, h, |_, _| {
        let v = stream.next_u64();
        [v as u8, (v >> 8) as u8, (v >> 16) as u8]
    })
    .unwrap()
}

/// Channel access by (x, y) without going through crate helpers.
fn px(f: &Frame, x: usize, y: usize) -> [u8; 3] {
    f.pixels()[y * f.width() as usize + x]
}

pub fn brightness_oracle(f: &Frame, gain: f64) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for y in 0..f.height() as usize {
        for x in 0..f.width() as usize {
            let p = px(f, x, y);
            let mut q = [0u8; 3];
            for c in 0..3 {
                let v = (p[c] as f64 * gain).round();
                q[c] = if v > 255.0 { 255 } else if v < 0.0 { 0 } else { v as u8 };
            }
            out.push(q);
        }
    }
    out
}

pub fn crop_oracle(f: &Frame, x0: usize, y0: usize, w: usize, h: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for j in 0..h {
        for i in 0..w {
            out.push(px(f, x0 + i, y0 + j));
        }
    }
    out
}

pub fn motion_oracle(f: &Frame, shift: usize) -> Vec<[u8; 3]> {
    let w = f.width() as usize;
    let mut out = Vec::new();
    for y in 0..f.height() as usize {
        for x in 0..w {
            let sx = x as i64 - shift as i64;
            let sx = sx.clamp(0, w as i64 - 1) as usize;
            out.push(px(f, sx, y));
        }
    }
    out
}

/// Dense 2D Gaussian convolution: a full (2r+1)^2 kernel built from
/// exp(-(i^2 + j^2) / (2 sigma^2)), normalized, with clamp-to-edge sampling.
pub fn dense_blur_oracle(f: &Frame, sigma: f64) -> Vec<[u8; 3]> {
    let r = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::new();
    let mut total = 0.0;
    for j in -r..=r {
        for i in -r..=r {
            let k = (-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp();
            kernel.push((i, j, k));
            total += k;
        }
    }
    let (w, h) = (f.width() as i64, f.height() as i64);
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for &(i, j, k) in &kernel {
                let sx = (x + i).clamp(0, w - 1) as usize;
                let sy = (y + j).clamp(0, h - 1) as usize;
                let p = px(f, sx, sy);
                for c in 0..3 {
                    acc[c] += k / total * p[c] as f64;
                }
            }
            out.push(acc.map(|v| v.round().clamp(0.0, 255.0) as u8));
        }
    }
    out
}

/// Normalized 1D taps for the impulse-response check.
pub fn kernel_1d(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Double-double summation (error-free TwoSum), an accumulation scheme
/// independent of the crate's compensated sum and accurate to ~2^-106.
fn dd_sum(v: impl IntoIterator<Item = f64>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for x in v {
        let s = hi + x;
        let bb = s - hi;
        let err = (hi - (s - bb)) + (x - bb);
        let t = lo + err;
        hi = s + t;
        lo = t - (hi - s);
    }
    hi + lo
}

/// Sum of products with each product split exactly via fused multiply-add.
fn dd_dot(a: &[f64], b: &[f64]) -> f64 {
    dd_sum(a.iter().zip(b).flat_map(|(x, y)| {
        let p = x * y;
        [p, x.mul_add(*y, -p)]
    }))
}

/// Direct Pearson-based concordance: 2 rho sx sy / (sx^2 + sy^2 + (mx - my)^2).
pub fn ccc_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = dd_sum(x.iter().copied()) / n;
    let my = dd_sum(y.iter().copied()) / n;
    let dx: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let dy: Vec<f64> = y.iter().map(|v| v - my).collect();
    let sx = (dd_dot(&dx, &dx) / n).sqrt();
    let sy = (dd_dot(&dy, &dy) / n).sqrt();
    let sxy = dd_dot(&dx, &dy) / n;
    let rho = sxy / (sx * sy);
    2.0 * rho * sx * sy / (sx * sx + sy * sy + (mx - my) * (mx - my))
}

pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = dd_sum(x.iter().copied()) / n;
    let my = dd_sum(y.iter().copied()) / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}

/// Central binomial interval [lo, hi] holding at least `coverage` of the mass,
/// from the exact pmf (recurrence from k = 0).
pub fn binomial_interval(n: u64, p: f64, coverage: f64) -> (u64, u64) {
    let tail = (1.0 - coverage) / 2.0;
    let mut pmf = (n as f64 * (1.0 - p).ln()).exp();
    let mut cdf = 0.0;
    let mut lo = None;
    for k in 0..=n {
        cdf += pmf;
        if lo.is_none() && cdf >= tail {
            lo = Some(k);
        }
        if cdf >= 1.0 - tail {
            return (lo.unwrap(), k);
        }
        pmf *= (n - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
    }
    (lo.unwrap_or(0), n)
}

/// Random sequence pair of the requested length with a random relationship.
pub fn random_pair(s: &mut Stream, len: usize) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..len).map(|_| s.range_f64(-1.0, 1.0)).collect();
    let mode = s.next_u64() % 3;
    let y = match mode {
        0 => (0..len).map(|_| s.range_f64(-1.0, 1.0)).collect(),
        1 => {
            let a = s.range_f64(-1.0, 1.0);
            let b = s.range_f64(-0.3, 0.3);
            x.iter()
                .map(|v| (a * v + b + s.range_f64(-0.3, 0.3)).clamp(-1.0, 1.0))
                .collect()
        }
        _ => {
            let c = s.range_f64(-0.5, 0.5);
            x.iter().map(|v| (v * 0.5 + c).clamp(-1.0, 1.0)).collect()
        }
    };
    (x, y)
}
