//! Counter-based random stream used by the noise operator.
//!
//! Every draw is a pure function of `(key, counter)`:
//!
//! ```text
//! value(key, i) = mix64(key + GOLDEN * (i + 1))        (wrapping u64 arithmetic)
//! uniform(key, i) = (value(key, i) >> 11) * 2^-53       in [0, 1)
//! ```
//!
//! `mix64` is the SplitMix64 finalizer. Because nothing is carried between draws,
//! pixels can be processed in any order or on any number of threads and still
//! produce bit-identical output. The constants below are part of the output
//! contract; changing them changes every golden noise frame.

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn value(key: u64, counter: u64) -> u64 {
    mix64(key.wrapping_add(GOLDEN.wrapping_mul(counter.wrapping_add(1))))
}

#[inline]
pub fn uniform(key: u64, counter: u64) -> f64 {
    (value(key, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derives an independent key for a sub-stream, e.g. one frame of a sequence.
#[inline]
pub fn derive(seed: u64, salt: u64) -> u64 {
    mix64(seed ^ mix64(salt.wrapping_add(GOLDEN)))
}

/// FNV-1a over UTF-8 bytes; turns identifiers into stream salts.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01B3)
    })
}

/// Small sequential generator over the same counter stream, for synthetic data.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Stream { key, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = value(self.key, self.counter);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        let u = uniform(self.key, self.counter);
        self.counter += 1;
        u
    }

    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }
}
