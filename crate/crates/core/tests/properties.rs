//! Property-based invariants for frames, corruption operators and metrics.

mod common;

use proptest::prelude::*;

use affectbench::corruption::{adjust_brightness, gaussian_blur, horizontal_motion, salt_pepper};
use affectbench::metrics::{Paired, PairedSample, deviation, trend_frequency};
use affectbench::predictor::mock::mock_predict;
use affectbench::{
    BoundingBox, Condition, CorruptionKind, CorruptionSpec, Dimension, Frame, apply, ccc, crop,
    load_frame, pearson, save_frame,
};

fn frame_strategy(max: u32) -> impl Strategy<Value = Frame> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<[u8; 3]>(), (w * h) as usize)
            .prop_map(move |pixels| Frame::new(w, h, pixels).unwrap())
    })
}

fn frame_and_box(max: u32) -> impl Strategy<Value = (Frame, BoundingBox)> {
    frame_strategy(max).prop_flat_map(|f| {
        let (w, h) = (f.width(), f.height());
        (0..w, 0..h)
            .prop_flat_map(move |(x, y)| (Just(x), Just(y), 1..=w - x, 1..=h - y))
            .prop_map(move |(x, y, bw, bh)| (f.clone(), BoundingBox::new(x, y, bw, bh)))
    })
}

fn spec_strategy() -> impl Strategy<Value = CorruptionSpec> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|gain| CorruptionSpec::Lighter { gain }),
        (0.0..1.0f64).prop_map(|gain| CorruptionSpec::Darker { gain }),
        (0.1..3.0f64).prop_map(|sigma| CorruptionSpec::Gaussian { sigma }),
        (0.0..=1.0f64, any::<u64>()).prop_map(|(flip_probability, seed)| CorruptionSpec::Noise {
            flip_probability,
            seed
        }),
        (0u32..40).prop_map(|shift| CorruptionSpec::Motion { shift }),
    ]
}

fn series(len: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    len.prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0..=1.0f64, n),
            prop::collection::vec(-1.0..=1.0f64, n),
        )
    })
}

fn paired(orig: &[f64], cond: &[f64]) -> Paired {
    Paired {
        participant_id: "p".into(),
        condition: Condition::Corrupted(CorruptionKind::Noise),
        pairs: orig
            .iter()
            .zip(cond)
            .enumerate()
            .map(|(i, (o, c))| PairedSample {
                frame_index: i as u64,
                original: (*o, -*o),
                condition: (*c, -*c),
            })
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn crop_to_full_frame_is_identity(f in frame_strategy(24)) {
        prop_assert_eq!(crop(&f, &f.full_box()).unwrap(), f);
    }

    #[test]
    fn crop_matches_oracle((f, b) in frame_and_box(24)) {
        let got = crop(&f, &b).unwrap();
        prop_assert_eq!((got.width(), got.height()), (b.w, b.h));
        let want = common::crop_oracle(&f, b.x as usize, b.y as usize, b.w as usize, b.h as usize);
        prop_assert_eq!(got.pixels(), want.as_slice());
    }

    #[test]
    fn crops_compose((f, outer) in frame_and_box(24), sel in any::<[u32; 4]>()) {
        let x = sel[0] % outer.w;
        let y = sel[1] % outer.h;
        let inner = BoundingBox::new(x, y, 1 + sel[2] % (outer.w - x), 1 + sel[3] % (outer.h - y));
        let twice = crop(&crop(&f, &outer).unwrap(), &inner).unwrap();
        let once = crop(&f, &outer.compose(&inner)).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn png_and_ppm_round_trip(f in frame_strategy(16)) {
        let dir = tempfile::tempdir().unwrap();
        for name in ["f.png", "f.ppm"] {
            let path = dir.path().join(name);
            save_frame(&f, &path).unwrap();
            prop_assert_eq!(load_frame(&path).unwrap(), f.clone());
        }
    }

    #[test]
    fn corruptions_preserve_dimensions(f in frame_strategy(20), spec in spec_strategy(), idx in any::<u64>()) {
        let out = apply(&f, &spec, idx).unwrap();
        prop_assert_eq!((out.width(), out.height()), (f.width(), f.height()));
    }

    #[test]
    fn corruptions_are_deterministic(f in frame_strategy(20), spec in spec_strategy(), idx in any::<u64>()) {
        prop_assert_eq!(apply(&f, &spec, idx).unwrap(), apply(&f, &spec, idx).unwrap());
    }

    #[test]
    fn brightness_is_monotone_in_gain(f in frame_strategy(16), a in 0.0..3.0f64, b in 0.0..3.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let dim = adjust_brightness(&f, lo).unwrap();
        let bright = adjust_brightness(&f, hi).unwrap();
        for (p, q) in dim.pixels().iter().zip(bright.pixels()) {
            for c in 0..3 {
                prop_assert!(p[c] <= q[c]);
            }
        }
    }

    #[test]
    fn brightness_matches_oracle(f in frame_strategy(16), gain in 0.0..4.0f64) {
        let got = adjust_brightness(&f, gain).unwrap();
        let want = common::brightness_oracle(&f, gain);
        prop_assert_eq!(got.pixels(), want.as_slice());
    }

    #[test]
    fn motion_shifts_compose(f in frame_strategy(20), a in 0u32..25, b in 0u32..25) {
        let twice = horizontal_motion(&horizontal_motion(&f, a), b);
        prop_assert_eq!(twice, horizontal_motion(&f, a + b));
    }

    #[test]
    fn blur_stays_within_input_range(f in frame_strategy(16), sigma in 0.1..3.0f64) {
        let out = gaussian_blur(&f, sigma).unwrap();
        for c in 0..3 {
            let lo = f.pixels().iter().map(|p| p[c]).min().unwrap();
            let hi = f.pixels().iter().map(|p| p[c]).max().unwrap();
            prop_assert!(out.pixels().iter().all(|p| (lo..=hi).contains(&p[c])));
        }
    }

    #[test]
    fn noise_only_writes_extremes(f in frame_strategy(20), p in 0.0..=1.0f64, seed in any::<u64>()) {
        let out = salt_pepper(&f, p, seed).unwrap();
        for (a, b) in f.pixels().iter().zip(out.pixels()) {
            prop_assert!(a == b || *b == [0; 3] || *b == [255; 3]);
        }
        if p == 0.0 {
            prop_assert_eq!(&out, &f);
        }
    }

    #[test]
    fn ccc_is_symmetric_and_bounded((x, y) in series(2..200)) {
        let a = ccc(&x, &y).unwrap();
        let b = ccc(&y, &x).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((-1.0..=1.0).contains(&a));
    }

    #[test]
    fn ccc_matches_oracle((x, y) in series(2..300)) {
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m) * (a - m)).sum::<f64>()
        };
        prop_assume!(var(&x) > 1e-12 && var(&y) > 1e-12);
        let got = ccc(&x, &y).unwrap();
        let want = common::ccc_oracle(&x, &y);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-3), "{} vs {}", got, want);
    }

    #[test]
    fn pearson_is_affine_invariant_but_ccc_is_not(
        (x, _) in series(3..100),
        scale in 0.1..10.0f64,
        shift in -5.0..5.0f64,
    ) {
        let r = pearson(&x, &x).unwrap();
        prop_assume!(!r.degenerate);
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let ry = pearson(&x, &y).unwrap();
        prop_assert!((ry.value - 1.0).abs() < 1e-9);
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        prop_assert!(ccc(&x, &doubled).unwrap() < 1.0);
        prop_assert!((pearson(&x, &y).unwrap().value - common::pearson_oracle(&x, &y)).abs() < 1e-9);
    }

    #[test]
    fn deviation_is_antisymmetric((o, c) in series(1..100)) {
        for dim in Dimension::BOTH {
            let fwd: Vec<f64> = deviation(&paired(&o, &c), dim).deltas().collect();
            let back: Vec<f64> = deviation(&paired(&c, &o), dim).deltas().collect();
            prop_assert_eq!(fwd.len(), o.len());
            for (a, b) in fwd.iter().zip(&back) {
                prop_assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn trend_percentages_sum_to_100(deltas in prop::collection::vec(-2.0..2.0f64, 1..300), tol in 0.0..0.5f64) {
        let t = trend_frequency(deltas.iter().copied(), tol).unwrap();
        prop_assert!((t.pos_pct + t.neg_pct + t.zero_pct - 100.0).abs() <= 1e-9);
        let flipped = trend_frequency(deltas.iter().map(|d| -d), tol).unwrap();
        prop_assert_eq!((t.pos_pct, t.neg_pct, t.zero_pct), (flipped.neg_pct, flipped.pos_pct, flipped.zero_pct));
    }

    #[test]
    fn mock_arousal_rises_with_brightness(f in frame_strategy(12), a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (dim, _) = mock_predict(&adjust_brightness(&f, lo).unwrap());
        let (bright, _) = mock_predict(&adjust_brightness(&f, hi).unwrap());
        prop_assert!(dim <= bright);
        prop_assert!((-1.0..=1.0).contains(&dim) && (-1.0..=1.0).contains(&bright));
    }
}
