mod common;

use common::{random_trace, rng};
use gazekit::spatial::{decode_sgm, decode_sgm_raw, encode_pgm, encode_sgm};
use gazekit::trace::{parse_gaze_csv, write_gaze_csv};
use gazekit::{Coords, GazeSample, GazeTrace, SaliencyGrid};
use proptest::prelude::*;
use rand::Rng;

fn sample_bits(s: &GazeSample) -> (u64, u64, u64, bool) {
    (s.t.to_bits(), s.x.to_bits(), s.y.to_bits(), s.valid)
}

fn assert_same_samples(a: &GazeTrace, b: &GazeTrace) {
    assert_eq!(a.len(), b.len());
    for (p, q) in a.samples().iter().zip(b.samples()) {
        if p.valid {
            assert_eq!(sample_bits(p), sample_bits(q));
        } else {
            assert_eq!((p.t.to_bits(), p.valid), (q.t.to_bits(), q.valid));
            assert_eq!(p.x.is_nan(), q.x.is_nan());
            assert_eq!(p.y.is_nan(), q.y.is_nan());
        }
    }
}

#[test]
fn gaze_csv_round_trip_preserves_every_sample() {
    let mut r = rng(41);
    for _ in 0..300 {
        let tr = random_trace(&mut r, 300);
        let mut buf = Vec::new();
        write_gaze_csv(&tr, &mut buf).unwrap();
        let back = parse_gaze_csv(&buf, tr.width(), tr.height(), Coords::Pixel).unwrap();
        assert_same_samples(&tr, &back);
    }
}

proptest! {
    #[test]
    fn gaze_csv_round_trip_arbitrary_floats(
        rows in prop::collection::vec((1e-9f64..10.0, 0.0f64..1920.0, 0.0f64..1080.0, prop::bool::weighted(0.9)), 1..100)
    ) {
        let mut t = 0.0;
        let samples: Vec<GazeSample> = rows
            .iter()
            .map(|&(dt, x, y, valid)| {
                t += dt;
                if valid { GazeSample::new(t, x, y) } else { GazeSample::invalid(t) }
            })
            .collect();
        let tr = GazeTrace::new(samples, 1920, 1080, 200.0).unwrap();
        let mut buf = Vec::new();
        write_gaze_csv(&tr, &mut buf).unwrap();
        let back = parse_gaze_csv(&buf, 1920, 1080, Coords::Pixel).unwrap();
        assert_same_samples(&tr, &back);
    }

    #[test]
    fn sgm_bytes_round_trip(w in 1usize..24, h in 1usize..24, seed in any::<u64>()) {
        let mut r = rng(seed);
        let values: Vec<f64> = (0..w * h).map(|_| f64::from(r.random_range(0.0f32..100.0))).collect();
        let g = SaliencyGrid::new(w, h, values).unwrap();
        let bytes = encode_sgm(&g);
        let back = decode_sgm(&bytes).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(encode_sgm(&back), bytes);
    }
}

#[test]
fn sgm_layout_is_header_then_le_f32() {
    let g = SaliencyGrid::new(3, 2, vec![0.0, 1.0, 0.5, 2.0, 0.25, 8.0]).unwrap();
    let bytes = encode_sgm(&g);
    assert!(bytes.starts_with(b"SGM 3 2\n"));
    assert_eq!(bytes.len(), 8 + 6 * 4);
    assert_eq!(&bytes[8 + 4..8 + 8], &1.0f32.to_le_bytes());
    let (w, h, v) = decode_sgm_raw(&bytes).unwrap();
    assert_eq!((w, h), (3, 2));
    assert_eq!(v[5], 8.0);
}

#[test]
fn sgm_rejects_malformed_input() {
    let good = encode_sgm(&SaliencyGrid::new(2, 1, vec![1.0, 2.0]).unwrap());
    assert!(decode_sgm(&good[..good.len() - 1]).is_err());
    let mut extra = good.clone();
    extra.push(0);
    assert!(decode_sgm(&extra).is_err());
    for header in ["SGM 02 1\n", "SGM 2  1\n", "SGM 2 1 \n", "SGM 0 1\n", "SGM -2 1\n", "SGN 2 1\n", "SGM 2 1"] {
        let mut b = header.as_bytes().to_vec();
        b.extend_from_slice(&good[8..]);
        assert!(decode_sgm(&b).is_err(), "{header:?}");
    }
    let mut neg = b"SGM 1 1\n".to_vec();
    neg.extend_from_slice(&(-1.0f32).to_le_bytes());
    assert!(decode_sgm_raw(&neg).is_ok());
    assert!(decode_sgm(&neg).is_err());
    let huge = b"SGM 99999999999 99999999999\n";
    assert!(decode_sgm(huge).is_err());
}

#[test]
fn pgm_scales_min_to_zero_and_max_to_255() {
    let g = SaliencyGrid::new(3, 1, vec![2.0, 4.0, 6.0]).unwrap();
    let pgm = encode_pgm(&g);
    assert!(pgm.starts_with(b"P5\n3 1\n255\n"));
    assert_eq!(&pgm[pgm.len() - 3..], &[0, 128, 255]);
    let flat = encode_pgm(&SaliencyGrid::new(2, 1, vec![0.3, 0.3]).unwrap());
    assert_eq!(&flat[flat.len() - 2..], &[0, 0]);
}

#[test]
fn normalized_coordinates_scale_to_pixels() {
    let csv = b"t,x,y,valid\n0.0,0.5,0.25,1\n0.1,1.0,1.0,1\n";
    let tr = parse_gaze_csv(csv, 1280, 1024, Coords::Normalized).unwrap();
    assert_eq!((tr.samples()[0].x, tr.samples()[0].y), (640.0, 256.0));
    assert_eq!((tr.samples()[1].x, tr.samples()[1].y), (1279.0, 1023.0));
    assert_eq!(tr.clamped_indices(), &[1]);
}

#[test]
fn fixation_json_round_trips_exactly() {
    let mut r = rng(42);
    for _ in 0..200 {
        let tr = random_trace(&mut r, 300);
        let segs = gazekit::detect_fixations(&tr, gazekit::IdtParams::default()).unwrap();
        let text = gazekit::json::to_string_pretty(&segs);
        let back = gazekit::fixation::parse_fixations_json(text.as_bytes()).unwrap();
        assert_eq!(back, segs);
        gazekit::fixation::check_segments(&tr, &back).unwrap();
    }
}
