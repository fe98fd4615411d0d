mod common;

use common::strategies;
use filament_core::preprocess::{build_white_patch_mask, inpaint, log_transform, sharpen, sharpen_unclamped};
use filament_core::{BinaryMask, GrayImage, InpaintConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick_inpaint() -> InpaintConfig {
    InpaintConfig { iterations: 40, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inpaint_keeps_pixels_outside_the_region((img, omega) in strategies::image_and_mask(3, 24)) {
        let out = inpaint(&img, &omega, &quick_inpaint()).unwrap();
        for (i, (&a, &b)) in img.data().iter().zip(out.data()).enumerate() {
            if !omega.data()[i] {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn inpaint_is_identity_on_constant_images(
        w in 3usize..20, h in 3usize..20, v in 0.0f64..255.0, seed in any::<u64>(),
    ) {
        let img = GrayImage::filled(w, h, v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = common::random_mask(&mut rng, w, h, 0.4);
        let out = inpaint(&img, &omega, &quick_inpaint()).unwrap();
        prop_assert_eq!(out, img);
    }

    #[test]
    fn log_transform_is_monotone(img in strategies::image(3, 16, 0.0, 1000.0)) {
        let (out, params) = log_transform(&img).unwrap();
        prop_assert!((params.apply(img.max()) - 255.0).abs() < 1e-9);
        let mut pairs: Vec<(f64, f64)> = img.data().iter().copied().zip(out.data().iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for p in pairs.windows(2) {
            prop_assert!(p[0].1 <= p[1].1);
        }
    }

    #[test]
    fn log_transform_orders_random_pairs(u in 0.0f64..500.0, v in 0.0f64..500.0, top in 500.0f64..4000.0) {
        let img = GrayImage::from_fn(3, 3, |x, y| match (x, y) {
            (0, 0) => u,
            (1, 0) => v,
            _ => top,
        }).unwrap();
        let (out, _) = log_transform(&img).unwrap();
        prop_assert_eq!(u <= v, out.get(0, 0) <= out.get(1, 0));
        prop_assert!((out.get(2, 2) - 255.0).abs() < 1e-9);
    }

    #[test]
    fn sharpen_matches_naive_convolution(img in strategies::image(3, 24, 0.0, 255.0)) {
        let expected = common::convolve_sharpen(&img);
        let got = sharpen_unclamped(&img);
        for (a, b) in expected.iter().zip(got.data()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let clamped = sharpen(&img);
        for (a, b) in expected.iter().zip(clamped.data()) {
            prop_assert!((a.clamp(0.0, 255.0) - b).abs() <= 1e-12);
            prop_assert!((0.0..=255.0).contains(b));
        }
    }

    #[test]
    fn sharpen_fixes_constant_images(w in 3usize..20, h in 3usize..20, v in 0.0f64..255.0) {
        let img = GrayImage::filled(w, h, v).unwrap();
        prop_assert_eq!(sharpen(&img), img);
    }
}

#[test]
fn ramp_hole_matches_harmonic_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (holed, omega, ramp) = common::ramp_with_hole(&mut rng);
        let reference = common::harmonic_fill(&holed, &omega, 1e-10);
        let filled = inpaint(&holed, &omega, &InpaintConfig::default()).unwrap();
        for i in 0..ramp.len() {
            assert!((filled.data()[i] - reference.data()[i]).abs() <= 2.0);
            assert!((reference.data()[i] - ramp.data()[i]).abs() <= 1e-6);
        }
    }
}

#[test]
fn white_patch_block_example() {
    let img =
        GrayImage::from_fn(100, 100, |x, y| if (40..45).contains(&x) && (60..65).contains(&y) { 255.0 } else { 100.0 })
            .unwrap();
    let cfg = InpaintConfig { white_patch_percentile: 0.99, dilation_radius: 1, ..Default::default() };
    let mask = build_white_patch_mask(&img, &cfg, None).unwrap();
    let expected = BinaryMask::from_fn(100, 100, |x, y| (39..46).contains(&x) && (59..66).contains(&y)).unwrap();
    assert_eq!(mask, expected);
}

#[test]
fn sharpen_replicate_border_example() {
    // columns 10, 20, 30; left border pixel sees a replicated 10
    let img = GrayImage::from_fn(3, 5, |x, _| 10.0 * (x + 1) as f64).unwrap();
    assert_eq!(sharpen_unclamped(&img).get(0, 2), 0.0);
}
