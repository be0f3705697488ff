use proptest::prelude::*;
use stegakit::attacks::{gaussian_noise_attack, jpeg_quantize_attack, REFERENCE_TABLE};
use stegakit::dct::{dct2_8x8, idct2_8x8, WatermarkImage};
use stegakit::metrics::{mse, nc, psnr, psnr_from_mse};
use stegakit::prng::SplitMix64;
use stegakit::{load_image, ImageBuffer};

fn camera() -> ImageBuffer {
    load_image(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/camera.pgm")).unwrap()
}

/// Whether requantizing block (`bx`, `by`) at `scale` produces samples outside [0, 255].
fn block_clips(img: &ImageBuffer, bx: usize, by: usize, scale: f64) -> bool {
    let mut block = [[0.0; 8]; 8];
    for (y, row) in block.iter_mut().enumerate() {
        for (x, v) in row.iter_mut().enumerate() {
            *v = f64::from(img.get(bx * 8 + x, by * 8 + y));
        }
    }
    let mut f = dct2_8x8(&block);
    for (j, row) in f.0.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            let step = scale * f64::from(REFERENCE_TABLE.step(j, k));
            *v = (*v / step).round() * step;
        }
    }
    idct2_8x8(&f).iter().flatten().any(|&v| !(-0.5..255.5).contains(&v))
}

#[test]
fn quantization_is_nearly_idempotent() {
    // Clipping is not transform rounding: blocks clipped by the first pass are excluded.
    let img = camera();
    for scale in [0.5, 1.0, 2.0] {
        let once = jpeg_quantize_attack(&img, scale).unwrap();
        let twice = jpeg_quantize_attack(&once, scale).unwrap();
        assert!(once.same_shape(&img));
        let mut checked = 0;
        for by in 0..64 {
            for bx in 0..64 {
                if block_clips(&img, bx, by, scale) {
                    continue;
                }
                checked += 1;
                for y in by * 8..by * 8 + 8 {
                    for x in bx * 8..bx * 8 + 8 {
                        let d = once.get(x, y).abs_diff(twice.get(x, y));
                        assert!(d <= 2, "scale {scale} block ({bx},{by}): {d}");
                    }
                }
            }
        }
        assert!(checked > 3800, "only {checked} unclipped blocks");
    }
}

#[test]
fn harsher_quantization_distorts_more() {
    let img = camera();
    let errs: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&s| mse(&img, &jpeg_quantize_attack(&img, s).unwrap()).unwrap())
        .collect();
    assert!(errs.windows(2).all(|p| p[0] < p[1]), "{errs:?}");
}

#[test]
fn quantization_leaves_margins() {
    let img = ImageBuffer::from_fn(19, 13, |x, y| (x * 13 + y * 29) as u8).unwrap();
    let out = jpeg_quantize_attack(&img, 3.0).unwrap();
    for y in 0..13 {
        for x in 0..19 {
            if x >= 16 || y >= 8 {
                assert_eq!(out.get(x, y), img.get(x, y));
            }
        }
    }
}

#[test]
fn noise_has_requested_spread() {
    let img = ImageBuffer::filled(512, 512, 128).unwrap();
    let out = gaussian_noise_attack(&img, 5.0, 77).unwrap();
    let diffs: Vec<f64> = img
        .samples()
        .iter()
        .zip(out.samples())
        .map(|(a, b)| f64::from(*b) - f64::from(*a))
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd - 5.0).abs() <= 0.2, "sd {sd}");
    assert!(mean.abs() < 0.05, "mean {mean}");
}

fn random_wm(rng: &mut SplitMix64, n: usize) -> WatermarkImage {
    let mut bits: Vec<bool> = (0..n).map(|_| rng.next_u64() & 1 == 1).collect();
    bits[(rng.next_u64() as usize) % n] = true;
    WatermarkImage::new(n, 1, bits).unwrap()
}

#[test]
fn nc_self_similarity() {
    let mut rng = SplitMix64::new(4);
    for _ in 0..100 {
        let n = 1 + (rng.next_u64() % 500) as usize;
        let w = random_wm(&mut rng, n);
        assert_eq!(nc(&w, &w).unwrap(), 1.0);
    }
}

#[test]
fn psnr_strictly_decreasing_in_mse() {
    let base = ImageBuffer::filled(10, 10, 100).unwrap();
    let mut last = f64::INFINITY;
    for delta in 1..=60u8 {
        let test = ImageBuffer::from_fn(10, 10, |x, _| if x < 5 { 100 + delta } else { 100 }).unwrap();
        let p = psnr(&base, &test).unwrap();
        assert!(p < last);
        last = p;
    }
    assert!(psnr_from_mse(1e-3) > psnr_from_mse(1e-2));
}

proptest! {
    #[test]
    fn mse_and_psnr_symmetric(seed in any::<u64>(), w in 1usize..30, h in 1usize..30) {
        let mut rng = SplitMix64::new(seed);
        let a = ImageBuffer::from_fn(w, h, |_, _| rng.next_u64() as u8).unwrap();
        let b = ImageBuffer::from_fn(w, h, |_, _| rng.next_u64() as u8).unwrap();
        prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn nc_bounded(seed in any::<u64>(), n in 1usize..400) {
        let mut rng = SplitMix64::new(seed);
        let a = random_wm(&mut rng, n);
        let b = random_wm(&mut rng, n);
        let v = nc(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn attacks_keep_shape(seed in any::<u64>(), w in 8usize..40, h in 8usize..40, sigma in 0.0f64..30.0, scale in 0.1f64..4.0) {
        let mut rng = SplitMix64::new(seed);
        let img = ImageBuffer::from_fn(w, h, |_, _| rng.next_u64() as u8).unwrap();
        prop_assert!(gaussian_noise_attack(&img, sigma, seed).unwrap().same_shape(&img));
        prop_assert!(jpeg_quantize_attack(&img, scale).unwrap().same_shape(&img));
    }
}
