//! Content-preserving attacks used to stress embedded watermarks.

use crate::dct::{dct2_8x8, idct2_8x8, map_blocks, to_sample, CoefBlock};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::prng::SplitMix64;

/// 8×8 table of quantization steps, all `>= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantTable([[u16; 8]; 8]);

impl QuantTable {
    pub fn new(steps: [[u16; 8]; 8]) -> Result<Self> {
        if steps.iter().flatten().any(|&q| q == 0) {
            return Err(Error::InvalidParameter("quantization steps must be >= 1".into()));
        }
        Ok(QuantTable(steps))
    }

    pub fn step(&self, row: usize, col: usize) -> u16 {
        self.0[row][col]
    }
}

/// Reference table. Differs from the usual JPEG luminance table in a few
/// entries (row 1, col 6 is 16 rather than 58).
pub const REFERENCE_TABLE: QuantTable = QuantTable([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 48, 16, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 108, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
]);

/// JPEG-style requantization of every full 8×8 block with steps `scale·Q`.
pub fn jpeg_quantize_attack(img: &ImageBuffer, scale: f64) -> Result<ImageBuffer> {
    quantize_with_table(img, &REFERENCE_TABLE, scale)
}

pub fn quantize_with_table(img: &ImageBuffer, table: &QuantTable, scale: f64) -> Result<ImageBuffer> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("attack scale must be positive, got {scale}")));
    }
    map_blocks(img, usize::MAX, |_, block| {
        let mut f: CoefBlock = dct2_8x8(block);
        for (j, row) in f.0.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let step = scale * f64::from(table.step(j, k));
                *v = (*v / step).round() * step;
            }
        }
        let spatial = idct2_8x8(&f);
        Some(spatial.map(|row| row.map(to_sample)))
    })
}

/// Adds N(0, σ²) noise per sample from the pinned generator, then rounds and clamps.
///
/// Deviates are produced by Box–Muller in pairs; samples are visited in storage
/// order and consume the pair's cosine branch first.
pub fn gaussian_noise_attack(img: &ImageBuffer, sigma: f64, seed: u64) -> Result<ImageBuffer> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut out = img.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let mut rng = SplitMix64::new(seed);
    for pair in out.samples_mut().chunks_mut(2) {
        let (z0, z1) = rng.next_gaussian_pair();
        for (s, z) in pair.iter_mut().zip([z0, z1]) {
            *s = to_sample(f64::from(*s) + sigma * z);
        }
    }
    Ok(out)
}
