//! Orthonormal 8×8 DCT-II and blind mid-band exchange-coefficient (MBEC)
//! watermarking.
//!
//! Each 8×8 block of the host carries one watermark bit, blocks and bits both
//! taken in row-major order. A block encodes `0` when the first coefficient of
//! the configured pair is greater than or equal to the second and `1`
//! otherwise. Extraction only needs the watermarked image and the pair.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{block_grid, ImageBuffer, BLOCK_SIZE};

const N: usize = BLOCK_SIZE;

/// 8×8 coefficients indexed `[row][col]` (vertical frequency, horizontal frequency).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefBlock(pub [[f64; N]; N]);

/// 8×8 spatial samples indexed `[row][col]`.
pub type SpatialBlock = [[f64; N]; N];

/// `basis[j][m] = a(j)·cos((2m+1)jπ/16)`.
fn basis() -> &'static [[f64; N]; N] {
    static BASIS: OnceLock<[[f64; N]; N]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut c = [[0.0; N]; N];
        for (j, row) in c.iter_mut().enumerate() {
            let a = if j == 0 { (1.0 / N as f64).sqrt() } else { (2.0 / N as f64).sqrt() };
            for (m, v) in row.iter_mut().enumerate() {
                *v = a * (((2 * m + 1) * j) as f64 * PI / (2 * N) as f64).cos();
            }
        }
        c
    })
}

/// Forward 2-D DCT, evaluated separably as `C·f·Cᵀ`.
pub fn dct2_8x8(block: &SpatialBlock) -> CoefBlock {
    let c = basis();
    let mut tmp = [[0.0; N]; N];
    for j in 0..N {
        for n in 0..N {
            tmp[j][n] = (0..N).map(|m| c[j][m] * block[m][n]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for j in 0..N {
        for k in 0..N {
            out[j][k] = (0..N).map(|n| tmp[j][n] * c[k][n]).sum();
        }
    }
    CoefBlock(out)
}

/// Inverse of [`dct2_8x8`], evaluated as `Cᵀ·F·C`.
pub fn idct2_8x8(coefs: &CoefBlock) -> SpatialBlock {
    let c = basis();
    let f = &coefs.0;
    let mut tmp = [[0.0; N]; N];
    for m in 0..N {
        for k in 0..N {
            tmp[m][k] = (0..N).map(|j| c[j][m] * f[j][k]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for m in 0..N {
        for n in 0..N {
            out[m][n] = (0..N).map(|k| tmp[m][k] * c[k][n]).sum();
        }
    }
    out
}

pub(crate) fn read_block(img: &ImageBuffer, x0: usize, y0: usize) -> SpatialBlock {
    let w = img.width();
    let s = img.samples();
    let mut b = [[0.0; N]; N];
    for (r, row) in b.iter_mut().enumerate() {
        let base = (y0 + r) * w + x0;
        for (c, v) in row.iter_mut().enumerate() {
            *v = f64::from(s[base + c]);
        }
    }
    b
}

/// Round half up, then clamp into the 8-bit range.
pub(crate) fn to_sample(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Applies `f` to every full 8×8 block in row-major block order (blocks with index
/// `>= limit` are skipped). `f` returns replacement pixels, or `None` to leave the
/// block untouched.
pub(crate) fn map_blocks<F>(img: &ImageBuffer, limit: usize, f: F) -> Result<ImageBuffer>
where
    F: Fn(usize, &SpatialBlock) -> Option<[[u8; N]; N]> + Sync,
{
    let grid = block_grid(img)?;
    let updates: Vec<(usize, [[u8; N]; N])> = (0..grid.len().min(limit))
        .into_par_iter()
        .filter_map(|i| {
            let (x0, y0) = grid.origin(i);
            f(i, &read_block(img, x0, y0)).map(|px| (i, px))
        })
        .collect();
    let mut out = img.clone();
    let w = out.width();
    let samples = out.samples_mut();
    for (i, px) in updates {
        let (x0, y0) = grid.origin(i);
        for (r, row) in px.iter().enumerate() {
            let base = (y0 + r) * w + x0;
            samples[base..base + N].copy_from_slice(row);
        }
    }
    Ok(out)
}

/// Zero-based (row, col) position inside an 8×8 coefficient block.
pub type Position = (usize, usize);

/// Mid-frequency band: anti-diagonals 3 through 6.
pub fn midband_mask() -> Vec<Position> {
    (0..N)
        .flat_map(|r| (0..N).map(move |c| (r, c)))
        .filter(|&p| in_midband(p))
        .collect()
}

pub fn in_midband((r, c): Position) -> bool {
    r < N && c < N && (3..=6).contains(&(r + c))
}

/// Coefficient pair whose two quantization steps are both 22.
pub const PAIR_A: (Position, Position) = ((4, 1), (3, 2));
/// Coefficient pair whose two quantization steps are both 14.
pub const PAIR_B: (Position, Position) = ((1, 2), (3, 0));

pub const DEFAULT_STRENGTH: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MbecConfig {
    first: Position,
    second: Position,
    strength: f64,
}

impl MbecConfig {
    pub fn new(first: Position, second: Position, strength: f64) -> Result<Self> {
        if !in_midband(first) || !in_midband(second) {
            return Err(Error::InvalidParameter(format!(
                "coefficient pair {first:?}/{second:?} must lie in the mid band (3 <= row+col <= 6)"
            )));
        }
        if first == second {
            return Err(Error::InvalidParameter("coefficient pair positions must differ".into()));
        }
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "strength must be a non-negative number, got {strength}"
            )));
        }
        Ok(MbecConfig {
            first,
            second,
            strength,
        })
    }

    pub fn pair_a(strength: f64) -> Result<Self> {
        Self::new(PAIR_A.0, PAIR_A.1, strength)
    }

    pub fn pair_b(strength: f64) -> Result<Self> {
        Self::new(PAIR_B.0, PAIR_B.1, strength)
    }

    pub fn first(&self) -> Position {
        self.first
    }

    pub fn second(&self) -> Position {
        self.second
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    fn decode(&self, coefs: &CoefBlock) -> bool {
        let f = &coefs.0;
        f[self.first.0][self.first.1] < f[self.second.0][self.second.1]
    }
}

impl Default for MbecConfig {
    fn default() -> Self {
        MbecConfig {
            first: PAIR_A.0,
            second: PAIR_A.1,
            strength: DEFAULT_STRENGTH,
        }
    }
}

/// Binary watermark, `true` meaning bit 1, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatermarkImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl WatermarkImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "watermark of {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(WatermarkImage { width, height, bits })
    }

    /// Thresholds a grayscale image: samples `>= 128` become bit 1.
    pub fn from_image(img: &ImageBuffer) -> Result<Self> {
        img.require_gray("watermark thresholding")?;
        Self::new(
            img.width(),
            img.height(),
            img.samples().iter().map(|&s| s >= 128).collect(),
        )
    }

    /// Renders bit 1 as 255 and bit 0 as 0.
    pub fn to_image(&self) -> ImageBuffer {
        ImageBuffer::gray(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("watermark dimensions are validated at construction")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// One watermark bit per full 8×8 block.
pub fn wm_capacity(img: &ImageBuffer) -> Result<usize> {
    Ok(block_grid(img)?.len())
}

/// Orders the pair for `bit` and pushes the two values at least `gap` apart.
fn encode_pair(c1: f64, c2: f64, bit: bool, gap: f64) -> (f64, f64) {
    // bit 0: c1 >= c2; bit 1: c1 < c2
    let (mut a, mut b) = if (c1 < c2) == bit { (c1, c2) } else { (c2, c1) };
    if (a - b).abs() < gap {
        let mean = 0.5 * (a + b);
        let half = 0.5 * gap;
        if bit {
            a = mean - half;
            b = mean + half;
        } else {
            a = mean + half;
            b = mean - half;
        }
    }
    (a, b)
}

/// Escalation steps tried when rounding or clipping breaks a freshly embedded block.
const MAX_ESCALATIONS: u32 = 4;

fn embed_block(block: &SpatialBlock, bit: bool, cfg: &MbecConfig) -> Option<[[u8; N]; N]> {
    let coefs = dct2_8x8(block);
    let (p, q) = (cfg.first, cfg.second);
    let (c1, c2) = (coefs.0[p.0][p.1], coefs.0[q.0][q.1]);
    let satisfied = (c1 < c2) == bit;
    if satisfied && (c1 - c2).abs() >= cfg.strength {
        return None;
    }
    let mut gap = cfg.strength;
    let mut pixels = [[0u8; N]; N];
    for attempt in 0..=MAX_ESCALATIONS {
        let mut marked = coefs;
        let (a, b) = encode_pair(c1, c2, bit, gap);
        marked.0[p.0][p.1] = a;
        marked.0[q.0][q.1] = b;
        let spatial = idct2_8x8(&marked);
        for (out, row) in pixels.iter_mut().zip(&spatial) {
            for (o, v) in out.iter_mut().zip(row) {
                *o = to_sample(*v);
            }
        }
        let decoded = cfg.decode(&dct2_8x8(&u8_block(&pixels)));
        if decoded == bit || cfg.strength == 0.0 || attempt == MAX_ESCALATIONS {
            break;
        }
        gap *= 2.0;
    }
    Some(pixels)
}

fn u8_block(px: &[[u8; N]; N]) -> SpatialBlock {
    let mut b = [[0.0; N]; N];
    for (dst, src) in b.iter_mut().zip(px) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = f64::from(*s);
        }
    }
    b
}

/// Embeds `wm` into the first `wm.len()` blocks of `host`.
///
/// When rounding or clipping to 8 bits flips a freshly marked block, the block is
/// re-marked from its original coefficients with twice the gap, up to four times.
pub fn mbec_embed(host: &ImageBuffer, wm: &WatermarkImage, cfg: &MbecConfig) -> Result<ImageBuffer> {
    let capacity = wm_capacity(host)?;
    if wm.len() > capacity {
        return Err(Error::CapacityExceeded {
            needed: wm.len(),
            capacity,
        });
    }
    map_blocks(host, wm.len(), |i, block| embed_block(block, wm.bits[i], cfg))
}

/// Blind extraction of a `w_width × w_height` watermark.
pub fn mbec_extract(img: &ImageBuffer, w_width: usize, w_height: usize, cfg: &MbecConfig) -> Result<WatermarkImage> {
    let grid = block_grid(img)?;
    let count = w_width * w_height;
    if count > grid.len() {
        return Err(Error::CapacityExceeded {
            needed: count,
            capacity: grid.len(),
        });
    }
    let bits = (0..count)
        .into_par_iter()
        .map(|i| {
            let (x0, y0) = grid.origin(i);
            cfg.decode(&dct2_8x8(&read_block(img, x0, y0)))
        })
        .collect();
    WatermarkImage::new(w_width, w_height, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_block_is_pure_dc() {
        let f = dct2_8x8(&[[37.0; 8]; 8]);
        for (j, row) in f.0.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let expected = if (j, k) == (0, 0) { 8.0 * 37.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dc_only_inverts_to_constant() {
        let mut c = CoefBlock([[0.0; 8]; 8]);
        assert!(idct2_8x8(&c).iter().flatten().all(|v| *v == 0.0));
        c.0[0][0] = 8.0 * 128.0;
        assert!(idct2_8x8(&c).iter().flatten().all(|v| (v - 128.0).abs() < 1e-9));
    }

    #[test]
    fn midband_membership() {
        let mask = midband_mask();
        for p in [(4, 1), (3, 2), (1, 2), (3, 0)] {
            assert!(mask.contains(&p), "{p:?}");
        }
        assert!(!mask.contains(&(0, 0)));
        assert!(!mask.contains(&(7, 7)));
        assert_eq!(mask.len(), 4 + 5 + 6 + 7);
    }

    #[test]
    fn config_validation() {
        assert!(MbecConfig::new((0, 0), (3, 2), 1.0).is_err());
        assert!(MbecConfig::new((3, 2), (3, 2), 1.0).is_err());
        assert!(MbecConfig::new((4, 1), (3, 2), -1.0).is_err());
        assert!(MbecConfig::pair_b(0.0).is_ok());
        assert_eq!(MbecConfig::default(), MbecConfig::pair_a(10.0).unwrap());
    }

    #[test]
    fn encode_pair_orders_and_separates() {
        assert_eq!(encode_pair(1.0, 5.0, false, 0.0), (5.0, 1.0));
        assert_eq!(encode_pair(1.0, 5.0, true, 0.0), (1.0, 5.0));
        assert_eq!(encode_pair(2.0, 3.0, false, 10.0), (7.5, -2.5));
        assert_eq!(encode_pair(2.0, 3.0, true, 10.0), (-2.5, 7.5));
        assert_eq!(encode_pair(20.0, 3.0, false, 10.0), (20.0, 3.0));
    }

    #[test]
    fn capacity_is_block_count() {
        assert_eq!(wm_capacity(&ImageBuffer::filled(512, 512, 0).unwrap()).unwrap(), 4096);
        assert_eq!(wm_capacity(&ImageBuffer::filled(256, 240, 0).unwrap()).unwrap(), 960);
        assert_eq!(wm_capacity(&ImageBuffer::filled(8, 8, 0).unwrap()).unwrap(), 1);
        assert!(wm_capacity(&ImageBuffer::filled(8, 7, 0).unwrap()).is_err());
    }

    #[test]
    fn watermark_thresholding() {
        let img = ImageBuffer::gray(2, 2, vec![0, 127, 128, 255]).unwrap();
        let wm = WatermarkImage::from_image(&img).unwrap();
        assert_eq!(wm.bits(), &[false, false, true, true]);
        assert_eq!(wm.to_image().samples(), &[0, 0, 255, 255]);
        assert!(WatermarkImage::new(2, 2, vec![true; 3]).is_err());
    }

    #[test]
    fn embed_rejects_oversized_watermark() {
        let host = ImageBuffer::filled(16, 16, 100).unwrap();
        let wm = WatermarkImage::new(5, 1, vec![true; 5]).unwrap();
        assert!(matches!(
            mbec_embed(&host, &wm, &MbecConfig::default()),
            Err(Error::CapacityExceeded { needed: 5, capacity: 4 })
        ));
        assert!(mbec_extract(&host, 5, 1, &MbecConfig::default()).is_err());
    }

    #[test]
    fn satisfied_block_is_untouched() {
        // Flat block: both coefficients are 0, so c1 >= c2 already encodes 0; with k=0 nothing moves.
        let host = ImageBuffer::filled(8, 8, 90).unwrap();
        let wm = WatermarkImage::new(1, 1, vec![false]).unwrap();
        let out = mbec_embed(&host, &wm, &MbecConfig::pair_a(0.0).unwrap()).unwrap();
        assert_eq!(out, host);
    }

    #[test]
    fn saturated_blocks_still_decode() {
        for level in [0u8, 255] {
            let host = ImageBuffer::filled(32, 16, level).unwrap();
            let bits: Vec<bool> = (0..8).map(|i| i % 3 == 0).collect();
            let wm = WatermarkImage::new(4, 2, bits).unwrap();
            let cfg = MbecConfig::pair_a(2.0).unwrap();
            let out = mbec_embed(&host, &wm, &cfg).unwrap();
            assert_eq!(mbec_extract(&out, 4, 2, &cfg).unwrap(), wm);
        }
    }

    #[test]
    fn margins_pass_through() {
        let host = ImageBuffer::from_fn(21, 13, |x, y| (x * 11 + y * 5) as u8).unwrap();
        let wm = WatermarkImage::new(2, 1, vec![true, false]).unwrap();
        let out = mbec_embed(&host, &wm, &MbecConfig::default()).unwrap();
        for y in 0..13 {
            for x in 0..21 {
                if x >= 16 || y >= 8 {
                    assert_eq!(out.get(x, y), host.get(x, y));
                }
            }
        }
    }
}
