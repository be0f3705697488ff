//! 8-bit pixel buffers, binary Netpbm I/O and 8×8 block decomposition.
//!
//! Only the binary `P5` (grayscale) and `P6` (RGB) variants with a maxval of
//! 255 are supported. Files are written as `P5|P6\n<w> <h>\n255\n` followed by
//! the raw row-major samples, so a save followed by a load is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Edge length of the square blocks used by the transform-domain pipelines.
pub const BLOCK_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channels {
    Gray = 1,
    Rgb = 3,
}

impl Channels {
    pub fn count(self) -> usize {
        self as usize
    }

    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Channels::Gray),
            3 => Ok(Channels::Rgb),
            _ => Err(Error::InvalidImage(format!("unsupported channel count {n}"))),
        }
    }
}

/// Row-major, channel-interleaved grid of 8-bit samples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: Channels,
    samples: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: Channels, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-size image ({width}x{height})"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels.count()))
            .ok_or_else(|| Error::InvalidImage("image dimensions overflow".into()))?;
        if samples.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} samples for {width}x{height}x{}, got {}",
                channels.count(),
                samples.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn gray(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        Self::new(width, height, Channels::Gray, samples)
    }

    /// Grayscale image filled with a single value.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::gray(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Grayscale image whose pixel at (`x`, `y`) is `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::gray(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn is_gray(&self) -> bool {
        self.channels == Channels::Gray
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Sample at column `x`, row `y` of a grayscale image.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[(y * self.width + x) * self.channels.count()]
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn require_gray(&self, what: &str) -> Result<()> {
        if self.is_gray() {
            Ok(())
        } else {
            Err(Error::InvalidImage(format!("{what} requires a grayscale image")))
        }
    }

    /// Serializes to binary PGM (`P5`) or PPM (`P6`).
    pub fn to_netpbm(&self) -> Vec<u8> {
        let magic = match self.channels {
            Channels::Gray => "P5",
            Channels::Rgb => "P6",
        };
        let header = format!("{magic}\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.samples.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.samples);
        out
    }

    /// Parses a binary PGM (`P5`) or PPM (`P6`) byte stream.
    pub fn from_netpbm(bytes: &[u8]) -> Result<Self> {
        let mut parser = HeaderParser { bytes, pos: 0 };
        let channels = match bytes.get(..2) {
            Some(b"P5") => Channels::Gray,
            Some(b"P6") => Channels::Rgb,
            _ => return Err(Error::MalformedHeader("expected magic P5 or P6".into())),
        };
        parser.pos = 2;
        let width = parser.next_number("width")?;
        let height = parser.next_number("height")?;
        let maxval = parser.next_number("maxval")?;
        if maxval != 255 {
            return Err(Error::UnsupportedMaxval(maxval));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(parser.pos) {
            Some(b) if b.is_ascii_whitespace() => parser.pos += 1,
            _ => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
        }
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader(format!("zero-size image ({width}x{height})")));
        }
        let (width, height) = (width as usize, height as usize);
        let len = width * height * channels.count();
        let raster = bytes
            .get(parser.pos..parser.pos + len)
            .ok_or_else(|| Error::MalformedHeader(format!("truncated raster, expected {len} bytes")))?;
        Self::new(width, height, channels, raster.to_vec())
    }
}

struct HeaderParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderParser<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, field: &str) -> Result<u32> {
        let start = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == start {
            return Err(Error::MalformedHeader(format!("expected whitespace before {field}")));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("invalid {field}")))
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ImageBuffer::from_netpbm(&bytes)
}

pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&img.to_netpbm()).map_err(io_err)?;
    file.flush().map_err(io_err)
}

/// BT.601 luma with round-half-up; grayscale input is returned unchanged.
pub fn to_grayscale(img: &ImageBuffer) -> ImageBuffer {
    match img.channels {
        Channels::Gray => img.clone(),
        Channels::Rgb => {
            let samples = img
                .samples
                .chunks_exact(3)
                .map(|px| {
                    let weighted =
                        299 * u32::from(px[0]) + 587 * u32::from(px[1]) + 114 * u32::from(px[2]);
                    ((weighted + 500) / 1000).min(255) as u8
                })
                .collect();
            ImageBuffer {
                width: img.width,
                height: img.height,
                channels: Channels::Gray,
                samples,
            }
        }
    }
}

/// Non-overlapping 8×8 tiling of the top-left `blocks_x·8 × blocks_y·8` region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    pub blocks_x: usize,
    pub blocks_y: usize,
}

impl BlockGrid {
    pub fn block_size(&self) -> usize {
        BLOCK_SIZE
    }

    pub fn len(&self) -> usize {
        self.blocks_x * self.blocks_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Top-left pixel (x, y) of block `index` in row-major block order.
    pub fn origin(&self, index: usize) -> (usize, usize) {
        ((index % self.blocks_x) * BLOCK_SIZE, (index / self.blocks_x) * BLOCK_SIZE)
    }

    pub fn origins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(|i| self.origin(i))
    }
}

pub fn block_grid(img: &ImageBuffer) -> Result<BlockGrid> {
    img.require_gray("block decomposition")?;
    if img.width < BLOCK_SIZE || img.height < BLOCK_SIZE {
        return Err(Error::TooSmallForBlocks {
            width: img.width,
            height: img.height,
        });
    }
    Ok(BlockGrid {
        blocks_x: img.width / BLOCK_SIZE,
        blocks_y: img.height / BLOCK_SIZE,
    })
}

/// Reflects `i` into `0..n` without repeating the edge sample (`-1 -> 1`, `n -> n-2`).
/// Valid for offsets of at most `n - 1` beyond either edge.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// 3×3 median filter applied per channel, reflecting at the borders.
pub fn median_filter_3x3(img: &ImageBuffer) -> ImageBuffer {
    let (w, h, c) = (img.width, img.height, img.channels.count());
    let mut out = img.clone();
    let mut window = [0u8; 9];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut n = 0;
                for dy in -1..=1isize {
                    let yy = reflect(y as isize + dy, h);
                    for dx in -1..=1isize {
                        let xx = reflect(x as isize + dx, w);
                        window[n] = img.samples[(yy * w + xx) * c + ch];
                        n += 1;
                    }
                }
                window.sort_unstable();
                out.samples[(y * w + x) * c + ch] = window[4];
            }
        }
    }
    out
}
