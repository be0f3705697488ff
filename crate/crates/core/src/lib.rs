//! Image data hiding toolkit: LSB steganography, blind DCT mid-band watermarking,
//! Gabor filter-bank edge detection, attack simulation and quality metrics.
//!
//! All images are 8-bit; transform-domain pipelines operate on grayscale
//! buffers only. Every keyed or random operation is driven by a pinned
//! SplitMix64 stream, so outputs are reproducible given the same inputs.

pub mod attacks;
pub mod dct;
pub mod error;
pub mod gabor;
pub mod image;
pub mod lsb;
pub mod metrics;
pub mod prng;

pub use error::{Error, Result};
pub use image::{load_image, save_image, to_grayscale, Channels, ImageBuffer};
