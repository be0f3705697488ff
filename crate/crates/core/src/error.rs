use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed netpbm header: {0}")]
    MalformedHeader(String),

    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("image too small for block watermarking ({width}x{height}, need at least 8x8)")]
    TooSmallForBlocks { width: usize, height: usize },

    #[error("image ({width}x{height}) is smaller than the {size}x{size} kernel")]
    SmallerThanKernel { width: usize, height: usize, size: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("message exceeds capacity ({needed} bits needed, {capacity} available)")]
    CapacityExceeded { needed: usize, capacity: usize },

    #[error("corrupt or absent payload")]
    CorruptPayload,

    #[error("NC undefined for zero watermark")]
    ZeroWatermark,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
