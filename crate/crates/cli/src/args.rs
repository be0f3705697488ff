use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stegakit", version, about = "LSB steganography, DCT watermarking and Gabor edge detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide a message file in the least significant bits of a cover image
    LsbEmbed {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        message: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a message hidden with lsb-embed
    LsbExtract {
        #[arg(long)]
        stego: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
        /// Write the message here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a binary watermark image into the DCT mid band of a host image
    DctEmbed {
        #[arg(long)]
        host: PathBuf,
        /// Watermark image; samples >= 128 are bit 1
        #[arg(long)]
        wm: PathBuf,
        /// Minimum separation enforced between the coefficient pair
        #[arg(long, default_value_t = stegakit::dct::DEFAULT_STRENGTH)]
        k: f64,
        #[arg(long, value_enum, ignore_case = true, default_value_t = Pair::A)]
        pair: Pair,
        #[arg(long)]
        out: PathBuf,
    },
    /// Blindly extract a watermark embedded with dct-embed
    DctExtract {
        #[arg(long = "in")]
        input: PathBuf,
        /// Watermark width in bits
        #[arg(long = "w")]
        width: usize,
        /// Watermark height in bits
        #[arg(long = "h")]
        height: usize,
        #[arg(long, value_enum, ignore_case = true, default_value_t = Pair::A)]
        pair: Pair,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gabor filter-bank edge map
    Edges {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 8.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Half-response bandwidth in octaves
        #[arg(long, default_value_t = 1.0)]
        bandwidth: f64,
        #[arg(long, default_value_t = 12)]
        orientations: usize,
        /// Convolve with the superposed φ=0°/φ=90° kernels instead of summing per-orientation energy
        #[arg(long)]
        superposed: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a quantization or additive-noise attack
    Attack {
        #[arg(long, value_enum)]
        kind: AttackKind,
        /// Multiplier on the quantization table (quantize)
        #[arg(long)]
        scale: Option<f64>,
        /// Noise standard deviation in gray levels (noise)
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Image fidelity (MSE, PSNR) and watermark similarity (NC)
    Metrics {
        #[arg(long = "ref", requires = "test")]
        reference: Option<PathBuf>,
        #[arg(long, requires = "reference")]
        test: Option<PathBuf>,
        #[arg(long, requires = "wm_test")]
        wm_ref: Option<PathBuf>,
        #[arg(long, requires = "wm_ref")]
        wm_test: Option<PathBuf>,
    },
    /// Report LSB and DCT watermark capacities in bits
    Capacity {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// 3x3 median filter
    MedianFilter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct KeyArgs {
    /// Passphrase selecting the pseudo-random pixel order
    #[arg(long, conflicts_with = "seed")]
    pub key: Option<String>,
    /// Raw 64-bit seed selecting the pseudo-random pixel order
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pair {
    /// (4,1)/(3,2), quantization step 22
    A,
    /// (1,2)/(3,0), quantization step 14
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    Quantize,
    Noise,
}
