//! Gabor kernels, filter-bank superposition and the superposed-bank edge detector.
//!
//! A kernel sample at integer offset (x, y) is
//!
//! ```text
//! x' =  x cos θ + y sin θ
//! y' = -x sin θ + y cos θ
//! g  = exp(-(x'^2 + γ^2 y'^2) / (2σ^2)) · cos(2π x'/λ + φ)
//! ```
//!
//! followed by subtraction of the kernel mean so that flat regions produce no
//! response. Angles are given in degrees.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{reflect, ImageBuffer};

fn half_response_constant() -> f64 {
    (std::f64::consts::LN_2 / 2.0).sqrt()
}

/// σ of the Gaussian envelope giving a half-response bandwidth of `bandwidth` octaves.
pub fn sigma_from_bandwidth(lambda: f64, bandwidth: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) || !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "wavelength and bandwidth must be positive (got λ={lambda}, b={bandwidth})"
        )));
    }
    let p = 2f64.powf(bandwidth);
    Ok(lambda / PI * half_response_constant() * (p + 1.0) / (p - 1.0))
}

/// Half-response bandwidth in octaves of a filter with envelope `sigma` and wavelength `lambda`.
pub fn bandwidth_from_sigma(sigma: f64, lambda: f64) -> Result<f64> {
    let c = half_response_constant();
    let ratio = sigma / lambda * PI;
    if !(lambda > 0.0) || !(ratio > c) {
        return Err(Error::InvalidParameter(format!(
            "σ/λ must exceed sqrt(ln2/2)/π for a finite bandwidth (got σ={sigma}, λ={lambda})"
        )));
    }
    Ok(((ratio + c) / (ratio - c)).log2())
}

/// Which parameter determines the Gaussian envelope width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Sigma(f64),
    Bandwidth(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaborParams {
    pub lambda: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub gamma: f64,
    pub envelope: Envelope,
}

impl GaborParams {
    pub fn with_bandwidth(lambda: f64, theta_deg: f64, phi_deg: f64, gamma: f64, bandwidth: f64) -> Self {
        GaborParams {
            lambda,
            theta_deg,
            phi_deg,
            gamma,
            envelope: Envelope::Bandwidth(bandwidth),
        }
    }

    pub fn with_sigma(lambda: f64, theta_deg: f64, phi_deg: f64, gamma: f64, sigma: f64) -> Self {
        GaborParams {
            lambda,
            theta_deg,
            phi_deg,
            gamma,
            envelope: Envelope::Sigma(sigma),
        }
    }

    pub fn sigma(&self) -> Result<f64> {
        match self.envelope {
            Envelope::Sigma(s) if s > 0.0 && s.is_finite() => Ok(s),
            Envelope::Sigma(s) => Err(Error::InvalidParameter(format!("σ must be positive, got {s}"))),
            Envelope::Bandwidth(b) => sigma_from_bandwidth(self.lambda, b),
        }
    }

    pub fn bandwidth(&self) -> Result<f64> {
        match self.envelope {
            Envelope::Bandwidth(b) => Ok(b),
            Envelope::Sigma(s) => bandwidth_from_sigma(s, self.lambda),
        }
    }

    fn validate(&self) -> Result<f64> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("λ must be positive, got {}", self.lambda)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("γ must be positive, got {}", self.gamma)));
        }
        if !self.theta_deg.is_finite() || !self.phi_deg.is_finite() {
            return Err(Error::InvalidParameter("angles must be finite".into()));
        }
        self.sigma()
    }

    /// Support radius covering three standard deviations of the envelope.
    pub fn default_radius(&self) -> Result<usize> {
        Ok(((3.0 * self.validate()?).ceil() as usize).max(1))
    }
}

/// Square, centred convolution kernel of side `2·radius + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    radius: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn from_fn(radius: usize, mut f: impl FnMut(isize, isize) -> f64) -> Self {
        let r = radius as isize;
        let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
        for y in -r..=r {
            for x in -r..=r {
                weights.push(f(x, y));
            }
        }
        Kernel { radius, weights }
    }

    /// Kernel with a single unit weight at the centre.
    pub fn delta(radius: usize) -> Self {
        Self::from_fn(radius, |x, y| if x == 0 && y == 0 { 1.0 } else { 0.0 })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Row-major weights, row `y = -radius` first.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset (`x`, `y`) from the centre.
    pub fn at(&self, x: isize, y: isize) -> f64 {
        let r = self.radius as isize;
        self.weights[((y + r) * (2 * r + 1) + (x + r)) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Kernel {
        Kernel {
            radius: self.radius,
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

fn raw_gabor_kernel(p: &GaborParams, radius: usize) -> Result<Kernel> {
    let sigma = p.validate()?;
    if radius == 0 {
        return Err(Error::InvalidParameter("kernel radius must be at least 1".into()));
    }
    let (sin_t, cos_t) = p.theta_deg.to_radians().sin_cos();
    let phi = p.phi_deg.to_radians();
    let two_sigma_sq = 2.0 * sigma * sigma;
    let gamma_sq = p.gamma * p.gamma;
    Ok(Kernel::from_fn(radius, |x, y| {
        let (x, y) = (x as f64, y as f64);
        let xr = x * cos_t + y * sin_t;
        let yr = -x * sin_t + y * cos_t;
        (-(xr * xr + gamma_sq * yr * yr) / two_sigma_sq).exp() * (2.0 * PI * xr / p.lambda + phi).cos()
    }))
}

/// Zero-mean Gabor kernel sampled on integer offsets in `[-radius, radius]²`.
pub fn gabor_kernel(p: &GaborParams, radius: usize) -> Result<Kernel> {
    let mut k = raw_gabor_kernel(p, radius)?;
    let mean = k.sum() / k.weights.len() as f64;
    k.weights.iter_mut().for_each(|w| *w -= mean);
    Ok(k)
}

/// Element-wise sum of equally sized kernels.
pub fn superpose(kernels: &[Kernel]) -> Result<Kernel> {
    let (first, rest) = kernels
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("cannot superpose an empty kernel list".into()))?;
    let mut acc = first.clone();
    for k in rest {
        if k.radius != acc.radius {
            return Err(Error::InvalidParameter(format!(
                "kernel radii differ ({} vs {})",
                acc.radius, k.radius
            )));
        }
        acc.weights.iter_mut().zip(&k.weights).for_each(|(a, b)| *a += b);
    }
    Ok(acc)
}

/// Real-valued `width × height` response map, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ResponseMap {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Convolves a grayscale image with `k`, mirroring the image at its borders.
pub fn convolve(img: &ImageBuffer, k: &Kernel) -> Result<ResponseMap> {
    img.require_gray("convolution")?;
    let (w, h) = (img.width(), img.height());
    let side = k.side();
    if w < side || h < side {
        return Err(Error::SmallerThanKernel {
            width: w,
            height: h,
            size: side,
        });
    }
    let r = k.radius as isize;
    let src = img.samples();
    let padded_w = w + 2 * k.radius;
    let padded: Vec<f64> = (0..h + 2 * k.radius)
        .flat_map(|py| {
            let row = reflect(py as isize - r, h) * w;
            (0..padded_w).map(move |px| f64::from(src[row + reflect(px as isize - r, w)]))
        })
        .collect();
    // out(i, j) = sum img(i+y, j+x) * k(-x, -y): correlate with the point-reflected kernel.
    let flipped: Vec<f64> = k.weights.iter().rev().copied().collect();
    let mut values = vec![0.0; w * h];
    values.par_chunks_mut(w).enumerate().for_each(|(i, row)| {
        for (ky, taps) in flipped.chunks_exact(side).enumerate() {
            let src_row = &padded[(i + ky) * padded_w..(i + ky + 1) * padded_w];
            for (j, out) in row.iter_mut().enumerate() {
                *out += src_row[j..j + side]
                    .iter()
                    .zip(taps)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
    });
    Ok(ResponseMap {
        width: w,
        height: h,
        values,
    })
}

fn bank_params(lambda: f64, gamma: f64, bandwidth: f64, phi_deg: f64) -> Result<(GaborParams, usize)> {
    let base = GaborParams::with_bandwidth(lambda, 0.0, phi_deg, gamma, bandwidth);
    let radius = base.default_radius()?;
    Ok((base, radius))
}

fn orientation(k: usize, n: usize) -> f64 {
    k as f64 * 360.0 / n as f64
}

fn require_orientations(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("at least one orientation is required".into()))
    } else {
        Ok(())
    }
}

/// Superposition of `n_orientations` zero-mean kernels at θ = k·360°/n for one phase.
pub fn orientation_bank(
    lambda: f64,
    gamma: f64,
    bandwidth: f64,
    phi_deg: f64,
    n_orientations: usize,
) -> Result<Kernel> {
    require_orientations(n_orientations)?;
    let (base, radius) = bank_params(lambda, gamma, bandwidth, phi_deg)?;
    let kernels = (0..n_orientations)
        .map(|k| {
            let theta_deg = orientation(k, n_orientations);
            gabor_kernel(&GaborParams { theta_deg, ..base }, radius)
        })
        .collect::<Result<Vec<_>>>()?;
    superpose(&kernels)
}

/// Sum over θ = k·360°/n of the local energy `sqrt(even² + odd²)` of the φ=0°/φ=90°
/// kernel pair at θ.
///
/// Orientations θ and θ+180° share the even kernel and negate the odd one, so
/// for even `n` only the first half-turn is convolved and counted twice.
pub fn quadrature_energy(
    img: &ImageBuffer,
    lambda: f64,
    gamma: f64,
    bandwidth: f64,
    n_orientations: usize,
) -> Result<ResponseMap> {
    require_orientations(n_orientations)?;
    let (base, radius) = bank_params(lambda, gamma, bandwidth, 0.0)?;
    let (distinct, weight) = if n_orientations % 2 == 0 {
        (n_orientations / 2, 2.0)
    } else {
        (n_orientations, 1.0)
    };
    let mut energy = vec![0.0; img.sample_count()];
    for k in 0..distinct {
        let theta_deg = orientation(k, n_orientations);
        let even = gabor_kernel(&GaborParams { theta_deg, ..base }, radius)?;
        let odd = gabor_kernel(
            &GaborParams {
                theta_deg,
                phi_deg: 90.0,
                ..base
            },
            radius,
        )?;
        let re = convolve(img, &even)?;
        let im = convolve(img, &odd)?;
        for ((e, a), b) in energy.iter_mut().zip(&re.values).zip(&im.values) {
            *e += weight * a.hypot(*b);
        }
    }
    Ok(ResponseMap {
        width: img.width(),
        height: img.height(),
        values: energy,
    })
}

/// Magnitude `sqrt(r² + i²)` of the responses to the superposed φ=0° and φ=90° banks.
///
/// With an even orientation count spanning the full turn the φ=90° bank cancels
/// to (numerically) zero, leaving only the even response.
pub fn superposed_response(
    img: &ImageBuffer,
    lambda: f64,
    gamma: f64,
    bandwidth: f64,
    n_orientations: usize,
) -> Result<ResponseMap> {
    let even = orientation_bank(lambda, gamma, bandwidth, 0.0, n_orientations)?;
    let odd = orientation_bank(lambda, gamma, bandwidth, 90.0, n_orientations)?;
    let re = convolve(img, &even)?;
    let im = convolve(img, &odd)?;
    let values = re.values.iter().zip(&im.values).map(|(a, b)| a.hypot(*b)).collect();
    Ok(ResponseMap {
        width: img.width(),
        height: img.height(),
        values,
    })
}

const RESPONSE_FLOOR: f64 = 1e-6;

/// Linear rescale of a non-negative response so its peak maps to 255.
pub fn rescale_to_image(map: &ResponseMap) -> Result<ImageBuffer> {
    let peak = map.values.iter().copied().fold(0.0, f64::max);
    // Zero-mean kernels leave round-off residue on flat input; treat it as no response.
    let samples = if peak > RESPONSE_FLOOR {
        map.values
            .iter()
            .map(|m| (m / peak * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
            .collect()
    } else {
        vec![0; map.values.len()]
    };
    ImageBuffer::gray(map.width, map.height, samples)
}

/// Gabor edge map: [`quadrature_energy`] rescaled to `[0, 255]`.
pub fn edge_map(
    img: &ImageBuffer,
    lambda: f64,
    gamma: f64,
    bandwidth: f64,
    n_orientations: usize,
) -> Result<ImageBuffer> {
    rescale_to_image(&quadrature_energy(img, lambda, gamma, bandwidth, n_orientations)?)
}

/// Edge map from [`superposed_response`] rescaled to `[0, 255]`.
pub fn superposed_edge_map(
    img: &ImageBuffer,
    lambda: f64,
    gamma: f64,
    bandwidth: f64,
    n_orientations: usize,
) -> Result<ImageBuffer> {
    rescale_to_image(&superposed_response(img, lambda, gamma, bandwidth, n_orientations)?)
}
