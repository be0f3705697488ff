//! MSE, PSNR and normalized cross-correlation.

use crate::dct::WatermarkImage;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

pub const PEAK: f64 = 255.0;

fn check_shape(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels().count(),
            b.width(),
            b.height(),
            b.channels().count()
        )))
    }
}

/// Mean squared error over all samples, channels included.
pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check_shape(a, b)?;
    let sum: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    Ok(sum as f64 / a.sample_count() as f64)
}

/// PSNR in dB for a given MSE; `+inf` when the MSE is zero.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    mse(a, b).map(psnr_from_mse)
}

/// Normalized cross-correlation of two equally sized bit grids.
pub fn nc(w: &WatermarkImage, w2: &WatermarkImage) -> Result<f64> {
    if w.width() != w2.width() || w.height() != w2.height() {
        return Err(Error::DimensionMismatch(format!(
            "watermarks {}x{} vs {}x{}",
            w.width(),
            w.height(),
            w2.width(),
            w2.height()
        )));
    }
    let ones = |bits: &[bool]| bits.iter().filter(|&&b| b).count();
    let (n1, n2) = (ones(w.bits()), ones(w2.bits()));
    if n1 == 0 || n2 == 0 {
        return Err(Error::ZeroWatermark);
    }
    let dot = w.bits().iter().zip(w2.bits()).filter(|(a, b)| **a && **b).count();
    Ok(dot as f64 / ((n1 as f64) * (n2 as f64)).sqrt())
}

/// Fidelity of a test image against a reference, optionally with watermark similarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub nc: Option<f64>,
}

impl QualityReport {
    pub fn compare(reference: &ImageBuffer, test: &ImageBuffer) -> Result<Self> {
        let mse = mse(reference, test)?;
        Ok(QualityReport {
            mse,
            psnr_db: psnr_from_mse(mse),
            nc: None,
        })
    }

    pub fn with_nc(mut self, w: &WatermarkImage, w2: &WatermarkImage) -> Result<Self> {
        self.nc = Some(nc(w, w2)?);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wm(bits: &[u8]) -> WatermarkImage {
        WatermarkImage::new(bits.len(), 1, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn mse_basics() {
        let a = ImageBuffer::gray(1, 1, vec![0]).unwrap();
        let b = ImageBuffer::gray(1, 1, vec![255]).unwrap();
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 65025.0);
        assert_eq!(psnr(&a, &b).unwrap(), 0.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let c = ImageBuffer::gray(1, 2, vec![0, 0]).unwrap();
        assert!(matches!(mse(&a, &c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn psnr_of_small_mse() {
        // 10·log10(65025/0.15)
        assert!((psnr_from_mse(0.15) - 56.369_891_018).abs() < 1e-8);
    }

    #[test]
    fn nc_fixtures() {
        let w = wm(&[1, 1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(nc(&w, &w).unwrap(), 1.0);
        assert_eq!(nc(&w, &wm(&[0, 0, 0, 0, 1, 1, 1, 1])).unwrap(), 0.0);
        assert_eq!(nc(&w, &wm(&[0, 1, 1, 1, 1, 0, 0, 0])).unwrap(), 0.75);
        assert!(matches!(nc(&w, &wm(&[0; 8])), Err(Error::ZeroWatermark)));
        assert!(nc(&w, &wm(&[1; 4])).is_err());
    }

    #[test]
    fn report_combines_metrics() {
        let a = ImageBuffer::gray(2, 1, vec![10, 10]).unwrap();
        let b = ImageBuffer::gray(2, 1, vec![10, 12]).unwrap();
        let w = wm(&[1, 0]);
        let r = QualityReport::compare(&a, &b).unwrap().with_nc(&w, &w).unwrap();
        assert_eq!(r.mse, 2.0);
        assert_eq!(r.nc, Some(1.0));
        assert!((r.psnr_db - psnr_from_mse(2.0)).abs() < 1e-12);
    }
}
