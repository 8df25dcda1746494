//! MSE / PSNR between two images of the same size.

use std::fmt;

use thiserror::Error;

use crate::imageio::RgbImage;

pub const PEAK: f64 = 255.0;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("DimensionMismatch: {a:?} vs {b:?}")]
pub struct DimensionMismatch {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub mse_per_channel: [f64; 3],
    /// Mean over all 3 x width x height samples.
    pub mse_combined: f64,
    /// `f64::INFINITY` for identical images.
    pub psnr_db: f64,
    pub max_abs_err: u8,
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), DimensionMismatch> {
    let (da, db) = ((a.width(), a.height()), (b.width(), b.height()));
    if da == db {
        Ok(())
    } else {
        Err(DimensionMismatch { a: da, b: db })
    }
}

pub fn quality_report(a: &RgbImage, b: &RgbImage) -> Result<QualityReport, DimensionMismatch> {
    check_dims(a, b)?;
    let samples = (a.width() * a.height()) as f64;
    let mut mse_per_channel = [0.0; 3];
    let mut max_abs_err = 0u8;
    for (c, mse) in mse_per_channel.iter_mut().enumerate() {
        let mut sum = 0u64;
        for (&x, &y) in a.plane(c).as_slice().iter().zip(b.plane(c).as_slice()) {
            let d = x.abs_diff(y);
            max_abs_err = max_abs_err.max(d);
            sum += u64::from(d) * u64::from(d);
        }
        *mse = sum as f64 / samples;
    }
    let mse_combined = mse_per_channel.iter().sum::<f64>() / 3.0;
    Ok(QualityReport {
        mse_per_channel,
        mse_combined,
        psnr_db: psnr_from_mse(mse_combined),
        max_abs_err,
    })
}

pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64, DimensionMismatch> {
    quality_report(a, b).map(|r| r.mse_combined)
}

pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64, DimensionMismatch> {
    quality_report(a, b).map(|r| r.psnr_db)
}

fn fmt_db(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{db:.4}")
    }
}

impl QualityReport {
    pub const CSV_HEADER: &'static str = "mse_r,mse_g,mse_b,mse,psnr_db,max_abs_err";

    pub fn csv_line(&self) -> String {
        let [r, g, b] = self.mse_per_channel;
        format!(
            "{r:.4},{g:.4},{b:.4},{:.4},{},{}",
            self.mse_combined,
            fmt_db(self.psnr_db),
            self.max_abs_err
        )
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.mse_per_channel;
        writeln!(f, "mse_r={r:.4} mse_g={g:.4} mse_b={b:.4}")?;
        writeln!(f, "mse={:.4}", self.mse_combined)?;
        writeln!(f, "psnr={}", fmt_db(self.psnr_db))?;
        write!(f, "max_abs_err={}", self.max_abs_err)
    }
}
