//! Entropy, MSE/PSNR and UACI over 8-bit grayscale images.
//!
//! Sums are accumulated in integers; floating point only enters at the final
//! division or logarithm, so results are identical across platforms.

use serde::Serialize;
use serde_json::{json, Value};

use crate::imagekit::GrayImage;
use crate::{Error, Result};

/// Shannon entropy of the pixel histogram, in bits.
pub fn entropy(img: &GrayImage) -> Result<f64> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    let n = img.len() as f64;
    let h = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    // a single occupied bin would otherwise print as -0
    Ok(h.max(0.0))
}

fn diff_sums(a: &GrayImage, b: &GrayImage) -> Result<(u64, u64)> {
    a.same_dimensions(b)?;
    if a.is_empty() {
        return Err(Error::EmptyImage);
    }
    Ok(a.pixels()
        .iter()
        .zip(b.pixels())
        .fold((0u64, 0u64), |(abs, sq), (&x, &y)| {
            let d = (x as i64 - y as i64).unsigned_abs();
            (abs + d, sq + d * d)
        }))
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let (_, sq) = diff_sums(a, b)?;
    Ok(sq as f64 / a.len() as f64)
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (255.0 / mse.sqrt()).log10()
    }
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    mse(a, b).map(psnr_from_mse)
}

/// Mean absolute difference over 255, as a percentage.
pub fn uaci(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let (abs, _) = diff_sums(a, b)?;
    Ok(100.0 * abs as f64 / (255.0 * a.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Entropy of the second (cipher) image.
    pub entropy_bits: f64,
    pub psnr_db: f64,
    pub uaci_percent: f64,
    pub mse: f64,
}

/// Entropy of the ciphertext plus PSNR and UACI between the two images.
pub fn evaluate(plain: &GrayImage, cipher: &GrayImage) -> Result<MetricsReport> {
    let (abs, sq) = diff_sums(plain, cipher)?;
    let n = plain.len() as f64;
    let mse = sq as f64 / n;
    Ok(MetricsReport {
        entropy_bits: entropy(cipher)?,
        psnr_db: psnr_from_mse(mse),
        uaci_percent: 100.0 * abs as f64 / (255.0 * n),
        mse,
    })
}

/// Closed-form expectations for a black image against uniform noise and
/// for two independent noise images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceExpectations {
    pub mse_black_random: f64,
    pub psnr_black_random: f64,
    pub psnr_random_random: f64,
    pub uaci_black_random: f64,
    /// The usual closed form `1/3 + 1/(3 * 255)`, as a percentage.
    pub uaci_random_random: f64,
    /// Exact `E|X - Y| / 255` for independent uniform bytes,
    /// `257 / 768`; about 6e-4 percentage points below the closed form.
    pub uaci_random_random_exact: f64,
}

/// Expectations under the uniform distribution on `0..=255`, evaluated
/// from integer sums rather than stored as literals.
pub fn reference_expectations() -> ReferenceExpectations {
    let values = 0u64..256;
    // E[X^2] for a black image: sum i^2 / 256
    let sum_sq: u64 = values.clone().map(|i| i * i).sum();
    let mse_black_random = sum_sq as f64 / 256.0;
    // Var(X) = (256^2 - 1) / 12; E[(X - Y)^2] = 2 Var(X)
    let mse_random_random = 2.0 * (256.0 * 256.0 - 1.0) / 12.0;
    let sum: u64 = values.clone().sum();
    // E|X - Y| = sum_{i,j} |i - j| / 256^2 = (256^2 - 1) / (3 * 256)
    let abs_pairs: u64 = values
        .clone()
        .flat_map(|i| (0u64..256).map(move |j| i.abs_diff(j)))
        .sum();
    ReferenceExpectations {
        mse_black_random,
        psnr_black_random: psnr_from_mse(mse_black_random),
        psnr_random_random: psnr_from_mse(mse_random_random),
        uaci_black_random: 100.0 * (sum as f64 / 256.0) / 255.0,
        uaci_random_random: 100.0 * (1.0 / 3.0 + 1.0 / (3.0 * 255.0)),
        uaci_random_random_exact: 100.0 * (abs_pairs as f64 / 65536.0) / 255.0,
    }
}

/// Four decimals, or `inf`.
pub fn format_metric(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

/// One (algorithm, image) row of the cipher comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub algorithm: String,
    pub image: String,
    pub metrics: MetricsReport,
}

impl ReportRow {
    pub const CSV_HEADER: &'static str = "algorithm,image,entropy,psnr,uaci_percent";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.algorithm,
            self.image,
            format_metric(self.metrics.entropy_bits),
            format_metric(self.metrics.psnr_db),
            format_metric(self.metrics.uaci_percent),
        )
    }

    /// Finite values become numbers rounded to four decimals; infinite PSNR
    /// becomes the string `"inf"`.
    pub fn to_json(&self) -> Value {
        let num = |v: f64| -> Value {
            if v.is_finite() {
                json!(format_metric(v).parse::<f64>().expect("formatted float"))
            } else {
                json!("inf")
            }
        };
        json!({
            "algorithm": self.algorithm,
            "image": self.image,
            "entropy": num(self.metrics.entropy_bits),
            "psnr": num(self.metrics.psnr_db),
            "uaci_percent": num(self.metrics.uaci_percent),
        })
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(ReportRow::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}
