//! The ECCHC-vs-DWC comparison table: every sample image under both
//! ciphers, scored with entropy, PSNR and UACI.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dwc::{dwc_encrypt, DwcKey};
use crate::ecchc::{ecchc_encrypt, expand_key, HillKey};
use crate::ecgroup::{agree, CurveParams};
use crate::imagekit::{gen_checkerboard, gen_drawing, gen_photo, read_pgm};
use crate::metrics::{evaluate, ReportRow};
use crate::{GrayImage, Result};

pub const CHECKERBOARD_CELL: u32 = 32;

/// Standard photographs picked up from a fixtures directory when present.
pub const PHOTO_FIXTURES: [&str; 2] = ["lena", "baboon"];

pub type NamedImage = (String, GrayImage);

/// Keys used for one report run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportKeys {
    pub hill: HillKey,
    pub dwc: DwcKey,
}

/// The Hill key comes out of a key agreement on the demo curve; the DWC key
/// is one byte from a ChaCha8 stream on the same seed.
pub fn report_keys(seed: u64) -> Result<ReportKeys> {
    let agreement = agree(&CurveParams::DEMO, seed)?;
    let dwc = DwcKey(ChaCha8Rng::seed_from_u64(seed).random());
    Ok(ReportKeys {
        hill: expand_key(agreement.k_alice),
        dwc,
    })
}

/// Generated images: checkerboard, drawing and synthetic photo.
pub fn sample_images(seed: u64) -> Result<Vec<NamedImage>> {
    Ok(vec![
        ("checkerboard".into(), gen_checkerboard(CHECKERBOARD_CELL)?),
        ("drawing".into(), gen_drawing(seed)),
        ("photo".into(), gen_photo(seed)),
    ])
}

/// Loads `<dir>/<name>.pgm` for every known photo fixture. Missing files
/// produce a warning instead of an error; unreadable ones are errors.
pub fn load_photo_fixtures(dir: &Path) -> Result<(Vec<NamedImage>, Vec<String>)> {
    let mut images = Vec::new();
    let mut warnings = Vec::new();
    for name in PHOTO_FIXTURES {
        let path = dir.join(format!("{name}.pgm"));
        match std::fs::read(&path) {
            Ok(bytes) => images.push((name.to_string(), read_pgm(&bytes)?)),
            Err(_) => warnings.push(format!("fixture {} not found, row skipped", path.display())),
        }
    }
    Ok((images, warnings))
}

/// Rows in table order: every ECCHC row first, then every DWC row.
pub fn build_report(images: &[NamedImage], keys: &ReportKeys) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::with_capacity(2 * images.len());
    for (name, img) in images {
        rows.push(ReportRow {
            algorithm: "ECCHC".into(),
            image: name.clone(),
            metrics: evaluate(img, &ecchc_encrypt(img, &keys.hill)?)?,
        });
    }
    for (name, img) in images {
        rows.push(ReportRow {
            algorithm: "DWC".into(),
            image: name.clone(),
            metrics: evaluate(img, &dwc_encrypt(img, keys.dwc)?)?,
        });
    }
    Ok(rows)
}
