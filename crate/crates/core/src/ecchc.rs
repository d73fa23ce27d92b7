//! Symmetric half of ECCHC: a self-invertible 4x4 Hill cipher over `Z/256`
//! applied block by block in ECB mode.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{mat4_vec_mod256, Block, Mat2, Mat4};
use crate::imagekit::GrayImage;
use crate::{Error, Result};

/// The 2x2 key `K` together with its expansion
/// `K_m = [[K, I - K], [I + K, -K]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HillKey {
    pub k: Mat2,
    pub km: Mat4,
}

pub fn expand_key(k: Mat2) -> HillKey {
    let i = Mat2::identity();
    let quadrants = [[k, i.sub(&k)], [i.add(&k), k.neg()]];
    let mut km = [[0u8; 4]; 4];
    for (r, row) in km.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = quadrants[r / 2][c / 2].0[r % 2][c % 2];
        }
    }
    HillKey { k, km: Mat4(km) }
}

impl HillKey {
    pub fn from_bytes(bytes: [u8; 4]) -> HillKey {
        expand_key(Mat2::from_bytes(bytes))
    }

    /// The effective key: `(k11, k12, k21, k22)`.
    pub fn to_bytes(&self) -> [u8; 4] {
        self.k.to_bytes()
    }

    pub fn encrypt_block(&self, p: Block) -> Block {
        mat4_vec_mod256(&self.km, p)
    }
}

/// Eight lowercase hex digits, `k11 k12 k21 k22`.
impl fmt::Display for HillKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for HillKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for HillKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<HillKey> {
        let s = s.trim();
        if s.len() != 8 || !s.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidKey(format!(
                "Hill key must be 8 hex digits, got {s:?}"
            )));
        }
        let word = u32::from_str_radix(s, 16).expect("validated hex");
        Ok(HillKey::from_bytes(word.to_be_bytes()))
    }
}

fn check_dimensions(img: &GrayImage) -> Result<()> {
    if !img.width().is_multiple_of(2)
        || !img.height().is_multiple_of(2)
        || !img.len().is_multiple_of(4)
    {
        return Err(img.bad_dimensions());
    }
    Ok(())
}

/// `C_i = K_m P_i` for every block in canonical order.
pub fn ecchc_encrypt(img: &GrayImage, key: &HillKey) -> Result<GrayImage> {
    check_dimensions(img)?;
    img.map_blocks(|_, p| key.encrypt_block(p))
}

/// Same map as encryption, since `K_m^2 = I`.
pub fn ecchc_decrypt(img: &GrayImage, key: &HillKey) -> Result<GrayImage> {
    ecchc_encrypt(img, key)
}
