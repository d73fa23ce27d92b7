//! The Deliberately Weak Cipher.
//!
//! A fixed, keyless core transform `CT` (AES S-box on bytes 0, 1 and 3, then
//! the AES MixColumns matrix applied to the single column) wrapped around a
//! per-block mask:
//!
//! ```text
//! C_i = CT(P_i ^ i ^ ((k ^ lsb(i)) << 24)),   i = 1..=n
//! ```
//!
//! Blocks are read as big-endian words, so the key only ever touches byte 0.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::algebra::{gf_inv, gf_mul, Block, GfByte};
use crate::imagekit::GrayImage;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DwcKey(pub u8);

impl fmt::Display for DwcKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}", self.0)
    }
}

impl FromStr for DwcKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<DwcKey> {
        let s = s.trim();
        if s.len() != 2 || !s.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidKey(format!(
                "DWC key must be 2 hex digits, got {s:?}"
            )));
        }
        Ok(DwcKey(u8::from_str_radix(s, 16).expect("validated hex")))
    }
}

/// AES S-box and its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBox {
    pub forward: [u8; 256],
    pub inverse: [u8; 256],
}

/// AES affine map over GF(2).
fn affine(b: u8) -> u8 {
    b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ 0x63
}

pub fn build_sbox() -> SBox {
    let mut forward = [0u8; 256];
    let mut inverse = [0u8; 256];
    for x in 0..=255u8 {
        let inv = gf_inv(GfByte(x)).map_or(0, |g| g.0);
        let s = affine(inv);
        forward[x as usize] = s;
        inverse[s as usize] = x;
    }
    SBox { forward, inverse }
}

/// Circulant 4x4 matrix over GF(2^8) given by its first row.
fn circulant(first_row: [u8; 4]) -> [[u8; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| first_row[(c + 4 - r) % 4]))
}

/// The MixColumns matrix `M` (rows rotate `02 03 01 01`) and its inverse
/// (`0e 0b 0d 09`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnMatrix {
    pub m: [[u8; 4]; 4],
    pub m_inv: [[u8; 4]; 4],
}

impl Default for ColumnMatrix {
    fn default() -> Self {
        ColumnMatrix {
            m: circulant([0x02, 0x03, 0x01, 0x01]),
            m_inv: circulant([0x0e, 0x0b, 0x0d, 0x09]),
        }
    }
}

/// Product of a GF(2^8) matrix and a column.
pub fn gf_mat_vec(m: &[[u8; 4]; 4], v: Block) -> Block {
    Block(std::array::from_fn(|r| {
        (0..4).fold(0u8, |acc, c| {
            acc ^ gf_mul(GfByte(m[r][c]), GfByte(v.0[c])).0
        })
    }))
}

/// Per-entry multiplication tables so the hot path is pure lookups.
struct MulTables([[[u8; 256]; 4]; 4]);

impl MulTables {
    fn new(m: &[[u8; 4]; 4]) -> MulTables {
        MulTables(std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                std::array::from_fn(|x| gf_mul(GfByte(m[r][c]), GfByte(x as u8)).0)
            })
        }))
    }

    #[inline]
    fn apply(&self, v: [u8; 4]) -> [u8; 4] {
        std::array::from_fn(|r| {
            let t = &self.0[r];
            t[0][v[0] as usize] ^ t[1][v[1] as usize] ^ t[2][v[2] as usize] ^ t[3][v[3] as usize]
        })
    }
}

struct CoreTransform {
    sbox: SBox,
    forward: MulTables,
    inverse: MulTables,
}

fn core() -> &'static CoreTransform {
    static CORE: OnceLock<CoreTransform> = OnceLock::new();
    CORE.get_or_init(|| {
        let matrix = ColumnMatrix::default();
        CoreTransform {
            sbox: build_sbox(),
            forward: MulTables::new(&matrix.m),
            inverse: MulTables::new(&matrix.m_inv),
        }
    })
}

/// `CT(P) = M (S(p0), S(p1), p2, S(p3))`.
pub fn ct(p: Block) -> Block {
    let t = core();
    let s = &t.sbox.forward;
    let [p0, p1, p2, p3] = p.0;
    Block(
        t.forward
            .apply([s[p0 as usize], s[p1 as usize], p2, s[p3 as usize]]),
    )
}

pub fn ct_inv(c: Block) -> Block {
    let t = core();
    let si = &t.sbox.inverse;
    let [u0, u1, u2, u3] = t.inverse.apply(c.0);
    Block([si[u0 as usize], si[u1 as usize], u2, si[u3 as usize]])
}

/// Mask word for the 1-based block counter `i`:
/// `i ^ ((k ^ lsb(i)) << 24)`.
#[inline]
pub fn counter_mask(i: u32, key: DwcKey) -> u32 {
    i ^ (((key.0 ^ i as u8) as u32) << 24)
}

/// 1-based counter of the block at 0-based position `index`.
#[inline]
pub(crate) fn counter(index: usize) -> u32 {
    (index as u32).wrapping_add(1)
}

pub fn dwc_encrypt(img: &GrayImage, key: DwcKey) -> Result<GrayImage> {
    img.map_blocks(|idx, p| {
        let i = counter(idx);
        ct(Block::from_word(p.to_word() ^ counter_mask(i, key)))
    })
}

pub fn dwc_decrypt(img: &GrayImage, key: DwcKey) -> Result<GrayImage> {
    img.map_blocks(|idx, c| {
        let i = counter(idx);
        Block::from_word(ct_inv(c).to_word() ^ counter_mask(i, key))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagekit::{blocks_of, noise_image};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// First row of the published AES S-box (FIPS-197, Figure 7).
    const SBOX_ROW_0: [u8; 16] = [
        0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab,
        0x76,
    ];

    /// Affine map written as the bitwise formula
    /// `b'_i = b_i ^ b_{i+4} ^ b_{i+5} ^ b_{i+6} ^ b_{i+7} ^ c_i`.
    fn affine_bitwise(b: u8) -> u8 {
        let bit = |i: usize| (b >> (i % 8)) & 1;
        (0..8).fold(0u8, |acc, i| {
            let v = bit(i) ^ bit(i + 4) ^ bit(i + 5) ^ bit(i + 6) ^ bit(i + 7) ^ (0x63 >> i & 1);
            acc | v << i
        })
    }

    fn sbox_by_search(x: u8) -> u8 {
        let inv = (0..=255u8)
            .find(|&y| gf_mul(GfByte(x), GfByte(y)) == GfByte::ONE)
            .unwrap_or(0);
        affine_bitwise(inv)
    }

    /// Scalar evaluation of CT straight from the definition.
    fn ct_reference(p: Block) -> Block {
        let s = |x: u8| sbox_by_search(x);
        let v = Block([s(p.0[0]), s(p.0[1]), p.0[2], s(p.0[3])]);
        gf_mat_vec(&ColumnMatrix::default().m, v)
    }

    #[test]
    fn sbox_matches_reference_construction() {
        let sbox = build_sbox();
        assert_eq!(sbox.forward[0x00], 0x63);
        assert_eq!(&sbox.forward[..16], &SBOX_ROW_0);
        assert_eq!(sbox.forward[0x53], 0xed);
        for x in 0..=255u8 {
            assert_eq!(sbox.forward[x as usize], sbox_by_search(x));
            assert_eq!(sbox.inverse[sbox.forward[x as usize] as usize], x);
        }
        let mut sorted = sbox.forward;
        sorted.sort_unstable();
        assert!(sorted.iter().enumerate().all(|(i, &v)| v as usize == i));
    }

    #[test]
    fn column_matrix_inverse() {
        let cm = ColumnMatrix::default();
        assert_eq!(cm.m[1], [0x01, 0x02, 0x03, 0x01]);
        for r in 0..4 {
            for c in 0..4 {
                let v = (0..4).fold(0u8, |acc, k| {
                    acc ^ gf_mul(GfByte(cm.m[r][k]), GfByte(cm.m_inv[k][c])).0
                });
                assert_eq!(v, (r == c) as u8);
            }
        }
        // FIPS-197 MixColumns test column
        assert_eq!(
            gf_mat_vec(&cm.m, Block([0xdb, 0x13, 0x53, 0x45])),
            Block([0x8e, 0x4d, 0xa1, 0xbc])
        );
    }

    #[test]
    fn ct_zero_block_fixture() {
        let expected = gf_mat_vec(&ColumnMatrix::default().m, Block([0x63, 0x63, 0x00, 0x63]));
        assert_eq!(ct(Block([0; 4])), expected);
        assert_eq!(ct(Block([0; 4])), CT_ZERO);
        assert_eq!(ct_inv(CT_ZERO), Block([0; 4]));
    }

    /// `M (63, 63, 00, 63)`, frozen from the run above.
    const CT_ZERO: Block = Block([0x00, 0xc6, 0xa5, 0x00]);

    #[test]
    fn ct_matches_reference_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = Block(rng.random());
            assert_eq!(ct(p), ct_reference(p));
            assert_eq!(ct_inv(ct(p)), p);
            assert_eq!(ct(ct_inv(p)), p);
        }
        for b2 in 0..=255u8 {
            let p = Block([7, 99, b2, 200]);
            assert_eq!(ct_inv(ct(p)), p);
        }
    }

    #[test]
    fn byte_two_bypasses_sbox() {
        let m = ColumnMatrix::default().m;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = Block(rng.random());
            let delta: u8 = rng.random();
            let mut q = p;
            q.0[2] ^= delta;
            let diff = Block::from_word(ct(p).to_word() ^ ct(q).to_word());
            assert_eq!(diff, gf_mat_vec(&m, Block([0, 0, delta, 0])));
        }
    }

    #[test]
    fn first_block_of_zero_image() {
        let img = GrayImage::filled(4, 4, 0);
        let ct_img = dwc_encrypt(&img, DwcKey(0)).unwrap();
        let first = blocks_of(&ct_img).unwrap()[0];
        assert_eq!(counter_mask(1, DwcKey(0)), 0x0100_0001);
        assert_eq!(first, ct(Block([0x01, 0, 0, 0x01])));
        assert_eq!(dwc_decrypt(&ct_img, DwcKey(0)).unwrap(), img);
    }

    #[test]
    fn round_trip_all_keys() {
        let img = noise_image(16, 16, 3);
        for k in 0..=255u8 {
            let c = dwc_encrypt(&img, DwcKey(k)).unwrap();
            assert_eq!(dwc_decrypt(&c, DwcKey(k)).unwrap(), img);
        }
    }

    #[test]
    fn counter_breaks_block_repetition() {
        let img = GrayImage::new(64, 64, [1, 2, 3, 4].repeat(1024)).unwrap();
        let blocks = blocks_of(&dwc_encrypt(&img, DwcKey(0x5a)).unwrap()).unwrap();
        let mut sorted = blocks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), blocks.len());
    }

    #[test]
    fn wrong_key_only_disturbs_byte_zero() {
        let img = noise_image(32, 32, 9);
        let c = dwc_encrypt(&img, DwcKey(0x3c)).unwrap();
        for wrong in [0x00u8, 0x3d, 0xff, 0x81] {
            let d = dwc_decrypt(&c, DwcKey(wrong)).unwrap();
            for (pb, db) in blocks_of(&img).unwrap().iter().zip(blocks_of(&d).unwrap()) {
                assert_eq!(db.0[0] ^ pb.0[0], 0x3c ^ wrong);
                assert_eq!(db.0[1..], pb.0[1..]);
            }
        }
    }

    #[test]
    fn counter_masks_are_distinct() {
        for k in [0u8, 0x77, 0xff] {
            let mut masks: Vec<u32> = (1..=16384).map(|i| counter_mask(i, DwcKey(k))).collect();
            masks.sort_unstable();
            masks.dedup();
            assert_eq!(masks.len(), 16384);
        }
    }

    #[test]
    fn rejects_unblockable_images() {
        let img = GrayImage::filled(3, 1, 0);
        assert!(matches!(
            dwc_encrypt(&img, DwcKey(1)),
            Err(Error::BadDimensions { .. })
        ));
        assert!(matches!(
            dwc_decrypt(&img, DwcKey(1)),
            Err(Error::BadDimensions { .. })
        ));
    }

    #[test]
    fn key_hex() {
        assert_eq!("a7".parse::<DwcKey>().unwrap(), DwcKey(0xa7));
        assert_eq!(DwcKey(0x0b).to_string(), "0b");
        assert!("a".parse::<DwcKey>().is_err());
        assert!("a7f".parse::<DwcKey>().is_err());
    }
}
