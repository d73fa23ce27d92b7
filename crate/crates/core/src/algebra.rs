//! Byte algebra shared by both ciphers.
//!
//! Two unrelated structures live on the same 8-bit values:
//!
//! * `GF(2^8)` with the AES reduction polynomial `x^8 + x^4 + x^3 + x + 1`,
//!   used by the DWC S-box and column matrix;
//! * the ring `Z/256`, used by the Hill cipher and its known-plaintext solver.
//!
//! The newtypes [`GfByte`] and [`ModByte`] keep the two from being mixed up.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// Low byte of the AES polynomial (`0x11B` without the `x^8` term).
const AES_POLY_LOW: u8 = 0x1B;

/// An element of `GF(2^8)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GfByte(pub u8);

impl GfByte {
    pub const ZERO: GfByte = GfByte(0);
    pub const ONE: GfByte = GfByte(1);

    pub fn inv(self) -> Result<GfByte> {
        gf_inv(self)
    }
}

impl Add for GfByte {
    type Output = GfByte;
    fn add(self, rhs: GfByte) -> GfByte {
        gf_add(self, rhs)
    }
}

impl Mul for GfByte {
    type Output = GfByte;
    fn mul(self, rhs: GfByte) -> GfByte {
        gf_mul(self, rhs)
    }
}

pub fn gf_add(a: GfByte, b: GfByte) -> GfByte {
    GfByte(a.0 ^ b.0)
}

/// Multiplication by `x`, i.e. the AES `xtime`.
#[inline]
fn xtime(a: u8) -> u8 {
    (a << 1) ^ if a & 0x80 != 0 { AES_POLY_LOW } else { 0 }
}

/// Shift-and-add multiplication with interleaved reduction.
pub fn gf_mul(a: GfByte, b: GfByte) -> GfByte {
    let (mut a, mut b) = (a.0, b.0);
    let mut acc = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    GfByte(acc)
}

/// Inverse via `a^254` (the multiplicative group has order 255).
pub fn gf_inv(a: GfByte) -> Result<GfByte> {
    if a.0 == 0 {
        return Err(Error::ZeroInverse);
    }
    let mut result = GfByte::ONE;
    let mut base = a;
    let mut exp = 254u32;
    while exp > 0 {
        if exp & 1 == 1 {
            result = gf_mul(result, base);
        }
        base = gf_mul(base, base);
        exp >>= 1;
    }
    Ok(result)
}

/// An element of the ring `Z/256`. Arithmetic wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ModByte(pub u8);

impl ModByte {
    /// Odd bytes are exactly the units of `Z/256`.
    pub fn is_unit(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inv(self) -> Option<ModByte> {
        self.is_unit().then(|| ModByte(inv_mod256(self.0)))
    }
}

impl Add for ModByte {
    type Output = ModByte;
    fn add(self, rhs: ModByte) -> ModByte {
        ModByte(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for ModByte {
    type Output = ModByte;
    fn sub(self, rhs: ModByte) -> ModByte {
        ModByte(self.0.wrapping_sub(rhs.0))
    }
}

impl Mul for ModByte {
    type Output = ModByte;
    fn mul(self, rhs: ModByte) -> ModByte {
        ModByte(self.0.wrapping_mul(rhs.0))
    }
}

impl Neg for ModByte {
    type Output = ModByte;
    fn neg(self) -> ModByte {
        ModByte(self.0.wrapping_neg())
    }
}

/// Inverse of an odd byte by Newton iteration: each step doubles the number
/// of correct low bits, and `a * a = 1 mod 8` for odd `a` gives 3 to start.
fn inv_mod256(a: u8) -> u8 {
    debug_assert!(a & 1 == 1);
    let mut x = a;
    for _ in 0..2 {
        x = x.wrapping_mul(2u8.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}

/// A 4x1 column of bytes: the unit both ciphers encrypt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Block(pub [u8; 4]);

impl Block {
    pub const fn splat(v: u8) -> Block {
        Block([v; 4])
    }

    /// Big-endian word: byte 0 is the most significant.
    pub fn to_word(self) -> u32 {
        u32::from_be_bytes(self.0)
    }

    pub fn from_word(w: u32) -> Block {
        Block(w.to_be_bytes())
    }

    /// Componentwise sum mod 256.
    pub fn wrapping_add(self, rhs: Block) -> Block {
        Block(std::array::from_fn(|i| self.0[i].wrapping_add(rhs.0[i])))
    }

    pub fn to_hex(self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl serde::Serialize for Block {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl From<[u8; 4]> for Block {
    fn from(bytes: [u8; 4]) -> Block {
        Block(bytes)
    }
}

/// 2x2 matrix over `Z/256`, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub struct Mat2(pub [[u8; 2]; 2]);

/// 4x4 matrix over `Z/256`, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub struct Mat4(pub [[u8; 4]; 4]);

macro_rules! square_matrix {
    ($name:ident, $n:literal) => {
        impl $name {
            pub const ZERO: $name = $name([[0; $n]; $n]);

            pub fn identity() -> $name {
                let mut m = [[0; $n]; $n];
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = 1;
                }
                $name(m)
            }

            pub fn mul(&self, rhs: &$name) -> $name {
                let mut out = [[0u8; $n]; $n];
                for i in 0..$n {
                    for j in 0..$n {
                        let mut acc = 0u8;
                        for k in 0..$n {
                            acc = acc.wrapping_add(self.0[i][k].wrapping_mul(rhs.0[k][j]));
                        }
                        out[i][j] = acc;
                    }
                }
                $name(out)
            }

            pub fn add(&self, rhs: &$name) -> $name {
                $name(std::array::from_fn(|i| {
                    std::array::from_fn(|j| self.0[i][j].wrapping_add(rhs.0[i][j]))
                }))
            }

            pub fn sub(&self, rhs: &$name) -> $name {
                $name(std::array::from_fn(|i| {
                    std::array::from_fn(|j| self.0[i][j].wrapping_sub(rhs.0[i][j]))
                }))
            }

            pub fn neg(&self) -> $name {
                $name::ZERO.sub(self)
            }

            pub fn is_identity(&self) -> bool {
                *self == $name::identity()
            }
        }
    };
}

square_matrix!(Mat2, 2);
square_matrix!(Mat4, 4);

impl Mat2 {
    pub fn from_bytes(b: [u8; 4]) -> Mat2 {
        Mat2([[b[0], b[1]], [b[2], b[3]]])
    }

    /// `(k11, k12, k21, k22)`.
    pub fn to_bytes(self) -> [u8; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }
}

/// `m * v` with every multiply-accumulate reduced mod 256.
pub fn mat4_vec_mod256(m: &Mat4, v: Block) -> Block {
    Block(std::array::from_fn(|i| {
        m.0[i]
            .iter()
            .zip(v.0)
            .fold(0u8, |acc, (&a, x)| acc.wrapping_add(a.wrapping_mul(x)))
    }))
}

/// One equation `k*a + l*b = rhs (mod 256)` in the unknowns `(k, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearEq {
    pub a: ModByte,
    pub b: ModByte,
    pub rhs: ModByte,
}

impl LinearEq {
    pub fn new(a: u8, b: u8, rhs: u8) -> LinearEq {
        LinearEq {
            a: ModByte(a),
            b: ModByte(b),
            rhs: ModByte(rhs),
        }
    }

    pub fn holds(&self, k: ModByte, l: ModByte) -> bool {
        k * self.a + l * self.b == self.rhs
    }
}

/// Solves a system of two-unknown equations over `Z/256`.
///
/// Looks for the first equation pair whose determinant is odd (a unit), solves
/// that pair with the adjugate, then checks the remaining equations. With a
/// unit determinant the pair alone pins `(k, l)` uniquely.
pub fn solve_k_rows_mod256(eqs: &[LinearEq]) -> Result<(ModByte, ModByte)> {
    let pair = eqs.iter().enumerate().find_map(|(i, e1)| {
        eqs[i + 1..].iter().find_map(|e2| {
            let det = e1.a * e2.b - e2.a * e1.b;
            det.inv().map(|det_inv| (e1, e2, det_inv))
        })
    });
    let (e1, e2, det_inv) = pair.ok_or(Error::Underdetermined)?;

    let k = det_inv * (e2.b * e1.rhs - e1.b * e2.rhs);
    let l = det_inv * (e1.a * e2.rhs - e2.a * e1.rhs);
    if eqs.iter().all(|e| e.holds(k, l)) {
        Ok((k, l))
    } else {
        Err(Error::Inconsistent)
    }
}
