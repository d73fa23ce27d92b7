//! Cryptanalysis workbench for two image ciphers: ECCHC (elliptic-curve key
//! agreement feeding a self-invertible Hill cipher in ECB mode) and the
//! Deliberately Weak Cipher (DWC), a keyless AES-style core wrapped in an
//! 8-bit key and a block counter.
//!
//! Both ciphers encrypt 8-bit grayscale images as a row-major sequence of
//! 4-byte blocks (see [`imagekit::blocks_of`]). The [`metrics`] module holds
//! the entropy/PSNR/UACI suite and [`attacks`] breaks both schemes.

pub mod algebra;
pub mod attacks;
pub mod dwc;
pub mod ecchc;
pub mod ecgroup;
mod error;
pub mod imagekit;
pub mod metrics;
pub mod report;

pub use algebra::{Block, Mat2, Mat4};
pub use error::{Error, Result};
pub use imagekit::GrayImage;
