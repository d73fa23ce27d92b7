use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse in GF(2^8)")]
    ZeroInverse,
    #[error("linear system is underdetermined: no equation pair has an odd determinant")]
    Underdetermined,
    #[error("linear system is inconsistent")]
    Inconsistent,

    #[error("point ({x}, {y}) is not on the curve")]
    PointNotOnCurve { x: u64, y: u64 },
    #[error("public key is the point at infinity")]
    PublicKeyAtInfinity,
    #[error("shared point is the point at infinity")]
    DegenerateSharedPoint,
    #[error("derived point is the point at infinity (coordinate is 0 mod the group order)")]
    DegenerateDerivedPoint,
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),

    #[error("image of {width}x{height} pixels cannot be split into 4-byte blocks")]
    BadDimensions { width: u32, height: u32 },
    #[error("image has no pixels")]
    EmptyImage,
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("pixel buffer has {actual} bytes, expected {expected}")]
    PixelCount { expected: usize, actual: usize },
    #[error("checkerboard cell size {0} must divide 256 and be a multiple of 4")]
    BadCellSize(u32),

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PGM maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("PGM pixel data is truncated")]
    TruncatedData,

    #[error("invalid key encoding: {0}")]
    InvalidKey(String),
    #[error("invalid key mask: {0}")]
    InvalidMask(String),
    #[error("invalid sample line: {0}")]
    InvalidSample(String),
    #[error("known-plaintext attack needs at least one sample")]
    NoSamples,
    #[error("no key in the searched space maps the plaintext to the ciphertext")]
    NotFound,
}
