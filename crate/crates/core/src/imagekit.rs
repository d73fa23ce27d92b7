//! Grayscale raster, PGM codec, the block codec both ciphers share, and
//! generators for the test images (checkerboard, drawing, noise, photo).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Block;
use crate::{Error, Result};

/// Working size of every generated image.
pub const DEFAULT_SIZE: u32 = 256;

/// Background value of [`gen_drawing`].
pub const DRAWING_BACKGROUND: u8 = 255;

/// 8-bit grayscale image, pixels stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<GrayImage> {
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> GrayImage {
        GrayImage {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> GrayImage {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn same_dimensions(&self, other: &GrayImage) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    pub fn check_blockable(&self) -> Result<()> {
        if self.pixels.len().is_multiple_of(4) {
            Ok(())
        } else {
            Err(self.bad_dimensions())
        }
    }

    pub(crate) fn bad_dimensions(&self) -> Error {
        Error::BadDimensions {
            width: self.width,
            height: self.height,
        }
    }

    /// Applies `f(index, block)` to every block, `index` counting from 0 in
    /// canonical order.
    pub fn map_blocks(&self, mut f: impl FnMut(usize, Block) -> Block) -> Result<GrayImage> {
        self.check_blockable()?;
        let mut pixels = self.pixels.clone();
        for (i, chunk) in pixels.chunks_exact_mut(4).enumerate() {
            let block = Block([chunk[0], chunk[1], chunk[2], chunk[3]]);
            chunk.copy_from_slice(&f(i, block).0);
        }
        Ok(GrayImage { pixels, ..*self })
    }
}

/// Splits the image into 4-pixel blocks: row-major scanline order,
/// consecutive non-overlapping groups of four.
pub fn blocks_of(img: &GrayImage) -> Result<Vec<Block>> {
    img.check_blockable()?;
    Ok(img
        .pixels
        .chunks_exact(4)
        .map(|c| Block([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Inverse of [`blocks_of`].
pub fn unblocks(width: u32, height: u32, blocks: &[Block]) -> Result<GrayImage> {
    GrayImage::new(width, height, blocks.iter().flat_map(|b| b.0).collect())
}

/// Encodes as binary PGM (`P5`, maxval 255, no comments).
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        let data = self.data;
        let start = self.pos;
        while data
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!("bad {what}: {}", String::from_utf8_lossy(tok)))
            })
    }
}

/// Decodes binary (`P5`) or ASCII (`P2`) PGM with maxval 255.
pub fn read_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut cur = HeaderCursor { data, pos: 0 };
    let binary = match cur.token() {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(other) => {
            return Err(Error::MalformedHeader(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(Error::MalformedHeader("empty input".into())),
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let count = width as usize * height as usize;

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        match cur.data.get(cur.pos) {
            Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::TruncatedData),
        }
        cur.data
            .get(cur.pos..cur.pos + count)
            .ok_or(Error::TruncatedData)?
            .to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let tok = cur.token().ok_or(Error::TruncatedData)?;
            let value: u32 = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::MalformedHeader("bad ASCII pixel value".into()))?;
            if value > maxval {
                return Err(Error::MalformedHeader(format!(
                    "pixel value {value} exceeds maxval"
                )));
            }
            pixels.push(value as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Alternating 0/255 square cells over a 256x256 canvas, top-left black.
pub fn gen_checkerboard(cell: u32) -> Result<GrayImage> {
    if cell == 0 || !cell.is_multiple_of(4) || !DEFAULT_SIZE.is_multiple_of(cell) {
        return Err(Error::BadCellSize(cell));
    }
    Ok(GrayImage::from_fn(DEFAULT_SIZE, DEFAULT_SIZE, |x, y| {
        if (x / cell + y / cell).is_multiple_of(2) {
            0
        } else {
            255
        }
    }))
}

pub fn gen_constant(value: u8) -> GrayImage {
    GrayImage::filled(DEFAULT_SIZE, DEFAULT_SIZE, value)
}

/// Uniform random bytes from a ChaCha8 stream seeded with `seed`.
pub fn gen_noise(seed: u64) -> GrayImage {
    noise_image(DEFAULT_SIZE, DEFAULT_SIZE, seed)
}

pub fn noise_image(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = vec![0u8; width as usize * height as usize];
    rng.fill(&mut pixels[..]);
    GrayImage {
        width,
        height,
        pixels,
    }
}

/// Synthetic line drawing: white background, a few flat-filled rectangles
/// and ellipses plus one-pixel strokes, in three ink levels.
pub fn gen_drawing(seed: u64) -> GrayImage {
    const INKS: [u8; 3] = [0, 96, 176];
    let size = DEFAULT_SIZE as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut canvas = vec![DRAWING_BACKGROUND; (size * size) as usize];
    let put = |canvas: &mut Vec<u8>, x: i32, y: i32, v: u8| {
        if (0..size).contains(&x) && (0..size).contains(&y) {
            canvas[(y * size + x) as usize] = v;
        }
    };

    for _ in 0..3 {
        let (w, h) = (rng.random_range(16..40), rng.random_range(12..32));
        let (x0, y0) = (
            rng.random_range(8..size - w - 8),
            rng.random_range(8..size - h - 8),
        );
        let ink = INKS[rng.random_range(0..INKS.len())];
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                put(&mut canvas, x, y, ink);
            }
        }
    }

    for _ in 0..3 {
        let (rx, ry) = (rng.random_range(8..20), rng.random_range(8..20));
        let (cx, cy) = (
            rng.random_range(rx + 4..size - rx - 4),
            rng.random_range(ry + 4..size - ry - 4),
        );
        let ink = INKS[rng.random_range(0..INKS.len())];
        for y in cy - ry..=cy + ry {
            for x in cx - rx..=cx + rx {
                let (dx, dy) = ((x - cx) as f64 / rx as f64, (y - cy) as f64 / ry as f64);
                if dx * dx + dy * dy <= 1.0 {
                    put(&mut canvas, x, y, ink);
                }
            }
        }
    }

    // strokes: horizontal and vertical hairlines
    for i in 0..4 {
        let len = rng.random_range(40..120);
        let (x0, y0) = (
            rng.random_range(0..size - len),
            rng.random_range(0..size - len),
        );
        for t in 0..len {
            if i % 2 == 0 {
                put(&mut canvas, x0 + t, y0, INKS[0]);
            } else {
                put(&mut canvas, x0, y0 + t, INKS[0]);
            }
        }
    }

    GrayImage {
        width: DEFAULT_SIZE,
        height: DEFAULT_SIZE,
        pixels: canvas,
    }
}

/// Stand-in for a photograph: smooth low-frequency shading plus mild
/// per-pixel noise, mostly in the mid-gray range.
pub fn gen_photo(seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
    GrayImage::from_fn(DEFAULT_SIZE, DEFAULT_SIZE, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let shade = 128.0
            + 55.0 * (fx / 41.0 + phase[0]).sin() * (fy / 57.0 + phase[1]).cos()
            + 38.0 * ((fx + fy) / 97.0 + phase[2]).sin()
            + 0.12 * (fx - fy);
        let noisy = shade + rng.random_range(-6.0..6.0);
        noisy.round().clamp(0.0, 255.0) as u8
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::entropy;
    use proptest::prelude::*;

    #[test]
    fn default_image_has_16384_blocks() {
        let blocks = blocks_of(&gen_noise(1)).unwrap();
        assert_eq!(blocks.len(), 16384);
    }

    #[test]
    fn smallest_image_is_one_block() {
        let img = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(blocks_of(&img).unwrap(), vec![Block([1, 2, 3, 4])]);
    }

    #[test]
    fn unblockable_sizes_are_rejected() {
        let img = GrayImage::filled(3, 3, 0);
        assert_eq!(
            blocks_of(&img),
            Err(Error::BadDimensions {
                width: 3,
                height: 3
            })
        );
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn hand_written_p5_parses() {
        let mut data = b"P5 2 2 255\n".to_vec();
        data.extend_from_slice(&[0, 127, 128, 255]);
        let img = read_pgm(&data).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 127, 128, 255]);
    }

    #[test]
    fn p2_with_comments_matches_p5() {
        let p2 = b"P2\n# made by hand\n2 2\n# another\n255\n0 127\n128 255\n";
        let mut p5 = b"P5\n2 2\n255\n".to_vec();
        p5.extend_from_slice(&[0, 127, 128, 255]);
        assert_eq!(read_pgm(p2).unwrap(), read_pgm(&p5).unwrap());
    }

    #[test]
    fn pgm_errors() {
        assert_eq!(
            read_pgm(b"P5 2 2 65535\n\0\0\0\0\0\0\0\0"),
            Err(Error::UnsupportedMaxval(65535))
        );
        assert_eq!(read_pgm(b"P5 2 2 255\n\0\0\0"), Err(Error::TruncatedData));
        assert_eq!(read_pgm(b"P2 2 2 255\n1 2 3"), Err(Error::TruncatedData));
        assert!(matches!(
            read_pgm(b"P6 2 2 255\n"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pgm(b"P5 x 2 255\n"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(read_pgm(b""), Err(Error::MalformedHeader(_))));
        assert!(matches!(
            read_pgm(b"P2 1 1 255\n300"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn write_pgm_layout() {
        let img = GrayImage::new(2, 2, vec![9, 8, 7, 6]).unwrap();
        assert_eq!(write_pgm(&img), b"P5\n2 2\n255\n\x09\x08\x07\x06");
    }

    #[test]
    fn pgm_round_trip_random_256() {
        let img = gen_noise(99);
        assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn checkerboard_properties() {
        let board = gen_checkerboard(32).unwrap();
        assert_eq!(entropy(&board).unwrap(), 1.0);
        assert_eq!(board.get(0, 0), 0);
        assert_eq!(board.get(32, 0), 255);
        assert_eq!(board.get(32, 32), 0);
        for b in blocks_of(&board).unwrap() {
            assert!(b == Block::splat(0) || b == Block::splat(255));
        }
        for bad in [0, 6, 3, 24, 512] {
            assert_eq!(gen_checkerboard(bad), Err(Error::BadCellSize(bad)));
        }
        assert!(gen_checkerboard(4).is_ok());
    }

    #[test]
    fn drawing_is_mostly_background() {
        for seed in 0..20 {
            let img = gen_drawing(seed);
            let bg = img
                .pixels()
                .iter()
                .filter(|&&p| p == DRAWING_BACKGROUND)
                .count();
            assert!(
                bg * 10 >= img.len() * 9,
                "seed {seed}: {bg} background pixels"
            );
            assert!(entropy(&img).unwrap() < 2.0);
            let mut levels: Vec<u8> = img.pixels().to_vec();
            levels.sort_unstable();
            levels.dedup();
            assert!(levels.len() <= 4);
        }
        assert_eq!(gen_drawing(5), gen_drawing(5));
        assert_ne!(gen_drawing(5), gen_drawing(6));
    }

    #[test]
    fn noise_and_constant() {
        assert_eq!(entropy(&gen_constant(0)).unwrap(), 0.0);
        assert!(entropy(&gen_noise(3)).unwrap() >= 7.99);
        assert_eq!(gen_noise(3), gen_noise(3));
        assert_ne!(gen_noise(3), gen_noise(4));
    }

    #[test]
    fn photo_is_deterministic_and_smooth() {
        let img = gen_photo(8);
        assert_eq!(img, gen_photo(8));
        let mean_step: f64 = img
            .pixels()
            .windows(2)
            .map(|w| (w[0] as f64 - w[1] as f64).abs())
            .sum::<f64>()
            / (img.len() - 1) as f64;
        assert!(mean_step < 8.0, "mean neighbour step {mean_step}");
    }

    proptest! {
        #[test]
        fn blocks_round_trip(w in 1u32..24, h in 1u32..24, seed in any::<u64>()) {
            let w = w * 2;
            let h = h * 2;
            let img = noise_image(w, h, seed);
            let blocks = blocks_of(&img).unwrap();
            prop_assert_eq!(blocks.len() * 4, img.len());
            prop_assert_eq!(unblocks(w, h, &blocks).unwrap(), img);
        }

        #[test]
        fn pgm_round_trip(w in 1u32..40, h in 1u32..40, seed in any::<u64>()) {
            let img = noise_image(w, h, seed);
            prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
        }
    }
}
