//! Attacks on both ciphers.
//!
//! ECCHC: known-plaintext key recovery, masked brute force over the 32-bit
//! effective key, fixed-point census and ECB repetition scan.
//! DWC: 256-key brute force with a plaintext plausibility score, and
//! ciphertext-only recovery of three bytes out of every four.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{solve_k_rows_mod256, Block, LinearEq};
use crate::dwc::{dwc_decrypt, DwcKey};
use crate::ecchc::HillKey;
use crate::imagekit::{blocks_of, GrayImage};
use crate::{Error, Result};

/// A known plaintext/ciphertext block pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KpaSample {
    pub plaintext: Block,
    pub ciphertext: Block,
}

/// One line of a sample file: 16 hex digits, plaintext then ciphertext.
impl FromStr for KpaSample {
    type Err = Error;

    fn from_str(s: &str) -> Result<KpaSample> {
        let s = s.trim();
        if s.len() != 16 || !s.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidSample(format!(
                "expected 16 hex digits, got {s:?}"
            )));
        }
        let word = u64::from_str_radix(s, 16).expect("validated hex");
        Ok(KpaSample {
            plaintext: Block::from_word((word >> 32) as u32),
            ciphertext: Block::from_word(word as u32),
        })
    }
}

impl fmt::Display for KpaSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.plaintext, self.ciphertext)
    }
}

/// Parses a sample file, one pair per line; blank lines and `#` comments
/// are skipped.
pub fn parse_kpa_samples(text: &str) -> Result<Vec<KpaSample>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackStatus {
    Unique,
    Ambiguous,
    Inconsistent,
}

/// Result of a key search against ECCHC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackOutcome {
    pub status: AttackStatus,
    /// Present iff `status` is [`AttackStatus::Unique`].
    pub recovered_key: Option<HillKey>,
    pub candidates_tested: u64,
    pub elapsed: Duration,
}

impl AttackOutcome {
    fn new(status: AttackStatus, key: Option<HillKey>, tested: u64, start: Instant) -> Self {
        debug_assert_eq!(key.is_some(), status == AttackStatus::Unique);
        AttackOutcome {
            status,
            recovered_key: key,
            candidates_tested: tested,
            elapsed: start.elapsed(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "key": self.recovered_key.map(|k| k.to_string()),
            "candidates_tested": self.candidates_tested,
            "elapsed_ms": self.elapsed.as_secs_f64() * 1e3,
        })
    }
}

/// Recovers `K` from known block pairs.
///
/// With `a = p0 - p2`, `b = p1 - p3` every pair gives
/// `k11 a + k12 b = c0 - p2` and `k21 a + k22 b = c1 - p3`. The other two
/// rows of `K_m` repeat the same combination (`c2 - p0 = c0 - p2`), so one
/// block carries only two equations per key row and a single sample can
/// never pin `K` down.
pub fn kpa_recover_hill_key(samples: &[KpaSample]) -> Result<AttackOutcome> {
    let start = Instant::now();
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut top = Vec::with_capacity(samples.len());
    let mut bottom = Vec::with_capacity(samples.len());
    for s in samples {
        let [p0, p1, p2, p3] = s.plaintext.0;
        let [c0, c1, c2, c3] = s.ciphertext.0;
        let (a, b) = (p0.wrapping_sub(p2), p1.wrapping_sub(p3));
        if c0.wrapping_sub(p2) != c2.wrapping_sub(p0) || c1.wrapping_sub(p3) != c3.wrapping_sub(p1)
        {
            return Ok(AttackOutcome::new(
                AttackStatus::Inconsistent,
                None,
                0,
                start,
            ));
        }
        top.push(LinearEq::new(a, b, c0.wrapping_sub(p2)));
        bottom.push(LinearEq::new(a, b, c1.wrapping_sub(p3)));
    }

    let solved = solve_k_rows_mod256(&top).and_then(|r1| Ok((r1, solve_k_rows_mod256(&bottom)?)));
    let ((k11, k12), (k21, k22)) = match solved {
        Ok(rows) => rows,
        Err(Error::Underdetermined) => {
            return Ok(AttackOutcome::new(AttackStatus::Ambiguous, None, 0, start))
        }
        Err(Error::Inconsistent) => {
            return Ok(AttackOutcome::new(
                AttackStatus::Inconsistent,
                None,
                0,
                start,
            ))
        }
        Err(e) => return Err(e),
    };
    let key = HillKey::from_bytes([k11.0, k12.0, k21.0, k22.0]);
    let status = if samples
        .iter()
        .all(|s| key.encrypt_block(s.plaintext) == s.ciphertext)
    {
        AttackStatus::Unique
    } else {
        AttackStatus::Inconsistent
    };
    let key = (status == AttackStatus::Unique).then_some(key);
    Ok(AttackOutcome::new(status, key, 1, start))
}

/// Success counts of repeated known-plaintext trials under random keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KpaStats {
    pub trials: u32,
    pub samples_per_trial: usize,
    pub unique: u32,
    pub ambiguous: u32,
    pub inconsistent: u32,
    /// Unique outcomes whose key differed from the planted one.
    pub wrong_key: u32,
}

/// Runs `trials` attacks, each on `samples_per_trial` random blocks
/// encrypted under a fresh random key.
pub fn measure_kpa(trials: u32, samples_per_trial: usize, seed: u64) -> KpaStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = KpaStats {
        trials,
        samples_per_trial,
        unique: 0,
        ambiguous: 0,
        inconsistent: 0,
        wrong_key: 0,
    };
    for _ in 0..trials {
        let key = HillKey::from_bytes(rng.random());
        let samples: Vec<KpaSample> = (0..samples_per_trial)
            .map(|_| {
                let plaintext = Block(rng.random());
                KpaSample {
                    plaintext,
                    ciphertext: key.encrypt_block(plaintext),
                }
            })
            .collect();
        let outcome = kpa_recover_hill_key(&samples).expect("non-empty sample set");
        match outcome.status {
            AttackStatus::Unique => {
                stats.unique += 1;
                if outcome.recovered_key != Some(key) {
                    stats.wrong_key += 1;
                }
            }
            AttackStatus::Ambiguous => stats.ambiguous += 1,
            AttackStatus::Inconsistent => stats.inconsistent += 1,
        }
    }
    stats
}

/// Which bytes of `(k11, k12, k21, k22)` are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyMask(pub [Option<u8>; 4]);

impl KeyMask {
    pub const ALL_UNKNOWN: KeyMask = KeyMask([None; 4]);

    pub fn unknown_bytes(&self) -> u32 {
        self.0.iter().filter(|b| b.is_none()).count() as u32
    }

    pub fn search_space(&self) -> u64 {
        1u64 << (8 * self.unknown_bytes())
    }

    /// The `index`-th candidate: unknown bytes filled with the big-endian
    /// digits of `index`, so increasing indices are lexicographically
    /// increasing keys.
    pub fn candidate(&self, index: u64) -> [u8; 4] {
        let mut shift = 8 * self.unknown_bytes();
        self.0.map(|b| {
            b.unwrap_or_else(|| {
                shift -= 8;
                (index >> shift) as u8
            })
        })
    }
}

/// Eight characters, a hex byte pair or `??` per key byte, e.g. `1f??3a??`.
impl FromStr for KeyMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<KeyMask> {
        let s = s.trim();
        if s.len() != 8 || !s.is_ascii() {
            return Err(Error::InvalidMask(format!(
                "expected 8 characters, got {s:?}"
            )));
        }
        let mut out = [None; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let pair = &s[2 * i..2 * i + 2];
            if pair == "??" {
                continue;
            }
            if !pair.bytes().all(|c| c.is_ascii_hexdigit()) {
                return Err(Error::InvalidMask(format!("bad byte {pair:?}")));
            }
            *slot = Some(u8::from_str_radix(pair, 16).expect("validated hex"));
        }
        Ok(KeyMask(out))
    }
}

impl fmt::Display for KeyMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            match b {
                Some(v) => write!(f, "{v:02x}")?,
                None => f.write_str("??")?,
            }
        }
        Ok(())
    }
}

/// Keys tested per round of the Hill search; the search stops after the
/// first round that brings the match count to two.
const SEARCH_CHUNK: u64 = 1 << 16;

/// Enumerates every key allowed by `mask` and keeps those mapping `plain`
/// to `cipher`.
///
/// The key space is walked in increasing order in chunks, each chunk split
/// across threads. Once two matches are known the answer is `Ambiguous`
/// and the search stops; a single match over the whole space is `Unique`.
/// With all four bytes unknown this is the full 2^32 search.
pub fn brute_force_hill(
    plain: &GrayImage,
    cipher: &GrayImage,
    mask: &KeyMask,
) -> Result<AttackOutcome> {
    let start = Instant::now();
    plain.same_dimensions(cipher)?;
    let pb = blocks_of(plain)?;
    let cb = blocks_of(cipher)?;

    let mut known: HashMap<Block, Block> = HashMap::new();
    for (&p, &c) in pb.iter().zip(&cb) {
        if *known.entry(p).or_insert(c) != c {
            // ECB is deterministic, so no key maps one block two ways
            return Err(Error::NotFound);
        }
    }
    let mut pairs = Vec::with_capacity(known.len());
    for (p, c) in known {
        let diagonal = p.0.iter().all(|&v| v == p.0[0]);
        match (diagonal, p == c) {
            (true, true) => {}
            (true, false) => return Err(Error::NotFound),
            (false, _) => pairs.push((p, c)),
        }
    }
    pairs.sort_unstable();

    let matches_key = |bytes: [u8; 4]| {
        let key = HillKey::from_bytes(bytes);
        pairs.iter().all(|&(p, c)| key.encrypt_block(p) == c)
    };

    let space = mask.search_space();
    let mut found: Vec<[u8; 4]> = Vec::new();
    let mut tested = 0u64;
    let mut lo = 0u64;
    while lo < space && found.len() < 2 {
        let hi = (lo + SEARCH_CHUNK).min(space);
        let chunk: Vec<[u8; 4]> = (lo..hi)
            .into_par_iter()
            .map(|i| mask.candidate(i))
            .filter(|&k| matches_key(k))
            .collect();
        found.extend(chunk);
        tested += hi - lo;
        lo = hi;
    }

    match found.len() {
        0 => Err(Error::NotFound),
        1 => Ok(AttackOutcome::new(
            AttackStatus::Unique,
            Some(HillKey::from_bytes(found[0])),
            tested,
            start,
        )),
        _ => Ok(AttackOutcome::new(
            AttackStatus::Ambiguous,
            None,
            tested,
            start,
        )),
    }
}

/// Tolerance of [`smoothness_score`], in gray levels.
pub const SMOOTHNESS_TOLERANCE: u8 = 16;

fn median3(a: u8, b: u8, c: u8) -> u8 {
    a.max(b).min(a.min(b).max(c))
}

/// Default recognizer for natural images: counts blocks whose byte 0 lies
/// within [`SMOOTHNESS_TOLERANCE`] of the median of bytes 1..=3.
///
/// The fractional part breaks ties by total absolute deviation (smaller is
/// better); it stays below 1 so it never outweighs a single hit.
pub fn smoothness_score(img: &GrayImage) -> f64 {
    let mut hits = 0u64;
    let mut deviation = 0u64;
    let mut blocks = 0u64;
    for b in img.pixels().chunks_exact(4) {
        let d = b[0].abs_diff(median3(b[1], b[2], b[3]));
        hits += (d <= SMOOTHNESS_TOLERANCE) as u64;
        deviation += d as u64;
        blocks += 1;
    }
    hits as f64 - deviation as f64 / (255.0 * blocks as f64 + 1.0)
}

/// Decrypts under all 256 keys and ranks the keys by `predicate`, a
/// plausibility score for candidate plaintexts (higher is better). Best
/// first, ties by key value.
///
/// The key only touches byte 0 of each block, so the keyless part of the
/// decryption is done once and each candidate is a byte-0 XOR of it.
pub fn brute_force_dwc<F>(cipher: &GrayImage, predicate: F) -> Result<Vec<(DwcKey, f64)>>
where
    F: Fn(&GrayImage) -> f64 + Sync,
{
    let base = dwc_partial_recover(cipher)?.image;
    let mut ranked: Vec<(DwcKey, f64)> = (0..=255u8)
        .into_par_iter()
        .map(|k| {
            let mut px = base.pixels().to_vec();
            for b in px.chunks_exact_mut(4) {
                b[0] ^= k;
            }
            let candidate = GrayImage::new(base.width(), base.height(), px).expect("same size");
            (DwcKey(k), predicate(&candidate))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Ciphertext-only output of [`dwc_partial_recover`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialRecovery {
    /// Bytes 1..=3 of every block are exact plaintext; byte 0 is
    /// plaintext XOR the unknown key.
    pub image: GrayImage,
    /// Per pixel: true where the byte is exact plaintext.
    pub recovered: Vec<bool>,
}

impl PartialRecovery {
    pub fn recovered_fraction(&self) -> f64 {
        self.recovered.iter().filter(|&&r| r).count() as f64 / self.recovered.len().max(1) as f64
    }

    /// Run-length encoding of the mask: `<len>R` for recovered runs,
    /// `<len>U` for unknown ones, e.g. `1U3R1U3R`.
    pub fn mask_rle(&self) -> String {
        let mut out = String::new();
        let mut iter = self.recovered.iter().peekable();
        while let Some(&flag) = iter.next() {
            let mut len = 1;
            while iter.next_if(|&&f| f == flag).is_some() {
                len += 1;
            }
            out.push_str(&len.to_string());
            out.push(if flag { 'R' } else { 'U' });
        }
        out
    }
}

/// Strips the keyless core transform and the known counter from every
/// block. Equivalent to decrypting with key 0.
pub fn dwc_partial_recover(cipher: &GrayImage) -> Result<PartialRecovery> {
    let image = dwc_decrypt(cipher, DwcKey(0))?;
    let recovered = (0..image.len()).map(|i| i % 4 != 0).collect();
    Ok(PartialRecovery { image, recovered })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedPointCensus {
    /// Number of `(p, p, p, p)` blocks mapped to themselves (always 256).
    pub diagonal_fixed: u32,
    /// Random non-diagonal blocks examined.
    pub sampled: u64,
    /// Fixed points among the sampled blocks, deduplicated and sorted.
    pub extra_fixed: Vec<Block>,
}

/// Checks the 256 diagonal blocks and a seeded random sample of other
/// blocks for fixed points of `K_m`.
pub fn fixed_point_census(key: &HillKey, samples: u64, seed: u64) -> FixedPointCensus {
    let diagonal_fixed = (0..=255u8)
        .filter(|&p| key.encrypt_block(Block::splat(p)) == Block::splat(p))
        .count() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = Vec::new();
    let mut sampled = 0;
    while sampled < samples {
        let b = Block(rng.random());
        if b.0.iter().all(|&v| v == b.0[0]) {
            continue;
        }
        sampled += 1;
        if key.encrypt_block(b) == b {
            extra.push(b);
        }
    }
    extra.sort_unstable();
    extra.dedup();
    FixedPointCensus {
        diagonal_fixed,
        sampled,
        extra_fixed: extra,
    }
}

/// Block repetition statistics of a ciphertext.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EcbScan {
    pub blocks: usize,
    pub distinct: usize,
    /// Size of the largest class of equal blocks.
    pub largest_class: usize,
    /// Value of that class (smallest such block on ties).
    pub largest_block: Option<Block>,
    /// Number of blocks that repeat an earlier block.
    pub repeated: usize,
}

pub fn ecb_repeat_detector(cipher: &GrayImage) -> Result<EcbScan> {
    let blocks = blocks_of(cipher)?;
    let mut counts: HashMap<Block, usize> = HashMap::new();
    for b in &blocks {
        *counts.entry(*b).or_default() += 1;
    }
    let largest = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&b, &n)| (b, n));
    Ok(EcbScan {
        blocks: blocks.len(),
        distinct: counts.len(),
        largest_class: largest.map_or(0, |l| l.1),
        largest_block: largest.map(|l| l.0),
        repeated: blocks.len() - counts.len(),
    })
}
