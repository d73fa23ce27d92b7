//! Acceptance suite: one test per criterion, each printing a single
//! `[PASS]` / `[FAIL]` line. The lines bypass output capture.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use cipher_autopsy::attacks::{
    brute_force_dwc, brute_force_hill, dwc_partial_recover, ecb_repeat_detector,
    kpa_recover_hill_key, measure_kpa, smoothness_score, AttackStatus, KeyMask, KpaSample,
};
use cipher_autopsy::dwc::{dwc_encrypt, DwcKey};
use cipher_autopsy::ecchc::{ecchc_encrypt, expand_key, HillKey};
use cipher_autopsy::ecgroup::{agree, CurveParams};
use cipher_autopsy::imagekit::{gen_checkerboard, gen_constant, gen_drawing, gen_noise, gen_photo};
use cipher_autopsy::metrics::{
    entropy, evaluate, format_metric, psnr, reference_expectations, uaci,
};
use cipher_autopsy::report::{
    build_report, load_photo_fixtures, report_keys, sample_images, CHECKERBOARD_CELL,
};
use cipher_autopsy::{Block, GrayImage, Mat2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONE_SECOND: Duration = Duration::from_secs(1);

fn verdict(n: u32, title: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    // Direct stdout write: bypasses the harness capture so the line also
    // shows up in a plain `cargo test` run.
    let line = format!("[{tag}] criterion {n:>2}: {title} -- {detail}\n");
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {n} failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn checkerboard() -> GrayImage {
    gen_checkerboard(CHECKERBOARD_CELL).unwrap()
}

#[test]
fn criterion_01_self_invertibility() {
    let mut r = rng(101);
    let start = Instant::now();
    let failures = (0..10_000)
        .filter(|_| {
            let km = expand_key(Mat2::from_bytes(r.random())).km;
            !km.mul(&km).is_identity()
        })
        .count();
    let elapsed = start.elapsed();
    verdict(
        1,
        "K_m * K_m = I for 10000 random keys",
        failures == 0 && elapsed < ONE_SECOND,
        format!("{failures} failures in {elapsed:?}"),
    );
}

#[test]
fn criterion_02_diagonal_fixed_points() {
    let mut r = rng(102);
    let mut failures = 0;
    for _ in 0..100 {
        let key = HillKey::from_bytes(r.random());
        failures += (0..=255u8)
            .filter(|&p| key.encrypt_block(Block::splat(p)) != Block::splat(p))
            .count();
    }
    verdict(
        2,
        "all 256 diagonal blocks fixed under 100 keys",
        failures == 0,
        format!("{failures} of 25600 blocks moved"),
    );
}

#[test]
fn criterion_03_checkerboard_invariance() {
    let board = checkerboard();
    let mut r = rng(103);
    let changed = (0..100)
        .filter(|_| ecchc_encrypt(&board, &HillKey::from_bytes(r.random())).unwrap() != board)
        .count();
    let rows = build_report(
        &[("checkerboard".into(), board)],
        &report_keys(103).unwrap(),
    )
    .unwrap();
    let row = rows
        .iter()
        .find(|r| r.algorithm == "ECCHC")
        .unwrap()
        .to_csv();
    verdict(
        3,
        "ECCHC leaves the checkerboard unchanged",
        changed == 0 && row == "ECCHC,checkerboard,1.0000,inf,0.0000",
        format!("{changed} of 100 keys changed it; row {row}"),
    );
}

#[test]
fn criterion_04_statistical_constants() {
    let black = gen_constant(0);
    let (n1, n2) = (gen_noise(104), gen_noise(1104));
    let measured = [
        psnr(&black, &n1).unwrap(),
        psnr(&n1, &n2).unwrap(),
        uaci(&black, &n1).unwrap(),
        uaci(&n1, &n2).unwrap(),
    ];
    let expected = [4.7627, 7.7476, 50.0, 33.4641];
    let tolerance = [0.05, 0.05, 0.5, 0.5];
    let within = (0..4).all(|i| (measured[i] - expected[i]).abs() <= tolerance[i]);

    let r = reference_expectations();
    let closed = [
        r.psnr_black_random,
        r.psnr_random_random,
        r.uaci_black_random,
        r.uaci_random_random,
    ];
    let closed_ok = closed
        .iter()
        .zip(expected)
        .all(|(c, e)| format!("{c:.4}") == format!("{e:.4}"));
    verdict(
        4,
        "noise PSNR/UACI match the closed-form constants",
        within && closed_ok,
        format!(
            "measured {:?}, closed form {:?}",
            measured.map(format_metric),
            closed.map(format_metric)
        ),
    );
}

#[test]
fn criterion_05_dwc_checkerboard_row() {
    let board = checkerboard();
    let seeds = 0..12u64;
    let mut sums = [0.0; 3];
    let mut slowest = Duration::ZERO;
    for seed in seeds.clone() {
        let key = report_keys(seed).unwrap().dwc;
        let start = Instant::now();
        let ct = dwc_encrypt(&board, key).unwrap();
        slowest = slowest.max(start.elapsed());
        let m = evaluate(&board, &ct).unwrap();
        sums[0] += m.entropy_bits;
        sums[1] += m.psnr_db;
        sums[2] += m.uaci_percent;
    }
    let n = seeds.count() as f64;
    let [h, p, u] = sums.map(|s| s / n);
    verdict(
        5,
        "DWC checkerboard entropy/PSNR/UACI",
        h >= 7.99 && (p - 4.7623).abs() <= 0.10 && (u - 50.0049).abs() <= 0.5 && slowest < ONE_SECOND,
        format!(
            "mean over {n} keys: entropy {h:.4}, PSNR {p:.4}, UACI {u:.4}; slowest encryption {slowest:?}"
        ),
    );
}

#[test]
fn criterion_06_photo_rows() {
    let mut details = Vec::new();
    let mut ok = true;
    for seed in [0u64, 1, 2] {
        let images = vec![("photo".to_string(), gen_photo(seed))];
        for row in build_report(&images, &report_keys(seed).unwrap()).unwrap() {
            let m = row.metrics;
            ok &= m.entropy_bits >= 7.98 && (m.uaci_percent - 28.0).abs() <= 3.0;
            details.push(format!(
                "{}/{}: H {:.4} U {:.4}",
                row.algorithm, seed, m.entropy_bits, m.uaci_percent
            ));
        }
    }

    // Standard photographs, only when supplied: DWC entropy is asserted,
    // PSNR and UACI deltas are only reported.
    let table = [
        ("lena", 7.9974, 9.4180, 28.1236),
        ("baboon", 7.9971, 9.5001, 27.8896),
    ];
    match std::env::var_os("CIPHER_AUTOPSY_FIXTURES").map(PathBuf::from) {
        Some(dir) => {
            let (images, warnings) = load_photo_fixtures(&dir).unwrap();
            details.extend(warnings);
            let rows = build_report(&images, &report_keys(0).unwrap()).unwrap();
            for row in rows.iter().filter(|r| r.algorithm == "DWC") {
                let &(_, h, p, u) = table.iter().find(|t| t.0 == row.image).unwrap();
                let m = row.metrics;
                ok &= (m.entropy_bits - h).abs() <= 0.005;
                details.push(format!(
                    "DWC/{}: H {:.4} (table {h}), PSNR delta {:+.4}, UACI delta {:+.4}",
                    row.image,
                    m.entropy_bits,
                    m.psnr_db - p,
                    m.uaci_percent - u
                ));
            }
        }
        None => details.push("standard photo fixtures not supplied, skipped".into()),
    }
    verdict(
        6,
        "photo rows: entropy >= 7.98, UACI 28 +- 3",
        ok,
        details.join("; "),
    );
}

#[test]
fn criterion_07_drawing_rows() {
    let mut ok = true;
    let mut details = Vec::new();
    for seed in [0u64, 1, 2] {
        let img = gen_drawing(seed);
        let keys = report_keys(seed).unwrap();
        let he = entropy(&ecchc_encrypt(&img, &keys.hill).unwrap()).unwrap();
        let hd = entropy(&dwc_encrypt(&img, keys.dwc).unwrap()).unwrap();
        ok &= he < 3.0 && hd >= 7.99;
        details.push(format!("seed {seed}: ECCHC {he:.4}, DWC {hd:.4}"));
    }
    verdict(
        7,
        "drawing: ECCHC entropy < 3, DWC entropy >= 7.99",
        ok,
        details.join("; "),
    );
}

#[test]
fn criterion_08_known_plaintext_attack() {
    let start = Instant::now();
    let stats = measure_kpa(1000, 10, 108);
    let elapsed = start.elapsed();
    let pairs = measure_kpa(1000, 2, 208);

    let mut r = rng(1108);
    let single_ambiguous = (0..1000)
        .filter(|_| {
            let key = HillKey::from_bytes(r.random());
            let plaintext = Block(r.random());
            let sample = KpaSample {
                plaintext,
                ciphertext: key.encrypt_block(plaintext),
            };
            kpa_recover_hill_key(&[sample]).unwrap().status == AttackStatus::Ambiguous
        })
        .count();
    verdict(
        8,
        "KPA with 10 blocks recovers the key",
        stats.unique >= 990 && stats.wrong_key == 0 && single_ambiguous == 1000 && elapsed < ONE_SECOND,
        format!(
            "{}/1000 unique ({} ambiguous, {} wrong) in {elapsed:?}; {single_ambiguous}/1000 single-sample runs ambiguous; with 2 samples {}/1000 ambiguous",
            stats.unique, stats.ambiguous, stats.wrong_key, pairs.ambiguous
        ),
    );
}

#[test]
fn criterion_09_dwc_partial_recovery() {
    let mut r = rng(109);
    let mut exact_bytes = 0usize;
    let mut total_bytes = 0usize;
    let mut failures = 0;
    for i in 0..100u64 {
        let img = match i % 4 {
            0 => gen_photo(i),
            1 => gen_drawing(i),
            2 => gen_noise(i),
            _ => checkerboard(),
        };
        let key = DwcKey(r.random());
        let rec = dwc_partial_recover(&dwc_encrypt(&img, key).unwrap()).unwrap();
        let mut pair_ok = true;
        for (j, (&got, &want)) in rec.image.pixels().iter().zip(img.pixels()).enumerate() {
            if j % 4 == 0 {
                pair_ok &= got ^ want == key.0 && !rec.recovered[j];
            } else {
                pair_ok &= got == want && rec.recovered[j];
                exact_bytes += (got == want) as usize;
            }
        }
        total_bytes += img.len();
        failures += !pair_ok as u32;
    }
    let fraction = exact_bytes as f64 / total_bytes as f64;
    verdict(
        9,
        "keyless recovery of bytes 1-3 of every block",
        failures == 0 && fraction == 0.75,
        format!(
            "{failures} failing pairs of 100; {:.2}% bytes exact",
            100.0 * fraction
        ),
    );
}

#[test]
fn criterion_10_dwc_brute_force() {
    let cases: Vec<(String, GrayImage, DwcKey)> = vec![
        ("photo/0".into(), gen_photo(0), DwcKey(0x3c)),
        ("photo/1".into(), gen_photo(1), DwcKey(0x01)),
        ("photo/2".into(), gen_photo(2), DwcKey(0xe7)),
        ("zero".into(), gen_constant(0), DwcKey(0x00)),
        ("zero".into(), gen_constant(0), DwcKey(0x5a)),
        ("zero".into(), gen_constant(0), DwcKey(0xff)),
    ];
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    let mut details = Vec::new();
    for (name, img, key) in &cases {
        let ct = dwc_encrypt(img, *key).unwrap();
        let start = Instant::now();
        let ranked = brute_force_dwc(&ct, smoothness_score).unwrap();
        slowest = slowest.max(start.elapsed());
        ok &= ranked.len() == 256 && ranked[0].0 == *key;
        details.push(format!("{name} key {key} -> top {}", ranked[0].0));
    }
    verdict(
        10,
        "256-key DWC search ranks the planted key first",
        ok && slowest < ONE_SECOND,
        format!("{}; slowest search {slowest:?}", details.join(", ")),
    );
}

#[test]
fn criterion_11_hill_brute_force() {
    let plain = gen_photo(111);
    let mut r = rng(111);
    let mut ok = true;
    let mut details = Vec::new();
    for unknown in [[0usize, 3], [1, 2]] {
        let bytes: [u8; 4] = r.random();
        let key = HillKey::from_bytes(bytes);
        let cipher = ecchc_encrypt(&plain, &key).unwrap();
        let mut mask = KeyMask(bytes.map(Some));
        for i in unknown {
            mask.0[i] = None;
        }
        let outcome = brute_force_hill(&plain, &cipher, &mask).unwrap();
        ok &= outcome.status == AttackStatus::Unique
            && outcome.recovered_key == Some(key)
            && outcome.candidates_tested <= 65536
            && outcome.elapsed < ONE_SECOND;
        details.push(format!(
            "mask {mask}: {:?} {} after {} keys in {:?}",
            outcome.status,
            outcome.recovered_key.map_or("-".into(), |k| k.to_string()),
            outcome.candidates_tested,
            outcome.elapsed
        ));
    }
    verdict(11, "2-byte masked Hill search", ok, details.join("; "));
}

#[test]
fn criterion_12_ecb_detector() {
    let board = checkerboard();
    let keys = report_keys(112).unwrap();
    let ecchc = ecb_repeat_detector(&ecchc_encrypt(&board, &keys.hill).unwrap()).unwrap();
    let dwc = ecb_repeat_detector(&dwc_encrypt(&board, keys.dwc).unwrap()).unwrap();
    verdict(
        12,
        "ECB repetition visible for ECCHC, absent for DWC",
        ecchc.distinct == 2 && dwc.blocks == 16384 && dwc.distinct >= 16300,
        format!(
            "ECCHC {} distinct, DWC {} of {} distinct",
            ecchc.distinct, dwc.distinct, dwc.blocks
        ),
    );
}

#[test]
fn criterion_13_key_agreement() {
    let curve = CurveParams::DEMO;
    let failures = (0..1000u64)
        .filter(|&seed| match agree(&curve, seed) {
            Ok(a) => a.shared_alice != a.shared_bob || a.k_alice != a.k_bob,
            Err(_) => true,
        })
        .count();
    verdict(
        13,
        "1000 two-party agreements derive equal keys",
        failures == 0,
        format!("{failures} failures"),
    );
}

#[test]
fn sample_images_cover_the_table() {
    let names: Vec<String> = sample_images(0)
        .unwrap()
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    assert_eq!(names, ["checkerboard", "drawing", "photo"]);
}
