//! `cipher-autopsy`: encrypt, measure and break ECCHC and DWC images.
//!
//! Results go to stdout (JSON, CSV or PGM files named by `--out`). Failures
//! print `{"error": kind, "message": ...}` on stderr and exit with a code
//! per kind; see [`Failure::exit_code`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cipher_autopsy::attacks::{
    brute_force_dwc, brute_force_hill, dwc_partial_recover, ecb_repeat_detector,
    fixed_point_census, kpa_recover_hill_key, parse_kpa_samples, smoothness_score, KeyMask,
};
use cipher_autopsy::dwc::{dwc_decrypt, dwc_encrypt, DwcKey};
use cipher_autopsy::ecchc::{ecchc_decrypt, ecchc_encrypt, expand_key, HillKey};
use cipher_autopsy::ecgroup::{agree, CurveParams};
use cipher_autopsy::imagekit::{
    gen_checkerboard, gen_constant, gen_drawing, gen_noise, gen_photo, read_pgm, write_pgm,
};
use cipher_autopsy::metrics::{evaluate, format_metric, rows_to_csv};
use cipher_autopsy::report::{build_report, load_photo_fixtures, report_keys, sample_images};
use cipher_autopsy::{Error, GrayImage};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const FIXTURES_ENV: &str = "CIPHER_AUTOPSY_FIXTURES";

#[derive(Parser)]
#[command(
    name = "cipher-autopsy",
    version,
    about = "Cryptanalysis workbench for the ECCHC and DWC image ciphers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-party key agreement and print every intermediate value.
    Keygen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Curve file of `key=value` lines (q, a, b, gx, gy, order); the
        /// built-in demo curve otherwise.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    Encrypt(CipherArgs),
    Decrypt(CipherArgs),
    /// Entropy of the cipher image, PSNR and UACI between the two.
    Metrics {
        /// Plaintext image.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        cipher: PathBuf,
    },
    /// Both ciphers over the sample images, one row per (algorithm, image).
    Report {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Attack(Attack),
    /// Write a generated 256x256 test image.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 32)]
        cell: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        value: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CipherArgs {
    #[arg(long, value_enum)]
    alg: Alg,
    /// 8 hex digits (k11 k12 k21 k22) for ECCHC, 2 for DWC.
    #[arg(long)]
    key: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Attack {
    /// Solve for the Hill key from known block pairs.
    Kpa {
        /// One pair per line: 16 hex digits, plaintext block then ciphertext block.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Exhaustive Hill key search constrained by a mask such as `1f??3a??`.
    BruteHill {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        cipher: PathBuf,
        #[arg(long, default_value = "????????")]
        mask: String,
        /// Allow the unconstrained 2^32 search.
        #[arg(long)]
        full: bool,
    },
    /// Rank all 256 DWC keys by plausibility of the decryption.
    BruteDwc {
        #[arg(long = "in")]
        input: PathBuf,
        /// Where to write the best candidate plaintext.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Recover 3 of every 4 plaintext bytes of a DWC image without the key.
    DwcPartial {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count repeated ciphertext blocks.
    EcbScan {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Diagonal and sampled fixed points of a Hill key.
    FixedPoints {
        #[arg(long)]
        key: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Ecchc,
    Dwc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Checkerboard,
    Drawing,
    Noise,
    Constant,
    Photo,
}

enum Failure {
    Io(String),
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Io(_) => "io",
            Failure::Usage(_) => "usage",
            Failure::Lib(e) => match e {
                Error::InvalidKey(_) | Error::InvalidMask(_) | Error::InvalidSample(_) => "parse",
                Error::BadDimensions { .. }
                | Error::EmptyImage
                | Error::DimensionMismatch(..)
                | Error::PixelCount { .. }
                | Error::BadCellSize(_)
                | Error::MalformedHeader(_)
                | Error::UnsupportedMaxval(_)
                | Error::TruncatedData => "image",
                Error::NoSamples
                | Error::NotFound
                | Error::Underdetermined
                | Error::Inconsistent => "attack",
                Error::ZeroInverse
                | Error::PointNotOnCurve { .. }
                | Error::PublicKeyAtInfinity
                | Error::DegenerateSharedPoint
                | Error::DegenerateDerivedPoint
                | Error::InvalidCurve(_) => "crypto",
            },
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind() {
            "usage" => 2,
            "io" => 3,
            "parse" => 4,
            "image" => 5,
            "attack" => 6,
            _ => 7,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) | Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read_bytes(path: &Path) -> Outcome<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, data: &[u8]) -> Outcome {
    std::fs::write(path, data).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_image(path: &Path) -> Outcome<GrayImage> {
    Ok(read_pgm(&read_bytes(path)?)?)
}

fn save_image(path: &Path, img: &GrayImage) -> Outcome {
    write_bytes(path, &write_pgm(img))
}

/// Stdout writes ignore errors so a closed pipe ends the output quietly.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("JSON value serializes") + "\n"));
}

/// Finite numbers at four decimals, infinity as `"inf"`.
fn metric_json(v: f64) -> Value {
    if v.is_finite() {
        json!(format_metric(v).parse::<f64>().expect("formatted float"))
    } else {
        json!("inf")
    }
}

fn hex_row(row: [u8; 4]) -> String {
    row.iter().map(|b| format!("{b:02x}")).collect()
}

fn keygen(seed: u64, curve_path: Option<&Path>) -> Outcome {
    let curve = match curve_path {
        Some(p) => String::from_utf8_lossy(&read_bytes(p)?).parse::<CurveParams>()?,
        None => CurveParams::DEMO,
    };
    let a = agree(&curve, seed)?;
    if a.shared_alice != a.shared_bob || a.k_alice != a.k_bob {
        return Err(Error::DegenerateSharedPoint.into());
    }
    let key = expand_key(a.k_alice);
    print_json(&json!({
        "seed": seed,
        "curve": curve,
        "alice": a.alice,
        "bob": a.bob,
        "shared_alice": a.shared_alice,
        "shared_bob": a.shared_bob,
        "k_alice": expand_key(a.k_alice).to_string(),
        "k_bob": expand_key(a.k_bob).to_string(),
        "km": key.km.0.map(hex_row),
        "self_check": key.km.mul(&key.km).is_identity(),
    }));
    Ok(())
}

fn cipher(args: &CipherArgs, decrypt: bool) -> Outcome {
    let img = load_image(&args.input)?;
    let out = match args.alg {
        Alg::Ecchc => {
            let key: HillKey = args.key.parse()?;
            if decrypt {
                ecchc_decrypt(&img, &key)?
            } else {
                ecchc_encrypt(&img, &key)?
            }
        }
        Alg::Dwc => {
            let key: DwcKey = args.key.parse()?;
            if decrypt {
                dwc_decrypt(&img, key)?
            } else {
                dwc_encrypt(&img, key)?
            }
        }
    };
    save_image(&args.out, &out)
}

fn metrics(plain: &Path, cipher: &Path) -> Outcome {
    let m = evaluate(&load_image(plain)?, &load_image(cipher)?)?;
    print_json(&json!({
        "entropy": metric_json(m.entropy_bits),
        "psnr": metric_json(m.psnr_db),
        "uaci_percent": metric_json(m.uaci_percent),
        "mse": metric_json(m.mse),
    }));
    Ok(())
}

fn report(seed: u64, format: Format, out: Option<&Path>) -> Outcome {
    let mut images = sample_images(seed)?;
    match std::env::var_os(FIXTURES_ENV) {
        Some(dir) => {
            let (photos, warnings) = load_photo_fixtures(Path::new(&dir))?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            images.extend(photos);
        }
        None => eprintln!("warning: {FIXTURES_ENV} not set, standard photo rows skipped"),
    }
    let rows = build_report(&images, &report_keys(seed)?)?;
    let text = match format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => {
            let rows: Vec<Value> = rows.iter().map(|r| r.to_json()).collect();
            serde_json::to_string_pretty(&rows).expect("JSON value serializes") + "\n"
        }
    };
    match out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            emit(&text);
            Ok(())
        }
    }
}

fn attack(a: &Attack) -> Outcome {
    match a {
        Attack::Kpa { input } => {
            let text = String::from_utf8_lossy(&read_bytes(input)?).into_owned();
            let samples = parse_kpa_samples(&text)?;
            let mut v = kpa_recover_hill_key(&samples)?.to_json();
            v["samples"] = json!(samples.len());
            print_json(&v);
        }
        Attack::BruteHill {
            input,
            cipher,
            mask,
            full,
        } => {
            let mask: KeyMask = mask.parse()?;
            if mask.unknown_bytes() == 4 && !full {
                return Err(Failure::Usage(
                    "an all-unknown mask searches 2^32 keys; pass --full to confirm".into(),
                ));
            }
            let outcome = brute_force_hill(&load_image(input)?, &load_image(cipher)?, &mask)?;
            let mut v = outcome.to_json();
            v["mask"] = json!(mask.to_string());
            v["search_space"] = json!(mask.search_space());
            print_json(&v);
        }
        Attack::BruteDwc { input, out, top } => {
            let cipher = load_image(input)?;
            let ranked = brute_force_dwc(&cipher, smoothness_score)?;
            let best = ranked[0].0;
            if let Some(path) = out {
                save_image(path, &dwc_decrypt(&cipher, best)?)?;
            }
            let ranking: Vec<Value> = ranked
                .iter()
                .take(*top)
                .map(|(k, s)| json!({ "key": k.to_string(), "score": metric_json(*s) }))
                .collect();
            print_json(&json!({ "best_key": best.to_string(), "ranking": ranking }));
        }
        Attack::DwcPartial { input, out } => {
            let rec = dwc_partial_recover(&load_image(input)?)?;
            if let Some(path) = out {
                save_image(path, &rec.image)?;
            }
            print_json(&json!({
                "width": rec.image.width(),
                "height": rec.image.height(),
                "recovered_fraction": rec.recovered_fraction(),
                "mask_rle": rec.mask_rle(),
            }));
        }
        Attack::EcbScan { input } => {
            let scan = ecb_repeat_detector(&load_image(input)?)?;
            print_json(&serde_json::to_value(scan).expect("scan serializes"));
        }
        Attack::FixedPoints { key, samples, seed } => {
            let key: HillKey = key.parse()?;
            let census = fixed_point_census(&key, *samples, *seed);
            let mut v = serde_json::to_value(census).expect("census serializes");
            v["key"] = json!(key.to_string());
            print_json(&v);
        }
    }
    Ok(())
}

fn generate(kind: GenKind, cell: u32, seed: u64, value: u8, out: &Path) -> Outcome {
    let img = match kind {
        GenKind::Checkerboard => gen_checkerboard(cell)?,
        GenKind::Drawing => gen_drawing(seed),
        GenKind::Noise => gen_noise(seed),
        GenKind::Constant => gen_constant(value),
        GenKind::Photo => gen_photo(seed),
    };
    save_image(out, &img)
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Keygen { seed, curve } => keygen(*seed, curve.as_deref()),
        Command::Encrypt(args) => cipher(args, false),
        Command::Decrypt(args) => cipher(args, true),
        Command::Metrics { input, cipher } => metrics(input, cipher),
        Command::Report { seed, format, out } => report(*seed, *format, out.as_deref()),
        Command::Attack(a) => attack(a),
        Command::Gen {
            kind,
            cell,
            seed,
            value,
            out,
        } => generate(*kind, *cell, *seed, *value, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind(), "message": f.message() }));
            ExitCode::from(f.exit_code())
        }
    }
}
