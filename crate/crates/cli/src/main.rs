use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rdhei_cli::{bench, files, report};
use rdhei_core::codec::{embed, extract, EmbedError, ExtractError};
use rdhei_core::crypto::{bits_to_bytes, bytes_to_bits, decode_hex, xor_image, KeyError};
use rdhei_core::lattice::LatticeError;
use rdhei_core::pgm::PgmError;
use rdhei_core::recovery::reconstruct;
use rdhei_core::{DataKey, GrayImage, ImageKey, LatticePlan, Psnr, TargetClass};

/// Default scramble seed, hex of the ASCII string "rdhei". The seed only
/// randomizes pixel-to-group assignment and is not secret; override it per
/// run with --seed or the RDHEI_SEED environment variable.
const DEFAULT_SEED: &str = "7264686569";

/// Well-known test keys for `roundtrip`, where confidentiality is beside
/// the point. Real deployments pass their own keys.
const DEFAULT_KE: &str = "000102030405060708090a0b0c0d0e0f";
const DEFAULT_KD: &str = "0f0e0d0c0b0a09080706050403020100";

#[derive(Parser)]
#[command(
    name = "rdhei",
    version,
    about = "Reversible data hiding in encrypted grayscale images",
    long_about = "Encrypts PGM images, embeds payload bits into the MSBs of lattice target \
                  pixels, extracts them with the data key alone, and losslessly reconstructs \
                  the original with the image key alone.\n\nKeys are 32 hex characters or \
                  paths to 16-byte key files. N_W/N_B and the seed select the embedding \
                  lattice; extract and reconstruct must be given the same values that were \
                  used to embed (the bitstream carries no header)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt an image with the image key
    Encrypt(CipherArgs),
    /// Decrypt an image with the image key (the cipher is its own inverse)
    Decrypt(CipherArgs),
    /// Hide a payload in an encrypted image using the data key
    Embed(EmbedArgs),
    /// Recover the payload from a marked image using only the data key
    Extract(ExtractArgs),
    /// Recover the original image from a marked image using only the image key
    Reconstruct(ReconstructArgs),
    /// Run the whole pipeline on one image and check it comes back intact
    Roundtrip(RoundtripArgs),
    /// Emit prediction-error histograms and failure probabilities
    Analyze(AnalyzeArgs),
    /// Evaluate a corpus over a grid of lattice parameters
    Bench(BenchArgs),
}

#[derive(Args)]
struct CipherArgs {
    /// Input image (PGM)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output image (binary PGM)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Image key: 32 hex chars or a 16-byte key file
    #[arg(long, value_name = "KEY")]
    ke: String,
}

#[derive(Args)]
struct LatticeOpts {
    /// White-group size N_W
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..=16))]
    nw: u32,
    /// Black-group size N_B
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..=16))]
    nb: u32,
    /// Scramble seed (hex, public)
    #[arg(long, value_name = "HEX", env = "RDHEI_SEED", default_value = DEFAULT_SEED,
          value_parser = parse_hex_value)]
    seed: Seed,
}

#[derive(Args)]
struct EmbedArgs {
    /// Encrypted input image (PGM)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Marked output image (binary PGM)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Data key: 32 hex chars or a 16-byte key file
    #[arg(long, value_name = "KEY")]
    kd: String,
    /// Payload file (raw bytes, embedded MSB-first)
    #[arg(long, value_name = "FILE")]
    payload: PathBuf,
    /// Embed only this many bits of the payload file
    #[arg(long, value_name = "BITS")]
    payload_len: Option<u64>,
    #[command(flatten)]
    lattice: LatticeOpts,
}

#[derive(Args)]
struct ExtractArgs {
    /// Marked input image (PGM)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Recovered payload file (bits packed MSB-first, zero-padded to a byte)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Data key: 32 hex chars or a 16-byte key file
    #[arg(long, value_name = "KEY")]
    kd: String,
    /// Number of payload bits to extract (travels out of band)
    #[arg(long, value_name = "BITS")]
    payload_len: u64,
    #[command(flatten)]
    lattice: LatticeOpts,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Marked input image (PGM)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Reconstructed output image (binary PGM)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Image key: 32 hex chars or a 16-byte key file
    #[arg(long, value_name = "KEY")]
    ke: String,
    /// Write the per-phase risk summary as JSON
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write per-subset risk rows as CSV
    #[arg(long, value_name = "FILE")]
    report_csv: Option<PathBuf>,
    #[command(flatten)]
    lattice: LatticeOpts,
}

#[derive(Args)]
struct RoundtripArgs {
    /// Original image (PGM)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Image key (defaults to a fixed test key)
    #[arg(long, value_name = "KEY", default_value = DEFAULT_KE)]
    ke: String,
    /// Data key (defaults to a fixed test key)
    #[arg(long, value_name = "KEY", default_value = DEFAULT_KD)]
    kd: String,
    /// Payload file; defaults to a full-capacity pseudorandom payload
    #[arg(long, value_name = "FILE")]
    payload: Option<PathBuf>,
    /// Write the reconstructed image here
    #[arg(long, value_name = "FILE")]
    out_recovered: Option<PathBuf>,
    /// Fail unless the reconstruction is bit-exact
    #[arg(long)]
    require_lossless: bool,
    #[command(flatten)]
    lattice: LatticeOpts,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input image (PGM)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Write per-predictor error histograms as CSV (predictor,e,count)
    #[arg(long, value_name = "FILE")]
    histograms: Option<PathBuf>,
    /// Write per-predictor failure probabilities as CSV (predictor,f)
    #[arg(long, value_name = "FILE")]
    f_values: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of PGM images
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,
    /// Lattice parameter grid, e.g. "1,1;2,3;3,6"
    #[arg(long, value_name = "GRID")]
    grid: String,
    /// Image key: 32 hex chars or a 16-byte key file
    #[arg(long, value_name = "KEY")]
    ke: String,
    /// Data key: 32 hex chars or a 16-byte key file
    #[arg(long, value_name = "KEY")]
    kd: String,
    /// Scramble seed (hex, public)
    #[arg(long, value_name = "HEX", env = "RDHEI_SEED", default_value = DEFAULT_SEED,
          value_parser = parse_hex_value)]
    seed: Seed,
    /// Per-image report CSV
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Aggregate per-grid-point CSV
    #[arg(long, value_name = "FILE")]
    sweep_out: Option<PathBuf>,
    /// Full results as JSON
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

/// Seed bytes behind a newtype so clap treats the argument as one hex
/// string rather than a list of numbers.
#[derive(Clone)]
struct Seed(Vec<u8>);

fn parse_hex_value(s: &str) -> Result<Seed, String> {
    decode_hex(s).map(Seed).map_err(|e| e.to_string())
}

/// Input that failed structural validation before any pipeline stage ran.
#[derive(Debug)]
struct ParseFailure(String);

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseFailure {}

/// Unusable key material (bad hex, missing or wrong-sized key file).
#[derive(Debug)]
struct KeyMaterialError(String);

impl fmt::Display for KeyMaterialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for KeyMaterialError {}

/// 32 hex chars are taken literally; anything else is read as a 16-byte
/// key file.
fn load_key_bytes(arg: &str) -> Result<[u8; 16]> {
    if arg.len() == 32 && arg.bytes().all(|b| b.is_ascii_hexdigit()) {
        let bytes = decode_hex(arg).expect("validated hex");
        let mut key = [0u8; 16];
        key.copy_from_slice(&bytes);
        return Ok(key);
    }
    let data = std::fs::read(arg)
        .map_err(|e| KeyMaterialError(format!("key {arg:?} is neither 32 hex chars nor a readable file: {e}")))?;
    let key: [u8; 16] = data
        .as_slice()
        .try_into()
        .map_err(|_| KeyMaterialError(format!("key file {arg:?} holds {} bytes, need exactly 16", data.len())))?;
    Ok(key)
}

fn image_key(arg: &str) -> Result<ImageKey> {
    Ok(ImageKey::from_bytes(load_key_bytes(arg)?))
}

fn data_key(arg: &str) -> Result<DataKey> {
    Ok(DataKey::from_bytes(load_key_bytes(arg)?))
}

fn build_plan(img: &GrayImage, opts: &LatticeOpts) -> Result<LatticePlan> {
    LatticePlan::build(img.dims(), opts.nw, opts.nb, &opts.seed.0)
        .with_context(|| format!("building lattice for {}", img.dims()))
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Encrypt(a) | Command::Decrypt(a) => cmd_cipher(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Errors sharing a cause land on the same exit code no matter how deep
/// the context chain: 3 = unparsable/inconsistent input, 4 = capacity
/// exceeded, 5 = bad key material, 1 = anything else.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<EmbedError>() {
            return match e {
                EmbedError::PayloadTooLong { .. } => 4,
                EmbedError::DimensionMismatch { .. } => 3,
            };
        }
        if let Some(e) = cause.downcast_ref::<ExtractError>() {
            return match e {
                ExtractError::LengthExceedsCapacity { .. } => 4,
                ExtractError::DimensionMismatch { .. } => 3,
            };
        }
        if cause.is::<PgmError>() || cause.is::<LatticeError>() || cause.is::<ParseFailure>() {
            return 3;
        }
        if cause.is::<KeyError>() || cause.is::<KeyMaterialError>() {
            return 5;
        }
    }
    1
}

fn cmd_cipher(args: CipherArgs) -> Result<()> {
    let key = image_key(&args.ke)?;
    let img = files::read_image(&args.input)?;
    files::write_image(&args.out, &xor_image(&img, &key))
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    let key = data_key(&args.kd)?;
    let img = files::read_image(&args.input)?;
    let plan = build_plan(&img, &args.lattice)?;
    let mut bits = bytes_to_bits(&files::read_bytes(&args.payload)?);
    if let Some(len) = args.payload_len {
        if len as usize > bits.len() {
            bail!(ParseFailure(format!(
                "--payload-len {len} exceeds the {} bits in {}",
                bits.len(),
                args.payload.display()
            )));
        }
        bits.truncate(len as usize);
    }
    let marked = embed(&img, &bits, &key, &plan)?;
    files::write_image(&args.out, &marked)?;
    println!("embedded {} of {} bits", bits.len(), plan.capacity());
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let key = data_key(&args.kd)?;
    let img = files::read_image(&args.input)?;
    let plan = build_plan(&img, &args.lattice)?;
    let bits = extract(&img, &key, &plan, args.payload_len as usize)?;
    files::write_bytes(&args.out, &bits_to_bytes(&bits))?;
    println!("extracted {} bits", bits.len());
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<()> {
    let key = image_key(&args.ke)?;
    let img = files::read_image(&args.input)?;
    let plan = build_plan(&img, &args.lattice)?;
    let (recovered, risk) = reconstruct(&img, &key, &plan)?;
    files::write_image(&args.out, &recovered)?;
    if let Some(path) = &args.report {
        files::write_bytes(path, report::risk_to_json(&risk).as_bytes())?;
    }
    if let Some(path) = &args.report_csv {
        files::write_bytes(path, report::risk_to_csv(&risk).as_bytes())?;
    }
    println!("white {}", report::counts_line(risk.counts(TargetClass::White)));
    println!("black {}", report::counts_line(risk.counts(TargetClass::Black)));
    Ok(())
}

fn cmd_roundtrip(args: RoundtripArgs) -> Result<()> {
    let ke = image_key(&args.ke)?;
    let kd = data_key(&args.kd)?;
    let original = files::read_image(&args.input)?;
    let plan = build_plan(&original, &args.lattice)?;
    println!("EC={}", plan.capacity());

    let payload = match &args.payload {
        Some(path) => bytes_to_bits(&files::read_bytes(path)?),
        None => bench::default_payload(&plan, &args.lattice.seed.0),
    };
    let encrypted = xor_image(&original, &ke);
    let marked = embed(&encrypted, &payload, &kd, &plan)?;
    let extracted = extract(&marked, &kd, &plan, payload.len())?;
    if extracted == payload {
        println!("payload=OK ({} bits)", payload.len());
    } else {
        println!("payload=MISMATCH");
        bail!("extracted payload differs from what was embedded");
    }

    let (recovered, risk) = reconstruct(&marked, &ke, &plan)?;
    let quality = rdhei_core::image::psnr(&original, &recovered)?;
    println!("PSNR={quality}");
    println!("deformed_msbs={}", bench::deformed_msb_count(&original, &recovered));
    println!("white {}", report::counts_line(risk.counts(TargetClass::White)));
    println!("black {}", report::counts_line(risk.counts(TargetClass::Black)));
    if let Some(path) = &args.out_recovered {
        files::write_image(path, &recovered)?;
    }
    if args.require_lossless && quality != Psnr::Infinite {
        bail!("reconstruction is not lossless (PSNR={quality})");
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let img = files::read_image(&args.input)?;
    if let Some(path) = &args.histograms {
        files::write_bytes(path, report::histograms_to_csv(&img).as_bytes())?;
    }
    if let Some(path) = &args.f_values {
        files::write_bytes(path, report::failures_to_csv(&img).as_bytes())?;
    }
    if args.histograms.is_none() && args.f_values.is_none() {
        print!("{}", report::failures_to_csv(&img));
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let ke = image_key(&args.ke)?;
    let kd = data_key(&args.kd)?;
    let grid = bench::parse_grid(&args.grid).map_err(|e| ParseFailure(format!("{e:#}")))?;
    let (corpus, skipped) = bench::load_corpus(&args.corpus)?;
    for s in &skipped {
        eprintln!("skipping {s}");
    }
    ensure!(!corpus.is_empty(), "no readable PGM images in {}", args.corpus.display());
    println!("corpus: {} images ({} skipped)", corpus.len(), skipped.len());

    let outcome = bench::sweep(&corpus, &grid, &ke, &kd, &args.seed.0)?;
    files::write_bytes(&args.out, report::reports_to_csv(&outcome.reports).as_bytes())?;
    if let Some(path) = &args.sweep_out {
        files::write_bytes(path, bench::sweep_to_csv(&outcome).as_bytes())?;
    }
    if let Some(path) = &args.json {
        files::write_bytes(path, serde_json::to_string_pretty(&outcome)?.as_bytes())?;
    }
    for c in &outcome.cells {
        println!(
            "{{{},{}}}: mean_EC={:.0} failures={}/{} F_r={:.4}",
            c.n_white, c.n_black, c.mean_capacity_bits, c.failures, c.images, c.failure_rate
        );
    }
    Ok(())
}
