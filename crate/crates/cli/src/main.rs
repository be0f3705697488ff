use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use stegakit::attacks::{gaussian_noise_attack, jpeg_quantize_attack};
use stegakit::dct::{mbec_embed, mbec_extract, wm_capacity, MbecConfig, WatermarkImage};
use stegakit::gabor::{edge_map, superposed_edge_map};
use stegakit::image::median_filter_3x3;
use stegakit::lsb::{frame_message, lsb_capacity, lsb_embed, lsb_extract, EmbedKey};
use stegakit::metrics::{mse, nc, psnr_from_mse};
use stegakit::{load_image, save_image, to_grayscale, ImageBuffer};

mod args;

use args::{AttackKind, Cli, Command, KeyArgs, Pair};

enum Failure {
    /// Bad invocation: exit 1.
    Usage(String),
    /// Bad or unusable data: exit 2.
    Data(String),
}

impl From<stegakit::Error> for Failure {
    fn from(e: stegakit::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Refuses to write `out` over any of `inputs`.
fn check_output(out: &Path, inputs: &[&Path]) -> CliResult {
    let resolve = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let target = resolve(out);
    if inputs.iter().any(|i| resolve(i) == target) {
        return Err(Failure::Usage(format!(
            "output {} would overwrite an input file",
            out.display()
        )));
    }
    Ok(())
}

fn embed_key(key: &KeyArgs) -> Option<EmbedKey> {
    match (&key.key, key.seed) {
        (Some(pass), _) => Some(EmbedKey::from_passphrase(pass)),
        (None, Some(seed)) => Some(EmbedKey(seed)),
        (None, None) => None,
    }
}

fn mbec_config(pair: Pair, k: f64) -> CliResult<MbecConfig> {
    let cfg = match pair {
        Pair::A => MbecConfig::pair_a(k),
        Pair::B => MbecConfig::pair_b(k),
    };
    cfg.map_err(|e| Failure::Usage(e.to_string()))
}

fn load_gray(path: &Path) -> CliResult<ImageBuffer> {
    let img = load_image(path)?;
    if !img.is_gray() {
        eprintln!("note: converting {} to grayscale", path.display());
    }
    Ok(to_grayscale(&img))
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn positive(name: &str, value: f64) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {value}")))
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::LsbEmbed {
            cover,
            message,
            key,
            out,
        } => {
            check_output(&out, &[&cover, &message])?;
            let cover_img = load_image(&cover)?;
            let payload = frame_message(&read_file(&message)?)?;
            let stego = lsb_embed(&cover_img, &payload, embed_key(&key))?;
            save_image(&stego, &out)?;
            eprintln!(
                "embedded {} bits of {} available",
                payload.len(),
                lsb_capacity(&cover_img)
            );
        }
        Command::LsbExtract { stego, key, out } => {
            if let Some(out) = &out {
                check_output(out, &[&stego])?;
            }
            let message = lsb_extract(&load_image(&stego)?, embed_key(&key))?;
            match out {
                Some(path) => write_file(&path, &message)?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    stdout
                        .write_all(&message)
                        .and_then(|()| stdout.flush())
                        .map_err(|e| Failure::Data(format!("cannot write message: {e}")))?;
                }
            }
        }
        Command::DctEmbed {
            host,
            wm,
            k,
            pair,
            out,
        } => {
            let cfg = mbec_config(pair, k)?;
            check_output(&out, &[&host, &wm])?;
            let host_img = load_gray(&host)?;
            let mark = WatermarkImage::from_image(&load_gray(&wm)?)?;
            let marked = mbec_embed(&host_img, &mark, &cfg)?;
            save_image(&marked, &out)?;
            eprintln!(
                "embedded {}x{} watermark ({} of {} blocks), psnr={}",
                mark.width(),
                mark.height(),
                mark.len(),
                wm_capacity(&host_img)?,
                format_db(psnr_from_mse(mse(&host_img, &marked)?))
            );
        }
        Command::DctExtract {
            input,
            width,
            height,
            pair,
            out,
        } => {
            if width == 0 || height == 0 {
                return Err(Failure::Usage("--w and --h must be positive".into()));
            }
            let cfg = mbec_config(pair, 0.0)?;
            check_output(&out, &[&input])?;
            let mark = mbec_extract(&load_gray(&input)?, width, height, &cfg)?;
            save_image(&mark.to_image(), &out)?;
        }
        Command::Edges {
            input,
            lambda,
            gamma,
            bandwidth,
            orientations,
            superposed,
            out,
        } => {
            positive("lambda", lambda)?;
            positive("gamma", gamma)?;
            positive("bandwidth", bandwidth)?;
            if orientations == 0 {
                return Err(Failure::Usage("--orientations must be at least 1".into()));
            }
            check_output(&out, &[&input])?;
            let img = load_gray(&input)?;
            let edges = if superposed {
                superposed_edge_map(&img, lambda, gamma, bandwidth, orientations)?
            } else {
                edge_map(&img, lambda, gamma, bandwidth, orientations)?
            };
            save_image(&edges, &out)?;
        }
        Command::Attack {
            kind,
            scale,
            sigma,
            seed,
            input,
            out,
        } => {
            let attacked = match kind {
                AttackKind::Quantize => {
                    let scale = positive("scale", scale.ok_or_else(|| {
                        Failure::Usage("--kind quantize requires --scale".into())
                    })?)?;
                    check_output(&out, &[&input])?;
                    jpeg_quantize_attack(&load_gray(&input)?, scale)?
                }
                AttackKind::Noise => {
                    let sigma = sigma
                        .ok_or_else(|| Failure::Usage("--kind noise requires --sigma".into()))?;
                    if !(sigma >= 0.0 && sigma.is_finite()) {
                        return Err(Failure::Usage(format!("--sigma must be >= 0, got {sigma}")));
                    }
                    check_output(&out, &[&input])?;
                    gaussian_noise_attack(&load_image(&input)?, sigma, seed)?
                }
            };
            save_image(&attacked, &out)?;
        }
        Command::Metrics {
            reference,
            test,
            wm_ref,
            wm_test,
        } => {
            if reference.is_none() && wm_ref.is_none() {
                return Err(Failure::Usage(
                    "metrics needs --ref/--test and/or --wm-ref/--wm-test".into(),
                ));
            }
            if let (Some(a), Some(b)) = (reference, test) {
                let e = mse(&load_image(a)?, &load_image(b)?)?;
                println!("mse={e:.6} psnr={}", format_db(psnr_from_mse(e)));
            }
            if let (Some(a), Some(b)) = (wm_ref, wm_test) {
                let w = WatermarkImage::from_image(&load_gray(&a)?)?;
                let w2 = WatermarkImage::from_image(&load_gray(&b)?)?;
                println!("nc={:.6}", nc(&w, &w2)?);
            }
        }
        Command::Capacity { input } => {
            let img = load_image(&input)?;
            let dct = wm_capacity(&to_grayscale(&img)).unwrap_or(0);
            println!("lsb_bits={} dct_bits={dct}", lsb_capacity(&img));
        }
        Command::MedianFilter { input, out } => {
            check_output(&out, &[&input])?;
            save_image(&median_filter_3x3(&load_image(&input)?), &out)?;
        }
    }
    Ok(())
}

fn format_db(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{db:.6}")
    }
}
