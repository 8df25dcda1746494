//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::imageio::{decode_image, ImageError, ImageFormat, RgbImage};
use crate::key::{KeyError, StegoKey};
use crate::metrics::{quality_report, DimensionMismatch, QualityReport};
use crate::pipeline::{self, HeaderMode, PipelineError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CODEC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fmmstego",
    version,
    about = "Hide a color image inside another with five-modulus window marks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide SECRET inside COVER and write the carrier image.
    Embed {
        #[arg(long, value_name = "PATH")]
        cover: PathBuf,
        #[arg(long, value_name = "PATH")]
        secret: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Stego-key: 0 (horizontal) or 1 (vertical) followed by shift digits.
        #[arg(long, value_name = "DIGITS")]
        key: Option<String>,
        /// Omit the in-band header (receiver must pass --raw WxH).
        #[arg(long)]
        raw: bool,
    },
    /// Recover the quantized secret from a carrier image.
    Extract {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "DIGITS")]
        key: Option<String>,
        /// Secret dimensions for carriers embedded with --raw.
        #[arg(long, value_name = "WxH", value_parser = parse_dims)]
        raw: Option<(usize, usize)>,
    },
    /// Print MSE and PSNR between two images.
    Psnr {
        a: PathBuf,
        b: PathBuf,
        /// Print one CSV line instead of the text report.
        #[arg(long)]
        csv: bool,
    },
    /// Print how many secret pixels a cover can hold.
    Capacity {
        #[arg(long, value_name = "PATH")]
        cover: PathBuf,
        #[arg(long)]
        raw: bool,
    },
    /// Print the mod-5 mark structure of a carrier.
    Inspect {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "DIGITS")]
        key: Option<String>,
    },
}

/// Parses `WxH` (also accepts `X` or `×`).
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let parse = |v: &str| -> Result<usize, String> {
        match v.trim().parse::<usize>() {
            Ok(0) => Err(format!("dimension must be positive in '{s}'")),
            Ok(n) => Ok(n),
            Err(_) => Err(format!("bad dimension '{v}' in '{s}'")),
        }
    };
    Ok((parse(w)?, parse(h)?))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("usage: {0}")]
    Key(#[from] KeyError),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("imageio: {path}: {source}")]
    Image { path: PathBuf, source: ImageError },
    #[error("pipeline: {0}")]
    Pipeline(#[from] PipelineError),
    #[error("metrics: {0}")]
    Metrics(#[from] DimensionMismatch),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Key(_) => EXIT_USAGE,
            Self::Io { .. } => EXIT_IO,
            Self::Image { .. } | Self::Pipeline(_) | Self::Metrics(_) => EXIT_CODEC,
        }
    }
}

fn load(path: &Path) -> Result<RgbImage, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_image(&bytes).map_err(|source| CliError::Image {
        path: path.to_owned(),
        source,
    })
}

fn output_format(path: &Path) -> Result<ImageFormat, CliError> {
    ImageFormat::from_path(path).ok_or_else(|| {
        CliError::Usage(format!(
            "cannot choose an output format for '{}' (use .bmp or .ppm)",
            path.display()
        ))
    })
}

fn save(path: &Path, format: ImageFormat, img: &RgbImage) -> Result<(), CliError> {
    fs::write(path, format.encode(img)).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn key_or_default(key: Option<&str>) -> Result<StegoKey, CliError> {
    Ok(key.map(StegoKey::parse).transpose()?.unwrap_or_default())
}

fn print_report(out: &mut dyn Write, report: &QualityReport, csv: bool) -> std::io::Result<()> {
    if csv {
        writeln!(out, "{}", report.csv_line())
    } else {
        writeln!(out, "{report}")
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match cmd {
        Command::Embed {
            cover,
            secret,
            out: out_path,
            key,
            raw,
        } => {
            let key = key_or_default(key.as_deref())?;
            let format = output_format(&out_path)?;
            let mode = if raw {
                HeaderMode::Raw
            } else {
                HeaderMode::Headered
            };
            let cover_img = load(&cover)?;
            let secret_img = load(&secret)?;
            let carrier = pipeline::embed_image(&cover_img, &secret_img, &key, mode)?;
            save(&out_path, format, &carrier)?;
            let report = quality_report(&cover_img, &carrier)?;
            writeln!(
                out,
                "embedded {}x{} secret into {}x{} cover; carrier psnr={}",
                secret_img.width(),
                secret_img.height(),
                cover_img.width(),
                cover_img.height(),
                if report.psnr_db.is_infinite() {
                    "inf".to_owned()
                } else {
                    format!("{:.4}", report.psnr_db)
                }
            )
            .map_err(stdout_err)?;
        }
        Command::Extract {
            input,
            out: out_path,
            key,
            raw,
        } => {
            let key = key_or_default(key.as_deref())?;
            let format = output_format(&out_path)?;
            let mode = if raw.is_some() {
                HeaderMode::Raw
            } else {
                HeaderMode::Headered
            };
            let carrier = load(&input)?;
            let secret = pipeline::extract_image(&carrier, &key, mode, raw)?;
            save(&out_path, format, &secret)?;
            writeln!(
                out,
                "extracted {}x{} secret",
                secret.width(),
                secret.height()
            )
            .map_err(stdout_err)?;
        }
        Command::Psnr { a, b, csv } => {
            let report = quality_report(&load(&a)?, &load(&b)?)?;
            print_report(out, &report, csv).map_err(stdout_err)?;
        }
        Command::Capacity { cover, raw } => {
            let img = load(&cover)?;
            let mode = if raw {
                HeaderMode::Raw
            } else {
                HeaderMode::Headered
            };
            let cap = pipeline::capacity(img.width(), img.height(), mode);
            let side = pipeline::max_square_side(img.width(), img.height(), mode);
            writeln!(out, "capacity={cap}").map_err(stdout_err)?;
            writeln!(out, "max_square={side}x{side}").map_err(stdout_err)?;
        }
        Command::Inspect { input, key } => {
            let key = key_or_default(key.as_deref())?;
            let report = pipeline::inspect(&load(&input)?, &key);
            writeln!(out, "{report}").map_err(stdout_err)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { EXIT_USAGE };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
