//! In-band payload header: ten base-52 digits carried by the first ten
//! windows of every channel.
//!
//! Layout: magic (42, 17), version (1), width as three big-endian digits,
//! height as three big-endian digits, then a checksum equal to the sum of
//! the nine preceding digits modulo 52.

use thiserror::Error;

use crate::fmm::LEVELS;

pub const HEADER_DIGITS: usize = 10;
pub const MAGIC: [u8; 2] = [42, 17];
pub const VERSION: u8 = 1;
/// 52^3 - 1.
pub const MAX_DIMENSION: usize = 140_607;

const BASE: usize = LEVELS as usize;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum HeaderError {
    #[error("BadMagic: header starts with ({0}, {1})")]
    BadMagic(u8, u8),
    #[error("BadVersion: header version {0} is not supported")]
    BadVersion(u8),
    #[error("BadChecksum: stored {stored}, computed {computed}")]
    BadChecksum { stored: u8, computed: u8 },
    #[error("BadDimensions: {width}x{height} outside 1..=140607")]
    BadDimensions { width: usize, height: usize },
    #[error("BadDigit: header digit {0} exceeds 51")]
    BadDigit(u8),
}

pub type HeaderDigits = [u8; HEADER_DIGITS];

fn checksum(digits: &[u8]) -> u8 {
    (digits.iter().map(|&d| d as usize).sum::<usize>() % BASE) as u8
}

fn encode3(value: usize) -> [u8; 3] {
    [
        (value / (BASE * BASE)) as u8,
        (value / BASE % BASE) as u8,
        (value % BASE) as u8,
    ]
}

fn decode3(d: &[u8]) -> usize {
    (d[0] as usize * BASE + d[1] as usize) * BASE + d[2] as usize
}

fn check_dimensions(width: usize, height: usize) -> Result<(), HeaderError> {
    let ok = |v: usize| (1..=MAX_DIMENSION).contains(&v);
    if ok(width) && ok(height) {
        Ok(())
    } else {
        Err(HeaderError::BadDimensions { width, height })
    }
}

pub fn build_header(width: usize, height: usize) -> Result<HeaderDigits, HeaderError> {
    check_dimensions(width, height)?;
    let mut digits = [0u8; HEADER_DIGITS];
    digits[..2].copy_from_slice(&MAGIC);
    digits[2] = VERSION;
    digits[3..6].copy_from_slice(&encode3(width));
    digits[6..9].copy_from_slice(&encode3(height));
    digits[9] = checksum(&digits[..9]);
    Ok(digits)
}

/// Returns the secret `(width, height)` recorded in the header.
pub fn parse_header(digits: &HeaderDigits) -> Result<(usize, usize), HeaderError> {
    if let Some(&d) = digits.iter().find(|&&d| d as usize >= BASE) {
        return Err(HeaderError::BadDigit(d));
    }
    let computed = checksum(&digits[..9]);
    if computed != digits[9] {
        return Err(HeaderError::BadChecksum {
            stored: digits[9],
            computed,
        });
    }
    if digits[..2] != MAGIC {
        return Err(HeaderError::BadMagic(digits[0], digits[1]));
    }
    if digits[2] != VERSION {
        return Err(HeaderError::BadVersion(digits[2]));
    }
    let (width, height) = (decode3(&digits[3..6]), decode3(&digits[6..9]));
    check_dimensions(width, height)?;
    Ok((width, height))
}
