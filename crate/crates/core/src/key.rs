//! Stego-key parsing and the per-window shift schedule.
//!
//! A key is a digit string `[01][0-9]+`. The leading digit picks the
//! tracing order used for shifting (0 horizontal, 1 vertical); the
//! remaining digits are per-window shifts, cycled in window order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::window::{TraceOrder, WINDOW_CELLS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("BadKey: {0}")]
pub struct KeyError(String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StegoKey {
    direction: TraceOrder,
    shifts: Vec<u8>,
    raw: String,
}

impl StegoKey {
    pub fn parse(s: &str) -> Result<Self, KeyError> {
        let mut chars = s.chars();
        let direction = match chars.next() {
            Some('0') => TraceOrder::Horizontal,
            Some('1') => TraceOrder::Vertical,
            Some(c) if c.is_ascii_digit() => {
                return Err(KeyError(format!("leading digit must be 0 or 1, got '{c}'")))
            }
            Some(c) => return Err(KeyError(format!("non-digit character '{c}'"))),
            None => return Err(KeyError("empty key".into())),
        };
        let shifts = chars
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| KeyError(format!("non-digit character '{c}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if shifts.is_empty() {
            return Err(KeyError(
                "key needs a direction digit and at least one shift digit".into(),
            ));
        }
        Ok(Self {
            direction,
            shifts,
            raw: s.to_owned(),
        })
    }

    pub fn direction(&self) -> TraceOrder {
        self.direction
    }

    pub fn shifts(&self) -> &[u8] {
        &self.shifts
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    /// Shift for the window at `ordinal` within one channel.
    pub fn shift_at(&self, ordinal: usize) -> u8 {
        self.shifts[ordinal % self.shifts.len()]
    }
}

/// The unkeyed scheme: horizontal, shift 0.
impl Default for StegoKey {
    fn default() -> Self {
        Self::parse("00").expect("identity key parses")
    }
}

impl FromStr for StegoKey {
    type Err = KeyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for StegoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

pub fn parse_key(s: &str) -> Result<StegoKey, KeyError> {
    StegoKey::parse(s)
}

pub fn shift_at(key: &StegoKey, ordinal: usize) -> u8 {
    key.shift_at(ordinal)
}

/// Brute-force search space for guessing key positions, as base-10 logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keyspace {
    /// `(32)^(width / 4)`: 16 positions times 2 directions, one factor per
    /// window column.
    pub paper_log10: f64,
    /// `(32)^(windows)` over the full window grid.
    pub full_log10: f64,
}

impl Keyspace {
    /// `paper_log10` as `(mantissa, exponent)` with `1 <= mantissa < 10`.
    pub fn paper_scientific(&self) -> (f64, i64) {
        let exponent = self.paper_log10.floor();
        (10f64.powf(self.paper_log10 - exponent), exponent as i64)
    }
}

pub fn keyspace_log10(cover_width: usize, cover_height: usize) -> Keyspace {
    let per_window = ((2 * WINDOW_CELLS) as f64).log10();
    let columns = cover_width / 4;
    let windows = (cover_width / 4) * (cover_height / 4);
    Keyspace {
        paper_log10: columns as f64 * per_window,
        full_log10: windows as f64 * per_window,
    }
}
