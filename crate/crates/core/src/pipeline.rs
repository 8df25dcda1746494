//! Whole-image embedding and extraction.
//!
//! Each color channel of the secret is hidden in the same channel of the
//! cover. The cover channel is quantized (capped at 250) and split into a
//! row-major grid of 4x4 windows. Window `k` carries payload digit `k`
//! using shift `key.shift_at(k)`. In headered mode the first ten digits are
//! the payload header; secret indices follow in row-major order.

use std::fmt;

use thiserror::Error;

use crate::fmm::{self, quantize_plane, MODULUS};
use crate::header::{self, HeaderDigits, HeaderError, HEADER_DIGITS};
use crate::imageio::{Plane, RgbImage};
use crate::key::StegoKey;
use crate::window::{self, Window, WindowError, WINDOW_CELLS, WINDOW_SIDE};

pub const CHANNEL_NAMES: [&str; 3] = ["R", "G", "B"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum HeaderMode {
    /// Secret dimensions travel in a ten-window header.
    #[default]
    Headered,
    /// No header; the receiver must know the secret dimensions.
    Raw,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("CoverTooSmall: cover {width}x{height} has no complete 4x4 window")]
    CoverTooSmall { width: usize, height: usize },
    #[error("CapacityExceeded: payload needs {needed} windows per channel, cover has {available}")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("{source} (channel {})", CHANNEL_NAMES[*channel])]
    Header { channel: usize, source: HeaderError },
    #[error("HeaderMismatch: channel headers disagree ({0:?})")]
    HeaderMismatch([(usize, usize); 3]),
    #[error("CorruptWindow: {source} (channel {}, window {ordinal})", CHANNEL_NAMES[*channel])]
    CorruptWindow {
        channel: usize,
        ordinal: usize,
        source: WindowError,
    },
    #[error("MissingDims: raw extraction needs the secret dimensions")]
    MissingDims,
    #[error("InvalidSecret: {0}")]
    InvalidSecret(String),
}

impl PipelineError {
    /// The underlying header error, if this is one.
    pub fn header_error(&self) -> Option<HeaderError> {
        match self {
            Self::Header { source, .. } => Some(*source),
            _ => None,
        }
    }
}

/// Row-major grid of complete 4x4 windows over a cover channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowGrid {
    pub columns: usize,
    pub rows: usize,
}

impl WindowGrid {
    pub fn for_cover(width: usize, height: usize) -> Self {
        Self {
            columns: width / WINDOW_SIDE,
            rows: height / WINDOW_SIDE,
        }
    }

    pub fn len(&self) -> usize {
        self.columns * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Top-left pixel of the window at `ordinal`.
    pub fn origin(&self, ordinal: usize) -> (usize, usize) {
        (
            (ordinal % self.columns) * WINDOW_SIDE,
            (ordinal / self.columns) * WINDOW_SIDE,
        )
    }
}

fn overhead(mode: HeaderMode) -> usize {
    match mode {
        HeaderMode::Headered => HEADER_DIGITS,
        HeaderMode::Raw => 0,
    }
}

/// Largest secret pixel count per channel the cover can hold.
pub fn capacity(cover_width: usize, cover_height: usize, mode: HeaderMode) -> usize {
    WindowGrid::for_cover(cover_width, cover_height)
        .len()
        .saturating_sub(overhead(mode))
}

/// Side of the largest square secret that fits.
pub fn max_square_side(cover_width: usize, cover_height: usize, mode: HeaderMode) -> usize {
    let cap = capacity(cover_width, cover_height, mode);
    let mut side = (cap as f64).sqrt() as usize;
    while side * side > cap {
        side -= 1;
    }
    while (side + 1) * (side + 1) <= cap {
        side += 1;
    }
    side
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedPlan {
    pub cover: (usize, usize),
    pub secret: (usize, usize),
    pub grid: WindowGrid,
    pub mode: HeaderMode,
    /// Payload-carrying windows per channel.
    pub windows_used: usize,
}

impl EmbedPlan {
    pub fn new(
        cover: (usize, usize),
        secret: (usize, usize),
        mode: HeaderMode,
    ) -> Result<Self, PipelineError> {
        let grid = WindowGrid::for_cover(cover.0, cover.1);
        if grid.is_empty() {
            return Err(PipelineError::CoverTooSmall {
                width: cover.0,
                height: cover.1,
            });
        }
        let windows_used = secret.0 * secret.1 + overhead(mode);
        if windows_used > grid.len() {
            return Err(PipelineError::CapacityExceeded {
                needed: windows_used,
                available: grid.len(),
            });
        }
        Ok(Self {
            cover,
            secret,
            grid,
            mode,
            windows_used,
        })
    }
}

fn read_window(plane: &Plane, origin: (usize, usize)) -> Window {
    let mut w = [0u8; WINDOW_CELLS];
    for (i, v) in w.iter_mut().enumerate() {
        *v = plane.get(origin.0 + i % WINDOW_SIDE, origin.1 + i / WINDOW_SIDE);
    }
    w
}

fn write_window(plane: &mut Plane, origin: (usize, usize), w: &Window) {
    for (i, &v) in w.iter().enumerate() {
        plane.set(origin.0 + i % WINDOW_SIDE, origin.1 + i / WINDOW_SIDE, v);
    }
}

/// Quantizes every cover channel with the 250 cap.
pub fn quantize_cover(cover: &RgbImage) -> RgbImage {
    map_planes(cover, |p| quantize_plane(p, true).into_plane())
}

/// What a correct extraction returns for `secret`.
pub fn quantize_secret(secret: &RgbImage) -> RgbImage {
    map_planes(secret, |p| quantize_plane(p, false).into_plane())
}

fn map_planes(img: &RgbImage, f: impl Fn(&Plane) -> Plane) -> RgbImage {
    let [r, g, b] = img.planes();
    RgbImage::from_planes([f(r), f(g), f(b)]).expect("per-plane maps keep dimensions")
}

fn embed_channel(
    cover: &Plane,
    secret: &Plane,
    plan: &EmbedPlan,
    key: &StegoKey,
    channel: usize,
) -> Result<Plane, PipelineError> {
    let mut out = quantize_plane(cover, true).into_plane();
    let indices = fmm::plane_to_indices(&quantize_plane(secret, false));
    let header = match plan.mode {
        HeaderMode::Headered => header::build_header(plan.secret.0, plan.secret.1)
            .map_err(|source| PipelineError::Header { channel, source })?
            .to_vec(),
        HeaderMode::Raw => Vec::new(),
    };
    let digits = header.iter().chain(indices.indices());
    for (ordinal, &digit) in digits.enumerate() {
        let origin = plan.grid.origin(ordinal);
        let marked = window::embed_value(
            &read_window(&out, origin),
            digit,
            key.shift_at(ordinal),
            key.direction(),
        )
        .map_err(|source| PipelineError::CorruptWindow {
            channel,
            ordinal,
            source,
        })?;
        write_window(&mut out, origin, &marked);
    }
    Ok(out)
}

/// Hides `secret` in `cover`. The result has the cover's dimensions.
pub fn embed_image(
    cover: &RgbImage,
    secret: &RgbImage,
    key: &StegoKey,
    mode: HeaderMode,
) -> Result<RgbImage, PipelineError> {
    let plan = EmbedPlan::new(
        (cover.width(), cover.height()),
        (secret.width(), secret.height()),
        mode,
    )?;
    let planes =
        run_per_channel(|c| embed_channel(cover.plane(c), secret.plane(c), &plan, key, c))?;
    Ok(RgbImage::from_planes(planes).expect("channels share cover dimensions"))
}

/// Runs `f` for each channel on its own thread; errors are reported in
/// channel order.
fn run_per_channel<T: Send>(
    f: impl Fn(usize) -> Result<T, PipelineError> + Sync,
) -> Result<[T; 3], PipelineError> {
    let [r, g, b] = std::thread::scope(|s| {
        let handles = [0, 1, 2].map(|c| {
            let f = &f;
            s.spawn(move || f(c))
        });
        handles.map(|h| h.join().expect("channel worker panicked"))
    });
    Ok([r?, g?, b?])
}

fn decode_at(
    carrier: &Plane,
    grid: &WindowGrid,
    key: &StegoKey,
    channel: usize,
    ordinal: usize,
) -> Result<u8, PipelineError> {
    window::decode_value(
        &read_window(carrier, grid.origin(ordinal)),
        key.shift_at(ordinal),
        key.direction(),
    )
    .map_err(|source| PipelineError::CorruptWindow {
        channel,
        ordinal,
        source,
    })
}

fn read_header_channel(
    carrier: &Plane,
    grid: &WindowGrid,
    key: &StegoKey,
    channel: usize,
) -> Result<(usize, usize), PipelineError> {
    if grid.len() < HEADER_DIGITS {
        return Err(PipelineError::CapacityExceeded {
            needed: HEADER_DIGITS,
            available: grid.len(),
        });
    }
    let mut digits: HeaderDigits = [0; HEADER_DIGITS];
    for (ordinal, d) in digits.iter_mut().enumerate() {
        *d = decode_at(carrier, grid, key, channel, ordinal)?;
    }
    header::parse_header(&digits).map_err(|source| PipelineError::Header { channel, source })
}

/// Reads the secret dimensions from the header of all three channels.
pub fn read_header(carrier: &RgbImage, key: &StegoKey) -> Result<(usize, usize), PipelineError> {
    let grid = WindowGrid::for_cover(carrier.width(), carrier.height());
    if grid.is_empty() {
        return Err(PipelineError::CoverTooSmall {
            width: carrier.width(),
            height: carrier.height(),
        });
    }
    let dims = run_per_channel(|c| read_header_channel(carrier.plane(c), &grid, key, c))?;
    if dims.iter().any(|&d| d != dims[0]) {
        return Err(PipelineError::HeaderMismatch(dims));
    }
    Ok(dims[0])
}

/// Recovers the quantized secret from a carrier. `raw_dims` is required in
/// raw mode and ignored in headered mode.
pub fn extract_image(
    carrier: &RgbImage,
    key: &StegoKey,
    mode: HeaderMode,
    raw_dims: Option<(usize, usize)>,
) -> Result<RgbImage, PipelineError> {
    let dims = match mode {
        HeaderMode::Headered => read_header(carrier, key)?,
        HeaderMode::Raw => {
            let (w, h) = raw_dims.ok_or(PipelineError::MissingDims)?;
            if w == 0 || h == 0 {
                return Err(PipelineError::InvalidSecret(format!("dimensions {w}x{h}")));
            }
            (w, h)
        }
    };
    let plan = EmbedPlan::new((carrier.width(), carrier.height()), dims, mode)?;
    let skip = overhead(mode);
    let planes = run_per_channel(|c| {
        let indices = (skip..plan.windows_used)
            .map(|ordinal| decode_at(carrier.plane(c), &plan.grid, key, c, ordinal))
            .collect::<Result<Vec<_>, _>>()?;
        let indices = fmm::SecretIndexPlane::new(dims.0, dims.1, indices)
            .expect("decoded indices are in range");
        Ok(fmm::indices_to_plane(&indices).into_plane())
    })?;
    Ok(RgbImage::from_planes(planes).expect("channels share secret dimensions"))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChannelStats {
    /// Pixels whose value is not a multiple of 5.
    pub marked_pixels: usize,
    /// Complete windows with exactly one marked pixel.
    pub single_mark_windows: usize,
    /// Complete windows with two or more marked pixels.
    pub multi_mark_windows: usize,
    /// Counts of pixels with remainder 1, 2, 3, 4.
    pub remainders: [usize; 4],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InspectReport {
    pub width: usize,
    pub height: usize,
    pub grid: WindowGrid,
    pub channels: [ChannelStats; 3],
    pub header: Result<(usize, usize), PipelineError>,
}

fn channel_stats(plane: &Plane, grid: &WindowGrid) -> ChannelStats {
    let mut stats = ChannelStats::default();
    for &v in plane.as_slice() {
        let r = (v % MODULUS) as usize;
        if r != 0 {
            stats.marked_pixels += 1;
            stats.remainders[r - 1] += 1;
        }
    }
    for ordinal in 0..grid.len() {
        let w = read_window(plane, grid.origin(ordinal));
        match w.iter().filter(|&&v| v % MODULUS != 0).count() {
            0 => {}
            1 => stats.single_mark_windows += 1,
            _ => stats.multi_mark_windows += 1,
        }
    }
    stats
}

/// Summarizes the mod-5 structure of a carrier and tries to read its header.
pub fn inspect(carrier: &RgbImage, key: &StegoKey) -> InspectReport {
    let grid = WindowGrid::for_cover(carrier.width(), carrier.height());
    InspectReport {
        width: carrier.width(),
        height: carrier.height(),
        grid,
        channels: [0, 1, 2].map(|c| channel_stats(carrier.plane(c), &grid)),
        header: read_header(carrier, key),
    }
}

impl fmt::Display for InspectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "image: {}x{}, window grid {}x{} ({} windows per channel)",
            self.width,
            self.height,
            self.grid.columns,
            self.grid.rows,
            self.grid.len()
        )?;
        for (name, s) in CHANNEL_NAMES.iter().zip(&self.channels) {
            writeln!(
                f,
                "channel {name}: marked_pixels={} single_mark_windows={} multi_mark_windows={} \
                 remainders[1,2,3,4]=[{}, {}, {}, {}]",
                s.marked_pixels,
                s.single_mark_windows,
                s.multi_mark_windows,
                s.remainders[0],
                s.remainders[1],
                s.remainders[2],
                s.remainders[3]
            )?;
        }
        match &self.header {
            Ok((w, h)) => write!(f, "header: valid, secret {w}x{h}"),
            Err(e) => write!(f, "header: invalid ({e})"),
        }
    }
}

/// Checks that a carrier plane is quantized outside the given windows.
pub fn is_clean_outside(plane: &Plane, grid: &WindowGrid, used: usize) -> bool {
    let mut marked = vec![false; plane.width() * plane.height()];
    for ordinal in 0..used {
        let (x0, y0) = grid.origin(ordinal);
        for dy in 0..WINDOW_SIDE {
            for dx in 0..WINDOW_SIDE {
                marked[(y0 + dy) * plane.width() + x0 + dx] = true;
            }
        }
    }
    plane
        .as_slice()
        .iter()
        .zip(&marked)
        .all(|(&v, &inside)| inside || v % MODULUS == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::parse_key;
    use proptest::prelude::*;

    fn noise(width: usize, height: usize, seed: u64) -> RgbImage {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        RgbImage::from_fn(width, height, |_, _| {
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 24) as u8
            };
            [next(), next(), next()]
        })
        .unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(512, 512, HeaderMode::Raw), 16384);
        assert_eq!(capacity(512, 512, HeaderMode::Headered), 16374);
        assert_eq!(capacity(4, 4, HeaderMode::Raw), 1);
        assert_eq!(capacity(4, 4, HeaderMode::Headered), 0);
        assert_eq!(capacity(7, 9, HeaderMode::Raw), 2);
        assert_eq!(max_square_side(512, 512, HeaderMode::Raw), 128);
        assert_eq!(max_square_side(512, 512, HeaderMode::Headered), 127);
    }

    #[test]
    fn single_window_hand_trace() {
        let cover = noise(8, 8, 3);
        let secret = RgbImage::filled(1, 1, [85, 85, 85]).unwrap();
        let carrier = embed_image(&cover, &secret, &StegoKey::default(), HeaderMode::Raw).unwrap();
        let quantized = quantize_cover(&cover);
        for c in 0..3 {
            for y in 0..8 {
                for x in 0..8 {
                    let q = quantized.plane(c).get(x, y);
                    let got = carrier.plane(c).get(x, y);
                    // Index 17: part 2 at vertical position 1, i.e. (x=0, y=1).
                    let expected = if (x, y) == (0, 1) { q + 2 } else { q };
                    assert_eq!(got, expected, "channel {c} ({x}, {y})");
                }
            }
        }
        let out = extract_image(
            &carrier,
            &StegoKey::default(),
            HeaderMode::Raw,
            Some((1, 1)),
        );
        assert_eq!(out.unwrap(), secret);
    }

    #[test]
    fn headered_round_trip_with_partial_windows() {
        let cover = noise(23, 18, 7);
        let secret = noise(3, 3, 8);
        let key = parse_key("1791432").unwrap();
        let carrier = embed_image(&cover, &secret, &key, HeaderMode::Headered).unwrap();
        assert_eq!((carrier.width(), carrier.height()), (23, 18));
        let out = extract_image(&carrier, &key, HeaderMode::Headered, None).unwrap();
        assert_eq!(out, quantize_secret(&secret));
        let grid = WindowGrid::for_cover(23, 18);
        for c in 0..3 {
            assert!(is_clean_outside(carrier.plane(c), &grid, 19));
        }
        let report = inspect(&carrier, &key);
        assert_eq!(report.header, Ok((3, 3)));
        for s in &report.channels {
            assert_eq!(s.single_mark_windows, 19);
            assert_eq!(s.marked_pixels, 19);
            assert_eq!(s.multi_mark_windows, 0);
            assert_eq!(s.remainders.iter().sum::<usize>(), 19);
        }
    }

    #[test]
    fn capacity_and_size_errors() {
        let cover = noise(8, 8, 1);
        let key = StegoKey::default();
        assert_eq!(
            embed_image(&cover, &noise(2, 3, 1), &key, HeaderMode::Raw),
            Err(PipelineError::CapacityExceeded {
                needed: 6,
                available: 4
            })
        );
        assert_eq!(
            embed_image(&cover, &noise(1, 1, 1), &key, HeaderMode::Headered),
            Err(PipelineError::CapacityExceeded {
                needed: 11,
                available: 4
            })
        );
        assert!(matches!(
            embed_image(&noise(3, 40, 1), &noise(1, 1, 1), &key, HeaderMode::Raw),
            Err(PipelineError::CoverTooSmall { .. })
        ));
        assert_eq!(
            extract_image(&cover, &key, HeaderMode::Raw, None),
            Err(PipelineError::MissingDims)
        );
        assert!(matches!(
            extract_image(&cover, &key, HeaderMode::Raw, Some((3, 2))),
            Err(PipelineError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn unmarked_carrier_reports_no_mark() {
        let plain = quantize_cover(&noise(16, 16, 5));
        assert!(matches!(
            extract_image(&plain, &StegoKey::default(), HeaderMode::Headered, None),
            Err(PipelineError::CorruptWindow {
                channel: 0,
                ordinal: 0,
                source: WindowError::NoMark
            })
        ));
    }

    #[test]
    fn corrupted_header_digit_is_bad_checksum() {
        let cover = noise(32, 32, 11);
        let secret = noise(4, 4, 12);
        let key = StegoKey::default();
        let carrier = embed_image(&cover, &secret, &key, HeaderMode::Headered).unwrap();
        // Window 4 holds a width digit: move its mark from part 1 to part 2.
        let mut planes = carrier.into_planes();
        let grid = WindowGrid::for_cover(32, 32);
        let origin = grid.origin(4);
        let w = read_window(&planes[1], origin);
        let (cell, part) = window::find_mark(&w).unwrap();
        let mut w2 = w;
        w2[cell.offset()] = w[cell.offset()] - part + part % 4 + 1;
        write_window(&mut planes[1], origin, &w2);
        let tampered = RgbImage::from_planes(planes).unwrap();
        let err = extract_image(&tampered, &key, HeaderMode::Headered, None).unwrap_err();
        assert!(
            matches!(
                err,
                PipelineError::Header {
                    channel: 1,
                    source: HeaderError::BadChecksum { .. }
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn channel_headers_must_agree() {
        let cover = noise(32, 32, 2);
        let key = StegoKey::default();
        let a = embed_image(&cover, &noise(2, 3, 1), &key, HeaderMode::Headered).unwrap();
        let b = embed_image(&cover, &noise(3, 2, 1), &key, HeaderMode::Headered).unwrap();
        let [ar, ag, _] = a.into_planes();
        let [_, _, bb] = b.into_planes();
        let mixed = RgbImage::from_planes([ar, ag, bb]).unwrap();
        assert_eq!(
            read_header(&mixed, &key),
            Err(PipelineError::HeaderMismatch([(2, 3), (2, 3), (3, 2)]))
        );
    }

    #[test]
    fn wrong_shift_on_single_window() {
        let cover = RgbImage::filled(4, 4, [100, 100, 100]).unwrap();
        let secret = RgbImage::filled(1, 1, [85, 5, 200]).unwrap();
        let carrier =
            embed_image(&cover, &secret, &parse_key("07").unwrap(), HeaderMode::Raw).unwrap();
        if let Ok(out) = extract_image(
            &carrier,
            &parse_key("05").unwrap(),
            HeaderMode::Raw,
            Some((1, 1)),
        ) {
            assert_ne!(out, quantize_secret(&secret));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn extract_inverts_embed(
            cw in 4usize..40, ch in 4usize..40,
            seed in any::<u64>(),
            key in "[01][0-9]{1,8}",
            headered in any::<bool>(),
        ) {
            let mode = if headered { HeaderMode::Headered } else { HeaderMode::Raw };
            let cap = capacity(cw, ch, mode);
            prop_assume!(cap >= 1);
            let sw = 1 + (seed as usize % cap.min(12));
            let sh = 1 + (seed >> 16) as usize % (cap / sw);
            let key = parse_key(&key).unwrap();
            let cover = noise(cw, ch, seed);
            let secret = noise(sw, sh, seed ^ 0xABCD);
            let carrier = embed_image(&cover, &secret, &key, mode).unwrap();
            for y in 0..ch {
                for x in 0..cw {
                    for c in 0..3 {
                        let d = (carrier.plane(c).get(x, y) as i16 - cover.plane(c).get(x, y) as i16).abs();
                        prop_assert!(d <= 6);
                    }
                }
            }
            let out = extract_image(&carrier, &key, mode, Some((sw, sh))).unwrap();
            prop_assert_eq!(out, quantize_secret(&secret));
        }
    }
}
