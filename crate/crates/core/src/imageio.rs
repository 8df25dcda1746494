//! 24-bit BMP and binary PPM (P6) codecs over a planar RGB raster.
//!
//! Only the uncompressed 24-bit BMP with a 40-byte `BITMAPINFOHEADER` is
//! accepted. The writer always emits bottom-up rows padded to 4 bytes.

use std::path::Path;

use thiserror::Error;

const BMP_FILE_HEADER_SIZE: usize = 14;
const BMP_INFO_HEADER_SIZE: u32 = 40;
const BMP_HEADERS_SIZE: usize = BMP_FILE_HEADER_SIZE + BMP_INFO_HEADER_SIZE as usize;
/// 72 DPI expressed in pixels per metre.
const BMP_RESOLUTION: i32 = 2835;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("NotBmp: missing 'BM' signature")]
    NotBmp,
    #[error("UnsupportedBmp: {0}")]
    UnsupportedBmp(String),
    #[error("NotPpm: {0}")]
    NotPpm(String),
    #[error("UnsupportedMaxval: maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("Truncated: {0}")]
    Truncated(String),
    #[error("InvalidDimensions: {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("UnknownFormat: input is neither BMP nor binary PPM")]
    UnknownFormat,
}

/// A single 8-bit channel stored row-major, top row first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }
}

/// Planar RGB image. All three planes share the same dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    planes: [Plane; 3],
}

impl RgbImage {
    pub fn from_planes(planes: [Plane; 3]) -> Result<Self, ImageError> {
        let (width, height) = (planes[0].width, planes[0].height);
        if planes
            .iter()
            .any(|p| p.width != width || p.height != height)
        {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            planes,
        })
    }

    /// Builds an image by calling `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        let mut r = Vec::with_capacity(width * height);
        let mut g = Vec::with_capacity(width * height);
        let mut b = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let [pr, pg, pb] = f(x, y);
                r.push(pr);
                g.push(pg);
                b.push(pb);
            }
        }
        Self::from_planes([
            Plane::new(width, height, r)?,
            Plane::new(width, height, g)?,
            Plane::new(width, height, b)?,
        ])
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self, ImageError> {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn planes(&self) -> &[Plane; 3] {
        &self.planes
    }

    pub fn plane(&self, channel: usize) -> &Plane {
        &self.planes[channel]
    }

    pub fn into_planes(self) -> [Plane; 3] {
        self.planes
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        [
            self.planes[0].get(x, y),
            self.planes[1].get(x, y),
            self.planes[2].get(x, y),
        ]
    }
}

fn bmp_row_stride(width: usize) -> usize {
    (width * 3 + 3) & !3
}

/// Length in bytes of the file `write_bmp` produces for the given dimensions.
pub fn bmp_file_len(width: usize, height: usize) -> usize {
    BMP_HEADERS_SIZE + height * bmp_row_stride(width)
}

fn le_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn le_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn le_i32(bytes: &[u8], at: usize) -> i32 {
    le_u32(bytes, at) as i32
}

pub fn read_bmp(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    if bytes.len() < 2 || &bytes[..2] != b"BM" {
        return Err(ImageError::NotBmp);
    }
    if bytes.len() < BMP_HEADERS_SIZE {
        return Err(ImageError::Truncated(format!(
            "{} bytes is shorter than the 54-byte BMP headers",
            bytes.len()
        )));
    }

    let pixel_offset = le_u32(bytes, 10) as usize;
    let info_size = le_u32(bytes, 14);
    if info_size != BMP_INFO_HEADER_SIZE {
        return Err(ImageError::UnsupportedBmp(format!(
            "info header size {info_size} (only 40 is supported)"
        )));
    }
    let raw_width = le_i32(bytes, 18);
    let raw_height = le_i32(bytes, 22);
    let color_planes = le_u16(bytes, 26);
    let bit_count = le_u16(bytes, 28);
    let compression = le_u32(bytes, 30);
    if color_planes != 1 {
        return Err(ImageError::UnsupportedBmp(format!(
            "{color_planes} color planes"
        )));
    }
    if bit_count != 24 {
        return Err(ImageError::UnsupportedBmp(format!(
            "bit count {bit_count} (only 24 is supported)"
        )));
    }
    if compression != 0 {
        return Err(ImageError::UnsupportedBmp(format!(
            "compression {compression} (only uncompressed is supported)"
        )));
    }
    if raw_width <= 0 || raw_height == 0 || raw_height == i32::MIN {
        return Err(ImageError::UnsupportedBmp(format!(
            "dimensions {raw_width}x{raw_height}"
        )));
    }
    if pixel_offset < BMP_HEADERS_SIZE {
        return Err(ImageError::UnsupportedBmp(format!(
            "pixel data offset {pixel_offset} overlaps the headers"
        )));
    }

    let width = raw_width as usize;
    let height = raw_height.unsigned_abs() as usize;
    let top_down = raw_height < 0;
    let stride = bmp_row_stride(width);
    // The final row's padding is optional in files written by some encoders.
    let needed = pixel_offset + stride * (height - 1) + width * 3;
    if bytes.len() < needed {
        return Err(ImageError::Truncated(format!(
            "pixel data needs {needed} bytes, file has {}",
            bytes.len()
        )));
    }

    let pixels = &bytes[pixel_offset..];
    RgbImage::from_fn(width, height, |x, y| {
        let stored_row = if top_down { y } else { height - 1 - y };
        let at = stored_row * stride + x * 3;
        // BGR on disk
        [pixels[at + 2], pixels[at + 1], pixels[at]]
    })
}

pub fn write_bmp(img: &RgbImage) -> Vec<u8> {
    let (width, height) = (img.width(), img.height());
    let stride = bmp_row_stride(width);
    let image_size = stride * height;
    let file_size = BMP_HEADERS_SIZE + image_size;

    let mut out = Vec::with_capacity(file_size);
    out.extend_from_slice(b"BM");
    out.extend_from_slice(&(file_size as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 4]);
    out.extend_from_slice(&(BMP_HEADERS_SIZE as u32).to_le_bytes());

    out.extend_from_slice(&BMP_INFO_HEADER_SIZE.to_le_bytes());
    out.extend_from_slice(&(width as i32).to_le_bytes());
    out.extend_from_slice(&(height as i32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(image_size as u32).to_le_bytes());
    out.extend_from_slice(&BMP_RESOLUTION.to_le_bytes());
    out.extend_from_slice(&BMP_RESOLUTION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());

    let padding = stride - width * 3;
    for y in (0..height).rev() {
        for x in 0..width {
            let [r, g, b] = img.pixel(x, y);
            out.extend_from_slice(&[b, g, r]);
        }
        out.extend(std::iter::repeat_n(0u8, padding));
    }
    out
}

/// Cursor over the ASCII part of a PNM header.
struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmHeader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => ImageError::Truncated(format!("header ends before {what}")),
                Some(_) => ImageError::NotPpm(format!("expected {what}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::NotPpm(format!("{what} out of range")))
    }
}

pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(ImageError::NotPpm("missing 'P6' signature".into()));
    }
    let mut header = PnmHeader { bytes, pos: 2 };
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        Some(_) => return Err(ImageError::NotPpm("malformed signature".into())),
        None => return Err(ImageError::Truncated("header ends after signature".into())),
    }
    let width = header.next_number("width")? as usize;
    let height = header.next_number("height")? as usize;
    let maxval = header.next_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::InvalidDimensions { width, height });
    }
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        Some(_) => return Err(ImageError::NotPpm("no whitespace after maxval".into())),
        None => return Err(ImageError::Truncated("no pixel data".into())),
    }
    let body = &bytes[header.pos + 1..];
    let needed = width * height * 3;
    if body.len() < needed {
        return Err(ImageError::Truncated(format!(
            "pixel data needs {needed} bytes, found {}",
            body.len()
        )));
    }
    RgbImage::from_fn(width, height, |x, y| {
        let at = (y * width + x) * 3;
        [body[at], body[at + 1], body[at + 2]]
    })
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.width() * img.height() * 3);
    out.extend_from_slice(header.as_bytes());
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.extend_from_slice(&img.pixel(x, y));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Bmp,
    Ppm,
}

impl ImageFormat {
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        match bytes.get(..2)? {
            b"BM" => Some(Self::Bmp),
            b"P6" => Some(Self::Ppm),
            _ => None,
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "bmp" => Some(Self::Bmp),
            "ppm" | "pnm" => Some(Self::Ppm),
            _ => None,
        }
    }

    pub fn encode(self, img: &RgbImage) -> Vec<u8> {
        match self {
            Self::Bmp => write_bmp(img),
            Self::Ppm => write_ppm(img),
        }
    }
}

/// Decodes either format, chosen by magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    match ImageFormat::sniff(bytes) {
        Some(ImageFormat::Bmp) => read_bmp(bytes),
        Some(ImageFormat::Ppm) => read_ppm(bytes),
        None => Err(ImageError::UnknownFormat),
    }
}
