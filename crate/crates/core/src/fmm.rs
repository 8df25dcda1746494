//! Five-modulus quantization and the 52-entry index codebook.
//!
//! Every intensity is snapped to the nearest multiple of 5, which leaves
//! 52 levels (0, 5, ..., 255). Dividing by 5 turns a quantized secret plane
//! into indices 0..=51.

use thiserror::Error;

use crate::imageio::Plane;

pub const MODULUS: u8 = 5;
/// Number of representable quantized levels, 0..=51.
pub const LEVELS: u8 = 52;
pub const MAX_INDEX: u8 = LEVELS - 1;
/// Largest quantized cover value; leaves headroom for a +4 mark.
pub const COVER_CAP: u8 = 250;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FmmError {
    #[error("NotQuantized: value {value} at ({x}, {y}) is not a multiple of 5")]
    NotQuantized { x: usize, y: usize, value: u8 },
    #[error("IndexOutOfRange: index {index} at ({x}, {y}) exceeds 51")]
    IndexOutOfRange { x: usize, y: usize, index: u8 },
    #[error("ExceedsCoverCap: value {value} at ({x}, {y}) exceeds 250")]
    ExceedsCoverCap { x: usize, y: usize, value: u8 },
    #[error("InvalidDimensions: {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
}

/// Nearest multiple of 5: remainders 1 and 2 round down, 3 and 4 round up.
#[inline]
pub fn fmm_round(v: u8) -> u8 {
    let r = v % MODULUS;
    if r <= 2 {
        v - r
    } else {
        // 255 is a multiple of 5, so v + (5 - r) never passes it.
        v + (MODULUS - r)
    }
}

#[inline]
pub fn fmm_round_capped(v: u8) -> u8 {
    fmm_round(v).min(COVER_CAP)
}

/// A plane whose values are all multiples of 5.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FmmPlane {
    width: usize,
    height: usize,
    values: Vec<u8>,
    cover_capped: bool,
}

impl FmmPlane {
    /// Validates an already-quantized plane.
    pub fn from_plane(plane: &Plane, cover_capped: bool) -> Result<Self, FmmError> {
        let width = plane.width();
        for (i, &value) in plane.as_slice().iter().enumerate() {
            let (x, y) = (i % width, i / width);
            if value % MODULUS != 0 {
                return Err(FmmError::NotQuantized { x, y, value });
            }
            if cover_capped && value > COVER_CAP {
                return Err(FmmError::ExceedsCoverCap { x, y, value });
            }
        }
        Ok(Self {
            width,
            height: plane.height(),
            values: plane.as_slice().to_vec(),
            cover_capped,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_cover_capped(&self) -> bool {
        self.cover_capped
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn to_plane(&self) -> Plane {
        Plane::new(self.width, self.height, self.values.clone())
            .expect("FmmPlane dimensions are valid")
    }

    pub fn into_plane(self) -> Plane {
        Plane::new(self.width, self.height, self.values).expect("FmmPlane dimensions are valid")
    }
}

/// Quantizes every value of `plane`. With `cap_for_cover`, 255 becomes 250.
pub fn quantize_plane(plane: &Plane, cap_for_cover: bool) -> FmmPlane {
    let round = if cap_for_cover {
        fmm_round_capped
    } else {
        fmm_round
    };
    FmmPlane {
        width: plane.width(),
        height: plane.height(),
        values: plane.as_slice().iter().map(|&v| round(v)).collect(),
        cover_capped: cap_for_cover,
    }
}

/// A plane of secret-pixel indices in 0..=51.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretIndexPlane {
    width: usize,
    height: usize,
    indices: Vec<u8>,
}

impl SecretIndexPlane {
    pub fn new(width: usize, height: usize, indices: Vec<u8>) -> Result<Self, FmmError> {
        if width == 0 || height == 0 || indices.len() != width * height {
            return Err(FmmError::InvalidDimensions { width, height });
        }
        if let Some(i) = indices.iter().position(|&v| v > MAX_INDEX) {
            return Err(FmmError::IndexOutOfRange {
                x: i % width,
                y: i / width,
                index: indices[i],
            });
        }
        Ok(Self {
            width,
            height,
            indices,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Indices in row-major order.
    pub fn indices(&self) -> &[u8] {
        &self.indices
    }
}

pub fn plane_to_indices(plane: &FmmPlane) -> SecretIndexPlane {
    SecretIndexPlane {
        width: plane.width,
        height: plane.height,
        indices: plane.values.iter().map(|&v| v / MODULUS).collect(),
    }
}

pub fn indices_to_plane(indices: &SecretIndexPlane) -> FmmPlane {
    FmmPlane {
        width: indices.width,
        height: indices.height,
        values: indices.indices.iter().map(|&i| i * MODULUS).collect(),
        cover_capped: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Original and quantized 4x4 blocks from the worked FMM example.
    const ORIGINAL_BLOCK: [u8; 16] = [
        17, 44, 12, 2, //
        37, 87, 101, 207, //
        189, 220, 121, 23, //
        93, 99, 170, 8,
    ];
    const QUANTIZED_BLOCK: [u8; 16] = [
        15, 45, 10, 0, //
        35, 85, 100, 205, //
        190, 220, 120, 25, //
        95, 100, 170, 10,
    ];

    #[test]
    fn worked_block_pairs() {
        for (&v, &q) in ORIGINAL_BLOCK.iter().zip(&QUANTIZED_BLOCK) {
            assert_eq!(fmm_round(v), q, "fmm_round({v})");
        }
        let plane = Plane::new(4, 4, ORIGINAL_BLOCK.to_vec()).unwrap();
        assert_eq!(quantize_plane(&plane, false).values(), &QUANTIZED_BLOCK);
    }

    #[test]
    fn fixed_points() {
        for v in [0, 100, 255] {
            assert_eq!(fmm_round(v), v);
        }
        assert_eq!(fmm_round(17), 15);
        assert_eq!(fmm_round(23), 25);
        assert_eq!(fmm_round(207), 205);
        assert_eq!(fmm_round(8), 10);
    }

    #[test]
    fn exhaustive_error_bound_and_idempotence() {
        for v in 0..=255u8 {
            let q = fmm_round(v);
            assert_eq!(q % 5, 0);
            assert!((v as i16 - q as i16).abs() <= 2, "v={v}");
            assert_eq!(fmm_round(q), q);
        }
    }

    #[test]
    fn exhaustive_cap_behaviour() {
        for v in 0..=255u8 {
            let c = fmm_round_capped(v);
            assert!(c <= COVER_CAP);
            let err = (v as i16 - c as i16).abs();
            assert!(err <= 5);
            if err > 2 {
                assert!(v >= 253, "v={v}");
            }
            if v >= 253 {
                assert_eq!(fmm_round(v), 255);
            }
        }
        let plane = Plane::filled(3, 2, 255).unwrap();
        let q = quantize_plane(&plane, true);
        assert!(q.is_cover_capped());
        assert!(q.values().iter().all(|&v| v == 250));
    }

    #[test]
    fn index_conversion() {
        let plane = Plane::new(5, 1, vec![0, 250, 255, 85, 205]).unwrap();
        let fmm = FmmPlane::from_plane(&plane, false).unwrap();
        let idx = plane_to_indices(&fmm);
        assert_eq!(idx.indices(), &[0, 50, 51, 17, 41]);
        assert_eq!(indices_to_plane(&idx), fmm);
    }

    #[test]
    fn validation_errors() {
        let plane = Plane::new(2, 1, vec![5, 7]).unwrap();
        assert_eq!(
            FmmPlane::from_plane(&plane, false),
            Err(FmmError::NotQuantized {
                x: 1,
                y: 0,
                value: 7
            })
        );
        let plane = Plane::new(1, 1, vec![255]).unwrap();
        assert!(FmmPlane::from_plane(&plane, false).is_ok());
        assert!(matches!(
            FmmPlane::from_plane(&plane, true),
            Err(FmmError::ExceedsCoverCap { .. })
        ));
        assert_eq!(
            SecretIndexPlane::new(2, 1, vec![51, 52]),
            Err(FmmError::IndexOutOfRange {
                x: 1,
                y: 0,
                index: 52
            })
        );
    }
}
