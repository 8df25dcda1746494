//! Hide a 24-bit color image inside a larger color image.
//!
//! Both images are quantized to multiples of 5 ([`fmm`]). Every secret
//! pixel then becomes an index in 0..=51, and each index is carried by one
//! 4x4 window of the cover ([`window`]): a single cell is raised by a
//! remainder 1..=4 whose position encodes the index. A decimal stego-key
//! ([`key`]) shifts that position per window. [`pipeline`] runs the scheme
//! over whole images, [`metrics`] measures distortion and [`imageio`] reads
//! and writes BMP/PPM files.

pub mod cli;
pub mod fmm;
pub mod header;
pub mod imageio;
pub mod key;
pub mod metrics;
pub mod pipeline;
pub mod window;

pub use fmm::{
    fmm_round, indices_to_plane, plane_to_indices, quantize_plane, FmmPlane, SecretIndexPlane,
};
pub use header::{build_header, parse_header};
pub use imageio::{read_bmp, read_ppm, write_bmp, write_ppm, Plane, RgbImage};
pub use key::{keyspace_log10, parse_key, shift_at, StegoKey};
pub use metrics::{mse, psnr, quality_report, QualityReport};
pub use pipeline::{capacity, embed_image, extract_image, HeaderMode};
pub use window::{decode_value, embed_value, value_to_mark, TraceOrder};
