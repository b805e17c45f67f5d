//! Antenna arrays, ray-based channel synthesis and beam codebooks.

mod array;
mod channel;
mod codebook;

pub use array::{steering_vector, ArrayGeometry};
pub use channel::{synthesize_channel, to_array_frames, ChannelMatrix};
pub use codebook::{
    build_beam_codebook, build_rvq_codebook, max_codebook_bits_from_env, write_codebook_csv, Codebook,
    CodebookKind, DEFAULT_MAX_CODEBOOK_BITS, MAX_CODEBOOK_BITS_ENV,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;
