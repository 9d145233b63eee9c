//! Constant-weight run-length-limited line codes for optical links: codebook
//! construction and checking, encoders and decoders, an AWGN chip channel,
//! analytic bounds and a Monte-Carlo error-rate harness.

pub mod analysis;
pub mod channel;
pub mod codebook;
pub mod codecs;
pub mod error;

pub use codebook::{builtin_5b10b, Codebook, Codeword};
pub use codecs::LineCode;
pub use error::{Error, Result};
pub mod sim;
