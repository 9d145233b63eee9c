use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("input length {len} is not a multiple of block size {block}")]
    NotMultiple { len: usize, block: usize },

    #[error("invalid codeword: {0}")]
    InvalidCodeword(String),

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("codewords {0} and {1} are at odd Hamming distance {2}; not a constant-weight code")]
    OddDistance(usize, usize, u32),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mapping is not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("no code of size {target} found within the search budget (best size {best})")]
    SearchExhausted { target: usize, best: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    Empty,
}

pub type Result<T> = std::result::Result<T, Error>;
