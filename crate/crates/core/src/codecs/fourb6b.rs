use super::{decode_block_hard, encode_block, ChipStream, DecodeOutcome};
use crate::codebook::{parse_codebook, Codebook};
use crate::error::Result;

pub(crate) const TABLE_4B6B: &str = include_str!("../../tables/4b6b.txt");

pub fn fourb6b_codebook() -> Codebook {
    let cb = parse_codebook(TABLE_4B6B).expect("embedded 4B6B table parses");
    Codebook::new(cb.k(), cb.n(), cb.entries().to_vec(), vec![], cb.constant_weight())
        .expect("embedded 4B6B table is valid")
}

pub fn encode_4b6b(data: &[u8]) -> Result<ChipStream> {
    encode_block(&fourb6b_codebook(), data)
}

pub fn decode_4b6b(chips: &ChipStream) -> Result<Vec<DecodeOutcome>> {
    decode_block_hard(&fourb6b_codebook(), chips)
}
