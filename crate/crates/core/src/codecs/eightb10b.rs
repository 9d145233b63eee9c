//! 8b/10b data characters (no K-codes): 5b/6b and 3b/4b sub-block tables
//! with running-disparity selection. Byte `HGFEDCBA` is sent as `abcdei fghj`,
//! bits listed in transmission order.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{bits_to_words, ChipStream, SoftDecoder};
use crate::channel::ModulationMap;
use crate::codebook::{Codebook, Codeword};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RunningDisparity {
    #[default]
    Negative,
    Positive,
}

impl RunningDisparity {
    pub(crate) fn index(self) -> usize {
        self as usize
    }

    pub fn flipped(self) -> Self {
        match self {
            RunningDisparity::Negative => RunningDisparity::Positive,
            RunningDisparity::Positive => RunningDisparity::Negative,
        }
    }

    /// Conventional +-1 value.
    pub fn sign(self) -> i32 {
        match self {
            RunningDisparity::Negative => -1,
            RunningDisparity::Positive => 1,
        }
    }
}

// (RD-, RD+) for each 5-bit value EDCBA, bits abcdei.
const SIX: [(&str, &str); 32] = [
    ("100111", "011000"), ("011101", "100010"), ("101101", "010010"), ("110001", "110001"),
    ("110101", "001010"), ("101001", "101001"), ("011001", "011001"), ("111000", "000111"),
    ("111001", "000110"), ("100101", "100101"), ("010101", "010101"), ("110100", "110100"),
    ("001101", "001101"), ("101100", "101100"), ("011100", "011100"), ("010111", "101000"),
    ("011011", "100100"), ("100011", "100011"), ("010011", "010011"), ("110010", "110010"),
    ("001011", "001011"), ("101010", "101010"), ("011010", "011010"), ("111010", "000101"),
    ("110011", "001100"), ("100110", "100110"), ("010110", "010110"), ("110110", "001001"),
    ("001110", "001110"), ("101110", "010001"), ("011110", "100001"), ("101011", "010100"),
];

// (RD-, RD+) for each 3-bit value HGF, bits fghj. Index 7 is the primary P7.
const FOUR: [(&str, &str); 8] = [
    ("1011", "0100"), ("1001", "1001"), ("0101", "0101"), ("1100", "0011"),
    ("1101", "0010"), ("1010", "1010"), ("0110", "0110"), ("1110", "0001"),
];

const A7: (&str, &str) = ("0111", "1000");

fn pick(pair: (&'static str, &'static str), rd: RunningDisparity) -> &'static str {
    match rd {
        RunningDisparity::Negative => pair.0,
        RunningDisparity::Positive => pair.1,
    }
}

/// Disparity after a sub-block: set by its imbalance, or by the balanced
/// `000111`/`0011` (positive) and `111000`/`1100` (negative) forms.
fn disparity_after(block: &str, rd: RunningDisparity) -> RunningDisparity {
    let ones = block.bytes().filter(|&b| b == b'1').count() * 2;
    match ones.cmp(&block.len()) {
        std::cmp::Ordering::Greater => RunningDisparity::Positive,
        std::cmp::Ordering::Less => RunningDisparity::Negative,
        std::cmp::Ordering::Equal => match block {
            "000111" | "0011" => RunningDisparity::Positive,
            "111000" | "1100" => RunningDisparity::Negative,
            _ => rd,
        },
    }
}

fn compose(byte: u8, rd: RunningDisparity) -> (Codeword, RunningDisparity) {
    let x = (byte & 0x1f) as usize;
    let y = (byte >> 5) as usize;
    let six = pick(SIX[x], rd);
    let mid = disparity_after(six, rd);
    let alternate = y == 7
        && match mid {
            RunningDisparity::Negative => matches!(x, 17 | 18 | 20),
            RunningDisparity::Positive => matches!(x, 11 | 13 | 14),
        };
    let four = pick(if alternate { A7 } else { FOUR[y] }, mid);
    let end = disparity_after(four, mid);
    let cw: Codeword = format!("{six}{four}").parse().expect("table entries are binary");
    (cw, end)
}

struct Tables {
    words: [Vec<Codeword>; 2],
    next: [Vec<RunningDisparity>; 2],
    reverse: [HashMap<Codeword, u8>; 2],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let build = |rd: RunningDisparity| {
            let (words, next): (Vec<_>, Vec<_>) = (0..=255u8).map(|b| compose(b, rd)).unzip();
            let reverse = words.iter().enumerate().map(|(b, &cw)| (cw, b as u8)).collect();
            (words, next, reverse)
        };
        let (wn, nn, rn) = build(RunningDisparity::Negative);
        let (wp, np, rp) = build(RunningDisparity::Positive);
        Tables {
            words: [wn, wp],
            next: [nn, np],
            reverse: [rn, rp],
        }
    })
}

pub fn encode_byte(byte: u8, rd: RunningDisparity) -> (Codeword, RunningDisparity) {
    let t = tables();
    (t.words[rd.index()][byte as usize], t.next[rd.index()][byte as usize])
}

/// All 256 data characters for a starting disparity, dataword = byte value.
pub fn eightb10b_codebook(rd: RunningDisparity) -> Codebook {
    let entries = tables().words[rd.index()]
        .iter()
        .enumerate()
        .map(|(b, &cw)| (b as u32, cw))
        .collect();
    Codebook::new(8, 10, entries, vec![], None).expect("8b10b table is a bijection")
}

/// Encodes whole bytes (data length a multiple of 8, MSB first per byte).
pub fn encode_8b10b(data: &[u8], rd: RunningDisparity) -> Result<(ChipStream, RunningDisparity)> {
    let bytes = bits_to_words(data, 8)?;
    let mut rd = rd;
    let mut out = ChipStream(Vec::with_capacity(bytes.len() * 10));
    for b in bytes {
        let (cw, next) = encode_byte(b as u8, rd);
        out.push_word(&cw);
        rd = next;
    }
    Ok((out, rd))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ByteStatus {
    Exact,
    /// A valid character, but only under the opposite running disparity.
    DisparityError,
    /// Not a data character under either disparity; the byte is the nearest
    /// character for the current disparity.
    InvalidCode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ByteOutcome {
    pub byte: u8,
    pub status: ByteStatus,
}

pub fn decode_8b10b(
    chips: &ChipStream,
    rd: RunningDisparity,
) -> Result<(Vec<ByteOutcome>, RunningDisparity)> {
    let chips = chips.as_slice();
    if chips.len() % 10 != 0 {
        return Err(Error::NotMultiple {
            len: chips.len(),
            block: 10,
        });
    }
    let t = tables();
    let mut rd = rd;
    let mut out = Vec::with_capacity(chips.len() / 10);
    for block in chips.chunks(10) {
        let cw = Codeword::from_chips(block)?;
        let (byte, status, table_rd) = if let Some(&b) = t.reverse[rd.index()].get(&cw) {
            (b, ByteStatus::Exact, rd)
        } else if let Some(&b) = t.reverse[rd.flipped().index()].get(&cw) {
            (b, ByteStatus::DisparityError, rd.flipped())
        } else {
            let b = t.words[rd.index()]
                .iter()
                .enumerate()
                .min_by_key(|(i, w)| ((w.value() ^ cw.value()).count_ones(), *i))
                .map(|(i, _)| i as u8)
                .unwrap();
            (b, ByteStatus::InvalidCode, rd)
        };
        rd = t.next[table_rd.index()][byte as usize];
        out.push(ByteOutcome { byte, status });
    }
    Ok((out, rd))
}

/// Maximum-likelihood character decisions among the 256 characters valid for
/// the decoder's running disparity, which it tracks from its own decisions.
pub fn decode_8b10b_soft(
    received: &[f64],
    modulation: &ModulationMap,
    rd: RunningDisparity,
) -> Result<(Vec<u8>, RunningDisparity)> {
    let decoders = soft_decoders(modulation);
    let n = decoders[0].samples_per_block();
    if received.len() % n != 0 {
        return Err(Error::NotMultiple {
            len: received.len(),
            block: n,
        });
    }
    let t = tables();
    let mut rd = rd;
    let mut out = Vec::with_capacity(received.len() / n);
    for y in received.chunks(n) {
        let b = decoders[rd.index()].decide(y);
        out.push(b as u8);
        rd = t.next[rd.index()][b];
    }
    Ok((out, rd))
}

pub(crate) fn soft_decoders(modulation: &ModulationMap) -> [SoftDecoder; 2] {
    [RunningDisparity::Negative, RunningDisparity::Positive]
        .map(|rd| SoftDecoder::for_codebook(&eightb10b_codebook(rd), modulation))
}

pub(crate) fn next_disparity(rd: RunningDisparity, byte: u8) -> RunningDisparity {
    tables().next[rd.index()][byte as usize]
}
