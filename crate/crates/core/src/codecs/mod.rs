//! Encoders and decoders for the line codes: table-driven block codes
//! (5B10B, 4B6B, Manchester) and the stateful 8B10B code.
//!
//! Nearest-codeword ties always resolve to the lowest codeword index, and a
//! block that cannot be corrected still yields that best-guess dataword so
//! bit errors can be counted through detection events.

pub(crate) mod eightb10b;
mod fourb6b;
mod manchester;
mod soft;

pub use eightb10b::{
    decode_8b10b, decode_8b10b_soft, encode_8b10b, encode_byte, eightb10b_codebook, ByteOutcome,
    ByteStatus, RunningDisparity,
};
pub use fourb6b::{decode_4b6b, encode_4b6b, fourb6b_codebook};
pub use manchester::{decode_manchester, encode_manchester, manchester_codebook, Polarity};
pub use soft::SoftDecoder;

use std::fmt;
use std::str::FromStr;

use crate::channel::{EnergyProfile, ModulationMap};
use crate::codebook::{builtin_5b10b, validate_codebook, Codebook, Codeword};
use crate::error::{Error, Result};

/// Chips at channel rate, one `u8` (0 or 1) per chip.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChipStream(Vec<u8>);

impl ChipStream {
    pub fn new(chips: Vec<u8>) -> Result<Self> {
        if let Some(c) = chips.iter().find(|&&c| c > 1) {
            return Err(Error::InvalidCodeword(format!("chip value {c}")));
        }
        Ok(ChipStream(chips))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn push_word(&mut self, cw: &Codeword) {
        self.0.extend(cw.chips());
    }
}

impl fmt::Display for ChipStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            f.write_str(if c == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses '0'/'1' characters, ignoring whitespace.
impl FromStr for ChipStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bits(s).map(ChipStream)
    }
}

/// '0'/'1' string to a bit vector, whitespace ignored.
pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidCodeword(format!("unexpected character {c:?}"))),
        })
        .collect()
}

/// Packs MSB-first groups of `k` bits into integers.
pub fn bits_to_words(bits: &[u8], k: usize) -> Result<Vec<u32>> {
    if k == 0 || bits.len() % k != 0 {
        return Err(Error::NotMultiple {
            len: bits.len(),
            block: k,
        });
    }
    Ok(bits
        .chunks(k)
        .map(|c| c.iter().fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32))
        .collect())
}

pub fn words_to_bits(words: &[u32], k: usize) -> Vec<u8> {
    words
        .iter()
        .flat_map(|&w| (0..k).rev().map(move |b| ((w >> b) & 1) as u8))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    Exact,
    Corrected,
    DetectedUncorrectable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub dataword: u32,
    pub status: DecodeStatus,
    /// Hamming distance from the received block to the chosen codeword.
    pub distance: u32,
}

pub fn encode_block(cb: &Codebook, data: &[u8]) -> Result<ChipStream> {
    let words = bits_to_words(data, cb.k())?;
    let mut out = ChipStream(Vec::with_capacity(words.len() * cb.n()));
    for w in words {
        let cw = cb.encode_word(w).ok_or_else(|| {
            Error::InvalidCodebook(format!("dataword {w} has no codeword"))
        })?;
        out.push_word(&cw);
    }
    Ok(out)
}

/// Minimum-Hamming-distance decoder with correction radius
/// `floor((d_min - 1) / 2)`.
#[derive(Clone, Debug)]
pub struct HardDecoder {
    words: Vec<(u64, u32)>,
    n: usize,
    radius: u32,
}

impl HardDecoder {
    pub fn new(cb: &Codebook) -> Self {
        let report = validate_codebook(cb, None);
        let radius = match report.min_distance {
            Some(d) => d.saturating_sub(1) / 2,
            None => cb.n() as u32,
        };
        HardDecoder {
            words: cb.entries().iter().map(|&(d, cw)| (cw.value(), d)).collect(),
            n: cb.n(),
            radius,
        }
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn decide(&self, received: u64) -> DecodeOutcome {
        let mut best = (u32::MAX, 0u32);
        let mut ties = 0;
        for &(value, data) in &self.words {
            let d = (value ^ received).count_ones();
            if d < best.0 {
                best = (d, data);
                ties = 1;
            } else if d == best.0 {
                ties += 1;
            }
        }
        let (distance, dataword) = best;
        let status = if distance == 0 {
            DecodeStatus::Exact
        } else if ties == 1 && distance <= self.radius {
            DecodeStatus::Corrected
        } else {
            DecodeStatus::DetectedUncorrectable
        };
        DecodeOutcome {
            dataword,
            status,
            distance,
        }
    }

    pub fn decode(&self, chips: &[u8]) -> Result<Vec<DecodeOutcome>> {
        if chips.len() % self.n != 0 {
            return Err(Error::NotMultiple {
                len: chips.len(),
                block: self.n,
            });
        }
        chips
            .chunks(self.n)
            .map(|block| Ok(self.decide(Codeword::from_chips(block)?.value())))
            .collect()
    }
}

pub fn decode_block_hard(cb: &Codebook, chips: &ChipStream) -> Result<Vec<DecodeOutcome>> {
    HardDecoder::new(cb).decode(chips.as_slice())
}

/// Maximum-likelihood block decisions: for each block of received samples,
/// the codeword index whose modulated waveform is nearest in Euclidean
/// distance, and its dataword.
pub fn decode_block_soft(
    cb: &Codebook,
    received: &[f64],
    modulation: &ModulationMap,
) -> Result<Vec<(u32, usize)>> {
    let dec = SoftDecoder::for_codebook(cb, modulation);
    let n = dec.samples_per_block();
    if received.len() % n != 0 {
        return Err(Error::NotMultiple {
            len: received.len(),
            block: n,
        });
    }
    Ok(received
        .chunks(n)
        .map(|y| {
            let i = dec.decide(y);
            (cb.entries()[i].0, i)
        })
        .collect())
}

/// The four line codes compared in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LineCode {
    Manchester,
    FourB6B,
    EightB10B,
    FiveB10B,
}

impl LineCode {
    pub const ALL: [LineCode; 4] = [
        LineCode::Manchester,
        LineCode::FourB6B,
        LineCode::EightB10B,
        LineCode::FiveB10B,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LineCode::Manchester => "manchester",
            LineCode::FourB6B => "4b6b",
            LineCode::EightB10B => "8b10b",
            LineCode::FiveB10B => "5b10b",
        }
    }

    pub fn data_bits(&self) -> usize {
        match self {
            LineCode::Manchester => 1,
            LineCode::FourB6B => 4,
            LineCode::EightB10B => 8,
            LineCode::FiveB10B => 5,
        }
    }

    pub fn code_bits(&self) -> usize {
        match self {
            LineCode::Manchester => 2,
            LineCode::FourB6B => 6,
            LineCode::EightB10B | LineCode::FiveB10B => 10,
        }
    }

    pub fn modulation(&self) -> ModulationMap {
        match self {
            LineCode::FourB6B => ModulationMap::vppm50(),
            _ => ModulationMap::ook(),
        }
    }

    /// Transmitted chips per codeword after modulation.
    pub fn chips_per_symbol(&self) -> usize {
        self.code_bits() * self.modulation().chips_per_coded_bit()
    }

    /// Average ON chips per codeword: 1 for Manchester, 6 for 4B6B on
    /// VPPM (one pulse per coded bit), 5 for 5B10B and for the long-run
    /// disparity-balanced 8B10B stream.
    pub fn energy_profile(&self) -> EnergyProfile {
        let on = match self {
            LineCode::Manchester => 1.0,
            LineCode::FourB6B => 6.0,
            LineCode::EightB10B | LineCode::FiveB10B => 5.0,
        };
        EnergyProfile {
            data_bits: self.data_bits(),
            on_chips_per_symbol: on,
        }
    }

    /// Table form of the code; for 8B10B the table for negative running
    /// disparity.
    pub fn codebook(&self) -> Codebook {
        match self {
            LineCode::Manchester => manchester_codebook(Polarity::default()),
            LineCode::FourB6B => fourb6b_codebook(),
            LineCode::EightB10B => eightb10b_codebook(RunningDisparity::Negative),
            LineCode::FiveB10B => builtin_5b10b(),
        }
    }
}

impl fmt::Display for LineCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LineCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LineCode::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown code {s:?}")))
    }
}
