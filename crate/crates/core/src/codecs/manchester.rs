use super::{ChipStream, DecodeOutcome, DecodeStatus};
use crate::codebook::{Codebook, Codeword};
use crate::error::{Error, Result};

/// Chip pair sent for a data 1. The IEEE 802.15.7 OOK convention is `10`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Polarity {
    #[default]
    OneIsHighLow,
    OneIsLowHigh,
}

impl Polarity {
    fn pair(self, bit: u8) -> [u8; 2] {
        let high_low = (bit == 1) == (self == Polarity::OneIsHighLow);
        if high_low {
            [1, 0]
        } else {
            [0, 1]
        }
    }
}

pub fn manchester_codebook(polarity: Polarity) -> Codebook {
    let entries = (0..2u8)
        .map(|b| (b as u32, Codeword::from_chips(&polarity.pair(b)).unwrap()))
        .collect();
    Codebook::new(1, 2, entries, vec![], Some(1)).expect("valid Manchester table")
}

pub fn encode_manchester(data: &[u8], polarity: Polarity) -> Result<ChipStream> {
    let mut chips = Vec::with_capacity(2 * data.len());
    for &b in data {
        if b > 1 {
            return Err(Error::InvalidCodeword(format!("data bit {b}")));
        }
        chips.extend(polarity.pair(b));
    }
    Ok(ChipStream(chips))
}

/// Per-pair decisions. `00` and `11` are flagged as detected errors and
/// resolved by their first chip: the data bit whose pair starts with it.
pub fn decode_manchester(chips: &ChipStream, polarity: Polarity) -> Result<Vec<DecodeOutcome>> {
    let chips = chips.as_slice();
    if chips.len() % 2 != 0 {
        return Err(Error::NotMultiple {
            len: chips.len(),
            block: 2,
        });
    }
    Ok(chips
        .chunks(2)
        .map(|pair| {
            let bit = (0..2u8).find(|&b| polarity.pair(b)[0] == pair[0]).unwrap();
            if pair[0] != pair[1] {
                DecodeOutcome {
                    dataword: bit as u32,
                    status: DecodeStatus::Exact,
                    distance: 0,
                }
            } else {
                DecodeOutcome {
                    dataword: bit as u32,
                    status: DecodeStatus::DetectedUncorrectable,
                    distance: 1,
                }
            }
        })
        .collect())
}
