//! Block codebooks: the 5B10B table, codeword geometry and the combinatorial
//! properties every line code in this crate is checked against.

mod search;
mod text;

pub use search::{search_constant_weight_code, SearchParams};
pub use text::parse_codebook;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A fixed-length binary word. Chip 0 is transmitted first and is the
/// leftmost character of the string form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    bits: u64,
    len: u8,
}

impl Codeword {
    pub const MAX_LEN: usize = 64;

    /// Builds a word from its integer value read MSB-first (so `0b10` with
    /// `len = 2` is the chip sequence 1, 0).
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > Self::MAX_LEN {
            return Err(Error::InvalidCodeword(format!("length {len} out of range")));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::InvalidCodeword(format!(
                "value {bits:#b} does not fit in {len} chips"
            )));
        }
        Ok(Codeword { bits, len: len as u8 })
    }

    pub fn from_chips(chips: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        for &c in chips {
            if c > 1 {
                return Err(Error::InvalidCodeword(format!("chip value {c}")));
            }
            bits = (bits << 1) | c as u64;
        }
        Codeword::new(bits, chips.len())
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer value, first chip in the most significant position.
    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn chip(&self, t: usize) -> u8 {
        assert!(t < self.len(), "chip index {t} out of range");
        ((self.bits >> (self.len() - 1 - t)) & 1) as u8
    }

    pub fn chips(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |t| self.chip(t))
    }

    pub fn complement(&self) -> Codeword {
        Codeword {
            bits: !self.bits & mask(self.len()),
            len: self.len,
        }
    }

    pub fn with_flipped(&self, t: usize) -> Codeword {
        assert!(t < self.len(), "chip index {t} out of range");
        Codeword {
            bits: self.bits ^ (1 << (self.len() - 1 - t)),
            len: self.len,
        }
    }

    /// Chip mask with chip `t` stored at bit `t` (LSB = first chip).
    pub(crate) fn chip_mask(&self) -> u64 {
        self.bits.reverse_bits() >> (64 - self.len())
    }
}

pub(crate) fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.chips() {
            f.write_str(if c == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chips = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidCodeword(format!("unexpected character {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Codeword::from_chips(&chips)
    }
}

pub fn hamming_distance(a: &Codeword, b: &Codeword) -> Result<u32> {
    if a.len != b.len {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok((a.bits ^ b.bits).count_ones())
}

/// Ordered mapping from `k`-bit datawords to `n`-chip codewords, plus
/// optional control symbols outside the data alphabet.
///
/// Entry position is the codeword index; the dataword stored with it is the
/// label. `Codebook::new` enforces the bijection, `from_parts` does not so
/// that damaged tables can still be inspected with [`validate_codebook`].
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    k: usize,
    n: usize,
    entries: Vec<(u32, Codeword)>,
    control: Vec<Codeword>,
    constant_weight: Option<u32>,
    lookup: Vec<Option<usize>>,
}

impl Codebook {
    pub fn new(
        k: usize,
        n: usize,
        entries: Vec<(u32, Codeword)>,
        control: Vec<Codeword>,
        constant_weight: Option<u32>,
    ) -> Result<Self> {
        let cb = Self::from_parts(k, n, entries, control, constant_weight)?;
        let report = validate_codebook(&cb, None);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidCodebook(v.to_string()));
        }
        Ok(cb)
    }

    /// Shape checks only: word lengths and dataword range.
    pub fn from_parts(
        k: usize,
        n: usize,
        entries: Vec<(u32, Codeword)>,
        control: Vec<Codeword>,
        constant_weight: Option<u32>,
    ) -> Result<Self> {
        if k > 24 {
            return Err(Error::InvalidCodebook(format!("k = {k} is too large")));
        }
        if n == 0 || n > Codeword::MAX_LEN {
            return Err(Error::InvalidCodebook(format!("n = {n} out of range")));
        }
        let mut lookup = vec![None; 1 << k];
        for (pos, (data, cw)) in entries.iter().enumerate() {
            if cw.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: cw.len(),
                });
            }
            let slot = lookup.get_mut(*data as usize).ok_or_else(|| {
                Error::InvalidCodebook(format!("dataword {data} does not fit in {k} bits"))
            })?;
            if slot.is_none() {
                *slot = Some(pos);
            }
        }
        if let Some(cw) = control.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: cw.len(),
            });
        }
        Ok(Codebook {
            k,
            n,
            entries,
            control,
            constant_weight,
            lookup,
        })
    }

    /// Codebook with datawords `0..words.len()` assigned in order.
    pub fn from_words(k: usize, n: usize, words: &[&str], control: &[&str]) -> Result<Self> {
        let entries = words
            .iter()
            .enumerate()
            .map(|(i, w)| Ok((i as u32, w.parse()?)))
            .collect::<Result<Vec<_>>>()?;
        let control = control.iter().map(|w| w.parse()).collect::<Result<Vec<_>>>()?;
        let weight = common_weight(entries.iter().map(|e| &e.1).chain(control.iter()));
        Codebook::new(k, n, entries, control, weight)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, Codeword)] {
        &self.entries
    }

    pub fn codewords(&self) -> impl Iterator<Item = &Codeword> + '_ {
        self.entries.iter().map(|e| &e.1)
    }

    pub fn control_symbols(&self) -> &[Codeword] {
        &self.control
    }

    pub fn constant_weight(&self) -> Option<u32> {
        self.constant_weight
    }

    /// Entry position holding `dataword`.
    pub fn position_of(&self, dataword: u32) -> Option<usize> {
        self.lookup.get(dataword as usize).copied().flatten()
    }

    pub fn encode_word(&self, dataword: u32) -> Option<Codeword> {
        self.position_of(dataword).map(|p| self.entries[p].1)
    }

    /// Same codewords relabelled: position `p` receives dataword `labels[p]`.
    pub fn relabeled(&self, labels: &[u32]) -> Result<Self> {
        if labels.len() != self.entries.len() {
            return Err(Error::LengthMismatch {
                expected: self.entries.len(),
                actual: labels.len(),
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(labels)
            .map(|(&(_, cw), &l)| (l, cw))
            .collect();
        Codebook::new(self.k, self.n, entries, self.control.clone(), self.constant_weight)
    }
}

fn common_weight<'a>(mut words: impl Iterator<Item = &'a Codeword>) -> Option<u32> {
    let w = words.next()?.weight();
    words.all(|c| c.weight() == w).then_some(w)
}

const TABLE_5B10B: [&str; 32] = [
    "1100110001", "1110001001", "1110010010", "0100011011", "1101000101", "1100011100",
    "1100100110", "1101001010", "1001010011", "1011011000", "1010100011", "1000111010",
    "1001110100", "1010010101", "1011000110", "1010101100", "0111010001", "0101111000",
    "0101100011", "0110101010", "0110110100", "0100101101", "0101010110", "0111001100",
    "1001101001", "0010111001", "0011110010", "0011001011", "0011100101", "0001011101",
    "0001101110", "0010011110",
];

const CONTROL_5B10B: [&str; 4] = ["0000110111", "0110000111", "1000001111", "1111100000"];

/// The 5B10B code: 32 weight-5 codewords of length 10 at minimum distance 4,
/// with four extra weight-5 words reserved as control (comma) symbols.
pub fn builtin_5b10b() -> Codebook {
    Codebook::from_words(5, 10, &TABLE_5B10B, &CONTROL_5B10B).expect("5B10B table is valid")
}

/// Neighbour counts by half-distance: `per_codeword[i][r - 1]` is the number
/// of codewords at Hamming distance `2r` from codeword `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSpectrum {
    pub per_codeword: Vec<Vec<u32>>,
    pub average: Vec<f64>,
}

impl DistanceSpectrum {
    /// Ordered-pair totals `sum_i A[i][r]`.
    pub fn totals(&self) -> Vec<u64> {
        let width = self.average.len();
        (0..width)
            .map(|r| self.per_codeword.iter().map(|row| row[r] as u64).sum())
            .collect()
    }
}

pub fn distance_spectrum(cb: &Codebook) -> Result<DistanceSpectrum> {
    let words: Vec<Codeword> = cb.codewords().copied().collect();
    let half = cb.n() / 2;
    let mut per_codeword = vec![vec![0u32; half]; words.len()];
    for (i, a) in words.iter().enumerate() {
        for (j, b) in words.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = hamming_distance(a, b)?;
            if d % 2 == 1 {
                return Err(Error::OddDistance(i, j, d));
            }
            if d == 0 {
                return Err(Error::InvalidCodebook(format!(
                    "codewords {i} and {j} are identical"
                )));
            }
            per_codeword[i][(d / 2 - 1) as usize] += 1;
        }
    }
    let m = words.len().max(1) as f64;
    let average = (0..half)
        .map(|r| per_codeword.iter().map(|row| row[r] as f64).sum::<f64>() / m)
        .collect();
    Ok(DistanceSpectrum {
        per_codeword,
        average,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunWitness {
    pub first: Codeword,
    pub second: Codeword,
    pub run: u32,
    pub bit: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLengthReport {
    /// Longest run of identical chips over every data codeword and every
    /// ordered concatenation of two data codewords (a word with itself
    /// included).
    pub max_run: u32,
    pub witnesses: Vec<RunWitness>,
    /// Same scan over concatenations involving at least one control symbol.
    pub control_max_run: Option<u32>,
}

/// Longest runs of zeros and of ones in `len` chips (first chip at the MSB).
pub(crate) fn longest_runs(bits: u128, len: usize) -> [u32; 2] {
    let mut best = [0u32; 2];
    let mut cur = 0u32;
    let mut prev = 2u8;
    for t in (0..len).rev() {
        let b = ((bits >> t) & 1) as u8;
        cur = if b == prev { cur + 1 } else { 1 };
        prev = b;
        best[b as usize] = best[b as usize].max(cur);
    }
    best
}

pub(crate) fn concat_runs(a: &Codeword, b: &Codeword) -> [u32; 2] {
    let bits = ((a.value() as u128) << b.len()) | b.value() as u128;
    longest_runs(bits, a.len() + b.len())
}

pub fn max_run_length(cb: &Codebook) -> RunLengthReport {
    let words: Vec<Codeword> = cb.codewords().copied().collect();
    let mut max_run = 0;
    let mut witnesses = Vec::new();
    for a in &words {
        for b in &words {
            let runs = concat_runs(a, b);
            for bit in 0..2u8 {
                let run = runs[bit as usize];
                if run > max_run {
                    max_run = run;
                    witnesses.clear();
                }
                if run == max_run {
                    witnesses.push(RunWitness {
                        first: *a,
                        second: *b,
                        run,
                        bit,
                    });
                }
            }
        }
    }

    let control = cb.control_symbols();
    let control_max_run = (!control.is_empty()).then(|| {
        let all: Vec<&Codeword> = words.iter().chain(control.iter()).collect();
        let mut best = 0;
        for a in &all {
            for b in &all {
                if control.contains(a) || control.contains(b) {
                    let r = concat_runs(a, b);
                    best = best.max(r[0]).max(r[1]);
                }
            }
        }
        best
    });

    RunLengthReport {
        max_run,
        witnesses,
        control_max_run,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EntryCount { expected: usize, actual: usize },
    MissingDataword(u32),
    DuplicateDataword(u32),
    DuplicateCodeword { first: usize, second: usize },
    Weight { codeword: Codeword, expected: u32, actual: u32 },
    MinDistance { declared: u32, measured: u32 },
    ControlIsDataCodeword(Codeword),
    DuplicateControl(Codeword),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EntryCount { expected, actual } => {
                write!(f, "expected {expected} entries, found {actual}")
            }
            Violation::MissingDataword(d) => write!(f, "dataword {d} has no codeword"),
            Violation::DuplicateDataword(d) => write!(f, "dataword {d} assigned more than once"),
            Violation::DuplicateCodeword { first, second } => {
                write!(f, "entries {first} and {second} share a codeword")
            }
            Violation::Weight {
                codeword,
                expected,
                actual,
            } => write!(f, "codeword {codeword} has weight {actual}, expected {expected}"),
            Violation::MinDistance { declared, measured } => {
                write!(f, "minimum distance {measured} is below declared {declared}")
            }
            Violation::ControlIsDataCodeword(c) => {
                write!(f, "control symbol {c} is also a data codeword")
            }
            Violation::DuplicateControl(c) => write!(f, "control symbol {c} listed twice"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Minimum pairwise distance over data codewords (`None` below two words).
    pub min_distance: Option<u32>,
    /// Common weight of data and control words, if there is one.
    pub weight: Option<u32>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_codebook(cb: &Codebook, declared_min_distance: Option<u32>) -> ValidationReport {
    let mut violations = Vec::new();
    let expected = 1usize << cb.k();
    if cb.len() != expected {
        violations.push(Violation::EntryCount {
            expected,
            actual: cb.len(),
        });
    }

    let mut seen = vec![0u32; expected];
    for &(d, _) in cb.entries() {
        seen[d as usize] += 1;
    }
    for (d, &count) in seen.iter().enumerate() {
        match count {
            0 => violations.push(Violation::MissingDataword(d as u32)),
            1 => {}
            _ => violations.push(Violation::DuplicateDataword(d as u32)),
        }
    }

    let words: Vec<Codeword> = cb.codewords().copied().collect();
    let mut min_distance: Option<u32> = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = (words[i].value() ^ words[j].value()).count_ones();
            if d == 0 {
                violations.push(Violation::DuplicateCodeword { first: i, second: j });
            }
            min_distance = Some(min_distance.map_or(d, |m| m.min(d)));
        }
    }

    if let Some(w) = cb.constant_weight() {
        for cw in words.iter().chain(cb.control_symbols()) {
            if cw.weight() != w {
                violations.push(Violation::Weight {
                    codeword: *cw,
                    expected: w,
                    actual: cw.weight(),
                });
            }
        }
    }

    if let (Some(declared), Some(measured)) = (declared_min_distance, min_distance) {
        if measured < declared {
            violations.push(Violation::MinDistance { declared, measured });
        }
    }

    for (i, c) in cb.control_symbols().iter().enumerate() {
        if words.contains(c) {
            violations.push(Violation::ControlIsDataCodeword(*c));
        }
        if cb.control_symbols()[..i].contains(c) {
            violations.push(Violation::DuplicateControl(*c));
        }
    }

    ValidationReport {
        violations,
        min_distance,
        weight: common_weight(words.iter().chain(cb.control_symbols())),
    }
}
