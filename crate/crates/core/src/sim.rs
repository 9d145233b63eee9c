//! Monte-Carlo symbol and bit error rates over the AWGN chip channel.
//!
//! Each Eb/N0 point is split into fixed-size blocks of codewords. Block `b`
//! of point `p` draws its data and noise from ChaCha8 seeded with the master
//! seed on stream `(p << 32) | b`, and block counts are folded in block order
//! until the bit-error budget is reached. The result therefore depends only
//! on the configuration, not on how many threads or shards computed it.

use std::fmt;
use std::io::{self, Write};
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::analysis::{ber_bounds, q_function, BoundCurve, BoundPoint};
use crate::channel::{db_to_linear, eb_n0_to_sigma, ModulationKind, ModulationMap};
use crate::codebook::Codebook;
use crate::codecs::eightb10b::next_disparity;
use crate::codecs::{eightb10b_codebook, HardDecoder, LineCode, RunningDisparity, SoftDecoder};
use crate::error::{Error, Result};

/// Version of the CSV layouts written by this module.
pub const CSV_SCHEMA: u32 = 1;
pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_MAX_BIT_ERRORS: u64 = 200;
pub const DEFAULT_BLOCK_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Decoder {
    /// Maximum-likelihood decision on the received samples.
    #[default]
    Soft,
    /// Threshold each chip (or compare the two chips of a VPPM symbol), then
    /// nearest codeword in Hamming distance; ties and detected errors resolve
    /// to the lowest-index candidate.
    Hard,
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Soft => "soft",
            Decoder::Hard => "hard",
        })
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soft" => Ok(Decoder::Soft),
            "hard" => Ok(Decoder::Hard),
            other => Err(Error::InvalidParameter(format!(
                "unknown decoder '{other}' (expected soft or hard)"
            ))),
        }
    }
}

struct LinkState {
    /// ON samples of the modulated codeword for each dataword.
    tx: Vec<u64>,
    next: Vec<u8>,
    soft: SoftDecoder,
    hard: HardDecoder,
}

/// Transmit/receive model of one line code: per encoder state, the modulated
/// waveform of every dataword and the decoders for that state. 8B10B has one
/// state per running disparity, the block codes a single state.
pub struct Link {
    code: LineCode,
    modulation: ModulationMap,
    states: Vec<LinkState>,
    samples: usize,
    n: usize,
}

impl Link {
    /// Link with levels `(0, alpha sqrt(pulse_energy))` at the receiver.
    pub fn new(code: LineCode, pulse_energy: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let modulation = ModulationMap::with_pulse_energy(code.modulation().kind, pulse_energy)?;
        let tables: Vec<Codebook> = match code {
            LineCode::EightB10B => vec![
                eightb10b_codebook(RunningDisparity::Negative),
                eightb10b_codebook(RunningDisparity::Positive),
            ],
            _ => vec![code.codebook()],
        };
        let mut samples = 0;
        let mut states = Vec::with_capacity(tables.len());
        for (s, cb) in tables.iter().enumerate() {
            let m = 1usize << cb.k();
            let mut tx = Vec::with_capacity(m);
            let mut next = Vec::with_capacity(m);
            for d in 0..m as u32 {
                let cw = cb.encode_word(d).ok_or_else(|| {
                    Error::InvalidCodebook(format!("{code} has no codeword for dataword {d}"))
                })?;
                let (mask, len) = modulation.on_pattern(&cw);
                samples = len;
                tx.push(mask);
                next.push(match code {
                    LineCode::EightB10B => {
                        let rd = if s == 0 { RunningDisparity::Negative } else { RunningDisparity::Positive };
                        next_disparity(rd, d as u8).index() as u8
                    }
                    _ => 0,
                });
            }
            let soft = SoftDecoder::new(
                tx.clone(),
                samples,
                alpha * modulation.off_level,
                alpha * modulation.on_level,
            );
            states.push(LinkState {
                tx,
                next,
                soft,
                hard: HardDecoder::new(cb),
            });
        }
        Ok(Link {
            code,
            modulation: ModulationMap::new(
                modulation.kind,
                alpha * modulation.off_level,
                alpha * modulation.on_level,
            )?,
            states,
            samples,
            n: code.code_bits(),
        })
    }

    pub fn code(&self) -> LineCode {
        self.code
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples
    }

    fn hard_decide(&self, state: usize, y: &[f64]) -> u32 {
        let m = &self.modulation;
        let threshold = 0.5 * (m.off_level + m.on_level);
        let mut value = 0u64;
        for t in 0..self.n {
            let bit = match m.kind {
                ModulationKind::Ook => y[t] > threshold,
                ModulationKind::Vppm50 => y[2 * t] > y[2 * t + 1],
            };
            value = (value << 1) | bit as u64;
        }
        if self.code == LineCode::Manchester {
            // 11 and 00 are both one chip away from either symbol; the
            // first chip decides, as in the table decoder.
            return (value >> 1) as u32;
        }
        self.states[state].hard.decide(value).dataword
    }

    /// Sends `symbols` random datawords starting from the initial encoder
    /// state and counts decoding errors.
    pub fn run_block<R: Rng + ?Sized>(
        &self,
        symbols: u64,
        sigma: f64,
        decoder: Decoder,
        rng: &mut R,
    ) -> BlockCounts {
        let mut y = vec![0.0; self.samples];
        let (lo, hi) = (self.modulation.off_level, self.modulation.on_level);
        let mask = (self.states[0].tx.len() - 1) as u32;
        let (mut tx_state, mut rx_state) = (0usize, 0usize);
        let mut counts = BlockCounts {
            symbols,
            ..BlockCounts::default()
        };
        for _ in 0..symbols {
            let d = rng.random::<u32>() & mask;
            let on = self.states[tx_state].tx[d as usize];
            for (t, v) in y.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(rng);
                *v = if (on >> t) & 1 == 1 { hi } else { lo } + sigma * z;
            }
            let decided = match decoder {
                Decoder::Soft => self.states[rx_state].soft.decide(&y) as u32,
                Decoder::Hard => self.hard_decide(rx_state, &y),
            };
            if decided != d {
                counts.symbol_errors += 1;
                counts.bit_errors += (decided ^ d).count_ones() as u64;
            }
            tx_state = self.states[tx_state].next[d as usize] as usize;
            rx_state = self.states[rx_state].next[decided as usize] as usize;
        }
        counts
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlockCounts {
    pub symbols: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub code: LineCode,
    pub eb_n0_db: Vec<f64>,
    /// Codewords per point unless the bit-error budget stops it earlier.
    pub trials: u64,
    pub seed: u64,
    pub max_bit_errors: Option<u64>,
    pub decoder: Decoder,
    pub block_size: usize,
    pub alpha: f64,
    pub pulse_energy: f64,
}

impl SweepConfig {
    pub fn new(code: LineCode, eb_n0_db: Vec<f64>) -> Self {
        SweepConfig {
            code,
            eb_n0_db,
            trials: DEFAULT_TRIALS,
            seed: 0,
            max_bit_errors: Some(DEFAULT_MAX_BIT_ERRORS),
            decoder: Decoder::Soft,
            block_size: DEFAULT_BLOCK_SIZE,
            alpha: 1.0,
            pulse_energy: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        if self.eb_n0_db.is_empty() {
            return Err(Error::InvalidParameter("no Eb/N0 points given".into()));
        }
        if let Some(db) = self.eb_n0_db.iter().find(|db| !db.is_finite()) {
            return Err(Error::InvalidParameter(format!("Eb/N0 {db} dB is not finite")));
        }
        if self.block_size == 0 {
            return Err(Error::InvalidParameter("block size must be positive".into()));
        }
        if self.eb_n0_db.len() > u32::MAX as usize || self.trials.div_ceil(self.block_size as u64) > u32::MAX as u64 {
            return Err(Error::InvalidParameter("too many points or blocks".into()));
        }
        if !(self.alpha > 0.0) || !(self.pulse_energy > 0.0) {
            return Err(Error::InvalidParameter("alpha and pulse energy must be positive".into()));
        }
        Ok(())
    }

    fn blocks(&self) -> u64 {
        self.trials.div_ceil(self.block_size as u64)
    }

    /// Noise standard deviation at a point, with Eb measured at the receiver.
    pub fn sigma(&self, eb_n0_db: f64) -> Result<f64> {
        let received = self.alpha * self.alpha * self.pulse_energy;
        Ok(eb_n0_to_sigma(&self.code.energy_profile(), received, eb_n0_db, self.seed)?.1.sigma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub eb_n0_db: f64,
    pub symbols_sent: u64,
    pub symbol_errors: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ser: f64,
    pub ber: f64,
    pub union_bound_ser: f64,
    /// `ser / k` and `ser`: the bit error rate must lie between them.
    pub ber_lower: f64,
    pub ber_upper: f64,
    pub stopped_early: bool,
    /// Seconds spent on the point; not part of the deterministic output.
    pub wallclock: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
}

/// Counts for blocks `blocks` of point `point`; the unit of work a shard
/// executes. Concatenating shard outputs in block order reproduces a full run.
pub fn simulate_blocks(
    link: &Link,
    cfg: &SweepConfig,
    point: usize,
    blocks: Range<u64>,
) -> Result<Vec<BlockCounts>> {
    let sigma = cfg.sigma(cfg.eb_n0_db[point])?;
    let total = cfg.trials;
    let size = cfg.block_size as u64;
    Ok(blocks
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((point as u64) << 32) | b);
            let symbols = size.min(total.saturating_sub(b * size));
            link.run_block(symbols, sigma, cfg.decoder, &mut rng)
        })
        .collect())
}

/// Folds block counts in order, stopping after the first block at which the
/// cumulative bit errors reach `max_bit_errors`. Returns the totals and
/// whether the budget stopped the fold.
pub fn aggregate(blocks: &[BlockCounts], max_bit_errors: Option<u64>) -> (BlockCounts, bool) {
    let mut acc = BlockCounts::default();
    for b in blocks {
        acc.symbols += b.symbols;
        acc.symbol_errors += b.symbol_errors;
        acc.bit_errors += b.bit_errors;
        if max_bit_errors.is_some_and(|m| acc.bit_errors >= m) {
            return (acc, true);
        }
    }
    (acc, false)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let link = Link::new(cfg.code, cfg.pulse_energy, cfg.alpha)?;
    let k = cfg.code.data_bits();
    let wave = (rayon::current_num_threads() * 4).max(1) as u64;
    let mut points = Vec::with_capacity(cfg.eb_n0_db.len());

    for (p, &db) in cfg.eb_n0_db.iter().enumerate() {
        let start = Instant::now();
        let mut counts = Vec::new();
        let mut next = 0;
        let (totals, stopped) = loop {
            let end = (next + wave).min(cfg.blocks());
            counts.extend(simulate_blocks(&link, cfg, p, next..end)?);
            next = end;
            let (totals, stopped) = aggregate(&counts, cfg.max_bit_errors);
            if stopped || next == cfg.blocks() {
                break (totals, stopped);
            }
        };
        let ser = totals.symbol_errors as f64 / totals.symbols as f64;
        let bits = totals.symbols * k as u64;
        let (ber_lower, ber_upper) = ber_bounds(ser, k);
        points.push(SweepPoint {
            eb_n0_db: db,
            symbols_sent: totals.symbols,
            symbol_errors: totals.symbol_errors,
            bits_sent: bits,
            bit_errors: totals.bit_errors,
            ser,
            ber: totals.bit_errors as f64 / bits as f64,
            union_bound_ser: union_bound(cfg.code, db),
            ber_lower,
            ber_upper,
            stopped_early: stopped,
            wallclock: start.elapsed().as_secs_f64(),
        });
    }
    Ok(SweepResult {
        config: cfg.clone(),
        points,
    })
}

/// Average number of neighbours at each Hamming distance between modulated
/// codewords (index = distance in samples), over the code's encoder states.
pub fn distance_profile(code: LineCode) -> Vec<f64> {
    let link = Link::new(code, 1.0, 1.0).expect("unit link");
    let mut hist = vec![0.0; link.samples + 1];
    for s in &link.states {
        let m = s.tx.len() as f64 * link.states.len() as f64;
        for &a in &s.tx {
            for &b in &s.tx {
                if a != b {
                    hist[(a ^ b).count_ones() as usize] += 1.0 / m;
                }
            }
        }
    }
    hist
}

/// Union bound on the ML symbol error probability: the pairwise error of two
/// waveforms `d` samples apart is `Q(sqrt(d eps / (2 N0)))`. For 8B10B the
/// decoder is assumed to know the running disparity and the two tables are
/// weighted equally.
pub fn union_bound(code: LineCode, eb_n0_db: f64) -> f64 {
    let es_n0 = db_to_linear(eb_n0_db) / code.energy_profile().eb_per_pulse();
    distance_profile(code)
        .iter()
        .enumerate()
        .map(|(d, &a)| a * q_function((d as f64 * es_n0 / 2.0).sqrt()))
        .sum()
}

pub fn bound_curve(code: LineCode, eb_n0_db: &[f64]) -> BoundCurve {
    let points = eb_n0_db
        .iter()
        .map(|&db| {
            let pe = union_bound(code, db);
            let (ber_lower, ber_upper) = ber_bounds(pe, code.data_bits());
            BoundPoint {
                eb_n0_db: db,
                ser_upper_bound: pe,
                ber_lower,
                ber_upper,
            }
        })
        .collect();
    BoundCurve { points }
}

/// Noiseless modulated waveform (levels 0 and 1) of `codewords` random
/// datawords; 8B10B follows its running disparity from RD-.
pub fn code_waveform(code: LineCode, codewords: usize, seed: u64) -> Vec<f64> {
    let link = Link::new(code, 1.0, 1.0).expect("unit link");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = (link.states[0].tx.len() - 1) as u32;
    let mut out = Vec::with_capacity(codewords * link.samples);
    let mut state = 0;
    for _ in 0..codewords {
        let d = (rng.random::<u32>() & mask) as usize;
        let on = link.states[state].tx[d];
        out.extend((0..link.samples).map(|t| ((on >> t) & 1) as f64));
        state = link.states[state].next[d] as usize;
    }
    out
}

fn tool_line(kind: &str, meta: &[(&str, String)]) -> String {
    let mut s = format!(
        "# linecode {} csv-schema {CSV_SCHEMA} {kind}",
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in meta {
        s.push_str(&format!(" {k}={v}"));
    }
    s
}

/// Writes a sweep as CSV: one metadata comment line, a header row, and a row
/// per point. `wallclock` is appended only on request since it is the one
/// field that varies between identical runs.
pub fn write_sweep_csv<W: Write>(out: &mut W, result: &SweepResult, wallclock: bool) -> io::Result<()> {
    let c = &result.config;
    let max = c.max_bit_errors.map_or("none".to_string(), |m| m.to_string());
    let uncorrectable = match c.decoder {
        Decoder::Soft => "ml-decision",
        Decoder::Hard => "best-guess-lowest-index",
    };
    writeln!(
        out,
        "{}",
        tool_line(
            "simulate",
            &[
                ("code", c.code.to_string()),
                ("decoder", c.decoder.to_string()),
                ("seed", c.seed.to_string()),
                ("trials", c.trials.to_string()),
                ("max_bit_errors", max),
                ("block_size", c.block_size.to_string()),
                ("alpha", c.alpha.to_string()),
                ("pulse_energy", c.pulse_energy.to_string()),
                ("eb_per_pulse", c.code.energy_profile().eb_per_pulse().to_string()),
                ("uncorrectable", uncorrectable.to_string()),
            ],
        )
    )?;
    write!(
        out,
        "eb_n0_db,symbols_sent,symbol_errors,bits_sent,bit_errors,ser,ber,union_bound_ser,ber_lower,ber_upper,stopped_early"
    )?;
    writeln!(out, "{}", if wallclock { ",wallclock" } else { "" })?;
    for p in &result.points {
        write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.eb_n0_db,
            p.symbols_sent,
            p.symbol_errors,
            p.bits_sent,
            p.bit_errors,
            p.ser,
            p.ber,
            p.union_bound_ser,
            p.ber_lower,
            p.ber_upper,
            p.stopped_early
        )?;
        if wallclock {
            write!(out, ",{:.3}", p.wallclock)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_bound_csv<W: Write>(out: &mut W, code: LineCode, curve: &BoundCurve) -> io::Result<()> {
    writeln!(
        out,
        "{}",
        tool_line(
            "bound",
            &[
                ("code", code.to_string()),
                ("eb_per_pulse", code.energy_profile().eb_per_pulse().to_string()),
            ],
        )
    )?;
    writeln!(out, "eb_n0_db,ser_upper_bound,ber_lower,ber_upper")?;
    for p in &curve.points {
        writeln!(out, "{},{},{},{}", p.eb_n0_db, p.ser_upper_bound, p.ber_lower, p.ber_upper)?;
    }
    Ok(())
}

pub fn write_psd_csv<W: Write>(
    out: &mut W,
    code: LineCode,
    psd: &crate::analysis::PsdEstimate,
    meta: &[(&str, String)],
) -> io::Result<()> {
    let mut all = vec![("code", code.to_string())];
    all.extend(meta.iter().cloned());
    all.push(("segment_length", psd.segment_length.to_string()));
    all.push(("segments", psd.segment_count.to_string()));
    writeln!(out, "{}", tool_line("psd", &all))?;
    writeln!(out, "f_t,density")?;
    for (f, d) in psd.freqs.iter().zip(&psd.density) {
        writeln!(out, "{f},{d}")?;
    }
    Ok(())
}
