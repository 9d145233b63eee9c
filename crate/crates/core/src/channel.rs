//! OOK / VPPM modulation and the scalar-gain AWGN channel `y = alpha x + z`.
//!
//! Samples are matched-filter outputs, one per chip with unit chip duration,
//! so the energy of an ON chip relative to an OFF chip is
//! `(on_level - off_level)^2`, the pulse energy. Noise is i.i.d. Gaussian
//! with variance `N0 / 2` per sample, drawn with the ziggurat sampler from
//! `rand_distr::StandardNormal` over a seeded ChaCha8 stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::codebook::Codeword;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModulationKind {
    Ook,
    /// 50% duty-cycle VPPM: each coded bit is a two-chip pulse-position
    /// symbol, 1 as (on, off) and 0 as (off, on).
    Vppm50,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationMap {
    pub kind: ModulationKind,
    pub off_level: f64,
    pub on_level: f64,
}

impl ModulationMap {
    pub fn new(kind: ModulationKind, off_level: f64, on_level: f64) -> Result<Self> {
        if !(on_level > off_level) {
            return Err(Error::InvalidParameter(format!(
                "on level {on_level} must exceed off level {off_level}"
            )));
        }
        Ok(ModulationMap {
            kind,
            off_level,
            on_level,
        })
    }

    /// Levels `(0, sqrt(pulse_energy))`.
    pub fn with_pulse_energy(kind: ModulationKind, pulse_energy: f64) -> Result<Self> {
        if !(pulse_energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse energy must be positive, got {pulse_energy}"
            )));
        }
        ModulationMap::new(kind, 0.0, pulse_energy.sqrt())
    }

    pub fn ook() -> Self {
        ModulationMap::new(ModulationKind::Ook, 0.0, 1.0).unwrap()
    }

    pub fn vppm50() -> Self {
        ModulationMap::new(ModulationKind::Vppm50, 0.0, 1.0).unwrap()
    }

    pub fn chips_per_coded_bit(&self) -> usize {
        match self.kind {
            ModulationKind::Ook => 1,
            ModulationKind::Vppm50 => 2,
        }
    }

    pub fn pulse_energy(&self) -> f64 {
        let d = self.on_level - self.off_level;
        d * d
    }

    pub fn modulate(&self, chips: &[u8]) -> Vec<f64> {
        let level = |on: bool| if on { self.on_level } else { self.off_level };
        match self.kind {
            ModulationKind::Ook => chips.iter().map(|&c| level(c == 1)).collect(),
            ModulationKind::Vppm50 => chips
                .iter()
                .flat_map(|&c| [level(c == 1), level(c != 1)])
                .collect(),
        }
    }

    /// ON pattern of a modulated codeword as a chip mask (sample `t` at bit
    /// `t`), together with the sample count.
    pub(crate) fn on_pattern(&self, cw: &Codeword) -> (u64, usize) {
        match self.kind {
            ModulationKind::Ook => (cw.chip_mask(), cw.len()),
            ModulationKind::Vppm50 => {
                let mut m = 0u64;
                for (t, c) in cw.chips().enumerate() {
                    let slot = if c == 1 { 2 * t } else { 2 * t + 1 };
                    m |= 1 << slot;
                }
                (m, 2 * cw.len())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    pub alpha: f64,
    pub n0: f64,
    pub pulse_energy: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(alpha: f64, n0: f64, pulse_energy: f64, seed: u64) -> Result<Self> {
        if !(n0 > 0.0) || !(pulse_energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "n0 ({n0}) and pulse energy ({pulse_energy}) must be positive"
            )));
        }
        Ok(ChannelConfig {
            alpha,
            n0,
            pulse_energy,
            seed,
        })
    }

    pub fn sigma(&self) -> f64 {
        (self.n0 / 2.0).sqrt()
    }
}

/// Adds `alpha`-scaled signal and N(0, sigma^2) noise in place.
pub fn add_noise<R: rand::Rng + ?Sized>(samples: &mut [f64], alpha: f64, sigma: f64, rng: &mut R) {
    for s in samples {
        let z: f64 = StandardNormal.sample(rng);
        *s = alpha * *s + sigma * z;
    }
}

/// `y = alpha x + z` with the noise stream fixed by `cfg.seed`.
pub fn transmit(samples: &[f64], cfg: &ChannelConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = samples.to_vec();
    add_noise(&mut out, cfg.alpha, cfg.sigma(), &mut rng);
    out
}

/// Energy bookkeeping for one code: information bits per codeword and the
/// average number of ON chips spent on them. Only ON chips carry energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyProfile {
    pub data_bits: usize,
    pub on_chips_per_symbol: f64,
}

impl EnergyProfile {
    /// `Eb / pulse_energy`.
    pub fn eb_per_pulse(&self) -> f64 {
        self.on_chips_per_symbol / self.data_bits as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EbN0Point {
    pub eb_n0_db: f64,
    pub sigma: f64,
    pub eb: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `N0 = Eb / 10^(dB/10)` with `Eb = pulse_energy * eb_per_pulse`.
pub fn eb_n0_to_sigma(
    profile: &EnergyProfile,
    pulse_energy: f64,
    eb_n0_db: f64,
    seed: u64,
) -> Result<(ChannelConfig, EbN0Point)> {
    let eb = pulse_energy * profile.eb_per_pulse();
    let cfg = ChannelConfig::new(1.0, eb / db_to_linear(eb_n0_db), pulse_energy, seed)?;
    Ok((
        cfg,
        EbN0Point {
            eb_n0_db,
            sigma: cfg.sigma(),
            eb,
        },
    ))
}

pub fn sigma_to_eb_n0_db(profile: &EnergyProfile, pulse_energy: f64, sigma: f64) -> f64 {
    let eb = pulse_energy * profile.eb_per_pulse();
    linear_to_db(eb / (2.0 * sigma * sigma))
}
