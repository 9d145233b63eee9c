//! Welch power spectral density of chip-rate waveforms.
//!
//! Frequencies are in cycles per chip. The mean is removed before windowing
//! and put back as a single DC line, so leakage of the (large) DC component
//! through the window does not masquerade as low-frequency content.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdParams {
    pub segment_length: usize,
    pub overlap: f64,
}

impl Default for PsdParams {
    fn default() -> Self {
        PsdParams {
            segment_length: 1024,
            overlap: 0.5,
        }
    }
}

/// One-sided density on `segment_length / 2 + 1` bins spaced `1 / L`, scaled
/// so that `sum(density) / L` equals the mean-square of the waveform.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
    pub segment_length: usize,
    pub segment_count: usize,
}

impl PsdEstimate {
    pub fn bin_width(&self) -> f64 {
        1.0 / self.segment_length as f64
    }

    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }
}

pub fn psd_estimate(waveform: &[f64], params: PsdParams) -> Result<PsdEstimate> {
    let l = params.segment_length;
    if l < 2 || l % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "segment length must be even and at least 2, got {l}"
        )));
    }
    if !(0.0..1.0).contains(&params.overlap) {
        return Err(Error::InvalidParameter(format!(
            "overlap must lie in [0, 1), got {}",
            params.overlap
        )));
    }
    if waveform.len() < l {
        return Err(Error::InvalidParameter(format!(
            "waveform of {} samples is shorter than one segment ({l})",
            waveform.len()
        )));
    }
    let step = ((l as f64 * (1.0 - params.overlap)).round() as usize).max(1);
    let count = (waveform.len() - l) / step + 1;

    let mean = waveform.iter().sum::<f64>() / waveform.len() as f64;
    let window: Vec<f64> = (0..l)
        .map(|t| 0.5 - 0.5 * (2.0 * PI * t as f64 / l as f64).cos())
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::new().plan_fft_forward(l);
    let bins = l / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    for s in 0..count {
        let seg = &waveform[s * step..s * step + l];
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }

    // Periodogram scaling: |X|^2 / sum(w^2) has mean-square times L as its
    // sum over all L bins; fold negative frequencies into the one-sided half.
    let scale = 1.0 / (window_power * count as f64);
    let density: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(f, a)| {
            let fold = if f == 0 || f == l / 2 { 1.0 } else { 2.0 };
            a * scale * fold
        })
        .collect();
    let mut density = density;
    density[0] += mean * mean * l as f64;

    Ok(PsdEstimate {
        freqs: (0..bins).map(|f| f as f64 / l as f64).collect(),
        density,
        segment_length: l,
        segment_count: count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowFreqFraction {
    pub fraction: f64,
    /// Set when the waveform has no AC power (beyond rounding), in which case
    /// the fraction is 0.
    pub degenerate: bool,
}

/// Share of the AC power in bins `0 < f <= cutoff` (cycles per chip). The DC
/// bin is excluded from both numerator and denominator.
pub fn low_freq_power_fraction(psd: &PsdEstimate, cutoff: f64) -> LowFreqFraction {
    let ac: f64 = psd.density.iter().skip(1).sum();
    let total = ac + psd.density.first().copied().unwrap_or(0.0);
    if !(ac > 1e-12 * total) {
        return LowFreqFraction {
            fraction: 0.0,
            degenerate: true,
        };
    }
    let low: f64 = psd
        .freqs
        .iter()
        .zip(&psd.density)
        .skip(1)
        .take_while(|(f, _)| **f <= cutoff + 1e-12)
        .map(|(_, d)| d)
        .sum();
    LowFreqFraction {
        fraction: low / ac,
        degenerate: false,
    }
}
