use crate::channel::ModulationMap;
use crate::codebook::Codebook;

const CHUNK: usize = 6;
const MAX_SAMPLES: usize = 64;

/// Euclidean nearest-waveform decoder over a fixed candidate list.
///
/// With two-level signalling `x_t = off + b_t * delta`,
/// `|y - x|^2 = |y - off|^2 + sum_{t: b_t = 1} (delta^2 - 2 delta (y_t - off))`,
/// so a candidate's metric is a subset sum of per-sample costs. Subset sums
/// are tabulated per chunk of at most six samples, so each candidate costs a
/// couple of lookups.
#[derive(Clone, Debug)]
pub struct SoftDecoder {
    masks: Vec<u64>,
    n: usize,
    off: f64,
    delta: f64,
}

impl SoftDecoder {
    /// `masks[i]` marks the ON samples of candidate `i`; `off`/`on` are the
    /// reference levels at the receiver.
    pub fn new(masks: Vec<u64>, n_samples: usize, off: f64, on: f64) -> Self {
        assert!(n_samples > 0 && n_samples <= MAX_SAMPLES, "unsupported block size {n_samples}");
        assert!(!masks.is_empty(), "no candidates");
        SoftDecoder {
            masks,
            n: n_samples,
            off,
            delta: on - off,
        }
    }

    pub fn for_codebook(cb: &Codebook, modulation: &ModulationMap) -> Self {
        let mut n = 0;
        let masks = cb
            .codewords()
            .map(|cw| {
                let (m, len) = modulation.on_pattern(cw);
                n = len;
                m
            })
            .collect();
        SoftDecoder::new(masks, n, modulation.off_level, modulation.on_level)
    }

    pub fn samples_per_block(&self) -> usize {
        self.n
    }

    pub fn candidates(&self) -> usize {
        self.masks.len()
    }

    /// Index of the nearest candidate; the lowest index wins ties.
    pub fn decide(&self, y: &[f64]) -> usize {
        debug_assert_eq!(y.len(), self.n);
        let chunks = self.n.div_ceil(CHUNK);
        let width = self.n.div_ceil(chunks);
        if chunks <= 2 {
            let mut tables = [0f64; 2 << CHUNK];
            self.decide_with(y, width, chunks, &mut tables)
        } else {
            let mut tables = vec![0f64; chunks << CHUNK];
            self.decide_with(y, width, chunks, &mut tables)
        }
    }

    fn decide_with(&self, y: &[f64], width: usize, chunks: usize, tables: &mut [f64]) -> usize {
        for c in 0..chunks {
            let base = c * width;
            let w = width.min(self.n - base);
            let table = &mut tables[c << CHUNK..(c + 1) << CHUNK];
            let mut cost = [0f64; CHUNK];
            for (j, slot) in cost.iter_mut().enumerate().take(w) {
                *slot = self.delta * (self.delta - 2.0 * (y[base + j] - self.off));
            }
            for m in 1..(1usize << w) {
                table[m] = table[m & (m - 1)] + cost[m.trailing_zeros() as usize];
            }
        }

        let low = (1u64 << width) - 1;
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        for (i, &mask) in self.masks.iter().enumerate() {
            let mut metric = 0.0;
            for c in 0..chunks {
                metric += tables[(c << CHUNK) + ((mask >> (c * width)) & low) as usize];
            }
            if metric < best {
                best = metric;
                best_i = i;
            }
        }
        best_i
    }
}
