//! Python bindings: codebooks, encoding, bounds, Monte-Carlo sweeps, PSD
//! estimates and the binary switching algorithm.

use linecode::analysis::{bsa_cost, bsa_optimize, low_freq_power_fraction, psd_estimate, Mapping, PsdParams};
use linecode::channel::db_to_linear;
use linecode::codebook::{
    distance_spectrum, hamming_distance, max_run_length, parse_codebook, search_constant_weight_code,
    validate_codebook, SearchParams,
};
use linecode::codecs::{bits_to_words, encode_block, words_to_bits, ChipStream, HardDecoder};
use linecode::sim::{self, Decoder, SweepConfig};
use linecode::{Codeword, LineCode};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// Vec<u8> would cross over as `bytes`; bits and chips go out as int lists.
fn ints(v: Vec<u8>) -> Vec<u32> {
    v.into_iter().map(u32::from).collect()
}

fn code(name: &str) -> PyResult<LineCode> {
    name.parse().map_err(err)
}

#[pyclass(name = "Codebook", module = "linecode", frozen)]
#[derive(Clone)]
struct PyCodebook {
    inner: linecode::Codebook,
}

#[pymethods]
impl PyCodebook {
    /// The built-in 5B10B table.
    #[staticmethod]
    fn builtin() -> Self {
        PyCodebook { inner: linecode::builtin_5b10b() }
    }

    /// Table form of a named code ("manchester", "4b6b", "8b10b", "5b10b").
    #[staticmethod]
    fn for_code(name: &str) -> PyResult<Self> {
        Ok(PyCodebook { inner: code(name)?.codebook() })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyCodebook { inner: parse_codebook(text).map_err(err)? })
    }

    /// Constant-weight code search; the first 2^k words carry data and the
    /// rest become control symbols.
    #[staticmethod]
    #[pyo3(signature = (n=10, w=5, d=4, size=36, seed=0, max_run=None, restarts=64, iterations=20_000))]
    #[allow(clippy::too_many_arguments)]
    fn search(
        py: Python<'_>,
        n: usize,
        w: usize,
        d: u32,
        size: usize,
        seed: u64,
        max_run: Option<u32>,
        restarts: usize,
        iterations: usize,
    ) -> PyResult<Self> {
        let mut p = SearchParams::new(n, w, d, size);
        p.seed = seed;
        p.max_run = max_run;
        p.restarts = restarts;
        p.iterations = iterations;
        let inner = py.allow_threads(|| search_constant_weight_code(&p)).map_err(err)?;
        Ok(PyCodebook { inner })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn weight(&self) -> Option<u32> {
        self.inner.constant_weight()
    }

    /// `(dataword, codeword)` pairs in codeword-index order.
    #[getter]
    fn entries(&self) -> Vec<(u32, String)> {
        self.inner.entries().iter().map(|(d, c)| (*d, c.to_string())).collect()
    }

    #[getter]
    fn control_symbols(&self) -> Vec<String> {
        self.inner.control_symbols().iter().map(|c| c.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Codebook(k={}, n={}, entries={}, control={})",
            self.inner.k(),
            self.inner.n(),
            self.inner.len(),
            self.inner.control_symbols().len()
        )
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Data bits (multiple of k) to chips.
    fn encode(&self, bits: Vec<u8>) -> PyResult<Vec<u32>> {
        Ok(ints(encode_block(&self.inner, &bits).map_err(err)?.into_inner()))
    }

    /// Hard nearest-codeword decoding of chips back to data bits.
    fn decode(&self, chips: Vec<u8>) -> PyResult<Vec<u32>> {
        let chips = ChipStream::new(chips).map_err(err)?;
        let words: Vec<u32> = HardDecoder::new(&self.inner)
            .decode(chips.as_slice())
            .map_err(err)?
            .iter()
            .map(|o| o.dataword)
            .collect();
        Ok(ints(words_to_bits(&words, self.inner.k())))
    }

    /// Average number of neighbours at distance 2r, indexed by r.
    fn spectrum(&self) -> PyResult<Vec<f64>> {
        Ok(distance_spectrum(&self.inner).map_err(err)?.average)
    }

    fn max_run(&self) -> u32 {
        max_run_length(&self.inner).max_run
    }

    #[pyo3(signature = (min_distance=None))]
    fn validate<'py>(&self, py: Python<'py>, min_distance: Option<u32>) -> PyResult<Bound<'py, PyDict>> {
        let report = validate_codebook(&self.inner, min_distance);
        let d = PyDict::new(py);
        d.set_item("valid", report.is_valid())?;
        d.set_item("min_distance", report.min_distance)?;
        d.set_item("weight", report.weight)?;
        d.set_item("max_run", max_run_length(&self.inner).max_run)?;
        d.set_item(
            "violations",
            report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        )?;
        Ok(d)
    }

    /// Same codewords with dataword `labels[i]` on codeword `i`.
    fn relabeled(&self, labels: Vec<u32>) -> PyResult<Self> {
        Ok(PyCodebook { inner: self.inner.relabeled(&labels).map_err(err)? })
    }
}

#[pyfunction]
fn hamming(a: &str, b: &str) -> PyResult<u32> {
    let a: Codeword = a.parse().map_err(err)?;
    let b: Codeword = b.parse().map_err(err)?;
    hamming_distance(&a, &b).map_err(err)
}

/// Packs bits (MSB first) into k-bit words.
#[pyfunction]
fn pack_bits(bits: Vec<u8>, k: usize) -> PyResult<Vec<u32>> {
    bits_to_words(&bits, k).map_err(err)
}

/// Union upper bound on the symbol error rate under soft decoding.
#[pyfunction]
fn union_bound(code_name: &str, eb_n0_db: f64) -> PyResult<f64> {
    Ok(sim::union_bound(code(code_name)?, eb_n0_db))
}

/// Monte-Carlo sweep; one dict per Eb/N0 point.
#[pyfunction]
#[pyo3(signature = (code_name, eb_n0_db, trials=sim::DEFAULT_TRIALS, seed=0, max_bit_errors=Some(sim::DEFAULT_MAX_BIT_ERRORS), decoder="soft", block_size=sim::DEFAULT_BLOCK_SIZE, alpha=1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    code_name: &str,
    eb_n0_db: Vec<f64>,
    trials: u64,
    seed: u64,
    max_bit_errors: Option<u64>,
    decoder: &str,
    block_size: usize,
    alpha: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = SweepConfig::new(code(code_name)?, eb_n0_db);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.max_bit_errors = max_bit_errors;
    cfg.decoder = decoder.parse::<Decoder>().map_err(err)?;
    cfg.block_size = block_size;
    cfg.alpha = alpha;
    let result = py.allow_threads(|| sim::run_sweep(&cfg)).map_err(err)?;
    result
        .points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("eb_n0_db", p.eb_n0_db)?;
            d.set_item("symbols_sent", p.symbols_sent)?;
            d.set_item("symbol_errors", p.symbol_errors)?;
            d.set_item("bits_sent", p.bits_sent)?;
            d.set_item("bit_errors", p.bit_errors)?;
            d.set_item("ser", p.ser)?;
            d.set_item("ber", p.ber)?;
            d.set_item("union_bound_ser", p.union_bound_ser)?;
            d.set_item("ber_lower", p.ber_lower)?;
            d.set_item("ber_upper", p.ber_upper)?;
            d.set_item("stopped_early", p.stopped_early)?;
            Ok(d)
        })
        .collect()
}

/// Welch PSD of a random chip stream: `(freqs, density, low_fraction)` where
/// the fraction is the share of AC power at or below `cutoff` cycles/chip
/// (None for a waveform without AC power).
#[pyfunction]
#[pyo3(signature = (code_name, codewords=100_000, segment_length=1024, overlap=0.5, cutoff=0.05, seed=0))]
fn psd(
    py: Python<'_>,
    code_name: &str,
    codewords: usize,
    segment_length: usize,
    overlap: f64,
    cutoff: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>, Option<f64>)> {
    let code = code(code_name)?;
    let est = py
        .allow_threads(|| {
            let wave = sim::code_waveform(code, codewords, seed);
            psd_estimate(&wave, PsdParams { segment_length, overlap })
        })
        .map_err(err)?;
    let low = low_freq_power_fraction(&est, cutoff);
    let fraction = (!low.degenerate).then_some(low.fraction);
    Ok((est.freqs, est.density, fraction))
}

/// Binary switching on a codebook at a design Eb/N0. Returns the optimized
/// labels and the cost trace (initial cost, then one entry per swap).
#[pyfunction]
#[pyo3(signature = (codebook, eb_n0_db, seed=0, keep_labels=false))]
fn bsa(codebook: &PyCodebook, eb_n0_db: f64, seed: u64, keep_labels: bool) -> PyResult<(Vec<u32>, Vec<f64>)> {
    let cb = &codebook.inner;
    let eb_per_pulse = cb.constant_weight().map_or(1.0, |w| w as f64 / cb.k() as f64);
    let n0 = eb_per_pulse / db_to_linear(eb_n0_db);
    let init = if keep_labels {
        Mapping::of_codebook(cb).map_err(err)?
    } else {
        Mapping::random(cb.len(), &mut ChaCha8Rng::seed_from_u64(seed))
    };
    let out = bsa_optimize(cb, &init, n0, 1.0).map_err(err)?;
    Ok((out.mapping.labels().to_vec(), out.trace))
}

/// Per-bit error estimate of the current labeling of `codebook`.
#[pyfunction]
fn bsa_ber_estimate(codebook: &PyCodebook, eb_n0_db: f64) -> PyResult<f64> {
    let cb = &codebook.inner;
    let eb_per_pulse = cb.constant_weight().map_or(1.0, |w| w as f64 / cb.k() as f64);
    let n0 = eb_per_pulse / db_to_linear(eb_n0_db);
    let m = Mapping::of_codebook(cb).map_err(err)?;
    Ok(bsa_cost(&m, cb, n0, 1.0).map_err(err)?.ber_estimate)
}

#[pymodule]
#[pyo3(name = "linecode")]
fn linecode_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CODES", LineCode::ALL.iter().map(|c| c.name()).collect::<Vec<_>>())?;
    m.add_class::<PyCodebook>()?;
    m.add_function(wrap_pyfunction!(hamming, m)?)?;
    m.add_function(wrap_pyfunction!(pack_bits, m)?)?;
    m.add_function(wrap_pyfunction!(union_bound, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(psd, m)?)?;
    m.add_function(wrap_pyfunction!(bsa, m)?)?;
    m.add_function(wrap_pyfunction!(bsa_ber_estimate, m)?)?;
    Ok(())
}
