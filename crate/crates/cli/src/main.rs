use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linecode::analysis::{
    bsa_cost, bsa_optimize, low_freq_power_fraction, psd_estimate, Mapping, PsdParams,
};
use linecode::channel::db_to_linear;
use linecode::codebook::{
    builtin_5b10b, distance_spectrum, max_run_length, parse_codebook,
    search_constant_weight_code, validate_codebook, Codebook, SearchParams,
};
use linecode::codecs::LineCode;
use linecode::sim::{
    bound_curve, code_waveform, run_sweep, write_bound_csv, write_psd_csv, write_sweep_csv,
    Decoder, SweepConfig, CSV_SCHEMA, DEFAULT_BLOCK_SIZE,
};

#[derive(Parser, Debug)]
#[command(name = "linecode", version, about = "Line-code error-rate and spectrum laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo SER/BER sweep, one CSV row per Eb/N0 point.
    Simulate(SimulateArgs),
    /// Union bound on the symbol error rate with the BER bracket.
    Bound(BoundArgs),
    /// Welch power spectral density of a random coded waveform.
    Psd(PsdArgs),
    /// Optimise dataword labels with binary switching.
    Bsa(BsaArgs),
    /// Search for a constant-weight code.
    Search(SearchArgs),
    /// Check a codebook file and print its properties.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "5b10b")]
    code: LineCode,
    /// Comma-separated values and/or inclusive ranges `start:stop:step`.
    #[arg(long, default_value = "9:12:0.5")]
    ebn0: String,
    /// Codewords per point; `1e6` style is accepted.
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop a point once this many bit errors are counted; 0 disables.
    #[arg(long, default_value_t = 200)]
    max_bit_errors: u64,
    #[arg(long, default_value = "soft")]
    decoder: Decoder,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// Append per-point run time (makes the output non-reproducible).
    #[arg(long)]
    wallclock: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, default_value = "5b10b")]
    code: LineCode,
    #[arg(long, default_value = "0:14:0.5")]
    ebn0: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PsdArgs {
    #[arg(long, default_value = "5b10b")]
    code: LineCode,
    #[arg(long, default_value_t = 100_000)]
    codewords: usize,
    #[arg(long, default_value_t = 1024)]
    segment: usize,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Band edge (cycles per chip) for the low-frequency summary on stderr.
    #[arg(long, default_value_t = 0.05)]
    cutoff: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BsaArgs {
    /// Codebook file; the built-in 5B10B table when omitted.
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Design Eb/N0 in dB.
    #[arg(long, default_value = "9")]
    ebn0: String,
    /// Start from the codebook's own labels instead of a random permutation.
    #[arg(long)]
    keep_labels: bool,
    /// Relabelled codebook output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cost trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    w: usize,
    #[arg(long, default_value_t = 4)]
    d: u32,
    /// Longest allowed run within and across codewords.
    #[arg(long)]
    run: Option<u32>,
    #[arg(long, default_value_t = 36)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 20_000)]
    iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Codebook file to check.
    file: Option<PathBuf>,
    /// Check a built-in table instead of a file.
    #[arg(long, conflicts_with = "file")]
    code: Option<LineCode>,
    /// Minimum distance the code claims.
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `--ebn0`: comma-separated numbers and `start:stop:step` ranges
/// (stop included when it falls on the grid).
fn parse_db_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |p: &str| -> Result<f64> {
            let v: f64 = p.trim().parse().with_context(|| format!("bad Eb/N0 value '{p}'"))?;
            if !v.is_finite() {
                bail!("Eb/N0 value '{p}' is not finite");
            }
            Ok(v)
        };
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if !(step > 0.0) || b < a {
                    bail!("range '{item}' needs start <= stop and a positive step");
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                if n > 100_000 {
                    bail!("range '{item}' has too many points");
                }
                // round away accumulated binary fractions (0.1 steps etc.)
                out.extend((0..=n).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9));
            }
            _ => bail!("bad Eb/N0 item '{item}' (expected a value or start:stop:step)"),
        }
    }
    Ok(out)
}

/// `key=value` lines; blank lines and `#` comments are skipped. Keys use the
/// flag names with `-` or `_`.
fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

/// Whole number, also written as `2e7`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 9.007_199_254_740_992e15 => Ok(x as u64),
        _ => Err(format!("'{s}' is not a whole number")),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| anyhow!("config key '{key}': {e}"))
}

fn unknown_key(key: &str) -> anyhow::Error {
    anyhow!("unknown config key '{key}'")
}

fn apply_config(path: &Option<PathBuf>, mut set: impl FnMut(&str, &str) -> Result<()>) -> Result<()> {
    if let Some(p) = path {
        for (k, v) in read_config(p)? {
            set(&k, &v)?;
        }
    }
    Ok(())
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_codebook(path: &Path) -> Result<Codebook> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_codebook(&text).with_context(|| format!("invalid codebook {}", path.display()))
}

fn simulate(mut a: SimulateArgs) -> Result<()> {
    apply_config(&a.config.clone(), |k, v| {
        match k {
            "code" => a.code = parse_value(k, v)?,
            "ebn0" => a.ebn0 = v.to_string(),
            "trials" => a.trials = parse_count(v).map_err(|e| anyhow!("config key '{k}': {e}"))?,
            "seed" => a.seed = parse_value(k, v)?,
            "max_bit_errors" => a.max_bit_errors = parse_value(k, v)?,
            "decoder" => a.decoder = parse_value(k, v)?,
            "block_size" => a.block_size = parse_value(k, v)?,
            "wallclock" => a.wallclock = parse_value(k, v)?,
            "out" => a.out = Some(PathBuf::from(v)),
            _ => return Err(unknown_key(k)),
        }
        Ok(())
    })?;
    let cfg = SweepConfig {
        trials: a.trials,
        seed: a.seed,
        max_bit_errors: (a.max_bit_errors > 0).then_some(a.max_bit_errors),
        decoder: a.decoder,
        block_size: a.block_size,
        ..SweepConfig::new(a.code, parse_db_list(&a.ebn0)?)
    };
    cfg.validate()?;
    let mut out = open_out(&a.out)?;
    let result = run_sweep(&cfg)?;
    write_sweep_csv(&mut out, &result, a.wallclock)?;
    out.flush()?;
    Ok(())
}

fn bound(mut a: BoundArgs) -> Result<()> {
    apply_config(&a.config.clone(), |k, v| {
        match k {
            "code" => a.code = parse_value(k, v)?,
            "ebn0" => a.ebn0 = v.to_string(),
            "out" => a.out = Some(PathBuf::from(v)),
            _ => return Err(unknown_key(k)),
        }
        Ok(())
    })?;
    let dbs = parse_db_list(&a.ebn0)?;
    let mut out = open_out(&a.out)?;
    write_bound_csv(&mut out, a.code, &bound_curve(a.code, &dbs))?;
    out.flush()?;
    Ok(())
}

fn psd(mut a: PsdArgs) -> Result<()> {
    apply_config(&a.config.clone(), |k, v| {
        match k {
            "code" => a.code = parse_value(k, v)?,
            "codewords" => a.codewords = parse_value(k, v)?,
            "segment" => a.segment = parse_value(k, v)?,
            "overlap" => a.overlap = parse_value(k, v)?,
            "cutoff" => a.cutoff = parse_value(k, v)?,
            "seed" => a.seed = parse_value(k, v)?,
            "out" => a.out = Some(PathBuf::from(v)),
            _ => return Err(unknown_key(k)),
        }
        Ok(())
    })?;
    let waveform = code_waveform(a.code, a.codewords, a.seed);
    let params = PsdParams {
        segment_length: a.segment,
        overlap: a.overlap,
    };
    let est = psd_estimate(&waveform, params)?;
    let mut out = open_out(&a.out)?;
    write_psd_csv(
        &mut out,
        a.code,
        &est,
        &[
            ("codewords", a.codewords.to_string()),
            ("seed", a.seed.to_string()),
            ("overlap", a.overlap.to_string()),
            ("window", "hann".to_string()),
        ],
    )?;
    out.flush()?;
    let low = low_freq_power_fraction(&est, a.cutoff);
    if low.degenerate {
        eprintln!("{}: no AC power", a.code);
    } else {
        eprintln!(
            "{}: {:.3}% of AC power below f*T = {}",
            a.code,
            100.0 * low.fraction,
            a.cutoff
        );
    }
    Ok(())
}

fn bsa(mut a: BsaArgs) -> Result<()> {
    apply_config(&a.config.clone(), |k, v| {
        match k {
            "codebook" => a.codebook = Some(PathBuf::from(v)),
            "seed" => a.seed = parse_value(k, v)?,
            "ebn0" => a.ebn0 = v.to_string(),
            "keep_labels" => a.keep_labels = parse_value(k, v)?,
            "out" => a.out = Some(PathBuf::from(v)),
            "trace" => a.trace = Some(PathBuf::from(v)),
            _ => return Err(unknown_key(k)),
        }
        Ok(())
    })?;
    let cb = match &a.codebook {
        Some(p) => load_codebook(p)?,
        None => builtin_5b10b(),
    };
    let db = match parse_db_list(&a.ebn0)?.as_slice() {
        [db] => *db,
        _ => bail!("bsa takes a single design Eb/N0"),
    };
    // Eb = pulse energy for a half-weight OOK code; n0 follows from Eb/N0.
    let eb_per_pulse = cb.constant_weight().map_or(1.0, |w| w as f64 / cb.k() as f64);
    let n0 = eb_per_pulse / db_to_linear(db);
    let init = if a.keep_labels {
        Mapping::of_codebook(&cb)?
    } else {
        Mapping::random(cb.len(), &mut ChaCha8Rng::seed_from_u64(a.seed))
    };
    let outcome = bsa_optimize(&cb, &init, n0, 1.0)?;
    let relabeled = cb.relabeled(outcome.mapping.labels())?;

    let mut out = open_out(&a.out)?;
    write!(out, "{}", relabeled.to_text())?;
    out.flush()?;

    let report = bsa_cost(&outcome.mapping, &cb, n0, 1.0)?;
    if let Some(path) = &a.trace {
        let mut t = open_out(&Some(path.clone()))?;
        writeln!(
            t,
            "# linecode {} csv-schema {CSV_SCHEMA} bsa seed={} eb_n0_db={db} n0={n0}",
            env!("CARGO_PKG_VERSION"),
            a.seed
        )?;
        writeln!(t, "step,total_cost,ber_estimate")?;
        for (i, total) in outcome.trace.iter().enumerate() {
            writeln!(t, "{i},{total},{}", total / cb.k() as f64)?;
        }
        t.flush()?;
    }
    eprintln!(
        "bsa: {} swaps, cost {:.6e} -> {:.6e}, ber estimate {:.6e}",
        outcome.trace.len() - 1,
        outcome.trace[0],
        report.total,
        report.ber_estimate
    );
    Ok(())
}

fn search(mut a: SearchArgs) -> Result<()> {
    apply_config(&a.config.clone(), |k, v| {
        match k {
            "n" => a.n = parse_value(k, v)?,
            "w" => a.w = parse_value(k, v)?,
            "d" => a.d = parse_value(k, v)?,
            "run" => a.run = Some(parse_value(k, v)?),
            "size" => a.size = parse_value(k, v)?,
            "seed" => a.seed = parse_value(k, v)?,
            "restarts" => a.restarts = parse_value(k, v)?,
            "iterations" => a.iterations = parse_value(k, v)?,
            "out" => a.out = Some(PathBuf::from(v)),
            _ => return Err(unknown_key(k)),
        }
        Ok(())
    })?;
    let params = SearchParams {
        max_run: a.run,
        seed: a.seed,
        restarts: a.restarts,
        iterations: a.iterations,
        ..SearchParams::new(a.n, a.w, a.d, a.size)
    };
    let cb = search_constant_weight_code(&params)?;
    let mut out = open_out(&a.out)?;
    write!(out, "{}", cb.to_text())?;
    out.flush()?;
    eprintln!(
        "search: {} data codewords, {} control symbols",
        cb.len(),
        cb.control_symbols().len()
    );
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<()> {
    let cb = match (&a.file, a.code) {
        (Some(p), _) => load_codebook(p)?,
        (None, Some(code)) => code.codebook(),
        (None, None) => bail!("give a codebook file or --code"),
    };
    let report = validate_codebook(&cb, a.d);
    let runs = max_run_length(&cb);
    let mut out = open_out(&a.out)?;
    writeln!(out, "entries: {} (k={}, n={})", cb.len(), cb.k(), cb.n())?;
    writeln!(out, "control symbols: {}", cb.control_symbols().len())?;
    match report.weight {
        Some(w) => writeln!(out, "weight: {w}")?,
        None => writeln!(out, "weight: mixed")?,
    }
    match report.min_distance {
        Some(d) => writeln!(out, "min distance: {d}")?,
        None => writeln!(out, "min distance: n/a")?,
    }
    writeln!(out, "max run: {}", runs.max_run)?;
    for w in &runs.witnesses {
        writeln!(out, "  run of {} x{} in {} {}", runs.max_run, w.bit, w.first, w.second)?;
    }
    if let Some(r) = runs.control_max_run {
        writeln!(out, "max run with control symbols: {r}")?;
    }
    match distance_spectrum(&cb) {
        Ok(s) => {
            let cells: Vec<String> = s
                .average
                .iter()
                .enumerate()
                .map(|(i, a)| format!("d{}={a}", 2 * (i + 1)))
                .collect();
            writeln!(out, "distance spectrum: {}", cells.join(" "))?;
        }
        Err(e) => writeln!(out, "distance spectrum: unavailable ({e})")?,
    }
    for v in &report.violations {
        writeln!(out, "violation: {v}")?;
    }
    writeln!(out, "valid: {}", report.is_valid())?;
    out.flush()?;
    if !report.is_valid() {
        bail!("codebook has {} violation(s)", report.violations.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Bound(a) => bound(a),
        Command::Psd(a) => psd(a),
        Command::Bsa(a) => bsa(a),
        Command::Search(a) => search(a),
        Command::Validate(a) => validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("linecode: {}", first.trim_start_matches("error: ").trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("linecode: {msg}");
            ExitCode::FAILURE
        }
    }
}
