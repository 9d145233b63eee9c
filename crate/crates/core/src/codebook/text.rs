//! Plain-text codebook files.
//!
//! ```text
//! 5 10 5
//! 0 1100110001
//! 1 1110001001
//! ...
//! # control
//! 0000110111
//! ```
//!
//! The header is `k n [w]`. Other lines starting with `#` are comments.

use std::fmt::Write as _;

use super::{Codebook, Codeword};
use crate::error::{Error, Result};

/// Parses the text format. Only the shape is checked here; bijection and
/// weight problems are left for `validate_codebook` to report.
pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let mut header: Option<(usize, usize, Option<u32>)> = None;
    let mut entries = Vec::new();
    let mut control = Vec::new();
    let mut in_control = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if comment.trim().eq_ignore_ascii_case("control") {
                if header.is_none() {
                    return Err(err("control section before header".into()));
                }
                in_control = true;
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some((_, n, _)) = header else {
            let nums = fields
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(format!("bad header: {e}")))?;
            header = match nums.as_slice() {
                [k, n] => Some((*k, *n, None)),
                [k, n, w] => Some((*k, *n, Some(*w as u32))),
                _ => return Err(err("header must be `k n [w]`".into())),
            };
            continue;
        };
        let parse_word = |s: &str| -> Result<Codeword> {
            let cw: Codeword = s.parse().map_err(|e: Error| err(e.to_string()))?;
            if cw.len() != n {
                return Err(err(format!("codeword {s} has {} chips, expected {n}", cw.len())));
            }
            Ok(cw)
        };
        if in_control {
            match fields.as_slice() {
                [word] => control.push(parse_word(word)?),
                _ => return Err(err("control lines hold a single codeword".into())),
            }
        } else {
            match fields.as_slice() {
                [index, word] => {
                    let index = index
                        .parse::<u32>()
                        .map_err(|e| err(format!("bad index {index:?}: {e}")))?;
                    entries.push((index, parse_word(word)?));
                }
                _ => return Err(err("entry lines are `index bits`".into())),
            }
        }
    }

    let (k, n, w) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    Codebook::from_parts(k, n, entries, control, w)
}

impl Codebook {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.constant_weight() {
            Some(w) => writeln!(out, "{} {} {}", self.k(), self.n(), w),
            None => writeln!(out, "{} {}", self.k(), self.n()),
        }
        .unwrap();
        for (data, cw) in self.entries() {
            writeln!(out, "{data} {cw}").unwrap();
        }
        if !self.control_symbols().is_empty() {
            out.push_str("# control\n");
            for cw in self.control_symbols() {
                writeln!(out, "{cw}").unwrap();
            }
        }
        out
    }
}
