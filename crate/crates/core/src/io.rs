//! Text loaders for marked sets and bit vectors.
//!
//! Marked-set files hold one element per line, either as a decimal integer or
//! as a 0/1 string (most significant bit first). Blank lines and text after
//! `#` are ignored. In [`SetFormat::Auto`] a file is read as bit strings when
//! every entry is a 0/1 string and all entries share one length of at least
//! two; otherwise as decimals.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetFormat {
    #[default]
    Auto,
    Decimal,
    Bits,
}

impl FromStr for SetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SetFormat::Auto),
            "decimal" => Ok(SetFormat::Decimal),
            "bits" => Ok(SetFormat::Bits),
            other => Err(Error::domain(format!("unknown set format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSet {
    /// Bit width implied by bit-string entries; `None` for decimals.
    pub width: Option<u32>,
    pub marked: Vec<u64>,
}

fn entries(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

fn is_bits(s: &str) -> bool {
    s.chars().all(|c| c == '0' || c == '1')
}

pub fn parse_marked_set(text: &str, format: SetFormat) -> Result<MarkedSet> {
    let lines = entries(text);
    let format = match format {
        SetFormat::Auto => {
            let len = lines.first().map_or(0, |(_, l)| l.len());
            if len >= 2 && lines.iter().all(|(_, l)| is_bits(l) && l.len() == len) {
                SetFormat::Bits
            } else {
                SetFormat::Decimal
            }
        }
        f => f,
    };
    match format {
        SetFormat::Bits => {
            let width = lines.first().map(|(_, l)| l.len() as u32);
            let mut marked = Vec::with_capacity(lines.len());
            for (line, l) in &lines {
                if !is_bits(l) || Some(l.len() as u32) != width || l.len() > 63 {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("`{l}` is not a bit string of width {}", width.unwrap_or(0)),
                    });
                }
                marked.push(u64::from_str_radix(l, 2).expect("checked bits"));
            }
            Ok(MarkedSet { width, marked })
        }
        _ => {
            let marked = lines
                .iter()
                .map(|(line, l)| {
                    l.parse::<u64>().map_err(|e| Error::Parse {
                        line: *line,
                        msg: format!("`{l}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MarkedSet { width: None, marked })
        }
    }
}

pub fn load_marked_set(path: &Path, format: SetFormat) -> Result<MarkedSet> {
    parse_marked_set(&std::fs::read_to_string(path)?, format)
}

/// Reads one 0/1 string; whitespace, including line breaks, is ignored.
pub fn parse_bit_vector(text: &str) -> Result<BitVector> {
    let compact: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::chars)
        .filter(|c| !c.is_whitespace())
        .collect();
    if compact.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty bit vector".into(),
        });
    }
    compact.parse()
}

pub fn load_bit_vector(path: &Path) -> Result<BitVector> {
    parse_bit_vector(&std::fs::read_to_string(path)?)
}
