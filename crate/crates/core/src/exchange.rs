//! Exchange functions: transforms from a visitation word to the emitted word
//! passed to the partner system as control.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::cupolet::bits_to_string;
use crate::error::{Error, Result};
use crate::section::parse_bits;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExchangeFunction {
    Identity,
    BitwiseNot,
    /// Shortens every maximal run of equal bits by one; runs of length 1 stay.
    RunDecrement,
    Lookup(BTreeMap<Vec<u8>, Vec<u8>>),
}

impl ExchangeFunction {
    /// Lookup table from `visitation<TAB>emitted` lines. Blank lines and `#`
    /// comments are skipped; a leading `V`/`E` on either field is accepted.
    pub fn parse_lookup(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let (v, e) = line
                .split_once('\t')
                .ok_or_else(|| err(format!("expected `visitation<TAB>emitted`, got {line:?}")))?;
            let v = parse_bits(v.trim().trim_start_matches('V'))
                .filter(|b| !b.is_empty())
                .ok_or_else(|| err(format!("bad visitation word {v:?}")))?;
            let e = parse_bits(e.trim().trim_start_matches('E'))
                .filter(|b| !b.is_empty())
                .ok_or_else(|| err(format!("bad emitted word {e:?}")))?;
            if map.insert(v.clone(), e).is_some() {
                return Err(err(format!("duplicate visitation word {}", bits_to_string(&v))));
            }
        }
        Ok(ExchangeFunction::Lookup(map))
    }

    pub fn lookup_text(&self) -> Option<String> {
        match self {
            ExchangeFunction::Lookup(map) => Some(
                map.iter()
                    .map(|(v, e)| format!("{}\t{}\n", bits_to_string(v), bits_to_string(e)))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// True when each emitted bit depends only on the visitation bit at the
    /// same position, so bits can be streamed one crossing at a time.
    pub fn is_bitwise(&self) -> bool {
        matches!(self, ExchangeFunction::Identity | ExchangeFunction::BitwiseNot)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExchangeFunction::Identity => "identity",
            ExchangeFunction::BitwiseNot => "not",
            ExchangeFunction::RunDecrement => "rundec",
            ExchangeFunction::Lookup(_) => "lookup",
        }
    }
}

impl fmt::Display for ExchangeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())
    }
}

/// Accepts `identity`, `not`, `rundec`. Lookup tables are loaded from a file
/// by the caller and built with [`ExchangeFunction::parse_lookup`].
impl FromStr for ExchangeFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ExchangeFunction::Identity),
            "not" | "bitwise_not" => Ok(ExchangeFunction::BitwiseNot),
            "rundec" | "run_decrement" => Ok(ExchangeFunction::RunDecrement),
            _ => Err(Error::InvalidArgument(format!("unknown exchange kind {s:?}"))),
        }
    }
}

pub fn emit(f: &ExchangeFunction, v: &[u8]) -> Result<Vec<u8>> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("visitation word is empty".into()));
    }
    let out = match f {
        ExchangeFunction::Identity => v.to_vec(),
        ExchangeFunction::BitwiseNot => v.iter().map(|b| b ^ 1).collect(),
        ExchangeFunction::RunDecrement => {
            let mut out = Vec::with_capacity(v.len());
            for run in v.chunk_by(|a, b| a == b) {
                let keep = if run.len() == 1 { 1 } else { run.len() - 1 };
                out.extend(std::iter::repeat_n(run[0], keep));
            }
            out
        }
        ExchangeFunction::Lookup(map) => map
            .get(v)
            .cloned()
            .ok_or_else(|| Error::LookupMiss(bits_to_string(v)))?,
    };
    if out.is_empty() {
        return Err(Error::EmptyOutput);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        parse_bits(s).unwrap()
    }

    #[test]
    fn identity_passes_through() {
        let v = bits("0000111111111111");
        assert_eq!(emit(&ExchangeFunction::Identity, &v).unwrap(), v);
    }

    #[test]
    fn run_decrement_reproduces_first_table_row() {
        let out = emit(&ExchangeFunction::RunDecrement, &bits("0000011100011111000111")).unwrap();
        assert_eq!(bits_to_string(&out), "0000110011110011");
    }

    #[test]
    fn run_decrement_keeps_singletons() {
        let out = emit(&ExchangeFunction::RunDecrement, &bits("0100111")).unwrap();
        assert_eq!(bits_to_string(&out), "01011");
        assert_eq!(emit(&ExchangeFunction::RunDecrement, &bits("1")).unwrap(), bits("1"));
        assert_eq!(emit(&ExchangeFunction::RunDecrement, &bits("11")).unwrap(), bits("1"));
    }

    #[test]
    fn lookup_table_from_text() {
        let f = ExchangeFunction::parse_lookup(
            "# two systems\nV0000011100011111000111\tE0000110011110011\n0000111111111111\t00000000011\n",
        )
        .unwrap();
        assert_eq!(bits_to_string(&emit(&f, &bits("0000111111111111")).unwrap()), "00000000011");
        assert!(matches!(emit(&f, &bits("01")), Err(Error::LookupMiss(_))));
        let again = ExchangeFunction::parse_lookup(&f.lookup_text().unwrap()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn lookup_parse_errors() {
        assert!(matches!(
            ExchangeFunction::parse_lookup("01 10\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(ExchangeFunction::parse_lookup("01\t1x\n").is_err());
        assert!(ExchangeFunction::parse_lookup("01\t1\n01\t0\n").is_err());
    }

    #[test]
    fn empty_input_rejected() {
        assert!(emit(&ExchangeFunction::Identity, &[]).is_err());
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("not".parse::<ExchangeFunction>().unwrap(), ExchangeFunction::BitwiseNot);
        assert_eq!("rundec".parse::<ExchangeFunction>().unwrap(), ExchangeFunction::RunDecrement);
        assert!("complement".parse::<ExchangeFunction>().is_err());
    }
}
