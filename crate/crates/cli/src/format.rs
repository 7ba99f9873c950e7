//! One vector per line: dense `x0,x1,...` or sparse `i:x i:x ...`.

use std::fmt::Write;

use clap::ValueEnum;
use gausswalk::{SparseVector, WalkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LineFormat {
    Dense,
    Sparse,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("cannot parse `{0}` as a number")]
    Number(String),
    #[error("expected `index:value`, found `{0}`")]
    Pair(String),
    #[error(transparent)]
    Vector(#[from] WalkError),
}

/// Parses one input line. A blank line is the zero vector.
pub fn parse_line(line: &str, format: LineFormat) -> Result<SparseVector, ParseError> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(SparseVector::zero());
    }
    match format {
        LineFormat::Dense => {
            let values = line
                .split(',')
                .map(|tok| parse_number(tok.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SparseVector::from_dense(&values)?)
        }
        LineFormat::Sparse => {
            let entries = line
                .split_whitespace()
                .map(|tok| {
                    let (i, x) = tok.split_once(':').ok_or_else(|| ParseError::Pair(tok.into()))?;
                    let i = i.parse::<usize>().map_err(|_| ParseError::Pair(tok.into()))?;
                    Ok((i, parse_number(x)?))
                })
                .collect::<Result<Vec<_>, ParseError>>()?;
            Ok(SparseVector::new(entries)?)
        }
    }
}

fn parse_number(tok: &str) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| ParseError::Number(tok.into()))
}

/// Prints with 17 significant digits so the line parses back exactly.
pub fn format_line(v: &SparseVector, format: LineFormat, dim: usize) -> String {
    let mut out = String::new();
    match format {
        LineFormat::Dense => {
            let mut dense = vec![0.0; dim.max(v.entries().last().map_or(0, |e| e.0 + 1))];
            for &(i, x) in v.entries() {
                dense[i] = x;
            }
            for (k, x) in dense.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{x:.16e}").unwrap();
            }
        }
        LineFormat::Sparse => {
            for (k, (i, x)) in v.entries().iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                write!(out, "{i}:{x:.16e}").unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_both_formats() {
        let d = parse_line("0, 0.6,0,0.8", LineFormat::Dense).unwrap();
        let s = parse_line("1:0.6 3:0.8", LineFormat::Sparse).unwrap();
        assert_eq!(d, s);
        assert_eq!(parse_line("  ", LineFormat::Dense).unwrap(), SparseVector::zero());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(parse_line("0.1,abc", LineFormat::Dense), Err(ParseError::Number(_))));
        assert!(matches!(parse_line("3-0.1", LineFormat::Sparse), Err(ParseError::Pair(_))));
        assert!(matches!(parse_line("x:0.1", LineFormat::Sparse), Err(ParseError::Pair(_))));
        assert!(matches!(
            parse_line("3:0.1 1:0.1", LineFormat::Sparse),
            Err(ParseError::Vector(WalkError::InvalidVector(_)))
        ));
        assert!(matches!(
            parse_line("0.9,0.9", LineFormat::Dense),
            Err(ParseError::Vector(WalkError::NormTooLarge { .. }))
        ));
    }

    proptest! {
        #[test]
        fn printing_round_trips(raw in proptest::collection::vec(-1.0f64..1.0, 1..12)) {
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
            let values: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            let v = SparseVector::from_dense(&values).unwrap();
            for format in [LineFormat::Dense, LineFormat::Sparse] {
                let back = parse_line(&format_line(&v, format, values.len()), format).unwrap();
                prop_assert_eq!(&back, &v);
            }
        }
    }
}
