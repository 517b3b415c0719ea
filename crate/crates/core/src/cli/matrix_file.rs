//! Plain-text complex matrix format.
//!
//! ```text
//! 2 3
//! 1,0 0.5,-2 0,0
//! -1,1 3,0 2.25,0.125
//! ```
//!
//! The first line holds `rows cols`. The entries follow in row-major order as
//! whitespace-separated `re,im` tokens; line breaks between entries carry no
//! meaning. The Unicode minus sign `−` is accepted in place of `-`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokens(line_text: &str, line: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line_text.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, col + 1)),
            (true, Some((b, c))) => {
                out.push(Token {
                    text: &line_text[b..byte],
                    line,
                    column: c,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &line_text[b..],
            line,
            column: c,
        });
    }
    out
}

fn parse_error(tok: &Token<'_>, message: impl Into<String>) -> Error {
    Error::Parse {
        line: tok.line,
        column: tok.column,
        message: message.into(),
    }
}

fn parse_real(tok: &Token<'_>, text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| parse_error(tok, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(tok, format!("non-finite value `{text}`")));
    }
    Ok(v)
}

fn parse_entry(tok: &Token<'_>) -> Result<Complex64> {
    let text = tok.text.replace('\u{2212}', "-");
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| parse_error(tok, format!("expected `re,im`, got `{}`", tok.text)))?;
    Ok(Complex64::new(parse_real(tok, re)?, parse_real(tok, im)?))
}

pub fn parse_complex_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "missing `rows cols` header".into(),
        })?;
    let head = tokens(header, header_line);
    if head.len() != 2 {
        return Err(Error::Parse {
            line: header_line,
            column: 1,
            message: format!("header must be `rows cols`, got `{}`", header.trim()),
        });
    }
    let dim = |tok: &Token<'_>| -> Result<usize> {
        tok.text
            .parse()
            .map_err(|_| parse_error(tok, format!("`{}` is not a dimension", tok.text)))
    };
    let (rows, cols) = (dim(&head[0])?, dim(&head[1])?);

    let expected = rows * cols;
    let mut values = Vec::with_capacity(expected);
    let mut last = (header_line, 1);
    for (n, l) in lines {
        for tok in tokens(l, n) {
            if values.len() == expected {
                return Err(parse_error(
                    &tok,
                    format!("more than the {expected} entries announced by the {rows}x{cols} header"),
                ));
            }
            last = (tok.line, tok.column);
            values.push(parse_entry(&tok)?);
        }
    }
    if values.len() != expected {
        return Err(Error::Parse {
            line: last.0,
            column: last.1,
            message: format!(
                "entry count {} does not match the {rows}x{cols} header ({expected} expected)",
                values.len()
            ),
        });
    }
    Ok(CMatrix::from_row_slice(rows, cols, &values))
}

/// Serializes with shortest round-trip float formatting, so reading the text
/// back yields bit-identical values.
pub fn format_complex_matrix(m: &CMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn read_complex_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_complex_matrix(&text)
}

pub fn write_complex_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    std::fs::write(path, format_complex_matrix(m)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::RngStream;

    #[test]
    fn unicode_minus() {
        let m = parse_complex_matrix("1 1\n2,\u{2212}3").unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert_eq!(m[(0, 0)], Complex64::new(2.0, -3.0));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = RngStream::new(11, 0);
        let m = rng.complex_normal_matrix(10, 4);
        let back = parse_complex_matrix(&format_complex_matrix(&m)).unwrap();
        assert_eq!(m, back);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        write_complex_matrix(&path, &m).unwrap();
        assert_eq!(read_complex_matrix(&path).unwrap(), m);
    }

    #[test]
    fn count_mismatch() {
        let mut text = String::from("10 4\n");
        for _ in 0..39 {
            text.push_str("1,0 ");
        }
        let err = parse_complex_matrix(&text).unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("entry count 39"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_carry_position() {
        match parse_complex_matrix("1 2\n1,0  x,1").unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 6)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_complex_matrix("1 1\ninf,0"),
            Err(Error::Parse { line: 2, column: 1, .. })
        ));
        assert!(matches!(
            parse_complex_matrix("3\n1,0"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_complex_matrix("1 1\n1,0 2,0").is_err());
        assert!(parse_complex_matrix("").is_err());
    }
}
