//! Plain-text matrix blocks shared by the net and scramble file formats.
//!
//! Line 1 is a header of decimal fields whose first entry is the block count.
//! Blocks follow, separated by exactly one blank line; each block row is a
//! string of `0`/`1` characters, column 1 first.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a header of `header_len` fields and the blocks it announces.
/// `shape` maps the header to the `(rows, cols)` of every block.
pub(crate) fn parse_blocks(
    text: &str,
    origin: &Path,
    header_len: usize,
    shape: impl Fn(&[usize]) -> (usize, usize),
) -> Result<Vec<Gf2Matrix>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let lines: Vec<&str> = text.lines().collect();
    let header_line = lines.first().copied().unwrap_or("");
    let header = header_line
        .split_whitespace()
        .map(|f| f.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .ok()
        .filter(|h| h.len() == header_len)
        .ok_or_else(|| {
            err(1, format!("malformed header {header_line:?}, expected {header_len} non-negative integers"))
        })?;
    let count = header[0];
    if count == 0 {
        return Err(err(1, "block count must be at least 1".into()));
    }
    let (rows, cols) = shape(&header);
    if rows == 0 {
        return Err(err(1, "matrices must have at least one row".into()));
    }

    let mut blocks = Vec::with_capacity(count);
    let mut idx = 1;
    for b in 0..count {
        let dim = b + 1;
        if b > 0 {
            match lines.get(idx) {
                Some(l) if l.trim().is_empty() => idx += 1,
                Some(_) => {
                    return Err(err(idx + 1, format!("expected a blank line before the block for dimension {dim}")))
                }
                None => return Err(err(idx + 1, format!("missing matrix block for dimension {dim}"))),
            }
        }
        let mut m = Gf2Matrix::zeros(rows, cols);
        for r in 0..rows {
            let lineno = idx + 1;
            let Some(line) = lines.get(idx) else {
                return Err(err(
                    lineno,
                    if r == 0 {
                        format!("missing matrix block for dimension {dim}")
                    } else {
                        format!("block for dimension {dim} ends after {r} rows, expected {rows}")
                    },
                ));
            };
            let line = line.trim_end();
            if line.is_empty() && cols > 0 {
                return Err(err(
                    lineno,
                    if r == 0 {
                        format!("missing matrix block for dimension {dim}")
                    } else {
                        format!("block for dimension {dim} ends after {r} rows, expected {rows}")
                    },
                ));
            }
            if let Some(bad) = line.chars().find(|c| *c != '0' && *c != '1') {
                return Err(err(lineno, format!("non-binary character {bad:?}")));
            }
            if line.len() != cols {
                return Err(err(lineno, format!("expected {cols} characters, found {}", line.len())));
            }
            for (c, ch) in line.bytes().enumerate() {
                if ch == b'1' {
                    m.set(r, c, true);
                }
            }
            idx += 1;
        }
        blocks.push(m);
    }
    if let Some(extra) = lines[idx.min(lines.len())..].iter().position(|l| !l.trim().is_empty()) {
        return Err(err(idx + extra + 1, format!("unexpected content after {count} blocks")));
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<Gf2Matrix>> {
        parse_blocks(text, Path::new("t.net"), 3, |h| (h[1], h[2]))
    }

    fn message(r: Result<Vec<Gf2Matrix>>) -> (usize, String) {
        match r.unwrap_err() {
            Error::Parse { line, message, .. } => (line, message),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn missing_block_names_dimension() {
        let (line, msg) = message(parse("2 4 3\n100\n010\n001\n000\n"));
        assert_eq!(line, 6);
        assert!(msg.contains("dimension 2"), "{msg}");
    }

    #[test]
    fn short_block_and_bad_characters() {
        let (line, msg) = message(parse("2 2 2\n10\n\n01\n10\n"));
        assert_eq!(line, 3);
        assert!(msg.contains("ends after 1 rows"), "{msg}");
        let (line, msg) = message(parse("1 2 2\n10\n0x\n"));
        assert_eq!(line, 3);
        assert!(msg.contains("non-binary"), "{msg}");
        let (line, _) = message(parse("1 2 2\n10\n011\n"));
        assert_eq!(line, 3);
    }

    #[test]
    fn malformed_header() {
        assert_eq!(message(parse("2 4\n")).0, 1);
        assert_eq!(message(parse("a b c\n")).0, 1);
        assert_eq!(message(parse("")).0, 1);
    }

    #[test]
    fn separator_and_trailer() {
        let (line, msg) = message(parse("2 1 2\n10\n01\n"));
        assert_eq!(line, 3);
        assert!(msg.contains("blank line"), "{msg}");
        let (line, _) = message(parse("1 1 2\n10\n\n11\n"));
        assert_eq!(line, 4);
        assert_eq!(parse("1 1 2\n10\n\n\n").unwrap().len(), 1);
    }
}
