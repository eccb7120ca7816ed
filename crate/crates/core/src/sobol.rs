//! Sobol' generating matrices from Joe–Kuo style direction-number tables.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::net::DigitalNet;

const BUNDLED: &str = include_str!("../data/new-joe-kuo-6.dims2-8.txt");

/// One line of a direction-number table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionEntry {
    /// Dimension index, starting at 2.
    pub d: usize,
    /// Degree of the primitive polynomial.
    pub degree: usize,
    /// Inner polynomial coefficients, most significant first.
    pub a: u64,
    /// Initial direction integers `m_1 … m_degree`.
    pub m_init: Vec<u64>,
}

impl DirectionEntry {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.d < 2 {
            return Err(format!("dimension index {} must be at least 2", self.d));
        }
        if self.degree == 0 || self.degree > 63 {
            return Err(format!("degree {} out of range", self.degree));
        }
        if self.m_init.len() != self.degree {
            return Err(format!(
                "degree {} needs {} initial direction numbers, found {}",
                self.degree,
                self.degree,
                self.m_init.len()
            ));
        }
        if self.a >> (self.degree - 1) != 0 {
            return Err(format!("coefficient a = {} has more than {} bits", self.a, self.degree - 1));
        }
        for (k, &mk) in self.m_init.iter().enumerate() {
            let k = k + 1;
            if mk % 2 == 0 {
                return Err(format!("m_{k} = {mk} is even"));
            }
            if mk >> k != 0 {
                return Err(format!("m_{k} = {mk} is not below 2^{k}"));
            }
        }
        Ok(())
    }
}

/// The bundled table prefix (dimensions 2 to 8 of `new-joe-kuo-6.21201`).
pub fn bundled_direction_numbers() -> Vec<DirectionEntry> {
    parse_direction_numbers(BUNDLED, Path::new("<bundled>")).expect("bundled table is valid")
}

pub fn load_direction_numbers(path: impl AsRef<Path>) -> Result<Vec<DirectionEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_direction_numbers(&text, path)
}

/// Parses a table: the first line is a header and is skipped, then one
/// `d s a m_1 … m_s` line per dimension. Blank lines are ignored.
pub fn parse_direction_numbers(text: &str, origin: &Path) -> Result<Vec<DirectionEntry>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut entries: Vec<DirectionEntry> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = line
            .split_whitespace()
            .map(str::parse::<u64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| err(lineno, format!("malformed line: {e}")))?;
        if fields.len() < 4 {
            return Err(err(lineno, format!("expected `d s a m_1 ...`, found {} fields", fields.len())));
        }
        let entry = DirectionEntry {
            d: fields[0] as usize,
            degree: fields[1] as usize,
            a: fields[2],
            m_init: fields[3..].to_vec(),
        };
        entry.validate().map_err(|m| err(lineno, m))?;
        entries.push(entry);
    }
    entries.sort_by_key(|e| e.d);
    if let Some(w) = entries.windows(2).find(|w| w[0].d == w[1].d) {
        return Err(Error::invalid(format!("dimension {} appears twice in {}", w[0].d, origin.display())));
    }
    Ok(entries)
}

/// Direction words `v_1 … v_count` scaled to `n` digits: `v_k = m_k · 2^{n-k}`.
fn direction_words(entry: Option<&DirectionEntry>, count: usize, n: usize) -> Vec<u64> {
    let Some(e) = entry else {
        // first dimension: van der Corput
        return (1..=count).map(|k| 1u64 << (n - k)).collect();
    };
    let deg = e.degree;
    let mut v: Vec<u64> = Vec::with_capacity(count);
    for k in 1..=count {
        let word = if k <= deg {
            e.m_init[k - 1] << (n - k)
        } else {
            let base = v[k - 1 - deg];
            let mut w = base ^ (base >> deg);
            for j in 1..deg {
                if (e.a >> (deg - 1 - j)) & 1 == 1 {
                    w ^= v[k - 1 - j];
                }
            }
            w
        };
        v.push(word);
    }
    v
}

/// The `s`-dimensional Sobol' net with `2^m` points and `n` digits.
pub fn build_sobol(entries: &[DirectionEntry], s: usize, m: usize, n: usize) -> Result<DigitalNet> {
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    if n > 64 {
        return Err(Error::invalid(format!("n = {n} exceeds 64 digits")));
    }
    if m > n {
        return Err(Error::invalid(format!("m = {m} exceeds n = {n}")));
    }
    let mut gen = Vec::with_capacity(s);
    for dim in 1..=s {
        let entry = if dim == 1 {
            None
        } else {
            Some(entries.iter().find(|e| e.d == dim).ok_or_else(|| {
                Error::invalid(format!("no direction numbers for dimension {dim}"))
            })?)
        };
        let words = direction_words(entry, m, n);
        let c = Gf2Matrix::from_fn(n, m, |r, col| (words[col] >> (n - 1 - r)) & 1 == 1);
        debug_assert!(
            (0..m).all(|k| c.get(k, k) && (k + 1..m).all(|r| !c.get(r, k))),
            "top block of dimension {dim} is not unit upper triangular"
        );
        gen.push(c);
    }
    DigitalNet::new(gen)
}
