//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored contiguously, `words_per_row` machine words each. Column
//! `c` (0-based) lives in bit `c % 64` of word `c / 64`, so the first column
//! is the least significant bit of the first word. Bits past `cols` in the
//! last word of a row are always zero.

use std::fmt;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD);
        Self {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Builds a matrix with at most 64 columns from one word per row.
    pub fn from_row_words(cols: usize, words: &[u64]) -> Self {
        assert!(cols <= WORD, "from_row_words supports at most 64 columns");
        let mask = low_mask(cols);
        let mut m = Self::zeros(words.len(), cols);
        if cols > 0 {
            for (r, &w) in words.iter().enumerate() {
                m.bits[r] = w & mask;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.bits[r * self.words_per_row + c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        let w = &mut self.bits[r * self.words_per_row + c / WORD];
        let bit = 1u64 << (c % WORD);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// Row `r` as a single word; only valid for matrices with at most 64 columns.
    pub fn row_word(&self, r: usize) -> u64 {
        debug_assert!(self.cols <= WORD);
        if self.words_per_row == 0 {
            0
        } else {
            self.bits[r * self.words_per_row]
        }
    }

    /// Column `c` packed as a word with row `r` at bit `r`; needs at most 64 rows.
    pub fn col_word(&self, c: usize) -> u64 {
        assert!(self.rows <= WORD, "col_word supports at most 64 rows");
        (0..self.rows).fold(0, |acc, r| acc | (self.get(r, c) as u64) << r)
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.ones_in_row(r) {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Column indices of the set bits of row `r`, ascending.
    pub fn ones_in_row(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(r).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn multiply(&self, rhs: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Gf2Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in self.ones_in_row(r) {
                for (o, &b) in out.row_mut(r).iter_mut().zip(rhs.row(k)) {
                    *o ^= b;
                }
            }
        }
        out.debug_check_padding();
        Ok(out)
    }

    /// Rank over GF(2) by forward row elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let (wi, bit) = (c / WORD, 1u64 << (c % WORD));
            let Some(p) = (rank..m.rows).find(|&r| m.row(r)[wi] & bit != 0) else {
                continue;
            };
            m.swap_rows(rank, p);
            let pivot: Vec<u64> = m.row(rank).to_vec();
            for r in rank + 1..m.rows {
                if m.row(r)[wi] & bit != 0 {
                    for (a, b) in m.row_mut(r).iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for i in 0..w {
            self.bits.swap(a * w + i, b * w + i);
        }
    }

    /// Square, zero above the diagonal and ones on it.
    pub fn is_unit_lower_triangular(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| self.ones_in_row(r).all(|c| c <= r) && self.get(r, r))
    }

    /// Uniform draw from the n×n lower-triangular matrices with unit diagonal.
    pub fn random_nonsingular_lower_triangular(n: usize, rng: &mut RandomStream) -> Self {
        assert!(n >= 1, "matrix order must be at least 1");
        let mut m = Self::zeros(n, n);
        for r in 0..n {
            // strictly-lower entries of row r are columns 0..r
            let full_words = r / WORD;
            let row = m.row_mut(r);
            for w in row.iter_mut().take(full_words) {
                *w = rng.next_u64();
            }
            if r % WORD != 0 {
                row[full_words] = rng.next_u64() & low_mask(r % WORD);
            }
            row[r / WORD] |= 1u64 << (r % WORD);
        }
        m.debug_check_padding();
        m
    }

    /// Stacks rows of `self` on top of rows of `other`.
    pub fn vstack(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != other.cols {
            return Err(Error::dim(format!(
                "cannot stack {}x{} on {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Ok(Gf2Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            words_per_row: self.words_per_row,
            bits,
        })
    }

    /// First `cols` columns.
    pub fn left_columns(&self, cols: usize) -> Gf2Matrix {
        assert!(cols <= self.cols);
        Gf2Matrix::from_fn(self.rows, cols, |r, c| self.get(r, c))
    }

    /// Appends one column; bit `r` of `col` becomes entry `(r, cols)`.
    pub fn push_column(&self, col: &[bool]) -> Gf2Matrix {
        assert_eq!(col.len(), self.rows);
        Gf2Matrix::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                col[r]
            }
        })
    }

    fn debug_check_padding(&self) {
        if cfg!(debug_assertions) && !self.cols.is_multiple_of(WORD) && self.words_per_row > 0 {
            let pad = !low_mask(self.cols % WORD);
            for r in 0..self.rows {
                debug_assert_eq!(self.row(r)[self.words_per_row - 1] & pad, 0, "padding bits set");
            }
        }
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= WORD {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Matrix {}x{}\n{}", self.rows, self.cols, self)
    }
}
