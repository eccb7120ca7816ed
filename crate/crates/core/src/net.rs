//! Digital nets in base 2.
//!
//! A net is given by `s` generating matrices of shape `n × m`. Point `h` has
//! digit matrix `x_h` whose row `i` is `C_i · h`, with `h` read as the digit
//! vector `(h_0, …, h_{m-1})`, `h_0` the least significant bit. Row `r` of a
//! generating matrix yields digit `r + 1` after the binary point.
//!
//! Reals are always emitted shifted by `2^{-n-1}`, the midpoint of the
//! `2^{-n}`-cell the digits select.

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::rng::RandomStream;

/// Largest supported `m`; indices are `u64`.
pub const MAX_M: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitalNet {
    s: usize,
    m: usize,
    n: usize,
    gen: Vec<Gf2Matrix>,
}

/// Digits of one point: row `i` holds `x_{i,1} … x_{i,n}` in columns `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointBits(pub Gf2Matrix);

impl PointBits {
    pub fn s(&self) -> usize {
        self.0.rows()
    }

    pub fn n(&self) -> usize {
        self.0.cols()
    }

    pub fn digit(&self, i: usize, j: usize) -> bool {
        self.0.get(i, j)
    }

    pub fn xor(&self, other: &PointBits) -> PointBits {
        PointBits(Gf2Matrix::from_fn(self.s(), self.n(), |i, j| {
            self.digit(i, j) ^ other.digit(i, j)
        }))
    }

    /// Coordinates in `(0, 1)`: `Σ_j x_{i,j} 2^{-j} + 2^{-n-1}`.
    pub fn to_real(&self) -> Vec<f64> {
        let n = self.n();
        (0..self.s())
            .map(|i| {
                if n <= 64 {
                    let w = (0..n).fold(0u64, |acc, j| acc | (self.digit(i, j) as u64) << (n - 1 - j));
                    word_to_real(w, n)
                } else {
                    let mut v = 2f64.powi(-(n as i32) - 1);
                    for j in (0..n).rev() {
                        if self.digit(i, j) {
                            v += 2f64.powi(-(j as i32) - 1);
                        }
                    }
                    v
                }
            })
            .collect()
    }
}

/// Real coordinate of an `n`-digit word whose most significant digit is bit `n-1`.
#[inline]
pub fn word_to_real(w: u64, n: usize) -> f64 {
    debug_assert!(n <= 64);
    // (2w + 1) / 2^{n+1}, rounded once
    let num = ((w as u128) << 1) | 1;
    num as f64 * 2f64.powi(-(n as i32) - 1)
}

impl DigitalNet {
    /// Builds a net from its generating matrices; all must share one shape.
    pub fn new(gen: Vec<Gf2Matrix>) -> Result<Self> {
        let Some(first) = gen.first() else {
            return Err(Error::invalid("a digital net needs at least one generating matrix"));
        };
        let (n, m) = (first.rows(), first.cols());
        if n == 0 {
            return Err(Error::invalid("precision n must be at least 1"));
        }
        if m > MAX_M {
            return Err(Error::invalid(format!("m = {m} exceeds the supported maximum {MAX_M}")));
        }
        for (i, c) in gen.iter().enumerate() {
            if (c.rows(), c.cols()) != (n, m) {
                return Err(Error::dim(format!(
                    "generating matrix {} is {}x{}, expected {n}x{m}",
                    i + 1,
                    c.rows(),
                    c.cols()
                )));
            }
        }
        Ok(Self { s: gen.len(), m, n, gen })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_points(&self) -> u64 {
        1u64 << self.m
    }

    pub fn matrix(&self, i: usize) -> &Gf2Matrix {
        &self.gen[i]
    }

    pub fn matrices(&self) -> &[Gf2Matrix] {
        &self.gen
    }

    pub fn point(&self, h: u64) -> Result<PointBits> {
        if h >= self.num_points() {
            return Err(Error::invalid(format!(
                "point index {h} out of range for 2^{} points",
                self.m
            )));
        }
        let mut x = Gf2Matrix::zeros(self.s, self.n);
        for (i, c) in self.gen.iter().enumerate() {
            for r in 0..self.n {
                let parity = c
                    .row(r)
                    .first()
                    .map_or(0, |&w| (w & h).count_ones() & 1);
                if parity == 1 {
                    x.set(i, r, true);
                }
            }
        }
        Ok(PointBits(x))
    }

    /// Per dimension, column `c` of `C_i` as an `n`-digit word (row 1 in bit `n-1`).
    /// Requires `n <= 64`.
    pub fn column_words(&self) -> Result<Vec<Vec<u64>>> {
        if self.n > 64 {
            return Err(Error::invalid(format!("n = {} exceeds 64 digits", self.n)));
        }
        let n = self.n;
        Ok(self
            .gen
            .iter()
            .map(|c| {
                (0..self.m)
                    .map(|col| {
                        (0..n).fold(0u64, |acc, r| acc | (c.get(r, col) as u64) << (n - 1 - r))
                    })
                    .collect()
            })
            .collect())
    }

    /// All points as reals in index order, flattened point-major (`N * s` values).
    pub fn real_points(&self) -> Result<Vec<f64>> {
        let cols = self.column_words()?;
        let mut out = Vec::with_capacity(self.num_points() as usize * self.s);
        for h in 0..self.num_points() {
            for dim in &cols {
                out.push(word_to_real(point_word(dim, h), self.n));
            }
        }
        Ok(out)
    }

    /// The net spanned by the first `m` columns, i.e. the first `2^m` points.
    pub fn truncate(&self, m: usize) -> Result<DigitalNet> {
        if m > self.m {
            return Err(Error::invalid(format!("cannot take {m} columns of a net with m = {}", self.m)));
        }
        DigitalNet::new(self.gen.iter().map(|c| c.left_columns(m)).collect())
    }

    /// True when the `2^m` points are pairwise distinct (stacked matrices have rank m).
    pub fn has_distinct_points(&self) -> bool {
        let stacked = self
            .gen
            .iter()
            .skip(1)
            .fold(self.gen[0].clone(), |acc, c| acc.vstack(c).expect("shapes checked"));
        stacked.rank() == self.m
    }

    /// Left-multiplies each generating matrix by the matching scramble matrix.
    pub fn scramble(&self, l: &ScrambleSet) -> Result<DigitalNet> {
        if l.s() != self.s || l.n() != self.n {
            return Err(Error::dim(format!(
                "scramble set (s={}, n={}) does not fit net (s={}, n={})",
                l.s(),
                l.n(),
                self.s,
                self.n
            )));
        }
        let gen = l
            .mats
            .iter()
            .zip(&self.gen)
            .map(|(li, ci)| li.multiply(ci))
            .collect::<Result<Vec<_>>>()?;
        DigitalNet::new(gen)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.s, self.n, self.m);
        for (i, c) in self.gen.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&c.to_string());
        }
        out
    }

    pub fn from_text(text: &str, origin: &std::path::Path) -> Result<DigitalNet> {
        // header is `s n m`
        let blocks = crate::textfmt::parse_blocks(text, origin, 3, |h| (h[1], h[2]))?;
        DigitalNet::new(blocks)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<DigitalNet> {
        let path = path.as_ref();
        let text = crate::textfmt::read(path)?;
        Self::from_text(&text, path)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        crate::textfmt::write(path.as_ref(), &self.to_text())
    }
}

/// Digit word of point `h` in one dimension, from that dimension's column words.
#[inline]
pub fn point_word(cols: &[u64], h: u64) -> u64 {
    let mut w = 0;
    let mut bits = h;
    while bits != 0 {
        w ^= cols[bits.trailing_zeros() as usize];
        bits &= bits - 1;
    }
    w
}

/// One non-singular lower-triangular `n × n` matrix per dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScrambleSet {
    n: usize,
    mats: Vec<Gf2Matrix>,
}

impl ScrambleSet {
    pub fn new(mats: Vec<Gf2Matrix>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::invalid("a scramble set needs at least one matrix"));
        };
        let n = first.rows();
        for (i, l) in mats.iter().enumerate() {
            if l.rows() != n || !l.is_unit_lower_triangular() {
                return Err(Error::invalid(format!(
                    "scramble matrix {} is not a {n}x{n} lower-triangular matrix with unit diagonal",
                    i + 1
                )));
            }
        }
        Ok(Self { n, mats })
    }

    pub fn identity(s: usize, n: usize) -> Self {
        Self {
            n,
            mats: vec![Gf2Matrix::identity(n); s],
        }
    }

    pub fn random(s: usize, n: usize, rng: &mut RandomStream) -> Self {
        Self {
            n,
            mats: (0..s)
                .map(|_| Gf2Matrix::random_nonsingular_lower_triangular(n, rng))
                .collect(),
        }
    }

    pub fn s(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self, i: usize) -> &Gf2Matrix {
        &self.mats[i]
    }

    pub fn is_identity(&self) -> bool {
        self.mats.iter().all(|l| *l == Gf2Matrix::identity(self.n))
    }

    /// `then ∘ self`: scrambling by the result equals scrambling by `self` and then by `then`.
    pub fn then(&self, then: &ScrambleSet) -> Result<ScrambleSet> {
        if then.s() != self.s() || then.n != self.n {
            return Err(Error::dim("scramble sets differ in shape"));
        }
        let mats = then
            .mats
            .iter()
            .zip(&self.mats)
            .map(|(a, b)| a.multiply(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: self.n, mats })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.s(), self.n);
        for (i, l) in self.mats.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&l.to_string());
        }
        out
    }

    pub fn from_text(text: &str, origin: &std::path::Path) -> Result<ScrambleSet> {
        let blocks = crate::textfmt::parse_blocks(text, origin, 2, |h| (h[1], h[1]))?;
        ScrambleSet::new(blocks)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<ScrambleSet> {
        let path = path.as_ref();
        let text = crate::textfmt::read(path)?;
        Self::from_text(&text, path)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        crate::textfmt::write(path.as_ref(), &self.to_text())
    }
}

/// Interleaves the rows of each group of `alpha` consecutive `m × m` matrices
/// round-robin, giving `mats.len() / alpha` matrices of shape `(m·alpha) × m`.
pub fn interlace(mats: &[Gf2Matrix], alpha: usize) -> Result<Vec<Gf2Matrix>> {
    if alpha == 0 || !mats.len().is_multiple_of(alpha) {
        return Err(Error::invalid(format!(
            "{} matrices cannot be interlaced in groups of {alpha}",
            mats.len()
        )));
    }
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let m = first.cols();
    if let Some((i, bad)) = mats.iter().enumerate().find(|(_, c)| c.rows() != m || c.cols() != m) {
        return Err(Error::dim(format!(
            "matrix {} is {}x{}, expected {m}x{m}",
            i + 1,
            bad.rows(),
            bad.cols()
        )));
    }
    Ok(mats
        .chunks(alpha)
        .map(|group| {
            Gf2Matrix::from_fn(m * alpha, m, |r, c| group[r % alpha].get(r / alpha, c))
        })
        .collect())
}
