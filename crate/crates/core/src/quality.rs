//! Quality measures of digital nets: the exact t-value and the Walsh figure
//! of merit (WAFOM).
//!
//! WAFOM is computed three ways. [`wafom`] evaluates the per-point product
//! formula digit by digit, [`wafom_fast`] evaluates the same formula with
//! byte-indexed tables of partial products, and [`wafom_dual_oracle`] sums
//! `q^{-μ'(A)}` over the nonzero dual space directly, where
//! `μ'(A) = Σ (j + 1) a_{i,j}`. All three accumulate in double-double
//! precision with a fixed pairwise reduction tree over blocks of points, so
//! results do not depend on the number of threads.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::dd::{pairwise_sum, Dd};
use crate::error::{Error, Result};
use crate::net::{point_word, DigitalNet};

/// Points per reduction block.
const BLOCK_BITS: usize = 10;

/// Largest `s·n` accepted by [`wafom_dual_oracle`].
pub const DUAL_ORACLE_MAX_DIGITS: usize = 24;

fn check_base(q: u32) -> Result<()> {
    match q {
        2 | 4 => Ok(()),
        _ => Err(Error::invalid(format!("WAFOM base must be 2 or 4, got {q}"))),
    }
}

/// `q^{-(j+1)}` for digit `j` (1-based), exact as a power of two.
fn digit_weight(q: u32, j: usize) -> f64 {
    let log2q = if q == 2 { 1 } else { 2 };
    2f64.powi(-((log2q * (j + 1)) as i32))
}

/// Factor `1 + (-1)^x q^{-(j+1)}` for digit `j` (1-based) and digit value `x`.
fn digit_factor(q: u32, j: usize, x: bool) -> Dd {
    let w = digit_weight(q, j);
    Dd::sum_of(1.0, if x { -w } else { w })
}

/// Exact t-value: the smallest `t` such that for every `d_1 + … + d_s = m − t`
/// the first `d_i` rows of every `C_i` are jointly linearly independent.
pub fn t_value(net: &DigitalNet) -> Result<usize> {
    let (m, n) = (net.m(), net.n());
    if m > n {
        return Err(Error::invalid(format!(
            "t-value needs m <= n, got m = {m}, n = {n}"
        )));
    }
    let rows: Vec<Vec<u64>> = net
        .matrices()
        .iter()
        .map(|c| (0..m).map(|r| c.row_word(r)).collect())
        .collect();
    for strength in (0..=m).rev() {
        let mut basis = Basis::default();
        if all_compositions_independent(&rows, 0, strength, &mut basis) {
            return Ok(m - strength);
        }
    }
    unreachable!("strength 0 always succeeds")
}

/// Echelon basis keyed by leading bit; supports LIFO removal.
struct Basis {
    pivots: [u64; 64],
}

impl Default for Basis {
    fn default() -> Self {
        Self { pivots: [0; 64] }
    }
}

impl Basis {
    /// Inserts `v`, returning its pivot, or `None` if it is dependent.
    #[inline]
    fn insert(&mut self, mut v: u64) -> Option<usize> {
        while v != 0 {
            let p = 63 - v.leading_zeros() as usize;
            if self.pivots[p] == 0 {
                self.pivots[p] = v;
                return Some(p);
            }
            v ^= self.pivots[p];
        }
        None
    }

    #[inline]
    fn remove(&mut self, pivot: usize) {
        self.pivots[pivot] = 0;
    }
}

// Depth-first over compositions. Rows of the current dimension are added one
// at a time on top of the shared basis, so siblings reuse the elimination
// state; any dependency inside a partial system already defeats `strength`.
fn all_compositions_independent(rows: &[Vec<u64>], dim: usize, remaining: usize, basis: &mut Basis) -> bool {
    let last = dim + 1 == rows.len();
    let mut added = Vec::with_capacity(remaining);
    let mut ok = true;
    for d in 0..=remaining {
        if d > 0 {
            match basis.insert(rows[dim][d - 1]) {
                Some(p) => added.push(p),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !last && !all_compositions_independent(rows, dim + 1, remaining - d, basis) {
            ok = false;
            break;
        }
    }
    for p in added.into_iter().rev() {
        basis.remove(p);
    }
    ok
}

fn block_ranges(m: usize) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let block = BLOCK_BITS.min(m);
    let blocks = 1usize << (m - block);
    (0..blocks)
        .into_par_iter()
        .map(move |b| ((b as u64) << block, 1u64 << block))
}

/// WAFOM by the per-point product formula, digit by digit in index order.
pub fn wafom(net: &DigitalNet, q: u32) -> Result<f64> {
    check_base(q)?;
    let (s, n, m) = (net.s(), net.n(), net.m());
    let factors: Vec<[Dd; 2]> = (1..=n)
        .map(|j| [digit_factor(q, j, false), digit_factor(q, j, true)])
        .collect();
    let block_sums: Vec<Dd> = if n <= 64 {
        let cols = net.column_words()?;
        block_ranges(m)
            .map(|(start, len)| {
                let mut acc = Dd::ZERO;
                for h in start..start + len {
                    let mut prod = Dd::ONE;
                    for dim in &cols {
                        let w = point_word(dim, h);
                        for (j, f) in factors.iter().enumerate() {
                            prod = prod * f[((w >> (n - 1 - j)) & 1) as usize];
                        }
                    }
                    acc = acc + (prod - Dd::ONE);
                }
                acc
            })
            .collect()
    } else {
        block_ranges(m)
            .map(|(start, len)| {
                let mut acc = Dd::ZERO;
                for h in start..start + len {
                    let x = net.point(h).expect("index in range");
                    let mut prod = Dd::ONE;
                    for i in 0..s {
                        for (j, f) in factors.iter().enumerate() {
                            prod = prod * f[x.digit(i, j) as usize];
                        }
                    }
                    acc = acc + (prod - Dd::ONE);
                }
                acc
            })
            .collect()
    };
    Ok(pairwise_sum(&block_sums).scale(2f64.powi(-(m as i32))).to_f64())
}

/// Table-driven WAFOM evaluator for a fixed precision `n ≤ 64` and base `q`.
///
/// Digit words are split into bytes; each byte position has a 256-entry table
/// of partial products, so one point costs `s·⌈n/8⌉` multiplications.
#[derive(Clone, Debug)]
pub struct WafomTables {
    n: usize,
    q: u32,
    tables: Vec<[Dd; 256]>,
}

impl WafomTables {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        check_base(q)?;
        if n == 0 || n > 64 {
            return Err(Error::invalid(format!("table evaluation needs 1 <= n <= 64, got {n}")));
        }
        let tables = (0..n.div_ceil(8))
            .map(|chunk| {
                let mut t = [Dd::ONE; 256];
                for (byte, entry) in t.iter_mut().enumerate() {
                    for b in 0..8 {
                        let bit = chunk * 8 + b;
                        if bit < n {
                            // word bit `bit` holds digit j = n - bit
                            *entry = *entry * digit_factor(q, n - bit, (byte >> b) & 1 == 1);
                        }
                    }
                }
                t
            })
            .collect();
        Ok(Self { n, q, tables })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    fn point_term(&self, words: &[u64]) -> Dd {
        let mut prod = Dd::ONE;
        for &w in words {
            for (c, t) in self.tables.iter().enumerate() {
                prod = prod * t[((w >> (8 * c)) & 0xff) as usize];
            }
        }
        prod - Dd::ONE
    }

    /// WAFOM of the net whose dimension `i` has column words `cols[i]`
    /// (as produced by [`DigitalNet::column_words`]); `m` is the column count.
    ///
    /// Points inside each block are visited in Gray-code order.
    pub fn evaluate(&self, cols: &[Vec<u64>], m: usize) -> f64 {
        let s = cols.len();
        let block_sums: Vec<Dd> = block_ranges(m)
            .map(|(start, len)| {
                let mut words: Vec<u64> = cols.iter().map(|c| point_word(c, start)).collect();
                let mut acc = self.point_term(&words);
                for k in 1..len {
                    let c = k.trailing_zeros() as usize;
                    for i in 0..s {
                        words[i] ^= cols[i][c];
                    }
                    acc = acc + self.point_term(&words);
                }
                acc
            })
            .collect();
        pairwise_sum(&block_sums).scale(2f64.powi(-(m as i32))).to_f64()
    }
}

/// WAFOM by table lookup; requires `n ≤ 64`.
pub fn wafom_fast(net: &DigitalNet, q: u32) -> Result<f64> {
    check_base(q)?;
    let tables = WafomTables::new(net.n(), q)?;
    Ok(tables.evaluate(&net.column_words()?, net.m()))
}

/// WAFOM as `Σ q^{-μ'(A)}` over the nonzero elements `A` of the dual space,
/// enumerated from a null-space basis. Requires `s·n ≤ 24`.
pub fn wafom_dual_oracle(net: &DigitalNet, q: u32) -> Result<f64> {
    check_base(q)?;
    let (s, n, m) = (net.s(), net.n(), net.m());
    let digits = s * n;
    if digits > DUAL_ORACLE_MAX_DIGITS {
        return Err(Error::invalid(format!(
            "dual enumeration needs s*n <= {DUAL_ORACLE_MAX_DIGITS}, got {digits}"
        )));
    }
    // Digit (i, j) (j 1-based) is coordinate i*n + j - 1. Row c of the system
    // is column c of every C_i; the dual space is its null space.
    let mut system: Vec<u32> = (0..m)
        .map(|c| {
            let mut row = 0u32;
            for (i, g) in net.matrices().iter().enumerate() {
                for r in 0..n {
                    if g.get(r, c) {
                        row |= 1 << (i * n + r);
                    }
                }
            }
            row
        })
        .collect();
    let basis = null_space(&mut system, digits);

    let weight_of = |bit: usize| (bit % n) + 2;
    let max_weight: usize = (0..digits).map(weight_of).sum();
    let mut counts = vec![0u64; max_weight + 1];
    let mut a = 0u32;
    for k in 1u64..(1u64 << basis.len()) {
        a ^= basis[k.trailing_zeros() as usize];
        let mut weight = 0;
        let mut bits = a;
        while bits != 0 {
            weight += weight_of(bits.trailing_zeros() as usize);
            bits &= bits - 1;
        }
        counts[weight] += 1;
    }

    // smallest terms first
    let log2q = if q == 2 { 1 } else { 2 };
    let mut total = Dd::ZERO;
    for (w, &count) in counts.iter().enumerate().rev() {
        if count > 0 {
            total = total + Dd::from_f64(count as f64).scale(2f64.powi(-((log2q * w) as i32)));
        }
    }
    Ok(total.to_f64())
}

/// Basis of `{x : row · x = 0 for every row}` over `width` coordinates.
fn null_space(rows: &mut [u32], width: usize) -> Vec<u32> {
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..width {
        let bit = 1u32 << col;
        let Some(p) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= pivot;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    (0..width)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = 1u32 << free;
            for (r, &pc) in pivot_cols.iter().enumerate() {
                if rows[r] >> free & 1 == 1 {
                    v |= 1 << pc;
                }
            }
            v
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QualityReport {
    pub t: usize,
    pub wafom: f64,
    pub q: u32,
    pub s: usize,
    pub m: usize,
    pub n: usize,
    /// False when the stacked generating matrices lack full column rank.
    #[serde(skip)]
    pub distinct_points: bool,
    #[serde(skip)]
    pub t_elapsed: Duration,
    #[serde(skip)]
    pub wafom_elapsed: Duration,
}

/// t-value and WAFOM of `net`; WAFOM uses the table path when `n ≤ 64`.
pub fn quality_report(net: &DigitalNet, q: u32) -> Result<QualityReport> {
    check_base(q)?;
    let start = Instant::now();
    let t = t_value(net)?;
    let t_elapsed = start.elapsed();
    let start = Instant::now();
    let w = if net.n() <= 64 {
        wafom_fast(net, q)?
    } else {
        wafom(net, q)?
    };
    let wafom_elapsed = start.elapsed();
    let distinct_points = net.has_distinct_points();
    if !distinct_points {
        log::warn!("generating matrices lack full column rank; the 2^m points are not distinct");
    }
    Ok(QualityReport {
        t,
        wafom: w,
        q,
        s: net.s(),
        m: net.m(),
        n: net.n(),
        distinct_points,
        t_elapsed,
        wafom_elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Gf2Matrix;
    use crate::rng::RandomStream;

    fn single_digit_net() -> DigitalNet {
        DigitalNet::new(vec![Gf2Matrix::from_fn(2, 1, |r, _| r == 0)]).unwrap()
    }

    #[test]
    fn single_point_net() {
        let net = DigitalNet::new(vec![Gf2Matrix::zeros(1, 0)]).unwrap();
        assert_eq!(wafom(&net, 2).unwrap(), 0.25);
        assert_eq!(wafom_fast(&net, 2).unwrap(), 0.25);
        assert_eq!(wafom_dual_oracle(&net, 2).unwrap(), 0.25);
    }

    #[test]
    fn hand_value_all_paths() {
        let net = single_digit_net();
        assert_eq!(wafom(&net, 2).unwrap(), 0.125);
        assert_eq!(wafom_fast(&net, 2).unwrap(), 0.125);
        assert_eq!(wafom_dual_oracle(&net, 2).unwrap(), 0.125);
    }

    #[test]
    fn whole_space_has_zero_dual_sum() {
        // s = 2, n = 2, m = 4: C_1, C_2 select disjoint halves of the index digits
        let c1 = Gf2Matrix::from_fn(2, 4, |r, c| c == r);
        let c2 = Gf2Matrix::from_fn(2, 4, |r, c| c == r + 2);
        let net = DigitalNet::new(vec![c1, c2]).unwrap();
        assert_eq!(wafom_dual_oracle(&net, 2).unwrap(), 0.0);
        assert!(wafom(&net, 2).unwrap().abs() < 1e-16);
    }

    #[test]
    fn base_four_is_smaller() {
        let mut rng = RandomStream::new(11);
        for _ in 0..10 {
            let net = DigitalNet::new(
                (0..3).map(|_| Gf2Matrix::from_fn(16, 6, |_, _| rng.next_bit())).collect(),
            )
            .unwrap();
            assert!(wafom(&net, 4).unwrap() < wafom(&net, 2).unwrap());
        }
    }

    #[test]
    fn rejects_other_bases() {
        let net = single_digit_net();
        for f in [wafom, wafom_fast, wafom_dual_oracle] {
            assert!(f(&net, 3).is_err());
        }
        assert!(quality_report(&net, 8).is_err());
    }

    #[test]
    fn dual_oracle_size_limit() {
        let net = DigitalNet::new(vec![Gf2Matrix::zeros(13, 2); 2]).unwrap();
        assert!(wafom_dual_oracle(&net, 2).is_err());
    }

    #[test]
    fn t_value_identity_and_error() {
        for m in 1..8 {
            let net = DigitalNet::new(vec![Gf2Matrix::from_fn(m + 3, m, |r, c| r == c)]).unwrap();
            assert_eq!(t_value(&net).unwrap(), 0);
        }
        let wide = DigitalNet::new(vec![Gf2Matrix::identity(3).left_columns(2); 1]).unwrap();
        assert_eq!(t_value(&wide).unwrap(), 0);
        let too_wide = DigitalNet::new(vec![Gf2Matrix::zeros(2, 3)]).unwrap();
        assert!(t_value(&too_wide).is_err());
    }

    #[test]
    fn t_value_of_zero_net_is_m() {
        let net = DigitalNet::new(vec![Gf2Matrix::zeros(6, 5); 2]).unwrap();
        assert_eq!(t_value(&net).unwrap(), 5);
    }

    #[test]
    fn null_space_is_orthogonal() {
        let mut rng = RandomStream::new(12);
        for _ in 0..50 {
            let rows: Vec<u32> = (0..5).map(|_| (rng.next_u64() & 0xfff) as u32).collect();
            let mut work = rows.clone();
            let basis = null_space(&mut work, 12);
            let rank = Gf2Matrix::from_fn(5, 12, |r, c| rows[r] >> c & 1 == 1).rank();
            assert_eq!(basis.len(), 12 - rank);
            for v in &basis {
                for r in &rows {
                    assert_eq!((v & r).count_ones() % 2, 0);
                }
            }
        }
    }

    #[test]
    fn report_fields() {
        let net = single_digit_net();
        let r = quality_report(&net, 2).unwrap();
        assert_eq!((r.t, r.q, r.s, r.m, r.n), (0, 2, 1, 1, 2));
        assert_eq!(r.wafom, 0.125);
        assert!(r.distinct_points);
    }
}
