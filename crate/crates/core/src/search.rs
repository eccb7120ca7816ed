//! Random linear-scrambling search and the naive column-by-column baseline.
//!
//! Candidate `i` (1-based) draws its scramble matrices from
//! `RandomStream::substream(seed, i)`; the unscrambled net is candidate 0.
//! Candidates are scored in parallel, then scanned in index order, so ties
//! go to the smallest index and the result does not depend on thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::net::{DigitalNet, ScrambleSet};
use crate::quality::{t_value, wafom, WafomTables};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Minimize,
    Maximize,
}

impl Objective {
    fn improves(self, candidate: f64, best: f64) -> bool {
        match self {
            Objective::Minimize => candidate < best,
            Objective::Maximize => candidate > best,
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimize" | "min" => Ok(Objective::Minimize),
            "maximize" | "max" => Ok(Objective::Maximize),
            _ => Err(Error::invalid(format!("unknown objective {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Number of random candidates `M`.
    pub candidates: u64,
    pub seed: u64,
    pub q: u32,
    pub include_identity: bool,
    pub objective: Objective,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            candidates: 1000,
            seed: 0,
            q: 2,
            include_identity: true,
            objective: Objective::Minimize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub index: u64,
    pub wafom: f64,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_scramble: ScrambleSet,
    pub best_net: DigitalNet,
    /// Recomputed with the digit-by-digit path.
    pub best_wafom: f64,
    pub candidate_index: u64,
    /// Strict improvements in candidate order.
    pub trace: Vec<TraceEntry>,
}

/// Scramble set of candidate `index` (0 is the identity).
pub fn candidate_scramble(s: usize, n: usize, seed: u64, index: u64) -> ScrambleSet {
    if index == 0 {
        ScrambleSet::identity(s, n)
    } else {
        ScrambleSet::random(s, n, &mut RandomStream::substream(seed, index))
    }
}

/// Draws `cfg.candidates` random scramble sets and keeps the one whose
/// scrambled net has the extremal WAFOM under `cfg.objective`.
pub fn scramble_search(net: &DigitalNet, cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.candidates == 0 {
        return Err(Error::invalid("the search needs at least one candidate"));
    }
    let (s, n, m) = (net.s(), net.n(), net.m());
    if m > n {
        return Err(Error::invalid(format!("scramble search needs m <= n, got m = {m}, n = {n}")));
    }
    let tables = WafomTables::new(n, cfg.q)?;
    let t0 = cfg!(debug_assertions).then(|| t_value(net)).transpose()?;

    let first = if cfg.include_identity { 0 } else { 1 };
    let scores: Vec<(u64, f64)> = (first..=cfg.candidates)
        .into_par_iter()
        .map(|index| {
            let l = candidate_scramble(s, n, cfg.seed, index);
            let scrambled = net.scramble(&l).expect("shapes match");
            if let Some(t0) = t0 {
                if index % 100 == 1 {
                    debug_assert_eq!(t_value(&scrambled).ok(), Some(t0), "candidate {index} changed the t-value");
                }
            }
            let cols = scrambled.column_words().expect("n <= 64");
            (index, tables.evaluate(&cols, m))
        })
        .collect();

    let mut trace: Vec<TraceEntry> = Vec::new();
    for &(index, w) in &scores {
        if trace.last().is_none_or(|best| cfg.objective.improves(w, best.wafom)) {
            trace.push(TraceEntry { index, wafom: w });
        }
    }
    let best = *trace.last().expect("at least one candidate");
    let best_scramble = candidate_scramble(s, n, cfg.seed, best.index);
    let best_net = net.scramble(&best_scramble)?;
    let best_wafom = wafom(&best_net, cfg.q)?;
    debug_assert!(
        (best_wafom - best.wafom).abs() <= 1e-12 * best_wafom.abs().max(f64::MIN_POSITIVE),
        "table and digit paths disagree: {best_wafom} vs {}",
        best.wafom
    );
    Ok(SearchResult {
        best_scramble,
        best_net,
        best_wafom,
        candidate_index: best.index,
        trace,
    })
}

/// Grows generating matrices one column at a time. At step `m` it draws
/// `candidates_per_column` random nonzero column tuples (one `n`-bit column
/// per dimension) and keeps the tuple whose `2^m`-point net has the smallest
/// WAFOM. Returns the nets for `m = 1..=m_max`; each is a prefix of the next.
pub fn naive_column_search(
    s: usize,
    n: usize,
    m_max: usize,
    candidates_per_column: usize,
    seed: u64,
    q: u32,
) -> Result<Vec<DigitalNet>> {
    if s == 0 || candidates_per_column == 0 {
        return Err(Error::invalid("naive search needs s >= 1 and at least one candidate per column"));
    }
    if m_max > n {
        return Err(Error::invalid(format!("m_max = {m_max} exceeds n = {n}")));
    }
    let tables = WafomTables::new(n, q)?;
    let mask = crate::gf2::low_mask(n);
    // column words per dimension, row 1 in bit n-1
    let mut cols: Vec<Vec<u64>> = vec![Vec::new(); s];
    let mut nets = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let mut rng = RandomStream::substream(seed, m as u64);
        let tuples: Vec<Vec<u64>> = (0..candidates_per_column)
            .map(|_| loop {
                let t: Vec<u64> = (0..s).map(|_| rng.next_u64() & mask).collect();
                if t.iter().any(|&w| w != 0) {
                    break t;
                }
            })
            .collect();
        let scores: Vec<f64> = tuples
            .par_iter()
            .map(|t| {
                let trial: Vec<Vec<u64>> = cols
                    .iter()
                    .zip(t)
                    .map(|(c, &w)| c.iter().copied().chain([w]).collect())
                    .collect();
                tables.evaluate(&trial, m)
            })
            .collect();
        let best = scores
            .iter()
            .enumerate()
            .fold(0, |best, (i, &w)| if w < scores[best] { i } else { best });
        for (c, &w) in cols.iter_mut().zip(&tuples[best]) {
            c.push(w);
        }
        let gen = cols
            .iter()
            .map(|c| Gf2Matrix::from_fn(n, m, |r, k| (c[k] >> (n - 1 - r)) & 1 == 1))
            .collect();
        nets.push(DigitalNet::new(gen)?);
    }
    Ok(nets)
}
