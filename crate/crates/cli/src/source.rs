use std::path::{Path, PathBuf};

use clap::Args;
use lowwafom::genz::NetFamily;
use lowwafom::{
    build_sobol, bundled_direction_numbers, load_direction_numbers, naive_column_search, scramble_search,
    DigitalNet, DirectionEntry, Objective, SearchConfig,
};

/// A usage mistake caught by the tool itself (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

/// Either `--net FILE` or a Sobol' net from `--s` (with optional
/// `--sobol-dirs` and `--n`), truncated or built to `--m` columns.
#[derive(Args)]
pub struct NetArgs {
    /// Net file (header `s n m`, then s blank-separated n-by-m 0/1 blocks).
    #[arg(long, conflicts_with_all = ["sobol_dirs", "s", "n"])]
    pub net: Option<PathBuf>,
    /// Direction-number table (columns `d s a m_i...`); default is the bundled table.
    #[arg(long)]
    pub sobol_dirs: Option<PathBuf>,
    /// Dimension of the Sobol' net.
    #[arg(long)]
    pub s: Option<usize>,
    /// Output digits of the Sobol' net.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Number of columns used; 2^m points.
    #[arg(long)]
    pub m: usize,
}

impl NetArgs {
    pub fn load(&self) -> anyhow::Result<DigitalNet> {
        if let Some(path) = &self.net {
            let net = DigitalNet::load(existing(path)?)?;
            if self.m > net.m() {
                return usage(format!("--m {} exceeds the {} columns in {}", self.m, net.m(), path.display()));
            }
            return Ok(net.truncate(self.m)?);
        }
        let Some(s) = self.s else {
            return usage("give either --net FILE or --s S (with optional --sobol-dirs FILE and --n N)");
        };
        let dirs = direction_numbers(self.sobol_dirs.as_deref())?;
        Ok(build_sobol(&dirs, s, self.m, self.n)?)
    }
}

fn existing(path: &Path) -> anyhow::Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        usage(format!("{}: no such file", path.display()))
    }
}

pub fn direction_numbers(path: Option<&Path>) -> anyhow::Result<Vec<DirectionEntry>> {
    match path {
        Some(p) => Ok(load_direction_numbers(existing(p)?)?),
        None => Ok(bundled_direction_numbers()),
    }
}

/// `A..B` (inclusive) or `A,B,C`; sorted and deduplicated.
pub fn parse_m_range(text: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || Usage(format!("bad --m-range {text:?}; expected A..B or A,B,C"));
    let mut ms: Vec<usize> = if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() {
        return Err(bad().into());
    }
    Ok(ms)
}

pub enum Construction {
    Sobol,
    Scrambled { candidates: u64, objective: Objective },
    Naive { per_column: usize },
    File(PathBuf),
}

pub struct NetSpec {
    pub label: String,
    pub construction: Construction,
}

fn count_suffix<T: std::str::FromStr>(rest: &str, default: T, spec: &str) -> anyhow::Result<T> {
    match rest {
        "" => Ok(default),
        r => match r.strip_prefix(':').and_then(|c| c.parse().ok()) {
            Some(v) => Ok(v),
            None => usage(format!("bad count in net spec {spec:?}")),
        },
    }
}

pub fn parse_net_spec(text: &str) -> anyhow::Result<NetSpec> {
    let Some((label, spec)) = text.split_once('=') else {
        return usage(format!("net spec {text:?} is not LABEL=SPEC"));
    };
    if label.is_empty() || label.contains(|c: char| c == '"' || c.is_whitespace()) {
        return usage(format!("bad net label {label:?}"));
    }
    let construction = if spec == "sobol" {
        Construction::Sobol
    } else if let Some(rest) = spec.strip_prefix("sobol-scrambled") {
        Construction::Scrambled {
            candidates: count_suffix(rest, 1000, text)?,
            objective: Objective::Minimize,
        }
    } else if let Some(rest) = spec.strip_prefix("sobol-worst") {
        Construction::Scrambled {
            candidates: count_suffix(rest, 1000, text)?,
            objective: Objective::Maximize,
        }
    } else if let Some(rest) = spec.strip_prefix("naive") {
        Construction::Naive {
            per_column: count_suffix(rest, 64, text)?,
        }
    } else if let Some(path) = spec.strip_prefix("file:") {
        Construction::File(PathBuf::from(path))
    } else {
        return usage(format!("unknown net spec {spec:?}"));
    };
    if matches!(construction, Construction::Scrambled { candidates: 0, .. } | Construction::Naive { per_column: 0 }) {
        return usage(format!("net spec {text:?} needs a positive count"));
    }
    Ok(NetSpec {
        label: label.to_string(),
        construction,
    })
}

impl NetSpec {
    /// One net per `m` in `ms`.
    pub fn build(&self, dirs: &[DirectionEntry], s: usize, n: usize, ms: &[usize], seed: u64) -> anyhow::Result<NetFamily> {
        let m_max = *ms.last().expect("non-empty m range");
        let nets = match &self.construction {
            Construction::Sobol => ms
                .iter()
                .map(|&m| build_sobol(dirs, s, m, n))
                .collect::<lowwafom::Result<_>>()?,
            Construction::Scrambled { candidates, objective } => ms
                .iter()
                .map(|&m| {
                    let cfg = SearchConfig {
                        candidates: *candidates,
                        seed,
                        objective: *objective,
                        ..SearchConfig::default()
                    };
                    Ok(scramble_search(&build_sobol(dirs, s, m, n)?, &cfg)?.best_net)
                })
                .collect::<lowwafom::Result<_>>()?,
            Construction::Naive { per_column } => {
                if ms[0] == 0 {
                    return usage("naive nets need m >= 1");
                }
                let all = naive_column_search(s, n, m_max, *per_column, seed, 2)?;
                ms.iter().map(|&m| all[m - 1].clone()).collect()
            }
            Construction::File(path) => {
                let net = DigitalNet::load(existing(path)?)?;
                if net.s() != s {
                    return usage(format!("{} has s = {}, expected --s {s}", path.display(), net.s()));
                }
                if m_max > net.m() {
                    return usage(format!("{} has only {} columns, --m-range needs {m_max}", path.display(), net.m()));
                }
                ms.iter().map(|&m| net.truncate(m)).collect::<lowwafom::Result<_>>()?
            }
        };
        Ok(NetFamily {
            label: self.label.clone(),
            nets,
        })
    }
}
