//! `lowwafom` command-line tool.
//!
//! Exit codes: 0 on success, 2 on usage or validation errors, 1 otherwise.

mod source;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lowwafom::genz::{run_bench, write_csv, Family};
use lowwafom::{quality_report, scramble_search, wafom, wafom_dual_oracle, Objective, SearchConfig};
use serde::Serialize;

use source::{parse_m_range, parse_net_spec, NetArgs, Usage};

#[derive(Parser)]
#[command(name = "lowwafom", version, about = "Digital nets over GF(2): t-values, WAFOM, scramble search, Genz benchmarks")]
struct Cli {
    /// Worker threads; output does not depend on this value.
    #[arg(long, global = true, env = "LOWWAFOM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the points of a net, one per line, s reals with 17 significant digits.
    Points(PointsArgs),
    /// Print t-value and WAFOM as JSON {t, wafom, q, s, m, n}.
    Quality(QualityArgs),
    /// Search random linear scramblings for the extremal WAFOM; prints a JSON summary.
    Search(SearchArgs),
    /// Genz benchmark: median log10 relative errors as CSV
    /// (header net,family,s,m,N,median_log10_rel_err,samples,seed).
    Genz(GenzArgs),
}

#[derive(Args)]
struct PointsArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Print only the first COUNT points.
    #[arg(long)]
    count: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QualityArgs {
    #[command(flatten)]
    net: NetArgs,
    /// WAFOM base, 2 or 4.
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Also evaluate WAFOM by dual-space enumeration (s*n <= 24) and the
    /// digit-by-digit formula; fail if any two differ by more than 1e-12 relative.
    #[arg(long)]
    verify_dual: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Number of random candidates.
    #[arg(long = "M", default_value_t = 1000)]
    candidates: u64,
    /// Candidate i draws from substream (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// WAFOM base, 2 or 4.
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// minimize or maximize.
    #[arg(long, default_value = "minimize")]
    objective: Objective,
    /// Also consider the unscrambled net as candidate 0 (default).
    #[arg(long, overrides_with = "exclude_identity")]
    include_identity: bool,
    /// Only consider the random candidates 1..M.
    #[arg(long, overrides_with = "include_identity")]
    exclude_identity: bool,
    /// Write the winning scramble set here.
    #[arg(long)]
    out_scramble: Option<PathBuf>,
    /// Write the winning scrambled net here.
    #[arg(long)]
    out_net: Option<PathBuf>,
    /// Write the improvement trace here as JSON lines {"index":..,"wafom":..}.
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

#[derive(Args)]
struct GenzArgs {
    /// Net families as LABEL=SPEC, SPEC one of: sobol, sobol-scrambled[:M],
    /// sobol-worst[:M], naive[:K], file:PATH. Repeat or separate with commas.
    #[arg(long, required = true, value_delimiter = ',')]
    nets: Vec<String>,
    /// Family indices 1..6.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    families: Vec<usize>,
    /// Dimension of every net.
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Digits per coordinate for generated nets.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Inclusive range A..B or a list A,B,C.
    #[arg(long, default_value = "8..16")]
    m_range: String,
    /// Random instances per family.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Seeds both the instance draws and any scramble or naive search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Direction-number table for Sobol' specs (default: bundled table).
    #[arg(long)]
    sobol_dirs: Option<PathBuf>,
    /// Output CSV file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err.chain().any(|cause| {
        cause.downcast_ref::<Usage>().is_some()
            || cause.downcast_ref::<lowwafom::Error>().is_some_and(lowwafom::Error::is_validation)
    });
    if validation {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.threads == Some(0) {
        return Err(Usage("--threads must be at least 1".into()).into());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        pool = pool.num_threads(k);
    }
    let pool = pool.build().context("cannot start worker threads")?;
    pool.install(|| match cli.command {
        Command::Points(a) => points(a),
        Command::Quality(a) => quality(a),
        Command::Search(a) => search(a),
        Command::Genz(a) => genz(a),
    })
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn points(a: PointsArgs) -> anyhow::Result<()> {
    let net = a.net.load()?;
    let total = net.num_points();
    let count = a.count.unwrap_or(total);
    if count > total {
        return Err(Usage(format!("--count {count} exceeds the {total} points of the net")).into());
    }
    let mut out = open_out(a.out.as_deref())?;
    for h in 0..count {
        let p = net.point(h)?.to_real();
        let line: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

fn quality(a: QualityArgs) -> anyhow::Result<()> {
    let net = a.net.load()?;
    let report = quality_report(&net, a.q)?;
    if a.verify_dual {
        let dual = wafom_dual_oracle(&net, a.q)?;
        let naive = wafom(&net, a.q)?;
        for (name, v) in [("dual-space", dual), ("digit-by-digit", naive)] {
            let scale = report.wafom.abs().max(v.abs());
            if (report.wafom - v).abs() > 1e-12 * scale {
                bail!("WAFOM paths disagree: {} (report) vs {v} ({name})", report.wafom);
            }
        }
    }
    print_json(&report)
}

#[derive(Serialize)]
struct SearchSummary {
    candidate_index: u64,
    best_wafom: f64,
    unscrambled_wafom: f64,
    t: usize,
    s: usize,
    m: usize,
    n: usize,
    q: u32,
    #[serde(rename = "M")]
    candidates: u64,
    seed: u64,
    objective: Objective,
    include_identity: bool,
    improvements: usize,
}

fn search(a: SearchArgs) -> anyhow::Result<()> {
    if a.candidates == 0 {
        return Err(Usage("--M must be at least 1".into()).into());
    }
    let net = a.net.load()?;
    let cfg = SearchConfig {
        candidates: a.candidates,
        seed: a.seed,
        q: a.q,
        include_identity: !a.exclude_identity,
        objective: a.objective,
    };
    let result = scramble_search(&net, &cfg)?;
    if let Some(p) = &a.out_scramble {
        result.best_scramble.save(p)?;
    }
    if let Some(p) = &a.out_net {
        result.best_net.save(p)?;
    }
    if let Some(p) = &a.out_trace {
        let mut out = open_out(Some(p))?;
        for entry in &result.trace {
            serde_json::to_writer(&mut out, entry)?;
            writeln!(out)?;
        }
        out.flush()?;
    }
    print_json(&SearchSummary {
        candidate_index: result.candidate_index,
        best_wafom: result.best_wafom,
        unscrambled_wafom: wafom(&net, a.q)?,
        t: lowwafom::t_value(&result.best_net)?,
        s: net.s(),
        m: net.m(),
        n: net.n(),
        q: a.q,
        candidates: a.candidates,
        seed: a.seed,
        objective: a.objective,
        include_identity: cfg.include_identity,
        improvements: result.trace.len(),
    })
}

fn genz(a: GenzArgs) -> anyhow::Result<()> {
    let ms = parse_m_range(&a.m_range)?;
    if a.samples == 0 {
        return Err(Usage("--samples must be at least 1".into()).into());
    }
    let families = a
        .families
        .iter()
        .map(|&j| Family::from_index(j))
        .collect::<lowwafom::Result<Vec<_>>>()?;
    let specs = a
        .nets
        .iter()
        .map(|s| parse_net_spec(s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut labels: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(Usage(format!("duplicate net label {:?}", w[0])).into());
    }
    let dirs = source::direction_numbers(a.sobol_dirs.as_deref())?;
    let nets = specs
        .iter()
        .map(|spec| spec.build(&dirs, a.s, a.n, &ms, a.seed))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let results = run_bench(&nets, &families, a.s, a.samples, a.seed)?;
    let mut out = open_out(a.out.as_deref())?;
    write_csv(&results, &mut out)?;
    out.flush()?;
    Ok(())
}
