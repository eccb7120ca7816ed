//! Genz test functions with closed-form integrals, randomized instances and
//! the median-of-log-error benchmark over families of nets.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::DigitalNet;
use crate::rng::RandomStream;

/// Default `Σ a_i` targets for families 1 to 6.
pub const DEFAULT_H: [f64; 6] = [4.5, 3.625, 0.925, 3.515, 10.2, 2.15];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Oscillatory,
    ProductPeak,
    CornerPeak,
    Gaussian,
    Continuous,
    Discontinuous,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Oscillatory,
        Family::ProductPeak,
        Family::CornerPeak,
        Family::Gaussian,
        Family::Continuous,
        Family::Discontinuous,
    ];

    /// 1-based family number.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(j: usize) -> Result<Family> {
        Family::ALL
            .get(j.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::invalid(format!("Genz family must be 1..=6, got {j}")))
    }

    pub fn default_h(self) -> f64 {
        DEFAULT_H[self as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenzInstance {
    pub family: Family,
    /// Difficulty parameters, all positive.
    pub a: Vec<f64>,
    /// Shift parameters in `[0, 1]`.
    pub u: Vec<f64>,
    pub exact: f64,
}

impl GenzInstance {
    pub fn new(family: Family, a: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if a.len() != u.len() || a.is_empty() {
            return Err(Error::dim(format!(
                "a has {} entries and u has {}; both need s >= 1",
                a.len(),
                u.len()
            )));
        }
        let exact = genz_exact(family, &a, &u)?;
        Ok(Self { family, a, u, exact })
    }

    pub fn s(&self) -> usize {
        self.a.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        genz_eval(self.family, &self.a, &self.u, x)
    }

    fn hash_into(&self, h: &mut impl Hasher) {
        self.family.hash(h);
        for v in self.a.iter().chain(&self.u) {
            v.to_bits().hash(h);
        }
    }
}

pub fn genz_eval(family: Family, a: &[f64], u: &[f64], x: &[f64]) -> f64 {
    let s = a.len();
    match family {
        Family::Oscillatory => {
            let arg: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
            (2.0 * PI * u[0] + arg).cos()
        }
        Family::ProductPeak => (0..s)
            .map(|i| 1.0 / (a[i].powi(-2) + (x[i] - u[i]).powi(2)))
            .product(),
        Family::CornerPeak => {
            let lin: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
            (1.0 + lin).powi(-(s as i32 + 1))
        }
        Family::Gaussian => {
            let e: f64 = (0..s).map(|i| (a[i] * (x[i] - u[i])).powi(2)).sum();
            (-e).exp()
        }
        Family::Continuous => {
            let e: f64 = (0..s).map(|i| a[i] * (x[i] - u[i]).abs()).sum();
            (-e).exp()
        }
        Family::Discontinuous => {
            if (0..s.min(2)).any(|i| x[i] > u[i]) {
                0.0
            } else {
                a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>().exp()
            }
        }
    }
}

/// Closed-form integral over the unit cube.
pub fn genz_exact(family: Family, a: &[f64], u: &[f64]) -> Result<f64> {
    if let Some(bad) = a.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("difficulty parameters must be positive, got {bad}")));
    }
    let s = a.len();
    let value = match family {
        Family::Oscillatory => {
            let amp: f64 = a.iter().map(|&ai| 2.0 * (ai / 2.0).sin() / ai).product();
            amp * (2.0 * PI * u[0] + a.iter().sum::<f64>() / 2.0).cos()
        }
        Family::ProductPeak => (0..s)
            .map(|i| a[i] * ((a[i] * (1.0 - u[i])).atan() + (a[i] * u[i]).atan()))
            .product(),
        Family::CornerPeak => {
            // inclusion–exclusion over vertices of the cube
            let mut sum = 0.0;
            for mask in 0u64..(1 << s) {
                let lin: f64 = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
                let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign / (1.0 + lin);
            }
            let factorial: f64 = (1..=s).map(|k| k as f64).product();
            sum / (factorial * a.iter().product::<f64>())
        }
        Family::Gaussian => (0..s)
            .map(|i| {
                PI.sqrt() / (2.0 * a[i]) * (libm::erf(a[i] * (1.0 - u[i])) + libm::erf(a[i] * u[i]))
            })
            .product(),
        Family::Continuous => (0..s)
            .map(|i| (2.0 - (-a[i] * u[i]).exp() - (-a[i] * (1.0 - u[i])).exp()) / a[i])
            .product(),
        Family::Discontinuous => (0..s)
            .map(|i| {
                let upper = if i < 2 { u[i].min(1.0) } else { 1.0 };
                (a[i] * upper).exp_m1() / a[i]
            })
            .product(),
    };
    Ok(value)
}

/// Draws `samples` instances with `a, u` uniform on the unit cube and `a`
/// rescaled so `Σ a_i = h`. Draws with a zero entry in `a` or a zero integral
/// are discarded and redrawn.
pub fn generate_instances(
    family: Family,
    s: usize,
    h: f64,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<Vec<GenzInstance>> {
    if s == 0 || samples == 0 {
        return Err(Error::invalid("need s >= 1 and samples >= 1"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("renormalization target must be positive, got {h}")));
    }
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let raw: Vec<f64> = (0..s).map(|_| rng.next_f64()).collect();
        let u: Vec<f64> = (0..s).map(|_| rng.next_f64()).collect();
        if raw.contains(&0.0) {
            continue;
        }
        let total: f64 = raw.iter().sum();
        let a: Vec<f64> = raw.iter().map(|v| v * h / total).collect();
        let inst = GenzInstance::new(family, a, u)?;
        if inst.exact == 0.0 || !inst.exact.is_finite() {
            log::warn!("discarding {family:?} instance with integral {}", inst.exact);
            continue;
        }
        out.push(inst);
    }
    Ok(out)
}

/// Nets of one construction over a range of `m`.
#[derive(Clone, Debug)]
pub struct NetFamily {
    pub label: String,
    pub nets: Vec<DigitalNet>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub label: String,
    pub family: usize,
    pub s: usize,
    pub m: usize,
    pub points: u64,
    pub median_log10_rel_err: f64,
    pub samples: usize,
    pub seed: u64,
    /// Fingerprint of the instance list; equal across nets within one run.
    pub instance_hash: u64,
}

/// Median; the mean of the two central values for even counts.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

/// `(1/N) Σ f(x_k)` over the shifted points (flattened `N × s`).
pub fn qmc_estimate(inst: &GenzInstance, points: &[f64]) -> f64 {
    let s = inst.s();
    let values: Vec<f64> = points.chunks_exact(s).map(|x| inst.eval(x)).collect();
    pairwise_f64(&values) / values.len() as f64
}

fn pairwise_f64(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_f64(a) + pairwise_f64(b)
    }
}

/// Generates one instance list per family (stream `(seed, family)`) and
/// evaluates every net on the same list. Results are sorted by label,
/// family and m.
pub fn run_bench(
    nets: &[NetFamily],
    families: &[Family],
    s: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<BenchResult>> {
    for fam in nets {
        if let Some(bad) = fam.nets.iter().find(|n| n.s() != s) {
            return Err(Error::dim(format!(
                "net family {:?} has a net with s = {}, expected {s}",
                fam.label,
                bad.s()
            )));
        }
    }
    let instances: Vec<(Family, Vec<GenzInstance>, u64)> = families
        .iter()
        .map(|&f| {
            let mut rng = RandomStream::substream(seed, f.index() as u64);
            let list = generate_instances(f, s, f.default_h(), samples, &mut rng)?;
            let mut h = DefaultHasher::new();
            list.iter().for_each(|i| i.hash_into(&mut h));
            Ok((f, list, h.finish()))
        })
        .collect::<Result<_>>()?;

    let mut cells: Vec<(&str, &DigitalNet)> = nets
        .iter()
        .flat_map(|f| f.nets.iter().map(move |n| (f.label.as_str(), n)))
        .collect();
    cells.sort_by(|a, b| (a.0, a.1.m()).cmp(&(b.0, b.1.m())));

    let per_net: Vec<Vec<BenchResult>> = cells
        .par_iter()
        .map(|&(label, net)| {
            let points = net.real_points()?;
            Ok(instances
                .iter()
                .map(|(family, list, hash)| {
                    let errors: Vec<f64> = list
                        .iter()
                        .map(|inst| {
                            let estimate = qmc_estimate(inst, &points);
                            ((inst.exact - estimate).abs() / inst.exact.abs()).log10()
                        })
                        .collect();
                    BenchResult {
                        label: label.to_string(),
                        family: family.index(),
                        s,
                        m: net.m(),
                        points: net.num_points(),
                        median_log10_rel_err: median(&errors),
                        samples,
                        seed,
                        instance_hash: *hash,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut results: Vec<BenchResult> = per_net.into_iter().flatten().collect();
    results.sort_by(|a, b| (&a.label, a.family, a.m).cmp(&(&b.label, b.family, b.m)));
    Ok(results)
}

pub const CSV_HEADER: &str = "net,family,s,m,N,median_log10_rel_err,samples,seed";

pub fn write_csv(results: &[BenchResult], mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{:.17e},{},{}",
            r.label, r.family, r.s, r.m, r.points, r.median_log10_rel_err, r.samples, r.seed
        )?;
    }
    Ok(())
}
