//! Independent oracles shared by the integration and acceptance suites.
#![allow(clippy::excessive_precision)]
#![allow(dead_code)]

use lowwafom::{DigitalNet, Gf2Matrix, RandomStream};

pub fn random_net(s: usize, n: usize, m: usize, rng: &mut RandomStream) -> DigitalNet {
    DigitalNet::new(
        (0..s)
            .map(|_| Gf2Matrix::from_fn(n, m, |_, _| rng.next_bit()))
            .collect(),
    )
    .unwrap()
}

fn compositions(total: usize, parts: usize, cap: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return if total <= cap { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for d in 0..=total.min(cap) {
        for mut rest in compositions(total - d, parts - 1, cap) {
            rest.insert(0, d);
            out.push(rest);
        }
    }
    out
}

/// True if every elementary box of volume `2^{t-m}` holds exactly `2^t`
/// points, counted from the real coordinates.
pub fn is_tms_net(net: &DigitalNet, t: usize) -> bool {
    let (s, m, n) = (net.s(), net.m(), net.n());
    let pts: Vec<Vec<f64>> = (0..net.num_points())
        .map(|h| net.point(h).unwrap().to_real())
        .collect();
    for shape in compositions(m - t, s, n) {
        let mut counts = std::collections::HashMap::new();
        for p in &pts {
            let cell: Vec<u64> = p
                .iter()
                .zip(&shape)
                .map(|(x, &d)| (x * (1u64 << d) as f64).floor() as u64)
                .collect();
            *counts.entry(cell).or_insert(0usize) += 1;
        }
        let boxes = 1usize << (m - t);
        if counts.len() != boxes || counts.values().any(|&c| c != 1 << t) {
            return false;
        }
    }
    true
}

/// Smallest t for which the net property holds, by box counting.
pub fn box_count_t_value(net: &DigitalNet) -> usize {
    (0..=net.m()).find(|&t| is_tms_net(net, t)).unwrap()
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for k in 0..7 {
        let x = h * GK_NODES[k];
        let pair = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += GAUSS_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (est, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return est;
    }
    let c = 0.5 * (a + b);
    adaptive(f, a, c, tol / 2.0, depth - 1) + adaptive(f, c, b, tol / 2.0, depth - 1)
}

/// Adaptive Gauss–Kronrod over `[0, 1]`, split at the given breakpoints.
pub fn integrate_1d(f: &mut dyn FnMut(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
    let mut knots: Vec<f64> = std::iter::once(0.0)
        .chain(breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0))
        .chain(std::iter::once(1.0))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots
        .windows(2)
        .map(|w| adaptive(f, w[0], w[1], tol * (w[1] - w[0]), 40))
        .sum()
}

/// Nested adaptive quadrature over `[0, 1]^s`; `breaks[i]` lists the points
/// where the integrand is non-smooth along coordinate `i`.
pub fn integrate_cube(f: &dyn Fn(&[f64]) -> f64, s: usize, breaks: &[Vec<f64>], tol: f64) -> f64 {
    fn level(f: &dyn Fn(&[f64]) -> f64, x: &mut Vec<f64>, s: usize, breaks: &[Vec<f64>], tol: f64) -> f64 {
        let i = x.len();
        if i == s {
            return f(x);
        }
        let mut inner = |xi: f64| {
            x.push(xi);
            let v = level(f, x, s, breaks, tol);
            x.pop();
            v
        };
        integrate_1d(&mut inner, &breaks[i], tol)
    }
    level(f, &mut Vec::with_capacity(s), s, breaks, tol)
}
