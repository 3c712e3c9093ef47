//! Independent reference computations for the integration tests. Nothing
//! here calls the library's quadrature or root finders.

#![allow(dead_code)]

use orlicz_core::function::{PiecewiseBilinear2D, PiecewiseLinear1D};
use orlicz_core::measure::{Anchor, Density, WeightedMeasure1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.iter().map(|&(x, w)| w * f(m + h * x)).sum::<f64>() * h
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∫_{s0}^{s1} (c0 + c1 s)^q s^α ds` by expanding the binomial.
fn power_moment(c0: f64, c1: f64, q: u32, alpha: f64, s0: f64, s1: f64) -> f64 {
    (0..=q)
        .map(|k| {
            let e = k as f64 + alpha + 1.0;
            binomial(q, k) * c0.powi((q - k) as i32) * c1.powi(k as i32) * (s1.powf(e) - s0.powf(e)) / e
        })
        .sum()
}

/// Splits `[x0, x1]` at the zero of the linear function through
/// `(x0, v0)`, `(x1, v1)`.
fn sign_pieces(x0: f64, x1: f64, v0: f64, v1: f64) -> Vec<(f64, f64)> {
    if v0 * v1 < 0.0 {
        let z = x0 + (x1 - x0) * v0 / (v0 - v1);
        vec![(x0, z), (z, x1)]
    } else {
        vec![(x0, x1)]
    }
}

/// `∫ |f|^q dm` exactly for integer `q`, for constant, left-anchored
/// power-law and tabulated densities.
pub fn abs_power_integral(f: &PiecewiseLinear1D, m: &WeightedMeasure1D, q: u32) -> f64 {
    let (a, _) = m.interval();
    let rule = gauss_legendre(12);
    let mut total = 0.0;
    for (w, &(v0, v1)) in f.knots().windows(2).zip(f.cells()) {
        let (x0, x1) = (w[0], w[1]);
        let slope = (v1 - v0) / (x1 - x0);
        for (p0, p1) in sign_pieces(x0, x1, v0, v1) {
            let mid = 0.5 * (p0 + p1);
            let sign: f64 = if v0 + slope * (mid - x0) < 0.0 { -1.0 } else { 1.0 };
            total += match m.density() {
                Density::Constant(c) => c * sign.powi(q as i32) * power_moment(v0 - slope * x0, slope, q, 0.0, p0, p1),
                Density::PowerLaw { alpha, anchor: Anchor::Left } => {
                    // in s = t − a the function is (v0 + slope(a − x0)) + slope·s
                    let c0 = v0 + slope * (a - x0);
                    sign.powi(q as i32) * power_moment(c0, slope, q, *alpha, p0 - a, p1 - a)
                }
                Density::Tabulated { .. } => {
                    // |f|^q·w is a polynomial between density knots
                    let mut breaks = vec![p0, p1];
                    if let Density::Tabulated { t, .. } = m.density() {
                        breaks.extend(t.iter().copied().filter(|&s| s > p0 && s < p1));
                    }
                    breaks.sort_by(f64::total_cmp);
                    breaks
                        .windows(2)
                        .map(|b| gl_integrate(|t| f.eval(t).abs().powi(q as i32) * m.density_at(t), b[0], b[1], &rule))
                        .sum()
                }
                other => panic!("oracle does not cover {other:?}"),
            };
        }
    }
    total
}

/// `(∫ |f|^q dm)^{1/q}`.
pub fn lq_norm_1d(f: &PiecewiseLinear1D, m: &WeightedMeasure1D, q: u32) -> f64 {
    abs_power_integral(f, m, q).powf(1.0 / q as f64)
}

/// `(∫∫ |F|^q dm₁ dm₂)^{1/q}`: exact inner integrals along `y`, and an outer
/// Gauss–Legendre rule on pieces where the inner profile is smooth.
pub fn lq_norm_2d(f: &PiecewiseBilinear2D, m1: &WeightedMeasure1D, m2: &WeightedMeasure1D, q: u32) -> f64 {
    let xs = f.x_knots();
    let ys = f.y_knots();
    let mut breaks: Vec<f64> = xs.to_vec();
    breaks.extend(m1.breakpoints());
    // the profile has kinks where a zero crosses a y-knot
    for (i, w) in xs.windows(2).enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let jj = j.min(ys.len() - 2);
            let (v0, v1) = (f.eval_in_cell(i, jj, w[0], y), f.eval_in_cell(i, jj, w[1], y));
            if v0 * v1 < 0.0 {
                breaks.push(w[0] + (w[1] - w[0]) * v0 / (v0 - v1));
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let (a, _) = m1.interval();
    let rule = gauss_legendre(24);
    let profile = |x: f64| {
        let i = xs.partition_point(|&k| k <= x).clamp(1, xs.len() - 1) - 1;
        let slice = f.slice_at_x(i, x);
        abs_power_integral(&slice, m2, q)
    };
    let mut total = 0.0;
    for b in breaks.windows(2) {
        let (lo, hi) = (b[0], b[1]);
        total += match m1.density() {
            Density::PowerLaw { alpha, anchor: Anchor::Left } if lo == a => {
                // t = a + u² removes the endpoint singularity of the weight
                let top = (hi - a).sqrt();
                gl_integrate(|u| profile(a + u * u) * (u * u).powf(*alpha) * 2.0 * u, 0.0, top, &rule)
            }
            _ => {
                let sub = 4;
                (0..sub)
                    .map(|k| {
                        let s0 = lo + (hi - lo) * k as f64 / sub as f64;
                        let s1 = lo + (hi - lo) * (k + 1) as f64 / sub as f64;
                        gl_integrate(|t| profile(t) * m1.density_at(t), s0, s1, &rule)
                    })
                    .sum()
            }
        };
    }
    total.powf(1.0 / q as f64)
}

/// Densities the oracle covers, cycled by index.
pub fn oracle_density(k: usize) -> Density {
    match k % 4 {
        0 => Density::Constant(1.7),
        1 => Density::PowerLaw { alpha: 0.5, anchor: Anchor::Left },
        2 => Density::PowerLaw { alpha: 2.0, anchor: Anchor::Left },
        _ => Density::Tabulated { t: vec![0.0, 0.3, 0.7, 1.0], w: vec![0.2, 1.5, 0.6, 1.1] },
    }
}

pub fn uniform_knots(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect()
}

pub fn random_1d(rng: &mut ChaCha8Rng, cells: usize) -> PiecewiseLinear1D {
    let knots = uniform_knots(0.0, 1.0, cells);
    let values = knots.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    PiecewiseLinear1D::from_nodes(knots, values).unwrap()
}

pub fn random_2d(rng: &mut ChaCha8Rng, cells: usize) -> PiecewiseBilinear2D {
    let x = uniform_knots(0.0, 1.0, cells);
    let y = uniform_knots(0.0, 1.0, cells);
    let values: Vec<Vec<f64>> = x.iter().map(|_| y.iter().map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    PiecewiseBilinear2D::from_nodes(x, y, &values).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative difference with a floor for values near zero; equal infinities
/// count as equal.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(1e-300)
}

/// `sup_x` of `f` on `[a, b]` by dense sampling.
pub fn dense_sup(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    (1..n).map(|k| a + (b - a) * k as f64 / n as f64).map(|x| (f(x), x)).fold((f64::NEG_INFINITY, a), |acc, v| {
        if v.0 > acc.0 {
            v
        } else {
            acc
        }
    })
}
