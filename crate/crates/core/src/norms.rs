//! Gauge (Luxemburg) norms, weighted `L^p` norms and repeated norms over
//! product domains.
//!
//! The gauge norm of `f` with respect to `(Φ, μ)` is the smallest `k > 0`
//! with modular `∫ Φ(f/k) dμ ≤ 1`. The modular is evaluated cell by cell
//! with adaptive quadrature, splitting at zero crossings of `f` and, for
//! tabulated `Φ`, at the points where `|f|/k` crosses a knot. The root of
//! `ln M(k) = 0` is bracketed by geometric expansion from an `L²` surrogate
//! and then refined by Illinois-modified regula falsi on `ln k`.
//!
//! Repeated norms sample the inner norm at both ends of every cell along the
//! outer axis and apply the outer norm to the resulting piecewise-linear
//! function. Refining the grid of the argument (which leaves a bilinear
//! function unchanged) makes this converge to the exact composition.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::{Axis, PiecewiseBilinear2D, PiecewiseLinear1D};
use crate::measure::WeightedMeasure1D;
use crate::quad::Tolerance;
use crate::young::YoungFunction;

/// Relative tolerance on the gauge norm (the solver runs tighter than this).
pub const EPS_NORM: f64 = 1e-8;
const SOLVE_LOG_WIDTH: f64 = 1e-13;
const SOLVE_MAX_ITERS: usize = 300;
const MODULAR_TOL: Tolerance = Tolerance { rel: 1e-12, abs: 1e-300 };

#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    pub first: WeightedMeasure1D,
    pub second: WeightedMeasure1D,
}

impl ProductMeasure {
    pub fn new(first: WeightedMeasure1D, second: WeightedMeasure1D) -> Self {
        Self { first, second }
    }

    pub fn total_mass(&self) -> f64 {
        self.first.total_mass() * self.second.total_mass()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeReport {
    pub value: f64,
    /// The measure had zero total mass; the norm is reported as 0.
    pub zero_mass: bool,
    pub modular_evaluations: usize,
}

fn same(a: (f64, f64), b: (f64, f64)) -> Result<()> {
    let scale = 1e-12 * (a.1 - a.0).abs().max(a.0.abs()).max(a.1.abs());
    if (a.0 - b.0).abs() > scale || (a.1 - b.1).abs() > scale {
        return Err(Error::IncompatibleIntervals(a.0, a.1, b.0, b.1));
    }
    Ok(())
}

/// Points in `(x0, x1)` where the linear piece `v0 → v1` changes sign or
/// where `|v|/k` crosses a kink of `Φ`.
fn piece_breaks(phi: Option<&YoungFunction>, x0: f64, x1: f64, v0: f64, v1: f64, k: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(x0);
    let dv = v1 - v0;
    if v0 * v1 < 0.0 {
        out.push(x0 + (x1 - x0) * (-v0 / dv));
    }
    if let Some(phi) = phi {
        let kinks = phi.kinks();
        if !kinks.is_empty() && dv != 0.0 {
            let (u0, u1) = (v0 / k, v1 / k);
            let (lo, hi) = (u0.abs().min(u1.abs()), u0.abs().max(u1.abs()));
            let (umin, umax) = if v0 * v1 < 0.0 { (0.0, hi) } else { (lo, hi) };
            let start = kinks.partition_point(|&t| t <= umin);
            for &t in &kinks[start..] {
                if t >= umax {
                    break;
                }
                for target in [t, -t] {
                    let s = (target - u0) / (u1 - u0);
                    if s > 0.0 && s < 1.0 {
                        out.push(x0 + s * (x1 - x0));
                    }
                }
            }
        }
    }
    out.push(x1);
    out.sort_by(f64::total_cmp);
    out.dedup();
}

fn check_overflow(phi: &YoungFunction, max_abs: f64, k: f64) -> Result<()> {
    if max_abs / k > phi.domain_cap() {
        return Err(Error::OverflowDomain { value: max_abs / k, cap: phi.domain_cap() });
    }
    Ok(())
}

fn modular_1d_raw(phi: &YoungFunction, m: &WeightedMeasure1D, f: &PiecewiseLinear1D, k: f64) -> f64 {
    if f.max_abs() / k > phi.domain_cap() {
        return f64::INFINITY;
    }
    let knots = f.knots();
    let mut breaks = Vec::new();
    let mut total = 0.0;
    for (i, &(v0, v1)) in f.cells().iter().enumerate() {
        if v0 == 0.0 && v1 == 0.0 {
            continue;
        }
        let (x0, x1) = (knots[i], knots[i + 1]);
        piece_breaks(Some(phi), x0, x1, v0, v1, k, &mut breaks);
        total += m.integrate_weighted(|x| phi.eval_saturating(f.eval_in_cell(i, x) / k), &breaks, MODULAR_TOL);
    }
    total
}

/// `∫ Φ(f/k) dμ`.
pub fn modular_1d(phi: &YoungFunction, m: &WeightedMeasure1D, f: &PiecewiseLinear1D, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("modular needs k > 0, got {k}")));
    }
    same(m.interval(), f.interval())?;
    check_overflow(phi, f.max_abs(), k)?;
    Ok(modular_1d_raw(phi, m, f, k))
}

fn modular_2d_raw(phi: &YoungFunction, pm: &ProductMeasure, f: &PiecewiseBilinear2D, k: f64) -> f64 {
    if f.max_abs() / k > phi.domain_cap() {
        return f64::INFINITY;
    }
    let (nx, ny) = (f.nx(), f.ny());
    let rows: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let mut row = 0.0;
            let mut xb = Vec::new();
            for i in 0..nx {
                let c = f.cell(i, j);
                if c.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let (x0, x1, y0, y1) = f.cell_bounds(i, j);
                // y-breaks where the zero set meets a vertical cell edge
                let mut yb = vec![y0, y1];
                for (a, b) in [(c[0], c[2]), (c[1], c[3])] {
                    if a * b < 0.0 {
                        yb.push(y0 + (y1 - y0) * (a / (a - b)));
                    }
                }
                yb.sort_by(f64::total_cmp);
                row += pm.second.integrate_weighted(
                    |y| {
                        let t = (y - y0) / (y1 - y0);
                        let (v0, v1) = (c[0] + t * (c[2] - c[0]), c[1] + t * (c[3] - c[1]));
                        piece_breaks(Some(phi), x0, x1, v0, v1, k, &mut xb);
                        pm.first.integrate_weighted(
                            |x| {
                                let s = (x - x0) / (x1 - x0);
                                phi.eval_saturating((v0 + s * (v1 - v0)) / k)
                            },
                            &xb,
                            MODULAR_TOL,
                        )
                    },
                    &yb,
                    MODULAR_TOL,
                );
            }
            row
        })
        .collect();
    rows.iter().sum()
}

/// `∫∫ Φ(F/k) dμ₁ dμ₂`.
pub fn modular_2d(phi: &YoungFunction, pm: &ProductMeasure, f: &PiecewiseBilinear2D, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("modular needs k > 0, got {k}")));
    }
    same(pm.first.interval(), f.x_interval())?;
    same(pm.second.interval(), f.y_interval())?;
    check_overflow(phi, f.max_abs(), k)?;
    Ok(modular_2d_raw(phi, pm, f, k))
}

/// Smallest `k` with `modular(k) ≤ 1`, given a nonincreasing modular and a
/// positive starting guess.
pub(crate) fn solve_gauge(mut modular: impl FnMut(f64) -> f64, k0: f64) -> (f64, usize) {
    let mut evals = 0;
    let mut h = |k: f64| {
        evals += 1;
        modular(k).ln()
    };
    let floor = k0 * 1e-250;
    let (mut lo, mut hlo, mut hi, mut hhi);
    let h0 = h(k0);
    if h0 > 0.0 {
        lo = k0;
        hlo = h0;
        let mut k = k0;
        loop {
            k *= 4.0;
            let hk = h(k);
            if hk <= 0.0 || !k.is_finite() {
                hi = k;
                hhi = hk;
                break;
            }
            lo = k;
            hlo = hk;
        }
    } else {
        hi = k0;
        hhi = h0;
        let mut k = k0;
        loop {
            k /= 4.0;
            if k < floor {
                return (0.0, evals);
            }
            let hk = h(k);
            if hk > 0.0 {
                lo = k;
                hlo = hk;
                break;
            }
            hi = k;
            hhi = hk;
        }
    }
    if hhi == 0.0 {
        return (hi, evals);
    }
    let (mut ulo, mut uhi) = (lo.ln(), hi.ln());
    let mut side = 0i8;
    for _ in 0..SOLVE_MAX_ITERS {
        if uhi - ulo <= SOLVE_LOG_WIDTH {
            break;
        }
        let mid = 0.5 * (ulo + uhi);
        let mut u = if hlo.is_finite() && hhi.is_finite() { (ulo * hhi - uhi * hlo) / (hhi - hlo) } else { mid };
        if !(u > ulo && u < uhi) {
            u = mid;
        }
        let hu = h(u.exp());
        if hu.abs() <= 1e-15 {
            uhi = u;
            break;
        }
        if hu > 0.0 {
            ulo = u;
            hlo = hu;
            if side == 1 {
                hhi *= 0.5;
            }
            side = 1;
        } else {
            uhi = u;
            hhi = hu;
            if side == -1 {
                hlo *= 0.5;
            }
            side = -1;
        }
    }
    (uhi.exp(), evals)
}

pub fn gauge_norm_1d_report(phi: &YoungFunction, m: &WeightedMeasure1D, f: &PiecewiseLinear1D) -> Result<GaugeReport> {
    same(m.interval(), f.interval())?;
    if m.total_mass() == 0.0 {
        return Ok(GaugeReport { value: 0.0, zero_mass: true, modular_evaluations: 0 });
    }
    if f.is_zero() {
        return Ok(GaugeReport { value: 0.0, zero_mass: false, modular_evaluations: 0 });
    }
    let k0 = lp_norm(m, 2.0, f)?;
    if k0 == 0.0 {
        return Ok(GaugeReport { value: 0.0, zero_mass: false, modular_evaluations: 0 });
    }
    let (value, modular_evaluations) = solve_gauge(|k| modular_1d_raw(phi, m, f, k), k0);
    Ok(GaugeReport { value, zero_mass: false, modular_evaluations })
}

/// `‖f‖_{L^Φ_μ}` on an interval.
pub fn gauge_norm_1d(phi: &YoungFunction, m: &WeightedMeasure1D, f: &PiecewiseLinear1D) -> Result<f64> {
    Ok(gauge_norm_1d_report(phi, m, f)?.value)
}

pub fn gauge_norm_2d_report(phi: &YoungFunction, pm: &ProductMeasure, f: &PiecewiseBilinear2D) -> Result<GaugeReport> {
    same(pm.first.interval(), f.x_interval())?;
    same(pm.second.interval(), f.y_interval())?;
    if pm.total_mass() == 0.0 {
        return Ok(GaugeReport { value: 0.0, zero_mass: true, modular_evaluations: 0 });
    }
    if f.is_zero() {
        return Ok(GaugeReport { value: 0.0, zero_mass: false, modular_evaluations: 0 });
    }
    let square = YoungFunction::power(2.0)?;
    let k0 = modular_2d_raw(&square, pm, f, 1.0).sqrt();
    if k0 == 0.0 {
        return Ok(GaugeReport { value: 0.0, zero_mass: false, modular_evaluations: 0 });
    }
    let (value, modular_evaluations) = solve_gauge(|k| modular_2d_raw(phi, pm, f, k), k0);
    Ok(GaugeReport { value, zero_mass: false, modular_evaluations })
}

/// `‖F‖_{L^Φ_{μ₁×μ₂}(I×J)}`.
pub fn gauge_norm_2d(phi: &YoungFunction, pm: &ProductMeasure, f: &PiecewiseBilinear2D) -> Result<f64> {
    Ok(gauge_norm_2d_report(phi, pm, f)?.value)
}

/// `(∫ |f|^p dm)^{1/p}`.
pub fn lp_norm(m: &WeightedMeasure1D, p: f64, f: &PiecewiseLinear1D) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("L^p norm needs 1 <= p < inf, got {p}")));
    }
    same(m.interval(), f.interval())?;
    let knots = f.knots();
    let mut breaks = Vec::new();
    let mut total = 0.0;
    for (i, &(v0, v1)) in f.cells().iter().enumerate() {
        if v0 == 0.0 && v1 == 0.0 {
            continue;
        }
        piece_breaks(None, knots[i], knots[i + 1], v0, v1, 1.0, &mut breaks);
        total += m.integrate_weighted(
            |x| {
                let v = f.eval_in_cell(i, x).abs();
                if p == 1.0 {
                    v
                } else if p == 2.0 {
                    v * v
                } else {
                    v.powf(p)
                }
            },
            &breaks,
            MODULAR_TOL,
        );
    }
    Ok(total.powf(1.0 / p))
}

/// A one-dimensional norm applied along one axis of a repeated norm.
#[derive(Debug, Clone, Copy)]
pub enum Norm1D<'a> {
    Lp { measure: &'a WeightedMeasure1D, p: f64 },
    Gauge { measure: &'a WeightedMeasure1D, phi: &'a YoungFunction },
}

impl Norm1D<'_> {
    pub fn apply(&self, f: &PiecewiseLinear1D) -> Result<f64> {
        match self {
            Norm1D::Lp { measure, p } => lp_norm(measure, *p, f),
            Norm1D::Gauge { measure, phi } => gauge_norm_1d(phi, measure, f),
        }
    }

    pub fn measure(&self) -> &WeightedMeasure1D {
        match self {
            Norm1D::Lp { measure, .. } | Norm1D::Gauge { measure, .. } => measure,
        }
    }
}

/// Relative change between successive doublings of the outer grid below
/// which a repeated norm is accepted.
pub const REPEATED_TOL: f64 = 1e-7;
const REPEATED_MAX_DOUBLINGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatedNormReport {
    pub value: f64,
    /// Subdivisions of each outer cell used for the accepted value.
    pub subdivisions: usize,
    pub last_change: f64,
    pub converged: bool,
}

/// The inner norm along `inner_axis` as a piecewise-linear function of the
/// other variable, sampled at both ends of every cell.
pub fn inner_norm_profile(f: &PiecewiseBilinear2D, inner_axis: Axis, inner: Norm1D<'_>) -> Result<PiecewiseLinear1D> {
    let sampler = ProfileSampler::new(f, inner_axis, inner)?;
    let vals = sampler.initial()?;
    sampler.assemble(&vals, 1)
}

struct ProfileSampler<'a, 'b> {
    f: &'a PiecewiseBilinear2D,
    axis: Axis,
    inner: Norm1D<'b>,
    knots: Vec<f64>,
}

impl<'a, 'b> ProfileSampler<'a, 'b> {
    fn new(f: &'a PiecewiseBilinear2D, axis: Axis, inner: Norm1D<'b>) -> Result<Self> {
        let (inner_iv, knots) = match axis {
            Axis::X => (f.x_interval(), f.y_knots().to_vec()),
            Axis::Y => (f.y_interval(), f.x_knots().to_vec()),
        };
        same(inner.measure().interval(), inner_iv)?;
        Ok(Self { f, axis, inner, knots })
    }

    fn outer_interval(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    fn sample(&self, cell: usize, at: f64) -> Result<f64> {
        let slice = match self.axis {
            Axis::X => self.f.slice_at_y(cell, at),
            Axis::Y => self.f.slice_at_x(cell, at),
        };
        self.inner.apply(&slice)
    }

    fn point(&self, cell: usize, i: usize, s: usize) -> f64 {
        let (t0, t1) = (self.knots[cell], self.knots[cell + 1]);
        if i == s {
            t1
        } else {
            t0 + (t1 - t0) * i as f64 / s as f64
        }
    }

    /// Values at both ends of every cell.
    fn initial(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.knots.len() - 1;
        if self.f.is_continuous() {
            let at = (0..=n)
                .into_par_iter()
                .map(|k| self.sample(k.min(n - 1), self.knots[k]))
                .collect::<Result<Vec<f64>>>()?;
            Ok(at.windows(2).map(|w| w.to_vec()).collect())
        } else {
            (0..n)
                .into_par_iter()
                .map(|c| Ok(vec![self.sample(c, self.knots[c])?, self.sample(c, self.knots[c + 1])?]))
                .collect()
        }
    }

    /// Halves every sub-cell, reusing the existing samples.
    fn refine(&self, vals: &[Vec<f64>], s: usize) -> Result<Vec<Vec<f64>>> {
        vals.par_iter()
            .enumerate()
            .map(|(c, v)| {
                let mut out = Vec::with_capacity(2 * s + 1);
                for i in 0..s {
                    out.push(v[i]);
                    out.push(self.sample(c, self.point(c, 2 * i + 1, 2 * s))?);
                }
                out.push(v[s]);
                Ok(out)
            })
            .collect()
    }

    fn assemble(&self, vals: &[Vec<f64>], s: usize) -> Result<PiecewiseLinear1D> {
        let mut knots = Vec::with_capacity(vals.len() * s + 1);
        let mut cells = Vec::with_capacity(vals.len() * s);
        for (c, v) in vals.iter().enumerate() {
            for i in 0..s {
                knots.push(self.point(c, i, s));
                cells.push((v[i], v[i + 1]));
            }
        }
        knots.push(self.knots[self.knots.len() - 1]);
        PiecewiseLinear1D::from_cells(knots, cells)
    }

    /// Applies `finish` to the profile, doubling the outer sampling until
    /// the result settles.
    fn converge(&self, finish: impl Fn(&PiecewiseLinear1D) -> Result<f64>) -> Result<RepeatedNormReport> {
        let mut vals = self.initial()?;
        let mut s = 1;
        let mut value = finish(&self.assemble(&vals, s)?)?;
        let mut last_change = f64::INFINITY;
        for _ in 0..REPEATED_MAX_DOUBLINGS {
            vals = self.refine(&vals, s)?;
            s *= 2;
            let next = finish(&self.assemble(&vals, s)?)?;
            last_change = if next == value { 0.0 } else { (next - value).abs() / next.abs().max(value.abs()) };
            value = next;
            if last_change <= REPEATED_TOL {
                return Ok(RepeatedNormReport { value, subdivisions: s, last_change, converged: true });
            }
        }
        Ok(RepeatedNormReport { value, subdivisions: s, last_change, converged: false })
    }
}

/// `‖ ‖F‖_inner ‖_outer`, inner norm taken along `inner_axis`, with the
/// outer grid refined until successive values agree to [`REPEATED_TOL`].
pub fn repeated_norm_report(
    f: &PiecewiseBilinear2D,
    inner_axis: Axis,
    inner: Norm1D<'_>,
    outer: Norm1D<'_>,
) -> Result<RepeatedNormReport> {
    let sampler = ProfileSampler::new(f, inner_axis, inner)?;
    same(outer.measure().interval(), sampler.outer_interval())?;
    if f.is_zero() {
        return Ok(RepeatedNormReport { value: 0.0, subdivisions: 1, last_change: 0.0, converged: true });
    }
    sampler.converge(|g| outer.apply(g))
}

pub fn repeated_norm(f: &PiecewiseBilinear2D, inner_axis: Axis, inner: Norm1D<'_>, outer: Norm1D<'_>) -> Result<f64> {
    Ok(repeated_norm_report(f, inner_axis, inner, outer)?.value)
}

/// `∫ ‖F‖_inner dm` over the other variable, refined like
/// [`repeated_norm_report`].
pub fn integrated_norm_report(
    f: &PiecewiseBilinear2D,
    inner_axis: Axis,
    inner: Norm1D<'_>,
    m: &WeightedMeasure1D,
) -> Result<RepeatedNormReport> {
    let sampler = ProfileSampler::new(f, inner_axis, inner)?;
    same(m.interval(), sampler.outer_interval())?;
    sampler.converge(|g| integrate_1d(g, m))
}

/// `‖ ‖F‖_{L^{p₁}_{m₁}(I)} ‖_{L^Φ_{m₂}(J)}`.
pub fn mixed_norm_p_phi(
    m1: &WeightedMeasure1D,
    p1: f64,
    m2: &WeightedMeasure1D,
    phi: &YoungFunction,
    f: &PiecewiseBilinear2D,
) -> Result<f64> {
    repeated_norm(f, Axis::X, Norm1D::Lp { measure: m1, p: p1 }, Norm1D::Gauge { measure: m2, phi })
}

/// `‖ ‖F‖_{L^{p₂}_{m₂}(J)} ‖_{L^{s₁}_{m₁}(I)}`: inner over the second variable.
pub fn mixed_norm_hat(
    m1: &WeightedMeasure1D,
    s1: f64,
    m2: &WeightedMeasure1D,
    p2: f64,
    f: &PiecewiseBilinear2D,
) -> Result<f64> {
    repeated_norm(f, Axis::Y, Norm1D::Lp { measure: m2, p: p2 }, Norm1D::Lp { measure: m1, p: s1 })
}

/// `‖ ‖F‖_{L^Φ_{m₁}(I)} ‖_{L^Φ_{m₂}(J)}`.
pub fn iterated_gauge(
    phi: &YoungFunction,
    m1: &WeightedMeasure1D,
    m2: &WeightedMeasure1D,
    f: &PiecewiseBilinear2D,
) -> Result<f64> {
    repeated_norm(f, Axis::X, Norm1D::Gauge { measure: m1, phi }, Norm1D::Gauge { measure: m2, phi })
}

/// `[∫ φ₀ dm, ∫ φ₁ dm]` for the two linear hat functions of each cell.
fn hat_moments(m: &WeightedMeasure1D, knots: &[f64]) -> Vec<(f64, f64)> {
    knots
        .windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            let h = x1 - x0;
            let left = m.integrate_weighted(|x| (x1 - x) / h, &[x0, x1], MODULAR_TOL);
            let right = m.integrate_weighted(|x| (x - x0) / h, &[x0, x1], MODULAR_TOL);
            (left, right)
        })
        .collect()
}

/// `x ↦ ∫ F(x, y) dm(y)` (integrating out `axis`), exact per cell.
pub fn integrate_axis(f: &PiecewiseBilinear2D, axis: Axis, m: &WeightedMeasure1D) -> Result<PiecewiseLinear1D> {
    match axis {
        Axis::Y => {
            same(m.interval(), f.y_interval())?;
            let mom = hat_moments(m, f.y_knots());
            let cells = (0..f.nx())
                .map(|i| {
                    let mut l = 0.0;
                    let mut r = 0.0;
                    for (j, &(w0, w1)) in mom.iter().enumerate() {
                        let [v00, v10, v01, v11] = f.cell(i, j);
                        l += v00 * w0 + v01 * w1;
                        r += v10 * w0 + v11 * w1;
                    }
                    (l, r)
                })
                .collect();
            PiecewiseLinear1D::from_cells(f.x_knots().to_vec(), cells)
        }
        Axis::X => integrate_axis(&f.transposed(), Axis::Y, m),
    }
}

/// `∫∫ F dν₁ dν₂`, exact for a bilinear integrand up to the moment quadrature.
pub fn integrate_product(f: &PiecewiseBilinear2D, pm: &ProductMeasure) -> Result<f64> {
    same(pm.first.interval(), f.x_interval())?;
    same(pm.second.interval(), f.y_interval())?;
    let mx = hat_moments(&pm.first, f.x_knots());
    let my = hat_moments(&pm.second, f.y_knots());
    let mut total = 0.0;
    for (j, &(b0, b1)) in my.iter().enumerate() {
        for (i, &(a0, a1)) in mx.iter().enumerate() {
            let [v00, v10, v01, v11] = f.cell(i, j);
            total += v00 * a0 * b0 + v10 * a1 * b0 + v01 * a0 * b1 + v11 * a1 * b1;
        }
    }
    Ok(total)
}

/// `∫ f dm` for a piecewise-linear `f`.
pub fn integrate_1d(f: &PiecewiseLinear1D, m: &WeightedMeasure1D) -> Result<f64> {
    same(m.interval(), f.interval())?;
    let mom = hat_moments(m, f.knots());
    Ok(f.cells().iter().zip(&mom).map(|(c, w)| c.0 * w.0 + c.1 * w.1).sum())
}
