//! Weighted measures `dm = w(t) dt` on a closed interval `[a, b]`.

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Constant(f64),
    /// `(t - a)^α` for a left anchor, `(b - t)^α` for a right anchor.
    PowerLaw {
        alpha: f64,
        anchor: Anchor,
    },
    /// Piecewise-linear through `(t_i, w_i)`; knots span the whole interval.
    Tabulated {
        t: Vec<f64>,
        w: Vec<f64>,
    },
    Product(Box<Density>, Box<Density>),
}

impl Density {
    pub fn product(a: Density, b: Density) -> Self {
        Density::Product(Box::new(a), Box::new(b))
    }

    fn validate(&self, a: f64, b: f64) -> Result<()> {
        match self {
            Density::Constant(c) => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidMeasure(format!("constant density {c} must be finite and >= 0")));
                }
            }
            Density::PowerLaw { alpha, .. } => {
                if !(alpha.is_finite() && *alpha > -1.0) {
                    return Err(Error::InvalidMeasure(format!("power_law alpha = {alpha} must be > -1")));
                }
            }
            Density::Tabulated { t, w } => {
                if t.len() < 2 || t.len() != w.len() {
                    return Err(Error::InvalidMeasure("tabulated density needs >= 2 knots".into()));
                }
                if t.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(Error::InvalidMeasure("tabulated knots must be strictly increasing".into()));
                }
                if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidMeasure("tabulated density values must be finite and >= 0".into()));
                }
                let scale = (b - a).abs().max(a.abs()).max(b.abs());
                if (t[0] - a).abs() > 1e-12 * scale || (t[t.len() - 1] - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidMeasure(format!(
                        "tabulated knots must span [{a}, {b}], got [{}, {}]",
                        t[0],
                        t[t.len() - 1]
                    )));
                }
            }
            Density::Product(x, y) => {
                x.validate(a, b)?;
                y.validate(a, b)?;
            }
        }
        Ok(())
    }

    /// Summed power-law exponents at the left and right anchors.
    fn anchor_exponents(&self) -> (f64, f64) {
        match self {
            Density::PowerLaw { alpha, anchor: Anchor::Left } => (*alpha, 0.0),
            Density::PowerLaw { alpha, anchor: Anchor::Right } => (0.0, *alpha),
            Density::Product(x, y) => {
                let (l1, r1) = x.anchor_exponents();
                let (l2, r2) = y.anchor_exponents();
                (l1 + l2, r1 + r2)
            }
            _ => (0.0, 0.0),
        }
    }

    fn knots(&self, out: &mut Vec<f64>) {
        match self {
            Density::Tabulated { t, .. } => out.extend_from_slice(t),
            Density::Product(x, y) => {
                x.knots(out);
                y.knots(out);
            }
            _ => {}
        }
    }

    fn eval(&self, t: f64, a: f64, b: f64) -> f64 {
        match self {
            Density::Constant(c) => *c,
            Density::PowerLaw { alpha, anchor } => {
                let d = match anchor {
                    Anchor::Left => t - a,
                    Anchor::Right => b - t,
                };
                d.max(0.0).powf(*alpha)
            }
            Density::Tabulated { t: knots, w } => interp(knots, w, t),
            Density::Product(x, y) => {
                let u = x.eval(t, a, b);
                if u == 0.0 {
                    return 0.0;
                }
                let v = y.eval(t, a, b);
                if v == 0.0 {
                    0.0
                } else {
                    u * v
                }
            }
        }
    }

    /// Density with the power-law factors at the given anchor removed.
    fn eval_without_anchor(&self, t: f64, a: f64, b: f64, strip: Anchor) -> f64 {
        match self {
            Density::PowerLaw { anchor, .. } if *anchor == strip => 1.0,
            Density::Product(x, y) => x.eval_without_anchor(t, a, b, strip) * y.eval_without_anchor(t, a, b, strip),
            other => other.eval(t, a, b),
        }
    }

    fn reflected(&self, a: f64, b: f64) -> Density {
        match self {
            Density::Constant(c) => Density::Constant(*c),
            Density::PowerLaw { alpha, anchor } => Density::PowerLaw {
                alpha: *alpha,
                anchor: match anchor {
                    Anchor::Left => Anchor::Right,
                    Anchor::Right => Anchor::Left,
                },
            },
            Density::Tabulated { t, w } => Density::Tabulated {
                t: t.iter().rev().map(|x| a + b - x).collect(),
                w: w.iter().rev().copied().collect(),
            },
            Density::Product(x, y) => Density::product(x.reflected(a, b), y.reflected(a, b)),
        }
    }

    fn shifted(&self, shift: f64) -> Density {
        match self {
            Density::Tabulated { t, w } => {
                Density::Tabulated { t: t.iter().map(|x| x + shift).collect(), w: w.clone() }
            }
            Density::Product(x, y) => Density::product(x.shifted(shift), y.shifted(shift)),
            other => other.clone(),
        }
    }
}

fn interp(knots: &[f64], values: &[f64], t: f64) -> f64 {
    let n = knots.len();
    if t <= knots[0] {
        return values[0];
    }
    if t >= knots[n - 1] {
        return values[n - 1];
    }
    let i = knots.partition_point(|&k| k <= t) - 1;
    let s = (t - knots[i]) / (knots[i + 1] - knots[i]);
    values[i] + s * (values[i + 1] - values[i])
}

/// Cumulative table for densities without a closed-form antiderivative.
#[derive(Debug, Clone, PartialEq)]
struct CumTable {
    breaks: Vec<f64>,
    prefix: Vec<f64>,
}

const TABLE_MIN_PANELS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure1D {
    a: f64,
    b: f64,
    density: Density,
    total: f64,
    table: Option<CumTable>,
}

impl WeightedMeasure1D {
    pub fn new(a: f64, b: f64, density: Density) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMeasure(format!("interval [{a}, {b}] must satisfy a < b")));
        }
        density.validate(a, b)?;
        let (al, ar) = density.anchor_exponents();
        if al <= -1.0 || ar <= -1.0 {
            return Err(Error::InvalidMeasure("combined power-law exponent must be > -1".into()));
        }
        let mut m = Self { a, b, density, total: 0.0, table: None };
        if matches!(m.density, Density::Product(..)) {
            m.table = Some(m.build_table());
        }
        m.total = m.cumulative_unchecked(b);
        Ok(m)
    }

    pub fn lebesgue(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, Density::Constant(1.0))
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Pointwise density `w(t)`; `+∞` at an anchor with negative exponent.
    pub fn density_at(&self, t: f64) -> f64 {
        self.density.eval(t, self.a, self.b)
    }

    /// Knots of tabulated factors inside `(a, b)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut k = Vec::new();
        self.density.knots(&mut k);
        k.retain(|&x| x > self.a && x < self.b);
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    pub fn same_interval(&self, other: &WeightedMeasure1D) -> Result<()> {
        let scale = 1e-12 * (self.b - self.a).abs().max(self.a.abs()).max(self.b.abs());
        if (self.a - other.a).abs() > scale || (self.b - other.b).abs() > scale {
            return Err(Error::IncompatibleIntervals(self.a, self.b, other.a, other.b));
        }
        Ok(())
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if !(x >= self.a && x <= self.b) {
            return Err(Error::OutOfInterval { x, a: self.a, b: self.b });
        }
        Ok(())
    }

    /// `m[a, x]`.
    pub fn cumulative(&self, x: f64) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.cumulative_unchecked(x))
    }

    /// `m[x, b]`, computed without cancellation where a closed form exists.
    pub fn upper(&self, x: f64) -> Result<f64> {
        self.check_point(x)?;
        let (a, b) = (self.a, self.b);
        Ok(match &self.density {
            Density::Constant(c) => c * (b - x),
            Density::PowerLaw { alpha, anchor: Anchor::Right } => (b - x).powf(alpha + 1.0) / (alpha + 1.0),
            Density::PowerLaw { alpha, anchor: Anchor::Left } => {
                ((b - a).powf(alpha + 1.0) - (x - a).powf(alpha + 1.0)) / (alpha + 1.0)
            }
            Density::Tabulated { t, w } => {
                // trapezoid sums from the right
                let i = t.partition_point(|&k| k <= x).clamp(1, t.len() - 1);
                let wx = interp(t, w, x);
                let mut s = 0.5 * (t[i] - x) * (wx + w[i]);
                for j in i..t.len() - 1 {
                    s += 0.5 * (t[j + 1] - t[j]) * (w[j] + w[j + 1]);
                }
                s
            }
            Density::Product(..) => (self.total - self.cumulative_unchecked(x)).max(0.0),
        })
    }

    fn cumulative_unchecked(&self, x: f64) -> f64 {
        let a = self.a;
        match &self.density {
            Density::Constant(c) => c * (x - a),
            Density::PowerLaw { alpha, anchor: Anchor::Left } => (x - a).powf(alpha + 1.0) / (alpha + 1.0),
            Density::PowerLaw { alpha, anchor: Anchor::Right } => {
                let b = self.b;
                ((b - a).powf(alpha + 1.0) - (b - x).powf(alpha + 1.0)) / (alpha + 1.0)
            }
            Density::Tabulated { t, w } => {
                let i = (t.partition_point(|&k| k <= x).max(1) - 1).min(t.len() - 2);
                let mut s = 0.0;
                for j in 0..i {
                    s += 0.5 * (t[j + 1] - t[j]) * (w[j] + w[j + 1]);
                }
                s + 0.5 * (x - t[i]) * (w[i] + interp(t, w, x))
            }
            Density::Product(..) => {
                let table = self.table.as_ref().expect("product densities carry a table");
                let i = (table.breaks.partition_point(|&k| k <= x).max(1) - 1).min(table.breaks.len() - 2);
                let start = table.breaks[i];
                let panel_mass = table.prefix[i + 1] - table.prefix[i];
                let partial = if x >= table.breaks[i + 1] {
                    panel_mass
                } else {
                    self.integrate_weighted(|_| 1.0, &[start, x], Tolerance::TIGHT).clamp(0.0, panel_mass)
                };
                table.prefix[i] + partial
            }
        }
    }

    fn build_table(&self) -> CumTable {
        let mut coarse = vec![self.a];
        coarse.extend(self.breakpoints());
        coarse.push(self.b);
        let per = TABLE_MIN_PANELS.div_ceil(coarse.len() - 1).max(1);
        let mut breaks = Vec::with_capacity((coarse.len() - 1) * per + 1);
        for w in coarse.windows(2) {
            for k in 0..per {
                breaks.push(w[0] + (w[1] - w[0]) * k as f64 / per as f64);
            }
        }
        breaks.push(self.b);
        let mut prefix = vec![0.0];
        for w in breaks.windows(2) {
            let v = self.integrate_weighted(|_| 1.0, &[w[0], w[1]], Tolerance::TIGHT);
            prefix.push(prefix.last().unwrap() + v.max(0.0));
        }
        CumTable { breaks, prefix }
    }

    /// `∫ g dm` over `[breaks[0], breaks[last]]`, splitting at every caller
    /// breakpoint and every density knot. Pieces touching an anchor with a
    /// negative power-law exponent are integrated after the substitution
    /// `u = (t - anchor)^{α+1}`, which removes the singularity; for a
    /// fractional positive exponent `t - anchor = u²` softens the cusp.
    pub fn integrate_weighted<G: FnMut(f64) -> f64>(&self, mut g: G, breaks: &[f64], tol: Tolerance) -> f64 {
        if breaks.len() < 2 {
            return 0.0;
        }
        let lo = breaks[0];
        let hi = breaks[breaks.len() - 1];
        let mut pts: Vec<f64> = breaks.to_vec();
        pts.extend(self.breakpoints().into_iter().filter(|&k| k > lo && k < hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let (al, ar) = self.density.anchor_exponents();
        let (a, b) = (self.a, self.b);
        let special = |e: f64| e < 0.0 || (e > 0.0 && e.fract() != 0.0);
        if special(al) && special(ar) && pts.len() == 2 && lo <= a && hi >= b {
            // one substitution per anchor
            pts.insert(1, 0.5 * (a + b));
        }
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 <= t0 {
                continue;
            }
            let cusp = |e: f64| e > 0.0 && e.fract() != 0.0;
            let piece = if cusp(al) && t0 <= a {
                quad::integrate(
                    |u: f64| {
                        let t = a + u * u;
                        2.0 * g(t) * self.density.eval_without_anchor(t, a, b, Anchor::Left) * u.powf(2.0 * al + 1.0)
                    },
                    0.0,
                    (t1 - a).sqrt(),
                    tol,
                )
                .value
            } else if cusp(ar) && t1 >= b {
                quad::integrate(
                    |u: f64| {
                        let t = b - u * u;
                        2.0 * g(t) * self.density.eval_without_anchor(t, a, b, Anchor::Right) * u.powf(2.0 * ar + 1.0)
                    },
                    0.0,
                    (b - t0).sqrt(),
                    tol,
                )
                .value
            } else if al < 0.0 && t0 <= a {
                let e = al + 1.0;
                let u1 = (t1 - a).powf(e);
                quad::integrate(
                    |u: f64| {
                        let t = a + u.powf(1.0 / e);
                        g(t) * self.density.eval_without_anchor(t, a, b, Anchor::Left)
                    },
                    0.0,
                    u1,
                    tol,
                )
                .value
                    / e
            } else if ar < 0.0 && t1 >= b {
                let e = ar + 1.0;
                let u0 = (b - t0).powf(e);
                quad::integrate(
                    |u: f64| {
                        let t = b - u.powf(1.0 / e);
                        g(t) * self.density.eval_without_anchor(t, a, b, Anchor::Right)
                    },
                    0.0,
                    u0,
                    tol,
                )
                .value
                    / e
            } else {
                quad::integrate(|t| g(t) * self.density.eval(t, a, b), t0, t1, tol).value
            };
            total += piece;
        }
        total
    }

    /// Same measure after reflection `t ↦ a + b - t`.
    pub fn reflected(&self) -> Self {
        Self::new(self.a, self.b, self.density.reflected(self.a, self.b)).expect("reflection preserves validity")
    }

    /// Same density carried rigidly to `[a + shift, b + shift]`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        Self::new(self.a + shift, self.b + shift, self.density.shifted(shift))
    }

    /// Density multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let density = match &self.density {
            Density::Constant(k) => Density::Constant(k * c),
            other => Density::product(Density::Constant(c), other.clone()),
        };
        Self::new(self.a, self.b, density)
    }
}

/// `∫_a^x ν[a,t]^{p'} w(t)^{1-p'} dt` (left) or `∫_x^b ν[t,b]^{p'} w(t)^{1-p'} dt`
/// (right), with `p' = p/(p-1)`. Returns `+∞` when the integral diverges.
pub fn tail_moment(nu: &WeightedMeasure1D, w: &WeightedMeasure1D, p: f64, side: Side, x: f64) -> Result<f64> {
    nu.same_interval(w)?;
    nu.check_point(x)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("tail_moment needs 1 < p < inf, got {p}")));
    }
    let pc = p / (p - 1.0);
    let (a, b) = nu.interval();
    let (lo, hi) = match side {
        Side::Left => (a, x),
        Side::Right => (x, b),
    };
    if hi <= lo {
        return Ok(0.0);
    }
    let integrand = |t: f64| {
        let mass = match side {
            Side::Left => nu.cumulative_unchecked(t),
            Side::Right => nu.upper(t).unwrap_or(0.0),
        };
        if mass <= 0.0 {
            return 0.0;
        }
        let wt = w.density_at(t);
        if wt == 0.0 {
            return f64::INFINITY;
        }
        let direct = mass.powf(pc) * wt.powf(1.0 - pc);
        if direct.is_finite() && direct > 0.0 {
            direct
        } else {
            // the factors over- or underflow separately near a zero of w
            (pc * mass.ln() + (1.0 - pc) * wt.ln()).exp()
        }
    };
    let mut pts = vec![lo];
    let mut knots = w.breakpoints();
    knots.extend(nu.breakpoints());
    knots.retain(|&k| k > lo && k < hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    pts.extend(knots);
    pts.push(hi);

    let mut total = 0.0;
    for seg in pts.windows(2) {
        let (t0, t1) = (seg[0], seg[1]);
        let r = quad::integrate_singular(
            integrand,
            t0,
            t1,
            w.density_at(t0) == 0.0,
            w.density_at(t1) == 0.0,
            Tolerance::QUAD,
        );
        if r.divergent || !r.value.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += r.value;
    }
    Ok(total)
}
