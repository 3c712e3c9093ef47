//! Young functions: even convex `Φ` with `Φ(0) = 0` and `Φ(t) → ∞`.
//!
//! Three families are supported: pure powers `|t|^q`, exponential powers
//! `e^{|t|^q} - 1`, and tabulated convex functions given by knots on
//! `[0, t_m]` (piecewise-linear, extended past the last knot by the last
//! linear piece). Every function carries a `domain_cap`, the largest
//! argument magnitude that is evaluated without overflow, and a flag
//! recording whether strict monotonicity (hence invertibility on `[0, ∞)`)
//! was certified at construction.

use crate::error::{Error, Result};

/// Relative tolerance on `Φ(Φ⁻¹(y)) = y`.
pub const EPS_INV: f64 = 1e-10;
/// Relative slack allowed in convexity and submultiplicativity checks.
pub const EPS_CONVEX: f64 = 1e-9;

const CERTIFY_SAMPLES: usize = 240;
const CERTIFY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum YoungKind {
    /// `Φ(t) = |t|^q`, `q ≥ 1`.
    Power { q: f64 },
    /// `Φ(t) = e^{|t|^q} - 1`, `q ≥ 1`.
    ExpPower { q: f64 },
    /// Even extension of the piecewise-linear interpolant through `(t_i, φ_i)`.
    Tabulated { t: Vec<f64>, phi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct YoungFunction {
    kind: YoungKind,
    domain_cap: f64,
    invertible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubmultiplicativeCheck {
    pub holds: bool,
    /// Largest observed `Φ(st) / (Φ(s) Φ(t))` over pairs with a nonzero denominator.
    pub max_ratio: f64,
    pub worst_pair: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCheck {
    pub holds: bool,
    /// Largest relative excess `(Γ(mid) - avg) / max(avg, tiny)`; negative when strictly convex.
    pub worst_excess: f64,
    pub worst_pair: Option<(f64, f64)>,
}

impl YoungFunction {
    pub fn power(q: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidYoung(format!("power exponent q = {q} must be >= 1")));
        }
        let cap = ((f64::MAX / 2.0).ln() / q).exp() * (1.0 - 1e-12);
        Ok(Self::certify(YoungKind::Power { q }, cap))
    }

    pub fn exp_power(q: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidYoung(format!("exp_power exponent q = {q} must be >= 1")));
        }
        let cap = (f64::MAX / 2.0).ln().powf(1.0 / q) * (1.0 - 1e-12);
        Ok(Self::certify(YoungKind::ExpPower { q }, cap))
    }

    /// Builds a tabulated Young function from `(t, φ)` knots.
    ///
    /// The first knot must be `(0, 0)`, abscissae strictly increasing,
    /// ordinates nondecreasing, slopes nondecreasing (convexity) and the last
    /// slope positive so the linear extension is unbounded.
    pub fn tabulated(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidYoung("tabulated function needs at least two knots".into()));
        }
        if knots.iter().any(|&(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidYoung("knots must be finite".into()));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::InvalidYoung("first knot must be (0, 0)".into()));
        }
        let mut prev_slope = 0.0_f64;
        for (i, win) in knots.windows(2).enumerate() {
            let (t0, p0) = win[0];
            let (t1, p1) = win[1];
            if t1 <= t0 {
                return Err(Error::InvalidYoung(format!("abscissae not strictly increasing at knot {}", i + 1)));
            }
            if p1 < p0 {
                return Err(Error::InvalidYoung(format!("ordinates decrease at knot {}", i + 1)));
            }
            let slope = (p1 - p0) / (t1 - t0);
            if slope < prev_slope * (1.0 - EPS_CONVEX) - f64::EPSILON {
                return Err(Error::InvalidYoung(format!("slopes decrease at knot {} (not convex)", i + 1)));
            }
            prev_slope = slope;
        }
        if prev_slope <= 0.0 {
            return Err(Error::InvalidYoung("last slope must be positive".into()));
        }
        let (tm, pm) = knots[knots.len() - 1];
        let cap = (tm + (f64::MAX / 2.0 - pm) / prev_slope).min(1e300);
        let kind =
            YoungKind::Tabulated { t: knots.iter().map(|k| k.0).collect(), phi: knots.iter().map(|k| k.1).collect() };
        Ok(Self::certify(kind, cap))
    }

    /// Samples `f` on `[0, t_max]` and tabulates it on `n` uniform segments.
    pub fn tabulate_fn(f: impl Fn(f64) -> f64, t_max: f64, n: usize) -> Result<Self> {
        let knots: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let t = t_max * i as f64 / n as f64;
                (t, if i == 0 { 0.0 } else { f(t) })
            })
            .collect();
        Self::tabulated(&knots)
    }

    fn certify(kind: YoungKind, domain_cap: f64) -> Self {
        let mut phi = Self { kind, domain_cap, invertible: true };
        let lo = CERTIFY_FLOOR.min(domain_cap / 2.0);
        let ratio = (domain_cap / lo).powf(1.0 / (CERTIFY_SAMPLES - 1) as f64);
        let mut samples: Vec<f64> = (0..CERTIFY_SAMPLES).map(|k| lo * ratio.powi(k as i32)).collect();
        if let YoungKind::Tabulated { t, .. } = &phi.kind {
            for w in t.windows(2) {
                samples.push(w[1]);
                samples.push(0.5 * (w[0] + w[1]));
            }
        }
        samples.retain(|&s| s > 0.0 && s <= domain_cap);
        samples.sort_by(f64::total_cmp);
        samples.dedup();
        let mut last = 0.0;
        for s in samples {
            let v = phi.eval_unchecked(s);
            if !(v > last) {
                phi.invertible = false;
                break;
            }
            last = v;
        }
        phi
    }

    pub fn kind(&self) -> &YoungKind {
        &self.kind
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    /// `Φ(|t|)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let u = t.abs();
        if u.is_nan() || u > self.domain_cap {
            return Err(Error::OverflowDomain { value: t, cap: self.domain_cap });
        }
        Ok(self.eval_unchecked(u))
    }

    /// `Φ(|t|)`, or `+∞` past the domain cap.
    pub fn eval_saturating(&self, t: f64) -> f64 {
        let u = t.abs();
        if u > self.domain_cap {
            f64::INFINITY
        } else {
            self.eval_unchecked(u)
        }
    }

    fn eval_unchecked(&self, u: f64) -> f64 {
        match &self.kind {
            YoungKind::Power { q } => {
                if *q == 1.0 {
                    u
                } else if *q == 2.0 {
                    u * u
                } else {
                    u.powf(*q)
                }
            }
            YoungKind::ExpPower { q } => u.powf(*q).exp_m1(),
            YoungKind::Tabulated { t, phi } => {
                let m = t.len() - 1;
                // index of the segment [t_i, t_{i+1}] containing u, or the last one
                let i = match t.partition_point(|&x| x <= u) {
                    0 => 0,
                    k if k > m => m - 1,
                    k => (k - 1).min(m - 1),
                };
                let slope = (phi[i + 1] - phi[i]) / (t[i + 1] - t[i]);
                phi[i] + slope * (u - t[i])
            }
        }
    }

    /// Abscissae where `Φ` is not smooth (tabulated knots); empty otherwise.
    pub fn kinks(&self) -> &[f64] {
        match &self.kind {
            YoungKind::Tabulated { t, .. } => &t[1..],
            _ => &[],
        }
    }

    /// `Φ(domain_cap)`, the largest value `inverse` accepts.
    pub fn max_value(&self) -> f64 {
        self.eval_unchecked(self.domain_cap)
    }

    /// `Φ⁻¹(y)` on `[0, ∞)` by expanding bracket and bisection.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !self.invertible {
            return Err(Error::NotInvertible);
        }
        if y.is_nan() || y < 0.0 {
            return Err(Error::InvalidParameter(format!("inverse requires y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if y > self.max_value() {
            return Err(Error::OverflowDomain { value: y, cap: self.domain_cap });
        }
        let cap = self.domain_cap;
        let (mut lo, mut hi) = if self.eval_unchecked(1.0_f64.min(cap)) >= y {
            let mut hi = 1.0_f64.min(cap);
            let mut lo = hi / 2.0;
            while self.eval_unchecked(lo) >= y {
                hi = lo;
                lo /= 2.0;
                if lo < f64::MIN_POSITIVE {
                    return Ok(hi);
                }
            }
            (lo, hi)
        } else {
            let mut lo = 1.0_f64.min(cap);
            let mut hi = (2.0 * lo).min(cap);
            while self.eval_unchecked(hi) < y {
                lo = hi;
                hi = (2.0 * hi).min(cap);
            }
            (lo, hi)
        };
        // Φ(lo) < y <= Φ(hi)
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_unchecked(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (flo, fhi) = (self.eval_unchecked(lo), self.eval_unchecked(hi));
        Ok(if (y - flo).abs() < (fhi - y).abs() { lo } else { hi })
    }

    /// `Φ⁻¹(y)` with `y = +∞` or `y > Φ(cap)` mapped to `domain_cap`.
    pub fn inverse_saturating(&self, y: f64) -> Result<f64> {
        if y > self.max_value() {
            if !self.invertible {
                return Err(Error::NotInvertible);
            }
            return Ok(if y.is_infinite() { f64::INFINITY } else { self.domain_cap });
        }
        self.inverse(y)
    }

    /// `C₀(Φ) = 2 / Φ⁻¹(1/2)`.
    pub fn c0(&self) -> Result<f64> {
        Ok(2.0 / self.inverse(0.5)?)
    }

    /// `‖1‖` in the gauge norm of a measure with total mass `mass`:
    /// `[Φ⁻¹(1/mass)]⁻¹`.
    pub fn unit_norm(&self, mass: f64) -> Result<f64> {
        if mass <= 0.0 {
            return Ok(0.0);
        }
        Ok(1.0 / self.inverse_saturating(1.0 / mass)?)
    }

    /// Tests `Φ(st) ≤ Φ(s) Φ(t) (1 + ε)` for every pair drawn from `grid`.
    pub fn check_submultiplicative(&self, grid: &[f64]) -> Result<SubmultiplicativeCheck> {
        let mut out = SubmultiplicativeCheck { holds: true, max_ratio: 0.0, worst_pair: None };
        let mut worst_excess = f64::NEG_INFINITY;
        for &s in grid {
            for &t in grid {
                let (s, t) = (s.abs(), t.abs());
                let lhs = self.eval(s * t)?;
                let rhs = self.eval(s)? * self.eval(t)?;
                if rhs == 0.0 {
                    if lhs > 0.0 {
                        out.holds = false;
                        out.max_ratio = f64::INFINITY;
                        out.worst_pair = Some((s, t));
                        worst_excess = f64::INFINITY;
                    }
                    continue;
                }
                let ratio = lhs / rhs;
                if ratio > out.max_ratio {
                    out.max_ratio = ratio;
                }
                if ratio - 1.0 > worst_excess {
                    worst_excess = ratio - 1.0;
                    out.worst_pair = Some((s, t));
                }
                if lhs > rhs * (1.0 + EPS_CONVEX) {
                    out.holds = false;
                }
            }
        }
        Ok(out)
    }

    /// Midpoint convexity of `Γ(t) = Φ(t^{1/p})` over all pairs of `grid`.
    pub fn check_gamma_convex(&self, p: f64, grid: &[f64]) -> Result<ConvexityCheck> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
        }
        let gamma = |t: f64| self.eval(t.abs().powf(1.0 / p));
        let values = grid.iter().map(|&t| gamma(t)).collect::<Result<Vec<_>>>()?;
        let mut out = ConvexityCheck { holds: true, worst_excess: f64::NEG_INFINITY, worst_pair: None };
        for (i, &s) in grid.iter().enumerate() {
            for (j, &t) in grid.iter().enumerate().skip(i + 1) {
                let mid = gamma(0.5 * (s.abs() + t.abs()))?;
                let avg = 0.5 * (values[i] + values[j]);
                let excess = (mid - avg) / avg.max(f64::MIN_POSITIVE);
                if excess > out.worst_excess {
                    out.worst_excess = excess;
                    out.worst_pair = Some((s, t));
                }
                if mid > avg * (1.0 + EPS_CONVEX) + f64::MIN_POSITIVE {
                    out.holds = false;
                }
            }
        }
        Ok(out)
    }
}

/// `n` points geometrically spaced on `[lo, hi]`, preceded by `0`.
pub fn sample_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    if n == 1 {
        g.push(lo);
        return g;
    }
    let r = (hi / lo).powf(1.0 / (n - 1) as f64);
    g.extend((0..n).map(|k| if k + 1 == n { hi } else { lo * r.powi(k as i32) }));
    g
}

/// Uniform points on `[0, hi]`.
pub fn uniform_grid(hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| hi * i as f64 / n as f64).collect()
}
