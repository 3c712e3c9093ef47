//! Numerical verification of the product-space Orlicz–Poincaré inequality,
//! the intermediate steps of its proof, the lemmas it rests on, and a
//! sharpness probe over one-variable ramps.
//!
//! Each check returns one or more [`VerificationReport`]s. A report passes
//! when `lhs ≤ rhs·(1 + tol) + abs_floor`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{kp_pair, poincare_constant, KConstantReport};
use crate::error::{Error, Result};
use crate::function::{Axis, PiecewiseBilinear2D, PiecewiseLinear1D};
use crate::measure::{Anchor, Density, WeightedMeasure1D};
use crate::norms::{
    gauge_norm_1d, gauge_norm_2d, integrate_axis, integrate_product, integrated_norm_report, mixed_norm_hat,
    mixed_norm_p_phi, repeated_norm_report, Norm1D, ProductMeasure,
};
use crate::young::{sample_grid, ConvexityCheck, SubmultiplicativeCheck, YoungFunction, YoungKind};

pub const TOL_VERIFY: f64 = 1e-5;
pub const ABS_FLOOR: f64 = 1e-12;
/// Slack allowed on the lemma checks.
pub const LEMMA_TOL: f64 = 1e-6;
/// Equality tolerance for the power case of the one-variable sandwiches.
pub const POWER_EQUALITY_TOL: f64 = 1e-7;
const HYPOTHESIS_POINTS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
    /// A hypothesis of the inequality does not hold; nothing was checked.
    Skipped,
    /// A constant is infinite, so the right-hand side is `+∞`.
    InfiniteConstant,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Passed => "passed",
            Status::Failed => "failed",
            Status::Skipped => "skipped",
            Status::InfiniteConstant => "infinite_constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub relative_slack: f64,
    pub passed: bool,
    pub status: Status,
    /// Named intermediates, in insertion order.
    pub diagnostics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Compares `lhs ≤ rhs·(1 + tol) + ABS_FLOOR`.
    pub fn compare(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        let relative_slack = if rhs.is_infinite() {
            1.0
        } else if slack == 0.0 {
            0.0
        } else {
            slack / rhs.abs().max(ABS_FLOOR)
        };
        let passed = lhs <= rhs * (1.0 + tol) + ABS_FLOOR;
        let status = if rhs.is_infinite() {
            Status::InfiniteConstant
        } else if passed {
            Status::Passed
        } else {
            Status::Failed
        };
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            relative_slack,
            passed,
            status,
            diagnostics: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            relative_slack: f64::NAN,
            passed: true,
            status: Status::Skipped,
            diagnostics: Vec::new(),
            notes: vec![reason.into()],
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.push((key.to_string(), value));
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Also requires `|lhs − rhs| ≤ tol·max(|lhs|, |rhs|)`.
    fn require_equality(mut self, tol: f64) -> Self {
        let gap = (self.lhs - self.rhs).abs() / self.lhs.abs().max(self.rhs.abs()).max(ABS_FLOOR);
        self.diagnostics.push(("equality_gap".into(), gap));
        if gap > tol && self.slack != 0.0 {
            self.passed = false;
            self.status = Status::Failed;
            self.notes.push(format!("power case should be an equality; gap {gap:e}"));
        }
        self
    }
}

/// Exponent of `ν₁(I)` in the prefactor of the second derivative term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatementExponent {
    /// `1/s₁`, the value the proof arrives at.
    #[default]
    Proof,
    /// `s₁`, as printed in the statement of the inequality.
    Statement,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub phi: YoungFunction,
    pub mu: ProductMeasure,
    pub nu: ProductMeasure,
    pub w: ProductMeasure,
    pub p1: f64,
    pub p2: f64,
    pub s1: f64,
    pub statement_exponent: StatementExponent,
    pub tol_verify: f64,
    /// Multiplies `C₁`; only for negative controls.
    pub c1_scale: f64,
}

impl ExperimentConfig {
    pub fn new(
        phi: YoungFunction,
        mu: ProductMeasure,
        nu: ProductMeasure,
        w: ProductMeasure,
        p1: f64,
        p2: f64,
        s1: f64,
    ) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("s1", s1)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must satisfy 1 <= {name} < inf")));
            }
        }
        for m in [&nu.first, &w.first] {
            mu.first.same_interval(m)?;
        }
        for m in [&nu.second, &w.second] {
            mu.second.same_interval(m)?;
        }
        Ok(Self {
            phi,
            mu,
            nu,
            w,
            p1,
            p2,
            s1,
            statement_exponent: StatementExponent::Proof,
            tol_verify: TOL_VERIFY,
            c1_scale: 1.0,
        })
    }

    /// Every measure Lebesgue on the given rectangle.
    pub fn lebesgue(phi: YoungFunction, i: (f64, f64), j: (f64, f64), p1: f64, p2: f64, s1: f64) -> Result<Self> {
        let pm = ProductMeasure::new(WeightedMeasure1D::lebesgue(i.0, i.1)?, WeightedMeasure1D::lebesgue(j.0, j.1)?);
        Self::new(phi, pm.clone(), pm.clone(), pm, p1, p2, s1)
    }

    pub fn x_interval(&self) -> (f64, f64) {
        self.mu.first.interval()
    }

    pub fn y_interval(&self) -> (f64, f64) {
        self.mu.second.interval()
    }

    fn prefactor_exponent(&self) -> f64 {
        match self.statement_exponent {
            StatementExponent::Proof => 1.0 / self.s1,
            StatementExponent::Statement => self.s1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Hypotheses {
    pub invertible: bool,
    pub submultiplicative: SubmultiplicativeCheck,
    pub gamma: [ConvexityCheck; 2],
}

impl Hypotheses {
    pub fn holds(&self) -> bool {
        self.invertible && self.submultiplicative.holds && self.gamma.iter().all(|g| g.holds)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.invertible {
            out.push("Φ is not invertible".to_string());
        }
        if !self.submultiplicative.holds {
            out.push(format!(
                "Φ is not submultiplicative (ratio {:.6} at {:?})",
                self.submultiplicative.max_ratio, self.submultiplicative.worst_pair
            ));
        }
        for (i, g) in self.gamma.iter().enumerate() {
            if !g.holds {
                out.push(format!("Γ{} is not convex (excess {:.3e} at {:?})", i + 1, g.worst_excess, g.worst_pair));
            }
        }
        out
    }
}

fn hypothesis_grid(phi: &YoungFunction) -> Vec<f64> {
    sample_grid(1e-3, phi.domain_cap().sqrt().min(1e3), HYPOTHESIS_POINTS)
}

/// Submultiplicativity of `Φ` on the standard sample grid.
pub fn check_submultiplicativity(phi: &YoungFunction) -> Result<SubmultiplicativeCheck> {
    phi.check_submultiplicative(&hypothesis_grid(phi))
}

pub fn check_hypotheses(phi: &YoungFunction, p1: f64, p2: f64) -> Result<Hypotheses> {
    let gamma_grid = |p: f64| sample_grid(1e-3, phi.domain_cap().powf(p).min(1e3), HYPOTHESIS_POINTS);
    Ok(Hypotheses {
        invertible: phi.is_invertible(),
        submultiplicative: check_submultiplicativity(phi)?,
        gamma: [phi.check_gamma_convex(p1, &gamma_grid(p1))?, phi.check_gamma_convex(p2, &gamma_grid(p2))?],
    })
}

fn mul(c: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        c * norm
    }
}

/// Hypotheses and constants of the inequality, computed once per config.
#[derive(Debug, Clone)]
pub struct PoincareContext {
    pub cfg: ExperimentConfig,
    pub hypotheses: Hypotheses,
    pub c0: f64,
    pub k: [KConstantReport; 2],
    /// `C₁` (after `c1_scale`) and `C₂`.
    pub c: [f64; 2],
    /// `[Φ⁻¹(1/μ₁(I))]⁻¹`.
    pub unit1: f64,
}

impl PoincareContext {
    /// Fails with [`Error::HypothesisFailed`] when `Φ` does not satisfy the
    /// hypotheses of the inequality.
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let hypotheses = check_hypotheses(&cfg.phi, cfg.p1, cfg.p2)?;
        if !hypotheses.holds() {
            return Err(Error::HypothesisFailed(hypotheses.failures().join("; ")));
        }
        let (c1, k1) = poincare_constant(&cfg.phi, &cfg.mu.first, &cfg.nu.first, &cfg.w.first, cfg.p1)?;
        let (c2, k2) = poincare_constant(&cfg.phi, &cfg.mu.second, &cfg.nu.second, &cfg.w.second, cfg.p2)?;
        Ok(Self {
            c0: cfg.phi.c0()?,
            unit1: cfg.phi.unit_norm(cfg.mu.first.total_mass())?,
            cfg: cfg.clone(),
            hypotheses,
            k: [k1, k2],
            c: [c1 * cfg.c1_scale, c2],
        })
    }

    /// Prefactor of the second derivative term for a given power of `ν₁(I)`.
    fn prefactor(&self, exponent: f64) -> f64 {
        2.0 * self.unit1 / self.cfg.nu.first.total_mass().powf(exponent)
    }

    /// The inequality itself followed by the four links of the proof chain:
    /// triangle split into `S + T`, the bound on `S`, the bound on `T`, and
    /// the Hölder step.
    pub fn check(&self, f: &PiecewiseBilinear2D) -> Result<Vec<VerificationReport>> {
        let cfg = &self.cfg;
        let phi = &cfg.phi;
        let tol = cfg.tol_verify;
        let nu1 = cfg.nu.first.total_mass();
        let f_av = integrate_product(f, &cfg.nu)? / cfg.nu.total_mass();
        let lhs = gauge_norm_2d(phi, &cfg.mu, &f.map(|v| v - f_av))?;

        let d1 = f.partial(Axis::X);
        let d2 = f.partial(Axis::Y);
        let mixed = repeated_norm_report(
            &d1,
            Axis::X,
            Norm1D::Lp { measure: &cfg.w.first, p: cfg.p1 },
            Norm1D::Gauge { measure: &cfg.mu.second, phi },
        )?;
        let hat_s = repeated_norm_report(
            &d2,
            Axis::Y,
            Norm1D::Lp { measure: &cfg.w.second, p: cfg.p2 },
            Norm1D::Lp { measure: &cfg.nu.first, p: cfg.s1 },
        )?;
        let hat_1 = repeated_norm_report(
            &d2,
            Axis::Y,
            Norm1D::Lp { measure: &cfg.w.second, p: cfg.p2 },
            Norm1D::Lp { measure: &cfg.nu.first, p: 1.0 },
        )?;
        let [c1, c2] = self.c;
        let rhs = mul(c1, mixed.value) + mul(c2 * self.prefactor(cfg.prefactor_exponent()), hat_s.value);

        // S and T of the triangle split
        let average = integrate_axis(f, Axis::X, &cfg.nu.first)?.map(|v| v / nu1);
        let s = gauge_norm_2d(phi, &cfg.mu, &f.minus_y_function(&average)?)?;
        let t_fn = PiecewiseBilinear2D::from_y_function(f.x_knots().to_vec(), &average.map(|v| v - f_av))?;
        let t = gauge_norm_2d(phi, &cfg.mu, &t_fn)?;

        let diag = |r: VerificationReport| {
            r.with("S", s)
                .with("T", t)
                .with("C1", c1)
                .with("C2", c2)
                .with("K1", self.k[0].value)
                .with("K2", self.k[1].value)
                .with("mixed_norm", mixed.value)
                .with("hat_norm", hat_s.value)
                .with("hat_norm_1", hat_1.value)
                .with("f_av", f_av)
        };
        let mut main = diag(VerificationReport::compare("poincare", lhs, rhs, tol));
        for (label, rep) in [("mixed", &mixed), ("hat", &hat_s), ("hat_1", &hat_1)] {
            main.diagnostics.push((format!("{label}_subdivisions"), rep.subdivisions as f64));
            if !rep.converged {
                main.notes.push(format!("{label} norm did not settle under refinement (change {:e})", rep.last_change));
            }
        }
        if self.k.iter().any(KConstantReport::is_infinite) {
            main.notes.push("infinite Poincaré constant".into());
        }
        Ok(vec![
            main,
            diag(VerificationReport::compare("poincare.triangle", lhs, s + t, tol)),
            diag(VerificationReport::compare("poincare.s_bound", s, mul(c1, mixed.value), tol)),
            diag(VerificationReport::compare("poincare.t_bound", t, mul(c2 * self.prefactor(1.0), hat_1.value), tol)),
            diag(VerificationReport::compare(
                "poincare.holder",
                t,
                mul(c2 * self.prefactor(1.0 / cfg.s1), hat_s.value),
                tol,
            )),
        ])
    }
}

/// One-shot version of [`PoincareContext::check`].
pub fn check_poincare(cfg: &ExperimentConfig, f: &PiecewiseBilinear2D) -> Result<Vec<VerificationReport>> {
    PoincareContext::new(cfg)?.check(f)
}

fn require_submultiplicative(phi: &YoungFunction) -> Result<()> {
    let check = check_submultiplicativity(phi)?;
    if !check.holds {
        return Err(Error::HypothesisFailed(format!(
            "Φ is not submultiplicative (ratio {:.6} at {:?})",
            check.max_ratio, check.worst_pair
        )));
    }
    Ok(())
}

fn is_power(phi: &YoungFunction) -> bool {
    matches!(phi.kind(), YoungKind::Power { .. })
}

/// The product gauge norm is dominated by the iterated one.
pub fn check_iterated_bound(
    phi: &YoungFunction,
    mu: &ProductMeasure,
    f: &PiecewiseBilinear2D,
) -> Result<VerificationReport> {
    require_submultiplicative(phi)?;
    let lhs = gauge_norm_2d(phi, mu, f)?;
    let rhs = repeated_norm_report(
        f,
        Axis::X,
        Norm1D::Gauge { measure: &mu.first, phi },
        Norm1D::Gauge { measure: &mu.second, phi },
    )?;
    Ok(VerificationReport::compare("iterated_bound", lhs, rhs.value, LEMMA_TOL)
        .with("subdivisions", rhs.subdivisions as f64))
}

fn sandwich(
    name: &str,
    phi: &YoungFunction,
    other_mass: f64,
    g_norm: f64,
    full: f64,
) -> Result<Vec<VerificationReport>> {
    let lower = phi.inverse(other_mass)? * g_norm;
    let upper = phi.unit_norm(other_mass)? * g_norm;
    let mut out = vec![
        VerificationReport::compare(format!("{name}.lower"), lower, full, LEMMA_TOL),
        VerificationReport::compare(format!("{name}.upper"), full, upper, LEMMA_TOL),
    ];
    if is_power(phi) {
        out = out.into_iter().map(|r| r.require_equality(POWER_EQUALITY_TOL)).collect();
    }
    Ok(out.into_iter().map(|r| r.with("g_norm", g_norm).with("mass", other_mass)).collect())
}

/// `F(x₁, x₂) = g(x₂)`: `Φ⁻¹(μ₁(I))‖g‖ ≤ ‖F‖ ≤ [Φ⁻¹(1/μ₁(I))]⁻¹‖g‖`.
pub fn check_second_variable_sandwich(
    phi: &YoungFunction,
    mu: &ProductMeasure,
    g: &PiecewiseLinear1D,
) -> Result<Vec<VerificationReport>> {
    require_submultiplicative(phi)?;
    let (a, b) = mu.first.interval();
    let f = PiecewiseBilinear2D::from_y_function(vec![a, b], g)?;
    let full = gauge_norm_2d(phi, mu, &f)?;
    let g_norm = gauge_norm_1d(phi, &mu.second, g)?;
    sandwich("sandwich_second", phi, mu.first.total_mass(), g_norm, full)
}

/// `F(x₁, x₂) = g(x₁)`: `Φ⁻¹(μ₂(J))‖g‖ ≤ ‖F‖ ≤ [Φ⁻¹(1/μ₂(J))]⁻¹‖g‖`.
pub fn check_first_variable_sandwich(
    phi: &YoungFunction,
    mu: &ProductMeasure,
    g: &PiecewiseLinear1D,
) -> Result<Vec<VerificationReport>> {
    require_submultiplicative(phi)?;
    let (c, d) = mu.second.interval();
    let f = PiecewiseBilinear2D::from_x_function(g, vec![c, d])?;
    let full = gauge_norm_2d(phi, mu, &f)?;
    let g_norm = gauge_norm_1d(phi, &mu.first, g)?;
    sandwich("sandwich_first", phi, mu.second.total_mass(), g_norm, full)
}

/// `‖∫ F(t, ·) dν(t)‖ ≤ 2 ∫ ‖F(t, ·)‖ dν(t)`, norms in `L^Φ_μ` over the
/// second variable and the integral over the first.
pub fn check_minkowski(
    phi: &YoungFunction,
    mu: &WeightedMeasure1D,
    nu: &WeightedMeasure1D,
    f: &PiecewiseBilinear2D,
) -> Result<VerificationReport> {
    let lhs = gauge_norm_1d(phi, mu, &integrate_axis(f, Axis::X, nu)?)?;
    let integral = integrated_norm_report(f, Axis::Y, Norm1D::Gauge { measure: mu, phi }, nu)?;
    Ok(VerificationReport::compare("minkowski", lhs, 2.0 * integral.value, LEMMA_TOL)
        .with("integral", integral.value)
        .with("subdivisions", integral.subdivisions as f64))
}

/// Lemma-level checks for one test function: the iterated bound, both
/// one-variable sandwiches on edge slices of `f`, and Minkowski.
pub fn check_lemmas(cfg: &ExperimentConfig, f: &PiecewiseBilinear2D) -> Result<Vec<VerificationReport>> {
    let phi = &cfg.phi;
    let mut out = Vec::new();
    let hypothesis = check_submultiplicativity(phi)?;
    if hypothesis.holds {
        out.push(check_iterated_bound(phi, &cfg.mu, f)?);
        let g2 = f.slice_at_x(0, f.x_interval().0);
        let g1 = f.slice_at_y(0, f.y_interval().0);
        out.extend(check_second_variable_sandwich(phi, &cfg.mu, &g2)?);
        out.extend(check_first_variable_sandwich(phi, &cfg.mu, &g1)?);
    } else {
        let reason = format!("Φ is not submultiplicative (ratio {:.6})", hypothesis.max_ratio);
        for name in ["iterated_bound", "sandwich_second", "sandwich_first"] {
            out.push(VerificationReport::skipped(name, reason.clone()));
        }
    }
    out.push(check_minkowski(phi, &cfg.mu.second, &cfg.nu.first, f)?);
    Ok(out)
}

/// A test function with a label for reports.
#[derive(Debug, Clone)]
pub struct NamedFunction {
    pub name: String,
    pub grid: String,
    pub f: PiecewiseBilinear2D,
}

impl NamedFunction {
    pub fn new(name: impl Into<String>, f: PiecewiseBilinear2D) -> Self {
        let grid = format!("{}x{}", f.nx(), f.ny());
        Self { name: name.into(), grid, f }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Constant,
    Planes,
    Products,
    Ramps,
    Random,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Constant, Family::Planes, Family::Products, Family::Ramps, Family::Random];
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatterySpec {
    pub families: Vec<Family>,
    /// Cells per axis for the smooth families.
    pub grid: usize,
    pub random_count: usize,
    pub random_grid: usize,
    pub seed: u64,
}

impl Default for BatterySpec {
    fn default() -> Self {
        Self {
            families: vec![Family::Planes, Family::Products, Family::Ramps, Family::Random],
            grid: 4,
            random_count: 50,
            random_grid: 4,
            seed: 0,
        }
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect()
}

/// `clamp((t − c)/δ, 0, 1)` on `[lo, hi]`, exact with knots at `c` and `c + δ`.
pub fn ramp(lo: f64, hi: f64, c: f64, delta: f64) -> Result<PiecewiseLinear1D> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("ramp width must be positive, got {delta}")));
    }
    let snap = |t: f64| {
        if (t - hi).abs() <= 1e-12 * (hi - lo) {
            hi
        } else if (t - lo).abs() <= 1e-12 * (hi - lo) {
            lo
        } else {
            t
        }
    };
    let (start, end) = (snap(c), snap(c + delta));
    let at = |t: f64| ((t - start) / (end - start)).clamp(0.0, 1.0);
    let mut knots = vec![lo];
    let mut values = vec![at(lo)];
    for t in [start, end] {
        if t > lo && t < hi {
            knots.push(t);
            values.push(at(t));
        }
    }
    knots.push(hi);
    values.push(at(hi));
    PiecewiseLinear1D::from_nodes(knots, values)
}

type Named2D = (&'static str, fn(f64, f64) -> f64);

/// Deterministic test functions on `I × J` for a battery spec.
pub fn battery(i: (f64, f64), j: (f64, f64), spec: &BatterySpec) -> Result<Vec<NamedFunction>> {
    let (x, y) = (uniform(i.0, i.1, spec.grid), uniform(j.0, j.1, spec.grid));
    let u = |t: f64| (t - i.0) / (i.1 - i.0);
    let v = |t: f64| (t - j.0) / (j.1 - j.0);
    let mut out = Vec::new();
    for family in &spec.families {
        match family {
            Family::Constant => {
                out.push(NamedFunction::new(
                    "constant",
                    PiecewiseBilinear2D::from_fn(x.clone(), y.clone(), |_, _| 1.5)?,
                ));
            }
            Family::Planes => {
                let planes: [Named2D; 4] = [
                    ("plane_x", |a, _| a),
                    ("plane_y", |_, b| b),
                    ("plane_sum", |a, b| a + b),
                    ("plane_mixed", |a, b| 2.0 * a - b + 0.5),
                ];
                for (name, p) in planes {
                    out.push(NamedFunction::new(
                        name,
                        PiecewiseBilinear2D::from_fn(x.clone(), y.clone(), |s, t| p(u(s), v(t)))?,
                    ));
                }
            }
            Family::Products => {
                let products: [Named2D; 3] = [
                    ("product_xy", |a, b| a * b),
                    ("product_shifted", |a, b| (a - 0.5) * (b - 0.3) + a),
                    ("product_quadratic", |a, b| a * a * b - 0.5 * b),
                ];
                for (name, p) in products {
                    out.push(NamedFunction::new(
                        name,
                        PiecewiseBilinear2D::from_fn(x.clone(), y.clone(), |s, t| p(u(s), v(t)))?,
                    ));
                }
            }
            Family::Ramps => {
                for c in [0.25, 0.5, 0.75] {
                    let gx = ramp(i.0, i.1, i.0 + c * (i.1 - i.0), 0.1 * (i.1 - i.0))?;
                    let gy = ramp(j.0, j.1, j.0 + c * (j.1 - j.0), 0.1 * (j.1 - j.0))?;
                    out.push(NamedFunction::new(
                        format!("ramp_x_{c}"),
                        PiecewiseBilinear2D::from_x_function(&gx, y.clone())?,
                    ));
                    out.push(NamedFunction::new(
                        format!("ramp_y_{c}"),
                        PiecewiseBilinear2D::from_y_function(x.clone(), &gy)?,
                    ));
                }
            }
            Family::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                let (xr, yr) = (uniform(i.0, i.1, spec.random_grid), uniform(j.0, j.1, spec.random_grid));
                for k in 0..spec.random_count {
                    let values: Vec<Vec<f64>> =
                        xr.iter().map(|_| yr.iter().map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
                    out.push(NamedFunction::new(
                        format!("random_{k}"),
                        PiecewiseBilinear2D::from_nodes(xr.clone(), yr.clone(), &values)?,
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn prefix(mut reports: Vec<VerificationReport>, function: &str) -> Vec<VerificationReport> {
    for r in &mut reports {
        r.name = format!("{}:{}", r.name, function);
    }
    reports
}

/// A report tagged with the grid of the function it was computed on.
#[derive(Debug, Clone)]
pub struct BatteryRow {
    pub grid: String,
    pub report: VerificationReport,
}

/// Runs the inequality with its proof chain and the lemma checks on every
/// function, in parallel, returning rows in function order.
pub fn run_battery(cfg: &ExperimentConfig, functions: &[NamedFunction]) -> Result<Vec<BatteryRow>> {
    let ctx = match PoincareContext::new(cfg) {
        Ok(ctx) => Some(ctx),
        Err(Error::HypothesisFailed(reason)) => {
            return Ok(functions
                .iter()
                .map(|nf| BatteryRow {
                    grid: nf.grid.clone(),
                    report: VerificationReport::skipped(format!("poincare:{}", nf.name), reason.clone()),
                })
                .collect());
        }
        Err(e) => return Err(e),
    };
    let per_function = functions
        .par_iter()
        .map(|nf| {
            let mut reports = match &ctx {
                Some(ctx) => ctx.check(&nf.f)?,
                None => Vec::new(),
            };
            reports.extend(check_lemmas(cfg, &nf.f)?);
            Ok(prefix(reports, &nf.name)
                .into_iter()
                .map(|report| BatteryRow { grid: nf.grid.clone(), report })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_function.into_iter().flatten().collect())
}

/// One probe evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub c: f64,
    pub delta: f64,
    pub lhs: f64,
    /// Right-hand side without the constant `C_i`.
    pub norm: f64,
    pub raw_ratio: f64,
    /// `raw_ratio / C_i`; zero when `C_i = +∞`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct SharpnessReport {
    pub axis: Axis,
    pub constant: f64,
    pub k_tilde: KConstantReport,
    pub rows: Vec<ProbeRow>,
    pub sup_ratio: f64,
    pub sup_raw_ratio: f64,
    /// `(δ, max over c of raw_ratio)`, δ decreasing.
    pub growth: Vec<(f64, f64)>,
    pub growth_factors: Vec<f64>,
    pub monotone: bool,
}

/// Ramp family `g_c(t) = clamp((t − c)/δ, 0, 1)` along one axis, with `c`
/// sweeping the interval (endpoints included) and `δ` over `decades`
/// decades of the interval length.
pub fn sharpness_probe(
    cfg: &ExperimentConfig,
    axis: Axis,
    family_size: usize,
    decades: usize,
) -> Result<SharpnessReport> {
    if family_size < 2 {
        return Err(Error::InvalidParameter("sharpness probe needs at least two ramp offsets".into()));
    }
    let phi = &cfg.phi;
    let (i, j) = (cfg.x_interval(), cfg.y_interval());
    let (lo, hi, idx) = match axis {
        Axis::X => (i.0, i.1, 0),
        Axis::Y => (j.0, j.1, 1),
    };
    let (mu, nu, w, p) = match axis {
        Axis::X => (&cfg.mu.first, &cfg.nu.first, &cfg.w.first, cfg.p1),
        Axis::Y => (&cfg.mu.second, &cfg.nu.second, &cfg.w.second, cfg.p2),
    };
    let (constant, k_tilde) = if p == 1.0 {
        let (c, k) = poincare_constant(phi, mu, nu, w, p)?;
        (c, k)
    } else {
        let (k, kt) = kp_pair(phi, mu, nu, w, p)?;
        (phi.c0()? * k.value, kt)
    };
    let c = if idx == 0 { constant * cfg.c1_scale } else { constant };
    let pref =
        2.0 * phi.unit_norm(cfg.mu.first.total_mass())? / cfg.nu.first.total_mass().powf(cfg.prefactor_exponent());

    let mut params = Vec::new();
    for d in 1..=decades {
        let delta = (hi - lo) * 10f64.powi(-(d as i32));
        for k in 0..family_size {
            params.push((lo + (hi - lo - delta) * k as f64 / (family_size - 1) as f64, delta));
        }
    }
    let rows = params
        .par_iter()
        .map(|&(offset, delta)| {
            let g = ramp(lo, hi, offset, delta)?;
            let f = match axis {
                Axis::X => PiecewiseBilinear2D::from_x_function(&g, vec![j.0, j.1])?,
                Axis::Y => PiecewiseBilinear2D::from_y_function(vec![i.0, i.1], &g)?,
            };
            let f_av = integrate_product(&f, &cfg.nu)? / cfg.nu.total_mass();
            let lhs = gauge_norm_2d(phi, &cfg.mu, &f.map(|v| v - f_av))?;
            let norm = match axis {
                Axis::X => mixed_norm_p_phi(&cfg.w.first, cfg.p1, &cfg.mu.second, phi, &f.partial(Axis::X))?,
                Axis::Y => pref * mixed_norm_hat(&cfg.nu.first, cfg.s1, &cfg.w.second, cfg.p2, &f.partial(Axis::Y))?,
            };
            let raw_ratio = if norm == 0.0 { 0.0 } else { lhs / norm };
            let ratio = if c.is_infinite() { 0.0 } else { raw_ratio / c };
            Ok(ProbeRow { c: offset, delta, lhs, norm, raw_ratio, ratio })
        })
        .collect::<Result<Vec<_>>>()?;

    let growth: Vec<(f64, f64)> = rows
        .chunks(family_size)
        .map(|chunk| (chunk[0].delta, chunk.iter().map(|r| r.raw_ratio).fold(0.0, f64::max)))
        .collect();
    let growth_factors: Vec<f64> = growth.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let monotone = growth_factors.iter().all(|&g| g > 1.0);
    Ok(SharpnessReport {
        axis,
        constant: c,
        sup_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        sup_raw_ratio: rows.iter().map(|r| r.raw_ratio).fold(0.0, f64::max),
        k_tilde,
        rows,
        growth,
        growth_factors,
        monotone,
    })
}

/// Density kinds used by the standard configuration grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityKind {
    Constant,
    PowerLaw(f64),
    Bump,
}

impl DensityKind {
    pub const STANDARD: [DensityKind; 4] =
        [DensityKind::Constant, DensityKind::PowerLaw(0.5), DensityKind::PowerLaw(1.0), DensityKind::Bump];

    pub fn density(&self, a: f64, b: f64) -> Density {
        match *self {
            DensityKind::Constant => Density::Constant(1.0),
            DensityKind::PowerLaw(alpha) => Density::PowerLaw { alpha, anchor: Anchor::Left },
            DensityKind::Bump => {
                let t = (0..=4).map(|k| a + (b - a) * k as f64 / 4.0).collect();
                Density::Tabulated { t, w: vec![0.2, 0.6, 1.5, 0.6, 0.2] }
            }
        }
    }

    pub fn measure(&self, a: f64, b: f64) -> Result<WeightedMeasure1D> {
        WeightedMeasure1D::new(a, b, self.density(a, b))
    }

    pub fn label(&self) -> String {
        match self {
            DensityKind::Constant => "constant".into(),
            DensityKind::PowerLaw(alpha) => format!("power_law_{alpha}"),
            DensityKind::Bump => "bump".into(),
        }
    }
}

/// `Φ ∈ {Power(2), Power(3), Power(4)}` × standard densities (all six
/// measures alike) × `p₁ = p₂ ∈ {1, 2}`, `s₁ = 2`, on `[0, 1]²`.
pub fn standard_configs() -> Result<Vec<(String, ExperimentConfig)>> {
    let mut out = Vec::new();
    for q in [2.0, 3.0, 4.0] {
        for kind in DensityKind::STANDARD {
            for p in [1.0, 2.0] {
                let m = kind.measure(0.0, 1.0)?;
                let pm = ProductMeasure::new(m.clone(), m);
                let cfg = ExperimentConfig::new(YoungFunction::power(q)?, pm.clone(), pm.clone(), pm, p, p, 2.0)?;
                out.push((format!("power{q}_{}_p{p}", kind.label()), cfg));
            }
        }
    }
    Ok(out)
}
