//! Adaptive Gauss–Kronrod quadrature (G7/K15 panels) and a geometric
//! refinement ladder for integrands that blow up at an interval endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Growth factor across three ladder levels that declares divergence.
pub const DIV_FACTOR: f64 = 10.0;
const LADDER_MAX_LEVELS: usize = 60;
// panel ratio at the bottom of the ladder treated as non-summable
const TAIL_RATIO_LIMIT: f64 = 0.99;
const MAX_PANELS: usize = 4000;
const RESOLUTION: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const QUAD: Tolerance = Tolerance { rel: 1e-9, abs: 1e-12 };
    pub const TIGHT: Tolerance = Tolerance { rel: 1e-12, abs: 1e-300 };

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::QUAD
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// One G7/K15 panel: Kronrod estimate and `|K15 - G7|`.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive integration of `f` over `[a, b]`, bisecting the panel
/// with the largest error estimate until the summed estimate meets `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, panels: 0, converged: true };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&mut f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a: lo, b: hi, value: v, error: e });
    let mut total = v;
    let mut error = e;
    let mut converged = true;
    while error > tol.target(total) {
        if heap.len() >= MAX_PANELS || !total.is_finite() {
            converged = false;
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            converged = false;
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // resum in left-to-right order so the result does not carry the
    // cancellation of the running updates
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    QuadResult { value: sign * value, error, panels: panels.len(), converged }
}

/// Integrates over consecutive breakpoints, each piece adaptively.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> QuadResult {
    let mut out = QuadResult { value: 0.0, error: 0.0, panels: 0, converged: true };
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate(&mut f, w[0], w[1], tol);
        out.value += r.value;
        out.error += r.error;
        out.panels += r.panels;
        out.converged &= r.converged;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderResult {
    /// Integral value, `+∞` when divergence was declared.
    pub value: f64,
    /// Running sums after each ladder level, in evaluation order.
    pub history: Vec<f64>,
    pub divergent: bool,
}

/// Integral of a nonnegative `f` over `[lo, hi]` where `f` may be singular
/// at `lo` and/or `hi`.
///
/// Near a singular end the interval is cut into decade panels
/// `[e + L·10^{-k-1}, e + L·10^{-k}]`. Divergence is declared when the
/// running sum grows by more than [`DIV_FACTOR`] across three levels, or
/// when the panel contributions stop decreasing before the ladder bottoms out.
pub fn integrate_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    singular_lo: bool,
    singular_hi: bool,
    tol: Tolerance,
) -> LadderResult {
    if hi <= lo {
        return LadderResult { value: 0.0, history: vec![], divergent: false };
    }
    match (singular_lo, singular_hi) {
        (false, false) => {
            let r = integrate(&mut f, lo, hi, tol);
            LadderResult { value: r.value, history: vec![r.value], divergent: false }
        }
        (true, false) => ladder(&mut f, lo, hi, tol),
        (false, true) => ladder(&mut f, hi, lo, tol),
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            let left = ladder(&mut f, lo, mid, tol);
            let right = ladder(&mut f, hi, mid, tol);
            let mut history = left.history;
            history.extend(right.history);
            LadderResult { value: left.value + right.value, divergent: left.divergent || right.divergent, history }
        }
    }
}

// `end` is singular, `other` regular; works for either orientation.
fn ladder<F: FnMut(f64) -> f64>(f: &mut F, end: f64, other: f64, tol: Tolerance) -> LadderResult {
    let len = (other - end).abs();
    let dir = (other - end).signum();
    let at = |delta: f64| end + dir * delta;
    let piece = |f: &mut F, d_near: f64, d_far: f64| {
        let (x0, x1) = (at(d_near), at(d_far));
        integrate(&mut *f, x0.min(x1), x0.max(x1), tol).value
    };

    let mut delta = len / 10.0;
    let mut sum = piece(f, delta, len);
    let mut history = vec![sum];
    let mut prev_panel = f64::NAN;
    let diverged = |history: Vec<f64>| LadderResult { value: f64::INFINITY, history, divergent: true };

    for level in 1..=LADDER_MAX_LEVELS {
        let next = delta / 10.0;
        // panel edges must stay well resolved relative to |end|
        if next < RESOLUTION * end.abs() || at(next) == end {
            break;
        }
        let panel = piece(f, next, delta);
        sum += panel;
        history.push(sum);
        if !sum.is_finite() {
            return diverged(history);
        }
        if level >= 3 {
            let base = history[history.len() - 4];
            if base != 0.0 && sum.abs() > DIV_FACTOR * base.abs() {
                return diverged(history);
            }
        }
        if level >= 2 && panel.abs() <= prev_panel.abs() && panel.abs() <= tol.rel * sum.abs() {
            let r = if prev_panel != 0.0 { panel / prev_panel } else { 0.0 };
            return LadderResult { value: sum + panel * r / (1.0 - r), history, divergent: false };
        }
        if panel == 0.0 && prev_panel == 0.0 {
            return LadderResult { value: sum, history, divergent: false };
        }
        prev_panel = panel;
        delta = next;
    }

    // ladder bottomed out (or hit floating-point resolution) without the
    // relative stopping rule; extrapolate a geometric tail if contributions shrink
    let n = history.len();
    if n >= 3 {
        let p_last = history[n - 1] - history[n - 2];
        let p_prev = history[n - 2] - history[n - 3];
        if p_prev != 0.0 && p_last.abs() >= TAIL_RATIO_LIMIT * p_prev.abs() {
            return diverged(history);
        }
        if p_prev != 0.0 {
            let r = p_last / p_prev;
            return LadderResult { value: sum + p_last * r / (1.0 - r), history, divergent: false };
        }
    }
    LadderResult { value: sum, history, divergent: false }
}
