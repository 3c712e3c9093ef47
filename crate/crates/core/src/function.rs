//! Piecewise-linear (1-D) and piecewise-bilinear (2-D) functions.
//!
//! Each cell carries its own end/corner values, so the types also represent
//! the discontinuous piecewise fields that arise as partial derivatives of a
//! continuous Lipschitz test function.

use crate::error::{Error, Result};

fn check_knots(knots: &[f64], what: &str) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::InvalidFunction(format!("{what}: need at least two knots")));
    }
    if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidFunction(format!("{what}: knots must be finite and strictly increasing")));
    }
    Ok(())
}

fn locate(knots: &[f64], x: f64) -> usize {
    let n = knots.len() - 1;
    (knots.partition_point(|&k| k <= x).max(1) - 1).min(n - 1)
}

/// Piecewise-linear function; cell `i` spans `[knots[i], knots[i+1]]` and is
/// linear from `cells[i].0` to `cells[i].1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear1D {
    knots: Vec<f64>,
    cells: Vec<(f64, f64)>,
}

/// Continuous piecewise-linear test function on an interval.
pub type TestFunction1D = PiecewiseLinear1D;

impl PiecewiseLinear1D {
    /// Continuous interpolant of node values.
    pub fn from_nodes(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots, "1-D function")?;
        if values.len() != knots.len() {
            return Err(Error::InvalidFunction(format!(
                "1-D function: {} values for {} knots",
                values.len(),
                knots.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("1-D function: values must be finite".into()));
        }
        let cells = values.windows(2).map(|w| (w[0], w[1])).collect();
        Ok(Self { knots, cells })
    }

    pub fn from_cells(knots: Vec<f64>, cells: Vec<(f64, f64)>) -> Result<Self> {
        check_knots(&knots, "1-D function")?;
        if cells.len() + 1 != knots.len() {
            return Err(Error::InvalidFunction("1-D function: need one value pair per cell".into()));
        }
        if cells.iter().any(|c| !c.0.is_finite() || !c.1.is_finite()) {
            return Err(Error::InvalidFunction("1-D function: values must be finite".into()));
        }
        Ok(Self { knots, cells })
    }

    pub fn from_fn(knots: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = knots.iter().map(|&x| f(x)).collect();
        Self::from_nodes(knots, values)
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_nodes(vec![a, b], vec![c, c])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cells(&self) -> &[(f64, f64)] {
        &self.cells
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = locate(&self.knots, x);
        self.eval_in_cell(i, x)
    }

    /// Value of cell `i`'s linear piece at `x` (extrapolated if outside).
    pub fn eval_in_cell(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (v0, v1) = self.cells[i];
        let s = (x - x0) / (x1 - x0);
        v0 + s * (v1 - v0)
    }

    pub fn max_abs(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.0.abs()).max(c.1.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|c| c.0 == 0.0 && c.1 == 0.0)
    }

    pub fn is_continuous(&self) -> bool {
        self.cells.windows(2).all(|w| w[0].1 == w[1].0)
    }

    /// Piecewise-constant derivative.
    pub fn derivative(&self) -> Self {
        let cells = self
            .cells
            .iter()
            .zip(self.knots.windows(2))
            .map(|(c, k)| {
                let s = (c.1 - c.0) / (k[1] - k[0]);
                (s, s)
            })
            .collect();
        Self { knots: self.knots.clone(), cells }
    }

    /// Largest slope magnitude; `+∞` for a discontinuous function.
    pub fn lipschitz_bound(&self) -> f64 {
        if !self.is_continuous() {
            return f64::INFINITY;
        }
        self.derivative().max_abs()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { knots: self.knots.clone(), cells: self.cells.iter().map(|c| (f(c.0), f(c.1))).collect() }
    }

    /// Same function on a grid with every cell split into `s` pieces.
    pub fn refined(&self, s: usize) -> Self {
        let s = s.max(1);
        let mut knots = Vec::with_capacity(self.cells.len() * s + 1);
        let mut cells = Vec::with_capacity(self.cells.len() * s);
        for (i, &(v0, v1)) in self.cells.iter().enumerate() {
            let (x0, x1) = (self.knots[i], self.knots[i + 1]);
            for k in 0..s {
                let (r0, r1) = (k as f64 / s as f64, (k + 1) as f64 / s as f64);
                knots.push(x0 + r0 * (x1 - x0));
                cells.push((v0 + r0 * (v1 - v0), v0 + r1 * (v1 - v0)));
            }
        }
        knots.push(self.knots[self.knots.len() - 1]);
        Self { knots, cells }
    }

    /// The function carried rigidly by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        Self { knots: self.knots.iter().map(|k| k + shift).collect(), cells: self.cells.clone() }
    }
}

/// Piecewise-bilinear function on a tensor grid. Cell `(i, j)` spans
/// `[x_i, x_{i+1}] × [y_j, y_{j+1}]` with corner values
/// `[f(x_i,y_j), f(x_{i+1},y_j), f(x_i,y_{j+1}), f(x_{i+1},y_{j+1})]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseBilinear2D {
    x: Vec<f64>,
    y: Vec<f64>,
    cells: Vec<[f64; 4]>,
}

/// Continuous piecewise-bilinear (Lipschitz) test function on `I × J`.
pub type TestFunction2D = PiecewiseBilinear2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl PiecewiseBilinear2D {
    /// Continuous interpolant; `values[i][j] = f(x_i, y_j)`.
    pub fn from_nodes(x: Vec<f64>, y: Vec<f64>, values: &[Vec<f64>]) -> Result<Self> {
        check_knots(&x, "2-D function (x)")?;
        check_knots(&y, "2-D function (y)")?;
        if values.len() != x.len() || values.iter().any(|row| row.len() != y.len()) {
            return Err(Error::InvalidFunction(format!(
                "2-D function: values must be a {} x {} array",
                x.len(),
                y.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("2-D function: values must be finite".into()));
        }
        let (nx, ny) = (x.len() - 1, y.len() - 1);
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push([values[i][j], values[i + 1][j], values[i][j + 1], values[i + 1][j + 1]]);
            }
        }
        Ok(Self { x, y, cells })
    }

    pub fn from_fn(x: Vec<f64>, y: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values: Vec<Vec<f64>> = x.iter().map(|&xi| y.iter().map(|&yj| f(xi, yj)).collect()).collect();
        Self::from_nodes(x, y, &values)
    }

    /// `F(x, y) = g(y)` on the x-grid `x`.
    pub fn from_y_function(x: Vec<f64>, g: &PiecewiseLinear1D) -> Result<Self> {
        check_knots(&x, "2-D function (x)")?;
        let nx = x.len() - 1;
        let mut cells = Vec::with_capacity(nx * g.cells.len());
        for &(g0, g1) in &g.cells {
            for _ in 0..nx {
                cells.push([g0, g0, g1, g1]);
            }
        }
        Ok(Self { x, y: g.knots.clone(), cells })
    }

    /// `F(x, y) = g(x)` on the y-grid `y`.
    pub fn from_x_function(g: &PiecewiseLinear1D, y: Vec<f64>) -> Result<Self> {
        check_knots(&y, "2-D function (y)")?;
        let ny = y.len() - 1;
        let mut cells = Vec::with_capacity(ny * g.cells.len());
        for _ in 0..ny {
            for &(g0, g1) in &g.cells {
                cells.push([g0, g1, g0, g1]);
            }
        }
        Ok(Self { x: g.knots.clone(), y, cells })
    }

    pub fn x_knots(&self) -> &[f64] {
        &self.x
    }

    pub fn y_knots(&self) -> &[f64] {
        &self.y
    }

    pub fn nx(&self) -> usize {
        self.x.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y.len() - 1
    }

    pub fn x_interval(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn y_interval(&self) -> (f64, f64) {
        (self.y[0], self.y[self.y.len() - 1])
    }

    pub fn cell(&self, i: usize, j: usize) -> [f64; 4] {
        self.cells[j * self.nx() + i]
    }

    pub fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        (self.x[i], self.x[i + 1], self.y[j], self.y[j + 1])
    }

    /// Cell `(i, j)`'s bilinear piece at `(x, y)`.
    pub fn eval_in_cell(&self, i: usize, j: usize, x: f64, y: f64) -> f64 {
        let [v00, v10, v01, v11] = self.cell(i, j);
        let s = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        let t = (y - self.y[j]) / (self.y[j + 1] - self.y[j]);
        let bottom = v00 + s * (v10 - v00);
        let top = v01 + s * (v11 - v01);
        bottom + t * (top - bottom)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_in_cell(locate(&self.x, x), locate(&self.y, y), x, y)
    }

    pub fn max_abs(&self) -> f64 {
        self.cells.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().flatten().all(|&v| v == 0.0)
    }

    pub fn is_continuous(&self) -> bool {
        let (nx, ny) = (self.nx(), self.ny());
        for j in 0..ny {
            for i in 0..nx {
                let c = self.cell(i, j);
                if i + 1 < nx {
                    let r = self.cell(i + 1, j);
                    if c[1] != r[0] || c[3] != r[2] {
                        return false;
                    }
                }
                if j + 1 < ny {
                    let u = self.cell(i, j + 1);
                    if c[2] != u[0] || c[3] != u[1] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Restriction of cell row `j` to the line `y`: a function of `x`.
    pub fn slice_at_y(&self, j: usize, y: f64) -> PiecewiseLinear1D {
        let t = (y - self.y[j]) / (self.y[j + 1] - self.y[j]);
        let cells = (0..self.nx())
            .map(|i| {
                let [v00, v10, v01, v11] = self.cell(i, j);
                (v00 + t * (v01 - v00), v10 + t * (v11 - v10))
            })
            .collect();
        PiecewiseLinear1D { knots: self.x.clone(), cells }
    }

    /// Restriction of cell column `i` to the line `x`: a function of `y`.
    pub fn slice_at_x(&self, i: usize, x: f64) -> PiecewiseLinear1D {
        let s = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        let cells = (0..self.ny())
            .map(|j| {
                let [v00, v10, v01, v11] = self.cell(i, j);
                (v00 + s * (v10 - v00), v01 + s * (v11 - v01))
            })
            .collect();
        PiecewiseLinear1D { knots: self.y.clone(), cells }
    }

    /// `∂F/∂x`: per cell constant in `x`, linear in `y`.
    pub fn partial_x(&self) -> Self {
        let cells = (0..self.ny())
            .flat_map(|j| (0..self.nx()).map(move |i| (i, j)))
            .map(|(i, j)| {
                let [v00, v10, v01, v11] = self.cell(i, j);
                let h = self.x[i + 1] - self.x[i];
                let (b, t) = ((v10 - v00) / h, (v11 - v01) / h);
                [b, b, t, t]
            })
            .collect();
        Self { x: self.x.clone(), y: self.y.clone(), cells }
    }

    /// `∂F/∂y`: per cell linear in `x`, constant in `y`.
    pub fn partial_y(&self) -> Self {
        let cells = (0..self.ny())
            .flat_map(|j| (0..self.nx()).map(move |i| (i, j)))
            .map(|(i, j)| {
                let [v00, v10, v01, v11] = self.cell(i, j);
                let h = self.y[j + 1] - self.y[j];
                let (l, r) = ((v01 - v00) / h, (v11 - v10) / h);
                [l, r, l, r]
            })
            .collect();
        Self { x: self.x.clone(), y: self.y.clone(), cells }
    }

    pub fn partial(&self, axis: Axis) -> Self {
        match axis {
            Axis::X => self.partial_x(),
            Axis::Y => self.partial_y(),
        }
    }

    /// Maximum over cells of the gradient magnitude of the bilinear piece,
    /// attained at a cell corner; `+∞` for a discontinuous field.
    pub fn lipschitz_bound(&self) -> f64 {
        if !self.is_continuous() {
            return f64::INFINITY;
        }
        let mut best = 0.0_f64;
        for j in 0..self.ny() {
            for i in 0..self.nx() {
                let [v00, v10, v01, v11] = self.cell(i, j);
                let hx = self.x[i + 1] - self.x[i];
                let hy = self.y[j + 1] - self.y[j];
                let dx = [(v10 - v00) / hx, (v11 - v01) / hx];
                let dy = [(v01 - v00) / hy, (v11 - v10) / hy];
                for a in dx {
                    for b in dy {
                        best = best.max(a.hypot(b));
                    }
                }
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.clone(),
            cells: self.cells.iter().map(|c| [f(c[0]), f(c[1]), f(c[2]), f(c[3])]).collect(),
        }
    }

    /// Pointwise `self - g(y)` for a 1-D function on the same y-grid cells.
    pub fn minus_y_function(&self, g: &PiecewiseLinear1D) -> Result<Self> {
        if g.knots != self.y {
            return Err(Error::InvalidFunction("y-function must share the y-grid".into()));
        }
        let mut out = self.clone();
        for j in 0..self.ny() {
            let (g0, g1) = g.cells[j];
            for i in 0..self.nx() {
                let c = &mut out.cells[j * self.nx() + i];
                c[0] -= g0;
                c[1] -= g0;
                c[2] -= g1;
                c[3] -= g1;
            }
        }
        Ok(out)
    }

    /// Same function with each cell split into `sx × sy` sub-cells.
    pub fn refined(&self, sx: usize, sy: usize) -> Self {
        let (sx, sy) = (sx.max(1), sy.max(1));
        let split = |k: &[f64], s: usize| {
            let mut out = Vec::with_capacity((k.len() - 1) * s + 1);
            for w in k.windows(2) {
                for r in 0..s {
                    out.push(w[0] + (w[1] - w[0]) * r as f64 / s as f64);
                }
            }
            out.push(k[k.len() - 1]);
            out
        };
        let x = split(&self.x, sx);
        let y = split(&self.y, sy);
        let nx = x.len() - 1;
        let mut cells = Vec::with_capacity(nx * (y.len() - 1));
        for jj in 0..y.len() - 1 {
            for ii in 0..nx {
                let (i, j) = (ii / sx, jj / sy);
                let c = |x: f64, y: f64| self.eval_in_cell(i, j, x, y);
                cells.push([c(x[ii], y[jj]), c(x[ii + 1], y[jj]), c(x[ii], y[jj + 1]), c(x[ii + 1], y[jj + 1])]);
            }
        }
        Self { x, y, cells }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x.iter().map(|k| k + dx).collect(),
            y: self.y.iter().map(|k| k + dy).collect(),
            cells: self.cells.clone(),
        }
    }

    /// Swap the roles of `x` and `y`.
    pub fn transposed(&self) -> Self {
        let (nx, ny) = (self.nx(), self.ny());
        let mut cells = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let [v00, v10, v01, v11] = self.cell(i, j);
                cells.push([v00, v01, v10, v11]);
            }
        }
        Self { x: self.y.clone(), y: self.x.clone(), cells }
    }
}
