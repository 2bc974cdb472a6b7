//! Symbols `a(x, ξ)` on `𝕋 × ℤ`, admissible cutoffs and the paradifferential
//! quantization `T_a`.

mod calculus;
mod constructors;
mod quantize;

use std::io::Write;

pub use calculus::{adjoint_symbol, compose_symbols, cutoff_filtered, poisson_bracket, symbol_seminorm};
pub use constructors::{dispersion_symbol, gauge_symbol, ww_symbols, WaterWaveSymbols};
pub use quantize::{extract_symbol, quantize, quantize_adjoint, LinearOperatorProbe, ParaOperator};

use crate::error::{Error, Result};
use crate::spectral::{forward_in_place, inverse_in_place, theta, PeriodicGrid, SpectralFunction, C64};

/// Samples `a(x_j, ξ_k)` stored row by row, one row per lattice frequency in
/// storage order, together with the x-Fourier coefficients `â(ζ, ξ_k)` of each row.
#[derive(Debug, Clone)]
pub struct Symbol {
    grid: PeriodicGrid,
    values: Vec<C64>,
    hat: Vec<C64>,
    order: f64,
    regularity: f64,
    is_real_valued: bool,
    preserves_real: bool,
    xi_derivative: Option<Vec<C64>>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl Symbol {
    /// Samples `f(x, ξ)` on the grid. A non-finite value on the `ξ = 0`
    /// row is replaced by 0; anywhere else it is an error.
    pub fn from_fn(grid: PeriodicGrid, order: f64, regularity: f64, f: impl Fn(f64, i64) -> C64) -> Result<Self> {
        let n = grid.n_points();
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(n * n);
        for k in 0..n {
            let xi = grid.freq(k);
            for &x in &nodes {
                values.push(sanitize(f(x, xi), xi)?);
            }
        }
        Self::from_values(grid, values, order, regularity)
    }

    /// Symbol depending on `ξ` only.
    pub fn x_independent(grid: PeriodicGrid, order: f64, f: impl Fn(i64) -> C64) -> Result<Self> {
        Self::from_fn(grid, order, f64::INFINITY, |_, xi| f(xi))
    }

    /// Row-major samples, `values[k·N + j] = a(x_j, ξ_k)`.
    pub fn from_values(grid: PeriodicGrid, values: Vec<C64>, order: f64, regularity: f64) -> Result<Self> {
        let n = grid.n_points();
        if values.len() != n * n {
            return Err(Error::GridMismatch(n * n, values.len()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(grid.freq(i / n)));
            }
        }
        let mut hat = values.clone();
        for row in hat.chunks_mut(n) {
            forward_in_place(row);
        }
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = 1e-14 * scale.max(1e-300);
        let is_real_valued = values.iter().all(|v| v.im.abs() <= tol);
        let preserves_real = (1..n / 2).all(|k| {
            let a = &values[k * n..(k + 1) * n];
            let b = &values[(n - k) * n..(n - k + 1) * n];
            a.iter().zip(b).all(|(p, q)| (p - q.conj()).norm() <= tol)
        }) && values[..n].iter().all(|v| v.im.abs() <= tol);
        Ok(Self {
            grid,
            values,
            hat,
            order,
            regularity,
            is_real_valued,
            preserves_real,
            xi_derivative: None,
        })
    }

    /// Attaches the continuous `∂_ξ a`, used where formulas differentiate a closed form.
    pub fn with_xi_derivative(mut self, f: impl Fn(f64, i64) -> C64) -> Result<Self> {
        let n = self.grid.n_points();
        let nodes = self.grid.nodes();
        let mut d = Vec::with_capacity(n * n);
        for k in 0..n {
            let xi = self.grid.freq(k);
            for &x in &nodes {
                d.push(sanitize(f(x, xi), xi)?);
            }
        }
        self.xi_derivative = Some(d);
        Ok(self)
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn regularity(&self) -> f64 {
        self.regularity
    }

    pub fn with_order(mut self, order: f64, regularity: f64) -> Self {
        self.order = order;
        self.regularity = regularity;
        self
    }

    pub fn is_real_valued(&self) -> bool {
        self.is_real_valued
    }

    /// Whether `a(x, −ξ) = conj a(x, ξ)`, so that `T_a` maps real functions to real functions.
    pub fn preserves_real(&self) -> bool {
        self.preserves_real
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, j: usize, xi: i64) -> C64 {
        let k = self.grid.index(xi).expect("frequency on the lattice");
        self.values[k * self.grid.n_points() + j]
    }

    /// Samples of `a(·, ξ)`.
    pub fn row(&self, xi: i64) -> &[C64] {
        let n = self.grid.n_points();
        let k = self.grid.index(xi).expect("frequency on the lattice");
        &self.values[k * n..(k + 1) * n]
    }

    /// x-Fourier coefficients of `a(·, ξ)` in storage order.
    pub fn hat_row(&self, xi: i64) -> &[C64] {
        let n = self.grid.n_points();
        let k = self.grid.index(xi).expect("frequency on the lattice");
        &self.hat[k * n..(k + 1) * n]
    }

    /// `â(ζ, ξ)`.
    pub fn hat(&self, zeta: i64, xi: i64) -> C64 {
        match self.grid.index(zeta) {
            Some(z) => self.hat_row(xi)[z],
            None => zero(),
        }
    }

    /// `a(·, ξ)` as a function of `x`.
    pub fn row_function(&self, xi: i64) -> SpectralFunction {
        let coeffs = self.hat_row(xi).to_vec();
        let real = self.row(xi).iter().all(|v| v.im == 0.0);
        if real {
            SpectralFunction::from_coeffs_real(self.grid, coeffs).expect("row length matches grid")
        } else {
            SpectralFunction::from_coeffs(self.grid, coeffs).expect("row length matches grid")
        }
    }

    pub fn xi_derivative(&self) -> Option<Symbol> {
        let d = self.xi_derivative.as_ref()?;
        Symbol::from_values(self.grid, d.clone(), self.order - 1.0, self.regularity).ok()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when every row is constant in `x` up to `tol` relative to the symbol size.
    pub fn is_x_independent(&self, tol: f64) -> bool {
        let n = self.grid.n_points();
        let scale = self.max_abs().max(1e-300);
        self.hat
            .chunks(n)
            .all(|row| row[1..].iter().all(|c| c.norm() <= tol * scale))
    }

    /// Pointwise map; the ξ-derivative is dropped.
    pub fn map(&self, order: f64, regularity: f64, f: impl Fn(C64) -> C64) -> Result<Symbol> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Symbol::from_values(self.grid, values, order, regularity)
    }

    /// Pointwise combination of two symbols on the same grid.
    pub fn zip_with(&self, other: &Symbol, order: f64, regularity: f64, f: impl Fn(C64, C64) -> C64) -> Result<Symbol> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Symbol::from_values(self.grid, values, order, regularity)
    }

    pub fn scale(&self, c: C64) -> Symbol {
        let mut out = self
            .map(self.order, self.regularity, |v| v * c)
            .expect("scaling keeps values finite");
        out.xi_derivative = self.xi_derivative.as_ref().map(|d| d.iter().map(|v| v * c).collect());
        out
    }

    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        let mut out = self.zip_with(
            other,
            self.order.max(other.order),
            self.regularity.min(other.regularity),
            |a, b| a + b,
        )?;
        if let (Some(d1), Some(d2)) = (&self.xi_derivative, &other.xi_derivative) {
            out.xi_derivative = Some(d1.iter().zip(d2).map(|(a, b)| a + b).collect());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Symbol) -> Result<Symbol> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn conj(&self) -> Symbol {
        let mut out = self
            .map(self.order, self.regularity, |v| v.conj())
            .expect("conjugation keeps values finite");
        out.xi_derivative = self
            .xi_derivative
            .as_ref()
            .map(|d| d.iter().map(|v| v.conj()).collect());
        out
    }

    /// `∂_x^k a`, spectral in each row.
    pub fn dx(&self, k: u32) -> Symbol {
        let n = self.grid.n_points();
        let factors: Vec<C64> = (0..n)
            .map(|z| C64::new(0.0, self.grid.freq(z) as f64).powu(k))
            .collect();
        let mut values = self.hat.clone();
        for row in values.chunks_mut(n) {
            for (c, f) in row.iter_mut().zip(&factors) {
                *c *= f;
            }
            inverse_in_place(row);
        }
        let mut out = Symbol::from_values(self.grid, values, self.order, (self.regularity - k as f64).max(0.0))
            .expect("derivatives of finite rows are finite");
        if let Some(d) = &self.xi_derivative {
            let mut dd = d.clone();
            for row in dd.chunks_mut(n) {
                forward_in_place(row);
                for (c, f) in row.iter_mut().zip(&factors) {
                    *c *= f;
                }
                inverse_in_place(row);
            }
            out.xi_derivative = Some(dd);
        }
        out
    }

    /// Forward difference `a(x, ξ+1) − a(x, ξ)`; the top row has no forward neighbour and is set to 0.
    pub fn delta_xi(&self) -> Symbol {
        let n = self.grid.n_points();
        let mut values = vec![zero(); n * n];
        for k in 0..n {
            let xi = self.grid.freq(k);
            if let Some(k1) = self.grid.index(xi + 1) {
                for j in 0..n {
                    values[k * n + j] = self.values[k1 * n + j] - self.values[k * n + j];
                }
            }
        }
        Symbol::from_values(self.grid, values, self.order - 1.0, self.regularity)
            .expect("differences of finite values are finite")
    }

    /// Writes the table `x_index, xi, re, im`.
    pub fn write_table<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x_index", "xi", "re", "im"])?;
        let n = self.grid.n_points();
        for xi in self.grid.min_freq()..=self.grid.max_freq() {
            let row = self.row(xi);
            for (j, v) in row.iter().enumerate().take(n) {
                wtr.write_record([
                    j.to_string(),
                    xi.to_string(),
                    format!("{:e}", v.re),
                    format!("{:e}", v.im),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub(crate) fn check_grid(&self, other: &Symbol) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n_points(), other.grid.n_points()));
        }
        Ok(())
    }
}

fn sanitize(v: C64, xi: i64) -> Result<C64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else if xi == 0 {
        Ok(zero())
    } else {
        Err(Error::NonFinite(xi))
    }
}

/// Admissible cutoff `ψ^{B,b}(ζ, η) = θ(|η| − B|ζ| − b)`: zero when
/// `|η| < B|ζ| + b` and one when `|η| > B|ζ| + b + 1`.
#[derive(Debug, Clone)]
pub struct CutoffFunction {
    big_b: f64,
    small_b: f64,
    half: usize,
    table: Vec<f64>,
}

impl CutoffFunction {
    pub const DEFAULT_B: f64 = 4.0;
    pub const DEFAULT_SHIFT: f64 = 1.0;

    pub fn new(big_b: f64, small_b: f64, grid: PeriodicGrid) -> Result<Self> {
        if !(big_b > 1.0) || !(small_b > 0.0) {
            return Err(Error::BadParams(format!(
                "cutoff needs B > 1 and b > 0, got B = {big_b}, b = {small_b}"
            )));
        }
        let half = grid.n_points() / 2;
        let mut table = Vec::with_capacity((half + 1) * (half + 1));
        for z in 0..=half {
            for e in 0..=half {
                table.push(theta(e as f64 - big_b * z as f64 - small_b));
            }
        }
        Ok(Self {
            big_b,
            small_b,
            half,
            table,
        })
    }

    pub fn default_for(grid: PeriodicGrid) -> Self {
        Self::new(Self::DEFAULT_B, Self::DEFAULT_SHIFT, grid).expect("default parameters are admissible")
    }

    pub fn big_b(&self) -> f64 {
        self.big_b
    }

    pub fn small_b(&self) -> f64 {
        self.small_b
    }

    pub fn eval(&self, zeta: i64, eta: i64) -> f64 {
        let (z, e) = (zeta.unsigned_abs() as usize, eta.unsigned_abs() as usize);
        if z <= self.half && e <= self.half {
            self.table[z * (self.half + 1) + e]
        } else {
            theta(e as f64 - self.big_b * z as f64 - self.small_b)
        }
    }

    /// Largest `|ζ|` with `ψ(ζ, η) > 0`.
    pub fn max_zeta(&self, eta: i64) -> Option<i64> {
        let e = eta.abs() as f64;
        if e <= self.small_b {
            return None;
        }
        let mut z = ((e - self.small_b) / self.big_b).floor() as i64;
        while z >= 0 && self.eval(z, eta) <= 0.0 {
            z -= 1;
        }
        (z >= 0).then_some(z)
    }
}
