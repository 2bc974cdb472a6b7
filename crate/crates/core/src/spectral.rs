//! Periodic grids, Fourier coefficients, Littlewood–Paley blocks, norms and
//! Fourier multipliers on the torus.
//!
//! Convention: `u(x) = Σ_ξ û(ξ) e^{iξx}` with `û(ξ) = (1/2π)∫u e^{−iξx} dx`,
//! so `û(0)` is the mean of `u`. Coefficients are stored in FFT order:
//! storage index `k` holds frequency `k` for `k < N/2` and `k − N` otherwise.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `|û(0)|` below which a function counts as zero-mean.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Samples to coefficients, in place, including the `1/N` normalization.
pub(crate) fn forward_in_place(buf: &mut [C64]) {
    let n = buf.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    fft.process(buf);
    let inv = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= inv;
    }
}

/// Coefficients to samples, in place.
pub(crate) fn inverse_in_place(buf: &mut [C64]) {
    let n = buf.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(buf);
}

/// Smoothstep: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `e^{−1/t}/(e^{−1/t}+e^{−1/(1−t)})` between.
pub fn theta(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Plateau bump `ω(x) = θ(2(1 − |x̃|))` with `x̃` the representative of `x` in `(−π, π]`:
/// `ω = 1` on `|x̃| ≤ 1/2` and `ω = 0` on `|x̃| ≥ 1`.
pub fn plateau_bump(x: f64) -> f64 {
    compact_bump((x + PI).rem_euclid(2.0 * PI) - PI)
}

/// `θ(2(1 − |y|))` on the line, without wrapping: supported in `|y| < 1`.
pub fn compact_bump(y: f64) -> f64 {
    theta(2.0 * (1.0 - y.abs()))
}

/// Uniform grid `x_j = 2πj/N` with frequency lattice `{−N/2, …, N/2−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::BadGrid(n_points));
        }
        Ok(Self { n: n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn node(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Frequency held at storage index `k`.
    pub fn freq(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Storage index of frequency `xi`, if it is on the lattice.
    pub fn index(&self, xi: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if xi < -h || xi >= h {
            None
        } else if xi >= 0 {
            Some(xi as usize)
        } else {
            Some((xi + self.n as i64) as usize)
        }
    }

    pub fn min_freq(&self) -> i64 {
        -((self.n / 2) as i64)
    }

    pub fn max_freq(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    /// Index of the unpaired mode `−N/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest Littlewood–Paley index `K`, the least with `2^K ≥ N/2`.
    pub fn max_block(&self) -> usize {
        let half = self.n / 2;
        let mut k = 0;
        while (1usize << k) < half {
            k += 1;
        }
        k
    }
}

/// Fourier coefficients of a function on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: PeriodicGrid,
    coeffs: Vec<C64>,
    is_real: bool,
}

impl SpectralFunction {
    pub fn zero(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            coeffs: vec![C64::new(0.0, 0.0); grid.n],
            is_real: true,
        }
    }

    /// Complex-valued function from coefficients in storage order.
    pub fn from_coeffs(grid: PeriodicGrid, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.n {
            return Err(Error::GridMismatch(grid.n, coeffs.len()));
        }
        Ok(Self {
            grid,
            coeffs,
            is_real: false,
        })
    }

    /// Real-valued function from coefficients; Hermitian symmetry is imposed
    /// by averaging each `±ξ` pair and the `−N/2` mode is dropped.
    pub fn from_coeffs_real(grid: PeriodicGrid, coeffs: Vec<C64>) -> Result<Self> {
        let mut f = Self::from_coeffs(grid, coeffs)?;
        f.enforce_real();
        Ok(f)
    }

    /// Function with the given `(ξ, coefficient)` modes; off-lattice modes are ignored.
    pub fn from_modes(grid: PeriodicGrid, modes: &[(i64, C64)]) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); grid.n];
        for &(xi, c) in modes {
            if let Some(k) = grid.index(xi) {
                coeffs[k] += c;
            }
        }
        Self {
            grid,
            coeffs,
            is_real: false,
        }
    }

    /// `e^{ikx}`.
    pub fn mode(grid: PeriodicGrid, k: i64) -> Self {
        Self::from_modes(grid, &[(k, C64::new(1.0, 0.0))])
    }

    /// `cos(kx)`.
    pub fn cos_mode(grid: PeriodicGrid, k: i64) -> Self {
        let h = C64::new(0.5, 0.0);
        let mut f = Self::from_modes(grid, &[(k, h), (-k, h)]);
        f.enforce_real();
        f
    }

    /// `sin(kx)`.
    pub fn sin_mode(grid: PeriodicGrid, k: i64) -> Self {
        let mut f = Self::from_modes(grid, &[(k, C64::new(0.0, -0.5)), (-k, C64::new(0.0, 0.5))]);
        f.enforce_real();
        f
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        let mut f = Self::zero(grid);
        f.coeffs[0] = C64::new(c, 0.0);
        f
    }

    pub fn from_real_samples(grid: PeriodicGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::GridMismatch(grid.n, samples.len()));
        }
        let mut buf: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
        forward_in_place(&mut buf);
        Self::from_coeffs_real(grid, buf)
    }

    pub fn from_complex_samples(grid: PeriodicGrid, samples: &[C64]) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::GridMismatch(grid.n, samples.len()));
        }
        let mut buf = samples.to_vec();
        forward_in_place(&mut buf);
        Self::from_coeffs(grid, buf)
    }

    /// Real function sampled from a closure at the grid nodes.
    pub fn from_real_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self::from_real_samples(grid, &samples).expect("sample count matches grid")
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Coefficient at frequency `xi`; zero off the lattice.
    pub fn coeff(&self, xi: i64) -> C64 {
        self.grid.index(xi).map_or(C64::new(0.0, 0.0), |k| self.coeffs[k])
    }

    pub fn mean(&self) -> C64 {
        self.coeffs[0]
    }

    /// Largest `|ξ|` carrying a nonzero coefficient, or `None` for the zero function.
    pub fn band_limit(&self) -> Option<i64> {
        (0..self.grid.n)
            .filter(|&k| self.coeffs[k] != C64::new(0.0, 0.0))
            .map(|k| self.grid.freq(k).abs())
            .max()
    }

    /// Imposes Hermitian symmetry and zeroes the `−N/2` mode, then flags the result real.
    pub fn enforce_real(&mut self) {
        let n = self.grid.n;
        self.coeffs[0].im = 0.0;
        self.coeffs[n / 2] = C64::new(0.0, 0.0);
        for k in 1..n / 2 {
            let avg = (self.coeffs[k] + self.coeffs[n - k].conj()) * 0.5;
            self.coeffs[k] = avg;
            self.coeffs[n - k] = avg.conj();
        }
        self.is_real = true;
    }

    /// Spatial samples at the grid nodes.
    pub fn samples(&self) -> Vec<C64> {
        let mut buf = self.coeffs.clone();
        inverse_in_place(&mut buf);
        buf
    }

    /// Real parts of the spatial samples.
    pub fn real_samples(&self) -> Vec<f64> {
        self.samples().into_iter().map(|c| c.re).collect()
    }

    /// Direct series evaluation at an arbitrary point.
    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != C64::new(0.0, 0.0))
            .map(|(k, c)| c * C64::from_polar(1.0, self.grid.freq(k) as f64 * x))
            .sum()
    }

    /// Direct series evaluation at many points.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<C64> {
        let modes: Vec<(f64, C64)> = (0..self.grid.n)
            .filter(|&k| self.coeffs[k] != C64::new(0.0, 0.0))
            .map(|k| (self.grid.freq(k) as f64, self.coeffs[k]))
            .collect();
        xs.iter()
            .map(|&x| modes.iter().map(|&(xi, c)| c * C64::from_polar(1.0, xi * x)).sum())
            .collect()
    }

    pub fn scale(&self, c: C64) -> Self {
        let is_real = self.is_real && c.im == 0.0;
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
            is_real,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
            is_real: self.is_real,
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + c * b).collect();
        let is_real = self.is_real && other.is_real && c.im == 0.0;
        Ok(Self {
            grid: self.grid,
            coeffs,
            is_real,
        })
    }

    /// Pointwise product through the grid samples (aliasing is not removed).
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let a = self.samples();
        let b = other.samples();
        let prod: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut f = Self::from_complex_samples(self.grid, &prod)?;
        if self.is_real && other.is_real {
            f.enforce_real();
        }
        Ok(f)
    }

    /// `∂_x^k` on the lattice.
    pub fn derivative(&self, k: u32) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            *c *= C64::new(0.0, self.grid.freq(idx) as f64).powu(k);
        }
        if self.is_real {
            out.enforce_real();
        }
        out
    }

    /// Normalized L² norm `(⨍|u|²)^{1/2} = (Σ|û|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum of `|u|` over the grid nodes.
    pub fn max_abs(&self) -> f64 {
        self.samples().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n, other.grid.n));
        }
        Ok(())
    }
}

impl Add for &SpectralFunction {
    type Output = SpectralFunction;
    fn add(self, rhs: Self) -> SpectralFunction {
        self.axpy(C64::new(1.0, 0.0), rhs).expect("operands share a grid")
    }
}

impl Sub for &SpectralFunction {
    type Output = SpectralFunction;
    fn sub(self, rhs: Self) -> SpectralFunction {
        self.axpy(C64::new(-1.0, 0.0), rhs).expect("operands share a grid")
    }
}

impl Neg for &SpectralFunction {
    type Output = SpectralFunction;
    fn neg(self) -> SpectralFunction {
        self.scale_real(-1.0)
    }
}

/// `P_{≤k}(ξ) = P_0(2^{−k}ξ)` with `P_0(ξ) = θ(2 − |ξ|)`; zero for negative `k`.
pub fn lp_low(k: i64, xi: f64) -> f64 {
    if k < 0 {
        0.0
    } else {
        theta(2.0 - (xi / 2f64.powi(k as i32)).abs())
    }
}

/// `P_k = P_{≤k} − P_{≤k−1}`.
pub fn lp_weight(k: i64, xi: f64) -> f64 {
    lp_low(k, xi) - lp_low(k - 1, xi)
}

/// Open frequency ring outside which `P_k` vanishes.
pub fn lp_ring(k: usize) -> (f64, f64) {
    if k == 0 {
        (0.0, 2.0)
    } else {
        (2f64.powi(k as i32 - 1), 2f64.powi(k as i32 + 1))
    }
}

/// Blocks `u_0, …, u_K` of a Littlewood–Paley decomposition.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub blocks: Vec<SpectralFunction>,
    pub rings: Vec<(f64, f64)>,
}

impl DyadicDecomposition {
    pub fn reconstruct(&self) -> SpectralFunction {
        let mut acc = SpectralFunction::zero(self.blocks[0].grid());
        for b in &self.blocks {
            acc = &acc + b;
        }
        acc
    }
}

/// Since `2^K ≥ N/2`, `P_{≤K} ≡ 1` on the lattice and the blocks sum to `u`.
pub fn lp_decompose(u: &SpectralFunction) -> DyadicDecomposition {
    let grid = u.grid();
    let kmax = grid.max_block();
    let mut blocks = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut b = u.clone();
        for (idx, c) in b.coeffs.iter_mut().enumerate() {
            *c *= lp_weight(k as i64, grid.freq(idx) as f64);
        }
        blocks.push(b);
    }
    DyadicDecomposition {
        blocks,
        rings: (0..=kmax).map(lp_ring).collect(),
    }
}

/// Lattice Sobolev norm `(Σ_ξ (1+ξ²)^s |û(ξ)|²)^{1/2}`.
pub fn sobolev_norm(u: &SpectralFunction, s: f64) -> f64 {
    let grid = u.grid();
    u.coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let xi = grid.freq(k) as f64;
            (1.0 + xi * xi).powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Zygmund norm `sup_q 2^{qr} max_j |u_q(x_j)|`, the sup norm taken on grid nodes.
/// Empty blocks contribute nothing, so an infinite `r` is allowed for functions of finite band.
pub fn zygmund_norm(u: &SpectralFunction, r: f64) -> f64 {
    lp_decompose(u)
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.coeffs.iter().any(|c| *c != C64::new(0.0, 0.0)))
        .map(|(q, b)| {
            if q == 0 {
                b.max_abs()
            } else {
                2f64.powf(q as f64 * r) * b.max_abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Applies the Fourier multiplier `m(ξ)`.
pub fn multiplier(u: &SpectralFunction, m: impl Fn(i64) -> C64) -> Result<SpectralFunction> {
    let grid = u.grid();
    let n = grid.n_points();
    let table: Vec<C64> = (0..n).map(|k| m(grid.freq(k))).collect();
    for (k, v) in table.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite(grid.freq(k)));
        }
    }
    let coeffs: Vec<C64> = u.coeffs.iter().zip(&table).map(|(c, v)| c * v).collect();
    let mut out = SpectralFunction::from_coeffs(grid, coeffs)?;
    if u.is_real() {
        let scale = table.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let symmetric = (1..n / 2).all(|k| (table[k] - table[n - k].conj()).norm() <= 1e-14 * scale)
            && table[0].im.abs() <= 1e-14 * scale;
        if symmetric {
            out.enforce_real();
        }
    }
    Ok(out)
}

/// `|ξ|^a`, zero at `ξ = 0`.
pub fn abs_pow(a: f64) -> impl Fn(i64) -> C64 {
    move |xi| {
        if xi == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new((xi.abs() as f64).powf(a), 0.0)
        }
    }
}

/// Dispersion symbol `iξ|ξ|^{α−1}` of `∂_x|D|^{α−1}`.
pub fn dispersion(alpha: f64) -> impl Fn(i64) -> C64 {
    move |xi| {
        if xi == 0 {
            C64::new(0.0, 0.0)
        } else {
            let x = xi as f64;
            C64::new(0.0, x * x.abs().powf(alpha - 1.0))
        }
    }
}

/// Zero-mean primitive: `V̂(0) = 0`, `V̂(ξ) = û(ξ)/(iξ)`.
pub fn antiderivative_zero_mean(u: &SpectralFunction) -> Result<SpectralFunction> {
    let m = u.mean().norm();
    if m > ZERO_MEAN_TOL {
        return Err(Error::NonZeroMean(m));
    }
    multiplier(u, |xi| {
        if xi == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, -1.0 / xi as f64)
        }
    })
}

/// Gaussian damping `e^{−ε²ξ²/2}`.
pub fn gaussian_mollify(u: &SpectralFunction, eps: f64) -> Result<SpectralFunction> {
    if !(eps > 0.0) {
        return Err(Error::BadParams(format!("mollifier width must be positive, got {eps}")));
    }
    multiplier(u, |xi| {
        let x = xi as f64;
        C64::new((-0.5 * eps * eps * x * x).exp(), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(PeriodicGrid::new(6).is_err());
        assert!(PeriodicGrid::new(9).is_err());
        assert!(PeriodicGrid::new(8).is_ok());
    }

    #[test]
    fn index_and_freq_are_inverse() {
        let g = grid(16);
        for k in 0..16 {
            assert_eq!(g.index(g.freq(k)), Some(k));
        }
        assert_eq!(g.index(8), None);
        assert_eq!(g.index(-8), Some(8));
    }

    #[test]
    fn mean_is_zero_coefficient() {
        let g = grid(32);
        let u = SpectralFunction::from_real_fn(g, |x| 2.5 + x.cos());
        assert!((u.mean().re - 2.5).abs() < 1e-14);
    }

    #[test]
    fn real_samples_drop_nyquist() {
        let g = grid(8);
        let alt: Vec<f64> = (0..8).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let u = SpectralFunction::from_real_samples(g, &alt).unwrap();
        assert_eq!(u.coeff(-4), C64::new(0.0, 0.0));
    }

    #[test]
    fn single_mode_lp_blocks() {
        let g = grid(64);
        let u = SpectralFunction::mode(g, 3);
        let d = lp_decompose(&u);
        for (k, b) in d.blocks.iter().enumerate() {
            let lo = if k == 0 { 0.0 } else { 2f64.powi(k as i32 - 1) };
            let hi = 2f64.powi(k as i32 + 1);
            let inside = lo <= 3.0 && 3.0 <= hi && k >= 1;
            assert_eq!(b.l2_norm() > 0.0, inside, "block {k}");
        }
        assert!((&d.reconstruct() - &u).l2_norm() < 1e-15);
    }

    #[test]
    fn constant_lives_in_block_zero() {
        let g = grid(64);
        let d = lp_decompose(&SpectralFunction::constant(g, 1.0));
        assert!((d.blocks[0].coeff(0).re - 1.0).abs() < 1e-15);
        assert!(d.blocks[1..].iter().all(|b| b.l2_norm() == 0.0));
    }

    #[test]
    fn top_block_covers_nyquist_half() {
        let g = grid(64);
        let u = SpectralFunction::from_modes(g, &[(-32, C64::new(1.0, 0.0)), (31, C64::new(1.0, 0.0))]);
        assert!((&lp_decompose(&u).reconstruct() - &u).l2_norm() < 1e-15);
    }

    #[test]
    fn sobolev_single_mode_and_constant() {
        let g = grid(64);
        let s = 1.7;
        let u = SpectralFunction::mode(g, 5);
        assert!((sobolev_norm(&u, s) - 26f64.powf(s / 2.0)).abs() < 1e-12);
        assert!((sobolev_norm(&SpectralFunction::constant(g, -3.0), s) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn sobolev_two_mode_oracle() {
        let g = grid(128);
        let u = SpectralFunction::from_real_fn(g, |x| (4.0 * x).cos() + (32.0 * x).cos());
        // each cosine contributes two modes of weight 1/4
        let oracle = (0.5 * 17f64.powi(2) + 0.5 * 1025f64.powi(2)).sqrt();
        assert!((sobolev_norm(&u, 2.0) - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn sobolev_zero_is_l2() {
        let g = grid(64);
        let u = SpectralFunction::from_real_fn(g, |x| (x.sin() * 3.0).exp());
        let direct = (u.real_samples().iter().map(|v| v * v).sum::<f64>() / 64.0).sqrt();
        assert!((sobolev_norm(&u, 0.0) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn zygmund_single_mode_and_constant() {
        let g = grid(128);
        let r = 0.75;
        // 24 lies only in block 4 (ring (8, 32)) and block 5 (ring (16, 64))
        let u = SpectralFunction::mode(g, 24);
        let d = lp_decompose(&u);
        let oracle = (0..d.blocks.len())
            .map(|q| 2f64.powf(q as f64 * r) * lp_weight(q as i64, 24.0).abs())
            .fold(0.0, f64::max);
        assert!((zygmund_norm(&u, r) - oracle).abs() < 1e-12);
        assert!((zygmund_norm(&SpectralFunction::constant(g, 2.0), r) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zygmund_dyadic_sum_is_bounded() {
        let g = grid(256);
        for &r in &[0.5, 1.0, 2.0] {
            let modes: Vec<(i64, C64)> = (1..=5)
                .map(|k| (1i64 << k, C64::new(2f64.powf(-(k as f64) * r), 0.0)))
                .collect();
            let u = SpectralFunction::from_modes(g, &modes);
            let d = lp_decompose(&u);
            let per_block = d
                .blocks
                .iter()
                .enumerate()
                .map(|(q, b)| {
                    let m = b.eval_many(&g.nodes()).iter().map(|c| c.norm()).fold(0.0, f64::max);
                    2f64.powf(q as f64 * r) * m
                })
                .fold(0.0, f64::max);
            let z = zygmund_norm(&u, r);
            assert!((z - per_block).abs() < 1e-12);
            assert!(z <= 2.0);
        }
    }

    #[test]
    fn abs_pow_and_constant() {
        let g = grid(32);
        let u = SpectralFunction::mode(g, -6);
        let v = multiplier(&u, abs_pow(0.3)).unwrap();
        assert!((v.coeff(-6).re - 6f64.powf(0.3)).abs() < 1e-14);
        let c = multiplier(&SpectralFunction::constant(g, 4.0), abs_pow(1.2)).unwrap();
        assert_eq!(c.l2_norm(), 0.0);
    }

    #[test]
    fn dispersion_on_cosine() {
        let g = grid(64);
        let k = 7.0_f64;
        let u = SpectralFunction::cos_mode(g, 7);
        let v = multiplier(&u, dispersion(1.5)).unwrap();
        assert!(v.is_real());
        let oracle = SpectralFunction::sin_mode(g, 7).scale_real(-k * k.sqrt());
        assert!((&v - &oracle).l2_norm() < 1e-13);
    }

    #[test]
    fn multiplier_rejects_non_finite() {
        let g = grid(16);
        let u = SpectralFunction::mode(g, 1);
        let r = multiplier(&u, |xi| C64::new((xi as f64).powf(-1.0), 0.0));
        assert_eq!(r, Err(Error::NonFinite(0)));
    }

    #[test]
    fn antiderivative_termwise() {
        let g = grid(64);
        let u = SpectralFunction::from_real_fn(g, |x| x.cos() + 3.0 * (5.0 * x).cos());
        let v = antiderivative_zero_mean(&u).unwrap();
        let oracle = SpectralFunction::from_real_fn(g, |x| x.sin() + 0.6 * (5.0 * x).sin());
        assert!((&v - &oracle).l2_norm() < 1e-14);
        assert!(antiderivative_zero_mean(&SpectralFunction::zero(g)).unwrap().l2_norm() == 0.0);
        assert!(matches!(
            antiderivative_zero_mean(&SpectralFunction::constant(g, 1.0)),
            Err(Error::NonZeroMean(_))
        ));
    }

    #[test]
    fn mollifier_single_mode_and_limit() {
        let g = grid(64);
        let eps = 0.05;
        let v = gaussian_mollify(&SpectralFunction::mode(g, 9), eps).unwrap();
        assert!((v.coeff(9).re - (-0.5 * eps * eps * 81.0f64).exp()).abs() < 1e-15);
        for &e in &[1e-2, 1e-3, 1e-4] {
            let c = gaussian_mollify(&SpectralFunction::mode(g, 9), e).unwrap().coeff(9).re;
            assert!((1.0 - c).abs() <= 0.5 * e * e * 81.0);
        }
        assert!(gaussian_mollify(&SpectralFunction::mode(g, 1), 0.0).is_err());
    }

    #[test]
    fn mollifier_derivative_growth() {
        let eps = 0.1;
        for k in 1..=4 {
            let lattice_max = (-256i64..256)
                .map(|xi| {
                    let x = xi as f64;
                    x.abs().powi(k) * (-0.5 * eps * eps * x * x).exp()
                })
                .fold(0.0, f64::max);
            let continuous = (k as f64 / (std::f64::consts::E * eps * eps)).powf(k as f64 / 2.0);
            assert!((lattice_max - continuous).abs() <= 0.05 * continuous, "k = {k}");
        }
    }
}
