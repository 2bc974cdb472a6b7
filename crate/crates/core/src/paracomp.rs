//! Paracomposition `χ*u` by circle diffeomorphisms, the composition
//! paralinearization residual and the change of variables built from a surface slope.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{
    antiderivative_zero_mean, lp_decompose, lp_low, sobolev_norm, PeriodicGrid, SpectralFunction, C64,
};
use crate::symbol::{CutoffFunction, ParaOperator, Symbol};

/// Circle diffeomorphism `χ(x) = x + χ̃(x)` with `χ̃` periodic, sampled on a grid.
#[derive(Debug, Clone)]
pub struct DiffeoMap {
    grid: PeriodicGrid,
    periodic: SpectralFunction,
    chi: Vec<f64>,
    dchi: Vec<f64>,
    window: usize,
    /// Affine renormalization applied to reach winding one; 1 unless built from a slope.
    scale: f64,
}

impl DiffeoMap {
    /// From samples of `χ` and `∂_xχ`. Window `N = ⌊log₂ max(sup χ′, sup 1/χ′)⌋ + 1`, plus one safety unit.
    pub fn new(grid: PeriodicGrid, chi: Vec<f64>, dchi: Vec<f64>) -> Result<Self> {
        let n = grid.n_points();
        if chi.len() != n || dchi.len() != n {
            return Err(Error::GridMismatch(n, chi.len().min(dchi.len())));
        }
        let min = dchi.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NotDiffeo(min));
        }
        let max = dchi.iter().cloned().fold(0.0, f64::max);
        let bound = max.max(1.0 / min);
        let window = bound.log2().floor().max(0.0) as usize + 2;
        let tilde: Vec<f64> = chi.iter().zip(grid.nodes()).map(|(c, x)| c - x).collect();
        let periodic = SpectralFunction::from_real_samples(grid, &tilde)?;
        Ok(Self {
            grid,
            periodic,
            chi,
            dchi,
            window,
            scale: 1.0,
        })
    }

    pub fn from_fns(grid: PeriodicGrid, chi: impl Fn(f64) -> f64, dchi: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = grid.nodes();
        Self::new(
            grid,
            nodes.iter().map(|&x| chi(x)).collect(),
            nodes.iter().map(|&x| dchi(x)).collect(),
        )
    }

    pub fn identity(grid: PeriodicGrid) -> Self {
        Self::new(grid, grid.nodes(), vec![1.0; grid.n_points()]).expect("identity is a diffeomorphism")
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn dchi(&self) -> &[f64] {
        &self.dchi
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `χ̃ = χ − x`.
    pub fn periodic_part(&self) -> &SpectralFunction {
        &self.periodic
    }

    /// `χ` at arbitrary points through the series of `χ̃`.
    pub fn eval(&self, xs: &[f64]) -> Vec<f64> {
        self.periodic
            .eval_many(xs)
            .iter()
            .zip(xs)
            .map(|(p, x)| x + p.re)
            .collect()
    }

    fn eval_derivative(&self, xs: &[f64]) -> Vec<f64> {
        self.periodic
            .derivative(1)
            .eval_many(xs)
            .iter()
            .map(|d| 1.0 + d.re)
            .collect()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &DiffeoMap) -> Result<DiffeoMap> {
        if self.grid != inner.grid {
            return Err(Error::GridMismatch(self.grid.n_points(), inner.grid.n_points()));
        }
        let chi = self.eval(&inner.chi);
        let d_outer = self.eval_derivative(&inner.chi);
        let dchi = d_outer.iter().zip(&inner.dchi).map(|(a, b)| a * b).collect();
        DiffeoMap::new(self.grid, chi, dchi)
    }

    /// Writes `x, chi, dchi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "chi", "dchi"])?;
        for ((x, c), d) in self.grid.nodes().iter().zip(&self.chi).zip(&self.dchi) {
            wtr.write_record([format!("{x:e}"), format!("{c:e}"), format!("{d:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `u ∘ χ` by direct evaluation of the series of `u` at `χ(x_j)`.
pub fn compose(chi: &DiffeoMap, u: &SpectralFunction) -> Result<SpectralFunction> {
    if chi.grid != u.grid() {
        return Err(Error::GridMismatch(chi.grid.n_points(), u.grid().n_points()));
    }
    let s = u.eval_many(&chi.chi);
    let mut out = SpectralFunction::from_complex_samples(u.grid(), &s)?;
    if u.is_real() {
        out.enforce_real();
    }
    Ok(out)
}

/// Contribution `Σ_{|l−k|≤N} P_l(D)(u_k∘χ)` of each nonzero block `u_k`, paired with `k`.
pub fn paracompose_contributions(chi: &DiffeoMap, u: &SpectralFunction) -> Result<Vec<(usize, SpectralFunction)>> {
    if chi.grid != u.grid() {
        return Err(Error::GridMismatch(chi.grid.n_points(), u.grid().n_points()));
    }
    let grid = u.grid();
    let w = chi.window as i64;
    let blocks = lp_decompose(u).blocks;
    blocks
        .into_par_iter()
        .enumerate()
        .filter(|(_, b)| b.coeffs().iter().any(|c| *c != C64::new(0.0, 0.0)))
        .map(|(k, b)| {
            let composed = compose(chi, &b)?;
            let kk = k as i64;
            let c: Vec<C64> = composed
                .coeffs()
                .iter()
                .enumerate()
                .map(|(idx, v)| {
                    let xi = grid.freq(idx) as f64;
                    v * (lp_low(kk + w, xi) - lp_low(kk - w - 1, xi))
                })
                .collect();
            let mut f = SpectralFunction::from_coeffs(grid, c)?;
            if u.is_real() {
                f.enforce_real();
            }
            Ok((k, f))
        })
        .collect()
}

/// `χ*u = Σ_k Σ_{|l−k|≤N} P_l(D)(u_k∘χ)`. Blocks are summed in increasing `k`.
pub fn paracompose(chi: &DiffeoMap, u: &SpectralFunction) -> Result<SpectralFunction> {
    let mut acc = SpectralFunction::zero(u.grid());
    if !u.is_real() {
        acc = SpectralFunction::from_coeffs(u.grid(), acc.into_coeffs())?;
    }
    for (_, c) in paracompose_contributions(chi, u)? {
        acc = &acc + &c;
    }
    Ok(acc)
}

/// `T_a u` for a function `a(x)`.
pub fn paraproduct(a: &SpectralFunction, u: &SpectralFunction, cutoff: &CutoffFunction) -> Result<SpectralFunction> {
    let grid = a.grid();
    let row = a.samples();
    let n = grid.n_points();
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n {
        values.extend_from_slice(&row);
    }
    let sym = Symbol::from_values(grid, values, 0.0, 0.0)?;
    ParaOperator::new(&sym, cutoff).apply(u)
}

/// Sobolev norms of `r = u∘χ − χ*u − T_{(∂_xu)∘χ} χ̃` and of `u∘χ − χ*u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionResidual {
    pub s: f64,
    pub residual: f64,
    pub residual_smooth: f64,
    pub without_paraproduct: f64,
    pub u_norm: f64,
}

impl CompositionResidual {
    /// `‖r‖_{H^s} / ‖u‖_{H^s}`.
    pub fn ratio(&self) -> f64 {
        self.residual / self.u_norm
    }

    /// `‖u∘χ − χ*u‖_{H^s} / ‖u‖_{H^s}`.
    pub fn ratio_without_paraproduct(&self) -> f64 {
        self.without_paraproduct / self.u_norm
    }
}

/// Norms at `H^s`, with the residual also measured in `H^{s + smooth}`.
pub fn paralin_composition_residual(
    chi: &DiffeoMap,
    u: &SpectralFunction,
    cutoff: &CutoffFunction,
    s: f64,
    smooth: f64,
) -> Result<CompositionResidual> {
    let direct = compose(chi, u)?;
    let para = paracompose(chi, u)?;
    let du_chi = compose(chi, &u.derivative(1))?;
    let t = paraproduct(&du_chi, chi.periodic_part(), cutoff)?;
    let diff = &direct - &para;
    let r = &diff - &t;
    Ok(CompositionResidual {
        s,
        residual: sobolev_norm(&r, s),
        residual_smooth: sobolev_norm(&r, s + smooth),
        without_paraproduct: sobolev_norm(&diff, s),
        u_norm: sobolev_norm(u, s),
    })
}

/// `χ(x) = (∫_0^x (1+η_x²)^{−1/2} dy)/c + shift` with `c = ⨍(1+η_x²)^{−1/2}`, so that `χ` winds once;
/// `c` is stored as the map's scale.
pub fn build_chi(eta_x: &SpectralFunction, shift: f64) -> Result<DiffeoMap> {
    let grid = eta_x.grid();
    let raw: Vec<f64> = eta_x.real_samples().iter().map(|e| (1.0 + e * e).powf(-0.5)).collect();
    let f = SpectralFunction::from_real_samples(grid, &raw)?;
    let c = f.mean().re;
    let mut coeffs = f.coeffs().to_vec();
    coeffs[0] = C64::new(0.0, 0.0);
    let fluct = SpectralFunction::from_coeffs_real(grid, coeffs)?;
    let big_f = antiderivative_zero_mean(&fluct)?;
    let f0 = big_f.eval(0.0).re;
    let nodes = grid.nodes();
    let chi: Vec<f64> = big_f
        .real_samples()
        .iter()
        .zip(&nodes)
        .map(|(v, x)| x + (v - f0) / c + shift)
        .collect();
    // Raw samples: the real projection drops the Nyquist mode of f.
    let dchi: Vec<f64> = raw.iter().map(|v| v / c).collect();
    let mut map = DiffeoMap::new(grid, chi, dchi)?;
    map.scale = c;
    Ok(map)
}

/// `∫ W dx`, `∫ W ∂_xχ dx` and `∫ W (∂_xχ)² dx` for `W = (V∘χ)/∂_xχ`.
/// Only the last equals `∫ V dx` for every `χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WIntegrals {
    pub raw: f64,
    pub chi_weighted: f64,
    pub chi_sq_weighted: f64,
}

pub fn w_integrals(chi: &DiffeoMap, v: &SpectralFunction) -> Result<WIntegrals> {
    let vc = compose(chi, v)?.real_samples();
    let n = vc.len() as f64;
    let mut acc = [0.0; 3];
    for (a, d) in vc.iter().zip(chi.dchi()) {
        let w = a / d;
        acc[0] += w;
        acc[1] += w * d;
        acc[2] += w * d * d;
    }
    let q = 2.0 * PI / n;
    Ok(WIntegrals {
        raw: acc[0] * q,
        chi_weighted: acc[1] * q,
        chi_sq_weighted: acc[2] * q,
    })
}
