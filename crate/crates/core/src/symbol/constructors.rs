use super::Symbol;
use crate::error::{Error, Result};
use crate::spectral::{antiderivative_zero_mean, PeriodicGrid, SpectralFunction, C64};

/// `p_v(x, ξ) = −(1/α) ξ|ξ|^{1−α} V(x)` with `V` the zero-mean antiderivative of `v`.
/// Carries the continuous `∂_ξ p_v = −((2−α)/α) |ξ|^{1−α} V(x)`.
pub fn gauge_symbol(v: &SpectralFunction, alpha: f64) -> Result<Symbol> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::BadParams(format!(
            "gauge symbol needs 1 < alpha < 2, got {alpha}"
        )));
    }
    let grid = v.grid();
    let big_v = antiderivative_zero_mean(v)?.real_samples();
    let n = grid.n_points();
    let regularity = (alpha / (alpha - 1.0)).ceil();
    let mut values = Vec::with_capacity(n * n);
    let mut deriv = Vec::with_capacity(n * n);
    for k in 0..n {
        let xi = grid.freq(k) as f64;
        let (f, df) = if xi == 0.0 {
            (0.0, 0.0)
        } else {
            let w = xi.abs().powf(1.0 - alpha);
            (-(xi * w) / alpha, -(2.0 - alpha) * w / alpha)
        };
        for &vv in &big_v {
            values.push(C64::new(f * vv, 0.0));
            deriv.push(C64::new(df * vv, 0.0));
        }
    }
    let mut p = Symbol::from_values(grid, values, 2.0 - alpha, regularity)?;
    p.xi_derivative = Some(deriv);
    Ok(p)
}

/// `ξ|ξ|^{α−1}` with the continuous `∂_ξ = α|ξ|^{α−1}`, the symbol of `−i|D|^{α−1}∂_x`.
pub fn dispersion_symbol(grid: PeriodicGrid, alpha: f64) -> Result<Symbol> {
    let w = move |xi: i64| {
        if xi == 0 {
            0.0
        } else {
            (xi as f64).abs().powf(alpha - 1.0)
        }
    };
    Symbol::x_independent(grid, alpha, |xi| C64::new(xi as f64 * w(xi), 0.0))?
        .with_xi_derivative(|_, xi| C64::new(alpha * w(xi), 0.0))
}

/// Principal and subprincipal symbols of the linearized water-wave system
/// at a surface with slope `η_x` and curvature `η_xx`.
#[derive(Debug, Clone)]
pub struct WaterWaveSymbols {
    pub lambda1: Symbol,
    pub lambda0: Symbol,
    pub l2: Symbol,
    pub l1: Symbol,
    pub q: Symbol,
    pub p_half: Symbol,
    pub gamma32: Symbol,
    pub gamma12: Symbol,
}

pub fn ww_symbols(eta_x: &SpectralFunction, eta_xx: &SpectralFunction, grid: PeriodicGrid) -> Result<WaterWaveSymbols> {
    if eta_x.grid() != grid {
        return Err(Error::GridMismatch(grid.n_points(), eta_x.grid().n_points()));
    }
    if eta_xx.grid() != grid {
        return Err(Error::GridMismatch(grid.n_points(), eta_xx.grid().n_points()));
    }
    let e = eta_x.real_samples();
    let ee = eta_xx.real_samples();
    let n = grid.n_points();
    let size = n * n;
    let mut t: [Vec<C64>; 8] = std::array::from_fn(|_| Vec::with_capacity(size));
    let zero = C64::new(0.0, 0.0);
    for k in 0..n {
        let xi = grid.freq(k) as f64;
        let a = xi.abs();
        for j in 0..n {
            let (e, ee) = (e[j], ee[j]);
            let s = 1.0 + e * e;
            let g = s.powf(-0.5);
            let dg = -e * ee * s.powf(-1.5);
            let q = C64::new(g, 0.0);
            let l2 = C64::new(s.powf(-1.5) * xi * xi, 0.0);
            // l1 = −(i/2) ∂_x ∂_ξ l2 with ∂_ξ(ξ²) = 2ξ
            let l1 = C64::new(0.0, 3.0 * xi * e * ee * s.powf(-2.5));
            let (lambda0, gamma12) = if xi == 0.0 {
                (zero, zero)
            } else {
                let d_alpha1 = C64::new(0.0, xi * ee) * g + C64::new(a, e * xi) * dg;
                let d_alpha1_e = C64::new(a * ee, 2.0 * xi * e * ee) * g + C64::new(a * e, xi * e * e) * dg;
                let l0 = (d_alpha1_e + C64::new(0.0, xi.signum()) * d_alpha1) * (s / (2.0 * a));
                let g12 = s.powf(-0.75) * a.sqrt() * l0.re / 2.0;
                (l0, C64::new(g12, 0.0))
            };
            t[0].push(C64::new(a, 0.0));
            t[1].push(lambda0);
            t[2].push(l2);
            t[3].push(l1);
            t[4].push(q);
            t[5].push(C64::new(s.powf(-1.25) * a.sqrt(), 0.0));
            t[6].push(C64::new(s.powf(-0.75) * a.powf(1.5), 0.0));
            t[7].push(gamma12);
        }
    }
    let [lambda1, lambda0, l2, l1, q, p_half, gamma32, gamma12] = t;
    let build = |v, m| Symbol::from_values(grid, v, m, 0.0);
    Ok(WaterWaveSymbols {
        lambda1: build(lambda1, 1.0)?,
        lambda0: build(lambda0, 0.0)?,
        l2: build(l2, 2.0)?,
        l1: build(l1, 1.0)?,
        q: build(q, 0.0)?,
        p_half: build(p_half, 0.5)?,
        gamma32: build(gamma32, 1.5)?,
        gamma12: build(gamma12, 0.5)?,
    })
}
