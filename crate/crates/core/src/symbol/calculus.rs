use super::{CutoffFunction, Symbol};
use crate::error::Result;
use crate::spectral::{inverse_in_place, zygmund_norm, SpectralFunction, C64};

/// Number of expansion terms `α` with `α < ρ`, never fewer than one.
fn n_terms(rho: f64) -> u32 {
    (rho.ceil().max(1.0)) as u32
}

/// `1 / (i^α α!)`.
fn coefficient(alpha: u32) -> C64 {
    let fact: f64 = (1..=alpha).map(f64::from).product();
    C64::new(0.0, -1.0).powu(alpha) / fact
}

/// `a # b = Σ_{α<ρ} (1/(i^α α!)) Δ_ξ^α a · ∂_x^α b`.
pub fn compose_symbols(a: &Symbol, b: &Symbol, rho: f64) -> Result<Symbol> {
    a.check_grid(b)?;
    let order = a.order() + b.order();
    let regularity = a.regularity().min(b.regularity());
    let mut da = a.clone();
    let mut acc: Option<Symbol> = None;
    for alpha in 0..n_terms(rho) {
        if alpha > 0 {
            da = da.delta_xi();
        }
        let c = coefficient(alpha);
        let term = da.zip_with(&b.dx(alpha), order, regularity, |p, q| c * p * q)?;
        acc = Some(match acc {
            None => term,
            Some(s) => s.add(&term)?,
        });
    }
    Ok(acc.expect("at least one term").with_order(order, regularity))
}

/// `a* = Σ_{α<ρ} (1/(i^α α!)) Δ_ξ^α ∂_x^α ā`.
pub fn adjoint_symbol(a: &Symbol, rho: f64) -> Result<Symbol> {
    let abar = a.conj();
    let mut acc: Option<Symbol> = None;
    for alpha in 0..n_terms(rho) {
        let mut t = abar.dx(alpha);
        for _ in 0..alpha {
            t = t.delta_xi();
        }
        let term = t.scale(coefficient(alpha));
        acc = Some(match acc {
            None => term,
            Some(s) => s.add(&term)?,
        });
    }
    Ok(acc.expect("at least one term").with_order(a.order(), a.regularity()))
}

/// `M^m_ρ(a; n) = max_{j≤n, ξ≠0} (1+|ξ|)^{−(m−j)} ‖Δ_ξ^j a(·, ξ)‖_{C^ρ_*}` with `ρ` the declared regularity.
/// Row coefficients below `1e−14` of the row maximum are treated as roundoff.
pub fn symbol_seminorm(a: &Symbol, m: f64, n: u32) -> f64 {
    let grid = a.grid();
    let rho = a.regularity();
    let mut d = a.clone();
    let mut best = 0.0f64;
    for j in 0..=n {
        if j > 0 {
            d = d.delta_xi();
        }
        for xi in grid.min_freq()..=grid.max_freq() {
            if xi == 0 {
                continue;
            }
            let mut coeffs = d.hat_row(xi).to_vec();
            let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if top == 0.0 {
                continue;
            }
            for c in coeffs.iter_mut() {
                if c.norm() <= 1e-14 * top {
                    *c = C64::new(0.0, 0.0);
                }
            }
            let row = SpectralFunction::from_coeffs(grid, coeffs).expect("row length matches grid");
            let w = (1.0 + xi.abs() as f64).powf(-(m - j as f64));
            best = best.max(w * zygmund_norm(&row, rho));
        }
    }
    best
}

/// `σ_a` with x-Fourier data `ψ(ζ, ξ) â(ζ, ξ)`, restricted to pairs with `ζ + ξ` on the lattice.
/// This is the symbol recovered from the quantization by probing.
pub fn cutoff_filtered(a: &Symbol, psi: &CutoffFunction) -> Result<Symbol> {
    let grid = a.grid();
    let n = grid.n_points();
    let mut values = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let xi = grid.freq(k);
        let hat = a.hat_row(xi);
        let row = &mut values[k * n..(k + 1) * n];
        for z in 0..n {
            let zeta = grid.freq(z);
            if grid.index(zeta + xi).is_some() {
                row[z] = hat[z] * psi.eval(zeta, xi);
            }
        }
        inverse_in_place(row);
    }
    Symbol::from_values(grid, values, a.order(), a.regularity())
}

/// `{p, a} = ∂_ξ p ∂_x a − ∂_x p ∂_ξ a`, using the attached continuous ξ-derivatives
/// and the forward difference for any operand without one.
pub fn poisson_bracket(p: &Symbol, a: &Symbol) -> Result<Symbol> {
    p.check_grid(a)?;
    let dp = p.xi_derivative().unwrap_or_else(|| p.delta_xi());
    let da = a.xi_derivative().unwrap_or_else(|| a.delta_xi());
    let order = p.order() + a.order() - 1.0;
    let regularity = (p.regularity().min(a.regularity()) - 1.0).max(0.0);
    let left = dp.zip_with(&a.dx(1), order, regularity, |u, v| u * v)?;
    let right = p.dx(1).zip_with(&da, order, regularity, |u, v| u * v)?;
    left.sub(&right).map(|s| s.with_order(order, regularity))
}
