use super::{CutoffFunction, Symbol};
use crate::error::{Error, Result};
use crate::spectral::{PeriodicGrid, SpectralFunction, C64};

/// `T_a` with the cutoff folded in, stored column by column:
/// `(T_a u)^(ξ) = Σ_η ψ(ξ−η, η) â(ξ−η, η) û(η)`.
/// Output frequencies that leave the lattice are dropped.
#[derive(Debug, Clone)]
pub struct ParaOperator {
    grid: PeriodicGrid,
    diag: Vec<C64>,
    off: Vec<Vec<(usize, C64)>>,
    preserves_real: bool,
}

impl ParaOperator {
    pub fn new(a: &Symbol, psi: &CutoffFunction) -> Self {
        let grid = a.grid();
        let n = grid.n_points();
        let mut diag = vec![C64::new(0.0, 0.0); n];
        let mut off = vec![Vec::new(); n];
        for k in 0..n {
            let eta = grid.freq(k);
            let Some(zmax) = psi.max_zeta(eta) else { continue };
            let hat = a.hat_row(eta);
            diag[k] = hat[0] * psi.eval(0, eta);
            for zeta in -zmax..=zmax {
                if zeta == 0 {
                    continue;
                }
                let w = psi.eval(zeta, eta);
                let Some(out) = grid.index(zeta + eta) else { continue };
                let z = grid.index(zeta).expect("|ζ| < N/2");
                if w > 0.0 {
                    off[k].push((out, hat[z] * w));
                }
            }
        }
        Self {
            grid,
            diag,
            off,
            preserves_real: a.preserves_real(),
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    /// Multiplier `ψ(0, η) â(0, η)` carried by the x-independent part.
    pub fn diag(&self) -> &[C64] {
        &self.diag
    }

    pub fn preserves_real(&self) -> bool {
        self.preserves_real
    }

    /// Accumulates `c · T_a^{off} û` into `out`, where `T_a^{off}` omits the `ζ = 0` part.
    pub(crate) fn add_off_diag(&self, input: &[C64], c: C64, out: &mut [C64]) {
        for (k, col) in self.off.iter().enumerate() {
            let u = input[k];
            if u == C64::new(0.0, 0.0) {
                continue;
            }
            let cu = c * u;
            for &(o, w) in col {
                out[o] += w * cu;
            }
        }
    }

    pub(crate) fn apply_raw(&self, input: &[C64]) -> Vec<C64> {
        let mut out: Vec<C64> = input.iter().zip(&self.diag).map(|(u, d)| u * d).collect();
        self.add_off_diag(input, C64::new(1.0, 0.0), &mut out);
        out
    }

    pub fn apply(&self, u: &SpectralFunction) -> Result<SpectralFunction> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch(self.grid.n_points(), u.grid().n_points()));
        }
        let out = self.apply_raw(u.coeffs());
        if u.is_real() && self.preserves_real {
            SpectralFunction::from_coeffs_real(self.grid, out)
        } else {
            SpectralFunction::from_coeffs(self.grid, out)
        }
    }

    /// `(T_a)†` with respect to the normalized L² pairing `Σ û conj(ŵ)`.
    pub fn apply_adjoint(&self, w: &SpectralFunction) -> Result<SpectralFunction> {
        if w.grid() != self.grid {
            return Err(Error::GridMismatch(self.grid.n_points(), w.grid().n_points()));
        }
        let input = w.coeffs();
        let mut out: Vec<C64> = input.iter().zip(&self.diag).map(|(u, d)| u * d.conj()).collect();
        for (k, col) in self.off.iter().enumerate() {
            for &(o, wt) in col {
                out[k] += wt.conj() * input[o];
            }
        }
        SpectralFunction::from_coeffs(self.grid, out)
    }
}

/// `T_a u`.
pub fn quantize(a: &Symbol, psi: &CutoffFunction, u: &SpectralFunction) -> Result<SpectralFunction> {
    if a.grid() != u.grid() {
        return Err(Error::GridMismatch(a.grid().n_points(), u.grid().n_points()));
    }
    ParaOperator::new(a, psi).apply(u)
}

/// `(T_a)† w`.
pub fn quantize_adjoint(a: &Symbol, psi: &CutoffFunction, w: &SpectralFunction) -> Result<SpectralFunction> {
    if a.grid() != w.grid() {
        return Err(Error::GridMismatch(a.grid().n_points(), w.grid().n_points()));
    }
    ParaOperator::new(a, psi).apply_adjoint(w)
}

type OpFn<'a> = dyn Fn(&SpectralFunction) -> Result<SpectralFunction> + Send + Sync + 'a;

/// A linear map on functions of one grid, known only through its action.
pub struct LinearOperatorProbe<'a> {
    grid: PeriodicGrid,
    band_limit: i64,
    op: Box<OpFn<'a>>,
}

impl<'a> LinearOperatorProbe<'a> {
    pub fn new(
        grid: PeriodicGrid,
        band_limit: i64,
        op: impl Fn(&SpectralFunction) -> Result<SpectralFunction> + Send + Sync + 'a,
    ) -> Self {
        Self {
            grid,
            band_limit,
            op: Box::new(op),
        }
    }

    pub fn from_para(op: ParaOperator) -> LinearOperatorProbe<'static> {
        let grid = op.grid();
        LinearOperatorProbe::new(grid, -grid.min_freq(), move |u| op.apply(u))
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn band_limit(&self) -> i64 {
        self.band_limit
    }

    pub fn apply(&self, u: &SpectralFunction) -> Result<SpectralFunction> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch(self.grid.n_points(), u.grid().n_points()));
        }
        (self.op)(u)
    }
}

/// `a(x_j, ξ) = e^{−i x_j ξ} (A e^{iξ·})(x_j)` for every lattice frequency within the band limit.
pub fn extract_symbol(a: &LinearOperatorProbe<'_>, grid: PeriodicGrid) -> Result<Symbol> {
    if a.grid() != grid {
        return Err(Error::GridMismatch(grid.n_points(), a.grid().n_points()));
    }
    let n = grid.n_points();
    let nodes = grid.nodes();
    let mut values = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let xi = grid.freq(k);
        if xi.abs() > a.band_limit() {
            continue;
        }
        let image = a.apply(&SpectralFunction::mode(grid, xi))?.samples();
        for (j, &x) in nodes.iter().enumerate() {
            values[k * n + j] = C64::from_polar(1.0, -(xi as f64) * x) * image[j];
        }
    }
    Symbol::from_values(grid, values, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::multiplier;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn identity_symbol_is_high_pass() {
        let g = grid(64);
        let psi = CutoffFunction::default_for(g);
        let one = Symbol::x_independent(g, 0.0, |_| C64::new(1.0, 0.0)).unwrap();
        let u = SpectralFunction::from_real_fn(g, |x| (x.sin() * 2.0).exp());
        let t = quantize(&one, &psi, &u).unwrap();
        for xi in g.min_freq()..=g.max_freq() {
            assert!((t.coeff(xi) - u.coeff(xi) * psi.eval(0, xi)).norm() < 1e-15);
        }
    }

    #[test]
    fn x_independent_symbol_is_filtered_multiplier() {
        let g = grid(64);
        let psi = CutoffFunction::default_for(g);
        let a = Symbol::x_independent(g, 1.0, |xi| C64::new(xi as f64, 0.5)).unwrap();
        let u = SpectralFunction::from_real_fn(g, |x| x.cos().powi(3) + (7.0 * x).sin());
        let t = quantize(&a, &psi, &u).unwrap();
        let m = multiplier(&u, |xi| C64::new(xi as f64, 0.5) * psi.eval(0, xi)).unwrap();
        assert!((&t - &m).l2_norm() < 1e-14);
    }

    #[test]
    fn paraproduct_cos_on_single_mode() {
        let g = grid(128);
        let psi = CutoffFunction::default_for(g);
        let a = Symbol::from_fn(g, 0.0, f64::INFINITY, |x, _| C64::new(x.cos(), 0.0)).unwrap();
        let t = quantize(&a, &psi, &SpectralFunction::mode(g, 32)).unwrap();
        for xi in g.min_freq()..=g.max_freq() {
            let want = match xi {
                31 => psi.eval(-1, 32) / 2.0,
                33 => psi.eval(1, 32) / 2.0,
                _ => 0.0,
            };
            assert!((t.coeff(xi) - C64::new(want, 0.0)).norm() < 1e-12, "xi = {xi}");
        }
    }

    #[test]
    fn adjoint_pairing() {
        let g = grid(64);
        let psi = CutoffFunction::default_for(g);
        let a = Symbol::from_fn(g, 1.0, 4.0, |x, xi| C64::new(xi as f64 * x.sin(), x.cos())).unwrap();
        let u = SpectralFunction::from_real_fn(g, |x| (x.cos() * 1.5).exp());
        let w = SpectralFunction::from_real_fn(g, |x| (3.0 * x).sin() + (x.sin()).exp());
        let op = ParaOperator::new(&a, &psi);
        let lhs: C64 = op
            .apply(&u)
            .unwrap()
            .coeffs()
            .iter()
            .zip(w.coeffs())
            .map(|(p, q)| p * q.conj())
            .sum();
        let rhs: C64 = u
            .coeffs()
            .iter()
            .zip(op.apply_adjoint(&w).unwrap().coeffs())
            .map(|(p, q)| p * q.conj())
            .sum();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = Symbol::x_independent(grid(16), 0.0, |_| C64::new(1.0, 0.0)).unwrap();
        let psi = CutoffFunction::default_for(grid(16));
        let u = SpectralFunction::mode(grid(32), 1);
        assert_eq!(quantize(&a, &psi, &u).unwrap_err(), Error::GridMismatch(16, 32));
    }

    #[test]
    fn extract_multiplier() {
        let g = grid(32);
        let probe = LinearOperatorProbe::new(g, -g.min_freq(), |u| multiplier(u, |xi| C64::new(xi as f64, 1.0)));
        let a = extract_symbol(&probe, g).unwrap();
        for xi in g.min_freq()..=g.max_freq() {
            for v in a.row(xi) {
                assert!((v - C64::new(xi as f64, 1.0)).norm() < 1e-12, "{xi} {v}");
            }
        }
    }

    #[test]
    fn extract_high_pass() {
        let g = grid(32);
        let psi = CutoffFunction::default_for(g);
        let one = Symbol::x_independent(g, 0.0, |_| C64::new(1.0, 0.0)).unwrap();
        let probe = LinearOperatorProbe::from_para(ParaOperator::new(&one, &psi));
        let a = extract_symbol(&probe, g).unwrap();
        for xi in g.min_freq()..=g.max_freq() {
            for v in a.row(xi) {
                assert!((v - C64::new(psi.eval(0, xi), 0.0)).norm() < 1e-12, "{xi} {v}");
            }
        }
    }
}
