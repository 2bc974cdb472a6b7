//! The hyperbolic flow `e^{iτT_p}`, its conjugation and commutation with
//! paradifferential operators, Lie-derivative towers and the gauge remainders.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::fit::{probe_norms, OrderFit};
use crate::spectral::{PeriodicGrid, SpectralFunction, C64};
use crate::symbol::{poisson_bracket, CutoffFunction, LinearOperatorProbe, ParaOperator, Symbol};

/// Largest phase `|τ|·max|p|/n_substeps` a flow substep may carry.
pub const MAX_SUBSTEP_PHASE: f64 = 0.5;
/// Deepest Lie tower that may be built.
pub const MAX_LIE_DEPTH: usize = 6;
/// Gauss-Legendre nodes for the time integrals in `r`.
pub const QUADRATURE_NODES: usize = 16;

const I: C64 = C64::new(0.0, 1.0);

/// Flow time, substep count and cutoff. The step size `|τ|/n_substeps` is
/// kept when the flow is run for a different time.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub tau: f64,
    pub n_substeps: usize,
    pub cutoff: CutoffFunction,
}

impl FlowConfig {
    pub fn new(tau: f64, n_substeps: usize, cutoff: CutoffFunction) -> Result<Self> {
        if !tau.is_finite() || n_substeps == 0 {
            return Err(Error::BadParams(format!(
                "flow needs finite tau and n_substeps > 0, got {tau}, {n_substeps}"
            )));
        }
        Ok(Self {
            tau,
            n_substeps,
            cutoff,
        })
    }

    /// Substep count that keeps every substep phase at or below `phase`.
    pub fn resolving(p: &Symbol, tau: f64, cutoff: CutoffFunction, phase: f64) -> Result<Self> {
        let n = (tau.abs() * p.max_abs() / phase).ceil().max(1.0) as usize;
        Self::new(tau, n, cutoff)
    }

    pub fn step(&self) -> f64 {
        self.tau.abs() / self.n_substeps as f64
    }

    /// Same step size, run for time `tau`.
    pub fn at_tau(&self, tau: f64) -> Self {
        let h = self.step();
        let n = if h == 0.0 {
            self.n_substeps
        } else {
            ((tau.abs() / h) - 1e-9).ceil().max(1.0) as usize
        };
        Self {
            tau,
            n_substeps: n,
            cutoff: self.cutoff.clone(),
        }
    }
}

/// `e^{iτT_p}` prepared for repeated application. The x-independent part of `T_p`
/// is integrated exactly, the rest by the fourth-order integrating-factor scheme.
#[derive(Debug, Clone)]
pub struct GaugeFlow {
    op: ParaOperator,
    max_abs: f64,
}

impl GaugeFlow {
    pub fn new(p: &Symbol, cutoff: &CutoffFunction) -> Result<Self> {
        if !p.is_real_valued() {
            return Err(Error::BadParams("flow generator symbol must be real-valued".into()));
        }
        if !(p.order() < 1.0) {
            return Err(Error::BadParams(format!(
                "flow generator needs order < 1, got {}",
                p.order()
            )));
        }
        Ok(Self {
            op: ParaOperator::new(p, cutoff),
            max_abs: p.max_abs(),
        })
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.op.grid()
    }

    pub fn generator(&self) -> &ParaOperator {
        &self.op
    }

    /// `e^{iτT_p} h0` in `n_substeps` steps.
    pub fn evolve(&self, tau: f64, n_substeps: usize, h0: &SpectralFunction) -> Result<SpectralFunction> {
        if h0.grid() != self.grid() {
            return Err(Error::GridMismatch(self.grid().n_points(), h0.grid().n_points()));
        }
        let phase = tau.abs() * self.max_abs / n_substeps as f64;
        if phase > MAX_SUBSTEP_PHASE {
            return Err(Error::StepTooLarge(phase));
        }
        let mut u = h0.coeffs().to_vec();
        if tau == 0.0 {
            return SpectralFunction::from_coeffs(self.grid(), u);
        }
        let h = tau / n_substeps as f64;
        let e1: Vec<C64> = self.op.diag().iter().map(|d| (I * d * (h / 2.0)).exp()).collect();
        let e2: Vec<C64> = e1.iter().map(|e| e * e).collect();
        let n = u.len();
        let rhs = |v: &[C64]| {
            let mut out = vec![C64::new(0.0, 0.0); n];
            self.op.add_off_diag(v, I, &mut out);
            out
        };
        let hh = C64::new(h / 2.0, 0.0);
        for _ in 0..n_substeps {
            let k1 = rhs(&u);
            let a: Vec<C64> = (0..n).map(|i| e1[i] * (u[i] + hh * k1[i])).collect();
            let k2 = rhs(&a);
            let b: Vec<C64> = (0..n).map(|i| e1[i] * u[i] + hh * k2[i]).collect();
            let k3 = rhs(&b);
            let c: Vec<C64> = (0..n).map(|i| e2[i] * u[i] + e1[i] * k3[i] * h).collect();
            let k4 = rhs(&c);
            for i in 0..n {
                u[i] = e2[i] * u[i] + (e2[i] * k1[i] + e1[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        SpectralFunction::from_coeffs(self.grid(), u)
    }

    pub fn apply(&self, cfg: &FlowConfig, h0: &SpectralFunction) -> Result<SpectralFunction> {
        self.evolve(cfg.tau, cfg.n_substeps, h0)
    }
}

/// `e^{iτT_p} h0`.
pub fn flow(p: &Symbol, cfg: &FlowConfig, h0: &SpectralFunction) -> Result<SpectralFunction> {
    GaugeFlow::new(p, &cfg.cutoff)?.apply(cfg, h0)
}

/// `‖e^{−iτT_p} e^{iτT_p} h0 − h0‖ / ‖h0‖`.
pub fn flow_inverse_residual(p: &Symbol, cfg: &FlowConfig, h0: &SpectralFunction) -> Result<f64> {
    let f = GaugeFlow::new(p, &cfg.cutoff)?;
    let there = f.evolve(cfg.tau, cfg.n_substeps, h0)?;
    let back = f.evolve(-cfg.tau, cfg.n_substeps, &there)?;
    Ok((&back - h0).l2_norm() / h0.l2_norm())
}

fn lie_raw(tp: &ParaOperator, tb: &ParaOperator, k: usize, u: &[C64]) -> Vec<C64> {
    if k == 0 {
        return tb.apply_raw(u);
    }
    let left = tp.apply_raw(&lie_raw(tp, tb, k - 1, u));
    let right = lie_raw(tp, tb, k - 1, &tp.apply_raw(u));
    left.iter().zip(&right).map(|(l, r)| I * (l - r)).collect()
}

/// `𝔏^k_{iT_p} T_b = [iT_p, [⋯, [iT_p, T_b]]⋯]`, `k` nested commutators.
pub fn lie_derivative(
    p: &Symbol,
    b: &Symbol,
    cutoff: &CutoffFunction,
    k: usize,
) -> Result<LinearOperatorProbe<'static>> {
    if k > MAX_LIE_DEPTH {
        return Err(Error::DepthExceeded(k));
    }
    p.check_grid(b)?;
    let grid = p.grid();
    let tp = ParaOperator::new(p, cutoff);
    let tb = ParaOperator::new(b, cutoff);
    Ok(LinearOperatorProbe::new(
        grid,
        -grid.min_freq(),
        move |u: &SpectralFunction| SpectralFunction::from_coeffs(grid, lie_raw(&tp, &tb, k, u.coeffs())),
    ))
}

/// Flow and `T_b` prepared together for the conjugation identities.
struct Conjugation {
    flow: GaugeFlow,
    tb: ParaOperator,
    cfg: FlowConfig,
}

impl Conjugation {
    fn new(p: &Symbol, b: &Symbol, cfg: &FlowConfig) -> Result<Self> {
        p.check_grid(b)?;
        Ok(Self {
            flow: GaugeFlow::new(p, &cfg.cutoff)?,
            tb: ParaOperator::new(b, &cfg.cutoff),
            cfg: cfg.clone(),
        })
    }

    fn e(&self, tau: f64, u: &SpectralFunction) -> Result<SpectralFunction> {
        let c = self.cfg.at_tau(tau);
        self.flow.evolve(tau, c.n_substeps, u)
    }

    /// `e^{iτT_p} T_b e^{−iτT_p} u`.
    fn conjugate(&self, tau: f64, u: &SpectralFunction) -> Result<SpectralFunction> {
        let v = self.e(-tau, u)?;
        self.e(tau, &self.tb.apply(&v)?)
    }
}

/// `e^{iτT_p} T_b e^{−iτT_p} u`.
pub fn conjugate_apply(p: &Symbol, b: &Symbol, cfg: &FlowConfig, u: &SpectralFunction) -> Result<SpectralFunction> {
    Conjugation::new(p, b, cfg)?.conjugate(cfg.tau, u)
}

/// `‖(e^{iτT_p} T_b e^{−iτT_p} − Σ_{k≤n} (τ^k/k!) 𝔏^k_{iT_p} T_b) e^{iNx}‖` over the probe
/// frequencies. The prediction is `β + (n+1)δ − (n+1)`; the alternative reading of the
/// truncation index, `ρ → n⁺`, gives `β + (n+1)δ − n`.
pub fn bch_truncation_residual(p: &Symbol, b: &Symbol, cfg: &FlowConfig, n: usize, freqs: &[i64]) -> Result<OrderFit> {
    if n > 4 {
        return Err(Error::BadParams(format!("BCH truncation order {n} exceeds 4")));
    }
    let conj = Conjugation::new(p, b, cfg)?;
    let tp = conj.flow.generator().clone();
    let grid = p.grid();
    let tau = cfg.tau;
    let norms = probe_norms(grid, freqs, |u| {
        let mut r = conj.conjugate(tau, u)?.into_coeffs();
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            let c = tau.powi(k as i32) / fact;
            for (ri, li) in r.iter_mut().zip(lie_raw(&tp, &conj.tb, k, u.coeffs())) {
                *ri -= li * c;
            }
        }
        SpectralFunction::from_coeffs(grid, r)
    })?;
    let (beta, delta, m) = (b.order(), p.order(), (n + 1) as f64);
    Ok(OrderFit::new(format!("bch_n{n}"), freqs, norms, beta + m * delta - m).with_alt(beta + m * delta - n as f64))
}

/// `[e^{iτT_p}, T_b] u` together with the relative gap to the cross computation
/// `e^{iτT_p}(T_b − e^{−iτT_p} T_b e^{iτT_p}) u`.
#[derive(Debug, Clone)]
pub struct CommutatorOutput {
    pub value: SpectralFunction,
    pub cross_residual: f64,
}

pub fn commutator_flow_apply(
    p: &Symbol,
    b: &Symbol,
    cfg: &FlowConfig,
    u: &SpectralFunction,
) -> Result<CommutatorOutput> {
    let c = Conjugation::new(p, b, cfg)?;
    let tau = cfg.tau;
    let direct = &c.e(tau, &c.tb.apply(u)?)? - &c.tb.apply(&c.e(tau, u)?)?;
    let inner = &c.tb.apply(u)? - &c.conjugate(-tau, u)?;
    let cross = c.e(tau, &inner)?;
    let scale = c.tb.apply(u)?.l2_norm().max(u.l2_norm()).max(1e-300);
    let cross_residual = (&direct - &cross).l2_norm() / scale;
    Ok(CommutatorOutput {
        value: direct,
        cross_residual,
    })
}

fn gauss_legendre(a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(QUADRATURE_NODES).expect("node count is positive");
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(t, w)| (a + (b - a) * (t + 1.0) / 2.0, w * (b - a) / 2.0))
        .collect()
}

/// `(e^{iτT_p} − e^{iτT_{p′}}) h0`, computed directly and as
/// `∫_0^τ e^{i(τ−r)T_p} iT_{p−p′} e^{irT_{p′}} h0 dr`.
#[derive(Debug, Clone)]
pub struct DuhamelPair {
    pub direct: SpectralFunction,
    pub quadrature: SpectralFunction,
}

impl DuhamelPair {
    pub fn relative_gap(&self) -> f64 {
        let d = (&self.direct - &self.quadrature).l2_norm();
        let s = self.direct.l2_norm().max(self.quadrature.l2_norm());
        if s == 0.0 {
            0.0
        } else {
            d / s
        }
    }
}

pub fn duhamel_difference(p: &Symbol, p2: &Symbol, cfg: &FlowConfig, h0: &SpectralFunction) -> Result<DuhamelPair> {
    p.check_grid(p2)?;
    let f1 = GaugeFlow::new(p, &cfg.cutoff)?;
    let f2 = GaugeFlow::new(p2, &cfg.cutoff)?;
    let diff = ParaOperator::new(&p.sub(p2)?, &cfg.cutoff);
    let tau = cfg.tau;
    let direct = &f1.apply(cfg, h0)? - &f2.apply(cfg, h0)?;
    let mut acc = vec![C64::new(0.0, 0.0); h0.grid().n_points()];
    for (r, w) in gauss_legendre(0.0, tau) {
        let a = f2.evolve(r, cfg.at_tau(r).n_substeps, h0)?;
        let b = diff.apply(&a)?.scale(I);
        let c = f1.evolve(tau - r, cfg.at_tau(tau - r).n_substeps, &b)?;
        for (s, v) in acc.iter_mut().zip(c.coeffs()) {
            *s += v * w;
        }
    }
    Ok(DuhamelPair {
        direct,
        quadrature: SpectralFunction::from_coeffs(h0.grid(), acc)?,
    })
}

/// Relative residual of `e^{iτT_p} = Id + T_{e^{iτp}−1} + ∫_0^τ e^{i(τ−s)T_p}(T_{ip}T_{e^{isp}} − T_{ipe^{isp}}) ds`
/// applied to `h`.
pub fn flow_symbol_identity_residual(p: &Symbol, cfg: &FlowConfig, h: &SpectralFunction) -> Result<f64> {
    let f = GaugeFlow::new(p, &cfg.cutoff)?;
    let psi = &cfg.cutoff;
    let tau = cfg.tau;
    let lhs = f.apply(cfg, h)?;
    let e_tau = p.map(0.0, p.regularity(), |v| (I * v * tau).exp() - 1.0)?;
    let mut rhs = (h + &ParaOperator::new(&e_tau, psi).apply(h)?).into_coeffs();
    let tp = f.generator();
    for (s, w) in gauss_legendre(0.0, tau) {
        let e_s = p.map(0.0, p.regularity(), |v| (I * v * s).exp())?;
        let ip_e_s = p.map(p.order(), p.regularity(), |v| I * v * (I * v * s).exp())?;
        let a = ParaOperator::new(&e_s, psi).apply(h)?;
        let t1 = tp.apply(&a)?.scale(I);
        let t2 = ParaOperator::new(&ip_e_s, psi).apply(h)?;
        let g = f.evolve(tau - s, cfg.at_tau(tau - s).n_substeps, &(&t1 - &t2))?;
        for (r, v) in rhs.iter_mut().zip(g.coeffs()) {
            *r += v * w;
        }
    }
    let rhs = SpectralFunction::from_coeffs(h.grid(), rhs)?;
    Ok((&lhs - &rhs).l2_norm() / lhs.l2_norm())
}

/// Pointwise residual of `b = −∂_ξp ∂_x a + ∂_x p ∂_ξ a` and its scale.
pub fn cancellation_residual(a: &Symbol, b: &Symbol, p: &Symbol) -> Result<(f64, f64)> {
    let target = poisson_bracket(p, a)?.scale(C64::new(-1.0, 0.0));
    let residual = b.sub(&target)?.max_abs();
    Ok((residual, b.max_abs().max(target.max_abs())))
}

/// `R̃_τ u = τ e^{iτT_p} iT_b e^{−iτT_p} u + [e^{iτT_p}, T_{ia}] e^{−iτT_p} u`.
pub fn gauge_remainder_apply(
    a: &Symbol,
    b: &Symbol,
    p: &Symbol,
    cfg: &FlowConfig,
    u: &SpectralFunction,
) -> Result<SpectralFunction> {
    GaugeRemainder::new(a, b, p, cfg)?.apply(u)
}

/// `R̃_τ` prepared for repeated application.
pub struct GaugeRemainder {
    conj: Conjugation,
    ta: ParaOperator,
}

impl GaugeRemainder {
    /// Fails with `CancellationViolated` unless `b` satisfies the cancellation relation to `1e−8` of its scale.
    pub fn new(a: &Symbol, b: &Symbol, p: &Symbol, cfg: &FlowConfig) -> Result<Self> {
        a.check_grid(p)?;
        let (residual, scale) = cancellation_residual(a, b, p)?;
        if residual > 1e-8 * scale {
            return Err(Error::CancellationViolated { residual, scale });
        }
        Ok(Self {
            conj: Conjugation::new(p, b, cfg)?,
            ta: ParaOperator::new(a, &cfg.cutoff),
        })
    }

    pub fn apply(&self, u: &SpectralFunction) -> Result<SpectralFunction> {
        let tau = self.conj.cfg.tau;
        let v = self.conj.e(-tau, u)?;
        let inner = &self.conj.tb.apply(&v)?.scale(C64::new(0.0, tau)) + &self.ta.apply(&v)?.scale(I);
        Ok(&self.conj.e(tau, &inner)? - &self.ta.apply(u)?.scale(I))
    }
}
