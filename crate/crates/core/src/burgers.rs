//! Pseudospectral solver for `∂_t u + u∂_x u + |D|^{α−1}∂_x u = 0` on the circle,
//! Galilean normalization, the bump ansatz and the gauged transport residual.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fit::{probe_norms, OrderFit, PROBE_FREQS};
use crate::gauge::{FlowConfig, GaugeFlow, GaugeRemainder};
use crate::spectral::{
    compact_bump, forward_in_place, inverse_in_place, plateau_bump, PeriodicGrid, SpectralFunction, C64,
};
use crate::symbol::{dispersion_symbol, gauge_symbol, poisson_bracket, ParaOperator, Symbol};

/// Solutions larger than this are reported as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;
/// Transport CFL constant: `dt · max|u| · N/3 ≤ CFL`.
pub const CFL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub n_points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Snapshot interval in steps; 0 keeps only the initial and final states.
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(alpha: f64, n_points: usize, dt: f64, t_end: f64) -> Self {
        Self {
            alpha,
            n_points,
            dt,
            t_end,
            dealias: true,
            record_every: 0,
        }
    }

    pub fn recording(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::BadParams(format!(
                "alpha must lie in (1, 2), got {}",
                self.alpha
            )));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::BadParams(format!(
                "need dt > 0 and t_end >= 0, got {} and {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    /// Number of uniform steps of size at most `dt` reaching `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Largest retained frequency.
    pub fn band(&self) -> i64 {
        if self.dealias {
            ((self.n_points - 1) / 3) as i64
        } else {
            (self.n_points / 2 - 1) as i64
        }
    }
}

/// Snapshots of a solve with per-snapshot diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralFunction>,
    pub means: Vec<f64>,
    pub l2_norms: Vec<f64>,
    /// `∫_0^t max|∂_x u| dτ` up to each snapshot.
    pub grad_integrals: Vec<f64>,
    /// Step size actually used.
    pub dt: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralFunction {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial time")
    }

    /// Writes a `#`-prefixed config line, then `t, xi, re, im` per snapshot coefficient.
    pub fn write_csv<W: Write>(&self, cfg: &SolverConfig, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# alpha={} n_points={} dt={} t_end={} dealias={} record_every={}",
            cfg.alpha, cfg.n_points, cfg.dt, cfg.t_end, cfg.dealias, cfg.record_every
        )?;
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "xi", "re", "im"])?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let g = s.grid();
            for xi in g.min_freq()..=g.max_freq() {
                let c = s.coeff(xi);
                wtr.write_record([
                    format!("{t}"),
                    xi.to_string(),
                    format!("{:e}", c.re),
                    format!("{:e}", c.im),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

struct Stepper {
    n: usize,
    /// `−iξ` on the retained band, 0 elsewhere.
    dx_mask: Vec<C64>,
    e1: Vec<C64>,
    e2: Vec<C64>,
    h: f64,
}

impl Stepper {
    fn new(grid: PeriodicGrid, cfg: &SolverConfig, h: f64) -> Self {
        let n = grid.n_points();
        let band = cfg.band();
        let mut dx_mask = vec![C64::new(0.0, 0.0); n];
        let mut e1 = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            let xi = grid.freq(k);
            if xi.abs() <= band {
                dx_mask[k] = C64::new(0.0, -(xi as f64));
            }
            let xf = xi as f64;
            let l = if xi == 0 {
                0.0
            } else {
                -xf * xf.abs().powf(cfg.alpha - 1.0)
            };
            e1[k] = C64::new(0.0, l * h / 2.0).exp();
        }
        let e2 = e1.iter().map(|e| e * e).collect();
        Self { n, dx_mask, e1, e2, h }
    }

    /// `−∂_x(u²/2)` projected on the retained band.
    fn nonlinear(&self, v: &[C64]) -> Vec<C64> {
        let mut buf = v.to_vec();
        inverse_in_place(&mut buf);
        for c in buf.iter_mut() {
            *c = C64::new(0.5 * c.re * c.re, 0.0);
        }
        forward_in_place(&mut buf);
        for (c, m) in buf.iter_mut().zip(&self.dx_mask) {
            *c *= m;
        }
        buf
    }

    fn step(&self, u: &mut [C64]) {
        let (n, h) = (self.n, self.h);
        let (e1, e2) = (&self.e1, &self.e2);
        let k1 = self.nonlinear(u);
        let a: Vec<C64> = (0..n).map(|i| e1[i] * (u[i] + k1[i] * (h / 2.0))).collect();
        let k2 = self.nonlinear(&a);
        let b: Vec<C64> = (0..n).map(|i| e1[i] * u[i] + k2[i] * (h / 2.0)).collect();
        let k3 = self.nonlinear(&b);
        let c: Vec<C64> = (0..n).map(|i| e2[i] * u[i] + e1[i] * k3[i] * h).collect();
        let k4 = self.nonlinear(&c);
        for i in 0..n {
            u[i] = e2[i] * u[i] + (e2[i] * k1[i] + e1[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

fn sup_and_grad(u: &[C64], grid: PeriodicGrid) -> (f64, f64) {
    let mut s = u.to_vec();
    inverse_in_place(&mut s);
    let sup = s.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let mut d: Vec<C64> = u
        .iter()
        .enumerate()
        .map(|(k, c)| c * C64::new(0.0, grid.freq(k) as f64))
        .collect();
    inverse_in_place(&mut d);
    let grad = d.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    (sup, grad)
}

/// Integrates from `u0` with the integrating-factor fourth-order scheme: the dispersion
/// `e^{−t iξ|ξ|^{α−1}}` is exact and `−∂_x(u²/2)` is evaluated pseudospectrally.
/// With dealiasing on, `u0` is first projected on `|ξ| ≤ (N−1)/3`.
pub fn solve(u0: &SpectralFunction, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = u0.grid();
    if grid.n_points() != cfg.n_points {
        return Err(Error::GridMismatch(cfg.n_points, grid.n_points()));
    }
    if !u0.is_real() {
        return Err(Error::BadParams("initial data must be real-valued".into()));
    }
    let n_steps = cfg.n_steps();
    let h = if n_steps == 0 { 0.0 } else { cfg.t_end / n_steps as f64 };
    let band = cfg.band();
    let mut u: Vec<C64> = (0..grid.n_points())
        .map(|k| {
            if grid.freq(k).abs() <= band {
                u0.coeffs()[k]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let stepper = Stepper::new(grid, cfg, h);
    let cfl_scale = cfg.n_points as f64 / 3.0;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        means: Vec::new(),
        l2_norms: Vec::new(),
        grad_integrals: Vec::new(),
        dt: h,
    };
    let record = |t: f64, u: &[C64], gi: f64, traj: &mut Trajectory| -> Result<()> {
        let s = SpectralFunction::from_coeffs_real(grid, u.to_vec())?;
        traj.times.push(t);
        traj.means.push(s.mean().re);
        traj.l2_norms.push(s.l2_norm());
        traj.grad_integrals.push(gi);
        traj.states.push(s);
        Ok(())
    };
    record(0.0, &u, 0.0, &mut traj)?;
    let mut grad_integral = 0.0;
    for step in 0..n_steps {
        let t = step as f64 * h;
        let (sup, grad) = sup_and_grad(&u, grid);
        if !sup.is_finite() || sup > BLOWUP_THRESHOLD {
            return Err(Error::BlowupDetected { max_abs: sup, t });
        }
        let bound = CFL / (sup * cfl_scale);
        if h > bound {
            return Err(Error::CflViolation { dt: h, bound, t });
        }
        stepper.step(&mut u);
        // trapezoid in time for the gradient integral
        let (_, grad_next) = sup_and_grad(&u, grid);
        grad_integral += 0.5 * h * (grad + grad_next);
        let last = step + 1 == n_steps;
        if last || (cfg.record_every > 0 && (step + 1) % cfg.record_every == 0) {
            record((step + 1) as f64 * h, &u, grad_integral, &mut traj)?;
        }
    }
    let (sup, _) = sup_and_grad(&u, grid);
    if !sup.is_finite() || sup > BLOWUP_THRESHOLD {
        return Err(Error::BlowupDetected {
            max_abs: sup,
            t: cfg.t_end,
        });
    }
    Ok(traj)
}

/// `ũ(t, x) = u(t, x + t·mean0) − mean0`, i.e. `û(ξ) e^{iξ t mean0}` with `mean0` removed
/// from the zero mode. This is the change of frame that maps solutions to solutions.
pub fn galilean_normalize(u: &SpectralFunction, mean0: f64, t: f64) -> SpectralFunction {
    let grid = u.grid();
    let mut c: Vec<C64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, v)| v * C64::from_polar(1.0, grid.freq(k) as f64 * t * mean0))
        .collect();
    c[0] -= mean0;
    if u.is_real() {
        SpectralFunction::from_coeffs_real(grid, c).expect("length matches grid")
    } else {
        SpectralFunction::from_coeffs(grid, c).expect("length matches grid")
    }
}

/// `u(−x)`.
pub fn reflect(u: &SpectralFunction) -> SpectralFunction {
    let grid = u.grid();
    let c: Vec<C64> = (0..grid.n_points())
        .map(|k| match grid.index(-grid.freq(k)) {
            Some(j) => u.coeffs()[j],
            None => C64::new(0.0, 0.0),
        })
        .collect();
    if u.is_real() {
        SpectralFunction::from_coeffs_real(grid, c).expect("length matches grid")
    } else {
        SpectralFunction::from_coeffs(grid, c).expect("length matches grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzConfig {
    pub lambda: u32,
    pub eps: f64,
    pub s: f64,
}

/// `u0 = λ^{1/2−s} ω(λx)` and `v0 = u0 + ε ω(x)`.
#[derive(Debug, Clone)]
pub struct AnsatzPair {
    pub u0: SpectralFunction,
    pub v0: SpectralFunction,
    /// `⨍ω`.
    pub bump_mean: f64,
    /// `λε`, which must grow along a sweep.
    pub lambda_eps: f64,
}

/// Single dilated bump around `x = 0`; `ω` has support in `|x̃| < 1`, so `ω(λx̃)` fits on the circle
/// for every `λ ≥ 1`. Requires `λ ≤ N/8`.
pub fn ansatz_pair(cfg: &AnsatzConfig, grid: PeriodicGrid) -> Result<AnsatzPair> {
    let lambda = cfg.lambda as f64;
    if cfg.lambda == 0 || lambda > grid.n_points() as f64 / 8.0 {
        return Err(Error::UnresolvedBump {
            lambda,
            n_points: grid.n_points(),
        });
    }
    let amp = lambda.powf(0.5 - cfg.s);
    let small: Vec<f64> = grid
        .nodes()
        .into_iter()
        .map(|x| {
            let r = (x + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
            amp * compact_bump(lambda * r)
        })
        .collect();
    let w_samples: Vec<f64> = grid.nodes().into_iter().map(plateau_bump).collect();
    let u0 = SpectralFunction::from_real_samples(grid, &small)?;
    let w = SpectralFunction::from_real_samples(grid, &w_samples)?;
    let mut v0 = u0.axpy(C64::new(cfg.eps, 0.0), &w)?;
    v0.enforce_real();
    Ok(AnsatzPair {
        u0,
        v0,
        bump_mean: w.mean().re,
        lambda_eps: lambda * cfg.eps,
    })
}

/// Order fits for the transport term before and after the gauge transform.
#[derive(Debug, Clone)]
pub struct GaugeOrderReport {
    /// `R_2(v)` with generator `−p_v`, the sign under which the cancellation holds.
    pub gauged: OrderFit,
    /// `R_2(v)` with the literal `p_v`.
    pub literal: OrderFit,
    /// `R̃_1` with `a = ξ|ξ|^{α−1}`, the literal `p_v` and `b` from the cancellation relation.
    pub remainder: OrderFit,
    /// `T_{viξ}` alone.
    pub ungauged: OrderFit,
}

/// `R_2(v) = −(e^{iT_p} T_{viξ} − [T_{iξ|ξ|^{α−1}}, e^{iT_p}]) e^{−iT_p}` on wave packets.
fn r2_fit(
    name: &str,
    p: &Symbol,
    tv: &ParaOperator,
    ta: &ParaOperator,
    cfg: &FlowConfig,
    predicted: f64,
) -> Result<OrderFit> {
    let grid = p.grid();
    let f = GaugeFlow::new(p, &cfg.cutoff)?;
    let n = cfg.n_substeps;
    let norms = probe_norms(grid, &PROBE_FREQS, |u| {
        let w = f.evolve(-1.0, n, u)?;
        // e T_v w − (T_a e w − e T_a w) = e(T_v w + T_a w) − T_a e w
        let inner = &tv.apply(&w)? + &ta.apply(&w)?;
        let left = f.evolve(1.0, n, &inner)?;
        let right = ta.apply(&f.evolve(1.0, n, &w)?)?;
        Ok(-&(&left - &right))
    })?;
    Ok(OrderFit::new(name, &PROBE_FREQS, norms, predicted))
}

/// Gauged and ungauged transport orders for the zero-mean `v` at `τ = 1`.
/// `cfg.tau` is ignored; `cfg.n_substeps` sets the flow resolution.
pub fn gauged_transport_residual(v: &SpectralFunction, alpha: f64, cfg: &FlowConfig) -> Result<GaugeOrderReport> {
    let grid = v.grid();
    let psi = &cfg.cutoff;
    let cfg1 = FlowConfig::new(1.0, cfg.n_substeps, psi.clone())?;
    let p = gauge_symbol(v, alpha)?;
    let minus_p = p.scale(C64::new(-1.0, 0.0));
    let vs = v.real_samples();
    let n = grid.n_points();
    let mut values = Vec::with_capacity(n * n);
    for k in 0..n {
        let xi = grid.freq(k) as f64;
        values.extend(vs.iter().map(|&vj| C64::new(0.0, xi * vj)));
    }
    let transport = Symbol::from_values(grid, values, 1.0, f64::INFINITY)?;
    let tv = ParaOperator::new(&transport, psi);
    let a = dispersion_symbol(grid, alpha)?;
    let ta = ParaOperator::new(&a.scale(C64::new(0.0, 1.0)), psi);
    let reduced = (2.0 - alpha).max(0.0);
    let gauged = r2_fit("r2_gauged", &minus_p, &tv, &ta, &cfg1, reduced)?;
    let literal = r2_fit("r2_literal_sign", &p, &tv, &ta, &cfg1, reduced)?;
    let b = poisson_bracket(&p, &a)?.scale(C64::new(-1.0, 0.0));
    let rem = GaugeRemainder::new(&a, &b, &p, &cfg1)?;
    let remainder = OrderFit::new(
        "r_tilde",
        &PROBE_FREQS,
        probe_norms(grid, &PROBE_FREQS, |u| rem.apply(u))?,
        reduced,
    );
    let ungauged = OrderFit::new(
        "ungauged",
        &PROBE_FREQS,
        probe_norms(grid, &PROBE_FREQS, |u| tv.apply(u))?,
        1.0,
    );
    Ok(GaugeOrderReport {
        gauged,
        literal,
        remainder,
        ungauged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dispersion, multiplier};

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn linear_limit() {
        let g = grid(128);
        let u0 = SpectralFunction::from_real_fn(g, |x| 1e-12 * (x.cos() + (3.0 * x).sin()));
        let cfg = SolverConfig::new(1.5, 128, 1e-3, 0.2);
        let traj = solve(&u0, &cfg).unwrap();
        let t = traj.final_time();
        let exact = multiplier(&u0, |xi| {
            let d = dispersion(1.5)(xi);
            (-d * t).exp()
        })
        .unwrap();
        assert!((traj.final_state() - &exact).l2_norm() <= 1e-10 * u0.l2_norm());
    }

    #[test]
    fn mean_and_norm_conserved() {
        let g = grid(256);
        let u0 = SpectralFunction::from_real_fn(g, |x| 0.3 + x.cos() + 0.5 * (2.0 * x).sin());
        let cfg = SolverConfig::new(1.5, 256, 1e-3, 0.3).recording(10);
        let traj = solve(&u0, &cfg).unwrap();
        assert_eq!(traj.times[0], 0.0);
        for (m, l) in traj.means.iter().zip(&traj.l2_norms) {
            assert!((m - traj.means[0]).abs() <= 1e-13);
            assert!((l - traj.l2_norms[0]).abs() <= 1e-8 * traj.l2_norms[0]);
        }
        assert!(traj.states.iter().all(|s| s.is_real()));
    }

    #[test]
    fn zero_mean_stays_zero() {
        let g = grid(128);
        let u0 = &SpectralFunction::sin_mode(g, 1) + &SpectralFunction::cos_mode(g, 4).scale_real(0.2);
        assert_eq!(u0.mean().re, 0.0);
        let traj = solve(&u0, &SolverConfig::new(1.5, 128, 1e-3, 0.1)).unwrap();
        assert_eq!(traj.final_state().mean().re, 0.0);
    }

    #[test]
    fn cfl_and_blowup_guards() {
        let g = grid(128);
        let u0 = SpectralFunction::from_real_fn(g, |x| 100.0 * x.cos());
        let err = solve(&u0, &SolverConfig::new(1.5, 128, 1e-2, 0.1)).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
        let big = SpectralFunction::from_real_fn(g, |x| 2e6 * x.cos());
        let err = solve(&big, &SolverConfig::new(1.5, 128, 1e-12, 1e-12)).unwrap_err();
        assert!(matches!(err, Error::BlowupDetected { .. }));
    }

    #[test]
    fn galilean_identities() {
        let g = grid(64);
        let u = SpectralFunction::from_real_fn(g, |x| 0.7 + x.cos());
        assert_eq!(galilean_normalize(&u, 0.0, 1.3), u);
        let n = galilean_normalize(&u, u.mean().re, 1.3);
        assert!(n.mean().norm() < 1e-15);
    }

    #[test]
    fn galilean_frame_solves_the_equation() {
        let g = grid(256);
        let u0 = SpectralFunction::from_real_fn(g, |x| 0.5 + 0.5 * x.cos());
        let m0 = u0.mean().re;
        let dt = 1e-4;
        let cfg = SolverConfig::new(1.5, 256, dt, 0.2).recording(1);
        let traj = solve(&u0, &cfg).unwrap();
        let k = traj.states.len() - 2;
        let norm = |i: usize| galilean_normalize(&traj.states[i], m0, traj.times[i]);
        let mid = norm(k);
        let ut = (&norm(k + 1) - &norm(k - 1)).scale_real(1.0 / (traj.times[k + 1] - traj.times[k - 1]));
        let ms = mid.real_samples();
        let mx = mid.derivative(1).real_samples();
        let prod: Vec<f64> = ms.iter().zip(&mx).map(|(p, q)| p * q).collect();
        let nl = SpectralFunction::from_real_samples(g, &prod).unwrap();
        let disp = multiplier(&mid, dispersion(1.5)).unwrap();
        let res = &(&ut + &nl) + &disp;
        let scale = ut.l2_norm().max(nl.l2_norm()).max(disp.l2_norm());
        assert!(res.l2_norm() <= 1e-4 * scale, "{}", res.l2_norm() / scale);
    }

    #[test]
    fn time_reversal() {
        let g = grid(256);
        let u0 = SpectralFunction::from_real_fn(g, |x| 0.5 * x.cos() + 0.2 * (2.0 * x).sin());
        let cfg = SolverConfig::new(1.5, 256, 1e-3, 0.5);
        let there = solve(&u0, &cfg).unwrap();
        let back = solve(&reflect(there.final_state()), &cfg).unwrap();
        let r = reflect(back.final_state());
        assert!((&r - &u0).l2_norm() <= 1e-6 * u0.l2_norm());
    }

    #[test]
    fn ansatz_difference_and_guard() {
        let g = grid(2048);
        let cfg = AnsatzConfig {
            lambda: 8,
            eps: 0.25,
            s: 3.0,
        };
        let pair = ansatz_pair(&cfg, g).unwrap();
        let w = SpectralFunction::from_real_fn(g, plateau_bump);
        for sigma in [0.0, 1.0, 2.5] {
            let d = crate::spectral::sobolev_norm(&(&pair.v0 - &pair.u0), sigma);
            let want = 0.25 * crate::spectral::sobolev_norm(&w, sigma);
            assert!((d - want).abs() <= 1e-12 * want);
        }
        assert!(pair.bump_mean > 0.2 && pair.bump_mean < 0.3);
        // single bump: nothing beyond |x̃| < 1/λ but the spectral tail of the projection
        let amp = 8f64.powf(-2.5);
        for (v, x) in pair.u0.real_samples().iter().zip(g.nodes()) {
            let r = (x + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
            if r.abs() >= 1.0 / 8.0 {
                assert!(v.abs() < 1e-6 * amp, "{v:e}");
            }
        }
        let want_mean = 8f64.powf(-2.5) * pair.bump_mean / 8.0;
        assert!((pair.u0.mean().re - want_mean).abs() < 1e-3 * want_mean);
        let bad = AnsatzConfig {
            lambda: 512,
            eps: 0.25,
            s: 3.0,
        };
        assert!(matches!(ansatz_pair(&bad, g), Err(Error::UnresolvedBump { .. })));
    }

    #[test]
    fn ansatz_norm_uniform_in_lambda() {
        let norms: Vec<f64> = [8u32, 16, 32, 64]
            .iter()
            .map(|&lambda| {
                let g = grid(128 * lambda as usize);
                let pair = ansatz_pair(
                    &AnsatzConfig {
                        lambda,
                        eps: 0.1,
                        s: 3.0,
                    },
                    g,
                )
                .unwrap();
                crate::spectral::sobolev_norm(&pair.u0, 3.0)
            })
            .collect();
        let (lo, hi) = norms.iter().fold((f64::MAX, 0.0f64), |(a, b), &n| (a.min(n), b.max(n)));
        assert!(hi / lo <= 2.0, "{norms:?}");
    }

    #[test]
    fn trajectory_csv_header() {
        let g = grid(16);
        let cfg = SolverConfig::new(1.5, 16, 1e-2, 0.02);
        let traj = solve(&SpectralFunction::cos_mode(g, 1), &cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# alpha=1.5"));
        assert_eq!(lines.next().unwrap(), "t,xi,re,im");
        assert_eq!(text.lines().count(), 2 + 2 * 16);
    }
}
