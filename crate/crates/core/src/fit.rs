//! Log-log order fits over probe frequencies and Rayleigh-ratio operator norm estimates.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::spectral::{plateau_bump, sobolev_norm, PeriodicGrid, SpectralFunction, C64};

/// Probe frequencies used by every order fit.
pub const PROBE_FREQS: [i64; 4] = [16, 32, 64, 128];

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Measured norms at each probe frequency with the fitted and predicted exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub experiment: String,
    pub freqs: Vec<i64>,
    pub norms: Vec<f64>,
    pub fitted: f64,
    pub predicted: f64,
    /// Second candidate prediction where the exponent bookkeeping is ambiguous.
    pub alt_predicted: Option<f64>,
}

impl OrderFit {
    pub fn new(experiment: impl Into<String>, freqs: &[i64], norms: Vec<f64>, predicted: f64) -> Self {
        let xs: Vec<f64> = freqs.iter().map(|&n| n as f64).collect();
        let fitted = loglog_slope(&xs, &norms);
        Self {
            experiment: experiment.into(),
            freqs: freqs.to_vec(),
            norms,
            fitted,
            predicted,
            alt_predicted: None,
        }
    }

    pub fn with_alt(mut self, alt: f64) -> Self {
        self.alt_predicted = Some(alt);
        self
    }

    pub fn error(&self) -> f64 {
        (self.fitted - self.predicted).abs()
    }

    pub fn within(&self, tol: f64) -> bool {
        self.error() <= tol
    }
}

/// Writes `experiment, N, norm, fitted_exponent, predicted_exponent`, one row per probe.
pub fn write_order_csv<W: Write>(w: W, fits: &[OrderFit]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["experiment", "N", "norm", "fitted_exponent", "predicted_exponent"])?;
    for f in fits {
        for (n, v) in f.freqs.iter().zip(&f.norms) {
            wtr.write_record([
                f.experiment.clone(),
                n.to_string(),
                format!("{v:e}"),
                format!("{:.6}", f.fitted),
                format!("{:.6}", f.predicted),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// `‖A e^{iNx}‖_{L²}` for each probe frequency `N`.
pub fn probe_norms(
    grid: PeriodicGrid,
    freqs: &[i64],
    op: impl Fn(&SpectralFunction) -> Result<SpectralFunction>,
) -> Result<Vec<f64>> {
    freqs
        .iter()
        .map(|&n| Ok(op(&SpectralFunction::mode(grid, n))?.l2_norm()))
        .collect()
}

/// `e^{iNx} ω(x)`.
pub fn wave_packet(grid: PeriodicGrid, n: i64) -> SpectralFunction {
    let samples: Vec<C64> = grid
        .nodes()
        .into_iter()
        .map(|x| C64::from_polar(plateau_bump(x), n as f64 * x))
        .collect();
    SpectralFunction::from_complex_samples(grid, &samples).expect("sample count matches grid")
}

/// Real trigonometric polynomial with uniform coefficients on `1 ≤ |ξ| ≤ band`.
pub fn random_trig_poly(grid: PeriodicGrid, band: i64, rng: &mut impl Rng) -> SpectralFunction {
    let mut modes = Vec::new();
    for k in 1..=band.min(grid.max_freq()) {
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        modes.push((k, c));
        modes.push((-k, c.conj()));
    }
    let mut f = SpectralFunction::from_modes(grid, &modes);
    f.enforce_real();
    f
}

/// Number of random probes added to the wave packets.
pub const RANDOM_PROBES: usize = 64;

/// Max of `‖Au‖_{H^{s_out}} / ‖u‖_{H^{s_in}}` over every wave packet on the grid
/// and `RANDOM_PROBES` seeded random trigonometric polynomials.
pub fn operator_norm_estimate(
    grid: PeriodicGrid,
    s_in: f64,
    s_out: f64,
    seed: u64,
    op: impl Fn(&SpectralFunction) -> Result<SpectralFunction>,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<SpectralFunction> = (grid.min_freq()..=grid.max_freq())
        .map(|n| wave_packet(grid, n))
        .collect();
    for _ in 0..RANDOM_PROBES {
        let band = rng.random_range(1..=grid.max_freq());
        probes.push(random_trig_poly(grid, band, &mut rng));
    }
    let mut best = 0.0f64;
    for u in &probes {
        let den = sobolev_norm(u, s_in);
        if den == 0.0 {
            continue;
        }
        best = best.max(sobolev_norm(&op(u)?, s_out) / den);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{abs_pow, multiplier};

    #[test]
    fn slope_of_power_law() {
        let xs = [16.0, 32.0, 64.0, 128.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.25)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.25).abs() < 1e-12);
    }

    #[test]
    fn probe_fit_of_abs_derivative() {
        let g = PeriodicGrid::new(512).unwrap();
        let norms = probe_norms(g, &PROBE_FREQS, |u| multiplier(u, abs_pow(0.75))).unwrap();
        let fit = OrderFit::new("abs", &PROBE_FREQS, norms, 0.75);
        assert!(fit.error() < 1e-12);
        let mut buf = Vec::new();
        write_order_csv(&mut buf, &[fit]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("experiment,N,norm,fitted_exponent,predicted_exponent\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn norm_of_multiplier() {
        let g = PeriodicGrid::new(64).unwrap();
        let est = operator_norm_estimate(g, 1.0, 0.0, 7, |u| multiplier(u, abs_pow(1.0))).unwrap();
        assert!(est <= 1.0 + 1e-12);
        assert!(est > 0.9);
        let again = operator_norm_estimate(g, 1.0, 0.0, 7, |u| multiplier(u, abs_pow(1.0))).unwrap();
        assert_eq!(est, again);
    }

    #[test]
    fn packet_is_localized() {
        let g = PeriodicGrid::new(128).unwrap();
        let p = wave_packet(g, 20);
        let total: f64 = p.coeffs().iter().map(|c| c.norm_sqr()).sum();
        let near: f64 = (10..=30).map(|k| p.coeff(k).norm_sqr()).sum();
        assert!(near > 0.99 * total, "{}", near / total);
    }
}
