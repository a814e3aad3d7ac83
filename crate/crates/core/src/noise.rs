//! Band-limited colored noise.
//!
//! A realization is the finite trigonometric series
//!
//! ```text
//! n(t) = K [ C(w_0) b_0 / sqrt(2) + sum_{m=1}^{N_f} C(w_m) (a_m sin(w_m t) + b_m cos(w_m t)) ]
//! K    = 1 / sqrt(N_f dt),   C(w) = exp(-alpha w^2),   w_m = 2 pi m / ((N - 1) dt)
//! ```
//!
//! with `a_m, b_m ~ N(0, 1)` independent. `alpha = 0` gives (band-limited)
//! white noise; larger `alpha` damps the high frequencies and reddens the
//! spectrum. The series is periodic with period `(N - 1) dt`.
//!
//! Coefficients come from ChaCha8 seeded with [`SeedableRng::seed_from_u64`]
//! and are transformed with `rand_distr`'s ziggurat `StandardNormal`, drawn in
//! the order `b_0, a_1, b_1, a_2, b_2, ...`. Both algorithms are fully
//! specified, so a `(spec, seed)` pair reproduces the same path on any
//! platform.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::seed::realization_seed;
use crate::step::StepSize;

/// Number of evenly spaced time origins in `[0, 1)` averaged by
/// [`autocorrelation`].
pub const AUTOCORRELATION_ORIGINS: usize = 64;

/// Parameters of the noise family: color and time resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    alpha: f64,
    levels: usize,
    dt: f64,
}

impl NoiseSpec {
    /// `levels` is the number of time levels per unit time including both
    /// endpoints; it must be odd and at least 3.
    pub fn new(alpha: f64, levels: usize, dt: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::config("alpha", format!("must be >= 0, got {alpha}")));
        }
        if levels < 3 || levels.is_multiple_of(2) {
            return Err(Error::config(
                "steps_per_unit",
                format!("must be odd and >= 3, got {levels}"),
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config("dt", format!("must be > 0, got {dt}")));
        }
        Ok(NoiseSpec { alpha, levels, dt })
    }

    /// The noise resolution tied to a simulation step: `N = 1/dt + 1`.
    pub fn for_step(alpha: f64, step: StepSize) -> Result<Self> {
        Self::new(alpha, step.noise_levels(), step.dt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `N_f = (N - 1) / 2`.
    pub fn frequency_count(&self) -> usize {
        (self.levels - 1) / 2
    }

    /// Period of every realization, `(N - 1) dt`.
    pub fn period(&self) -> f64 {
        (self.levels - 1) as f64 * self.dt
    }

    pub fn omega(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.period()
    }

    /// Spectral envelope `C(w) = exp(-alpha w^2)`.
    pub fn envelope(&self, omega: f64) -> f64 {
        (-self.alpha * omega * omega).exp()
    }

    /// Amplitude normalization `1 / sqrt(N_f dt)`.
    pub fn scale(&self) -> f64 {
        1.0 / (self.frequency_count() as f64 * self.dt).sqrt()
    }

    /// The spectral factor `(1/N_f) [C(w_0)^2 / 2 + sum_m C(w_m)^2]`.
    pub fn spectral_sum(&self) -> f64 {
        let nf = self.frequency_count();
        // Smallest terms first; C is nonincreasing in m.
        let tail: f64 = (1..=nf)
            .rev()
            .map(|m| {
                let c = self.envelope(self.omega(m));
                c * c
            })
            .sum();
        let c0 = self.envelope(0.0);
        (tail + 0.5 * c0 * c0) / nf as f64
    }
}

/// Expected squared increment of the integrated noise over one bin, using the
/// left-endpoint approximation `E[(n(t_j) dt)^2] = dt * S`.
pub fn increment_variance(spec: &NoiseSpec) -> f64 {
    spec.dt() * spec.spectral_sum()
}

/// Exact second moment of `int_t^{t+h} n(s) ds`, which is independent of `t`:
/// `K^2 [C_0^2 h^2 / 2 + sum_m C_m^2 2 (1 - cos(w_m h)) / w_m^2]`.
///
/// Agrees with [`increment_variance`] only when the bin resolves the spectrum
/// (`w_m h << 1` wherever `C_m` is appreciable).
pub fn increment_second_moment(spec: &NoiseSpec, h: f64) -> f64 {
    let k = spec.scale();
    let c0 = spec.envelope(0.0);
    let tail: f64 = (1..=spec.frequency_count())
        .rev()
        .map(|m| {
            let w = spec.omega(m);
            let c = spec.envelope(w);
            let s = (0.5 * w * h).sin();
            // 2 (1 - cos x) = 4 sin^2(x/2)
            c * c * 4.0 * s * s / (w * w)
        })
        .sum();
    k * k * (0.5 * c0 * c0 * h * h + tail)
}

/// One sampled path of the noise process.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    spec: NoiseSpec,
    seed: u64,
    a: Vec<f64>,
    b: Vec<f64>,
    envelope: Vec<f64>,
    omega: Vec<f64>,
    /// Envelope values past this index underflow to zero.
    active: usize,
}

impl NoiseRealization {
    pub fn sample(spec: &NoiseSpec, seed: u64) -> Self {
        let nf = spec.frequency_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::with_capacity(nf);
        let mut b = Vec::with_capacity(nf + 1);
        b.push(StandardNormal.sample(&mut rng));
        for _ in 0..nf {
            a.push(StandardNormal.sample(&mut rng));
            b.push(StandardNormal.sample(&mut rng));
        }
        Self::assemble(*spec, seed, a, b)
    }

    /// Builds a realization from explicit coefficients; `a` has `N_f` entries
    /// (`a_1..a_{N_f}`) and `b` has `N_f + 1` (`b_0..b_{N_f}`).
    pub fn from_coefficients(spec: &NoiseSpec, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let nf = spec.frequency_count();
        if a.len() != nf || b.len() != nf + 1 {
            return Err(Error::argument(format!(
                "expected {nf} sine and {} cosine coefficients, got {} and {}",
                nf + 1,
                a.len(),
                b.len()
            )));
        }
        Ok(Self::assemble(*spec, 0, a, b))
    }

    fn assemble(spec: NoiseSpec, seed: u64, a: Vec<f64>, b: Vec<f64>) -> Self {
        let nf = spec.frequency_count();
        let omega: Vec<f64> = (0..=nf).map(|m| spec.omega(m)).collect();
        let envelope: Vec<f64> = omega.iter().map(|&w| spec.envelope(w)).collect();
        let active = envelope[1..]
            .iter()
            .rposition(|&c| c != 0.0)
            .map_or(0, |i| i + 1);
        NoiseRealization {
            spec,
            seed,
            a,
            b,
            envelope,
            omega,
            active,
        }
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sine coefficients `a_1..a_{N_f}`.
    pub fn sine_coefficients(&self) -> &[f64] {
        &self.a
    }

    /// Cosine coefficients `b_0..b_{N_f}`.
    pub fn cosine_coefficients(&self) -> &[f64] {
        &self.b
    }

    fn mean_level(&self) -> f64 {
        self.envelope[0] * self.b[0] / SQRT_2
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let mut sum = self.mean_level();
        for m in 1..=self.active {
            let (s, c) = (self.omega[m] * t).sin_cos();
            sum += self.envelope[m] * (self.a[m - 1] * s + self.b[m] * c);
        }
        self.spec.scale() * sum
    }

    /// Closed-form `int_{t0}^{t1} n(t) dt`.
    pub fn integrate(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0.is_nan() || t1.is_nan() || t0 > t1 {
            return Err(Error::argument(format!(
                "integration bounds out of order: {t0} > {t1}"
            )));
        }
        let h = t1 - t0;
        let mid = 0.5 * (t0 + t1);
        let mut sum = self.mean_level() * h;
        for m in 1..=self.active {
            let w = self.omega[m];
            let (sm, cm) = (w * mid).sin_cos();
            let half = (0.5 * w * h).sin();
            // cos(w t0) - cos(w t1) = 2 sin(w mid) sin(w h / 2)
            // sin(w t1) - sin(w t0) = 2 cos(w mid) sin(w h / 2)
            sum += self.envelope[m] * 2.0 * half * (self.a[m - 1] * sm + self.b[m] * cm) / w;
        }
        Ok(self.spec.scale() * sum)
    }

    /// `int_0^t n(s) ds`.
    pub fn integral_to(&self, t: f64) -> Result<f64> {
        if t >= 0.0 {
            self.integrate(0.0, t)
        } else {
            self.integrate(t, 0.0).map(|v| -v)
        }
    }

    /// `n(j dt)` for `j = 0..count`, computed from one inverse FFT over a
    /// period of `N - 1` levels.
    pub fn grid_values(&self, count: usize) -> Vec<f64> {
        let len = self.spec.levels() - 1;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[0] = Complex64::new(self.mean_level(), 0.0);
        let nf = self.spec.frequency_count();
        for (m, slot) in buf.iter_mut().enumerate().take(nf + 1).skip(1) {
            // Re[C (b - i a) e^{i w t}] = C (a sin(w t) + b cos(w t))
            *slot += self.envelope[m] * Complex64::new(self.b[m], -self.a[m - 1]);
        }
        FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
        let k = self.spec.scale();
        (0..count).map(|j| k * buf[j % len].re).collect()
    }
}

/// Normalized empirical autocorrelation of the noise.
///
/// For each realization `r` (seeded with `realization_seed(seed, r)`), and
/// each of [`AUTOCORRELATION_ORIGINS`] origins `t_0 = i / 64`, accumulates
/// `n(t_0) n(t_0 + lag)`; the ensemble-and-origin sums are divided by the
/// lag-zero sum. Products are raw (not mean-removed): the process has zero
/// mean by construction.
pub fn autocorrelation(
    spec: &NoiseSpec,
    lags: &[f64],
    ensemble_size: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if lags.is_empty() {
        return Err(Error::argument("autocorrelation needs at least one lag"));
    }
    if ensemble_size < 2 {
        return Err(Error::argument(format!(
            "ensemble size must be >= 2, got {ensemble_size}"
        )));
    }
    if let Some(bad) = lags.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::argument(format!(
            "lags must be nonnegative, got {bad}"
        )));
    }

    let origins: Vec<f64> = (0..AUTOCORRELATION_ORIGINS)
        .map(|i| i as f64 / AUTOCORRELATION_ORIGINS as f64)
        .collect();
    let partials: Vec<(f64, Vec<f64>)> = (0..ensemble_size as u64)
        .into_par_iter()
        .map(|r| {
            let noise = NoiseRealization::sample(spec, realization_seed(seed, r));
            let mut zero = 0.0;
            let mut sums = vec![0.0; lags.len()];
            for &t0 in &origins {
                let n0 = noise.evaluate(t0);
                zero += n0 * n0;
                for (acc, &lag) in sums.iter_mut().zip(lags) {
                    *acc += n0 * noise.evaluate(t0 + lag);
                }
            }
            (zero, sums)
        })
        .collect();

    // Sequential reduction keeps the result independent of the thread count.
    let mut zero = 0.0;
    let mut sums = vec![0.0; lags.len()];
    for (z, s) in &partials {
        zero += z;
        for (acc, v) in sums.iter_mut().zip(s) {
            *acc += v;
        }
    }
    Ok(lags
        .iter()
        .zip(sums)
        .map(|(&lag, s)| (lag, if lag == 0.0 { 1.0 } else { s / zero }))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EFolding {
    Reached(f64),
    /// The correlation stayed at or above `1/e` over every supplied lag.
    NotReached,
}

impl EFolding {
    /// The e-folding time, with `NotReached` mapped to infinity for ordering.
    pub fn as_time(self) -> f64 {
        match self {
            EFolding::Reached(t) => t,
            EFolding::NotReached => f64::INFINITY,
        }
    }
}

/// First lag at which the correlation drops below `1/e`, linearly
/// interpolated between the bracketing lags.
pub fn e_folding_time(autocorr: &[(f64, f64)]) -> Result<EFolding> {
    let threshold = (-1.0f64).exp();
    match autocorr.first() {
        None => return Err(Error::argument("empty autocorrelation")),
        Some(&(lag, _)) if lag != 0.0 => {
            return Err(Error::argument(format!(
                "autocorrelation must start at lag 0, starts at {lag}"
            )))
        }
        _ => {}
    }
    for pair in autocorr.windows(2) {
        let (l0, c0) = pair[0];
        let (l1, c1) = pair[1];
        if c1 < threshold {
            return Ok(EFolding::Reached(
                l0 + (c0 - threshold) / (c0 - c1) * (l1 - l0),
            ));
        }
    }
    Ok(EFolding::NotReached)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(alpha: f64, m: u32) -> NoiseSpec {
        NoiseSpec::for_step(alpha, StepSize::per_unit(m).unwrap()).unwrap()
    }

    #[test]
    fn rejects_invalid_specs() {
        for (levels, dt, field) in [
            (4, 0.1, "steps_per_unit"),
            (1, 0.1, "steps_per_unit"),
            (5, 0.0, "dt"),
        ] {
            match NoiseSpec::new(0.0, levels, dt) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected config error, got {other:?}"),
            }
        }
        assert!(NoiseSpec::new(-1.0, 5, 0.1).is_err());
    }

    #[test]
    fn frequencies_start_at_zero_and_increase() {
        let s = spec(1e-4, 94);
        assert_eq!(s.omega(0), 0.0);
        for m in 1..=s.frequency_count() {
            assert!(s.omega(m) > s.omega(m - 1));
        }
        assert_eq!(s.envelope(0.0), 1.0);
        assert!(s.envelope(s.omega(3)) > 0.0 && s.envelope(s.omega(3)) <= 1.0);
    }

    #[test]
    fn sampling_is_deterministic_with_expected_lengths() {
        let s = NoiseSpec::new(0.0, 5, 0.25).unwrap();
        let n1 = NoiseRealization::sample(&s, 42);
        let n2 = NoiseRealization::sample(&s, 42);
        assert_eq!(n1.sine_coefficients().len(), 2);
        assert_eq!(n1.cosine_coefficients().len(), 3);
        assert_eq!(n1.sine_coefficients(), n2.sine_coefficients());
        assert_eq!(n1.cosine_coefficients(), n2.cosine_coefficients());
        let n3 = NoiseRealization::sample(&s, 43);
        assert_ne!(n1.cosine_coefficients(), n3.cosine_coefficients());
    }

    #[test]
    fn zero_coefficients_give_zero_noise() {
        let s = spec(0.0, 10);
        let n = NoiseRealization::from_coefficients(&s, vec![0.0; 5], vec![0.0; 6]).unwrap();
        for t in [0.0, 0.13, 1.7, -3.0] {
            assert_eq!(n.evaluate(t), 0.0);
            assert_eq!(n.integral_to(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_dc_term() {
        let s = spec(0.3, 10);
        let mut b = vec![0.0; 6];
        b[0] = 1.0;
        let n = NoiseRealization::from_coefficients(&s, vec![0.0; 5], b).unwrap();
        let level = 1.0 / (SQRT_2 * (5.0 * 0.1f64).sqrt());
        for t in [0.0, 0.37, 2.0] {
            assert_abs_diff_eq!(n.evaluate(t), level, epsilon = 1e-15);
            assert_abs_diff_eq!(n.integrate(0.0, t).unwrap(), level * t, epsilon = 1e-15);
        }
    }

    #[test]
    fn integrate_rejects_reversed_bounds_and_empty_interval_is_zero() {
        let n = NoiseRealization::sample(&spec(0.0, 22), 1);
        assert!(matches!(n.integrate(1.0, 0.5), Err(Error::Argument(_))));
        assert_eq!(n.integrate(0.7, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn integrate_is_additive() {
        let n = NoiseRealization::sample(&spec(1e-5, 94), 9);
        let (a, b, c) = (0.11, 0.93, 3.4);
        let whole = n.integrate(a, c).unwrap();
        let split = n.integrate(a, b).unwrap() + n.integrate(b, c).unwrap();
        assert_abs_diff_eq!(whole, split, epsilon = 1e-12);
    }

    #[test]
    fn grid_values_match_direct_evaluation() {
        for &(alpha, m) in &[(0.0, 10), (1e-5, 94), (0.0, 190), (1.0, 46)] {
            let s = spec(alpha, m);
            let n = NoiseRealization::sample(&s, 5);
            let grid = n.grid_values(2 * m as usize + 1);
            // Direct evaluation loses a few ulps to phases of order 10^3 rad.
            for (j, v) in grid.iter().enumerate() {
                assert_abs_diff_eq!(*v, n.evaluate(j as f64 * s.dt()), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn increment_variance_small_case() {
        let s = NoiseSpec::new(0.0, 5, 0.1).unwrap();
        assert_abs_diff_eq!(increment_variance(&s), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn white_increment_variance_tends_to_dt() {
        let s = spec(0.0, 20_000);
        assert_abs_diff_eq!(increment_variance(&s) / s.dt(), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn second_moment_approaches_formula_when_resolved() {
        let s = spec(1e-4, 766);
        let exact = increment_second_moment(&s, s.dt());
        assert!((exact / increment_variance(&s) - 1.0).abs() < 1e-3);
        // White bins never resolve the top of the band.
        let w = spec(0.0, 766);
        let ratio = increment_second_moment(&w, w.dt()) / increment_variance(&w);
        assert!(ratio > 0.75 && ratio < 0.8, "ratio {ratio}");
    }

    #[test]
    fn e_folding_interpolates() {
        let ac = [(0.0, 1.0), (1.0, 0.5), (2.0, 0.2)];
        let expected = 1.0 + (0.5 - (-1.0f64).exp()) / 0.3;
        match e_folding_time(&ac).unwrap() {
            EFolding::Reached(t) => assert_abs_diff_eq!(t, expected, epsilon = 1e-15),
            other => panic!("{other:?}"),
        }
        assert_abs_diff_eq!(expected, 1.441, epsilon = 1e-3);
    }

    #[test]
    fn e_folding_not_reached() {
        let ac = [(0.0, 1.0), (1.0, 0.9), (2.0, 0.8)];
        assert_eq!(e_folding_time(&ac).unwrap(), EFolding::NotReached);
        assert!(e_folding_time(&[]).is_err());
        assert!(e_folding_time(&[(0.5, 1.0)]).is_err());
    }

    #[test]
    fn e_folding_of_exponential() {
        let ac: Vec<(f64, f64)> = (0..=300)
            .map(|i| {
                let tau = i as f64 * 0.01;
                (tau, (-tau).exp())
            })
            .collect();
        let t = e_folding_time(&ac).unwrap().as_time();
        assert!((t - 1.0).abs() < 0.01, "{t}");
    }

    #[test]
    fn autocorrelation_contract() {
        let s = spec(0.0, 46);
        assert!(autocorrelation(&s, &[], 10, 1).is_err());
        assert!(autocorrelation(&s, &[0.0], 1, 1).is_err());
        assert!(autocorrelation(&s, &[-0.1], 10, 1).is_err());
        let ac = autocorrelation(&s, &[0.0, s.dt()], 200, 1).unwrap();
        assert_eq!(ac[0], (0.0, 1.0));
        assert!(ac[1].1 < (-1.0f64).exp(), "{:?}", ac[1]);
    }
}
