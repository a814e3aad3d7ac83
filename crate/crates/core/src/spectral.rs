//! Fourier representation of the periodic advection-diffusion test problem
//!
//! ```text
//! u_t = -[c + (eps/2) cos x] u_x + mu u_xx + rho u_x n(t),   x in [0, 2 pi)
//! ```
//!
//! truncated to modes `k = -N_x..=N_x`. Mode vectors are ordered from
//! `k = -N_x` (index 0) up to `k = N_x`. In matrix form
//! `dF/dt = (D + rho n(t) H) F`, with `D` tridiagonal and `H = i Diag(k)`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::correction::spectral_factor;
use crate::error::{Error, Result};
use crate::integrators::{run_traced, Scheme};
use crate::noise::{NoiseRealization, NoiseSpec};
use crate::step::StepSize;

/// Imaginary residue allowed when summing a mode vector back to a real field.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Mean advection speed.
    pub c: f64,
    /// Diffusivity.
    pub mu: f64,
    /// Amplitude of the `cos x` velocity perturbation.
    pub epsilon: f64,
    /// Noise coupling strength, `g(u) = rho u_x`.
    pub rho: f64,
    /// Wavenumber of the initial cosine.
    pub k0: u32,
    /// Truncation wavenumber.
    pub n_x: u32,
    pub t_final: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            c: 1.0,
            mu: 0.1,
            epsilon: 0.0,
            rho: 0.2,
            k0: 1,
            n_x: 1,
            t_final: 2.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("c", self.c), ("epsilon", self.epsilon), ("rho", self.rho)] {
            if !v.is_finite() {
                return Err(Error::config(field, format!("must be finite, got {v}")));
            }
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::config(
                "mu",
                format!("must be >= 0, got {}", self.mu),
            ));
        }
        if self.n_x < 1 {
            return Err(Error::config("n_x", "must be >= 1"));
        }
        if self.k0 > self.n_x {
            return Err(Error::config(
                "k0",
                format!(
                    "initial wavenumber {} exceeds truncation {}",
                    self.k0, self.n_x
                ),
            ));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::config(
                "t_final",
                format!("must be > 0, got {}", self.t_final),
            ));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        2 * self.n_x as usize + 1
    }

    pub fn with_truncation(mut self, n_x: u32) -> Self {
        self.n_x = n_x;
        self
    }
}

/// Wavenumbers `-n_x..=n_x` in storage order.
pub fn wavenumbers(n_x: u32) -> impl Iterator<Item = i64> {
    let n = n_x as i64;
    -n..=n
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub coeffs: Array1<Complex64>,
    pub t: f64,
}

impl SpectralState {
    pub fn zeros(n_x: u32, t: f64) -> Self {
        SpectralState {
            coeffs: Array1::zeros(2 * n_x as usize + 1),
            t,
        }
    }

    pub fn n_x(&self) -> u32 {
        (self.coeffs.len() / 2) as u32
    }

    fn index(&self, k: i64) -> Option<usize> {
        let n = self.n_x() as i64;
        (-n..=n).contains(&k).then(|| (k + n) as usize)
    }

    /// Coefficient of mode `k`; zero outside the truncation.
    pub fn mode(&self, k: i64) -> Complex64 {
        self.index(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `max_k |F_{-k} - conj(F_k)|`, zero for a real field.
    pub fn symmetry_residue(&self) -> f64 {
        let n = self.coeffs.len();
        (0..n)
            .map(|i| (self.coeffs[n - 1 - i] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `u(x) = sum_k F_k exp(i k x)` at each point, real part.
    pub fn reconstruct(&self, x_points: &[f64]) -> Result<Vec<f64>> {
        let n_x = self.n_x();
        x_points
            .iter()
            .map(|&x| {
                let u: Complex64 = wavenumbers(n_x)
                    .zip(self.coeffs.iter())
                    .map(|(k, f)| f * Complex64::from_polar(1.0, k as f64 * x))
                    .sum();
                if u.im.abs() > RECONSTRUCTION_TOLERANCE {
                    Err(Error::Numerical(format!(
                        "field at x = {x} has imaginary part {:e}",
                        u.im
                    )))
                } else {
                    Ok(u.re)
                }
            })
            .collect()
    }
}

/// `F_{k0} = F_{-k0} = 1/2`, so that `u(x, 0) = cos(k0 x)`.
pub fn initial_state(cfg: &ModelConfig) -> Result<SpectralState> {
    cfg.validate()?;
    let mut state = SpectralState::zeros(cfg.n_x, 0.0);
    let n = cfg.n_x as usize;
    let k0 = cfg.k0 as usize;
    if k0 == 0 {
        state.coeffs[n] = Complex64::new(1.0, 0.0);
    } else {
        state.coeffs[n + k0] = Complex64::new(0.5, 0.0);
        state.coeffs[n - k0] = Complex64::new(0.5, 0.0);
    }
    Ok(state)
}

/// Drift `D`, noise coupling `H = i Diag(k)` and correction `G = H^2 = Diag(-k^2)`.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub drift: Array2<Complex64>,
    pub noise: Array2<Complex64>,
    pub correction: Array2<f64>,
    noise_diag: Array1<Complex64>,
    correction_diag: Array1<f64>,
}

impl OperatorSet {
    pub fn dimension(&self) -> usize {
        self.drift.nrows()
    }

    pub fn n_x(&self) -> u32 {
        (self.dimension() / 2) as u32
    }

    /// Diagonal of `H`.
    pub fn noise_diag(&self) -> &Array1<Complex64> {
        &self.noise_diag
    }

    /// Diagonal of `G`.
    pub fn correction_diag(&self) -> &Array1<f64> {
        &self.correction_diag
    }

    pub fn is_diagonal(&self) -> bool {
        self.drift
            .indexed_iter()
            .all(|((i, j), v)| i == j || *v == Complex64::new(0.0, 0.0))
    }
}

pub fn build_operators(cfg: &ModelConfig) -> Result<OperatorSet> {
    cfg.validate()?;
    let n = cfg.modes();
    let quarter_eps = cfg.epsilon / 4.0;
    let mut drift = Array2::zeros((n, n));
    let mut noise = Array2::zeros((n, n));
    let mut correction = Array2::zeros((n, n));
    for (i, k) in wavenumbers(cfg.n_x).enumerate() {
        let kf = k as f64;
        drift[[i, i]] = Complex64::new(-cfg.mu * kf * kf, -cfg.c * kf);
        if i + 1 < n {
            drift[[i, i + 1]] = -I * ((kf + 1.0) * quarter_eps);
        }
        if i > 0 {
            drift[[i, i - 1]] = -I * ((kf - 1.0) * quarter_eps);
        }
        noise[[i, i]] = I * kf;
        correction[[i, i]] = -kf * kf;
    }
    let noise_diag = noise.diag().to_owned();
    let correction_diag = correction.diag().to_owned();
    Ok(OperatorSet {
        drift,
        noise,
        correction,
        noise_diag,
        correction_diag,
    })
}

/// `(D + rho n H) F`.
pub fn rhs(
    state: &SpectralState,
    ops: &OperatorSet,
    rho: f64,
    noise_value: f64,
) -> Result<Array1<Complex64>> {
    if state.coeffs.len() != ops.dimension() {
        return Err(Error::argument(format!(
            "state has {} modes, operators act on {}",
            state.coeffs.len(),
            ops.dimension()
        )));
    }
    Ok(apply_generator(&state.coeffs, ops, rho * noise_value))
}

/// `D f + strength H f`, with `H` applied through its diagonal.
pub(crate) fn apply_generator(
    f: &Array1<Complex64>,
    ops: &OperatorSet,
    strength: f64,
) -> Array1<Complex64> {
    let mut out = ops.drift.dot(f);
    for ((o, h), v) in out.iter_mut().zip(ops.noise_diag.iter()).zip(f.iter()) {
        *o += h * v * strength;
    }
    out
}

/// Squared L2 norm of the field represented by `coeffs` over one period.
pub fn field_energy(coeffs: &Array1<Complex64>) -> f64 {
    2.0 * PI * coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Settings for the probe simulation behind [`choose_truncation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationProbe {
    /// Truncation used for the probe run; must exceed any plausible answer.
    pub n_x: u32,
    pub step: StepSize,
    /// Color of the probe noise. White noise excites the most modes.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for TruncationProbe {
    fn default() -> Self {
        TruncationProbe {
            n_x: 16,
            step: StepSize::per_unit(190).expect("even step count"),
            alpha: 0.0,
            seed: 0x5EED,
        }
    }
}

/// Smallest `N_x >= k0` such that `max_t |F_k(t)| < threshold` for every
/// `|k| > N_x` in a probe run with [`TruncationProbe::default`].
pub fn choose_truncation(cfg: &ModelConfig, threshold: f64) -> Result<u32> {
    choose_truncation_with(cfg, threshold, &TruncationProbe::default())
}

pub fn choose_truncation_with(
    cfg: &ModelConfig,
    threshold: f64,
    probe: &TruncationProbe,
) -> Result<u32> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::argument(format!(
            "threshold must be > 0, got {threshold}"
        )));
    }
    if probe.n_x <= cfg.k0 {
        return Err(Error::Probe(format!(
            "probe truncation {} must exceed k0 = {}",
            probe.n_x, cfg.k0
        )));
    }
    let probe_cfg = cfg.with_truncation(probe.n_x);
    let ops = build_operators(&probe_cfg)?;
    let spec = NoiseSpec::for_step(probe.alpha, probe.step)?;
    let noise = NoiseRealization::sample(&spec, probe.seed);
    let factor = spectral_factor(&spec);
    let scheme = Scheme::euler(true).with_step(probe.step);
    let result = run_traced(&probe_cfg, &scheme, &noise, &ops, &factor)
        .map_err(|e| Error::Probe(format!("probe simulation failed: {e}")))?;
    let peaks = result.trace.expect("traced run").mode_peaks;

    let n = probe.n_x as usize;
    // Largest peak over +k and -k.
    let peak = |k: usize| peaks[n + k].max(peaks[n - k]);
    if peak(n) >= threshold {
        return Err(Error::Probe(format!(
            "mode |k| = {n} reaches {:.3e} >= {threshold:e}; increase the probe truncation",
            peak(n)
        )));
    }
    let mut chosen = probe.n_x;
    while chosen > cfg.k0 && peak(chosen as usize) < threshold {
        chosen -= 1;
    }
    Ok(chosen)
}
