//! Per-realization exact solutions used as the error baseline.
//!
//! With constant velocity each mode evolves independently and the noise only
//! rotates its phase:
//! `F_k(t) = F_k(0) exp[-(i c k + mu k^2) t + i rho k beta_t]`,
//! where `beta_t` is the exact integral of the noise.
//!
//! With the `cos x` perturbation the modes couple, and the baseline is
//! `F(t) = exp(D t + rho beta_t H) F(0)`. `D` and `H` do not commute when
//! `epsilon != 0`, so this expression differs from the time-ordered solution by
//! commutator terms of order `epsilon`; [`composition_gap`] and the reference
//! integrator quantify that gap.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::NoiseRealization;
use crate::spectral::{initial_state, wavenumbers, ModelConfig, OperatorSet, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixExponentialParams {
    /// Relative truncation threshold for the Taylor series of the scaled matrix.
    pub tolerance: f64,
}

impl Default for MatrixExponentialParams {
    fn default() -> Self {
        MatrixExponentialParams { tolerance: 1e-12 }
    }
}

const MAX_TERMS: usize = 60;

fn one_norm(m: &Array2<Complex64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(M)` by scaling and squaring.
///
/// The matrix is scaled by `2^-s` until its 1-norm is at most 1/2; the Taylor
/// series of the scaled matrix is summed until a term's 1-norm falls below
/// `min(tolerance * 2^-s, machine epsilon)` relative to the partial sum, then
/// the result is squared `s` times.
pub fn matrix_exponential(
    m: &Array2<Complex64>,
    params: &MatrixExponentialParams,
) -> Result<Array2<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::argument(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if params.tolerance.is_nan() || params.tolerance <= 0.0 {
        return Err(Error::argument("matrix exponential tolerance must be > 0"));
    }
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numerical(
            "matrix exponential of non-finite matrix".into(),
        ));
    }
    let norm = one_norm(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m * Complex64::new(2f64.powi(-squarings), 0.0);
    // Each squaring at most doubles the relative error.
    let target = params.tolerance * 2f64.powi(-squarings);

    let mut sum = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    let mut converged = false;
    for j in 1..=MAX_TERMS {
        term = term.dot(&scaled) / Complex64::new(j as f64, 0.0);
        sum += &term;
        if one_norm(&term) <= target.min(f64::EPSILON) * one_norm(&sum) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(
            "matrix exponential series did not converge".into(),
        ));
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    Ok(sum)
}

/// Exact solution for `epsilon = 0`, evaluated mode by mode.
pub fn exact_constant_velocity(
    cfg: &ModelConfig,
    noise: &NoiseRealization,
    t: f64,
) -> Result<SpectralState> {
    if cfg.epsilon != 0.0 {
        return Err(Error::WrongOracle(format!(
            "constant-velocity solution requested with epsilon = {}",
            cfg.epsilon
        )));
    }
    let initial = initial_state(cfg)?;
    if t == 0.0 {
        return Ok(initial);
    }
    let beta = noise.integral_to(t)?;
    let mut state = initial;
    for (k, f) in wavenumbers(cfg.n_x).zip(state.coeffs.iter_mut()) {
        let kf = k as f64;
        let exponent = Complex64::new(-cfg.mu * kf * kf * t, -cfg.c * kf * t + cfg.rho * kf * beta);
        *f *= exponent.exp();
    }
    state.t = t;
    Ok(state)
}

/// `exp(D t + rho beta_t H) F(0)` for any `epsilon`.
pub fn exact_varying_velocity(
    cfg: &ModelConfig,
    ops: &OperatorSet,
    noise: &NoiseRealization,
    t: f64,
    params: &MatrixExponentialParams,
) -> Result<SpectralState> {
    let initial = initial_state(cfg)?;
    check_dimension(ops, &initial)?;
    let beta = noise.integral_to(t)?;
    let generator = exponent(ops, t, cfg.rho * beta);
    let propagator = matrix_exponential(&generator, params)?;
    Ok(SpectralState {
        coeffs: propagator.dot(&initial.coeffs),
        t,
    })
}

fn exponent(ops: &OperatorSet, t: f64, phase: f64) -> Array2<Complex64> {
    &ops.drift * Complex64::new(t, 0.0) + &ops.noise * Complex64::new(phase, 0.0)
}

fn check_dimension(ops: &OperatorSet, state: &SpectralState) -> Result<()> {
    if ops.dimension() != state.coeffs.len() {
        return Err(Error::argument(format!(
            "operators act on {} modes, model has {}",
            ops.dimension(),
            state.coeffs.len()
        )));
    }
    Ok(())
}

/// Dispatches to the constant-velocity solution when `epsilon = 0` and to the
/// matrix exponential otherwise.
pub fn exact_solution(
    cfg: &ModelConfig,
    ops: &OperatorSet,
    noise: &NoiseRealization,
    t: f64,
) -> Result<SpectralState> {
    if cfg.epsilon == 0.0 {
        exact_constant_velocity(cfg, noise, t)
    } else {
        exact_varying_velocity(cfg, ops, noise, t, &MatrixExponentialParams::default())
    }
}

/// L2 distance (via Parseval) between the closed form over `[0, t]` and its
/// composition over `[0, t/2]` then `[t/2, t]`. Zero up to rounding when
/// `D` and `H` commute, i.e. when `epsilon = 0`.
pub fn composition_gap(
    cfg: &ModelConfig,
    ops: &OperatorSet,
    noise: &NoiseRealization,
    t: f64,
) -> Result<f64> {
    let params = MatrixExponentialParams::default();
    let whole = exact_varying_velocity(cfg, ops, noise, t, &params)?;
    let half = exact_varying_velocity(cfg, ops, noise, 0.5 * t, &params)?;
    let second_phase = cfg.rho * noise.integrate(0.5 * t, t)?;
    let second = matrix_exponential(&exponent(ops, 0.5 * t, second_phase), &params)?;
    let composed = SpectralState {
        coeffs: second.dot(&half.coeffs),
        t,
    };
    crate::harness::l2_error(&composed, &whole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpec;
    use crate::spectral::build_operators;
    use crate::step::StepSize;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let e = matrix_exponential(&Array2::zeros((4, 4)), &Default::default()).unwrap();
        assert_eq!(e, Array2::eye(4));
    }

    #[test]
    fn nilpotent_series_terminates() {
        let m = ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
        let e = matrix_exponential(&m, &Default::default()).unwrap();
        let expected = ndarray::arr2(&[[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        for (a, b) in e.iter().zip(expected.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn diagonal_exponential() {
        let d = [c(-3.0, 2.0), c(0.5, -7.0), c(0.0, 0.0), c(-0.1, 40.0)];
        let m = Array2::from_diag(&ndarray::arr1(&d));
        let e = matrix_exponential(&m, &Default::default()).unwrap();
        for (i, z) in d.iter().enumerate() {
            let want = z.exp();
            let err = (e[[i, i]] - want).norm() / want.norm().max(1.0);
            // Seven squarings for the 40i entry, each roughly doubling the rounding error.
            assert!(err <= 1e-13, "{i}: {err:e}");
        }
        for ((i, j), z) in e.indexed_iter() {
            if i != j {
                assert!(z.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matrix_exponential(&Array2::zeros((2, 3)), &Default::default()).is_err());
    }

    #[test]
    fn constant_velocity_without_noise_coupling() {
        let cfg = ModelConfig {
            rho: 0.0,
            ..ModelConfig::default()
        };
        let spec = NoiseSpec::for_step(0.0, StepSize::per_unit(10).unwrap()).unwrap();
        let noise = NoiseRealization::sample(&spec, 1);
        let s = exact_constant_velocity(&cfg, &noise, 2.0).unwrap();
        assert_abs_diff_eq!(s.mode(1).norm(), 0.5 * (-0.2f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.mode(1).norm(), 0.409365, epsilon = 1e-6);
        let s0 = exact_constant_velocity(&cfg, &noise, 0.0).unwrap();
        assert_eq!(s0, initial_state(&cfg).unwrap());
    }

    #[test]
    fn wrong_oracle_guard() {
        let cfg = ModelConfig {
            epsilon: 1e-3,
            ..ModelConfig::default()
        };
        let spec = NoiseSpec::for_step(0.0, StepSize::per_unit(10).unwrap()).unwrap();
        let noise = NoiseRealization::sample(&spec, 1);
        assert!(matches!(
            exact_constant_velocity(&cfg, &noise, 1.0),
            Err(Error::WrongOracle(_))
        ));
    }

    #[test]
    fn noise_acts_as_pure_phase() {
        let cfg = ModelConfig::default();
        let spec = NoiseSpec::for_step(0.0, StepSize::per_unit(94).unwrap()).unwrap();
        let moduli: Vec<f64> = (0..100)
            .map(|seed| {
                let noise = NoiseRealization::sample(&spec, seed);
                exact_constant_velocity(&cfg, &noise, 2.0)
                    .unwrap()
                    .mode(1)
                    .norm()
            })
            .collect();
        let (lo, hi) = moduli
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &m| (lo.min(m), hi.max(m)));
        assert!(hi - lo < 1e-12);
    }

    #[test]
    fn matrix_oracle_agrees_with_modal_oracle_when_uncoupled() {
        let cfg = ModelConfig {
            n_x: 4,
            ..ModelConfig::default()
        };
        let ops = build_operators(&cfg).unwrap();
        let spec = NoiseSpec::for_step(1e-5, StepSize::per_unit(94).unwrap()).unwrap();
        for seed in 0..5 {
            let noise = NoiseRealization::sample(&spec, seed);
            let a = exact_constant_velocity(&cfg, &noise, 2.0).unwrap();
            let b = exact_varying_velocity(&cfg, &ops, &noise, 2.0, &Default::default()).unwrap();
            for (x, y) in a.coeffs.iter().zip(b.coeffs.iter()) {
                assert!((x - y).norm() < 1e-12);
            }
            assert!(composition_gap(&cfg, &ops, &noise, 2.0).unwrap() < 1e-12);
        }
    }
}
