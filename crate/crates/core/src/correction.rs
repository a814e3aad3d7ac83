//! The generalized Ito correction.
//!
//! An Ito-type discretization of `du = D(u) dt + g(u) dR` drifts away from the
//! Stratonovich solution by `1/2 g g' E[(dR)^2]` per step. For the colored
//! noise of [`crate::noise`], `E[(dR)^2] = dt * S` with the spectral factor
//!
//! ```text
//! S = (1/N_f) [C(w_0)^2 / 2 + sum_{m=1}^{N_f} C(w_m)^2]
//! ```
//!
//! evaluated at the simulation's own finite `N_f`. White noise gives
//! `S = 1 + 1/(2 N_f)`, recovering the classical correction as `N_f` grows;
//! strongly colored noise gives `S -> 1/(2 N_f)`, the DC term alone.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::NoiseSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionFactor {
    value: f64,
    spec: NoiseSpec,
}

impl CorrectionFactor {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }
}

pub fn spectral_factor(spec: &NoiseSpec) -> CorrectionFactor {
    CorrectionFactor {
        value: spec.spectral_sum(),
        spec: *spec,
    }
}

/// Differential-form correction `1/2 g g' S` for a scalar equation.
pub fn scalar_correction(g_value: f64, dg_du: f64, factor: &CorrectionFactor) -> f64 {
    0.5 * g_value * dg_du * factor.value
}

/// Correction `(1/2 - lambda) g g' S` for a scheme evaluating the noise term
/// at `t_j + lambda dt`.
pub fn decentered_correction(
    g_value: f64,
    dg_du: f64,
    factor: &CorrectionFactor,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((0.5 - lambda) * g_value * dg_du * factor.value)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::argument(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )))
    }
}

/// Linear multiplicative coupling `g_il(u) = (G_l u)_i`, one square matrix per
/// independent noise channel `l`.
#[derive(Debug, Clone)]
pub struct LinearNoiseCoupling {
    channels: Vec<Array2<Complex64>>,
}

impl LinearNoiseCoupling {
    pub fn new(channels: Vec<Array2<Complex64>>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::argument("coupling needs at least one channel"));
        };
        let n = first.nrows();
        for (l, g) in channels.iter().enumerate() {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::argument(format!(
                    "channel {l} is {}x{}, expected {n}x{n}",
                    g.nrows(),
                    g.ncols()
                )));
            }
        }
        Ok(LinearNoiseCoupling { channels })
    }

    pub fn dimension(&self) -> usize {
        self.channels[0].nrows()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Array2<Complex64>] {
        &self.channels
    }
}

/// Vector correction `1/2 sum_l S_l sum_k (dg_il/du_k) g_kl`, which for linear
/// couplings is `1/2 sum_l S_l (G_l^2 u)_i`.
pub fn vector_correction(
    coupling: &LinearNoiseCoupling,
    u: &Array1<Complex64>,
    factors: &[CorrectionFactor],
) -> Result<Array1<Complex64>> {
    if u.len() != coupling.dimension() {
        return Err(Error::argument(format!(
            "state has {} components, coupling acts on {}",
            u.len(),
            coupling.dimension()
        )));
    }
    if factors.len() != coupling.channel_count() {
        return Err(Error::argument(format!(
            "{} correction factors for {} channels",
            factors.len(),
            coupling.channel_count()
        )));
    }
    let mut out = Array1::zeros(u.len());
    for (g, factor) in coupling.channels.iter().zip(factors) {
        let gu = g.dot(u);
        out.scaled_add(Complex64::new(0.5 * factor.value, 0.0), &g.dot(&gu));
    }
    Ok(out)
}
