//! Independent numerical oracles for the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use colored_ito::SpectralState;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// Trapezoid rule for a periodic integrand on `[0, 2 pi)` with `n` points.
pub fn periodic_trapezoid(values: &[f64]) -> f64 {
    2.0 * std::f64::consts::PI * values.iter().sum::<f64>() / values.len() as f64
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Plain truncated Taylor series of `exp(m)`.
pub fn taylor_exp(m: &Array2<Complex64>, terms: usize) -> Array2<Complex64> {
    let n = m.nrows();
    let mut sum = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for j in 1..terms {
        term = term.dot(m) / Complex64::new(j as f64, 0.0);
        sum += &term;
    }
    sum
}

/// A random conjugate-symmetric mode vector.
pub fn random_real_state(n_x: u32, seed: u64) -> SpectralState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SpectralState::zeros(n_x, 0.0);
    let n = n_x as usize;
    s.coeffs[n] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
    for k in 1..=n {
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        s.coeffs[n + k] = z;
        s.coeffs[n - k] = z.conj();
    }
    s
}
