//! Time stepping for `dF/dt = (D + rho n(t) H) F`.
//!
//! * forward Euler, optionally with the generalized Ito correction
//!   `(rho^2 / 2) S G F`;
//! * a decentered family: an Euler predictor over `lambda dt` gives the state
//!   at `t_j + lambda dt`, where the full right-hand side (with the noise
//!   increment `n(t_j) dt`) is then evaluated. `lambda = 0` is forward Euler,
//!   `lambda = 1/2` the explicit midpoint rule. The matching correction is
//!   `(1/2 - lambda) rho^2 S G F`;
//! * a Heun reference integrator that evaluates the noise as the smooth
//!   function it is, converging to the Stratonovich solution for resolvable
//!   (colored) noise.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use num_complex::Complex64;

use crate::correction::{check_lambda, CorrectionFactor};
use crate::error::{Error, Result};
use crate::noise::NoiseRealization;
use crate::spectral::{apply_generator, initial_state, ModelConfig, OperatorSet, SpectralState};
use crate::step::StepSize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    EulerForward,
    Decentered,
    MidpointReference,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::EulerForward => "euler_forward",
            SchemeKind::Decentered => "decentered",
            SchemeKind::MidpointReference => "midpoint_reference",
        }
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "euler_forward" | "euler" => Ok(SchemeKind::EulerForward),
            "decentered" => Ok(SchemeKind::Decentered),
            "midpoint_reference" | "reference" => Ok(SchemeKind::MidpointReference),
            other => Err(Error::config("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// A scheme without a step size, as listed in experiment configurations.
///
/// Text form: `kind[@lambda][+ito]`, e.g. `euler_forward`, `euler_forward+ito`,
/// `decentered@0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub kind: SchemeKind,
    /// Decentering parameter; always 0 for forward Euler.
    pub lambda: f64,
    pub corrected: bool,
}

impl Scheme {
    pub fn euler(corrected: bool) -> Self {
        Scheme {
            kind: SchemeKind::EulerForward,
            lambda: 0.0,
            corrected,
        }
    }

    pub fn decentered(lambda: f64, corrected: bool) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Scheme {
            kind: SchemeKind::Decentered,
            lambda,
            corrected,
        })
    }

    pub fn reference() -> Self {
        Scheme {
            kind: SchemeKind::MidpointReference,
            lambda: 0.5,
            corrected: false,
        }
    }

    pub fn with_step(self, step: StepSize) -> SchemeSpec {
        SchemeSpec { scheme: self, step }
    }

    /// Total order used when sorting records: kind, then lambda, then
    /// uncorrected before corrected.
    pub fn sort_key(&self) -> (SchemeKind, u64, bool) {
        (self.kind, self.lambda.to_bits(), self.corrected)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if self.kind == SchemeKind::Decentered {
            write!(f, "@{}", self.lambda)?;
        }
        if self.corrected {
            write!(f, "+ito")?;
        }
        Ok(())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, corrected) = match s.strip_suffix("+ito") {
            Some(body) => (body, true),
            None => (s, false),
        };
        let (kind, lambda) = match body.split_once('@') {
            Some((kind, lambda)) => {
                let lambda: f64 = lambda
                    .trim()
                    .parse()
                    .map_err(|_| Error::config("scheme", format!("bad lambda in `{s}`")))?;
                (kind.parse::<SchemeKind>()?, Some(lambda))
            }
            None => (body.parse::<SchemeKind>()?, None),
        };
        match kind {
            SchemeKind::EulerForward if lambda.is_some_and(|l| l != 0.0) => Err(Error::config(
                "scheme",
                "forward Euler has lambda = 0; use `decentered@lambda`",
            )),
            SchemeKind::EulerForward => Ok(Scheme::euler(corrected)),
            SchemeKind::Decentered => Scheme::decentered(lambda.unwrap_or(0.5), corrected),
            SchemeKind::MidpointReference if corrected => Err(Error::config(
                "scheme",
                "the reference integrator takes no correction",
            )),
            SchemeKind::MidpointReference => Ok(Scheme::reference()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub step: StepSize,
}

impl SchemeSpec {
    pub fn dt(&self) -> f64 {
        self.step.dt()
    }
}

/// Per-run diagnostics, collected by [`run_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// `max_t |F_k(t)|` per mode, in storage order.
    pub mode_peaks: Vec<f64>,
    /// Largest conjugate-symmetry residue seen over the run.
    pub symmetry_residue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub final_state: SpectralState,
    pub steps: usize,
    pub trace: Option<Trace>,
}

fn check_state(state: &SpectralState, ops: &OperatorSet) -> Result<()> {
    if state.coeffs.len() != ops.dimension() {
        return Err(Error::argument(format!(
            "state has {} modes, operators act on {}",
            state.coeffs.len(),
            ops.dimension()
        )));
    }
    Ok(())
}

/// One step of the decentered family; `lambda = 0` is forward Euler.
fn advance(
    f: &Array1<Complex64>,
    ops: &OperatorSet,
    rho: f64,
    noise_value: f64,
    correction: f64,
    lambda: f64,
    dt: f64,
) -> Array1<Complex64> {
    let strength = rho * noise_value;
    let mut rate = if lambda == 0.0 {
        apply_generator(f, ops, strength)
    } else {
        let mut stage = apply_generator(f, ops, strength);
        stage.mapv_inplace(|z| z * (lambda * dt));
        stage += f;
        apply_generator(&stage, ops, strength)
    };
    if correction != 0.0 {
        for ((r, g), v) in rate.iter_mut().zip(ops.correction_diag()).zip(f) {
            *r += v * (correction * g);
        }
    }
    let mut next = f.clone();
    next.scaled_add(Complex64::new(dt, 0.0), &rate);
    next
}

fn correction_coefficient(cfg: &ModelConfig, factor: &CorrectionFactor, lambda: f64) -> f64 {
    (0.5 - lambda) * cfg.rho * cfg.rho * factor.value()
}

/// `F + dt [D F + rho n(t_j) H F + corrected (rho^2 / 2) S G F]`, with
/// `noise_value = n(t_j)` taken at the left endpoint.
pub fn euler_step(
    state: &SpectralState,
    ops: &OperatorSet,
    cfg: &ModelConfig,
    noise_value: f64,
    factor: &CorrectionFactor,
    corrected: bool,
    dt: f64,
) -> Result<SpectralState> {
    decentered_step(state, ops, cfg, noise_value, factor, 0.0, corrected, dt)
}

/// Decentered step evaluating the right-hand side at the Euler-predicted state
/// for `t_j + lambda dt`; the noise increment stays `n(t_j) dt`.
#[allow(clippy::too_many_arguments)]
pub fn decentered_step(
    state: &SpectralState,
    ops: &OperatorSet,
    cfg: &ModelConfig,
    noise_value: f64,
    factor: &CorrectionFactor,
    lambda: f64,
    corrected: bool,
    dt: f64,
) -> Result<SpectralState> {
    check_lambda(lambda)?;
    check_state(state, ops)?;
    let correction = if corrected {
        correction_coefficient(cfg, factor, lambda)
    } else {
        0.0
    };
    Ok(SpectralState {
        coeffs: advance(
            &state.coeffs,
            ops,
            cfg.rho,
            noise_value,
            correction,
            lambda,
            dt,
        ),
        t: state.t + dt,
    })
}

fn heun_step(
    f: &Array1<Complex64>,
    ops: &OperatorSet,
    rho: f64,
    n_left: f64,
    n_right: f64,
    dt: f64,
) -> Array1<Complex64> {
    let k1 = apply_generator(f, ops, rho * n_left);
    let mut predictor = f.clone();
    predictor.scaled_add(Complex64::new(dt, 0.0), &k1);
    let k2 = apply_generator(&predictor, ops, rho * n_right);
    let mut next = f.clone();
    next.scaled_add(Complex64::new(0.5 * dt, 0.0), &k1);
    next.scaled_add(Complex64::new(0.5 * dt, 0.0), &k2);
    next
}

fn reference_guard(noise: &NoiseRealization) -> Result<()> {
    if noise.spec().alpha() == 0.0 {
        return Err(Error::argument(
            "white noise is not resolvable by a deterministic reference integrator; \
             use the analytic solution instead",
        ));
    }
    Ok(())
}

fn reference_steps(t_final: f64, dt_ref: f64) -> Result<usize> {
    if !(dt_ref.is_finite() && dt_ref > 0.0) {
        return Err(Error::argument(format!(
            "reference step must be > 0, got {dt_ref}"
        )));
    }
    let exact = t_final / dt_ref;
    let steps = exact.round();
    if steps < 1.0 || (exact - steps).abs() > 1e-6 {
        return Err(Error::config(
            "t_final",
            format!("T = {t_final} is not an integer multiple of dt_ref = {dt_ref}"),
        ));
    }
    Ok(steps as usize)
}

/// Heun integration from `t = 0` to `T` with the noise evaluated exactly at
/// both stage times. Refuses white noise.
pub fn reference_solve(
    cfg: &ModelConfig,
    ops: &OperatorSet,
    noise: &NoiseRealization,
    dt_ref: f64,
) -> Result<SpectralState> {
    reference_guard(noise)?;
    let steps = reference_steps(cfg.t_final, dt_ref)?;
    let initial = initial_state(cfg)?;
    check_state(&initial, ops)?;
    let mut f = initial.coeffs;
    let mut n_left = noise.evaluate(0.0);
    for j in 0..steps {
        let n_right = noise.evaluate((j + 1) as f64 * dt_ref);
        f = heun_step(&f, ops, cfg.rho, n_left, n_right, dt_ref);
        n_left = n_right;
        check_finite(&f, j)?;
    }
    Ok(SpectralState {
        coeffs: f,
        t: steps as f64 * dt_ref,
    })
}

fn check_finite(f: &Array1<Complex64>, step: usize) -> Result<()> {
    if f.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged {
            step,
            reason: "non-finite mode coefficient".into(),
        })
    }
}

/// Integrates from `t = 0` to `cfg.t_final`.
pub fn run(
    cfg: &ModelConfig,
    scheme: &SchemeSpec,
    noise: &NoiseRealization,
    ops: &OperatorSet,
    factor: &CorrectionFactor,
) -> Result<TrajectoryResult> {
    integrate(cfg, scheme, noise, ops, factor, false)
}

/// As [`run`], also recording per-mode peaks and the symmetry residue.
pub fn run_traced(
    cfg: &ModelConfig,
    scheme: &SchemeSpec,
    noise: &NoiseRealization,
    ops: &OperatorSet,
    factor: &CorrectionFactor,
) -> Result<TrajectoryResult> {
    integrate(cfg, scheme, noise, ops, factor, true)
}

fn integrate(
    cfg: &ModelConfig,
    scheme: &SchemeSpec,
    noise: &NoiseRealization,
    ops: &OperatorSet,
    factor: &CorrectionFactor,
    traced: bool,
) -> Result<TrajectoryResult> {
    let steps = scheme.step.steps_to(cfg.t_final)?;
    let dt = scheme.dt();
    let initial = initial_state(cfg)?;
    check_state(&initial, ops)?;

    let spec = noise.spec();
    if scheme.scheme.kind != SchemeKind::MidpointReference
        && (spec.levels() != scheme.step.noise_levels() || spec.dt() != dt)
    {
        return Err(Error::argument(format!(
            "noise resolved with N = {}, dt = {} does not match step {}",
            spec.levels(),
            spec.dt(),
            scheme.step
        )));
    }
    let Scheme {
        kind,
        lambda,
        corrected,
    } = scheme.scheme;
    check_lambda(lambda)?;

    let mut trace = traced.then(|| Trace {
        mode_peaks: initial.coeffs.iter().map(|z| z.norm()).collect(),
        symmetry_residue: initial.symmetry_residue(),
    });
    let mut f = initial.coeffs;
    let mut observe = |f: &Array1<Complex64>| {
        if let Some(trace) = trace.as_mut() {
            for (peak, z) in trace.mode_peaks.iter_mut().zip(f) {
                *peak = peak.max(z.norm());
            }
            let n = f.len();
            for i in 0..n {
                let r = (f[n - 1 - i] - f[i].conj()).norm();
                trace.symmetry_residue = trace.symmetry_residue.max(r);
            }
        }
    };

    match kind {
        SchemeKind::EulerForward | SchemeKind::Decentered => {
            let correction = if corrected {
                correction_coefficient(cfg, factor, lambda)
            } else {
                0.0
            };
            let values = noise.grid_values(steps);
            for (j, &n) in values.iter().enumerate() {
                f = advance(&f, ops, cfg.rho, n, correction, lambda, dt);
                check_finite(&f, j)?;
                observe(&f);
            }
        }
        SchemeKind::MidpointReference => {
            reference_guard(noise)?;
            let mut n_left = noise.evaluate(0.0);
            for j in 0..steps {
                let n_right = noise.evaluate((j + 1) as f64 * dt);
                f = heun_step(&f, ops, cfg.rho, n_left, n_right, dt);
                n_left = n_right;
                check_finite(&f, j)?;
                observe(&f);
            }
        }
    }

    Ok(TrajectoryResult {
        final_state: SpectralState {
            coeffs: f,
            t: steps as f64 * dt,
        },
        steps,
        trace,
    })
}
