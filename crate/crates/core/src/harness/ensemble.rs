use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::correction::spectral_factor;
use crate::error::{Error, Result};
use crate::integrators::{run, Scheme};
use crate::noise::{NoiseRealization, NoiseSpec};
use crate::oracle::exact_solution;
use crate::seed::realization_seed;
use crate::spectral::{build_operators, SpectralState};
use crate::step::StepSize;

use super::ExperimentConfig;

/// Error of one scheme on one noise realization at `t_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub alpha: f64,
    pub step: StepSize,
    pub scheme: Scheme,
    pub realization: usize,
    pub l2_error: f64,
}

/// Ensemble statistics for one `(alpha, dt, scheme)` cell. `std_error` is the
/// sample standard deviation of the member errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub alpha: f64,
    pub step: StepSize,
    pub scheme: Scheme,
    pub mean_error: f64,
    pub std_error: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub alpha: f64,
    pub step: StepSize,
    pub scheme: Scheme,
    pub realization: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct EnsembleOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub aggregates: Vec<Aggregate>,
    pub failures: Vec<CellFailure>,
}

/// `sqrt(2 pi sum_k |a_k - b_k|^2)`, the L2 distance over one period.
pub fn l2_error(numeric: &SpectralState, exact: &SpectralState) -> Result<f64> {
    if numeric.coeffs.len() != exact.coeffs.len() {
        return Err(Error::argument(format!(
            "cannot compare {} modes with {}",
            numeric.coeffs.len(),
            exact.coeffs.len()
        )));
    }
    let sum: f64 = numeric
        .coeffs
        .iter()
        .zip(exact.coeffs.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((2.0 * PI * sum).sqrt())
}

pub(crate) fn cell_order(a: (f64, StepSize, &Scheme), b: (f64, StepSize, &Scheme)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1.dt().total_cmp(&b.1.dt()))
        .then_with(|| a.2.sort_key().cmp(&b.2.sort_key()))
}

pub(crate) fn record_order(a: &ConvergenceRecord, b: &ConvergenceRecord) -> Ordering {
    cell_order((a.alpha, a.step, &a.scheme), (b.alpha, b.step, &b.scheme))
        .then(a.realization.cmp(&b.realization))
}

/// Groups records by cell and computes mean and sample standard deviation,
/// summing in realization order. Sorts `records` in place.
pub fn aggregate(records: &mut [ConvergenceRecord]) -> Vec<Aggregate> {
    records.sort_by(record_order);
    records
        .chunk_by(|a, b| {
            cell_order((a.alpha, a.step, &a.scheme), (b.alpha, b.step, &b.scheme)).is_eq()
        })
        .map(|cell| {
            let n = cell.len();
            let mean = cell.iter().map(|r| r.l2_error).sum::<f64>() / n as f64;
            let std = if n > 1 {
                let ss: f64 = cell.iter().map(|r| (r.l2_error - mean).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            Aggregate {
                alpha: cell[0].alpha,
                step: cell[0].step,
                scheme: cell[0].scheme,
                mean_error: mean,
                std_error: std,
                n,
            }
        })
        .collect()
}

type CellResult = std::result::Result<ConvergenceRecord, CellFailure>;

/// Runs every `(alpha, dt, realization)` task in parallel. One noise sample
/// and one exact solution are shared by all schemes of a task. Output order
/// does not depend on the worker count.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleOutcome> {
    cfg.validate()?;
    let ops = build_operators(&cfg.model)?;

    let mut tasks = Vec::new();
    for &alpha in &cfg.alphas {
        for &step in &cfg.dts {
            NoiseSpec::for_step(alpha, step)?;
            for r in 0..cfg.realizations {
                tasks.push((alpha, step, r));
            }
        }
    }

    let results: Vec<Vec<CellResult>> = tasks
        .par_iter()
        .map(|&(alpha, step, realization)| {
            let spec = NoiseSpec::for_step(alpha, step).expect("validated above");
            let noise = NoiseRealization::sample(
                &spec,
                realization_seed(cfg.base_seed, realization as u64),
            );
            let factor = spectral_factor(&spec);
            let exact = exact_solution(&cfg.model, &ops, &noise, cfg.model.t_final);
            cfg.schemes
                .iter()
                .map(|scheme| {
                    let fail = |message: String| CellFailure {
                        alpha,
                        step,
                        scheme: *scheme,
                        realization,
                        message,
                    };
                    let exact = exact.as_ref().map_err(|e| fail(e.to_string()))?;
                    let out = run(&cfg.model, &scheme.with_step(step), &noise, &ops, &factor)
                        .map_err(|e| fail(e.to_string()))?;
                    let l2 = l2_error(&out.final_state, exact).map_err(|e| fail(e.to_string()))?;
                    Ok(ConvergenceRecord {
                        alpha,
                        step,
                        scheme: *scheme,
                        realization,
                        l2_error: l2,
                    })
                })
                .collect()
        })
        .collect();

    let mut outcome = EnsembleOutcome::default();
    for result in results.into_iter().flatten() {
        match result {
            Ok(record) => outcome.records.push(record),
            Err(failure) => outcome.failures.push(failure),
        }
    }
    outcome.aggregates = aggregate(&mut outcome.records);
    Ok(outcome)
}

impl EnsembleOutcome {
    pub fn find(&self, alpha: f64, step: StepSize, scheme: &Scheme) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.alpha == alpha && a.step == step && a.scheme == *scheme)
    }
}
