//! Fixtures shared by the benchmarks.

use colored_ito::spectral::build_operators;
use colored_ito::{ModelConfig, NoiseRealization, NoiseSpec, OperatorSet, StepSize};

pub struct Fixture {
    pub model: ModelConfig,
    pub ops: OperatorSet,
    pub step: StepSize,
    pub noise: NoiseRealization,
}

pub fn fixture(epsilon: f64, n_x: u32, alpha: f64, per_unit: u32) -> Fixture {
    let model = ModelConfig {
        epsilon,
        n_x,
        ..ModelConfig::default()
    };
    let ops = build_operators(&model).expect("valid model");
    let step = StepSize::per_unit(per_unit).expect("even step count");
    let spec = NoiseSpec::for_step(alpha, step).expect("valid noise");
    let noise = NoiseRealization::sample(&spec, 7);
    Fixture {
        model,
        ops,
        step,
        noise,
    }
}
