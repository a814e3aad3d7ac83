use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrators::Scheme;
use crate::spectral::ModelConfig;
use crate::step::StepSize;

/// A convergence sweep: every combination of color, step and scheme, each over
/// `realizations` noise samples.
///
/// The text form is one `key = value` per line, `#` starts a comment and
/// lists are comma separated:
///
/// ```text
/// epsilon = 0
/// nx = 1
/// alphas = 0, 1e-6, 1
/// dts = 1/10, 1/22, 1/46
/// schemes = euler_forward, euler_forward+ito
/// realizations = 100
/// seed = 2024
/// output = fig1.csv
/// ```
///
/// Model keys (`c`, `mu`, `epsilon`, `rho`, `k0`, `nx`, `t_final`) default to
/// [`ModelConfig::default`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub alphas: Vec<f64>,
    pub dts: Vec<StepSize>,
    pub schemes: Vec<Scheme>,
    pub realizations: usize,
    pub base_seed: u64,
    pub output_path: PathBuf,
    /// Number of finest steps used when estimating convergence orders.
    pub order_window: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig::default(),
            alphas: vec![0.0],
            dts: StepSize::halving_grid(7),
            schemes: vec![Scheme::euler(false), Scheme::euler(true)],
            realizations: 100,
            base_seed: 0,
            output_path: PathBuf::from("convergence.csv"),
            order_window: 4,
        }
    }
}

fn list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn number<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{}`", value.trim())))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::argument(format!(
                    "line {}: expected `key = value`",
                    lineno + 1
                )));
            };
            let value = value.trim();
            match key.trim() {
                "c" => cfg.model.c = number("c", value)?,
                "mu" => cfg.model.mu = number("mu", value)?,
                "epsilon" => cfg.model.epsilon = number("epsilon", value)?,
                "rho" => cfg.model.rho = number("rho", value)?,
                "k0" => cfg.model.k0 = number("k0", value)?,
                "nx" => cfg.model.n_x = number("nx", value)?,
                "t_final" => cfg.model.t_final = number("t_final", value)?,
                "alphas" => cfg.alphas = list(value, |s| number("alphas", s))?,
                "dts" => cfg.dts = list(value, str::parse)?,
                "schemes" => cfg.schemes = list(value, str::parse)?,
                "realizations" => cfg.realizations = number("realizations", value)?,
                "seed" => cfg.base_seed = number("seed", value)?,
                "output" => cfg.output_path = PathBuf::from(value),
                "order_window" => cfg.order_window = number("order_window", value)?,
                other => {
                    return Err(Error::argument(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.alphas.is_empty() {
            return Err(Error::config("alphas", "at least one value required"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::config("alphas", format!("must be >= 0, got {a}")));
        }
        if self.dts.is_empty() {
            return Err(Error::config("dts", "at least one value required"));
        }
        for dt in &self.dts {
            dt.steps_to(self.model.t_final)?;
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one value required"));
        }
        if self.realizations < 2 {
            return Err(Error::config(
                "realizations",
                format!("need at least 2, got {}", self.realizations),
            ));
        }
        if self.order_window < 3 {
            return Err(Error::config("order_window", "need at least 3 points"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nepsilon = 1e-3\nnx = 5  # five modes\nalphas = 0, 1e-6,1\n\
             dts = 1/10, 0.045454545454545456\nschemes = euler_forward, decentered@0.25+ito\n\
             realizations = 7\nseed = 99\noutput = out/x.csv\n",
        )
        .unwrap();
        assert_eq!(cfg.model.epsilon, 1e-3);
        assert_eq!(cfg.model.n_x, 5);
        assert_eq!(cfg.alphas, vec![0.0, 1e-6, 1.0]);
        assert_eq!(cfg.dts[1].steps_per_unit(), 22);
        assert_eq!(cfg.schemes[1].lambda, 0.25);
        assert!(cfg.schemes[1].corrected);
        assert_eq!(cfg.realizations, 7);
        assert_eq!(cfg.base_seed, 99);
        assert_eq!(cfg.output_path, PathBuf::from("out/x.csv"));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "realizations = 1",
            "dts = 1/11",
            "dts = 0.3",
            "alphas = -1",
            "bogus = 3",
            "nx",
            "schemes = rk4",
            "alphas =",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn missing_file_names_path() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/fig.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/fig.cfg"));
    }
}
