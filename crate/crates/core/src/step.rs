use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A time step `dt = 1/M` tied to a noise resolution of `N = M + 1` time
/// levels per unit time.
///
/// `M` must be even so that the frequency count `(N - 1) / 2` is an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepSize {
    per_unit: u32,
}

impl StepSize {
    pub fn per_unit(per_unit: u32) -> Result<Self> {
        if per_unit < 2 || !per_unit.is_multiple_of(2) {
            return Err(Error::config(
                "dt",
                format!("1/dt must be an even integer >= 2, got {per_unit}"),
            ));
        }
        Ok(StepSize { per_unit })
    }

    /// Recovers the step from a decimal value, which must sit within 1e-9
    /// (relative) of `1/M` for an even `M`.
    pub fn from_dt(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config("dt", format!("must be positive, got {dt}")));
        }
        let inv = 1.0 / dt;
        let m = inv.round();
        if (inv - m).abs() > 1e-9 * m || m > u32::MAX as f64 {
            return Err(Error::config(
                "dt",
                format!("1/dt = {inv} is not an integer"),
            ));
        }
        Self::per_unit(m as u32)
    }

    /// Steps per unit time, `M = 1/dt`.
    pub fn steps_per_unit(self) -> u32 {
        self.per_unit
    }

    /// Noise time levels per unit time including both endpoints, `M + 1`.
    pub fn noise_levels(self) -> usize {
        self.per_unit as usize + 1
    }

    pub fn dt(self) -> f64 {
        1.0 / self.per_unit as f64
    }

    /// Number of steps needed to reach `t_final`, rejecting non-integral counts.
    pub fn steps_to(self, t_final: f64) -> Result<usize> {
        let exact = t_final * self.per_unit as f64;
        let steps = exact.round();
        if steps < 1.0 || (exact - steps).abs() > 1e-9 * exact.max(1.0) {
            return Err(Error::config(
                "t_final",
                format!(
                    "T = {t_final} is not an integer multiple of dt = 1/{}",
                    self.per_unit
                ),
            ));
        }
        Ok(steps as usize)
    }

    /// The sweep grid `M_0 = 10`, `M_{i+1} = 2 M_i + 2`, which roughly halves
    /// the step while keeping every `M` even.
    pub fn halving_grid(count: usize) -> Vec<StepSize> {
        let mut m = 10u32;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(StepSize { per_unit: m });
            m = 2 * m + 2;
        }
        out
    }
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.per_unit)
    }
}

/// Accepts either `1/M` or a decimal step size.
impl FromStr for StepSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(denominator) = s.strip_prefix("1/") {
            let m: u32 = denominator
                .trim()
                .parse()
                .map_err(|_| Error::config("dt", format!("cannot parse `{s}`")))?;
            return StepSize::per_unit(m);
        }
        let dt: f64 = s
            .parse()
            .map_err(|_| Error::config("dt", format!("cannot parse `{s}`")))?;
        StepSize::from_dt(dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_matches_documented_values() {
        let grid: Vec<u32> = StepSize::halving_grid(7)
            .into_iter()
            .map(StepSize::steps_per_unit)
            .collect();
        assert_eq!(grid, vec![10, 22, 46, 94, 190, 382, 766]);
    }

    #[test]
    fn parses_fraction_and_decimal() {
        assert_eq!("1/22".parse::<StepSize>().unwrap().steps_per_unit(), 22);
        assert_eq!("0.1".parse::<StepSize>().unwrap().steps_per_unit(), 10);
        assert_eq!(
            StepSize::from_dt(1.0 / 766.0).unwrap().steps_per_unit(),
            766
        );
    }

    #[test]
    fn rejects_odd_or_non_integral() {
        assert!("1/11".parse::<StepSize>().is_err());
        assert!("0.3".parse::<StepSize>().is_err());
        assert!("0.03".parse::<StepSize>().is_err());
        assert!("-0.1".parse::<StepSize>().is_err());
    }

    #[test]
    fn step_counts() {
        let s = StepSize::per_unit(100).unwrap();
        assert_eq!(s.steps_to(2.0).unwrap(), 200);
        assert!(StepSize::per_unit(10).unwrap().steps_to(0.25).is_err());
    }
}
