use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrators::Scheme;

use super::ensemble::cell_order;
use super::Aggregate;

/// Writes a gnuplot script with one log-log panel per scheme: mean error
/// against dt for every color, standard-deviation error bars, and reference
/// slopes 1/2 and 1. Data are embedded as one inline block per color; each
/// block holds one section per scheme, selected with `index`.
pub fn write_plot_script(aggregates: &[Aggregate], path: &Path) -> Result<()> {
    let script = plot_script(aggregates)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, script).map_err(|e| Error::io(path, e))
}

pub(crate) fn plot_script(aggregates: &[Aggregate]) -> Result<String> {
    if aggregates.is_empty() {
        return Err(Error::argument("nothing to plot"));
    }
    let mut sorted = aggregates.to_vec();
    sorted.sort_by(|a, b| cell_order((a.alpha, a.step, &a.scheme), (b.alpha, b.step, &b.scheme)));

    let mut alphas: Vec<f64> = sorted.iter().map(|a| a.alpha).collect();
    alphas.dedup();
    let mut schemes: Vec<Scheme> = Vec::new();
    for a in &sorted {
        if !schemes.contains(&a.scheme) {
            schemes.push(a.scheme);
        }
    }
    schemes.sort_by_key(Scheme::sort_key);

    let max_dt = sorted.iter().map(|a| a.step.dt()).fold(0.0, f64::max);
    let top = sorted.iter().map(|a| a.mean_error).fold(0.0, f64::max);
    let anchor = if top > 0.0 { top } else { 1.0 };

    let mut s = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(s, "set terminal pngcairo size {},480", 560 * schemes.len());
    let _ = writeln!(s, "set output 'convergence.png'");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set format xy '10^{{%L}}'");
    let _ = writeln!(s, "set xlabel 'dt'");
    let _ = writeln!(s, "set ylabel 'mean L2 error'");
    let _ = writeln!(s, "set key bottom right");
    let _ = writeln!(s, "ref_half(x) = {anchor:e} * (x / {max_dt:e})**0.5");
    let _ = writeln!(s, "ref_one(x) = {anchor:e} * (x / {max_dt:e})");
    s.push('\n');

    for (i, &alpha) in alphas.iter().enumerate() {
        let _ = writeln!(s, "$alpha{i} << EOD");
        let _ = writeln!(s, "# alpha = {alpha:e}; dt mean_error std_error");
        for (j, scheme) in schemes.iter().enumerate() {
            if j > 0 {
                s.push_str("\n\n");
            }
            let _ = writeln!(s, "# {scheme}");
            for a in sorted
                .iter()
                .filter(|a| a.alpha == alpha && a.scheme == *scheme)
            {
                let _ = writeln!(
                    s,
                    "{:.16e} {:.16e} {:.16e}",
                    a.step.dt(),
                    a.mean_error,
                    a.std_error
                );
            }
        }
        let _ = writeln!(s, "EOD");
    }
    s.push('\n');

    let _ = writeln!(s, "set multiplot layout 1,{}", schemes.len());
    for (j, scheme) in schemes.iter().enumerate() {
        let _ = writeln!(s, "set title '{scheme}'");
        let mut series: Vec<String> = alphas
            .iter()
            .enumerate()
            .filter(|(_, &alpha)| sorted.iter().any(|a| a.alpha == alpha && a.scheme == *scheme))
            .map(|(i, alpha)| {
                format!(
                    "$alpha{i} index {j} using 1:2:3 with yerrorlines lt {} pt {} title 'alpha = {alpha:e}'",
                    i + 1,
                    i + 4
                )
            })
            .collect();
        series.push("ref_half(x) with lines dt 2 lc 'gray' title 'slope 0.5'".into());
        series.push("ref_one(x) with lines dt 3 lc 'gray' title 'slope 1'".into());
        let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    }
    let _ = writeln!(s, "unset multiplot");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::StepSize;

    fn agg(alpha: f64, m: u32, scheme: Scheme) -> Aggregate {
        Aggregate {
            alpha,
            step: StepSize::per_unit(m).unwrap(),
            scheme,
            mean_error: 1.0 / m as f64,
            std_error: 0.1 / m as f64,
            n: 10,
        }
    }

    #[test]
    fn one_alpha_three_dts() {
        let aggs: Vec<_> = [10, 22, 46]
            .map(|m| agg(0.0, m, Scheme::euler(true)))
            .to_vec();
        let s = plot_script(&aggs).unwrap();
        assert_eq!(s.matches("<< EOD").count(), 1);
        assert_eq!(s.matches("ref_half(x) =").count(), 1);
        assert_eq!(s.matches("ref_one(x) =").count(), 1);
        assert_eq!(s.matches("with yerrorlines").count(), 1);
    }

    #[test]
    fn five_alphas_get_distinct_styles() {
        let aggs: Vec<_> = [0.0, 1e-6, 1e-5, 1e-4, 1.0]
            .iter()
            .flat_map(|&a| [10, 22, 46].map(|m| agg(a, m, Scheme::euler(false))))
            .collect();
        let s = plot_script(&aggs).unwrap();
        assert_eq!(s.matches("<< EOD").count(), 5);
        for i in 1..=5 {
            assert_eq!(s.matches(&format!("lt {i} ")).count(), 1);
        }
        assert!(plot_script(&[]).is_err());
    }
}
