use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;

use super::fit::{fit_rate, upper_bound_curve, Quantity};
use super::plot::loglog_svg;
use super::SweepOutcome;
use crate::collapse::CollapseReport;
use crate::error::Result;
use crate::field::write_snapshot;
use crate::townes::TownesConstants;

/// Header line of `reports.csv`.
pub const REPORT_COLUMNS: &str = CollapseReport::CSV_HEADER;

type Plot<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

const FITTED: [Quantity; 4] = [Quantity::Energy, Quantity::Eps, Quantity::Mu, Quantity::Mass];

/// Writes `reports.csv`, `fits.json`, one snapshot per kept field and the
/// log-log plots into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, outcome: &SweepOutcome, constants: &TownesConstants) -> Result<()> {
    fs::create_dir_all(dir)?;
    let a_star = outcome.a_star;
    let reports = outcome.reports();

    let mut csv = BufWriter::new(fs::File::create(dir.join("reports.csv"))?);
    writeln!(csv, "{REPORT_COLUMNS}")?;
    for r in &reports {
        writeln!(csv, "{}", r.csv_row(a_star))?;
    }
    csv.flush()?;

    let mut fits = Vec::new();
    let mut fit_errors = serde_json::Map::new();
    for q in FITTED {
        match fit_rate(&reports, q, a_star) {
            Ok(f) => fits.push(f),
            Err(e) => {
                fit_errors.insert(q.name().to_string(), json!(e.to_string()));
            }
        }
    }
    let fracs: Vec<f64> = reports.iter().map(|r| r.a / a_star).collect();
    let bounds = upper_bound_curve(constants, &fracs);
    let upper: Vec<_> = reports
        .iter()
        .zip(&bounds)
        .map(|(r, b)| json!({"omega": r.omega, "a_frac": r.a / a_star, "energy": r.energy, "upper_bound": b}))
        .collect();
    let failures: Vec<_> = outcome
        .points
        .iter()
        .filter(|p| p.report.is_none())
        .map(|p| json!({"omega": p.omega, "a_frac": p.a / a_star, "error": p.error}))
        .collect();
    let doc = json!({
        "a_star": a_star,
        "energy_ratio_limit": constants.energy_ratio_limit(),
        "beta_limit": constants.beta_limit(),
        "fits": fits,
        "fit_errors": fit_errors,
        "upper_bound": upper,
        "failures": failures,
    });
    fs::write(dir.join("fits.json"), serde_json::to_string_pretty(&doc)? + "\n")?;

    for (i, p) in outcome.points.iter().enumerate() {
        if let Some(field) = &p.field {
            let file = BufWriter::new(fs::File::create(dir.join(format!("point_{i:03}.f2d1")))?);
            write_snapshot(field, file)?;
        }
    }

    let series = |f: &dyn Fn(&CollapseReport) -> f64| -> Vec<(f64, f64)> {
        reports.iter().map(|r| (a_star - r.a, f(r))).collect()
    };
    let plots: [Plot; 3] = [
        ("energy_ratio", "E / (a* - a)^1/2", series(&|r| r.energy_ratio)),
        ("eps", "eps", series(&|r| r.eps)),
        ("eps2_mu", "|eps^2 mu|", series(&|r| r.eps2_mu.abs())),
    ];
    for (name, ylabel, pts) in plots {
        if let Some(svg) = loglog_svg(name, "a* - a", ylabel, &pts) {
            fs::write(dir.join(format!("{name}.svg")), svg)?;
        }
    }
    Ok(())
}
