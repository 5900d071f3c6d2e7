//! Golden-file regression: compare a run's outputs against a checked-in
//! golden directory, cell by cell, within per-column tolerances declared in
//! the golden manifest (absent tolerance means exact bytes).

use super::RunManifest;
use crate::error::{Error, Result};
use crate::trace::SpectrumTrace;
use std::path::Path;

fn within(a: f64, b: f64, tol: f64) -> bool {
    if tol == 0.0 {
        a == b || (a.is_nan() && b.is_nan())
    } else {
        (a - b).abs() <= tol
    }
}

/// Compare the outputs referenced by `manifest_file` against the goldens in
/// `golden_dir`. Returns `Ok(())` on a clean match and `GoldenMismatch`
/// listing every offending cell otherwise.
pub fn diff_golden(manifest_file: &Path, golden_dir: &Path) -> Result<()> {
    let run_dir = manifest_file.parent().unwrap_or_else(|| Path::new("."));
    let manifest = RunManifest::from_text(&std::fs::read_to_string(manifest_file)?)?;
    let golden_manifest_path = golden_dir.join(format!("{}.manifest", manifest.scenario));
    let golden = RunManifest::from_text(&std::fs::read_to_string(&golden_manifest_path)?)?;

    let mut report = Vec::new();
    if manifest.scenario != golden.scenario {
        report.push(format!(
            "scenario id: run {} vs golden {}",
            manifest.scenario, golden.scenario
        ));
    }
    if manifest.seed != golden.seed {
        report.push(format!("seed: run {} vs golden {}", manifest.seed, golden.seed));
    }
    let axis_tol = golden.tolerances.get("axis").copied().unwrap_or(0.0);
    let value_tol = golden.tolerances.get("value").copied().unwrap_or(0.0);

    for (name, golden_file) in &golden.outputs {
        let Some(run_file) = manifest.outputs.get(name) else {
            report.push(format!("output {name}: missing from run"));
            continue;
        };
        let run_bytes = std::fs::read(run_dir.join(run_file))?;
        let golden_bytes = std::fs::read(golden_dir.join(golden_file))?;
        if axis_tol == 0.0 && value_tol == 0.0 {
            if run_bytes != golden_bytes {
                // locate the first differing cell for the report
                describe_cell_diffs(name, &run_bytes, &golden_bytes, 0.0, 0.0, &mut report)?;
            }
            continue;
        }
        describe_cell_diffs(name, &run_bytes, &golden_bytes, axis_tol, value_tol, &mut report)?;
    }
    for name in manifest.outputs.keys() {
        if !golden.outputs.contains_key(name) {
            report.push(format!("output {name}: not present in golden manifest"));
        }
    }
    for (key, golden_v) in &golden.results {
        let tol = golden
            .tolerances
            .get(&format!("result.{key}"))
            .copied()
            .unwrap_or(0.0);
        match manifest.results.get(key) {
            None => report.push(format!("result {key}: missing from run")),
            Some(v) if !within(*v, *golden_v, tol) => report.push(format!(
                "result {key}: run {v:e} vs golden {golden_v:e} (tol {tol:e})"
            )),
            _ => {}
        }
    }

    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::GoldenMismatch {
            report: report.join("\n"),
        })
    }
}

fn describe_cell_diffs(
    name: &str,
    run_bytes: &[u8],
    golden_bytes: &[u8],
    axis_tol: f64,
    value_tol: f64,
    report: &mut Vec<String>,
) -> Result<()> {
    let parse = |bytes: &[u8], which: &str| -> Result<SpectrumTrace> {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::CsvFormat(format!("{which} {name}: not UTF-8")))?;
        SpectrumTrace::from_csv(text)
    };
    let run = parse(run_bytes, "run")?;
    let gold = parse(golden_bytes, "golden")?;
    if run.axis.len() != gold.axis.len() {
        report.push(format!(
            "output {name}: row count {} vs golden {}",
            run.axis.len(),
            gold.axis.len()
        ));
        return Ok(());
    }
    let mut shown = 0;
    for i in 0..run.axis.len() {
        let bad_axis = !within(run.axis[i], gold.axis[i], axis_tol);
        let bad_value = !within(run.values[i], gold.values[i], value_tol);
        if bad_axis || bad_value {
            if shown < 5 {
                report.push(format!(
                    "output {name} row {i}: run ({:e}, {:e}) vs golden ({:e}, {:e})",
                    run.axis[i], run.values[i], gold.axis[i], gold.values[i]
                ));
            }
            shown += 1;
        }
    }
    if shown > 5 {
        report.push(format!("output {name}: {} differing rows in total", shown));
    }
    if shown == 0 && (axis_tol == 0.0 && value_tol == 0.0) && run_bytes != golden_bytes {
        report.push(format!(
            "output {name}: byte difference outside the data rows (metadata?)"
        ));
    }
    Ok(())
}
