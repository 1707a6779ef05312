//! The on-disk contract of a run: CSV files and the JSON manifest.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.json          — config echo, termination, fits, predictions
//! origin.csv             — columns t,f0_t
//! slices/t_<time>.csv    — columns r,f[,f_ellipse][,f_parabola]
//! table.csv              — sweep aggregate (one row per case)
//! ```
//!
//! Every float is written with 17 significant digits so parsing the file
//! back reproduces the exact bits; identical configurations therefore
//! produce byte-identical CSVs. The only non-reproducible field anywhere is
//! the manifest's `wall_seconds`.

use crate::config::RunDocument;
use crate::fit::{ComparisonReport, EllipseFit, ParabolaFit};
use crate::model::GeodesicPrediction;
use crate::stepper::{RunConfig, RunRecord};
use serde::Serialize;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Full round-trip precision: 17 significant digits.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// Slice file name for a snapshot time: `t_<time>.csv` with the time printed
/// to microsecond precision and trailing zeros trimmed (`t_40.csv`,
/// `t_40.5.csv`). Snapshot times are multiples of the time step, so six
/// decimals identify them uniquely for any sane step size.
pub fn slice_filename(t: f64) -> String {
    let printed = format!("{t:.6}");
    let printed = printed.trim_end_matches('0').trim_end_matches('.');
    format!("t_{printed}.csv")
}

/// Origin trace: one `t,f0_t` row per time step.
pub fn write_origin_csv(path: &Path, trace: &[(f64, f64)]) -> io::Result<()> {
    let mut out = String::with_capacity(trace.len() * 48 + 16);
    out.push_str("t,f0_t\n");
    for &(t, f0_t) in trace {
        out.push_str(&full_precision(t));
        out.push(',');
        out.push_str(&full_precision(f0_t));
        out.push('\n');
    }
    write_atomically(path, out.as_bytes())
}

/// Optional overlay columns for a slice file.
#[derive(Debug, Clone, Copy, Default)]
pub struct SliceOverlays<'a> {
    /// Fitted ellipse, evaluated on its upper branch (NaN beyond the edge).
    pub ellipse: Option<&'a EllipseFit>,
    /// Predicted parabolic profile p·r² + a(t−T)² at this slice's time.
    pub parabola: Option<(crate::model::ParabolicAnsatz, f64)>,
}

/// One spatial profile: `r,f` rows, with `f_ellipse` / `f_parabola` columns
/// appended when the corresponding overlay is available.
pub fn write_slice_csv(
    path: &Path,
    radii: impl Iterator<Item = f64>,
    values: &[f64],
    overlays: SliceOverlays<'_>,
) -> io::Result<()> {
    let mut header = String::from("r,f");
    if overlays.ellipse.is_some() {
        header.push_str(",f_ellipse");
    }
    if overlays.parabola.is_some() {
        header.push_str(",f_parabola");
    }
    header.push('\n');

    let mut out = String::with_capacity(values.len() * 72 + header.len());
    out.push_str(&header);
    for (r, &f) in radii.zip(values) {
        out.push_str(&full_precision(r));
        out.push(',');
        out.push_str(&full_precision(f));
        if let Some(ellipse) = overlays.ellipse {
            let inside = 1.0 - (r / ellipse.a_axis) * (r / ellipse.a_axis);
            let y = if inside >= 0.0 {
                ellipse.k_center + ellipse.b_axis * inside.sqrt()
            } else {
                f64::NAN
            };
            out.push(',');
            out.push_str(&full_precision(y));
        }
        if let Some((ansatz, t)) = overlays.parabola {
            out.push(',');
            out.push_str(&full_precision(ansatz.value(r, t)));
        }
        out.push('\n');
    }
    write_atomically(path, out.as_bytes())
}

/// One row of the sweep aggregate table. Fit fields are `None` when the case
/// failed or produced nothing fittable; they are written as `NaN` so every
/// row keeps the full column set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub f0: f64,
    pub v0: f64,
    pub a_fit: Option<f64>,
    pub t_fit: Option<f64>,
    pub a_pred: Option<f64>,
    pub t_pred: Option<f64>,
    pub rel_err_a: Option<f64>,
    pub rel_err_t: Option<f64>,
}

impl TableRow {
    /// Pull the row out of a finished run's comparison report.
    pub fn from_report(config: &RunConfig, report: &ComparisonReport) -> Self {
        Self {
            f0: config.f0,
            v0: config.v0,
            a_fit: report.origin.as_ref().map(|fit| fit.a),
            t_fit: report.origin.as_ref().map(|fit| fit.t_blowup),
            a_pred: report.predicted.map(|p| p.a),
            t_pred: report.predicted.map(|p| p.t_blowup),
            rel_err_a: report.rel_err_a,
            rel_err_t: report.rel_err_t,
        }
    }

    /// Row for a case whose run never produced a report: predictions still
    /// come from the configuration, fits stay empty.
    pub fn failed(config: &RunConfig) -> Self {
        let predicted = crate::model::geodesic_prediction(config.f0, config.v0).ok();
        Self {
            f0: config.f0,
            v0: config.v0,
            a_fit: None,
            t_fit: None,
            a_pred: predicted.map(|p| p.a),
            t_pred: predicted.map(|p| p.t_blowup),
            rel_err_a: None,
            rel_err_t: None,
        }
    }
}

/// Aggregate table: `f0,v0,a_fit,T_fit,a_pred,T_pred,rel_err_a,rel_err_T`.
pub fn write_table_csv(path: &Path, rows: &[TableRow]) -> io::Result<()> {
    let cell = |v: Option<f64>| full_precision(v.unwrap_or(f64::NAN));
    let mut out = String::with_capacity(rows.len() * 200 + 64);
    out.push_str("f0,v0,a_fit,T_fit,a_pred,T_pred,rel_err_a,rel_err_T\n");
    for row in rows {
        let fields = [
            full_precision(row.f0),
            full_precision(row.v0),
            cell(row.a_fit),
            cell(row.t_fit),
            cell(row.a_pred),
            cell(row.t_pred),
            cell(row.rel_err_a),
            cell(row.rel_err_t),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_atomically(path, out.as_bytes())
}

/// Everything a finished run reports about itself.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: ToolStamp,
    pub config: RunDocument,
    /// Why the run stopped, in the same words the library uses.
    pub termination: String,
    /// Number of time steps taken.
    pub steps: usize,
    /// Origin-trace quadratic fit; absent when nothing was fittable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<OriginFitSummary>,
    /// Adiabatic-limit prediction; absent for stationary runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<PredictionSummary>,
    /// |a_fit − a_pred| / |a_pred|.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err_a: Option<f64>,
    /// |T_fit − T_pred| / |T_pred|.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err_t: Option<f64>,
    /// Wall-clock duration of the evolution plus analysis. The one field
    /// that varies between otherwise identical runs.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolStamp {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolStamp {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OriginFitSummary {
    pub a: f64,
    pub t_blowup: f64,
    pub rms_residual: f64,
    pub n_points: usize,
    pub c0_consistency: f64,
}

impl From<&ParabolaFit> for OriginFitSummary {
    fn from(fit: &ParabolaFit) -> Self {
        Self {
            a: fit.a,
            t_blowup: fit.t_blowup,
            rms_residual: fit.rms_residual,
            n_points: fit.n_points,
            c0_consistency: fit.c0_consistency,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PredictionSummary {
    pub a: f64,
    pub t_blowup: f64,
}

impl From<GeodesicPrediction> for PredictionSummary {
    fn from(p: GeodesicPrediction) -> Self {
        Self {
            a: p.a,
            t_blowup: p.t_blowup,
        }
    }
}

impl Manifest {
    pub fn new(record: &RunRecord, report: &ComparisonReport, wall_seconds: f64) -> Self {
        Self {
            tool: ToolStamp::current(),
            config: RunDocument::from_config(&record.config, None),
            termination: record.termination.to_string(),
            steps: record.origin_trace.len().saturating_sub(1),
            fit: report.origin.as_ref().map(OriginFitSummary::from),
            predicted: report.predicted.map(PredictionSummary::from),
            rel_err_a: report.rel_err_a,
            rel_err_t: report.rel_err_t,
            wall_seconds,
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    text.push('\n');
    write_atomically(path, text.as_bytes())
}

/// Write a complete run to `dir`: manifest, origin trace, and one slice file
/// per recorded snapshot (plain `r,f` columns — overlays belong to the
/// slices command, which chooses its own times).
pub fn write_run(
    dir: &Path,
    record: &RunRecord,
    report: &ComparisonReport,
    wall_seconds: f64,
) -> io::Result<()> {
    fs::create_dir_all(dir.join("slices"))?;
    write_manifest(
        &dir.join("manifest.json"),
        &Manifest::new(record, report, wall_seconds),
    )?;
    write_origin_csv(&dir.join("origin.csv"), &record.origin_trace)?;
    let grid = record
        .config
        .grid()
        .map_err(|e| io::Error::other(e.to_string()))?;
    for snapshot in &record.snapshots {
        let path = dir.join("slices").join(slice_filename(snapshot.t));
        write_slice_csv(
            &path,
            (0..grid.n_points()).map(|i| grid.r(i)),
            &snapshot.values,
            SliceOverlays::default(),
        )?;
    }
    Ok(())
}

/// Index of requested slice times: which were written and which fell beyond
/// the run's termination. Columns: `t_requested,status,file`.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceStatus {
    Written { t_snapshot: f64, file: String },
    Absent,
}

pub fn write_slice_index(path: &Path, entries: &[(f64, SliceStatus)]) -> io::Result<()> {
    let mut out = String::from("t_requested,status,file\n");
    for (t, status) in entries {
        out.push_str(&full_precision(*t));
        match status {
            SliceStatus::Written { file, .. } => {
                out.push_str(",written,");
                out.push_str(file);
            }
            SliceStatus::Absent => out.push_str(",absent,"),
        }
        out.push('\n');
    }
    write_atomically(path, out.as_bytes())
}

/// Write via a sibling temp file + rename so a crash never leaves a
/// half-written artifact behind.
fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp: PathBuf = match path.file_name() {
        Some(name) => {
            let mut tmp_name = name.to_os_string();
            tmp_name.push(".tmp");
            path.with_file_name(tmp_name)
        }
        None => return Err(io::Error::other(format!("{} has no file name", path.display()))),
    };
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::compare_run;
    use crate::model::ModelKind;
    use crate::stepper::{run, RunConfig};

    #[test]
    fn floats_round_trip_through_the_csv_format() {
        for x in [
            0.1,
            -0.000_025_01,
            1.0 / 3.0,
            2.0_f64.powi(-40) * 0.7,
            199.123_456_789_012_345,
        ] {
            let printed = full_precision(x);
            assert_eq!(printed.parse::<f64>().unwrap(), x, "via {printed}");
        }
        assert!(full_precision(f64::NAN).contains("NaN"));
    }

    #[test]
    fn slice_filenames_are_short_and_unambiguous() {
        assert_eq!(slice_filename(0.0), "t_0.csv");
        assert_eq!(slice_filename(40.0), "t_40.csv");
        assert_eq!(slice_filename(40.5), "t_40.5.csv");
        assert_eq!(slice_filename(0.125), "t_0.125.csv");
        // Times come from step_index·dt, so rounding noise must not leak
        // into the name.
        assert_eq!(slice_filename(6.000000000000001), "t_6.csv");
    }

    #[test]
    fn origin_csv_has_header_and_full_precision_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("origin.csv");
        let trace = vec![(0.0, 1.0), (0.001, 0.999_999_999_3)];
        write_origin_csv(&path, &trace).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,f0_t"));
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.0, 1.0]);
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row[1], 0.999_999_999_3);
    }

    #[test]
    fn slice_csv_columns_follow_the_overlays() {
        let dir = tempfile::tempdir().unwrap();
        let radii = || [0.0_f64, 1.0, 2.0, 3.0].into_iter();
        let values = [1.5, 1.2, 1.02, 1.0];

        let plain = dir.path().join("plain.csv");
        write_slice_csv(&plain, radii(), &values, SliceOverlays::default()).unwrap();
        let text = fs::read_to_string(&plain).unwrap();
        assert!(text.starts_with("r,f\n"));
        assert_eq!(text.lines().count(), 5);

        let ellipse = EllipseFit {
            a_axis: 2.0,
            b_axis: 0.5,
            k_center: 1.0,
            rms_residual: 0.0,
            n_points: 4,
        };
        let ansatz = crate::model::ParabolicAnsatz::new(1.0, -0.1).unwrap();
        let full = dir.path().join("full.csv");
        write_slice_csv(
            &full,
            radii(),
            &values,
            SliceOverlays {
                ellipse: Some(&ellipse),
                parabola: Some((ansatz, 1.0)),
            },
        )
        .unwrap();
        let text = fs::read_to_string(&full).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,f,f_ellipse,f_parabola"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        // At r = 0 the ellipse overlay is k + b, the parabola overlay is
        // the ansatz origin height a(t−T)².
        assert_eq!(first[2], 1.5);
        assert!((first[3] - ansatz.value(0.0, 1.0)).abs() < 1e-15);
        // Beyond the ellipse edge (r = 3 > a = 2) the overlay is NaN.
        let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
        assert!(last[2].parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn table_rows_write_every_column_and_the_vertex_identity_holds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let config = RunConfig::new(ModelKind::YangMills4p1, 1.0, -0.01).unwrap();
        let rows = [
            TableRow {
                f0: 1.0,
                v0: -0.01,
                a_fit: Some(2.45e-5),
                t_fit: Some(201.2),
                a_pred: Some(2.5e-5),
                t_pred: Some(200.0),
                rel_err_a: Some(0.02),
                rel_err_t: Some(0.006),
            },
            TableRow::failed(&config),
        ];
        write_table_csv(&path, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("f0,v0,a_fit,T_fit,a_pred,T_pred,rel_err_a,rel_err_T")
        );
        let good: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(good.len(), 8);
        assert_eq!(good[2], 2.45e-5);

        // The failed row keeps predictions and the a_pred·T_pred² = f0
        // identity, with NaN in the fit columns.
        let failed: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert!(failed[2].is_nan() && failed[3].is_nan());
        assert!((failed[4] * failed[5] * failed[5] - failed[0]).abs() < 1e-12);
        assert!(failed[6].is_nan() && failed[7].is_nan());
    }

    #[test]
    fn run_directory_holds_manifest_origin_and_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::new(ModelKind::SigmaCharge2, 0.25, -0.02)
            .unwrap()
            .with_snapshot_stride(5000);
        let record = run(&config).unwrap();
        let report = compare_run(&record);
        write_run(dir.path(), &record, &report, 1.25).unwrap();

        let manifest_text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let manifest: serde_json::Value = serde_json::from_str(&manifest_text).unwrap();
        assert_eq!(manifest["config"]["model"], "sigma-charge2");
        assert_eq!(manifest["config"]["f0"], 0.25);
        assert_eq!(manifest["termination"], "reached-stop-fraction");
        assert_eq!(manifest["tool"]["name"], "solitonlab");
        assert!(manifest["fit"]["a"].as_f64().unwrap() > 0.0);
        assert!(manifest["predicted"]["t_blowup"].as_f64().unwrap() > 0.0);
        assert!(manifest["rel_err_a"].as_f64().unwrap() < 0.05);
        assert_eq!(manifest["wall_seconds"], 1.25);
        assert_eq!(
            manifest["steps"].as_u64().unwrap() as usize,
            record.origin_trace.len() - 1
        );

        assert!(dir.path().join("origin.csv").is_file());
        let n_slices = fs::read_dir(dir.path().join("slices")).unwrap().count();
        assert_eq!(n_slices, record.snapshots.len());
        assert!(dir.path().join("slices").join("t_0.csv").is_file());
    }

    #[test]
    fn stationary_manifest_carries_no_fit_or_prediction() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::stationary(ModelKind::YangMills4p1, 1.0, 0.05).unwrap();
        let record = run(&config).unwrap();
        let report = compare_run(&record);
        write_run(dir.path(), &record, &report, 0.01).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
                .unwrap();
        assert!(manifest.get("fit").is_none());
        assert!(manifest.get("predicted").is_none());
        assert!(manifest.get("rel_err_a").is_none());
        assert_eq!(manifest["termination"], "reached-t-max");
    }

    #[test]
    fn slice_index_marks_missing_times() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.csv");
        write_slice_index(
            &path,
            &[
                (
                    40.0,
                    SliceStatus::Written {
                        t_snapshot: 40.0,
                        file: "t_40.csv".to_string(),
                    },
                ),
                (250.0, SliceStatus::Absent),
            ],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t_requested,status,file"));
        assert!(lines.next().unwrap().ends_with(",written,t_40.csv"));
        assert!(lines.next().unwrap().ends_with(",absent,"));
    }

    #[test]
    fn identical_runs_write_identical_bytes() {
        let config = RunConfig::new(ModelKind::YangMills4p1, 0.25, -0.02)
            .unwrap()
            .with_snapshot_stride(2000);
        let mut dumps = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let record = run(&config).unwrap();
            let report = compare_run(&record);
            write_run(dir.path(), &record, &report, 0.0).unwrap();
            let mut bytes = fs::read(dir.path().join("origin.csv")).unwrap();
            bytes.extend(fs::read(dir.path().join("slices").join("t_0.csv")).unwrap());
            bytes.extend(fs::read(dir.path().join("manifest.json")).unwrap());
            dumps.push(bytes);
        }
        assert_eq!(dumps[0], dumps[1]);
    }
}
