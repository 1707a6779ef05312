//! Running a family of cases in parallel and aggregating the results.
//!
//! Each case evolves independently and writes only its own `case-<index>/`
//! directory, so cases can run concurrently without coordination; the
//! aggregate table is assembled by the orchestrator after every worker has
//! finished, in document order, which keeps the output byte-identical no
//! matter how the work was scheduled.

use crate::fit::compare_run;
use crate::output::{write_run, write_table_csv, TableRow};
use crate::stepper::{run, RunConfig, Termination};
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// What a sweep produced: one table row per case (document order), plus the
/// failures. A case fails when its evolution errors out or goes numerically
/// unstable, or when its artifacts cannot be written; a run that merely has
/// nothing to fit (e.g. a stationary case) is a success with empty fit
/// columns.
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<TableRow>,
    /// (case index, what went wrong), in case order.
    pub failures: Vec<(usize, String)>,
}

impl SweepOutcome {
    pub fn all_failed(&self) -> bool {
        self.failures.len() == self.rows.len()
    }
}

/// Directory name for one case.
pub fn case_dirname(index: usize) -> String {
    format!("case-{index:03}")
}

/// Run every case, at most `workers` at a time, each into
/// `dir/case-<index>/`, then write `dir/table.csv` once.
pub fn run_sweep(configs: &[RunConfig], dir: &Path, workers: usize) -> io::Result<SweepOutcome> {
    std::fs::create_dir_all(dir)?;
    let workers = workers.clamp(1, configs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<(TableRow, Option<String>)>>> =
        Mutex::new(vec![None; configs.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= configs.len() {
                    break;
                }
                let case_dir = dir.join(case_dirname(index));
                let result = run_case(&configs[index], &case_dir);
                slots.lock().expect("case slots poisoned")[index] = Some(result);
            });
        }
    });

    let mut rows = Vec::with_capacity(configs.len());
    let mut failures = Vec::new();
    for (index, slot) in slots.into_inner().expect("case slots poisoned").into_iter().enumerate() {
        let (row, failure) = slot.expect("every case index was claimed by a worker");
        rows.push(row);
        if let Some(message) = failure {
            failures.push((index, message));
        }
    }
    write_table_csv(&dir.join("table.csv"), &rows)?;
    Ok(SweepOutcome { rows, failures })
}

fn run_case(config: &RunConfig, case_dir: &Path) -> (TableRow, Option<String>) {
    let started = Instant::now();
    match run(config) {
        Ok(record) => {
            let report = compare_run(&record);
            let row = TableRow::from_report(config, &report);
            let failure = if let Err(e) = write_run(
                case_dir,
                &record,
                &report,
                started.elapsed().as_secs_f64(),
            ) {
                Some(format!("could not write case artifacts: {e}"))
            } else if record.termination == Termination::NumericalInstability {
                Some("evolution went numerically unstable".to_string())
            } else {
                None
            };
            (row, failure)
        }
        Err(e) => (TableRow::failed(config), Some(e.to_string())),
    }
}
