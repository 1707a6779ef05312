//! Numerical laboratory for radially symmetric soliton collapse.
//!
//! Two models are evolved toward their finite-time singularity — the charge-1
//! sector of (4+1)-dimensional Yang-Mills and the charge-2 sector of the
//! (2+1)-dimensional S² sigma model, both reduced to a single radial field
//! f(r,t) that blows up when f reaches zero.

pub mod config;
pub mod fit;
pub mod grid;
pub mod model;
pub mod output;
pub mod stepper;
pub mod sweep;

pub use config::{ConfigError, RunDocument, SweepCase, SweepDocument};
pub use output::{
    full_precision, slice_filename, write_manifest, write_origin_csv, write_run,
    write_slice_csv, write_slice_index, write_table_csv, Manifest, SliceOverlays, SliceStatus,
    TableRow,
};
pub use grid::{
    centered_d1, centered_d2, natural_radial_operator, GridError, RadialField, RadialGrid,
};
pub use model::{
    ansatz_residual, ansatz_value, geodesic_prediction, rhs_acceleration, GeodesicPrediction,
    ModelError, ModelKind, ParabolicAnsatz,
};
pub use fit::{
    compare_run, fit_ellipse, fit_origin_parabola, fit_profile_parabola, predicted_ellipse,
    ComparisonReport, EllipseFit, FitError, ParabolaFit, ProfileParabolaFit, ResidualSample,
    SliceComparison,
};
pub use stepper::{
    apply_boundaries, init_state, run, run_with_naive_operator, step, step_with_naive_operator,
    Corrector, OuterBoundary, Profile, RunConfig, RunRecord, SimulationState, Snapshot, StepError,
    Termination,
};
pub use sweep::{case_dirname, run_sweep, SweepOutcome};
