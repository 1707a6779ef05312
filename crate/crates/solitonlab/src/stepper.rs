//! Predictor-corrector leapfrog evolution toward the blow-up.
//!
//! One step advances two stored time levels (f at t−Δt and t) to t+Δt:
//!
//! 1. predictor: F⁺ = 2·f_curr − f_prev;
//! 2. corrector (repeated): ∂ₜf = (F⁺ − f_prev)/(2Δt) at each interior node,
//!    A = model acceleration at time t using that ∂ₜf,
//!    F⁺ = 2·f_curr − f_prev + Δt²·A, then re-impose the boundary rules;
//! 3. commit: shift levels, t advances by Δt.
//!
//! The boundary rules are the even-function extrapolation at the origin,
//! f(0) = (4/3)f(Δr) − (1/3)f(2Δr), and at r = R either a flat match
//! f(R) = f(R−Δr) or the parabola-compatible slope match
//! f(R) = f(R−Δr) + (f(R−Δr) − f(R−2Δr))·R/(R−Δr). Runs started from a line
//! use the flat match; runs started from a parabola use the slope match.

use crate::grid::{GridError, RadialField, RadialGrid};
use crate::model::{rhs_acceleration, ModelError, ModelKind};
use thiserror::Error;

/// Default grid extent.
pub const DEFAULT_R_MAX: f64 = 10.0;
/// Default grid spacing.
pub const DEFAULT_DR: f64 = 0.025;
/// Default time step.
pub const DEFAULT_DT: f64 = 0.001;
/// Runs stop once f(0,t) falls to this fraction of f₀ (the equations are
/// singular at f = 0, so integrating much further is meaningless).
pub const DEFAULT_STOP_FRACTION: f64 = 0.05;
/// Default spacing, in steps, between stored field snapshots.
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 100;
/// Default corrector convergence tolerance (max node change per pass).
pub const DEFAULT_CORRECTOR_TOLERANCE: f64 = 1e-12;
/// Default cap on corrector passes per step.
pub const DEFAULT_CORRECTOR_MAX_ITERS: usize = 8;
/// Default t_max as a multiple of the predicted blow-up time.
pub const DEFAULT_T_MAX_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite field value at node {node} (r = {r}) during step {step}")]
    NonFinite { node: usize, r: f64, step: u64 },
    #[error("field entered the singular set at node {node} (r = {r}, f = {f})")]
    SingularSet { node: usize, r: f64, f: f64 },
}

/// Shape of the initial data f(r, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Horizontal line f ≡ f₀.
    Line,
    /// Parabola f = p·r² + f₀ with p = −v₀²/(8f₀).
    Parabola,
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Line => write!(f, "line"),
            Profile::Parabola => write!(f, "parabola"),
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line" => Ok(Profile::Line),
            "parabola" => Ok(Profile::Parabola),
            other => Err(format!(
                "unknown profile {other:?}; expected \"line\" or \"parabola\""
            )),
        }
    }
}

/// Rule for the outer node at r = R.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterBoundary {
    /// f(R) = f(R−Δr): no slope at the outer edge.
    MatchLine,
    /// f(R) continues the one-sided slope scaled by R/(R−Δr), which a
    /// parabola through the last nodes satisfies.
    MatchParabola,
}

impl std::fmt::Display for OuterBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OuterBoundary::MatchLine => write!(f, "match-line"),
            OuterBoundary::MatchParabola => write!(f, "match-parabola"),
        }
    }
}

impl std::str::FromStr for OuterBoundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "match-line" => Ok(OuterBoundary::MatchLine),
            "match-parabola" => Ok(OuterBoundary::MatchParabola),
            other => Err(format!(
                "unknown outer boundary {other:?}; expected \"match-line\" or \"match-parabola\""
            )),
        }
    }
}

/// Corrector iteration policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Corrector {
    /// Exactly this many passes, no convergence test.
    FixedIterations(usize),
    /// Iterate until the largest node change per pass drops below
    /// `tolerance`, giving up after `max_iterations`.
    Tolerance { tolerance: f64, max_iterations: usize },
}

/// Complete description of one evolution experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub f0: f64,
    /// Initial velocity ∂ₜf(r,0), uniform in r. Negative for collapse runs;
    /// zero is allowed for stationary studies (no blow-up prediction then).
    pub v0: f64,
    pub dr: f64,
    pub dt: f64,
    pub r_max: f64,
    pub profile: Profile,
    pub boundary_outer: OuterBoundary,
    pub t_max: f64,
    pub stop_fraction: f64,
    pub snapshot_stride: usize,
    pub corrector: Corrector,
}

impl RunConfig {
    /// Collapse run with the default grid, stepping, stopping, and corrector
    /// choices; t_max brackets the predicted blow-up time with 20% slack.
    pub fn new(model: ModelKind, f0: f64, v0: f64) -> Result<Self, StepError> {
        if !(f0 > 0.0) {
            return Err(StepError::Config(format!("f0 = {f0} must be positive")));
        }
        if !(v0 < 0.0) {
            return Err(StepError::Config(format!(
                "v0 = {v0} must be negative for a collapse run (use `stationary` for v0 = 0)"
            )));
        }
        let t_blowup = 2.0 * f0 / v0.abs();
        Ok(Self {
            model,
            f0,
            v0,
            dr: DEFAULT_DR,
            dt: DEFAULT_DT,
            r_max: DEFAULT_R_MAX,
            profile: Profile::Line,
            boundary_outer: OuterBoundary::MatchLine,
            t_max: DEFAULT_T_MAX_FACTOR * t_blowup,
            stop_fraction: DEFAULT_STOP_FRACTION,
            snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
            corrector: Corrector::Tolerance {
                tolerance: DEFAULT_CORRECTOR_TOLERANCE,
                max_iterations: DEFAULT_CORRECTOR_MAX_ITERS,
            },
        })
    }

    /// Zero-velocity run: nothing should move. t_max must be given explicitly
    /// since there is no blow-up time to derive it from.
    pub fn stationary(model: ModelKind, f0: f64, t_max: f64) -> Result<Self, StepError> {
        let mut config = Self::new(model, f0, -1.0)?;
        config.v0 = 0.0;
        config.t_max = t_max;
        config.validate()?;
        Ok(config)
    }

    /// Switch the initial profile, keeping the outer boundary rule paired
    /// with it (line ↔ flat match, parabola ↔ slope match).
    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self.boundary_outer = match profile {
            Profile::Line => OuterBoundary::MatchLine,
            Profile::Parabola => OuterBoundary::MatchParabola,
        };
        self
    }

    pub fn with_grid(mut self, r_max: f64, dr: f64) -> Self {
        self.r_max = r_max;
        self.dr = dr;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_stop_fraction(mut self, stop_fraction: f64) -> Self {
        self.stop_fraction = stop_fraction;
        self
    }

    pub fn with_snapshot_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_corrector(mut self, corrector: Corrector) -> Self {
        self.corrector = corrector;
        self
    }

    /// Check every invariant; init_state and run call this first.
    pub fn validate(&self) -> Result<(), StepError> {
        let fail = |msg: String| Err(StepError::Config(msg));
        if !(self.f0 > 0.0) {
            return fail(format!("f0 = {} must be positive", self.f0));
        }
        if !(self.v0 <= 0.0) {
            return fail(format!(
                "v0 = {} must be negative (or zero for stationary runs)",
                self.v0
            ));
        }
        if !(self.dt > 0.0) {
            return fail(format!("dt = {} must be positive", self.dt));
        }
        if self.dt > self.dr {
            return fail(format!(
                "dt = {} exceeds dr = {}: the far field propagates at unit speed, so dt ≤ dr is required",
                self.dt, self.dr
            ));
        }
        let grid = RadialGrid::new(self.r_max, self.dr).map_err(StepError::Grid)?;
        if grid.n_points() < 4 {
            return fail(format!(
                "grid has {} nodes; the boundary rules need at least 4",
                grid.n_points()
            ));
        }
        match (self.profile, self.boundary_outer) {
            (Profile::Line, OuterBoundary::MatchLine)
            | (Profile::Parabola, OuterBoundary::MatchParabola) => {}
            _ => {
                return fail(format!(
                    "profile {:?} must pair with its outer boundary rule \
                     (Line ↔ MatchLine, Parabola ↔ MatchParabola), got {:?}",
                    self.profile, self.boundary_outer
                ));
            }
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return fail(format!("t_max = {} must be positive and finite", self.t_max));
        }
        if !(self.stop_fraction > 0.0 && self.stop_fraction < 1.0) {
            return fail(format!(
                "stop_fraction = {} must lie strictly between 0 and 1",
                self.stop_fraction
            ));
        }
        if self.snapshot_stride == 0 {
            return fail("snapshot_stride must be at least 1".to_string());
        }
        match self.corrector {
            Corrector::FixedIterations(k) if k == 0 => {
                return fail("corrector needs at least one pass".to_string());
            }
            Corrector::Tolerance {
                tolerance,
                max_iterations,
            } => {
                if !(tolerance > 0.0) {
                    return fail(format!(
                        "corrector tolerance = {tolerance} must be positive"
                    ));
                }
                if max_iterations == 0 {
                    return fail("corrector needs at least one pass".to_string());
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid, StepError> {
        RadialGrid::new(self.r_max, self.dr).map_err(StepError::Grid)
    }
}

/// Two consecutive time levels plus the clock — everything one step needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub f_prev: RadialField,
    pub f_curr: RadialField,
    pub t: f64,
    pub step_index: u64,
}

/// One stored field snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// f(0,t) fell to stop_fraction·f₀ — the intended end of a collapse run.
    ReachedStopFraction,
    /// The clock ran out first.
    ReachedTMax,
    /// The field reached the singular set (denominator vanished or, for
    /// Yang-Mills, f + r² stopped being positive).
    BlowUp,
    /// A node went NaN/infinite.
    NumericalInstability,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::ReachedStopFraction => "reached-stop-fraction",
            Termination::ReachedTMax => "reached-t-max",
            Termination::BlowUp => "blow-up",
            Termination::NumericalInstability => "numerical-instability",
        };
        write!(f, "{s}")
    }
}

/// Everything a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    /// (t, f(0,t)) at every step, starting at t = 0.
    pub origin_trace: Vec<(f64, f64)>,
    /// Full field copies every snapshot_stride steps, starting at t = 0.
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
}

/// Build the two initial time levels from the config. The first predictor
/// needs a level at −Δt; synthesizing f_prev = f_curr − v₀·Δt encodes the
/// initial velocity while keeping every later step on the same code path.
pub fn init_state(config: &RunConfig) -> Result<SimulationState, StepError> {
    config.validate()?;
    let grid = config.grid()?;
    let f_curr = match config.profile {
        Profile::Line => RadialField::constant(grid, config.f0),
        Profile::Parabola => {
            let p = -config.v0 * config.v0 / (8.0 * config.f0);
            RadialField::from_fn(grid, |r| p * r * r + config.f0)
        }
    };
    let mut f_prev = f_curr.clone();
    for v in f_prev.values_mut() {
        *v -= config.v0 * config.dt;
    }
    Ok(SimulationState {
        f_prev,
        f_curr,
        t: 0.0,
        step_index: 0,
    })
}

/// Impose the boundary rules in place: even-function extrapolation at the
/// origin, and the configured rule at r = R.
pub fn apply_boundaries(field: &mut RadialField, outer: OuterBoundary) -> Result<(), StepError> {
    let n = field.len();
    if n < 4 {
        return Err(StepError::Config(format!(
            "field has {n} nodes; boundary rules need at least 4"
        )));
    }
    let r_max = field.grid().r_max();
    let dr = field.grid().dr();
    let v = field.values_mut();
    v[0] = (4.0 / 3.0) * v[1] - (1.0 / 3.0) * v[2];
    match outer {
        OuterBoundary::MatchLine => v[n - 1] = v[n - 2],
        OuterBoundary::MatchParabola => {
            v[n - 1] = v[n - 2] + (v[n - 2] - v[n - 3]) * r_max / (r_max - dr);
        }
    }
    Ok(())
}

fn corrector_policy(corrector: Corrector) -> Result<(usize, Option<f64>), StepError> {
    match corrector {
        Corrector::FixedIterations(k) => Ok((k, None)),
        Corrector::Tolerance {
            tolerance,
            max_iterations,
        } => Ok((max_iterations, Some(tolerance))),
    }
}

fn step_impl<F>(state: &mut SimulationState, config: &RunConfig, rhs: F) -> Result<(), StepError>
where
    F: Fn(&RadialField, &RadialField, usize) -> Result<f64, ModelError>,
{
    let grid = *state.f_curr.grid();
    let n = grid.n_points();
    let dt = config.dt;
    let f_curr = &state.f_curr;
    let f_prev = &state.f_prev;

    // Predictor.
    let mut candidate = f_curr.clone();
    {
        let c = candidate.values_mut();
        for i in 0..n {
            c[i] = 2.0 * f_curr.values()[i] - f_prev.values()[i];
        }
    }

    let (max_passes, tolerance) = corrector_policy(config.corrector)?;
    let mut ft = f_curr.clone();
    let mut next = candidate.clone();
    for _pass in 0..max_passes {
        {
            let ftv = ft.values_mut();
            for i in 0..n {
                ftv[i] = (candidate.values()[i] - f_prev.values()[i]) / (2.0 * dt);
            }
        }
        {
            let nx = next.values_mut();
            nx[0] = candidate.values()[0];
            nx[n - 1] = candidate.values()[n - 1];
        }
        for i in 1..n - 1 {
            let acc = rhs(f_curr, &ft, i)?;
            next.values_mut()[i] =
                2.0 * f_curr.values()[i] - f_prev.values()[i] + dt * dt * acc;
        }
        apply_boundaries(&mut next, config.boundary_outer)?;

        let mut change: f64 = 0.0;
        for i in 0..n {
            change = change.max((next.values()[i] - candidate.values()[i]).abs());
        }
        std::mem::swap(&mut candidate, &mut next);
        if let Some(tol) = tolerance {
            if change <= tol {
                break;
            }
        }
    }

    // Reject the step if anything went non-finite or (Yang-Mills) the field
    // crossed into the singular set f + r² ≤ 0.
    for (i, &v) in candidate.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(StepError::NonFinite {
                node: i,
                r: grid.r(i),
                step: state.step_index + 1,
            });
        }
    }
    match config.model {
        ModelKind::YangMills4p1 => {
            for (i, &v) in candidate.values().iter().enumerate() {
                let r = grid.r(i);
                if v + r * r <= 0.0 {
                    return Err(StepError::SingularSet { node: i, r, f: v });
                }
            }
        }
        ModelKind::SigmaCharge2 => {
            // f² + r⁴ > 0 automatically away from the origin; only an exact
            // zero of f(0) reaches the singular set.
            let v0 = candidate.values()[0];
            if v0 == 0.0 {
                return Err(StepError::SingularSet {
                    node: 0,
                    r: 0.0,
                    f: v0,
                });
            }
        }
    }

    // Commit.
    std::mem::swap(&mut state.f_prev, &mut state.f_curr);
    state.f_curr = candidate;
    state.step_index += 1;
    state.t = state.step_index as f64 * dt;
    Ok(())
}

/// Advance the state by one time step with the standard (divergence-form)
/// radial operator. The state is untouched if the step fails.
pub fn step(state: &mut SimulationState, config: &RunConfig) -> Result<(), StepError> {
    step_impl(state, config, |f, ft, i| {
        rhs_acceleration(config.model, f, ft, i)
    })
}

/// One step with the naive term-by-term radial operator — see
/// [`run_with_naive_operator`].
pub fn step_with_naive_operator(
    state: &mut SimulationState,
    config: &RunConfig,
) -> Result<(), StepError> {
    step_impl(state, config, |f, ft, i| {
        crate::model::rhs_acceleration_naive(config.model, f, ft, i)
    })
}

fn run_impl<F>(config: &RunConfig, rhs: F) -> Result<RunRecord, StepError>
where
    F: Fn(&RadialField, &RadialField, usize) -> Result<f64, ModelError> + Copy,
{
    config.validate()?;
    let mut state = init_state(config)?;
    let stop_height = config.stop_fraction * config.f0;
    let mut origin_trace = vec![(state.t, state.f_curr.values()[0])];
    let mut snapshots = vec![Snapshot {
        t: state.t,
        values: state.f_curr.values().to_vec(),
    }];

    let termination = loop {
        if state.f_curr.values()[0] <= stop_height {
            break Termination::ReachedStopFraction;
        }
        if state.t >= config.t_max - 1e-9 * config.dt {
            break Termination::ReachedTMax;
        }
        match step_impl(&mut state, config, rhs) {
            Ok(()) => {}
            Err(StepError::NonFinite { .. }) => break Termination::NumericalInstability,
            Err(StepError::SingularSet { .. }) => break Termination::BlowUp,
            Err(StepError::Model(ModelError::Singularity { .. })) => break Termination::BlowUp,
            Err(other) => return Err(other),
        }
        origin_trace.push((state.t, state.f_curr.values()[0]));
        if state.step_index % config.snapshot_stride as u64 == 0 {
            snapshots.push(Snapshot {
                t: state.t,
                values: state.f_curr.values().to_vec(),
            });
        }
    };

    Ok(RunRecord {
        config: config.clone(),
        origin_trace,
        snapshots,
        termination,
    })
}

/// Evolve from t = 0 until the origin height crosses stop_fraction·f₀, the
/// clock reaches t_max, or the field degenerates. Runtime trouble lands in
/// the record's termination status; only an invalid config is an Err.
pub fn run(config: &RunConfig) -> Result<RunRecord, StepError> {
    run_impl(config, |f, ft, i| rhs_acceleration(config.model, f, ft, i))
}

/// Same loop with the radial Laplacian assembled naively from the centered
/// stencils (d² + 5·d¹/r) instead of the divergence form. Unstable near the
/// origin — kept as the regression contrast demonstrating why the
/// divergence-form operator is required.
pub fn run_with_naive_operator(config: &RunConfig) -> Result<RunRecord, StepError> {
    run_impl(config, |f, ft, i| {
        crate::model::rhs_acceleration_naive(config.model, f, ft, i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn quick_config(model: ModelKind, f0: f64, v0: f64) -> RunConfig {
        RunConfig::new(model, f0, v0).unwrap()
    }

    #[test]
    fn line_init_encodes_initial_velocity_in_prev_level() {
        let config = quick_config(ModelKind::YangMills4p1, 1.0, -0.01);
        let state = init_state(&config).unwrap();
        for &v in state.f_curr.values() {
            assert_eq!(v, 1.0);
        }
        for &v in state.f_prev.values() {
            assert_relative_eq!(v, 1.0 + 0.01 * config.dt, max_relative = 1e-15);
        }
        assert_eq!(state.t, 0.0);
        assert_eq!(state.step_index, 0);
    }

    #[test]
    fn parabola_init_uses_the_derived_curvature() {
        // p = −v₀²/(8f₀): −1.25e−5 for (1.0, −0.01), −5e−5 for (1.0, −0.02).
        let config =
            quick_config(ModelKind::YangMills4p1, 1.0, -0.01).with_profile(Profile::Parabola);
        let state = init_state(&config).unwrap();
        let grid = state.f_curr.grid();
        for i in [0, 40, 200, 400] {
            let r = grid.r(i);
            assert_relative_eq!(
                state.f_curr.values()[i],
                1.0 - 0.0000125 * r * r,
                max_relative = 1e-14
            );
        }

        let config =
            quick_config(ModelKind::SigmaCharge2, 1.0, -0.02).with_profile(Profile::Parabola);
        let state = init_state(&config).unwrap();
        for i in [0, 100, 400] {
            let r = grid.r(i);
            assert_relative_eq!(
                state.f_curr.values()[i],
                1.0 - 0.00005 * r * r,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn boundaries_leave_constants_alone() {
        let grid = RadialGrid::new(1.0, 0.25).unwrap();
        for outer in [OuterBoundary::MatchLine, OuterBoundary::MatchParabola] {
            let mut f = RadialField::constant(grid, 2.0);
            apply_boundaries(&mut f, outer).unwrap();
            assert_eq!(f.values(), &[2.0; 5]);
        }
    }

    #[test]
    fn origin_rule_reproduces_even_quadratics_exactly() {
        let grid = RadialGrid::new(1.0, 0.1).unwrap();
        let mut f = RadialField::from_fn(grid, |r| 3.0 * r * r + 0.5);
        f.values_mut()[0] = 123.0; // should be overwritten
        apply_boundaries(&mut f, OuterBoundary::MatchLine).unwrap();
        assert_abs_diff_eq!(f.values()[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn outer_parabola_rule_tracks_an_exact_parabola() {
        let (p, h) = (-0.0000125, 1.0);
        let grid = RadialGrid::new(10.0, 0.025).unwrap();
        let mut f = RadialField::from_fn(grid, |r| p * r * r + h);
        let n = f.len();
        f.values_mut()[n - 1] = 0.0;
        apply_boundaries(&mut f, OuterBoundary::MatchParabola).unwrap();
        let exact = p * 100.0 + h;
        assert!(
            (f.values()[n - 1] - exact).abs() <= p.abs() * 0.025 * 0.025,
            "outer node off an exact parabola by more than O(Δr²)·p"
        );
    }

    #[test]
    fn boundaries_need_four_nodes() {
        let grid = RadialGrid::new(1.0, 0.5).unwrap();
        let mut f = RadialField::constant(grid, 1.0);
        assert!(apply_boundaries(&mut f, OuterBoundary::MatchLine).is_err());
    }

    #[test]
    fn stationary_constant_data_is_an_exact_fixed_point() {
        // With v0 = 0 every difference in the scheme is exactly zero in
        // floating point, so the field must not change at all.
        for model in [ModelKind::YangMills4p1, ModelKind::SigmaCharge2] {
            let config = RunConfig::stationary(model, 1.0, 1.0).unwrap();
            let mut state = init_state(&config).unwrap();
            let initial = state.f_curr.clone();
            for _ in 0..100 {
                step(&mut state, &config).unwrap();
            }
            assert_eq!(state.f_curr, initial);
        }
    }

    #[test]
    fn stationary_run_reports_reached_t_max() {
        let config = RunConfig::stationary(ModelKind::SigmaCharge2, 1.0, 2.0).unwrap();
        let record = run(&config).unwrap();
        assert_eq!(record.termination, Termination::ReachedTMax);
        let drift = record
            .origin_trace
            .iter()
            .map(|&(_, f)| (f - 1.0).abs())
            .fold(0.0_f64, f64::max);
        assert!(drift < 1e-10, "origin drifted by {drift} with v0 = 0");
    }

    #[test]
    fn first_step_is_a_uniform_fall_plus_bounded_acceleration() {
        let config = quick_config(ModelKind::YangMills4p1, 1.0, -0.01);
        let mut state = init_state(&config).unwrap();
        step(&mut state, &config).unwrap();
        let dt = config.dt;
        let bound = dt * dt * 2.0 * 0.01 * 0.01 / 1.0 * 1.0001;
        let grid = state.f_curr.grid();
        for i in 1..state.f_curr.len() - 1 {
            let dev = state.f_curr.values()[i] - (1.0 + -0.01 * dt);
            assert!(
                dev.abs() <= bound,
                "node {i} deviates by {dev}, above dt²·2v₀²/f₀"
            );
        }
        // near the origin the deviation should be essentially the full
        // dt²·2v₀²/(f₀+r²) — check it is present, not just bounded
        let r1 = grid.r(1);
        let expected = dt * dt * 2.0 * 0.01 * 0.01 / (1.0 + r1 * r1);
        let dev = state.f_curr.values()[1] - (1.0 + -0.01 * dt);
        assert_relative_eq!(dev, expected, max_relative = 0.05);
    }

    #[test]
    fn corrector_iterations_contract_to_a_fixed_point() {
        // At gentle parameters one pass already converges to rounding (the
        // contraction factor is ~dt·2|∂ₜf|/(f+r²)), so use a violent fall and
        // a coarse dt to make the geometric approach visible.
        let tight = Corrector::Tolerance {
            tolerance: 1e-14,
            max_iterations: 40,
        };
        let base = quick_config(ModelKind::YangMills4p1, 0.25, -0.5)
            .with_dt(0.02)
            .with_corrector(tight);
        let mut state = init_state(&base).unwrap();
        for _ in 0..10 {
            step(&mut state, &base).unwrap();
        }

        let max_gap = |a: &RadialField, b: &RadialField| {
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0_f64, f64::max)
        };
        let candidate_after = |corrector: Corrector| {
            let config = base.clone().with_corrector(corrector);
            let mut s = state.clone();
            step(&mut s, &config).unwrap();
            s.f_curr
        };
        let reference = candidate_after(tight);
        let gaps: Vec<f64> = [1, 2, 3]
            .map(|k| max_gap(&candidate_after(Corrector::FixedIterations(k)), &reference))
            .to_vec();
        assert!(
            gaps[0] > 1e-9,
            "test parameters too gentle to observe contraction: {gaps:?}"
        );
        assert!(
            gaps[1] < 0.5 * gaps[0] && gaps[2] < 0.5 * gaps[1],
            "successive corrector passes do not contract geometrically: {gaps:?}"
        );

        // the default-style tolerance policy lands on the same fixed point
        let tol = candidate_after(Corrector::Tolerance {
            tolerance: 1e-12,
            max_iterations: 40,
        });
        let gap = max_gap(&tol, &reference);
        assert!(gap <= 1e-10, "tolerance corrector off the fixed point by {gap}");
    }

    #[test]
    fn leapfrog_reverses_exactly_on_level_swap() {
        // The acceleration is even in ∂ₜf, so swapping the two stored levels
        // and stepping forward retraces the trajectory.
        let config = quick_config(ModelKind::YangMills4p1, 1.0, -0.01);
        let initial = init_state(&config).unwrap();
        let mut state = initial.clone();
        let mut after_one = None;
        for k in 0..50 {
            step(&mut state, &config).unwrap();
            if k == 0 {
                after_one = Some(state.f_curr.clone());
            }
        }
        std::mem::swap(&mut state.f_prev, &mut state.f_curr);
        for _ in 0..49 {
            step(&mut state, &config).unwrap();
        }
        let back_gap = state
            .f_curr
            .values()
            .iter()
            .zip(initial.f_curr.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(back_gap < 1e-9, "reverse evolution missed start by {back_gap}");
        let prev_gap = state
            .f_prev
            .values()
            .iter()
            .zip(after_one.unwrap().values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(prev_gap < 1e-9);
    }

    #[test]
    fn collapse_run_has_monotone_origin_and_clean_bookkeeping() {
        let config = quick_config(ModelKind::SigmaCharge2, 0.25, -0.02);
        let record = run(&config).unwrap();
        assert_eq!(record.termination, Termination::ReachedStopFraction);
        for pair in record.origin_trace.windows(2) {
            assert!(
                pair[1].1 < pair[0].1,
                "origin height rose between {:?} and {:?}",
                pair[0],
                pair[1]
            );
            assert_relative_eq!(pair[1].0 - pair[0].0, config.dt, max_relative = 1e-6);
        }
        let stride_t = config.snapshot_stride as f64 * config.dt;
        for s in &record.snapshots {
            let k = s.t / stride_t;
            assert_relative_eq!(k, k.round(), epsilon = 1e-6);
        }
        assert!(record.origin_trace.last().unwrap().1 <= 0.05 * 0.25);
    }

    #[test]
    fn runs_are_deterministic() {
        let config = quick_config(ModelKind::YangMills4p1, 0.25, -0.02);
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.origin_trace, b.origin_trace);
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.termination, b.termination);
    }

    #[test]
    fn driving_into_the_singularity_terminates_gracefully() {
        // Pushing far past the stop threshold must end in a recorded
        // blow-up/instability status, not a panic or an Err.
        let config = quick_config(ModelKind::YangMills4p1, 0.25, -0.02)
            .with_stop_fraction(1e-9)
            .with_t_max(40.0);
        let record = run(&config).unwrap();
        assert!(
            matches!(
                record.termination,
                Termination::BlowUp
                    | Termination::NumericalInstability
                    | Termination::ReachedStopFraction
            ),
            "unexpected termination {:?}",
            record.termination
        );
        assert!(record.origin_trace.len() > 1000);
    }

    #[test]
    fn config_validation_catches_bad_inputs() {
        let ok = quick_config(ModelKind::YangMills4p1, 1.0, -0.01);
        assert!(ok.validate().is_ok());

        assert!(RunConfig::new(ModelKind::YangMills4p1, 0.0, -0.01).is_err());
        assert!(RunConfig::new(ModelKind::YangMills4p1, 1.0, 0.01).is_err());

        let bad_dt = ok.clone().with_dt(0.05); // exceeds dr = 0.025
        assert!(matches!(bad_dt.validate(), Err(StepError::Config(_))));

        let bad_stop = ok.clone().with_stop_fraction(1.5);
        assert!(bad_stop.validate().is_err());

        let bad_grid = ok.clone().with_grid(1.0, 0.3);
        assert!(bad_grid.validate().is_err());

        let mut mismatched = ok.clone().with_profile(Profile::Parabola);
        mismatched.boundary_outer = OuterBoundary::MatchLine;
        assert!(mismatched.validate().is_err());

        let bad_corrector = ok.with_corrector(Corrector::FixedIterations(0));
        assert!(bad_corrector.validate().is_err());
    }
}
