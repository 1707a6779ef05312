//! Least-squares extraction of the run's descriptive parameters and
//! comparison against the slow-motion predictions.
//!
//! Three fitters cover the three shapes the runs produce:
//!
//! - the origin trace f(0,t), fit by an ordinary quadratic once it has fallen
//!   past a threshold fraction of f₀ — its vertex gives (a, T);
//! - a time slice of a line run, an elliptical bump x²/a² + (y−k)²/b² = 1
//!   riding on the uniformly falling far field, fit by damped Gauss-Newton;
//! - a time slice of a parabola run, fit near the origin by f = p·r² + h.
//!
//! [`compare_run`] bundles all of them against the predicted laws a_axis = t,
//! b_axis = (v₀²/4f₀)t², k_center = f₀ + v₀t, p = −v₀²/(8f₀), and
//! h = a(t−T)², reporting relative errors and flagging anything unfittable
//! instead of failing.

use crate::grid::RadialField;
use crate::model::{ansatz_residual, geodesic_prediction, GeodesicPrediction};
use crate::stepper::{Profile, RunRecord};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use thiserror::Error;

/// Fraction of f₀ below which origin-trace points enter the quadratic fit.
pub const DEFAULT_FIT_THRESHOLD: f64 = 0.5;
/// Relative bump amplitude below which a slice counts as featureless.
const BUMP_DETECTION_RTOL: f64 = 1e-3;
/// Fraction of the bump amplitude a node must deviate from the baseline to
/// belong to the bump region. The cut is deliberately coarse: the elliptical
/// arc ends at the expanding wavefront, but the field keeps deviating from
/// the baseline at the 1%-of-amplitude level far beyond it, and folding that
/// wave-zone tail into the region drags the fit toward degenerate,
/// arbitrarily large ellipses.
const BUMP_REGION_FRACTION: f64 = 0.1;
/// Gauss-Newton parameter-change tolerance (relative).
const GAUSS_NEWTON_TOLERANCE: f64 = 1e-12;
/// Gauss-Newton iteration cap.
const GAUSS_NEWTON_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("origin trace is not convex in time (quadratic coefficient {c2} ≤ 0)")]
    NonConvexTrace { c2: f64 },
    #[error("slice shows no bump: nothing deviates from the baseline {baseline}")]
    NoBump { baseline: f64 },
    #[error("normal equations are singular")]
    SingularNormalEquations,
    #[error(
        "ellipse fit did not converge after {iterations} iterations \
         (last iterate a = {a_axis}, b = {b_axis}, k = {k_center})"
    )]
    NoConvergence {
        iterations: usize,
        a_axis: f64,
        b_axis: f64,
        k_center: f64,
    },
}

/// Quadratic fit to the origin trace: f(0,t) ≈ a(t−T)².
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolaFit {
    /// Leading coefficient — the predicted value is v₀²/(4f₀).
    pub a: f64,
    /// Vertex time — the estimated blow-up time.
    pub t_blowup: f64,
    /// Root-mean-square misfit over the fitted subset, in field units.
    pub rms_residual: f64,
    /// Number of trace points below the threshold that entered the fit.
    pub n_points: usize,
    /// |c₀ − a·T²| / (a·T²) for the unconstrained constant term c₀: how
    /// consistent the free quadratic is with a pure vertex form.
    pub c0_consistency: f64,
}

/// Ellipse x²/a² + (y−k)²/b² = 1 fitted to a time slice (x = r, y = f).
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseFit {
    pub a_axis: f64,
    pub b_axis: f64,
    pub k_center: f64,
    /// Root-mean-square of the algebraic residual x²/a² + (y−k)²/b² − 1
    /// over the bump region (dimensionless).
    pub rms_residual: f64,
    /// Nodes in the bump region that entered the fit.
    pub n_points: usize,
}

/// Near-origin parabola f = p·r² + h fitted to a time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileParabolaFit {
    pub p: f64,
    pub h: f64,
    /// Root-mean-square misfit over the window, in field units.
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Unweighted quadratic least squares with the time variable centered on its
/// mean (the normal equations are badly scaled for t far from 0 otherwise).
/// Returns the coefficients of c₂t² + c₁t + c₀ in the original variable plus
/// the rms residual.
fn quadratic_ols(ts: &[f64], fs: &[f64]) -> Result<(f64, f64, f64, f64), FitError> {
    let n = ts.len();
    if n < 3 {
        return Err(FitError::InsufficientData { needed: 3, got: n });
    }
    let t_mean = ts.iter().sum::<f64>() / n as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (&t, &f) in ts.iter().zip(fs) {
        let s = t - t_mean;
        let ss = s * s;
        s1 += s;
        s2 += ss;
        s3 += ss * s;
        s4 += ss * ss;
        b0 += f;
        b1 += s * f;
        b2 += ss * f;
    }
    let m = Matrix3::new(
        s4, s3, s2, //
        s3, s2, s1, //
        s2, s1, n as f64,
    );
    let rhs = Vector3::new(b2, b1, b0);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(FitError::SingularNormalEquations)?;
    let (c2s, c1s, c0s) = (sol[0], sol[1], sol[2]);
    // shift back: f = c2·(t−t̄)² + c1·(t−t̄) + c0
    let c2 = c2s;
    let c1 = c1s - 2.0 * c2s * t_mean;
    let c0 = c0s - c1s * t_mean + c2s * t_mean * t_mean;
    let mut sq = 0.0;
    for (&t, &f) in ts.iter().zip(fs) {
        let s = t - t_mean;
        let model = c2s * s * s + c1s * s + c0s;
        sq += (f - model) * (f - model);
    }
    Ok((c2, c1, c0, (sq / n as f64).sqrt()))
}

/// Fit f(0,t) = a(t−T)² to the portion of the origin trace that has fallen
/// to `threshold·f0` or below, by unconstrained quadratic least squares.
/// The constant term is left free and reported back as a consistency
/// diagnostic rather than pinned to a·T².
pub fn fit_origin_parabola(
    trace: &[(f64, f64)],
    f0: f64,
    threshold: f64,
) -> Result<ParabolaFit, FitError> {
    let cutoff = threshold * f0;
    let (ts, fs): (Vec<f64>, Vec<f64>) = trace
        .iter()
        .filter(|&&(_, f)| f <= cutoff)
        .copied()
        .unzip();
    let (c2, c1, c0, rms) = quadratic_ols(&ts, &fs)?;
    if c2 <= 0.0 {
        return Err(FitError::NonConvexTrace { c2 });
    }
    let a = c2;
    let t_blowup = -c1 / (2.0 * c2);
    let vertex_c0 = a * t_blowup * t_blowup;
    Ok(ParabolaFit {
        a,
        t_blowup,
        rms_residual: rms,
        n_points: ts.len(),
        c0_consistency: (c0 - vertex_c0).abs() / vertex_c0,
    })
}

/// The bump region: contiguous nodes from r = 0 whose deviation from the
/// baseline exceeds a fixed fraction of the bump amplitude |f(0) − baseline|.
/// (The bump always sits at the origin — a dip for the origin fall, a rise
/// over the falling far field on line-run slices — so the origin deviation is
/// the amplitude in both orientations.)
fn bump_region(values: &[f64], baseline: f64) -> Vec<usize> {
    let amplitude = (values[0] - baseline).abs();
    let cut = BUMP_REGION_FRACTION * amplitude;
    let mut region = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if (v - baseline).abs() > cut {
            region.push(i);
        } else {
            break;
        }
    }
    region
}

/// Fit x²/a² + (y−k)²/b² = 1 to the bump at the origin of a time slice,
/// with x = r and y = f(r). Damped Gauss-Newton on the algebraic residual,
/// started from the bump's extent and height; iterates until the relative
/// parameter change drops below 10⁻¹².
pub fn fit_ellipse(slice: &RadialField, baseline: f64) -> Result<EllipseFit, FitError> {
    let values = slice.values();
    let amplitude = (values[0] - baseline).abs();
    if !(amplitude > BUMP_DETECTION_RTOL * baseline.abs()) || amplitude == 0.0 {
        return Err(FitError::NoBump { baseline });
    }
    let region = bump_region(values, baseline);
    if region.len() < 3 {
        return Err(FitError::InsufficientData {
            needed: 3,
            got: region.len(),
        });
    }
    let grid = slice.grid();
    let xs: Vec<f64> = region.iter().map(|&i| grid.r(i)).collect();
    let ys: Vec<f64> = region.iter().map(|&i| values[i]).collect();

    // Initial guess: semi-axis from the bump extent, height from the origin
    // deviation, center on the baseline.
    let mut a = xs[xs.len() - 1].max(grid.dr());
    let mut b = amplitude;
    let mut k = baseline;

    let sum_sq = |a: f64, b: f64, k: f64| {
        let mut s = 0.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            let g = x * x / (a * a) + (y - k) * (y - k) / (b * b) - 1.0;
            s += g * g;
        }
        s
    };
    let mut current_sq = sum_sq(a, b, k);

    for _iter in 0..GAUSS_NEWTON_MAX_ITERS {
        let mut jtj = Matrix3::zeros();
        let mut jtg = Vector3::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            let dy = y - k;
            let g = x * x / (a * a) + dy * dy / (b * b) - 1.0;
            let ja = -2.0 * x * x / (a * a * a);
            let jb = -2.0 * dy * dy / (b * b * b);
            let jk = -2.0 * dy / (b * b);
            let j = Vector3::new(ja, jb, jk);
            jtj += j * j.transpose();
            jtg += j * g;
        }
        let delta = jtj
            .lu()
            .solve(&(-jtg))
            .ok_or(FitError::SingularNormalEquations)?;

        // Damping: halve the step until the parameters stay admissible and
        // the misfit does not increase.
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (na, nb, nk) = (a + lambda * delta[0], b + lambda * delta[1], k + lambda * delta[2]);
            if na > 0.0 && nb > 0.0 {
                let sq = sum_sq(na, nb, nk);
                if sq <= current_sq * (1.0 + 1e-14) {
                    accepted = Some((na, nb, nk, sq));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((na, nb, nk, sq)) = accepted else {
            break; // stalled: no admissible decreasing step — report below
        };
        let change = ((na - a).abs() / na)
            .max((nb - b).abs() / nb)
            .max((nk - k).abs() / nk.abs().max(nb));
        a = na;
        b = nb;
        k = nk;
        current_sq = sq;
        if change < GAUSS_NEWTON_TOLERANCE {
            return Ok(EllipseFit {
                a_axis: a,
                b_axis: b,
                k_center: k,
                rms_residual: (current_sq / xs.len() as f64).sqrt(),
                n_points: xs.len(),
            });
        }
    }
    Err(FitError::NoConvergence {
        iterations: GAUSS_NEWTON_MAX_ITERS,
        a_axis: a,
        b_axis: b,
        k_center: k,
    })
}

/// Ordinary least squares of f against (r², 1) over nodes with r ≤ r_window:
/// the near-origin parabola f = p·r² + h.
pub fn fit_profile_parabola(
    slice: &RadialField,
    r_window: f64,
) -> Result<ProfileParabolaFit, FitError> {
    let grid = slice.grid();
    let values = slice.values();
    let mut s_uu = 0.0;
    let mut s_u = 0.0;
    let mut s_uf = 0.0;
    let mut s_f = 0.0;
    let mut n = 0usize;
    for (i, &f) in values.iter().enumerate() {
        let r = grid.r(i);
        if r > r_window {
            break;
        }
        let u = r * r;
        s_uu += u * u;
        s_u += u;
        s_uf += u * f;
        s_f += f;
        n += 1;
    }
    if n < 3 {
        return Err(FitError::InsufficientData { needed: 3, got: n });
    }
    let m = Matrix2::new(s_uu, s_u, s_u, n as f64);
    let rhs = Vector2::new(s_uf, s_f);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(FitError::SingularNormalEquations)?;
    let (p, h) = (sol[0], sol[1]);
    let mut sq = 0.0;
    for (i, &f) in values.iter().enumerate().take(n) {
        let r = grid.r(i);
        let model = p * r * r + h;
        sq += (f - model) * (f - model);
    }
    Ok(ProfileParabolaFit {
        p,
        h,
        rms_residual: (sq / n as f64).sqrt(),
        n_points: n,
    })
}

/// The slow-motion laws for a line-run slice at time t:
/// (a_axis, b_axis, k_center) = (t, v₀²t²/(4f₀), f₀ + v₀t).
pub fn predicted_ellipse(f0: f64, v0: f64, t: f64) -> (f64, f64, f64) {
    (t, v0 * v0 * t * t / (4.0 * f0), f0 + v0 * t)
}

/// Every comparison available for one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceComparison {
    pub t: f64,
    /// Ellipse fit of the bump (line runs only; absent if no bump yet).
    pub ellipse: Option<EllipseFit>,
    /// Predicted (a_axis, b_axis, k_center) at this time.
    pub ellipse_predicted: Option<(f64, f64, f64)>,
    /// Near-origin parabola fit over r ≤ R/2.
    pub profile: Option<ProfileParabolaFit>,
    /// Predicted (p, h) at this time (parabola runs only).
    pub profile_predicted: Option<(f64, f64)>,
}

/// One sample of how far the parabolic ansatz misses the full equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSample {
    pub r: f64,
    pub t: f64,
    pub value: f64,
}

/// Everything [`compare_run`] extracts from a finished run. Components that
/// could not be fitted (stationary trace, no bump yet, too few points) are
/// simply absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Slow-motion prediction (absent for stationary runs).
    pub predicted: Option<GeodesicPrediction>,
    /// Quadratic fit to the origin trace (absent if the trace never fell
    /// below the threshold).
    pub origin: Option<ParabolaFit>,
    /// |a_fit − a_pred| / a_pred.
    pub rel_err_a: Option<f64>,
    /// |T_fit − T_pred| / T_pred.
    pub rel_err_t: Option<f64>,
    /// Per-snapshot slice fits versus their predicted laws.
    pub slices: Vec<SliceComparison>,
    /// Ansatz-residual samples on a small (r, t) lattice.
    pub residual_samples: Vec<ResidualSample>,
}

/// Fit everything fittable in a finished run and compare against the
/// slow-motion predictions. Unfittable components are flagged absent; the
/// report itself always comes back.
pub fn compare_run(record: &RunRecord) -> ComparisonReport {
    let config = &record.config;
    let predicted = geodesic_prediction(config.f0, config.v0).ok();
    let origin = fit_origin_parabola(&record.origin_trace, config.f0, DEFAULT_FIT_THRESHOLD).ok();
    let (rel_err_a, rel_err_t) = match (&predicted, &origin) {
        (Some(pred), Some(fit)) => (
            Some((fit.a - pred.a).abs() / pred.a),
            Some((fit.t_blowup - pred.t_blowup).abs() / pred.t_blowup),
        ),
        _ => (None, None),
    };

    let grid = config.grid().ok();
    let r_window = config.r_max / 2.0;
    let ansatz_curvature = -config.v0 * config.v0 / (8.0 * config.f0);
    let mut slices = Vec::new();
    let mut residual_samples = Vec::new();
    if let Some(grid) = grid {
        for snapshot in &record.snapshots {
            if snapshot.t == 0.0 {
                continue;
            }
            let Ok(field) = RadialField::new(grid, snapshot.values.clone()) else {
                continue;
            };
            let n = field.len();
            let (ellipse, ellipse_predicted) = if config.profile == Profile::Line {
                let baseline = field.values()[n - 2];
                (
                    fit_ellipse(&field, baseline).ok(),
                    predicted
                        .as_ref()
                        .map(|_| predicted_ellipse(config.f0, config.v0, snapshot.t)),
                )
            } else {
                (None, None)
            };
            let profile = fit_profile_parabola(&field, r_window).ok();
            let profile_predicted = match (&predicted, config.profile) {
                (Some(pred), Profile::Parabola) => {
                    let tau = snapshot.t - pred.t_blowup;
                    Some((ansatz_curvature, pred.a * tau * tau))
                }
                _ => None,
            };
            slices.push(SliceComparison {
                t: snapshot.t,
                ellipse,
                ellipse_predicted,
                profile,
                profile_predicted,
            });

            if let Some(pred) = &predicted {
                if snapshot.t <= 0.9 * pred.t_blowup {
                    for r in [1.0, 2.0, 5.0] {
                        if r <= config.r_max {
                            if let Ok(value) =
                                ansatz_residual(config.model, config.f0, config.v0, r, snapshot.t)
                            {
                                residual_samples.push(ResidualSample {
                                    r,
                                    t: snapshot.t,
                                    value,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    ComparisonReport {
        predicted,
        origin,
        rel_err_a,
        rel_err_t,
        slices,
        residual_samples,
    }
}
