//! Batch verification of the integrals at random phase points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::integrals::{eval_calx, independence_rank, poisson_bracket, Integral, Observable};
use crate::model::{Model, PhasePoint};
use crate::sampling::sample_point_positive_s;

/// Default bound on `|{X, H}| / (|∇X| |∇H|)`.
pub const BRACKET_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCheck {
    pub index: u64,
    pub point: PhasePoint,
    /// Relative brackets `{X₁,H}`, `{X₂,H}`, `{𝒳,H}`.
    pub x1_h: f64,
    pub x2_h: f64,
    pub calx_h: f64,
    pub offbranch_residual: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub m: String,
    pub n_requested: u64,
    pub n_evaluated: usize,
    /// Points dropped because `S <= 0` after all redraws.
    pub n_skipped: usize,
    pub max_x1_h: f64,
    pub max_x2_h: f64,
    pub max_calx_h: f64,
    pub max_offbranch_residual: f64,
    pub rank4_fraction: f64,
    pub tolerance: f64,
    pub brackets_pass: bool,
    pub points: Vec<PointCheck>,
}

pub fn check_point(model: &Model, index: u64, z: &PhasePoint) -> Result<PointCheck> {
    let [h, x1, x2, cx] = Integral::all(model);
    let rel = |f: &Integral| poisson_bracket(f, &h, z).map(|b| b.relative());
    let obs: [&dyn Observable; 4] = [&h, &x1, &x2, &cx];
    Ok(PointCheck {
        index,
        point: *z,
        x1_h: rel(&x1)?,
        x2_h: rel(&x2)?,
        calx_h: rel(&cx)?,
        offbranch_residual: eval_calx(model, z)?.offbranch_residual,
        rank: independence_rank(&obs, z)?,
    })
}

/// Checks brackets and rank at `n_points` points keyed by `(seed, index)`.
///
/// `max_tries = 1` skips points with `S <= 0`; larger values redraw.
/// Runs in parallel; results are ordered by index.
pub fn verify_model(model: &Model, seed: u64, n_points: u64, max_tries: usize, tol: f64) -> Result<VerifyReport> {
    let checks: Vec<Option<PointCheck>> = (0..n_points)
        .into_par_iter()
        .map(|i| match sample_point_positive_s(model, seed, i, max_tries.max(1)) {
            Some(z) => check_point(model, i, &z).map(Some),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    let n_skipped = checks.iter().filter(|c| c.is_none()).count();
    let points: Vec<PointCheck> = checks.into_iter().flatten().collect();
    let max = |f: fn(&PointCheck) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let (max_x1_h, max_x2_h, max_calx_h) = (max(|c| c.x1_h), max(|c| c.x2_h), max(|c| c.calx_h));
    let rank4 = points.iter().filter(|c| c.rank == 4).count();
    Ok(VerifyReport {
        m: model.params().m.to_string(),
        n_requested: n_points,
        n_evaluated: points.len(),
        n_skipped,
        max_x1_h,
        max_x2_h,
        max_calx_h,
        max_offbranch_residual: max(|c| c.offbranch_residual),
        rank4_fraction: if points.is_empty() {
            0.0
        } else {
            rank4 as f64 / points.len() as f64
        },
        tolerance: tol,
        brackets_pass: max_x1_h <= tol && max_x2_h <= tol && max_calx_h <= tol,
        points,
    })
}
