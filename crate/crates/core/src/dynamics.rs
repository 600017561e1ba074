//! Hamilton's equations, time integration and orbit-closure analysis.

use nalgebra::{Matrix6, Vector6};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{eval_calx, eval_x1, eval_x2};
use crate::model::{Model, PhasePoint};

/// `(∂H/∂p, -∂H/∂q)`.
pub fn hamilton_rhs(model: &Model, z: &PhasePoint) -> Result<[f64; 6]> {
    let g = model.hamiltonian_gradient(z)?;
    Ok(symplectic_gradient(&g))
}

#[inline]
fn symplectic_gradient(g: &[f64; 6]) -> [f64; 6] {
    [g[3], g[4], g[5], -g[0], -g[1], -g[2]]
}

fn domain_exit(e: Error) -> Error {
    match e {
        Error::OutOfDomain { .. } => Error::DomainExit,
        other => other,
    }
}

fn vec6(a: [f64; 6]) -> Vector6<f64> {
    Vector6::from_row_slice(&a)
}

fn arr6(v: &Vector6<f64>) -> [f64; 6] {
    [v[0], v[1], v[2], v[3], v[4], v[5]]
}

pub const MAX_NEWTON_ITERATIONS: usize = 25;

/// Result of one implicit midpoint step.
#[derive(Clone, Copy, Debug)]
pub struct MidpointStep {
    pub z: PhasePoint,
    pub newton_iterations: usize,
}

/// One step of the implicit midpoint rule `z' = z + dt f((z + z')/2)`.
///
/// Newton's method on the 6-dimensional residual with the exact Jacobian
/// `I - dt/2 · J·∇²H` from nested duals, refreshed every iteration, and
/// step halving whenever the residual grows. Converged once
/// `|residual| <= tol_newton · max(1, |z|)`.
pub fn step_implicit_midpoint(model: &Model, z: &PhasePoint, dt: f64, tol_newton: f64) -> Result<PhasePoint> {
    step_implicit_midpoint_counted(model, z, dt, tol_newton).map(|s| s.z)
}

pub fn step_implicit_midpoint_counted(model: &Model, z: &PhasePoint, dt: f64, tol_newton: f64) -> Result<MidpointStep> {
    if dt == 0.0 {
        return Ok(MidpointStep {
            z: *z,
            newton_iterations: 0,
        });
    }
    let z0 = vec6(z.to_array());
    let scale = z0.norm().max(1.0);
    let residual = |zn: &Vector6<f64>| -> Result<Vector6<f64>> {
        let mid = PhasePoint::from_array(arr6(&((z0 + zn) * 0.5)));
        let f = hamilton_rhs(model, &mid).map_err(domain_exit)?;
        Ok(zn - z0 - vec6(f) * dt)
    };
    let f0 = hamilton_rhs(model, z).map_err(domain_exit)?;
    let mut zn = z0 + vec6(f0) * dt;
    let mut res = residual(&zn)?;
    let mut res_norm = res.norm();
    for it in 0..MAX_NEWTON_ITERATIONS {
        if res_norm <= tol_newton * scale {
            return Ok(MidpointStep {
                z: PhasePoint::from_array(arr6(&zn)),
                newton_iterations: it,
            });
        }
        let mid = PhasePoint::from_array(arr6(&((z0 + zn) * 0.5)));
        let (_, _, hess) = model.hamiltonian_hessian(&mid).map_err(domain_exit)?;
        // d f / d z = J · Hess, with J = [[0, I], [-I, 0]]
        let mut jac = Matrix6::<f64>::identity();
        for j in 0..6 {
            for i in 0..3 {
                jac[(i, j)] -= 0.5 * dt * hess[i + 3][j];
                jac[(i + 3, j)] += 0.5 * dt * hess[i][j];
            }
        }
        let delta = jac.lu().solve(&(-res)).ok_or(Error::NewtonDiverged {
            residual: res_norm,
            iterations: it,
        })?;
        let mut lambda = 1.0;
        loop {
            let trial = zn + delta * lambda;
            match residual(&trial) {
                Ok(r) if r.norm() < res_norm || lambda < 1.0 / 64.0 => {
                    zn = trial;
                    res = r;
                    res_norm = res.norm();
                    break;
                }
                Err(e) if lambda < 1.0 / 64.0 => return Err(e),
                _ => lambda *= 0.5,
            }
        }
        if delta.norm() * lambda <= f64::EPSILON * scale && res_norm <= 1e3 * tol_newton * scale {
            // Stagnated at round-off level.
            return Ok(MidpointStep {
                z: PhasePoint::from_array(arr6(&zn)),
                newton_iterations: it + 1,
            });
        }
    }
    if res_norm <= tol_newton * scale {
        return Ok(MidpointStep {
            z: PhasePoint::from_array(arr6(&zn)),
            newton_iterations: MAX_NEWTON_ITERATIONS,
        });
    }
    Err(Error::NewtonDiverged {
        residual: res_norm,
        iterations: MAX_NEWTON_ITERATIONS,
    })
}

/// Result of one accepted adaptive Runge-Kutta step.
#[derive(Clone, Copy, Debug)]
pub struct RkStep {
    pub z_next: PhasePoint,
    pub dt_used: f64,
    pub dt_next: f64,
    pub error_estimate: f64,
    pub rejected: usize,
}

pub const MIN_RK_STEP: f64 = 1e-12;

// Dormand-Prince 5(4) tableau.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Embedded Dormand-Prince 5(4) stepper with a PI step-size controller.
///
/// The error norm is `max_i |e_i| / (1 + max(|z_i|, |z'_i|))`.
#[derive(Clone, Debug)]
pub struct RkStepper {
    pub tol: f64,
    prev_error: Option<f64>,
}

impl RkStepper {
    pub fn new(tol: f64) -> Self {
        Self { tol, prev_error: None }
    }

    fn attempt(&self, model: &Model, z: &Vector6<f64>, dt: f64) -> Result<(Vector6<f64>, f64)> {
        let mut k = [Vector6::<f64>::zeros(); 7];
        for s in 0..7 {
            let mut y = *z;
            for (j, kj) in k.iter().enumerate().take(s) {
                y += kj * (DP_A[s][j] * dt);
            }
            let f = hamilton_rhs(model, &PhasePoint::from_array(arr6(&y))).map_err(domain_exit)?;
            k[s] = vec6(f);
        }
        let mut y5 = *z;
        let mut err = Vector6::<f64>::zeros();
        for s in 0..7 {
            y5 += k[s] * (DP_B5[s] * dt);
            err += k[s] * ((DP_B5[s] - DP_B4[s]) * dt);
        }
        let norm = (0..6)
            .map(|i| err[i].abs() / (1.0 + z[i].abs().max(y5[i].abs())))
            .fold(0.0, f64::max);
        Ok((y5, norm))
    }

    pub fn step(&mut self, model: &Model, z: &PhasePoint, dt_suggest: f64) -> Result<RkStep> {
        let z0 = vec6(z.to_array());
        let mut dt = dt_suggest;
        let mut rejected = 0;
        loop {
            if dt.abs() < MIN_RK_STEP {
                return Err(Error::StepUnderflow(MIN_RK_STEP));
            }
            let (y, err) = self.attempt(model, &z0, dt)?;
            if err <= self.tol {
                let ratio = if err == 0.0 {
                    5.0
                } else {
                    let prev = self.prev_error.unwrap_or(err).max(1e-300);
                    0.9 * (self.tol / err).powf(0.7 / 5.0) * (prev / self.tol).powf(0.4 / 5.0)
                };
                self.prev_error = Some(err.max(1e-300));
                let z_next = PhasePoint::from_array(arr6(&y));
                model.check_point(&z_next).map_err(domain_exit)?;
                return Ok(RkStep {
                    z_next,
                    dt_used: dt,
                    dt_next: dt * ratio.clamp(0.2, 5.0),
                    error_estimate: err,
                    rejected,
                });
            }
            rejected += 1;
            dt *= (0.9 * (self.tol / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
}

/// Single adaptive step without controller history.
pub fn step_rk_adaptive(model: &Model, z: &PhasePoint, dt_suggest: f64, tol: f64) -> Result<RkStep> {
    RkStepper::new(tol).step(model, z, dt_suggest)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Method {
    ImplicitMidpoint,
    Rk45 { tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegrateOptions {
    /// Fixed step for the midpoint rule; initial step for RK45.
    pub dt: f64,
    pub newton_tol: f64,
    /// Record every `sample_every`-th accepted step.
    pub sample_every: usize,
    pub method: Method,
    /// Evaluate the drift of the integrals at each sample.
    pub track_drift: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            newton_tol: 1e-14,
            sample_every: 1,
            method: Method::ImplicitMidpoint,
            track_drift: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TerminationEvent {
    Completed,
    DomainExit { t: f64 },
}

/// Integrals whose drift is tracked, in `drift_log` column order.
pub const DRIFT_NAMES: [&str; 4] = ["H", "X1", "X2", "X"];

/// Time series of phase points with relative drift of `(H, X₁, X₂, 𝒳)`.
///
/// Drift is `|f(t) - f(0)| / max(|f(0)|, s)` with `s = 1` for the quadratic
/// integrals and `s` the conserved modulus `|w_r|^{m₂}|w_θ|^{m₁}` for `𝒳`.
/// Entries are NaN where an integral is undefined (gauge `ℓ ≠ 0`, `S ≤ 0`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub drift_log: Vec<[f64; 4]>,
    pub step_stats: StepStats,
    pub event: TerminationEvent,
}

impl Trajectory {
    pub fn max_drift(&self) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for row in &self.drift_log {
            for i in 0..4 {
                if row[i].is_finite() {
                    out[i] = out[i].max(row[i]);
                } else if row[i].is_nan() && !out[i].is_nan() && self.drift_log[0][i].is_nan() {
                    out[i] = f64::NAN;
                }
            }
        }
        out
    }

    pub fn completed(&self) -> bool {
        self.event == TerminationEvent::Completed
    }

    pub fn final_state(&self) -> PhasePoint {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

struct DriftTracker<'a> {
    model: &'a Model,
    reference: [f64; 4],
    floor: [f64; 4],
}

impl<'a> DriftTracker<'a> {
    fn values(model: &Model, z: &PhasePoint) -> ([f64; 4], f64) {
        let h = model.hamiltonian(z).unwrap_or(f64::NAN);
        let x1 = eval_x1(model, z);
        let x2 = eval_x2(model, z).unwrap_or(f64::NAN);
        let (x, modulus) = eval_calx(model, z)
            .map(|c| (c.value, c.modulus))
            .unwrap_or((f64::NAN, f64::NAN));
        ([h, x1, x2, x], modulus)
    }

    fn new(model: &'a Model, z0: &PhasePoint) -> Self {
        let (reference, modulus) = Self::values(model, z0);
        Self {
            model,
            reference,
            floor: [1.0, 1.0, 1.0, modulus],
        }
    }

    fn drift(&self, z: &PhasePoint) -> [f64; 4] {
        let (v, _) = Self::values(self.model, z);
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = (v[i] - self.reference[i]).abs() / self.reference[i].abs().max(self.floor[i]);
        }
        out
    }
}

pub fn integrate(model: &Model, z0: &PhasePoint, t_end: f64, options: &IntegrateOptions) -> Result<Trajectory> {
    model.check_point(z0)?;
    if !(options.dt > 0.0) || options.sample_every == 0 {
        return Err(Error::InvalidParameter(
            "integration needs dt > 0 and sample_every >= 1".into(),
        ));
    }
    let tracker = options.track_drift.then(|| DriftTracker::new(model, z0));
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*z0],
        drift_log: vec![],
        step_stats: StepStats::default(),
        event: TerminationEvent::Completed,
    };
    if let Some(tr) = &tracker {
        traj.drift_log.push(tr.drift(z0));
    }
    let record = |traj: &mut Trajectory, t: f64, z: PhasePoint| {
        traj.times.push(t);
        traj.states.push(z);
        if let Some(tr) = &tracker {
            traj.drift_log.push(tr.drift(&z));
        }
    };

    let mut z = *z0;
    let mut t = 0.0;
    match options.method {
        Method::ImplicitMidpoint => {
            let n_steps = (t_end / options.dt).round() as usize;
            for step in 1..=n_steps {
                match step_implicit_midpoint_counted(model, &z, options.dt, options.newton_tol) {
                    Ok(s) => {
                        traj.step_stats.accepted += 1;
                        traj.step_stats.newton_iterations += s.newton_iterations;
                        z = s.z;
                        t = step as f64 * options.dt;
                    }
                    Err(Error::DomainExit) => {
                        traj.event = TerminationEvent::DomainExit { t };
                        break;
                    }
                    Err(e) => return Err(e),
                }
                if model.check_point(&z).is_err() {
                    traj.event = TerminationEvent::DomainExit { t };
                    break;
                }
                if step % options.sample_every == 0 || step == n_steps {
                    record(&mut traj, t, z);
                }
            }
        }
        Method::Rk45 { tol } => {
            let mut stepper = RkStepper::new(tol);
            let mut dt = options.dt;
            let mut step = 0usize;
            while t < t_end {
                let h = dt.min(t_end - t);
                match stepper.step(model, &z, h) {
                    Ok(s) => {
                        step += 1;
                        traj.step_stats.accepted += 1;
                        traj.step_stats.rejected += s.rejected;
                        z = s.z_next;
                        t = if h == t_end - t { t_end } else { t + s.dt_used };
                        dt = s.dt_next;
                    }
                    Err(Error::DomainExit) => {
                        traj.event = TerminationEvent::DomainExit { t };
                        break;
                    }
                    Err(e) => return Err(e),
                }
                if step % options.sample_every == 0 || t >= t_end {
                    record(&mut traj, t, z);
                }
            }
        }
    }
    Ok(traj)
}

/// Radial equilibrium on the cone: solves `∂_r H = 0` at `p_r = 0` for
/// given `(θ, p_θ, p_φ)` inside `[r_lo, r_hi]`.
pub fn circular_orbit(model: &Model, theta: f64, p_theta: f64, p_phi: f64, r_lo: f64, r_hi: f64) -> Result<PhasePoint> {
    let dh_dr = |r: f64| -> f64 {
        let z = PhasePoint {
            r,
            theta,
            phi: 0.0,
            p_r: 0.0,
            p_theta,
            p_phi,
        };
        model.hamiltonian_gradient(&z).map(|g| g[0]).unwrap_or(f64::NAN)
    };
    let mut conv = roots::SimpleConvergency {
        eps: 1e-15,
        max_iter: 200,
    };
    let r = roots::find_root_brent(r_lo, r_hi, &dh_dr, &mut conv)
        .map_err(|e| Error::InvalidParameter(format!("no radial equilibrium in bracket: {e:?}")))?;
    PhasePoint::new(r, theta, 0.0, 0.0, p_theta, p_phi)
}

/// Outcome of the recurrence scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureReport {
    /// The orbit stayed inside the window for the whole horizon.
    pub bounded: bool,
    pub min_recurrence_distance: f64,
    pub t_at_min: f64,
    pub closes: bool,
    /// Local minima of the sampled recurrence distance that were refined.
    pub epochs_scanned: usize,
    pub t_guard: f64,
    pub eps_close: f64,
    pub t_end: f64,
    pub event: TerminationEvent,
}

/// Distance between phase points, with `φ` compared modulo `2π/ν`.
///
/// Each of `(r, θ, p_r, p_θ, p_φ)` is divided by `max(|initial value|, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct RecurrenceMetric {
    reference: PhasePoint,
    scales: [f64; 6],
    period: f64,
}

impl RecurrenceMetric {
    pub fn new(reference: PhasePoint, phi_period: f64) -> Self {
        let scales = reference.to_array().map(|x| x.abs().max(1.0));
        Self {
            reference,
            scales,
            period: phi_period,
        }
    }

    pub fn distance(&self, z: &PhasePoint) -> f64 {
        let a = z.to_array();
        let b = self.reference.to_array();
        let mut d2 = 0.0;
        for i in [0, 1, 3, 4, 5] {
            let d = (a[i] - b[i]) / self.scales[i];
            d2 += d * d;
        }
        let dphi = (a[2] - b[2]).rem_euclid(self.period);
        let dphi = dphi.min(self.period - dphi);
        d2 + dphi * dphi
    }
}

/// Cubic Hermite interpolation between two states using the vector field.
fn hermite(z0: &[f64; 6], f0: &[f64; 6], z1: &[f64; 6], f1: &[f64; 6], h: f64, s: f64) -> PhasePoint {
    let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
    let h10 = s * s * s - 2.0 * s * s + s;
    let h01 = -2.0 * s * s * s + 3.0 * s * s;
    let h11 = s * s * s - s * s;
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = h00 * z0[i] + h10 * h * f0[i] + h01 * z1[i] + h11 * h * f1[i];
    }
    PhasePoint::from_array(out)
}

/// Period of the radial oscillation estimated from successive maxima of `r`.
pub fn radial_period(traj: &Trajectory) -> Option<f64> {
    let mut peaks = Vec::new();
    for i in 1..traj.states.len().saturating_sub(1) {
        let (a, b, c) = (traj.states[i - 1].r, traj.states[i].r, traj.states[i + 1].r);
        if b > a && b >= c {
            peaks.push(traj.times[i]);
        }
    }
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

/// Default guard time: five radial periods, or 5% of the horizon when no
/// radial oscillation is visible.
pub fn default_t_guard(traj: &Trajectory, t_end: f64) -> f64 {
    match radial_period(traj) {
        Some(p) => (5.0 * p).min(0.5 * t_end),
        None => 0.05 * t_end,
    }
}

/// Minimum recurrence distance over `t > t_guard`, refined between samples.
pub fn recurrence_scan(model: &Model, traj: &Trajectory, t_guard: f64) -> Result<(f64, f64, usize)> {
    let metric = RecurrenceMetric::new(traj.states[0], model.phi_period());
    let d: Vec<f64> = traj.states.iter().map(|z| metric.distance(z)).collect();
    let mut best = (f64::INFINITY, f64::NAN);
    let mut epochs = 0;
    let n = traj.states.len();
    for i in 0..n {
        if traj.times[i] <= t_guard {
            continue;
        }
        if d[i] < best.0 {
            best = (d[i], traj.times[i]);
        }
        let is_local_min = i > 0 && i + 1 < n && d[i] <= d[i - 1] && d[i] <= d[i + 1];
        if !is_local_min {
            continue;
        }
        epochs += 1;
        // Refine on [t_{i-1}, t_{i+1}] with golden-section search.
        let zs = [traj.states[i - 1], traj.states[i], traj.states[i + 1]];
        let fs = [
            hamilton_rhs(model, &zs[0])?,
            hamilton_rhs(model, &zs[1])?,
            hamilton_rhs(model, &zs[2])?,
        ];
        let (ta, tb, tc) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
        let eval = |t: f64| -> f64 {
            let (k, t0, t1) = if t <= tb { (0, ta, tb) } else { (1, tb, tc) };
            let h = t1 - t0;
            let z = hermite(
                &zs[k].to_array(),
                &fs[k],
                &zs[k + 1].to_array(),
                &fs[k + 1],
                h,
                (t - t0) / h,
            );
            metric.distance(&z)
        };
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (ta.max(t_guard), tc);
        let mut x1 = hi - gr * (hi - lo);
        let mut x2 = lo + gr * (hi - lo);
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        for _ in 0..60 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = eval(x2);
            }
        }
        let (fm, tm) = if f1 < f2 { (f1, x1) } else { (f2, x2) };
        if fm < best.0 {
            best = (fm, tm);
        }
    }
    Ok((best.0.sqrt(), best.1, epochs))
}

/// Integrates with the implicit midpoint rule and scans for recurrences.
///
/// `t_guard = None` uses [`default_t_guard`].
pub fn closure_analysis(
    model: &Model,
    z0: &PhasePoint,
    t_end: f64,
    eps_close: f64,
    t_guard: Option<f64>,
    options: &IntegrateOptions,
) -> Result<ClosureReport> {
    let mut opts = *options;
    opts.sample_every = 1;
    opts.track_drift = false;
    let traj = integrate(model, z0, t_end, &opts)?;
    let bounded = traj.completed();
    let t_guard = t_guard.unwrap_or_else(|| default_t_guard(&traj, t_end));
    let (dist, t_min, epochs) = recurrence_scan(model, &traj, t_guard)?;
    Ok(ClosureReport {
        bounded,
        min_recurrence_distance: dist,
        t_at_min: t_min,
        closes: bounded && dist < eps_close,
        epochs_scanned: epochs,
        t_guard,
        eps_close,
        t_end,
        event: traj.event,
    })
}

/// Wraps an angle into `[0, period)`.
pub fn wrap_angle(phi: f64, period: f64) -> f64 {
    phi.rem_euclid(period)
}
