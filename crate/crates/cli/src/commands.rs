use std::collections::BTreeMap;

use monopole_core::dynamics::{
    circular_orbit, closure_analysis, integrate, ClosureReport, IntegrateOptions, Method, StepStats, TerminationEvent,
    DRIFT_NAMES,
};
use monopole_core::parity::{certify_all, numeric_consistency};
use monopole_core::sampling::sample_point_positive_s;
use monopole_core::transforms::{
    from_taubnut, map_exponent, reduce_2d, taubnut_hamiltonian, to_taubnut, PWParams, TaubNutPoint,
};
use monopole_core::verify::verify_model;
use monopole_core::{Model, PhasePoint, RationalM};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Direction, ExperimentConfig, MethodName, PointSpec};
use crate::output::{num, OutDir};
use crate::CliError;

/// Result of a command: whether every check passed, plus a short summary.
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
}

fn numerical(e: monopole_core::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Serialize)]
struct VerifySummary {
    m: String,
    n_requested: u64,
    n_evaluated: usize,
    n_skipped: usize,
    max_x1_h: f64,
    max_x2_h: f64,
    max_calx_h: f64,
    max_offbranch_residual: f64,
    rank4_fraction: f64,
    tolerance: f64,
    brackets_pass: bool,
    rank_pass: bool,
}

#[derive(Serialize)]
struct VerifyFile {
    seed: u64,
    passed: bool,
    reports: Vec<VerifySummary>,
}

pub fn verify(cfg: &ExperimentConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let v = &cfg.verify;
    let ms: Vec<RationalM> = if v.m_list.is_empty() {
        vec![cfg.params.m]
    } else {
        v.m_list.clone()
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for m in ms {
        let md = cfg.model_with_m(m)?;
        let rep = verify_model(&md, cfg.seed, v.n_points, v.max_tries, v.tolerance).map_err(numerical)?;
        for c in &rep.points {
            let mut row = vec![rep.m.clone(), c.index.to_string()];
            row.extend(c.point.to_array().iter().map(|&x| num(x)));
            row.extend([num(c.x1_h), num(c.x2_h), num(c.calx_h), num(c.offbranch_residual)]);
            row.push(c.rank.to_string());
            rows.push(row);
        }
        let rank_pass = rep.n_evaluated > 0 && rep.rank4_fraction >= v.min_rank4_fraction;
        summary.push(format!(
            "m = {}: {} points ({} skipped), max brackets {:.3e} {:.3e} {:.3e}, rank-4 fraction {:.3}",
            rep.m, rep.n_evaluated, rep.n_skipped, rep.max_x1_h, rep.max_x2_h, rep.max_calx_h, rep.rank4_fraction
        ));
        reports.push(VerifySummary {
            m: rep.m,
            n_requested: rep.n_requested,
            n_evaluated: rep.n_evaluated,
            n_skipped: rep.n_skipped,
            max_x1_h: rep.max_x1_h,
            max_x2_h: rep.max_x2_h,
            max_calx_h: rep.max_calx_h,
            max_offbranch_residual: rep.max_offbranch_residual,
            rank4_fraction: rep.rank4_fraction,
            tolerance: rep.tolerance,
            brackets_pass: rep.brackets_pass,
            rank_pass,
        });
    }
    out.csv(
        "verify_points.csv",
        &[
            "m",
            "index",
            "r",
            "theta",
            "phi",
            "p_r",
            "p_theta",
            "p_phi",
            "x1_h",
            "x2_h",
            "calx_h",
            "offbranch_residual",
            "rank",
        ],
        rows,
    )?;
    let passed = reports.iter().all(|r| r.brackets_pass && r.rank_pass);
    out.json(
        "verify.json",
        &VerifyFile {
            seed: cfg.seed,
            passed,
            reports,
        },
    )?;
    Ok(Outcome { passed, summary })
}

#[derive(Serialize)]
struct TrajectorySummary {
    index: usize,
    file: String,
    initial: PointSpec,
    event: TerminationEvent,
    t_final: f64,
    samples: usize,
    step_stats: StepStats,
    max_drift: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct SimulateFile {
    method: MethodName,
    dt: f64,
    t_end: f64,
    max_drift_limit: Option<f64>,
    passed: bool,
    trajectories: Vec<TrajectorySummary>,
}

pub fn simulate(cfg: &ExperimentConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let s = &cfg.simulate;
    let md = cfg.model()?;
    let opts = IntegrateOptions {
        dt: s.dt,
        newton_tol: s.newton_tol,
        sample_every: s.sample_every,
        method: match s.method {
            MethodName::Midpoint => Method::ImplicitMidpoint,
            MethodName::Rk45 => Method::Rk45 { tol: s.rk_tol },
        },
        track_drift: true,
    };
    let starts: Vec<PhasePoint> = s.initial.iter().map(|p| p.phase_point()).collect::<Result<_, _>>()?;
    let trajs = starts
        .par_iter()
        .map(|z| integrate(&md, z, s.t_end, &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(numerical)?;

    let mut summaries = Vec::new();
    let mut lines = Vec::new();
    for (i, tr) in trajs.iter().enumerate() {
        let file = format!("trajectory_{i:03}.csv");
        let rows = tr.times.iter().zip(&tr.states).zip(&tr.drift_log).map(|((&t, z), d)| {
            let mut row = vec![num(t)];
            row.extend(z.to_array().iter().map(|&x| num(x)));
            row.extend(d.iter().map(|&x| num(x)));
            row
        });
        out.csv(
            &file,
            &[
                "t", "r", "theta", "phi", "p_r", "p_theta", "p_phi", "dH", "dX1", "dX2", "dX",
            ],
            rows,
        )?;
        let md_arr = tr.max_drift();
        lines.push(format!(
            "trajectory {i}: {:?}, t = {}, max drift H {:.3e} X1 {:.3e} X2 {:.3e} X {:.3e}",
            tr.event,
            tr.times.last().copied().unwrap_or(0.0),
            md_arr[0],
            md_arr[1],
            md_arr[2],
            md_arr[3]
        ));
        summaries.push(TrajectorySummary {
            index: i,
            file,
            initial: s.initial[i],
            event: tr.event.clone(),
            t_final: *tr.times.last().expect("trajectory holds the initial state"),
            samples: tr.times.len(),
            step_stats: tr.step_stats,
            max_drift: DRIFT_NAMES.iter().copied().zip(md_arr).collect(),
        });
    }
    let passed = match s.max_drift {
        Some(lim) => summaries.iter().all(|t| t.max_drift.values().all(|&d| !(d > lim))),
        None => true,
    };
    out.json(
        "simulate_summary.json",
        &SimulateFile {
            method: s.method,
            dt: s.dt,
            t_end: s.t_end,
            max_drift_limit: s.max_drift,
            passed,
            trajectories: summaries,
        },
    )?;
    Ok(Outcome { passed, summary: lines })
}

#[derive(Serialize)]
struct ClosureEntry {
    label: String,
    initial: PhasePoint,
    a: f64,
    b: f64,
    c: f64,
    expect_closes: Option<bool>,
    report: ClosureReport,
}

#[derive(Serialize)]
struct ClosureFile {
    passed: bool,
    cases: Vec<ClosureEntry>,
}

pub fn closure(cfg: &ExperimentConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let c = &cfg.closure;
    let opts = IntegrateOptions {
        dt: c.dt,
        ..IntegrateOptions::default()
    };
    let prepared: Vec<(Model, PhasePoint)> = c
        .cases
        .iter()
        .map(|case| {
            let md = cfg.closure_model(case)?;
            let mut z = case.initial.phase_point()?;
            if case.circular {
                let w = cfg.window;
                z = circular_orbit(&md, z.theta, z.p_theta, z.p_phi, w.r_min, w.r_max).map_err(numerical)?;
            }
            Ok((md, z))
        })
        .collect::<Result<_, CliError>>()?;
    let reports = prepared
        .par_iter()
        .map(|(md, z)| closure_analysis(md, z, c.t_end, c.eps_close, c.t_guard, &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(numerical)?;

    let mut passed = true;
    let mut lines = Vec::new();
    let mut cases = Vec::new();
    for ((case, (md, z)), report) in c.cases.iter().zip(&prepared).zip(reports) {
        if case.expect_closes.is_some_and(|e| e != report.closes) {
            passed = false;
        }
        lines.push(format!(
            "{}: bounded {}, closes {}, min recurrence distance {:.3e} at t = {:.4}",
            case.label, report.bounded, report.closes, report.min_recurrence_distance, report.t_at_min
        ));
        let p = md.params();
        cases.push(ClosureEntry {
            label: case.label.clone(),
            initial: *z,
            a: p.a,
            b: p.b,
            c: p.c,
            expect_closes: case.expect_closes,
            report,
        });
    }
    out.json("closure.json", &ClosureFile { passed, cases })?;
    Ok(Outcome { passed, summary: lines })
}

pub fn parity(cfg: &ExperimentConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let p = &cfg.parity;
    let reports = certify_all(p.max_m1m2);
    let consistency: Vec<Option<f64>> = reports
        .par_iter()
        .map(|r| {
            if p.consistency_points == 0 {
                return Ok(None);
            }
            let md = cfg.model_with_m(RationalM::new(r.m1 as i64, r.m2 as i64).expect("coprime pair"))?;
            let mut worst = 0.0f64;
            for i in 0..p.consistency_points {
                if let Some(z) = sample_point_positive_s(&md, cfg.seed, i, 200) {
                    worst = worst.max(numeric_consistency(&md, &z, r.m1, r.m2).map_err(numerical)?);
                }
            }
            Ok(Some(worst))
        })
        .collect::<Result<_, CliError>>()?;

    let rows = reports.iter().zip(&consistency).map(|(r, err)| {
        vec![
            r.m1.to_string(),
            r.m2.to_string(),
            format!("{:?}", r.branch),
            r.divided_by_sqrt_s.to_string(),
            r.all_integer_s_powers.to_string(),
            r.all_even_s_powers.to_string(),
            r.monomial_count.to_string(),
            num(r.min_s_power),
            num(r.max_s_power),
            r.max_abs_coeff.to_string(),
            err.map(num).unwrap_or_default(),
        ]
    });
    out.csv(
        "parity.csv",
        &[
            "m1",
            "m2",
            "branch",
            "divided_by_sqrt_s",
            "all_integer_s_powers",
            "all_even_s_powers",
            "monomial_count",
            "min_s_power",
            "max_s_power",
            "max_abs_coeff",
            "max_numeric_error",
        ],
        rows,
    )?;
    let certified = reports.iter().filter(|r| r.all_integer_s_powers).count();
    let even = reports.iter().filter(|r| r.all_even_s_powers).count();
    let mut lines = vec![format!(
        "{certified}/{} coprime pairs with m1, m2 <= {} have integer S powers; {even} have only even powers",
        reports.len(),
        p.max_m1m2
    )];
    let worst = consistency
        .iter()
        .flatten()
        .copied()
        .fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
    if let Some(w) = worst {
        lines.push(format!("worst symbolic vs numeric error {w:.3e}"));
    }
    Ok(Outcome {
        passed: certified == reports.len(),
        summary: lines,
    })
}

#[derive(Serialize)]
struct MappedPoint {
    input: [f64; 6],
    output: [f64; 6],
    /// `H` at the monopole-chart point.
    hamiltonian: Option<f64>,
    /// Printed Taub-NUT Hamiltonian at the Taub-NUT point.
    hamiltonian_taubnut: Option<f64>,
}

#[derive(Serialize)]
struct MapFile {
    direction: Direction,
    m: String,
    delta: i8,
    nu: f64,
    exponent: f64,
    phi_period: f64,
    big_phi_period: f64,
    points: Vec<MappedPoint>,
}

pub fn map(cfg: &ExperimentConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let md = cfg.model()?;
    let pts = cfg.map_points()?;
    let s = map_exponent(&md);
    let mut points = Vec::new();
    for p in &pts {
        let (z, zt) = match cfg.map.direction {
            Direction::ToTaubnut => {
                let z = p.phase_point()?;
                (z, to_taubnut(&md, &z).map_err(numerical)?)
            }
            Direction::FromTaubnut => {
                let zt = TaubNutPoint::from_array(p.to_array());
                (from_taubnut(&md, &zt).map_err(numerical)?, zt)
            }
        };
        let (input, output) = match cfg.map.direction {
            Direction::ToTaubnut => (z.to_array(), zt.to_array()),
            Direction::FromTaubnut => (zt.to_array(), z.to_array()),
        };
        points.push(MappedPoint {
            input,
            output,
            hamiltonian: md.hamiltonian(&z).ok(),
            hamiltonian_taubnut: taubnut_hamiltonian(&md, &zt).ok(),
        });
    }
    let phi_period = md.phi_period();
    out.json(
        "map.json",
        &MapFile {
            direction: cfg.map.direction,
            m: cfg.params.m.to_string(),
            delta: cfg.params.delta,
            nu: cfg.params.nu,
            exponent: s,
            phi_period,
            big_phi_period: phi_period / s.abs(),
            points,
        },
    )?;
    Ok(Outcome {
        passed: true,
        summary: vec![format!("mapped {} points with exponent {s}", pts.len())],
    })
}

#[derive(Serialize)]
struct Reduce2dFile {
    m: String,
    k: f64,
    theta_scale: f64,
    reductions: Vec<PWParams>,
}

pub fn reduce2d(cfg: &ExperimentConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let md = cfg.model()?;
    let reductions = cfg
        .reduce2d
        .p0
        .iter()
        .map(|&p0| reduce_2d(&md, p0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let n = reductions.len();
    out.json(
        "reduce2d.json",
        &Reduce2dFile {
            m: cfg.params.m.to_string(),
            k: cfg.params.k,
            theta_scale: md.m(),
            reductions,
        },
    )?;
    Ok(Outcome {
        passed: true,
        summary: vec![format!("{n} reductions with mu = {}", 0.5 / md.m())],
    })
}
