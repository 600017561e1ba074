//! Scalar curvature of the configuration-space metric, in closed form and
//! from finite-difference Christoffel symbols.

use std::f64::consts::FRAC_PI_2;

use crate::error::Result;
use crate::model::Model;

/// `2(1 - m²) / (m² (α₁ + β₁ r) r) + 3 α₁² / (2 (α₁ + β₁ r)³ r)`.
pub fn scalar_curvature_closed(model: &Model, r: f64) -> Result<f64> {
    model.check_r(r)?;
    let m2 = model.m_sq();
    let a1 = model.params().alpha1;
    let prof = model.profile(r);
    Ok(2.0 * (1.0 - m2) / (m2 * prof * r) + 3.0 * a1 * a1 / (2.0 * prof.powi(3) * r))
}

/// Diagonal metric components `(g_rr, g_θθ, g_φφ)` at `(r, θ)`.
pub fn metric_diagonal(model: &Model, x: [f64; 3]) -> [f64; 3] {
    let [r, theta, _] = x;
    let conf = model.profile(r) / r;
    let s = theta.sin();
    [conf, conf * model.m_sq() * r * r, conf * r * r * s * s]
}

/// Step that balances truncation and round-off for the extrapolated scheme.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Ricci scalar at `(r, θ = π/2)`.
pub fn scalar_curvature_numeric(model: &Model, r: f64, step: f64) -> Result<f64> {
    scalar_curvature_numeric_at(model, r, FRAC_PI_2, step)
}

/// Nested central differences at steps `h` and `2h`, combined by Richardson
/// extrapolation to cancel the `O(h²)` term.
pub fn scalar_curvature_numeric_at(model: &Model, r: f64, theta: f64, step: f64) -> Result<f64> {
    model.check_r(r)?;
    model.check_theta(theta)?;
    let metric = |x: [f64; 3]| metric_diagonal(model, x);
    let x = [r, theta, 0.0];
    let fine = ricci_scalar_diagonal(&metric, x, step);
    let coarse = ricci_scalar_diagonal(&metric, x, 2.0 * step);
    Ok((4.0 * fine - coarse) / 3.0)
}

type Christoffel = [[[f64; 3]; 3]; 3];

/// `Γ^a_{bc}` of a diagonal metric, with `∂_c g_aa` from central differences.
fn christoffel(metric: &dyn Fn([f64; 3]) -> [f64; 3], x: [f64; 3], h: f64) -> Christoffel {
    let g = metric(x);
    // dg[c][a] = ∂_c g_aa
    let mut dg = [[0.0; 3]; 3];
    for (c, row) in dg.iter_mut().enumerate() {
        let mut up = x;
        let mut dn = x;
        up[c] += h;
        dn[c] -= h;
        let (gu, gd) = (metric(up), metric(dn));
        for a in 0..3 {
            row[a] = (gu[a] - gd[a]) / (2.0 * h);
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                if a == c {
                    s += dg[b][a];
                }
                if a == b {
                    s += dg[c][a];
                }
                if b == c {
                    s -= dg[a][b];
                }
                gamma[a][b][c] = 0.5 * s / g[a];
            }
        }
    }
    gamma
}

/// `R = g^{bd} R_{bd}` with
/// `R_{bd} = ∂_a Γ^a_{bd} - ∂_d Γ^a_{ab} + Γ^a_{ae} Γ^e_{bd} - Γ^a_{de} Γ^e_{ab}`.
fn ricci_scalar_diagonal(metric: &dyn Fn([f64; 3]) -> [f64; 3], x: [f64; 3], h: f64) -> f64 {
    let g = metric(x);
    let gamma = christoffel(metric, x, h);
    // dgamma[e] = ∂_e Γ
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    for (e, slot) in dgamma.iter_mut().enumerate() {
        let mut up = x;
        let mut dn = x;
        up[e] += h;
        dn[e] -= h;
        let (gu, gd) = (christoffel(metric, up, h), christoffel(metric, dn, h));
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    slot[a][b][c] = (gu[a][b][c] - gd[a][b][c]) / (2.0 * h);
                }
            }
        }
    }
    let mut scalar = 0.0;
    for b in 0..3 {
        let d = b;
        let mut ric = 0.0;
        for a in 0..3 {
            ric += dgamma[a][a][b][d] - dgamma[d][a][a][b];
            for e in 0..3 {
                ric += gamma[a][a][e] * gamma[e][b][d] - gamma[a][d][e] * gamma[e][a][b];
            }
        }
        scalar += ric / g[b];
    }
    scalar
}
