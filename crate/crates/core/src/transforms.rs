//! Canonical map to generalized Taub-NUT coordinates and the reduction to
//! the 2D Post-Winternitz system.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, PhasePoint};

/// Phase-space point in Taub-NUT coordinates `(R, Θ, Φ, P_R, P_Θ, P_Φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaubNutPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

impl TaubNutPoint {
    pub fn to_array(&self) -> [f64; 6] {
        [self.r, self.theta, self.phi, self.p_r, self.p_theta, self.p_phi]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            r: a[0],
            theta: a[1],
            phi: a[2],
            p_r: a[3],
            p_theta: a[4],
            p_phi: a[5],
        }
    }
}

/// `s = m δ`, the exponent of the radial map `r = R^s`.
pub fn map_exponent(model: &Model) -> f64 {
    model.m() * f64::from(model.params().delta)
}

fn check_polar(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < std::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "theta",
            value: theta,
        })
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain { what: "r", value: r })
    }
}

/// `R = r^{1/s}`, `Φ = φ/s`, `P_R = s R^{s-1} p_r`, `P_Φ = s p_φ`.
pub fn to_taubnut(model: &Model, z: &PhasePoint) -> Result<TaubNutPoint> {
    check_radius(z.r)?;
    check_polar(z.theta)?;
    let s = map_exponent(model);
    let r_cap = z.r.powf(1.0 / s);
    Ok(TaubNutPoint {
        r: r_cap,
        theta: z.theta,
        phi: z.phi / s,
        p_r: s * r_cap.powf(s - 1.0) * z.p_r,
        p_theta: z.p_theta,
        p_phi: s * z.p_phi,
    })
}

/// `r = R^s`, `φ = s Φ`, `p_r = R^{1-s} P_R / s`, `p_φ = P_Φ / s`.
pub fn from_taubnut(model: &Model, zt: &TaubNutPoint) -> Result<PhasePoint> {
    check_radius(zt.r)?;
    check_polar(zt.theta)?;
    let s = map_exponent(model);
    Ok(PhasePoint {
        r: zt.r.powf(s),
        theta: zt.theta,
        phi: s * zt.phi,
        p_r: zt.r.powf(1.0 - s) * zt.p_r / s,
        p_theta: zt.p_theta,
        p_phi: zt.p_phi / s,
    })
}

/// The three pieces of the printed Taub-NUT Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaubNutParts {
    pub kinetic: f64,
    /// `(α₂R^{2s} + β₂R^s + k²)/R²` term.
    pub radial: f64,
    /// `(4(a cos²(Θ/2) + b sin²(Θ/2)) + c)/(R² sin²Θ)` term.
    pub angular: f64,
}

impl TaubNutParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.radial + self.angular
    }
}

/// Evaluates the printed Taub-NUT Hamiltonian term by term, with gauge
/// potential `A_Φ = s A_φ`.
///
/// Does not check the `ν` convention; see [`taubnut_hamiltonian`].
pub fn taubnut_parts(model: &Model, zt: &TaubNutPoint) -> Result<TaubNutParts> {
    check_radius(zt.r)?;
    check_polar(zt.theta)?;
    let p = model.params();
    let s = map_exponent(model);
    let rs = zt.r.powf(s);
    let pref = zt.r.powf(2.0 - s) / (2.0 * model.m_sq() * (p.alpha1 + p.beta1 * rs));
    let r2 = zt.r * zt.r;
    let sin2 = zt.theta.sin().powi(2);
    let a_phi = s * model.vector_potential(zt.theta);
    let kinetic = pref * (zt.p_r * zt.p_r + zt.p_theta * zt.p_theta / r2 + (zt.p_phi + a_phi).powi(2) / (r2 * sin2));
    let radial = pref * (p.alpha2 * rs * rs + p.beta2 * rs + p.k * p.k) / r2;
    let half = zt.theta / 2.0;
    let angular = pref * (4.0 * (p.a * half.cos().powi(2) + p.b * half.sin().powi(2)) + p.c) / (r2 * sin2);
    Ok(TaubNutParts {
        kinetic,
        radial,
        angular,
    })
}

/// Tolerance on `ν |m δ| = 1` when entering Taub-NUT mode.
pub const NU_CONVENTION_TOL: f64 = 1e-12;

/// Printed Taub-NUT Hamiltonian; requires `ν = 1/|m δ|`.
pub fn taubnut_hamiltonian(model: &Model, zt: &TaubNutPoint) -> Result<f64> {
    let nu = model.params().nu;
    let target = 1.0 / map_exponent(model).abs();
    if (nu - target).abs() > NU_CONVENTION_TOL * target {
        return Err(Error::InvalidParameter(format!(
            "Taub-NUT mode needs nu = 1/|m delta| = {target}, got {nu}"
        )));
    }
    taubnut_parts(model, zt).map(|p| p.total())
}

/// Kinetic part of `H` (metric term with covariant momenta only).
pub fn kinetic_energy(model: &Model, z: &PhasePoint) -> Result<f64> {
    model.check_point(z)?;
    let p = model.params();
    let prof = p.alpha1 + p.beta1 * z.r;
    let sin2 = z.theta.sin().powi(2);
    let p_phi_a = model.p_phi_cov(z);
    Ok(z.r / (2.0 * prof)
        * (z.p_r * z.p_r + z.p_theta * z.p_theta / (model.m_sq() * z.r * z.r) + p_phi_a * p_phi_a / (z.r * z.r * sin2)))
}

/// Potential terms of the printed Taub-NUT Hamiltonian measured against
/// direct substitution into `H`.
///
/// Direct substitution gives `W₁` and `W₂/(r(α₁+β₁r))`; the printed form
/// carries `W₁/m²` and `W₂/(2m² r(α₁+β₁r))`. The report records the
/// measured ratios next to those closed-form expectations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub m: f64,
    pub delta: i8,
    pub point: PhasePoint,
    pub kinetic_residual: f64,
    /// Printed radial term divided by `W₁(r)`.
    pub ratio_radial: f64,
    pub expected_radial: f64,
    /// Printed angular term divided by `W₂(θ)/(r(α₁+β₁r))`; NaN when `W₂ = 0`.
    pub ratio_angular: f64,
    pub expected_angular: f64,
    /// `|𝓗(T z) - H(z)| / max(1, |H(z)|)` with all potentials on.
    pub full_residual: f64,
}

pub fn discrepancy_report(model: &Model, z: &PhasePoint) -> Result<DiscrepancyReport> {
    let zt = to_taubnut(model, z)?;
    let parts = taubnut_parts(model, &zt)?;
    let kin = kinetic_energy(model, z)?;
    let w1 = model.w1(z.r);
    let w2 = model.w2(z.theta) / (z.r * model.profile(z.r));
    let h = model.hamiltonian(z)?;
    let m2 = model.m_sq();
    let ratio = |num: f64, den: f64| if den == 0.0 { f64::NAN } else { num / den };
    Ok(DiscrepancyReport {
        m: model.m(),
        delta: model.params().delta,
        point: *z,
        kinetic_residual: (parts.kinetic - kin).abs() / kin.abs().max(1.0),
        ratio_radial: ratio(parts.radial, w1),
        expected_radial: 1.0 / m2,
        ratio_angular: ratio(parts.angular, w2),
        expected_angular: 1.0 / (2.0 * m2),
        full_residual: (parts.total() - h).abs() / h.abs().max(1.0),
    })
}

/// `max |Jᵀ Ω J - Ω|` for the map to Taub-NUT coordinates, with `J` from
/// central differences of step `h`.
pub fn symplectic_residual(model: &Model, z: &PhasePoint, h: f64) -> Result<f64> {
    let x = z.to_array();
    let mut jac = [[0.0f64; 6]; 6];
    for j in 0..6 {
        let mut up = x;
        let mut dn = x;
        up[j] += h;
        dn[j] -= h;
        let fu = to_taubnut(model, &PhasePoint::from_array(up))?.to_array();
        let fd = to_taubnut(model, &PhasePoint::from_array(dn))?.to_array();
        for i in 0..6 {
            jac[i][j] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    let omega = |i: usize, j: usize| -> f64 {
        if j == i + 3 {
            1.0
        } else if i == j + 3 {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst = 0.0f64;
    for a in 0..6 {
        for b in 0..6 {
            let mut s = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    let o = omega(i, j);
                    if o != 0.0 {
                        s += jac[i][a] * o * jac[j][b];
                    }
                }
            }
            worst = worst.max((s - omega(a, b)).abs());
        }
    }
    Ok(worst)
}

/// `(α, β)` of the reduced angular potential:
/// `8α = 8a + 2c + p₀²`, `8β = 8b + 2c + (p₀ + 2k)²`.
///
/// Exact for exact scalar types such as `BigRational`.
pub fn pw_coefficients<T: Num + FromPrimitive + Clone>(a: T, b: T, c: T, p0: T, k: T) -> (T, T) {
    let two = T::from_u8(2).unwrap();
    let eight = T::from_u8(8).unwrap();
    let c2 = two.clone() * c;
    let alpha = (eight.clone() * a + c2.clone() + p0.clone() * p0.clone()) / eight.clone();
    let shifted = p0 + two * k;
    let beta = (eight.clone() * b + c2 + shifted.clone() * shifted) / eight;
    (alpha, beta)
}

/// Parameters of the reduced 2D system
/// `r/(2(α₁+β₁r)) (p_r² + p_θ²/r²) + (α/sin²(μθ) + β/cos²(μθ))/(r(α₁+β₁r)) + W₀(r)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PWParams {
    pub mu: f64,
    pub alpha_pw: f64,
    pub beta_pw: f64,
    pub p0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    /// `W₀(r) = (α₂r² + β₂r)/(2r(α₁+β₁r))`, i.e. `W₁` without its `k²` term.
    pub w0_profile: String,
}

impl PWParams {
    pub fn w0(&self, r: f64) -> f64 {
        (self.alpha2 * r * r + self.beta2 * r) / (2.0 * r * (self.alpha1 + self.beta1 * r))
    }

    /// Reduced Hamiltonian at `(r, θ, p_r, p_θ)` of the 2D system.
    pub fn hamiltonian(&self, r: f64, theta: f64, p_r: f64, p_theta: f64) -> f64 {
        let prof = self.alpha1 + self.beta1 * r;
        let mt = self.mu * theta;
        r / (2.0 * prof) * (p_r * p_r + p_theta * p_theta / (r * r))
            + (self.alpha_pw / mt.sin().powi(2) + self.beta_pw / mt.cos().powi(2)) / (r * prof)
            + self.w0(r)
    }
}

fn require_pw_gauge(model: &Model) -> Result<()> {
    let p = model.params();
    if p.ell != p.k {
        return Err(Error::WrongGauge {
            expected: p.k,
            got: p.ell,
        });
    }
    Ok(())
}

/// Reduction at fixed `p_φ = p₀` in the gauge `ℓ = k`, with `μ = 1/(2m)`.
pub fn reduce_2d(model: &Model, p0: f64) -> Result<PWParams> {
    require_pw_gauge(model)?;
    let p = model.params();
    let (alpha_pw, beta_pw) = pw_coefficients(p.a, p.b, p.c, p0, p.k);
    Ok(PWParams {
        mu: 1.0 / (2.0 * model.m()),
        alpha_pw,
        beta_pw,
        p0,
        alpha1: p.alpha1,
        beta1: p.beta1,
        alpha2: p.alpha2,
        beta2: p.beta2,
        w0_profile: format!(
            "({} r^2 + {} r) / (2 r ({} + {} r))",
            p.alpha2, p.beta2, p.alpha1, p.beta1
        ),
    })
}

/// `|H(z) - H̃(r, mθ, p_r, p_θ/m)| / max(1, |H(z)|)` with `p₀ = p_φ`.
pub fn reduced_hamiltonian_check(model: &Model, z: &PhasePoint) -> Result<f64> {
    let pw = reduce_2d(model, z.p_phi)?;
    let h = model.hamiltonian(z)?;
    let m = model.m();
    let reduced = pw.hamiltonian(z.r, m * z.theta, z.p_r, z.p_theta / m);
    Ok((h - reduced).abs() / h.abs().max(1.0))
}
