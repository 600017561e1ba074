//! Physical parameters, phase points and the monopole Hamiltonian on the
//! curved background `ds² = r⁻¹(α₁ + β₁ r)(dr² + m² r² dθ² + r² sin²θ dφ²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dual::{self, Dual};
use crate::error::{Error, Result};
use crate::rational::RationalM;
use crate::scalar::Real;

fn one() -> f64 {
    1.0
}

fn plus_one() -> i8 {
    1
}

/// Raw physical and geometric constants of the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Metric deformation parameter.
    pub m: RationalM,
    /// Branch of the conformal map to Taub-NUT coordinates, `±1`.
    #[serde(default = "plus_one")]
    pub delta: i8,
    /// The azimuth ranges over `[0, 2π/ν]`.
    #[serde(default = "one")]
    pub nu: f64,
    pub alpha1: f64,
    pub beta1: f64,
    #[serde(default)]
    pub alpha2: f64,
    #[serde(default)]
    pub beta2: f64,
    /// Monopole strength.
    pub k: f64,
    /// Gauge constant in `A_φ = ℓ - k cos θ`.
    #[serde(default)]
    pub ell: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c: f64,
}

impl ModelParams {
    /// Euclidean MIC-Kepler monopole: `m = ν = 1`, `α₁ = 0`, `β₁ = 1`,
    /// no angular potential, gauge `ℓ = 0`.
    pub fn mic_kepler(k: f64, alpha2: f64, beta2: f64) -> Self {
        Self {
            m: RationalM::integer(1).unwrap(),
            delta: 1,
            nu: 1.0,
            alpha1: 0.0,
            beta1: 1.0,
            alpha2,
            beta2,
            k,
            ell: 0.0,
            a: 0.0,
            b: 0.0,
            c: 0.0,
        }
    }
}

/// Radial and polar bounds keeping evaluations away from `r = 0` and the poles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainWindow {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_margin: f64,
}

impl Default for DomainWindow {
    fn default() -> Self {
        Self {
            r_min: 0.5,
            r_max: 3.0,
            theta_margin: 0.3,
        }
    }
}

impl DomainWindow {
    pub fn new(r_min: f64, r_max: f64, theta_margin: f64) -> Result<Self> {
        let w = Self {
            r_min,
            r_max,
            theta_margin,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radial window [{}, {}] must satisfy 0 < r_min < r_max",
                self.r_min, self.r_max
            )));
        }
        if !(self.theta_margin > 0.0 && self.theta_margin < PI / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "theta margin {} must lie in (0, pi/2)",
                self.theta_margin
            )));
        }
        Ok(())
    }

    pub fn contains_r(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    pub fn contains_theta(&self, theta: f64) -> bool {
        theta >= self.theta_margin && theta <= PI - self.theta_margin
    }
}

/// Canonical phase-space point `(r, θ, φ, p_r, p_θ, p_φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T = f64> {
    pub r: T,
    pub theta: T,
    pub phi: T,
    pub p_r: T,
    pub p_theta: T,
    pub p_phi: T,
}

impl PhasePoint<f64> {
    /// Rejects `r <= 0` and `θ` outside the open interval `(0, π)`.
    pub fn new(r: f64, theta: f64, phi: f64, p_r: f64, p_theta: f64, p_phi: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::OutOfDomain { what: "r", value: r });
        }
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::OutOfDomain {
                what: "theta",
                value: theta,
            });
        }
        Ok(Self {
            r,
            theta,
            phi,
            p_r,
            p_theta,
            p_phi,
        })
    }

    /// Seeds all six coordinates as independent dual variables.
    pub fn seeded(&self) -> PhasePoint<Dual<f64, 6>> {
        PhasePoint::from_array(Dual::seed(self.to_array()))
    }

    pub fn lift<T: Real>(&self) -> PhasePoint<T> {
        PhasePoint::from_array(self.to_array().map(T::cst))
    }
}

impl<T: Copy> PhasePoint<T> {
    pub fn to_array(&self) -> [T; 6] {
        [self.r, self.theta, self.phi, self.p_r, self.p_theta, self.p_phi]
    }

    pub fn from_array(a: [T; 6]) -> Self {
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

impl<T: Real> PhasePoint<T> {
    pub fn value(&self) -> PhasePoint<f64> {
        PhasePoint::from_array(self.to_array().map(Real::value))
    }
}

/// Validated parameters with cached derived constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    params: ModelParams,
    window: DomainWindow,
    m: f64,
    m_sq: f64,
    k2m2: f64,
    phi_period: f64,
}

impl Model {
    pub fn new(params: ModelParams, window: DomainWindow) -> Result<Self> {
        window.validate()?;
        let p = &params;
        let finite = [p.nu, p.alpha1, p.beta1, p.alpha2, p.beta2, p.k, p.ell, p.a, p.b, p.c];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        if p.k == 0.0 {
            return Err(Error::ZeroMonopole);
        }
        if !(p.nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu = {} must be positive", p.nu)));
        }
        if p.delta != 1 && p.delta != -1 {
            return Err(Error::InvalidParameter(format!("delta = {} must be +1 or -1", p.delta)));
        }
        if p.alpha1 == 0.0 && p.beta1 == 0.0 {
            return Err(Error::DegenerateMetric("alpha1 = beta1 = 0".into()));
        }
        // alpha1 + beta1 r is affine, so the endpoints decide positivity.
        for r in [window.r_min, window.r_max] {
            let profile = p.alpha1 + p.beta1 * r;
            if !(profile > 0.0) {
                return Err(Error::DegenerateMetric(format!(
                    "alpha1 + beta1 r = {profile} is not positive at r = {r}"
                )));
            }
        }
        let m = p.m.to_f64();
        Ok(Self {
            m,
            m_sq: m * m,
            k2m2: p.k * p.k * m * m,
            phi_period: 2.0 * PI / p.nu,
            params,
            window,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn window(&self) -> &DomainWindow {
        &self.window
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn m_sq(&self) -> f64 {
        self.m_sq
    }

    /// `k² m²`, the shift between `X₂` and `S`.
    pub fn k2m2(&self) -> f64 {
        self.k2m2
    }

    /// Period `2π/ν` of the azimuth.
    pub fn phi_period(&self) -> f64 {
        self.phi_period
    }

    /// Same parameters with a different gauge constant.
    pub fn with_gauge(&self, ell: f64) -> Self {
        let mut out = self.clone();
        out.params.ell = ell;
        out
    }

    pub fn check_r(&self, r: f64) -> Result<()> {
        if self.window.contains_r(r) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { what: "r", value: r })
        }
    }

    pub fn check_theta(&self, theta: f64) -> Result<()> {
        if self.window.contains_theta(theta) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "theta",
                value: theta,
            })
        }
    }

    pub fn check_point<T: Real>(&self, z: &PhasePoint<T>) -> Result<()> {
        self.check_r(z.r.value())?;
        self.check_theta(z.theta.value())
    }

    /// Conformal profile `α₁ + β₁ r`.
    #[inline]
    pub fn profile<T: Real>(&self, r: T) -> T {
        T::cst(self.params.alpha1) + T::cst(self.params.beta1) * r
    }

    /// Radial potential `(α₂ r² + β₂ r + k²) / (2 r (α₁ + β₁ r))`, unchecked.
    pub fn w1<T: Real>(&self, r: T) -> T {
        let p = &self.params;
        (T::cst(p.alpha2) * r * r + T::cst(p.beta2) * r + T::cst(p.k * p.k)) / (T::cst(2.0) * r * self.profile(r))
    }

    /// Angular potential `[4(a cos²(θ/2) + b sin²(θ/2)) + c] / sin²θ`, unchecked.
    pub fn w2<T: Real>(&self, theta: T) -> T {
        let p = &self.params;
        let half = theta * T::cst(0.5);
        let (sh, ch) = half.sin_cos();
        let s = theta.sin();
        (T::cst(4.0) * (T::cst(p.a) * ch * ch + T::cst(p.b) * sh * sh) + T::cst(p.c)) / (s * s)
    }

    pub fn eval_w1(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.w1(r))
    }

    pub fn eval_w2(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.w2(theta))
    }

    /// Gauge potential `A_φ = ℓ - k cos θ` (`A_r = A_θ = 0`).
    pub fn vector_potential<T: Real>(&self, theta: T) -> T {
        T::cst(self.params.ell) - T::cst(self.params.k) * theta.cos()
    }

    /// `|∂_θ A_φ - k sin θ|` with a central difference of width `2 step`.
    pub fn magnetic_field_check(&self, theta: f64, step: f64) -> f64 {
        let d = (self.vector_potential(theta + step) - self.vector_potential(theta - step)) / (2.0 * step);
        (d - self.params.k * theta.sin()).abs()
    }

    /// Covariant azimuthal momentum `p_φ + A_φ`.
    #[inline]
    pub fn p_phi_cov<T: Real>(&self, z: &PhasePoint<T>) -> T {
        z.p_phi + self.vector_potential(z.theta)
    }

    /// Hamiltonian without the domain check.
    pub fn hamiltonian_unchecked<T: Real>(&self, z: &PhasePoint<T>) -> T {
        let r = z.r;
        let prof = self.profile(r);
        let s = z.theta.sin();
        let pa = self.p_phi_cov(z);
        let r2 = r * r;
        let kinetic = z.p_r * z.p_r + z.p_theta * z.p_theta / (T::cst(self.m_sq) * r2) + pa * pa / (r2 * s * s);
        r / (T::cst(2.0) * prof) * kinetic + self.w1(r) + self.w2(z.theta) / (r * prof)
    }

    pub fn hamiltonian<T: Real>(&self, z: &PhasePoint<T>) -> Result<T> {
        self.check_point(z)?;
        Ok(self.hamiltonian_unchecked(z))
    }

    /// Exact gradient `(∂_r, ∂_θ, ∂_φ, ∂_{p_r}, ∂_{p_θ}, ∂_{p_φ}) H`.
    pub fn hamiltonian_gradient(&self, z: &PhasePoint) -> Result<[f64; 6]> {
        let h = self.hamiltonian(&z.seeded())?;
        Ok(h.eps)
    }

    /// Value, gradient and Hessian of `H` at `z`.
    pub fn hamiltonian_hessian(&self, z: &PhasePoint) -> Result<(f64, [f64; 6], [[f64; 6]; 6])> {
        self.check_point(z)?;
        Ok(dual::hessian(
            |x| self.hamiltonian_unchecked(&PhasePoint::from_array(x)),
            z.to_array(),
        ))
    }
}
