//! Integrals of motion and the machinery to check them.
//!
//! Besides `H`, the system has `X₁ = p_φ^A + k cos θ` (azimuthal symmetry),
//! the generalized total angular momentum `X₂`, and for rational
//! `m = m₁/m₂` a polynomial integral `𝒳` of order `m₁ + m₂` built from two
//! complex factors whose moduli are themselves conserved.
//!
//! The higher-order construction works in the gauge `ℓ = 0` and uses `|m|`
//! wherever `m` enters linearly; `H` only sees `m²`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, PhasePoint};
use crate::scalar::Real;
use crate::Grad6;

/// `X₁ = p_φ + A_φ + k cos θ`, which equals `p_φ + ℓ`.
pub fn eval_x1<T: Real>(model: &Model, z: &PhasePoint<T>) -> T {
    model.p_phi_cov(z) + T::cst(model.params().k) * z.theta.cos()
}

/// `X₂ = p_θ² + m² ((p_φ^A)² / sin²θ + 2 W₂(θ))`.
pub fn eval_x2<T: Real>(model: &Model, z: &PhasePoint<T>) -> Result<T> {
    model.check_theta(z.theta.value())?;
    Ok(x2_unchecked(model, z))
}

fn x2_unchecked<T: Real>(model: &Model, z: &PhasePoint<T>) -> T {
    let pa = model.p_phi_cov(z);
    let s = z.theta.sin();
    z.p_theta * z.p_theta + T::cst(model.m_sq()) * (pa * pa / (s * s) + T::cst(2.0) * model.w2(z.theta))
}

fn require_zero_gauge(model: &Model) -> Result<()> {
    let ell = model.params().ell;
    if ell != 0.0 {
        return Err(Error::WrongGauge {
            expected: 0.0,
            got: ell,
        });
    }
    Ok(())
}

/// Values of the quadratic integrals at one phase point (gauge `ℓ = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservedSet<T = f64> {
    /// `H`
    pub e0: T,
    /// `X₂`
    pub e1: T,
    /// `p_φ`
    pub p0: T,
    /// `E₁ + k² m²`
    pub s: T,
}

pub fn conserved_set<T: Real>(model: &Model, z: &PhasePoint<T>) -> Result<ConservedSet<T>> {
    require_zero_gauge(model)?;
    let e0 = model.hamiltonian(z)?;
    let e1 = x2_unchecked(model, z);
    Ok(ConservedSet {
        e0,
        e1,
        p0: z.p_phi,
        s: e1 + T::cst(model.k2m2()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParityBranch {
    /// `m₂` odd: `𝒳 = 2 Re(P)`.
    RealPart,
    /// `m₂` even: `𝒳 = 2i Im(P)`.
    ImagPart,
}

impl ParityBranch {
    pub fn for_denominator(m2: u64) -> Self {
        if m2 % 2 == 1 {
            ParityBranch::RealPart
        } else {
            ParityBranch::ImagPart
        }
    }
}

/// Whether the reported integral is divided by `√S` (`m₁` even, `m₂` odd).
pub fn divides_by_sqrt_s(m1: u64, m2: u64) -> bool {
    m1 % 2 == 0 && m2 % 2 == 1
}

/// The two complex factors of the higher-order integral and their product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexFactorization<T = f64> {
    /// `-2√S p_r + i Q₁`
    pub w_r: Complex<T>,
    /// `sin θ √S p_θ + i Q₂`
    pub w_theta: Complex<T>,
    /// `w_r^{m₂} w_θ^{m₁}`
    pub product: Complex<T>,
    pub parity_branch: ParityBranch,
    pub sqrt_s_division: bool,
}

/// Evaluated higher-order integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalX<T = f64> {
    /// Parity-selected component, halved, divided by `√S` when required.
    pub value: T,
    /// Magnitude of the discarded component (same normalization); zero in
    /// exact arithmetic.
    pub offbranch_residual: T,
    /// `|w_r|^{m₂} |w_θ|^{m₁}` in the same normalization as `value`; itself
    /// conserved and an upper bound for `|value|`.
    pub modulus: T,
    pub factors: ComplexFactorization<T>,
    pub conserved: ConservedSet<T>,
}

/// Imaginary parts `(Q₁, Q₂)` of the radial and angular factors.
pub fn imaginary_parts<T: Real>(model: &Model, cs: &ConservedSet<T>, r: T, theta: T) -> (T, T) {
    let p = model.params();
    let m_abs = T::cst(p.m.abs());
    let msq = T::cst(model.m_sq());
    let two = T::cst(2.0);
    let k = T::cst(p.k);
    let q1 = (two * cs.e1 + msq * (r * (T::cst(p.beta2) - two * T::cst(p.alpha1) * cs.e0) + two * k * k)) / (m_abs * r);
    let q2 = msq * (T::cst(2.0 * p.a - 2.0 * p.b) - k * cs.p0) + theta.cos() * cs.s;
    (q1, q2)
}

/// Builds the two complex factors at `z`.
pub fn factorize<T: Real>(model: &Model, z: &PhasePoint<T>) -> Result<(ComplexFactorization<T>, ConservedSet<T>)> {
    let cs = conserved_set(model, z)?;
    if !(cs.s.value() > 0.0) {
        return Err(Error::NonpositiveS(cs.s.value()));
    }
    let m = model.params().m;
    let (m1, m2) = (m.m1(), m.m2());
    let sq = cs.s.sqrt();
    let (q1, q2) = imaginary_parts(model, &cs, z.r, z.theta);
    let w_r = Complex::new(-T::cst(2.0) * sq * z.p_r, q1);
    let w_theta = Complex::new(z.theta.sin() * sq * z.p_theta, q2);
    let product = cpow(w_r, m2) * cpow(w_theta, m1);
    Ok((
        ComplexFactorization {
            w_r,
            w_theta,
            product,
            parity_branch: ParityBranch::for_denominator(m2),
            sqrt_s_division: divides_by_sqrt_s(m1, m2),
        },
        cs,
    ))
}

fn cpow<T: Real>(w: Complex<T>, n: u64) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    for _ in 0..n {
        acc = acc * w;
    }
    acc
}

/// The polynomial integral `𝒳`.
///
/// Evaluates `w_r^{m₂} w_θ^{m₁} - (-w̄_r)^{m₂} w̄_θ^{m₁}`, keeps its real part
/// for `m₂` odd or its imaginary part for `m₂` even, halves it, and divides
/// by `√S` when `m₁` is even and `m₂` odd.
pub fn eval_calx<T: Real>(model: &Model, z: &PhasePoint<T>) -> Result<CalX<T>> {
    let (factors, cs) = factorize(model, z)?;
    let m = model.params().m;
    let (m1, m2) = (m.m1(), m.m2());
    let conj_term = cpow(-factors.w_r.conj(), m2) * cpow(factors.w_theta.conj(), m1);
    let full = factors.product - conj_term;
    let half = T::cst(0.5);
    let (mut value, mut residual) = match factors.parity_branch {
        ParityBranch::RealPart => (full.re * half, full.im.abs() * half),
        ParityBranch::ImagPart => (full.im * half, full.re.abs() * half),
    };
    let norm = |w: Complex<T>| (w.re * w.re + w.im * w.im).sqrt();
    let mut modulus = norm(factors.w_r).powi(m2 as i32) * norm(factors.w_theta).powi(m1 as i32);
    if factors.sqrt_s_division {
        let sq = cs.s.sqrt();
        value = value / sq;
        residual = residual / sq;
        modulus = modulus / sq;
    }
    Ok(CalX {
        value,
        offbranch_residual: residual,
        modulus,
        factors,
        conserved: cs,
    })
}

/// Radicand under the square root in the denominator of `𝒯₁`.
pub fn t1_radicand(model: &Model, cs: &ConservedSet) -> f64 {
    let p = model.params();
    let (a1, b1, a2, b2, k) = (p.alpha1, p.beta1, p.alpha2, p.beta2, p.k);
    let m2 = model.m_sq();
    let (e0, e1) = (cs.e0, cs.e1);
    4.0 * a1 * a1 * e0 * e0 * m2 + 8.0 * b1 * e0 * e1 + 4.0 * e0 * m2 * (2.0 * b1 * k * k - a1 * b2) - 4.0 * a2 * e1
        + m2 * (b2 * b2 - 4.0 * a2 * k * k)
}

/// Radicand under the square root in the denominator of `𝒯₂`.
pub fn t2_radicand(model: &Model, cs: &ConservedSet) -> f64 {
    let p = model.params();
    let (a, b, c, k) = (p.a, p.b, p.c, p.k);
    let m2 = model.m_sq();
    let (e1, p0) = (cs.e1, cs.p0);
    2.0 * m2
        * m2
        * (2.0 * a * a - 2.0 * a * (2.0 * b + k * (k + p0)) + 2.0 * b * b - 2.0 * b * k * (k - p0) - c * k * k)
        - e1 * m2 * (4.0 * a + 4.0 * b + 2.0 * c - k * k + p0 * p0)
        + e1 * e1
}

pub fn eval_t1(model: &Model, cs: &ConservedSet, r: f64) -> Result<f64> {
    model.check_r(r)?;
    let d = t1_radicand(model, cs);
    if !(d > 0.0) {
        return Err(Error::ComplexDomain("T1 radicand"));
    }
    let p = model.params();
    let m2 = model.m_sq();
    let num = m2 * (r * (p.beta2 - 2.0 * p.alpha1 * cs.e0) + 2.0 * p.k * p.k) + 2.0 * cs.e1;
    Ok(num / (p.m.abs() * r * d.sqrt()))
}

pub fn eval_t2(model: &Model, cs: &ConservedSet, theta: f64) -> Result<f64> {
    model.check_theta(theta)?;
    let d = t2_radicand(model, cs);
    if !(d > 0.0) {
        return Err(Error::ComplexDomain("T2 radicand"));
    }
    let p = model.params();
    let num = theta.cos() * (cs.e1 + model.k2m2()) - model.m_sq() * (-2.0 * p.a + 2.0 * p.b + p.k * cs.p0);
    Ok(num / d.sqrt())
}

fn sqrt_s(cs: &ConservedSet) -> Result<f64> {
    if cs.s > 0.0 {
        Ok(cs.s.sqrt())
    } else {
        Err(Error::ComplexDomain("sqrt(S)"))
    }
}

/// `M(r) = -arccos(𝒯₁) / (m √S)`.
pub fn eval_m(model: &Model, cs: &ConservedSet, r: f64) -> Result<f64> {
    let t1 = eval_t1(model, cs, r)?;
    let sq = sqrt_s(cs)?;
    if t1.abs() > 1.0 {
        return Err(Error::ComplexDomain("arccos(T1)"));
    }
    Ok(-t1.acos() / (model.params().m.abs() * sq))
}

/// `N(θ) = arcsin(𝒯₂) / √S`.
pub fn eval_n(model: &Model, cs: &ConservedSet, theta: f64) -> Result<f64> {
    let t2 = eval_t2(model, cs, theta)?;
    let sq = sqrt_s(cs)?;
    if t2.abs() > 1.0 {
        return Err(Error::ComplexDomain("arcsin(T2)"));
    }
    Ok(t2.asin() / sq)
}

/// `𝓘 = 2i e^{iπm₂/2} sin(m₁ √S (N(θ) - M(r)))`.
///
/// `M - N`, and hence `𝓘`, is conserved on flow segments where `p_r` and
/// `p_θ` share a sign.
pub fn eval_i(model: &Model, z: &PhasePoint) -> Result<Complex<f64>> {
    let cs = conserved_set(model, z)?;
    let sq = sqrt_s(&cs)?;
    let m = eval_m(model, &cs, z.r)?;
    let n = eval_n(model, &cs, z.theta)?;
    let m1 = model.params().m.m1() as f64;
    let m2 = model.params().m.m2() as f64;
    let phase = Complex::from_polar(1.0, std::f64::consts::FRAC_PI_2 * m2);
    Ok(Complex::new(0.0, 2.0) * phase * (m1 * sq * (n - m)).sin())
}

/// The product form of `𝓘` in terms of `𝒯₁`, `𝒯₂`.
pub fn eval_i_product(model: &Model, z: &PhasePoint) -> Result<Complex<f64>> {
    let cs = conserved_set(model, z)?;
    let t1 = eval_t1(model, &cs, z.r)?;
    let t2 = eval_t2(model, &cs, z.theta)?;
    if t1.abs() > 1.0 || t2.abs() > 1.0 {
        return Err(Error::ComplexDomain("T1 or T2 outside [-1, 1]"));
    }
    let (c1, c2) = ((1.0 - t1 * t1).sqrt(), (1.0 - t2 * t2).sqrt());
    let m = model.params().m;
    let sign = if m.m2() % 2 == 0 { 1.0 } else { -1.0 };
    let a = cpow(Complex::new(c2, t2), m.m1()) * cpow(Complex::new(c1, -t1), m.m2());
    let b = cpow(Complex::new(c2, -t2), m.m1()) * cpow(Complex::new(c1, t1), m.m2());
    Ok(a * sign - b)
}

/// A phase-space function that can be differentiated through dual numbers.
pub trait Observable: Sync {
    fn eval_dual(&self, z: &PhasePoint<Grad6>) -> Result<Grad6>;

    fn value(&self, z: &PhasePoint) -> Result<f64> {
        self.eval_dual(&z.lift()).map(|d| d.re)
    }

    fn gradient(&self, z: &PhasePoint) -> Result<[f64; 6]> {
        self.eval_dual(&z.seeded()).map(|d| d.eps)
    }
}

impl<F> Observable for F
where
    F: Fn(&PhasePoint<Grad6>) -> Result<Grad6> + Sync,
{
    fn eval_dual(&self, z: &PhasePoint<Grad6>) -> Result<Grad6> {
        self(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntegralKind {
    Hamiltonian,
    X1,
    X2,
    CalX,
}

/// One of the system's integrals bound to a model.
#[derive(Clone, Copy, Debug)]
pub struct Integral<'a> {
    pub model: &'a Model,
    pub kind: IntegralKind,
}

impl<'a> Integral<'a> {
    pub fn new(model: &'a Model, kind: IntegralKind) -> Self {
        Self { model, kind }
    }

    pub fn all(model: &'a Model) -> [Self; 4] {
        [
            IntegralKind::Hamiltonian,
            IntegralKind::X1,
            IntegralKind::X2,
            IntegralKind::CalX,
        ]
        .map(|kind| Self { model, kind })
    }

    pub fn eval<T: Real>(&self, z: &PhasePoint<T>) -> Result<T> {
        match self.kind {
            IntegralKind::Hamiltonian => self.model.hamiltonian(z),
            IntegralKind::X1 => {
                self.model.check_point(z)?;
                Ok(eval_x1(self.model, z))
            }
            IntegralKind::X2 => {
                self.model.check_point(z)?;
                eval_x2(self.model, z)
            }
            IntegralKind::CalX => eval_calx(self.model, z).map(|x| x.value),
        }
    }
}

impl Observable for Integral<'_> {
    fn eval_dual(&self, z: &PhasePoint<Grad6>) -> Result<Grad6> {
        self.eval(z)
    }
}

/// Canonical coordinate `index` of `(r, θ, φ, p_r, p_θ, p_φ)` as an observable.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate(pub usize);

impl Observable for Coordinate {
    fn eval_dual(&self, z: &PhasePoint<Grad6>) -> Result<Grad6> {
        Ok(z.to_array()[self.0])
    }
}

/// Canonical bracket of two gradients laid out as `(q, p)`.
pub fn bracket_from_gradients(df: &[f64; 6], dg: &[f64; 6]) -> f64 {
    (0..3).map(|i| df[i] * dg[i + 3] - df[i + 3] * dg[i]).sum()
}

fn norm6(v: &[f64; 6]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Bracket value and its natural scale `|∇f| |∇g|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub value: f64,
    pub scale: f64,
}

impl Bracket {
    /// `|{f, g}| / (|∇f| |∇g|)`, or the raw magnitude when the scale vanishes.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

pub fn poisson_bracket(f: &dyn Observable, g: &dyn Observable, z: &PhasePoint) -> Result<Bracket> {
    let df = f.gradient(z)?;
    let dg = g.gradient(z)?;
    Ok(Bracket {
        value: bracket_from_gradients(&df, &dg),
        scale: norm6(&df) * norm6(&dg),
    })
}

/// Relative singular-value threshold used by [`independence_rank`].
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Numerical rank of the Jacobian of `observables` at `z`.
///
/// Rows are normalized to unit length first; this leaves the rank unchanged
/// and keeps high-order integrals from swamping the quadratic ones.
pub fn independence_rank(observables: &[&dyn Observable], z: &PhasePoint) -> Result<usize> {
    let n = observables.len();
    let mut jac = DMatrix::<f64>::zeros(n, 6);
    for (i, obs) in observables.iter().enumerate() {
        let g = obs.gradient(z)?;
        let norm = norm6(&g);
        for j in 0..6 {
            jac[(i, j)] = if norm > 0.0 { g[j] / norm } else { 0.0 };
        }
    }
    let sv = jac.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > RANK_THRESHOLD * max).count())
}
