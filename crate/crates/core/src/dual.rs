//! Forward-mode automatic differentiation with multi-component dual numbers.
//!
//! `Dual<T, N>` carries a value and `N` partial derivatives. Because it is
//! itself a [`Real`], duals nest: `Dual<Dual<f64, 6>, 6>` yields exact
//! Hessians of anything written generically over [`Real`].
//!
//! Like most dual-number libraries, ordering and equality only look at the
//! real part, and `%` does not propagate derivatives.

use std::cmp::Ordering;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct Dual<T, const N: usize> {
    pub re: T,
    pub eps: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    #[inline]
    pub fn constant(re: T) -> Self {
        Self {
            re,
            eps: [T::zero(); N],
        }
    }

    /// Independent variable number `index`, seeded with unit derivative.
    #[inline]
    pub fn variable(re: T, index: usize) -> Self {
        let mut eps = [T::zero(); N];
        eps[index] = T::one();
        Self { re, eps }
    }

    /// Seeds every component of `x` as its own variable.
    pub fn seed(x: [T; N]) -> [Self; N] {
        let mut out = [Self::constant(T::zero()); N];
        for (i, xi) in x.into_iter().enumerate() {
            out[i] = Self::variable(xi, i);
        }
        out
    }

    /// Applies a scalar function given its value and derivative at `self.re`.
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e = *e * df;
        }
        Self { re: f, eps }
    }
}

/// Value and gradient of a scalar function of `N` variables.
pub fn gradient<const N: usize, F>(f: F, x: [f64; N]) -> (f64, [f64; N])
where
    F: Fn([Dual<f64, N>; N]) -> Dual<f64, N>,
{
    let y = f(Dual::seed(x));
    (y.re, y.eps)
}

/// Value, gradient and Hessian of a scalar function of `N` variables via
/// nested duals.
pub fn hessian<const N: usize, F>(f: F, x: [f64; N]) -> (f64, [f64; N], [[f64; N]; N])
where
    F: Fn([Dual<Dual<f64, N>, N>; N]) -> Dual<Dual<f64, N>, N>,
{
    let inner = Dual::<f64, N>::seed(x);
    let mut outer = [Dual::constant(Dual::constant(0.0)); N];
    for i in 0..N {
        outer[i] = Dual::variable(inner[i], i);
    }
    let y = f(outer);
    let mut hess = [[0.0; N]; N];
    for (i, row) in hess.iter_mut().enumerate() {
        *row = y.eps[i].eps;
    }
    (y.re.re, y.re.eps, hess)
}

impl<T: Real, const N: usize> PartialEq for Dual<T, N> {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re
    }
}

impl<T: Real, const N: usize> PartialOrd for Dual<T, N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re = self.re + rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a = *a + b;
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re = self.re - rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a = *a - b;
        }
        self
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut eps = self.eps;
        for (i, e) in eps.iter_mut().enumerate() {
            *e = *e * rhs.re + self.re * rhs.eps[i];
        }
        Self {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.re;
        let re = self.re * inv;
        let mut eps = self.eps;
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (*e - re * rhs.eps[i]) * inv;
        }
        Self { re, eps }
    }
}

impl<T: Real, const N: usize> Rem for Dual<T, N> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        // d/dx (x mod y) = 1 almost everywhere; the y-dependence is dropped.
        Self {
            re: self.re % rhs.re,
            eps: self.eps,
        }
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for e in self.eps.iter_mut() {
            *e = -*e;
        }
        self
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<T: Real, const N: usize> $tr for Dual<T, N> {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl<T: Real, const N: usize> Zero for Dual<T, N> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero()
    }
}

impl<T: Real, const N: usize> One for Dual<T, N> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Real, const N: usize> Num for Dual<T, N> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Self::constant)
    }
}

impl<T: Real, const N: usize> ToPrimitive for Dual<T, N> {
    fn to_i64(&self) -> Option<i64> {
        self.re.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.re.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.re.to_f64()
    }
}

impl<T: Real, const N: usize> NumCast for Dual<T, N> {
    fn from<P: ToPrimitive>(n: P) -> Option<Self> {
        <T as NumCast>::from(n).map(Self::constant)
    }
}

impl<T: Real, const N: usize> FromPrimitive for Dual<T, N> {
    fn from_i64(n: i64) -> Option<Self> {
        T::from_i64(n).map(Self::constant)
    }
    fn from_u64(n: u64) -> Option<Self> {
        T::from_u64(n).map(Self::constant)
    }
    fn from_f64(n: f64) -> Option<Self> {
        T::from_f64(n).map(Self::constant)
    }
}

macro_rules! float_consts {
    ($($name:ident),*) => {
        impl<T: Real, const N: usize> FloatConst for Dual<T, N> {
            $(
                fn $name() -> Self {
                    Self::constant(T::$name())
                }
            )*
        }
    };
}
float_consts!(
    E,
    FRAC_1_PI,
    FRAC_1_SQRT_2,
    FRAC_2_PI,
    FRAC_2_SQRT_PI,
    FRAC_PI_2,
    FRAC_PI_3,
    FRAC_PI_4,
    FRAC_PI_6,
    FRAC_PI_8,
    LN_10,
    LN_2,
    LOG10_E,
    LOG2_E,
    PI,
    SQRT_2
);

macro_rules! const_real {
    ($($name:ident),*) => {
        $(
            fn $name() -> Self {
                Self::constant(T::$name())
            }
        )*
    };
}

macro_rules! real_pred {
    ($($name:ident),*) => {
        $(
            fn $name(self) -> bool {
                self.re.$name()
            }
        )*
    };
}

macro_rules! piecewise_const {
    ($($name:ident),*) => {
        $(
            fn $name(self) -> Self {
                Self::constant(self.re.$name())
            }
        )*
    };
}

impl<T: Real, const N: usize> Float for Dual<T, N> {
    const_real!(
        nan,
        infinity,
        neg_infinity,
        neg_zero,
        min_value,
        min_positive_value,
        max_value
    );
    real_pred!(
        is_nan,
        is_infinite,
        is_finite,
        is_normal,
        is_sign_positive,
        is_sign_negative
    );
    piecewise_const!(floor, ceil, round, trunc);

    fn classify(self) -> FpCategory {
        self.re.classify()
    }

    fn fract(self) -> Self {
        Self {
            re: self.re.fract(),
            eps: self.eps,
        }
    }

    fn abs(self) -> Self {
        if self.re.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    fn signum(self) -> Self {
        Self::constant(self.re.signum())
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }

    fn recip(self) -> Self {
        let r = self.re.recip();
        self.chain(r, -r * r)
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => {
                let lower = self.re.powi(n - 1);
                self.chain(lower * self.re, T::from_i32(n).unwrap() * lower)
            }
        }
    }

    fn powf(self, n: Self) -> Self {
        // x^y = exp(y ln x); the constant-exponent case keeps x <= 0 finite.
        if n.eps.iter().all(|e| e.is_zero()) {
            let lower = self.re.powf(n.re - T::one());
            self.chain(lower * self.re, n.re * lower)
        } else {
            (n * self.ln()).exp()
        }
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn exp2(self) -> Self {
        let e = self.re.exp2();
        self.chain(e, e * T::LN_2())
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }

    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }

    fn log2(self) -> Self {
        self.chain(self.re.log2(), (self.re * T::LN_2()).recip())
    }

    fn log10(self) -> Self {
        self.chain(self.re.log10(), (self.re * T::LN_10()).recip())
    }

    fn max(self, other: Self) -> Self {
        if other.re > self.re {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other.re < self.re {
            other
        } else {
            self
        }
    }

    fn abs_sub(self, other: Self) -> Self {
        if self.re > other.re {
            self - other
        } else {
            Self::zero()
        }
    }

    fn cbrt(self) -> Self {
        let c = self.re.cbrt();
        self.chain(c, (T::cst(3.0) * c * c).recip())
    }

    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::one() + t * t)
    }

    fn asin(self) -> Self {
        self.chain(self.re.asin(), (T::one() - self.re * self.re).sqrt().recip())
    }

    fn acos(self) -> Self {
        self.chain(self.re.acos(), -(T::one() - self.re * self.re).sqrt().recip())
    }

    fn atan(self) -> Self {
        self.chain(self.re.atan(), (T::one() + self.re * self.re).recip())
    }

    fn atan2(self, other: Self) -> Self {
        let denom = (self.re * self.re + other.re * other.re).recip();
        let mut eps = self.eps;
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (*e * other.re - self.re * other.eps[i]) * denom;
        }
        Self {
            re: self.re.atan2(other.re),
            eps,
        }
    }

    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn exp_m1(self) -> Self {
        self.chain(self.re.exp_m1(), self.re.exp())
    }

    fn ln_1p(self) -> Self {
        self.chain(self.re.ln_1p(), (T::one() + self.re).recip())
    }

    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }

    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, T::one() - t * t)
    }

    fn asinh(self) -> Self {
        self.chain(self.re.asinh(), (self.re * self.re + T::one()).sqrt().recip())
    }

    fn acosh(self) -> Self {
        self.chain(self.re.acosh(), (self.re * self.re - T::one()).sqrt().recip())
    }

    fn atanh(self) -> Self {
        self.chain(self.re.atanh(), (T::one() - self.re * self.re).recip())
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.re.integer_decode()
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    #[inline]
    fn value(self) -> f64 {
        self.re.value()
    }
}
