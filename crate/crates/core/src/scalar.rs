//! Scalar abstraction shared by every evaluator in the crate.
//!
//! Physical quantities are written once against [`Real`] and evaluated on
//! plain floats, on first-order dual numbers (gradients) and on nested dual
//! numbers (Hessians).

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar usable by the model, the integrals and the integrators.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Lifts an `f64` constant into the scalar type.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// Primal (value) part as `f64`, discarding any derivative information.
    fn value(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn value(self) -> f64 {
        self as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly<T: Real>(x: T) -> T {
        x * x * T::cst(3.0) - x.sin()
    }

    #[test]
    fn same_code_on_f32_and_f64() {
        let a = poly(0.7f64);
        let b = poly(0.7f32);
        assert!((a - b.value()).abs() < 1e-6);
    }
}
