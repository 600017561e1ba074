//! Reproducible random phase points and parameter sets.
//!
//! Every draw comes from a ChaCha8 stream keyed by `(seed, index)`, so a
//! batch gives the same points whether it runs serially or in parallel.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrals::conserved_set;
use crate::model::{DomainWindow, Model, ModelParams, PhasePoint};
use crate::rational::RationalM;

/// Momenta are drawn uniformly from `[-MOMENTUM_RANGE, MOMENTUM_RANGE]`.
pub const MOMENTUM_RANGE: f64 = 2.0;

/// Separate key spaces for points and parameter sets.
const POINT_DOMAIN: u64 = 0x5054_5f50_4f49_4e54;
const PARAM_DOMAIN: u64 = 0x5041_5241_4d53_4554;

pub fn rng_for(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(index);
    rng
}

/// Uniform point in the window with `φ ∈ [0, 2π/ν)` and momenta in `[-2, 2]`.
pub fn random_point<R: Rng>(rng: &mut R, window: &DomainWindow, nu: f64) -> PhasePoint {
    let m = MOMENTUM_RANGE;
    PhasePoint {
        r: rng.gen_range(window.r_min..=window.r_max),
        theta: rng.gen_range(window.theta_margin..=PI - window.theta_margin),
        phi: rng.gen_range(0.0..2.0 * PI / nu),
        p_r: rng.gen_range(-m..=m),
        p_theta: rng.gen_range(-m..=m),
        p_phi: rng.gen_range(-m..=m),
    }
}

/// Point number `index` of the batch keyed by `seed`.
pub fn sample_point(model: &Model, seed: u64, index: u64) -> PhasePoint {
    let mut rng = rng_for(seed, POINT_DOMAIN, index);
    random_point(&mut rng, model.window(), model.params().nu)
}

/// Like [`sample_point`] but redraws (within the same stream) until
/// `S = E₁ + k²m² > 0`. Returns `None` after `max_tries` failures.
pub fn sample_point_positive_s(model: &Model, seed: u64, index: u64, max_tries: usize) -> Option<PhasePoint> {
    let mut rng = rng_for(seed, POINT_DOMAIN, index);
    (0..max_tries)
        .map(|_| random_point(&mut rng, model.window(), model.params().nu))
        .find(|z| conserved_set(model, z).map(|cs| cs.s > 0.0).unwrap_or(false))
}

/// Generic parameters for the given `m`: every constant nonzero, gauge
/// `ℓ = 0`, `α₁, β₁ > 0` so the metric is regular on any window.
pub fn random_params<R: Rng>(rng: &mut R, m: RationalM) -> ModelParams {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    ModelParams {
        m,
        delta: 1,
        nu: 1.0,
        alpha1: rng.gen_range(0.2..1.5),
        beta1: rng.gen_range(0.2..1.5),
        alpha2: rng.gen_range(-0.5..0.5),
        beta2: rng.gen_range(-2.0..-0.2),
        k: sign * rng.gen_range(0.3..1.5),
        ell: 0.0,
        a: rng.gen_range(0.05..0.3),
        b: rng.gen_range(0.05..0.3),
        c: rng.gen_range(0.02..0.2),
    }
}

/// Parameter set number `index` for `m`, keyed by `seed`.
pub fn sample_params(m: RationalM, seed: u64, index: u64) -> ModelParams {
    random_params(&mut rng_for(seed, PARAM_DOMAIN, index), m)
}

/// Model built from [`sample_params`] on `window`.
pub fn sample_model(m: RationalM, window: DomainWindow, seed: u64, index: u64) -> Model {
    Model::new(sample_params(m, seed, index), window).expect("sampled parameters are valid by construction")
}
