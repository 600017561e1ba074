//! Exact expansion of the higher-order integral over abstract symbols.
//!
//! With `u = 2√S p_r`, `v = sin θ √S p_θ` and the imaginary parts `Q₁`, `Q₂`,
//! the integral is the real or imaginary part of
//! `P = (-u + iQ₁)^{m₂} (v + iQ₂)^{m₁}`. Each monomial `u^a v^b Q₁^c Q₂^d`
//! carries `√S^{a+b}`; the construction is polynomial in the momenta exactly
//! when every surviving monomial carries an integer power of `S`, possibly
//! after one global division by `√S`. That predicate is decided here on
//! exact exponents with arbitrary-precision rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{conserved_set, divides_by_sqrt_s, eval_calx, imaginary_parts, ParityBranch};
use crate::model::{Model, PhasePoint};
use crate::rational::RationalM;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: BigRational,
    pub exp_u: u32,
    pub exp_v: u32,
    pub exp_q1: u32,
    pub exp_q2: u32,
    /// Power of `√S` pulled out of `u` and `v`.
    pub exp_half_s: i64,
}

impl Monomial {
    fn key(&self) -> (u32, u32, u32, u32, u32) {
        (
            self.exp_u + self.exp_v + self.exp_q1 + self.exp_q2,
            self.exp_u,
            self.exp_v,
            self.exp_q1,
            self.exp_q2,
        )
    }

    /// Evaluates with `ū = 2 p_r`, `v̄ = sin θ p_θ` and the `√S` power explicit.
    pub fn eval(&self, u_bar: f64, v_bar: f64, q1: f64, q2: f64, s: f64) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        let half_s = if self.exp_half_s % 2 == 0 {
            s.powi((self.exp_half_s / 2) as i32)
        } else {
            s.sqrt().powi(self.exp_half_s as i32)
        };
        c * u_bar.powi(self.exp_u as i32)
            * v_bar.powi(self.exp_v as i32)
            * q1.powi(self.exp_q1 as i32)
            * q2.powi(self.exp_q2 as i32)
            * half_s
    }
}

/// Graded lexicographic order on `(exp_u, exp_v, exp_q1, exp_q2)`.
fn graded_lex(a: &Monomial, b: &Monomial) -> Ordering {
    a.key().cmp(&b.key())
}

fn require_coprime(m1: u64, m2: u64) -> Result<()> {
    if m1 == 0 || m2 == 0 || m1.gcd(&m2) != 1 {
        return Err(Error::NotCoprime { m1, m2 });
    }
    Ok(())
}

fn binomial_row(n: u64) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..n {
        let next = &row[k as usize] * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

/// Branch-selected, halved expansion of the integral before any `√S`
/// division, with the imaginary unit replaced by `i_sign · i`.
pub fn expand_with_unit(m1: u64, m2: u64, i_sign: i8) -> Result<Vec<Monomial>> {
    require_coprime(m1, m2)?;
    let branch = ParityBranch::for_denominator(m2);
    let row1 = binomial_row(m1);
    let row2 = binomial_row(m2);
    let mut terms: BTreeMap<(u32, u32, u32, u32), BigRational> = BTreeMap::new();
    for (kq1, c2) in row2.iter().enumerate() {
        for (kq2, c1) in row1.iter().enumerate() {
            let exp_u = (m2 as usize - kq1) as u32;
            let exp_v = (m1 as usize - kq2) as u32;
            let i_pow = kq1 + kq2;
            // (-u)^{exp_u} and (i_sign i)^{i_pow}
            let mut sign: i64 = if exp_u % 2 == 0 { 1 } else { -1 };
            if i_sign < 0 && i_pow % 2 == 1 {
                sign = -sign;
            }
            let unit = match i_pow % 4 {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            };
            let factor = match branch {
                ParityBranch::RealPart => unit.0,
                ParityBranch::ImagPart => unit.1,
            };
            if factor == 0 {
                continue;
            }
            let coeff = BigRational::from_integer(c1 * c2 * BigInt::from(sign * factor));
            let key = (exp_u, exp_v, kq1 as u32, kq2 as u32);
            let slot = terms.entry(key).or_insert_with(BigRational::zero);
            *slot += coeff;
        }
    }
    let mut out: Vec<Monomial> = terms
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((exp_u, exp_v, exp_q1, exp_q2), coeff)| Monomial {
            coeff,
            exp_u,
            exp_v,
            exp_q1,
            exp_q2,
            exp_half_s: i64::from(exp_u + exp_v),
        })
        .collect();
    out.sort_by(graded_lex);
    Ok(out)
}

/// Double-binomial expansion of the integral for coprime `m₁, m₂`.
pub fn expand(m1: u64, m2: u64) -> Result<Vec<Monomial>> {
    expand_with_unit(m1, m2, 1)
}

/// Expansion after the conditional `√S` division, i.e. the polynomial the
/// numeric evaluator reports.
pub fn expand_normalized(m1: u64, m2: u64) -> Result<Vec<Monomial>> {
    let mut terms = expand(m1, m2)?;
    if divides_by_sqrt_s(m1, m2) {
        for t in terms.iter_mut() {
            t.exp_half_s -= 1;
        }
    }
    Ok(terms)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParityReport {
    pub m1: u64,
    pub m2: u64,
    pub branch: ParityBranch,
    pub divided_by_sqrt_s: bool,
    /// Every monomial carries `S^n` with integer `n` (the certified property).
    pub all_integer_s_powers: bool,
    /// Every monomial carries `S^n` with even `n` (the stricter reading).
    pub all_even_s_powers: bool,
    pub monomial_count: usize,
    #[serde(serialize_with = "ser_rational")]
    pub max_abs_coeff: BigRational,
    /// Smallest and largest power of `S` over all monomials (half-integers
    /// only if certification fails).
    pub min_s_power: f64,
    pub max_s_power: f64,
}

fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn parity_certify(m1: u64, m2: u64) -> Result<ParityReport> {
    let terms = expand_normalized(m1, m2)?;
    let all_integer = terms.iter().all(|t| t.exp_half_s >= 0 && t.exp_half_s % 2 == 0);
    let all_even = all_integer && terms.iter().all(|t| (t.exp_half_s / 2) % 2 == 0);
    let max_abs_coeff = terms
        .iter()
        .map(|t| t.coeff.abs())
        .max()
        .unwrap_or_else(BigRational::zero);
    let powers = terms.iter().map(|t| t.exp_half_s as f64 / 2.0);
    let min_s_power = powers.clone().fold(f64::INFINITY, f64::min);
    let max_s_power = powers.fold(f64::NEG_INFINITY, f64::max);
    Ok(ParityReport {
        m1,
        m2,
        branch: ParityBranch::for_denominator(m2),
        divided_by_sqrt_s: divides_by_sqrt_s(m1, m2),
        all_integer_s_powers: all_integer,
        all_even_s_powers: all_even,
        monomial_count: terms.len(),
        max_abs_coeff,
        min_s_power,
        max_s_power,
    })
}

/// Certification over every coprime pair with `m₁, m₂ ≤ max`.
pub fn certify_all(max: u64) -> Vec<ParityReport> {
    let mut out = Vec::new();
    for m1 in 1..=max {
        for m2 in 1..=max {
            if m1.gcd(&m2) == 1 {
                out.push(parity_certify(m1, m2).expect("coprime pair"));
            }
        }
    }
    out
}

/// Evaluates a normalized expansion at `z` with the model's constants.
pub fn eval_expansion(model: &Model, z: &PhasePoint, terms: &[Monomial]) -> Result<f64> {
    let cs = conserved_set(model, z)?;
    if !(cs.s > 0.0) {
        return Err(Error::NonpositiveS(cs.s));
    }
    let (q1, q2) = imaginary_parts(model, &cs, z.r, z.theta);
    let u_bar = 2.0 * z.p_r;
    let v_bar = z.theta.sin() * z.p_theta;
    Ok(terms.iter().map(|t| t.eval(u_bar, v_bar, q1, q2, cs.s)).sum())
}

/// `|symbolic - numeric| / max(1, |numeric|)` for `m = ±m₁/m₂`.
pub fn numeric_consistency(model: &Model, z: &PhasePoint, m1: u64, m2: u64) -> Result<f64> {
    require_coprime(m1, m2)?;
    let mut params = model.params().clone();
    params.m = RationalM::new(i64::from(params.m.sign()) * m1 as i64, m2 as i64)?;
    let model = Model::new(params, *model.window())?;
    let numeric = eval_calx(&model, z)?.value;
    let symbolic = eval_expansion(&model, z, &expand_normalized(m1, m2)?)?;
    Ok((symbolic - numeric).abs() / numeric.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Independent oracle: multiply out factor by factor with Gaussian-integer
    /// coefficients, then keep the branch component and halve.
    fn brute_force(m1: u64, m2: u64) -> HashMap<(u32, u32, u32, u32), i128> {
        type Poly = HashMap<(u32, u32, u32, u32), (i128, i128)>;
        fn mul(p: &Poly, q: &Poly) -> Poly {
            let mut out = Poly::new();
            for (ka, (ar, ai)) in p {
                for (kb, (br, bi)) in q {
                    let key = (ka.0 + kb.0, ka.1 + kb.1, ka.2 + kb.2, ka.3 + kb.3);
                    let e = out.entry(key).or_insert((0, 0));
                    e.0 += ar * br - ai * bi;
                    e.1 += ar * bi + ai * br;
                }
            }
            out
        }
        let radial: Poly = [((1, 0, 0, 0), (-1, 0)), ((0, 0, 1, 0), (0, 1))].into();
        let angular: Poly = [((0, 1, 0, 0), (1, 0)), ((0, 0, 0, 1), (0, 1))].into();
        let mut acc: Poly = [((0, 0, 0, 0), (1, 0))].into();
        for _ in 0..m2 {
            acc = mul(&acc, &radial);
        }
        for _ in 0..m1 {
            acc = mul(&acc, &angular);
        }
        // P - (-1)^{m2} conj(P), halved: Re P for m2 odd, Im P for m2 even.
        acc.into_iter()
            .map(|(k, (re, im))| (k, if m2 % 2 == 1 { re } else { im }))
            .filter(|(_, c)| *c != 0)
            .collect()
    }

    fn as_map(terms: &[Monomial]) -> HashMap<(u32, u32, u32, u32), i128> {
        terms
            .iter()
            .map(|t| {
                assert!(t.coeff.is_integer());
                (
                    (t.exp_u, t.exp_v, t.exp_q1, t.exp_q2),
                    t.coeff.to_integer().to_i128().unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn one_one_expansion() {
        // Re[(-u + iQ1)(v + iQ2)] = -uv - Q1 Q2
        let terms = expand(1, 1).unwrap();
        assert_eq!(terms.len(), 2);
        let map = as_map(&terms);
        assert_eq!(map[&(1, 1, 0, 0)], -1);
        assert_eq!(map[&(0, 0, 1, 1)], -1);
    }

    #[test]
    fn matches_brute_force_expansion() {
        for m1 in 1..=6u64 {
            for m2 in 1..=6u64 {
                if m1.gcd(&m2) != 1 {
                    continue;
                }
                assert_eq!(as_map(&expand(m1, m2).unwrap()), brute_force(m1, m2), "{m1}/{m2}");
            }
        }
    }

    #[test]
    fn one_two_has_uniform_parity() {
        let terms = expand(1, 2).unwrap();
        assert!(terms.iter().all(|t| t.exp_half_s % 2 == 0));
        assert!(terms.iter().all(|t| (t.exp_q1 + t.exp_q2) % 2 == 1));
    }

    #[test]
    fn not_coprime() {
        assert_eq!(expand(2, 4), Err(Error::NotCoprime { m1: 2, m2: 4 }));
        assert!(parity_certify(3, 6).is_err());
        assert!(expand(0, 1).is_err());
    }

    #[test]
    fn certify_examples() {
        let r = parity_certify(1, 1).unwrap();
        assert_eq!(r.branch, ParityBranch::RealPart);
        assert!(!r.divided_by_sqrt_s && r.all_integer_s_powers);
        let r = parity_certify(2, 1).unwrap();
        assert_eq!(r.branch, ParityBranch::RealPart);
        assert!(r.divided_by_sqrt_s && r.all_integer_s_powers);
        let r = parity_certify(1, 2).unwrap();
        assert_eq!(r.branch, ParityBranch::ImagPart);
        assert!(!r.divided_by_sqrt_s && r.all_integer_s_powers);
    }

    #[test]
    fn odd_s_powers_occur() {
        // -uv carries S^1, so "even powers" holds only in the integer sense.
        let r = parity_certify(1, 1).unwrap();
        assert!(!r.all_even_s_powers);
        assert_eq!(r.max_s_power, 1.0);
    }

    #[test]
    fn without_division_the_property_fails() {
        // Skipping the sqrt(S) division for m1 even leaves half-integer powers.
        let terms = expand(2, 1).unwrap();
        assert!(terms.iter().all(|t| t.exp_half_s % 2 == 1));
    }

    #[test]
    fn conjugation_self_consistency() {
        for (m1, m2) in [(1, 1), (2, 1), (1, 2), (3, 2), (5, 4), (4, 7)] {
            let plain = expand_with_unit(m1, m2, 1).unwrap();
            let mut swapped = expand_with_unit(m1, m2, -1).unwrap();
            if ParityBranch::for_denominator(m2) == ParityBranch::ImagPart {
                for t in swapped.iter_mut() {
                    t.coeff = -t.coeff.clone();
                }
            }
            assert_eq!(plain, swapped);
        }
    }

    #[test]
    fn ordering_is_graded_lex() {
        let terms = expand(3, 2).unwrap();
        for w in terms.windows(2) {
            assert_eq!(graded_lex(&w[0], &w[1]), Ordering::Less);
        }
    }

    #[test]
    fn small_orders_have_integer_coefficients() {
        for (m1, m2) in [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1)] {
            assert!(expand_normalized(m1, m2).unwrap().iter().all(|t| t.coeff.is_integer()));
        }
    }
}
