//! Exact rational deformation parameter `m = sign * m1 / m2`.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RationalSpec", into = "RationalSpec")]
pub struct RationalM {
    m1: u64,
    m2: u64,
    negative: bool,
}

impl RationalM {
    /// Builds `num / den` reduced to lowest terms.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if num == 0 {
            return Err(Error::ZeroM);
        }
        if den == 0 {
            return Err(Error::InvalidParameter("m has zero denominator".into()));
        }
        let negative = (num < 0) != (den < 0);
        let (n, d) = (num.unsigned_abs(), den.unsigned_abs());
        let g = n.gcd(&d);
        Ok(Self {
            m1: n / g,
            m2: d / g,
            negative,
        })
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::new(n, 1)
    }

    /// Numerator of |m| in lowest terms.
    pub fn m1(&self) -> u64 {
        self.m1
    }

    /// Denominator of |m| in lowest terms.
    pub fn m2(&self) -> u64 {
        self.m2
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign()) * self.m1 as f64 / self.m2 as f64
    }

    pub fn abs(&self) -> f64 {
        self.m1 as f64 / self.m2 as f64
    }
}

impl fmt::Display for RationalM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.negative { "-" } else { "" };
        if self.m2 == 1 {
            write!(f, "{s}{}", self.m1)
        } else {
            write!(f, "{s}{}/{}", self.m1, self.m2)
        }
    }
}

impl std::str::FromStr for RationalM {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse rational m from {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: i64 = d.parse().map_err(|_| bad())?;
        Self::new(n, d)
    }
}

/// Serialized form: either a string such as `"2/3"` or an integer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RationalSpec {
    Int(i64),
    Text(String),
}

impl TryFrom<RationalSpec> for RationalM {
    type Error = Error;
    fn try_from(spec: RationalSpec) -> Result<Self> {
        match spec {
            RationalSpec::Int(n) => Self::integer(n),
            RationalSpec::Text(s) => s.parse(),
        }
    }
}

impl From<RationalM> for RationalSpec {
    fn from(m: RationalM) -> Self {
        RationalSpec::Text(m.to_string())
    }
}
