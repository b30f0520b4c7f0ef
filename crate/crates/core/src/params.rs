//! Exponent bundle `(p, q, L, M)` and parameter parsing with an exact
//! rational shadow for the closed-form paths.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `p ∈ (0,1)`, its conjugate `q = p/(p−1) < 0`, `L > p` and `M ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    p: f64,
    q: f64,
    l: f64,
    m: f64,
}

impl Exponents {
    pub fn new(p: f64, l: f64) -> Result<Self> {
        Self::with_m(p, l, 0.0)
    }

    pub fn with_m(p: f64, l: f64, m: f64) -> Result<Self> {
        check_p(p)?;
        if !(l.is_finite() && l > p) {
            return Err(Error::param(format!("need L > p, got L={l}, p={p}")));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::param(format!("need M ≥ 0, got M={m}")));
        }
        Ok(Exponents {
            p,
            q: p / (p - 1.0),
            l,
            m,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `p / (L − p)`.
    pub fn constant_base(&self) -> f64 {
        self.p / (self.l - self.p)
    }

    /// `(p / (L − p))^p`, the constant whose validity is at stake.
    pub fn target_constant(&self) -> f64 {
        self.constant_base().powf(self.p)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("p must lie in (0,1), got {p}")));
    }
    Ok(())
}

/// A user-supplied real parameter: its floating value plus the exact
/// rational it was written as (`0.3333`, `1/3`, `1e-3`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: f64,
    pub exact: BigRational,
    pub text: String,
}

impl Param {
    pub fn from_f64(value: f64) -> Result<Self> {
        let exact = BigRational::from_float(value)
            .ok_or_else(|| Error::param(format!("non-finite parameter {value}")))?;
        Ok(Param {
            value,
            exact,
            text: format!("{value}"),
        })
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exact = parse_rational(s)?;
        let value = rational_to_f64(&exact);
        if !value.is_finite() {
            return Err(Error::Parse(format!("parameter {s:?} is not representable")));
        }
        Ok(Param {
            value,
            exact,
            text: s.trim().to_string(),
        })
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Parses `num/den`, or a decimal with optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational or decimal number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Nearest-ish `f64` of a big rational (exact for dyadic inputs that fit).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale huge numerators/denominators into range before dividing.
    let n_bits = r.numer().bits() as i64;
    let d_bits = r.denom().bits() as i64;
    let shift = n_bits.max(d_bits) - 1000;
    let (n, d) = if shift > 0 {
        (r.numer() >> shift as usize, r.denom() >> shift as usize)
    } else {
        (r.numer().clone(), r.denom().clone())
    };
    let (nf, df) = (n.to_f64().unwrap_or(f64::NAN), d.to_f64().unwrap_or(f64::NAN));
    if df == 0.0 {
        return if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    nf / df
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn rat_one() -> BigRational {
    BigRational::one()
}
