//! Exact rational arithmetic for distances and radii.
//!
//! Every distance, radius and Lipschitz ratio in the discrete part of the
//! library is a [`Rational`]. JSON encodes rationals as `{"num": n, "den": d}`
//! with `d > 0`; integers that do not fit in an `i64` are written as decimal
//! strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::Error;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^-e` as an exact rational.
pub fn dyadic(e: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

/// Parses `"3"`, `"-3/4"` or a terminating decimal like `"0.125"`.
pub fn parse(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = whole.abs() * &scale + frac;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(num, scale));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` for non-integers, the bare integer otherwise.
pub fn display(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer `k >= 0` with `2^k >= l` (zero when `l <= 1`).
pub fn ceil_log2(l: &Rational) -> u32 {
    let mut k = 0u32;
    let mut p = one();
    while &p < l {
        p *= int(2);
        k += 1;
    }
    k
}

/// `sum_{i < n} l^i`, the thickening factor accumulated by `n` right translations.
pub fn geometric_partial_sum(l: &Rational, n: u32) -> Rational {
    let mut acc = zero();
    let mut term = one();
    for _ in 0..n {
        acc += &term;
        term *= l;
    }
    acc
}

fn bigint_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(n.to_string()),
    }
}

pub fn to_json(r: &Rational) -> serde_json::Value {
    serde_json::json!({ "num": bigint_to_json(r.numer()), "den": bigint_to_json(r.denom()) })
}

pub fn from_json(v: &serde_json::Value) -> Result<Rational, Error> {
    let part = |key: &str| -> Result<BigInt, Error> {
        match v.get(key) {
            Some(serde_json::Value::Number(n)) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| Error::Parse(format!("rational `{key}` is not an integer"))),
            Some(serde_json::Value::String(s)) => {
                BigInt::from_str(s).map_err(|_| Error::Parse(format!("bad integer `{s}`")))
            }
            _ => Err(Error::Parse(format!("rational is missing `{key}`"))),
        }
    };
    let den = part("den")?;
    if !den.is_positive() {
        return Err(Error::Parse("rational denominator must be positive".into()));
    }
    Ok(Rational::new(part("num")?, den))
}

/// Serde adapter: `#[serde(with = "crate::rational::json")]`.
pub mod json {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &bigint_to_json(r.numer()))?;
        st.serialize_field("den", &bigint_to_json(r.denom()))?;
        st.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json(&v).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod json_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => to_json(r).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        v.map(|v| from_json(&v).map_err(de::Error::custom)).transpose()
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod json_vec {
    use super::*;

    pub fn serialize<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        rs.iter().map(to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let vs = Vec::<serde_json::Value>::deserialize(d)?;
        vs.iter()
            .map(|v| from_json(v).map_err(de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_decimals_and_integers() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse("-6/8").unwrap(), ratio(-3, 4));
        assert_eq!(parse("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn ceil_log2_matches_definition() {
        assert_eq!(ceil_log2(&int(1)), 0);
        assert_eq!(ceil_log2(&ratio(1, 2)), 0);
        assert_eq!(ceil_log2(&int(2)), 1);
        assert_eq!(ceil_log2(&ratio(5, 2)), 2);
        assert_eq!(ceil_log2(&int(4)), 2);
        assert_eq!(ceil_log2(&int(5)), 3);
    }

    #[test]
    fn geometric_sums() {
        assert_eq!(geometric_partial_sum(&int(1), 7), int(7));
        assert_eq!(geometric_partial_sum(&int(2), 3), int(7));
        assert_eq!(geometric_partial_sum(&int(3), 0), int(0));
    }

    #[test]
    fn json_round_trip_keeps_big_values_exact() {
        let big = Rational::new(BigInt::one(), BigInt::one() << 90);
        for r in [ratio(-3, 7), int(0), big] {
            assert_eq!(from_json(&to_json(&r)).unwrap(), r);
        }
        assert!(from_json(&serde_json::json!({"num": 1, "den": 0})).is_err());
    }
}
