//! Exact rational helpers and their canonical text forms.
//!
//! Rationals are written as `"p/q"` (always with a denominator) and big
//! integers as decimal strings, so JSON output never loses precision.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qu(n: &BigUint) -> Q {
    Q::from_integer(BigInt::from(n.clone()))
}

/// Canonical `"p/q"` form.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"1.01"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| invalid(format!("bad rational {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| invalid(format!("bad rational {s:?}")))?;
        if d.is_zero() {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(invalid(format!("bad decimal {s:?}")));
        }
        let n: BigInt = digits.parse().map_err(|_| invalid(format!("bad decimal {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| invalid(format!("bad number {s:?}")))?;
    Ok(Q::from_integer(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator and denominator too large for a direct conversion
        let shift = x.denom().bits().max(x.numer().bits()) as i64 - 60;
        let scale = BigInt::one() << shift.max(0) as usize;
        let n = (x.numer() / &scale).to_f64().unwrap_or(0.0);
        let d = (x.denom() / &scale).to_f64().unwrap_or(1.0);
        n / d
    })
}

/// Natural logarithm of a positive big integer, to double precision.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    let top = (x >> shift).to_f64().unwrap_or(1.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Rational approximation of a finite double, exact in binary.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

pub mod serde_q {
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(D::Error::custom)
    }
}

pub mod serde_q_vec {
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_q(s).map_err(D::Error::custom)).collect()
    }
}

pub mod serde_q_opt_vec {
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
        xs.as_ref()
            .map(|v| v.iter().map(fmt_q).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Q>>, D::Error> {
        let v = Option::<Vec<String>>::deserialize(d)?;
        v.map(|v| v.iter().map(|s| parse_q(s).map_err(D::Error::custom)).collect())
            .transpose()
    }
}

pub mod serde_q_mat {
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|row| row.iter().map(fmt_q).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|row| row.iter().map(|s| parse_q(s).map_err(D::Error::custom)).collect())
            .collect()
    }
}

pub mod serde_big {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

pub mod serde_biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

pub mod serde_big_vec {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(D::Error::custom))
            .collect()
    }
}

pub mod serde_big_mat {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Vec::<Vec<String>>::deserialize(d)?
            .iter()
            .map(|row| row.iter().map(|s| s.parse().map_err(D::Error::custom)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_q("3/10").unwrap(), q(3, 10));
        assert_eq!(parse_q("1.01").unwrap(), q(101, 100));
        assert_eq!(parse_q("-0.5").unwrap(), q(-1, 2));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        for x in [q(-7, 3), qi(0), q(22, 7)] {
            assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
        }
        assert_eq!(fmt_q(&qi(4)), "4/1");
    }

    #[test]
    fn big_log_matches_small_log() {
        let x = BigUint::from(123_456_789u64);
        assert!((ln_big(&x) - 123_456_789f64.ln()).abs() < 1e-12);
        let huge = num_traits::pow(BigUint::from(3u32), 2000);
        assert!((ln_big(&huge) - 2000.0 * 3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 8), BigUint::from(12870u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(factorial(5), BigUint::from(120u32));
    }
}
