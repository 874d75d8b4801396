//! Exact rational arithmetic helpers and the `"p/q"` text form used in every
//! file format of this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// The scalar of the exact pipeline. All metrics, weights and breakpoints are
/// `Rat`s; floating point only ever appears in rendering and in `--float`
/// annotations.
pub type Rat = BigRational;

/// `p/q` from machine integers.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as a rational.
pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Nonnegative integer power.
pub fn rat_pow(base: &Rat, exp: usize) -> Rat {
    let mut acc = Rat::one();
    let mut sq = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// `2^-n`.
pub fn half_pow(n: usize) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(2).pow(n as u32))
}

/// Renders as a plain integer when the denominator is 1, else `p/q`.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"` or `"p"`. Whitespace around the components is rejected.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let err = || Error::parse("rational", format!("expected `p` or `p/q`, got {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| err())?;
            let q: BigInt = q.parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(Error::parse("rational", "zero denominator"));
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// Best-effort `f64` approximation, for display and rendering only.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division when numerator/denominator overflow.
        let s = r.numer().to_string();
        let t = r.denom().to_string();
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        sign * 10f64.powi(s.len() as i32 - t.len() as i32)
    })
}

/// Reads a JSON value that is either an integer or a `"p/q"` string.
pub fn rat_from_json(value: &serde_json::Value, path: &str) -> Result<Rat> {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(rat_int(i))
            } else {
                Err(Error::parse(
                    path,
                    "non-integer numbers are not accepted; use \"p/q\"",
                ))
            }
        }
        serde_json::Value::String(s) => {
            parse_rat(s).map_err(|_| Error::parse(path, format!("bad rational {s:?}")))
        }
        other => Err(Error::parse(
            path,
            format!("expected rational, got {other}"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_round_trip() {
        for s in ["0", "7", "-3", "1/2", "-5/4", "355/113"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(rat_to_string(&r), s);
        }
    }

    #[test]
    fn normalizes_on_parse() {
        assert_eq!(parse_rat("2/4").unwrap(), rat(1, 2));
        assert_eq!(rat_to_string(&parse_rat("6/3").unwrap()), "2");
        assert_eq!(parse_rat("3/-6").unwrap(), rat(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "a", "1/0", "1/", "/2", "1.5", " 1"] {
            assert!(parse_rat(s).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn powers() {
        assert_eq!(rat_pow(&rat(1, 2), 3), rat(1, 8));
        assert_eq!(rat_pow(&rat(9, 10), 0), rat_int(1));
        assert_eq!(half_pow(5), rat(1, 32));
    }
}
