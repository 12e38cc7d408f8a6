//! Exact rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for every exact quantity in the crate.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// `base^exp` for a possibly negative exponent.
pub fn pow(base: u32, exp: i64) -> Q {
    let b = BigInt::from(base);
    let p = num_traits::pow(b, exp.unsigned_abs() as usize);
    if exp >= 0 {
        Q::from_integer(p)
    } else {
        Q::new(BigInt::one(), p)
    }
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // numerator or denominator overflowed f64; fall back to a scaled quotient
        let n = v.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = v.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn abs(v: &Q) -> Q {
    v.abs()
}

/// Decimal `numerator/denominator` form used in reports and caches.
pub fn to_string(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers() {
        assert_eq!(pow(3, 2), qi(9));
        assert_eq!(pow(3, -2), q(1, 9));
        assert_eq!(pow(2, 0), one());
    }

    #[test]
    fn string_round_trip() {
        for v in [q(-4, 6), qi(7), zero(), q(1, 729)] {
            assert_eq!(parse(&to_string(&v)).unwrap(), v);
        }
        assert!(parse("1/0").is_none());
        assert!(parse("x").is_none());
    }
}
