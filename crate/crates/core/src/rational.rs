//! Exact rational scalars.
//!
//! Everything in this crate computes over `Q = BigRational`; no floating
//! point appears anywhere in a bound or a certificate.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = num_rational::BigRational;

/// `n/d` from machine integers.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `2^exp` as a big integer.
pub fn pow2(exp: u64) -> BigUint {
    BigUint::one() << usize::try_from(exp).expect("pow2 exponent fits usize")
}

/// `1/2^exp` as a rational.
pub fn half_pow(exp: u64) -> Q {
    Q::new(BigInt::one(), BigInt::from(pow2(exp)))
}

/// Parse `num/den` or a bare integer. Whitespace is not tolerated.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    match s.split_once('/') {
        None => {
            let n: BigInt = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer `{s}`")))?;
            Ok(Q::from_integer(n))
        }
        Some((n, d)) => {
            let n: BigInt = n
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator `{n}`")))?;
            let d: BigInt = d
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator `{d}`")))?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Q::new(n, d))
        }
    }
}

/// Canonical text form, `num/den` with den omitted when it is 1.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Absolute value.
pub fn qabs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in ["3/4", "-7/2", "5", "-1", "0"] {
            let v = parse_q(s).unwrap();
            assert_eq!(parse_q(&fmt_q(&v)).unwrap(), v);
        }
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("").is_err());
        assert!(parse_q("a/b").is_err());
    }

    #[test]
    fn reduced_form() {
        assert_eq!(fmt_q(&parse_q("2/4").unwrap()), "1/2");
        assert_eq!(fmt_q(&parse_q("-2/-4").unwrap()), "1/2");
        assert_eq!(fmt_q(&parse_q("4/2").unwrap()), "2");
    }

    #[test]
    fn half_pow_exact() {
        assert_eq!(half_pow(3), q(1, 8));
        assert_eq!(half_pow(0), qi(1));
    }
}
