//! Exact scalar field used for every coefficient in the crate.
//!
//! All module data lives over `Q`. Code elsewhere only relies on the ring
//! operations re-exported here, so a finite extension could replace the alias.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Q;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// `base^exp` for a possibly negative exponent. Panics on `0^negative`.
pub fn qpow(base: &Q, exp: i64) -> Q {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        assert!(!base.is_zero(), "zero to a negative power");
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub fn binomial(n: u64, k: u64) -> Q {
    if k > n {
        return zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(acc)
}

/// Generalized binomial coefficient `a choose k` for rational `a`.
pub fn binomial_q(a: &Q, k: u64) -> Q {
    let mut acc = one();
    for i in 0..k {
        acc = acc * (a - q(i as i64)) / q(i as i64 + 1);
    }
    acc
}

pub fn factorial(n: u64) -> Q {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    Q::from_integer(acc)
}

/// Parses `"3"`, `"-3/2"`, `" 5 "`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// Canonical text form: `7`, `-3/2`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn is_integer_value(x: &Q) -> bool {
    x.is_integer()
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-3/2"), Some(qf(-3, 2)));
        assert_eq!(parse_q(" 4/2 "), Some(q(2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
        assert_eq!(fmt_q(&qf(6, -4)), "-3/2");
        assert_eq!(fmt_q(&q(5)), "5");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), q(10));
        assert_eq!(binomial(2, 5), q(0));
        assert_eq!(binomial_q(&q(5), 2), q(10));
        assert_eq!(binomial_q(&qf(1, 2), 2), qf(-1, 8));
        assert_eq!(factorial(5), q(120));
        assert_eq!(qpow(&q(2), -3), qf(1, 8));
    }
}
