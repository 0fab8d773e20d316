//! Dense univariate polynomials over `Q` in an indeterminate `T`.
//!
//! Used for Sen polynomials and characteristic polynomials; nothing here is
//! performance sensitive.

use std::fmt;

use num_traits::{One, Zero};

use crate::field::{fmt_q, one, q, zero, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    /// `coeffs[i]` is the coefficient of `T^i`; no trailing zeros.
    coeffs: Vec<Q>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::new(vec![one()])
    }

    /// `T - root`
    pub fn linear(root: &Q) -> Self {
        QPoly::new(vec![-root.clone(), one()])
    }

    /// Monic polynomial with the given roots (with multiplicity).
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Q>) -> Self {
        roots
            .into_iter()
            .fold(QPoly::one(), |acc, r| acc.mul(&QPoly::linear(r)))
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(zero)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(zero(), |acc, c| acc * x + c)
    }

    /// `p(T + s)`
    pub fn shift(&self, s: &Q) -> QPoly {
        let lin = QPoly::new(vec![s.clone(), one()]);
        self.coeffs.iter().rev().fold(QPoly::zero(), |acc, c| {
            acc.mul(&lin).add(&QPoly::new(vec![c.clone()]))
        })
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = &rem[i] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i - dd + j] -= &c * dc;
            }
            quot[i - dd] = c;
        }
        (QPoly::new(quot), QPoly::new(rem))
    }

    pub fn divides(&self, other: &QPoly) -> bool {
        other.div_rem(self).1.is_zero()
    }

    /// Rational roots with multiplicity (integer-coefficient rational root test).
    pub fn rational_roots(&self) -> Vec<Q> {
        let mut roots = Vec::new();
        let mut p = self.clone();
        // strip zero roots
        while !p.is_zero() && p.coeff(0).is_zero() {
            roots.push(zero());
            p = QPoly::new(p.coeffs[1..].to_vec());
        }
        if p.degree().unwrap_or(0) == 0 {
            return roots;
        }
        let candidates = candidate_roots(&p);
        for c in candidates {
            while p.degree().unwrap_or(0) > 0 && p.eval(&c).is_zero() {
                roots.push(c.clone());
                p = p.div_rem(&QPoly::linear(&c)).0;
            }
        }
        roots.sort();
        roots
    }
}

fn candidate_roots(p: &QPoly) -> Vec<Q> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    // clear denominators
    let lcm = p
        .coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p
        .coeffs
        .iter()
        .map(|c| (c * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let divisors = |n: &BigInt| -> Vec<BigInt> {
        let n = if n < &BigInt::zero() { -n } else { n.clone() };
        let mut out = Vec::new();
        let mut i = BigInt::one();
        while &i * &i <= n {
            if (&n % &i).is_zero() {
                out.push(i.clone());
                out.push(&n / &i);
            }
            i += 1;
        }
        out
    };
    let mut out = Vec::new();
    for a in divisors(&ints[0]) {
        for b in divisors(ints.last().unwrap()) {
            let r = Q::new(a.clone(), b.clone());
            out.push(r.clone());
            out.push(-r);
        }
    }
    out.sort();
    out.dedup();
    out
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            let neg = c < &zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "T".to_string(),
                _ => format!("T^{i}"),
            };
            if mono.is_empty() {
                write!(f, "{}", fmt_q(&mag))?;
            } else if mag == q(1) {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_q(&mag))?;
            }
        }
        Ok(())
    }
}
