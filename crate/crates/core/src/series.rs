//! Truncated power series with exact rational coefficients in either the
//! canonical coordinate `t` or in `X`, where `t = log(1 + X)`.
//!
//! Precision is explicit: a series with `trunc = N` is known modulo
//! `coordinate^N`. Binary operations work at the minimum precision of their
//! inputs. The only operations that lose precision are [`TruncSeries::divide_by_t`]
//! (one degree) and [`TruncSeries::psi`] (precision divided by `p`).
//!
//! `ψ` is computed on the polynomial representative of the input (the
//! coefficients below `trunc`, higher ones read as zero). `ψ` is not
//! continuous for the `X`-adic topology over `Q`, so this is the only
//! reading under which a truncated `ψ` is exact; see the `sheaf` module.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{self, ExprAlgebra, ParseError};
use crate::field::{binomial, binomial_q, factorial, fmt_q, one, q, qpow, zero, Q};
use crate::linalg::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    T,
    X,
}

impl Coord {
    pub fn symbol(self) -> &'static str {
        match self {
            Coord::T => "t",
            Coord::X => "X",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("coordinate mismatch: {0:?} vs {1:?}")]
    CoordMismatch(Coord, Coord),
    #[error("series with zero truncation")]
    ZeroTruncation,
    #[error("series is not a unit (constant term is zero)")]
    NotUnit,
    #[error("series is not divisible by t (constant term {0})")]
    NotDivisible(String),
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("precision {trunc} too low, need at least {need}")]
    PrecisionTooLow { trunc: usize, need: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<Q>,
    coord: Coord,
}

impl TruncSeries {
    pub fn new(coeffs: Vec<Q>, coord: Coord) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::ZeroTruncation);
        }
        Ok(TruncSeries { coeffs, coord })
    }

    /// Polynomial `coeffs` read modulo `coord^trunc` (missing coefficients are zero).
    pub fn from_poly(coeffs: &[Q], trunc: usize, coord: Coord) -> Result<Self, SeriesError> {
        if trunc == 0 {
            return Err(SeriesError::ZeroTruncation);
        }
        let mut c: Vec<Q> = coeffs.iter().take(trunc).cloned().collect();
        c.resize(trunc, zero());
        Ok(TruncSeries { coeffs: c, coord })
    }

    pub fn zero(trunc: usize, coord: Coord) -> Self {
        assert!(trunc > 0, "zero truncation");
        TruncSeries {
            coeffs: vec![zero(); trunc],
            coord,
        }
    }

    pub fn constant(c: Q, trunc: usize, coord: Coord) -> Self {
        let mut s = TruncSeries::zero(trunc, coord);
        s.coeffs[0] = c;
        s
    }

    pub fn one(trunc: usize, coord: Coord) -> Self {
        TruncSeries::constant(one(), trunc, coord)
    }

    pub fn monomial(c: Q, power: usize, trunc: usize, coord: Coord) -> Self {
        let mut s = TruncSeries::zero(trunc, coord);
        if power < trunc {
            s.coeffs[power] = c;
        }
        s
    }

    /// The coordinate itself (`t` or `X`).
    pub fn var(trunc: usize, coord: Coord) -> Self {
        TruncSeries::monomial(one(), 1, trunc, coord)
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coord(&self) -> Coord {
        self.coord
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Drop to a lower precision. Asking for more precision than known panics.
    pub fn truncate(&self, n: usize) -> Self {
        assert!(
            n >= 1 && n <= self.trunc(),
            "cannot truncate {} to {n}",
            self.trunc()
        );
        TruncSeries {
            coeffs: self.coeffs[..n].to_vec(),
            coord: self.coord,
        }
    }

    /// Equality modulo `coord^n`, `n` capped by both precisions.
    pub fn agrees_with(&self, other: &TruncSeries, n: usize) -> bool {
        let n = n.min(self.trunc()).min(other.trunc());
        self.coord == other.coord && self.coeffs[..n] == other.coeffs[..n]
    }

    fn check(&self, other: &TruncSeries) -> Result<usize, SeriesError> {
        if self.coord != other.coord {
            return Err(SeriesError::CoordMismatch(self.coord, other.coord));
        }
        Ok(self.trunc().min(other.trunc()))
    }

    pub fn add(&self, other: &TruncSeries) -> Result<Self, SeriesError> {
        let n = self.check(other)?;
        Ok(TruncSeries {
            coeffs: (0..n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect(),
            coord: self.coord,
        })
    }

    pub fn sub(&self, other: &TruncSeries) -> Result<Self, SeriesError> {
        let n = self.check(other)?;
        Ok(TruncSeries {
            coeffs: (0..n).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect(),
            coord: self.coord,
        })
    }

    pub fn neg(&self) -> Self {
        self.scale(&-one())
    }

    pub fn scale(&self, s: &Q) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            coord: self.coord,
        }
    }

    pub fn mul(&self, other: &TruncSeries) -> Result<Self, SeriesError> {
        let n = self.check(other)?;
        let mut out = vec![zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if !other.coeffs[j].is_zero() {
                    out[i + j] += &self.coeffs[i] * &other.coeffs[j];
                }
            }
        }
        Ok(TruncSeries {
            coeffs: out,
            coord: self.coord,
        })
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = TruncSeries::one(self.trunc(), self.coord);
        for _ in 0..e {
            acc = acc.mul(self).expect("same coordinate");
        }
        acc
    }

    pub fn invert(&self) -> Result<Self, SeriesError> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(SeriesError::NotUnit);
        }
        let n = self.trunc();
        let inv0 = a0.recip();
        let mut out = vec![zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &out[k - j];
            }
            out[k] = -acc * &inv0;
        }
        Ok(TruncSeries {
            coeffs: out,
            coord: self.coord,
        })
    }

    /// `f / t` with precision reduced by one.
    pub fn divide_by_t(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NotDivisible(fmt_q(&self.coeffs[0])));
        }
        if self.trunc() < 2 {
            return Err(SeriesError::PrecisionTooLow {
                trunc: self.trunc(),
                need: 2,
            });
        }
        let shifted = TruncSeries {
            coeffs: self.coeffs[1..].to_vec(),
            coord: self.coord,
        };
        match self.coord {
            Coord::T => Ok(shifted),
            // f/t = (f/X) * (X/t)
            Coord::X => {
                let log_over_x: Vec<Q> = (0..shifted.trunc())
                    .map(|n| {
                        let s = if n % 2 == 0 { one() } else { -one() };
                        s / q(n as i64 + 1)
                    })
                    .collect();
                let unit = TruncSeries::new(log_over_x, Coord::X)?.invert()?;
                shifted.mul(&unit)
            }
        }
    }

    /// `self(inner)`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &TruncSeries) -> Self {
        assert!(inner.coeffs[0].is_zero(), "inner series must vanish at 0");
        let n = self.trunc().min(inner.trunc());
        let inner = inner.truncate(n);
        let mut out = TruncSeries::zero(n, inner.coord);
        let mut power = TruncSeries::one(n, inner.coord);
        for i in 0..n {
            if !self.coeffs[i].is_zero() {
                out = out
                    .add(&power.scale(&self.coeffs[i]))
                    .expect("same coordinate");
            }
            power = power.mul(&inner).expect("same coordinate");
        }
        out
    }

    /// `log(1 + X)` modulo `X^n`.
    pub fn log1p_x(n: usize) -> Self {
        let coeffs = (0..n)
            .map(|i| {
                if i == 0 {
                    zero()
                } else {
                    let s = if i % 2 == 1 { one() } else { -one() };
                    s / q(i as i64)
                }
            })
            .collect();
        TruncSeries {
            coeffs,
            coord: Coord::X,
        }
    }

    /// `e^t - 1` modulo `t^n`.
    pub fn expm1_t(n: usize) -> Self {
        let coeffs = (0..n)
            .map(|i| {
                if i == 0 {
                    zero()
                } else {
                    factorial(i as u64).recip()
                }
            })
            .collect();
        TruncSeries {
            coeffs,
            coord: Coord::T,
        }
    }

    /// Rewrite in the `X` coordinate (identity if already there).
    pub fn to_x(&self) -> Self {
        match self.coord {
            Coord::X => self.clone(),
            Coord::T => self.compose(&TruncSeries::log1p_x(self.trunc())),
        }
    }

    /// Rewrite in the `t` coordinate (identity if already there).
    pub fn to_t(&self) -> Self {
        match self.coord {
            Coord::T => self.clone(),
            Coord::X => self.compose(&TruncSeries::expm1_t(self.trunc())),
        }
    }

    pub fn in_coord(&self, c: Coord) -> Self {
        match c {
            Coord::T => self.to_t(),
            Coord::X => self.to_x(),
        }
    }

    /// `φ`: `t ↦ p·t`, equivalently `X ↦ (1+X)^p - 1`.
    pub fn phi(&self, p: u64) -> Self {
        match self.coord {
            Coord::T => {
                let pq = q(p as i64);
                TruncSeries {
                    coeffs: self
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(n, c)| c * qpow(&pq, n as i64))
                        .collect(),
                    coord: Coord::T,
                }
            }
            Coord::X => self.compose(&phi_of_x(p, self.trunc())),
        }
    }

    /// `φ^{-1}` on the `t` coordinate: `t ↦ t/p`. Only the `t` form is a
    /// power series substitution, so `X` input is routed through `t`.
    pub fn phi_inverse(&self, p: u64) -> Self {
        let t = self.to_t();
        let inv = q(p as i64).recip();
        let out = TruncSeries {
            coeffs: t
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * qpow(&inv, n as i64))
                .collect(),
            coord: Coord::T,
        };
        out.in_coord(self.coord)
    }

    /// `γ_a`: `t ↦ a·t`, equivalently `X ↦ (1+X)^a - 1`.
    pub fn gamma(&self, a: &Q) -> Result<Self, SeriesError> {
        if a.is_zero() {
            return Err(SeriesError::ZeroScalar);
        }
        Ok(match self.coord {
            Coord::T => TruncSeries {
                coeffs: self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c * qpow(a, n as i64))
                    .collect(),
                coord: Coord::T,
            },
            Coord::X => {
                let n = self.trunc();
                let inner: Vec<Q> = (0..n)
                    .map(|j| {
                        if j == 0 {
                            zero()
                        } else {
                            binomial_q(a, j as u64)
                        }
                    })
                    .collect();
                self.compose(&TruncSeries::new(inner, Coord::X)?)
            }
        })
    }

    /// `∇ = t·d/dt`; in `X` this is `(1+X)·log(1+X)·d/dX`.
    pub fn nabla(&self) -> Self {
        match self.coord {
            Coord::T => TruncSeries {
                coeffs: self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c * q(n as i64))
                    .collect(),
                coord: Coord::T,
            },
            Coord::X => {
                let n = self.trunc();
                let deriv: Vec<Q> = (0..n)
                    .map(|i| self.coeff(i + 1) * q(i as i64 + 1))
                    .collect();
                // the top coefficient of the derivative is unknown, but it is
                // multiplied by log(1+X) which has valuation 1
                let d = TruncSeries {
                    coeffs: deriv,
                    coord: Coord::X,
                };
                let mut one_plus_x = TruncSeries::one(n, Coord::X);
                if n > 1 {
                    one_plus_x.coeffs[1] = one();
                }
                let factor = one_plus_x.mul(&TruncSeries::log1p_x(n)).expect("X");
                let mut out = factor.mul(&d).expect("X");
                if n >= 1 {
                    // contribution of the unknown coefficient lands in degree >= n
                    out.coeffs.truncate(n);
                }
                out
            }
        }
    }

    /// `ψ` for the prime `p`, acting on the polynomial representative.
    ///
    /// Solves `f = Σ_{i<p} (1+X)^i φ(f_i)` for polynomials `f_i` of degree
    /// `< M = ⌈N/p⌉` (a square `pM × pM` system) and returns `f_0` at
    /// precision `⌊N/p⌋`.
    pub fn psi(&self, p: u64) -> Result<Self, SeriesError> {
        let p_us = p as usize;
        let n = self.trunc();
        if n < p_us {
            return Err(SeriesError::PrecisionTooLow {
                trunc: n,
                need: p_us,
            });
        }
        if self.coord == Coord::T {
            // only the X-polynomial reading is exact; convert and back
            return Ok(self.to_x().psi(p)?.to_t());
        }
        let m = n.div_ceil(p_us);
        let size = p_us * m;
        let system = psi_system(p, m);
        let rhs: Vec<Q> = (0..size).map(|i| self.coeff(i)).collect();
        let sol = system
            .solve(&rhs)
            .expect("ψ decomposition system is nonsingular");
        let out_trunc = n / p_us;
        Ok(TruncSeries {
            coeffs: sol[..out_trunc].to_vec(),
            coord: Coord::X,
        })
    }

    pub fn parse(s: &str, trunc: usize, coord: Coord) -> Result<Self, SeriesError> {
        if trunc == 0 {
            return Err(SeriesError::ZeroTruncation);
        }
        let alg = SeriesAlgebra { trunc, coord };
        Ok(expr::parse(&alg, s)?)
    }
}

/// `(1+X)^p - 1` modulo `X^n`.
pub fn phi_of_x(p: u64, n: usize) -> TruncSeries {
    let coeffs = (0..n)
        .map(|j| {
            if j == 0 {
                zero()
            } else {
                binomial(p, j as u64)
            }
        })
        .collect();
    TruncSeries {
        coeffs,
        coord: Coord::X,
    }
}

/// Columns `(1+X)^i φ(X^j)` for `i < p`, `j < m`, as coefficient vectors of
/// length `p·m` (column index `i·m + j`). These are exact polynomials of
/// degree `< p·m`.
pub(crate) fn psi_system(p: u64, m: usize) -> Mat {
    let p_us = p as usize;
    let size = p_us * m;
    let phi_x = phi_of_x(p, size);
    let mut cols = Vec::with_capacity(size);
    for i in 0..p_us {
        let mut shift = TruncSeries::zero(size, Coord::X);
        for (d, c) in shift.coeffs.iter_mut().enumerate().take(i + 1) {
            *c = binomial(i as u64, d as u64);
        }
        let mut phi_pow = TruncSeries::one(size, Coord::X);
        for _ in 0..m {
            let col = shift.mul(&phi_pow).expect("X");
            cols.push(col.coeffs.clone());
            phi_pow = phi_pow.mul(&phi_x).expect("X");
        }
    }
    Mat::from_columns(size, &cols)
}

struct SeriesAlgebra {
    trunc: usize,
    coord: Coord,
}

impl ExprAlgebra for SeriesAlgebra {
    type Elem = TruncSeries;

    fn constant(&self, c: Q) -> TruncSeries {
        TruncSeries::constant(c, self.trunc, self.coord)
    }

    fn atom(&self, name: &str) -> Option<TruncSeries> {
        let matches = match self.coord {
            Coord::T => name == "t",
            Coord::X => name == "X" || name == "x",
        };
        matches.then(|| TruncSeries::var(self.trunc, self.coord))
    }

    fn add(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        a.add(b).expect("same coordinate")
    }

    fn mul(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        a.mul(b).expect("same coordinate")
    }

    fn scale(&self, a: &TruncSeries, s: &Q) -> TruncSeries {
        a.scale(s)
    }

    fn as_scalar(&self, a: &TruncSeries) -> Option<Q> {
        a.coeffs[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| a.coeffs[0].clone())
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.coord.symbol();
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            let mono = match i {
                0 => String::new(),
                1 => v.to_string(),
                _ => format!("{v}^{i}"),
            };
            let body = if mono.is_empty() {
                fmt_q(&mag)
            } else if mag.is_one() {
                mono
            } else {
                format!("{}*{mono}", fmt_q(&mag))
            };
            terms.push((neg, body));
        }
        if terms.is_empty() {
            write!(f, "0")?;
        } else {
            for (k, (neg, body)) in terms.iter().enumerate() {
                match (k, neg) {
                    (0, true) => write!(f, "-{body}")?,
                    (0, false) => write!(f, "{body}")?,
                    (_, true) => write!(f, " - {body}")?,
                    (_, false) => write!(f, " + {body}")?,
                }
            }
        }
        write!(f, " + O({v}^{})", self.trunc())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::qf;
    use proptest::prelude::*;

    fn s(text: &str, n: usize, c: Coord) -> TruncSeries {
        TruncSeries::parse(text, n, c).unwrap()
    }

    fn small_q() -> impl Strategy<Value = Q> {
        (-9i64..=9, 1i64..=4).prop_map(|(a, b)| qf(a, b))
    }

    fn series_t(n: usize) -> impl Strategy<Value = TruncSeries> {
        proptest::collection::vec(small_q(), n).prop_map(|c| TruncSeries::new(c, Coord::T).unwrap())
    }

    fn series_x(n: usize) -> impl Strategy<Value = TruncSeries> {
        proptest::collection::vec(small_q(), n).prop_map(|c| TruncSeries::new(c, Coord::X).unwrap())
    }

    /// Independent ψ: expand in the basis (1+X)^j and keep the terms with p | j.
    fn psi_by_binomial_basis(f: &TruncSeries, p: u64) -> Vec<Q> {
        let n = f.trunc();
        // X^d = Σ_j C(d,j) (-1)^{d-j} (1+X)^j
        let mut in_basis = vec![zero(); n];
        for d in 0..n {
            for j in 0..=d {
                let sign = if (d - j) % 2 == 0 { one() } else { -one() };
                in_basis[j] += f.coeff(d) * binomial(d as u64, j as u64) * sign;
            }
        }
        // (1+X)^{j/p} back to X^i
        let mut out = vec![zero(); n];
        for (j, c) in in_basis.iter().enumerate() {
            if j as u64 % p != 0 {
                continue;
            }
            let e = j as u64 / p;
            for i in 0..=e as usize {
                out[i] += c * binomial(e, i as u64);
            }
        }
        out
    }

    #[test]
    fn rejects_zero_truncation() {
        assert_eq!(
            TruncSeries::new(vec![], Coord::T),
            Err(SeriesError::ZeroTruncation)
        );
        assert!(TruncSeries::parse("1", 0, Coord::T).is_err());
        let c = TruncSeries::constant(q(3), 1, Coord::T);
        assert_eq!(c.invert().unwrap().coeff(0), qf(1, 3));
    }

    #[test]
    fn maclaurin_coordinate_changes() {
        let t = TruncSeries::var(4, Coord::T);
        assert_eq!(t.to_x(), s("X - 1/2*X^2 + 1/3*X^3", 4, Coord::X));
        let x = TruncSeries::var(3, Coord::X);
        assert_eq!(x.to_t(), s("t + 1/2*t^2", 3, Coord::T));
    }

    #[test]
    fn products_and_inverse() {
        let t = TruncSeries::var(3, Coord::T);
        assert_eq!(t.mul(&t).unwrap(), s("t^2", 3, Coord::T));
        let a = s("1 + X", 3, Coord::X);
        assert_eq!(a.mul(&a).unwrap(), s("1 + 2*X + X^2", 3, Coord::X));
        assert_eq!(
            s("1 + t", 3, Coord::T).invert().unwrap(),
            s("1 - t + t^2", 3, Coord::T)
        );
        assert_eq!(t.invert(), Err(SeriesError::NotUnit));
        assert_eq!(
            TruncSeries::constant(q(2), 3, Coord::T).invert().unwrap(),
            TruncSeries::constant(qf(1, 2), 3, Coord::T)
        );
        assert!(matches!(t.add(&a), Err(SeriesError::CoordMismatch(..))));
    }

    #[test]
    fn min_precision_is_kept() {
        let a = s("1 + t", 5, Coord::T);
        let b = s("1 + t", 3, Coord::T);
        assert_eq!(a.mul(&b).unwrap().trunc(), 3);
        assert_eq!(a.add(&b).unwrap().trunc(), 3);
    }

    #[test]
    fn division_by_t() {
        let f = s("t^2", 4, Coord::T);
        let g = f.divide_by_t().unwrap();
        assert_eq!(g, s("t", 3, Coord::T));
        assert!(matches!(
            s("1 + t", 4, Coord::T).divide_by_t(),
            Err(SeriesError::NotDivisible(_))
        ));
        // in X: t/t = 1 at one lower precision
        let tx = TruncSeries::var(6, Coord::T).to_x();
        assert_eq!(tx.divide_by_t().unwrap(), TruncSeries::one(5, Coord::X));
    }

    #[test]
    fn frobenius_gamma_nabla_basics() {
        assert_eq!(TruncSeries::var(4, Coord::T).phi(3), s("3*t", 4, Coord::T));
        assert_eq!(
            TruncSeries::var(3, Coord::X).phi(2),
            s("2*X + X^2", 3, Coord::X)
        );
        assert_eq!(
            TruncSeries::var(4, Coord::T).gamma(&qf(2, 3)).unwrap(),
            s("2/3*t", 4, Coord::T)
        );
        assert_eq!(s("t^2", 4, Coord::T).nabla(), s("2*t^2", 4, Coord::T));
        assert!(TruncSeries::one(4, Coord::T).nabla().is_zero());
        assert_eq!(
            TruncSeries::var(4, Coord::T).gamma(&q(0)),
            Err(SeriesError::ZeroScalar)
        );
    }

    #[test]
    fn psi_of_x_matches_direct_solve() {
        // ψ(X) at N=8, p=2: solve the 8x8 system by hand from its columns
        let x = TruncSeries::var(8, Coord::X);
        let sys = psi_system(2, 4);
        let rhs: Vec<Q> = (0..8).map(|i| x.coeff(i)).collect();
        let sol = sys.solve(&rhs).unwrap();
        let got = x.psi(2).unwrap();
        assert_eq!(got.trunc(), 4);
        assert_eq!(got.coeffs(), &sol[..4]);
        // X = (1+X)·φ(1) - φ(1), so ψ(X) = -1
        assert_eq!(got, TruncSeries::constant(q(-1), 4, Coord::X));
    }

    #[test]
    fn psi_precision_floor() {
        let f = s("X^2", 3, Coord::X);
        let out = f.psi(2).unwrap();
        assert_eq!(out.trunc(), 1);
        assert_eq!(out.coeff(0), q(2));
        assert!(s("X", 2, Coord::X).psi(3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coordinate_round_trip(f in series_t(12)) {
            prop_assert_eq!(f.to_x().to_t(), f);
        }

        #[test]
        fn unit_inverse(mut f in series_t(8)) {
            if f.coeff(0).is_zero() { f.coeffs[0] = one(); }
            let prod = f.mul(&f.invert().unwrap()).unwrap();
            prop_assert_eq!(prod, TruncSeries::one(8, Coord::T));
        }

        #[test]
        fn divide_cancels_t(mut u in series_t(7)) {
            if u.coeff(0).is_zero() { u.coeffs[0] = one(); }
            let tu = TruncSeries::var(7, Coord::T).mul(&u).unwrap();
            prop_assert_eq!(tu.divide_by_t().unwrap(), u.truncate(6));
        }

        #[test]
        fn nabla_is_a_derivation(f in series_t(8), g in series_t(8)) {
            let lhs = f.mul(&g).unwrap().nabla();
            let rhs = f.nabla().mul(&g).unwrap().add(&f.mul(&g.nabla()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn conjugacy_of_operators(f in series_t(7), a in (1i64..5, 1i64..4)) {
            let a = qf(a.0, a.1);
            prop_assert_eq!(f.phi(3).to_x(), f.to_x().phi(3));
            prop_assert_eq!(f.gamma(&a).unwrap().to_x(), f.to_x().gamma(&a).unwrap());
            prop_assert_eq!(f.nabla().to_x(), f.to_x().nabla());
            prop_assert_eq!(f.phi(5).nabla(), f.nabla().phi(5));
            prop_assert_eq!(f.gamma(&a).unwrap().nabla(), f.nabla().gamma(&a).unwrap());
        }

        #[test]
        fn gamma_group_law(f in series_t(7), a in 1i64..6, b in 1i64..6) {
            let (a, b) = (qf(a, 2), qf(b, 3));
            let lhs = f.gamma(&b).unwrap().gamma(&a).unwrap();
            prop_assert_eq!(lhs, f.gamma(&(a * b)).unwrap());
            prop_assert_eq!(f.gamma(&one()).unwrap(), f);
        }

        #[test]
        fn psi_left_inverse_and_selection(f in series_x(5), p in prop::sample::select(vec![2u64, 3, 5])) {
            let n = 5 * p as usize;
            let f = TruncSeries::from_poly(f.coeffs(), n, Coord::X).unwrap();
            let phif = f.phi(p);
            prop_assert_eq!(phif.psi(p).unwrap(), f.truncate(5));
            for i in 1..p {
                let shift = TruncSeries::from_poly(
                    &(0..=i).map(|d| binomial(i, d)).collect::<Vec<_>>(), n, Coord::X).unwrap();
                prop_assert!(shift.mul(&phif).unwrap().psi(p).unwrap().is_zero());
            }
        }

        #[test]
        fn psi_agrees_with_binomial_oracle(f in series_x(9), p in prop::sample::select(vec![2u64, 3])) {
            let got = f.psi(p).unwrap();
            let want = psi_by_binomial_basis(&f, p);
            prop_assert_eq!(got.coeffs(), &want[..got.trunc()]);
        }

        #[test]
        fn psi_stable_under_padding(f in series_x(8)) {
            // computing at doubled truncation gives the same trusted degrees
            let wide = TruncSeries::from_poly(f.coeffs(), 16, Coord::X).unwrap();
            let a = f.psi(2).unwrap();
            let b = wide.psi(2).unwrap();
            prop_assert!(a.agrees_with(&b, a.trunc()));
        }
    }
}
