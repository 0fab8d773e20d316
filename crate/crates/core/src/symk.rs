//! `V_k = Sym^k` of the standard representation, in the basis `e_i = t^i e`
//! where `e` is a lowest weight vector and `t` acts as `u⁺`.
//!
//! With `x, y` the standard basis, `e_i = k!/(k-i)! · x^i y^(k-i)`.

use num_traits::Zero;
use thiserror::Error;

use crate::field::{binomial, factorial, one, q, qpow, zero, Q};
use crate::linalg::{Mat, Subspace, Vector};
use crate::series::TruncSeries;
use crate::ugl2::{GL2Elem, Gl2Matrices};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymError {
    #[error("vector of length {got} does not fit V_{k}")]
    Length { k: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPower {
    k: usize,
    gl2: Gl2Matrices,
    x_action: Mat,
}

impl SymPower {
    pub fn new(k: usize) -> Self {
        let n = k + 1;
        let u_plus = Mat::from_fn(n, n, |r, c| if r == c + 1 { one() } else { zero() });
        let u_minus = Mat::from_fn(n, n, |r, c| {
            if c == r + 1 {
                q((c * (k + 1 - c)) as i64)
            } else {
                zero()
            }
        });
        let h = Mat::from_fn(n, n, |r, c| {
            if r == c {
                q(2 * r as i64 - k as i64)
            } else {
                zero()
            }
        });
        let z = Mat::scalar(n, &q(k as i64));
        // X = exp(u⁺) - 1, a finite sum since u⁺ is nilpotent
        let mut x_action = Mat::zeros(n, n);
        let mut power = Mat::identity(n);
        for j in 1..=k {
            power = power.mul(&u_plus);
            x_action = x_action.add(&power.scale(&factorial(j as u64).recip()));
        }
        SymPower {
            k,
            gl2: Gl2Matrices {
                u_minus,
                h,
                z,
                u_plus,
            },
            x_action,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.k + 1
    }

    pub fn gl2(&self) -> &Gl2Matrices {
        &self.gl2
    }

    /// `t` acts as `u⁺`.
    pub fn t_action(&self) -> &Mat {
        &self.gl2.u_plus
    }

    pub fn x_action(&self) -> &Mat {
        &self.x_action
    }

    /// `∇ e_i = i e_i` (the `a⁺` part).
    pub fn nabla(&self) -> Mat {
        Mat::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                q(r as i64)
            } else {
                zero()
            }
        })
    }

    /// `φ = diag(p, 1)`: `e_i ↦ p^i e_i`.
    pub fn phi_matrix(&self, p: u64) -> Mat {
        self.gamma_matrix(&q(p as i64))
    }

    /// `γ_a = diag(a, 1)`: `e_i ↦ a^i e_i`.
    pub fn gamma_matrix(&self, a: &Q) -> Mat {
        Mat::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                qpow(a, r as i64)
            } else {
                zero()
            }
        })
    }

    pub fn phi_inverse(&self, p: u64, v: &[Q]) -> Result<Vector, SymError> {
        self.check(v)?;
        let inv = q(p as i64).recip();
        Ok(v.iter()
            .enumerate()
            .map(|(i, c)| c * qpow(&inv, i as i64))
            .collect())
    }

    /// Matrix of `g` on `V_k`, via `x ↦ a·x + c·y`, `y ↦ b·x + d·y`.
    pub fn group_matrix(&self, g: &GL2Elem) -> Mat {
        let k = self.k;
        let n = self.dim();
        let scale = |i: usize| factorial(k as u64) / factorial((k - i) as u64);
        let mut m = Mat::zeros(n, n);
        for col in 0..n {
            // (a x + c y)^col (b x + d y)^(k-col) expanded in x^r y^(k-r)
            let first = binom_expand(&g.a, &g.c, col);
            let second = binom_expand(&g.b, &g.d, k - col);
            for (r1, c1) in first.iter().enumerate() {
                if c1.is_zero() {
                    continue;
                }
                for (r2, c2) in second.iter().enumerate() {
                    let r = r1 + r2;
                    // x^r y^(k-r) = e_r / scale(r)
                    let v = c1 * c2 * scale(col) / scale(r);
                    m.add_at(r, col, &v);
                }
            }
        }
        m
    }

    pub fn group_action(&self, g: &GL2Elem, v: &[Q]) -> Result<Vector, SymError> {
        self.check(v)?;
        Ok(self.group_matrix(g).mul_vec(v))
    }

    /// `f ↦ f·e`, identifying `R⁺/X^(k+1)` with `V_k`.
    pub fn series_to_vector(&self, f: &TruncSeries) -> Vector {
        let ft = f.to_t();
        (0..self.dim()).map(|i| ft.coeff(i)).collect()
    }

    /// `X^i V_k`.
    pub fn filtration_piece(&self, i: usize) -> Subspace {
        let n = self.dim();
        let basis: Vec<Vector> = (i.min(n)..n)
            .map(|j| {
                (0..n)
                    .map(|r| if r == j { one() } else { zero() })
                    .collect()
            })
            .collect();
        Subspace::span(n, &basis)
    }

    fn check(&self, v: &[Q]) -> Result<(), SymError> {
        if v.len() != self.dim() {
            return Err(SymError::Length {
                k: self.k,
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// Coefficients of `x^r` in `(a x + c y)^n`, as `r = 0..=n`.
fn binom_expand(a: &Q, c: &Q, n: usize) -> Vec<Q> {
    (0..=n)
        .map(|r| binomial(n as u64, r as u64) * qpow(a, r as i64) * qpow(c, (n - r) as i64))
        .collect()
}
