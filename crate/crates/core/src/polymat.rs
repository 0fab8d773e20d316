//! Matrices over `E[T]/T^n`, stored as a list of constant coefficient
//! matrices `F = Σ_j T^j F_j`.

use num_traits::Zero;

use crate::field::{q, qpow, zero, Q};
use crate::linalg::Mat;
use crate::series::{Coord, TruncSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMat {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat>,
}

impl PolyMat {
    pub fn zeros(rows: usize, cols: usize, trunc: usize) -> Self {
        assert!(trunc > 0, "zero truncation");
        PolyMat {
            rows,
            cols,
            coeffs: vec![Mat::zeros(rows, cols); trunc],
        }
    }

    /// Constant matrix `m` read modulo `T^trunc`.
    pub fn constant(m: &Mat, trunc: usize) -> Self {
        let mut out = PolyMat::zeros(m.rows(), m.cols(), trunc);
        out.coeffs[0] = m.clone();
        out
    }

    pub fn identity(n: usize, trunc: usize) -> Self {
        PolyMat::constant(&Mat::identity(n), trunc)
    }

    /// From coefficient matrices; missing ones are zero, extra ones dropped.
    pub fn from_coeffs(mut coeffs: Vec<Mat>, rows: usize, cols: usize, trunc: usize) -> Self {
        coeffs.truncate(trunc);
        while coeffs.len() < trunc {
            coeffs.push(Mat::zeros(rows, cols));
        }
        PolyMat { rows, cols, coeffs }
    }

    /// From a matrix of series; the precision is the minimum of the entries.
    pub fn from_series(entries: &[Vec<TruncSeries>]) -> Self {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let trunc = entries
            .iter()
            .flatten()
            .map(|s| s.trunc())
            .min()
            .expect("nonempty matrix");
        let coeffs = (0..trunc)
            .map(|j| Mat::from_fn(rows, cols, |r, c| entries[r][c].coeff(j)))
            .collect();
        PolyMat { rows, cols, coeffs }
    }

    pub fn entry(&self, r: usize, c: usize) -> TruncSeries {
        TruncSeries::new(
            self.coeffs.iter().map(|m| m.get(r, c).clone()).collect(),
            Coord::T,
        )
        .expect("positive truncation")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, j: usize) -> &Mat {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[Mat] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, j: usize, m: Mat) {
        assert_eq!((m.rows(), m.cols()), (self.rows, self.cols));
        self.coeffs[j] = m;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|m| m.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|m| m.is_zero())
    }

    pub fn truncate(&self, n: usize) -> Self {
        assert!(
            n >= 1 && n <= self.trunc(),
            "cannot truncate {} to {n}",
            self.trunc()
        );
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    pub fn add(&self, other: &PolyMat) -> Self {
        let n = self.trunc().min(other.trunc());
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: (0..n)
                .map(|j| self.coeffs[j].add(&other.coeffs[j]))
                .collect(),
        }
    }

    pub fn sub(&self, other: &PolyMat) -> Self {
        let n = self.trunc().min(other.trunc());
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: (0..n)
                .map(|j| self.coeffs[j].sub(&other.coeffs[j]))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().map(|m| m.scale(s)).collect(),
        }
    }

    pub fn mul(&self, other: &PolyMat) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let n = self.trunc().min(other.trunc());
        let mut coeffs = vec![Mat::zeros(self.rows, other.cols); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        PolyMat {
            rows: self.rows,
            cols: other.cols,
            coeffs,
        }
    }

    /// `F(s·T)`
    pub fn rescale_variable(&self, s: &Q) -> Self {
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, m)| m.scale(&qpow(s, j as i64)))
                .collect(),
        }
    }

    /// `T·dF/dT`
    pub fn theta(&self) -> Self {
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, m)| m.scale(&q(j as i64)))
                .collect(),
        }
    }

    /// `F + s·I`
    pub fn add_scalar(&self, s: &Q) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].add_scalar(s);
        out
    }

    /// Block diagonal sum.
    pub fn direct_sum(&self, other: &PolyMat) -> Self {
        let n = self.trunc().min(other.trunc());
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        let coeffs = (0..n)
            .map(|j| {
                Mat::from_fn(r, c, |i, k| {
                    if i < self.rows && k < self.cols {
                        self.coeffs[j].get(i, k).clone()
                    } else if i >= self.rows && k >= self.cols {
                        other.coeffs[j].get(i - self.rows, k - self.cols).clone()
                    } else {
                        zero()
                    }
                })
            })
            .collect();
        PolyMat {
            rows: r,
            cols: c,
            coeffs,
        }
    }

    /// Inverse over `E[T]/T^n`; exists iff the constant term is invertible.
    pub fn inverse(&self) -> Option<Self> {
        let inv0 = self.coeffs[0].inverse()?;
        let n = self.trunc();
        let mut out: Vec<Mat> = vec![inv0.clone()];
        for k in 1..n {
            let mut acc = Mat::zeros(self.rows, self.cols);
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc = acc.add(&self.coeffs[j].mul(&out[k - j]));
                }
            }
            out.push(inv0.mul(&acc).scale(&-q(1)));
        }
        Some(PolyMat {
            rows: self.rows,
            cols: self.cols,
            coeffs: out,
        })
    }

    /// The `E`-linear map on `(E[T]/T^n)^cols → (E[T]/T^n)^rows`, with
    /// coordinate `a·n + j` standing for `T^j` times basis vector `a`.
    pub fn linear_op(&self) -> Mat {
        let n = self.trunc();
        let mut m = Mat::zeros(self.rows * n, self.cols * n);
        for a in 0..self.cols {
            for j in 0..n {
                for (l, coeff) in self.coeffs.iter().enumerate().take(n - j) {
                    for b in 0..self.rows {
                        let v = coeff.get(b, a);
                        if !v.is_zero() {
                            m.set(b * n + j + l, a * n + j, v.clone());
                        }
                    }
                }
            }
        }
        m
    }

    /// Columns of a vector of the underlying space read as polynomial entries.
    pub fn from_vectors(vectors: &[Vec<Q>], rows: usize, trunc: usize) -> Self {
        let cols = vectors.len();
        let coeffs = (0..trunc)
            .map(|j| Mat::from_fn(rows, cols, |b, a| vectors[a][b * trunc + j].clone()))
            .collect();
        PolyMat { rows, cols, coeffs }
    }

    /// Flattened coefficient list, for linear solving.
    pub fn flatten(&self) -> Vec<Q> {
        let mut out = Vec::with_capacity(self.rows * self.cols * self.trunc());
        for m in &self.coeffs {
            for r in 0..self.rows {
                for c in 0..self.cols {
                    out.push(m.get(r, c).clone());
                }
            }
        }
        out
    }

    pub fn unflatten(v: &[Q], rows: usize, cols: usize, trunc: usize) -> Self {
        assert_eq!(v.len(), rows * cols * trunc);
        let coeffs = (0..trunc)
            .map(|j| Mat::from_fn(rows, cols, |r, c| v[j * rows * cols + r * cols + c].clone()))
            .collect();
        PolyMat { rows, cols, coeffs }
    }
}
