//! Dense exact linear algebra over `Q`: matrices, row reduction, kernels,
//! affine solves, characteristic polynomials and subspace arithmetic.

use std::fmt;

use num_traits::Zero;

use crate::field::{fmt_q, one, q, zero, Q};
use crate::poly::QPoly;

pub type Vector = Vec<Q>;

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| fmt_q(self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, one());
        }
        m
    }

    pub fn scalar(n: usize, s: &Q) -> Self {
        Mat::identity(n).scale(s)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Mat::from_fn(r, c, |i, j| rows[i][j].clone())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Mat::from_fn(r, c, |i, j| q(rows[i][j]))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(ambient: usize, cols: &[Vector]) -> Self {
        Mat::from_fn(ambient, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Q {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: &Q) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> Vector {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn scale(&self, s: &Q) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self + s * I`
    pub fn add_scalar(&self, s: &Q) -> Mat {
        self.shift_diag(&-s.clone())
    }

    /// `self - s * I`
    pub fn shift_diag(&self, s: &Q) -> Mat {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = m.get(i, i) - s;
            m.set(i, i, v);
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vector {
        assert_eq!(self.cols, v.len(), "shape mismatch in product");
        (0..self.rows)
            .map(|i| {
                let mut acc = zero();
                for (k, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        let a = self.get(i, k);
                        if !a.is_zero() {
                            acc += a * x;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: usize) -> Mat {
        let mut acc = Mat::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn commutator(&self, other: &Mat) -> Mat {
        self.mul(other).sub(&other.mul(self))
    }

    /// Kronecker product `self ⊗ other` with index `i * other.rows + j`.
    pub fn kron(&self, other: &Mat) -> Mat {
        Mat::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            self.get(r / other.rows, c / other.cols) * other.get(r % other.rows, c % other.cols)
        })
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).fold(zero(), |acc, i| acc + self.get(i, i))
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m.get(row, col).recip();
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let pv = m.get(row, c).clone();
                    if !pv.is_zero() {
                        let v = m.get(r, c) - &f * pv;
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space.
    pub fn kernel(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![zero(); self.cols];
            v[free] = one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `self * x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows);
        let aug = Mat::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                b[r].clone()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red.get(i, self.cols).clone();
        }
        Some(x)
    }

    /// Solves `self · x_i = b_i` for every right-hand side with one
    /// elimination. `None` if any system is inconsistent; free variables are 0.
    pub fn solve_many(&self, rhs: &[Vector]) -> Option<Vec<Vector>> {
        let n = self.cols;
        let k = rhs.len();
        let aug = Mat::from_fn(self.rows, n + k, |r, c| {
            if c < n {
                self.get(r, c).clone()
            } else {
                rhs[c - n][r].clone()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= n) {
            return None;
        }
        let mut out = vec![vec![Q::zero(); n]; k];
        for (row, &p) in pivots.iter().enumerate() {
            for (i, sol) in out.iter_mut().enumerate() {
                sol[p] = red.get(row, n + i).clone();
            }
        }
        Some(out)
    }

    pub fn inverse(&self) -> Option<Mat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Mat::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self.get(r, c).clone()
            } else if c - n == r {
                one()
            } else {
                zero()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |r, c| red.get(r, c + n).clone()))
    }

    pub fn determinant(&self) -> Q {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = self.rows;
        let mut det = one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return zero();
            };
            if p != col {
                for c in 0..n {
                    m.data.swap(p * n + c, col * n + c);
                }
                det = -det;
            }
            let pv = m.get(col, col).clone();
            det *= &pv;
            for r in col + 1..n {
                let f = m.get(r, col) / &pv;
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c) - &f * m.get(col, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Monic characteristic polynomial `det(T·I - A)` (Faddeev–LeVerrier).
    pub fn char_poly(&self) -> QPoly {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![zero(); n + 1];
        coeffs[n] = one();
        let mut m = Mat::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&Mat::scalar(n, &coeffs[n + 1 - k]));
            let am = self.mul(&m);
            coeffs[n - k] = -am.trace() / q(k as i64);
        }
        QPoly::new(coeffs)
    }

    /// Evaluate a polynomial at this matrix.
    pub fn eval_poly(&self, p: &QPoly) -> Mat {
        let n = self.rows;
        p.coeffs().iter().rev().fold(Mat::zeros(n, n), |acc, c| {
            acc.mul(self).add(&Mat::scalar(n, c))
        })
    }

    /// Restrict rows to the given index set.
    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(idx.len(), self.cols, |r, c| self.get(idx[r], c).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), |r, c| self.get(r, idx[c]).clone())
    }

    /// First entry where the two matrices differ, restricted to the given rows.
    pub fn first_difference(&self, other: &Mat, rows: &[usize]) -> Option<(usize, usize, Q, Q)> {
        for &r in rows {
            for c in 0..self.cols {
                if self.get(r, c) != other.get(r, c) {
                    return Some((r, c, self.get(r, c).clone(), other.get(r, c).clone()));
                }
            }
        }
        None
    }
}

pub fn vec_is_zero(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn vec_sub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Q], s: &Q) -> Vector {
    a.iter().map(|x| x * s).collect()
}

/// A linear subspace of `Q^n`, kept as a reduced row echelon basis so that
/// equality of subspaces is equality of representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            rows: vec![],
            pivots: vec![],
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace::span(ambient, &Mat::identity(ambient).columns())
    }

    pub fn span(ambient: usize, vectors: &[Vector]) -> Self {
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        let m = Mat::from_rows(vectors);
        assert_eq!(m.cols(), ambient, "vector length mismatch");
        let (red, pivots) = m.rref();
        let rows = (0..pivots.len()).map(|i| red.row(i)).collect();
        Subspace {
            ambient,
            rows,
            pivots,
        }
    }

    pub fn kernel_of(m: &Mat) -> Self {
        Subspace::span(m.cols(), &m.kernel())
    }

    pub fn image_of(m: &Mat) -> Self {
        Subspace::span(m.rows(), &m.columns())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.rows
    }

    pub fn basis_matrix(&self) -> Mat {
        Mat::from_columns(self.ambient, &self.rows)
    }

    pub fn reduce(&self, v: &[Q]) -> Vector {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        vec_is_zero(&self.reduce(v))
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut all = self.rows.clone();
        all.extend(other.rows.iter().cloned());
        Subspace::span(self.ambient, &all)
    }

    /// Rows of a matrix whose kernel is exactly this subspace.
    pub fn equations(&self) -> Mat {
        if self.rows.is_empty() {
            return Mat::identity(self.ambient);
        }
        let m = Mat::from_rows(&self.rows);
        let ann = m.kernel();
        if ann.is_empty() {
            return Mat::zeros(0, self.ambient);
        }
        Mat::from_rows(&ann)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        if self.rows.is_empty() || other.rows.is_empty() {
            return Subspace::zero(self.ambient);
        }
        let eq = other.equations();
        if eq.rows() == 0 {
            return self.clone();
        }
        let b = self.basis_matrix();
        let combos = eq.mul(&b).kernel();
        let vecs: Vec<Vector> = combos.iter().map(|c| b.mul_vec(c)).collect();
        Subspace::span(self.ambient, &vecs)
    }

    /// Image under a linear map.
    pub fn map(&self, m: &Mat) -> Subspace {
        let vecs: Vec<Vector> = self.rows.iter().map(|v| m.mul_vec(v)).collect();
        Subspace::span(m.rows(), &vecs)
    }

    /// `{x : m x ∈ self}`
    pub fn preimage(&self, m: &Mat) -> Subspace {
        let eq = self.equations();
        if eq.rows() == 0 {
            return Subspace::full(m.cols());
        }
        Subspace::kernel_of(&eq.mul(m))
    }

    pub fn is_stable_under(&self, m: &Mat) -> bool {
        self.rows.iter().all(|v| self.contains(&m.mul_vec(v)))
    }

    /// Vectors of `self` completing a basis of `sub` (a subspace of `self`)
    /// to a basis of `self`.
    pub fn complement_in(&self, sub: &Subspace) -> Vec<Vector> {
        // incremental echelon basis: (pivot column, row with 1 at pivot)
        let mut echelon: Vec<(usize, Vector)> = sub
            .rows
            .iter()
            .cloned()
            .zip(sub.pivots.iter().copied())
            .map(|(r, p)| (p, r))
            .collect();
        let mut out = Vec::new();
        for v in &self.rows {
            let mut w = v.clone();
            for (p, row) in &echelon {
                if w[*p].is_zero() {
                    continue;
                }
                let f = w[*p].clone();
                for (x, y) in w.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
            if let Some(p) = w.iter().position(|x| !x.is_zero()) {
                let inv = w[p].recip();
                let w: Vector = w.iter().map(|x| x * &inv).collect();
                echelon.push((p, w));
                out.push(v.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::qf;

    #[test]
    fn kernel_and_rank() {
        let m = Mat::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(vec_is_zero(&m.mul_vec(&k[0])));
    }

    #[test]
    fn inverse_and_det() {
        let m = Mat::from_i64(&[&[2, 1], &[7, 4]]);
        assert_eq!(m.determinant(), q(1));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(2));
        assert!(Mat::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn char_poly_matches_roots() {
        let m = Mat::from_i64(&[&[2, 1, 0], &[0, 2, 0], &[0, 0, -1]]);
        let p = m.char_poly();
        assert_eq!(p, QPoly::from_roots(&[q(2), q(2), q(-1)]));
        assert!(m.eval_poly(&p).is_zero());
    }

    #[test]
    fn solve_affine() {
        let m = Mat::from_i64(&[&[1, 1], &[1, -1]]);
        let x = m.solve(&[q(3), q(1)]).unwrap();
        assert_eq!(x, vec![q(2), q(1)]);
        let s = Mat::from_i64(&[&[1, 1], &[2, 2]]);
        assert!(s.solve(&[q(1), q(3)]).is_none());
    }

    #[test]
    fn subspace_ops() {
        let a = Subspace::span(3, &[vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]);
        let b = Subspace::span(3, &[vec![q(0), q(1), q(1)], vec![q(0), q(0), q(1)]]);
        let i = a.intersect(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[q(0), qf(5, 2), q(0)]));
        assert_eq!(a.sum(&b).dim(), 3);
        let shift = Mat::from_i64(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]);
        let pre = Subspace::span(3, &[vec![q(0), q(0), q(1)]]).preimage(&shift);
        assert_eq!(pre.dim(), 2);
        assert!(pre.contains(&[q(0), q(1), q(0)]));
        assert_eq!(a.complement_in(&Subspace::zero(3)).len(), 2);
    }
}
