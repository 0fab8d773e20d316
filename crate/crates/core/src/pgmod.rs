//! Torsion `(φ, Γ)`-modules: free modules of rank `r` over `E[t]/t^N` with a
//! regular singular `∇` and an optional `φ`, together with the submodule,
//! quotient, `Hom` and splitting machinery used by the decomposition code.
//!
//! Conventions. The module has a basis `v_0 … v_{r-1}`; `∇ v_a = Σ_b N_{ba}(t) v_b`
//! and `φ v_a = Σ_b P_{ba}(t) v_b`, with `∇(f v) = t f'(t) v + f ∇v` and
//! `φ(f v) = f(p t) φ(v)`. The underlying `E`-space has dimension `r·N` and
//! coordinate `a·N + j` stands for `t^j v_a`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{fmt_q, one, q, zero, Q};
use crate::linalg::{Mat, Subspace, Vector};
use crate::poly::QPoly;
use crate::polymat::PolyMat;
use crate::series::TruncSeries;
use crate::ugl2::Gl2Matrices;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("precision {got} too low, need at least {need}")]
    Precision { got: usize, need: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("∇ and φ do not commute: first difference at entry ({row}, {col}): {left} vs {right}")]
    NotCommuting {
        row: usize,
        col: usize,
        left: String,
        right: String,
    },
    #[error("∇(∇ - {alpha}) does not map into tD (column {column})")]
    NotDivisible { alpha: String, column: usize },
    #[error("not a submodule: {0}")]
    NotSubmodule(String),
    #[error(
        "submodule is not free: dimension {dim} is not a multiple of rank {rank} times {trunc}"
    )]
    NotFree {
        dim: usize,
        rank: usize,
        trunc: usize,
    },
    #[error("φ-matrix required")]
    MissingPhi,
}

/// Shape of a rank-two model with constant `∇`-matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SenShape {
    /// `diag(0, α)`
    Diagonal(Q),
    /// `[[0, 1], [0, 0]]`
    Nilpotent,
    /// `0`
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionModule {
    rank: usize,
    trunc: usize,
    prime: u64,
    nabla: PolyMat,
    phi: Option<PolyMat>,
    alpha: Q,
    label: String,
}

/// `gl₂` matrices on the underlying space of a module, valid modulo
/// `t^precision` (the division inside `u⁻` costs one degree).
#[derive(Clone, Debug)]
pub struct Gl2Structure {
    pub matrices: Gl2Matrices,
    pub alpha: Q,
    pub precision: usize,
}

#[derive(Clone, Debug)]
pub enum SplitVerdict {
    /// A `t`-linear retraction `M → S` commuting with the requested operators,
    /// and the matching idempotent of `M`.
    Split {
        retraction: PolyMat,
        projector: Mat,
    },
    NotSplit,
}

impl SplitVerdict {
    pub fn is_split(&self) -> bool {
        matches!(self, SplitVerdict::Split { .. })
    }
}

impl TorsionModule {
    pub fn new(
        nabla: PolyMat,
        phi: Option<PolyMat>,
        prime: u64,
        alpha: Q,
        label: impl Into<String>,
    ) -> Result<Self, ModuleError> {
        let rank = nabla.rows();
        if nabla.cols() != rank {
            return Err(ModuleError::Shape("∇-matrix must be square".into()));
        }
        let trunc = nabla.trunc();
        if let Some(p) = &phi {
            if p.rows() != rank || p.cols() != rank || p.trunc() != trunc {
                return Err(ModuleError::Shape(format!(
                    "φ-matrix is {}x{} mod t^{}, expected {rank}x{rank} mod t^{trunc}",
                    p.rows(),
                    p.cols(),
                    p.trunc()
                )));
            }
        }
        let m = TorsionModule {
            rank,
            trunc,
            prime,
            nabla,
            phi,
            alpha,
            label: label.into(),
        };
        m.check_commutation()?;
        Ok(m)
    }

    pub fn make_rank_one(w: &Q, phi_scalar: &Q, trunc: usize, prime: u64) -> Self {
        let nabla = PolyMat::constant(&Mat::scalar(1, w), trunc);
        let phi = PolyMat::constant(&Mat::scalar(1, phi_scalar), trunc);
        TorsionModule::new(
            nabla,
            Some(phi),
            prime,
            zero(),
            format!("rank1(w={})", fmt_q(w)),
        )
        .expect("rank one is always consistent")
    }

    /// Rank-two model with constant `∇`-matrix and `φ = 1`; `α` is set to the
    /// second weight for the diagonal shape and to 0 otherwise.
    pub fn make_sen_model(shape: &SenShape, trunc: usize, prime: u64) -> Result<Self, ModuleError> {
        if trunc < 2 {
            return Err(ModuleError::Precision {
                got: trunc,
                need: 2,
            });
        }
        let (n, alpha, label) = match shape {
            SenShape::Diagonal(a) => (
                Mat::from_rows(&[vec![zero(), zero()], vec![zero(), a.clone()]]),
                a.clone(),
                format!("diagonal(0,{})", fmt_q(a)),
            ),
            SenShape::Nilpotent => (
                Mat::from_i64(&[&[0, 1], &[0, 0]]),
                zero(),
                "nilpotent".into(),
            ),
            SenShape::Zero => (Mat::zeros(2, 2), zero(), "zero".into()),
        };
        TorsionModule::new(
            PolyMat::constant(&n, trunc),
            Some(PolyMat::identity(2, trunc)),
            prime,
            alpha,
            label,
        )
    }

    /// Extension of `quotient` by `sub`: `∇ = [[N_sub, C], [0, N_quot]]`,
    /// `φ = diag(P_sub, P_quot)` when both are present.
    pub fn make_extension(
        sub: &TorsionModule,
        quotient: &TorsionModule,
        cocycle: &PolyMat,
    ) -> Result<Self, ModuleError> {
        if sub.trunc != quotient.trunc || sub.prime != quotient.prime {
            return Err(ModuleError::Shape("truncation or prime differ".into()));
        }
        if cocycle.rows() != sub.rank || cocycle.cols() != quotient.rank {
            return Err(ModuleError::Shape("cocycle has wrong size".into()));
        }
        let n = sub.trunc;
        let r = sub.rank + quotient.rank;
        let mut nabla = sub.nabla.direct_sum(&quotient.nabla);
        let cocycle = PolyMat::from_coeffs(cocycle.coeffs().to_vec(), sub.rank, quotient.rank, n);
        for j in 0..n {
            let mut m = nabla.coeff(j).clone();
            for a in 0..sub.rank {
                for b in 0..quotient.rank {
                    m.set(a, sub.rank + b, cocycle.coeff(j).get(a, b).clone());
                }
            }
            nabla.set_coeff(j, m);
        }
        let phi = match (&sub.phi, &quotient.phi) {
            (Some(a), Some(b)) => Some(a.direct_sum(b)),
            _ => None,
        };
        debug_assert_eq!(nabla.rows(), r);
        TorsionModule::new(
            nabla,
            phi,
            sub.prime,
            sub.alpha.clone(),
            format!("ext({}, {})", sub.label, quotient.label),
        )
    }

    pub fn direct_sum(&self, other: &TorsionModule) -> Result<Self, ModuleError> {
        TorsionModule::make_extension(
            self,
            other,
            &PolyMat::zeros(self.rank, other.rank, self.trunc),
        )
        .map(|m| m.with_label(format!("{} + {}", self.label, other.label)))
    }

    /// Model of `t^i D`: `∇ + i`, `p^i φ`.
    pub fn twist_by_t(&self, i: usize) -> Self {
        let iq = q(i as i64);
        let scale = crate::field::qpow(&q(self.prime as i64), i as i64);
        TorsionModule {
            nabla: self.nabla.add_scalar(&iq),
            phi: self.phi.as_ref().map(|p| p.scale(&scale)),
            label: if i == 0 {
                self.label.clone()
            } else {
                format!("t^{i}·{}", self.label)
            },
            ..self.clone()
        }
    }

    pub fn with_alpha(mut self, alpha: Q) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_phi(self, phi: Option<PolyMat>) -> Result<Self, ModuleError> {
        TorsionModule::new(self.nabla, phi, self.prime, self.alpha, self.label)
    }

    pub fn truncate(&self, n: usize) -> Self {
        TorsionModule {
            trunc: n,
            nabla: self.nabla.truncate(n),
            phi: self.phi.as_ref().map(|p| p.truncate(n)),
            ..self.clone()
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn alpha(&self) -> &Q {
        &self.alpha
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nabla_mat(&self) -> &PolyMat {
        &self.nabla
    }

    pub fn phi_mat(&self) -> Option<&PolyMat> {
        self.phi.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.rank * self.trunc
    }

    /// Index of `t^j v_a` in the underlying space.
    pub fn index(&self, a: usize, j: usize) -> usize {
        a * self.trunc + j
    }

    /// Coordinates with `t`-degree below `n`.
    pub fn rows_below(&self, n: usize) -> Vec<usize> {
        (0..self.rank)
            .flat_map(|a| (0..n.min(self.trunc)).map(move |j| a * self.trunc + j))
            .collect()
    }

    /// `t^m M`.
    pub fn t_power_submodule(&self, m: usize) -> Subspace {
        let vecs: Vec<Vector> = (0..self.rank)
            .flat_map(|a| (m..self.trunc).map(move |j| (a, j)))
            .map(|(a, j)| unit(self.dim(), self.index(a, j)))
            .collect();
        Subspace::span(self.dim(), &vecs)
    }

    pub fn t_op(&self) -> Mat {
        let n = self.trunc;
        Mat::from_fn(self.dim(), self.dim(), |r, c| {
            if r / n == c / n && r % n == c % n + 1 {
                one()
            } else {
                zero()
            }
        })
    }

    pub fn nabla_op(&self) -> Mat {
        self.nabla.theta_free_op().add(&self.nabla.linear_op())
    }

    pub fn phi_op(&self) -> Option<Mat> {
        let p = q(self.prime as i64);
        self.phi.as_ref().map(|phi| {
            // φ(t^j v) = p^j t^j φ(v): the T-linear op after scaling column (a, j) by p^j
            let op = phi.linear_op();
            let n = self.trunc;
            Mat::from_fn(self.dim(), self.dim(), |r, c| {
                let v = op.get(r, c);
                if v == &zero() {
                    zero()
                } else {
                    v * crate::field::qpow(&p, (c % n) as i64)
                }
            })
        })
    }

    /// Multiplication by a series in `t`.
    pub fn scalar_op(&self, f: &TruncSeries) -> Mat {
        let coeffs: Vec<Mat> = (0..self.trunc)
            .map(|j| Mat::scalar(self.rank, &f.coeff(j)))
            .collect();
        PolyMat::from_coeffs(coeffs, self.rank, self.rank, self.trunc).linear_op()
    }

    fn check_commutation(&self) -> Result<(), ModuleError> {
        let Some(phi) = self.phi_op() else {
            return Ok(());
        };
        let nabla = self.nabla_op();
        let left = nabla.mul(&phi);
        let right = phi.mul(&nabla);
        let all: Vec<usize> = (0..self.dim()).collect();
        match left.first_difference(&right, &all) {
            None => Ok(()),
            Some((row, col, l, r)) => Err(ModuleError::NotCommuting {
                row,
                col,
                left: fmt_q(&l),
                right: fmt_q(&r),
            }),
        }
    }

    /// Characteristic polynomial of `∇` on `D/tD`.
    pub fn sen_polynomial(&self) -> QPoly {
        let p = self.nabla.coeff(0).char_poly();
        debug_assert!(self.sen_containment(&p));
        p
    }

    /// Whether `P(∇)(D) ⊆ tD`.
    pub fn sen_containment(&self, p: &QPoly) -> bool {
        let image = self.nabla_op().eval_poly(p);
        (0..self.rank).all(|a| (0..self.dim()).all(|c| image.get(self.index(a, 0), c) == &zero()))
    }

    /// `u⁺ = t`, `u⁻ = -∇(∇-α)/t`, `h = 2∇ - α + 1`, `z = α - 1`.
    pub fn attach_gl2(&self, alpha: &Q) -> Result<Gl2Structure, ModuleError> {
        if self.trunc < 2 {
            return Err(ModuleError::Precision {
                got: self.trunc,
                need: 2,
            });
        }
        let d = self.dim();
        let nabla = self.nabla_op();
        let quad = nabla.mul(&nabla.shift_diag(alpha));
        for c in 0..d {
            if (0..self.rank).any(|a| quad.get(self.index(a, 0), c) != &zero()) {
                return Err(ModuleError::NotDivisible {
                    alpha: fmt_q(alpha),
                    column: c,
                });
            }
        }
        let n = self.trunc;
        let u_minus = Mat::from_fn(d, d, |r, c| {
            let j = r % n;
            if j + 1 < n {
                -quad.get(r + 1, c).clone()
            } else {
                zero()
            }
        });
        let h = nabla.scale(&q(2)).add_scalar(&(one() - alpha));
        Ok(Gl2Structure {
            matrices: Gl2Matrices {
                u_minus,
                h,
                z: Mat::scalar(d, &(alpha - one())),
                u_plus: self.t_op(),
            },
            alpha: alpha.clone(),
            precision: n - 1,
        })
    }

    /// Whether `s` is stable under `t`, `∇` and (if asked and present) `φ`.
    pub fn is_submodule(&self, s: &Subspace, with_phi: bool) -> Result<(), ModuleError> {
        if s.ambient() != self.dim() {
            return Err(ModuleError::Shape("subspace lives in another space".into()));
        }
        if !s.is_stable_under(&self.t_op()) {
            return Err(ModuleError::NotSubmodule("not t-stable".into()));
        }
        if !s.is_stable_under(&self.nabla_op()) {
            return Err(ModuleError::NotSubmodule("not ∇-stable".into()));
        }
        if with_phi {
            let phi = self.phi_op().ok_or(ModuleError::MissingPhi)?;
            if !s.is_stable_under(&phi) {
                return Err(ModuleError::NotSubmodule("not φ-stable".into()));
            }
        }
        Ok(())
    }

    /// Smallest `t`- and `∇`-stable subspace containing `generators`.
    pub fn submodule_span(&self, generators: &[Vector]) -> Subspace {
        let ops = [self.t_op(), self.nabla_op()];
        let mut s = Subspace::span(self.dim(), generators);
        loop {
            let mut vecs = s.basis().to_vec();
            for op in &ops {
                vecs.extend(s.basis().iter().map(|v| op.mul_vec(v)));
            }
            let next = Subspace::span(self.dim(), &vecs);
            if next.dim() == s.dim() {
                return s;
            }
            s = next;
        }
    }

    /// `{x : t x ∈ S} = S + t^{N-1} M`, i.e. the quotient has no `t`-torsion
    /// except what the truncation itself forces.
    pub fn saturation_check(&self, s: &Subspace) -> bool {
        let pre = s.preimage(&self.t_op());
        pre == s.sum(&self.t_power_submodule(self.trunc - 1))
    }

    /// The submodule `S` as a module in its own right, with the inclusion
    /// `S → M` as an `r_M × s` matrix over `E[t]/t^N`.
    pub fn extract(&self, s: &Subspace) -> Result<(TorsionModule, PolyMat), ModuleError> {
        self.extract_at(s, self.trunc)
    }

    /// `S / t^m S` as a module of truncation `m`, with the inclusion into
    /// `M / t^m M`. Submodules such as `R v ⊕ tR w` lose degrees at the top of
    /// `M`, so they are only free after cutting back to some `m < N`.
    pub fn extract_at(
        &self,
        s: &Subspace,
        m: usize,
    ) -> Result<(TorsionModule, PolyMat), ModuleError> {
        if m == 0 || m > self.trunc {
            return Err(ModuleError::Precision { got: m, need: 1 });
        }
        let with_phi = self.phi.is_some() && self.is_submodule(s, true).is_ok();
        self.is_submodule(s, false)?;
        let n = self.trunc;
        let t = self.t_op();
        let ts = s.map(&t);
        let gens = s.complement_in(&ts);
        let rank = gens.len();
        let mut tm_s = s.clone();
        for _ in 0..m {
            tm_s = tm_s.map(&t);
        }
        if rank * m + tm_s.dim() != s.dim() {
            return Err(ModuleError::NotFree {
                dim: s.dim() - tm_s.dim(),
                rank,
                trunc: m,
            });
        }
        let mut cols = t_basis(&t, &gens, m).columns();
        cols.extend(tm_s.basis().iter().cloned());
        let basis = Mat::from_columns(self.dim(), &cols);
        let nabla_op = self.nabla_op();
        let mut rhs: Vec<Vector> = gens.iter().map(|g| nabla_op.mul_vec(g)).collect();
        let phi_op = if with_phi { self.phi_op() } else { None };
        if let Some(phi) = &phi_op {
            rhs.extend(gens.iter().map(|g| phi.mul_vec(g)));
        }
        let sol = basis
            .solve_many(&rhs)
            .ok_or_else(|| ModuleError::NotSubmodule("images leave the span".into()))?;
        let sol: Vec<Vector> = sol.into_iter().map(|v| v[..rank * m].to_vec()).collect();
        let nabla = PolyMat::from_vectors(&sol[..rank], rank, m);
        let phi = phi_op.map(|_| PolyMat::from_vectors(&sol[rank..], rank, m));
        let cut: Vec<Vector> = gens
            .iter()
            .map(|g| {
                (0..self.rank)
                    .flat_map(|a| (0..m).map(move |j| g[a * n + j].clone()))
                    .collect()
            })
            .collect();
        let inclusion = PolyMat::from_vectors(&cut, self.rank, m);
        let sub = TorsionModule::new(
            nabla,
            phi,
            self.prime,
            self.alpha.clone(),
            format!("sub({})", self.label),
        )?;
        Ok((sub, inclusion))
    }

    /// Image of `s` in `M / t^m M`, in the coordinates of `self.truncate(m)`.
    pub fn project_subspace(&self, s: &Subspace, m: usize) -> Subspace {
        let n = self.trunc;
        let vecs: Vec<Vector> = s
            .basis()
            .iter()
            .map(|v| {
                (0..self.rank)
                    .flat_map(|a| (0..m).map(move |j| v[a * n + j].clone()))
                    .collect()
            })
            .collect();
        Subspace::span(self.rank * m, &vecs)
    }

    /// `M/S` for a submodule with free quotient.
    pub fn quotient(&self, s: &Subspace) -> Result<TorsionModule, ModuleError> {
        let with_phi = self.phi.is_some() && self.is_submodule(s, true).is_ok();
        self.is_submodule(s, false)?;
        let n = self.trunc;
        let t = self.t_op();
        let full = Subspace::full(self.dim());
        let low = s.sum(&Subspace::image_of(&t));
        let gens = full.complement_in(&low);
        let rank = gens.len();
        if rank * n + s.dim() != self.dim() {
            return Err(ModuleError::NotFree {
                dim: self.dim() - s.dim(),
                rank,
                trunc: n,
            });
        }
        let qbasis = t_basis(&t, &gens, n);
        let mut cols = s.basis().to_vec();
        cols.extend(qbasis.columns());
        let basis = Mat::from_columns(self.dim(), &cols);
        let nabla_op = self.nabla_op();
        let mut rhs: Vec<Vector> = gens.iter().map(|g| nabla_op.mul_vec(g)).collect();
        let phi_op = if with_phi { self.phi_op() } else { None };
        if let Some(phi) = &phi_op {
            rhs.extend(gens.iter().map(|g| phi.mul_vec(g)));
        }
        let sol = basis.solve_many(&rhs).expect("columns form a basis of M");
        let skip = s.dim();
        let tail: Vec<Vector> = sol.iter().map(|v| v[skip..].to_vec()).collect();
        let nabla = PolyMat::from_vectors(&tail[..rank], rank, n);
        let phi = phi_op.map(|_| PolyMat::from_vectors(&tail[rank..], rank, n));
        TorsionModule::new(
            nabla,
            phi,
            self.prime,
            self.alpha.clone(),
            format!("quot({})", self.label),
        )
    }

    /// Basis of the `E`-space of `t`-linear maps `F: self → other` with
    /// `∇F = F∇` (and `φF = Fφ` if `with_phi`).
    pub fn hom_space(
        &self,
        other: &TorsionModule,
        with_phi: bool,
    ) -> Result<Vec<PolyMat>, ModuleError> {
        if self.trunc != other.trunc {
            return Err(ModuleError::Shape(format!(
                "truncations differ: {} vs {}",
                self.trunc, other.trunc
            )));
        }
        let (ra, rb, n) = (self.rank, other.rank, self.trunc);
        let phis = if with_phi {
            match (&self.phi, &other.phi) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => return Err(ModuleError::MissingPhi),
            }
        } else {
            None
        };
        let p = q(self.prime as i64);
        let unknowns = rb * ra * n;
        let mut cols = Vec::with_capacity(unknowns);
        for idx in 0..unknowns {
            let mut flat = vec![zero(); unknowns];
            flat[idx] = one();
            let f = PolyMat::unflatten(&flat, rb, ra, n);
            let mut res = f
                .theta()
                .add(&other.nabla.mul(&f))
                .sub(&f.mul(&self.nabla))
                .flatten();
            if let Some((pa, pb)) = phis {
                res.extend(f.mul(pa).sub(&pb.mul(&f.rescale_variable(&p))).flatten());
            }
            cols.push(res);
        }
        let system = Mat::from_columns(cols[0].len(), &cols);
        Ok(system
            .kernel()
            .iter()
            .map(|v| PolyMat::unflatten(v, rb, ra, n))
            .collect())
    }

    /// An isomorphism `self → other`, searched as a random element of the
    /// `Hom` space (seeded); `None` if no draw has invertible constant term.
    pub fn find_isomorphism(
        &self,
        other: &TorsionModule,
        with_phi: bool,
        seed: u64,
    ) -> Result<Option<PolyMat>, ModuleError> {
        if self.rank != other.rank || self.trunc != other.trunc {
            return Ok(None);
        }
        let basis = self.hom_space(other, with_phi)?;
        if basis.is_empty() {
            return Ok(None);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let mut f = PolyMat::zeros(self.rank, self.rank, self.trunc);
            for b in &basis {
                f = f.add(&b.scale(&q(rng.gen_range(-1000..=1000))));
            }
            if f.coeff(0).determinant() != zero() {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// Whether the submodule `s` is a direct summand: solves for a
    /// `t`-linear retraction onto `s` commuting with `∇` (and `φ`).
    pub fn is_module_split(
        &self,
        s: &Subspace,
        with_phi: bool,
    ) -> Result<SplitVerdict, ModuleError> {
        self.is_submodule(s, with_phi)?;
        let (sub, incl) = self.extract(s)?;
        let homs = self.hom_space(&sub, with_phi)?;
        let target = PolyMat::identity(sub.rank, self.trunc).flatten();
        if homs.is_empty() {
            return Ok(if target.iter().all(|x| x == &zero()) {
                SplitVerdict::Split {
                    retraction: PolyMat::zeros(sub.rank, self.rank, self.trunc),
                    projector: Mat::zeros(self.dim(), self.dim()),
                }
            } else {
                SplitVerdict::NotSplit
            });
        }
        let cols: Vec<Vector> = homs.iter().map(|f| f.mul(&incl).flatten()).collect();
        let system = Mat::from_columns(target.len(), &cols);
        match system.solve(&target) {
            None => Ok(SplitVerdict::NotSplit),
            Some(x) => {
                let mut r = PolyMat::zeros(sub.rank, self.rank, self.trunc);
                for (c, f) in x.iter().zip(&homs) {
                    r = r.add(&f.scale(c));
                }
                let projector = incl.mul(&r).linear_op();
                Ok(SplitVerdict::Split {
                    retraction: r,
                    projector,
                })
            }
        }
    }
}

impl Gl2Structure {
    pub fn casimir(&self) -> Mat {
        crate::ugl2::UEAElement::casimir()
            .evaluate(&self.matrices)
            .expect("square matrices of one size")
    }
}

pub(crate) fn unit(n: usize, i: usize) -> Vector {
    (0..n)
        .map(|r| if r == i { one() } else { zero() })
        .collect()
}

/// Columns `t^j g_l` at index `l·n + j`.
fn t_basis(t: &Mat, gens: &[Vector], n: usize) -> Mat {
    let mut cols = Vec::with_capacity(gens.len() * n);
    for g in gens {
        let mut v = g.clone();
        for _ in 0..n {
            cols.push(v.clone());
            v = t.mul_vec(&v);
        }
    }
    Mat::from_columns(t.rows(), &cols)
}

impl PolyMat {
    /// The `t·d/dt` part of `∇` on a free module: `t^j v_a ↦ j t^j v_a`.
    fn theta_free_op(&self) -> Mat {
        let n = self.trunc();
        let d = self.rows() * n;
        Mat::from_fn(d, d, |r, c| if r == c { q((r % n) as i64) } else { zero() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::qf;
    use crate::series::Coord;
    use proptest::prelude::*;

    fn sen(shape: SenShape, n: usize) -> TorsionModule {
        TorsionModule::make_sen_model(&shape, n, 3).unwrap()
    }

    fn rows_of(n: usize, below: usize) -> Vec<usize> {
        (0..2)
            .flat_map(|a| (0..below).map(move |j| a * n + j))
            .collect()
    }

    fn roots(m: &TorsionModule) -> Vec<Q> {
        m.sen_polynomial().rational_roots()
    }

    #[test]
    fn rank_one_models() {
        let d = TorsionModule::make_rank_one(&q(0), &q(1), 6, 2);
        // ∇ on f·v is the coefficient derivation
        let f = TruncSeries::parse("1 + 2*t + t^3", 6, Coord::T).unwrap();
        let v: Vector = f.coeffs().to_vec();
        assert_eq!(d.nabla_op().mul_vec(&v), f.nabla().coeffs().to_vec());
        let d5 = TorsionModule::make_rank_one(&q(5), &q(1), 6, 2);
        assert_eq!(d5.sen_polynomial(), QPoly::linear(&q(5)));
        assert_eq!(d.twist_by_t(3).sen_polynomial(), QPoly::linear(&q(3)));
    }

    #[test]
    fn sen_models() {
        let a = qf(3, 2);
        let d = sen(SenShape::Diagonal(a.clone()), 6);
        assert_eq!(d.sen_polynomial(), QPoly::from_roots(&[q(0), a.clone()]));
        assert_eq!(
            sen(SenShape::Nilpotent, 6).sen_polynomial(),
            QPoly::from_roots(&[q(0), q(0)])
        );
        assert_eq!(
            sen(SenShape::Zero, 6).sen_polynomial(),
            QPoly::from_roots(&[q(0), q(0)])
        );
        assert_eq!(roots(&d.twist_by_t(1)), vec![q(1), qf(5, 2)]);
        assert_eq!(d.twist_by_t(0), d);
        assert_eq!(
            d.twist_by_t(1).twist_by_t(1).nabla_mat(),
            d.twist_by_t(2).nabla_mat()
        );
        assert!(TorsionModule::make_sen_model(&SenShape::Zero, 1, 3).is_err());
    }

    #[test]
    fn gl2_attachment() {
        let d = sen(SenShape::Diagonal(q(5)), 6);
        let g = d.attach_gl2(&q(5)).unwrap();
        let rows = d.rows_below(g.precision);
        assert!(g
            .casimir()
            .first_difference(&Mat::scalar(d.dim(), &q(24)), &rows)
            .is_none());
        let rows = d.rows_below(g.precision - 1);
        let m = &g.matrices;
        let h_check = m.u_plus.commutator(&m.u_minus);
        assert!(h_check.first_difference(&m.h, &rows).is_none());
        for alpha in [q(0), qf(3, 2), q(-4)] {
            let z = sen(SenShape::Zero, 5).attach_gl2(&alpha).unwrap();
            let c = Mat::scalar(10, &(&alpha * &alpha - one()));
            assert!(z.casimir().first_difference(&c, &rows_of(5, 4)).is_none());
        }
        assert!(matches!(
            sen(SenShape::Diagonal(qf(3, 2)), 5).attach_gl2(&q(2)),
            Err(ModuleError::NotDivisible { .. })
        ));
        assert!(sen(SenShape::Nilpotent, 5).attach_gl2(&q(1)).is_err());
        assert!(sen(SenShape::Nilpotent, 5).attach_gl2(&q(0)).is_ok());
    }

    #[test]
    fn brackets_hold_below_boundary() {
        for shape in [
            SenShape::Diagonal(qf(3, 2)),
            SenShape::Nilpotent,
            SenShape::Zero,
        ] {
            let d = sen(shape, 7);
            let g = d.attach_gl2(d.alpha()).unwrap();
            let m = &g.matrices;
            let rows = d.rows_below(d.trunc() - 2);
            let two = q(2);
            let checks = [
                (m.u_plus.commutator(&m.u_minus), m.h.clone()),
                (m.h.commutator(&m.u_plus), m.u_plus.scale(&two)),
                (m.h.commutator(&m.u_minus), m.u_minus.scale(&-two.clone())),
                (m.z.commutator(&m.u_plus), Mat::zeros(d.dim(), d.dim())),
                (m.z.commutator(&m.u_minus), Mat::zeros(d.dim(), d.dim())),
            ];
            for (a, b) in checks {
                assert!(a.first_difference(&b, &rows).is_none());
            }
        }
    }

    #[test]
    fn extensions_and_splitting() {
        let triv = TorsionModule::make_rank_one(&q(0), &q(1), 6, 3);
        let sum = triv.direct_sum(&triv).unwrap();
        let first_line = sum.submodule_span(&[unit(sum.dim(), 0)]);
        assert!(sum.is_module_split(&first_line, true).unwrap().is_split());

        let cocycle = PolyMat::constant(&Mat::scalar(1, &one()), 6);
        let nil = TorsionModule::make_extension(&triv, &triv, &cocycle).unwrap();
        assert_eq!(nil.nabla_mat(), sen(SenShape::Nilpotent, 6).nabla_mat());
        let line = nil.submodule_span(&[unit(nil.dim(), 0)]);
        assert_eq!(line.dim(), 6);
        assert!(nil.saturation_check(&line));
        assert!(!nil.is_module_split(&line, false).unwrap().is_split());
        assert!(!nil.is_module_split(&line, true).unwrap().is_split());

        let zero_model = sen(SenShape::Zero, 6);
        let v = vec![q(1); 1]
            .into_iter()
            .chain(vec![zero(); 5])
            .chain(vec![q(2)])
            .chain(vec![zero(); 5])
            .collect::<Vec<_>>();
        let l = zero_model.submodule_span(&[v]);
        assert!(zero_model.is_module_split(&l, true).unwrap().is_split());
    }

    #[test]
    fn extension_with_t_cocycle() {
        // weights (0, 1): the cocycle t resonates with the weight gap, t² does not
        let p = 3;
        let w0 = TorsionModule::make_rank_one(&q(0), &q(1), 6, p);
        let w1 = TorsionModule::make_rank_one(&q(1), &q(p as i64), 6, p);
        let c = PolyMat::from_series(&[vec![TruncSeries::parse("t", 6, Coord::T).unwrap()]]);
        let ext = TorsionModule::make_extension(&w0, &w1, &c).unwrap();
        let line = ext.submodule_span(&[unit(ext.dim(), 0)]);
        assert!(!ext.is_module_split(&line, false).unwrap().is_split());
        let w1b = TorsionModule::make_rank_one(&q(1), &q((p * p) as i64), 6, p);
        let c2 = PolyMat::from_series(&[vec![TruncSeries::parse("t^2", 6, Coord::T).unwrap()]]);
        let ext2 = TorsionModule::make_extension(&w0, &w1b, &c2).unwrap();
        let line2 = ext2.submodule_span(&[unit(ext2.dim(), 0)]);
        assert!(ext2.is_module_split(&line2, true).unwrap().is_split());
        // φ-incompatible cocycle is rejected
        let bad =
            PolyMat::from_series(&[vec![TruncSeries::parse("t + t^2", 6, Coord::T).unwrap()]]);
        assert!(matches!(
            TorsionModule::make_extension(&w0, &w1, &bad),
            Err(ModuleError::NotCommuting { .. })
        ));
    }

    #[test]
    fn spans_and_saturation() {
        let d = TorsionModule::make_rank_one(&q(0), &q(1), 5, 2);
        let tv = d.submodule_span(&[unit(5, 1)]);
        assert_eq!(tv, d.t_power_submodule(1));
        assert!(!d.saturation_check(&tv));
        let all = d.submodule_span(&[unit(5, 0)]);
        assert_eq!(all.dim(), 5);
        assert!(d.saturation_check(&all));
    }

    #[test]
    fn extract_quotient_and_iso() {
        let a = qf(3, 2);
        let d = sen(SenShape::Diagonal(a.clone()), 6);
        let s = d.submodule_span(&[unit(d.dim(), d.index(1, 0))]);
        let (sub, incl) = d.extract(&s).unwrap();
        assert_eq!(sub.rank(), 1);
        assert_eq!(sub.sen_polynomial(), QPoly::linear(&a));
        assert_eq!(incl.rows(), 2);
        let quot = d.quotient(&s).unwrap();
        assert_eq!(quot.sen_polynomial(), QPoly::linear(&q(0)));
        let model = TorsionModule::make_rank_one(&a, &q(1), 6, 3);
        assert!(sub.find_isomorphism(&model, true, 1).unwrap().is_some());
        let wrong = TorsionModule::make_rank_one(&q(0), &q(1), 6, 3);
        assert!(sub.find_isomorphism(&wrong, false, 1).unwrap().is_none());
        // diagonal model is not isomorphic to the nilpotent one
        let nil = sen(SenShape::Nilpotent, 6);
        let zero_model = sen(SenShape::Zero, 6);
        assert!(nil
            .find_isomorphism(&zero_model, false, 3)
            .unwrap()
            .is_none());
        assert!(zero_model
            .find_isomorphism(&zero_model, true, 3)
            .unwrap()
            .is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn leibniz_rule(
            f in proptest::collection::vec(-5i64..=5, 6),
            v in proptest::collection::vec(-5i64..=5, 12),
            shape in 0usize..3
        ) {
            let shape = [SenShape::Diagonal(qf(3, 2)), SenShape::Nilpotent, SenShape::Zero][shape].clone();
            let d = sen(shape, 6);
            let f = TruncSeries::new(f.into_iter().map(q).collect(), Coord::T).unwrap();
            let v: Vector = v.into_iter().map(q).collect();
            let fv = d.scalar_op(&f).mul_vec(&v);
            let lhs = d.nabla_op().mul_vec(&fv);
            let rhs = crate::linalg::vec_add(
                &d.scalar_op(&f.nabla()).mul_vec(&v),
                &d.scalar_op(&f).mul_vec(&d.nabla_op().mul_vec(&v)),
            );
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn twist_shifts_sen_polynomial(i in 0usize..4, a in -6i64..6) {
            let d = sen(SenShape::Diagonal(qf(a, 2)), 4);
            let shifted = d.sen_polynomial().shift(&-q(i as i64));
            prop_assert_eq!(d.twist_by_t(i).sen_polynomial(), shifted.clone());
            prop_assert!(d.sen_containment(&d.sen_polynomial()));
        }
    }
}
