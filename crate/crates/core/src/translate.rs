//! `D ⊗ V_k` as a torsion module, its Casimir endomorphism and the
//! eigenspace analysis built on it.
//!
//! Two coordinate systems are in play. The naive space is `(D/t^N) ⊗ V_k`
//! with index `(a·N + j)·(k+1) + i` for `t^j v_a ⊗ e_i`; the `gl₂` matrices
//! live there. The module itself is free over `E[T]` on `v_a ⊗ e_i`
//! (basis index `i·r + a`) where `T = t⊗1 + 1⊗u⁺`, and
//! `t^j v ⊗ e_i = Σ_m C(j,m) (-1)^m T^(j-m) v ⊗ e_(i+m)`.
//! As `t^N (D ⊗ V_k) ⊆ T^(N-k)(D ⊗ V_k)`, naive data modulo `t^P` fixes module
//! data modulo `T^(P-k)`. The Casimir is exact modulo `t^(N-1)` on the naive
//! side, so everything is analysed at the usable precision `N - k - 1`.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::field::{binomial, fmt_q, one, q, qpow, zero, Q};
use crate::linalg::{Mat, Subspace, Vector};
use crate::pgmod::{unit, ModuleError, SplitVerdict, TorsionModule};
use crate::poly::QPoly;
use crate::polymat::PolyMat;
use crate::symk::SymPower;
use crate::ugl2::{Gl2Matrices, UEAElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("truncation {trunc} too small for k = {k}: need at least k + 3")]
    Precision { trunc: usize, k: usize },
    #[error("{what}: first difference at ({row}, {col}): {left} vs {right}")]
    Mismatch {
        what: String,
        row: usize,
        col: usize,
        left: String,
        right: String,
    },
    #[error("top eigenspace at {mu} is zero")]
    EmptyEigenspace { mu: String },
}

fn mismatch(what: &str, d: Option<(usize, usize, Q, Q)>) -> Result<(), TranslateError> {
    match d {
        None => Ok(()),
        Some((row, col, l, r)) => Err(TranslateError::Mismatch {
            what: what.into(),
            row,
            col,
            left: fmt_q(&l),
            right: fmt_q(&r),
        }),
    }
}

/// Operators on the naive space `(D/t^N) ⊗ V_k`.
#[derive(Clone, Debug)]
pub struct NaiveTensor {
    pub gl2: Gl2Matrices,
    pub nabla: Mat,
    pub phi: Option<Mat>,
    /// Rows whose `t`-degree on the `D` side is below `N - 2`.
    pub reliable_rows: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TranslatedModule {
    base: TorsionModule,
    k: usize,
    alpha: Q,
    naive: NaiveTensor,
    module: TorsionModule,
    casimir: PolyMat,
}

pub fn tensor_vk(d: &TorsionModule, k: usize) -> Result<TranslatedModule, TranslateError> {
    TranslatedModule::new(d, k)
}

impl TranslatedModule {
    pub fn new(d: &TorsionModule, k: usize) -> Result<Self, TranslateError> {
        let big_n = d.trunc();
        if big_n < k + 3 {
            return Err(TranslateError::Precision { trunc: big_n, k });
        }
        let alpha = d.alpha().clone();
        let g = d.attach_gl2(&alpha)?;
        let sym = SymPower::new(k);
        let gl2 = g.matrices.tensor(sym.gl2());
        let id_v = Mat::identity(k + 1);
        let id_d = Mat::identity(d.dim());
        let nabla = d.nabla_op().kron(&id_v).add(&id_d.kron(&sym.nabla()));
        let phi = d.phi_op().map(|p| p.kron(&sym.phi_matrix(d.prime())));
        let reliable_rows = (0..d.dim() * (k + 1))
            .filter(|r| (r / (k + 1)) % big_n + 2 < big_n)
            .collect();
        let naive = NaiveTensor {
            gl2,
            nabla,
            phi,
            reliable_rows,
        };
        let mut tm = TranslatedModule {
            base: d.clone(),
            k,
            alpha,
            naive,
            module: d.clone(),
            casimir: PolyMat::zeros(1, 1, 1),
        };
        let structural = tm.casimir_structural();
        let n = tm.precision();
        let r = d.rank();
        let big_r = r * (k + 1);
        let lift = |op: &Mat, trunc: usize| -> PolyMat {
            let cols: Vec<Vector> = (0..big_r)
                .map(|b| tm.to_module_coords(&op.column(tm.naive_index(b % r, 0, b / r)), trunc))
                .collect();
            PolyMat::from_vectors(&cols, big_r, trunc)
        };
        let nabla_t = lift(&tm.naive.nabla, n);
        let phi_t = tm.naive.phi.as_ref().map(|p| lift(p, n));
        let casimir = lift(&structural, n);
        let module = TorsionModule::new(
            nabla_t,
            phi_t,
            d.prime(),
            &tm.alpha + q(k as i64),
            format!("{} ⊗ V_{k}", d.label()),
        )?;
        tm.module = module;
        tm.casimir = casimir;
        Ok(tm)
    }

    pub fn base(&self) -> &TorsionModule {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &Q {
        &self.alpha
    }

    /// The translated module in `T`-coordinates, truncated at the usable precision.
    pub fn module(&self) -> &TorsionModule {
        &self.module
    }

    pub fn naive(&self) -> &NaiveTensor {
        &self.naive
    }

    /// Usable precision `N - k - 1`.
    pub fn precision(&self) -> usize {
        self.base.trunc() - self.k - 1
    }

    /// The Casimir as a `T`-linear matrix modulo `T^precision`.
    pub fn casimir(&self) -> &PolyMat {
        &self.casimir
    }

    pub fn casimir_op(&self) -> Mat {
        self.casimir.linear_op()
    }

    pub fn naive_dim(&self) -> usize {
        self.base.dim() * (self.k + 1)
    }

    pub fn naive_index(&self, a: usize, j: usize, i: usize) -> usize {
        self.base.index(a, j) * (self.k + 1) + i
    }

    /// Naive coordinates to `T`-coordinates modulo `T^trunc`.
    pub fn to_module_coords(&self, v: &[Q], trunc: usize) -> Vector {
        let big_n = self.base.trunc();
        let r = self.base.rank();
        let mut out = vec![zero(); r * (self.k + 1) * trunc];
        for (idx, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let i = idx % (self.k + 1);
            let d = idx / (self.k + 1);
            let (a, j) = (d / big_n, d % big_n);
            for m in 0..=j.min(self.k - i) {
                let deg = j - m;
                if deg >= trunc {
                    continue;
                }
                let sign = if m % 2 == 0 { one() } else { -one() };
                let b = (i + m) * r + a;
                out[b * trunc + deg] += c * binomial(j as u64, m as u64) * sign;
            }
        }
        out
    }

    /// The Casimir evaluated on the diagonal `gl₂` matrices.
    pub fn casimir_structural(&self) -> Mat {
        UEAElement::casimir()
            .evaluate(&self.naive.gl2)
            .expect("square matrices of one size")
    }

    /// The Casimir assembled component by component:
    /// `(c v)_i = (c_D + c_V) v_i + 4u⁻v_(i-1) + 4(i+1)(k-i)u⁺v_(i+1) + 2(2i-k)h v_i`
    /// with `v_(-1) = v_(k+1) = 0`.
    pub fn casimir_formula(&self) -> Mat {
        let g = self
            .base
            .attach_gl2(&self.alpha)
            .expect("checked at construction");
        let k = self.k;
        let kk = k as i64;
        let dd = self.base.dim();
        let scalar = &self.alpha * &self.alpha - one() + q(kk * (kk + 2));
        let apply = |v: &[Q]| -> Vector {
            let comp: Vec<Vector> = (0..=k)
                .map(|i| (0..dd).map(|x| v[x * (k + 1) + i].clone()).collect())
                .collect();
            let mut out = vec![zero(); dd * (k + 1)];
            for i in 0..=k {
                let ii = i as i64;
                let mut acc: Vector = comp[i].iter().map(|x| x * &scalar).collect();
                let h = g.matrices.h.mul_vec(&comp[i]);
                add_scaled(&mut acc, &h, &q(2 * (2 * ii - kk)));
                if i > 0 {
                    add_scaled(&mut acc, &g.matrices.u_minus.mul_vec(&comp[i - 1]), &q(4));
                }
                if i < k {
                    let up = g.matrices.u_plus.mul_vec(&comp[i + 1]);
                    add_scaled(&mut acc, &up, &q(4 * (ii + 1) * (kk - ii)));
                }
                for (x, val) in acc.into_iter().enumerate() {
                    out[x * (k + 1) + i] = val;
                }
            }
            out
        };
        let cols: Vec<Vector> = (0..self.naive_dim())
            .map(|c| apply(&unit(self.naive_dim(), c)))
            .collect();
        Mat::from_columns(self.naive_dim(), &cols)
    }

    /// Structural and formula Casimirs agree, and commute with `t` and `∇`,
    /// on the rows of `D`-degree below `N - 2`.
    pub fn check_casimir_routes(&self) -> Result<(), TranslateError> {
        let a = self.casimir_structural();
        let b = self.casimir_formula();
        let rows = &self.naive.reliable_rows;
        mismatch(
            "structural vs formula Casimir",
            a.first_difference(&b, rows),
        )?;
        let t = &self.naive.gl2.u_plus;
        mismatch("[c, t]", a.mul(t).first_difference(&t.mul(&a), rows))?;
        let nb = &self.naive.nabla;
        mismatch("[c, ∇]", a.mul(nb).first_difference(&nb.mul(&a), rows))
    }

    /// The `T`-linear Casimir commutes with `∇` and `φ` of the module.
    pub fn check_casimir_equivariance(&self) -> Result<(), TranslateError> {
        let c = &self.casimir;
        let nb = self.module.nabla_mat();
        let lhs = c.theta().add(&nb.mul(c)).sub(&c.mul(nb));
        let all: Vec<usize> = (0..lhs.rows()).collect();
        for j in 0..lhs.trunc() {
            let z = Mat::zeros(lhs.rows(), lhs.cols());
            mismatch("θC + NC - CN", lhs.coeff(j).first_difference(&z, &all))?;
        }
        if let Some(p) = self.module.phi_mat() {
            let pp = q(self.base.prime() as i64);
            let lhs = c.mul(p);
            let rhs = p.mul(&c.rescale_variable(&pp));
            for j in 0..lhs.trunc() {
                mismatch(
                    "CP vs P C(pT)",
                    lhs.coeff(j).first_difference(rhs.coeff(j), &all),
                )?;
            }
        }
        Ok(())
    }

    /// `Σ v_i ⊗ e_i ↦ v_0`, an `r × r(k+1)` matrix over `E[T]`.
    pub fn proj_0(&self) -> PolyMat {
        let r = self.base.rank();
        let big_r = r * (self.k + 1);
        let m = Mat::from_fn(r, big_r, |a, b| if a == b { one() } else { zero() });
        PolyMat::constant(&m, self.precision())
    }

    /// `v ↦ v ⊗ e_k`, from `t^k D`.
    pub fn inj_k(&self) -> PolyMat {
        let r = self.base.rank();
        let big_r = r * (self.k + 1);
        let off = self.k * r;
        let m = Mat::from_fn(big_r, r, |b, a| if b == off + a { one() } else { zero() });
        PolyMat::constant(&m, self.precision())
    }

    /// Whether `F: src → dst` intertwines `∇` (and `φ` where both have it).
    pub fn is_equivariant(f: &PolyMat, src: &TorsionModule, dst: &TorsionModule) -> bool {
        let lhs = f
            .theta()
            .add(&dst.nabla_mat().mul(f))
            .sub(&f.mul(src.nabla_mat()));
        if !lhs.is_zero() {
            return false;
        }
        match (src.phi_mat(), dst.phi_mat()) {
            (Some(ps), Some(pd)) => {
                let pp = q(src.prime() as i64);
                f.mul(ps) == pd.mul(&f.rescale_variable(&pp))
            }
            _ => true,
        }
    }

    /// `D` at the usable precision.
    pub fn base_truncated(&self) -> TorsionModule {
        self.base.truncate(self.precision())
    }

    /// `D ⊗ X^i V_k`, spanned by `v_a ⊗ e_l` for `l ≥ i`.
    pub fn filtration_piece(&self, i: usize) -> Subspace {
        let r = self.base.rank();
        let n = self.precision();
        let dim = self.module.dim();
        let vecs: Vec<Vector> = (i * r..r * (self.k + 1))
            .flat_map(|b| (0..n).map(move |j| b * n + j))
            .map(|x| unit(dim, x))
            .collect();
        Subspace::span(dim, &vecs)
    }

    /// The graded piece `F_i / F_(i+1)`, read off the diagonal block.
    pub fn graded_piece(&self, i: usize) -> Result<TorsionModule, TranslateError> {
        let r = self.base.rank();
        let block = |m: &PolyMat| {
            let coeffs = m
                .coeffs()
                .iter()
                .map(|c| Mat::from_fn(r, r, |x, y| c.get(i * r + x, i * r + y).clone()))
                .collect();
            PolyMat::from_coeffs(coeffs, r, r, m.trunc())
        };
        let nabla = block(self.module.nabla_mat());
        let phi = self.module.phi_mat().map(block);
        Ok(TorsionModule::new(
            nabla,
            phi,
            self.base.prime(),
            self.alpha.clone(),
            format!("gr_{i}"),
        )?)
    }

    /// Every filtration step is a submodule and its graded piece is `t^i D`.
    pub fn check_filtration(&self) -> Result<(), TranslateError> {
        let with_phi = self.module.phi_mat().is_some();
        for i in 0..=self.k {
            self.module
                .is_submodule(&self.filtration_piece(i), with_phi)?;
            let gr = self.graded_piece(i)?;
            let model = self.base_truncated().twist_by_t(i);
            if gr.nabla_mat() != model.nabla_mat() || gr.phi_mat() != model.phi_mat() {
                return Err(TranslateError::Module(ModuleError::Shape(format!(
                    "graded piece {i} differs from t^{i}D"
                ))));
            }
        }
        Ok(())
    }

    /// Candidate eigenvalues `(α + k - 2i)² - 1`, `i = 0..=k`.
    pub fn candidates(&self) -> Vec<Q> {
        (0..=self.k)
            .map(|i| {
                let x = &self.alpha + q(self.k as i64 - 2 * i as i64);
                &x * &x - one()
            })
            .collect()
    }

    /// `ker (c - μ)^m`.
    pub fn generalized_eigenspace(&self, mu: &Q, m: usize) -> Subspace {
        let c = self.casimir_op().shift_diag(mu);
        Subspace::kernel_of(&c.pow(m))
    }

    /// `ker (c - μ)^m` for `m = 1, 2, …` until the dimension stops growing.
    fn kernel_tower(&self, mu: &Q) -> (Vec<usize>, Subspace, Subspace) {
        let c = self.casimir_op().shift_diag(mu);
        let mut power = c.clone();
        let first = Subspace::kernel_of(&power);
        let mut dims = vec![first.dim()];
        let mut last = first.clone();
        loop {
            power = power.mul(&c);
            let next = Subspace::kernel_of(&power);
            if next.dim() == last.dim() {
                return (dims, first, last);
            }
            dims.push(next.dim());
            last = next;
        }
    }

    pub fn spectral_decomposition(&self) -> Result<SpectralReport, TranslateError> {
        let cands = self.candidates();
        let mut groups: Vec<(Q, Vec<usize>)> = Vec::new();
        for (i, mu) in cands.iter().enumerate() {
            match groups.iter_mut().find(|(m, _)| m == mu) {
                Some((_, idx)) => idx.push(i),
                None => groups.push((mu.clone(), vec![i])),
            }
        }
        groups.sort_by(|a, b| b.0.cmp(&a.0));
        let with_phi = self.module.phi_mat().is_some();
        let mut pieces = Vec::new();
        let mut total = Subspace::zero(self.module.dim());
        for (mu, indices) in groups {
            let (kernel_dims, eigen_kernel, space) = self.kernel_tower(&mu);
            total = total.sum(&space);
            let submodule = self.module.is_submodule(&space, with_phi).is_ok();
            let saturated = self.module.saturation_check(&space);
            let semisimple = kernel_dims.len() == 1;
            let expected_sen = indices
                .iter()
                .fold(QPoly::one(), |acc, &i| acc.mul(&self.weight_pair_poly(i)));
            let piece = if space.dim() == 0 {
                None
            } else {
                self.module.extract(&space).ok()
            };
            let sen = piece.as_ref().map(|(p, _)| p.sen_polynomial());
            let sen_divides = piece
                .as_ref()
                .is_some_and(|(p, _)| p.sen_containment(&expected_sen));
            let kernel = if semisimple || eigen_kernel.dim() == 0 {
                None
            } else {
                Some(self.analyse_kernel(&eigen_kernel, &space))
            };
            let mut report = EigenPiece {
                mu,
                indices,
                kernel_dims,
                eigen_kernel,
                space,
                submodule,
                sen,
                expected_sen,
                sen_divides,
                saturated,
                semisimple,
                kernel,
                tag: PieceTag::Unmatched,
            };
            if let Some((p, _)) = &piece {
                report.tag = self.tag_piece(&report, p);
            }
            pieces.push(report);
        }
        Ok(SpectralReport {
            label: self.base.label().to_string(),
            k: self.k,
            alpha: self.alpha.clone(),
            trunc: self.base.trunc(),
            precision: self.precision(),
            rank: self.module.rank(),
            residual: self.module.dim() - total.dim(),
            pieces,
        })
    }

    /// `(T - i)(T - (α + k - i))`
    fn weight_pair_poly(&self, i: usize) -> QPoly {
        let hi = &self.alpha + q(self.k as i64 - i as i64);
        QPoly::from_roots(&[q(i as i64), hi])
    }

    /// The eigen-kernel inside a non-semisimple generalized eigenspace. The
    /// kernel of `c - μ` picks up spurious vectors in the top `T`-degrees, so
    /// this drops degrees until the kernel is a free submodule.
    fn analyse_kernel(&self, kernel: &Subspace, space: &Subspace) -> KernelAnalysis {
        let n = self.precision();
        let mut m = n.saturating_sub(1).max(1);
        let (cut, kernel, nabla_only) = loop {
            let cut = self.module.truncate(m);
            let kern = self.module.project_subspace(kernel, m);
            let verdict = cut.is_module_split(&kern, false).ok();
            if verdict.is_some() || m == 1 {
                break (cut, kern, verdict);
            }
            m -= 1;
        };
        let space = self.module.project_subspace(space, m);
        let with_phi = cut.phi_mat().is_some();
        let verdict = |phi: bool| cut.is_module_split(&kernel, phi).ok();
        let full = if with_phi { verdict(true) } else { None };
        let projector = full.as_ref().or(nabla_only.as_ref()).and_then(|v| match v {
            SplitVerdict::Split { projector, .. } => Some(projector.clone()),
            SplitVerdict::NotSplit => None,
        });
        let (sub, quotient) = match cut.extract(&space) {
            Ok((piece, incl)) => {
                let inner = kernel.preimage(&incl.linear_op());
                (
                    piece.extract(&inner).ok().map(|x| x.0),
                    piece.quotient(&inner).ok(),
                )
            }
            Err(_) => (None, None),
        };
        let kernel_iso_quotient = match (&sub, &quotient) {
            (Some(a), Some(b)) => matches!(a.find_isomorphism(b, with_phi, 11), Ok(Some(_))),
            _ => false,
        };
        KernelAnalysis {
            precision: m,
            kernel: sub,
            quotient,
            kernel_iso_quotient,
            split_nabla_only: nabla_only.map(|v| v.is_split()),
            split_with_phi: full.map(|v| v.is_split()),
            projector,
        }
    }

    /// Cheap invariants first (rank, Sen polynomial), then a conjugation search.
    fn tag_piece(&self, rep: &EigenPiece, piece: &TorsionModule) -> PieceTag {
        let with_phi = piece.phi_mat().is_some();
        let base = self.base_truncated();
        let matches = |model: &TorsionModule| -> bool {
            model.rank() == piece.rank()
                && model.sen_polynomial() == piece.sen_polynomial()
                && matches!(piece.find_isomorphism(model, with_phi, 7), Ok(Some(_)))
        };
        if rep.kernel.as_ref().is_some_and(|k| k.is_self_extension()) {
            return PieceTag::SelfExtension;
        }
        if let [i] = rep.indices[..] {
            if let Some(model) = weight_model(&base, self.k, i) {
                if matches(&model) {
                    return PieceTag::WeightModel(i, &self.alpha + q((self.k - i) as i64));
                }
            }
            if matches(&base.twist_by_t(i)) {
                return PieceTag::Twist(i);
            }
        }
        if let [i, j] = rep.indices[..] {
            if let Ok(sum) = base.twist_by_t(i).direct_sum(&base.twist_by_t(j)) {
                if matches(&sum) {
                    return PieceTag::TwistSum(i, j);
                }
            }
        }
        PieceTag::Unmatched
    }

    /// `proj_0` of the top eigen-kernel `ker(c - ((α+k)² - 1))`, inside `D` at
    /// the usable precision.
    pub fn top_eigenspace_image(&self) -> Subspace {
        let mu = &self.candidates()[0];
        let kernel = self.generalized_eigenspace(mu, 1);
        kernel.map(&self.proj_0().linear_op())
    }
}

fn add_scaled(acc: &mut [Q], v: &[Q], s: &Q) {
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += x * s;
        }
    }
}

/// `D_(i, α+k-i)` for a module with constant diagonal `∇` and `φ`: weight-0
/// lines are multiplied by `t^i`, the others by `t^(k-i)`.
pub fn weight_model(d: &TorsionModule, k: usize, i: usize) -> Option<TorsionModule> {
    let nb = d.nabla_mat();
    let r = d.rank();
    let diag = |m: &Mat| (0..r).all(|x| (0..r).all(|y| x == y || m.get(x, y).is_zero()));
    if !nb.is_constant() || !diag(nb.coeff(0)) {
        return None;
    }
    let phi = match d.phi_mat() {
        Some(p) if p.is_constant() && diag(p.coeff(0)) => Some(p.coeff(0)),
        Some(_) => return None,
        None => None,
    };
    if (0..r).all(|a| nb.coeff(0).get(a, a).is_zero()) {
        return None;
    }
    let shift: Vec<usize> = (0..r)
        .map(|a| {
            if nb.coeff(0).get(a, a).is_zero() {
                i
            } else {
                k - i
            }
        })
        .collect();
    let pp = q(d.prime() as i64);
    let n = Mat::from_fn(r, r, |x, y| {
        if x == y {
            nb.coeff(0).get(x, x) + q(shift[x] as i64)
        } else {
            zero()
        }
    });
    let p = phi.map(|p| {
        let m = Mat::from_fn(r, r, |x, y| {
            if x == y {
                p.get(x, x) * qpow(&pp, shift[x] as i64)
            } else {
                zero()
            }
        });
        PolyMat::constant(&m, d.trunc())
    });
    TorsionModule::new(
        PolyMat::constant(&n, d.trunc()),
        p,
        d.prime(),
        d.alpha().clone(),
        format!("D_({i},{})", fmt_q(&(d.alpha() + q((k - i) as i64)))),
    )
    .ok()
}

/// The eigen-kernel `K` of a non-semisimple piece `G`, read modulo `T^precision`.
#[derive(Clone, Debug)]
pub struct KernelAnalysis {
    pub precision: usize,
    pub kernel: Option<TorsionModule>,
    /// `G / K`
    pub quotient: Option<TorsionModule>,
    pub kernel_iso_quotient: bool,
    /// Whether `K` is a direct summand, with `∇` only and with `∇` and `φ`.
    pub split_nabla_only: Option<bool>,
    pub split_with_phi: Option<bool>,
    pub projector: Option<Mat>,
}

impl KernelAnalysis {
    /// The strongest available splitting verdict.
    pub fn split(&self) -> Option<bool> {
        self.split_with_phi.or(self.split_nabla_only)
    }

    /// `K` is half of `G`, `K ≅ G/K`, and `K` is not a summand.
    pub fn is_self_extension(&self) -> bool {
        match (&self.kernel, &self.quotient) {
            (Some(k), Some(q)) => {
                k.rank() == q.rank() && self.kernel_iso_quotient && self.split() == Some(false)
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PieceTag {
    /// `≅ t^i D`
    Twist(usize),
    /// `≅ D_(i, w)`
    WeightModel(usize, Q),
    /// `≅ t^i D ⊕ t^j D`
    TwistSum(usize, usize),
    SelfExtension,
    Unmatched,
}

impl fmt::Display for PieceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let twist = |i: usize| match i {
            0 => "D".to_string(),
            1 => "tD".to_string(),
            _ => format!("t^{i}D"),
        };
        match self {
            PieceTag::Twist(i) => write!(f, "{}", twist(*i)),
            PieceTag::WeightModel(i, w) => write!(f, "D_({i},{})", fmt_q(w)),
            PieceTag::TwistSum(i, j) => write!(f, "{} + {}", twist(*i), twist(*j)),
            PieceTag::SelfExtension => write!(f, "self-extension"),
            PieceTag::Unmatched => write!(f, "unmatched"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPiece {
    pub mu: Q,
    /// Candidate indices `i` with `μ_i = μ`.
    pub indices: Vec<usize>,
    /// `dim ker (c - μ)^m` for `m = 1, …` up to the stable value.
    pub kernel_dims: Vec<usize>,
    pub eigen_kernel: Subspace,
    pub space: Subspace,
    pub submodule: bool,
    /// Characteristic polynomial of `∇` on `G/TG`.
    pub sen: Option<QPoly>,
    /// `Π (T - i)(T - (α+k-i))` over the candidate indices.
    pub expected_sen: QPoly,
    /// `expected_sen(∇) G ⊆ T G`.
    pub sen_divides: bool,
    pub saturated: bool,
    pub semisimple: bool,
    pub kernel: Option<KernelAnalysis>,
    pub tag: PieceTag,
}

impl EigenPiece {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub label: String,
    pub k: usize,
    pub alpha: Q,
    pub trunc: usize,
    pub precision: usize,
    pub rank: usize,
    /// Dimension not covered by any candidate eigenvalue.
    pub residual: usize,
    pub pieces: Vec<EigenPiece>,
}

impl SpectralReport {
    pub fn mus(&self) -> Vec<Q> {
        self.pieces
            .iter()
            .filter(|p| p.dim() > 0)
            .map(|p| p.mu.clone())
            .collect()
    }

    pub fn piece(&self, mu: &Q) -> Option<&EigenPiece> {
        self.pieces.iter().find(|p| &p.mu == mu)
    }
}

/// `{x ∈ D : ∇_i x ∈ t^i D for i = 1..k}` with `∇_i = (∇-i+1)…(∇-1)∇`.
pub fn nabla_condition_submodule(d: &TorsionModule, k: usize) -> Subspace {
    let nb = d.nabla_op();
    let mut acc = Subspace::full(d.dim());
    let mut falling = Mat::identity(d.dim());
    for i in 1..=k.min(d.trunc()) {
        falling = nb.shift_diag(&q(i as i64 - 1)).mul(&falling);
        acc = acc.intersect(&d.t_power_submodule(i).preimage(&falling));
    }
    acc
}

/// A partially defined `E`-linear map out of `D`, landing in `D` truncated
/// at `out_trunc`.
#[derive(Clone, Debug)]
pub struct PartialMap {
    pub domain: Subspace,
    pub map: Mat,
    pub out_trunc: usize,
}

/// `∂ = ∇/t` on `{x : ∇x ∈ tD}`, landing modulo `t^(N-1)`.
pub fn partial_operator(d: &TorsionModule) -> PartialMap {
    nabla_falling_over_t(d, 1)
}

/// `∇_k / t^k` on `{x : ∇_k x ∈ t^k D}`, landing modulo `t^(N-k)`.
pub fn nabla_falling_over_t(d: &TorsionModule, k: usize) -> PartialMap {
    let nb = d.nabla_op();
    let mut falling = Mat::identity(d.dim());
    for i in 1..=k {
        falling = nb.shift_diag(&q(i as i64 - 1)).mul(&falling);
    }
    let domain = d.t_power_submodule(k).preimage(&falling);
    PartialMap {
        domain,
        map: divide_rows(d, &falling, k),
        out_trunc: d.trunc() - k,
    }
}

/// Rows of `m` shifted down by `t^k`: the quotient by `t^k` of an image in `t^k D`.
fn divide_rows(d: &TorsionModule, m: &Mat, k: usize) -> Mat {
    let n = d.trunc();
    let out_n = n - k;
    Mat::from_fn(d.rank() * out_n, m.cols(), |r, c| {
        let (a, j) = (r / out_n, r % out_n);
        m.get(a * n + j + k, c).clone()
    })
}

/// `∂^k`: the `k`-fold composite of `∂`, each step on the module truncated
/// one degree further.
pub fn iterate_partial(d: &TorsionModule, k: usize) -> PartialMap {
    let mut current = PartialMap {
        domain: Subspace::full(d.dim()),
        map: Mat::identity(d.dim()),
        out_trunc: d.trunc(),
    };
    for _ in 0..k {
        let stage = d.truncate(current.out_trunc);
        let step = partial_operator(&stage);
        let domain = current
            .domain
            .intersect(&step.domain.preimage(&current.map));
        current = PartialMap {
            domain,
            map: step.map.mul(&current.map),
            out_trunc: step.out_trunc,
        };
    }
    current
}

/// Compare two partial maps on the intersection of their domains.
pub fn agree_on_common_domain(a: &PartialMap, b: &PartialMap) -> (Subspace, bool) {
    let common = a.domain.intersect(&b.domain);
    let n = a.out_trunc.min(b.out_trunc);
    let ok = common.basis().iter().all(|x| {
        let (ya, yb) = (a.map.mul_vec(x), b.map.mul_vec(x));
        let ra = ya.len() / a.out_trunc;
        (0..ra).all(|r| (0..n).all(|j| ya[r * a.out_trunc + j] == yb[r * b.out_trunc + j]))
    });
    (common, ok)
}

#[derive(Clone, Debug)]
pub struct JmathStep {
    /// Precision of the eigenspace module produced by this step.
    pub precision: usize,
    /// `dim ker (proj_0)` on the eigen-kernel.
    pub kernel_dim: usize,
    /// Whether that kernel lies in the top `T`-degree.
    pub confined: bool,
}

#[derive(Clone, Debug)]
pub struct JmathChain {
    pub steps: Vec<JmathStep>,
    /// The last eigenspace module.
    pub top: TorsionModule,
    /// Composite `top → D` modulo `t^precision`.
    pub composite: PolyMat,
    pub precision: usize,
    pub kernel: Subspace,
    /// Kernel of the composite lies in `T^(precision - k)`.
    pub confined: bool,
    /// Image of the composite in `D` modulo `t^precision`.
    pub image: Subspace,
}

/// Iterates `D^(i+1) = (D^(i) ⊗ V_1)[c = (α+i+1)² - 1]` and composes the
/// projections `j_1: D^(i+1) → D^(i)`.
pub fn jmath_chain(d: &TorsionModule, k: usize) -> Result<JmathChain, TranslateError> {
    let mut current = d.clone();
    let mut composite = PolyMat::identity(d.rank(), d.trunc());
    let mut steps = Vec::new();
    for i in 0..k {
        let alpha = d.alpha() + q(i as i64);
        let tm = tensor_vk(&current.clone().with_alpha(alpha.clone()), 1)?;
        let mu = &tm.candidates()[0];
        let kernel = tm.generalized_eigenspace(mu, 1);
        if kernel.dim() == 0 {
            return Err(TranslateError::EmptyEigenspace { mu: fmt_q(mu) });
        }
        // when two weights collide the kernel picks up top-degree vectors
        // that are not part of a free submodule; drop degrees until it is
        let mut n = tm.precision();
        let (sub, incl) = loop {
            let cut = tm.module().truncate(n);
            match cut.extract(&tm.module().project_subspace(&kernel, n)) {
                Ok(found) => break found,
                Err(ModuleError::NotFree { .. }) if n > 1 => n -= 1,
                Err(e) => return Err(e.into()),
            }
        };
        let j1 = tm.proj_0().truncate(n).mul(&incl);
        let ker = Subspace::kernel_of(&j1.linear_op());
        let top = sub.t_power_submodule(n - 1);
        steps.push(JmathStep {
            precision: n,
            kernel_dim: ker.dim(),
            confined: top.contains_space(&ker),
        });
        composite = composite.truncate(n).mul(&j1);
        current = sub.with_alpha(&alpha + one());
    }
    let n = composite.trunc();
    let op = composite.linear_op();
    let kernel = Subspace::kernel_of(&op);
    let confined = current
        .t_power_submodule(n.saturating_sub(k))
        .contains_space(&kernel);
    let image = Subspace::image_of(&op);
    Ok(JmathChain {
        steps,
        top: current,
        composite,
        precision: n,
        kernel,
        confined,
        image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::qf;
    use crate::pgmod::SenShape;

    fn diag(a: Q, n: usize) -> TorsionModule {
        TorsionModule::make_sen_model(&SenShape::Diagonal(a), n, 3).unwrap()
    }

    fn trivial(n: usize) -> TorsionModule {
        TorsionModule::make_rank_one(&zero(), &one(), n, 3)
    }

    #[test]
    fn k_zero_is_the_base() {
        let d = diag(qf(3, 2), 6);
        let tm = tensor_vk(&d, 0).unwrap();
        assert_eq!(tm.module().nabla_mat(), d.truncate(5).nabla_mat());
        assert_eq!(tm.proj_0(), PolyMat::identity(2, 5));
        let rep = tm.spectral_decomposition().unwrap();
        assert_eq!(rep.mus(), vec![qf(5, 4)]);
    }

    #[test]
    fn precision_is_checked() {
        assert!(matches!(
            tensor_vk(&diag(q(2), 4), 2),
            Err(TranslateError::Precision { trunc: 4, k: 2 })
        ));
        let bad = diag(qf(3, 2), 6).with_alpha(q(2));
        assert!(matches!(tensor_vk(&bad, 1), Err(TranslateError::Module(_))));
    }

    #[test]
    fn casimir_routes_and_filtration() {
        for k in 1..=2 {
            let tm = tensor_vk(&diag(qf(3, 2), 7), k).unwrap();
            tm.check_casimir_routes().unwrap();
            tm.check_casimir_equivariance().unwrap();
            tm.check_filtration().unwrap();
            assert!(TranslatedModule::is_equivariant(
                &tm.proj_0(),
                tm.module(),
                &tm.base_truncated()
            ));
            let tk = tm.base_truncated().twist_by_t(k);
            assert!(TranslatedModule::is_equivariant(
                &tm.inj_k(),
                &tk,
                tm.module()
            ));
            assert!(tm.proj_0().mul(&tm.inj_k()).is_zero());
        }
    }

    #[test]
    fn t_action_matches_naive() {
        let tm = tensor_vk(&diag(q(5), 6), 2).unwrap();
        let n = tm.precision();
        let t_mod = tm.module().t_op();
        for c in 0..tm.naive_dim() {
            let v = unit(tm.naive_dim(), c);
            let tv = tm.naive().gl2.u_plus.mul_vec(&v);
            assert_eq!(
                tm.to_module_coords(&tv, n),
                t_mod.mul_vec(&tm.to_module_coords(&v, n))
            );
        }
    }

    #[test]
    fn trivial_rank_one_eigenvalues() {
        let d = trivial(6).with_alpha(one());
        let tm = tensor_vk(&d, 1).unwrap();
        let cp = tm.casimir_op().char_poly();
        let n = tm.precision() as u64;
        let expected = QPoly::from_roots(&vec![q(3); n as usize])
            .mul(&QPoly::from_roots(&vec![q(-1); n as usize]));
        assert_eq!(cp, expected);
    }

    #[test]
    fn center_acts_by_shifted_alpha() {
        let tm = tensor_vk(&diag(qf(3, 2), 6), 2).unwrap();
        let z = UEAElement::z().evaluate(&tm.naive().gl2).unwrap();
        assert_eq!(z, Mat::scalar(tm.naive_dim(), &qf(5, 2)));
    }

    #[test]
    fn nabla_condition_small_cases() {
        let d = diag(qf(3, 2), 5);
        let s = nabla_condition_submodule(&d, 1);
        assert!(d.extract(&s).is_err());
        let (sub, _) = d.extract_at(&s, 4).unwrap();
        assert_eq!(sub.sen_polynomial(), QPoly::from_roots(&[zero(), qf(5, 2)]));
        let z = TorsionModule::make_sen_model(&SenShape::Zero, 5, 3).unwrap();
        assert_eq!(nabla_condition_submodule(&z, 3), Subspace::full(z.dim()));
    }

    #[test]
    fn partial_iterates() {
        let d = diag(q(5), 10);
        let (common, ok) =
            agree_on_common_domain(&iterate_partial(&d, 2), &nabla_falling_over_t(&d, 2));
        assert!(ok && common.dim() > 0);
        let z = TorsionModule::make_sen_model(&SenShape::Zero, 8, 3).unwrap();
        // the ∇-matrix vanishes, so ∂³ kills the horizontal vectors v_a
        let it = iterate_partial(&z, 3);
        for a in 0..2 {
            let v = unit(z.dim(), z.index(a, 0));
            assert!(it.domain.contains(&v));
            assert!(it.map.mul_vec(&v).iter().all(|c| c.is_zero()));
        }
        // rank one, weight 0: ∂(t·g) = g + t g'
        let r = trivial(6);
        let p = partial_operator(&r);
        let x = unit(6, 1);
        assert!(p.domain.contains(&x));
        assert_eq!(p.map.mul_vec(&x), unit(5, 0));
    }

    #[test]
    fn jmath_k_zero_and_one() {
        let d = diag(q(5), 8);
        let c0 = jmath_chain(&d, 0).unwrap();
        assert_eq!(c0.composite, PolyMat::identity(2, 8));
        let c1 = jmath_chain(&d, 1).unwrap();
        assert!(c1.steps[0].confined && c1.confined);
    }

    fn shapes(n: usize) -> Vec<TorsionModule> {
        vec![
            diag(qf(3, 2), n),
            TorsionModule::make_sen_model(&SenShape::Nilpotent, n, 3).unwrap(),
            TorsionModule::make_sen_model(&SenShape::Zero, n, 3).unwrap(),
            trivial(n),
        ]
    }

    #[test]
    fn partial_power_is_falling_factorial_over_t() {
        for d in shapes(9) {
            for k in 1..=3 {
                let iterated = iterate_partial(&d, k);
                let direct = nabla_falling_over_t(&d, k);
                assert!(direct.domain.contains_space(&iterated.domain));
                assert_eq!(iterated.out_trunc, direct.out_trunc);
                let (common, ok) = agree_on_common_domain(&iterated, &direct);
                assert!(ok, "{} k={k}", d.label());
                assert_eq!(common, iterated.domain);
            }
        }
        // weight 2 is killed by ∇_3 but ∂ leaves D after one step
        let d = diag(q(2), 9);
        assert!(iterate_partial(&d, 3).domain.dim() < nabla_falling_over_t(&d, 3).domain.dim());
    }

    #[test]
    fn jmath_chain_kernels_and_images() {
        for d in shapes(10) {
            for k in 2..=3 {
                let c = jmath_chain(&d, k).unwrap();
                assert!(
                    c.confined && c.steps.iter().all(|s| s.confined),
                    "{} k={k}",
                    d.label()
                );
                let cond = d.project_subspace(&nabla_condition_submodule(&d, k), c.precision);
                assert_eq!(c.image, cond, "{} k={k}", d.label());
            }
        }
    }
}
