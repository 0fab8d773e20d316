//! The enveloping algebra of gl₂ in PBW normal form.
//!
//! Generators: `u⁺ = E₁₂`, `u⁻ = E₂₁`, `h = diag(1,-1)`, `z = I`, with
//! `a± = (z ± h)/2`. Elements are always stored normalized as combinations of
//! ordered monomials `u⁻^i h^j z^m u⁺^l`. Multiplication is implemented by
//! right-multiplying a normalized element by one generator at a time.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::expr::{self, ExprAlgebra, ParseError};
use crate::field::{binomial, fmt_q, one, q, qf, qpow, zero, Q};
use crate::linalg::Mat;

/// Exponents `(i, j, m, l)` of `u⁻^i h^j z^m u⁺^l`.
pub type Monomial = (u32, u32, u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    UMinus,
    H,
    Z,
    UPlus,
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct UEAElement {
    terms: BTreeMap<Monomial, Q>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UeaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("matrix dimensions do not agree: {0}")]
    DimensionMismatch(String),
    #[error("singular matrix (determinant zero)")]
    Singular,
}

impl UEAElement {
    pub fn zero() -> Self {
        UEAElement::default()
    }

    pub fn scalar(c: Q) -> Self {
        UEAElement::monomial((0, 0, 0, 0), c)
    }

    pub fn one() -> Self {
        UEAElement::scalar(one())
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let mut e = UEAElement::zero();
        e.add_term(m, c);
        e
    }

    pub fn gen(g: Gen) -> Self {
        UEAElement::one().mul_gen(g)
    }

    pub fn u_plus() -> Self {
        UEAElement::gen(Gen::UPlus)
    }

    pub fn u_minus() -> Self {
        UEAElement::gen(Gen::UMinus)
    }

    pub fn h() -> Self {
        UEAElement::gen(Gen::H)
    }

    pub fn z() -> Self {
        UEAElement::gen(Gen::Z)
    }

    /// `a⁺ = (z + h)/2`
    pub fn a_plus() -> Self {
        UEAElement::z().add(&UEAElement::h()).scale(&qf(1, 2))
    }

    /// `a⁻ = (z - h)/2`
    pub fn a_minus() -> Self {
        UEAElement::z().sub(&UEAElement::h()).scale(&qf(1, 2))
    }

    /// `c = h² - 2h + 4u⁺u⁻`
    pub fn casimir() -> Self {
        let h = UEAElement::h();
        h.mul(&h).sub(&h.scale(&q(2))).add(
            &UEAElement::u_plus()
                .mul(&UEAElement::u_minus())
                .scale(&q(4)),
        )
    }

    /// Product of a word of generators, left to right.
    pub fn from_word(word: &[Gen]) -> Self {
        word.iter()
            .fold(UEAElement::one(), |acc, g| acc.mul_gen(*g))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: Monomial) -> Q {
        self.terms.get(&m).cloned().unwrap_or_else(zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_scalar(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(zero()),
            1 => self.terms.get(&(0, 0, 0, 0)).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// Stored elements are already normal; this is the identity and exists
    /// so callers can state normalization explicitly.
    pub fn normal_form(&self) -> Self {
        self.clone()
    }

    pub fn add(&self, other: &UEAElement) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &UEAElement) -> Self {
        self.add(&other.scale(&-one()))
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return UEAElement::zero();
        }
        UEAElement {
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    /// Right multiplication by one generator.
    pub fn mul_gen(&self, g: Gen) -> Self {
        let mut out = UEAElement::zero();
        for (&(i, j, m, l), c) in &self.terms {
            match g {
                Gen::UPlus => out.add_term((i, j, m, l + 1), c.clone()),
                Gen::Z => out.add_term((i, j, m + 1, l), c.clone()),
                Gen::H => {
                    // u⁺^l h = (h - 2l) u⁺^l
                    out.add_term((i, j + 1, m, l), c.clone());
                    out.add_term((i, j, m, l), c * q(-2 * l as i64));
                }
                Gen::UMinus => {
                    // h^j u⁻ = u⁻ (h - 2)^j
                    for s in 0..=j {
                        let coef = binomial(j as u64, s as u64) * qpow(&q(-2), (j - s) as i64);
                        out.add_term((i + 1, s, m, l), c * coef);
                    }
                    // u⁺^l u⁻ = u⁻ u⁺^l + l (h - l + 1) u⁺^{l-1}
                    if l > 0 {
                        let lq = q(l as i64);
                        out.add_term((i, j + 1, m, l - 1), c * &lq);
                        out.add_term((i, j, m, l - 1), c * &lq * q(1 - l as i64));
                    }
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &UEAElement) -> Self {
        let mut out = UEAElement::zero();
        for (&(i, j, m, l), c) in &other.terms {
            let mut acc = self.scale(c);
            for _ in 0..i {
                acc = acc.mul_gen(Gen::UMinus);
            }
            for _ in 0..j {
                acc = acc.mul_gen(Gen::H);
            }
            for _ in 0..m {
                acc = acc.mul_gen(Gen::Z);
            }
            for _ in 0..l {
                acc = acc.mul_gen(Gen::UPlus);
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(UEAElement::one(), |acc, _| acc.mul(self))
    }

    pub fn commutator(&self, other: &UEAElement) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Image in `U/(z - ζ, c - μ)`: `z ↦ ζ`, then mixed monomials are
    /// rewritten with `u⁻u⁺ = (μ - h² - 2h)/4` until none has both a `u⁻`
    /// and a `u⁺` factor.
    pub fn reduce_central(&self, zeta: &Q, mu: &Q) -> Self {
        let mut out = UEAElement::zero();
        let mut work: Vec<(Monomial, Q)> = self
            .terms
            .iter()
            .map(|(&(i, j, m, l), c)| ((i, j, 0, l), c * qpow(zeta, m as i64)))
            .collect();
        // (μ - h² - 2h)/4 as coefficients in h
        let quarter = qf(1, 4);
        let base = [mu * &quarter, qf(-1, 2), -quarter.clone()];
        while let Some(((i, j, _, l), c)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            if i == 0 || l == 0 {
                out.add_term((i, j, 0, l), c);
                continue;
            }
            // u⁻ h^j u⁺ = (h + 2)^j u⁻u⁺
            for s in 0..=j {
                let shift = binomial(j as u64, s as u64) * qpow(&q(2), (j - s) as i64);
                for (d, b) in base.iter().enumerate() {
                    work.push(((i - 1, s + d as u32, 0, l - 1), &c * &shift * b));
                }
            }
        }
        out
    }

    /// `Ad_g`, extended multiplicatively from the generators.
    pub fn adjoint(&self, g: &GL2Elem) -> Self {
        let images = [
            g.adjoint_gen(Gen::UMinus),
            g.adjoint_gen(Gen::H),
            g.adjoint_gen(Gen::Z),
            g.adjoint_gen(Gen::UPlus),
        ];
        let mut out = UEAElement::zero();
        for (&(i, j, m, l), c) in &self.terms {
            let mut acc = UEAElement::scalar(c.clone());
            for (img, e) in images.iter().zip([i, j, m, l]) {
                for _ in 0..e {
                    acc = acc.mul(img);
                }
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self, UeaError> {
        Ok(expr::parse(&UeaAlgebra, s)?)
    }

    /// Evaluate on a module given by generator matrices.
    pub fn evaluate(&self, module: &Gl2Matrices) -> Result<Mat, UeaError> {
        module.check_dims()?;
        let n = module.dim();
        let mut cache: BTreeMap<(usize, u32), Mat> = BTreeMap::new();
        let mut power = |which: usize, e: u32| -> Mat {
            cache
                .entry((which, e))
                .or_insert_with(|| module.by_index(which).pow(e as usize))
                .clone()
        };
        let mut out = Mat::zeros(n, n);
        for (&(i, j, m, l), c) in &self.terms {
            let prod = power(0, i)
                .mul(&power(1, j))
                .mul(&power(2, m))
                .mul(&power(3, l));
            out = out.add(&prod.scale(c));
        }
        Ok(out)
    }
}

struct UeaAlgebra;

impl ExprAlgebra for UeaAlgebra {
    type Elem = UEAElement;

    fn constant(&self, c: Q) -> UEAElement {
        UEAElement::scalar(c)
    }

    fn atom(&self, name: &str) -> Option<UEAElement> {
        Some(match name {
            "u+" => UEAElement::u_plus(),
            "u-" => UEAElement::u_minus(),
            "h" => UEAElement::h(),
            "z" => UEAElement::z(),
            "a+" => UEAElement::a_plus(),
            "a-" => UEAElement::a_minus(),
            "c" => UEAElement::casimir(),
            _ => return None,
        })
    }

    fn signed_ident(&self, name: &str) -> bool {
        name == "u" || name == "a"
    }

    fn add(&self, a: &UEAElement, b: &UEAElement) -> UEAElement {
        a.add(b)
    }

    fn mul(&self, a: &UEAElement, b: &UEAElement) -> UEAElement {
        a.mul(b)
    }

    fn scale(&self, a: &UEAElement, s: &Q) -> UEAElement {
        a.scale(s)
    }

    fn as_scalar(&self, a: &UEAElement) -> Option<Q> {
        a.as_scalar()
    }
}

fn fmt_monomial(&(i, j, m, l): &Monomial) -> String {
    let mut parts = Vec::new();
    for (name, e) in [("u-", i), ("h", j), ("z", m), ("u+", l)] {
        match e {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for UEAElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da = a.0 + a.1 + a.2 + a.3;
            let db = b.0 + b.1 + b.2 + b.3;
            db.cmp(&da).then(b.cmp(a))
        });
        for (n, key) in keys.into_iter().enumerate() {
            let c = &self.terms[key];
            let neg = c < &zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            let mono = fmt_monomial(key);
            let body = if mono.is_empty() {
                fmt_q(&mag)
            } else if mag.is_one() {
                mono
            } else {
                format!("{}*{mono}", fmt_q(&mag))
            };
            match (n, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for UEAElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UEAElement({self})")
    }
}

/// An invertible 2×2 rational matrix `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GL2Elem {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
}

impl GL2Elem {
    pub fn new(a: Q, b: Q, c: Q, d: Q) -> Result<Self, UeaError> {
        let g = GL2Elem { a, b, c, d };
        if g.det().is_zero() {
            return Err(UeaError::Singular);
        }
        Ok(g)
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self, UeaError> {
        GL2Elem::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        GL2Elem::from_i64(1, 0, 0, 1).expect("invertible")
    }

    pub fn det(&self) -> Q {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn matrix(&self) -> Mat {
        Mat::from_rows(&[
            vec![self.a.clone(), self.b.clone()],
            vec![self.c.clone(), self.d.clone()],
        ])
    }

    pub fn mul(&self, other: &GL2Elem) -> GL2Elem {
        let m = self.matrix().mul(&other.matrix());
        GL2Elem::new(
            m.get(0, 0).clone(),
            m.get(0, 1).clone(),
            m.get(1, 0).clone(),
            m.get(1, 1).clone(),
        )
        .expect("product of invertibles")
    }

    /// Random element with entries `n/d`, `|n| ≤ 7`, `1 ≤ d ≤ 3`.
    pub fn random<R: Rng>(rng: &mut R) -> GL2Elem {
        let entry = |rng: &mut R| qf(rng.gen_range(-7..=7), rng.gen_range(1..=3));
        loop {
            let (a, b, c, d) = (entry(rng), entry(rng), entry(rng), entry(rng));
            if let Ok(g) = GL2Elem::new(a, b, c, d) {
                return g;
            }
        }
    }

    /// `Ad_g` of a generator: conjugate its matrix and read off the
    /// combination `q u⁺ + r u⁻ + (p-s)/2 h + (p+s)/2 z` of `[[p,q],[r,s]]`.
    pub fn adjoint_gen(&self, g: Gen) -> UEAElement {
        let m = gen_matrix(g);
        let gm = self.matrix();
        let inv = gm.inverse().expect("invertible");
        let conj = gm.mul(&m).mul(&inv);
        matrix_to_element(&conj)
    }
}

pub fn gen_matrix(g: Gen) -> Mat {
    match g {
        Gen::UPlus => Mat::from_i64(&[&[0, 1], &[0, 0]]),
        Gen::UMinus => Mat::from_i64(&[&[0, 0], &[1, 0]]),
        Gen::H => Mat::from_i64(&[&[1, 0], &[0, -1]]),
        Gen::Z => Mat::identity(2),
    }
}

/// Element of gl₂ ⊂ U(gl₂) with the given defining matrix.
pub fn matrix_to_element(m: &Mat) -> UEAElement {
    let (p, qq, r, s) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let half = qf(1, 2);
    UEAElement::u_plus()
        .scale(qq)
        .add(&UEAElement::u_minus().scale(r))
        .add(&UEAElement::h().scale(&((p - s) * &half)))
        .add(&UEAElement::z().scale(&((p + s) * &half)))
}

/// Matrices of `u⁻, h, z, u⁺` on a finite-dimensional space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gl2Matrices {
    pub u_minus: Mat,
    pub h: Mat,
    pub z: Mat,
    pub u_plus: Mat,
}

impl Gl2Matrices {
    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    fn by_index(&self, i: usize) -> &Mat {
        match i {
            0 => &self.u_minus,
            1 => &self.h,
            2 => &self.z,
            _ => &self.u_plus,
        }
    }

    fn check_dims(&self) -> Result<(), UeaError> {
        let n = self.dim();
        for (name, m) in [
            ("u-", &self.u_minus),
            ("h", &self.h),
            ("z", &self.z),
            ("u+", &self.u_plus),
        ] {
            if m.rows() != n || m.cols() != n {
                return Err(UeaError::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(())
    }

    /// The defining relations that fail, by name.
    pub fn bracket_failures(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if self.u_plus.commutator(&self.u_minus) != self.h {
            bad.push("[u+,u-]=h");
        }
        if self.h.commutator(&self.u_plus) != self.u_plus.scale(&q(2)) {
            bad.push("[h,u+]=2u+");
        }
        if self.h.commutator(&self.u_minus) != self.u_minus.scale(&q(-2)) {
            bad.push("[h,u-]=-2u-");
        }
        for (name, m) in [("[z,u+]=0", &self.u_plus), ("[z,u-]=0", &self.u_minus)] {
            if !self.z.commutator(m).is_zero() {
                bad.push(name);
            }
        }
        if !self.z.commutator(&self.h).is_zero() {
            bad.push("[z,h]=0");
        }
        bad
    }

    /// Diagonal action on the tensor product; index `i·other.dim() + j`.
    pub fn tensor(&self, other: &Gl2Matrices) -> Gl2Matrices {
        let ia = Mat::identity(self.dim());
        let ib = Mat::identity(other.dim());
        let f = |a: &Mat, b: &Mat| a.kron(&ib).add(&ia.kron(b));
        Gl2Matrices {
            u_minus: f(&self.u_minus, &other.u_minus),
            h: f(&self.h, &other.h),
            z: f(&self.z, &other.z),
            u_plus: f(&self.u_plus, &other.u_plus),
        }
    }
}

/// How a computed identity relates to its printed normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScalarLaw {
    One,
    Det,
    InverseDet,
}

impl ScalarLaw {
    pub const ALL: [ScalarLaw; 3] = [ScalarLaw::One, ScalarLaw::Det, ScalarLaw::InverseDet];

    pub fn value(self, det: &Q) -> Q {
        match self {
            ScalarLaw::One => one(),
            ScalarLaw::Det => det.clone(),
            ScalarLaw::InverseDet => det.recip(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarLaw::One => "1",
            ScalarLaw::Det => "det(g)",
            ScalarLaw::InverseDet => "det(g)^-1",
        }
    }
}

/// Outcome of comparing `lhs` with `s·rhs` in a central quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarCheck {
    /// `Some(s)` with `lhs = s·rhs`; `None` if no scalar works.
    pub scalar: Option<Q>,
    /// Every law whose value equals `scalar` for this `g` (several may
    /// coincide when `det(g) = ±1`; all match when both sides vanish).
    pub laws: Vec<ScalarLaw>,
    pub lhs: UEAElement,
    pub rhs: UEAElement,
}

fn compare_up_to_scalar(lhs: UEAElement, rhs: UEAElement, det: &Q) -> ScalarCheck {
    let scalar = if rhs.is_zero() {
        lhs.is_zero().then(one)
    } else {
        let (m, c) = rhs.terms().next().expect("nonzero");
        let s = lhs.coeff(*m) / c;
        (lhs == rhs.scale(&s)).then_some(s)
    };
    let laws = match (&scalar, rhs.is_zero()) {
        (Some(_), true) => ScalarLaw::ALL.to_vec(),
        (Some(s), false) => ScalarLaw::ALL
            .into_iter()
            .filter(|l| &l.value(det) == s)
            .collect(),
        (None, _) => vec![],
    };
    ScalarCheck {
        scalar,
        laws,
        lhs,
        rhs,
    }
}

fn central_params(alpha: &Q) -> (Q, Q) {
    (alpha - one(), alpha * alpha - one())
}

/// `u⁺·Ad_g(u⁺)` against `(-c·a⁺ + a·u⁺)(-c·(a⁺ - α) + a·u⁺)` in
/// `U/(z - (α-1), c - (α²-1))`.
pub fn verify_lie_lemma(g: &GL2Elem, alpha: &Q) -> ScalarCheck {
    let (zeta, mu) = central_params(alpha);
    let up = UEAElement::u_plus();
    let ap = UEAElement::a_plus();
    let lhs = up.mul(&up.adjoint(g));
    let left = ap.scale(&-g.c.clone()).add(&up.scale(&g.a));
    let right = ap
        .sub(&UEAElement::scalar(alpha.clone()))
        .scale(&-g.c.clone())
        .add(&up.scale(&g.a));
    let rhs = left.mul(&right);
    compare_up_to_scalar(
        lhs.reduce_central(&zeta, &mu),
        rhs.reduce_central(&zeta, &mu),
        &g.det(),
    )
}

/// `Ad_g(c·a⁺ + d·u⁺)` against `det(g)·(-c·(a⁺ - α + 1) + a·u⁺)` in the
/// same quotient. The identity holds as printed iff `laws` contains `One`.
pub fn verify_adg_formula(g: &GL2Elem, alpha: &Q) -> ScalarCheck {
    let (zeta, mu) = central_params(alpha);
    let up = UEAElement::u_plus();
    let ap = UEAElement::a_plus();
    let lhs = ap.scale(&g.c).add(&up.scale(&g.d)).adjoint(g);
    let inner = ap
        .sub(&UEAElement::scalar(alpha - one()))
        .scale(&-g.c.clone())
        .add(&up.scale(&g.a));
    let rhs = inner.scale(&g.det());
    compare_up_to_scalar(
        lhs.reduce_central(&zeta, &mu),
        rhs.reduce_central(&zeta, &mu),
        &g.det(),
    )
}

/// Laws common to every check; empty if some instance failed outright.
pub fn common_laws<'a>(checks: impl IntoIterator<Item = &'a ScalarCheck>) -> Vec<ScalarLaw> {
    let mut laws = ScalarLaw::ALL.to_vec();
    for c in checks {
        laws.retain(|l| c.laws.contains(l));
    }
    laws
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> UEAElement {
        UEAElement::parse(s).unwrap()
    }

    /// V_k in the basis e_i = t^i e, built independently of `symk`.
    fn sym_matrices(k: usize) -> Gl2Matrices {
        let n = k + 1;
        Gl2Matrices {
            u_plus: Mat::from_fn(n, n, |r, c| if r == c + 1 { one() } else { zero() }),
            u_minus: Mat::from_fn(n, n, |r, c| {
                if c == r + 1 {
                    q((c * (k - c + 1)) as i64)
                } else {
                    zero()
                }
            }),
            h: Mat::from_fn(n, n, |r, c| {
                if r == c {
                    q(2 * r as i64 - k as i64)
                } else {
                    zero()
                }
            }),
            z: Mat::scalar(n, &q(k as i64)),
        }
    }

    fn gens() -> impl Strategy<Value = Vec<Gen>> {
        proptest::collection::vec(
            prop::sample::select(vec![Gen::UMinus, Gen::H, Gen::Z, Gen::UPlus]),
            0..5,
        )
    }

    fn element() -> impl Strategy<Value = UEAElement> {
        proptest::collection::vec((gens(), -3i64..=3), 1..4).prop_map(|ws| {
            ws.iter().fold(UEAElement::zero(), |acc, (w, c)| {
                acc.add(&UEAElement::from_word(w).scale(&q(*c)))
            })
        })
    }

    #[test]
    fn brackets_and_parse() {
        assert_eq!(p("u+*u-"), p("u-*u+ + h"));
        assert_eq!(p("u+*u-").to_string(), "u-*u+ + h");
        assert_eq!(p("h*u+"), p("u+*h + 2*u+"));
        assert_eq!(p("u+*h").to_string(), "h*u+ - 2*u+");
        assert_eq!(p("a+ + a-"), UEAElement::z());
        assert_eq!(p("a+ - a-").to_string(), "h");
        assert!(UEAElement::parse("u+ * q").is_err());
    }

    #[test]
    fn casimir_two_forms() {
        let diff = p("h^2-2*h+4*u+*u-").sub(&p("h^2+2*h+4*u-*u+"));
        assert!(diff.is_zero());
        assert_eq!(p("c"), p("h^2+2*h+4*u-*u+"));
        for g in [Gen::UMinus, Gen::H, Gen::Z, Gen::UPlus] {
            assert!(UEAElement::casimir()
                .commutator(&UEAElement::gen(g))
                .is_zero());
        }
    }

    #[test]
    fn central_reduction() {
        let (zeta, mu) = (q(2), q(8));
        assert_eq!(
            UEAElement::casimir().reduce_central(&zeta, &mu),
            UEAElement::scalar(mu.clone())
        );
        assert_eq!(p("z^2*u+").reduce_central(&zeta, &mu), p("4*u+"));
        assert_eq!(
            p("u-*u+").reduce_central(&zeta, &mu),
            p("2 - 1/4*h^2 - 1/2*h")
        );
        // u⁻²u⁺² on V_3 (z = 3, c = 15) compared with direct matrix evaluation
        let v3 = sym_matrices(3);
        let x = p("u-^2*u+^2");
        let red = x.reduce_central(&q(3), &q(15));
        assert!(red
            .terms()
            .all(|((i, _, m, l), _)| *m == 0 && (*i == 0 || *l == 0)));
        assert_eq!(red.evaluate(&v3).unwrap(), x.evaluate(&v3).unwrap());
    }

    #[test]
    fn adjoint_basics() {
        let g = GL2Elem::from_i64(2, 3, 5, 7).unwrap();
        let det = g.det();
        let expected = p("u+")
            .scale(&q(4))
            .add(&p("u-").scale(&q(-25)))
            .add(&p("h").scale(&q(-10)));
        assert_eq!(UEAElement::u_plus().adjoint(&g).scale(&det), expected);
        let x = p("u+*h - 3*u-^2 + z");
        assert_eq!(x.adjoint(&GL2Elem::identity()), x);
        assert_eq!(UEAElement::z().adjoint(&g), UEAElement::z());
        assert!(GL2Elem::from_i64(1, 2, 2, 4).is_err());
    }

    #[test]
    fn adjoint_fixes_casimir_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = GL2Elem::random(&mut rng);
            let h = GL2Elem::random(&mut rng);
            assert_eq!(UEAElement::casimir().adjoint(&g), UEAElement::casimir());
            for gen in [Gen::UMinus, Gen::H, Gen::UPlus] {
                let x = UEAElement::gen(gen);
                assert_eq!(x.adjoint(&g.mul(&h)), x.adjoint(&h).adjoint(&g));
            }
        }
    }

    #[test]
    fn evaluation_on_symmetric_powers() {
        for k in 0..=6 {
            let v = sym_matrices(k);
            assert!(v.bracket_failures().is_empty());
            let kk = k as i64;
            assert_eq!(
                UEAElement::casimir().evaluate(&v).unwrap(),
                Mat::scalar(k + 1, &q(kk * (kk + 2)))
            );
        }
        assert_eq!(
            UEAElement::z().evaluate(&sym_matrices(1)).unwrap(),
            Mat::identity(2)
        );
        let mut bad = sym_matrices(2);
        bad.z = Mat::identity(2);
        assert!(matches!(
            UEAElement::casimir().evaluate(&bad),
            Err(UeaError::DimensionMismatch(_))
        ));
        let t = sym_matrices(1).tensor(&sym_matrices(2));
        assert!(t.bracket_failures().is_empty());
        assert!(p("u+*u- - u-*u+ - h").evaluate(&t).unwrap().is_zero());
    }

    #[test]
    fn lie_lemma_identity_instance() {
        let chk = verify_lie_lemma(&GL2Elem::identity(), &q(3));
        assert_eq!(chk.scalar, Some(one()));
        let adg = verify_adg_formula(&GL2Elem::identity(), &q(2));
        assert!(adg.laws.contains(&ScalarLaw::One));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn multiplication_is_associative(a in element(), b in element(), c in element()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn words_evaluate_consistently(w in gens(), k in 0usize..4) {
            let v = sym_matrices(k);
            let word_mat = w.iter().fold(Mat::identity(k + 1), |acc, g| {
                acc.mul(match g {
                    Gen::UMinus => &v.u_minus,
                    Gen::H => &v.h,
                    Gen::Z => &v.z,
                    Gen::UPlus => &v.u_plus,
                })
            });
            prop_assert_eq!(UEAElement::from_word(&w).evaluate(&v).unwrap(), word_mat);
        }

        #[test]
        fn reduction_respects_evaluation(x in element(), k in 0usize..5) {
            let v = sym_matrices(k);
            let kk = k as i64;
            let red = x.reduce_central(&q(kk), &q(kk * (kk + 2)));
            prop_assert_eq!(red.evaluate(&v).unwrap(), x.evaluate(&v).unwrap());
        }
    }
}
