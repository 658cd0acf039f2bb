//! Antisymmetric tensor fields with truncated polynomial components.
//!
//! [`Multivector`] (contravariant) and [`DiffForm`] (covariant) share one
//! generic container over a variance marker; components are stored only
//! for strictly increasing index tuples.
//!
//! # Sign conventions
//!
//! One global convention is fixed and used for every identity in the
//! crate:
//!
//! * wedge: shuffle signs, `A ^ B = (-1)^{deg A deg B} B ^ A`;
//! * form-into-multivector contraction `eta _| A`: on basis terms with
//!   `J` a subset of `I`, `dx_J _| d_I = e * d_R` where `R = I \ J` and
//!   `e` is the sign with `d_R ^ d_J = e * d_I` (the form pairs the
//!   trailing slots);
//! * multivector-into-form contraction `A _| eta` (interior product): on
//!   basis terms with `I` a subset of `J`, `d_I _| dx_J = e * dx_R` where
//!   `R = J \ I` and `dx_I ^ dx_R = e * dx_J` (the multivector pairs the
//!   leading slots);
//! * duality against the fixed volume multivector/form on `n` variables:
//!   `dual_form(P)_J = e(I,J) P_I` with `I` the complement of `J` and
//!   `e(I,J)` the sign of the permutation `(I,J)` of `(1..n)`. With this
//!   choice `dual_mv . dual_form` and `dual_form . dual_mv` are exact
//!   identities, not merely identities up to sign.

mod schouten;
mod transform;

pub use schouten::{lie_derivative, lie_derivative_poly, LieDifferentiable};

use crate::error::{KernelError, Result};
use crate::polyring::TruncPoly;
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::marker::PhantomData;

/// Variance marker: contravariant (multivector) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contra;
/// Variance marker: covariant (differential form) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Co;

mod sealed {
    pub trait Sealed {}
    impl Sealed for super::Contra {}
    impl Sealed for super::Co {}
}

pub trait Variance: sealed::Sealed + Clone + Copy + PartialEq + Eq + std::fmt::Debug {}
impl Variance for Contra {}
impl Variance for Co {}

/// Index tuple of a component: strictly increasing, zero-based.
pub type IdxTuple = Vec<usize>;

/// Antisymmetric tensor of fixed degree with [`TruncPoly`] components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alt<V: Variance> {
    nvars: usize,
    degree: usize,
    cap: u32,
    comps: BTreeMap<IdxTuple, TruncPoly>,
    _variance: PhantomData<V>,
}

pub type Multivector = Alt<Contra>;
pub type DiffForm = Alt<Co>;

/// A vector field is a degree-1 multivector; the alias marks intent.
pub type VectorField = Multivector;

/// Sign of the permutation sorting `left ++ right` (both strictly
/// increasing and disjoint) into one increasing tuple: `(-1)^inversions`.
pub(crate) fn merge_sign(left: &[usize], right: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for &l in left {
        inversions += right.iter().filter(|&&r| r < l).count();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Merges two disjoint increasing tuples; `None` if they overlap.
pub(crate) fn merge_tuples(a: &[usize], b: &[usize]) -> Option<(IdxTuple, i8)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, merge_sign(a, b)))
}

/// Sorts an arbitrary tuple, returning the permutation sign; `None` when
/// an index repeats.
pub fn sort_tuple(idx: &[usize]) -> Option<(IdxTuple, i8)> {
    let mut v: Vec<usize> = idx.to_vec();
    let mut sign = 1i8;
    // insertion sort, counting swaps
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// All strictly increasing `k`-tuples from `0..n`, in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<IdxTuple> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut IdxTuple, out: &mut Vec<IdxTuple>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

fn subset_complement(sub: &[usize], sup: &[usize]) -> Option<IdxTuple> {
    let mut rest = Vec::with_capacity(sup.len() - sub.len());
    let mut it = sub.iter().peekable();
    for &s in sup {
        if it.peek() == Some(&&s) {
            it.next();
        } else {
            rest.push(s);
        }
    }
    if it.peek().is_none() {
        Some(rest)
    } else {
        None
    }
}

impl<V: Variance> Alt<V> {
    pub fn zero(nvars: usize, degree: usize, cap: u32) -> Self {
        Alt {
            nvars,
            degree,
            cap,
            comps: BTreeMap::new(),
            _variance: PhantomData,
        }
    }

    /// Constant basis tensor for one increasing index tuple.
    pub fn basis(nvars: usize, cap: u32, idx: &[usize]) -> Self {
        let mut t = Self::zero(nvars, idx.len(), cap);
        assert!(idx.windows(2).all(|w| w[0] < w[1]), "tuple must increase");
        assert!(idx.iter().all(|&i| i < nvars));
        t.insert_component(idx.to_vec(), TruncPoly::one(nvars, cap));
        t
    }

    /// Degree-0 tensor holding a single scalar polynomial.
    pub fn scalar(p: TruncPoly) -> Self {
        let mut t = Self::zero(p.nvars(), 0, p.cap());
        t.insert_component(Vec::new(), p);
        t
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&IdxTuple, &TruncPoly)> {
        self.comps.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.comps.values().map(TruncPoly::num_terms).sum()
    }

    pub fn component(&self, idx: &[usize]) -> TruncPoly {
        self.comps
            .get(idx)
            .cloned()
            .unwrap_or_else(|| TruncPoly::zero(self.nvars, self.cap))
    }

    /// Inserts a component for an already-increasing tuple, adding to any
    /// existing one and dropping zeros.
    pub fn insert_component(&mut self, idx: IdxTuple, p: TruncPoly) {
        debug_assert_eq!(idx.len(), self.degree);
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        if p.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.comps.entry(idx) {
            Entry::Vacant(e) => {
                e.insert(p);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&p).expect("same shape");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Adds `p` on a possibly unsorted tuple, folding in the permutation
    /// sign. Errors on a repeated index.
    pub fn add_term(&mut self, idx: &[usize], p: TruncPoly) -> Result<()> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.nvars) {
            return Err(KernelError::IndexOutOfRange {
                index: bad + 1,
                nvars: self.nvars,
            });
        }
        let Some((sorted, sign)) = sort_tuple(idx) else {
            return Err(KernelError::Degree(
                "repeated index in a wedge tuple".into(),
            ));
        };
        let signed = if sign < 0 { p.neg() } else { p };
        self.insert_component(sorted, signed);
        Ok(())
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars || self.cap != other.cap {
            return Err(KernelError::ShapeMismatch {
                left_nvars: self.nvars,
                left_cap: self.cap,
                right_nvars: other.nvars,
                right_cap: other.cap,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        if self.degree != other.degree {
            return Err(KernelError::Degree(format!(
                "cannot add tensors of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (idx, p) in &other.comps {
            out.insert_component(idx.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_components(|p| p.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        self.map_components(|p| p.scale(c))
    }

    /// Multiplies every component by a scalar polynomial.
    pub fn mul_poly(&self, f: &TruncPoly) -> Result<Self> {
        if f.nvars() != self.nvars || f.cap() != self.cap {
            return Err(KernelError::ShapeMismatch {
                left_nvars: self.nvars,
                left_cap: self.cap,
                right_nvars: f.nvars(),
                right_cap: f.cap(),
            });
        }
        let mut out = Self::zero(self.nvars, self.degree, self.cap);
        for (idx, p) in &self.comps {
            out.insert_component(idx.clone(), p.mul(f)?);
        }
        Ok(out)
    }

    fn map_components(&self, f: impl Fn(&TruncPoly) -> TruncPoly) -> Self {
        let mut out = Self::zero(self.nvars, self.degree, self.cap);
        for (idx, p) in &self.comps {
            out.insert_component(idx.clone(), f(p));
        }
        out
    }

    /// Graded-commutative exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let deg = self.degree + other.degree;
        let mut out = Self::zero(self.nvars, deg.min(self.nvars + 1), self.cap);
        if deg > self.nvars {
            out.degree = deg; // degree recorded; necessarily zero
            return Ok(out);
        }
        out.degree = deg;
        for (ia, pa) in &self.comps {
            for (ib, pb) in &other.comps {
                if let Some((merged, sign)) = merge_tuples(ia, ib) {
                    let mut prod = pa.mul(pb)?;
                    if sign < 0 {
                        prod = prod.neg();
                    }
                    out.insert_component(merged, prod);
                }
            }
        }
        Ok(out)
    }

    /// Componentwise homogeneous part of polynomial degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        let mut out = self.map_components(|p| p.homogeneous_part(d));
        out.prune();
        out
    }

    /// Componentwise truncation to polynomial degree `<= d`.
    pub fn truncate_degree(&self, d: u32) -> Self {
        let mut out = self.map_components(|p| p.truncate_degree(d));
        out.prune();
        out
    }

    /// Maximum polynomial degree over components.
    pub fn poly_degree(&self) -> u32 {
        self.comps.values().map(TruncPoly::degree).max().unwrap_or(0)
    }

    /// True when every component is homogeneous linear.
    pub fn is_linear(&self) -> bool {
        self.comps.values().all(|p| p.is_homogeneous(1))
    }

    /// True when all components vanish in polynomial degrees `lo..=hi`.
    pub fn vanishes_in_degrees(&self, lo: u32, hi: u32) -> bool {
        (lo..=hi).all(|d| self.homogeneous_part(d).is_zero())
    }

    pub fn retruncate(&self, cap: u32) -> Self {
        let mut out = Self::zero(self.nvars, self.degree, cap);
        for (idx, p) in &self.comps {
            out.insert_component(idx.clone(), p.retruncate(cap));
        }
        out
    }

    fn prune(&mut self) {
        self.comps.retain(|_, p| !p.is_zero());
    }
}

impl Multivector {
    /// Contraction of a multivector by a differential form (`eta _| A`):
    /// lowers the degree by `deg eta`. See the module docs for the sign
    /// convention.
    pub fn contract_form(&self, eta: &DiffForm) -> Result<Multivector> {
        if eta.nvars() != self.nvars || eta.cap() != self.cap {
            return Err(KernelError::ShapeMismatch {
                left_nvars: self.nvars,
                left_cap: self.cap,
                right_nvars: eta.nvars(),
                right_cap: eta.cap(),
            });
        }
        if eta.degree() > self.degree {
            return Err(KernelError::Degree(format!(
                "cannot contract a degree-{} form into a degree-{} multivector",
                eta.degree(),
                self.degree
            )));
        }
        let mut out = Multivector::zero(self.nvars, self.degree - eta.degree(), self.cap);
        for (j, q) in eta.components() {
            for (i, p) in &self.comps {
                if let Some(rest) = subset_complement(j, i) {
                    let sign = merge_sign(&rest, j);
                    let mut prod = q.mul(p)?;
                    if sign < 0 {
                        prod = prod.neg();
                    }
                    out.insert_component(rest, prod);
                }
            }
        }
        Ok(out)
    }

    /// Interior product of this multivector into a form (`A _| eta`):
    /// pairs the leading slots of the form.
    pub fn contract_into_form(&self, eta: &DiffForm) -> Result<DiffForm> {
        if eta.nvars() != self.nvars || eta.cap() != self.cap {
            return Err(KernelError::ShapeMismatch {
                left_nvars: self.nvars,
                left_cap: self.cap,
                right_nvars: eta.nvars(),
                right_cap: eta.cap(),
            });
        }
        if self.degree > eta.degree() {
            return Err(KernelError::Degree(format!(
                "cannot contract a degree-{} multivector into a degree-{} form",
                self.degree,
                eta.degree()
            )));
        }
        let mut out = DiffForm::zero(self.nvars, eta.degree() - self.degree, self.cap);
        for (i, p) in &self.comps {
            for (j, q) in eta.components() {
                if let Some(rest) = subset_complement(i, j) {
                    let sign = merge_sign(i, &rest);
                    let mut prod = p.mul(q)?;
                    if sign < 0 {
                        prod = prod.neg();
                    }
                    out.insert_component(rest, prod);
                }
            }
        }
        Ok(out)
    }

    /// The dual `(n-q)`-form against the fixed volume form
    /// `dx_1 ^ ... ^ dx_n`.
    pub fn dual_form(&self) -> DiffForm {
        let mut out = DiffForm::zero(self.nvars, self.nvars - self.degree, self.cap);
        let all: Vec<usize> = (0..self.nvars).collect();
        for (i, p) in &self.comps {
            let j = subset_complement(i, &all).expect("component indices within range");
            let sign = merge_sign(i, &j);
            let q = if sign < 0 { p.neg() } else { p.clone() };
            out.insert_component(j, q);
        }
        out
    }

    /// Extracts the components of a degree-1 multivector as a plain
    /// coefficient vector, index `i` holding the `d/dx_{i+1}` component.
    pub fn vector_components(&self) -> Vec<TruncPoly> {
        assert_eq!(self.degree, 1, "vector_components needs a vector field");
        (0..self.nvars).map(|i| self.component(&[i])).collect()
    }

    /// Builds a vector field from per-coordinate components.
    pub fn from_vector_components(comps: &[TruncPoly]) -> Multivector {
        let nvars = comps.len();
        let cap = comps[0].cap();
        let mut out = Multivector::zero(nvars, 1, cap);
        for (i, p) in comps.iter().enumerate() {
            out.insert_component(vec![i], p.clone());
        }
        out
    }
}

impl DiffForm {
    /// Inverse of [`Multivector::dual_form`]; the round trip is the exact
    /// identity by construction.
    pub fn dual_mv(&self) -> Multivector {
        let mut out = Multivector::zero(self.nvars, self.nvars - self.degree, self.cap);
        let all: Vec<usize> = (0..self.nvars).collect();
        for (j, q) in &self.comps {
            let i = subset_complement(j, &all).expect("component indices within range");
            let sign = merge_sign(&i, j);
            let p = if sign < 0 { q.neg() } else { q.clone() };
            out.insert_component(i, p);
        }
        out
    }

    /// Coordinate exterior derivative.
    pub fn ext_d(&self) -> Result<DiffForm> {
        if self.degree >= self.nvars {
            // d of a top form is zero but still a legal (n+1 truncated) call
            return Ok(DiffForm::zero(self.nvars, self.degree + 1, self.cap));
        }
        let mut out = DiffForm::zero(self.nvars, self.degree + 1, self.cap);
        for (j, q) in &self.comps {
            for i in 0..self.nvars {
                let dq = q.partial(i)?;
                if dq.is_zero() {
                    continue;
                }
                if let Some((merged, sign)) = merge_tuples(&[i], j) {
                    let signed = if sign < 0 { dq.neg() } else { dq };
                    out.insert_component(merged, signed);
                }
            }
        }
        Ok(out)
    }
}

/// Exterior derivative of a scalar polynomial as a 1-form.
pub fn d_of_poly(p: &TruncPoly) -> Result<DiffForm> {
    DiffForm::scalar(p.clone()).ext_d()
}
