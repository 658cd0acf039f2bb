//! The orthogonal-algebra action on polynomial vector fields and exact
//! Chevalley–Eilenberg coboundary solvers.
//!
//! The solvers never build a full cochain-space matrix. The key identity:
//! for a 1-cocycle `Z` on a semisimple algebra acting on a module `M`,
//! the vector `y = sum_k rho(e^k) Z(e_k)` (dual basis with respect to
//! the defining trace form) satisfies `rho(x) y = Cas(Z(x))` pointwise,
//! so solving the single equation `Cas(Y) = y` inside the Krylov span of
//! `y` produces the coboundary preimage. For 2-cocycles the contraction
//! homotopy `h` reduces the problem to `d(hB) = Omega(B)` on cocycles;
//! the Casimir-invertible part is handled in the Krylov span and the
//! invariant remainder by a small dense solve inside the module closure
//! of its components. Every solve is verified exactly before returning.

use crate::error::{KernelError, Result};
use crate::linalg::RatMat;
use crate::polyring::{Mono, TruncPoly};
use crate::rat::{rat, Rat};
use crate::tensor::VectorField;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// A basis of linear vector fields spanning a Lie algebra, with its
/// bracket table and trace-form data.
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub fields: Vec<VectorField>,
    /// Matrices of the fields on the coordinate space: `X = sum m[i][j] x_j d_i`.
    pub matrices: Vec<RatMat>,
    /// `[X_k, X_l] = sum_m constants[k][l][m] X_m`.
    pub constants: Vec<Vec<Vec<Rat>>>,
    /// Inverse Gram matrix of the trace form `tr(m_k m_l)`.
    pub gram_inv: RatMat,
}

fn field_matrix(x: &VectorField) -> RatMat {
    let n = x.nvars();
    let mut m = RatMat::zeros(n, n);
    for i in 0..n {
        let comp = x.component(&[i]);
        for j in 0..n {
            m[(i, j)] = comp.linear_coeff(j);
        }
    }
    m
}

impl LieBasis {
    /// Builds the table from linear independent fields; fails when the
    /// fields are dependent, do not close under bracket, or the trace
    /// form is degenerate.
    pub fn from_fields(fields: Vec<VectorField>) -> Result<LieBasis> {
        assert!(!fields.is_empty());
        let n = fields[0].nvars();
        for f in &fields {
            if !f.is_linear() || f.degree() != 1 {
                return Err(KernelError::Precondition(
                    "action basis fields must be homogeneous linear vector fields".into(),
                ));
            }
        }
        let matrices: Vec<RatMat> = fields.iter().map(field_matrix).collect();
        // independence and bracket closure over the matrix coordinates
        let as_rows: Vec<Vec<Rat>> = matrices
            .iter()
            .map(|m| {
                let mut row = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        row.push(m[(i, j)].clone());
                    }
                }
                row
            })
            .collect();
        let span = RatMat::from_rows(as_rows.clone()).transpose();
        if span.rank() != fields.len() {
            return Err(KernelError::Precondition(
                "action basis fields are linearly dependent".into(),
            ));
        }
        let k = fields.len();
        let mut constants = vec![vec![vec![Rat::zero(); k]; k]; k];
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                // commutator of vector-field matrices: [X_a, X_b] has
                // matrix m_b m_a - m_a m_b under X = sum m[i][j] x_j d_i
                let mb_ma = matrices[b].mul(&matrices[a]);
                let ma_mb = matrices[a].mul(&matrices[b]);
                let mut target = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        target.push(&mb_ma[(i, j)] - &ma_mb[(i, j)]);
                    }
                }
                let coords = span.solve(&target).ok_or_else(|| {
                    KernelError::Precondition(
                        "action basis does not close under the bracket".into(),
                    )
                })?;
                constants[a][b] = coords;
            }
        }
        let mut gram = RatMat::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let prod = matrices[a].mul(&matrices[b]);
                let mut tr = Rat::zero();
                for i in 0..n {
                    tr += prod[(i, i)].clone();
                }
                gram[(a, b)] = tr;
            }
        }
        let gram_inv = gram.inverse().ok_or_else(|| {
            KernelError::Precondition("trace form of the action basis is degenerate".into())
        })?;
        Ok(LieBasis {
            fields,
            matrices,
            constants,
            gram_inv,
        })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `[X_k, v]`.
    pub fn act(&self, k: usize, v: &VectorField) -> Result<VectorField> {
        self.fields[k].schouten(v)
    }

    /// `rho(e^k) v` for the trace-dual basis element `e^k`.
    pub fn act_dual(&self, k: usize, v: &VectorField) -> Result<VectorField> {
        let zero = VectorField::zero(v.nvars(), 1, v.cap());
        let mut acc = zero;
        for l in 0..self.len() {
            let c = &self.gram_inv[(k, l)];
            if !c.is_zero() {
                acc = acc.add(&self.act(l, v)?.scale(c))?;
            }
        }
        Ok(acc)
    }

    /// Casimir operator `sum_k rho(e_k) rho(e^k)`.
    pub fn casimir(&self, v: &VectorField) -> Result<VectorField> {
        let mut acc = VectorField::zero(v.nvars(), 1, v.cap());
        for k in 0..self.len() {
            let inner = self.act_dual(k, v)?;
            if !inner.is_zero() {
                acc = acc.add(&self.act(k, &inner)?)?;
            }
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------
// coordinates of vector fields, for rank computations
// ---------------------------------------------------------------------

type VfKey = (usize, Mono);

fn vf_coords(v: &VectorField) -> BTreeMap<VfKey, Rat> {
    let mut out = BTreeMap::new();
    for (idx, p) in v.components() {
        for (m, c) in p.terms() {
            out.insert((idx[0], m.clone()), c.clone());
        }
    }
    out
}

/// Incremental echelonized span with dependence extraction: vectors are
/// absorbed one at a time; a dependent vector yields its coefficients
/// over the previously inserted ones without re-eliminating the chain.
pub(crate) struct SpanTracker<K: Ord + Clone> {
    /// Echelon rows, each led by its pivot key.
    rows: Vec<std::collections::BTreeMap<K, Rat>>,
    /// Expression of each echelon row over the inserted vectors.
    combos: Vec<Vec<Rat>>,
    inserted: usize,
}

pub(crate) enum SpanInsert {
    Independent,
    /// Coefficients over the previously inserted vectors.
    Dependent(Vec<Rat>),
}

impl<K: Ord + Clone> SpanTracker<K> {
    pub fn new() -> Self {
        SpanTracker {
            rows: Vec::new(),
            combos: Vec::new(),
            inserted: 0,
        }
    }

    pub fn insert(&mut self, mut v: std::collections::BTreeMap<K, Rat>) -> SpanInsert {
        v.retain(|_, c| !c.is_zero());
        let mut combo = vec![Rat::zero(); self.inserted];
        for (row, row_combo) in self.rows.iter().zip(&self.combos) {
            let Some((pivot, lead)) = row.iter().next() else {
                continue;
            };
            let Some(c) = v.get(pivot).cloned() else {
                continue;
            };
            let factor = c / lead;
            for (k, rv) in row {
                let entry = v.entry(k.clone()).or_insert_with(Rat::zero);
                *entry -= &factor * rv;
                if entry.is_zero() {
                    v.remove(k);
                }
            }
            for (slot, rc) in combo.iter_mut().zip(row_combo) {
                *slot += &factor * rc;
            }
        }
        if v.is_empty() {
            self.inserted += 1;
            SpanInsert::Dependent(combo)
        } else {
            let mut self_combo = vec![Rat::zero(); self.inserted + 1];
            for (slot, c) in self_combo.iter_mut().zip(combo.iter()) {
                *slot = -c.clone();
            }
            self_combo[self.inserted] = Rat::one();
            // pad previous combos to the new width
            self.inserted += 1;
            for rc in self.combos.iter_mut() {
                rc.resize(self.inserted, Rat::zero());
            }
            self.combos.push(self_combo);
            self.rows.push(v);
            SpanInsert::Independent
        }
    }
}

fn coords_list(items: &[VectorField]) -> (Vec<VfKey>, RatMat) {
    let mut support = std::collections::BTreeSet::new();
    let coord_maps: Vec<BTreeMap<VfKey, Rat>> = items.iter().map(vf_coords).collect();
    for m in &coord_maps {
        support.extend(m.keys().cloned());
    }
    let keys: Vec<VfKey> = support.into_iter().collect();
    let rows: Vec<Vec<Rat>> = coord_maps
        .iter()
        .map(|m| {
            keys.iter()
                .map(|k| m.get(k).cloned().unwrap_or_else(Rat::zero))
                .collect()
        })
        .collect();
    (keys, RatMat::from_rows(rows))
}

/// Finds the minimal monic dependence `T^m y = sum_{i<m} a_i T^i y` of
/// the iterates of an operator on `y`, returning the Krylov chain
/// `[y, Ty, ..., T^{m-1} y]` and the coefficients `a`.
fn krylov_dependence(
    apply: &mut dyn FnMut(&VectorField) -> Result<VectorField>,
    y: &VectorField,
) -> Result<(Vec<VectorField>, Vec<Rat>)> {
    let mut chain = vec![y.clone()];
    let mut span: SpanTracker<VfKey> = SpanTracker::new();
    span.insert(vf_coords(y));
    loop {
        let next = apply(chain.last().unwrap())?;
        match span.insert(vf_coords(&next)) {
            SpanInsert::Dependent(a) => return Ok((chain, a)),
            SpanInsert::Independent => {
                chain.push(next);
            }
        }
        if chain.len() > 256 {
            return Err(KernelError::Precondition(
                "Krylov chain failed to terminate; operator is not semisimple on the input"
                    .into(),
            ));
        }
    }
}

/// Outcome of splitting `y` against an operator `T` assumed semisimple
/// on the Krylov span: `y = kernel_part + image_part` with
/// `T(preimage) = image_part`.
pub struct KrylovSplit {
    pub kernel_part: VectorField,
    pub preimage: VectorField,
}

fn linear_comb(chain: &[VectorField], coeffs: &[Rat]) -> VectorField {
    let mut acc = VectorField::zero(chain[0].nvars(), 1, chain[0].cap());
    for (v, c) in chain.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = acc.add(&v.scale(c)).expect("same shape");
        }
    }
    acc
}

/// Splits `y` into its `ker T` component and a `T`-preimage of the rest,
/// entirely inside the Krylov span of `y`.
pub fn krylov_split(
    apply: &mut dyn FnMut(&VectorField) -> Result<VectorField>,
    y: &VectorField,
) -> Result<KrylovSplit> {
    let zero = VectorField::zero(y.nvars(), 1, y.cap());
    if y.is_zero() {
        return Ok(KrylovSplit {
            kernel_part: zero.clone(),
            preimage: zero,
        });
    }
    let (chain, a) = krylov_dependence(apply, y)?;
    let m = chain.len();
    // min-poly p(t) = t^m - sum a_i t^i
    if !a[0].is_zero() {
        // 0 is not an eigenvalue on the span: y = T(preimage) entirely
        // from t^m y - sum a_i t^i y = 0: y = T [ (t^{m-1} - sum_{i>=1} a_i t^{i-1}) y ] / a_0
        let mut coeffs = vec![Rat::zero(); m];
        coeffs[m - 1] = Rat::one() / &a[0];
        for i in 1..m {
            coeffs[i - 1] = -&a[i] / &a[0];
        }
        let pre = linear_comb(&chain, &coeffs);
        return Ok(KrylovSplit {
            kernel_part: zero,
            preimage: pre,
        });
    }
    if m == 1 {
        // T y = 0 outright: y is entirely in the kernel
        return Ok(KrylovSplit {
            kernel_part: y.clone(),
            preimage: zero,
        });
    }
    // p(t) = t r(t) with r(t) = t^{m-1} - sum_{i>=1} a_i t^{i-1};
    // semisimplicity makes the kernel projection r(T)/r(0)
    let r0 = -a[1].clone();
    if r0.is_zero() {
        return Err(KernelError::Precondition(
            "operator is not semisimple on the Krylov span (double zero root)".into(),
        ));
    }
    let mut r_coeffs = vec![Rat::zero(); m];
    r_coeffs[m - 1] = Rat::one() / &r0;
    for i in 1..m {
        r_coeffs[i - 1] = -&a[i] / &r0;
    }
    let kernel_part = linear_comb(&chain, &r_coeffs);
    let rest = y.sub(&kernel_part)?;
    if rest.is_zero() {
        return Ok(KrylovSplit {
            kernel_part,
            preimage: zero,
        });
    }
    // recurse on the purged vector, whose min-poly has r(0) != 0
    let split = krylov_split(apply, &rest)?;
    if !split.kernel_part.is_zero() {
        return Err(KernelError::Precondition(
            "kernel purge failed; operator is not semisimple on the input".into(),
        ));
    }
    Ok(KrylovSplit {
        kernel_part,
        preimage: split.preimage,
    })
}

// ---------------------------------------------------------------------
// Chevalley–Eilenberg cochains valued in vector fields
// ---------------------------------------------------------------------

/// Antisymmetric 2-cochain: values on generator pairs `k < l`.
#[derive(Debug, Clone)]
pub struct Cochain2 {
    pub n_gens: usize,
    vals: Vec<VectorField>,
}

impl Cochain2 {
    pub fn zero(n_gens: usize, nvars: usize, cap: u32) -> Self {
        let count = n_gens * (n_gens - 1) / 2;
        Cochain2 {
            n_gens,
            vals: vec![VectorField::zero(nvars, 1, cap); count],
        }
    }

    fn slot(&self, k: usize, l: usize) -> usize {
        debug_assert!(k < l && l < self.n_gens);
        // row-major upper triangle
        k * self.n_gens - k * (k + 1) / 2 + (l - k - 1)
    }

    pub fn get(&self, k: usize, l: usize) -> Result<VectorField> {
        use std::cmp::Ordering;
        match k.cmp(&l) {
            Ordering::Less => Ok(self.vals[self.slot(k, l)].clone()),
            Ordering::Greater => Ok(self.vals[self.slot(l, k)].neg()),
            Ordering::Equal => Ok(VectorField::zero(
                self.vals[0].nvars(),
                1,
                self.vals[0].cap(),
            )),
        }
    }

    pub fn set(&mut self, k: usize, l: usize, v: VectorField) {
        let slot = self.slot(k, l);
        self.vals[slot] = v;
    }

    pub fn values(&self) -> &[VectorField] {
        &self.vals
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(VectorField::is_zero)
    }

    pub fn add(&self, other: &Cochain2) -> Result<Cochain2> {
        let mut out = self.clone();
        for (a, b) in out.vals.iter_mut().zip(&other.vals) {
            *a = a.add(b)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Cochain2) -> Result<Cochain2> {
        let mut out = self.clone();
        for (a, b) in out.vals.iter_mut().zip(&other.vals) {
            *a = a.sub(b)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Cochain2 {
        let mut out = self.clone();
        for a in out.vals.iter_mut() {
            *a = a.scale(c);
        }
        out
    }
}

/// CE differential of a 1-cochain `Y` (values per generator):
/// `(dY)(e_k, e_l) = rho(e_k) Y_l - rho(e_l) Y_k - Y([e_k, e_l])`.
pub fn ce_d1(basis: &LieBasis, y: &[VectorField]) -> Result<Cochain2> {
    let n_gens = basis.len();
    let (nvars, cap) = (y[0].nvars(), y[0].cap());
    let mut out = Cochain2::zero(n_gens, nvars, cap);
    for k in 0..n_gens {
        for l in k + 1..n_gens {
            let mut v = basis.act(k, &y[l])?.sub(&basis.act(l, &y[k])?)?;
            for m in 0..n_gens {
                let c = &basis.constants[k][l][m];
                if !c.is_zero() {
                    v = v.sub(&y[m].scale(c))?;
                }
            }
            out.set(k, l, v);
        }
    }
    Ok(out)
}

/// CE cocycle condition for a 2-cochain: returns the first violated
/// triple, if any.
pub fn ce_d2_violation(basis: &LieBasis, b: &Cochain2) -> Result<Option<(usize, usize, usize)>> {
    let n_gens = basis.len();
    for i in 0..n_gens {
        for j in i + 1..n_gens {
            for k in j + 1..n_gens {
                let mut acc = basis.act(i, &b.get(j, k)?)?;
                acc = acc.sub(&basis.act(j, &b.get(i, k)?)?)?;
                acc = acc.add(&basis.act(k, &b.get(i, j)?)?)?;
                for m in 0..n_gens {
                    let cij = &basis.constants[i][j][m];
                    if !cij.is_zero() {
                        acc = acc.sub(&b.get(m, k)?.scale(cij))?;
                    }
                    let cik = &basis.constants[i][k][m];
                    if !cik.is_zero() {
                        acc = acc.add(&b.get(m, j)?.scale(cik))?;
                    }
                    let cjk = &basis.constants[j][k][m];
                    if !cjk.is_zero() {
                        acc = acc.sub(&b.get(m, i)?.scale(cjk))?;
                    }
                }
                if !acc.is_zero() {
                    return Ok(Some((i, j, k)));
                }
            }
        }
    }
    Ok(None)
}

/// Contraction homotopy on a 2-cochain:
/// `(hB)(e_k) = sum_j rho(e^j) B(e_j, e_k)`.
fn homotopy(basis: &LieBasis, b: &Cochain2) -> Result<Vec<VectorField>> {
    let n_gens = basis.len();
    let (nvars, cap) = (b.vals[0].nvars(), b.vals[0].cap());
    let mut out = Vec::with_capacity(n_gens);
    for k in 0..n_gens {
        let mut acc = VectorField::zero(nvars, 1, cap);
        for j in 0..n_gens {
            if j == k {
                continue;
            }
            let v = b.get(j, k)?;
            if !v.is_zero() {
                acc = acc.add(&basis.act_dual(j, &v)?)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Solves `dY = Z` for a 1-cocycle `Z` (one value per generator) using
/// the Casimir inversion; the result is exact and verified.
pub fn solve_coboundary_1(
    basis: &LieBasis,
    z: &[VectorField],
    context: &str,
    degree: u32,
) -> Result<VectorField> {
    let (nvars, cap) = (z[0].nvars(), z[0].cap());
    // y = sum_k rho(e^k) Z_k
    let mut y = VectorField::zero(nvars, 1, cap);
    for (k, zk) in z.iter().enumerate() {
        if !zk.is_zero() {
            y = y.add(&basis.act_dual(k, zk)?)?;
        }
    }
    let mut cas = |v: &VectorField| basis.casimir(v);
    let split = krylov_split(&mut cas, &y)?;
    if !split.kernel_part.is_zero() {
        return Err(KernelError::InconsistentSystem {
            context: context.into(),
            degree,
            component: "1-cocycle has an invariant component".into(),
        });
    }
    let candidate = split.preimage;
    for (k, zk) in z.iter().enumerate() {
        if basis.act(k, &candidate)? != *zk {
            return Err(KernelError::InconsistentSystem {
                context: context.into(),
                degree,
                component: format!("generator {k}: residual after Casimir inversion"),
            });
        }
    }
    Ok(candidate)
}

/// Closes a set of seeds under the action, returning an independent
/// basis of the generated submodule.
fn module_closure(basis: &LieBasis, seeds: Vec<VectorField>) -> Result<Vec<VectorField>> {
    let mut out: Vec<VectorField> = Vec::new();
    let mut span: SpanTracker<VfKey> = SpanTracker::new();
    let mut frontier = seeds;
    while let Some(v) = frontier.pop() {
        if v.is_zero() {
            continue;
        }
        if let SpanInsert::Independent = span.insert(vf_coords(&v)) {
            for k in 0..basis.len() {
                frontier.push(basis.act(k, &v)?);
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Solves `dY = B` for a 2-cocycle `B`. The bulk is handled by the
/// homotopy plus Casimir inversion inside the Krylov span of `B`; the
/// invariant remainder is solved densely inside the module closure of
/// its components. Fails when `B` is not a cocycle.
pub fn solve_coboundary_2(
    basis: &LieBasis,
    b: &Cochain2,
    context: &str,
    degree: u32,
) -> Result<Vec<VectorField>> {
    let n_gens = basis.len();
    let (nvars, cap) = (b.vals[0].nvars(), b.vals[0].cap());
    if let Some((i, j, k)) = ce_d2_violation(basis, b)? {
        return Err(KernelError::CocycleIdentity {
            context: context.into(),
            degree,
            component: format!("generators ({i}, {j}, {k})"),
        });
    }
    if b.is_zero() {
        return Ok(vec![VectorField::zero(nvars, 1, cap); n_gens]);
    }

    // Krylov machinery over cochains, flattened into one vector field
    // over an extended variable-free index trick is unavailable here, so
    // iterate T = d . h directly on the cochain.
    let apply_t = |c: &Cochain2| -> Result<Cochain2> { ce_d1(basis, &homotopy(basis, c)?) };

    // dependence chain over cochains
    let mut chain: Vec<Cochain2> = vec![b.clone()];
    let mut span: SpanTracker<(usize, VfKey)> = SpanTracker::new();
    span.insert(cochain_coords(b));
    let dep: Vec<Rat> = loop {
        let next = apply_t(chain.last().unwrap())?;
        match span.insert(cochain_coords(&next)) {
            SpanInsert::Dependent(a) => break a,
            SpanInsert::Independent => chain.push(next),
        }
        if chain.len() > 256 {
            return Err(KernelError::Precondition(
                "cochain Krylov chain failed to terminate".into(),
            ));
        }
    };
    let m = chain.len();
    let comb = |coeffs: &[Rat]| -> Result<Cochain2> {
        let mut acc = Cochain2::zero(n_gens, nvars, cap);
        for (c, coeff) in chain.iter().zip(coeffs) {
            if !coeff.is_zero() {
                acc = acc.add(&c.scale(coeff))?;
            }
        }
        Ok(acc)
    };
    // split B = B0 (ker T) + T-solvable part, as in the vector case
    let (b0, u) = if !dep[0].is_zero() {
        let mut coeffs = vec![Rat::zero(); m];
        coeffs[m - 1] = Rat::one() / &dep[0];
        for i in 1..m {
            coeffs[i - 1] = -&dep[i] / &dep[0];
        }
        (Cochain2::zero(n_gens, nvars, cap), comb(&coeffs)?)
    } else if m == 1 {
        // T B = 0 outright: B is entirely invariant
        (b.clone(), Cochain2::zero(n_gens, nvars, cap))
    } else {
        let r0 = -dep[1].clone();
        if r0.is_zero() {
            return Err(KernelError::Precondition(
                "cochain Casimir is not semisimple on the input".into(),
            ));
        }
        let mut r_coeffs = vec![Rat::zero(); m];
        r_coeffs[m - 1] = Rat::one() / &r0;
        for i in 1..m {
            r_coeffs[i - 1] = -&dep[i] / &r0;
        }
        let b0 = comb(&r_coeffs)?;
        let rest = b.sub(&b0)?;
        // rest lies in the invertible part: one more dependence pass
        let u = if rest.is_zero() {
            Cochain2::zero(n_gens, nvars, cap)
        } else {
            solve_t_preimage(basis, &rest, apply_t)?
        };
        (b0, u)
    };
    let mut y = homotopy(basis, &u)?;

    // invariant remainder: dY0 = B0 inside the module closure of B0
    if !b0.is_zero() {
        let closure = module_closure(basis, b0.vals.clone())?;
        let dim = closure.len();
        let (keys, _) = coords_list(&closure);
        let coord_of = |v: &VectorField| -> Vec<Rat> {
            let coords = vf_coords(v);
            keys.iter()
                .map(|k| coords.get(k).cloned().unwrap_or_else(Rat::zero))
                .collect()
        };
        // unknowns: coefficients of Y0_k over the closure basis
        let unknowns = n_gens * dim;
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        let mut rhs: Vec<Rat> = Vec::new();
        // precompute action of each generator on each closure element
        let mut acted: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(n_gens);
        for k in 0..n_gens {
            let mut per = Vec::with_capacity(dim);
            for w in &closure {
                per.push(coord_of(&basis.act(k, w)?));
            }
            acted.push(per);
        }
        let key_count = keys.len();
        for k in 0..n_gens {
            for l in k + 1..n_gens {
                let target = coord_of(&b0.get(k, l)?);
                for key_idx in 0..key_count {
                    let mut row = vec![Rat::zero(); unknowns];
                    for w_idx in 0..dim {
                        // rho(e_k) Y_l contribution
                        row[l * dim + w_idx] += acted[k][w_idx][key_idx].clone();
                        // - rho(e_l) Y_k
                        row[k * dim + w_idx] -= acted[l][w_idx][key_idx].clone();
                        // - sum_m c[k][l][m] Y_m
                        for m_i in 0..n_gens {
                            let c = &basis.constants[k][l][m_i];
                            if !c.is_zero() {
                                let contrib = c * &coords_matrix_entry(&closure, w_idx, &keys, key_idx);
                                row[m_i * dim + w_idx] -= contrib;
                            }
                        }
                    }
                    rows.push(row);
                    rhs.push(target[key_idx].clone());
                }
            }
        }
        let solution = RatMat::from_rows(rows).solve(&rhs).ok_or_else(|| {
            KernelError::InconsistentSystem {
                context: context.into(),
                degree,
                component: "invariant part of the 2-cocycle".into(),
            }
        })?;
        for k in 0..n_gens {
            for (w_idx, w) in closure.iter().enumerate() {
                let c = &solution[k * dim + w_idx];
                if !c.is_zero() {
                    y[k] = y[k].add(&w.scale(c))?;
                }
            }
        }
    }

    // exact verification
    let achieved = ce_d1(basis, &y)?;
    for k in 0..n_gens {
        for l in k + 1..n_gens {
            if achieved.get(k, l)? != b.get(k, l)? {
                return Err(KernelError::InconsistentSystem {
                    context: context.into(),
                    degree,
                    component: format!("pair ({k}, {l}): coboundary mismatch"),
                });
            }
        }
    }
    Ok(y)
}

pub(crate) fn span_tracker_strings() -> SpanTracker<String> {
    SpanTracker::new()
}

fn cochain_coords(c: &Cochain2) -> std::collections::BTreeMap<(usize, VfKey), Rat> {
    let mut out = std::collections::BTreeMap::new();
    for (slot, v) in c.vals.iter().enumerate() {
        for (key, val) in vf_coords(v) {
            out.insert((slot, key), val);
        }
    }
    out
}

fn coords_matrix_entry(
    closure: &[VectorField],
    w_idx: usize,
    keys: &[VfKey],
    key_idx: usize,
) -> Rat {
    let coords = vf_coords(&closure[w_idx]);
    coords
        .get(&keys[key_idx])
        .cloned()
        .unwrap_or_else(Rat::zero)
}

fn solve_t_preimage(
    _basis: &LieBasis,
    rest: &Cochain2,
    apply_t: impl Fn(&Cochain2) -> Result<Cochain2>,
) -> Result<Cochain2> {
    // dependence of T on the purged cochain: constant term must be nonzero
    let mut chain: Vec<Cochain2> = vec![rest.clone()];
    let mut span: SpanTracker<(usize, VfKey)> = SpanTracker::new();
    span.insert(cochain_coords(rest));
    let dep: Vec<Rat> = loop {
        let next = apply_t(chain.last().unwrap())?;
        match span.insert(cochain_coords(&next)) {
            SpanInsert::Dependent(a) => break a,
            SpanInsert::Independent => chain.push(next),
        }
        if chain.len() > 256 {
            return Err(KernelError::Precondition(
                "cochain Krylov chain failed to terminate".into(),
            ));
        }
    };
    if dep[0].is_zero() {
        return Err(KernelError::Precondition(
            "purged cochain still meets the Casimir kernel".into(),
        ));
    }
    let m = chain.len();
    let mut coeffs = vec![Rat::zero(); m];
    coeffs[m - 1] = Rat::one() / &dep[0];
    for i in 1..m {
        coeffs[i - 1] = -&dep[i] / &dep[0];
    }
    let mut acc = Cochain2::zero(rest.n_gens, rest.vals[0].nvars(), rest.vals[0].cap());
    for (c, coeff) in chain.iter().zip(&coeffs) {
        if !coeff.is_zero() {
            acc = acc.add(&c.scale(coeff))?;
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------
// the standard orthogonal action basis
// ---------------------------------------------------------------------

/// Generators of the orthogonal algebra of `Q = 1/2 sum g_i x_i^2`
/// acting on the first `q + 1` coordinates, with their bracket table.
#[derive(Debug, Clone)]
pub struct SoActionBasis {
    pub q: usize,
    pub n: usize,
    pub cap: u32,
    /// Signed weights `g_i` (sign times scale) of `Q`'s squares.
    pub weights: Vec<Rat>,
    /// Generator index pairs `(a, b)`, `a < b <= q`, matching `basis`.
    pub pairs: Vec<(usize, usize)>,
    pub basis: LieBasis,
}

impl SoActionBasis {
    /// Builds `X_ab = g_b x_b d_a - g_a x_a d_b` for `a < b <= q` and
    /// verifies that each annihilates `Q` (exactly) and that the table
    /// closes.
    pub fn new(q: usize, n: usize, cap: u32, weights: Vec<Rat>) -> Result<SoActionBasis> {
        assert_eq!(weights.len(), q + 1);
        if weights.iter().any(|w| w.is_zero()) {
            return Err(KernelError::Precondition(
                "orthogonal action needs nonzero weights".into(),
            ));
        }
        let mut fields = Vec::new();
        let mut pairs = Vec::new();
        for a in 0..=q {
            for b in a + 1..=q {
                let mut v = VectorField::zero(n, 1, cap);
                let mut pa = TruncPoly::zero(n, cap);
                pa.add_term(Mono::var(n, b), weights[b].clone());
                v.insert_component(vec![a], pa);
                let mut pb = TruncPoly::zero(n, cap);
                pb.add_term(Mono::var(n, a), -weights[a].clone());
                v.insert_component(vec![b], pb);
                fields.push(v);
                pairs.push((a, b));
            }
        }
        let basis = LieBasis::from_fields(fields)?;
        let so = SoActionBasis {
            q,
            n,
            cap,
            weights,
            pairs,
            basis,
        };
        let quadric = so.quadric();
        for f in &so.basis.fields {
            let lq = crate::tensor::lie_derivative_poly(f, &quadric)?;
            if !lq.is_zero() {
                return Err(KernelError::Precondition(
                    "action generator does not annihilate the quadric".into(),
                ));
            }
        }
        Ok(so)
    }

    /// The preserved quadric `Q = 1/2 sum g_i x_i^2`.
    pub fn quadric(&self) -> TruncPoly {
        let mut quad = TruncPoly::zero(self.n, self.cap);
        for (i, g) in self.weights.iter().enumerate() {
            let mut e = vec![0u32; self.n];
            e[i] = 2;
            quad.add_term(Mono::new(&e), g / rat(2));
        }
        quad
    }
}
