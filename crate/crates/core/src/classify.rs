//! Integrability testing and classification of linear Nambu structures.
//!
//! A linear Nambu structure falls into one of two normal-form families:
//! Type 1, dual to `dx_{q+2} ^ ... ^ dx_n ^ dQ` for a quadratic `Q`, and
//! Type 2, a constant decomposable `(q-1)`-vector wedged with a linear
//! vector field. `classify_linear` decides the family, produces the
//! discrete data, and returns a linear coordinate change that pushes the
//! input onto the exact normal-form tensor. That reproduction is checked
//! before returning, so every successful answer is self-certifying; when
//! no candidate certifies, the call fails rather than guessing.

use crate::error::{KernelError, Result};
use crate::linalg::{congruence_diagonalize, inertia, RatMat};
use crate::polymap::PolyMap;
use crate::polyring::{Mono, TruncPoly};
use crate::rat::{rat, squarefree_part, Rat};
use crate::tensor::{increasing_tuples, Alt, DiffForm, IdxTuple, Multivector, Variance};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Which exact identity an integrability witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCondition {
    /// `(A _| w) ^ w != 0` for the recorded constant multivector `A`.
    DecomposabilityWedge,
    /// `(A _| w) ^ dw != 0` for the recorded constant multivector `A`.
    IntegrabilityWedge,
    /// `P ^ P != 0` (order-2 structures only).
    SelfWedge,
    /// `[P, P] != 0` (order-2 structures only).
    SelfBracket,
}

/// Concrete evidence of non-integrability: the violated identity, the
/// contraction tuple `A` (1-based, empty for the self conditions), the
/// first nonzero component of the residual, and its value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegrabilityWitness {
    pub condition: WitnessCondition,
    pub contraction: Vec<usize>,
    pub component: Vec<usize>,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub witness: Option<IntegrabilityWitness>,
}

fn one_based(idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|&i| i + 1).collect()
}

fn witness_from<V: Variance>(
    condition: WitnessCondition,
    contraction: &[usize],
    residual: &Alt<V>,
) -> IntegrabilityReport {
    let (idx, p) = residual.components().next().expect("nonzero residual");
    IntegrabilityReport {
        integrable: false,
        witness: Some(IntegrabilityWitness {
            condition,
            contraction: one_based(contraction),
            component: one_based(idx),
            residual: crate::textio::format_poly(p),
        }),
    }
}

/// Tests the integrability (Nambu) condition on a polynomial
/// multivector, exactly, through the reliable truncation degrees.
///
/// The check runs on the dual form `w`: for every constant basis
/// `(p-1)`-vector `A` (`p = n - q`), both `(A _| w) ^ w` and
/// `(A _| w) ^ dw` must vanish. The second identity is asserted through
/// degree `cap - 1` because the exterior derivative costs one reliable
/// degree. Order-2 structures additionally need `P ^ P = 0` and
/// `[P, P] = 0` (through `cap - 1`), which pins rank at most 2. A
/// structure of order `q = n` is always integrable.
pub fn is_nambu(pi: &Multivector) -> Result<IntegrabilityReport> {
    let q = pi.degree();
    let n = pi.nvars();
    let cap = pi.cap();
    if q < 1 || q > n {
        return Err(KernelError::Degree(format!(
            "tensor order {q} outside 1..={n}"
        )));
    }
    if cap < 2 {
        return Err(KernelError::InsufficientTruncation {
            cap,
            reason: "the integrability identities are vacuous below cap 2".into(),
        });
    }

    if q == 2 {
        let ww = pi.wedge(pi)?;
        if !ww.is_zero() {
            return Ok(witness_from(WitnessCondition::SelfWedge, &[], &ww));
        }
        let bracket = pi.schouten(pi)?.truncate_degree(cap - 1);
        if !bracket.is_zero() {
            return Ok(witness_from(WitnessCondition::SelfBracket, &[], &bracket));
        }
    }
    let p_deg = n - q;
    if p_deg == 0 {
        return Ok(IntegrabilityReport {
            integrable: true,
            witness: None,
        });
    }
    let omega = pi.dual_form();
    let d_omega = omega.ext_d()?;
    for a_idx in increasing_tuples(n, p_deg - 1) {
        let a = Multivector::basis(n, cap, &a_idx);
        let contracted = a.contract_into_form(&omega)?;
        let wedge_w = contracted.wedge(&omega)?;
        if !wedge_w.is_zero() {
            return Ok(witness_from(
                WitnessCondition::DecomposabilityWedge,
                &a_idx,
                &wedge_w,
            ));
        }
        let wedge_dw = contracted.wedge(&d_omega)?.truncate_degree(cap - 1);
        if !wedge_dw.is_zero() {
            return Ok(witness_from(
                WitnessCondition::IntegrabilityWedge,
                &a_idx,
                &wedge_dw,
            ));
        }
    }
    Ok(IntegrabilityReport {
        integrable: true,
        witness: None,
    })
}

/// Classification record for a linear Nambu structure.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearNormalForm {
    Type1 {
        q: usize,
        n: usize,
        /// Number of square terms in `Q`.
        r: usize,
        /// Number of hyperbolic cross terms in `Q`.
        s: usize,
        /// Signs of the `r` squares followed by the `s` cross terms.
        signs: Vec<i8>,
        /// Positive squarefree integer scale of each square term; over
        /// the rationals a square can only be normalized up to a square
        /// factor, so `Q = 1/2 sum_j signs[j] scales[j] x_j^2 + cross`.
        scales: Vec<Rat>,
        /// Inertia `(n_plus, n_minus)` of `Q`.
        signature: (usize, usize),
        nondegenerate: bool,
        elliptic: bool,
        hyperbolic: bool,
        /// Signature is `(*, 2)` or `(2, *)`.
        excluded_signature: bool,
    },
    Type2 {
        q: usize,
        n: usize,
        /// Coefficient matrix of the linear vector field over
        /// `x_q..x_n`: entry `[i][j]` multiplies `x_{q+i}` in the
        /// `d/dx_{q+j}` component (both indices zero-based here).
        b: Vec<Vec<Rat>>,
        /// `b` is invertible.
        nondegenerate: bool,
    },
}

impl LinearNormalForm {
    /// Reconstructs the exact normal-form tensor this record describes.
    pub fn normal_tensor(&self, cap: u32) -> Multivector {
        match self {
            LinearNormalForm::Type1 {
                q, n, r, s, signs, scales, ..
            } => {
                let (q, n) = (*q, *n);
                let mut quad = TruncPoly::zero(n, cap);
                for j in 0..*r {
                    let mut e = vec![0u32; n];
                    e[j] = 2;
                    let c = Rat::new(signs[j].into(), 2.into()) * &scales[j];
                    quad.add_term(Mono::new(&e), c);
                }
                for j in 0..*s {
                    let mut e = vec![0u32; n];
                    e[r + j] = 1;
                    e[q + 1 + j] = 1;
                    quad.add_term(Mono::new(&e), rat(signs[r + j] as i64));
                }
                let dq = crate::tensor::d_of_poly(&quad).expect("derivative in range");
                let prefix: Vec<usize> = (q + 1..n).collect();
                let theta = DiffForm::basis(n, cap, &prefix);
                theta.wedge(&dq).expect("same shape").dual_mv()
            }
            LinearNormalForm::Type2 { q, n, b, .. } => {
                let (q, n) = (*q, *n);
                let mut v = Multivector::zero(n, 1, cap);
                for (bi, row) in b.iter().enumerate() {
                    for (bj, coeff) in row.iter().enumerate() {
                        if !coeff.is_zero() {
                            let mut p = TruncPoly::zero(n, cap);
                            p.add_term(Mono::var(n, q - 1 + bi), coeff.clone());
                            let mut term = Multivector::zero(n, 1, cap);
                            term.insert_component(vec![q - 1 + bj], p);
                            v = v.add(&term).expect("same shape");
                        }
                    }
                }
                if q == 1 {
                    v
                } else {
                    let cvec: Vec<usize> = (0..q - 1).collect();
                    Multivector::basis(n, cap, &cvec)
                        .wedge(&v)
                        .expect("same shape")
                }
            }
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            LinearNormalForm::Type1 { .. } => "type1",
            LinearNormalForm::Type2 { .. } => "type2",
        }
    }

    /// The `(q, n)` pair of the classified tensor.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            LinearNormalForm::Type1 { q, n, .. } | LinearNormalForm::Type2 { q, n, .. } => (*q, *n),
        }
    }
}

/// Exact Sylvester inertia `(n_plus, n_zero, n_minus)` of a symmetric
/// rational matrix, by congruence diagonalization.
pub fn signature(m: &RatMat) -> Result<(usize, usize, usize)> {
    if m.rows != m.cols {
        return Err(KernelError::Precondition(
            "signature needs a square matrix".into(),
        ));
    }
    for i in 0..m.rows {
        for j in i + 1..m.cols {
            if m[(i, j)] != m[(j, i)] {
                return Err(KernelError::Precondition(format!(
                    "matrix not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(inertia(m))
}

/// Kernel of `u -> u ^ P` over constant vectors `u`.
fn wedge_annihilator(pi: &Multivector) -> Vec<Vec<Rat>> {
    let n = pi.nvars();
    let cap = pi.cap();
    let per_var: Vec<Multivector> = (0..n)
        .map(|i| Multivector::basis(n, cap, &[i]).wedge(pi).expect("shape"))
        .collect();
    annihilator_rows(n, pi.degree() + 1, &per_var)
}

/// Kernel of `xi -> xi ^ w` over constant covectors `xi`.
fn form_wedge_annihilator(omega: &DiffForm) -> Vec<Vec<Rat>> {
    let n = omega.nvars();
    let cap = omega.cap();
    let per_var: Vec<DiffForm> = (0..n)
        .map(|i| DiffForm::basis(n, cap, &[i]).wedge(omega).expect("shape"))
        .collect();
    annihilator_rows(n, omega.degree() + 1, &per_var)
}

fn annihilator_rows<V: Variance>(n: usize, out_degree: usize, per_var: &[Alt<V>]) -> Vec<Vec<Rat>> {
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for out_idx in increasing_tuples(n, out_degree) {
        let mut monos = std::collections::BTreeSet::new();
        for t in per_var {
            for (m, _) in t.component(&out_idx).terms() {
                monos.insert(m.clone());
            }
        }
        for m in monos {
            rows.push(
                per_var
                    .iter()
                    .map(|t| t.component(&out_idx).coeff(&m))
                    .collect(),
            );
        }
    }
    if rows.is_empty() {
        rows.push(vec![Rat::zero(); n]);
    }
    RatMat::from_rows(rows).kernel_basis()
}

/// Completes independent vectors to a basis with unit vectors, tried in
/// index order; returns the basis as matrix columns.
fn complete_basis(vectors: &[Vec<Rat>], n: usize) -> RatMat {
    let mut chosen: Vec<Vec<Rat>> = vectors.to_vec();
    for i in 0..n {
        if chosen.len() == n {
            break;
        }
        let mut unit = vec![Rat::zero(); n];
        unit[i] = Rat::one();
        let mut trial = chosen.clone();
        trial.push(unit);
        if RatMat::from_rows(trial.clone()).rank() == trial.len() {
            chosen = trial;
        }
    }
    assert_eq!(chosen.len(), n, "vectors could not be completed to a basis");
    RatMat::from_rows(chosen).transpose()
}

/// Classifies a homogeneous linear multivector into its Type 1 / Type 2
/// normal form. Returns the record and a linear invertible map whose
/// pushforward carries the input exactly onto
/// [`LinearNormalForm::normal_tensor`].
///
/// Type 2 takes priority in the overlap cases (a divisor exists); the
/// Type 1 route factors the dual form through its constant annihilator
/// and diagonalizes the recovered quadratic over the rationals.
pub fn classify_linear(pi: &Multivector) -> Result<(LinearNormalForm, PolyMap)> {
    if pi.is_zero() {
        return Err(KernelError::NotLinear(
            "the zero tensor has no linear normal form".into(),
        ));
    }
    if !pi.is_linear() {
        return Err(KernelError::NotLinear(
            "classification needs homogeneous linear components".into(),
        ));
    }
    if let Some(result) = try_type2(pi)? {
        return Ok(result);
    }
    if let Some(result) = try_type1(pi)? {
        return Ok(result);
    }
    Err(KernelError::ClassificationFailure(
        "no linear normal form reproduces the input; the tensor is not a linear Nambu structure"
            .into(),
    ))
}

fn certify(pi: &Multivector, form: &LinearNormalForm, map: &PolyMap) -> Result<bool> {
    Ok(pi.pushforward(map)? == form.normal_tensor(pi.cap()))
}

fn try_type2(pi: &Multivector) -> Result<Option<(LinearNormalForm, PolyMap)>> {
    let q = pi.degree();
    let n = pi.nvars();
    let cap = pi.cap();
    if q == 1 {
        // vector fields are Type 2 by definition
        let b: Vec<Vec<Rat>> = (0..n)
            .map(|i| (0..n).map(|j| pi.component(&[j]).linear_coeff(i)).collect())
            .collect();
        let nondegenerate = RatMat::from_rows(b.clone()).inverse().is_some();
        let form = LinearNormalForm::Type2 {
            q,
            n,
            b,
            nondegenerate,
        };
        return Ok(Some((form, PolyMap::identity(n, cap))));
    }
    let kernel = wedge_annihilator(pi);
    if kernel.len() < q - 1 {
        return Ok(None);
    }
    if kernel.len() > q {
        return Err(KernelError::ClassificationFailure(
            "wedge annihilator larger than the tensor order allows".into(),
        ));
    }
    let basis = complete_basis(&kernel, n);
    let m = basis.inverse().expect("completed basis is invertible");
    let map0 = PolyMap::linear(&m, cap)?;
    let moved = pi.pushforward(&map0)?;
    if kernel.len() == q {
        finish_type2_scalar_times_volume(pi, &moved, map0)
    } else {
        finish_type2_divisible(pi, &moved, map0)
    }
}

/// Case `P = f . (d_1 ^ ... ^ d_q)` with `f` linear: rotate inside the
/// divisor block so `f` pairs with the vector-field slot alone.
fn finish_type2_scalar_times_volume(
    original: &Multivector,
    moved: &Multivector,
    map0: PolyMap,
) -> Result<Option<(LinearNormalForm, PolyMap)>> {
    let q = moved.degree();
    let n = moved.nvars();
    let cap = moved.cap();
    let volume: Vec<usize> = (0..q).collect();
    for (idx, _) in moved.components() {
        if *idx != volume {
            return Err(KernelError::ClassificationFailure(
                "kernel-adapted tensor has components outside its volume block".into(),
            ));
        }
    }
    let f = moved.component(&volume);
    let block: Vec<Rat> = (0..q).map(|i| f.linear_coeff(i)).collect();
    let mut basis_cols: Vec<Vec<Rat>> = Vec::new();
    if block.iter().any(|c| !c.is_zero()) {
        // the scalar pairs inside the block: kernel directions first,
        // then a vector on which f equals one, landing in slot q-1
        let row = RatMat::from_rows(vec![block.clone()]);
        for v in row.kernel_basis() {
            let mut col = vec![Rat::zero(); n];
            col[..q].clone_from_slice(&v);
            basis_cols.push(col);
        }
        let pivot = block.iter().position(|c| !c.is_zero()).unwrap();
        let mut col = vec![Rat::zero(); n];
        col[pivot] = Rat::one() / block[pivot].clone();
        basis_cols.push(col);
    } else {
        for i in 0..q {
            let mut col = vec![Rat::zero(); n];
            col[i] = Rat::one();
            basis_cols.push(col);
        }
    }
    let basis = complete_basis(&basis_cols, n);
    let m1 = basis.inverse().expect("invertible");
    let map = PolyMap::linear(&m1, cap)?.compose(&map0)?;
    let final_t = original.pushforward(&map)?;
    let fq = final_t.component(&volume);
    if (0..q - 1).any(|i| !fq.linear_coeff(i).is_zero()) {
        return Err(KernelError::ClassificationFailure(
            "scalar factor still depends on the divisor block".into(),
        ));
    }
    let mut b = vec![vec![Rat::zero(); n - q + 1]; n - q + 1];
    for i in q - 1..n {
        b[i - (q - 1)][0] = fq.linear_coeff(i);
    }
    let nondegenerate = RatMat::from_rows(b.clone()).inverse().is_some();
    let form = LinearNormalForm::Type2 {
        q,
        n,
        b,
        nondegenerate,
    };
    if certify(original, &form, &map)? {
        Ok(Some((form, map)))
    } else {
        Err(KernelError::ClassificationFailure(
            "scalar-times-volume candidate failed the pushforward contract".into(),
        ))
    }
}

/// Case `dim K = q - 1`: verify divisibility in adapted coordinates and
/// read off the vector-field matrix.
fn finish_type2_divisible(
    original: &Multivector,
    moved: &Multivector,
    map0: PolyMap,
) -> Result<Option<(LinearNormalForm, PolyMap)>> {
    let q = moved.degree();
    let n = moved.nvars();
    let divisor: Vec<usize> = (0..q - 1).collect();
    for (idx, _) in moved.components() {
        if !divisor.iter().all(|i| idx.contains(i)) {
            return Ok(None); // not divisible: leave it to the Type 1 route
        }
    }
    let mut b = vec![vec![Rat::zero(); n - q + 1]; n - q + 1];
    for j in q - 1..n {
        let mut idx = divisor.clone();
        idx.push(j);
        let vj = moved.component(&idx);
        for i in 0..n {
            let c = vj.linear_coeff(i);
            if c.is_zero() {
                continue;
            }
            if i < q - 1 {
                // the field component depends on a divisor direction; a
                // genuine Nambu input never does
                return Ok(None);
            }
            b[i - (q - 1)][j - (q - 1)] = c;
        }
    }
    let nondegenerate = RatMat::from_rows(b.clone()).inverse().is_some();
    let form = LinearNormalForm::Type2 {
        q,
        n,
        b,
        nondegenerate,
    };
    if certify(original, &form, &map0)? {
        Ok(Some((form, map0)))
    } else {
        Ok(None)
    }
}

struct QuadraticData {
    /// Symmetric block of `Q` over the core variables `x_1..x_{q+1}`.
    core: RatMat,
    /// Cross coefficients: rows are core variables, columns transverse.
    cross: RatMat,
}

/// Reads `Q`'s coefficients out of a prefix-adapted dual form
/// `w = dx_{q+2} ^ ... ^ dx_n ^ dQ`, or reports why the shape is wrong.
fn extract_quadratic(omega: &DiffForm, q: usize) -> Result<QuadraticData> {
    let n = omega.nvars();
    let prefix: Vec<usize> = (q + 1..n).collect();
    for (idx, _) in omega.components() {
        if !prefix.iter().all(|p| idx.contains(p)) {
            return Err(KernelError::ClassificationFailure(
                "dual form does not factor through the constant prefix".into(),
            ));
        }
    }
    let sign_neg = prefix.len() % 2 == 1;
    let mut core = RatMat::zeros(q + 1, q + 1);
    let mut cross = RatMat::zeros(q + 1, n - q - 1);
    for i in 0..=q {
        let mut idx = vec![i];
        idx.extend_from_slice(&prefix);
        let comp = omega.component(&idx);
        let eta_i = if sign_neg { comp.neg() } else { comp };
        for j in 0..n {
            let c = eta_i.linear_coeff(j);
            if j <= q {
                core[(i, j)] = c;
            } else {
                cross[(i, j - q - 1)] = c;
            }
        }
    }
    for i in 0..=q {
        for j in i + 1..=q {
            if core[(i, j)] != core[(j, i)] {
                return Err(KernelError::ClassificationFailure(format!(
                    "extracted 1-form is not closed: coefficient mismatch at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(QuadraticData { core, cross })
}

fn try_type1(pi: &Multivector) -> Result<Option<(LinearNormalForm, PolyMap)>> {
    let q = pi.degree();
    let n = pi.nvars();
    let cap = pi.cap();
    if q + 1 > n {
        return Ok(None);
    }
    let omega = pi.dual_form();
    let w_basis = form_wedge_annihilator(&omega);
    if w_basis.len() != n - q - 1 {
        return Err(KernelError::ClassificationFailure(format!(
            "constant annihilator of the dual form has dimension {}, expected {}",
            w_basis.len(),
            n - q - 1
        )));
    }
    // covectors transform by the rows of the map matrix: put the
    // annihilator basis in rows q+2..n, complete the top with units
    let mut chosen: Vec<Vec<Rat>> = Vec::new();
    for i in 0..n {
        if chosen.len() == q + 1 {
            break;
        }
        let mut unit = vec![Rat::zero(); n];
        unit[i] = Rat::one();
        let mut trial: Vec<Vec<Rat>> = w_basis.clone();
        trial.extend(chosen.iter().cloned());
        trial.push(unit.clone());
        if RatMat::from_rows(trial).rank() == w_basis.len() + chosen.len() + 1 {
            chosen.push(unit);
        }
    }
    if chosen.len() != q + 1 {
        return Err(KernelError::ClassificationFailure(
            "could not complete the dual-form annihilator to a coframe".into(),
        ));
    }
    let mut rows = chosen;
    rows.extend(w_basis.iter().cloned());
    let map0 = PolyMap::linear(&RatMat::from_rows(rows), cap)?;

    // diagonalize the core block of the recovered quadratic
    let quad0 = extract_quadratic(&pi.pushforward(&map0)?.dual_form(), q)?;
    let (s_core, _) = congruence_diagonalize(&quad0.core);
    let mut s_full = RatMat::identity(n);
    for i in 0..=q {
        for j in 0..=q {
            s_full[(i, j)] = s_core[(i, j)].clone();
        }
    }
    let map1 = PolyMap::linear(
        &s_full.inverse().expect("congruence matrix is invertible"),
        cap,
    )?
    .compose(&map0)?;
    let quad1 = extract_quadratic(&pi.pushforward(&map1)?.dual_form(), q)?;

    // absorb cross terms attached to nonzero diagonal entries by
    // completing the square; the transverse-only remainder of Q is
    // invisible in the dual form, so the shear is exact
    let mut shear = RatMat::identity(n);
    let mut has_shear = false;
    for i in 0..=q {
        let d = quad1.core[(i, i)].clone();
        if d.is_zero() {
            continue;
        }
        for t in 0..n - q - 1 {
            let c = &quad1.cross[(i, t)];
            if !c.is_zero() {
                shear[(i, q + 1 + t)] = c / &d;
                has_shear = true;
            }
        }
    }
    let (map2, quad2) = if has_shear {
        let map2 = PolyMap::linear(&shear, cap)?.compose(&map1)?;
        let quad2 = extract_quadratic(&pi.pushforward(&map2)?.dual_form(), q)?;
        (map2, quad2)
    } else {
        (map1, quad1)
    };
    finish_type1(pi, q, n, cap, map2, &quad2)
}

/// Orders, rescales, and certifies the diagonalized quadratic data.
///
/// Over the rationals the diagonal of `Q` can only be normalized up to
/// square factors, and every core rescaling feeds its Jacobian
/// determinant back into the extracted quadratic, so full squarefree
/// normalization is unreachable in general (the product of the entries
/// is invariant modulo squares). The deterministic canonical form used
/// here: one squarefree-reduction round per square variable, leaving a
/// common positive factor, which a uniform core scaling then reduces
/// modulo `(q-1)`-th powers; cross terms are normalized to exactly `+1`
/// by re-reading their rows and absorbing them into the transverse
/// coordinates. Every candidate is certified by reproducing the
/// normal-form tensor exactly.
fn finish_type1(
    original: &Multivector,
    q: usize,
    n: usize,
    cap: u32,
    map_in: PolyMap,
    quad: &QuadraticData,
) -> Result<Option<(LinearNormalForm, PolyMap)>> {
    let n_prefix = n - q - 1;
    let diag: Vec<Rat> = (0..=q).map(|i| quad.core[(i, i)].clone()).collect();
    let square_vars: Vec<usize> = (0..=q).filter(|&i| !diag[i].is_zero()).collect();
    let kernel_vars: Vec<usize> = (0..=q).filter(|&i| diag[i].is_zero()).collect();
    let r = square_vars.len();
    for &i in &square_vars {
        for t in 0..n_prefix {
            if !quad.cross[(i, t)].is_zero() {
                return Err(KernelError::ClassificationFailure(
                    "cross terms survive on a square variable after shearing".into(),
                ));
            }
        }
    }
    let cross_rows: Vec<(usize, Vec<Rat>)> = kernel_vars
        .iter()
        .map(|&i| {
            (
                i,
                (0..n_prefix).map(|t| quad.cross[(i, t)].clone()).collect(),
            )
        })
        .filter(|(_, row): &(usize, Vec<Rat>)| row.iter().any(|c| !c.is_zero()))
        .collect();
    let s = cross_rows.len();
    if s > 0 {
        let mat = RatMat::from_rows(cross_rows.iter().map(|(_, r)| r.clone()).collect());
        if mat.rank() != s || s > n_prefix.min(q + 1 - r) {
            return Err(KernelError::ClassificationFailure(
                "degenerate cross-term pattern outside the Type 1 family".into(),
            ));
        }
    }

    let core_inertia = inertia(&quad.core);
    // Negating one square coordinate realizes a global sign flip of Q
    // (the dual form picks up the Jacobian determinant); prefer the
    // orientation with at least as many plus signs as minus signs.
    let flip_order: &[bool] = if r == 0 {
        &[false]
    } else if core_inertia.0 >= core_inertia.2 {
        &[false, true]
    } else {
        &[true, false]
    };
    'orientation: for &flip in flip_order {
        // stage A: reorder squares (positive first after the optional
        // flip), one squarefree-reduction round, cross and absent
        // variables after the squares
        let mut squares: Vec<(usize, Rat)> = square_vars
            .iter()
            .map(|&i| {
                let d = if flip { -diag[i].clone() } else { diag[i].clone() };
                (i, d)
            })
            .collect();
        squares.sort_by_key(|(i, d)| (d.is_negative(), *i));
        let mut predicted_m: Vec<Rat> = Vec::new();
        let mut predicted_sign: Vec<i8> = Vec::new();
        let mut t_cols: Vec<Vec<Rat>> = Vec::new();
        for (i, d) in &squares {
            // d = sign * m * l^2: mapping y = l * x turns the achieved
            // entry into sign * m * (product of all l), the common
            // factor being the Jacobian determinant feeding back
            let (m_sf, l) = squarefree_part(&d.abs());
            predicted_sign.push(if d.is_negative() { -1 } else { 1 });
            predicted_m.push(m_sf);
            let mut col = vec![Rat::zero(); n];
            col[*i] = Rat::one() / l;
            t_cols.push(col);
        }
        for (i, _) in &cross_rows {
            let mut col = vec![Rat::zero(); n];
            col[*i] = Rat::one();
            t_cols.push(col);
        }
        for &i in &kernel_vars {
            if cross_rows.iter().any(|(j, _)| *j == i) {
                continue;
            }
            let mut col = vec![Rat::zero(); n];
            col[i] = Rat::one();
            t_cols.push(col);
        }
        debug_assert_eq!(t_cols.len(), q + 1);
        let mut core_mat = RatMat::identity(n);
        for (new_idx, col) in t_cols.iter().enumerate() {
            for i in 0..=q {
                core_mat[(i, new_idx)] = col[i].clone();
            }
        }
        let Some(mut stage_a) = core_mat.inverse() else {
            continue;
        };
        if flip {
            for j in 0..n {
                stage_a[(0, j)] = -stage_a[(0, j)].clone();
            }
        }
        let map_a = PolyMap::linear(&stage_a, cap)?.compose(&map_in)?;
        let quad_a = extract_quadratic(&original.pushforward(&map_a)?.dual_form(), q)?;

        // stage C: the residual common factor kappa, reduced modulo
        // (q-1)-th powers by a uniform scaling of all core variables
        let map_c = if r > 0 {
            let first = quad_a.core[(0, 0)].clone();
            if first.is_zero() {
                continue;
            }
            let kappa = first.abs() / &predicted_m[0];
            for (j, m) in predicted_m.iter().enumerate() {
                let expect = m * &kappa * rat(predicted_sign[j] as i64);
                if quad_a.core[(j, j)] != expect {
                    continue 'orientation;
                }
            }
            let mu = kappa_reduction(&kappa, q);
            if mu.is_one() {
                map_a.clone()
            } else {
                let mut scale = RatMat::identity(n);
                for i in 0..=q {
                    scale[(i, i)] = Rat::one() / &mu;
                }
                PolyMap::linear(&scale, cap)?.compose(&map_a)?
            }
        } else {
            map_a.clone()
        };
        let quad_c = extract_quadratic(&original.pushforward(&map_c)?.dual_form(), q)?;

        // stage B: transverse covectors absorbing the achieved cross rows
        let mut prefix_rows: Vec<Vec<Rat>> = Vec::new();
        for j in 0..s {
            let row: Vec<Rat> = (0..n_prefix).map(|t| quad_c.cross[(r + j, t)].clone()).collect();
            if row.iter().all(|c| c.is_zero()) {
                continue 'orientation;
            }
            prefix_rows.push(row);
        }
        if s > 0 && RatMat::from_rows(prefix_rows.clone()).rank() != s {
            continue 'orientation;
        }
        for i in 0..n_prefix {
            if prefix_rows.len() == n_prefix {
                break;
            }
            let mut unit = vec![Rat::zero(); n_prefix];
            unit[i] = Rat::one();
            let mut trial = prefix_rows.clone();
            trial.push(unit);
            if RatMat::from_rows(trial.clone()).rank() == trial.len() {
                prefix_rows = trial;
            }
        }
        if prefix_rows.len() != n_prefix {
            continue;
        }
        let mut stage_b = RatMat::identity(n);
        for (t, row) in prefix_rows.iter().enumerate() {
            for j in 0..n {
                stage_b[(q + 1 + t, j)] = Rat::zero();
            }
            for (u, c) in row.iter().enumerate() {
                stage_b[(q + 1 + t, q + 1 + u)] = c.clone();
            }
        }
        let Ok(map_b) = PolyMap::linear(&stage_b, cap) else {
            continue;
        };
        let map = map_b.compose(&map_c)?;

        // read the achieved record and certify
        let quad_final = extract_quadratic(&original.pushforward(&map)?.dual_form(), q)?;
        let mut signs: Vec<i8> = Vec::new();
        let mut scales: Vec<Rat> = Vec::new();
        for j in 0..r {
            let a = quad_final.core[(j, j)].clone();
            if a.is_zero() {
                continue 'orientation;
            }
            signs.push(if a.is_negative() { -1 } else { 1 });
            scales.push(a.abs());
        }
        for _ in 0..s {
            signs.push(1);
        }
        let signature = if flip {
            (core_inertia.2 + s, core_inertia.0 + s)
        } else {
            (core_inertia.0 + s, core_inertia.2 + s)
        };
        let nondegenerate = r == q + 1;
        let elliptic = nondegenerate && (signature.0 == 0 || signature.1 == 0);
        let form = LinearNormalForm::Type1 {
            q,
            n,
            r,
            s,
            signs,
            scales,
            signature,
            nondegenerate,
            elliptic,
            hyperbolic: nondegenerate && !elliptic,
            excluded_signature: signature.0 == 2 || signature.1 == 2,
        };
        if certify(original, &form, &map)? {
            return Ok(Some((form, map)));
        }
    }
    Err(KernelError::ClassificationFailure(
        "no orientation of the diagonalized form certifies against the input".into(),
    ))
}

/// The uniform core scaling `mu` reducing `kappa * mu^(1-q)` to the
/// canonical representative of `kappa` modulo `(q-1)`-th powers (prime
/// exponents folded into `0..q-1`).
fn kappa_reduction(kappa: &Rat, q: usize) -> Rat {
    use num_bigint::BigInt;
    let step = (q - 1) as i64;
    let mut mu = Rat::one();
    let mut factor = |p: &BigInt, e: i64| {
        // want e' = e mod step in 0..step: mu exponent = (e' - e) / (1 - q)
        let e_canon = e.rem_euclid(step);
        let mu_exp = (e - e_canon) / step;
        let mut powed = Rat::one();
        let base = Rat::from_integer(p.clone());
        for _ in 0..mu_exp.unsigned_abs() {
            powed *= &base;
        }
        if mu_exp >= 0 {
            mu *= powed;
        } else {
            mu /= powed;
        }
    };
    let mut num = kappa.numer().clone();
    let mut den = kappa.denom().clone();
    let mut p = BigInt::from(2);
    while (&p) * (&p) <= num.clone() * &den {
        let mut e = 0i64;
        while (&num % &p).is_zero() {
            num /= &p;
            e += 1;
        }
        while (&den % &p).is_zero() {
            den /= &p;
            e -= 1;
        }
        if e != 0 {
            factor(&p, e);
        }
        p += 1;
    }
    if num > BigInt::one() {
        factor(&num.clone(), 1);
    }
    if den > BigInt::one() {
        factor(&den.clone(), -1);
    }
    mu
}

/// Verifies that the common zero locus of the linear part is the
/// expected `(n - q - 1)`-dimensional subspace and returns a basis of
/// its tangent space at the origin.
///
/// Preconditions: the tensor vanishes at the origin and its linear part
/// classifies as nondegenerate Type 1.
pub fn singular_locus_check(pi: &Multivector) -> Result<(bool, Vec<Vec<Rat>>)> {
    let n = pi.nvars();
    let q = pi.degree();
    if !pi.truncate_degree(0).is_zero() {
        return Err(KernelError::Precondition(
            "the tensor must vanish at the origin".into(),
        ));
    }
    let linear = pi.homogeneous_part(1);
    match classify_linear(&linear)? {
        (LinearNormalForm::Type1 { nondegenerate: true, .. }, _) => {}
        (LinearNormalForm::Type1 { .. }, _) => {
            return Err(KernelError::Precondition(
                "linear part is a degenerate Type 1 structure".into(),
            ));
        }
        (LinearNormalForm::Type2 { .. }, _) => {
            return Err(KernelError::Precondition(
                "linear part classifies as Type 2".into(),
            ));
        }
    }
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for (_, p) in linear.components() {
        rows.push((0..n).map(|j| p.linear_coeff(j)).collect());
    }
    let kernel = RatMat::from_rows(rows).kernel_basis();
    Ok((kernel.len() == n - q - 1, kernel))
}

/// The index tuples of a degree, exposed for witness construction in
/// diagnostics and tests.
pub fn basis_tuples(n: usize, k: usize) -> Vec<IdxTuple> {
    increasing_tuples(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn x(n: usize, cap: u32, i: usize) -> TruncPoly {
        TruncPoly::var(n, cap, i)
    }

    /// `sum_j (-1)^{j+1} x_j d_1 ^ .. ^ (skip j) ^ .. ^ d_{q+1}` in
    /// `n = q + 1` variables: the Euler-type elliptic tensor.
    fn euler_tensor(q: usize, cap: u32) -> Multivector {
        let n = q + 1;
        let mut t = Multivector::zero(n, q, cap);
        for j in 0..n {
            let idx: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            t.insert_component(idx, x(n, cap, j).scale(&rat(sign)));
        }
        t
    }

    #[test]
    fn constant_decomposable_is_integrable() {
        for (q, n) in [(1, 3), (2, 4), (3, 5), (2, 2)] {
            let idx: Vec<usize> = (0..q).collect();
            let pi = Multivector::basis(n, 4, &idx);
            assert!(is_nambu(&pi).unwrap().integrable, "q={q} n={n}");
        }
    }

    #[test]
    fn symplectic_sum_is_not_integrable() {
        let n = 4;
        let a = Multivector::basis(n, 4, &[0, 1]);
        let b = Multivector::basis(n, 4, &[2, 3]);
        let pi = a.add(&b).unwrap();
        let report = is_nambu(&pi).unwrap();
        assert!(!report.integrable);
        let w = report.witness.unwrap();
        assert_eq!(w.condition, WitnessCondition::SelfWedge);
        assert_eq!(w.component, vec![1, 2, 3, 4]);
    }

    #[test]
    fn euler_tensors_are_integrable() {
        for q in 2..=4 {
            let pi = euler_tensor(q, 4);
            assert!(is_nambu(&pi).unwrap().integrable, "q={q}");
        }
    }

    #[test]
    fn pushforward_preserves_integrability() {
        let n = 3;
        let cap = 6;
        let pi = euler_tensor(2, cap);
        let phi = PolyMap::new(vec![
            x(n, cap, 0).add(&x(n, cap, 1).pow(2)).unwrap(),
            x(n, cap, 1),
            x(n, cap, 2).sub(&x(n, cap, 0).mul(&x(n, cap, 1)).unwrap()).unwrap(),
        ])
        .unwrap();
        let moved = pi.pushforward(&phi).unwrap();
        assert!(is_nambu(&moved).unwrap().integrable);
    }

    #[test]
    fn classify_euler_is_elliptic_type1() {
        for q in 2..=3 {
            let pi = euler_tensor(q, 4);
            let (form, map) = classify_linear(&pi).unwrap();
            match &form {
                LinearNormalForm::Type1 {
                    r,
                    s,
                    signs,
                    scales,
                    nondegenerate,
                    elliptic,
                    ..
                } => {
                    assert_eq!(*r, q + 1);
                    assert_eq!(*s, 0);
                    assert!(*nondegenerate);
                    assert!(*elliptic, "q={q} signs={signs:?}");
                    assert!(signs.iter().all(|&s| s == 1));
                    assert!(scales.iter().all(|sc| sc == &rat(1)));
                }
                other => panic!("expected Type 1, got {other:?}"),
            }
            // self-certifying contract, re-checked here explicitly
            assert_eq!(
                pi.pushforward(&map).unwrap(),
                form.normal_tensor(pi.cap())
            );
        }
    }

    #[test]
    fn classify_type2_block_field() {
        // d1 ^ ... ^ d_{q-1} ^ (x_q d_q - x_{q+1} d_{q+1}), q = 3, n = 5
        let (q, n, cap) = (3usize, 5, 4);
        let cvec: Vec<usize> = (0..q - 1).collect();
        let c = Multivector::basis(n, cap, &cvec);
        let mut v = Multivector::zero(n, 1, cap);
        v.insert_component(vec![q - 1], x(n, cap, q - 1));
        v.insert_component(vec![q], x(n, cap, q).neg());
        let pi = c.wedge(&v).unwrap();
        let (form, map) = classify_linear(&pi).unwrap();
        match &form {
            LinearNormalForm::Type2 { b, nondegenerate, .. } => {
                assert_eq!(b[0][0], rat(1));
                assert_eq!(b[1][1], rat(-1));
                assert_eq!(b[2][2], rat(0));
                assert!(!nondegenerate);
            }
            other => panic!("expected Type 2, got {other:?}"),
        }
        assert_eq!(pi.pushforward(&map).unwrap(), form.normal_tensor(cap));
    }

    #[test]
    fn classify_q1_vector_field_is_type2() {
        let n = 3;
        let mut v = Multivector::zero(n, 1, 3);
        v.insert_component(vec![0], x(n, 3, 1));
        v.insert_component(vec![1], x(n, 3, 0).neg());
        let (form, _) = classify_linear(&v).unwrap();
        assert_eq!(form.type_name(), "type2");
    }

    #[test]
    fn classify_scalar_times_volume_is_type2() {
        // x_n d1^..^dq is Type 2 (and also degenerate Type 1): Type 2 wins
        let (q, n, cap) = (2, 4, 4);
        let idx: Vec<usize> = (0..q).collect();
        let pi = Multivector::basis(n, cap, &idx)
            .mul_poly(&x(n, cap, 3))
            .unwrap();
        let (form, map) = classify_linear(&pi).unwrap();
        assert_eq!(form.type_name(), "type2");
        assert_eq!(pi.pushforward(&map).unwrap(), form.normal_tensor(cap));
    }

    #[test]
    fn classify_rejects_non_nambu() {
        let n = 4;
        let pi = Multivector::basis(n, 3, &[0, 1])
            .mul_poly(&x(n, 3, 0))
            .unwrap()
            .add(
                &Multivector::basis(n, 3, &[2, 3])
                    .mul_poly(&x(n, 3, 1))
                    .unwrap(),
            )
            .unwrap();
        assert!(classify_linear(&pi).is_err());
    }

    #[test]
    fn classify_conjugated_normal_form_recovers_data() {
        let (q, cap) = (2, 4);
        let pi = euler_tensor(q, cap);
        let a = RatMat::from_rows(vec![
            vec![rat(1), rat(2), rat(0)],
            vec![rat(0), rat(1), rat(-1)],
            vec![rat(1), rat(0), rat(1)],
        ]);
        let phi = PolyMap::linear(&a, cap).unwrap();
        let moved = pi.pushforward(&phi).unwrap();
        let (form, map) = classify_linear(&moved).unwrap();
        match &form {
            LinearNormalForm::Type1 { r, s, signature, .. } => {
                assert_eq!((*r, *s), (q + 1, 0));
                let unordered = (signature.0.min(signature.1), signature.0.max(signature.1));
                assert_eq!(unordered, (0, 3));
            }
            other => panic!("expected Type 1, got {other:?}"),
        }
        assert_eq!(moved.pushforward(&map).unwrap(), form.normal_tensor(cap));
    }

    #[test]
    fn classify_hyperbolic_signature() {
        // dual of dx5 ^ dQ with Q = (x1^2 + x2^2 + x3^2 - x4^2)/2, n = 5
        let (q, n, cap) = (3usize, 5usize, 4u32);
        let _ = q;
        let mut quad = TruncPoly::zero(n, cap);
        for (i, sg) in [(0, 1), (1, 1), (2, 1), (3, -1)] {
            let mut e = vec![0u32; n];
            e[i] = 2;
            quad.add_term(Mono::new(&e), ratio(sg, 2));
        }
        let dq = crate::tensor::d_of_poly(&quad).unwrap();
        let pi = DiffForm::basis(n, cap, &[4]).wedge(&dq).unwrap().dual_mv();
        let (form, map) = classify_linear(&pi).unwrap();
        match &form {
            LinearNormalForm::Type1 {
                signature,
                hyperbolic,
                elliptic,
                excluded_signature,
                ..
            } => {
                assert_eq!(*signature, (3, 1));
                assert!(*hyperbolic && !*elliptic);
                assert!(!*excluded_signature);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(pi.pushforward(&map).unwrap(), form.normal_tensor(cap));
        // signature (2, 2) raises the excluded flag
        let mut quad2 = TruncPoly::zero(n, cap);
        for (i, sg) in [(0, 1), (1, 1), (2, -1), (3, -1)] {
            let mut e = vec![0u32; n];
            e[i] = 2;
            quad2.add_term(Mono::new(&e), ratio(sg, 2));
        }
        let dq2 = crate::tensor::d_of_poly(&quad2).unwrap();
        let pi2 = DiffForm::basis(n, cap, &[4]).wedge(&dq2).unwrap().dual_mv();
        let (form2, _) = classify_linear(&pi2).unwrap();
        match &form2 {
            LinearNormalForm::Type1 { excluded_signature, .. } => assert!(excluded_signature),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_degenerate_cross_terms() {
        // dual of dx4^dx5 ^ d(x1^2/2 + x2 x4 + x3 x5): r = 1, s = 2,
        // q = 2, n = 5. Every core variable appears in Q, so no constant
        // divisor exists and the degenerate Type 1 route must run.
        let (q, n, cap) = (2, 5, 4);
        let mut quad = TruncPoly::zero(n, cap);
        let mut e = vec![0u32; n];
        e[0] = 2;
        quad.add_term(Mono::new(&e), ratio(1, 2));
        for (a, b) in [(1, 3), (2, 4)] {
            let mut e2 = vec![0u32; n];
            e2[a] = 1;
            e2[b] = 1;
            quad.add_term(Mono::new(&e2), rat(1));
        }
        let dq = crate::tensor::d_of_poly(&quad).unwrap();
        let pi = DiffForm::basis(n, cap, &[3, 4])
            .wedge(&dq)
            .unwrap()
            .dual_mv();
        let (form, map) = classify_linear(&pi).unwrap();
        match &form {
            LinearNormalForm::Type1 { q: fq, r, s, nondegenerate, .. } => {
                assert_eq!((*fq, *r, *s), (q, 1, 2));
                assert!(!*nondegenerate);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(pi.pushforward(&map).unwrap(), form.normal_tensor(cap));
        // a conjugated copy classifies with the same discrete data
        let a = RatMat::from_rows(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                rat(1)
                            } else if (i + 2 * j) % 4 == 1 {
                                rat(1)
                            } else {
                                rat(0)
                            }
                        })
                        .collect()
                })
                .collect(),
        );
        let phi = PolyMap::linear(&a, cap).unwrap();
        let moved = pi.pushforward(&phi).unwrap();
        let (form2, map2) = classify_linear(&moved).unwrap();
        match &form2 {
            LinearNormalForm::Type1 { r, s, .. } => assert_eq!((*r, *s), (1, 2)),
            other => panic!("{other:?}"),
        }
        assert_eq!(moved.pushforward(&map2).unwrap(), form2.normal_tensor(cap));
    }

    #[test]
    fn signature_examples() {
        let id3 = RatMat::identity(3);
        assert_eq!(signature(&id3).unwrap(), (3, 0, 0));
        let mut hyp = RatMat::zeros(2, 2);
        hyp[(0, 1)] = rat(1);
        hyp[(1, 0)] = rat(1);
        assert_eq!(signature(&hyp).unwrap(), (1, 0, 1));
        let mut asym = RatMat::zeros(2, 2);
        asym[(0, 1)] = rat(1);
        assert!(signature(&asym).is_err());
    }

    #[test]
    fn singular_locus_examples() {
        // elliptic, n = 4, q = 2: tangent space spanned by d4
        let (q, n, cap) = (2, 4, 4);
        let mut quad = TruncPoly::zero(n, cap);
        for i in 0..=q {
            let mut e = vec![0u32; n];
            e[i] = 2;
            quad.add_term(Mono::new(&e), ratio(1, 2));
        }
        let dq = crate::tensor::d_of_poly(&quad).unwrap();
        let pi = DiffForm::basis(n, cap, &[3]).wedge(&dq).unwrap().dual_mv();
        let (ok, basis) = singular_locus_check(&pi).unwrap();
        assert!(ok);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], vec![rat(0), rat(0), rat(0), rat(1)]);

        // n = q + 1 nondegenerate: zero-dimensional locus
        let pi2 = euler_tensor(2, 4);
        let (ok2, basis2) = singular_locus_check(&pi2).unwrap();
        assert!(ok2);
        assert!(basis2.is_empty());

        // Type 2 input violates the precondition
        let c = Multivector::basis(4, 4, &[0]);
        let mut v = Multivector::zero(4, 1, 4);
        v.insert_component(vec![1], x(4, 4, 1));
        v.insert_component(vec![2], x(4, 4, 2).neg());
        let pi3 = c.wedge(&v).unwrap();
        assert!(matches!(
            singular_locus_check(&pi3),
            Err(KernelError::Precondition(_))
        ));
    }
}
