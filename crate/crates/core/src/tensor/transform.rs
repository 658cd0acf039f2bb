//! Transformation of tensors under polynomial coordinate changes.
//!
//! `pushforward` expresses a multivector in the target coordinates of a
//! map: components are conjugated by degree-sized minors of the Jacobian
//! and then composed with the inverse jet. `pullback` is the usual jet
//! pullback of forms. Both truncate at the cap, so functor laws hold up
//! to the cap, never beyond it.

use super::{increasing_tuples, DiffForm, Multivector};
use crate::error::Result;
use crate::polymap::PolyMap;
use crate::polyring::TruncPoly;

/// Jacobian matrix of a map: entry `[r][c] = d phi_r / d x_c`.
fn jacobian(phi: &PolyMap) -> Result<Vec<Vec<TruncPoly>>> {
    let n = phi.nvars();
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = Vec::with_capacity(n);
        for c in 0..n {
            row.push(phi.component(r).partial(c)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Minor determinants with memoized Laplace expansion: sub-minors are
/// shared across all row/column subsets of one Jacobian.
struct MinorCache<'a> {
    jac: &'a [Vec<TruncPoly>],
    nvars: usize,
    cap: u32,
    memo: std::collections::HashMap<(u32, u32), TruncPoly>,
}

impl<'a> MinorCache<'a> {
    fn new(jac: &'a [Vec<TruncPoly>], nvars: usize, cap: u32) -> Self {
        MinorCache {
            jac,
            nvars,
            cap,
            memo: std::collections::HashMap::new(),
        }
    }

    fn minor(&mut self, rows: &[usize], cols: &[usize]) -> Result<TruncPoly> {
        debug_assert_eq!(rows.len(), cols.len());
        if rows.is_empty() {
            return Ok(TruncPoly::one(self.nvars, self.cap));
        }
        let key = (bitmask(rows), bitmask(cols));
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        // expand along the first row
        let mut acc = TruncPoly::zero(self.nvars, self.cap);
        let rest_rows: Vec<usize> = rows[1..].to_vec();
        for (j, &c) in cols.iter().enumerate() {
            let entry = &self.jac[rows[0]][c];
            if entry.is_zero() {
                continue;
            }
            let rest_cols: Vec<usize> = cols
                .iter()
                .copied()
                .filter(|&cc| cc != c)
                .collect();
            let sub = self.minor(&rest_rows, &rest_cols)?;
            if sub.is_zero() {
                continue;
            }
            let term = entry.mul(&sub)?;
            acc = if j % 2 == 0 {
                acc.add(&term)?
            } else {
                acc.sub(&term)?
            };
        }
        self.memo.insert(key, acc.clone());
        Ok(acc)
    }
}

fn bitmask(idx: &[usize]) -> u32 {
    idx.iter().fold(0u32, |m, &i| m | (1 << i))
}

impl Multivector {
    /// The tensor expressed in the target coordinates of `phi`.
    pub fn pushforward(&self, phi: &PolyMap) -> Result<Multivector> {
        let inv = phi.invert()?;
        self.pushforward_with_inverse(phi, &inv)
    }

    /// Same as [`Multivector::pushforward`] with a precomputed inverse
    /// jet, so callers applying one map to many tensors invert once.
    pub fn pushforward_with_inverse(&self, phi: &PolyMap, inv: &PolyMap) -> Result<Multivector> {
        let n = self.nvars();
        let cap = self.cap().min(phi.cap());
        let jac = jacobian(&phi.retruncate(cap))?;
        let mut minors = MinorCache::new(&jac, n, cap);
        let src = self.retruncate(cap);
        let mut out = Multivector::zero(n, self.degree(), cap);
        for target in increasing_tuples(n, self.degree()) {
            let mut acc = TruncPoly::zero(n, cap);
            for (source, p) in src.components() {
                let m = minors.minor(&target, source)?;
                if !m.is_zero() {
                    acc = acc.add(&m.mul(p)?)?;
                }
            }
            if !acc.is_zero() {
                out.insert_component(target, acc.compose(inv.components())?);
            }
        }
        Ok(out)
    }
}

impl DiffForm {
    /// Jet pullback: `(phi^* w)_I = sum_J (w_J . phi) det(J_phi[J, I])`.
    pub fn pullback(&self, phi: &PolyMap) -> Result<DiffForm> {
        let n = self.nvars();
        let cap = self.cap().min(phi.cap());
        let jac = jacobian(&phi.retruncate(cap))?;
        let mut minors = MinorCache::new(&jac, n, cap);
        let src = self.retruncate(cap);
        let mut out = DiffForm::zero(n, self.degree(), cap);
        for target in increasing_tuples(n, self.degree()) {
            let mut acc = TruncPoly::zero(n, cap);
            for (source, q) in src.components() {
                let m = minors.minor(source, &target)?;
                if !m.is_zero() {
                    acc = acc.add(&m.mul(&q.compose(phi.components())?)?)?;
                }
            }
            if !acc.is_zero() {
                out.insert_component(target, acc);
            }
        }
        Ok(out)
    }
}
