//! Slicing constructions: lower-order structures cut out of a Nambu
//! tensor by constant coordinate forms.

use crate::error::{KernelError, Result};
use crate::tensor::{DiffForm, Multivector};

/// `Lambda = (dx_{k+1} ^ ... ^ dx_{q+1}) _| P`: the order-`(k-1)`
/// structure slicing the foliation by the trailing core coordinates.
/// With `k = q + 1` the contraction is empty and `Lambda = P`.
pub fn slice_lambda(pi: &Multivector, k: usize, q: usize) -> Result<Multivector> {
    let n = pi.nvars();
    if pi.degree() != q {
        return Err(KernelError::Degree(format!(
            "tensor order {} does not match q = {q}",
            pi.degree()
        )));
    }
    if !(3..=q + 1).contains(&k) || q + 1 > n {
        return Err(KernelError::IndexOutOfRange {
            index: k,
            nvars: q + 1,
        });
    }
    let idx: Vec<usize> = (k..=q).collect();
    let eta = DiffForm::basis(n, pi.cap(), &idx);
    pi.contract_form(&eta)
}

/// `Theta = (dx_1 ^ ... ^ dx_{k-1}) _| P` restricted to the subspace
/// `{x_1 = ... = x_{k-1} = 0}`, reindexed onto its `n - k + 1`
/// remaining coordinates.
pub fn slice_theta(pi: &Multivector, k: usize) -> Result<Multivector> {
    let n = pi.nvars();
    let q = pi.degree();
    if !(2..=q).contains(&k) {
        return Err(KernelError::IndexOutOfRange { index: k, nvars: q });
    }
    let dropped: Vec<usize> = (0..k - 1).collect();
    let eta = DiffForm::basis(n, pi.cap(), &dropped);
    let contracted = pi.contract_form(&eta)?;
    let keep: Vec<usize> = (k - 1..n).collect();
    let mut out = Multivector::zero(keep.len(), contracted.degree(), pi.cap());
    for (idx, p) in contracted.components() {
        if idx.iter().any(|&i| i < k - 1) {
            continue; // component sticks out of the subspace
        }
        let restricted = p.set_vars_zero(&dropped);
        if restricted.is_zero() {
            continue;
        }
        let new_idx: Vec<usize> = idx.iter().map(|&i| i - (k - 1)).collect();
        out.insert_component(new_idx, restricted.project_vars(&keep, pi.cap()));
    }
    Ok(out)
}
