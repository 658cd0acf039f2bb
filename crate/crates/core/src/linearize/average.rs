//! Exact invariant averaging over compact rotations.
//!
//! Haar averaging over the rotations of the first `k` coordinates is
//! replaced by its algebraic equivalent: projection onto the kernel of
//! the Casimir operator `C = sum_{a<b} L_{X_ab} L_{X_ab}` along its
//! image. On each finite-dimensional graded piece the operator is
//! semisimple with nonnegative spectrum (the action is by the compact
//! form), so the projection is computed exactly from the minimal
//! polynomial of `C` on the Krylov span of the input. Mixed-signature
//! actions have no Haar measure to imitate and are rejected.

use crate::error::{KernelError, Result};
use crate::polyring::{Mono, TruncPoly};
use crate::rat::Rat;
use crate::tensor::{lie_derivative_poly, Alt, Multivector, Variance, VectorField};
use num_traits::{One, Zero};

/// Rotation generators `X_ab = x_b d_a - x_a d_b` for `a < b < k`.
fn rotation_fields(n: usize, cap: u32, k: usize) -> Vec<VectorField> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let mut v = VectorField::zero(n, 1, cap);
            let mut pa = TruncPoly::zero(n, cap);
            pa.add_term(Mono::var(n, b), Rat::one());
            v.insert_component(vec![a], pa);
            let mut pb = TruncPoly::zero(n, cap);
            pb.add_term(Mono::var(n, a), -Rat::one());
            v.insert_component(vec![b], pb);
            out.push(v);
        }
    }
    out
}

/// Anything the rotation action differentiates: multivectors, forms,
/// and scalar polynomials.
pub trait Averageable: Sized + Clone {
    fn lie(&self, x: &VectorField) -> Result<Self>;
    fn add_scaled(&self, other: &Self, c: &Rat) -> Result<Self>;
    fn zero_like(&self) -> Self;
    fn coords(&self) -> Vec<(String, Rat)>;
    fn is_zero_value(&self) -> bool;
}

impl<V: Variance> Averageable for Alt<V>
where
    Alt<V>: crate::tensor::LieDifferentiable,
{
    fn lie(&self, x: &VectorField) -> Result<Self> {
        crate::tensor::lie_derivative(x, self)
    }

    fn add_scaled(&self, other: &Self, c: &Rat) -> Result<Self> {
        self.add(&other.scale(c))
    }

    fn zero_like(&self) -> Self {
        Alt::zero(self.nvars(), self.degree(), self.cap())
    }

    fn coords(&self) -> Vec<(String, Rat)> {
        let mut out = Vec::new();
        for (idx, p) in self.components() {
            for (m, c) in p.terms() {
                out.push((format!("{idx:?}|{:?}", m.exps()), c.clone()));
            }
        }
        out
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl Averageable for TruncPoly {
    fn lie(&self, x: &VectorField) -> Result<Self> {
        lie_derivative_poly(x, self)
    }

    fn add_scaled(&self, other: &Self, c: &Rat) -> Result<Self> {
        self.add(&other.scale(c))
    }

    fn zero_like(&self) -> Self {
        TruncPoly::zero(self.nvars(), self.cap())
    }

    fn coords(&self) -> Vec<(String, Rat)> {
        self.terms()
            .map(|(m, c)| (format!("{:?}", m.exps()), c.clone()))
            .collect()
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

fn casimir<T: Averageable>(t: &T, rots: &[VectorField]) -> Result<T> {
    let mut acc = t.zero_like();
    for x in rots {
        let once = t.lie(x)?;
        let twice = once.lie(x)?;
        acc = acc.add_scaled(&twice, &Rat::one())?;
    }
    Ok(acc)
}

/// Kernel projection of the Casimir on the Krylov span of `t`.
fn invariant_projection<T: Averageable>(t: &T, rots: &[VectorField]) -> Result<T> {
    if t.is_zero_value() {
        return Ok(t.clone());
    }
    let mut chain: Vec<T> = vec![t.clone()];
    let mut span = crate::lie::span_tracker_strings();
    span.insert(t.coords().into_iter().collect());
    let dep: Vec<Rat> = loop {
        let next = casimir(chain.last().unwrap(), rots)?;
        match span.insert(next.coords().into_iter().collect()) {
            crate::lie::SpanInsert::Dependent(a) => break a,
            crate::lie::SpanInsert::Independent => chain.push(next),
        }
        if chain.len() > 256 {
            return Err(KernelError::Precondition(
                "Casimir iteration failed to terminate".into(),
            ));
        }
    };
    let m = chain.len();
    if !dep[0].is_zero() {
        // zero is not in the spectrum on this span: no invariant part
        return Ok(t.zero_like());
    }
    if m == 1 {
        // C t = 0 outright: t is already invariant
        return Ok(t.clone());
    }
    // p(t) = t r(t): projection = r(C) / r(0), r(0) = -dep[1]
    let r0 = -dep[1].clone();
    if r0.is_zero() {
        return Err(KernelError::Precondition(
            "Casimir is not semisimple on the input".into(),
        ));
    }
    let mut coeffs = vec![Rat::zero(); m];
    coeffs[m - 1] = Rat::one() / &r0;
    for i in 1..m {
        coeffs[i - 1] = -&dep[i] / &r0;
    }
    let mut acc = t.zero_like();
    for (c, coeff) in chain.iter().zip(&coeffs) {
        if !coeff.is_zero() {
            acc = acc.add_scaled(c, coeff)?;
        }
    }
    Ok(acc)
}

fn check_k(nvars: usize, k: usize) -> Result<()> {
    if k < 2 || k > nvars {
        return Err(KernelError::Precondition(format!(
            "rotation block k = {k} outside 2..={nvars}"
        )));
    }
    Ok(())
}

/// Exact invariant projection of a multivector under the rotations of
/// the first `k` coordinates.
pub fn so_average(t: &Multivector, k: usize) -> Result<Multivector> {
    check_k(t.nvars(), k)?;
    invariant_projection(t, &rotation_fields(t.nvars(), t.cap(), k))
}

/// Invariant projection of a differential form.
pub fn so_average_form(t: &crate::tensor::DiffForm, k: usize) -> Result<crate::tensor::DiffForm> {
    check_k(t.nvars(), k)?;
    invariant_projection(t, &rotation_fields(t.nvars(), t.cap(), k))
}

/// Invariant projection of a scalar polynomial.
pub fn so_average_poly(t: &TruncPoly, k: usize) -> Result<TruncPoly> {
    check_k(t.nvars(), k)?;
    invariant_projection(t, &rotation_fields(t.nvars(), t.cap(), k))
}

/// Averaging for a signed block: only the compact form (all signs
/// positive) admits an algebraic Haar average; anything else is
/// rejected.
pub fn so_average_signed(t: &Multivector, signs: &[i8]) -> Result<Multivector> {
    if signs.iter().any(|&s| s != 1) {
        return Err(KernelError::UnsupportedAction(
            "averaging needs the compact form; mixed signs have no Haar measure analogue".into(),
        ));
    }
    so_average(t, signs.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn x(n: usize, cap: u32, i: usize) -> TruncPoly {
        TruncPoly::var(n, cap, i)
    }

    #[test]
    fn average_of_x1_squared() {
        // the rotation average of x1^2 in the plane is (x1^2 + x2^2)/2
        let p = x(2, 4, 0).pow(2);
        let avg = so_average_poly(&p, 2).unwrap();
        let expect = x(2, 4, 0)
            .pow(2)
            .add(&x(2, 4, 1).pow(2))
            .unwrap()
            .scale(&ratio(1, 2));
        assert_eq!(avg, expect);
    }

    #[test]
    fn invariants_are_fixed() {
        let q = x(3, 4, 0)
            .pow(2)
            .add(&x(3, 4, 1).pow(2))
            .unwrap()
            .add(&x(3, 4, 2).pow(2))
            .unwrap()
            .scale(&ratio(1, 2));
        assert_eq!(so_average_poly(&q, 3).unwrap(), q);
    }

    #[test]
    fn idempotence() {
        let p = x(2, 5, 0).pow(3).mul(&x(2, 5, 1)).unwrap();
        let once = so_average_poly(&p, 2).unwrap();
        let twice = so_average_poly(&once, 2).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn mixed_signs_rejected() {
        let t = Multivector::basis(3, 3, &[0, 1]);
        let err = so_average_signed(&t, &[1, -1, 1]).unwrap_err();
        assert!(matches!(err, KernelError::UnsupportedAction(_)));
    }

    #[test]
    fn commutes_with_generators() {
        let p = x(3, 4, 0).pow(2).mul(&x(3, 4, 2)).unwrap();
        let rots = rotation_fields(3, 4, 3);
        let avg = so_average_poly(&p, 3).unwrap();
        for r in &rots {
            assert!(lie_derivative_poly(r, &avg).unwrap().is_zero());
        }
        let _ = rat(0);
    }
}
