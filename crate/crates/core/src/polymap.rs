//! Polynomial coordinate changes, composable and invertible as jets.

use crate::error::{KernelError, Result};
use crate::linalg::RatMat;
use crate::polyring::{Mono, TruncPoly};
use crate::rat::Rat;
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Invertible linear part, not necessarily the identity.
    LinearInvertible,
    /// Linear part equal to the identity matrix.
    NearIdentity,
}

/// A polynomial map `y = phi(x)` with `phi(0) = 0` and invertible linear
/// part. Component `i` gives the target coordinate `y_{i+1}` as a
/// polynomial in the source coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap {
    nvars: usize,
    cap: u32,
    components: Vec<TruncPoly>,
    kind: MapKind,
}

impl PolyMap {
    /// Builds a map from components, validating the invariants: zero
    /// constant terms and an invertible linear part.
    pub fn new(components: Vec<TruncPoly>) -> Result<PolyMap> {
        let nvars = components.len();
        assert!(nvars > 0);
        let cap = components[0].cap();
        for c in &components {
            if c.nvars() != nvars || c.cap() != cap {
                return Err(KernelError::ShapeMismatch {
                    left_nvars: nvars,
                    left_cap: cap,
                    right_nvars: c.nvars(),
                    right_cap: c.cap(),
                });
            }
            if !c.coeff(&Mono::one(nvars)).is_zero() {
                return Err(KernelError::Precondition(
                    "coordinate map component has a nonzero constant term".into(),
                ));
            }
        }
        let map = PolyMap {
            nvars,
            cap,
            components,
            kind: MapKind::LinearInvertible,
        };
        let jac = map.linear_part();
        if jac.inverse().is_none() {
            return Err(KernelError::SingularLinearPart);
        }
        Ok(map.with_recomputed_kind())
    }

    pub fn identity(nvars: usize, cap: u32) -> PolyMap {
        PolyMap {
            nvars,
            cap,
            components: (0..nvars).map(|i| TruncPoly::var(nvars, cap, i)).collect(),
            kind: MapKind::NearIdentity,
        }
    }

    /// Linear map `y = a x` from an invertible matrix.
    pub fn linear(a: &RatMat, cap: u32) -> Result<PolyMap> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let mut p = TruncPoly::zero(n, cap);
            for j in 0..n {
                p.add_term(Mono::var(n, j), a[(i, j)].clone());
            }
            comps.push(p);
        }
        PolyMap::new(comps)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn components(&self) -> &[TruncPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &TruncPoly {
        &self.components[i]
    }

    /// Jacobian at the origin.
    pub fn linear_part(&self) -> RatMat {
        let mut m = RatMat::zeros(self.nvars, self.nvars);
        for (i, c) in self.components.iter().enumerate() {
            for j in 0..self.nvars {
                m[(i, j)] = c.linear_coeff(j);
            }
        }
        m
    }

    fn with_recomputed_kind(mut self) -> PolyMap {
        let lin = self.linear_part();
        let is_id = (0..self.nvars).all(|i| {
            (0..self.nvars).all(|j| {
                let want = if i == j { Rat::one() } else { Rat::zero() };
                lin[(i, j)] == want
            })
        });
        self.kind = if is_id {
            MapKind::NearIdentity
        } else {
            MapKind::LinearInvertible
        };
        self
    }

    pub fn is_identity(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(i, c)| *c == TruncPoly::var(self.nvars, self.cap, i))
    }

    /// Composition `(self . other)(x) = self(other(x))`, truncated at the
    /// smaller cap; the kind flag is recomputed from the result.
    pub fn compose(&self, other: &PolyMap) -> Result<PolyMap> {
        if self.nvars != other.nvars {
            return Err(KernelError::ShapeMismatch {
                left_nvars: self.nvars,
                left_cap: self.cap,
                right_nvars: other.nvars,
                right_cap: other.cap,
            });
        }
        let comps: Result<Vec<TruncPoly>> = self
            .components
            .iter()
            .map(|c| c.compose(other.components()))
            .collect();
        let map = PolyMap {
            nvars: self.nvars,
            cap: self.cap.min(other.cap),
            components: comps?,
            kind: MapKind::LinearInvertible,
        };
        Ok(map.with_recomputed_kind())
    }

    /// Applies the map to a polynomial: `p(self(x))`.
    pub fn apply(&self, p: &TruncPoly) -> Result<TruncPoly> {
        p.compose(&self.components)
    }

    /// Two-sided inverse as a truncated jet: first the linear part is
    /// inverted exactly, then the near-identity remainder is reverted by
    /// fixed-point iteration, which gains at least one correct degree per
    /// round.
    pub fn invert(&self) -> Result<PolyMap> {
        let lin = self.linear_part();
        let lin_inv = lin.inverse().ok_or(KernelError::SingularLinearPart)?;
        let lin_inv_map = PolyMap::linear(&lin_inv, self.cap)?;
        // g = lin_inv . self is near-identity: g = id + h with h of degree >= 2
        let g = lin_inv_map.compose(self)?;
        let id = PolyMap::identity(self.nvars, self.cap);
        let h: Vec<TruncPoly> = g
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| c.sub(id.component(i)).expect("same shape"))
            .collect();
        // psi_{k+1} = id - h(psi_k) gains one correct degree per round,
        // so round k only needs arithmetic truncated at degree k + 2;
        // running the early rounds at small caps keeps the cost at
        // roughly twice the final full-cap round
        let mut psi = PolyMap::identity(self.nvars, 2.min(self.cap));
        let mut round_cap = 2u32.min(self.cap);
        loop {
            let h_cut: Vec<TruncPoly> = h.iter().map(|p| p.retruncate(round_cap)).collect();
            let next: Result<Vec<TruncPoly>> = h_cut
                .iter()
                .enumerate()
                .map(|(i, hi)| {
                    let sub = hi.compose(psi.components())?;
                    TruncPoly::var(self.nvars, round_cap, i).sub(&sub)
                })
                .collect();
            let next = PolyMap {
                nvars: self.nvars,
                cap: round_cap,
                components: next?,
                kind: MapKind::NearIdentity,
            };
            if round_cap == self.cap && next == psi {
                break;
            }
            psi = next;
            if round_cap < self.cap {
                round_cap += 1;
                psi = psi.retruncate(round_cap);
            }
        }
        psi.compose(&lin_inv_map)
    }

    /// Re-truncates every component at a new cap.
    pub fn retruncate(&self, cap: u32) -> PolyMap {
        PolyMap {
            nvars: self.nvars,
            cap,
            components: self.components.iter().map(|c| c.retruncate(cap)).collect(),
            kind: self.kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn x(n: usize, cap: u32, i: usize) -> TruncPoly {
        TruncPoly::var(n, cap, i)
    }

    #[test]
    fn identity_composition() {
        let n = 2;
        let phi = PolyMap::new(vec![
            x(n, 4, 0).add(&x(n, 4, 1).pow(2)).unwrap(),
            x(n, 4, 1),
        ])
        .unwrap();
        let id = PolyMap::identity(n, 4);
        assert_eq!(id.compose(&phi).unwrap(), phi);
        assert_eq!(phi.compose(&id).unwrap(), phi);
    }

    #[test]
    fn scaling_maps_compose() {
        let a2 = PolyMap::new(vec![x(1, 3, 0).scale(&rat(2))]).unwrap();
        let a3 = PolyMap::new(vec![x(1, 3, 0).scale(&rat(3))]).unwrap();
        let c = a2.compose(&a3).unwrap();
        assert_eq!(c.component(0), &x(1, 3, 0).scale(&rat(6)));
        assert_eq!(c.kind(), MapKind::LinearInvertible);
    }

    #[test]
    fn shear_inverse_is_exact() {
        let n = 2;
        let phi = PolyMap::new(vec![
            x(n, 3, 0).add(&x(n, 3, 1).pow(2)).unwrap(),
            x(n, 3, 1),
        ])
        .unwrap();
        let psi = phi.invert().unwrap();
        assert_eq!(
            psi.component(0),
            &x(n, 3, 0).sub(&x(n, 3, 1).pow(2)).unwrap()
        );
        assert!(phi.compose(&psi).unwrap().is_identity());
        assert!(psi.compose(&phi).unwrap().is_identity());
    }

    #[test]
    fn linear_inverse_matches_matrix_inverse() {
        let a = RatMat::from_rows(vec![
            vec![rat(2), rat(1)],
            vec![rat(5), rat(3)],
        ]);
        let phi = PolyMap::linear(&a, 4).unwrap();
        let psi = phi.invert().unwrap();
        let expect = PolyMap::linear(&a.inverse().unwrap(), 4).unwrap();
        assert_eq!(psi, expect);
    }

    #[test]
    fn constant_term_rejected() {
        let p = TruncPoly::one(1, 3);
        assert!(matches!(
            PolyMap::new(vec![p]),
            Err(KernelError::Precondition(_))
        ));
        let z = TruncPoly::zero(1, 3);
        assert!(matches!(
            PolyMap::new(vec![z]),
            Err(KernelError::SingularLinearPart)
        ));
    }
}
