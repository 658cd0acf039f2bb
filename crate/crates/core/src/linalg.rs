//! Dense exact linear algebra over the rationals.
//!
//! Small hand-rolled routines: reduced row echelon form, solving,
//! kernels, inversion, and symmetric congruence diagonalization. All
//! pivoting rules are fixed so results are deterministic.

use crate::rat::Rat;
use num_traits::{One, Signed, Zero};

/// Row-major dense rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        RatMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMat {
        let mut t = RatMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(i, j)] += prod;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.cols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        acc += &self[(i, j)] * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// In-place Gauss–Jordan to reduced row echelon form.
    /// Returns the pivot columns. Pivot choice: first nonzero entry in
    /// column order, scanning rows top-down.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = {
                let piv = self[(r, c)].clone();
                Rat::one() / piv
            };
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let factor = self[(i, c)].clone();
                    for j in c..self.cols {
                        let v = &self[(i, j)] - &factor * &self[(r, j)];
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    pub fn determinant(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                return Rat::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            det *= m[(c, c)].clone();
            let inv = Rat::one() / m[(c, c)].clone();
            for i in c + 1..m.rows {
                if !m[(i, c)].is_zero() {
                    let factor = &m[(i, c)] * &inv;
                    for j in c..m.cols {
                        let v = &m[(i, j)] - &factor * &m[(c, j)];
                        m[(i, j)] = v;
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = RatMat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rat::one();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(k, &c)| c != k) {
            return None;
        }
        let mut inv = RatMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Solves `self * x = b`. Returns `None` when inconsistent. Among the
    /// solutions, picks the one with every free variable set to zero
    /// (minimal-support echelon solution), which is deterministic.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, b.len());
        let mut aug = RatMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the rhs column: inconsistent
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    /// Basis of the null space, one vector per free column, in column
    /// order (entries from the rref, free variable set to one).
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for (r, &c) in pivots.iter().enumerate() {
                if c < free {
                    v[c] = -m[(r, free)].clone();
                }
            }
            basis.push(v);
        }
        basis
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Congruence diagonalization of a symmetric matrix: returns `(s, d)` with
/// `s^T * a * s = diag(d)`. Symmetric pivoting; when no diagonal pivot is
/// available but an off-diagonal entry survives, the row/column addition
/// trick manufactures one.
pub fn congruence_diagonalize(a: &RatMat) -> (RatMat, Vec<Rat>) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut s = RatMat::identity(n);
    for k in 0..n {
        if m[(k, k)].is_zero() {
            // prefer swapping in a later diagonal pivot
            if let Some(j) = (k + 1..n).find(|&j| !m[(j, j)].is_zero()) {
                sym_swap(&mut m, &mut s, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !m[(k, j)].is_zero()) {
                // m[k][j] != 0 with all remaining diagonal zero: add col/row j to k
                sym_add(&mut m, &mut s, k, j, &Rat::one());
            }
        }
        if m[(k, k)].is_zero() {
            continue; // whole remaining block may still have zero row k
        }
        let d = m[(k, k)].clone();
        for j in k + 1..n {
            if !m[(k, j)].is_zero() {
                let factor = -(&m[(k, j)] / &d);
                sym_add(&mut m, &mut s, j, k, &factor);
            }
        }
    }
    let diag = (0..n).map(|i| m[(i, i)].clone()).collect();
    (s, diag)
}

// column op: col_k += factor * col_j (and same on rows), tracked in s
fn sym_add(m: &mut RatMat, s: &mut RatMat, k: usize, j: usize, factor: &Rat) {
    let n = m.rows;
    for i in 0..n {
        let v = &m[(i, k)] + factor * &m[(i, j)];
        m[(i, k)] = v;
    }
    for i in 0..n {
        let v = &m[(k, i)] + factor * &m[(j, i)];
        m[(k, i)] = v;
    }
    for i in 0..n {
        let v = &s[(i, k)] + factor * &s[(i, j)];
        s[(i, k)] = v;
    }
}

fn sym_swap(m: &mut RatMat, s: &mut RatMat, k: usize, j: usize) {
    let n = m.rows;
    for i in 0..n {
        let (a, b) = (m[(i, k)].clone(), m[(i, j)].clone());
        m[(i, k)] = b;
        m[(i, j)] = a;
    }
    for i in 0..n {
        let (a, b) = (m[(k, i)].clone(), m[(j, i)].clone());
        m[(k, i)] = b;
        m[(j, i)] = a;
    }
    for i in 0..n {
        let (a, b) = (s[(i, k)].clone(), s[(i, j)].clone());
        s[(i, k)] = b;
        s[(i, j)] = a;
    }
}

/// Sylvester inertia `(n_plus, n_zero, n_minus)` of a symmetric matrix.
pub fn inertia(a: &RatMat) -> (usize, usize, usize) {
    let (_, diag) = congruence_diagonalize(a);
    let mut plus = 0;
    let mut zero = 0;
    let mut minus = 0;
    for d in diag {
        if d.is_zero() {
            zero += 1;
        } else if d.is_positive() {
            plus += 1;
        } else {
            minus += 1;
        }
    }
    (plus, zero, minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn m(rows: &[&[i64]]) -> RatMat {
        RatMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn solve_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let x = a.solve(&[rat(6), rat(12), rat(2)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![rat(6), rat(12), rat(2)]);
        let ker = a.kernel_basis();
        assert_eq!(ker.len(), 1);
        assert!(a.mul_vec(&ker[0]).iter().all(|v| v.is_zero()));
        assert!(a.solve(&[rat(1), rat(0), rat(0)]).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1], &[7, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMat::identity(2));
        assert_eq!(a.determinant(), rat(1));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(inertia(&m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])), (3, 0, 0));
        // hyperbolic pair
        assert_eq!(inertia(&m(&[&[0, 1], &[1, 0]])), (1, 0, 1));
        assert_eq!(inertia(&m(&[&[1, 0], &[0, 0]])), (1, 1, 0));
    }

    #[test]
    fn congruence_certificate() {
        let a = m(&[&[0, 1, 2], &[1, 0, 3], &[2, 3, 0]]);
        let (s, d) = congruence_diagonalize(&a);
        let lhs = s.transpose().mul(&a).mul(&s);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { d[i].clone() } else { rat(0) };
                assert_eq!(lhs[(i, j)], expect);
            }
        }
        assert_eq!(ratio(1, 2) + ratio(1, 2), rat(1));
    }
}
