//! Truncated multivariate polynomials over the rationals.
//!
//! [`TruncPoly`] is a sparse sum of monomials with exact rational
//! coefficients, with every term of total degree above the cap discarded
//! eagerly. Terms live in a `BTreeMap` keyed by [`Mono`], whose `Ord` is
//! graded lexicographic, so iteration order (and therefore every rendered
//! text form) is canonical.

use crate::error::{KernelError, Result};
use crate::rat::{rat, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Exponent tuple of a monomial, packed into a `u128`: the total
/// degree in the most significant byte, then one byte per variable.
/// Plain integer order on the packing is exactly graded-lex (lower
/// total degree first, ties broken by exponent sequence), and monomial
/// multiplication is a single addition. Supports up to 15 variables
/// with exponents (and total degree) at most 255, far beyond the
/// working regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    packed: u128,
    nvars: u8,
}

impl Mono {
    pub fn new(exps: &[u32]) -> Self {
        let n = exps.len();
        assert!(n <= 15, "at most 15 variables are supported");
        let mut packed: u128 = 0;
        let mut degree: u32 = 0;
        for (i, &e) in exps.iter().enumerate() {
            assert!(e <= 255, "exponent overflow");
            degree += e;
            packed |= (e as u128) << (8 * (14 - i));
        }
        assert!(degree <= 255, "total degree overflow");
        packed |= (degree as u128) << 120;
        Mono {
            packed,
            nvars: n as u8,
        }
    }

    pub fn one(nvars: usize) -> Self {
        assert!(nvars <= 15);
        Mono {
            packed: 0,
            nvars: nvars as u8,
        }
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut m = Self::one(nvars);
        debug_assert!(idx < nvars);
        m.packed |= 1u128 << (8 * (14 - idx));
        m.packed |= 1u128 << 120;
        m
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn degree(&self) -> u32 {
        (self.packed >> 120) as u32
    }

    pub fn exp(&self, idx: usize) -> u32 {
        ((self.packed >> (8 * (14 - idx))) & 0xff) as u32
    }

    pub fn exps(&self) -> Vec<u32> {
        (0..self.nvars as usize).map(|i| self.exp(i)).collect()
    }

    /// Product of monomials: byte-wise addition (no carries in the
    /// working regime, asserted in debug builds).
    pub fn mul(&self, other: &Mono) -> Mono {
        debug_assert_eq!(self.nvars, other.nvars);
        debug_assert!((0..self.nvars as usize)
            .all(|i| self.exp(i) + other.exp(i) <= 255));
        Mono {
            packed: self.packed + other.packed,
            nvars: self.nvars,
        }
    }

    pub fn is_one(&self) -> bool {
        self.packed == 0
    }

    /// Largest variable index with a nonzero exponent.
    pub fn top_var(&self) -> Option<usize> {
        (0..self.nvars as usize).rev().find(|&i| self.exp(i) > 0)
    }

    /// Copy with the exponent of `idx` set to zero.
    pub fn without_var(&self, idx: usize) -> Mono {
        let e = self.exp(idx) as u128;
        let mut packed = self.packed;
        packed &= !(0xffu128 << (8 * (14 - idx)));
        packed -= e << 120;
        Mono {
            packed,
            nvars: self.nvars,
        }
    }

    /// Copy with the exponent of `idx` lowered by one (requires it to
    /// be positive).
    pub fn lower_var(&self, idx: usize) -> Mono {
        debug_assert!(self.exp(idx) > 0);
        Mono {
            packed: self.packed - (1u128 << (8 * (14 - idx))) - (1u128 << 120),
            nvars: self.nvars,
        }
    }
}

/// Binary gcd on magnitudes; avoids 128-bit division.
fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    if a == 0 {
        return (b.max(1)) as i128;
    }
    if b == 0 {
        return a as i128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return (a << shift) as i128;
        }
    }
}

/// Hasher for packed monomials: the key is already well-mixed bits.
#[derive(Default, Clone)]
struct MonoHasher(u64);

impl std::hash::Hasher for MonoHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.0 ^= u64::from_le_bytes(buf).wrapping_mul(0x9e3779b97f4a7c15);
            self.0 = self.0.rotate_left(17);
        }
    }
}

type MonoMap<V> = std::collections::HashMap<Mono, V, std::hash::BuildHasherDefault<MonoHasher>>;

fn small_of(r: &Rat) -> Option<(i128, i128)> {
    let n: i64 = r.numer().try_into().ok()?;
    let d: i64 = r.denom().try_into().ok()?;
    Some((n as i128, d as i128))
}

/// Coefficient accumulator: exact machine-word rationals promoted to
/// arbitrary precision on overflow.
enum CoeffAcc {
    Small(i128, i128),
    Big(Rat),
}

impl CoeffAcc {
    fn add_small(&mut self, pn: i128, pd: i128) {
        match self {
            CoeffAcc::Small(n, d) => {
                if *d == 1 && pd == 1 {
                    if let Some(sum) = n.checked_add(pn) {
                        if sum.unsigned_abs() <= i64::MAX as u128 {
                            *n = sum;
                            return;
                        }
                    }
                }
                // n/d + pn/pd with checked arithmetic
                let num = n
                    .checked_mul(pd)
                    .and_then(|x| pn.checked_mul(*d).and_then(|y| x.checked_add(y)));
                let den = d.checked_mul(pd);
                if let (Some(num), Some(den)) = (num, den) {
                    let g = if den == 1 { 1 } else { gcd_i128(num, den) };
                    let (num, den) = (num / g, den / g);
                    if num.unsigned_abs() <= i64::MAX as u128 && den <= i64::MAX as i128 {
                        *n = num;
                        *d = den;
                        return;
                    }
                    *self = CoeffAcc::Big(Rat::new(num.into(), den.into()));
                    return;
                }
                // overflow: promote and retry
                let big = Rat::new((*n).into(), (*d).into())
                    + Rat::new(pn.into(), pd.into());
                *self = CoeffAcc::Big(big);
            }
            CoeffAcc::Big(b) => {
                *b += Rat::new(pn.into(), pd.into());
            }
        }
    }

    fn add_big(&mut self, r: &Rat) {
        match self {
            CoeffAcc::Small(n, d) => {
                let big = Rat::new((*n).into(), (*d).into()) + r;
                *self = CoeffAcc::Big(big);
            }
            CoeffAcc::Big(b) => *b += r,
        }
    }

    fn into_rat(self) -> Rat {
        match self {
            CoeffAcc::Small(n, d) => Rat::new(n.into(), d.into()),
            CoeffAcc::Big(b) => b,
        }
    }
}

/// Sparse polynomial truncated at total degree `cap`.
///
/// Invariants: no stored coefficient is zero, every stored monomial has
/// degree at most `cap`, and all monomials have exactly `nvars` slots.
/// Equality is plain structural equality of the term maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncPoly {
    nvars: usize,
    cap: u32,
    terms: BTreeMap<Mono, Rat>,
}

impl TruncPoly {
    pub fn zero(nvars: usize, cap: u32) -> Self {
        TruncPoly {
            nvars,
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, cap: u32, c: Rat) -> Self {
        let mut p = Self::zero(nvars, cap);
        p.add_term(Mono::one(nvars), c);
        p
    }

    pub fn one(nvars: usize, cap: u32) -> Self {
        Self::constant(nvars, cap, Rat::one())
    }

    /// The coordinate polynomial `x_idx` (zero-based index).
    pub fn var(nvars: usize, cap: u32, idx: usize) -> Self {
        let mut p = Self::zero(nvars, cap);
        if cap >= 1 {
            p.add_term(Mono::var(nvars, idx), Rat::one());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Highest total degree among stored terms (zero polynomial: 0).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    /// Adds `c * m`, dropping the term when it exceeds the cap or cancels.
    pub fn add_term(&mut self, m: Mono, c: Rat) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() || m.degree() > self.cap {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_shape(&self, other: &TruncPoly) -> Result<()> {
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

    pub fn add(&self, other: &TruncPoly) -> Result<TruncPoly> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TruncPoly) -> Result<TruncPoly> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> TruncPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -std::mem::replace(c, Rat::zero());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> TruncPoly {
        if c.is_zero() {
            return TruncPoly::zero(self.nvars, self.cap);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn mul(&self, other: &TruncPoly) -> Result<TruncPoly> {
        self.check_shape(other)?;
        // Machine-word fast path: coefficients that fit in i64 are
        // multiplied and accumulated in i128 with checked arithmetic,
        // cross-reduced exactly as rationals; anything that overflows
        // promotes to arbitrary precision. Results are identical to the
        // all-BigRational computation.
        let left: Vec<(Mono, Option<(i128, i128)>, &Rat)> = self
            .terms
            .iter()
            .map(|(m, c)| (*m, small_of(c), c))
            .collect();
        let right: Vec<(Mono, Option<(i128, i128)>, &Rat)> = other
            .terms
            .iter()
            .map(|(m, c)| (*m, small_of(c), c))
            .collect();
        let mut acc: MonoMap<CoeffAcc> = MonoMap::default();
        for (ma, sa, ca) in &left {
            let da = ma.degree();
            for (mb, sb, cb) in &right {
                if da + mb.degree() > self.cap {
                    break; // terms iterate by ascending degree
                }
                let key = ma.mul(mb);
                let entry = acc.entry(key).or_insert(CoeffAcc::Small(0, 1));
                match (sa, sb) {
                    (Some((an, ad)), Some((bn, bd))) => {
                        if *ad == 1 && *bd == 1 {
                            entry.add_small(an * bn, 1);
                        } else {
                            // cross-reduce: product of reduced fractions
                            let g1 = gcd_i128(*an, *bd);
                            let g2 = gcd_i128(*ad, *bn);
                            let pn = (an / g1) * (bn / g2);
                            let pd = (ad / g2) * (bd / g1);
                            entry.add_small(pn, pd);
                        }
                    }
                    _ => entry.add_big(&(*ca * *cb)),
                }
            }
        }
        let mut out = TruncPoly::zero(self.nvars, self.cap);
        for (m, v) in acc {
            let c = v.into_rat();
            if !c.is_zero() {
                out.terms.insert(m, c);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> TruncPoly {
        let mut out = TruncPoly::one(self.nvars, self.cap);
        for _ in 0..e {
            out = out.mul(self).expect("same shape");
        }
        out
    }

    /// Exact partial derivative with respect to variable `idx` (zero-based).
    pub fn partial(&self, idx: usize) -> Result<TruncPoly> {
        if idx >= self.nvars {
            return Err(KernelError::IndexOutOfRange {
                index: idx + 1,
                nvars: self.nvars,
            });
        }
        let mut out = TruncPoly::zero(self.nvars, self.cap);
        for (m, c) in &self.terms {
            let e = m.exp(idx);
            if e > 0 {
                out.add_term(m.lower_var(idx), c * rat(e as i64));
            }
        }
        Ok(out)
    }

    /// Substitutes `args[i]` for variable `i`: `p(args[0], ..)`,
    /// truncated at the minimum of the caps involved. Evaluated by a
    /// recursive Horner scheme grouped on the highest variable, so the
    /// multiplication count scales with the grouping structure rather
    /// than the term count.
    pub fn compose(&self, args: &[TruncPoly]) -> Result<TruncPoly> {
        if args.len() != self.nvars {
            return Err(KernelError::Degree(format!(
                "composition needs {} arguments, got {}",
                self.nvars,
                args.len()
            )));
        }
        let out_nvars = args.first().map_or(self.nvars, TruncPoly::nvars);
        let mut out_cap = self.cap;
        for a in args {
            if a.nvars() != out_nvars {
                return Err(KernelError::ShapeMismatch {
                    left_nvars: out_nvars,
                    left_cap: out_cap,
                    right_nvars: a.nvars(),
                    right_cap: a.cap(),
                });
            }
            out_cap = out_cap.min(a.cap());
        }
        let retrunc: Vec<TruncPoly> = args.iter().map(|a| a.retruncate(out_cap)).collect();
        // near-identity substitutions take the Taylor route: with
        // args[i] = x_i + h_i and val(h_i) >= 2 the expansion
        // p(x + h) = sum_a (d^a p / a!) h^a terminates within cap/2
        // orders and costs far less than general evaluation
        if out_nvars == self.nvars {
            if let Some(offsets) = near_identity_offsets(&retrunc) {
                return Ok(taylor_compose(&self.retruncate(out_cap), &offsets, out_cap));
            }
        }
        let terms: Vec<(Mono, Rat)> = self
            .terms
            .iter()
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        Ok(compose_rec(&terms, &retrunc, out_nvars, out_cap))
    }

    /// Same terms under a new cap; terms above the new cap are dropped.
    pub fn retruncate(&self, cap: u32) -> TruncPoly {
        let mut out = TruncPoly::zero(self.nvars, cap);
        for (m, c) in &self.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    /// The homogeneous part of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> TruncPoly {
        let mut out = TruncPoly::zero(self.nvars, self.cap);
        for (m, c) in &self.terms {
            if m.degree() == d {
                out.add_term(*m, c.clone());
            }
        }
        out
    }

    /// Terms of degree `<= d`.
    pub fn truncate_degree(&self, d: u32) -> TruncPoly {
        let mut out = TruncPoly::zero(self.nvars, self.cap);
        for (m, c) in &self.terms {
            if m.degree() <= d {
                out.add_term(*m, c.clone());
            }
        }
        out
    }

    /// True when every term is homogeneous of degree `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == d)
    }

    /// Evaluates the polynomial with the listed variables set to zero,
    /// keeping the others (used for restriction to coordinate subspaces).
    pub fn set_vars_zero(&self, vars: &[usize]) -> TruncPoly {
        let mut out = TruncPoly::zero(self.nvars, self.cap);
        for (m, c) in &self.terms {
            if vars.iter().all(|&v| m.exp(v) == 0) {
                out.add_term(*m, c.clone());
            }
        }
        out
    }

    /// Reindexes onto a smaller variable set: `keep[i]` is the old index
    /// that becomes new variable `i`. Terms touching dropped variables
    /// must have been removed beforehand.
    pub fn project_vars(&self, keep: &[usize], cap: u32) -> TruncPoly {
        let mut out = TruncPoly::zero(keep.len(), cap);
        for (m, c) in &self.terms {
            let e: Vec<u32> = keep.iter().map(|&v| m.exp(v)).collect();
            debug_assert_eq!(e.iter().sum::<u32>(), m.degree());
            out.add_term(Mono::new(&e), c.clone());
        }
        out
    }

    /// The coefficient of `x_idx` in a (homogeneous linear) polynomial.
    pub fn linear_coeff(&self, idx: usize) -> Rat {
        self.coeff(&Mono::var(self.nvars, idx))
    }
}


/// `Some(h)` when every argument is `x_i + h_i` with `val(h_i) >= 2`.
fn near_identity_offsets(args: &[TruncPoly]) -> Option<Vec<TruncPoly>> {
    let n = args.len();
    let cap = args.first()?.cap();
    let mut offsets = Vec::with_capacity(n);
    for (i, a) in args.iter().enumerate() {
        let h = a.sub(&TruncPoly::var(n, cap, i)).ok()?;
        if h.terms.keys().any(|m| m.degree() < 2) {
            return None;
        }
        offsets.push(h);
    }
    Some(offsets)
}

/// Exact multivariate Taylor substitution `p(x + h)`.
fn taylor_compose(p: &TruncPoly, offsets: &[TruncPoly], cap: u32) -> TruncPoly {
    let n = p.nvars();
    let mut acc = TruncPoly::zero(n, cap);
    // DFS over multi-indices: `deriv` carries d^a p / a! for the
    // variables already processed, `hpow` the matching h^a product
    fn rec(
        var: usize,
        deriv: &TruncPoly,
        hpow: &TruncPoly,
        offsets: &[TruncPoly],
        acc: &mut TruncPoly,
    ) {
        if var == offsets.len() {
            if let Ok(term) = deriv.mul(hpow) {
                *acc = acc.add(&term).expect("same shape");
            }
            return;
        }
        if deriv.is_zero() || hpow.is_zero() {
            return;
        }
        let h = &offsets[var];
        // order zero
        rec(var + 1, deriv, hpow, offsets, acc);
        if h.is_zero() {
            return;
        }
        let mut d = deriv.clone();
        let mut hp = hpow.clone();
        let mut order = 1u32;
        loop {
            d = match d.partial(var) {
                Ok(next) => next.scale(&Rat::new(1.into(), order.into())),
                Err(_) => break,
            };
            hp = hp.mul(h).expect("same shape");
            if d.is_zero() || hp.is_zero() {
                break;
            }
            rec(var + 1, &d, &hp, offsets, acc);
            order += 1;
        }
    }
    let one = TruncPoly::one(n, cap);
    rec(0, p, &one, offsets, &mut acc);
    acc
}

/// Recursive Horner evaluation: group the terms by the exponent of the
/// highest variable present, recurse on the groups, and fold with
/// cached powers of that variable's image.
fn compose_rec(
    terms: &[(Mono, Rat)],
    args: &[TruncPoly],
    out_nvars: usize,
    out_cap: u32,
) -> TruncPoly {
    if terms.is_empty() {
        return TruncPoly::zero(out_nvars, out_cap);
    }
    // highest variable appearing anywhere in this group
    let Some(v) = terms.iter().filter_map(|(m, _)| m.top_var()).max() else {
        // all constant
        let mut out = TruncPoly::zero(out_nvars, out_cap);
        for (m, c) in terms {
            let _ = m;
            out.add_term(Mono::one(out_nvars), c.clone());
        }
        return out;
    };
    let mut groups: std::collections::BTreeMap<u32, Vec<(Mono, Rat)>> =
        std::collections::BTreeMap::new();
    for (m, c) in terms {
        groups
            .entry(m.exp(v))
            .or_default()
            .push((m.without_var(v), c.clone()));
    }
    // Horner from the highest exponent down
    let image = &args[v];
    let mut acc = TruncPoly::zero(out_nvars, out_cap);
    let mut prev_exp: Option<u32> = None;
    for (&e, group) in groups.iter().rev() {
        if let Some(pe) = prev_exp {
            for _ in 0..pe - e {
                acc = acc.mul(image).expect("same shape");
            }
        }
        let part = compose_rec(group, args, out_nvars, out_cap);
        acc = acc.add(&part).expect("same shape");
        prev_exp = Some(e);
    }
    if let Some(pe) = prev_exp {
        for _ in 0..pe {
            acc = acc.mul(image).expect("same shape");
        }
    }
    acc
}
