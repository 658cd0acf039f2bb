//! Exact rational coefficients.
//!
//! Every coefficient in the kernel is a [`Rat`] (arbitrary-precision
//! rational, kept reduced with positive denominator). No floating point
//! exists anywhere in the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Squarefree decomposition of a positive rational: returns `(s, l)` with
/// `r = s * l^2`, `s` a squarefree positive integer. Uses trial division;
/// the magnitudes seen here come from normal-form scaling and stay small.
pub fn squarefree_part(r: &Rat) -> (Rat, Rat) {
    assert!(r.is_positive(), "squarefree_part needs a positive rational");
    // p/q = (p*q) / q^2, so the squarefree part of p/q is that of p*q.
    let pq: BigInt = r.numer() * r.denom();
    let (s, m) = squarefree_int(&pq);
    // r = s * (m/q)^2
    let l = Rat::new(m, r.denom().clone());
    (Rat::from_integer(s), l)
}

fn squarefree_int(n: &BigInt) -> (BigInt, BigInt) {
    let mut n = n.clone();
    assert!(n.is_positive());
    let mut square_root = BigInt::one();
    let mut free = BigInt::one();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        let mut count = 0u32;
        while (&n % &d).is_zero() {
            n /= &d;
            count += 1;
        }
        if count % 2 == 1 {
            free *= &d;
        }
        for _ in 0..count / 2 {
            square_root *= &d;
        }
        d += 1;
    }
    // leftover n is prime (or 1)
    free *= &n;
    (free, square_root)
}
