//! Seeded generators for structures, perturbations, and conjugations.
//!
//! Instances are manufactured exclusively as pushforwards of exact
//! normal forms, which provably preserves the Nambu property, so every
//! generated tensor carries a ground-truth certificate by construction.
//! All randomness flows through a counter-based `ChaCha8Rng`, making
//! generated instances reproducible across platforms from a `u64` seed.

use crate::classify::LinearNormalForm;
use crate::error::Result;
use crate::linalg::RatMat;
use crate::polymap::PolyMap;
use crate::polyring::{Mono, TruncPoly};
use crate::rat::{rat, Rat};
use crate::tensor::Multivector;
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The nondegenerate Type 1 normal form with the given signs (length
/// `q + 1`, unit scales).
pub fn type1_normal(q: usize, n: usize, signs: &[i8], cap: u32) -> Multivector {
    assert_eq!(signs.len(), q + 1);
    assert!(n > q);
    let form = LinearNormalForm::Type1 {
        q,
        n,
        r: q + 1,
        s: 0,
        signs: signs.to_vec(),
        scales: vec![Rat::one(); q + 1],
        signature: (
            signs.iter().filter(|&&s| s > 0).count(),
            signs.iter().filter(|&&s| s < 0).count(),
        ),
        nondegenerate: true,
        elliptic: signs.iter().all(|&s| s > 0) || signs.iter().all(|&s| s < 0),
        hyperbolic: false,
        excluded_signature: false,
    };
    form.normal_tensor(cap)
}

/// The Type 2 normal form for a given field matrix over `x_q..x_n`.
pub fn type2_normal(q: usize, n: usize, b: Vec<Vec<Rat>>, cap: u32) -> Multivector {
    let nondegenerate = RatMat::from_rows(b.clone()).inverse().is_some();
    let form = LinearNormalForm::Type2 {
        q,
        n,
        b,
        nondegenerate,
    };
    form.normal_tensor(cap)
}

/// A random near-identity map: the identity plus a few homogeneous
/// terms of degree `2..=max_degree` with small rational coefficients.
pub fn random_near_identity(
    n: usize,
    cap: u32,
    max_degree: u32,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> PolyMap {
    let mut comps: Vec<TruncPoly> = (0..n).map(|i| TruncPoly::var(n, cap, i)).collect();
    for _ in 0..terms {
        let target = rng.random_range(0..n);
        let degree = rng.random_range(2..=max_degree.max(2));
        let mut exps = vec![0u32; n];
        for _ in 0..degree {
            exps[rng.random_range(0..n)] += 1;
        }
        let numer = *[-2i64, -1, 1, 2].choose(rng).unwrap();
        let denom = *[1i64, 2, 3].choose(rng).unwrap();
        comps[target].add_term(Mono::new(&exps), Rat::new(numer.into(), denom.into()));
    }
    PolyMap::new(comps).expect("identity linear part stays invertible")
}

/// A random integer unimodular matrix: a product of elementary shears
/// and sign flips, so the determinant is plus or minus one.
pub fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> RatMat {
    let mut m = RatMat::identity(n);
    for _ in 0..3 * n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let c = rat(rng.random_range(-2..=2));
        for k in 0..n {
            let add = &m[(j, k)] * &c;
            let v = &m[(i, k)] + add;
            m[(i, k)] = v;
        }
    }
    // occasional sign flip keeps both orientations in play
    if rng.random_bool(0.5) {
        for k in 0..n {
            m[(0, k)] = -m[(0, k)].clone();
        }
    }
    m
}

/// A certified Nambu instance: the chosen normal form pushed forward by
/// a random near-identity map of the given polynomial degree.
pub fn perturbed_type1(
    q: usize,
    n: usize,
    signs: &[i8],
    cap: u32,
    pert_degree: u32,
    seed: u64,
) -> Result<Multivector> {
    let mut rng = rng_from_seed(seed);
    let base = type1_normal(q, n, signs, cap);
    let phi = random_near_identity(n, cap, pert_degree, 2 + n / 2, &mut rng);
    base.pushforward(&phi)
}

/// A random Type 2 instance with integer matrix entries, conjugated by
/// a random unimodular change.
pub fn random_type2(q: usize, n: usize, cap: u32, seed: u64) -> Result<Multivector> {
    let mut rng = rng_from_seed(seed);
    let size = n - q + 1;
    let b: Vec<Vec<Rat>> = (0..size)
        .map(|_| (0..size).map(|_| rat(rng.random_range(-2..=2))).collect())
        .collect();
    let base = type2_normal(q, n, b, cap);
    let conj = PolyMap::linear(&random_unimodular(n, &mut rng), cap)?;
    base.pushforward(&conj)
}

use num_traits::One;
