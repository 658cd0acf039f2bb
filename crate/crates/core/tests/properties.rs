//! Property tests for the algebraic laws of the kernel: ring laws,
//! jet composition and reversion, exterior algebra identities, Schouten
//! bracket identities, duality, and naturality under coordinate changes.
//! Every assertion is an exact equality of rational polynomial data.

use nambu::linalg::RatMat;
use nambu::polymap::PolyMap;
use nambu::polyring::{Mono, TruncPoly};
use nambu::rat::{rat, Rat};
use nambu::tensor::{d_of_poly, DiffForm, Multivector};
use proptest::prelude::*;

const CAP: u32 = 5;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Rat::new(p.into(), q.into()))
}

fn arb_poly(nvars: usize, cap: u32, max_deg: u32) -> impl Strategy<Value = TruncPoly> {
    let term = (
        prop::collection::vec(0u32..=max_deg, nvars),
        arb_rat(),
    );
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut p = TruncPoly::zero(nvars, cap);
        for (exps, c) in terms {
            if exps.iter().sum::<u32>() <= max_deg {
                p.add_term(Mono::new(&exps), c);
            }
        }
        p
    })
}

fn arb_tensor(nvars: usize, degree: usize, cap: u32, max_deg: u32) -> BoxedStrategy<Multivector> {
    let tuples: Vec<Vec<usize>> = increasing_tuples(nvars, degree);
    prop::collection::vec(arb_poly(nvars, cap, max_deg), tuples.len())
        .prop_map(move |polys| {
            let mut t = Multivector::zero(nvars, degree, cap);
            for (idx, p) in tuples.iter().zip(polys) {
                t.add_term(idx, p).unwrap();
            }
            t
        })
        .boxed()
}

fn arb_form(nvars: usize, degree: usize, cap: u32, max_deg: u32) -> BoxedStrategy<DiffForm> {
    arb_tensor(nvars, degree, cap, max_deg)
        .prop_map(|t| t.dual_form().dual_mv().dual_form().dual_mv().dual_form())
        .prop_map(|f| {
            // dual of dual of dual: any form of complementary degree; remap:
            f
        })
        .boxed()
}

fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

fn arb_near_identity(nvars: usize, cap: u32) -> BoxedStrategy<PolyMap> {
    let term = (
        0..nvars,
        prop::collection::vec(0u32..=3, nvars),
        (-3i64..=3, 1i64..=2),
    );
    prop::collection::vec(term, 0..5)
        .prop_map(move |terms| {
            let mut comps: Vec<TruncPoly> = (0..nvars)
                .map(|i| TruncPoly::var(nvars, cap, i))
                .collect();
            for (i, exps, (p, q)) in terms {
                let d: u32 = exps.iter().sum();
                if (2..=3).contains(&d) {
                    comps[i].add_term(Mono::new(&exps), Rat::new(p.into(), q.into()));
                }
            }
            PolyMap::new(comps).unwrap()
        })
        .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in arb_poly(3, CAP, 4), b in arb_poly(3, CAP, 4), c in arb_poly(3, CAP, 4)) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert_eq!(&ab, &ba);
        let abc1 = ab.mul(&c).unwrap();
        let abc2 = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(abc1, abc2);
        let dist1 = a.mul(&b.add(&c).unwrap()).unwrap();
        let dist2 = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(dist1, dist2);
        let assoc_add1 = a.add(&b.add(&c).unwrap()).unwrap();
        let assoc_add2 = a.add(&b).unwrap().add(&c).unwrap();
        prop_assert_eq!(assoc_add1, assoc_add2);
    }

    #[test]
    fn composition_is_functorial(
        p in arb_poly(2, CAP, 3),
        phi in arb_near_identity(2, CAP),
        psi in arb_near_identity(2, CAP),
    ) {
        // p . (phi . psi) = (p . phi) . psi
        let lhs = p.compose(phi.compose(&psi).unwrap().components()).unwrap();
        let rhs = p
            .compose(phi.components())
            .unwrap()
            .compose(psi.components())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn map_inverse_is_two_sided(phi in arb_near_identity(3, 8)) {
        let psi = phi.invert().unwrap();
        prop_assert!(phi.compose(&psi).unwrap().is_identity());
        prop_assert!(psi.compose(&phi).unwrap().is_identity());
    }

    #[test]
    fn schouten_graded_antisymmetry(
        (a, b) in (1usize..=3, 1usize..=3),
        seed in any::<u64>(),
    ) {
        let (ta, tb) = two_random_tensors(4, a, b, seed);
        let ab = ta.schouten(&tb).unwrap();
        let ba = tb.schouten(&ta).unwrap();
        let sign = if ((a + 1) * (b + 1)) % 2 == 0 { -1 } else { 1 };
        let expect = if sign < 0 { ba.neg() } else { ba };
        prop_assert_eq!(ab, expect);
    }

    #[test]
    fn schouten_graded_jacobi(
        (a, b, c) in (1usize..=2, 1usize..=2, 1usize..=2),
        seed in any::<u64>(),
    ) {
        let n = 4;
        let (ta, tb) = two_random_tensors(n, a, b, seed);
        let (tc, _) = two_random_tensors(n, c, 1, seed.wrapping_add(17));
        // (-1)^{(a-1)(c-1)} [[A,B],C] + (-1)^{(b-1)(a-1)} [[B,C],A]
        //   + (-1)^{(c-1)(b-1)} [[C,A],B] = 0
        let sgn = |x: usize, y: usize| -> i64 {
            if ((x + 1) * (y + 1)) % 2 == 1 { -1 } else { 1 }
        };
        let t1 = ta.schouten(&tb).unwrap().schouten(&tc).unwrap().scale(&rat(sgn(a, c)));
        let t2 = tb.schouten(&tc).unwrap().schouten(&ta).unwrap().scale(&rat(sgn(b, a)));
        let t3 = tc.schouten(&ta).unwrap().schouten(&tb).unwrap().scale(&rat(sgn(c, b)));
        let total = t1.add(&t2).unwrap().add(&t3).unwrap();
        prop_assert!(total.is_zero(), "jacobi residual: {total:?}");
    }

    #[test]
    fn schouten_leibniz(
        (a, b, c) in (1usize..=2, 1usize..=2, 1usize..=2),
        seed in any::<u64>(),
    ) {
        let n = 5;
        let (ta, tb) = two_random_tensors(n, a, b, seed);
        let (tc, _) = two_random_tensors(n, c, 1, seed.wrapping_add(41));
        // [A, B ^ C] = [A,B] ^ C + (-1)^{(a-1) b} B ^ [A,C]
        let lhs = ta.schouten(&tb.wedge(&tc).unwrap()).unwrap();
        let t1 = ta.schouten(&tb).unwrap().wedge(&tc).unwrap();
        let mut t2 = tb.wedge(&ta.schouten(&tc).unwrap()).unwrap();
        if ((a + 1) * b) % 2 == 1 {
            t2 = t2.neg();
        }
        prop_assert_eq!(lhs, t1.add(&t2).unwrap());
    }

    #[test]
    fn duality_round_trip(deg in 1usize..=4, seed in any::<u64>()) {
        let n = 5;
        let (t, _) = two_random_tensors(n, deg, 1, seed);
        prop_assert_eq!(t.dual_form().dual_mv(), t.clone());
        let f = t.dual_form();
        prop_assert_eq!(f.dual_mv().dual_form(), f);
    }

    #[test]
    fn d_squared_zero_and_cartan(
        deg in 0usize..=2,
        seed in any::<u64>(),
    ) {
        let n = 3;
        let (t, x) = two_random_tensors(n, deg.max(1), 1, seed);
        let f = t.dual_form();
        prop_assert!(f.ext_d().unwrap().ext_d().unwrap().is_zero());
        // L_X commutes with d on forms
        let lhs = f.lie_derivative(&x).unwrap().ext_d().unwrap();
        let rhs = f.ext_d().unwrap().lie_derivative(&x).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_respects_wedge(
        seed in any::<u64>(),
    ) {
        let n = 3;
        let (t1, t2) = two_random_tensors(n, 2, 1, seed);
        let (a, b) = (t1.dual_form(), t2.dual_form());
        let phi = pseudo_map(n, CAP, seed);
        let lhs = a.wedge(&b).unwrap().pullback(&phi).unwrap();
        let rhs = a.pullback(&phi).unwrap().wedge(&b.pullback(&phi).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_is_functorial(seed in any::<u64>()) {
        let n = 3;
        let (t, _) = two_random_tensors(n, 2, 1, seed);
        let phi = pseudo_map(n, CAP, seed.wrapping_add(1));
        let psi = pseudo_map(n, CAP, seed.wrapping_add(2));
        let lhs = t.pushforward(&phi.compose(&psi).unwrap()).unwrap();
        let rhs = t.pushforward(&psi).unwrap().pushforward(&phi).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn duality_naturality_for_linear_maps(seed in any::<u64>()) {
        // dual_form(push(phi, P)) = det(J_phi) * pullback(phi^{-1}, dual_form(P))
        let n = 4;
        let (t, _) = two_random_tensors(n, 2, seed as usize % 3 + 1, seed);
        let a = pseudo_unimodular(n, seed);
        let phi = PolyMap::linear(&a, CAP).unwrap();
        let det = a.determinant();
        let lhs = t.pushforward(&phi).unwrap().dual_form();
        let rhs = t
            .dual_form()
            .pullback(&phi.invert().unwrap())
            .unwrap()
            .scale(&det);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lie_derivative_leibniz_over_wedge(seed in any::<u64>()) {
        let n = 4;
        let (a, x) = two_random_tensors(n, 2, 1, seed);
        let (b, _) = two_random_tensors(n, 1, 1, seed.wrapping_add(7));
        let lhs = a.wedge(&b).unwrap().lie_derivative(&x).unwrap();
        let rhs = a
            .lie_derivative(&x)
            .unwrap()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&b.lie_derivative(&x).unwrap()).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

/// Deterministic pseudo-random tensors from a seed (keeps the strategy
/// space small while still exercising many shapes).
fn two_random_tensors(n: usize, da: usize, db: usize, seed: u64) -> (Multivector, Multivector) {
    let mut state = seed | 1;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as i64
    };
    let mut build = |deg: usize| {
        let mut t = Multivector::zero(n, deg, CAP);
        for idx in increasing_tuples(n, deg) {
            let mut p = TruncPoly::zero(n, CAP);
            for _ in 0..2 {
                let mut exps = vec![0u32; n];
                let total = (next() % 3).unsigned_abs() as u32;
                for _ in 0..total {
                    let v = (next() % n as i64).unsigned_abs() as usize;
                    exps[v] += 1;
                }
                let c = next() % 5;
                p.add_term(Mono::new(&exps), rat(c));
            }
            t.add_term(&idx, p).unwrap();
        }
        t
    };
    (build(da), build(db))
}

fn pseudo_map(n: usize, cap: u32, seed: u64) -> PolyMap {
    let mut state = seed | 1;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as i64
    };
    let mut comps: Vec<TruncPoly> = (0..n).map(|i| TruncPoly::var(n, cap, i)).collect();
    for comp in comps.iter_mut() {
        for _ in 0..2 {
            let mut exps = vec![0u32; n];
            for _ in 0..2 {
                let v = (next() % n as i64).unsigned_abs() as usize;
                exps[v] += 1;
            }
            comp.add_term(Mono::new(&exps), rat(next() % 3));
        }
    }
    PolyMap::new(comps).unwrap()
}

fn pseudo_unimodular(n: usize, seed: u64) -> RatMat {
    let mut state = seed | 1;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as i64
    };
    let mut m = RatMat::identity(n);
    // product of elementary shears and swaps stays invertible
    for _ in 0..2 * n {
        let i = (next() % n as i64).unsigned_abs() as usize;
        let j = (next() % n as i64).unsigned_abs() as usize;
        if i == j {
            continue;
        }
        let c = rat(next() % 3);
        for k in 0..n {
            let add = &m[(j, k)] * &c;
            let v = &m[(i, k)] + add;
            m[(i, k)] = v;
        }
    }
    m
}
