//! Acceptance suite: every criterion is an exact property (tolerance
//! zero by rational arithmetic). One line per criterion is printed on
//! success; run with `cargo test --test acceptance -- --nocapture` to
//! see them.

use nambu::classify::{classify_linear, is_nambu, LinearNormalForm, WitnessCondition};
use nambu::gen::{
    perturbed_type1, random_near_identity, random_type2, random_unimodular, rng_from_seed,
    type1_normal,
};
use nambu::linalg::RatMat;
use nambu::linearize::{linearize, slice_lambda, slice_theta, so_average_poly, Schedule};
use nambu::polymap::PolyMap;
use nambu::polyring::{Mono, TruncPoly};
use nambu::rat::{rat, Rat};
use nambu::tensor::{d_of_poly, increasing_tuples, lie_derivative_poly, DiffForm, Multivector};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_poly(n: usize, cap: u32, max_deg: u32, rng: &mut ChaCha8Rng) -> TruncPoly {
    let mut p = TruncPoly::zero(n, cap);
    for _ in 0..rng.random_range(1..=4) {
        let mut exps = vec![0u32; n];
        let d = rng.random_range(0..=max_deg);
        for _ in 0..d {
            exps[rng.random_range(0..n)] += 1;
        }
        let numer = rng.random_range(-4i64..=4);
        let denom = rng.random_range(1i64..=3);
        p.add_term(Mono::new(&exps), Rat::new(numer.into(), denom.into()));
    }
    p
}

fn random_tensor(
    n: usize,
    degree: usize,
    cap: u32,
    max_deg: u32,
    rng: &mut ChaCha8Rng,
) -> Multivector {
    let mut t = Multivector::zero(n, degree, cap);
    for idx in increasing_tuples(n, degree) {
        if rng.random_bool(0.7) {
            t.insert_component(idx, random_poly(n, cap, max_deg, rng));
        }
    }
    t
}

#[test]
fn acceptance_1_duality_round_trip() {
    let start = std::time::Instant::now();
    let mut rng = rng_from_seed(101);
    for case in 0..500 {
        let n = rng.random_range(2..=6);
        let degree = rng.random_range(1..=n);
        let t = random_tensor(n, degree, 6, 3, &mut rng);
        assert_eq!(t.dual_form().dual_mv(), t, "case {case}");
    }
    assert!(start.elapsed().as_secs() <= 10, "{:?}", start.elapsed());
    println!(
        "ACCEPTANCE 1 PASS: 500 exact duality round trips in {:?}",
        start.elapsed()
    );
}

#[test]
fn acceptance_2_schouten_laws() {
    let start = std::time::Instant::now();
    let mut rng = rng_from_seed(202);
    let sgn = |x: usize, y: usize| -> i64 {
        if ((x + 1) * (y + 1)) % 2 == 1 {
            -1
        } else {
            1
        }
    };
    for case in 0..200 {
        let n = rng.random_range(2..=5);
        let a_deg = rng.random_range(1..=2.min(n));
        let b_deg = rng.random_range(1..=2.min(n));
        let c_deg = rng.random_range(1..=2.min(n));
        let cap = 5;
        let a = random_tensor(n, a_deg, cap, 2, &mut rng);
        let b = random_tensor(n, b_deg, cap, 2, &mut rng);
        let c = random_tensor(n, c_deg, cap, 2, &mut rng);

        // graded antisymmetry
        let ab = a.schouten(&b).unwrap();
        let ba = b.schouten(&a).unwrap();
        let expect = if sgn(a_deg, b_deg) < 0 { ba.neg() } else { ba };
        assert_eq!(ab, expect, "antisymmetry, case {case}");

        // graded Jacobi
        let t1 = a
            .schouten(&b)
            .unwrap()
            .schouten(&c)
            .unwrap()
            .scale(&rat(sgn(a_deg, c_deg)));
        let t2 = b
            .schouten(&c)
            .unwrap()
            .schouten(&a)
            .unwrap()
            .scale(&rat(sgn(b_deg, a_deg)));
        let t3 = c
            .schouten(&a)
            .unwrap()
            .schouten(&b)
            .unwrap()
            .scale(&rat(sgn(c_deg, b_deg)));
        assert!(
            t1.add(&t2).unwrap().add(&t3).unwrap().is_zero(),
            "jacobi, case {case}"
        );

        // Leibniz over the wedge
        let lhs = a.schouten(&b.wedge(&c).unwrap()).unwrap();
        let mut rhs = a.schouten(&b).unwrap().wedge(&c).unwrap();
        let mut second = b.wedge(&a.schouten(&c).unwrap()).unwrap();
        if ((a_deg + 1) * b_deg) % 2 == 1 {
            second = second.neg();
        }
        rhs = rhs.add(&second).unwrap();
        assert_eq!(lhs, rhs, "leibniz, case {case}");
    }
    assert!(start.elapsed().as_secs() <= 30, "{:?}", start.elapsed());
    println!(
        "ACCEPTANCE 2 PASS: 200 triples satisfy antisymmetry, Jacobi, Leibniz exactly in {:?}",
        start.elapsed()
    );
}

#[test]
fn acceptance_3_integrability() {
    let start = std::time::Instant::now();
    let mut rng = rng_from_seed(303);
    let mut checked = 0usize;
    // Type 1: every sign pattern for q in {2,3,4}, each n <= 6
    for q in 2..=4usize {
        for n in q + 1..=6 {
            for pattern in 0..(1u32 << (q + 1)) {
                let signs: Vec<i8> = (0..=q)
                    .map(|i| if pattern & (1 << i) != 0 { 1 } else { -1 })
                    .collect();
                let base = type1_normal(q, n, &signs, 5);
                let phi = random_near_identity(n, 5, 2, 2, &mut rng);
                let moved = base.pushforward(&phi).unwrap();
                let report = is_nambu(&moved).unwrap();
                assert!(report.integrable, "q={q} n={n} signs={signs:?}");
                checked += 1;
            }
        }
    }
    // Type 2: ten random matrices
    for seed in 0..10u64 {
        let q = 2 + (seed as usize) % 3;
        let n = (q + 2).min(6).max(q + 1);
        let t = random_type2(q, n, 5, 900 + seed).unwrap();
        assert!(is_nambu(&t).unwrap().integrable, "type2 seed {seed}");
        checked += 1;
    }
    // documented non-example: d1^d2 + d3^d4
    let sympl = Multivector::basis(4, 5, &[0, 1])
        .add(&Multivector::basis(4, 5, &[2, 3]))
        .unwrap();
    let report = is_nambu(&sympl).unwrap();
    assert!(!report.integrable);
    assert_eq!(
        report.witness.as_ref().unwrap().condition,
        WitnessCondition::SelfWedge
    );
    // non-integrable linear 2-form instance, confirmed by the checker
    let n = 4;
    let mut w = DiffForm::zero(n, 5, 2);
    let mut p1 = TruncPoly::zero(n, 5);
    p1.add_term(Mono::new(&[1, 0, 0, 0]), Rat::one());
    w.insert_component(vec![0, 1], p1);
    let mut p2 = TruncPoly::zero(n, 5);
    p2.add_term(Mono::new(&[0, 1, 0, 0]), Rat::one());
    w.insert_component(vec![2, 3], p2);
    let report = is_nambu(&w.dual_mv()).unwrap();
    assert!(!report.integrable);
    assert!(report.witness.is_some());
    assert!(start.elapsed().as_secs() <= 60, "{:?}", start.elapsed());
    println!(
        "ACCEPTANCE 3 PASS: {checked} normal-form pushforwards integrable, non-examples rejected with witnesses, in {:?}",
        start.elapsed()
    );
}

fn unordered(sig: (usize, usize)) -> (usize, usize) {
    (sig.0.min(sig.1), sig.0.max(sig.1))
}

#[test]
fn acceptance_4_classification_invariance() {
    let start = std::time::Instant::now();
    let mut rng = rng_from_seed(404);
    for case in 0..100 {
        let cap = 4;
        let type2_case = case % 5 == 4;
        if type2_case {
            let q = rng.random_range(2..=3usize);
            let n = rng.random_range(q + 1..=5);
            let t = random_type2(q, n, cap, 7000 + case as u64).unwrap();
            let (form, map) = classify_linear(&t).unwrap();
            assert_eq!(form.type_name(), "type2", "case {case}");
            assert_eq!(
                t.pushforward(&map).unwrap(),
                form.normal_tensor(cap),
                "case {case}"
            );
        } else {
            let q = rng.random_range(2..=4usize);
            let n = rng.random_range(q + 1..=6);
            let signs: Vec<i8> = (0..=q)
                .map(|_| if rng.random_bool(0.6) { 1 } else { -1 })
                .collect();
            let base = type1_normal(q, n, &signs, cap);
            let conj = PolyMap::linear(&random_unimodular(n, &mut rng), cap).unwrap();
            let moved = base.pushforward(&conj).unwrap();
            let (form, map) = classify_linear(&moved).unwrap();
            let plus = signs.iter().filter(|&&s| s > 0).count();
            let expect_sig = unordered((plus, q + 1 - plus));
            match &form {
                LinearNormalForm::Type1 {
                    q: fq,
                    r,
                    s,
                    signature,
                    nondegenerate,
                    ..
                } => {
                    assert_eq!((*fq, *r, *s), (q, q + 1, 0), "case {case}");
                    assert!(nondegenerate);
                    assert_eq!(unordered(*signature), expect_sig, "case {case}");
                }
                other => panic!("case {case}: expected Type 1, got {other:?}"),
            }
            assert_eq!(
                moved.pushforward(&map).unwrap(),
                form.normal_tensor(cap),
                "case {case}: normal form not reproduced"
            );
        }
    }
    assert!(start.elapsed().as_secs() <= 60, "{:?}", start.elapsed());
    println!(
        "ACCEPTANCE 4 PASS: 100 conjugated normal forms recover (type, r, s, signature) with exact reproduction in {:?}",
        start.elapsed()
    );
}

#[test]
fn acceptance_5_end_to_end_linearization() {
    let overall = std::time::Instant::now();
    // (q, n, signs, seed): elliptic and hyperbolic nondegenerate cases,
    // including signature (3,1)
    let instances: Vec<(usize, usize, Vec<i8>, u64)> = vec![
        (2, 4, vec![1, 1, 1], 1),
        (2, 4, vec![1, 1, -1], 2),
        (2, 4, vec![1, -1, 1], 3),
        (2, 4, vec![1, 1, 1], 4),
        (2, 4, vec![-1, -1, -1], 5),
        (2, 5, vec![1, 1, 1], 6),
        (2, 5, vec![1, 1, -1], 7),
        (2, 5, vec![1, -1, -1], 8),
        (2, 5, vec![1, 1, 1], 9),
        (2, 6, vec![1, 1, 1], 10),
        (2, 6, vec![1, 1, -1], 11),
        (3, 4, vec![1, 1, 1, 1], 12),
        (3, 4, vec![1, 1, 1, -1], 13),
        (3, 4, vec![1, 1, -1, -1], 14),
        (3, 4, vec![1, 1, 1, 1], 15),
        (3, 5, vec![1, 1, 1, 1], 16),
        (3, 5, vec![1, 1, 1, -1], 17), // signature (3, 1)
        (3, 5, vec![1, -1, -1, -1], 18),
        (3, 6, vec![1, 1, 1, -1], 19), // signature (3, 1)
        (3, 6, vec![1, 1, 1, 1], 20),
    ];
    assert!(instances.len() >= 20);
    let target = 8;
    let cap = 9;
    for (q, n, signs, seed) in &instances {
        let per_instance = std::time::Instant::now();
        let pi = perturbed_type1(*q, *n, signs, cap, 3, *seed).unwrap();
        for schedule in [Schedule::Doubling, Schedule::Stepwise] {
            let (map, trace) = linearize(&pi, target, schedule).unwrap_or_else(|e| {
                panic!("q={q} n={n} signs={signs:?} seed={seed} {schedule:?}: {e}")
            });
            assert_eq!(trace.linear_through, target);
            // independent one-shot check: push the input through the
            // accumulated map and demand exactly zero components in
            // every polynomial degree 2..=8
            let out = pi.pushforward(&map).unwrap();
            assert!(
                out.vanishes_in_degrees(2, target),
                "q={q} n={n} seed={seed} {schedule:?}: nonlinear residue"
            );
            assert!(
                !out.homogeneous_part(1).is_zero(),
                "linear part must survive"
            );
        }
        assert!(
            per_instance.elapsed().as_secs() <= 60,
            "q={q} n={n} seed={seed}: {:?}",
            per_instance.elapsed()
        );
    }
    println!(
        "ACCEPTANCE 5 PASS: {} instances linearized exactly through degree {target} under both schedules in {:?}",
        instances.len(),
        overall.elapsed()
    );
}

/// Exact rotation-average of a monomial `x1^a x2^b` via the angle
/// integral: binomial expansion against Wallis integrals.
fn angle_integral_average(a: u32, b: u32, n: usize, cap: u32) -> TruncPoly {
    fn binom(n: u32, k: u32) -> Rat {
        let mut out = Rat::one();
        for i in 0..k {
            out *= Rat::new(((n - i) as i64).into(), ((i + 1) as i64).into());
        }
        out
    }
    // (1/2pi) Int cos^p sin^q dtheta
    fn wallis(p: u32, q: u32) -> Rat {
        if p % 2 == 1 || q % 2 == 1 {
            return Rat::zero();
        }
        // (p-1)!! (q-1)!! / (p+q)!!
        let double_fact = |mut k: i64| -> Rat {
            let mut out = Rat::one();
            while k > 1 {
                out *= Rat::from_integer(k.into());
                k -= 2;
            }
            out
        };
        double_fact(p as i64 - 1) * double_fact(q as i64 - 1)
            / double_fact((p + q) as i64)
    }
    let mut out = TruncPoly::zero(n, cap);
    // x1 -> cos t x1 - sin t x2, x2 -> sin t x1 + cos t x2
    for i in 0..=a {
        for j in 0..=b {
            // cos^(i + b - j) sin^(a - i + j), sign (-1)^(a-i)
            let cos_pow = i + b - j;
            let sin_pow = a - i + j;
            let mut c = binom(a, i) * binom(b, j) * wallis(cos_pow, sin_pow);
            if (a - i) % 2 == 1 {
                c = -c;
            }
            if c.is_zero() {
                continue;
            }
            let mut exps = vec![0u32; n];
            exps[0] = i + j;
            exps[1] = a + b - i - j;
            out.add_term(Mono::new(&exps), c);
        }
    }
    out
}

#[test]
fn acceptance_6_averaging() {
    let start = std::time::Instant::now();
    let (n, cap) = (2usize, 6u32);
    // oracle comparison on every monomial of degree <= 4 in (x1, x2)
    for a in 0..=4u32 {
        for b in 0..=(4 - a) {
            let mut mono = TruncPoly::zero(n, cap);
            let mut exps = vec![0u32; n];
            exps[0] = a;
            exps[1] = b;
            mono.add_term(Mono::new(&exps), Rat::one());
            let averaged = so_average_poly(&mono, 2).unwrap();
            let oracle = angle_integral_average(a, b, n, cap);
            assert_eq!(averaged, oracle, "monomial x1^{a} x2^{b}");
            // idempotence
            assert_eq!(so_average_poly(&averaged, 2).unwrap(), averaged);
        }
    }
    // commutes with the rotation generator on random polynomials
    let mut rng = rng_from_seed(606);
    let mut rot = Multivector::zero(n, 1, cap);
    rot.insert_component(vec![0], TruncPoly::var(n, cap, 1));
    rot.insert_component(
        vec![1],
        TruncPoly::var(n, cap, 0).neg(),
    );
    for _ in 0..20 {
        let p = random_poly(n, cap, 4, &mut rng);
        let avg = so_average_poly(&p, 2).unwrap();
        assert!(lie_derivative_poly(&rot, &avg).unwrap().is_zero());
        let lhs = so_average_poly(&lie_derivative_poly(&rot, &p).unwrap(), 2).unwrap();
        assert!(lhs.is_zero(), "projector must kill the generator image");
    }
    assert!(start.elapsed().as_secs() <= 10, "{:?}", start.elapsed());
    println!(
        "ACCEPTANCE 6 PASS: Casimir projection matches the angle integral on all monomials of degree <= 4 in {:?}",
        start.elapsed()
    );
}

fn hyperbolic_normal(q: usize, n: usize, k: usize, cap: u32) -> Multivector {
    let mut quad = TruncPoly::zero(n, cap);
    for i in 0..=q {
        let mut e = vec![0u32; n];
        e[i] = 2;
        let sign: i64 = if i < k { 1 } else { -1 };
        quad.add_term(Mono::new(&e), Rat::new(sign.into(), 2.into()));
    }
    let dq = d_of_poly(&quad).unwrap();
    let prefix: Vec<usize> = (q + 1..n).collect();
    DiffForm::basis(n, cap, &prefix)
        .wedge(&dq)
        .unwrap()
        .dual_mv()
}

#[test]
fn acceptance_7_slicing_structure() {
    let start = std::time::Instant::now();
    let cap = 4;
    let mut lambda_cases = 0usize;
    let mut theta_cases = 0usize;
    for q in 2..=4usize {
        for n in q + 1..=6 {
            // lambda: k plus signs, k in 3..=q+1
            for k in 3..=q + 1 {
                let pi = hyperbolic_normal(q, n, k, cap);
                let lambda = slice_lambda(&pi, k, q).unwrap();
                assert_eq!(lambda.degree(), k - 1);
                let (form, _) = classify_linear(&lambda.homogeneous_part(1)).unwrap();
                match form {
                    LinearNormalForm::Type1 {
                        q: lq,
                        elliptic,
                        nondegenerate,
                        ..
                    } => {
                        assert_eq!(lq, k - 1, "q={q} n={n} k={k}");
                        assert!(
                            nondegenerate && elliptic,
                            "q={q} n={n} k={k}: slice must be elliptic"
                        );
                    }
                    other => panic!("q={q} n={n} k={k}: {other:?}"),
                }
                lambda_cases += 1;
            }
            // theta: k in 2..=q with q+1-k > 1
            for k in 2..=q {
                if q + 1 - k <= 1 {
                    continue;
                }
                let pi = hyperbolic_normal(q, n, k, cap);
                let theta = slice_theta(&pi, k).unwrap();
                assert_eq!(theta.degree(), q + 1 - k);
                assert_eq!(theta.nvars(), n - k + 1);
                let (form, _) = classify_linear(&theta.homogeneous_part(1)).unwrap();
                match form {
                    LinearNormalForm::Type1 { signature, .. } => {
                        assert_eq!(
                            unordered(signature),
                            (1, q + 1 - k),
                            "q={q} n={n} k={k}"
                        );
                    }
                    other => panic!("q={q} n={n} k={k}: {other:?}"),
                }
                theta_cases += 1;
            }
        }
    }
    assert!(lambda_cases > 0 && theta_cases > 0);
    assert!(start.elapsed().as_secs() <= 30, "{:?}", start.elapsed());
    println!(
        "ACCEPTANCE 7 PASS: {lambda_cases} lambda slices elliptic of the stated order, {theta_cases} theta slices with signature (1, q+1-k), in {:?}",
        start.elapsed()
    );
}

#[test]
fn acceptance_summary_note() {
    // criterion 8 (CLI determinism) lives in the driver crate's test
    // suite next to the binary it exercises
    println!("ACCEPTANCE 8: see the nambu-cli acceptance tests");
}
