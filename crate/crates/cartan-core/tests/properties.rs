use cartan_core::coeff::{q, qr, Mono, Policy, Ring, Scalar, TVar};
use cartan_core::graded::{compose, enumerate_shuffles, is_shuffle, koszul_sign, permute, Lin};
use proptest::prelude::*;

fn ring() -> Ring {
    Ring::new(Policy { z_order: 3, energy_cut: q(3), t_order: 3, e_window: (0, 6) }, vec![TVar { name: "t".into(), degree: 0 }]).unwrap()
}

fn perm(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle()
}

fn perm_pair_with_degrees() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<i32>)> {
    (0usize..=6).prop_flat_map(|k| (perm(k), perm(k), proptest::collection::vec(-3i32..=3, k)))
}

fn mono() -> impl Strategy<Value = Mono> {
    (0u32..3, 0u16..3, 0i128..6, 0i32..3).prop_map(|(z, t, en, e)| {
        let mut m = Mono::one();
        m.z = z;
        m.t[0] = t;
        m.energy = qr(en, 2);
        m.e = e;
        m
    })
}

fn scalar() -> impl Strategy<Value = Scalar> {
    proptest::collection::vec((mono(), -3i128..=3), 0..5).prop_map(|ts| Scalar::from_terms(ts.into_iter().map(|(m, c)| (m, q(c))), &ring().policy))
}

/// 1 + n with n of positive z-, t- or energy order and no e in the constant part.
fn unit_scalar() -> impl Strategy<Value = Scalar> {
    scalar().prop_map(|s| {
        let n = Scalar::from_terms(s.terms().iter().filter(|(m, _)| m.z > 0 || m.t[0] > 0 || (m.energy > q(0) && m.e == 0)).cloned(), &ring().policy);
        Scalar::one().add(&n)
    })
}

proptest! {
    #[test]
    fn koszul_sign_is_a_cocycle((a, b, d) in perm_pair_with_degrees()) {
        let lhs = koszul_sign(&compose(&a, &b), &d).unwrap();
        let rhs = koszul_sign(&a, &d).unwrap() * koszul_sign(&b, &permute(&a, &d)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn adjacent_swap_sign(d in proptest::collection::vec(-3i32..=3, 2..6), i in 0usize..5) {
        let i = i % (d.len() - 1);
        let mut p: Vec<usize> = (0..d.len()).collect();
        p.swap(i, i + 1);
        let want = if (d[i] * d[i + 1]).rem_euclid(2) == 1 { -1 } else { 1 };
        prop_assert_eq!(koszul_sign(&p, &d).unwrap(), want);
    }

    #[test]
    fn shuffles_are_counted_by_multinomials(blocks in proptest::collection::vec(0usize..3, 1..4)) {
        let all = enumerate_shuffles(&blocks);
        let k: usize = blocks.iter().sum();
        let fact = |n: usize| (1..=n as u64).product::<u64>();
        let want = fact(k) / blocks.iter().map(|&b| fact(b)).product::<u64>();
        prop_assert_eq!(all.len() as u64, want);
        for s in &all {
            prop_assert!(is_shuffle(s, &blocks));
        }
    }

    #[test]
    fn scalar_ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        let p = &ring().policy;
        prop_assert_eq!(a.mul(&b, p), b.mul(&a, p));
        prop_assert_eq!(a.mul(&b, p).mul(&c, p), a.mul(&b.mul(&c, p), p));
        prop_assert_eq!(a.mul(&b.add(&c), p), a.mul(&b, p).add(&a.mul(&c, p)));
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&Scalar::one(), p), a.clone());
    }

    #[test]
    fn literals_round_trip(a in scalar()) {
        let r = ring();
        let text = a.to_literal(&r);
        prop_assert_eq!(Scalar::parse(&text, &r).unwrap(), a, "{}", text);
    }

    #[test]
    fn units_invert(u in unit_scalar()) {
        let r = ring();
        let v = u.inverse(&r).unwrap();
        prop_assert_eq!(u.mul(&v, &r.policy), Scalar::one());
    }

    #[test]
    fn lin_is_a_module(xs in proptest::collection::vec((0usize..4, scalar()), 0..6), c in scalar()) {
        let r = ring();
        let mut v: Lin<usize> = Lin::zero();
        for (b, s) in xs {
            v.add_term(b, s);
        }
        prop_assert!(v.minus(&v).is_zero());
        let w = v.scale(&c, &r).plus(&v.scale(&c.neg(), &r));
        prop_assert!(w.truncate(&r).is_zero());
        prop_assert_eq!(v.relabel(|b| *b), v.clone());
    }
}
