use cartan_core::coeff::{q, Mono, Policy, Ring, Scalar};
use cartan_core::conn::Deriv;
use cartan_core::graded::Lin;
use cartan_core::models::{dubrovin, dubrovin_ring, dubrovin_unvalidated, hypercom_gate, hypercom_to_ch, qh_p1, Dubrovin, HypercomData};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn ring(h: &HypercomData, t: u32, z: u32) -> Ring {
    dubrovin_ring(h, Policy { z_order: z, energy_cut: q(8), t_order: t, e_window: (-16, 16) }).unwrap()
}

/// QH(ℙ¹) with an extra ternary term, so the GGM connection is not flat.
fn perturbed(t: u32, z: u32) -> Dubrovin {
    let mut h = qh_p1(q(1), 5);
    h.set(&[0, 1, 1], Lin::term(1, Scalar::from_int(3)));
    let r = ring(&h, t, z);
    dubrovin_unvalidated(&h, &r)
}

/// Random e-constant derivation with coefficients of t-degree ≤ 1.
fn random_deriv(rng: &mut StdRng, n: usize) -> Deriv {
    let mut d = Deriv::zero(n);
    for c in d.t.iter_mut() {
        let mut m = Mono::one();
        m.t[rng.gen_range(0..n)] = rng.gen_range(0..2);
        *c = Scalar::term(q(rng.gen_range(-2..=2)), m);
    }
    d
}

#[test]
fn curvature_formula_matches_definition() {
    let d = perturbed(2, 3);
    let c = d.connection(false);
    let mut rng = StdRng::seed_from_u64(8);
    let mut nonzero = 0;
    for _ in 0..20 {
        let (x, y) = (random_deriv(&mut rng, 2), random_deriv(&mut rng, 2));
        for m in 0..2 {
            let v = Lin::basis(m);
            let a = c.curvature_direct(&x, &y, &v).truncate(&d.base);
            let b = c.curvature_formula(&x, &y, &v).truncate(&d.base);
            assert_eq!(a, b, "{} {} | {m}", x.show(&d.work), y.show(&d.work));
            nonzero += !a.is_zero() as usize;
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn mutated_product_is_not_flat() {
    let mut h = qh_p1(q(1), 5);
    h.set(&[1, 1], Lin::zero());
    let r = ring(&h, 3, 4);
    let d = dubrovin_unvalidated(&h, &r);
    assert!(!d.flatness().get("flatness").unwrap().passed());
}

#[test]
fn eps3_identity_on_basis_pairs() {
    let h = qh_p1(q(1), 5);
    let r = ring(&h, 2, 3);
    let d = dubrovin(&h, &r).unwrap();
    let c = d.connection(false);
    for y1 in 0..2 {
        for y2 in 0..2 {
            for m in 0..2 {
                let res = c.eps3_identity(&y1, &y2, &Lin::basis(m)).truncate(&d.base);
                assert!(res.is_zero(), "{y1} {y2} | {m}: {res:?}");
            }
        }
    }
}

#[test]
fn broken_wdvv_breaks_only_eps3() {
    let h = qh_p1(q(1), 5);
    let r = ring(&h, 2, 3);
    hypercom_to_ch(&h, true, 4, &r).expect("n = 3");
    let mut bad = h.clone();
    bad.set(&[0, 1, 1], Lin::term(1, Scalar::from_int(3)));
    assert!(!bad.wdvv_check(&r).passed());
    let ch = cartan_core::models::hypercom_module_unchecked(&bad);
    assert!(hypercom_gate(&ch, 2, 4, &r).passed());
    assert!(!hypercom_gate(&ch, 3, 4, &r).passed());
}
