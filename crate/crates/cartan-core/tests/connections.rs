use cartan_core::chmod::{mc_check, PackageDgla};
use cartan_core::coeff::{q, Policy, Ring};
use cartan_core::colang::DglaLinf;
use cartan_core::hoch::{gapped_ring, kx2, kx2_gapped_gamma, Hoch, HochPackage};
use cartan_core::models::{hochschild_connection_report, hochschild_renaming_cohomology, hochschild_renaming_report, RenamingSpec};

fn base() -> Ring {
    gapped_ring(Policy { z_order: 3, energy_cut: q(2), t_order: 2, e_window: (0, 4) })
}

fn small() -> Ring {
    gapped_ring(Policy { z_order: 2, energy_cut: q(1), t_order: 2, e_window: (0, 1) })
}

#[test]
fn gapped_gamma_is_mc() {
    let r = base();
    let h = Hoch::new(kx2(&r));
    let alg = DglaLinf(PackageDgla(HochPackage(&h)));
    mc_check(&alg, &kx2_gapped_gamma(&r), &r).expect("gapped MC");
}

#[test]
fn hochschild_chain_theorems() {
    let r = base();
    let (rep, live) = hochschild_connection_report(&kx2(&r), &kx2_gapped_gamma(&r), 3, &r).unwrap();
    for chk in &rep.checks {
        assert!(chk.passed(), "{}: {:?}", chk.name, chk.first_failure());
    }
    assert!(live, "d^gamma vanishes");
}

fn intertwines(spec: RenamingSpec) {
    let r = base();
    let (rep, raw) = hochschild_renaming_report(&kx2(&r), &kx2_gapped_gamma(&r), spec, 3, &r).unwrap();
    for chk in &rep.checks {
        assert!(chk.passed(), "{}: {:?}", chk.name, chk.first_failure());
    }
    assert_eq!(raw, spec.f1_multiplier != 0);
    let s = small();
    let chk = hochschild_renaming_cohomology(&kx2(&s), &kx2_gapped_gamma(&s), spec, 1, 6, &s).unwrap();
    assert!(chk.passed(), "{:?}", chk.first_failure());
    assert!(chk.checked > 2);
}

#[test]
fn renaming_intertwines() {
    intertwines(RenamingSpec { f1_multiplier: 3, scale_by_length: true });
}

#[test]
fn identity_intertwines() {
    intertwines(RenamingSpec::identity());
}

#[test]
fn non_mc_gamma_is_refused() {
    let r = base();
    // no energy, so not contractive
    let g = cartan_core::graded::Lin::term(
        cartan_core::hoch::Elem { inputs: vec![], output: 1 },
        cartan_core::coeff::Scalar::parse("e", &r).unwrap(),
    );
    assert!(hochschild_connection_report(&kx2(&r), &g, 2, &r).is_err());
}
