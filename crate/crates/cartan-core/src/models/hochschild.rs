//! Connections on the Hochschild CH module of a finite category: the chain
//! statements under a Maurer–Cartan γ, and a renaming morphism with f₁ ≠ 0.

use crate::chmod::{mc_check, package_cone, plain, ChPackage, PackageDgla, PackageModule, TwistedModMorphism};
use crate::coeff::{q, Mono, Q, Ring, Scalar};
use crate::colang::DglaLinf;
use crate::conn::compat::{expanded_complex, intertwines_on_cohomology, Compat, Conjugated, Forward, Ren, Renaming, TwistedPieces};
use crate::conn::{stamp_of, working_ring, ChConnection, Deriv};
use crate::graded::Lin;
use crate::hoch::{Category, Chain, Cochain, Elem, Hoch, HochPackage};
use crate::report::{Check, Report};

use super::ModelError;

/// ∂/∂tᵢ for every declared variable, then e d/de.
pub fn hochschild_directions(ring: &Ring) -> Vec<(String, Deriv)> {
    let n = ring.tvars.len();
    let mut v: Vec<(String, Deriv)> = ring.tvars.iter().enumerate().map(|(i, t)| (format!("d/d{}", t.name), Deriv::dt(i, n))).collect();
    v.push(("e d/de".into(), Deriv::ede(n)));
    v
}

fn samples(ring: &Ring) -> Vec<Scalar> {
    let mut out = vec![Scalar::one()];
    let mut m = Mono::one();
    m.z = 1;
    m.energy = crate::coeff::qr(1, 2);
    if !ring.tvars.is_empty() {
        let mut t = Mono::one();
        t.t[0] = 1;
        out.push(Scalar::term(q(1), t).add(&Scalar::term(q(1), m)));
    } else {
        out.push(Scalar::term(q(1), m));
    }
    out
}

fn require_mc(h: &Hoch, gamma: &Cochain, ring: &Ring) -> Result<(), ModelError> {
    let alg = DglaLinf(PackageDgla(HochPackage(h)));
    mc_check(&alg, gamma, ring).map(|_| ()).map_err(|e| ModelError::Axiom("maurer-cartan".into(), e.to_string()))
}

/// Leibniz rules, the two lemmas and both commutation statements on reduced
/// chains of length ≤ `word_bound`. Also returns whether d^γ is nonzero there.
pub fn hochschild_connection_report(cat: &Category, gamma: &Cochain, word_bound: usize, base: &Ring) -> Result<(Report, bool), ModelError> {
    let w = working_ring(base, 1, 0);
    let h = Hoch::new(cat.clone());
    require_mc(&h, gamma, &w)?;
    let alg = DglaLinf(PackageDgla(HochPackage(&h)));
    let module = PackageModule(HochPackage(&h));
    let c = ChConnection::new(&alg, &module, gamma, None, &w);
    let labels = h.cat.chain_basis(word_bound, true);
    let rep = c.chain_report(&hochschild_directions(&w), &labels, &samples(&w), base);
    let live = labels.iter().any(|m| !c.d(&Lin::basis(m.clone())).truncate(base).is_zero());
    Ok((rep, live))
}

/// f₀ = s(m)·m (s = len + 1, or 1) and f₁(y, m) = k·len(m)·I_y(m).
#[derive(Clone, Copy, Debug)]
pub struct RenamingSpec {
    pub f1_multiplier: i128,
    pub scale_by_length: bool,
}

impl RenamingSpec {
    pub fn identity() -> RenamingSpec {
        RenamingSpec { f1_multiplier: 0, scale_by_length: false }
    }
}

fn by_length(c: &Chain) -> i128 {
    c.0.len() as i128 + 1
}

fn unit(_: &Chain) -> i128 {
    1
}

/// Chain-level intertwining of GGM and Euler connections and preservation of
/// the trivial ones. Also returns whether the bare commutator [z∇_{e d/de}, f₀] is nonzero.
pub fn hochschild_renaming_report(
    cat: &Category,
    gamma: &Cochain,
    spec: RenamingSpec,
    word_bound: usize,
    base: &Ring,
) -> Result<(Report, bool), ModelError> {
    let w = working_ring(base, 1, 0);
    let h = Hoch::new(cat.clone());
    require_mc(&h, gamma, &w)?;
    let pkg = HochPackage(&h);
    let alg = DglaLinf(PackageDgla(pkg));
    let cone = package_cone(&pkg);
    let module = PackageModule(pkg);
    let k = spec.f1_multiplier;
    let f1 = |y: &Elem, m: &Chain, ring: &Ring| h.iota(&Lin::basis(y.clone()), &Lin::basis(m.clone()), ring).scale(&Scalar::from_int(k * m.0.len() as i128), ring);
    let map = Renaming { scale: if spec.scale_by_length { by_length } else { unit }, f1: &f1 };
    let target = Conjugated { cone: &cone, module: &module, map: map.clone() };
    let cm = ChConnection::new(&alg, &module, gamma, None, &w);
    let cn = ChConnection::new(&alg, &target, gamma, None, &w);
    let fg = TwistedModMorphism::new(Forward(map), &gamma.relabel(|y| plain(y.clone())), 2, &w);
    let yd = |y: &Elem| h.ydeg(y);
    let cp = Compat { src: &cm, tgt: &cn, f: TwistedPieces { f: &fg, ydeg: &yd } };
    let labels = h.cat.chain_basis(word_bound, true);
    let mut rep = Report::new();
    for chk in cp.checks(&hochschild_directions(&w), &labels, base) {
        rep.push(chk);
    }
    let n = w.tvars.len();
    let raw = labels.iter().any(|m| !cp.raw_commutator(&Deriv::ede(n), &Lin::basis(m.clone())).truncate(base).is_zero());
    Ok((rep, raw))
}

/// The smallest positive energy in γ, the step of the ν-grading.
fn energy_step(gamma: &Cochain) -> Option<Q> {
    gamma.iter().flat_map(|(_, c)| c.terms().iter().map(|(m, _)| m.energy).collect::<Vec<_>>()).filter(|e| *e > q(0)).min()
}

/// Every monomial the ring keeps, for energies on the lattice `step`·ℕ.
fn monomials(ring: &Ring, step: Q) -> Vec<Mono> {
    let p = &ring.policy;
    let n = ring.tvars.len();
    let mut ts: Vec<[u16; crate::coeff::MAX_T]> = vec![[0; crate::coeff::MAX_T]];
    for i in 0..n {
        ts = ts.into_iter().flat_map(|t| (0..p.t_order as u16).map(move |a| {
            let mut u = t;
            u[i] = a;
            u
        })).collect();
    }
    let mut out = vec![];
    for z in 0..p.z_order {
        let mut en = q(0);
        while en < p.energy_cut {
            for t in &ts {
                for e in p.e_window.0..=p.e_window.1 {
                    let m = Mono { z, t: *t, energy: en, e };
                    if p.keeps(&m) {
                        out.push(m);
                    }
                }
            }
            en += step;
        }
    }
    out
}

/// The induced maps of z∇_{e d/de}∘f₀ and f₀∘z∇_{e d/de} agree on cohomology.
/// Cells are chains ⊗ monomials with ν = len − z-power − energy/step ≤ `nu_max`;
/// a dropped boundary term makes the check fail rather than pass silently.
pub fn hochschild_renaming_cohomology(
    cat: &Category,
    gamma: &Cochain,
    spec: RenamingSpec,
    nu_max: i32,
    max_len: usize,
    ring: &Ring,
) -> Result<Check, ModelError> {
    let h = Hoch::new(cat.clone());
    require_mc(&h, gamma, ring)?;
    let pkg = HochPackage(&h);
    let alg = DglaLinf(PackageDgla(pkg));
    let cone = package_cone(&pkg);
    let module = PackageModule(pkg);
    let k = spec.f1_multiplier;
    let f1 = |y: &Elem, m: &Chain, r: &Ring| h.iota(&Lin::basis(y.clone()), &Lin::basis(m.clone()), r).scale(&Scalar::from_int(k * m.0.len() as i128), r);
    let map = Renaming { scale: if spec.scale_by_length { by_length } else { unit }, f1: &f1 };
    let target = Conjugated { cone: &cone, module: &module, map: map.clone() };
    let cm = ChConnection::new(&alg, &module, gamma, None, ring);
    let cn = ChConnection::new(&alg, &target, gamma, None, ring);
    let step = energy_step(gamma).unwrap_or(q(1));
    let nu = |c: &Chain, m: &Mono| c.0.len() as i32 - m.z as i32 - (m.energy / step).to_integer() as i32;
    let monos = monomials(ring, step);
    let mut cells_m = vec![];
    for c in h.cat.chain_basis(max_len, true) {
        for m in &monos {
            if nu(&c, m) <= nu_max {
                cells_m.push((c.clone(), *m));
            }
        }
    }
    let cells_n: Vec<(Ren<Chain>, Mono)> = cells_m.iter().map(|(c, m)| (Ren(c.clone()), *m)).collect();
    let stamp = format!("{}, cells nu <= {nu_max}, chains of length <= {max_len}", stamp_of(ring));
    let dm = |c: &(Chain, Mono)| cm.ops.mdeg(&c.0) + ring.mono_degree(&c.1);
    let dn = |c: &(Ren<Chain>, Mono)| cn.ops.mdeg(&c.0) + ring.mono_degree(&c.1);
    let err = |e: crate::homol::HomolError| ModelError::Axiom("cohomology".into(), e.to_string());
    let cxm = expanded_complex(cells_m, dm, |v| cm.d(v), stamp.clone()).map_err(err)?;
    let cxn = expanded_complex(cells_n, dn, |v| cn.d(v), stamp).map_err(err)?;
    let fg = TwistedModMorphism::new(Forward(map), &gamma.relabel(|y| plain(y.clone())), 2, ring);
    let yd = |y: &Elem| h.ydeg(y);
    let pcs = TwistedPieces { f: &fg, ydeg: &yd };
    let x = Deriv::ede(ring.tvars.len());
    let mut chk = intertwines_on_cohomology(&cxm, &cxn, 2, |v| pcs.f0(&cm.ggm(&x, v), ring), |v| cn.ggm(&x, &pcs.f0(v, ring)));
    let dropped: usize = cxm.dropped.values().sum::<usize>() + cxn.dropped.values().sum::<usize>();
    chk.record_bool(|| "cell set closed under d".into(), dropped == 0, || format!("{dropped} boundary terms left the cells"));
    Ok(chk)
}
