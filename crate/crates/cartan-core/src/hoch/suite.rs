//! Seeded identity suite over random homogeneous cochains and chains.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::brace;
use super::{cochain_degree, chain_degree, Cochain, HChain, Hoch, Window};
use crate::coeff::Ring;
use crate::graded::{sign_of, Lin};
use crate::report::{Check, Report};

/// Check names, in report order.
pub const IDENTITIES: [&str; 15] = [
    "jacobi",
    "lie-module",
    "rho-bracket",
    "connes-b-squared",
    "connes-b-lie",
    "connes-b-b1",
    "b-rho",
    "rho-delta",
    "b1-delta",
    "homotopy-cartan",
    "b-squared",
    "delta-squared",
    "brace-rho-lemma",
    "brace-b1-lemma",
    "brace-dictionary",
];

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub window: Window,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { trials: 50, seed: 42, window: Window { word_bound: 4, arity_bound: 3 } }
    }
}

struct Outcome {
    name: &'static str,
    witness: String,
    residual: Option<String>,
}

fn sgn(p: i32) -> i32 {
    sign_of(p as i64)
}

fn trial_rng(seed: u64, t: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn run_trial(h: &Hoch, cfg: &SuiteConfig, t: usize, ring: &Ring) -> Vec<Outcome> {
    let cat = &h.cat;
    let ys = cat.elem_basis(cfg.window.arity_bound, h.reduced);
    let ms = cat.chain_basis(cfg.window.word_bound, h.reduced);
    let mut rng = trial_rng(cfg.seed, t);
    let phi = h.random_cochain(&mut rng, &ys);
    let psi = h.random_cochain(&mut rng, &ys);
    let chi = h.random_cochain(&mut rng, &ys);
    let x = h.random_chain(&mut rng, &ms);
    let a = cochain_degree(h, &phi).unwrap();
    let b = cochain_degree(h, &psi).unwrap();
    let c = cochain_degree(h, &chi).unwrap();
    let _ = chain_degree(h, &x);
    let witness = format!(
        "trial {t}: φ={} ψ={} χ={} X={}",
        h.show_cochain(&phi),
        h.show_cochain(&psi),
        h.show_cochain(&chi),
        h.show_hchain(&x)
    );

    let br = |p: &Cochain, q: &Cochain| h.bracket(p, q, ring);
    let lie = |p: &Cochain, v: &HChain| h.lie(p, v, ring);
    let rho = |p: &Cochain, q: &Cochain, v: &HChain| h.rho(p, q, v, ring);
    let bb = |v: &HChain| h.connes_b(v, ring);
    let b1 = |p: &Cochain, v: &HChain| h.connes_b1(p, v, ring);
    let hb = |v: &HChain| h.b(v, ring);
    let hb1 = |p: &Cochain, v: &HChain| h.b1(p, v, ring);
    let del = |p: &Cochain| h.delta(p, ring);

    let mut out = vec![];
    let mut push_c = |name: &'static str, r: Cochain| {
        let residual = (!r.is_zero()).then(|| h.show_cochain(&r));
        out.push(Outcome { name, witness: witness.clone(), residual });
    };

    // graded Jacobi
    let mut r = br(&phi, &br(&psi, &chi));
    r.add_with_sign(&br(&br(&phi, &psi), &chi), -1);
    r.add_with_sign(&br(&psi, &br(&phi, &chi)), -sgn(a * b));
    push_c("jacobi", r);
    let _ = c;
    push_c("delta-squared", del(&del(&phi)));

    let mut chains: Vec<(&'static str, HChain)> = vec![];
    // 𝓛_{[φ,ψ]} = [𝓛_φ, 𝓛_ψ]
    let mut r = lie(&br(&phi, &psi), &x);
    r.add_with_sign(&lie(&phi, &lie(&psi, &x)), -1);
    r.add_with_sign(&lie(&psi, &lie(&phi, &x)), sgn(a * b));
    chains.push(("lie-module", r));

    // ρ_{[φ,ψ],χ} − ρ_{φ,[ψ,χ]} + (−1)^{ab}ρ_{ψ,[φ,χ]} = [𝓛_φ, ρ_{ψ,χ}] − (−1)^{ab}[𝓛_ψ, ρ_{φ,χ}]
    let comm_lr = |p: &Cochain, dp: i32, q: &Cochain, s: &Cochain, dqs: i32| {
        let mut v = lie(p, &rho(q, s, &x));
        v.add_with_sign(&rho(q, s, &lie(p, &x)), -sgn(dp * dqs));
        v
    };
    let mut r = rho(&br(&phi, &psi), &chi, &x);
    r.add_with_sign(&rho(&phi, &br(&psi, &chi), &x), -1);
    r.add_with_sign(&rho(&psi, &br(&phi, &chi), &x), sgn(a * b));
    r.add_with_sign(&comm_lr(&phi, a, &psi, &chi, b + c), -1);
    r.add_with_sign(&comm_lr(&psi, b, &phi, &chi, a + c), sgn(a * b));
    chains.push(("rho-bracket", r));

    // [B, B] = 2B²
    chains.push(("connes-b-squared", bb(&bb(&x))));
    // [B, 𝓛_φ]
    let mut r = bb(&lie(&phi, &x));
    r.add_with_sign(&lie(&phi, &bb(&x)), -sgn(a));
    chains.push(("connes-b-lie", r));
    // [B, B¹_φ]
    let mut r = bb(&b1(&phi, &x));
    r.add_with_sign(&b1(&phi, &bb(&x)), -sgn(a + 1));
    chains.push(("connes-b-b1", r));

    // [B, ρ_{φ,ψ}] + B¹_{[φ,ψ]} − (−1)^a [𝓛_φ, B¹_ψ]
    let comm_lb1 = |v: &HChain| {
        let mut w = lie(&phi, &b1(&psi, v));
        w.add_with_sign(&b1(&psi, &lie(&phi, v)), -sgn(a * (b + 1)));
        w
    };
    let mut r = bb(&rho(&phi, &psi, &x));
    r.add_with_sign(&rho(&phi, &psi, &bb(&x)), -sgn(a + b));
    r.add_assign(&b1(&br(&phi, &psi), &x));
    r.add_with_sign(&comm_lb1(&x), -sgn(a));
    chains.push(("b-rho", r));

    // ρ_{δφ,ψ} − b¹_{[φ,ψ]} + (−1)^a ρ_{φ,δψ} = [b, ρ_{φ,ψ}] − (−1)^a [𝓛_φ, b¹_ψ]
    let mut r = rho(&del(&phi), &psi, &x);
    r.add_with_sign(&hb1(&br(&phi, &psi), &x), -1);
    r.add_with_sign(&rho(&phi, &del(&psi), &x), sgn(a));
    r.add_with_sign(&hb(&rho(&phi, &psi, &x)), -1);
    r.add_with_sign(&rho(&phi, &psi, &hb(&x)), sgn(a + b));
    let mut lb = lie(&phi, &hb1(&psi, &x));
    lb.add_with_sign(&hb1(&psi, &lie(&phi, &x)), -sgn(a * (b + 1)));
    r.add_with_sign(&lb, sgn(a));
    chains.push(("rho-delta", r));

    // b¹_{δψ} + [b, b¹_ψ]
    let mut r = hb1(&del(&psi), &x);
    r.add_assign(&hb(&hb1(&psi, &x)));
    r.add_with_sign(&hb1(&psi, &hb(&x)), -sgn(b + 1));
    chains.push(("b1-delta", r));

    // [B, b¹_φ] + [b, B¹_φ] + B¹_{δφ} + 𝓛_φ
    let mut r = bb(&hb1(&phi, &x));
    r.add_with_sign(&hb1(&phi, &bb(&x)), -sgn(a + 1));
    r.add_assign(&hb(&b1(&phi, &x)));
    r.add_with_sign(&b1(&phi, &hb(&x)), -sgn(a + 1));
    r.add_assign(&b1(&del(&phi), &x));
    r.add_assign(&lie(&phi, &x));
    chains.push(("homotopy-cartan", r));

    chains.push(("b-squared", hb(&hb(&x))));

    // brace expansions
    let mut bind = BTreeMap::new();
    bind.insert("φ".to_string(), phi.clone());
    bind.insert("ψ".to_string(), psi.clone());
    bind.insert("χ".to_string(), chi.clone());
    let ev = |text: &str| brace::chain(h, text, &bind, &x, ring).expect("suite brace text");
    {
        // φ₁ = φ, φ₂ = ψ, ψ = χ
        let mut lhs = rho(&h.circ(&phi, &psi, ring), &chi, &x);
        lhs.add_with_sign(&rho(&phi, &br(&psi, &chi), &x), -1);
        let mut lr = lie(&psi, &rho(&phi, &chi, &x));
        lr.add_with_sign(&rho(&phi, &chi, &lie(&psi, &x)), -sgn(b * (a + c)));
        lhs.add_with_sign(&lr, sgn(a * b));
        let mut rhs = ev("{φ{ψ{χ, in}}}");
        rhs.add_with_sign(&ev("{ψ{φ{χ, in}}}"), sgn(a * b));
        chains.push(("brace-rho-lemma", lhs.minus(&rhs)));
    }
    {
        let lhs = comm_lb1(&x).signed(sgn(a));
        let mut rhs = ev("{𝟙, φ{ψ, in}}");
        rhs.add_assign(&ev("{𝟙, φ{ψ}, in}"));
        rhs.add_with_sign(&ev("{𝟙, ψ{φ}, in}"), -sgn(a * b));
        let mut r = lhs.minus(&rhs);
        // [B, ρ_{φ,ψ}] = Bρ_{φ,ψ} = {𝟙, φ{ψ, in}}
        r.add_assign(&bb(&rho(&phi, &psi, &x)).minus(&ev("{𝟙, φ{ψ, in}}")));
        chains.push(("brace-b1-lemma", r));
    }
    {
        let mut r: HChain = Lin::zero();
        r.add_assign(&ev("{𝟙, in}").minus(&bb(&x)));
        r.add_assign(&ev("{in, φ}").plus(&ev("{φ{in}}")).minus(&lie(&phi, &x)));
        r.add_assign(&ev("{φ{ψ, in}}").minus(&rho(&phi, &psi, &x)));
        r.add_assign(&ev("{𝟙, φ, in}").minus(&b1(&phi, &x)));
        let circ = brace::eval_cochain(h, &brace::parse("φ{ψ}").unwrap(), &bind, cfg.window.arity_bound * 2, ring).unwrap();
        let circ_r = circ.minus(&h.circ(&phi, &psi, ring));
        let mut res = (!r.is_zero()).then(|| h.show_hchain(&r));
        if !circ_r.is_zero() {
            res = Some(format!("{} | circ: {}", res.unwrap_or_default(), h.show_cochain(&circ_r)));
        }
        out.push(Outcome { name: "brace-dictionary", witness: witness.clone(), residual: res });
    }

    for (name, r) in chains {
        let residual = (!r.is_zero()).then(|| h.show_hchain(&r));
        out.push(Outcome { name, witness: witness.clone(), residual });
    }
    out
}

#[cfg(feature = "parallel")]
fn all_trials(h: &Hoch, cfg: &SuiteConfig, ring: &Ring) -> Vec<Vec<Outcome>> {
    use rayon::prelude::*;
    (0..cfg.trials).into_par_iter().map(|t| run_trial(h, cfg, t, ring)).collect()
}

#[cfg(not(feature = "parallel"))]
fn all_trials(h: &Hoch, cfg: &SuiteConfig, ring: &Ring) -> Vec<Vec<Outcome>> {
    (0..cfg.trials).map(|t| run_trial(h, cfg, t, ring)).collect()
}

/// Every identity on `trials` seeded tuples; checks appear in [`IDENTITIES`] order.
pub fn identity_suite(h: &Hoch, cfg: &SuiteConfig, ring: &Ring) -> Report {
    let stamp = format!(
        "word_bound={} arity_bound={} z_order={} seed={}",
        cfg.window.word_bound, cfg.window.arity_bound, ring.policy.z_order, cfg.seed
    );
    let mut checks: Vec<Check> = IDENTITIES.iter().map(|n| Check::new(*n).with_stamp(stamp.clone())).collect();
    if h.cat.elem_basis(cfg.window.arity_bound, h.reduced).is_empty() || h.cat.chain_basis(cfg.window.word_bound, h.reduced).is_empty() {
        let mut rep = Report::new();
        for c in checks {
            rep.push(c);
        }
        return rep;
    }
    for trial in all_trials(h, cfg, ring) {
        for o in trial {
            let c = checks.iter_mut().find(|c| c.name == o.name).unwrap();
            c.checked += 1;
            if let Some(r) = o.residual {
                c.fail(o.witness, r);
            }
        }
    }
    let mut rep = Report::new();
    for c in checks {
        rep.push(c);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoch::{a2, kx2, trivial, Mutation};

    fn ring() -> Ring {
        Ring::plain().with_z_order(3)
    }

    #[test]
    fn suite_passes_on_fixtures() {
        let r = ring();
        for c in [kx2(&r), a2(&r), trivial(&r)] {
            let h = Hoch::new(c.clone());
            let cfg = SuiteConfig { trials: 20, ..Default::default() };
            let rep = identity_suite(&h, &cfg, &r);
            for ch in &rep.checks {
                assert!(ch.passed(), "{} {}: {:?}", c.name, ch.name, ch.first_failure());
            }
        }
    }

    #[test]
    fn wrap_sign_mutation_is_detected() {
        let r = ring();
        let h = Hoch::new(kx2(&r)).with_mutation(Mutation::LieWrapSign);
        let rep = identity_suite(&h, &SuiteConfig { trials: 20, ..Default::default() }, &r);
        let failing = rep.failing();
        assert!(failing.contains(&"lie-module"), "{failing:?}");
        assert!(failing.contains(&"connes-b-lie"), "{failing:?}");
        assert!(!failing.contains(&"jacobi"));
    }

    #[test]
    fn sampled_operators_are_not_all_zero() {
        let r = ring();
        let h = Hoch::new(kx2(&r));
        let cfg = SuiteConfig::default();
        let ys = h.cat.elem_basis(3, true);
        let ms = h.cat.chain_basis(4, true);
        let (mut lie, mut rho, mut b1) = (0, 0, 0);
        for t in 0..20 {
            let mut rng = trial_rng(cfg.seed, t);
            let phi = h.random_cochain(&mut rng, &ys);
            let psi = h.random_cochain(&mut rng, &ys);
            let _chi = h.random_cochain(&mut rng, &ys);
            let x = h.random_chain(&mut rng, &ms);
            lie += !h.lie(&phi, &x, &r).is_zero() as usize;
            rho += !h.rho(&phi, &psi, &x, &r).is_zero() as usize;
            b1 += !h.connes_b1(&phi, &x, &r).is_zero() as usize;
        }
        assert!(lie > 3 && rho > 1 && b1 > 3, "{lie} {rho} {b1}");
    }

    #[test]
    fn suite_is_deterministic() {
        let r = ring();
        let h = Hoch::new(kx2(&r));
        let cfg = SuiteConfig { trials: 5, ..Default::default() };
        let a = serde_json::to_string(&identity_suite(&h, &cfg, &r)).unwrap();
        let b = serde_json::to_string(&identity_suite(&h, &cfg, &r)).unwrap();
        assert_eq!(a, b);
    }
}
