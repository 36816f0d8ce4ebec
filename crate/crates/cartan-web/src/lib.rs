//! Browser bindings for the static demo in `www/`. Every function returns a
//! JSON string; failures come back as `{"error": ...}`.

use std::collections::BTreeMap;

use cartan_core::coeff::{q, Policy, Q, Ring, Scalar};
use cartan_core::conn::matrix::{flatness_report, named_directions};
use cartan_core::conn::stamp_of;
use cartan_core::graded::{enumerate_shuffles, koszul_sign, permute, Lin};
use cartan_core::hoch::brace::{self, BraceValue};
use cartan_core::hoch::{kx2, Chain, Cochain, Elem, HChain, Hoch};
use cartan_core::models::{dubrovin, dubrovin_ring, dubrovin_unvalidated, qh_p1};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn reply(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn ints<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| format!("`{t}` is not an integer")))
        .collect()
}

/// Dubrovin connection matrices of QH(ℙ¹) with the c₁ variant, and their
/// flatness. `drop_quantum` zeroes T₁∗T₁ to show a failing case.
#[wasm_bindgen]
pub fn p1_dubrovin(line_energy: &str, t_order: u32, z_order: u32, drop_quantum: bool) -> String {
    reply((|| {
        let a: Q = line_energy.trim().parse().map_err(|_| format!("`{line_energy}` is not a rational"))?;
        if !(1..=4).contains(&t_order) || !(1..=6).contains(&z_order) {
            return Err("t-order 1..4 and z-order 1..6".into());
        }
        let mut h = qh_p1(a, t_order as usize + 2);
        let policy = Policy { z_order, energy_cut: q(8), t_order, e_window: (-16, 16) };
        let ring = dubrovin_ring(&h, policy).map_err(|e| e.to_string())?;
        let d = if drop_quantum {
            h.set(&[1, 1], Lin::zero());
            dubrovin_unvalidated(&h, &ring)
        } else {
            dubrovin(&h, &ring).map_err(|e| e.to_string())?
        };
        let mc = d.matrix_connection(true);
        let ops: Vec<Value> = mc
            .operators(&named_directions(&mc.ring, true))
            .iter()
            .map(|o| {
                let mut p = ring.policy.clone();
                p.z_order += o.op.pole;
                let rows: Vec<Vec<String>> = o.op.m.iter().map(|r| r.iter().map(|c| c.truncate(&p).to_literal(&ring)).collect()).collect();
                json!({ "direction": o.direction, "pole": o.op.pole, "rows": rows })
            })
            .collect();
        let checks: Vec<Value> = flatness_report(&mc, &ring)
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "checked": c.checked, "failed": c.failed, "first_failure": c.first_failure().map(|f| f.witness.clone()) }))
            .collect();
        Ok(json!({ "basis": mc.names, "operators": ops, "checks": checks, "stamp": stamp_of(&ring) }))
    })())
}

/// Koszul sign of `perm` (images of 0..k, comma separated) on `degrees`.
#[wasm_bindgen]
pub fn koszul(perm: &str, degrees: &str) -> String {
    reply((|| {
        let p: Vec<usize> = ints(perm)?;
        let d: Vec<i32> = ints(degrees)?;
        let s = koszul_sign(&p, &d).map_err(|e| e.to_string())?;
        Ok(json!({ "sign": s, "permuted_degrees": permute(&p, &d) }))
    })())
}

/// All shuffles for the block sizes, each with its Koszul sign on `degrees`.
#[wasm_bindgen]
pub fn shuffles(blocks: &str, degrees: &str) -> String {
    reply((|| {
        let b: Vec<usize> = ints(blocks)?;
        let d: Vec<i32> = ints(degrees)?;
        if b.iter().sum::<usize>() != d.len() {
            return Err(format!("block sizes sum to {} but {} degrees given", b.iter().sum::<usize>(), d.len()));
        }
        if d.len() > 8 {
            return Err("at most 8 entries".into());
        }
        let list: Vec<Value> = enumerate_shuffles(&b)
            .into_iter()
            .map(|s| json!({ "shuffle": s, "sign": koszul_sign(&s, &d).unwrap_or(0) }))
            .collect();
        Ok(json!({ "count": list.len(), "shuffles": list }))
    })())
}

fn demo_ring() -> Ring {
    Ring::plain().with_z_order(3)
}

fn gen_id(h: &Hoch, name: &str) -> Result<usize, String> {
    h.cat.gens.iter().position(|g| g.name == name).ok_or_else(|| format!("unknown generator `{name}` (kx2 has 1, x)"))
}

fn coeff_of(text: Option<&str>, ring: &Ring) -> Result<Scalar, String> {
    match text {
        None => Ok(Scalar::one()),
        Some(t) => Scalar::parse(t.trim(), ring).map_err(|e| e.to_string()),
    }
}

/// "x x -> 1 * 2; -> x": terms separated by `;`, inputs before `->`, optional `* coeff`.
fn cochain(h: &Hoch, text: &str, ring: &Ring) -> Result<Cochain, String> {
    let mut out = Lin::zero();
    for term in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (body, c) = match term.split_once('*') {
            Some((b, c)) => (b, Some(c)),
            None => (term, None),
        };
        let (ins, o) = body.split_once("->").ok_or_else(|| format!("`{term}`: expected inputs -> output"))?;
        let inputs = ins.split_whitespace().map(|g| gen_id(h, g)).collect::<Result<Vec<_>, _>>()?;
        let output = gen_id(h, o.trim())?;
        out.add_term(Elem { inputs, output }, coeff_of(c, ring)?);
    }
    Ok(out.truncate(ring))
}

/// "1 x x * 3; x": words separated by `;`, optional `* coeff`.
fn hchain(h: &Hoch, text: &str, ring: &Ring) -> Result<HChain, String> {
    let mut out = Lin::zero();
    for term in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (body, c) = match term.split_once('*') {
            Some((b, c)) => (b, Some(c)),
            None => (term, None),
        };
        let w = body.split_whitespace().map(|g| gen_id(h, g)).collect::<Result<Vec<_>, _>>()?;
        if w.is_empty() {
            return Err(format!("`{term}`: empty word"));
        }
        out.add_term(Chain(w), coeff_of(c, ring)?);
    }
    Ok(out.truncate(ring))
}

/// Evaluates a brace expression on k[x]/(x²) with bindings φ, ψ and chain `in`.
#[wasm_bindgen]
pub fn brace_kx2(expr: &str, phi: &str, psi: &str, chain: &str) -> String {
    reply((|| {
        let ring = demo_ring();
        let h = Hoch::new(kx2(&ring));
        let mut bind = BTreeMap::new();
        bind.insert("φ".to_string(), cochain(&h, phi, &ring)?);
        bind.insert("ψ".to_string(), cochain(&h, psi, &ring)?);
        let x = hchain(&h, chain, &ring)?;
        let normalized = brace::normalize(expr).map_err(|e| e.to_string())?;
        match brace::eval(&h, expr, &bind, Some(&x), 6, &ring).map_err(|e| e.to_string())? {
            BraceValue::Chain(c) => Ok(json!({ "expression": normalized, "kind": "chain", "value": h.show_hchain(&c) })),
            BraceValue::Cochain(c) => Ok(json!({ "expression": normalized, "kind": "cochain", "value": h.show_cochain(&c) })),
        }
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn p1_is_flat() {
        let v = parse(&p1_dubrovin("1", 2, 3, false));
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["failed"] == 0), "{v}");
        let bad = parse(&p1_dubrovin("1", 2, 3, true));
        assert!(bad["checks"].as_array().unwrap().iter().any(|c| c["failed"] != 0));
    }

    #[test]
    fn koszul_signs() {
        assert_eq!(parse(&koszul("1,0", "1,1"))["sign"], -1);
        assert_eq!(parse(&shuffles("1 1", "1 1"))["count"], 2);
        assert!(parse(&koszul("0,0", "1,1")).get("error").is_some());
    }

    #[test]
    fn braces() {
        let v = parse(&brace_kx2("{𝟙, in}", "", "", "1 x"));
        assert_eq!(v["kind"], "chain");
        let v = parse(&brace_kx2("{φ{in}}", "x -> x", "", "x x"));
        assert!(v.get("error").is_none(), "{v}");
        assert!(parse(&brace_kx2("{φ{in}}", "y -> x", "", "x")).get("error").is_some());
    }
}
