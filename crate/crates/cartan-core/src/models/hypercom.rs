//! Hypercommutative algebras: symmetric k-ary products of degree 4 − 2k,
//! their oracles (WDVV, unit, divisor) and the CH module on A[[z]].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chmod::{check_mod_epsilon, Cl, Cone};
use crate::coeff::{Ring, Scalar, Q};
use crate::colang::{LinfModule, TableAlgebra};
use crate::graded::{canonicalize, expand_multilinear, koszul_unchecked, sign_of, Lin};
use crate::report::{Check, Report};

use super::ModelError;

/// Finite-basis hypercommutative data. Products are stored on sorted input words.
#[derive(Clone, Debug, PartialEq)]
pub struct HypercomData {
    pub name: String,
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    pub ops: BTreeMap<Vec<usize>, Lin<usize>>,
    pub arity_bound: usize,
    pub unit: Option<usize>,
    pub c1: Option<Lin<usize>>,
}

impl HypercomData {
    pub fn new(name: &str, names: Vec<String>, degrees: Vec<i32>, arity_bound: usize) -> HypercomData {
        HypercomData { name: name.into(), names, degrees, ops: BTreeMap::new(), arity_bound, unit: None, c1: None }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.dim()).collect()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sets the product on a word (any order), overwriting.
    pub fn set(&mut self, inputs: &[usize], out: Lin<usize>) {
        let Some((w, s)) = canonicalize(inputs, |&i| self.degrees[i]) else { return };
        let v = out.signed(s);
        if v.is_zero() {
            self.ops.remove(&w);
        } else {
            self.ops.insert(w, v);
        }
    }

    /// (x₁, …, x_k) on basis labels; zero outside 2 ≤ k ≤ arity bound.
    pub fn op(&self, xs: &[usize]) -> Lin<usize> {
        if xs.len() < 2 || xs.len() > self.arity_bound {
            return Lin::zero();
        }
        let Some((w, s)) = canonicalize(xs, |&i| self.degrees[i]) else { return Lin::zero() };
        self.ops.get(&w).map_or_else(Lin::zero, |v| v.signed(s))
    }

    pub fn op_on(&self, xs: &[Lin<usize>], ring: &Ring) -> Lin<usize> {
        expand_multilinear(xs, ring, |bs| self.op(bs))
    }

    fn show_word(&self, w: &[usize]) -> String {
        let parts: Vec<&str> = w.iter().map(|&i| self.names[i].as_str()).collect();
        format!("({})", parts.join(", "))
    }

    pub fn show(&self, v: &Lin<usize>) -> String {
        let parts: Vec<String> = v.iter().map(|(b, c)| format!("({c})*{}", self.names[*b])).collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Sorted multisets of basis labels of the given length.
    fn multisets(&self, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![];
        let mut cur = vec![];
        fn rec(start: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i, left - 1, n, cur, out);
                cur.pop();
            }
        }
        rec(0, len, self.dim(), &mut cur, &mut out);
        out
    }

    /// Every stored product has degree 4 − 2k.
    pub fn degree_check(&self, ring: &Ring) -> Check {
        let mut c = Check::new("hypercom-degrees");
        for (w, v) in &self.ops {
            let want = 4 - 2 * w.len() as i32 + w.iter().map(|&i| self.degrees[i]).sum::<i32>();
            for (b, s) in v.iter() {
                let ok = s.terms().iter().all(|(m, _)| ring.mono_degree(m) + self.degrees[*b] == want);
                c.record_bool(|| self.show_word(w), ok, || format!("{s} * {} has the wrong degree", self.names[*b]));
            }
        }
        c
    }

    /// WDVV: Σ ±(x₁, x_{S₁}, (x₂, x_{S₂}, x_k)) is symmetric in x₁ ↔ x₂, with S₁ ⊔ S₂ = {3..k−1}.
    pub fn wdvv_residual(&self, x1: usize, x2: usize, s: &[usize], xk: usize, ring: &Ring) -> Lin<usize> {
        let mut word = vec![x1, x2];
        word.extend_from_slice(s);
        word.push(xk);
        let degs: Vec<i32> = word.iter().map(|&i| self.degrees[i]).collect();
        let k = word.len();
        let mut out = Lin::zero();
        for mask in 0u32..(1 << s.len()) {
            let s1: Vec<usize> = (0..s.len()).filter(|j| mask & (1 << j) != 0).map(|j| j + 2).collect();
            let s2: Vec<usize> = (0..s.len()).filter(|j| mask & (1 << j) == 0).map(|j| j + 2).collect();
            for (outer, inner, sg) in [(0usize, 1usize, 1), (1, 0, -1)] {
                // order: outer, S₁, inner, S₂, x_k
                let mut perm = vec![outer];
                perm.extend(&s1);
                perm.push(inner);
                perm.extend(&s2);
                perm.push(k - 1);
                let sign = koszul_unchecked(&perm, &degs);
                let mut iw = vec![word[inner]];
                iw.extend(s2.iter().map(|&j| word[j]));
                iw.push(xk);
                let inner_v = self.op(&iw);
                if inner_v.is_zero() {
                    continue;
                }
                let mut args: Vec<Lin<usize>> = vec![Lin::basis(word[outer])];
                args.extend(s1.iter().map(|&j| Lin::basis(word[j])));
                args.push(inner_v);
                out.add_with_sign(&self.op_on(&args, ring), sign * sg);
            }
        }
        out
    }

    pub fn wdvv_check(&self, ring: &Ring) -> Check {
        let mut c = Check::new("wdvv").with_stamp(format!("arity_bound {}", self.arity_bound));
        for slen in 0..=self.arity_bound.saturating_sub(2) {
            for s in self.multisets(slen) {
                if canonicalize(&s, |&i| self.degrees[i]).is_none() {
                    continue;
                }
                for x1 in self.labels() {
                    for x2 in self.labels() {
                        for xk in self.labels() {
                            let r = self.wdvv_residual(x1, x2, &s, xk, ring);
                            c.record(|| format!("x1={} x2={} S={} xk={}", self.names[x1], self.names[x2], self.show_word(&s), self.names[xk]), &r);
                        }
                    }
                }
            }
        }
        c
    }

    /// (𝟙, x) = x and (𝟙, x₁, …, x_k) = 0 for k ≥ 2.
    pub fn unit_check(&self) -> Check {
        let mut c = Check::new("unit");
        let Some(u) = self.unit else { return c };
        for len in 1..self.arity_bound {
            for w in self.multisets(len) {
                let mut full = vec![u];
                full.extend(&w);
                let mut r = self.op(&full);
                if len == 1 {
                    r.add_with_sign(&Lin::basis(w[0]), -1);
                }
                c.record(|| format!("(unit, {})", self.show_word(&w)), &r);
            }
        }
        c
    }

    /// (c₁, x₁, …, x_k) = e d/de (x₁, …, x_k) for k ≥ 2.
    pub fn divisor_check(&self, ring: &Ring) -> Check {
        let mut c = Check::new("divisor");
        let Some(c1) = &self.c1 else { return c };
        for len in 2..self.arity_bound {
            for w in self.multisets(len) {
                let mut args = vec![c1.clone()];
                args.extend(w.iter().map(|&i| Lin::basis(i)));
                let mut r = self.op_on(&args, ring);
                let rhs = self.op(&w).map_coeffs(|s| s.e_de(&ring.policy));
                r.add_with_sign(&rhs, -1);
                c.record(|| format!("(c1, {})", self.show_word(&w)), &r);
            }
        }
        c
    }

    /// All oracles of the data.
    pub fn validate(&self, ring: &Ring) -> Report {
        let mut rep = Report::new();
        rep.push(self.degree_check(ring));
        rep.push(self.wdvv_check(ring));
        rep.push(self.unit_check());
        rep.push(self.divisor_check(ring));
        rep
    }

    pub fn to_spec(&self, ring: &Ring) -> HypercomSpec {
        let mut operations = vec![];
        for (w, v) in &self.ops {
            for (b, c) in v.iter() {
                operations.push(OpEntry {
                    arity: w.len(),
                    inputs: w.iter().map(|&i| self.names[i].clone()).collect(),
                    output: self.names[*b].clone(),
                    coeff: c.to_literal(ring),
                });
            }
        }
        HypercomSpec {
            name: self.name.clone(),
            basis: self.names.iter().zip(&self.degrees).map(|(n, &d)| BasisEntry { name: n.clone(), degree: d }).collect(),
            arity_bound: self.arity_bound,
            operations,
            unit: self.unit.map(|u| self.names[u].clone()),
            c1: self.c1.as_ref().map(|v| v.iter().map(|(b, c)| Term { name: self.names[*b].clone(), coeff: c.to_literal(ring) }).collect()),
        }
    }

    pub fn from_spec(spec: &HypercomSpec, ring: &Ring) -> Result<HypercomData, ModelError> {
        let names: Vec<String> = spec.basis.iter().map(|b| b.name.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(ModelError::Schema("duplicate basis name".into()));
        }
        if spec.arity_bound < 2 {
            return Err(ModelError::Schema("arity_bound must be at least 2".into()));
        }
        let degrees = spec.basis.iter().map(|b| b.degree).collect();
        let mut h = HypercomData::new(&spec.name, names, degrees, spec.arity_bound);
        let find = |n: &str| h.index(n).ok_or_else(|| ModelError::Schema(format!("unknown basis element `{n}`")));
        let mut acc: BTreeMap<Vec<usize>, Lin<usize>> = BTreeMap::new();
        for (k, op) in spec.operations.iter().enumerate() {
            if op.arity != op.inputs.len() || op.arity < 2 || op.arity > spec.arity_bound {
                return Err(ModelError::Schema(format!("operation {k}: bad arity {}", op.arity)));
            }
            let ins = op.inputs.iter().map(|n| find(n)).collect::<Result<Vec<_>, _>>()?;
            let out = find(&op.output)?;
            let c = Scalar::parse(&op.coeff, ring).map_err(|e| ModelError::Schema(format!("operation {k}: {e}")))?;
            let (w, s) = canonicalize(&ins, |&i| h.degrees[i])
                .ok_or_else(|| ModelError::Schema(format!("operation {k}: repeated odd input")))?;
            acc.entry(w).or_default().add_term(out, c.signed(s));
        }
        let unit = spec.unit.as_deref().map(find).transpose()?;
        let c1 = match &spec.c1 {
            None => None,
            Some(ts) => {
                let mut v = Lin::zero();
                for t in ts {
                    let c = Scalar::parse(&t.coeff, ring).map_err(|e| ModelError::Schema(format!("c1: {e}")))?;
                    v.add_term(find(&t.name)?, c);
                }
                Some(v)
            }
        };
        h.ops = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        h.unit = unit;
        h.c1 = c1;
        Ok(h)
    }

    /// Parses and re-validates all oracles; data from disk is never trusted.
    pub fn from_json(text: &str, ring: &Ring) -> Result<HypercomData, ModelError> {
        let spec: HypercomSpec = serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        let h = HypercomData::from_spec(&spec, ring)?;
        let rep = h.validate(ring);
        if let Some(c) = rep.checks.iter().find(|c| !c.passed()) {
            return Err(ModelError::Axiom(c.name.clone(), c.first_failure().map(|f| f.witness.clone()).unwrap_or_default()));
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpEntry {
    pub arity: usize,
    pub inputs: Vec<String>,
    pub output: String,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypercomSpec {
    #[serde(default)]
    pub name: String,
    pub basis: Vec<BasisEntry>,
    pub arity_bound: usize,
    pub operations: Vec<OpEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<Vec<Term>>,
}

/// q = e²T^a.
pub fn line_weight(a: Q) -> Scalar {
    Scalar::term(crate::coeff::q(1), crate::coeff::Mono { e: 2, energy: a, ..crate::coeff::Mono::one() })
}

/// Quantum cohomology of ℙ¹ up to an arity bound: T₀ is the unit,
/// (T₁, …, T₁) = qT₀ for every arity, c₁ = 2T₁.
pub fn qh_p1(a: Q, arity_bound: usize) -> HypercomData {
    let mut h = HypercomData::new("qh-p1", vec!["T0".into(), "T1".into()], vec![0, 2], arity_bound);
    h.set(&[0, 0], Lin::basis(0));
    h.set(&[0, 1], Lin::basis(1));
    let q = line_weight(a);
    for k in 2..=arity_bound {
        h.set(&vec![1; k], Lin::term(0, q.clone()));
    }
    h.unit = Some(0);
    h.c1 = Some(Lin::term(1, Scalar::from_int(2)));
    h
}

/// L = A[1] as an abelian L∞ algebra; its L[1]-degree is |x| − 2.
pub fn hypercom_base(h: &HypercomData) -> TableAlgebra {
    TableAlgebra::new(h.names.clone(), h.degrees.iter().map(|d| d - 2).collect())
}

/// M̃ = A[[z]] over the cone of A[1]:
/// ℓ_k(εx₁, x₂, …, x_k | m) = (−1)^{1+|x₁|+…+|x_k|}(x₁, …, x_k, m), zero on words
/// without exactly one ε.
#[derive(Clone, Debug)]
pub struct HypercomModule {
    pub data: HypercomData,
}

impl LinfModule for HypercomModule {
    type B = Cl<usize>;
    type M = usize;
    fn msdeg(&self, m: &usize) -> i32 {
        self.data.degrees[*m] - 1
    }
    fn act(&self, ys: &[Cl<usize>], m: &usize, _ring: &Ring) -> Lin<usize> {
        let pos: Vec<usize> = (0..ys.len()).filter(|&i| ys[i].eps).collect();
        let [i] = pos.as_slice() else { return Lin::zero() };
        let sd = |c: &Cl<usize>| self.data.degrees[c.base] - 2 + c.eps as i32;
        let before: i64 = ys[..*i].iter().map(|c| sd(c) as i64).sum();
        let mv = sign_of(before * sd(&ys[*i]) as i64);
        let mut xs = vec![ys[*i].base];
        xs.extend(ys.iter().enumerate().filter(|(j, _)| j != i).map(|(_, c)| c.base));
        let total: i64 = xs.iter().map(|&x| self.data.degrees[x] as i64).sum();
        xs.push(*m);
        self.data.op(&xs).signed(mv * sign_of(1 + total))
    }
    fn max_arity(&self) -> Option<usize> {
        Some(self.data.arity_bound - 1)
    }
}

/// The CH module of a hypercommutative algebra, with its base algebra.
pub struct HypercomCh {
    pub cone: Cone<TableAlgebra>,
    pub module: HypercomModule,
}

impl HypercomCh {
    pub fn base(&self) -> &TableAlgebra {
        &self.cone.0
    }
}

/// Builds the module without any oracle or gate; used for mutated data.
pub fn hypercom_module_unchecked(h: &HypercomData) -> HypercomCh {
    HypercomCh { cone: Cone(hypercom_base(h)), module: HypercomModule { data: h.clone() } }
}

/// The mod-εⁿ check (n = 2, or 3 for the trivial ε³ extension) at a word bound.
pub fn hypercom_gate(ch: &HypercomCh, n: usize, word_bound: usize, ring: &Ring) -> Check {
    let labels = ch.module.data.labels();
    check_mod_epsilon(&ch.cone, &ch.module, &labels, &labels, n, word_bound, ring)
        .with_stamp(format!("word_bound {word_bound}, z_order {}", ring.policy.z_order))
}

/// Checks WDVV and degrees, builds the module and gates it at mod ε² (or ε³).
pub fn hypercom_to_ch(h: &HypercomData, extend_eps3: bool, word_bound: usize, ring: &Ring) -> Result<HypercomCh, ModelError> {
    for c in [h.degree_check(ring), h.wdvv_check(ring)] {
        if let Some(f) = c.first_failure() {
            return Err(ModelError::Axiom(c.name.clone(), format!("{}: {}", f.witness, f.residual)));
        }
    }
    let ch = hypercom_module_unchecked(h);
    let n = if extend_eps3 { 3 } else { 2 };
    let gate = hypercom_gate(&ch, n, word_bound, ring);
    if let Some(f) = gate.first_failure() {
        return Err(ModelError::Axiom(gate.name.clone(), f.witness.clone()));
    }
    Ok(ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, Policy, TVar};

    fn ring() -> Ring {
        Ring::new(Policy { z_order: 3, energy_cut: q(6), t_order: 3, e_window: (-12, 12) }, vec![]).unwrap()
    }

    #[test]
    fn p1_oracles() {
        let r = ring();
        let h = qh_p1(q(1), 5);
        let rep = h.validate(&r);
        assert!(rep.passed(), "{:?}", rep.failing());
        assert_eq!(h.op(&[0, 1]), Lin::basis(1));
        let c1 = h.c1.clone().unwrap();
        let lhs = h.op_on(&[c1, Lin::basis(1), Lin::basis(1)], &r);
        assert_eq!(lhs, Lin::term(0, line_weight(q(1)).scale(q(2))));
    }

    #[test]
    fn dropping_a_product_breaks_wdvv() {
        let r = ring();
        let mut h = qh_p1(q(1), 4);
        h.set(&[0, 1, 1], Lin::basis(1));
        assert!(!h.wdvv_check(&r).passed());
    }

    #[test]
    fn one_dimensional_binary_product() {
        let r = ring();
        let mut h = HypercomData::new("k", vec!["u".into()], vec![0], 2);
        h.set(&[0, 0], Lin::basis(0));
        h.unit = Some(0);
        assert!(h.validate(&r).passed());
        let ch = hypercom_to_ch(&h, true, 3, &r).unwrap();
        assert!(hypercom_gate(&ch, 2, 3, &r).passed());
    }

    #[test]
    fn p1_module_gates() {
        let r = ring();
        let h = qh_p1(q(1), 4);
        let ch = hypercom_to_ch(&h, true, 4, &r).unwrap();
        assert!(hypercom_gate(&ch, 3, 4, &r).checked > 0);
    }

    #[test]
    fn json_round_trip() {
        let r = Ring::new(Policy { z_order: 3, energy_cut: q(6), t_order: 3, e_window: (-12, 12) }, vec![TVar { name: "t".into(), degree: 0 }]).unwrap();
        let h = qh_p1(q(1), 4);
        let text = serde_json::to_string(&h.to_spec(&r)).unwrap();
        let back = HypercomData::from_json(&text, &r).unwrap();
        assert_eq!(back, h);
    }
}
