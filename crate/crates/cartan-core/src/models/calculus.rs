//! Calculus algebras (V, W, ∧, [·,·], ι, 𝓛, B) and the CH module W[1][[z]] over V[1].

use std::collections::BTreeMap;

use crate::chmod::{check_ch_relations, check_mod_epsilon, package_cone, z_scalar, ChPackage, PackageModule};
use crate::coeff::{Ring, Scalar};
use crate::graded::{sign_of, Lin};
use crate::report::{Check, Report};

use super::ModelError;

#[derive(Clone, Debug)]
pub struct CalculusData {
    pub v_names: Vec<String>,
    pub v_deg: Vec<i32>,
    pub w_names: Vec<String>,
    pub w_deg: Vec<i32>,
    pub wedge: BTreeMap<(usize, usize), Lin<usize>>,
    /// bracket on V[1]
    pub bracket: BTreeMap<(usize, usize), Lin<usize>>,
    pub iota: BTreeMap<(usize, usize), Lin<usize>>,
    /// 𝓛 on W[1]
    pub lie: BTreeMap<(usize, usize), Lin<usize>>,
    pub b: BTreeMap<usize, Lin<usize>>,
}

fn get2(t: &BTreeMap<(usize, usize), Lin<usize>>, a: usize, b: usize) -> Lin<usize> {
    t.get(&(a, b)).cloned().unwrap_or_default()
}

impl CalculusData {
    fn vl(&self) -> Vec<usize> {
        (0..self.v_names.len()).collect()
    }

    fn wl(&self) -> Vec<usize> {
        (0..self.w_names.len()).collect()
    }

    pub fn wedge_on(&self, a: &Lin<usize>, b: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        crate::graded::expand_multilinear(&[a.clone(), b.clone()], ring, |x| get2(&self.wedge, x[0], x[1]))
    }

    pub fn bracket_on(&self, a: &Lin<usize>, b: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        crate::graded::expand_multilinear(&[a.clone(), b.clone()], ring, |x| get2(&self.bracket, x[0], x[1]))
    }

    fn op2(&self, t: &BTreeMap<(usize, usize), Lin<usize>>, x: &Lin<usize>, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        crate::graded::expand_multilinear(&[x.clone(), w.clone()], ring, |p| get2(t, p[0], p[1]))
    }

    pub fn iota_on(&self, x: &Lin<usize>, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        self.op2(&self.iota, x, w, ring)
    }

    pub fn lie_w(&self, x: &Lin<usize>, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        self.op2(&self.lie, x, w, ring)
    }

    pub fn b_on(&self, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        w.map_linear(ring, |i| self.b.get(i).cloned().unwrap_or_default())
    }

    /// l_x = (−1)^{|x|'}[x, ·] on V.
    fn l_v(&self, x: usize, v: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        self.bracket_on(&Lin::basis(x), v, ring).signed(sign_of(self.v_deg[x] as i64 - 1))
    }

    /// l_x = (−1)^{|x|'}𝓛_x on W.
    fn l_w(&self, x: usize, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        self.lie_w(&Lin::basis(x), w, ring).signed(sign_of(self.v_deg[x] as i64 - 1))
    }

    fn l_w_lin(&self, x: &Lin<usize>, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        let mut out = Lin::zero();
        for (b, c) in x.iter() {
            out.add_scaled(&self.l_w(*b, w, ring), c, ring);
        }
        out
    }

    fn iota_b(&self, x: usize, w: &Lin<usize>, ring: &Ring) -> Lin<usize> {
        self.iota_on(&Lin::basis(x), w, ring)
    }

    /// All axioms, one named check each.
    pub fn axioms(&self, ring: &Ring) -> Report {
        let mut wedge = Check::new("wedge");
        let mut iota_mod = Check::new("iota-module");
        let mut bsq = Check::new("b-squared");
        let mut lie_alg = Check::new("bracket-lie");
        let mut lie_mod = Check::new("lie-module");
        let mut leib = Check::new("leibniz");
        let mut low = Check::new("lie-of-wedge");
        let mut iol = Check::new("iota-of-lie");
        let mut cartan = Check::new("cartan");
        let vd = |i: usize| self.v_deg[i] as i64;
        let sd = |i: usize| self.v_deg[i] as i64 - 1;
        let bx = |i: usize| Lin::basis(i);
        for w in self.wl() {
            let wv = bx(w);
            let bb = self.b_on(&self.b_on(&wv, ring), ring);
            bsq.record(|| self.w_names[w].clone(), &bb);
        }
        for a in self.vl() {
            for w in self.wl() {
                let wv = bx(w);
                // l_x = [B, ι_x], B of degree −1
                let mut r = self.l_w(a, &wv, ring);
                r.add_with_sign(&self.b_on(&self.iota_b(a, &wv, ring), ring), -1);
                r.add_with_sign(&self.iota_b(a, &self.b_on(&wv, ring), ring), sign_of(vd(a)));
                cartan.record(|| format!("{} | {}", self.v_names[a], self.w_names[w]), &r);
            }
            for b in self.vl() {
                // graded commutativity
                let mut r = self.wedge_on(&bx(a), &bx(b), ring);
                r.add_with_sign(&self.wedge_on(&bx(b), &bx(a), ring), -sign_of(vd(a) * vd(b)));
                wedge.record(|| format!("{}^{}", self.v_names[a], self.v_names[b]), &r);
                // antisymmetry on V[1]
                let mut r = self.bracket_on(&bx(a), &bx(b), ring);
                r.add_with_sign(&self.bracket_on(&bx(b), &bx(a), ring), sign_of(sd(a) * sd(b)));
                lie_alg.record(|| format!("[{},{}]", self.v_names[a], self.v_names[b]), &r);
                for w in self.wl() {
                    let wv = bx(w);
                    let ab = self.wedge_on(&bx(a), &bx(b), ring);
                    // ι_{a∧b} = ι_a ι_b
                    let mut r = self.iota_on(&ab, &wv, ring);
                    r.add_with_sign(&self.iota_b(a, &self.iota_b(b, &wv, ring), ring), -1);
                    iota_mod.record(|| format!("{}^{} | {}", self.v_names[a], self.v_names[b], self.w_names[w]), &r);
                    // 𝓛_{[a,b]} = [𝓛_a, 𝓛_b]
                    let br = self.bracket_on(&bx(a), &bx(b), ring);
                    let mut r = self.lie_w(&br, &wv, ring);
                    r.add_with_sign(&self.lie_w(&bx(a), &self.lie_w(&bx(b), &wv, ring), ring), -1);
                    r.add_with_sign(&self.lie_w(&bx(b), &self.lie_w(&bx(a), &wv, ring), ring), sign_of(sd(a) * sd(b)));
                    lie_mod.record(|| format!("[{},{}] | {}", self.v_names[a], self.v_names[b], self.w_names[w]), &r);
                    // l_{a∧b} = l_a ι_b + (−1)^{|a|} ι_a l_b
                    let mut r = self.l_w_lin(&ab, &wv, ring);
                    r.add_with_sign(&self.l_w(a, &self.iota_b(b, &wv, ring), ring), -1);
                    r.add_with_sign(&self.iota_b(a, &self.l_w(b, &wv, ring), ring), -sign_of(vd(a)));
                    low.record(|| format!("{}^{} | {}", self.v_names[a], self.v_names[b], self.w_names[w]), &r);
                    // ι_{l_a b} = [l_a, ι_b], l_a of degree |a|−1 on W
                    let lab = self.l_v(a, &bx(b), ring);
                    let mut r = self.iota_on(&lab, &wv, ring);
                    r.add_with_sign(&self.l_w(a, &self.iota_b(b, &wv, ring), ring), -1);
                    r.add_with_sign(&self.iota_b(b, &self.l_w(a, &wv, ring), ring), sign_of(sd(a) * vd(b)));
                    iol.record(|| format!("{},{} | {}", self.v_names[a], self.v_names[b], self.w_names[w]), &r);
                }
                for c in self.vl() {
                    // associativity
                    let l = self.wedge_on(&self.wedge_on(&bx(a), &bx(b), ring), &bx(c), ring);
                    let rr = self.wedge_on(&bx(a), &self.wedge_on(&bx(b), &bx(c), ring), ring);
                    wedge.record(|| format!("({}^{})^{}", self.v_names[a], self.v_names[b], self.v_names[c]), &l.minus(&rr));
                    // Jacobi on V[1]
                    let mut r = self.bracket_on(&bx(a), &self.bracket_on(&bx(b), &bx(c), ring), ring);
                    r.add_with_sign(&self.bracket_on(&self.bracket_on(&bx(a), &bx(b), ring), &bx(c), ring), -1);
                    r.add_with_sign(&self.bracket_on(&bx(b), &self.bracket_on(&bx(a), &bx(c), ring), ring), -sign_of(sd(a) * sd(b)));
                    lie_alg.record(|| format!("jacobi {},{},{}", self.v_names[a], self.v_names[b], self.v_names[c]), &r);
                    // l_a(b∧c) = (l_a b)∧c + (−1)^{(|a|+1)|b|} b∧l_a c
                    let mut r = self.l_v(a, &self.wedge_on(&bx(b), &bx(c), ring), ring);
                    r.add_with_sign(&self.wedge_on(&self.l_v(a, &bx(b), ring), &bx(c), ring), -1);
                    r.add_with_sign(&self.wedge_on(&bx(b), &self.l_v(a, &bx(c), ring), ring), -sign_of((vd(a) + 1) * vd(b)));
                    leib.record(|| format!("{} on {}^{}", self.v_names[a], self.v_names[b], self.v_names[c]), &r);
                }
            }
        }
        let mut rep = Report::new();
        for c in [wedge, iota_mod, bsq, lie_alg, lie_mod, leib, low, iol, cartan] {
            rep.push(c);
        }
        rep
    }
}

/// L = V[1], M̃ = W[1][[z]], d = zB, 𝓛_x = 𝓛_x, I_x = (−1)^{|x|}ι_x, ρ = 0.
#[derive(Clone, Copy, Debug)]
pub struct CalculusPackage<'a>(pub &'a CalculusData);

impl ChPackage for CalculusPackage<'_> {
    type Y = usize;
    type M = usize;
    fn ydeg(&self, y: &usize) -> i32 {
        self.0.v_deg[*y] - 1
    }
    fn mdeg(&self, m: &usize) -> i32 {
        self.0.w_deg[*m] - 1
    }
    fn delta(&self, _y: &usize, _ring: &Ring) -> Lin<usize> {
        Lin::zero()
    }
    fn bracket(&self, a: &usize, b: &usize, _ring: &Ring) -> Lin<usize> {
        get2(&self.0.bracket, *a, *b)
    }
    fn d(&self, m: &usize, ring: &Ring) -> Lin<usize> {
        self.0.b.get(m).cloned().unwrap_or_default().scale(&z_scalar(ring), ring)
    }
    fn lie(&self, y: &usize, m: &usize, _ring: &Ring) -> Lin<usize> {
        get2(&self.0.lie, *y, *m)
    }
    fn iota(&self, y: &usize, m: &usize, _ring: &Ring) -> Lin<usize> {
        get2(&self.0.iota, *y, *m).signed(sign_of(self.0.v_deg[*y] as i64))
    }
    fn rho(&self, _a: &usize, _b: &usize, _m: &usize, _ring: &Ring) -> Lin<usize> {
        Lin::zero()
    }
}

/// Verifies the axioms, then the CH relations and the mod-ε² gate.
pub fn calculus_to_ch<'a>(c: &'a CalculusData, ring: &Ring) -> Result<PackageModule<CalculusPackage<'a>>, ModelError> {
    let rep = c.axioms(ring);
    if let Some(ch) = rep.checks.iter().find(|ch| !ch.passed()) {
        let f = ch.first_failure().unwrap();
        return Err(ModelError::Axiom(ch.name.clone(), f.witness.clone()));
    }
    let p = CalculusPackage(c);
    let (vl, wl) = (c.vl(), c.wl());
    let rel = check_ch_relations(&p, &vl, &wl, ring);
    if let Some(ch) = rel.checks.iter().find(|ch| !ch.passed()) {
        return Err(ModelError::Axiom(ch.name.clone(), ch.first_failure().unwrap().witness.clone()));
    }
    let gate = check_mod_epsilon(&package_cone(&p), &PackageModule(p), &vl, &wl, 2, 3, ring);
    if let Some(f) = gate.first_failure() {
        return Err(ModelError::Axiom(gate.name.clone(), f.witness.clone()));
    }
    Ok(PackageModule(p))
}

/// Λ[ξ] with |ξ| = 1 acting on W = ⟨w₀, w₋₁⟩: ι_ξ w₋₁ = w₀, B w₀ = w₋₁, 𝓛_ξ = id.
pub fn exterior_calculus() -> CalculusData {
    let one = |i: usize| Lin::basis(i);
    let mut c = CalculusData {
        v_names: vec!["1".into(), "xi".into()],
        v_deg: vec![0, 1],
        w_names: vec!["w0".into(), "w-1".into()],
        w_deg: vec![0, -1],
        wedge: BTreeMap::new(),
        bracket: BTreeMap::new(),
        iota: BTreeMap::new(),
        lie: BTreeMap::new(),
        b: BTreeMap::new(),
    };
    c.wedge.insert((0, 0), one(0));
    c.wedge.insert((0, 1), one(1));
    c.wedge.insert((1, 0), one(1));
    c.iota.insert((0, 0), one(0));
    c.iota.insert((0, 1), one(1));
    c.iota.insert((1, 1), one(0));
    c.b.insert(0, one(1));
    c.lie.insert((1, 0), one(0));
    c.lie.insert((1, 1), one(1));
    c
}

/// The same algebra with B = 0 and 𝓛 = 0.
pub fn zero_b_calculus() -> CalculusData {
    let mut c = exterior_calculus();
    c.b.clear();
    c.lie.clear();
    c
}

/// The sign of ι_ξ flipped.
pub fn corrupted_iota_calculus() -> CalculusData {
    let mut c = exterior_calculus();
    c.iota.insert((1, 1), Lin::term(0, Scalar::from_int(-1)));
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_is_a_calculus() {
        let r = Ring::plain();
        let c = exterior_calculus();
        let rep = c.axioms(&r);
        assert!(rep.passed(), "{:?}", rep.failing());
        assert!(calculus_to_ch(&c, &r).is_ok());
    }

    #[test]
    fn zero_b_gives_zero_d() {
        let r = Ring::plain();
        let c = zero_b_calculus();
        let m = calculus_to_ch(&c, &r).unwrap();
        assert!(m.0.d(&0, &r).is_zero());
    }

    #[test]
    fn corrupted_iota_fails_cartan() {
        let r = Ring::plain();
        let c = corrupted_iota_calculus();
        let rep = c.axioms(&r);
        assert_eq!(rep.failing(), vec!["cartan"]);
        assert!(matches!(calculus_to_ch(&c, &r), Err(ModelError::Axiom(n, _)) if n == "cartan"));
    }
}
