//! The Dubrovin connection of a hypercommutative algebra: γ = Σ Tᵢtᵢ in the
//! abelian A[1], with the quantum product read off from the GGM operator.

use crate::chmod::{eps, plain, Cl};
use crate::coeff::{q, qr, Mono, Policy, Ring, Scalar, TVar};
use crate::colang::{act_on, ell_on, TableAlgebra};
use crate::conn::matrix::{flatness_report, LMat, MatrixConnection};
use crate::conn::{stamp_of, working_ring, ChConnection, Deriv, C1};
use crate::graded::Lin;
use crate::report::{Check, Report};

use super::hypercom::{hypercom_gate, hypercom_module_unchecked, HypercomCh, HypercomData, HypercomModule};
use super::ModelError;

/// Ring with one variable tᵢ of degree 2 − |Tᵢ| per basis element.
pub fn dubrovin_ring(h: &HypercomData, policy: Policy) -> Result<Ring, ModelError> {
    let tvars = h.names.iter().zip(&h.degrees).enumerate().map(|(i, (_, d))| TVar { name: format!("t{i}"), degree: 2 - d }).collect();
    Ring::new(policy, tvars).map_err(|e| ModelError::Ring(e.to_string()))
}

pub struct Dubrovin {
    pub data: HypercomData,
    pub ch: HypercomCh,
    /// Comparison ring.
    pub base: Ring,
    /// Ring operators are computed in: one more t-order, four more z-orders.
    pub work: Ring,
    pub gamma: Lin<usize>,
    pub c1: C1<usize>,
}

/// Validates h (degrees, WDVV, unit, divisor), the ring and the mod-ε² gate.
pub fn dubrovin(h: &HypercomData, base: &Ring) -> Result<Dubrovin, ModelError> {
    let rep = h.validate(base);
    if let Some(c) = rep.checks.iter().find(|c| !c.passed()) {
        let f = c.first_failure().map(|f| f.witness.clone()).unwrap_or_default();
        return Err(ModelError::Axiom(c.name.clone(), f));
    }
    if h.c1.is_none() {
        return Err(ModelError::Schema("a first Chern class c1 is required".into()));
    }
    if base.tvars.len() != h.dim() || base.tvars.iter().zip(&h.degrees).any(|(t, d)| t.degree != 2 - d) {
        return Err(ModelError::Ring("one variable of degree 2 - |T_i| per basis element is required".into()));
    }
    if h.arity_bound < base.policy.t_order as usize + 2 {
        return Err(ModelError::Ring(format!(
            "arity bound {} does not determine the product below t-order {}",
            h.arity_bound, base.policy.t_order
        )));
    }
    let d = dubrovin_unvalidated(h, base);
    let gate = hypercom_gate(&d.ch, 2, h.arity_bound.min(4), base);
    if let Some(f) = gate.first_failure() {
        return Err(ModelError::Axiom(gate.name.clone(), f.witness.clone()));
    }
    Ok(d)
}

/// No oracle or gate; for mutated data.
pub fn dubrovin_unvalidated(h: &HypercomData, base: &Ring) -> Dubrovin {
    let n = h.dim();
    let gamma: Lin<usize> = (0..n).map(|i| (i, Scalar::term(q(1), t_mono(i)))).collect();
    let c1v = h.c1.clone().unwrap_or_else(Lin::zero);
    let t = (0..n).map(|i| Lin::basis(i).signed(crate::graded::sign_of(h.degrees[i] as i64))).collect();
    Dubrovin {
        data: h.clone(),
        ch: hypercom_module_unchecked(h),
        base: base.clone(),
        work: working_ring(base, 1, 4),
        gamma,
        c1: C1 { t, e: c1v },
    }
}

fn t_mono(i: usize) -> Mono {
    let mut m = Mono::one();
    m.t[i] = 1;
    m
}

impl Dubrovin {
    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// The GGM connection (`variant = false`) or its c₁ variant.
    pub fn connection(&self, variant: bool) -> ChConnection<'_, TableAlgebra, HypercomModule> {
        let c1 = variant.then(|| self.c1.clone());
        ChConnection::new(self.ch.base(), &self.ch.module, &self.gamma, c1, &self.work)
    }

    fn columns(&self, f: impl Fn(usize) -> Lin<usize>) -> Vec<Vec<Scalar>> {
        let n = self.dim();
        let cols: Vec<Lin<usize>> = (0..n).map(f).collect();
        (0..n).map(|i| (0..n).map(|j| cols[j].coeff(&i)).collect()).collect()
    }

    /// Matrices of ∇_{∂/∂tᵢ}, ∇_{e d/de} and ∇_{d/dz} in the basis T.
    pub fn matrix_connection(&self, variant: bool) -> MatrixConnection {
        let c = self.connection(variant);
        let basic = Deriv::basic(&self.work)
            .iter()
            .map(|x| LMat::new(1, self.columns(|j| c.ggm(x, &Lin::basis(j)))))
            .collect();
        let dz = LMat::new(2, self.columns(|j| c.euler_z(&Lin::basis(j))));
        MatrixConnection { ring: self.work.clone(), names: self.data.names.clone(), degrees: self.data.degrees.clone(), basic, dz: Some(dz) }
    }

    /// Σ_l (γ^l, xs…)/l!, summed directly from the products.
    pub fn star(&self, xs: &[Lin<usize>]) -> Lin<usize> {
        let r = &self.work;
        let mut out = Lin::zero();
        let mut coef = Scalar::one();
        for l in 0..=self.data.arity_bound.saturating_sub(xs.len()) {
            let mut args = vec![self.gamma.clone(); l];
            args.extend(xs.iter().cloned());
            out.add_scaled(&self.data.op_on(&args, r), &coef, r);
            coef = coef.scale(qr(1, l as i128 + 1));
        }
        out
    }

    /// E = c₁ + Σ (−1)^{|Tᵢ|}((2 − |Tᵢ|)/2) Tᵢtᵢ.
    pub fn euler_field(&self) -> Lin<usize> {
        let mut e = self.c1.e.clone();
        for (i, d) in self.data.degrees.iter().enumerate() {
            let c = Scalar::term(qr(2 - *d as i128, 2), t_mono(i)).signed(crate::graded::sign_of(*d as i64));
            e.add_term(i, c);
        }
        e
    }

    /// Matrix entries against the directly summed series, and the c₁ identities.
    pub fn series_report(&self) -> Report {
        let (b, w) = (&self.base, &self.work);
        let stamp = stamp_of(b);
        let c = self.connection(true);
        let n = self.dim();
        let mut ggm = Check::new("ggm-is-quantum-product").with_stamp(stamp.clone());
        let mut eul = Check::new("euler-is-quantum-product").with_stamp(stamp.clone());
        let ev = self.euler_field();
        let zh = crate::chmod::z_scalar(w).scale(qr(1, 2));
        for j in 0..n {
            let tj = Lin::basis(j);
            for i in 0..n {
                let r = c.ggm(&Deriv::dt(i, n), &tj).minus(&self.star(&[Lin::basis(i), tj.clone()]));
                ggm.record(|| format!("{} * {}", self.data.names[i], self.data.names[j]), &r.truncate(b));
            }
            let mut expect = tj.scale(&zh.scale(q(self.data.degrees[j] as i128)), w);
            expect.add_with_sign(&self.star(&[ev.clone(), tj.clone()]), -1);
            eul.record(|| self.data.names[j].clone(), &c.euler_z(&tj).minus(&expect).truncate(b));
        }
        let mut rep = Report::new();
        rep.push(ggm);
        rep.push(eul);
        rep.push(self.c1_identities(&c));
        rep
    }

    /// ∇̃_X ℓ^{M,γ}_k(ys|m) = ℓ^{M,γ}_{k+1}(c₁(X), ys|m) and its L-side analogue,
    /// on words with one ε. Words are short enough that both sides stay inside
    /// the arity bound up to the comparison t-order.
    fn c1_identities(&self, c: &ChConnection<'_, TableAlgebra, HypercomModule>) -> Check {
        let (b, w) = (&self.base, &self.work);
        let mut chk = Check::new("c1-derivative").with_stamp(stamp_of(b));
        let n = self.dim();
        let words = crate::colang::sym_words(&(0..n).collect::<Vec<_>>(), |_| 0, 0, self.data.arity_bound.saturating_sub(b.policy.t_order as usize + 2));
        for x in Deriv::basic(w) {
            let src = c.source(&x);
            for ws in &words {
                let lw: Vec<Lin<usize>> = ws.iter().map(|&y| Lin::basis(y)).collect();
                let mut la = x.apply_lin(&ell_on(&c.ops.base, &lw, w), w);
                let mut full = vec![src.clone()];
                full.extend(lw.iter().cloned());
                la.add_with_sign(&ell_on(&c.ops.base, &full, w), -1);
                chk.record(|| format!("L {} {:?}", x.show(w), ws), &la.truncate(b));
                for e0 in 0..n {
                    let mut ys: Vec<Lin<Cl<usize>>> = vec![Lin::basis(eps(e0))];
                    ys.extend(ws.iter().map(|&y| Lin::basis(plain(y))));
                    for m in 0..n {
                        let v = Lin::basis(m);
                        let mut r = x.apply_lin(&act_on(&c.ops.module, &ys, &v, w), w);
                        let mut full = vec![src.relabel(|y| plain(*y))];
                        full.extend(ys.iter().cloned());
                        r.add_with_sign(&act_on(&c.ops.module, &full, &v, w), -1);
                        chk.record(|| format!("M {} e{e0} {:?} | {m}", x.show(w), ws), &r.truncate(b));
                    }
                }
            }
        }
        chk
    }

    /// Pairwise flatness and homogeneity of the c₁-variant matrices.
    pub fn flatness(&self) -> Report {
        flatness_report(&self.matrix_connection(true), &self.base)
    }

    /// Chain-level statements; d^γ vanishes here so they hold degenerately.
    pub fn chain_report(&self) -> Report {
        let c = self.connection(true);
        let n = self.dim();
        let dirs: Vec<(String, Deriv)> =
            Deriv::basic(&self.work).into_iter().enumerate().map(|(i, d)| (if i < n { format!("d/dt{i}") } else { "e d/de".into() }, d)).collect();
        let samples = vec![Scalar::one(), Scalar::term(q(1), t_mono(0)), Scalar::parse("e^2", &self.work).unwrap_or_else(|_| Scalar::one())];
        c.chain_report(&dirs, &(0..n).collect::<Vec<_>>(), &samples, &self.base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::hypercom::qh_p1;

    fn setup(t: u32, z: u32) -> Dubrovin {
        let h = qh_p1(q(1), 5);
        let r = dubrovin_ring(&h, Policy { z_order: z, energy_cut: q(8), t_order: t, e_window: (-16, 16) }).unwrap();
        dubrovin(&h, &r).unwrap()
    }

    #[test]
    fn p1_is_flat() {
        let d = setup(3, 4);
        let rep = d.flatness();
        assert!(rep.passed(), "{:?}", rep.failing());
    }

    #[test]
    fn p1_series_match() {
        let d = setup(2, 3);
        let rep = d.series_report();
        for c in &rep.checks {
            assert!(c.passed(), "{} {:?}", c.name, c.first_failure());
        }
    }

    #[test]
    fn p1_chain_statements_degenerate() {
        let d = setup(2, 3);
        assert!(d.chain_report().passed());
    }

    #[test]
    fn small_product_at_origin() {
        let d = setup(1, 2);
        let c = d.connection(true);
        let v = c.ggm(&Deriv::dt(1, 2), &Lin::basis(1)).truncate(&d.base);
        assert_eq!(v, Lin::term(0, crate::models::hypercom::line_weight(q(1))));
    }

    #[test]
    fn arity_bound_too_small() {
        let h = qh_p1(q(1), 3);
        let r = dubrovin_ring(&h, Policy { z_order: 2, energy_cut: q(8), t_order: 3, e_window: (-16, 16) }).unwrap();
        assert!(matches!(dubrovin(&h, &r), Err(ModelError::Ring(_))));
    }
}
