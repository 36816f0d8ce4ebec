//! Connections over the coefficient ring: derivations, GGM and Euler operators
//! at chain level, curvature, morphism compatibility and primitive forms.
//!
//! Connections are trivial in the given bases: ∇_X acts on coefficients only.

pub mod compat;
pub mod matrix;
pub mod primitive;


use crate::chmod::{op_d, op_iota, op_rho, plain, z_scalar, ChPackage, Cl, Extracted, Twisted, TwistedModule};
use crate::coeff::{q, qr, Mono, Policy, Ring, Scalar};
use crate::colang::{act_on, ell_on, LinfAlgebra, LinfModule};
use crate::graded::{sign_of, Label, Lin};
use crate::report::{Check, Report};

/// Σ aᵢ ∂/∂tᵢ + b·e d/de. All such derivations are even.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Deriv {
    pub t: Vec<Scalar>,
    pub e: Scalar,
}

fn t_mono(i: usize) -> Mono {
    let mut m = Mono::one();
    m.t[i] = 1;
    m
}

impl Deriv {
    pub fn zero(n: usize) -> Deriv {
        Deriv { t: vec![Scalar::zero(); n], e: Scalar::zero() }
    }

    pub fn dt(i: usize, n: usize) -> Deriv {
        let mut d = Deriv::zero(n);
        d.t[i] = Scalar::one();
        d
    }

    pub fn ede(n: usize) -> Deriv {
        let mut d = Deriv::zero(n);
        d.e = Scalar::one();
        d
    }

    /// E = Σ ½|tᵢ| tᵢ ∂/∂tᵢ + e d/de, so that E(r) = ½|r| r.
    pub fn euler(ring: &Ring) -> Deriv {
        let t = ring.tvars.iter().enumerate().map(|(i, v)| Scalar::term(qr(v.degree as i128, 2), t_mono(i))).collect();
        Deriv { t, e: Scalar::one() }
    }

    /// The basic directions ∂/∂t₀, …, e d/de.
    pub fn basic(ring: &Ring) -> Vec<Deriv> {
        let n = ring.tvars.len();
        let mut v: Vec<Deriv> = (0..n).map(|i| Deriv::dt(i, n)).collect();
        v.push(Deriv::ede(n));
        v
    }

    pub fn apply(&self, r: &Scalar, p: &Policy) -> Scalar {
        let mut out = self.e.mul(&r.e_de(p), p);
        for (i, a) in self.t.iter().enumerate() {
            if !a.is_zero() {
                out.add_assign(&a.mul(&r.d_t(i, p), p));
            }
        }
        out
    }

    pub fn apply_lin<B: Label>(&self, v: &Lin<B>, ring: &Ring) -> Lin<B> {
        v.map_coeffs(|c| self.apply(c, &ring.policy))
    }

    pub fn add(&self, o: &Deriv) -> Deriv {
        Deriv { t: self.t.iter().zip(&o.t).map(|(a, b)| a.add(b)).collect(), e: self.e.add(&o.e) }
    }

    pub fn sub(&self, o: &Deriv) -> Deriv {
        self.add(&o.scale(&Scalar::from_int(-1), &Ring::plain().policy))
    }

    pub fn scale(&self, c: &Scalar, p: &Policy) -> Deriv {
        Deriv { t: self.t.iter().map(|a| a.mul(c, p)).collect(), e: self.e.mul(c, p) }
    }

    /// [X, Y] = Σ_j (X(b_j) − Y(a_j)) D_j for X = Σ a_j D_j, Y = Σ b_j D_j.
    pub fn bracket(&self, o: &Deriv, ring: &Ring) -> Deriv {
        let p = &ring.policy;
        Deriv {
            t: self.t.iter().zip(&o.t).map(|(a, b)| self.apply(b, p).sub(&o.apply(a, p))).collect(),
            e: self.apply(&o.e, p).sub(&o.apply(&self.e, p)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.e.is_zero() && self.t.iter().all(Scalar::is_zero)
    }

    /// Degree, if homogeneous: |aᵢ| − |tᵢ| and |b|.
    pub fn degree(&self, ring: &Ring) -> Option<i32> {
        let mut d: Option<i32> = None;
        let mut push = |x: Option<i32>| -> bool {
            match (d, x) {
                (_, None) => false,
                (None, Some(v)) => {
                    d = Some(v);
                    true
                }
                (Some(a), Some(b)) => a == b,
            }
        };
        for (i, a) in self.t.iter().enumerate() {
            if !a.is_zero() && !push(a.degree(ring).map(|x| x - ring.tvars[i].degree)) {
                return None;
            }
        }
        if !self.e.is_zero() && !push(self.e.degree(ring)) {
            return None;
        }
        Some(d.unwrap_or(0))
    }

    pub fn show(&self, ring: &Ring) -> String {
        let mut parts = vec![];
        for (i, a) in self.t.iter().enumerate() {
            if !a.is_zero() {
                parts.push(format!("({})d/d{}", a.to_literal(ring), ring.tvars[i].name));
            }
        }
        if !self.e.is_zero() {
            parts.push(format!("({})e d/de", self.e.to_literal(ring)));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// A direction of R[[z]]: an R-derivation or d/dz.
#[derive(Clone, Debug, PartialEq)]
pub enum Dir {
    R(Deriv),
    Dz,
}

/// A degree-one map c₁ from derivations to L, given on the basic directions.
#[derive(Clone, Debug)]
pub struct C1<B: Label> {
    pub t: Vec<Lin<B>>,
    pub e: Lin<B>,
}

impl<B: Label> C1<B> {
    pub fn apply(&self, x: &Deriv, ring: &Ring) -> Lin<B> {
        let mut out = self.e.scale(&x.e, ring);
        for (a, v) in x.t.iter().zip(&self.t) {
            out.add_scaled(v, a, ring);
        }
        out
    }
}

/// ½|r| r termwise on coefficients, including z.
fn full_degree(c: &Scalar, extra: i32, ring: &Ring) -> Scalar {
    c.map_terms(&ring.policy, |m, x| Some((*m, x * q((ring.mono_degree(m) + extra) as i128))))
}

/// GGM and Euler operators of a CH module M̃ over L twisted by γ.
///
/// All operators are computed in `ring`, the working ring; callers compare in a
/// coarser ring after truncation.
pub struct ChConnection<'a, A: LinfAlgebra, Mo: LinfModule<B = Cl<A::B>>> {
    pub ops: Extracted<Twisted<&'a A>, TwistedModule<&'a Mo>>,
    pub gamma: Lin<A::B>,
    pub c1: Option<C1<A::B>>,
    pub ring: Ring,
}

impl<'a, A: LinfAlgebra, Mo: LinfModule<B = Cl<A::B>>> ChConnection<'a, A, Mo> {
    pub fn new(alg: &'a A, module: &'a Mo, gamma: &Lin<A::B>, c1: Option<C1<A::B>>, ring: &Ring) -> Self {
        let base = Twisted::new(alg, gamma, ring);
        let tm = TwistedModule::new(module, &gamma.relabel(|b| plain(b.clone())), ring);
        ChConnection { ops: Extracted { base, module: tm }, gamma: gamma.clone(), c1, ring: ring.clone() }
    }

    fn z(&self) -> Scalar {
        z_scalar(&self.ring)
    }

    /// ∇_Xγ, or c₁(X) for the variant connection.
    pub fn source(&self, x: &Deriv) -> Lin<A::B> {
        match &self.c1 {
            Some(c) => c.apply(x, &self.ring),
            None => x.apply_lin(&self.gamma, &self.ring),
        }
    }

    pub fn d(&self, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        op_d(&self.ops, v, &self.ring)
    }

    pub fn iota(&self, y: &Lin<A::B>, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        op_iota(&self.ops, y, v, &self.ring)
    }

    pub fn rho(&self, a: &Lin<A::B>, b: &Lin<A::B>, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        op_rho(&self.ops, a, b, v, &self.ring)
    }

    /// z∇^G_X v = zX(v) − I^γ_{∇_Xγ} v.
    pub fn ggm(&self, x: &Deriv, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let mut out = x.apply_lin(v, &self.ring).scale(&self.z(), &self.ring);
        out.add_with_sign(&self.iota(&self.source(x), v), -1);
        out
    }

    /// deg on M̃: coefficient degree (z included) plus the M̃-degree of the label.
    pub fn deg(&self, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let mut out = Lin::zero();
        for (m, c) in v.iter() {
            out.add_term(m.clone(), full_degree(c, self.ops.mdeg(m), &self.ring));
        }
        out
    }

    /// z²∇^E_{d/dz} v = (z/2)deg v − z∇^G_E v.
    pub fn euler_z(&self, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let half_z = self.z().scale(qr(1, 2));
        let mut out = self.deg(v).scale(&half_z, &self.ring);
        out.add_with_sign(&self.ggm(&Deriv::euler(&self.ring), v), -1);
        out
    }

    /// ℓ^γ₁(∇_Xγ).
    pub fn lemma_gamma(&self, x: &Deriv) -> Lin<A::B> {
        ell_on(&self.ops.base, &[self.source(x)], &self.ring)
    }

    /// [∇̃_X, ℓ^{M,γ}₀] v − ℓ^{M,γ}₁(∇_Xγ | v).
    pub fn lemma_module(&self, x: &Deriv, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let r = &self.ring;
        let l0 = |u: &Lin<Mo::M>| act_on(&self.ops.module, &[], u, r);
        let mut out = x.apply_lin(&l0(v), r);
        out.add_with_sign(&l0(&x.apply_lin(v, r)), -1);
        let src = self.source(x).relabel(|b| plain(b.clone()));
        out.add_with_sign(&act_on(&self.ops.module, &[src], v, r), -1);
        out
    }

    /// [d^γ, z∇^G_X] v.
    pub fn ggm_commutator(&self, x: &Deriv, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let mut out = self.d(&self.ggm(x, v));
        out.add_with_sign(&self.ggm(x, &self.d(v)), -1);
        out
    }

    /// [z²∇^E_{d/dz}, d^γ] v − (z/2) d^γ v.
    pub fn euler_commutator(&self, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let dv = self.d(v);
        let mut out = self.euler_z(&dv);
        out.add_with_sign(&self.d(&self.euler_z(v)), -1);
        out.add_scaled(&dv, &self.z().scale(qr(-1, 2)), &self.ring);
        out
    }

    /// z∇^G_X(rv) − z X(r) v − r z∇^G_X v.
    pub fn leibniz(&self, x: &Deriv, r: &Scalar, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let ring = &self.ring;
        let mut out = self.ggm(x, &v.scale(r, ring));
        let xr = x.apply(r, &ring.policy).mul(&self.z(), &ring.policy);
        out.add_scaled(v, &xr.neg(), ring);
        out.add_scaled(&self.ggm(x, v), &r.neg(), ring);
        out
    }

    /// z²∇^E_{d/dz}(rv) − z² (dr/dz) v − r z²∇^E_{d/dz} v.
    pub fn euler_leibniz(&self, r: &Scalar, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let ring = &self.ring;
        let mut out = self.euler_z(&v.scale(r, ring));
        let dr = r.d_z(&ring.policy).shift_z(2, &ring.policy);
        out.add_scaled(v, &dr.neg(), ring);
        out.add_scaled(&self.euler_z(v), &r.neg(), ring);
        out
    }

    /// z²R^{∇G}(X, Y) v from the definition.
    pub fn curvature_direct(&self, x: &Deriv, y: &Deriv, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let mut out = self.ggm(x, &self.ggm(y, v));
        out.add_with_sign(&self.ggm(y, &self.ggm(x, v)), -1);
        let xy = x.bracket(y, &self.ring);
        out.add_scaled(&self.ggm(&xy, v), &self.z().neg(), &self.ring);
        out
    }

    /// Graded commutator [I_a, I_b] v, with |I_y| = |y| + 1.
    fn iota_commutator(&self, a: &Lin<A::B>, b: &Lin<A::B>, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let r = &self.ring;
        let mut out = Lin::zero();
        for (ya, ca) in a.iter() {
            for (yb, cb) in b.iter() {
                let c = ca.mul(cb, &r.policy);
                let (la, lb) = (Lin::basis(ya.clone()), Lin::basis(yb.clone()));
                let mut t = self.iota(&la, &self.iota(&lb, v));
                let s = sign_of(((self.ops.ydeg(ya) + 1) * (self.ops.ydeg(yb) + 1)) as i64);
                t.add_with_sign(&self.iota(&lb, &self.iota(&la, v)), -s);
                out.add_scaled(&t, &c, r);
            }
        }
        out
    }

    /// z²R^{∇G}(X, Y) v from the curvature formula in terms of I^γ and ρ^γ.
    pub fn curvature_formula(&self, x: &Deriv, y: &Deriv, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let r = &self.ring;
        let xy = x.bracket(y, r);
        // R^{∇̃}(X, Y) for the trivial connection
        let mut rt = x.apply_lin(&y.apply_lin(v, r), r);
        rt.add_with_sign(&y.apply_lin(&x.apply_lin(v, r), r), -1);
        rt.add_with_sign(&xy.apply_lin(v, r), -1);
        let mut out = rt.scale(&z_scalar(r).mul(&z_scalar(r), &r.policy), r);
        let (sx, sy) = (self.source(x), self.source(y));
        // R^∇(X, Y)γ
        let mut rg = x.apply_lin(&y.apply_lin(&self.gamma, r), r);
        rg.add_with_sign(&y.apply_lin(&x.apply_lin(&self.gamma, r), r), -1);
        rg.add_with_sign(&xy.apply_lin(&self.gamma, r), -1);
        let mut mid = self.iota(&rg, v);
        mid.add_assign(&self.rho(&sx, &sy, v));
        mid.add_with_sign(&self.rho(&sy, &sx, v), -1);
        out.add_scaled(&mid, &self.z().neg(), r);
        out.add_assign(&self.iota_commutator(&sx, &sy, v));
        out
    }

    /// The ε³ identity [d, 𝓛^γ_{y₁,y₂}] + 𝓛^γ_{δy₁,y₂} + (−1)^{|y₁|}𝓛^γ_{y₁,δy₂}
    /// − (−1)^{|y₁|}[I^γ_{y₁}, I^γ_{y₂}] − z(ρ^γ_{y₁,y₂} + (−1)^{|y₁||y₂|}ρ^γ_{y₂,y₁}),
    /// with 𝓛^γ_{y₁,y₂} = (−1)^{|y₁|+|y₂|}ℓ^{M,γ}₂(εy₁, εy₂ | ·).
    pub fn eps3_identity(&self, y1: &A::B, y2: &A::B, v: &Lin<Mo::M>) -> Lin<Mo::M> {
        let r = &self.ring;
        let p = &self.ops;
        let (d1, d2) = (p.ydeg(y1), p.ydeg(y2));
        let ll = |a: &Lin<A::B>, b: &Lin<A::B>, u: &Lin<Mo::M>| -> Lin<Mo::M> {
            let mut out = Lin::zero();
            for (ya, ca) in a.iter() {
                for (yb, cb) in b.iter() {
                    let s = sign_of((p.ydeg(ya) + p.ydeg(yb)) as i64);
                    let w = [crate::chmod::eps(ya.clone()), crate::chmod::eps(yb.clone())];
                    let val = act_on(&p.module, &[Lin::basis(w[0].clone()), Lin::basis(w[1].clone())], u, r).signed(s);
                    out.add_scaled(&val, &ca.mul(cb, &r.policy), r);
                }
            }
            out
        };
        let (l1, l2) = (Lin::basis(y1.clone()), Lin::basis(y2.clone()));
        let del = |y: &A::B| p.delta(y, r);
        // |𝓛_{y1,y2}| = |y1| + |y2| + 2
        let mut out = self.d(&ll(&l1, &l2, v));
        out.add_with_sign(&ll(&l1, &l2, &self.d(v)), -sign_of((d1 + d2) as i64));
        out.add_assign(&ll(&del(y1), &l2, v));
        out.add_with_sign(&ll(&l1, &del(y2), v), sign_of(d1 as i64));
        out.add_with_sign(&self.iota_commutator(&l1, &l2, v), -sign_of(d1 as i64));
        let mut rr = self.rho(&l1, &l2, v);
        rr.add_with_sign(&self.rho(&l2, &l1, v), sign_of((d1 * d2) as i64));
        out.add_scaled(&rr, &self.z().neg(), r);
        out
    }

    /// Leibniz, the two lemmas and both commutation theorems on the given inputs.
    pub fn chain_report(&self, dirs: &[(String, Deriv)], mlabels: &[Mo::M], samples: &[Scalar], base: &Ring) -> Report {
        let stamp = stamp_of(base);
        let mut l5 = Check::new("lemma-gamma-closed").with_stamp(stamp.clone());
        let mut l6 = Check::new("lemma-module-derivative").with_stamp(stamp.clone());
        let mut p13 = Check::new("ggm-commutes-with-d").with_stamp(stamp.clone());
        let mut p16 = Check::new("euler-commutes-with-d").with_stamp(stamp.clone());
        let mut lb = Check::new("ggm-leibniz").with_stamp(stamp.clone());
        let mut le = Check::new("euler-leibniz").with_stamp(stamp.clone());
        for (name, x) in dirs {
            l5.record(|| name.clone(), &self.lemma_gamma(x).truncate(base));
        }
        for m in mlabels {
            let v = Lin::basis(m.clone());
            p16.record(|| format!("{m:?}"), &self.euler_commutator(&v).truncate(base));
            for s in samples {
                le.record(|| format!("({s}) {m:?}"), &self.euler_leibniz(s, &v).truncate(base));
            }
            for (name, x) in dirs {
                l6.record(|| format!("{name} | {m:?}"), &self.lemma_module(x, &v).truncate(base));
                p13.record(|| format!("{name} | {m:?}"), &self.ggm_commutator(x, &v).truncate(base));
                for s in samples {
                    lb.record(|| format!("{name} ({s}) {m:?}"), &self.leibniz(x, s, &v).truncate(base));
                }
            }
        }
        let mut rep = Report::new();
        for c in [l5, l6, p13, p16, lb, le] {
            rep.push(c);
        }
        rep
    }
}

pub fn stamp_of(ring: &Ring) -> String {
    let p = &ring.policy;
    format!(
        "z_order {}, t_order {}, energy_cut {}, e_window [{}, {}]",
        p.z_order, p.t_order, p.energy_cut, p.e_window.0, p.e_window.1
    )
}

/// Ring with `dt` extra t-orders and `dz` extra z-orders, for derivatives that
/// lower the valid order.
pub fn working_ring(base: &Ring, dt: u32, dz: u32) -> Ring {
    let mut p = base.policy.clone();
    p.t_order += dt;
    p.z_order += dz;
    base.with_policy(p)
}

/// [E, X] − ½|X| X for a homogeneous derivation.
pub fn euler_bracket_residual(x: &Deriv, ring: &Ring) -> Option<Deriv> {
    let d = x.degree(ring)?;
    let e = Deriv::euler(ring);
    Some(e.bracket(x, ring).sub(&x.scale(&Scalar::from_q(qr(d as i128, 2)), &ring.policy)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Policy, TVar};

    fn ring() -> Ring {
        Ring::new(
            Policy { z_order: 3, energy_cut: q(4), t_order: 4, e_window: (-4, 4) },
            vec![TVar { name: "t0".into(), degree: 2 }, TVar { name: "t1".into(), degree: 0 }],
        )
        .unwrap()
    }

    #[test]
    fn euler_acts_by_half_degree() {
        let r = ring();
        let e = Deriv::euler(&r);
        let s = Scalar::parse("t0*t1 + 3*e^2", &r).unwrap();
        assert_eq!(e.apply(&s, &r.policy), s.euler(&r));
    }

    #[test]
    fn brackets() {
        let r = ring();
        let x = Deriv::dt(0, 2);
        let mut y = Deriv::zero(2);
        y.t[1] = Scalar::parse("t0", &r).unwrap();
        let b = x.bracket(&y, &r);
        assert_eq!(b, Deriv::dt(1, 2));
        assert!(x.bracket(&x, &r).is_zero());
        for d in Deriv::basic(&r) {
            assert!(euler_bracket_residual(&d, &r).unwrap().is_zero());
        }
        assert_eq!(Deriv::dt(0, 2).degree(&r), Some(-2));
    }
}
