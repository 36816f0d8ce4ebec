//! CH morphisms against connections: f₀^γ intertwines z∇^G_X and z²∇^E_{d/dz}
//! up to the homotopy F^{ε,γ}, at chain level and on cohomology.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};

use crate::chmod::{eps_count, f_eps, f_plain, f_zero, Cl, Cone, TwistedModMorphism};
use crate::coeff::{Mono, Q, Ring, Scalar};
use crate::colang::{comodule_apply, hat_module, LinfAlgebra, LinfModule, ModMorphism};
use crate::graded::{Label, Lin};
use crate::homol::{bq, FiniteComplex, HomolError, Order, BQ};
use crate::report::Check;

use super::{stamp_of, ChConnection, Deriv};

/// A renamed basis label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ren<M>(pub M);

type F1<'a, Y, M> = dyn Fn(&Y, &M, &Ring) -> Lin<M> + Sync + 'a;

/// An isomorphism f: M̃ → Ñ with f₀(m) = s(m)·Ren(m), f₁(εy|m) = Ren(f1(y, m)),
/// all other components zero. Ñ carries the conjugated structure.
pub struct Renaming<'a, Y: Label, M: Label> {
    pub scale: fn(&M) -> i128,
    pub f1: &'a F1<'a, Y, M>,
}

impl<Y: Label, M: Label> Clone for Renaming<'_, Y, M> {
    fn clone(&self) -> Self {
        Renaming { scale: self.scale, f1: self.f1 }
    }
}

pub struct Forward<'a, Y: Label, M: Label>(pub Renaming<'a, Y, M>);
pub struct Backward<'a, Y: Label, M: Label>(pub Renaming<'a, Y, M>);

impl<Y: Label, M: Label> ModMorphism for Forward<'_, Y, M> {
    type B = Cl<Y>;
    type M = M;
    type N = Ren<M>;
    fn f(&self, ys: &[Cl<Y>], m: &M, ring: &Ring) -> Lin<Ren<M>> {
        match ys {
            [] => Lin::term(Ren(m.clone()), Scalar::from_int((self.0.scale)(m))),
            [y] if y.eps => (self.0.f1)(&y.base, m, ring).relabel(|x| Ren(x.clone())),
            _ => Lin::zero(),
        }
    }
}

impl<Y: Label, M: Label> ModMorphism for Backward<'_, Y, M> {
    type B = Cl<Y>;
    type M = Ren<M>;
    type N = M;
    fn f(&self, ys: &[Cl<Y>], n: &Ren<M>, ring: &Ring) -> Lin<M> {
        let s = |m: &M| Q::new(1, (self.0.scale)(m));
        match ys {
            [] => Lin::term(n.0.clone(), Scalar::from_q(s(&n.0))),
            // g₁ = −g₀ f₁ g₀
            [y] if y.eps => {
                let v = (self.0.f1)(&y.base, &n.0, ring);
                let mut out = Lin::zero();
                for (m, c) in v.iter() {
                    out.add_term(m.clone(), c.scale(-s(&n.0) * s(m)));
                }
                out
            }
            _ => Lin::zero(),
        }
    }
}

/// Ñ with ℓ^Ñ(w|n) = Σ f(u|m) over ℓ̂^M̃(ǧ(w ⊗ n)), on words with at most one ε.
pub struct Conjugated<'a, A: LinfAlgebra, Mo: LinfModule> {
    pub cone: &'a Cone<A>,
    pub module: &'a Mo,
    pub map: Renaming<'a, A::B, <Mo as LinfModule>::M>,
}

impl<'a, A, Mo> LinfModule for Conjugated<'a, A, Mo>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
{
    type B = Cl<A::B>;
    type M = Ren<Mo::M>;
    fn msdeg(&self, n: &Ren<Mo::M>) -> i32 {
        self.module.msdeg(&n.0)
    }
    fn act(&self, ys: &[Cl<A::B>], n: &Ren<Mo::M>, ring: &Ring) -> Lin<Ren<Mo::M>> {
        if eps_count(ys) > 1 {
            return Lin::zero();
        }
        let (fw, bw) = (Forward(self.map.clone()), Backward(self.map.clone()));
        let mut out = Lin::zero();
        for ((u, m), c) in comodule_apply(&bw, |b| self.cone.sdeg(b), ys, n, ring).iter() {
            for ((u2, m2), c2) in hat_module(self.cone, self.module, u, m, ring).iter() {
                out.add_scaled(&fw.f(u2, m2, ring), &c.mul(c2, &ring.policy), ring);
            }
        }
        out
    }
    fn max_arity(&self) -> Option<usize> {
        match (self.cone.max_arity(), self.module.max_arity()) {
            (Some(a), Some(b)) => Some(a.max(b) + 2),
            _ => None,
        }
    }
}

/// f₀^γ and F^{ε,γ}_y extended linearly.
pub struct TwistedPieces<'a, Y, F: ModMorphism> {
    pub f: &'a TwistedModMorphism<F>,
    pub ydeg: &'a (dyn Fn(&Y) -> i32 + Sync),
}

impl<'a, Y: Label, F: ModMorphism<B = Cl<Y>>> TwistedPieces<'a, Y, F> {
    pub fn f0(&self, v: &Lin<F::M>, ring: &Ring) -> Lin<F::N> {
        f_zero(self.f, v, ring)
    }

    pub fn feps(&self, y: &Lin<Y>, v: &Lin<F::M>, ring: &Ring) -> Lin<F::N> {
        let mut out = Lin::zero();
        for (b, c) in y.iter() {
            out.add_scaled(&f_eps(self.f, b, (self.ydeg)(b), v, ring), c, ring);
        }
        out
    }

    pub fn fplain(&self, y: &Lin<Y>, v: &Lin<F::M>, ring: &Ring) -> Lin<F::N> {
        let mut out = Lin::zero();
        for (b, c) in y.iter() {
            out.add_scaled(&f_plain(self.f, b, (self.ydeg)(b), v, ring), c, ring);
        }
        out
    }
}

/// All chain-level compatibility residuals of one morphism.
pub struct Compat<'c, 'a, A, Mo, No, F>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
    No: LinfModule<B = Cl<A::B>>,
    F: ModMorphism<B = Cl<A::B>, M = Mo::M, N = No::M>,
{
    pub src: &'c ChConnection<'a, A, Mo>,
    pub tgt: &'c ChConnection<'a, A, No>,
    pub f: TwistedPieces<'c, A::B, F>,
}

impl<'c, 'a, A, Mo, No, F> Compat<'c, 'a, A, Mo, No, F>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
    No: LinfModule<B = Cl<A::B>>,
    F: ModMorphism<B = Cl<A::B>, M = Mo::M, N = No::M>,
{
    fn ring(&self) -> &Ring {
        &self.src.ring
    }

    /// [z∇^G_X, f₀^γ] alone.
    pub fn raw_commutator(&self, x: &Deriv, v: &Lin<Mo::M>) -> Lin<No::M> {
        let r = self.ring();
        let mut out = self.tgt.ggm(x, &self.f.f0(v, r));
        out.add_with_sign(&self.f.f0(&self.src.ggm(x, v), r), -1);
        out
    }

    /// [z∇^G_X, f₀^γ] + d^γ F^{ε,γ}_{∇_Xγ} + F^{ε,γ}_{∇_Xγ} d^γ, for even X.
    pub fn ggm_residual(&self, x: &Deriv, v: &Lin<Mo::M>) -> Lin<No::M> {
        let r = self.ring();
        let y = self.src.source(x);
        let mut out = self.raw_commutator(x, v);
        out.add_assign(&self.tgt.d(&self.f.feps(&y, v, r)));
        out.add_assign(&self.f.feps(&y, &self.src.d(v), r));
        out
    }

    /// [z²∇^E_{d/dz}, f₀^γ] − (d^γ F^{ε,γ}_{Eγ} + F^{ε,γ}_{Eγ} d^γ).
    pub fn euler_residual(&self, v: &Lin<Mo::M>) -> Lin<No::M> {
        let r = self.ring();
        let y = self.src.source(&Deriv::euler(r));
        let mut out = self.tgt.euler_z(&self.f.f0(v, r));
        out.add_with_sign(&self.f.f0(&self.src.euler_z(v), r), -1);
        out.add_with_sign(&self.tgt.d(&self.f.feps(&y, v, r)), -1);
        out.add_with_sign(&self.f.feps(&y, &self.src.d(v), r), -1);
        out
    }

    /// ∇̃_X f₀^γ − f₀^γ∇̃_X + F^γ_{∇_Xγ}: the morphism preserves the trivial connections.
    pub fn preservation_residual(&self, x: &Deriv, v: &Lin<Mo::M>) -> Lin<No::M> {
        let r = self.ring();
        let mut out = x.apply_lin(&self.f.f0(v, r), r);
        out.add_with_sign(&self.f.f0(&x.apply_lin(v, r), r), -1);
        out.add_assign(&self.f.fplain(&self.src.source(x), v, r));
        out
    }

    /// The three residual checks on the given inputs, compared in `base`.
    pub fn checks(&self, dirs: &[(String, Deriv)], labels: &[Mo::M], base: &Ring) -> Vec<Check> {
        let stamp = stamp_of(base);
        let mut g = Check::new("ggm-intertwining").with_stamp(stamp.clone());
        let mut e = Check::new("euler-intertwining").with_stamp(stamp.clone());
        let mut p = Check::new("connection-preserved").with_stamp(stamp);
        for m in labels {
            let v = Lin::basis(m.clone());
            e.record(|| format!("{m:?}"), &self.euler_residual(&v).truncate(base));
            for (n, x) in dirs {
                g.record(|| format!("{n} | {m:?}"), &self.ggm_residual(x, &v).truncate(base));
                p.record(|| format!("{n} | {m:?}"), &self.preservation_residual(x, &v).truncate(base));
            }
        }
        vec![g, e, p]
    }
}

// ---- cohomology ----

pub type Cell<M> = (M, Mono);

pub fn expand<M: Label>(v: &Lin<M>) -> Vec<(Cell<M>, Q)> {
    let mut out = vec![];
    for (m, c) in v.iter() {
        for (mono, x) in c.terms() {
            out.push(((m.clone(), *mono), *x));
        }
    }
    out
}

pub fn collapse<M: Label>(cells: &[Cell<M>], v: &[BQ]) -> Option<Lin<M>> {
    let mut out = Lin::zero();
    for ((m, mono), x) in cells.iter().zip(v) {
        if x.is_zero() {
            continue;
        }
        let q = Q::new(x.numer().to_i128()?, x.denom().to_i128()?);
        out.add_term(m.clone(), Scalar::term(q, *mono));
    }
    Some(out)
}

/// The complex of cells m·mono over Q with differential `d`, graded by M̃-degree
/// plus coefficient degree. `cells` must span a d-closed subspace.
pub fn expanded_complex<M: Label>(
    cells: Vec<Cell<M>>,
    deg: impl Fn(&Cell<M>) -> i32,
    d: impl Fn(&Lin<M>) -> Lin<M>,
    stamp: String,
) -> Result<FiniteComplex<Cell<M>>, HomolError> {
    let mut by: BTreeMap<i32, Vec<Cell<M>>> = BTreeMap::new();
    for c in cells {
        by.entry(deg(&c)).or_default().push(c);
    }
    FiniteComplex::from_operator(by, stamp, |(m, mono)| Ok(expand(&d(&Lin::term(m.clone(), Scalar::term(Q::from_integer(1), *mono))))))
}

fn vector<M: Label>(cx: &FiniteComplex<Cell<M>>, n: i32, v: &Lin<M>) -> Option<Vec<BQ>> {
    let mut out = vec![BQ::zero(); cx.dim(n)];
    for (c, x) in expand(v) {
        out[cx.index_of(n, &c)?] += bq(x);
    }
    Some(out)
}

/// On every cohomology class of `src` in the listed degrees: the classes of
/// a(r) and b(r) agree in degree n + shift, and do not move when r is
/// perturbed by a boundary.
pub fn intertwines_on_cohomology<M: Label, N: Label>(
    src: &FiniteComplex<Cell<M>>,
    tgt: &FiniteComplex<Cell<N>>,
    shift: i32,
    a: impl Fn(&Lin<M>) -> Lin<N>,
    b: impl Fn(&Lin<M>) -> Lin<N>,
) -> Check {
    let mut chk = Check::new("cohomology-intertwining").with_stamp(src.stamp.clone());
    for (&n, cells) in &src.cells {
        let Ok(h) = src.cohomology(n, Order::Forward) else {
            chk.fail(format!("H^{n}"), "not a complex".into());
            continue;
        };
        let Ok(ht) = tgt.cohomology(n + shift, Order::Forward) else {
            chk.fail(format!("H^{}", n + shift), "not a complex".into());
            continue;
        };
        let prev = src.cells.get(&(n - 1)).cloned().unwrap_or_default();
        for (k, r) in h.reps.iter().enumerate() {
            let mut variants = vec![r.clone()];
            for j in 0..prev.len().min(2) {
                let mut u = vec![BQ::zero(); prev.len()];
                u[j] = bq(Q::from_integer(j as i128 + 1));
                let bd = src.boundary(n, &u);
                variants.push(r.iter().zip(&bd).map(|(x, y)| x + y).collect());
            }
            let mut base_class: Option<Vec<BQ>> = None;
            for (vi, rv) in variants.iter().enumerate() {
                let Some(lr) = collapse(cells, rv) else {
                    chk.fail(format!("H^{n} rep {k}"), "coefficient overflow".into());
                    continue;
                };
                let cls = |w: Lin<N>| vector(tgt, n + shift, &w).and_then(|v| tgt.class_of(n + shift, &ht.reps, &v).ok());
                match (cls(a(&lr)), cls(b(&lr))) {
                    (Some(ca), Some(cb)) => {
                        chk.record_bool(|| format!("H^{n} rep {k} variant {vi}"), ca == cb, || format!("{ca:?} vs {cb:?}"));
                        match &base_class {
                            None => base_class = Some(ca),
                            Some(c0) => chk.record_bool(|| format!("H^{n} rep {k} perturbed {vi}"), *c0 == ca, || format!("{c0:?} vs {ca:?}")),
                        }
                    }
                    _ => chk.fail(format!("H^{n} rep {k} variant {vi}"), "image is not a cycle in the target cells".into()),
                }
            }
        }
    }
    chk
}
