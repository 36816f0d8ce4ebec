//! Cone algebras, CH modules and morphisms, operator extraction, Maurer–Cartan twisting.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coeff::{inv_factorial, qr, Mono, Norm, Ring, Scalar};
use crate::colang::{
    check_module_filtered, check_module_morphism_filtered, sym_words, Dgla, DglaLinf, LinfAlgebra, LinfModule,
    LinfMorphism, ModMorphism, TableDgla, TableMorphism,
};
use crate::graded::{sign_of, Label, Lin};
use crate::report::{Check, Report};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChError {
    #[error("shape violation: {0}")]
    Shape(String),
    #[error("relation {0} fails at {1}")]
    Relation(String, String),
    #[error("Maurer-Cartan element has norm {0}, not below 1")]
    NormTooLarge(String),
    #[error("Maurer-Cartan residual is nonzero: {0}")]
    NotMc(String),
    #[error("γ is not of degree 1: {0}")]
    Degree(String),
}

/// Label of L̃[1] = L[1][[z]] ⊕ εL[1][[z]].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cl<B> {
    pub eps: bool,
    pub base: B,
}

pub fn plain<B>(base: B) -> Cl<B> {
    Cl { eps: false, base }
}

pub fn eps<B>(base: B) -> Cl<B> {
    Cl { eps: true, base }
}

pub fn eps_count<B>(w: &[Cl<B>]) -> usize {
    w.iter().filter(|c| c.eps).count()
}

/// Both kinds of label for each base label.
pub fn cone_labels<B: Clone>(labels: &[B]) -> Vec<Cl<B>> {
    labels.iter().cloned().map(plain).chain(labels.iter().cloned().map(eps)).collect()
}

pub fn z_scalar(ring: &Ring) -> Scalar {
    Scalar::one().shift_z(1, &ring.policy)
}

/// The cone L̃ with ℓ̃_k on mixed words.
#[derive(Clone, Debug)]
pub struct Cone<A>(pub A);

impl<A: LinfAlgebra> LinfAlgebra for Cone<A> {
    type B = Cl<A::B>;
    fn sdeg(&self, b: &Cl<A::B>) -> i32 {
        self.0.sdeg(&b.base) + b.eps as i32
    }
    fn ell(&self, ys: &[Cl<A::B>], ring: &Ring) -> Lin<Cl<A::B>> {
        let bases: Vec<A::B> = ys.iter().map(|c| c.base.clone()).collect();
        let pos: Vec<usize> = (0..ys.len()).filter(|&i| ys[i].eps).collect();
        match pos.as_slice() {
            [] => self.0.ell(&bases, ring).relabel(|b| plain(b.clone())),
            [i] => {
                // −ε (−1)^{|y_1|'+…+|y_{i-1}|'} ℓ_k(…, y_i', …)
                let before: i64 = bases[..*i].iter().map(|b| self.0.sdeg(b) as i64).sum();
                let mut out = self.0.ell(&bases, ring).relabel(|b| eps(b.clone())).signed(-sign_of(before));
                if ys.len() == 1 {
                    out.add_term(plain(bases[0].clone()), z_scalar(ring));
                }
                out
            }
            _ => Lin::zero(),
        }
    }
    fn max_arity(&self) -> Option<usize> {
        self.0.max_arity()
    }
}

/// f̃: f_k on ε-free words, ε(−1)^{#} f_k on words with one ε.
#[derive(Clone, Debug)]
pub struct Lifted<F>(pub F);

impl<F: LinfMorphism> LinfMorphism for Lifted<F> {
    type S = Cl<F::S>;
    type T = Cl<F::T>;
    fn src_sdeg(&self, s: &Cl<F::S>) -> i32 {
        self.0.src_sdeg(&s.base) + s.eps as i32
    }
    fn tgt_sdeg(&self, t: &Cl<F::T>) -> i32 {
        self.0.tgt_sdeg(&t.base) + t.eps as i32
    }
    fn f(&self, xs: &[Cl<F::S>], ring: &Ring) -> Lin<Cl<F::T>> {
        let bases: Vec<F::S> = xs.iter().map(|c| c.base.clone()).collect();
        let pos: Vec<usize> = (0..xs.len()).filter(|&i| xs[i].eps).collect();
        match pos.as_slice() {
            [] => self.0.f(&bases, ring).relabel(|b| plain(b.clone())),
            [i] => {
                let before: i64 = bases[..*i].iter().map(|b| self.0.src_sdeg(b) as i64).sum();
                self.0.f(&bases, ring).relabel(|b| eps(b.clone())).signed(sign_of(before))
            }
            _ => Lin::zero(),
        }
    }
}

/// L∞ module over L̃ mod εⁿ: counit criterion on words with at most n−1 ε's.
pub fn check_mod_epsilon<A, Mo>(
    cone: &Cone<A>,
    module: &Mo,
    base_labels: &[A::B],
    mlabels: &[Mo::M],
    n: usize,
    word_bound: usize,
    ring: &Ring,
) -> Check
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
{
    let labels = cone_labels(base_labels);
    let name = format!("mod-eps-{n}");
    if n == 0 {
        return Check::new(name);
    }
    check_module_filtered(&name, cone, module, &labels, mlabels, word_bound, |w| eps_count(w) < n, ring)
}

// ---- DGLA packages ----

/// The data (δ, [·,·], d, 𝓛, I, ρ). Degrees are L- and M̃-degrees.
pub trait ChPackage: Sync {
    type Y: Label;
    type M: Label;
    fn ydeg(&self, y: &Self::Y) -> i32;
    fn mdeg(&self, m: &Self::M) -> i32;
    fn delta(&self, y: &Self::Y, ring: &Ring) -> Lin<Self::Y>;
    fn bracket(&self, a: &Self::Y, b: &Self::Y, ring: &Ring) -> Lin<Self::Y>;
    fn d(&self, m: &Self::M, ring: &Ring) -> Lin<Self::M>;
    fn lie(&self, y: &Self::Y, m: &Self::M, ring: &Ring) -> Lin<Self::M>;
    fn iota(&self, y: &Self::Y, m: &Self::M, ring: &Ring) -> Lin<Self::M>;
    fn rho(&self, a: &Self::Y, b: &Self::Y, m: &Self::M, ring: &Ring) -> Lin<Self::M>;
}

impl<P: ChPackage + ?Sized> ChPackage for &P {
    type Y = P::Y;
    type M = P::M;
    fn ydeg(&self, y: &P::Y) -> i32 {
        (**self).ydeg(y)
    }
    fn mdeg(&self, m: &P::M) -> i32 {
        (**self).mdeg(m)
    }
    fn delta(&self, y: &P::Y, ring: &Ring) -> Lin<P::Y> {
        (**self).delta(y, ring)
    }
    fn bracket(&self, a: &P::Y, b: &P::Y, ring: &Ring) -> Lin<P::Y> {
        (**self).bracket(a, b, ring)
    }
    fn d(&self, m: &P::M, ring: &Ring) -> Lin<P::M> {
        (**self).d(m, ring)
    }
    fn lie(&self, y: &P::Y, m: &P::M, ring: &Ring) -> Lin<P::M> {
        (**self).lie(y, m, ring)
    }
    fn iota(&self, y: &P::Y, m: &P::M, ring: &Ring) -> Lin<P::M> {
        (**self).iota(y, m, ring)
    }
    fn rho(&self, a: &P::Y, b: &P::Y, m: &P::M, ring: &Ring) -> Lin<P::M> {
        (**self).rho(a, b, m, ring)
    }
}

/// The DGLA part of a package.
#[derive(Clone, Debug)]
pub struct PackageDgla<P>(pub P);

impl<P: ChPackage> Dgla for PackageDgla<P> {
    type Y = P::Y;
    fn deg(&self, y: &P::Y) -> i32 {
        self.0.ydeg(y)
    }
    fn delta(&self, y: &P::Y, ring: &Ring) -> Lin<P::Y> {
        self.0.delta(y, ring)
    }
    fn bracket(&self, a: &P::Y, b: &P::Y, ring: &Ring) -> Lin<P::Y> {
        self.0.bracket(a, b, ring)
    }
}

/// Module maps over L̃ assembled from a package:
/// ℓ₀ = −d, ℓ₁(y|·) = (−1)^{|y|}𝓛_y, ℓ₁(εy|·) = (−1)^{|y|+1}I_y,
/// ℓ₂(y₁,εy₂|·) = (−1)^{|y₁|+|y₂|}ρ_{y₁,y₂}, everything else 0.
#[derive(Clone, Debug)]
pub struct PackageModule<P>(pub P);

impl<P: ChPackage> LinfModule for PackageModule<P> {
    type B = Cl<P::Y>;
    type M = P::M;
    fn msdeg(&self, m: &P::M) -> i32 {
        self.0.mdeg(m) - 1
    }
    fn act(&self, ys: &[Cl<P::Y>], m: &P::M, ring: &Ring) -> Lin<P::M> {
        let p = &self.0;
        match ys {
            [] => p.d(m, ring).neg(),
            [y] if !y.eps => p.lie(&y.base, m, ring).signed(sign_of(p.ydeg(&y.base) as i64)),
            [y] => p.iota(&y.base, m, ring).signed(sign_of(p.ydeg(&y.base) as i64 + 1)),
            [a, b] if !a.eps && b.eps => {
                let s = sign_of((p.ydeg(&a.base) + p.ydeg(&b.base)) as i64);
                p.rho(&a.base, &b.base, m, ring).signed(s)
            }
            [a, b] if a.eps && !b.eps => {
                // Koszul symmetry of ℓ₂ in L̃[1]
                let da = p.ydeg(&a.base);
                let db = p.ydeg(&b.base) - 1;
                let s = sign_of((p.ydeg(&b.base) + p.ydeg(&a.base)) as i64) * sign_of((da * db) as i64);
                p.rho(&b.base, &a.base, m, ring).signed(s)
            }
            _ => Lin::zero(),
        }
    }
    fn max_arity(&self) -> Option<usize> {
        Some(2)
    }
}

/// The cone algebra of a package's DGLA.
pub fn package_cone<P: ChPackage + Clone>(p: &P) -> Cone<DglaLinf<PackageDgla<P>>> {
    Cone(DglaLinf(PackageDgla(p.clone())))
}

/// Operators read back from a CH module: the inverse of [`PackageModule`].
pub struct Extracted<A, Mo> {
    pub base: A,
    pub module: Mo,
}

impl<A, Mo> ChPackage for Extracted<A, Mo>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
{
    type Y = A::B;
    type M = Mo::M;
    fn ydeg(&self, y: &A::B) -> i32 {
        self.base.sdeg(y) + 1
    }
    fn mdeg(&self, m: &Mo::M) -> i32 {
        self.module.msdeg(m) + 1
    }
    fn delta(&self, y: &A::B, ring: &Ring) -> Lin<A::B> {
        self.base.ell(std::slice::from_ref(y), ring).neg()
    }
    fn bracket(&self, a: &A::B, b: &A::B, ring: &Ring) -> Lin<A::B> {
        self.base.ell(&[a.clone(), b.clone()], ring).signed(sign_of(self.ydeg(a) as i64))
    }
    fn d(&self, m: &Mo::M, ring: &Ring) -> Lin<Mo::M> {
        self.module.act(&[], m, ring).neg()
    }
    fn lie(&self, y: &A::B, m: &Mo::M, ring: &Ring) -> Lin<Mo::M> {
        self.module.act(&[plain(y.clone())], m, ring).signed(sign_of(self.ydeg(y) as i64))
    }
    fn iota(&self, y: &A::B, m: &Mo::M, ring: &Ring) -> Lin<Mo::M> {
        self.module.act(&[eps(y.clone())], m, ring).signed(sign_of(self.ydeg(y) as i64 + 1))
    }
    fn rho(&self, a: &A::B, b: &A::B, m: &Mo::M, ring: &Ring) -> Lin<Mo::M> {
        let s = sign_of((self.ydeg(a) + self.ydeg(b)) as i64);
        self.module.act(&[plain(a.clone()), eps(b.clone())], m, ring).signed(s)
    }
}

/// Shape conditions under which (d, 𝓛, I, ρ) determine the structure.
pub fn check_shape<A, Mo>(base: &A, module: &Mo, labels: &[A::B], mlabels: &[Mo::M], word_bound: usize, ring: &Ring) -> Check
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
{
    let mut c = Check::new("ch-shape").with_stamp(format!("word_bound {word_bound}"));
    for w in sym_words(labels, |b| base.sdeg(b), 3, word_bound.max(3)) {
        let v = base.ell(&w, ring);
        c.record(|| format!("l_{} {w:?}", w.len()), &v);
    }
    let cl = cone_labels(labels);
    let cdeg = |b: &Cl<A::B>| base.sdeg(&b.base) + b.eps as i32;
    for w in sym_words(&cl, cdeg, 2, word_bound.max(3)) {
        if w.len() == 2 && eps_count(&w) != 0 {
            continue;
        }
        for m in mlabels {
            let v = module.act(&w, m, ring);
            c.record(|| format!("lM_{} {w:?} | {m:?}", w.len()), &v);
        }
    }
    c
}

pub fn extract_operators<A, Mo>(
    base: A,
    module: Mo,
    labels: &[A::B],
    mlabels: &[Mo::M],
    word_bound: usize,
    ring: &Ring,
) -> Result<Extracted<A, Mo>, ChError>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
{
    let c = check_shape(&base, &module, labels, mlabels, word_bound, ring);
    if let Some(f) = c.first_failure() {
        return Err(ChError::Shape(f.witness.clone()));
    }
    Ok(Extracted { base, module })
}

// Operator helpers on packages, extended linearly.

pub fn op_d<P: ChPackage>(p: &P, x: &Lin<P::M>, ring: &Ring) -> Lin<P::M> {
    x.map_linear(ring, |m| p.d(m, ring))
}

pub fn op_lie<P: ChPackage>(p: &P, y: &Lin<P::Y>, x: &Lin<P::M>, ring: &Ring) -> Lin<P::M> {
    let mut out = Lin::zero();
    for (b, c) in y.iter() {
        out.add_scaled(&x.map_linear(ring, |m| p.lie(b, m, ring)), c, ring);
    }
    out
}

pub fn op_iota<P: ChPackage>(p: &P, y: &Lin<P::Y>, x: &Lin<P::M>, ring: &Ring) -> Lin<P::M> {
    let mut out = Lin::zero();
    for (b, c) in y.iter() {
        out.add_scaled(&x.map_linear(ring, |m| p.iota(b, m, ring)), c, ring);
    }
    out
}

pub fn op_rho<P: ChPackage>(p: &P, a: &Lin<P::Y>, b: &Lin<P::Y>, x: &Lin<P::M>, ring: &Ring) -> Lin<P::M> {
    let mut out = Lin::zero();
    for (ya, ca) in a.iter() {
        for (yb, cb) in b.iter() {
            let c = ca.mul(cb, &ring.policy);
            out.add_scaled(&x.map_linear(ring, |m| p.rho(ya, yb, m, ring)), &c, ring);
        }
    }
    out
}

fn y_delta<P: ChPackage>(p: &P, y: &P::Y, ring: &Ring) -> Lin<P::Y> {
    p.delta(y, ring)
}

pub fn y_bracket<P: ChPackage>(p: &P, a: &Lin<P::Y>, b: &Lin<P::Y>, ring: &Ring) -> Lin<P::Y> {
    crate::graded::expand_multilinear(&[a.clone(), b.clone()], ring, |xs| p.bracket(&xs[0], &xs[1], ring))
}

/// The three operator relations among d, I, 𝓛 and ρ plus the DGLA-module relations, on basis inputs.
pub fn check_ch_relations<P: ChPackage>(p: &P, ylabels: &[P::Y], mlabels: &[P::M], ring: &Ring) -> Report {
    let mut dd = Check::new("d-squared");
    let mut dl = Check::new("d-lie");
    let mut ll = Check::new("lie-bracket");
    let mut r4 = Check::new("d-iota-relation");
    let mut r5 = Check::new("iota-rho-relation");
    let mut r6 = Check::new("rho-bracket-relation");
    let basis = |y: &P::Y| Lin::basis(y.clone());
    for m in mlabels {
        let x = Lin::basis(m.clone());
        let dx = op_d(p, &x, ring);
        dd.record(|| format!("{m:?}"), &op_d(p, &dx, ring));
        for y in ylabels {
            let ly = basis(y);
            let dy = p.ydeg(y);
            let del_y = y_delta(p, y, ring);
            // [d, 𝓛_y] − 𝓛_{δy}
            let mut r = op_d(p, &op_lie(p, &ly, &x, ring), ring);
            r.add_with_sign(&op_lie(p, &ly, &dx, ring), -sign_of(dy as i64));
            r.add_with_sign(&op_lie(p, &del_y, &x, ring), -1);
            dl.record(|| format!("{y:?} | {m:?}"), &r);
            // [d, I_y] + I_{δy} + z𝓛_y
            let mut r = op_d(p, &op_iota(p, &ly, &x, ring), ring);
            r.add_with_sign(&op_iota(p, &ly, &dx, ring), sign_of(dy as i64));
            r.add_assign(&op_iota(p, &del_y, &x, ring));
            r.add_scaled(&op_lie(p, &ly, &x, ring), &z_scalar(ring), ring);
            r4.record(|| format!("{y:?} | {m:?}"), &r);
            for y2 in ylabels {
                let l2 = basis(y2);
                let d2 = p.ydeg(y2);
                let br = y_bracket(p, &ly, &l2, ring);
                // 𝓛_{[y,y2]} − [𝓛_y, 𝓛_{y2}]
                let mut r = op_lie(p, &br, &x, ring);
                r.add_with_sign(&op_lie(p, &ly, &op_lie(p, &l2, &x, ring), ring), -1);
                r.add_with_sign(&op_lie(p, &l2, &op_lie(p, &ly, &x, ring), ring), sign_of((dy * d2) as i64));
                ll.record(|| format!("{y:?},{y2:?} | {m:?}"), &r);
                // I_{[y1,y2]} − (−1)^{|y1|}[𝓛_{y1}, I_{y2}] + [d, ρ_{y1,y2}] − ρ_{δy1,y2} − (−1)^{|y1|}ρ_{y1,δy2}
                let s1 = sign_of(dy as i64);
                let mut r = op_iota(p, &br, &x, ring);
                let comm_li = {
                    let mut c = op_lie(p, &ly, &op_iota(p, &l2, &x, ring), ring);
                    c.add_with_sign(&op_iota(p, &l2, &op_lie(p, &ly, &x, ring), ring), -sign_of((dy * (d2 + 1)) as i64));
                    c
                };
                r.add_with_sign(&comm_li, -s1);
                let rho_x = op_rho(p, &ly, &l2, &x, ring);
                r.add_assign(&op_d(p, &rho_x, ring));
                r.add_with_sign(&op_rho(p, &ly, &l2, &dx, ring), -sign_of((dy + d2) as i64));
                r.add_with_sign(&op_rho(p, &del_y, &l2, &x, ring), -1);
                r.add_with_sign(&op_rho(p, &ly, &y_delta(p, y2, ring), &x, ring), -s1);
                r5.record(|| format!("{y:?},{y2:?} | {m:?}"), &r);
                for y3 in ylabels {
                    let l3 = basis(y3);
                    let d3 = p.ydeg(y3);
                    let e12 = sign_of((dy * d2) as i64);
                    let comm = |a: &Lin<P::Y>, da: i32, b: &Lin<P::Y>, c: &Lin<P::Y>, dbc: i32| {
                        let mut v = op_lie(p, a, &op_rho(p, b, c, &x, ring), ring);
                        v.add_with_sign(&op_rho(p, b, c, &op_lie(p, a, &x, ring), ring), -sign_of((da * dbc) as i64));
                        v
                    };
                    let mut r = op_rho(p, &br, &l3, &x, ring);
                    r.add_with_sign(&op_rho(p, &ly, &y_bracket(p, &l2, &l3, ring), &x, ring), -1);
                    r.add_with_sign(&op_rho(p, &l2, &y_bracket(p, &ly, &l3, ring), &x, ring), e12);
                    r.add_with_sign(&comm(&ly, dy, &l2, &l3, d2 + d3), -1);
                    r.add_with_sign(&comm(&l2, d2, &ly, &l3, dy + d3), e12);
                    r6.record(|| format!("{y:?},{y2:?},{y3:?} | {m:?}"), &r);
                }
            }
        }
    }
    let mut rep = Report::new();
    for c in [dd, dl, ll, r4, r5, r6] {
        rep.push(c);
    }
    rep
}

/// Packages whose relations hold become CH modules.
pub fn assemble_from_dgla<P: ChPackage + Clone>(
    p: P,
    ylabels: &[P::Y],
    mlabels: &[P::M],
    ring: &Ring,
) -> Result<PackageModule<P>, ChError> {
    let rep = check_ch_relations(&p, ylabels, mlabels, ring);
    for c in &rep.checks {
        if let Some(f) = c.first_failure() {
            return Err(ChError::Relation(c.name.clone(), f.witness.clone()));
        }
    }
    Ok(PackageModule(p))
}

// ---- CH morphisms ----

pub fn check_ch_morphism<A, Mo, No, F>(
    cone: &Cone<A>,
    mm: &Mo,
    nn: &No,
    f: &F,
    base_labels: &[A::B],
    mlabels: &[Mo::M],
    word_bound: usize,
    ring: &Ring,
) -> Check
where
    A: LinfAlgebra,
    Mo: LinfModule<B = Cl<A::B>>,
    No: LinfModule<B = Cl<A::B>>,
    F: ModMorphism<B = Cl<A::B>, M = Mo::M, N = No::M>,
{
    let labels = cone_labels(base_labels);
    check_module_morphism_filtered("ch-morphism", cone, mm, nn, f, &labels, mlabels, word_bound, |w| eps_count(w) <= 1, ring)
}

/// F and F^ε of a CH morphism.
pub fn f_plain<Y: Label, M: Label, N: Label, F: ModMorphism<B = Cl<Y>, M = M, N = N>>(
    f: &F,
    y: &Y,
    ydeg: i32,
    x: &Lin<M>,
    ring: &Ring,
) -> Lin<N> {
    x.map_linear(ring, |m| f.f(&[plain(y.clone())], m, ring)).signed(sign_of(ydeg as i64))
}

pub fn f_eps<Y: Label, M: Label, N: Label, F: ModMorphism<B = Cl<Y>, M = M, N = N>>(
    f: &F,
    y: &Y,
    ydeg: i32,
    x: &Lin<M>,
    ring: &Ring,
) -> Lin<N> {
    x.map_linear(ring, |m| f.f(&[eps(y.clone())], m, ring)).signed(sign_of(ydeg as i64 + 1))
}

pub fn f_zero<Y: Label, M: Label, N: Label, F: ModMorphism<B = Cl<Y>, M = M, N = N>>(f: &F, x: &Lin<M>, ring: &Ring) -> Lin<N> {
    x.map_linear(ring, |m| f.f(&[], m, ring))
}

/// (chmo): I_y f₀ − f₀ I_y = dF^ε_y − (−1)^{|y|}F^ε_y d − F^ε_{δy} − zF_y, and f₀ d = d f₀.
pub fn check_chmo<P, Q2, F>(pm: &P, pn: &Q2, f: &F, ylabels: &[P::Y], mlabels: &[P::M], ring: &Ring) -> Report
where
    P: ChPackage,
    Q2: ChPackage<Y = P::Y>,
    F: ModMorphism<B = Cl<P::Y>, M = P::M, N = Q2::M>,
{
    let mut chain = Check::new("f0-chain-map");
    let mut chmo = Check::new("chmo");
    for m in mlabels {
        let x = Lin::basis(m.clone());
        let mut r = op_d(pn, &f_zero(f, &x, ring), ring);
        r.add_with_sign(&f_zero(f, &op_d(pm, &x, ring), ring), -1);
        chain.record(|| format!("{m:?}"), &r);
        for y in ylabels {
            let dy = pm.ydeg(y);
            let ly = Lin::basis(y.clone());
            let fe = |v: &Lin<P::M>| f_eps(f, y, dy, v, ring);
            let mut r = op_iota(pn, &ly, &f_zero(f, &x, ring), ring);
            r.add_with_sign(&f_zero(f, &op_iota(pm, &ly, &x, ring), ring), -1);
            r.add_with_sign(&op_d(pn, &fe(&x), ring), -1);
            r.add_with_sign(&fe(&op_d(pm, &x, ring)), sign_of(dy as i64));
            for (yy, c) in pm.delta(y, ring).iter() {
                let v = f_eps(f, yy, pm.ydeg(yy), &x, ring);
                r.add_scaled(&v, c, ring);
            }
            r.add_scaled(&f_plain(f, y, dy, &x, ring), &z_scalar(ring), ring);
            chmo.record(|| format!("{y:?} | {m:?}"), &r);
        }
    }
    let mut rep = Report::new();
    rep.push(chain);
    rep.push(chmo);
    rep
}

/// Identity CH morphism: f₀ = id.
#[derive(Clone, Debug)]
pub struct IdentityMorphism<Y, M>(std::marker::PhantomData<(Y, M)>);

impl<Y, M> Default for IdentityMorphism<Y, M> {
    fn default() -> Self {
        IdentityMorphism(std::marker::PhantomData)
    }
}

impl<Y: Label, M: Label> ModMorphism for IdentityMorphism<Y, M> {
    type B = Y;
    type M = M;
    type N = M;
    fn f(&self, ys: &[Y], m: &M, _ring: &Ring) -> Lin<M> {
        if ys.is_empty() {
            Lin::basis(m.clone())
        } else {
            Lin::zero()
        }
    }
}

// ---- Maurer–Cartan elements and twisting ----

/// Weighted γ-multisets: level i holds (labels, Π c^μ/μ!) over multisets of size i.
pub fn gamma_levels<B: Label>(gamma: &Lin<B>, max_level: usize, ring: &Ring) -> Vec<Vec<(Vec<B>, Scalar)>> {
    let support: Vec<(B, Scalar)> = gamma.iter().map(|(b, c)| (b.clone(), c.clone())).collect();
    let mut levels: Vec<Vec<(Vec<B>, Scalar)>> = vec![vec![(vec![], Scalar::one())]];
    // powers[j][μ] = c_j^μ / μ!
    let mut powers: Vec<Vec<Scalar>> = vec![];
    for (_, c) in &support {
        let mut ps = vec![Scalar::one()];
        for mu in 1..=max_level {
            let prev: &Scalar = &ps[mu - 1];
            let next = prev.mul(c, &ring.policy).scale(qr(1, mu as i128));
            ps.push(next);
        }
        powers.push(ps);
    }
    for i in 1..=max_level {
        let mut lvl = vec![];
        let mut counts = vec![0usize; support.len()];
        fn rec<B: Label>(
            j: usize,
            left: usize,
            counts: &mut Vec<usize>,
            support: &[(B, Scalar)],
            powers: &[Vec<Scalar>],
            ring: &Ring,
            out: &mut Vec<(Vec<B>, Scalar)>,
        ) {
            if j == support.len() {
                if left > 0 {
                    return;
                }
                let mut w = Scalar::one();
                let mut labels = vec![];
                for (k, &mu) in counts.iter().enumerate() {
                    if mu > 0 {
                        w = w.mul(&powers[k][mu], &ring.policy);
                        labels.extend(std::iter::repeat(support[k].0.clone()).take(mu));
                    }
                }
                if !w.is_zero() {
                    out.push((labels, w));
                }
                return;
            }
            for mu in 0..=left {
                if powers[j][mu].is_zero() {
                    break;
                }
                counts[j] = mu;
                rec(j + 1, left - mu, counts, support, powers, ring, out);
            }
            counts[j] = 0;
        }
        rec(0, i, &mut counts, &support, &powers, ring, &mut lvl);
        if lvl.is_empty() {
            break;
        }
        levels.push(lvl);
    }
    levels
}

/// Depth limit for twisting series of unbounded arity; gapped or t-adic γ
/// terminates before it through truncation.
fn level_cap(arity: Option<usize>, ring: &Ring) -> usize {
    arity.unwrap_or(0).max(ring.policy.t_order as usize + 8).min(24)
}

/// Σ_{k≥1} ℓ_k(γ,…,γ)/k!.
pub fn mc_residual<A: LinfAlgebra>(a: &A, gamma: &Lin<A::B>, ring: &Ring) -> Lin<A::B> {
    let cap = a.max_arity().unwrap_or_else(|| level_cap(None, ring));
    let mut out = Lin::zero();
    for lvl in gamma_levels(gamma, cap, ring).iter().skip(1) {
        for (w, c) in lvl {
            out.add_scaled(&a.ell(w, ring), c, ring);
        }
    }
    out
}

pub fn element_norm<B: Label>(x: &Lin<B>, ring: &Ring) -> Norm {
    let mut n = Norm::Zero;
    for (_, c) in x.iter() {
        n = n.max_with(c.norm_with(ring), Some(ring.norm_c));
    }
    n
}

#[derive(Clone, Debug)]
pub struct McElement<B: Label> {
    pub gamma: Lin<B>,
    pub norm: Norm,
}

pub fn mc_check<A: LinfAlgebra>(a: &A, gamma: &Lin<A::B>, ring: &Ring) -> Result<McElement<A::B>, ChError> {
    // total degree: label degree plus coefficient degree, termwise
    for (b, c) in gamma.iter() {
        if c.terms().iter().any(|(m, _)| a.sdeg(b) + ring.mono_degree(m) != 0) {
            return Err(ChError::Degree(format!("{b:?}")));
        }
    }
    let norm = element_norm(gamma, ring);
    if !norm.less_than_one(ring.norm_c) {
        return Err(ChError::NormTooLarge(norm.describe()));
    }
    let r = mc_residual(a, gamma, ring);
    if !r.is_zero() {
        return Err(ChError::NotMc(format!("{r:?}")));
    }
    Ok(McElement { gamma: gamma.clone(), norm })
}

/// L^γ: ℓ^γ_k(y) = Σ_i ℓ_{k+i}(γ^i, y)/i!.
pub struct Twisted<A: LinfAlgebra> {
    pub inner: A,
    levels: Vec<Vec<(Vec<A::B>, Scalar)>>,
}

impl<A: LinfAlgebra> Twisted<A> {
    pub fn new(inner: A, gamma: &Lin<A::B>, ring: &Ring) -> Twisted<A> {
        let cap = inner.max_arity().unwrap_or_else(|| level_cap(None, ring));
        let levels = gamma_levels(gamma, cap, ring);
        Twisted { inner, levels }
    }
}

impl<A: LinfAlgebra> LinfAlgebra for Twisted<A> {
    type B = A::B;
    fn sdeg(&self, b: &A::B) -> i32 {
        self.inner.sdeg(b)
    }
    fn ell(&self, ys: &[A::B], ring: &Ring) -> Lin<A::B> {
        let mut out = Lin::zero();
        let cap = self.inner.max_arity();
        for lvl in &self.levels {
            for (w, c) in lvl {
                if cap.is_some_and(|k| w.len() + ys.len() > k) {
                    continue;
                }
                let mut full = w.clone();
                full.extend(ys.iter().cloned());
                out.add_scaled(&self.inner.ell(&full, ring), c, ring);
            }
        }
        out
    }
    fn max_arity(&self) -> Option<usize> {
        self.inner.max_arity()
    }
}

/// M^γ: ℓ^{M,γ}_k(y|m) = Σ_i ℓ^M_{k+i}(γ^i, y|m)/i!.
pub struct TwistedModule<Mo: LinfModule> {
    pub inner: Mo,
    levels: Vec<Vec<(Vec<Mo::B>, Scalar)>>,
}

impl<Mo: LinfModule> TwistedModule<Mo> {
    pub fn new(inner: Mo, gamma: &Lin<Mo::B>, ring: &Ring) -> TwistedModule<Mo> {
        let cap = inner.max_arity().unwrap_or_else(|| level_cap(None, ring));
        let levels = gamma_levels(gamma, cap, ring);
        TwistedModule { inner, levels }
    }
}

impl<Mo: LinfModule> LinfModule for TwistedModule<Mo> {
    type B = Mo::B;
    type M = Mo::M;
    fn msdeg(&self, m: &Mo::M) -> i32 {
        self.inner.msdeg(m)
    }
    fn act(&self, ys: &[Mo::B], m: &Mo::M, ring: &Ring) -> Lin<Mo::M> {
        let mut out = Lin::zero();
        let cap = self.inner.max_arity();
        for lvl in &self.levels {
            for (w, c) in lvl {
                if cap.is_some_and(|k| w.len() + ys.len() > k) {
                    continue;
                }
                let mut full = w.clone();
                full.extend(ys.iter().cloned());
                out.add_scaled(&self.inner.act(&full, m, ring), c, ring);
            }
        }
        out
    }
    fn max_arity(&self) -> Option<usize> {
        self.inner.max_arity()
    }
}

/// f^γ_k(y|m) = Σ_i f_{k+i}(γ^i, y|m)/i!.
pub struct TwistedModMorphism<F: ModMorphism> {
    pub inner: F,
    levels: Vec<Vec<(Vec<F::B>, Scalar)>>,
}

impl<F: ModMorphism> TwistedModMorphism<F> {
    pub fn new(inner: F, gamma: &Lin<F::B>, max_level: usize, ring: &Ring) -> TwistedModMorphism<F> {
        let levels = gamma_levels(gamma, max_level, ring);
        TwistedModMorphism { inner, levels }
    }
}

impl<F: ModMorphism> ModMorphism for TwistedModMorphism<F> {
    type B = F::B;
    type M = F::M;
    type N = F::N;
    fn f(&self, ys: &[F::B], m: &F::M, ring: &Ring) -> Lin<F::N> {
        let mut out = Lin::zero();
        for lvl in &self.levels {
            for (w, c) in lvl {
                let mut full = w.clone();
                full.extend(ys.iter().cloned());
                out.add_scaled(&self.inner.f(&full, m, ring), c, ring);
            }
        }
        out
    }
}

/// f^γ_k(y) = Σ_i f_{k+i}(γ^i, y)/i!: a morphism L^γ → L'^{f_*γ}.
pub struct TwistedMorphism<F: LinfMorphism> {
    pub inner: F,
    levels: Vec<Vec<(Vec<F::S>, Scalar)>>,
}

impl<F: LinfMorphism> TwistedMorphism<F> {
    pub fn new(inner: F, gamma: &Lin<F::S>, max_level: usize, ring: &Ring) -> TwistedMorphism<F> {
        let levels = gamma_levels(gamma, max_level, ring);
        TwistedMorphism { inner, levels }
    }
}

impl<F: LinfMorphism> LinfMorphism for TwistedMorphism<F> {
    type S = F::S;
    type T = F::T;
    fn src_sdeg(&self, s: &F::S) -> i32 {
        self.inner.src_sdeg(s)
    }
    fn tgt_sdeg(&self, t: &F::T) -> i32 {
        self.inner.tgt_sdeg(t)
    }
    fn f(&self, xs: &[F::S], ring: &Ring) -> Lin<F::T> {
        let mut out = Lin::zero();
        for lvl in &self.levels {
            for (w, c) in lvl {
                let mut full = w.clone();
                full.extend(xs.iter().cloned());
                out.add_scaled(&self.inner.f(&full, ring), c, ring);
            }
        }
        out
    }
}

/// f_*γ = Σ_{k≥1} f_k(γ,…,γ)/k!.
pub fn pushforward<F: LinfMorphism>(f: &F, gamma: &Lin<F::S>, max_level: usize, ring: &Ring) -> Lin<F::T> {
    let mut out = Lin::zero();
    for lvl in gamma_levels(gamma, max_level, ring).iter().skip(1) {
        for (w, c) in lvl {
            out.add_scaled(&f.f(w, ring), c, ring);
        }
    }
    out
}

// ---- contractivity ----

/// ‖output‖ ≤ 1 for every stored entry on norm-one basis inputs.
pub fn check_contractive<'a, B: Label + 'a>(
    name: &str,
    entries: impl IntoIterator<Item = (String, &'a Lin<B>)>,
    ring: &Ring,
) -> Check {
    let mut c = Check::new(name);
    for (w, v) in entries {
        let n = element_norm(v, ring);
        c.record_bool(|| w, n.at_most_one(ring.norm_c), || n.describe());
    }
    c
}

/// Strict version used for gapped deformations: every entry has norm < 1.
pub fn check_strictly_contractive<'a, B: Label + 'a>(
    name: &str,
    entries: impl IntoIterator<Item = (String, &'a Lin<B>)>,
    ring: &Ring,
) -> Check {
    let mut c = Check::new(name);
    for (w, v) in entries {
        let n = element_norm(v, ring);
        c.record_bool(|| w, n.less_than_one(ring.norm_c), || n.describe());
    }
    c
}

// ---- random 2-dimensional DGLA fixtures ----

/// L = ⟨a (deg 0), b (deg 1)⟩ with δa = λb, [a,a] = 0, [a,b] = μb.
pub fn two_dim_dgla(lambda: i128, mu: i128) -> TableDgla {
    let mut d = TableDgla::new(vec!["a".into(), "b".into()], vec![0, 1]);
    if lambda != 0 {
        d.delta.insert(0, Lin::term(1, Scalar::from_int(lambda)));
    }
    if mu != 0 {
        d.set_bracket(0, 1, Lin::term(1, Scalar::from_int(mu)));
    }
    d
}

/// A random strict DGLA morphism between two-dimensional fixtures, as
/// (source, target, f₁) with f₁(a) = αa', f₁(b) = βb'.
pub fn random_dgla_morphism(seed: u64) -> (TableDgla, TableDgla, TableMorphism) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha: i128 = [1, -1, 2, -2][rng.gen_range(0..4)];
    let beta: i128 = rng.gen_range(-3..=3);
    let lambda = alpha * rng.gen_range(-3..=3);
    let mu: i128 = alpha * rng.gen_range(-2..=2);
    let src = two_dim_dgla(lambda, mu);
    // chain map: λβ = αλ'; bracket: μβ = αβμ'
    let tgt = two_dim_dgla(lambda * beta / alpha, mu / alpha);
    let mut f = TableMorphism::new(vec![-1, 0], vec![-1, 0]);
    let ring = Ring::plain();
    f.set(&[0], Lin::term(0, Scalar::from_int(alpha)), &ring).unwrap();
    if beta != 0 {
        f.set(&[1], Lin::term(1, Scalar::from_int(beta)), &ring).unwrap();
    }
    (src, tgt, f)
}

/// Nilpotent DGLA with an energy-graded MC element: a (deg 1), b (deg 1), c (deg 2),
/// [a,a] = c, δb = c; γ = λa − (λ²/2) b solves δγ + ½[γ,γ] = 0.
pub fn nilpotent_dgla() -> TableDgla {
    let mut d = TableDgla::new(vec!["a".into(), "b".into(), "c".into()], vec![1, 1, 2]);
    d.set_bracket(0, 0, Lin::basis(2));
    d.delta.insert(1, Lin::basis(2));
    d
}

pub fn nilpotent_mc(lambda: Scalar, ring: &Ring) -> Lin<usize> {
    let sq = lambda.mul(&lambda, &ring.policy).scale(qr(-1, 2));
    let mut g = Lin::zero();
    g.add_term(0, lambda);
    g.add_term(1, sq);
    g
}

pub fn energy(lambda: crate::coeff::Q) -> Scalar {
    Scalar::term(crate::coeff::q(1), Mono { energy: lambda, ..Mono::one() })
}

/// Inverse factorial as a Scalar.
pub fn inv_fact(n: u32) -> Scalar {
    Scalar::from_q(inv_factorial(n))
}

/// Multiplicity map of a word (for reporting).
pub fn multiplicities<B: Label>(w: &[B]) -> BTreeMap<B, usize> {
    let mut m = BTreeMap::new();
    for b in w {
        *m.entry(b.clone()).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colang::{check_algebra, check_morphism, TableAlgebra};
    use crate::coeff::qr;

    fn ring() -> Ring {
        Ring::plain()
    }

    #[test]
    fn cone_z_term() {
        let r = ring();
        let l = TableAlgebra::new(vec!["y".into()], vec![0]);
        let c = Cone(l);
        assert_eq!(c.ell(&[eps(0)], &r), Lin::term(plain(0), z_scalar(&r)));
        assert!(c.ell(&[plain(0)], &r).is_zero());
        assert!(check_algebra(&c, &cone_labels(&[0usize]), 4, &r).passed());
    }

    #[test]
    fn cones_of_fixtures_are_linf() {
        let r = ring();
        let ut = DglaLinf(TableDgla::upper_triangular());
        let c = Cone(&ut);
        assert!(check_algebra(&c, &cone_labels(&ut.0.labels()), 4, &r).passed());
        for seed in 0..6 {
            let (s, t, f) = random_dgla_morphism(seed);
            let (ls, lt) = (DglaLinf(s), DglaLinf(t));
            assert!(check_algebra(&ls, &[0, 1], 4, &r).passed());
            assert!(check_morphism(&f, &ls, &lt, &[0, 1], 4, &r).passed(), "seed {seed}");
            let (cs, ct) = (Cone(&ls), Cone(&lt));
            assert!(check_algebra(&cs, &cone_labels(&[0usize, 1]), 4, &r).passed());
            let lf = Lifted(&f);
            let chk = check_morphism(&lf, &cs, &ct, &cone_labels(&[0usize, 1]), 4, &r);
            assert!(chk.passed(), "seed {seed}: {:?}", chk.failures);
        }
    }

    #[test]
    fn wrong_cone_sign_is_detected() {
        // flipping the ε-part sign of ℓ̃ breaks the L∞ relations on the upper-triangular cone
        struct BadCone<A>(A);
        impl<A: LinfAlgebra> LinfAlgebra for BadCone<A> {
            type B = Cl<A::B>;
            fn sdeg(&self, b: &Cl<A::B>) -> i32 {
                self.0.sdeg(&b.base) + b.eps as i32
            }
            fn ell(&self, ys: &[Cl<A::B>], ring: &Ring) -> Lin<Cl<A::B>> {
                let c = Cone(&self.0).ell(ys, ring);
                let mut out = Lin::zero();
                for (b, v) in c.iter() {
                    let flip = b.eps && ys.len() == 2;
                    out.add_term(b.clone(), if flip { v.neg() } else { v.clone() });
                }
                out
            }
        }
        let r = ring();
        let mut d = TableDgla::new(vec!["a".into(), "b".into()], vec![0, 0]);
        d.set_bracket(0, 1, Lin::basis(1));
        let bad = BadCone(DglaLinf(d));
        assert!(!check_algebra(&bad, &cone_labels(&[0usize, 1]), 3, &r).passed());
    }

    #[test]
    fn nilpotent_mc_and_twist() {
        let r = ring();
        let l = DglaLinf(nilpotent_dgla());
        let g = nilpotent_mc(energy(qr(1, 2)), &r);
        let mc = mc_check(&l, &g, &r).unwrap();
        assert!(mc.norm.less_than_one(r.norm_c));
        let tw = Twisted::new(&l, &g, &r);
        assert!(check_algebra(&tw, &[0, 1, 2], 4, &r).passed());
        // ℓ^γ₁(a) = ℓ₁(a) + ℓ₂(γ, a) = λ·ℓ₂(a, a) = −λc
        let v = tw.ell(&[0], &r);
        assert_eq!(v, Lin::term(2, energy(qr(1, 2)).neg()));
        let unit = nilpotent_mc(Scalar::one(), &r);
        assert!(matches!(mc_check(&l, &unit, &r), Err(ChError::NormTooLarge(_))));
        assert!(mc_check(&l, &Lin::zero(), &r).is_ok());
        let bad = Lin::term(0, energy(qr(1, 2)));
        assert!(matches!(mc_check(&l, &bad, &r), Err(ChError::NotMc(_))));
    }

    #[test]
    fn zero_twist_is_identity() {
        let r = ring();
        let l = DglaLinf(TableDgla::upper_triangular());
        let tw = Twisted::new(&l, &Lin::zero(), &r);
        for w in sym_words(&[0usize, 1, 2], |b| l.sdeg(b), 1, 2) {
            assert_eq!(tw.ell(&w, &r), l.ell(&w, &r));
        }
    }

    #[test]
    fn contractivity() {
        let r = ring();
        let z = Lin::<usize>::zero();
        assert!(check_contractive("zero", [("x".to_string(), &z)], &r).passed());
        let big = Lin::term(0usize, energy(qr(-1, 1)));
        assert!(!check_contractive("inv", [("x".to_string(), &big)], &r).passed());
    }
}
