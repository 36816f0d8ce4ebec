//! Cofree coalgebra calculus: ℓ̂, e^f, ℓ̂^M, f̌ and the structure checks built from them.
//!
//! Structure maps are given on basis labels. Elements of the symmetric coalgebra are
//! `Lin<Vec<B>>` with every word kept in canonical (sorted) order; the sign of the
//! sorting permutation is folded into the coefficient.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coeff::{inv_factorial, Ring, Scalar};
use crate::graded::{canonicalize, set_partitions, sign_of, splits, Label, Lin};
use crate::report::Check;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColangError {
    #[error("degree mismatch at {0}: expected output degree {1}, got {2}")]
    DegreeMismatch(String, i32, i32),
    #[error("unknown label index {0}")]
    UnknownLabel(usize),
    #[error("morphism check failed: {0}")]
    Unverified(String),
}

/// L∞ algebra: ℓ_k on L[1] basis labels, k ≥ 1. `sdeg` is the L[1] degree.
pub trait LinfAlgebra: Sync {
    type B: Label;
    fn sdeg(&self, b: &Self::B) -> i32;
    fn ell(&self, ys: &[Self::B], ring: &Ring) -> Lin<Self::B>;
    fn max_arity(&self) -> Option<usize> {
        None
    }
}

/// L∞ module: ℓ^M_k(y₁..y_k | m), k ≥ 0, on M[1] labels.
pub trait LinfModule: Sync {
    type B: Label;
    type M: Label;
    fn msdeg(&self, m: &Self::M) -> i32;
    fn act(&self, ys: &[Self::B], m: &Self::M, ring: &Ring) -> Lin<Self::M>;
    fn max_arity(&self) -> Option<usize> {
        None
    }
}

/// Degree-0 family f_k: L[1]^{⊙k} → L'[1], k ≥ 1.
pub trait LinfMorphism: Sync {
    type S: Label;
    type T: Label;
    fn src_sdeg(&self, s: &Self::S) -> i32;
    fn tgt_sdeg(&self, t: &Self::T) -> i32;
    fn f(&self, xs: &[Self::S], ring: &Ring) -> Lin<Self::T>;
}

/// Degree-0 family f_k(y₁..y_k | m): M[1] → N[1], k ≥ 0.
pub trait ModMorphism: Sync {
    type B: Label;
    type M: Label;
    type N: Label;
    fn f(&self, ys: &[Self::B], m: &Self::M, ring: &Ring) -> Lin<Self::N>;
}

impl<T: LinfAlgebra + ?Sized> LinfAlgebra for &T {
    type B = T::B;
    fn sdeg(&self, b: &T::B) -> i32 {
        (**self).sdeg(b)
    }
    fn ell(&self, ys: &[T::B], ring: &Ring) -> Lin<T::B> {
        (**self).ell(ys, ring)
    }
    fn max_arity(&self) -> Option<usize> {
        (**self).max_arity()
    }
}

impl<T: LinfModule + ?Sized> LinfModule for &T {
    type B = T::B;
    type M = T::M;
    fn msdeg(&self, m: &T::M) -> i32 {
        (**self).msdeg(m)
    }
    fn act(&self, ys: &[T::B], m: &T::M, ring: &Ring) -> Lin<T::M> {
        (**self).act(ys, m, ring)
    }
    fn max_arity(&self) -> Option<usize> {
        (**self).max_arity()
    }
}

impl<T: LinfMorphism + ?Sized> LinfMorphism for &T {
    type S = T::S;
    type T = T::T;
    fn src_sdeg(&self, s: &T::S) -> i32 {
        (**self).src_sdeg(s)
    }
    fn tgt_sdeg(&self, t: &T::T) -> i32 {
        (**self).tgt_sdeg(t)
    }
    fn f(&self, xs: &[T::S], ring: &Ring) -> Lin<T::T> {
        (**self).f(xs, ring)
    }
}

impl<T: ModMorphism + ?Sized> ModMorphism for &T {
    type B = T::B;
    type M = T::M;
    type N = T::N;
    fn f(&self, ys: &[T::B], m: &T::M, ring: &Ring) -> Lin<T::N> {
        (**self).f(ys, m, ring)
    }
}

/// Evaluates a basis-level multilinear map on elements.
pub fn ell_on<A: LinfAlgebra>(a: &A, ys: &[Lin<A::B>], ring: &Ring) -> Lin<A::B> {
    crate::graded::expand_multilinear(ys, ring, |bs| a.ell(bs, ring))
}

pub fn act_on<Mo: LinfModule>(m: &Mo, ys: &[Lin<Mo::B>], x: &Lin<Mo::M>, ring: &Ring) -> Lin<Mo::M> {
    let mut out = Lin::zero();
    for (xm, c) in x.iter() {
        let v = crate::graded::expand_multilinear(ys, ring, |bs| m.act(bs, xm, ring));
        out.add_scaled(&v, c, ring);
    }
    out
}

fn arity_cap(cap: Option<usize>, k: usize) -> usize {
    cap.map_or(k, |c| c.min(k))
}

/// ⊙-product of elements, canonicalized.
pub fn sym_product<B: Label>(factors: &[Lin<B>], sdeg: impl Fn(&B) -> i32, ring: &Ring) -> Lin<Vec<B>> {
    crate::graded::expand_multilinear(factors, ring, |bs| match canonicalize(bs, &sdeg) {
        Some((w, s)) => Lin::term(w, Scalar::from_int(s as i128)),
        None => Lin::zero(),
    })
}

/// Canonical form of one word as an element.
pub fn word<B: Label>(bs: &[B], sdeg: impl Fn(&B) -> i32) -> Lin<Vec<B>> {
    match canonicalize(bs, sdeg) {
        Some((w, s)) => Lin::term(w, Scalar::from_int(s as i128)),
        None => Lin::zero(),
    }
}

/// ℓ̂ on a word: Σ_{p≥1} Σ_{σ∈Sh(p,k−p)} ε(σ) ℓ_p(y_σ(1..p)) ⊙ y_σ(p+1..k).
pub fn hat<A: LinfAlgebra>(a: &A, w: &[A::B], ring: &Ring) -> Lin<Vec<A::B>> {
    let degs: Vec<i32> = w.iter().map(|b| a.sdeg(b)).collect();
    let mut out = Lin::zero();
    for p in 1..=arity_cap(a.max_arity(), w.len()) {
        for (front, rest, s) in splits(&degs, p) {
            let ins: Vec<A::B> = front.iter().map(|&i| w[i].clone()).collect();
            let val = a.ell(&ins, ring);
            for (b, c) in val.iter() {
                let mut full = vec![b.clone()];
                full.extend(rest.iter().map(|&i| w[i].clone()));
                if let Some((cw, s2)) = canonicalize(&full, |x| a.sdeg(x)) {
                    out.add_term(cw, c.signed(s * s2));
                }
            }
        }
    }
    out
}

/// ℓ̂^M on w ⊗ m. The algebra part is ℓ̂(w) ⊗ m; the module part carries
/// ε'(σ) = (−1)^{front degrees} ε(σ).
pub fn hat_module<A, Mo>(a: &A, module: &Mo, w: &[A::B], m: &Mo::M, ring: &Ring) -> Lin<(Vec<A::B>, Mo::M)>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
{
    let mut out: Lin<(Vec<A::B>, Mo::M)> = Lin::zero();
    for (u, c) in hat(a, w, ring).iter() {
        out.add_term((u.clone(), m.clone()), c.clone());
    }
    out.add_assign(&hat_module_part(a, module, w, m, ring));
    out
}

fn hat_module_part<A, Mo>(a: &A, module: &Mo, w: &[A::B], m: &Mo::M, ring: &Ring) -> Lin<(Vec<A::B>, Mo::M)>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
{
    let degs: Vec<i32> = w.iter().map(|b| a.sdeg(b)).collect();
    let k = w.len();
    let qmax = arity_cap(module.max_arity(), k);
    let mut out = Lin::zero();
    for q in 0..=qmax {
        let p = k - q;
        for (front, rest, s) in splits(&degs, p) {
            let fdeg: i64 = front.iter().map(|&i| degs[i] as i64).sum();
            let s2 = s * sign_of(fdeg);
            let ins: Vec<A::B> = rest.iter().map(|&i| w[i].clone()).collect();
            let val = module.act(&ins, m, ring);
            if val.is_zero() {
                continue;
            }
            let fw: Vec<A::B> = front.iter().map(|&i| w[i].clone()).collect();
            let Some((cw, s3)) = canonicalize(&fw, |x| a.sdeg(x)) else { continue };
            for (n, c) in val.iter() {
                out.add_term((cw.clone(), n.clone()), c.signed(s2 * s3));
            }
        }
    }
    out
}

/// e^f on a word: sum over unordered set partitions of ⊙ f(block).
pub fn exp_map<F: LinfMorphism>(f: &F, w: &[F::S], ring: &Ring) -> Lin<Vec<F::T>> {
    if w.is_empty() {
        return Lin::basis(vec![]);
    }
    let degs: Vec<i32> = w.iter().map(|b| f.src_sdeg(b)).collect();
    let mut out = Lin::zero();
    for (blocks, s) in set_partitions(&degs) {
        let factors: Vec<Lin<F::T>> = blocks
            .iter()
            .map(|bl| {
                let ins: Vec<F::S> = bl.iter().map(|&i| w[i].clone()).collect();
                f.f(&ins, ring)
            })
            .collect();
        if factors.iter().any(Lin::is_zero) {
            continue;
        }
        let prod = sym_product(&factors, |t| f.tgt_sdeg(t), ring);
        out.add_with_sign(&prod, s);
    }
    out
}

/// e^f on a word through ordered compositions weighted by 1/l!; slow, used as an oracle.
pub fn exp_map_ordered<F: LinfMorphism>(f: &F, w: &[F::S], ring: &Ring) -> Lin<Vec<F::T>> {
    let k = w.len();
    if k == 0 {
        return Lin::basis(vec![]);
    }
    let degs: Vec<i32> = w.iter().map(|b| f.src_sdeg(b)).collect();
    let mut out = Lin::zero();
    for comp in compositions(k) {
        for sigma in crate::graded::enumerate_shuffles(&comp) {
            let s = crate::graded::koszul_unchecked(&sigma, &degs);
            let mut pos = 0;
            let mut factors = vec![];
            for &len in &comp {
                let ins: Vec<F::S> = sigma[pos..pos + len].iter().map(|&i| w[i].clone()).collect();
                factors.push(f.f(&ins, ring));
                pos += len;
            }
            let prod = sym_product(&factors, |t| f.tgt_sdeg(t), ring);
            let weight = Scalar::from_q(inv_factorial(comp.len() as u32)).signed(s);
            out.add_scaled(&prod, &weight, ring);
        }
    }
    out
}

fn compositions(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for first in 1..=k {
        for mut rest in compositions(k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// f̌ on w ⊗ m: Σ_{p≥0} ε(σ) y_σ(1..p) ⊗ f_q(y_σ(p+1..k) | m).
pub fn comodule_apply<F: ModMorphism>(
    f: &F,
    sdeg: impl Fn(&F::B) -> i32,
    w: &[F::B],
    m: &F::M,
    ring: &Ring,
) -> Lin<(Vec<F::B>, F::N)> {
    let degs: Vec<i32> = w.iter().map(&sdeg).collect();
    let k = w.len();
    let mut out = Lin::zero();
    for q in 0..=k {
        for (front, rest, s) in splits(&degs, k - q) {
            let ins: Vec<F::B> = rest.iter().map(|&i| w[i].clone()).collect();
            let val = f.f(&ins, m, ring);
            if val.is_zero() {
                continue;
            }
            let fw: Vec<F::B> = front.iter().map(|&i| w[i].clone()).collect();
            let Some((cw, s3)) = canonicalize(&fw, &sdeg) else { continue };
            for (n, c) in val.iter() {
                out.add_term((cw.clone(), n.clone()), c.signed(s * s3));
            }
        }
    }
    out
}

/// Counit projection of a comodule-side element: keeps the empty-word part.
pub fn counit<B: Label, M: Label>(x: &Lin<(Vec<B>, M)>) -> Lin<M> {
    let mut out = Lin::zero();
    for ((w, m), c) in x.iter() {
        if w.is_empty() {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

/// All symmetric words of length lo..=hi over `labels` (no repeated odd label).
pub fn sym_words<B: Label>(labels: &[B], sdeg: impl Fn(&B) -> i32, lo: usize, hi: usize) -> Vec<Vec<B>> {
    let mut sorted = labels.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = vec![];
    let mut cur: Vec<usize> = vec![];
    fn rec<B: Label>(
        start: usize,
        cur: &mut Vec<usize>,
        lo: usize,
        hi: usize,
        labels: &[B],
        sdeg: &dyn Fn(&B) -> i32,
        out: &mut Vec<Vec<B>>,
    ) {
        if cur.len() >= lo {
            out.push(cur.iter().map(|&i| labels[i].clone()).collect());
        }
        if cur.len() == hi {
            return;
        }
        for i in start..labels.len() {
            let odd = sdeg(&labels[i]) % 2 != 0;
            if odd && cur.last() == Some(&i) {
                continue;
            }
            cur.push(i);
            rec(if odd { i + 1 } else { i }, cur, lo, hi, labels, sdeg, out);
            cur.pop();
        }
    }
    rec(0, &mut cur, lo, hi, &sorted, &sdeg, &mut out);
    out
}

// ---- structure checks (counit-projected squares) ----

/// (π₁ ∘ ℓ̂ ∘ ℓ̂)(w): vanishes on all words iff ℓ̂² = 0.
pub fn algebra_residual<A: LinfAlgebra>(a: &A, w: &[A::B], ring: &Ring) -> Lin<A::B> {
    let mut out = Lin::zero();
    for (u, c) in hat(a, w, ring).iter() {
        let v = a.ell(u, ring);
        out.add_scaled(&v, c, ring);
    }
    out
}

pub fn check_algebra<A: LinfAlgebra>(a: &A, labels: &[A::B], word_bound: usize, ring: &Ring) -> Check {
    let mut check = Check::new("linf-algebra").with_stamp(format!("word_bound {word_bound}"));
    for w in sym_words(labels, |b| a.sdeg(b), 1, word_bound) {
        let r = algebra_residual(a, &w, ring);
        check.record(|| format!("{w:?}"), &r);
    }
    check
}

/// π₁(ℓ̂' e^f − e^f ℓ̂)(w) = Σ ℓ'(e^f w) − f(ℓ̂ w).
pub fn morphism_residual<F, A, A2>(f: &F, src: &A, tgt: &A2, w: &[F::S], ring: &Ring) -> Lin<F::T>
where
    F: LinfMorphism,
    A: LinfAlgebra<B = F::S>,
    A2: LinfAlgebra<B = F::T>,
{
    let mut out = Lin::zero();
    for (u, c) in exp_map(f, w, ring).iter() {
        if u.is_empty() {
            continue;
        }
        out.add_scaled(&tgt.ell(u, ring), c, ring);
    }
    for (u, c) in hat(src, w, ring).iter() {
        out.add_scaled(&f.f(u, ring), &c.neg(), ring);
    }
    out
}

pub fn check_morphism<F, A, A2>(f: &F, src: &A, tgt: &A2, labels: &[F::S], word_bound: usize, ring: &Ring) -> Check
where
    F: LinfMorphism,
    A: LinfAlgebra<B = F::S>,
    A2: LinfAlgebra<B = F::T>,
{
    let mut check = Check::new("linf-morphism").with_stamp(format!("word_bound {word_bound}"));
    for w in sym_words(labels, |b| src.sdeg(b), 1, word_bound) {
        let r = morphism_residual(f, src, tgt, &w, ring);
        check.record(|| format!("{w:?}"), &r);
    }
    check
}

/// (ε⊗id) ℓ̂^M ℓ̂^M (w ⊗ m).
pub fn module_residual<A, Mo>(a: &A, module: &Mo, w: &[A::B], m: &Mo::M, ring: &Ring) -> Lin<Mo::M>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
{
    let mut out = Lin::zero();
    for ((u, n), c) in hat_module(a, module, w, m, ring).iter() {
        out.add_scaled(&module.act(u, n, ring), c, ring);
    }
    out
}

/// Module check on the words accepted by `keep` (all words when it returns true).
pub fn check_module_filtered<A, Mo>(
    name: &str,
    a: &A,
    module: &Mo,
    labels: &[A::B],
    mlabels: &[Mo::M],
    word_bound: usize,
    keep: impl Fn(&[A::B]) -> bool,
    ring: &Ring,
) -> Check
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
{
    let mut check = Check::new(name).with_stamp(format!("word_bound {word_bound}"));
    for w in sym_words(labels, |b| a.sdeg(b), 0, word_bound) {
        if !keep(&w) {
            continue;
        }
        for m in mlabels {
            let r = module_residual(a, module, &w, m, ring);
            check.record(|| format!("{w:?} | {m:?}"), &r);
        }
    }
    check
}

pub fn check_module<A, Mo>(a: &A, module: &Mo, labels: &[A::B], mlabels: &[Mo::M], word_bound: usize, ring: &Ring) -> Check
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
{
    check_module_filtered("linf-module", a, module, labels, mlabels, word_bound, |_| true, ring)
}

/// (ε⊗id)(ℓ̂^N f̌ − f̌ ℓ̂^M)(w ⊗ m).
pub fn module_morphism_residual<A, Mo, No, F>(a: &A, mm: &Mo, nn: &No, f: &F, w: &[A::B], m: &Mo::M, ring: &Ring) -> Lin<No::M>
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
    No: LinfModule<B = A::B>,
    F: ModMorphism<B = A::B, M = Mo::M, N = No::M>,
{
    let mut out = Lin::zero();
    for ((u, n), c) in comodule_apply(f, |b| a.sdeg(b), w, m, ring).iter() {
        out.add_scaled(&nn.act(u, n, ring), c, ring);
    }
    for ((u, x), c) in hat_module(a, mm, w, m, ring).iter() {
        out.add_scaled(&f.f(u, x, ring), &c.neg(), ring);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn check_module_morphism_filtered<A, Mo, No, F>(
    name: &str,
    a: &A,
    mm: &Mo,
    nn: &No,
    f: &F,
    labels: &[A::B],
    mlabels: &[Mo::M],
    word_bound: usize,
    keep: impl Fn(&[A::B]) -> bool,
    ring: &Ring,
) -> Check
where
    A: LinfAlgebra,
    Mo: LinfModule<B = A::B>,
    No: LinfModule<B = A::B>,
    F: ModMorphism<B = A::B, M = Mo::M, N = No::M>,
{
    let mut check = Check::new(name).with_stamp(format!("word_bound {word_bound}"));
    for w in sym_words(labels, |b| a.sdeg(b), 0, word_bound) {
        if !keep(&w) {
            continue;
        }
        for m in mlabels {
            let r = module_morphism_residual(a, mm, nn, f, &w, m, ring);
            check.record(|| format!("{w:?} | {m:?}"), &r);
        }
    }
    check
}

// ---- restriction along a morphism ----

/// f*M: ℓ^{f*M}(w|m) = (ε⊗id) ℓ̂^M (e^f w ⊗ m).
pub struct Restricted<F, Mo> {
    pub f: F,
    pub module: Mo,
}

impl<F, Mo> LinfModule for Restricted<F, Mo>
where
    F: LinfMorphism,
    Mo: LinfModule<B = F::T>,
{
    type B = F::S;
    type M = Mo::M;
    fn msdeg(&self, m: &Mo::M) -> i32 {
        self.module.msdeg(m)
    }
    fn act(&self, ys: &[F::S], m: &Mo::M, ring: &Ring) -> Lin<Mo::M> {
        let mut out = Lin::zero();
        for (u, c) in exp_map(&self.f, ys, ring).iter() {
            out.add_scaled(&self.module.act(u, m, ring), c, ring);
        }
        out
    }
}

/// Restriction, refusing morphisms that fail the check at `word_bound`.
pub fn restrict_module<F, A, A2, Mo>(
    f: F,
    src: &A,
    tgt: &A2,
    module: Mo,
    labels: &[F::S],
    word_bound: usize,
    ring: &Ring,
) -> Result<Restricted<F, Mo>, ColangError>
where
    F: LinfMorphism,
    A: LinfAlgebra<B = F::S>,
    A2: LinfAlgebra<B = F::T>,
    Mo: LinfModule<B = F::T>,
{
    let c = check_morphism(&f, src, tgt, labels, word_bound, ring);
    if !c.passed() {
        let w = c.first_failure().map(|x| x.witness.clone()).unwrap_or_default();
        return Err(ColangError::Unverified(w));
    }
    Ok(Restricted { f, module })
}

/// Composite of morphisms: (g ∘ f)_k = π₁ ê^g e^f.
pub struct Composite<F, G> {
    pub f: F,
    pub g: G,
}

impl<F, G> LinfMorphism for Composite<F, G>
where
    F: LinfMorphism,
    G: LinfMorphism<S = F::T>,
{
    type S = F::S;
    type T = G::T;
    fn src_sdeg(&self, s: &F::S) -> i32 {
        self.f.src_sdeg(s)
    }
    fn tgt_sdeg(&self, t: &G::T) -> i32 {
        self.g.tgt_sdeg(t)
    }
    fn f(&self, xs: &[F::S], ring: &Ring) -> Lin<G::T> {
        let mut out = Lin::zero();
        for (u, c) in exp_map(&self.f, xs, ring).iter() {
            out.add_scaled(&self.g.f(u, ring), c, ring);
        }
        out
    }
}

// ---- table-backed maps ----

fn check_degree(what: String, expect: i32, out: &Lin<usize>, degs: &[i32]) -> Result<(), ColangError> {
    for (b, _) in out.iter() {
        let d = *degs.get(*b).ok_or(ColangError::UnknownLabel(*b))?;
        if d != expect {
            return Err(ColangError::DegreeMismatch(what, expect, d));
        }
    }
    Ok(())
}

fn sgn(s: i32) -> Scalar {
    Scalar::from_int(s as i128)
}

/// Finite-dimensional L∞ algebra with structure constants on canonical words.
#[derive(Clone, Debug, Default)]
pub struct TableAlgebra {
    pub names: Vec<String>,
    pub sdegs: Vec<i32>,
    pub maps: BTreeMap<Vec<usize>, Lin<usize>>,
}

impl TableAlgebra {
    pub fn new(names: Vec<String>, sdegs: Vec<i32>) -> TableAlgebra {
        TableAlgebra { names, sdegs, maps: BTreeMap::new() }
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.sdegs.len()).collect()
    }

    /// Sets ℓ_k(inputs) = out (extended by symmetry).
    pub fn set(&mut self, inputs: &[usize], out: Lin<usize>, ring: &Ring) -> Result<(), ColangError> {
        let expect = inputs.iter().map(|&i| self.sdegs[i]).sum::<i32>() + 1;
        check_degree(format!("{inputs:?}"), expect, &out, &self.sdegs)?;
        if let Some((w, s)) = canonicalize(inputs, |b| self.sdegs[*b]) {
            self.maps.insert(w, out.scale(&sgn(s), ring));
        }
        Ok(())
    }
}

impl LinfAlgebra for TableAlgebra {
    type B = usize;
    fn sdeg(&self, b: &usize) -> i32 {
        self.sdegs[*b]
    }
    fn ell(&self, ys: &[usize], _ring: &Ring) -> Lin<usize> {
        match canonicalize(ys, |b| self.sdegs[*b]) {
            Some((w, s)) => self.maps.get(&w).map(|v| v.signed(s)).unwrap_or_default(),
            None => Lin::zero(),
        }
    }
    fn max_arity(&self) -> Option<usize> {
        Some(self.maps.keys().map(Vec::len).max().unwrap_or(0))
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableModule {
    pub alg_sdegs: Vec<i32>,
    pub msdegs: Vec<i32>,
    pub maps: BTreeMap<(Vec<usize>, usize), Lin<usize>>,
}

impl TableModule {
    pub fn new(alg_sdegs: Vec<i32>, msdegs: Vec<i32>) -> TableModule {
        TableModule { alg_sdegs, msdegs, maps: BTreeMap::new() }
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.msdegs.len()).collect()
    }

    pub fn set(&mut self, ys: &[usize], m: usize, out: Lin<usize>, ring: &Ring) -> Result<(), ColangError> {
        let expect = ys.iter().map(|&i| self.alg_sdegs[i]).sum::<i32>() + self.msdegs[m] + 1;
        check_degree(format!("{ys:?}|{m}"), expect, &out, &self.msdegs)?;
        if let Some((w, s)) = canonicalize(ys, |b| self.alg_sdegs[*b]) {
            self.maps.insert((w, m), out.scale(&sgn(s), ring));
        }
        Ok(())
    }
}

impl LinfModule for TableModule {
    type B = usize;
    type M = usize;
    fn msdeg(&self, m: &usize) -> i32 {
        self.msdegs[*m]
    }
    fn act(&self, ys: &[usize], m: &usize, _ring: &Ring) -> Lin<usize> {
        match canonicalize(ys, |b| self.alg_sdegs[*b]) {
            Some((w, s)) => self.maps.get(&(w, *m)).map(|v| v.signed(s)).unwrap_or_default(),
            None => Lin::zero(),
        }
    }
    fn max_arity(&self) -> Option<usize> {
        Some(self.maps.keys().map(|(w, _)| w.len()).max().unwrap_or(0))
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableMorphism {
    pub src_sdegs: Vec<i32>,
    pub tgt_sdegs: Vec<i32>,
    pub maps: BTreeMap<Vec<usize>, Lin<usize>>,
}

impl TableMorphism {
    pub fn new(src_sdegs: Vec<i32>, tgt_sdegs: Vec<i32>) -> TableMorphism {
        TableMorphism { src_sdegs, tgt_sdegs, maps: BTreeMap::new() }
    }

    pub fn identity(sdegs: Vec<i32>) -> TableMorphism {
        let mut f = TableMorphism::new(sdegs.clone(), sdegs.clone());
        for i in 0..sdegs.len() {
            f.maps.insert(vec![i], Lin::basis(i));
        }
        f
    }

    pub fn set(&mut self, xs: &[usize], out: Lin<usize>, ring: &Ring) -> Result<(), ColangError> {
        let expect = xs.iter().map(|&i| self.src_sdegs[i]).sum::<i32>();
        check_degree(format!("{xs:?}"), expect, &out, &self.tgt_sdegs)?;
        if let Some((w, s)) = canonicalize(xs, |b| self.src_sdegs[*b]) {
            self.maps.insert(w, out.scale(&sgn(s), ring));
        }
        Ok(())
    }
}

impl LinfMorphism for TableMorphism {
    type S = usize;
    type T = usize;
    fn src_sdeg(&self, s: &usize) -> i32 {
        self.src_sdegs[*s]
    }
    fn tgt_sdeg(&self, t: &usize) -> i32 {
        self.tgt_sdegs[*t]
    }
    fn f(&self, xs: &[usize], _ring: &Ring) -> Lin<usize> {
        match canonicalize(xs, |b| self.src_sdegs[*b]) {
            Some((w, s)) => self.maps.get(&w).map(|v| v.signed(s)).unwrap_or_default(),
            None => Lin::zero(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableModMorphism {
    pub alg_sdegs: Vec<i32>,
    pub m_sdegs: Vec<i32>,
    pub n_sdegs: Vec<i32>,
    pub maps: BTreeMap<(Vec<usize>, usize), Lin<usize>>,
}

impl TableModMorphism {
    pub fn new(alg_sdegs: Vec<i32>, m_sdegs: Vec<i32>, n_sdegs: Vec<i32>) -> TableModMorphism {
        TableModMorphism { alg_sdegs, m_sdegs, n_sdegs, maps: BTreeMap::new() }
    }

    pub fn set(&mut self, ys: &[usize], m: usize, out: Lin<usize>, ring: &Ring) -> Result<(), ColangError> {
        let expect = ys.iter().map(|&i| self.alg_sdegs[i]).sum::<i32>() + self.m_sdegs[m];
        check_degree(format!("{ys:?}|{m}"), expect, &out, &self.n_sdegs)?;
        if let Some((w, s)) = canonicalize(ys, |b| self.alg_sdegs[*b]) {
            self.maps.insert((w, m), out.scale(&sgn(s), ring));
        }
        Ok(())
    }

    /// Components recovered from f̌ through the counit.
    pub fn extract<F: ModMorphism<B = usize, M = usize, N = usize>>(
        f: &F,
        alg_sdegs: Vec<i32>,
        m_sdegs: Vec<i32>,
        n_sdegs: Vec<i32>,
        word_bound: usize,
        ring: &Ring,
    ) -> TableModMorphism {
        let mut out = TableModMorphism::new(alg_sdegs.clone(), m_sdegs.clone(), n_sdegs);
        let labels: Vec<usize> = (0..alg_sdegs.len()).collect();
        for w in sym_words(&labels, |b| alg_sdegs[*b], 0, word_bound) {
            for m in 0..m_sdegs.len() {
                let v = counit(&comodule_apply(f, |b| alg_sdegs[*b], &w, &m, ring));
                if !v.is_zero() {
                    out.maps.insert((w.clone(), m), v);
                }
            }
        }
        out
    }
}

impl ModMorphism for TableModMorphism {
    type B = usize;
    type M = usize;
    type N = usize;
    fn f(&self, ys: &[usize], m: &usize, _ring: &Ring) -> Lin<usize> {
        match canonicalize(ys, |b| self.alg_sdegs[*b]) {
            Some((w, s)) => self.maps.get(&(w, *m)).map(|v| v.signed(s)).unwrap_or_default(),
            None => Lin::zero(),
        }
    }
}

// ---- DGLAs ----

/// DGLA given by δ and a bracket on basis labels; degrees are L-degrees.
pub trait Dgla: Sync {
    type Y: Label;
    fn deg(&self, y: &Self::Y) -> i32;
    fn delta(&self, y: &Self::Y, ring: &Ring) -> Lin<Self::Y>;
    fn bracket(&self, a: &Self::Y, b: &Self::Y, ring: &Ring) -> Lin<Self::Y>;
}

/// DGLA as an L∞ algebra: ℓ₁ = −δ, ℓ₂(y₁,y₂) = (−1)^{|y₁|}[y₁,y₂].
#[derive(Clone, Debug)]
pub struct DglaLinf<D>(pub D);

impl<D: Dgla> LinfAlgebra for DglaLinf<D> {
    type B = D::Y;
    fn sdeg(&self, b: &D::Y) -> i32 {
        self.0.deg(b) - 1
    }
    fn ell(&self, ys: &[D::Y], ring: &Ring) -> Lin<D::Y> {
        match ys {
            [y] => self.0.delta(y, ring).neg(),
            [a, b] => self.0.bracket(a, b, ring).signed(sign_of(self.0.deg(a) as i64)),
            _ => Lin::zero(),
        }
    }
    fn max_arity(&self) -> Option<usize> {
        Some(2)
    }
}

/// Finite DGLA from tables.
#[derive(Clone, Debug, Default)]
pub struct TableDgla {
    pub names: Vec<String>,
    pub degs: Vec<i32>,
    pub delta: BTreeMap<usize, Lin<usize>>,
    pub bracket: BTreeMap<(usize, usize), Lin<usize>>,
}

impl TableDgla {
    pub fn new(names: Vec<String>, degs: Vec<i32>) -> TableDgla {
        TableDgla { names, degs, ..Default::default() }
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.degs.len()).collect()
    }

    /// Sets [a,b] and [b,a] = −(−1)^{|a||b|}[a,b].
    pub fn set_bracket(&mut self, a: usize, b: usize, out: Lin<usize>) {
        let s = -sign_of((self.degs[a] * self.degs[b]) as i64);
        self.bracket.insert((b, a), out.signed(s));
        self.bracket.insert((a, b), out);
    }

    /// Upper-triangular 2×2 matrices with the commutator bracket and zero differential.
    pub fn upper_triangular() -> TableDgla {
        let mut d = TableDgla::new(vec!["e11".into(), "e12".into(), "e22".into()], vec![0, 0, 0]);
        // [e11,e12] = e12, [e12,e22] = e12, [e11,e22] = 0
        d.set_bracket(0, 1, Lin::basis(1));
        d.set_bracket(1, 2, Lin::basis(1));
        d
    }
}

impl Dgla for TableDgla {
    type Y = usize;
    fn deg(&self, y: &usize) -> i32 {
        self.degs[*y]
    }
    fn delta(&self, y: &usize, _ring: &Ring) -> Lin<usize> {
        self.delta.get(y).cloned().unwrap_or_default()
    }
    fn bracket(&self, a: &usize, b: &usize, _ring: &Ring) -> Lin<usize> {
        self.bracket.get(&(*a, *b)).cloned().unwrap_or_default()
    }
}

impl<D: Dgla + ?Sized> Dgla for &D {
    type Y = D::Y;
    fn deg(&self, y: &D::Y) -> i32 {
        (**self).deg(y)
    }
    fn delta(&self, y: &D::Y, ring: &Ring) -> Lin<D::Y> {
        (**self).delta(y, ring)
    }
    fn bracket(&self, a: &D::Y, b: &D::Y, ring: &Ring) -> Lin<D::Y> {
        (**self).bracket(a, b, ring)
    }
}

/// Direct DGLA axioms: δ² = 0, δ a derivation, antisymmetry, Jacobi.
pub fn check_dgla_axioms<D: Dgla>(d: &D, labels: &[D::Y], ring: &Ring) -> Check {
    let mut c = Check::new("dgla-axioms");
    let br = |a: &Lin<D::Y>, b: &Lin<D::Y>| {
        crate::graded::expand_multilinear(&[a.clone(), b.clone()], ring, |xs| d.bracket(&xs[0], &xs[1], ring))
    };
    let del = |a: &Lin<D::Y>| a.map_linear(ring, |y| d.delta(y, ring));
    for y in labels {
        let v = del(&d.delta(y, ring));
        c.record(|| format!("δδ {y:?}"), &v);
    }
    for a in labels {
        for b in labels {
            let (la, lb) = (Lin::basis(a.clone()), Lin::basis(b.clone()));
            let da = d.deg(a);
            let db = d.deg(b);
            let mut r = del(&br(&la, &lb));
            r.add_with_sign(&br(&del(&la), &lb), -1);
            r.add_with_sign(&br(&la, &del(&lb)), -sign_of(da as i64));
            c.record(|| format!("δ[{a:?},{b:?}]"), &r);
            let mut s = br(&la, &lb);
            s.add_with_sign(&br(&lb, &la), sign_of((da * db) as i64));
            c.record(|| format!("antisym {a:?},{b:?}"), &s);
            for x in labels {
                let lx = Lin::basis(x.clone());
                let dx = d.deg(x);
                // [a,[b,x]] = [[a,b],x] + (−1)^{|a||b|}[b,[a,x]]
                let mut j = br(&la, &br(&lb, &lx));
                j.add_with_sign(&br(&br(&la, &lb), &lx), -1);
                j.add_with_sign(&br(&lb, &br(&la, &lx)), -sign_of((da * db) as i64));
                let _ = dx;
                c.record(|| format!("jacobi {a:?},{b:?},{x:?}"), &j);
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        Ring::plain()
    }

    fn s(n: i128) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn hat_with_only_l1() {
        // one-dim odd-shifted pieces: y1 (sdeg 1), y2 (sdeg 0), ℓ₁ maps into a third label
        let r = ring();
        let mut a = TableAlgebra::new(vec!["y1".into(), "y2".into(), "u".into(), "v".into()], vec![1, 0, 2, 1]);
        a.set(&[0], Lin::basis(2), &r).unwrap();
        a.set(&[1], Lin::basis(3), &r).unwrap();
        let got = hat(&a, &[0, 1], &r);
        // f₁(y1)⊙y2 + (−1)^{|y1|} y1 ⊙ f₁(y2)
        let mut want = word(&[2, 1], |b| a.sdeg(b));
        want.add_with_sign(&word(&[0, 3], |b| a.sdeg(b)), -1);
        assert_eq!(got, want);
        assert!(hat(&TableAlgebra::new(vec![], vec![]), &[], &r).is_zero());
    }

    #[test]
    fn hat_arity_two_on_length_three() {
        let r = ring();
        // three odd labels x (sdeg 1) and an output slot w of sdeg 3
        let mut a = TableAlgebra::new(vec!["x0".into(), "x1".into(), "x2".into(), "w".into()], vec![1, 1, 1, 3]);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            a.set(&[i, j], Lin::basis(3), &r).unwrap();
        }
        let got = hat(&a, &[0, 1, 2], &r);
        // Sh(2,1): (01|2) +, (02|1) −, (12|0) +
        let deg = |b: &usize| a.sdeg(b);
        let mut want = word(&[3, 2], deg);
        want.add_with_sign(&word(&[3, 1], deg), -1);
        want.add_assign(&word(&[3, 0], deg));
        assert_eq!(got, want);
    }

    #[test]
    fn exp_identity_and_f1_only() {
        let r = ring();
        let id = TableMorphism::identity(vec![0, 1, 1]);
        for w in sym_words(&[0usize, 1, 2], |b| id.src_sdeg(b), 0, 3) {
            assert_eq!(exp_map(&id, &w, &r), Lin::basis(w.clone()), "{w:?}");
        }
        let mut f = TableMorphism::new(vec![0, 1], vec![0, 1]);
        f.set(&[0], Lin::term(0, s(2)), &r).unwrap();
        f.set(&[1], Lin::term(1, s(3)), &r).unwrap();
        assert_eq!(exp_map(&f, &[0, 0, 1], &r), Lin::term(vec![0, 0, 1], s(12)));
        assert_eq!(exp_map(&f, &[], &r), Lin::basis(vec![]));
    }

    #[test]
    fn partition_and_ordered_formulas_agree() {
        let r = ring();
        let mut f = TableMorphism::new(vec![0, 1, 1], vec![0, 1, -1, 2]);
        f.set(&[0], Lin::term(0, s(2)), &r).unwrap();
        f.set(&[1], Lin::term(1, s(1)), &r).unwrap();
        f.set(&[2], Lin::term(1, s(-1)), &r).unwrap();
        f.set(&[1, 2], Lin::term(3, s(5)), &r).unwrap();
        f.set(&[0, 1], Lin::term(1, s(7)), &r).unwrap();
        f.set(&[0, 0, 1], Lin::term(1, s(4)), &r).unwrap();
        for w in sym_words(&[0usize, 1, 2], |b| f.src_sdeg(b), 0, 4) {
            assert_eq!(exp_map(&f, &w, &r), exp_map_ordered(&f, &w, &r), "{w:?}");
        }
    }

    #[test]
    fn module_coderivation_small_words() {
        let r = ring();
        let mut m = TableModule::new(vec![1], vec![0, 1, 2]);
        m.set(&[], 0, Lin::basis(1), &r).unwrap();
        m.set(&[0], 0, Lin::basis(2), &r).unwrap();
        let a = TableAlgebra::new(vec!["y".into()], vec![1]);
        // k = 0: only ℓ^M₀
        let got = hat_module(&a, &m, &[], &0, &r);
        assert_eq!(got, Lin::basis((vec![], 1)));
        // k = 1, ℓ₁ = 0: ℓ^M₁(y|m) + (−1)^{|y|'} y ⊗ ℓ^M₀(m)
        let got = hat_module(&a, &m, &[0], &0, &r);
        let mut want = Lin::basis((vec![], 2));
        want.add_term((vec![0], 1), s(-1));
        assert_eq!(got, want);
    }

    #[test]
    fn comodule_round_trip() {
        let r = ring();
        let mut f = TableModMorphism::new(vec![0, 1], vec![0, 1], vec![0, 1, 2]);
        f.set(&[], 0, Lin::term(0, s(3)), &r).unwrap();
        f.set(&[1], 0, Lin::term(1, s(2)), &r).unwrap();
        f.set(&[0, 1], 1, Lin::term(2, s(-1)), &r).unwrap();
        let g = TableModMorphism::extract(&f, vec![0, 1], vec![0, 1], vec![0, 1, 2], 3, &r);
        assert_eq!(g.maps, f.maps);
        // f₀ only → id ⊗ f₀
        let mut f0 = TableModMorphism::new(vec![0, 1], vec![0], vec![0]);
        f0.set(&[], 0, Lin::term(0, s(3)), &r).unwrap();
        assert_eq!(comodule_apply(&f0, |b| [0, 1][*b], &[0, 1], &0, &r), Lin::term((vec![0, 1], 0), s(3)));
    }

    #[test]
    fn structure_checks() {
        let r = ring();
        let ab = TableAlgebra::new(vec!["a".into(), "b".into()], vec![0, 1]);
        assert!(check_algebra(&ab, &ab.labels(), 4, &r).passed());
        let ut = DglaLinf(TableDgla::upper_triangular());
        assert!(check_algebra(&ut, &ut.0.labels(), 4, &r).passed());
        assert!(check_dgla_axioms(&ut.0, &ut.0.labels(), &r).passed());
        // a bracket violating Jacobi: [a,b] = c, [b,c] = a, others 0
        let mut bad = TableDgla::new(vec!["a".into(), "b".into(), "c".into()], vec![0, 0, 0]);
        bad.set_bracket(0, 1, Lin::basis(2));
        bad.set_bracket(1, 2, Lin::basis(0));
        bad.set_bracket(0, 2, Lin::basis(0));
        let c = check_algebra(&DglaLinf(bad.clone()), &bad.labels(), 4, &r);
        assert!(!c.passed());
        assert!(c.failures.iter().any(|f| f.witness.matches(',').count() == 2));
        assert!(!check_dgla_axioms(&bad, &bad.labels(), &r).passed());
    }
}
