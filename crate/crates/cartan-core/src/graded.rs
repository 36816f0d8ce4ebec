//! Graded bases, linear combinations, shuffles and the Koszul sign engine.
//!
//! Every reordering sign in the crate is computed by [`koszul_sign`] or one of the
//! helpers below that call it.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{Ring, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradedError {
    #[error("length mismatch: permutation of {0} slots, {1} degrees")]
    LengthMismatch(usize, usize),
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
}

/// Anything that can index a basis vector.
pub trait Label: Ord + Clone + Debug + Send + Sync {}
impl<T: Ord + Clone + Debug + Send + Sync> Label for T {}

pub fn sign_of(parity: i64) -> i32 {
    if parity.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// ε(σ) with x₁⊙…⊙x_k = ε(σ) x_{σ(1)}⊙…⊙x_{σ(k)}; `perm[i] = σ(i+1)-1`.
pub fn koszul_sign(perm: &[usize], degrees: &[i32]) -> Result<i32, GradedError> {
    if perm.len() != degrees.len() {
        return Err(GradedError::LengthMismatch(perm.len(), degrees.len()));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(GradedError::NotAPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(koszul_unchecked(perm, degrees))
}

pub(crate) fn koszul_unchecked(perm: &[usize], degrees: &[i32]) -> i32 {
    let mut inv = 0i64;
    for i in 0..perm.len() {
        if degrees[perm[i]] % 2 == 0 {
            continue;
        }
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] && degrees[perm[j]] % 2 != 0 {
                inv += 1;
            }
        }
    }
    sign_of(inv)
}

/// Sign of moving the slots `chosen` (in order) to the front of a word.
pub fn front_sign(chosen: &[usize], degrees: &[i32]) -> i32 {
    let mut perm: Vec<usize> = chosen.to_vec();
    let mut mark = vec![false; degrees.len()];
    for &c in chosen {
        mark[c] = true;
    }
    perm.extend((0..degrees.len()).filter(|i| !mark[*i]));
    koszul_unchecked(&perm, degrees)
}

/// Composition of permutations in list form: (a ∘ b)[i] = a[b[i]].
pub fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

pub fn permute<T: Clone>(perm: &[usize], xs: &[T]) -> Vec<T> {
    perm.iter().map(|&i| xs[i].clone()).collect()
}

/// All permutations of 0..k in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = vec![];
    rec(&mut vec![], &mut vec![false; k], &mut out);
    out
}

/// ε(σ∘τ; d) = ε(σ; d)·ε(τ; σ·d) over all pairs in S_k, k = degrees.len().
pub fn koszul_composition_check(degrees: &[i32]) -> crate::report::Check {
    let mut chk = crate::report::Check::new("koszul-composition");
    let perms = permutations(degrees.len());
    for a in &perms {
        let sa = koszul_unchecked(a, degrees);
        let da = permute(a, degrees);
        for b in &perms {
            let lhs = koszul_unchecked(&compose(a, b), degrees);
            let rhs = sa * koszul_unchecked(b, &da);
            chk.record_bool(|| format!("{a:?} o {b:?} on {degrees:?}"), lhs == rhs, || format!("{lhs} vs {rhs}"));
        }
    }
    chk
}

/// The composition law on `trials` random degree lists of length ≤ `max_k`,
/// degrees in [-3, 3].
pub fn koszul_suite(seed: u64, trials: usize, max_k: usize) -> crate::report::Check {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut chk = crate::report::Check::new("koszul-composition").with_stamp(format!("exact, k <= {max_k}, {trials} degree lists"));
    for _ in 0..trials {
        let k = rng.gen_range(0..=max_k);
        let d: Vec<i32> = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
        chk.merge(koszul_composition_check(&d));
    }
    chk
}

/// All (i₁,…,i_l)-shuffles, as lists σ(1..k) (0-based).
pub fn enumerate_shuffles(blocks: &[usize]) -> Vec<Vec<usize>> {
    let k: usize = blocks.iter().sum();
    // Assign each value of {0..k} to a block; values inside a block are increasing.
    let mut out = vec![];
    let mut assign = vec![0usize; k];
    let mut remaining = blocks.to_vec();
    fn rec(v: usize, k: usize, remaining: &mut Vec<usize>, assign: &mut Vec<usize>, blocks: &[usize], out: &mut Vec<Vec<usize>>) {
        if v == k {
            let mut offsets = vec![0usize; blocks.len()];
            let mut acc = 0;
            for (b, &sz) in blocks.iter().enumerate() {
                offsets[b] = acc;
                acc += sz;
            }
            let mut sigma = vec![0usize; k];
            let mut fill = offsets.clone();
            for (value, &b) in assign.iter().enumerate() {
                sigma[fill[b]] = value;
                fill[b] += 1;
            }
            out.push(sigma);
            return;
        }
        for b in 0..remaining.len() {
            if remaining[b] > 0 {
                remaining[b] -= 1;
                assign[v] = b;
                rec(v + 1, k, remaining, assign, blocks, out);
                remaining[b] += 1;
            }
        }
    }
    rec(0, k, &mut remaining, &mut assign, blocks, &mut out);
    out
}

pub fn is_shuffle(perm: &[usize], blocks: &[usize]) -> bool {
    let mut pos = 0;
    for &b in blocks {
        for i in pos + 1..pos + b {
            if perm[i - 1] > perm[i] {
                return false;
            }
        }
        pos += b;
    }
    pos == perm.len()
}

/// (p, q)-splits of a word: every subset of size p as front, with its shuffle sign.
pub fn splits(degrees: &[i32], p: usize) -> Vec<(Vec<usize>, Vec<usize>, i32)> {
    let k = degrees.len();
    let mut out = vec![];
    let mut front = Vec::with_capacity(p);
    fn rec(start: usize, k: usize, p: usize, front: &mut Vec<usize>, degrees: &[i32], out: &mut Vec<(Vec<usize>, Vec<usize>, i32)>) {
        if front.len() == p {
            let rest: Vec<usize> = (0..k).filter(|i| !front.contains(i)).collect();
            out.push((front.clone(), rest, front_sign(front, degrees)));
            return;
        }
        for i in start..k {
            if k - i < p - front.len() {
                break;
            }
            front.push(i);
            rec(i + 1, k, p, front, degrees, out);
            front.pop();
        }
    }
    rec(0, k, p, &mut front, degrees, &mut out);
    out
}

/// Unordered set partitions of {0..k} into nonempty blocks, blocks ordered by
/// their least element, each with the Koszul sign of the block concatenation.
pub fn set_partitions(degrees: &[i32]) -> Vec<(Vec<Vec<usize>>, i32)> {
    let k = degrees.len();
    let mut out = vec![];
    let mut blocks: Vec<Vec<usize>> = vec![];
    fn rec(i: usize, k: usize, blocks: &mut Vec<Vec<usize>>, degrees: &[i32], out: &mut Vec<(Vec<Vec<usize>>, i32)>) {
        if i == k {
            let perm: Vec<usize> = blocks.iter().flatten().cloned().collect();
            out.push((blocks.clone(), koszul_unchecked(&perm, degrees)));
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, k, blocks, degrees, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, k, blocks, degrees, out);
        blocks.pop();
    }
    rec(0, k, &mut blocks, degrees, &mut out);
    out
}

/// Sorts a symmetric word; returns None when a repeated odd label forces zero.
pub fn canonicalize<B: Label>(word: &[B], degree: impl Fn(&B) -> i32) -> Option<(Vec<B>, i32)> {
    let degs: Vec<i32> = word.iter().map(&degree).collect();
    let mut idx: Vec<usize> = (0..word.len()).collect();
    idx.sort_by(|&a, &b| word[a].cmp(&word[b]).then(a.cmp(&b)));
    for w in idx.windows(2) {
        if word[w[0]] == word[w[1]] && degs[w[0]] % 2 != 0 {
            return None;
        }
    }
    let sign = koszul_unchecked(&idx, &degs);
    Some((permute(&idx, word), sign))
}

/// Finite Scalar-linear combination of basis labels.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lin<B: Label> {
    terms: BTreeMap<B, Scalar>,
}

impl<B: Label> Default for Lin<B> {
    fn default() -> Self {
        Lin { terms: BTreeMap::new() }
    }
}

impl<B: Label> Debug for Lin<B> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(b, c)| format!("({c})·{b:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<B: Label> Lin<B> {
    pub fn zero() -> Self {
        Lin::default()
    }

    pub fn basis(b: B) -> Self {
        Lin::term(b, Scalar::one())
    }

    pub fn term(b: B, c: Scalar) -> Self {
        let mut l = Lin::zero();
        l.add_term(b, c);
        l
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&B, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, b: &B) -> Scalar {
        self.terms.get(b).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, b: B, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    pub fn add_signed(&mut self, b: B, c: &Scalar, sign: i32) {
        self.add_term(b, c.signed(sign));
    }

    pub fn add_assign(&mut self, o: &Lin<B>) {
        for (b, c) in &o.terms {
            self.add_term(b.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &Lin<B>, c: &Scalar, ring: &Ring) {
        if c.is_zero() {
            return;
        }
        for (b, x) in &o.terms {
            self.add_term(b.clone(), x.mul(c, &ring.policy));
        }
    }

    pub fn add_with_sign(&mut self, o: &Lin<B>, sign: i32) {
        for (b, c) in &o.terms {
            self.add_term(b.clone(), c.signed(sign));
        }
    }

    pub fn plus(&self, o: &Lin<B>) -> Lin<B> {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn minus(&self, o: &Lin<B>) -> Lin<B> {
        let mut r = self.clone();
        r.add_with_sign(o, -1);
        r
    }

    pub fn neg(&self) -> Lin<B> {
        self.signed(-1)
    }

    pub fn signed(&self, sign: i32) -> Lin<B> {
        if sign >= 0 {
            return self.clone();
        }
        Lin { terms: self.terms.iter().map(|(b, c)| (b.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, c: &Scalar, ring: &Ring) -> Lin<B> {
        let mut r = Lin::zero();
        r.add_scaled(self, c, ring);
        r
    }

    pub fn truncate(&self, ring: &Ring) -> Lin<B> {
        let mut r = Lin::zero();
        for (b, c) in &self.terms {
            r.add_term(b.clone(), c.truncate(&ring.policy));
        }
        r
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Lin<B> {
        let mut r = Lin::zero();
        for (b, c) in &self.terms {
            r.add_term(b.clone(), f(c));
        }
        r
    }

    /// Linear extension of a basis map.
    pub fn map_linear<C: Label>(&self, ring: &Ring, f: impl Fn(&B) -> Lin<C>) -> Lin<C> {
        let mut r = Lin::zero();
        for (b, c) in &self.terms {
            let img = f(b);
            r.add_scaled(&img, c, ring);
        }
        r
    }

    pub fn relabel<C: Label>(&self, f: impl Fn(&B) -> C) -> Lin<C> {
        let mut r = Lin::zero();
        for (b, c) in &self.terms {
            r.add_term(f(b), c.clone());
        }
        r
    }

    pub fn retain(&mut self, f: impl Fn(&B) -> bool) {
        self.terms.retain(|b, _| f(b));
    }

    pub fn labels(&self) -> Vec<B> {
        self.terms.keys().cloned().collect()
    }

    pub fn into_vec(self) -> Vec<(B, Scalar)> {
        self.terms.into_iter().collect()
    }
}

impl<B: Label> FromIterator<(B, Scalar)> for Lin<B> {
    fn from_iter<I: IntoIterator<Item = (B, Scalar)>>(iter: I) -> Self {
        let mut l = Lin::zero();
        for (b, c) in iter {
            l.add_term(b, c);
        }
        l
    }
}

/// Multilinear expansion of a map on basis tuples over a list of elements.
pub fn expand_multilinear<B: Label, C: Label>(
    args: &[Lin<B>],
    ring: &Ring,
    mut f: impl FnMut(&[B]) -> Lin<C>,
) -> Lin<C> {
    let mut out = Lin::zero();
    let mut current: Vec<B> = Vec::with_capacity(args.len());
    fn rec<B: Label, C: Label>(
        i: usize,
        coeff: Scalar,
        args: &[Lin<B>],
        current: &mut Vec<B>,
        ring: &Ring,
        f: &mut dyn FnMut(&[B]) -> Lin<C>,
        out: &mut Lin<C>,
    ) {
        if i == args.len() {
            let v = f(current);
            out.add_scaled(&v, &coeff, ring);
            return;
        }
        for (b, c) in args[i].iter() {
            let c2 = coeff.mul(c, &ring.policy);
            if c2.is_zero() {
                continue;
            }
            current.push(b.clone());
            rec(i + 1, c2, args, current, ring, f, out);
            current.pop();
        }
    }
    rec(0, Scalar::one(), args, &mut current, ring, &mut f, &mut out);
    out
}

// ---- graded bases and suspension ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub degree: i32,
}

/// Finite homogeneous basis; `shift` is 0 for V and 1 for V[1].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedBasis {
    pub generators: Vec<Generator>,
    pub shift: i32,
}

impl GradedBasis {
    pub fn new(generators: Vec<Generator>, shift: i32) -> Result<GradedBasis, GradedError> {
        let mut ids: Vec<&str> = generators.iter().map(|g| g.id.as_str()).collect();
        ids.sort();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return Err(GradedError::DuplicateGenerator(w[0].to_string()));
            }
        }
        Ok(GradedBasis { generators, shift })
    }

    /// Degree of a generator in the (possibly shifted) space.
    pub fn degree(&self, i: usize) -> i32 {
        self.generators[i].degree - self.shift
    }

    pub fn shifted(&self, by: i32) -> GradedBasis {
        GradedBasis { generators: self.generators.clone(), shift: self.shift + by }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Element on a [`GradedBasis`], indexed by generator position.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedElement {
    pub basis: GradedBasis,
    pub coeffs: Lin<usize>,
}

/// s: V → V[1] with r·s(v) = (−1)^{|r|} s(r·v); `parity` gives |r| mod 2 of a coefficient.
pub fn suspend_with_parity(x: &GradedElement, dir: Direction, parity: impl Fn(&Scalar) -> i32) -> GradedElement {
    let basis = match dir {
        Direction::Up => x.basis.shifted(1),
        Direction::Down => x.basis.shifted(-1),
    };
    let coeffs = x.coeffs.map_coeffs(|c| c.signed(sign_of(parity(c) as i64)));
    GradedElement { basis, coeffs }
}

/// Suspension using coefficient degrees from the ring (all even in supported rings).
pub fn suspend(x: &GradedElement, dir: Direction, ring: &Ring) -> GradedElement {
    suspend_with_parity(x, dir, |c| c.degree(ring).unwrap_or(0).rem_euclid(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_perms(k: usize) -> Vec<Vec<usize>> {
        fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, k: usize, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in 0..k {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    rec(cur, used, k, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = vec![];
        rec(&mut vec![], &mut vec![false; k], k, &mut out);
        out
    }

    #[test]
    fn koszul_small_cases() {
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 3, 5]).unwrap(), 1);
        assert_eq!(koszul_sign(&[1, 0], &[1, 1]).unwrap(), -1);
        assert_eq!(koszul_sign(&[1, 0], &[1, 2]).unwrap(), 1);
        assert!(koszul_sign(&[0, 0], &[1, 1]).is_err());
        assert!(koszul_sign(&[0, 1], &[1]).is_err());
    }

    #[test]
    fn three_cycle_matches_transpositions() {
        let d = [1, 1, 0];
        let cycle = [1, 2, 0];
        // (x1,x2,x3) -> (x2,x1,x3) -> (x2,x3,x1)
        let t1 = [1, 0, 2];
        let t2 = [0, 2, 1];
        let s1 = koszul_sign(&t1, &d).unwrap();
        let d1 = permute(&t1, &d);
        let s2 = koszul_sign(&t2, &d1).unwrap();
        assert_eq!(compose(&t1, &t2), cycle.to_vec());
        assert_eq!(koszul_sign(&cycle, &d).unwrap(), s1 * s2);
    }

    #[test]
    fn shuffle_counts() {
        assert_eq!(enumerate_shuffles(&[1, 1]).len(), 2);
        assert_eq!(enumerate_shuffles(&[2, 1]).len(), 3);
        fn binom(n: usize, k: usize) -> usize {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        for p in 0..=7 {
            for q in 0..=(7 - p) {
                assert_eq!(enumerate_shuffles(&[p, q]).len(), binom(p + q, p), "({p},{q})");
            }
        }
    }

    #[test]
    fn shuffle_membership_partitions_symmetric_group() {
        for (p, q) in [(1, 2), (2, 2), (3, 1)] {
            let sh = enumerate_shuffles(&[p, q]);
            let members = all_perms(p + q).into_iter().filter(|s| is_shuffle(s, &[p, q])).count();
            assert_eq!(members, sh.len());
            assert!(sh.iter().all(|s| is_shuffle(s, &[p, q])));
        }
    }

    #[test]
    fn splits_agree_with_shuffles() {
        let d = [1, 0, 1, 1];
        for p in 0..=4 {
            let a = splits(&d, p);
            let b = enumerate_shuffles(&[p, 4 - p]);
            assert_eq!(a.len(), b.len());
            for (front, rest, s) in a {
                let sigma: Vec<usize> = front.iter().chain(rest.iter()).cloned().collect();
                assert_eq!(koszul_sign(&sigma, &d).unwrap(), s);
            }
        }
    }

    #[test]
    fn canonical_words() {
        let deg = |b: &u8| *b as i32;
        assert_eq!(canonicalize(&[3u8, 1], deg), Some((vec![1, 3], -1)));
        assert_eq!(canonicalize(&[1u8, 1], deg), None);
        assert_eq!(canonicalize(&[2u8, 2], deg), Some((vec![2, 2], 1)));
        let (w, _) = canonicalize(&[5u8, 2, 3], deg).unwrap();
        assert_eq!(canonicalize(&w, deg), Some((w.clone(), 1)));
    }

    #[test]
    fn set_partition_counts() {
        // Bell numbers
        assert_eq!(set_partitions(&[0; 3]).len(), 5);
        assert_eq!(set_partitions(&[0; 4]).len(), 15);
    }

    #[test]
    fn suspension_shifts_and_round_trips() {
        let ring = Ring::plain();
        let basis = GradedBasis::new(vec![Generator { id: "v".into(), degree: 3 }], 0).unwrap();
        assert_eq!(basis.shifted(1).degree(0), 2);
        let x = GradedElement { basis: basis.clone(), coeffs: Lin::term(0usize, Scalar::from_int(5)) };
        let up = suspend(&x, Direction::Up, &ring);
        assert_eq!(up.basis.degree(0), 2);
        assert_eq!(suspend(&up, Direction::Down, &ring), x);
        // an odd coefficient picks up the sign
        let odd = suspend_with_parity(&x, Direction::Up, |_| 1);
        assert_eq!(odd.coeffs.coeff(&0), Scalar::from_int(-5));
    }
}
