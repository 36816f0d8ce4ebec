//! Brace expressions over Hochschild cochains and chains.
//!
//! `{e₁, …, e_n}` is a cyclic chain-valued expression, `φ{e₁, …}` inserts the
//! listed values among the arguments of φ. Atoms are `𝟙` (alias `one`), `in`
//! (the chain, alias of itself) and cochain symbols. The free letters
//! x₁ … x_k of the input chain fill every gap in cyclic order starting right
//! after `in`; the sign is the Koszul sign taking (symbols and 𝟙 in reading
//! order, x₀, …, x_k) to the order in which they are written out.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{Chain, Cochain, Elem, HChain, Hoch};
use crate::coeff::{Ring, Scalar};
use crate::graded::Lin;

#[derive(Debug, Error, PartialEq)]
pub enum BraceError {
    #[error("parse error at {0}: {1}")]
    Parse(usize, String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("a chain expression needs exactly one `in`, found {0}")]
    InCount(usize),
    #[error("`in` is not allowed in a cochain expression")]
    InInCochain,
    #[error("missing chain binding for `in`")]
    NoChain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    One,
    In,
    /// symbol with brace children; a bare symbol has none
    Sym(String, Vec<Node>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Cyclic(Vec<Node>),
    Apply(Node),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::One => write!(f, "𝟙"),
            Node::In => write!(f, "in"),
            Node::Sym(s, ch) if ch.is_empty() => write!(f, "{s}"),
            Node::Sym(s, ch) => {
                write!(f, "{s}{{")?;
                list(f, ch)?;
                write!(f, "}}")
            }
        }
    }
}

fn list(f: &mut fmt::Formatter<'_>, ch: &[Node]) -> fmt::Result {
    for (i, c) in ch.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{c}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Cyclic(items) => {
                write!(f, "{{")?;
                list(f, items)?;
                write!(f, "}}")
            }
            Expr::Apply(n) => write!(f, "{n}"),
        }
    }
}

// ---- parser ----

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || ('\u{2080}'..='\u{209c}').contains(&c) || c == '¹' || c == '²' || c == '³'
}

impl Parser {
    fn skip(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip();
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, BraceError> {
        Err(BraceError::Parse(self.pos, msg.into()))
    }

    fn expect(&mut self, c: char) -> Result<(), BraceError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn items(&mut self) -> Result<Vec<Node>, BraceError> {
        self.expect('{')?;
        let mut out = vec![];
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.node()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.err("expected `,` or `}`"),
            }
        }
    }

    fn node(&mut self) -> Result<Node, BraceError> {
        match self.peek() {
            Some('𝟙') => {
                self.pos += 1;
                Ok(Node::One)
            }
            Some(c) if ident_char(c) => {
                let start = self.pos;
                while self.pos < self.chars.len() && ident_char(self.chars[self.pos]) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match name.as_str() {
                    "in" => Ok(Node::In),
                    "one" => Ok(Node::One),
                    _ => {
                        let ch = if self.peek() == Some('{') { self.items()? } else { vec![] };
                        Ok(Node::Sym(name, ch))
                    }
                }
            }
            _ => self.err("expected an atom"),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, BraceError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0 };
    let e = if p.peek() == Some('{') { Expr::Cyclic(p.items()?) } else { Expr::Apply(p.node()?) };
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Canonical text: aliases resolved, `, ` separators.
pub fn normalize(text: &str) -> Result<String, BraceError> {
    Ok(parse(text)?.to_string())
}

// ---- evaluation ----

fn count_in(n: &Node) -> usize {
    match n {
        Node::In => 1,
        Node::One => 0,
        Node::Sym(_, ch) => ch.iter().map(count_in).sum(),
    }
}

/// Symbols and 𝟙 in reading order.
fn occurrences<'a>(n: &'a Node, out: &mut Vec<Option<&'a str>>) {
    match n {
        Node::One => out.push(None),
        Node::In => {}
        Node::Sym(s, ch) => {
            out.push(Some(s.as_str()));
            for c in ch {
                occurrences(c, out);
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Gap,
    In,
    Other,
}

fn marks(n: &Node, out: &mut Vec<Mark>) {
    match n {
        Node::One => out.push(Mark::Other),
        Node::In => out.push(Mark::In),
        Node::Sym(_, ch) => {
            out.push(Mark::Other);
            out.push(Mark::Gap);
            for c in ch {
                marks(c, out);
                out.push(Mark::Gap);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Arg {
    G(usize),
    Unit,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(left - a, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    if parts == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(total, parts, &mut vec![], &mut out);
    out
}

struct Walk<'a> {
    h: &'a Hoch,
    /// chosen elementary cochain per occurrence (None for 𝟙)
    elems: &'a [Option<&'a Elem>],
    /// letters of the input word; index 0 is x₀ for chains
    xs: &'a [usize],
    /// per gap id, the range of letter indices it receives
    gaps: &'a [(usize, usize)],
    occ: usize,
    gap: usize,
    /// reading order as reference indices: occurrences first, then letters
    written: Vec<usize>,
}

impl Walk<'_> {
    fn letter(&mut self, i: usize) {
        self.written.push(self.elems.len() + i);
    }

    fn take_gap(&mut self, args: &mut Vec<Arg>) {
        let (a, b) = self.gaps[self.gap];
        self.gap += 1;
        for i in a..b {
            self.letter(i);
            args.push(Arg::G(self.xs[i]));
        }
    }

    fn node(&mut self, n: &Node) -> Option<Arg> {
        match n {
            Node::One => {
                self.written.push(self.occ);
                self.occ += 1;
                Some(Arg::Unit)
            }
            Node::In => {
                self.letter(0);
                Some(Arg::G(self.xs[0]))
            }
            Node::Sym(_, ch) => {
                let o = self.occ;
                self.occ += 1;
                self.written.push(o);
                let mut args = vec![];
                self.take_gap(&mut args);
                for c in ch {
                    let v = self.node(c)?;
                    args.push(v);
                    self.take_gap(&mut args);
                }
                let e = self.elems[o]?;
                if e.inputs.len() != args.len() {
                    return None;
                }
                for (a, &g) in args.iter().zip(&e.inputs) {
                    let ok = match a {
                        Arg::G(x) => *x == g,
                        Arg::Unit => self.h.cat.is_unit(g),
                    };
                    if !ok {
                        return None;
                    }
                }
                Some(Arg::G(e.output))
            }
        }
    }
}

fn koszul(written: &[usize], degs: &[i32]) -> i32 {
    let mut s = 1;
    for i in 0..written.len() {
        for j in i + 1..written.len() {
            if written[i] > written[j] && degs[written[i]] % 2 != 0 && degs[written[j]] % 2 != 0 {
                s = -s;
            }
        }
    }
    s
}

/// All ways of choosing one term of each bound cochain per occurrence.
fn choices<'a>(
    occ: &[Option<&str>],
    bindings: &'a BTreeMap<String, Cochain>,
) -> Result<Vec<(Vec<Option<&'a Elem>>, Vec<&'a Scalar>)>, BraceError> {
    let mut acc: Vec<(Vec<Option<&Elem>>, Vec<&Scalar>)> = vec![(vec![], vec![])];
    for o in occ {
        match o {
            None => {
                for a in &mut acc {
                    a.0.push(None);
                }
            }
            Some(s) => {
                let c = bindings.get(*s).ok_or_else(|| BraceError::Unbound(s.to_string()))?;
                let mut next = vec![];
                for (es, cs) in &acc {
                    for (e, k) in c.iter() {
                        let mut es2 = es.clone();
                        es2.push(Some(e));
                        let mut cs2 = cs.clone();
                        cs2.push(k);
                        next.push((es2, cs2));
                    }
                }
                acc = next;
            }
        }
    }
    Ok(acc)
}

fn product(cs: &[&Scalar], extra: &Scalar, ring: &Ring) -> Scalar {
    cs.iter().fold(extra.clone(), |a, c| a.mul(c, &ring.policy))
}

/// Chain-valued evaluation of a cyclic expression on a chain.
pub fn eval_chain(h: &Hoch, expr: &Expr, bindings: &BTreeMap<String, Cochain>, x: &HChain, ring: &Ring) -> Result<HChain, BraceError> {
    let items = match expr {
        Expr::Cyclic(items) => items,
        Expr::Apply(_) => return Err(BraceError::InCount(0)),
    };
    let n_in: usize = items.iter().map(count_in).sum();
    if n_in != 1 {
        return Err(BraceError::InCount(n_in));
    }
    let mut occ = vec![];
    let mut mk = vec![];
    for it in items {
        occurrences(it, &mut occ);
        marks(it, &mut mk);
        mk.push(Mark::Gap);
    }
    let n_gaps = mk.iter().filter(|m| **m == Mark::Gap).count();
    // gap ids in cyclic reading order after `in`
    let in_pos = mk.iter().position(|m| *m == Mark::In).unwrap();
    let mut gap_at = vec![];
    {
        let mut g = 0;
        for (p, m) in mk.iter().enumerate() {
            if *m == Mark::Gap {
                gap_at.push((p, g));
                g += 1;
            }
        }
    }
    let mut order: Vec<usize> = gap_at.iter().filter(|(p, _)| *p > in_pos).map(|(_, g)| *g).collect();
    order.extend(gap_at.iter().filter(|(p, _)| *p < in_pos).map(|(_, g)| *g));

    let combos = choices(&occ, bindings)?;
    let mut out = Lin::zero();
    let cat = &h.cat;
    for (ch, c0) in x.iter() {
        let xs = &ch.0;
        let k = xs.len() - 1;
        for parts in compositions(k, n_gaps) {
            let mut gaps = vec![(0, 0); n_gaps];
            let mut next = 1;
            for (slot, &g) in order.iter().enumerate() {
                gaps[g] = (next, next + parts[slot]);
                next += parts[slot];
            }
            for (elems, cs) in &combos {
                let mut w = Walk { h, elems, xs, gaps: &gaps, occ: 0, gap: 0, written: vec![] };
                let mut vals = vec![];
                let mut dead = false;
                for it in items {
                    match w.node(it) {
                        Some(v) => vals.push(v),
                        None => {
                            dead = true;
                            break;
                        }
                    }
                    w.take_gap(&mut vals);
                }
                if dead {
                    continue;
                }
                let Some(word) = resolve_units(h, &vals) else { continue };
                if !cat.cyclic(&word) || !h.keep_chain(&word) {
                    continue;
                }
                let mut degs: Vec<i32> = elems.iter().map(|e| e.map_or(-1, |e| cat.elem_deg(e))).collect();
                degs.extend(xs.iter().map(|&g| cat.sd(g)));
                let s = koszul(&w.written, &degs);
                out.add_signed(Chain(word), &product(cs, c0, ring), s);
            }
        }
    }
    Ok(out)
}

/// Units take the object of the next letter, cyclically.
fn resolve_units(h: &Hoch, vals: &[Arg]) -> Option<Vec<usize>> {
    let n = vals.len();
    let anchor = vals.iter().position(|v| matches!(v, Arg::G(_)))?;
    let mut word = vec![0usize; n];
    word[anchor] = match vals[anchor] {
        Arg::G(g) => g,
        Arg::Unit => unreachable!(),
    };
    for step in 1..n {
        let i = (anchor + n - step) % n;
        let nxt = word[(i + 1) % n];
        word[i] = match vals[i] {
            Arg::G(g) => g,
            Arg::Unit => h.cat.unit_at(h.cat.src(nxt)),
        };
    }
    Some(word)
}

/// Cochain-valued evaluation, tabulated on composable words of length ≤ max_arity.
pub fn eval_cochain(h: &Hoch, expr: &Expr, bindings: &BTreeMap<String, Cochain>, max_arity: usize, ring: &Ring) -> Result<Cochain, BraceError> {
    let node = match expr {
        Expr::Apply(n) => n,
        Expr::Cyclic(_) => return Err(BraceError::InCount(0)),
    };
    if count_in(node) > 0 {
        return Err(BraceError::InInCochain);
    }
    let mut occ = vec![];
    occurrences(node, &mut occ);
    let mut mk = vec![];
    marks(node, &mut mk);
    let n_gaps = mk.iter().filter(|m| **m == Mark::Gap).count();
    let combos = choices(&occ, bindings)?;
    let cat = &h.cat;
    let mut out = Lin::zero();
    for len in 0..=max_arity {
        for word in cat.composable_words(len, !h.reduced) {
            // letters are indexed from 1 so that reference slot 0 stays unused
            let mut xs = vec![usize::MAX];
            xs.extend_from_slice(&word);
            for parts in compositions(len, n_gaps) {
                let mut gaps = vec![];
                let mut next = 1;
                for p in &parts {
                    gaps.push((next, next + p));
                    next += p;
                }
                for (elems, cs) in &combos {
                    let mut w = Walk { h, elems, xs: &xs, gaps: &gaps, occ: 0, gap: 0, written: vec![] };
                    let Some(Arg::G(v)) = w.node(node) else { continue };
                    let e = Elem { inputs: word.clone(), output: v };
                    if !cat.elem_valid(&e) || (h.reduced && !cat.elem_reduced(&e)) {
                        continue;
                    }
                    let mut degs: Vec<i32> = elems.iter().map(|e| e.map_or(-1, |e| cat.elem_deg(e))).collect();
                    degs.push(0);
                    degs.extend(word.iter().map(|&g| cat.sd(g)));
                    let s = koszul(&w.written, &degs);
                    out.add_signed(e, &product(cs, &Scalar::one(), ring), s);
                }
            }
        }
    }
    Ok(out)
}

pub enum BraceValue {
    Chain(HChain),
    Cochain(Cochain),
}

pub fn eval(
    h: &Hoch,
    text: &str,
    bindings: &BTreeMap<String, Cochain>,
    x: Option<&HChain>,
    max_arity: usize,
    ring: &Ring,
) -> Result<BraceValue, BraceError> {
    let e = parse(text)?;
    match &e {
        Expr::Cyclic(_) => Ok(BraceValue::Chain(eval_chain(h, &e, bindings, x.ok_or(BraceError::NoChain)?, ring)?)),
        Expr::Apply(_) => Ok(BraceValue::Cochain(eval_cochain(h, &e, bindings, max_arity, ring)?)),
    }
}

/// Chain-valued evaluation from text; panics-free wrapper used by the suite.
pub fn chain(h: &Hoch, text: &str, bindings: &BTreeMap<String, Cochain>, x: &HChain, ring: &Ring) -> Result<HChain, BraceError> {
    eval_chain(h, &parse(text)?, bindings, x, ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoch::{a2, kx2, Category};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring() -> Ring {
        Ring::plain().with_z_order(3)
    }

    #[test]
    fn grammar() {
        let e = parse("{𝟙, φ, in}").unwrap();
        match &e {
            Expr::Cyclic(v) => assert_eq!(v.len(), 3),
            _ => panic!(),
        }
        assert_eq!(normalize("{ one ,phi{psi,in} }").unwrap(), "{𝟙, phi{psi, in}}");
        for s in ["{𝟙, φ{ψ, in}}", "φ{ψ}", "{in, φ}", "{φ{in}}"] {
            assert_eq!(normalize(s).unwrap(), s);
        }
        assert!(matches!(parse("{φ{ψ, in}"), Err(BraceError::Parse(..))));
        assert!(matches!(parse("{φ,,in}"), Err(BraceError::Parse(..))));
        assert!(matches!(parse("{φ} x"), Err(BraceError::Parse(..))));
    }

    fn bindings(h: &Hoch, rng: &mut ChaCha8Rng, basis: &[Elem]) -> BTreeMap<String, Cochain> {
        let mut b = BTreeMap::new();
        for s in ["φ", "ψ", "χ"] {
            b.insert(s.to_string(), h.random_cochain(rng, basis));
        }
        b
    }

    fn check_dictionary(cat: Category) {
        let r = ring();
        let h = Hoch::new(cat.clone());
        let ys = cat.elem_basis(3, true);
        let ms = cat.chain_basis(4, true);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let b = bindings(&h, &mut rng, &ys);
            let x = h.random_chain(&mut rng, &ms);
            let (phi, psi) = (&b["φ"], &b["ψ"]);
            assert_eq!(chain(&h, "{one, in}", &b, &x, &r).unwrap(), h.connes_b(&x, &r));
            let lie = chain(&h, "{in, φ}", &b, &x, &r).unwrap().plus(&chain(&h, "{φ{in}}", &b, &x, &r).unwrap());
            assert_eq!(lie, h.lie(phi, &x, &r));
            assert_eq!(chain(&h, "{φ{ψ, in}}", &b, &x, &r).unwrap(), h.rho(phi, psi, &x, &r));
            assert_eq!(chain(&h, "{𝟙, φ, in}", &b, &x, &r).unwrap(), h.connes_b1(phi, &x, &r));
            let circ = eval_cochain(&h, &parse("φ{ψ}").unwrap(), &b, 6, &r).unwrap();
            assert_eq!(circ, h.circ(phi, psi, &r));
        }
    }

    #[test]
    fn dictionary_kx2() {
        check_dictionary(kx2(&ring()));
    }

    #[test]
    fn dictionary_a2() {
        check_dictionary(a2(&ring()));
    }

    #[test]
    fn unbound_and_in_errors() {
        let r = ring();
        let h = Hoch::new(kx2(&r));
        let b = BTreeMap::new();
        let x = Lin::basis(Chain(vec![1]));
        assert_eq!(chain(&h, "{φ, in}", &b, &x, &r), Err(BraceError::Unbound("φ".into())));
        assert_eq!(chain(&h, "{𝟙}", &b, &x, &r), Err(BraceError::InCount(0)));
        assert!(matches!(eval(&h, "φ{in}", &b, None, 3, &r), Err(BraceError::InInCochain)));
    }
}
