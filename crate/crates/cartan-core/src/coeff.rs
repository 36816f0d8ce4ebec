//! Truncated coefficient tower: rationals, Novikov energy T^λ, the Laurent
//! variable e, the formal variable z and a few declared t-variables.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Q = Ratio<i128>;

/// Maximal number of t-variables a ring may declare.
pub const MAX_T: usize = 4;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qr(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoeffError {
    #[error("ring mismatch: {0}")]
    TagMismatch(String),
    #[error("negative energy {0} under a Lambda_0 ring")]
    NegativeEnergy(Q),
    #[error("parse error at `{0}`: {1}")]
    Parse(String, String),
    #[error("not invertible at the active truncation: {0}")]
    NotInvertible(String),
    #[error("invalid ring declaration: {0}")]
    BadRing(String),
}

/// A monomial T^energy e^e z^z t^t.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Mono {
    pub z: u32,
    pub t: [u16; MAX_T],
    pub energy: Q,
    pub e: i32,
}

impl Mono {
    pub fn one() -> Mono {
        Mono { z: 0, t: [0; MAX_T], energy: Q::zero(), e: 0 }
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut t = self.t;
        for i in 0..MAX_T {
            t[i] += o.t[i];
        }
        Mono { z: self.z + o.z, t, energy: self.energy + o.energy, e: self.e + o.e }
    }

    pub fn t_total(&self) -> u32 {
        self.t.iter().map(|&a| a as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        *self == Mono::one()
    }
}

/// Truncation bounds. Upper bounds are exclusive, the e-window is inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub z_order: u32,
    pub energy_cut: Q,
    pub t_order: u32,
    pub e_window: (i32, i32),
}

impl Policy {
    pub fn keeps(&self, m: &Mono) -> bool {
        m.z < self.z_order
            && m.energy < self.energy_cut
            && m.t_total() < self.t_order
            && m.e >= self.e_window.0
            && m.e <= self.e_window.1
    }

    /// Componentwise comparison: `self` retains no more than `other`.
    pub fn coarser_than(&self, other: &Policy) -> bool {
        self.z_order <= other.z_order
            && self.energy_cut <= other.energy_cut
            && self.t_order <= other.t_order
            && self.e_window.0 >= other.e_window.0
            && self.e_window.1 <= other.e_window.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficients {
    /// Λ₀: only non-negative energies are admitted.
    Lambda0,
    /// Λ: the Novikov field.
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TVar {
    pub name: String,
    pub degree: i32,
}

/// Ring context passed to all arithmetic: policy, declared variables and norm constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    pub policy: Policy,
    pub tvars: Vec<TVar>,
    pub norm_c: Q,
    pub coeffs: Coefficients,
}

impl Ring {
    pub fn new(policy: Policy, tvars: Vec<TVar>) -> Result<Ring, CoeffError> {
        Ring::with_norm(policy, tvars, q(2))
    }

    pub fn with_norm(policy: Policy, tvars: Vec<TVar>, norm_c: Q) -> Result<Ring, CoeffError> {
        if tvars.len() > MAX_T {
            return Err(CoeffError::BadRing(format!("at most {MAX_T} t-variables")));
        }
        if norm_c <= q(1) {
            return Err(CoeffError::BadRing("norm constant must exceed 1".into()));
        }
        if policy.e_window.0 > policy.e_window.1 {
            return Err(CoeffError::BadRing("empty e-window".into()));
        }
        if policy.energy_cut < Q::zero() {
            return Err(CoeffError::BadRing("negative energy cut".into()));
        }
        for v in &tvars {
            if v.degree % 2 != 0 {
                return Err(CoeffError::BadRing(format!(
                    "t-variable `{}` has odd degree {}; only even variables are supported",
                    v.name, v.degree
                )));
            }
        }
        let mut names: Vec<&str> = tvars.iter().map(|v| v.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != tvars.len() {
            return Err(CoeffError::BadRing("duplicate t-variable names".into()));
        }
        Ok(Ring { policy, tvars, norm_c, coeffs: Coefficients::Lambda })
    }

    /// A roomy ring with no t-variables, handy for tests.
    pub fn plain() -> Ring {
        Ring::new(
            Policy { z_order: 6, energy_cut: q(8), t_order: 6, e_window: (-16, 16) },
            vec![],
        )
        .unwrap()
    }

    pub fn with_policy(&self, policy: Policy) -> Ring {
        Ring { policy, ..self.clone() }
    }

    pub fn with_t_order(&self, t_order: u32) -> Ring {
        let mut p = self.policy.clone();
        p.t_order = t_order;
        self.with_policy(p)
    }

    pub fn with_z_order(&self, z_order: u32) -> Ring {
        let mut p = self.policy.clone();
        p.z_order = z_order;
        self.with_policy(p)
    }

    pub fn with_coeffs(&self, coeffs: Coefficients) -> Ring {
        Ring { coeffs, ..self.clone() }
    }

    pub fn t_index(&self, name: &str) -> Option<usize> {
        self.tvars.iter().position(|v| v.name == name)
    }

    pub fn mono_degree(&self, m: &Mono) -> i32 {
        let mut d = 2 * m.e + 2 * m.z as i32;
        for (i, v) in self.tvars.iter().enumerate() {
            d += v.degree * m.t[i] as i32;
        }
        d
    }

    /// Degree of a monomial with z excluded (the R-part).
    pub fn mono_degree_r(&self, m: &Mono) -> i32 {
        self.mono_degree(m) - 2 * m.z as i32
    }

    /// Checked membership for the active coefficient choice.
    pub fn admits(&self, s: &Scalar) -> Result<(), CoeffError> {
        if self.coeffs == Coefficients::Lambda0 {
            for (m, _) in &s.terms {
                if m.energy < Q::zero() {
                    return Err(CoeffError::NegativeEnergy(m.energy));
                }
            }
        }
        Ok(())
    }
}

/// Subring a value lies in, derived from its content.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RingTag {
    Rational,
    Lambda0,
    Lambda,
    LaurentE,
    PowerZ,
    PowerT,
}

/// Element of the truncated tower, stored as sorted (monomial, coefficient) pairs.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Scalar {
    terms: Vec<(Mono, Q)>,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar { terms: vec![] }
    }

    pub fn one() -> Scalar {
        Scalar::from_q(q(1))
    }

    pub fn from_q(c: Q) -> Scalar {
        Scalar::term(c, Mono::one())
    }

    pub fn from_int(n: i128) -> Scalar {
        Scalar::from_q(q(n))
    }

    pub fn term(c: Q, m: Mono) -> Scalar {
        if c.is_zero() {
            Scalar::zero()
        } else {
            Scalar { terms: vec![(m, c)] }
        }
    }

    /// Builds from arbitrary pairs, merges duplicates and applies the policy.
    pub fn from_terms(pairs: impl IntoIterator<Item = (Mono, Q)>, p: &Policy) -> Scalar {
        let mut v: Vec<(Mono, Q)> = pairs.into_iter().filter(|(m, c)| !c.is_zero() && p.keeps(m)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Mono, Q)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Scalar { terms: out }
    }

    pub fn terms(&self) -> &[(Mono, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    /// The rational constant if the value is one.
    pub fn as_q(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(*c),
            _ => None,
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            match self.terms[i].0.cmp(&o.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.terms[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.terms[i].1 + o.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&o.terms[j..]);
        Scalar { terms: out }
    }

    pub fn add_assign(&mut self, o: &Scalar) {
        if o.is_zero() {
            return;
        }
        *self = self.add(o);
    }

    pub fn neg(&self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|(m, c)| (*m, -*c)).collect() }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: Q) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar { terms: self.terms.iter().map(|(m, a)| (*m, *a * c)).collect() }
    }

    pub fn signed(&self, sign: i32) -> Scalar {
        if sign >= 0 {
            self.clone()
        } else {
            self.neg()
        }
    }

    pub fn mul(&self, o: &Scalar, p: &Policy) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if let Some(c) = o.as_q() {
            return self.scale(c);
        }
        if let Some(c) = self.as_q() {
            return o.scale(c);
        }
        let mut pairs = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = m1.mul(m2);
                if p.keeps(&m) {
                    pairs.push((m, *c1 * *c2));
                }
            }
        }
        Scalar::from_terms(pairs, p)
    }

    pub fn pow(&self, n: u32, p: &Policy) -> Scalar {
        let mut r = Scalar::one();
        for _ in 0..n {
            r = r.mul(self, p);
        }
        r
    }

    pub fn truncate(&self, p: &Policy) -> Scalar {
        Scalar { terms: self.terms.iter().filter(|(m, _)| p.keeps(m)).cloned().collect() }
    }

    /// The homogeneous degree, if every term has the same degree.
    pub fn degree(&self, ring: &Ring) -> Option<i32> {
        let mut d = None;
        for (m, _) in &self.terms {
            let dm = ring.mono_degree(m);
            match d {
                None => d = Some(dm),
                Some(x) if x != dm => return None,
                _ => {}
            }
        }
        d
    }

    pub fn is_homogeneous(&self, ring: &Ring) -> bool {
        self.is_zero() || self.degree(ring).is_some()
    }

    pub fn tag(&self) -> RingTag {
        let mut tag = RingTag::Rational;
        for (m, _) in &self.terms {
            let here = if m.t_total() > 0 {
                RingTag::PowerT
            } else if m.z > 0 {
                RingTag::PowerZ
            } else if m.e != 0 {
                RingTag::LaurentE
            } else if m.energy < Q::zero() {
                RingTag::Lambda
            } else if m.energy > Q::zero() {
                RingTag::Lambda0
            } else {
                RingTag::Rational
            };
            tag = tag.max(here);
        }
        tag
    }

    /// Applies a monomial-wise linear map (used by derivations).
    pub fn map_terms(&self, p: &Policy, f: impl Fn(&Mono, Q) -> Option<(Mono, Q)>) -> Scalar {
        Scalar::from_terms(self.terms.iter().filter_map(|(m, c)| f(m, *c)), p)
    }

    /// ∂/∂t_i.
    pub fn d_t(&self, i: usize, p: &Policy) -> Scalar {
        self.map_terms(p, |m, c| {
            if m.t[i] == 0 {
                None
            } else {
                let mut m2 = *m;
                m2.t[i] -= 1;
                Some((m2, c * q(m.t[i] as i128)))
            }
        })
    }

    /// e·d/de.
    pub fn e_de(&self, p: &Policy) -> Scalar {
        self.map_terms(p, |m, c| Some((*m, c * q(m.e as i128))))
    }

    /// d/dz.
    pub fn d_z(&self, p: &Policy) -> Scalar {
        self.map_terms(p, |m, c| {
            if m.z == 0 {
                None
            } else {
                let mut m2 = *m;
                m2.z -= 1;
                Some((m2, c * q(m.z as i128)))
            }
        })
    }

    /// Euler field of R on coefficients: ½|r|_R r, with z untouched.
    pub fn euler(&self, ring: &Ring) -> Scalar {
        self.map_terms(&ring.policy, |m, c| Some((*m, c * qr(ring.mono_degree_r(m) as i128, 2))))
    }

    /// Multiplies by z^k (exact, then truncated).
    pub fn shift_z(&self, k: u32, p: &Policy) -> Scalar {
        self.map_terms(p, |m, c| {
            let mut m2 = *m;
            m2.z += k;
            Some((m2, c))
        })
    }

    /// The coefficient of z^k, as a z-free scalar.
    pub fn z_coeff(&self, k: u32) -> Scalar {
        Scalar {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.z == k)
                .map(|(m, c)| {
                    let mut m2 = *m;
                    m2.z = 0;
                    (m2, *c)
                })
                .collect(),
        }
    }

    pub fn max_z(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.z).max().unwrap_or(0)
    }

    /// Non-archimedean norm as a comparable pair.
    pub fn norm(&self) -> Norm {
        let mut best = Norm::Zero;
        for (m, _) in &self.terms {
            let n = Norm::Val { energy: m.energy, tweight: m.t_total() };
            best = best.max_with(n, None);
        }
        best
    }

    pub fn norm_with(&self, ring: &Ring) -> Norm {
        let mut best = Norm::Zero;
        for (m, _) in &self.terms {
            let n = Norm::Val { energy: m.energy, tweight: m.t_total() };
            best = best.max_with(n, Some(ring.norm_c));
        }
        best
    }

    /// Inverse at the active truncation.
    ///
    /// The z⁰t⁰ part must have a single e-power whose lowest-energy coefficient
    /// is nonzero; the remainder is inverted by a terminating geometric series.
    pub fn inverse(&self, ring: &Ring) -> Result<Scalar, CoeffError> {
        let p = &ring.policy;
        let base: Vec<&(Mono, Q)> = self.terms.iter().filter(|(m, _)| m.z == 0 && m.t_total() == 0).collect();
        if base.is_empty() {
            return Err(CoeffError::NotInvertible(self.to_string()));
        }
        let e0 = base[0].0.e;
        if base.iter().any(|(m, _)| m.e != e0) {
            return Err(CoeffError::NotInvertible(format!("{self}: mixed e-powers in the constant part")));
        }
        let lead = base.iter().min_by(|a, b| a.0.energy.cmp(&b.0.energy)).unwrap();
        let lam = lead.0.energy;
        if ring.coeffs == Coefficients::Lambda0 && lam != Q::zero() {
            return Err(CoeffError::NotInvertible(format!("{self}: leading energy {lam} is not a unit of Lambda_0")));
        }
        let c = lead.1;
        let inv_lead = Scalar::term(
            c.recip(),
            Mono { z: 0, t: [0; MAX_T], energy: -lam, e: -e0 },
        );
        // self = lead * (1 + n), n has positive energy, z or t order.
        let roomy = Policy { energy_cut: p.energy_cut + lam.abs() + q(1), ..p.clone() };
        let n = self.mul(&inv_lead, &roomy).sub(&Scalar::one());
        let mut acc = Scalar::one();
        let mut power = Scalar::one();
        for _ in 0..256 {
            power = power.mul(&n.neg(), &roomy);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        if !power.is_zero() {
            return Err(CoeffError::NotInvertible(format!("{self}: geometric series does not terminate")));
        }
        Ok(acc.mul(&inv_lead, &roomy).truncate(p))
    }

    pub fn parse(text: &str, ring: &Ring) -> Result<Scalar, CoeffError> {
        parse_scalar(text, ring)
    }

    pub fn to_literal(&self, ring: &Ring) -> String {
        format_scalar(self, Some(ring))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_scalar(self, None))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_scalar(self, None))
    }
}

/// ‖·‖ kept symbolically: e^{-energy} · C^{-tweight}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Zero,
    Val { energy: Q, tweight: u32 },
}

impl Norm {
    pub fn one() -> Norm {
        Norm::Val { energy: Q::zero(), tweight: 0 }
    }

    /// log of the norm for a given C.
    pub fn log(&self, c: Q) -> Option<f64> {
        match self {
            Norm::Zero => None,
            Norm::Val { energy, tweight } => {
                let cf = c.to_f64().unwrap();
                Some(-energy.to_f64().unwrap() - *tweight as f64 * cf.ln())
            }
        }
    }

    pub fn to_f64(&self, c: Q) -> f64 {
        self.log(c).map(f64::exp).unwrap_or(0.0)
    }

    /// Compares two norms; exact whenever one coordinate agrees.
    pub fn cmp_with(&self, o: &Norm, c: Option<Q>) -> Ordering {
        match (self, o) {
            (Norm::Zero, Norm::Zero) => Ordering::Equal,
            (Norm::Zero, _) => Ordering::Less,
            (_, Norm::Zero) => Ordering::Greater,
            (Norm::Val { energy: e1, tweight: w1 }, Norm::Val { energy: e2, tweight: w2 }) => {
                if w1 == w2 {
                    e2.cmp(e1)
                } else if e1 == e2 {
                    w2.cmp(w1)
                } else if e1 <= e2 && w1 <= w2 {
                    Ordering::Greater
                } else if e1 >= e2 && w1 >= w2 {
                    Ordering::Less
                } else {
                    let c = c.unwrap_or(q(2));
                    let a = self.log(c).unwrap();
                    let b = o.log(c).unwrap();
                    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
                }
            }
        }
    }

    pub fn max_with(self, o: Norm, c: Option<Q>) -> Norm {
        if self.cmp_with(&o, c) == Ordering::Less {
            o
        } else {
            self
        }
    }

    pub fn mul(&self, o: &Norm) -> Norm {
        match (self, o) {
            (Norm::Val { energy: e1, tweight: w1 }, Norm::Val { energy: e2, tweight: w2 }) => {
                Norm::Val { energy: *e1 + *e2, tweight: w1 + w2 }
            }
            _ => Norm::Zero,
        }
    }

    pub fn less_than_one(&self, c: Q) -> bool {
        self.cmp_with(&Norm::one(), Some(c)) == Ordering::Less
    }

    pub fn at_most_one(&self, c: Q) -> bool {
        self.cmp_with(&Norm::one(), Some(c)) != Ordering::Greater
    }

    pub fn describe(&self) -> String {
        match self {
            Norm::Zero => "0".into(),
            Norm::Val { energy, tweight } => {
                if *tweight == 0 {
                    format!("exp(-{energy})")
                } else {
                    format!("exp(-{energy})*C^-{tweight}")
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
}

/// Checked arithmetic: both operands must already be admissible for the ring.
pub fn scalar_arith(a: &Scalar, b: &Scalar, op: ArithOp, ring: &Ring) -> Result<Scalar, CoeffError> {
    ring.admits(a)?;
    ring.admits(b)?;
    if a.truncate(&ring.policy) != *a || b.truncate(&ring.policy) != *b {
        return Err(CoeffError::TagMismatch("operand not reduced under the active policy".into()));
    }
    let r = match op {
        ArithOp::Add => a.add(b),
        ArithOp::Mul => a.mul(b, &ring.policy),
    };
    ring.admits(&r)?;
    Ok(r)
}

pub fn truncate(a: &Scalar, p: &Policy) -> Scalar {
    a.truncate(p)
}

pub fn novikov_norm(a: &Scalar, ring: &Ring) -> f64 {
    a.norm_with(ring).to_f64(ring.norm_c)
}

// ---- literal grammar ----

fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.to_integer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn format_scalar(s: &Scalar, ring: Option<&Ring>) -> String {
    if s.terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (m, c)) in s.terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = vec![];
        if !a.is_one() || m.is_one() {
            factors.push(fmt_q(&a));
        }
        if !m.energy.is_zero() {
            factors.push(format!("T^{}", fmt_q(&m.energy)));
        }
        if m.e != 0 {
            factors.push(if m.e == 1 { "e".into() } else { format!("e^{}", m.e) });
        }
        if m.z != 0 {
            factors.push(if m.z == 1 { "z".into() } else { format!("z^{}", m.z) });
        }
        for i in 0..MAX_T {
            if m.t[i] > 0 {
                let name = ring
                    .and_then(|r| r.tvars.get(i).map(|v| v.name.clone()))
                    .unwrap_or_else(|| format!("t{i}"));
                factors.push(if m.t[i] == 1 { name } else { format!("{}^{}", name, m.t[i]) });
            }
        }
        out.push_str(&factors.join(" * "));
    }
    out
}

fn parse_rational(tok: &str) -> Option<Q> {
    let tok = tok.trim();
    if let Some((n, d)) = tok.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Q::new(n, d))
    } else if let Some((w, f)) = tok.split_once('.') {
        let neg = w.starts_with('-');
        let w: i128 = if w == "-" || w.is_empty() { 0 } else { w.parse().ok()? };
        let scale = 10i128.checked_pow(f.len() as u32)?;
        let fv: i128 = if f.is_empty() { 0 } else { f.parse().ok()? };
        let frac = Q::new(fv, scale);
        Some(if neg { Q::from_integer(w) - frac } else { Q::from_integer(w) + frac })
    } else {
        Some(Q::from_integer(tok.parse().ok()?))
    }
}

fn split_terms(text: &str) -> Vec<(bool, String)> {
    // Splits at top-level + and - that are not exponent signs.
    let chars: Vec<char> = text.chars().collect();
    let mut out = vec![];
    let mut cur = String::new();
    let mut neg = false;
    let mut prev_sig: Option<char> = None;
    for &ch in &chars {
        if (ch == '+' || ch == '-') && !matches!(prev_sig, Some('^') | Some('/') | Some('(')) {
            if !cur.trim().is_empty() {
                out.push((neg, cur.clone()));
                cur.clear();
                neg = ch == '-';
            } else if ch == '-' {
                neg = !neg;
            }
            prev_sig = Some(ch);
            continue;
        }
        if !ch.is_whitespace() {
            prev_sig = Some(ch);
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push((neg, cur));
    }
    out
}

fn parse_scalar(text: &str, ring: &Ring) -> Result<Scalar, CoeffError> {
    let err = |m: &str| CoeffError::Parse(text.to_string(), m.to_string());
    let text = text.trim();
    if text.is_empty() {
        return Err(err("empty literal"));
    }
    let mut pairs = vec![];
    for (neg, term) in split_terms(text) {
        let mut c = q(1);
        let mut m = Mono::one();
        for factor in term.split('*') {
            let f = factor.trim();
            if f.is_empty() {
                return Err(err("empty factor"));
            }
            let (base, exp) = match f.split_once('^') {
                Some((b, e)) => (b.trim(), Some(e.trim().trim_start_matches('(').trim_end_matches(')'))),
                None => (f, None),
            };
            if base.chars().next().map(|ch| ch.is_ascii_digit() || ch == '.').unwrap_or(false) {
                if exp.is_some() {
                    return Err(err("exponent on a rational coefficient"));
                }
                c *= parse_rational(base).ok_or_else(|| err("bad rational"))?;
                continue;
            }
            match base {
                "T" => {
                    let lam = match exp {
                        Some(x) => parse_rational(x).ok_or_else(|| err("bad T exponent"))?,
                        None => q(1),
                    };
                    m.energy += lam;
                }
                "e" => {
                    let k: i32 = match exp {
                        Some(x) => x.parse().map_err(|_| err("bad e exponent"))?,
                        None => 1,
                    };
                    m.e += k;
                }
                "z" => {
                    let k: u32 = match exp {
                        Some(x) => x.parse().map_err(|_| err("z exponent must be a non-negative integer"))?,
                        None => 1,
                    };
                    m.z += k;
                }
                name => {
                    let i = ring.t_index(name).ok_or_else(|| err(&format!("unknown variable `{name}`")))?;
                    let k: u16 = match exp {
                        Some(x) => x.parse().map_err(|_| err("t exponent must be a non-negative integer"))?,
                        None => 1,
                    };
                    m.t[i] += k;
                }
            }
        }
        if neg {
            c = -c;
        }
        pairs.push((m, c));
    }
    let s = Scalar::from_terms(pairs, &ring.policy);
    ring.admits(&s)?;
    Ok(s)
}

/// For dividing by factorials in twisting series.
pub fn inv_factorial(n: u32) -> Q {
    let mut f: i128 = 1;
    for k in 2..=n as i128 {
        f *= k;
    }
    Q::new(1, f)
}

pub fn lcm_denominators(qs: impl IntoIterator<Item = Q>) -> i128 {
    qs.into_iter().fold(1i128, |acc, c| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        Ring::new(
            Policy { z_order: 2, energy_cut: q(2), t_order: 3, e_window: (-4, 4) },
            vec![TVar { name: "t0".into(), degree: 2 }, TVar { name: "t1".into(), degree: 0 }],
        )
        .unwrap()
    }

    #[test]
    fn energy_truncation_drops_top_term() {
        // exclusive cut: with cut 3, (T + T^2) * T keeps T^2 and drops T^3
        let r = ring().with_policy(Policy { energy_cut: q(3), ..ring().policy });
        let a = Scalar::parse("T^1 + T^2", &r).unwrap();
        let b = Scalar::parse("T^1", &r).unwrap();
        assert_eq!(a.mul(&b, &r.policy), Scalar::parse("T^2", &r).unwrap());
        // at cut 2 the T^2 term itself is outside the window
        assert!(a.mul(&b, &ring().policy).is_zero());
    }

    #[test]
    fn laurent_pair() {
        let r = ring();
        let a = Scalar::parse("e", &r).unwrap();
        let b = Scalar::parse("e^-1", &r).unwrap();
        assert!(a.mul(&b, &r.policy).is_one());
    }

    #[test]
    fn square_mod_z2() {
        let r = ring();
        let a = Scalar::parse("1 + z * T^1/2", &r).unwrap();
        let sq = a.mul(&a, &r.policy);
        assert_eq!(sq, Scalar::parse("1 + 2 * z * T^1/2", &r).unwrap());
    }

    #[test]
    fn norms() {
        let r = ring();
        assert_eq!(Scalar::parse("T^1", &r).unwrap().norm(), Norm::Val { energy: q(1), tweight: 0 });
        assert_eq!(Scalar::zero().norm(), Norm::Zero);
        let s = Scalar::parse("T^2 + z * T^1/2", &Ring::plain()).unwrap();
        assert_eq!(s.norm(), Norm::Val { energy: qr(1, 2), tweight: 0 });
        assert!((novikov_norm(&s, &Ring::plain()) - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn truncate_examples() {
        let big = Ring::plain();
        let z3 = Scalar::parse("z^3", &big).unwrap();
        let p = Policy { z_order: 2, ..big.policy.clone() };
        assert!(z3.truncate(&p).is_zero());
        let t5 = Scalar::parse("T^5", &big).unwrap();
        let p = Policy { energy_cut: q(5), ..big.policy.clone() };
        assert!(t5.truncate(&p).is_zero());
    }

    #[test]
    fn literal_round_trip() {
        let r = ring();
        for lit in ["0", "1", "-3/4 * T^1/2 * e^-2 * t0^2", "2 * z * t1 - e", "T^1/3 + 5 * t0 * t1"] {
            let s = Scalar::parse(lit, &r).unwrap();
            let back = Scalar::parse(&s.to_literal(&r), &r).unwrap();
            assert_eq!(s, back, "{lit}");
        }
    }

    #[test]
    fn lambda0_rejects_negative_energy() {
        let r = ring().with_coeffs(Coefficients::Lambda0);
        assert!(matches!(Scalar::parse("T^-1", &r), Err(CoeffError::NegativeEnergy(_))));
        let a = Scalar::parse("T^1", &r).unwrap();
        assert!(scalar_arith(&a, &a, ArithOp::Mul, &r).is_ok());
    }

    #[test]
    fn odd_t_variable_rejected() {
        let bad = Ring::new(ring().policy, vec![TVar { name: "s".into(), degree: 1 }]);
        assert!(bad.is_err());
    }

    #[test]
    fn inverse_of_unit() {
        let r = Ring::plain();
        let u = Scalar::parse("2 * e^2 * T^1 + z + T^3/2 * e^2", &r).unwrap();
        let inv = u.inverse(&r).unwrap();
        assert!(inv.mul(&u, &r.policy).sub(&Scalar::one()).is_zero());
        let l0 = r.with_coeffs(Coefficients::Lambda0);
        assert!(u.inverse(&l0).is_err());
    }

    #[test]
    fn tags_are_derived() {
        let r = ring();
        assert_eq!(Scalar::parse("3", &r).unwrap().tag(), RingTag::Rational);
        assert_eq!(Scalar::parse("T^1", &r).unwrap().tag(), RingTag::Lambda0);
        assert_eq!(Scalar::parse("T^-1", &r).unwrap().tag(), RingTag::Lambda);
        assert_eq!(Scalar::parse("t0", &r).unwrap().tag(), RingTag::PowerT);
    }
}
