//! Primitive forms without higher residue pairing, for a connection given by
//! matrices on a free module with a chosen basis.

use crate::coeff::{Mono, Ring, Scalar};
use crate::graded::Lin;
use crate::report::{Check, Report};

use super::matrix::{LMat, MatrixConnection, SMat};
use super::{stamp_of, Deriv, Dir};

/// z^{-pole} v.
#[derive(Clone, Debug)]
struct LVec {
    pole: u32,
    v: Vec<Scalar>,
}

impl LVec {
    fn poly(v: Vec<Scalar>) -> LVec {
        LVec { pole: 0, v }
    }

    fn add(&self, o: &LVec, ring: &Ring) -> LVec {
        let p = self.pole.max(o.pole);
        let up = |x: &LVec| -> Vec<Scalar> { x.v.iter().map(|c| c.shift_z(p - x.pole, &ring.policy)).collect() };
        LVec { pole: p, v: up(self).iter().zip(up(o)).map(|(a, b)| a.add(&b)).collect() }
    }

    /// Multiplies by z^k.
    fn shift(&self, k: u32, ring: &Ring) -> LVec {
        if self.pole >= k {
            LVec { pole: self.pole - k, v: self.v.clone() }
        } else {
            LVec { pole: 0, v: self.v.iter().map(|c| c.shift_z(k - self.pole, &ring.policy)).collect() }
        }
    }

    /// The polynomial part, and the negative-power terms that had to be dropped.
    fn split(&self, ring: &Ring) -> (Vec<Scalar>, Lin<(usize, i32)>) {
        let mut bad = Lin::zero();
        let mut out = vec![];
        for (i, c) in self.v.iter().enumerate() {
            let mut keep = vec![];
            for (m, x) in c.terms() {
                if m.z < self.pole {
                    bad.add_term((i, m.z as i32 - self.pole as i32), Scalar::term(*x, Mono { z: 0, ..*m }));
                } else {
                    keep.push((Mono { z: m.z - self.pole, ..*m }, *x));
                }
            }
            out.push(Scalar::from_terms(keep, &ring.policy));
        }
        (out, bad)
    }
}

fn apply(op: &LMat, v: &[Scalar], ring: &Ring) -> LVec {
    let n = op.dim();
    let w = (0..n)
        .map(|i| {
            let mut s = Scalar::zero();
            for (j, x) in v.iter().enumerate() {
                s.add_assign(&op.m[i][j].mul(x, &ring.policy));
            }
            s
        })
        .collect();
    LVec { pole: op.pole, v: w }
}

fn minor(m: &SMat, row: usize, col: usize) -> SMat {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Determinant by Laplace expansion along the first row.
pub fn det(m: &SMat, ring: &Ring) -> Scalar {
    match m.len() {
        0 => Scalar::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut out = Scalar::zero();
            for j in 0..m.len() {
                if m[0][j].is_zero() {
                    continue;
                }
                let t = m[0][j].mul(&det(&minor(m, 0, j), ring), &ring.policy);
                out.add_assign(&t.signed(if j % 2 == 0 { 1 } else { -1 }));
            }
            out
        }
    }
}

/// Inverse through the adjugate; fails when the determinant has no inverse in `ring`.
pub fn inverse(m: &SMat, ring: &Ring) -> Result<SMat, String> {
    let n = m.len();
    let di = det(m, ring).inverse(ring).map_err(|e| e.to_string())?;
    let mut out = vec![vec![Scalar::zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let c = det(&minor(m, j, i), ring).signed(if (i + j) % 2 == 0 { 1 } else { -1 });
            *cell = c.mul(&di, &ring.policy);
        }
    }
    Ok(out)
}

pub struct PrimitiveVerdict {
    pub report: Report,
    /// Columns (z∇_{∂ᵢ}ζ)|_{z=0}.
    pub residue: SMat,
    pub det: Scalar,
    /// Φ₀⁻¹((z∇_Eζ)|_{z=0}) when ζ is primitive.
    pub euler: Option<Deriv>,
}

impl PrimitiveVerdict {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// z∇_X v for a direction X with matrix A_X.
fn znabla(mc: &MatrixConnection, x: &Deriv, v: &[Scalar]) -> LVec {
    let r = &mc.ring;
    let d: Vec<Scalar> = v.iter().map(|c| x.apply(c, &r.policy)).collect();
    LVec::poly(d).shift(1, r).add(&apply(&mc.matrix(&Dir::R(x.clone())), v, r).shift(1, r), r)
}

/// z²∇_{d/dz} v.
fn z2nabla_z(mc: &MatrixConnection, v: &[Scalar]) -> LVec {
    let r = &mc.ring;
    let d: Vec<Scalar> = v.iter().map(|c| c.d_z(&r.policy)).collect();
    LVec::poly(d).shift(2, r).add(&apply(&mc.matrix(&Dir::Dz), v, r).shift(2, r), r)
}

fn record_lvec(chk: &mut Check, w: impl FnOnce() -> String, lv: &LVec, base: &Ring, ring: &Ring) {
    let (p, bad) = lv.split(ring);
    let mut res = Lin::zero();
    for ((i, k), c) in bad.iter() {
        res.add_term((*i, *k), c.truncate(&base.policy));
    }
    for (i, c) in p.iter().enumerate() {
        for (m, x) in c.terms() {
            let flat = Mono { z: 0, ..*m };
            if m.z < base.policy.z_order && base.policy.keeps(&flat) {
                res.add_term((i, m.z as i32), Scalar::term(*x, flat));
            }
        }
    }
    chk.record(w, &res);
}

/// The coefficients of z^k, k ≥ `top`, of Φ⁻¹ applied to a polynomial vector,
/// plus any negative powers, as a residual.
fn pole_residual(phi_inv: &SMat, lv: &LVec, top: u32, base: &Ring, ring: &Ring) -> Lin<(usize, i32)> {
    let (p, mut res) = lv.split(ring);
    let w = apply(&LMat::new(0, phi_inv.clone()), &p, ring);
    for (i, c) in w.v.iter().enumerate() {
        for (m, x) in c.terms() {
            let flat = Mono { z: 0, ..*m };
            if m.z >= top && m.z < base.policy.z_order && base.policy.keeps(&flat) {
                res.add_term((i, m.z as i32), Scalar::term(*x, flat));
            }
        }
    }
    res
}

/// Checks ζ (coordinates in the basis of `mc`, degree r) against the four
/// conditions. Der(R) is spanned by ∂/∂tᵢ; invertibility is decided in the
/// coefficient ring of `base` (Λ₀ or Λ).
pub fn primitive_check(mc: &MatrixConnection, zeta: &[Scalar], r: i32, base: &Ring) -> PrimitiveVerdict {
    let w = &mc.ring;
    let ring_c = w.with_coeffs(base.coeffs);
    let stamp = format!("{}, coefficients {:?}", stamp_of(base), base.coeffs);
    let n = w.tvars.len();
    let mut prim = Check::new("primitive").with_stamp(stamp.clone());
    let mut hom = Check::new("homogeneity").with_stamp(stamp.clone());
    let mut p1 = Check::new("pole-order-derivations").with_stamp(stamp.clone());
    let mut p2 = Check::new("pole-order-dz").with_stamp(stamp);

    let cols: Vec<LVec> = (0..n).map(|i| znabla(mc, &Deriv::dt(i, n), zeta)).collect();
    let mut phi: SMat = vec![vec![Scalar::zero(); n]; mc.dim()];
    let mut polar = false;
    for (j, c) in cols.iter().enumerate() {
        let (p, bad) = c.split(w);
        polar |= !bad.is_zero();
        for (i, x) in p.iter().enumerate() {
            phi[i][j] = x.clone();
        }
    }
    let residue: SMat = phi.iter().map(|r| r.iter().map(|x| x.z_coeff(0)).collect()).collect();
    let square = mc.dim() == n;
    let d0 = if square { det(&residue, &ring_c).truncate(&base.policy) } else { Scalar::zero() };
    let phi0_inv = if square && !polar { inverse(&residue, &ring_c).ok() } else { None };
    prim.record_bool(
        || "residue matrix".into(),
        phi0_inv.is_some(),
        || {
            if !square {
                format!("{} derivations against rank {}", n, mc.dim())
            } else {
                format!("det {} has no inverse", d0.to_literal(base))
            }
        },
    );

    // z²∇_{d/dz}ζ + z∇_Eζ − (r/2)zζ
    let e = Deriv::euler(w);
    let mut lhs = z2nabla_z(mc, zeta).add(&znabla(mc, &e, zeta), w);
    let half: Vec<Scalar> = zeta.iter().map(|c| c.scale(crate::coeff::qr(-(r as i128), 2))).collect();
    lhs = lhs.add(&LVec::poly(half).shift(1, w), w);
    record_lvec(&mut hom, || "z^2 nabla_z zeta + z nabla_E zeta - (r/2) z zeta".into(), &lhs, base, w);

    let mut euler = None;
    if let (Some(p0i), true) = (&phi0_inv, square) {
        let phi_inv = inverse(&phi, &ring_c).unwrap_or_else(|_| p0i.clone());
        let polys: Vec<Vec<Scalar>> = cols.iter().map(|c| c.split(w).0).collect();
        for (j, v) in polys.iter().enumerate() {
            for i in 0..n {
                let res = pole_residual(&phi_inv, &znabla(mc, &Deriv::dt(i, n), v), 2, base, w);
                p1.record(|| format!("z nabla_{i} d_{j}"), &res);
            }
            let res = pole_residual(&phi_inv, &z2nabla_z(mc, v), 3, base, w);
            p2.record(|| format!("z^2 nabla_z d_{j}"), &res);
        }
        let ez = znabla(mc, &e, zeta).split(w).0;
        let ez0: Vec<Scalar> = ez.iter().map(|c| c.z_coeff(0)).collect();
        let coeffs = apply(&LMat::new(0, p0i.clone()), &ez0, &ring_c).v;
        euler = Some(Deriv { t: coeffs.iter().map(|c| c.truncate(&base.policy)).collect(), e: Scalar::zero() });
    } else {
        p1.record_bool(|| "identification".into(), false, || "zeta is not primitive".into());
        p2.record_bool(|| "identification".into(), false, || "zeta is not primitive".into());
    }
    let mut report = Report::new();
    for c in [prim, hom, p1, p2] {
        report.push(c);
    }
    PrimitiveVerdict { report, residue, det: d0, euler }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, Coefficients as Coeffs, Policy};
    use crate::models::{dubrovin, dubrovin_ring, qh_p1};

    fn setup() -> crate::models::Dubrovin {
        let h = qh_p1(q(1), 5);
        let r = dubrovin_ring(&h, Policy { z_order: 3, energy_cut: q(8), t_order: 2, e_window: (-16, 16) }).unwrap();
        dubrovin(&h, &r).unwrap()
    }

    fn vec_of(d: &crate::models::Dubrovin, i: Option<usize>) -> Vec<Scalar> {
        (0..d.dim()).map(|j| if Some(j) == i { Scalar::one() } else { Scalar::zero() }).collect()
    }

    #[test]
    fn unit_is_primitive() {
        let d = setup();
        let mc = d.matrix_connection(true);
        let v = primitive_check(&mc, &vec_of(&d, Some(0)), 0, &d.base);
        assert!(v.passed(), "{:?}", v.report.failing());
        let e = v.euler.unwrap();
        assert_eq!(e.t[1], Scalar::from_int(2));
    }

    #[test]
    fn zero_is_not() {
        let d = setup();
        let v = primitive_check(&d.matrix_connection(true), &vec_of(&d, None), 0, &d.base);
        assert!(!v.report.get("primitive").unwrap().passed());
    }

    #[test]
    fn point_class_depends_on_coefficients() {
        let d = setup();
        let mc = d.matrix_connection(true);
        let z = vec_of(&d, Some(1));
        let lam = primitive_check(&mc, &z, 2, &d.base.with_coeffs(Coeffs::Lambda));
        let lam0 = primitive_check(&mc, &z, 2, &d.base.with_coeffs(Coeffs::Lambda0));
        assert!(lam.report.get("primitive").unwrap().passed());
        assert!(!lam0.report.get("primitive").unwrap().passed());
    }
}
