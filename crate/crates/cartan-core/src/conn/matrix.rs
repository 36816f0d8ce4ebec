//! Connection matrices ∇_X = X + z^{-p}P in a fixed basis, and their curvature.

use crate::coeff::{q, Mono, Ring, Scalar};
use crate::graded::Lin;
use crate::report::{Check, Report};

use super::{stamp_of, Deriv, Dir};

pub type SMat = Vec<Vec<Scalar>>;

/// z^{-pole} m. Entry m[i][j] is the coefficient of basis i in the image of basis j.
#[derive(Clone, Debug, PartialEq)]
pub struct LMat {
    pub pole: u32,
    pub m: SMat,
}

fn zeros(n: usize) -> SMat {
    vec![vec![Scalar::zero(); n]; n]
}

impl LMat {
    pub fn zero(n: usize) -> LMat {
        LMat { pole: 0, m: zeros(n) }
    }

    pub fn new(pole: u32, m: SMat) -> LMat {
        LMat { pole, m }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    fn raised(&self, to: u32, ring: &Ring) -> SMat {
        let k = to - self.pole;
        self.m.iter().map(|r| r.iter().map(|c| c.shift_z(k, &ring.policy)).collect()).collect()
    }

    pub fn add(&self, o: &LMat, ring: &Ring) -> LMat {
        let p = self.pole.max(o.pole);
        let (a, b) = (self.raised(p, ring), o.raised(p, ring));
        let m = a.iter().zip(&b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect();
        LMat { pole: p, m }
    }

    pub fn sub(&self, o: &LMat, ring: &Ring) -> LMat {
        self.add(&o.scale(&Scalar::from_int(-1), ring), ring)
    }

    pub fn scale(&self, c: &Scalar, ring: &Ring) -> LMat {
        let m = self.m.iter().map(|r| r.iter().map(|x| x.mul(c, &ring.policy)).collect()).collect();
        LMat { pole: self.pole, m }
    }

    /// Composition self ∘ o.
    pub fn mul(&self, o: &LMat, ring: &Ring) -> LMat {
        let n = self.dim();
        let mut m = zeros(n);
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..n {
                    cell.add_assign(&self.m[i][k].mul(&o.m[k][j], &ring.policy));
                }
            }
        }
        LMat { pole: self.pole + o.pole, m }
    }

    pub fn commutator(&self, o: &LMat, ring: &Ring) -> LMat {
        self.mul(o, ring).sub(&o.mul(self, ring), ring)
    }

    /// Entrywise derivative along a direction; d/dz(z^{-p}P) = z^{-(p+1)}(zP' − pP).
    pub fn deriv(&self, d: &Dir, ring: &Ring) -> LMat {
        let p = &ring.policy;
        match d {
            Dir::R(x) => LMat { pole: self.pole, m: self.m.iter().map(|r| r.iter().map(|c| x.apply(c, p)).collect()).collect() },
            Dir::Dz => {
                let m = self
                    .m
                    .iter()
                    .map(|r| r.iter().map(|c| c.d_z(p).shift_z(1, p).sub(&c.scale(q(self.pole as i128)))).collect())
                    .collect();
                LMat { pole: self.pole + 1, m }
            }
        }
    }

    /// Laurent expansion: label (row, col, power of z) with z-free coefficient,
    /// keeping powers below `base.z_order` and terms `base` admits otherwise.
    pub fn laurent(&self, base: &Ring) -> Lin<(usize, usize, i32)> {
        let mut out = Lin::zero();
        for (i, r) in self.m.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                for (mono, x) in c.terms() {
                    let k = mono.z as i32 - self.pole as i32;
                    let flat = Mono { z: 0, ..*mono };
                    if k < base.policy.z_order as i32 && base.policy.keeps(&flat) {
                        out.add_term((i, j, k), Scalar::term(*x, flat));
                    }
                }
            }
        }
        out
    }

    /// Terms whose degree is not `expect`, as a residual. Degrees of z^{-p}m at
    /// entry (i, j) are |coeff| − 2p + deg_i − deg_j.
    pub fn degree_defect(&self, expect: i32, degs: &[i32], ring: &Ring) -> Lin<(usize, usize, i32)> {
        let mut out = Lin::zero();
        for (i, r) in self.m.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                for (mono, x) in c.terms() {
                    let d = ring.mono_degree(mono) - 2 * self.pole as i32 + degs[i] - degs[j];
                    if d != expect {
                        out.add_term((i, j, mono.z as i32 - self.pole as i32), Scalar::term(*x, Mono { z: 0, ..*mono }));
                    }
                }
            }
        }
        out
    }
}

/// ∇ along one direction: the direction itself plus z^{-pole} matrix.
#[derive(Clone, Debug)]
pub struct ConnectionOperator {
    pub direction: String,
    pub dir: Dir,
    pub op: LMat,
}

/// A connection given by matrices on the basic R-directions and optionally d/dz.
#[derive(Clone, Debug)]
pub struct MatrixConnection {
    pub ring: Ring,
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    /// Matrices for ∂/∂t₀, …, e d/de, in that order.
    pub basic: Vec<LMat>,
    pub dz: Option<LMat>,
}

impl MatrixConnection {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn matrix(&self, d: &Dir) -> LMat {
        let r = &self.ring;
        match d {
            Dir::Dz => self.dz.clone().unwrap_or_else(|| LMat::zero(self.dim())),
            Dir::R(x) => {
                let n = x.t.len();
                let mut out = self.basic[n].scale(&x.e, r);
                for (i, a) in x.t.iter().enumerate() {
                    if !a.is_zero() {
                        out = out.add(&self.basic[i].scale(a, r), r);
                    }
                }
                out
            }
        }
    }

    /// R(X, Y) = X(A_Y) − Y(A_X) + [A_X, A_Y] − A_{[X,Y]}.
    pub fn curvature(&self, x: &Dir, y: &Dir) -> LMat {
        let r = &self.ring;
        let (ax, ay) = (self.matrix(x), self.matrix(y));
        let mut out = ay.deriv(x, r).sub(&ax.deriv(y, r), r).add(&ax.commutator(&ay, r), r);
        if let (Dir::R(a), Dir::R(b)) = (x, y) {
            out = out.sub(&self.matrix(&Dir::R(a.bracket(b, r))), r);
        }
        out
    }

    /// Flatness on every pair of the named directions, compared in `base`.
    pub fn flatness(&self, dirs: &[(String, Dir)], base: &Ring) -> Check {
        let mut c = Check::new("flatness").with_stamp(stamp_of(base));
        for (i, (nx, x)) in dirs.iter().enumerate() {
            for (ny, y) in &dirs[i + 1..] {
                c.record(|| format!("R({nx}, {ny})"), &self.curvature(x, y).laurent(base));
            }
        }
        c
    }

    /// [deg, ∇_X] = |X|∇_X for the listed homogeneous directions.
    pub fn homogeneity(&self, dirs: &[(String, Dir, i32)], base: &Ring) -> Check {
        let mut c = Check::new("homogeneity").with_stamp(stamp_of(base));
        for (n, d, deg) in dirs {
            let defect = self.matrix(d).degree_defect(*deg, &self.degrees, &self.ring);
            let mut kept = Lin::zero();
            for ((i, j, k), x) in defect.iter() {
                if *k < base.policy.z_order as i32 {
                    kept.add_term((*i, *j, *k), x.truncate(&base.policy));
                }
            }
            c.record(|| n.clone(), &kept);
        }
        c
    }

    pub fn operators(&self, dirs: &[(String, Dir)]) -> Vec<ConnectionOperator> {
        dirs.iter().map(|(n, d)| ConnectionOperator { direction: n.clone(), dir: d.clone(), op: self.matrix(d) }).collect()
    }
}

/// Directions ∂/∂tᵢ, e d/de and optionally d/dz with display names.
pub fn named_directions(ring: &Ring, with_dz: bool) -> Vec<(String, Dir)> {
    let n = ring.tvars.len();
    let mut v: Vec<(String, Dir)> =
        ring.tvars.iter().enumerate().map(|(i, t)| (format!("d/d{}", t.name), Dir::R(Deriv::dt(i, n)))).collect();
    v.push(("e d/de".into(), Dir::R(Deriv::ede(n))));
    if with_dz {
        v.push(("d/dz".into(), Dir::Dz));
    }
    v
}

/// Flatness plus homogeneity, as a report.
pub fn flatness_report(mc: &MatrixConnection, base: &Ring) -> Report {
    let dirs = named_directions(&mc.ring, mc.dz.is_some());
    let mut rep = Report::new();
    rep.push(mc.flatness(&dirs, base));
    let mut hdirs: Vec<(String, Dir, i32)> = vec![];
    for (n, d) in &dirs {
        let deg = match d {
            Dir::R(x) => x.degree(&mc.ring).unwrap_or(0),
            Dir::Dz => -2,
        };
        hdirs.push((n.clone(), d.clone(), deg));
    }
    rep.push(mc.homogeneity(&hdirs, base));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Policy, TVar};

    #[test]
    fn dz_of_pole() {
        let r = Ring::new(Policy { z_order: 4, energy_cut: q(2), t_order: 2, e_window: (-2, 2) }, vec![TVar { name: "t".into(), degree: 2 }])
            .unwrap();
        // z^{-2}(1 + z) has derivative −2z^{-3} − z^{-2}
        let a = LMat::new(2, vec![vec![Scalar::parse("1 + z", &r).unwrap()]]);
        let d = a.deriv(&Dir::Dz, &r);
        let l = d.laurent(&r);
        assert_eq!(l.coeff(&(0, 0, -3)), Scalar::from_int(-2));
        assert_eq!(l.coeff(&(0, 0, -2)), Scalar::from_int(-1));
    }
}
