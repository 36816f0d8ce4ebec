//! Exact linear algebra for finite complexes: ranks, cohomology
//! representatives, cyclic homology at truncation, induced maps.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{Q, Ring};
use crate::graded::Label;
use crate::hoch::{Chain, Hoch};

pub type BQ = BigRational;

#[derive(Debug, Error, PartialEq)]
pub enum HomolError {
    #[error("d∘d ≠ 0 from degree {0}: truncation too tight or not a complex")]
    NotComplex(i32),
    #[error("validity window {0} ≤ 0 (word bound must exceed z-order)")]
    EmptyWindow(i64),
    #[error("coefficient is not a rational constant: {0}")]
    NonConstant(String),
    #[error("not a chain map at degree {0}")]
    NotChainMap(i32),
    #[error("vector is not a cycle")]
    NotCycle,
}

pub fn bq(c: Q) -> BQ {
    BQ::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<BQ>>,
}

/// Pivot search order for elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Forward,
    Reverse,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![vec![BQ::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BQ::one();
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Matrix { rows: r, cols: c, data: rows.iter().map(|row| row.iter().map(|&v| BQ::from_integer(v.into())).collect()).collect() }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows);
        let mut out = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    if !o.data[k][j].is_zero() {
                        let v = &self.data[i][k] * &o.data[k][j];
                        out.data[i][j] += v;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[BQ]) -> Vec<BQ> {
        (0..self.rows).map(|i| (0..self.cols).fold(BQ::zero(), |a, j| a + &self.data[i][j] * &v[j])).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j][i] = self.data[i][j].clone();
            }
        }
        t
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self, order: Order) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let cols: Vec<usize> = match order {
            Order::Forward => (0..self.cols).collect(),
            Order::Reverse => (0..self.cols).rev().collect(),
        };
        let mut pivots = vec![];
        let mut r = 0;
        for &c in &cols {
            if r == m.rows {
                break;
            }
            let rows: Vec<usize> = match order {
                Order::Forward => (r..m.rows).collect(),
                Order::Reverse => (r..m.rows).rev().collect(),
            };
            let Some(p) = rows.into_iter().find(|&i| !m.data[i][c].is_zero()) else { continue };
            m.data.swap(r, p);
            let inv = BQ::one() / &m.data[r][c];
            for j in 0..m.cols {
                m.data[r][j] = &m.data[r][j] * &inv;
            }
            for i in 0..m.rows {
                if i != r && !m.data[i][c].is_zero() {
                    let f = m.data[i][c].clone();
                    for j in 0..m.cols {
                        let v = &f * &m.data[r][j];
                        m.data[i][j] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, order: Order) -> usize {
        self.rref(order).1.len()
    }

    /// Basis of {v : Mv = 0}.
    pub fn kernel(&self, order: Order) -> Vec<Vec<BQ>> {
        let (r, pivots) = self.rref(order);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![BQ::zero(); self.cols];
                v[f] = BQ::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.data[row][f].clone();
                }
                v
            })
            .collect()
    }

    /// Column vectors as a matrix.
    pub fn from_columns(rows: usize, cols: &[Vec<BQ>]) -> Matrix {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.data[i][j] = c[i].clone();
            }
        }
        m
    }

    pub fn columns(&self) -> Vec<Vec<BQ>> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.data[i][j].clone()).collect()).collect()
    }
}

/// Solves Ax = b, if solvable.
pub fn solve(a: &Matrix, b: &[BQ]) -> Option<Vec<BQ>> {
    let mut aug = a.clone();
    for (i, row) in aug.data.iter_mut().enumerate() {
        row.push(b[i].clone());
    }
    aug.cols += 1;
    let (r, piv) = aug.rref(Order::Forward);
    if piv.contains(&a.cols) {
        return None;
    }
    let mut x = vec![BQ::zero(); a.cols];
    for (row, &p) in piv.iter().enumerate() {
        x[p] = r.data[row][a.cols].clone();
    }
    Some(x)
}

/// Cochain complex with finitely many cells per degree; d raises degree by one.
#[derive(Clone, Debug)]
pub struct FiniteComplex<L: Label> {
    pub cells: BTreeMap<i32, Vec<L>>,
    /// d from degree n to n+1, rows indexed by cells[n+1]
    pub diff: BTreeMap<i32, Matrix>,
    /// terms of d that left the cell set, per source degree
    pub dropped: BTreeMap<i32, usize>,
    pub stamp: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cohomology {
    pub degree: i32,
    pub rank: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub reps: Vec<Vec<BQ>>,
}

impl<L: Label> FiniteComplex<L> {
    /// `op` gives d of a cell; terms outside the cell set are dropped and counted.
    pub fn from_operator(
        cells: BTreeMap<i32, Vec<L>>,
        stamp: String,
        op: impl Fn(&L) -> Result<Vec<(L, Q)>, HomolError>,
    ) -> Result<FiniteComplex<L>, HomolError> {
        let mut diff = BTreeMap::new();
        let mut dropped = BTreeMap::new();
        let index: BTreeMap<&L, (i32, usize)> =
            cells.iter().flat_map(|(d, v)| v.iter().enumerate().map(move |(i, l)| (l, (*d, i)))).collect();
        for (&n, src) in &cells {
            let tgt_len = cells.get(&(n + 1)).map_or(0, |v| v.len());
            let mut m = Matrix::zeros(tgt_len, src.len());
            let mut lost = 0;
            for (j, l) in src.iter().enumerate() {
                for (t, c) in op(l)? {
                    match index.get(&t) {
                        Some(&(d, i)) if d == n + 1 => m.data[i][j] += bq(c),
                        Some(_) => return Err(HomolError::NotComplex(n)),
                        None => lost += 1,
                    }
                }
            }
            diff.insert(n, m);
            dropped.insert(n, lost);
        }
        Ok(FiniteComplex { cells, diff, dropped, stamp })
    }

    pub fn dim(&self, n: i32) -> usize {
        self.cells.get(&n).map_or(0, |v| v.len())
    }

    fn d(&self, n: i32) -> Matrix {
        self.diff.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(self.dim(n + 1), self.dim(n)))
    }

    pub fn check_d2(&self) -> Result<(), HomolError> {
        for &n in self.cells.keys() {
            if self.dim(n + 2) == 0 || self.dim(n) == 0 {
                continue;
            }
            if !self.d(n + 1).mul(&self.d(n)).is_zero() {
                return Err(HomolError::NotComplex(n));
            }
        }
        Ok(())
    }

    pub fn cohomology(&self, n: i32, order: Order) -> Result<Cohomology, HomolError> {
        self.check_d2()?;
        let dn = self.d(n);
        let dprev = self.d(n - 1);
        let ker = dn.kernel(order);
        let image_dim = dprev.rank(order);
        // extend a basis of the image by kernel vectors
        let mut span = dprev.columns();
        let mut reps = vec![];
        let mut current = Matrix::from_columns(self.dim(n), &span).rank(order);
        for k in ker.iter() {
            span.push(k.clone());
            let r = Matrix::from_columns(self.dim(n), &span).rank(order);
            if r > current {
                reps.push(k.clone());
                current = r;
            } else {
                span.pop();
            }
        }
        Ok(Cohomology { degree: n, rank: ker.len() - image_dim, kernel_dim: ker.len(), image_dim, reps })
    }

    pub fn ranks(&self, order: Order) -> Result<BTreeMap<i32, usize>, HomolError> {
        self.cells.keys().map(|&n| self.cohomology(n, order).map(|h| (n, h.rank))).collect()
    }

    pub fn index_of(&self, n: i32, l: &L) -> Option<usize> {
        self.cells.get(&n)?.iter().position(|x| x == l)
    }

    /// Coordinates of a cycle in the representative basis, modulo exact terms.
    pub fn class_of(&self, n: i32, reps: &[Vec<BQ>], v: &[BQ]) -> Result<Vec<BQ>, HomolError> {
        if !self.d(n).apply(v).iter().all(Zero::is_zero) {
            return Err(HomolError::NotCycle);
        }
        let mut cols = reps.to_vec();
        cols.extend(self.d(n - 1).columns());
        let a = Matrix::from_columns(self.dim(n), &cols);
        let x = solve(&a, v).ok_or(HomolError::NotCycle)?;
        Ok(x[..reps.len()].to_vec())
    }

    /// Boundary of a vector from degree n−1.
    pub fn boundary(&self, n: i32, v: &[BQ]) -> Vec<BQ> {
        self.d(n - 1).apply(v)
    }
}

/// Matrix of a degree-preserving map between complexes on degree n; checks f d = d f around n.
pub fn chain_map_matrix<L: Label, K: Label>(
    src: &FiniteComplex<L>,
    tgt: &FiniteComplex<K>,
    n: i32,
    f: &impl Fn(&L) -> Vec<(K, Q)>,
) -> Matrix {
    let mut m = Matrix::zeros(tgt.dim(n), src.dim(n));
    if let Some(cells) = src.cells.get(&n) {
        for (j, l) in cells.iter().enumerate() {
            for (k, c) in f(l) {
                if let Some(i) = tgt.index_of(n, &k) {
                    m.data[i][j] += bq(c);
                }
            }
        }
    }
    m
}

/// Matrix of the map induced on H^n, in the representative bases of both sides.
pub fn induced_map<L: Label, K: Label>(
    src: &FiniteComplex<L>,
    tgt: &FiniteComplex<K>,
    n: i32,
    f: &impl Fn(&L) -> Vec<(K, Q)>,
    src_reps: Option<&[Vec<BQ>]>,
) -> Result<Matrix, HomolError> {
    for k in [n - 1, n] {
        let fk = chain_map_matrix(src, tgt, k, f);
        let fk1 = chain_map_matrix(src, tgt, k + 1, f);
        if fk1.mul(&src.d(k)) != tgt.d(k).mul(&fk) {
            return Err(HomolError::NotChainMap(k));
        }
    }
    let hs = src.cohomology(n, Order::Forward)?;
    let ht = tgt.cohomology(n, Order::Forward)?;
    let reps = src_reps.unwrap_or(&hs.reps);
    let fm = chain_map_matrix(src, tgt, n, f);
    let mut out = Matrix::zeros(ht.rank, reps.len());
    for (j, r) in reps.iter().enumerate() {
        let img = fm.apply(r);
        let coords = tgt.class_of(n, &ht.reps, &img)?;
        for (i, c) in coords.into_iter().enumerate() {
            out.data[i][j] = c;
        }
    }
    Ok(out)
}

// ---- cyclic homology of Hochschild chains ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// chains ⊗ z^j, 0 ≤ j < z_order
    Negative,
    /// chains ⊗ z^j, −z_order ≤ j < z_order
    Periodic,
}

/// Cell of the cyclic complex: a chain times z^j.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ZCell {
    pub chain: Chain,
    pub z: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclicRanks {
    pub variant: Variant,
    pub z_order: u32,
    pub word_bound: usize,
    /// classes supported on words shorter than this are computed exactly
    pub window: i64,
    pub ranks: BTreeMap<i32, usize>,
    /// degrees whose neighbourhood contains no truncated term
    pub exact_degrees: Vec<i32>,
}

pub fn cyclic_complex(h: &Hoch, variant: Variant, z_order: u32, word_bound: usize) -> Result<FiniteComplex<ZCell>, HomolError> {
    let window = word_bound as i64 - z_order as i64;
    if window <= 0 {
        return Err(HomolError::EmptyWindow(window));
    }
    let lo = match variant {
        Variant::Negative => 0,
        Variant::Periodic => -(z_order as i32),
    };
    let hi = z_order as i32;
    let mut cells: BTreeMap<i32, Vec<ZCell>> = BTreeMap::new();
    for c in h.cat.chain_basis(word_bound, h.reduced) {
        for j in lo..hi {
            let deg = h.mdeg(&c) + 2 * j;
            cells.entry(deg).or_default().push(ZCell { chain: c.clone(), z: j });
        }
    }
    let ring = Ring::plain();
    let stamp = format!("{variant:?} z_order={z_order} word_bound={word_bound} window={window}");
    let as_q = |s: &crate::coeff::Scalar| s.as_q().ok_or_else(|| HomolError::NonConstant(format!("{s:?}")));
    FiniteComplex::from_operator(cells, stamp, |cell| {
        let x = crate::graded::Lin::basis(cell.chain.clone());
        let mut out = vec![];
        for (c, s) in h.b(&x, &ring).iter() {
            out.push((ZCell { chain: c.clone(), z: cell.z }, as_q(s)?));
        }
        if cell.z + 1 < hi {
            for (c, s) in h.connes_b(&x, &ring).iter() {
                out.push((ZCell { chain: c.clone(), z: cell.z + 1 }, as_q(s)?));
            }
        }
        Ok(out)
    })
}

pub fn cyclic_homology(h: &Hoch, variant: Variant, z_order: u32, word_bound: usize, order: Order) -> Result<CyclicRanks, HomolError> {
    let cx = cyclic_complex(h, variant, z_order, word_bound)?;
    let ranks = cx.ranks(order)?;
    let exact_degrees = cx
        .cells
        .keys()
        .copied()
        .filter(|&n| (n - 1..=n + 1).all(|k| cx.dropped.get(&k).copied().unwrap_or(0) == 0))
        .collect();
    Ok(CyclicRanks {
        variant,
        z_order,
        word_bound,
        window: word_bound as i64 - z_order as i64,
        ranks,
        exact_degrees,
    })
}

/// Hochschild homology (b alone) on words of length ≤ word_bound.
pub fn hochschild_complex(h: &Hoch, word_bound: usize) -> Result<FiniteComplex<Chain>, HomolError> {
    let mut cells: BTreeMap<i32, Vec<Chain>> = BTreeMap::new();
    for c in h.cat.chain_basis(word_bound, h.reduced) {
        cells.entry(h.mdeg(&c)).or_default().push(c);
    }
    let ring = Ring::plain();
    FiniteComplex::from_operator(cells, format!("hochschild word_bound={word_bound}"), |c| {
        h.b(&crate::graded::Lin::basis(c.clone()), &ring)
            .iter()
            .map(|(k, s)| s.as_q().map(|q| (k.clone(), q)).ok_or_else(|| HomolError::NonConstant(format!("{s:?}"))))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoch::{kx2, trivial};

    #[test]
    fn small_complexes() {
        let mut cells = BTreeMap::new();
        cells.insert(0, vec![0usize]);
        cells.insert(1, vec![1usize]);
        let id = FiniteComplex::from_operator(cells.clone(), String::new(), |&l| Ok(if l == 0 { vec![(1, crate::coeff::q(1))] } else { vec![] })).unwrap();
        assert_eq!(id.ranks(Order::Forward).unwrap().values().sum::<usize>(), 0);
        let zero = FiniteComplex::from_operator(cells, String::new(), |_| Ok(vec![])).unwrap();
        assert_eq!(zero.ranks(Order::Forward).unwrap().values().sum::<usize>(), 2);
    }

    #[test]
    fn d_squared_nonzero_is_refused() {
        let mut cells = BTreeMap::new();
        cells.insert(0, vec![0usize]);
        cells.insert(1, vec![1usize]);
        cells.insert(2, vec![2usize]);
        let bad = FiniteComplex::from_operator(cells, String::new(), |&l| Ok(if l < 2 { vec![(l + 1, crate::coeff::q(1))] } else { vec![] })).unwrap();
        assert_eq!(bad.cohomology(1, Order::Forward), Err(HomolError::NotComplex(0)));
    }

    #[test]
    fn trivial_category_negative_cyclic() {
        let h = Hoch::new(trivial(&Ring::plain()));
        for n in [2, 3] {
            let r = cyclic_homology(&h, Variant::Negative, n, 4, Order::Forward).unwrap();
            // one class 𝟙·z^j in each degree −1 + 2j
            let want: BTreeMap<i32, usize> = (0..n as i32).map(|j| (-1 + 2 * j, 1)).collect();
            assert_eq!(r.ranks, want);
        }
    }

    #[test]
    fn kx2_elimination_orders_agree() {
        let h = Hoch::new(kx2(&Ring::plain()));
        let cx = hochschild_complex(&h, 6).unwrap();
        assert_eq!(cx.ranks(Order::Forward).unwrap(), cx.ranks(Order::Reverse).unwrap());
        for z in [2, 3] {
            let a = cyclic_homology(&h, Variant::Negative, z, 6, Order::Forward).unwrap();
            let b = cyclic_homology(&h, Variant::Negative, z, 6, Order::Reverse).unwrap();
            assert_eq!(a.ranks, b.ranks);
        }
    }

    #[test]
    fn window_must_be_positive() {
        let h = Hoch::new(kx2(&Ring::plain()));
        assert!(matches!(cyclic_homology(&h, Variant::Negative, 3, 3, Order::Forward), Err(HomolError::EmptyWindow(0))));
    }

    #[test]
    fn solve_and_kernel() {
        let m = Matrix::from_i64(&[vec![1, 2, 3], vec![2, 4, 6]]);
        assert_eq!(m.rank(Order::Forward), 1);
        for k in m.kernel(Order::Reverse) {
            assert!(m.apply(&k).iter().all(Zero::is_zero));
        }
        let x = solve(&m, &[BQ::from_integer(2.into()), BQ::from_integer(4.into())]).unwrap();
        assert_eq!(m.apply(&x), vec![BQ::from_integer(2.into()), BQ::from_integer(4.into())]);
        assert!(solve(&m, &[BQ::one(), BQ::one()]).is_none());
    }

    /// Independent oracle: fraction-free elimination over i128 on a cleared-denominator copy.
    fn bareiss_rank(m: &Matrix) -> usize {
        let mut a: Vec<Vec<i128>> = m
            .data
            .iter()
            .map(|r| {
                let l: BigInt = r.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
                r.iter().map(|x| i128::try_from(x.numer() * (&l / x.denom())).unwrap()).collect()
            })
            .collect();
        let (rows, cols) = (m.rows, m.cols);
        let mut rank = 0;
        let mut prev = 1i128;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&i| a[i][c] != 0) else { continue };
            a.swap(rank, p);
            for i in rank + 1..rows {
                for j in c + 1..cols {
                    a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) / prev;
                }
                a[i][c] = 0;
            }
            prev = a[rank][c];
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    #[test]
    fn kx2_hochschild_ranks_match_oracle() {
        let h = Hoch::new(kx2(&Ring::plain()));
        let cx = hochschild_complex(&h, 6).unwrap();
        for (&n, _) in &cx.cells {
            let hn = cx.cohomology(n, Order::Forward).unwrap();
            let ker = cx.dim(n) - bareiss_rank(&cx.d(n));
            let im = bareiss_rank(&cx.d(n - 1));
            assert_eq!(hn.rank, ker - im, "degree {n}");
            // rank–nullity
            assert_eq!(hn.kernel_dim + cx.d(n).rank(Order::Reverse), cx.dim(n));
        }
        // HH of k[x]/(x²): A in length one, a line in each longer length below the top
        let ranks = cx.ranks(Order::Forward).unwrap();
        assert_eq!(ranks[&-1], 2);
        for n in -5..=-2 {
            assert_eq!(ranks[&n], 1);
        }
    }

    #[test]
    fn kx2_negative_cyclic_stable_in_z_order() {
        let h = Hoch::new(kx2(&Ring::plain()));
        let a = cyclic_homology(&h, Variant::Negative, 2, 7, Order::Forward).unwrap();
        let b = cyclic_homology(&h, Variant::Negative, 3, 7, Order::Forward).unwrap();
        let common: Vec<i32> = a.exact_degrees.iter().filter(|d| b.exact_degrees.contains(d)).copied().collect();
        assert!(common.len() >= 4, "{common:?}");
        for d in common {
            assert_eq!(a.ranks.get(&d), b.ranks.get(&d), "degree {d}");
        }
    }

    #[test]
    fn induced_identity_and_perturbation() {
        let h = Hoch::new(kx2(&Ring::plain()));
        let cx = cyclic_complex(&h, Variant::Negative, 2, 6).unwrap();
        let id = |c: &ZCell| vec![(c.clone(), crate::coeff::q(1))];
        let zero = |_: &ZCell| Vec::<(ZCell, Q)>::new();
        for n in [-3, -2, -1, 1] {
            let m = induced_map(&cx, &cx, n, &id, None).unwrap();
            assert_eq!(m, Matrix::identity(m.rows));
            assert!(induced_map(&cx, &cx, n, &zero, None).unwrap().is_zero());
            let hn = cx.cohomology(n, Order::Forward).unwrap();
            let prev = cx.dim(n - 1);
            if prev > 0 {
                let shift: Vec<BQ> = (0..prev).map(|i| BQ::from_integer(((i as i64 % 3) - 1).into())).collect();
                let db = cx.boundary(n, &shift);
                let moved: Vec<Vec<BQ>> = hn.reps.iter().map(|r| r.iter().zip(&db).map(|(a, b)| a + b).collect()).collect();
                assert_eq!(induced_map(&cx, &cx, n, &id, Some(&moved)).unwrap(), m);
            }
        }
    }
}
