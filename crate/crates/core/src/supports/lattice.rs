//! Integer lattice arithmetic: echelon bases, Smith normal form with
//! transforms, saturation, and integer monomial maps.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{LatticePoint, Support, SupportCollection};
use crate::error::{Error, Result};
use crate::scalar::ExactInt;

/// Lattice generated by a finite set of integer vectors.
///
/// `basis` lists generator vectors (the columns of the basis matrix) in
/// echelon order: the last nonzero coordinate of `basis[k]` is strictly
/// increasing in `k`, its value is positive, and the entries of later
/// vectors at that coordinate are reduced modulo it. For a full-rank
/// lattice `basis[0]` is therefore `k * e_1` with `k` minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SublatticeInfo<T> {
    pub ambient_dim: usize,
    pub basis: Vec<Vec<T>>,
    pub rank: usize,
    pub invariant_factors: Vec<T>,
    /// `None` stands for an infinite index (rank below the ambient dimension).
    pub index: Option<T>,
}

impl<T: ExactInt> SublatticeInfo<T> {
    pub fn from_generators(gens: Vec<Vec<T>>, n: usize) -> Self {
        let basis = echelon_basis(gens, n);
        let smith = smith_form(basis.clone(), n);
        let rank = basis.len();
        debug_assert_eq!(rank, smith.factors.len());
        let index = (rank == n).then(|| {
            smith
                .factors
                .iter()
                .fold(T::one(), |acc, k| acc * k.clone())
        });
        SublatticeInfo {
            ambient_dim: n,
            basis,
            rank,
            invariant_factors: smith.factors,
            index,
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.ambient_dim
    }

    /// Index greater than one, counting an infinite index as greater.
    pub fn is_proper(&self) -> bool {
        match &self.index {
            None => true,
            Some(k) => !k.is_one(),
        }
    }

    pub fn index_string(&self) -> String {
        match &self.index {
            None => "inf".to_string(),
            Some(k) => format!("{k:?}"),
        }
    }

    /// Exact membership test by echelon reduction.
    pub fn contains(&self, v: &[i64]) -> bool {
        let mut w: Vec<T> = v.iter().map(|&x| T::from(x)).collect();
        let mut basis_iter = self.basis.iter().rev().peekable();
        for c in (0..self.ambient_dim).rev() {
            let pivot_here = basis_iter
                .peek()
                .filter(|b| last_nonzero(b) == Some(c))
                .is_some();
            if pivot_here {
                let b = basis_iter.next().unwrap();
                let (q, r) = w[c].div_mod_floor(&b[c]);
                if !r.is_zero() {
                    return false;
                }
                sub_scaled(&mut w, &q, b);
            } else if !w[c].is_zero() {
                return false;
            }
        }
        w.iter().all(Zero::is_zero)
    }
}

fn last_nonzero<T: ExactInt>(v: &[T]) -> Option<usize> {
    v.iter().rposition(|x| !x.is_zero())
}

fn sub_scaled<T: ExactInt>(row: &mut [T], q: &T, by: &[T]) {
    if q.is_zero() {
        return;
    }
    for (a, b) in row.iter_mut().zip(by) {
        *a = a.clone() - q.clone() * b.clone();
    }
}

fn add_scaled<T: ExactInt>(row: &mut [T], q: &T, by: &[T]) {
    if q.is_zero() {
        return;
    }
    for (a, b) in row.iter_mut().zip(by) {
        *a = a.clone() + q.clone() * b.clone();
    }
}

/// Deterministic echelon (Hermite-reduced) basis of the lattice spanned by
/// `gens`, processed from the last coordinate down to the first.
pub fn echelon_basis<T: ExactInt>(gens: Vec<Vec<T>>, n: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = gens
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut basis: Vec<(usize, Vec<T>)> = Vec::new();
    for c in (0..n).rev() {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz
                .iter()
                .min_by(|&&a, &&b| rows[a][c].abs().cmp(&rows[b][c].abs()).then(a.cmp(&b)))
                .unwrap();
            let piv = rows[p].clone();
            for &i in &nz {
                if i != p {
                    let q = rows[i][c].div_floor(&piv[c]);
                    sub_scaled(&mut rows[i], &q, &piv);
                }
            }
        }
        if let Some(i) = rows.iter().position(|r| !r[c].is_zero()) {
            let mut v = rows.remove(i);
            if v[c].is_negative() {
                v.iter_mut().for_each(|x| *x = -x.clone());
            }
            basis.push((c, v));
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    basis.sort_by_key(|(c, _)| *c);
    for k in 1..basis.len() {
        for j in (0..k).rev() {
            let (cj, vj) = (basis[j].0, basis[j].1.clone());
            let q = basis[k].1[cj].div_floor(&vj[cj]);
            sub_scaled(&mut basis[k].1, &q, &vj);
        }
    }
    basis.into_iter().map(|(_, v)| v).collect()
}

/// Smith normal form `U * M * V = diag(factors)`; `v` and its inverse are
/// kept, `U` is not needed by any caller.
#[derive(Clone, Debug)]
pub struct SmithForm<T> {
    pub factors: Vec<T>,
    pub v: Vec<Vec<T>>,
    pub v_inv: Vec<Vec<T>>,
}

impl<T: ExactInt> SmithForm<T> {
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Rows of `V^-1` spanning the saturation of the row lattice.
    pub fn saturation_rows(&self) -> Vec<Vec<T>> {
        self.v_inv[..self.rank()].to_vec()
    }

    /// Columns of `V` beyond the rank: a basis of the integer kernel.
    pub fn kernel_columns(&self) -> Vec<Vec<T>> {
        let n = self.v.len();
        (self.rank()..n)
            .map(|j| (0..n).map(|i| self.v[i][j].clone()).collect())
            .collect()
    }

    /// Coordinates of `x` with respect to the rows of `V^-1`.
    pub fn coordinates(&self, x: &[T]) -> Vec<T> {
        let n = self.v.len();
        (0..n)
            .map(|j| {
                (0..n).fold(T::zero(), |acc, i| {
                    acc + x[i].clone() * self.v[i][j].clone()
                })
            })
            .collect()
    }
}

fn identity<T: ExactInt>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

pub fn smith_form<T: ExactInt>(m: Vec<Vec<T>>, n: usize) -> SmithForm<T> {
    let mut a = m;
    let rows = a.len();
    let mut v = identity::<T>(n);
    let mut w = identity::<T>(n);

    let swap_cols =
        |a: &mut Vec<Vec<T>>, v: &mut Vec<Vec<T>>, w: &mut Vec<Vec<T>>, i: usize, j: usize| {
            if i == j {
                return;
            }
            for r in a.iter_mut() {
                r.swap(i, j);
            }
            for r in v.iter_mut() {
                r.swap(i, j);
            }
            w.swap(i, j);
        };
    // col_dst -= q * col_src
    let sub_col = |a: &mut Vec<Vec<T>>,
                   v: &mut Vec<Vec<T>>,
                   w: &mut Vec<Vec<T>>,
                   src: usize,
                   dst: usize,
                   q: &T| {
        if q.is_zero() {
            return;
        }
        for r in a.iter_mut() {
            let s = r[src].clone();
            r[dst] = r[dst].clone() - q.clone() * s;
        }
        for r in v.iter_mut() {
            let s = r[src].clone();
            r[dst] = r[dst].clone() - q.clone() * s;
        }
        let wd = w[dst].clone();
        add_scaled(&mut w[src], q, &wd);
    };

    let mut t = 0;
    while t < rows.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..n {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        swap_cols(&mut a, &mut v, &mut w, t, bj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    let pr = a[t].clone();
                    sub_scaled(&mut a[i], &q, &pr);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    sub_col(&mut a, &mut v, &mut w, t, j, &q);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..n {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                swap_cols(&mut a, &mut v, &mut w, t, best.1);
                continue;
            }
            let bad =
                (t + 1..rows).find(|&i| (t + 1..n).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            if let Some(i) = bad {
                let ri = a[i].clone();
                add_scaled(&mut a[t], &T::one(), &ri);
                continue;
            }
            break;
        }
        if a[t][t].is_negative() {
            a[t].iter_mut().for_each(|x| *x = -x.clone());
        }
        t += 1;
    }
    let factors = (0..t).map(|k| a[k][k].clone()).collect();
    SmithForm {
        factors,
        v,
        v_inv: w,
    }
}

/// Complete a primitive system of integer row vectors to a unimodular
/// matrix whose first rows are exactly the given ones.
pub fn extend_to_unimodular<T: ExactInt>(rows: &[Vec<T>], n: usize) -> Result<Vec<Vec<T>>> {
    let smith = smith_form(rows.to_vec(), n);
    if smith.rank() != rows.len() || smith.factors.iter().any(|k| !k.is_one()) {
        return Err(Error::RankDeficient {
            rank: smith.rank(),
            needed: rows.len(),
        });
    }
    let mut out = rows.to_vec();
    out.extend(smith.v_inv[rows.len()..].iter().cloned());
    Ok(out)
}

pub fn support_generators<T: ExactInt>(a: &Support) -> Vec<Vec<T>> {
    let Some(base) = a.points().first() else {
        return Vec::new();
    };
    a.points()[1..]
        .iter()
        .map(|p| {
            p.coords()
                .iter()
                .zip(base.coords())
                .map(|(&x, &y)| T::from(x - y))
                .collect()
        })
        .collect()
}

/// L[A]: the lattice generated by all differences of points of `a`.
pub fn difference_lattice<T: ExactInt>(a: &Support) -> SublatticeInfo<T> {
    SublatticeInfo::from_generators(support_generators(a), a.dim())
}

/// L[C]: the join of the difference lattices of all members.
pub fn collection_lattice<T: ExactInt>(c: &SupportCollection) -> SublatticeInfo<T> {
    let gens = c.iter().flat_map(support_generators::<T>).collect();
    SublatticeInfo::from_generators(gens, c.dim())
}

/// Integer linear map on exponent vectors; column `j` is the image of `e_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMap {
    /// Row-major `n x n` integer matrix.
    matrix: Vec<Vec<i64>>,
    determinant: i64,
}

impl MonomialMap {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let n = matrix.len();
        if let Some(r) = matrix.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        let big: Vec<Vec<BigInt>> = matrix
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let det = determinant(&big);
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let determinant = det.to_i64().ok_or(Error::Capacity {
            what: "64-bit determinant",
            limit: 64,
            got: det.bits() as usize,
        })?;
        Ok(MonomialMap {
            matrix,
            determinant,
        })
    }

    pub fn from_columns(cols: &[Vec<i64>]) -> Result<Self> {
        let n = cols.len();
        MonomialMap::new(
            (0..n)
                .map(|i| (0..n).map(|j| cols[j][i]).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        MonomialMap {
            matrix: identity::<i64>(n),
            determinant: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn determinant(&self) -> i64 {
        self.determinant
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.matrix.iter().map(|r| r[j]).collect()
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant.abs() == 1
    }

    pub fn apply(&self, p: &LatticePoint) -> LatticePoint {
        LatticePoint::new(
            self.matrix
                .iter()
                .map(|r| r.iter().zip(p.coords()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// The unique rational preimage, if it is integral.
    pub fn preimage(&self, p: &LatticePoint) -> Result<LatticePoint> {
        let n = self.dim();
        let mut aug: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = self.matrix[i]
                    .iter()
                    .map(|&x| BigRational::from_integer(x.into()))
                    .collect();
                row.push(BigRational::from_integer(p[i].into()));
                row
            })
            .collect();
        let sol = solve_rational(&mut aug).ok_or(Error::SingularMatrix)?;
        let coords: Option<Vec<i64>> = sol
            .iter()
            .map(|q| q.is_integer().then(|| q.to_integer().to_i64()).flatten())
            .collect();
        coords
            .map(LatticePoint::new)
            .ok_or_else(|| Error::NotInImage(p.coords().to_vec()))
    }

    /// Integer inverse; only unimodular maps have one.
    pub fn inverse(&self) -> Result<MonomialMap> {
        let n = self.dim();
        let cols: Result<Vec<Vec<i64>>> = (0..n)
            .map(|j| {
                self.preimage(&LatticePoint::unit(n, j))
                    .map(|p| p.coords().to_vec())
            })
            .collect();
        MonomialMap::from_columns(&cols?)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MonomialMap) -> MonomialMap {
        let n = self.dim();
        let m: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum())
                    .collect()
            })
            .collect();
        MonomialMap {
            matrix: m,
            determinant: self.determinant * other.determinant,
        }
    }

    pub fn apply_support(&self, a: &Support) -> Support {
        Support::from_points_unchecked(a.dim(), a.points().iter().map(|p| self.apply(p)).collect())
    }

    pub fn preimage_support(&self, a: &Support) -> Result<Support> {
        let pts: Result<Vec<LatticePoint>> = a.points().iter().map(|p| self.preimage(p)).collect();
        Ok(Support::from_points_unchecked(a.dim(), pts?))
    }

    pub fn apply_collection(&self, c: &SupportCollection) -> SupportCollection {
        SupportCollection::from_supports_unchecked(
            c.dim(),
            c.iter().map(|a| self.apply_support(a)).collect(),
        )
    }

    pub fn preimage_collection(&self, c: &SupportCollection) -> Result<SupportCollection> {
        let s: Result<Vec<Support>> = c.iter().map(|a| self.preimage_support(a)).collect();
        Ok(SupportCollection::from_supports_unchecked(c.dim(), s?))
    }
}

/// Fraction-free (Bareiss) determinant.
pub fn determinant<T: ExactInt>(m: &[Vec<T>]) -> T {
    let n = m.len();
    if n == 0 {
        return T::one();
    }
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut sign = T::one();
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return T::zero();
            };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = v / prev.clone();
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Solves a square augmented system in place; `None` if singular.
pub(crate) fn solve_rational(aug: &mut [Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let n = aug.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !aug[r][c].is_zero())?;
        aug.swap(c, p);
        let piv = aug[c][c].clone();
        for x in aug[c].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        for r in 0..n {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                let pr = aug[c].clone();
                for (x, y) in aug[r].iter_mut().zip(pr) {
                    *x = x.clone() - f.clone() * y;
                }
            }
        }
    }
    Some(aug.iter().map(|r| r[n].clone()).collect())
}
