//! Supports, lattices, and the exact classifications built on them.

mod analysis;
mod lattice;
mod offset;

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

pub use analysis::*;
pub use lattice::*;
pub use offset::*;

use crate::error::{Error, Result};

/// An exponent vector. Ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn zero(n: usize) -> Self {
        LatticePoint(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = vec![0; n];
        v[j] = 1;
        LatticePoint(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl Index<usize> for LatticePoint {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl From<&[i64]> for LatticePoint {
    fn from(v: &[i64]) -> Self {
        LatticePoint(v.to_vec())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Finite set of lattice points, stored sorted and without duplicates.
///
/// `Support::new` rejects the empty set; `Support::empty` exists for
/// coordinate-wise subsets such as a varied set `B` or an omega-support.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Support {
    dim: usize,
    points: Vec<LatticePoint>,
}

impl Support {
    pub fn new(dim: usize, points: Vec<LatticePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        Support::possibly_empty(dim, points)
    }

    /// Like `new` but allows the empty set.
    pub fn possibly_empty(dim: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0].coords().to_vec()));
        }
        Ok(Support { dim, points })
    }

    pub fn from_rows<R: AsRef<[i64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        Support::new(
            dim,
            rows.iter()
                .map(|r| LatticePoint::from(r.as_ref()))
                .collect(),
        )
    }

    /// Points already known to be distinct (e.g. an injective image).
    pub(crate) fn from_points_unchecked(dim: usize, mut points: Vec<LatticePoint>) -> Self {
        points.sort();
        debug_assert!(points.windows(2).all(|w| w[0] != w[1]));
        Support { dim, points }
    }

    pub fn empty(dim: usize) -> Self {
        Support {
            dim,
            points: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    pub fn position(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.position(p).is_some()
    }

    pub fn is_subset_of(&self, other: &Support) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    pub fn filter(&self, mut keep: impl FnMut(&LatticePoint) -> bool) -> Support {
        Support {
            dim: self.dim,
            points: self.points.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Support) -> Support {
        self.filter(|p| !other.contains(p))
    }

    pub fn union(&self, other: &Support) -> Support {
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().filter(|p| !self.contains(p)).cloned());
        Support::from_points_unchecked(self.dim, pts)
    }

    pub fn translate(&self, v: &LatticePoint) -> Support {
        Support {
            dim: self.dim,
            points: self.points.iter().map(|p| p.add(v)).collect(),
        }
    }

    /// Coordinate-wise minimum; `None` for the empty set.
    pub fn coordinate_min(&self) -> Option<LatticePoint> {
        let first = self.points.first()?;
        let mut m = first.coords().to_vec();
        for p in &self.points[1..] {
            for (a, &b) in m.iter_mut().zip(p.coords()) {
                *a = (*a).min(b);
            }
        }
        Some(LatticePoint(m))
    }
}

/// Ordered tuple of supports sharing an ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportCollection {
    dim: usize,
    supports: Vec<Support>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportsJson {
    pub n: usize,
    pub supports: Vec<Vec<Vec<i64>>>,
}

impl SupportCollection {
    /// Members may be empty here; callers needing nonempty members check
    /// `has_empty_member`.
    pub fn new(dim: usize, supports: Vec<Support>) -> Result<Self> {
        if supports.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(s) = supports.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(SupportCollection { dim, supports })
    }

    pub(crate) fn from_supports_unchecked(dim: usize, supports: Vec<Support>) -> Self {
        SupportCollection { dim, supports }
    }

    /// Convenience constructor from nested coordinate lists.
    pub fn from_lists(dim: usize, lists: &[Vec<Vec<i64>>]) -> Result<Self> {
        let supports: Result<Vec<Support>> = lists
            .iter()
            .map(|l| {
                Support::possibly_empty(
                    dim,
                    l.iter().map(|p| LatticePoint::new(p.clone())).collect(),
                )
            })
            .collect();
        SupportCollection::new(dim, supports?)
    }

    pub fn repeated(support: &Support, times: usize) -> Self {
        SupportCollection {
            dim: support.dim(),
            supports: vec![support.clone(); times],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of members `N`.
    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.supports.len() == self.dim
    }

    pub fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                n: self.dim,
                supports: self.supports.len(),
            })
        }
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    pub fn get(&self, i: usize) -> &Support {
        &self.supports[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Support> {
        self.supports.iter()
    }

    pub fn total_points(&self) -> usize {
        self.supports.iter().map(Support::len).sum()
    }

    pub fn has_empty_member(&self) -> bool {
        self.supports.iter().any(Support::is_empty)
    }

    /// `C_I` for an index list `I` (0-based).
    pub fn subcollection(&self, indices: &[usize]) -> Result<SupportCollection> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        let supports: Result<Vec<Support>> = indices
            .iter()
            .map(|&i| {
                self.supports.get(i).cloned().ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                })
            })
            .collect();
        Ok(SupportCollection {
            dim: self.dim,
            supports: supports?,
        })
    }

    pub fn is_subset_of(&self, other: &SupportCollection) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self
                .supports
                .iter()
                .zip(&other.supports)
                .all(|(a, b)| a.is_subset_of(b))
    }

    pub fn difference(&self, other: &SupportCollection) -> SupportCollection {
        self.zip_with(other, Support::difference)
    }

    pub fn union(&self, other: &SupportCollection) -> SupportCollection {
        self.zip_with(other, Support::union)
    }

    fn zip_with(
        &self,
        other: &SupportCollection,
        f: impl Fn(&Support, &Support) -> Support,
    ) -> SupportCollection {
        SupportCollection {
            dim: self.dim,
            supports: self
                .supports
                .iter()
                .zip(&other.supports)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn map_supports(&self, f: impl Fn(&Support) -> Support) -> SupportCollection {
        SupportCollection {
            dim: self.dim,
            supports: self.supports.iter().map(f).collect(),
        }
    }

    pub fn map_supports_indexed(
        &self,
        mut f: impl FnMut(usize, &Support) -> Support,
    ) -> SupportCollection {
        SupportCollection {
            dim: self.dim,
            supports: self
                .supports
                .iter()
                .enumerate()
                .map(|(i, a)| f(i, a))
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> SupportsJson {
        SupportsJson {
            n: self.dim,
            supports: self
                .supports
                .iter()
                .map(|s| s.points().iter().map(|p| p.coords().to_vec()).collect())
                .collect(),
        }
    }

    pub fn from_json_value(j: &SupportsJson) -> Result<Self> {
        SupportCollection::from_lists(j.n, &j.supports)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: SupportsJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        SupportCollection::from_json_value(&j)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("supports serialize")
    }
}

impl<'a> IntoIterator for &'a SupportCollection {
    type Item = &'a Support;
    type IntoIter = std::slice::Iter<'a, Support>;
    fn into_iter(self) -> Self::IntoIter {
        self.supports.iter()
    }
}

/// Lattice points of `k * Δ_n` (the scaled standard simplex).
pub fn simplex_points(n: usize, k: i64) -> Support {
    let mut pts = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(j: usize, left: i64, cur: &mut Vec<i64>, pts: &mut Vec<LatticePoint>) {
        if j == cur.len() {
            pts.push(LatticePoint::new(cur.clone()));
            return;
        }
        for v in 0..=left {
            cur[j] = v;
            rec(j + 1, left - v, cur, pts);
        }
        cur[j] = 0;
    }
    rec(0, k, &mut cur, &mut pts);
    Support::from_points_unchecked(n, pts)
}

/// Lattice points of the box `[0,k] x [0,l]`.
pub fn rectangle_points(k: i64, l: i64) -> Support {
    let pts = (0..=k)
        .flat_map(|a| (0..=l).map(move |b| LatticePoint::new(vec![a, b])))
        .collect();
    Support::from_points_unchecked(2, pts)
}
