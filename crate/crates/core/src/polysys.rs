//! Sparse Laurent systems over a support collection.

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{cpowi, norm_inf, Real, C};
use crate::supports::{LatticePoint, MonomialMap, Support, SupportCollection, SupportsJson};

/// A point of the algebraic torus.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint<T> {
    coords: Vec<C<T>>,
}

impl<T: Real> TorusPoint<T> {
    /// Rejects coordinates with modulus at or below `floor`.
    pub fn new(coords: Vec<C<T>>, floor: T) -> Result<Self> {
        if coords.iter().any(|z| !(z.norm() > floor)) {
            return Err(Error::ZeroCoordinate);
        }
        Ok(TorusPoint { coords })
    }

    pub(crate) fn new_unchecked(coords: Vec<C<T>>) -> Self {
        TorusPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C<T>] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<C<T>> {
        self.coords
    }

    pub fn distance(&self, other: &TorusPoint<T>) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn norm(&self) -> T {
        norm_inf(&self.coords)
    }

    pub fn min_modulus(&self) -> T {
        self.coords
            .iter()
            .fold(T::infinity(), |m, z| m.min(z.norm()))
    }

    /// `φ(x)_j = x^{Φ e_j}`; the image of `x` under the torus map induced by `Φ`.
    pub fn monomial_image(&self, map: &MonomialMap) -> TorusPoint<T> {
        let n = map.dim();
        TorusPoint::new_unchecked(
            (0..n)
                .map(|j| monomial(&self.coords, &map.column(j)))
                .collect(),
        )
    }

    pub fn cast<U: Real>(&self) -> TorusPoint<U> {
        TorusPoint::new_unchecked(self.coords.iter().map(|z| cast_c(*z)).collect())
    }
}

pub(crate) fn cast_c<T: Real, U: Real>(z: C<T>) -> C<U> {
    C::new(
        U::c(z.re.to_f64().unwrap_or(f64::NAN)),
        U::c(z.im.to_f64().unwrap_or(f64::NAN)),
    )
}

fn zero_c<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

/// `x^α` with Laurent exponents.
pub fn monomial<T: Real>(x: &[C<T>], alpha: &[i64]) -> C<T> {
    x.iter()
        .zip(alpha)
        .fold(C::new(T::one(), T::zero()), |acc, (&z, &e)| {
            acc * cpowi(z, e)
        })
}

/// Value of `x^α` and its gradient, without dividing by `x_j`, so points with
/// zero coordinates are fine as long as the exponents there are nonnegative.
fn monomial_with_gradient<T: Real>(x: &[C<T>], alpha: &[i64], grad: &mut [C<T>]) -> C<T> {
    let n = x.len();
    let one = C::new(T::one(), T::zero());
    let powers: Vec<C<T>> = x.iter().zip(alpha).map(|(&z, &e)| cpowi(z, e)).collect();
    // prefix[j] = Π_{k<j} powers[k]
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(one);
    for p in &powers {
        let last = *prefix.last().unwrap();
        prefix.push(last * p);
    }
    let mut suffix = one;
    for j in (0..n).rev() {
        let e = alpha[j];
        grad[j] = if e == 0 {
            zero_c()
        } else {
            cpowi(x[j], e - 1) * T::c(e as f64) * prefix[j] * suffix
        };
        suffix = suffix * powers[j];
    }
    prefix[n]
}

/// Coefficient vector `ℱ ∈ ℂ^𝒜`, aligned with the sorted points of each support.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem<T> {
    collection: SupportCollection,
    coefficients: Vec<Vec<C<T>>>,
}

impl<T: Real> SparseSystem<T> {
    pub fn new(collection: SupportCollection, coefficients: Vec<Vec<C<T>>>) -> Result<Self> {
        if coefficients.len() != collection.len() {
            return Err(Error::DimensionMismatch {
                expected: collection.len(),
                found: coefficients.len(),
            });
        }
        for (i, (a, c)) in collection.iter().zip(&coefficients).enumerate() {
            if a.len() != c.len() {
                return Err(Error::CoefficientMismatch {
                    support: i,
                    expected: a.len(),
                    found: c.len(),
                });
            }
        }
        Ok(SparseSystem {
            collection,
            coefficients,
        })
    }

    pub fn zeros(collection: &SupportCollection) -> Self {
        let coefficients = collection.iter().map(|a| vec![zero_c(); a.len()]).collect();
        SparseSystem {
            collection: collection.clone(),
            coefficients,
        }
    }

    /// Builds a system from `(exponent, coefficient)` terms; supports are the
    /// exponents listed (zero coefficients included), duplicates rejected.
    pub fn from_terms(dim: usize, polys: &[Vec<(Vec<i64>, C<T>)>]) -> Result<Self> {
        let mut supports = Vec::with_capacity(polys.len());
        for terms in polys {
            let pts = terms
                .iter()
                .map(|(e, _)| LatticePoint::new(e.clone()))
                .collect();
            supports.push(Support::possibly_empty(dim, pts)?);
        }
        let collection = SupportCollection::new(dim, supports)?;
        let mut sys = SparseSystem::zeros(&collection);
        for (i, terms) in polys.iter().enumerate() {
            for (e, c) in terms {
                let k = collection
                    .get(i)
                    .position(&LatticePoint::new(e.clone()))
                    .expect("point present");
                sys.coefficients[i][k] = *c;
            }
        }
        Ok(sys)
    }

    pub fn collection(&self) -> &SupportCollection {
        &self.collection
    }

    pub fn coefficients(&self) -> &[Vec<C<T>>] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.collection.dim()
    }

    pub fn len(&self) -> usize {
        self.collection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.collection.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.collection.is_square()
    }

    pub fn coefficient(&self, i: usize, alpha: &LatticePoint) -> Option<C<T>> {
        self.collection
            .get(i)
            .position(alpha)
            .map(|k| self.coefficients[i][k])
    }

    pub fn set_coefficient(&mut self, i: usize, alpha: &LatticePoint, value: C<T>) -> Result<()> {
        let k = self
            .collection
            .get(i)
            .position(alpha)
            .ok_or(Error::NotSubset)?;
        self.coefficients[i][k] = value;
        Ok(())
    }

    /// Support of the nonzero coefficients.
    pub fn nonzero_support(&self) -> SupportCollection {
        self.collection.map_supports_indexed(|i, a| {
            let mut k = 0;
            a.filter(|_| {
                let keep = !self.coefficients[i][k].is_zero();
                k += 1;
                keep
            })
        })
    }

    fn check_point(&self, x: &[C<T>]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|z| z.is_zero()) {
            return Err(Error::ZeroCoordinate);
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &TorusPoint<T>) -> Result<Vec<C<T>>> {
        self.check_point(x.coords())?;
        Ok(self.eval_raw(x.coords()))
    }

    pub fn jacobian(&self, x: &TorusPoint<T>) -> Result<Vec<Vec<C<T>>>> {
        self.check_point(x.coords())?;
        Ok(self.eval_with_jacobian(x.coords()).1)
    }

    pub(crate) fn eval_raw(&self, x: &[C<T>]) -> Vec<C<T>> {
        self.collection
            .iter()
            .zip(&self.coefficients)
            .map(|(a, cs)| {
                a.iter()
                    .zip(cs)
                    .filter(|(_, c)| !c.is_zero())
                    .fold(zero_c(), |acc, (p, c)| acc + c * monomial(x, p.coords()))
            })
            .collect()
    }

    pub(crate) fn eval_with_jacobian(&self, x: &[C<T>]) -> (Vec<C<T>>, Vec<Vec<C<T>>>) {
        let n = self.dim();
        let mut grad = vec![zero_c(); n];
        let mut values = Vec::with_capacity(self.len());
        let mut jac = Vec::with_capacity(self.len());
        for (a, cs) in self.collection.iter().zip(&self.coefficients) {
            let mut v = zero_c();
            let mut row = vec![zero_c(); n];
            for (p, c) in a.iter().zip(cs) {
                if c.is_zero() {
                    continue;
                }
                let m = monomial_with_gradient(x, p.coords(), &mut grad);
                v = v + c * m;
                for (r, g) in row.iter_mut().zip(&grad) {
                    *r = *r + c * g;
                }
            }
            values.push(v);
            jac.push(row);
        }
        (values, jac)
    }

    /// `(ℱ_ℬ, ℱ_𝒞)` over the same collection; their sum is `self`.
    pub fn split(&self, b: &SupportCollection) -> Result<(Self, Self)> {
        if !b.is_subset_of(&self.collection) {
            return Err(Error::NotSubset);
        }
        let mut on = SparseSystem::zeros(&self.collection);
        let mut off = SparseSystem::zeros(&self.collection);
        for (i, a) in self.collection.iter().enumerate() {
            for (k, p) in a.iter().enumerate() {
                let c = self.coefficients[i][k];
                if b.get(i).contains(p) {
                    on.coefficients[i][k] = c;
                } else {
                    off.coefficients[i][k] = c;
                }
            }
        }
        Ok((on, off))
    }

    /// `s F + r G` for systems over the same collection.
    pub fn combine(&self, s: C<T>, other: &SparseSystem<T>, r: C<T>) -> Result<Self> {
        self.require_same_collection(other)?;
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(u, v)| u.iter().zip(v).map(|(a, b)| s * a + r * b).collect())
            .collect();
        Ok(SparseSystem {
            collection: self.collection.clone(),
            coefficients,
        })
    }

    pub fn add(&self, other: &SparseSystem<T>) -> Result<Self> {
        let one = C::new(T::one(), T::zero());
        self.combine(one, other, one)
    }

    fn require_same_collection(&self, other: &SparseSystem<T>) -> Result<()> {
        if self.collection != other.collection {
            return Err(Error::Precondition(crate::error::Precondition::NotGeneric(
                "systems live on different support collections".into(),
            )));
        }
        Ok(())
    }

    /// True when the two systems have the same coefficients off `b`.
    pub fn agrees_off(&self, other: &SparseSystem<T>, b: &SupportCollection) -> Result<bool> {
        self.require_same_collection(other)?;
        let (_, mine) = self.split(b)?;
        let (_, theirs) = other.split(b)?;
        Ok(mine.coefficients == theirs.coefficients)
    }

    /// Copy of `self` with the coefficients on `b` redrawn at random.
    pub fn resample_on(&self, b: &SupportCollection, rng: &mut impl Rng) -> Result<Self> {
        self.resample_on_scaled(b, T::one(), rng)
    }

    /// As [`SparseSystem::resample_on`] with the draws multiplied by `scale`.
    pub fn resample_on_scaled(
        &self,
        b: &SupportCollection,
        scale: T,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !b.is_subset_of(&self.collection) {
            return Err(Error::NotSubset);
        }
        let mut out = self.clone();
        for (i, a) in self.collection.iter().enumerate() {
            for (k, p) in a.iter().enumerate() {
                if b.get(i).contains(p) {
                    out.coefficients[i][k] = rng::annulus::<T>(rng) * scale;
                }
            }
        }
        Ok(out)
    }

    /// Largest coefficient modulus, at least one.
    pub fn coefficient_scale(&self) -> T {
        self.coefficients
            .iter()
            .flatten()
            .fold(T::one(), |m, z| m.max(z.norm()))
    }

    /// Re-expresses `self` over a larger collection, filling zeros.
    pub fn embed(&self, bigger: &SupportCollection) -> Result<Self> {
        if !self.collection.is_subset_of(bigger) || bigger.len() != self.len() {
            return Err(Error::NotSubset);
        }
        let mut out = SparseSystem::zeros(bigger);
        for (i, a) in self.collection.iter().enumerate() {
            for (k, p) in a.iter().enumerate() {
                out.set_coefficient(i, p, self.coefficients[i][k])?;
            }
        }
        Ok(out)
    }

    /// Restricts `self` to a smaller collection; coefficients outside it must be zero.
    pub fn restrict(&self, smaller: &SupportCollection) -> Result<Self> {
        if !smaller.is_subset_of(&self.collection) || smaller.len() != self.len() {
            return Err(Error::NotSubset);
        }
        let mut out = SparseSystem::zeros(smaller);
        for (i, a) in self.collection.iter().enumerate() {
            for (k, p) in a.iter().enumerate() {
                let c = self.coefficients[i][k];
                if smaller.get(i).contains(p) {
                    out.set_coefficient(i, p, c)?;
                } else if !c.is_zero() {
                    return Err(Error::NotSubset);
                }
            }
        }
        Ok(out)
    }

    /// Keeps only the terms on `smaller`, dropping the rest.
    pub fn truncate(&self, smaller: &SupportCollection) -> Result<Self> {
        if !smaller.is_subset_of(&self.collection) || smaller.len() != self.len() {
            return Err(Error::NotSubset);
        }
        let mut out = SparseSystem::zeros(smaller);
        for (i, a) in smaller.iter().enumerate() {
            for p in a.iter() {
                let c = self.coefficient(i, p).expect("subset");
                out.set_coefficient(i, p, c)?;
            }
        }
        Ok(out)
    }

    /// Multiplies `f_i` by `x^{-shift_i}`; torus zeros are unchanged.
    pub fn translate(&self, shifts: &[LatticePoint]) -> Result<Self> {
        if shifts.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: shifts.len(),
            });
        }
        let collection = self
            .collection
            .map_supports_indexed(|i, a| a.translate(&negate(&shifts[i])));
        // Translation preserves the lexicographic order, so coefficients stay aligned.
        Ok(SparseSystem {
            collection,
            coefficients: self.coefficients.clone(),
        })
    }

    /// System supported on `Φ(𝒜)` with the same coefficients: `G(x) = F(φ(x))`
    /// becomes `self` evaluated at the image torus point.
    pub fn apply_monomial_map(&self, map: &MonomialMap) -> Result<Self> {
        self.remap(map, |p| Ok(map.apply(p)))
    }

    /// System `G` supported on `Φ⁻¹(𝒜)` with `G(φ(x)) = F(x)`.
    pub fn pullback(&self, map: &MonomialMap) -> Result<Self> {
        self.remap(map, |p| map.preimage(p))
    }

    fn remap(
        &self,
        map: &MonomialMap,
        f: impl Fn(&LatticePoint) -> Result<LatticePoint>,
    ) -> Result<Self> {
        if map.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: map.dim(),
            });
        }
        let mut polys = Vec::with_capacity(self.len());
        for (a, cs) in self.collection.iter().zip(&self.coefficients) {
            let terms: Result<Vec<(Vec<i64>, C<T>)>> = a
                .iter()
                .zip(cs)
                .map(|(p, c)| Ok((f(p)?.coords().to_vec(), *c)))
                .collect();
            polys.push(terms?);
        }
        SparseSystem::from_terms(self.dim(), &polys)
    }

    pub fn cast<U: Real>(&self) -> SparseSystem<U> {
        SparseSystem {
            collection: self.collection.clone(),
            coefficients: self
                .coefficients
                .iter()
                .map(|r| r.iter().map(|z| cast_c(*z)).collect())
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> SystemJson {
        SystemJson {
            collection: self.collection.to_json_value(),
            coefficients: self
                .coefficients
                .iter()
                .map(|r| r.iter().map(|z| ComplexJson::from_c(*z)).collect())
                .collect(),
        }
    }

    pub fn from_json_value(j: &SystemJson) -> Result<Self> {
        let collection = SupportCollection::from_json_value(&j.collection)?;
        let coefficients = j
            .coefficients
            .iter()
            .map(|r| r.iter().map(|z| z.to_c()).collect())
            .collect();
        SparseSystem::new(collection, coefficients)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: SystemJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        SparseSystem::from_json_value(&j)
    }
}

fn negate(p: &LatticePoint) -> LatticePoint {
    LatticePoint::new(p.coords().iter().map(|x| -x).collect())
}

/// Independent coefficients on the annulus `0.5 <= |c| <= 1.5`.
pub fn random_system<T: Real>(c: &SupportCollection, seed: u64) -> SparseSystem<T> {
    let mut rng = rng::stream(seed, rng::STREAM_SYSTEM);
    let coefficients = c
        .iter()
        .map(|a| (0..a.len()).map(|_| rng::annulus(&mut rng)).collect())
        .collect();
    SparseSystem {
        collection: c.clone(),
        coefficients,
    }
}

/// The pencil `t F + (1 - t) γ G`.
#[derive(Clone, Debug)]
pub struct SegmentFamily<T> {
    pub f: SparseSystem<T>,
    pub g: SparseSystem<T>,
    pub gamma: C<T>,
}

/// Values, `x`-Jacobian and `t`-derivative of a homotopy.
pub(crate) type HomotopyValues<T> = (Vec<C<T>>, Vec<Vec<C<T>>>, Vec<C<T>>);

impl<T: Real> SegmentFamily<T> {
    pub fn new(f: SparseSystem<T>, g: SparseSystem<T>) -> Result<Self> {
        Self::with_gamma(f, g, C::new(T::one(), T::zero()))
    }

    pub fn with_gamma(f: SparseSystem<T>, g: SparseSystem<T>, gamma: C<T>) -> Result<Self> {
        f.require_same_collection(&g)?;
        Ok(SegmentFamily { f, g, gamma })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn at(&self, t: T) -> SparseSystem<T> {
        let s = C::new(t, T::zero());
        let r = self.gamma * (T::one() - t);
        self.f.combine(s, &self.g, r).expect("same collection")
    }

    /// `H(x, t)`, `∂H/∂x` and `∂H/∂t` in one pass over the monomials.
    pub(crate) fn eval_all(&self, x: &[C<T>], t: T) -> HomotopyValues<T> {
        let n = self.dim();
        let s = C::new(t, T::zero());
        let r = self.gamma * (T::one() - t);
        let mut grad = vec![zero_c(); n];
        let mut h = Vec::with_capacity(self.f.len());
        let mut ht = Vec::with_capacity(self.f.len());
        let mut jac = Vec::with_capacity(self.f.len());
        let coeffs = self.f.coefficients.iter().zip(&self.g.coefficients);
        for (a, (fc, gc)) in self.f.collection.iter().zip(coeffs) {
            let mut v = zero_c();
            let mut vt = zero_c();
            let mut row = vec![zero_c(); n];
            for (k, p) in a.iter().enumerate() {
                let (cf, cg) = (fc[k], gc[k]);
                if cf.is_zero() && cg.is_zero() {
                    continue;
                }
                let c = s * cf + r * cg;
                let m = monomial_with_gradient(x, p.coords(), &mut grad);
                v = v + c * m;
                vt = vt + (cf - self.gamma * cg) * m;
                for (e, g) in row.iter_mut().zip(&grad) {
                    *e = *e + c * g;
                }
            }
            h.push(v);
            ht.push(vt);
            jac.push(row);
        }
        (h, jac, ht)
    }

    /// `H(x, t)` and `∂H/∂x`.
    pub(crate) fn eval_jac(&self, x: &[C<T>], t: T) -> (Vec<C<T>>, Vec<Vec<C<T>>>) {
        let (h, j, _) = self.eval_all(x, t);
        (h, j)
    }
}

/// `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl ComplexJson {
    pub fn from_c<T: Real>(z: C<T>) -> Self {
        ComplexJson {
            re: z.re.to_f64().unwrap_or(f64::NAN),
            im: z.im.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn to_c<T: Real>(self) -> C<T> {
        C::new(T::c(self.re), T::c(self.im))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub collection: SupportsJson,
    pub coefficients: Vec<Vec<ComplexJson>>,
}

/// Solution file; `mv` and `residuals` are optional on input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionsJson {
    pub points: Vec<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mv: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
}

impl SolutionsJson {
    pub fn from_points<T: Real>(points: &[TorusPoint<T>]) -> Self {
        SolutionsJson {
            points: points
                .iter()
                .map(|p| p.coords().iter().map(|z| ComplexJson::from_c(*z)).collect())
                .collect(),
            mv: None,
            residuals: Vec::new(),
        }
    }

    /// Points as torus points; zero coordinates are rejected.
    pub fn torus_points<T: Real>(&self) -> Result<Vec<TorusPoint<T>>> {
        self.points
            .iter()
            .map(|p| TorusPoint::new(p.iter().map(|z| z.to_c()).collect(), T::zero()))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}
