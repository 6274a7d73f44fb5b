//! Complete torus solution sets of small square systems, via a total-degree
//! homotopy that is independent of the sparse machinery it is used to check.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixedvol::mixed_volume;
use crate::polysys::{SegmentFamily, SolutionsJson, SparseSystem, TorusPoint};
use crate::rng;
use crate::scalar::{Real, C};
use crate::supports::{LatticePoint, MonomialMap, Support, SupportCollection};
use crate::tracker::{toric_condition, track_segment, PathOutcome, PathStatus, TrackerConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub tracker: TrackerConfig<T>,
    /// Polished points closer than this (relative) are merged.
    pub dedup_radius: T,
    /// End points with a coordinate below this (relative) are off the torus.
    pub torus_filter: T,
    /// Homotopies with fresh `γ` run until `mv` points are found.
    pub attempts: usize,
    pub max_paths: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            tracker: TrackerConfig::default(),
            dedup_radius: T::c(1e-8),
            torus_filter: T::c(1e-8),
            attempts: 3,
            max_paths: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionFlag {
    /// Fewer points than the mixed volume.
    PossiblyIncomplete,
    /// Two polished end points of one homotopy coincided.
    Multiplicity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSet<T> {
    pub points: Vec<TorusPoint<T>>,
    pub residuals: Vec<T>,
    pub conditions: Vec<T>,
    pub certified_count: usize,
    pub mv: u64,
    pub flags: Vec<SolutionFlag>,
    /// Path statuses summed over all attempts.
    pub path_counts: Vec<(PathStatus, usize)>,
    pub attempts_used: usize,
    /// Unimodular exponent map `R`: the homotopy runs on the system supported
    /// on `R(𝒜)`, whose solutions `y` give `x = φ_R(y)`.
    pub reduction: MonomialMap,
    /// Per-equation monomial shifts of the reduced system.
    pub shifts: Vec<LatticePoint>,
}

impl<T: Real> SolutionSet<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_flag(&self, flag: SolutionFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn to_json_value(&self) -> SolutionsJson {
        let mut j = SolutionsJson::from_points(&self.points);
        j.mv = Some(self.mv);
        j.residuals = self
            .residuals
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .collect();
        j
    }
}

/// Newton polish of a point of `f`; success only for regular, converged points.
pub fn polish<T: Real>(
    f: &SparseSystem<T>,
    x: &TorusPoint<T>,
    cfg: &TrackerConfig<T>,
) -> PathOutcome<T> {
    let family = SegmentFamily::new(f.clone(), f.clone()).expect("same collection");
    track_segment(&family, x, T::one(), T::one(), cfg)
}

/// Toric Jacobian condition estimate of `f` at `x`.
pub fn condition_at<T: Real>(f: &SparseSystem<T>, x: &TorusPoint<T>) -> T {
    let (_, jac) = f.eval_with_jacobian(x.coords());
    toric_condition(&jac, x.coords())
}

/// `f_i · x^{-m_i}` with `m_i` the coordinate-wise minimum over the nonzero
/// terms, keeping only nonzero terms. `None` if some equation is identically zero.
fn nonnegative_form<T: Real>(f: &SparseSystem<T>) -> Option<(SparseSystem<T>, Vec<LatticePoint>)> {
    let n = f.dim();
    let mut polys = Vec::with_capacity(f.len());
    let mut shifts = Vec::with_capacity(f.len());
    for (a, cs) in f.collection().iter().zip(f.coefficients()) {
        let terms: Vec<(&LatticePoint, C<T>)> = a
            .iter()
            .zip(cs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, c)| (p, *c))
            .collect();
        let support = Support::new(n, terms.iter().map(|(p, _)| (*p).clone()).collect()).ok()?;
        let m = support.coordinate_min()?;
        polys.push(
            terms
                .iter()
                .map(|(p, c)| (p.sub(&m).coords().to_vec(), *c))
                .collect::<Vec<_>>(),
        );
        shifts.push(m);
    }
    Some((SparseSystem::from_terms(n, &polys).ok()?, shifts))
}

/// Total-degree path count of the supports after the nonnegative shift.
fn bezout_number(c: &SupportCollection) -> f64 {
    c.iter()
        .map(|a| match a.coordinate_min() {
            Some(m) => a
                .iter()
                .map(|p| p.sub(&m).total_degree())
                .max()
                .unwrap_or(0) as f64,
            None => 0.0,
        })
        .product()
}

/// Unimodular `R` from greedy elementary shears that lowers the Bezout number
/// of `R(𝒜)`, so a sheared support does not pay for its shear in paths.
fn degree_reduction(c: &SupportCollection) -> MonomialMap {
    let n = c.dim();
    let mut best = MonomialMap::identity(n);
    let mut cost = bezout_number(c);
    for _ in 0..64 {
        let mut improved = None;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                for k in [-1, 1] {
                    let mut m: Vec<Vec<i64>> = (0..n)
                        .map(|r| (0..n).map(|s| i64::from(r == s)).collect())
                        .collect();
                    m[i][j] = k;
                    let r = MonomialMap::new(m).expect("square").compose(&best);
                    let trial = bezout_number(&r.apply_collection(c));
                    if trial < improved.as_ref().map_or(cost, |(t, _)| *t) {
                        improved = Some((trial, r));
                    }
                }
            }
        }
        match improved {
            Some((t, r)) => {
                cost = t;
                best = r;
            }
            None => break,
        }
    }
    best
}

struct StartSystem<T> {
    target: SparseSystem<T>,
    start: SparseSystem<T>,
    degrees: Vec<usize>,
}

/// Homogenizes `F̃` with an extra last coordinate `x_0` and adds the affine
/// patch `a · x = 1`. Paths stay bounded in these coordinates, so solutions
/// of large modulus are not lost among the paths running off to infinity.
/// The start system is `x_i^{d_i} - x_0^{d_i}` on the same patch.
fn start_system<T: Real>(
    shifted: &SparseSystem<T>,
    patch: &[C<T>],
) -> Result<Option<StartSystem<T>>> {
    let n = shifted.dim();
    let one = C::new(T::one(), T::zero());
    let zero = C::new(T::zero(), T::zero());
    let mut degrees = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n + 1);
    let mut start = Vec::with_capacity(n + 1);
    for (i, (a, cs)) in shifted
        .collection()
        .iter()
        .zip(shifted.coefficients())
        .enumerate()
    {
        let d = a.iter().map(LatticePoint::total_degree).max().unwrap_or(0);
        if d == 0 {
            return Ok(None);
        }
        let lift = |e: &[i64]| {
            let mut h = e.to_vec();
            h.push(d - e.iter().sum::<i64>());
            h
        };
        let mut top = vec![0; n + 1];
        top[i] = d;
        let mut bottom = vec![0; n + 1];
        bottom[n] = d;
        let mut terms: Vec<(Vec<i64>, C<T>)> = a
            .iter()
            .zip(cs)
            .map(|(p, c)| (lift(p.coords()), *c))
            .collect();
        let mut pure = vec![(top.clone(), one), (bottom.clone(), -one)];
        for e in [top, bottom] {
            if !terms.iter().any(|(h, _)| *h == e) {
                terms.push((e, zero));
            }
        }
        for (h, _) in &terms {
            if !pure.iter().any(|(e, _)| e == h) {
                pure.push((h.clone(), zero));
            }
        }
        target.push(terms);
        start.push(pure);
        degrees.push(d as usize);
    }
    let mut linear: Vec<(Vec<i64>, C<T>)> = patch
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let mut e = vec![0; n + 1];
            e[j] = 1;
            (e, *a)
        })
        .collect();
    linear.push((vec![0; n + 1], -one));
    target.push(linear.clone());
    start.push(linear);
    let target = SparseSystem::from_terms(n + 1, &target)?;
    let start = SparseSystem::from_terms(n + 1, &start)?.embed(target.collection())?;
    Ok(Some(StartSystem {
        target,
        start,
        degrees,
    }))
}

/// Roots of the start system, each scaled onto the patch.
fn start_points<T: Real>(degrees: &[usize], patch: &[C<T>]) -> Vec<TorusPoint<T>> {
    let mut out: Vec<Vec<C<T>>> = vec![Vec::new()];
    for &d in degrees {
        let roots: Vec<C<T>> = (0..d)
            .map(|k| C::from_polar(T::one(), T::c(TAU * k as f64 / d as f64)))
            .collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                roots.iter().map(move |r| {
                    let mut v = prefix.clone();
                    v.push(*r);
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|mut v| {
            v.push(C::new(T::one(), T::zero()));
            let dot = v
                .iter()
                .zip(patch)
                .fold(C::new(T::zero(), T::zero()), |s, (x, a)| s + x * a);
            TorusPoint::new_unchecked(v.into_iter().map(|x| x / dot).collect())
        })
        .collect()
}

/// Affine point of a patch endpoint, `None` at (or numerically near) infinity.
fn dehomogenize<T: Real>(z: &TorusPoint<T>, floor: T) -> Option<TorusPoint<T>> {
    let (last, head) = z.coords().split_last()?;
    if !(last.norm() > floor * z.norm()) {
        return None;
    }
    Some(TorusPoint::new_unchecked(
        head.iter().map(|x| x / last).collect(),
    ))
}

fn lex_cmp<T: Real>(a: &TorusPoint<T>, b: &TorusPoint<T>) -> Ordering {
    for (x, y) in a.coords().iter().zip(b.coords()) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            match u.partial_cmp(&v) {
                Some(Ordering::Equal) | None => {}
                Some(o) => return o,
            }
        }
    }
    Ordering::Equal
}

fn add_counts(total: &mut Vec<(PathStatus, usize)>, outcomes: &[PathOutcome<impl Real>]) {
    for o in outcomes {
        match total.iter_mut().find(|(s, _)| *s == o.status) {
            Some(e) => e.1 += 1,
            None => total.push((o.status, 1)),
        }
    }
}

/// All isolated torus solutions of the square system `f`.
pub fn solve_torus<T: Real>(
    f: &SparseSystem<T>,
    seed: u64,
    cfg: &SolverConfig<T>,
) -> Result<SolutionSet<T>> {
    f.collection().require_square()?;
    cfg.tracker.validate()?;
    let mv = mixed_volume(f.collection())?
        .to_u64()
        .ok_or(Error::Capacity {
            what: "mixed volume",
            limit: 64,
            got: 65,
        })?;
    let mut set = SolutionSet {
        points: Vec::new(),
        residuals: Vec::new(),
        conditions: Vec::new(),
        certified_count: 0,
        mv,
        flags: Vec::new(),
        path_counts: Vec::new(),
        attempts_used: 0,
        reduction: degree_reduction(f.collection()),
        shifts: Vec::new(),
    };
    let reduced = f.pullback(&set.reduction.inverse()?)?;
    let prepared = nonnegative_form(&reduced).and_then(|(shifted, shifts)| {
        let degrees: Vec<i64> = shifted
            .collection()
            .iter()
            .map(|a| a.iter().map(LatticePoint::total_degree).max().unwrap_or(0))
            .collect();
        set.shifts = shifts;
        degrees.iter().all(|&d| d > 0).then_some((shifted, degrees))
    });
    if let Some((shifted, degrees)) = prepared {
        let n = f.dim();
        let paths: usize = degrees.iter().map(|&d| d as usize).product();
        if paths > cfg.max_paths {
            return Err(Error::Capacity {
                what: "homotopy paths",
                limit: cfg.max_paths,
                got: paths,
            });
        }
        for attempt in 0..cfg.attempts.max(1) {
            set.attempts_used = attempt + 1;
            let mut gamma_rng =
                rng::stream(rng::derive_seed(seed, attempt as u64), rng::STREAM_GAMMA);
            let gamma = rng::unit_circle(&mut gamma_rng);
            let patch: Vec<C<T>> = (0..=n).map(|_| rng::unit_circle(&mut gamma_rng)).collect();
            let sys = start_system(&shifted, &patch)?.expect("degrees checked");
            let starts = start_points::<T>(&sys.degrees, &patch);
            let family = SegmentFamily::with_gamma(sys.target, sys.start, gamma)?;
            let outcomes: Vec<PathOutcome<T>> = starts
                .par_iter()
                .map(|s| track_segment(&family, s, T::zero(), T::one(), &cfg.tracker))
                .collect();
            add_counts(&mut set.path_counts, &outcomes);
            let polished: Vec<PathOutcome<T>> = outcomes
                .par_iter()
                .filter_map(|o| {
                    o.end
                        .as_ref()
                        .and_then(|z| dehomogenize(z, cfg.torus_filter))
                })
                .map(|y| y.monomial_image(&set.reduction))
                .filter(|x| x.min_modulus() > cfg.torus_filter * x.norm().max(T::one()))
                .map(|x| polish(f, &x, &cfg.tracker))
                .collect();
            let mut fresh: Vec<PathOutcome<T>> = Vec::new();
            for o in polished.into_iter().filter(PathOutcome::is_success) {
                let p = o.end.as_ref().expect("success has end");
                let near =
                    |q: &TorusPoint<T>| q.distance(p) <= cfg.dedup_radius * p.norm().max(T::one());
                if fresh.iter().any(|e| near(e.end.as_ref().unwrap())) {
                    if !set.has_flag(SolutionFlag::Multiplicity) {
                        set.flags.push(SolutionFlag::Multiplicity);
                    }
                    continue;
                }
                fresh.push(o);
            }
            for o in fresh {
                let p = o.end.clone().unwrap();
                if set
                    .points
                    .iter()
                    .any(|q| q.distance(&p) <= cfg.dedup_radius * p.norm().max(T::one()))
                {
                    continue;
                }
                set.points.push(p);
                set.residuals.push(o.residual);
                set.conditions.push(o.condition);
            }
            if set.points.len() as u64 >= mv {
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..set.points.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(&set.points[i], &set.points[j]));
    set.points = order.iter().map(|&i| set.points[i].clone()).collect();
    set.residuals = order.iter().map(|&i| set.residuals[i]).collect();
    set.conditions = order.iter().map(|&i| set.conditions[i]).collect();
    set.certified_count = set.points.len();
    if (set.points.len() as u64) < mv {
        set.flags.push(SolutionFlag::PossiblyIncomplete);
    }
    Ok(set)
}

/// `|V(F)| = MV` with every solution regular.
pub fn is_bernstein_generic<T: Real>(f: &SparseSystem<T>, solved: &SolutionSet<T>) -> bool {
    if solved.has_flag(SolutionFlag::Multiplicity) || solved.points.len() as u64 != solved.mv {
        return false;
    }
    let tol = T::default_newton_tol();
    solved
        .points
        .iter()
        .all(|p| condition_at(f, p) * tol < T::one())
}
