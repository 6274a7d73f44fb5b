//! Traces of solution subsets and the completeness tests built on them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Precondition, Recommendation, Result};
use crate::linalg::solve;
use crate::mixedvol::{mixed_volume, relative_mixed_volume};
use crate::polysys::{ComplexJson, SegmentFamily, SparseSystem, SystemJson, TorusPoint};
use crate::rng;
use crate::scalar::{kahan_sum, Real, C};
use crate::solver::{
    condition_at, is_bernstein_generic, polish, solve_torus, SolutionSet, SolverConfig,
};
use crate::supports::{
    collection_lattice, first_coordinate_fixing_basis, has_positive_mixed_volume_by_defect,
    is_abundant, is_lacunary, is_triangular, lacunary_reduction, lexmin_translations,
    tal_candidate, unnecessary_candidate, LatticePoint, SupportCollection, SupportsJson,
};
use crate::tracker::{first_coincidence, monodromy_loop, track_set, PathStatus, SetOutcome};

/// Coordinate-wise sum `Σ_coord(S)`, compensated.
pub fn trace<T: Real>(s: &[TorusPoint<T>], coord: usize) -> Result<C<T>> {
    let first = s
        .first()
        .ok_or(Error::Precondition(Precondition::EmptySolutionSet))?;
    if coord >= first.dim() {
        return Err(Error::BadCoordinate {
            coord,
            n: first.dim(),
        });
    }
    Ok(kahan_sum(s.iter().map(|p| p.coords()[coord])))
}

/// `μ(S) = Σ(S) / |S|`.
pub fn centroid<T: Real>(s: &[TorusPoint<T>]) -> Result<Vec<C<T>>> {
    let first = s
        .first()
        .ok_or(Error::Precondition(Precondition::EmptySolutionSet))?;
    let k = T::c(s.len() as f64);
    (0..first.dim())
        .map(|j| trace(s, j).map(|z| z / k))
        .collect()
}

/// Midpoint test: `|p_h - (p0 + p1)/2| / max(1, |p0|, |p1|) <= rel_tol`.
pub fn collinear(p0: C<f64>, ph: C<f64>, p1: C<f64>, rel_tol: f64) -> (bool, f64) {
    let scale = 1f64.max(p0.norm()).max(p1.norm());
    let residual = (ph - (p0 + p1) / 2.0).norm() / scale;
    (residual <= rel_tol, residual)
}

fn to_c64<T: Real>(z: C<T>) -> C<f64> {
    C::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Collinearity of the traces at `t = 0, 1/2, 1`.
    SparseTrace,
    /// Equality of the traces at `t = 0, 1`.
    ConstantSparseTrace,
}

/// How Bernstein-genericity of the input system is established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenericityPolicy {
    /// Full solve when `|S| = MV`, spot check otherwise.
    Auto,
    FullSolve,
    SpotCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenericityCheck {
    FullSolve,
    SpotCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub rel_tol: f64,
    /// Accept `B` as trace-affine-linear (or unnecessary) without checking it
    /// against the offset candidate.
    pub assume_candidate: bool,
    /// Reject non-abundant `B`. Turning this off accepts `B` such as a single
    /// column, for which only the direction "complete set passes" is claimed.
    pub require_abundant: bool,
    pub genericity: GenericityPolicy,
    /// Relative Newton step that input points must meet before polishing.
    pub input_tol: f64,
    /// Fresh draws of `G` allowed after a path failure; zero means abort.
    pub resample_attempts: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            rel_tol: 1e-6,
            assume_candidate: false,
            require_abundant: true,
            genericity: GenericityPolicy::Auto,
            input_tol: 1e-8,
            resample_attempts: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig<T> {
    pub solver: SolverConfig<T>,
    pub options: TraceOptions,
}

impl<T: Real> Default for TraceConfig<T> {
    fn default() -> Self {
        TraceConfig {
            solver: SolverConfig::default(),
            options: TraceOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub sigma: ComplexJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentStatus {
    pub from_t: f64,
    pub to_t: f64,
    pub counts: Vec<(PathStatus, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub seed: u64,
    pub genericity_check: GenericityCheck,
    pub mixed_volume: Option<u64>,
    pub subset_size: usize,
    pub varied: SupportsJson,
    pub segments: Vec<SegmentStatus>,
    /// Draws of `G` discarded after path failures.
    pub resamples: usize,
    pub generated_g: SystemJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub algorithm: Algorithm,
    pub samples: Vec<TraceSample>,
    pub collinearity_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

impl TraceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Candidate {
    TraceAffineLinear,
    Unnecessary,
}

struct Validated<T> {
    points: Vec<TorusPoint<T>>,
    check: GenericityCheck,
    mv: Option<u64>,
}

fn not_generic(msg: String) -> Error {
    Error::Precondition(Precondition::NotGeneric(msg))
}

fn relative_newton_step<T: Real>(f: &SparseSystem<T>, x: &TorusPoint<T>) -> f64 {
    let (h, jac) = f.eval_with_jacobian(x.coords());
    match solve(jac, &h) {
        Some(d) => {
            let step = d.iter().fold(0f64, |m, z| m.max(to_c64(*z).norm()));
            step / x.norm().to_f64().unwrap_or(f64::INFINITY).max(1.0)
        }
        None => f64::INFINITY,
    }
}

fn mixed_volume_u64(c: &SupportCollection) -> Option<u64> {
    mixed_volume(c).ok().and_then(|v| v.to_u64())
}

/// Checks the inputs shared by both tests, in a fixed order, and returns
/// the polished points.
fn validate<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    s: &[TorusPoint<T>],
    b: &SupportCollection,
    kind: Candidate,
    seed: u64,
    cfg: &TraceConfig<T>,
) -> Result<Validated<T>> {
    c.require_square()?;
    if f.collection() != c {
        return Err(Error::CollectionMismatch);
    }
    if !has_positive_mixed_volume_by_defect(c)? {
        return Err(Error::Precondition(Precondition::ZeroMixedVolume));
    }
    let lattice = collection_lattice::<BigInt>(c);
    if lattice.is_proper() {
        return Err(Error::Precondition(Precondition::Lacunary(
            lattice.index_string(),
        )));
    }
    if b.len() != c.len() || b.dim() != c.dim() || !b.is_subset_of(c) {
        return Err(Error::NotSubset);
    }
    if cfg.options.require_abundant && !is_abundant(b) {
        return Err(Error::Precondition(Precondition::NotAbundant));
    }
    if !cfg.options.assume_candidate {
        let candidate = match kind {
            Candidate::TraceAffineLinear => tal_candidate(c)?,
            Candidate::Unnecessary => unnecessary_candidate(c)?,
        };
        if !b.is_subset_of(&candidate) {
            return Err(Error::Precondition(Precondition::OutsideCandidate));
        }
    }
    if s.is_empty() {
        return Err(Error::Precondition(Precondition::EmptySolutionSet));
    }
    let mut points = Vec::with_capacity(s.len());
    for (index, x) in s.iter().enumerate() {
        if x.dim() != c.dim() {
            return Err(Error::DimensionMismatch {
                expected: c.dim(),
                found: x.dim(),
            });
        }
        if x.min_modulus() <= T::zero() {
            return Err(Error::ZeroCoordinate);
        }
        let residual = relative_newton_step(f, x);
        if !(residual <= cfg.options.input_tol) {
            return Err(Error::Precondition(Precondition::NotASolution {
                index,
                residual,
            }));
        }
        let polished = polish(f, x, &cfg.solver.tracker);
        match polished.end {
            Some(p) => points.push(p),
            None => {
                return Err(Error::Precondition(Precondition::NotASolution {
                    index,
                    residual: polished.residual.to_f64().unwrap_or(f64::INFINITY),
                }))
            }
        }
    }
    if let Some((i, j)) = first_coincidence(&points) {
        return Err(Error::Precondition(Precondition::DuplicatePoints(i, j)));
    }
    let mv = mixed_volume_u64(c);
    let full = match cfg.options.genericity {
        GenericityPolicy::FullSolve => true,
        GenericityPolicy::SpotCheck => false,
        GenericityPolicy::Auto => mv == Some(points.len() as u64),
    };
    let check = if full {
        let solved = solve_torus(f, seed, &cfg.solver)?;
        if !is_bernstein_generic(f, &solved) {
            return Err(not_generic(format!(
                "full solve found {} of {} points",
                solved.len(),
                solved.mv
            )));
        }
        GenericityCheck::FullSolve
    } else {
        let tol = cfg.solver.tracker.newton_tol;
        if let Some(i) = points
            .iter()
            .position(|p| !(condition_at(f, p) * tol < T::one()))
        {
            return Err(not_generic(format!(
                "Jacobian at point {i} is numerically singular"
            )));
        }
        GenericityCheck::SpotCheck
    };
    Ok(Validated { points, check, mv })
}

fn segment_status<T: Real>(set: &SetOutcome<T>, from_t: f64, to_t: f64) -> SegmentStatus {
    SegmentStatus {
        from_t,
        to_t,
        counts: set.status_counts(),
    }
}

fn path_failure(set: &SetOutcome<impl Real>, from_t: f64, to_t: f64) -> Error {
    Error::Numerical {
        detail: format!(
            "tracking from t = {from_t} to t = {to_t} failed: statuses {:?}, crossings {:?}",
            set.status_counts(),
            set.crossings
        ),
        recommendation: Recommendation::ResampleG,
    }
}

/// Tracks `start` through the listed `t` values; `Ok(None)` on a path failure.
fn track_chain<T: Real>(
    family: &SegmentFamily<T>,
    start: &[TorusPoint<T>],
    ts: &[f64],
    cfg: &TraceConfig<T>,
    segments: &mut Vec<SegmentStatus>,
) -> Result<std::result::Result<Vec<Vec<TorusPoint<T>>>, Error>> {
    let mut out = vec![start.to_vec()];
    for w in ts.windows(2) {
        let set = track_set(
            family,
            out.last().unwrap(),
            T::c(w[0]),
            T::c(w[1]),
            &cfg.solver.tracker,
        )?;
        segments.push(segment_status(&set, w[0], w[1]));
        match set.endpoints() {
            Some(e) => out.push(e),
            None => return Ok(Err(path_failure(&set, w[0], w[1]))),
        }
    }
    Ok(Ok(out))
}

#[allow(clippy::too_many_arguments)]
fn run_test<T: Real>(
    algorithm: Algorithm,
    c: &SupportCollection,
    f: &SparseSystem<T>,
    s: &[TorusPoint<T>],
    b: &SupportCollection,
    seed: u64,
    cfg: &TraceConfig<T>,
) -> Result<TraceReport> {
    let kind = match algorithm {
        Algorithm::SparseTrace => Candidate::TraceAffineLinear,
        Algorithm::ConstantSparseTrace => Candidate::Unnecessary,
    };
    let valid = validate(c, f, s, b, kind, seed, cfg)?;
    let ts: &[f64] = match algorithm {
        Algorithm::SparseTrace => &[1.0, 0.5, 0.0],
        Algorithm::ConstantSparseTrace => &[1.0, 0.0],
    };
    let mut rng = rng::stream(seed, rng::STREAM_TRACE_G);
    let mut segments = Vec::new();
    let mut resamples = 0;
    let (g, chain) = loop {
        let g = f.resample_on(b, &mut rng)?;
        let family = SegmentFamily::new(f.clone(), g.clone())?;
        match track_chain(&family, &valid.points, ts, cfg, &mut segments)? {
            Ok(chain) => break (g, chain),
            Err(e) if resamples >= cfg.options.resample_attempts => return Err(e),
            Err(_) => resamples += 1,
        }
    };
    let sigmas: Vec<C<f64>> = chain
        .iter()
        .map(|pts| trace(pts, 0).map(to_c64))
        .collect::<Result<_>>()?;
    let tol = cfg.options.rel_tol;
    let (ok, residual) = match algorithm {
        Algorithm::SparseTrace => collinear(sigmas[2], sigmas[1], sigmas[0], tol),
        Algorithm::ConstantSparseTrace => {
            let scale = 1f64.max(sigmas[0].norm()).max(sigmas[1].norm());
            let r = (sigmas[0] - sigmas[1]).norm() / scale;
            (r <= tol, r)
        }
    };
    let mut samples: Vec<TraceSample> = ts
        .iter()
        .zip(&sigmas)
        .map(|(&t, z)| TraceSample {
            t,
            sigma: ComplexJson::from_c(*z),
        })
        .collect();
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(TraceReport {
        algorithm,
        samples,
        collinearity_residual: residual,
        tolerance: tol,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        diagnostics: Diagnostics {
            seed,
            genericity_check: valid.check,
            mixed_volume: valid.mv,
            subset_size: s.len(),
            varied: b.to_json_value(),
            segments,
            resamples,
            generated_g: g.cast::<f64>().to_json_value(),
        },
    })
}

/// Decides whether `S ⊆ V(F)` is complete by checking that `Σ_1` moves
/// affine-linearly along `t F + (1 - t) G`, where `G` redraws the
/// coefficients on the trace-affine-linear set `B`.
pub fn sparse_trace_test<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    s: &[TorusPoint<T>],
    b: &SupportCollection,
    seed: u64,
    cfg: &TraceConfig<T>,
) -> Result<TraceReport> {
    run_test(Algorithm::SparseTrace, c, f, s, b, seed, cfg)
}

/// Variant for `B` inside the unnecessary support: a complete `S` keeps its
/// trace when `S` is carried over to `G`.
pub fn constant_sparse_trace_test<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    s: &[TorusPoint<T>],
    b: &SupportCollection,
    seed: u64,
    cfg: &TraceConfig<T>,
) -> Result<TraceReport> {
    run_test(Algorithm::ConstantSparseTrace, c, f, s, b, seed, cfg)
}

/// Indices of a random strict nonempty subset of `0..n` (sorted).
pub fn random_strict_subset(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "no strict nonempty subset of {n} points"
        )));
    }
    let mut rng = rng::stream(seed, rng::STREAM_SUBSET);
    let size = rng.random_range(1..n);
    let mut idx = sample(&mut rng, n, size).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Linearity {
    Constant,
    AffineLinear,
    Nonlinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearityReport {
    pub class: Linearity,
    pub t_values: Vec<f64>,
    pub sigmas: Vec<ComplexJson>,
    pub scale: f64,
    pub max_first_difference: f64,
    pub max_second_difference: f64,
    /// Perturbation directions discarded because a sample was not generic.
    pub resamples: usize,
}

pub const PROBE_RESAMPLES: usize = 5;

/// Classifies `t ↦ Σ_1(V(F + t ΔG))` for random `ΔG` supported on `perturb`,
/// from full solves at `num_t` equally spaced `t ∈ [0, 1]`.
pub fn linearity_probe<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    perturb: &SupportCollection,
    num_t: usize,
    seed: u64,
    cfg: &SolverConfig<T>,
) -> Result<LinearityReport> {
    if num_t < 5 {
        return Err(Error::InvalidArgument(
            "linearity probe needs at least 5 samples".into(),
        ));
    }
    if f.collection() != c {
        return Err(Error::CollectionMismatch);
    }
    if perturb.len() != c.len() || !perturb.is_subset_of(c) {
        return Err(Error::NotSubset);
    }
    let base = solve_torus(f, seed, cfg)?;
    if !is_bernstein_generic(f, &base) {
        return Err(not_generic(format!(
            "found {} of {} points",
            base.len(),
            base.mv
        )));
    }
    let ts: Vec<f64> = (0..num_t).map(|k| k as f64 / (num_t - 1) as f64).collect();
    let mut rng = rng::stream(seed, rng::STREAM_PROBE);
    let one = C::new(T::one(), T::zero());
    'direction: for resamples in 0..=PROBE_RESAMPLES {
        let delta = SparseSystem::zeros(c).resample_on(perturb, &mut rng)?;
        let mut sigmas = Vec::with_capacity(num_t);
        for (k, &t) in ts.iter().enumerate() {
            let ft = f.combine(one, &delta, C::new(T::c(t), T::zero()))?;
            let solved = solve_torus(&ft, rng::derive_seed(seed, k as u64), cfg)?;
            if !is_bernstein_generic(&ft, &solved) {
                continue 'direction;
            }
            sigmas.push(to_c64(trace(&solved.points, 0)?));
        }
        let scale = sigmas.iter().fold(1f64, |m, z| m.max(z.norm()));
        let first = sigmas
            .windows(2)
            .fold(0f64, |m, w| m.max((w[1] - w[0]).norm()));
        let second = sigmas
            .windows(3)
            .fold(0f64, |m, w| m.max((w[2] - w[1] * 2.0 + w[0]).norm()));
        let class = if first <= 1e-6 * scale {
            Linearity::Constant
        } else if second <= 1e-5 * scale {
            Linearity::AffineLinear
        } else {
            Linearity::Nonlinear
        };
        return Ok(LinearityReport {
            class,
            t_values: ts,
            sigmas: sigmas.into_iter().map(ComplexJson::from_c).collect(),
            scale,
            max_first_difference: first,
            max_second_difference: second,
            resamples,
        });
    }
    Err(Error::Numerical {
        detail: format!(
            "no generic perturbation direction in {} draws",
            PROBE_RESAMPLES + 1
        ),
        recommendation: Recommendation::ResampleG,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetCheck {
    pub size: usize,
    pub sigma: ComplexJson,
    pub expected: ComplexJson,
    pub relative_error: f64,
    pub holds: bool,
}

/// Outcome of checking one of the trace laws for structured supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub solutions: usize,
    pub sigma: ComplexJson,
    /// Trace of the reduced or sub-system, when one is solved.
    pub reduced_solutions: Option<usize>,
    pub reduced_sigma: Option<ComplexJson>,
    pub factor: f64,
    /// Relative error of the law (or `|Σ_1| / scale` for the vanishing law).
    pub relative_error: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub subset_check: Option<SubsetCheck>,
}

pub const LAW_TOL: f64 = 1e-6;

fn solve_generic<T: Real>(
    f: &SparseSystem<T>,
    seed: u64,
    cfg: &SolverConfig<T>,
) -> Result<SolutionSet<T>> {
    let solved = solve_torus(f, seed, cfg)?;
    if !is_bernstein_generic(f, &solved) {
        return Err(not_generic(format!(
            "found {} of {} points",
            solved.len(),
            solved.mv
        )));
    }
    Ok(solved)
}

fn relative_error(actual: C<f64>, expected: C<f64>) -> f64 {
    (actual - expected).norm() / 1f64.max(actual.norm())
}

/// For lacunary `C`: `Σ_1(V(F)) = 0` when `e_1 ∉ L[C]`, and otherwise
/// `Σ_1(V(F)) = [ℤⁿ : L[C]] · Σ_1(V(G))` for the reduced system `G`. In the
/// second case one point per fibre of the reduction carries `1/index` of the trace.
pub fn lacunary_trace_check<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    seed: u64,
    cfg: &SolverConfig<T>,
) -> Result<LawReport> {
    if f.collection() != c {
        return Err(Error::CollectionMismatch);
    }
    if !is_lacunary(c) {
        return Err(Error::NotLacunary);
    }
    let solved = solve_generic(f, seed, cfg)?;
    let sigma = to_c64(trace(&solved.points, 0)?);
    let lattice = collection_lattice::<BigInt>(c);
    if !lattice.contains(LatticePoint::unit(c.dim(), 0).coords()) {
        let scale = solved
            .points
            .iter()
            .fold(0f64, |s, p| s + to_c64(p.coords()[0]).norm())
            .max(1.0);
        let err = sigma.norm() / scale;
        return Ok(LawReport {
            law: "vanishing first trace".into(),
            solutions: solved.len(),
            sigma: ComplexJson::from_c(sigma),
            reduced_solutions: None,
            reduced_sigma: None,
            factor: 0.0,
            relative_error: err,
            tolerance: LAW_TOL,
            holds: err < LAW_TOL,
            subset_check: None,
        });
    }
    let reduction = lacunary_reduction(c)?;
    debug_assert_eq!(reduction.first_column_scale(), 1);
    let index = reduction.map.determinant().unsigned_abs() as usize;
    let g = f
        .translate(&reduction.translations)?
        .pullback(&reduction.map)?;
    let reduced = solve_generic(&g, seed, cfg)?;
    let reduced_sigma = to_c64(trace(&reduced.points, 0)?);
    let expected = reduced_sigma * index as f64;
    let err = relative_error(sigma, expected);

    // Group V(F) by image under the monomial map; keep the first of each fibre.
    let images: Vec<TorusPoint<T>> = solved
        .points
        .iter()
        .map(|p| p.monomial_image(&reduction.map))
        .collect();
    let mut reps: Vec<usize> = Vec::new();
    for (i, y) in images.iter().enumerate() {
        let fresh = reps
            .iter()
            .all(|&r| images[r].distance(y) > T::c(1e-8) * y.norm().max(T::one()));
        if fresh {
            reps.push(i);
        }
    }
    let subset: Vec<TorusPoint<T>> = reps.iter().map(|&i| solved.points[i].clone()).collect();
    let subset_sigma = to_c64(trace(&subset, 0)?);
    let subset_expected = sigma / index as f64;
    let subset_err = relative_error(subset_sigma, subset_expected);
    Ok(LawReport {
        law: "index factor".into(),
        solutions: solved.len(),
        sigma: ComplexJson::from_c(sigma),
        reduced_solutions: Some(reduced.len()),
        reduced_sigma: Some(ComplexJson::from_c(reduced_sigma)),
        factor: index as f64,
        relative_error: err,
        tolerance: LAW_TOL,
        holds: err <= LAW_TOL,
        subset_check: Some(SubsetCheck {
            size: subset.len(),
            sigma: ComplexJson::from_c(subset_sigma),
            expected: ComplexJson::from_c(subset_expected),
            relative_error: subset_err,
            holds: subset_err <= LAW_TOL && subset.len() * index == solved.len(),
        }),
    })
}

/// The square subsystem `F_I` written in `|I|` variables through a
/// unimodular change of coordinates fixing `e_1`.
pub fn triangular_subsystem<T: Real>(
    f: &SparseSystem<T>,
    witness: &[usize],
) -> Result<SparseSystem<T>> {
    let c = f.collection();
    let psi = first_coordinate_fixing_basis(c, witness)?;
    let g = f.translate(&lexmin_translations(c))?.pullback(&psi)?;
    let r = witness.len();
    let mut polys = Vec::with_capacity(r);
    for &i in witness {
        let a = g.collection().get(i);
        let terms: Vec<(Vec<i64>, C<T>)> = a
            .iter()
            .zip(&g.coefficients()[i])
            .map(|(p, z)| {
                debug_assert!(p.coords()[r..].iter().all(|&x| x == 0));
                (p.coords()[..r].to_vec(), *z)
            })
            .collect();
        polys.push(terms);
    }
    SparseSystem::from_terms(r, &polys)
}

/// `Σ_1(V(F)) = (MV(C) / MV(C_I)) · Σ_1(V(F_I))` for a triangular witness `I`
/// with `e_1 ∈ L[C_I]`. The witness defaults to the first one found.
pub fn triangular_trace_check<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    witness: Option<&[usize]>,
    seed: u64,
    cfg: &SolverConfig<T>,
) -> Result<LawReport> {
    if f.collection() != c {
        return Err(Error::CollectionMismatch);
    }
    let witness: Vec<usize> = match witness {
        Some(w) => w.to_vec(),
        None => is_triangular(c)?.ok_or_else(|| Error::NotTriangularWitness(Vec::new()))?,
    };
    let sub = triangular_subsystem(f, &witness)?;
    let mv = mixed_volume(c)?;
    let mv_i = relative_mixed_volume(c, &witness)?;
    if mv_i.is_zero() {
        return Err(Error::Precondition(Precondition::ZeroMixedVolume));
    }
    let factor = BigRational::new(mv, mv_i.clone())
        .to_f64()
        .unwrap_or(f64::NAN);
    let solved = solve_generic(f, seed, cfg)?;
    let reduced = solve_generic(&sub, seed, cfg)?;
    let sigma = to_c64(trace(&solved.points, 0)?);
    let reduced_sigma = to_c64(trace(&reduced.points, 0)?);
    let err = relative_error(sigma, reduced_sigma * factor);
    let counts_match = Some(reduced.len() as u64) == mv_i.to_u64();
    Ok(LawReport {
        law: format!("triangular factor for witness {witness:?}"),
        solutions: solved.len(),
        sigma: ComplexJson::from_c(sigma),
        reduced_solutions: Some(reduced.len()),
        reduced_sigma: Some(ComplexJson::from_c(reduced_sigma)),
        factor,
        relative_error: err,
        tolerance: LAW_TOL,
        holds: err <= LAW_TOL && counts_match,
        subset_check: None,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn classes(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&i| self.find(i) == i)
            .count()
    }
}

/// The group generated by `perms` has a single orbit on `0..n`.
pub fn is_transitive(perms: &[Vec<usize>], n: usize) -> bool {
    let mut uf = UnionFind::new(n);
    for p in perms {
        for (i, &j) in p.iter().enumerate() {
            uf.union(i, j);
        }
    }
    n <= 1 || uf.classes() == 1
}

/// Single orbit on ordered pairs of distinct points.
pub fn is_two_transitive(perms: &[Vec<usize>], n: usize) -> bool {
    if n <= 1 {
        return true;
    }
    let id = |i: usize, j: usize| i * n + j;
    let mut uf = UnionFind::new(n * n);
    for p in perms {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    uf.union(id(i, j), id(p[i], p[j]));
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| uf.find(id(i, j)))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len() == 1
}

pub fn cycle_lengths(p: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        out.push(len);
    }
    out
}

pub fn is_transposition(p: &[usize]) -> bool {
    let lens = cycle_lengths(p);
    lens.iter().filter(|&&l| l == 2).count() == 1 && lens.iter().all(|&l| l <= 2)
}

/// Some power of `p` is a transposition: exactly one 2-cycle and every other
/// cycle of odd length.
pub fn has_transposition_power(p: &[usize]) -> bool {
    let lens = cycle_lengths(p);
    lens.iter().filter(|&&l| l == 2).count() == 1 && lens.iter().all(|&l| l == 2 || l % 2 == 1)
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    (0..a.len()).map(|i| a[b[i]]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub fibre_size: usize,
    pub loops_requested: usize,
    pub loops_completed: usize,
    pub failures: usize,
    pub lacunary: bool,
    pub transitive: bool,
    pub two_transitive: bool,
    pub transposition_observed: bool,
    /// A sampled permutation, or a product of two, has a transposition power.
    pub transposition_generated: bool,
    /// 2-transitive (hence primitive) and containing a transposition.
    pub full_symmetric: bool,
    pub permutations: Vec<Vec<usize>>,
}

/// Samples permutations of `V(F)` from random triangle loops that vary only
/// the coefficients on `B`, and summarizes the group they generate.
pub fn monodromy_experiment<T: Real>(
    c: &SupportCollection,
    f: &SparseSystem<T>,
    b: &SupportCollection,
    num_loops: usize,
    seed: u64,
    cfg: &SolverConfig<T>,
) -> Result<MonodromyReport> {
    if f.collection() != c {
        return Err(Error::CollectionMismatch);
    }
    if !has_positive_mixed_volume_by_defect(c)? {
        return Err(Error::Precondition(Precondition::ZeroMixedVolume));
    }
    if b.len() != c.len() || !b.is_subset_of(c) {
        return Err(Error::NotSubset);
    }
    if !is_abundant(b) {
        return Err(Error::Precondition(Precondition::NotAbundant));
    }
    let solved = solve_generic(f, seed, cfg)?;
    let fibre = solved.points;
    let n = fibre.len();
    let mut perms = Vec::new();
    let mut failures = 0;
    for k in 0..num_loops {
        match monodromy_loop(f, b, &fibre, rng::derive_seed(seed, k as u64), &cfg.tracker) {
            Ok(p) => perms.push(p),
            Err(Error::Numerical { .. }) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    let observed = perms.iter().any(|p| is_transposition(p));
    let generated = n <= 1
        || perms.iter().any(|p| has_transposition_power(p))
        || perms.iter().any(|a| {
            perms
                .iter()
                .any(|b| has_transposition_power(&compose(a, b)))
        });
    let two = is_two_transitive(&perms, n);
    Ok(MonodromyReport {
        fibre_size: n,
        loops_requested: num_loops,
        loops_completed: perms.len(),
        failures,
        lacunary: is_lacunary(c),
        transitive: is_transitive(&perms, n),
        two_transitive: two,
        transposition_observed: observed || n <= 1,
        transposition_generated: generated,
        full_symmetric: two && generated,
        permutations: perms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn symmetric_pair_has_zero_trace() {
        let x = TorusPoint::new(vec![c(1.3, -0.2), c(0.4, 2.0)], 0.0).unwrap();
        let y = TorusPoint::new(vec![c(-1.3, 0.2), c(-0.4, -2.0)], 0.0).unwrap();
        let s = [x, y];
        assert_eq!(trace(&s, 0).unwrap(), c(0.0, 0.0));
        assert_eq!(centroid(&s).unwrap(), vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(trace::<f64>(&[], 0).is_err());
    }

    #[test]
    fn collinearity_examples() {
        let (ok, r) = collinear(c(3.922, 0.0), c(1.672, 0.0), c(-0.578, 0.0), 1e-6);
        assert!(ok && r < 1e-12);
        let (ok, _) = collinear(c(-0.200, 0.0), c(-0.523, 0.0), c(-8.135, 0.0), 1e-6);
        assert!(!ok);
        let (ok, r) = collinear(c(2.0, 1.0), c(2.0, 1.0), c(2.0, 1.0), 1e-6);
        assert!(ok && r == 0.0);
    }

    #[test]
    fn group_predicates() {
        let swap = vec![1, 0, 2];
        let cycle = vec![1, 2, 0];
        assert!(is_transposition(&swap));
        assert!(!is_transposition(&cycle));
        assert!(is_transitive(std::slice::from_ref(&cycle), 3));
        assert!(!is_transitive(std::slice::from_ref(&swap), 3));
        assert!(is_two_transitive(&[swap.clone(), cycle.clone()], 3));
        assert!(!is_two_transitive(std::slice::from_ref(&cycle), 3));
        // (0 1)(2 3 4): its cube is a transposition.
        assert!(has_transposition_power(&[1, 0, 3, 4, 2]));
        // (0 1)(2 3): no power is a transposition.
        assert!(!has_transposition_power(&[1, 0, 3, 2]));
        // Paired action (the orbit of {0,1} stays a block) is transitive but not 2-transitive.
        let paired = vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]];
        assert!(is_transitive(&paired, 4));
        assert!(!is_two_transitive(&paired, 4));
    }

    #[test]
    fn strict_subsets() {
        for seed in 0..50 {
            let s = random_strict_subset(7, seed).unwrap();
            assert!(!s.is_empty() && s.len() < 7);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(random_strict_subset(1, 0).is_err());
    }
}
