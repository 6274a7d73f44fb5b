//! Predictor-corrector continuation along segments and closed loops.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Precondition, Recommendation, Result};
use crate::linalg::{condition_estimate, solve};
use crate::polysys::{SegmentFamily, SparseSystem, TorusPoint};
use crate::rng;
use crate::scalar::{norm_inf, Real, C};
use crate::supports::SupportCollection;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig<T> {
    pub newton_tol: T,
    pub max_newton_iters: usize,
    pub initial_step: T,
    pub min_step: T,
    /// Upper bound on the step length in `t`.
    pub max_step: T,
    pub step_expand: T,
    pub step_contract: T,
    pub torus_floor: T,
    /// Abort once a coordinate exceeds this modulus.
    pub path_bound: T,
    /// Newton iterations allowed per corrector call.
    pub corrector_iters: usize,
    pub corrector_tol: T,
    /// Hard cap on step attempts per path.
    pub max_steps: usize,
    /// A path whose step underflows this close to its target still gets the
    /// final Newton classification there.
    pub endgame_radius: T,
}

impl<T: Real> Default for TrackerConfig<T> {
    fn default() -> Self {
        TrackerConfig {
            newton_tol: T::default_newton_tol(),
            max_newton_iters: 8,
            initial_step: T::c(0.05),
            min_step: T::default_min_step(),
            max_step: T::c(0.1),
            step_expand: T::c(1.5),
            step_contract: T::c(0.5),
            torus_floor: T::default_torus_floor(),
            path_bound: T::c(1e8),
            corrector_iters: 3,
            corrector_tol: T::default_corrector_tol(),
            max_steps: 20_000,
            endgame_radius: T::default_min_step() * T::c(1e3),
        }
    }
}

impl<T: Real> TrackerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parse(format!("invalid tracker config: {what}")));
        let one = T::one();
        if !(T::zero() < self.min_step
            && self.min_step < self.initial_step
            && self.initial_step <= one)
        {
            return bad("need 0 < min_step < initial_step <= 1");
        }
        if !(self.max_step >= self.initial_step) {
            return bad("max_step must be at least initial_step");
        }
        if !(self.newton_tol > T::zero()
            && self.corrector_tol > T::zero()
            && self.torus_floor > T::zero())
        {
            return bad("tolerances must be positive");
        }
        if !(self.step_expand > one && self.step_contract > T::zero() && self.step_contract < one) {
            return bad("need step_expand > 1 and 0 < step_contract < 1");
        }
        if self.max_newton_iters == 0 || self.corrector_iters == 0 || self.max_steps == 0 {
            return bad("iteration budgets must be positive");
        }
        if !(self.endgame_radius >= T::zero()) {
            return bad("endgame_radius must be nonnegative");
        }
        if !(self.path_bound > one) {
            return bad("path_bound must exceed 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathStatus {
    Success,
    Diverged,
    Singular,
    LeftTorus,
    StepUnderflow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathOutcome<T> {
    pub status: PathStatus,
    /// Present exactly on success.
    pub end: Option<TorusPoint<T>>,
    pub steps_taken: usize,
    /// Size of the last Newton correction relative to `max(1, |x|)`.
    pub residual: T,
    /// Condition estimate of the toric Jacobian at the end point.
    pub condition: T,
}

impl<T: Real> PathOutcome<T> {
    fn failed(status: PathStatus, steps_taken: usize) -> Self {
        PathOutcome {
            status,
            end: None,
            steps_taken,
            residual: T::infinity(),
            condition: T::infinity(),
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == PathStatus::Success
    }
}

fn scale<T: Real>(x: &[C<T>]) -> T {
    norm_inf(x).max(T::one())
}

fn all_finite<T: Real>(x: &[C<T>]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `dx/dt = -J⁻¹ ∂H/∂t`.
fn velocity<T: Real>(family: &SegmentFamily<T>, x: &[C<T>], t: T) -> Option<Vec<C<T>>> {
    let (_, jac, ht) = family.eval_all(x, t);
    let v = solve(jac, &ht)?;
    let v: Vec<C<T>> = v.into_iter().map(|z| -z).collect();
    all_finite(&v).then_some(v)
}

fn axpy<T: Real>(x: &[C<T>], a: T, v: &[C<T>]) -> Vec<C<T>> {
    x.iter().zip(v).map(|(xi, vi)| xi + vi * a).collect()
}

fn rk4<T: Real>(family: &SegmentFamily<T>, x: &[C<T>], t: T, dt: T) -> Option<Vec<C<T>>> {
    let half = dt / T::c(2.0);
    let k1 = velocity(family, x, t)?;
    let k2 = velocity(family, &axpy(x, half, &k1), t + half)?;
    let k3 = velocity(family, &axpy(x, half, &k2), t + half)?;
    let k4 = velocity(family, &axpy(x, dt, &k3), t + dt)?;
    let sixth = dt / T::c(6.0);
    let two = T::c(2.0);
    Some(
        (0..x.len())
            .map(|i| x[i] + (k1[i] + k2[i] * two + k3[i] * two + k4[i]) * sixth)
            .collect(),
    )
}

/// One Newton correction at fixed `t`; returns the update applied.
fn newton_update<T: Real>(family: &SegmentFamily<T>, x: &mut [C<T>], t: T) -> Option<T> {
    let (h, jac) = family.eval_jac(x, t);
    let d = solve(jac, &h)?;
    if !all_finite(&d) {
        return None;
    }
    for (xi, di) in x.iter_mut().zip(&d) {
        *xi = *xi - di;
    }
    Some(norm_inf(&d))
}

/// Predict with RK4, then correct. Rejects the step when the first Newton
/// correction exceeds half the predictor displacement, which is the usual
/// sign of having jumped onto a neighbouring path.
fn try_step<T: Real>(
    family: &SegmentFamily<T>,
    x: &[C<T>],
    t: T,
    dt: T,
    cfg: &TrackerConfig<T>,
) -> Option<Vec<C<T>>> {
    let predicted = rk4(family, x, t, dt)?;
    if !all_finite(&predicted) {
        return None;
    }
    let displacement = x
        .iter()
        .zip(&predicted)
        .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()));
    let floor = cfg.corrector_tol * scale(x);
    let t1 = t + dt;
    let mut y = predicted;
    for k in 0..cfg.corrector_iters {
        let d = newton_update(family, &mut y, t1)?;
        if k == 0 && d > displacement / T::c(2.0) + floor {
            return None;
        }
        if d <= cfg.corrector_tol * scale(&y) {
            return Some(y);
        }
    }
    None
}

/// Condition of `J diag(x)` (derivatives in logarithmic coordinates), which
/// does not penalize coordinates of very different magnitude.
pub(crate) fn toric_condition<T: Real>(jac: &[Vec<C<T>>], x: &[C<T>]) -> T {
    let scaled: Vec<Vec<C<T>>> = jac
        .iter()
        .map(|row| row.iter().zip(x).map(|(a, xi)| a * xi).collect())
        .collect();
    condition_estimate(&scaled)
}

/// Newton refinement at fixed `t`; returns the last relative update size.
fn refine<T: Real>(
    family: &SegmentFamily<T>,
    x: &mut [C<T>],
    t: T,
    cfg: &TrackerConfig<T>,
) -> Option<T> {
    let mut res = T::infinity();
    for _ in 0..cfg.max_newton_iters {
        let d = newton_update(family, x, t)?;
        res = d / scale(x);
        if res <= cfg.newton_tol {
            break;
        }
    }
    Some(res)
}

/// Classifies a converged point at parameter `t`.
fn finish<T: Real>(
    family: &SegmentFamily<T>,
    mut x: Vec<C<T>>,
    t: T,
    steps: usize,
    cfg: &TrackerConfig<T>,
) -> PathOutcome<T> {
    let Some(residual) = refine(family, &mut x, t, cfg) else {
        return PathOutcome::failed(PathStatus::Singular, steps);
    };
    if norm_inf(&x) > cfg.path_bound {
        return PathOutcome::failed(PathStatus::Diverged, steps);
    }
    if x.iter().any(|z| !(z.norm() > cfg.torus_floor)) {
        return PathOutcome::failed(PathStatus::LeftTorus, steps);
    }
    let (_, jac) = family.eval_jac(&x, t);
    let condition = toric_condition(&jac, &x);
    if !(residual <= cfg.newton_tol) || !(condition * cfg.newton_tol < T::one()) {
        return PathOutcome {
            status: PathStatus::Singular,
            end: None,
            steps_taken: steps,
            residual,
            condition,
        };
    }
    PathOutcome {
        status: PathStatus::Success,
        end: Some(TorusPoint::new_unchecked(x)),
        steps_taken: steps,
        residual,
        condition,
    }
}

/// Follows the solution path of `t F + (1 - t) γ G` from `from_t` to `to_t`.
pub fn track_segment<T: Real>(
    family: &SegmentFamily<T>,
    start: &TorusPoint<T>,
    from_t: T,
    to_t: T,
    cfg: &TrackerConfig<T>,
) -> PathOutcome<T> {
    let dir = if to_t >= from_t { T::one() } else { -T::one() };
    let mut x = start.coords().to_vec();
    let mut t = from_t;
    let mut h = cfg.initial_step.min(cfg.max_step);
    let mut steps = 0;
    let mut attempts = 0;
    let mut streak = 0;
    while t != to_t {
        attempts += 1;
        if attempts > cfg.max_steps {
            return PathOutcome::failed(PathStatus::StepUnderflow, steps);
        }
        let remaining = (to_t - t).abs();
        let (dt, t1) = if h >= remaining {
            (to_t - t, to_t)
        } else {
            (dir * h, t + dir * h)
        };
        match try_step(family, &x, t, dt, cfg) {
            Some(y) => {
                x = y;
                t = t1;
                steps += 1;
                streak += 1;
                if streak >= 2 {
                    h = (h * cfg.step_expand).min(cfg.max_step);
                    streak = 0;
                }
                if norm_inf(&x) > cfg.path_bound {
                    return PathOutcome::failed(PathStatus::Diverged, steps);
                }
                if x.iter().any(|z| !(z.norm() > cfg.torus_floor)) {
                    return PathOutcome::failed(PathStatus::LeftTorus, steps);
                }
            }
            None => {
                h = h * cfg.step_contract;
                streak = 0;
                if h < cfg.min_step {
                    if (to_t - t).abs() <= cfg.endgame_radius {
                        let end = finish(family, x, to_t, steps, cfg);
                        if end.is_success() {
                            return end;
                        }
                    }
                    return PathOutcome::failed(PathStatus::StepUnderflow, steps);
                }
            }
        }
    }
    finish(family, x, to_t, steps, cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetOutcome<T> {
    pub outcomes: Vec<PathOutcome<T>>,
    /// Pairs of successful paths whose end points coincide.
    pub crossings: Vec<(usize, usize)>,
}

impl<T: Real> SetOutcome<T> {
    pub fn all_success(&self) -> bool {
        self.outcomes.iter().all(PathOutcome::is_success) && self.crossings.is_empty()
    }

    /// End points in input order; `None` unless every path succeeded
    /// without crossings.
    pub fn endpoints(&self) -> Option<Vec<TorusPoint<T>>> {
        if !self.all_success() {
            return None;
        }
        self.outcomes.iter().map(|o| o.end.clone()).collect()
    }

    pub fn status_counts(&self) -> Vec<(PathStatus, usize)> {
        let mut counts: Vec<(PathStatus, usize)> = Vec::new();
        for o in &self.outcomes {
            match counts.iter_mut().find(|(s, _)| *s == o.status) {
                Some(entry) => entry.1 += 1,
                None => counts.push((o.status, 1)),
            }
        }
        counts
    }
}

const DISTINCT_TOL: f64 = 1e-8;

pub(crate) fn first_coincidence<T: Real>(points: &[TorusPoint<T>]) -> Option<(usize, usize)> {
    let tol = T::c(DISTINCT_TOL);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].distance(&points[j]) <= tol {
                return Some((i, j));
            }
        }
    }
    None
}

/// Tracks every start independently (in parallel) and flags coinciding end points.
pub fn track_set<T: Real>(
    family: &SegmentFamily<T>,
    starts: &[TorusPoint<T>],
    from_t: T,
    to_t: T,
    cfg: &TrackerConfig<T>,
) -> Result<SetOutcome<T>> {
    if let Some((i, j)) = first_coincidence(starts) {
        return Err(Error::Precondition(Precondition::DuplicatePoints(i, j)));
    }
    let outcomes: Vec<PathOutcome<T>> = starts
        .par_iter()
        .map(|s| track_segment(family, s, from_t, to_t, cfg))
        .collect();
    let tol = T::c(DISTINCT_TOL);
    let mut crossings = Vec::new();
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            if let (Some(a), Some(b)) = (&outcomes[i].end, &outcomes[j].end) {
                if a.distance(b) <= tol {
                    crossings.push((i, j));
                }
            }
        }
    }
    Ok(SetOutcome {
        outcomes,
        crossings,
    })
}

fn loop_failure(detail: String) -> Error {
    Error::Numerical {
        detail,
        recommendation: Recommendation::Retry,
    }
}

/// Moves `points` (solutions of `from`) to solutions of `to` along the
/// straight segment between the two coefficient vectors.
pub fn track_edge<T: Real>(
    from: &SparseSystem<T>,
    to: &SparseSystem<T>,
    points: &[TorusPoint<T>],
    cfg: &TrackerConfig<T>,
) -> Result<Vec<TorusPoint<T>>> {
    let family = SegmentFamily::new(to.clone(), from.clone())?;
    let set = track_set(&family, points, T::zero(), T::one(), cfg)?;
    set.endpoints().ok_or_else(|| {
        loop_failure(format!(
            "edge tracking failed: {:?}, crossings {:?}",
            set.status_counts(),
            set.crossings
        ))
    })
}

/// Matches each end point to a fibre point; the nearest fibre point must be
/// within `1e-6` relative and ten times closer than the second nearest.
pub fn match_points<T: Real>(
    ends: &[TorusPoint<T>],
    fibre: &[TorusPoint<T>],
) -> Result<Vec<usize>> {
    let mut perm = Vec::with_capacity(ends.len());
    let mut used = vec![false; fibre.len()];
    for (i, e) in ends.iter().enumerate() {
        let mut best = (usize::MAX, T::infinity());
        let mut second = T::infinity();
        for (j, f) in fibre.iter().enumerate() {
            let d = e.distance(f);
            if d < best.1 {
                second = best.1;
                best = (j, d);
            } else if d < second {
                second = d;
            }
        }
        let (j, d) = best;
        let close = d <= T::c(1e-6) * e.norm().max(T::one());
        let separated = second.is_infinite() || d < T::c(0.1) * second;
        if j == usize::MAX || !close || !separated || used[j] {
            return Err(loop_failure(format!("ambiguous match for end point {i}")));
        }
        used[j] = true;
        perm.push(j);
    }
    Ok(perm)
}

/// Permutation of `fibre` induced by the closed loop
/// `base → waypoints[0] → … → base`; `perm[i]` is where `fibre[i]` lands.
pub fn monodromy_loop_through<T: Real>(
    base: &SparseSystem<T>,
    waypoints: &[SparseSystem<T>],
    fibre: &[TorusPoint<T>],
    cfg: &TrackerConfig<T>,
) -> Result<Vec<usize>> {
    let mut current = fibre.to_vec();
    let mut from = base;
    for to in waypoints.iter().chain(std::iter::once(base)) {
        current = track_edge(from, to, &current, cfg)?;
        from = to;
    }
    match_points(&current, fibre)
}

/// Two random waypoints that differ from `base` only on the coefficients in `b`.
/// Draws are scaled to the largest coefficient of `base`; unit-size draws
/// around a system with large coefficients give loops too small to wind
/// around the branch points of outlying solutions.
pub fn loop_waypoints<T: Real>(
    base: &SparseSystem<T>,
    b: &SupportCollection,
    seed: u64,
) -> Result<[SparseSystem<T>; 2]> {
    let mut rng = rng::stream(seed, rng::STREAM_LOOP);
    let scale = base.coefficient_scale();
    Ok([
        base.resample_on_scaled(b, scale, &mut rng)?,
        base.resample_on_scaled(b, scale, &mut rng)?,
    ])
}

/// Triangle loop through two random systems that agree with `base` off `b`.
pub fn monodromy_loop<T: Real>(
    base: &SparseSystem<T>,
    b: &SupportCollection,
    fibre: &[TorusPoint<T>],
    seed: u64,
    cfg: &TrackerConfig<T>,
) -> Result<Vec<usize>> {
    let waypoints = loop_waypoints(base, b, seed)?;
    monodromy_loop_through(base, &waypoints, fibre, cfg)
}
