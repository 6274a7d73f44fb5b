//! Reproducible experiment suites: the trace table of the hexagon/rectangle
//! pencil and a gallery of structured examples.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fixtures;
use crate::mixedvol::{mixed_volume, relative_mixed_volume};
use crate::polysys::{random_system, ComplexJson, SparseSystem};
use crate::rng;
use crate::scalar::C;
use crate::solver::{solve_torus, SolverConfig};
use crate::supports::{
    rectangle_points, simplex_points, LatticePoint, MonomialMap, SupportCollection,
};
use crate::tracetest::{trace, triangular_trace_check};

fn c64(re: f64) -> C<f64> {
    C::new(re, 0.0)
}

/// Largest distance of `ys` from their least-squares line in `t`.
pub fn affine_fit_deviation(ts: &[f64], ys: &[C<f64>]) -> f64 {
    let k = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<C<f64>>() / k;
    let stt: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    let sty: C<f64> = ts.iter().zip(ys).map(|(t, y)| (y - ym) * (t - tm)).sum();
    let slope = if stt > 0.0 {
        sty / stt
    } else {
        C::new(0.0, 0.0)
    };
    ts.iter()
        .zip(ys)
        .map(|(t, y)| (y - (ym + slope * (t - tm))).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceTable {
    pub t_values: Vec<f64>,
    pub counts: Vec<usize>,
    pub sigma1: Vec<ComplexJson>,
    pub sigma2: Vec<ComplexJson>,
    pub sigma1_fit_deviation: f64,
    pub sigma2_fit_deviation: f64,
}

/// Traces of `V(t F + (1 - t) G)` for the bundled hexagon/rectangle pair at
/// `t = 0, …, 5`.
pub fn trace_table(seed: u64, cfg: &SolverConfig<f64>) -> Result<TraceTable> {
    let f = fixtures::hexagon_rectangle_f();
    let g = fixtures::hexagon_rectangle_g();
    let t_values: Vec<f64> = (0..6).map(f64::from).collect();
    let mut counts = Vec::new();
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    for (k, &t) in t_values.iter().enumerate() {
        let h = f.combine(c64(t), &g, c64(1.0 - t))?;
        let solved = solve_torus(&h, rng::derive_seed(seed, k as u64), cfg)?;
        counts.push(solved.len());
        s1.push(trace(&solved.points, 0)?);
        s2.push(trace(&solved.points, 1)?);
    }
    Ok(TraceTable {
        sigma1_fit_deviation: affine_fit_deviation(&t_values, &s1),
        sigma2_fit_deviation: affine_fit_deviation(&t_values, &s2),
        t_values,
        counts,
        sigma1: s1.into_iter().map(ComplexJson::from_c).collect(),
        sigma2: s2.into_iter().map(ComplexJson::from_c).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryCheck {
    pub name: String,
    pub mixed_volumes: Vec<u64>,
    pub solution_counts: Vec<usize>,
    pub expected_counts: Vec<usize>,
    pub traces: Vec<ComplexJson>,
    pub relative_error: f64,
    pub holds: bool,
}

const GALLERY_TOL: f64 = 1e-6;

fn mv_u64(c: &SupportCollection) -> Result<u64> {
    Ok(mixed_volume(c)?.to_u64().unwrap_or(u64::MAX))
}

fn rel(a: C<f64>, b: C<f64>) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// Solves both systems and compares their first-coordinate traces.
fn compare(
    name: &str,
    systems: &[&SparseSystem<f64>],
    expected_counts: Vec<usize>,
    seed: u64,
    cfg: &SolverConfig<f64>,
) -> Result<GalleryCheck> {
    let mut counts = Vec::new();
    let mut traces = Vec::new();
    let mut mvs = Vec::new();
    for (k, f) in systems.iter().enumerate() {
        mvs.push(mv_u64(f.collection())?);
        let solved = solve_torus(f, rng::derive_seed(seed, k as u64), cfg)?;
        counts.push(solved.len());
        traces.push(trace(&solved.points, 0)?);
    }
    let err = rel(traces[0], traces[1]);
    Ok(GalleryCheck {
        name: name.into(),
        mixed_volumes: mvs,
        holds: err <= GALLERY_TOL && counts == expected_counts,
        solution_counts: counts,
        expected_counts,
        traces: traces.into_iter().map(ComplexJson::from_c).collect(),
        relative_error: err,
    })
}

/// Quintics against their truncation to terms of degree 4 and 5.
pub fn truncated_quintics(seed: u64, cfg: &SolverConfig<f64>) -> Result<GalleryCheck> {
    let full = fixtures::dilated_simplices(2, 5);
    let f = random_system::<f64>(&full, seed);
    let low = SupportCollection::repeated(&simplex_points(2, 3), 2);
    let kept = full.difference(&low);
    let t = f.truncate(&kept)?;
    compare("quintic truncation", &[&f, &t], vec![25, 9], seed, cfg)
}

/// Rectangles `[0,5]×[0,2]` and `[0,2]×[0,3]` against their last two columns.
pub fn rectangle_columns(seed: u64, cfg: &SolverConfig<f64>) -> Result<GalleryCheck> {
    let c = SupportCollection::new(2, vec![rectangle_points(5, 2), rectangle_points(2, 3)])?;
    let f = random_system::<f64>(&c, seed);
    let kept = c.map_supports(|a| {
        a.filter(|p| p.coords()[0] >= a.iter().map(|q| q.coords()[0]).max().unwrap_or(0) - 1)
    });
    let t = f.truncate(&kept)?;
    compare("rectangle columns", &[&f, &t], vec![19, 5], seed, cfg)
}

/// Quintics whose degree-5 forms share a linear factor lose a solution to
/// infinity; the trace still only sees terms of degree 3 and up.
pub fn shared_factor_quintics(seed: u64, cfg: &SolverConfig<f64>) -> Result<GalleryCheck> {
    let full = fixtures::dilated_simplices(2, 5);
    let mut f = random_system::<f64>(&full, seed);
    let mut rng = rng::stream(seed, rng::STREAM_GALLERY);
    let ell = [rng::annulus::<f64>(&mut rng), rng::annulus::<f64>(&mut rng)];
    for i in 0..2 {
        let quartic: Vec<C<f64>> = (0..5).map(|_| rng::annulus(&mut rng)).collect();
        // (a x + b y) Σ q_j x^{4-j} y^j
        let mut top = vec![C::new(0.0, 0.0); 6];
        for (j, q) in quartic.iter().enumerate() {
            top[j] += ell[0] * q;
            top[j + 1] += ell[1] * q;
        }
        for (j, z) in top.into_iter().enumerate() {
            f.set_coefficient(i, &LatticePoint::new(vec![5 - j as i64, j as i64]), z)?;
        }
    }
    let low = SupportCollection::repeated(&simplex_points(2, 2), 2);
    let kept = full.difference(&low);
    let t = f.truncate(&kept)?;
    compare("shared linear factor", &[&f, &t], vec![24, 15], seed, cfg)
}

/// Generic quintics `F` and `G(y) = F(y_1 y_2^{-2}, y_2)` on the sheared
/// support: `Σ_1(V(G)) = Σ x_1 x_2^2` over `V(F)`.
pub fn sheared_trace(seed: u64, cfg: &SolverConfig<f64>) -> Result<GalleryCheck> {
    let f = random_system::<f64>(&fixtures::dilated_simplices(2, 5), seed);
    let psi = MonomialMap::from_columns(&[vec![1, -2], vec![0, 1]])?;
    let g = f.apply_monomial_map(&psi)?;
    let vf = solve_torus(&f, seed, cfg)?;
    let vg = solve_torus(&g, rng::derive_seed(seed, 1), cfg)?;
    let weighted: C<f64> = vf
        .points
        .iter()
        .map(|p| p.coords()[0] * p.coords()[1] * p.coords()[1])
        .sum();
    let sg = trace(&vg.points, 0)?;
    let err = rel(sg, weighted);
    let counts = vec![vf.len(), vg.len()];
    let expected = vec![vf.mv as usize, vf.mv as usize];
    Ok(GalleryCheck {
        name: "sheared support".into(),
        mixed_volumes: vec![vf.mv, vg.mv],
        holds: err <= GALLERY_TOL && counts == expected,
        solution_counts: counts,
        expected_counts: expected,
        traces: vec![ComplexJson::from_c(weighted), ComplexJson::from_c(sg)],
        relative_error: err,
    })
}

/// Triangular box collection: `Σ_1(V(F)) = 3 Σ_1(V(F_I))` for `I = [1, 2]`.
pub fn triangular_box_trace(seed: u64, cfg: &SolverConfig<f64>) -> Result<GalleryCheck> {
    let c = fixtures::triangular_box();
    let f = random_system::<f64>(&c, seed);
    let r = triangular_trace_check(&c, &f, Some(&[1, 2]), seed, cfg)?;
    Ok(GalleryCheck {
        name: "triangular box".into(),
        mixed_volumes: vec![
            mv_u64(&c)?,
            relative_mixed_volume(&c, &[1, 2])?
                .to_u64()
                .unwrap_or(u64::MAX),
        ],
        solution_counts: vec![r.solutions, r.reduced_solutions.unwrap_or(0)],
        expected_counts: vec![12, 4],
        traces: vec![
            r.sigma,
            r.reduced_sigma.unwrap_or(ComplexJson { re: 0.0, im: 0.0 }),
        ],
        relative_error: r.relative_error,
        holds: r.holds && r.factor == 3.0,
    })
}

pub fn gallery(seed: u64, cfg: &SolverConfig<f64>) -> Result<Vec<GalleryCheck>> {
    Ok(vec![
        truncated_quintics(seed, cfg)?,
        rectangle_columns(seed, cfg)?,
        shared_factor_quintics(seed, cfg)?,
        sheared_trace(seed, cfg)?,
        triangular_box_trace(seed, cfg)?,
    ])
}
