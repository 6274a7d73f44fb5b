//! Exact convex hulls of integer point sets.

use std::collections::HashMap;

use num_rational::Ratio;
use num_traits::Zero;

use crate::scalar::ExactInt;
use crate::supports::{determinant, echelon_basis, smith_form, LatticePoint, Support};

/// Inequality `normal . x <= offset` (or an equation, depending on context).
/// Normals are primitive integer vectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: ExactInt> Halfspace<T> {
    pub fn eval(&self, x: &[i64]) -> T {
        dot_i64(&self.normal, x)
    }
}

/// Convex hull of a finite lattice point set.
///
/// For a lower-dimensional hull, `equations` cut out the affine hull and
/// `facets` are the facet inequalities inside it (normals vanish outside a
/// coordinate subset on which the projection is injective).
#[derive(Clone, Debug)]
pub struct Polytope<T> {
    ambient_dim: usize,
    dim: usize,
    vertices: Vec<LatticePoint>,
    facets: Vec<Halfspace<T>>,
    equations: Vec<Halfspace<T>>,
    volume: Ratio<T>,
}

impl<T: ExactInt> Polytope<T> {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Affine dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_degenerate(&self) -> bool {
        self.dim < self.ambient_dim
    }

    /// Extreme points, sorted lexicographically.
    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace<T>] {
        &self.facets
    }

    pub fn equations(&self) -> &[Halfspace<T>] {
        &self.equations
    }

    /// Euclidean volume in the ambient space (zero when degenerate).
    pub fn volume(&self) -> &Ratio<T> {
        &self.volume
    }

    pub fn contains(&self, x: &LatticePoint) -> bool {
        self.equations
            .iter()
            .all(|e| e.eval(x.coords()) == e.offset)
            && self.facets.iter().all(|f| f.eval(x.coords()) <= f.offset)
    }

    /// Largest `t >= 0` with `alpha + t e_coord` in the hull, for `alpha`
    /// inside the hull.
    pub fn ray_exit(&self, alpha: &LatticePoint, coord: usize) -> Ratio<T> {
        if self.equations.iter().any(|e| !e.normal[coord].is_zero()) {
            return Ratio::zero();
        }
        self.facets
            .iter()
            .filter(|f| f.normal[coord].is_positive())
            .map(|f| {
                Ratio::new(
                    f.offset.clone() - f.eval(alpha.coords()),
                    f.normal[coord].clone(),
                )
            })
            .min()
            .unwrap_or_else(Ratio::zero)
    }
}

pub fn euclidean_volume<T: ExactInt>(p: &Polytope<T>) -> Ratio<T> {
    p.volume.clone()
}

pub fn convex_hull<T: ExactInt>(a: &Support) -> Polytope<T> {
    convex_hull_points(a.points(), a.dim())
}

/// Hull of the Minkowski sum, from pairwise sums of vertices.
pub fn minkowski_sum<T: ExactInt>(p: &Polytope<T>, q: &Polytope<T>) -> Polytope<T> {
    let mut pts: Vec<LatticePoint> = p
        .vertices
        .iter()
        .flat_map(|a| q.vertices.iter().map(move |b| a.add(b)))
        .collect();
    pts.sort();
    pts.dedup();
    convex_hull_points(&pts, p.ambient_dim)
}

fn dot_i64<T: ExactInt>(a: &[T], x: &[i64]) -> T {
    a.iter()
        .zip(x)
        .fold(T::zero(), |acc, (u, &v)| acc + u.clone() * T::from(v))
}

fn dot<T: ExactInt>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (u, v)| acc + u.clone() * v.clone())
}

fn primitive<T: ExactInt>(v: &mut [T], extra: Option<&mut T>) {
    let g = v.iter().fold(T::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        return;
    }
    v.iter_mut().for_each(|x| *x = x.clone() / g.clone());
    if let Some(e) = extra {
        *e = e.clone() / g;
    }
}

fn factorial<T: ExactInt>(d: usize) -> T {
    (1..=d as i64).fold(T::one(), |acc, k| acc * T::from(k))
}

pub fn convex_hull_points<T: ExactInt>(input: &[LatticePoint], n: usize) -> Polytope<T> {
    let mut points = input.to_vec();
    points.sort();
    points.dedup();
    assert!(!points.is_empty(), "hull of an empty point set");
    let base = points[0].clone();
    let diffs: Vec<Vec<T>> = points[1..]
        .iter()
        .map(|p| p.sub(&base).coords().iter().map(|&x| T::from(x)).collect())
        .collect();
    let smith = smith_form(diffs.clone(), n);
    let k = smith.rank();

    let mut equations: Vec<Halfspace<T>> = smith
        .kernel_columns()
        .into_iter()
        .map(|mut normal| {
            primitive(&mut normal, None);
            if normal
                .iter()
                .find(|x| !x.is_zero())
                .is_some_and(|x| x.is_negative())
            {
                normal.iter_mut().for_each(|x| *x = -x.clone());
            }
            let offset = dot_i64(&normal, base.coords());
            Halfspace { normal, offset }
        })
        .collect();
    equations.sort();

    if k == 0 {
        return Polytope {
            ambient_dim: n,
            dim: 0,
            vertices: vec![base],
            facets: Vec::new(),
            equations,
            volume: Ratio::zero(),
        };
    }

    // coordinates on which the projection of the affine hull is injective
    let mut coords: Vec<usize> = Vec::new();
    for j in 0..n {
        let mut trial = coords.clone();
        trial.push(j);
        let proj: Vec<Vec<T>> = diffs
            .iter()
            .map(|d| trial.iter().map(|&c| d[c].clone()).collect())
            .collect();
        if echelon_basis(proj, trial.len()).len() == trial.len() {
            coords = trial;
            if coords.len() == k {
                break;
            }
        }
    }
    let projected: Vec<Vec<T>> = points
        .iter()
        .map(|p| coords.iter().map(|&c| T::from(p[c])).collect())
        .collect();
    let hull = full_hull(&projected, k);

    let facets = hull
        .facets
        .into_iter()
        .map(|f| {
            let mut normal = vec![T::zero(); n];
            for (slot, &c) in coords.iter().enumerate() {
                normal[c] = f.normal[slot].clone();
            }
            Halfspace {
                normal,
                offset: f.offset,
            }
        })
        .collect();
    let vertices = hull.vertices.iter().map(|&i| points[i].clone()).collect();
    let volume = if k == n {
        Ratio::new(hull.abs_det_sum, factorial(n))
    } else {
        Ratio::zero()
    };
    Polytope {
        ambient_dim: n,
        dim: k,
        vertices,
        facets,
        equations,
        volume,
    }
}

struct FullHull<T> {
    facets: Vec<Halfspace<T>>,
    vertices: Vec<usize>,
    abs_det_sum: T,
}

struct SimplexFacet<T> {
    verts: Vec<usize>,
    normal: Vec<T>,
    offset: T,
}

/// Placing triangulation of a full-dimensional point set in `Z^d`,
/// processed in input order after an initial simplex.
#[allow(clippy::needless_range_loop)] // indices are point ids
fn full_hull<T: ExactInt>(pts: &[Vec<T>], d: usize) -> FullHull<T> {
    let sub = |a: &[T], b: &[T]| -> Vec<T> {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.clone() - y.clone())
            .collect()
    };

    let mut simplex = vec![0usize];
    let mut edges: Vec<Vec<T>> = Vec::new();
    for i in 1..pts.len() {
        if simplex.len() == d + 1 {
            break;
        }
        let mut trial = edges.clone();
        trial.push(sub(&pts[i], &pts[0]));
        if echelon_basis(trial.clone(), d).len() == trial.len() {
            edges = trial;
            simplex.push(i);
        }
    }
    assert_eq!(simplex.len(), d + 1, "point set is not full-dimensional");

    let scale = T::from(d as i64 + 1);
    let interior: Vec<T> = (0..d)
        .map(|c| {
            simplex
                .iter()
                .fold(T::zero(), |acc, &i| acc + pts[i][c].clone())
        })
        .collect();

    let make_facet = |verts: Vec<usize>| -> SimplexFacet<T> {
        let v0 = &pts[verts[0]];
        let rows: Vec<Vec<T>> = verts[1..].iter().map(|&i| sub(&pts[i], v0)).collect();
        let mut normal: Vec<T> = (0..d)
            .map(|j| {
                let mut m = rows.clone();
                m.push(
                    (0..d)
                        .map(|c| if c == j { T::one() } else { T::zero() })
                        .collect(),
                );
                determinant(&m)
            })
            .collect();
        let mut offset = dot(&normal, v0);
        if (dot(&normal, &interior) - scale.clone() * offset.clone()).is_positive() {
            normal.iter_mut().for_each(|x| *x = -x.clone());
            offset = -offset;
        }
        SimplexFacet {
            verts,
            normal,
            offset,
        }
    };

    let mut abs_det_sum = determinant(&edges).abs();
    let mut boundary: Vec<SimplexFacet<T>> = (0..=d)
        .map(|skip| {
            let verts: Vec<usize> = simplex
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &i)| i)
                .collect();
            make_facet(verts)
        })
        .collect();

    let in_simplex: std::collections::HashSet<usize> = simplex.iter().copied().collect();
    for p in 0..pts.len() {
        if in_simplex.contains(&p) {
            continue;
        }
        let mut visible = Vec::new();
        let mut kept = Vec::new();
        for f in boundary.drain(..) {
            let h = dot(&f.normal, &pts[p]) - f.offset.clone();
            if h.is_positive() {
                abs_det_sum = abs_det_sum + h;
                visible.push(f);
            } else {
                kept.push(f);
            }
        }
        boundary = kept;
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in &visible {
            for skip in 0..d {
                let r: Vec<usize> = f
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &i)| i)
                    .collect();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort();
        for mut r in horizon {
            r.push(p);
            r.sort();
            boundary.push(make_facet(r));
        }
    }

    let mut facets: Vec<Halfspace<T>> = boundary
        .iter()
        .map(|f| {
            let mut normal = f.normal.clone();
            let mut offset = f.offset.clone();
            primitive(&mut normal, Some(&mut offset));
            Halfspace { normal, offset }
        })
        .collect();
    facets.sort();
    facets.dedup();

    let vertices = (0..pts.len())
        .filter(|&i| {
            let tight: Vec<Vec<T>> = facets
                .iter()
                .filter(|f| dot(&f.normal, &pts[i]) == f.offset)
                .map(|f| f.normal.clone())
                .collect();
            tight.len() >= d && echelon_basis(tight, d).len() == d
        })
        .collect();

    FullHull {
        facets,
        vertices,
        abs_det_sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supports::{simplex_points, Support};
    use num_bigint::BigInt;

    fn hull(rows: &[&[i64]]) -> Polytope<BigInt> {
        let n = rows[0].len();
        convex_hull(&Support::from_rows(n, rows).unwrap())
    }

    fn q(a: i64, b: i64) -> Ratio<BigInt> {
        Ratio::new(a.into(), b.into())
    }

    #[test]
    fn triangle_square_and_scaled_simplex() {
        assert_eq!(*hull(&[&[0, 0], &[1, 0], &[0, 1]]).volume(), q(1, 2));
        assert_eq!(
            *hull(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).volume(),
            q(1, 1)
        );
        let p: Polytope<BigInt> = convex_hull(&simplex_points(2, 5));
        assert_eq!(*p.volume(), q(25, 2));
        assert_eq!(p.vertices().len(), 3);
        let t: Polytope<BigInt> = convex_hull(&simplex_points(3, 2));
        assert_eq!(*t.volume(), q(8, 6));
    }

    #[test]
    fn hexagon_vertices_exclude_interior() {
        let p = hull(&[
            &[0, 0],
            &[1, 0],
            &[2, 0],
            &[1, 1],
            &[3, 1],
            &[0, 2],
            &[1, 2],
            &[2, 2],
            &[1, 3],
            &[2, 3],
            &[1, 4],
            &[2, 4],
        ]);
        let v: Vec<Vec<i64>> = p.vertices().iter().map(|x| x.coords().to_vec()).collect();
        assert_eq!(
            v,
            vec![
                vec![0, 0],
                vec![0, 2],
                vec![1, 4],
                vec![2, 0],
                vec![2, 4],
                vec![3, 1]
            ]
        );
        assert_eq!(p.facets().len(), 6);
        assert_eq!(*p.volume(), q(9, 1));
    }

    #[test]
    fn collinear_set_is_degenerate() {
        let p = hull(&[&[0, 0], &[1, 1], &[3, 3], &[2, 2]]);
        assert!(p.is_degenerate());
        assert_eq!(p.dim(), 1);
        assert_eq!(p.vertices().len(), 2);
        assert!(p.volume().is_zero());
        assert_eq!(p.equations().len(), 1);
        // moving along e1 leaves the line at once
        assert!(p.ray_exit(&LatticePoint::new(vec![1, 1]), 0).is_zero());
        let seg = hull(&[&[0, 5], &[1, 5], &[2, 5]]);
        assert_eq!(seg.ray_exit(&LatticePoint::new(vec![0, 5]), 0), q(2, 1));
    }

    #[test]
    fn minkowski_of_triangles_is_doubled() {
        let d = hull(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert_eq!(*minkowski_sum(&d, &d).volume(), q(2, 1));
    }

    #[test]
    fn every_vertex_is_tight_on_enough_facets() {
        let p: Polytope<BigInt> = convex_hull(&simplex_points(3, 3));
        for v in p.vertices() {
            let tight = p
                .facets()
                .iter()
                .filter(|f| f.eval(v.coords()) == f.offset)
                .count();
            assert!(tight >= 3);
        }
        assert!(p
            .facets()
            .iter()
            .all(|f| p.vertices().iter().all(|v| f.eval(v.coords()) <= f.offset)));
    }

    #[test]
    fn fixed_width_integers_agree() {
        let s = simplex_points(3, 3);
        let a: Polytope<i64> = convex_hull(&s);
        let b: Polytope<BigInt> = convex_hull(&s);
        assert_eq!(*a.volume().numer(), 9);
        assert_eq!(b.volume().numer(), &BigInt::from(9));
    }
}
