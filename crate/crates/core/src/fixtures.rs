//! Named systems and support collections used by the experiments and tests.

use crate::polysys::SparseSystem;
use crate::supports::{rectangle_points, simplex_points, SupportCollection};

pub const HEXAGON_RECTANGLE_F: &str = include_str!("../fixtures/hexagon_rectangle_f.json");
pub const HEXAGON_RECTANGLE_G: &str = include_str!("../fixtures/hexagon_rectangle_g.json");

/// Integer system on a hexagon and a 3×4 rectangle with 17 torus solutions.
pub fn hexagon_rectangle_f() -> SparseSystem<f64> {
    SparseSystem::from_json(HEXAGON_RECTANGLE_F).expect("bundled fixture")
}

/// Second integer system on the same supports, paired with
/// [`hexagon_rectangle_f`] in the trace table.
pub fn hexagon_rectangle_g() -> SparseSystem<f64> {
    SparseSystem::from_json(HEXAGON_RECTANGLE_G).expect("bundled fixture")
}

pub fn hexagon_rectangle() -> SupportCollection {
    hexagon_rectangle_f().collection().clone()
}

fn bundled(text: &str) -> SupportCollection {
    SupportCollection::from_json(text).expect("bundled fixture")
}

/// Lacunary pair with `L = ℤ × 2ℤ`, so `e_1 ∈ L`.
pub fn lacunary_diagonal() -> SupportCollection {
    bundled(include_str!("../fixtures/lacunary_diagonal.json"))
}

/// Repeated support whose lattice has index 2 and misses `e_1`.
pub fn lacunary_sheared() -> SupportCollection {
    bundled(include_str!("../fixtures/lacunary_sheared.json"))
}

/// Triangular pair whose first member only involves `x`; witness `[0]`, factor 2.
pub fn triangular_plane() -> SupportCollection {
    bundled(include_str!("../fixtures/triangular_plane.json"))
}

/// Three-dimensional triangular collection with witness `[1, 2]`, factor 3.
pub fn triangular_box() -> SupportCollection {
    bundled(include_str!("../fixtures/triangular_box.json"))
}

/// `(kΔ_n, …, kΔ_n)`.
pub fn dilated_simplices(n: usize, k: i64) -> SupportCollection {
    SupportCollection::repeated(&simplex_points(n, k), n)
}

/// `kΔ_2 ∖ jΔ_2` in both members, for `j < k`.
pub fn truncated_simplices(k: i64, j: i64) -> SupportCollection {
    let a = simplex_points(2, k).difference(&simplex_points(2, j));
    SupportCollection::repeated(&a, 2)
}

pub fn rectangles(k1: i64, l1: i64, k2: i64, l2: i64) -> SupportCollection {
    SupportCollection::new(2, vec![rectangle_points(k1, l1), rectangle_points(k2, l2)])
        .expect("valid supports")
}

/// Nonlacunary, nontriangular families with mixed volume between 3 and 20.
pub fn corpus() -> Vec<(&'static str, SupportCollection)> {
    let quad = simplex_points(2, 2);
    vec![
        ("two conics", dilated_simplices(2, 2)),
        (
            "conic and cubic",
            SupportCollection::new(2, vec![quad, simplex_points(2, 3)]).expect("valid supports"),
        ),
        ("two rectangles", rectangles(2, 1, 2, 2)),
        ("hexagon and rectangle", hexagon_rectangle()),
        ("three quadrics", dilated_simplices(3, 2)),
    ]
}
