//! Exact normalized mixed volumes.

mod hull;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Zero;

pub use hull::*;

use crate::error::{Error, Result};
use crate::scalar::ExactInt;
use crate::supports::{smith_form, support_rank, LatticePoint, Support, SupportCollection};

/// Largest ambient dimension accepted by `mixed_volume`.
pub const MAX_MIXED_VOLUME_DIM: usize = 4;

/// Normalized mixed volume, so that `MV(Δ_n, ..., Δ_n) = 1`.
pub fn mixed_volume(c: &SupportCollection) -> Result<BigInt> {
    mixed_volume_with::<BigInt>(c)
}

/// Inclusion-exclusion over the volumes of all partial Minkowski sums.
pub fn mixed_volume_with<T: ExactInt>(c: &SupportCollection) -> Result<T> {
    c.require_square()?;
    let n = c.dim();
    if n > MAX_MIXED_VOLUME_DIM {
        return Err(Error::Capacity {
            what: "mixed volume dimension",
            limit: MAX_MIXED_VOLUME_DIM,
            got: n,
        });
    }
    if c.has_empty_member() {
        return Ok(T::zero());
    }
    let hulls: Vec<Polytope<T>> = c.iter().map(convex_hull).collect();
    let mut sums: HashMap<usize, Polytope<T>> = HashMap::new();
    let mut total: Ratio<T> = Ratio::zero();
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << low);
        let p = if rest == 0 {
            hulls[low].clone()
        } else {
            minkowski_sum(&sums[&rest], &hulls[low])
        };
        let size = mask.count_ones() as usize;
        if (n - size).is_multiple_of(2) {
            total = total + p.volume().clone();
        } else {
            total = total - p.volume().clone();
        }
        sums.insert(mask, p);
    }
    assert!(total.is_integer(), "mixed volume must be integral");
    Ok(total.to_integer())
}

/// Mixed volume of the subcollection `C_I` inside the saturation of its own
/// lattice, for a triangular witness `I` (rank of `C_I` equals `|I|`).
pub fn relative_mixed_volume(c: &SupportCollection, indices: &[usize]) -> Result<BigInt> {
    let sub = c.subcollection(indices)?;
    let r = indices.len();
    let rank = support_rank(&sub);
    if rank != r {
        return Err(Error::NotTriangularWitness(indices.to_vec()));
    }
    let reduced = saturated_coordinates(&sub)?;
    mixed_volume(&reduced)
}

/// Re-expresses each (translated) member of `sub` in coordinates of a basis
/// of the saturation of `L[sub]`, producing a collection in `Z^rank`.
pub(crate) fn saturated_coordinates(sub: &SupportCollection) -> Result<SupportCollection> {
    let n = sub.dim();
    let gens: Vec<Vec<BigInt>> = sub
        .iter()
        .flat_map(crate::supports::support_generators::<BigInt>)
        .collect();
    let smith = smith_form(gens, n);
    let r = smith.rank();
    let mut supports = Vec::with_capacity(sub.len());
    for a in sub {
        let Some(base) = a.points().first() else {
            supports.push(Support::empty(r));
            continue;
        };
        let mut pts = Vec::with_capacity(a.len());
        for p in a.points() {
            let d: Vec<BigInt> = p
                .sub(base)
                .coords()
                .iter()
                .map(|&x| BigInt::from(x))
                .collect();
            let coords = smith.coordinates(&d);
            debug_assert!(coords[r..].iter().all(Zero::is_zero));
            let small: Option<Vec<i64>> = coords[..r]
                .iter()
                .map(num_traits::ToPrimitive::to_i64)
                .collect();
            pts.push(LatticePoint::new(small.ok_or(Error::Capacity {
                what: "64-bit coordinates",
                limit: 64,
                got: 65,
            })?));
        }
        supports.push(Support::new(r, pts)?);
    }
    SupportCollection::new(r, supports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supports::{rectangle_points, simplex_points};

    fn mv(c: &SupportCollection) -> i64 {
        num_traits::ToPrimitive::to_i64(&mixed_volume(c).unwrap()).unwrap()
    }

    #[test]
    fn unit_simplices_give_one() {
        for n in 1..=4 {
            assert_eq!(
                mv(&SupportCollection::repeated(&simplex_points(n, 1), n)),
                1
            );
        }
    }

    #[test]
    fn bezout_counts() {
        assert_eq!(
            mv(&SupportCollection::repeated(&simplex_points(2, 5), 2)),
            25
        );
        let c = SupportCollection::new(
            3,
            vec![
                simplex_points(3, 2),
                simplex_points(3, 3),
                simplex_points(3, 1),
            ],
        )
        .unwrap();
        assert_eq!(mv(&c), 6);
    }

    #[test]
    fn rectangle_formula_small() {
        let c = SupportCollection::new(2, vec![rectangle_points(2, 1), rectangle_points(1, 3)])
            .unwrap();
        assert_eq!(mv(&c), 2 * 3 + 1);
    }

    #[test]
    fn rejects_nonsquare_and_large() {
        let c = SupportCollection::new(2, vec![simplex_points(2, 1)]).unwrap();
        assert!(matches!(mixed_volume(&c), Err(Error::NotSquare { .. })));
        let c = SupportCollection::repeated(&simplex_points(5, 1), 5);
        assert!(matches!(mixed_volume(&c), Err(Error::Capacity { .. })));
    }

    #[test]
    fn collinear_pair_has_zero_mixed_volume() {
        let a = Support::from_rows(2, &[[0, 0], [1, 0], [2, 0]]).unwrap();
        assert_eq!(mv(&SupportCollection::repeated(&a, 2)), 0);
    }

    #[test]
    fn relative_mixed_volume_of_segment_witness() {
        let c = SupportCollection::from_lists(
            2,
            &[
                vec![vec![0, 0], vec![1, 0], vec![2, 0]],
                vec![
                    vec![0, 0],
                    vec![1, 0],
                    vec![0, 1],
                    vec![2, 1],
                    vec![1, 1],
                    vec![0, 2],
                ],
            ],
        )
        .unwrap();
        assert_eq!(relative_mixed_volume(&c, &[0]).unwrap(), BigInt::from(2));
        assert_eq!(
            relative_mixed_volume(&c, &[0, 1]).unwrap(),
            mixed_volume(&c).unwrap()
        );
        assert!(relative_mixed_volume(&c, &[1]).is_err());
    }
}
