//! Offsets of supports and the candidate sets derived from them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{has_positive_mixed_volume_by_defect, LatticePoint, Support, SupportCollection};
use crate::error::{Error, Precondition, Result};
use crate::mixedvol::{convex_hull, Polytope};

/// `t*(α) = max { t >= 0 : α + t e_coord ∈ conv(A) }` for `α ∈ A`.
pub fn t_star(a: &Support, alpha: &LatticePoint, coord: usize) -> Result<BigRational> {
    check_coord(a.dim(), coord)?;
    if a.is_empty() {
        return Err(Error::EmptySupport);
    }
    let hull: Polytope<BigInt> = convex_hull(a);
    Ok(hull.ray_exit(alpha, coord))
}

fn check_coord(n: usize, coord: usize) -> Result<()> {
    if coord >= n {
        return Err(Error::BadCoordinate { coord, n });
    }
    Ok(())
}

/// Points of `a` with `t* <= k` along `e_coord`.
pub fn offset(a: &Support, k: &BigRational, coord: usize) -> Result<Support> {
    check_coord(a.dim(), coord)?;
    if k.is_negative() {
        return Err(Error::NegativeLevel);
    }
    if a.is_empty() {
        return Err(Error::EmptySupport);
    }
    let hull: Polytope<BigInt> = convex_hull(a);
    Ok(a.filter(|p| hull.ray_exit(p, coord) <= *k))
}

pub fn offset_collection(
    c: &SupportCollection,
    k: &BigRational,
    coord: usize,
) -> Result<SupportCollection> {
    let supports: Result<Vec<Support>> = c
        .iter()
        .map(|a| {
            if a.is_empty() {
                Ok(a.clone())
            } else {
                offset(a, k, coord)
            }
        })
        .collect();
    SupportCollection::new(c.dim(), supports?)
}

fn candidate(c: &SupportCollection, k: BigRational, coord: usize) -> Result<SupportCollection> {
    c.require_square()?;
    if !has_positive_mixed_volume_by_defect(c)? {
        return Err(Error::Precondition(Precondition::ZeroMixedVolume));
    }
    Ok(c.difference(&offset_collection(c, &k, coord)?))
}

/// `C \ offset(C, 1/2)` along the first coordinate.
pub fn tal_candidate(c: &SupportCollection) -> Result<SupportCollection> {
    tal_candidate_along(c, 0)
}

pub fn tal_candidate_along(c: &SupportCollection, coord: usize) -> Result<SupportCollection> {
    candidate(c, BigRational::new(1.into(), 2.into()), coord)
}

/// `C \ offset(C, 1)` along the first coordinate.
pub fn unnecessary_candidate(c: &SupportCollection) -> Result<SupportCollection> {
    unnecessary_candidate_along(c, 0)
}

pub fn unnecessary_candidate_along(
    c: &SupportCollection,
    coord: usize,
) -> Result<SupportCollection> {
    candidate(c, BigRational::from_integer(1.into()), coord)
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
