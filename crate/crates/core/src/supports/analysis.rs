//! Defects, lacunary and triangular classification, reductions, and
//! omega-supports.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{
    collection_lattice, difference_lattice, extend_to_unimodular, smith_form, support_generators,
    LatticePoint, MonomialMap, Support, SupportCollection,
};
use crate::error::{Error, Result};

/// Largest dimension for the exhaustive triangularity search.
pub const MAX_TRIANGULAR_DIM: usize = 8;

/// Rank of `L[C]`.
pub fn support_rank(c: &SupportCollection) -> usize {
    collection_lattice::<BigInt>(c).rank
}

/// `rank(C_I) - |I|` for a 0-based index set.
pub fn defect(c: &SupportCollection, indices: &[usize]) -> Result<i64> {
    let sub = c.subcollection(indices)?;
    Ok(support_rank(&sub) as i64 - indices.len() as i64)
}

fn nonempty_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1usize..(1 << n)).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// Every nonempty subcollection has nonnegative defect.
pub fn has_positive_mixed_volume_by_defect(c: &SupportCollection) -> Result<bool> {
    c.require_square()?;
    if c.dim() > 20 {
        return Err(Error::Capacity {
            what: "defect enumeration",
            limit: 20,
            got: c.dim(),
        });
    }
    for subset in nonempty_subsets(c.len()) {
        if defect(c, &subset)? < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Index of `L[C]` greater than one; a rank-deficient lattice counts.
pub fn is_lacunary(c: &SupportCollection) -> bool {
    collection_lattice::<BigInt>(c).is_proper()
}

/// Lexicographically least proper subset `I` with `rank(C_I) = |I|`.
pub fn is_triangular(c: &SupportCollection) -> Result<Option<Vec<usize>>> {
    c.require_square()?;
    let n = c.dim();
    if n > MAX_TRIANGULAR_DIM {
        return Err(Error::Capacity {
            what: "triangularity search dimension",
            limit: MAX_TRIANGULAR_DIM,
            got: n,
        });
    }
    let mut subsets: Vec<Vec<usize>> = nonempty_subsets(n).filter(|s| s.len() < n).collect();
    subsets.sort();
    for s in subsets {
        if support_rank(&c.subcollection(&s)?) == s.len() {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Strict triangularity: `1 < MV(C_I) < MV(C)` for the witness `I`.
/// Reported for information only; the trace tests gate on abundance.
pub fn is_strictly_triangular(c: &SupportCollection, witness: &[usize]) -> Result<bool> {
    let sub = crate::mixedvol::relative_mixed_volume(c, witness)?;
    let full = crate::mixedvol::mixed_volume(c)?;
    Ok(sub > BigInt::from(1) && sub < full)
}

/// Every member has a full-rank difference lattice.
pub fn is_abundant(c: &SupportCollection) -> bool {
    c.iter()
        .all(|a| !a.is_empty() && difference_lattice::<BigInt>(a).rank == c.dim())
}

/// `C = Φ(reduced) + translations`, with `reduced` nonlacunary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacunaryReduction {
    pub map: MonomialMap,
    pub reduced: SupportCollection,
    /// Lexicographically least point of each member, subtracted before
    /// pulling back.
    pub translations: Vec<LatticePoint>,
}

impl LacunaryReduction {
    /// `Φ(e_1) = k e_1` with this `k` (always the case for our basis).
    pub fn first_column_scale(&self) -> i64 {
        self.map.column(0)[0]
    }
}

pub(crate) fn lexmin_translations(c: &SupportCollection) -> Vec<LatticePoint> {
    c.iter()
        .map(|a| {
            a.points()
                .first()
                .cloned()
                .unwrap_or_else(|| LatticePoint::zero(c.dim()))
        })
        .collect()
}

pub(crate) fn translate_to_origin(
    c: &SupportCollection,
    shifts: &[LatticePoint],
) -> SupportCollection {
    SupportCollection::from_supports_unchecked(
        c.dim(),
        c.iter()
            .zip(shifts)
            .map(|(a, t)| {
                Support::from_points_unchecked(
                    a.dim(),
                    a.points().iter().map(|p| p.sub(t)).collect(),
                )
            })
            .collect(),
    )
}

/// Pulls a lacunary collection back along the echelon basis of its lattice.
/// The basis puts `Φ(e_1) = k e_1` with `k` minimal, so `k = 1` exactly when
/// `e_1 ∈ L[C]`.
pub fn lacunary_reduction(c: &SupportCollection) -> Result<LacunaryReduction> {
    let lat = collection_lattice::<BigInt>(c);
    if !lat.is_full_rank() {
        return Err(Error::RankDeficient {
            rank: lat.rank,
            needed: c.dim(),
        });
    }
    if !lat.is_proper() {
        return Err(Error::NotLacunary);
    }
    let cols: Option<Vec<Vec<i64>>> = lat
        .basis
        .iter()
        .map(|v| v.iter().map(ToPrimitive::to_i64).collect())
        .collect();
    let map = MonomialMap::from_columns(&cols.ok_or(Error::Capacity {
        what: "64-bit lattice basis",
        limit: 64,
        got: 65,
    })?)?;
    let translations = lexmin_translations(c);
    let reduced = map.preimage_collection(&translate_to_origin(c, &translations))?;
    Ok(LacunaryReduction {
        map,
        reduced,
        translations,
    })
}

/// Unimodular `Ψ` with `Ψ(e_1) = e_1` whose first `|I|` columns span the
/// saturation of `L[C_I]`. Requires `rank(C_I) = |I|` and `e_1 ∈ L[C_I]`.
pub fn first_coordinate_fixing_basis(
    c: &SupportCollection,
    indices: &[usize],
) -> Result<MonomialMap> {
    let n = c.dim();
    let sub = c.subcollection(indices)?;
    let r = indices.len();
    let gens: Vec<Vec<BigInt>> = sub.iter().flat_map(support_generators::<BigInt>).collect();
    let smith = smith_form(gens, n);
    if smith.rank() != r {
        return Err(Error::NotTriangularWitness(indices.to_vec()));
    }
    if !collection_lattice::<BigInt>(&sub).contains(LatticePoint::unit(n, 0).coords()) {
        return Err(Error::FirstUnitNotInLattice);
    }
    let sat = smith.saturation_rows();
    let mut e1 = vec![BigInt::zero(); n];
    e1[0] = BigInt::from(1);
    let coeffs = smith.coordinates(&e1)[..r].to_vec();
    let w = extend_to_unimodular(&[coeffs], r)?;
    let sat_e1: Vec<Vec<BigInt>> = w
        .iter()
        .map(|row| {
            (0..n)
                .map(|j| (0..r).map(|k| &row[k] * &sat[k][j]).sum())
                .collect()
        })
        .collect();
    debug_assert_eq!(sat_e1[0], e1);
    let full = extend_to_unimodular(&sat_e1, n)?;
    let cols: Option<Vec<Vec<i64>>> = full
        .iter()
        .map(|v| v.iter().map(ToPrimitive::to_i64).collect())
        .collect();
    MonomialMap::from_columns(&cols.ok_or(Error::Capacity {
        what: "64-bit lattice basis",
        limit: 64,
        got: 65,
    })?)
}

/// Tuple of roots of unity `ω_i = exp(2πi r_i / k_i)`, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omega {
    orders: Vec<u64>,
    residues: Vec<i64>,
}

impl Omega {
    pub fn new(orders: Vec<u64>, residues: Vec<i64>) -> Result<Self> {
        if orders.len() != residues.len() {
            return Err(Error::DimensionMismatch {
                expected: orders.len(),
                found: residues.len(),
            });
        }
        if orders.contains(&0) {
            return Err(Error::ZeroOrder);
        }
        Ok(Omega { orders, residues })
    }

    /// Entries from {1, -1}.
    pub fn from_signs(signs: &[i64]) -> Result<Self> {
        let mut orders = Vec::new();
        let mut residues = Vec::new();
        for &s in signs {
            match s {
                1 => {
                    orders.push(1);
                    residues.push(0);
                }
                -1 => {
                    orders.push(2);
                    residues.push(1);
                }
                _ => return Err(Error::Parse(format!("sign must be 1 or -1, got {s}"))),
            }
        }
        Omega::new(orders, residues)
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    /// `ω^α = 1`, i.e. `Σ r_i α_i / k_i ∈ Z`.
    pub fn fixes(&self, alpha: &LatticePoint) -> bool {
        let l = self
            .orders
            .iter()
            .fold(1i128, |acc, &k| acc.lcm(&(k as i128)));
        let s: i128 = self
            .orders
            .iter()
            .zip(&self.residues)
            .zip(alpha.coords())
            .map(|((&k, &r), &a)| r as i128 * a as i128 * (l / k as i128))
            .sum();
        s.rem_euclid(l) == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaSupport {
    pub collection: SupportCollection,
    /// Number of nonempty members.
    pub delta: usize,
}

impl OmegaSupport {
    /// Number of nonempty members among `indices`.
    pub fn delta_on(&self, indices: &[usize]) -> usize {
        indices
            .iter()
            .filter(|&&i| !self.collection.get(i).is_empty())
            .count()
    }
}

/// Removes the points fixed by `ω` from every member.
pub fn omega_support(c: &SupportCollection, omega: &Omega) -> Result<OmegaSupport> {
    if omega.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: omega.dim(),
        });
    }
    let collection = c.map_supports(|a| a.filter(|p| !omega.fixes(p)));
    let delta = collection.iter().filter(|a| !a.is_empty()).count();
    Ok(OmegaSupport { collection, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coll(lists: &[&[[i64; 2]]]) -> SupportCollection {
        SupportCollection::from_lists(
            2,
            &lists
                .iter()
                .map(|l| l.iter().map(|p| p.to_vec()).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn lacunary_y() -> SupportCollection {
        coll(&[&[[0, 0], [1, 0], [1, 2]], &[[0, 0], [1, 0], [0, 2], [1, 2]]])
    }

    fn triangular_segment() -> SupportCollection {
        coll(&[
            &[[0, 0], [1, 0], [2, 0]],
            &[[0, 0], [1, 0], [0, 1], [2, 1], [1, 1], [0, 2]],
        ])
    }

    #[test]
    fn defects() {
        let d2 = coll(&[&[[0, 0], [1, 0], [0, 1]], &[[0, 0], [1, 0], [0, 1]]]);
        assert_eq!(defect(&d2, &[0, 1]).unwrap(), 0);
        let c = coll(&[&[[0, 1], [1, 1]], &[[1, 1]]]);
        assert_eq!(defect(&c, &[1]).unwrap(), -1);
        assert_eq!(defect(&triangular_segment(), &[0]).unwrap(), 0);
        assert_eq!(defect(&c, &[]), Err(Error::EmptyIndexSet));
    }

    #[test]
    fn defect_criterion() {
        let d2 = coll(&[&[[0, 0], [1, 0], [0, 1]], &[[0, 0], [1, 0], [0, 1]]]);
        assert!(has_positive_mixed_volume_by_defect(&d2).unwrap());
        let seg = coll(&[&[[0, 0], [1, 0], [2, 0]], &[[0, 0], [1, 0], [2, 0]]]);
        assert!(!has_positive_mixed_volume_by_defect(&seg).unwrap());
        assert!(has_positive_mixed_volume_by_defect(&triangular_segment()).unwrap());
    }

    #[test]
    fn lacunary_flags() {
        assert!(is_lacunary(&lacunary_y()));
        let d2 = coll(&[&[[0, 0], [1, 0], [0, 1]], &[[0, 0], [1, 0], [0, 1]]]);
        assert!(!is_lacunary(&d2));
        let a: &[[i64; 2]] = &[[0, 0], [2, 0], [4, 0], [3, 1], [0, 2], [2, 2]];
        assert!(is_lacunary(&coll(&[a, a])));
    }

    #[test]
    fn triangular_witnesses() {
        assert_eq!(is_triangular(&triangular_segment()).unwrap(), Some(vec![0]));
        let d2 = coll(&[&[[0, 0], [1, 0], [0, 1]], &[[0, 0], [1, 0], [0, 1]]]);
        assert_eq!(is_triangular(&d2).unwrap(), None);
        let b = coll(&[&[[0, 0], [1, 0], [0, 2]], &[[0, 0], [2, 0], [0, 2]]]);
        assert_eq!(is_triangular(&b).unwrap(), None);
        assert!(is_abundant(&b));
        assert!(!is_abundant(&triangular_segment()));
    }

    #[test]
    fn reduction_of_even_y_collection() {
        let red = lacunary_reduction(&lacunary_y()).unwrap();
        assert_eq!(red.map.matrix(), &[vec![1, 0], vec![0, 2]]);
        let expect = coll(&[&[[0, 0], [1, 0], [1, 1]], &[[0, 0], [1, 0], [0, 1], [1, 1]]]);
        assert_eq!(red.reduced, expect);
        assert!(!is_lacunary(&red.reduced));
        assert_eq!(
            red.map.apply_collection(&red.reduced),
            translate_to_origin(&lacunary_y(), &red.translations)
        );
    }

    #[test]
    fn reduction_of_even_sum_collection() {
        let a: &[[i64; 2]] = &[[0, 0], [2, 0], [4, 0], [3, 1], [0, 2], [2, 2]];
        let red = lacunary_reduction(&coll(&[a, a])).unwrap();
        assert_eq!(red.map.determinant().abs(), 2);
        assert_eq!(red.first_column_scale(), 2);
        assert!(!is_lacunary(&red.reduced));
    }

    #[test]
    fn reduction_rejects_nonlacunary() {
        let d2 = coll(&[&[[0, 0], [1, 0], [0, 1]], &[[0, 0], [1, 0], [0, 1]]]);
        assert_eq!(lacunary_reduction(&d2), Err(Error::NotLacunary));
    }

    #[test]
    fn omega_supports() {
        let c = coll(&[&[[0, 1], [1, 1], [2, 0]], &[[1, 1]]]);
        let w = omega_support(&c, &Omega::from_signs(&[-1, -1]).unwrap()).unwrap();
        assert_eq!(w.collection, coll(&[&[[0, 1]], &[]]));
        assert_eq!(w.delta, 1);
        assert_eq!(w.delta_on(&[1]), 0);
        let w = omega_support(&c, &Omega::from_signs(&[1, -1]).unwrap()).unwrap();
        assert_eq!(w.collection, coll(&[&[[0, 1], [1, 1]], &[[1, 1]]]));
        let w = omega_support(&c, &Omega::from_signs(&[1, 1]).unwrap()).unwrap();
        assert_eq!(w.delta, 0);
        assert_eq!(Omega::new(vec![0, 1], vec![0, 0]), Err(Error::ZeroOrder));
    }

    #[test]
    fn fixing_basis_for_segment_witness() {
        let psi = first_coordinate_fixing_basis(&triangular_segment(), &[0]).unwrap();
        assert_eq!(psi.column(0), vec![1, 0]);
        assert!(psi.is_unimodular());
    }
}
