//! The valuation lattice of a set: exponent vectors, affine dimension, the
//! coordinate-projection canonical form, and sign-pattern groups.

pub mod claim;
pub mod linalg;
pub mod sign_pattern;

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::fraction_string;
use crate::set::RationalSet;

pub use claim::{check_collision_claim, ClaimContext, ClaimReport, ClaimViolation};
pub use linalg::{rank, rref, Echelon};
pub use sign_pattern::{sign_pattern_decompose, SignGroup, SignPatternDecomposition};

/// P(A): one exponent vector per element over the set's prime support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValuationImage {
    #[serde(serialize_with = "serialize_primes")]
    pub basis: Vec<BigUint>,
    pub signs: Vec<i8>,
    pub rows: Vec<Vec<i64>>,
}

fn serialize_primes<S: serde::Serializer>(primes: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(primes.iter().map(|p| p.to_string()))
}

pub fn valuation_image(a: &RationalSet) -> Result<ValuationImage> {
    if a.is_empty() {
        return Err(Error::Precondition("valuation image of the empty set".into()));
    }
    let basis = a.support().to_vec();
    let rows = a
        .iter()
        .map(|x| basis.iter().map(|p| x.valuation(p)).collect())
        .collect();
    let signs = a.iter().map(|x| x.sign()).collect();
    Ok(ValuationImage { basis, signs, rows })
}

impl ValuationImage {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Distinct rows as a set, for Minkowski-sum comparisons.
    pub fn row_set(&self) -> BTreeSet<Vec<i64>> {
        self.rows.iter().cloned().collect()
    }
}

fn ratio(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Affine rank over ℚ of a point set: the rank of the differences from the first point.
pub fn affine_rank(points: &[Vec<i64>], dim: usize) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let diffs: Vec<Vec<BigRational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| ratio(a - b)).collect())
        .collect();
    rank(diffs, dim)
}

/// Least dimension of an affine subspace containing P(A).
pub fn mult_dimension(a: &RationalSet) -> Result<usize> {
    let v = valuation_image(a)?;
    Ok(affine_rank(&v.rows, v.dim()))
}

/// Dependent coordinate `coordinate = c_0 + Σ c_i x_i` over the first d
/// permuted coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub coordinate: usize,
    pub coefficients: Vec<BigRational>,
}

impl AffineMap {
    pub fn eval(&self, free: &[BigRational]) -> BigRational {
        let mut acc = self.coefficients[0].clone();
        for (c, x) in self.coefficients[1..].iter().zip(free) {
            acc += c * x;
        }
        acc
    }
}

/// Coordinate permutation after which P(A) reads
/// `(x_1..x_d, f_1(x), …, f_{l−d}(x))` with affine `f_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineCanonicalForm {
    pub basis: Vec<BigUint>,
    /// `permutation[i]` is the original coordinate at permuted position i.
    pub permutation: Vec<usize>,
    pub d: usize,
    pub maps: Vec<AffineMap>,
}

impl AffineCanonicalForm {
    /// The first d permuted coordinates of a row.
    pub fn project(&self, row: &[i64]) -> Vec<i64> {
        self.permutation[..self.d].iter().map(|&c| row[c]).collect()
    }

    /// Rebuild a full row (original coordinate order) from its projection.
    pub fn reconstruct(&self, projection: &[i64]) -> Vec<BigRational> {
        let free: Vec<BigRational> = projection.iter().map(|&x| ratio(x)).collect();
        let mut out = vec![BigRational::zero(); self.permutation.len()];
        for (i, x) in free.iter().enumerate() {
            out[self.permutation[i]] = x.clone();
        }
        for m in &self.maps {
            out[m.coordinate] = m.eval(&free);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": "sumprod.affine-form/v1",
            "basis": self.basis.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "permutation": self.permutation,
            "d": self.d,
            "maps": self.maps.iter().map(|m| serde_json::json!({
                "coordinate": m.coordinate,
                "prime": self.basis[m.coordinate].to_string(),
                "coefficients": m.coefficients.iter().map(fraction_string).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Exact canonical form of the affine hull of the rows.
///
/// Pivot columns of the reduced difference matrix come first; every other
/// coordinate is expressed affinely in them. Reconstruction and projection
/// injectivity are verified before returning.
pub fn canonical_affine_form(v: &ValuationImage) -> Result<AffineCanonicalForm> {
    let l = v.dim();
    let Some(base) = v.rows.first() else {
        return Err(Error::Precondition("canonical form of an empty image".into()));
    };
    let diffs: Vec<Vec<BigRational>> = v.rows[1..]
        .iter()
        .map(|r| r.iter().zip(base).map(|(a, b)| ratio(a - b)).collect())
        .collect();
    let ech = rref(diffs, l);
    let d = ech.rank();
    let mut permutation = ech.pivots.clone();
    permutation.extend((0..l).filter(|c| !ech.pivots.contains(c)));

    // A point of the hull is base + Σ t_i row_i with t_i = x_{pivot_i} − base_{pivot_i}.
    let maps = permutation[d..]
        .iter()
        .map(|&col| {
            let mut coefficients = Vec::with_capacity(d + 1);
            let mut c0 = ratio(base[col]);
            for (i, &piv) in ech.pivots.iter().enumerate() {
                c0 -= &ech.rows[i][col] * ratio(base[piv]);
            }
            coefficients.push(c0);
            for row in &ech.rows {
                coefficients.push(row[col].clone());
            }
            AffineMap {
                coordinate: col,
                coefficients,
            }
        })
        .collect();
    let form = AffineCanonicalForm {
        basis: v.basis.clone(),
        permutation,
        d,
        maps,
    };
    verify_form(&form, v)?;
    Ok(form)
}

fn verify_form(form: &AffineCanonicalForm, v: &ValuationImage) -> Result<()> {
    let mut seen = std::collections::BTreeMap::new();
    for (i, row) in v.rows.iter().enumerate() {
        let proj = form.project(row);
        let back = form.reconstruct(&proj);
        if back.iter().zip(row).any(|(b, &r)| *b != ratio(r)) {
            return Err(Error::Internal(format!("row {i} does not reconstruct from its projection")));
        }
        if let Some(prev) = seen.insert(proj, row) {
            if prev != row {
                return Err(Error::Internal(format!("projection is not injective at row {i}")));
            }
        }
    }
    Ok(())
}

/// Classical explicit form of Freiman's lemma used as the size hypothesis
/// convention: `|A+A| ≥ (m+1)|A| − m(m+1)/2` for A of affine dimension m.
pub const FREIMAN_CONVENTION: &str = "|A+A| >= (m+1)|A| - m(m+1)/2";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreimanReport {
    pub set_size: usize,
    pub product_set_size: usize,
    pub k_integer: u64,
    pub dimension: usize,
    pub threshold: u64,
    /// `|A| ≥ threshold`; below it the dimension bound is only reported.
    pub applicable: bool,
    /// `dimension ≤ K` when applicable.
    pub dimension_bound_holds: Option<bool>,
    /// The explicit Freiman inequality for the measured dimension.
    pub freiman_inequality_holds: bool,
    pub convention: &'static str,
}

/// Default size hypothesis threshold `2K(K+1)`.
pub fn default_freiman_threshold(k_integer: u64) -> u64 {
    2 * k_integer * (k_integer + 1)
}

/// Check `mult_dimension(A) ≤ K` for sets large enough under `threshold(K)`.
pub fn freiman_check(a: &RationalSet, threshold: impl Fn(u64) -> u64) -> Result<FreimanReport> {
    let doubling = a.doubling()?;
    let dimension = mult_dimension(a)?;
    let k = doubling.k_integer;
    let threshold = threshold(k);
    let applicable = a.len() as u64 >= threshold;
    let m = dimension as u128;
    let n = a.len() as u128;
    let freiman_lower = ((m + 1) * n).saturating_sub(m * (m + 1) / 2);
    Ok(FreimanReport {
        set_size: a.len(),
        product_set_size: doubling.product_set_size,
        k_integer: k,
        dimension,
        threshold,
        applicable,
        dimension_bound_holds: applicable.then_some(dimension as u64 <= k),
        freiman_inequality_holds: doubling.product_set_size as u128 >= freiman_lower,
        convention: FREIMAN_CONVENTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FactoredRational;

    fn set(v: &[i64]) -> RationalSet {
        RationalSet::from_i64s(v).unwrap()
    }

    fn image(rows: &[&[i64]]) -> ValuationImage {
        ValuationImage {
            basis: (0..rows[0].len()).map(|i| BigUint::from([2u32, 3, 5, 7][i])).collect(),
            signs: vec![1; rows.len()],
            rows: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn valuation_image_examples() {
        let a = RationalSet::from_literals(&["12/5"]).unwrap();
        assert_eq!(valuation_image(&a).unwrap().rows, vec![vec![2, 1, -1]]);
        assert_eq!(valuation_image(&set(&[2, 4, 8])).unwrap().rows, vec![vec![1], vec![2], vec![3]]);
        let neg = set(&[-2, 3]);
        assert_eq!(valuation_image(&neg).unwrap().signs, vec![-1, 1]);
        assert!(valuation_image(&RationalSet::new(vec![])).is_err());
    }

    #[test]
    fn minkowski_identity() {
        let a = set(&[2, 3, 12]);
        let aa = a.product_set(&a);
        let va = valuation_image(&a).unwrap();
        let vaa = valuation_image(&aa).unwrap();
        assert_eq!(va.basis, vaa.basis);
        let sums: BTreeSet<Vec<i64>> = va
            .rows
            .iter()
            .flat_map(|u| va.rows.iter().map(move |v| u.iter().zip(v).map(|(x, y)| x + y).collect()))
            .collect();
        assert_eq!(vaa.row_set(), sums);
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(mult_dimension(&set(&[2, 4, 8])).unwrap(), 1);
        assert_eq!(mult_dimension(&set(&[1, 2, 3, 6])).unwrap(), 2);
        assert_eq!(mult_dimension(&set(&[2, 6, 18])).unwrap(), 1);
        assert_eq!(mult_dimension(&set(&[7])).unwrap(), 0);
    }

    #[test]
    fn canonical_form_examples() {
        let f = canonical_affine_form(&image(&[&[1, 2], &[2, 4], &[3, 6]])).unwrap();
        assert_eq!((f.d, f.permutation.clone()), (1, vec![0, 1]));
        assert_eq!(f.maps.len(), 1);
        assert_eq!(f.maps[0].coordinate, 1);
        assert_eq!(f.maps[0].coefficients, vec![ratio(0), ratio(2)]);

        let f = canonical_affine_form(&image(&[&[4, 1], &[4, 1]])).unwrap();
        assert_eq!(f.d, 0);
        assert_eq!(f.maps.iter().map(|m| m.coefficients.clone()).collect::<Vec<_>>(), vec![vec![ratio(4)], vec![ratio(1)]]);

        let f = canonical_affine_form(&image(&[&[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(f.d, 2);
        assert!(f.maps.is_empty());
    }

    #[test]
    fn canonical_form_permutes_columns() {
        // first coordinate constant, so the free coordinate is the second
        let f = canonical_affine_form(&image(&[&[3, 0, 1], &[3, 1, 3], &[3, 2, 5]])).unwrap();
        assert_eq!(f.d, 1);
        assert_eq!(f.permutation, vec![1, 0, 2]);
        let json = f.to_json();
        assert_eq!(json["d"], 1);
        assert_eq!(json["maps"][1]["coefficients"], serde_json::json!(["1", "2"]));
    }

    #[test]
    fn canonical_form_with_fractional_maps() {
        let rows: &[&[i64]] = &[&[0, 0, 1], &[2, 1, 0], &[4, 2, -1], &[0, 2, 5]];
        let v = image(rows);
        let f = canonical_affine_form(&v).unwrap();
        assert_eq!(f.d, 2);
        for r in &v.rows {
            let back = f.reconstruct(&f.project(r));
            assert_eq!(back, r.iter().map(|&x| ratio(x)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dimension_is_dilation_and_product_invariant() {
        let a = RationalSet::from_literals(&["2", "6", "9/5", "1/3", "10"]).unwrap();
        let lambda: FactoredRational = "2^3*5^-1".parse().unwrap();
        let d = mult_dimension(&a).unwrap();
        assert_eq!(mult_dimension(&a.dilate(&lambda)).unwrap(), d);
        assert_eq!(mult_dimension(&a.product_set(&a)).unwrap(), d);
    }

    #[test]
    fn freiman_examples() {
        // geometric progression: K = 2, dim 1
        let gp: Vec<i64> = (0..12).map(|i| 1i64 << i).collect();
        let r = freiman_check(&set(&gp), default_freiman_threshold).unwrap();
        assert_eq!((r.k_integer, r.dimension, r.threshold), (2, 1, 12));
        assert!(r.applicable);
        assert_eq!(r.dimension_bound_holds, Some(true));
        assert!(r.freiman_inequality_holds);
        // tiny independent set is below threshold
        let r = freiman_check(&set(&[2, 3, 5]), default_freiman_threshold).unwrap();
        assert!(!r.applicable);
        assert_eq!(r.dimension_bound_holds, None);
        assert!(r.freiman_inequality_holds);
    }
}
