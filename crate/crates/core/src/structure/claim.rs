//! Exhaustive check of the collision claim inside one sign-pattern group.
//!
//! Write each element as `a_j = p_S^{j_S} q^{j'} x(j)` with `j` its free
//! coordinates in the canonical form, `j_S` the group key and `x(j)` the
//! part carried by the dependent coordinates. Whenever
//! `(a_{j_1}+1)⋯(a_{j_k}+1) = (a_{j_{k+1}}+1)⋯(a_{j_{2k}}+1)` the claim asserts
//! `Σ j'_i` and `Π x(j_i)` agree on both sides, hence so do the products of
//! the `a_{j_i}` themselves, hence the same tuple is a collision for
//! `A^{-1} + 1`.

use std::collections::BTreeMap;


use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{canonical_affine_form, sign_pattern_decompose, valuation_image};
use super::{AffineCanonicalForm, SignPatternDecomposition, ValuationImage};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{Encoding, Monomial};
use crate::rational::FactoredRational;
use crate::set::RationalSet;

const MAX_RECORDED_VIOLATIONS: usize = 16;

/// A positive set in canonical form with its sign-pattern groups.
#[derive(Debug, Clone)]
pub struct ClaimContext {
    set: RationalSet,
    image: ValuationImage,
    form: AffineCanonicalForm,
    /// Free coordinates j of each element.
    free: Vec<Vec<i64>>,
    /// Exponents of x(j) over the dependent coordinates, from the affine maps.
    dependent: Vec<Vec<BigRational>>,
    decomposition: SignPatternDecomposition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimViolation {
    /// Element indices (into the set) of the 2k-tuple.
    pub tuple: Vec<usize>,
    pub failed: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub group_index: usize,
    pub subset: Vec<usize>,
    pub key: Vec<i64>,
    pub members: Vec<usize>,
    pub k: u32,
    pub tuples_checked: u128,
    /// Solutions of the shifted equation, i.e. E_k(A_group + 1).
    pub collisions: u64,
    /// Collisions whose right half is a rearrangement of the left half.
    pub trivial_collisions: u64,
    /// E_k(A_group^{-1} + 1); the claim forces it to be at least `collisions`.
    pub inverse_shift_energy: u64,
    pub violation_count: u64,
    pub violations: Vec<ClaimViolation>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

impl ClaimContext {
    pub fn new(a: &RationalSet) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Precondition("claim check needs a nonempty set".into()));
        }
        if let Some(neg) = a.iter().find(|x| x.is_negative()) {
            return Err(Error::Precondition(format!("claim check needs positive elements, got {neg}")));
        }
        let image = valuation_image(a)?;
        let form = canonical_affine_form(&image)?;
        let free: Vec<Vec<i64>> = image.rows.iter().map(|r| form.project(r)).collect();
        let dependent = free
            .iter()
            .map(|j| {
                let js: Vec<BigRational> = j.iter().map(|&x| BigRational::from_integer(x.into())).collect();
                form.maps.iter().map(|m| m.eval(&js)).collect()
            })
            .collect();
        let decomposition = sign_pattern_decompose(&free)?;
        Ok(ClaimContext {
            set: a.clone(),
            image,
            form,
            free,
            dependent,
            decomposition,
        })
    }

    pub fn form(&self) -> &AffineCanonicalForm {
        &self.form
    }

    pub fn decomposition(&self) -> &SignPatternDecomposition {
        &self.decomposition
    }

    pub fn free_coordinates(&self) -> &[Vec<i64>] {
        &self.free
    }

    /// Exhaustively check the claim on every 2k-tuple drawn from group `index`.
    pub fn check_group(&self, index: usize, k: u32, budget: &Budget) -> Result<ClaimReport> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        let group = self
            .decomposition
            .groups
            .get(index)
            .ok_or_else(|| Error::Precondition(format!("no sign-pattern group {index}")))?;
        let members = &group.members;
        let n = members.len();
        budget.check_tuples("claim check", n, 2 * k)?;

        let one = BigRational::one();
        let shifted: Vec<FactoredRational> = members
            .iter()
            .map(|&i| self.set.elements()[i].add_shift(&one))
            .collect::<Result<_>>()?;
        let inv_shifted: Vec<FactoredRational> = members
            .iter()
            .map(|&i| self.set.elements()[i].inv().add_shift(&one))
            .collect::<Result<_>>()?;
        let enc_b = Encoding::covering(shifted.iter());
        let enc_c = Encoding::covering(inv_shifted.iter());
        let b: Vec<Monomial> = shifted.iter().map(|x| enc_b.encode(x).expect("covering")).collect();
        let c: Vec<Monomial> = inv_shifted.iter().map(|x| enc_c.encode(x).expect("covering")).collect();

        // j' = j − lift(j_S): zero on S, negative elsewhere.
        let lift: Vec<i64> = {
            let mut v = vec![0; self.form.d];
            for (&s, &x) in group.subset.iter().zip(&group.key) {
                v[s] = x;
            }
            v
        };
        let d = self.form.d;
        let l = self.image.dim();
        let n_dep = self.form.maps.len();

        struct Half {
            positions: Vec<usize>,
            b: Monomial,
            c: Monomial,
            j_prime: Vec<i64>,
            x: Vec<BigRational>,
            a: Vec<i64>,
        }

        let mut halves: Vec<Half> = Vec::new();
        let mut positions = vec![0usize; k as usize];
        loop {
            let mut h = Half {
                positions: positions.clone(),
                b: Monomial::one(enc_b.dim()),
                c: Monomial::one(enc_c.dim()),
                j_prime: vec![0; d],
                x: vec![BigRational::zero(); n_dep],
                a: vec![0; l],
            };
            for &p in &positions {
                let e = members[p];
                h.b = h.b.mul(&b[p]);
                h.c = h.c.mul(&c[p]);
                for t in 0..d {
                    h.j_prime[t] += self.free[e][t] - lift[t];
                }
                for t in 0..n_dep {
                    h.x[t] += &self.dependent[e][t];
                }
                for t in 0..l {
                    h.a[t] += self.image.rows[e][t];
                }
            }
            halves.push(h);
            // odometer
            let mut i = k as usize;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                positions[i] += 1;
                if positions[i] < n {
                    break;
                }
                positions[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || n == 0 {
                break;
            }
        }

        let mut by_b: BTreeMap<&Monomial, Vec<usize>> = BTreeMap::new();
        let mut by_c: BTreeMap<&Monomial, u64> = BTreeMap::new();
        for (idx, h) in halves.iter().enumerate() {
            by_b.entry(&h.b).or_default().push(idx);
            *by_c.entry(&h.c).or_default() += 1;
        }
        let inverse_shift_energy = by_c.values().map(|c| c * c).sum();

        let mut collisions = 0u64;
        let mut trivial = 0u64;
        let mut violation_count = 0u64;
        let mut violations = Vec::new();
        for list in by_b.values() {
            for &i in list {
                for &j in list {
                    collisions += 1;
                    let (left, right) = (&halves[i], &halves[j]);
                    let mut ls = left.positions.clone();
                    let mut rs = right.positions.clone();
                    ls.sort_unstable();
                    rs.sort_unstable();
                    if ls == rs {
                        trivial += 1;
                    }
                    let mut failed = Vec::new();
                    if left.j_prime != right.j_prime {
                        failed.push("j' sums differ");
                    }
                    if left.x != right.x {
                        failed.push("x products differ");
                    }
                    if left.a != right.a {
                        failed.push("a products differ");
                    }
                    if left.c != right.c {
                        failed.push("not a collision of A^-1 + 1");
                    }
                    if !failed.is_empty() {
                        violation_count += 1;
                        if violations.len() < MAX_RECORDED_VIOLATIONS {
                            let tuple = left
                                .positions
                                .iter()
                                .chain(&right.positions)
                                .map(|&p| members[p])
                                .collect();
                            violations.push(ClaimViolation { tuple, failed });
                        }
                    }
                }
            }
        }
        Ok(ClaimReport {
            group_index: index,
            subset: group.subset.clone(),
            key: group.key.clone(),
            members: members.clone(),
            k,
            tuples_checked: crate::budget::saturating_pow(n, 2 * k),
            collisions,
            trivial_collisions: trivial,
            inverse_shift_energy,
            violation_count,
            violations,
        })
    }

    /// Check every group whose 2k-tuple count fits the budget; larger groups are skipped.
    pub fn check_all(&self, k: u32, budget: &Budget) -> Result<Vec<ClaimReport>> {
        let mut out = Vec::new();
        for (i, g) in self.decomposition.groups.iter().enumerate() {
            if budget.check_tuples("claim check", g.members.len(), 2 * k).is_err() {
                continue;
            }
            out.push(self.check_group(i, k, budget)?);
        }
        Ok(out)
    }
}

/// Convenience wrapper: canonical form, decomposition and check of one group.
pub fn check_collision_claim(a: &RationalSet, k: u32, group: usize, budget: &Budget) -> Result<ClaimReport> {
    ClaimContext::new(a)?.check_group(group, k, budget)
}
