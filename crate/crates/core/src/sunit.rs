//! The two-term S-unit equation c₁s₁ + c₂s₂ = 1 over
//! S = {p₁^{α₁}⋯p_r^{α_r} : |α_i| ≤ H}.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::rational::primes::is_prime;
use crate::rational::{BigFraction, FactoredRational};
use crate::set::RationalSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SUnitInstance {
    primes: Vec<u64>,
    height: u32,
    c1: FactoredRational,
    c2: FactoredRational,
}

impl SUnitInstance {
    pub fn new(primes: Vec<u64>, height: u32, c1: FactoredRational, c2: FactoredRational) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Precondition("at least one prime is required".into()));
        }
        for (i, &p) in primes.iter().enumerate() {
            if !is_prime(&BigUint::from(p)) {
                return Err(Error::Precondition(format!("{p} is not prime")));
            }
            if primes[..i].contains(&p) {
                return Err(Error::Precondition(format!("prime {p} is repeated")));
            }
        }
        if height == 0 {
            return Err(Error::Precondition("height H must be at least 1".into()));
        }
        Ok(SUnitInstance { primes, height, c1, c2 })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn c1(&self) -> &FactoredRational {
        &self.c1
    }

    pub fn c2(&self) -> &FactoredRational {
        &self.c2
    }

    /// |S| = (2H+1)^r.
    pub fn size(&self) -> u128 {
        crate::budget::saturating_pow(2 * self.height as usize + 1, self.primes.len() as u32)
    }

    /// Exponent vectors of S in lexicographic order.
    fn exponent_vectors(&self, budget: &Budget) -> Result<Vec<Vec<i64>>> {
        budget.check_tuples("S-unit set", 2 * self.height as usize + 1, self.primes.len() as u32)?;
        let h = i64::from(self.height);
        let mut out = vec![Vec::new()];
        for _ in &self.primes {
            out = out
                .into_iter()
                .flat_map(|v: Vec<i64>| {
                    (-h..=h).map(move |e| {
                        let mut v = v.clone();
                        v.push(e);
                        v
                    })
                })
                .collect();
        }
        Ok(out)
    }

    fn element(&self, exps: &[i64]) -> FactoredRational {
        FactoredRational::from_prime_powers(false, self.primes.iter().map(|&p| BigUint::from(p)).zip(exps.iter().copied()))
            .expect("primes were validated")
    }

    /// Exponents of x over the instance primes when x ∈ S.
    fn membership(&self, x: &BigFraction) -> Option<Vec<i64>> {
        if !x.is_positive() {
            return None;
        }
        let mut num = x.numer().magnitude().clone();
        let mut den = x.denom().magnitude().clone();
        let mut exps = Vec::with_capacity(self.primes.len());
        for &p in &self.primes {
            let p = BigUint::from(p);
            let mut e = 0i64;
            for (part, sign) in [(&mut num, 1), (&mut den, -1)] {
                loop {
                    let (q, r) = part.div_rem(&p);
                    if !r.is_zero() {
                        break;
                    }
                    *part = q;
                    e += sign;
                }
            }
            if e.unsigned_abs() > u64::from(self.height) {
                return None;
            }
            exps.push(e);
        }
        (num.is_one() && den.is_one()).then_some(exps)
    }
}

/// All (2H+1)^r elements of S.
pub fn generate_s(inst: &SUnitInstance, budget: &Budget) -> Result<RationalSet> {
    Ok(inst.exponent_vectors(budget)?.iter().map(|e| inst.element(e)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionPair {
    pub s1: FactoredRational,
    pub s2: FactoredRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub instance: SUnitInstance,
    pub count: usize,
    /// Ordered by the exponent vector of s₁.
    pub pairs: Vec<SolutionPair>,
}

impl SolutionSet {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("s1,s2\n");
        for p in &self.pairs {
            let _ = writeln!(s, "{},{}", p.s1, p.s2);
        }
        s
    }

    /// Re-check every pair with plain fraction arithmetic; returns the
    /// offending pairs.
    pub fn recheck(&self) -> Vec<SolutionPair> {
        let inst = &self.instance;
        let (c1, c2) = (inst.c1.to_fraction(), inst.c2.to_fraction());
        self.pairs
            .iter()
            .filter(|p| {
                let (s1, s2) = (p.s1.to_fraction(), p.s2.to_fraction());
                let ok = &c1 * &s1 + &c2 * &s2 == BigFraction::one()
                    && inst.membership(&s1).is_some()
                    && inst.membership(&s2).is_some();
                !ok
            })
            .cloned()
            .collect()
    }
}

/// Scan s₁ ∈ S, solve for s₂ exactly and keep s₂ ∈ S.
pub fn solve(inst: &SUnitInstance, budget: &Budget) -> Result<SolutionSet> {
    let vectors = inst.exponent_vectors(budget)?;
    let one = BigFraction::one();
    let (c1, c2) = (inst.c1.to_fraction(), inst.c2.to_fraction());
    let pairs: Vec<SolutionPair> = vectors
        .par_iter()
        .filter_map(|e| {
            let s1 = inst.element(e);
            let s2 = (&one - &c1 * s1.to_fraction()) / &c2;
            let exps = inst.membership(&s2)?;
            Some(SolutionPair {
                s1,
                s2: inst.element(&exps),
            })
        })
        .collect();
    Ok(SolutionSet {
        instance: inst.clone(),
        count: pairs.len(),
        pairs,
    })
}

/// Quadratic oracle: test every (s₁, s₂) ∈ S × S.
pub fn solve_all_pairs(inst: &SUnitInstance, budget: &Budget) -> Result<SolutionSet> {
    let vectors = inst.exponent_vectors(budget)?;
    budget.check_tuples("S-unit pair oracle", vectors.len(), 2)?;
    let values: Vec<BigFraction> = vectors.iter().map(|e| inst.element(e).to_fraction()).collect();
    let (c1, c2) = (inst.c1.to_fraction(), inst.c2.to_fraction());
    let one = BigFraction::one();
    // c₁s₁ + c₂s₂ = 1 as c₂s₂ = 1 − c₁s₁, so the inner loop only compares
    let left: Vec<BigFraction> = values.iter().map(|s| &one - &c1 * s).collect();
    let right: Vec<BigFraction> = values.iter().map(|s| &c2 * s).collect();
    let mut pairs = Vec::new();
    for (i, l) in left.iter().enumerate() {
        for (j, r) in right.iter().enumerate() {
            if l == r {
                pairs.push(SolutionPair {
                    s1: inst.element(&vectors[i]),
                    s2: inst.element(&vectors[j]),
                });
            }
        }
    }
    Ok(SolutionSet {
        instance: inst.clone(),
        count: pairs.len(),
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundDiagnostic {
    pub count: usize,
    pub r: usize,
    pub height: u32,
    /// ln(count) / (2^r · ln ln H): the least C with count ≤ (log H)^{C·2^r}.
    /// Zero when there are no solutions; absent out of regime.
    pub c_star: Option<f64>,
    pub in_regime: bool,
    pub note: String,
}

/// Invert the height bound for the smallest admissible constant. Never a
/// pass/fail verdict.
pub fn bound_diagnostic(sol: &SolutionSet) -> BoundDiagnostic {
    let r = sol.instance.primes.len();
    let h = sol.instance.height;
    let lnln = f64::from(h).ln().ln();
    let in_regime = lnln > 0.0;
    let (c_star, note) = if sol.count == 0 {
        (Some(0.0), "no solutions; C* = 0 by convention".to_string())
    } else if !in_regime {
        (None, format!("regime too small: H must exceed e (H = {h})"))
    } else {
        let c = (sol.count as f64).ln() / (2f64.powi(r as i32) * lnln);
        (Some(c), String::from("C* = ln(count) / (2^r ln ln H)"))
    };
    BoundDiagnostic {
        count: sol.count,
        r,
        height: h,
        c_star,
        in_regime,
        note,
    }
}

/// Integer helper used by callers that build coefficients from i64.
pub fn coefficient(n: i64) -> Result<FactoredRational> {
    FactoredRational::factor(&BigInt::from(n), &BigUint::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn inst(primes: &[u64], h: u32, c1: i64, c2: i64) -> SUnitInstance {
        SUnitInstance::new(primes.to_vec(), h, coefficient(c1).unwrap(), coefficient(c2).unwrap()).unwrap()
    }

    fn lits(sol: &SolutionSet) -> Vec<(String, String)> {
        sol.pairs
            .iter()
            .map(|p| {
                (
                    crate::rational::fraction_string(&p.s1.to_fraction()),
                    crate::rational::fraction_string(&p.s2.to_fraction()),
                )
            })
            .collect()
    }

    #[test]
    fn generate_examples() {
        let b = Budget::default();
        let s = generate_s(&inst(&[2], 1, 1, 1), &b).unwrap();
        assert_eq!(s.to_string(), "{1/2, 1, 2}");
        assert_eq!(generate_s(&inst(&[2, 3], 1, 1, 1), &b).unwrap().len(), 9);
        let g = generate_s(&inst(&[2, 3], 2, 1, 1), &b).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g.product_set(&g).len(), 81);
    }

    #[test]
    fn two_three_heights() {
        let b = Budget::default();
        let h2 = solve(&inst(&[2, 3], 2, 1, 1), &b).unwrap();
        let got: BTreeSet<_> = lits(&h2).into_iter().collect();
        let want: BTreeSet<(String, String)> =
            [("1/2", "1/2"), ("1/3", "2/3"), ("2/3", "1/3"), ("1/4", "3/4"), ("3/4", "1/4")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        assert_eq!(got, want);
        let h3 = solve(&inst(&[2, 3], 3, 1, 1), &b).unwrap();
        assert_eq!(h3.count, 7);
        let l3 = lits(&h3);
        assert!(l3.contains(&("1/9".into(), "8/9".into())) && l3.contains(&("8/9".into(), "1/9".into())));
        assert!(h3.recheck().is_empty());
    }

    #[test]
    fn asymmetric_coefficients() {
        let sol = solve(&inst(&[2], 1, 2, -1), &Budget::default()).unwrap();
        assert_eq!(lits(&sol), vec![("1".to_string(), "1".to_string())]);
    }

    #[test]
    fn csv_uses_factored_literals() {
        let sol = solve(&inst(&[2, 3], 2, 1, 1), &Budget::default()).unwrap();
        let csv = sol.to_csv();
        assert!(csv.starts_with("s1,s2\n"));
        assert!(csv.contains("2^-1,2^-1\n"));
    }

    #[test]
    fn validation() {
        let one = coefficient(1).unwrap();
        assert!(SUnitInstance::new(vec![2, 4], 1, one.clone(), one.clone()).is_err());
        assert!(SUnitInstance::new(vec![3, 3], 1, one.clone(), one.clone()).is_err());
        assert!(SUnitInstance::new(vec![2], 0, one.clone(), one).is_err());
        let big = inst(&[2, 3, 5, 7, 11, 13, 17], 10, 1, 1);
        assert!(solve(&big, &Budget::default()).unwrap_err().is_budget());
    }

    #[test]
    fn diagnostics() {
        let b = Budget::default();
        let d = bound_diagnostic(&solve(&inst(&[2, 3], 2, 1, 1), &b).unwrap());
        assert!(!d.in_regime && d.c_star.is_none() && d.note.contains("regime too small"));
        let none = bound_diagnostic(&solve(&inst(&[2], 1, 1, 3), &b).unwrap());
        assert_eq!((none.count, none.c_star), (0, Some(0.0)));
        let d = bound_diagnostic(&solve(&inst(&[2, 3], 16, 1, 1), &b).unwrap());
        let expect = (d.count as f64).ln() / (4.0 * 16f64.ln().ln());
        assert_eq!(d.c_star, Some(expect));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn matches_oracle_and_invariants(
            pi in prop::sample::subsequence(vec![2u64, 3, 5, 7], 1..=3),
            h in 1u32..=3,
            c1 in prop::sample::select(vec![1i64, 2, 3, -1, 6]),
            c2 in prop::sample::select(vec![1i64, 2, -3, 4, -1]),
        ) {
            let b = Budget::default();
            let i = inst(&pi, h, c1, c2);
            prop_assume!(i.size() <= 10_000);
            let fast = solve(&i, &b).unwrap();
            let slow = solve_all_pairs(&i, &b).unwrap();
            prop_assert_eq!(&fast.pairs, &slow.pairs);
            prop_assert!(fast.recheck().is_empty());
            let next = solve(&inst(&pi, h + 1, c1, c2), &b).unwrap();
            for p in &fast.pairs {
                prop_assert!(next.pairs.contains(p));
            }
            if c1 == c2 {
                let set: BTreeSet<_> = lits(&fast).into_iter().collect();
                for (a, bb) in &set {
                    prop_assert!(set.contains(&(bb.clone(), a.clone())));
                }
                let diag = set.iter().any(|(a, bb)| a == bb);
                prop_assert_eq!(fast.count % 2 == 1, diag);
            }
        }
    }
}
