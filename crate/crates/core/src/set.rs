//! Finite sets of nonzero rationals and their sum and product sets.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::convolve::{convolve, power};
use crate::error::{Error, Result};
use crate::lattice::{Encoding, Monomial};
use crate::rational::{fraction_string, BigFraction, FactoredRational};

/// Distinct nonzero rationals, kept in ascending numeric order, together
/// with the ascending list of primes dividing any element.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalSet {
    elements: Vec<FactoredRational>,
    support: Vec<BigUint>,
}

impl RationalSet {
    /// Deduplicates by canonical factored form.
    pub fn new<I: IntoIterator<Item = FactoredRational>>(items: I) -> Self {
        let mut keyed: Vec<(BigFraction, FactoredRational)> =
            items.into_iter().map(|x| (x.to_fraction(), x)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        let elements: Vec<FactoredRational> = keyed.into_iter().map(|(_, x)| x).collect();
        let mut support: Vec<BigUint> = elements.iter().flat_map(|x| x.support().cloned()).collect();
        support.sort();
        support.dedup();
        RationalSet { elements, support }
    }

    pub fn from_i64s(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| FactoredRational::from_i64(v))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn from_literals<S: AsRef<str>>(literals: &[S]) -> Result<Self> {
        literals
            .iter()
            .map(|s| s.as_ref().parse::<FactoredRational>())
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Parse the set file format: one literal per line, `#` starts a comment.
    pub fn parse_set_file(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let x = body
                .parse::<FactoredRational>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            items.push(x);
        }
        Ok(Self::new(items))
    }

    pub fn to_set_file(&self) -> String {
        let mut out = String::new();
        for x in &self.elements {
            out.push_str(&x.to_string());
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[FactoredRational] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FactoredRational> {
        self.elements.iter()
    }

    pub fn support(&self) -> &[BigUint] {
        &self.support
    }

    pub fn contains(&self, x: &FactoredRational) -> bool {
        self.elements.iter().any(|y| y == x)
    }

    pub fn all_positive(&self) -> bool {
        self.elements.iter().all(FactoredRational::is_positive)
    }

    pub fn all_positive_integers(&self) -> bool {
        self.elements.iter().all(|x| x.is_positive() && x.is_integer())
    }

    /// The sub-collection at the given positions.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self::new(indices.iter().map(|&i| self.elements[i].clone()))
    }

    pub(crate) fn encoding(&self) -> Encoding {
        Encoding::with_basis(self.support.clone())
    }

    pub(crate) fn encoded(&self) -> (Encoding, Vec<Monomial>) {
        let enc = self.encoding();
        let monos = self
            .elements
            .iter()
            .map(|x| enc.encode(x).expect("support covers every element"))
            .collect();
        (enc, monos)
    }

    /// `AB = {ab}`.
    pub fn product_set(&self, other: &Self) -> Self {
        let enc = Encoding::covering(self.elements.iter().chain(other.elements.iter()));
        let table = |s: &Self| -> BTreeMap<Monomial, ()> {
            s.elements
                .iter()
                .map(|x| (enc.encode(x).expect("covering basis"), ()))
                .collect()
        };
        let out = convolve(&table(self), &table(other), Monomial::mul);
        Self::new(out.keys().map(|m| enc.decode(m)))
    }

    /// `A^(k)`, built as `A^(⌈k/2⌉) · A^(⌊k/2⌋)` over deduplicated levels.
    pub fn k_fold_product(&self, k: u32, budget: &Budget) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        budget.check_tuples("k-fold product", self.len(), k)?;
        let (enc, monos) = self.encoded();
        let base: BTreeMap<Monomial, ()> = monos.into_iter().map(|m| (m, ())).collect();
        let out = power(&base, k, &Monomial::mul);
        Ok(Self::new(out.keys().map(|m| enc.decode(m))))
    }

    /// `A + B` with the number of ordered pairs summing to zero reported separately.
    pub fn sumset(&self, other: &Self) -> SumsetResult {
        let table = convolve(&self.value_counts(), &other.value_counts(), |a, b| a + b);
        SumsetResult::from_table(table)
    }

    /// `kA` with the zero-sum tuple count reported separately.
    pub fn k_fold_sumset(&self, k: u32, budget: &Budget) -> Result<SumsetResult> {
        Ok(SumsetResult::from_table(self.sum_counts(k, budget)?))
    }

    /// Ordered k-tuple counts per exact sum value (zero included).
    pub(crate) fn sum_counts(&self, k: u32, budget: &Budget) -> Result<BTreeMap<BigFraction, BigUint>> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        budget.check_tuples("k-fold sum table", self.len(), k)?;
        Ok(power(&self.value_counts(), k, &|a: &BigFraction, b: &BigFraction| a + b))
    }

    fn value_counts(&self) -> BTreeMap<BigFraction, BigUint> {
        self.elements
            .iter()
            .map(|x| (x.to_fraction(), BigUint::one()))
            .collect()
    }

    /// `A + λ`; fails naming the element that would map to zero.
    pub fn shift(&self, lambda: &BigFraction) -> Result<Self> {
        let shifted = self
            .elements
            .iter()
            .map(|a| {
                a.add_shift(lambda).map_err(|_| {
                    Error::Domain(format!("shift by {} sends {a} to zero", fraction_string(lambda)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(shifted))
    }

    /// `λA`.
    pub fn dilate(&self, lambda: &FactoredRational) -> Self {
        Self::new(self.elements.iter().map(|a| a.mul(lambda)))
    }

    /// `A^{-1} = {1/a}`.
    pub fn inverse(&self) -> Self {
        Self::new(self.elements.iter().map(FactoredRational::inv))
    }

    pub fn doubling(&self) -> Result<DoublingReport> {
        if self.is_empty() {
            return Err(Error::Precondition("doubling of the empty set".into()));
        }
        let product_set_size = self.product_set(self).len();
        let set_size = self.len();
        let k_exact = BigRational::new(BigInt::from(product_set_size), BigInt::from(set_size));
        let k_integer = product_set_size.div_ceil(set_size) as u64;
        Ok(DoublingReport {
            set_size,
            product_set_size,
            k_exact: fraction_string(&k_exact),
            k_integer: k_integer.max(1),
        })
    }
}

impl fmt::Display for RationalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let q = x.to_fraction();
            f.write_str(&fraction_string(&q))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for RationalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalSet{self}")
    }
}

impl FromIterator<FactoredRational> for RationalSet {
    fn from_iter<T: IntoIterator<Item = FactoredRational>>(iter: T) -> Self {
        Self::new(iter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumsetResult {
    pub set: RationalSet,
    /// Ordered tuples whose sum is zero; zero itself is never stored in a set.
    pub zero_count: BigUint,
}

impl SumsetResult {
    fn from_table(table: BTreeMap<BigFraction, BigUint>) -> Self {
        let mut zero_count = BigUint::zero();
        let mut values = Vec::new();
        for (v, c) in table {
            if v.is_zero() {
                zero_count = c;
            } else {
                values.push(FactoredRational::from_fraction(&v).expect("nonzero"));
            }
        }
        SumsetResult {
            set: RationalSet::new(values),
            zero_count,
        }
    }
}

/// `|A|`, `|AA|`, `K = |AA|/|A|` and the smallest integer `K` with `|AA| ≤ K|A|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoublingReport {
    pub set_size: usize,
    pub product_set_size: usize,
    pub k_exact: String,
    pub k_integer: u64,
}

impl DoublingReport {
    pub fn k_integer_u32(&self) -> u32 {
        self.k_integer.to_u32().expect("doubling constant fits in u32")
    }
}
