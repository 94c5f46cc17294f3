//! Dense exponent-vector encoding of factored rationals over a fixed prime
//! basis. Products become vector sums, so hashing and ordering stay cheap
//! and exact.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::rational::FactoredRational;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    pub negative: bool,
    pub exps: Box<[i64]>,
}

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial {
            negative: false,
            exps: vec![0; dim].into_boxed_slice(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Monomial {
            negative: self.negative ^ other.negative,
            exps: self
                .exps
                .iter()
                .zip(other.exps.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        Monomial {
            negative: self.negative ^ other.negative,
            exps: self
                .exps
                .iter()
                .zip(other.exps.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// A prime basis and the map from primes to coordinates.
#[derive(Clone, Debug, Default)]
pub struct Encoding {
    basis: Vec<BigUint>,
    index: BTreeMap<BigUint, usize>,
}

impl Encoding {
    /// Basis is the ascending union of the supports of `values`.
    pub fn covering<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a FactoredRational>,
    {
        let mut primes: Vec<BigUint> = values
            .into_iter()
            .flat_map(|v| v.support().cloned())
            .collect();
        primes.sort();
        primes.dedup();
        Self::with_basis(primes)
    }

    pub fn with_basis(basis: Vec<BigUint>) -> Self {
        let index = basis.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Encoding { basis, index }
    }

    pub fn basis(&self) -> &[BigUint] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `None` when `x` has a prime outside the basis.
    pub fn encode(&self, x: &FactoredRational) -> Option<Monomial> {
        let mut exps = vec![0i64; self.basis.len()];
        for (p, &e) in x.exponents() {
            exps[*self.index.get(p)?] = e;
        }
        Some(Monomial {
            negative: x.is_negative(),
            exps: exps.into_boxed_slice(),
        })
    }

    pub fn decode(&self, m: &Monomial) -> FactoredRational {
        let exponents = self
            .basis
            .iter()
            .zip(m.exps.iter())
            .map(|(p, &e)| (p.clone(), e))
            .collect();
        FactoredRational::from_parts_unchecked(m.negative, exponents)
    }
}
