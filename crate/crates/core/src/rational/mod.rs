//! Nonzero rationals in factored form: a sign and a prime → exponent map.

pub mod log;
pub mod primes;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use primes::{factor_biguint, is_prime, DEFAULT_TRIAL_CAP};

/// Exact fraction carrier used whenever values must be added. Always reduced,
/// with a positive denominator.
pub type BigFraction = BigRational;

/// A nonzero rational `sign · Π p^e`.
///
/// Exponents are never zero, so equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactoredRational {
    negative: bool,
    exponents: BTreeMap<BigUint, i64>,
}

impl FactoredRational {
    pub fn one() -> Self {
        FactoredRational {
            negative: false,
            exponents: BTreeMap::new(),
        }
    }

    /// Canonical factored form of `n/d`.
    pub fn factor(n: &BigInt, d: &BigUint) -> Result<Self> {
        Self::factor_with_cap(n, d, DEFAULT_TRIAL_CAP)
    }

    pub fn factor_with_cap(n: &BigInt, d: &BigUint, trial_cap: u64) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::Domain("zero has no factored form".into()));
        }
        if d.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        let negative = n.sign() == Sign::Minus;
        let num = n.magnitude();
        let g = num.gcd(d);
        let num = num / &g;
        let den = d / &g;
        let mut exponents = factor_biguint(&num, trial_cap);
        for (p, e) in factor_biguint(&den, trial_cap) {
            // reduced, so no prime is shared
            exponents.insert(p, -e);
        }
        Ok(FactoredRational {
            negative,
            exponents,
        })
    }

    pub fn from_fraction(x: &BigFraction) -> Result<Self> {
        let den = x
            .denom()
            .to_biguint()
            .ok_or_else(|| Error::Domain("negative denominator".into()))?;
        Self::factor(x.numer(), &den)
    }

    pub fn from_i64(n: i64) -> Result<Self> {
        Self::factor(&BigInt::from(n), &BigUint::one())
    }

    pub fn from_ratio_i64(n: i64, d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Self::from_fraction(&BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Build from explicit prime powers; primes are checked and repeated
    /// primes merged.
    pub fn from_prime_powers<I>(negative: bool, powers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BigUint, i64)>,
    {
        let mut exponents = BTreeMap::new();
        for (p, e) in powers {
            if !is_prime(&p) {
                return Err(Error::Domain(format!("{p} is not prime")));
            }
            *exponents.entry(p).or_insert(0) += e;
        }
        Ok(Self::from_parts_unchecked(negative, exponents))
    }

    /// Caller guarantees every key is prime. Zero exponents are dropped.
    pub(crate) fn from_parts_unchecked(negative: bool, mut exponents: BTreeMap<BigUint, i64>) -> Self {
        exponents.retain(|_, e| *e != 0);
        FactoredRational {
            negative,
            exponents,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_positive(&self) -> bool {
        !self.negative
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.exponents.is_empty()
    }

    /// True for (signed) integers.
    pub fn is_integer(&self) -> bool {
        self.exponents.values().all(|&e| e > 0)
    }

    pub fn exponents(&self) -> &BTreeMap<BigUint, i64> {
        &self.exponents
    }

    /// Primes with nonzero exponent, ascending.
    pub fn support(&self) -> impl Iterator<Item = &BigUint> {
        self.exponents.keys()
    }

    /// p-adic valuation; zero for primes outside the support.
    pub fn valuation(&self, p: &BigUint) -> i64 {
        self.exponents.get(p).copied().unwrap_or(0)
    }

    pub fn valuation_u64(&self, p: u64) -> i64 {
        self.valuation(&BigUint::from(p))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut exponents = self.exponents.clone();
        for (p, e) in &other.exponents {
            *exponents.entry(p.clone()).or_insert(0) += e;
        }
        Self::from_parts_unchecked(self.negative ^ other.negative, exponents)
    }

    pub fn inv(&self) -> Self {
        FactoredRational {
            negative: self.negative,
            exponents: self.exponents.iter().map(|(p, e)| (p.clone(), -e)).collect(),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, n: i64) -> Self {
        let negative = self.negative && n.rem_euclid(2) == 1;
        Self::from_parts_unchecked(
            negative,
            self.exponents.iter().map(|(p, e)| (p.clone(), e * n)).collect(),
        )
    }

    pub fn numerator(&self) -> BigInt {
        let mag = self
            .exponents
            .iter()
            .filter(|(_, &e)| e > 0)
            .fold(BigUint::one(), |acc, (p, &e)| acc * p.pow(e as u32));
        let n = BigInt::from(mag);
        if self.negative {
            -n
        } else {
            n
        }
    }

    pub fn denominator(&self) -> BigUint {
        self.exponents
            .iter()
            .filter(|(_, &e)| e < 0)
            .fold(BigUint::one(), |acc, (p, &e)| acc * p.pow((-e) as u32))
    }

    /// The value as a reduced fraction.
    pub fn to_fraction(&self) -> BigFraction {
        BigRational::new_raw(self.numerator(), BigInt::from(self.denominator()))
    }

    /// `self + u`, computed exactly and re-factored.
    pub fn add_shift(&self, u: &BigFraction) -> Result<Self> {
        let sum = self.to_fraction() + u;
        if sum.is_zero() {
            return Err(Error::Domain(format!("{self} + {u} is zero")));
        }
        Self::from_fraction(&sum)
    }

    /// True iff no prime divides both (numerators and denominators included).
    pub fn coprime(&self, other: &Self) -> bool {
        let (small, large) = if self.exponents.len() <= other.exponents.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.exponents.keys().all(|p| !large.exponents.contains_key(p))
    }

    /// Numeric comparison.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        self.to_fraction().cmp(&other.to_fraction())
    }
}

impl fmt::Display for FactoredRational {
    /// Canonical factored literal, e.g. `2^2*3*5^-1`, `-7`, `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        if self.exponents.is_empty() {
            return f.write_str("1");
        }
        for (i, (p, e)) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FactoredRational({self})")
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    BigInt::from_str(s.trim()).map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

impl FromStr for FactoredRational {
    type Err = Error;

    /// Accepts `n/d`, `n`, or a factored product such as `-2^2*3*5^-1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty literal".into()));
        }
        if s.contains('^') || s.contains('*') {
            let (negative, body) = match s.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, s.strip_prefix('+').unwrap_or(s)),
            };
            let mut powers = Vec::new();
            for factor in body.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (b, e.trim().parse::<i64>().map_err(|_| {
                        Error::Parse(format!("bad exponent in {factor:?}"))
                    })?),
                    None => (factor, 1),
                };
                let base = parse_int(base)?;
                if base.is_one() {
                    continue;
                }
                let p = base
                    .to_biguint()
                    .filter(|p| !p.is_zero())
                    .ok_or_else(|| Error::Parse(format!("bad base in {factor:?}")))?;
                if !is_prime(&p) {
                    return Err(Error::Parse(format!("{p} in {s:?} is not prime")));
                }
                powers.push((p, exp));
            }
            return Self::from_prime_powers(negative, powers);
        }
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (parse_int(n)?, parse_int(d)?),
            None => (parse_int(s)?, BigInt::one()),
        };
        if d.is_zero() {
            return Err(Error::Domain(format!("zero denominator in {s:?}")));
        }
        let (n, d) = if d.is_negative() { (-n, -d) } else { (n, d) };
        Self::factor(&n, &d.to_biguint().expect("positive"))
    }
}

impl Serialize for FactoredRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FactoredRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `n` or `n/d`, the way fractions appear in reports.
pub fn fraction_string(x: &BigFraction) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
