//! Representation counts Γ_{k,A}, multiplicative energy E_k, additive
//! energy E_k^+ and weighted energy E_{k,w}.
//!
//! Fast paths convolve exponent-vector tables; [`energy_bruteforce`] and
//! [`weighted_energy_bruteforce`] loop over all 2k-tuples with plain
//! fraction arithmetic and serve as the reference semantics.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{Float, One};
use serde::Serialize;

use crate::budget::Budget;
use crate::convolve::power;
use crate::error::{Error, Result};
use crate::lattice::{Encoding, Monomial};
use crate::rational::{BigFraction, FactoredRational};
use crate::scalar::Scalar;
use crate::set::RationalSet;

/// Nonnegative weights indexed like the elements of a [`RationalSet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector<S> {
    weights: Vec<S>,
    normalized: bool,
}

pub const NORMALIZATION_TOL: f64 = 1e-12;

impl<S: Scalar> WeightVector<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_nonnegative()) {
            return Err(Error::Domain(format!("weight {i} is negative ({w:?})")));
        }
        Ok(WeightVector {
            weights,
            normalized: false,
        })
    }

    /// Like [`new`](Self::new), additionally asserting `Σ w² = 1` within 1e-12.
    pub fn new_normalized(weights: Vec<S>) -> Result<Self> {
        let mut w = Self::new(weights)?;
        let err = (w.norm_sq().to_f64() - 1.0).abs();
        if err > NORMALIZATION_TOL {
            return Err(Error::Domain(format!("weights are not unit norm (|Σw² − 1| = {err:e})")));
        }
        w.normalized = true;
        Ok(w)
    }

    pub fn ones(n: usize) -> Self {
        WeightVector {
            weights: vec![S::one(); n],
            normalized: n == 1,
        }
    }

    /// 1 on the given positions, 0 elsewhere.
    pub fn indicator(n: usize, positions: &[usize]) -> Self {
        let mut weights = vec![S::zero(); n];
        for &i in positions {
            weights[i] = S::one();
        }
        WeightVector {
            weights,
            normalized: positions.len() == 1,
        }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sq(&self) -> S {
        S::sum_all(self.weights.iter().map(|w| w.clone() * w.clone()))
    }

    pub fn restrict(&self, positions: &[usize]) -> Self {
        WeightVector {
            weights: positions.iter().map(|&i| self.weights[i].clone()).collect(),
            normalized: false,
        }
    }
}

impl<F: Float + Scalar> WeightVector<F> {
    /// `w_i = 1/√n`.
    pub fn uniform(n: usize) -> Self {
        let w = F::one() / F::from(n).expect("size fits the float type").sqrt();
        WeightVector {
            weights: vec![w; n],
            normalized: true,
        }
    }

    /// Rescale onto the unit sphere. Fails for the zero vector.
    pub fn normalize(self) -> Result<Self> {
        let norm = self.norm_sq().sqrt();
        if norm <= F::zero() {
            return Err(Error::Domain("cannot normalize the zero weight vector".into()));
        }
        Self::new_normalized(self.weights.into_iter().map(|w| w / norm).collect())
    }
}

/// Γ_{k,A}: product value → (weighted) number of ordered k-tuples.
#[derive(Debug, Clone)]
pub struct GammaTable<W> {
    k: u32,
    encoding: Encoding,
    entries: BTreeMap<Monomial, W>,
}

impl<W> GammaTable<W> {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, value: &FactoredRational) -> Option<&W> {
        self.entries.get(&self.encoding.encode(value)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FactoredRational, &W)> + '_ {
        self.entries.iter().map(|(m, w)| (self.encoding.decode(m), w))
    }

    pub fn values(&self) -> impl Iterator<Item = &W> {
        self.entries.values()
    }
}

impl<W: std::fmt::Display> GammaTable<W> {
    /// `value,count` rows with factored literal values, ascending by value.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(BigFraction, FactoredRational, &W)> =
            self.iter().map(|(v, w)| (v.to_fraction(), v, w)).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::from("value,count\n");
        for (_, v, w) in rows {
            out.push_str(&format!("{v},{w}\n"));
        }
        out
    }
}

fn require_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Precondition("k must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn table_for<W: crate::convolve::Weight>(
    a: &RationalSet,
    k: u32,
    weights: impl Fn(usize) -> W,
) -> GammaTable<W> {
    let (encoding, monos) = a.encoded();
    let base: BTreeMap<Monomial, W> = monos
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, weights(i)))
        .collect();
    let entries = power(&base, k, &Monomial::mul);
    GammaTable {
        k,
        encoding,
        entries,
    }
}

/// Exact Γ_{k,A} by balanced iterated convolution.
pub fn gamma_k(a: &RationalSet, k: u32, budget: &Budget) -> Result<GammaTable<BigUint>> {
    require_k(k)?;
    budget.check_tuples("gamma table", a.len(), k)?;
    Ok(table_for(a, k, |_| BigUint::one()))
}

/// Weighted Γ: each k-tuple contributes the product of its weights.
pub fn weighted_gamma<S: Scalar>(
    a: &RationalSet,
    k: u32,
    w: &WeightVector<S>,
    budget: &Budget,
) -> Result<GammaTable<S>> {
    require_k(k)?;
    check_weights(a, w)?;
    budget.check_tuples("weighted gamma table", a.len(), k)?;
    Ok(table_for(a, k, |i| w.weights[i].clone()))
}

fn check_weights<S>(a: &RationalSet, w: &WeightVector<S>) -> Result<()> {
    if a.len() != w.weights.len() {
        return Err(Error::Precondition(format!(
            "{} weights for a set of size {}",
            w.weights.len(),
            a.len()
        )));
    }
    Ok(())
}

/// E_k(A) = Σ Γ_{k,A}(n)².
pub fn energy_k(a: &RationalSet, k: u32, budget: &Budget) -> Result<BigUint> {
    let g = gamma_k(a, k, budget)?;
    Ok(g.values().map(|c| c * c).sum())
}

/// E_k^+(A): ordered 2k-tuples with equal k-fold sums.
pub fn additive_energy_k(a: &RationalSet, k: u32, budget: &Budget) -> Result<BigUint> {
    Ok(a.sum_counts(k, budget)?.values().map(|c| c * c).sum())
}

/// E_{k,w}(A) = Σ_m F(m)² with F the weighted Γ.
pub fn weighted_energy<S: Scalar>(
    a: &RationalSet,
    k: u32,
    w: &WeightVector<S>,
    budget: &Budget,
) -> Result<S> {
    let g = weighted_gamma(a, k, w, budget)?;
    Ok(S::sum_all(g.values().map(|f| f.clone() * f.clone())))
}

struct HalfTuple<S> {
    value: BigFraction,
    weight: S,
}

/// All ordered k-tuples with their plain fraction products.
fn half_tuples<S: Scalar>(a: &RationalSet, k: u32, weights: &[S]) -> Vec<HalfTuple<S>> {
    let values: Vec<BigFraction> = a.iter().map(FactoredRational::to_fraction).collect();
    let mut out = vec![HalfTuple {
        value: BigFraction::one(),
        weight: S::one(),
    }];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|t| {
                values.iter().zip(weights.iter()).map(move |(v, w)| HalfTuple {
                    value: &t.value * v,
                    weight: t.weight.clone() * w.clone(),
                })
            })
            .collect();
    }
    out
}

/// Oracle: Σ over all 2k-tuples with `a_1⋯a_k = a_{k+1}⋯a_{2k}` of the weight
/// product, using plain fraction arithmetic and no tables.
pub fn weighted_energy_bruteforce<S: Scalar>(
    a: &RationalSet,
    k: u32,
    w: &WeightVector<S>,
    budget: &Budget,
) -> Result<S> {
    require_k(k)?;
    check_weights(a, w)?;
    budget.check_tuples("brute-force energy", a.len(), 2 * k)?;
    let halves = half_tuples(a, k, &w.weights);
    let mut terms = Vec::new();
    for left in &halves {
        for right in &halves {
            if left.value == right.value {
                terms.push(left.weight.clone() * right.weight.clone());
            }
        }
    }
    Ok(S::sum_all(terms))
}

/// Oracle for E_k(A): the number of solutions of `a_1⋯a_k = a_{k+1}⋯a_{2k}`.
pub fn energy_bruteforce(a: &RationalSet, k: u32, budget: &Budget) -> Result<BigUint> {
    require_k(k)?;
    budget.check_tuples("brute-force energy", a.len(), 2 * k)?;
    let ones = vec![BigFraction::one(); a.len()];
    let halves = half_tuples(a, k, &ones);
    let mut count = 0u64;
    for left in &halves {
        for right in &halves {
            if left.value == right.value {
                count += 1;
            }
        }
    }
    Ok(BigUint::from(count))
}

/// Leveled product lattice for repeated weighted-energy evaluation.
///
/// Level j holds the distinct j-fold products; `next[j][id·n + i]` is the id
/// at level j+1 of (product `id`)·a_i. Evaluating F_1..F_k for new weights
/// is then a handful of dense passes.
#[derive(Debug, Clone)]
pub struct EnergyEngine {
    n: usize,
    k: u32,
    level_sizes: Vec<usize>,
    next: Vec<Vec<u32>>,
}

impl EnergyEngine {
    pub fn new(a: &RationalSet, k: u32, budget: &Budget) -> Result<Self> {
        require_k(k)?;
        budget.check_tuples("energy engine", a.len(), k)?;
        let (_, monos) = a.encoded();
        let n = monos.len();
        let dim = a.support().len();
        let mut level: Vec<Monomial> = vec![Monomial::one(dim)];
        let mut level_sizes = vec![1];
        let mut next = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let mut ids: BTreeMap<Monomial, u32> = BTreeMap::new();
            let mut order: Vec<Monomial> = Vec::new();
            let mut trans = Vec::with_capacity(level.len() * n);
            for m in &level {
                for a_i in &monos {
                    let p = m.mul(a_i);
                    let id = match ids.get(&p) {
                        Some(&id) => id,
                        None => {
                            let id = order.len() as u32;
                            ids.insert(p.clone(), id);
                            order.push(p);
                            id
                        }
                    };
                    trans.push(id);
                }
            }
            level_sizes.push(order.len());
            next.push(trans);
            level = order;
        }
        Ok(EnergyEngine {
            n,
            k,
            level_sizes,
            next,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn set_size(&self) -> usize {
        self.n
    }

    /// F_0, …, F_k for the given weights.
    pub fn tables<S: Scalar>(&self, w: &[S]) -> Vec<Vec<S>> {
        assert_eq!(w.len(), self.n, "weight count must match the set");
        let mut tables = vec![vec![S::one()]];
        for j in 0..self.k as usize {
            let prev = &tables[j];
            let mut cur = vec![S::zero(); self.level_sizes[j + 1]];
            for (id, f) in prev.iter().enumerate() {
                if f.is_zero() {
                    continue;
                }
                let row = &self.next[j][id * self.n..(id + 1) * self.n];
                for (i, &to) in row.iter().enumerate() {
                    let slot = &mut cur[to as usize];
                    *slot = slot.clone() + f.clone() * w[i].clone();
                }
            }
            tables.push(cur);
        }
        tables
    }

    pub fn energy<S: Scalar>(&self, w: &[S]) -> S {
        let tables = self.tables(w);
        let top = &tables[self.k as usize];
        S::sum_all(top.iter().map(|f| f.clone() * f.clone()))
    }

    /// E_{k,w} and its gradient `∂E/∂w_i = 2k Σ_m F_k(m)·F_{k−1}(m/a_i)`.
    pub fn energy_and_gradient<S: Scalar>(&self, w: &[S]) -> (S, Vec<S>) {
        let tables = self.tables(w);
        let k = self.k as usize;
        let top = &tables[k];
        let below = &tables[k - 1];
        let value = S::sum_all(top.iter().map(|f| f.clone() * f.clone()));
        let scale = S::from_ratio(&BigFraction::from_integer((2 * self.k).into()));
        let grad = (0..self.n)
            .map(|i| {
                let s = S::sum_all(below.iter().enumerate().map(|(id, f)| {
                    let to = self.next[k - 1][id * self.n + i] as usize;
                    f.clone() * top[to].clone()
                }));
                scale.clone() * s
            })
            .collect();
        (value, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn set(v: &[i64]) -> RationalSet {
        RationalSet::from_i64s(v).unwrap()
    }

    fn b() -> Budget {
        Budget::default()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_k(&set(&[2, 4, 8]), 2, &b()).unwrap();
        let got: Vec<(String, String)> = g.iter().map(|(v, c)| (v.to_string(), c.to_string())).collect();
        assert_eq!(
            got,
            [("2^2", "1"), ("2^3", "2"), ("2^4", "3"), ("2^5", "2"), ("2^6", "1")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
        );
        let g = gamma_k(&set(&[1]), 4, &b()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.get(&FactoredRational::one()), Some(&BigUint::one()));
        let g = gamma_k(&set(&[2, 3]), 3, &b()).unwrap();
        let counts: Vec<u32> = [8, 12, 18, 27]
            .iter()
            .map(|&v| {
                let x = FactoredRational::from_i64(v).unwrap();
                g.get(&x).unwrap().try_into().unwrap()
            })
            .collect();
        assert_eq!(counts, vec![1, 3, 3, 1]);
        let total: BigUint = g.values().sum();
        assert_eq!(total, BigUint::from(8u32));
    }

    #[test]
    fn gamma_csv() {
        let g = gamma_k(&set(&[2, 3]), 2, &b()).unwrap();
        assert_eq!(g.to_csv(), "value,count\n2^2,1\n2*3,2\n3^2,1\n");
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_k(&set(&[2, 4, 8]), 2, &b()).unwrap(), BigUint::from(19u32));
        assert_eq!(energy_k(&set(&[2, 3, 5, 7, 11]), 1, &b()).unwrap(), BigUint::from(5u32));
        assert_eq!(energy_bruteforce(&set(&[2]), 5, &b()).unwrap(), BigUint::one());
        assert_eq!(energy_bruteforce(&set(&[2, 4, 8]), 2, &b()).unwrap(), BigUint::from(19u32));
    }

    #[test]
    fn additive_energy_examples() {
        assert_eq!(additive_energy_k(&set(&[2, 4, 8]), 2, &b()).unwrap(), BigUint::from(15u32));
        assert_eq!(additive_energy_k(&set(&[1]), 3, &b()).unwrap(), BigUint::one());
        assert_eq!(additive_energy_k(&set(&[1, 2, 3]), 2, &b()).unwrap(), BigUint::from(19u32));
        // zero sums are counted too: {1,-1}, k=1 pairs plus the 2 zero-sum pairs for k=2
        assert_eq!(additive_energy_k(&set(&[-1, 1]), 2, &b()).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn weighted_examples() {
        // uniform weights: E_k / N^k
        let w = WeightVector::<BigRational>::ones(3);
        let e = weighted_energy(&set(&[2, 4, 8]), 2, &w, &b()).unwrap();
        assert_eq!(e, q(19, 1));
        let wf = crate::Weights::uniform(3);
        let e = weighted_energy(&set(&[2, 4, 8]), 2, &wf, &b()).unwrap();
        assert!((e - 19.0 / 9.0).abs() < 1e-14);
        let e = weighted_energy(&set(&[2, 3, 5]), 2, &wf, &b()).unwrap();
        assert!((e - 5.0 / 3.0).abs() < 1e-14);
        // concentrated weight
        for k in 1..5 {
            let w = WeightVector::<f64>::indicator(3, &[1]);
            assert_eq!(weighted_energy(&set(&[2, 4, 8]), k, &w, &b()).unwrap(), 1.0);
        }
    }

    #[test]
    fn independent_closed_form() {
        // 2(Σw²)² − Σw⁴ for multiplicatively independent sets
        let a = set(&[2, 3, 5, 7]);
        let w = WeightVector::new(vec![q(1, 2), q(1, 3), q(2, 5), q(3, 7)]).unwrap();
        let s2: BigRational = w.weights().iter().map(|x| x * x).sum();
        let s4: BigRational = w.weights().iter().map(|x| x * x * x * x).sum();
        let want = &s2 * &s2 * BigRational::from_integer(2.into()) - s4;
        assert_eq!(weighted_energy(&a, 2, &w, &b()).unwrap(), want);
        assert_eq!(weighted_energy_bruteforce(&a, 2, &w, &b()).unwrap(), want);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![1.0, -0.5]).is_err());
        assert!(WeightVector::new_normalized(vec![0.6, 0.8]).is_ok());
        assert!(WeightVector::new_normalized(vec![0.6, 0.7]).is_err());
        let w = WeightVector::new(vec![3.0, 4.0]).unwrap().normalize().unwrap();
        assert!(w.is_normalized());
        assert!(WeightVector::new(vec![0.0, 0.0]).unwrap().normalize().is_err());
        let err = weighted_energy(&set(&[2, 3]), 1, &WeightVector::<f64>::ones(3), &b()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn budget_refusals() {
        let tiny = Budget { max_tuples: 100, ..Budget::default() };
        let a = set(&[2, 3, 5, 7, 11]);
        assert!(gamma_k(&a, 3, &tiny).unwrap_err().is_budget());
        assert!(energy_bruteforce(&a, 2, &tiny).unwrap_err().is_budget());
        assert!(EnergyEngine::new(&a, 3, &tiny).unwrap_err().is_budget());
    }

    #[test]
    fn engine_matches_tables() {
        let a = RationalSet::from_literals(&["1/2", "3", "6", "-2", "9/4"]).unwrap();
        let w = vec![q(1, 3), q(2, 7), q(1, 1), q(0, 1), q(5, 11)];
        let wv = WeightVector::new(w.clone()).unwrap();
        for k in 1..=3 {
            let engine = EnergyEngine::new(&a, k, &b()).unwrap();
            let want = weighted_energy(&a, k, &wv, &b()).unwrap();
            assert_eq!(engine.energy(&w), want);
            // gradient by exact finite difference in each coordinate: E is a polynomial,
            // so compare against the symmetric difference quotient of degree-2k polynomial
            // via Euler's identity Σ w_i ∂_i E = 2k E.
            let (val, grad) = engine.energy_and_gradient(&w);
            assert_eq!(val, want);
            let euler: BigRational = grad.iter().zip(w.iter()).map(|(g, x)| g * x).sum();
            assert_eq!(euler, BigRational::from_integer((2 * k).into()) * want);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = set(&[2, 3, 4, 6]);
        let w = vec![0.3, 0.5, 0.2, 0.7];
        let engine = EnergyEngine::new(&a, 2, &b()).unwrap();
        let (_, grad) = engine.energy_and_gradient(&w);
        let h = 1e-6;
        for i in 0..4 {
            let mut up = w.clone();
            let mut dn = w.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (engine.energy(&up) - engine.energy(&dn)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6, "coord {i}: {fd} vs {}", grad[i]);
        }
    }
}
