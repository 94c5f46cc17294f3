//! Lower bounds on Λ_k(A) = max_{w ≥ 0, Σw² = 1} E_{k,w}(A)^{1/k}, the
//! theorem upper bounds (2k²)^K and (8k⁴)^K, and exact checks of the
//! inequalities they imply.
//!
//! The optimizer is a shifted power iteration: `w ← (∇E + αw)/‖∇E + αw‖`.
//! Because E_{k,w} has nonnegative coefficients the gradient keeps the
//! nonnegative orthant invariant. α starts at zero and is doubled whenever a
//! step would decrease E, so the value sequence is monotone.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, Pow, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::energy::{energy_k, EnergyEngine, WeightVector};
use crate::error::{Error, Result};
use crate::rational::{fraction_string, BigFraction, FactoredRational};
use crate::scalar::Scalar;
use crate::set::RationalSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when successive values differ by at most `tol · max(1, E)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            restarts: 16,
            max_iters: 10_000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEstimate<F> {
    /// E_{k,w}(A)^{1/k} at the witness; a lower bound on Λ_k(A).
    pub value: F,
    pub witness: WeightVector<F>,
    pub k: u32,
    pub restarts_used: usize,
    /// Index of the restart that produced the witness (0 is the uniform start).
    pub best_restart: usize,
    /// Iterations of the best restart.
    pub iterations: usize,
    pub converged: bool,
}

struct Ascent<F> {
    energy: F,
    w: Vec<F>,
    iterations: usize,
    converged: bool,
}

fn normalize<F: Float>(v: &[F]) -> Option<Vec<F>> {
    let norm = v.iter().fold(F::zero(), |s, &x| s + x * x).sqrt();
    (norm > F::zero() && norm.is_finite()).then(|| v.iter().map(|&x| x / norm).collect())
}

fn ascend<F: Float + Scalar>(engine: &EnergyEngine, start: Vec<F>, opts: &LambdaOptions) -> Ascent<F> {
    let tol = F::from(opts.tol).unwrap();
    let two = F::one() + F::one();
    let mut w = start;
    let (mut e, mut g) = engine.energy_and_gradient(&w);
    let mut alpha = F::zero();
    for it in 0..opts.max_iters {
        let mut next = None;
        for _ in 0..64 {
            let v: Vec<F> = g.iter().zip(&w).map(|(&gi, &wi)| gi + alpha * wi).collect();
            if let Some(cand) = normalize(&v) {
                let ec = engine.energy(&cand);
                if ec >= e {
                    next = Some((cand, ec));
                    break;
                }
            }
            alpha = if alpha.is_zero() { e * F::from(2 * engine.k()).unwrap() } else { alpha * two };
        }
        let Some((cand, ec)) = next else {
            // no ascent direction at working precision: stationary
            return Ascent { energy: e, w, iterations: it, converged: true };
        };
        let delta = ec - e;
        w = cand;
        (e, g) = engine.energy_and_gradient(&w);
        if delta <= tol * e.max(F::one()) {
            return Ascent { energy: e, w, iterations: it + 1, converged: true };
        }
    }
    Ascent { energy: e, w, iterations: opts.max_iters, converged: false }
}

fn restart_start<F: Float>(n: usize, index: usize, seed: u64) -> Vec<F> {
    if index == 0 {
        let u = F::one() / F::from(n).unwrap().sqrt();
        return vec![u; n];
    }
    // a flat Dirichlet sample p on the simplex, mapped to the sphere by √p
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|x| F::from((x / total).sqrt()).unwrap()).collect()
}

/// Best value of E_{k,w}^{1/k} over `opts.restarts` ascents. Restarts run in
/// parallel; restart `i` depends only on `(seed, i)` and ties go to the lower
/// index, so the result does not depend on the thread count.
pub fn lambda_lower_estimate<F>(
    a: &RationalSet,
    k: u32,
    opts: &LambdaOptions,
    budget: &Budget,
) -> Result<LambdaEstimate<F>>
where
    F: Float + Scalar + FromPrimitive,
{
    if a.is_empty() {
        return Err(Error::Precondition("Λ_k of the empty set is undefined".into()));
    }
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let n = a.len();
    if k == 1 {
        return Ok(LambdaEstimate {
            value: F::one(),
            witness: WeightVector::uniform(n),
            k,
            restarts_used: 0,
            best_restart: 0,
            iterations: 0,
            converged: true,
        });
    }
    let engine = EnergyEngine::new(a, k, budget)?;
    let restarts = opts.restarts.max(1);
    let runs: Vec<Ascent<F>> = (0..restarts)
        .into_par_iter()
        .map(|i| ascend(&engine, restart_start(n, i, opts.seed), opts))
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.energy > runs[best].energy {
            best = i;
        }
    }
    let run = &runs[best];
    let w = normalize(&run.w).expect("ascent keeps a nonzero vector");
    let witness = WeightVector::new_normalized(w)?;
    let e = engine.energy(witness.weights());
    Ok(LambdaEstimate {
        value: e.powf(F::one() / F::from(k).unwrap()),
        witness,
        k,
        restarts_used: restarts,
        best_restart: best,
        iterations: run.iterations,
        converged: run.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// A ⊂ Z_{>0} and u an integer coprime to every element: Λ_k(A+u) ≤ (2k²)^K.
    Integer,
    /// Any finite A ⊂ Q and u ≠ 0: Λ_k(A+u) = Λ_k(A/u + 1) ≤ (8k⁴)^K.
    Rational,
}

impl Regime {
    /// Base of the bound: 2k² or 8k⁴.
    pub fn base(self, k: u32) -> BigUint {
        let k = BigUint::from(k);
        match self {
            Regime::Integer => BigUint::from(2u32) * &k * &k,
            Regime::Rational => BigUint::from(8u32) * (&k * &k) * (&k * &k),
        }
    }

    /// Integer when the hypotheses allow it, rational otherwise.
    pub fn detect(a: &RationalSet, u: &BigFraction) -> Regime {
        if Self::Integer.check(a, u).is_ok() {
            Regime::Integer
        } else {
            Regime::Rational
        }
    }

    pub fn check(self, a: &RationalSet, u: &BigFraction) -> Result<()> {
        if u.is_zero() {
            return Err(Error::Regime("the shift u must be nonzero".into()));
        }
        if self == Regime::Rational {
            return Ok(());
        }
        if !u.is_integer() {
            return Err(Error::Regime(format!("integer regime needs an integer shift, got {}", fraction_string(u))));
        }
        let uf = FactoredRational::from_fraction(u)?;
        for x in a.iter() {
            if !(x.is_positive() && x.is_integer()) {
                return Err(Error::Regime(format!("integer regime needs positive integers, got {}", fraction_string(&x.to_fraction()))));
            }
            if !x.coprime(&uf) {
                return Err(Error::Regime(format!(
                    "shift {} is not coprime to {}",
                    fraction_string(u),
                    fraction_string(&x.to_fraction())
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Integer => "integer",
            Regime::Rational => "rational",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integer" => Ok(Regime::Integer),
            "rational" => Ok(Regime::Rational),
            _ => Err(Error::Parse(format!("unknown regime {s:?}"))),
        }
    }
}

/// Which comparison decided `lambda_lower ≤ theorem_upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Exact,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: u32,
    pub set_size: usize,
    pub shift: String,
    pub regime: Regime,
    pub k_integer: u64,
    pub lambda_lower: f64,
    /// (2k²)^K or (8k⁴)^K.
    pub theorem_upper: String,
    /// |A|^k / base^{kK}.
    pub product_set_lower: String,
    /// |A|^k / (2k² − k)^{kK}; empty for k = 1.
    pub chang_lower: String,
    pub comparison: Comparison,
    pub pass: bool,
}

fn big_pow(base: &BigUint, e: u64) -> BigUint {
    Pow::pow(base, e)
}

fn chang_base(k: u32) -> BigUint {
    let k = u64::from(k);
    BigUint::from(2 * k * k - k)
}

/// `x ≤ bound`, exactly unless the bound exceeds 10^300.
fn float_le_big(x: f64, bound: &BigUint) -> (bool, Comparison) {
    if bound.bits() > 997 {
        let ln_bound = bound.bits() as f64 * std::f64::consts::LN_2
            + (bound >> (bound.bits() - 64)).to_f64().unwrap().ln()
            - 64.0 * std::f64::consts::LN_2;
        return (x.ln() <= ln_bound, Comparison::Logarithmic);
    }
    match BigRational::from_float(x) {
        Some(q) => (q <= BigRational::from_integer(BigInt::from(bound.clone())), Comparison::Exact),
        None => (false, Comparison::Exact),
    }
}

/// Estimate Λ_k(A+u) and compare it with the theorem bound for `regime`.
pub fn theorem_upper_bound(
    a: &RationalSet,
    k: u32,
    u: &BigFraction,
    regime: Regime,
    opts: &LambdaOptions,
    budget: &Budget,
) -> Result<BoundReport> {
    regime.check(a, u)?;
    let kk = a.doubling()?.k_integer;
    let base = regime.base(k);
    let upper = big_pow(&base, kk);
    let shifted = a.shift(u)?;
    let est: LambdaEstimate<f64> = lambda_lower_estimate(&shifted, k, opts, budget)?;
    let (pass, comparison) = float_le_big(est.value, &upper);
    let n_k = big_pow(&BigUint::from(a.len()), u64::from(k));
    let ratio = |den: BigUint| fraction_string(&BigFraction::new(n_k.clone().into(), den.into()));
    Ok(BoundReport {
        k,
        set_size: a.len(),
        shift: fraction_string(u),
        regime,
        k_integer: kk,
        lambda_lower: est.value,
        theorem_upper: upper.to_string(),
        product_set_lower: ratio(big_pow(&base, u64::from(k) * kk)),
        chang_lower: if k >= 2 { ratio(big_pow(&chang_base(k), u64::from(k) * kk)) } else { String::new() },
        comparison,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: String,
    pub relation: &'static str,
    pub rhs: String,
    pub holds: bool,
}

fn check(name: &str, lhs: BigUint, relation: &'static str, rhs: BigUint) -> BoundCheck {
    let holds = match relation {
        "<=" => lhs <= rhs,
        _ => lhs >= rhs,
    };
    BoundCheck {
        name: name.into(),
        lhs: lhs.to_string(),
        relation,
        rhs: rhs.to_string(),
        holds,
    }
}

/// Exact consequences of the theorems for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub k: u32,
    pub set_size: usize,
    pub shift: String,
    pub k_integer: u64,
    /// |A| ≥ 2K(K+1), where dimension ≤ K is guaranteed by Freiman's Lemma.
    pub freiman_regime: bool,
    pub integer_regime: bool,
    pub shifted_energy: String,
    pub shifted_product_set_size: usize,
    /// |kA|, or empty when the additive enumeration exceeded the budget.
    pub sumset_size: String,
    pub checks: Vec<BoundCheck>,
    pub skipped: Vec<String>,
    pub pass: bool,
}

/// Exact checks of the energy and cardinality bounds for `A+u` and of Chang's
/// bounds for `kA`. For u ≠ 1 the rational-case bounds apply through
/// `A + u = u(A/u + 1)`, which preserves both energies and product-set sizes.
pub fn verify_bounds(a: &RationalSet, k: u32, u: &BigFraction, budget: &Budget) -> Result<VerifyReport> {
    if a.is_empty() {
        return Err(Error::Precondition("bounds need a nonempty set".into()));
    }
    Regime::Rational.check(a, u)?;
    let kk = a.doubling()?.k_integer;
    let k64 = u64::from(k);
    let n = BigUint::from(a.len());
    let n_k = big_pow(&n, k64);
    let shifted = a.shift(u)?;
    let energy = energy_k(&shifted, k, budget)?;
    let prod_size = shifted.k_fold_product(k, budget)?.len();
    let prod = BigUint::from(prod_size);

    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let integer_regime = Regime::Integer.check(a, u).is_ok();
    let mut regimes = vec![Regime::Rational];
    if integer_regime {
        regimes.push(Regime::Integer);
    }
    for regime in regimes {
        let factor = big_pow(&regime.base(k), k64 * kk);
        checks.push(check(&format!("{regime}: E_k(A+u) <= base^(kK)|A|^k"), energy.clone(), "<=", &factor * &n_k));
        checks.push(check(&format!("{regime}: |(A+u)^(k)| base^(kK) >= |A|^k"), &prod * &factor, ">=", n_k.clone()));
    }
    checks.push(check("|A|^(2k) <= E_k(A+u)|(A+u)^(k)|", &n_k * &n_k, "<=", &energy * &prod));

    let mut sumset_size = String::new();
    if k >= 2 {
        let factor = big_pow(&chang_base(k), k64 * kk);
        match (a.k_fold_sumset(k, budget), crate::energy::additive_energy_k(a, k, budget)) {
            (Ok(s), Ok(e_plus)) => {
                let size = s.set.len() + usize::from(!s.zero_count.is_zero());
                sumset_size = size.to_string();
                checks.push(check("chang: |kA| (2k^2-k)^(kK) >= |A|^k", BigUint::from(size) * &factor, ">=", n_k.clone()));
                checks.push(check("chang: E_k^+(A) <= (2k^2-k)^(kK)|A|^k", e_plus, "<=", &factor * &n_k));
            }
            (Err(e), _) | (_, Err(e)) if e.is_budget() => skipped.push(format!("chang: {e}")),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let pass = checks.iter().all(|c| c.holds);
    Ok(VerifyReport {
        k,
        set_size: a.len(),
        shift: fraction_string(u),
        k_integer: kk,
        freiman_regime: a.len() as u64 >= 2 * kk * (kk + 1),
        integer_regime,
        shifted_energy: energy.to_string(),
        shifted_product_set_size: prod_size,
        sumset_size,
        checks,
        skipped,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCase {
    /// Indices into `A + u`.
    pub subset: Vec<usize>,
    pub energy: String,
    /// E_k(A')^{1/k} / |A'|, rounded.
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub k: u32,
    pub shift: String,
    pub regime: Regime,
    pub theorem_upper: String,
    pub cases: Vec<StabilityCase>,
    pub max_ratio: f64,
    pub pass: bool,
}

/// For sampled A' ⊆ A+u check E_k(A') ≤ U^k |A'|^k exactly, U the theorem
/// bound for A. The full set and a singleton are always included.
pub fn subset_stability_check(
    a: &RationalSet,
    k: u32,
    u: &BigFraction,
    samples: usize,
    seed: u64,
    budget: &Budget,
) -> Result<StabilityReport> {
    use rand::seq::index::sample;
    use rand::Rng;

    if a.is_empty() {
        return Err(Error::Precondition("stability check needs a nonempty set".into()));
    }
    let regime = Regime::detect(a, u);
    regime.check(a, u)?;
    let kk = a.doubling()?.k_integer;
    let upper = big_pow(&regime.base(k), kk);
    let upper_k = big_pow(&upper, u64::from(k));
    let b = a.shift(u)?;
    let n = b.len();
    let mut subsets: Vec<Vec<usize>> = vec![(0..n).collect(), vec![0]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let size = rng.random_range(1..=n);
        let mut idx = sample(&mut rng, n, size).into_vec();
        idx.sort_unstable();
        subsets.push(idx);
    }
    let mut cases = Vec::with_capacity(subsets.len());
    for idx in subsets {
        let sub = b.subset(&idx);
        let e = energy_k(&sub, k, budget)?;
        let m = big_pow(&BigUint::from(idx.len()), u64::from(k));
        let holds = e <= &upper_k * &m;
        let ratio = crate::scalar::ratio_to_f64(&BigRational::new(e.clone().into(), m.into())).powf(1.0 / f64::from(k));
        cases.push(StabilityCase {
            subset: idx,
            energy: e.to_string(),
            ratio,
            holds,
        });
    }
    let max_ratio = cases.iter().map(|c| c.ratio).fold(0.0, f64::max);
    Ok(StabilityReport {
        k,
        shift: fraction_string(u),
        regime,
        theorem_upper: upper.to_string(),
        pass: cases.iter().all(|c| c.holds),
        cases,
        max_ratio,
    })
}

/// `BigFraction` for the common shift 1.
pub fn unit_shift() -> BigFraction {
    BigFraction::one()
}
