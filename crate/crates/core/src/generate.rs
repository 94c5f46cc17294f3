//! Seeded instance generators: generalised geometric progressions, prime
//! sets, random subsets and the fixed corpora used by the test suites.

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::primes::{first_primes, is_prime};
use crate::rational::FactoredRational;
use crate::set::RationalSet;
use crate::sunit::{coefficient, SUnitInstance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// {p₁^{i₁}⋯p_r^{i_r} : lo_j ≤ i_j ≤ hi_j}.
pub fn ggp(primes: &[u64], boxes: &[(i64, i64)]) -> Result<RationalSet> {
    if primes.len() != boxes.len() {
        return Err(Error::Precondition(format!("{} primes but {} exponent ranges", primes.len(), boxes.len())));
    }
    for (i, &p) in primes.iter().enumerate() {
        if !is_prime(&BigUint::from(p)) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        if primes[..i].contains(&p) {
            return Err(Error::Precondition(format!("prime {p} is repeated")));
        }
    }
    if let Some((lo, hi)) = boxes.iter().find(|(lo, hi)| lo > hi) {
        return Err(Error::Precondition(format!("empty exponent range {lo}..{hi}")));
    }
    let mut out = vec![FactoredRational::one()];
    for (&p, &(lo, hi)) in primes.iter().zip(boxes) {
        let p = BigUint::from(p);
        out = out
            .iter()
            .flat_map(|x| {
                let p = p.clone();
                (lo..=hi).map(move |e| x.mul(&FactoredRational::from_prime_powers(false, [(p.clone(), e)]).expect("prime")))
            })
            .collect();
    }
    Ok(RationalSet::new(out))
}

/// Parse "lo..hi" (inclusive).
pub fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("expected lo..hi, got {s:?}")))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}")));
    Ok((parse(lo)?, parse(hi)?))
}

/// {2, 3, 5, …}, the first `count` primes.
pub fn primes_set(count: usize) -> RationalSet {
    first_primes(count)
        .into_iter()
        .map(|p| FactoredRational::from_prime_powers(false, [(BigUint::from(p), 1)]).expect("prime"))
        .collect()
}

/// A uniformly random `size`-subset, determined by `seed`.
pub fn random_subset(a: &RationalSet, size: usize, seed: u64) -> Result<RationalSet> {
    if size > a.len() {
        return Err(Error::Precondition(format!("subset size {size} exceeds set size {}", a.len())));
    }
    let mut idx = sample(&mut rng(seed), a.len(), size).into_vec();
    idx.sort_unstable();
    Ok(a.subset(&idx))
}

fn subset_with<R: Rng>(a: &RationalSet, size: usize, r: &mut R) -> RationalSet {
    let size = size.min(a.len());
    let mut idx = sample(r, a.len(), size).into_vec();
    idx.sort_unstable();
    a.subset(&idx)
}

/// `count` small sets (1 ≤ |A| ≤ max_size) mixing GGP subsets, signed
/// integers and signed fractions.
pub fn small_corpus(count: usize, max_size: usize, seed: u64) -> Vec<RationalSet> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let size = r.random_range(1..=max_size);
            match i % 4 {
                0 => {
                    let g = ggp(&[2, 3], &[(-2, 2), (-2, 2)]).expect("valid");
                    subset_with(&g, size, &mut r)
                }
                1 => distinct(&mut r, size, |r| {
                    let n = r.random_range(-20i64..=20);
                    (n != 0).then(|| FactoredRational::from_i64(n).expect("nonzero"))
                }),
                2 => distinct(&mut r, size, |r| {
                    let n = r.random_range(-9i64..=9);
                    let d = r.random_range(1i64..=9);
                    (n != 0).then(|| FactoredRational::from_ratio_i64(n, d).expect("nonzero"))
                }),
                _ => distinct(&mut r, size, |r| Some(FactoredRational::from_i64(r.random_range(1i64..=30)).expect("nonzero"))),
            }
        })
        .collect()
}

fn distinct<R: Rng>(r: &mut R, size: usize, mut draw: impl FnMut(&mut R) -> Option<FactoredRational>) -> RationalSet {
    let mut items: Vec<FactoredRational> = Vec::new();
    while items.len() < size {
        if let Some(x) = draw(r) {
            if !items.contains(&x) {
                items.push(x);
            }
        }
    }
    RationalSet::new(items)
}

/// Random subsets of GGPs over 1 to 3 of {2, 3, 5, 7} with asymmetric
/// boxes; sizes 2..=max_size.
pub fn ggp_subsets(count: usize, max_size: usize, seed: u64) -> Vec<RationalSet> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let rr = r.random_range(1..=3);
            let mut pool = vec![2u64, 3, 5, 7];
            let mut primes = Vec::new();
            for _ in 0..rr {
                primes.push(pool.remove(r.random_range(0..pool.len())));
            }
            let boxes: Vec<(i64, i64)> = primes.iter().map(|_| (r.random_range(-2..=0), r.random_range(0..=2))).collect();
            let g = ggp(&primes, &boxes).expect("valid");
            let size = r.random_range(2..=max_size);
            subset_with(&g, size, &mut r)
        })
        .collect()
}

/// Random sets of positive integers p₁^{i₁}⋯p_r^{i_r} with 0 ≤ i_j ≤ hi_j
/// over subsets of `primes`; sizes 2..=max_size.
pub fn positive_integer_sets(primes: &[u64], count: usize, max_size: usize, seed: u64) -> Vec<RationalSet> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let rr = r.random_range(1..=primes.len());
            let mut pool = primes.to_vec();
            let mut chosen = Vec::new();
            for _ in 0..rr {
                chosen.push(pool.remove(r.random_range(0..pool.len())));
            }
            let boxes: Vec<(i64, i64)> = chosen.iter().map(|_| (0, r.random_range(1..=4))).collect();
            let g = ggp(&chosen, &boxes).expect("valid");
            let size = r.random_range(2..=max_size);
            subset_with(&g, size, &mut r)
        })
        .collect()
}

/// Random S-unit instances with |S| = (2H+1)^r ≤ max_s.
pub fn sunit_instances(count: usize, max_s: u128, seed: u64) -> Vec<SUnitInstance> {
    let mut r = rng(seed);
    let coeffs = [1i64, 2, 3, -1, -2, 4, 6];
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let rr = r.random_range(1..=3);
        let mut pool = vec![2u64, 3, 5, 7, 11];
        let mut primes = Vec::new();
        for _ in 0..rr {
            primes.push(pool.remove(r.random_range(0..pool.len())));
        }
        let h = r.random_range(1..=6u32);
        let c1 = coefficient(coeffs[r.random_range(0..coeffs.len())]).expect("nonzero");
        let c2 = coefficient(coeffs[r.random_range(0..coeffs.len())]).expect("nonzero");
        let inst = SUnitInstance::new(primes, h, c1, c2).expect("valid");
        if inst.size() <= max_s {
            out.push(inst);
        }
    }
    out
}
