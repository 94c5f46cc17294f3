//! Integer factoring for desk-scale inputs.
//!
//! Trial division runs against a process-wide prime table that grows on
//! demand. Residues whose square root lies beyond the trial cap are split
//! with Miller-Rabin and Brent's variant of Pollard rho.

use std::collections::BTreeMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Default bound on trial-division primes.
pub const DEFAULT_TRIAL_CAP: u64 = 10_000_000;

struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

fn table() -> &'static RwLock<PrimeTable> {
    static TABLE: OnceLock<RwLock<PrimeTable>> = OnceLock::new();
    TABLE.get_or_init(|| {
        RwLock::new(PrimeTable {
            limit: 1,
            primes: Vec::new(),
        })
    })
}

fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Make sure every prime `<= bound` is in the shared table. Growth is
/// serialized by the write lock; readers never see a partial table.
fn ensure_primes_up_to(bound: u64) {
    {
        let t = table().read().expect("prime table poisoned");
        if t.limit >= bound {
            return;
        }
    }
    let mut t = table().write().expect("prime table poisoned");
    if t.limit >= bound {
        return;
    }
    let new_limit = bound.max(t.limit.saturating_mul(2)).max(1 << 12);
    t.primes = sieve(new_limit);
    t.limit = new_limit;
}

/// Run `f` over the primes `<= bound` without holding a copy of the table.
fn with_primes_up_to<R>(bound: u64, f: impl FnOnce(&[u64]) -> R) -> R {
    ensure_primes_up_to(bound);
    let t = table().read().expect("prime table poisoned");
    let end = t.primes.partition_point(|&p| p <= bound);
    f(&t.primes[..end])
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut bound = 64u64;
    loop {
        let got = with_primes_up_to(bound, |ps| ps.iter().take(count).copied().collect::<Vec<_>>());
        if got.len() == count {
            return got;
        }
        bound *= 2;
    }
}

const MR_BASES: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Miller-Rabin with the first twenty prime bases. Deterministic below
/// 3.3e24, overwhelmingly reliable beyond.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in &MR_BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'bases: for &b in &MR_BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primality for arbitrary integers: table lookup when small, Miller-Rabin otherwise.
pub fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(v) if v < (1 << 20) => {
            with_primes_up_to(v.max(2), |ps| ps.binary_search(&v).is_ok())
        }
        _ => is_probable_prime(n),
    }
}

/// Brent's cycle-finding variant of Pollard rho. Returns a nontrivial factor
/// of a composite `n`.
fn pollard_brent(n: &BigUint) -> BigUint {
    if n.is_even() {
        return BigUint::from(2u32);
    }
    let one = BigUint::one();
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m = 128u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0u64;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            // Backtrack one step at a time.
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
    }
    unreachable!("pollard rho exhausted all increments")
}

fn split_large(n: BigUint, out: &mut BTreeMap<BigUint, i64>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_brent(&n);
    let other = &n / &d;
    split_large(d, out);
    split_large(other, out);
}

/// Factor a positive integer into prime → exponent.
///
/// Trial division covers primes up to `min(sqrt(n), trial_cap)`; anything
/// left beyond that goes to Pollard rho.
pub fn factor_biguint(n: &BigUint, trial_cap: u64) -> BTreeMap<BigUint, i64> {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut out = BTreeMap::new();
    let mut rest = n.clone();

    let mut twos = 0i64;
    while rest.is_even() {
        rest >>= 1;
        twos += 1;
    }
    if twos > 0 {
        out.insert(BigUint::from(2u32), twos);
    }
    if rest.is_one() {
        return out;
    }

    let root = rest.sqrt();
    let bound = root.to_u64().unwrap_or(u64::MAX).min(trial_cap.max(3));
    let mut fully_trialled = false;
    with_primes_up_to(bound, |primes| {
        let mut small = rest.to_u64();
        for &p in primes.iter().skip(1) {
            let mut e = 0i64;
            match small.as_mut() {
                Some(r) => {
                    if u128::from(p) * u128::from(p) > u128::from(*r) {
                        fully_trialled = true;
                        break;
                    }
                    while *r % p == 0 {
                        *r /= p;
                        e += 1;
                    }
                }
                None => {
                    let pb = BigUint::from(p);
                    if &pb * &pb > rest {
                        fully_trialled = true;
                        break;
                    }
                    loop {
                        let (q, r) = rest.div_rem(&pb);
                        if !r.is_zero() {
                            break;
                        }
                        rest = q;
                        e += 1;
                    }
                    small = rest.to_u64();
                }
            }
            if e > 0 {
                out.insert(BigUint::from(p), e);
            }
        }
        if let Some(r) = small {
            rest = BigUint::from(r);
        }
    });
    if rest.is_one() {
        return out;
    }
    let bound_big = BigUint::from(bound);
    if fully_trialled || &bound_big * &bound_big >= rest {
        *out.entry(rest).or_insert(0) += 1;
        return out;
    }
    let mut large = BTreeMap::new();
    split_large(rest, &mut large);
    for (p, e) in large {
        *out.entry(p).or_insert(0) += e;
    }
    out
}
