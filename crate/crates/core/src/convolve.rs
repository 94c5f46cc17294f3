//! Deterministic parallel convolution of keyed tables.
//!
//! The left table is cut into fixed-size chunks independent of the thread
//! count; each chunk is joined against the right table in parallel and the
//! partial tables are merged in chunk order. Results are therefore
//! bit-identical for floating weights regardless of worker count.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::scalar::Scalar;

const CHUNK: usize = 16;

/// Values a table can carry: counts, real or rational weights, or nothing (sets).
pub trait Weight: Clone + Send + Sync {
    fn accumulate(&mut self, other: Self);
    fn times(&self, other: &Self) -> Self;
}

impl Weight for () {
    fn accumulate(&mut self, _: Self) {}
    fn times(&self, _: &Self) -> Self {}
}

impl Weight for BigUint {
    fn accumulate(&mut self, other: Self) {
        *self += other;
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

impl<S: Scalar> Weight for S {
    fn accumulate(&mut self, other: Self) {
        *self = self.clone() + other;
    }
    fn times(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
}

/// `out[op(a, b)] += left[a] · right[b]` over all pairs.
pub fn convolve<K, W, Op>(left: &BTreeMap<K, W>, right: &BTreeMap<K, W>, op: Op) -> BTreeMap<K, W>
where
    K: Ord + Clone + Send + Sync,
    W: Weight,
    Op: Fn(&K, &K) -> K + Sync,
{
    let entries: Vec<(&K, &W)> = left.iter().collect();
    let partials: Vec<BTreeMap<K, W>> = entries
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut local: BTreeMap<K, W> = BTreeMap::new();
            for (ka, wa) in chunk {
                for (kb, wb) in right {
                    let key = op(ka, kb);
                    let w = wa.times(wb);
                    match local.get_mut(&key) {
                        Some(slot) => slot.accumulate(w),
                        None => {
                            local.insert(key, w);
                        }
                    }
                }
            }
            local
        })
        .collect();
    let mut partials = partials.into_iter();
    let mut out = partials.next().unwrap_or_default();
    for part in partials {
        for (k, w) in part {
            match out.get_mut(&k) {
                Some(slot) => slot.accumulate(w),
                None => {
                    out.insert(k, w);
                }
            }
        }
    }
    out
}

/// The k-fold self-convolution built by balanced binary splitting
/// (`T_k = T_⌈k/2⌉ ⋆ T_⌊k/2⌋`), memoized per order.
pub fn power<K, W, Op>(base: &BTreeMap<K, W>, k: u32, op: &Op) -> BTreeMap<K, W>
where
    K: Ord + Clone + Send + Sync,
    W: Weight,
    Op: Fn(&K, &K) -> K + Sync,
{
    fn go<K, W, Op>(
        base: &BTreeMap<K, W>,
        k: u32,
        op: &Op,
        memo: &mut BTreeMap<u32, BTreeMap<K, W>>,
    ) -> BTreeMap<K, W>
    where
        K: Ord + Clone + Send + Sync,
        W: Weight,
        Op: Fn(&K, &K) -> K + Sync,
    {
        if k == 1 {
            return base.clone();
        }
        if let Some(t) = memo.get(&k) {
            return t.clone();
        }
        let hi = go(base, k.div_ceil(2), op, memo);
        let lo = if k / 2 == k.div_ceil(2) {
            hi.clone()
        } else {
            go(base, k / 2, op, memo)
        };
        let t = convolve(&hi, &lo, op);
        memo.insert(k, t.clone());
        t
    }
    assert!(k >= 1, "order must be positive");
    go(base, k, op, &mut BTreeMap::new())
}
