//! Scalar abstraction shared by weighted energies, the sphere optimizer and
//! the mean-value quadrature.
//!
//! Floating types accumulate with Neumaier compensation; exact rationals sum
//! directly.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Num + Send + Sync + 'static {
    /// Sum a sequence, compensated for floating types.
    fn sum_all<I: IntoIterator<Item = Self>>(iter: I) -> Self;

    fn to_f64(&self) -> f64;

    /// Lossless for floats of the same width; exact dyadic value for rationals.
    fn from_f64(x: f64) -> Option<Self>;

    fn from_ratio(r: &BigRational) -> Self;

    fn is_nonnegative(&self) -> bool {
        *self >= Self::zero()
    }
}

fn neumaier<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl Scalar for f64 {
    fn sum_all<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        neumaier(iter)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }

    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
}

impl Scalar for f32 {
    fn sum_all<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        neumaier(iter.into_iter().map(f64::from)) as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn from_f64(x: f64) -> Option<Self> {
        Some(x as f32)
    }

    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }
}

impl Scalar for BigRational {
    fn sum_all<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().fold(BigRational::zero(), |acc, x| acc + x)
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Nearest-ish f64 of a big rational, robust to numerators and denominators
/// that overflow f64 on their own.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both to ~64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 64).max(0);
    let shift_d = (db - 64).max(0);
    let n: BigInt = r.numer() >> shift_n as usize;
    let d: BigInt = r.denom() >> shift_d as usize;
    let q = n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0);
    q * 2f64.powi((shift_n - shift_d) as i32)
}
