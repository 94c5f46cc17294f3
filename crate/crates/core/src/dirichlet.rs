//! Dirichlet polynomials f(t) = Σ w_n n^{it} and the finite-T mean values
//! (1/T)∫₀ᵀ |f(t)|^{2k} dt, whose limit is the weighted energy E_{k,w}.
//!
//! Quadrature is composite Simpson on a grid fine enough for the fastest
//! oscillation of |f|^{2k}. Samples are summed in fixed-size chunks in a fixed
//! order, so results do not depend on the thread count.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_traits::{Float, FromPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::energy::{weighted_energy, WeightVector};
use crate::error::{Error, Result};
use crate::rational::log::ln_abs;
use crate::rational::{fraction_string, BigFraction, FactoredRational};
use crate::scalar::Scalar;
use crate::set::RationalSet;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletTerm<F> {
    pub coefficient: F,
    /// log|value|, rounded from a 160-bit fixed-point logarithm.
    pub frequency: F,
    /// The rational n before the shift.
    pub source: FactoredRational,
    /// n + u, the base of the term.
    pub value: FactoredRational,
}

/// Membership tag for the families F_{p,j,u}: every source n has v_p(n) = j.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyTag {
    pub p: u64,
    pub j: i64,
    pub u: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletPolynomial<F> {
    terms: Vec<DirichletTerm<F>>,
    family: Option<FamilyTag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepControl {
    /// Samples per period of the fastest oscillation; at least 8.
    pub samples_per_period: u32,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { samples_per_period: 16 }
    }
}

impl StepControl {
    /// Same rule with twice the density, for refinement checks.
    pub fn refined(self) -> Self {
        StepControl {
            samples_per_period: self.samples_per_period * 2,
        }
    }
}

impl<F: Float + Scalar + FromPrimitive> DirichletPolynomial<F> {
    /// Terms w_a (a+u)^{it} for a ∈ A.
    pub fn build(a: &RationalSet, w: &WeightVector<F>, u: &BigFraction) -> Result<Self> {
        if w.len() != a.len() {
            return Err(Error::Precondition(format!("{} weights for a set of size {}", w.len(), a.len())));
        }
        let terms = a
            .iter()
            .zip(w.weights())
            .map(|(x, &c)| {
                let value = x.add_shift(u).map_err(|_| {
                    Error::Domain(format!("{} + {} is zero", fraction_string(&x.to_fraction()), fraction_string(u)))
                })?;
                Ok((c, x.clone(), value))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::merged(terms))
    }

    /// Terms from (coefficient, value) pairs; equal values are merged by
    /// adding their coefficients.
    pub fn from_terms<I: IntoIterator<Item = (F, FactoredRational)>>(terms: I) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(c, v)| {
                if !c.is_nonnegative() {
                    return Err(Error::Domain(format!("coefficient of {v} is negative")));
                }
                Ok((c, v.clone(), v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::merged(terms))
    }

    fn merged(mut raw: Vec<(F, FactoredRational, FactoredRational)>) -> Self {
        raw.sort_by(|x, y| x.2.cmp_value(&y.2));
        let mut terms: Vec<DirichletTerm<F>> = Vec::with_capacity(raw.len());
        for (c, source, value) in raw {
            if let Some(last) = terms.last_mut() {
                if last.value.cmp_value(&value) == Ordering::Equal {
                    last.coefficient = last.coefficient + c;
                    continue;
                }
            }
            let frequency = <F as Scalar>::from_f64(ln_abs(&value.to_fraction())).expect("finite logarithm");
            terms.push(DirichletTerm {
                coefficient: c,
                frequency,
                source,
                value,
            });
        }
        DirichletPolynomial { terms, family: None }
    }

    /// Attach the tag (p, j, u) after checking v_p(n) = j for every source n.
    pub fn with_family(mut self, p: u64, j: i64, u: &BigFraction) -> Result<Self> {
        for t in &self.terms {
            let v = t.source.valuation_u64(p);
            if v != j {
                return Err(Error::Domain(format!("v_{p}({}) = {v}, expected {j}", t.source)));
            }
        }
        self.family = Some(FamilyTag {
            p,
            j,
            u: fraction_string(u),
        });
        Ok(self)
    }

    pub fn terms(&self) -> &[DirichletTerm<F>] {
        &self.terms
    }

    pub fn family(&self) -> Option<&FamilyTag> {
        self.family.as_ref()
    }

    /// (Re f(t), Im f(t)).
    pub fn eval(&self, t: F) -> (F, F) {
        let re = F::sum_all(self.terms.iter().map(|x| x.coefficient * (x.frequency * t).cos()));
        let im = F::sum_all(self.terms.iter().map(|x| x.coefficient * (x.frequency * t).sin()));
        (re, im)
    }

    fn values_set(&self) -> (RationalSet, WeightVector<F>) {
        let set = RationalSet::new(self.terms.iter().map(|t| t.value.clone()));
        let weights = set
            .iter()
            .map(|v| {
                let t = self.terms.iter().find(|t| t.value == *v).expect("same values");
                t.coefficient
            })
            .collect();
        (set, WeightVector::new(weights).expect("nonnegative coefficients"))
    }

    /// The T → ∞ limit: the weighted energy of the values with the
    /// coefficients as weights.
    pub fn exact_mean_value(&self, k: u32, budget: &Budget) -> Result<F> {
        let (set, w) = self.values_set();
        weighted_energy(&set, k, &w, budget)
    }

    /// Number of Simpson intervals (even) for the given horizon.
    pub fn intervals(&self, k: u32, t: F, step: StepControl) -> u128 {
        let (lo, hi) = self.terms.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), x| {
            (lo.min(x.frequency), hi.max(x.frequency))
        });
        let spread = hi - lo;
        if self.terms.len() < 2 || spread <= F::zero() {
            return 2;
        }
        let omega = F::from_u32(2 * k).unwrap() * spread;
        let periods = Scalar::to_f64(&t) * Scalar::to_f64(&omega) / std::f64::consts::TAU;
        let n = (periods * f64::from(step.samples_per_period.max(8))).ceil().max(2.0) as u128;
        n + (n & 1)
    }

    /// (1/T) ∫₀ᵀ |f(t)|^{2k} dt by composite Simpson.
    pub fn mean_value_2k(&self, k: u32, t: F, step: StepControl, budget: &Budget) -> Result<F> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        if !(t > F::zero()) || !t.is_finite() {
            return Err(Error::Precondition("T must be positive and finite".into()));
        }
        if let Some(x) = self.terms.iter().find(|x| !x.value.is_positive()) {
            return Err(Error::Domain(format!(
                "numeric mean values need positive values; {} is negative (use the exact mean value)",
                x.value
            )));
        }
        match self.terms.len() {
            0 => return Ok(F::zero()),
            1 => return Ok(self.terms[0].coefficient.powi(2 * k as i32)),
            _ => {}
        }
        let n = self.intervals(k, t, step);
        budget
            .check_samples("mean-value quadrature", n + 1)
            .map_err(|e| match e {
                Error::Budget { what, needed, cap } => Error::Budget {
                    what: format!("{what} (reduce T or k)"),
                    needed,
                    cap,
                },
                e => e,
            })?;
        let n = n as usize;
        let h = t / F::from_usize(n).unwrap();
        let (two, four) = (F::from_u32(2).unwrap(), F::from_u32(4).unwrap());
        let chunks: Vec<F> = (0..=n)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                F::sum_all(chunk.iter().map(|&i| {
                    let (re, im) = self.eval(h * F::from_usize(i).unwrap());
                    let v = (re * re + im * im).powi(k as i32);
                    let c = if i == 0 || i == n {
                        F::one()
                    } else if i % 2 == 1 {
                        four
                    } else {
                        two
                    };
                    c * v
                }))
            })
            .collect();
        let integral = F::sum_all(chunks) * h / F::from_u32(3).unwrap();
        Ok(integral / t)
    }

    pub fn convergence_report(&self, k: u32, t_list: &[F], step: StepControl, budget: &Budget) -> Result<ConvergenceReport> {
        let exact = Scalar::to_f64(&self.exact_mean_value(k, budget)?);
        let rows = t_list
            .iter()
            .map(|&t| {
                let numeric = Scalar::to_f64(&self.mean_value_2k(k, t, step, budget)?);
                Ok(ConvergenceRow {
                    t: Scalar::to_f64(&t),
                    numeric,
                    exact,
                    abs_error: (numeric - exact).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceReport::new(k, rows))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub numeric: f64,
    pub exact: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub k: u32,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log(error) against log(T); absent when fewer
    /// than two rows have a nonzero error.
    pub slope: Option<f64>,
    /// Slope ≤ 0, or no error to fit.
    pub non_increasing: bool,
}

impl ConvergenceReport {
    fn new(k: u32, rows: Vec<ConvergenceRow>) -> Self {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.abs_error > 0.0)
            .map(|r| (r.t.ln(), r.abs_error.ln()))
            .collect();
        let slope = fit_slope(&pts);
        ConvergenceReport {
            k,
            non_increasing: slope.is_none_or(|s| s <= 0.0),
            rows,
            slope,
        }
    }

    pub fn relative_error_at(&self, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.t == t).map(|r| r.abs_error / r.exact.abs())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("T,numeric,exact,abs_error\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.t, r.numeric, r.exact, r.abs_error);
        }
        s
    }

    /// Whitespace-separated columns with a comment header, for gnuplot.
    pub fn to_gnuplot(&self) -> String {
        let mut s = format!("# k = {}\n# T numeric exact abs_error\n", self.k);
        for r in &self.rows {
            let _ = writeln!(s, "{} {} {} {}", r.t, r.numeric, r.exact, r.abs_error);
        }
        s
    }
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    type P = DirichletPolynomial<f64>;

    fn set(v: &[i64]) -> RationalSet {
        RationalSet::from_i64s(v).unwrap()
    }

    fn uniform(a: &RationalSet) -> P {
        P::build(a, &WeightVector::uniform(a.len()), &BigFraction::zero()).unwrap()
    }

    #[test]
    fn build_frequencies() {
        let f = uniform(&set(&[2, 3]));
        let fr: Vec<f64> = f.terms().iter().map(|t| t.frequency).collect();
        assert_eq!(fr, vec![2f64.ln(), 3f64.ln()]);
        assert_eq!(uniform(&set(&[1])).terms()[0].frequency, 0.0);
        let g = P::build(&set(&[2, 4, 8]), &WeightVector::uniform(3), &BigFraction::from_integer(1.into())).unwrap();
        let fr: Vec<f64> = g.terms().iter().map(|t| t.frequency).collect();
        assert_eq!(fr, vec![3f64.ln(), 5f64.ln(), 9f64.ln()]);
        assert_eq!(g.terms()[2].source.to_string(), "2^3");
    }

    #[test]
    fn zero_value_is_rejected() {
        let e = P::build(&set(&[1, 2]), &WeightVector::uniform(2), &BigFraction::from_integer((-1).into()));
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn negative_values_only_exact() {
        let f = P::build(&set(&[2, 3]), &WeightVector::uniform(2), &BigFraction::new((-5).into(), 2.into())).unwrap();
        assert!(matches!(f.mean_value_2k(1, 10.0, StepControl::default(), &Budget::default()), Err(Error::Domain(_))));
        assert!((f.exact_mean_value(1, &Budget::default()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_term_is_exact() {
        let f = P::from_terms([(0.7, FactoredRational::from_i64(5).unwrap())]).unwrap();
        for k in 1..4 {
            for t in [0.5, 10.0, 1e5] {
                let m = f.mean_value_2k(k, t, StepControl::default(), &Budget::default()).unwrap();
                assert!((m / 0.7f64.powi(2 * k as i32) - 1.0).abs() < 1e-15);
            }
        }
        let r = f.convergence_report(2, &[10.0, 100.0], StepControl::default(), &Budget::default()).unwrap();
        assert!(r.rows.iter().all(|x| x.abs_error == 0.0));
        assert!(r.slope.is_none() && r.non_increasing);
    }

    #[test]
    fn equal_values_merge() {
        let three = FactoredRational::from_i64(3).unwrap();
        let f = P::from_terms([(0.25, three.clone()), (0.5, three)]).unwrap();
        assert_eq!(f.terms().len(), 1);
        let m = f.mean_value_2k(2, 50.0, StepControl::default(), &Budget::default()).unwrap();
        assert!((m / 0.75f64.powi(4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_three_k1_converges() {
        let f = uniform(&set(&[2, 3]));
        let m = f.mean_value_2k(1, 1000.0, StepControl::default(), &Budget::default()).unwrap();
        assert!((m - 1.0).abs() < 0.02);
        let r = f.convergence_report(1, &[10.0, 100.0, 1000.0], StepControl::default(), &Budget::default()).unwrap();
        assert!(r.slope.unwrap() < -0.5);
        assert!(r.to_csv().starts_with("T,numeric,exact,abs_error\n10,"));
    }

    #[test]
    fn mean_value_against_closed_form() {
        // |w1 2^{it} + w2 3^{it}|² = 1 + 2w1w2 cos(t log(3/2)); mean has a closed form
        let f = uniform(&set(&[2, 3]));
        let t = 37.0f64;
        let c = (1.5f64).ln();
        let expect = 1.0 + (c * t).sin() / (c * t);
        let fine = StepControl { samples_per_period: 64 };
        let m = f.mean_value_2k(1, t, fine, &Budget::default()).unwrap();
        assert!((m - expect).abs() < 1e-8, "{m} vs {expect}");
    }

    #[test]
    fn refinement_is_stable() {
        let f = uniform(&set(&[2, 4, 8]));
        let s = StepControl::default();
        let a = f.mean_value_2k(2, 1000.0, s, &Budget::default()).unwrap();
        let b = f.mean_value_2k(2, 1000.0, s.refined(), &Budget::default()).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn budget_is_enforced() {
        let f = uniform(&set(&[2, 3, 5]));
        let tiny = Budget { max_samples: 100, ..Budget::default() };
        let e = f.mean_value_2k(2, 1000.0, StepControl::default(), &tiny).unwrap_err();
        assert!(e.is_budget() && e.to_string().contains("reduce T or k"));
    }

    #[test]
    fn family_tags() {
        let a = RationalSet::from_literals(&["2", "6", "10/3"]).unwrap();
        let u = BigFraction::from_integer(3.into());
        let f = P::build(&a, &WeightVector::ones(3), &u).unwrap().with_family(2, 1, &u).unwrap();
        assert_eq!(f.family().unwrap().j, 1);
        let bad = P::build(&set(&[2, 4]), &WeightVector::ones(2), &u).unwrap();
        assert!(bad.with_family(2, 1, &u).is_err());
    }

    #[test]
    fn exact_values() {
        let b = Budget::default();
        assert!((uniform(&set(&[2, 3])).exact_mean_value(1, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!((uniform(&set(&[2, 4, 8])).exact_mean_value(2, &b).unwrap() - 19.0 / 9.0).abs() < 1e-12);
        assert!((uniform(&set(&[2, 3, 5])).exact_mean_value(2, &b).unwrap() - 5.0 / 3.0).abs() < 1e-12);
    }
}
