//! Acceptance run: one line per criterion, nonzero exit on any failure.
//!
//! Every criterion returns a deterministic report string; criterion 10
//! recomputes 1–9 on a one-thread and an eight-thread pool and compares them.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};
use rand::Rng;
use sumprod::dirichlet::{DirichletPolynomial, StepControl};
use sumprod::energy::{energy_bruteforce, energy_k, weighted_energy, weighted_energy_bruteforce, WeightVector};
use sumprod::generate::{ggp, ggp_subsets, positive_integer_sets, primes_set, rng, small_corpus, sunit_instances};
use sumprod::lambda::{lambda_lower_estimate, theorem_upper_bound, LambdaOptions, Regime};
use sumprod::structure::claim::ClaimContext;
use sumprod::structure::{
    canonical_affine_form, default_freiman_threshold, freiman_check, sign_pattern_decompose, valuation_image,
};
use sumprod::sunit::{coefficient, solve, solve_all_pairs, SUnitInstance};
use sumprod::{BigFraction, Budget, RationalSet};

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    summary: String,
    /// Full deterministic record, compared across thread counts.
    report: String,
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome {
        pass,
        report: summary.clone(),
        summary,
    }
}

fn budget() -> Budget {
    Budget::default()
}

fn frac(x: i64) -> BigFraction {
    BigFraction::from_integer(BigInt::from(x))
}

fn values(a: &RationalSet) -> Vec<BigFraction> {
    a.iter().map(|x| x.to_fraction()).collect()
}

/// All ordered k-fold combinations of `v` under `op`, as a set.
fn fold_set(v: &[BigFraction], k: u32, op: impl Fn(&BigFraction, &BigFraction) -> BigFraction) -> BTreeSet<BigFraction> {
    let mut acc: BTreeSet<BigFraction> = v.iter().cloned().collect();
    for _ in 1..k {
        acc = acc.iter().flat_map(|x| v.iter().map(|y| op(x, y)).collect::<Vec<_>>()).collect();
    }
    acc
}

/// Smallest integer K with |AA| ≤ K|A|, from plain fraction products.
fn doubling_k(a: &RationalSet) -> u64 {
    let n = a.len() as u64;
    let aa = fold_set(&values(a), 2, |x, y| x * y).len() as u64;
    aa.div_ceil(n)
}

fn pow(base: u64, e: u64) -> BigUint {
    Pow::pow(BigUint::from(base), e)
}

fn corpus() -> Vec<RationalSet> {
    let mut c = small_corpus(50, 6, SEED);
    c.extend(ggp_subsets(30, 12, SEED));
    c
}

fn oracle_equivalence() -> Outcome {
    let b = budget();
    let mut r = rng(SEED ^ 1);
    let mut checks = 0;
    let mut failures = Vec::new();
    for (i, a) in small_corpus(50, 6, SEED).iter().enumerate() {
        let v = values(a);
        for k in 1..=3u32 {
            let fast = energy_k(a, k, &b).unwrap();
            let slow = energy_bruteforce(a, k, &b).unwrap();
            let w: Vec<BigRational> = (0..a.len())
                .map(|_| BigRational::new(BigInt::from(r.random_range(0..=9)), BigInt::from(r.random_range(1..=7))))
                .collect();
            let w = WeightVector::new(w).unwrap();
            let wf = weighted_energy(a, k, &w, &b).unwrap();
            let ws = weighted_energy_bruteforce(a, k, &w, &b).unwrap();
            let prod: BTreeSet<BigFraction> = a.k_fold_product(k, &b).unwrap().iter().map(|x| x.to_fraction()).collect();
            let brute = fold_set(&v, k, |x, y| x * y);
            checks += 3;
            if fast != slow || wf != ws || prod != brute {
                failures.push(format!("set {i} k={k}"));
            }
        }
    }
    outcome(failures.is_empty(), format!("{checks} comparisons, failures {failures:?}"))
}

/// E_k(A+u) ≤ base^{kK}|A|^k, |(A+u)^(k)|·base^{kK} ≥ |A|^k and Λ_k(A+u) ≤ base^K.
fn sandwich(sets: &[RationalSet], shifts: &[i64], regime: Regime) -> Outcome {
    let b = budget();
    let opts = LambdaOptions {
        seed: SEED,
        ..LambdaOptions::default()
    };
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut detail = String::new();
    for (i, a) in sets.iter().enumerate() {
        let kk = doubling_k(a);
        for &u in shifts {
            let uf = frac(u);
            if regime.check(a, &uf).is_err() {
                failures.push(format!("set {i} u={u}: outside the regime"));
                continue;
            }
            let shifted = a.shift(&uf).unwrap();
            for k in [2u32, 3] {
                let base = match regime {
                    Regime::Integer => 2 * u64::from(k * k),
                    Regime::Rational => 8 * u64::from(k).pow(4),
                };
                let factor = pow(base, u64::from(k) * kk);
                let n_k = pow(a.len() as u64, u64::from(k));
                let e = energy_k(&shifted, k, &b).unwrap();
                let p = fold_set(&values(&shifted), k, |x, y| x * y).len();
                let bound = theorem_upper_bound(a, k, &uf, regime, &opts, &b).unwrap();
                let energy_ok = e <= &factor * &n_k;
                let product_ok = BigUint::from(p) * &factor >= n_k;
                cases += 1;
                let _ = write!(detail, "[{i},{u},{k}:E={e},P={p},L={:?}]", bound.lambda_lower);
                if !(energy_ok && product_ok && bound.pass) {
                    failures.push(format!("set {i} u={u} k={k}"));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        summary: format!("{cases} cases, failures {failures:?}"),
        report: detail,
    }
}

fn main_theorem() -> Outcome {
    sandwich(&ggp_subsets(30, 12, SEED), &[1], Regime::Rational)
}

fn integer_case() -> Outcome {
    sandwich(&positive_integer_sets(&[2, 3, 7], 30, 12, SEED), &[1, 5], Regime::Integer)
}

fn chang_bound() -> Outcome {
    let b = budget();
    let mut failures = Vec::new();
    let sets = corpus();
    for (i, a) in sets.iter().enumerate() {
        let kk = doubling_k(a);
        let sums = a.k_fold_sumset(2, &b).unwrap();
        let size = sums.set.len() + usize::from(!sums.zero_count.is_zero());
        let brute = fold_set(&values(a), 2, |x, y| x + y).len();
        let ok = size == brute && BigUint::from(size) * pow(6, 2 * kk) >= pow(a.len() as u64, 2);
        if !ok {
            failures.push(i);
        }
    }
    outcome(failures.is_empty(), format!("{} sets, failures {failures:?}", sets.len()))
}

fn lambda_closed_form() -> Outcome {
    let b = budget();
    let opts = LambdaOptions {
        seed: SEED,
        ..LambdaOptions::default()
    };
    let mut worst_value = 0f64;
    let mut worst_witness = 0f64;
    let mut detail = String::new();
    for n in 2..=8usize {
        let primes = primes_set(n);
        let mixed = RationalSet::new(primes.iter().enumerate().map(|(i, p)| if i % 2 == 1 { p.inv() } else { p.pow(2) }));
        for a in [primes, mixed] {
            let est = lambda_lower_estimate::<f64>(&a, 2, &opts, &b).unwrap();
            let target = (2.0 - 1.0 / n as f64).sqrt();
            let coord = 1.0 / (n as f64).sqrt();
            worst_value = worst_value.max((est.value - target).abs());
            for w in est.witness.weights() {
                worst_witness = worst_witness.max((w - coord).abs());
            }
            let _ = write!(detail, "[{n}:{:?}]", est.value);
        }
    }
    Outcome {
        pass: worst_value <= 1e-6 && worst_witness <= 1e-4,
        summary: format!("max |value - target| {worst_value:.2e}, max witness deviation {worst_witness:.2e}"),
        report: detail,
    }
}

fn dirichlet_convergence() -> Outcome {
    let b = budget();
    let ts = [10.0, 100.0, 1000.0];
    let mut pass = true;
    let mut detail = String::new();
    for (lits, k) in [(vec![2, 3], 1u32), (vec![2, 4, 8], 2)] {
        let a = RationalSet::from_i64s(&lits).unwrap();
        let f = DirichletPolynomial::<f64>::build(&a, &WeightVector::uniform(a.len()), &BigFraction::zero()).unwrap();
        let report = f.convergence_report(k, &ts, StepControl::default(), &b).unwrap();
        let rel = report.relative_error_at(1000.0).unwrap();
        let slope = report.slope.unwrap_or(f64::NEG_INFINITY);
        pass &= rel <= 0.02 && slope <= -0.5;
        let _ = write!(detail, "{lits:?} k={k}: rel err at 1000 {rel:.3e}, slope {slope:.3}; ");
    }
    outcome(pass, detail)
}

fn claim_checker() -> Outcome {
    let b = budget();
    let mut groups = 0;
    let mut collisions = 0;
    let mut violations = 0;
    for a in ggp_subsets(200, 12, SEED ^ 7) {
        let ctx = ClaimContext::new(&a).unwrap();
        for (i, g) in ctx.decomposition().groups.iter().enumerate() {
            if !(2..=4).contains(&g.members.len()) || groups == 20 {
                continue;
            }
            let r = ctx.check_group(i, 2, &b).unwrap();
            groups += 1;
            collisions += r.collisions;
            violations += r.violation_count;
        }
        if groups == 20 {
            break;
        }
    }
    let pass = groups == 20 && violations == 0;
    outcome(pass, format!("{groups} groups, {collisions} collisions, {violations} violations"))
}

fn sunit_counts() -> Outcome {
    let b = budget();
    let mut detail = String::new();
    let one = coefficient(1).unwrap();
    let mut pass = true;
    for (h, expected) in [(2, 5), (3, 7)] {
        let inst = SUnitInstance::new(vec![2, 3], h, one.clone(), one.clone()).unwrap();
        let count = solve(&inst, &b).unwrap().count;
        pass &= count == expected;
        let _ = write!(detail, "H={h}: {count} solutions; ");
    }
    let mut agree = 0;
    let instances = sunit_instances(10, 10_000, SEED);
    for inst in &instances {
        let fast = solve(inst, &b).unwrap();
        let slow = solve_all_pairs(inst, &b).unwrap();
        if fast.pairs == slow.pairs && fast.recheck().is_empty() {
            agree += 1;
        }
        let _ = write!(detail, "[|S|={} n={}]", inst.size(), fast.count);
    }
    pass &= agree == instances.len();
    let summary = format!("{}oracle agrees on {agree}/{} random instances", &detail[..detail.find('[').unwrap()], instances.len());
    Outcome {
        pass,
        summary,
        report: detail,
    }
}

fn large_ggps() -> Vec<RationalSet> {
    vec![
        ggp(&[2], &[(0, 15)]).unwrap(),
        ggp(&[3], &[(-10, 10)]).unwrap(),
        ggp(&[2, 3], &[(0, 7), (0, 7)]).unwrap(),
        ggp(&[2, 3, 5], &[(0, 4), (0, 4), (0, 4)]).unwrap(),
    ]
}

fn is_partition(vectors: &[Vec<i64>]) -> bool {
    let d = sign_pattern_decompose(vectors).unwrap();
    let mut seen = vec![0; vectors.len()];
    for g in &d.groups {
        for &m in &g.members {
            let v = &vectors[m];
            let subset: Vec<usize> = (0..v.len()).filter(|&i| v[i] >= 0).collect();
            let key: Vec<i64> = subset.iter().map(|&i| v[i]).collect();
            if subset != g.subset || key != g.key {
                return false;
            }
            seen[m] += 1;
        }
    }
    seen.iter().all(|&c| c == 1)
}

fn structural_invariants() -> Outcome {
    let mut r = rng(SEED ^ 9);
    let mut bad_partitions = 0;
    for _ in 0..1000 {
        let dim = r.random_range(1..=4);
        let len = r.random_range(1..=24);
        let j: Vec<Vec<i64>> = (0..len).map(|_| (0..dim).map(|_| r.random_range(-3..=3)).collect()).collect();
        if !is_partition(&j) {
            bad_partitions += 1;
        }
    }
    let mut sets = corpus();
    sets.extend(positive_integer_sets(&[2, 3, 7], 30, 12, SEED));
    sets.extend(large_ggps());
    let (mut bad_forms, mut bad_minkowski, mut bad_dimension, mut applicable) = (0, 0, 0, 0);
    for a in &sets {
        let image = valuation_image(a).unwrap();
        let form = canonical_affine_form(&image).unwrap();
        for row in &image.rows {
            let exact: Vec<BigRational> = row.iter().map(|&x| BigRational::from_integer(x.into())).collect();
            if form.reconstruct(&form.project(row)) != exact {
                bad_forms += 1;
            }
        }
        let paa: BTreeSet<Vec<i64>> = fold_set(&values(a), 2, |x, y| x * y)
            .iter()
            .map(|x| image.basis.iter().map(|p| valuation(x, p)).collect())
            .collect();
        let sum: BTreeSet<Vec<i64>> = image
            .rows
            .iter()
            .flat_map(|x| image.rows.iter().map(move |y| x.iter().zip(y).map(|(s, t)| s + t).collect()))
            .collect();
        if paa != sum {
            bad_minkowski += 1;
        }
        let f = freiman_check(a, default_freiman_threshold).unwrap();
        if a.len() as u64 >= default_freiman_threshold(doubling_k(a)) {
            applicable += 1;
            if f.dimension as u64 > doubling_k(a) {
                bad_dimension += 1;
            }
        }
    }
    let pass = bad_partitions == 0 && bad_forms == 0 && bad_minkowski == 0 && bad_dimension == 0 && applicable > 0;
    outcome(
        pass,
        format!(
            "partition failures {bad_partitions}/1000, form failures {bad_forms}, P(AA) failures {bad_minkowski}, \
             dimension failures {bad_dimension} ({applicable} of {} sets above 2K(K+1))",
            sets.len()
        ),
    )
}

/// v_p(x) by repeated division.
fn valuation(x: &BigFraction, p: &BigUint) -> i64 {
    let p = BigInt::from(p.clone());
    let mut e = 0;
    for (part, sign) in [(x.numer().abs(), 1), (x.denom().clone(), -1)] {
        let mut n = part;
        while (&n % &p).is_zero() {
            n /= &p;
            e += sign;
        }
    }
    e
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

const CRITERIA: [Criterion; 9] = [
    ("oracle equivalence", oracle_equivalence, Some(Duration::from_secs(60))),
    ("rational-case sandwich", main_theorem, Some(Duration::from_secs(300))),
    ("integer-case bound", integer_case, None),
    ("Chang additive bound", chang_bound, None),
    ("Λ₂ closed form", lambda_closed_form, None),
    ("Dirichlet convergence", dirichlet_convergence, Some(Duration::from_secs(120))),
    ("claim checker", claim_checker, None),
    ("S-unit counts", sunit_counts, None),
    ("structural invariants", structural_invariants, None),
];

fn run_all(threads: usize) -> Vec<(Outcome, Duration)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        CRITERIA
            .iter()
            .map(|(_, f, _)| {
                let start = Instant::now();
                let o = f();
                (o, start.elapsed())
            })
            .collect()
    })
}

fn main() -> ExitCode {
    let single = run_all(1);
    let multi = run_all(8);
    let mut all_pass = true;
    for (i, ((name, _, limit), (o, elapsed))) in CRITERIA.iter().zip(&multi).enumerate() {
        let in_time = limit.is_none_or(|l| *elapsed <= l);
        let pass = o.pass && in_time;
        all_pass &= pass;
        println!(
            "criterion {:>2} {:<24} {}  ({:.1}s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            o.summary
        );
    }
    let differing: Vec<usize> = single
        .iter()
        .zip(&multi)
        .enumerate()
        .filter(|(_, ((a, _), (b, _)))| a.report != b.report || a.pass != b.pass)
        .map(|(i, _)| i + 1)
        .collect();
    let pass = differing.is_empty();
    all_pass &= pass;
    println!(
        "criterion 10 {:<24} {}  reports at 1 and 8 threads differ for criteria {differing:?}",
        "determinism",
        if pass { "PASS" } else { "FAIL" }
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
