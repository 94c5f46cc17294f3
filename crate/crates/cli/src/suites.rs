use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use serde_json::{json, Value};
use sumprod::dirichlet::{DirichletPolynomial, StepControl};
use sumprod::energy::{additive_energy_k, energy_bruteforce, energy_k, gamma_k, weighted_energy, WeightVector};
use sumprod::lambda::{
    lambda_lower_estimate, subset_stability_check, theorem_upper_bound, verify_bounds, LambdaOptions, Regime,
};
use sumprod::structure::{
    canonical_affine_form, default_freiman_threshold, freiman_check, mult_dimension, sign_pattern_decompose,
    valuation_image, ClaimContext,
};
use sumprod::sunit::{bound_diagnostic, solve, solve_all_pairs, SUnitInstance};
use sumprod::{BigFraction, Budget, Error, FactoredRational, RationalSet};

use crate::args::{LambdaArgs, RegimeArg, SetArgs, Suite};
use crate::CliError;

/// What a suite hands back for writing.
pub struct SuiteOutput {
    pub name: &'static str,
    pub json: Value,
    pub csv: String,
    pub summary: String,
    pub pass: bool,
    pub counterexample: Option<Value>,
    pub extra_files: Vec<(String, String)>,
}

fn schema(name: &str) -> String {
    format!("sumprod.{name}/v1")
}

pub fn load_set(path: &Path) -> Result<RationalSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    RationalSet::parse_set_file(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_fraction(s: &str) -> Result<BigFraction, CliError> {
    s.trim()
        .parse::<BigFraction>()
        .map_err(|e| CliError::Usage(format!("bad rational {s:?}: {e}")))
}

fn shift_of(args: &SetArgs, default: &str) -> Result<BigFraction, CliError> {
    parse_fraction(args.shift.as_deref().unwrap_or(default))
}

fn lambda_opts(opts: &LambdaArgs, seed: u64) -> LambdaOptions {
    LambdaOptions {
        restarts: opts.restarts,
        max_iters: opts.max_iters,
        tol: opts.tol,
        seed,
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn run(suite: &Suite, budget: &Budget, seed: u64) -> Result<SuiteOutput, CliError> {
    match suite {
        Suite::Energy { set, no_oracle } => energy(set, *no_oracle, budget),
        Suite::Lambda { set, opts } => lambda(set, opts, budget, seed),
        Suite::Bounds {
            set,
            opts,
            regime,
            samples,
        } => bounds(set, opts, *regime, *samples, budget, seed),
        Suite::Dirichlet {
            set,
            t_list,
            samples_per_period,
            plot,
        } => dirichlet(set, t_list, *samples_per_period, *plot, budget),
        Suite::Sunit { primes, height, c1, c2 } => sunit(primes, *height, c1, c2, budget),
        Suite::Claim { set, group } => claim(set, *group, budget),
        Suite::Dimension { set } => dimension(set),
    }
}

fn shifted_set(args: &SetArgs) -> Result<RationalSet, CliError> {
    let a = load_set(&args.set)?;
    match &args.shift {
        Some(_) => Ok(a.shift(&shift_of(args, "0")?)?),
        None => Ok(a),
    }
}

fn energy(args: &SetArgs, no_oracle: bool, budget: &Budget) -> Result<SuiteOutput, CliError> {
    let a = shifted_set(args)?;
    let k = args.k;
    let gamma = gamma_k(&a, k, budget)?;
    let e = energy_k(&a, k, budget)?;
    let additive = match additive_energy_k(&a, k, budget) {
        Ok(x) => Some(x.to_string()),
        Err(err) if err.is_budget() => None,
        Err(err) => return Err(err.into()),
    };
    let oracle = if no_oracle || budget.check_tuples("oracle", a.len(), 2 * k).is_err() {
        None
    } else {
        Some(energy_bruteforce(&a, k, budget)?)
    };
    let oracle_agrees = oracle.as_ref().is_none_or(|o| *o == e);
    // Cauchy–Schwarz: |A|^{2k} ≤ E_k(A)·|A^(k)|
    let cs = BigUint::from(a.len()).pow(2 * k) <= &e * BigUint::from(gamma.len());
    let pass = oracle_agrees && cs;
    let json = json!({
        "schema": schema("energy"),
        "set": a.to_string(),
        "set_size": a.len(),
        "k": k,
        "energy": e.to_string(),
        "additive_energy": additive,
        "product_set_size": gamma.len(),
        "oracle_energy": oracle.as_ref().map(|o| o.to_string()),
        "oracle_agrees": oracle_agrees,
        "cauchy_schwarz_holds": cs,
        "pass": pass,
    });
    let mut summary = format!("E_{k}(A) = {e}\n|A^({k})| = {}\n", gamma.len());
    if let Some(x) = &additive {
        let _ = writeln!(summary, "E_{k}^+(A) = {x}");
    }
    if let Some(o) = &oracle {
        let _ = writeln!(summary, "oracle: {o} ({})", if oracle_agrees { "agrees" } else { "DISAGREES" });
    }
    Ok(SuiteOutput {
        name: "energy",
        counterexample: (!pass).then(|| json.clone()),
        json,
        csv: gamma.to_csv(),
        summary,
        pass,
        extra_files: Vec::new(),
    })
}

fn lambda(args: &SetArgs, opts: &LambdaArgs, budget: &Budget, seed: u64) -> Result<SuiteOutput, CliError> {
    let a = shifted_set(args)?;
    let k = args.k;
    let est = lambda_lower_estimate::<f64>(&a, k, &lambda_opts(opts, seed), budget)?;
    let re = weighted_energy(&a, k, &est.witness, budget)?;
    let rel = (re - est.value.powi(k as i32)).abs() / re.max(f64::MIN_POSITIVE);
    let norm_err = (est.witness.norm_sq() - 1.0).abs();
    let pass = rel <= 1e-9 && norm_err <= 1e-12;
    let json = json!({
        "schema": schema("lambda"),
        "set": a.to_string(),
        "estimate": to_value(&est),
        "witness_relative_error": rel,
        "witness_norm_error": norm_err,
        "pass": pass,
    });
    let mut csv = String::from("element,weight\n");
    for (x, w) in a.iter().zip(est.witness.weights()) {
        let _ = writeln!(csv, "{x},{w}");
    }
    let mut summary = format!(
        "Λ_{k}(A) ≥ {}\nrestarts {}, best restart {}, iterations {}, converged {}\n",
        est.value, est.restarts_used, est.best_restart, est.iterations, est.converged
    );
    let _ = writeln!(summary, "{:>24}  weight", "element");
    for (x, w) in a.iter().zip(est.witness.weights()) {
        let _ = writeln!(summary, "{:>24}  {w:.12}", x.to_string());
    }
    Ok(SuiteOutput {
        name: "lambda",
        counterexample: (!pass).then(|| json.clone()),
        json,
        csv,
        summary,
        pass,
        extra_files: Vec::new(),
    })
}

fn bounds(
    args: &SetArgs,
    opts: &LambdaArgs,
    regime: RegimeArg,
    samples: usize,
    budget: &Budget,
    seed: u64,
) -> Result<SuiteOutput, CliError> {
    let a = load_set(&args.set)?;
    let k = args.k;
    let u = shift_of(args, "1")?;
    let regime = match regime {
        RegimeArg::Auto => Regime::detect(&a, &u),
        RegimeArg::Integer => Regime::Integer,
        RegimeArg::Rational => Regime::Rational,
    };
    let bound = theorem_upper_bound(&a, k, &u, regime, &lambda_opts(opts, seed), budget)?;
    let verify = verify_bounds(&a, k, &u, budget)?;
    let stability = subset_stability_check(&a, k, &u, samples, seed, budget)?;
    let pass = bound.pass && verify.pass && stability.pass;
    let json = json!({
        "schema": schema("bounds"),
        "set": a.to_string(),
        "bound": to_value(&bound),
        "verify": to_value(&verify),
        "stability": to_value(&stability),
        "pass": pass,
    });
    let mut csv = String::from("check,lhs,relation,rhs,holds\n");
    for c in &verify.checks {
        let _ = writeln!(csv, "\"{}\",{},{},{},{}", c.name, c.lhs, c.relation, c.rhs, c.holds);
    }
    let mut summary = format!(
        "regime {}, K = {}, shift {}\nΛ_{k}(A+u) ≥ {}  vs  bound {}  [{}]\n",
        bound.regime,
        bound.k_integer,
        bound.shift,
        bound.lambda_lower,
        bound.theorem_upper,
        verdict(bound.pass)
    );
    for c in &verify.checks {
        let _ = writeln!(summary, "{:<48} {}", c.name, verdict(c.holds));
    }
    for s in &verify.skipped {
        let _ = writeln!(summary, "skipped: {s}");
    }
    let _ = writeln!(
        summary,
        "stability: {} subsets, max E^(1/k)/|A'| = {}  [{}]",
        stability.cases.len(),
        stability.max_ratio,
        verdict(stability.pass)
    );
    let counterexample = (!pass).then(|| {
        json!({
            "schema": schema("bounds-counterexample"),
            "set": a.to_string(),
            "bound": if bound.pass { Value::Null } else { to_value(&bound) },
            "failed_checks": verify.checks.iter().filter(|c| !c.holds).map(to_value).collect::<Vec<_>>(),
            "failed_subsets": stability.cases.iter().filter(|c| !c.holds).map(to_value).collect::<Vec<_>>(),
        })
    });
    Ok(SuiteOutput {
        name: "bounds",
        json,
        csv,
        summary,
        pass,
        counterexample,
        extra_files: Vec::new(),
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn dirichlet(args: &SetArgs, t_list: &[f64], spp: u32, plot: bool, budget: &Budget) -> Result<SuiteOutput, CliError> {
    let a = load_set(&args.set)?;
    let k = args.k;
    let u = shift_of(args, "0")?;
    if spp < 8 {
        return Err(CliError::Usage("--samples-per-period must be at least 8".into()));
    }
    if a.is_empty() {
        return Err(CliError::Usage("the set is empty".into()));
    }
    let f = DirichletPolynomial::<f64>::build(&a, &WeightVector::uniform(a.len()), &u)?;
    let exact = f.exact_mean_value(k, budget)?;
    let positive = f.terms().iter().all(|t| t.value.is_positive());
    let step = StepControl {
        samples_per_period: spp,
    };
    let report = if positive {
        Some(f.convergence_report(k, t_list, step, budget)?)
    } else {
        None
    };
    let pass = report.as_ref().is_none_or(|r| r.non_increasing);
    let json = json!({
        "schema": schema("dirichlet"),
        "set": a.to_string(),
        "shift": sumprod::rational::fraction_string(&u),
        "k": k,
        "exact": exact,
        "numeric": report.as_ref().map(to_value),
        "note": if positive { Value::Null } else { json!("values of mixed sign: numeric integration skipped, exact limit only") },
        "pass": pass,
    });
    let (csv, summary) = match &report {
        Some(r) => {
            let mut s = format!("exact limit {exact}\n{:>10} {:>22} {:>22}\n", "T", "numeric", "abs_error");
            for row in &r.rows {
                let _ = writeln!(s, "{:>10} {:>22} {:>22}", row.t, row.numeric, row.abs_error);
            }
            if let Some(slope) = r.slope {
                let _ = writeln!(s, "log-log slope {slope}");
            }
            (r.to_csv(), s)
        }
        None => (
            format!("T,numeric,exact,abs_error\n,,{exact},\n"),
            format!("exact limit {exact} (numeric integration needs positive values)\n"),
        ),
    };
    let mut extra_files = Vec::new();
    if plot {
        if let Some(r) = &report {
            extra_files.push(("dirichlet.dat".to_string(), r.to_gnuplot()));
        }
    }
    Ok(SuiteOutput {
        name: "dirichlet",
        counterexample: (!pass).then(|| json.clone()),
        json,
        csv,
        summary,
        pass,
        extra_files,
    })
}

fn sunit(primes: &[u64], height: u32, c1: &str, c2: &str, budget: &Budget) -> Result<SuiteOutput, CliError> {
    let parse = |s: &str| {
        s.parse::<FactoredRational>()
            .map_err(|e| CliError::Usage(format!("bad coefficient {s:?}: {e}")))
    };
    let inst = SUnitInstance::new(primes.to_vec(), height, parse(c1)?, parse(c2)?)?;
    let sol = solve(&inst, budget)?;
    let bad = sol.recheck();
    let oracle = if budget.check_tuples("oracle", inst.size().min(usize::MAX as u128) as usize, 2).is_ok() {
        Some(solve_all_pairs(&inst, budget)?)
    } else {
        None
    };
    let oracle_agrees = oracle.as_ref().is_none_or(|o| o.pairs == sol.pairs);
    let diag = bound_diagnostic(&sol);
    let pass = bad.is_empty() && oracle_agrees;
    let json = json!({
        "schema": schema("sunit"),
        "solutions": to_value(&sol),
        "recheck_failures": to_value(&bad),
        "oracle_checked": oracle.is_some(),
        "oracle_agrees": oracle_agrees,
        "diagnostic": to_value(&diag),
        "pass": pass,
    });
    let mut summary = format!("{} solutions\n", sol.count);
    for p in &sol.pairs {
        let _ = writeln!(summary, "  s1 = {:<20} s2 = {}", p.s1.to_string(), p.s2);
    }
    let _ = writeln!(
        summary,
        "C* = {}  ({})",
        diag.c_star.map_or("n/a".to_string(), |c| c.to_string()),
        diag.note
    );
    Ok(SuiteOutput {
        name: "sunit",
        counterexample: (!pass).then(|| json.clone()),
        json,
        csv: sol.to_csv(),
        summary,
        pass,
        extra_files: Vec::new(),
    })
}

fn claim(args: &SetArgs, group: Option<usize>, budget: &Budget) -> Result<SuiteOutput, CliError> {
    let a = shifted_set(args)?;
    let k = args.k;
    let ctx = ClaimContext::new(&a)?;
    let reports = match group {
        Some(g) => vec![ctx.check_group(g, k, budget)?],
        None => ctx.check_all(k, budget)?,
    };
    let skipped = if group.is_none() {
        ctx.decomposition().groups.len() - reports.len()
    } else {
        0
    };
    let pass = reports.iter().all(|r| r.passed());
    let json = json!({
        "schema": schema("claim"),
        "set": a.to_string(),
        "k": k,
        "form": ctx.form().to_json(),
        "groups": ctx.decomposition().groups.len(),
        "groups_skipped_for_budget": skipped,
        "reports": reports.iter().map(to_value).collect::<Vec<_>>(),
        "pass": pass,
    });
    let mut csv = String::from("group,subset,key,size,collisions,trivial,inverse_shift_energy,violations\n");
    let mut summary = format!("{} groups, {} checked\n", ctx.decomposition().groups.len(), reports.len());
    for r in &reports {
        let subset = r.subset.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        let key = r.key.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            csv,
            "{},{subset},{key},{},{},{},{},{}",
            r.group_index,
            r.members.len(),
            r.collisions,
            r.trivial_collisions,
            r.inverse_shift_energy,
            r.violation_count
        );
        let _ = writeln!(
            summary,
            "group {:>3}  S=[{subset}]  size {}  collisions {} (trivial {})  violations {}",
            r.group_index,
            r.members.len(),
            r.collisions,
            r.trivial_collisions,
            r.violation_count
        );
    }
    let counterexample = (!pass).then(|| {
        json!({
            "schema": schema("claim-counterexample"),
            "set": a.to_string(),
            "failing": reports.iter().filter(|r| !r.passed()).map(to_value).collect::<Vec<_>>(),
        })
    });
    Ok(SuiteOutput {
        name: "claim",
        json,
        csv,
        summary,
        pass,
        counterexample,
        extra_files: Vec::new(),
    })
}

fn dimension(path: &Path) -> Result<SuiteOutput, CliError> {
    let a = load_set(path)?;
    let image = valuation_image(&a)?;
    let dim = mult_dimension(&a)?;
    let form = canonical_affine_form(&image)?;
    let freiman = freiman_check(&a, default_freiman_threshold)?;
    // P(AA) = P(A) + P(A), over A's prime basis
    let aa = a.product_set(&a);
    let paa: std::collections::BTreeSet<Vec<i64>> =
        aa.iter().map(|x| image.basis.iter().map(|p| x.valuation(p)).collect()).collect();
    let mut sum = std::collections::BTreeSet::new();
    for r in &image.rows {
        for s in &image.rows {
            sum.insert(r.iter().zip(s).map(|(x, y)| x + y).collect::<Vec<i64>>());
        }
    }
    let minkowski = paa == sum;
    let projections: Vec<Vec<i64>> = image.rows.iter().map(|r| form.project(r)).collect();
    let decomposition = sign_pattern_decompose(&projections)?;
    let partition = decomposition.is_partition_of(&projections);
    let pass = minkowski && partition && freiman.freiman_inequality_holds && freiman.dimension_bound_holds != Some(false);
    let json = json!({
        "schema": schema("dimension"),
        "set": a.to_string(),
        "valuation_image": to_value(&image),
        "dimension": dim,
        "form": form.to_json(),
        "freiman": to_value(&freiman),
        "minkowski_holds": minkowski,
        "sign_groups": to_value(&decomposition),
        "partition_holds": partition,
        "pass": pass,
    });
    let mut csv = String::from("element");
    for p in &image.basis {
        let _ = write!(csv, ",v_{p}");
    }
    csv.push('\n');
    for (x, row) in a.iter().zip(&image.rows) {
        let _ = write!(csv, "{x}");
        for v in row {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    let summary = format!(
        "|A| = {}, |AA| = {}, K = {}\nmultiplicative dimension {dim} (d = {}, {} sign groups)\nFreiman threshold {}: {}\nP(AA) = P(A)+P(A): {}\n",
        freiman.set_size,
        freiman.product_set_size,
        freiman.k_integer,
        form.d,
        decomposition.groups.len(),
        freiman.threshold,
        match freiman.dimension_bound_holds {
            Some(true) => "dimension ≤ K",
            Some(false) => "dimension > K (FAIL)",
            None => "below threshold, not asserted",
        },
        verdict(minkowski)
    );
    Ok(SuiteOutput {
        name: "dimension",
        counterexample: (!pass).then(|| json.clone()),
        json,
        csv,
        summary,
        pass,
        extra_files: Vec::new(),
    })
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } => CliError::Budget(e.to_string()),
            Error::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
