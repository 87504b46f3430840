//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subdioph::angles::PrecisionContext;
use subdioph::construction::{certify_instance, Beta, CertificationReport, CertifyOptions, ConstructionParams};
use subdioph::enumeration::{EnumSpec, Strategy};
use subdioph::estimation::{
    constructed_records, estimate_exponent, exclusivity_check, scan_records, ScanOptions, Target,
};
use subdioph::exact::{pluecker_decode, PlueckerVector};
use subdioph::exec::Execution;
use subdioph::morphisms::{embedding_harness, HarnessSetup};
use subdioph::suites::{run_suite, Suite};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn opts() -> ScanOptions {
    ScanOptions { ctx: PrecisionContext::default(), exec: Execution::Parallel }
}

fn suites(list: &[Suite], cases: usize) -> Outcome {
    let ctx = PrecisionContext::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for &s in list {
        let o = run_suite(s, cases, 0, &ctx, Execution::Parallel);
        ok &= o.passed();
        lines.push(format!("{}: {} checks, {} failures", o.suite, o.checks, o.failures));
        if let Some(f) = o.first_failure {
            lines.push(format!("first failure: {f}"));
        }
    }
    Outcome::new(ok, lines.join("; "))
}

fn c1() -> Outcome {
    suites(&[Suite::DeterminantIdentity], 1000)
}

fn c2() -> Outcome {
    let base = suites(&[Suite::PlueckerRoundTrip], 1000);
    // Independent rejection count: 100 tuples with nonzero Plücker quadric.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rejected = 0;
    let mut tried = 0;
    while tried < 100 {
        let v: Vec<i64> = (0..6).map(|_| rng.gen_range(-20..=20)).collect();
        if v[0] * v[5] - v[1] * v[4] + v[2] * v[3] == 0 {
            continue;
        }
        tried += 1;
        let xi = PlueckerVector::from_i64(4, 2, &v).expect("nonzero");
        rejected += usize::from(pluecker_decode(&xi).is_err());
    }
    Outcome::new(base.passed && rejected == 100, format!("{}; {rejected}/100 non-decomposable rejected", base.detail))
}

fn c3() -> Outcome {
    suites(&Suite::ANGLES, 10_000)
}

fn certify(params: &ConstructionParams, nmax: usize) -> Result<CertificationReport, String> {
    let opts = CertifyOptions { ctx: PrecisionContext::default(), exec: Execution::Parallel };
    certify_instance(params, nmax, &opts).map_err(|e| e.to_string())
}

fn failing(report: &CertificationReport, names: &[&str]) -> Vec<String> {
    report
        .records
        .iter()
        .filter(|r| names.contains(&r.check.as_str()) && !r.passed)
        .map(|r| format!("N={} {}", r.n, r.check))
        .collect()
}

const EXACT_CHECKS: [&str; 6] =
    ["primitivity", "tailBound", "entryBound", "heightUpperBound", "digitMatrix", "heightGrowth"];

fn c4() -> Outcome {
    let params = ConstructionParams::new(1, Beta::Rational(BigRational::from_integer(3.into())), Some(5u32.into()), 0)
        .expect("admissible");
    let report = match certify(&params, 4) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e),
    };
    let mut bad = failing(&report, &EXACT_CHECKS);
    bad.extend(failing(&report, &["angle", "angleBand"]));
    let ratios: Vec<String> =
        report.summaries.iter().map(|s| format!("N={}: {:.2e}", s.n, s.ratio_deviation)).collect();
    let late_ok = report.summaries.iter().filter(|s| s.n >= 3).all(|s| s.ratio_deviation <= 0.01);
    if !late_ok {
        bad.push("height ratio outside 1% at N >= 3".into());
    }
    Outcome::new(bad.is_empty(), format!("ratio deviations [{}]; failures {:?}", ratios.join(", "), bad))
}

fn c5() -> Outcome {
    let beta = Beta::Rational(BigRational::new(5.into(), 2.into()));
    let params = ConstructionParams::new(2, beta, Some(53u32.into()), 0).expect("admissible");
    let report = match certify(&params, 2) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e),
    };
    let mut bad = failing(&report, &EXACT_CHECKS);
    bad.extend(failing(&report, &["ratioConvergence"]));
    let heights: Vec<String> = report
        .summaries
        .iter()
        .map(|s| format!("H²(B_{}) has {} digits", s.n, s.height_squared.to_string().len()))
        .collect();
    let band = report.check(2, "angleBand").map_or("n/a".to_string(), |r| r.passed.to_string());
    Outcome::new(bad.is_empty(), format!("{}; angle band {band}; failures {:?}", heights.join(", "), bad))
}

fn c6() -> Outcome {
    let params =
        ConstructionParams::new(1, Beta::Rational(BigRational::from_integer(3.into())), None, 0).expect("admissible");
    let mu = constructed_records(&params, 4, &opts())
        .map_err(|e| e.to_string())
        .and_then(|r| estimate_exponent(&r).map_err(|e| e.to_string()));
    let mu = match mu {
        Ok(m) => m.mu_hat,
        Err(e) => return Outcome::new(false, e),
    };
    let mu_ok = (2.85..=3.15).contains(&mu);
    let spec = EnumSpec::new(2, 1, 100_000_000, Strategy::ExactLines).expect("valid");
    let report = match exclusivity_check(&params, 4, &spec, &opts()) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let interlopers: Vec<f64> = report.interlopers().filter_map(|e| e.record.exponent()).collect();
    let max_exp = interlopers.iter().cloned().fold(f64::NAN, f64::max);
    Outcome::new(
        mu_ok && report.passed(),
        format!(
            "muHat {mu:.4} (in [2.85, 3.15]: {mu_ok}); burn-in {:?}, {} records, {} non-convergent records beyond burn-in (max exponent {max_exp:.3})",
            report.burn_in,
            report.entries.len(),
            interlopers.len()
        ),
    )
}

/// Lines through the continued-fraction convergents of y/x, starting from 1/0.
fn convergent_lines(x: &BigRational, y: &BigRational, h: u64) -> Vec<Vec<BigInt>> {
    let (mut num, mut den) = ((y / x).numer().clone(), (y / x).denom().clone());
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut out = vec![vec![q1.clone(), p1.clone()]];
    while !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        let (p, q) = (&a * &p1 + &p0, &a * &q1 + &q0);
        if (&p * &p + &q * &q) > BigInt::from(h) {
            break;
        }
        out.push(vec![q.clone(), p.clone()]);
        (p0, q0, p1, q1) = (p1, q1, p, q);
        (num, den) = (den, r);
    }
    out
}

fn c7() -> Outcome {
    let h = 100_000_000;
    let target = Target::golden_line(200, &PrecisionContext::default()).expect("target");
    let spec = EnumSpec::new(2, 1, h, Strategy::ExactLines).expect("valid");
    let scan = match scan_records(&target, &spec, 1, &opts()) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let g = target.exact().generators();
    let oracle = convergent_lines(g.get(0, 0), g.get(1, 0), h);
    let found: Vec<Vec<BigInt>> = scan.records.iter().map(|r| r.subspace.pluecker().coords().to_vec()).collect();
    let fibonacci = oracle.windows(2).all(|w| w[1][0] == w[0][1] && w[1][1] == &w[0][0] + &w[0][1]);
    let mu = estimate_exponent(&scan.records).map(|e| e.mu_hat).unwrap_or(f64::NAN);
    let ok = found == oracle && fibonacci && (1.8..=2.2).contains(&mu);
    Outcome::new(
        ok,
        format!(
            "{} records vs {} oracle lines, {} vectors examined, muHat {mu:.4}",
            found.len(),
            oracle.len(),
            scan.examined
        ),
    )
}

fn c8() -> Outcome {
    let target = Target::golden_line(200, &PrecisionContext::default()).expect("target");
    let setup = HarnessSetup::coordinate(target.exact().clone(), 3, 1, 1, 1_000_000).expect("setup");
    let report = match embedding_harness(&setup, &opts()) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let ok = report.delta <= 0.3 && report.all_images_are_records() && report.matched_heights();
    Outcome::new(
        ok,
        format!(
            "mu2 {:.4}, mu3 {:.4}, |delta| {:.4}; {} intrinsic records, images are ambient records: {}, heights match: {}",
            report.mu_intrinsic.mu_hat,
            report.mu_ambient.mu_hat,
            report.delta,
            report.record_pairs.len(),
            report.all_images_are_records(),
            report.matched_heights()
        ),
    )
}

fn c9() -> Outcome {
    suites(&[Suite::HeightDistortion], 1000)
}

fn c10() -> Outcome {
    let params = ConstructionParams::new(1, Beta::Infinite, None, 0).expect("valid");
    let report = match certify(&params, 3) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e),
    };
    let local = report.summaries.iter().find(|s| s.n == 3).map(|s| s.local_exponent).unwrap_or(f64::NAN);
    let bad = failing(&report, &["primitivity"]);
    Outcome::new(
        local > 3.0 && bad.is_empty(),
        format!("local exponent at N=3: {local:.3}; primitivity failures {bad:?}"),
    )
}

fn c11() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_subdioph");
    let commands: [&[&str]; 5] = [
        &["construct", "--ell", "1", "--beta", "3/1", "--theta", "5", "--nmax", "4", "--certify"],
        &["records", "--golden", "200", "--e", "1", "--j", "1", "--hmax-squared", "10000000"],
        &[
            "estimate",
            "--ell",
            "1",
            "--beta",
            "3",
            "--nmax",
            "4",
            "--e",
            "1",
            "--j",
            "1",
            "--hmax-squared",
            "1",
            "--source",
            "constructed",
        ],
        &["enumerate", "--n", "4", "--e", "2", "--hmax-squared", "40", "--shards", "3", "--shard-index", "1"],
        &["verify", "--suite", "all", "--cases", "200", "--seed", "7"],
    ];
    let run = |args: &[&str], extra: &[&str]| {
        Command::new(bin).args(args).arg("--no-header").args(extra).output().map(|o| (o.status.code(), o.stdout))
    };
    let mut bad = Vec::new();
    for args in commands {
        let outputs = [run(args, &[]), run(args, &[]), run(args, &["--sequential"])];
        match outputs {
            [Ok(a), Ok(b), Ok(c)] => {
                if a.0 != Some(0) || a.1.is_empty() || a != b || a != c {
                    bad.push(args[0]);
                }
            }
            _ => bad.push(args[0]),
        }
    }
    Outcome::new(bad.is_empty(), format!("{} commands, 3 runs each; differing: {bad:?}", commands.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "generalized determinant equals gcd² · H²", Duration::from_secs(60), c1),
        (2, "Plücker round trip and non-decomposable rejection", Duration::from_secs(60), c2),
        (3, "principal angle property suites", Duration::from_secs(300), c3),
        (4, "construction certification, ell=1 beta=3 theta=5 N<=4", Duration::from_secs(600), c4),
        (5, "construction certification, ell=2 beta=5/2 theta=53 N<=2", Duration::from_secs(900), c5),
        (6, "exponent recovery and record exclusivity, ell=1 beta=3", Duration::from_secs(1200), c6),
        (7, "golden line records against continued fractions, H²<=1e8", Duration::from_secs(600), c7),
        (8, "golden line embedded in R^3, H²<=1e6", Duration::from_secs(900), c8),
        (9, "height distortion under rational maps", Duration::from_secs(300), c9),
        (10, "infinite variant, ell=1 seed 0", Duration::from_secs(600), c10),
        (11, "byte-identical output across runs", Duration::from_secs(600), c11),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (id, name, limit, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let passed = outcome.passed && in_time;
        failures += usize::from(!passed);
        let timing = format!("{:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
        let status = if passed { "PASS" } else { "FAIL" };
        let late = if in_time { "" } else { " [time limit exceeded]" };
        println!("{status} criterion {id:>2}: {name} ({timing}{late}) :: {}", outcome.detail);
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
