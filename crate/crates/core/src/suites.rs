//! Named randomized property suites. Each case draws from its own ChaCha stream, so
//! outcomes do not depend on the execution mode.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::angles::{orthonormal_basis, principal_angles, vector_angle, AngleProfile, PrecisionContext, RealBasis};
use crate::enumeration::{enumerate_subspaces, EnumSpec};
use crate::estimation::float;
use crate::exact::{
    gcd_all, generalized_determinant_squared, is_primitive_basis, pluecker_coordinates, pluecker_decode, raw_minors,
    ExactMatrix, PlueckerVector, RationalSubspace,
};
use crate::exec::{self, Execution};
use crate::morphisms::{height_distortion_constant, MorphismError, RationalMap};
use crate::real::Real;

/// Relative tolerance for floating comparisons.
pub const TOLERANCE_LOG2: f64 = -40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    AngleOrdering,
    OrthogonalInvariance,
    SineBelowRelativeDistance,
    SineAboveChord,
    SineTriangle,
    VectorInSubspace,
    LinearDistortion,
    DeterminantIdentity,
    PlueckerRoundTrip,
    HeightDistortion,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::AngleOrdering,
        Suite::OrthogonalInvariance,
        Suite::SineBelowRelativeDistance,
        Suite::SineAboveChord,
        Suite::SineTriangle,
        Suite::VectorInSubspace,
        Suite::LinearDistortion,
        Suite::DeterminantIdentity,
        Suite::PlueckerRoundTrip,
        Suite::HeightDistortion,
    ];

    /// The suites over real angles.
    pub const ANGLES: [Suite; 7] = [
        Suite::AngleOrdering,
        Suite::OrthogonalInvariance,
        Suite::SineBelowRelativeDistance,
        Suite::SineAboveChord,
        Suite::SineTriangle,
        Suite::VectorInSubspace,
        Suite::LinearDistortion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AngleOrdering => "angle-ordering",
            Suite::OrthogonalInvariance => "orthogonal-invariance",
            Suite::SineBelowRelativeDistance => "sine-below-relative-distance",
            Suite::SineAboveChord => "sine-above-chord",
            Suite::SineTriangle => "sine-triangle",
            Suite::VectorInSubspace => "vector-in-subspace",
            Suite::LinearDistortion => "linear-distortion",
            Suite::DeterminantIdentity => "determinant-identity",
            Suite::PlueckerRoundTrip => "pluecker-round-trip",
            Suite::HeightDistortion => "height-distortion",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Suite::AngleOrdering => "0 <= psi_1 <= ... <= psi_t <= 1",
            Suite::OrthogonalInvariance => "psi(UA, UB) = psi(A, B) for orthogonal U",
            Suite::SineBelowRelativeDistance => "psi(X, Y) <= |X - Y| / |X|",
            Suite::SineAboveChord => "psi(U, V) >= |U - V| / sqrt 2 for unit U, V with U.V >= 0",
            Suite::SineTriangle => "psi(Z1, Z2) <= psi(Z1, Z3) + psi(Z3, Z2)",
            Suite::VectorInSubspace => "psi_1(span X, B) <= psi_dim A(A, B) for X in A",
            Suite::LinearDistortion => "psi_j(phi A, phi B) <= cond(phi) psi_j(A, B)",
            Suite::DeterminantIdentity => "det(M^T M) = gcd(minors)^2 H^2, and = H^2 for primitive M",
            Suite::PlueckerRoundTrip => "decode(pluecker(B)) = B; non-decomposable vectors rejected",
            Suite::HeightDistortion => "H(phi B)^2 <= c(phi)^2 H(B)^2",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| SuiteError::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub statement: &'static str,
    pub cases: usize,
    /// Individual inequality or identity checks performed.
    pub checks: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(detail());
        }
    }
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

pub fn run_suite(suite: Suite, cases: usize, seed: u64, ctx: &PrecisionContext, exec: Execution) -> SuiteOutcome {
    let indices: Vec<usize> = (0..cases).collect();
    let tallies = exec::map(exec, &indices, |&case| {
        let mut rng = case_rng(seed, case);
        let mut tally = Tally::default();
        if let Err(msg) = run_case(suite, &mut rng, ctx, &mut tally) {
            tally.check(false, || msg);
        }
        (case, tally)
    });
    let checks = tallies.iter().map(|(_, t)| t.checks).sum();
    let failures = tallies.iter().map(|(_, t)| t.failures.len()).sum();
    let first_failure = tallies.iter().find_map(|(case, t)| t.failures.first().map(|f| format!("case {case}: {f}")));
    SuiteOutcome { suite: suite.name(), statement: suite.statement(), cases, checks, failures, first_failure }
}

fn run_case(suite: Suite, rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    match suite {
        Suite::AngleOrdering => angle_ordering(rng, ctx, tally),
        Suite::OrthogonalInvariance => orthogonal_invariance(rng, ctx, tally),
        Suite::SineBelowRelativeDistance => sine_below_relative_distance(rng, ctx, tally),
        Suite::SineAboveChord => sine_above_chord(rng, ctx, tally),
        Suite::SineTriangle => sine_triangle(rng, ctx, tally),
        Suite::VectorInSubspace => vector_in_subspace(rng, ctx, tally),
        Suite::LinearDistortion => linear_distortion(rng, ctx, tally),
        Suite::DeterminantIdentity => determinant_identity(rng, tally),
        Suite::PlueckerRoundTrip => pluecker_round_trip(rng, tally),
        Suite::HeightDistortion => height_distortion(rng, tally),
    }
}

fn tol() -> f64 {
    TOLERANCE_LOG2.exp2()
}

/// lhs ≤ rhs up to the relative tolerance and the resolution floor of `ctx`.
fn le(lhs: f64, rhs: f64, ctx: &PrecisionContext) -> bool {
    lhs <= rhs + tol() * lhs.abs().max(rhs.abs()) + ctx.resolution_log2().exp2()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if float::norm(&v) > 1e-3 {
            return v;
        }
    }
}

fn reals(v: &[f64], bits: usize) -> Vec<Real> {
    v.iter().map(|&x| Real::from_f64(x, bits)).collect()
}

fn random_basis(rng: &mut ChaCha8Rng, n: usize, d: usize, ctx: &PrecisionContext) -> Result<RealBasis, String> {
    let cols: Vec<Vec<f64>> = (0..d).map(|_| random_vec(rng, n)).collect();
    let gen = RealBasis::from_f64_columns(&cols, ctx.bits()).map_err(|e| e.to_string())?;
    orthonormal_basis(&gen, ctx).map_err(|e| e.to_string())
}

fn angles(a: &RealBasis, b: &RealBasis, ctx: &PrecisionContext) -> Result<AngleProfile, String> {
    principal_angles(a, b, ctx).map_err(|e| e.to_string())
}

fn vangle(x: &[f64], y: &[f64], ctx: &PrecisionContext) -> Result<f64, String> {
    let bits = ctx.bits();
    vector_angle(&reals(x, bits), &reals(y, bits), ctx).map(|r| r.to_f64()).map_err(|e| e.to_string())
}

/// Dimensions (n, d, e) with 2 ≤ n ≤ 6 and 1 ≤ d, e ≤ n.
fn shape(rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    let n = rng.gen_range(2..=6);
    (n, rng.gen_range(1..=n), rng.gen_range(1..=n))
}

fn angle_ordering(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let (n, d, e) = shape(rng);
    let p = angles(&random_basis(rng, n, d, ctx)?, &random_basis(rng, n, e, ctx)?, ctx)?;
    let psi = p.to_f64();
    tally.check(psi.len() == d.min(e), || format!("{} values for t = {}", psi.len(), d.min(e)));
    tally.check(psi.iter().all(|x| (0.0..=1.0).contains(x)), || format!("out of [0, 1]: {psi:?}"));
    tally.check(psi.windows(2).all(|w| w[0] <= w[1]), || format!("not ascending: {psi:?}"));
    Ok(())
}

fn orthogonal_invariance(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let (n, d, e) = shape(rng);
    let a = random_basis(rng, n, d, ctx)?;
    let b = random_basis(rng, n, e, ctx)?;
    let u = random_basis(rng, n, n, ctx)?;
    let rows: Vec<Vec<Real>> = (0..n).map(|i| u.columns().iter().map(|c| c[i].clone()).collect()).collect();
    let ua = orthonormal_basis(&a.left_multiply(&rows, ctx.bits()).map_err(|e| e.to_string())?, ctx)
        .map_err(|e| e.to_string())?;
    let ub = orthonormal_basis(&b.left_multiply(&rows, ctx.bits()).map_err(|e| e.to_string())?, ctx)
        .map_err(|e| e.to_string())?;
    let p = angles(&a, &b, ctx)?;
    let q = angles(&ua, &ub, ctx)?;
    let rel = (4.0 * p.rel_err_bound().max(q.rel_err_bound())).max(tol());
    let floor = ctx.resolution_log2().exp2();
    for (j, (x, y)) in p.to_f64().into_iter().zip(q.to_f64()).enumerate() {
        tally.check((x - y).abs() <= rel * x.max(y) + floor, || format!("psi_{} {x} vs {y}", j + 1));
    }
    Ok(())
}

fn sine_below_relative_distance(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let n = rng.gen_range(2..=6);
    let x = random_vec(rng, n);
    // Mix near and far pairs.
    let scale = 10f64.powi(-rng.gen_range(0..6));
    let y: Vec<f64> = x.iter().zip(random_vec(rng, n)).map(|(a, b)| a + scale * b).collect();
    if float::norm(&y) == 0.0 {
        return Ok(());
    }
    let psi = vangle(&x, &y, ctx)?;
    let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    let bound = float::norm(&diff) / float::norm(&x);
    tally.check(le(psi, bound, ctx), || format!("psi {psi} > {bound}"));
    Ok(())
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let r = float::norm(&v);
    v.into_iter().map(|x| x / r).collect()
}

fn sine_above_chord(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let n = rng.gen_range(2..=6);
    let u = unit(random_vec(rng, n));
    let mut v = unit(random_vec(rng, n));
    if float::dot(&u, &v) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let psi = vangle(&u, &v, ctx)?;
    let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
    let bound = std::f64::consts::FRAC_1_SQRT_2 * float::norm(&diff);
    tally.check(le(bound, psi, ctx), || format!("psi {psi} < {bound}"));
    Ok(())
}

fn sine_triangle(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let n = rng.gen_range(2..=6);
    let z: Vec<Vec<f64>> = (0..3).map(|_| random_vec(rng, n)).collect();
    let lhs = vangle(&z[0], &z[1], ctx)?;
    let rhs = vangle(&z[0], &z[2], ctx)? + vangle(&z[2], &z[1], ctx)?;
    tally.check(le(lhs, rhs, ctx), || format!("{lhs} > {rhs}"));
    Ok(())
}

fn vector_in_subspace(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let n = rng.gen_range(2..=6);
    let e = rng.gen_range(1..=n);
    let d = rng.gen_range(1..=e);
    let a = random_basis(rng, n, d, ctx)?;
    let b = random_basis(rng, n, e, ctx)?;
    let top = *angles(&a, &b, ctx)?.to_f64().last().expect("t >= 1");
    let coeffs = random_vec(rng, d);
    let x: Vec<f64> = (0..n).map(|i| a.columns().iter().zip(&coeffs).map(|(c, k)| c[i].to_f64() * k).sum()).collect();
    let line = orthonormal_basis(&RealBasis::from_f64_columns(&[x], ctx.bits()).map_err(|e| e.to_string())?, ctx)
        .map_err(|e| e.to_string())?;
    let first = angles(&line, &b, ctx)?.to_f64()[0];
    tally.check(le(first, top, ctx), || format!("psi_1(X, B) = {first} > psi_d(A, B) = {top}"));
    Ok(())
}

fn linear_distortion(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, tally: &mut Tally) -> Result<(), String> {
    let (n, d, e) = shape(rng);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, n)).collect();
    let phi_rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let sv = float::singular_values(&mut cols);
    let (smax, smin) = sv.iter().fold((0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if smin < 1e-6 * smax {
        return Ok(());
    }
    let kappa = smax / smin;
    let rows: Vec<Vec<Real>> = phi_rows.iter().map(|r| reals(r, ctx.bits())).collect();
    let a = random_basis(rng, n, d, ctx)?;
    let b = random_basis(rng, n, e, ctx)?;
    let map = |x: &RealBasis| {
        x.left_multiply(&rows, ctx.bits()).and_then(|y| orthonormal_basis(&y, ctx)).map_err(|e| e.to_string())
    };
    let before = angles(&a, &b, ctx)?;
    let after = angles(&map(&a)?, &map(&b)?, ctx)?;
    for (j, (x, y)) in before.psi().iter().zip(after.psi()).enumerate() {
        if !x.is_resolved() {
            continue;
        }
        let (x, y) = (x.upper_f64(), y.upper_f64());
        tally.check(y <= kappa * x * (1.0 + tol()) + ctx.resolution_log2().exp2(), || {
            format!("psi_{}: {y} > {kappa} * {x}", j + 1)
        });
    }
    Ok(())
}

fn random_int_basis(rng: &mut ChaCha8Rng, n: usize, e: usize, bound: i64) -> ExactMatrix {
    let cols: Vec<Vec<BigInt>> =
        (0..e).map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect()).collect();
    ExactMatrix::from_int_columns(&cols).expect("nonempty")
}

fn determinant_identity(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<(), String> {
    let n = rng.gen_range(1..=6);
    let e = rng.gen_range(1..=n.min(3));
    let m = random_int_basis(rng, n, e, 20);
    if m.rank() < e {
        return Ok(());
    }
    let gram_route = generalized_determinant_squared(&m);
    let minors = raw_minors(&m).map_err(|e| e.to_string())?;
    let sum_route: BigInt = minors.iter().map(|x| x * x).sum();
    tally.check(gram_route == BigRational::from_integer(sum_route.clone()), || {
        format!("det(M^T M) = {gram_route} but sum of squared minors = {sum_route}")
    });
    let g = gcd_all(&minors);
    let h2 = pluecker_coordinates(&m).map_err(|e| e.to_string())?.norm_squared();
    tally.check(sum_route == &g * &g * &h2, || format!("D^2 = {sum_route}, g = {g}, H^2 = {h2}"));
    if is_primitive_basis(&m).map_err(|e| e.to_string())? {
        tally.check(sum_route == h2, || format!("primitive basis with D^2 = {sum_route} != H^2 = {h2}"));
    }
    Ok(())
}

fn pluecker_round_trip(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<(), String> {
    // Shapes with an exact enumeration strategy: lines, hyperplanes and planes in ℝ⁴.
    let shapes = [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 1), (5, 4), (6, 1), (6, 5)];
    let (n, e) = shapes[rng.gen_range(0..shapes.len())];
    let m = random_int_basis(rng, n, e, 9);
    if m.rank() == e {
        let sub = RationalSubspace::from_integer_basis(m).map_err(|e| e.to_string())?;
        let back = pluecker_decode(sub.pluecker()).map_err(|e| e.to_string())?;
        tally.check(back == sub, || format!("{:?} decoded to {:?}", sub, back));
    }
    // A random 6-tuple with nonzero Plücker quadric is not decomposable.
    let v: Vec<i64> = (0..6).map(|_| rng.gen_range(-9..=9)).collect();
    if v[0] * v[5] - v[1] * v[4] + v[2] * v[3] != 0 {
        let xi = PlueckerVector::from_i64(4, 2, &v).map_err(|e| e.to_string())?;
        tally.check(pluecker_decode(&xi).is_err(), || format!("{v:?} decoded"));
    }
    Ok(())
}

fn random_rational_map(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RationalMap {
    let mut s = ExactMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let den = rng.gen_range(1..=4i64);
            s.set(i, j, BigRational::new(rng.gen_range(-6..=6i64).into(), den.into()));
        }
    }
    RationalMap::new(s)
}

fn height_distortion(rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<(), String> {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(n..=4);
    let e = rng.gen_range(1..n);
    let map = random_rational_map(rng, m, n);
    let c = height_distortion_constant(&map, e).map_err(|err| err.to_string())?;
    let c_sq = &c * &c;
    let spec = EnumSpec::exact(n, e, 6).map_err(|err| err.to_string())?;
    for b in enumerate_subspaces(&spec, Execution::Sequential).map_err(|err| err.to_string())? {
        match map.apply_to_subspace(&b) {
            Ok(img) => {
                let lhs = BigRational::from_integer(img.height_squared().clone());
                let rhs = &c_sq * BigRational::from_integer(b.height_squared().clone());
                tally.check(lhs <= rhs, || format!("H^2 {lhs} > {rhs} for {:?}", b));
            }
            Err(MorphismError::DimensionCollapse { .. }) => {}
            Err(err) => return Err(err.to_string()),
        }
    }
    tally.check(c.is_positive() || c.is_zero(), || "negative constant".into());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn every_suite_passes_a_small_run() {
        let ctx = PrecisionContext::default();
        for s in Suite::ALL {
            let out = run_suite(s, 40, 7, &ctx, Execution::Sequential);
            assert!(out.passed(), "{out:?}");
        }
    }

    #[test]
    fn outcome_is_independent_of_mode() {
        let ctx = PrecisionContext::default();
        let a = run_suite(Suite::SineTriangle, 50, 1, &ctx, Execution::Sequential);
        let b = run_suite(Suite::SineTriangle, 50, 1, &ctx, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn a_broken_inequality_is_caught() {
        let mut t = Tally::default();
        let ctx = PrecisionContext::default();
        t.check(le(1.0, 0.5, &ctx), || "expected".into());
        assert_eq!(t.failures.len(), 1);
    }
}
