//! Explicit targets built from lacunary series and their convergent subspaces.
//!
//! For ℓ ≥ 1 the target A ⊂ ℝ^{2ℓ} is spanned by the columns of (I_ℓ; M_ξ) where
//! ξ_{i,j} = Σ_k e_k^{(i,j)} / θ^{s_k}. The finite variant uses s_k = ⌊αᵏ⌋ with α = ℓβ
//! and a prime base θ; the infinite variant uses base 3 and s_k = kᵏ starting at k = 1.
//! The convergent B_N is spanned by (θ^{s_N} I_ℓ; F_N) with F_N = θ^{s_N} · (partial sums
//! up to N).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::angles::{certified_target_angles, AngleError, ExactTarget, PrecisionContext, RationalInterval};
use crate::exact::{
    factorial, floor_power, generalized_determinant_squared, is_prime, is_primitive_basis, log2_bigint, log2_rational,
    next_prime, rational_to_f64, ExactError, ExactMatrix, RationalSubspace,
};
use crate::exec::{self, Execution};
use crate::real::sci_string;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("ell must be at least 1")]
    InvalidEll,
    #[error("beta = {beta} is below the admissible threshold {threshold} for ell = {ell}")]
    BetaBelowThreshold { ell: usize, beta: String, threshold: String },
    #[error("invalid beta: {0}")]
    InvalidBeta(String),
    #[error("theta = {theta} rejected: {reason}")]
    InvalidTheta { theta: String, reason: String },
    #[error("digit {digit} at ({i},{j}) is outside the allowed set")]
    InvalidDigit { i: usize, j: usize, digit: u32 },
    #[error("index {0} is outside the series")]
    InvalidIndex(usize),
    #[error("exponent too large to materialize")]
    ExponentTooLarge,
    #[error("convergent matrix for N = {n} is not primitive")]
    NotPrimitive { n: usize },
    #[error("certification failed at N = {n}: {check}")]
    CertificationFailure { n: usize, check: String },
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Finite,
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Beta {
    Rational(BigRational),
    Infinite,
}

impl FromStr for Beta {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") {
            return Ok(Beta::Infinite);
        }
        let parsed = match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| ConstructionError::InvalidBeta(s.into()))?;
                let q: BigInt = q.trim().parse().map_err(|_| ConstructionError::InvalidBeta(s.into()))?;
                if q.is_zero() {
                    return Err(ConstructionError::InvalidBeta(s.into()));
                }
                BigRational::new(p, q)
            }
            None => BigRational::from_integer(s.parse().map_err(|_| ConstructionError::InvalidBeta(s.into()))?),
        };
        if !parsed.is_positive() {
            return Err(ConstructionError::InvalidBeta(s.into()));
        }
        Ok(Beta::Rational(parsed))
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

/// The value r + √q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaThreshold {
    pub rational_part: BigRational,
    pub radicand: BigRational,
}

impl BetaThreshold {
    /// β ≥ r + √q, decided exactly by squaring.
    pub fn admits(&self, beta: &BigRational) -> bool {
        let d = beta - &self.rational_part;
        !d.is_negative() && &d * &d >= self.radicand
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.rational_part) + rational_to_f64(&self.radicand).sqrt()
    }
}

impl fmt::Display for BetaThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + sqrt({}) ~ {:.6}", self.rational_part, self.radicand, self.to_f64())
    }
}

/// 1 + 1/(2ℓ) + √(1 + 1/(4ℓ²)).
pub fn beta_threshold(ell: usize) -> BetaThreshold {
    let l = BigInt::from(ell);
    BetaThreshold {
        rational_part: BigRational::one() + BigRational::new(BigInt::one(), 2 * &l),
        radicand: BigRational::one() + BigRational::new(BigInt::one(), 4 * &l * &l),
    }
}

/// ℓ!(2ℓ+1)^ℓ.
pub fn theta_bound(ell: usize) -> BigUint {
    factorial(ell as u64) * BigUint::from(2 * ell as u64 + 1).pow(ell as u32)
}

/// Smallest prime strictly above ℓ!(2ℓ+1)^ℓ.
pub fn theta_for(ell: usize) -> BigUint {
    next_prime(&theta_bound(ell))
}

/// ⌊α⁰⌋, …, ⌊αᴷ⌋.
pub fn floor_alpha_powers(alpha: &BigRational, k_max: usize) -> Vec<BigInt> {
    (0..=k_max as u32).map(|k| floor_power(alpha, k)).collect()
}

/// Digits e_k^{(i,j)}: seeded ChaCha bits on top of the minimum allowed value, with
/// optional explicit prefixes per entry. Prefix position 0 is the first series index.
#[derive(Clone, Debug)]
pub struct DigitStream {
    ell: usize,
    seed: u64,
    variant: Variant,
    prefixes: BTreeMap<(usize, usize), Vec<u32>>,
}

impl DigitStream {
    pub fn seeded(ell: usize, seed: u64, variant: Variant) -> Self {
        Self { ell, seed, variant, prefixes: BTreeMap::new() }
    }

    /// Allowed digit pair for entry (i, j).
    pub fn allowed(&self, i: usize, j: usize) -> (u32, u32) {
        match self.variant {
            Variant::Finite if i == j => (2 * self.ell as u32, 2 * self.ell as u32 + 1),
            _ => (1, 2),
        }
    }

    pub fn with_prefix(mut self, i: usize, j: usize, digits: Vec<u32>) -> Result<Self, ConstructionError> {
        let (lo, hi) = self.allowed(i, j);
        if let Some(&d) = digits.iter().find(|&&d| d != lo && d != hi) {
            return Err(ConstructionError::InvalidDigit { i, j, digit: d });
        }
        self.prefixes.insert((i, j), digits);
        Ok(self)
    }

    fn first_index(&self) -> usize {
        match self.variant {
            Variant::Finite => 0,
            Variant::Infinite => 1,
        }
    }

    pub fn digit(&self, i: usize, j: usize, k: usize) -> u32 {
        let pos = k - self.first_index();
        if let Some(d) = self.prefixes.get(&(i, j)).and_then(|p| p.get(pos)) {
            return *d;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((i * self.ell + j) as u64);
        rng.set_word_pos(k as u128);
        self.allowed(i, j).0 + (rng.next_u32() & 1)
    }
}

#[derive(Clone, Debug)]
pub struct ConstructionParams {
    ell: usize,
    beta: Beta,
    alpha: Option<BigRational>,
    theta: BigUint,
    seed: u64,
    variant: Variant,
    digits: DigitStream,
}

impl ConstructionParams {
    /// Validates the threshold on β and the prime θ (default: the smallest admissible).
    /// β = ∞ selects the base-3 variant, where θ is fixed to 3.
    pub fn new(ell: usize, beta: Beta, theta: Option<BigUint>, seed: u64) -> Result<Self, ConstructionError> {
        if ell == 0 {
            return Err(ConstructionError::InvalidEll);
        }
        match &beta {
            Beta::Infinite => {
                let three = BigUint::from(3u32);
                if let Some(t) = theta.filter(|t| *t != three) {
                    return Err(ConstructionError::InvalidTheta {
                        theta: t.to_string(),
                        reason: "the infinite variant uses base 3".into(),
                    });
                }
                Ok(Self {
                    ell,
                    beta,
                    alpha: None,
                    theta: three,
                    seed,
                    variant: Variant::Infinite,
                    digits: DigitStream::seeded(ell, seed, Variant::Infinite),
                })
            }
            Beta::Rational(b) => {
                let threshold = beta_threshold(ell);
                if !threshold.admits(b) {
                    return Err(ConstructionError::BetaBelowThreshold {
                        ell,
                        beta: beta.to_string(),
                        threshold: threshold.to_string(),
                    });
                }
                let bound = theta_bound(ell);
                let theta = match theta {
                    Some(t) => {
                        if t <= bound {
                            return Err(ConstructionError::InvalidTheta {
                                theta: t.to_string(),
                                reason: format!("must exceed ell!(2ell+1)^ell = {bound}"),
                            });
                        }
                        if !is_prime(&t) {
                            return Err(ConstructionError::InvalidTheta {
                                theta: t.to_string(),
                                reason: "not prime".into(),
                            });
                        }
                        t
                    }
                    None => next_prime(&bound),
                };
                let alpha = b * BigRational::from_integer(BigInt::from(ell));
                Ok(Self {
                    ell,
                    beta: beta.clone(),
                    alpha: Some(alpha),
                    theta,
                    seed,
                    variant: Variant::Finite,
                    digits: DigitStream::seeded(ell, seed, Variant::Finite),
                })
            }
        }
    }

    /// Replaces the leading digits of entry (i, j).
    pub fn with_digit_prefix(mut self, i: usize, j: usize, digits: Vec<u32>) -> Result<Self, ConstructionError> {
        if i >= self.ell || j >= self.ell {
            return Err(ConstructionError::InvalidIndex(i.max(j)));
        }
        self.digits = self.digits.with_prefix(i, j, digits)?;
        Ok(self)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn beta(&self) -> &Beta {
        &self.beta
    }

    pub fn alpha(&self) -> Option<&BigRational> {
        self.alpha.as_ref()
    }

    /// Series base: θ, or 3 for the infinite variant.
    pub fn theta(&self) -> &BigUint {
        &self.theta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn digits(&self) -> &DigitStream {
        &self.digits
    }

    /// First index of the series: 0 for the finite variant, 1 for the infinite one.
    pub fn first_index(&self) -> usize {
        self.digits.first_index()
    }

    /// Exponent s_k of the k-th term.
    pub fn exponent(&self, k: usize) -> BigInt {
        match &self.alpha {
            Some(a) => floor_power(a, k as u32),
            None => BigInt::from(k).pow(k as u32),
        }
    }

    fn exponent_usize(&self, k: usize) -> Result<usize, ConstructionError> {
        self.exponent(k).to_usize().ok_or(ConstructionError::ExponentTooLarge)
    }

    fn base_power(&self, k: usize) -> Result<BigInt, ConstructionError> {
        Ok(BigInt::from(self.theta.clone()).pow(self.exponent_usize(k)? as u32))
    }

    pub fn digit_max(&self) -> u32 {
        match self.variant {
            Variant::Finite => 2 * self.ell as u32 + 1,
            Variant::Infinite => 2,
        }
    }

    /// Numerator of the tail bound: 4ℓ + 2 (finite) or 3 (infinite).
    pub fn tail_numerator(&self) -> BigInt {
        match self.variant {
            Variant::Finite => BigInt::from(4 * self.ell + 2),
            Variant::Infinite => BigInt::from(3),
        }
    }

    /// Upper bound on ξ − (partial sum up to k).
    pub fn tail_upper(&self, k: usize) -> Result<BigRational, ConstructionError> {
        Ok(BigRational::new(self.tail_numerator(), self.base_power(k + 1)?))
    }

    fn check_index(&self, k: usize) -> Result<(), ConstructionError> {
        if k < self.first_index() {
            return Err(ConstructionError::InvalidIndex(k));
        }
        Ok(())
    }

    /// θ^{s_N} · Σ_{k ≤ N} e_k^{(i,j)} / θ^{s_k}, an integer.
    pub fn partial_numerator(&self, i: usize, j: usize, n: usize) -> Result<BigInt, ConstructionError> {
        self.check_index(n)?;
        let top = self.exponent_usize(n)?;
        let theta = BigInt::from(self.theta.clone());
        let mut acc = BigInt::zero();
        for k in self.first_index()..=n {
            let s = self.exponent_usize(k)?;
            acc += BigInt::from(self.digits.digit(i, j, k)) * theta.pow((top - s) as u32);
        }
        Ok(acc)
    }
}

/// Exact partial sum of ξ_{i,j} through index K with its tail bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedXi {
    pub i: usize,
    pub j: usize,
    pub depth: usize,
    pub value: BigRational,
    pub tail_upper: BigRational,
}

pub fn xi_truncation(
    params: &ConstructionParams,
    i: usize,
    j: usize,
    depth: usize,
) -> Result<TruncatedXi, ConstructionError> {
    let num = params.partial_numerator(i, j, depth)?;
    let value = BigRational::new(num, params.base_power(depth)?);
    Ok(TruncatedXi { i, j, depth, value, tail_upper: params.tail_upper(depth)? })
}

/// Exact generators (I_ℓ; M_ξ truncated at depth K) of the target.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub matrix: ExactMatrix,
    pub depth: usize,
    /// Entry-wise tail bound.
    pub tail_upper: BigRational,
}

impl GeneratorMatrix {
    /// The truncated target with δ = ℓ · tail, bounding ‖ΔM_ξ‖_F and hence the largest
    /// principal-angle sine between the truncated and the true target.
    pub fn target(&self) -> Result<ExactTarget, AngleError> {
        let ell = self.matrix.cols();
        let delta = &self.tail_upper * BigRational::from_integer(BigInt::from(ell));
        ExactTarget::new(self.matrix.clone(), delta)
    }

    /// M_ξ block.
    pub fn xi_block(&self) -> ExactMatrix {
        let ell = self.matrix.cols();
        let rows: Vec<usize> = (ell..2 * ell).collect();
        let cols: Vec<usize> = (0..ell).collect();
        self.matrix.select(&rows, &cols)
    }
}

pub fn build_generators_a(params: &ConstructionParams, depth: usize) -> Result<GeneratorMatrix, ConstructionError> {
    let ell = params.ell;
    let mut m = ExactMatrix::zeros(2 * ell, ell);
    for j in 0..ell {
        m.set(j, j, BigRational::one());
        for i in 0..ell {
            m.set(ell + i, j, xi_truncation(params, i, j, depth)?.value);
        }
    }
    Ok(GeneratorMatrix { matrix: m, depth, tail_upper: params.tail_upper(depth)? })
}

/// The convergent B_N with its integer basis (θ^{s_N} I; F_N).
#[derive(Clone, Debug)]
pub struct ConvergentMatrix {
    pub index: usize,
    pub exponent: BigInt,
    pub f_matrix: Vec<Vec<BigInt>>,
    pub full: ExactMatrix,
    pub subspace: RationalSubspace,
    pub primitive: bool,
}

/// Builds B_N. For the finite variant a non-primitive basis is an error; for the
/// infinite variant primitivity is recorded.
pub fn build_bn(params: &ConstructionParams, n: usize) -> Result<ConvergentMatrix, ConstructionError> {
    let ell = params.ell;
    let scale = BigRational::from_integer(params.base_power(n)?);
    let mut f_matrix = vec![vec![BigInt::zero(); ell]; ell];
    let mut full = ExactMatrix::zeros(2 * ell, ell);
    for j in 0..ell {
        full.set(j, j, scale.clone());
        for i in 0..ell {
            let f = params.partial_numerator(i, j, n)?;
            full.set(ell + i, j, BigRational::from_integer(f.clone()));
            f_matrix[i][j] = f;
        }
    }
    let primitive = is_primitive_basis(&full)?;
    if params.variant == Variant::Finite && !primitive {
        return Err(ConstructionError::NotPrimitive { n });
    }
    let subspace = RationalSubspace::from_integer_basis(full.clone())?;
    Ok(ConvergentMatrix { index: n, exponent: params.exponent(n), f_matrix, full, subspace, primitive })
}

/// The same as `build_bn`; the variant is carried by the parameters.
pub fn build_infinite_variant(params: &ConstructionParams, n: usize) -> Result<ConvergentMatrix, ConstructionError> {
    if params.variant != Variant::Infinite {
        return Err(ConstructionError::InvalidBeta("expected beta = inf".into()));
    }
    build_bn(params, n)
}

/// |H(B_N)/θ^{ℓ s_N} − L| / L where L² = det(M_Aᵀ M_A) is the squared limit.
pub fn height_ratio_deviation(
    params: &ConstructionParams,
    bn: &ConvergentMatrix,
    limit_sq: &BigRational,
) -> Result<f64, ConstructionError> {
    let scale = params.base_power(bn.index)?;
    let ratio_sq = BigRational::new(bn.subspace.height_squared().clone(), scale.pow(2 * params.ell as u32));
    let q = &ratio_sq / limit_sq;
    // |√q − 1| = |q − 1| / (√q + 1)
    let diff = (&q - BigRational::one()).abs();
    Ok(rational_to_f64(&diff) / (rational_to_f64(&q).sqrt() + 1.0))
}

/// First N ≥ 1 (up to `nmax`) whose height ratio is within 10% of its limit.
pub fn burn_in_index(params: &ConstructionParams, nmax: usize) -> Result<Option<usize>, ConstructionError> {
    let generators = build_generators_a(params, nmax + 2)?;
    let limit_sq = generalized_determinant_squared(&generators.matrix);
    for n in 1..=nmax {
        let bn = build_bn(params, n)?;
        if height_ratio_deviation(params, &bn, &limit_sq)? <= BURN_IN_DEVIATION {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// One line of a certification report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub n: usize,
    pub check: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

/// Per-N numeric summary.
#[derive(Clone, Debug)]
pub struct ConvergentSummary {
    pub n: usize,
    pub height_squared: BigInt,
    pub ratio_deviation: f64,
    pub psi: RationalInterval,
    pub upper_normalized_log2: Option<f64>,
    pub lower_normalized_log2: f64,
    pub local_exponent: f64,
    pub subspace: RationalSubspace,
}

#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub records: Vec<CheckRecord>,
    pub summaries: Vec<ConvergentSummary>,
    pub depth: usize,
    pub burn_in: Option<usize>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn first_failure(&self) -> Option<ConstructionError> {
        self.records
            .iter()
            .find(|r| !r.passed)
            .map(|r| ConstructionError::CertificationFailure { n: r.n, check: r.check.clone() })
    }

    pub fn check(&self, n: usize, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.n == n && r.check == name)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CertifyOptions {
    pub ctx: PrecisionContext,
    pub exec: Execution,
}

const BAND_LOG2: f64 = 6.643_856_189_774_724; // log2(100)
const BURN_IN_DEVIATION: f64 = 0.1;

/// Starting precision 4·s_{K+1}·log₂θ + 64 bits, rounded up to whole words.
pub fn certification_bits(params: &ConstructionParams, depth: usize) -> Result<usize, ConstructionError> {
    let s = params.exponent(depth + 1).to_f64().ok_or(ConstructionError::ExponentTooLarge)?;
    let bits = (4.0 * s * log2_bigint(&BigInt::from(params.theta.clone()))).ceil() as usize + 64;
    Ok(bits.div_ceil(64) * 64)
}

fn rec(n: usize, check: &str, passed: bool, detail: serde_json::Value) -> CheckRecord {
    CheckRecord { n, check: check.to_string(), passed, detail }
}

fn s(x: &BigInt) -> String {
    x.to_string()
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// Runs every exact and interval check for N = 1..=nmax at truncation depth nmax + 2.
pub fn certify_instance(
    params: &ConstructionParams,
    nmax: usize,
    opts: &CertifyOptions,
) -> Result<CertificationReport, ConstructionError> {
    if nmax < 1 {
        return Err(ConstructionError::InvalidIndex(nmax));
    }
    let depth = nmax + 2;
    let generators = build_generators_a(params, depth)?;
    let target = generators.target()?;
    let limit_sq = generalized_determinant_squared(&generators.matrix);
    let bits = certification_bits(params, depth)?;
    if 2 * bits > opts.ctx.max_bits() {
        return Err(AngleError::PrecisionExhausted { bits: opts.ctx.max_bits() }.into());
    }
    let ctx = PrecisionContext::new(bits, opts.ctx.target_rel_err(), opts.ctx.max_bits())?;
    let log2_theta = log2_bigint(&BigInt::from(params.theta.clone()));

    let first = params.first_index();
    let built: Vec<usize> = (first..=nmax).collect();
    let convergents: Vec<ConvergentMatrix> =
        exec::map(opts.exec, &built, |&n| build_bn(params, n)).into_iter().collect::<Result<_, _>>()?;
    let by_index = |n: usize| convergents.iter().find(|c| c.index == n);

    let indices: Vec<usize> = (1..=nmax).collect();
    let per_n = exec::map(opts.exec, &indices, |&n| {
        let bn = by_index(n).expect("built above");
        let prev = n.checked_sub(1).and_then(by_index);
        certify_one(params, &generators, &target, &limit_sq, &ctx, log2_theta, bn, prev)
    });

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for item in per_n {
        let (r, summary) = item?;
        records.extend(r);
        summaries.push(summary);
    }

    let deviations: Vec<f64> = summaries.iter().map(|s| s.ratio_deviation).collect();
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0]);
    records.push(rec(
        nmax,
        "ratioConvergence",
        monotone,
        json!({ "deviations": deviations.iter().map(|&d| finite_or_null(d)).collect::<Vec<_>>() }),
    ));
    let burn_in = summaries.iter().find(|s| s.ratio_deviation <= BURN_IN_DEVIATION).map(|s| s.n);

    if params.variant == Variant::Finite {
        let uppers: Vec<f64> = summaries.iter().filter_map(|s| s.upper_normalized_log2).collect();
        let lowers: Vec<f64> = summaries.iter().map(|s| s.lower_normalized_log2).collect();
        let spread =
            |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        let (su, sl) = (spread(&uppers), spread(&lowers));
        let ok = su.is_finite() && sl.is_finite() && su <= BAND_LOG2 && sl <= BAND_LOG2;
        records.push(rec(
            nmax,
            "angleBand",
            ok,
            json!({
                "upperSpreadLog2": finite_or_null(su),
                "lowerSpreadLog2": finite_or_null(sl),
                "bandLog2": BAND_LOG2,
                "upperNormalizedLog2": uppers,
                "lowerNormalizedLog2": lowers,
            }),
        ));
    }
    Ok(CertificationReport { records, summaries, depth, burn_in })
}

#[allow(clippy::too_many_arguments)]
fn certify_one(
    params: &ConstructionParams,
    generators: &GeneratorMatrix,
    target: &ExactTarget,
    limit_sq: &BigRational,
    ctx: &PrecisionContext,
    log2_theta: f64,
    bn: &ConvergentMatrix,
    prev: Option<&ConvergentMatrix>,
) -> Result<(Vec<CheckRecord>, ConvergentSummary), ConstructionError> {
    let n = bn.index;
    let ell = params.ell;
    let theta = BigInt::from(params.theta.clone());
    let scale = params.base_power(n)?;
    let h2 = bn.subspace.height_squared().clone();
    let mut out = Vec::new();

    // Primitivity: required for the finite variant and for ℓ = 1.
    let required = params.variant == Variant::Finite || ell == 1;
    out.push(rec(
        n,
        "primitivity",
        bn.primitive || !required,
        json!({ "primitive": bn.primitive, "required": required }),
    ));

    // Tails: 0 < ξ − f_N/θ^{s_N} < tail(N), using the depth-K partial sum plus its own tail.
    let tail_n = params.tail_upper(n)?;
    let mut tails_ok = true;
    let mut worst = BigRational::zero();
    for i in 0..ell {
        for j in 0..ell {
            let xi = generators.matrix.get(ell + i, j);
            let approx = BigRational::new(bn.f_matrix[i][j].clone(), scale.clone());
            let gap = xi - approx;
            let gap_upper = &gap + &generators.tail_upper;
            tails_ok &= gap.is_positive() && gap_upper < tail_n;
            let rel = &gap_upper / &tail_n;
            if rel > worst {
                worst = rel;
            }
        }
    }
    out.push(rec(
        n,
        "tailBound",
        tails_ok,
        json!({ "tailUpper": sci_string(&tail_n, 12), "worstGapOverBound": sci_string(&worst, 12) }),
    ));

    // |f_N| ≤ 2·d_max·θ^{s_N}.
    let f_bound = BigInt::from(2 * params.digit_max()) * &scale;
    let f_max = bn.f_matrix.iter().flatten().map(|f| f.abs()).max().expect("nonempty");
    out.push(rec(n, "entryBound", f_max <= f_bound, json!({ "maxEntry": s(&f_max), "bound": s(&f_bound) })));

    // H² ≤ (4·d_max²·2ℓ)^ℓ · θ^{2ℓ s_N}.
    let dmax = BigInt::from(params.digit_max());
    let constant = (BigInt::from(8 * ell) * &dmax * &dmax).pow(ell as u32);
    let h_bound = &constant * scale.pow(2 * ell as u32);
    out.push(rec(
        n,
        "heightUpperBound",
        h2 <= h_bound,
        json!({ "heightSquared": s(&h2), "boundSquared": s(&h_bound) }),
    ));

    if params.variant == Variant::Finite {
        // E_N strictly diagonally dominant, 0 < |det E_N| ≤ ℓ!(2ℓ+1)^ℓ < θ.
        let digits: Vec<Vec<i64>> =
            (0..ell).map(|i| (0..ell).map(|j| params.digits.digit(i, j, n) as i64).collect()).collect();
        let dominant = (0..ell).all(|j| {
            let off: i64 = (0..ell).filter(|&i| i != j).map(|i| digits[i][j]).sum();
            digits[j][j] > off
        });
        let rows: Vec<&[i64]> = digits.iter().map(|r| r.as_slice()).collect();
        let det = ExactMatrix::from_i64_rows(&rows)?.determinant()?;
        let bound = BigInt::from(theta_bound(ell));
        let det_abs = det.abs().to_integer();
        let ok = dominant && !det.is_zero() && det_abs <= bound && bound < theta;
        out.push(rec(
            n,
            "digitMatrix",
            ok,
            json!({ "diagonallyDominant": dominant, "det": s(&det.to_integer()), "bound": s(&bound) }),
        ));
    }

    if let Some(p) = prev {
        let grows = h2 > *p.subspace.height_squared();
        out.push(rec(n, "heightGrowth", grows, json!({ "previous": s(p.subspace.height_squared()) })));
    }

    // Height ratio H(B_N)/θ^{ℓ s_N} against ‖Y_1 ∧ … ∧ Y_ℓ‖.
    let ratio_sq = BigRational::new(h2.clone(), scale.pow(2 * ell as u32));
    let deviation = height_ratio_deviation(params, bn, limit_sq)?;
    out.push(rec(
        n,
        "heightRatio",
        true,
        json!({
            "ratio": rational_to_f64(&ratio_sq).sqrt(),
            "limit": rational_to_f64(limit_sq).sqrt(),
            "relDeviation": deviation,
        }),
    ));

    // Certified ψ_ℓ(A, B_N).
    let cert = certified_target_angles(target, &bn.full, ctx)?;
    let psi = cert.psi[ell - 1].clone();
    let witness = psi.lo.is_positive();
    let log_hi = log2_rational(&psi.hi);
    let log_lo = if witness { log2_rational(&psi.lo) } else { f64::NEG_INFINITY };
    let s_n = params.exponent(n).to_f64().unwrap_or(f64::INFINITY);
    let s_next = params.exponent(n + 1).to_f64().unwrap_or(f64::INFINITY);
    let upper = params.alpha.as_ref().map(|a| log_hi + rational_to_f64(a) * s_n * log2_theta);
    let lower = log_lo + s_next * log2_theta;
    let local_exponent = -2.0 * log_hi / log2_bigint(&h2);
    out.push(rec(
        n,
        "angle",
        witness,
        json!({
            "psiLo": sci_string(&psi.lo, 17),
            "psiHi": sci_string(&psi.hi, 17),
            "bitsUsed": cert.bits_used,
            "upperNormalizedLog2": upper.map_or(serde_json::Value::Null, finite_or_null),
            "lowerNormalizedLog2": finite_or_null(lower),
            "localExponent": finite_or_null(local_exponent),
        }),
    ));
    if params.variant == Variant::Infinite {
        let slope = n as f64 / ell as f64;
        out.push(rec(
            n,
            "exponentSlope",
            local_exponent >= slope,
            json!({ "localExponent": finite_or_null(local_exponent), "minimum": slope }),
        ));
    }

    let summary = ConvergentSummary {
        n,
        height_squared: h2,
        ratio_deviation: deviation,
        psi,
        upper_normalized_log2: upper,
        lower_normalized_log2: lower,
        local_exponent,
        subspace: bn.subspace.clone(),
    };
    Ok((out, summary))
}

#[cfg(test)]
mod tests;
