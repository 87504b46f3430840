//! Record-setting approximants, exponent estimates, exclusivity of the constructed
//! convergents and finite-height irrationality witnesses.
//!
//! Enumerated candidates first get a double-precision interval for ψ_j. Candidates
//! whose interval lies above that of a subspace of no greater height cannot be records
//! and are dropped; the rest are certified exactly.

pub mod float;

use std::cell::{Cell, RefCell};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::angles::{
    certified_target_angles, orthonormal_basis, AngleError, ExactTarget, PrecisionContext, RationalInterval, RealBasis,
};
use crate::construction::{build_bn, build_generators_a, burn_in_index, ConstructionError, ConstructionParams};
use crate::enumeration::{hadamard_ratio, visit_unit, Candidate, CandidateRef, EnumSpec, EnumerationError, Kind};
use crate::exact::{log2_bigint, log2_rational, rational_to_f64, ExactError, ExactMatrix, RationalSubspace};
use crate::exec::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("target is not irrational at height {height_squared}: psi_j cannot be separated from 0 for {pluecker:?}")]
    IrrationalityViolation { pluecker: Vec<String>, height_squared: String },
    #[error("need at least 2 records with height > 1, found {0}")]
    InsufficientRecords(usize),
    #[error("angle index j = {j} outside 1..={t}")]
    InvalidIndex { j: usize, t: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

/// A target subspace: exact generators (with perturbation bound) plus a double-precision
/// orthonormal basis for prefiltering.
#[derive(Clone, Debug)]
pub struct Target {
    exact: ExactTarget,
    q: Vec<Vec<f64>>,
    delta: f64,
}

impl Target {
    pub fn new(exact: ExactTarget, ctx: &PrecisionContext) -> Result<Self, EstimationError> {
        let basis = RealBasis::from_exact(exact.generators(), ctx.bits());
        let q: Vec<Vec<f64>> =
            orthonormal_basis(&basis, ctx)?.columns().iter().map(|c| c.iter().map(|x| x.to_f64()).collect()).collect();
        let delta = match rational_to_f64(exact.perturbation()) {
            d if d == 0.0 && !exact.perturbation().is_zero() => f64::MIN_POSITIVE,
            d => d * (1.0 + 1e-15),
        };
        Ok(Self { exact, q, delta })
    }

    pub fn from_generators(generators: ExactMatrix, ctx: &PrecisionContext) -> Result<Self, EstimationError> {
        Self::new(ExactTarget::exact(generators)?, ctx)
    }

    /// The line through (1, φ) in ℝ², represented by (1, F_{k+1}/F_k) with
    /// δ = 1/F_k² ≥ |φ − F_{k+1}/F_k|.
    pub fn golden_line(k: usize, ctx: &PrecisionContext) -> Result<Self, EstimationError> {
        let (mut a, mut b) = (BigInt::zero(), BigInt::one());
        for _ in 0..k {
            let next = &a + &b;
            a = b;
            b = next;
        }
        let mut m = ExactMatrix::zeros(2, 1);
        m.set(0, 0, BigRational::one());
        m.set(1, 0, BigRational::new(&a + &b, b.clone()));
        let delta = BigRational::new(BigInt::one(), &b * &b);
        Self::new(ExactTarget::new(m, delta)?, ctx)
    }

    pub fn exact(&self) -> &ExactTarget {
        &self.exact
    }

    pub fn n(&self) -> usize {
        self.exact.n()
    }

    pub fn d(&self) -> usize {
        self.exact.d()
    }

    /// The same subspace with generators multiplied by `s`.
    pub fn scaled(&self, s: &BigRational, ctx: &PrecisionContext) -> Result<Self, EstimationError> {
        Self::new(self.exact.scaled(s), ctx)
    }

    /// Double-precision enclosure of ψ_j(A, candidate).
    fn float_interval(&self, c: &CandidateRef<'_>, j: usize) -> (f64, f64) {
        let psi = if c.kind == Kind::Line {
            float::line_sine(&self.q, c.coords, c.height_squared)
        } else {
            let cols: Vec<Vec<f64>> =
                crate::enumeration::generators(c).iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
            match float::orthonormalize(&cols) {
                Some(qb) => float::principal_sines(&self.q, &qb)[j - 1],
                None => return (0.0, 1.0),
            }
        };
        let tol = float::abs_tolerance(c.n, hadamard_ratio(c)) + 1e-12 * psi;
        ((psi - tol - self.delta).max(0.0), (psi + tol + self.delta).min(1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordSource {
    Enumerated,
    Constructed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproximationRecord {
    pub subspace: RationalSubspace,
    pub psi: RationalInterval,
    pub j: usize,
    pub source: RecordSource,
}

impl ApproximationRecord {
    pub fn height_squared(&self) -> &BigInt {
        self.subspace.height_squared()
    }

    /// −log ψ_hi / log H, or `None` at height 1 or for ψ_hi = 0.
    pub fn exponent(&self) -> Option<f64> {
        let h = log2_bigint(self.height_squared());
        if h <= 0.0 || self.psi.hi.is_zero() {
            return None;
        }
        Some(-2.0 * log2_rational(&self.psi.hi) / h)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScanOptions {
    pub ctx: PrecisionContext,
    pub exec: Execution,
}

#[derive(Clone, Debug)]
struct Survivor {
    candidate: Candidate,
    lo: f64,
}

/// Candidates not yet known to be beaten by a subspace of no greater height.
#[derive(Clone, Debug, Default)]
struct Frontier {
    /// (height², hi) with heights increasing and hi strictly decreasing.
    thresholds: Vec<(u64, f64)>,
    survivors: Vec<Survivor>,
    pruned_len: usize,
    seen: u64,
}

impl Frontier {
    fn dominated(&self, h2: u64, lo: f64) -> bool {
        let i = self.thresholds.partition_point(|&(h, _)| h <= h2);
        i > 0 && self.thresholds[i - 1].1 < lo
    }

    fn add_threshold(&mut self, h2: u64, hi: f64) {
        let i = self.thresholds.partition_point(|&(h, _)| h <= h2);
        if i > 0 && self.thresholds[i - 1].1 <= hi {
            return;
        }
        let end = i + self.thresholds[i..].iter().take_while(|&&(_, t)| t >= hi).count();
        self.thresholds.splice(i..end, [(h2, hi)]);
    }

    fn offer(&mut self, candidate: Candidate, lo: f64, hi: f64) {
        if self.dominated(candidate.height_squared, lo) {
            return;
        }
        self.add_threshold(candidate.height_squared, hi);
        self.survivors.push(Survivor { candidate, lo });
        if self.survivors.len() > 2 * self.pruned_len + 64 {
            self.prune();
        }
    }

    fn prune(&mut self) {
        let thresholds = std::mem::take(&mut self.thresholds);
        let probe = Frontier { thresholds, ..Default::default() };
        self.survivors.retain(|s| !probe.dominated(s.candidate.height_squared, s.lo));
        self.thresholds = probe.thresholds;
        self.pruned_len = self.survivors.len();
    }

    fn merge(mut self, other: Frontier) -> Frontier {
        for &(h, t) in &other.thresholds {
            self.add_threshold(h, t);
        }
        self.survivors.extend(other.survivors);
        self.seen += other.seen;
        self.prune();
        self
    }
}

fn check_index(target: &Target, spec: &EnumSpec, j: usize) -> Result<(), EstimationError> {
    if target.n() != spec.n {
        return Err(EstimationError::ShapeMismatch(format!("target in R^{}, enumeration in R^{}", target.n(), spec.n)));
    }
    let t = target.d().min(spec.e);
    if j == 0 || j > t {
        return Err(EstimationError::InvalidIndex { j, t });
    }
    Ok(())
}

fn scan_frontier(target: &Target, spec: &EnumSpec, j: usize, exec: Execution) -> Frontier {
    let units = spec.units();
    exec::fold_reduce(
        exec,
        &units,
        Frontier::default,
        |acc, &unit| {
            let frontier = RefCell::new(acc);
            let last = Cell::new((0.0f64, 0.0f64));
            let line = spec.e == 1;
            visit_unit(
                spec,
                unit,
                |x, h2| {
                    if !line {
                        return true;
                    }
                    let probe =
                        CandidateRef { kind: Kind::Line, n: spec.n, e: 1, coords: x, basis: &[], height_squared: h2 };
                    let (lo, hi) = target.float_interval(&probe, j);
                    last.set((lo, hi));
                    let mut f = frontier.borrow_mut();
                    f.seen += 1;
                    !f.dominated(h2, lo)
                },
                |c| {
                    let (lo, hi) = if line { last.get() } else { target.float_interval(&c, j) };
                    let mut f = frontier.borrow_mut();
                    if !line {
                        f.seen += 1;
                    }
                    f.offer(c.to_owned(), lo, hi);
                },
            );
            frontier.into_inner()
        },
        Frontier::merge,
    )
}

/// Result of a record scan.
#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub records: Vec<ApproximationRecord>,
    /// Sign-canonical vectors or subspaces examined.
    pub examined: u64,
    /// Candidates certified exactly.
    pub certified: usize,
}

/// Subspaces of the enumeration achieving a new minimum of ψ_j among all enumerated
/// subspaces of no greater height, with certified intervals.
pub fn scan_records(
    target: &Target,
    spec: &EnumSpec,
    j: usize,
    opts: &ScanOptions,
) -> Result<ScanOutcome, EstimationError> {
    check_index(target, spec, j)?;
    spec.validate()?;
    let frontier = scan_frontier(target, spec, j, opts.exec);
    let certified = certify_candidates(target, &frontier.survivors, j, opts)?;
    if let Some((sub, _)) = certified.iter().find(|(_, iv)| iv.lo.is_zero()) {
        return Err(EstimationError::IrrationalityViolation {
            pluecker: sub.pluecker().to_strings(),
            height_squared: sub.height_squared().to_string(),
        });
    }
    let count = certified.len();
    let records = select_records(certified, j, RecordSource::Enumerated);
    Ok(ScanOutcome { records, examined: frontier.seen, certified: count })
}

fn certify_candidates(
    target: &Target,
    survivors: &[Survivor],
    j: usize,
    opts: &ScanOptions,
) -> Result<Vec<(RationalSubspace, RationalInterval)>, EstimationError> {
    exec::map(opts.exec, survivors, |s| {
        let sub = s.candidate.to_subspace()?;
        let iv = certify_one(target.exact(), &sub, j, &opts.ctx)?;
        Ok((sub, iv))
    })
    .into_iter()
    .collect()
}

fn certify_one(
    target: &ExactTarget,
    sub: &RationalSubspace,
    j: usize,
    ctx: &PrecisionContext,
) -> Result<RationalInterval, EstimationError> {
    let cert = certified_target_angles(target, sub.basis(), ctx)?;
    Ok(cert.psi[j - 1].clone())
}

/// Strict running minimum of ψ_hi in order of (height, ψ_hi, Plücker vector).
fn select_records(
    mut items: Vec<(RationalSubspace, RationalInterval)>,
    j: usize,
    source: RecordSource,
) -> Vec<ApproximationRecord> {
    items.sort_by(|(a, ia), (b, ib)| {
        a.height_squared()
            .cmp(b.height_squared())
            .then_with(|| ia.hi.cmp(&ib.hi))
            .then_with(|| a.pluecker().coords().cmp(b.pluecker().coords()))
    });
    let mut best: Option<BigRational> = None;
    let mut out = Vec::new();
    for (subspace, psi) in items {
        if best.as_ref().is_none_or(|b| psi.hi < *b) {
            best = Some(psi.hi.clone());
            out.push(ApproximationRecord { subspace, psi, j, source });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExponentEstimate {
    #[serde(serialize_with = "crate::report::finite::serialize")]
    pub mu_hat: f64,
    pub method: &'static str,
    #[serde(serialize_with = "crate::report::finite::vec")]
    pub per_record_exponents: Vec<f64>,
    pub record_count: usize,
    pub height_squared_min: String,
    pub height_squared_max: String,
}

/// μ̂ = max of the last ⌈m/2⌉ per-record exponents −2 log ψ_hi / log H² over the m
/// records of height > 1.
pub fn estimate_exponent(records: &[ApproximationRecord]) -> Result<ExponentEstimate, EstimationError> {
    let usable: Vec<(&ApproximationRecord, f64)> =
        records.iter().filter_map(|r| r.exponent().map(|b| (r, b))).collect();
    let m = usable.len();
    if m < 2 {
        return Err(EstimationError::InsufficientRecords(m));
    }
    let betas: Vec<f64> = usable.iter().map(|(_, b)| *b).collect();
    let mu_hat = betas[m - m.div_ceil(2)..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentEstimate {
        mu_hat,
        method: "RECORD_SLOPE",
        per_record_exponents: betas,
        record_count: records.len(),
        height_squared_min: usable[0].0.height_squared().to_string(),
        height_squared_max: usable[m - 1].0.height_squared().to_string(),
    })
}

/// Certified records for the convergents B_1, …, B_nmax of a construction.
pub fn constructed_records(
    params: &ConstructionParams,
    nmax: usize,
    opts: &ScanOptions,
) -> Result<Vec<ApproximationRecord>, EstimationError> {
    let target = build_generators_a(params, nmax + 2)?.target()?;
    let indices: Vec<usize> = (1..=nmax).collect();
    exec::map(opts.exec, &indices, |&n| {
        let bn = build_bn(params, n)?;
        let psi = certify_one(&target, &bn.subspace, params.ell(), &opts.ctx)?;
        Ok(ApproximationRecord { subspace: bn.subspace, psi, j: params.ell(), source: RecordSource::Constructed(n) })
    })
    .into_iter()
    .collect()
}

/// Target of a construction truncated at depth nmax + 2.
pub fn construction_target(
    params: &ConstructionParams,
    nmax: usize,
    ctx: &PrecisionContext,
) -> Result<Target, EstimationError> {
    Target::new(build_generators_a(params, nmax + 2)?.target()?, ctx)
}

#[derive(Clone, Debug)]
pub struct ExclusivityEntry {
    pub record: ApproximationRecord,
    pub convergent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExclusivityReport {
    pub burn_in: Option<usize>,
    /// H² of the burn-in convergent; records at or above it must be convergents.
    pub window_start: Option<BigInt>,
    pub window_end: u64,
    /// (N, H²(B_N)) for the convergents inside the enumeration bound.
    pub convergents: Vec<(usize, BigInt)>,
    pub entries: Vec<ExclusivityEntry>,
}

impl ExclusivityReport {
    fn in_window(&self, e: &ExclusivityEntry) -> bool {
        self.window_start.as_ref().is_some_and(|h0| e.record.height_squared() >= h0)
    }

    /// Records inside the window that are not convergents.
    pub fn interlopers(&self) -> impl Iterator<Item = &ExclusivityEntry> {
        self.entries.iter().filter(|e| self.in_window(e) && e.convergent.is_none())
    }

    /// Non-convergent records below the burn-in height (reported, not failed).
    pub fn below_burn_in(&self) -> impl Iterator<Item = &ExclusivityEntry> {
        self.entries.iter().filter(|e| !self.in_window(e) && e.convergent.is_none())
    }

    pub fn passed(&self) -> bool {
        self.window_start.is_some() && self.interlopers().next().is_none()
    }
}

/// Compares the records of an exhaustive scan with the convergents B_N.
pub fn exclusivity_check(
    params: &ConstructionParams,
    nmax: usize,
    spec: &EnumSpec,
    opts: &ScanOptions,
) -> Result<ExclusivityReport, EstimationError> {
    let ell = params.ell();
    if (spec.n, spec.e) != (2 * ell, ell) || !spec.strategy.is_exact() {
        return Err(EstimationError::ShapeMismatch(format!(
            "exclusivity needs an exact enumeration of ({}, {})",
            2 * ell,
            ell
        )));
    }
    let target = construction_target(params, nmax, &opts.ctx)?;
    let scan = scan_records(&target, spec, ell, opts)?;
    let bound = BigInt::from(spec.height_squared_max);
    let mut convergents = Vec::new();
    let mut keys = Vec::new();
    for n in params.first_index().max(1)..=nmax {
        let bn = build_bn(params, n)?;
        if *bn.subspace.height_squared() <= bound {
            convergents.push((n, bn.subspace.height_squared().clone()));
        }
        keys.push((n, bn.subspace));
    }
    let burn_in = burn_in_index(params, nmax)?;
    let window_start =
        burn_in.and_then(|b| keys.iter().find(|(n, _)| *n == b)).map(|(_, s)| s.height_squared().clone());
    let entries = scan
        .records
        .into_iter()
        .map(|record| {
            let convergent = keys.iter().find(|(_, s)| *s == record.subspace).map(|(n, _)| *n);
            ExclusivityEntry { record, convergent }
        })
        .collect();
    Ok(ExclusivityReport { burn_in, window_start, window_end: spec.height_squared_max, convergents, entries })
}

#[derive(Clone, Debug)]
pub struct IrrationalityWitness {
    /// Certified lower bound on min ψ_j over the enumeration.
    pub min_lower: BigRational,
    pub argmin: Option<RationalSubspace>,
    pub examined: u64,
    pub certified: usize,
}

impl IrrationalityWitness {
    pub fn is_witness(&self) -> bool {
        self.min_lower.is_positive()
    }
}

#[derive(Clone, Debug, Default)]
struct MinTracker {
    best_hi: f64,
    keep: Vec<Survivor>,
    seen: u64,
}

impl MinTracker {
    fn new() -> Self {
        Self { best_hi: f64::INFINITY, ..Default::default() }
    }

    fn offer(&mut self, candidate: Candidate, lo: f64, hi: f64) {
        if lo > self.best_hi {
            return;
        }
        if hi < self.best_hi {
            self.best_hi = hi;
            let b = hi;
            self.keep.retain(|s| s.lo <= b);
        }
        self.keep.push(Survivor { candidate, lo });
    }

    fn merge(mut self, other: MinTracker) -> MinTracker {
        self.best_hi = self.best_hi.min(other.best_hi);
        self.seen += other.seen;
        self.keep.extend(other.keep);
        let b = self.best_hi;
        self.keep.retain(|s| s.lo <= b);
        self
    }
}

/// Certified lower bound on min_B ψ_j(A, B) over the enumeration.
pub fn irrationality_scan(
    target: &Target,
    spec: &EnumSpec,
    j: usize,
    opts: &ScanOptions,
) -> Result<IrrationalityWitness, EstimationError> {
    check_index(target, spec, j)?;
    spec.validate()?;
    let units = spec.units();
    let tracker = exec::fold_reduce(
        opts.exec,
        &units,
        MinTracker::new,
        |acc, &unit| {
            let tracker = RefCell::new(acc);
            visit_unit(
                spec,
                unit,
                |_, _| true,
                |c| {
                    let (lo, hi) = target.float_interval(&c, j);
                    let mut t = tracker.borrow_mut();
                    t.seen += 1;
                    t.offer(c.to_owned(), lo, hi);
                },
            );
            tracker.into_inner()
        },
        MinTracker::merge,
    );
    let certified = certify_candidates(target, &tracker.keep, j, opts)?;
    let best = certified.iter().min_by(|(a, ia), (b, ib)| ia.lo.cmp(&ib.lo).then_with(|| a.cmp(b)));
    Ok(IrrationalityWitness {
        min_lower: best.map_or_else(BigRational::one, |(_, iv)| iv.lo.clone()),
        argmin: best.map(|(s, _)| s.clone()),
        examined: tracker.seen,
        certified: certified.len(),
    })
}

/// Exponent of a record as an f64 usable in reports.
pub fn finite_exponent(r: &ApproximationRecord) -> Option<f64> {
    r.exponent().filter(|x| x.is_finite())
}
