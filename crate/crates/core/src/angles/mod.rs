//! Principal angles between subspaces at adjustable binary precision.
//!
//! Values are sines: ψ_1 ≤ … ≤ ψ_t with ψ_j = sin θ_j.

mod certify;

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::exact::{ExactError, ExactMatrix};
use crate::real::Real;

pub use certify::{
    certified_angles, certified_target_angles, sine_characteristic_polynomial, CertifiedAngles, ExactTarget,
    RationalInterval,
};

pub const DEFAULT_BITS: usize = 256;
pub const DEFAULT_MAX_BITS: usize = 1 << 20;
pub const MAX_BITS_ENV: &str = "SUBDIOPH_MAX_BITS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngleError {
    #[error("column {column} lost rank during orthogonalization at {bits} bits")]
    NumericalRankLoss { column: usize, bits: usize },
    #[error("requested relative error not reached within {bits} bits")]
    PrecisionExhausted { bits: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid precision context: {0}")]
    InvalidContext(String),
    #[error("basis is not orthonormal")]
    NotOrthonormal,
    #[error("could not certify angle {index}")]
    CertificationFailed { index: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Working precision and stopping tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionContext {
    bits: usize,
    target_rel_err: f64,
    max_bits: usize,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self { bits: DEFAULT_BITS, target_rel_err: (-48f64).exp2(), max_bits: max_bits_from_env() }
    }
}

/// Precision cap from `SUBDIOPH_MAX_BITS`, falling back to 2^20.
pub fn max_bits_from_env() -> usize {
    std::env::var(MAX_BITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v >= 64)
        .unwrap_or(DEFAULT_MAX_BITS)
}

impl PrecisionContext {
    pub fn new(bits: usize, target_rel_err: f64, max_bits: usize) -> Result<Self, AngleError> {
        if bits < 64 {
            return Err(AngleError::InvalidContext(format!("{bits} bits is below the 64-bit floor")));
        }
        if !(target_rel_err > 0.0 && target_rel_err.is_finite()) {
            return Err(AngleError::InvalidContext("target relative error must be positive".into()));
        }
        if max_bits < bits {
            return Err(AngleError::InvalidContext(format!("cap {max_bits} is below {bits} bits")));
        }
        Ok(Self { bits, target_rel_err, max_bits })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn target_rel_err(&self) -> f64 {
        self.target_rel_err
    }

    pub fn max_bits(&self) -> usize {
        self.max_bits
    }

    pub fn with_bits(&self, bits: usize) -> Self {
        Self { bits: bits.max(64), max_bits: self.max_bits.max(bits), ..*self }
    }

    pub fn with_target(&self, target_rel_err: f64) -> Self {
        Self { target_rel_err, ..*self }
    }

    /// Values at or below 2^(-bits/4) are not resolved at this precision.
    pub fn resolution_log2(&self) -> f64 {
        -(self.bits as f64) / 4.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SourceTag {
    ExactTruncation,
    FloatInput,
}

/// Real n×d matrix stored by columns.
#[derive(Clone, Debug)]
pub struct RealBasis {
    n: usize,
    columns: Vec<Vec<Real>>,
    orthonormal: bool,
    source: SourceTag,
    bits: usize,
}

impl RealBasis {
    pub fn from_exact(m: &ExactMatrix, bits: usize) -> Self {
        let columns = m.columns().iter().map(|c| c.iter().map(|x| Real::from_rational(x, bits)).collect()).collect();
        Self { n: m.rows(), columns, orthonormal: false, source: SourceTag::ExactTruncation, bits }
    }

    pub fn from_f64_columns(columns: &[Vec<f64>], bits: usize) -> Result<Self, AngleError> {
        let cols: Vec<Vec<Real>> =
            columns.iter().map(|c| c.iter().map(|&x| Real::from_f64(x, bits)).collect()).collect();
        Self::from_columns(cols, bits, SourceTag::FloatInput)
    }

    pub fn from_columns(columns: Vec<Vec<Real>>, bits: usize, source: SourceTag) -> Result<Self, AngleError> {
        let n = columns.first().map_or(0, |c| c.len());
        if n == 0 || columns.iter().any(|c| c.len() != n) {
            return Err(AngleError::DimensionMismatch("empty or ragged columns".into()));
        }
        Ok(Self { n, columns, orthonormal: false, source, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<Real>] {
        &self.columns
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn source(&self) -> SourceTag {
        self.source
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// log₂ of max |QᵀQ − I| entries.
    pub fn orthonormality_residual_log2(&self) -> f64 {
        let bits = self.bits.max(64) * 2;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.d() {
            for j in 0..self.d() {
                let mut g = dot(&self.columns[i], &self.columns[j], bits);
                if i == j {
                    g = g.sub(&Real::one(bits), bits);
                }
                worst = worst.max(g.log2());
            }
        }
        worst
    }

    /// Left multiplication by a real matrix given by rows.
    pub fn left_multiply(&self, rows: &[Vec<Real>], bits: usize) -> Result<Self, AngleError> {
        if rows.iter().any(|r| r.len() != self.n) {
            return Err(AngleError::DimensionMismatch("map width differs from ambient dimension".into()));
        }
        let columns = self.columns.iter().map(|c| rows.iter().map(|r| dot(r, c, bits)).collect()).collect();
        Self::from_columns(columns, bits, self.source)
    }
}

pub(crate) fn dot(x: &[Real], y: &[Real], bits: usize) -> Real {
    x.iter().zip(y).fold(Real::zero(bits), |acc, (a, b)| acc.add(&a.mul(b, bits), bits))
}

fn norm(x: &[Real], bits: usize) -> Real {
    dot(x, x, bits).sqrt(bits)
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
pub fn orthonormal_basis(gen: &RealBasis, ctx: &PrecisionContext) -> Result<RealBasis, AngleError> {
    let bits = ctx.bits;
    let collapse = -(bits as f64) / 2.0;
    let mut q: Vec<Vec<Real>> = Vec::with_capacity(gen.d());
    for (j, col) in gen.columns.iter().enumerate() {
        let original = norm(col, bits);
        if original.is_zero() {
            return Err(AngleError::NumericalRankLoss { column: j, bits });
        }
        let mut v = col.clone();
        for _ in 0..2 {
            for qi in &q {
                let r = dot(qi, &v, bits);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk = vk.sub(&r.mul(qk, bits), bits);
                }
            }
        }
        let nv = norm(&v, bits);
        if nv.is_zero() || nv.log2() - original.log2() < collapse {
            return Err(AngleError::NumericalRankLoss { column: j, bits });
        }
        q.push(v.iter().map(|x| x.div(&nv, bits)).collect());
    }
    let out = RealBasis { n: gen.n, columns: q, orthonormal: true, source: gen.source, bits };
    if out.orthonormality_residual_log2() > collapse {
        return Err(AngleError::NumericalRankLoss { column: gen.d() - 1, bits });
    }
    Ok(out)
}

/// One ψ_j value. Values at or below the resolution 2^(-bits/4) are reported as the
/// interval [0, resolution].
#[derive(Clone, Debug)]
pub struct Psi {
    value: Real,
    resolved: bool,
    resolution_log2: f64,
}

impl Psi {
    pub fn value(&self) -> &Real {
        &self.value
    }

    pub fn is_resolved(&self) -> bool {
        self.resolved
    }

    /// Upper end as a double; for unresolved entries the resolution bound.
    pub fn upper_f64(&self) -> f64 {
        if self.resolved {
            self.value.to_f64()
        } else {
            self.resolution_log2.exp2()
        }
    }

    pub fn upper_log2(&self) -> f64 {
        if self.resolved {
            self.value.log2()
        } else {
            self.resolution_log2
        }
    }
}

#[derive(Clone, Debug)]
pub struct AngleProfile {
    psi: Vec<Psi>,
    rel_err_bound: f64,
    bits_used: usize,
}

impl AngleProfile {
    pub fn t(&self) -> usize {
        self.psi.len()
    }

    pub fn psi(&self) -> &[Psi] {
        &self.psi
    }

    pub fn rel_err_bound(&self) -> f64 {
        self.rel_err_bound
    }

    pub fn bits_used(&self) -> usize {
        self.bits_used
    }

    /// Point values as doubles (unresolved entries give their upper bound).
    pub fn to_f64(&self) -> Vec<f64> {
        self.psi.iter().map(|p| if p.resolved { p.value.to_f64() } else { p.upper_f64() }).collect()
    }
}

/// Sines of the principal angles between the spans of two orthonormal bases:
/// ψ_j = sqrt(1 − σ_j²) for the singular values σ of Q_AᵀQ_B.
pub fn principal_angles(a: &RealBasis, b: &RealBasis, ctx: &PrecisionContext) -> Result<AngleProfile, AngleError> {
    if ctx.bits > ctx.max_bits {
        return Err(AngleError::PrecisionExhausted { bits: ctx.bits });
    }
    if a.n != b.n {
        return Err(AngleError::DimensionMismatch(format!("R^{} vs R^{}", a.n, b.n)));
    }
    if !a.orthonormal || !b.orthonormal {
        return Err(AngleError::NotOrthonormal);
    }
    let bits = ctx.bits;
    let (small, large) = if a.d() <= b.d() { (a, b) } else { (b, a) };
    let t = small.d();
    let cross: Vec<Vec<Real>> =
        small.columns.iter().map(|qa| large.columns.iter().map(|qb| dot(qa, qb, bits)).collect()).collect();
    let mut w = vec![vec![Real::zero(bits); t]; t];
    for i in 0..t {
        for j in i..t {
            let v = dot(&cross[i], &cross[j], bits);
            w[j][i] = v.clone();
            w[i][j] = v;
        }
    }
    let mut cos_sq = symmetric_eigenvalues(w, bits);
    cos_sq.sort_by(|x, y| y.cmp_value(x));
    let one = Real::one(bits);
    let resolution_log2 = ctx.resolution_log2();
    let mut rel = (4.0 - bits as f64).exp2();
    let psi: Vec<Psi> = cos_sq
        .iter()
        .map(|c| {
            let s2 = one.sub(c, bits).clamp_nonnegative();
            let s2 = if s2.cmp_value(&one) == Ordering::Greater { one.clone() } else { s2 };
            let value = s2.sqrt(bits);
            let resolved = !value.is_zero() && value.log2() > resolution_log2;
            if resolved {
                rel = rel.max((4.0 - bits as f64 - 2.0 * value.log2()).exp2());
            }
            Psi { value, resolved, resolution_log2 }
        })
        .collect();
    Ok(AngleProfile { psi, rel_err_bound: rel, bits_used: bits })
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix.
fn symmetric_eigenvalues(mut a: Vec<Vec<Real>>, bits: usize) -> Vec<Real> {
    let n = a.len();
    if n == 1 {
        return vec![a[0][0].clone()];
    }
    let one = Real::one(bits);
    let scale = a.iter().flatten().map(|x| x.log2()).fold(f64::NEG_INFINITY, f64::max);
    let stop = scale - bits as f64 - 8.0;
    for _sweep in 0..64 {
        let off = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].log2())
            .fold(f64::NEG_INFINITY, f64::max);
        if off < stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].is_zero() || a[p][q].log2() < stop {
                    continue;
                }
                let two_apq = a[p][q].add(&a[p][q], bits);
                let tau = a[q][q].sub(&a[p][p], bits).div(&two_apq, bits);
                let root = one.add(&tau.mul(&tau, bits), bits).sqrt(bits);
                let denom = tau.abs().add(&root, bits);
                let mut t = one.div(&denom, bits);
                if tau.is_negative() {
                    t = t.neg();
                }
                let c = one.div(&one.add(&t.mul(&t, bits), bits).sqrt(bits), bits);
                let s = t.mul(&c, bits);
                let tapq = t.mul(&a[p][q], bits);
                a[p][p] = a[p][p].sub(&tapq, bits);
                a[q][q] = a[q][q].add(&tapq, bits);
                a[p][q] = Real::zero(bits);
                a[q][p] = Real::zero(bits);
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r][p].clone();
                    let arq = a[r][q].clone();
                    let new_p = c.mul(&arp, bits).sub(&s.mul(&arq, bits), bits);
                    let new_q = s.mul(&arp, bits).add(&c.mul(&arq, bits), bits);
                    a[r][p] = new_p.clone();
                    a[p][r] = new_p;
                    a[r][q] = new_q.clone();
                    a[q][r] = new_q;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i].clone()).collect()
}

/// ψ(X, Y) = sqrt(‖X‖²‖Y‖² − (X·Y)²) / (‖X‖‖Y‖).
pub fn vector_angle(x: &[Real], y: &[Real], ctx: &PrecisionContext) -> Result<Real, AngleError> {
    if x.len() != y.len() {
        return Err(AngleError::DimensionMismatch("vectors of different length".into()));
    }
    let bits = ctx.bits;
    let xx = dot(x, x, bits);
    let yy = dot(y, y, bits);
    if xx.is_zero() || yy.is_zero() {
        return Err(AngleError::ZeroVector);
    }
    let xy = dot(x, y, bits);
    let num = xx.mul(&yy, bits).sub(&xy.mul(&xy, bits), bits).clamp_nonnegative();
    let ratio = num.div(&xx.mul(&yy, bits), bits);
    let one = Real::one(bits);
    let ratio = if ratio.cmp_value(&one) == Ordering::Greater { one } else { ratio };
    Ok(ratio.sqrt(bits))
}

/// Generators for the adaptive routine: exact rationals (re-rounded at each precision)
/// or an already materialized real basis.
#[derive(Clone, Copy, Debug)]
pub enum AngleInput<'a> {
    Exact(&'a ExactMatrix),
    Real(&'a RealBasis),
}

impl AngleInput<'_> {
    fn materialize(&self, bits: usize) -> RealBasis {
        match self {
            AngleInput::Exact(m) => RealBasis::from_exact(m, bits),
            AngleInput::Real(r) => RealBasis { bits, orthonormal: false, ..(*r).clone() },
        }
    }
}

fn angles_at(a: AngleInput, b: AngleInput, ctx: &PrecisionContext) -> Result<AngleProfile, AngleError> {
    let qa = orthonormal_basis(&a.materialize(ctx.bits), ctx)?;
    let qb = orthonormal_basis(&b.materialize(ctx.bits), ctx)?;
    principal_angles(&qa, &qb, ctx)
}

/// Doubles the precision until two consecutive evaluations agree to the target on
/// every resolved ψ_j. The reported bound is the observed disagreement, floored at
/// 2^(-bits/2) of the coarser evaluation.
pub fn angles_adaptive(a: AngleInput, b: AngleInput, ctx: &PrecisionContext) -> Result<AngleProfile, AngleError> {
    let mut bits = ctx.bits;
    let mut prev = angles_at(a, b, &ctx.with_bits(bits))?;
    loop {
        let next_bits = bits * 2;
        if next_bits > ctx.max_bits {
            return Err(AngleError::PrecisionExhausted { bits });
        }
        let cur = angles_at(a, b, &PrecisionContext { bits: next_bits, ..*ctx })?;
        let mut disagreement = 0f64;
        let mut comparable = true;
        for (p, c) in prev.psi.iter().zip(&cur.psi) {
            if !c.resolved {
                continue;
            }
            if !p.resolved {
                comparable = false;
                break;
            }
            let diff = p.value.sub(&c.value, next_bits).abs();
            if !diff.is_zero() {
                disagreement = disagreement.max((diff.log2() - c.value.log2()).exp2());
            }
        }
        let floor = (-(bits as f64) / 2.0).exp2();
        let bound = disagreement.max(floor);
        if comparable && bound <= ctx.target_rel_err {
            return Ok(AngleProfile { rel_err_bound: bound, ..cur });
        }
        prev = cur;
        bits = next_bits;
    }
}
