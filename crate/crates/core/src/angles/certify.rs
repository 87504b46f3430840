//! Exact certification of principal angles between rational subspaces.
//!
//! For generator matrices A (n×d, d ≤ e) and B (n×e) the d×d matrix
//! I − (AᵀA)⁻¹ AᵀB (BᵀB)⁻¹ BᵀA is similar to a symmetric matrix whose eigenvalues are
//! ψ_1², …, ψ_d². Its characteristic polynomial is therefore real-rooted, and Descartes'
//! rule of signs counts its roots on either side of any rational point exactly. Floating
//! estimates from `angles_adaptive` supply candidate intervals that are then checked
//! against these counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{angles_adaptive, AngleError, AngleInput, PrecisionContext};
use crate::exact::{ExactError, ExactMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalInterval {
    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Widens by `delta` on both sides and clips to [0, 1].
    pub fn widen_unit(&self, delta: &BigRational) -> Self {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let lo = &self.lo - delta;
        let hi = &self.hi + delta;
        Self { lo: if lo < zero { zero } else { lo }, hi: if hi > one { one } else { hi } }
    }
}

/// A target subspace known through exact rational generators A′ and a bound δ on
/// sin θ_max(A, A′) for the true target A. With δ = 0 the generators are the target.
#[derive(Clone, Debug)]
pub struct ExactTarget {
    generators: ExactMatrix,
    perturbation: BigRational,
}

impl ExactTarget {
    pub fn new(generators: ExactMatrix, perturbation: BigRational) -> Result<Self, AngleError> {
        if perturbation.is_negative() {
            return Err(AngleError::InvalidContext("negative perturbation".into()));
        }
        let rank = generators.rank();
        if rank != generators.cols() {
            return Err(ExactError::RankDeficient { rank, expected: generators.cols() }.into());
        }
        Ok(Self { generators, perturbation })
    }

    pub fn exact(generators: ExactMatrix) -> Result<Self, AngleError> {
        Self::new(generators, BigRational::zero())
    }

    pub fn n(&self) -> usize {
        self.generators.rows()
    }

    pub fn d(&self) -> usize {
        self.generators.cols()
    }

    pub fn generators(&self) -> &ExactMatrix {
        &self.generators
    }

    pub fn perturbation(&self) -> &BigRational {
        &self.perturbation
    }

    /// Same subspace, generators multiplied by a nonzero scalar.
    pub fn scaled(&self, s: &BigRational) -> Self {
        Self { generators: self.generators.scale(s), perturbation: self.perturbation.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct CertifiedAngles {
    /// Intervals for ψ_1 ≤ … ≤ ψ_t.
    pub psi: Vec<RationalInterval>,
    /// Number of leading angles that are exactly zero, i.e. dim(A′ ∩ B).
    pub exact_zeros: usize,
    pub bits_used: usize,
    pub rel_err_bound: f64,
}

/// Monic characteristic polynomial (low to high coefficients) whose roots are ψ_j².
pub fn sine_characteristic_polynomial(a: &ExactMatrix, b: &ExactMatrix) -> Result<Vec<BigRational>, AngleError> {
    if a.rows() != b.rows() {
        return Err(AngleError::DimensionMismatch(format!("R^{} vs R^{}", a.rows(), b.rows())));
    }
    let (s, l) = if a.cols() <= b.cols() { (a, b) } else { (b, a) };
    let cross = s.transpose().mul(l)?;
    let gs = s.gram().inverse().map_err(|_| rank_error(s))?;
    let gl = l.gram().inverse().map_err(|_| rank_error(l))?;
    let cos = gs.mul(&cross)?.mul(&gl)?.mul(&cross.transpose())?;
    let sin = ExactMatrix::identity(s.cols()).sub(&cos)?;
    Ok(faddeev_leverrier(&sin))
}

fn rank_error(m: &ExactMatrix) -> AngleError {
    ExactError::RankDeficient { rank: m.rank(), expected: m.cols() }.into()
}

fn faddeev_leverrier(m: &ExactMatrix) -> Vec<BigRational> {
    let n = m.rows();
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::one();
    let mut mk = ExactMatrix::zeros(n, n);
    let id = ExactMatrix::identity(n);
    for k in 1..=n {
        mk = m.mul(&mk).expect("square").add(&id.scale(&c[n - k + 1])).expect("square");
        let tr = m.mul(&mk).expect("square").trace();
        c[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    c
}

/// Coefficients of p(μ + x).
fn taylor_shift(p: &[BigRational], x: &BigRational) -> Vec<BigRational> {
    let mut a = p.to_vec();
    let deg = a.len() - 1;
    for i in 0..deg {
        for j in (i..deg).rev() {
            let v = x * &a[j + 1];
            a[j] += v;
        }
    }
    a
}

/// (roots < x, roots = x) for a real-rooted polynomial, counted with multiplicity.
fn root_counts(p: &[BigRational], x: &BigRational) -> (usize, usize) {
    let deg = p.len() - 1;
    let q = taylor_shift(p, x);
    let at = q.iter().take_while(|c| c.is_zero()).count();
    let mut variations = 0;
    let mut last: Option<bool> = None;
    for c in &q[at..] {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        if last.is_some_and(|l| l != neg) {
            variations += 1;
        }
        last = Some(neg);
    }
    (deg - at - variations, at)
}

/// Checks that the j-th smallest root (1-based) of p lies in [lo², hi²].
fn brackets(p: &[BigRational], j: usize, lo: &BigRational, hi: &BigRational) -> bool {
    let (below_lo, _) = root_counts(p, &(lo * lo));
    let (below_hi, at_hi) = root_counts(p, &(hi * hi));
    below_lo < j && below_hi + at_hi >= j
}

fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Pure exact isolation of the j-th root's square root to relative width 2^-rel_bits.
fn bisect_sine(p: &[BigRational], j: usize, rel_bits: u32) -> RationalInterval {
    // Coarse search on powers of two: find k with ψ_j ∈ (2^(k-1), 2^k].
    let mut k = 0i64;
    while {
        let (below, at) = root_counts(p, &pow2(2 * (k - 1)));
        below + at >= j
    } {
        k -= 1;
    }
    let mut lo = pow2(k - 1);
    let mut hi = pow2(k);
    let width = pow2(k - 1 - rel_bits as i64);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
        let (below, at) = root_counts(p, &(&mid * &mid));
        if below + at >= j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RationalInterval { lo, hi }
}

/// Certified intervals for the principal-angle sines between the column spans of two
/// exact matrices. Zero angles are detected exactly.
pub fn certified_angles(
    a: &ExactMatrix,
    b: &ExactMatrix,
    ctx: &PrecisionContext,
) -> Result<CertifiedAngles, AngleError> {
    let p = sine_characteristic_polynomial(a, b)?;
    let t = p.len() - 1;
    let (_, zeros) = root_counts(&p, &BigRational::zero());
    let mut psi: Vec<RationalInterval> = (0..zeros).map(|_| RationalInterval::point(BigRational::zero())).collect();
    if zeros == t {
        return Ok(CertifiedAngles { psi, exact_zeros: zeros, bits_used: 0, rel_err_bound: 0.0 });
    }
    let profile = angles_adaptive(AngleInput::Exact(a), AngleInput::Exact(b), ctx)?;
    let one = BigRational::one();
    for j in zeros + 1..=t {
        let entry = &profile.psi()[j - 1];
        let mut found = None;
        if entry.is_resolved() {
            let est = entry.value().to_rational();
            // The f64 bound underflows at high precision; fall back to the precision floor.
            let rel_log2 = match profile.rel_err_bound().log2() {
                r if r.is_finite() => r,
                _ => -(profile.bits_used() as f64) / 2.0,
            };
            let mut w_log2 = (rel_log2.ceil() as i64 + 2).min(-8);
            while w_log2 <= -4 {
                let w = pow2(w_log2);
                let lo = &est * (&one - &w);
                let hi = &est * (&one + &w);
                if brackets(&p, j, &lo, &hi) {
                    found = Some(RationalInterval { lo, hi: if hi > one { one.clone() } else { hi } });
                    break;
                }
                w_log2 += 4;
            }
        }
        let interval = found.unwrap_or_else(|| bisect_sine(&p, j, 60));
        psi.push(interval);
    }
    Ok(CertifiedAngles {
        psi,
        exact_zeros: zeros,
        bits_used: profile.bits_used(),
        rel_err_bound: profile.rel_err_bound(),
    })
}

/// Certified intervals for ψ_j(A, B) where A is the true target behind `target`.
pub fn certified_target_angles(
    target: &ExactTarget,
    b: &ExactMatrix,
    ctx: &PrecisionContext,
) -> Result<CertifiedAngles, AngleError> {
    let base = certified_angles(&target.generators, b, ctx)?;
    if target.perturbation.is_zero() {
        return Ok(base);
    }
    let psi = base.psi.iter().map(|iv| iv.widen_unit(&target.perturbation)).collect();
    Ok(CertifiedAngles { psi, ..base })
}
