use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExactError;

/// All k-element subsets of {0, …, n-1} in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn gcd_all<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values.into_iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

const WITNESSES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller–Rabin with the first thirteen prime bases. Deterministic below 3.3·10²⁴,
/// probabilistic (error < 4⁻¹³) above.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &WITNESSES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: &BigUint) -> BigUint {
    let mut c = n + 1u32;
    while !is_prime(&c) {
        c += 1u32;
    }
    c
}

/// Exponent of the prime `p` in the nonzero rational `x`.
pub fn padic_valuation(x: &BigRational, p: &BigUint) -> Result<i64, ExactError> {
    if x.is_zero() {
        return Err(ExactError::ZeroInput);
    }
    if !is_prime(p) {
        return Err(ExactError::NotPrime(p.to_string()));
    }
    let p = BigInt::from(p.clone());
    let count = |v: &BigInt| {
        let mut v = v.abs();
        let mut k = 0i64;
        loop {
            let (q, r) = v.div_rem(&p);
            if !r.is_zero() {
                return k;
            }
            v = q;
            k += 1;
        }
    };
    Ok(count(x.numer()) - count(x.denom()))
}

/// log₂|x| for a nonzero integer, accurate to double precision.
pub fn log2_bigint(x: &BigInt) -> f64 {
    let mag = x.magnitude();
    let bits = mag.bits();
    if bits <= 64 {
        return (mag.to_u64().expect("fits in 64 bits") as f64).log2();
    }
    let shift = bits - 64;
    let top = (mag >> shift).to_u64().expect("fits in 64 bits");
    (top as f64).log2() + shift as f64
}

/// log₂|x| for a nonzero rational.
pub fn log2_rational(x: &BigRational) -> f64 {
    log2_bigint(x.numer()) - log2_bigint(x.denom())
}

/// Nearest double, saturating to 0 or ±∞ outside the representable range.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = x.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let l = log2_rational(x);
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * l.exp2()
}

/// ⌊x⌋ for a rational.
pub fn floor_rational(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// ⌊αᵏ⌋ for a positive rational α.
pub fn floor_power(alpha: &BigRational, k: u32) -> BigInt {
    let num = num_traits::pow(alpha.numer().clone(), k as usize);
    let den = num_traits::pow(alpha.denom().clone(), k as usize);
    num.div_floor(&den)
}

/// A rational upper bound for √x (x ≥ 0) with relative slack below 2^-bits.
pub fn sqrt_upper(x: &BigRational, bits: u32) -> BigRational {
    assert!(!x.is_negative(), "square root of a negative rational");
    if x.is_zero() {
        return BigRational::zero();
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let pq = x.numer() * x.denom() * &scale;
    let mut r = pq.sqrt();
    if &r * &r != pq {
        r += 1;
    }
    BigRational::new(r, x.denom() * (BigInt::one() << bits as usize))
}

/// A rational lower bound for √x (x ≥ 0) with relative slack below 2^-bits.
pub fn sqrt_lower(x: &BigRational, bits: u32) -> BigRational {
    assert!(!x.is_negative(), "square root of a negative rational");
    if x.is_zero() {
        return BigRational::zero();
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let pq = x.numer() * x.denom() * &scale;
    BigRational::new(pq.sqrt(), x.denom() * (BigInt::one() << bits as usize))
}
