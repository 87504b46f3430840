//! Double-precision principal-angle sines used to discard candidates before exact
//! certification.

const EPS: f64 = f64::EPSILON;

/// Orthonormal columns by modified Gram-Schmidt, run twice. `None` on rank loss.
pub fn orthonormalize(columns: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for c in columns {
        let mut v = c.clone();
        let n0 = norm(&v);
        for _ in 0..2 {
            for u in &q {
                let d = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = norm(&v);
        if nv <= n0 * 1e-10 || nv == 0.0 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        q.push(v);
    }
    Some(q)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sine of the angle between the line through `x` and the span of orthonormal `q`.
pub fn line_sine(q: &[Vec<f64>], x: &[i64], norm_squared: u64) -> f64 {
    let mut r: [f64; 16] = [0.0; 16];
    let n = x.len();
    debug_assert!(n <= 16);
    for i in 0..n {
        r[i] = x[i] as f64;
    }
    for col in q {
        let p: f64 = (0..n).map(|i| col[i] * x[i] as f64).sum();
        for i in 0..n {
            r[i] -= p * col[i];
        }
    }
    let res: f64 = r[..n].iter().map(|v| v * v).sum();
    (res / norm_squared as f64).sqrt().min(1.0)
}

/// Ascending sines between the spans of orthonormal `a` and `b`: singular values of
/// X − Y(YᵀX) where X is the smaller basis.
pub fn principal_sines(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let (x, y) = if b.len() <= a.len() { (b, a) } else { (a, b) };
    let mut r: Vec<Vec<f64>> = x
        .iter()
        .map(|col| {
            let mut v = col.clone();
            for u in y {
                let d = dot(u, col);
                v.iter_mut().zip(u).for_each(|(t, s)| *t -= d * s);
            }
            v
        })
        .collect();
    let mut s = singular_values(&mut r);
    s.iter_mut().for_each(|v| *v = v.min(1.0));
    s.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    s
}

/// Singular values of the matrix with the given columns (Hestenes rotations). The
/// columns are overwritten.
pub fn singular_values(cols: &mut [Vec<f64>]) -> Vec<f64> {
    let t = cols.len();
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..t {
            for j in i + 1..t {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma.abs() <= EPS * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let tan = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let tan = if zeta == 0.0 { 1.0 } else { tan };
                let c = 1.0 / (1.0 + tan * tan).sqrt();
                let s = c * tan;
                let (lo, hi) = cols.split_at_mut(j);
                for (p, q) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    let (u, v) = (*p, *q);
                    *p = c * u - s * v;
                    *q = s * u + c * v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    cols.iter().map(|c| norm(c)).collect()
}

/// Absolute error allowance for a sine computed from integer generators whose
/// orthonormalization is ill-conditioned by `ratio`.
pub fn abs_tolerance(n: usize, ratio: f64) -> f64 {
    256.0 * n as f64 * EPS * ratio
}
