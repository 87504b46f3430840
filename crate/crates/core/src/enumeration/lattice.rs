//! The rank-2 lattice u⊥ ∩ ℤ³ and short-vector enumeration in it.

/// A Gauss-reduced ℤ-basis of {w ∈ ℤ³ : u·w = 0} for nonzero u.
pub fn orthogonal_lattice_basis(u: &[i64; 3]) -> [[i64; 3]; 2] {
    // Column operations on U = I keep r = u·U; at the end one entry of r is ±gcd(u)
    // and the other two columns of U span the kernel.
    let mut r = *u;
    let mut cols = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
    loop {
        let nonzero: Vec<usize> = (0..3).filter(|&i| r[i] != 0).collect();
        if nonzero.len() <= 1 {
            let keep = nonzero.first().copied().expect("u is nonzero");
            let others: Vec<usize> = (0..3).filter(|&i| i != keep).collect();
            return gauss_reduce(cols[others[0]], cols[others[1]]);
        }
        let pivot = *nonzero.iter().min_by_key(|&&i| r[i].abs()).expect("nonempty");
        for &j in &nonzero {
            if j != pivot {
                let q = r[j].div_euclid(r[pivot]);
                r[j] -= q * r[pivot];
                for k in 0..3 {
                    cols[j][k] -= q * cols[pivot][k];
                }
            }
        }
    }
}

fn dot(a: &[i64; 3], b: &[i64; 3]) -> i128 {
    (0..3).map(|i| a[i] as i128 * b[i] as i128).sum()
}

fn gauss_reduce(mut a: [i64; 3], mut b: [i64; 3]) -> [[i64; 3]; 2] {
    if dot(&a, &a) > dot(&b, &b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let aa = dot(&a, &a);
        let q = round_div(dot(&a, &b), aa);
        for k in 0..3 {
            b[k] -= (q as i64) * a[k];
        }
        if dot(&b, &b) >= aa {
            return [a, b];
        }
        std::mem::swap(&mut a, &mut b);
    }
}

fn round_div(num: i128, den: i128) -> i128 {
    (2 * num + den).div_euclid(2 * den)
}

/// Calls `f(w, ‖w‖²)` for every w ∈ u⊥ ∩ ℤ³ with ‖w‖² ≤ bound.
pub(crate) fn visit_orthogonal<F: FnMut(&[i64; 3], u64)>(u: &[i64; 3], bound: u64, mut f: F) {
    let [b1, b2] = orthogonal_lattice_basis(u);
    let g11 = dot(&b1, &b1) as f64;
    let g12 = dot(&b1, &b2) as f64;
    let g22 = dot(&b2, &b2) as f64;
    let b2_star = g22 - g12 * g12 / g11;
    let r = bound as f64;
    let c2_max = (r / b2_star).sqrt().floor() as i64 + 1;
    for c2 in -c2_max..=c2_max {
        // ‖c1 b1 + c2 b2‖² = g11 (c1 + c2 g12/g11)² + c2² b2*.
        let rem = r - (c2 * c2) as f64 * b2_star;
        if rem < -1.0 {
            continue;
        }
        let center = -(c2 as f64) * g12 / g11;
        let half = (rem.max(0.0) / g11).sqrt();
        let lo = (center - half).floor() as i64 - 1;
        let hi = (center + half).ceil() as i64 + 1;
        for c1 in lo..=hi {
            let w = [c1 * b1[0] + c2 * b2[0], c1 * b1[1] + c2 * b2[1], c1 * b1[2] + c2 * b2[2]];
            let n = dot(&w, &w);
            if n <= bound as i128 {
                f(&w, n as u64);
            }
        }
    }
}
