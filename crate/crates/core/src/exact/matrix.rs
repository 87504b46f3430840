use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ExactError;

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigRational>) -> Result<Self, ExactError> {
        if rows == 0 || cols == 0 {
            return Err(ExactError::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(ExactError::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, ExactError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(ExactError::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|row| row.iter().map(|&v| rat(v))).collect();
        Self::new(r, c, data)
    }

    /// Builds an n x k matrix whose j-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<BigRational>]) -> Result<Self, ExactError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(ExactError::DimensionMismatch("columns of unequal length".into()));
        }
        let mut m = Self::new(rows, cols, vec![BigRational::zero(); rows * cols])?;
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn from_int_columns(columns: &[Vec<BigInt>]) -> Result<Self, ExactError> {
        let cols: Vec<Vec<BigRational>> =
            columns.iter().map(|c| c.iter().map(|v| BigRational::from_integer(v.clone())).collect()).collect();
        Self::from_columns(&cols)
    }

    pub fn from_i64_columns(columns: &[&[i64]]) -> Result<Self, ExactError> {
        let cols: Vec<Vec<BigRational>> = columns.iter().map(|c| c.iter().map(|&v| rat(v)).collect()).collect();
        Self::from_columns(&cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigRational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigRational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigRational>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ExactError> {
        if self.cols != other.rows {
            return Err(ExactError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = BigRational::zero();
                for k in 0..self.cols {
                    let a = self.get(r, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * other.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Result<Self, ExactError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ExactError::DimensionMismatch("shapes differ".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Gram matrix MᵀM.
    pub fn gram(&self) -> Self {
        self.transpose().mul(self).expect("transpose shapes always agree")
    }

    /// Horizontal concatenation [self | other].
    pub fn hconcat(&self, other: &Self) -> Result<Self, ExactError> {
        if self.rows != other.rows {
            return Err(ExactError::DimensionMismatch("row counts differ".into()));
        }
        let mut cols = self.columns();
        cols.extend(other.columns());
        Self::from_columns(&cols)
    }

    /// Vertical concatenation [self; other].
    pub fn vconcat(&self, other: &Self) -> Result<Self, ExactError> {
        if self.cols != other.cols {
            return Err(ExactError::DimensionMismatch("column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Self::new(self.rows + other.rows, self.cols, data)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn trace(&self) -> BigRational {
        (0..self.rows.min(self.cols)).fold(BigRational::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Submatrix selecting the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let data = rows.iter().flat_map(|&r| cols.iter().map(move |&c| self.get(r, c).clone())).collect();
        Self { rows: rows.len(), cols: cols.len(), data }
    }

    /// Determinant by fraction-tracking Gaussian elimination.
    pub fn determinant(&self) -> Result<BigRational, ExactError> {
        if !self.is_square() {
            return Err(ExactError::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Ok(BigRational::zero());
            };
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            let p = a[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = &a[r][col] / &p;
                for c in col..n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
        Ok(det)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m.get(row, col).recip();
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c) - &factor * m.get(row, c);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space {x : Mx = 0}, one rational vector per free column.
    pub fn kernel(&self) -> Vec<Vec<BigRational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![BigRational::zero(); self.cols];
                v[f] = BigRational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(i, f).clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<Self, ExactError> {
        if !self.is_square() {
            return Err(ExactError::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = self.hconcat(&Self::identity(n))?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || !pivots[..n].iter().copied().eq(0..n) {
            return Err(ExactError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(r.select(&rows, &cols))
    }

    /// Squared Frobenius norm.
    pub fn frobenius_squared(&self) -> BigRational {
        self.data.iter().fold(BigRational::zero(), |acc, x| acc + x * x)
    }

    /// Least common multiple of all denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Integer columns spanning the same column space: each column is cleared of
    /// denominators and divided by the gcd of its entries.
    pub fn primitive_integer_columns(&self) -> Vec<Vec<BigInt>> {
        self.columns().iter().map(|c| primitive_integer_vector(c)).collect()
    }

    pub fn to_integer_columns(&self) -> Result<Vec<Vec<BigInt>>, ExactError> {
        if !self.is_integral() {
            return Err(ExactError::NotIntegral);
        }
        Ok(self.columns().into_iter().map(|c| c.into_iter().map(|x| x.to_integer()).collect()).collect())
    }
}

pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Clears denominators of a rational vector and divides out the content.
/// The zero vector maps to the zero vector.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Determinant of a square integer matrix by Bareiss fraction-free elimination.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Sum of squares of a rational vector.
pub fn norm_squared(v: &[BigRational]) -> BigRational {
    v.iter().fold(BigRational::zero(), |acc, x| acc + x * x)
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}
