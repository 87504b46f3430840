use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::arith::{binomial, combinations, gcd_all};
use super::matrix::{bareiss_determinant, primitive_integer_vector, ExactMatrix};
use super::ExactError;

/// Normalized Plücker coordinates of an e-dimensional subspace of ℝⁿ:
/// e×e minors in lexicographic row order, divided by their gcd, first nonzero entry positive.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlueckerVector {
    n: usize,
    e: usize,
    coords: Vec<BigInt>,
}

impl fmt::Debug for PlueckerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(|x| x.to_string()).collect();
        write!(f, "Pluecker(n={}, e={}, [{}])", self.n, self.e, c.join(", "))
    }
}

impl PlueckerVector {
    /// Normalizes raw coordinates. Decomposability is not checked here;
    /// `pluecker_decode` is the validating inverse.
    pub fn new(n: usize, e: usize, coords: Vec<BigInt>) -> Result<Self, ExactError> {
        if e == 0 || e > n {
            return Err(ExactError::DimensionMismatch(format!("subspace dimension {e} in R^{n}")));
        }
        if coords.len() != binomial(n, e) {
            return Err(ExactError::DimensionMismatch(format!(
                "{} coordinates, expected binomial({n},{e}) = {}",
                coords.len(),
                binomial(n, e)
            )));
        }
        let g = gcd_all(&coords);
        if g.is_zero() {
            return Err(ExactError::ZeroInput);
        }
        let first_negative = coords.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
        let g = if first_negative { -g } else { g };
        let coords = coords.into_iter().map(|c| c / &g).collect();
        Ok(Self { n, e, coords })
    }

    pub fn from_i64(n: usize, e: usize, coords: &[i64]) -> Result<Self, ExactError> {
        Self::new(n, e, coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn norm_squared(&self) -> BigInt {
        self.coords.iter().map(|c| c * c).sum()
    }

    /// Decimal strings, the JSON wire form.
    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.to_string()).collect()
    }
}

/// Raw e×e minors of an integer n×e matrix in lexicographic row order.
pub fn raw_minors(basis: &ExactMatrix) -> Result<Vec<BigInt>, ExactError> {
    let cols = basis.to_integer_columns()?;
    Ok(minors_of_columns(&cols, basis.rows()))
}

fn minors_of_columns(cols: &[Vec<BigInt>], n: usize) -> Vec<BigInt> {
    let e = cols.len();
    combinations(n, e)
        .iter()
        .map(|rows| {
            let sub: Vec<Vec<BigInt>> = rows.iter().map(|&r| cols.iter().map(|c| c[r].clone()).collect()).collect();
            bareiss_determinant(sub)
        })
        .collect()
}

fn check_shape(basis: &ExactMatrix) -> Result<(), ExactError> {
    if basis.cols() > basis.rows() {
        return Err(ExactError::RankDeficient { rank: basis.rows(), expected: basis.cols() });
    }
    Ok(())
}

/// Plücker coordinates of the column span of an integer basis.
pub fn pluecker_coordinates(basis: &ExactMatrix) -> Result<PlueckerVector, ExactError> {
    check_shape(basis)?;
    let minors = raw_minors(basis)?;
    PlueckerVector::new(basis.rows(), basis.cols(), minors).map_err(|err| match err {
        ExactError::ZeroInput => ExactError::RankDeficient { rank: basis.rank(), expected: basis.cols() },
        other => other,
    })
}

/// det(MᵀM), the squared e-volume of the columns.
pub fn generalized_determinant_squared(vectors: &ExactMatrix) -> BigRational {
    vectors.gram().determinant().expect("Gram matrices are square")
}

/// True iff the gcd of the raw e×e minors is 1, i.e. the columns are a Z-basis of the
/// lattice of integer points in their span.
pub fn is_primitive_basis(basis: &ExactMatrix) -> Result<bool, ExactError> {
    check_shape(basis)?;
    let minors = raw_minors(basis)?;
    let g = gcd_all(&minors);
    if g.is_zero() {
        return Err(ExactError::RankDeficient { rank: basis.rank(), expected: basis.cols() });
    }
    Ok(g.is_one())
}

/// The subspace {v : v ∧ Ξ = 0}, which has dimension e exactly when Ξ is decomposable.
pub fn pluecker_decode(xi: &PlueckerVector) -> Result<RationalSubspace, ExactError> {
    let (n, e) = (xi.n, xi.e);
    if e == n {
        return RationalSubspace::from_integer_basis(ExactMatrix::identity(n));
    }
    let index: HashMap<Vec<usize>, usize> = combinations(n, e).into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    let bigger = combinations(n, e + 1);
    let mut wedge = ExactMatrix::zeros(bigger.len(), n);
    for (row, k) in bigger.iter().enumerate() {
        for (pos, &i) in k.iter().enumerate() {
            let rest: Vec<usize> = k.iter().copied().filter(|&x| x != i).collect();
            let c = &xi.coords[index[&rest]];
            if c.is_zero() {
                continue;
            }
            let signed = if pos % 2 == 0 { c.clone() } else { -c.clone() };
            wedge.set(row, i, BigRational::from_integer(signed));
        }
    }
    let kernel = wedge.kernel();
    if kernel.len() != e {
        return Err(ExactError::NotDecomposable);
    }
    let cols: Vec<Vec<BigInt>> = kernel.iter().map(|v| primitive_integer_vector(v)).collect();
    let subspace = RationalSubspace::from_integer_basis(ExactMatrix::from_int_columns(&cols)?)?;
    if subspace.pluecker != *xi {
        return Err(ExactError::Inconsistent("decoded span has different Pluecker vector".into()));
    }
    Ok(subspace)
}

/// A rational subspace with an integer basis, its Plücker vector and exact squared height.
/// Equality, hashing and ordering go through the Plücker vector.
#[derive(Clone)]
pub struct RationalSubspace {
    basis: ExactMatrix,
    pluecker: PlueckerVector,
    height_squared: BigInt,
}

impl fmt::Debug for RationalSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalSubspace({:?}, H^2={})", self.pluecker, self.height_squared)
    }
}

impl PartialEq for RationalSubspace {
    fn eq(&self, other: &Self) -> bool {
        self.pluecker == other.pluecker
    }
}

impl Eq for RationalSubspace {}

impl Hash for RationalSubspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.pluecker.hash(state);
    }
}

impl PartialOrd for RationalSubspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalSubspace {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.pluecker.n, self.pluecker.e, &self.height_squared, &self.pluecker.coords).cmp(&(
            other.pluecker.n,
            other.pluecker.e,
            &other.height_squared,
            &other.pluecker.coords,
        ))
    }
}

impl RationalSubspace {
    pub fn from_integer_basis(basis: ExactMatrix) -> Result<Self, ExactError> {
        let pluecker = pluecker_coordinates(&basis)?;
        let height_squared = pluecker.norm_squared();
        Ok(Self { basis, pluecker, height_squared })
    }

    /// Span of rational columns; each column is scaled to a primitive integer vector.
    pub fn from_rational_basis(basis: &ExactMatrix) -> Result<Self, ExactError> {
        let cols = basis.primitive_integer_columns();
        Self::from_integer_basis(ExactMatrix::from_int_columns(&cols)?)
    }

    pub fn from_i64_columns(columns: &[&[i64]]) -> Result<Self, ExactError> {
        Self::from_integer_basis(ExactMatrix::from_i64_columns(columns)?)
    }

    pub fn n(&self) -> usize {
        self.pluecker.n
    }

    pub fn e(&self) -> usize {
        self.pluecker.e
    }

    pub fn basis(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn pluecker(&self) -> &PlueckerVector {
        &self.pluecker
    }

    pub fn height_squared(&self) -> &BigInt {
        &self.height_squared
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn pv(n: usize, e: usize, c: &[i64]) -> PlueckerVector {
        PlueckerVector::from_i64(n, e, c).unwrap()
    }

    #[test]
    fn pluecker_examples() {
        let b = ExactMatrix::from_i64_columns(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]).unwrap();
        assert_eq!(pluecker_coordinates(&b).unwrap(), pv(4, 2, &[1, 0, 1, -1, 0, 1]));
        let b = ExactMatrix::from_i64_columns(&[&[1, 0, 0], &[0, 1, 0]]).unwrap();
        assert_eq!(pluecker_coordinates(&b).unwrap().coords(), pv(3, 2, &[1, 0, 0]).coords());
        let b = ExactMatrix::from_i64_columns(&[&[2, 2]]).unwrap();
        assert_eq!(pluecker_coordinates(&b).unwrap(), pv(2, 1, &[1, 1]));
        let b = ExactMatrix::from_i64_columns(&[&[1, 1], &[2, 2]]).unwrap();
        assert!(matches!(pluecker_coordinates(&b), Err(ExactError::RankDeficient { rank: 1, .. })));
    }

    #[test]
    fn sign_canonical() {
        let b = ExactMatrix::from_i64_columns(&[&[-3, 4]]).unwrap();
        assert_eq!(pluecker_coordinates(&b).unwrap().coords(), pv(2, 1, &[3, -4]).coords());
        assert_eq!(pv(2, 1, &[0, -5]).coords(), &[BigInt::zero(), BigInt::one()]);
    }

    #[test]
    fn height_examples() {
        let s = RationalSubspace::from_i64_columns(&[&[3, 4]]).unwrap();
        assert_eq!(s.height_squared(), &BigInt::from(25));
        let s = RationalSubspace::from_i64_columns(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]).unwrap();
        assert_eq!(s.height_squared(), &BigInt::from(4));
        let s = RationalSubspace::from_i64_columns(&[&[1, 0, 0, 0, 0], &[0, 1, 0, 0, 0]]).unwrap();
        assert_eq!(s.height_squared(), &BigInt::from(1));
        let full = RationalSubspace::from_integer_basis(ExactMatrix::identity(3)).unwrap();
        assert_eq!(full.pluecker().coords().len(), 1);
        assert_eq!(full.height_squared(), &BigInt::from(1));
    }

    #[test]
    fn generalized_determinant_examples() {
        let b = ExactMatrix::from_i64_columns(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]).unwrap();
        assert_eq!(generalized_determinant_squared(&b), rat(4));
        assert_eq!(generalized_determinant_squared(&ExactMatrix::identity(3)), rat(1));
        let dep = ExactMatrix::from_i64_columns(&[&[1, 1], &[2, 2]]).unwrap();
        assert_eq!(generalized_determinant_squared(&dep), rat(0));
    }

    #[test]
    fn primitivity_examples() {
        let b = ExactMatrix::from_i64_columns(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]).unwrap();
        assert!(is_primitive_basis(&b).unwrap());
        let b = ExactMatrix::from_i64_columns(&[&[2, 2]]).unwrap();
        assert!(!is_primitive_basis(&b).unwrap());
        let b = ExactMatrix::from_i64_columns(&[&[125, 53]]).unwrap();
        assert!(is_primitive_basis(&b).unwrap());
        let b = ExactMatrix::from_i64_columns(&[&[1953125, 828127]]).unwrap();
        assert!(is_primitive_basis(&b).unwrap());
    }

    #[test]
    fn decode_examples() {
        let s = pluecker_decode(&pv(4, 2, &[1, 0, 1, -1, 0, 1])).unwrap();
        let expected = RationalSubspace::from_i64_columns(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]).unwrap();
        assert_eq!(s, expected);
        let s = pluecker_decode(&pv(3, 2, &[1, 0, 0])).unwrap();
        assert_eq!(s, RationalSubspace::from_i64_columns(&[&[1, 0, 0], &[0, 1, 0]]).unwrap());
        assert_eq!(pluecker_decode(&pv(4, 2, &[1, 0, 0, 0, 0, 1])), Err(ExactError::NotDecomposable));
    }

    #[test]
    fn decode_lines_and_hyperplanes() {
        let line = pluecker_decode(&pv(3, 1, &[2, -3, 5])).unwrap();
        assert_eq!(line.height_squared(), &BigInt::from(38));
        // Every nonzero vector in the second exterior power of R^3 is decomposable.
        let plane = pluecker_decode(&pv(3, 2, &[2, -3, 5])).unwrap();
        assert_eq!(plane.pluecker(), &pv(3, 2, &[2, -3, 5]));
    }
}
