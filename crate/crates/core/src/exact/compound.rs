use num_rational::BigRational;

use super::arith::combinations;
use super::matrix::ExactMatrix;
use super::ExactError;

/// e-th compound matrix: entry (I, J) is the minor with row set I and column set J,
/// both in lexicographic order.
pub fn compound_matrix(s: &ExactMatrix, e: usize) -> Result<ExactMatrix, ExactError> {
    if e == 0 || e > s.rows() || e > s.cols() {
        return Err(ExactError::DimensionMismatch(format!(
            "compound of order {e} for a {}x{} matrix",
            s.rows(),
            s.cols()
        )));
    }
    let row_sets = combinations(s.rows(), e);
    let col_sets = combinations(s.cols(), e);
    let mut data = Vec::with_capacity(row_sets.len() * col_sets.len());
    for rows in &row_sets {
        for cols in &col_sets {
            data.push(s.select(rows, cols).determinant()?);
        }
    }
    ExactMatrix::new(row_sets.len(), col_sets.len(), data)
}

/// Determinant of the block matrix [[A1, A2], [A3, A4]] for commuting A1, A2.
/// Computed directly and as det(A4·A1 − A3·A2); the two routes must agree.
pub fn block_determinant(
    a1: &ExactMatrix,
    a2: &ExactMatrix,
    a3: &ExactMatrix,
    a4: &ExactMatrix,
) -> Result<BigRational, ExactError> {
    let l = a1.rows();
    for b in [a1, a2, a3, a4] {
        if b.rows() != l || b.cols() != l {
            return Err(ExactError::DimensionMismatch("blocks must be square of equal size".into()));
        }
    }
    if a1.mul(a2)? != a2.mul(a1)? {
        return Err(ExactError::CommutationViolated);
    }
    let full = a1.hconcat(a2)?.vconcat(&a3.hconcat(a4)?)?;
    let direct = full.determinant()?;
    let reduced = a4.mul(a1)?.sub(&a3.mul(a2)?)?.determinant()?;
    if direct != reduced {
        return Err(ExactError::Inconsistent(format!("block determinant routes disagree: {direct} vs {reduced}")));
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_compound() {
        let s = m(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        assert_eq!(compound_matrix(&s, 2).unwrap(), m(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, 6]]));
        for e in 1..=4 {
            let id = ExactMatrix::identity(4);
            let c = compound_matrix(&id, e).unwrap();
            assert_eq!(c, ExactMatrix::identity(c.rows()));
        }
    }

    #[test]
    fn compound_of_inverse() {
        let s = m(&[&[2, 1, 0], &[1, 3, -1], &[0, 4, 5]]);
        let inv = s.inverse().unwrap();
        let prod = compound_matrix(&s, 2).unwrap().mul(&compound_matrix(&inv, 2).unwrap()).unwrap();
        assert_eq!(prod, ExactMatrix::identity(3));
    }

    #[test]
    fn block_examples() {
        let i = ExactMatrix::identity(2);
        let a3 = m(&[&[1, 2], &[3, 4]]);
        let a4 = m(&[&[5, -1], &[0, 7]]);
        let expected = a4.sub(&a3).unwrap().determinant().unwrap();
        assert_eq!(block_determinant(&i, &i, &a3, &a4).unwrap(), expected);
        let z = ExactMatrix::zeros(2, 2);
        assert_eq!(block_determinant(&i, &z, &a3, &a4).unwrap(), a4.determinant().unwrap());
        assert_eq!(block_determinant(&a3, &a4, &i, &i), Err(ExactError::CommutationViolated));
    }

    #[test]
    fn block_polynomials_of_one_matrix() {
        let base = m(&[&[1, 2, 0], &[-1, 0, 3], &[2, 1, 1]]);
        let sq = base.mul(&base).unwrap();
        let a1 = sq.add(&ExactMatrix::identity(3)).unwrap();
        let a2 = base.scale(&rat(3)).sub(&ExactMatrix::identity(3)).unwrap();
        let a3 = m(&[&[4, 0, 1], &[1, 1, 1], &[0, -2, 5]]);
        let a4 = m(&[&[1, 0, 0], &[2, 2, 0], &[3, 3, 3]]);
        let d = block_determinant(&a1, &a2, &a3, &a4).unwrap();
        assert_eq!(d, a4.mul(&a1).unwrap().sub(&a3.mul(&a2).unwrap()).unwrap().determinant().unwrap());
    }
}
