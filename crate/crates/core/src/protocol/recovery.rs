use super::ProtocolError;
use crate::{CloudId, Int, IntPoly};

/// `true` iff `excluded` clouds out of `n` still leave an honest majority.
pub fn assess_recoverability(n: usize, excluded: usize) -> bool {
    2 * excluded < n
}

/// Constant term of the sum minus every escrowed correction.
pub fn recover_aggregate(sum: &IntPoly, corrections: &[Int]) -> Result<Int, ProtocolError> {
    let total: Int = corrections.iter().sum();
    let constant = sum.coeff(0);
    if constant < total {
        return Err(ProtocolError::NegativeResult);
    }
    Ok(constant - total)
}

/// Aggregate of the clouds still present and the absent cloud's share of
/// `full_aggregate`.
pub fn recover_missing(
    absent: &[CloudId],
    full_aggregate: &Int,
    partial_corrections: &[Int],
    partial_sum: &IntPoly,
) -> Result<(Int, Int), ProtocolError> {
    if absent.len() != 1 {
        return Err(ProtocolError::MultipleMissing(absent.len()));
    }
    let partial = recover_aggregate(partial_sum, partial_corrections)?;
    if full_aggregate < &partial {
        return Err(ProtocolError::NegativeResult);
    }
    let missing = full_aggregate - &partial;
    Ok((partial, missing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfpoly::Poly;
    use num_bigint::BigUint;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn threshold_examples() {
        assert!(!assess_recoverability(4, 2));
        assert!(assess_recoverability(4, 1));
        assert!(assess_recoverability(4, 0));
        assert!(!assess_recoverability(5, 3));
        assert!(assess_recoverability(5, 2));
    }

    #[test]
    fn two_cloud_worked_case() {
        let sum = Poly::new(vec![big(100 + 3_720_087), big(1)]);
        assert_eq!(recover_aggregate(&sum, &[big(96), big(3_720_080)]), Ok(big(11)));
        assert_eq!(recover_aggregate(&sum, &[big(3_720_188)]), Err(ProtocolError::NegativeResult));
        assert_eq!(recover_aggregate(&Poly::new(vec![big(0), big(3)]), &[big(0)]), Ok(big(0)));
    }

    #[test]
    fn missing_share_examples() {
        // the remaining three clouds blind 2, 4, 6 into 12 * d plus corrections
        let partial_sum = Poly::new(vec![big(12 + 900), big(5)]);
        let (partial, missing) = recover_missing(&[CloudId(4)], &big(20), &[big(900)], &partial_sum).unwrap();
        assert_eq!((partial, missing), (big(12), big(8)));
        let (_, missing) = recover_missing(&[CloudId(4)], &big(12), &[big(900)], &partial_sum).unwrap();
        assert_eq!(missing, big(0));
        assert_eq!(
            recover_missing(&[CloudId(3), CloudId(4)], &big(20), &[], &partial_sum),
            Err(ProtocolError::MultipleMissing(2))
        );
    }
}
