//! Polynomials over Z_q and interpolation at zero.

use crate::group::{GroupError, GroupParams, Scalar};
use crate::opcount::{self, Op};

/// Horner evaluation of `coeffs[0] + coeffs[1]·x + …`. One `T_SSS`.
///
/// # Panics
/// If `coeffs` is empty.
pub fn poly_eval(gp: &GroupParams, coeffs: &[Scalar], x: &Scalar) -> Scalar {
    assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
    opcount::record(Op::ShareEval);
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for c in coeffs[..coeffs.len() - 1].iter().rev() {
        acc = gp.scalar_add(&gp.scalar_mul(&acc, x), c);
    }
    acc
}

/// Value at 0 of the unique polynomial of degree `points.len() − 1` through
/// `points`.
pub fn lagrange_at_zero(gp: &GroupParams, points: &[(Scalar, Scalar)]) -> Result<Scalar, GroupError> {
    if points.is_empty() {
        return Err(GroupError::EmptyPoints);
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        if xi.is_zero() {
            return Err(GroupError::ZeroAbscissa);
        }
        if points[..i].iter().any(|(xj, _)| xj == xi) {
            return Err(GroupError::DuplicateAbscissa);
        }
    }
    let mut acc = gp.scalar_zero();
    for (l, (xl, yl)) in points.iter().enumerate() {
        let mut num = gp.scalar(1u32);
        let mut den = gp.scalar(1u32);
        for (n, (xn, _)) in points.iter().enumerate() {
            if n == l {
                continue;
            }
            num = gp.scalar_mul(&num, &gp.scalar_neg(xn));
            den = gp.scalar_mul(&den, &gp.scalar_sub(xl, xn));
        }
        let basis = gp.scalar_mul(&num, &gp.scalar_inv(&den)?);
        acc = gp.scalar_add(&acc, &gp.scalar_mul(yl, &basis));
    }
    Ok(acc)
}
