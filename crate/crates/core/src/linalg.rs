//! Complex dense matrix aliases and a few helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry modulus, `0` for an empty matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Diagonal matrix with the given entries.
pub fn diag(entries: impl IntoIterator<Item = Complex64>) -> CMat {
    let v: Vec<Complex64> = entries.into_iter().collect();
    CMat::from_diagonal(&CVec::from_vec(v))
}

/// Mixed radix digits of `index` with the given number of digits in base 3,
/// most significant first.
pub fn base3_digits(mut index: usize, digits: usize) -> Vec<usize> {
    let mut out = vec![0; digits];
    for slot in out.iter_mut().rev() {
        *slot = index % 3;
        index /= 3;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_roundtrip() {
        assert_eq!(base3_digits(0, 2), vec![0, 0]);
        assert_eq!(base3_digits(5, 2), vec![1, 2]);
        assert_eq!(base3_digits(26, 3), vec![2, 2, 2]);
    }
}
