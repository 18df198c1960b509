//! Small dense helpers for the envelope: Cholesky factorization and SPD inverse.
//! Matrices are square, row-major `Vec<F>`.

use crate::scalar::Real;

/// Lower-triangular `L` with `L·Lᵀ = a`, or `None` if `a` is not positive definite.
pub fn cholesky<F: Real>(a: &[F], dim: usize) -> Option<Vec<F>> {
    debug_assert_eq!(a.len(), dim * dim);
    let mut l = vec![F::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = a[i * dim + j];
            for k in 0..j {
                sum = sum - l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(sum > F::zero()) || !sum.is_finite() {
                    return None;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive-definite matrix, symmetrized on output.
pub fn spd_inverse<F: Real>(a: &[F], dim: usize) -> Option<Vec<F>> {
    let l = cholesky(a, dim)?;
    // invert L by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹
    let mut linv = vec![F::zero(); dim * dim];
    for col in 0..dim {
        for i in col..dim {
            let mut sum = if i == col { F::one() } else { F::zero() };
            for k in col..i {
                sum = sum - l[i * dim + k] * linv[k * dim + col];
            }
            linv[i * dim + col] = sum / l[i * dim + i];
        }
    }
    let mut inv = vec![F::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = F::zero();
            for k in i.max(j)..dim {
                sum = sum + linv[k * dim + i] * linv[k * dim + j];
            }
            inv[i * dim + j] = sum;
            inv[j * dim + i] = sum;
        }
    }
    Some(inv)
}

/// `(x − μ)ᵀ P (x − μ)`.
pub fn quadratic_form<F: Real>(precision: &[F], center: &[F], x: &[F]) -> F {
    let dim = center.len();
    let d: Vec<F> = x.iter().zip(center).map(|(a, b)| *a - *b).collect();
    let mut q = F::zero();
    for i in 0..dim {
        let mut row = F::zero();
        for j in 0..dim {
            row = row + precision[i * dim + j] * d[j];
        }
        q = q + d[i] * row;
    }
    q
}
