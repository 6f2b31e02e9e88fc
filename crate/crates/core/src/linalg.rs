//! Small dense linear algebra over any [`Scalar`], row-major `n × n`.

use crate::autodiff::Scalar;

/// Pivot magnitude below which a matrix counts as singular.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Inverse and determinant by Gauss–Jordan elimination with partial pivoting
/// (pivots chosen on the real value slot). `None` if a pivot falls below
/// [`PIVOT_FLOOR`].
pub fn invert<S: Scalar>(a: &[S], n: usize) -> Option<(Vec<S>, S)> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![S::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = S::one();
    }
    let mut det = S::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| {
                m[p * n + col].value().abs().total_cmp(&m[q * n + col].value().abs())
            })
            .unwrap_or(col);
        if m[pivot_row * n + col].value().abs() < PIVOT_FLOOR {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
                inv.swap(col * n + k, pivot_row * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        let pinv = p.recip();
        for k in 0..n {
            m[col * n + k] *= pinv;
            inv[col * n + k] *= pinv;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row * n + col];
            for k in 0..n {
                let mk = m[col * n + k];
                let ik = inv[col * n + k];
                m[row * n + k] -= factor * mk;
                inv[row * n + k] -= factor * ik;
            }
        }
    }
    Some((inv, det))
}

/// Cholesky factorization of a symmetric real matrix. Returns the smallest
/// pivot (squared diagonal of the factor) on success, or the failing pivot.
pub fn cholesky_min_pivot(a: &[f64], n: usize) -> Result<f64, f64> {
    let mut l = vec![0.0; n * n];
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(d);
        }
        min_pivot = min_pivot.min(d);
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(min_pivot)
}

/// Lower-triangular Cholesky factor `L` with `a = L Lᵀ`.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

/// Eigenvalues of a symmetric real matrix by cyclic Jacobi rotations,
/// ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `yᵀ M y` for a real matrix and scalar vector.
pub fn quad<S: Scalar>(m: &[f64], y: &[S]) -> S {
    let n = y.len();
    let mut acc = S::zero();
    for i in 0..n {
        let mut row = S::zero();
        for j in 0..n {
            row += y[j] * m[i * n + j];
        }
        acc += y[i] * row;
    }
    acc
}

/// `vᵀ y`.
pub fn lin<S: Scalar>(v: &[f64], y: &[S]) -> S {
    let mut acc = S::zero();
    for (vi, &yi) in v.iter().zip(y) {
        acc += yi * *vi;
    }
    acc
}

/// `M y` for a real matrix.
pub fn mat_vec(m: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * y[j]).sum()).collect()
}

/// `A B` for real square matrices.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Largest absolute entry.
pub fn max_abs(m: &[f64]) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let (inv, det) = invert(&a, 3).unwrap();
        let id = mat_mul(&a, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i * 3 + j] - e).abs() < 1e-14);
            }
        }
        let expected = 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((det - expected).abs() < 1e-13);
    }

    #[test]
    fn singular_is_rejected() {
        assert!(invert(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let (inv, det) = invert(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(det, -1.0);
        assert_eq!(inv, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn eigenvalues_and_cholesky() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(&a, 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        assert!(cholesky_min_pivot(&a, 2).is_ok());
        assert!(cholesky_min_pivot(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
        let l = cholesky(&a, 2).unwrap();
        let llt = mat_mul(&l, &[l[0], l[2], l[1], l[3]], 2);
        for (x, y) in llt.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
