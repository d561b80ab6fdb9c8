use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_JACOBI_SWEEPS: usize = 100;

const SYMMETRY_TOL: f64 = 1e-14;
/// Components at or below this magnitude are skipped by the sign rule.
const SIGN_THRESHOLD: f64 = 1e-8;

/// Full eigendecomposition of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`; its first component
    /// with magnitude above 1e-8 is positive.
    pub vectors: DMatrix<f64>,
    /// `max_k ‖M v_k − λ_k v_k‖₂` against the input matrix.
    pub residual: f64,
}

impl EigenResult {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Each rotation annihilates one off-diagonal pair; sweeps repeat until the
/// off-diagonal Frobenius norm is negligible against the matrix norm. Sweep
/// order is fixed, so the output is bit-identical for identical input.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<EigenResult> {
    let (values, vectors) = jacobi(matrix, true)?;
    let mut vectors = vectors.expect("vectors requested");
    let n = values.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut sorted = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).clone_owned();
        if let Some(first) = col.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        sorted.set_column(dst, &col);
    }
    vectors = sorted;

    let mut residual: f64 = 0.0;
    for k in 0..n {
        let v = vectors.column(k);
        let r = matrix * v - v * sorted_values[k];
        residual = residual.max(r.norm());
    }

    Ok(EigenResult {
        values: sorted_values,
        vectors,
        residual,
    })
}

/// Ascending eigenvalues only; skips vector accumulation.
pub fn symmetric_eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi(matrix, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Invalid(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d.is_nan() {
                return Err(Error::Invalid("matrix contains NaN".into()));
            }
            worst = worst.max(d);
        }
    }
    if worst > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

fn jacobi(matrix: &DMatrix<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    check_symmetric(matrix)?;
    let n = matrix.nrows();
    // Work on the exactly symmetrized upper triangle.
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        if i <= j {
            matrix[(i, j)]
        } else {
            matrix[(j, i)]
        }
    });
    let mut v = want_vectors.then(|| DMatrix::<f64>::identity(n, n));

    let scale = a.norm();
    if !scale.is_finite() {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let negligible = 1e-18 * scale;

    let mut converged = scale == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_JACOBI_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= 1e-17 * scale {
            converged = true;
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= negligible {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a);
        if off > 1e-17 * scale {
            return Err(Error::NoConvergence {
                what: "Jacobi eigensolver",
                iterations: sweeps,
                residual: off,
            });
        }
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok((values, v))
}

/// `A ← Pᵀ A P` for the plane rotation in (p, q).
fn rotate(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity() {
        let r = symmetric_eigen(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(r.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_gives_standard_basis() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.8, 1.0, 3.0]));
        let r = symmetric_eigen(&m).unwrap();
        assert_eq!(r.values, vec![1.0, 3.0, 5.8]);
        assert_eq!(r.vector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(r.vector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(r.vector(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn three_ion_axial_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.8, -1.6, -0.2, -1.6, 4.2, -1.6, -0.2, -1.6, 2.8]);
        let r = symmetric_eigen(&m).unwrap();
        for (got, want) in r.values.iter().zip([1.0, 3.0, 5.8]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-13);
        }
        assert!(r.residual < 1e-10 * m.norm());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(symmetric_eigen(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn sign_convention() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let r = symmetric_eigen(&m).unwrap();
        for k in 0..2 {
            assert!(r.vectors[(0, k)] > 0.0);
        }
    }

    #[test]
    fn random_reconstruction_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=15 {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.gen_range(-10.0..10.0);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            let r = symmetric_eigen(&m).unwrap();
            let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(r.values.clone()));
            let rebuilt = &r.vectors * lambda * r.vectors.transpose();
            assert!((rebuilt - &m).norm() / m.norm() < 1e-9, "n = {n}");
            let gram = r.vectors.transpose() * &r.vectors;
            assert!((gram - DMatrix::identity(n, n)).amax() < 1e-12);
            assert!(r.residual < 1e-10 * m.norm());
            assert!(r.values.windows(2).all(|w| w[0] <= w[1]));

            let again = symmetric_eigen(&m).unwrap();
            assert_eq!(r, again);
            let values_only = symmetric_eigenvalues(&m).unwrap();
            for (a, b) in values_only.iter().zip(&r.values) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12 * m.norm());
            }
        }
    }
}
