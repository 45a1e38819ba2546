//! Small dense helpers for per-degree covariance matrices.

/// Lower-triangular `L` with `L L^T = C` for a symmetric positive
/// semi-definite `C` (row-major, `n x n`).
///
/// Zero pivots are allowed when the rest of their column vanishes too, so
/// singular but valid covariances (perfectly correlated components, inactive
/// components) factor without regularization. Returns a description of the
/// failure when `C` is not PSD.
pub(crate) fn cholesky_psd(c: &[f64], n: usize) -> Result<Vec<f64>, String> {
    assert_eq!(c.len(), n * n);
    let scale = (0..n).fold(0.0f64, |acc, i| acc.max(c[i * n + i].abs()));
    let mut l = vec![0.0; n * n];
    if scale == 0.0 {
        if c.iter().any(|&v| v != 0.0) {
            return Err("nonzero off-diagonal entry with zero diagonal".into());
        }
        return Ok(l);
    }
    let pivot_tol = 1e-12 * scale;
    let column_tol = 1e-7 * scale;
    for j in 0..n {
        let d = c[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
        if d < -pivot_tol {
            return Err(format!("negative pivot {d:e} in row {j}"));
        }
        if d <= pivot_tol {
            for i in j + 1..n {
                let v = c[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                if v.abs() > column_tol {
                    return Err(format!("zero pivot in row {j} with coupling {v:e} to row {i}"));
                }
            }
            continue;
        }
        let root = d.sqrt();
        l[j * n + j] = root;
        for i in j + 1..n {
            let v = c[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            l[i * n + j] = v / root;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(l: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
            }
        }
        out
    }

    #[test]
    fn factors_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..6 {
            for rank in 1..=n {
                let a: Vec<f64> = (0..n * rank).map(|_| rng.random_range(-1.0..1.0)).collect();
                let c: Vec<f64> = (0..n * n)
                    .map(|ij| (0..rank).map(|k| a[(ij / n) * rank + k] * a[(ij % n) * rank + k]).sum())
                    .collect();
                let l = cholesky_psd(&c, n).unwrap();
                let back = reconstruct(&l, n);
                for (x, y) in back.iter().zip(&c) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn singular_and_zero_matrices() {
        assert_eq!(cholesky_psd(&[0.0; 4], 2).unwrap(), vec![0.0; 4]);
        let l = cholesky_psd(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(reconstruct(&l, 2), vec![1.0, 1.0, 1.0, 1.0]);
        let l = cholesky_psd(&[0.0, 0.0, 0.0, 2.0], 2).unwrap();
        assert_eq!(l[3], 2f64.sqrt());
    }

    #[test]
    fn rejects_indefinite() {
        assert!(cholesky_psd(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
        assert!(cholesky_psd(&[-1.0], 1).is_err());
        assert!(cholesky_psd(&[0.0, 1.0, 1.0, 0.0], 2).is_err());
    }
}
