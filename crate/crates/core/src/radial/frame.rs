//! Frames reproducing a radial covariance: `sum_j f_lj(r_i) f_lj(r_k) = C_l(r_i, r_k)`.
//!
//! [`build_frame`] uses the eigenfunctions of the covariance operator on
//! `L²([0, R], r² dr)`. With `W = diag(w)` the quadrature weights the
//! discretised operator is `W^{1/2} C W^{1/2} = U Λ Uᵀ`, and
//! `f_j = sqrt(λ_j) W^{-1/2} u_j`. The `f_j` are orthogonal in the weighted
//! inner product with `<f_j, f_j> = λ_j`.
//!
//! A function is dropped when `max_i f_j(r_i)²` is below
//! [`FRAME_RELATIVE_TOLERANCE`] times `max_i C_l(r_i, r_i)`, or when its
//! eigenvalue is at rounding level, below [`EIGENVALUE_FLOOR`] times the largest.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::parallel::map_indexed;

use super::{RadialCovariance, RadialGrid};

/// Relative size below which a frame function is dropped.
pub const FRAME_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const EIGENVALUE_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Eigenvalues below `-NEGATIVE_TOLERANCE * λ_max` reject the covariance.
const NEGATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialFrame {
    spin: i32,
    grid: RadialGrid,
    /// `functions[l][j][i] = f_lj(r_i)`
    functions: Vec<Vec<Vec<f64>>>,
    /// Retained eigenvalues, or squared coefficients for basis expansions.
    eigenvalues: Vec<Vec<f64>>,
    threshold: f64,
}

impl RadialFrame {
    /// Frame from explicit functions, `functions[l][j][i] = f_lj(r_i)`.
    pub fn new(spin: i32, grid: RadialGrid, functions: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::invalid("frame needs at least degree 0"));
        }
        let min_ell = spin.unsigned_abs() as usize;
        for (ell, fs) in functions.iter().enumerate() {
            if ell < min_ell && !fs.is_empty() {
                return Err(Error::invalid(format!("spin {spin} frame has functions at l={ell}")));
            }
            if fs.iter().any(|f| f.len() != grid.len()) {
                return Err(Error::invalid(format!("frame function at l={ell} does not match the grid")));
            }
        }
        let eigenvalues = functions
            .iter()
            .map(|fs| fs.iter().map(|f| weighted_dot(&grid, f, f)).collect())
            .collect();
        Ok(Self {
            spin,
            grid,
            functions,
            eigenvalues,
            threshold: 0.0,
        })
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn lmax(&self) -> usize {
        self.functions.len() - 1
    }

    pub fn functions(&self, ell: usize) -> &[Vec<f64>] {
        &self.functions[ell]
    }

    pub fn eigenvalues(&self, ell: usize) -> &[f64] {
        &self.eigenvalues[ell]
    }

    /// Relative cut used to build the frame.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `sum_j f_j f_jᵀ` at degree `ell`, row-major.
    pub fn covariance(&self, ell: usize) -> Vec<f64> {
        let n = self.grid.len();
        let mut c = vec![0.0; n * n];
        for f in &self.functions[ell] {
            for i in 0..n {
                for k in 0..n {
                    c[i * n + k] += f[i] * f[k];
                }
            }
        }
        c
    }

    /// `||sum_j f_j f_jᵀ - C_l||_F / ||C_l||_F`, zero when both vanish.
    pub fn reconstruction_error(&self, cov: &RadialCovariance, ell: usize) -> f64 {
        let rebuilt = self.covariance(ell);
        let target = cov.matrix(ell);
        let diff: f64 = rebuilt.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = target.iter().map(|b| b * b).sum::<f64>().sqrt();
        if norm == 0.0 {
            diff
        } else {
            diff / norm
        }
    }
}

fn weighted_dot(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.weights().iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// Karhunen–Loève frame of a radial covariance, degree by degree.
pub fn build_frame(cov: &RadialCovariance) -> Result<RadialFrame> {
    cov.validate()?;
    let grid = cov.grid().clone();
    let n = grid.len();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let per_degree = map_indexed(cov.lmax() + 1, |ell| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let c = cov.matrix(ell);
        if c.iter().all(|&v| v == 0.0) {
            return Ok((Vec::new(), Vec::new()));
        }
        let m = DMatrix::from_fn(n, n, |i, k| sqrt_w[i] * c[i * n + k] * sqrt_w[k]);
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let lambda_max = eig.eigenvalues[order[0]];
        if lambda_max <= 0.0 {
            return Err(Error::CovarianceInvalid {
                ell,
                reason: format!("largest weighted eigenvalue {lambda_max} is not positive"),
            });
        }
        let lambda_min = eig.eigenvalues[order[n - 1]];
        if lambda_min < -NEGATIVE_TOLERANCE * lambda_max {
            return Err(Error::CovarianceInvalid {
                ell,
                reason: format!("not positive semi-definite: eigenvalue {lambda_min} against maximum {lambda_max}"),
            });
        }
        let scale = (0..n).map(|i| c[i * n + i]).fold(0.0f64, f64::max);
        let mut functions = Vec::new();
        let mut values = Vec::new();
        for &j in &order {
            let lambda = eig.eigenvalues[j];
            if lambda <= EIGENVALUE_FLOOR * lambda_max {
                break;
            }
            let u = eig.eigenvectors.column(j);
            let root = lambda.sqrt();
            let mut f: Vec<f64> = (0..n).map(|i| root * u[i] / sqrt_w[i]).collect();
            let peak = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if peak * peak < FRAME_RELATIVE_TOLERANCE * scale {
                continue;
            }
            if let Some(first) = f.iter().find(|v| v.abs() > 1e-10 * peak) {
                if *first < 0.0 {
                    f.iter_mut().for_each(|v| *v = -*v);
                }
            }
            functions.push(f);
            values.push(lambda);
        }
        Ok((functions, values))
    });
    let mut functions = Vec::with_capacity(per_degree.len());
    let mut eigenvalues = Vec::with_capacity(per_degree.len());
    for r in per_degree {
        let (f, v) = r?;
        functions.push(f);
        eigenvalues.push(v);
    }
    Ok(RadialFrame {
        spin: cov.spin(),
        grid,
        functions,
        eigenvalues,
        threshold: FRAME_RELATIVE_TOLERANCE,
    })
}

/// Orthonormal polynomials `p_0, ..., p_{count-1}` in `L²([0, R], r² dr)`
/// on the grid, by twice-iterated modified Gram–Schmidt on `(r/R)^k`.
pub fn orthonormal_polynomials(grid: &RadialGrid, count: usize) -> Result<Vec<Vec<f64>>> {
    if count > grid.len() {
        return Err(Error::RankDeficient(format!(
            "{count} polynomials requested on a grid of {} nodes",
            grid.len()
        )));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    for k in 0..count {
        let mut v: Vec<f64> = grid.nodes().iter().map(|r| (r / grid.radius()).powi(k as i32)).collect();
        for _ in 0..2 {
            for b in &basis {
                let p = weighted_dot(grid, &v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = weighted_dot(grid, &v, &v).sqrt();
        if !(norm > 1e-13) {
            return Err(Error::RankDeficient(format!("polynomial of degree {k} is dependent on the grid")));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    Ok(basis)
}

/// Result of [`expand_in_basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct BasisExpansion {
    pub frame: RadialFrame,
    /// `c_lj >= 0` per degree.
    pub coefficients: Vec<Vec<f64>>,
    /// Relative weighted Frobenius residual per degree.
    pub residuals: Vec<f64>,
    /// Per degree, how many least-squares solutions `c²` were negative and set to 0.
    pub clamped: Vec<usize>,
}

/// Scalars `c_lj` with `sum_j c_lj² f_j f_jᵀ ≈ C_l`.
///
/// Minimises `||W^{1/2}(C_l - sum_j x_j f_j f_jᵀ)W^{1/2}||_F` over `x_j = c_j²`.
/// The normal matrix is `G_jk = (f_jᵀ W f_k)²`; a singular `G` is an error.
pub fn expand_in_basis(cov: &RadialCovariance, basis: &[Vec<f64>]) -> Result<BasisExpansion> {
    cov.validate()?;
    let grid = cov.grid().clone();
    let n = grid.len();
    let jn = basis.len();
    if jn == 0 {
        return Err(Error::invalid("empty basis"));
    }
    if basis.iter().any(|f| f.len() != n) {
        return Err(Error::invalid("basis functions do not match the grid"));
    }
    let w = grid.weights();
    let gram = DMatrix::from_fn(jn, jn, |j, k| weighted_dot(&grid, &basis[j], &basis[k]).powi(2));
    let svd = gram.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficient(format!(
            "basis normal matrix is singular (condition {:.3e})",
            smax / smin
        )));
    }
    let min_ell = cov.spin().unsigned_abs() as usize;
    let mut functions = Vec::new();
    let mut coefficients = Vec::new();
    let mut residuals = Vec::new();
    let mut clamped = Vec::new();
    for ell in 0..=cov.lmax() {
        let c = cov.matrix(ell);
        if ell < min_ell {
            functions.push(Vec::new());
            coefficients.push(Vec::new());
            residuals.push(0.0);
            clamped.push(0);
            continue;
        }
        // Wf_j
        let wf: Vec<Vec<f64>> = basis.iter().map(|f| f.iter().zip(w).map(|(a, b)| a * b).collect()).collect();
        let rhs = nalgebra::DVector::from_fn(jn, |j, _| {
            let mut s = 0.0;
            for i in 0..n {
                for k in 0..n {
                    s += wf[j][i] * c[i * n + k] * wf[j][k];
                }
            }
            s
        });
        let x = svd.solve(&rhs, 0.0).map_err(|e| Error::RankDeficient(e.to_string()))?;
        let mut cs = Vec::with_capacity(jn);
        let mut fs = Vec::with_capacity(jn);
        let mut n_clamped = 0;
        for j in 0..jn {
            let xj = if x[j] < 0.0 {
                n_clamped += 1;
                0.0
            } else {
                x[j]
            };
            let cj = xj.sqrt();
            cs.push(cj);
            fs.push(basis[j].iter().map(|v| cj * v).collect::<Vec<f64>>());
        }
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..n {
            for k in 0..n {
                let model: f64 = fs.iter().map(|f| f[i] * f[k]).sum();
                let ww = w[i] * w[k];
                diff += ww * (c[i * n + k] - model).powi(2);
                norm += ww * c[i * n + k].powi(2);
            }
        }
        residuals.push(if norm == 0.0 { diff.sqrt() } else { (diff / norm).sqrt() });
        functions.push(fs);
        coefficients.push(cs);
        clamped.push(n_clamped);
    }
    let frame = RadialFrame::new(cov.spin(), grid, functions)?;
    Ok(BasisExpansion {
        frame,
        coefficients,
        residuals,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> RadialGrid {
        RadialGrid::gauss_legendre(1.0, 8).unwrap()
    }

    #[test]
    fn rank_one_covariance() {
        let g = grid();
        let profile: Vec<f64> = g.nodes().iter().map(|r| -(1.0 + r * r)).collect();
        let cov = RadialCovariance::from_fn(0, g.clone(), 1, |_, a, b| (1.0 + a * a) * (1.0 + b * b));
        let frame = build_frame(&cov).unwrap();
        for ell in 0..=1 {
            assert_eq!(frame.functions(ell).len(), 1);
            let f = &frame.functions(ell)[0];
            for (x, y) in f.iter().zip(&profile) {
                assert!((x + y).abs() < 1e-12, "{x} vs {}", -y);
            }
            assert!(frame.reconstruction_error(&cov, ell) < 1e-13);
        }
    }

    #[test]
    fn diagonal_covariance() {
        let g = grid();
        let mut cov = RadialCovariance::zeros(0, g.clone(), 0);
        for i in 0..g.len() {
            cov.set(0, i, i, (i + 1) as f64).unwrap();
        }
        let frame = build_frame(&cov).unwrap();
        assert_eq!(frame.functions(0).len(), g.len());
        for f in frame.functions(0) {
            assert_eq!(f.iter().filter(|v| v.abs() > 1e-14).count(), 1);
        }
        assert!(frame.reconstruction_error(&cov, 0) < 1e-14);
    }

    #[test]
    fn smooth_kernel_on_fine_grid() {
        let g = RadialGrid::gauss_legendre(1.0, 24).unwrap();
        let cov = RadialCovariance::from_fn(0, g, 3, |l, a, b| (-(a - b).powi(2) * (2 + l) as f64).exp() * (1.0 + a * b));
        let frame = build_frame(&cov).unwrap();
        for ell in 0..=3 {
            assert!(frame.functions(ell).len() < 24);
            assert!(frame.reconstruction_error(&cov, ell) < 1e-10, "l={ell}");
        }
    }

    #[test]
    fn rejects_indefinite() {
        let g = grid();
        let mut cov = RadialCovariance::zeros(0, g, 0);
        cov.set(0, 0, 0, 1.0).unwrap();
        cov.set(0, 1, 1, 1.0).unwrap();
        cov.set(0, 0, 1, 2.0).unwrap();
        assert!(matches!(build_frame(&cov), Err(Error::CovarianceInvalid { ell: 0, .. })));
    }

    #[test]
    fn weighted_orthogonality() {
        let g = grid();
        let cov = RadialCovariance::from_fn(0, g.clone(), 0, |_, a, b| (-(a - b).powi(2) * 4.0).exp());
        let frame = build_frame(&cov).unwrap();
        let fs = frame.functions(0);
        for (j, a) in fs.iter().enumerate() {
            for (k, b) in fs.iter().enumerate() {
                let want = if j == k { frame.eigenvalues(0)[j] } else { 0.0 };
                assert!((weighted_dot(&g, a, b) - want).abs() < 1e-12 * frame.eigenvalues(0)[0]);
            }
        }
    }

    #[test]
    fn polynomial_basis_is_orthonormal() {
        let g = RadialGrid::gauss_legendre(2.0, 12).unwrap();
        let b = orthonormal_polynomials(&g, 8).unwrap();
        for (j, x) in b.iter().enumerate() {
            for (k, y) in b.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((weighted_dot(&g, x, y) - want).abs() < 1e-10);
            }
        }
        assert!(orthonormal_polynomials(&g, 13).is_err());
    }

    #[test]
    fn basis_expansion_recovers_coefficients() {
        let g = RadialGrid::gauss_legendre(1.0, 10).unwrap();
        let basis = orthonormal_polynomials(&g, 5).unwrap();
        let cs = [1.5, 0.0, 0.7, 0.2, 0.05];
        let n = g.len();
        let mut cov = RadialCovariance::zeros(0, g.clone(), 2);
        for ell in 0..=2 {
            for i in 0..n {
                for k in 0..n {
                    let v: f64 = (0..5).map(|j| cs[j] * cs[j] * basis[j][i] * basis[j][k]).sum();
                    cov.set(ell, i, k, v).unwrap();
                }
            }
        }
        let exp = expand_in_basis(&cov, &basis).unwrap();
        for ell in 0..=2 {
            for (got, want) in exp.coefficients[ell].iter().zip(cs) {
                assert!((got - want).abs() < 1e-7, "{got} vs {want}");
            }
            assert!(exp.residuals[ell] < 1e-10);
            assert!(exp.frame.reconstruction_error(&cov, ell) < 1e-10);
        }
    }

    #[test]
    fn truncation_increases_residual() {
        let g = RadialGrid::gauss_legendre(1.0, 16).unwrap();
        let cov = RadialCovariance::from_fn(0, g.clone(), 0, |_, a, b| (-(a - b).abs()).exp());
        let full = orthonormal_polynomials(&g, 10).unwrap();
        let mut last = -1.0;
        for j in (1..=10).rev() {
            let r = expand_in_basis(&cov, &full[..j]).unwrap().residuals[0];
            assert!(r >= last - 1e-14, "J={j}: {r} < {last}");
            last = r;
        }
    }

    #[test]
    fn dependent_basis_is_reported() {
        let g = grid();
        let basis = orthonormal_polynomials(&g, 2).unwrap();
        let dup = vec![basis[0].clone(), basis[1].clone(), basis[0].clone()];
        let cov = RadialCovariance::from_fn(0, g, 0, |_, a, b| a * b);
        assert!(matches!(expand_in_basis(&cov, &dup), Err(Error::RankDeficient(_))));
    }

    fn random_psd(n: usize, rank: usize, seed: u64) -> Vec<f64> {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a: Vec<f64> = (0..n * rank).map(|_| next()).collect();
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                c[i * n + k] = (0..rank).map(|j| a[i * rank + j] * a[k * rank + j]).sum();
            }
        }
        c
    }

    proptest! {
        #[test]
        fn random_psd_reconstruction(seed in any::<u64>(), rank in 1usize..=10) {
            let g = RadialGrid::gauss_legendre(1.0, 10).unwrap();
            let c = random_psd(10, rank, seed);
            let mut cov = RadialCovariance::zeros(0, g, 0);
            for i in 0..10 {
                for k in i..10 {
                    cov.set(0, i, k, c[i * 10 + k]).unwrap();
                }
            }
            let frame = build_frame(&cov).unwrap();
            prop_assert!(frame.functions(0).len() <= rank);
            prop_assert!(frame.reconstruction_error(&cov, 0) <= 1e-8);
        }
    }
}
