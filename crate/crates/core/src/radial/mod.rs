//! Fields on the ball `r <= R`: radial quadrature, the lensing potential,
//! the Fourier–Bessel transform, covariance frames and full ball synthesis.

mod bessel;
mod frame;

pub use bessel::{
    bessel_zero_k_grid, fourier_bessel_forward, fourier_bessel_forward_fn, fourier_bessel_inverse, spherical_bessel,
    spherical_bessel_all, spherical_bessel_zeros, ForwardEstimate, KGrid,
};
pub use frame::{
    build_frame, expand_in_basis, orthonormal_polynomials, BasisExpansion, RadialFrame, EIGENVALUE_FLOOR, FRAME_RELATIVE_TOLERANCE,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::rng::{self, Domain, StreamKey};
use crate::transform::{synthesize, HarmonicCoefficients, SphereGrid, SphereMap};

/// Speed of light in km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Nodes in `(0, R]` with weights for `∫_0^R f(r) r² dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive and finite, got {radius}")));
    }
    Ok(())
}

impl RadialGrid {
    /// Gauss–Legendre rule on `[0, R]`, exact for polynomials of degree `2n - 3`.
    pub fn gauss_legendre(radius: f64, n: usize) -> Result<Self> {
        check_radius(radius)?;
        if n == 0 {
            return Err(Error::invalid("radial grid needs at least one node"));
        }
        let (nodes, weights) = bessel::radial_gauss_legendre(radius, n);
        Ok(Self { radius, nodes, weights })
    }

    /// Arbitrary increasing nodes. Weights integrate the piecewise-linear
    /// interpolant, held constant on `[0, r_1]` and `[r_n, R]`, so they sum
    /// to `R³/3`.
    pub fn from_nodes(radius: f64, nodes: Vec<f64>) -> Result<Self> {
        check_radius(radius)?;
        if nodes.is_empty() {
            return Err(Error::invalid("radial grid needs at least one node"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) || *nodes.last().unwrap() > radius {
            return Err(Error::invalid("radial nodes must increase strictly within (0, R]"));
        }
        let weights = hat_weights(radius, &nodes);
        Ok(Self { radius, nodes, weights })
    }

    /// `n` equally spaced nodes `iR/n`.
    pub fn uniform(radius: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("radial grid needs at least one node"));
        }
        Self::from_nodes(radius, (1..=n).map(|i| radius * i as f64 / n as f64).collect())
    }

    /// Grid read back from storage. Weights must be positive and sum to
    /// `R³/3` within a relative `1e-10`.
    pub fn with_weights(radius: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_radius(radius)?;
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::invalid("radial grid needs matching, non-empty node and weight lists"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) || *nodes.last().unwrap() > radius {
            return Err(Error::invalid("radial nodes must increase strictly within (0, R]"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("radial weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        let volume = radius.powi(3) / 3.0;
        if (total - volume).abs() > 1e-10 * volume {
            return Err(Error::invalid(format!(
                "radial weights sum to {total}, expected R³/3 = {volume}"
            )));
        }
        Ok(Self { radius, nodes, weights })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, f)| w * f).sum()
    }
}

/// `∫_a^b (b - r)/(b - a) r² dr` and `∫_a^b (r - a)/(b - a) r² dr`.
fn segment_moments(a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    // Expanded about a to avoid cancellation for short segments.
    let falling = h * (a * a / 2.0 + a * h / 3.0 + h * h / 12.0);
    let rising = h * (a * a / 2.0 + 2.0 * a * h / 3.0 + h * h / 4.0);
    (falling, rising)
}

fn hat_weights(radius: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    w[0] += nodes[0].powi(3) / 3.0;
    for i in 0..n - 1 {
        let (fall, rise) = segment_moments(nodes[i], nodes[i + 1]);
        w[i] += fall;
        w[i + 1] += rise;
    }
    w[n - 1] += (radius.powi(3) - nodes[n - 1].powi(3)) / 3.0;
    w
}

/// `φ(r) = (2/c²) ∫_0^r Φ(r') (r - r')/(r r') dr'` at every node of a radial profile.
///
/// `Φ` is interpolated linearly between nodes and taken linear through the
/// origin on `[0, r_1]`, and the kernel is integrated exactly against that
/// interpolant. A node at `r = 0` gets `φ = 0`.
pub fn lensing_potential_profile(phi_newton: &[Complex64], nodes: &[f64], c: f64) -> Result<Vec<Complex64>> {
    if phi_newton.len() != nodes.len() {
        return Err(Error::invalid("potential samples do not match the radial nodes"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("speed of light must be positive, got {c}")));
    }
    if nodes.first().is_some_and(|&r| r < 0.0) || nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radial nodes must be non-negative and increasing"));
    }
    let zero = Complex64::new(0.0, 0.0);
    // Piece k covers [x_k, x_{k+1}] with Φ = alpha + beta r'.
    let mut pieces: Vec<(f64, f64, Complex64, Complex64)> = Vec::new();
    let mut prev = (0.0, zero);
    for (&r, &v) in nodes.iter().zip(phi_newton) {
        if r == 0.0 {
            continue;
        }
        let (a, va) = prev;
        let beta = (v - va) / (r - a);
        let alpha = va - beta * a;
        pieces.push((a, r, alpha, beta));
        prev = (r, v);
    }
    let scale = 2.0 / (c * c);
    let mut out = Vec::with_capacity(nodes.len());
    let mut k = 0;
    for &r in nodes {
        if r == 0.0 {
            out.push(zero);
            continue;
        }
        let mut total = zero;
        for &(a, b, alpha, beta) in &pieces[..=k] {
            // ∫_a^b (alpha + beta r')(1/r' - 1/r) dr'
            let log_term = if a == 0.0 { zero } else { alpha * (b / a).ln() };
            total += log_term - alpha * ((b - a) / r) + beta * (b - a) - beta * ((b * b - a * a) / (2.0 * r));
        }
        out.push(total * scale);
        k += 1;
    }
    Ok(out)
}

/// Applies [`lensing_potential_profile`] to every `(l, m)` of a set of
/// shells, one coefficient set per radial node.
pub fn lensing_potential(shells: &[HarmonicCoefficients], grid: &RadialGrid, c: f64) -> Result<Vec<HarmonicCoefficients>> {
    if shells.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} coefficient shells for {} radial nodes",
            shells.len(),
            grid.len()
        )));
    }
    let (spin, lmax) = (shells[0].spin(), shells[0].lmax());
    if shells.iter().any(|s| s.spin() != spin || s.lmax() != lmax) {
        return Err(Error::invalid("shells have different spins or band limits"));
    }
    let mut out: Vec<HarmonicCoefficients> = (0..grid.len()).map(|_| HarmonicCoefficients::zeros(spin, lmax)).collect();
    for ell in shells[0].min_ell()..=lmax {
        let l = ell as i32;
        for m in -l..=l {
            let profile: Vec<Complex64> = shells.iter().map(|s| s.get(ell, m)).collect();
            let phi = lensing_potential_profile(&profile, grid.nodes(), c)?;
            for (o, v) in out.iter_mut().zip(phi) {
                o.set(ell, m, v)?;
            }
        }
    }
    Ok(out)
}

/// Per-degree covariance `C_l(r_i, r_j)` on a radial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialCovariance {
    spin: i32,
    grid: RadialGrid,
    matrices: Vec<Vec<f64>>,
}

impl RadialCovariance {
    pub fn zeros(spin: i32, grid: RadialGrid, lmax: usize) -> Self {
        let n = grid.len();
        Self {
            spin,
            grid,
            matrices: vec![vec![0.0; n * n]; lmax + 1],
        }
    }

    /// Covariance with `C_l(r_i, r_j) = f(l, r_i, r_j)`.
    pub fn from_fn(spin: i32, grid: RadialGrid, lmax: usize, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(spin, grid, lmax);
        let n = out.grid.len();
        let min_ell = spin.unsigned_abs() as usize;
        for ell in min_ell..=lmax {
            for i in 0..n {
                for j in 0..n {
                    out.matrices[ell][i * n + j] = f(ell, out.grid.nodes[i], out.grid.nodes[j]);
                }
            }
        }
        out
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn lmax(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn get(&self, ell: usize, i: usize, j: usize) -> f64 {
        self.matrices[ell][i * self.grid.len() + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, ell: usize, i: usize, j: usize, value: f64) -> Result<()> {
        let n = self.grid.len();
        if ell > self.lmax() || i >= n || j >= n {
            return Err(Error::invalid(format!("covariance entry ({ell},{i},{j}) out of range")));
        }
        self.matrices[ell][i * n + j] = value;
        self.matrices[ell][j * n + i] = value;
        Ok(())
    }

    pub fn matrix(&self, ell: usize) -> &[f64] {
        &self.matrices[ell]
    }

    /// `sum_l (2l+1) C_l(r_i, r_i)` at each node.
    pub fn pointwise_variance(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .map(|i| {
                self.matrices
                    .iter()
                    .enumerate()
                    .map(|(ell, c)| (2 * ell + 1) as f64 * c[i * n + i])
                    .sum()
            })
            .collect()
    }

    /// Symmetry, finiteness, no support below `|s|`, finite pointwise variance.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        let min_ell = self.spin.unsigned_abs() as usize;
        for (ell, c) in self.matrices.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let v = c[i * n + j];
                    if !v.is_finite() {
                        return Err(Error::CovarianceInvalid {
                            ell,
                            reason: format!("non-finite entry at ({i},{j})"),
                        });
                    }
                    if v != c[j * n + i] {
                        return Err(Error::CovarianceInvalid {
                            ell,
                            reason: format!("asymmetric entry at ({i},{j})"),
                        });
                    }
                    if ell < min_ell && v != 0.0 {
                        return Err(Error::CovarianceInvalid {
                            ell,
                            reason: format!("spin {} has no degree below {min_ell}", self.spin),
                        });
                    }
                }
                if c[i * n + i] < 0.0 {
                    return Err(Error::CovarianceInvalid {
                        ell,
                        reason: format!("negative variance at node {i}"),
                    });
                }
            }
        }
        if self.pointwise_variance().iter().any(|v| !v.is_finite()) {
            return Err(Error::CovarianceInvalid {
                ell: self.lmax(),
                reason: "pointwise variance sum is not finite".into(),
            });
        }
        Ok(())
    }
}

/// A sampled ball field: coefficients and maps at every radial node.
#[derive(Clone, Debug, PartialEq)]
pub struct BallField {
    pub radial_grid: RadialGrid,
    pub coefficients: Vec<HarmonicCoefficients>,
    pub shells: Vec<SphereMap>,
}

/// `a_lm(r_i) = sum_j f_lj(r_i) X_lmj` with independent standard complex
/// Gaussians `X_lmj`, each drawn from its own `(seed, j, l, m)` stream.
///
/// With `real` set (spin 0 only) `X_l0j` is a real standard normal and
/// negative orders are mirrored so every shell is a real field.
pub fn sample_ball_coefficients(frame: &RadialFrame, seed: u64, real: bool) -> Result<Vec<HarmonicCoefficients>> {
    let spin = frame.spin();
    if real && spin != 0 {
        return Err(Error::invalid("the reality constraint applies to spin 0 only"));
    }
    let lmax = frame.lmax();
    let n = frame.grid().len();
    // per_degree[l][i][m + l]
    let per_degree = map_indexed(lmax + 1, |ell| {
        let l = ell as i32;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); 2 * ell + 1]; n];
        let functions = frame.functions(ell);
        if functions.is_empty() || ell < spin.unsigned_abs() as usize {
            return out;
        }
        let m_start = if real { 0 } else { -l };
        for m in m_start..=l {
            for (j, f) in functions.iter().enumerate() {
                let mut r = rng::stream(
                    seed,
                    Domain::BallCoefficients,
                    StreamKey {
                        index: j as u32,
                        ell: ell as u32,
                        m,
                    },
                );
                let x = if real && m == 0 {
                    Complex64::new(rng::standard_normal(&mut r), 0.0)
                } else {
                    rng::standard_complex_normal(&mut r)
                };
                for (i, &fi) in f.iter().enumerate() {
                    out[i][(m + l) as usize] += x * fi;
                }
            }
        }
        if real {
            for shell in out.iter_mut() {
                for m in 1..=l {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    shell[(l - m) as usize] = shell[(l + m) as usize].conj() * sign;
                }
            }
        }
        out
    });
    Ok((0..n)
        .map(|i| HarmonicCoefficients::from_fn(spin, lmax, |ell, m| per_degree[ell][i][(m + ell as i32) as usize]))
        .collect())
}

/// Samples coefficients with [`sample_ball_coefficients`] and synthesizes a
/// map on every shell.
pub fn sample_ball_field(frame: &RadialFrame, grid: &SphereGrid, seed: u64, real: bool) -> Result<BallField> {
    let coefficients = sample_ball_coefficients(frame, seed, real)?;
    let shells = coefficients
        .iter()
        .map(|c| synthesize(c, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(BallField {
        radial_grid: frame.grid().clone(),
        coefficients,
        shells,
    })
}
