//! Band-limited spin spherical harmonic transforms on a Gauss–Legendre grid.
//!
//! Colatitudes are the Gauss–Legendre nodes in `cos(theta)`; longitudes are
//! `n_phi = 2 lmax + 1` equispaced points starting at `phi = 0`. With this
//! layout the quadrature of any product of two harmonics of degree at most
//! `lmax` is exact, so [`analyze`] inverts [`synthesize`] to rounding error.
//! The longitude sums are direct (no FFT).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{spin_lambda_column, HarmonicConfig};
use crate::parallel::map_indexed;
use crate::quadrature::gauss_legendre;

/// Quadrature grid on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    lmax_exact: usize,
    n_phi: usize,
    theta_nodes: Vec<f64>,
    theta_weights: Vec<f64>,
}

impl SphereGrid {
    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn lmax_exact(&self) -> usize {
        self.lmax_exact
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    /// Gauss–Legendre weights in `cos(theta)`; they sum to 2.
    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi_step(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        self.phi_step() * j as f64
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of node `(t, j)`; all weights sum to `4 pi`.
    pub fn node_weight(&self, t: usize) -> f64 {
        self.theta_weights[t] * self.phi_step()
    }

    /// `(theta, phi)` of every node in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta_nodes
            .iter()
            .flat_map(move |&theta| (0..self.n_phi).map(move |j| (theta, self.phi(j))))
    }

    /// `e^{2 pi i k / n_phi}` for `k in 0..n_phi`.
    fn twiddles(&self) -> Vec<Complex64> {
        (0..self.n_phi)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.n_phi as f64))
            .collect()
    }

    fn twiddle_index(&self, m: i32, j: usize) -> usize {
        (m as i64 * j as i64).rem_euclid(self.n_phi as i64) as usize
    }
}

/// Gauss–Legendre grid that integrates products of harmonics with `l <= lmax` exactly.
pub fn make_grid(lmax: usize) -> Result<SphereGrid> {
    make_grid_with(&HarmonicConfig::default(), lmax)
}

pub fn make_grid_with(config: &HarmonicConfig, lmax: usize) -> Result<SphereGrid> {
    config.check_ell(lmax)?;
    let (x, w) = gauss_legendre(lmax + 1);
    Ok(SphereGrid {
        lmax_exact: lmax,
        n_phi: 2 * lmax + 1,
        theta_nodes: x.iter().map(|v| v.clamp(-1.0, 1.0).acos()).collect(),
        theta_weights: w,
    })
}

/// Field samples of one spin weight on a [`SphereGrid`], row-major in `(theta, phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMap {
    grid: SphereGrid,
    spin: i32,
    values: Vec<Complex64>,
}

impl SphereMap {
    pub fn new(grid: SphereGrid, spin: i32, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "map has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, spin, values })
    }

    pub fn zeros(grid: SphereGrid, spin: i32) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, spin, values }
    }

    pub fn from_fn(grid: SphereGrid, spin: i32, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let values = grid.nodes().map(|(t, p)| f(t, p)).collect();
        Self { grid, spin, values }
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn get(&self, t: usize, j: usize) -> Complex64 {
        self.values[t * self.grid.n_phi + j]
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn imag_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.im.abs()))
    }

    /// Quadrature inner product `sum w f conj(g)`.
    pub fn inner(&self, other: &SphereMap) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::invalid("maps live on different grids"));
        }
        let n_phi = self.grid.n_phi;
        let mut total = Complex64::new(0.0, 0.0);
        for t in 0..self.grid.n_theta() {
            let w = self.grid.node_weight(t);
            let row: Complex64 = (0..n_phi)
                .map(|j| self.values[t * n_phi + j] * other.values[t * n_phi + j].conj())
                .sum();
            total += row * w;
        }
        Ok(total)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).map(|v| v.re).unwrap_or(0.0)
    }
}

/// Coefficients `a_lm` of one spin weight, `|s| <= l <= lmax`.
///
/// Storage covers every `l <= lmax` so that indices line up across spins;
/// entries with `l < |s|` are always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicCoefficients {
    spin: i32,
    lmax: usize,
    data: Vec<Complex64>,
}

#[inline]
fn coeff_index(ell: usize, m: i32) -> usize {
    ((ell * ell + ell) as isize + m as isize) as usize
}

impl HarmonicCoefficients {
    pub fn zeros(spin: i32, lmax: usize) -> Self {
        Self {
            spin,
            lmax,
            data: vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)],
        }
    }

    /// Builds coefficients from a function of `(l, m)`, evaluated for `l >= |s|` only.
    pub fn from_fn(spin: i32, lmax: usize, mut f: impl FnMut(usize, i32) -> Complex64) -> Self {
        let mut out = Self::zeros(spin, lmax);
        for ell in out.min_ell()..=lmax {
            let l = ell as i32;
            for m in -l..=l {
                out.data[coeff_index(ell, m)] = f(ell, m);
            }
        }
        out
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Smallest degree that can carry a nonzero coefficient.
    pub fn min_ell(&self) -> usize {
        self.spin.unsigned_abs() as usize
    }

    pub fn get(&self, ell: usize, m: i32) -> Complex64 {
        assert!(ell <= self.lmax && m.unsigned_abs() as usize <= ell, "(l={ell}, m={m}) out of range");
        self.data[coeff_index(ell, m)]
    }

    pub fn set(&mut self, ell: usize, m: i32, value: Complex64) -> Result<()> {
        if ell > self.lmax || m.unsigned_abs() as usize > ell {
            return Err(Error::invalid(format!(
                "(l={ell}, m={m}) outside band limit {}",
                self.lmax
            )));
        }
        if ell < self.min_ell() {
            if value == Complex64::new(0.0, 0.0) {
                return Ok(());
            }
            return Err(Error::invalid(format!(
                "l={ell} below |spin|={} must stay zero",
                self.min_ell()
            )));
        }
        self.data[coeff_index(ell, m)] = value;
        Ok(())
    }

    /// `(l, m, a_lm)` for every admissible index, `l` ascending then `m` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i32, Complex64)> + '_ {
        (self.min_ell()..=self.lmax).flat_map(move |ell| {
            let l = ell as i32;
            (-l..=l).map(move |m| (ell, m, self.data[coeff_index(ell, m)]))
        })
    }

    /// Multiplies every degree-`l` coefficient by `factor(l)`.
    pub fn scale_by_degree(&self, factor: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for ell in 0..=self.lmax {
            let f = factor(ell);
            let l = ell as i32;
            for m in -l..=l {
                out.data[coeff_index(ell, m)] *= f;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &HarmonicCoefficients) -> f64 {
        assert_eq!(self.lmax, other.lmax, "band limits differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, a| acc.max(a.norm()))
    }

    /// `sum |a_lm|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest violation of `a_{l,-m} = (-1)^m conj(a_lm)`.
    pub fn reality_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for ell in self.min_ell()..=self.lmax {
            for m in 0..=ell as i32 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let d = self.get(ell, -m) - self.get(ell, m).conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Whether `a_{l,-m} = (-1)^m conj(a_lm)` holds bit for bit.
    pub fn is_real_field(&self) -> bool {
        (self.min_ell()..=self.lmax).all(|ell| {
            (0..=ell as i32).all(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                self.get(ell, -m) == self.get(ell, m).conj() * sign
            })
        })
    }

    /// Copy with a different spin label and band limit; entries outside the
    /// new admissible range are dropped.
    pub fn relabel(&self, spin: i32, lmax: usize) -> Self {
        let mut out = Self::zeros(spin, lmax);
        for ell in out.min_ell()..=lmax.min(self.lmax) {
            let l = ell as i32;
            for m in -l..=l {
                out.data[coeff_index(ell, m)] = self.data[coeff_index(ell, m)];
            }
        }
        out
    }
}

/// `sum_lm a_lm sY_lm` on the grid.
pub fn synthesize(coeffs: &HarmonicCoefficients, grid: &SphereGrid) -> Result<SphereMap> {
    let lmax = coeffs.lmax();
    if lmax > grid.lmax_exact() {
        return Err(Error::BandLimitExceeded {
            requested: lmax,
            limit: grid.lmax_exact(),
        });
    }
    let spin = coeffs.spin();
    let n_phi = grid.n_phi();
    let twiddles = grid.twiddles();
    let l = lmax as i32;
    let rows = map_indexed(grid.n_theta(), |t| {
        let theta = grid.theta_nodes()[t];
        let mut lambda = Vec::with_capacity(lmax + 1);
        // F_m(theta) = sum_l a_lm sλ_lm(theta)
        let fourier: Vec<(i32, Complex64)> = (-l..=l)
            .filter_map(|m| {
                let lmin = spin_lambda_column(spin, m, theta, lmax, &mut lambda);
                if lmin > lmax {
                    return None;
                }
                let sum: Complex64 = lambda
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| coeffs.get(lmin + i, m) * v)
                    .sum();
                Some((m, sum))
            })
            .collect();
        (0..n_phi)
            .map(|j| {
                fourier
                    .iter()
                    .map(|&(m, f)| f * twiddles[grid.twiddle_index(m, j)])
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>()
    });
    let values = rows.into_iter().flatten().collect();
    SphereMap::new(grid.clone(), spin, values)
}

/// Quadrature estimate of `a_lm = ∫ X conj(sY_lm)`, exact for band-limited maps.
///
/// A spin-0 map whose imaginary parts are all exactly zero is treated as a
/// real field: only `m >= 0` is computed and the rest follows from
/// `a_{l,-m} = (-1)^m conj(a_lm)`, which then holds bit for bit.
pub fn analyze(map: &SphereMap, lmax: usize) -> Result<HarmonicCoefficients> {
    let grid = map.grid();
    if lmax > grid.lmax_exact() {
        return Err(Error::BandLimitExceeded {
            requested: lmax,
            limit: grid.lmax_exact(),
        });
    }
    let spin = map.spin();
    let real_input = spin == 0 && map.values().iter().all(|v| v.im == 0.0);
    let l = lmax as i32;
    let m_start = if real_input { 0 } else { -l };
    let n_phi = grid.n_phi();
    let twiddles = grid.twiddles();

    // Per-ring contributions, reduced afterwards in ring order.
    let partials = map_indexed(grid.n_theta(), |t| {
        let theta = grid.theta_nodes()[t];
        let w = grid.node_weight(t);
        let row = &map.values()[t * n_phi..(t + 1) * n_phi];
        let mut lambda = Vec::with_capacity(lmax + 1);
        let mut out = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
        for m in m_start..=l {
            let lmin = spin_lambda_column(spin, m, theta, lmax, &mut lambda);
            if lmin > lmax {
                continue;
            }
            let g: Complex64 = row
                .iter()
                .enumerate()
                .map(|(j, &x)| x * twiddles[grid.twiddle_index(-m, j)])
                .sum::<Complex64>()
                * w;
            for (i, &v) in lambda.iter().enumerate() {
                out[coeff_index(lmin + i, m)] = g * v;
            }
        }
        out
    });

    let mut coeffs = HarmonicCoefficients::zeros(spin, lmax);
    for partial in &partials {
        for (acc, v) in coeffs.data.iter_mut().zip(partial) {
            *acc += v;
        }
    }
    if real_input {
        for ell in 0..=lmax {
            let a0 = coeffs.data[coeff_index(ell, 0)];
            coeffs.data[coeff_index(ell, 0)] = Complex64::new(a0.re, 0.0);
            for m in 1..=ell as i32 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                coeffs.data[coeff_index(ell, -m)] = coeffs.data[coeff_index(ell, m)].conj() * sign;
            }
        }
    }
    Ok(coeffs)
}

/// Tolerance on the reality constraint accepted by [`synthesize_real`],
/// relative to the largest coefficient.
pub const REALITY_TOLERANCE: f64 = 1e-12;

/// Synthesis of a real scalar field.
///
/// Checks `a_{l,-m} = (-1)^m conj(a_lm)`, synthesizes through the complex
/// path, checks the imaginary part vanishes and returns the real part.
pub fn synthesize_real(coeffs: &HarmonicCoefficients, grid: &SphereGrid) -> Result<Vec<f64>> {
    if coeffs.spin() != 0 {
        return Err(Error::invalid("real synthesis needs spin 0"));
    }
    let scale = coeffs.max_abs().max(f64::MIN_POSITIVE);
    let violation = coeffs.reality_violation();
    if violation > REALITY_TOLERANCE * scale {
        return Err(Error::invalid(format!(
            "coefficients violate the reality condition by {violation:e}"
        )));
    }
    let map = synthesize(coeffs, grid)?;
    let imag = map.max_abs_imag();
    if imag > REALITY_TOLERANCE * scale.max(1.0) {
        return Err(Error::invalid(format!("synthesized map has imaginary part {imag:e}")));
    }
    Ok(map.real_part())
}

/// Real coefficients `ã_lm` multiplying the real harmonics `S^m_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealCoefficients {
    lmax: usize,
    data: Vec<f64>,
}

impl RealCoefficients {
    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn get(&self, ell: usize, m: i32) -> f64 {
        self.data[coeff_index(ell, m)]
    }
}

/// `ã_lm = sqrt2 Im a_lm (m<0), a_l0 (m=0), sqrt2 Re a_lm (m>0)`.
///
/// Meaningful for coefficients of a real field; `Im a_l0` is discarded.
pub fn to_real_coefficients(coeffs: &HarmonicCoefficients) -> Result<RealCoefficients> {
    if coeffs.spin() != 0 {
        return Err(Error::invalid("real coefficients need spin 0"));
    }
    let lmax = coeffs.lmax();
    let s2 = std::f64::consts::SQRT_2;
    let mut data = vec![0.0; (lmax + 1) * (lmax + 1)];
    for (ell, m, a) in coeffs.iter() {
        data[coeff_index(ell, m)] = match m.cmp(&0) {
            std::cmp::Ordering::Less => s2 * a.im,
            std::cmp::Ordering::Equal => a.re,
            std::cmp::Ordering::Greater => s2 * a.re,
        };
    }
    Ok(RealCoefficients { lmax, data })
}

/// `sum_lm ã_lm S^m_l` on the grid, with `S^m_l` built from complex harmonics
/// exactly as in its three-branch definition.
pub fn synthesize_real_harmonics(coeffs: &RealCoefficients, grid: &SphereGrid) -> Result<Vec<f64>> {
    let lmax = coeffs.lmax();
    if lmax > grid.lmax_exact() {
        return Err(Error::BandLimitExceeded {
            requested: lmax,
            limit: grid.lmax_exact(),
        });
    }
    let n_phi = grid.n_phi();
    let twiddles = grid.twiddles();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rows = map_indexed(grid.n_theta(), |t| {
        let theta = grid.theta_nodes()[t];
        // lambda[m + lmax][l - |m|]
        let mut lambda: Vec<Vec<f64>> = Vec::with_capacity(2 * lmax + 1);
        for m in -(lmax as i32)..=lmax as i32 {
            let mut col = Vec::new();
            spin_lambda_column(0, m, theta, lmax, &mut col);
            lambda.push(col);
        }
        let y = |ell: usize, m: i32, j: usize| -> Complex64 {
            let col = &lambda[(m + lmax as i32) as usize];
            twiddles[grid.twiddle_index(m, j)] * col[ell - m.unsigned_abs() as usize]
        };
        (0..n_phi)
            .map(|j| {
                let mut total = 0.0;
                for ell in 0..=lmax {
                    let l = ell as i32;
                    for m in -l..=l {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        let s = match m.cmp(&0) {
                            std::cmp::Ordering::Less => {
                                Complex64::new(0.0, h) * (y(ell, m, j) - y(ell, -m, j) * sign)
                            }
                            std::cmp::Ordering::Equal => y(ell, 0, j),
                            std::cmp::Ordering::Greater => (y(ell, m, j) + y(ell, -m, j) * sign) * h,
                        };
                        total += coeffs.get(ell, m) * s.re;
                    }
                }
                total
            })
            .collect::<Vec<_>>()
    });
    Ok(rows.into_iter().flatten().collect())
}
