//! Spherical Bessel functions, their zeros, and the Fourier–Bessel pair
//!
//! ```text
//! ã(k) = sqrt(2/π) ∫_0^R j_l(kr) a(r) r² dr
//! a(r) = sqrt(2/π) ∫_0^∞ j_l(kr) ã(k) k² dk
//! ```
//!
//! The inverse integral is replaced by the Fourier–Bessel series on `[0, R]`:
//! with `k_q = z_{lq}/R`, `z_{lq}` the positive zeros of `j_l`, the measure
//! `k² dk` becomes the weights `W_q = π / (R³ k_q² j_{l+1}(z_{lq})²)`. The
//! series is exact for finite combinations of `j_l(k_q r)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

use super::RadialGrid;

const SERIES_THRESHOLD: f64 = 1e-3;

/// `j_0(x), ..., j_lmax(x)`.
///
/// Upward recurrence when `x > lmax`, otherwise Miller's downward recurrence
/// normalised against `j_0` or `j_1`. A power series covers `|x| < 1e-3`.
pub fn spherical_bessel_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    let ax = x.abs();
    if ax < SERIES_THRESHOLD {
        // j_l(x) = x^l / (2l+1)!! (1 - x²/(2(2l+3)) + x⁴/(8(2l+3)(2l+5)))
        let mut lead = 1.0;
        for (l, slot) in out.iter_mut().enumerate() {
            if l > 0 {
                lead *= x / (2 * l + 1) as f64;
            }
            if lead == 0.0 {
                break;
            }
            let a = (2 * l + 3) as f64;
            let b = (2 * l + 5) as f64;
            *slot = lead * (1.0 - x * x / (2.0 * a) + x.powi(4) / (8.0 * a * b));
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    out[0] = j0;
    if lmax == 0 {
        return out;
    }
    out[1] = j1;
    if ax > lmax as f64 {
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        }
        return out;
    }
    let start = lmax + 16 + (40.0 * (lmax.max(ax as usize) as f64)).sqrt() as usize;
    let mut above = 0.0;
    let mut current = 1e-300;
    let mut raw = vec![0.0; lmax + 1];
    for l in (1..=start).rev() {
        let below = (2 * l + 1) as f64 / x * current - above;
        above = current;
        current = below;
        if l - 1 <= lmax {
            raw[l - 1] = current;
        }
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            for v in raw.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() { j0 / raw[0] } else { j1 / raw[1] };
    for (o, r) in out.iter_mut().zip(&raw) {
        *o = r * scale;
    }
    out
}

/// `j_l(x)`.
pub fn spherical_bessel(l: usize, x: f64) -> f64 {
    spherical_bessel_all(l, x)[l]
}

/// First `count` positive zeros of `j_l`, by scanning and bisection.
pub fn spherical_bessel_zeros(l: usize, count: usize) -> Vec<f64> {
    let f = |x: f64| spherical_bessel(l, x);
    let mut zeros = Vec::with_capacity(count);
    let step = 0.25;
    let mut a = (l as f64).max(step);
    let mut fa = f(a);
    while zeros.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// Nodes `k_q = z_{lq}/R` and weights `W_q` of the inverse transform.
#[derive(Clone, Debug, PartialEq)]
pub struct KGrid {
    pub ell: usize,
    pub radius: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn bessel_zero_k_grid(ell: usize, radius: f64, count: usize) -> Result<KGrid> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    let zeros = spherical_bessel_zeros(ell, count);
    let nodes: Vec<f64> = zeros.iter().map(|z| z / radius).collect();
    let weights = zeros
        .iter()
        .zip(&nodes)
        .map(|(&z, &k)| {
            let jn = spherical_bessel(ell + 1, z);
            std::f64::consts::PI / (radius.powi(3) * k * k * jn * jn)
        })
        .collect();
    Ok(KGrid {
        ell,
        radius,
        nodes,
        weights,
    })
}

fn norm() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

/// `ã(k)` for samples on a radial grid, using the grid's quadrature.
pub fn fourier_bessel_forward(samples: &[Complex64], grid: &RadialGrid, ell: usize, k_nodes: &[f64]) -> Result<Vec<Complex64>> {
    if samples.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} samples for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    Ok(k_nodes
        .iter()
        .map(|&k| {
            let s: Complex64 = grid
                .nodes()
                .iter()
                .zip(grid.weights())
                .zip(samples)
                .map(|((&r, &w), &a)| a * (w * spherical_bessel(ell, k * r)))
                .sum();
            s * norm()
        })
        .collect())
}

/// Forward transform with an error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardEstimate {
    pub values: Vec<f64>,
    /// `|Q_n - Q_2n|` plus a rounding floor, per node.
    pub error_bound: Vec<f64>,
}

/// `ã(k)` for a function on `[0, R]`, by Gauss–Legendre rules with `n` and
/// `2n` nodes. The value is the `2n` result.
pub fn fourier_bessel_forward_fn(f: impl Fn(f64) -> f64, radius: f64, ell: usize, k_nodes: &[f64], n: usize) -> Result<ForwardEstimate> {
    let coarse = RadialGrid::gauss_legendre(radius, n)?;
    let fine = RadialGrid::gauss_legendre(radius, 2 * n)?;
    let fc: Vec<f64> = coarse.nodes().iter().map(|&r| f(r)).collect();
    let ff: Vec<f64> = fine.nodes().iter().map(|&r| f(r)).collect();
    let quad = |g: &RadialGrid, v: &[f64], k: f64| -> (f64, f64) {
        let mut sum = 0.0;
        let mut abs = 0.0;
        for ((&r, &w), &a) in g.nodes().iter().zip(g.weights()).zip(v) {
            let t = w * a * spherical_bessel(ell, k * r);
            sum += t;
            abs += t.abs();
        }
        (sum * norm(), abs * norm())
    };
    let mut values = Vec::with_capacity(k_nodes.len());
    let mut error_bound = Vec::with_capacity(k_nodes.len());
    for &k in k_nodes {
        let (qc, _) = quad(&coarse, &fc, k);
        let (qf, abs) = quad(&fine, &ff, k);
        values.push(qf);
        error_bound.push((qc - qf).abs() + 64.0 * f64::EPSILON * abs);
    }
    Ok(ForwardEstimate { values, error_bound })
}

/// `a(r)` from `ã` at the nodes of `kgrid`.
pub fn fourier_bessel_inverse(atilde: &[Complex64], kgrid: &KGrid, r_nodes: &[f64]) -> Result<Vec<Complex64>> {
    if atilde.len() != kgrid.nodes.len() {
        return Err(Error::invalid(format!(
            "{} spectral samples for a k-grid of {} nodes",
            atilde.len(),
            kgrid.nodes.len()
        )));
    }
    Ok(r_nodes
        .iter()
        .map(|&r| {
            let s: Complex64 = kgrid
                .nodes
                .iter()
                .zip(&kgrid.weights)
                .zip(atilde)
                .map(|((&k, &w), &a)| a * (w * k * k * spherical_bessel(kgrid.ell, k * r)))
                .sum();
            s * norm()
        })
        .collect())
}

/// Gauss–Legendre nodes on `[0, R]` with the `r²` factor folded into the weights.
pub(crate) fn radial_gauss_legendre(radius: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * radius;
    let mut pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            let r = half * (xi + 1.0);
            (r, wi * half * r * r)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn closed_form(l: usize, x: f64) -> f64 {
        let (s, c) = x.sin_cos();
        match l {
            0 => s / x,
            1 => s / (x * x) - c / x,
            2 => (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
            _ => unreachable!(),
        }
    }

    #[test]
    fn matches_closed_forms() {
        // The closed forms cancel badly for small x; 0.01 is checked against the series.
        let x = 0.01f64;
        assert_relative_eq!(spherical_bessel(2, x), x * x / 15.0 * (1.0 - x * x / 14.0), max_relative = 1e-12);
        for &x in &[0.3, 1.0, 2.5, 7.0, 31.0, 100.0] {
            let v = spherical_bessel_all(2, x);
            for l in 0..=2 {
                assert_relative_eq!(v[l], closed_form(l, x), max_relative = 1e-10, epsilon = 1e-14);
            }
        }
        assert_eq!(spherical_bessel(0, 0.0), 1.0);
        assert_eq!(spherical_bessel(3, 0.0), 0.0);
    }

    #[test]
    fn upward_and_downward_branches_agree() {
        // x slightly below and above lmax switch the branch.
        for &x in &[9.9, 10.1] {
            let a = spherical_bessel_all(10, x);
            let b = spherical_bessel_all(30, x);
            for l in 0..=10 {
                assert_relative_eq!(a[l], b[l], max_relative = 1e-10, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn small_argument_series() {
        let x = 5e-4;
        assert_relative_eq!(spherical_bessel(0, x), x.sin() / x, max_relative = 1e-15);
        assert_relative_eq!(spherical_bessel(1, x), x / 3.0 * (1.0 - x * x / 10.0), max_relative = 1e-14);
        let x2 = 2e-3;
        assert_relative_eq!(spherical_bessel(1, x2), closed_form(1, x2), max_relative = 1e-9);
    }

    #[test]
    fn large_order_values() {
        // Reference values from scipy.special.spherical_jn
        assert_relative_eq!(spherical_bessel(10, 1.0), 7.116_552_640_047_341e-11, max_relative = 1e-12);
        assert_relative_eq!(spherical_bessel(5, 10.0), -0.055_534_511_621_452_16, max_relative = 1e-12);
    }

    #[test]
    fn zeros_of_j0_are_multiples_of_pi() {
        let z = spherical_bessel_zeros(0, 5);
        for (q, zq) in z.iter().enumerate() {
            assert_relative_eq!(*zq, std::f64::consts::PI * (q + 1) as f64, max_relative = 1e-13);
        }
        // j_1 zeros solve tan x = x: 4.493409457909064
        assert_relative_eq!(spherical_bessel_zeros(1, 1)[0], 4.493_409_457_909_064, max_relative = 1e-13);
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let g = RadialGrid::gauss_legendre(2.0, 12).unwrap();
        let v = fourier_bessel_forward(&[Complex64::new(0.0, 0.0); 12], &g, 1, &[0.5, 1.0]).unwrap();
        assert!(v.iter().all(|z| z.norm() == 0.0));
        let kg = bessel_zero_k_grid(1, 2.0, 4).unwrap();
        let r = fourier_bessel_inverse(&[Complex64::new(0.0, 0.0); 4], &kg, &[0.5, 1.0]).unwrap();
        assert!(r.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn closed_form_l0_pair() {
        let radius = 1.5;
        let ks = [0.3, 1.0, 2.2, 5.0, 9.0];
        let est = fourier_bessel_forward_fn(|_| 1.0, radius, 0, &ks, 24).unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let kr = k * radius;
            let exact = norm() * (kr.sin() - kr * kr.cos()) / k.powi(3);
            assert!((est.values[i] - exact).abs() <= est.error_bound[i], "k={k}");
            assert!(est.error_bound[i] < 1e-10);
        }
    }

    #[test]
    fn band_limited_round_trip() {
        let radius = 2.0;
        for ell in [0usize, 1, 3] {
            let kg = bessel_zero_k_grid(ell, radius, 12).unwrap();
            let f = |r: f64| spherical_bessel(ell, kg.nodes[1] * r) - 0.5 * spherical_bessel(ell, kg.nodes[4] * r);
            let g = RadialGrid::gauss_legendre(radius, 64).unwrap();
            let samples: Vec<Complex64> = g.nodes().iter().map(|&r| Complex64::new(f(r), 0.0)).collect();
            let at = fourier_bessel_forward(&samples, &g, ell, &kg.nodes).unwrap();
            let back = fourier_bessel_inverse(&at, &kg, g.nodes()).unwrap();
            for (b, s) in back.iter().zip(&samples) {
                assert!((b - s).norm() < 1e-10, "ell={ell}");
            }
        }
    }
}
