//! Wigner d-matrices and spin-weighted spherical harmonics.
//!
//! Phase convention:
//!
//! ```text
//! sY_lm(theta, phi) = (-1)^m sqrt((2l+1)/(4 pi)) d^l_{-m,s}(theta) e^{i m phi}
//! ```
//!
//! with `d^l_{mn}` the Wigner small-d matrix in the Condon–Shortley phase.
//! For `s = 0` this reduces to the classical `Y_lm` including the
//! `(-1)^m` Condon–Shortley factor, and the ladder operators act as
//! `eth sY_lm = +sqrt((l-s)(l+s+1)) (s+1)Y_lm`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest band limit accepted unless a [`HarmonicConfig`] says otherwise.
pub const DEFAULT_MAX_ELL: usize = 512;

/// Limits shared by every harmonic evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HarmonicConfig {
    pub max_ell: usize,
}

impl Default for HarmonicConfig {
    fn default() -> Self {
        Self {
            max_ell: DEFAULT_MAX_ELL,
        }
    }
}

impl HarmonicConfig {
    pub fn check_ell(&self, ell: usize) -> Result<()> {
        if ell > self.max_ell {
            return Err(Error::BandLimitExceeded {
                requested: ell,
                limit: self.max_ell,
            });
        }
        Ok(())
    }

    pub fn wigner_d(&self, ell: usize, theta: f64) -> Result<WignerDTable> {
        self.check_ell(ell)?;
        check_theta(theta)?;
        let l = ell as i32;
        let dim = 2 * ell + 1;
        let mut entries = vec![0.0; dim * dim];
        for m in -l..=l {
            for n in -l..=l {
                let mut column = WignerColumn::new(m, n, theta);
                let value = column.nth(ell - column_start(m, n)).unwrap();
                entries[(m + l) as usize * dim + (n + l) as usize] = value;
            }
        }
        Ok(WignerDTable {
            ell,
            theta,
            entries,
        })
    }

    pub fn spin_ylm(&self, spin: i32, ell: usize, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
        self.check_ell(ell)?;
        check_indices(spin, ell, m)?;
        check_theta(theta)?;
        let lambda = spin_lambda(spin, ell, m, theta);
        Ok(Complex64::from_polar(lambda, m as f64 * phi))
    }

    pub fn parity_transform(
        &self,
        spin: i32,
        ell: usize,
        m: i32,
        theta: f64,
        phi: f64,
    ) -> Result<Complex64> {
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        Ok(self.spin_ylm(-spin, ell, m, theta, phi)? * sign)
    }

    pub fn real_ylm(&self, ell: usize, m: i32, theta: f64, phi: f64) -> Result<f64> {
        self.check_ell(ell)?;
        check_indices(0, ell, m)?;
        check_theta(theta)?;
        let y = |mm: i32| Complex64::from_polar(spin_lambda(0, ell, mm, theta), mm as f64 * phi);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let value = match m.cmp(&0) {
            std::cmp::Ordering::Less => {
                Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2) * (y(m) - y(-m) * sign)
            }
            std::cmp::Ordering::Equal => y(0),
            std::cmp::Ordering::Greater => (y(m) + y(-m) * sign) * std::f64::consts::FRAC_1_SQRT_2,
        };
        Ok(value.re)
    }
}

/// Full Wigner small-d matrix `d^l_{mn}(theta)` for one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerDTable {
    ell: usize,
    theta: f64,
    entries: Vec<f64>,
}

impl WignerDTable {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        2 * self.ell + 1
    }

    /// Entry `d^l_{mn}` with `m, n` in `[-l, l]`.
    pub fn get(&self, m: i32, n: i32) -> f64 {
        let l = self.ell as i32;
        assert!(m.abs() <= l && n.abs() <= l, "index ({m},{n}) out of range for l={l}");
        self.entries[(m + l) as usize * self.dim() + (n + l) as usize]
    }

    /// Row-major entries, rows indexed by `m + l`.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Wigner d-matrix table for degree `ell` at colatitude `theta`.
pub fn wigner_d(ell: usize, theta: f64) -> Result<WignerDTable> {
    HarmonicConfig::default().wigner_d(ell, theta)
}

/// Spin-weighted spherical harmonic `sY_lm(theta, phi)`.
pub fn spin_ylm(spin: i32, ell: usize, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    HarmonicConfig::default().spin_ylm(spin, ell, m, theta, phi)
}

/// `sY_lm(-n)`, evaluated as `(-1)^l (-s)Y_lm(n)`.
///
/// The antipode of `(theta, phi)` is `(pi - theta, phi + pi)`.
pub fn parity_transform(spin: i32, ell: usize, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    HarmonicConfig::default().parity_transform(spin, ell, m, theta, phi)
}

/// Real spherical harmonic `S^m_l`.
pub fn real_ylm(ell: usize, m: i32, theta: f64, phi: f64) -> Result<f64> {
    HarmonicConfig::default().real_ylm(ell, m, theta, phi)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(format!("theta={theta} outside [0, pi]")));
    }
    Ok(())
}

pub(crate) fn check_indices(spin: i32, ell: usize, m: i32) -> Result<()> {
    if (ell as i64) < spin.unsigned_abs() as i64 {
        return Err(Error::invalid(format!("ell={ell} below |spin|={}", spin.abs())));
    }
    if m.unsigned_abs() as usize > ell {
        return Err(Error::invalid(format!("|m|={} exceeds ell={ell}", m.abs())));
    }
    Ok(())
}

/// The real colatitude factor `sλ_lm(theta)` with `sY_lm = sλ_lm e^{i m phi}`.
pub(crate) fn spin_lambda(spin: i32, ell: usize, m: i32, theta: f64) -> f64 {
    let start = column_start(-m, spin);
    debug_assert!(ell >= start);
    let d = WignerColumn::new(-m, spin, theta).nth(ell - start).unwrap();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * ((2 * ell + 1) as f64 / (4.0 * PI)).sqrt() * d
}

/// Fills `out[l - lmin]` with `sλ_lm(theta)` for `l = lmin..=lmax`,
/// `lmin = max(|m|, |s|)`. Returns `lmin`.
pub(crate) fn spin_lambda_column(spin: i32, m: i32, theta: f64, lmax: usize, out: &mut Vec<f64>) -> usize {
    let lmin = column_start(-m, spin);
    out.clear();
    if lmin > lmax {
        return lmin;
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    out.extend(
        WignerColumn::new(-m, spin, theta)
            .take(lmax - lmin + 1)
            .enumerate()
            .map(|(i, d)| {
                let ell = lmin + i;
                sign * ((2 * ell + 1) as f64 / (4.0 * PI)).sqrt() * d
            }),
    );
    lmin
}

fn column_start(m: i32, n: i32) -> usize {
    m.unsigned_abs().max(n.unsigned_abs()) as usize
}

/// Iterator over `d^l_{mn}(theta)` for `l = max(|m|,|n|), max(|m|,|n|)+1, ...`.
///
/// Starts from the single-term closed form at the lowest degree (evaluated in
/// log space) and advances with the three-term recurrence in `l`. Neither step
/// divides by `sin(theta)`. At `theta = 0` and `theta = pi` the column yields
/// the exact limiting values.
#[derive(Clone, Debug)]
pub struct WignerColumn {
    m: f64,
    n: f64,
    cos_theta: f64,
    ell: usize,
    current: f64,
    previous: f64,
    pole: Option<Pole>,
}

#[derive(Clone, Copy, Debug)]
enum Pole {
    North,
    South,
}

impl WignerColumn {
    pub fn new(m: i32, n: i32, theta: f64) -> Self {
        let ell = column_start(m, n);
        let pole = if theta == 0.0 {
            Some(Pole::North)
        } else if theta == PI {
            Some(Pole::South)
        } else {
            None
        };
        Self {
            m: m as f64,
            n: n as f64,
            cos_theta: theta.cos(),
            ell,
            current: lowest_degree_value(ell as i64, m as i64, n as i64, theta),
            previous: 0.0,
            pole,
        }
    }
}

impl Iterator for WignerColumn {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if let Some(pole) = self.pole {
            // d^l_mn(0) = delta_{m,n}, d^l_mn(pi) = (-1)^(l+m) delta_{m,-n}
            let value = match pole {
                Pole::North if self.m == self.n => 1.0,
                Pole::South if self.m == -self.n => {
                    if (self.ell as i64 + self.m as i64).rem_euclid(2) == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                _ => 0.0,
            };
            self.ell += 1;
            return Some(value);
        }
        let out = self.current;
        let l = self.ell as f64;
        let l1 = l + 1.0;
        let (m, n) = (self.m, self.n);
        let denom = ((l1 * l1 - m * m) * (l1 * l1 - n * n)).sqrt();
        let next = if self.ell == 0 {
            // m = n = 0: d^1_00 = cos(theta) * d^0_00
            self.cos_theta * self.current
        } else {
            let a = l1 * (2.0 * l + 1.0) / denom * (self.cos_theta - m * n / (l * l1));
            let b = l1 * ((l * l - m * m) * (l * l - n * n)).sqrt() / (l * denom);
            a * self.current - b * self.previous
        };
        self.previous = self.current;
        self.current = next;
        self.ell += 1;
        Some(out)
    }
}

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `d^j_{mn}(theta)` at `j = max(|m|, |n|)`, where Wigner's sum has one term.
fn lowest_degree_value(j: i64, m: i64, n: i64, theta: f64) -> f64 {
    // Summation index range for d^j_{m n}:
    //   k >= 0, k >= n - m, k <= j + n, k <= j - m
    let k = 0.max(n - m);
    debug_assert_eq!(k, (j + n).min(j - m));
    let cos_power = 2 * j + n - m - 2 * k;
    let sin_power = m - n + 2 * k;
    let (half_sin, half_cos) = (0.5 * theta).sin_cos();
    if (cos_power > 0 && half_cos == 0.0) || (sin_power > 0 && half_sin == 0.0) {
        return 0.0;
    }
    let ln_norm = 0.5
        * (ln_factorial(j + m) + ln_factorial(j - m) + ln_factorial(j + n) + ln_factorial(j - n))
        - (ln_factorial(j + n - k) + ln_factorial(k) + ln_factorial(m - n + k) + ln_factorial(j - m - k));
    let mut ln_value = ln_norm;
    if cos_power > 0 {
        ln_value += cos_power as f64 * half_cos.abs().ln();
    }
    if sin_power > 0 {
        ln_value += sin_power as f64 * half_sin.abs().ln();
    }
    let negative = (m - n + k).rem_euclid(2) == 1;
    let value = ln_value.exp();
    if negative {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn factorial(n: i64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Wigner's explicit finite sum, used as an oracle for small degrees.
    fn wigner_sum(j: i64, mp: i64, m: i64, beta: f64) -> f64 {
        let (s, c) = (0.5 * beta).sin_cos();
        let norm = (factorial(j + mp) * factorial(j - mp) * factorial(j + m) * factorial(j - m)).sqrt();
        let mut total = 0.0;
        for k in 0..=2 * j {
            if j + m - k < 0 || mp - m + k < 0 || j - mp - k < 0 {
                continue;
            }
            let sign = if (mp - m + k) % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * norm
                / (factorial(j + m - k) * factorial(k) * factorial(mp - m + k) * factorial(j - mp - k))
                * c.powi((2 * j + m - mp - 2 * k) as i32)
                * s.powi((mp - m + 2 * k) as i32);
        }
        total
    }

    /// `Y_lm` from an associated Legendre recursion with Condon–Shortley phase.
    fn classical_ylm(ell: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
        let mabs = m.unsigned_abs() as usize;
        let x = theta.cos();
        let somx2 = (1.0 - x * x).sqrt();
        let mut pmm = 1.0;
        let mut fact = 1.0;
        for _ in 0..mabs {
            pmm *= -fact * somx2;
            fact += 2.0;
        }
        let plm = if ell == mabs {
            pmm
        } else {
            let mut pmmp1 = x * (2 * mabs + 1) as f64 * pmm;
            if ell == mabs + 1 {
                pmmp1
            } else {
                let mut pll = 0.0;
                for l in mabs + 2..=ell {
                    pll = (x * (2 * l - 1) as f64 * pmmp1 - (l + mabs - 1) as f64 * pmm) / (l - mabs) as f64;
                    pmm = pmmp1;
                    pmmp1 = pll;
                }
                pll
            }
        };
        let norm = ((2 * ell + 1) as f64 / (4.0 * PI) * factorial((ell - mabs) as i64)
            / factorial((ell + mabs) as i64))
        .sqrt();
        let positive = Complex64::from_polar(norm * plm, mabs as f64 * phi);
        if m >= 0 {
            positive
        } else {
            let sign = if mabs % 2 == 0 { 1.0 } else { -1.0 };
            positive.conj() * sign
        }
    }

    #[test]
    fn degree_zero_is_one() {
        for theta in [0.0, 0.3, PI / 2.0, PI] {
            let t = wigner_d(0, theta).unwrap();
            assert_eq!(t.entries(), &[1.0]);
        }
    }

    #[test]
    fn zero_angle_is_identity() {
        for ell in 0..6 {
            let t = wigner_d(ell, 0.0).unwrap();
            let l = ell as i32;
            for m in -l..=l {
                for n in -l..=l {
                    assert_eq!(t.get(m, n), if m == n { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn degree_one_matches_rotation_matrix() {
        // Spherical basis vectors e_{+1}, e_0, e_{-1} and a rotation about y.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let basis = |m: i32| -> [Complex64; 3] {
            match m {
                1 => [Complex64::new(-r, 0.0), Complex64::new(0.0, -r), Complex64::new(0.0, 0.0)],
                0 => [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                _ => [Complex64::new(r, 0.0), Complex64::new(0.0, -r), Complex64::new(0.0, 0.0)],
            }
        };
        for &beta in &[0.0, 0.4, PI / 2.0, 2.5, PI] {
            let (s, c) = beta.sin_cos();
            let rot = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]];
            let table = wigner_d(1, beta).unwrap();
            for mp in -1..=1 {
                for m in -1..=1 {
                    let v = basis(m);
                    let rv: Vec<Complex64> = (0..3)
                        .map(|i| (0..3).map(|k| v[k] * rot[i][k]).sum())
                        .collect();
                    let w = basis(mp);
                    let expected: Complex64 = (0..3).map(|i| w[i].conj() * rv[i]).sum();
                    assert_abs_diff_eq!(expected.im, 0.0, epsilon = 1e-15);
                    assert_abs_diff_eq!(table.get(mp, m), expected.re, epsilon = 1e-15);
                }
            }
        }
        let t = wigner_d(1, PI / 2.0).unwrap();
        assert_abs_diff_eq!(t.get(0, 0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(t.get(1, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(1, -1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for ell in 0..=12i64 {
            for &theta in &[0.0, 0.1, 0.7, 1.57, 2.2, 3.0, PI] {
                let table = wigner_d(ell as usize, theta).unwrap();
                for m in -ell..=ell {
                    for n in -ell..=ell {
                        let expected = wigner_sum(ell, m, n, theta);
                        assert_abs_diff_eq!(table.get(m as i32, n as i32), expected, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn tables_are_orthogonal_and_symmetric() {
        for ell in [1usize, 5, 17, 40, 64] {
            for &theta in &[0.0, 0.05, 1.1, 2.9, PI] {
                let t = wigner_d(ell, theta).unwrap();
                let dim = t.dim();
                let e = t.entries();
                for i in 0..dim {
                    for k in 0..dim {
                        let dot: f64 = (0..dim).map(|j| e[i * dim + j] * e[k * dim + j]).sum();
                        let target = if i == k { 1.0 } else { 0.0 };
                        assert!((dot - target).abs() < 1e-12, "l={ell} theta={theta} ({i},{k}) {dot}");
                    }
                }
                let l = ell as i32;
                for m in -l..=l {
                    for n in -l..=l {
                        let sign = if (m - n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        assert_abs_diff_eq!(t.get(m, n), sign * t.get(n, m), epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn monopole_is_constant() {
        for &(theta, phi) in &[(0.0, 0.0), (1.0, 2.0), (PI, 5.0)] {
            let y = spin_ylm(0, 0, 0, theta, phi).unwrap();
            assert_abs_diff_eq!(y.re, 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
            assert_eq!(y.im, 0.0);
        }
    }

    #[test]
    fn spin_zero_matches_legendre_oracle() {
        for ell in 0..=4usize {
            let l = ell as i32;
            for m in -l..=l {
                for &(theta, phi) in &[(0.0, 0.3), (0.4, 1.1), (1.9, -2.0), (2.8, 4.0), (PI, 0.7)] {
                    let got = spin_ylm(0, ell, m, theta, phi).unwrap();
                    let want = classical_ylm(ell, m, theta, phi);
                    assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-14);
                    assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(matches!(spin_ylm(2, 1, 0, 0.3, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(spin_ylm(0, 2, 3, 0.3, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(spin_ylm(0, 2, 0, -0.1, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            spin_ylm(0, 513, 0, 0.3, 0.0),
            Err(Error::BandLimitExceeded { .. })
        ));
        let small = HarmonicConfig { max_ell: 8 };
        assert!(small.wigner_d(9, 0.1).is_err());
        assert!(small.wigner_d(8, 0.1).is_ok());
    }

    #[test]
    fn parity_examples() {
        let phi = 0.9;
        let y10 = spin_ylm(0, 1, 0, PI / 4.0, phi).unwrap();
        let p = parity_transform(0, 1, 0, PI / 4.0, phi).unwrap();
        assert_abs_diff_eq!(p.re, -y10.re, epsilon = 1e-15);
        for m in -2..=2 {
            let direct = spin_ylm(0, 2, m, PI - 0.6, phi + PI).unwrap();
            let via = parity_transform(0, 2, m, 0.6, phi).unwrap();
            let orig = spin_ylm(0, 2, m, 0.6, phi).unwrap();
            assert!((direct - via).norm() < 1e-14);
            assert!((via - orig).norm() < 1e-14);
            let s2 = parity_transform(2, 2, m, 0.6, phi).unwrap();
            assert!((s2 - spin_ylm(-2, 2, m, 0.6, phi).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn real_harmonic_branches() {
        let (theta, phi) = (1.2, 0.4);
        for ell in 0..=5usize {
            let l = ell as i32;
            let y0 = spin_ylm(0, ell, 0, theta, phi).unwrap();
            assert_abs_diff_eq!(real_ylm(ell, 0, theta, phi).unwrap(), y0.re, epsilon = 1e-15);
            for m in 1..=l {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let want = (spin_ylm(0, ell, m, theta, phi).unwrap()
                    + spin_ylm(0, ell, -m, theta, phi).unwrap() * sign)
                    / 2f64.sqrt();
                assert_abs_diff_eq!(want.im, 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(real_ylm(ell, m, theta, phi).unwrap(), want.re, epsilon = 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(ell in 0usize..20, mfrac in 0.0f64..1.0, theta in 0.0f64..PI, phi in 0.0f64..6.3) {
            let m = (mfrac * (ell as f64 + 0.999)) as i32;
            let a = spin_ylm(0, ell, -m, theta, phi).unwrap();
            let b = spin_ylm(0, ell, m, theta, phi).unwrap().conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - b).norm() <= 1e-14);
        }

        #[test]
        fn parity_law_pointwise(spin in -3i32..=3, extra in 0usize..14, mfrac in 0.0f64..1.0, theta in 0.0f64..PI, phi in 0.0f64..6.3) {
            let ell = spin.unsigned_abs() as usize + extra;
            let l = ell as i32;
            let m = -l + (mfrac * (2 * l + 1) as f64).floor().min((2 * l) as f64) as i32;
            let lhs = spin_ylm(spin, ell, m, PI - theta, phi + PI).unwrap();
            let rhs = parity_transform(spin, ell, m, theta, phi).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }
}
