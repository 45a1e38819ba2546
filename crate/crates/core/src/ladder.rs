//! Spin raising and lowering operators acting on harmonic coefficients, and
//! the weak-lensing distortion fields built from them.
//!
//! Both operators are diagonal in `(l, m)`:
//!
//! ```text
//! ð  sY_lm = sqrt((l - s)(l + s + 1)) s+1Y_lm
//! ð* sY_lm = sqrt((l + s)(l - s + 1)) s-1Y_lm
//! ```
//!
//! so `ð*` is the adjoint of `ð` for the quadrature inner product.

use num_complex::Complex64;

use crate::transform::HarmonicCoefficients;

/// Ladder factors at degree `ell` for spin `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderCoefficient {
    pub ell: usize,
    pub s: i32,
    pub raise_factor: f64,
    pub lower_factor: f64,
}

impl LadderCoefficient {
    pub fn new(ell: usize, s: i32) -> Self {
        Self {
            ell,
            s,
            raise_factor: raise_factor(ell, s),
            lower_factor: lower_factor(ell, s),
        }
    }
}

fn raise_radicand(ell: usize, s: i32) -> (u128, u128) {
    let (l, s) = (ell as i64, s as i64);
    if l < s.abs() {
        return (0, 0);
    }
    ((l - s) as u128, (l + s + 1) as u128)
}

fn lower_radicand(ell: usize, s: i32) -> (u128, u128) {
    let (l, s) = (ell as i64, s as i64);
    if l < s.abs() {
        return (0, 0);
    }
    ((l + s) as u128, (l - s + 1) as u128)
}

/// `sqrt((l - s)(l + s + 1))`, zero for `l < |s|`.
pub fn raise_factor(ell: usize, s: i32) -> f64 {
    let (a, b) = raise_radicand(ell, s);
    ((a * b) as f64).sqrt()
}

/// `sqrt((l + s)(l - s + 1))`, zero for `l < |s|`.
pub fn lower_factor(ell: usize, s: i32) -> f64 {
    let (a, b) = lower_radicand(ell, s);
    ((a * b) as f64).sqrt()
}

fn apply(coeffs: &HarmonicCoefficients, new_spin: i32, factor: impl Fn(usize) -> f64) -> HarmonicCoefficients {
    HarmonicCoefficients::from_fn(new_spin, coeffs.lmax(), |ell, m| coeffs.get(ell, m) * factor(ell))
}

/// Spectral `ð`: spin `s` to `s + 1`.
pub fn eth_raise(coeffs: &HarmonicCoefficients) -> HarmonicCoefficients {
    let s = coeffs.spin();
    apply(coeffs, s + 1, |ell| raise_factor(ell, s))
}

/// Spectral `ð*`: spin `s` to `s - 1`.
pub fn eth_lower(coeffs: &HarmonicCoefficients) -> HarmonicCoefficients {
    let s = coeffs.spin();
    apply(coeffs, s - 1, |ell| lower_factor(ell, s))
}

/// One letter of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eth {
    Raise,
    Lower,
}

/// A weighted sum of operator words. Each word is written left to right as
/// in operator notation and applied right to left.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorString {
    pub weight: f64,
    pub words: Vec<Vec<Eth>>,
}

impl OperatorString {
    fn new(weight: f64, words: &[&[Eth]]) -> Self {
        Self {
            weight,
            words: words.iter().map(|w| w.to_vec()).collect(),
        }
    }

    /// Spin change produced by every word.
    pub fn spin_shift(&self) -> i32 {
        self.words[0]
            .iter()
            .map(|e| match e {
                Eth::Raise => 1,
                Eth::Lower => -1,
            })
            .sum()
    }

    /// Scalar multiplier of the operator on spin-`s` harmonics of degree `ell`.
    ///
    /// The integer radicands of each word are multiplied before a single
    /// square root, so integral multipliers come out exact.
    pub fn multiplier(&self, ell: usize, s: i32) -> f64 {
        let total: f64 = self
            .words
            .iter()
            .map(|word| {
                let mut spin = s;
                let mut radicand: u128 = 1;
                for e in word.iter().rev() {
                    let (a, b) = match e {
                        Eth::Raise => raise_radicand(ell, spin),
                        Eth::Lower => lower_radicand(ell, spin),
                    };
                    radicand *= a * b;
                    spin += match e {
                        Eth::Raise => 1,
                        Eth::Lower => -1,
                    };
                }
                (radicand as f64).sqrt()
            })
            .sum();
        // + 0.0 turns -0 into 0
        self.weight * total + 0.0
    }

    /// Applies each word through [`eth_raise`] / [`eth_lower`], sums, then scales.
    pub fn apply(&self, coeffs: &HarmonicCoefficients) -> HarmonicCoefficients {
        let out_spin = coeffs.spin() + self.spin_shift();
        let mut sum = HarmonicCoefficients::zeros(out_spin, coeffs.lmax());
        for word in &self.words {
            let mut c = coeffs.clone();
            for e in word.iter().rev() {
                c = match e {
                    Eth::Raise => eth_raise(&c),
                    Eth::Lower => eth_lower(&c),
                };
            }
            sum = HarmonicCoefficients::from_fn(out_spin, coeffs.lmax(), |l, m| sum.get(l, m) + c.get(l, m));
        }
        let w = Complex64::new(self.weight, 0.0);
        HarmonicCoefficients::from_fn(out_spin, coeffs.lmax(), |l, m| sum.get(l, m) * w)
    }
}

use Eth::{Lower as L, Raise as R};

/// `κ = ¼(ðð* + ð*ð)φ`
pub fn magnification_operator() -> OperatorString {
    OperatorString::new(0.25, &[&[R, L], &[L, R]])
}

/// `F = -⅙(ð*ðð + ðð*ð + ððð*)φ`
pub fn first_flexion_operator() -> OperatorString {
    OperatorString::new(-1.0 / 6.0, &[&[L, R, R], &[R, L, R], &[R, R, L]])
}

/// `γ = ½ð²φ`
pub fn shear_operator() -> OperatorString {
    OperatorString::new(0.5, &[&[R, R]])
}

/// `G = -½ð³φ`
pub fn third_flexion_operator() -> OperatorString {
    OperatorString::new(-0.5, &[&[R, R, R]])
}

/// Multipliers taking `φ_lm` to the distortion-field coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionMultipliers {
    pub ell: usize,
    pub kappa: f64,
    pub flexion1: f64,
    pub shear: f64,
    pub flexion3: f64,
}

pub fn distortion_multipliers(ell: usize) -> DistortionMultipliers {
    DistortionMultipliers {
        ell,
        kappa: magnification_operator().multiplier(ell, 0),
        flexion1: first_flexion_operator().multiplier(ell, 0),
        shear: shear_operator().multiplier(ell, 0),
        flexion3: third_flexion_operator().multiplier(ell, 0),
    }
}

/// Coefficients of `₀κ`, `₁F`, `₂γ`, `₃G`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionFields {
    pub kappa: HarmonicCoefficients,
    pub flexion1: HarmonicCoefficients,
    pub shear: HarmonicCoefficients,
    pub flexion3: HarmonicCoefficients,
}

pub fn distortion_fields(phi: &HarmonicCoefficients) -> crate::Result<DistortionFields> {
    if phi.spin() != 0 {
        return Err(crate::Error::invalid(format!(
            "lensing potential must be spin 0, got spin {}",
            phi.spin()
        )));
    }
    let lmax = phi.lmax();
    let table: Vec<DistortionMultipliers> = (0..=lmax).map(distortion_multipliers).collect();
    let field = |spin: i32, pick: fn(&DistortionMultipliers) -> f64| {
        HarmonicCoefficients::from_fn(spin, lmax, |ell, m| phi.get(ell, m) * pick(&table[ell]))
    };
    Ok(DistortionFields {
        kappa: field(0, |d| d.kappa),
        flexion1: field(1, |d| d.flexion1),
        shear: field(2, |d| d.shear),
        flexion3: field(3, |d| d.flexion3),
    })
}
