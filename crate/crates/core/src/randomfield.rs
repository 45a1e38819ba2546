//! Isotropic Gaussian random sections on the sphere: scalar fields, spin-2
//! polarization with its E/B split, and the Stokes tensor bundle `(I, V, Q, U)`.
//!
//! Coefficients are drawn as `a_lm = A_l z_lm`, with `A_l` the (semi-definite)
//! Cholesky factor of the per-degree covariance `C_l` and `z_lm` a vector of
//! independent standard complex Gaussians, one entry per component. Real and
//! imaginary parts of `z_lm` have variance 1/2 each, so `E|a_lm|^2 = C_l` for
//! every `m`. Under the reality constraint `m = 0` is drawn real with unit
//! variance and negative orders are mirrored with `a_{l,-m} = (-1)^m conj(a_lm)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::cholesky_psd;
use crate::parallel::map_indexed;
use crate::rng::{self, Domain, StreamKey};
use crate::transform::{analyze, synthesize, HarmonicCoefficients, SphereGrid, SphereMap};

/// Behaviour of a component under the parity transformation `n -> -n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// One field component of a spectrum set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub parity: Parity,
    /// Lowest degree at which the component may carry power.
    pub min_ell: usize,
}

impl Component {
    pub fn new(name: impl Into<String>, parity: Parity, min_ell: usize) -> Self {
        Self {
            name: name.into(),
            parity,
            min_ell,
        }
    }

    /// Known Stokes/polarization names get their parity and lowest degree:
    /// `I`/`T` even from 0, `V` odd from 0, `E` even from 2, `B` odd from 2.
    /// Anything else is an even scalar starting at 0.
    pub fn named(name: &str) -> Self {
        match name {
            "I" | "T" => Self::new(name, Parity::Even, 0),
            "V" => Self::new(name, Parity::Odd, 0),
            "E" => Self::new(name, Parity::Even, 2),
            "B" => Self::new(name, Parity::Odd, 2),
            _ => Self::new(name, Parity::Even, 0),
        }
    }
}

/// Per-degree covariance matrices `C_l` over a list of components.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpectrumSet {
    components: Vec<Component>,
    lmax: usize,
    matrices: Vec<Vec<f64>>,
    allow_parity_mixing: bool,
}

impl PowerSpectrumSet {
    pub fn zeros(components: Vec<Component>, lmax: usize) -> Self {
        let n = components.len();
        Self {
            components,
            lmax,
            matrices: vec![vec![0.0; n * n]; lmax + 1],
            allow_parity_mixing: false,
        }
    }

    /// Single-component spectrum from `C_0..=C_lmax`.
    pub fn scalar(name: &str, cl: &[f64]) -> Result<Self> {
        if cl.is_empty() {
            return Err(Error::invalid("empty spectrum"));
        }
        let mut out = Self::zeros(vec![Component::named(name)], cl.len() - 1);
        for (ell, &c) in cl.iter().enumerate() {
            out.matrices[ell][0] = c;
        }
        Ok(out)
    }

    /// Permits cross-spectra between components of opposite parity.
    pub fn with_parity_mixing(mut self, allow: bool) -> Self {
        self.allow_parity_mixing = allow;
        self
    }

    pub fn allows_parity_mixing(&self) -> bool {
        self.allow_parity_mixing
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_names(&self) -> Vec<&str> {
        self.components.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn get(&self, ell: usize, i: usize, j: usize) -> f64 {
        self.matrices[ell][i * self.n_components() + j]
    }

    /// Sets `C_l[i][j]` and `C_l[j][i]`.
    pub fn set(&mut self, ell: usize, i: usize, j: usize, value: f64) -> Result<()> {
        let n = self.n_components();
        if ell > self.lmax || i >= n || j >= n {
            return Err(Error::invalid(format!("spectrum entry ({ell},{i},{j}) out of range")));
        }
        self.matrices[ell][i * n + j] = value;
        self.matrices[ell][j * n + i] = value;
        Ok(())
    }

    /// Same spectrum cut at, or padded with zeros up to, `lmax`.
    pub fn truncated(&self, lmax: usize) -> Self {
        let n = self.n_components();
        let mut matrices = self.matrices.clone();
        matrices.resize(lmax + 1, vec![0.0; n * n]);
        Self {
            components: self.components.clone(),
            lmax,
            matrices,
            allow_parity_mixing: self.allow_parity_mixing,
        }
    }

    /// Row-major `C_l`.
    pub fn matrix(&self, ell: usize) -> &[f64] {
        &self.matrices[ell]
    }

    /// `sum_l (2l+1) tr C_l`, the variance carried up to the truncation degree.
    pub fn summability(&self) -> f64 {
        let n = self.n_components();
        (0..=self.lmax)
            .map(|ell| (2 * ell + 1) as f64 * (0..n).map(|i| self.get(ell, i, i)).sum::<f64>())
            .sum()
    }

    /// Checks every invariant and returns the per-degree Cholesky factors.
    pub fn validate(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.n_components();
        let mut factors = Vec::with_capacity(self.lmax + 1);
        for ell in 0..=self.lmax {
            let c = &self.matrices[ell];
            for i in 0..n {
                for j in 0..n {
                    let v = c[i * n + j];
                    if !v.is_finite() {
                        return Err(Error::SpectrumInvalid {
                            ell,
                            reason: format!("non-finite entry at ({i},{j})"),
                        });
                    }
                    if v != c[j * n + i] {
                        return Err(Error::SpectrumInvalid {
                            ell,
                            reason: format!("asymmetric entry at ({i},{j})"),
                        });
                    }
                    if v == 0.0 {
                        continue;
                    }
                    let (a, b) = (&self.components[i], &self.components[j]);
                    if ell < a.min_ell || ell < b.min_ell {
                        let inactive = if ell < a.min_ell { a } else { b };
                        return Err(Error::SpectrumInvalid {
                            ell,
                            reason: format!("component {} has no support below l={}", inactive.name, inactive.min_ell),
                        });
                    }
                    if i != j && a.parity != b.parity && !self.allow_parity_mixing {
                        return Err(Error::SpectrumInvalid {
                            ell,
                            reason: format!("cross-spectrum {}-{} mixes parities", a.name, b.name),
                        });
                    }
                }
            }
            let factor = cholesky_psd(c, n).map_err(|reason| Error::SpectrumInvalid {
                ell,
                reason: format!("not positive semi-definite: {reason}"),
            })?;
            factors.push(factor);
        }
        Ok(factors)
    }
}

/// Sampled coefficients, one spin-0-indexed set per component.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSample {
    pub names: Vec<String>,
    pub components: Vec<HarmonicCoefficients>,
    pub seed: u64,
    pub reality_constrained: bool,
}

impl CoefficientSample {
    pub fn get(&self, name: &str) -> Option<&HarmonicCoefficients> {
        self.names.iter().position(|n| n == name).map(|i| &self.components[i])
    }
}

/// Draws `a_lm` with covariance `C_l` across components.
///
/// Each standard normal comes from a stream keyed by
/// `(seed, component, l, m)`, so the sample does not depend on thread count.
pub fn sample_coefficients(spec: &PowerSpectrumSet, seed: u64, reality_constrained: bool) -> Result<CoefficientSample> {
    let factors = spec.validate()?;
    let n = spec.n_components();
    let lmax = spec.lmax();

    // per_degree[l][k] = coefficients of component k at degree l, m = -l..=l
    let per_degree = map_indexed(lmax + 1, |ell| {
        let l = ell as i32;
        let a = &factors[ell];
        let mut out = vec![vec![Complex64::new(0.0, 0.0); 2 * ell + 1]; n];
        let m_start = if reality_constrained { 0 } else { -l };
        for m in m_start..=l {
            let z: Vec<Complex64> = (0..n)
                .map(|k| {
                    let mut r = rng::stream(
                        seed,
                        Domain::SphereCoefficients,
                        StreamKey {
                            index: k as u32,
                            ell: ell as u32,
                            m,
                        },
                    );
                    if reality_constrained && m == 0 {
                        Complex64::new(rng::standard_normal(&mut r), 0.0)
                    } else {
                        rng::standard_complex_normal(&mut r)
                    }
                })
                .collect();
            for i in 0..n {
                let v: Complex64 = (0..=i).map(|k| z[k] * a[i * n + k]).sum();
                out[i][(m + l) as usize] = v;
            }
        }
        if reality_constrained {
            for row in out.iter_mut() {
                for m in 1..=l {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    row[(l - m) as usize] = row[(l + m) as usize].conj() * sign;
                }
            }
        }
        out
    });

    let components = (0..n)
        .map(|k| {
            HarmonicCoefficients::from_fn(0, lmax, |ell, m| per_degree[ell][k][(m + ell as i32) as usize])
        })
        .collect();
    Ok(CoefficientSample {
        names: spec.component_names().into_iter().map(String::from).collect(),
        components,
        seed,
        reality_constrained,
    })
}

fn single_component(spec: &PowerSpectrumSet) -> Result<()> {
    if spec.n_components() != 1 {
        return Err(Error::invalid(format!(
            "expected a single-component spectrum, got {}",
            spec.n_components()
        )));
    }
    Ok(())
}

/// Scalar field `sum a_lm Y_lm` on the grid.
///
/// With `real` set the coefficients satisfy the reality condition exactly and
/// the imaginary part of the returned map is rounding noise. Use
/// [`crate::transform::synthesize_real`] to obtain a real-valued array.
pub fn sample_scalar_field(spec: &PowerSpectrumSet, grid: &SphereGrid, seed: u64, real: bool) -> Result<SphereMap> {
    single_component(spec)?;
    let sample = sample_coefficients(spec, seed, real)?;
    synthesize(&sample.components[0], grid)
}

/// Spin-`s` field whose coefficients have `E|a_lm|^2 = C_l`.
pub fn sample_spin_field(spec: &PowerSpectrumSet, grid: &SphereGrid, seed: u64, spin: i32) -> Result<(HarmonicCoefficients, SphereMap)> {
    single_component(spec)?;
    let min_ell = spin.unsigned_abs() as usize;
    for ell in 0..min_ell.min(spec.lmax() + 1) {
        if spec.get(ell, 0, 0) != 0.0 {
            return Err(Error::SpectrumInvalid {
                ell,
                reason: format!("spin {spin} field has no degree below {min_ell}"),
            });
        }
    }
    let sample = sample_coefficients(spec, seed, false)?;
    let coeffs = sample.components[0].relabel(spin, spec.lmax());
    let map = synthesize(&coeffs, grid)?;
    Ok((coeffs, map))
}

fn check_polarization_support(c: &HarmonicCoefficients, label: &str) -> Result<()> {
    if c.spin() != 0 {
        return Err(Error::invalid(format!("{label} coefficients must be spin-0 indexed")));
    }
    for ell in 0..2.min(c.lmax() + 1) {
        for m in -(ell as i32)..=ell as i32 {
            if c.get(ell, m) != Complex64::new(0.0, 0.0) {
                return Err(Error::invalid(format!("{label} has support at l={ell} < 2")));
            }
        }
    }
    Ok(())
}

/// `a^(±2)_lm = e_lm ± i b_lm`.
pub fn eb_to_qu(e: &HarmonicCoefficients, b: &HarmonicCoefficients) -> Result<(HarmonicCoefficients, HarmonicCoefficients)> {
    check_polarization_support(e, "e")?;
    check_polarization_support(b, "b")?;
    if e.lmax() != b.lmax() {
        return Err(Error::invalid("e and b band limits differ"));
    }
    let i = Complex64::new(0.0, 1.0);
    let plus = HarmonicCoefficients::from_fn(2, e.lmax(), |l, m| e.get(l, m) + i * b.get(l, m));
    let minus = HarmonicCoefficients::from_fn(-2, e.lmax(), |l, m| e.get(l, m) - i * b.get(l, m));
    Ok((plus, minus))
}

/// `e = (a+ + a-)/2`, `b = (a+ - a-)/(2i)`.
pub fn qu_to_eb(plus: &HarmonicCoefficients, minus: &HarmonicCoefficients) -> Result<(HarmonicCoefficients, HarmonicCoefficients)> {
    if plus.spin() != 2 || minus.spin() != -2 {
        return Err(Error::invalid(format!(
            "expected spins (2, -2), got ({}, {})",
            plus.spin(),
            minus.spin()
        )));
    }
    if plus.lmax() != minus.lmax() {
        return Err(Error::invalid("spin +2 and -2 band limits differ"));
    }
    let half_i = Complex64::new(0.0, 0.5);
    let e = HarmonicCoefficients::from_fn(0, plus.lmax(), |l, m| {
        if l < 2 {
            return Complex64::new(0.0, 0.0);
        }
        (plus.get(l, m) + minus.get(l, m)) * 0.5
    });
    let b = HarmonicCoefficients::from_fn(0, plus.lmax(), |l, m| {
        if l < 2 {
            return Complex64::new(0.0, 0.0);
        }
        -half_i * (plus.get(l, m) - minus.get(l, m))
    });
    Ok((e, b))
}

/// Coefficients of `(Q ± iU)(-n)`: the spin ±2 pair maps to
/// `((-1)^l a-, (-1)^l a+)`.
pub fn polarization_parity(plus: &HarmonicCoefficients, minus: &HarmonicCoefficients) -> Result<(HarmonicCoefficients, HarmonicCoefficients)> {
    if plus.spin() != 2 || minus.spin() != -2 || plus.lmax() != minus.lmax() {
        return Err(Error::invalid("expected a spin (2, -2) pair with equal band limits"));
    }
    let sign = |l: usize| if l % 2 == 0 { 1.0 } else { -1.0 };
    let new_plus = HarmonicCoefficients::from_fn(2, plus.lmax(), |l, m| minus.get(l, m) * sign(l));
    let new_minus = HarmonicCoefficients::from_fn(-2, plus.lmax(), |l, m| plus.get(l, m) * sign(l));
    Ok((new_plus, new_minus))
}

/// Real Stokes maps on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesMaps {
    pub grid: SphereGrid,
    pub i: Vec<f64>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
}

impl StokesMaps {
    /// Symmetric trace-free linear-polarization tensor `[[Q, U], [U, -Q]]` at node `k`.
    pub fn polarization_tensor(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.q[k], self.u[k]], [self.u[k], -self.q[k]]]
    }
}

/// Result of [`sample_stokes_bundle`].
#[derive(Clone, Debug)]
pub struct StokesSample {
    pub coefficients: CoefficientSample,
    pub plus: HarmonicCoefficients,
    pub minus: HarmonicCoefficients,
    pub maps: StokesMaps,
}

const STOKES_NAMES: [&str; 4] = ["I", "V", "E", "B"];

/// Samples the reducible bundle with scalar `I`, pseudo-scalar `V` and the
/// spin-2 `(E, B)` pair, and returns real `I, V, Q, U` maps.
///
/// Components missing from `spec` are identically zero.
pub fn sample_stokes_bundle(spec: &PowerSpectrumSet, grid: &SphereGrid, seed: u64) -> Result<StokesSample> {
    for c in spec.components() {
        if !STOKES_NAMES.contains(&c.name.as_str()) {
            return Err(Error::invalid(format!("unknown Stokes component {}", c.name)));
        }
        let expected = Component::named(&c.name);
        if c.parity != expected.parity || c.min_ell != expected.min_ell {
            return Err(Error::invalid(format!("component {} has non-standard parity or support", c.name)));
        }
    }
    let sample = sample_coefficients(spec, seed, true)?;
    let lmax = spec.lmax();
    let zero = HarmonicCoefficients::zeros(0, lmax);
    let pick = |name: &str| sample.get(name).cloned().unwrap_or_else(|| zero.clone());
    let (e, b) = (pick("E"), pick("B"));
    let (plus, minus) = eb_to_qu(&e, &b)?;
    let polarization = synthesize(&plus, grid)?;
    let maps = StokesMaps {
        grid: grid.clone(),
        i: synthesize(&pick("I"), grid)?.real_part(),
        v: synthesize(&pick("V"), grid)?.real_part(),
        q: polarization.real_part(),
        u: polarization.imag_part(),
    };
    Ok(StokesSample {
        coefficients: sample,
        plus,
        minus,
        maps,
    })
}

/// E and B coefficients of real `Q, U` maps.
pub fn analyze_qu(q: &[f64], u: &[f64], grid: &SphereGrid, lmax: usize) -> Result<(HarmonicCoefficients, HarmonicCoefficients)> {
    if q.len() != grid.len() || u.len() != grid.len() {
        return Err(Error::invalid("Q/U arrays do not match the grid"));
    }
    let plus_values = q.iter().zip(u).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let minus_values = q.iter().zip(u).map(|(&a, &b)| Complex64::new(a, -b)).collect();
    let plus = analyze(&SphereMap::new(grid.clone(), 2, plus_values)?, lmax)?;
    let minus = analyze(&SphereMap::new(grid.clone(), -2, minus_values)?, lmax)?;
    qu_to_eb(&plus, &minus)
}

/// `Ĉ_l^{ij} = (2l+1)^{-1} sum_m Re(a^i_lm conj(a^j_lm))`.
///
/// The result permits parity mixing, since empirical cross-spectra between
/// opposite-parity components are noise rather than invalid input.
pub fn estimate_power_spectrum(components: Vec<Component>, coeffs: &[HarmonicCoefficients]) -> Result<PowerSpectrumSet> {
    if components.len() != coeffs.len() || coeffs.is_empty() {
        return Err(Error::invalid("need one coefficient set per component"));
    }
    let lmax = coeffs[0].lmax();
    if coeffs.iter().any(|c| c.lmax() != lmax) {
        return Err(Error::invalid("coefficient sets have different band limits"));
    }
    let n = coeffs.len();
    let mut out = PowerSpectrumSet::zeros(components, lmax).with_parity_mixing(true);
    for ell in 0..=lmax {
        let l = ell as i32;
        for i in 0..n {
            for j in i..n {
                let sum: f64 = (-l..=l)
                    .map(|m| (coeffs[i].get(ell, m) * coeffs[j].get(ell, m).conj()).re)
                    .sum();
                out.set(ell, i, j, sum / (2 * ell + 1) as f64)?;
            }
        }
    }
    Ok(out)
}
