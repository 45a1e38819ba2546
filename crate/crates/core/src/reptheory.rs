//! Irreducible representations of SO(2), O(2), SO(3) and O(3), handled
//! symbolically by label.
//!
//! O(2) irreps are `E0+` (trivial), `E0-` (determinant) and the
//! two-dimensional `E^m`, `m >= 1`, with rotations `[[cos mφ, -sin mφ], [sin mφ, cos mφ]]`
//! and the reflection `diag(1, -1)`. O(3) irreps are `V^{l±} = V^l ⊗ V^±`,
//! where `±` is the action of the central inversion `-I`.
//!
//! O(2) sits inside O(3) as the stabiliser of the north pole: rotations about
//! the z axis and reflections in planes through it. A reflection equals
//! `-I` times a rotation by π about a horizontal axis.
//!
//! Text forms: `e(m)` for SO(2), `E0+`, `E0-`, `E3` for O(2), `V(l=3)` for
//! SO(3) and `V(l=3,parity=-)` for O(3). Decompositions print as
//! `E0+ + E1 + 2 E2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    SO2,
    O2,
    SO3,
    O3,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::SO2 => "SO2",
            Group::O2 => "O2",
            Group::SO3 => "SO3",
            Group::O3 => "O3",
        };
        f.write_str(s)
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['(', ')'], "").as_str() {
            "SO2" => Ok(Group::SO2),
            "O2" => Ok(Group::O2),
            "SO3" => Ok(Group::SO3),
            "O3" => Ok(Group::O3),
            _ => Err(Error::InvalidLabel(format!("unknown group {s:?}"))),
        }
    }
}

/// Ground field of a representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            _ => Err(Error::invalid(format!("unknown field {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i32) -> Self {
        if v >= 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_value(self.value() * rhs.value())
    }
}

/// Irreducible representation label.
///
/// Over the reals an SO(2) label `e(m)` with `m != 0` stands for the
/// two-dimensional rotation representation, and `e(m)`, `e(-m)` coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IrrepLabel {
    SO2(i64),
    /// `E0+` or `E0-`.
    O2Zero(Sign),
    /// `E^m`, `m >= 1`.
    O2(u32),
    SO3(u32),
    O3(u32, Sign),
}

impl IrrepLabel {
    pub fn group(&self) -> Group {
        match self {
            IrrepLabel::SO2(_) => Group::SO2,
            IrrepLabel::O2Zero(_) | IrrepLabel::O2(_) => Group::O2,
            IrrepLabel::SO3(_) => Group::SO3,
            IrrepLabel::O3(..) => Group::O3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let IrrepLabel::O2(0) = self {
            return Err(Error::InvalidLabel("E0 needs a sign: E0+ or E0-".into()));
        }
        Ok(())
    }

    /// Dimension over the field the label naturally lives in (complex for SO(2)).
    pub fn dimension(&self) -> u64 {
        match *self {
            IrrepLabel::SO2(_) | IrrepLabel::O2Zero(_) => 1,
            IrrepLabel::O2(_) => 2,
            IrrepLabel::SO3(l) | IrrepLabel::O3(l, _) => 2 * l as u64 + 1,
        }
    }

    /// Real dimension of the real irreducible representation with this label.
    pub fn real_dimension(&self) -> u64 {
        match *self {
            IrrepLabel::SO2(0) => 1,
            IrrepLabel::SO2(_) => 2,
            _ => self.dimension(),
        }
    }

    /// Over the reals `e(-m)` is the same representation as `e(m)`.
    fn normalized(self, field: Field) -> Self {
        match (self, field) {
            (IrrepLabel::SO2(m), Field::Real) => IrrepLabel::SO2(m.abs()),
            _ => self,
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::SO2(m) => write!(f, "e({m})"),
            IrrepLabel::O2Zero(s) => write!(f, "E0{}", s.symbol()),
            IrrepLabel::O2(m) => write!(f, "E{m}"),
            IrrepLabel::SO3(l) => write!(f, "V(l={l})"),
            IrrepLabel::O3(l, s) => write!(f, "V(l={l},parity={})", s.symbol()),
        }
    }
}

fn parse_sign(s: &str) -> Option<Sign> {
    match s.trim() {
        "+" | "plus" | "+1" => Some(Sign::Plus),
        "-" | "minus" | "-1" | "−" => Some(Sign::Minus),
        _ => None,
    }
}

fn bad(s: &str) -> Error {
    Error::InvalidLabel(format!("cannot parse representation label {s:?}"))
}

impl FromStr for IrrepLabel {
    type Err = Error;

    /// Accepts `e(m)`, `E0+`, `E0-`, `E<m>`, `V(l=3)`, `V(3)`, `V3`,
    /// `V(l=3,parity=-)`, `V(3,-)` and `V3-`.
    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.replace('−', "-");
        if let Some(inner) = s.strip_prefix("e(").and_then(|r| r.strip_suffix(')')) {
            return inner.parse::<i64>().map(IrrepLabel::SO2).map_err(|_| bad(text));
        }
        if let Some(rest) = s.strip_prefix('E') {
            if let Some(sign) = rest.strip_prefix('0') {
                if sign.is_empty() {
                    return Err(bad(text));
                }
                return parse_sign(sign).map(IrrepLabel::O2Zero).ok_or_else(|| bad(text));
            }
            let m: u32 = rest.parse().map_err(|_| bad(text))?;
            return Ok(IrrepLabel::O2(m));
        }
        if let Some(rest) = s.strip_prefix('V') {
            let (l_part, sign_part) = if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
                let mut parts = inner.split(',');
                let l = parts.next().ok_or_else(|| bad(text))?;
                let sign = parts.next();
                if parts.next().is_some() {
                    return Err(bad(text));
                }
                let l = l.strip_prefix("l=").unwrap_or(l).to_string();
                let sign = sign.map(|p| p.strip_prefix("parity=").unwrap_or(p).to_string());
                (l, sign)
            } else {
                let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
                let tail = &rest[digits.len()..];
                (digits, if tail.is_empty() { None } else { Some(tail.to_string()) })
            };
            let l: u32 = l_part.parse().map_err(|_| bad(text))?;
            return match sign_part {
                None => Ok(IrrepLabel::SO3(l)),
                Some(p) => parse_sign(&p).map(|s| IrrepLabel::O3(l, s)).ok_or_else(|| bad(text)),
            };
        }
        Err(bad(text))
    }
}

/// Multiset of irreducible labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepDecomposition {
    terms: BTreeMap<IrrepLabel, u64>,
}

impl RepDecomposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(label: IrrepLabel) -> Self {
        let mut d = Self::new();
        d.add(label, 1);
        d
    }

    pub fn add(&mut self, label: IrrepLabel, multiplicity: u64) {
        if multiplicity > 0 {
            *self.terms.entry(label).or_insert(0) += multiplicity;
        }
    }

    pub fn extend(&mut self, other: &RepDecomposition) {
        for (&l, &n) in &other.terms {
            self.add(l, n);
        }
    }

    pub fn multiplicity(&self, label: &IrrepLabel) -> u64 {
        self.terms.get(label).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (IrrepLabel, u64)> + '_ {
        self.terms.iter().map(|(&l, &n)| (l, n))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dimension(&self) -> u64 {
        self.iter().map(|(l, n)| l.dimension() * n).sum()
    }

    /// Character of the direct sum.
    pub fn character(&self, g: GroupElement) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (l, n) in self.iter() {
            total += character(&l, g)? * n as f64;
        }
        Ok(total)
    }
}

impl FromIterator<IrrepLabel> for RepDecomposition {
    fn from_iter<I: IntoIterator<Item = IrrepLabel>>(iter: I) -> Self {
        let mut d = Self::new();
        for l in iter {
            d.add(l, 1);
        }
        d
    }
}

impl fmt::Display for RepDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (l, n) in self.iter() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if n > 1 {
                write!(f, "{n} ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for RepDecomposition {
    type Err = Error;

    /// Parses `E0+ + E1 + 2 E2`. A term is a label optionally preceded by a
    /// multiplicity. `0` is the empty sum.
    fn from_str(s: &str) -> Result<Self> {
        let mut d = Self::new();
        if s.trim() == "0" {
            return Ok(d);
        }
        for term in split_terms(s) {
            let term = term.trim();
            let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
            let (n, label) = if !digits.is_empty() && term[digits.len()..].starts_with([' ', '*']) {
                let n: u64 = digits.parse().map_err(|_| bad(term))?;
                (n, term[digits.len()..].trim_start_matches([' ', '*']))
            } else {
                (1, term)
            };
            let label: IrrepLabel = label.parse()?;
            label.validate()?;
            d.add(label, n);
        }
        if d.is_empty() {
            return Err(bad(s));
        }
        Ok(d)
    }
}

/// Splits on `+` separators, which must be preceded by whitespace so that
/// the sign in `E0+` and `V1+` is kept.
fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    let mut prev = ' ';
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == '+' && depth == 0 && prev.is_whitespace() && !current.trim().is_empty() {
            out.push(std::mem::take(&mut current));
        } else {
            current.push(c);
        }
        prev = c;
    }
    if !current.trim().is_empty() {
        out.push(current);
    }
    out
}

/// Conjugacy data of a group element.
///
/// `angle` is the rotation angle of the proper part. `improper` marks a
/// reflection in O(2) or an element `-R` in O(3). For O(2) reflections the
/// angle is irrelevant to every character.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub angle: f64,
    pub improper: bool,
}

impl GroupElement {
    pub fn rotation(angle: f64) -> Self {
        Self { angle, improper: false }
    }

    pub fn improper(angle: f64) -> Self {
        Self { angle, improper: true }
    }

    /// Image of an O(2) element in O(3): a reflection through a vertical
    /// plane is `-I` times a half turn about a horizontal axis.
    pub fn o2_in_o3(self) -> Self {
        if self.improper {
            Self::improper(PI)
        } else {
            self
        }
    }
}

/// `1 + 2 sum_{k=1..l} cos(kω)`.
fn so3_character(l: u32, omega: f64) -> f64 {
    1.0 + 2.0 * (1..=l).map(|k| (k as f64 * omega).cos()).sum::<f64>()
}

/// Trace of the representing matrix.
///
/// SO(2) characters `e^{imφ}` are complex, every other character is real.
pub fn character(label: &IrrepLabel, g: GroupElement) -> Result<Complex64> {
    label.validate()?;
    let real = |x: f64| Ok(Complex64::new(x, 0.0));
    match *label {
        IrrepLabel::SO2(m) => {
            if g.improper {
                return Err(Error::invalid("SO2 has no improper elements"));
            }
            Ok(Complex64::from_polar(1.0, m as f64 * g.angle))
        }
        IrrepLabel::O2Zero(s) => real(if g.improper { s.value() as f64 } else { 1.0 }),
        IrrepLabel::O2(m) => real(if g.improper { 0.0 } else { 2.0 * (m as f64 * g.angle).cos() }),
        IrrepLabel::SO3(l) => {
            if g.improper {
                return Err(Error::invalid("SO3 has no improper elements"));
            }
            real(so3_character(l, g.angle))
        }
        IrrepLabel::O3(l, s) => {
            let sign = if g.improper { s.value() as f64 } else { 1.0 };
            real(sign * so3_character(l, g.angle))
        }
    }
}

/// Character of the real representation with this label: for SO(2) and
/// `m != 0` the realification `2cos(mφ)`.
pub fn real_character(label: &IrrepLabel, g: GroupElement) -> Result<f64> {
    match *label {
        IrrepLabel::SO2(m) if m != 0 => {
            if g.improper {
                return Err(Error::invalid("SO2 has no improper elements"));
            }
            Ok(2.0 * (m as f64 * g.angle).cos())
        }
        _ => Ok(character(label, g)?.re),
    }
}

/// Exact Haar average of a class function whose angular dependence is a
/// trigonometric polynomial of degree at most `degree`.
pub fn haar_average(group: Group, degree: usize, f: impl Fn(GroupElement) -> Complex64) -> Complex64 {
    // SO(3) class functions carry the extra (1 - cos ω) density.
    let n = 2 * degree + 4;
    let angles = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64);
    match group {
        Group::SO2 => angles.map(|a| f(GroupElement::rotation(a))).sum::<Complex64>() / n as f64,
        Group::O2 => {
            let rot: Complex64 = angles.map(|a| f(GroupElement::rotation(a))).sum::<Complex64>() / n as f64;
            0.5 * (rot + f(GroupElement::improper(0.0)))
        }
        Group::SO3 | Group::O3 => {
            let density = |a: f64| 1.0 - a.cos();
            let proper: Complex64 = angles
                .clone()
                .map(|a| f(GroupElement::rotation(a)) * density(a))
                .sum::<Complex64>()
                / n as f64;
            if group == Group::SO3 {
                proper
            } else {
                let improper: Complex64 =
                    angles.map(|a| f(GroupElement::improper(a)) * density(a)).sum::<Complex64>() / n as f64;
                0.5 * (proper + improper)
            }
        }
    }
}

fn label_degree(label: &IrrepLabel) -> usize {
    match *label {
        IrrepLabel::SO2(m) => m.unsigned_abs() as usize,
        IrrepLabel::O2Zero(_) => 0,
        IrrepLabel::O2(m) | IrrepLabel::SO3(m) | IrrepLabel::O3(m, _) => m as usize,
    }
}

/// Division algebra `D(V)` of intertwiners of an irreducible representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivisionAlgebra {
    R,
    C,
    H,
}

impl DivisionAlgebra {
    /// Real dimension of the algebra.
    pub fn dimension(self) -> u64 {
        match self {
            DivisionAlgebra::R => 1,
            DivisionAlgebra::C => 2,
            DivisionAlgebra::H => 4,
        }
    }

    /// Dimension over the ground field.
    pub fn dimension_over(self, field: Field) -> u64 {
        match field {
            Field::Real => self.dimension(),
            Field::Complex => 1,
        }
    }
}

impl fmt::Display for DivisionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DivisionAlgebra::R => "R",
            DivisionAlgebra::C => "C",
            DivisionAlgebra::H => "H",
        })
    }
}

/// Type of `D(V)`. Over the reals `<χ, χ>` counts the irreducible summands
/// of the complexification weighted by their multiplicity squared: 1 for
/// type R, 2 for C (two inequivalent summands), 4 for H (one summand twice).
pub fn division_algebra_type(label: &IrrepLabel, field: Field) -> Result<DivisionAlgebra> {
    label.validate()?;
    if field == Field::Complex {
        return Ok(DivisionAlgebra::C);
    }
    let degree = 2 * label_degree(label);
    let norm = haar_average(label.group(), degree, |g| {
        let x = real_character(label, g).expect("element belongs to the label's group");
        Complex64::new(x * x, 0.0)
    })
    .re;
    match norm.round() as i64 {
        1 => Ok(DivisionAlgebra::R),
        2 => Ok(DivisionAlgebra::C),
        4 => Ok(DivisionAlgebra::H),
        _ => Err(Error::invalid(format!("{label} is not irreducible over the reals"))),
    }
}

fn expect_group(label: &IrrepLabel, group: Group) -> Result<()> {
    label.validate()?;
    if label.group() != group {
        return Err(Error::InvalidLabel(format!("{label} is not an {group} label")));
    }
    Ok(())
}

/// `V^{l±}|O(2)`: `E0±` for even `l`, `E0∓` for odd `l`, plus `E1 ... El`.
pub fn restrict_o3_to_o2(label: &IrrepLabel) -> Result<RepDecomposition> {
    expect_group(label, Group::O3)?;
    let IrrepLabel::O3(l, s) = *label else { unreachable!() };
    let zero_sign = if l % 2 == 0 { s } else { s.flip() };
    let mut d = RepDecomposition::single(IrrepLabel::O2Zero(zero_sign));
    for m in 1..=l {
        d.add(IrrepLabel::O2(m), 1);
    }
    Ok(d)
}

/// `V^l|SO(2) = sum_{|m| <= l} e(m)`.
pub fn restrict_so3_to_so2(ell: u32) -> RepDecomposition {
    (-(ell as i64)..=ell as i64).map(IrrepLabel::SO2).collect()
}

/// Restriction of a real SO(3) irrep to real SO(2) irreps.
pub fn restrict_so3_to_so2_real(ell: u32) -> RepDecomposition {
    (0..=ell as i64).map(IrrepLabel::SO2).collect()
}

/// `a ⊗ b` for O(2) irreps, from `2cos(mφ) 2cos(nφ) = 2cos((m+n)φ) + 2cos((m-n)φ)`
/// on rotations and the product of reflection traces.
pub fn tensor_o2(a: &IrrepLabel, b: &IrrepLabel) -> Result<RepDecomposition> {
    expect_group(a, Group::O2)?;
    expect_group(b, Group::O2)?;
    use IrrepLabel::{O2Zero, O2};
    let mut d = RepDecomposition::new();
    match (*a, *b) {
        (O2Zero(s), O2Zero(t)) => d.add(O2Zero(s * t), 1),
        (O2Zero(_), O2(m)) | (O2(m), O2Zero(_)) => d.add(O2(m), 1),
        (O2(m), O2(n)) => {
            d.add(O2(m + n), 1);
            if m == n {
                d.add(O2Zero(Sign::Plus), 1);
                d.add(O2Zero(Sign::Minus), 1);
            } else {
                d.add(O2(m.abs_diff(n)), 1);
            }
        }
        _ => unreachable!(),
    }
    Ok(d)
}

/// Tensor product of two O(2) representations given as decompositions.
pub fn tensor_o2_decompositions(a: &RepDecomposition, b: &RepDecomposition) -> Result<RepDecomposition> {
    let mut d = RepDecomposition::new();
    for (x, n) in a.iter() {
        for (y, k) in b.iter() {
            let t = tensor_o2(&x, &y)?;
            for (z, j) in t.iter() {
                d.add(z, n * k * j);
            }
        }
    }
    Ok(d)
}

/// `V^{l a} ⊗ V^{1 b} = V^{(l-1) ab} + V^{l ab} + V^{(l+1) ab}` (the first
/// term absent for `l = 0`). Only the vector case is supported.
pub fn tensor_o3_with_vector(a: &IrrepLabel, vector: &IrrepLabel) -> Result<RepDecomposition> {
    expect_group(a, Group::O3)?;
    expect_group(vector, Group::O3)?;
    let (IrrepLabel::O3(l, s), IrrepLabel::O3(1, t)) = (*a, *vector) else {
        return Err(Error::invalid("only products with an l = 1 representation are supported"));
    };
    let p = s * t;
    let lo = l.saturating_sub(1);
    let mut d = RepDecomposition::new();
    for k in lo..=l + 1 {
        if l == 0 && k == 0 {
            continue;
        }
        d.add(IrrepLabel::O3(k, p), 1);
    }
    Ok(d)
}

fn subgroup_of(g: Group) -> Result<Group> {
    match g {
        Group::SO3 => Ok(Group::SO2),
        Group::O3 => Ok(Group::O2),
        _ => Err(Error::GroupPairUnsupported(format!("no induction into {g}"))),
    }
}

fn restrict_to_subgroup(v: &IrrepLabel, field: Field) -> Result<RepDecomposition> {
    match (*v, field) {
        (IrrepLabel::SO3(l), Field::Complex) => Ok(restrict_so3_to_so2(l)),
        (IrrepLabel::SO3(l), Field::Real) => Ok(restrict_so3_to_so2_real(l)),
        (IrrepLabel::O3(..), _) => restrict_o3_to_o2(v),
        _ => Err(Error::GroupPairUnsupported(format!("{v} is not an SO3 or O3 label"))),
    }
}

/// Multiplicity of `V` in the representation of `G` induced from the
/// `K`-representation `E`, by Frobenius reciprocity:
/// `dim_F Hom_K(res V, E) / dim_F D(V)`.
///
/// Supported pairs are `(SO3, SO2)` and `(O3, O2)`.
pub fn induced_multiplicity(v: &IrrepLabel, e: &RepDecomposition, field: Field) -> Result<Ratio<i64>> {
    v.validate()?;
    let k = subgroup_of(v.group())?;
    if e.is_empty() {
        return Ok(Ratio::from_integer(0));
    }
    for (label, _) in e.iter() {
        label.validate()?;
        if label.group() != k {
            return Err(Error::GroupPairUnsupported(format!(
                "cannot induce {} representation {label} into {}",
                label.group(),
                v.group()
            )));
        }
    }
    let res = restrict_to_subgroup(v, field)?;
    let mut res_norm = RepDecomposition::new();
    for (l, n) in res.iter() {
        res_norm.add(l.normalized(field), n);
    }
    let mut hom: i64 = 0;
    for (label, n) in e.iter() {
        let label = label.normalized(field);
        let d = division_algebra_type(&label, field)?.dimension_over(field) as i64;
        hom += n as i64 * res_norm.multiplicity(&label) as i64 * d;
    }
    let dv = division_algebra_type(v, field)?.dimension_over(field) as i64;
    Ok(Ratio::new(hom, dv))
}

/// Same multiplicity from Haar averages of characters, `<χ_res V, χ_E> / <χ_V, χ_V>`
/// over the reals and `<χ_res V, χ_E>` over the complex numbers.
pub fn induced_multiplicity_by_characters(v: &IrrepLabel, e: &RepDecomposition, field: Field) -> Result<f64> {
    let k = subgroup_of(v.group())?;
    let degree = label_degree(v) + e.iter().map(|(l, _)| label_degree(&l)).max().unwrap_or(0);
    let chi_v = |g: GroupElement| -> Result<Complex64> {
        let g3 = if k == Group::O2 { g.o2_in_o3() } else { g };
        match field {
            Field::Complex => character(v, g3),
            Field::Real => real_character(v, g3).map(|x| Complex64::new(x, 0.0)),
        }
    };
    let chi_e = |g: GroupElement| -> Result<Complex64> {
        let mut t = Complex64::new(0.0, 0.0);
        for (l, n) in e.iter() {
            let x = match field {
                Field::Complex => character(&l, g)?,
                Field::Real => Complex64::new(real_character(&l, g)?, 0.0),
            };
            t += x * n as f64;
        }
        Ok(t)
    };
    let hom = haar_average(k, degree, |g| chi_v(g).unwrap() * chi_e(g).unwrap().conj()).re;
    let dv = division_algebra_type(v, field)?.dimension_over(field) as f64;
    Ok(hom / dv)
}
