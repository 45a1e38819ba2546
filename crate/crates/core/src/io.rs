//! Text formats for maps, coefficients, spectra and radial data.
//!
//! Every float is written with 17 significant digits (`{:.16e}`) and parsed
//! back to the identical bit pattern.
//!
//! * Map: JSON `{schema_version, spin, n_theta, n_phi, grid, lmax_exact, values}`
//!   with `values` a row-major list of `[re, im]` pairs, ring by ring.
//! * Coefficients: CSV, header `spin,lmax`, one line with the two values,
//!   header `ell,m,re,im`, then one row per coefficient.
//! * Spectrum: CSV `ell,comp_i,comp_j,value`. Absent entries are zero.
//! * Radial grid: JSON `{R, nodes, weights}`.
//! * Radial covariance: CSV `ell,i,j,value` over grid indices.
//! * Frame: CSV `ell,j,i,value`, `f_lj(r_i)`.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{BallField, RadialCovariance, RadialFrame, RadialGrid};
use crate::randomfield::{Component, PowerSpectrumSet};
use crate::transform::{make_grid, HarmonicCoefficients, SphereMap};

/// Version tag written into every JSON file and printed by `--version`.
pub const SCHEMA_VERSION: &str = "1.0.0";

pub const GRID_NAME: &str = "gauss-legendre";

/// `{:.16e}`, 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::format(format!("line {line}: cannot parse number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::format(format!("line {line}: non-finite value {s:?}")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::format(format!("line {line}: cannot parse {what} {s:?}")))
}

/// serde_json formatter that writes floats with [`format_f64`].
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite float"));
        }
        writer.write_all(format_f64(value).as_bytes())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::format(format!("cannot serialise: {e}")))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("{what}: {e}")))
}

fn check_schema(version: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::format(format!(
            "schema_version {version:?} is not supported (expected {SCHEMA_VERSION:?})"
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    schema_version: String,
    spin: i32,
    n_theta: usize,
    n_phi: usize,
    grid: String,
    lmax_exact: usize,
    values: Vec<[f64; 2]>,
}

pub fn map_to_json(map: &SphereMap) -> Result<String> {
    let g = map.grid();
    to_json(&MapFile {
        schema_version: SCHEMA_VERSION.into(),
        spin: map.spin(),
        n_theta: g.n_theta(),
        n_phi: g.n_phi(),
        grid: GRID_NAME.into(),
        lmax_exact: g.lmax_exact(),
        values: map.values().iter().map(|v| [v.re, v.im]).collect(),
    })
}

/// Map JSON for real values, imaginary parts written as exact zeros.
pub fn real_map_to_json(values: &[f64], map_like: &SphereMap) -> Result<String> {
    let complex = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    map_to_json(&SphereMap::new(map_like.grid().clone(), map_like.spin(), complex)?)
}

pub fn map_from_json(text: &str) -> Result<SphereMap> {
    let f: MapFile = from_json(text, "map file")?;
    check_schema(&f.schema_version)?;
    if f.grid != GRID_NAME {
        return Err(Error::format(format!("unsupported grid {:?}", f.grid)));
    }
    let grid = make_grid(f.lmax_exact)?;
    if f.n_theta != grid.n_theta() || f.n_phi != grid.n_phi() {
        return Err(Error::format(format!(
            "grid shape {}x{} does not match lmax_exact {} (expected {}x{})",
            f.n_theta,
            f.n_phi,
            f.lmax_exact,
            grid.n_theta(),
            grid.n_phi()
        )));
    }
    if f.values.len() != grid.len() {
        return Err(Error::format(format!("{} values for {} grid nodes", f.values.len(), grid.len())));
    }
    let values = f.values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    SphereMap::new(grid, f.spin, values).map_err(|e| Error::format(e.to_string()))
}

pub fn coefficients_to_csv(c: &HarmonicCoefficients) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "spin,lmax");
    let _ = writeln!(s, "{},{}", c.spin(), c.lmax());
    let _ = writeln!(s, "ell,m,re,im");
    for (ell, m, v) in c.iter() {
        let _ = writeln!(s, "{ell},{m},{},{}", format_f64(v.re), format_f64(v.im));
    }
    s
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn expect_header(line: Option<(usize, &str)>, header: &str) -> Result<()> {
    match line {
        Some((_, l)) if l.replace(' ', "") == header => Ok(()),
        Some((n, l)) => Err(Error::format(format!("line {n}: expected header {header:?}, found {l:?}"))),
        None => Err(Error::format(format!("missing header {header:?}"))),
    }
}

fn fields(line: &str, n: usize, count: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(Error::format(format!("line {n}: expected {count} fields, found {}", parts.len())));
    }
    Ok(parts)
}

/// Reads a coefficient CSV. Missing rows are zero, duplicates are an error.
pub fn coefficients_from_csv(text: &str) -> Result<HarmonicCoefficients> {
    let mut lines = data_lines(text);
    expect_header(lines.next(), "spin,lmax")?;
    let (n, meta) = lines.next().ok_or_else(|| Error::format("missing spin,lmax values"))?;
    let meta = fields(meta, n, 2)?;
    let spin: i32 = parse_int(meta[0], n, "spin")?;
    let lmax: usize = parse_int(meta[1], n, "lmax")?;
    if lmax > crate::harmonics::DEFAULT_MAX_ELL {
        return Err(Error::BandLimitExceeded {
            requested: lmax,
            limit: crate::harmonics::DEFAULT_MAX_ELL,
        });
    }
    expect_header(lines.next(), "ell,m,re,im")?;
    let mut c = HarmonicCoefficients::zeros(spin, lmax);
    let mut seen = std::collections::HashSet::new();
    for (n, line) in lines {
        let f = fields(line, n, 4)?;
        let ell: usize = parse_int(f[0], n, "ell")?;
        let m: i32 = parse_int(f[1], n, "m")?;
        if ell > lmax || m.unsigned_abs() as usize > ell {
            return Err(Error::format(format!("line {n}: (ell, m) = ({ell}, {m}) outside lmax {lmax}")));
        }
        if !seen.insert((ell, m)) {
            return Err(Error::format(format!("line {n}: duplicate coefficient ({ell}, {m})")));
        }
        let v = Complex64::new(parse_f64(f[2], n)?, parse_f64(f[3], n)?);
        c.set(ell, m, v).map_err(|e| Error::format(format!("line {n}: {e}")))?;
    }
    Ok(c)
}

/// Every `i <= j` entry of every degree, components by name.
pub fn spectrum_to_csv(spec: &PowerSpectrumSet) -> String {
    let mut s = String::from("ell,comp_i,comp_j,value\n");
    let names = spec.component_names();
    for ell in 0..=spec.lmax() {
        for i in 0..names.len() {
            for j in i..names.len() {
                let _ = writeln!(s, "{ell},{},{},{}", names[i], names[j], format_f64(spec.get(ell, i, j)));
            }
        }
    }
    s
}

/// Reads a spectrum CSV. Components are ordered by first appearance and
/// typed with [`Component::named`]; `lmax` is the largest degree present
/// unless given.
pub fn spectrum_from_csv(text: &str, lmax: Option<usize>, allow_parity_mixing: bool) -> Result<PowerSpectrumSet> {
    let mut lines = data_lines(text);
    expect_header(lines.next(), "ell,comp_i,comp_j,value")?;
    let mut names: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (n, line) in lines {
        let f = fields(line, n, 4)?;
        let ell: usize = parse_int(f[0], n, "ell")?;
        for name in [f[1], f[2]] {
            if name.is_empty() {
                return Err(Error::format(format!("line {n}: empty component name")));
            }
            if !names.iter().any(|x| x == name) {
                names.push(name.to_string());
            }
        }
        rows.push((n, ell, f[1].to_string(), f[2].to_string(), parse_f64(f[3], n)?));
    }
    if names.is_empty() {
        return Err(Error::format("spectrum file has no entries"));
    }
    let max_ell = rows.iter().map(|r| r.1).max().unwrap_or(0);
    let lmax = lmax.unwrap_or(max_ell);
    if max_ell > lmax {
        return Err(Error::format(format!("spectrum has degree {max_ell} above lmax {lmax}")));
    }
    let components = names.iter().map(|n| Component::named(n)).collect();
    let mut spec = PowerSpectrumSet::zeros(components, lmax).with_parity_mixing(allow_parity_mixing);
    let mut seen = std::collections::HashMap::new();
    for (n, ell, a, b, v) in rows {
        let i = spec.component_index(&a).unwrap();
        let j = spec.component_index(&b).unwrap();
        let key = (ell, i.min(j), i.max(j));
        if let Some(prev) = seen.insert(key, v) {
            if prev != v {
                return Err(Error::format(format!(
                    "line {n}: conflicting values for ({ell}, {a}, {b})"
                )));
            }
            return Err(Error::format(format!("line {n}: duplicate entry ({ell}, {a}, {b})")));
        }
        spec.set(ell, i, j, v)?;
    }
    Ok(spec)
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    #[serde(rename = "R")]
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub fn radial_grid_to_json(grid: &RadialGrid) -> Result<String> {
    to_json(&GridFile {
        radius: grid.radius(),
        nodes: grid.nodes().to_vec(),
        weights: grid.weights().to_vec(),
    })
}

pub fn radial_grid_from_json(text: &str) -> Result<RadialGrid> {
    let f: GridFile = from_json(text, "radial grid file")?;
    RadialGrid::with_weights(f.radius, f.nodes, f.weights).map_err(|e| Error::format(e.to_string()))
}

/// Every `i <= j` entry of every degree.
pub fn radial_covariance_to_csv(cov: &RadialCovariance) -> String {
    let mut s = String::from("ell,i,j,value\n");
    let n = cov.grid().len();
    for ell in 0..=cov.lmax() {
        for i in 0..n {
            for j in i..n {
                let _ = writeln!(s, "{ell},{i},{j},{}", format_f64(cov.get(ell, i, j)));
            }
        }
    }
    s
}

pub fn radial_covariance_from_csv(text: &str, spin: i32, grid: RadialGrid) -> Result<RadialCovariance> {
    let mut lines = data_lines(text);
    expect_header(lines.next(), "ell,i,j,value")?;
    let n = grid.len();
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let f = fields(line, line_no, 4)?;
        let ell: usize = parse_int(f[0], line_no, "ell")?;
        let i: usize = parse_int(f[1], line_no, "i")?;
        let j: usize = parse_int(f[2], line_no, "j")?;
        if i >= n || j >= n {
            return Err(Error::format(format!("line {line_no}: node index outside a grid of {n}")));
        }
        rows.push((line_no, ell, i, j, parse_f64(f[3], line_no)?));
    }
    let lmax = rows.iter().map(|r| r.1).max().ok_or_else(|| Error::format("covariance file has no entries"))?;
    let mut cov = RadialCovariance::zeros(spin, grid, lmax);
    let mut seen = std::collections::HashSet::new();
    for (line_no, ell, i, j, v) in rows {
        if !seen.insert((ell, i.min(j), i.max(j))) {
            return Err(Error::format(format!("line {line_no}: duplicate entry ({ell}, {i}, {j})")));
        }
        cov.set(ell, i, j, v)?;
    }
    Ok(cov)
}

pub fn frame_to_csv(frame: &RadialFrame) -> String {
    let mut s = String::from("ell,j,i,value\n");
    for ell in 0..=frame.lmax() {
        for (j, f) in frame.functions(ell).iter().enumerate() {
            for (i, v) in f.iter().enumerate() {
                let _ = writeln!(s, "{ell},{j},{i},{}", format_f64(*v));
            }
        }
    }
    s
}

/// Reads a frame CSV. Function indices must be contiguous from 0 at each
/// degree and every function must be given at every node.
pub fn frame_from_csv(text: &str, spin: i32, grid: RadialGrid, lmax: Option<usize>) -> Result<RadialFrame> {
    let mut lines = data_lines(text);
    expect_header(lines.next(), "ell,j,i,value")?;
    let n = grid.len();
    let mut entries: std::collections::BTreeMap<(usize, usize), Vec<Option<f64>>> = Default::default();
    let mut max_ell = 0;
    for (line_no, line) in lines {
        let f = fields(line, line_no, 4)?;
        let ell: usize = parse_int(f[0], line_no, "ell")?;
        let j: usize = parse_int(f[1], line_no, "j")?;
        let i: usize = parse_int(f[2], line_no, "i")?;
        if i >= n {
            return Err(Error::format(format!("line {line_no}: node index {i} outside a grid of {n}")));
        }
        let slot = &mut entries.entry((ell, j)).or_insert_with(|| vec![None; n])[i];
        if slot.is_some() {
            return Err(Error::format(format!("line {line_no}: duplicate entry ({ell}, {j}, {i})")));
        }
        *slot = Some(parse_f64(f[3], line_no)?);
        max_ell = max_ell.max(ell);
    }
    let lmax = lmax.unwrap_or(max_ell);
    if max_ell > lmax {
        return Err(Error::format(format!("frame has degree {max_ell} above lmax {lmax}")));
    }
    let mut functions = vec![Vec::new(); lmax + 1];
    for ((ell, j), values) in entries {
        if j != functions[ell].len() {
            return Err(Error::format(format!("frame functions at ell={ell} are not numbered 0, 1, ...")));
        }
        let f = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::format(format!("frame function ({ell}, {j}) missing node {i}"))))
            .collect::<Result<Vec<f64>>>()?;
        functions[ell].push(f);
    }
    RadialFrame::new(spin, grid, functions).map_err(|e| Error::format(e.to_string()))
}

#[derive(Serialize)]
struct FrameMeta<'a> {
    schema_version: &'a str,
    spin: i32,
    lmax: usize,
    relative_tolerance: f64,
    retained: Vec<usize>,
    eigenvalues: Vec<Vec<f64>>,
}

/// Metadata for a built frame: threshold, retained counts and eigenvalues.
pub fn frame_metadata_json(frame: &RadialFrame) -> Result<String> {
    to_json(&FrameMeta {
        schema_version: SCHEMA_VERSION,
        spin: frame.spin(),
        lmax: frame.lmax(),
        relative_tolerance: frame.threshold(),
        retained: (0..=frame.lmax()).map(|l| frame.functions(l).len()).collect(),
        eigenvalues: (0..=frame.lmax()).map(|l| frame.eigenvalues(l).to_vec()).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct ShellEntry {
    index: usize,
    r: f64,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct BallIndex {
    schema_version: String,
    spin: i32,
    #[serde(rename = "R")]
    radius: f64,
    shells: Vec<ShellEntry>,
}

pub fn shell_file_name(index: usize) -> String {
    format!("shell_{index:03}.json")
}

/// Writes `shell_NNN.json` map files and a `shells.json` index into `dir`.
/// With `real` set the imaginary parts are written as exact zeros.
pub fn write_ball(dir: &Path, field: &BallField, real: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut shells = Vec::with_capacity(field.shells.len());
    for (i, (map, &r)) in field.shells.iter().zip(field.radial_grid.nodes()).enumerate() {
        let name = shell_file_name(i);
        let text = if real {
            real_map_to_json(&map.real_part(), map)?
        } else {
            map_to_json(map)?
        };
        std::fs::write(dir.join(&name), text)?;
        shells.push(ShellEntry { index: i, r, file: name });
    }
    let spin = field.shells.first().map(|m| m.spin()).unwrap_or(0);
    let index = to_json(&BallIndex {
        schema_version: SCHEMA_VERSION.into(),
        spin,
        radius: field.radial_grid.radius(),
        shells,
    })?;
    std::fs::write(dir.join("shells.json"), index)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::synthesize;
    use proptest::prelude::*;

    #[test]
    fn float_text_is_bit_exact() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 5e-324, f64::MAX, 0.0, -0.0, std::f64::consts::PI] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn map_round_trip() {
        let g = make_grid(5).unwrap();
        let c = HarmonicCoefficients::from_fn(1, 5, |l, m| Complex64::new(l as f64 / 7.0, m as f64 / 3.0));
        let map = synthesize(&c, &g).unwrap();
        let text = map_to_json(&map).unwrap();
        let back = map_from_json(&text).unwrap();
        assert_eq!(back, map);
        assert_eq!(map_to_json(&back).unwrap(), text);
        assert!(text.contains("\"grid\":\"gauss-legendre\""));
    }

    #[test]
    fn map_format_errors() {
        assert!(matches!(map_from_json("{"), Err(Error::Format(_))));
        let g = make_grid(2).unwrap();
        let text = map_to_json(&SphereMap::zeros(g, 0)).unwrap();
        let bad = text.replace("\"n_phi\":5", "\"n_phi\":6");
        assert!(matches!(map_from_json(&bad), Err(Error::Format(_))));
        let bad = text.replace(SCHEMA_VERSION, "0.0.1");
        assert!(matches!(map_from_json(&bad), Err(Error::Format(_))));
    }

    #[test]
    fn coefficient_round_trip_and_errors() {
        let c = HarmonicCoefficients::from_fn(-2, 6, |l, m| Complex64::new(0.1 * l as f64, -0.01 * m as f64));
        let text = coefficients_to_csv(&c);
        assert!(text.starts_with("spin,lmax\n-2,6\nell,m,re,im\n2,-2,"));
        assert_eq!(coefficients_from_csv(&text).unwrap(), c);
        let sparse = "spin,lmax\n0,4\nell,m,re,im\n2,0,1,0\n";
        let s = coefficients_from_csv(sparse).unwrap();
        assert_eq!(s.get(2, 0), Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sq(), 1.0);
        for bad in [
            "spin,lmax\n0,4\nell,m,re,im\n5,0,1,0\n",
            "spin,lmax\n0,4\nell,m,re,im\n2,3,1,0\n",
            "spin,lmax\n0,4\nell,m,re,im\n2,0,1,0\n2,0,1,0\n",
            "spin,lmax\n0,4\nell,m,re,im\n2,0,x,0\n",
            "spin,lmax\n2,4\nell,m,re,im\n1,0,1,0\n",
            "ell,m,re,im\n",
        ] {
            assert!(matches!(coefficients_from_csv(bad), Err(Error::Format(_))), "{bad}");
        }
    }

    #[test]
    fn spectrum_round_trip() {
        let text = "ell,comp_i,comp_j,value\n0,I,I,1\n2,I,I,0.5\n2,E,E,0.25\n2,I,E,0.1\n";
        let s = spectrum_from_csv(text, None, false).unwrap();
        assert_eq!(s.component_names(), vec!["I", "E"]);
        assert_eq!(s.lmax(), 2);
        assert_eq!(s.get(2, 1, 0), 0.1);
        assert_eq!(s.get(1, 0, 0), 0.0);
        let out = spectrum_to_csv(&s);
        assert_eq!(spectrum_from_csv(&out, None, false).unwrap(), s);
        assert!(spectrum_from_csv("ell,comp_i,comp_j,value\n2,I,E,1\n2,E,I,2\n", None, false).is_err());
        assert!(spectrum_from_csv("ell,comp_i,comp_j,value\n", None, false).is_err());
    }

    #[test]
    fn radial_round_trips() {
        let g = RadialGrid::gauss_legendre(1.7, 5).unwrap();
        let gt = radial_grid_to_json(&g).unwrap();
        assert!(gt.contains("\"R\":"));
        let g2 = radial_grid_from_json(&gt).unwrap();
        assert_eq!(g2, g);
        let cov = RadialCovariance::from_fn(1, g.clone(), 3, |l, a, b| (a * b) / (l as f64 + 1.0));
        let back = radial_covariance_from_csv(&radial_covariance_to_csv(&cov), 1, g.clone()).unwrap();
        assert_eq!(back, cov);
        let frame = crate::radial::build_frame(&cov).unwrap();
        let f2 = frame_from_csv(&frame_to_csv(&frame), 1, g.clone(), Some(3)).unwrap();
        for ell in 0..=3 {
            assert_eq!(f2.functions(ell), frame.functions(ell));
        }
        assert!(frame_metadata_json(&frame).unwrap().contains("relative_tolerance"));
        assert!(frame_from_csv("ell,j,i,value\n1,1,0,1.0\n", 1, g, None).is_err());
    }

    proptest! {
        #[test]
        fn any_finite_float_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
