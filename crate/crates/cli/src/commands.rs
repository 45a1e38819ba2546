use std::fs;
use std::path::{Path, PathBuf};

use spinfield::io;
use spinfield::ladder::distortion_fields;
use spinfield::radial::{build_frame, sample_ball_field, RadialGrid};
use spinfield::randomfield::{
    eb_to_qu, estimate_power_spectrum, qu_to_eb, sample_coefficients, sample_stokes_bundle, Component,
    PowerSpectrumSet,
};
use spinfield::reptheory::{
    division_algebra_type, induced_multiplicity, restrict_o3_to_o2, restrict_so3_to_so2, restrict_so3_to_so2_real,
    tensor_o2, tensor_o3_with_vector, Field, Group, IrrepLabel, RepDecomposition,
};
use spinfield::transform::{make_grid, synthesize, synthesize_real, HarmonicCoefficients, SphereMap};
use spinfield::ErrorKind;

use crate::{
    AnalyzeArgs, BallSynthArgs, EbArgs, FrameArgs, LensingArgs, MultArgs, RadialGridArgs, SpectrumArgs, SynthArgs,
};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<spinfield::Error> for CliError {
    fn from(e: spinfield::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::InvalidArgument => 2,
            ErrorKind::FileFormat => 3,
            ErrorKind::Numerical => 4,
            ErrorKind::Io => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))
}

/// Fails early when the parent directory of an output file is missing.
fn check_output(path: &str) -> Result<()> {
    let parent = Path::new(path).parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(p) if !p.is_dir() => Err(CliError::usage(format!("output directory {} does not exist", p.display()))),
        _ => Ok(()),
    }
}

fn write(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| CliError {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError {
        code: 1,
        message: format!("cannot create {}: {e}", path.display()),
    })
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| CliError::usage("--seed is required for sampling; there is no default seed"))
}

fn read_coefficients(path: &str) -> Result<HarmonicCoefficients> {
    Ok(io::coefficients_from_csv(&read(path)?)?)
}

fn read_radial_grid(path: &str) -> Result<RadialGrid> {
    Ok(io::radial_grid_from_json(&read(path)?)?)
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let seed = require_seed(a.seed)?;
    let text = read(&a.spectrum)?;
    if a.stokes {
        if a.real || a.spin != 0 || a.component.is_some() {
            return Err(CliError::usage("--stokes cannot be combined with --real, --spin or --component"));
        }
    } else {
        check_output(&a.out)?;
    }
    if let Some(p) = &a.coeffs_out {
        check_output(p)?;
    }
    if a.real && a.spin != 0 {
        return Err(CliError::usage("--real applies to spin-0 fields only"));
    }
    let spec = io::spectrum_from_csv(&text, None, a.allow_parity_mixing)?.truncated(a.lmax);
    let grid = make_grid(a.grid_lmax.unwrap_or(a.lmax))?;

    if a.stokes {
        let out = PathBuf::from(&a.out);
        create_dir(&out)?;
        let sample = sample_stokes_bundle(&spec, &grid, seed)?;
        let like = SphereMap::zeros(grid.clone(), 0);
        let m = &sample.maps;
        for (name, values) in [("I", &m.i), ("V", &m.v), ("Q", &m.q), ("U", &m.u)] {
            write(out.join(format!("{name}.json")), &io::real_map_to_json(values, &like)?)?;
        }
        for name in ["I", "V", "E", "B"] {
            if let Some(c) = sample.coefficients.get(name) {
                write(out.join(format!("{name}.csv")), &io::coefficients_to_csv(c))?;
            }
        }
        return Ok(());
    }

    let index = match (&a.component, spec.n_components()) {
        (Some(name), _) => spec
            .component_index(name)
            .ok_or_else(|| CliError::usage(format!("component {name} is not in the spectrum")))?,
        (None, 1) => 0,
        (None, _) => {
            return Err(CliError::usage(format!(
                "spectrum has components {}; choose one with --component or use --stokes",
                spec.component_names().join(", ")
            )))
        }
    };
    check_spin_support(&spec, index, a.spin)?;
    let sample = sample_coefficients(&spec, seed, a.real)?;
    let mut coeffs = sample.components[index].clone();
    if a.spin != 0 {
        coeffs = coeffs.relabel(a.spin, a.lmax);
    }
    let text = if a.real {
        let values = synthesize_real(&coeffs, &grid)?;
        io::real_map_to_json(&values, &SphereMap::zeros(grid.clone(), 0))?
    } else {
        io::map_to_json(&synthesize(&coeffs, &grid)?)?
    };
    write(&a.out, &text)?;
    if let Some(p) = &a.coeffs_out {
        write(p, &io::coefficients_to_csv(&coeffs))?;
    }
    Ok(())
}

fn check_spin_support(spec: &PowerSpectrumSet, index: usize, spin: i32) -> Result<()> {
    let min_ell = spin.unsigned_abs() as usize;
    for ell in 0..min_ell.min(spec.lmax() + 1) {
        if spec.get(ell, index, index) != 0.0 {
            return Err(spinfield::Error::SpectrumInvalid {
                ell,
                reason: format!("spin {spin} field has no degree below {min_ell}"),
            }
            .into());
        }
    }
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> Result<()> {
    let map = io::map_from_json(&read(&a.input)?)?;
    check_output(&a.out)?;
    let lmax = a.lmax.unwrap_or(map.grid().lmax_exact());
    let coeffs = spinfield::transform::analyze(&map, lmax)?;
    write(&a.out, &io::coefficients_to_csv(&coeffs))
}

pub fn spectrum(a: SpectrumArgs) -> Result<()> {
    let names: Vec<String> = if !a.names.is_empty() {
        if a.names.len() != a.inputs.len() {
            return Err(CliError::usage(format!(
                "{} names for {} input files",
                a.names.len(),
                a.inputs.len()
            )));
        }
        a.names.clone()
    } else if a.inputs.len() == 1 {
        vec!["T".into()]
    } else {
        (0..a.inputs.len()).map(|i| format!("C{i}")).collect()
    };
    let coeffs = a.inputs.iter().map(|p| read_coefficients(p)).collect::<Result<Vec<_>>>()?;
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let components = names.iter().map(|n| Component::named(n)).collect();
    let est = estimate_power_spectrum(components, &coeffs)?;
    let text = io::spectrum_to_csv(&est);
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn eb(a: EbArgs) -> Result<()> {
    match (&a.e, &a.b, &a.qu) {
        (Some(e), Some(b), None) => {
            if a.out.len() != 1 {
                return Err(CliError::usage("E/B input takes one --out map path"));
            }
            let e = read_coefficients(e)?;
            let b = read_coefficients(b)?;
            check_output(&a.out[0])?;
            let (plus, _) = eb_to_qu(&e, &b)?;
            let grid = make_grid(a.lmax.unwrap_or(plus.lmax()))?;
            write(&a.out[0], &io::map_to_json(&synthesize(&plus, &grid)?)?)
        }
        (None, None, Some(qu)) => {
            if a.out.len() != 2 {
                return Err(CliError::usage("Q/U input takes two --out paths, for E and B"));
            }
            let map = io::map_from_json(&read(qu)?)?;
            if map.spin() != 2 {
                return Err(CliError::usage(format!("Q + iU map must have spin 2, got {}", map.spin())));
            }
            check_output(&a.out[0])?;
            check_output(&a.out[1])?;
            let lmax = a.lmax.unwrap_or(map.grid().lmax_exact());
            let conj = map.values().iter().map(|v| v.conj()).collect();
            let minus_map = SphereMap::new(map.grid().clone(), -2, conj)?;
            let plus = spinfield::transform::analyze(&map, lmax)?;
            let minus = spinfield::transform::analyze(&minus_map, lmax)?;
            let (e, b) = qu_to_eb(&plus, &minus)?;
            write(&a.out[0], &io::coefficients_to_csv(&e))?;
            write(&a.out[1], &io::coefficients_to_csv(&b))
        }
        _ => Err(CliError::usage("give either --e and --b, or --qu")),
    }
}

pub fn lensing(a: LensingArgs) -> Result<()> {
    let phi = read_coefficients(&a.input)?;
    let dir = PathBuf::from(&a.out_dir);
    if !dir.is_dir() {
        return Err(CliError::usage(format!("output directory {} does not exist", dir.display())));
    }
    let d = distortion_fields(&phi)?;
    for (name, c) in [
        ("kappa", &d.kappa),
        ("flexion1", &d.flexion1),
        ("shear", &d.shear),
        ("flexion3", &d.flexion3),
    ] {
        write(dir.join(format!("{name}.csv")), &io::coefficients_to_csv(c))?;
    }
    Ok(())
}

fn label(text: &str, group: Option<Group>) -> Result<IrrepLabel> {
    let l: IrrepLabel = text.parse()?;
    l.validate()?;
    if let Some(g) = group {
        if l.group() != g {
            return Err(CliError::usage(format!("{l} is a label of {}, not {g}", l.group())));
        }
    }
    Ok(l)
}

pub fn mult(a: MultArgs) -> Result<()> {
    let group = a.group.as_deref().map(str::parse::<Group>).transpose()?;
    let field: Field = a.field.parse()?;
    let queries = [a.restrict.is_some(), a.tensor.is_some(), a.induced.is_some(), a.type_of.is_some()];
    if queries.iter().filter(|q| **q).count() != 1 {
        return Err(CliError::usage("give exactly one of --restrict, --tensor, --induced, --type"));
    }
    if let Some(text) = &a.restrict {
        let l = label(text, group)?;
        let (sub, rhs) = match l {
            IrrepLabel::O3(..) => ("O2", restrict_o3_to_o2(&l)?),
            IrrepLabel::SO3(ell) => match field {
                Field::Complex => ("SO2", restrict_so3_to_so2(ell)),
                Field::Real => ("SO2", restrict_so3_to_so2_real(ell)),
            },
            _ => return Err(CliError::usage(format!("cannot restrict {l}: expected an SO3 or O3 label"))),
        };
        print_equation(a.full, &format!("{l} |_{sub}"), &rhs.to_string());
    } else if let Some(pair) = &a.tensor {
        let x = label(&pair[0], group)?;
        let y = label(&pair[1], group)?;
        let rhs = match (x, y) {
            (IrrepLabel::O3(..), IrrepLabel::O3(..)) => tensor_o3_with_vector(&x, &y)?,
            _ => tensor_o2(&x, &y)?,
        };
        print_equation(a.full, &format!("{x} ⊗ {y}"), &rhs.to_string());
    } else if let Some(text) = &a.induced {
        let v = label(text, group)?;
        let from = a
            .from
            .as_deref()
            .ok_or_else(|| CliError::usage("--induced needs --from DECOMPOSITION"))?;
        let e: RepDecomposition = from.parse()?;
        let m = induced_multiplicity(&v, &e, field)?;
        print_equation(a.full, &format!("mult({v}, Ind({e}))"), &m.to_string());
    } else if let Some(text) = &a.type_of {
        let l = label(text, group)?;
        let d = division_algebra_type(&l, field)?;
        print_equation(a.full, &format!("D({l})"), &d.to_string());
    }
    Ok(())
}

fn print_equation(full: bool, lhs: &str, rhs: &str) {
    if full {
        println!("{lhs} = {rhs}");
    } else {
        println!("{rhs}");
    }
}

pub fn frame(a: FrameArgs) -> Result<()> {
    let grid = read_radial_grid(&a.grid)?;
    let cov = io::radial_covariance_from_csv(&read(&a.cov)?, a.spin, grid)?;
    check_output(&a.out)?;
    if let Some(p) = &a.meta {
        check_output(p)?;
    }
    let frame = build_frame(&cov)?;
    write(&a.out, &io::frame_to_csv(&frame))?;
    if let Some(p) = &a.meta {
        write(p, &io::frame_metadata_json(&frame)?)?;
    }
    Ok(())
}

pub fn ball_synth(a: BallSynthArgs) -> Result<()> {
    let seed = require_seed(a.seed)?;
    if a.real && a.spin != 0 {
        return Err(CliError::usage("--real applies to spin-0 fields only"));
    }
    let grid = read_radial_grid(&a.grid)?;
    let frame = io::frame_from_csv(&read(&a.frame)?, a.spin, grid, a.lmax)?;
    let sphere = make_grid(a.grid_lmax.unwrap_or(frame.lmax()))?;
    let field = sample_ball_field(&frame, &sphere, seed, a.real)?;
    io::write_ball(Path::new(&a.out), &field, a.real)?;
    Ok(())
}

pub fn radial_grid(a: RadialGridArgs) -> Result<()> {
    check_output(&a.out)?;
    let grid = match a.kind.as_str() {
        "gauss-legendre" => RadialGrid::gauss_legendre(a.radius, a.n)?,
        "uniform" => RadialGrid::uniform(a.radius, a.n)?,
        other => return Err(CliError::usage(format!("unknown grid kind {other:?}"))),
    };
    write(&a.out, &io::radial_grid_to_json(&grid)?)
}
