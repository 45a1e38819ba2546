//! `spinfield` command-line tool.
//!
//! Exit status: 0 success, 2 invalid arguments, 3 malformed input file,
//! 4 numerical contract violation (non-PSD input, band limit), 1 other I/O.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "spinfield",
    about = "Simulate and analyse isotropic random fields on the sphere and the ball",
    disable_version_flag = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Print the file schema version and exit.
    #[arg(long, global = true)]
    version: bool,

    /// Worker threads. Output does not depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a field from a power spectrum and write its map.
    Synth(SynthArgs),
    /// Harmonic coefficients of a map.
    Analyze(AnalyzeArgs),
    /// Empirical power spectrum of coefficient files.
    Spectrum(SpectrumArgs),
    /// Convert between E/B coefficients and a spin-2 Q + iU map.
    Eb(EbArgs),
    /// Magnification, flexion and shear coefficients of a lensing potential.
    Lensing(LensingArgs),
    /// Representation queries: restriction, tensor products, multiplicities.
    Mult(MultArgs),
    /// Frame of a radial covariance.
    Frame(FrameArgs),
    /// Sample a field on the ball from a radial frame.
    BallSynth(BallSynthArgs),
    /// Write a radial grid descriptor.
    RadialGrid(RadialGridArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Spectrum CSV `ell,comp_i,comp_j,value`.
    #[arg(long)]
    spectrum: String,
    /// Band limit of the sampled coefficients.
    #[arg(long)]
    lmax: usize,
    /// Spin weight of the field (single-component spectra).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    spin: i32,
    /// Random seed. Required.
    #[arg(long)]
    seed: Option<u64>,
    /// Impose the reality condition and write exact zero imaginary parts (spin 0).
    #[arg(long)]
    real: bool,
    /// Component to synthesize from a multi-component spectrum.
    #[arg(long)]
    component: Option<String>,
    /// Sample I, V, E, B jointly and write I, V, Q, U maps into the output directory.
    #[arg(long)]
    stokes: bool,
    /// Band limit of the output grid (default: --lmax).
    #[arg(long)]
    grid_lmax: Option<usize>,
    /// Permit cross-spectra between components of opposite parity.
    #[arg(long)]
    allow_parity_mixing: bool,
    /// Output map JSON, or directory with --stokes.
    #[arg(long)]
    out: String,
    /// Also write the sampled coefficients as CSV.
    #[arg(long)]
    coeffs_out: Option<String>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Map JSON.
    #[arg(long = "in")]
    input: String,
    /// Band limit (default: the grid's exact band limit).
    #[arg(long)]
    lmax: Option<usize>,
    /// Output coefficient CSV.
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Coefficient CSV files, one per component.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<String>,
    /// Component names, comma separated (default: T for one file, C0, C1, ... otherwise).
    #[arg(long, value_delimiter = ',')]
    names: Vec<String>,
    /// Output spectrum CSV (default: stdout).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct EbArgs {
    /// E coefficient CSV (E/B to Q/U direction).
    #[arg(long, requires = "b", conflicts_with = "qu")]
    e: Option<String>,
    /// B coefficient CSV (E/B to Q/U direction).
    #[arg(long, requires = "e")]
    b: Option<String>,
    /// Spin-2 map JSON holding Q + iU (Q/U to E/B direction).
    #[arg(long)]
    qu: Option<String>,
    /// Band limit of the output grid or coefficients.
    #[arg(long)]
    lmax: Option<usize>,
    /// Output: map JSON for E/B input; E and B CSV paths otherwise.
    #[arg(long, num_args = 1..=2, required = true)]
    out: Vec<String>,
}

#[derive(Args, Debug)]
struct LensingArgs {
    /// Lensing potential coefficients (spin 0 CSV).
    #[arg(long = "in")]
    input: String,
    /// Directory for kappa.csv, flexion1.csv, shear.csv, flexion3.csv (default: current).
    #[arg(long, default_value = ".")]
    out_dir: String,
}

#[derive(Args, Debug)]
struct MultArgs {
    /// Group of the labels: SO2, O2, SO3 or O3.
    #[arg(long)]
    group: Option<String>,
    /// Restrict an SO3 or O3 irrep to SO2 or O2.
    #[arg(long, value_name = "LABEL")]
    restrict: Option<String>,
    /// Tensor product of two O2 irreps.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    tensor: Option<Vec<String>>,
    /// Multiplicity of an SO3 or O3 irrep in the representation induced from --from.
    #[arg(long, value_name = "LABEL")]
    induced: Option<String>,
    /// Subgroup representation, e.g. "E2" or "e(0) + 2 e(1)".
    #[arg(long, value_name = "DECOMPOSITION")]
    from: Option<String>,
    /// Division algebra of an irrep.
    #[arg(long = "type", value_name = "LABEL")]
    type_of: Option<String>,
    /// Ground field: real or complex.
    #[arg(long, default_value = "complex")]
    field: String,
    /// Print the full equation instead of only the right-hand side.
    #[arg(long)]
    full: bool,
}

#[derive(Args, Debug)]
struct FrameArgs {
    /// Radial covariance CSV `ell,i,j,value`.
    #[arg(long)]
    cov: String,
    /// Radial grid JSON `{R, nodes, weights}`.
    #[arg(long)]
    grid: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    spin: i32,
    /// Output frame CSV `ell,j,i,value`.
    #[arg(long)]
    out: String,
    /// Metadata JSON with eigenvalues and the truncation threshold.
    #[arg(long)]
    meta: Option<String>,
}

#[derive(Args, Debug)]
struct BallSynthArgs {
    /// Frame CSV `ell,j,i,value`.
    #[arg(long)]
    frame: String,
    /// Radial grid JSON.
    #[arg(long)]
    grid: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    spin: i32,
    /// Band limit (default: highest degree in the frame file).
    #[arg(long)]
    lmax: Option<usize>,
    /// Band limit of the angular grid (default: --lmax).
    #[arg(long)]
    grid_lmax: Option<usize>,
    /// Random seed. Required.
    #[arg(long)]
    seed: Option<u64>,
    /// Real field (spin 0): exact zero imaginary parts.
    #[arg(long)]
    real: bool,
    /// Output directory for shell_NNN.json and shells.json.
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct RadialGridArgs {
    /// Outer radius.
    #[arg(long = "radius")]
    radius: f64,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// gauss-legendre or uniform.
    #[arg(long, default_value = "gauss-legendre")]
    kind: String,
    #[arg(long)]
    out: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.version {
        println!("{}", spinfield::SCHEMA_VERSION);
        return ExitCode::SUCCESS;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let Some(command) = cli.command else {
        eprintln!("error: no subcommand given; see --help");
        return ExitCode::from(2);
    };
    let result = match command {
        Command::Synth(a) => commands::synth(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Eb(a) => commands::eb(a),
        Command::Lensing(a) => commands::lensing(a),
        Command::Mult(a) => commands::mult(a),
        Command::Frame(a) => commands::frame(a),
        Command::BallSynth(a) => commands::ball_synth(a),
        Command::RadialGrid(a) => commands::radial_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
