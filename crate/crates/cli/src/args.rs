use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

/// Constant-envelope OQPSK pulse shaping studies.
///
/// All quantities at this interface are normalized with T = 1: time steps
/// are in units of T and frequencies are fT = ωT/2π.
#[derive(Debug, Parser)]
#[command(name = "wavebench", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the constant-envelope identity and edge smoothness of each shape.
    Verify(Opts),
    /// Power spectrum P(f) in dB for each shape.
    Spectrum(Opts),
    /// Out-of-band leakage R_o(W) for each shape.
    Leakage(Opts),
    /// PAPR of the filtered OQPSK signal over shapes and interpolation multiples.
    PaprSweep(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::Verify(o) | Command::Spectrum(o) | Command::Leakage(o) | Command::PaprSweep(o) => o,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Spectrum(_) => "spectrum",
            Command::Leakage(_) => "leakage",
            Command::PaprSweep(_) => "papr-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    HalfSine,
    Sfsk,
    AlphaHalfSine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityArg {
    Even,
    Odd,
    Unknown,
}

/// Flags shared by every subcommand. Each may also be given in a TOML file
/// passed with `--config`, using the same names with `_` for `-`; flags on
/// the command line take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Opts {
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Pulse shapes (comma-separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub kind: Option<Vec<KindArg>>,
    /// α values for the alpha-half-sine kind (comma-separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Option<Vec<f64>>,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Seed of the pseudorandom bit stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of bits (two per symbol pair).
    #[arg(long)]
    pub bits: Option<usize>,
    /// Read the bit stream from a file of '0'/'1' characters instead.
    #[arg(long)]
    pub bits_file: Option<PathBuf>,
    /// Write the bit stream used by the sweep to this file.
    #[arg(long)]
    pub export_bits: Option<PathBuf>,
    /// Interpolation multiples N of the sampled pulse (even, comma-separated).
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Interpolation multiple N0 of the low-pass filter.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Half length K of the low-pass filter (2K+1 taps).
    #[arg(long)]
    pub k: Option<usize>,
    /// Skip the low-pass filter.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_lpf: Option<bool>,

    /// Quadrature time step, in units of T.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Frequency step, in normalized frequency fT.
    #[arg(long)]
    pub domega: Option<f64>,
    /// Truncation bandwidth W_m, in normalized frequency fT.
    #[arg(long)]
    pub wmax: Option<f64>,
    /// Highest normalized frequency of the spectrum output.
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Bandwidth step of the leakage output, in normalized frequency.
    #[arg(long)]
    pub wstep: Option<f64>,

    /// Two-column (t, g) CSV with a user-supplied phase function.
    #[arg(long)]
    pub custom_g: Option<PathBuf>,
    /// Parity of the custom phase function.
    #[arg(long, value_enum)]
    pub parity: Option<ParityArg>,
    /// Interior grid points of the constant-envelope check.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Tolerance of the constant-envelope check.
    #[arg(long)]
    pub ce_tol: Option<f64>,
    /// Tolerance on |g'(T⁻)| for a smooth pulse.
    #[arg(long)]
    pub smooth_tol: Option<f64>,
}

impl Opts {
    /// Fills every unset field from `base`.
    pub fn or(self, base: Opts) -> Opts {
        Opts {
            config: self.config,
            kind: self.kind.or(base.kind),
            alpha: self.alpha.or(base.alpha),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            seed: self.seed.or(base.seed),
            bits: self.bits.or(base.bits),
            bits_file: self.bits_file.or(base.bits_file),
            export_bits: self.export_bits.or(base.export_bits),
            n: self.n.or(base.n),
            n0: self.n0.or(base.n0),
            k: self.k.or(base.k),
            no_lpf: self.no_lpf.or(base.no_lpf),
            dt: self.dt.or(base.dt),
            domega: self.domega.or(base.domega),
            wmax: self.wmax.or(base.wmax),
            fmax: self.fmax.or(base.fmax),
            wstep: self.wstep.or(base.wstep),
            custom_g: self.custom_g.or(base.custom_g),
            parity: self.parity.or(base.parity),
            grid_points: self.grid_points.or(base.grid_points),
            ce_tol: self.ce_tol.or(base.ce_tol),
            smooth_tol: self.smooth_tol.or(base.smooth_tol),
        }
    }
}
