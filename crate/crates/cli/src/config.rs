//! Resolution of flags and config-file values into a validated run
//! configuration. Nothing is computed until every control has been checked.

use std::path::PathBuf;

use wavebench_core::oqpsk::{self, LpfParams};
use wavebench_core::psf::{Parity, PulseShape, DEFAULT_CE_TOLERANCE, DEFAULT_SMOOTH_TOLERANCE};
use wavebench_core::spectral::{self, DEFAULT_DF_NORMALIZED, DEFAULT_WMAX_NORMALIZED};

use crate::args::{Command, FormatArg, KindArg, Opts, ParityArg};

/// T at the command-line surface.
pub const T: f64 = 1.0;

pub const DEFAULT_FMAX: f64 = 10.0;
pub const DEFAULT_WSTEP: f64 = 0.05;
pub const DEFAULT_GRID_POINTS: usize = 2048;
pub const DEFAULT_STUDY_ALPHAS: [f64; 3] = [1.5, 2.0, 3.0];
pub const DEFAULT_SWEEP_ALPHAS: [f64; 2] = [2.0, 3.0];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct CustomPhase {
    pub path: PathBuf,
    pub parity: Parity,
}

#[derive(Debug, Clone)]
pub enum BitSource {
    Generated { count: usize, seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct SpectralControls {
    pub dt: f64,
    pub domega: f64,
    pub w_max: f64,
    pub f_max: f64,
    pub w_step: f64,
}

#[derive(Debug, Clone)]
pub struct SweepControls {
    pub n_values: Vec<usize>,
    pub lpf: Option<LpfParams>,
    pub bits: BitSource,
    pub export_bits: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub shapes: Vec<PulseShape>,
    pub custom: Option<CustomPhase>,
    pub spectral: SpectralControls,
    pub sweep: SweepControls,
    pub grid_points: usize,
    pub ce_tol: f64,
    pub smooth_tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        bad(format!("--{name} must be a positive number, got {v}"))
    }
}

fn load_file(opts: &Opts) -> Result<Opts, ConfigError> {
    let Some(path) = &opts.config else {
        return Ok(Opts::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
}

fn resolve_shapes(cmd: &str, opts: &Opts) -> Result<Vec<PulseShape>, ConfigError> {
    let default_alphas: &[f64] = if cmd == "papr-sweep" {
        &DEFAULT_SWEEP_ALPHAS
    } else {
        &DEFAULT_STUDY_ALPHAS
    };
    let kinds = match (&opts.kind, &opts.alpha) {
        (Some(k), _) => k.clone(),
        (None, Some(_)) => vec![KindArg::AlphaHalfSine],
        (None, None) if opts.custom_g.is_some() => vec![],
        (None, None) => vec![KindArg::HalfSine, KindArg::Sfsk, KindArg::AlphaHalfSine],
    };
    if opts.alpha.is_some() && !kinds.contains(&KindArg::AlphaHalfSine) {
        return bad("--alpha only applies to --kind alpha-half-sine");
    }
    let alphas = opts.alpha.clone().unwrap_or_else(|| default_alphas.to_vec());
    let mut shapes = Vec::new();
    for kind in kinds {
        match kind {
            KindArg::HalfSine => shapes.push(PulseShape::half_sine(T)),
            KindArg::Sfsk => shapes.push(PulseShape::sfsk(T)),
            KindArg::AlphaHalfSine => {
                if alphas.is_empty() {
                    return bad("--alpha list is empty");
                }
                for &a in &alphas {
                    if !(a.is_finite() && a > 0.0) {
                        return bad(format!("--alpha values must be positive, got {a}"));
                    }
                    shapes.push(PulseShape::alpha_half_sine(a, T));
                }
            }
        }
    }
    let mut out: Vec<PulseShape> = Vec::new();
    for s in shapes {
        let s = s.map_err(|e| ConfigError(e.to_string()))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn samples_after_chain(pairs: usize, n: usize, lpf: Option<&LpfParams>) -> (usize, usize) {
    let len = pairs * n + n / 2;
    match lpf {
        Some(l) => (
            (len - 1) * l.interp_n0 + l.taps.len(),
            2 * (l.half_length_k + n * l.interp_n0),
        ),
        None => (len, 2 * n),
    }
}

impl RunConfig {
    pub fn from_command(cmd: &Command) -> Result<RunConfig, ConfigError> {
        let flags = cmd.opts().clone();
        let file = load_file(&flags)?;
        let opts = flags.or(file);
        let name = cmd.name();

        let shapes = resolve_shapes(name, &opts)?;
        let custom = match (&opts.custom_g, opts.parity) {
            (Some(path), parity) => {
                if name != "verify" {
                    return bad("--custom-g is only supported by verify");
                }
                let parity = match parity {
                    Some(ParityArg::Even) => Parity::Even,
                    Some(ParityArg::Odd) => Parity::Odd,
                    Some(ParityArg::Unknown) | None => Parity::Unknown,
                };
                if !path.is_file() {
                    return bad(format!("--custom-g file {} does not exist", path.display()));
                }
                Some(CustomPhase {
                    path: path.clone(),
                    parity,
                })
            }
            (None, Some(_)) => return bad("--parity requires --custom-g"),
            (None, None) => None,
        };
        if shapes.is_empty() && custom.is_none() {
            return bad("no shapes selected");
        }

        let dt = positive("dt", opts.dt.unwrap_or(spectral::default_dt(T)))?;
        if dt > T / spectral::MIN_STEPS_PER_T {
            return bad(format!(
                "--dt {dt} is coarser than T/{} = {}; quadrature would be imprecise",
                spectral::MIN_STEPS_PER_T,
                T / spectral::MIN_STEPS_PER_T
            ));
        }
        let domega_norm = positive("domega", opts.domega.unwrap_or(DEFAULT_DF_NORMALIZED))?;
        let wmax_norm = positive("wmax", opts.wmax.unwrap_or(DEFAULT_WMAX_NORMALIZED))?;
        let f_max = positive("fmax", opts.fmax.unwrap_or(DEFAULT_FMAX))?;
        let w_step = positive("wstep", opts.wstep.unwrap_or(DEFAULT_WSTEP))?;
        if domega_norm > wmax_norm {
            return bad(format!("--domega {domega_norm} exceeds --wmax {wmax_norm}"));
        }
        if w_step > wmax_norm {
            return bad(format!("--wstep {w_step} exceeds --wmax {wmax_norm}"));
        }
        if domega_norm > f_max {
            return bad(format!("--domega {domega_norm} exceeds --fmax {f_max}"));
        }
        let spectral = SpectralControls {
            dt,
            domega: spectral::angular_frequency(domega_norm, T),
            w_max: spectral::angular_frequency(wmax_norm, T),
            f_max,
            w_step,
        };

        let n_values = opts.n.clone().unwrap_or_else(|| oqpsk::DEFAULT_N_VALUES.to_vec());
        if n_values.is_empty() {
            return bad("--n list is empty");
        }
        if let Some(&odd) = n_values.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return bad(format!(
                "--n {odd} is invalid: N must be even and >= 4 because the quadrature branch is \
                 offset by T = N/2 samples"
            ));
        }
        let lpf = if opts.no_lpf.unwrap_or(false) {
            None
        } else {
            let n0 = opts.n0.unwrap_or(oqpsk::DEFAULT_N0);
            let k = opts.k.unwrap_or(oqpsk::DEFAULT_K);
            Some(oqpsk::lpf_taps(n0, k).map_err(|e| ConfigError(format!("--n0/--k: {e}")))?)
        };
        if opts.bits_file.is_some() && (opts.bits.is_some() || opts.seed.is_some()) {
            return bad("--bits-file cannot be combined with --bits or --seed");
        }
        let bits = match &opts.bits_file {
            Some(path) => {
                if !path.is_file() {
                    return bad(format!("--bits-file {} does not exist", path.display()));
                }
                BitSource::File(path.clone())
            }
            None => {
                let count = opts.bits.unwrap_or(2 * oqpsk::DEFAULT_SYMBOL_PAIRS);
                check_bit_count(count, &n_values, lpf.as_ref())?;
                BitSource::Generated {
                    count,
                    seed: opts.seed.unwrap_or(oqpsk::DEFAULT_SEED),
                }
            }
        };

        let grid_points = opts.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 16 {
            return bad(format!("--grid-points must be >= 16, got {grid_points}"));
        }
        let ce_tol = positive("ce-tol", opts.ce_tol.unwrap_or(DEFAULT_CE_TOLERANCE))?;
        let smooth_tol = positive("smooth-tol", opts.smooth_tol.unwrap_or(DEFAULT_SMOOTH_TOLERANCE))?;

        Ok(RunConfig {
            command: name,
            shapes,
            custom,
            spectral,
            sweep: SweepControls {
                n_values,
                lpf,
                bits,
                export_bits: opts.export_bits.clone(),
            },
            grid_points,
            ce_tol,
            smooth_tol,
            out: opts.out.clone(),
            format: match opts.format {
                Some(FormatArg::Json) => Format::Json,
                _ => Format::Csv,
            },
        })
    }
}

/// Checks that every sweep cell leaves enough samples for PAPR.
pub fn check_bit_count(count: usize, n_values: &[usize], lpf: Option<&LpfParams>) -> Result<(), ConfigError> {
    if count < 2 || count % 2 != 0 {
        return bad(format!("--bits must be a positive even number, got {count}"));
    }
    for &n in n_values {
        let (len, discard) = samples_after_chain(count / 2, n, lpf);
        let kept = len.saturating_sub(2 * discard);
        if kept < oqpsk::MIN_PAPR_SAMPLES {
            return bad(format!(
                "--bits {count} is too short for N = {n}: {kept} samples remain after edge removal, \
                 {} are required",
                oqpsk::MIN_PAPR_SAMPLES
            ));
        }
    }
    Ok(())
}
