//! Pulse shaping filters of the form `h(t) = cos g(t)` on `(-T, T)`.
//!
//! Three built-in phase functions are provided:
//!
//! * half-sine: `g(t) = πt / 2T`
//! * SFSK: `g(t) = πt / 2T - sin(2πt / T) / 4`
//! * α-half-sine: a two-piece power law in `|t|` joined at `|t| = T/2`,
//!   which reduces to the half-sine pulse at `α = 1`.
//!
//! [`verify_ce`] checks the constant-envelope identity
//! `h²(t) + h²(t - T) = 1` on `(0, T)` for any [`PhaseFunction`], and
//! [`classify_smoothness`] estimates `g'(T⁻)`, which must vanish for the
//! pulse to have a continuous derivative.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default tolerance on `|h²(t) + h²(t - T) - 1|`.
pub const DEFAULT_CE_TOLERANCE: f64 = 1e-9;
/// Default tolerance on `|g'(T⁻)|` for a pulse to count as smooth.
pub const DEFAULT_SMOOTH_TOLERANCE: f64 = 1e-6;

/// Continuity constant of the α-half-sine phase, `β = (π/2)(4/π)^(1/α)`.
///
/// With this choice both branches of the phase function equal `π/4` at
/// `|t| = T/2`.
pub fn beta_of_alpha(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return domain(format!("alpha must be positive and finite, got {alpha}"));
    }
    Ok(FRAC_PI_2 * (4.0 / PI).powf(1.0 / alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeKind {
    HalfSine,
    Sfsk,
    AlphaHalfSine { alpha: f64 },
}

impl ShapeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::HalfSine => "half-sine",
            ShapeKind::Sfsk => "sfsk",
            ShapeKind::AlphaHalfSine { .. } => "alpha-half-sine",
        }
    }
}

/// One pulse shaping filter, supported on `(-T, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    #[serde(flatten)]
    kind: ShapeKind,
    half_support: f64,
    // cached continuity constant; unused unless kind is AlphaHalfSine
    #[serde(skip)]
    beta: f64,
}

impl PulseShape {
    /// Builds a shape, validating `T > 0` and, for the α-half-sine kind,
    /// `α > 0`. Values `α ≤ 1` are accepted; they give a pulse whose
    /// derivative is discontinuous at `±T` (see [`classify_smoothness`]).
    pub fn new(kind: ShapeKind, half_support: f64) -> Result<Self> {
        if !half_support.is_finite() || half_support <= 0.0 {
            return domain(format!(
                "half support T must be positive and finite, got {half_support}"
            ));
        }
        let beta = match kind {
            ShapeKind::AlphaHalfSine { alpha } => beta_of_alpha(alpha)?,
            _ => 0.0,
        };
        Ok(PulseShape {
            kind,
            half_support,
            beta,
        })
    }

    pub fn half_sine(half_support: f64) -> Result<Self> {
        Self::new(ShapeKind::HalfSine, half_support)
    }

    pub fn sfsk(half_support: f64) -> Result<Self> {
        Self::new(ShapeKind::Sfsk, half_support)
    }

    pub fn alpha_half_sine(alpha: f64, half_support: f64) -> Result<Self> {
        Self::new(ShapeKind::AlphaHalfSine { alpha }, half_support)
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            ShapeKind::AlphaHalfSine { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// The half support `T`; the pulse vanishes for `|t| ≥ T`.
    pub fn half_support(&self) -> f64 {
        self.half_support
    }

    /// Phase `g(t)` for `|t| < T`.
    pub fn phase(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t.abs() >= self.half_support {
            return domain(format!(
                "phase is defined on (-T, T) = (-{T}, {T}), got t = {t}",
                T = self.half_support
            ));
        }
        Ok(self.phase_unchecked(t))
    }

    pub(crate) fn phase_unchecked(&self, t: f64) -> f64 {
        let big_t = self.half_support;
        match self.kind {
            ShapeKind::HalfSine => PI * t / (2.0 * big_t),
            ShapeKind::Sfsk => PI * t / (2.0 * big_t) - 0.25 * (2.0 * PI * t / big_t).sin(),
            ShapeKind::AlphaHalfSine { alpha } => {
                let a = t.abs();
                let scale = PI / (self.beta * big_t);
                if a <= 0.5 * big_t {
                    (scale * a).powf(alpha)
                } else {
                    FRAC_PI_2 - (scale * (big_t - a)).powf(alpha)
                }
            }
        }
    }

    /// Pulse value `h(t) = cos g(t)` inside the support and exactly zero
    /// for `|t| ≥ T`.
    pub fn pulse(&self, t: f64) -> f64 {
        if t.abs() >= self.half_support || t.is_nan() {
            0.0
        } else {
            self.phase_unchecked(t).cos()
        }
    }

    /// Samples the pulse at `t_m = -T + 2mT/N` for `m = 0..N`.
    ///
    /// The grid starts at `-T` (where the pulse is zero) and stops one step
    /// short of `+T`, so consecutive copies spaced `N` samples apart tile
    /// the time axis without overlap.
    pub fn sample(&self, interp_n: usize) -> Result<Vec<f64>> {
        if interp_n < 2 {
            return domain(format!("interpolation multiple N must be >= 2, got {interp_n}"));
        }
        let big_t = self.half_support;
        let step = 2.0 * big_t / interp_n as f64;
        Ok((0..interp_n)
            .map(|m| self.pulse(-big_t + m as f64 * step))
            .collect())
    }

    /// The phase function of this shape, with its exact parity.
    pub fn phase_function(&self) -> PhaseFunction {
        let parity = match self.kind {
            ShapeKind::HalfSine | ShapeKind::Sfsk => Parity::Odd,
            ShapeKind::AlphaHalfSine { .. } => Parity::Even,
        };
        PhaseFunction {
            source: PhaseSource::Shape(*self),
            parity,
            half_support: self.half_support,
        }
    }
}

impl fmt::Display for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ShapeKind::AlphaHalfSine { alpha } => write!(f, "alpha-half-sine(alpha={alpha})"),
            k => f.write_str(k.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Unknown,
}

#[derive(Clone)]
enum PhaseSource {
    Shape(PulseShape),
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Table(Table),
}

/// Piecewise-linear table, linearly extrapolated past either end.
#[derive(Debug, Clone)]
struct Table {
    t: Vec<f64>,
    g: Vec<f64>,
}

impl Table {
    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        // index of the segment [t[i], t[i+1]] used for x
        let i = match self.t.partition_point(|&ti| ti <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let (g0, g1) = (self.g[i], self.g[i + 1]);
        g0 + (g1 - g0) * (x - t0) / (t1 - t0)
    }
}

/// A phase function `g(t)` on `(-T, T)` with a declared parity.
///
/// Built-in shapes and closures are evaluated directly on the whole
/// interval. Tables that carry no negative abscissae are extended to
/// negative arguments through the declared parity.
#[derive(Clone)]
pub struct PhaseFunction {
    source: PhaseSource,
    parity: Parity,
    half_support: f64,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            PhaseSource::Shape(s) => format!("{s}"),
            PhaseSource::Func(_) => "closure".to_string(),
            PhaseSource::Table(t) => format!("table[{}]", t.t.len()),
        };
        f.debug_struct("PhaseFunction")
            .field("source", &src)
            .field("parity", &self.parity)
            .field("half_support", &self.half_support)
            .finish()
    }
}

impl PhaseFunction {
    pub fn from_fn<F>(g: F, parity: Parity, half_support: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_half_support(half_support)?;
        Ok(PhaseFunction {
            source: PhaseSource::Func(Arc::new(g)),
            parity,
            half_support,
        })
    }

    /// Builds a tabulated phase function from `(t, g)` pairs. Points are
    /// sorted by `t`; at least two distinct abscissae are required.
    pub fn from_table(points: &[(f64, f64)], parity: Parity, half_support: f64) -> Result<Self> {
        check_half_support(half_support)?;
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        if pts.iter().any(|(t, g)| !t.is_finite() || !g.is_finite()) {
            return domain("phase table contains non-finite values");
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < 2 {
            return domain("phase table needs at least two distinct abscissae");
        }
        let (t, g) = pts.into_iter().unzip();
        Ok(PhaseFunction {
            source: PhaseSource::Table(Table { t, g }),
            parity,
            half_support,
        })
    }

    /// Reads a two-column `t,g` CSV. A non-numeric first row is taken as a
    /// header and skipped.
    pub fn from_csv_reader<R: Read>(reader: R, parity: Parity, half_support: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("row {}: expected two columns", row + 1)));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(g)) => points.push((t, g)),
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "row {}: cannot parse '{}', '{}' as numbers",
                        row + 1,
                        &rec[0],
                        &rec[1]
                    )))
                }
            }
        }
        Self::from_table(&points, parity, half_support)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, parity: Parity, half_support: f64) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, parity, half_support)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn half_support(&self) -> f64 {
        self.half_support
    }

    /// True when the source provides values for negative arguments itself.
    fn covers_negative(&self) -> bool {
        match &self.source {
            PhaseSource::Table(tab) => tab.t[0] < 0.0,
            _ => true,
        }
    }

    fn eval_raw(&self, t: f64) -> f64 {
        match &self.source {
            PhaseSource::Shape(s) => s.phase_unchecked(t),
            PhaseSource::Func(f) => f(t),
            PhaseSource::Table(tab) => tab.eval(t),
        }
    }

    /// Evaluates `g(t)`. For tables without negative abscissae, negative
    /// arguments are reflected through the declared parity.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 && !self.covers_negative() {
            match self.parity {
                Parity::Even => return self.eval_raw(-t),
                Parity::Odd => return -self.eval_raw(-t),
                Parity::Unknown => {}
            }
        }
        self.eval_raw(t)
    }
}

fn check_half_support(half_support: f64) -> Result<()> {
    if !half_support.is_finite() || half_support <= 0.0 {
        return domain(format!(
            "half support T must be positive and finite, got {half_support}"
        ));
    }
    Ok(())
}

/// Outcome of the constant-envelope check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeReport {
    /// `max |cos²g(t) + cos²g(t - T) - 1|` over the grid.
    pub max_deviation: f64,
    /// `k` when `g(t) + g(T - t)` is the constant `(2k + 1)π/2` on the grid.
    pub detected_k: Option<i64>,
    /// Whether `cos g(t) → 0` as `t → T⁻`.
    pub endpoint_ok: bool,
    /// Parity used to extend `g` to negative arguments.
    pub parity_used: Parity,
    pub passed: bool,
}

fn round_to_odd(x: f64) -> f64 {
    2.0 * ((x - 1.0) / 2.0).round() + 1.0
}

/// Checks `cos²g(t) + cos²g(t - T) = 1` on `grid_points` uniformly spaced
/// interior points of `(0, T)`.
///
/// The parity declaration is cross-checked against the values of `g` at
/// `±t` whenever the source covers negative arguments. An `Unknown` parity
/// is inferred from the same evidence; if neither parity fits, or a declared
/// parity is contradicted, a [`Error::Parity`] is returned.
///
/// `passed` depends only on the envelope identity. `detected_k` reports
/// whether `g(t) + g(T - t)` is a constant odd multiple of `π/2`, which is a
/// sufficient condition and therefore informative only.
pub fn verify_ce(g: &PhaseFunction, grid_points: usize, ce_tolerance: f64) -> Result<CeReport> {
    if grid_points < 16 {
        return domain(format!("grid_points must be >= 16, got {grid_points}"));
    }
    if !ce_tolerance.is_finite() || ce_tolerance <= 0.0 {
        return domain(format!("ce_tolerance must be positive, got {ce_tolerance}"));
    }
    let big_t = g.half_support;
    let grid: Vec<f64> = (1..=grid_points)
        .map(|i| big_t * i as f64 / (grid_points + 1) as f64)
        .collect();

    let parity = resolve_parity(g, &grid, ce_tolerance)?;
    let sign = match parity {
        Parity::Odd => -1.0,
        _ => 1.0,
    };

    let mut max_deviation = 0.0f64;
    let mut s_values = Vec::with_capacity(grid.len());
    for &t in &grid {
        let g_t = g.eval(t);
        let g_mirror = g.eval(big_t - t);
        // g(t - T) = ±g(T - t)
        let g_shift = sign * g_mirror;
        let dev = (g_t.cos().powi(2) + g_shift.cos().powi(2) - 1.0).abs();
        if !dev.is_finite() {
            return domain(format!("phase function is not finite at t = {t}"));
        }
        max_deviation = max_deviation.max(dev);
        s_values.push((g_t + g_mirror) * 2.0 / PI);
    }

    let mean_s = s_values.iter().sum::<f64>() / s_values.len() as f64;
    let odd = round_to_odd(mean_s);
    let spread = s_values
        .iter()
        .map(|s| (s - odd).abs())
        .fold(0.0f64, f64::max);
    let detected_k = (spread <= ce_tolerance).then(|| ((odd - 1.0) / 2.0) as i64);

    // cos g(T⁻), linearly extrapolated from two points just inside the edge
    let delta = 1e-8;
    let near = g.eval(big_t * (1.0 - delta)).cos();
    let nearer = g.eval(big_t * (1.0 - 2.0 * delta)).cos();
    let endpoint_ok = (2.0 * near - nearer).abs() <= ce_tolerance;

    Ok(CeReport {
        max_deviation,
        detected_k,
        endpoint_ok,
        parity_used: parity,
        passed: max_deviation <= ce_tolerance,
    })
}

fn resolve_parity(g: &PhaseFunction, grid: &[f64], tol: f64) -> Result<Parity> {
    if !g.covers_negative() {
        return match g.parity {
            Parity::Unknown => Err(Error::Parity(
                "parity is unknown and the phase table has no negative abscissae".into(),
            )),
            p => Ok(p),
        };
    }
    let mut even_err = 0.0f64;
    let mut odd_err = 0.0f64;
    let mut scale = 1.0f64;
    for &t in grid {
        let (pos, neg) = (g.eval_raw(t), g.eval_raw(-t));
        even_err = even_err.max((pos - neg).abs());
        odd_err = odd_err.max((pos + neg).abs());
        scale = scale.max(pos.abs()).max(neg.abs());
    }
    let tol = tol * scale;
    let even = even_err <= tol;
    let odd = odd_err <= tol;
    match g.parity {
        Parity::Even if even => Ok(Parity::Even),
        Parity::Odd if odd => Ok(Parity::Odd),
        Parity::Even | Parity::Odd => Err(Error::Parity(format!(
            "declared {:?} parity contradicted by values (even residual {even_err:.3e}, odd residual {odd_err:.3e})",
            g.parity
        ))),
        Parity::Unknown if even => Ok(Parity::Even),
        Parity::Unknown if odd => Ok(Parity::Odd),
        Parity::Unknown => Err(Error::Parity(format!(
            "g is neither even nor odd (even residual {even_err:.3e}, odd residual {odd_err:.3e})"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothnessClass {
    Smooth,
    CornerAtEdge,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessVerdict {
    pub class: SmoothnessClass,
    /// Estimate of `lim g'(t)` as `t → T⁻`; `+∞` when divergent.
    pub edge_derivative_limit: f64,
}

pub fn classify_smoothness(shape: &PulseShape) -> SmoothnessVerdict {
    classify_phase_smoothness(&shape.phase_function(), DEFAULT_SMOOTH_TOLERANCE)
}

/// Estimates `g'(T⁻)` from central differences at `T - ε_j`,
/// `ε_j = T·10^(-3-j)` for `j = 0..=5`.
///
/// * Divergent: the estimates grow monotonically by an overall factor ≥ 2.
/// * Decaying: the estimates shrink monotonically by an overall factor ≥ 2;
///   the limit is taken from Aitken extrapolation of the last three.
/// * Otherwise the last estimate is the limit.
///
/// The result is Smooth iff `|limit| ≤ smooth_tolerance`.
pub fn classify_phase_smoothness(g: &PhaseFunction, smooth_tolerance: f64) -> SmoothnessVerdict {
    let big_t = g.half_support;
    let estimates: Vec<f64> = (0..6)
        .map(|j| {
            let eps = big_t * 10f64.powi(-3 - j);
            let h = eps / 4.0;
            let t = big_t - eps;
            (g.eval(t + h) - g.eval(t - h)) / (2.0 * h)
        })
        .collect();
    let mags: Vec<f64> = estimates.iter().map(|d| d.abs()).collect();
    let first = mags[0];
    let last = *mags.last().unwrap();

    let increasing = mags.windows(2).all(|w| w[1] > w[0]);
    let decreasing = mags.windows(2).all(|w| w[1] < w[0]);

    if increasing && last >= 2.0 * first {
        return SmoothnessVerdict {
            class: SmoothnessClass::Divergent,
            edge_derivative_limit: f64::INFINITY,
        };
    }

    let limit = if decreasing && last <= 0.5 * first {
        let n = estimates.len();
        let (a, b, c) = (estimates[n - 3], estimates[n - 2], estimates[n - 1]);
        let denom = (c - b) - (b - a);
        let extrapolated = if denom != 0.0 {
            c - (c - b).powi(2) / denom
        } else {
            c
        };
        // the limit of a monotonically shrinking sequence lies between 0 and its last term
        if !extrapolated.is_finite() || extrapolated.abs() > c.abs() {
            c
        } else if extrapolated * c < 0.0 {
            0.0
        } else {
            extrapolated
        }
    } else {
        *estimates.last().unwrap()
    };

    let class = if limit.abs() <= smooth_tolerance {
        SmoothnessClass::Smooth
    } else {
        SmoothnessClass::CornerAtEdge
    };
    SmoothnessVerdict {
        class,
        edge_derivative_limit: limit,
    }
}
