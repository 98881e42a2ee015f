//! Pulse spectra by trapezoidal quadrature, power spectra and out-of-band
//! leakage.
//!
//! Angular frequency `ω` is used throughout this module. User-facing output
//! uses normalized frequency `fT = ωT / 2π`; see [`normalized_frequency`].

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::psf::PulseShape;

/// Samples per half support in the default time step, `dt = T / 4096`.
pub const DEFAULT_STEPS_PER_T: f64 = 4096.0;
/// Default frequency step in normalized units, `Δω = 2π·0.005 / T`.
pub const DEFAULT_DF_NORMALIZED: f64 = 0.005;
/// Default truncation bandwidth in normalized units, `W_m = 200π / T`.
pub const DEFAULT_WMAX_NORMALIZED: f64 = 100.0;
/// Coarsest time step accepted is `T / 64`.
pub const MIN_STEPS_PER_T: f64 = 64.0;

// phasor recurrence is reseeded with an exact sin_cos this often
const RESEED_EVERY: usize = 64;

pub fn default_dt(half_support: f64) -> f64 {
    half_support / DEFAULT_STEPS_PER_T
}

pub fn default_domega(half_support: f64) -> f64 {
    2.0 * PI * DEFAULT_DF_NORMALIZED / half_support
}

pub fn default_w_max(half_support: f64) -> f64 {
    2.0 * PI * DEFAULT_WMAX_NORMALIZED / half_support
}

pub fn normalized_frequency(omega: f64, half_support: f64) -> f64 {
    omega * half_support / (2.0 * PI)
}

pub fn angular_frequency(f_normalized: f64, half_support: f64) -> f64 {
    2.0 * PI * f_normalized / half_support
}

/// `ω_k = k·Δω` for `k = -m..=m`, where `m = round(w_max / Δω)`.
///
/// The grid is exactly symmetric about zero. Its outermost point is
/// `m·Δω`, which may differ from `w_max` by less than `Δω/2`.
pub fn symmetric_grid(w_max: f64, domega: f64) -> Result<Vec<f64>> {
    if !(w_max.is_finite() && w_max > 0.0 && domega.is_finite() && domega > 0.0) {
        return domain(format!(
            "w_max and domega must be positive, got w_max = {w_max}, domega = {domega}"
        ));
    }
    let m = (w_max / domega).round() as i64;
    if m < 1 {
        return domain(format!("domega = {domega} exceeds w_max = {w_max}"));
    }
    Ok((-m..=m).map(|k| k as f64 * domega).collect())
}

/// Spectrum `H(ω)` on a frequency grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSamples {
    pub omega_grid: Vec<f64>,
    /// Real part of `H(ω)`.
    pub values: Vec<f64>,
    /// Largest `|Im H(ω)|` seen; zero for an exactly even pulse.
    pub max_imag_residual: f64,
    pub dt_used: f64,
}

/// Trapezoidal approximation of `H(ω) = ∫ h(t) e^{-jωt} dt` over `[-T, T]`.
///
/// The time grid has `n = ceil(2T / dt)` intervals, so `dt_used ≤ dt`. The
/// full complex sum is evaluated: terms at `±t` are paired, giving
/// `Re H = Σ w(h(t) + h(-t)) cos ωt` and `Im H = Σ w(h(-t) - h(t)) sin ωt`,
/// and the imaginary part is reported as `max_imag_residual`.
pub fn transform(shape: &PulseShape, omega_grid: &[f64], dt: f64) -> Result<SpectrumSamples> {
    let big_t = shape.half_support();
    if !dt.is_finite() || dt <= 0.0 {
        return domain(format!("dt must be positive, got {dt}"));
    }
    if dt > big_t / MIN_STEPS_PER_T {
        return Err(Error::Precision(format!(
            "dt = {dt} is coarser than T/{MIN_STEPS_PER_T} = {}",
            big_t / MIN_STEPS_PER_T
        )));
    }
    if let Some(bad) = omega_grid.iter().find(|w| !w.is_finite()) {
        return domain(format!("frequency grid contains non-finite value {bad}"));
    }
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("frequency grid must be strictly increasing");
    }

    let n = (2.0 * big_t / dt - 1e-9).ceil().max(2.0) as usize;
    let n = n + (n % 2); // keep t = 0 on the grid
    let dt_used = 2.0 * big_t / n as f64;
    let half = n / 2;

    // pair i (t = -u_i) with n - i (t = +u_i), u_i = T - i·dt
    let mut sums = Vec::with_capacity(half);
    let mut diffs = Vec::with_capacity(half);
    for i in 0..half {
        let w = if i == 0 { 0.5 } else { 1.0 };
        let neg = shape.pulse(-big_t + i as f64 * dt_used);
        let pos = shape.pulse(-big_t + (n - i) as f64 * dt_used);
        sums.push(w * (neg + pos));
        diffs.push(w * (neg - pos));
    }
    let centre = shape.pulse(0.0);

    let mut cache: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut values = Vec::with_capacity(omega_grid.len());
    let mut max_imag = 0.0f64;
    for &omega in omega_grid {
        let mag = omega.abs();
        let (re, im) = *cache.entry(mag.to_bits()).or_insert_with(|| {
            paired_sum(&sums, &diffs, centre, mag, big_t, dt_used)
        });
        // Re H is even in ω and Im H odd
        let im = if omega < 0.0 { -im } else { im };
        values.push(re * dt_used);
        max_imag = max_imag.max((im * dt_used).abs());
    }

    Ok(SpectrumSamples {
        omega_grid: omega_grid.to_vec(),
        values,
        max_imag_residual: max_imag,
        dt_used,
    })
}

fn paired_sum(sums: &[f64], diffs: &[f64], centre: f64, omega: f64, big_t: f64, dt: f64) -> (f64, f64) {
    // e^{jω u_i} with u_i = T - i·dt, advanced by e^{-jω dt}
    let (step_im, step_re) = (-omega * dt).sin_cos();
    let mut re = centre;
    let mut im = 0.0;
    let (mut c, mut s) = (0.0, 0.0);
    for (i, (&hs, &hd)) in sums.iter().zip(diffs).enumerate() {
        if i % RESEED_EVERY == 0 {
            let (si, co) = (omega * (big_t - i as f64 * dt)).sin_cos();
            s = si;
            c = co;
        } else {
            let nc = c * step_re - s * step_im;
            s = s * step_re + c * step_im;
            c = nc;
        }
        re += hs * c;
        im += hd * s;
    }
    (re, im)
}

/// Closed-form spectrum of the half-sine pulse,
/// `H(ω) = (π/T) cos ωT / (π²/4T² - ω²)`.
///
/// Within `1e-6 / T` of the removable singularity `|ω| = π/2T` the
/// first-order expansion `T(1 - δT/π)`, `δ = |ω| - π/2T`, is returned.
pub fn half_sine_spectrum_closed_form(omega: f64, half_support: f64) -> f64 {
    let big_t = half_support;
    let w0 = PI / (2.0 * big_t);
    let delta = omega.abs() - w0;
    if delta.abs() < 1e-6 / big_t {
        return big_t * (1.0 - delta * big_t / PI);
    }
    (PI / big_t) * (omega * big_t).cos() / (w0 * w0 - omega * omega)
}

/// Elementwise `|H(ω)|²`.
pub fn power_spectrum(spec: &SpectrumSamples) -> Vec<f64> {
    spec.values.iter().map(|h| h * h).collect()
}

/// `10·log10(p)` clipped below at `floor_db`.
pub fn power_db(p: f64, floor_db: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(floor_db)
    } else {
        floor_db
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEnergy {
    pub energy: f64,
    /// The grid point `W` was snapped to.
    pub snapped_w: f64,
    /// `|snapped_w - W|`, at most half a grid step.
    pub snap_distance: f64,
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return domain("frequency grid needs at least two points");
    }
    let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let worst = grid
        .windows(2)
        .map(|w| ((w[1] - w[0]) - step).abs())
        .fold(0.0f64, f64::max);
    if !(step > 0.0) || worst > 1e-9 * step.max(grid[grid.len() - 1].abs() * 1e-6) {
        return domain("frequency grid must be uniform and increasing");
    }
    Ok(step)
}

/// Trapezoidal `∫ |H(ω)|² dω` over `[-W, W]`, with both limits snapped to the
/// nearest grid points.
pub fn band_energy(spec: &SpectrumSamples, w: f64) -> Result<BandEnergy> {
    let grid = &spec.omega_grid;
    let step = uniform_step(grid)?;
    if !w.is_finite() || w < 0.0 {
        return domain(format!("bandwidth W must be non-negative, got {w}"));
    }
    let (lo_edge, hi_edge) = (grid[0], grid[grid.len() - 1]);
    let slack = 0.5 * step;
    if w > hi_edge + slack || -w < lo_edge - slack {
        return domain(format!(
            "W = {w} exceeds the frequency grid [{lo_edge}, {hi_edge}]"
        ));
    }
    let last = grid.len() - 1;
    let snap = |x: f64| (((x - lo_edge) / step).round().max(0.0) as usize).min(last);
    let (lo, hi) = (snap(-w), snap(w));
    let energy = if hi > lo {
        let p: Vec<f64> = spec.values[lo..=hi].iter().map(|h| h * h).collect();
        let inner: f64 = p[1..p.len() - 1].iter().sum();
        step * (inner + 0.5 * (p[0] + p[p.len() - 1]))
    } else {
        0.0
    };
    let snapped_w = grid[hi];
    Ok(BandEnergy {
        energy,
        snapped_w,
        snap_distance: (snapped_w - w).abs(),
    })
}

/// Out-of-band leakage `R_o(W) = 1 - E(W) / E(W_m)`.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageCurve {
    pub bandwidth_grid: Vec<f64>,
    pub leakage: Vec<f64>,
    pub snap_distances: Vec<f64>,
    /// Requested truncation bandwidth `W_m`.
    pub w_max: f64,
    pub total_energy: f64,
    pub dt_used: f64,
    pub domega: f64,
    pub max_imag_residual: f64,
}

impl LeakageCurve {
    pub fn max_snap_distance(&self) -> f64 {
        self.snap_distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Computes the leakage at every `W` in `w_grid` from a single spectrum on
/// the symmetric grid of step `domega` over `[-w_max, w_max]`.
pub fn leakage_curve(
    shape: &PulseShape,
    w_grid: &[f64],
    w_max: f64,
    dt: f64,
    domega: f64,
) -> Result<LeakageCurve> {
    if w_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("bandwidth grid must be strictly increasing");
    }
    if let Some(bad) = w_grid.iter().find(|&&w| !(0.0..=w_max).contains(&w)) {
        return domain(format!("bandwidth {bad} is outside [0, w_max = {w_max}]"));
    }
    let omega = symmetric_grid(w_max, domega)?;
    let spec = transform(shape, &omega, dt)?;
    let total = band_energy(&spec, w_max)?;
    if !(total.energy > 0.0) {
        return domain("total spectral energy is zero");
    }
    let mut leakage = Vec::with_capacity(w_grid.len());
    let mut snaps = Vec::with_capacity(w_grid.len());
    for &w in w_grid {
        let e = band_energy(&spec, w)?;
        leakage.push((1.0 - e.energy / total.energy).clamp(0.0, 1.0));
        snaps.push(e.snap_distance);
    }
    Ok(LeakageCurve {
        bandwidth_grid: w_grid.to_vec(),
        leakage,
        snap_distances: snaps,
        w_max,
        total_energy: total.energy,
        dt_used: spec.dt_used,
        domega,
        max_imag_residual: spec.max_imag_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hs() -> PulseShape {
        PulseShape::half_sine(1.0).unwrap()
    }

    /// Independent reference: direct cosine-form trapezoid with exact trig.
    fn direct_trapezoid(shape: &PulseShape, omega: f64, n: usize) -> f64 {
        let big_t = shape.half_support();
        let dt = 2.0 * big_t / n as f64;
        (0..=n)
            .map(|i| {
                let t = -big_t + i as f64 * dt;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * shape.pulse(t) * (omega * t).cos()
            })
            .sum::<f64>()
            * dt
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(half_sine_spectrum_closed_form(0.0, 1.0), 4.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(half_sine_spectrum_closed_form(PI / 2.0, 1.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            half_sine_spectrum_closed_form(PI, 1.0),
            0.424_413_181_578_387_6,
            epsilon = 1e-12
        );
        // continuity across the guard band
        for d in [1.1e-6, 2e-6, 1e-5] {
            for sign in [-1.0, 1.0] {
                let w = PI / 2.0 + sign * d;
                let inside = 1.0 * (1.0 - sign * d / PI);
                assert_abs_diff_eq!(half_sine_spectrum_closed_form(w, 1.0), inside, epsilon = 1e-9);
            }
        }
        assert_abs_diff_eq!(half_sine_spectrum_closed_form(-PI / 4.0, 2.0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn transform_examples() {
        let spec = transform(&hs(), &[-PI / 2.0, 0.0, PI / 2.0], 1.0 / 4096.0).unwrap();
        assert_abs_diff_eq!(spec.values[1], 4.0 / PI, epsilon = 1e-6);
        assert_abs_diff_eq!(spec.values[2], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(spec.values[0], spec.values[2], epsilon = 1e-10);
        assert!(spec.max_imag_residual <= 1e-10 * 4.0 / PI);
        let p = power_spectrum(&spec);
        assert_abs_diff_eq!(p[1], 1.621_138_938_277_404_4, epsilon = 1e-5);
    }

    #[test]
    fn transform_matches_direct_trapezoid() {
        for shape in [
            hs(),
            PulseShape::sfsk(1.0).unwrap(),
            PulseShape::alpha_half_sine(2.5, 0.5).unwrap(),
        ] {
            let big_t = shape.half_support();
            let grid: Vec<f64> = (0..40).map(|k| k as f64 * 1.37 / big_t).collect();
            let spec = transform(&shape, &grid, big_t / 1024.0).unwrap();
            for (w, v) in grid.iter().zip(&spec.values) {
                assert_abs_diff_eq!(*v, direct_trapezoid(&shape, *w, 2048), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn transform_rejects_coarse_dt() {
        let err = transform(&hs(), &[0.0], 1.0 / 32.0).unwrap_err();
        assert!(matches!(err, Error::Precision(_)));
        assert!(transform(&hs(), &[0.0], 1.0 / 64.0).is_ok());
        assert!(transform(&hs(), &[1.0, 0.0], 1.0 / 64.0).is_err());
        assert!(transform(&hs(), &[f64::NAN], 1.0 / 64.0).is_err());
        assert!(transform(&hs(), &[0.0], 0.0).is_err());
    }

    #[test]
    fn spectra_are_even() {
        for shape in [hs(), PulseShape::sfsk(1.0).unwrap(), PulseShape::alpha_half_sine(3.0, 1.0).unwrap()] {
            let grid = symmetric_grid(30.0, 0.37).unwrap();
            let spec = transform(&shape, &grid, 1.0 / 1024.0).unwrap();
            let n = grid.len();
            for k in 0..n / 2 {
                assert_abs_diff_eq!(spec.values[k], spec.values[n - 1 - k], epsilon = 1e-10);
            }
            let peak = spec.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(spec.max_imag_residual <= 1e-10 * peak);
        }
    }

    #[test]
    fn band_energy_basics() {
        let grid = symmetric_grid(40.0 * PI, 0.01 * PI).unwrap();
        let spec = transform(&hs(), &grid, 1.0 / 1024.0).unwrap();
        assert_eq!(band_energy(&spec, 0.0).unwrap().energy, 0.0);
        let mut prev = 0.0;
        for k in 0..=40 {
            let e = band_energy(&spec, k as f64 * PI).unwrap();
            assert!(e.energy >= prev);
            assert!(e.snap_distance <= 0.005 * PI + 1e-12);
            prev = e.energy;
        }
        assert!(band_energy(&spec, 41.0 * PI).is_err());
        assert!(band_energy(&spec, -1.0).is_err());
    }

    #[test]
    fn band_energy_rejects_non_uniform_grid() {
        let spec = transform(&hs(), &[0.0, 1.0, 3.0], 1.0 / 128.0).unwrap();
        assert!(band_energy(&spec, 1.0).is_err());
    }

    #[test]
    fn leakage_is_bounded_and_monotone() {
        let w_grid: Vec<f64> = (0..=40).map(|k| k as f64 * PI).collect();
        let curve = leakage_curve(&hs(), &w_grid, 40.0 * PI, 1.0 / 1024.0, 0.01 * PI).unwrap();
        assert_eq!(curve.leakage[0], 1.0);
        assert_eq!(*curve.leakage.last().unwrap(), 0.0);
        assert!(curve.leakage.windows(2).all(|w| w[1] <= w[0]));
        assert!(curve.leakage.iter().all(|r| (0.0..=1.0).contains(r)));
        assert!(leakage_curve(&hs(), &[50.0 * PI], 40.0 * PI, 1.0 / 1024.0, 0.01 * PI).is_err());
    }

    #[test]
    fn unit_conversions() {
        assert_abs_diff_eq!(normalized_frequency(2.0 * PI, 1.0), 1.0);
        assert_abs_diff_eq!(angular_frequency(normalized_frequency(3.3, 0.7), 0.7), 3.3, epsilon = 1e-12);
        assert_abs_diff_eq!(default_w_max(1.0), 200.0 * PI);
        assert_abs_diff_eq!(default_domega(1.0), 2.0 * PI * 0.005);
        assert_eq!(power_db(0.0, -160.0), -160.0);
        assert_abs_diff_eq!(power_db(100.0, -160.0), 20.0);
    }
}
