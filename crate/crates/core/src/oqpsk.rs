//! Complex-baseband OQPSK with a sampled digital pulse, an interpolating
//! low-pass filter, and PAPR measurement.
//!
//! Rates are counted in samples per pulse support `2T`. Each branch carries
//! one symbol per `2T`; the quadrature branch is delayed by `T`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::psf::PulseShape;

/// Identifier of the bit generator recorded in provenance.
pub const BIT_GENERATOR: &str = "chacha8-seed_from_u64-lsb64";

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SYMBOL_PAIRS: usize = 4096;
pub const DEFAULT_N0: usize = 5;
pub const DEFAULT_K: usize = 50;
pub const DEFAULT_N_VALUES: [usize; 7] = [4, 6, 8, 12, 16, 24, 32];
/// Fewest samples [`papr`] accepts after edge removal.
pub const MIN_PAPR_SAMPLES: usize = 1000;

/// Splits bits into I and Q symbol streams: `0 ↦ +1`, `1 ↦ -1`, even
/// positions to I, odd positions to Q.
pub fn map_bits(bits: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
    if bits.len() % 2 != 0 {
        return domain(format!("bit count must be even, got {}", bits.len()));
    }
    let symbol = |b: u8| match b {
        0 => Ok(1.0),
        1 => Ok(-1.0),
        other => domain(format!("bits must be 0 or 1, got {other}")),
    };
    let mut i = Vec::with_capacity(bits.len() / 2);
    let mut q = Vec::with_capacity(bits.len() / 2);
    for pair in bits.chunks_exact(2) {
        i.push(symbol(pair[0])?);
        q.push(symbol(pair[1])?);
    }
    Ok((i, q))
}

/// `count` pseudorandom bits: successive `next_u64` outputs of a ChaCha8
/// generator seeded with `seed_from_u64(seed)`, least significant bit first.
pub fn random_bits(count: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word = rng.next_u64();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|k| ((word >> k) & 1) as u8));
    }
    bits
}

/// Reads a bit stream written as ASCII `'0'`/`'1'` characters. Whitespace is
/// ignored; any other character is an error.
pub fn read_bits<R: BufRead>(reader: R) -> Result<Vec<u8>> {
    let mut bits = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        for ch in line?.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => {
                    return Err(Error::Parse(format!(
                        "line {}: unexpected character {c:?} in bit stream",
                        lineno + 1
                    )))
                }
            }
        }
    }
    Ok(bits)
}

/// Writes bits as one line of `'0'`/`'1'` characters followed by a newline.
pub fn write_bits<W: Write>(mut writer: W, bits: &[u8]) -> Result<()> {
    let line: Vec<u8> = bits.iter().map(|&b| if b == 0 { b'0' } else { b'1' }).collect();
    writer.write_all(&line)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Interpolating low-pass filter, `h_i = (π/N₀)·sinc(iπ / 2N₀)` for
/// `i = -K..=K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpfParams {
    pub interp_n0: usize,
    pub half_length_k: usize,
    pub taps: Vec<f64>,
}

pub fn lpf_taps(interp_n0: usize, half_length_k: usize) -> Result<LpfParams> {
    if interp_n0 < 2 {
        return domain(format!("LPF interpolation multiple N0 must be >= 2, got {interp_n0}"));
    }
    if half_length_k < 1 {
        return domain("LPF half length K must be >= 1");
    }
    let gain = PI / interp_n0 as f64;
    let k = half_length_k as i64;
    let mut taps = vec![0.0; 2 * half_length_k + 1];
    // fill from |i| so the two halves are bit-identical
    for i in 0..=k {
        let v = if i == 0 {
            gain
        } else {
            let x = i as f64 * PI / (2.0 * interp_n0 as f64);
            gain * x.sin() / x
        };
        taps[(k + i) as usize] = v;
        taps[(k - i) as usize] = v;
    }
    Ok(LpfParams {
        interp_n0,
        half_length_k,
        taps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub bit_generator: Option<&'static str>,
    pub bit_count: usize,
    pub shape: PulseShape,
    pub interp_n: usize,
    /// `(N₀, K)` once the low-pass filter has been applied.
    pub lpf: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub samples_per_2t: usize,
    pub provenance: Provenance,
}

/// OQPSK modulation with the pulse sampled at `N` points per `2T`:
/// `s[n] = Σ a_k p[n - kN] + j·Σ b_k p[n - kN - N/2]`.
///
/// `seed` is only echoed into provenance. The output has
/// `pairs·N + N/2` samples.
pub fn modulate(bits: &[u8], shape: &PulseShape, interp_n: usize, seed: Option<u64>) -> Result<BasebandSignal> {
    if interp_n < 4 || interp_n % 2 != 0 {
        return domain(format!(
            "interpolation multiple N must be even and >= 4, got {interp_n}: the quadrature branch \
             is offset by T, which is N/2 samples, so N/2 must be a whole number"
        ));
    }
    let (i_sym, q_sym) = map_bits(bits)?;
    if i_sym.is_empty() {
        return domain("bit stream is empty");
    }
    let pulse = shape.sample(interp_n)?;
    let half = interp_n / 2;
    let mut samples = vec![Complex64::new(0.0, 0.0); i_sym.len() * interp_n + half];
    for (k, (&a, &b)) in i_sym.iter().zip(&q_sym).enumerate() {
        let start = k * interp_n;
        for (m, &p) in pulse.iter().enumerate() {
            samples[start + m].re += a * p;
            samples[start + half + m].im += b * p;
        }
    }
    Ok(BasebandSignal {
        samples,
        samples_per_2t: interp_n,
        provenance: Provenance {
            seed,
            bit_generator: seed.map(|_| BIT_GENERATOR),
            bit_count: bits.len(),
            shape: *shape,
            interp_n,
            lpf: None,
        },
    })
}

/// Zero-stuffs by `N₀` and convolves with the LPF taps.
///
/// Input sample `x[n]` is placed at `n·N₀`, giving `(L - 1)·N₀ + 1` stuffed
/// samples, and the full convolution is kept, so the output has
/// `(L - 1)·N₀ + 2K + 1` samples and a delay of `K`.
pub fn upsample_filter(signal: &BasebandSignal, lpf: &LpfParams) -> BasebandSignal {
    let n0 = lpf.interp_n0;
    let len = signal.samples.len();
    let out_len = if len == 0 {
        0
    } else {
        (len - 1) * n0 + lpf.taps.len()
    };
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    for (n, &x) in signal.samples.iter().enumerate() {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        let base = n * n0;
        for (j, &h) in lpf.taps.iter().enumerate() {
            out[base + j] += x * h;
        }
    }
    let mut provenance = signal.provenance.clone();
    provenance.lpf = Some((lpf.interp_n0, lpf.half_length_k));
    BasebandSignal {
        samples: out,
        samples_per_2t: signal.samples_per_2t * n0,
        provenance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaprReport {
    pub papr_db: f64,
    pub peak_power: f64,
    pub mean_power: f64,
    pub discarded_edge_samples: usize,
    pub provenance: Provenance,
}

/// Edge samples dropped by default: `2·(K + N·N₀)` after the LPF, `2·N`
/// without it.
pub fn default_discard(signal: &BasebandSignal) -> usize {
    let n = signal.provenance.interp_n;
    match signal.provenance.lpf {
        Some((n0, k)) => 2 * (k + n * n0),
        None => 2 * n,
    }
}

/// Peak-to-average power ratio of `|s[n]|²` after dropping
/// `discard_each_end` samples at both ends.
pub fn papr(signal: &BasebandSignal, discard_each_end: usize) -> Result<PaprReport> {
    let len = signal.samples.len();
    let kept = len.saturating_sub(2 * discard_each_end);
    if kept < MIN_PAPR_SAMPLES {
        return domain(format!(
            "{kept} samples remain after discarding {discard_each_end} at each end of {len}; \
             at least {MIN_PAPR_SAMPLES} are required"
        ));
    }
    let region = &signal.samples[discard_each_end..len - discard_each_end];
    // Neumaier summation
    let mut peak = 0.0f64;
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for s in region {
        let p = s.norm_sqr();
        peak = peak.max(p);
        let t = sum + p;
        carry += if sum.abs() >= p { (sum - t) + p } else { (p - t) + sum };
        sum = t;
    }
    let mean = (sum + carry) / region.len() as f64;
    if !(mean > 0.0) {
        return domain("signal has zero power in the retained region");
    }
    Ok(PaprReport {
        papr_db: 10.0 * (peak / mean).log10(),
        peak_power: peak,
        mean_power: mean,
        discarded_edge_samples: discard_each_end,
        provenance: signal.provenance.clone(),
    })
}

/// Full chain for one cell: modulate, optionally filter, measure with the
/// default edge discard.
pub fn chain_papr(
    bits: &[u8],
    shape: &PulseShape,
    interp_n: usize,
    lpf: Option<&LpfParams>,
    seed: Option<u64>,
) -> Result<PaprReport> {
    let signal = modulate(bits, shape, interp_n, seed)?;
    let signal = match lpf {
        Some(lpf) => upsample_filter(&signal, lpf),
        None => signal,
    };
    papr(&signal, default_discard(&signal))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub shape: PulseShape,
    pub interp_n: usize,
    pub report: PaprReport,
}

/// PAPR for every `(shape, N)` pair, shape-major, over one shared bit
/// stream. `seed` is echoed into provenance only.
pub fn papr_sweep_with_bits(
    shapes: &[PulseShape],
    n_values: &[usize],
    lpf: Option<&LpfParams>,
    bits: &[u8],
    seed: Option<u64>,
) -> Result<Vec<SweepRow>> {
    if let Some(bad) = n_values.iter().find(|&&n| n < 4 || n % 2 != 0) {
        return domain(format!(
            "interpolation multiple N must be even and >= 4, got {bad}: the quadrature offset T \
             must be a whole number of samples"
        ));
    }
    let mut rows = Vec::with_capacity(shapes.len() * n_values.len());
    for shape in shapes {
        for &n in n_values {
            rows.push(SweepRow {
                shape: *shape,
                interp_n: n,
                report: chain_papr(bits, shape, n, lpf, seed)?,
            });
        }
    }
    Ok(rows)
}

/// [`papr_sweep_with_bits`] over `bit_count` bits from [`random_bits`].
pub fn papr_sweep(
    shapes: &[PulseShape],
    n_values: &[usize],
    lpf: Option<&LpfParams>,
    bit_count: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let bits = random_bits(bit_count, seed);
    papr_sweep_with_bits(shapes, n_values, lpf, &bits, Some(seed))
}

/// Header of the sweep table.
pub const SWEEP_CSV_HEADER: &str = "shape,alpha,N,N0,K,bits,seed,papr_db";

/// Renders sweep rows as CSV with `papr_db` to 6 decimals. Empty fields
/// mark an absent alpha, LPF or seed.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let prov = &row.report.provenance;
        let opt = |v: Option<String>| v.unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6}\n",
            row.shape.kind().name(),
            opt(row.shape.alpha().map(|a| a.to_string())),
            row.interp_n,
            opt(prov.lpf.map(|(n0, _)| n0.to_string())),
            opt(prov.lpf.map(|(_, k)| k.to_string())),
            prov.bit_count,
            opt(prov.seed.map(|s| s.to_string())),
            row.report.papr_db,
        ));
    }
    out
}
