use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use wavebench_core::oqpsk::{self, SweepRow};
use wavebench_core::psf::{self, PhaseFunction, PulseShape};
use wavebench_core::spectral;
use wavebench_core::Error;

use crate::config::{check_bit_count, BitSource, RunConfig, T};
use crate::render::{fixed, opt, sci, Table};

pub const DB_FLOOR: f64 = -160.0;

/// Result of a run, held in memory until everything has been computed.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub exit_code: u8,
    pub bits_export: Option<(PathBuf, Vec<u8>)>,
}

impl Outcome {
    fn ok(table: Table) -> Outcome {
        Outcome {
            table,
            exit_code: 0,
            bits_export: None,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, String> {
    match config.command {
        "verify" => run_verify(config),
        "spectrum" => run_spectrum(config),
        "leakage" => run_leakage(config),
        "papr-sweep" => run_papr_sweep(config),
        other => Err(format!("unknown command {other}")),
    }
}

fn shape_cells(shape: &PulseShape) -> [String; 2] {
    [shape.kind().name().to_string(), opt(shape.alpha())]
}

pub const VERIFY_HEADER: [&str; 9] = [
    "shape",
    "alpha",
    "passed",
    "max_deviation",
    "detected_k",
    "endpoint_ok",
    "smoothness",
    "edge_derivative_limit",
    "note",
];

pub fn run_verify(config: &RunConfig) -> Result<Outcome, String> {
    let mut subjects: Vec<([String; 2], PhaseFunction)> = config
        .shapes
        .iter()
        .map(|s| (shape_cells(s), s.phase_function()))
        .collect();
    if let Some(custom) = &config.custom {
        let g = PhaseFunction::from_csv_path(&custom.path, custom.parity, T)
            .map_err(|e| format!("--custom-g {}: {e}", custom.path.display()))?;
        subjects.push((["custom".to_string(), String::new()], g));
    }

    let mut table = Table::new(&VERIFY_HEADER);
    table.meta("grid_points", config.grid_points);
    table.meta("ce_tol", sci(config.ce_tol));
    table.meta("smooth_tol", sci(config.smooth_tol));
    let mut all_passed = true;
    for ([name, alpha], g) in subjects {
        let smooth = psf::classify_phase_smoothness(&g, config.smooth_tol);
        let (passed, dev, k, endpoint, note) = match psf::verify_ce(&g, config.grid_points, config.ce_tol) {
            Ok(r) => (r.passed, sci(r.max_deviation), opt(r.detected_k), r.endpoint_ok.to_string(), String::new()),
            Err(Error::Parity(msg)) => (false, String::new(), String::new(), String::new(), csv_safe(&msg)),
            Err(e) => return Err(format!("verify {name}: {e}")),
        };
        all_passed &= passed;
        table.push(vec![
            name,
            alpha,
            passed.to_string(),
            dev,
            k,
            endpoint,
            format!("{:?}", smooth.class),
            sci(smooth.edge_derivative_limit),
            note,
        ]);
    }
    Ok(Outcome {
        table,
        exit_code: if all_passed { 0 } else { 1 },
        bits_export: None,
    })
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n', '"'], ";")
}

/// `0, step, 2·step, …` up to `end`, which is always the last point.
fn stepped_grid(step: f64, end: f64) -> Vec<f64> {
    let count = (end / step * (1.0 + 1e-12)).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|j| j as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (end - *last).abs() <= 1e-9 * step {
            *last = end;
        } else {
            grid.push(end);
        }
    }
    grid
}

fn spectral_meta(table: &mut Table, config: &RunConfig) {
    let s = &config.spectral;
    table.meta("T", T);
    table.meta("frequency_units", "normalized fT");
    table.meta("dt", sci(s.dt));
    table.meta("domega", fixed(spectral::normalized_frequency(s.domega, T)));
}

pub fn run_spectrum(config: &RunConfig) -> Result<Outcome, String> {
    let s = &config.spectral;
    let f_grid = stepped_grid(spectral::normalized_frequency(s.domega, T), s.f_max);
    let omega: Vec<f64> = f_grid.iter().map(|&f| spectral::angular_frequency(f, T)).collect();

    let mut table = Table::new(&["shape", "alpha", "f_normalized", "P_db"]);
    spectral_meta(&mut table, config);
    table.meta("f_max", fixed(s.f_max));
    table.meta("floor_db", fixed(DB_FLOOR));
    let mut residual = 0.0f64;
    let mut body = Vec::new();
    for shape in &config.shapes {
        let spec = spectral::transform(shape, &omega, s.dt).map_err(|e| format!("spectrum {shape}: {e}"))?;
        residual = residual.max(spec.max_imag_residual);
        let [name, alpha] = shape_cells(shape);
        for (f, p) in f_grid.iter().zip(spectral::power_spectrum(&spec)) {
            body.push(vec![name.clone(), alpha.clone(), fixed(*f), fixed(spectral::power_db(p, DB_FLOOR))]);
        }
    }
    table.meta("max_imag_residual", sci(residual));
    body.into_iter().for_each(|r| table.push(r));
    Ok(Outcome::ok(table))
}

pub fn run_leakage(config: &RunConfig) -> Result<Outcome, String> {
    let s = &config.spectral;
    let wmax_norm = spectral::normalized_frequency(s.w_max, T);
    let w_norm = stepped_grid(s.w_step, wmax_norm);
    let w_grid: Vec<f64> = w_norm
        .iter()
        .map(|&w| spectral::angular_frequency(w, T).min(s.w_max))
        .collect();

    let mut table = Table::new(&["shape", "alpha", "W_normalized", "R_o"]);
    spectral_meta(&mut table, config);
    table.meta("w_max", fixed(wmax_norm));
    let mut body = Vec::new();
    let mut snap = 0.0f64;
    for shape in &config.shapes {
        let curve = spectral::leakage_curve(shape, &w_grid, s.w_max, s.dt, s.domega)
            .map_err(|e| format!("leakage {shape}: {e}"))?;
        snap = snap.max(curve.max_snap_distance());
        let [name, alpha] = shape_cells(shape);
        for (w, r) in w_norm.iter().zip(&curve.leakage) {
            body.push(vec![name.clone(), alpha.clone(), fixed(*w), sci(*r)]);
        }
    }
    table.meta("max_snap_distance", sci(spectral::normalized_frequency(snap, T)));
    body.into_iter().for_each(|r| table.push(r));
    Ok(Outcome::ok(table))
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let header: Vec<&'static str> = oqpsk::SWEEP_CSV_HEADER.split(',').collect();
    let mut table = Table::new(&header);
    table.meta("bit_generator", oqpsk::BIT_GENERATOR);
    for row in rows {
        let prov = &row.report.provenance;
        let [name, alpha] = shape_cells(&row.shape);
        table.push(vec![
            name,
            alpha,
            row.interp_n.to_string(),
            opt(prov.lpf.map(|(n0, _)| n0)),
            opt(prov.lpf.map(|(_, k)| k)),
            prov.bit_count.to_string(),
            opt(prov.seed),
            fixed(row.report.papr_db),
        ]);
    }
    table
}

pub fn run_papr_sweep(config: &RunConfig) -> Result<Outcome, String> {
    let sweep = &config.sweep;
    let (bits, seed) = match &sweep.bits {
        BitSource::Generated { count, seed } => (oqpsk::random_bits(*count, *seed), Some(*seed)),
        BitSource::File(path) => {
            let file = File::open(path).map_err(|e| format!("--bits-file {}: {e}", path.display()))?;
            let bits = oqpsk::read_bits(BufReader::new(file)).map_err(|e| format!("--bits-file {}: {e}", path.display()))?;
            check_bit_count(bits.len(), &sweep.n_values, sweep.lpf.as_ref()).map_err(|e| e.0)?;
            (bits, None)
        }
    };
    let rows = oqpsk::papr_sweep_with_bits(&config.shapes, &sweep.n_values, sweep.lpf.as_ref(), &bits, seed)
        .map_err(|e| format!("papr-sweep: {e}"))?;
    Ok(Outcome {
        table: sweep_table(&rows),
        exit_code: 0,
        bits_export: sweep.export_bits.clone().map(|p| (p, bits)),
    })
}
