use std::f64::consts::PI;
use std::io::Cursor;

use approx::assert_relative_eq;
use wavebench_core::oqpsk::{self, lpf_taps};
use wavebench_core::psf::{self, PhaseFunction, SmoothnessClass};
use wavebench_core::spectral;
use wavebench_core::PulseShape;

fn shapes() -> Vec<PulseShape> {
    vec![
        PulseShape::half_sine(1.0).unwrap(),
        PulseShape::sfsk(1.0).unwrap(),
        PulseShape::alpha_half_sine(1.5, 1.0).unwrap(),
        PulseShape::alpha_half_sine(2.0, 1.0).unwrap(),
        PulseShape::alpha_half_sine(3.0, 1.0).unwrap(),
    ]
}

#[test]
fn tabulated_shape_matches_analytic_verdict() {
    for shape in shapes() {
        let mut csv = String::from("t,g\n");
        for i in 0..2000 {
            let t = i as f64 / 2000.0;
            csv.push_str(&format!("{t:.17},{:.17}\n", shape.phase(t).unwrap()));
        }
        let parity = shape.phase_function().parity();
        let table = PhaseFunction::from_csv_reader(Cursor::new(csv), parity, 1.0).unwrap();
        let report = psf::verify_ce(&table, 512, 1e-6).unwrap();
        assert!(report.passed, "{shape}: {}", report.max_deviation);
        assert_eq!(report.detected_k, Some(0), "{shape}");
    }
}

#[test]
fn moderate_alpha_and_sfsk_leak_less_than_half_sine() {
    let w_max = spectral::angular_frequency(40.0, 1.0);
    let domega = spectral::angular_frequency(0.01, 1.0);
    let w = [spectral::angular_frequency(3.0, 1.0)];
    let hs = spectral::leakage_curve(&shapes()[0], &w, w_max, 1.0 / 2048.0, domega).unwrap();
    for shape in &shapes()[1..4] {
        assert_eq!(psf::classify_smoothness(shape).class, SmoothnessClass::Smooth);
        let c = spectral::leakage_curve(shape, &w, w_max, 1.0 / 2048.0, domega).unwrap();
        assert!(c.leakage[0] < hs.leakage[0], "{shape}: {} vs {}", c.leakage[0], hs.leakage[0]);
    }
}

#[test]
fn unfiltered_envelope_is_constant_for_every_shape() {
    let bits = oqpsk::random_bits(4000, 5);
    for shape in shapes() {
        let report = oqpsk::chain_papr(&bits, &shape, 16, None, Some(5)).unwrap();
        assert!(report.papr_db.abs() < 1e-9, "{shape}: {}", report.papr_db);
        assert_relative_eq!(report.mean_power, 1.0, epsilon = 1e-9);
    }
}

#[test]
fn exported_bits_reproduce_the_sweep() {
    let bits = oqpsk::random_bits(4096, 77);
    let mut buf = Vec::new();
    oqpsk::write_bits(&mut buf, &bits).unwrap();
    let back = oqpsk::read_bits(Cursor::new(buf)).unwrap();
    assert_eq!(back, bits);

    let lpf = lpf_taps(5, 50).unwrap();
    let a = oqpsk::papr_sweep(&shapes(), &[8, 16], Some(&lpf), 4096, 77).unwrap();
    let b = oqpsk::papr_sweep_with_bits(&shapes(), &[8, 16], Some(&lpf), &back, Some(77)).unwrap();
    assert_eq!(oqpsk::sweep_csv(&a), oqpsk::sweep_csv(&b));
}

#[test]
fn spectrum_peak_is_at_dc() {
    let f: Vec<f64> = (0..=200).map(|i| spectral::angular_frequency(i as f64 * 0.01, 1.0)).collect();
    for shape in shapes() {
        let p = spectral::power_spectrum(&spectral::transform(&shape, &f, 1.0 / 4096.0).unwrap());
        assert!(p[1..].iter().all(|&x| x < p[0]), "{shape}");
        assert!(p[0] > 1.0 && p[0] < 4.0 / PI * 4.0 / PI + 1e-6, "{shape}: {}", p[0]);
    }
}
