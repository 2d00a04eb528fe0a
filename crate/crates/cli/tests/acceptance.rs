//! Acceptance suite: one test per shipped claim, each printing a PASS line
//! with the measured numbers (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned here, in code. Sampled quantities use fixed,
//! documented seeds so each run is reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semipit_cli::scenario::{Scenario, SweepAxis};
use semipit_cli::{
    link_for_target_snr, run_pipeline, run_power_report, run_snr_sweep, symbol_round_trip_accuracy,
};
use semipit_core::circuit::{
    reflected_impedance, AngularFrequency, CoilRole, ComplexImpedance, ResonantCoil,
};
use semipit_core::num_complex::Complex64;
use semipit_core::readout::{bridge_output, compute_snr, BridgeConfig, SweepSimulator};
use semipit_core::ring::{
    encode, MouseSymbol, RingFsm, RingMode, ScrollEvent, ACTIVE_FRAME_RATE_FPS,
};
use semipit_core::{Decoder, InductiveLink, PeakDetector};
use std::path::PathBuf;
use std::time::Instant;

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_dir().join(name)).expect("scenario loads")
}

fn pass(criterion: &str, detail: String) {
    println!("[PASS] {criterion}: {detail}");
}

#[test]
fn criterion_1_battery_lifespan_table() {
    let start = Instant::now();
    let report = run_power_report(&[20.0, 27.0], &[24.0, 8.0, 4.0]).unwrap();
    let expected = [
        (24.0, 20.0, 167.0),
        (24.0, 27.0, 225.0),
        (8.0, 20.0, 451.0),
        (8.0, 27.0, 609.0),
        (4.0, 20.0, 784.0),
        (4.0, 27.0, 1058.0),
    ];
    let mut cells = Vec::new();
    for (hours, capacity, reference) in expected {
        let got = report.lifespan_cell(hours, capacity).unwrap();
        assert!(
            (got - reference).abs() <= 1.0,
            "lifespan({hours} h/day, {capacity} mAh) = {got:.2} h, reference {reference} ± 1"
        );
        cells.push(format!("{got:.0}"));
    }
    // Cross-model consistency: the coulomb counter reproduces the
    // continuous-ACTIVE cells within 2%.
    for (capacity, runtime) in &report.discharge_runtimes {
        let closed = report.lifespan_cell(24.0, *capacity).unwrap();
        assert!(
            ((runtime - closed) / closed).abs() < 0.02,
            "discharge {runtime:.1} h vs closed-form {closed:.1} h at {capacity} mAh"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    pass(
        "criterion 1 (battery lifespan table)",
        format!("cells {{{}}} h within ±1 h, {elapsed:?}", cells.join(", ")),
    );
}

#[test]
fn criterion_2_carrier_fidelity() {
    let start = Instant::now();
    let scenario = load("nominal.toml");
    let base = scenario.build_system().unwrap();
    let noiseless = {
        let mut cfg = base.sweep_config().clone();
        cfg.noise_std_db = 0.0;
        SweepSimulator::new(
            *base.ring(),
            *base.wrist(),
            *base.link(),
            base.bridge().clone(),
            cfg,
        )
        .unwrap()
    };
    let decoder = Decoder::for_system(&noiseless).unwrap();
    let step = noiseless.sweep_config().step_hz();
    let mut worst = 0.0f64;
    for symbol in MouseSymbol::ALL {
        let carrier = decoder.carriers().carrier_hz(symbol);
        let tuned = noiseless.with_ring_tuned(carrier).unwrap();
        let frame = tuned.frame(1, 0, 0.0);

        // The sweep's own maximum must land within one bin of the carrier…
        let argmax_f = frame.frequencies_hz[frame.argmax()];
        let err = (argmax_f - carrier).abs();
        assert!(
            err <= step + 1.0,
            "{symbol:?}: sweep peak {argmax_f} Hz is {err:.0} Hz from carrier {carrier} Hz"
        );
        worst = worst.max(err);

        // …and the detector must both find it there and classify it back.
        let event = decoder.decode_frame(&frame).unwrap().expect("decoded");
        assert_eq!(event.symbol, symbol);
        let peak = decoder.detector().detect(&frame).unwrap().unwrap();
        assert!((peak.peak_frequency_hz - carrier).abs() <= step + 1.0);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    pass(
        "criterion 2 (carrier fidelity)",
        format!(
            "all six noiseless peaks within one {:.0} kHz bin (worst {:.1} kHz), {elapsed:?}",
            step / 1e3,
            worst / 1e3
        ),
    );
}

#[test]
fn criterion_3_round_trip_accuracy() {
    let start = Instant::now();
    let scenario = load("nominal.toml");
    let system = scenario.build_system().unwrap();
    let n = 10_000;

    let acc_nominal = symbol_round_trip_accuracy(&system, scenario.seed, n).unwrap();
    assert!(
        acc_nominal >= 0.99,
        "nominal accuracy {acc_nominal} below 0.99"
    );

    let mut accuracies = Vec::new();
    for target in [27.0, 20.0, 10.0, 5.0] {
        let sys = system.with_link(link_for_target_snr(&system, target));
        accuracies.push((
            target,
            symbol_round_trip_accuracy(&sys, scenario.seed, n).unwrap(),
        ));
    }
    let acc_at = |snr: f64| accuracies.iter().find(|(s, _)| *s == snr).unwrap().1;
    assert!(
        acc_at(10.0) >= 0.99,
        "accuracy at SNR 10 is {}, below 0.99",
        acc_at(10.0)
    );
    // SNR 5 is reported but unconstrained; the error trend across the
    // calibrated levels must not worsen as SNR rises (a slack of 0.1
    // percentage points absorbs counting noise between near-zero rates).
    assert!(acc_at(5.0) <= acc_at(10.0));
    assert!(acc_at(10.0) <= acc_at(20.0) + 0.001);
    assert!(acc_at(20.0) <= acc_at(27.0) + 0.001);

    // Calibration consistency: the nominal pose reads the reference SNR.
    // One documented sample (seed 2) plus a 5-seed mean close to the
    // calibration target (single-sample estimates spread ±≈2 at 100 frames).
    let probe = system.ring().resonant_frequency_hz();
    let snr_sample = |seed: u64| {
        let with_ring: Vec<_> = (0..100).map(|i| system.frame(seed, 100 + i, 0.0)).collect();
        let without: Vec<_> = (0..100)
            .map(|i| system.with_link(InductiveLink::open()).frame(seed, i, 0.0))
            .collect();
        compute_snr(&with_ring, &without, probe).unwrap().snr
    };
    let nominal_snr = snr_sample(2);
    assert!(
        (25.0..=30.0).contains(&nominal_snr),
        "nominal SNR sample {nominal_snr} outside [25, 30]"
    );
    let mean: f64 = (1..=5).map(snr_sample).sum::<f64>() / 5.0;
    assert!(
        (25.5..=29.5).contains(&mean),
        "5-seed mean SNR {mean} drifted from the calibration target"
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "took {elapsed:?}, budget 60 s"
    );
    pass(
        "criterion 3 (round-trip accuracy)",
        format!(
            "nominal {:.2}% (SNR {:.1}), snr10 {:.2}%, snr5 {:.2}% over {n} symbols each, {elapsed:?}",
            100.0 * acc_nominal,
            nominal_snr,
            100.0 * acc_at(10.0),
            100.0 * acc_at(5.0)
        ),
    );
}

#[test]
fn criterion_4_snr_vs_distance() {
    let scenario = load("snr_vs_distance.toml");
    let table = run_snr_sweep(&scenario, SweepAxis::Distance).unwrap();
    let distances = table.axis_values();
    let at_14cm = distances
        .iter()
        .position(|d| (d - 0.14).abs() < 1e-9)
        .expect("grid contains 14 cm");

    // Hard anchor: SNR ≥ 10 at 14 cm for every tilted-ring bend angle up
    // to 60°.
    let mut anchors = Vec::new();
    for angle in [-30.0, 0.0, 30.0, 60.0] {
        let series = format!("snr_tilted_bend_{angle}");
        let column = table.column(&series).unwrap();
        let snr = column[at_14cm];
        assert!(snr >= 10.0, "{series} at 14 cm is {snr}, below 10");
        anchors.push(format!("{angle}°→{snr:.1}"));

        // Qualitative monotonicity: non-increasing with distance, with a
        // 0.5 slack for the sampled statistic.
        for pair in column.windows(2) {
            assert!(
                pair[1] <= pair[0] + 0.5,
                "{series} not monotone: {} then {}",
                pair[0],
                pair[1]
            );
        }
    }
    pass(
        "criterion 4 (SNR vs distance)",
        format!(
            "SNR at 14 cm {{{}}} all ≥ 10; all series non-increasing over 10–20 cm",
            anchors.join(", ")
        ),
    );
}

#[test]
fn criterion_5_tilt_benefit() {
    // Structural gap: the calibrated coupling pair fixes the peak-height
    // step, so the infinite-sample SNR gap is pinned by construction.
    let scenario = load("snr_vs_angle.toml");
    let system = scenario.build_system().unwrap();
    let sigma = system.sweep_config().noise_std_db;
    let peak_for = |k: f64| {
        let link = InductiveLink::from_coupling(
            k,
            system.ring().inductance_h(),
            system.wrist().inductance_h(),
        )
        .unwrap();
        let sys = system.with_link(link);
        sys.response_db(sys.ring().resonant_frequency_hz())
    };
    let structural_gap = (peak_for(0.0039) - peak_for(0.0031)) / sigma;
    assert!(
        (2.0..=4.0).contains(&structural_gap),
        "structural tilt gap {structural_gap} outside 3 ± 1"
    );

    // And it must survive the sampled pipeline statistic.
    let table = run_snr_sweep(&scenario, SweepAxis::Angle).unwrap();
    let idx_30 = table
        .axis_values()
        .iter()
        .position(|a| (a - 30.0).abs() < 1e-9)
        .expect("grid contains 30°");
    let tilted = table.column("snr_tilted").unwrap()[idx_30];
    let straight = table.column("snr_straight").unwrap()[idx_30];
    let gap = tilted - straight;
    assert!(
        (2.0..=4.0).contains(&gap),
        "sampled tilt gap {gap} (tilted {tilted}, straight {straight}) outside 3 ± 1"
    );
    pass(
        "criterion 5 (tilt benefit)",
        format!(
            "gap at (14 cm, 30°): structural {structural_gap:.2}, sampled {gap:.2} (tilted {tilted:.1} vs straight {straight:.1})"
        ),
    );
}

#[test]
fn criterion_6_snr_vs_input_power() {
    let scenario = load("snr_vs_power.toml");
    let table = run_snr_sweep(&scenario, SweepAxis::Power).unwrap();
    let powers = table.axis_values();
    let snrs = table.column("snr").unwrap();
    let snr_at = |dbm: f64| {
        let idx = powers.iter().position(|p| (p - dbm).abs() < 1e-9).unwrap();
        snrs[idx]
    };
    for dbm in [-15.0, -10.0, -5.0, 0.0, 5.0] {
        assert!(
            snr_at(dbm) >= 10.0,
            "SNR at {dbm} dBm is {}, below 10",
            snr_at(dbm)
        );
    }
    assert!(
        snr_at(10.0) < snr_at(5.0),
        "compression must drop SNR past +5 dBm: {} vs {}",
        snr_at(10.0),
        snr_at(5.0)
    );
    pass(
        "criterion 6 (SNR vs input power)",
        format!(
            "SNR ≥ 10 across −15…+5 dBm (min {:.1}); +10 dBm compressed to {:.1} < {:.1} at +5 dBm",
            [-15.0, -10.0, -5.0, 0.0, 5.0]
                .iter()
                .map(|p| snr_at(*p))
                .fold(f64::INFINITY, f64::min),
            snr_at(10.0),
            snr_at(5.0)
        ),
    );
}

#[test]
fn criterion_7_analytic_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let cases = 1000;
    let mut worst_small_signal = 0.0f64;
    let mut worst_resonance = 0.0f64;
    for _ in 0..cases {
        // Small-signal linearity: exact bridge output vs the ΔZ/Z_ref²
        // approximation stays within 1% whenever |ΔZ|/|Z_ref| ≤ 0.01.
        let z_ref = Complex64::new(rng.gen_range(20.0..200.0), rng.gen_range(-200.0..200.0));
        let ratio = rng.gen_range(1e-5..=0.01);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let dz = Complex64::from_polar(ratio * z_ref.norm(), phase);
        let v_in = 0.1;
        let exact = -(v_in / (z_ref + dz) - v_in / z_ref);
        let approx = dz / (z_ref * z_ref) * v_in;
        let rel = (approx - exact).norm() / exact.norm();
        assert!(rel <= 0.01, "small-signal error {rel} at ratio {ratio}");
        worst_small_signal = worst_small_signal.max(rel);

        // Reflected impedance at resonance equals the closed form
        // (ω₀M)²/R within 1e−9 relative, with a vanishing imaginary part.
        let l_ring = rng.gen_range(0.5e-6..10e-6);
        let r_ring = rng.gen_range(0.5..50.0);
        let f0 = rng.gen_range(20e6..40e6);
        let k = rng.gen_range(1e-4..0.01);
        let ring = ResonantCoil::tuned(CoilRole::Ring, l_ring, r_ring, f0).unwrap();
        let m = k * (l_ring * rng.gen_range(1e-6..10e-6)).sqrt();
        let omega = AngularFrequency::from_hz(ring.resonant_frequency_hz()).unwrap();
        let dz = reflected_impedance(&ring, m, omega);
        let closed = (omega.radians_per_second() * m).powi(2) / r_ring;
        let rel = ((dz.resistance - closed) / closed).abs();
        assert!(rel < 1e-9, "resonance closed form off by {rel}");
        assert!((dz.reactance / closed).abs() < 1e-9);
        worst_resonance = worst_resonance.max(rel);

        // Balance null is exact: identical load and reference cancel to
        // literal zero.
        let bridge = BridgeConfig {
            z_ref: ComplexImpedance::new(z_ref.re, z_ref.im).into(),
            ..BridgeConfig::nominal()
        };
        let v = bridge_output(
            &bridge,
            ComplexImpedance::new(z_ref.re, z_ref.im),
            AngularFrequency::from_hz(27.5e6).unwrap(),
        )
        .unwrap();
        assert_eq!(v.re, 0.0);
        assert_eq!(v.im, 0.0);
    }
    pass(
        "criterion 7 (analytic oracles)",
        format!(
            "{cases} random instances: small-signal worst {worst_small_signal:.2e} ≤ 1%, \
             resonance worst {worst_resonance:.2e} ≤ 1e-9, balance null exact"
        ),
    );
}

#[test]
fn criterion_8_fsm_conformance() {
    // Boundary behaviour at the 30 s timeout.
    let mut fsm = RingFsm::new(0.0);
    let scroll = ScrollEvent::new(0, 1, false).unwrap();
    fsm.step(scroll, 0.0).unwrap();
    assert_eq!(fsm.mode(), RingMode::Active);
    fsm.step(scroll, 29.99).unwrap();
    assert_eq!(fsm.mode(), RingMode::Active, "still awake at 29.99 s");
    fsm.step(scroll, 30.0).unwrap();
    assert_eq!(fsm.mode(), RingMode::Standby, "asleep exactly at 30 s");

    // Emission pacing: floor(T × 200) ± 1 over randomized step patterns.
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for case in 0..50 {
        let duration: f64 = rng.gen_range(0.05..20.0);
        let mut fsm = RingFsm::new(0.0);
        let mut emitted = fsm.step(scroll, 0.0).unwrap().len() as i64;
        let mut t = 0.0;
        let mut flip = false;
        while t < duration {
            t = (t + rng.gen_range(0.001..0.8)).min(duration);
            // Alternate the input level so the timeout never fires.
            flip = !flip;
            let input = ScrollEvent::new(if flip { 1 } else { 0 }, 1, false).unwrap();
            emitted += fsm.step(input, t).unwrap().len() as i64;
        }
        let expected = (duration * ACTIVE_FRAME_RATE_FPS).floor() as i64;
        assert!(
            (emitted - expected).abs() <= 1,
            "case {case}: emitted {emitted} over {duration:.3} s, expected {expected} ± 1"
        );
    }

    // Strict diagonal alternation with balanced counts, vertical first.
    let diagonal = ScrollEvent::new(1, 1, false).unwrap();
    let cycle = encode(&diagonal);
    assert_eq!(cycle, vec![MouseSymbol::ScrollUp, MouseSymbol::ScrollRight]);
    let mut encoder = semipit_core::ring::RingEncoder::new(Default::default(), 0.0);
    let mut frames = Vec::new();
    let mut t = 0.0;
    while t < 2.0 {
        frames.extend(encoder.step(diagonal, t).unwrap());
        t += 0.03;
    }
    assert_eq!(frames[0].symbol, MouseSymbol::ScrollUp, "vertical leads");
    for pair in frames.windows(2) {
        assert_ne!(pair[0].symbol, pair[1].symbol, "alternation must be strict");
    }
    let even = frames.len() - frames.len() % 2;
    let ups = frames[..even]
        .iter()
        .filter(|f| f.symbol == MouseSymbol::ScrollUp)
        .count();
    assert_eq!(2 * ups, even, "even-length burst splits evenly");

    pass(
        "criterion 8 (FSM conformance)",
        format!(
            "30 s boundary exact; 50 random runs within ±1 frame of 200 fps; \
             {} diagonal frames strictly alternating",
            frames.len()
        ),
    );
}

/// End-to-end sanity on the shipped scenarios: the scripted replay decodes
/// perfectly at nominal noise and the noisy-environment variant still holds.
#[test]
fn pipeline_scenarios_decode_cleanly() {
    for name in ["symbol_pipeline.toml", "noisy_environment.toml"] {
        let scenario = load(name);
        let report = run_pipeline(&scenario).unwrap();
        assert!(
            report.accuracy() >= 0.99,
            "{name}: accuracy {}",
            report.accuracy()
        );
        assert_eq!(
            report.standby_false_events, 0,
            "{name}: standby leaked events"
        );
        assert!(!report.actions.is_empty());
    }
    // Determinism: same scenario and seed, byte-identical event streams.
    let scenario = load("symbol_pipeline.toml");
    let a = run_pipeline(&scenario).unwrap();
    let b = run_pipeline(&scenario).unwrap();
    assert_eq!(
        semipit_core::decoder::events_to_ndjson(&a.events),
        semipit_core::decoder::events_to_ndjson(&b.events)
    );
    pass(
        "pipeline scenarios",
        "scripted replays decode ≥ 99% with deterministic output".to_string(),
    );
}

/// The symbol decoder never needs the transmitter's peak detector seeded
/// with the actual symbol: detection is carrier-blind until classification.
#[test]
fn detector_is_carrier_blind() {
    let scenario = load("nominal.toml");
    let system = scenario.build_system().unwrap();
    let detector = PeakDetector::for_system(&system, Default::default()).unwrap();
    // A ring parked between carriers is detected, then rejected by guard.
    let off_grid = system.with_ring_tuned(28.00e6).unwrap();
    let frame = off_grid.frame(9, 0, 0.0);
    let peak = detector.detect(&frame).unwrap().expect("peak found");
    assert!((peak.peak_frequency_hz - 28.0e6).abs() < 3.0 * system.sweep_config().step_hz());
    let event = semipit_core::decoder::classify(&peak, &Default::default(), 0.0);
    assert_eq!(event, None, "between-carrier peak must not classify");
}
