use std::sync::OnceLock;

use proptest::prelude::*;
use risdet::config::{ModelConfig, RunConfig};
use risdet::detectors::{Baseline, DetectorKind};
use risdet::montecarlo::{
    calibration_sample, cfar_sweep, convergence_study, false_alarm_rate, pd_curve, quantile,
    rmse_nm, sliding_window, Simulation, SweepAxis, ThresholdTable,
};
use risdet::rng::domain_tag;

const PFA: f64 = 0.01;
const SEED: u64 = 99;

/// N = 8, K_S = 16 keeps these tests to a few seconds.
fn small_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.model = ModelConfig {
        n: 8,
        k_s: 16,
        ..cfg.model
    };
    cfg
}

fn kinds() -> Vec<DetectorKind> {
    let mut k = DetectorKind::PROPOSED.to_vec();
    k.push(DetectorKind::Amf(Baseline::default()));
    k
}

fn setup() -> &'static (RunConfig, Simulation, ThresholdTable) {
    static CELL: OnceLock<(RunConfig, Simulation, ThresholdTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = small_config();
        let sim = Simulation::from_config(&cfg).unwrap();
        let th = calibration_sample(&sim, &kinds(), 20_000, SEED)
            .unwrap()
            .thresholds(PFA)
            .unwrap();
        (cfg, sim, th)
    })
}

#[test]
fn calibration_is_reproducible_and_thread_independent() {
    let (_, sim, th) = setup();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                calibration_sample(sim, &kinds(), 20_000, SEED)
                    .unwrap()
                    .thresholds(PFA)
                    .unwrap()
            })
    };
    assert_eq!(&run(1), th);
    assert_eq!(&run(3), th);
    let other = calibration_sample(sim, &kinds(), 20_000, SEED + 1)
        .unwrap()
        .thresholds(PFA)
        .unwrap();
    assert_ne!(&other, th);
}

#[test]
fn fresh_h0_batches_respect_pfa() {
    let (_, sim, th) = setup();
    let t = 20_000;
    let pts = false_alarm_rate(sim, th, &kinds(), t, SEED, domain_tag("fresh-h0", 0), 0.0).unwrap();
    // calibration and test batch both contribute binomial error
    let band = 3.0 * (2.0 * PFA * (1.0 - PFA) / t as f64).sqrt();
    for p in pts {
        assert!(
            (p.estimate - PFA).abs() <= band,
            "{}: {} vs {PFA} ± {band}",
            p.detector,
            p.estimate
        );
        assert!(p.stderr > 0.0);
    }
}

#[test]
fn overwhelming_signal_is_always_detected() {
    let (_, sim, th) = setup();
    let pts = pd_curve(sim, th, &DetectorKind::PROPOSED, &[60.0], 500, SEED).unwrap();
    assert_eq!(pts.len(), 5);
    for p in pts {
        assert!(p.estimate >= 0.999, "{}: {}", p.detector, p.estimate);
    }
}

#[test]
fn single_value_sweep_is_a_plain_reestimate() {
    let (cfg, _, th) = setup();
    let swept = cfar_sweep(cfg, th, &kinds(), SweepAxis::Rho, &[0.5], 2_000, SEED).unwrap();
    let model = ModelConfig {
        rho: 0.5,
        ..cfg.model.clone()
    };
    let sim = Simulation::with_model(cfg, &model).unwrap();
    let plain = false_alarm_rate(
        &sim,
        th,
        &kinds(),
        2_000,
        SEED,
        domain_tag("cfar-rho", 0),
        0.5,
    )
    .unwrap();
    assert_eq!(swept, plain);
}

#[test]
fn convergence_trace_shape() {
    let (cfg, sim, _) = setup();
    let rep = convergence_study(sim, 0.0, &[(3, 6), (2, 4)], 200, SEED).unwrap();
    assert_eq!(rep.violations, 0);
    for c in &rep.curves {
        assert_eq!(c.mean_gain.len(), cfg.detectors.c_glrt.h_max);
        assert!(c.mean_gain.iter().all(|&g| g >= 0.0));
        assert!(c.mean_gain.last().unwrap() < &c.mean_gain[0]);
    }

    let mut one = sim.clone();
    one.c_glrt.h_max = 1;
    let rep = convergence_study(&one, 0.0, &[], 20, SEED).unwrap();
    assert_eq!(rep.curves.len(), 1);
    assert_eq!(rep.curves[0].pair, (3, 6));
    assert_eq!(rep.curves[0].mean_gain.len(), 1);
}

#[test]
fn localization_is_exact_at_high_sinr() {
    let (_, sim, _) = setup();
    let pts = rmse_nm(sim, &kinds(), &[40.0], 200, SEED).unwrap();
    // the AMF baseline has no (n, m) estimate and is skipped
    assert_eq!(pts.len(), 5);
    for p in pts {
        assert_eq!((p.rmse_n, p.rmse_m), (0.0, 0.0), "{}", p.detector);
    }
}

#[test]
fn windows_past_the_echoes_are_pure_h0() {
    let (_, sim, th) = setup();
    let trials = 500;
    let pts = sliding_window(sim, th, &kinds(), 0.0, 20, [1, 3, 6], trials, SEED).unwrap();
    assert_eq!(pts.len(), 15 * kinds().len());
    let limit = PFA + 4.0 * (PFA * (1.0 - PFA) / trials as f64).sqrt();
    for p in pts.iter().filter(|p| p.x >= 7.0) {
        assert!(
            p.estimate <= limit,
            "{} at start {}: {}",
            p.detector,
            p.x,
            p.estimate
        );
    }
    for p in pts
        .iter()
        .filter(|p| p.x == 1.0 && !p.detector.is_baseline())
    {
        assert!(
            p.estimate > 0.9,
            "{} at start 1: {}",
            p.detector,
            p.estimate
        );
    }
}

#[test]
fn too_few_bins_for_the_window() {
    let (_, sim, th) = setup();
    assert!(sliding_window(sim, th, &kinds(), 0.0, 5, [1, 3, 6], 10, SEED).is_err());
}

proptest! {
    #[test]
    fn threshold_monotone_in_pfa(
        stats in prop::collection::vec(-1e3f64..1e3, 10..400),
        a in 0.001f64..0.999,
        b in 0.001f64..0.999,
    ) {
        let (small, large) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(quantile(&stats, small).unwrap() >= quantile(&stats, large).unwrap());
    }
}
