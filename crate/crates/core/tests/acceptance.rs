//! Acceptance gate: one PASS/FAIL line per criterion and a summary line.
//! Runs without the libtest harness so the report is always printed. Failing
//! criteria are reported but only change the exit status when
//! `RISDET_ACCEPTANCE_STRICT=1` is set.

mod common;

use std::time::Instant;

use common::*;
use num_complex::Complex64;
use risdet::config::RunConfig;
use risdet::detectors::{direct, Baseline, CGlrtConfig, DetectorKind, KmVariant, Prepared};
use risdet::geometry::{compute_delays, scenario_report, PathDistances, ScenarioGeometry};
use risdet::hermitian::{CMat, CVec};
use risdet::montecarlo::{
    calibration_sample, cfar_sweep, convergence_study, pd_curve, rmse_nm, sliding_window,
    CurvePoint, Simulation, SweepAxis, ThresholdTable,
};
use risdet::ris_design::{
    chirp_rate, crossovers, default_side_grid, from_db, lfm_rcs, min_size, tapering_comparison,
    to_db, LinkBudget,
};
use risdet::signal_model::{DataSet, SteeringSet};

const PFA: f64 = 1e-3;
const TRIALS_CAL: usize = 100_000;
const TRIALS_FA: usize = 100_000;
const TRIALS_PD: usize = 1_000;
const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn all_kinds() -> Vec<DetectorKind> {
    RunConfig::default().detectors.list
}

const KM: [DetectorKind; 2] = [DetectorKind::EpGlrtKm1, DetectorKind::EpGlrtKm2];
const DET_RATIO: [DetectorKind; 3] = [
    DetectorKind::EpGlrtKa,
    DetectorKind::CGlrt,
    DetectorKind::AGlrt,
];

fn baselines() -> [DetectorKind; 2] {
    [
        DetectorKind::Kelly(Baseline::default()),
        DetectorKind::Amf(Baseline::default()),
    ]
}

// ---------------------------------------------------------------- 1

fn scenario() -> Verdict {
    let r = scenario_report(&ScenarioGeometry::case_study(), 6).expect("case-study report");
    let layout = r.layout.map(|l| (l.n, l.m));
    let d = PathDistances {
        d_rt: 19_000.0,
        d_rs: 20_000.0,
        d_st: 1_000.0,
    };
    let t = compute_delays(&d).expect("delays");
    let us = [t.tau1 * 1e6, t.tau2 * 1e6, t.tau3 * 1e6];
    let pass = layout == Some((3, 6))
        && (r.theta_si_deg - 89.62).abs() <= 0.05
        && (r.theta_so_deg - 26.5).abs() <= 0.1
        && us
            .iter()
            .zip([126.0, 133.0, 140.0])
            .all(|(a, b)| (a - b).abs() <= 1.0);
    verdict(
        pass,
        format!(
            "(n,m)={layout:?} want (3,6); theta_si={:.3} want 89.62±0.05; theta_so={:.3} want 26.5±0.1; \
             delays=({:.2}, {:.2}, {:.2}) us want (126,133,140)±1",
            r.theta_si_deg, r.theta_so_deg, us[0], us[1], us[2]
        ),
    )
}

// ---------------------------------------------------------------- 2, 3

fn datasets() -> Vec<(DataSet, SteeringSet)> {
    (0..200u64)
        .map(|i| random_case([4, 8, 16][i as usize % 3], 6, 7_000 + i))
        .collect()
}

fn scale_invariance(cases: &[(DataSet, SteeringSet)]) -> Verdict {
    let cfg = CGlrtConfig::default();
    let kinds = DetectorKind::PROPOSED;
    let (mut worst_det, mut worst_km) = (0.0f64, 0.0f64);
    let mut pair_changes = 0;
    for (data, st) in cases {
        let base = Prepared::new(data, st)
            .unwrap()
            .evaluate(&kinds, &cfg)
            .unwrap();
        for gamma in [1e-3, 1.0, 1e3] {
            let scaled = Prepared::new(&data.scaled(gamma), st)
                .unwrap()
                .evaluate(&kinds, &cfg)
                .unwrap();
            for ((k, a), b) in kinds.iter().zip(&base).zip(&scaled) {
                let dev = rel(b.statistic, a.statistic);
                if k.is_det_ratio() {
                    worst_det = worst_det.max(dev);
                } else {
                    worst_km = worst_km.max(dev);
                }
                pair_changes += usize::from(a.pair != b.pair);
            }
        }
    }
    verdict(
        worst_det < 1e-9 && worst_km < 1e-9 && pair_changes == 0,
        format!(
            "200 datasets, gamma in {{1e-3,1,1e3}}: det-ratio max rel dev {worst_det:.2e} (tol 1e-9); \
             KM max |T(gamma)/T(1) - 1| = {worst_km:.2e}, i.e. KM is scale invariant (a gamma^2 law \
             would give 1e-6/1e6; invariance follows from the plug-in matrix scaling with the data, \
             see ledger); argmax pair changes {pair_changes}"
        ),
    )
}

fn bounded(cases: &[(DataSet, SteeringSet)]) -> Verdict {
    let cfg = CGlrtConfig::default();
    let (mut checks, mut violations) = (0, 0);
    for (data, st) in cases {
        let p = Prepared::new(data, st).unwrap();
        let outs = p.evaluate(&DetectorKind::PROPOSED, &cfg).unwrap();
        let bound = p.det_ratio_bound() * (1.0 + 1e-12);
        for (k, o) in DetectorKind::PROPOSED.iter().zip(&outs) {
            let limit = match k {
                DetectorKind::EpGlrtKm1 => p.km1_bound() * (1.0 + 1e-12),
                DetectorKind::EpGlrtKm2 => p.km2_bound() * (1.0 + 1e-12),
                _ => bound,
            };
            checks += 1;
            violations += usize::from(o.statistic > limit);
        }
    }
    verdict(
        violations == 0,
        format!("{checks} statistic/bound checks, {violations} violations (want 0)"),
    )
}

// ---------------------------------------------------------------- 4

fn cfar(cfg: &RunConfig, th: &ThresholdTable) -> Verdict {
    let kinds = all_kinds();
    let mut pts = cfar_sweep(
        cfg,
        th,
        &kinds,
        SweepAxis::Cnr,
        &[-15.0, 0.0, 15.0, 30.0],
        TRIALS_FA,
        SEED,
    )
    .unwrap();
    let rho = cfar_sweep(
        cfg,
        th,
        &kinds,
        SweepAxis::Rho,
        &[0.1, 0.5, 0.9],
        TRIALS_FA,
        SEED,
    )
    .unwrap();
    let n_cnr = pts.len();
    pts.extend(rho);
    let (lo, hi) = (PFA / 3.0, 3.0 * PFA);
    let bad: Vec<String> = pts
        .iter()
        .enumerate()
        .filter(|(_, p)| !(lo..=hi).contains(&p.estimate))
        .map(|(i, p)| {
            format!(
                "{}@{}{}={:.1e}",
                p.detector,
                if i < n_cnr { "CNR" } else { "rho" },
                p.x,
                p.estimate
            )
        })
        .collect();
    let (min, max) = pts.iter().fold((1.0f64, 0.0f64), |(a, b), p| {
        (a.min(p.estimate), b.max(p.estimate))
    });
    verdict(
        bad.is_empty(),
        format!(
            "{} points x {TRIALS_FA} H0 trials, P_fa range [{min:.2e}, {max:.2e}], band [{lo:.2e}, {hi:.2e}]{}",
            pts.len(),
            if bad.is_empty() { String::new() } else { format!("; outside: {}", bad.join(", ")) }
        ),
    )
}

// ---------------------------------------------------------------- 5

/// SINR at which P_d first reaches `level`, linearly interpolated.
fn crossing(curve: &[CurvePoint], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.estimate >= level {
            Some(a.x)
        } else if b.estimate >= level {
            Some(a.x + (level - a.estimate) / (b.estimate - a.estimate) * (b.x - a.x))
        } else {
            None
        }
    })
}

fn fmt_db(x: Option<f64>) -> String {
    x.map_or_else(|| "never".into(), |v| format!("{v:.2}"))
}

fn detection(sim: &Simulation, th: &ThresholdTable) -> Verdict {
    let kinds = all_kinds();
    let grid: Vec<f64> = (-20..=26).map(f64::from).collect();
    let pts = pd_curve(sim, th, &kinds, &grid, TRIALS_PD, SEED).unwrap();
    let curve = |k: DetectorKind| -> Vec<CurvePoint> {
        pts.iter().filter(|p| p.detector == k).copied().collect()
    };
    let x90 = |k: DetectorKind| crossing(&curve(k), 0.9);

    let proposed: Vec<(DetectorKind, Option<f64>)> = DetectorKind::PROPOSED
        .iter()
        .map(|&k| (k, x90(k)))
        .collect();
    let base: Vec<(DetectorKind, Option<f64>)> = baselines().iter().map(|&k| (k, x90(k))).collect();
    let a_ok = proposed.iter().all(|(_, x)| x.is_some_and(|v| v <= 0.0))
        && base.iter().all(|(_, x)| x.is_none_or(|v| v >= 15.0));
    let dr: Vec<f64> = DET_RATIO.iter().filter_map(|&k| x90(k)).collect();
    let spread = dr.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - dr.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let b_ok = dr.len() == 3 && spread <= 1.5;
    let gap = match (x90(KM[0]), x90(KM[1])) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let c_ok = gap.is_some_and(|g| (g - 1.5).abs() <= 1.0);
    let list = |v: &[(DetectorKind, Option<f64>)]| {
        v.iter()
            .map(|(k, x)| format!("{k}={}", fmt_db(*x)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    verdict(
        a_ok && b_ok && c_ok,
        format!(
            "SINR at P_d=0.9 (dB, grid -20..26): {}; {}. (a) proposed <= 0, baselines >= 15: {}; \
             (b) A/C/KA spread {spread:.2} dB (<= 1.5): {}; (c) KM-1 minus KM-2 = {} dB (1.5±1): {}",
            list(&proposed),
            list(&base),
            ok(a_ok),
            ok(b_ok),
            fmt_db(gap),
            ok(c_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "NOT MET"
    }
}

// ---------------------------------------------------------------- 6

fn convergence(cfg: &RunConfig) -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for k_s in [24, 32] {
        let model = risdet::config::ModelConfig {
            k_s,
            ..cfg.model.clone()
        };
        let sim = Simulation::with_model(cfg, &model).unwrap();
        let rep = convergence_study(&sim, 0.0, &[], 1000, SEED).unwrap();
        let c = &rep.curves[0];
        let h = c.first_below(1e-5);
        pass &= h.is_some_and(|h| h <= 10) && rep.violations == 0;
        parts.push(format!(
            "K_S={k_s}: mean gain < 1e-5 first at h={} (want <= 8+2), {} / {} updates decreased the likelihood",
            h.map_or("never".into(), |h| h.to_string()),
            rep.violations,
            rep.updates
        ));
    }
    verdict(
        pass,
        format!(
            "1000 H1 trials at SINR 0 dB, pair (3,6); {}",
            parts.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- 7

fn localization(cfg: &RunConfig) -> Verdict {
    let model = risdet::config::ModelConfig {
        k_s: 32,
        ..cfg.model.clone()
    };
    let sim = Simulation::with_model(cfg, &model).unwrap();
    let grid: Vec<f64> = (-30..=10).step_by(2).map(f64::from).collect();
    let pts = rmse_nm(&sim, &DetectorKind::PROPOSED, &grid, TRIALS_PD, SEED).unwrap();
    let mut worst_n: f64 = 0.0;
    let mut worst_m: f64 = 0.0;
    for p in &pts {
        if p.sinr_db >= -20.0 {
            worst_n = worst_n.max(p.rmse_n);
        }
        if p.sinr_db >= -10.0 {
            worst_m = worst_m.max(p.rmse_m);
        }
    }
    let first_below = |k: DetectorKind, f: fn(&risdet::montecarlo::RmsePoint) -> f64| {
        let rows: Vec<_> = pts.iter().filter(|p| p.detector == k).collect();
        let idx = rows.iter().rposition(|p| f(p) >= 1.0).map_or(0, |i| i + 1);
        rows.get(idx)
            .map_or("none".to_string(), |p| format!("{}", p.sinr_db))
    };
    let onset: Vec<String> = DetectorKind::PROPOSED
        .iter()
        .map(|&k| {
            format!(
                "{k} n<1 from {} m<1 from {}",
                first_below(k, |p| p.rmse_n),
                first_below(k, |p| p.rmse_m)
            )
        })
        .collect();
    verdict(
        worst_n < 1.0 && worst_m < 1.0,
        format!(
            "K_S=32, {TRIALS_PD} trials: max RMSE_n over SINR >= -20 dB = {worst_n:.3}, max RMSE_m over SINR >= -10 dB = \
             {worst_m:.3} (both < 1); {}",
            onset.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- 8

fn sliding(sim: &Simulation, th: &ThresholdTable) -> Verdict {
    let kinds = DetectorKind::PROPOSED;
    let pts = sliding_window(sim, th, &kinds, 0.0, 20, [1, 3, 6], TRIALS_PD, SEED).unwrap();
    let pd = |k: DetectorKind, start: usize| {
        pts.iter()
            .find(|p| p.detector == k && p.x as usize == start)
            .expect("window point")
            .estimate
    };
    // bins 1 and 3 leave from start 4; bin 6 leaves from start 7
    let mut dr_worst: f64 = 0.0;
    for k in DET_RATIO {
        for s in 4..=15 {
            dr_worst = dr_worst.max(pd(k, s));
        }
    }
    let mut km_worst: f64 = 1.0;
    for k in KM {
        for s in 1..=6 {
            km_worst = km_worst.min(pd(k, s));
        }
    }
    let row = |k: DetectorKind| {
        (1..=15)
            .map(|s| format!("{:.2}", pd(k, s)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let rows: Vec<String> = kinds
        .iter()
        .map(|&k| format!("{k}: [{}]", row(k)))
        .collect();
    verdict(
        dr_worst < 0.1 && km_worst > 0.8,
        format!(
            "SINR 0 dB, {TRIALS_PD} trials, starts 1..15: det-ratio max P_d for starts >= 4 = {dr_worst:.3} (< 0.1); \
             KM min P_d for starts <= 6 = {km_worst:.3} (> 0.8); {}",
            rows.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- 9

fn ris() -> Verdict {
    let lb = LinkBudget::case_study();
    let c = crossovers(&lb);
    let (comb, s1, s2) = (to_db(c.combined), to_db(c.rstr), to_db(c.rstsr));
    let cross_ok = (comb - 55.0).abs() <= 2.0;

    let lambda = 0.1;
    let l = 100.0 * lambda;
    let lfm = to_db(lfm_rcs(l, chirp_rate(10.0, lambda, l), lambda));
    let lfm_ok = lfm > 60.0;

    let rows = tapering_comparison(lambda, 10.0, &default_side_grid(lambda)).unwrap();
    let order_ok = rows.len() == 20 && rows.iter().all(|r| r.uniform >= r.lfm && r.lfm >= r.sinc);

    let hpbw = min_size(from_db(55.0), lambda).unwrap().hpbw_deg;
    let hpbw_ok = (hpbw - 1.5).abs() <= 0.5;
    verdict(
        cross_ok && lfm_ok && order_ok && hpbw_ok,
        format!(
            "RIS paths (RSTR+RSTSR) exceed RTR above {comb:.2} dBsm (want 55±2): {}; per path RSTR {s1:.2}, \
             RSTSR {s2:.2} dBsm; LFM at L=100 lambda, phi0=10 deg: {lfm:.2} dBsm (> 60): {}; uniform >= LFM >= sinc \
             on 20-point grid {:.1}..{:.1} m: {}; HPBW at 55 dBsm = {hpbw:.3} deg (1.5±0.5): {}",
            ok(cross_ok),
            ok(lfm_ok),
            rows[0].side,
            rows[rows.len() - 1].side,
            ok(order_ok),
            ok(hpbw_ok)
        ),
    )
}

// ---------------------------------------------------------------- 10

struct Tally {
    worst: f64,
    checks: usize,
    pair_mismatches: usize,
}

impl Tally {
    fn cmp(&mut self, got: f64, want: f64) {
        self.worst = self.worst.max(rel(got, want));
        self.checks += 1;
    }

    fn cmp_c(&mut self, got: Complex64, want: Complex64) {
        self.worst = self
            .worst
            .max((got - want).norm() / want.norm().max(1e-300));
        self.checks += 1;
    }

    fn pair(&mut self, got: Option<(usize, usize)>, want: (usize, usize)) {
        self.pair_mismatches += usize::from(got != Some(want));
    }
}

fn oracles() -> Verdict {
    let mut t = Tally {
        worst: 0.0,
        checks: 0,
        pair_mismatches: 0,
    };
    let cfg = CGlrtConfig::default();
    let id = CMat::identity(1, 1);

    // N = 1, K_P = 3: KM = Σ|z_k|²/S_S for v_R = v_S = 1, no disturbance-only cells
    let st1 = SteeringSet::new(cv(&[c(1.0, 0.0)]), cv(&[c(1.0, 0.0)])).unwrap();
    let d1 = DataSet::new(
        CMat::from_row_slice(1, 3, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]),
        &id * c(2f64.sqrt(), 0.0),
    )
    .unwrap();
    let p1 = Prepared::new(&d1, &st1).unwrap();
    for v in [KmVariant::One, KmVariant::Two] {
        let o = p1.ep_glrt_km(v);
        t.cmp(o.statistic, 7.0);
        t.pair(o.pair, (2, 3));
    }

    // N = 1, K_P = 6: residuals vanish, det ratios reduce to energy ratios
    let z = [
        c(0.3, 0.1),
        c(-1.2, 0.4),
        c(0.2, 0.2),
        c(2.0, -1.0),
        c(0.5, 0.0),
        c(0.1, -0.3),
    ];
    let ss = 1.7f64;
    let st1b =
        SteeringSet::new(cv(&[c(1.0, 0.0)]), cv(&[Complex64::from_polar(1.0, 0.3)])).unwrap();
    let d1b = DataSet::new(CMat::from_row_slice(1, 6, &z), &id * c(ss.sqrt(), 0.0)).unwrap();
    let e: Vec<f64> = z.iter().map(|x| x.norm_sqr()).collect();
    let total = ss + e.iter().sum::<f64>();
    let want = total / (total - e[0] - e[1] - e[3]);
    let p1b = Prepared::new(&d1b, &st1b).unwrap();
    for o in [
        p1b.ep_glrt_ka().unwrap(),
        p1b.a_glrt().unwrap(),
        p1b.c_glrt(&cfg).unwrap(),
    ] {
        t.cmp(o.statistic, want);
        t.pair(o.pair, (2, 4));
    }
    // scalar amplitude estimates are z_k / v_k whatever the plug matrix
    for (n, m) in [(2, 3), (4, 6)] {
        let sig = [
            c(1.0, 0.0),
            c(1.0, 0.0) + Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, 0.3),
        ];
        let cells = [z[0], z[n - 1], z[m - 1]];
        for plug in [KmVariant::One, KmVariant::Two] {
            let a = p1b.pair(n, m).unwrap().alphas(plug);
            for i in 0..3 {
                t.cmp_c(a[i], cells[i] / sig[i]);
            }
        }
    }

    // N = 2: explicit inverses and determinants
    for seed in 0..10u64 {
        let (data, st) = random_case(2, 4, 500 + seed);
        let ss = &data.secondary * data.secondary.adjoint();
        let num = det_re(&(&ss + &data.primary * data.primary.adjoint()));
        let zs: Vec<CVec> = (1..=4).map(|k| cv(data.z(k))).collect();
        let v = [&st.v_r, &st.v_sr, &st.v_s];
        let inv_ss = inverse(&ss);
        let p = Prepared::new(&data, &st).unwrap();
        let mut best = [(f64::NEG_INFINITY, (0, 0)); 4];
        for (n, m) in [(2, 3), (2, 4), (3, 4)] {
            let o = 9 - n - m;
            let s_nm = &ss + &zs[o - 1] * zs[o - 1].adjoint();
            let inv_nm = inverse(&s_nm);
            let cells = [&zs[0], &zs[n - 1], &zs[m - 1]];
            let a_ss = oracle_alphas(&inv_ss, cells, v);
            let a_nm = oracle_alphas(&inv_nm, cells, v);
            let ps = p.pair(n, m).unwrap();
            for (got, want) in ps.alphas(KmVariant::One).iter().zip(&a_ss) {
                t.cmp_c(*got, *want);
            }
            for (got, want) in ps.alphas(KmVariant::Two).iter().zip(&a_nm) {
                t.cmp_c(*got, *want);
            }
            let energy = |inv: &CMat| -> f64 {
                (0..3)
                    .map(|i| quad(v[i], inv, cells[i]).norm_sqr() / quad(v[i], inv, v[i]).re)
                    .sum()
            };
            let stats = [
                energy(&inv_ss),
                energy(&inv_nm),
                num / oracle_residual_det(&s_nm, cells, v, a_ss),
                num / oracle_residual_det(&s_nm, cells, v, a_nm),
            ];
            for (b, s) in best.iter_mut().zip(stats) {
                if s > b.0 {
                    *b = (s, (n, m));
                }
            }
        }
        let got = [
            p.ep_glrt_km(KmVariant::One),
            p.ep_glrt_km(KmVariant::Two),
            p.ep_glrt_ka().unwrap(),
            p.a_glrt().unwrap(),
        ];
        for (g, b) in got.iter().zip(best) {
            t.cmp(g.statistic, b.0);
            t.pair(g.pair, b.1);
        }
        // baselines on cell 1 with v_R
        let z1 = &zs[0];
        let q = quad(&st.v_r, &inv_ss, z1).norm_sqr();
        let vv = quad(&st.v_r, &inv_ss, &st.v_r).re;
        let zz = quad(z1, &inv_ss, z1).re;
        t.cmp(p.kelly(Baseline::default()).unwrap(), q / (vv * (1.0 + zz)));
        t.cmp(p.amf(Baseline::default()).unwrap(), q / vv);
    }

    // N = 2, K_P = 3: one cyclic iteration transcribed update by update
    for seed in 0..10u64 {
        let (data, st) = random_case(2, 3, 600 + seed);
        let ss = &data.secondary * data.secondary.adjoint();
        let zs: Vec<CVec> = (1..=3).map(|k| cv(data.z(k))).collect();
        let cells = [&zs[0], &zs[1], &zs[2]];
        let v = [&st.v_r, &st.v_sr, &st.v_s];
        let mut a = oracle_alphas(&inverse(&ss), cells, v);
        for slot in 0..3 {
            let mut cm = ss.clone();
            for other in (0..3).filter(|&o| o != slot) {
                let r = cells[other] - v[other] * a[other];
                cm += &r * r.adjoint();
            }
            let inv = inverse(&cm);
            a[slot] = quad(v[slot], &inv, cells[slot]) / quad(v[slot], &inv, v[slot]).re;
        }
        let num = det_re(&(&ss + &data.primary * data.primary.adjoint()));
        let want = num / oracle_residual_det(&ss, cells, v, a);
        let one = CGlrtConfig {
            epsilon: 1e-5,
            h_max: 1,
        };
        let fast = Prepared::new(&data, &st).unwrap().c_glrt(&one).unwrap();
        t.cmp(fast.statistic, want);
        t.cmp(direct::c_glrt(&data, &st, &one).unwrap().statistic, want);
    }

    verdict(
        t.worst < 1e-10 && t.pair_mismatches == 0,
        format!(
            "{} comparisons (KM-1, KM-2, KA, A-GLRT, C-GLRT, Kelly, AMF, alpha-hat(S_S), alpha-hat(S_nm)): \
             max rel error {:.2e} (tol 1e-10), argmax mismatches {}",
            t.checks, t.worst, t.pair_mismatches
        ),
    )
}

// ----------------------------------------------------------------

fn main() {
    let cfg = RunConfig::default();
    let sim = Simulation::from_config(&cfg).expect("default simulation");
    let mut results: Vec<(usize, &str, Verdict, f64)> = Vec::new();
    let mut run = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let t0 = Instant::now();
        let v = f();
        let secs = t0.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {} [{name}] ({secs:.1} s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((id, name, v, secs));
    };

    run(1, "scenario reproduction", &mut scenario);
    let cases = datasets();
    run(2, "scale invariance", &mut || scale_invariance(&cases));
    run(3, "bounded CFAR", &mut || bounded(&cases));

    let t0 = Instant::now();
    let th = calibration_sample(&sim, &all_kinds(), TRIALS_CAL, SEED)
        .and_then(|s| s.thresholds(PFA))
        .expect("calibration");
    let listed: Vec<String> = th
        .entries
        .iter()
        .map(|e| format!("{}={:.4}", e.detector, e.threshold))
        .collect();
    println!(
        "calibration: {TRIALS_CAL} H0 trials, pfa {PFA:e}, {:.1} s: {}",
        t0.elapsed().as_secs_f64(),
        listed.join(", ")
    );

    run(4, "CFAR sweep", &mut || cfar(&cfg, &th));
    run(5, "detection ordering", &mut || detection(&sim, &th));
    run(6, "C-GLRT convergence", &mut || convergence(&cfg));
    run(7, "RMSE of (n, m)", &mut || localization(&cfg));
    run(8, "sliding window", &mut || sliding(&sim, &th));
    run(9, "RIS design", &mut ris);
    run(10, "oracle equivalence", &mut oracles);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} / {} criteria PASS",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("acceptance: FAILED criteria {failed:?}");
        if std::env::var("RISDET_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
