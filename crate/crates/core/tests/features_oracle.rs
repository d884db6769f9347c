#[path = "support/feature_oracle.rs"]
mod feature_oracle;

use de_ddqn_core::bench::registry;
use de_ddqn_core::de::{DeRun, FeatureConfig};
use de_ddqn_core::features::{
    history_features, improvement_metrics, record_application, MetricWindow, OperatorHistory,
    HISTORY_FEATURES, SUCCESS_RATE_BASE,
};
use de_ddqn_core::rng::seeded;
use de_ddqn_core::{DeParams, Strategy, STATE_DIM};
use proptest::strategy::Strategy as Gen;
use feature_oracle::App;
use proptest::prelude::*;
use rand::Rng;

fn incremental(trace: &[Vec<App>], gen: usize, w: usize) -> Vec<f64> {
    let mut h = OperatorHistory::new(gen);
    let mut win = MetricWindow::new(w);
    for (g, apps) in trace.iter().enumerate() {
        if g > 0 || h.is_empty() {
            h.rotate();
        }
        for a in apps {
            record_application(&mut h, &mut win, a.op, a.parent, a.trial, a.best_parent, a.bsf, a.median);
        }
    }
    let mut out = vec![0.0; HISTORY_FEATURES];
    history_features(&h, &win, &mut out);
    out
}

fn app_strategy() -> impl Gen<Value = App> {
    // small integer-valued fitness makes ties and zero improvements common
    (0usize..4, 0i32..8, 0i32..8, 0i32..8, 0i32..8, 0i32..8).prop_map(|(op, p, t, b, s, m)| App {
        op: Strategy::ALL[op],
        parent: p as f64,
        trial: t as f64 * 0.75,
        best_parent: b as f64,
        bsf: s as f64,
        median: m as f64,
    })
}

#[test]
fn spec_metric_example() {
    let om = improvement_metrics(5.0, 3.0, 4.0, 2.0, 6.0);
    assert_eq!(om, [2.0, 1.0, -1.0, 3.0]);
    let mut h = OperatorHistory::new(10);
    let mut w = MetricWindow::new(50);
    h.rotate();
    record_application(&mut h, &mut w, Strategy::Rand1, 5.0, 3.0, 4.0, 2.0, 6.0);
    let rec = h.current().unwrap();
    assert_eq!(rec.applications[0], 1);
    assert_eq!([0, 1, 2, 3].map(|m| rec.successes[m][0]), [1, 1, 0, 1]);
    assert_eq!(w.len(), 1);
    // no improvement anywhere: only the application count moves
    record_application(&mut h, &mut w, Strategy::Rand1, 5.0, 9.0, 4.0, 2.0, 6.0);
    let rec = h.current().unwrap();
    assert_eq!(rec.applications[0], 2);
    assert_eq!([0, 1, 2, 3].map(|m| rec.successes[m][0]), [1, 1, 0, 1]);
    assert_eq!(w.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scripted_traces_match_oracle(
        trace in prop::collection::vec(prop::collection::vec(app_strategy(), 0..12), 1..14),
        gen in 1usize..6,
        w in 1usize..8,
    ) {
        let inc = incremental(&trace, gen, w);
        let ora = feature_oracle::history_features(&trace, gen, w);
        prop_assert_eq!(inc, ora);
    }
}

#[test]
fn live_runs_match_oracle_every_step() {
    let mut rng = seeded(31);
    for (k, r) in registry().iter().enumerate().take(12) {
        let f = r.instantiate(3 + k % 5).unwrap();
        let params = DeParams {
            population_size: 8,
            max_evals: 8 + 8 * 14,
            ..DeParams::default()
        };
        let fc = FeatureConfig {
            history_len: 10,
            window_size: 6,
            dim_max: 10,
        };
        let mut de = DeRun::new(&f, params, fc, k as u64).unwrap();
        let mut trace: Vec<Vec<App>> = vec![Vec::new()];
        while !de.is_done() {
            let s = de.state();
            let ora = feature_oracle::history_features(&trace, 10, 6);
            assert_eq!(&s[SUCCESS_RATE_BASE..], &ora[..], "{} step", r.id);
            let op = Strategy::ALL[rng.random_range(0..4)];
            let o = de.step(op).unwrap();
            trace.last_mut().unwrap().push(App {
                op,
                parent: o.parent_fitness,
                trial: o.trial_fitness,
                best_parent: o.best_parent_fitness,
                bsf: o.bsf_before,
                median: o.median_fitness,
            });
            if de.cursor() == 0 {
                trace.push(Vec::new());
            }
        }
    }
}

#[test]
fn fuzzed_states_stay_in_unit_box() {
    let mut rng = seeded(8);
    let mut steps = 0;
    let mut run = 0u64;
    while steps < 100_000 {
        let r = &registry()[rng.random_range(0..registry().len())];
        let f = r.instantiate(rng.random_range(2..12)).unwrap();
        let params = DeParams {
            population_size: rng.random_range(6..30),
            max_evals: 1500,
            ..DeParams::default()
        };
        let mut de = DeRun::new(&f, params, FeatureConfig::new(12), run).unwrap();
        while !de.is_done() {
            let s = de.state();
            assert_eq!(s.len(), STATE_DIM);
            assert!(s.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)), "{}: {s:?}", r.id);
            for block in s[SUCCESS_RATE_BASE..].chunks(4) {
                let total: f64 = block.iter().sum();
                assert!(total == 0.0 || (total - 1.0).abs() <= 1e-9, "{block:?}");
            }
            de.step(Strategy::ALL[rng.random_range(0..4)]).unwrap();
            steps += 1;
        }
        run += 1;
    }
}
