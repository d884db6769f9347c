use std::fs;
use std::path::Path;

use de_ddqn::checkpoint;
use de_ddqn::config::Config;
use de_ddqn::eval::{self, rank, PolicyKind};
use de_ddqn::train::{self, LOG_HEADER};
use de_ddqn::transform_io::{build_suite, load_transform_data, SuitePart};
use de_ddqn::Error;
use de_ddqn_core::bench::registered;
use de_ddqn_core::de::FeatureConfig;
use de_ddqn_core::{DeParams, Strategy};
use nalgebra::DMatrix;
use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest};
use proptest::strategy::Strategy as _;
use rand::Rng;

/// Four training functions at dims 5 and 10 with a reduced budget and a
/// small network so twenty cycles stay quick.
const DESK: &str = "\
population_size = 20
max_evals = 600
warmup = 1000
memory_capacity = 20000
batch_size = 32
sync_period = 200
hidden_layers = 2
hidden_units = 24
cycles = 20
patience = 100
seed = 4
train_functions = sphere_shifted, ackley_shifted_rotated, expanded_scaffer_shifted_rotated, hybrid1
test_functions = rastrigin_shifted, hybrid2
dims = 5, 10
";

fn desk_config(dir: &Path) -> Config {
    let path = dir.join("desk.cfg");
    fs::write(&path, DESK).unwrap();
    Config::load(&path).unwrap()
}

#[test]
fn desk_scale_training_then_greedy_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = desk_config(dir.path());
    let ckpt = dir.path().join("desk.ckpt");
    let mut seen = Vec::new();
    let report = train::train(&cfg, &ckpt, None, &mut |c, m, s| seen.push((c, m, s))).unwrap();

    assert_eq!(report.cycle_means.len(), 20);
    assert!(!report.stopped_early);
    assert!(report.warmup_steps >= 1000);
    // warm-up plus 20 cycles x 8 problems x 600 evaluations at most
    assert!(report.total_evals <= report.warmup_steps as u64 + 20 * 200 + 20 * 8 * 600);
    assert!(ckpt.exists() && checkpoint::sidecar_path(&ckpt).exists());

    let log = fs::read_to_string(&report.log).unwrap();
    let rows: Vec<&str> = log.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], LOG_HEADER);
    assert_eq!(rows.len(), 21);
    let mut best = f64::NEG_INFINITY;
    for (k, row) in rows[1..].iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), k + 1);
        let mean: f64 = f[1].parse().unwrap();
        assert_eq!(mean, report.cycle_means[k]);
        assert_eq!(f[2] == "1", mean > best, "cycle {}", k + 1);
        best = best.max(mean);
        assert_eq!(seen[k], (k + 1, mean, mean >= best && f[2] == "1"));
    }

    // the checkpoint holds the best cycle
    let argmax = report
        .cycle_means
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc })
        .0;
    assert_eq!(report.best_cycle, argmax + 1);
    let loaded = checkpoint::load(&ckpt).unwrap();
    assert_eq!(loaded.sidecar.cycle, report.best_cycle);
    assert_eq!(loaded.sidecar.dim_max, 10);
    assert_eq!(loaded.sidecar.config_hash, cfg.hash());
    assert_eq!(loaded.sidecar.layers, vec![99, 24, 24, 4]);

    // evaluation leaves the checkpoint untouched
    let before = (fs::read(&ckpt).unwrap(), fs::read(checkpoint::sidecar_path(&ckpt)).unwrap());
    let suite = build_suite(&cfg, SuitePart::Test).unwrap();
    let mut policies = vec![PolicyKind::Ddqn(ckpt.clone())];
    policies.extend(eval::baselines());
    let res = eval::evaluate(&policies, &suite, cfg.de, cfg.features(), 3, 1, 1).unwrap();
    let after = (fs::read(&ckpt).unwrap(), fs::read(checkpoint::sidecar_path(&ckpt)).unwrap());
    assert_eq!(before, after);

    assert_eq!(res.records.len(), 6 * 4 * 3);
    let m = res.ranks.len() as f64;
    let mean_rank: f64 = res.ranks.iter().map(|(_, r)| r).sum::<f64>() / m;
    assert!((mean_rank - (m + 1.0) / 2.0).abs() < 1e-12);
    assert_eq!(res.ranks[0].0, "ddqn-desk");
}

#[test]
fn budget_accounting_and_identical_reruns() {
    let f = registered("sphere_shifted").unwrap().instantiate(10).unwrap();
    let suite = vec![f];
    let params = DeParams {
        max_evals: 3000,
        ..DeParams::default()
    };
    let policies = [PolicyKind::Fixed(Strategy::Rand1), PolicyKind::RandomUniform];
    let a = eval::evaluate(&policies, &suite, params, FeatureConfig::new(10), 25, 77, 1).unwrap();
    let b = eval::evaluate(&policies, &suite, params, FeatureConfig::new(10), 25, 77, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 50);
    for r in &a.records {
        assert!(r.final_error.is_finite() && r.final_error >= 0.0);
        assert!(r.evals_used <= params.max_evals);
        if r.evals_used < params.max_evals {
            assert!(r.final_error < params.stop_tolerance);
        }
    }
    // a larger budget on an easy problem reaches the optimum early
    let long = DeParams {
        max_evals: 200_000,
        population_size: 30,
        ..DeParams::default()
    };
    let f = registered("sphere_shifted").unwrap().instantiate(2).unwrap();
    let r = eval::evaluate(
        &[PolicyKind::Fixed(Strategy::RandToBest2)],
        std::slice::from_ref(&f),
        long,
        FeatureConfig::new(2),
        2,
        1,
        1,
    )
    .unwrap();
    for rec in &r.records {
        assert!(rec.evals_used < long.max_evals);
        assert!(rec.final_error < 1e-8);
    }
}

#[test]
fn ddqn_policy_needs_a_loadable_checkpoint() {
    let f = registered("sphere_shifted").unwrap().instantiate(3).unwrap();
    let e = eval::evaluate(
        &[PolicyKind::Ddqn("/nonexistent/x.ckpt".into())],
        &[f],
        DeParams::default(),
        FeatureConfig::new(3),
        1,
        0,
        1,
    )
    .unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

/// Brute-force rank: one plus the number of strictly better entries plus
/// half the number of other tied entries.
fn rank_oracle(matrix: &[Vec<f64>]) -> Vec<f64> {
    let p = matrix[0].len();
    (0..matrix.len())
        .map(|i| {
            (0..p)
                .map(|c| {
                    let v = matrix[i][c];
                    let better = matrix.iter().filter(|row| row[c] < v).count() as f64;
                    let tied = matrix.iter().filter(|row| row[c] == v).count() as f64 - 1.0;
                    1.0 + better + tied / 2.0
                })
                .sum::<f64>()
                / p as f64
        })
        .collect()
}

#[test]
fn hand_checked_ranks() {
    // 3 methods, 2 problems
    let m = vec![vec![0.1, 5.0], vec![0.2, 5.0], vec![0.3, 1.0]];
    assert_eq!(rank(&m).unwrap(), vec![1.75, 2.25, 2.0]);
    assert_eq!(rank_oracle(&m), vec![1.75, 2.25, 2.0]);
}

proptest! {
    #[test]
    fn ranks_match_oracle(
        matrix in (1usize..7, 1usize..6).prop_flat_map(|(m, p)| {
            prop::collection::vec(prop::collection::vec(0u8..4, p), m)
        })
    ) {
        let matrix: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
        let got = rank(&matrix).unwrap();
        prop_assert_eq!(&got, &rank_oracle(&matrix));
        let mean = got.iter().sum::<f64>() / got.len() as f64;
        prop_assert!((mean - (got.len() as f64 + 1.0) / 2.0).abs() < 1e-12);
    }
}

fn write_rows(path: &Path, rows: &[Vec<f64>]) {
    let text: String = rows
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ") + "\n")
        .collect();
    fs::write(path, text).unwrap();
}

#[test]
fn transform_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = de_ddqn_core::rng::seeded(5);
    let dim = 10;
    let shift: Vec<f64> = (0..dim).map(|_| rng.random_range(-50.0..50.0)).collect();

    let p = dir.path().join("s.txt");
    write_rows(&p, &[shift.clone()]);
    let t = load_transform_data(&p, dim, true).unwrap();
    assert_eq!(t.shift, shift);
    assert!(t.rotation.is_none());

    write_rows(&p, &[shift[..9].to_vec()]);
    let e = load_transform_data(&p, dim, true).unwrap_err();
    assert!(e.to_string().contains("line 1"), "{e}");
    assert_eq!(e.exit_code(), 2);

    // orthogonal matrix from a QR factorization
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let mut rows = vec![shift.clone()];
    rows.extend((0..dim).map(|i| (0..dim).map(|j| q[(i, j)]).collect::<Vec<f64>>()));
    write_rows(&p, &rows);
    let t = load_transform_data(&p, dim, true).unwrap();
    assert_eq!(t.rotation.as_ref().unwrap().len(), dim * dim);

    rows[3][2] += 0.01;
    write_rows(&p, &rows);
    assert!(matches!(load_transform_data(&p, dim, true), Err(Error::Data { .. })));
    assert!(load_transform_data(&p, dim, false).is_ok());
}

#[test]
fn suite_reads_transform_dir() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    let shift = vec![1.0, -2.0, 3.0];
    write_rows(&data.join("sphere_shifted_D3.txt"), &[shift.clone()]);
    let cfg_path = dir.path().join("t.cfg");
    fs::write(
        &cfg_path,
        "train_functions = sphere_shifted, rastrigin_shifted\ntest_functions = hybrid2\ndims = 3\ntransform_dir = data\n",
    )
    .unwrap();
    let cfg = Config::load(&cfg_path).unwrap();
    let suite = build_suite(&cfg, SuitePart::Train).unwrap();
    assert_eq!(suite[0].evaluate(&shift).unwrap(), 0.0);
    assert!(suite[0].evaluate(&[0.0; 3]).unwrap() > 0.0);
    // no file for rastrigin: generated data is kept
    let generated = registered("rastrigin_shifted").unwrap().instantiate(3).unwrap();
    let x = [0.5, 0.5, 0.5];
    assert_eq!(suite[1].evaluate(&x).unwrap(), generated.evaluate(&x).unwrap());

    write_rows(&data.join("sphere_shifted_D3.txt"), &[vec![1.0, 2.0]]);
    let e = build_suite(&cfg, SuitePart::Train).unwrap_err();
    assert!(e.to_string().contains("sphere_shifted_D3.txt") && e.to_string().contains("line 1"), "{e}");
}
