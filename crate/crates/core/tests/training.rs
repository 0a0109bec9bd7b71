//! Small end-to-end runs of every scheme.

use sagin_core::orchestrator::{run_ablations, run_maddpg_baseline, run_scalar_utility_baseline, run_training};
use sagin_core::report::{self, DECISIONS_FILE, METRICS_FILE, PARETO_FILE};
use sagin_core::ScenarioConfig;

fn tiny(seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::with_users([3, 2, 3]);
    c.seed = seed;
    c.episodes = 3;
    c.timesteps = 5;
    c.training.hidden_width = 12;
    c.training.central_batch = 4;
    c.training.distributed_batch = 4;
    c.training.calibration_steps = 8;
    c
}

#[test]
fn artifacts_round_trip_through_disk() {
    let config = tiny(3);
    let art = run_training(&config).unwrap();
    assert_eq!(art.metrics.len(), 15);
    assert_eq!(art.decisions.len(), 15);
    let dir = tempfile::tempdir().unwrap();
    let files = report::write_run(dir.path(), &art, &config).unwrap();
    assert!(files.iter().any(|f| f.starts_with("checkpoints/")));
    assert_eq!(report::read_metrics(&dir.path().join(METRICS_FILE)).unwrap(), art.metrics);
    assert_eq!(report::read_decisions(&dir.path().join(DECISIONS_FILE)).unwrap(), art.decisions);
    assert_eq!(report::read_pareto(&dir.path().join(PARETO_FILE)).unwrap(), report::pareto_rows(&art));
}

#[test]
fn every_slot_is_logged_with_bounded_rewards() {
    let config = tiny(4);
    let runs = [
        run_training(&config).unwrap(),
        run_maddpg_baseline(&config).unwrap(),
        run_scalar_utility_baseline(&config, [1.0, 1.0, 4.0]).unwrap(),
    ];
    for art in runs.iter().chain(run_ablations(&config).unwrap().iter()) {
        assert_eq!(art.metrics.len(), config.episodes * config.timesteps, "{}", art.scheme.name());
        for row in &art.metrics {
            assert!(row.rewards().iter().all(|r| (0.0..=1.0).contains(r)), "{row:?}");
            assert!(row.metrics().iter().all(|m| m.is_finite() && *m >= 0.0), "{row:?}");
            assert!(row.d2ave_s <= config.delay_penalty_s());
        }
    }
}

#[test]
fn pareto_candidates_are_mutually_nondominated() {
    let art = run_training(&tiny(5)).unwrap();
    assert!(!art.pareto.is_empty());
    for a in &art.pareto {
        for b in &art.pareto {
            let dominates = b.objective.iter().zip(&a.objective).all(|(x, y)| x >= y)
                && b.objective.iter().zip(&a.objective).any(|(x, y)| x > y);
            assert!(!dominates);
        }
    }
}

#[test]
fn seeds_change_the_run_and_repeat_exactly() {
    let a = run_training(&tiny(6)).unwrap();
    let b = run_training(&tiny(6)).unwrap();
    let c = run_training(&tiny(7)).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.checkpoints, b.checkpoints);
    assert_ne!(a.metrics, c.metrics);
}
