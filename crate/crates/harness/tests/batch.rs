use std::path::Path;

use anash::batch::{parse_specs, run_specs, BatchSummary, RowOutcome};
use anash::generate::{generate, Family, InstanceSpec};
use anash::run::guarantee_bound;
use anash_core::oracle::certify;
use anash_core::SolverConfig;

#[test]
fn histogram_conserves_instances() {
    let text: String = (0..1000)
        .map(|k| {
            let family = [
                "uniform-random",
                "constant-sum",
                "win-lose",
                "planted-pure-ne",
            ][k % 4];
            format!("{family} n={} seed={k}\n", 2 + k % 3)
        })
        .collect();
    let specs = parse_specs(&text, Path::new("."));
    let rows = run_specs(&specs, &SolverConfig::default(), false);
    let summary = BatchSummary::from_rows(&rows);
    assert_eq!(summary.failures, 0);
    assert_eq!(summary.histogram.values().sum::<usize>(), 1000);
    assert!(summary.max_epsilon <= guarantee_bound(0.005));
}

#[test]
fn uniform_25_batch_is_certified() {
    let cfg = SolverConfig::default();
    let text: String = (0..500)
        .map(|k| format!("uniform-random n=25 seed={k}\n"))
        .collect();
    let specs = parse_specs(&text, Path::new("."));
    let rows = run_specs(&specs, &cfg, false);
    for (row, line) in rows.iter().zip(&specs) {
        let RowOutcome::Ok(rec) = &row.outcome else {
            panic!("{}: {:?}", line.text, row.outcome);
        };
        assert!(rec.achieved_epsilon <= guarantee_bound(cfg.delta));
        // the record holds the regret the oracle recomputes from scratch
        let game = generate(line.spec.as_ref().unwrap()).unwrap();
        let sol = anash_core::solve(&game, &cfg).unwrap();
        let (_, report) = certify(&game, sol.profile(), 1.0).unwrap();
        assert_eq!(report.max_regret, rec.achieved_epsilon);
    }
}

#[test]
fn rows_follow_spec_order() {
    let specs: Vec<_> = (0..40)
        .map(|k| InstanceSpec::new(Family::UniformRandom, 2 + k % 5, k as u64).to_string())
        .collect();
    let parsed = parse_specs(&specs.join("\n"), Path::new("."));
    let rows = run_specs(&parsed, &SolverConfig::default(), false);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row.index, k);
        let RowOutcome::Ok(rec) = &row.outcome else {
            panic!()
        };
        assert_eq!(rec.instance, specs[k]);
    }
}
