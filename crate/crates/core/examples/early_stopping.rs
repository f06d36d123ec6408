//! Watch the convergence rate of a run on an easy dataset and see where the
//! stop rule fires.

use safl::*;

fn main() -> safl::Result<()> {
    for lr_base in [0.01, 0.1] {
        let mut cfg = ExperimentConfig::with_datasets(vec![DatasetEntry::new(
            "easy",
            300,
            Modality::Sensor,
            2,
            0.0,
        )]);
        cfg.rounds = 30;
        cfg.network.participation_rate = 1.0;
        cfg.base.lr_base = lr_base;
        let out = run_experiment(&cfg)?;
        let run = &out.runs[0];
        println!("lr_base {lr_base}:");
        for r in &run.history {
            let rate = r.convergence_rate.unwrap_or(f64::INFINITY);
            println!(
                "  round {:>2}  accuracy {:.4}  rate {:>9.5}  stop {}",
                r.round,
                r.accuracy,
                rate,
                should_stop(rate, r.round, &cfg.stop)
            );
        }
        println!(
            "  executed {} of {} rounds",
            run.row.rounds_executed, cfg.rounds
        );
    }
    Ok(())
}
