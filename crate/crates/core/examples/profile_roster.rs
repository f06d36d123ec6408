//! Profile the thirteen-dataset roster and show the parameters each dataset
//! would train with.

use safl::profiler::profile;
use safl::*;

fn main() -> safl::Result<()> {
    let cfg = ExperimentConfig::table1();
    let specs = cfg.resolve_specs()?;
    let profiles: Vec<DatasetProfile> = specs
        .iter()
        .map(|s| generate(s).map(|ds| profile(&ds, cfg.secs_per_sample)))
        .collect::<Result<_>>()?;

    println!(
        "{:<28} {:>5} {:<15} {:>4} {:<6} {:<8} {:>2} {:>4} {:>9} {:>10}",
        "dataset", "size", "modality", "C", "size", "method", "E", "B", "lr", "mem_bytes"
    );
    for i in order_by_size(&profiles) {
        let p = &profiles[i];
        let ap = adaptive_params(p, &cfg.base, cfg.thresholds);
        println!(
            "{:<28} {:>5} {:<15} {:>4.2} {:<6} {:<8} {:>2} {:>4} {:>9.6} {:>10}",
            p.name,
            p.size,
            p.modality.as_str(),
            p.complexity,
            format!("{:?}", p.size_category(cfg.thresholds)),
            select_method(p.complexity)?.as_str(),
            ap.epochs,
            ap.batch,
            ap.lr,
            p.mem_estimate
        );
    }
    Ok(())
}
