//! Run a federated experiment from a JSON config and write the usual outputs.
//!
//! cargo run --release --example run_experiment -- configs/table1.json target/run

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use safl::orchestrator::write_comms;
use safl::report::render_table;
use safl::*;

fn main() -> safl::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::table1(),
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/example-run".into()));
    std::fs::create_dir_all(&out)?;

    let mut sink = JsonlSink::new(BufWriter::new(File::create(out.join("metrics.jsonl"))?));
    let outcome = run_experiment_with_sink(&cfg, &mut sink)?;
    write_comms(&outcome, &out)?;
    write_report(&outcome.report, &out)?;

    print!("{}", render_table(&outcome.report.rows));
    let s = &outcome.report.summary;
    println!(
        "mean final accuracy {:.4}, {} transfers, {} bytes, outputs in {}",
        s.mean_final_accuracy,
        s.total_communications,
        s.total_bytes,
        out.display()
    );
    Ok(())
}
