use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use safl::monitor::{read_jsonl, JsonlSink};
use safl::orchestrator::{read_report_csv, run_experiment_with_sink, write_comms, write_report};
use safl::profiler::{profile, ProfileSummary};
use safl::report::{accuracy_svg, render_table};
use safl::{generate, ExperimentConfig, SaflError};

#[derive(Parser)]
#[command(
    name = "safl",
    version,
    about = "Size-aware federated learning simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every configured dataset as CSV.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print dataset profiles as JSON.
    Profile {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the experiment and write metrics, comms and report files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a finished run's report.csv as a table.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write accuracy.svg next to the report.
        #[arg(long)]
        svg: bool,
    },
}

fn gen_data(config: &Path, out: &Path) -> Result<(), SaflError> {
    let cfg = ExperimentConfig::load(config)?;
    fs::create_dir_all(out)?;
    for spec in cfg.resolve_specs()? {
        let ds = generate(&spec)?;
        let path = out.join(format!("{}.csv", spec.name));
        ds.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("{} ({} rows) -> {}", spec.name, ds.len(), path.display());
    }
    Ok(())
}

fn print_profiles(config: &Path) -> Result<(), SaflError> {
    let cfg = ExperimentConfig::load(config)?;
    let mut out = Vec::new();
    for spec in cfg.resolve_specs()? {
        let p = profile(&generate(&spec)?, cfg.secs_per_sample);
        out.push(ProfileSummary::new(&p, cfg.thresholds));
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn run(config: &Path, out: &Path, seed: Option<u64>) -> Result<ExitCode, SaflError> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    fs::create_dir_all(out)?;
    let mut sink = JsonlSink::new(BufWriter::new(File::create(out.join("metrics.jsonl"))?));
    let outcome = run_experiment_with_sink(&cfg, &mut sink)?;
    write_comms(&outcome, out)?;
    write_report(&outcome.report, out)?;
    print!("{}", render_table(&outcome.report.rows));
    let s = &outcome.report.summary;
    println!(
        "mean final accuracy {:.4} | {} transfers ({} up / {} down) | {} bytes",
        s.mean_final_accuracy,
        s.total_communications,
        s.upload_count,
        s.download_count,
        s.total_bytes
    );
    if s.failed > 0 {
        let names: Vec<&str> = outcome
            .report
            .rows
            .iter()
            .filter(|r| r.error.is_some())
            .map(|r| r.name.as_str())
            .collect();
        eprintln!(
            "error: {} dataset run(s) failed: {}",
            s.failed,
            names.join(", ")
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(input: &Path, svg: bool) -> Result<(), SaflError> {
    let rows = read_report_csv(&input.join("report.csv"))?;
    print!("{}", render_table(&rows));
    if svg {
        let records = read_jsonl(&fs::read_to_string(input.join("metrics.jsonl"))?)?;
        let path = input.join("accuracy.svg");
        fs::write(&path, accuracy_svg(&records))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // bad arguments count as a configuration error
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let done = |r: Result<(), SaflError>| r.map(|()| ExitCode::SUCCESS);
    let result = match &cli.command {
        Command::GenData { config, out } => done(gen_data(config, out)),
        Command::Profile { config } => done(print_profiles(config)),
        Command::Run { config, out, seed } => run(config, out, *seed),
        Command::Report { input, svg } => done(report(input, *svg)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
