//! Experiment driver.
//!
//! An experiment is a sequence of independent federated runs, one per
//! dataset, executed from the smallest dataset to the largest. Each run
//! splits its dataset across all clients, trains a freshly initialised model
//! for up to `rounds` rounds and stops early once accuracy plateaus.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{adaptive_params, order_by_size, AdaptiveParams, BaseConfig};
use crate::aggregation::{aggregate, select_method, AggregationMethod, ClientUpdate};
use crate::datagen::{generate, partition, Dataset, DatasetSpec, Modality};
use crate::error::{Result, SaflError};
use crate::monitor::{
    collect, convergence_rate, should_stop, ClientParams, MetricsSink, ProcProbe, RoundContext,
    RoundRecord, SimulatedProbe, StopConfig, SystemProbe,
};
use crate::netsim::{
    sample_participants, summarize_events, transfer_time, CommsLedger, Direction, NetworkConfig,
    TransferEvent,
};
use crate::profiler::{
    estimate_time, profile, resolve_complexity, ComplexityWeights, DatasetProfile, SizeCategory,
    SizeThresholds, DEFAULT_SECS_PER_SAMPLE,
};
use crate::seed::{derive_seed, rng_from};
use crate::training::{
    evaluate, init_model, local_train, model_bytes, ControlVariate, LocalOutcome, LocalVariant,
    MlpLayout,
};

/// Fraction of rows kept for training when `holdout_split` is on.
const HOLDOUT_TRAIN_FRAC: f64 = 0.8;

/// A dataset as written in the config. Complexity and seed are optional: a
/// missing complexity is scored from the modality table, a missing seed is
/// derived from the master seed and the dataset name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub size: usize,
    pub modality: Modality,
    pub classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DatasetEntry {
    pub fn new(
        name: &str,
        size: usize,
        modality: Modality,
        classes: usize,
        complexity: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            size,
            modality,
            classes,
            complexity: Some(complexity),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    /// Fixed fallback values; keeps metrics reproducible.
    #[default]
    Simulated,
    /// Read the host's `/proc`, falling back per round when unavailable.
    Os,
}

fn d_clients() -> usize {
    6
}
fn d_rounds() -> usize {
    20
}
fn d_mu() -> f64 {
    0.01
}
fn d_hidden() -> usize {
    32
}
fn d_seed() -> u64 {
    42
}
fn d_secs() -> f64 {
    DEFAULT_SECS_PER_SAMPLE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetEntry>,
    #[serde(default = "d_clients")]
    pub n_clients: usize,
    #[serde(default = "d_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub base: BaseConfig,
    #[serde(default)]
    pub thresholds: SizeThresholds,
    #[serde(default)]
    pub weights: ComplexityWeights,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub stop: StopConfig,
    #[serde(default = "d_mu")]
    pub prox_mu: f64,
    #[serde(default = "d_hidden")]
    pub hidden_dim: usize,
    #[serde(default = "d_seed")]
    pub master_seed: u64,
    /// Simulated compute seconds per sample at complexity 0.5.
    #[serde(default = "d_secs")]
    pub secs_per_sample: f64,
    /// Train on 80% of each dataset and evaluate on the rest.
    #[serde(default)]
    pub holdout_split: bool,
    #[serde(default)]
    pub system_probes: ProbeMode,
}

impl ExperimentConfig {
    /// Defaults with the given datasets.
    pub fn with_datasets(datasets: Vec<DatasetEntry>) -> Self {
        Self {
            datasets,
            n_clients: d_clients(),
            rounds: d_rounds(),
            base: BaseConfig::default(),
            thresholds: SizeThresholds::default(),
            weights: ComplexityWeights::default(),
            network: NetworkConfig::default(),
            stop: StopConfig::default(),
            prox_mu: d_mu(),
            hidden_dim: d_hidden(),
            master_seed: d_seed(),
            secs_per_sample: d_secs(),
            holdout_split: false,
            system_probes: ProbeMode::Simulated,
        }
    }

    /// Thirteen-dataset roster with pinned sizes, classes and complexities.
    pub fn table1() -> Self {
        Self::with_datasets(table1_roster())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| SaflError::Config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            SaflError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(SaflError::Config("config lists no datasets".into()));
        }
        let mut names = BTreeSet::new();
        for d in &self.datasets {
            if !names.insert(d.name.as_str()) {
                return Err(SaflError::Config(format!(
                    "duplicate dataset name `{}`",
                    d.name
                )));
            }
        }
        if self.n_clients == 0 {
            return Err(SaflError::Config("n_clients must be >= 1".into()));
        }
        if self.rounds == 0 {
            return Err(SaflError::Config("rounds must be >= 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(SaflError::Config("hidden_dim must be >= 1".into()));
        }
        if !(self.prox_mu >= 0.0 && self.prox_mu.is_finite()) {
            return Err(SaflError::Config(format!(
                "prox_mu must be non-negative, got {}",
                self.prox_mu
            )));
        }
        if !(self.secs_per_sample > 0.0 && self.secs_per_sample.is_finite()) {
            return Err(SaflError::Config("secs_per_sample must be positive".into()));
        }
        self.base.validate()?;
        self.thresholds.validate()?;
        self.weights.validate()?;
        self.network.validate()?;
        self.stop.validate()?;
        self.resolve_specs().map(|_| ())
    }

    /// Concrete dataset specs, in config order.
    pub fn resolve_specs(&self) -> Result<Vec<DatasetSpec>> {
        self.datasets
            .iter()
            .map(|e| {
                let complexity = resolve_complexity(e.complexity, e.modality, self.weights)
                    .map_err(|err| SaflError::InvalidSpec {
                        name: e.name.clone(),
                        reason: err.to_string(),
                    })?;
                let spec = DatasetSpec {
                    name: e.name.clone(),
                    size: e.size,
                    modality: e.modality,
                    classes: e.classes,
                    complexity,
                    seed: e.seed.unwrap_or_else(|| {
                        derive_seed(self.master_seed, &["data".into(), e.name.as_str().into()])
                    }),
                };
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }

    fn probe(&self) -> Box<dyn SystemProbe> {
        match self.system_probes {
            ProbeMode::Simulated => Box::new(SimulatedProbe),
            ProbeMode::Os => Box::new(ProcProbe::new()),
        }
    }
}

/// The thirteen evaluation datasets (name, size, modality, classes,
/// complexity).
pub fn table1_roster() -> Vec<DatasetEntry> {
    use Modality::*;
    [
        ("MicroText_Sentiment", 400, Text, 3, 0.4),
        ("IoT_Sensor_Compact", 500, Sensor, 5, 0.4),
        ("TinyImageNet_FL", 600, Vision, 10, 0.5),
        ("FedTADBench_Manufacturing", 1000, TimeSeries, 4, 0.6),
        ("AudioCommands_Extended", 1100, Audio, 8, 0.6),
        ("MedicalCT_Mini", 1200, MedicalVision, 3, 0.7),
        ("NLP_MultiClass", 1300, Text, 6, 0.7),
        ("Healthcare_TimeSeries", 1600, TimeSeries, 5, 0.8),
        ("VisionText_MultiModal", 1800, Multimodal, 15, 0.8),
        ("SensorActivity_Extended", 2000, Sensor, 12, 0.6),
        ("LargeText_Classification", 2200, Text, 8, 0.7),
        ("Financial_TimeSeries", 2500, TimeSeries, 3, 0.8),
        ("ImageNet_Subset", 2800, Vision, 20, 0.9),
    ]
    .into_iter()
    .map(|(n, s, m, k, c)| DatasetEntry::new(n, s, m, k, c))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One row of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub name: String,
    pub size: usize,
    pub modality: Modality,
    pub complexity: f64,
    pub size_category: SizeCategory,
    pub method_used: AggregationMethod,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub rounds_executed: usize,
    pub mean_round_time_s: f64,
    pub comm_bytes: u64,
    pub comm_time_s: f64,
    pub status: RunStatus,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub datasets: usize,
    pub failed: usize,
    /// Mean over successful runs.
    pub mean_final_accuracy: f64,
    pub total_communications: usize,
    pub total_bytes: u64,
    pub upload_count: usize,
    pub download_count: usize,
    pub upload_bytes: u64,
    pub download_bytes: u64,
    pub mean_transfer_time_s: f64,
    pub peak_client_id: Option<usize>,
    pub peak_client_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<DatasetRow>,
    pub summary: ExperimentSummary,
}

/// Everything produced by one dataset's federated run.
#[derive(Debug, Clone)]
pub struct DatasetRun {
    pub profile: DatasetProfile,
    pub method: AggregationMethod,
    pub params: AdaptiveParams,
    pub history: Vec<RoundRecord>,
    pub ledger: CommsLedger,
    pub row: DatasetRow,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: RunReport,
    /// Runs in execution (ascending size) order.
    pub runs: Vec<DatasetRun>,
}

impl ExperimentOutcome {
    pub fn all_events(&self) -> impl Iterator<Item = (&str, &TransferEvent)> {
        self.runs.iter().flat_map(|r| {
            r.ledger
                .events()
                .iter()
                .map(move |e| (r.profile.name.as_str(), e))
        })
    }
}

/// Runs the whole experiment without streaming metrics anywhere.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_sink(cfg, &mut crate::monitor::NullSink)
}

/// Runs the whole experiment, emitting every round record to `sink`.
///
/// Dataset failures are recorded in the report and do not stop later runs;
/// sink errors abort the experiment.
pub fn run_experiment_with_sink(
    cfg: &ExperimentConfig,
    sink: &mut dyn MetricsSink,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let specs = cfg.resolve_specs()?;
    let datasets = specs
        .iter()
        .map(|s| generate(s).map_err(|e| e.in_dataset(&s.name)))
        .collect::<Result<Vec<_>>>()?;
    let profiles: Vec<DatasetProfile> = datasets
        .iter()
        .map(|d| profile(d, cfg.secs_per_sample))
        .collect();
    let order = order_by_size(&profiles);

    let mut probe = cfg.probe();
    let mut runs = Vec::with_capacity(order.len());
    for &i in &order {
        runs.push(run_dataset(
            &datasets[i],
            &profiles[i],
            cfg,
            sink,
            probe.as_mut(),
        )?);
    }

    let report = assemble_report(&runs);
    Ok(ExperimentOutcome { report, runs })
}

enum Abort {
    Sink(SaflError),
    Run(SaflError),
}

struct RunState {
    history: Vec<RoundRecord>,
    ledger: CommsLedger,
    round_times: Vec<f64>,
}

/// One dataset's federated run. Training failures end the run and are
/// recorded in its row; only sink failures are returned as errors.
pub fn run_dataset(
    dataset: &Dataset,
    profile: &DatasetProfile,
    cfg: &ExperimentConfig,
    sink: &mut dyn MetricsSink,
    probe: &mut dyn SystemProbe,
) -> Result<DatasetRun> {
    let method = select_method(profile.complexity).unwrap_or(AggregationMethod::FedAvg);
    let params = adaptive_params(profile, &cfg.base, cfg.thresholds);
    let mut state = RunState {
        history: Vec::new(),
        ledger: CommsLedger::new(),
        round_times: Vec::new(),
    };

    let result = drive_rounds(
        dataset, profile, cfg, method, params, &mut state, sink, probe,
    );
    let error = match result {
        Ok(()) => None,
        Err(Abort::Sink(e)) => return Err(e.in_dataset(&profile.name)),
        Err(Abort::Run(e)) => Some(e.to_string()),
    };

    let accs: Vec<f64> = state.history.iter().map(|r| r.accuracy).collect();
    let comms = state.ledger.summarize();
    let row = DatasetRow {
        name: profile.name.clone(),
        size: profile.size,
        modality: profile.modality,
        complexity: profile.complexity,
        size_category: profile.size_category(cfg.thresholds),
        method_used: method,
        final_accuracy: accs.last().copied().unwrap_or(0.0),
        best_accuracy: accs.iter().copied().fold(0.0, f64::max),
        rounds_executed: state.history.len(),
        mean_round_time_s: mean(&state.round_times),
        comm_bytes: comms.total_bytes,
        comm_time_s: comms.total_duration_s,
        status: if error.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Ok
        },
        error,
    };
    Ok(DatasetRun {
        profile: profile.clone(),
        method,
        params,
        history: state.history,
        ledger: state.ledger,
        row,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[allow(clippy::too_many_arguments)]
fn drive_rounds(
    dataset: &Dataset,
    profile: &DatasetProfile,
    cfg: &ExperimentConfig,
    method: AggregationMethod,
    ap: AdaptiveParams,
    state: &mut RunState,
    sink: &mut dyn MetricsSink,
    probe: &mut dyn SystemProbe,
) -> std::result::Result<(), Abort> {
    let name = profile.name.as_str();
    let run_seed = derive_seed(cfg.master_seed, &["run".into(), name.into()]);
    let sub = |tag: &str| derive_seed(run_seed, &[tag.into()]);

    let held_out;
    let (train, eval_set): (&Dataset, &Dataset) = if cfg.holdout_split {
        held_out = dataset
            .split(HOLDOUT_TRAIN_FRAC, sub("holdout"))
            .map_err(Abort::Run)?;
        (&held_out.0, &held_out.1)
    } else {
        (dataset, dataset)
    };

    let shards = partition(train, cfg.n_clients, sub("partition")).map_err(Abort::Run)?;
    let layout = MlpLayout::new(dataset.dim(), cfg.hidden_dim, dataset.classes());
    let mut global = init_model(layout, sub("init"));
    let n_params = global.len();

    let mut server_control = ControlVariate::zeros(n_params);
    let mut client_controls: Vec<ControlVariate> = match method {
        AggregationMethod::Scaffold => vec![ControlVariate::zeros(n_params); cfg.n_clients],
        _ => Vec::new(),
    };

    let client_ids: Vec<usize> = (0..cfg.n_clients).collect();
    let mut participation_rng = rng_from(sub("participation"));
    let mut network_rng = rng_from(sub("network"));
    let mut accuracy_history = Vec::new();

    for round in 1..=cfg.rounds {
        let participants = sample_participants(
            &client_ids,
            cfg.network.participation_rate,
            &mut participation_rng,
        );
        let first_event = state.ledger.len();

        // broadcast
        let down_bytes = model_bytes(&global);
        let mut down_time = 0.0;
        for &id in &participants {
            let duration_s = transfer_time(down_bytes, &cfg.network, &mut network_rng);
            down_time += duration_s;
            state.ledger.record(TransferEvent {
                round,
                client_id: id,
                direction: Direction::Download,
                bytes: down_bytes,
                duration_s,
            });
        }

        // local training, possibly in parallel; results kept in participant order
        let outcomes: Vec<Result<LocalOutcome>> = participants
            .par_iter()
            .map(|&id| {
                let variant = match method {
                    AggregationMethod::FedAvg => LocalVariant::Plain,
                    AggregationMethod::FedProx => LocalVariant::Prox { mu: cfg.prox_mu },
                    AggregationMethod::Scaffold => LocalVariant::Scaffold {
                        server: &server_control,
                        client: &client_controls[id],
                    },
                };
                let seed = derive_seed(run_seed, &["client".into(), round.into(), id.into()]);
                local_train(&global, &shards[id].dataset, ap, variant, seed)
            })
            .collect();
        let outcomes = outcomes
            .into_iter()
            .collect::<Result<Vec<_>>>()
            .map_err(Abort::Run)?;

        // collect
        let mut up_time = 0.0;
        let mut compute_time: f64 = 0.0;
        let mut updates = Vec::with_capacity(participants.len());
        for (&id, out) in participants.iter().zip(outcomes) {
            let bytes = model_bytes(&out.params);
            let duration_s = transfer_time(bytes, &cfg.network, &mut network_rng);
            up_time += duration_s;
            state.ledger.record(TransferEvent {
                round,
                client_id: id,
                direction: Direction::Upload,
                bytes,
                duration_s,
            });
            compute_time = compute_time.max(estimate_time(
                out.stats.samples_seen,
                profile.complexity,
                cfg.secs_per_sample,
            ));
            updates.push(ClientUpdate {
                client_id: id,
                params: out.params,
                n_samples: shards[id].dataset.len() as u64,
                delta_control: out.delta_control,
            });
        }

        if method == AggregationMethod::Scaffold {
            for u in &updates {
                if let Some(delta) = &u.delta_control {
                    client_controls[u.client_id].add_assign(delta);
                }
            }
        }
        let (next, control) = aggregate(&updates, method, Some(&server_control), cfg.n_clients)
            .map_err(Abort::Run)?;
        if !next.is_finite() {
            return Err(Abort::Run(SaflError::NonFinite { epoch: 0, step: 0 }));
        }
        global = next;
        if let Some(c) = control {
            server_control = c;
        }

        let evaluation = evaluate(&global, eval_set).map_err(Abort::Run)?;
        accuracy_history.push(evaluation.accuracy);
        let rate = convergence_rate(&accuracy_history, cfg.stop.window);

        let round_wall_time_s = down_time + compute_time + up_time;
        state.round_times.push(round_wall_time_s);
        let record = collect(
            RoundContext {
                dataset: name,
                round,
                evaluation,
                convergence_rate: rate,
                participants: &participants,
                transfers: &state.ledger.events()[first_event..],
                round_wall_time_s,
                adaptive_params_used: participants
                    .iter()
                    .map(|&client_id| ClientParams {
                        client_id,
                        epochs: ap.epochs,
                        batch: ap.batch,
                        lr: ap.lr,
                    })
                    .collect(),
            },
            probe,
        );
        sink.emit(&record).map_err(Abort::Sink)?;
        state.history.push(record);

        if should_stop(rate, round, &cfg.stop) {
            break;
        }
    }
    Ok(())
}

fn assemble_report(runs: &[DatasetRun]) -> RunReport {
    let rows: Vec<DatasetRow> = runs.iter().map(|r| r.row.clone()).collect();
    let events: Vec<TransferEvent> = runs
        .iter()
        .flat_map(|r| r.ledger.events().iter().cloned())
        .collect();
    let comms = summarize_events(&events);
    let ok: Vec<f64> = rows
        .iter()
        .filter(|r| r.status == RunStatus::Ok)
        .map(|r| r.final_accuracy)
        .collect();
    RunReport {
        summary: ExperimentSummary {
            datasets: rows.len(),
            failed: rows.len() - ok.len(),
            mean_final_accuracy: mean(&ok),
            total_communications: comms.total_count,
            total_bytes: comms.total_bytes,
            upload_count: comms.upload_count,
            download_count: comms.download_count,
            upload_bytes: comms.upload_bytes,
            download_bytes: comms.download_bytes,
            mean_transfer_time_s: comms.mean_duration_s,
            peak_client_id: comms.peak_client_id,
            peak_client_bytes: comms.peak_client_bytes,
        },
        rows,
    }
}

/// Writes `report.csv` and `summary.json` into `out_dir`, overwriting.
pub fn write_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("report.csv"))?;
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut f = BufWriter::new(File::create(out_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &report.summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Writes every transfer as `comms.csv`; the trailing `dataset` column
/// names the run each event belongs to.
pub fn write_comms(outcome: &ExperimentOutcome, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("comms.csv"))?;
    w.write_record([
        "round",
        "client_id",
        "direction",
        "bytes",
        "duration_s",
        "dataset",
    ])?;
    for (name, e) in outcome.all_events() {
        w.write_record([
            e.round.to_string(),
            e.client_id.to_string(),
            e.direction.as_str().to_string(),
            e.bytes.to_string(),
            e.duration_s.to_string(),
            name.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the rows of a `report.csv`.
pub fn read_report_csv(path: &Path) -> Result<Vec<DatasetRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(SaflError::from))
        .collect()
}
