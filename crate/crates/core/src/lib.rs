//! Deterministic simulator for size-aware federated learning.
//!
//! Datasets are profiled, ordered from smallest to largest and trained one
//! after another as independent federated runs. Each run adapts epochs,
//! batch size and learning rate to the dataset's size category and
//! complexity, picks FedAvg, FedProx or SCAFFOLD from the complexity score,
//! exchanges models over a simulated star network and stops early once
//! accuracy stops improving.
//!
//! Modules, bottom-up:
//!
//! - [`datagen`]: seeded Gaussian-mixture datasets and client partitioning
//! - [`profiler`]: complexity scores, size categories, resource estimates
//! - [`adaptation`]: size ordering and per-dataset hyperparameters
//! - [`training`]: flat-parameter MLP, analytic gradients, local SGD variants
//! - [`aggregation`]: weighted averaging and method selection
//! - [`netsim`]: participation, transfer timing, communication ledger
//! - [`monitor`]: round records, convergence rate, early stopping, JSONL sink
//! - [`orchestrator`]: experiment config, runs, report files
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod adaptation;
pub mod aggregation;
pub mod datagen;
pub mod error;
pub mod monitor;
pub mod netsim;
pub mod orchestrator;
pub mod profiler;
pub mod report;
pub mod seed;
pub mod training;

pub use adaptation::{adaptive_params, order_by_size, AdaptiveParams, BaseConfig};
pub use aggregation::{aggregate, select_method, AggregationMethod, ClientUpdate};
pub use datagen::{feature_dim, generate, partition, ClientShard, Dataset, DatasetSpec, Modality};
pub use error::{Result, SaflError};
pub use monitor::{convergence_rate, should_stop, JsonlSink, MetricsSink, RoundRecord, StopConfig};
pub use netsim::{
    sample_participants, transfer_time, CommsLedger, CommsSummary, Direction, NetworkConfig,
    TransferEvent,
};
pub use orchestrator::{
    run_experiment, run_experiment_with_sink, write_report, DatasetEntry, ExperimentConfig,
    ExperimentOutcome, RunReport,
};
pub use profiler::{
    complexity_score, size_category, ComplexityComponents, ComplexityWeights, DatasetProfile,
    SizeCategory, SizeThresholds,
};
pub use training::{
    evaluate, init_model, local_train, loss_and_grad, model_bytes, ControlVariate, LocalVariant,
    MlpLayout, ParamVector,
};
