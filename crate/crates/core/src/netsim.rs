//! Simulated star network: participation sampling, transfer timing and an
//! append-only ledger of every model exchange.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SaflError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub bandwidth_mbps: f64,
    pub base_latency_ms: f64,
    /// Half-width of the multiplicative uniform noise on the bandwidth term.
    pub jitter_frac: f64,
    pub participation_rate: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            bandwidth_mbps: 100.0,
            base_latency_ms: 10.0,
            jitter_frac: 0.1,
            participation_rate: 0.8,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_mbps > 0.0 && self.bandwidth_mbps.is_finite()) {
            return Err(SaflError::Config(format!(
                "bandwidth_mbps must be positive, got {}",
                self.bandwidth_mbps
            )));
        }
        if !(self.base_latency_ms >= 0.0 && self.base_latency_ms.is_finite()) {
            return Err(SaflError::Config(format!(
                "base_latency_ms must be non-negative, got {}",
                self.base_latency_ms
            )));
        }
        if !(0.0..1.0).contains(&self.jitter_frac) {
            return Err(SaflError::Config(format!(
                "jitter_frac must lie in [0, 1), got {}",
                self.jitter_frac
            )));
        }
        if !(self.participation_rate > 0.0 && self.participation_rate <= 1.0) {
            return Err(SaflError::Config(format!(
                "participation_rate must lie in (0, 1], got {}",
                self.participation_rate
            )));
        }
        Ok(())
    }

    pub fn latency_s(&self) -> f64 {
        self.base_latency_ms / 1000.0
    }
}

/// Includes each client independently with probability `rate`. An empty draw
/// falls back to the lowest id so every round has a participant.
pub fn sample_participants<R: Rng + ?Sized>(
    client_ids: &[usize],
    rate: f64,
    rng: &mut R,
) -> Vec<usize> {
    let mut chosen: Vec<usize> = client_ids
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < rate)
        .collect();
    if chosen.is_empty() {
        if let Some(&lowest) = client_ids.iter().min() {
            chosen.push(lowest);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Simulated seconds to move `bytes` over the link, latency included.
///
/// Exactly one uniform draw is consumed per call, even with zero jitter.
pub fn transfer_time<R: Rng + ?Sized>(bytes: u64, config: &NetworkConfig, rng: &mut R) -> f64 {
    let u = config.jitter_frac * (2.0 * rng.random::<f64>() - 1.0);
    transfer_time_with_jitter(bytes, config, u)
}

/// Deterministic core of [`transfer_time`] for a given jitter draw `u`.
pub fn transfer_time_with_jitter(bytes: u64, config: &NetworkConfig, u: f64) -> f64 {
    let wire = bytes as f64 * 8.0 / (config.bandwidth_mbps * 1e6);
    wire * (1.0 + u) + config.latency_s()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upload,
    Download,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Upload => "upload",
            Direction::Download => "download",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEvent {
    pub round: usize,
    pub client_id: usize,
    pub direction: Direction,
    pub bytes: u64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CommsSummary {
    pub total_count: usize,
    pub upload_count: usize,
    pub download_count: usize,
    pub total_bytes: u64,
    pub upload_bytes: u64,
    pub download_bytes: u64,
    pub total_duration_s: f64,
    pub mean_duration_s: f64,
    /// `upload_count / download_count`; `None` when nothing was downloaded.
    pub upload_download_ratio: Option<f64>,
    pub per_client_bytes: BTreeMap<usize, u64>,
    pub peak_client_id: Option<usize>,
    pub peak_client_bytes: u64,
}

/// Append-only record of transfers. Totals are always recomputed from the
/// events, never cached.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommsLedger {
    events: Vec<TransferEvent>,
}

impl CommsLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, event: TransferEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[TransferEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn round_events(&self, round: usize) -> impl Iterator<Item = &TransferEvent> {
        self.events.iter().filter(move |e| e.round == round)
    }

    pub fn summarize(&self) -> CommsSummary {
        summarize_events(&self.events)
    }

    /// CSV with columns `round,client_id,direction,bytes,duration_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["round", "client_id", "direction", "bytes", "duration_s"])?;
        for e in &self.events {
            w.write_record([
                e.round.to_string(),
                e.client_id.to_string(),
                e.direction.as_str().to_string(),
                e.bytes.to_string(),
                e.duration_s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Totals over any slice of events.
pub fn summarize_events(events: &[TransferEvent]) -> CommsSummary {
    let mut s = CommsSummary::default();
    for e in events {
        s.total_count += 1;
        s.total_bytes += e.bytes;
        s.total_duration_s += e.duration_s;
        match e.direction {
            Direction::Upload => {
                s.upload_count += 1;
                s.upload_bytes += e.bytes;
            }
            Direction::Download => {
                s.download_count += 1;
                s.download_bytes += e.bytes;
            }
        }
        *s.per_client_bytes.entry(e.client_id).or_default() += e.bytes;
    }
    if s.total_count > 0 {
        s.mean_duration_s = s.total_duration_s / s.total_count as f64;
    }
    if s.download_count > 0 {
        s.upload_download_ratio = Some(s.upload_count as f64 / s.download_count as f64);
    }
    // highest load wins; ties go to the lower id
    for (&id, &b) in &s.per_client_bytes {
        if s.peak_client_id.is_none() || b > s.peak_client_bytes {
            s.peak_client_id = Some(id);
            s.peak_client_bytes = b;
        }
    }
    s
}
