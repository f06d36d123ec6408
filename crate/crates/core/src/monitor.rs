//! Per-round metrics, convergence tracking and early stopping.
//!
//! Units: bandwidth utilisation is a fraction of the simulated round time,
//! latency is the mean transfer duration in seconds, throughput is bytes per
//! simulated second.

use std::fs;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaflError};
use crate::netsim::TransferEvent;
use crate::training::Evaluation;

/// Fallback CPU fraction when the host cannot be probed.
pub const SIMULATED_CPU_FRAC: f64 = 0.021;
/// Fallback resident-memory fraction when the host cannot be probed.
pub const SIMULATED_MEM_FRAC: f64 = 0.087;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopConfig {
    pub epsilon: f64,
    pub t_min: usize,
    pub window: usize,
}

impl Default for StopConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            t_min: 5,
            window: 3,
        }
    }
}

impl StopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(SaflError::Config(format!(
                "stop epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.window == 0 || self.t_min < self.window {
            return Err(SaflError::Config(format!(
                "need window >= 1 and t_min >= window, got window {} / t_min {}",
                self.window, self.t_min
            )));
        }
        Ok(())
    }
}

/// Windowed accuracy slope. Returns `+inf` until the history is longer than
/// the window, so short runs never stop early.
pub fn convergence_rate(accuracy_history: &[f64], window: usize) -> f64 {
    let n = accuracy_history.len();
    if window == 0 || n <= window {
        return f64::INFINITY;
    }
    (accuracy_history[n - 1] - accuracy_history[n - 1 - window]) / window as f64
}

pub fn should_stop(rate: f64, t: usize, cfg: &StopConfig) -> bool {
    rate < cfg.epsilon && t > cfg.t_min
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClientParams {
    pub client_id: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
}

/// One line of `metrics.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub dataset: String,
    pub round: usize,
    pub accuracy: f64,
    pub loss: f64,
    /// `null` while the history is too short to measure a slope.
    pub convergence_rate: Option<f64>,
    pub participants: Vec<usize>,
    pub cpu_frac: f64,
    pub mem_frac: f64,
    pub gpu_frac: f64,
    pub bandwidth_util: f64,
    pub mean_latency_s: f64,
    pub throughput_bytes_s: f64,
    pub round_wall_time_s: f64,
    pub adaptive_params_used: Vec<ClientParams>,
    /// True when cpu/mem values are the fallback constants.
    pub probes_simulated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSample {
    pub cpu_frac: f64,
    pub mem_frac: f64,
}

/// Host resource probe. `None` means the values are unavailable.
pub trait SystemProbe {
    fn sample(&mut self) -> Option<SystemSample>;
}

/// Never probes; records always carry the fallback constants.
#[derive(Debug, Default, Clone, Copy)]
pub struct SimulatedProbe;

impl SystemProbe for SimulatedProbe {
    fn sample(&mut self) -> Option<SystemSample> {
        None
    }
}

/// Reads process CPU time and resident memory from `/proc` (Linux).
#[derive(Debug)]
pub struct ProcProbe {
    last: Option<(f64, Instant)>,
}

impl Default for ProcProbe {
    fn default() -> Self {
        Self::new()
    }
}

impl ProcProbe {
    // /proc reports in USER_HZ, which the kernel ABI fixes at 100
    const TICKS_PER_SEC: f64 = 100.0;

    pub fn new() -> Self {
        let mut probe = Self { last: None };
        probe.last = probe.cpu_seconds().map(|c| (c, Instant::now()));
        probe
    }

    fn cpu_seconds(&self) -> Option<f64> {
        let stat = fs::read_to_string("/proc/self/stat").ok()?;
        // fields after the parenthesised command name; utime and stime are
        // the 14th and 15th fields overall
        let rest = &stat[stat.rfind(')')? + 2..];
        let fields: Vec<&str> = rest.split_whitespace().collect();
        let utime: f64 = fields.get(11)?.parse().ok()?;
        let stime: f64 = fields.get(12)?.parse().ok()?;
        Some((utime + stime) / Self::TICKS_PER_SEC)
    }

    fn kib_field(text: &str, key: &str) -> Option<f64> {
        let line = text.lines().find(|l| l.starts_with(key))?;
        line[key.len()..].split_whitespace().next()?.parse().ok()
    }

    fn mem_frac(&self) -> Option<f64> {
        let status = fs::read_to_string("/proc/self/status").ok()?;
        let meminfo = fs::read_to_string("/proc/meminfo").ok()?;
        let rss = Self::kib_field(&status, "VmRSS:")?;
        let total = Self::kib_field(&meminfo, "MemTotal:")?;
        (total > 0.0).then(|| (rss / total).clamp(0.0, 1.0))
    }
}

impl SystemProbe for ProcProbe {
    fn sample(&mut self) -> Option<SystemSample> {
        let now = Instant::now();
        let cpu = self.cpu_seconds()?;
        let (prev_cpu, prev_at) = self.last.replace((cpu, now))?;
        let wall = now.duration_since(prev_at).as_secs_f64();
        let cpu_frac = if wall > 0.0 {
            ((cpu - prev_cpu) / wall).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Some(SystemSample {
            cpu_frac,
            mem_frac: self.mem_frac()?,
        })
    }
}

/// Everything known about a finished round.
#[derive(Debug, Clone)]
pub struct RoundContext<'a> {
    pub dataset: &'a str,
    pub round: usize,
    pub evaluation: Evaluation,
    pub convergence_rate: f64,
    pub participants: &'a [usize],
    pub transfers: &'a [TransferEvent],
    pub round_wall_time_s: f64,
    pub adaptive_params_used: Vec<ClientParams>,
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Assembles a [`RoundRecord`], probing the host for system metrics.
pub fn collect(ctx: RoundContext<'_>, probe: &mut dyn SystemProbe) -> RoundRecord {
    let (system, simulated) = match probe.sample() {
        Some(s) => (s, false),
        None => (
            SystemSample {
                cpu_frac: SIMULATED_CPU_FRAC,
                mem_frac: SIMULATED_MEM_FRAC,
            },
            true,
        ),
    };

    let busy: f64 = ctx.transfers.iter().map(|e| e.duration_s).sum();
    let bytes: u64 = ctx.transfers.iter().map(|e| e.bytes).sum();
    let wall = ctx.round_wall_time_s;
    let (bandwidth_util, throughput) = if wall > 0.0 && !ctx.transfers.is_empty() {
        ((busy / wall).clamp(0.0, 1.0), bytes as f64 / wall)
    } else {
        (0.0, 0.0)
    };
    let mean_latency_s = if ctx.transfers.is_empty() {
        0.0
    } else {
        busy / ctx.transfers.len() as f64
    };

    RoundRecord {
        dataset: ctx.dataset.to_string(),
        round: ctx.round,
        accuracy: finite_or_zero(ctx.evaluation.accuracy).clamp(0.0, 1.0),
        loss: finite_or_zero(ctx.evaluation.loss).max(0.0),
        convergence_rate: ctx
            .convergence_rate
            .is_finite()
            .then_some(ctx.convergence_rate),
        participants: ctx.participants.to_vec(),
        cpu_frac: finite_or_zero(system.cpu_frac).clamp(0.0, 1.0),
        mem_frac: finite_or_zero(system.mem_frac).clamp(0.0, 1.0),
        // CPU-only simulator
        gpu_frac: 0.0,
        bandwidth_util,
        mean_latency_s: finite_or_zero(mean_latency_s),
        throughput_bytes_s: finite_or_zero(throughput),
        round_wall_time_s: finite_or_zero(wall),
        adaptive_params_used: ctx.adaptive_params_used,
        probes_simulated: simulated,
    }
}

/// Destination for round records.
pub trait MetricsSink {
    fn emit(&mut self, record: &RoundRecord) -> Result<()>;
}

/// Discards records.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl MetricsSink for NullSink {
    fn emit(&mut self, _record: &RoundRecord) -> Result<()> {
        Ok(())
    }
}

impl MetricsSink for Vec<RoundRecord> {
    fn emit(&mut self, record: &RoundRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// One JSON object per line, flushed after every record.
#[derive(Debug)]
pub struct JsonlSink<W: Write> {
    out: W,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> MetricsSink for JsonlSink<W> {
    fn emit(&mut self, record: &RoundRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

/// Parses a `metrics.jsonl` body back into records.
pub fn read_jsonl(text: &str) -> Result<Vec<RoundRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(SaflError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::Direction;

    fn ctx<'a>(transfers: &'a [TransferEvent], participants: &'a [usize]) -> RoundContext<'a> {
        RoundContext {
            dataset: "d",
            round: 1,
            evaluation: Evaluation {
                accuracy: 0.75,
                loss: 0.4,
            },
            convergence_rate: f64::INFINITY,
            participants,
            transfers,
            round_wall_time_s: 2.0,
            adaptive_params_used: vec![ClientParams {
                client_id: 0,
                epochs: 2,
                batch: 32,
                lr: 0.0092,
            }],
        }
    }

    #[test]
    fn rate_examples() {
        assert!((convergence_rate(&[0.5, 0.6, 0.7], 2) - 0.1).abs() < 1e-15);
        assert_eq!(convergence_rate(&[0.9; 6], 3), 0.0);
        assert_eq!(convergence_rate(&[0.1, 0.2], 3), f64::INFINITY);
        assert_eq!(convergence_rate(&[0.1, 0.2, 0.3], 3), f64::INFINITY);
        assert!(convergence_rate(&[0.9, 0.8, 0.7, 0.6], 3) < 0.0);
    }

    #[test]
    fn stop_rule() {
        let cfg = StopConfig::default();
        assert!(should_stop(0.0, 10, &cfg));
        assert!(!should_stop(0.05, 10, &cfg));
        assert!(!should_stop(0.0, 5, &cfg));
        assert!(!should_stop(f64::INFINITY, 100, &cfg));
        assert!(StopConfig { window: 6, ..cfg }.validate().is_err());
    }

    #[test]
    fn zero_transfer_round() {
        let rec = collect(ctx(&[], &[0]), &mut SimulatedProbe);
        assert_eq!(rec.bandwidth_util, 0.0);
        assert_eq!(rec.throughput_bytes_s, 0.0);
        assert_eq!(rec.gpu_frac, 0.0);
        assert_eq!(rec.cpu_frac, SIMULATED_CPU_FRAC);
        assert_eq!(rec.mem_frac, SIMULATED_MEM_FRAC);
        assert!(rec.probes_simulated);
        assert_eq!(rec.convergence_rate, None);
    }

    #[test]
    fn network_metrics() {
        let t = [
            TransferEvent {
                round: 1,
                client_id: 0,
                direction: Direction::Download,
                bytes: 100,
                duration_s: 0.5,
            },
            TransferEvent {
                round: 1,
                client_id: 0,
                direction: Direction::Upload,
                bytes: 100,
                duration_s: 0.3,
            },
        ];
        let rec = collect(ctx(&t, &[0]), &mut SimulatedProbe);
        assert!((rec.bandwidth_util - 0.4).abs() < 1e-15);
        assert!((rec.mean_latency_s - 0.4).abs() < 1e-15);
        assert!((rec.throughput_bytes_s - 100.0).abs() < 1e-12);
    }

    struct Fixed(f64);
    impl SystemProbe for Fixed {
        fn sample(&mut self) -> Option<SystemSample> {
            Some(SystemSample {
                cpu_frac: self.0,
                mem_frac: 0.5,
            })
        }
    }

    #[test]
    fn probe_values_are_clamped() {
        let rec = collect(ctx(&[], &[0]), &mut Fixed(3.0));
        assert_eq!(rec.cpu_frac, 1.0);
        assert!(!rec.probes_simulated);
    }

    #[test]
    fn proc_probe_reads_linux_proc() {
        let mut probe = ProcProbe::new();
        if std::path::Path::new("/proc/self/stat").exists() {
            std::thread::sleep(std::time::Duration::from_millis(20));
            let s = probe.sample().expect("proc available");
            assert!((0.0..=1.0).contains(&s.cpu_frac));
            assert!(s.mem_frac > 0.0 && s.mem_frac <= 1.0);
        }
    }

    #[test]
    fn jsonl_roundtrip() {
        let mut sink = JsonlSink::new(Vec::new());
        let mut records = Vec::new();
        for round in 1..=3 {
            let mut c = ctx(&[], &[0, 2]);
            c.round = round;
            c.convergence_rate = 0.1 / round as f64;
            c.evaluation.accuracy = 1.0 / 3.0;
            let r = collect(c, &mut SimulatedProbe);
            sink.emit(&r).unwrap();
            records.push(r);
        }
        let text = String::from_utf8(sink.into_inner()).unwrap();
        assert_eq!(text.lines().count(), 3);
        let parsed = read_jsonl(&text).unwrap();
        assert_eq!(parsed, records);
        assert_eq!(
            parsed.iter().map(|r| r.round).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }
}
