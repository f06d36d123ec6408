//! Dataset profiling: complexity scores, size categories and resource
//! estimates.

use serde::{Deserialize, Serialize};

use crate::datagen::{feature_dim, Dataset, Modality};
use crate::error::{Result, SaflError};

/// Seconds of simulated training per sample at complexity 0.5.
pub const DEFAULT_SECS_PER_SAMPLE: f64 = 1e-3;

/// Working-set multiplier applied to raw feature storage.
const MEMORY_OVERHEAD: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityWeights {
    pub w_arch: f64,
    pub w_data: f64,
    pub w_fusion: f64,
}

impl Default for ComplexityWeights {
    fn default() -> Self {
        Self {
            w_arch: 1.0 / 3.0,
            w_data: 1.0 / 3.0,
            w_fusion: 1.0 / 3.0,
        }
    }
}

impl ComplexityWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.w_arch, self.w_data, self.w_fusion];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(SaflError::Config(format!(
                "complexity weights must be non-negative, got {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SaflError::Config(format!(
                "complexity weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Architectural, preprocessing and fusion difficulty, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityComponents {
    pub arch: f64,
    pub data: f64,
    pub fusion: f64,
}

impl ComplexityComponents {
    pub const fn new(arch: f64, data: f64, fusion: f64) -> Self {
        Self { arch, data, fusion }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("arch", self.arch),
            ("data", self.data),
            ("fusion", self.fusion),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SaflError::OutOfRange(format!(
                    "complexity component {name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Default per-modality component table.
pub fn modality_components(modality: Modality) -> ComplexityComponents {
    match modality {
        Modality::Sensor => ComplexityComponents::new(0.4, 0.4, 0.4),
        Modality::TimeSeries => ComplexityComponents::new(0.6, 0.6, 0.6),
        Modality::Audio => ComplexityComponents::new(0.6, 0.6, 0.6),
        Modality::Vision => ComplexityComponents::new(0.5, 0.7, 0.3),
        Modality::Text => ComplexityComponents::new(0.7, 0.7, 0.7),
        Modality::MedicalVision => ComplexityComponents::new(0.7, 0.7, 0.7),
        Modality::Multimodal => ComplexityComponents::new(0.8, 0.7, 0.9),
    }
}

/// Weighted combination of the three complexity components.
pub fn complexity_score(
    components: ComplexityComponents,
    weights: ComplexityWeights,
) -> Result<f64> {
    weights.validate()?;
    components.validate()?;
    let score = weights.w_arch * components.arch
        + weights.w_data * components.data
        + weights.w_fusion * components.fusion;
    // rounding can push a convex combination a hair outside the hull
    Ok(score.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeThresholds {
    pub tau_s: usize,
    pub tau_m: usize,
}

impl Default for SizeThresholds {
    fn default() -> Self {
        Self {
            tau_s: 600,
            tau_m: 1500,
        }
    }
}

impl SizeThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.tau_s == 0 || self.tau_s >= self.tau_m {
            return Err(SaflError::Config(format!(
                "size thresholds need 0 < tau_s < tau_m, got {} / {}",
                self.tau_s, self.tau_m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeCategory {
    Small = 0,
    Medium = 1,
    Large = 2,
}

impl SizeCategory {
    /// Numeric level used as exponent/addend by the adaptation rules.
    pub fn level(self) -> u32 {
        self as u32
    }
}

pub fn size_category(n: usize, thresholds: SizeThresholds) -> SizeCategory {
    if n <= thresholds.tau_s {
        SizeCategory::Small
    } else if n <= thresholds.tau_m {
        SizeCategory::Medium
    } else {
        SizeCategory::Large
    }
}

/// Bytes needed to hold `n` samples plus working set.
pub fn estimate_memory(n: usize, modality: Modality) -> u64 {
    n as u64 * feature_dim(modality) as u64 * 8 * MEMORY_OVERHEAD
}

/// Simulated training seconds for one pass over `n` samples.
pub fn estimate_time(n: usize, complexity: f64, secs_per_sample: f64) -> f64 {
    n as f64 * (0.5 + complexity) * secs_per_sample
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub name: String,
    pub size: usize,
    pub modality: Modality,
    pub classes: usize,
    pub complexity: f64,
    pub mem_estimate: u64,
    pub time_estimate: f64,
}

impl DatasetProfile {
    pub fn size_category(&self, thresholds: SizeThresholds) -> SizeCategory {
        size_category(self.size, thresholds)
    }
}

/// Resolves a dataset's complexity: a pinned value wins, otherwise the
/// modality's component table is scored with `weights`.
pub fn resolve_complexity(
    pinned: Option<f64>,
    modality: Modality,
    weights: ComplexityWeights,
) -> Result<f64> {
    match pinned {
        Some(c) if (0.0..=1.0).contains(&c) => Ok(c),
        Some(c) => Err(SaflError::OutOfRange(format!(
            "complexity {c} outside [0, 1]"
        ))),
        None => complexity_score(modality_components(modality), weights),
    }
}

/// Builds the profile tuple for a generated dataset.
pub fn profile(dataset: &Dataset, secs_per_sample: f64) -> DatasetProfile {
    let spec = &dataset.spec;
    let n = dataset.len();
    DatasetProfile {
        name: spec.name.clone(),
        size: n,
        modality: spec.modality,
        classes: spec.classes,
        complexity: spec.complexity,
        mem_estimate: estimate_memory(n, spec.modality),
        time_estimate: estimate_time(n, spec.complexity, secs_per_sample),
    }
}

/// Flat JSON shape printed by the `profile` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub name: String,
    pub size: usize,
    pub modality: Modality,
    pub classes: usize,
    pub complexity: f64,
    pub mem_estimate_bytes: u64,
    pub time_estimate_s: f64,
    pub size_category: SizeCategory,
}

impl ProfileSummary {
    pub fn new(p: &DatasetProfile, thresholds: SizeThresholds) -> Self {
        Self {
            name: p.name.clone(),
            size: p.size,
            modality: p.modality,
            classes: p.classes,
            complexity: p.complexity,
            mem_estimate_bytes: p.mem_estimate,
            time_estimate_s: p.time_estimate,
            size_category: p.size_category(thresholds),
        }
    }
}
