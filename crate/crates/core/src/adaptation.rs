//! Size ordering and per-dataset hyperparameter adaptation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaflError};
use crate::profiler::{DatasetProfile, SizeThresholds};

/// Coefficient of the complexity damping applied to the learning rate.
const COMPLEXITY_LR_DAMPING: f64 = 0.2;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseConfig {
    pub epochs_base: usize,
    pub batch_base: usize,
    pub lr_base: f64,
    pub alpha: f64,
    /// Multiply the learning rate by `1 - 0.2 * complexity`. Turning this off
    /// gives the pure size-scaled rate `lr_base * alpha^c`.
    #[serde(default = "default_true")]
    pub complexity_damping: bool,
}

impl Default for BaseConfig {
    fn default() -> Self {
        Self {
            epochs_base: 2,
            batch_base: 32,
            lr_base: 0.01,
            alpha: 0.8,
            complexity_damping: true,
        }
    }
}

impl BaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs_base == 0 || self.batch_base == 0 {
            return Err(SaflError::Config(
                "epochs_base and batch_base must be positive".into(),
            ));
        }
        if !(self.lr_base > 0.0 && self.lr_base.is_finite()) {
            return Err(SaflError::Config(format!(
                "lr_base must be positive, got {}",
                self.lr_base
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(SaflError::Config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveParams {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
}

/// Indices of `profiles` sorted by ascending size, ties by ascending name.
pub fn order_by_size(profiles: &[DatasetProfile]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&profiles[a], &profiles[b]);
        pa.size.cmp(&pb.size).then_with(|| pa.name.cmp(&pb.name))
    });
    order
}

/// Local epochs, batch size and learning rate for a dataset.
pub fn adaptive_params(
    profile: &DatasetProfile,
    base: &BaseConfig,
    thresholds: SizeThresholds,
) -> AdaptiveParams {
    let level = profile.size_category(thresholds).level();
    let damping = if base.complexity_damping {
        1.0 - COMPLEXITY_LR_DAMPING * profile.complexity
    } else {
        1.0
    };
    AdaptiveParams {
        epochs: base.epochs_base + level as usize,
        batch: base.batch_base << level,
        lr: base.lr_base * base.alpha.powi(level as i32) * damping,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::Modality;

    fn prof(name: &str, size: usize, complexity: f64) -> DatasetProfile {
        DatasetProfile {
            name: name.into(),
            size,
            modality: Modality::Text,
            classes: 3,
            complexity,
            mem_estimate: 1,
            time_estimate: 1.0,
        }
    }

    #[test]
    fn sorts_by_size() {
        let ps = [
            prof("x", 2800, 0.9),
            prof("y", 400, 0.4),
            prof("z", 1200, 0.7),
        ];
        assert_eq!(order_by_size(&ps), vec![1, 2, 0]);
    }

    #[test]
    fn ties_broken_by_name() {
        let ps = [prof("b", 500, 0.4), prof("a", 500, 0.4)];
        assert_eq!(order_by_size(&ps), vec![1, 0]);
    }

    #[test]
    fn worked_examples() {
        let base = BaseConfig::default();
        let t = SizeThresholds::default();

        let ap = adaptive_params(&prof("MicroText_Sentiment", 400, 0.4), &base, t);
        assert_eq!((ap.epochs, ap.batch), (2, 32));
        assert!((ap.lr - 0.0092).abs() < 1e-12);

        let ap = adaptive_params(&prof("MedicalCT_Mini", 1200, 0.7), &base, t);
        assert_eq!((ap.epochs, ap.batch), (3, 64));
        assert!((ap.lr - 0.00688).abs() < 1e-12);

        let ap = adaptive_params(&prof("ImageNet_Subset", 2800, 0.9), &base, t);
        assert_eq!((ap.epochs, ap.batch), (4, 128));
        assert!((ap.lr - 0.005248).abs() < 1e-12);
    }

    #[test]
    fn identity_case() {
        let base = BaseConfig::default();
        let ap = adaptive_params(&prof("a", 10, 0.0), &base, SizeThresholds::default());
        assert_eq!(ap.epochs, base.epochs_base);
        assert_eq!(ap.batch, base.batch_base);
        assert_eq!(ap.lr, base.lr_base);
    }

    #[test]
    fn damping_can_be_disabled() {
        let base = BaseConfig {
            complexity_damping: false,
            ..BaseConfig::default()
        };
        let ap = adaptive_params(&prof("a", 1200, 0.7), &base, SizeThresholds::default());
        assert!((ap.lr - 0.008).abs() < 1e-15);
    }

    #[test]
    fn base_validation() {
        assert!(BaseConfig::default().validate().is_ok());
        let bad = BaseConfig {
            alpha: 1.5,
            ..BaseConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = BaseConfig {
            lr_base: 0.0,
            ..BaseConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
