//! Server-side aggregation and complexity-gated method selection.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaflError};
use crate::training::{ControlVariate, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggregationMethod {
    FedAvg,
    FedProx,
    Scaffold,
}

impl AggregationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregationMethod::FedAvg => "FedAvg",
            AggregationMethod::FedProx => "FedProx",
            AggregationMethod::Scaffold => "Scaffold",
        }
    }
}

impl std::fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// FedAvg below 0.5, FedProx on `[0.5, 0.7)`, SCAFFOLD from 0.7 up.
pub fn select_method(complexity: f64) -> Result<AggregationMethod> {
    if !(0.0..=1.0).contains(&complexity) {
        return Err(SaflError::OutOfRange(format!(
            "complexity {complexity} outside [0, 1]"
        )));
    }
    Ok(if complexity < 0.5 {
        AggregationMethod::FedAvg
    } else if complexity < 0.7 {
        AggregationMethod::FedProx
    } else {
        AggregationMethod::Scaffold
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub params: ParamVector,
    pub n_samples: u64,
    pub delta_control: Option<ControlVariate>,
}

/// Sample-weighted mean of the participants' models.
///
/// Updates are summed in ascending `client_id` order regardless of the order
/// they are passed in. For SCAFFOLD the server control is advanced by
/// `sum(delta_i) / n_total_clients`.
pub fn aggregate(
    updates: &[ClientUpdate],
    method: AggregationMethod,
    server_control: Option<&ControlVariate>,
    n_total_clients: usize,
) -> Result<(ParamVector, Option<ControlVariate>)> {
    let first = updates.first().ok_or(SaflError::Empty("client updates"))?;
    let len = first.params.len();
    let layout = first.params.layout();
    for u in updates {
        if u.params.len() != len || u.params.layout() != layout {
            return Err(SaflError::DimensionMismatch {
                context: "client update",
                expected: len,
                got: u.params.len(),
            });
        }
        if u.n_samples == 0 {
            return Err(SaflError::OutOfRange(format!(
                "client {} reported zero samples",
                u.client_id
            )));
        }
    }

    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by_key(|u| u.client_id);

    let total: u64 = ordered.iter().map(|u| u.n_samples).sum();
    let total = total as f64;
    let mut out = vec![0.0; len];
    for u in &ordered {
        let w = u.n_samples as f64 / total;
        for (o, p) in out.iter_mut().zip(u.params.values()) {
            *o += w * p;
        }
    }
    let params = ParamVector::from_values(layout, out)?;

    let control = match method {
        AggregationMethod::Scaffold => {
            if n_total_clients == 0 {
                return Err(SaflError::Config("n_total_clients must be >= 1".into()));
            }
            let mut c = server_control
                .cloned()
                .unwrap_or_else(|| ControlVariate::zeros(len));
            if c.len() != len {
                return Err(SaflError::DimensionMismatch {
                    context: "server control",
                    expected: len,
                    got: c.len(),
                });
            }
            let mut sum = vec![0.0; len];
            for u in &ordered {
                let delta = u.delta_control.as_ref().ok_or_else(|| {
                    SaflError::Config(format!(
                        "SCAFFOLD update from client {} lacks a control delta",
                        u.client_id
                    ))
                })?;
                if delta.len() != len {
                    return Err(SaflError::DimensionMismatch {
                        context: "control delta",
                        expected: len,
                        got: delta.len(),
                    });
                }
                for (s, d) in sum.iter_mut().zip(&delta.0) {
                    *s += d;
                }
            }
            let inv = 1.0 / n_total_clients as f64;
            for (ci, s) in c.0.iter_mut().zip(&sum) {
                *ci += s * inv;
            }
            Some(c)
        }
        AggregationMethod::FedAvg | AggregationMethod::FedProx => None,
    };

    Ok((params, control))
}
