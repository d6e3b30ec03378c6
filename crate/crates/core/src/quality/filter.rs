use serde::{Deserialize, Serialize};

use crate::model::OerRecord;

pub const DEFAULT_QUALITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RemovalReason {
    /// No quality score could be computed.
    Unscorable {
        detail: String,
    },
    LowQuality {
        quality_meta: f64,
        quality_prop: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedRecord {
    pub record: OerRecord,
    #[serde(flatten)]
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<OerRecord>,
    pub removed: Vec<RemovedRecord>,
}

/// Drops a record when either quality score is below `threshold` or a score is
/// missing. A score exactly at the threshold passes.
pub fn quality_filter(corpus: Vec<OerRecord>, threshold: f64) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for record in corpus {
        match (record.quality_meta, record.quality_prop) {
            (Some(m), Some(p)) if m >= threshold && p >= threshold => out.kept.push(record),
            (Some(quality_meta), Some(quality_prop)) => out
                .removed
                .push(RemovedRecord { record, reason: RemovalReason::LowQuality { quality_meta, quality_prop } }),
            _ => out.removed.push(RemovedRecord {
                record,
                reason: RemovalReason::Unscorable { detail: "missing quality score".into() },
            }),
        }
    }
    out
}
