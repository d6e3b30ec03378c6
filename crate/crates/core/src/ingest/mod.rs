//! Batch ingestion of repository dumps into a [`CorpusStore`].

mod dump;
mod store;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use dump::{normalize_record, parse_iso_duration, read_dump, FieldAliases, RawRepositoryRecord, SkillContext};
pub use store::{CorpusStore, QuarantineEntry, RatingEvent, SCHEMA_VERSION};

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::market::MarketIndex;
use crate::preference::CorpusStats;
use crate::quality::{quality_filter, QualityModels, RemovalReason};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: String,
    pub records: usize,
    pub rejected: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub files: Vec<FileReport>,
    pub normalized: usize,
    pub kept: usize,
    pub removed: usize,
    /// Removal count per reason: `rejected`, `unscorable`, `low_quality`.
    pub removal_reasons: BTreeMap<String, usize>,
}

/// The `*.json` and `*.jsonl` files in a dump directory, sorted by name.
pub fn dump_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "jsonl")))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Normalizes, scores and filters every dump record.
///
/// Unreadable files are reported and skipped. Rejected, unscorable and
/// low-quality records go to the quarantine collection.
pub fn ingest(
    dump_paths: &[PathBuf],
    market: &MarketIndex,
    models: &QualityModels<f64>,
    embeddings: &EmbeddingTable<f64>,
    threshold: f64,
) -> (CorpusStore, IngestReport) {
    let ctx = SkillContext { descriptions: &market.descriptions, embeddings };
    let mut store = CorpusStore { market: Some(market.clone()), ..CorpusStore::default() };
    let mut report = IngestReport::default();
    let mut normalized = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for path in dump_paths {
        let mut fr = FileReport { path: path.display().to_string(), ..Default::default() };
        match read_dump(path) {
            Err(e) => fr.error = Some(e.to_string()),
            Ok(raws) => {
                fr.records = raws.len();
                for raw in raws {
                    let result = normalize_record(&raw, &ctx).and_then(|r| {
                        if seen.insert(r.id.clone()) {
                            Ok(r)
                        } else {
                            Err(Error::validation("id", format!("duplicate id `{}`", r.id)))
                        }
                    });
                    match result {
                        Ok(r) => normalized.push(r),
                        Err(e) => {
                            fr.rejected += 1;
                            store.quarantine.push(QuarantineEntry::Rejected {
                                source: raw.source,
                                file: fr.path.clone(),
                                position: raw.dump_position,
                                reason: e.to_string(),
                                payload: serde_json::Value::Object(raw.payload),
                            });
                        }
                    }
                }
            }
        }
        report.files.push(fr);
    }
    report.normalized = normalized.len();
    store.corpus_stats = CorpusStats::compute(&normalized);

    let mut scored = Vec::with_capacity(normalized.len());
    for mut r in normalized {
        match models.score(&r) {
            Ok((meta, prop)) => {
                r.quality_meta = Some(meta);
                r.quality_prop = Some(prop);
                scored.push(r);
            }
            Err(e) => store.quarantine.push(QuarantineEntry::Filtered {
                record: Box::new(r),
                reason: RemovalReason::Unscorable { detail: e.to_string() },
            }),
        }
    }
    let outcome = quality_filter(scored, threshold);
    for removed in outcome.removed {
        store.quarantine.push(QuarantineEntry::Filtered { record: Box::new(removed.record), reason: removed.reason });
    }
    report.kept = outcome.kept.len();
    store.oers = outcome.kept.into_iter().map(|r| (r.id.clone(), r)).collect();
    for q in &store.quarantine {
        let key = match q {
            QuarantineEntry::Rejected { .. } => "rejected",
            QuarantineEntry::Filtered { reason: RemovalReason::Unscorable { .. }, .. } => "unscorable",
            QuarantineEntry::Filtered { reason: RemovalReason::LowQuality { .. }, .. } => "low_quality",
        };
        *report.removal_reasons.entry(key.to_string()).or_default() += 1;
    }
    report.removed = store.quarantine.len();
    (store, report)
}
