//! File-backed store of all system state.
//!
//! Layout of a store directory:
//!
//! ```text
//! <dir>/CURRENT              name of the live generation, e.g. "gen-000003"
//! <dir>/gen-000003/
//!     schema_version.json    {"schema_version": 1}
//!     oers.json              { id: OerRecord }
//!     quarantine.json        [ QuarantineEntry ]
//!     learners.json          { id: LearnerProfile }
//!     recommendations.json   { rec_id: RatedRecommendation }
//!     ratings.json           [ RatingEvent ]
//!     sessions.json          [ ApiSession ]
//!     market.json            MarketIndex or null
//!     corpus_stats.json      CorpusStats
//! ```
//!
//! Every persist writes a complete new generation and then atomically replaces
//! `CURRENT`, so readers see either the old or the new state and never a mix.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fsutil::{read_json, write_atomic, write_json_atomic};
use crate::market::MarketIndex;
use crate::model::{ApiSession, LearnerProfile, OerRecord, RatedRecommendation};
use crate::preference::CorpusStats;
use crate::quality::RemovalReason;

pub const SCHEMA_VERSION: u32 = 1;

const CURRENT: &str = "CURRENT";
/// Generations kept besides the live one.
const KEEP_OLD_GENERATIONS: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum QuarantineEntry {
    /// The payload could not be read or normalized.
    Rejected { source: String, file: String, position: usize, reason: String, payload: Value },
    /// Normalized but removed by quality control.
    Filtered { record: Box<OerRecord>, reason: RemovalReason },
}

/// One rating submission together with the loss it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingEvent {
    pub rec_id: String,
    pub learner_id: String,
    pub rating: u8,
    pub y: f64,
    pub loss_before: f64,
    pub loss_after: f64,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStore {
    pub schema_version: u32,
    pub oers: BTreeMap<String, OerRecord>,
    pub quarantine: Vec<QuarantineEntry>,
    pub learners: BTreeMap<String, LearnerProfile>,
    pub recommendations: BTreeMap<String, RatedRecommendation>,
    pub ratings: Vec<RatingEvent>,
    pub sessions: Vec<ApiSession>,
    pub market: Option<MarketIndex>,
    pub corpus_stats: CorpusStats,
}

impl Default for CorpusStore {
    fn default() -> Self {
        CorpusStore {
            schema_version: SCHEMA_VERSION,
            oers: BTreeMap::new(),
            quarantine: Vec::new(),
            learners: BTreeMap::new(),
            recommendations: BTreeMap::new(),
            ratings: Vec::new(),
            sessions: Vec::new(),
            market: None,
            corpus_stats: CorpusStats::default(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VersionFile {
    schema_version: u32,
}

impl CorpusStore {
    /// All referential and record-level violations, empty when consistent.
    pub fn integrity_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (k, o) in &self.oers {
            if k != &o.id {
                v.push(format!("oer keyed `{k}` has id `{}`", o.id));
            }
            if let Err(e) = o.validate() {
                v.push(format!("oer `{k}`: {e}"));
            }
        }
        for (k, l) in &self.learners {
            if k != &l.id {
                v.push(format!("learner keyed `{k}` has id `{}`", l.id));
            }
            if let Err(e) = l.validate() {
                v.push(format!("learner `{k}`: {e}"));
            }
        }
        for (k, r) in &self.recommendations {
            if k != &r.rec_id {
                v.push(format!("recommendation keyed `{k}` has id `{}`", r.rec_id));
            }
            if !self.learners.contains_key(&r.learner_id) {
                v.push(format!("recommendation `{k}` references missing learner `{}`", r.learner_id));
            }
            if !self.oers.contains_key(&r.oer_id) {
                v.push(format!("recommendation `{k}` references missing oer `{}`", r.oer_id));
            }
            if let Err(e) = r.validate() {
                v.push(format!("recommendation `{k}`: {e}"));
            }
        }
        for e in &self.ratings {
            match self.recommendations.get(&e.rec_id) {
                None => v.push(format!("rating references missing recommendation `{}`", e.rec_id)),
                Some(r) if r.learner_id != e.learner_id => {
                    v.push(format!("rating of `{}` names learner `{}`", e.rec_id, e.learner_id))
                }
                _ => {}
            }
        }
        let mut tokens = std::collections::HashSet::new();
        for s in &self.sessions {
            if !tokens.insert(s.token.as_str()) {
                v.push("duplicate session token".to_string());
            }
            if !self.learners.contains_key(&s.learner_id) {
                v.push(format!("session references missing learner `{}`", s.learner_id));
            }
        }
        for (kind, range) in &self.corpus_stats.lengths {
            if !(range.min <= range.max) {
                v.push(format!("corpus_stats for {kind:?}: min {} > max {}", range.min, range.max));
            }
        }
        v
    }

    pub fn check_integrity(&self) -> Result<()> {
        let v = self.integrity_violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Integrity(v))
        }
    }

    /// Writes a new generation and switches `CURRENT` to it.
    pub fn persist(&self, dir: &Path) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: self.schema_version, supported: SCHEMA_VERSION });
        }
        self.check_integrity()?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let next = current_generation(dir)?.map_or(0, |(n, _)| n + 1);
        let name = format!("gen-{next:06}");
        let gen = dir.join(&name);
        if gen.exists() {
            std::fs::remove_dir_all(&gen).map_err(|e| Error::io(&gen, e))?;
        }
        std::fs::create_dir(&gen).map_err(|e| Error::io(&gen, e))?;
        write_json_atomic(&gen.join("schema_version.json"), &VersionFile { schema_version: self.schema_version })?;
        write_json_atomic(&gen.join("oers.json"), &self.oers)?;
        write_json_atomic(&gen.join("quarantine.json"), &self.quarantine)?;
        write_json_atomic(&gen.join("learners.json"), &self.learners)?;
        write_json_atomic(&gen.join("recommendations.json"), &self.recommendations)?;
        write_json_atomic(&gen.join("ratings.json"), &self.ratings)?;
        write_json_atomic(&gen.join("sessions.json"), &self.sessions)?;
        write_json_atomic(&gen.join("market.json"), &self.market)?;
        write_json_atomic(&gen.join("corpus_stats.json"), &self.corpus_stats)?;
        write_atomic(&dir.join(CURRENT), format!("{name}\n").as_bytes())?;
        prune_generations(dir, next);
        Ok(())
    }

    /// Reads the live generation, checking the schema version and integrity.
    pub fn load(dir: &Path) -> Result<Self> {
        let (_, gen) =
            current_generation(dir)?.ok_or_else(|| Error::NotFound { kind: "store", id: dir.display().to_string() })?;
        let version: VersionFile = read_json(&gen.join("schema_version.json"))?;
        if version.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: version.schema_version, supported: SCHEMA_VERSION });
        }
        let market: Option<MarketIndex> = read_json(&gen.join("market.json"))?;
        let market = market.map(MarketIndex::reindexed);
        let store = CorpusStore {
            schema_version: version.schema_version,
            oers: read_json(&gen.join("oers.json"))?,
            quarantine: read_json(&gen.join("quarantine.json"))?,
            learners: read_json(&gen.join("learners.json"))?,
            recommendations: read_json(&gen.join("recommendations.json"))?,
            ratings: read_json(&gen.join("ratings.json"))?,
            sessions: read_json(&gen.join("sessions.json"))?,
            market,
            corpus_stats: read_json(&gen.join("corpus_stats.json"))?,
        };
        store.check_integrity()?;
        Ok(store)
    }

    /// Directory of the live generation, if the store has been persisted.
    pub fn live_generation(dir: &Path) -> Result<Option<PathBuf>> {
        Ok(current_generation(dir)?.map(|(_, p)| p))
    }
}

fn parse_generation(name: &str) -> Option<u64> {
    name.strip_prefix("gen-")?.parse().ok()
}

fn current_generation(dir: &Path) -> Result<Option<(u64, PathBuf)>> {
    let path = dir.join(CURRENT);
    let name = match std::fs::read_to_string(&path) {
        Ok(s) => s.trim().to_string(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let n = parse_generation(&name)
        .ok_or_else(|| Error::Integrity(vec![format!("{}: bad generation name `{name}`", path.display())]))?;
    Ok(Some((n, dir.join(name))))
}

fn prune_generations(dir: &Path, live: u64) {
    let Ok(entries) = std::fs::read_dir(dir) else { return };
    for e in entries.flatten() {
        let name = e.file_name();
        let Some(n) = name.to_str().and_then(parse_generation) else { continue };
        if n + (KEEP_OLD_GENERATIONS as u64) < live || n > live {
            let _ = std::fs::remove_dir_all(e.path());
        }
    }
}
