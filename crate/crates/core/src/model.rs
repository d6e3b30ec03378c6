//! Domain types shared by the ingestion pipeline, the recommender and the service.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preference::{FeatureVector, PreferenceVector};

/// Four-step ordinal proficiency scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertiseLevel {
    Beginner = 0,
    Intermediate = 1,
    Advanced = 2,
    Master = 3,
}

impl ExpertiseLevel {
    pub const ALL: [ExpertiseLevel; 4] =
        [ExpertiseLevel::Beginner, ExpertiseLevel::Intermediate, ExpertiseLevel::Advanced, ExpertiseLevel::Master];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    /// The next level up, or `None` at `Master`.
    pub fn next(self) -> Option<ExpertiseLevel> {
        Self::ALL.get(self.ordinal() + 1).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExpertiseLevel::Beginner => "beginner",
            ExpertiseLevel::Intermediate => "intermediate",
            ExpertiseLevel::Advanced => "advanced",
            ExpertiseLevel::Master => "master",
        }
    }
}

impl fmt::Display for ExpertiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExpertiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(n) = s.parse::<usize>() {
            return Self::ALL
                .get(n)
                .copied()
                .ok_or_else(|| Error::validation("level", format!("ordinal {n} outside 0..=3")));
        }
        Self::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::validation("level", format!("unknown expertise level `{s}`")))
    }
}

/// Version of the source registry below. Bump when the one-hot order changes.
pub const SOURCE_REGISTRY_VERSION: u32 = 1;

/// The registered repositories. The discriminant is the one-hot index used in
/// feature vectors and is part of the persisted format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRepository {
    Youtube = 0,
    MitOpenCourseWare = 1,
    SkillsCommons = 2,
    OerCommons = 3,
    WiscOnline = 4,
    KhanAcademy = 5,
    Wikipedia = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Video,
    Text,
}

impl SourceRepository {
    pub const COUNT: usize = 7;

    pub const ALL: [SourceRepository; Self::COUNT] = [
        SourceRepository::Youtube,
        SourceRepository::MitOpenCourseWare,
        SourceRepository::SkillsCommons,
        SourceRepository::OerCommons,
        SourceRepository::WiscOnline,
        SourceRepository::KhanAcademy,
        SourceRepository::Wikipedia,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Stable tag used in dump file names and persisted records.
    pub fn tag(self) -> &'static str {
        match self {
            SourceRepository::Youtube => "youtube",
            SourceRepository::MitOpenCourseWare => "mit_open_course_ware",
            SourceRepository::SkillsCommons => "skills_commons",
            SourceRepository::OerCommons => "oer_commons",
            SourceRepository::WiscOnline => "wisc_online",
            SourceRepository::KhanAcademy => "khan_academy",
            SourceRepository::Wikipedia => "wikipedia",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            SourceRepository::Youtube => "Youtube",
            SourceRepository::MitOpenCourseWare => "MIT OpenCourseWare",
            SourceRepository::SkillsCommons => "Skills Commons",
            SourceRepository::OerCommons => "OER Commons",
            SourceRepository::WiscOnline => "Wisc-Online",
            SourceRepository::KhanAcademy => "Khan Academy",
            SourceRepository::Wikipedia => "Wikipedia",
        }
    }

    /// Length normalization is done separately for each media kind.
    pub fn media_kind(self) -> MediaKind {
        match self {
            SourceRepository::Youtube | SourceRepository::KhanAcademy => MediaKind::Video,
            _ => MediaKind::Text,
        }
    }

    /// Resolves a tag or display name, ignoring case, spaces, dashes and underscores.
    pub fn from_tag(tag: &str) -> Result<SourceRepository> {
        let key = squash(tag);
        Self::ALL
            .into_iter()
            .find(|s| squash(s.tag()) == key || squash(s.display_name()) == key)
            .or(match key.as_str() {
                "mitocw" | "ocw" => Some(SourceRepository::MitOpenCourseWare),
                "khan" => Some(SourceRepository::KhanAcademy),
                _ => None,
            })
            .ok_or_else(|| Error::validation("source", format!("unregistered source `{tag}`")))
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

impl fmt::Display for SourceRepository {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Popularity signal as published by the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NativeRate {
    Stars { stars: f64 },
    LikeDislike { likes: u64, dislikes: u64 },
}

impl NativeRate {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NativeRate::Stars { stars } if !(0.0..=5.0).contains(&stars) => {
                Err(Error::validation("native_rate", format!("star rating {stars} outside [0,5]")))
            }
            _ => Ok(()),
        }
    }
}

/// One educational resource with its metadata and derived scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OerRecord {
    pub id: String,
    pub source: SourceRepository,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub target_skill: String,
    pub level: ExpertiseLevel,
    pub url: String,
    /// Duration in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcription: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub native_rate: Option<NativeRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking_position: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking_position_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skill_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_meta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_prop: Option<f64>,
}

impl OerRecord {
    /// A record with only the required fields set.
    pub fn new(
        id: impl Into<String>,
        source: SourceRepository,
        title: impl Into<String>,
        target_skill: impl Into<String>,
        level: ExpertiseLevel,
        url: impl Into<String>,
    ) -> Self {
        OerRecord {
            id: id.into(),
            source,
            title: title.into(),
            description: None,
            target_skill: target_skill.into(),
            level,
            url: url.into(),
            length: None,
            transcription: None,
            view_count: None,
            native_rate: None,
            ranking_position: None,
            language: None,
            ranking_position_score: None,
            skill_similarity: None,
            quality_meta: None,
            quality_prop: None,
        }
    }

    /// Checks the record-level invariants on derived fields.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::validation("id", "empty id"));
        }
        if let Some(len) = self.length {
            if !(len >= 0.0) {
                return Err(Error::validation("length", format!("{len} is negative")));
            }
        }
        if let Some(rate) = &self.native_rate {
            rate.validate()?;
        }
        match (self.ranking_position, self.ranking_position_score) {
            (Some(pos), Some(score)) if (score - 1.0 / pos as f64).abs() > 1e-12 => {
                return Err(Error::validation("ranking_position_score", format!("{score} != 1/{pos}")));
            }
            _ => {}
        }
        for (name, v) in [
            ("ranking_position_score", self.ranking_position_score),
            ("quality_meta", self.quality_meta),
            ("quality_prop", self.quality_prop),
        ] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::validation(name, format!("{v} outside [0,1]")));
                }
            }
        }
        if let Some(s) = self.skill_similarity {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::validation("skill_similarity", format!("{s} outside [-1,1]")));
            }
        }
        Ok(())
    }

    /// Lower of the two quality scores, used as a recommendation tie-break.
    pub fn min_quality(&self) -> f64 {
        match (self.quality_meta, self.quality_prop) {
            (Some(a), Some(b)) => a.min(b),
            _ => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillLevel {
    pub skill: String,
    pub level: ExpertiseLevel,
}

impl SkillLevel {
    pub fn new(skill: impl Into<String>, level: ExpertiseLevel) -> Self {
        SkillLevel { skill: skill.into(), level }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobExperience {
    pub title: String,
    /// Economic activity code of the employer's industry.
    #[serde(default)]
    pub industry: String,
    #[serde(default)]
    pub skills: Vec<SkillLevel>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goals {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_job: Option<String>,
    #[serde(default)]
    pub skills: Vec<SkillLevel>,
}

impl Goals {
    pub fn level_for(&self, skill: &str) -> Option<ExpertiseLevel> {
        self.skills.iter().find(|g| g.skill == skill).map(|g| g.level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerProfile {
    pub id: String,
    /// Identity in an external system; unique when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_id: Option<String>,
    pub country: String,
    pub city: String,
    pub birth_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default)]
    pub job_experiences: Vec<JobExperience>,
    #[serde(default)]
    pub goals: Goals,
    pub preference: PreferenceVector<f64>,
}

impl LearnerProfile {
    pub fn validate(&self) -> Result<()> {
        if self.country.trim().is_empty() {
            return Err(Error::validation("country", "must not be empty"));
        }
        if self.city.trim().is_empty() {
            return Err(Error::validation("city", "must not be empty"));
        }
        let mut seen = std::collections::HashSet::new();
        for g in &self.goals.skills {
            if !seen.insert(g.skill.as_str()) {
                return Err(Error::validation("goals", format!("skill `{}` has more than one current level", g.skill)));
            }
        }
        Ok(())
    }

    /// Skill ids across all job experiences.
    pub fn experience_skills(&self) -> std::collections::BTreeSet<&str> {
        self.job_experiences.iter().flat_map(|j| j.skills.iter().map(|s| s.skill.as_str())).collect()
    }
}

/// Opaque bearer token issued to a learner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSession {
    pub token: String,
    pub learner_id: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecStatus {
    InProgress,
    Finished,
    Changed,
    Irrelevant,
}

impl RecStatus {
    pub const ALL: [RecStatus; 4] =
        [RecStatus::InProgress, RecStatus::Finished, RecStatus::Changed, RecStatus::Irrelevant];
}

/// One issued recommendation and the learner's response to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatedRecommendation {
    pub rec_id: String,
    pub learner_id: String,
    pub oer_id: String,
    pub skill_id: String,
    pub level: ExpertiseLevel,
    pub status: RecStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    pub issued_at: DateTime<Utc>,
    /// When the status left `in_progress`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_at: Option<DateTime<Utc>>,
    pub feature_vector: FeatureVector<f64>,
}

impl RatedRecommendation {
    pub fn validate(&self) -> Result<()> {
        match (self.status, self.rating) {
            (RecStatus::Finished, Some(r)) if (1..=5).contains(&r) => Ok(()),
            (RecStatus::Finished, Some(r)) => Err(Error::validation("rating", format!("{r} outside 1..=5"))),
            (RecStatus::Finished, None) => Err(Error::validation("rating", "finished recommendation without rating")),
            (_, Some(_)) => Err(Error::validation("rating", "rating present on a recommendation that is not finished")),
            (_, None) => Ok(()),
        }
    }
}
