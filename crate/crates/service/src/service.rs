//! Transport-independent implementation of every API operation.
//!
//! All state lives in one [`CorpusStore`]. A mutation runs against a copy of
//! the store, the copy is persisted, and only then does it replace the live
//! state, so a failed request leaves both memory and disk unchanged. Writes
//! are serialized by a single lock, which also serializes each learner's writes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use oerec_core::ingest::{CorpusStore, RatingEvent};
use oerec_core::market::SkillDemand;
use oerec_core::model::{
    ApiSession, ExpertiseLevel, Goals, JobExperience, LearnerProfile, OerRecord, RatedRecommendation, RecStatus,
    SkillLevel,
};
use oerec_core::normalize::normalize_rating;
use oerec_core::preference::{
    init_preference, recommend_at_level, update_preference, FeatureVector, PreferenceVector, TrainingHistory,
};
use oerec_core::scalar::Scalar;

use crate::config::Config;
use crate::error::{ApiError, ApiResult, ErrorCode};

/// Durable storage for committed store states.
pub trait Persister: Send + Sync {
    fn persist(&self, store: &CorpusStore) -> oerec_core::Result<()>;
}

/// Persists into a store directory.
pub struct DirPersister(pub PathBuf);

impl Persister for DirPersister {
    fn persist(&self, store: &CorpusStore) -> oerec_core::Result<()> {
        store.persist(&self.0)
    }
}

/// Keeps state in memory only.
pub struct NoPersist;

impl Persister for NoPersist {
    fn persist(&self, _: &CorpusStore) -> oerec_core::Result<()> {
        Ok(())
    }
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Deterministic clock that advances by a fixed step on every reading.
pub struct SteppingClock {
    start: DateTime<Utc>,
    step: Duration,
    ticks: AtomicI64,
}

impl SteppingClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        SteppingClock { start, step, ticks: AtomicI64::new(0) }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> DateTime<Utc> {
        let n = self.ticks.fetch_add(1, Ordering::SeqCst) as i32;
        self.start + self.step * n
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegisterRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_id: Option<String>,
    #[serde(default)]
    pub country: Option<String>,
    #[serde(default)]
    pub city: Option<String>,
    #[serde(default)]
    pub birth_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default)]
    pub job_experiences: Vec<JobExperience>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestedSkill {
    pub job: String,
    #[serde(flatten)]
    pub demand: SkillDemand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterResponse {
    pub learner: LearnerProfile,
    pub token: String,
    pub expires_at: DateTime<Utc>,
    pub suggested_skills: Vec<SuggestedSkill>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GoalSkill {
    pub skill: String,
    /// Level name or ordinal 0..=3.
    pub level: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GoalsRequest {
    #[serde(default)]
    pub target_job: Option<String>,
    #[serde(default)]
    pub skills: Vec<GoalSkill>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSkill {
    #[serde(flatten)]
    pub demand: SkillDemand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSkillsResponse {
    pub job: String,
    /// Location granularity the list was taken from.
    pub country: Option<String>,
    pub city: Option<String>,
    pub vacancy_count: usize,
    pub skills: Vec<JobSkill>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationView {
    pub rec_id: String,
    pub learner_id: String,
    pub skill: String,
    pub level: ExpertiseLevel,
    pub status: RecStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    pub issued_at: DateTime<Utc>,
    /// Cosine between the OER's feature vector and the learner's current preference.
    pub score: f64,
    /// Feature vector snapshot taken at issue time.
    pub feature_vector: FeatureVector<f64>,
    pub oer: OerRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRequest {
    pub rec_id: String,
    pub rating: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingResponse {
    pub rec_id: String,
    pub rating: u8,
    pub y: f64,
    pub loss_before: f64,
    pub loss_after: f64,
    pub preference: PreferenceVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Replace,
    Irrelevant,
    Harder,
}

impl std::str::FromStr for Action {
    type Err = ApiError;

    fn from_str(s: &str) -> ApiResult<Self> {
        match s {
            "replace" => Ok(Action::Replace),
            "irrelevant" => Ok(Action::Irrelevant),
            "harder" => Ok(Action::Harder),
            other => Err(ApiError::validation("action", format!("unknown action `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRequest {
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhausted {
    pub skill: String,
    pub level: ExpertiseLevel,
    pub next_level: Option<ExpertiseLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResponse {
    pub closed: RecommendationView,
    pub next: Option<RecommendationView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhausted: Option<Exhausted>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub in_progress: usize,
    pub finished: usize,
    pub changed: usize,
    pub irrelevant: usize,
    pub total: usize,
}

impl StatusCounts {
    fn add(&mut self, s: RecStatus) {
        match s {
            RecStatus::InProgress => self.in_progress += 1,
            RecStatus::Finished => self.finished += 1,
            RecStatus::Changed => self.changed += 1,
            RecStatus::Irrelevant => self.irrelevant += 1,
        }
        self.total += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkillProgress {
    pub current_level: Option<ExpertiseLevel>,
    pub counts: StatusCounts,
    /// Finished recommendations per level name.
    pub finished_by_level: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgressReport {
    pub learner_id: String,
    /// `YYYY-MM` filter on issue date, when given.
    pub month: Option<String>,
    pub totals: StatusCounts,
    pub skills: BTreeMap<String, SkillProgress>,
    /// Finished recommendations per `YYYY-MM` of completion, over all time.
    pub monthly_finished: BTreeMap<String, usize>,
}

type PoolKey = (String, ExpertiseLevel);

pub struct Service {
    state: Mutex<CorpusStore>,
    pool: HashMap<PoolKey, Vec<OerRecord>>,
    known_skills: BTreeSet<String>,
    persister: Box<dyn Persister>,
    clock: Box<dyn Clock>,
    config: Config,
}

fn month_key(t: DateTime<Utc>) -> String {
    format!("{:04}-{:02}", t.year(), t.month())
}

fn parse_month(m: &str) -> ApiResult<String> {
    NaiveDate::parse_from_str(&format!("{m}-01"), "%Y-%m-%d")
        .map(|d| format!("{:04}-{:02}", d.year(), d.month()))
        .map_err(|_| ApiError::validation("month", format!("`{m}` is not YYYY-MM")))
}

fn required(v: &Option<String>, field: &str) -> ApiResult<String> {
    match v.as_deref().map(str::trim) {
        Some(s) if !s.is_empty() => Ok(s.to_string()),
        _ => Err(ApiError::validation(field, format!("{field} is required"))),
    }
}

fn parse_level(v: &Value, field: &str) -> ApiResult<ExpertiseLevel> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(ApiError::validation(field, format!("invalid level {v}"))),
    };
    text.parse().map_err(|e: oerec_core::Error| ApiError::validation(field, e.to_string()))
}

impl Service {
    pub fn new(store: CorpusStore, config: Config, persister: Box<dyn Persister>, clock: Box<dyn Clock>) -> Self {
        let mut pool: HashMap<PoolKey, Vec<OerRecord>> = HashMap::new();
        for o in store.oers.values() {
            pool.entry((o.target_skill.clone(), o.level)).or_default().push(o.clone());
        }
        let mut known_skills: BTreeSet<String> = store.oers.values().map(|o| o.target_skill.clone()).collect();
        if let Some(m) = &store.market {
            known_skills.extend(m.lexicon.iter().map(|e| e.id.clone()));
        }
        Service { state: Mutex::new(store), pool, known_skills, persister, clock, config }
    }

    pub fn in_memory(store: CorpusStore, config: Config) -> Self {
        Self::new(store, config, Box::new(NoPersist), Box::new(SystemClock))
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Copy of the current committed state.
    pub fn snapshot(&self) -> CorpusStore {
        self.lock().clone()
    }

    pub fn pool_size(&self, skill: &str, level: ExpertiseLevel) -> usize {
        self.pool.get(&(skill.to_string(), level)).map_or(0, Vec::len)
    }

    pub fn skills_in_corpus(&self) -> BTreeSet<String> {
        self.pool.keys().map(|(s, _)| s.clone()).collect()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, CorpusStore> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Runs `f` on a copy of the store. When `f` reports a change the copy is
    /// persisted and swapped in; any error leaves the committed state untouched.
    fn transact<R>(&self, f: impl FnOnce(&mut CorpusStore) -> ApiResult<(R, bool)>) -> ApiResult<R> {
        let mut guard = self.lock();
        let mut draft = guard.clone();
        let (out, dirty) = f(&mut draft)?;
        if dirty {
            self.persister.persist(&draft).map_err(|e| ApiError::internal(format!("could not persist: {e}")))?;
            *guard = draft;
        }
        Ok(out)
    }

    fn read<R>(&self, f: impl FnOnce(&CorpusStore) -> ApiResult<R>) -> ApiResult<R> {
        f(&self.lock())
    }

    /// Checks that `token` is a live session of `learner_id`.
    pub fn authorize(&self, learner_id: &str, token: Option<&str>) -> ApiResult<()> {
        if !self.config.session.require_token {
            return Ok(());
        }
        let now = self.clock.now();
        let unauthorized = || ApiError::new(ErrorCode::Unauthorized, "missing or invalid session token");
        let token = token.ok_or_else(unauthorized)?;
        self.read(|s| {
            s.sessions
                .iter()
                .find(|x| x.token == token && x.learner_id == learner_id && x.expires_at > now)
                .map(|_| ())
                .ok_or_else(unauthorized)
        })
    }

    pub fn register_learner(&self, req: RegisterRequest) -> ApiResult<RegisterResponse> {
        let country = required(&req.country, "country")?;
        let city = required(&req.city, "city")?;
        let birth_date = req.birth_date.ok_or_else(|| ApiError::validation("birth_date", "birth_date is required"))?;
        let now = self.clock.now();
        let token = uuid::Uuid::new_v4().simple().to_string();
        let expires_at = now + Duration::hours(self.config.session.ttl_hours);
        self.transact(|store| {
            if let Some(ext) = &req.external_id {
                if store.learners.values().any(|l| l.external_id.as_deref() == Some(ext)) {
                    return Err(ApiError {
                        field: Some("external_id".into()),
                        ..ApiError::conflict(format!("external id `{ext}` is already registered"))
                    });
                }
            }
            let mut n = store.learners.len() + 1;
            while store.learners.contains_key(&format!("learner-{n:06}")) {
                n += 1;
            }
            let mut learner = LearnerProfile {
                id: format!("learner-{n:06}"),
                external_id: req.external_id.clone(),
                country: country.clone(),
                city: city.clone(),
                birth_date,
                gender: req.gender.clone(),
                job_experiences: req.job_experiences.clone(),
                goals: Goals::default(),
                preference: PreferenceVector::neutral(),
            };
            learner.validate()?;
            let peers: Vec<LearnerProfile> = store.learners.values().cloned().collect();
            learner.preference = init_preference(&learner, &peers, &self.config.coldstart);

            let mut suggested: Vec<SuggestedSkill> = Vec::new();
            if let Some(market) = &store.market {
                for job in &learner.job_experiences {
                    let Ok(entry) = market.required_skills_for_job(&job.title, Some(&country), Some(&city)) else {
                        continue;
                    };
                    for d in &entry.skills {
                        if !suggested.iter().any(|s| s.demand.skill == d.skill) {
                            suggested.push(SuggestedSkill { job: job.title.clone(), demand: d.clone() });
                        }
                    }
                }
            }
            store.sessions.retain(|s| s.expires_at > now);
            store.sessions.push(ApiSession { token: token.clone(), learner_id: learner.id.clone(), expires_at });
            store.learners.insert(learner.id.clone(), learner.clone());
            Ok((RegisterResponse { learner, token: token.clone(), expires_at, suggested_skills: suggested }, true))
        })
    }

    pub fn set_goals(&self, learner_id: &str, req: GoalsRequest) -> ApiResult<Goals> {
        let mut skills = Vec::with_capacity(req.skills.len());
        for (i, g) in req.skills.iter().enumerate() {
            let level = parse_level(&g.level, &format!("skills[{i}].level"))?;
            if !self.known_skills.contains(&g.skill) {
                return Err(ApiError::validation(format!("skills[{i}].skill"), format!("unknown skill `{}`", g.skill)));
            }
            if skills.iter().any(|s: &SkillLevel| s.skill == g.skill) {
                return Err(ApiError::validation(
                    format!("skills[{i}].skill"),
                    format!("skill `{}` listed twice", g.skill),
                ));
            }
            skills.push(SkillLevel::new(g.skill.clone(), level));
        }
        let goals = Goals { target_job: req.target_job.filter(|j| !j.trim().is_empty()), skills };
        self.transact(|store| {
            let learner = store
                .learners
                .get_mut(learner_id)
                .ok_or_else(|| ApiError::not_found(format!("learner `{learner_id}` not found")))?;
            learner.goals = goals.clone();
            Ok((goals.clone(), true))
        })
    }

    pub fn job_skills(&self, title: &str, country: Option<&str>, city: Option<&str>) -> ApiResult<JobSkillsResponse> {
        self.read(|store| {
            let market = store.market.as_ref().ok_or_else(|| ApiError::not_found("no labour-market index loaded"))?;
            let entry = market.required_skills_for_job(title, country, city)?;
            Ok(JobSkillsResponse {
                job: entry.job.clone(),
                country: entry.country.clone(),
                city: entry.city.clone(),
                vacancy_count: entry.vacancy_count,
                skills: entry
                    .skills
                    .iter()
                    .map(|d| JobSkill {
                        demand: d.clone(),
                        description: market.skill_description(&d.skill).ok().map(String::from),
                    })
                    .collect(),
            })
        })
    }

    fn view(&self, store: &CorpusStore, rec: &RatedRecommendation) -> ApiResult<RecommendationView> {
        let learner = store
            .learners
            .get(&rec.learner_id)
            .ok_or_else(|| ApiError::internal(format!("learner `{}` missing", rec.learner_id)))?;
        let oer =
            store.oers.get(&rec.oer_id).ok_or_else(|| ApiError::internal(format!("oer `{}` missing", rec.oer_id)))?;
        let score =
            oerec_core::embeddings::cosine_similarity(&rec.feature_vector.values, learner.preference.as_slice())
                .unwrap_or(0.0);
        Ok(RecommendationView {
            rec_id: rec.rec_id.clone(),
            learner_id: rec.learner_id.clone(),
            skill: rec.skill_id.clone(),
            level: rec.level,
            status: rec.status,
            rating: rec.rating,
            issued_at: rec.issued_at,
            score: score.to_f64_lossy(),
            feature_vector: rec.feature_vector,
            oer: oer.clone(),
        })
    }

    /// Issues a new recommendation into `store`.
    fn issue(&self, store: &mut CorpusStore, learner_id: &str, skill: &str) -> ApiResult<RecommendationView> {
        let learner = &store.learners[learner_id];
        let level = learner
            .goals
            .level_for(skill)
            .ok_or_else(|| ApiError::validation("skill", format!("`{skill}` is not among the learner's goals")))?;
        let exclusions: HashSet<String> = store
            .recommendations
            .values()
            .filter(|r| r.learner_id == learner_id && r.skill_id == skill)
            .map(|r| r.oer_id.clone())
            .collect();
        let pool = self.pool.get(&(skill.to_string(), level)).map_or(&[][..], Vec::as_slice);
        let rec = recommend_at_level::<f64>(&learner.preference, skill, level, pool, &store.corpus_stats, &exclusions)?;
        let mut n = store.recommendations.len() + 1;
        while store.recommendations.contains_key(&format!("rec-{n:07}")) {
            n += 1;
        }
        let stored = RatedRecommendation {
            rec_id: format!("rec-{n:07}"),
            learner_id: learner_id.to_string(),
            oer_id: rec.oer.id.clone(),
            skill_id: skill.to_string(),
            level,
            status: RecStatus::InProgress,
            rating: None,
            issued_at: self.clock.now(),
            closed_at: None,
            feature_vector: rec.feature_vector,
        };
        store.recommendations.insert(stored.rec_id.clone(), stored.clone());
        self.view(store, &stored)
    }

    /// The learner's in-progress recommendation for `skill`, or a new one.
    pub fn get_recommendation(&self, learner_id: &str, skill: &str) -> ApiResult<RecommendationView> {
        self.transact(|store| {
            if !store.learners.contains_key(learner_id) {
                return Err(ApiError::not_found(format!("learner `{learner_id}` not found")));
            }
            let open = store
                .recommendations
                .values()
                .filter(|r| r.learner_id == learner_id && r.skill_id == skill && r.status == RecStatus::InProgress)
                .max_by(|a, b| a.issued_at.cmp(&b.issued_at).then_with(|| a.rec_id.cmp(&b.rec_id)));
            if let Some(open) = open {
                return Ok((self.view(store, open)?, false));
            }
            Ok((self.issue(store, learner_id, skill)?, true))
        })
    }

    fn owned_rec<'a>(store: &'a CorpusStore, learner_id: &str, rec_id: &str) -> ApiResult<&'a RatedRecommendation> {
        if !store.learners.contains_key(learner_id) {
            return Err(ApiError::not_found(format!("learner `{learner_id}` not found")));
        }
        store
            .recommendations
            .get(rec_id)
            .filter(|r| r.learner_id == learner_id)
            .ok_or_else(|| ApiError::not_found(format!("recommendation `{rec_id}` not found for `{learner_id}`")))
    }

    pub fn submit_rating(&self, learner_id: &str, req: RatingRequest) -> ApiResult<RatingResponse> {
        if !(1..=5).contains(&req.rating) {
            return Err(ApiError::validation("rating", format!("{} outside 1..=5", req.rating)));
        }
        let rating = req.rating as u8;
        let y: f64 = normalize_rating(req.rating)?;
        let now = self.clock.now();
        self.transact(|store| {
            let rec = Self::owned_rec(store, learner_id, &req.rec_id)?;
            if rec.status != RecStatus::InProgress {
                return Err(ApiError::conflict(format!(
                    "recommendation `{}` is {:?}, not in progress",
                    rec.rec_id, rec.status
                )));
            }
            let rec = store.recommendations.get_mut(&req.rec_id).expect("checked above");
            rec.status = RecStatus::Finished;
            rec.rating = Some(rating);
            rec.closed_at = Some(now);
            let history = TrainingHistory::<f64>::from_recommendations(learner_id, store.recommendations.values())?;
            let learner = store.learners.get_mut(learner_id).expect("checked above");
            let out = update_preference(&learner.preference, &history, &self.config.preference);
            learner.preference = out.preference;
            store.ratings.push(RatingEvent {
                rec_id: req.rec_id.clone(),
                learner_id: learner_id.to_string(),
                rating,
                y,
                loss_before: out.initial_loss,
                loss_after: out.final_loss,
                at: now,
            });
            Ok((
                RatingResponse {
                    rec_id: req.rec_id.clone(),
                    rating,
                    y,
                    loss_before: out.initial_loss,
                    loss_after: out.final_loss,
                    preference: out.preference,
                },
                true,
            ))
        })
    }

    pub fn recommendation_action(
        &self,
        learner_id: &str,
        rec_id: &str,
        req: ActionRequest,
    ) -> ApiResult<ActionResponse> {
        let action: Action = req.action.parse()?;
        let now = self.clock.now();
        self.transact(|store| {
            let rec = Self::owned_rec(store, learner_id, rec_id)?;
            if rec.status != RecStatus::InProgress {
                return Err(ApiError::conflict(format!(
                    "recommendation `{rec_id}` is {:?}, not in progress",
                    rec.status
                )));
            }
            let skill = rec.skill_id.clone();
            if action == Action::Harder {
                let learner = store.learners.get_mut(learner_id).expect("checked above");
                let goal = learner.goals.skills.iter_mut().find(|g| g.skill == skill).ok_or_else(|| {
                    ApiError::validation("skill", format!("`{skill}` is not among the learner's goals"))
                })?;
                goal.level = goal.level.next().ok_or_else(|| ApiError {
                    field: Some("action".into()),
                    ..ApiError::new(ErrorCode::MaxLevel, "already at maximum level")
                })?;
            }
            let rec = store.recommendations.get_mut(rec_id).expect("checked above");
            rec.status = if action == Action::Irrelevant { RecStatus::Irrelevant } else { RecStatus::Changed };
            rec.closed_at = Some(now);
            let closed = self.view(store, &store.recommendations[rec_id])?;
            let (next, exhausted) = match self.issue(store, learner_id, &skill) {
                Ok(v) => (Some(v), None),
                Err(e) if e.code == ErrorCode::LevelExhausted => {
                    let level = store.learners[learner_id].goals.level_for(&skill).expect("goal present");
                    (None, Some(Exhausted { skill: skill.clone(), level, next_level: level.next() }))
                }
                Err(e) => return Err(e),
            };
            Ok((ActionResponse { closed, next, exhausted }, true))
        })
    }

    pub fn progress_report(&self, learner_id: &str, month: Option<&str>) -> ApiResult<ProgressReport> {
        let month = month.filter(|m| !m.trim().is_empty()).map(|m| parse_month(m.trim())).transpose()?;
        self.read(|store| {
            let learner = store
                .learners
                .get(learner_id)
                .ok_or_else(|| ApiError::not_found(format!("learner `{learner_id}` not found")))?;
            let mut report =
                ProgressReport { learner_id: learner_id.to_string(), month: month.clone(), ..Default::default() };
            for g in &learner.goals.skills {
                report
                    .skills
                    .insert(g.skill.clone(), SkillProgress { current_level: Some(g.level), ..Default::default() });
            }
            for r in store.recommendations.values().filter(|r| r.learner_id == learner_id) {
                if r.status == RecStatus::Finished {
                    if let Some(t) = r.closed_at {
                        *report.monthly_finished.entry(month_key(t)).or_default() += 1;
                    }
                }
                if month.as_ref().is_some_and(|m| month_key(r.issued_at) != *m) {
                    continue;
                }
                report.totals.add(r.status);
                let sp = report.skills.entry(r.skill_id.clone()).or_default();
                sp.counts.add(r.status);
                if r.status == RecStatus::Finished {
                    *sp.finished_by_level.entry(r.level.as_str().to_string()).or_default() += 1;
                }
            }
            Ok(report)
        })
    }
}
