//! Simulated-learner study.
//!
//! Learners with hidden preference vectors register with a [`Service`], set
//! goals, and then repeatedly fetch and rate recommendations. Ratings come
//! from the hidden vector plus Gaussian noise, so the only way ratings improve
//! is for the learned preference to move towards the hidden one.

use std::fmt::Write as _;

use anyhow::Context;
use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use oerec_core::ingest::CorpusStore;
use oerec_core::model::{ExpertiseLevel, JobExperience, SkillLevel};
use oerec_core::preference::{FeatureVector, DIM, SOURCE_OFFSET};
use oerec_core::synthetic::{self, JOBS, PLACES};
use oerec_core::{Error, Result};

use crate::config::Config;
use crate::service::{GoalSkill, GoalsRequest, NoPersist, RatingRequest, RegisterRequest, Service, SteppingClock};

/// Share of goals drawn at each level, Beginner first.
pub const LEVEL_WEIGHTS: [u32; 4] = [22, 26, 31, 21];

pub const CATEGORY_LABELS: [&str; 5] = ["Very dissatisfied", "Dissatisfied", "OK", "Satisfied", "Very satisfied"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub n_learners: usize,
    pub min_recs: usize,
    pub max_recs: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// Learners are drawn around this many shared taste profiles.
    pub n_groups: usize,
    /// Chance that a profile component is strong rather than weak.
    pub strong_fraction: f64,
    /// Spread of each learner around its group profile.
    pub group_sd: f64,
    pub min_goal_skills: usize,
    pub max_goal_skills: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            n_learners: 23,
            min_recs: 17,
            max_recs: 20,
            noise_sd: 0.1,
            seed: 20240601,
            n_groups: 3,
            strong_fraction: 0.35,
            group_sd: 0.1,
            min_goal_skills: 3,
            max_goal_skills: 5,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.min_recs == 0 || self.min_recs > self.max_recs {
            return bad(format!("study.min_recs {} must be in 1..=max_recs {}", self.min_recs, self.max_recs));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!("study.noise_sd must be >= 0, got {}", self.noise_sd));
        }
        if !(self.group_sd >= 0.0 && self.group_sd.is_finite()) {
            return bad(format!("study.group_sd must be >= 0, got {}", self.group_sd));
        }
        if !(0.0..=1.0).contains(&self.strong_fraction) {
            return bad(format!("study.strong_fraction must be in [0,1], got {}", self.strong_fraction));
        }
        if self.n_groups == 0 {
            return bad("study.n_groups must be positive".into());
        }
        if self.min_goal_skills == 0 || self.min_goal_skills > self.max_goal_skills {
            return bad(format!(
                "study.min_goal_skills {} must be in 1..=max_goal_skills {}",
                self.min_goal_skills, self.max_goal_skills
            ));
        }
        Ok(())
    }
}

/// Rating 1..=5 for a raw satisfaction in [0,1], by uniform fifths.
pub fn rating_from_raw(raw: f64) -> u8 {
    let raw = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
    ((raw * 5.0).floor() as u8 + 1).min(5)
}

/// `P*·x` scaled by the largest value it can take over feature vectors with a
/// single source bit set.
pub fn normalized_affinity(hidden: &[f64; DIM], x: &FeatureVector<f64>) -> f64 {
    let cont: f64 = hidden[..SOURCE_OFFSET].iter().sum();
    let src = hidden[SOURCE_OFFSET..].iter().copied().fold(0.0, f64::max);
    let norm = cont + src;
    if norm <= 0.0 {
        return 0.0;
    }
    let dot: f64 = hidden.iter().zip(&x.values).map(|(a, b)| a * b).sum();
    dot / norm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedLearner {
    pub hidden: [f64; DIM],
    pub noise_sd: f64,
    pub group: usize,
    pub profile: RegisterRequest,
    pub goals: Vec<SkillLevel>,
    pub n_recs: usize,
}

impl SimulatedLearner {
    pub fn rate<R: Rng>(&self, x: &FeatureVector<f64>, rng: &mut R) -> u8 {
        let noise =
            if self.noise_sd > 0.0 { Normal::new(0.0, self.noise_sd).expect("validated sd").sample(rng) } else { 0.0 };
        rating_from_raw(normalized_affinity(&self.hidden, x) + noise)
    }
}

/// Percentage of ratings that are OK or better; 0 for no ratings.
pub fn useful_rate(ratings: &[u8]) -> f64 {
    if ratings.is_empty() {
        return 0.0;
    }
    100.0 * ratings.iter().filter(|&&r| r >= 3).count() as f64 / ratings.len() as f64
}

/// `100 * count / n` cut to one decimal, e.g. 336 of 415 gives "80.9".
pub fn percent_one_decimal(count: usize, n: usize) -> String {
    if n == 0 {
        return "0.0".into();
    }
    let tenths = (1000 * count as u128) / n as u128;
    format!("{}.{}", tenths / 10, tenths % 10)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub label: String,
    pub n: usize,
    /// Ratings 1..=5.
    pub counts: [usize; 5],
    pub percent: [f64; 5],
    /// Sum of the OK, Satisfied and Very satisfied percentages.
    pub useful: f64,
}

impl DistributionRow {
    pub fn from_ratings(label: impl Into<String>, ratings: &[u8]) -> Self {
        let mut counts = [0usize; 5];
        for &r in ratings {
            counts[(r.clamp(1, 5) - 1) as usize] += 1;
        }
        let n = ratings.len();
        let percent = counts.map(|c| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 });
        DistributionRow { label: label.into(), n, counts, percent, useful: percent[2] + percent[3] + percent[4] }
    }

    pub fn useful_count(&self) -> usize {
        self.counts[2..].iter().sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub seed: u64,
    pub n_learners: usize,
    pub recommendation_count: usize,
    /// Four chronological quarters of all ratings.
    pub quartiles: Vec<DistributionRow>,
    pub total: DistributionRow,
    /// Every rating in submission order.
    pub ratings: Vec<u8>,
}

const QUARTILE_LABELS: [&str; 4] = ["0-25%", "25-50%", "50-75%", "75-100%"];

/// Splits into four consecutive parts whose sizes differ by at most one,
/// larger parts first.
pub fn quarters<T>(xs: &[T]) -> [&[T]; 4] {
    let (q, r) = (xs.len() / 4, xs.len() % 4);
    let mut out: [&[T]; 4] = [&[]; 4];
    let mut start = 0;
    for (i, o) in out.iter_mut().enumerate() {
        let len = q + usize::from(i < r);
        *o = &xs[start..start + len];
        start += len;
    }
    out
}

impl StudyReport {
    pub fn from_ratings(seed: u64, n_learners: usize, ratings: Vec<u8>) -> Self {
        let quartiles =
            quarters(&ratings).iter().zip(QUARTILE_LABELS).map(|(q, l)| DistributionRow::from_ratings(l, q)).collect();
        StudyReport {
            seed,
            n_learners,
            recommendation_count: ratings.len(),
            quartiles,
            total: DistributionRow::from_ratings("Total", &ratings),
            ratings,
        }
    }

    pub fn quartile_useful_rates(&self) -> Vec<f64> {
        self.quartiles.iter().map(|q| q.useful).collect()
    }

    /// Aligned text table, one row per quarter plus a total row.
    pub fn render_table(&self) -> String {
        let mut header = vec!["Progress in evaluation (%)"];
        header.extend(CATEGORY_LABELS);
        header.push("Useful");
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for row in self.quartiles.iter().chain(std::iter::once(&self.total)) {
            let mut cells = vec![format!("{} (n={})", row.label, row.n)];
            cells.extend(row.counts.iter().map(|&c| percent_one_decimal(c, row.n)));
            cells.push(percent_one_decimal(row.useful_count(), row.n));
            rows.push(cells);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, &w))| if i == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

fn group_profile<R: Rng>(rng: &mut R, strong_fraction: f64) -> [f64; DIM] {
    std::array::from_fn(|_| {
        if rng.random_bool(strong_fraction) {
            rng.random_range(0.6..1.0)
        } else {
            rng.random_range(0.0..0.2)
        }
    })
}

/// Draws the study population. `skills` must be non-empty and sorted.
pub fn generate_learners(cfg: &StudyConfig, skills: &[String]) -> Vec<SimulatedLearner> {
    let mut rng = synthetic::rng(cfg.seed);
    let groups: Vec<[f64; DIM]> = (0..cfg.n_groups).map(|_| group_profile(&mut rng, cfg.strong_fraction)).collect();
    let spread = Normal::new(0.0, cfg.group_sd).expect("validated sd");
    let levels = WeightedIndex::new(LEVEL_WEIGHTS).expect("positive weights");
    (0..cfg.n_learners)
        .map(|i| {
            let group = rng.random_range(0..cfg.n_groups);
            let hidden = std::array::from_fn(|c| (groups[group][c] + spread.sample(&mut rng)).clamp(0.0, 1.0));
            let n_goal = rng.random_range(cfg.min_goal_skills..=cfg.max_goal_skills).min(skills.len());
            let goals = skills
                .choose_multiple(&mut rng, n_goal)
                .map(|s| SkillLevel::new(s.clone(), ExpertiseLevel::ALL[levels.sample(&mut rng)]))
                .collect();
            let n_recs = rng.random_range(cfg.min_recs..=cfg.max_recs);
            let (country, city) = PLACES[group % PLACES.len()];
            let (job, job_skills) = JOBS[group % JOBS.len()];
            let profile = RegisterRequest {
                external_id: Some(format!("sim-{i:03}")),
                country: Some(country.into()),
                city: Some(city.into()),
                birth_date: NaiveDate::from_ymd_opt(1970 + (i % 30) as i32, 1 + (i % 12) as u32, 1),
                gender: None,
                job_experiences: vec![JobExperience {
                    title: job.into(),
                    industry: String::new(),
                    skills: job_skills.iter().map(|s| SkillLevel::new(*s, ExpertiseLevel::Intermediate)).collect(),
                }],
            };
            SimulatedLearner { hidden, noise_sd: cfg.noise_sd, group, profile, goals, n_recs }
        })
        .collect()
}

/// Recommendations learner `l` will request for each of its goals.
fn demand_per_goal(l: &SimulatedLearner) -> Vec<usize> {
    let g = l.goals.len();
    (0..g).map(|i| l.n_recs / g + usize::from(i < l.n_recs % g)).collect()
}

/// Runs the study against a fresh in-memory service over `store`.
///
/// Learners register first, then take turns: each turn a learner fetches one
/// recommendation for its next goal skill and rates it.
pub fn run_study(store: CorpusStore, config: &Config) -> anyhow::Result<StudyReport> {
    let cfg = &config.study;
    cfg.validate()?;
    let mut service_cfg = config.clone();
    service_cfg.session.require_token = false;
    let clock = SteppingClock::new(Utc.with_ymd_and_hms(2024, 1, 1, 8, 0, 0).unwrap(), Duration::hours(1));
    let service = Service::new(store, service_cfg, Box::new(NoPersist), Box::new(clock));
    if cfg.n_learners == 0 {
        return Ok(StudyReport::from_ratings(cfg.seed, 0, Vec::new()));
    }
    let skills: Vec<String> = service.skills_in_corpus().into_iter().collect();
    if skills.is_empty() {
        return Err(Error::Config("corpus is empty".into()).into());
    }
    let learners = generate_learners(cfg, &skills);
    for (i, l) in learners.iter().enumerate() {
        if l.goals.is_empty() {
            return Err(Error::Config(format!("simulated learner {i} has no goals")).into());
        }
        for (goal, need) in l.goals.iter().zip(demand_per_goal(l)) {
            let have = service.pool_size(&goal.skill, goal.level);
            if have < need {
                return Err(Error::Config(format!(
                    "corpus too small: `{}` at {} has {have} OERs, simulated learner {i} needs {need}",
                    goal.skill, goal.level
                ))
                .into());
            }
        }
    }

    let mut ids = Vec::with_capacity(learners.len());
    for l in &learners {
        let reg = service.register_learner(l.profile.clone()).map_err(anyhow::Error::new).context("register")?;
        let goals = GoalsRequest {
            target_job: None,
            skills: l
                .goals
                .iter()
                .map(|g| GoalSkill { skill: g.skill.clone(), level: g.level.as_str().into() })
                .collect(),
        };
        service.set_goals(&reg.learner.id, goals).map_err(anyhow::Error::new).context("set goals")?;
        ids.push(reg.learner.id);
    }

    let mut noise_rng = synthetic::rng(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut done = vec![0usize; learners.len()];
    let mut ratings = Vec::new();
    while done.iter().zip(&learners).any(|(d, l)| *d < l.n_recs) {
        for (i, l) in learners.iter().enumerate() {
            if done[i] >= l.n_recs {
                continue;
            }
            let skill = &l.goals[done[i] % l.goals.len()].skill;
            let rec = service
                .get_recommendation(&ids[i], skill)
                .map_err(anyhow::Error::new)
                .with_context(|| format!("recommendation for {} / {skill}", ids[i]))?;
            let rating = l.rate(&rec.feature_vector, &mut noise_rng);
            service
                .submit_rating(&ids[i], RatingRequest { rec_id: rec.rec_id, rating: rating as i64 })
                .map_err(anyhow::Error::new)
                .context("rating")?;
            ratings.push(rating);
            done[i] += 1;
        }
    }
    Ok(StudyReport::from_ratings(cfg.seed, learners.len(), ratings))
}

/// Corpus used by the default study: every synthetic skill, `per_cell`
/// scored OERs per skill and level.
pub fn study_store(per_cell: usize, seed: u64) -> CorpusStore {
    let oers = synthetic::scored_corpus(&synthetic::skill_ids(), per_cell, seed);
    let corpus_stats = oerec_core::preference::CorpusStats::compute(&oers);
    CorpusStore { oers: oers.into_iter().map(|o| (o.id.clone(), o)).collect(), corpus_stats, ..CorpusStore::default() }
}
