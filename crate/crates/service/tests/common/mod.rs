#![allow(dead_code)]

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use serde_json::json;

use oerec_core::ingest::CorpusStore;
use oerec_core::market::MarketIndex;
use oerec_core::model::JobExperience;
use oerec_core::synthetic;
use oerec_service::service::{GoalSkill, GoalsRequest, NoPersist, Persister, RegisterRequest, Service, SteppingClock};
use oerec_service::Config;

pub fn store(per_cell: usize) -> CorpusStore {
    let mut s = oerec_service::study::study_store(per_cell, 5);
    s.market = Some(
        MarketIndex::build(&synthetic::vacancies(300, 8), synthetic::lexicon(), synthetic::skill_descriptions(), 16)
            .unwrap(),
    );
    s
}

pub fn clock() -> Box<SteppingClock> {
    Box::new(SteppingClock::new(Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap(), Duration::hours(1)))
}

pub fn service(per_cell: usize) -> Service {
    Service::new(store(per_cell), Config::default(), Box::new(NoPersist), clock())
}

pub fn register_req(ext: &str) -> RegisterRequest {
    RegisterRequest {
        external_id: Some(ext.into()),
        country: Some("Germany".into()),
        city: Some("Berlin".into()),
        birth_date: NaiveDate::from_ymd_opt(1990, 5, 17),
        gender: None,
        job_experiences: vec![JobExperience { title: "Data Scientist".into(), industry: "J62".into(), skills: vec![] }],
    }
}

pub fn goals(skills: &[(&str, &str)]) -> GoalsRequest {
    GoalsRequest {
        target_job: Some("Data Scientist".into()),
        skills: skills.iter().map(|(s, l)| GoalSkill { skill: s.to_string(), level: json!(l) }).collect(),
    }
}

/// Registers a learner with the given goals and returns its id.
pub fn learner(svc: &Service, ext: &str, skills: &[(&str, &str)]) -> String {
    let id = svc.register_learner(register_req(ext)).unwrap().learner.id;
    svc.set_goals(&id, goals(skills)).unwrap();
    id
}

/// Persister that can be switched to fail.
#[derive(Clone, Default)]
pub struct Flaky {
    pub fail: Arc<AtomicBool>,
    pub writes: Arc<AtomicUsize>,
}

impl Persister for Flaky {
    fn persist(&self, _: &CorpusStore) -> oerec_core::Result<()> {
        if self.fail.load(Ordering::SeqCst) {
            return Err(oerec_core::Error::Config("injected write failure".into()));
        }
        self.writes.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }
}
