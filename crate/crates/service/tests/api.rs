mod common;

use std::collections::HashSet;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use common::*;
use oerec_core::model::{ExpertiseLevel, RecStatus};
use oerec_service::service::{ActionRequest, RatingRequest, Service};
use oerec_service::{Config, ErrorCode};

fn act(
    svc: &Service,
    id: &str,
    rec: &str,
    action: &str,
) -> Result<oerec_service::service::ActionResponse, oerec_service::ApiError> {
    svc.recommendation_action(id, rec, ActionRequest { action: action.into() })
}

fn rate(
    svc: &Service,
    id: &str,
    rec: &str,
    r: i64,
) -> Result<oerec_service::service::RatingResponse, oerec_service::ApiError> {
    svc.submit_rating(id, RatingRequest { rec_id: rec.into(), rating: r })
}

#[test]
fn registration_suggests_skills_for_past_jobs() {
    let svc = service(3);
    let out = svc.register_learner(register_req("a")).unwrap();
    assert_eq!(out.learner.id, "learner-000001");
    assert!(!out.suggested_skills.is_empty());
    assert!(out.suggested_skills.iter().all(|s| s.job == "Data Scientist"));
    assert_eq!(out.learner.preference, oerec_core::preference::PreferenceVector::neutral());
}

#[test]
fn registration_validation_and_conflicts() {
    let svc = service(3);
    let mut r = register_req("a");
    r.city = None;
    let e = svc.register_learner(r).unwrap_err();
    assert_eq!((e.code, e.field.as_deref()), (ErrorCode::Validation, Some("city")));
    let mut r = register_req("a");
    r.gender = None;
    svc.register_learner(r).unwrap();
    let e = svc.register_learner(register_req("a")).unwrap_err();
    assert_eq!(e.code, ErrorCode::Conflict);
    assert_eq!(svc.snapshot().learners.len(), 1);
}

#[test]
fn cold_start_copies_similar_peers() {
    let svc = service(3);
    let a = learner(&svc, "a", &[("sql", "beginner")]);
    let rec = svc.get_recommendation(&a, "sql").unwrap();
    let p = rate(&svc, &a, &rec.rec_id, 5).unwrap().preference;
    let b = svc.register_learner(register_req("b")).unwrap();
    assert_eq!(b.learner.preference, p);
}

#[test]
fn goals_reject_unknown_skills_and_levels() {
    let svc = service(3);
    let id = svc.register_learner(register_req("a")).unwrap().learner.id;
    let e = svc.set_goals(&id, goals(&[("sql", "guru")])).unwrap_err();
    assert_eq!(e.field.as_deref(), Some("skills[0].level"));
    let e = svc.set_goals(&id, goals(&[("basket weaving", "beginner")])).unwrap_err();
    assert_eq!(e.field.as_deref(), Some("skills[0].skill"));
    let e = svc.set_goals(&id, goals(&[("sql", "beginner"), ("sql", "master")])).unwrap_err();
    assert_eq!(e.code, ErrorCode::Validation);
    let e = svc.set_goals("learner-999999", goals(&[])).unwrap_err();
    assert_eq!(e.code, ErrorCode::NotFound);
    let g = svc.set_goals(&id, goals(&[("sql", "2")])).unwrap();
    assert_eq!(g.level_for("sql"), Some(ExpertiseLevel::Advanced));
}

#[test]
fn job_skills_lookup() {
    let svc = service(1);
    let r = svc.job_skills("data scientist", Some("Germany"), None).unwrap();
    assert!(r.skills.len() <= 16 && !r.skills.is_empty());
    assert!(r.skills.windows(2).all(|w| w[0].demand.vacancy_count >= w[1].demand.vacancy_count));
    assert!(r.skills.iter().all(|s| s.description.is_some()));
    assert_eq!(svc.job_skills("astronaut", None, None).unwrap_err().code, ErrorCode::NotFound);
}

#[test]
fn in_progress_recommendation_is_idempotent() {
    let svc = service(3);
    let id = learner(&svc, "a", &[("sql", "beginner")]);
    let a = svc.get_recommendation(&id, "sql").unwrap();
    let b = svc.get_recommendation(&id, "sql").unwrap();
    assert_eq!(a, b);
    assert_eq!(svc.snapshot().recommendations.len(), 1);
    assert_eq!(svc.get_recommendation(&id, "python").unwrap_err().field.as_deref(), Some("skill"));
}

#[test]
fn rating_rules() {
    let svc = service(3);
    let id = learner(&svc, "a", &[("sql", "beginner")]);
    let rec = svc.get_recommendation(&id, "sql").unwrap();
    assert_eq!(rate(&svc, &id, &rec.rec_id, 6).unwrap_err().field.as_deref(), Some("rating"));
    assert_eq!(rate(&svc, &id, &rec.rec_id, 0).unwrap_err().code, ErrorCode::Validation);
    let out = rate(&svc, &id, &rec.rec_id, 4).unwrap();
    assert_eq!(out.y, 0.75);
    assert!(out.loss_after <= out.loss_before);
    assert_eq!(rate(&svc, &id, &rec.rec_id, 4).unwrap_err().code, ErrorCode::Conflict);
    assert_eq!(rate(&svc, &id, "rec-9999999", 4).unwrap_err().code, ErrorCode::NotFound);
    let other = learner(&svc, "b", &[("sql", "beginner")]);
    assert_eq!(rate(&svc, &other, &rec.rec_id, 4).unwrap_err().code, ErrorCode::NotFound);
    let s = svc.snapshot();
    assert_eq!(s.ratings.len(), 1);
    assert_eq!(s.recommendations[&rec.rec_id].status, RecStatus::Finished);
}

#[test]
fn harder_moves_up_a_level_and_stops_at_master() {
    let svc = service(3);
    let id = learner(&svc, "a", &[("sql", "beginner")]);
    let rec = svc.get_recommendation(&id, "sql").unwrap();
    let out = act(&svc, &id, &rec.rec_id, "harder").unwrap();
    assert_eq!(out.closed.status, RecStatus::Changed);
    let next = out.next.unwrap();
    assert_eq!(next.level, ExpertiseLevel::Intermediate);
    assert_eq!(next.oer.level, ExpertiseLevel::Intermediate);

    let m = learner(&svc, "m", &[("sql", "master")]);
    let rec = svc.get_recommendation(&m, "sql").unwrap();
    let before = svc.snapshot();
    let e = act(&svc, &m, &rec.rec_id, "harder").unwrap_err();
    assert_eq!((e.code, e.status()), (ErrorCode::MaxLevel, 409));
    assert_eq!(svc.snapshot(), before);
    assert_eq!(act(&svc, &m, &rec.rec_id, "skip").unwrap_err().field.as_deref(), Some("action"));
}

#[test]
fn irrelevant_and_replace_exclude_and_exhaust() {
    let svc = service(3);
    let id = learner(&svc, "a", &[("sql", "beginner")]);
    let first = svc.get_recommendation(&id, "sql").unwrap();
    let out = act(&svc, &id, &first.rec_id, "irrelevant").unwrap();
    assert_eq!(out.closed.status, RecStatus::Irrelevant);
    let second = out.next.unwrap();
    assert_ne!(second.oer.id, first.oer.id);
    let out = act(&svc, &id, &second.rec_id, "replace").unwrap();
    let third = out.next.unwrap();
    let out = act(&svc, &id, &third.rec_id, "replace").unwrap();
    assert!(out.next.is_none());
    let ex = out.exhausted.unwrap();
    assert_eq!(ex.next_level, Some(ExpertiseLevel::Intermediate));
    let e = svc.get_recommendation(&id, "sql").unwrap_err();
    assert_eq!((e.code, e.next_level), (ErrorCode::LevelExhausted, Some(ExpertiseLevel::Intermediate)));
    let seen: HashSet<_> = [first.oer.id, second.oer.id, third.oer.id].into();
    assert_eq!(seen.len(), 3);
}

#[test]
fn progress_counts() {
    let svc = service(6);
    let id = learner(&svc, "a", &[("sql", "beginner"), ("python", "advanced")]);
    for _ in 0..3 {
        let r = svc.get_recommendation(&id, "sql").unwrap();
        rate(&svc, &id, &r.rec_id, 4).unwrap();
    }
    svc.get_recommendation(&id, "sql").unwrap();
    let r = svc.get_recommendation(&id, "python").unwrap();
    act(&svc, &id, &r.rec_id, "irrelevant").unwrap();

    let p = svc.progress_report(&id, None).unwrap();
    let sql = &p.skills["sql"];
    assert_eq!((sql.counts.finished, sql.counts.in_progress, sql.counts.total), (3, 1, 4));
    assert_eq!(sql.finished_by_level["beginner"], 3);
    assert_eq!(p.skills["python"].counts.irrelevant, 1);
    let t = p.totals;
    assert_eq!(t.in_progress + t.finished + t.changed + t.irrelevant, t.total);
    assert_eq!(t.total, svc.snapshot().recommendations.len());
    assert_eq!(p.monthly_finished["2024-03"], 3);

    let march = svc.progress_report(&id, Some("2024-03")).unwrap();
    assert_eq!(march.totals, p.totals);
    let empty = svc.progress_report(&id, Some("2023-01")).unwrap();
    assert_eq!(empty.totals.total, 0);
    assert_eq!(svc.progress_report(&id, Some("March")).unwrap_err().field.as_deref(), Some("month"));
    assert_eq!(svc.progress_report("nobody", None).unwrap_err().code, ErrorCode::NotFound);
}

#[test]
fn tokens_gate_learner_operations() {
    let svc = service(3);
    let out = svc.register_learner(register_req("a")).unwrap();
    let id = out.learner.id;
    svc.authorize(&id, Some(&out.token)).unwrap();
    assert_eq!(svc.authorize(&id, None).unwrap_err().code, ErrorCode::Unauthorized);
    assert_eq!(svc.authorize(&id, Some("nope")).unwrap_err().code, ErrorCode::Unauthorized);
    let other = svc.register_learner(register_req("b")).unwrap();
    assert!(svc.authorize(&id, Some(&other.token)).is_err());

    let mut cfg = Config::default();
    cfg.session.ttl_hours = 1;
    let svc = Service::new(store(1), cfg, Box::new(oerec_service::service::NoPersist), clock());
    let out = svc.register_learner(register_req("a")).unwrap();
    svc.authorize(&out.learner.id, Some(&out.token)).unwrap_err();
}

#[test]
fn failed_persist_leaves_state_unchanged() {
    let flaky = Flaky::default();
    let svc = Service::new(store(3), Config::default(), Box::new(flaky.clone()), clock());
    let id = learner(&svc, "a", &[("sql", "beginner"), ("python", "beginner")]);
    let rec = svc.get_recommendation(&id, "sql").unwrap();
    let before = svc.snapshot();
    let writes = flaky.writes.load(Ordering::SeqCst);

    flaky.fail.store(true, Ordering::SeqCst);
    let failures = [
        svc.register_learner(register_req("b")).unwrap_err(),
        svc.set_goals(&id, goals(&[("git", "master")])).unwrap_err(),
        svc.get_recommendation(&id, "python").unwrap_err(),
        rate(&svc, &id, &rec.rec_id, 5).unwrap_err(),
        act(&svc, &id, &rec.rec_id, "harder").unwrap_err(),
        act(&svc, &id, &rec.rec_id, "irrelevant").unwrap_err(),
    ];
    for e in &failures {
        assert_eq!(e.code, ErrorCode::Internal, "{e}");
    }
    assert_eq!(svc.snapshot(), before);
    assert_eq!(svc.get_recommendation(&id, "sql").unwrap(), rec);

    flaky.fail.store(false, Ordering::SeqCst);
    rate(&svc, &id, &rec.rec_id, 5).unwrap();
    assert_eq!(flaky.writes.load(Ordering::SeqCst), writes + 1);
}

#[test]
fn store_directory_survives_a_failed_request() {
    let dir = tempfile::tempdir().unwrap();
    let s = store(3);
    s.persist(dir.path()).unwrap();
    let svc = Service::new(
        s,
        Config::default(),
        Box::new(oerec_service::service::DirPersister(dir.path().to_path_buf())),
        clock(),
    );
    let id = learner(&svc, "a", &[("sql", "beginner")]);
    let rec = svc.get_recommendation(&id, "sql").unwrap();
    let on_disk = oerec_core::ingest::CorpusStore::load(dir.path()).unwrap();
    assert_eq!(on_disk, svc.snapshot());
    rate(&svc, &id, &rec.rec_id, 9).unwrap_err();
    assert_eq!(oerec_core::ingest::CorpusStore::load(dir.path()).unwrap(), on_disk);
}

#[test]
fn concurrent_ratings_match_a_sequential_order() {
    let setup = || {
        let svc = service(4);
        let id = learner(&svc, "a", &[("sql", "beginner"), ("python", "advanced")]);
        let r0 = svc.get_recommendation(&id, "sql").unwrap();
        rate(&svc, &id, &r0.rec_id, 2).unwrap();
        let a = svc.get_recommendation(&id, "sql").unwrap().rec_id;
        let b = svc.get_recommendation(&id, "python").unwrap().rec_id;
        (svc, id, a, b)
    };
    let final_p = |svc: &Service, id: &str| svc.snapshot().learners[id].preference;

    let (s1, id, a, b) = setup();
    rate(&s1, &id, &a, 5).unwrap();
    rate(&s1, &id, &b, 1).unwrap();
    let ab = final_p(&s1, &id);
    let (s2, _, _, _) = setup();
    rate(&s2, &id, &b, 1).unwrap();
    rate(&s2, &id, &a, 5).unwrap();
    let ba = final_p(&s2, &id);

    for _ in 0..8 {
        let (svc, id, a, b) = setup();
        let svc = Arc::new(svc);
        let handles: Vec<_> = [(a, 5), (b, 1)]
            .into_iter()
            .map(|(rec, r)| {
                let (svc, id) = (Arc::clone(&svc), id.clone());
                std::thread::spawn(move || rate(&svc, &id, &rec, r).unwrap())
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        let p = final_p(&svc, &id);
        assert!(p == ab || p == ba);
        assert_eq!(svc.snapshot().ratings.len(), 3);
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    #[derive(Debug, Clone)]
    enum Step {
        Rate(i64),
        Replace,
        Irrelevant,
        Harder,
    }

    fn step() -> impl Strategy<Value = Step> {
        prop_oneof![
            4 => (1i64..=5).prop_map(Step::Rate),
            2 => Just(Step::Replace),
            2 => Just(Step::Irrelevant),
            1 => Just(Step::Harder),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn recommendations_never_repeat_and_statuses_partition(steps in prop::collection::vec(step(), 1..25)) {
            let svc = service(4);
            let id = learner(&svc, "p", &[("sql", "beginner")]);
            let mut seen: HashSet<String> = HashSet::new();
            for s in steps {
                let rec = match svc.get_recommendation(&id, "sql") {
                    Ok(r) => r,
                    Err(e) => {
                        prop_assert_eq!(e.code, ErrorCode::LevelExhausted);
                        break;
                    }
                };
                if rec.status == RecStatus::InProgress && !seen.contains(&rec.oer.id) {
                    seen.insert(rec.oer.id.clone());
                } else {
                    prop_assert!(seen.contains(&rec.oer.id));
                }
                let level = svc.snapshot().learners[&id].goals.level_for("sql").unwrap();
                prop_assert_eq!(rec.oer.level, level);
                let result = match s {
                    Step::Rate(r) => rate(&svc, &id, &rec.rec_id, r).map(|_| ()),
                    Step::Replace => act(&svc, &id, &rec.rec_id, "replace").map(|_| ()),
                    Step::Irrelevant => act(&svc, &id, &rec.rec_id, "irrelevant").map(|_| ()),
                    Step::Harder => act(&svc, &id, &rec.rec_id, "harder").map(|_| ()),
                };
                if let Err(e) = result {
                    prop_assert_eq!(e.code, ErrorCode::MaxLevel);
                }
            }
            let snap = svc.snapshot();
            let oers: Vec<_> = snap.recommendations.values().map(|r| r.oer_id.clone()).collect();
            let unique: HashSet<_> = oers.iter().collect();
            prop_assert_eq!(unique.len(), oers.len());
            let t = svc.progress_report(&id, None).unwrap().totals;
            prop_assert_eq!(t.in_progress + t.finished + t.changed + t.irrelevant, t.total);
            prop_assert_eq!(t.total, snap.recommendations.len());
            snap.check_integrity().unwrap();
        }
    }
}
