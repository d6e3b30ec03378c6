use oerec_service::study::{run_study, study_store, StudyConfig};
use oerec_service::Config;

#[test]
fn default_study_is_reproducible_and_well_formed() {
    let cfg = Config::default();
    let a = run_study(study_store(60, 1), &cfg).unwrap();
    let b = run_study(study_store(60, 1), &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    println!("{}", a.render_table());
    assert!(a.recommendation_count >= 23 * 17 && a.recommendation_count <= 23 * 20);
    for row in a.quartiles.iter().chain([&a.total]) {
        let sum: f64 = row.percent.iter().sum();
        assert!((sum - 100.0).abs() <= 1.0, "{sum}");
        assert_eq!(row.useful, row.percent[2] + row.percent[3] + row.percent[4]);
    }
}

#[test]
fn noise_free_ratings_follow_the_hidden_vector() {
    let cfg =
        Config { study: StudyConfig { n_learners: 4, noise_sd: 0.0, ..Default::default() }, ..Default::default() };
    let r = run_study(study_store(30, 2), &cfg).unwrap();
    assert_eq!(r.ratings.len(), r.recommendation_count);
}
