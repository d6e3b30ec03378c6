mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use oerec_service::http::router;

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    token: Option<&str>,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

fn app() -> axum::Router {
    router(Arc::new(common::service(3)))
}

fn registration() -> Value {
    json!({
        "country": "Spain",
        "city": "Madrid",
        "birth_date": "1988-02-29",
        "job_experiences": [{"title": "Data Analyst"}]
    })
}

#[tokio::test]
async fn full_learner_flow() {
    let app = app();
    let (s, reg) = call(&app, "POST", "/learners", None, Some(registration())).await;
    assert_eq!(s, StatusCode::CREATED);
    let id = reg["learner"]["id"].as_str().unwrap().to_string();
    let token = reg["token"].as_str().unwrap().to_string();
    assert!(reg["suggested_skills"].as_array().unwrap().iter().all(|s| s["job"] == "Data Analyst"));
    let tok = Some(token.as_str());

    let (s, g) = call(
        &app,
        "POST",
        &format!("/learners/{id}/goals"),
        tok,
        Some(json!({
            "target_job": "Data Scientist",
            "skills": [{"skill": "sql", "level": "beginner"}, {"skill": "python", "level": 3}]
        })),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{g}");
    assert_eq!(g["skills"][1]["level"], "master");

    let (s, rec) = call(&app, "GET", &format!("/learners/{id}/recommendations?skill=sql"), tok, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(rec["status"], "in_progress");
    let rec_id = rec["rec_id"].as_str().unwrap().to_string();
    let (_, again) = call(&app, "GET", &format!("/learners/{id}/recommendations?skill=sql"), tok, None).await;
    assert_eq!(again, rec);

    let (s, r) =
        call(&app, "POST", &format!("/learners/{id}/ratings"), tok, Some(json!({"rec_id": rec_id, "rating": 5}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(r["y"], 1.0);

    let (_, rec2) = call(&app, "GET", &format!("/learners/{id}/recommendations?skill=python"), tok, None).await;
    let rec2_id = rec2["rec_id"].as_str().unwrap();
    let (s, e) = call(
        &app,
        "POST",
        &format!("/learners/{id}/recommendations/{rec2_id}/action"),
        tok,
        Some(json!({"action": "harder"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(e["code"], "max_level");
    let (s, a) = call(
        &app,
        "POST",
        &format!("/learners/{id}/recommendations/{rec2_id}/action"),
        tok,
        Some(json!({"action": "irrelevant"})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(a["closed"]["status"], "irrelevant");
    assert_ne!(a["next"]["oer"]["id"], rec2["oer"]["id"]);

    let (s, p) = call(&app, "GET", &format!("/learners/{id}/progress?month=2024-03"), tok, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(p["skills"]["sql"]["counts"]["finished"], 1);
    assert_eq!(p["totals"]["total"], 3);
}

#[tokio::test]
async fn validation_errors_carry_the_field() {
    let app = app();
    let mut body = registration();
    body.as_object_mut().unwrap().remove("city");
    let (s, e) = call(&app, "POST", "/learners", None, Some(body)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["code"], "validation");
    assert_eq!(e["field"], "city");

    let mut body = registration();
    body["birth_date"] = json!("yesterday");
    let (s, e) = call(&app, "POST", "/learners", None, Some(body)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(e["message"].is_string());

    let (s, reg) = call(&app, "POST", "/learners", None, Some(registration())).await;
    assert_eq!(s, StatusCode::CREATED);
    let id = reg["learner"]["id"].as_str().unwrap();
    let tok = reg["token"].as_str();
    let (s, e) =
        call(&app, "POST", &format!("/learners/{id}/ratings"), tok, Some(json!({"rec_id": "rec-0000001"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["field"], "rating");
    let (s, e) = call(&app, "GET", &format!("/learners/{id}/recommendations"), tok, None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["field"], "skill");
}

#[tokio::test]
async fn sessions_are_required_on_learner_routes() {
    let app = app();
    let (_, reg) = call(&app, "POST", "/learners", None, Some(registration())).await;
    let id = reg["learner"]["id"].as_str().unwrap();
    let (s, e) = call(&app, "GET", &format!("/learners/{id}/progress"), None, None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    assert_eq!(e["code"], "unauthorized");
    let (s, _) = call(&app, "GET", &format!("/learners/{id}/progress"), Some("forged"), None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn job_skills_and_not_found() {
    let app = app();
    let (s, j) = call(&app, "GET", "/jobs/Data%20Scientist/skills?country=Germany&city=Berlin", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(!j["skills"].as_array().unwrap().is_empty());
    let (s, e) = call(&app, "GET", "/jobs/Astronaut/skills", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "not_found");
    let (s, e) = call(&app, "GET", "/nowhere", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "not_found");
}
