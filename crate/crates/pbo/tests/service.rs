use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pbo::service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &std::path::Path) -> Router {
    let state = AppState::new(ServiceConfig {
        data_dir: dir.to_path_buf(),
        default_budget: 8,
    })
    .unwrap();
    router(state)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &Router, body: Value) -> (String, Value) {
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_string(), v)
}

async fn answer(app: &Router, id: &str, token: &str, preference: i64) -> (StatusCode, Value) {
    let body = json!({ "token": token, "preference": preference });
    call(
        app,
        "POST",
        &format!("/sessions/{id}/answer?wait=true"),
        Some(body),
    )
    .await
}

// Prefers the point closer to 0.3 in the first coordinate.
fn dm_choice(q: &Value) -> i64 {
    let f = |p: &Value| (p[0].as_f64().unwrap() - 0.3).abs();
    let (a, b) = (f(&q["first"]), f(&q["second"]));
    if a < b {
        -1
    } else if b < a {
        1
    } else {
        0
    }
}

async fn run_to_end(app: &Router, id: &str, mut desc: Value) -> Value {
    while let Some(q) = desc.get("pending_query").filter(|q| !q.is_null()).cloned() {
        let (status, v) = answer(app, id, q["token"].as_str().unwrap(), dm_choice(&q)).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        desc = v;
    }
    desc
}

#[tokio::test]
async fn full_session_reaches_done() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, desc) = create(
        &app,
        json!({ "lower": [0.0], "upper": [1.0], "names": ["speed"], "units": ["m/s"], "config": { "seed": 3 } }),
    )
    .await;
    assert_eq!(desc["phase"], "initial_queries");
    assert_eq!(desc["budget"], 8);
    assert_eq!(desc["n_init"], 4);
    assert_eq!(desc["variables"][0]["name"], "speed");
    assert_eq!(desc["pending_query"]["token"], "q0");

    let done = run_to_end(&app, &id, desc).await;
    assert_eq!(done["phase"], "done");
    assert_eq!(done["queries_answered"], 7);

    let (status, full) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(full["samples"].as_array().unwrap().len(), 8);
    let history = full["history"].as_array().unwrap();
    assert_eq!(history.len(), 7);
    assert!(history[2]["delta"].is_null());
    assert!(history[3]["delta"].is_number());
    let best = full["best"]["x"][0].as_f64().unwrap();
    for s in full["samples"].as_array().unwrap() {
        assert!((best - 0.3).abs() <= (s[0].as_f64().unwrap() - 0.3).abs() + 1e-12);
    }

    let (status, v) = answer(&app, &id, "q7", 1).await;
    assert_eq!(status, StatusCode::CONFLICT, "{v}");
}

#[tokio::test]
async fn stale_tokens_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, _) = create(&app, json!({ "lower": [0.0], "upper": [1.0] })).await;
    assert_eq!(answer(&app, &id, "q0", -1).await.0, StatusCode::OK);
    let (status, v) = answer(&app, &id, "q0", -1).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(v["error"].as_str().unwrap().contains("q1"));
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    assert_eq!(
        call(&app, "GET", "/sessions/nope", None).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(answer(&app, "nope", "q0", 0).await.0, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, "GET", "/sessions/..%2Fetc", None).await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn invalid_requests_are_unprocessable() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, v) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({ "lower": [0.0, 5.0], "upper": [1.0, 1.0] })),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["index"], 1);

    let wide = json!({ "lower": vec![0.0; 21], "upper": vec![1.0; 21] });
    assert_eq!(
        call(&app, "POST", "/sessions", Some(wide)).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );

    let small = json!({ "lower": [0.0], "upper": [1.0], "budget": 4 });
    assert_eq!(
        call(&app, "POST", "/sessions", Some(small)).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );

    let (id, _) = create(&app, json!({ "lower": [0.0], "upper": [1.0] })).await;
    assert_eq!(
        answer(&app, &id, "q0", 2).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    assert_eq!(answer(&app, &id, "q0", -1).await.0, StatusCode::OK);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = {
        let app = app(dir.path());
        let (id, mut desc) = create(
            &app,
            json!({ "lower": [-2.0, 0.0], "upper": [2.0, 1.0], "budget": 12 }),
        )
        .await;
        for _ in 0..9 {
            let q = desc["pending_query"].clone();
            desc = answer(&app, &id, q["token"].as_str().unwrap(), dm_choice(&q))
                .await
                .1;
        }
        let full = call(&app, "GET", &format!("/sessions/{id}"), None).await.1;
        (id, full)
    };
    let app = app(dir.path());
    let (status, after) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before, after);
    assert_eq!(after["phase"], "iterating");
    let done = run_to_end(&app, &id, after).await;
    assert_eq!(done["phase"], "done");
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let body = json!({ "lower": [0.0], "upper": [1.0], "config": { "seed": 11 } });
    let (a, da) = create(&app, body.clone()).await;
    let (b, db) = create(&app, body).await;
    assert_ne!(a, b);
    let (ra, rb) = tokio::join!(run_to_end(&app, &a, da), run_to_end(&app, &b, db));
    assert_eq!(ra["phase"], "done");
    let fa = call(&app, "GET", &format!("/sessions/{a}"), None).await.1;
    let fb = call(&app, "GET", &format!("/sessions/{b}"), None).await.1;
    assert_eq!(fa["samples"], fb["samples"]);
    assert_eq!(rb["best"], ra["best"]);
}

#[tokio::test]
async fn answers_without_wait_report_computing() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, mut desc) = create(
        &app,
        json!({ "lower": [0.0], "upper": [1.0], "budget": 10 }),
    )
    .await;
    for _ in 0..4 {
        let q = desc["pending_query"].clone();
        desc = answer(&app, &id, q["token"].as_str().unwrap(), dm_choice(&q))
            .await
            .1;
    }
    let q = desc["pending_query"].clone();
    assert_eq!(q["first_label"], "candidate");
    let body = json!({ "token": q["token"], "preference": dm_choice(&q) });
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/answer"), Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert!(
        v["phase"] == "computing" || v["phase"] == "iterating",
        "{v}"
    );
    let mut phase = v["phase"].clone();
    for _ in 0..200 {
        if phase != "computing" {
            break;
        }
        tokio::time::sleep(std::time::Duration::from_millis(20)).await;
        phase = call(&app, "GET", &format!("/sessions/{id}"), None).await.1["phase"].clone();
    }
    assert_eq!(phase, "iterating");
}
