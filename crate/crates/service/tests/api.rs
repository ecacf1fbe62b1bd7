use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use objcat::harness::{write_event_log, ScenarioKind};
use objcat::knowledge::{Agent, FeatureDef, FeatureSchema, KnowledgeGraph, Parameters, RewardOutcome};
use objcat::scenarios::{example_actions, example_oracle, example_percept, example_schema, ObjectKind, Variant};
use objcat_service::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Client {
    app: Router,
}

impl Client {
    fn new() -> Self {
        Self {
            app: router(&ServiceConfig::default()),
        }
    }

    async fn raw(&self, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(b) => {
                req = req.header("content-type", "application/json");
                Body::from(b)
            }
            None => Body::empty(),
        };
        let res = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, bytes)
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, bytes) = self.raw(method, uri, body.map(|b| b.to_string())).await;
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    // decoded from bytes, since `Value` maps would reorder the weight keys
    async fn ok<T: DeserializeOwned>(&self, method: Method, uri: &str, body: impl Serialize) -> T {
        let (status, bytes) = self.raw(method, uri, Some(serde_json::to_string(&body).unwrap())).await;
        assert!(
            status.is_success(),
            "{uri}: {status} {}",
            String::from_utf8_lossy(&bytes)
        );
        serde_json::from_slice(&bytes).unwrap()
    }

    async fn create(&self, body: Value) -> String {
        let r: CreateSessionResponse = self.ok(Method::POST, "/sessions", body).await;
        r.session_id
    }

    async fn inspect(&self, id: &str) -> InspectResponse {
        let (status, bytes) = self.raw(Method::GET, &format!("/sessions/{id}"), None).await;
        assert_eq!(status, StatusCode::OK);
        serde_json::from_slice(&bytes).unwrap()
    }

    async fn present(&self, id: &str, body: Value) -> PresentResponse {
        self.ok(Method::POST, &format!("/sessions/{id}/present"), body).await
    }

    async fn reward(&self, id: &str, reward: &str) -> RewardResponse {
        self.ok(
            Method::POST,
            &format!("/sessions/{id}/reward"),
            json!({ "reward": reward }),
        )
        .await
    }

    async fn error(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, ErrorBody) {
        let (status, v) = self.call(method, uri, body).await;
        assert!(!status.is_success(), "{uri}: {v}");
        (status, serde_json::from_value(v).unwrap())
    }
}

fn color_form_session() -> Value {
    json!({
        "featureSchema": [
            {"id": "color", "characteristics": ["red", "green", "yellow", "brown"]},
            {"id": "form", "characteristics": ["rectangular", "circular"]}
        ],
        "actionSet": ["fruitBasket", "toyBox", "rubbishBin"],
        "seed": 3
    })
}

fn green_apple() -> Value {
    json!({"features": {"color": [0.0, 1.0, 0.0, 0.0], "form": [0.0, 1.0]}})
}

#[tokio::test]
async fn create_session_examples() {
    let c = Client::new();
    let a = c.create(color_form_session()).await;
    let b = c.create(color_form_session()).await;
    assert_ne!(a, b);
    let snapshot = c.inspect(&a).await;
    assert!(snapshot.graph.categories.is_empty());
    assert!(snapshot.history.is_empty());
    assert!(snapshot.pending.is_none());
    assert!(snapshot.weights.0.iter().all(|(_, w)| *w == 1.0));
    assert_eq!(snapshot.weights.0.len(), 3);

    let mut bad = color_form_session();
    bad["parameters"] = json!({"rhoRa": 2.0, "deltaAw": 0.1, "thetaMc": 1.0, "thetaMf": 0.3});
    let (status, e) = c.error(Method::POST, "/sessions", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e.code, "invalid_parameters");

    let (status, _) = c
        .error(
            Method::POST,
            "/sessions",
            Some(json!({"featureSchema": [], "actionSet": ["a"]})),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c
        .error(Method::POST, "/sessions", Some(json!({"actionSet": ["a"]})))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, e) = c.error(Method::POST, "/sessions", Some(json!({"bogus": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e.code, "malformed_request");
}

#[tokio::test]
async fn malformed_json_gets_an_error_body() {
    let c = Client::new();
    let (status, bytes) = c.raw(Method::POST, "/sessions", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let e: ErrorBody = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(e.code, "malformed_request");
}

#[tokio::test]
async fn unknown_session_is_not_found() {
    let c = Client::new();
    for (method, uri, body) in [
        (Method::GET, "/sessions/nope", None),
        (Method::GET, "/sessions/nope/events", None),
        (Method::POST, "/sessions/nope/present", Some(green_apple())),
        (
            Method::POST,
            "/sessions/nope/reward",
            Some(json!({"reward": "positive"})),
        ),
        (Method::POST, "/sessions/nope/save", Some(json!({}))),
        (
            Method::POST,
            "/sessions/nope/load",
            Some(json!({"path": "/nonexistent"})),
        ),
    ] {
        let (status, e) = c.error(method, uri, body).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(e.code, "not_found");
    }
}

#[tokio::test]
async fn present_and_reward_alternate_strictly() {
    let c = Client::new();
    let id = c.create(color_form_session()).await;

    let (status, e) = c
        .error(
            Method::POST,
            &format!("/sessions/{id}/reward"),
            Some(json!({"reward": "neutral"})),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(e.code, "conflict");

    let first = c.present(&id, green_apple()).await;
    assert!(first.is_new);
    assert_eq!(first.percept_id, "p1");
    let pending = c.inspect(&id).await.pending.unwrap();
    assert_eq!(pending.category_id, first.category_id);
    assert_eq!(pending.chosen_action, first.chosen_action);
    assert_eq!(pending.features["form"], vec![0.0, 1.0]);

    let (status, _) = c
        .error(Method::POST, &format!("/sessions/{id}/present"), Some(green_apple()))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);

    let r = c.reward(&id, "neutral").await;
    assert_eq!(r.outcome, RewardOutcome::Updated);
    assert!(r.merges.is_empty() && r.splits.is_empty());
    assert_eq!(r.event.step, 1);
    let (status, _) = c
        .error(
            Method::POST,
            &format!("/sessions/{id}/reward"),
            Some(json!({"reward": "neutral"})),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);

    let again = c.present(&id, green_apple()).await;
    assert!(!again.is_new);
    assert_eq!(again.category_id, first.category_id);
    c.reward(&id, "positive").await;
    let snapshot = c.inspect(&id).await;
    assert_eq!(snapshot.history.len(), 2);
    assert!(snapshot.pending.is_none());
}

#[tokio::test]
async fn malformed_percepts_are_rejected() {
    let c = Client::new();
    let id = c.create(color_form_session()).await;
    let uri = format!("/sessions/{id}/present");
    for body in [
        json!({"features": {"color": [1.0, 0.0, 0.0], "form": [0.0, 1.0]}}),
        json!({"features": {"color": [1.0, 0.0, 0.0, 0.0]}}),
        json!({"features": {"color": [1.0, 0.0, 0.0, 0.0], "form": [0.0, 1.0], "size": [1.0]}}),
        json!({"features": {"color": [0.0, 0.0, 0.0, 0.0], "form": [0.0, 1.0]}}),
        json!({"features": {"color": "red", "form": [0.0, 1.0]}}),
        json!({}),
        json!({"object": "greenApple"}),
        json!({"card": {"color": 0, "form": 0, "number": 1}}),
        json!({"features": {"color": [1.0, 0.0, 0.0, 0.0], "form": [0.0, 1.0]}, "seed": 4}),
    ] {
        let (status, e) = c.error(Method::POST, &uri, Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(!e.message.is_empty());
    }
    // nothing became pending
    assert!(c.inspect(&id).await.pending.is_none());
    c.present(&id, green_apple()).await;
}

#[tokio::test]
async fn raw_percepts_are_normalized_server_side() {
    let c = Client::new();
    let id = c.create(color_form_session()).await;
    c.present(
        &id,
        json!({"features": {"color": [8.0, 0.0, 0.5, 1.5], "form": [3.0, 1.0]}}),
    )
    .await;
    let pending = c.inspect(&id).await.pending.unwrap();
    assert_eq!(pending.features["color"], vec![0.8, 0.0, 0.05, 0.15]);
    assert_eq!(pending.features["form"], vec![0.75, 0.25]);
}

#[tokio::test]
async fn contradictory_reward_splits_the_category() {
    let c = Client::new();
    let id = c.create(color_form_session()).await;
    let first = c.present(&id, green_apple()).await;
    c.reward(&id, "positive").await;
    let again = c.present(&id, green_apple()).await;
    assert_eq!(again.category_id, first.category_id);
    assert_eq!(again.chosen_action, first.chosen_action);
    let r = c.reward(&id, "negative").await;
    assert_eq!(r.splits.len(), 1);
    assert_eq!(r.splits[0].from, first.category_id);
    assert!(matches!(r.outcome, RewardOutcome::Split(_)));
    assert_eq!(c.inspect(&id).await.graph.categories.len(), 2);
}

#[tokio::test]
async fn api_event_log_matches_direct_agent() {
    let params = Parameters {
        theta_mc: 3.0 / 7.0,
        delta_aw: 0.5,
        ..Parameters::default()
    };
    let c = Client::new();
    let id = c
        .create(json!({"scenario": "example", "parameters": params, "seed": 11}))
        .await;
    let mut direct = Agent::new(KnowledgeGraph::new(example_schema(), example_actions(), params, 11).unwrap());

    for step in 0..60u64 {
        let kind = ObjectKind::ALL[(step * 5 % 6) as usize];
        let variant = if step % 3 == 0 { Variant::Noisy } else { Variant::Exact };
        let seed = step * 17;
        let percept_id = format!("{}-{step}", kind.name());

        let body = json!({"perceptId": percept_id, "object": kind, "variant": variant, "seed": seed});
        let api = c.present(&id, body).await;
        let own = direct
            .present(percept_id, example_percept(kind, variant, seed))
            .unwrap();
        assert_eq!(api.category_id, own.category_id);
        assert_eq!(api.is_new, own.is_new);
        assert_eq!(api.chosen_action, own.chosen_action);
        let sims: Vec<_> = api.similarities.iter().map(|s| (s.category_id, s.value)).collect();
        assert_eq!(sims, own.similarities);

        let reward = example_oracle(kind, &api.chosen_action).unwrap();
        let a = c.reward(&id, reward.as_str()).await;
        let d = direct.reward(reward).unwrap();
        assert_eq!(a.event, d.event);
        assert_eq!(a.outcome, d.outcome);
        assert_eq!(a.adaptations, d.adaptations);
    }

    let (status, body) = c.raw(Method::GET, &format!("/sessions/{id}/events"), None).await;
    assert_eq!(status, StatusCode::OK);
    let mut expected = Vec::new();
    write_event_log(&mut expected, direct.history()).unwrap();
    assert_eq!(body, expected);

    let snapshot = c.inspect(&id).await;
    assert_eq!(snapshot.history.len(), 60);
    assert_eq!(KnowledgeGraph::from_document(snapshot.graph).unwrap(), *direct.graph());
}

#[tokio::test]
async fn events_since_filters_by_step() {
    let c = Client::new();
    let id = c.create(color_form_session()).await;
    for _ in 0..4 {
        c.present(&id, green_apple()).await;
        c.reward(&id, "neutral").await;
    }
    let (status, body) = c
        .raw(Method::GET, &format!("/sessions/{id}/events?since=2"), None)
        .await;
    assert_eq!(status, StatusCode::OK);
    let steps: Vec<u64> = String::from_utf8(body)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["step"].as_u64().unwrap())
        .collect();
    assert_eq!(steps, vec![3, 4]);
    let (_, body) = c
        .raw(Method::GET, &format!("/sessions/{id}/events?since=9"), None)
        .await;
    assert!(body.is_empty());
    let (status, _) = c
        .error(Method::GET, &format!("/sessions/{id}/events?since=x"), None)
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let c = Client::new();
    let a = c.create(color_form_session()).await;
    let b = c.create(color_form_session()).await;
    c.present(&b, green_apple()).await;
    c.reward(&b, "positive").await;
    let before = c.inspect(&b).await;

    c.present(&a, green_apple()).await;
    c.reward(&a, "negative").await;
    c.present(
        &a,
        json!({"features": {"color": [1.0, 0.0, 0.0, 0.0], "form": [1.0, 0.0]}}),
    )
    .await;

    let after = c.inspect(&b).await;
    assert_eq!(before, after);
    assert_eq!(c.inspect(&a).await.history.len(), 1);
}

#[test]
fn concurrent_sessions_match_sequential_runs() {
    let state = Arc::new(AppState::new());
    let schema = example_schema();
    let handles: Vec<_> = (0..4u64)
        .map(|seed| {
            let state = Arc::clone(&state);
            std::thread::spawn(move || {
                let id = state
                    .create(CreateSessionRequest {
                        scenario: Some(ScenarioKind::Example),
                        seed,
                        ..CreateSessionRequest::default()
                    })
                    .unwrap()
                    .session_id;
                for step in 0..40u64 {
                    let kind = ObjectKind::ALL[((step + seed) % 6) as usize];
                    let req = PresentRequest {
                        object: Some(kind),
                        ..PresentRequest::default()
                    };
                    let p = state.present(&id, req).unwrap();
                    let reward = example_oracle(kind, &p.chosen_action).unwrap();
                    state.reward(&id, RewardRequest { reward }).unwrap();
                }
                (seed, id)
            })
        })
        .collect();
    for h in handles {
        let (seed, id) = h.join().unwrap();
        let mut direct =
            Agent::new(KnowledgeGraph::new(schema.clone(), example_actions(), Parameters::default(), seed).unwrap());
        for step in 0..40u64 {
            let kind = ObjectKind::ALL[((step + seed) % 6) as usize];
            let p = direct
                .present(format!("p{}", step + 1), example_percept(kind, Variant::Exact, 0))
                .unwrap();
            direct.reward(example_oracle(kind, &p.chosen_action).unwrap()).unwrap();
        }
        assert_eq!(state.inspect(&id).unwrap().history, direct.history());
    }
}

#[tokio::test]
async fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.json");
    let c = Client::new();
    let a = c.create(color_form_session()).await;
    c.present(&a, green_apple()).await;
    c.reward(&a, "positive").await;
    c.present(
        &a,
        json!({"features": {"color": [0.0, 0.0, 0.0, 1.0], "form": [1.0, 0.0]}}),
    )
    .await;
    c.reward(&a, "negative").await;

    let saved: SaveResponse = c
        .ok(Method::POST, &format!("/sessions/{a}/save"), json!({"path": path}))
        .await;
    assert_eq!(KnowledgeGraph::load(&path).unwrap().to_document(), saved.graph);

    let b = c.create(color_form_session()).await;
    let loaded: InspectResponse = c
        .ok(Method::POST, &format!("/sessions/{b}/load"), json!({"path": path}))
        .await;
    assert_eq!(loaded.graph, saved.graph);
    assert!(loaded.history.is_empty());

    // the loaded graph continues exactly like the original
    let next = json!({"features": {"color": [1.0, 0.0, 0.0, 0.0], "form": [0.0, 1.0]}});
    let pa = c.present(&a, next.clone()).await;
    let pb = c.present(&b, next).await;
    assert_eq!(pa.category_id, pb.category_id);
    assert_eq!(pa.chosen_action, pb.chosen_action);

    // pending interaction blocks a load
    let (status, _) = c
        .error(
            Method::POST,
            &format!("/sessions/{b}/load"),
            Some(json!({"graph": saved.graph})),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    c.reward(&b, "neutral").await;
    let inline: InspectResponse = c
        .ok(
            Method::POST,
            &format!("/sessions/{b}/load"),
            json!({"graph": saved.graph}),
        )
        .await;
    assert_eq!(inline.graph, saved.graph);

    let (status, e) = c
        .error(
            Method::POST,
            &format!("/sessions/{b}/load"),
            Some(json!({"path": dir.path().join("missing.json")})),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e.code, "io");
    let (status, _) = c
        .error(Method::POST, &format!("/sessions/{b}/load"), Some(json!({})))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn load_respects_scenario_binding() {
    let c = Client::new();
    let plain = c
        .create(json!({
            "featureSchema": [{"id": "size", "characteristics": ["small", "large"]}],
            "actionSet": ["keep"]
        }))
        .await;
    let saved: SaveResponse = c.ok(Method::POST, &format!("/sessions/{plain}/save"), json!({})).await;
    assert!(saved.path.is_none());
    let bound = c.create(json!({"scenario": "example"})).await;
    let (status, _) = c
        .error(
            Method::POST,
            &format!("/sessions/{bound}/load"),
            Some(json!({"graph": saved.graph})),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn wcst_sessions_take_cards() {
    let c = Client::new();
    let created: CreateSessionResponse = c
        .ok(Method::POST, "/sessions", json!({"scenario": "wcst", "seed": 2}))
        .await;
    assert_eq!(created.action_set, vec!["pile1", "pile2", "pile3", "pile4"]);
    let id = created.session_id;
    let p = c
        .present(&id, json!({"card": {"color": 1, "form": 2, "number": 3}}))
        .await;
    assert!(p.is_new);
    c.reward(&id, "positive").await;
    let (status, _) = c
        .error(
            Method::POST,
            &format!("/sessions/{id}/present"),
            Some(json!({"card": {"color": 4, "form": 0, "number": 1}})),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c
        .error(
            Method::POST,
            &format!("/sessions/{id}/present"),
            Some(json!({"object": "greenApple"})),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn scenario_sessions_reject_mismatched_schema() {
    let c = Client::new();
    let (status, _) = c
        .error(
            Method::POST,
            "/sessions",
            Some(json!({"scenario": "example", "actionSet": ["a", "b"]})),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let schema = FeatureSchema::new(vec![
        FeatureDef::new("color", ["red", "green", "yellow", "brown"]),
        FeatureDef::new("form", ["rectangular", "circular"]),
    ])
    .unwrap();
    c.create(json!({"scenario": "example", "featureSchema": schema})).await;
}

#[tokio::test]
async fn similarity_matrix_is_symmetric_with_null_diagonal() {
    let c = Client::new();
    let id = c.create(json!({"scenario": "example", "parameters": {"rhoRa": 0.0, "deltaAw": 0.1, "thetaMc": 9.0, "thetaMf": 0.3}})).await;
    for kind in ["greenApple", "redApple", "yellowBlock"] {
        c.present(&id, json!({ "object": kind })).await;
        c.reward(&id, "neutral").await;
    }
    let m = c.inspect(&id).await.similarity_matrix;
    assert_eq!(m.ids.len(), 3);
    for j in 0..3 {
        assert!(m.values[j][j].is_none());
        for k in 0..3 {
            assert_eq!(m.values[j][k], m.values[k][j]);
        }
    }
}

#[tokio::test]
async fn static_directory_is_served_as_fallback() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>ui</h1>").unwrap();
    let app = router(&ServiceConfig {
        static_dir: Some(dir.path().to_path_buf()),
    });
    let res = app
        .oneshot(Request::builder().uri("/index.html").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let body = res.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&body[..], b"<h1>ui</h1>");
}
