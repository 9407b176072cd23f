mod common;

use common::json;
use ridgeview::geometry::parse_stl;
use ridgeview::linkage::{parse_log, replay, PlotId, SessionState};

#[test]
fn dataset_routes() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::app(dir.path());

    let r = app.handle_get("/datasets");
    assert_eq!(r.status, 200);
    assert_eq!(json(&r.body)["datasets"], serde_json::json!(["alpha", "beta"]));

    let meta = json(&app.handle_get("/datasets/alpha").body);
    assert_eq!(meta["n"], 90);
    assert_eq!(meta["d"], 10);
    assert_eq!(meta["plots"]["A"], "pressure_ratio");
    assert_eq!(meta["plots"]["B"], "efficiency");

    let plot = app.handle_get("/datasets/alpha/plots/efficiency");
    assert_eq!(plot.status, 200);
    assert!(plot.etag.is_some());
    let plot = json(&plot.body);
    let points = plot["points"].as_array().unwrap();
    assert_eq!(points.len(), 90);
    let table = &app.bundle("alpha").unwrap().table;
    let f = table.qoi_column("efficiency").unwrap();
    for (k, p) in points.iter().enumerate() {
        assert_eq!(p["i"], k);
        assert_eq!(p["f"].as_f64().unwrap(), f[k]);
        assert_eq!(p["y"].as_array().unwrap().len(), 2);
    }

    let sub = json(&app.handle_get("/datasets/alpha/subspace/pressure_ratio").body);
    assert_eq!(sub["m"], 1);
    assert_eq!(sub["W"].as_array().unwrap().len(), 10);

    assert_eq!(app.handle_get("/datasets/alpha/plots/thrust").status, 404);
    assert_eq!(app.handle_get("/datasets/gamma/plots/efficiency").status, 404);
    assert_eq!(app.handle_get("/datasets/alpha/geometry/x5").status, 400);
    assert_eq!(app.handle_get("/datasets/alpha/geometry/90").status, 404);
    assert_eq!(app.handle_get("/datasets/alpha/diff/-1").status, 400);
    assert_eq!(app.handle_get("/nowhere").status, 404);
    assert_eq!(app.handle_get("/session/nobody").status, 404);
}

#[test]
fn geometry_round_trips_through_the_wire() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::app(dir.path());
    let bundle = app.bundle("alpha").unwrap();

    let r = app.handle_get("/datasets/alpha/geometry/5");
    assert_eq!(r.status, 200);
    assert_eq!(r.content_type, "application/octet-stream");
    assert_eq!(parse_stl(&r.body).unwrap(), *bundle.geometry.design(5).unwrap());

    let nominal = app.handle_get("/datasets/alpha/geometry/nominal");
    assert_eq!(parse_stl(&nominal.body).unwrap(), **bundle.geometry.nominal());
    assert_eq!(app.handle_get("/datasets/alpha/geometry/context").status, 200);

    let diff = json(&app.handle_get("/datasets/alpha/diff/5").body);
    assert_eq!(diff["mode"], "vertexwise");
    let max = diff["max_displacement"].as_f64().unwrap();
    let mean = diff["mean_displacement"].as_f64().unwrap();
    assert!(0.0 <= mean && mean <= max);
    assert_eq!(diff["per_vertex"].as_array().unwrap().len(), bundle.geometry.nominal().vertices().len());
}

#[test]
fn gets_are_side_effect_free() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::app(dir.path());
    for path in [
        "/datasets",
        "/datasets/beta",
        "/datasets/beta/plots/pressure_ratio",
        "/datasets/beta/subspace/efficiency",
        "/datasets/beta/geometry/3",
        "/datasets/beta/diff/3",
    ] {
        let first = app.handle_get(path);
        let second = app.handle_get(path);
        assert_eq!(first, second, "{path}");
    }
    assert_eq!(app.handle_get("/session/s1").status, 404);
}

fn post(app: &ridgeview_service::App, sid: &str, body: serde_json::Value) -> (u16, serde_json::Value) {
    let r = app.handle_session_event(sid, body.to_string().as_bytes());
    (r.status, json(&r.body))
}

#[test]
fn select_point_is_one_to_one_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::app(dir.path());
    let (status, body) = post(&app, "s1", serde_json::json!({"op": "select_point", "args": {"plot": "A", "index": 5}}));
    assert_eq!(status, 200);
    assert_eq!(body["state"]["selected_index"], 5);
    let sel = &body["selection"];
    assert_eq!(sel["selected_index"], 5);
    assert_eq!(sel["geometry_key"], "design_0005.stl");
    assert_eq!(sel["plot_points"]["A"]["design_index"], 5);
    assert_eq!(sel["plot_points"]["B"]["design_index"], 5);
    assert_eq!(sel["plot_points"]["A"]["qoi"], "pressure_ratio");
    assert_eq!(sel["plot_points"]["B"]["qoi"], "efficiency");
    assert!(sel["diff_summary"]["max_displacement"].as_f64().unwrap() > 0.0);

    let (status, body) = post(&app, "s1", serde_json::json!({"op": "select_point", "args": {"plot": "B", "index": 7}}));
    assert_eq!(status, 200);
    assert_eq!(body["selection"]["plot_points"]["A"]["design_index"], 7);

    let (status, _) = post(&app, "s1", serde_json::json!({"op": "select_point", "args": {"plot": "A", "index": 999}}));
    assert_eq!(status, 409);
    assert_eq!(app.session("s1").unwrap().selected_index, Some(7));

    let state = json(&app.handle_get("/session/s1").body);
    assert_eq!(state["selected_index"], 7);
    assert_eq!(state["dataset_id"], "alpha");
}

#[test]
fn rotation_and_move_contract() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::app(dir.path());
    let (status, _) = post(&app, "s", serde_json::json!({"op": "rotate_plot", "args": {"plot": "A", "axis": "X", "direction": 1}}));
    assert_eq!(status, 409);
    let (status, _) = post(&app, "s", serde_json::json!({"op": "rotate_plot", "args": {"plot": "A", "axis": "X", "direction": 3}}));
    assert_eq!(status, 400);

    for plot in ["A", "B"] {
        let (status, _) = post(&app, "s", serde_json::json!({"op": "activate_selector", "args": {"plot": plot, "selector": "move"}}));
        assert_eq!(status, 200);
    }
    let before = app.session("s").unwrap();
    let pa = before.plot_poses[&PlotId::A].position;
    let pb = before.plot_poses[&PlotId::B].position;
    let target = [0.5, 1.25, -2.0];
    let (status, body) = post(&app, "s", serde_json::json!({"op": "move_plots", "args": {"plots": ["A", "B"], "target": target}}));
    assert_eq!(status, 200);
    assert!(body.get("selection").is_none());
    for (plot, old) in [("A", pa), ("B", pb)] {
        let got = &body["state"]["plot_poses"][plot]["position"];
        for k in 0..3 {
            let centre = (pa[k] + pb[k]) / 2.0;
            let want = old[k] + (target[k] - centre);
            assert!((got[k].as_f64().unwrap() - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn malformed_requests() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::app(dir.path());
    assert_eq!(app.handle_session_event("s", b"{not json").status, 400);
    assert_eq!(app.handle_session_event("s", br#"{"op": "fly"}"#).status, 400);
    assert_eq!(app.handle_session_event("s", br#"{"op": "select_point", "args": {"plot": "A"}}"#).status, 400);
    assert_eq!(app.handle_session_event("../etc", br#"{"op": "reset_session"}"#).status, 400);
    assert_eq!(app.handle_session_event("s", br#"{"op": "reset_session"}"#).status, 200);
}

#[test]
fn session_log_replays_to_the_same_state() {
    let dir = tempfile::tempdir().unwrap();
    let sessions = tempfile::tempdir().unwrap();
    let app = common::app(dir.path()).with_session_dir(sessions.path().to_path_buf());
    let events = [
        serde_json::json!({"op": "select_point", "args": {"plot": "A", "index": 3}}),
        serde_json::json!({"op": "activate_selector", "args": {"plot": "B", "selector": "rotate_y"}}),
        serde_json::json!({"op": "rotate_plot", "args": {"plot": "B", "axis": "Y", "direction": -1}}),
        serde_json::json!({"op": "rotate_plot", "args": {"plot": "A", "axis": "Y", "direction": -1}}),
        serde_json::json!({"op": "next_dataset"}),
        serde_json::json!({"op": "select_point", "args": {"plot": "B", "index": 79}}),
    ];
    for e in events {
        post(&app, "log-test", e);
    }
    let state = app.session("log-test").unwrap();
    assert_eq!(state.dataset_id, "beta");
    assert_eq!(state.history.len(), 5);
    let text = std::fs::read_to_string(sessions.path().join("log-test.jsonl")).unwrap();
    let records = parse_log(&text).unwrap();
    let replayed: SessionState = replay(records, &app, ridgeview::linkage::default_layout()).unwrap();
    assert_eq!(replayed, state);
}
