use std::collections::{BTreeMap, HashMap};
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use ridgeview::geometry::{serialize_stl, DiffSummary, StlFormat};
use ridgeview::linkage::{
    default_layout, selection_result, to_log_line, DesignIndex, Event, LinkedViews, LogRecord, PlotId, PlotPoint,
    PlotPose, SelectionResult, SessionState,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bundle::DatasetBundle;

pub const JSON: &str = "application/json";
pub const STL: &str = "application/octet-stream";

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
    /// Content hash for cacheable bundle resources.
    pub etag: Option<String>,
}

impl Response {
    fn json(status: u16, body: Vec<u8>) -> Self {
        Self {
            status,
            content_type: JSON,
            body,
            etag: None,
        }
    }

    fn error(status: u16, message: impl Into<String>) -> Self {
        #[derive(Serialize)]
        struct Body {
            error: String,
        }
        let body = serde_json::to_vec(&Body { error: message.into() }).expect("error body serializes");
        Self::json(status, body)
    }

    fn cacheable(mut self) -> Self {
        self.etag = Some(format!("\"{}\"", hex::encode(Sha256::digest(&self.body))));
        self
    }

    pub fn body_str(&self) -> &str {
        std::str::from_utf8(&self.body).unwrap_or("<binary>")
    }
}

/// Service state: immutable dataset bundles plus mutable sessions.
pub struct App {
    bundles: BTreeMap<String, Arc<DatasetBundle>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionState>>>>,
    session_dir: Option<PathBuf>,
    layout: BTreeMap<PlotId, PlotPose>,
    clock: Box<dyn Fn() -> String + Send + Sync>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl App {
    pub fn new(bundles: Vec<DatasetBundle>) -> Self {
        Self {
            bundles: bundles.into_iter().map(|b| (b.id.clone(), Arc::new(b))).collect(),
            sessions: Mutex::new(HashMap::new()),
            session_dir: None,
            layout: default_layout(),
            clock: Box::new(now),
        }
    }

    /// Append every accepted event to `<dir>/<sid>.jsonl`.
    pub fn with_session_dir(mut self, dir: PathBuf) -> Self {
        self.session_dir = Some(dir);
        self
    }

    pub fn with_layout(mut self, layout: BTreeMap<PlotId, PlotPose>) -> Self {
        self.layout = layout;
        self
    }

    pub fn with_clock(mut self, clock: impl Fn() -> String + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn bundle(&self, id: &str) -> Option<&Arc<DatasetBundle>> {
        self.bundles.get(id)
    }

    pub fn session(&self, sid: &str) -> Option<SessionState> {
        let sessions = self.sessions.lock().expect("session map poisoned");
        let session = sessions.get(sid)?.clone();
        drop(sessions);
        let state = session.lock().expect("session poisoned").clone();
        Some(state)
    }

    /// `GET` dispatcher. Never mutates anything.
    pub fn handle_get(&self, path: &str) -> Response {
        let path = path.split(['?', '#']).next().unwrap_or_default();
        let segments: Vec<&str> = path.trim_matches('/').split('/').collect();
        match segments.as_slice() {
            ["datasets"] => {
                #[derive(Serialize)]
                struct Ids<'a> {
                    datasets: Vec<&'a str>,
                }
                let ids = Ids {
                    datasets: self.bundles.keys().map(String::as_str).collect(),
                };
                Response::json(200, serde_json::to_vec(&ids).expect("ids serialize")).cacheable()
            }
            ["datasets", id, rest @ ..] => match self.bundles.get(*id) {
                Some(bundle) => dataset_get(bundle, rest),
                None => Response::error(404, format!("unknown dataset `{id}`")),
            },
            ["session", sid] => match self.session(sid) {
                Some(state) => Response::json(200, serde_json::to_vec(&state).expect("state serializes")),
                None => Response::error(404, format!("unknown session `{sid}`")),
            },
            _ => Response::error(404, format!("no route for `{path}`")),
        }
    }

    /// Apply one `{"op": ..., "args": ...}` event to session `sid`, creating
    /// the session on the first dataset if it does not exist yet.
    pub fn handle_session_event(&self, sid: &str, body: &[u8]) -> Response {
        if !valid_sid(sid) {
            return Response::error(400, "session ids are 1-64 characters of [A-Za-z0-9_-]");
        }
        let value: serde_json::Value = match serde_json::from_slice(body) {
            Ok(v) => v,
            Err(e) => return Response::error(400, format!("malformed JSON: {e}")),
        };
        let event = match Event::from_json(value) {
            Ok(e) => e,
            Err(e) => return Response::error(400, format!("malformed event: {e}")),
        };
        let session = {
            let mut sessions = self.sessions.lock().expect("session map poisoned");
            match sessions.get(sid) {
                Some(s) => Arc::clone(s),
                None => match SessionState::initial(self, self.layout.clone()) {
                    Ok(state) => {
                        let s = Arc::new(Mutex::new(state));
                        sessions.insert(sid.to_string(), Arc::clone(&s));
                        s
                    }
                    Err(e) => return Response::error(409, e.to_string()),
                },
            }
        };

        let mut state = session.lock().expect("session poisoned");
        let is_select = matches!(event, Event::SelectPoint { .. });
        let record = LogRecord {
            t: (self.clock)(),
            event,
        };
        let mut next = state.clone();
        if let Err(e) = next.apply(record.clone(), self) {
            let status = if e.is_malformed() { 400 } else { 409 };
            return Response::error(status, e.to_string());
        }
        let selection = if is_select {
            match selection_result(&next, self) {
                Ok(s) => s,
                Err(e) => return Response::error(409, e.to_string()),
            }
        } else {
            None
        };
        if let Err(e) = self.persist(sid, &record) {
            return Response::error(500, format!("cannot persist session log: {e}"));
        }
        *state = next;

        #[derive(Serialize)]
        struct Body<'a> {
            state: &'a SessionState,
            #[serde(skip_serializing_if = "Option::is_none")]
            selection: Option<SelectionResult>,
        }
        let body = Body {
            state: &state,
            selection,
        };
        Response::json(200, serde_json::to_vec(&body).expect("session response serializes"))
    }

    fn persist(&self, sid: &str, record: &LogRecord) -> std::io::Result<()> {
        let Some(dir) = &self.session_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)?;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(format!("{sid}.jsonl")))?;
        writeln!(file, "{}", to_log_line(record))
    }
}

fn valid_sid(sid: &str) -> bool {
    (1..=64).contains(&sid.len()) && sid.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn parse_index(raw: &str, bundle: &DatasetBundle) -> Result<usize, Response> {
    let index: usize = raw
        .parse()
        .map_err(|_| Response::error(400, format!("`{raw}` is not a design index")))?;
    if index >= bundle.len() {
        return Err(Response::error(
            404,
            format!("design index {index} is out of range for {} designs", bundle.len()),
        ));
    }
    Ok(index)
}

fn stl_response(mesh: &ridgeview::geometry::TriangleMesh) -> Response {
    Response {
        status: 200,
        content_type: STL,
        body: serialize_stl(mesh, StlFormat::Binary),
        etag: None,
    }
    .cacheable()
}

fn dataset_get(bundle: &DatasetBundle, rest: &[&str]) -> Response {
    let unknown_qoi = |q: &str| Response::error(404, format!("unknown qoi `{q}` in dataset `{}`", bundle.id));
    match rest {
        [] => Response::json(200, bundle.metadata_json()).cacheable(),
        ["plots", qoi] => match bundle.plot_json(qoi) {
            Some(body) => Response::json(200, body).cacheable(),
            None => unknown_qoi(qoi),
        },
        ["subspace", qoi] => match bundle.subspace_json(qoi) {
            Some(body) => Response::json(200, body).cacheable(),
            None => unknown_qoi(qoi),
        },
        ["geometry", "nominal"] => stl_response(bundle.geometry.nominal()),
        ["geometry", "context"] => match bundle.geometry.context() {
            Some(mesh) => stl_response(mesh),
            None => Response::error(404, format!("dataset `{}` has no context mesh", bundle.id)),
        },
        ["geometry", raw] => match parse_index(raw, bundle) {
            Ok(i) => match bundle.geometry.design(i) {
                Ok(mesh) => stl_response(&mesh),
                Err(e) => Response::error(500, e.to_string()),
            },
            Err(r) => r,
        },
        ["diff", raw] => match parse_index(raw, bundle) {
            Ok(i) => match bundle.geometry.diff(i) {
                Ok(diff) => Response::json(200, ridgeview::json::to_vec(&*diff).expect("diff serializes")).cacheable(),
                Err(e) => Response::error(500, e.to_string()),
            },
            Err(r) => r,
        },
        _ => Response::error(404, format!("no route under dataset `{}`", bundle.id)),
    }
}

impl DesignIndex for App {
    fn dataset_ids(&self) -> Vec<String> {
        self.bundles.keys().cloned().collect()
    }

    fn design_count(&self, dataset_id: &str) -> Option<usize> {
        self.bundles.get(dataset_id).map(|b| b.len())
    }
}

impl LinkedViews for App {
    fn plot_point(&self, dataset_id: &str, plot: PlotId, index: usize) -> Option<PlotPoint> {
        let bundle = self.bundles.get(dataset_id)?;
        let qoi = bundle.plot_qoi(plot);
        let p = bundle.analyses.get(qoi)?.plot.point(index)?;
        Some(PlotPoint {
            design_index: p.index,
            qoi: qoi.to_string(),
            y: p.y.clone(),
            f: p.f,
        })
    }

    fn geometry_key(&self, dataset_id: &str, index: usize) -> Option<String> {
        let bundle = self.bundles.get(dataset_id)?;
        bundle.geometry.key(index).ok().map(str::to_owned)
    }

    fn diff_summary(&self, dataset_id: &str, index: usize) -> Option<DiffSummary> {
        let bundle = self.bundles.get(dataset_id)?;
        bundle.geometry.diff(index).ok().map(|d| d.summary())
    }
}
