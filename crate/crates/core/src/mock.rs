//! In-process HTTP server speaking the `/ground` and `/nli` wire contracts.
//!
//! Used by the test suites and for wiring checks against the remote
//! providers without a real model behind them.

use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::{json, Value};

/// What the mock sends back for one request.
#[derive(Debug, Clone)]
pub enum MockReply {
    Json(Value),
    Raw { status: u16, body: String },
    Delayed(Duration, Box<MockReply>),
}

pub type Handler = Arc<dyn Fn(&str, &Value) -> MockReply + Send + Sync>;

pub struct MockServer {
    server: Arc<tiny_http::Server>,
    url: String,
    hits: Arc<AtomicUsize>,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Binds an ephemeral localhost port; `handler` receives the request
    /// path and the parsed JSON body (`Null` when the body is not JSON).
    pub fn start(handler: Handler) -> io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(io::Error::other)?;
        let server = Arc::new(server);
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("mock server has no IP address"))?;
        let hits = Arc::new(AtomicUsize::new(0));
        let worker = {
            let server = Arc::clone(&server);
            let hits = Arc::clone(&hits);
            std::thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    hits.fetch_add(1, Ordering::SeqCst);
                    let handler = Arc::clone(&handler);
                    std::thread::spawn(move || {
                        let mut body = String::new();
                        let _ = request.as_reader().read_to_string(&mut body);
                        let parsed = serde_json::from_str(&body).unwrap_or(Value::Null);
                        let path = request.url().to_string();
                        let reply = handler(&path, &parsed);
                        let _ = request.respond(render(reply));
                    });
                }
            })
        };
        Ok(Self {
            server,
            url: format!("http://{addr}"),
            hits,
            worker: Some(worker),
        })
    }

    /// Grounding endpoint: `f(image_ref, statement)` gives the reply body.
    pub fn grounding<F>(f: F) -> io::Result<Self>
    where
        F: Fn(&str, &str) -> MockReply + Send + Sync + 'static,
    {
        Self::start(Arc::new(move |path, body| {
            if path != "/ground" {
                return not_found(path);
            }
            match (body["image_ref"].as_str(), body["statement"].as_str()) {
                (Some(img), Some(stmt)) => f(img, stmt),
                _ => bad_request("expected {\"image_ref\", \"statement\"}"),
            }
        }))
    }

    /// NLI endpoint: `f(premise, hypothesis)` gives the label.
    pub fn nli<F>(f: F) -> io::Result<Self>
    where
        F: Fn(&str, &str) -> MockReply + Send + Sync + 'static,
    {
        Self::start(Arc::new(move |path, body| {
            if path != "/nli" {
                return not_found(path);
            }
            match (body["premise"].as_str(), body["hypothesis"].as_str()) {
                (Some(p), Some(h)) => f(p, h),
                _ => bad_request("expected {\"premise\", \"hypothesis\"}"),
            }
        }))
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Requests received so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

pub fn verdict_reply(verdict: &str) -> MockReply {
    MockReply::Json(json!({ "verdict": verdict }))
}

pub fn score_reply(score: f64) -> MockReply {
    MockReply::Json(json!({ "score": score }))
}

pub fn label_reply(label: &str) -> MockReply {
    MockReply::Json(json!({ "label": label }))
}

fn not_found(path: &str) -> MockReply {
    MockReply::Raw {
        status: 404,
        body: format!("no route for {path}"),
    }
}

fn bad_request(msg: &str) -> MockReply {
    MockReply::Raw {
        status: 400,
        body: msg.to_string(),
    }
}

fn render(reply: MockReply) -> tiny_http::Response<io::Cursor<Vec<u8>>> {
    match reply {
        MockReply::Json(v) => {
            let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
                .expect("static header");
            tiny_http::Response::from_string(v.to_string()).with_header(header)
        }
        MockReply::Raw { status, body } => {
            tiny_http::Response::from_string(body).with_status_code(status)
        }
        MockReply::Delayed(d, inner) => {
            std::thread::sleep(d);
            render(*inner)
        }
    }
}
