#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::Value;
use signpipe_core::synth::{write_toy_dictionary, ToyConfig};
use signpipe_service::{AppState, ServiceConfig};

pub struct TestServer {
    pub base: String,
    pub state: AppState,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl TestServer {
    pub fn start(config: &ServiceConfig) -> Self {
        let state = AppState::from_config(config).expect("valid test config");
        Self::with_state(state)
    }

    pub fn with_state(state: AppState) -> Self {
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let served = state.clone();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .unwrap();
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                signpipe_service::serve(listener, served, async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv().unwrap();
        Self {
            base: format!("http://{addr}"),
            state,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::new_with_config(
        ureq::Agent::config_builder()
            .http_status_as_error(false)
            .proxy(None)
            .timeout_global(Some(Duration::from_secs(30)))
            .build(),
    )
}

pub struct Reply {
    pub status: u16,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.bytes)))
    }
}

fn finish(response: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Reply {
    let mut response = response.expect("request reached the server");
    let status = response.status().as_u16();
    let bytes = response.body_mut().with_config().limit(256 << 20).read_to_vec().unwrap();
    Reply { status, bytes }
}

pub fn get(url: &str) -> Reply {
    finish(agent().get(url).call())
}

pub fn post_json(url: &str, body: &str) -> Reply {
    finish(agent().post(url).header("content-type", "application/json").send(body))
}

pub fn post_bytes(url: &str, body: &[u8]) -> Reply {
    finish(agent().post(url).header("content-type", "application/octet-stream").send(body))
}

/// Parsed `(event, data)` pairs of a complete SSE response.
pub fn sse_events(text: &str) -> Vec<(String, Value)> {
    let mut events = Vec::new();
    for block in text.split("\n\n") {
        let mut name = None;
        let mut data = String::new();
        for line in block.lines() {
            if let Some(v) = line.strip_prefix("event:") {
                name = Some(v.trim().to_owned());
            } else if let Some(v) = line.strip_prefix("data:") {
                data.push_str(v.strip_prefix(' ').unwrap_or(v));
            }
        }
        if let Some(name) = name {
            events.push((name, serde_json::from_str(&data).unwrap()));
        }
    }
    events
}

pub fn stream(server: &TestServer, query: &[(&str, &str)]) -> Vec<(String, Value)> {
    let mut request = agent().get(&server.url("/api/stream/spoken-to-signed"));
    for (k, v) in query {
        request = request.query(*k, *v);
    }
    let reply = finish(request.call());
    assert_eq!(reply.status, 200);
    sse_events(&String::from_utf8(reply.bytes).unwrap())
}

/// Writes the toy dictionary under `dir` and returns its manifest path.
pub fn toy_manifest(dir: &Path, config: &ToyConfig) -> PathBuf {
    write_toy_dictionary(dir, config).unwrap()
}

pub fn toy_config(manifest: &Path, offline: bool) -> ServiceConfig {
    let mut config: ServiceConfig = serde_json::from_value(serde_json::json!({
        "dictionaries": [
            {"spoken_lang": "en", "signed_lang": "asl", "path": manifest},
            {"spoken_lang": "de", "signed_lang": "asl", "path": manifest},
        ],
        "offline": offline,
    }))
    .unwrap();
    config.server.port = 0;
    config
}

/// Response body without the timing field.
pub fn without_timings(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("timings");
    }
    v
}
