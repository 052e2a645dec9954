//! Replays the request/response examples in `PROTOCOL.md` against a fresh
//! demo service. Set `UPDATE_PROTOCOL=1` to rewrite the response blocks.

use std::path::{Path, PathBuf};

use axum::body::Body;
use axum::http::Request;
use facet_cli::service::{router, AppState};
use facet_cli::session::Session;
use facet_core::fixtures::demo_model;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn protocol_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../PROTOCOL.md")
}

pub struct Exchange {
    pub method: String,
    pub path: String,
    pub body: String,
    /// Line range of the response block's contents in the document.
    pub response_lines: std::ops::Range<usize>,
    pub status: Option<u16>,
    pub expected: String,
}

pub fn exchanges(doc: &str) -> Vec<Exchange> {
    let lines: Vec<&str> = doc.lines().collect();
    let block_end = |from: usize| {
        from + lines[from..]
            .iter()
            .position(|l| *l == "```")
            .expect("closed block")
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i] != "```request" {
            i += 1;
            continue;
        }
        let end = block_end(i + 1);
        let (method, path) = lines[i + 1].split_once(' ').expect("METHOD PATH");
        let body = lines[i + 2..end].join("\n");
        let open = end
            + 1
            + lines[end + 1..]
                .iter()
                .position(|l| !l.is_empty())
                .expect("response block");
        assert_eq!(
            lines[open],
            "```response",
            "request at line {} has no response block",
            i + 1
        );
        let close = block_end(open + 1);
        let content = &lines[open + 1..close];
        out.push(Exchange {
            method: method.to_owned(),
            path: path.to_owned(),
            body,
            response_lines: open + 1..close,
            status: content.first().and_then(|s| s.parse().ok()),
            expected: content
                .iter()
                .skip(1)
                .copied()
                .collect::<Vec<_>>()
                .join("\n"),
        });
        i = close + 1;
    }
    out
}

/// Sends one request and returns the status and body text.
pub async fn send(app: &axum::Router, method: &str, path: &str, body: &str) -> (u16, String) {
    let request = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn render(body: &str) -> String {
    match serde_json::from_str::<Value>(body) {
        Ok(v) => serde_json::to_string_pretty(&v).unwrap(),
        Err(_) => body.trim_end().to_owned(),
    }
}

fn same(expected: &str, actual: &str) -> bool {
    match (
        serde_json::from_str::<Value>(expected),
        serde_json::from_str::<Value>(actual),
    ) {
        (Ok(a), Ok(b)) => a == b,
        _ => expected.trim_end() == actual.trim_end(),
    }
}

/// Replays every exchange; returns one message per mismatch.
pub async fn replay() -> Vec<String> {
    let path = protocol_path();
    let doc = std::fs::read_to_string(&path).expect("PROTOCOL.md");
    let app = router(AppState::new(Session::new([demo_model()])));
    let mut failures = Vec::new();
    let mut blocks = Vec::new();
    for ex in exchanges(&doc) {
        let (status, body) = send(&app, &ex.method, &ex.path, &ex.body).await;
        if ex.status != Some(status) || !same(&ex.expected, &body) {
            failures.push(format!(
                "{} {}: expected {:?} {}\nactual {} {}",
                ex.method, ex.path, ex.status, ex.expected, status, body
            ));
        }
        blocks.push((ex.response_lines, format!("{status}\n{}", render(&body))));
    }
    if std::env::var_os("UPDATE_PROTOCOL").is_some() {
        std::fs::write(&path, splice(&doc, &blocks)).unwrap();
    }
    failures
}

/// Replaces each line range with its text; ranges are ordered and disjoint.
fn splice(doc: &str, blocks: &[(std::ops::Range<usize>, String)]) -> String {
    let lines: Vec<&str> = doc.lines().collect();
    let mut out = String::new();
    let mut at = 0;
    for (range, text) in blocks {
        for line in &lines[at..range.start] {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(text);
        out.push('\n');
        at = range.end;
    }
    for line in &lines[at..] {
        out.push_str(line);
        out.push('\n');
    }
    out
}
