//! Drives the HTTP API in process: upload sheets, read a feed, send a command.
//!
//! Pass `--serve` to listen on 127.0.0.1:8080 instead, preloaded with the
//! same corpus.

use std::sync::Arc;

use anyhow::Result;
use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use sheetstack::ingest::SheetFormat;
use sheetstack::service::{router, serve, Engine};
use sheetstack::synth::{retail_corpus, RetailOptions};
use tower::ServiceExt;

const BOUNDARY: &str = "example-boundary";

fn upload_request(name: &str, csv: &[u8]) -> Request<Body> {
    let mut body = format!(
        "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"{name}\"\r\n\r\n"
    )
    .into_bytes();
    body.extend_from_slice(csv);
    body.extend_from_slice(format!("\r\n--{BOUNDARY}--\r\n").as_bytes());
    Request::post("/reports/R1/sheets")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap()
}

async fn call(app: &axum::Router, req: Request<Body>) -> Result<(u16, String)> {
    let res = app.clone().oneshot(req).await?;
    let status = res.status().as_u16();
    let bytes = res.into_body().collect().await?.to_bytes();
    Ok((status, String::from_utf8(bytes.to_vec())?))
}

#[tokio::main]
async fn main() -> Result<()> {
    let engine = Arc::new(Engine::in_memory());
    let sheets = retail_corpus(RetailOptions::default());

    if std::env::args().any(|a| a == "--serve") {
        for s in &sheets {
            engine.upload("R1", &s.name, &s.csv, SheetFormat::Csv, None)?;
        }
        println!("listening on http://127.0.0.1:8080 (try GET /feeds/R1)");
        serve(engine, ([127, 0, 0, 1], 8080).into()).await?;
        return Ok(());
    }

    let app = router(engine);
    for s in &sheets {
        let (status, _) = call(&app, upload_request(&s.name, &s.csv)).await?;
        println!("POST /reports/R1/sheets {} -> {status}", s.name);
    }
    let (status, feed) = call(&app, Request::get("/feeds/R1").body(Body::empty())?).await?;
    println!("GET /feeds/R1 -> {status}, {} bytes", feed.len());

    let body = serde_json::json!({ "user": "ana", "text": "set window 4 for R1" }).to_string();
    let req = Request::post("/commands").header("content-type", "application/json").body(Body::from(body))?;
    let (status, outcome) = call(&app, req).await?;
    let outcome: serde_json::Value = serde_json::from_str(&outcome)?;
    println!("POST /commands -> {status}, window now {}", outcome["feed"]["window"]);
    Ok(())
}
