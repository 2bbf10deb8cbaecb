//! The engine behind the HTTP API and the CLI, plus the axum router.
//!
//! | Route | Purpose |
//! |---|---|
//! | `POST /reports/{type}/sheets` | multipart `file` (and optional `ts`, `format`); 201 with a [`PipelineRun`] |
//! | `GET /feeds/{type}?user=` | latest feed JSON |
//! | `POST /commands` | `{user, text}`; the applied config plus the refreshed feed |
//! | `GET /series/{key}?report=&user=` | points and stats of one series |
//! | `GET /reports` | known report types |
//! | `GET /schema/feed.schema.v1` | the feed JSON schema |

mod engine;
mod http;

pub use engine::{
    CommandOutcome, Engine, EngineOptions, PipelineRun, SeriesDetail, ServiceError, DEFAULT_MAX_UPLOAD_BYTES,
};
pub use http::{router, serve};
