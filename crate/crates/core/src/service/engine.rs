use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::analytics::{dump_stats, SeriesStats};
use crate::ingest::{IngestError, SheetFormat, SnapshotStore, WindowSize};
use crate::insights::FeedWindow;
use crate::personalize::{
    apply_command, parse_command, validate_user, ApplyError, Command, ConfigDefaults, ConfigStore, ConfigStoreError,
    ConfigWarning, ParseError, UserConfig, DEFAULT_USER,
};
use crate::pipeline::{analyze_window, generate_feed, AnalysisOptions, ScoredWindow};
use crate::timeseries::{dump_series, Group, SeriesId, TimeSeries};

pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// `None` keeps everything in memory.
    pub data_root: Option<PathBuf>,
    pub defaults: ConfigDefaults,
    pub analysis: AnalysisOptions,
    pub max_upload_bytes: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            data_root: None,
            defaults: ConfigDefaults::default(),
            analysis: AnalysisOptions::default(),
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error(transparent)]
    Config(#[from] ConfigStoreError),
    #[error("unknown series {0:?}")]
    UnknownSeries(String),
}

/// Summary of the recompute triggered by one accepted snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub report_type: String,
    pub snapshot_ts: i64,
    pub snapshot_ordinal: usize,
    pub window: FeedWindow,
    pub series_counts: BTreeMap<Group, usize>,
    pub duration_ms: u64,
    /// Users whose feed was regenerated, `default` first.
    pub feeds: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct CommandOutcome {
    pub user: String,
    pub command: Command,
    pub config: UserConfig,
    pub warnings: Vec<ConfigWarning>,
    /// The refreshed feed, byte-identical to a later feed request.
    pub feed: Box<RawValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDetail {
    pub report_type: String,
    pub series_key: String,
    pub series: TimeSeries,
    pub stats: SeriesStats,
}

type ScoreKey = (String, WindowSize, bool);
type FeedKey = (String, String);

/// Shared state behind the HTTP routes and the CLI.
///
/// Scored windows are cached per (report, window, normalize) and reused by
/// every user with that combination; feeds are cached per (report, user) as
/// immutable JSON strings. Uploads and commands are serialized.
pub struct Engine {
    options: EngineOptions,
    store: SnapshotStore,
    configs: ConfigStore,
    scored: RwLock<HashMap<ScoreKey, Arc<ScoredWindow>>>,
    feeds: RwLock<HashMap<FeedKey, Arc<str>>>,
    writer: Mutex<()>,
}

impl Engine {
    pub fn open(options: EngineOptions) -> Result<Self, ServiceError> {
        let (store, configs) = match &options.data_root {
            Some(root) => (SnapshotStore::open(root)?, ConfigStore::open(root)?),
            None => (SnapshotStore::in_memory(), ConfigStore::in_memory()),
        };
        Ok(Engine {
            options,
            store,
            configs,
            scored: RwLock::default(),
            feeds: RwLock::default(),
            writer: Mutex::new(()),
        })
    }

    pub fn in_memory() -> Self {
        Self::open(EngineOptions::default()).expect("in-memory engine")
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn store(&self) -> &SnapshotStore {
        &self.store
    }

    pub fn report_types(&self) -> Vec<String> {
        self.store.report_types()
    }

    /// The stored config of `user`, or the defaults when there is none.
    pub fn config(&self, report_type: &str, user: &str) -> UserConfig {
        self.configs
            .get(report_type, user)
            .unwrap_or_else(|| UserConfig::defaults(user, report_type, &self.options.defaults))
    }

    fn scored(&self, report_type: &str, window: WindowSize, normalize: bool) -> Result<Arc<ScoredWindow>, ServiceError> {
        let key = (report_type.to_string(), window, normalize);
        if let Some(s) = self.scored.read().get(&key) {
            return Ok(Arc::clone(s));
        }
        let snapshots = self.store.active_window(report_type, window)?;
        let mut analysis = self.options.analysis.clone();
        analysis.fit.normalize = normalize;
        let scored = Arc::new(analyze_window(&snapshots, &analysis));
        self.scored.write().insert(key, Arc::clone(&scored));
        Ok(scored)
    }

    fn render(&self, config: &UserConfig) -> Result<Arc<str>, ServiceError> {
        let scored = self.scored(&config.report_type, config.window_size, config.normalize)?;
        let feed = generate_feed(&scored, &config.report_type, config, self.options.analysis.appendix_limit);
        let json: Arc<str> = feed.to_json().into();
        self.feeds
            .write()
            .insert((config.report_type.clone(), config.user.clone()), Arc::clone(&json));
        Ok(json)
    }

    fn invalidate(&self, report_type: &str) {
        self.scored.write().retain(|k, _| k.0 != report_type);
        self.feeds.write().retain(|k, _| k.0 != report_type);
    }

    /// Ingests one sheet and regenerates the default feed and every user feed
    /// of its report type.
    pub fn upload(
        &self,
        report_type: &str,
        source_name: &str,
        bytes: &[u8],
        format: SheetFormat,
        explicit_ts: Option<i64>,
    ) -> Result<PipelineRun, ServiceError> {
        let _guard = self.writer.lock();
        let started = Instant::now();
        let snapshot = self
            .store
            .ingest_snapshot(report_type, source_name, bytes, format, explicit_ts)?;
        self.invalidate(report_type);

        let default = self.config(report_type, DEFAULT_USER);
        let scored = self.scored(report_type, default.window_size, default.normalize)?;
        let mut feeds = vec![DEFAULT_USER.to_string()];
        self.render(&default)?;
        for user in self.configs.users(report_type) {
            if user != DEFAULT_USER {
                self.render(&self.config(report_type, &user))?;
                feeds.push(user);
            }
        }
        let run = PipelineRun {
            report_type: report_type.to_string(),
            snapshot_ts: snapshot.timestamp,
            snapshot_ordinal: snapshot.ordinal,
            window: FeedWindow {
                from_ts: scored.window.from_ts(),
                to_ts: scored.window.to_ts(),
                count: scored.window.len(),
                ordinals: scored.window.ordinals.clone(),
            },
            series_counts: scored.series_counts(),
            duration_ms: started.elapsed().as_millis() as u64,
            feeds,
        };
        tracing::info!(report_type, ts = run.snapshot_ts, window = run.window.count, "pipeline run");
        Ok(run)
    }

    /// The latest feed of `user` (the default feed when `user` has no config).
    pub fn feed(&self, report_type: &str, user: Option<&str>) -> Result<Arc<str>, ServiceError> {
        if !self.store.contains(report_type) {
            return Err(IngestError::UnknownReportType(report_type.to_string()).into());
        }
        let user = user
            .filter(|u| self.configs.get(report_type, u).is_some())
            .unwrap_or(DEFAULT_USER);
        if let Some(feed) = self.feeds.read().get(&(report_type.to_string(), user.to_string())) {
            return Ok(Arc::clone(feed));
        }
        self.render(&self.config(report_type, user))
    }

    /// Parses and applies a command, persists the config and returns the
    /// user's refreshed feed.
    pub fn command(&self, user: &str, text: &str) -> Result<CommandOutcome, ServiceError> {
        validate_user(user)?;
        let command = parse_command(text)?;
        let report_type = command.report_type.as_str();
        if !self.store.contains(report_type) {
            return Err(IngestError::UnknownReportType(report_type.to_string()).into());
        }
        let _guard = self.writer.lock();
        let current = self.config(report_type, user);
        let known = self
            .scored(report_type, current.window_size, current.normalize)?
            .attributes
            .clone();
        let (config, warnings) = apply_command(&current, &command, &self.options.defaults, &known)?;
        self.configs.put(config.clone())?;
        let feed = self.render(&config)?;
        Ok(CommandOutcome {
            user: user.to_string(),
            command,
            config,
            warnings,
            feed: RawValue::from_string(feed.to_string()).expect("feed is valid JSON"),
        })
    }

    /// Points and stats of one series in the window `user` currently sees.
    /// Without `report_type` every report type is searched.
    pub fn series(&self, key: &str, report_type: Option<&str>, user: Option<&str>) -> Result<SeriesDetail, ServiceError> {
        let id = SeriesId::parse_key(key).ok_or_else(|| ServiceError::UnknownSeries(key.to_string()))?;
        let reports = match report_type {
            Some(r) => vec![r.to_string()],
            None => self.store.report_types(),
        };
        for report in reports {
            if !self.store.contains(&report) {
                continue;
            }
            let config = self.config(&report, user.unwrap_or(DEFAULT_USER));
            let scored = self.scored(&report, config.window_size, config.normalize)?;
            if let (Some(series), Some(stats)) = (scored.population.get(&id), scored.stats.get(&id)) {
                return Ok(SeriesDetail {
                    report_type: report,
                    series_key: id.key(),
                    series: series.clone(),
                    stats: stats.clone(),
                });
            }
        }
        Err(ServiceError::UnknownSeries(key.to_string()))
    }

    /// Tab-separated stats of every series in `user`'s window.
    pub fn dump_stats(&self, report_type: &str, user: Option<&str>) -> Result<String, ServiceError> {
        let config = self.config(report_type, user.unwrap_or(DEFAULT_USER));
        Ok(dump_stats(&self.scored(report_type, config.window_size, config.normalize)?.stats))
    }

    pub fn dump_series(&self, report_type: &str, user: Option<&str>) -> Result<String, ServiceError> {
        let config = self.config(report_type, user.unwrap_or(DEFAULT_USER));
        Ok(dump_series(&self.scored(report_type, config.window_size, config.normalize)?.population))
    }
}
