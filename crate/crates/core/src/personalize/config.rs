use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::command::{Action, Command};
use crate::ingest::{validate_report_type, write_atomic, WindowSize};
use crate::timeseries::{Group, SeriesMap};

pub const CONFIG_DIR: &str = "_configs";
pub const DEFAULT_USER: &str = "default";
pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDefaults {
    pub window_size: WindowSize,
    pub normalize: bool,
    pub rng_seed: u64,
}

impl Default for ConfigDefaults {
    fn default() -> Self {
        ConfigDefaults {
            window_size: WindowSize::Latest(DEFAULT_WINDOW),
            normalize: false,
            rng_seed: DEFAULT_SEED,
        }
    }
}

/// Preferences of one user for one report type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserConfig {
    pub user: String,
    pub report_type: String,
    /// `None` keeps every attribute.
    pub attribute_allowlist: Option<BTreeSet<String>>,
    /// Attributes ignored while no allowlist is set.
    #[serde(default)]
    pub attribute_denylist: BTreeSet<String>,
    /// Allowed combos, members sorted. `None` keeps every combo.
    pub combo_allowlist: Option<BTreeSet<Vec<String>>>,
    pub window_size: WindowSize,
    pub normalize: bool,
    pub rng_seed: u64,
}

impl UserConfig {
    pub fn defaults(user: &str, report_type: &str, defaults: &ConfigDefaults) -> Self {
        UserConfig {
            user: user.to_string(),
            report_type: report_type.to_string(),
            attribute_allowlist: None,
            attribute_denylist: BTreeSet::new(),
            combo_allowlist: None,
            window_size: defaults.window_size,
            normalize: defaults.normalize,
            rng_seed: defaults.rng_seed,
        }
    }

    pub fn attribute_allowed(&self, name: &str) -> bool {
        self.attribute_allowlist.as_ref().is_none_or(|a| a.contains(name)) && !self.attribute_denylist.contains(name)
    }

    fn combo_allowed(&self, members: &[String]) -> bool {
        if !members.iter().all(|m| self.attribute_allowed(m)) {
            return false;
        }
        let Some(allowed) = &self.combo_allowlist else { return true };
        let mut sorted = members.to_vec();
        sorted.sort();
        allowed.contains(&sorted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ConfigWarning {
    /// Stored anyway: the column may appear in a later sheet.
    UnknownAttribute { name: String },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ApplyError {
    #[error("command targets report type {command:?} but the config belongs to {config:?}")]
    ScopeMismatch { command: String, config: String },
}

/// Pure state transition. `known_attributes` are the column names seen in the
/// current window and only drive warnings.
pub fn apply_command(
    config: &UserConfig,
    cmd: &Command,
    defaults: &ConfigDefaults,
    known_attributes: &BTreeSet<String>,
) -> Result<(UserConfig, Vec<ConfigWarning>), ApplyError> {
    if cmd.report_type != config.report_type {
        return Err(ApplyError::ScopeMismatch {
            command: cmd.report_type.clone(),
            config: config.report_type.clone(),
        });
    }
    let mut next = config.clone();
    let mut mentioned: Vec<&String> = Vec::new();
    match &cmd.action {
        Action::Use { attributes } => {
            next.attribute_allowlist = Some(attributes.iter().cloned().collect());
            next.attribute_denylist.clear();
            mentioned.extend(attributes);
        }
        Action::UseCombinations { combos } => {
            let set = combos
                .iter()
                .map(|c| {
                    let mut members = c.clone();
                    members.sort();
                    members.dedup();
                    members
                })
                .collect();
            next.combo_allowlist = Some(set);
            mentioned.extend(combos.iter().flatten());
        }
        Action::Ignore { attributes } => {
            match &mut next.attribute_allowlist {
                Some(allow) => {
                    for a in attributes {
                        allow.remove(a);
                    }
                }
                None => next.attribute_denylist.extend(attributes.iter().cloned()),
            }
            mentioned.extend(attributes);
        }
        Action::Window { size } => next.window_size = *size,
        Action::Normalize { on } => next.normalize = *on,
        Action::Reset => next = UserConfig::defaults(&config.user, &config.report_type, defaults),
        Action::Show => {}
    }
    let mut warnings = Vec::new();
    let mut seen = BTreeSet::new();
    for name in mentioned {
        if !known_attributes.contains(name) && seen.insert(name) {
            warnings.push(ConfigWarning::UnknownAttribute { name: name.clone() });
        }
    }
    Ok((next, warnings))
}

/// Keeps the series a config lets through. Rank series follow their base
/// numeric attribute; a CTS series needs every combo member allowed.
pub fn filter_series(population: &SeriesMap, config: &UserConfig) -> SeriesMap {
    population
        .iter()
        .filter(|(id, s)| match id.group {
            Group::Nts | Group::Rts => s.base.iter().all(|b| config.attribute_allowed(b)),
            Group::Cts => config.combo_allowed(&s.base),
        })
        .map(|(id, s)| (id.clone(), s.clone()))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigStoreError {
    #[error("invalid user id {0:?}: use letters, digits, '-', '_' or '.', not starting with '_' or '.'")]
    InvalidUser(String),
    #[error("config storage error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt config file {path}: {source}")]
    Corrupt { path: PathBuf, source: serde_json::Error },
}

pub fn validate_user(user: &str) -> Result<(), ConfigStoreError> {
    validate_report_type(user).map_err(|_| ConfigStoreError::InvalidUser(user.to_string()))
}

/// Configs keyed by (report type, user), persisted as
/// `<root>/_configs/<report>/<user>.json`.
#[derive(Debug, Default)]
pub struct ConfigStore {
    root: Option<PathBuf>,
    configs: RwLock<BTreeMap<(String, String), UserConfig>>,
}

impl ConfigStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(data_root: &Path) -> Result<Self, ConfigStoreError> {
        let root = data_root.join(CONFIG_DIR);
        let mut configs = BTreeMap::new();
        if root.is_dir() {
            for report_dir in fs::read_dir(&root)? {
                let report_dir = report_dir?.path();
                if !report_dir.is_dir() {
                    continue;
                }
                for file in fs::read_dir(&report_dir)? {
                    let path = file?.path();
                    if path.extension().and_then(|e| e.to_str()) != Some("json") {
                        continue;
                    }
                    let text = fs::read_to_string(&path)?;
                    let config: UserConfig = serde_json::from_str(&text)
                        .map_err(|source| ConfigStoreError::Corrupt { path: path.clone(), source })?;
                    configs.insert((config.report_type.clone(), config.user.clone()), config);
                }
            }
        }
        Ok(ConfigStore {
            root: Some(root),
            configs: RwLock::new(configs),
        })
    }

    pub fn get(&self, report_type: &str, user: &str) -> Option<UserConfig> {
        self.configs
            .read()
            .get(&(report_type.to_string(), user.to_string()))
            .cloned()
    }

    pub fn put(&self, config: UserConfig) -> Result<(), ConfigStoreError> {
        validate_user(&config.user)?;
        let mut configs = self.configs.write();
        if let Some(root) = &self.root {
            let dir = root.join(&config.report_type);
            fs::create_dir_all(&dir)?;
            let json = serde_json::to_vec_pretty(&config).expect("config serializes");
            write_atomic(&dir.join(format!("{}.json", config.user)), &json)?;
        }
        configs.insert((config.report_type.clone(), config.user.clone()), config);
        Ok(())
    }

    /// Users with a stored config for `report_type`, sorted.
    pub fn users(&self, report_type: &str) -> Vec<String> {
        self.configs
            .read()
            .keys()
            .filter(|(r, _)| r == report_type)
            .map(|(_, u)| u.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::personalize::parse_command;
    use crate::timeseries::{SeriesId, TimeSeries};

    fn cfg() -> UserConfig {
        UserConfig::defaults("u1", "R1", &ConfigDefaults::default())
    }

    fn apply(config: &UserConfig, text: &str) -> UserConfig {
        let known = BTreeSet::from(["Sales".to_string(), "Cost".to_string()]);
        apply_command(config, &parse_command(text).unwrap(), &ConfigDefaults::default(), &known)
            .unwrap()
            .0
    }

    fn series(group: Group, attribute: &str, base: &[&str]) -> (SeriesId, TimeSeries) {
        let id = SeriesId {
            group,
            entity: vec!["P1".into()],
            attribute: attribute.into(),
        };
        let s = TimeSeries {
            id: id.clone(),
            base: base.iter().map(|b| b.to_string()).collect(),
            points: vec![],
        };
        (id, s)
    }

    #[test]
    fn use_then_ignore() {
        let c = apply(&cfg(), "use attributes Sales, Cost for R1");
        let c = apply(&c, "ignore attribute Cost for R1");
        assert_eq!(c.attribute_allowlist, Some(BTreeSet::from(["Sales".to_string()])));
    }

    #[test]
    fn unknown_attribute_warns() {
        let (c, w) = apply_command(
            &cfg(),
            &parse_command("use attributes Refunds for R1").unwrap(),
            &ConfigDefaults::default(),
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(c.attribute_allowlist.unwrap().len(), 1);
        assert_eq!(w, vec![ConfigWarning::UnknownAttribute { name: "Refunds".into() }]);
    }

    #[test]
    fn scope_mismatch() {
        let cmd = parse_command("show insights for R2").unwrap();
        assert!(apply_command(&cfg(), &cmd, &ConfigDefaults::default(), &BTreeSet::new()).is_err());
    }

    #[test]
    fn filter_by_attribute_and_combo() {
        let pop: SeriesMap = [
            series(Group::Nts, "Sales", &["Sales"]),
            series(Group::Rts, "Sales-rank", &["Sales"]),
            series(Group::Nts, "Cost", &["Cost"]),
            series(Group::Cts, "Region", &["Region"]),
            series(Group::Cts, "Region+Status", &["Region", "Status"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(filter_series(&pop, &cfg()), pop);

        let mut c = cfg();
        c.attribute_allowlist = Some(BTreeSet::from(["Sales".to_string(), "Region".to_string()]));
        let kept: Vec<String> = filter_series(&pop, &c).keys().map(|k| k.attribute.clone()).collect();
        assert_eq!(kept, vec!["Sales", "Sales-rank", "Region"]);

        c.attribute_allowlist = Some(BTreeSet::new());
        assert!(filter_series(&pop, &c).is_empty());
    }

    #[test]
    fn ignore_without_allowlist_denies() {
        let c = apply(&cfg(), "ignore attribute Cost for R1");
        assert!(!c.attribute_allowed("Cost"));
        assert!(c.attribute_allowed("Sales"));
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = ConfigStore::open(dir.path()).unwrap();
        let c = apply(&cfg(), "set window 5 for R1");
        store.put(c.clone()).unwrap();
        let reopened = ConfigStore::open(dir.path()).unwrap();
        assert_eq!(reopened.get("R1", "u1"), Some(c));
        assert_eq!(reopened.users("R1"), vec!["u1"]);
    }
}
