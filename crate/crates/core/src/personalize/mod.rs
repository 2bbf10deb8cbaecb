//! Per-user preferences driven by short English commands.

mod command;
mod config;

pub use command::{parse_command, Action, Command, ParseError, GRAMMAR_HELP, GRAMMAR_VERSION};
pub use config::{
    apply_command, filter_series, validate_user, ApplyError, ConfigDefaults, ConfigStore, ConfigStoreError,
    ConfigWarning, UserConfig, CONFIG_DIR, DEFAULT_SEED, DEFAULT_USER, DEFAULT_WINDOW,
};
