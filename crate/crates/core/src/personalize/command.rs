use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::{validate_report_type, WindowSize};

/// Version of the command grammar; bump when a form changes meaning.
pub const GRAMMAR_VERSION: u32 = 1;

pub const GRAMMAR_HELP: &str = "\
Commands (case-insensitive):
  use attributes <a>[, <b>...] for <report>
  use combinations <a>[+<b>][, ...] for <report>
  ignore attribute <a>[, <b>...] for <report>
  set window <n> for <report>          (n >= 2, or 'all')
  normalize on|off for <report>
  reset preferences for <report>
  show insights for <report>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verb", rename_all = "snake_case")]
pub enum Action {
    Use { attributes: Vec<String> },
    UseCombinations { combos: Vec<Vec<String>> },
    Ignore { attributes: Vec<String> },
    Window { size: WindowSize },
    Normalize { on: bool },
    Reset,
    Show,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Command {
    pub report_type: String,
    #[serde(flatten)]
    pub action: Action,
}

impl Command {
    pub fn verb(&self) -> &'static str {
        match self.action {
            Action::Use { .. } | Action::UseCombinations { .. } => "use",
            Action::Ignore { .. } => "ignore",
            Action::Window { .. } => "window",
            Action::Normalize { .. } => "normalize",
            Action::Reset => "reset",
            Action::Show => "show",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{message}")]
pub struct ParseError {
    pub message: String,
    /// Closest command form, when the first word resembles a verb.
    pub suggestion: Option<String>,
    pub help: String,
}

const REPORT: &str = r"\s+for\s+(\S+)\s*$";

fn form(body: &str) -> Regex {
    Regex::new(&format!(r"(?i)^\s*{body}{REPORT}")).expect("valid command regex")
}

static USE_ATTRS: LazyLock<Regex> = LazyLock::new(|| form(r"use\s+attributes?\s+(.+?)"));
static USE_COMBOS: LazyLock<Regex> = LazyLock::new(|| form(r"use\s+combinations?\s+(.+?)"));
static IGNORE: LazyLock<Regex> = LazyLock::new(|| form(r"ignore\s+attributes?\s+(.+?)"));
static WINDOW: LazyLock<Regex> = LazyLock::new(|| form(r"set\s+window\s+(\S+)"));
static NORMALIZE: LazyLock<Regex> = LazyLock::new(|| form(r"normalize\s+(on|off)"));
static RESET: LazyLock<Regex> = LazyLock::new(|| form(r"reset\s+preferences?"));
static SHOW: LazyLock<Regex> = LazyLock::new(|| form(r"show\s+insights?"));

const VERB_FORMS: [(&str, &str); 6] = [
    ("use", "use attributes <a>[, <b>...] for <report>"),
    ("ignore", "ignore attribute <a> for <report>"),
    ("set", "set window <n> for <report>"),
    ("normalize", "normalize on|off for <report>"),
    ("reset", "reset preferences for <report>"),
    ("show", "show insights for <report>"),
];

fn error(text: &str, message: impl Into<String>) -> ParseError {
    let first = text.split_whitespace().next().unwrap_or("").to_lowercase();
    let suggestion = VERB_FORMS
        .iter()
        .map(|(verb, form)| (strsim::normalized_levenshtein(&first, verb), *form))
        .filter(|(score, _)| *score >= 0.5)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, form)| form.to_string());
    ParseError {
        message: message.into(),
        suggestion,
        help: GRAMMAR_HELP.to_string(),
    }
}

fn name_list(text: &str, raw: &str) -> Result<Vec<String>, ParseError> {
    let names: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(error(text, "attribute list has an empty entry"));
    }
    Ok(names)
}

fn report(text: &str, raw: &str) -> Result<String, ParseError> {
    validate_report_type(raw).map_err(|e| error(text, e.to_string()))?;
    Ok(raw.to_string())
}

pub fn parse_command(text: &str) -> Result<Command, ParseError> {
    let command = |report_raw: &str, action| Ok(Command { report_type: report(text, report_raw)?, action });

    if let Some(c) = USE_COMBOS.captures(text) {
        let combos = name_list(text, &c[1])?
            .iter()
            .map(|combo| {
                let members: Vec<String> = combo.split('+').map(|m| m.trim().to_string()).collect();
                if members.iter().any(String::is_empty) {
                    Err(error(text, "combination has an empty member"))
                } else {
                    Ok(members)
                }
            })
            .collect::<Result<_, _>>()?;
        return command(&c[2], Action::UseCombinations { combos });
    }
    if let Some(c) = USE_ATTRS.captures(text) {
        return command(&c[2], Action::Use { attributes: name_list(text, &c[1])? });
    }
    if let Some(c) = IGNORE.captures(text) {
        return command(&c[2], Action::Ignore { attributes: name_list(text, &c[1])? });
    }
    if let Some(c) = WINDOW.captures(text) {
        let size = match c[1].to_lowercase().as_str() {
            "all" | "unbounded" => WindowSize::Unbounded,
            n => n
                .parse::<usize>()
                .ok()
                .and_then(WindowSize::latest)
                .ok_or_else(|| error(text, "window size must be a whole number of at least 2, or 'all'"))?,
        };
        return command(&c[2], Action::Window { size });
    }
    if let Some(c) = NORMALIZE.captures(text) {
        let on = c[1].eq_ignore_ascii_case("on");
        return command(&c[2], Action::Normalize { on });
    }
    if let Some(c) = RESET.captures(text) {
        return command(&c[1], Action::Reset);
    }
    if let Some(c) = SHOW.captures(text) {
        return command(&c[1], Action::Show);
    }
    Err(error(text, format!("unrecognized command: {:?}", text.trim())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn use_attributes() {
        let c = parse_command("use attributes Sales, Region for R1").unwrap();
        assert_eq!(c.report_type, "R1");
        assert_eq!(c.action, Action::Use { attributes: vec!["Sales".into(), "Region".into()] });
    }

    #[test]
    fn window_and_case() {
        let c = parse_command("SET Window 10 FOR R1").unwrap();
        assert_eq!(c.action, Action::Window { size: WindowSize::Latest(10) });
        assert!(parse_command("set window 1 for R1").is_err());
    }

    #[test]
    fn combinations() {
        let c = parse_command("use combinations Region+Status, Region for R1").unwrap();
        assert_eq!(
            c.action,
            Action::UseCombinations { combos: vec![vec!["Region".into(), "Status".into()], vec!["Region".into()]] }
        );
    }

    #[test]
    fn gibberish_has_help() {
        let e = parse_command("make it nicer").unwrap_err();
        assert!(e.help.contains("set window"));
        assert_eq!(e.suggestion, None);
        let e = parse_command("normalise on for R1").unwrap_err();
        assert_eq!(e.suggestion.as_deref(), Some("normalize on|off for <report>"));
    }

    #[test]
    fn attribute_names_may_contain_for() {
        let c = parse_command("use attributes Cost for Sale for R1").unwrap();
        assert_eq!(c.action, Action::Use { attributes: vec!["Cost for Sale".into()] });
    }
}
