//! TOML scenario files.
//!
//! A file is merged key by key onto a built-in preset (`preset = <id>`,
//! preset 1 when absent) and the result must form a complete, valid
//! scenario. Tables merge recursively; arrays and tables carrying a `kind`
//! tag replace the preset's value as a whole.

use std::path::Path;

use toml::{Table, Value};
use wmac_core::scenario::{preset, ScenarioSpec};

use crate::error::{CliError, Result};

pub const DEFAULT_BASE_PRESET: u32 = 1;
const BASE_KEY: &str = "preset";

pub fn load_scenario_file(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario(&text, stem).map_err(|e| match e {
        CliError::Parse {
            line, field, message, ..
        } => CliError::Parse {
            path: path.to_path_buf(),
            line,
            field,
            message,
        },
        other => other,
    })
}

/// Parses a scenario document; `default_id` names it when it sets no `id`.
pub fn parse_scenario(text: &str, default_id: &str) -> Result<ScenarioSpec> {
    let mut doc: Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse {
        path: Default::default(),
        line: e.span().map(|s| line_of(text, s.start)),
        field: None,
        message: e.message().trim().to_string(),
    })?;
    if doc.is_empty() {
        return Err(CliError::Validation(
            "scenario file is empty: no reference signal given".into(),
        ));
    }
    let base_id = match doc.remove(BASE_KEY) {
        None => DEFAULT_BASE_PRESET,
        Some(Value::Integer(i)) => u32::try_from(i)
            .ok()
            .filter(|i| preset(*i).is_some())
            .ok_or_else(|| field_error(text, BASE_KEY, format!("no built-in preset {i}")))?,
        Some(other) => {
            return Err(field_error(
                text,
                BASE_KEY,
                format!("expected a preset number, got {other}"),
            ))
        }
    };
    let mut base = preset(base_id).expect("checked above");
    if !doc.contains_key("id") {
        base.id = default_id.to_string();
    }
    let mut merged = match Value::try_from(&base) {
        Ok(Value::Table(t)) => t,
        _ => return Err(CliError::Format("preset does not encode as a table".into())),
    };
    merge(&mut merged, doc);
    let spec: ScenarioSpec = serde_path_to_error::deserialize(Value::Table(merged)).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().trim().to_string();
        let mut field = if path == "." { None } else { Some(path) };
        if let Some(name) = unknown_field(&message) {
            field = Some(match field {
                Some(path) if last_key(&path) == name => path,
                Some(parent) => format!("{parent}.{name}"),
                None => name.to_string(),
            });
        }
        let key = field.as_deref().map(last_key).unwrap_or_default();
        CliError::Parse {
            path: Default::default(),
            line: find_key_line(text, key),
            field,
            message,
        }
    })?;
    spec.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(spec)
}

/// Full TOML text of a scenario; loading it back gives the same scenario.
pub fn scenario_to_toml(spec: &ScenarioSpec) -> Result<String> {
    toml::to_string_pretty(spec).map_err(|e| CliError::Format(format!("encoding scenario: {e}")))
}

fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) if !o.contains_key("kind") => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn unknown_field(message: &str) -> Option<&str> {
    message.strip_prefix("unknown field `")?.split('`').next()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn last_key(path: &str) -> &str {
    let last = path.rsplit('.').next().unwrap_or("");
    last.split('[').next().unwrap_or("")
}

fn find_key_line(text: &str, key: &str) -> Option<usize> {
    if key.is_empty() {
        return None;
    }
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.trim_start_matches('[')
                    .trim_end()
                    .trim_end_matches(']')
                    .rsplit('.')
                    .next()
                    == Some(key)
        })
        .map(|i| i + 1)
}

fn field_error(text: &str, key: &str, message: String) -> CliError {
    CliError::Parse {
        path: Default::default(),
        line: find_key_line(text, key),
        field: Some(key.to_string()),
        message,
    }
}
