//! TOML experiment configuration with one section per subcommand and
//! `key=value` overrides.

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::Path;
use toml::{Table, Value};

pub const SECTIONS: [&str; 5] = ["fbnorm", "semigroup", "solve3d", "solve2d", "lab"];

/// A resolved section: the typed value and its canonical TOML echo.
#[derive(Debug)]
pub struct Resolved<T> {
    pub value: T,
    pub table: Table,
}

impl<T: Serialize> Resolved<T> {
    /// Canonical TOML text of the resolved section.
    pub fn echo(&self) -> Result<String> {
        Ok(toml::to_string(&self.table)?)
    }
}

/// Parses the right-hand side of an override as a TOML value, falling
/// back to a bare string.
pub fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `a.b.c=value` to a table, creating intermediate tables.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|k| k.is_empty()) {
        bail!("override `{assignment}` has an empty key");
    }
    let (last, parents) = path.split_last().expect("split yields one element");
    let mut cur = table;
    for k in parents {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{assignment}`: `{k}` is not a table"))?;
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Reads the config file (if any), rejects unknown sections, extracts
/// `section`, applies overrides and deserializes with unknown keys rejected.
pub fn resolve<T: DeserializeOwned + Serialize>(
    path: Option<&Path>,
    section: &str,
    overrides: &[String],
) -> Result<Resolved<T>> {
    let mut file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str::<Table>(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => Table::new(),
    };
    if let Some(bad) = file.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        bail!("unknown config section `{bad}` (expected one of {})", SECTIONS.join(", "));
    }
    let mut table = match file.remove(section) {
        Some(Value::Table(t)) => t,
        Some(_) => bail!("`{section}` must be a table"),
        None => Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let value: T = Value::Table(table)
        .try_into()
        .with_context(|| format!("invalid [{section}] configuration"))?;
    // Re-serialize so the echo contains defaults too.
    let table = match Value::try_from(&value)? {
        Value::Table(t) => t,
        _ => bail!("[{section}] did not serialize to a table"),
    };
    Ok(Resolved { value, table })
}
