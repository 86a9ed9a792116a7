//! Turns a TOML config file into extra long flags.
//!
//! The file is read before clap sees the arguments: every key becomes
//! `--key=value` inserted right after the subcommand name, unless that flag is
//! already on the command line. Arrays become comma-separated lists, `true`
//! becomes a bare switch and `false` is dropped.

use clap::CommandFactory;

use crate::args::Cli;

fn flag_value(v: &toml::Value) -> Result<Option<String>, String> {
    Ok(match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(_) => None,
        toml::Value::Array(items) => {
            let parts = items
                .iter()
                .map(|i| flag_value(i)?.ok_or_else(|| "arrays of booleans are not supported".to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            Some(parts.join(","))
        }
        other => return Err(format!("unsupported config value {other}")),
    })
}

/// Returns `raw` with config-file flags spliced in after the subcommand.
pub fn inject(raw: &[String]) -> Result<Vec<String>, String> {
    let mut config: Option<String> = None;
    let mut sub_at = None;
    let mut i = 1;
    while i < raw.len() {
        let a = &raw[i];
        if a == "--config" {
            config = raw.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if !a.starts_with('-') {
            sub_at = Some(i);
            break;
        }
        i += 1;
    }
    let (Some(path), Some(sub_at)) = (config, sub_at) else {
        return Ok(raw.to_vec());
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let table: toml::Table = text.parse().map_err(|e| format!("invalid config {path}: {e}"))?;

    let sub = raw[sub_at].as_str();
    let command = Cli::command();
    let Some(sub_cmd) = command.find_subcommand(sub) else {
        // let clap report the unknown subcommand
        return Ok(raw.to_vec());
    };
    let accepted: Vec<String> = sub_cmd.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();

    // top-level keys the subcommand understands, then its own table
    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (k, v) in &table {
        let name = k.replace('_', "-");
        if !v.is_table() && accepted.contains(&name) {
            entries.push((name, v.clone()));
        }
    }
    if let Some(section) = table.get(sub) {
        let section = section.as_table().ok_or_else(|| format!("config key {sub:?} must be a table"))?;
        for (k, v) in section {
            let name = k.replace('_', "-");
            entries.retain(|(n, _)| *n != name);
            entries.push((name, v.clone()));
        }
    }

    let given = &raw[sub_at + 1..];
    let mut extra = Vec::new();
    for (name, v) in entries {
        let flag = format!("--{name}");
        if given.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match (flag_value(&v)?, v.as_bool()) {
            (_, Some(true)) => extra.push(flag),
            (_, Some(false)) => {}
            (Some(value), None) => extra.push(format!("{flag}={value}")),
            (None, None) => unreachable!("flag_value only returns None for booleans"),
        }
    }
    let mut out = raw[..=sub_at].to_vec();
    out.extend(extra);
    out.extend_from_slice(given);
    Ok(out)
}
