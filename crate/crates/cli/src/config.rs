//! TOML config files supplying default flags.
//!
//! Top-level keys are global flags; a `[name]` table applies to subcommand
//! `name`, `[name.sub]` to its nested subcommand. Keys are long flag names
//! (`snake_case` is accepted). Values become `--key value` arguments unless
//! the flag was already given on the command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Command;
use toml::{Table, Value};

use crate::error::{CliError, Result};

pub const ENV_CONFIG: &str = "KGRAPH_CONFIG";

/// Config path from `--config` in `args`, else from the environment.
pub fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    std::env::var_os(ENV_CONFIG).map(PathBuf::from)
}

fn takes_value(cmd: &Command, long: &str) -> bool {
    cmd.get_arguments().any(|a| a.get_long() == Some(long) && a.get_action().takes_values())
}

/// Subcommand names selected by `args`, outermost first.
pub fn subcommand_path(root: &Command, args: &[String]) -> Vec<String> {
    let mut path = Vec::new();
    let mut cmd = root.clone();
    let mut globals = root.clone();
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if let Some(long) = a.strip_prefix("--") {
            if !long.contains('=') && (takes_value(&cmd, long) || takes_value(&globals, long)) {
                it.next();
            }
            continue;
        }
        if a.starts_with('-') {
            continue;
        }
        match cmd.find_subcommand(a) {
            Some(sub) => {
                path.push(sub.get_name().to_owned());
                let sub = sub.clone();
                globals = globals.subcommand(sub.clone());
                cmd = sub;
            }
            None => continue,
        }
    }
    path
}

fn given(args: &[String], flag: &str) -> bool {
    let eq = format!("{flag}=");
    args.iter().skip(1).take_while(|a| *a != "--").any(|a| a == flag || a.starts_with(&eq))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Integer(i) => Some(i.to_string()),
        Value::Float(f) => Some(f.to_string()),
        Value::Boolean(_) => None,
        Value::Datetime(d) => Some(d.to_string()),
        Value::Array(_) | Value::Table(_) => None,
    }
}

fn push_key(out: &mut Vec<String>, args: &[String], key: &str, value: &Value, origin: &Path) -> Result<()> {
    let flag = format!("--{}", key.replace('_', "-"));
    if flag == "--config" || given(args, &flag) {
        return Ok(());
    }
    match value {
        Value::Boolean(true) => out.push(flag),
        Value::Boolean(false) => {}
        Value::Array(items) => {
            for item in items {
                let v = scalar(item).ok_or_else(|| {
                    CliError::Usage(format!("{}: `{key}` must be a list of scalars", origin.display()))
                })?;
                out.push(flag.clone());
                out.push(v);
            }
        }
        other => {
            out.push(flag);
            out.push(scalar(other).expect("scalar"));
        }
    }
    Ok(())
}

fn check_sections(table: &Table, cmd: &Command, at: &str, origin: &Path) -> Result<()> {
    for (key, value) in table {
        if let Value::Table(inner) = value {
            let sub = cmd
                .find_subcommand(key)
                .ok_or_else(|| CliError::Usage(format!("{}: unknown section [{at}{key}]", origin.display())))?;
            check_sections(inner, sub, &format!("{at}{key}."), origin)?;
        }
    }
    Ok(())
}

/// `args` extended with the config values that apply to the selected
/// subcommand; deeper sections override shallower ones.
pub fn merge(root: &Command, args: Vec<String>, config: &Table, origin: &Path) -> Result<Vec<String>> {
    check_sections(config, root, "", origin)?;
    let path = subcommand_path(root, &args);
    let mut layers = vec![config];
    let mut table = config;
    for name in &path {
        match table.get(name) {
            Some(Value::Table(t)) => {
                layers.push(t);
                table = t;
            }
            _ => break,
        }
    }
    let mut chosen: Vec<(&String, &Value)> = Vec::new();
    for layer in layers {
        for (k, v) in layer {
            if matches!(v, Value::Table(_)) {
                continue;
            }
            match chosen.iter_mut().find(|(ck, _)| ck.replace('_', "-") == k.replace('_', "-")) {
                Some(slot) => *slot = (k, v),
                None => chosen.push((k, v)),
            }
        }
    }
    let mut extra = Vec::new();
    for (k, v) in chosen {
        push_key(&mut extra, &args, k, v, origin)?;
    }
    if extra.is_empty() {
        return Ok(args);
    }
    // Keep anything after `--` at the end.
    let split = args.iter().position(|a| a == "--").unwrap_or(args.len());
    let mut out = args[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

pub fn load(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    text.parse::<Table>().map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

pub fn to_os(args: Vec<String>) -> Vec<OsString> {
    args.into_iter().map(OsString::from).collect()
}
