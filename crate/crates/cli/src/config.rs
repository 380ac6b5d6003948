//! `key = value` config files. Each key is a long flag name without the
//! dashes; the values are spliced in front of the command line flags, so
//! explicit flags override them.

use std::ffi::OsString;
use std::fs;

use clap::{ArgAction, Command};

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Inserts config entries right after the subcommand name. Keys that no
/// subcommand knows are an error; keys of other subcommands are ignored.
pub fn expand(args: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.to_string_lossy()))?;
    let entries = parse(&text)?;
    let Some(pos) = args
        .iter()
        .position(|a| cmd.find_subcommand(a.to_string_lossy().as_ref()).is_some())
    else {
        return Ok(args);
    };
    let sub = cmd
        .find_subcommand(args[pos].to_string_lossy().as_ref())
        .expect("found above");
    let known_anywhere = |k: &str| {
        cmd.get_arguments()
            .chain(cmd.get_subcommands().flat_map(|s| s.get_arguments()))
            .any(|a| a.get_long() == Some(k))
    };
    let mut extra: Vec<OsString> = Vec::new();
    for (k, v) in entries {
        if k == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments().filter(|a| a.is_global_set()))
            .find(|a| a.get_long() == Some(k.as_str()));
        match arg {
            Some(a) if matches!(a.get_action(), ArgAction::SetTrue) => match v.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{k}").into()),
                "false" | "0" | "no" => {}
                _ => return Err(format!("config key {k}: expected true or false")),
            },
            Some(_) => {
                extra.push(format!("--{k}").into());
                extra.push(v.into());
            }
            None if known_anywhere(&k) => {}
            None => return Err(format!("unknown config key {k}")),
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
