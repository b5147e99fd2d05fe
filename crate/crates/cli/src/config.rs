//! `--config key=value` files are spliced into argv ahead of the user's
//! flags; with `args_override_self` the later command-line value wins.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;

fn config_path(argv: &[OsString]) -> Result<Option<PathBuf>, String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it
                .next()
                .map(|p| Some(PathBuf::from(p)))
                .ok_or_else(|| "--config needs a file".to_string());
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(PathBuf::from(p)));
        }
    }
    Ok(None)
}

/// Returns argv with the config file's entries inserted right after the
/// subcommand name. Unknown keys are rejected.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries = shiftbench::io::parse_key_values(&text).map_err(|e| format!("{}: {e}", path.display()))?;

    let root = Cli::command();
    let Some((pos, sub)) = argv
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| root.find_subcommand(a.to_str()?).map(|s| (i, s.clone())))
    else {
        return Ok(argv);
    };

    let mut injected = Vec::new();
    let mut unknown = Vec::new();
    for (key, value) in &entries {
        let long = key.replace('_', "-");
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(long.as_str()) && long != "config") else {
            unknown.push(key.clone());
            continue;
        };
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => injected.push(OsString::from(format!("--{long}"))),
                "false" | "0" | "no" => {}
                other => return Err(format!("{}: '{key}' expects true/false, got '{other}'", path.display())),
            },
            _ => injected.push(OsString::from(format!("--{long}={value}"))),
        }
    }
    if !unknown.is_empty() {
        return Err(format!(
            "{}: unknown keys for '{}': {}",
            path.display(),
            sub.get_name(),
            unknown.join(", ")
        ));
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}
