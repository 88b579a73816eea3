//! `--config` files: `key = value` lines turned into long flags placed before
//! the command-line flags, so the command line wins. A run manifest also
//! works as a config file: its `config` object is read the same way.

use std::ffi::OsString;
use std::path::PathBuf;

/// Flags that take no value; `key = true` enables them, `key = false` is a no-op.
const SWITCHES: &[&str] = &["header", "verbatim-tags", "allow-repeats", "drop-isolated"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    if text.trim_start().starts_with('{') {
        return from_manifest(text);
    }
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", n + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{}`", n + 1, k.trim()));
        }
        let v = v.trim();
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

fn from_manifest(text: &str) -> Result<Vec<(String, String)>, String> {
    use serde_json::Value;
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("manifest: {e}"))?;
    let Some(Value::Object(config)) = doc.get("config") else {
        return Err("manifest has no `config` object".into());
    };
    let scalar = |v: &Value| match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    };
    let mut out = Vec::new();
    for (k, v) in config {
        let value = match v {
            Value::Null => continue,
            Value::Array(items) => {
                if items.is_empty() {
                    continue;
                }
                items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|v| v.join(","))
            }
            v => scalar(v),
        };
        let value = value.ok_or_else(|| format!("manifest key `{k}` has an unsupported value"))?;
        out.push((k.replace('_', "-"), value));
    }
    Ok(out)
}

fn to_flags(pairs: &[(String, String)]) -> Result<Vec<OsString>, String> {
    let mut flags = Vec::new();
    for (k, v) in pairs {
        if SWITCHES.contains(&k.as_str()) {
            match v.as_str() {
                "true" => flags.push(format!("--{k}").into()),
                "false" => {}
                _ => return Err(format!("config key `{k}` expects true or false")),
            }
        } else {
            flags.push(format!("--{k}={v}").into());
        }
    }
    Ok(flags)
}

/// Removes `--config FILE` from `args` and returns it.
pub fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<PathBuf>, String> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--" {
            break;
        }
        if a == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a file".into());
            }
            path = Some(PathBuf::from(args.remove(i + 1)));
            args.remove(i);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(path)
}

/// Inserts the config flags right after the subcommand name.
pub fn splice(args: &mut Vec<OsString>, pairs: &[(String, String)]) -> Result<(), String> {
    let flags = to_flags(pairs)?;
    let Some(pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(());
    };
    let at = pos + 2;
    args.splice(at..at, flags);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_quotes() {
        let p = parse("# defaults\nalpha = 0.5\n\nset_size=\"4\"\nheader = true\n").unwrap();
        assert_eq!(
            p,
            vec![("alpha".into(), "0.5".into()), ("set-size".into(), "4".into()), ("header".into(), "true".into())]
        );
        assert!(parse("alpha 0.5").is_err());
    }

    #[test]
    fn manifest_config_is_accepted() {
        let p = parse(r#"{"tool": "tagevo", "config": {"min_share": 0.05, "tag": ["a", "b"], "post_col": null, "header": false}}"#)
            .unwrap();
        assert_eq!(
            p,
            vec![("header".into(), "false".into()), ("min-share".into(), "0.05".into()), ("tag".into(), "a,b".into())]
        );
    }

    #[test]
    fn config_flags_precede_command_line() {
        let mut args = os(&["tagevo", "--config", "c.conf", "simulate", "--alpha", "0.9"]);
        assert_eq!(take_config_path(&mut args).unwrap(), Some(PathBuf::from("c.conf")));
        splice(&mut args, &parse("alpha = 0.2\nallow_repeats = true\nheader = false").unwrap()).unwrap();
        assert_eq!(args, os(&["tagevo", "simulate", "--alpha=0.2", "--allow-repeats", "--alpha", "0.9"]));
    }
}
