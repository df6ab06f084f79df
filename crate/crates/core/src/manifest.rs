//! Run manifests: plain `key=value` lines written next to every output.
//!
//! Keys:
//! - `command` - subcommand name
//! - `flag.<name>` - resolved value of each command-line flag
//! - `input.<name>.path` / `input.<name>.sha256` - input files
//! - `stat.<name>` - counters gathered during the run
//! - `tool.version`, `run.duration_ms`, `run.argv`
//!
//! A manifest doubles as a config file: [`config_args`] turns its `flag.*`
//! entries back into command-line flags.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = RunManifest::default();
        m.set("command", command);
        m.set("tool.version", crate::VERSION);
        m
    }

    /// Sets `key`, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) {
        self.set(&format!("flag.{name}"), value);
    }

    pub fn stat(&mut self, name: &str, value: impl ToString) {
        self.set(&format!("stat.{name}"), value);
    }

    /// Records path and SHA-256 of an input file.
    pub fn input(&mut self, name: &str, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.set(&format!("input.{name}.path"), path.display());
        self.set(&format!("input.{name}.sha256"), sha256_file(path)?);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str, source: impl AsRef<Path>) -> Result<Self> {
        let path = source.as_ref();
        let mut m = RunManifest::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, lineno + 1, "expected key=value"))?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Turns a `key=value` config file (or manifest) into `--key value` flags for
/// `command`.
///
/// Plain keys and `flag.*` keys become flags; `input.*`, `stat.*`, `tool.*`
/// and `run.*` keys are ignored. A `command` entry must match `command`.
pub fn config_args(path: impl AsRef<Path>, command: &str) -> Result<Vec<String>> {
    let path = path.as_ref();
    let manifest = RunManifest::load(path)?;
    let mut args = Vec::new();
    for (k, v) in manifest.entries() {
        if k == "command" {
            if v != command {
                return Err(Error::invalid(format!(
                    "{}: config is for `{v}`, not `{command}`",
                    path.display()
                )));
            }
            continue;
        }
        let name = match k.split_once('.') {
            Some(("flag", name)) => name,
            Some(_) => continue,
            None => k.as_str(),
        };
        if name == "config" {
            continue;
        }
        args.push(format!("--{}", name.replace('_', "-")));
        args.push(v.clone());
    }
    Ok(args)
}
