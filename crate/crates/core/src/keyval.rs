//! Line-oriented `key value ...` files shared by the builder config and the
//! scenario format. `#` starts a comment. Keys listed as repeatable may occur
//! more than once; everything else must be unique.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Entry {
    pub line: usize,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    source: PathBuf,
    single: BTreeMap<String, Entry>,
    repeated: Vec<(String, Entry)>,
}

impl KeyValues {
    pub fn parse(text: &str, source: impl AsRef<Path>, repeatable: &[&str]) -> Result<Self> {
        let mut kv = KeyValues {
            source: source.as_ref().to_path_buf(),
            ..Default::default()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut toks = line.split_whitespace();
            let Some(key) = toks.next() else { continue };
            let entry = Entry {
                line: i + 1,
                values: toks.map(str::to_string).collect(),
            };
            if repeatable.contains(&key) {
                kv.repeated.push((key.to_string(), entry));
            } else if kv.single.insert(key.to_string(), entry).is_some() {
                return Err(Error::parse(&kv.source, i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(kv)
    }

    /// Applies a `key=value` override; commas in the value separate list items.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("override `{spec}` is not key=value")))?;
        let values = value
            .split([',', ' '])
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        self.single.insert(key.trim().to_string(), Entry { line: 0, values });
        Ok(())
    }

    pub fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(&self.source, line, msg)
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.single.get(key)
    }

    pub fn repeated<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.repeated.iter().filter(move |(k, _)| k == key).map(|(_, e)| e)
    }

    pub fn parse_f64(&self, line: usize, tok: &str) -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|_| self.err(line, format!("invalid number `{tok}`")))
    }

    pub fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        e.values
            .iter()
            .map(|t| self.parse_f64(e.line, t))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn float(&self, key: &str) -> Result<Option<f64>> {
        let Some(vals) = self.floats(key)? else { return Ok(None) };
        if vals.len() != 1 {
            let line = self.entry(key).map_or(0, |e| e.line);
            return Err(self.err(line, format!("`{key}` takes exactly one value")));
        }
        Ok(Some(vals[0]))
    }

    pub fn pair(&self, key: &str) -> Result<Option<[f64; 2]>> {
        let Some(vals) = self.floats(key)? else { return Ok(None) };
        if vals.len() != 2 {
            let line = self.entry(key).map_or(0, |e| e.line);
            return Err(self.err(line, format!("`{key}` takes two values")));
        }
        Ok(Some([vals[0], vals[1]]))
    }

    pub fn text(&self, key: &str) -> Result<Option<&str>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        if e.values.len() != 1 {
            return Err(self.err(e.line, format!("`{key}` takes exactly one value")));
        }
        Ok(Some(e.values[0].as_str()))
    }

    /// Fails on any unique key not in `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for (k, e) in &self.single {
            if !known.contains(&k.as_str()) {
                return Err(self.err(e.line, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }
}
