//! Flat `key=value` run configuration, mirrored by the command-line flags
//! (flags win). The effective configuration is written next to every output
//! so runs are reproducible and diffable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(RunConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    /// Flag value if present, else config value, else the default.
    pub fn resolve<T: std::str::FromStr + ToString>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, String> {
        let value = match flag {
            Some(v) => v,
            None => match self.entries.get(key) {
                Some(raw) => raw
                    .parse::<T>()
                    .map_err(|_| format!("config key {key}: cannot parse {raw:?}"))?,
                None => default,
            },
        };
        self.set(key, value.to_string());
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_lossless() {
        let mut cfg = RunConfig::default();
        cfg.set("n", 100_000);
        cfg.set("dt_per_tdyn", 200);
        cfg.set("seed", 42u64);
        cfg.set("law", "king");
        let text = cfg.to_text();
        let back = RunConfig::from_text(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn flags_win_over_config() {
        let mut cfg = RunConfig::from_text("n=5\n").unwrap();
        let n: u64 = cfg.resolve("n", Some(9), 1).unwrap();
        assert_eq!(n, 9);
        let mut cfg = RunConfig::from_text("n=5\n").unwrap();
        let n: u64 = cfg.resolve("n", None, 1).unwrap();
        assert_eq!(n, 5);
    }
}
