use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Common {
    /// JSON document whose keys mirror the command's flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

pub trait Command: Serialize + DeserializeOwned {
    const NAME: &'static str;
    fn common(&self) -> &Common;
    fn common_mut(&mut self) -> &mut Common;
}

fn overlay(base: &mut Map<String, Value>, top: Value) {
    if let Value::Object(m) = top {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
}

/// Merge the config file (if any) under the command-line flags.
pub fn resolve<T: Command>(cli: T) -> Result<T> {
    let mut file = Map::new();
    if let Some(path) = &cli.common().config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))? {
            Value::Object(m) => file = m,
            _ => bail!("config must be a JSON object"),
        }
    }
    if let Some(c) = file.remove("command") {
        if c.as_str() != Some(T::NAME) {
            bail!("config is for command {c}, not {}", T::NAME);
        }
    }
    let mut common = Map::new();
    for key in ["seed", "out", "format"] {
        if let Some(v) = file.remove(key) {
            common.insert(key.into(), v);
        }
    }
    overlay(&mut common, serde_json::to_value(cli.common())?);
    overlay(&mut file, serde_json::to_value(&cli)?);
    let mut merged: T = serde_json::from_value(Value::Object(file)).context("invalid parameters")?;
    let config = cli.common().config.clone();
    *merged.common_mut() = serde_json::from_value(Value::Object(common)).context("invalid parameters")?;
    merged.common_mut().config = config;
    Ok(merged)
}

pub fn require_seed(c: &Common, what: &str) -> Result<u64> {
    c.seed.with_context(|| format!("--seed is required for {what}"))
}

macro_rules! command {
    ($t:ty, $name:literal) => {
        impl $crate::config::Command for $t {
            const NAME: &'static str = $name;
            fn common(&self) -> &$crate::config::Common {
                &self.common
            }
            fn common_mut(&mut self) -> &mut $crate::config::Common {
                &mut self.common
            }
        }
    };
}
pub(crate) use command;
