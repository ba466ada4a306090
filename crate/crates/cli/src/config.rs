//! Job configuration: a TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cfdim_core::sets::{builtin_words, parse_word_list};
use cfdim_core::subshift::ForbiddenSet;
use cfdim_core::Word;

/// Everything a pipeline run needs. Decimal values stay strings until they
/// are parsed exactly.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub alphabet_max: Option<u8>,
    /// Built-in set: B1, B1-TREE, B2, B2-TREE, X, Y, E2 or OMEGA.
    pub set: Option<String>,
    /// Extra forbidden words, added to the named set if any.
    #[serde(default)]
    pub forbidden: Vec<String>,
    /// Word-list file, relative to the config file.
    pub forbidden_file: Option<PathBuf>,
    pub include_reverses: Option<bool>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub precision: Option<u32>,
    pub partition: Option<usize>,
    #[serde(default)]
    pub t: Vec<String>,
    pub t_lo: Option<String>,
    pub t_hi: Option<String>,
    pub bisect_width: Option<String>,
    pub bisect_steps: Option<usize>,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<JobConfig> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<JobConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg =
            JobConfig::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        if let (Some(f), Some(dir)) = (&cfg.forbidden_file, path.parent()) {
            if f.is_relative() {
                cfg.forbidden_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn set_name(&self) -> String {
        match (&self.set, self.forbidden.is_empty() && self.forbidden_file.is_none()) {
            (Some(s), _) => s.to_ascii_uppercase(),
            (None, true) => "E2".to_string(),
            (None, false) => "custom".to_string(),
        }
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet_max.unwrap_or(2)
    }

    /// The normalized forbidden set.
    pub fn forbidden_set(&self) -> Result<ForbiddenSet> {
        let mut words: Vec<Word> = Vec::new();
        let name = self.set_name();
        match name.as_str() {
            "OMEGA" => {
                if self.forbidden.is_empty() && self.forbidden_file.is_none() {
                    bail!("OMEGA needs an externally supplied word list (forbidden_file or forbidden)");
                }
            }
            "CUSTOM" | "custom" => {}
            other => words.extend(builtin_words(other)?),
        }
        if let Some(path) = &self.forbidden_file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading word list {}", path.display()))?;
            words.extend(
                parse_word_list(&text).with_context(|| format!("in word list {}", path.display()))?,
            );
        }
        for (i, w) in self.forbidden.iter().enumerate() {
            words.push(w.parse().with_context(|| format!("forbidden[{i}] = {w:?}"))?);
        }
        Ok(ForbiddenSet::new(
            self.alphabet(),
            &words,
            self.include_reverses.unwrap_or(true),
        )?)
    }

    pub fn m(&self) -> usize {
        self.m.unwrap_or(8)
    }

    pub fn precision(&self) -> u32 {
        self.precision.unwrap_or(53)
    }

    pub fn partition(&self) -> usize {
        self.partition.unwrap_or(256)
    }
}
