//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use selftweet::matcher::MatchStep;
use selftweet::{CorpusPaths, Honorifics, SynthParams};

use crate::RunError;

/// Values given on the command line (or their environment mirrors). They
/// win over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub disable_steps: Vec<u8>,
    pub top_countries: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: InputPaths,
    pub out_dir: PathBuf,
    /// Enabled steps, a subsequence of the canonical order.
    pub steps: Vec<MatchStep>,
    /// `None` means the built-in list.
    pub honorifics: Option<Vec<String>>,
    pub top_countries: usize,
    pub workers: usize,
    pub export_variants: bool,
    pub seed: u64,
    pub synth: SynthParams,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputPaths {
    pub authors: Option<PathBuf>,
    pub works: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub tweeters: Option<PathBuf>,
    pub golden: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: InputPaths::default(),
            out_dir: PathBuf::from("out"),
            steps: MatchStep::ALL.to_vec(),
            honorifics: None,
            top_countries: 19,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            export_variants: false,
            seed: 1,
            synth: SynthParams::default(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, RunError> {
    value
        .parse()
        .map_err(|_| config_error(format!("invalid value for `{key}`: {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, RunError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(config_error(format!(
            "invalid value for `{key}`: {value:?}"
        ))),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parse `key = value` lines. Blank lines and `#` comments are ignored.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, RunError> {
    let mut entries = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim().to_string();
        if entries
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(config_error(format!(
                "line {}: duplicate key `{key}`",
                n + 1
            )));
        }
    }
    Ok(entries)
}

fn step_ids(ids: &[u8]) -> Result<Vec<MatchStep>, RunError> {
    ids.iter()
        .map(|&id| {
            MatchStep::from_id(id)
                .ok_or_else(|| config_error(format!("no matching step {id} (valid: 1-9)")))
        })
        .collect()
}

impl PipelineConfig {
    /// Defaults, then the file at `path` (if any), then `overrides`.
    /// Relative paths in the file resolve against the file's directory.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, RunError> {
        let mut config = PipelineConfig::default();
        let mut disabled: Vec<u8> = Vec::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let at = |value: &str| base.join(value);
            for (key, value) in parse_flat(&text)? {
                match key.as_str() {
                    "input_dir" => {
                        let paths = CorpusPaths::in_dir(&at(&value));
                        config.inputs.authors.get_or_insert(paths.authors);
                        config.inputs.works.get_or_insert(paths.works);
                        config.inputs.events.get_or_insert(paths.events);
                        config.inputs.tweeters.get_or_insert(paths.tweeters);
                        config.inputs.golden = config.inputs.golden.take().or(paths.golden);
                    }
                    "authors" => config.inputs.authors = Some(at(&value)),
                    "works" => config.inputs.works = Some(at(&value)),
                    "events" => config.inputs.events = Some(at(&value)),
                    "tweeters" => config.inputs.tweeters = Some(at(&value)),
                    "golden" => config.inputs.golden = Some(at(&value)),
                    "out" => config.out_dir = at(&value),
                    "workers" => config.workers = parse_value(&key, &value)?,
                    "disable_steps" => {
                        for id in parse_list(&value) {
                            disabled.push(parse_value(&key, &id)?);
                        }
                    }
                    "honorifics" => config.honorifics = Some(parse_list(&value)),
                    "top_countries" => config.top_countries = parse_value(&key, &value)?,
                    "export_variants" => config.export_variants = parse_bool(&key, &value)?,
                    "seed" => config.seed = parse_value(&key, &value)?,
                    "synth_authors" => config.synth.authors = parse_value(&key, &value)?,
                    "synth_planted" => config.synth.planted = parse_value(&key, &value)?,
                    "synth_distractors" => config.synth.distractors = parse_value(&key, &value)?,
                    "synth_works" => config.synth.works = parse_value(&key, &value)?,
                    "synth_events" => config.synth.events = parse_value(&key, &value)?,
                    "synth_homonym_rate" => config.synth.homonym_rate = parse_value(&key, &value)?,
                    "synth_classes" => {
                        let ids = parse_list(&value)
                            .iter()
                            .map(|id| parse_value(&key, id))
                            .collect::<Result<Vec<u8>, _>>()?;
                        config.synth.classes = step_ids(&ids)?;
                    }
                    _ => return Err(config_error(format!("unknown configuration key `{key}`"))),
                }
            }
        }

        if let Some(out) = &overrides.out {
            config.out_dir = out.clone();
        }
        if let Some(workers) = overrides.workers {
            config.workers = workers;
        }
        if let Some(top) = overrides.top_countries {
            config.top_countries = top;
        }
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        disabled.extend(&overrides.disable_steps);
        let disabled = step_ids(&disabled)?;
        config.steps.retain(|s| !disabled.contains(s));

        if config.workers == 0 {
            return Err(config_error("workers must be at least 1"));
        }
        Ok(config)
    }

    pub fn honorific_list(&self) -> Honorifics {
        match &self.honorifics {
            Some(list) => Honorifics::from_list(list),
            None => Honorifics::default(),
        }
    }

    /// Input paths for loading; the golden file only when `need_golden`.
    pub fn corpus_paths(&self, need_golden: bool) -> Result<CorpusPaths, RunError> {
        let missing = |name: &str| config_error(format!("no path configured for the {name} file"));
        let i = &self.inputs;
        Ok(CorpusPaths {
            authors: i.authors.clone().ok_or_else(|| missing("authors"))?,
            works: i.works.clone().ok_or_else(|| missing("works"))?,
            events: i.events.clone().ok_or_else(|| missing("events"))?,
            tweeters: i.tweeters.clone().ok_or_else(|| missing("tweeters"))?,
            golden: if need_golden {
                Some(i.golden.clone().ok_or_else(|| missing("golden"))?)
            } else {
                None
            },
        })
    }

    /// Create the output directory and check it accepts files.
    pub fn prepare_out_dir(&self) -> Result<(), RunError> {
        let unwritable = |e: std::io::Error| {
            config_error(format!(
                "output directory {} is not writable: {e}",
                self.out_dir.display()
            ))
        };
        std::fs::create_dir_all(&self.out_dir).map_err(unwritable)?;
        let probe = self.out_dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(unwritable)?;
        std::fs::remove_file(&probe).map_err(unwritable)
    }

    /// Every effective setting, defaults included.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let honorifics = match &self.honorifics {
            Some(list) => list.join(","),
            None => Honorifics::default().sorted().join(","),
        };
        let steps = |steps: &[MatchStep]| {
            steps
                .iter()
                .map(|s| s.id().to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        BTreeMap::from([
            ("authors", path(&self.inputs.authors)),
            ("works", path(&self.inputs.works)),
            ("events", path(&self.inputs.events)),
            ("tweeters", path(&self.inputs.tweeters)),
            ("golden", path(&self.inputs.golden)),
            ("out", self.out_dir.display().to_string()),
            ("steps", steps(&self.steps)),
            ("honorifics", honorifics),
            ("top_countries", self.top_countries.to_string()),
            ("workers", self.workers.to_string()),
            ("export_variants", self.export_variants.to_string()),
            ("seed", self.seed.to_string()),
            ("synth_authors", self.synth.authors.to_string()),
            ("synth_planted", self.synth.planted.to_string()),
            ("synth_distractors", self.synth.distractors.to_string()),
            ("synth_works", self.synth.works.to_string()),
            ("synth_events", self.synth.events.to_string()),
            ("synth_homonym_rate", self.synth.homonym_rate.to_string()),
            ("synth_classes", steps(&self.synth.classes)),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("pipeline.conf");
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn defaults() {
        let config = PipelineConfig::resolve(None, &Overrides::default()).unwrap();
        assert_eq!(config.steps, MatchStep::ALL.to_vec());
        assert_eq!(config.top_countries, 19);
        assert!(config.corpus_paths(false).is_err());
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "# tiny run\ninput_dir = data\nworkers = 3\ndisable_steps = 8, 9\ntop_countries = 5\n",
        );
        let overrides = Overrides {
            workers: Some(2),
            disable_steps: vec![7],
            ..Overrides::default()
        };
        let config = PipelineConfig::resolve(Some(&path), &overrides).unwrap();
        assert_eq!(config.workers, 2);
        assert_eq!(config.top_countries, 5);
        assert_eq!(
            config.steps.iter().map(|s| s.id()).collect::<Vec<_>>(),
            [1, 2, 3, 4, 5, 6]
        );
        let paths = config.corpus_paths(true).unwrap();
        assert_eq!(paths.authors, dir.path().join("data").join("authors.csv"));
        assert_eq!(
            paths.golden.unwrap(),
            dir.path().join("data").join("golden.csv")
        );
    }

    #[test]
    fn explicit_paths_beat_input_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "golden = gold.csv\ninput_dir = data\n");
        let config = PipelineConfig::resolve(Some(&path), &Overrides::default()).unwrap();
        assert_eq!(config.inputs.golden.unwrap(), dir.path().join("gold.csv"));
    }

    #[test]
    fn rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        for text in [
            "colour = blue\n",
            "workers = many\n",
            "no equals sign\n",
            "seed = 1\nseed = 2\n",
            "disable_steps = 12\n",
            "workers = 0\n",
        ] {
            let path = write(dir.path(), text);
            assert!(
                matches!(
                    PipelineConfig::resolve(Some(&path), &Overrides::default()),
                    Err(RunError::Config(_))
                ),
                "{text:?}"
            );
        }
    }

    #[test]
    fn honorific_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "honorifics = rev, dr\n");
        let config = PipelineConfig::resolve(Some(&path), &Overrides::default()).unwrap();
        let list = config.honorific_list();
        assert!(list.contains("rev") && !list.contains("prof"));
        assert_eq!(config.echo()["honorifics"], "rev,dr");
    }
}
