//! Stage orchestration for the `selftweet` binary.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use selftweet::corpus::{write_corpus, FileReport};
use selftweet::evaluator::write_planted;
use selftweet::matcher::{MatchOutcome, MatchedPair};
use selftweet::namekit::{write_variants, VariantKind};
use selftweet::reporter::{country_summary, discipline_summary, render_tables, ReportInputs};
use selftweet::{
    brute_force_match, build_doi_index, evaluate_per_step, generate_candidates,
    generate_synthetic_corpus, load_corpus, run_hierarchy, run_independent, Corpus, CorpusPaths,
    GoldenSet, Id, VariantTables,
};

pub use config::{Overrides, PipelineConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error in stage `{stage}`: {source}")]
    Input {
        stage: &'static str,
        source: selftweet::Error,
    },
    #[error("stage `{stage}` failed: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Input { .. } => 3,
            RunError::Stage { .. } => 4,
            RunError::OracleMismatch(_) => 5,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Input { .. } => "input",
            RunError::Stage { .. } => "stage",
            RunError::OracleMismatch(_) => "oracle",
        }
    }

    fn stage(stage: &'static str, err: impl ToString) -> Self {
        RunError::Stage {
            stage,
            message: err.to_string(),
        }
    }

    /// Sort a core error into its category.
    fn from_core(stage: &'static str, err: selftweet::Error) -> Self {
        use selftweet::Error as E;
        match err {
            E::FileMissing(_)
            | E::FormatError { .. }
            | E::ExcessiveMalformedRows { .. }
            | E::Csv { .. } => RunError::Input { stage, source: err },
            E::InvalidParams(_) | E::CorpusTooLarge { .. } => RunError::Config(err.to_string()),
            _ => RunError::stage(stage, err),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Match,
    Evaluate,
    Report,
    Synth,
    OracleCheck,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Match => "match",
            Command::Evaluate => "evaluate",
            Command::Report => "report",
            Command::Synth => "synth",
            Command::OracleCheck => "oracle-check",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputChecksum {
    pub dataset: &'static str,
    pub path: PathBuf,
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub wall_ms: f64,
}

/// Replication record written next to every run's artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub status: &'static str,
    pub exit_code: i32,
    pub error: Option<String>,
    pub started_unix_secs: u64,
    pub total_wall_ms: f64,
    pub config: BTreeMap<&'static str, String>,
    pub inputs: Vec<InputChecksum>,
    pub rows: BTreeMap<String, usize>,
    pub stages: Vec<StageTiming>,
    pub artifacts: Vec<PathBuf>,
}

pub const MANIFEST_FILE: &str = "run_manifest.json";

struct Run<'a> {
    config: &'a PipelineConfig,
    manifest: Manifest,
    out: &'a mut (dyn Write + Send),
}

fn sha256_file(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut File::open(path)?, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::stage("write", e))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| RunError::stage("write", format!("{}: {e}", path.display())))
}

impl Run<'_> {
    fn timed<T>(
        &mut self,
        stage: &'static str,
        f: impl FnOnce(&mut Self) -> Result<T, RunError>,
    ) -> Result<T, RunError> {
        let start = Instant::now();
        let result = f(self);
        self.manifest.stages.push(StageTiming {
            stage,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        result
    }

    fn out_path(&mut self, name: &str) -> PathBuf {
        let path = self.config.out_dir.join(name);
        self.manifest.artifacts.push(path.clone());
        path
    }

    fn say(&mut self, text: impl AsRef<str>) -> Result<(), RunError> {
        writeln!(self.out, "{}", text.as_ref()).map_err(|e| RunError::stage("output", e))
    }

    fn record_rows(&mut self, files: &[FileReport]) {
        for f in files {
            self.manifest
                .rows
                .insert(format!("{}_read", f.dataset), f.rows_read);
            self.manifest
                .rows
                .insert(format!("{}_loaded", f.dataset), f.rows_loaded);
        }
    }

    fn ingest(&mut self, need_golden: bool) -> Result<Corpus, RunError> {
        let paths = self.config.corpus_paths(need_golden)?;
        self.timed("ingest", |run| {
            run.checksum_inputs(&paths);
            let (corpus, report) =
                load_corpus(&paths).map_err(|e| RunError::from_core("ingest", e))?;
            run.record_rows(&report.files);
            let path = run.out_path("load_report.json");
            write_json(&path, &report)?;
            run.say(report.to_string().trim_end())?;
            Ok(corpus)
        })
    }

    fn checksum_inputs(&mut self, paths: &CorpusPaths) {
        let mut files = vec![
            ("authors", &paths.authors),
            ("works", &paths.works),
            ("events", &paths.events),
            ("tweeters", &paths.tweeters),
        ];
        if let Some(golden) = &paths.golden {
            files.push(("golden", golden));
        }
        for (dataset, path) in files {
            self.manifest.inputs.push(InputChecksum {
                dataset,
                path: path.clone(),
                sha256: sha256_file(path).ok(),
            });
        }
    }

    fn match_stage(&mut self, corpus: &Corpus) -> Result<(MatchOutcome, Matching), RunError> {
        let candidates = self.timed("candidates", |run| {
            let index = build_doi_index(&corpus.works, &corpus.events);
            let candidates = generate_candidates(&index);
            run.manifest
                .rows
                .insert("candidates".into(), candidates.len());
            Ok(candidates)
        })?;
        let honorifics = self.config.honorific_list();
        let tables =
            self.timed("variants", |run| {
                let tables = VariantTables::build(&corpus.authors, &corpus.tweeters, &honorifics);
                if run.config.export_variants {
                    let path = run.out_path("variants.csv");
                    let rows =
                        tables
                            .authors()
                            .iter()
                            .flat_map(|a| a.variants.iter().map(|v| (VariantKind::Author, v)))
                            .chain(tables.tweeters().iter().flat_map(|t| {
                                t.variants.iter().map(|v| (VariantKind::Tweeter, v))
                            }));
                    write_variants(&path, rows).map_err(|e| RunError::from_core("variants", e))?;
                }
                Ok(tables)
            })?;
        let outcome = self.timed("match", |run| {
            let outcome = run_hierarchy(&candidates, &tables, &run.config.steps);
            outcome.check_invariants().map_err(|e| {
                RunError::stage("match", format!("accounting invariant violated: {e}"))
            })?;
            let path = run.out_path("matches.csv");
            selftweet::matcher::write_matches(&path, &outcome)
                .map_err(|e| RunError::from_core("match", e))?;
            let path = run.out_path("match_summary.json");
            write_json(&path, &match_summary(&outcome, candidates.len(), &tables))?;
            run.manifest
                .rows
                .insert("matched_pairs".into(), outcome.combined.len());
            Ok(outcome)
        })?;
        let c = outcome.combined_counts();
        self.say(format!(
            "{} candidate pairs, {} matched pairs ({} authors, {} tweeters)",
            candidates.len(),
            c.pairs,
            c.authors,
            c.tweeters
        ))?;
        Ok((outcome, Matching { candidates, tables }))
    }

    fn evaluate_stage(
        &mut self,
        corpus: &Corpus,
        outcome: &MatchOutcome,
        matching: &Matching,
    ) -> Result<(), RunError> {
        self.timed("evaluate", |run| {
            let independent =
                run_independent(&matching.candidates, &matching.tables, &run.config.steps);
            let golden = GoldenSet::new(&corpus.golden);
            let step_tables = evaluate_per_step(outcome, &independent, &golden);
            let inputs = ReportInputs {
                step_tables: Some(&step_tables),
                ..ReportInputs::default()
            };
            let written = render_tables(&run.config.out_dir, &inputs)
                .map_err(|e| RunError::from_core("evaluate", e))?;
            run.manifest.artifacts.extend(written);
            let combined = step_tables.new_pairs.last().map(|row| row.report);
            let conventions_fired = [
                &step_tables.per_criterion,
                &step_tables.new_pairs,
                &step_tables.cumulative,
            ]
            .iter()
            .flat_map(|rows| rows.iter())
            .any(|row| row.report.conventions.any());
            let path = run.out_path("evaluation_summary.json");
            write_json(
                &path,
                &json!({
                    "golden_pairs": golden.len(),
                    "combined": combined,
                    "conventions_fired": conventions_fired,
                    "tables": step_tables,
                }),
            )?;
            if let Some(r) = combined {
                run.say(format!(
                    "combined: recall {:.3} precision {:.3} F {:.3}",
                    r.recall, r.precision, r.f_score
                ))?;
            }
            Ok(())
        })
    }

    fn report_stage(&mut self, corpus: &Corpus, outcome: &MatchOutcome) -> Result<(), RunError> {
        self.timed("report", |run| {
            let matched: BTreeSet<Id> = outcome
                .combined
                .iter()
                .map(|p| p.author_id.clone())
                .collect();
            let disciplines = discipline_summary(&matched, &corpus.works);
            let countries = country_summary(&matched, &corpus.authors, run.config.top_countries);
            let inputs = ReportInputs {
                disciplines: Some(&disciplines),
                countries: Some(&countries),
                ..ReportInputs::default()
            };
            let written = render_tables(&run.config.out_dir, &inputs)
                .map_err(|e| RunError::from_core("report", e))?;
            run.manifest.artifacts.extend(written);
            let path = run.out_path("summaries.json");
            write_json(
                &path,
                &json!({ "disciplines": disciplines, "countries": countries }),
            )?;
            run.say(format!(
                "{} matched authors: {} with a discipline, {} with a country",
                matched.len(),
                disciplines.assigned(),
                countries.known()
            ))
        })
    }

    fn synth_stage(&mut self) -> Result<(), RunError> {
        self.timed("synth", |run| {
            let synthetic = generate_synthetic_corpus(run.config.seed, &run.config.synth)
                .map_err(|e| RunError::from_core("synth", e))?;
            let dir = run.config.out_dir.clone();
            let paths = write_corpus(&dir, &synthetic.corpus).map_err(|e| RunError::from_core("synth", e))?;
            run.manifest.artifacts.extend([paths.authors, paths.works, paths.events, paths.tweeters]);
            run.manifest.artifacts.extend(paths.golden);
            let path = run.out_path("planted.csv");
            write_planted(&path, &synthetic.planted).map_err(|e| RunError::from_core("synth", e))?;
            let c = &synthetic.corpus;
            for (name, n) in [
                ("authors", c.authors.len()),
                ("works", c.works.len()),
                ("events", c.events.len()),
                ("tweeters", c.tweeters.len()),
                ("planted", synthetic.planted.len()),
            ] {
                run.manifest.rows.insert(name.into(), n);
            }
            run.say(format!(
                "synthetic corpus (seed {}): {} authors, {} works, {} events, {} tweeters, {} planted pairs",
                run.config.seed,
                c.authors.len(),
                c.works.len(),
                c.events.len(),
                c.tweeters.len(),
                synthetic.planted.len()
            ))
        })
    }

    fn oracle_stage(&mut self) -> Result<(), RunError> {
        let synthetic = self.timed("synth", |run| {
            generate_synthetic_corpus(run.config.seed, &run.config.synth)
                .map_err(|e| RunError::from_core("synth", e))
        })?;
        let corpus = &synthetic.corpus;
        let honorifics = self.config.honorific_list();
        let fast = self.timed("match", |run| {
            let index = build_doi_index(&corpus.works, &corpus.events);
            let candidates = generate_candidates(&index);
            let tables = VariantTables::build(&corpus.authors, &corpus.tweeters, &honorifics);
            let outcome = run_hierarchy(&candidates, &tables, &run.config.steps);
            outcome.check_invariants().map_err(|e| {
                RunError::stage("match", format!("accounting invariant violated: {e}"))
            })?;
            Ok(outcome)
        })?;
        let slow = self.timed("oracle", |run| {
            brute_force_match(corpus, &run.config.steps, &honorifics)
                .map_err(|e| RunError::from_core("oracle", e))
        })?;
        let difference = first_difference(&fast, &slow);
        let verdict = if difference.is_none() {
            "EQUAL"
        } else {
            "DIFFERENT"
        };
        let path = self.out_path("oracle_check.json");
        write_json(
            &path,
            &json!({
                "seed": self.config.seed,
                "authors": corpus.authors.len(),
                "tweeters": corpus.tweeters.len(),
                "pipeline_pairs": fast.combined.len(),
                "oracle_pairs": slow.combined.len(),
                "verdict": verdict,
                "first_difference": difference,
            }),
        )?;
        self.say(format!(
            "{verdict} ({} pipeline pairs, {} oracle pairs)",
            fast.combined.len(),
            slow.combined.len()
        ))?;
        match difference {
            None => Ok(()),
            Some(d) => Err(RunError::OracleMismatch(d)),
        }
    }
}

struct Matching {
    candidates: Vec<selftweet::CandidatePair>,
    tables: VariantTables,
}

fn match_summary(
    outcome: &MatchOutcome,
    candidates: usize,
    tables: &VariantTables,
) -> serde_json::Value {
    let steps: Vec<_> = outcome
        .steps
        .iter()
        .map(|step| {
            let new_pairs = outcome.new_pairs_by_step.get(step).map_or(0, Vec::len);
            json!({
                "step_id": step.id(),
                "criteria": step.criteria().as_str(),
                "field": step.field().as_str(),
                "new_pairs": new_pairs,
                "cumulative": outcome.cumulative_by_step.get(step),
            })
        })
        .collect();
    json!({
        "candidates": candidates,
        "tallies": tables.tallies,
        "steps": steps,
        "combined": outcome.combined_counts(),
    })
}

/// First pair whose presence or step differs between two outcomes.
pub fn first_difference(a: &MatchOutcome, b: &MatchOutcome) -> Option<String> {
    let key = |p: &MatchedPair| (p.author_id.clone(), p.tweeter_id.clone());
    let left: BTreeMap<_, _> = a.combined.iter().map(|p| (key(p), p)).collect();
    let right: BTreeMap<_, _> = b.combined.iter().map(|p| (key(p), p)).collect();
    for (k, p) in &left {
        match right.get(k) {
            None => return Some(format!("({}, {}) only in the pipeline output", k.0, k.1)),
            Some(q) if *q != *p => {
                return Some(format!(
                    "({}, {}) differs: pipeline step {} {:?}/{:?}, oracle step {} {:?}/{:?}",
                    k.0,
                    k.1,
                    p.step.id(),
                    p.matched_author_variant,
                    p.matched_tweeter_value,
                    q.step.id(),
                    q.matched_author_variant,
                    q.matched_tweeter_value
                ))
            }
            Some(_) => {}
        }
    }
    right
        .keys()
        .find(|k| !left.contains_key(*k))
        .map(|k| format!("({}, {}) only in the oracle output", k.0, k.1))
}

fn execute(command: Command, run: &mut Run<'_>) -> Result<(), RunError> {
    match command {
        Command::Synth => run.synth_stage(),
        Command::OracleCheck => run.oracle_stage(),
        Command::Ingest => run.ingest(false).map(drop),
        Command::Match => {
            let corpus = run.ingest(false)?;
            run.match_stage(&corpus).map(drop)
        }
        Command::Evaluate => {
            let corpus = run.ingest(true)?;
            let (outcome, matching) = run.match_stage(&corpus)?;
            run.evaluate_stage(&corpus, &outcome, &matching)
        }
        Command::Report | Command::All => {
            let corpus = run.ingest(true)?;
            let (outcome, matching) = run.match_stage(&corpus)?;
            run.evaluate_stage(&corpus, &outcome, &matching)?;
            run.report_stage(&corpus, &outcome)
        }
    }
}

/// Run `command` under `config`, printing progress to `out`. The manifest
/// is written whenever the output directory is usable, failed runs
/// included.
pub fn run(
    command: Command,
    config: &PipelineConfig,
    out: &mut (dyn Write + Send),
) -> Result<(), RunError> {
    let started = Instant::now();
    let started_unix_secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    config.prepare_out_dir()?;

    let mut run = Run {
        config,
        manifest: Manifest {
            command: command.as_str(),
            status: "ok",
            exit_code: 0,
            error: None,
            started_unix_secs,
            total_wall_ms: 0.0,
            config: config.echo(),
            inputs: Vec::new(),
            rows: BTreeMap::new(),
            stages: Vec::new(),
            artifacts: Vec::new(),
        },
        out,
    };
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunError::stage("setup", e))
        .and_then(|pool| pool.install(|| execute(command, &mut run)));

    let mut manifest = run.manifest;
    manifest.total_wall_ms = started.elapsed().as_secs_f64() * 1e3;
    if let Err(e) = &result {
        manifest.status = "failed";
        manifest.exit_code = e.exit_code();
        manifest.error = Some(e.to_string());
    }
    let written = write_json(&config.out_dir.join(MANIFEST_FILE), &manifest);
    result.and(written)
}
