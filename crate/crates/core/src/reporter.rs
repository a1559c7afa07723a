//! Result tables and dataset summaries.
//!
//! Every table is written twice: as CSV and as an aligned text rendering.
//! Counts are plain integers, rates carry three decimals and percentages
//! one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::corpus::{AuthorRecord, Id, WorkRecord};
use crate::error::{Error, Result};
use crate::evaluator::{StepRow, StepTables};
use crate::matcher::{write_matches, MatchOutcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisciplineRow {
    pub discipline: String,
    pub author_count: usize,
    pub author_percentage: f64,
    pub average_score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DisciplineSummary {
    pub rows: Vec<DisciplineRow>,
    /// Matched authors with no level-0 concept on any work.
    pub excluded: usize,
}

impl DisciplineSummary {
    pub fn assigned(&self) -> usize {
        self.rows.iter().map(|r| r.author_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryRow {
    pub country: String,
    pub author_count: usize,
    pub author_percentage: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CountrySummary {
    pub rows: Vec<CountryRow>,
    /// Matched authors without a known country.
    pub unknown: usize,
}

impl CountrySummary {
    pub fn known(&self) -> usize {
        self.rows.iter().map(|r| r.author_count).sum()
    }
}

pub const OTHER_COUNTRIES: &str = "Other countries";

/// Relative tolerance under which two concept sums count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

fn percentage(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

/// Assign each matched author to the level-0 concept with the highest
/// summed score over their works; ties go to the alphabetically first
/// concept.
///
/// The average score of a discipline is the mean, over its authors, of the
/// author's summed score for it divided by the author's work count.
pub fn discipline_summary(
    matched_authors: &BTreeSet<Id>,
    works: &[WorkRecord],
) -> DisciplineSummary {
    let mut work_counts: HashMap<&Id, usize> = HashMap::new();
    let mut sums: HashMap<&Id, BTreeMap<&str, f64>> = HashMap::new();
    for work in works {
        for author_id in &work.author_ids {
            if !matched_authors.contains(author_id) {
                continue;
            }
            *work_counts.entry(author_id).or_default() += 1;
            for concept in work.concepts.iter().filter(|c| c.level == 0) {
                *sums
                    .entry(author_id)
                    .or_default()
                    .entry(concept.name.as_str())
                    .or_default() += concept.score;
            }
        }
    }

    let mut per_discipline: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    let mut excluded = 0;
    for author_id in matched_authors {
        let Some(author_sums) = sums.get(author_id) else {
            excluded += 1;
            continue;
        };
        let mut best: Option<(&str, f64)> = None;
        for (&name, &sum) in author_sums {
            match best {
                Some((_, top)) if sum - top <= TIE_TOLERANCE * sum.abs().max(top.abs()) => {}
                _ => best = Some((name, sum)),
            }
        }
        let (name, sum) = best.expect("non-empty sums");
        let entry = per_discipline.entry(name).or_default();
        entry.0 += 1;
        entry.1 += sum / work_counts[author_id] as f64;
    }

    let assigned: usize = per_discipline.values().map(|(n, _)| n).sum();
    let mut rows: Vec<DisciplineRow> = per_discipline
        .into_iter()
        .map(|(name, (count, score_total))| DisciplineRow {
            discipline: name.to_string(),
            author_count: count,
            author_percentage: percentage(count, assigned),
            average_score: score_total / count as f64,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.author_count
            .cmp(&a.author_count)
            .then_with(|| a.discipline.cmp(&b.discipline))
    });
    DisciplineSummary { rows, excluded }
}

/// Matched authors per country of last known affiliation. The `top_n`
/// largest countries are listed; the rest collapse into one row.
pub fn country_summary(
    matched_authors: &BTreeSet<Id>,
    authors: &[AuthorRecord],
    top_n: usize,
) -> CountrySummary {
    let by_id: HashMap<&Id, &AuthorRecord> = authors.iter().map(|a| (&a.author_id, a)).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unknown = 0;
    for author_id in matched_authors {
        match by_id.get(author_id).and_then(|a| a.country.as_deref()) {
            Some(country) => *counts.entry(country).or_default() += 1,
            None => unknown += 1,
        }
    }
    let known: usize = counts.values().sum();
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut rows: Vec<CountryRow> = ranked
        .iter()
        .take(top_n)
        .map(|&(country, count)| CountryRow {
            country: country.to_string(),
            author_count: count,
            author_percentage: percentage(count, known),
        })
        .collect();
    let rest: usize = ranked.iter().skip(top_n).map(|(_, n)| n).sum();
    if rest > 0 {
        rows.push(CountryRow {
            country: OTHER_COUNTRIES.to_string(),
            author_count: rest,
            author_percentage: percentage(rest, known),
        });
    }
    CountrySummary { rows, unknown }
}

pub fn fmt_rate(x: f64) -> String {
    format!("{x:.3}")
}

pub fn fmt_percentage(x: f64) -> String {
    format!("{x:.1}")
}

/// A rendered table: header plus string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Lines appended below the text rendering only.
    pub notes: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.into_inner().map_err(|e| e.into_error().into())
    }

    /// Columns aligned; text columns left, numeric columns right.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let numeric: Vec<bool> = (0..self.header.len())
            .map(|c| {
                !self.rows.is_empty()
                    && self
                        .rows
                        .iter()
                        .all(|r| r[c].parse::<f64>().is_ok() || r[c].is_empty())
            })
            .collect();
        let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
            let mut out = String::new();
            for (c, cell) in cells.enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                let pad = widths[c].saturating_sub(cell.chars().count());
                if numeric[c] {
                    out.extend(std::iter::repeat_n(' ', pad));
                    out.push_str(cell);
                } else {
                    out.push_str(cell);
                    out.extend(std::iter::repeat_n(' ', pad));
                }
            }
            out.trim_end().to_string()
        };
        let mut text = line(&mut self.header.iter().copied());
        text.push('\n');
        let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        text.push_str(&"-".repeat(total));
        text.push('\n');
        for row in &self.rows {
            text.push_str(&line(&mut row.iter().map(String::as_str)));
            text.push('\n');
        }
        for note in &self.notes {
            let _ = writeln!(text, "{note}");
        }
        text
    }
}

pub const STEP_TABLE_HEADER: [&str; 8] = [
    "criteria",
    "field",
    "authors",
    "tweeters",
    "pairs",
    "recall",
    "precision",
    "f_score",
];

pub fn step_table(rows: &[StepRow]) -> Table {
    let rows = rows
        .iter()
        .map(|row| {
            let (criteria, field) = match row.step {
                Some(step) => (step.criteria().label(), step.field().label()),
                None => ("Combined", "Combined"),
            };
            vec![
                criteria.to_string(),
                field.to_string(),
                row.counts.authors.to_string(),
                row.counts.tweeters.to_string(),
                row.counts.pairs.to_string(),
                fmt_rate(row.report.recall),
                fmt_rate(row.report.precision),
                fmt_rate(row.report.f_score),
            ]
        })
        .collect();
    Table {
        header: STEP_TABLE_HEADER.to_vec(),
        rows,
        notes: Vec::new(),
    }
}

pub fn discipline_table(summary: &DisciplineSummary) -> Table {
    let rows = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                r.discipline.clone(),
                r.author_count.to_string(),
                fmt_percentage(r.author_percentage),
                fmt_rate(r.average_score),
            ]
        })
        .collect();
    Table {
        header: vec!["discipline", "authors", "percentage", "average_score"],
        rows,
        notes: vec![
            format!("Total assigned authors: {}", summary.assigned()),
            format!("Authors without level-0 concepts: {}", summary.excluded),
        ],
    }
}

pub fn country_table(summary: &CountrySummary) -> Table {
    let rows = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                r.country.clone(),
                r.author_count.to_string(),
                fmt_percentage(r.author_percentage),
            ]
        })
        .collect();
    Table {
        header: vec!["country", "authors", "percentage"],
        rows,
        notes: vec![
            format!("Total authors with a known country: {}", summary.known()),
            format!("Unknown: {}", summary.unknown),
        ],
    }
}

/// What to render; absent parts are skipped.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReportInputs<'a> {
    pub outcome: Option<&'a MatchOutcome>,
    pub step_tables: Option<&'a StepTables>,
    pub disciplines: Option<&'a DisciplineSummary>,
    pub countries: Option<&'a CountrySummary>,
}

fn write_table(dir: &Path, stem: &str, table: &Table, written: &mut Vec<PathBuf>) -> Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let bytes = table.to_csv().map_err(|e| Error::csv(&csv_path, e))?;
    std::fs::write(&csv_path, bytes).map_err(|e| Error::io(&csv_path, e))?;
    let txt_path = dir.join(format!("{stem}.txt"));
    std::fs::write(&txt_path, table.to_text()).map_err(|e| Error::io(&txt_path, e))?;
    written.push(csv_path);
    written.push(txt_path);
    Ok(())
}

/// Write the requested tables into `dir` and return the paths written.
pub fn render_tables(dir: &Path, inputs: &ReportInputs<'_>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if let Some(outcome) = inputs.outcome {
        let path = dir.join("matches.csv");
        write_matches(&path, outcome)?;
        written.push(path);
    }
    if let Some(tables) = inputs.step_tables {
        write_table(
            dir,
            "table_per_criterion",
            &step_table(&tables.per_criterion),
            &mut written,
        )?;
        write_table(
            dir,
            "table_new_pairs",
            &step_table(&tables.new_pairs),
            &mut written,
        )?;
        write_table(
            dir,
            "table_cumulative",
            &step_table(&tables.cumulative),
            &mut written,
        )?;
    }
    if let Some(summary) = inputs.disciplines {
        write_table(
            dir,
            "table_disciplines",
            &discipline_table(summary),
            &mut written,
        )?;
    }
    if let Some(summary) = inputs.countries {
        write_table(
            dir,
            "table_countries",
            &country_table(summary),
            &mut written,
        )?;
    }
    Ok(written)
}
