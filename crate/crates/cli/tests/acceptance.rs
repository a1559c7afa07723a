//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selftweet::corpus::ConceptScore;
use selftweet::evaluator::{evaluate_pairs, f_measure};
use selftweet::reporter::{
    country_summary, discipline_summary, fmt_percentage, fmt_rate, OTHER_COUNTRIES,
};
use selftweet::{
    brute_force_match, build_doi_index, evaluate_per_step, expand_variants, generate_candidates,
    generate_synthetic_corpus, normalize_name, run_hierarchy, run_independent, AuthorRecord,
    Corpus, GoldenSet, Honorifics, Id, MatchOutcome, MatchStep, SynthParams, VariantTables,
    WorkRecord,
};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pipeline(
    corpus: &Corpus,
    steps: &[MatchStep],
) -> (MatchOutcome, Vec<selftweet::CandidatePair>, VariantTables) {
    let index = build_doi_index(&corpus.works, &corpus.events);
    let candidates = generate_candidates(&index);
    let tables = VariantTables::build(&corpus.authors, &corpus.tweeters, &Honorifics::default());
    let outcome = run_hierarchy(&candidates, &tables, steps);
    (outcome, candidates, tables)
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_selftweet")
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join("tiny")
}

// 1

fn metric_formula() -> Result<String, String> {
    let cases = [(0.958, 0.623, 0.755), (0.971, 0.423, 0.590)];
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, r, expected) in cases {
        let f = f_measure(p, r);
        let pass = (f - expected).abs() <= 0.0005;
        ok &= pass;
        lines.push(format!(
            "F({p}, {r}) = {f:.6}, expected {expected} +/- 0.0005: {}",
            if pass { "ok" } else { "outside tolerance" }
        ));
    }
    let detail = lines.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 2 and 5

fn oracle_params(rng: &mut ChaCha8Rng) -> (SynthParams, Vec<MatchStep>) {
    let authors = rng.gen_range(20..=500);
    let planted = rng.gen_range(0..=authors.min(250));
    let distractors = rng.gen_range(0..=500 - planted);
    let mut classes = MatchStep::ALL.to_vec();
    if rng.gen_bool(0.3) {
        classes.shuffle(rng);
        classes.truncate(rng.gen_range(1..=9));
    }
    let params = SynthParams {
        authors,
        planted,
        distractors,
        homonym_rate: rng.gen_range(0.0..=0.2),
        works: rng.gen_range(authors / 4 + 1..=authors * 2),
        events: if rng.gen_bool(0.5) {
            rng.gen_range(0..4_000)
        } else {
            0
        },
        classes,
    };
    let steps = if rng.gen_bool(0.2) {
        MatchStep::ALL
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.7))
            .collect()
    } else {
        MatchStep::ALL.to_vec()
    };
    (params, steps)
}

const ORACLE_CORPORA: u64 = 120;

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut slowest = Duration::ZERO;
    let mut pairs = 0;
    let mut per_step: BTreeMap<u8, usize> = BTreeMap::new();
    for seed in 0..ORACLE_CORPORA {
        let (params, steps) = oracle_params(&mut rng);
        let synthetic = generate_synthetic_corpus(seed, &params).map_err(|e| e.to_string())?;
        let corpus = &synthetic.corpus;
        let start = Instant::now();
        let (fast, _, _) = pipeline(corpus, &steps);
        let slow =
            brute_force_match(corpus, &steps, &Honorifics::default()).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        ensure(fast.combined == slow.combined, || {
            format!(
                "seed {seed}: {}",
                selftweet_cli::first_difference(&fast, &slow)
                    .unwrap_or_else(|| "pair lists differ".into())
            )
        })?;
        ensure(fast == slow, || {
            format!("seed {seed}: per-step tables differ")
        })?;
        pairs += fast.combined.len();
        for p in &fast.combined {
            *per_step.entry(p.step.id()).or_default() += 1;
        }
    }
    let detail = format!(
        "{ORACLE_CORPORA} corpora, {pairs} pairs identical incl. step and witness; steps hit {:?}; slowest corpus {:.2} s",
        per_step,
        slowest.as_secs_f64()
    );
    ensure(slowest < Duration::from_secs(5), || {
        format!("{detail}; over the 5 s budget")
    })?;
    Ok(detail)
}

fn accounting_invariants() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut runs = 0;
    for seed in 0..ORACLE_CORPORA {
        let (params, steps) = oracle_params(&mut rng);
        let synthetic = generate_synthetic_corpus(seed, &params).map_err(|e| e.to_string())?;
        let corpus = &synthetic.corpus;
        let (fast, candidates, tables) = pipeline(corpus, &steps);
        let slow =
            brute_force_match(corpus, &steps, &Honorifics::default()).map_err(|e| e.to_string())?;
        for outcome in [&fast, &slow] {
            outcome
                .check_invariants()
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let independent = run_independent(&candidates, &tables, &steps);
            let tables = evaluate_per_step(outcome, &independent, &GoldenSet::new(&corpus.golden));
            check_step_tables(&tables).map_err(|e| format!("seed {seed}: {e}"))?;
            runs += 1;
        }
    }
    let tiny = tiny_corpus()?;
    let (outcome, candidates, tables) = pipeline(&tiny, &MatchStep::ALL);
    outcome.check_invariants()?;
    let independent = run_independent(&candidates, &tables, &MatchStep::ALL);
    check_step_tables(&evaluate_per_step(
        &outcome,
        &independent,
        &GoldenSet::new(&tiny.golden),
    ))?;
    Ok(format!(
        "{} outcomes (pipeline and oracle on every oracle corpus, plus the tiny fixture): partition, monotone cumulative, final cumulative = combined",
        runs + 1
    ))
}

fn check_step_tables(tables: &selftweet::StepTables) -> Result<(), String> {
    let cumulative = &tables.cumulative;
    let (combined, rows) = cumulative.split_last().ok_or("empty cumulative table")?;
    for pair in rows.windows(2) {
        ensure(
            pair[1].counts.pairs >= pair[0].counts.pairs
                && pair[1].counts.authors >= pair[0].counts.authors
                && pair[1].counts.tweeters >= pair[0].counts.tweeters,
            || "cumulative counts decrease".into(),
        )?;
    }
    if let Some(last) = rows.last() {
        ensure(
            last.counts == combined.counts && last.report == combined.report,
            || "final cumulative row differs from the combined row".into(),
        )?;
    }
    let new_total: usize = tables.new_pairs[..tables.new_pairs.len() - 1]
        .iter()
        .map(|r| r.counts.pairs)
        .sum();
    ensure(new_total == combined.counts.pairs, || {
        format!(
            "new pairs sum to {new_total}, combined has {}",
            combined.counts.pairs
        )
    })
}

// 3

fn planted_recall() -> Result<String, String> {
    let mut recall_runs = 0;
    let mut planted_total = 0;
    for seed in 0..10 {
        let params = SynthParams {
            authors: 400,
            planted: 360,
            distractors: 0,
            homonym_rate: 0.1,
            works: 300,
            events: 0,
            classes: MatchStep::ALL.to_vec(),
        };
        let synthetic =
            generate_synthetic_corpus(1000 + seed, &params).map_err(|e| e.to_string())?;
        let classes: BTreeSet<MatchStep> = synthetic.planted.iter().map(|p| p.class).collect();
        ensure(classes.len() == 9, || {
            format!("seed {seed}: only {} classes planted", classes.len())
        })?;
        let (outcome, _, _) = pipeline(&synthetic.corpus, &MatchStep::ALL);
        let report = evaluate_pairs(&outcome.combined, &GoldenSet::new(&synthetic.corpus.golden));
        ensure(report.recall == 1.0, || {
            format!(
                "seed {seed}: recall {} ({} of {} planted)",
                report.recall,
                report.counts.true_positives,
                synthetic.planted.len()
            )
        })?;
        recall_runs += 1;
        planted_total += synthetic.planted.len();
    }

    let mut precision_runs = 0;
    let mut distractor_total = 0;
    for seed in 0..10 {
        let params = SynthParams {
            authors: 400,
            planted: 200,
            distractors: 300,
            homonym_rate: 0.0,
            works: 300,
            events: 2_000,
            classes: MatchStep::ALL.to_vec(),
        };
        let synthetic =
            generate_synthetic_corpus(2000 + seed, &params).map_err(|e| e.to_string())?;
        let (outcome, _, _) = pipeline(&synthetic.corpus, &MatchStep::ALL);
        let report = evaluate_pairs(&outcome.combined, &GoldenSet::new(&synthetic.corpus.golden));
        ensure(
            report.precision == 1.0 && report.unrestricted_precision == 1.0,
            || {
                format!(
                    "seed {seed}: precision {} (unrestricted {}), {} false positives",
                    report.precision, report.unrestricted_precision, report.counts.false_positives
                )
            },
        )?;
        precision_runs += 1;
        distractor_total += params.distractors;
    }
    Ok(format!(
        "recall = 1.0 on {recall_runs} corpora ({planted_total} planted pairs, all 9 classes); precision = 1.0 (restricted and unrestricted) on {precision_runs} corpora with {distractor_total} distractors"
    ))
}

// 4

fn subsumption() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut corpora = 0;
    let mut step1_total = 0;
    let mut step2_alone = 0;
    for seed in 0..60u64 {
        let (mut params, _) = oracle_params(&mut rng);
        if seed % 3 == 0 {
            params.planted = params.authors.min(200);
            params.classes = vec![MatchStep::HandleFullNameExact];
        }
        let synthetic =
            generate_synthetic_corpus(5000 + seed, &params).map_err(|e| e.to_string())?;
        let corpus = &synthetic.corpus;
        let all_expand = corpus.authors.iter().all(|a| {
            normalize_name(&a.display_name)
                .map(|n| !expand_variants(&a.author_id, &n).is_empty())
                .unwrap_or(false)
        });
        ensure(all_expand, || {
            format!("seed {seed}: corpus has names without variants")
        })?;
        let (outcome, candidates, tables) = pipeline(corpus, &MatchStep::ALL);
        let independent = run_independent(&candidates, &tables, &MatchStep::ALL);
        let step_tables =
            evaluate_per_step(&outcome, &independent, &GoldenSet::new(&corpus.golden));
        let row = step_tables
            .new_pairs
            .iter()
            .find(|r| r.step == Some(MatchStep::HandleFullNameExact))
            .ok_or("no FullNameExact/Handle row")?;
        ensure(row.counts.pairs == 0, || {
            format!("seed {seed}: {} new pairs at step 2", row.counts.pairs)
        })?;
        step1_total += outcome
            .new_pairs_by_step
            .get(&MatchStep::HandleLastNameFirstToken)
            .map_or(0, Vec::len);
        step2_alone += independent
            .get(&MatchStep::HandleFullNameExact)
            .map_or(0, Vec::len);
        corpora += 1;
    }
    Ok(format!(
        "{corpora} corpora: FullNameExact/Handle new-pairs row = 0 while it matches {step2_alone} pairs on its own ({step1_total} caught at step 1)"
    ))
}

// 6

fn run_cli(args: &[&str]) -> Result<String, String> {
    let output = Command::new(bin())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!(
            "`selftweet {}` exited with {}: {}",
            args.join(" "),
            output.status,
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&output.stdout).into_owned())
}

fn artifact_bytes(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == "run_manifest.json" {
            continue;
        }
        files.insert(
            name,
            std::fs::read(entry.path()).map_err(|e| e.to_string())?,
        );
    }
    Ok(files)
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth_dir = tmp.path().join("synth");
    let synth_conf = tmp.path().join("synth.conf");
    std::fs::write(
        &synth_conf,
        "synth_authors = 3000\nsynth_planted = 1500\nsynth_distractors = 1500\nsynth_works = 4000\nsynth_events = 30000\nsynth_homonym_rate = 0.15\n",
    )
    .map_err(|e| e.to_string())?;
    run_cli(&[
        "synth",
        "--config",
        synth_conf.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        synth_dir.to_str().unwrap(),
    ])?;
    let synth_run_conf = tmp.path().join("run.conf");
    std::fs::write(
        &synth_run_conf,
        format!("input_dir = {}\n", synth_dir.display()),
    )
    .map_err(|e| e.to_string())?;

    let tiny_conf = fixture_dir().join("pipeline.conf");
    let mut compared = 0;
    for (label, conf) in [
        ("tiny", tiny_conf.as_path()),
        ("synthetic", synth_run_conf.as_path()),
    ] {
        let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
        for workers in ["1", "2", "8"] {
            let out = tmp.path().join(format!("{label}-w{workers}"));
            run_cli(&[
                "all",
                "--config",
                conf.to_str().unwrap(),
                "--workers",
                workers,
                "--out",
                out.to_str().unwrap(),
            ])?;
            let files = artifact_bytes(&out)?;
            for required in [
                "matches.csv",
                "table_per_criterion.csv",
                "table_new_pairs.csv",
                "table_cumulative.csv",
                "table_disciplines.csv",
                "table_countries.csv",
            ] {
                ensure(files.contains_key(required), || {
                    format!("{label}: {required} missing")
                })?;
            }
            match &reference {
                None => reference = Some(files),
                Some(first) => {
                    for (name, bytes) in first {
                        ensure(files.get(name) == Some(bytes), || {
                            format!("{label}: {name} differs between 1 and {workers} workers")
                        })?;
                    }
                    ensure(files.len() == first.len(), || {
                        format!("{label}: artifact sets differ")
                    })?;
                }
            }
        }
        compared += reference.map_or(0, |r| r.len());
    }
    Ok(format!("`all` with 1, 2 and 8 workers: {compared} artifacts byte-identical across the tiny fixture and a 3000-author synthetic corpus"))
}

// 7

const NAME_PIECES: [&str; 24] = [
    "anna",
    "José",
    "O'Brien",
    "van",
    "der",
    "Müller",
    "Zoë",
    "jean-luc",
    "ŁUKASZ",
    "de",
    "la",
    "Peña",
    "dr.",
    "Prof",
    "Jr.",
    "li",
    "Nguyễn",
    "smith",
    "Ångström",
    "mc",
    "Dónal",
    "x",
    "-",
    "Ørsted",
];

fn random_name(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=6);
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen_bool(0.5) {
            parts.push(NAME_PIECES.choose(rng).unwrap().to_string());
        } else {
            let len = rng.gen_range(1..=9);
            let word: String = (0..len)
                .map(|_| {
                    let c = rng.gen_range(b'a'..=b'z') as char;
                    if rng.gen_bool(0.1) {
                        c.to_ascii_uppercase()
                    } else {
                        c
                    }
                })
                .collect();
            parts.push(word);
        }
    }
    let sep = [" ", "  ", " ", "\t", " "];
    parts
        .iter()
        .enumerate()
        .fold(String::new(), |mut s, (i, p)| {
            if i > 0 {
                s.push_str(sep.choose(rng).unwrap());
            }
            s.push_str(p);
            s
        })
}

fn variant_laws() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let start = Instant::now();
    let mut checked = 0;
    let mut variants_total = 0;
    let mut empty = 0;
    for i in 0..10_000 {
        let raw = random_name(&mut rng);
        let Ok(name) = normalize_name(&raw) else {
            empty += 1;
            continue;
        };
        let again = normalize_name(&name.joined())
            .map_err(|_| format!("#{i} {raw:?}: renormalizing failed"))?;
        ensure(again == name, || format!("#{i} {raw:?}: not idempotent"))?;
        let id = Id::from(format!("N{i}"));
        let variants = expand_variants(&id, &name);
        let n = name.len();
        ensure(variants.len() == n.saturating_sub(1), || {
            format!("#{i} {raw:?}: {} variants for {n} tokens", variants.len())
        })?;
        for (k, v) in variants.iter().enumerate() {
            let first: Vec<&str> = v.first_name.split(' ').collect();
            let last: Vec<&str> = v.last_name.split(' ').collect();
            let tokens: Vec<&str> = name.tokens().iter().map(String::as_str).collect();
            ensure(
                first.len() == k + 1 && first == tokens[..=k] && last == tokens[k + 1..],
                || format!("#{i} {raw:?}: split {k} does not follow token order"),
            )?;
            ensure(
                format!("{} {}", v.first_name, v.last_name) == name.joined(),
                || format!("#{i} {raw:?}: split {k} does not reconstruct the name"),
            )?;
            let initials: String = first.iter().filter_map(|t| t.chars().next()).collect();
            ensure(
                v.initials == initials
                    && v.first_name.starts_with(v.first_initial)
                    && v.first_token == first[0]
                    && v.owner_id == id,
                || format!("#{i} {raw:?}: split {k} fields inconsistent"),
            )?;
        }
        variants_total += variants.len();
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {:.2} s", elapsed.as_secs_f64())
    })?;
    Ok(format!(
        "10000 random names (1-6 raw tokens): {checked} normalized, {empty} empty after normalization, {variants_total} variants checked in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

// 8

fn summaries() -> Result<String, String> {
    let id = |n: usize| Id::from(format!("A{n:02}"));
    let concept = |name: &str, level: u32, score: f64| ConceptScore {
        name: name.to_string(),
        level,
        score,
    };
    let work = |n: usize, authors: &[usize], concepts: Vec<ConceptScore>| WorkRecord {
        work_id: Id::from(format!("W{n}")),
        doi: Id::from(format!("10.5555/sum.{n}")),
        author_ids: authors.iter().map(|&a| id(a)).collect(),
        concepts,
    };
    let works = vec![
        work(
            1,
            &[1, 2, 3, 4],
            vec![concept("Medicine", 0, 0.5), concept("Biology", 0, 0.3)],
        ),
        work(2, &[5, 6, 7, 8], vec![concept("Medicine", 0, 0.4)]),
        work(
            3,
            &[5, 6, 7, 8],
            vec![concept("Medicine", 0, 0.2), concept("Chemistry", 0, 0.5)],
        ),
        work(
            4,
            &[9, 10, 11, 12, 13, 20],
            vec![concept("Computer science", 0, 0.9)],
        ),
        work(
            5,
            &[14, 15, 16],
            vec![concept("Physics", 0, 0.3), concept("Mathematics", 0, 0.3)],
        ),
        work(
            6,
            &[17, 18],
            vec![concept("Physics", 0, 0.7), concept("Optics", 1, 0.95)],
        ),
        work(7, &[19], vec![concept("Optics", 1, 0.8)]),
    ];
    let countries = [
        "US", "US", "GB", "DE", "US", "CA", "GB", "FR", "US", "DE", "GB", "JP", "US", "CA", "GB",
        "DE", "US", "", "", "US",
    ];
    let authors: Vec<AuthorRecord> = (1..=20)
        .map(|n| AuthorRecord {
            author_id: id(n),
            display_name: format!("Author Number{n}"),
            orcid: None,
            country: Some(countries[n - 1].to_string()).filter(|c| !c.is_empty()),
        })
        .collect();
    let matched: BTreeSet<Id> = (1..=19).map(id).collect();

    // A01-A04 Medicine 0.5; A05-A08 Medicine 0.6 over two works; A09-A13
    // Computer science 0.9; A14-A16 tie at 0.3 goes to Mathematics; A17-A18
    // Physics 0.7; A19 has no level-0 concept; A20 is not matched.
    let expected_disciplines = [
        ("Medicine", 8, "44.4", 0.4),
        ("Computer science", 5, "27.8", 0.9),
        ("Mathematics", 3, "16.7", 0.3),
        ("Physics", 2, "11.1", 0.7),
    ];
    let d = discipline_summary(&matched, &works);
    ensure(d.rows.len() == expected_disciplines.len(), || {
        format!("{} discipline rows", d.rows.len())
    })?;
    for (row, (name, count, pct, avg)) in d.rows.iter().zip(expected_disciplines) {
        ensure(
            row.discipline == name
                && row.author_count == count
                && fmt_percentage(row.author_percentage) == pct
                && row.author_percentage == 100.0 * count as f64 / 18.0
                && (row.average_score - avg).abs() < 1e-12
                && fmt_rate(row.average_score) == fmt_rate(avg),
            || format!("discipline row {row:?}, expected {name} {count} {pct} {avg}"),
        )?;
    }
    ensure(d.excluded == 1, || {
        format!("{} authors excluded, expected 1", d.excluded)
    })?;
    let d_sum: f64 = d.rows.iter().map(|r| r.author_percentage).sum();
    ensure((d_sum - 100.0).abs() <= 0.1, || {
        format!("discipline percentages sum to {d_sum}")
    })?;

    // 17 matched authors with a country: US 6, GB 4, DE 3, CA 2, FR 1, JP 1
    let expected_countries = [
        ("US", 6, "35.3"),
        ("GB", 4, "23.5"),
        ("DE", 3, "17.6"),
        ("CA", 2, "11.8"),
        (OTHER_COUNTRIES, 2, "11.8"),
    ];
    let c = country_summary(&matched, &authors, 4);
    ensure(c.rows.len() == expected_countries.len(), || {
        format!("{} country rows", c.rows.len())
    })?;
    for (row, (name, count, pct)) in c.rows.iter().zip(expected_countries) {
        ensure(
            row.country == name
                && row.author_count == count
                && fmt_percentage(row.author_percentage) == pct
                && row.author_percentage == 100.0 * count as f64 / 17.0,
            || format!("country row {row:?}, expected {name} {count} {pct}"),
        )?;
    }
    ensure(c.unknown == 2, || {
        format!("{} unknown, expected 2", c.unknown)
    })?;
    let c_sum: f64 = c.rows.iter().map(|r| r.author_percentage).sum();
    ensure((c_sum - 100.0).abs() <= 0.1, || {
        format!("country percentages sum to {c_sum}")
    })?;
    let shown: f64 = c
        .rows
        .iter()
        .map(|r| fmt_percentage(r.author_percentage).parse::<f64>().unwrap())
        .sum();
    ensure((shown - 100.0).abs() <= 0.1 + 1e-9, || {
        format!("rounded country percentages sum to {shown}")
    })?;

    let all = country_summary(&matched, &authors, 19);
    ensure(
        all.rows.len() == 6 && all.rows.iter().all(|r| r.country != OTHER_COUNTRIES),
        || "top 19 should list every country".into(),
    )?;

    Ok(format!(
        "20-author fixture: 4 discipline rows (tie to Mathematics, 1 excluded) and 5 country rows (2 unknown) match hand values; sums {d_sum:.1} and {c_sum:.1}"
    ))
}

// 9

fn peak_child_rss_kib() -> i64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    // SAFETY: getrusage fills the struct it is given.
    let usage = unsafe {
        libc::getrusage(libc::RUSAGE_CHILDREN, usage.as_mut_ptr());
        usage.assume_init()
    };
    usage.ru_maxrss
}

fn throughput() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let conf = tmp.path().join("big.conf");
    std::fs::write(
        &conf,
        format!(
            "input_dir = {}\nsynth_authors = 100000\nsynth_planted = 50000\nsynth_distractors = 50000\nsynth_works = 150000\nsynth_events = 1000000\nsynth_homonym_rate = 0.1\nworkers = 4\n",
            data.display()
        ),
    )
    .map_err(|e| e.to_string())?;
    let start = Instant::now();
    run_cli(&[
        "synth",
        "--config",
        conf.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        data.to_str().unwrap(),
    ])?;
    let synth_secs = start.elapsed().as_secs_f64();
    let rss_before = peak_child_rss_kib();

    let out = tmp.path().join("out");
    let start = Instant::now();
    let stdout = run_cli(&[
        "match",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])?;
    let secs = start.elapsed().as_secs_f64();
    let rss = peak_child_rss_kib();
    let gib = rss as f64 / (1024.0 * 1024.0);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let events = stdout
        .lines()
        .find(|l| l.starts_with("events"))
        .unwrap_or("")
        .split_whitespace()
        .nth(2)
        .unwrap_or("?")
        .to_string();
    let rss_note = if rss > rss_before {
        format!("{gib:.2} GiB peak RSS")
    } else {
        format!("peak RSS not above the generator's ({gib:.2} GiB)")
    };
    let detail = format!(
        "match on 100000 authors / 100000 tweeters / {events} events: {secs:.1} s, {rss_note} ({cores} core(s) here, 4 workers; generation took {synth_secs:.1} s)"
    );
    ensure(secs < 120.0 && gib < 8.0, || detail.clone())?;
    Ok(detail)
}

fn tiny_corpus() -> Result<Corpus, String> {
    let paths = selftweet::CorpusPaths::in_dir(&fixture_dir());
    selftweet::load_corpus(&paths)
        .map(|(c, _)| c)
        .map_err(|e| e.to_string())
}

fn main() {
    let criteria: [(u8, &str, Check); 9] = [
        (1, "metric formula reproduction", metric_formula),
        (2, "oracle equivalence", oracle_equivalence),
        (3, "planted recall and distractor precision", planted_recall),
        (4, "step 2 subsumed by step 1", subsumption),
        (5, "accounting invariants", accounting_invariants),
        (6, "determinism across worker counts", determinism),
        (7, "variant laws", variant_laws),
        (8, "discipline and country summaries", summaries),
        (9, "throughput at 1M events", throughput),
    ];
    let only: Option<BTreeSet<u8>> = std::env::var("SELFTWEET_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());

    println!("\nacceptance criteria");
    let mut failed = Vec::new();
    for (n, name, check) in criteria {
        if only.as_ref().is_some_and(|set| !set.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{n}] {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                println!("FAIL [{n}] {name} ({secs:.1} s): {detail}");
                failed.push(n);
            }
        }
    }
    if failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
