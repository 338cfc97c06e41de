//! Subcommand implementations. Data goes to the output stream, summaries
//! and warnings to the diagnostic stream.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use accentor_core::annotation::{
    aggregate, emit_dataset, export_tasks, load_answers, load_dataset, load_task_records,
    AggregationOutcome,
};
use accentor_core::corpus::{
    extract_trigrams, generate_synthetic_corpus, parse_conllu, trigram_drop_reason, DropReason,
};
use accentor_core::encoding::{strip_stress_marks, EncodedExample, EncodedInput};
use accentor_core::error::TrainError;
use accentor_core::eval::{
    default_combos, render_matrix, run_experiment_matrix, split_dataset, ReportFormat,
};
use accentor_core::lang::COMBINING_ACUTE;
use accentor_core::models;
use accentor_core::neuro::{grad_check, init_params};
use accentor_core::{Head, Lang, ModelConfig, Trigram};

use crate::config::{resolve, resolve_opt, FileConfig};
use crate::{
    AnnotateArgs, BuildDatasetArgs, CliError, ExperimentArgs, GradcheckArgs, ModelFlags,
    PredictArgs, SplitRatio, SynthArgs, TrainArgs,
};

impl ModelFlags {
    /// Merge flags over the configuration file over the defaults.
    fn build(&self) -> Result<(ModelConfig, FileConfig), CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut cfg = ModelConfig::new(resolve(self.head, &file, "head", Head::Global)?);
        cfg.epochs = resolve(self.epochs, &file, "epochs", cfg.epochs)?;
        cfg.learning_rate = resolve(self.lr, &file, "lr", cfg.learning_rate)?;
        cfg.batch_size = resolve(self.batch_size, &file, "batch-size", cfg.batch_size)?;
        cfg.max_len = resolve(self.max_len, &file, "max-len", cfg.max_len)?;
        cfg.embedding_dim = resolve(
            self.embedding_dim,
            &file,
            "embedding-dim",
            cfg.embedding_dim,
        )?;
        cfg.hidden_units = resolve(self.hidden_units, &file, "hidden-units", cfg.hidden_units)?;
        cfg.optimizer = resolve(self.optimizer, &file, "optimizer", cfg.optimizer)?;
        cfg.seed = resolve(self.seed, &file, "seed", 0)?;
        Ok((cfg, file))
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn build_dataset(args: BuildDatasetArgs) -> Result<(), CliError> {
    let mut tasks = Vec::new();
    let mut sentences = 0usize;
    let mut tokens = 0usize;
    let mut parse_errors = 0usize;
    let mut dropped: BTreeMap<DropReason, usize> = BTreeMap::new();
    for path in &args.treebanks {
        for sentence in parse_conllu(open_reader(path)?) {
            match sentence {
                Ok(sentence) => {
                    sentences += 1;
                    tokens += sentence.len();
                    for trigram in extract_trigrams(&sentence) {
                        match trigram_drop_reason(&trigram, args.lang) {
                            Some(reason) => *dropped.entry(reason).or_insert(0) += 1,
                            None => {
                                tasks.push(accentor_core::annotation::make_task(
                                    &trigram, args.lang,
                                )?);
                            }
                        }
                    }
                }
                Err(e) => {
                    parse_errors += 1;
                    eprintln!("warning: {}: {e}", path.display());
                }
            }
        }
    }
    let written = export_tasks(&tasks, create_writer(&args.output)?)?;
    eprintln!("parsed {sentences} sentences / {tokens} tokens ({parse_errors} skipped blocks)");
    eprintln!("kept {written} trigrams as annotation tasks");
    for (reason, count) in &dropped {
        eprintln!("dropped {count}: {reason}");
    }
    Ok(())
}

pub fn annotate(args: AnnotateArgs) -> Result<(), CliError> {
    let tasks = load_task_records(open_reader(&args.tasks)?)?;
    let answers = load_answers(open_reader(&args.answers)?)?;
    let mut by_id = BTreeMap::new();
    for answer in &answers {
        if by_id.insert(answer.task_id.as_str(), answer).is_some() {
            return Err(CliError::input(format!(
                "duplicate answers for task `{}`",
                answer.task_id
            )));
        }
    }
    let known: std::collections::BTreeSet<&str> =
        tasks.iter().map(|t| t.task_id.as_str()).collect();
    for answer in &answers {
        if !known.contains(answer.task_id.as_str()) {
            return Err(CliError::input(format!(
                "answers reference unknown task `{}`",
                answer.task_id
            )));
        }
    }

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut unanswered = 0usize;
    for record in tasks {
        let task_id = record.task_id.clone();
        match by_id.get(task_id.as_str()) {
            None => unanswered += 1,
            Some(answer) => {
                let task = record.into_task(args.lang);
                match aggregate(&task, answer)? {
                    AggregationOutcome::Accepted(trigram) => accepted.push(trigram),
                    AggregationOutcome::Rejected(rejection) => rejected.push((task_id, rejection)),
                }
            }
        }
    }
    let written = emit_dataset(&accepted, create_writer(&args.output)?)?;
    if let Some(path) = &args.rejects {
        let mut sink = create_writer(path)?;
        for (task_id, rejection) in &rejected {
            let line = serde_json::json!({
                "task_id": task_id,
                "word": rejection.word,
                "answers": rejection.answers,
            });
            writeln!(sink, "{line}").map_err(CliError::input)?;
        }
    }
    let answered = accepted.len() + rejected.len();
    let rate = if answered > 0 {
        written as f64 / answered as f64
    } else {
        0.0
    };
    eprintln!(
        "{answered} tasks answered: {written} accepted ({:.1}%), {} rejected, {unanswered} unanswered",
        rate * 100.0,
        rejected.len()
    );
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::input("--count must be positive"));
    }
    let corpus = generate_synthetic_corpus(args.rule, args.count, args.seed, args.lang);
    let written = emit_dataset(&corpus, create_writer(&args.output)?)?;
    eprintln!(
        "wrote {written} {} trigrams (rule {}, seed {})",
        args.lang, args.rule, args.seed
    );
    Ok(())
}

fn load_datasets(paths: &[PathBuf]) -> Result<Vec<Trigram>, CliError> {
    let mut data = Vec::new();
    for path in paths {
        let entries = load_dataset(open_reader(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        data.extend(entries);
    }
    Ok(data)
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let (cfg, file) = args.model.build()?;
    let mut paths = args.datasets.clone();
    if paths.is_empty() {
        paths = file.get_all("dataset").iter().map(PathBuf::from).collect();
    }
    if paths.is_empty() {
        return Err(CliError::input("no --dataset given"));
    }
    let data = load_datasets(&paths)?;
    let dev_fraction = resolve(args.dev_fraction, &file, "dev-fraction", 0.0)?;
    if !(0.0..1.0).contains(&dev_fraction) {
        return Err(CliError::input("--dev-fraction must be in [0, 1)"));
    }
    let checkpoint = resolve_opt(args.checkpoint, &file, "checkpoint")?
        .ok_or_else(|| CliError::input("no --checkpoint given"))?;

    let model = if dev_fraction > 0.0 {
        let (train_set, dev_set) = split_dataset(&data, 1.0 - dev_fraction, cfg.seed);
        models::train(&cfg, &train_set, Some(&dev_set))?
    } else {
        models::train(&cfg, &data, None)?
    };
    models::save(&model, &checkpoint)?;

    if let Some(path) = resolve_opt(args.history, &file, "history")? {
        let doc = serde_json::json!({
            "config": model.config,
            "skipped": model.skipped,
            "epochs": model.history,
        });
        let mut sink = create_writer(&path)?;
        writeln!(
            sink,
            "{}",
            serde_json::to_string_pretty(&doc).expect("history serializes")
        )
        .map_err(CliError::input)?;
    }
    let final_loss = model
        .history
        .last()
        .map(|e| format!("{:.4}", e.train_loss))
        .unwrap_or_else(|| "n/a".into());
    let best_dev = model
        .history
        .iter()
        .filter_map(|e| e.dev_accuracy)
        .fold(f64::NAN, f64::max);
    eprintln!(
        "trained {} epochs on {} entries ({} skipped); final train loss {final_loss}{}",
        model.history.len(),
        data.len(),
        model.skipped,
        if best_dev.is_nan() {
            String::new()
        } else {
            format!("; best dev accuracy {best_dev:.4}")
        }
    );
    eprintln!("checkpoint written to {}", checkpoint.display());
    Ok(())
}

fn mark_stress(word: &str, pos: usize) -> String {
    let stripped = strip_stress_marks(word);
    let mut out = String::new();
    for (i, c) in stripped.chars().enumerate() {
        out.push(c);
        if i + 1 == pos {
            out.push(COMBINING_ACUTE);
        }
    }
    out
}

pub fn predict(args: PredictArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let checkpoint = resolve_opt(args.checkpoint, &file, "checkpoint")?
        .ok_or_else(|| CliError::input("no --checkpoint given"))?;
    let lang =
        resolve_opt(args.lang, &file, "lang")?.ok_or_else(|| CliError::input("no --lang given"))?;
    let model = models::load(&checkpoint)?;
    let reader: Box<dyn BufRead> = match resolve_opt(args.input, &file, "input")? {
        Some(path) => Box::new(open_reader(&path)?),
        None => Box::new(BufReader::new(std::io::stdin())),
    };
    let mut writer: Box<dyn Write> = match resolve_opt(args.output, &file, "output")? {
        Some(path) => Box::new(create_writer(&path)?),
        None => Box::new(BufWriter::new(std::io::stdout())),
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(CliError::input)?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (prev, word, next) = match fields.len() {
            0 => continue,
            1 => ("", fields[0], ""),
            3 => {
                fn unwrap_absent(s: &str) -> &str {
                    if s == "_" {
                        ""
                    } else {
                        s
                    }
                }
                (
                    unwrap_absent(fields[0]),
                    fields[1],
                    unwrap_absent(fields[2]),
                )
            }
            n => {
                return Err(CliError::input(format!(
                    "line {}: expected 1 or 3 whitespace-separated fields, got {n}",
                    lineno + 1
                )))
            }
        };
        let pos = models::predict_stress(&model, prev, word, next, lang).map_err(|e| match e {
            TrainError::NoVowels(_) | TrainError::Encoding(_) => {
                CliError::input(format!("line {}: {e}", lineno + 1))
            }
            other => CliError::from(other),
        })?;
        writeln!(writer, "{} {}", mark_stress(word, pos), pos).map_err(CliError::input)?;
    }
    writer.flush().map_err(CliError::input)?;
    Ok(())
}

fn parse_combos(spec: &str) -> Result<Vec<Vec<Lang>>, CliError> {
    let mut combos = Vec::new();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let mut combo = Vec::new();
        for tag in part.split(',') {
            let lang: Lang = tag
                .trim()
                .parse()
                .map_err(|e| CliError::input(format!("combo `{part}`: {e}")))?;
            combo.push(lang);
        }
        combos.push(combo);
    }
    if combos.is_empty() {
        return Err(CliError::input("empty --combos"));
    }
    Ok(combos)
}

pub fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let (cfg, file) = args.model.build()?;
    let mut specs = args.datasets.clone();
    if specs.is_empty() {
        specs = file.get_all("dataset").to_vec();
    }
    if specs.is_empty() {
        return Err(CliError::input("no --dataset given (expected `tag=path`)"));
    }
    let mut datasets: BTreeMap<Lang, Vec<Trigram>> = BTreeMap::new();
    for spec in &specs {
        let (tag, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--dataset `{spec}`: expected `tag=path`")))?;
        let lang: Lang = tag.trim().parse().map_err(CliError::input)?;
        let entries = load_dataset(open_reader(Path::new(path.trim()))?)
            .map_err(|e| CliError::input(format!("{path}: {e}")))?;
        datasets.insert(lang, entries);
    }
    let combos = match resolve_opt::<String>(args.combos, &file, "combos")? {
        Some(spec) => parse_combos(&spec)?,
        None => default_combos()
            .into_iter()
            .filter(|combo| combo.iter().all(|l| datasets.contains_key(l)))
            .collect(),
    };
    let runs = resolve(args.runs, &file, "runs", 20)?;
    if runs == 0 {
        return Err(CliError::input("--runs must be positive"));
    }
    let split = resolve(args.split, &file, "split", SplitRatio(7, 3))?;
    let jobs = resolve(args.jobs, &file, "jobs", 1)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(CliError::input)?;
    let matrix =
        pool.install(|| run_experiment_matrix(&datasets, &combos, &cfg, runs, (split.0, split.1)))?;

    let text = render_matrix(&matrix, ReportFormat::Text);
    print!("{text}");
    if let Some(path) = resolve_opt(args.report_text, &file, "report-text")? {
        let mut sink = create_writer(&path)?;
        sink.write_all(text.as_bytes()).map_err(CliError::input)?;
    }
    if let Some(path) = resolve_opt(args.report_json, &file, "report-json")? {
        let mut sink = create_writer(&path)?;
        let json = render_matrix(&matrix, ReportFormat::Json);
        sink.write_all(json.as_bytes()).map_err(CliError::input)?;
        sink.write_all(b"\n").map_err(CliError::input)?;
    }
    Ok(())
}

pub fn gradcheck(args: GradcheckArgs) -> Result<(), CliError> {
    let (mut cfg, _file) = args.model.build()?;
    cfg.vocab_size = 40;
    const TOLERANCE: f64 = 1e-4;
    let mut worst = 0.0f64;
    for head in [Head::Local, Head::Global] {
        cfg.head = head;
        for offset in 0..args.seeds {
            let seed = cfg.seed.wrapping_add(offset);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6AD5_CEED);
            let len = rng.random_range(5..=cfg.max_len.min(40));
            let char_ids: Vec<usize> = (0..len)
                .map(|_| rng.random_range(0..cfg.vocab_size))
                .collect();
            let stress = rng.random_range(0..len);
            let mut labels = vec![0u8; len];
            labels[stress] = 1;
            let example = EncodedExample {
                input: EncodedInput {
                    char_ids,
                    center_span: 0..len,
                    vowel_mask: vec![true; len],
                },
                labels,
            };
            let params = init_params::<f64>(&cfg, seed);
            let err = grad_check(
                &params,
                &example,
                &cfg,
                args.epsilon,
                args.samples,
                seed ^ 0x5A11,
            )?;
            println!("{head} seed {seed} len {len}: max rel error {err:.3e}");
            worst = worst.max(err);
        }
    }
    println!("max relative error over sweep: {worst:.3e}");
    if worst < TOLERANCE {
        println!("PASS (tolerance {TOLERANCE:.0e})");
        Ok(())
    } else {
        Err(CliError::numeric(format!(
            "gradient check failed: {worst:.3e} >= {TOLERANCE:.0e}"
        )))
    }
}
