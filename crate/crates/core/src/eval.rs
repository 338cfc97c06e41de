//! Accuracy evaluation stratified by vowel count and homograph status, and
//! the mono-/cross-lingual experiment matrix with repeated seeded splits.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::Trigram;
use crate::encoding::{strip_stress_marks, vowel_positions};
use crate::error::EvalError;
use crate::lang::Lang;
use crate::models::{predict_stress, train, TrainedModel};
use crate::neuro::ModelConfig;

/// Accuracy and support of one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumStats {
    pub accuracy: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomographReport {
    pub accuracy: f64,
    pub support: usize,
    pub by_vowel_count: BTreeMap<usize, StratumStats>,
}

/// Evaluation result for one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub overall_accuracy: f64,
    pub by_vowel_count: BTreeMap<usize, StratumStats>,
    /// Present when the test set contains homographs (forms attested with
    /// two or more stress positions within the evaluated dataset).
    pub homographs: Option<HomographReport>,
    pub n_test: usize,
    pub seed: u64,
    pub config: ModelConfig,
}

/// Center-word forms occurring with two or more distinct stress positions.
/// Forms are compared lowercased and stress-stripped.
pub fn find_homographs(dataset: &[Trigram]) -> BTreeSet<String> {
    let mut stresses: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for entry in dataset {
        let form = strip_stress_marks(&entry.word).to_lowercase();
        stresses.entry(form).or_default().insert(entry.stress_pos);
    }
    stresses
        .into_iter()
        .filter(|(_, positions)| positions.len() >= 2)
        .map(|(form, _)| form)
        .collect()
}

struct StratumAccumulator {
    correct: usize,
    total: usize,
    by_vowel_count: BTreeMap<usize, (usize, usize)>,
}

impl StratumAccumulator {
    fn new() -> Self {
        StratumAccumulator {
            correct: 0,
            total: 0,
            by_vowel_count: BTreeMap::new(),
        }
    }

    fn record(&mut self, vowel_count: usize, correct: bool) {
        self.total += 1;
        let cell = self.by_vowel_count.entry(vowel_count).or_insert((0, 0));
        cell.1 += 1;
        if correct {
            self.correct += 1;
            cell.0 += 1;
        }
    }

    fn strata(&self) -> BTreeMap<usize, StratumStats> {
        self.by_vowel_count
            .iter()
            .map(|(&k, &(c, n))| {
                (
                    k,
                    StratumStats {
                        accuracy: c as f64 / n as f64,
                        support: n,
                    },
                )
            })
            .collect()
    }

    fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Evaluate an arbitrary predictor. `None` from the predictor means the
/// entry could not be handled and counts as incorrect (never dropped).
pub fn accuracy_by<F>(
    mut predictor: F,
    test_set: &[Trigram],
    config: &ModelConfig,
) -> Result<MetricsReport, EvalError>
where
    F: FnMut(&Trigram) -> Option<usize>,
{
    if test_set.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let homograph_forms = find_homographs(test_set);
    let mut all = StratumAccumulator::new();
    let mut homographs = StratumAccumulator::new();
    for entry in test_set {
        let vowel_count = vowel_positions(&entry.word, entry.lang).len();
        let correct = predictor(entry) == Some(entry.stress_pos);
        all.record(vowel_count, correct);
        let form = strip_stress_marks(&entry.word).to_lowercase();
        if homograph_forms.contains(&form) {
            homographs.record(vowel_count, correct);
        }
    }
    let homographs = (homographs.total > 0).then(|| HomographReport {
        accuracy: homographs.accuracy(),
        support: homographs.total,
        by_vowel_count: homographs.strata(),
    });
    Ok(MetricsReport {
        overall_accuracy: all.accuracy(),
        by_vowel_count: all.strata(),
        homographs,
        n_test: test_set.len(),
        seed: config.seed,
        config: config.clone(),
    })
}

/// Evaluate a trained model: an entry counts as correct iff the prediction
/// equals its `stress_pos` exactly.
pub fn accuracy(model: &TrainedModel, test_set: &[Trigram]) -> Result<MetricsReport, EvalError> {
    accuracy_by(
        |t| predict_stress(model, &t.prev, &t.word, &t.next, t.lang).ok(),
        test_set,
        &model.config,
    )
}

/// Mean/std accuracy of one (train combo, test language) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// Result of the mono-/cross-lingual experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMatrix {
    /// Train combos, in row order.
    pub combos: Vec<Vec<Lang>>,
    /// Test languages, in column order.
    pub test_langs: Vec<Lang>,
    /// Per-run accuracies keyed by `(combo key, test language)`.
    pub cells: BTreeMap<String, CellStats>,
    pub runs: usize,
    pub base_seed: u64,
    pub split: (u32, u32),
    pub config: ModelConfig,
}

/// Canonical cell key: combo tags joined by `+`, then `->`, then the test
/// language tag.
pub fn cell_key(combo: &[Lang], test: Lang) -> String {
    let mut tags: Vec<&str> = combo.iter().map(|l| l.tag()).collect();
    tags.sort_unstable();
    format!("{}->{}", tags.join("+"), test.tag())
}

impl ExperimentMatrix {
    pub fn cell(&self, combo: &[Lang], test: Lang) -> Option<&CellStats> {
        self.cells.get(&cell_key(combo, test))
    }
}

/// All seven non-empty train-set combinations of the three languages, in
/// presentation order.
pub fn default_combos() -> Vec<Vec<Lang>> {
    vec![
        vec![Lang::Be],
        vec![Lang::Ru],
        vec![Lang::Uk],
        vec![Lang::Uk, Lang::Be],
        vec![Lang::Ru, Lang::Be],
        vec![Lang::Ru, Lang::Uk],
        vec![Lang::Ru, Lang::Uk, Lang::Be],
    ]
}

/// Shuffle a dataset with the given seed and split off the first
/// `train_fraction` as the training part.
pub fn split_dataset(
    data: &[Trigram],
    train_fraction: f64,
    seed: u64,
) -> (Vec<Trigram>, Vec<Trigram>) {
    let mut entries: Vec<Trigram> = data.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    entries.shuffle(&mut rng);
    let train_len = ((entries.len() as f64) * train_fraction).round() as usize;
    let test = entries.split_off(train_len.min(entries.len()));
    (entries, test)
}

/// Per-language train/test index folds for one run. One shuffle stream per
/// run, consumed in sorted-language order, so every combo within the run
/// sees identical folds.
fn language_folds(
    sizes: &BTreeMap<Lang, usize>,
    run_seed: u64,
    split: (u32, u32),
) -> BTreeMap<Lang, (Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let mut folds = BTreeMap::new();
    for (&lang, &n) in sizes {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        let train_len = (n as u64 * split.0 as u64 / (split.0 + split.1) as u64) as usize;
        let test = indices.split_off(train_len);
        folds.insert(lang, (indices, test));
    }
    folds
}

fn combo_mask(combo: &[Lang]) -> u64 {
    combo.iter().map(|&l| 1u64 << (l as u64)).sum()
}

/// Run the experiment grid: for every run, each language's dataset is
/// split `split.0 : split.1` (folds shared across combos within the run);
/// each combo trains on the shuffled union of its members' train folds and
/// is evaluated on every language's test fold. Cell scores are averaged
/// over runs. Run seeds are `config.seed + run_index`.
pub fn run_experiment_matrix(
    datasets: &BTreeMap<Lang, Vec<Trigram>>,
    combos: &[Vec<Lang>],
    config: &ModelConfig,
    runs: usize,
    split: (u32, u32),
) -> Result<ExperimentMatrix, EvalError> {
    for combo in combos {
        if combo.is_empty() {
            return Err(EvalError::EmptyCombo);
        }
        for lang in combo {
            if !datasets.contains_key(lang) {
                return Err(EvalError::MissingLanguage(lang.tag().to_string()));
            }
        }
    }
    let sizes: BTreeMap<Lang, usize> = datasets.iter().map(|(&l, d)| (l, d.len())).collect();
    let test_langs: Vec<Lang> = datasets.keys().copied().collect();

    // all (run, combo) cells are independent; fold computation is cheap and
    // repeated inside each cell
    let jobs: Vec<(usize, usize)> = (0..runs)
        .flat_map(|run| (0..combos.len()).map(move |c| (run, c)))
        .collect();
    let results: Result<Vec<_>, EvalError> = jobs
        .par_iter()
        .map(|&(run, combo_idx)| {
            let combo = &combos[combo_idx];
            let run_seed = config.seed.wrapping_add(run as u64);
            let folds = language_folds(&sizes, run_seed, split);
            let mut union: Vec<Trigram> = Vec::new();
            for lang in folds.keys() {
                if combo.contains(lang) {
                    let (train_idx, _) = &folds[lang];
                    union.extend(train_idx.iter().map(|&i| datasets[lang][i].clone()));
                }
            }
            let mut union_rng = ChaCha8Rng::seed_from_u64(run_seed ^ (combo_mask(combo) << 20));
            union.shuffle(&mut union_rng);
            let mut cell_config = config.clone();
            cell_config.seed = run_seed;
            let model = train(&cell_config, &union, None)?;
            let mut scores = Vec::new();
            for &test_lang in &test_langs {
                let (_, test_idx) = &folds[&test_lang];
                let test_fold: Vec<Trigram> = test_idx
                    .iter()
                    .map(|&i| datasets[&test_lang][i].clone())
                    .collect();
                let report = accuracy(&model, &test_fold)?;
                scores.push((test_lang, report.overall_accuracy));
            }
            Ok((combo_idx, scores))
        })
        .collect();

    let mut per_cell: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (combo_idx, scores) in results? {
        for (test_lang, acc) in scores {
            per_cell
                .entry(cell_key(&combos[combo_idx], test_lang))
                .or_default()
                .push(acc);
        }
    }
    let cells = per_cell
        .into_iter()
        .map(|(key, accs)| {
            let n = accs.len();
            let mean = accs.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            (key, CellStats { mean, std, runs: n })
        })
        .collect();
    Ok(ExperimentMatrix {
        combos: combos.to_vec(),
        test_langs,
        cells,
        runs,
        base_seed: config.seed,
        split,
        config: config.clone(),
    })
}

/// Output formats for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

fn combo_label(combo: &[Lang]) -> String {
    combo.iter().map(|l| l.tag()).collect::<Vec<_>>().join(",")
}

/// Render the matrix: an aligned text table with accuracies x1000, or the
/// full JSON document.
pub fn render_matrix(matrix: &ExperimentMatrix, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(matrix).expect("matrix serializes"),
        ReportFormat::Text => {
            let label_width = matrix
                .combos
                .iter()
                .map(|c| combo_label(c).len())
                .max()
                .unwrap_or(0)
                .max("train \\ test".len())
                + 2;
            let mut out = String::new();
            out.push_str(&format!("{:<label_width$}", "train \\ test"));
            for lang in &matrix.test_langs {
                out.push_str(&format!("{:>8}", lang.tag()));
            }
            out.push('\n');
            for combo in &matrix.combos {
                out.push_str(&format!("{:<label_width$}", combo_label(combo)));
                for &test in &matrix.test_langs {
                    match matrix.cell(combo, test) {
                        Some(stats) => {
                            out.push_str(&format!("{:>8}", (stats.mean * 1000.0).round() as i64))
                        }
                        None => out.push_str(&format!("{:>8}", "-")),
                    }
                }
                out.push('\n');
            }
            out.push_str(&format!(
                "accuracy x1000, mean over {} run(s), split {}:{}, base seed {}\n",
                matrix.runs, matrix.split.0, matrix.split.1, matrix.base_seed
            ));
            out
        }
    }
}

/// Render a single-model report: text summary or JSON.
pub fn render_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "overall accuracy: {:.4} ({} entries) [{}]\n",
                report.overall_accuracy,
                report.n_test,
                (report.overall_accuracy * 1000.0).round() as i64
            ));
            out.push_str("vowels  accuracy  x1000  support\n");
            for (count, stats) in &report.by_vowel_count {
                out.push_str(&format!(
                    "{:>6}  {:>8.4}  {:>5}  {:>7}\n",
                    count,
                    stats.accuracy,
                    (stats.accuracy * 1000.0).round() as i64,
                    stats.support
                ));
            }
            if let Some(h) = &report.homographs {
                out.push_str(&format!(
                    "homographs: accuracy {:.4} [{}] over {} entries\n",
                    h.accuracy,
                    (h.accuracy * 1000.0).round() as i64,
                    h.support
                ));
                for (count, stats) in &h.by_vowel_count {
                    out.push_str(&format!(
                        "{:>6}  {:>8.4}  {:>5}  {:>7}\n",
                        count,
                        stats.accuracy,
                        (stats.accuracy * 1000.0).round() as i64,
                        stats.support
                    ));
                }
            }
            out
        }
    }
}
