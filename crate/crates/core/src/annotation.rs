//! Multiple-choice annotation tasks, unanimous-agreement aggregation, and
//! the JSON-lines dataset wire format.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::RawTrigram;
use crate::encoding::{strip_stress_marks, vowel_positions};
use crate::error::AnnotationError;
use crate::lang::{Lang, COMBINING_ACUTE};

/// A stress-annotated dataset entry: a word trigram plus the 1-based
/// character index of the stressed vowel in `word`. Empty `prev`/`next`
/// denote absent neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigram {
    pub prev: String,
    pub word: String,
    pub next: String,
    pub stress_pos: usize,
    #[serde(rename = "lang")]
    pub lang: Lang,
}

impl Trigram {
    /// Check the dataset invariants: stress_pos points at a vowel of the
    /// language and contexts carry no stress marks.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        let chars: Vec<char> = self.word.chars().collect();
        if self.stress_pos == 0 || self.stress_pos > chars.len() {
            return Err(AnnotationError::StressOutOfRange {
                entry: self.word.clone(),
                pos: self.stress_pos,
                word: self.word.clone(),
            });
        }
        let stressed = chars[self.stress_pos - 1];
        if !self.lang.is_vowel(stressed) {
            return Err(AnnotationError::StressNotVowel {
                entry: self.word.clone(),
                pos: self.stress_pos,
                word: self.word.clone(),
            });
        }
        for context in [&self.prev, &self.next] {
            if context.contains(COMBINING_ACUTE) {
                return Err(AnnotationError::MarkedContext {
                    entry: self.word.clone(),
                    word: context.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A multiple-choice task: one option per vowel of the (normalized) center
/// word, the i-th option uppercasing the i-th vowel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationTask {
    pub prev: String,
    pub word: String,
    pub next: String,
    pub lang: Lang,
    pub options: Vec<String>,
}

/// The three answers collected for one task (0-based option indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub task_id: String,
    pub answers: Vec<usize>,
}

/// A rejected task with its disagreement pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub word: String,
    pub answers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregationOutcome {
    Accepted(Trigram),
    Rejected(Rejection),
}

fn normalize(text: &str) -> String {
    strip_stress_marks(text).to_lowercase()
}

/// Build the annotation task for a trigram. Forms are stress-stripped and
/// lowercased first; option capitalization is purely a display device.
pub fn make_task(trigram: &RawTrigram, lang: Lang) -> Result<AnnotationTask, AnnotationError> {
    let word = normalize(&trigram.center.form);
    let vowels = vowel_positions(&word, lang);
    if vowels.is_empty() {
        return Err(AnnotationError::NoVowels(word));
    }
    let chars: Vec<char> = word.chars().collect();
    let options = vowels
        .iter()
        .map(|&pos| {
            chars
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    if i + 1 == pos {
                        c.to_uppercase().next().unwrap_or(c)
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    Ok(AnnotationTask {
        prev: trigram
            .prev
            .as_ref()
            .map(|t| normalize(&t.form))
            .unwrap_or_default(),
        word,
        next: trigram
            .next
            .as_ref()
            .map(|t| normalize(&t.form))
            .unwrap_or_default(),
        lang,
        options,
    })
}

/// Apply the unanimity rule: accept iff all three answers pick the same
/// option, in which case the stress lands on that vowel's character index.
pub fn aggregate(
    task: &AnnotationTask,
    answers: &AnswerSet,
) -> Result<AggregationOutcome, AnnotationError> {
    if answers.answers.len() != 3 {
        return Err(AnnotationError::AnswerCount(answers.answers.len()));
    }
    for &a in &answers.answers {
        if a >= task.options.len() {
            return Err(AnnotationError::AnswerOutOfRange {
                index: a,
                options: task.options.len(),
            });
        }
    }
    let first = answers.answers[0];
    if answers.answers.iter().any(|&a| a != first) {
        return Ok(AggregationOutcome::Rejected(Rejection {
            word: task.word.clone(),
            answers: answers.answers.clone(),
        }));
    }
    let vowels = vowel_positions(&task.word, task.lang);
    let trigram = Trigram {
        prev: task.prev.clone(),
        word: task.word.clone(),
        next: task.next.clone(),
        stress_pos: vowels[first],
        lang: task.lang,
    };
    Ok(AggregationOutcome::Accepted(trigram))
}

/// Write the dataset as JSON lines, validating every entry. Returns the
/// number of records written.
pub fn emit_dataset<W: Write>(entries: &[Trigram], mut sink: W) -> Result<usize, AnnotationError> {
    for entry in entries {
        entry.validate()?;
        let line = serde_json::to_string(entry).expect("trigram serializes");
        writeln!(sink, "{line}")?;
    }
    Ok(entries.len())
}

/// Inverse of [`emit_dataset`]; invariants are re-validated per line.
pub fn load_dataset<R: BufRead>(reader: R) -> Result<Vec<Trigram>, AnnotationError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: Trigram =
            serde_json::from_str(&line).map_err(|source| AnnotationError::Malformed {
                line: i + 1,
                source,
            })?;
        entry
            .validate()
            .map_err(|source| AnnotationError::InvalidEntry {
                line: i + 1,
                source: Box::new(source),
            })?;
        out.push(entry);
    }
    Ok(out)
}

/// One line of the task export file, ready for a crowdsourcing platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: String,
    pub prev: String,
    pub word: String,
    pub next: String,
    pub options: Vec<String>,
}

impl TaskRecord {
    pub fn into_task(self, lang: Lang) -> AnnotationTask {
        AnnotationTask {
            prev: self.prev,
            word: self.word,
            next: self.next,
            lang,
            options: self.options,
        }
    }
}

/// Export tasks as JSON lines with sequential ids (`t000000`, `t000001`, ...).
pub fn export_tasks<W: Write>(
    tasks: &[AnnotationTask],
    mut sink: W,
) -> Result<usize, AnnotationError> {
    for (i, task) in tasks.iter().enumerate() {
        let record = TaskRecord {
            task_id: format!("t{i:06}"),
            prev: task.prev.clone(),
            word: task.word.clone(),
            next: task.next.clone(),
            options: task.options.clone(),
        };
        let line = serde_json::to_string(&record).expect("task serializes");
        writeln!(sink, "{line}")?;
    }
    Ok(tasks.len())
}

pub fn load_task_records<R: BufRead>(reader: R) -> Result<Vec<TaskRecord>, AnnotationError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TaskRecord =
            serde_json::from_str(&line).map_err(|source| AnnotationError::Malformed {
                line: i + 1,
                source,
            })?;
        out.push(record);
    }
    Ok(out)
}

/// Answer file: one `{"task_id": ..., "answers": [a, b, c]}` object per line.
pub fn load_answers<R: BufRead>(reader: R) -> Result<Vec<AnswerSet>, AnnotationError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let answers: AnswerSet =
            serde_json::from_str(&line).map_err(|source| AnnotationError::Malformed {
                line: i + 1,
                source,
            })?;
        out.push(answers);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::conllu::{Token, Upos};

    fn raw(prev: Option<&str>, center: &str, next: Option<&str>) -> RawTrigram {
        let tok = |form: &str, index| Token {
            form: form.to_string(),
            upos: Upos::NOUN,
            index,
        };
        RawTrigram {
            prev: prev.map(|f| tok(f, 1)),
            center: tok(center, 2),
            next: next.map(|f| tok(f, 3)),
        }
    }

    #[test]
    fn options_capitalize_each_vowel_in_order() {
        let task = make_task(&raw(Some("белая"), "ворона", Some("летит")), Lang::Ru).unwrap();
        assert_eq!(task.options, vec!["вОрона", "ворОна", "воронА"]);
    }

    #[test]
    fn single_vowel_word_has_one_option() {
        let task = make_task(&raw(None, "тит", None), Lang::Ru).unwrap();
        assert_eq!(task.options, vec!["тИт"]);
    }

    #[test]
    fn vowelless_word_is_an_error() {
        assert!(matches!(
            make_task(&raw(None, "в", None), Lang::Ru),
            Err(AnnotationError::NoVowels(_))
        ));
    }

    #[test]
    fn options_differ_from_word_in_exactly_one_vowel_case() {
        let task = make_task(&raw(Some("Бе́лая"), "Воро́на", None), Lang::Ru).unwrap();
        assert_eq!(task.word, "ворона");
        assert_eq!(task.prev, "белая");
        for opt in &task.options {
            let diffs: Vec<(char, char)> = task
                .word
                .chars()
                .zip(opt.chars())
                .filter(|(a, b)| a != b)
                .collect();
            assert_eq!(diffs.len(), 1);
            let (orig, upper) = diffs[0];
            assert!(Lang::Ru.is_vowel(orig));
            assert_eq!(orig.to_uppercase().next().unwrap(), upper);
        }
    }

    fn answer(ids: &[usize]) -> AnswerSet {
        AnswerSet {
            task_id: "t000000".into(),
            answers: ids.to_vec(),
        }
    }

    #[test]
    fn unanimous_answers_place_stress_on_the_chosen_vowel() {
        let task = make_task(&raw(Some("белая"), "ворона", Some("летит")), Lang::Ru).unwrap();
        match aggregate(&task, &answer(&[1, 1, 1])).unwrap() {
            AggregationOutcome::Accepted(t) => {
                // vowels of "ворона" sit at characters 2, 4, 6
                assert_eq!(t.stress_pos, 4);
                assert_eq!(t.word, "ворона");
                t.validate().unwrap();
            }
            other => panic!("expected acceptance, got {other:?}"),
        }
    }

    #[test]
    fn disagreement_is_rejected_with_its_pattern() {
        let task = make_task(&raw(None, "ворона", None), Lang::Ru).unwrap();
        match aggregate(&task, &answer(&[1, 1, 2])).unwrap() {
            AggregationOutcome::Rejected(r) => assert_eq!(r.answers, vec![1, 1, 2]),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn single_option_task_is_always_unanimous() {
        let task = make_task(&raw(None, "тит", None), Lang::Ru).unwrap();
        match aggregate(&task, &answer(&[0, 0, 0])).unwrap() {
            AggregationOutcome::Accepted(t) => assert_eq!(t.stress_pos, 2),
            other => panic!("expected acceptance, got {other:?}"),
        }
    }

    #[test]
    fn wrong_answer_count_is_an_error() {
        let task = make_task(&raw(None, "тит", None), Lang::Ru).unwrap();
        assert!(matches!(
            aggregate(&task, &answer(&[0, 0])),
            Err(AnnotationError::AnswerCount(2))
        ));
        assert!(matches!(
            aggregate(&task, &answer(&[0, 0, 0, 0])),
            Err(AnnotationError::AnswerCount(4))
        ));
    }

    #[test]
    fn out_of_range_answer_is_an_error() {
        let task = make_task(&raw(None, "тит", None), Lang::Ru).unwrap();
        assert!(matches!(
            aggregate(&task, &answer(&[0, 1, 0])),
            Err(AnnotationError::AnswerOutOfRange {
                index: 1,
                options: 1
            })
        ));
    }

    #[test]
    fn aggregation_accepts_exactly_the_unanimous_triples() {
        for options in 1..=9usize {
            let word = "та".repeat(options);
            let task = make_task(&raw(None, &word, None), Lang::Ru).unwrap();
            assert_eq!(task.options.len(), options);
            for a in 0..options {
                for b in 0..options {
                    for c in 0..options {
                        let outcome = aggregate(&task, &answer(&[a, b, c])).unwrap();
                        let unanimous = a == b && b == c;
                        match outcome {
                            AggregationOutcome::Accepted(_) => assert!(unanimous),
                            AggregationOutcome::Rejected(_) => assert!(!unanimous),
                        }
                    }
                }
            }
        }
    }

    fn sample_entry() -> Trigram {
        Trigram {
            prev: "белая".into(),
            word: "ворона".into(),
            next: "летит".into(),
            stress_pos: 4,
            lang: Lang::Ru,
        }
    }

    #[test]
    fn empty_dataset_writes_no_lines() {
        let mut buf = Vec::new();
        assert_eq!(emit_dataset(&[], &mut buf).unwrap(), 0);
        assert!(buf.is_empty());
    }

    #[test]
    fn dataset_round_trips() {
        let entries = vec![
            sample_entry(),
            Trigram {
                prev: String::new(),
                word: "тит".into(),
                next: "он".into(),
                stress_pos: 2,
                lang: Lang::Ru,
            },
        ];
        let mut buf = Vec::new();
        assert_eq!(emit_dataset(&entries, &mut buf).unwrap(), 2);
        let loaded = load_dataset(buf.as_slice()).unwrap();
        assert_eq!(loaded, entries);
    }

    #[test]
    fn stress_on_consonant_is_rejected_by_emit() {
        let bad = Trigram {
            stress_pos: 3, // "р"
            ..sample_entry()
        };
        let err = emit_dataset(&[bad], &mut Vec::new()).unwrap_err();
        assert!(matches!(
            err,
            AnnotationError::StressNotVowel { pos: 3, .. }
        ));
    }

    #[test]
    fn load_reports_line_numbers() {
        let text = "{\"prev\":\"\",\"word\":\"тит\",\"next\":\"\",\"stress_pos\":2,\"lang\":\"ru\"}\nне json\n";
        match load_dataset(text.as_bytes()) {
            Err(AnnotationError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-line error, got {other:?}"),
        }
    }

    #[test]
    fn loaded_entries_are_revalidated_with_line_numbers() {
        let good =
            "{\"prev\":\"\",\"word\":\"тит\",\"next\":\"\",\"stress_pos\":2,\"lang\":\"ru\"}";
        let bad = "{\"prev\":\"\",\"word\":\"тит\",\"next\":\"\",\"stress_pos\":1,\"lang\":\"ru\"}";
        let text = format!("{good}\n{bad}\n");
        match load_dataset(text.as_bytes()) {
            Err(AnnotationError::InvalidEntry { line, source }) => {
                assert_eq!(line, 2);
                assert!(matches!(
                    *source,
                    AnnotationError::StressNotVowel { pos: 1, .. }
                ));
            }
            other => panic!("expected invalid-entry error, got {other:?}"),
        }
    }

    #[test]
    fn task_export_round_trips_with_sequential_ids() {
        let tasks = vec![
            make_task(&raw(Some("белая"), "ворона", Some("летит")), Lang::Ru).unwrap(),
            make_task(&raw(None, "тит", None), Lang::Ru).unwrap(),
        ];
        let mut buf = Vec::new();
        export_tasks(&tasks, &mut buf).unwrap();
        let records = load_task_records(buf.as_slice()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].task_id, "t000000");
        assert_eq!(records[1].task_id, "t000001");
        assert_eq!(records[0].clone().into_task(Lang::Ru), tasks[0]);
    }
}
