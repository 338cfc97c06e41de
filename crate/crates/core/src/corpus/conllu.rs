//! CoNLL-U ingestion: tab-separated 10-column sentences, `#` comments,
//! blank-line separators. Multiword range lines (`3-4`) and empty nodes
//! (`5.1`) carry no surface token of their own and are skipped.

use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CorpusError;

/// The Universal Dependencies POS tag set, plus the `_` placeholder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Upos {
    ADJ,
    ADP,
    ADV,
    AUX,
    CCONJ,
    DET,
    INTJ,
    NOUN,
    NUM,
    PART,
    PRON,
    PROPN,
    PUNCT,
    SCONJ,
    SYM,
    VERB,
    X,
    /// Underscore placeholder (tag not annotated).
    Underscore,
}

impl FromStr for Upos {
    type Err = ();

    fn from_str(value: &str) -> Result<Self, Self::Err> {
        use Upos::*;
        match value {
            "ADJ" => Ok(ADJ),
            "ADP" => Ok(ADP),
            "ADV" => Ok(ADV),
            "AUX" => Ok(AUX),
            "CCONJ" => Ok(CCONJ),
            "DET" => Ok(DET),
            "INTJ" => Ok(INTJ),
            "NOUN" => Ok(NOUN),
            "NUM" => Ok(NUM),
            "PART" => Ok(PART),
            "PRON" => Ok(PRON),
            "PROPN" => Ok(PROPN),
            "PUNCT" => Ok(PUNCT),
            "SCONJ" => Ok(SCONJ),
            "SYM" => Ok(SYM),
            "VERB" => Ok(VERB),
            "X" => Ok(X),
            "_" => Ok(Underscore),
            _ => Err(()),
        }
    }
}

/// A surface token: FORM, UPOS and its 1-based position in the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    pub upos: Upos,
    pub index: usize,
}

pub type Sentence = Vec<Token>;

/// Streaming CoNLL-U reader yielding one sentence per block.
///
/// A malformed line yields a recoverable `Err` carrying its line number;
/// the rest of that sentence block is skipped and parsing resumes at the
/// next blank line.
pub struct ConlluSentences<R: BufRead> {
    reader: R,
    line_no: usize,
    done: bool,
}

impl<R: BufRead> ConlluSentences<R> {
    pub fn new(reader: R) -> Self {
        ConlluSentences {
            reader,
            line_no: 0,
            done: false,
        }
    }

    fn next_line(&mut self) -> Option<Result<String, std::io::Error>> {
        let mut buf = String::new();
        match self.reader.read_line(&mut buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                while buf.ends_with('\n') || buf.ends_with('\r') {
                    buf.pop();
                }
                Some(Ok(buf))
            }
            Err(e) => Some(Err(e)),
        }
    }

    /// Consume lines until the end of the current sentence block.
    fn skip_block(&mut self) {
        loop {
            match self.next_line() {
                None => {
                    self.done = true;
                    return;
                }
                Some(Ok(line)) if line.trim().is_empty() => return,
                Some(_) => continue,
            }
        }
    }
}

impl<R: BufRead> Iterator for ConlluSentences<R> {
    type Item = Result<Sentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut tokens: Sentence = Vec::new();
        loop {
            let line = match self.next_line() {
                None => {
                    self.done = true;
                    if tokens.is_empty() {
                        return None;
                    }
                    return Some(Ok(tokens));
                }
                Some(Ok(line)) => line,
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            };
            if line.trim().is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                return Some(Ok(tokens));
            }
            if line.starts_with('#') {
                continue;
            }
            match parse_token_line(&line, self.line_no) {
                Ok(Some(token)) => tokens.push(token),
                Ok(None) => continue, // range line or empty node
                Err(e) => {
                    self.skip_block();
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Parse one token line. Returns `Ok(None)` for multiword range lines and
/// empty nodes.
fn parse_token_line(line: &str, line_no: usize) -> Result<Option<Token>, CorpusError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(CorpusError::ColumnCount {
            line: line_no,
            found: cols.len(),
        });
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let index: usize = id.parse().map_err(|_| CorpusError::BadTokenId {
        line: line_no,
        id: id.to_string(),
    })?;
    let form = cols[1];
    if form.is_empty() {
        return Err(CorpusError::EmptyForm { line: line_no });
    }
    let upos = cols[3].parse().map_err(|_| CorpusError::BadUpos {
        line: line_no,
        tag: cols[3].to_string(),
    })?;
    Ok(Some(Token {
        form: form.to_string(),
        upos,
        index,
    }))
}

/// Parse a whole stream into sentences.
pub fn parse_conllu<R: BufRead>(reader: R) -> ConlluSentences<R> {
    ConlluSentences::new(reader)
}
