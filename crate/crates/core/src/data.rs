//! Belief files: four TAB-separated columns `head relation tail mention`,
//! one belief per line, `#` comment lines skipped.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vocab::{EntityId, RelationId, Vocabulary, WordId};

/// A triple plus the bag of words observed between its entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Belief {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
    pub mention: Vec<WordId>,
}

impl Belief {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId, mention: Vec<WordId>) -> Self {
        Belief {
            head,
            relation,
            tail,
            mention,
        }
    }

    /// Same entities and mention, relation swapped for `relation`.
    pub fn with_relation(&self, relation: RelationId) -> Belief {
        Belief {
            relation,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub train: Vec<Belief>,
    pub valid: Vec<Belief>,
    pub test: Vec<Belief>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// Register unseen entities, relations and words.
    BuildVocab,
    /// Reject lines naming unseen entities or relations; drop unseen words.
    FrozenVocab,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    pub beliefs: Vec<Belief>,
    /// 1-based line numbers rejected in frozen mode.
    pub rejected_lines: Vec<usize>,
    /// Mention tokens dropped as out-of-vocabulary in frozen mode.
    pub dropped_words: usize,
}

impl ParseOutcome {
    pub fn rejected(&self) -> usize {
        self.rejected_lines.len()
    }
}

/// Lowercases and splits on whitespace runs. Punctuation and repeats are kept.
pub fn tokenize_mention(raw: &str) -> Vec<String> {
    raw.split_whitespace().map(str::to_lowercase).collect()
}

pub fn parse_belief_file(path: &Path, vocab: &mut Vocabulary, mode: ParseMode) -> Result<ParseOutcome> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_beliefs(BufReader::new(file), path, vocab, mode)
}

/// Parses belief lines from any reader; `origin` is used in error messages.
pub fn parse_beliefs<R: BufRead>(
    reader: R,
    origin: &Path,
    vocab: &mut Vocabulary,
    mode: ParseMode,
) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: line_no,
                message: format!("expected 4 tab-separated columns, found {}", cols.len()),
            });
        }
        let (head, relation, tail, mention) = (cols[0], cols[1], cols[2], cols[3]);
        let tokens = tokenize_mention(mention);
        match mode {
            ParseMode::BuildVocab => {
                let head = vocab.intern_entity(head);
                let relation = vocab.intern_relation(relation);
                let tail = vocab.intern_entity(tail);
                let mention = tokens.iter().map(|w| vocab.intern_word(w)).collect();
                out.beliefs.push(Belief::new(head, relation, tail, mention));
            }
            ParseMode::FrozenVocab => {
                let (Some(h), Some(r), Some(t)) = (vocab.entity(head), vocab.relation(relation), vocab.entity(tail))
                else {
                    out.rejected_lines.push(line_no);
                    continue;
                };
                let mut words = Vec::with_capacity(tokens.len());
                for token in &tokens {
                    match vocab.word(token) {
                        Some(w) => words.push(w),
                        None => out.dropped_words += 1,
                    }
                }
                out.beliefs.push(Belief::new(h, r, t, words));
            }
        }
    }
    Ok(out)
}

/// Renders a belief back into its four-column line (no trailing newline).
pub fn format_belief(belief: &Belief, vocab: &Vocabulary) -> Result<String> {
    let entity = |id: EntityId| {
        vocab.entity_name(id).ok_or(Error::Lookup {
            namespace: "entity",
            id: id.index(),
            len: vocab.num_entities(),
        })
    };
    let relation = vocab.relation_name(belief.relation).ok_or(Error::Lookup {
        namespace: "relation",
        id: belief.relation.index(),
        len: vocab.num_relations(),
    })?;
    let mut words = Vec::with_capacity(belief.mention.len());
    for &w in &belief.mention {
        words.push(vocab.word_name(w).ok_or(Error::Lookup {
            namespace: "word",
            id: w.index(),
            len: vocab.num_words(),
        })?);
    }
    Ok(format!(
        "{}\t{}\t{}\t{}",
        entity(belief.head)?,
        relation,
        entity(belief.tail)?,
        words.join(" ")
    ))
}

/// Counts in the layout of the usual dataset-statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DatasetStats {
    pub entities: usize,
    pub relations: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

pub fn dataset_stats(ds: &Dataset, vocab: &Vocabulary) -> DatasetStats {
    DatasetStats {
        entities: vocab.num_entities(),
        relations: vocab.num_relations(),
        train: ds.train.len(),
        valid: ds.valid.len(),
        test: ds.test.len(),
    }
}

fn grouped(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("#(ENTITIES)", self.entities),
            ("#(RELATIONS)", self.relations),
            ("#(TRAINING EX.)", self.train),
            ("#(VALIDATING EX.)", self.valid),
            ("#(TESTING EX.)", self.test),
        ];
        writeln!(f, "{:<20}{:>12}", "DATASET", "COUNT")?;
        for (label, n) in rows {
            writeln!(f, "{:<20}{:>12}", label, grouped(n))?;
        }
        Ok(())
    }
}
