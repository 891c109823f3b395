//! Exact-match scoring of predictions against the test split.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::oracle::oracle_answer;
use crate::taskgen::{Dataset, InstructionInstance};
use crate::word::Word;

/// Lines scored per rayon task.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("{predictions} predictions for {expected} test records")]
    SizeMismatch { predictions: usize, expected: usize },
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prediction {
    Word(Word),
    /// Not a word over `a`–`z`; scored as wrong and tallied separately.
    Invalid(String),
}

/// One prediction per line; `_` or an empty line is the empty word.
pub fn parse_predictions(text: &str) -> Vec<Prediction> {
    text.lines()
        .map(|raw| {
            let line = raw.trim();
            if line == "_" {
                return Prediction::Word(Word::empty());
            }
            match line.parse() {
                Ok(w) => Prediction::Word(w),
                Err(_) => Prediction::Invalid(raw.to_string()),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Cell {
    fn add(&mut self, hit: bool) {
        self.n += 1;
        self.correct += usize::from(hit);
    }

    fn merge(&mut self, other: &Cell) {
        self.n += other.n;
        self.correct += other.correct;
    }

    fn finish(&mut self) {
        self.accuracy = if self.n == 0 { 0.0 } else { self.correct as f64 / self.n as f64 };
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub overall: Cell,
    pub by_category: BTreeMap<String, Cell>,
    /// Partition name (`family`, `k`, `O`, `key`) to bucket value to cell.
    /// Instances without the annotation land in bucket `-`.
    pub by_bucket: BTreeMap<String, BTreeMap<String, Cell>>,
    pub invalid: usize,
}

fn buckets(inst: &InstructionInstance) -> [(&'static str, Option<String>); 4] {
    let m = &inst.meta;
    [
        ("family", m.family.map(|f| f.to_string())),
        ("k", m.k.map(|k| k.to_string())),
        ("O", m.occurrences.map(|o| o.to_string())),
        ("key", m.caesar_key.map(|k| k.to_string())),
    ]
}

impl EvalReport {
    fn record(&mut self, inst: &InstructionInstance, pred: &Prediction) {
        let hit = match pred {
            Prediction::Word(w) => *w == oracle_answer(inst),
            Prediction::Invalid(_) => {
                self.invalid += 1;
                false
            }
        };
        self.overall.add(hit);
        self.by_category.entry(inst.category.to_string()).or_default().add(hit);
        for (part, value) in buckets(inst) {
            let value = value.unwrap_or_else(|| "-".to_string());
            self.by_bucket.entry(part.to_string()).or_default().entry(value).or_default().add(hit);
        }
    }

    fn merge(mut self, other: EvalReport) -> EvalReport {
        self.overall.merge(&other.overall);
        self.invalid += other.invalid;
        for (k, c) in other.by_category {
            self.by_category.entry(k).or_default().merge(&c);
        }
        for (part, cells) in other.by_bucket {
            let mine = self.by_bucket.entry(part).or_default();
            for (k, c) in cells {
                mine.entry(k).or_default().merge(&c);
            }
        }
        self
    }

    fn finish(mut self) -> EvalReport {
        self.overall.finish();
        self.by_category.values_mut().for_each(Cell::finish);
        // drop partitions no instance is annotated with
        self.by_bucket.retain(|_, cells| cells.keys().any(|k| k != "-"));
        for cells in self.by_bucket.values_mut() {
            cells.values_mut().for_each(Cell::finish);
        }
        self
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let row = |s: &mut String, name: &str, c: &Cell| {
            writeln!(s, "{name:<16} {:>8} {:>8} {:>9.4}", c.n, c.correct, c.accuracy).unwrap();
        };
        writeln!(s, "{:<16} {:>8} {:>8} {:>9}", "cell", "n", "correct", "accuracy").unwrap();
        row(&mut s, "overall", &self.overall);
        for (k, c) in &self.by_category {
            row(&mut s, k, c);
        }
        for (part, cells) in &self.by_bucket {
            for (v, c) in cells {
                row(&mut s, &format!("{part}={v}"), c);
            }
        }
        writeln!(s, "invalid predictions: {}", self.invalid).unwrap();
        s
    }
}

/// Scores `predictions` line by line against the test split.
pub fn score(dataset: &Dataset, predictions: &[Prediction]) -> Result<EvalReport, ScoreError> {
    score_instances(&dataset.test, predictions)
}

pub fn score_instances(instances: &[InstructionInstance], predictions: &[Prediction]) -> Result<EvalReport, ScoreError> {
    if instances.len() != predictions.len() {
        return Err(ScoreError::SizeMismatch {
            predictions: predictions.len(),
            expected: instances.len(),
        });
    }
    let report = instances
        .par_chunks(CHUNK)
        .zip(predictions.par_chunks(CHUNK))
        .map(|(insts, preds)| {
            let mut r = EvalReport::default();
            for (i, p) in insts.iter().zip(preds) {
                r.record(i, p);
            }
            r
        })
        .reduce(EvalReport::default, EvalReport::merge);
    Ok(report.finish())
}
