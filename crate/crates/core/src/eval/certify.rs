//! Whole-dataset soundness checks.
//!
//! Every label is recomputed by the string oracle, every category and
//! occurrence annotation is recounted, and family annotations are checked by
//! brute force. File digests are verified earlier, when the dataset is read.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::oracle::{family_member, naive_count, naive_find, oracle_answer};
use crate::taskgen::{census_of, Category, Dataset, InstructionInstance, KRange, TaskKind};
use crate::word::LETTERS;

/// Examples kept per finding kind; the counts are always complete.
const KEEP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    Label,
    Category,
    Occurrences,
    Family,
    KRange,
    Key,
    InputLength,
    Rule,
    SplitOverlap,
    Census,
    Size,
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        f.write_str(s.as_str().unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    /// `train` / `test` and 1-based record line, when tied to one record.
    pub split: Option<&'static str>,
    pub line: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.split, self.line) {
            (Some(s), Some(l)) => write!(f, "{s}:{l}: {}: {}", self.kind, self.detail),
            _ => write!(f, "{}: {}", self.kind, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertifyReport {
    pub train_records: usize,
    pub test_records: usize,
    pub counts: BTreeMap<FindingKind, usize>,
    pub examples: Vec<Finding>,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, kind: FindingKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    fn push(&mut self, f: Finding) {
        let n = self.counts.entry(f.kind).or_insert(0);
        *n += 1;
        if *n <= KEEP {
            self.examples.push(f);
        }
    }
}

fn check_instance(spec_task: TaskKind, input_len: usize, krange: KRange, inst: &InstructionInstance) -> Vec<(FindingKind, String)> {
    let mut out = Vec::new();
    let lhs = inst.rule.lhs.to_string();
    let rhs = inst.rule.rhs.to_string();
    let input = inst.input.to_string();

    if lhs.is_empty() || lhs == rhs || inst.rule.is_stop {
        out.push((FindingKind::Rule, format!("degenerate rule {}", inst.rule)));
        return out;
    }
    if inst.input.len() != input_len {
        out.push((FindingKind::InputLength, format!("input length {} != {input_len}", inst.input.len())));
    }

    let expected = oracle_answer(inst);
    if expected != inst.expected {
        out.push((FindingKind::Label, format!("stored `{}`, oracle `{expected}`", inst.expected)));
    }

    let present = naive_find(input.as_bytes(), lhs.as_bytes()).is_some();
    if present != (inst.category == Category::Op) {
        out.push((FindingKind::Category, format!("labelled {} but lhs present = {present}", inst.category)));
    }
    if let Some(o) = inst.meta.occurrences {
        let n = naive_count(input.as_bytes(), lhs.as_bytes());
        if n != o {
            out.push((FindingKind::Occurrences, format!("annotated O={o}, recounted {n}")));
        }
    }

    match (inst.meta.family, inst.meta.k) {
        (Some(f), Some(k)) => {
            if !family_member(lhs.as_bytes(), f, k) || !family_member(rhs.as_bytes(), f, k) {
                out.push((FindingKind::Family, format!("{} is not {f} with k={k}", inst.rule)));
            }
            if k < krange.lo || k > krange.hi {
                out.push((FindingKind::KRange, format!("k={k} outside {krange}")));
            }
        }
        (None, None) if spec_task != TaskKind::SemanticFamilies => {}
        _ => out.push((FindingKind::Family, "family annotation missing or partial".into())),
    }

    match inst.meta.caesar_key {
        Some(k) if spec_task == TaskKind::Encrypted && k < LETTERS => {}
        None if spec_task != TaskKind::Encrypted => {}
        Some(k) => out.push((FindingKind::Key, format!("unexpected key {k}"))),
        None => out.push((FindingKind::Key, "missing key".into())),
    }
    out
}

fn check_split(report: &mut CertifyReport, dataset: &Dataset, name: &'static str, instances: &[InstructionInstance], krange: KRange) {
    let spec = &dataset.spec;
    let found: Vec<(usize, Vec<(FindingKind, String)>)> = instances
        .par_iter()
        .enumerate()
        .filter_map(|(i, inst)| {
            let f = check_instance(spec.task, spec.input_len, krange, inst);
            (!f.is_empty()).then_some((i, f))
        })
        .collect();
    for (i, fs) in found {
        for (kind, detail) in fs {
            report.push(Finding {
                kind,
                split: Some(name),
                line: Some(i + 1),
                detail,
            });
        }
    }
}

pub fn certify_dataset(dataset: &Dataset) -> CertifyReport {
    let spec = &dataset.spec;
    let mut report = CertifyReport {
        train_records: dataset.train.len(),
        test_records: dataset.test.len(),
        ..CertifyReport::default()
    };

    check_split(&mut report, dataset, "train", &dataset.train, spec.train_k);
    check_split(&mut report, dataset, "test", &dataset.test, spec.test_k);

    let train_rules: HashSet<_> = dataset.train.iter().map(|i| &*i.rule).collect();
    let overlap: HashSet<_> = dataset.test.iter().map(|i| &*i.rule).filter(|r| train_rules.contains(r)).collect();
    for r in overlap {
        report.push(Finding {
            kind: FindingKind::SplitOverlap,
            split: None,
            line: None,
            detail: format!("rule {r} appears in both splits"),
        });
    }

    if census_of(&dataset.train) != dataset.instruction_census {
        report.push(Finding {
            kind: FindingKind::Census,
            split: None,
            line: None,
            detail: "instruction census does not match the training records".into(),
        });
    }
    if dataset.instruction_census.len() > spec.num_instructions {
        report.push(Finding {
            kind: FindingKind::Census,
            split: None,
            line: None,
            detail: format!("{} distinct training rules, spec allows {}", dataset.instruction_census.len(), spec.num_instructions),
        });
    }

    for (name, got, want) in [("train", dataset.train.len(), spec.train_total()), ("test", dataset.test.len(), spec.test_size)] {
        if got != want {
            report.push(Finding {
                kind: FindingKind::Size,
                split: Some(name),
                line: None,
                detail: format!("{got} records, spec asks for {want}"),
            });
        }
    }
    report
}
