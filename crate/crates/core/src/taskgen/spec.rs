//! Declarative dataset recipes and their flat `key = value` text form.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use super::Family;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SpecError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl SpecError {
    fn at(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        SpecError {
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn field(key: &str, message: impl Into<String>) -> Self {
        SpecError::at(None, key, message)
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// Every instance applies its rule (task 1).
    Replace,
    /// A fraction of instances cannot apply their rule (task 2).
    NoOpMix,
    /// Rules drawn from structurally constrained families.
    SemanticFamilies,
    /// Inputs hold a controlled number of lhs copies.
    OccurrenceControl,
    /// The replacement is Caesar-shifted by a per-instance key.
    Encrypted,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Replace => "replace",
            TaskKind::NoOpMix => "noop_mix",
            TaskKind::SemanticFamilies => "semantic",
            TaskKind::OccurrenceControl => "occurrence",
            TaskKind::Encrypted => "encrypted",
        }
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "replace" => TaskKind::Replace,
            "noop_mix" => TaskKind::NoOpMix,
            "semantic" => TaskKind::SemanticFamilies,
            "occurrence" => TaskKind::OccurrenceControl,
            "encrypted" => TaskKind::Encrypted,
            other => return Err(format!("unknown task `{other}`")),
        })
    }
}

/// Inclusive range of the family parameter `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KRange {
    pub lo: u32,
    pub hi: u32,
}

impl KRange {
    pub fn new(lo: u32, hi: u32) -> Self {
        KRange { lo, hi }
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad k `{t}`"));
        match s.split_once("..") {
            Some((a, b)) => Ok(KRange::new(num(a)?, num(b)?)),
            None => num(s).map(|k| KRange::new(k, k)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrainSize {
    PerInstruction(usize),
    Total(usize),
}

impl TrainSize {
    pub fn total(self, instructions: usize) -> usize {
        match self {
            TrainSize::PerInstruction(s) => s * instructions,
            TrainSize::Total(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub task: TaskKind,
    pub input_len: usize,
    pub pattern_len: usize,
    pub fixed_pattern_len: bool,
    pub num_instructions: usize,
    pub size: TrainSize,
    pub noop_frac: f64,
    /// Power-law shape; `None` allocates uniformly.
    pub shape: Option<f64>,
    pub families: Vec<Family>,
    pub train_k: KRange,
    pub test_k: KRange,
    pub occurrences: Vec<usize>,
    pub test_occurrences: Vec<usize>,
    pub test_size: usize,
    pub test_instructions: usize,
    pub seed: u64,
    pub train_dictionary: Option<PathBuf>,
    pub test_dictionary: Option<PathBuf>,
}

impl DatasetSpec {
    pub fn defaults(task: TaskKind) -> Self {
        let (input_len, pattern_len) = match task {
            TaskKind::SemanticFamilies => (500, 60),
            _ => (50, 20),
        };
        let test_size = match task {
            TaskKind::Encrypted => 5_000,
            _ => 100_000,
        };
        let (occurrences, test_occurrences) = match task {
            TaskKind::OccurrenceControl => (vec![1, 5, 10, 15, 20], (1..=20).collect()),
            _ => (vec![1], vec![1]),
        };
        DatasetSpec {
            task,
            input_len,
            pattern_len,
            fixed_pattern_len: false,
            num_instructions: 1000,
            size: match task {
                TaskKind::Encrypted => TrainSize::Total(40_000),
                _ => TrainSize::PerInstruction(1000),
            },
            noop_frac: match task {
                TaskKind::NoOpMix => 0.1,
                TaskKind::Encrypted => 0.4,
                _ => 0.0,
            },
            shape: None,
            families: Family::ALL.to_vec(),
            train_k: KRange::new(3, 6),
            test_k: KRange::new(1, 2),
            occurrences,
            test_occurrences,
            test_size,
            test_instructions: test_size,
            seed: DEFAULT_SEED,
            train_dictionary: None,
            test_dictionary: None,
        }
    }

    pub fn train_total(&self) -> usize {
        self.size.total(self.num_instructions)
    }

    /// Longest lhs that still fits the largest requested occurrence count.
    pub fn lhs_bound(&self) -> usize {
        let max_o = self
            .occurrences
            .iter()
            .chain(&self.test_occurrences)
            .copied()
            .max()
            .unwrap_or(1);
        self.pattern_len.min(self.input_len / max_o)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let positive = |key: &str, v: usize| {
            if v == 0 {
                Err(SpecError::field(key, "must be positive"))
            } else {
                Ok(())
            }
        };
        positive("input_len", self.input_len)?;
        positive("pattern_len", self.pattern_len)?;
        positive("num_instructions", self.num_instructions)?;
        positive("test_size", self.test_size)?;
        positive("test_instructions", self.test_instructions)?;
        match self.size {
            TrainSize::PerInstruction(s) => positive("examples_per_instruction", s)?,
            TrainSize::Total(n) => positive("total_examples", n)?,
        }
        if self.test_instructions > self.test_size {
            return Err(SpecError::field("test_instructions", "cannot exceed test_size"));
        }
        if !(0.0..=1.0).contains(&self.noop_frac) {
            return Err(SpecError::field("noop_frac", "must lie in [0, 1]"));
        }
        if self.task == TaskKind::Replace && self.noop_frac != 0.0 {
            return Err(SpecError::field("noop_frac", "the replace task has no no-op instances; use noop_mix"));
        }
        if let Some(a) = self.shape {
            if !(a > 0.0 && a.is_finite()) {
                return Err(SpecError::field("shape", "must be a positive number"));
            }
        }
        for (key, set) in [("occurrences", &self.occurrences), ("test_occurrences", &self.test_occurrences)] {
            if set.is_empty() || set.contains(&0) {
                return Err(SpecError::field(key, "must be a non-empty list of positive counts"));
            }
        }
        if self.lhs_bound() == 0 {
            return Err(SpecError::field(
                "occurrences",
                format!("largest occurrence count does not fit in input_len {}", self.input_len),
            ));
        }
        if self.task == TaskKind::SemanticFamilies {
            if self.families.is_empty() {
                return Err(SpecError::field("families", "at least one family is required"));
            }
            for (key, r) in [("train_k", self.train_k), ("test_k", self.test_k)] {
                if r.lo == 0 || r.lo > r.hi {
                    return Err(SpecError::field(key, "must be a non-empty range of positive k"));
                }
                if r.hi as usize > self.lhs_bound() {
                    return Err(SpecError::field(key, format!("k={} needs patterns longer than {}", r.hi, self.lhs_bound())));
                }
            }
        }
        let dicts = (self.train_dictionary.is_some(), self.test_dictionary.is_some());
        if dicts != (false, false) {
            if self.task != TaskKind::Encrypted {
                return Err(SpecError::field("train_dictionary", "dictionaries are only used by the encrypted task"));
            }
            if dicts != (true, true) {
                return Err(SpecError::field("test_dictionary", "train and test dictionaries must be given together"));
            }
        }
        Ok(())
    }

    /// Canonical `(key, value)` pairs; [`DatasetSpec::from_fields`] inverts it.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut out = vec![
            ("task", self.task.as_str().to_string()),
            ("input_len", self.input_len.to_string()),
            ("pattern_len", self.pattern_len.to_string()),
            ("fixed_pattern_len", self.fixed_pattern_len.to_string()),
            ("num_instructions", self.num_instructions.to_string()),
        ];
        match self.size {
            TrainSize::PerInstruction(s) => out.push(("examples_per_instruction", s.to_string())),
            TrainSize::Total(n) => out.push(("total_examples", n.to_string())),
        }
        out.extend([
            ("noop_frac", self.noop_frac.to_string()),
            ("shape", self.shape.map_or_else(|| "none".to_string(), |a| a.to_string())),
            (
                "families",
                self.families.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(","),
            ),
            ("train_k", self.train_k.to_string()),
            ("test_k", self.test_k.to_string()),
            ("occurrences", join(&self.occurrences)),
            ("test_occurrences", join(&self.test_occurrences)),
            ("test_size", self.test_size.to_string()),
            ("test_instructions", self.test_instructions.to_string()),
            ("seed", self.seed.to_string()),
        ]);
        if let Some(p) = &self.train_dictionary {
            out.push(("train_dictionary", p.display().to_string()));
        }
        if let Some(p) = &self.test_dictionary {
            out.push(("test_dictionary", p.display().to_string()));
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Builds a spec from `(line, key, value)` triples. Missing keys take
    /// the task's defaults; unknown or repeated keys are errors.
    pub fn from_fields<'a>(entries: impl IntoIterator<Item = (Option<usize>, &'a str, &'a str)>) -> Result<Self, SpecError> {
        let mut map: HashMap<&str, (Option<usize>, &str)> = HashMap::new();
        for (line, key, value) in entries {
            if map.insert(key, (line, value)).is_some() {
                return Err(SpecError::at(line, key, "given more than once"));
            }
        }
        let task = match map.remove("task") {
            Some((line, v)) => v.parse().map_err(|e: String| SpecError::at(line, "task", e))?,
            None => TaskKind::Replace,
        };
        let mut spec = DatasetSpec::defaults(task);
        let mut test_instructions_given = false;

        fn num<T: FromStr>(line: Option<usize>, key: &str, v: &str) -> Result<T, SpecError> {
            v.parse().map_err(|_| SpecError::at(line, key, format!("cannot parse `{v}`")))
        }
        fn list(line: Option<usize>, key: &str, v: &str) -> Result<Vec<usize>, SpecError> {
            v.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| num(line, key, t))
                .collect()
        }

        let mut size_keys = 0;
        let mut entries: Vec<_> = map.into_iter().collect();
        entries.sort_by_key(|(k, (line, _))| (*line, *k));
        for (key, (line, v)) in entries {
            match key {
                "input_len" => spec.input_len = num(line, key, v)?,
                "pattern_len" => spec.pattern_len = num(line, key, v)?,
                "fixed_pattern_len" => spec.fixed_pattern_len = num(line, key, v)?,
                "num_instructions" => spec.num_instructions = num(line, key, v)?,
                "examples_per_instruction" => {
                    spec.size = TrainSize::PerInstruction(num(line, key, v)?);
                    size_keys += 1;
                }
                "total_examples" => {
                    spec.size = TrainSize::Total(num(line, key, v)?);
                    size_keys += 1;
                }
                "noop_frac" => spec.noop_frac = num(line, key, v)?,
                "shape" => {
                    spec.shape = match v {
                        "none" | "uniform" => None,
                        _ => Some(num(line, key, v)?),
                    }
                }
                "families" => {
                    spec.families = v
                        .split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(|t| t.parse().map_err(|e: String| SpecError::at(line, key, e)))
                        .collect::<Result<_, _>>()?
                }
                "train_k" => spec.train_k = v.parse().map_err(|e: String| SpecError::at(line, key, e))?,
                "test_k" => spec.test_k = v.parse().map_err(|e: String| SpecError::at(line, key, e))?,
                "occurrences" => spec.occurrences = list(line, key, v)?,
                "test_occurrences" => spec.test_occurrences = list(line, key, v)?,
                "test_size" => spec.test_size = num(line, key, v)?,
                "test_instructions" => {
                    spec.test_instructions = num(line, key, v)?;
                    test_instructions_given = true;
                }
                "seed" => spec.seed = num(line, key, v)?,
                "train_dictionary" => spec.train_dictionary = Some(PathBuf::from(v)),
                "test_dictionary" => spec.test_dictionary = Some(PathBuf::from(v)),
                other => return Err(SpecError::at(line, other, "unknown key")),
            }
        }
        if size_keys > 1 {
            return Err(SpecError::field(
                "total_examples",
                "give either examples_per_instruction or total_examples, not both",
            ));
        }
        if !test_instructions_given {
            spec.test_instructions = spec.test_size;
        }
        Ok(spec)
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| SpecError::at(Some(line), content, "expected `key = value`"))?;
            entries.push((Some(line), k.trim(), v.trim()));
        }
        DatasetSpec::from_fields(entries)
    }
}
