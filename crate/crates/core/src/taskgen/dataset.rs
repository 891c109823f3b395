//! Whole-dataset assembly: rule pools, allocation, per-instruction generation.
//!
//! Every instruction gets its own ChaCha stream derived from the seed, the
//! split and the instruction index, so the output does not depend on how
//! many worker threads build it.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    allocate_power_law, make_encrypted_instance, make_noop_instance, make_op_instance, random_word,
    sample_semantic_rule, Category, DatasetSpec, Family, GenError, InstructionInstance, RuleSampler, TaskKind,
    TrainSize,
};
use crate::rewrite::RewriteRule;
use crate::word::{Word, LETTERS};

const TAG_RULES: u64 = 0x7275_6c65;
const TAG_ALLOC: u64 = 0x616c_6c6f;
const TAG_TRAIN: u64 = 0x7472_6169;
const TAG_TEST: u64 = 0x7465_7374;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub train: Vec<InstructionInstance>,
    pub test: Vec<InstructionInstance>,
    /// Train examples per rule, in order of first appearance.
    pub instruction_census: IndexMap<Arc<RewriteRule>, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Split {
    Train,
    Test,
}

struct PooledRule {
    rule: Arc<RewriteRule>,
    family: Option<Family>,
    k: Option<u32>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, tag: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
    rng.set_stream(stream);
    rng
}

pub fn census_of(train: &[InstructionInstance]) -> IndexMap<Arc<RewriteRule>, usize> {
    let mut census = IndexMap::new();
    for inst in train {
        *census.entry(inst.rule.clone()).or_insert(0) += 1;
    }
    census
}

fn load_dictionary(path: &Path, max_len: usize) -> Result<Vec<Word>, GenError> {
    let fail = |reason: String| GenError::Dictionary {
        path: path.display().to_string(),
        reason,
    };
    let text = fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for (idx, tok) in text.split_whitespace().enumerate() {
        let word: Word = tok
            .parse()
            .map_err(|e| fail(format!("entry {} `{tok}`: {e}", idx + 1)))?;
        if word.len() > max_len {
            return Err(fail(format!("`{tok}` is longer than the input length {max_len}")));
        }
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    if words.is_empty() {
        return Err(fail("no words".into()));
    }
    Ok(words)
}

fn draw_rules(
    spec: &DatasetSpec,
    split: Split,
    needed: usize,
    exclude: &HashSet<Arc<RewriteRule>>,
    dictionary: Option<&[Word]>,
) -> Result<Vec<PooledRule>, GenError> {
    let mut rng = stream_rng(spec.seed, TAG_RULES, split as u64);
    let sampler = RuleSampler {
        max_lhs: spec.lhs_bound(),
        max_rhs: spec.pattern_len,
        fixed_len: spec.fixed_pattern_len,
        alphabet: LETTERS,
    };
    let k_range = match split {
        Split::Train => spec.train_k,
        Split::Test => spec.test_k,
    };
    let budget = needed.saturating_mul(100).saturating_add(1000);
    let mut seen: HashSet<Arc<RewriteRule>> = HashSet::with_capacity(needed);
    let mut pool = Vec::with_capacity(needed);
    for _ in 0..budget {
        if pool.len() == needed {
            break;
        }
        let (rule, family, k) = match (spec.task, dictionary) {
            (TaskKind::SemanticFamilies, _) => {
                let s = sample_semantic_rule(&spec.families, k_range, spec.lhs_bound(), &mut rng)?;
                (s.rule, Some(s.family), Some(s.k))
            }
            (_, Some(words)) => {
                let lhs = words[rng.random_range(0..words.len())].clone();
                let rhs_len = if spec.fixed_pattern_len { spec.pattern_len } else { rng.random_range(1..=spec.pattern_len) };
                let rhs = random_word(rhs_len, LETTERS, &mut rng);
                if lhs == rhs {
                    continue;
                }
                (RewriteRule::new(lhs, rhs), None, None)
            }
            _ => (sampler.sample(&mut rng), None, None),
        };
        let rule = Arc::new(rule);
        if exclude.contains(&rule) || !seen.insert(rule.clone()) {
            continue;
        }
        pool.push(PooledRule { rule, family, k });
    }
    if pool.len() < needed {
        return Err(GenError::CollisionBudget {
            pool: match split {
                Split::Train => "train",
                Split::Test => "test",
            },
            needed,
            got: pool.len(),
        });
    }
    Ok(pool)
}

fn uniform_counts(total: usize, n: usize) -> Vec<usize> {
    let (base, extra) = (total / n, total % n);
    (0..n).map(|i| base + usize::from(i < extra)).collect()
}

fn generate_for_rule(
    spec: &DatasetSpec,
    pooled: &PooledRule,
    count: usize,
    occurrence_set: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<InstructionInstance>, GenError> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let category = if rng.random_bool(spec.noop_frac) { Category::NoOp } else { Category::Op };
        let rule = pooled.rule.clone();
        let mut inst = match (spec.task, category) {
            (TaskKind::Encrypted, _) => {
                let key = rng.random_range(0..LETTERS);
                make_encrypted_instance(rule, key, spec.input_len, category, rng)?
            }
            (_, Category::Op) => {
                let o = occurrence_set[rng.random_range(0..occurrence_set.len())];
                make_op_instance(rule, spec.input_len, o, rng)?
            }
            (_, Category::NoOp) => make_noop_instance(rule, spec.input_len, rng)?,
        };
        inst.meta.family = pooled.family;
        inst.meta.k = pooled.k;
        out.push(inst);
    }
    Ok(out)
}

fn generate_split(
    spec: &DatasetSpec,
    pool: &[PooledRule],
    counts: &[usize],
    occurrence_set: &[usize],
    tag: u64,
) -> Result<Vec<InstructionInstance>, GenError> {
    let chunks = pool
        .par_iter()
        .zip(counts.par_iter())
        .enumerate()
        .map(|(i, (pooled, &count))| {
            let mut rng = stream_rng(spec.seed, tag, i as u64);
            generate_for_rule(spec, pooled, count, occurrence_set, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Builds the dataset described by `spec` on the current rayon pool.
pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset, GenError> {
    spec.validate()?;

    let dictionaries = match (&spec.train_dictionary, &spec.test_dictionary) {
        (Some(train), Some(test)) => {
            let max = spec.input_len;
            let (train, test) = (load_dictionary(train, max)?, load_dictionary(test, max)?);
            let train_set: HashSet<&Word> = train.iter().collect();
            if let Some(shared) = test.iter().find(|w| train_set.contains(w)) {
                return Err(GenError::Dictionary {
                    path: spec.test_dictionary.as_ref().unwrap().display().to_string(),
                    reason: format!("`{shared}` also appears in the train dictionary"),
                });
            }
            Some((train, test))
        }
        _ => None,
    };

    let train_pool = draw_rules(
        spec,
        Split::Train,
        spec.num_instructions,
        &HashSet::new(),
        dictionaries.as_ref().map(|d| d.0.as_slice()),
    )?;
    let train_rules: HashSet<Arc<RewriteRule>> = train_pool.iter().map(|p| p.rule.clone()).collect();
    let test_pool = draw_rules(
        spec,
        Split::Test,
        spec.test_instructions,
        &train_rules,
        dictionaries.as_ref().map(|d| d.1.as_slice()),
    )?;

    let total = spec.train_total();
    let train_counts = match (spec.shape, spec.size) {
        (Some(alpha), _) => {
            let mut rng = stream_rng(spec.seed, TAG_ALLOC, 0);
            allocate_power_law(spec.num_instructions, total, alpha, &mut rng)?.counts
        }
        (None, TrainSize::PerInstruction(s)) => vec![s; spec.num_instructions],
        (None, TrainSize::Total(n)) => uniform_counts(n, spec.num_instructions),
    };
    let test_counts = uniform_counts(spec.test_size, spec.test_instructions);

    let train = generate_split(spec, &train_pool, &train_counts, &spec.occurrences, TAG_TRAIN)?;
    let test = generate_split(spec, &test_pool, &test_counts, &spec.test_occurrences, TAG_TEST)?;
    let instruction_census = census_of(&train);
    Ok(Dataset {
        spec: spec.clone(),
        train,
        test,
        instruction_census,
    })
}

/// As [`build_dataset`], on a dedicated pool of `shards` threads. The result
/// is identical for every `shards` value.
pub fn build_dataset_sharded(spec: &DatasetSpec, shards: usize) -> Result<Dataset, GenError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(shards.max(1))
        .build()
        .map_err(|e| GenError::InvalidParameter(format!("cannot start {shards} workers: {e}")))?;
    pool.install(|| build_dataset(spec))
}
