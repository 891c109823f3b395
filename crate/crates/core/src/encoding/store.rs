//! On-disk dataset layout.
//!
//! ```text
//! <dir>/manifest        key = value lines, spec embedded as spec.<key>
//! <dir>/train.records   one instance per line
//! <dir>/test.records
//! <dir>/train.tokens    optional, `prompt ids<TAB>target ids`
//! <dir>/test.tokens
//! ```
//!
//! A record is six tab-separated fields: `lhs rhs input expected category
//! meta`. The empty word is written `_`; meta is `-` or `;`-joined
//! `family=..`, `k=..`, `O=..`, `key=..` entries in that order.
//!
//! The manifest's last line, `digest`, is the SHA-256 of every manifest
//! line above it, which in turn carry the SHA-256 of both record files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::vocab::{encode_with, EncodeError, KeyEncoding};
use crate::rewrite::RewriteRule;
use crate::taskgen::{census_of, Category, Dataset, DatasetSpec, Family, InstructionInstance, Meta, SpecError};
use crate::word::Word;

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOKEN_LAYOUT: &str = "prompt=BOS,x,SEP,y,SEP,z target=z',EOS";

pub const MANIFEST_FILE: &str = "manifest";
pub const TRAIN_FILE: &str = "train.records";
pub const TEST_FILE: &str = "test.records";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    Malformed { file: String, line: usize, reason: String },
    #[error("corrupted dataset: {0}")]
    Corruption(String),
    #[error("unsupported schema version {found} (this build reads {SCHEMA_VERSION})")]
    Version { found: String },
    #[error("manifest spec: {0}")]
    Spec(#[from] SpecError),
    #[error("token export: {0}")]
    Encode(#[from] EncodeError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WriteOptions {
    pub key_encoding: KeyEncoding,
    pub emit_tokens: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator_version: String,
    pub key_encoding: KeyEncoding,
    pub train_records: usize,
    pub test_records: usize,
    pub train_sha256: String,
    pub test_sha256: String,
    pub spec: DatasetSpec,
    pub digest: String,
}

fn word_field(w: &Word) -> String {
    if w.is_empty() {
        "_".to_string()
    } else {
        w.to_string()
    }
}

fn meta_field(m: &Meta) -> String {
    let mut parts = Vec::new();
    if let Some(f) = m.family {
        parts.push(format!("family={f}"));
    }
    if let Some(k) = m.k {
        parts.push(format!("k={k}"));
    }
    if let Some(o) = m.occurrences {
        parts.push(format!("O={o}"));
    }
    if let Some(key) = m.caesar_key {
        parts.push(format!("key={key}"));
    }
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(";")
    }
}

pub fn format_record(inst: &InstructionInstance) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        word_field(&inst.rule.lhs),
        word_field(&inst.rule.rhs),
        word_field(&inst.input),
        word_field(&inst.expected),
        inst.category,
        meta_field(&inst.meta)
    )
}

fn parse_word(s: &str) -> Result<Word, String> {
    if s == "_" {
        return Ok(Word::empty());
    }
    s.parse().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_meta(s: &str) -> Result<Meta, String> {
    let mut meta = Meta::default();
    if s == "-" {
        return Ok(meta);
    }
    for part in s.split(';') {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("bad meta entry `{part}`"))?;
        let bad = || format!("bad value in `{part}`");
        match k {
            "family" => meta.family = Some(v.parse::<Family>()?),
            "k" => meta.k = Some(v.parse().map_err(|_| bad())?),
            "O" => meta.occurrences = Some(v.parse().map_err(|_| bad())?),
            "key" => meta.caesar_key = Some(v.parse().map_err(|_| bad())?),
            other => return Err(format!("unknown meta key `{other}`")),
        }
    }
    Ok(meta)
}

/// Parses one record line, interning rules so instances of one instruction
/// share a single allocation.
pub fn parse_record(line: &str, rules: &mut HashMap<RewriteRule, Arc<RewriteRule>>) -> Result<InstructionInstance, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 tab-separated fields, found {}", fields.len()));
    }
    let rule = RewriteRule::new(parse_word(fields[0])?, parse_word(fields[1])?);
    let rule = rules.entry(rule.clone()).or_insert_with(|| Arc::new(rule)).clone();
    Ok(InstructionInstance {
        rule,
        input: parse_word(fields[2])?,
        expected: parse_word(fields[3])?,
        category: Category::parse(fields[4]).ok_or_else(|| format!("unknown category `{}`", fields[4]))?,
        meta: parse_meta(fields[5])?,
    })
}

fn records_text(instances: &[InstructionInstance]) -> String {
    let mut out = String::with_capacity(instances.len() * 160);
    for inst in instances {
        out.push_str(&format_record(inst));
        out.push('\n');
    }
    out
}

fn tokens_text(instances: &[InstructionInstance], keys: KeyEncoding) -> Result<String, EncodeError> {
    let mut out = String::new();
    let join = |ids: &[u32], out: &mut String| {
        for (i, id) in ids.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{id}").unwrap();
        }
    };
    for inst in instances {
        let enc = encode_with(inst, keys)?;
        join(&enc.prompt_ids, &mut out);
        out.push('\t');
        join(&enc.target_ids, &mut out);
        out.push('\n');
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest_body(m: &Manifest) -> String {
    let mut s = String::new();
    writeln!(s, "schema_version = {}", m.schema_version).unwrap();
    writeln!(s, "generator_version = {}", m.generator_version).unwrap();
    writeln!(s, "seed = {}", m.spec.seed).unwrap();
    writeln!(s, "token_layout = {TOKEN_LAYOUT}").unwrap();
    writeln!(s, "key_encoding = {}", m.key_encoding).unwrap();
    writeln!(s, "train_records = {}", m.train_records).unwrap();
    writeln!(s, "test_records = {}", m.test_records).unwrap();
    writeln!(s, "train_sha256 = {}", m.train_sha256).unwrap();
    writeln!(s, "test_sha256 = {}", m.test_sha256).unwrap();
    for (k, v) in m.spec.fields() {
        writeln!(s, "spec.{k} = {v}").unwrap();
    }
    s
}

/// Writes `dataset` under `dir`, creating it if needed. Returns the manifest
/// digest.
pub fn write_dataset(dataset: &Dataset, dir: &Path, opts: WriteOptions) -> Result<String, StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let train = records_text(&dataset.train);
    let test = records_text(&dataset.test);
    let mut manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        generator_version: GENERATOR_VERSION.to_string(),
        key_encoding: opts.key_encoding,
        train_records: dataset.train.len(),
        test_records: dataset.test.len(),
        train_sha256: sha256_hex(train.as_bytes()),
        test_sha256: sha256_hex(test.as_bytes()),
        spec: dataset.spec.clone(),
        digest: String::new(),
    };
    let body = manifest_body(&manifest);
    manifest.digest = sha256_hex(body.as_bytes());

    for (name, text) in [(TRAIN_FILE, &train), (TEST_FILE, &test)] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    if opts.emit_tokens {
        for (name, split) in [("train.tokens", &dataset.train), ("test.tokens", &dataset.test)] {
            let path = dir.join(name);
            fs::write(&path, tokens_text(split, opts.key_encoding)?).map_err(io_err(&path))?;
        }
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, format!("{body}digest = {}\n", manifest.digest)).map_err(io_err(&path))?;
    Ok(manifest.digest)
}

/// Reads and verifies the manifest (self-digest only; record files are
/// checked by [`read_dataset`]).
pub fn read_manifest(dir: &Path) -> Result<Manifest, StoreError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut fields: Vec<(usize, &str, &str)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| StoreError::Malformed {
            file: MANIFEST_FILE.into(),
            line: idx + 1,
            reason: "expected `key = value`".into(),
        })?;
        fields.push((idx + 1, k.trim(), v.trim()));
    }
    let get = |key: &str| -> Result<&str, StoreError> {
        fields
            .iter()
            .find(|f| f.1 == key)
            .map(|f| f.2)
            .ok_or_else(|| StoreError::Corruption(format!("manifest lacks `{key}`")))
    };
    let version = get("schema_version")?;
    if version != SCHEMA_VERSION.to_string() {
        return Err(StoreError::Version { found: version.into() });
    }
    let num = |key: &str| -> Result<usize, StoreError> {
        get(key)?
            .parse()
            .map_err(|_| StoreError::Corruption(format!("manifest `{key}` is not a number")))
    };
    let spec = DatasetSpec::from_fields(
        fields
            .iter()
            .filter_map(|&(line, k, v)| k.strip_prefix("spec.").map(|k| (Some(line), k, v))),
    )?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        generator_version: get("generator_version")?.to_string(),
        key_encoding: get("key_encoding")?.parse().map_err(StoreError::Corruption)?,
        train_records: num("train_records")?,
        test_records: num("test_records")?,
        train_sha256: get("train_sha256")?.to_string(),
        test_sha256: get("test_sha256")?.to_string(),
        spec,
        digest: get("digest")?.to_string(),
    };
    let body_end = text.rfind("digest = ").unwrap_or(text.len());
    let recorded_body = &text[..body_end];
    if recorded_body != manifest_body(&manifest) {
        return Err(StoreError::Corruption("manifest fields are not in canonical form".into()));
    }
    if sha256_hex(recorded_body.as_bytes()) != manifest.digest {
        return Err(StoreError::Corruption("manifest digest does not match its contents".into()));
    }
    Ok(manifest)
}

fn read_split(
    dir: &Path,
    name: &str,
    expected_sha: &str,
    expected_len: usize,
    rules: &mut HashMap<RewriteRule, Arc<RewriteRule>>,
) -> Result<Vec<InstructionInstance>, StoreError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    if sha256_hex(text.as_bytes()) != expected_sha {
        return Err(StoreError::Corruption(format!("{name} does not match the manifest digest")));
    }
    let instances = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            parse_record(line, rules).map_err(|reason| StoreError::Malformed {
                file: name.into(),
                line: i + 1,
                reason,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if instances.len() != expected_len {
        return Err(StoreError::Corruption(format!(
            "{name} holds {} records, manifest says {expected_len}",
            instances.len()
        )));
    }
    Ok(instances)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset, StoreError> {
    let manifest = read_manifest(dir)?;
    let mut rules = HashMap::new();
    let train = read_split(dir, TRAIN_FILE, &manifest.train_sha256, manifest.train_records, &mut rules)?;
    let test = read_split(dir, TEST_FILE, &manifest.test_sha256, manifest.test_records, &mut rules)?;
    let instruction_census = census_of(&train);
    Ok(Dataset {
        spec: manifest.spec,
        train,
        test,
        instruction_census,
    })
}
