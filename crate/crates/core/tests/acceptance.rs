//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use forge::encoding::{
    decode_with, encode_with, read_dataset, write_dataset, KeyEncoding, Vocabulary, WriteOptions, BOS, EOS, SEP,
};
use forge::eval::oracle::{caesar_shift, family_member, naive_count, naive_rewrite};
use forge::eval::{certify_dataset, DistributionAudit};
use forge::markov::{parse_program, run, RunKind, DEFAULT_STEP_LIMIT};
use forge::rewrite::{apply_rule_once, OutcomeKind, RewriteRule};
use forge::taskgen::{
    allocate_power_law, build_constrained_pattern, build_dataset, caesar_encrypt, sample_semantic_rule, Category,
    DatasetSpec, Family, KRange, TaskKind, TrainSize,
};
use forge::word::{Symbol, Word};

type Verdict = Result<String, String>;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn random_word(rng: &mut impl Rng, lens: std::ops::RangeInclusive<usize>, letters: u8) -> Word {
    let len = rng.random_range(lens);
    Word::new((0..len).map(|_| Symbol(rng.random_range(0..letters))).collect())
}

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn golden_trace() -> Verdict {
    let t0 = Instant::now();
    let src = fs::read_to_string(crate_dir().join("programs/mirror_concat.mkv")).map_err(|e| e.to_string())?;
    let prog = parse_program(&src).map_err(|e| e.to_string())?;
    let input = prog.alphabet.parse_input("abb").unwrap();
    let out = run(&prog, &input, DEFAULT_STEP_LIMIT).unwrap();
    check(out.kind == RunKind::Terminated, format!("run ended {}", out.kind))?;
    check(out.trace.last().is_some_and(|s| s.stop), "last step is not the stop rule")?;
    check(prog.alphabet.render(&out.final_word) == "abbbba", "final word differs")?;
    let ordinals: Vec<usize> = out.trace.iter().map(|s| s.rule).collect();
    check(ordinals == [5, 1, 2, 1, 2, 2, 1, 3, 3, 3, 4], format!("rule sequence {ordinals:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let len = rng.random_range(0..=8);
        let s: String = (0..len).map(|_| if rng.random_bool(0.5) { 'a' } else { 'b' }).collect();
        let out = run(&prog, &prog.alphabet.parse_input(&s).unwrap(), DEFAULT_STEP_LIMIT).unwrap();
        let want: String = s.chars().chain(s.chars().rev()).collect();
        let got = prog.alphabet.render(&out.final_word);
        check(out.kind == RunKind::Terminated && got == want, format!("`{s}` gave `{got}`"))?;
    }
    let dt = t0.elapsed();
    check(dt < Duration::from_secs(1), format!("took {dt:?}"))?;
    Ok(format!("abb -> abbbba in 11 steps; 200 random words mirrored; {dt:.2?}"))
}

fn worked_examples() -> Verdict {
    let cases = [
        ("iss", "art", "mississipi", "martissipi"),
        ("iss", "art", "canada", "canada"),
        ("ss", "tr", "mississipi", "mitrissipi"),
    ];
    for (l, r, z, want) in cases {
        let got = apply_rule_once(&RewriteRule::new(w(l), w(r)), &w(z)).unwrap().result;
        check(got == w(want), format!("({l}->{r}, {z}) gave {got}"))?;
    }
    Ok("3 of 3 exact".into())
}

fn oracle_equivalence() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let mut replaced = 0;
    for i in 0..n {
        // small alphabets make matches (and near-misses) common
        let letters = [2u8, 3, 4, 26][i % 4];
        let lhs = random_word(&mut rng, 1..=4, letters);
        let rhs = random_word(&mut rng, 0..=4, letters);
        let z = random_word(&mut rng, 0..=24, letters);
        let engine = apply_rule_once(&RewriteRule::new(lhs.clone(), rhs.clone()), &z).unwrap();
        let naive = naive_rewrite(&z.to_string(), &lhs.to_string(), &rhs.to_string());
        let agree = match &naive {
            Some(s) => engine.kind == OutcomeKind::Replaced && engine.result.to_string() == *s,
            None => engine.kind == OutcomeKind::Unchanged && engine.result == z,
        };
        check(agree, format!("disagree on ({lhs}->{rhs}, {z})"))?;
        replaced += usize::from(naive.is_some());
    }
    let dt = t0.elapsed();
    check(dt < Duration::from_secs(30), format!("took {dt:?}"))?;
    Ok(format!("{n} pairs agree ({replaced} rewrites); {dt:.2?}"))
}

fn vocabulary_contract() -> Verdict {
    check(Vocabulary::len() == 29, "vocabulary size")?;
    for (i, c) in ('a'..='z').enumerate() {
        check(Vocabulary::id_of(&c.to_string()) == Some(i as u32), format!("id of {c}"))?;
    }
    check((SEP, BOS, EOS) == (26, 27, 28), "control ids")?;

    let mut noop = DatasetSpec::defaults(TaskKind::NoOpMix);
    noop.noop_frac = 0.3;
    noop.num_instructions = 10;
    noop.size = TrainSize::PerInstruction(1);
    noop.test_size = 80_000;
    noop.test_instructions = 8_000;
    let mut enc = DatasetSpec::defaults(TaskKind::Encrypted);
    enc.num_instructions = 10;
    enc.size = TrainSize::Total(10);
    enc.test_size = 20_000;
    enc.test_instructions = 2_000;

    let mut n = 0;
    for (spec, keys) in [(noop, KeyEncoding::Sidecar), (enc, KeyEncoding::Unary)] {
        let d = build_dataset(&spec).map_err(|e| e.to_string())?;
        for inst in &d.test {
            let e = encode_with(inst, keys).map_err(|e| e.to_string())?;
            check(e.prompt_ids.iter().chain(&e.target_ids).all(|&t| t < 29), "id out of range")?;
            let back = decode_with(&e, keys).map_err(|e| e.to_string())?;
            let same = back.lhs == inst.rule.lhs
                && back.rhs == inst.rule.rhs
                && back.input == inst.input
                && back.output == inst.expected
                && back.key == inst.meta.caesar_key;
            check(same, format!("round trip failed on {}", inst.rule))?;
            n += 1;
        }
    }
    Ok(format!("29 frozen ids; {n} instances round-trip"))
}

fn dataset_soundness() -> Verdict {
    let t0 = Instant::now();
    let text = fs::read_to_string(crate_dir().join("specs/replace_1k.spec")).map_err(|e| e.to_string())?;
    let spec = DatasetSpec::parse(&text).map_err(|e| e.to_string())?;
    check(spec.num_instructions == 1000 && spec.train_total() == 1_000_000, "spec is not I=1000, S=1000")?;
    check((spec.input_len, spec.pattern_len, spec.test_size) == (50, 20, 100_000), "spec is not L=50, P=20, 10^5 test")?;
    let d = build_dataset(&spec).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_dataset(&d, dir.path(), WriteOptions::default()).map_err(|e| e.to_string())?;
    drop(d);
    let back = read_dataset(dir.path()).map_err(|e| e.to_string())?;
    let report = certify_dataset(&back);
    let dt = t0.elapsed();
    check(report.passed(), format!("findings {:?}", report.counts))?;
    check(dt < Duration::from_secs(600), format!("took {dt:?}"))?;
    Ok(format!(
        "{} train / {} test records certified, 0 label disagreements, 0 shared rules; gen+write+read+certify {:.1?} on {} threads",
        report.train_records,
        report.test_records,
        dt,
        rayon::current_num_threads()
    ))
}

fn noop_frequency() -> Verdict {
    let mut spec = DatasetSpec::defaults(TaskKind::NoOpMix);
    spec.noop_frac = 0.4;
    spec.num_instructions = 100;
    spec.size = TrainSize::PerInstruction(1000);
    spec.test_size = 10;
    spec.test_instructions = 10;
    let d = build_dataset(&spec).map_err(|e| e.to_string())?;
    let noops = d.train.iter().filter(|i| i.category == Category::NoOp).count();
    let frac = noops as f64 / d.train.len() as f64;
    check(d.train.len() == 100_000, "train size")?;
    check((0.39..=0.41).contains(&frac), format!("no-op fraction {frac:.4}"))?;
    Ok(format!("no-op fraction {frac:.4} over {} instances", d.train.len()))
}

fn occurrence_exactness() -> Verdict {
    let mut total = 0;
    for o in [1usize, 5, 10, 15, 20] {
        let mut spec = DatasetSpec::defaults(TaskKind::OccurrenceControl);
        spec.occurrences = vec![o];
        spec.test_occurrences = vec![o];
        spec.num_instructions = 100;
        spec.size = TrainSize::PerInstruction(100);
        spec.test_size = 10;
        spec.test_instructions = 10;
        spec.seed = o as u64;
        let d = build_dataset(&spec).map_err(|e| e.to_string())?;
        check(d.train.len() == 10_000, "train size")?;
        for inst in d.train.iter().chain(&d.test) {
            let n = naive_count(inst.input.to_string().as_bytes(), inst.rule.lhs.to_string().as_bytes());
            check(inst.meta.occurrences == Some(o) && n == o, format!("O={o}: recounted {n} in {}", inst.input))?;
            total += 1;
        }
    }
    Ok(format!("{total} instances over O in {{1,5,10,15,20}}, 0 violations"))
}

fn power_law_audit() -> Verdict {
    // alpha = 1: the drawn weights must be Uniform(0, 1].
    let bins = 20usize;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let alloc = allocate_power_law(1000, 1_000_000, 1.0, &mut rng).map_err(|e| e.to_string())?;
    let mut observed = vec![0usize; bins];
    for &x in &alloc.weights {
        observed[((x * bins as f64).ceil() as usize).clamp(1, bins) - 1] += 1;
    }
    let expected = alloc.weights.len() as f64 / bins as f64;
    let stat: f64 = observed.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    check(stat < critical, format!("alpha=1 chi-square {stat:.2} >= {critical:.2}"))?;
    check(alloc.counts.iter().sum::<usize>() == 1_000_000, "counts do not sum to N")?;

    let mut hits = 0;
    let mut fractions = Vec::new();
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let alloc = allocate_power_law(1000, 1_000_000, 0.15, &mut rng).map_err(|e| e.to_string())?;
        let audit = DistributionAudit::from_counts(&alloc.counts, 1000).map_err(|e| e.to_string())?;
        let f = audit.fraction_below(0.001);
        fractions.push(f);
        hits += usize::from(f > 0.5);
    }
    let lo = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fractions.iter().cloned().fold(0.0, f64::max);
    check(hits >= 28, format!("only {hits}/30 seeds exceed 0.5"))?;
    Ok(format!(
        "alpha=1 chi-square {stat:.2} < {critical:.2} ({bins} bins); alpha=0.15 fraction below 0.1% in [{lo:.3}, {hi:.3}], {hits}/30 seeds > 0.5"
    ))
}

fn semantic_families() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for family in Family::ALL {
        for _ in 0..1000 {
            let r = sample_semantic_rule(&[family], KRange::new(3, 6), 60, &mut rng).map_err(|e| e.to_string())?;
            check((3..=6).contains(&r.k) && r.family == family, "family or k out of range")?;
            for side in [&r.rule.lhs, &r.rule.rhs] {
                check(
                    family_member(side.to_string().as_bytes(), family, r.k),
                    format!("{side} is not {family} k={}", r.k),
                )?;
            }
        }
    }
    let exemplars = [
        (Family::Repeated, 3, "aaabbbccc"),
        (Family::Periodic, 2, "abcabc"),
        (Family::Mirror, 3, "abccbaabc"),
    ];
    for (f, k, want) in exemplars {
        let got = build_constrained_pattern(f, k, &w("abc"));
        check(got == w(want), format!("{f} k={k} gave {got}"))?;
    }
    Ok("3000 sampled rules verified; 3 exemplars exact".into())
}

fn encrypted_task() -> Verdict {
    let spec = DatasetSpec::defaults(TaskKind::Encrypted);
    check(spec.train_total() == 40_000 && spec.test_size == 5_000 && spec.noop_frac == 0.4, "encrypted defaults")?;
    let d = build_dataset(&spec).map_err(|e| e.to_string())?;
    let report = certify_dataset(&d);
    check(report.passed(), format!("findings {:?}", report.counts))?;
    let noops = d.train.iter().filter(|i| i.category == Category::NoOp).count() as f64 / d.train.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10_000 {
        let y = random_word(&mut rng, 0..=30, 26);
        for k in 0..26u8 {
            let back = caesar_encrypt(&caesar_encrypt(&y, k).unwrap(), (26 - k) % 26).unwrap();
            check(back == y, format!("round trip failed for {y}, k={k}"))?;
            let s = y.to_string();
            let indep = String::from_utf8(caesar_shift(s.as_bytes(), k)).unwrap();
            check(caesar_encrypt(&y, k).unwrap().to_string() == indep, "shift disagrees with oracle")?;
        }
    }
    Ok(format!(
        "{} train / {} test certified, train no-op fraction {noops:.3}; 260000 Caesar round trips",
        d.train.len(),
        d.test.len()
    ))
}

fn files_of(dir: &Path) -> HashMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = tmp.path().join("power.spec");
    fs::write(
        &spec,
        "task = noop_mix\nnum_instructions = 300\ntotal_examples = 60000\nshape = 0.3\nnoop_frac = 0.2\ntest_size = 3000\n",
    )
    .unwrap();
    let mut runs = Vec::new();
    for shards in ["1", "3", "8"] {
        let out = tmp.path().join(format!("out{shards}"));
        let argv = [
            "forge",
            "gen",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "11",
            "--shards",
            shards,
            "--emit",
            "tokens",
        ];
        let code = forge::cli::dispatch(argv, &mut Vec::new(), &mut Vec::new());
        check(code == 0, format!("gen --shards {shards} exited {code}"))?;
        runs.push(files_of(&out));
    }
    check(runs[0].len() == 5, format!("expected 5 files, found {}", runs[0].len()))?;
    check(runs.iter().all(|r| *r == runs[0]), "outputs differ across shard counts")?;
    let bytes: usize = runs[0].values().map(Vec::len).sum();
    Ok(format!("--shards 1, 3, 8 give byte-identical files ({} files, {bytes} bytes)", runs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("golden trace", golden_trace),
        ("worked examples", worked_examples),
        ("oracle equivalence", oracle_equivalence),
        ("vocabulary contract", vocabulary_contract),
        ("dataset soundness", dataset_soundness),
        ("no-op frequency", noop_frequency),
        ("occurrence exactness", occurrence_exactness),
        ("power-law audit", power_law_audit),
        ("semantic families", semantic_families),
        ("encrypted task", encrypted_task),
        ("determinism", determinism),
    ];
    // keep assertion noise out of the report; failures are reported below
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
