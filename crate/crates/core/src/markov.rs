//! Markov-algorithm interpreter.
//!
//! A program is an ordered list of rule schemas over an alphabet made of
//! base symbols (the ones input words may use) and work symbols (usable only
//! inside rules). Each step applies the first rule whose left-hand side
//! occurs in the current word, at its leftmost occurrence. The run ends when
//! a stop rule fires, when no rule applies (blocked), or at the step limit.
//!
//! Source format, one directive or rule per line:
//!
//! ```text
//! @base a b          # symbols of processed words
//! @work α β          # extra symbols usable only in rules
//! @var x in a b      # single-symbol placeholder and its domain
//! αx -> xαβx         # ordinary rule
//! α ->. _            # stop rule, `_` is the empty word
//! ```
//!
//! Every symbol and variable name is a single character; whitespace inside
//! a rule side is ignored.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::rewrite::{leftmost_in, splice, RewriteRule};
use crate::word::{Symbol, Word};

pub const DEFAULT_STEP_LIMIT: usize = 10_000;

const RESERVED: &[char] = &['#', '_', '-', '>', '.', '@'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown symbol or undeclared variable `{0}`")]
    UnknownSymbol(char),
    #[error("`{0}` is declared more than once")]
    DuplicateDeclaration(char),
    #[error("`{0}` is reserved and cannot name a symbol")]
    ReservedName(char),
    #[error("domain of `{var}` uses `{sym}`, which is not a base symbol")]
    DomainNotBase { var: char, sym: char },
    #[error("symbol names must be single characters, got `{0}`")]
    LongName(String),
    #[error("expected `LHS -> RHS` or `LHS ->. RHS`")]
    MissingArrow,
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("malformed variable declaration, expected `@var x in a b ...`")]
    BadVarDecl,
    #[error("no base symbols declared")]
    NoBase,
    #[error("program has no rules")]
    NoRules,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(char),
    #[error("input symbol `{0}` is not a base symbol")]
    NotBaseSymbol(String),
    #[error("step limit must be positive")]
    ZeroStepLimit,
}

/// Base and work symbols with their display names.
///
/// Base symbols get ids `0..base_len`, work symbols the contiguous range
/// after them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
    base_len: usize,
}

impl Alphabet {
    pub fn new(base: &[char], work: &[char]) -> Self {
        let mut names = base.to_vec();
        names.extend_from_slice(work);
        Alphabet {
            names,
            base_len: base.len(),
        }
    }

    pub fn base(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.base_len).map(|i| Symbol(i as u8))
    }

    pub fn work(&self) -> impl Iterator<Item = Symbol> + '_ {
        (self.base_len..self.names.len()).map(|i| Symbol(i as u8))
    }

    pub fn is_base(&self, s: Symbol) -> bool {
        (s.0 as usize) < self.base_len
    }

    pub fn symbol(&self, name: char) -> Option<Symbol> {
        self.names.iter().position(|&c| c == name).map(|i| Symbol(i as u8))
    }

    pub fn name(&self, s: Symbol) -> Option<char> {
        self.names.get(s.0 as usize).copied()
    }

    /// Parses an input word; only base symbols are accepted.
    pub fn parse_input(&self, text: &str) -> Result<Word, EngineError> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match self.symbol(c) {
                Some(s) if self.is_base(s) => Ok(s),
                _ => Err(EngineError::NotBaseSymbol(c.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word::new)
    }

    pub fn render(&self, word: &Word) -> String {
        word.symbols()
            .iter()
            .map(|&s| self.name(s).unwrap_or('?'))
            .collect()
    }
}

/// One position of a rule template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Item {
    Sym(Symbol),
    /// Index into [`MarkovProgram::variables`].
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: char,
    pub domain: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSchema {
    pub lhs: Vec<Item>,
    pub rhs: Vec<Item>,
    pub is_stop: bool,
}

impl RuleSchema {
    /// Variables in order of first appearance, lhs before rhs.
    pub fn variables(&self) -> Vec<usize> {
        let mut seen = Vec::new();
        for item in self.lhs.iter().chain(&self.rhs) {
            if let Item::Var(v) = *item {
                if !seen.contains(&v) {
                    seen.push(v);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovProgram {
    pub alphabet: Alphabet,
    pub variables: Vec<Variable>,
    pub rules: Vec<RuleSchema>,
}

/// A concrete rule tagged with the 1-based ordinal of the schema it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedRule {
    pub rule: RewriteRule,
    pub schema: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Applied { rule: usize, position: usize, next: Word },
    Stopped { rule: usize, position: usize, next: Word },
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Terminated,
    Blocked,
    StepLimitExceeded,
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunKind::Terminated => "terminated",
            RunKind::Blocked => "blocked",
            RunKind::StepLimitExceeded => "step limit exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// Schema ordinal (1-based) of the rule applied.
    pub rule: usize,
    pub position: usize,
    pub word: Word,
    pub stop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub kind: RunKind,
    pub final_word: Word,
    pub trace: Vec<TraceStep>,
}

fn single_char(tok: &str, line: usize) -> Result<char, ParseError> {
    let mut it = tok.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(ParseError {
            line,
            kind: ParseErrorKind::LongName(tok.to_string()),
        }),
    }
}

struct RawRule {
    line: usize,
    lhs: String,
    rhs: String,
    is_stop: bool,
}

/// Parses program source. Rule order in the text is execution priority.
pub fn parse_program(text: &str) -> Result<MarkovProgram, ParseError> {
    let mut base: Vec<char> = Vec::new();
    let mut work: Vec<char> = Vec::new();
    let mut vars: Vec<(usize, char, Vec<char>)> = Vec::new();
    let mut raw_rules = Vec::new();

    let err = |line, kind| ParseError { line, kind };

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(directive) = content.strip_prefix('@') {
            let mut toks = directive.split_whitespace();
            let name = toks.next().unwrap_or("");
            match name {
                "base" | "work" => {
                    for tok in toks {
                        let c = single_char(tok, line)?;
                        if RESERVED.contains(&c) {
                            return Err(err(line, ParseErrorKind::ReservedName(c)));
                        }
                        if base.contains(&c) || work.contains(&c) || vars.iter().any(|v| v.1 == c) {
                            return Err(err(line, ParseErrorKind::DuplicateDeclaration(c)));
                        }
                        if name == "base" { base.push(c) } else { work.push(c) }
                    }
                }
                "var" => {
                    let var = toks.next().ok_or(err(line, ParseErrorKind::BadVarDecl))?;
                    let var = single_char(var, line)?;
                    if toks.next() != Some("in") {
                        return Err(err(line, ParseErrorKind::BadVarDecl));
                    }
                    if RESERVED.contains(&var) {
                        return Err(err(line, ParseErrorKind::ReservedName(var)));
                    }
                    if base.contains(&var) || work.contains(&var) || vars.iter().any(|v| v.1 == var) {
                        return Err(err(line, ParseErrorKind::DuplicateDeclaration(var)));
                    }
                    let domain = toks.map(|t| single_char(t, line)).collect::<Result<Vec<_>, _>>()?;
                    vars.push((line, var, domain));
                }
                other => return Err(err(line, ParseErrorKind::UnknownDirective(other.to_string()))),
            }
            continue;
        }
        let (lhs, rhs, is_stop) = if let Some((l, r)) = content.split_once("->.") {
            (l, r, true)
        } else if let Some((l, r)) = content.split_once("->") {
            (l, r, false)
        } else {
            return Err(err(line, ParseErrorKind::MissingArrow));
        };
        if rhs.contains("->") {
            return Err(err(line, ParseErrorKind::MissingArrow));
        }
        raw_rules.push(RawRule {
            line,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            is_stop,
        });
    }

    if base.is_empty() {
        return Err(err(0, ParseErrorKind::NoBase));
    }
    if raw_rules.is_empty() {
        return Err(err(0, ParseErrorKind::NoRules));
    }

    let alphabet = Alphabet::new(&base, &work);
    let mut variables = Vec::with_capacity(vars.len());
    for (line, name, domain) in vars {
        let domain = domain
            .into_iter()
            .map(|c| match alphabet.symbol(c) {
                Some(s) if alphabet.is_base(s) => Ok(s),
                Some(_) => Err(err(line, ParseErrorKind::DomainNotBase { var: name, sym: c })),
                None => Err(err(line, ParseErrorKind::UnknownSymbol(c))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        variables.push(Variable { name, domain });
    }

    let var_index: HashMap<char, usize> = variables.iter().enumerate().map(|(i, v)| (v.name, i)).collect();
    let side = |text: &str, line: usize| -> Result<Vec<Item>, ParseError> {
        let text = text.trim();
        if text == "_" {
            return Ok(Vec::new());
        }
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                if let Some(s) = alphabet.symbol(c) {
                    Ok(Item::Sym(s))
                } else if let Some(&v) = var_index.get(&c) {
                    Ok(Item::Var(v))
                } else {
                    Err(err(line, ParseErrorKind::UnknownSymbol(c)))
                }
            })
            .collect()
    };

    let rules = raw_rules
        .iter()
        .map(|r| {
            Ok(RuleSchema {
                lhs: side(&r.lhs, r.line)?,
                rhs: side(&r.rhs, r.line)?,
                is_stop: r.is_stop,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;

    Ok(MarkovProgram {
        alphabet,
        variables,
        rules,
    })
}

fn instantiate(items: &[Item], assignment: &HashMap<usize, Symbol>) -> Word {
    Word::new(
        items
            .iter()
            .map(|it| match *it {
                Item::Sym(s) => s,
                Item::Var(v) => assignment[&v],
            })
            .collect(),
    )
}

/// Expands every schema into concrete rules.
///
/// Variable assignments are enumerated lexicographically: variables in order
/// of first appearance, each ranging over its domain in declaration order,
/// the first variable varying slowest.
pub fn expand_schemas(program: &MarkovProgram) -> Result<Vec<ExpandedRule>, EngineError> {
    let mut out = Vec::new();
    for (ordinal, schema) in program.rules.iter().enumerate() {
        let vars = schema.variables();
        for &v in &vars {
            if program.variables[v].domain.is_empty() {
                return Err(EngineError::EmptyDomain(program.variables[v].name));
            }
        }
        let radices: Vec<usize> = vars.iter().map(|&v| program.variables[v].domain.len()).collect();
        let total: usize = radices.iter().product();
        for n in 0..total {
            // mixed-radix decode, last variable fastest
            let mut rem = n;
            let mut assignment = HashMap::with_capacity(vars.len());
            for (&v, &radix) in vars.iter().zip(&radices).rev() {
                assignment.insert(v, program.variables[v].domain[rem % radix]);
                rem /= radix;
            }
            out.push(ExpandedRule {
                rule: RewriteRule {
                    lhs: instantiate(&schema.lhs, &assignment),
                    rhs: instantiate(&schema.rhs, &assignment),
                    is_stop: schema.is_stop,
                },
                schema: ordinal + 1,
            });
        }
    }
    Ok(out)
}

/// One interpreter step: first applicable rule, leftmost position. An empty
/// left-hand side matches at position 0.
pub fn step(rules: &[ExpandedRule], word: &Word) -> Step {
    for r in rules {
        if let Some(position) = leftmost_in(word.symbols(), r.rule.lhs.symbols()) {
            let next = splice(word.symbols(), position, r.rule.lhs.len(), r.rule.rhs.symbols());
            return if r.rule.is_stop {
                Step::Stopped {
                    rule: r.schema,
                    position,
                    next,
                }
            } else {
                Step::Applied {
                    rule: r.schema,
                    position,
                    next,
                }
            };
        }
    }
    Step::Blocked
}

/// Runs `program` on `input` for at most `step_limit` steps.
pub fn run(program: &MarkovProgram, input: &Word, step_limit: usize) -> Result<RunOutcome, EngineError> {
    if step_limit == 0 {
        return Err(EngineError::ZeroStepLimit);
    }
    if let Some(&bad) = input.symbols().iter().find(|&&s| !program.alphabet.is_base(s)) {
        let name = program
            .alphabet
            .name(bad)
            .map(String::from)
            .unwrap_or_else(|| format!("<{}>", bad.0));
        return Err(EngineError::NotBaseSymbol(name));
    }
    let rules = expand_schemas(program)?;
    let mut word = input.clone();
    let mut trace = Vec::new();
    while trace.len() < step_limit {
        match step(&rules, &word) {
            Step::Applied { rule, position, next } => {
                trace.push(TraceStep {
                    rule,
                    position,
                    word: next.clone(),
                    stop: false,
                });
                word = next;
            }
            Step::Stopped { rule, position, next } => {
                trace.push(TraceStep {
                    rule,
                    position,
                    word: next.clone(),
                    stop: true,
                });
                return Ok(RunOutcome {
                    kind: RunKind::Terminated,
                    final_word: next,
                    trace,
                });
            }
            Step::Blocked => {
                return Ok(RunOutcome {
                    kind: RunKind::Blocked,
                    final_word: word,
                    trace,
                })
            }
        }
    }
    Ok(RunOutcome {
        kind: RunKind::StepLimitExceeded,
        final_word: word,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MIRROR: &str = "\
@base a b
@work α β
@var x in a b
@var y in a b
αx -> xαβx
βxy -> yβx
αβx -> xα
α ->. _
_ -> α
";

    fn prog() -> MarkovProgram {
        parse_program(MIRROR).unwrap()
    }

    #[test]
    fn parses_five_schemas() {
        let p = prog();
        assert_eq!(p.rules.len(), 5);
        assert!(p.rules[3].is_stop);
        assert!(p.rules[3].rhs.is_empty());
        assert!(p.rules[4].lhs.is_empty());
        assert!(!p.rules[4].is_stop);
        assert_eq!(p.rules[0].variables(), vec![0]);
        assert_eq!(p.rules[1].variables(), vec![0, 1]);
    }

    #[test]
    fn single_concrete_rule() {
        let p = parse_program("@base a b\na -> b").unwrap();
        let rules = expand_schemas(&p).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(p.alphabet.render(&rules[0].rule.lhs), "a");
        assert_eq!(p.alphabet.render(&rules[0].rule.rhs), "b");
    }

    #[test]
    fn expansion_order_is_lexicographic() {
        let p = prog();
        let rules = expand_schemas(&p).unwrap();
        assert_eq!(rules.len(), 10);
        let rule2: Vec<String> = rules
            .iter()
            .filter(|r| r.schema == 2)
            .map(|r| format!("{}>{}", p.alphabet.render(&r.rule.lhs), p.alphabet.render(&r.rule.rhs)))
            .collect();
        assert_eq!(rule2, ["βaa>aβa", "βab>bβa", "βba>aβb", "βbb>bβb"]);
        let schemas: Vec<usize> = rules.iter().map(|r| r.schema).collect();
        assert_eq!(schemas, [1, 1, 2, 2, 2, 2, 3, 3, 4, 5]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = parse_program("@base a b\na -> c").unwrap_err();
        assert_eq!(e, ParseError { line: 2, kind: ParseErrorKind::UnknownSymbol('c') });

        let e = parse_program("@base a b\n@var x in a\n@var x in b\nx -> a").unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.kind, ParseErrorKind::DuplicateDeclaration('x'));

        let e = parse_program("@base a b\n# nothing\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NoRules);

        let e = parse_program("@base a b\nab\n").unwrap_err();
        assert_eq!(e, ParseError { line: 2, kind: ParseErrorKind::MissingArrow });

        let e = parse_program("@base a b\n@work α\n@var x in α\nx -> a").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DomainNotBase { var: 'x', sym: 'α' });
    }

    #[test]
    fn empty_domain_fails_expansion() {
        let p = parse_program("@base a b\n@var x in\nx -> a").unwrap();
        assert_eq!(expand_schemas(&p), Err(EngineError::EmptyDomain('x')));
    }

    #[test]
    fn step_examples() {
        let p = prog();
        let rules = expand_schemas(&p).unwrap();
        let a = &p.alphabet;
        match step(&rules, &a.parse_input("abb").unwrap()) {
            Step::Applied { rule, position, next } => {
                assert_eq!((rule, position), (5, 0));
                assert_eq!(a.render(&next), "αabb");
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut word = a.parse_input("abbbba").unwrap().into_symbols();
        word.push(a.symbol('α').unwrap());
        match step(&rules, &Word::new(word)) {
            Step::Stopped { rule, next, .. } => {
                assert_eq!(rule, 4);
                assert_eq!(a.render(&next), "abbbba");
            }
            other => panic!("unexpected {other:?}"),
        }

        let p = parse_program("@base a b c\na -> b").unwrap();
        let rules = expand_schemas(&p).unwrap();
        assert_eq!(step(&rules, &p.alphabet.parse_input("ccc").unwrap()), Step::Blocked);
    }

    #[test]
    fn golden_trace_for_abb() {
        let p = prog();
        let out = run(&p, &p.alphabet.parse_input("abb").unwrap(), DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!(out.kind, RunKind::Terminated);
        assert_eq!(p.alphabet.render(&out.final_word), "abbbba");
        let ordinals: Vec<usize> = out.trace.iter().map(|s| s.rule).collect();
        assert_eq!(ordinals, [5, 1, 2, 1, 2, 2, 1, 3, 3, 3, 4]);
        let words: Vec<String> = out.trace.iter().map(|s| p.alphabet.render(&s.word)).collect();
        assert_eq!(words[4], "abαβbbβa");
        assert_eq!(words[9], "abbbbaα");
    }

    #[test]
    fn ab_becomes_abba() {
        let p = prog();
        let out = run(&p, &p.alphabet.parse_input("ab").unwrap(), DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!(out.kind, RunKind::Terminated);
        assert_eq!(p.alphabet.render(&out.final_word), "abba");
    }

    #[test]
    fn self_loop_hits_step_limit() {
        let p = parse_program("@base a\na -> a").unwrap();
        let out = run(&p, &p.alphabet.parse_input("a").unwrap(), 7).unwrap();
        assert_eq!(out.kind, RunKind::StepLimitExceeded);
        assert_eq!(out.trace.len(), 7);
    }

    #[test]
    fn blocked_run_keeps_last_word() {
        let p = parse_program("@base a b\na -> b").unwrap();
        let out = run(&p, &p.alphabet.parse_input("aab").unwrap(), 100).unwrap();
        assert_eq!(out.kind, RunKind::Blocked);
        assert_eq!(p.alphabet.render(&out.final_word), "bbb");
        assert_eq!(out.trace.len(), 2);
    }

    #[test]
    fn work_symbols_rejected_in_input() {
        let p = prog();
        assert!(p.alphabet.parse_input("aα").is_err());
        let bad = Word::new(vec![p.alphabet.symbol('β').unwrap()]);
        assert_eq!(run(&p, &bad, 10), Err(EngineError::NotBaseSymbol("β".into())));
    }
}
