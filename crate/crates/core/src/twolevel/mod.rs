//! Extended two-level morphology.
//!
//! Rules relate a lexical and a surface character stream of equal length,
//! where the null character `0` pads either side. A rule file declares the
//! alphabet, named character sets, the feasible pairs and the rules:
//!
//! ```text
//! alphabet a b d e g r s t "a;
//! set dental = {d, t};
//! pair A:a; pair A:"a; pair '+':0; pair '+':e; pair t:0;
//! _ <=> t:0 <=> ['+':0, t:t].
//! dental <=> '+':e <=> s_or_t :- filter(X, [X::mhead:epenthese === '+']).
//! ```
//!
//! A filter ties a rule to the morphological sign of the word: the rule is
//! only in force where the feature structure meets the filter.

mod align;
mod compile;

pub use align::{align, AlignEnv, AlignInput, Alignment, FilterVerdict, NoFilters};
pub use compile::{CompiledRuleSet, RuleConflict};

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

use crate::error::LoadError;
use crate::syntax::{Parser, SyntaxError, Tok};
use crate::type_system::{FeatId, TypeHierarchy, TypeId};

pub const NULL: char = '0';
pub const MORPH_BOUNDARY: char = '+';
pub const WORD_BOUNDARY: char = '$';

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    /// Plain characters; each has an identity pair.
    pub chars: BTreeSet<char>,
    pub pairs: BTreeSet<(char, char)>,
    pub sets: IndexMap<String, BTreeSet<char>>,
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet {
            chars: BTreeSet::new(),
            pairs: BTreeSet::new(),
            sets: IndexMap::new(),
        }
    }

    pub fn is_feasible(&self, l: char, s: char) -> bool {
        self.pairs.contains(&(l, s))
    }

    pub fn lexical_chars(&self) -> BTreeSet<char> {
        self.pairs.iter().map(|p| p.0).filter(|&c| c != NULL).collect()
    }

    pub fn surface_chars(&self) -> BTreeSet<char> {
        self.pairs.iter().map(|p| p.1).filter(|&c| c != NULL).collect()
    }

    /// Surface realizations of lexical `l` (`NULL` for lexical insertions).
    pub fn surfaces_of(&self, l: char) -> impl Iterator<Item = char> + '_ {
        self.pairs.range((l, char::MIN)..=(l, char::MAX)).map(|p| p.1)
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

/// Characters a pattern position admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CharPat {
    Any,
    Set(BTreeSet<char>),
}

impl CharPat {
    pub fn matches(&self, c: char) -> bool {
        match self {
            CharPat::Any => true,
            CharPat::Set(s) => s.contains(&c),
        }
    }

    fn meet(&self, other: &CharPat) -> CharPat {
        match (self, other) {
            (CharPat::Any, x) | (x, CharPat::Any) => x.clone(),
            (CharPat::Set(a), CharPat::Set(b)) => CharPat::Set(a.intersection(b).copied().collect()),
        }
    }
}

/// One context position: a lexical and a surface character pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPat {
    pub lex: CharPat,
    pub surf: CharPat,
}

impl PairPat {
    pub fn any() -> Self {
        PairPat {
            lex: CharPat::Any,
            surf: CharPat::Any,
        }
    }

    /// Whether the pair at a position matches; `None` stands for the
    /// position beyond the word edge, which only a word boundary admits.
    pub fn matches(&self, pair: Option<(char, char)>) -> bool {
        match pair {
            Some((l, s)) => self.lex.matches(l) && self.surf.matches(s),
            None => matches!(&self.lex, CharPat::Set(s) if s.contains(&WORD_BOUNDARY)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `<=>`: the pair occurs only in context, and always in context.
    Equivalence,
    /// `=>`: the pair occurs only in context.
    Context,
    /// `<=`: in context, the lexical character is always realized so.
    Surface,
}

impl Direction {
    pub fn licenses(self) -> bool {
        matches!(self, Direction::Equivalence | Direction::Context)
    }

    pub fn coerces(self) -> bool {
        matches!(self, Direction::Equivalence | Direction::Surface)
    }

    fn arrow(self) -> &'static str {
        match self {
            Direction::Equivalence => "<=>",
            Direction::Context => "=>",
            Direction::Surface => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterValue {
    Type(TypeId),
    Str(String),
}

/// Path constraints on the word's morphological sign.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Filter {
    pub items: Vec<(Vec<FeatId>, FilterValue)>,
}

impl Filter {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Whether two filters can hold together: no shared path with
    /// incompatible values.
    pub fn compatible(&self, other: &Filter, types: &TypeHierarchy) -> bool {
        for (p, v) in &self.items {
            for (q, w) in &other.items {
                if p != q {
                    continue;
                }
                let ok = match (v, w) {
                    (FilterValue::Type(a), FilterValue::Type(b)) => {
                        !matches!(types.glb(*a, *b), Ok(None))
                    }
                    (FilterValue::Str(a), FilterValue::Str(b)) => a == b,
                    (FilterValue::Type(t), FilterValue::Str(_))
                    | (FilterValue::Str(_), FilterValue::Type(t)) => {
                        types.is_subtype(crate::type_system::STRING, *t)
                    }
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoLevelRule {
    pub direction: Direction,
    pub lex: char,
    pub surf: char,
    /// Left context, nearest position first.
    pub lcon: Vec<PairPat>,
    pub rcon: Vec<PairPat>,
    pub filter: Filter,
    pub line: usize,
    pub text: String,
}

impl fmt::Display for TwoLevelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}:{} {}", self.line, self.lex, self.surf, self.direction.arrow())
    }
}

/// Parsed rule file.
#[derive(Debug, Clone)]
pub struct RuleFile {
    pub alphabet: Alphabet,
    pub rules: Vec<TwoLevelRule>,
}

impl RuleFile {
    pub fn parse(text: &str, file: &str, types: &TypeHierarchy) -> Result<RuleFile, LoadError> {
        let mut p = Parser::new(text, true).map_err(|e| LoadError::syntax(file, e))?;
        let mut alphabet = Alphabet::new();
        let mut rules = Vec::new();
        let lines: Vec<&str> = text.lines().collect();
        let wrap = |e: SyntaxError| LoadError::syntax(file, e);
        while !p.at_eof() {
            let line = p.line();
            if p.is_word("alphabet") && !matches!(p.peek_at(1), Tok::Punct(":")) {
                p.next();
                while !p.eat(";") {
                    let c = pchar(&mut p).map_err(wrap)?;
                    if c == NULL {
                        return Err(LoadError::invalid(file, line, "the null character cannot be a plain character"));
                    }
                    alphabet.chars.insert(c);
                    alphabet.pairs.insert((c, c));
                }
            } else if p.is_word("set") && matches!(p.peek_at(1), Tok::Word(_)) && matches!(p.peek_at(2), Tok::Punct("=")) {
                p.next();
                let name = p.word().map_err(wrap)?;
                p.expect("=").map_err(wrap)?;
                p.expect("{").map_err(wrap)?;
                let mut set = BTreeSet::new();
                if !p.is_punct("}") {
                    loop {
                        set.insert(pchar(&mut p).map_err(wrap)?);
                        if !p.eat(",") {
                            break;
                        }
                    }
                }
                p.expect("}").map_err(wrap)?;
                p.expect(";").map_err(wrap)?;
                alphabet.sets.insert(name, set);
            } else if p.is_word("pair") && !matches!(p.peek_at(1), Tok::Punct(":")) {
                p.next();
                let l = pchar(&mut p).map_err(wrap)?;
                p.expect(":").map_err(wrap)?;
                let s = pchar(&mut p).map_err(wrap)?;
                p.expect(";").map_err(wrap)?;
                if l == NULL && s == NULL {
                    return Err(LoadError::invalid(file, line, "0:0 is not a pair"));
                }
                alphabet.pairs.insert((l, s));
            } else {
                let mut rule = parse_rule(&mut p, &alphabet, types).map_err(wrap)?;
                rule.text = lines.get(line - 1).map(|l| l.trim().to_string()).unwrap_or_default();
                if !alphabet.is_feasible(rule.lex, rule.surf) {
                    return Err(LoadError::invalid(
                        file,
                        line,
                        format!("rule pair {}:{} is not feasible", rule.lex, rule.surf),
                    ));
                }
                rules.push(rule);
            }
        }
        Ok(RuleFile { alphabet, rules })
    }
}

/// A single character: a one-letter identifier, a quoted atom, `$` or `0`.
fn pchar(p: &mut Parser) -> Result<char, SyntaxError> {
    let s = match p.peek().clone() {
        Tok::Word(w) | Tok::Quoted(w) => {
            p.next();
            w
        }
        Tok::Punct("$") => {
            p.next();
            "$".to_string()
        }
        other => return p.error(format!("expected a character, found {other}")),
    };
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => p.error(format!("`{s}` is not a single character")),
    }
}

/// A character pattern: `_`, a character or a set name.
fn char_pat(p: &mut Parser, alphabet: &Alphabet) -> Result<CharPat, SyntaxError> {
    if p.eat("_") {
        return Ok(CharPat::Any);
    }
    if let Tok::Word(w) = p.peek().clone() {
        if w.chars().count() > 1 {
            p.next();
            return match alphabet.sets.get(&w) {
                Some(s) => Ok(CharPat::Set(s.clone())),
                None => p.error(format!("unknown set `{w}`")),
            };
        }
    }
    let c = pchar(p)?;
    Ok(CharPat::Set(BTreeSet::from([c])))
}

fn pair_pat(p: &mut Parser, alphabet: &Alphabet) -> Result<PairPat, SyntaxError> {
    let lex = char_pat(p, alphabet)?;
    let surf = if p.eat(":") {
        char_pat(p, alphabet)?
    } else {
        CharPat::Any
    };
    Ok(PairPat { lex, surf })
}

/// `_`, a single pattern, or `[pattern, ...]`.
fn context(p: &mut Parser, alphabet: &Alphabet) -> Result<Vec<PairPat>, SyntaxError> {
    if p.is_punct("_") && !matches!(p.peek_at(1), Tok::Punct(":")) {
        p.next();
        return Ok(Vec::new());
    }
    if p.eat("[") {
        let mut out = Vec::new();
        if !p.is_punct("]") {
            loop {
                out.push(pair_pat(p, alphabet)?);
                if !p.eat(",") {
                    break;
                }
            }
        }
        p.expect("]")?;
        return Ok(out);
    }
    Ok(vec![pair_pat(p, alphabet)?])
}

fn arrow(p: &mut Parser) -> Result<Direction, SyntaxError> {
    if p.eat("<=>") {
        Ok(Direction::Equivalence)
    } else if p.eat("=>") {
        Ok(Direction::Context)
    } else if p.eat("<=") {
        Ok(Direction::Surface)
    } else {
        p.error(format!("expected a rule arrow, found {}", p.peek()))
    }
}

fn parse_rule(p: &mut Parser, alphabet: &Alphabet, types: &TypeHierarchy) -> Result<TwoLevelRule, SyntaxError> {
    let line = p.line();
    let mut lcon = context(p, alphabet)?;
    let d1 = arrow(p)?;
    let lex = pchar(p)?;
    p.expect(":")?;
    let surf = pchar(p)?;
    let d2 = arrow(p)?;
    if d1 != d2 {
        return p.error("both arrows of a rule must agree");
    }
    let rcon = context(p, alphabet)?;
    let filter = if p.eat(":-") {
        parse_filter(p, types)?
    } else {
        Filter::default()
    };
    p.expect(".")?;
    lcon.reverse();
    Ok(TwoLevelRule {
        direction: d1,
        lex,
        surf,
        lcon,
        rcon,
        filter,
        line,
        text: String::new(),
    })
}

/// `filter(X, [X::p === v, ...])` or `filter(p = v, ...)`.
fn parse_filter(p: &mut Parser, types: &TypeHierarchy) -> Result<Filter, SyntaxError> {
    if !p.is_word("filter") {
        return p.error("expected `filter(...)`");
    }
    p.next();
    p.expect("(")?;
    let mut items = Vec::new();
    let var_form = matches!(p.peek(), Tok::Word(w) if w.starts_with(|c: char| c.is_uppercase()))
        && matches!(p.peek_at(1), Tok::Punct(","));
    if var_form {
        let var = p.word()?;
        p.expect(",")?;
        p.expect("[")?;
        loop {
            let v = p.word()?;
            if v != var {
                return p.error(format!("filter variable `{v}` should be `{var}`"));
            }
            p.expect("::")?;
            let path = filter_path(p, types)?;
            p.expect("===")?;
            items.push((path, filter_value(p, types)?));
            if !p.eat(",") {
                break;
            }
        }
        p.expect("]")?;
    } else {
        loop {
            let path = filter_path(p, types)?;
            p.expect("=")?;
            items.push((path, filter_value(p, types)?));
            if !p.eat(",") {
                break;
            }
        }
    }
    p.expect(")")?;
    Ok(Filter { items })
}

fn filter_path(p: &mut Parser, types: &TypeHierarchy) -> Result<Vec<FeatId>, SyntaxError> {
    let names = p.path()?;
    let msign = types.lookup("msign");
    let mut out = Vec::new();
    let mut cur = msign;
    for n in &names {
        let Some(f) = types.feature(n) else {
            return p.error(format!("unknown feature `{n}` in filter"));
        };
        if let Some(t) = cur {
            // the path must be walkable from msign, possibly via subtypes
            match types.feature_host(t, f) {
                Ok(Some(h)) => cur = types.approp_value(h, f),
                _ => return p.error(format!("filter path feature `{n}` is not appropriate here")),
            }
        }
        out.push(f);
    }
    Ok(out)
}

fn filter_value(p: &mut Parser, types: &TypeHierarchy) -> Result<FilterValue, SyntaxError> {
    match p.peek().clone() {
        Tok::Str(s) => {
            p.next();
            Ok(FilterValue::Str(s))
        }
        _ => {
            let name = p.atom()?;
            match types.lookup(&name) {
                Some(t) => Ok(FilterValue::Type(t)),
                None => p.error(format!("unknown type `{name}` in filter")),
            }
        }
    }
}

/// Pairs of a context pattern that the alphabet can realize, for reports.
pub fn realizable(alphabet: &Alphabet, pat: &PairPat) -> Vec<(char, char)> {
    alphabet
        .pairs
        .iter()
        .copied()
        .filter(|&(l, s)| pat.lex.matches(l) && pat.surf.matches(s))
        .collect()
}
