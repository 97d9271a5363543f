//! Morph and lexeme lexicons.
//!
//! Morph entries map a lexical string to one or more morphological signs:
//!
//! ```text
//! morph "rAt" : marg [stem: "rat", mhead: verb_stem [epenthese: '-', person: 3, umlaut: aou_umlaut]].
//! morph "+t"  : rightfunctor [stem: #1, mhead: verb_form [...], arg: msign [stem: #1, ...]].
//! ```
//!
//! The loader fills in `mstring` of arguments and `affix` of functors from
//! the key. Lexeme entries are keyed by stem and give the `synsem` value:
//!
//! ```text
//! lexeme "rat" : synsem [loc: [cat: [subcat: <np, np>], content: raten_rel]].
//! ```

use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::error::LoadError;
use crate::feature_structures::Store;
use crate::grammar::Grammar;
use crate::syntax::{Desc, DescBody, Parser, SyntaxError};

/// Prefix tree over lexical strings.
#[derive(Debug, Clone)]
pub struct MorphTrie {
    nodes: Vec<TrieNode>,
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: BTreeMap<char, usize>,
    entries: Vec<usize>,
}

/// What the trie allows after a prefix.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Continuations {
    pub chars: Vec<char>,
    pub accept: bool,
}

impl Default for MorphTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl MorphTrie {
    pub fn new() -> Self {
        MorphTrie {
            nodes: vec![TrieNode::default()],
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn insert(&mut self, key: &str, entry: usize) {
        let mut n = 0;
        for c in key.chars() {
            n = match self.nodes[n].children.get(&c) {
                Some(&m) => m,
                None => {
                    self.nodes.push(TrieNode::default());
                    let m = self.nodes.len() - 1;
                    self.nodes[n].children.insert(c, m);
                    m
                }
            };
        }
        self.nodes[n].entries.push(entry);
    }

    pub fn child(&self, n: usize, c: char) -> Option<usize> {
        self.nodes[n].children.get(&c).copied()
    }

    pub fn is_accepting(&self, n: usize) -> bool {
        !self.nodes[n].entries.is_empty()
    }

    pub fn entries_at(&self, n: usize) -> &[usize] {
        &self.nodes[n].entries
    }

    fn walk(&self, s: &str) -> Option<usize> {
        s.chars().try_fold(0, |n, c| self.child(n, c))
    }

    pub fn lookup(&self, s: &str) -> &[usize] {
        self.walk(s).map_or(&[], |n| self.entries_at(n))
    }

    pub fn continuations(&self, prefix: &str) -> Continuations {
        match self.walk(prefix) {
            Some(n) => Continuations {
                chars: self.nodes[n].children.keys().copied().collect(),
                accept: self.is_accepting(n),
            },
            None => Continuations::default(),
        }
    }

    /// Every way to cut `s` into stored strings.
    pub fn segmentations(&self, s: &str) -> Vec<Vec<String>> {
        let chars: Vec<char> = s.chars().collect();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.segment(&chars, 0, &mut cur, &mut out);
        out
    }

    fn segment(&self, chars: &[char], i: usize, cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if i == chars.len() {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        let mut n = 0;
        for j in i..chars.len() {
            match self.child(n, chars[j]) {
                Some(m) => n = m,
                None => return,
            }
            if self.is_accepting(n) {
                cur.push(chars[i..=j].iter().collect());
                self.segment(chars, j + 1, cur, out);
                cur.pop();
            }
        }
    }

    /// All stored strings, in trie order.
    pub fn strings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, String::new())];
        while let Some((n, s)) = stack.pop() {
            if self.is_accepting(n) {
                out.push(s.clone());
            }
            for (&c, &m) in self.nodes[n].children.iter().rev() {
                let mut t = s.clone();
                t.push(c);
                stack.push((m, t));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphKind {
    Arg,
    LeftFunctor,
    RightFunctor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphEntry {
    pub key: String,
    pub kind: MorphKind,
    pub desc: Desc,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexemeEntry {
    pub stem: String,
    pub desc: Desc,
    pub line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    pub morphs: Vec<MorphEntry>,
    pub trie: MorphTrie,
    lexemes: IndexMap<String, Vec<LexemeEntry>>,
}

fn set_feature(d: &mut Desc, feature: &str, value: &str) {
    if let DescBody::Avm { feats, .. } = &mut d.body {
        if !feats.iter().any(|(p, _)| p.len() == 1 && p[0] == feature) {
            feats.push((vec![feature.to_string()], Desc::string(value)));
        }
    }
}

fn entry_header(p: &mut Parser, keyword: &str) -> Result<(String, Desc), SyntaxError> {
    if !p.is_word(keyword) {
        return p.error(format!("expected `{keyword}`, found {}", p.peek()));
    }
    p.next();
    let key = p.string()?;
    p.expect(":")?;
    let desc = p.desc()?;
    p.expect(".")?;
    Ok((key, desc))
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads morph entries; each is type-checked against the grammar.
    pub fn load_morphs(&mut self, text: &str, file: &str, grammar: &Grammar) -> Result<(), LoadError> {
        let mut p = Parser::new(text, false).map_err(|e| LoadError::syntax(file, e))?;
        let types = &grammar.types;
        let (marg, left, right) = match (types.lookup("marg"), types.lookup("leftfunctor"), types.lookup("rightfunctor")) {
            (Some(a), Some(l), Some(r)) => (a, l, r),
            _ => {
                return Err(LoadError::invalid(
                    file,
                    1,
                    "grammar lacks the types marg, leftfunctor and rightfunctor",
                ))
            }
        };
        while !p.at_eof() {
            let line = p.line();
            let (key, mut desc) = entry_header(&mut p, "morph").map_err(|e| LoadError::syntax(file, e))?;
            let mut store = Store::new(grammar);
            let n = store
                .build(&desc)
                .map_err(|e| LoadError::invalid(file, line, format!("entry \"{key}\" is ill-formed: {e}")))?;
            let ty = store.type_of(n);
            let kind = if types.is_subtype(ty, marg) {
                MorphKind::Arg
            } else if types.is_subtype(ty, left) {
                MorphKind::LeftFunctor
            } else if types.is_subtype(ty, right) {
                MorphKind::RightFunctor
            } else {
                return Err(LoadError::invalid(
                    file,
                    line,
                    format!("entry \"{key}\" must be a marg, leftfunctor or rightfunctor"),
                ));
            };
            match kind {
                MorphKind::Arg => set_feature(&mut desc, "mstring", &key),
                _ => set_feature(&mut desc, "affix", &key),
            }
            let mut check = Store::new(grammar);
            check
                .build(&desc)
                .map_err(|e| LoadError::invalid(file, line, format!("entry \"{key}\" is ill-formed: {e}")))?;
            let id = self.morphs.len();
            self.trie.insert(&key, id);
            self.morphs.push(MorphEntry { key, kind, desc, line });
        }
        Ok(())
    }

    pub fn load_lexemes(&mut self, text: &str, file: &str, grammar: &Grammar) -> Result<(), LoadError> {
        let mut p = Parser::new(text, false).map_err(|e| LoadError::syntax(file, e))?;
        let synsem = grammar
            .types
            .lookup("synsem")
            .ok_or_else(|| LoadError::invalid(file, 1, "grammar lacks the type synsem"))?;
        while !p.at_eof() {
            let line = p.line();
            let (stem, desc) = entry_header(&mut p, "lexeme").map_err(|e| LoadError::syntax(file, e))?;
            let mut store = Store::new(grammar);
            let n = store
                .build(&desc)
                .map_err(|e| LoadError::invalid(file, line, format!("lexeme \"{stem}\" is ill-formed: {e}")))?;
            store
                .coerce(n, synsem)
                .map_err(|_| LoadError::invalid(file, line, format!("lexeme \"{stem}\" is not a synsem")))?;
            self.lexemes
                .entry(stem.clone())
                .or_default()
                .push(LexemeEntry { stem, desc, line });
        }
        Ok(())
    }

    pub fn entry(&self, i: usize) -> &MorphEntry {
        &self.morphs[i]
    }

    pub fn lookup(&self, key: &str) -> Vec<&MorphEntry> {
        self.trie.lookup(key).iter().map(|&i| &self.morphs[i]).collect()
    }

    pub fn continuations(&self, prefix: &str) -> Continuations {
        self.trie.continuations(prefix)
    }

    pub fn lookup_lexeme(&self, stem: &str) -> &[LexemeEntry] {
        self.lexemes.get(stem).map_or(&[], Vec::as_slice)
    }

    pub fn lexeme_stems(&self) -> impl Iterator<Item = &str> {
        self.lexemes.keys().map(String::as_str)
    }

    /// Stem strings declared by argument entries.
    pub fn stems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for m in &self.morphs {
            if m.kind != MorphKind::Arg {
                continue;
            }
            if let DescBody::Avm { feats, .. } = &m.desc.body {
                for (p, d) in feats {
                    if p.len() == 1 && p[0] == "stem" {
                        if let DescBody::Str(s) = &d.body {
                            if !out.contains(s) {
                                out.push(s.clone());
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Argument stems with no lexeme entry.
    pub fn stems_without_lexeme(&self) -> Vec<String> {
        self.stems()
            .into_iter()
            .filter(|s| self.lookup_lexeme(s).is_empty())
            .collect()
    }

    pub fn dump_morphs(&self) -> String {
        let mut out = String::new();
        for m in &self.morphs {
            out.push_str(&format!("morph {} : {}.\n", crate::syntax::quote_string(&m.key), m.desc));
        }
        out
    }

    pub fn dump_lexemes(&self) -> String {
        let mut out = String::new();
        for entries in self.lexemes.values() {
            for e in entries {
                out.push_str(&format!("lexeme {} : {}.\n", crate::syntax::quote_string(&e.stem), e.desc));
            }
        }
        out
    }
}
