//! Independent reference implementations used by the acceptance suite.
//! None of this goes through the engine: the demo rules, feasible pairs and
//! lexicon are restated here by hand.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub const SURFACE_ALPHABET: &[char] = &['a', 'b', 'd', 'e', 'g', 'r', 's', 't', 'ä'];

/// Surface realizations of each lexical character; `'0'` is the null.
fn surfaces(l: char) -> Vec<char> {
    match l {
        'A' => vec!['a', 'ä'],
        '+' => vec!['0', 'e'],
        't' => vec!['t', '0'],
        c => vec![c],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facts {
    pub umlaut: bool,
    pub epenthese: bool,
}

/// The three rules as predicates over a complete pair sequence.
pub fn licensed(pairs: &[(char, char)], facts: Facts) -> bool {
    for (j, &(l, s)) in pairs.iter().enumerate() {
        let next = pairs.get(j + 1).copied();
        let next2 = pairs.get(j + 2).copied();
        let prev = j.checked_sub(1).map(|i| pairs[i]);
        // A:"a <=> _ , when the sign has aou umlaut
        if l == 'A' && (s == 'ä') != facts.umlaut {
            return false;
        }
        // t:0 <=> _ +:0 t:t
        let elision = next == Some(('+', '0')) && next2 == Some(('t', 't'));
        if l == 't' && (s == '0') != elision {
            return false;
        }
        // +:e <=> {d,t} _ {s,t}, when the sign has epenthesis
        let epenthesis = facts.epenthese
            && prev.is_some_and(|p| p.0 == 'd' || p.0 == 't')
            && next.is_some_and(|n| n.0 == 's' || n.0 == 't');
        if l == '+' && (s == 'e') != epenthesis {
            return false;
        }
    }
    true
}

/// Every surface string the rules allow for a lexical string, by brute
/// force over all pair sequences.
pub fn realizations(lexical: &str, facts: Facts) -> BTreeSet<String> {
    let chars: Vec<char> = lexical.chars().collect();
    let mut out = BTreeSet::new();
    let mut pairs = Vec::new();
    fn go(chars: &[char], i: usize, pairs: &mut Vec<(char, char)>, facts: Facts, out: &mut BTreeSet<String>) {
        if i == chars.len() {
            if licensed(pairs, facts) {
                out.insert(pairs.iter().map(|p| p.1).filter(|&c| c != '0').collect());
            }
            return;
        }
        for s in surfaces(chars[i]) {
            pairs.push((chars[i], s));
            go(chars, i + 1, pairs, facts, out);
            pairs.pop();
        }
    }
    go(&chars, 0, &mut pairs, facts, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Reading {
    pub lexical: String,
    pub stem: String,
    pub affix: String,
    pub person: u8,
    pub facts: Facts,
}

/// Inflected words of the demo lexicon: a verb stem with exactly one
/// person suffix. Bare stems are not words (the word's head must be a
/// verb form) and suffixes do not stack (a suffix takes a verb stem).
pub fn words() -> Vec<Reading> {
    let stems = [
        ("rAt", "rat", Facts { umlaut: true, epenthese: false }),
        ("sag", "sag", Facts { umlaut: false, epenthese: false }),
        ("bad", "bad", Facts { umlaut: false, epenthese: true }),
    ];
    let suffixes = [("+t", 3), ("+st", 2)];
    let mut out = Vec::new();
    for (lex, stem, facts) in stems {
        for (affix, person) in suffixes {
            out.push(Reading {
                lexical: format!("{lex}{affix}"),
                stem: stem.to_string(),
                affix: affix.to_string(),
                person,
                facts,
            });
        }
    }
    out
}

/// Surface form → readings.
pub fn language() -> BTreeMap<String, Vec<Reading>> {
    let mut m: BTreeMap<String, Vec<Reading>> = BTreeMap::new();
    for r in words() {
        for s in realizations(&r.lexical, r.facts) {
            m.entry(s).or_default().push(r.clone());
        }
    }
    m
}

pub fn analyses(surface: &str) -> Vec<Reading> {
    language().remove(surface).unwrap_or_default()
}

/// Mathematical append.
pub fn append<T: Clone>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().chain(y).cloned().collect()
}

/// Phrase subcat under "head subcat = phrase subcat ++ complement synsems",
/// for atomic categories that unify only when equal.
pub fn phrase_subcat<T: Clone + PartialEq>(head: &[T], comps: &[T]) -> Option<Vec<T>> {
    let k = head.len().checked_sub(comps.len())?;
    (head[k..] == *comps).then(|| head[..k].to_vec())
}

/// All lists over `symbols` up to `max_len`, shortest first.
pub fn all_lists<T: Clone>(symbols: &[T], max_len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &layer {
            for s in symbols {
                let mut m: Vec<T> = l.clone();
                m.push(s.clone());
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
