use std::collections::BTreeMap;
use std::fmt;

use super::{Alphabet, Filter, PairPat, RuleFile, TwoLevelRule, WORD_BOUNDARY};
use crate::type_system::TypeHierarchy;

use super::align::FilterVerdict;

/// Two coercing rules that force different surface characters for the same
/// lexical character in overlapping contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConflict {
    pub first: usize,
    pub second: usize,
    pub message: String,
}

impl fmt::Display for RuleConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Rules indexed for the aligner.
///
/// Coercion clauses (the `<=` half) are keyed by lexical character, license
/// clauses (the `=>` half) by pair. Within a key, rules with longer contexts
/// come first, then file order. A pair with no license clause falls through
/// to the default rule: any feasible pair is allowed.
#[derive(Debug, Clone)]
pub struct CompiledRuleSet {
    pub alphabet: Alphabet,
    pub rules: Vec<TwoLevelRule>,
    coercions: BTreeMap<char, Vec<usize>>,
    licenses: BTreeMap<(char, char), Vec<usize>>,
    /// Longest right context; positions are checked once this many pairs
    /// follow them.
    pub max_rcon: usize,
}

/// Result of checking one position of an alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositionCheck {
    Ok,
    Violation,
    /// Licensed only if one of these rules' filters is asserted.
    Assert(Vec<usize>),
}

fn specificity(r: &TwoLevelRule) -> usize {
    r.lcon.len() + r.rcon.len()
}

impl CompiledRuleSet {
    pub fn compile(file: RuleFile, types: &TypeHierarchy) -> Result<Self, Vec<RuleConflict>> {
        let set = Self::compile_unchecked(file);
        let conflicts = set.conflicts(types);
        if conflicts.is_empty() {
            Ok(set)
        } else {
            Err(conflicts)
        }
    }

    /// Indexes the rules without looking for conflicts.
    pub fn compile_unchecked(file: RuleFile) -> Self {
        let RuleFile { alphabet, rules } = file;
        let mut order: Vec<usize> = (0..rules.len()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(specificity(&rules[i])), i));
        let mut coercions: BTreeMap<char, Vec<usize>> = BTreeMap::new();
        let mut licenses: BTreeMap<(char, char), Vec<usize>> = BTreeMap::new();
        for &i in &order {
            let r = &rules[i];
            if r.direction.coerces() {
                coercions.entry(r.lex).or_default().push(i);
            }
            if r.direction.licenses() {
                licenses.entry((r.lex, r.surf)).or_default().push(i);
            }
        }
        let max_rcon = rules.iter().map(|r| r.rcon.len()).max().unwrap_or(0);
        CompiledRuleSet {
            alphabet,
            rules,
            coercions,
            licenses,
            max_rcon,
        }
    }

    /// A copy with rule `i` removed.
    pub fn without_rule(&self, i: usize) -> Self {
        let mut rules = self.rules.clone();
        rules.remove(i);
        Self::compile_unchecked(RuleFile {
            alphabet: self.alphabet.clone(),
            rules,
        })
    }

    pub fn is_restricted(&self, l: char, s: char) -> bool {
        self.licenses.contains_key(&(l, s))
    }

    pub fn coercions_for(&self, l: char) -> &[usize] {
        self.coercions.get(&l).map_or(&[], Vec::as_slice)
    }

    pub fn licenses_for(&self, l: char, s: char) -> &[usize] {
        self.licenses.get(&(l, s)).map_or(&[], Vec::as_slice)
    }

    /// Whether rule `r`'s contexts match around position `j` of a complete
    /// window of `pairs`.
    pub fn context_matches(&self, r: usize, pairs: &[(char, char)], j: usize) -> bool {
        let rule = &self.rules[r];
        let left = rule.lcon.iter().enumerate().all(|(k, pat)| {
            let at = (j as isize) - 1 - k as isize;
            pat.matches(if at >= 0 { Some(pairs[at as usize]) } else { None })
        });
        left && rule.rcon.iter().enumerate().all(|(k, pat)| pat.matches(pairs.get(j + 1 + k).copied()))
    }

    /// Checks position `j` against every rule. `verdict` evaluates filters
    /// against the current feature structure. Coercions whose filter is
    /// still undetermined are skipped here; `validate` re-checks them.
    pub fn check_position(
        &self,
        pairs: &[(char, char)],
        j: usize,
        verdict: &mut dyn FnMut(&Filter) -> FilterVerdict,
    ) -> PositionCheck {
        let (l, s) = pairs[j];
        for &r in self.coercions_for(l) {
            let rule = &self.rules[r];
            if rule.surf == s || !self.context_matches(r, pairs, j) {
                continue;
            }
            if rule.filter.is_empty() || verdict(&rule.filter) == FilterVerdict::Satisfied {
                return PositionCheck::Violation;
            }
        }
        let clauses = self.licenses_for(l, s);
        if clauses.is_empty() {
            return PositionCheck::Ok;
        }
        let mut pending = Vec::new();
        for &r in clauses {
            if !self.context_matches(r, pairs, j) {
                continue;
            }
            let rule = &self.rules[r];
            if rule.filter.is_empty() {
                return PositionCheck::Ok;
            }
            match verdict(&rule.filter) {
                FilterVerdict::Satisfied => return PositionCheck::Ok,
                FilterVerdict::Undetermined => pending.push(r),
                FilterVerdict::Incompatible => {}
            }
        }
        if pending.is_empty() {
            PositionCheck::Violation
        } else {
            PositionCheck::Assert(pending)
        }
    }

    /// Final sweep over a complete alignment. Every restricted pair must be
    /// licensed by a rule whose filter holds, and no coercion whose filter
    /// holds may be violated.
    pub fn validate(&self, pairs: &[(char, char)], verdict: &mut dyn FnMut(&Filter) -> FilterVerdict) -> bool {
        (0..pairs.len()).all(|j| self.check_position(pairs, j, verdict) == PositionCheck::Ok)
    }

    fn contexts_overlap(&self, a: &[PairPat], b: &[PairPat]) -> bool {
        let n = a.len().max(b.len());
        let any = PairPat::any();
        (0..n).all(|k| {
            let pa = a.get(k).unwrap_or(&any);
            let pb = b.get(k).unwrap_or(&any);
            let lex = pa.lex.meet(&pb.lex);
            let surf = pa.surf.meet(&pb.surf);
            lex.matches(WORD_BOUNDARY)
                || self
                    .alphabet
                    .pairs
                    .iter()
                    .any(|&(l, s)| lex.matches(l) && surf.matches(s))
        })
    }

    /// Pairwise overlap check of coercing rules.
    pub fn conflicts(&self, types: &TypeHierarchy) -> Vec<RuleConflict> {
        let mut out = Vec::new();
        for (i, a) in self.rules.iter().enumerate() {
            for (j, b) in self.rules.iter().enumerate().skip(i + 1) {
                if !(a.direction.coerces() && b.direction.coerces()) || a.lex != b.lex || a.surf == b.surf {
                    continue;
                }
                if self.contexts_overlap(&a.lcon, &b.lcon)
                    && self.contexts_overlap(&a.rcon, &b.rcon)
                    && a.filter.compatible(&b.filter, types)
                {
                    out.push(RuleConflict {
                        first: i,
                        second: j,
                        message: format!(
                            "rules on lines {} and {} force {}:{} and {}:{} in overlapping contexts",
                            a.line, b.line, a.lex, a.surf, b.lex, b.surf
                        ),
                    });
                }
            }
        }
        out
    }

    /// Context positions that no feasible pair can fill.
    pub fn dead_contexts(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rules {
            for pat in r.lcon.iter().chain(&r.rcon) {
                if super::realizable(&self.alphabet, pat).is_empty() && !pat.lex.matches(WORD_BOUNDARY) {
                    out.push(format!("rule on line {} has a context position no feasible pair matches", r.line));
                }
            }
        }
        out
    }
}
