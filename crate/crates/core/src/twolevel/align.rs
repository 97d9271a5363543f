use super::compile::{CompiledRuleSet, PositionCheck};
use super::{Filter, NULL};
use crate::error::EngineError;
use crate::lexicon::MorphTrie;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterVerdict {
    Satisfied,
    Incompatible,
    Undetermined,
}

/// The feature-structure side of the relation, as seen by the aligner.
pub trait AlignEnv {
    type Mark;

    fn mark(&mut self) -> Self::Mark;
    /// Returns to `mark`, discarding it.
    fn undo(&mut self, mark: Self::Mark);
    fn verdict(&self, filter: &Filter) -> FilterVerdict;
    /// Adds the filter's constraints; `false` if they clash.
    fn assert_filter(&mut self, filter: &Filter) -> bool;
    /// Called for every complete alignment that passed incremental checks.
    fn accept(&mut self, rules: &CompiledRuleSet, alignment: &Alignment) -> Result<(), EngineError>;
    fn trace(&mut self, _msg: &dyn Fn() -> String) {}
}

/// Aligned lexical:surface pairs, nulls included.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alignment {
    pub pairs: Vec<(char, char)>,
}

impl Alignment {
    pub fn lexical(&self) -> String {
        self.pairs.iter().map(|p| p.0).filter(|&c| c != NULL).collect()
    }

    /// Surface stream with nulls.
    pub fn nullified(&self) -> String {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn surface(&self) -> String {
        self.pairs.iter().map(|p| p.1).filter(|&c| c != NULL).collect()
    }
}

/// Which streams are known. Analysis supplies the surface and uses the trie
/// to propose lexical characters; generation supplies the lexical string.
#[derive(Debug, Clone, Copy)]
pub struct AlignInput<'a> {
    pub lexical: Option<&'a [char]>,
    pub surface: Option<&'a [char]>,
    pub trie: Option<&'a MorphTrie>,
    pub max_nulls: usize,
}

/// Ignores filters (treats them as holding) and collects alignments.
#[derive(Debug, Default)]
pub struct NoFilters {
    pub results: Vec<Alignment>,
}

impl AlignEnv for NoFilters {
    type Mark = ();

    fn mark(&mut self) {}
    fn undo(&mut self, _: ()) {}

    fn verdict(&self, _: &Filter) -> FilterVerdict {
        FilterVerdict::Satisfied
    }

    fn assert_filter(&mut self, _: &Filter) -> bool {
        true
    }

    fn accept(&mut self, rules: &CompiledRuleSet, a: &Alignment) -> Result<(), EngineError> {
        if rules.validate(&a.pairs, &mut |_| FilterVerdict::Satisfied) {
            self.results.push(a.clone());
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Then {
    Extend,
    Finish,
}

struct Aligner<'a, E: AlignEnv> {
    rules: &'a CompiledRuleSet,
    input: AlignInput<'a>,
    env: &'a mut E,
    pairs: Vec<(char, char)>,
    li: usize,
    si: usize,
    lex_nulls: usize,
    surf_nulls: usize,
    trie: Vec<usize>,
    checked: usize,
}

/// Enumerates every alignment of the known streams licensed by the rules,
/// depth first over feasible pairs in a fixed order. Positions are checked
/// as soon as their right-context window is complete; filters of licensing
/// rules are asserted into the environment and undone on backtracking.
pub fn align<E: AlignEnv>(rules: &CompiledRuleSet, input: AlignInput<'_>, env: &mut E) -> Result<(), EngineError> {
    if input.lexical.is_none() && input.surface.is_none() {
        return Err(EngineError::Mode(
            "two-level relation needs a lexical or a surface string".into(),
        ));
    }
    let root = input.trie.map(|t| vec![t.root()]).unwrap_or_default();
    let mut a = Aligner {
        rules,
        input,
        env,
        pairs: Vec::new(),
        li: 0,
        si: 0,
        lex_nulls: 0,
        surf_nulls: 0,
        trie: root,
        checked: 0,
    };
    a.extend()
}

impl<E: AlignEnv> Aligner<'_, E> {
    fn analysis(&self) -> bool {
        self.input.lexical.is_none()
    }

    fn at_end(&self) -> bool {
        if self.pairs.is_empty() {
            return false;
        }
        let lex_done = match self.input.lexical {
            Some(l) => self.li == l.len(),
            None => match self.input.trie {
                Some(t) => self.trie.iter().any(|&n| t.is_accepting(n)),
                None => true,
            },
        };
        let surf_done = match self.input.surface {
            Some(s) => self.si == s.len(),
            None => true,
        };
        lex_done && surf_done
    }

    fn candidates(&self) -> Vec<(char, char)> {
        let alphabet = &self.rules.alphabet;
        alphabet
            .pairs
            .iter()
            .copied()
            .filter(|&(l, s)| {
                let lex_ok = if l == NULL {
                    self.lex_nulls < self.input.max_nulls
                } else {
                    match self.input.lexical {
                        Some(lex) => lex.get(self.li) == Some(&l),
                        None => true,
                    }
                };
                let surf_ok = if s == NULL {
                    self.surf_nulls < self.input.max_nulls
                } else {
                    match self.input.surface {
                        Some(surf) => surf.get(self.si) == Some(&s),
                        None => true,
                    }
                };
                lex_ok && surf_ok
            })
            .collect()
    }

    fn trie_step(&self, l: char) -> Option<Vec<usize>> {
        let trie = match (self.analysis(), self.input.trie) {
            (true, Some(t)) => t,
            _ => return Some(Vec::new()),
        };
        if l == NULL {
            return Some(self.trie.clone());
        }
        let mut next = Vec::new();
        for &n in &self.trie {
            if let Some(c) = trie.child(n, l) {
                next.push(c);
            }
            if n != trie.root() && trie.is_accepting(n) {
                if let Some(c) = trie.child(trie.root(), l) {
                    next.push(c);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        if next.is_empty() {
            None
        } else {
            Some(next)
        }
    }

    fn extend(&mut self) -> Result<(), EngineError> {
        if self.at_end() {
            let len = self.pairs.len();
            self.check_range(self.checked, len, Then::Finish)?;
        }
        for (l, s) in self.candidates() {
            if l == NULL && s == NULL {
                continue;
            }
            let Some(next_trie) = self.trie_step(l) else {
                continue;
            };
            let saved = (self.li, self.si, self.lex_nulls, self.surf_nulls, self.checked);
            let saved_trie = std::mem::replace(&mut self.trie, next_trie);
            self.pairs.push((l, s));
            if l == NULL {
                self.lex_nulls += 1;
            } else {
                self.lex_nulls = 0;
                self.li += 1;
            }
            if s == NULL {
                self.surf_nulls += 1;
            } else {
                self.surf_nulls = 0;
                self.si += 1;
            }
            let upto = self.pairs.len().saturating_sub(self.rules.max_rcon);
            let r = self.check_range(self.checked, upto, Then::Extend);
            self.pairs.pop();
            self.trie = saved_trie;
            (self.li, self.si, self.lex_nulls, self.surf_nulls, self.checked) = saved;
            r?;
        }
        Ok(())
    }

    fn check_range(&mut self, j: usize, upto: usize, then: Then) -> Result<(), EngineError> {
        if j >= upto {
            let saved = self.checked;
            self.checked = self.checked.max(upto);
            let r = match then {
                Then::Extend => self.extend(),
                Then::Finish => {
                    let a = Alignment {
                        pairs: self.pairs.clone(),
                    };
                    self.env.trace(&|| format!("alignment {}:{}", a.lexical(), a.nullified()));
                    self.env.accept(self.rules, &a)
                }
            };
            self.checked = saved;
            return r;
        }
        let env = &*self.env;
        let check = self
            .rules
            .check_position(&self.pairs, j, &mut |f| env.verdict(f));
        match check {
            PositionCheck::Ok => self.check_range(j + 1, upto, then),
            PositionCheck::Violation => Ok(()),
            PositionCheck::Assert(rules) => {
                for r in rules {
                    let filter = &self.rules.rules[r].filter;
                    let m = self.env.mark();
                    if self.env.assert_filter(filter) {
                        let (l, s) = self.pairs[j];
                        self.env.trace(&|| format!("commit rule {r} for {l}:{s} at {j}"));
                        let res = self.check_range(j + 1, upto, then);
                        self.env.undo(m);
                        res?;
                    } else {
                        self.env.undo(m);
                    }
                }
                Ok(())
            }
        }
    }
}
