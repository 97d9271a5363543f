use super::search::{dedup, Search};
use super::Grammar;
use crate::error::{EngineError, LoadError};
use crate::feature_structures::{Fs, NodeId, Store};
use crate::lexicon::Lexicon;
use crate::syntax::{Desc, DescBody};
use crate::twolevel::{CompiledRuleSet, RuleFile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Longest run of nulls on either tape.
    pub max_nulls: usize,
    /// Propose lexical characters from the morph trie during analysis.
    pub lookahead: bool,
    /// Functors tried per word when generating from a stem.
    pub max_affixes: usize,
    /// Nesting bound for labeling delayed relation clauses.
    pub max_label_depth: usize,
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_nulls: 2,
            lookahead: true,
            max_affixes: 2,
            max_label_depth: 12,
            trace: false,
        }
    }
}

/// A named input text.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub name: &'a str,
    pub text: &'a str,
}

impl<'a> Source<'a> {
    pub fn new(name: &'a str, text: &'a str) -> Self {
        Source { name, text }
    }
}

/// Everything needed for word analysis and generation.
#[derive(Debug, Clone)]
pub struct Engine {
    pub grammar: Grammar,
    pub rules: CompiledRuleSet,
    pub lexicon: Lexicon,
    pub config: EngineConfig,
}

#[derive(Debug, Clone, Default)]
pub struct Analysis {
    pub results: Vec<Fs>,
    pub warnings: Vec<String>,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Generation {
    pub forms: Vec<String>,
    /// No form, and the two-level constraint never got a ground string.
    pub insufficient: bool,
    pub warnings: Vec<String>,
    pub trace: Vec<String>,
}

/// Findings of a static check over a set of input files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }
}

struct Loaded {
    first: Option<LoadError>,
    grammar: Option<Grammar>,
    rules: Option<CompiledRuleSet>,
    lexicon: Option<Lexicon>,
    report: CheckReport,
}

fn load_all(grammar: Source, rules: Source, morphs: Source, lexemes: Source) -> Loaded {
    let mut out = Loaded {
        first: None,
        grammar: None,
        rules: None,
        lexicon: None,
        report: CheckReport::default(),
    };
    let fail = |out: &mut Loaded, e: LoadError| {
        out.report.errors.push(e.to_string());
        out.first.get_or_insert(e);
    };
    let g = match Grammar::parse(grammar.text, grammar.name) {
        Ok(g) => g,
        Err(e) => {
            fail(&mut out, e);
            return out;
        }
    };
    for (a, b) in g.types.ambiguous_meets() {
        let msg = format!(
            "types `{}` and `{}` have no unique greatest lower bound",
            g.types.name(a),
            g.types.name(b)
        );
        fail(&mut out, LoadError::invalid(grammar.name, 0, msg));
    }
    match RuleFile::parse(rules.text, rules.name, &g.types) {
        Ok(file) => {
            let set = CompiledRuleSet::compile_unchecked(file);
            for c in set.conflicts(&g.types) {
                let line = set.rules[c.second].line;
                fail(&mut out, LoadError::invalid(rules.name, line, c.message));
            }
            for d in set.dead_contexts() {
                out.report.warnings.push(format!("{}: {}", rules.name, d));
            }
            out.rules = Some(set);
        }
        Err(e) => fail(&mut out, e),
    }
    let mut lexicon = Lexicon::new();
    let mut lex_ok = true;
    if let Err(e) = lexicon.load_morphs(morphs.text, morphs.name, &g) {
        fail(&mut out, e);
        lex_ok = false;
    }
    if let Err(e) = lexicon.load_lexemes(lexemes.text, lexemes.name, &g) {
        fail(&mut out, e);
        lex_ok = false;
    }
    if let Some(set) = &out.rules {
        let lexical = set.alphabet.lexical_chars();
        let mut bad = Vec::new();
        for m in &lexicon.morphs {
            if let Some(c) = m.key.chars().find(|c| !lexical.contains(c)) {
                let msg = format!("morph \"{}\" uses `{c}`, which is not in the lexical alphabet", m.key);
                bad.push(LoadError::invalid(morphs.name, m.line, msg));
            }
        }
        for e in bad {
            fail(&mut out, e);
        }
    }
    if lex_ok {
        for s in lexicon.stems_without_lexeme() {
            out.report
                .warnings
                .push(format!("{}: stem \"{s}\" has no lexeme entry", lexemes.name));
        }
        out.lexicon = Some(lexicon);
    }
    out.grammar = Some(g);
    out
}

/// Static check of grammar, rules and lexicons; reports every finding
/// instead of stopping at the first.
pub fn check(grammar: Source, rules: Source, morphs: Source, lexemes: Source) -> CheckReport {
    load_all(grammar, rules, morphs, lexemes).report
}

/// Demonstration data: German verb inflection.
pub mod demo {
    pub const GRAMMAR: &str = include_str!("../../data/grammar.tfs");
    pub const RULES: &str = include_str!("../../data/rules.tl");
    pub const MORPHS: &str = include_str!("../../data/morphs.lex");
    pub const LEXEMES: &str = include_str!("../../data/lexemes.lex");
}

impl Engine {
    /// Loads and cross-checks all inputs. Missing lexeme entries are not
    /// fatal; analysis of such words warns instead.
    pub fn load(grammar: Source, rules: Source, morphs: Source, lexemes: Source) -> Result<Engine, LoadError> {
        let loaded = load_all(grammar, rules, morphs, lexemes);
        if let Some(e) = loaded.first {
            return Err(e);
        }
        Ok(Engine {
            grammar: loaded.grammar.expect("no errors"),
            rules: loaded.rules.expect("no errors"),
            lexicon: loaded.lexicon.expect("no errors"),
            config: EngineConfig::default(),
        })
    }

    pub fn demo() -> Engine {
        Engine::load(
            Source::new("grammar.tfs", demo::GRAMMAR),
            Source::new("rules.tl", demo::RULES),
            Source::new("morphs.lex", demo::MORPHS),
            Source::new("lexemes.lex", demo::LEXEMES),
        )
        .expect("demonstration data loads")
    }

    pub fn store(&self) -> Store<'_> {
        let mut s = Store::new(&self.grammar);
        if self.config.trace {
            s.enable_trace();
        }
        s
    }

    /// Runs the search from the store's current state and returns the
    /// deduplicated extractions of `roots` at every solution.
    pub fn solve<'e>(&'e self, store: &mut Store<'e>, roots: &[NodeId]) -> Result<Vec<Vec<Fs>>, EngineError> {
        let (leaves, _) = self.search(store, roots)?;
        Ok(dedup(&self.grammar.types, leaves.into_iter().map(|l| l.fs).collect()))
    }

    fn search<'e>(
        &'e self,
        store: &mut Store<'e>,
        roots: &[NodeId],
    ) -> Result<(Vec<super::search::Leaf>, Vec<String>), EngineError> {
        assert!(std::ptr::eq(store.grammar(), &self.grammar), "store belongs to another grammar");
        let mut search = Search::new(self, store, roots.to_vec());
        search.run()?;
        Ok((search.leaves, search.warnings))
    }

    pub fn analyze_word(&self, surface: &str) -> Result<Analysis, EngineError> {
        if surface.is_empty() {
            return Err(EngineError::Mode("cannot analyze the empty string".into()));
        }
        let alphabet = self.rules.alphabet.surface_chars();
        if let Some(c) = surface.chars().find(|c| !alphabet.contains(c)) {
            return Err(EngineError::Alphabet(c));
        }
        let mut store = self.store();
        let word = Desc::avm(Some("word"), vec![("phon", Desc::string(surface))]);
        let root = match store.build(&word) {
            Ok(n) => n,
            Err(e) => {
                return match e {
                    crate::Fail::Clash => Ok(Analysis::default()),
                    crate::Fail::Error(e) => Err(e),
                }
            }
        };
        let (leaves, warnings) = self.search(&mut store, &[root])?;
        let results = dedup(&self.grammar.types, leaves.into_iter().map(|l| l.fs).collect())
            .into_iter()
            .map(|mut v| v.remove(0))
            .collect();
        Ok(Analysis {
            results,
            warnings,
            trace: store.take_trace(),
        })
    }

    /// Surface forms of every word the partial description `spec` admits.
    pub fn generate_word(&self, spec: &Desc) -> Result<Generation, EngineError> {
        let mut store = self.store();
        let word_t = self.grammar.types.type_id("word")?;
        let root = match store.build(spec).and_then(|n| store.coerce(n, word_t).map(|_| n)) {
            Ok(n) => n,
            Err(crate::Fail::Clash) => return Ok(Generation::default()),
            Err(crate::Fail::Error(e)) => return Err(e),
        };
        let (leaves, warnings) = self.search(&mut store, &[root])?;
        let mut forms = Vec::new();
        let mut delayed = false;
        for leaf in &leaves {
            match leaf.fs[0].string_at("phon") {
                Some(s) if !leaf.morphology_delayed => {
                    if !forms.iter().any(|f: &String| f == s) {
                        forms.push(s.to_string());
                    }
                }
                _ => delayed = true,
            }
        }
        Ok(Generation {
            insufficient: forms.is_empty() && delayed,
            forms,
            warnings,
            trace: store.take_trace(),
        })
    }

    /// Surface forms for an analysis result.
    pub fn generate_from(&self, fs: &Fs) -> Result<Generation, EngineError> {
        let mut d = fs.to_desc();
        if let DescBody::Avm { feats, .. } = &mut d.body {
            feats.retain(|(p, _)| p.len() != 1 || p[0] != "phon");
        }
        self.generate_word(&d)
    }

    /// Combines a head daughter with complement daughters into a headed
    /// phrase and solves the phrase's principles.
    pub fn head_complement(&self, head: &Fs, comps: &[Fs]) -> Result<Vec<Fs>, EngineError> {
        let items = comps.iter().map(Fs::to_desc).collect();
        let phrase = Desc::avm(
            Some("headed_phrase"),
            vec![
                ("dtrs:head_dtr", head.to_desc()),
                (
                    "dtrs:comp_dtrs",
                    Desc {
                        tag: None,
                        body: DescBody::List { items, tail: None },
                    },
                ),
            ],
        );
        let mut store = self.store();
        let root = match store.build(&phrase) {
            Ok(n) => n,
            Err(crate::Fail::Clash) => return Ok(Vec::new()),
            Err(crate::Fail::Error(e)) => return Err(e),
        };
        Ok(self.solve(&mut store, &[root])?.into_iter().map(|mut v| v.remove(0)).collect())
    }
}
