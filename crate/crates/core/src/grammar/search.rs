//! Depth-first search over the nondeterministic parts of solving: ready
//! two-level and lexeme goals, labeling of delayed relation clauses, and
//! lexicalization of a word whose stem is known but whose morph tree is not.

use super::engine::Engine;
use crate::constraints::{labeling_options, pending_goals, probe_path, Builtin, Probed};
use crate::error::{EngineError, Fail};
use crate::feature_structures::{Checkpoint, Fs, GoalId, GoalKind, GoalState, NodeId, Store};
use crate::lexicon::{MorphEntry, MorphKind};
use crate::twolevel::{align, AlignEnv, AlignInput, Alignment, CompiledRuleSet, Filter, FilterValue, FilterVerdict};
use crate::type_system::STRING;

/// A consistent end state of the search.
#[derive(Debug, Clone)]
pub(crate) struct Leaf {
    pub fs: Vec<Fs>,
    /// A two-level goal is still waiting for a ground string.
    pub morphology_delayed: bool,
}

pub(crate) struct Search<'s, 'e> {
    engine: &'e Engine,
    store: &'s mut Store<'e>,
    roots: Vec<NodeId>,
    pub leaves: Vec<Leaf>,
    pub warnings: Vec<String>,
    label_depth: usize,
    lexicalized: bool,
}

/// Evaluates a rule filter against the morphological sign `f` without
/// changing the store.
pub(crate) fn filter_verdict(store: &Store<'_>, f: NodeId, filter: &Filter) -> FilterVerdict {
    let types = store.types();
    let mut open = false;
    for (path, value) in &filter.items {
        match probe_path(store, f, path) {
            Probed::Incompatible => return FilterVerdict::Incompatible,
            Probed::Blocked(_) => open = true,
            Probed::At { ty, ground, node } => match value {
                FilterValue::Type(t) => {
                    if types.is_subtype(ty, *t) {
                        continue;
                    }
                    match types.glb(ty, *t) {
                        Ok(None) => return FilterVerdict::Incompatible,
                        _ => open = true,
                    }
                }
                FilterValue::Str(s) => {
                    if ground {
                        if store.text(node) != Some(s.as_str()) {
                            return FilterVerdict::Incompatible;
                        }
                    } else if matches!(types.glb(ty, STRING), Ok(None)) {
                        return FilterVerdict::Incompatible;
                    } else {
                        open = true;
                    }
                }
            },
        }
    }
    if open {
        FilterVerdict::Undetermined
    } else {
        FilterVerdict::Satisfied
    }
}

impl<'s, 'e> Search<'s, 'e> {
    pub fn new(engine: &'e Engine, store: &'s mut Store<'e>, roots: Vec<NodeId>) -> Self {
        Search {
            engine,
            store,
            roots,
            leaves: Vec::new(),
            warnings: Vec::new(),
            label_depth: 0,
            lexicalized: false,
        }
    }

    pub fn run(&mut self) -> Result<(), EngineError> {
        self.step()
    }

    fn warn(&mut self, msg: String) {
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    /// Applies `f` on a checkpoint, continues the search if it succeeds and
    /// restores the store afterwards.
    fn branch(&mut self, f: impl FnOnce(&mut Store<'e>) -> Result<(), Fail>) -> Result<(), EngineError> {
        let cp = self.store.checkpoint();
        let out = match f(self.store).and_then(|_| self.store.run()) {
            Ok(()) => self.step(),
            Err(Fail::Clash) => Ok(()),
            Err(Fail::Error(e)) => Err(e),
        };
        self.store.undo_to(cp)?;
        self.store.release(cp)?;
        out
    }

    fn step(&mut self) -> Result<(), EngineError> {
        if let Some(&g) = self.store.ready_goals().first() {
            return match self.store.goal(g).kind {
                GoalKind::Builtin(Builtin::Morphology) => self.morphology(g),
                GoalKind::Builtin(Builtin::Lexeme) => self.lexeme(g),
                _ => self.branch(|s| {
                    s.set_goal_state(g, GoalState::Done);
                    Ok(())
                }),
            };
        }
        if self.label_depth < self.engine.config.max_label_depth {
            if let Some(options) = self.labeling() {
                self.label_depth += 1;
                let mut out = Ok(());
                for (n, t) in options {
                    self.store.trace(|| format!("label node {} as {}", n.index(), t.index()));
                    out = self.branch(|s| s.coerce(n, t));
                    if out.is_err() {
                        break;
                    }
                }
                self.label_depth -= 1;
                return out;
            }
        }
        if !self.lexicalized {
            if let Some((g, f)) = self.lexicalizable() {
                self.lexicalized = true;
                let out = self.lexicalize(g, f);
                self.lexicalized = false;
                return out;
            }
        }
        self.leaf();
        Ok(())
    }

    fn leaf(&mut self) {
        let morphology_delayed = pending_goals(self.store).into_iter().any(|g| {
            let goal = self.store.goal(g);
            goal.state == GoalState::Delayed && goal.kind == GoalKind::Builtin(Builtin::Morphology)
        });
        let fs = self.roots.iter().map(|&r| self.store.extract(r)).collect();
        self.leaves.push(Leaf { fs, morphology_delayed });
    }

    fn labeling(&self) -> Option<Vec<(NodeId, crate::type_system::TypeId)>> {
        pending_goals(self.store)
            .into_iter()
            .filter(|&g| self.store.goal(g).state == GoalState::Delayed)
            .map(|g| labeling_options(self.store, g))
            .find(|o| !o.is_empty())
    }

    fn ground_text(&self, n: NodeId) -> Option<Vec<char>> {
        self.store.text(self.store.deref(n)).map(|s| s.chars().collect())
    }

    fn morphology(&mut self, g: GoalId) -> Result<(), EngineError> {
        let engine = self.engine;
        let args = self.store.goal(g).args.clone();
        let (m, p, f) = (args[0], args[1], args[2]);
        let lexical = self.ground_text(m);
        let surface = self.ground_text(p);
        let trie = (lexical.is_none() && engine.config.lookahead).then_some(&engine.lexicon.trie);
        let input = AlignInput {
            lexical: lexical.as_deref(),
            surface: surface.as_deref(),
            trie,
            max_nulls: engine.config.max_nulls,
        };
        let cp = self.store.checkpoint();
        self.store.set_goal_state(g, GoalState::Done);
        let mut env = MorphEnv { search: self, m, p, f };
        let out = align(&engine.rules, input, &mut env);
        self.store.undo_to(cp)?;
        self.store.release(cp)?;
        out
    }

    fn lexeme(&mut self, g: GoalId) -> Result<(), EngineError> {
        let args = self.store.goal(g).args.clone();
        let stem = self.store.text(self.store.deref(args[0])).unwrap_or_default().to_string();
        let readings = self.engine.lexicon.lookup_lexeme(&stem);
        if readings.is_empty() {
            self.warn(format!("no lexeme entry for stem \"{stem}\""));
            return self.branch(|s| {
                s.set_goal_state(g, GoalState::Done);
                Ok(())
            });
        }
        for e in readings {
            self.branch(|s| {
                s.set_goal_state(g, GoalState::Done);
                let n = s.build(&e.desc)?;
                s.unify(args[1], n).map(|_| ())
            })?;
        }
        Ok(())
    }

    /// A delayed two-level goal whose sign has a ground stem.
    fn lexicalizable(&self) -> Option<(GoalId, NodeId)> {
        let stem = self.store.types().feature("stem")?;
        pending_goals(self.store).into_iter().find_map(|g| {
            let goal = self.store.goal(g);
            if goal.state != GoalState::Delayed || goal.kind != GoalKind::Builtin(Builtin::Morphology) {
                return None;
            }
            let f = goal.args[2];
            match probe_path(self.store, f, &[stem]) {
                Probed::At { ground: true, .. } => Some((g, f)),
                _ => None,
            }
        })
    }

    /// Tries every morph tree with up to `max_affixes` functors as the sign.
    fn lexicalize(&mut self, _g: GoalId, f: NodeId) -> Result<(), EngineError> {
        let lexicon = &self.engine.lexicon;
        let functors: Vec<&MorphEntry> = lexicon.morphs.iter().filter(|e| e.kind != MorphKind::Arg).collect();
        let mut seqs: Vec<Vec<&MorphEntry>> = vec![Vec::new()];
        let mut frontier = seqs.clone();
        for _ in 0..self.engine.config.max_affixes {
            let mut next = Vec::new();
            for s in &frontier {
                for &fun in &functors {
                    let mut t = s.clone();
                    t.push(fun);
                    next.push(t);
                }
            }
            seqs.extend(next.iter().cloned());
            frontier = next;
        }
        for arg in lexicon.morphs.iter().filter(|e| e.kind == MorphKind::Arg) {
            for seq in &seqs {
                self.store
                    .trace(|| format!("lexicalize {}", tree_name(arg, seq)));
                self.branch(|s| {
                    let tree = compose(s, arg, seq)?;
                    s.unify(f, tree).map(|_| ())
                })?;
            }
        }
        Ok(())
    }
}

fn tree_name(arg: &MorphEntry, functors: &[&MorphEntry]) -> String {
    let mut s = arg.key.clone();
    for f in functors {
        s = match f.kind {
            MorphKind::LeftFunctor => format!("{}({s})", f.key),
            _ => format!("({s}){}", f.key),
        };
    }
    s
}

/// Builds the morph tree `arg` with `functors` applied innermost first.
fn compose(s: &mut Store<'_>, arg: &MorphEntry, functors: &[&MorphEntry]) -> Result<NodeId, Fail> {
    let mut cur = s.build(&arg.desc)?;
    for fun in functors {
        let node = s.build(&fun.desc)?;
        let slot = s.path_get_str(node, "arg")?;
        s.unify(slot, cur)?;
        cur = node;
    }
    Ok(cur)
}

/// Splits a segmentation's readings into argument and functors in
/// application order: suffixes from the argument outwards, then prefixes.
fn arrange<'a>(readings: &[&'a MorphEntry]) -> Option<(&'a MorphEntry, Vec<&'a MorphEntry>)> {
    let i = readings.iter().position(|e| e.kind == MorphKind::Arg)?;
    let (left, rest) = readings.split_at(i);
    let right = &rest[1..];
    if !left.iter().all(|e| e.kind == MorphKind::LeftFunctor) || !right.iter().all(|e| e.kind == MorphKind::RightFunctor) {
        return None;
    }
    let mut order: Vec<&MorphEntry> = right.to_vec();
    order.extend(left.iter().rev());
    Some((rest[0], order))
}

/// Every choice of one reading per segment.
fn readings<'a>(lexicon: &'a crate::lexicon::Lexicon, segments: &[String]) -> Vec<Vec<&'a MorphEntry>> {
    let mut out: Vec<Vec<&MorphEntry>> = vec![Vec::new()];
    for seg in segments {
        let entries = lexicon.lookup(seg);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                entries.iter().map(move |&e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    out
}

/// Connects the aligner to the store: filters are read from and asserted
/// into the morphological sign, complete alignments continue the search.
/// Every accepted alignment is tied to a morph tree segmenting its lexical
/// side, also in generation, so that filters see the morphs' features.
struct MorphEnv<'a, 's, 'e> {
    search: &'a mut Search<'s, 'e>,
    m: NodeId,
    p: NodeId,
    f: NodeId,
}

impl AlignEnv for MorphEnv<'_, '_, '_> {
    type Mark = Checkpoint;

    fn mark(&mut self) -> Checkpoint {
        self.search.store.checkpoint()
    }

    fn undo(&mut self, mark: Checkpoint) {
        let store = &mut *self.search.store;
        store.undo_to(mark).expect("alignment marks are nested");
        store.release(mark).expect("alignment marks are nested");
    }

    fn verdict(&self, filter: &Filter) -> FilterVerdict {
        filter_verdict(self.search.store, self.f, filter)
    }

    fn assert_filter(&mut self, filter: &Filter) -> bool {
        let store = &mut *self.search.store;
        for (path, value) in &filter.items {
            let v = match value {
                FilterValue::Type(t) => store.new_node(*t),
                FilterValue::Str(s) => store.new_string(s),
            };
            if store.path_put(self.f, path, v).is_err() {
                return false;
            }
        }
        true
    }

    fn accept(&mut self, rules: &CompiledRuleSet, a: &Alignment) -> Result<(), EngineError> {
        let (m, p, f) = (self.m, self.p, self.f);
        let search = &mut *self.search;
        let lexical = a.lexical();
        let surface = a.surface();
        let lexicon = &search.engine.lexicon;
        for seg in lexicon.trie.segmentations(&lexical) {
            for combo in readings(lexicon, &seg) {
                let Some((arg, functors)) = arrange(&combo) else {
                    continue;
                };
                search.store.trace(|| format!("compose {}", tree_name(arg, &functors)));
                search.branch(|s| {
                    let tree = compose(s, arg, &functors)?;
                    s.unify(f, tree)?;
                    let ms = s.new_string(&lexical);
                    s.unify(m, ms)?;
                    let ps = s.new_string(&surface);
                    s.unify(p, ps)?;
                    validated(s, rules, a, f)
                })?;
            }
        }
        Ok(())
    }

    fn trace(&mut self, msg: &dyn Fn() -> String) {
        self.search.store.trace(msg);
    }
}

/// Final rule sweep once the sign is complete.
fn validated(s: &mut Store<'_>, rules: &CompiledRuleSet, a: &Alignment, f: NodeId) -> Result<(), Fail> {
    s.run()?;
    let store = &*s;
    if rules.validate(&a.pairs, &mut |flt| filter_verdict(store, f, flt)) {
        Ok(())
    } else {
        Err(Fail::Clash)
    }
}

/// Deduplicates solutions by mutual subsumption, keeping the first.
pub(crate) fn dedup(store_types: &crate::type_system::TypeHierarchy, items: Vec<Vec<Fs>>) -> Vec<Vec<Fs>> {
    let mut out: Vec<Vec<Fs>> = Vec::new();
    for item in items {
        let dup = out.iter().any(|o| {
            o.len() == item.len() && o.iter().zip(&item).all(|(x, y)| x.equivalent(y, store_types))
        });
        if !dup {
            out.push(item);
        }
    }
    out
}
