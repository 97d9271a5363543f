//! Conditional constraints attached to types, relational clauses and
//! built-in relations.
//!
//! A definition has the form `name(X, ...) :- Antecedent ===> Consequent.`
//! The antecedent may only state typing requirements on paths. Evaluating
//! it against the store yields one of three verdicts: satisfied (the
//! consequent is enforced), incompatible (the constraint is discarded) or
//! undetermined (the goal is parked on the nodes whose refinement could
//! change the verdict and re-checked when one of them changes).

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;

use crate::error::{EngineError, Fail};
use crate::feature_structures::{GoalId, GoalKind, GoalState, Licensing, NodeId, Store, Task};
use crate::syntax::{Parser, SyntaxError, Tok};
use crate::type_system::{FeatId, TypeHierarchy, TypeId, STRING};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub(crate) u32);

impl ConstraintId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `concat(A, B, C)`: C is A followed by B.
    Concat,
    /// `morphology(Mstring, Phon, Morph)`: the two-level relation.
    Morphology,
    /// `lexeme(Stem, Synsem)`: lexeme lexicon lookup.
    Lexeme,
}

impl Builtin {
    pub fn by_name(name: &str, arity: usize) -> Option<Builtin> {
        match (name, arity) {
            ("concat", 3) => Some(Builtin::Concat),
            ("morphology", 3) => Some(Builtin::Morphology),
            ("lexeme", 2) => Some(Builtin::Lexeme),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Concat => "concat",
            Builtin::Morphology => "morphology",
            Builtin::Lexeme => "lexeme",
        }
    }
}

/// What a path value must be for the antecedent to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    /// `X::p === t` or `X::p ::= t`: the value is of type `t` or below.
    Type(TypeId),
    /// `X::p === subtype_of(t)`: strictly more specific than `t`; for
    /// strings this means a ground string.
    Proper(TypeId),
}

impl Requirement {
    pub fn ty(self) -> TypeId {
        match self {
            Requirement::Type(t) | Requirement::Proper(t) => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Antecedent {
    pub var: usize,
    pub path: Vec<FeatId>,
    pub req: Requirement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Path(usize, Vec<FeatId>),
    Type(TypeId),
    Str(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Callee {
    Relation(usize),
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Equate(Term, Term),
    Call {
        name: String,
        callee: Option<Callee>,
        args: Vec<Term>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalConstraint {
    pub id: ConstraintId,
    pub name: String,
    /// Variable names; the first `arity` are the parameters.
    pub vars: Vec<String>,
    pub arity: usize,
    /// Type named by a `X ::= t` requirement on the first parameter.
    pub anchor: Option<TypeId>,
    pub antecedent: Vec<Antecedent>,
    pub consequent: Vec<Action>,
    pub conditional: bool,
    explicit_principle: bool,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub clauses: Vec<ConstraintId>,
}

/// Principles and relations of a grammar, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    constraints: Vec<ConditionalConstraint>,
    principles: Vec<ConstraintId>,
    relations: Vec<Relation>,
    by_name: IndexMap<(String, usize), usize>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, c: ConstraintId) -> &ConditionalConstraint {
        &self.constraints[c.index()]
    }

    pub fn all(&self) -> &[ConditionalConstraint] {
        &self.constraints
    }

    pub fn principles(&self) -> &[ConstraintId] {
        &self.principles
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str, arity: usize) -> Option<&Relation> {
        self.by_name.get(&(name.to_string(), arity)).map(|&i| &self.relations[i])
    }

    pub fn principle(&self, name: &str) -> Option<ConstraintId> {
        self.principles
            .iter()
            .copied()
            .find(|c| self.constraints[c.index()].name == name)
    }

    /// Principles whose anchor is `t` or a supertype of it.
    pub fn attached(&self, types: &TypeHierarchy, t: TypeId) -> Vec<ConstraintId> {
        self.principles
            .iter()
            .copied()
            .filter(|c| {
                self.constraints[c.index()]
                    .anchor
                    .is_some_and(|a| types.is_subtype(t, a))
            })
            .collect()
    }

    /// Parses one definition, the parser positioned at its name.
    pub fn parse_definition(
        &mut self,
        p: &mut Parser,
        types: &TypeHierarchy,
    ) -> Result<(), SyntaxError> {
        let line = p.line();
        let name = p.word()?;
        let mut vars = VarTable::default();
        p.expect("(")?;
        loop {
            let v = var_name(p)?;
            if vars.names.contains(&v) {
                return p.error(format!("parameter `{v}` repeated in `{name}`"));
            }
            vars.names.push(v);
            if !p.eat(",") {
                break;
            }
        }
        p.expect(")")?;
        let arity = vars.names.len();
        let explicit_principle = if p.eat(":=") {
            true
        } else {
            p.expect(":-")?;
            false
        };
        let mut items = Vec::new();
        let mut antecedent_items = None;
        loop {
            items.push(parse_item(p, types, &mut vars)?);
            if p.eat(",") {
                continue;
            }
            if p.eat("===>") || p.eat("==>") {
                if antecedent_items.is_some() {
                    return p.error("a definition has at most one `===>`");
                }
                antecedent_items = Some(std::mem::take(&mut items));
                continue;
            }
            break;
        }
        p.expect(".")?;
        let conditional = antecedent_items.is_some();
        let mut antecedent = Vec::new();
        for item in antecedent_items.unwrap_or_default() {
            match item {
                Item::Typing(a) => {
                    if a.var >= arity {
                        return Err(SyntaxError {
                            line,
                            message: format!(
                                "antecedent of `{name}` constrains `{}`, which is not a parameter",
                                vars.names[a.var]
                            ),
                        });
                    }
                    antecedent.push(a)
                }
                Item::Action(_) => {
                    return Err(SyntaxError {
                        line,
                        message: format!(
                            "antecedent of `{name}` may only contain typing requirements"
                        ),
                    })
                }
            }
        }
        let mut equations = Vec::new();
        let mut calls = Vec::new();
        for item in items {
            match item {
                Item::Typing(a) => equations.push(Action::Equate(
                    Term::Path(a.var, a.path),
                    match a.req {
                        Requirement::Type(t) => Term::Type(t),
                        Requirement::Proper(_) => {
                            return Err(SyntaxError {
                                line,
                                message: "`subtype_of` is only allowed in antecedents".into(),
                            })
                        }
                    },
                )),
                Item::Action(a @ Action::Equate(..)) => equations.push(a),
                Item::Action(a) => calls.push(a),
            }
        }
        // path equations run before relational goals
        equations.extend(calls);
        if explicit_principle && arity != 1 {
            return Err(SyntaxError {
                line,
                message: format!("principle `{name}` must have exactly one parameter"),
            });
        }
        let anchor = antecedent
            .iter()
            .find(|a| a.var == 0 && a.path.is_empty())
            .map(|a| a.req.ty());
        let id = ConstraintId(self.constraints.len() as u32);
        self.constraints.push(ConditionalConstraint {
            id,
            name,
            vars: vars.names,
            arity,
            anchor,
            antecedent,
            consequent: equations,
            conditional,
            explicit_principle,
            line,
        });
        Ok(())
    }

    /// Classifies definitions into principles and relations and resolves
    /// calls. A one-parameter conditional definition that is never called
    /// is a principle, as is every `:=` definition.
    pub fn resolve(&mut self) -> Result<(), (usize, String)> {
        let mut called: HashMap<(String, usize), ()> = HashMap::new();
        for c in &self.constraints {
            for a in &c.consequent {
                if let Action::Call { name, args, .. } = a {
                    called.insert((name.clone(), args.len()), ());
                }
            }
        }
        self.principles.clear();
        self.relations.clear();
        self.by_name.clear();
        for c in &self.constraints {
            let key = (c.name.clone(), c.arity);
            let principle = c.explicit_principle
                || (c.arity == 1 && c.conditional && !called.contains_key(&key));
            if principle {
                if self.by_name.contains_key(&key) || self.principles.iter().any(|p| self.constraints[p.index()].name == c.name) {
                    return Err((c.line, format!("`{}` is defined more than once", c.name)));
                }
                self.principles.push(c.id);
                continue;
            }
            if Builtin::by_name(&c.name, c.arity).is_some() {
                return Err((c.line, format!("`{}/{}` is a built-in relation", c.name, c.arity)));
            }
            match self.by_name.get(&key) {
                Some(&r) => self.relations[r].clauses.push(c.id),
                None => {
                    self.by_name.insert(key, self.relations.len());
                    self.relations.push(Relation {
                        name: c.name.clone(),
                        arity: c.arity,
                        clauses: vec![c.id],
                    });
                }
            }
        }
        for i in 0..self.constraints.len() {
            let line = self.constraints[i].line;
            let mut consequent = std::mem::take(&mut self.constraints[i].consequent);
            for a in &mut consequent {
                if let Action::Call { name, callee, args } = a {
                    let key = (name.clone(), args.len());
                    *callee = match self.by_name.get(&key) {
                        Some(&r) => Some(Callee::Relation(r)),
                        None => match Builtin::by_name(name, args.len()) {
                            Some(b) => Some(Callee::Builtin(b)),
                            None => {
                                return Err((
                                    line,
                                    format!("unknown relation `{}/{}`", name, args.len()),
                                ))
                            }
                        },
                    };
                }
            }
            self.constraints[i].consequent = consequent;
        }
        Ok(())
    }
}

#[derive(Default)]
struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    fn index(&mut self, v: &str) -> usize {
        match self.names.iter().position(|n| n == v) {
            Some(i) => i,
            None => {
                self.names.push(v.to_string());
                self.names.len() - 1
            }
        }
    }
}

enum Item {
    Typing(Antecedent),
    Action(Action),
}

fn is_var(w: &str) -> bool {
    w.starts_with(|c: char| c.is_uppercase())
}

fn var_name(p: &mut Parser) -> Result<String, SyntaxError> {
    match p.peek().clone() {
        Tok::Word(w) if is_var(&w) => {
            p.next();
            Ok(w)
        }
        other => p.error(format!("expected a variable, found {other}")),
    }
}

fn feature_path(p: &mut Parser, types: &TypeHierarchy) -> Result<Vec<FeatId>, SyntaxError> {
    let names = p.path()?;
    names
        .iter()
        .map(|f| match types.feature(f) {
            Some(id) => Ok(id),
            None => p.error(format!("unknown feature `{f}`")),
        })
        .collect()
}

fn type_name(p: &mut Parser, types: &TypeHierarchy) -> Result<TypeId, SyntaxError> {
    let name = p.atom()?;
    match types.lookup(&name) {
        Some(t) => Ok(t),
        None => p.error(format!("unknown type `{name}`")),
    }
}

/// A term on the right of `===` or `=`, or a call argument.
fn parse_term(p: &mut Parser, types: &TypeHierarchy, vars: &mut VarTable) -> Result<Term, SyntaxError> {
    match p.peek().clone() {
        Tok::Word(w) if is_var(&w) => {
            p.next();
            let v = vars.index(&w);
            if p.eat("::") {
                Ok(Term::Path(v, feature_path(p, types)?))
            } else {
                Ok(Term::Var(v))
            }
        }
        Tok::Str(s) => {
            p.next();
            Ok(Term::Str(s))
        }
        Tok::Word(_) | Tok::Quoted(_) => Ok(Term::Type(type_name(p, types)?)),
        other => p.error(format!("expected a term, found {other}")),
    }
}

fn parse_item(p: &mut Parser, types: &TypeHierarchy, vars: &mut VarTable) -> Result<Item, SyntaxError> {
    match p.peek().clone() {
        Tok::Word(w) if is_var(&w) => {
            p.next();
            let v = vars.index(&w);
            if p.eat("::=") {
                let t = type_name(p, types)?;
                return Ok(Item::Typing(Antecedent {
                    var: v,
                    path: Vec::new(),
                    req: Requirement::Type(t),
                }));
            }
            if p.eat("=") {
                let rhs = parse_term(p, types, vars)?;
                return Ok(Item::Action(Action::Equate(Term::Var(v), rhs)));
            }
            p.expect("::")?;
            let path = feature_path(p, types)?;
            if p.eat("::=") {
                let t = type_name(p, types)?;
                return Ok(Item::Typing(Antecedent {
                    var: v,
                    path,
                    req: Requirement::Type(t),
                }));
            }
            p.expect("===")?;
            if p.is_word("subtype_of") && matches!(p.peek_at(1), Tok::Punct("(")) {
                p.next();
                p.next();
                let t = type_name(p, types)?;
                p.expect(")")?;
                return Ok(Item::Typing(Antecedent {
                    var: v,
                    path,
                    req: Requirement::Proper(t),
                }));
            }
            match parse_term(p, types, vars)? {
                Term::Type(t) => Ok(Item::Typing(Antecedent {
                    var: v,
                    path,
                    req: Requirement::Type(t),
                })),
                rhs => Ok(Item::Action(Action::Equate(Term::Path(v, path), rhs))),
            }
        }
        Tok::Word(name) => {
            p.next();
            p.expect("(")?;
            let mut args = Vec::new();
            if !p.is_punct(")") {
                loop {
                    args.push(parse_term(p, types, vars)?);
                    if !p.eat(",") {
                        break;
                    }
                }
            }
            p.expect(")")?;
            Ok(Item::Action(Action::Call {
                name,
                callee: None,
                args,
            }))
        }
        other => p.error(format!("expected a constraint, found {other}")),
    }
}

impl fmt::Display for ConditionalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

// ---- evaluation ----

/// Outcome of checking an antecedent against the store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Incompatible,
    /// Watch set: nodes whose refinement may decide the antecedent.
    Undetermined(Vec<NodeId>),
}

enum Probe {
    Real(NodeId),
    Virtual(TypeId, NodeId),
}

/// Where a path leads without instantiating anything.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Probed {
    /// The value's type, whether it is a ground string, and the last real
    /// node on the way.
    At { ty: TypeId, ground: bool, node: NodeId },
    /// Only some subtype of `node`'s type carries the next feature.
    Blocked(NodeId),
    /// No refinement of the structure can carry the path.
    Incompatible,
}

pub(crate) fn probe_path(store: &Store<'_>, start: NodeId, path: &[FeatId]) -> Probed {
    let types = store.types();
    let mut probe = Probe::Real(store.deref(start));
    for &f in path {
        let (ty, last) = match probe {
            Probe::Real(n) => match store.feature(n, f) {
                Some(v) => {
                    probe = Probe::Real(store.deref(v));
                    continue;
                }
                None => (store.type_of(n), n),
            },
            Probe::Virtual(t, last) => (t, last),
        };
        probe = match types.approp_value(ty, f) {
            Some(r) => Probe::Virtual(r, last),
            None => match types.feature_host(ty, f) {
                Ok(None) => return Probed::Incompatible,
                _ => return Probed::Blocked(last),
            },
        };
    }
    match probe {
        Probe::Real(n) => Probed::At {
            ty: store.type_of(n),
            ground: store.text(n).is_some(),
            node: n,
        },
        Probe::Virtual(t, last) => Probed::At {
            ty: t,
            ground: false,
            node: last,
        },
    }
}

/// Checks `c`'s antecedent with its parameters bound to `args`, without
/// changing the store. Missing substructure is treated as an unconstrained
/// node of the appropriate type.
pub fn check_antecedent(store: &Store<'_>, c: &ConditionalConstraint, args: &[NodeId]) -> Verdict {
    let types = store.types();
    let mut watch = Vec::new();
    for a in &c.antecedent {
        let (ty, ground, at) = match probe_path(store, args[a.var], &a.path) {
            Probed::Incompatible => return Verdict::Incompatible,
            Probed::Blocked(n) => {
                watch.push(n);
                continue;
            }
            Probed::At { ty, ground, node } => (ty, ground, node),
        };
        let req = a.req.ty();
        let holds = types.is_subtype(ty, req)
            && match a.req {
                Requirement::Type(_) => true,
                Requirement::Proper(_) => ty != req || ground,
            };
        if holds {
            continue;
        }
        match types.glb(ty, req) {
            Ok(None) => return Verdict::Incompatible,
            _ => watch.push(at),
        }
    }
    if watch.is_empty() {
        Verdict::Satisfied
    } else {
        watch.sort();
        watch.dedup();
        Verdict::Undetermined(watch)
    }
}

/// Applies every principle to `n` that has not yet been decided for it.
pub(crate) fn license_node(store: &mut Store<'_>, n: NodeId) -> Result<(), Fail> {
    let set = &store.grammar().constraints;
    for &c in set.principles() {
        let n = store.deref(n);
        if store.licensing(n, c).is_some() {
            continue;
        }
        let con = set.get(c);
        match check_antecedent(store, con, &[n]) {
            Verdict::Satisfied => {
                store.set_licensing(n, c, Licensing::Fired);
                store.trace(|| format!("fire {} on node {}", con.name, n.index()));
                fire(store, con, &[n])?;
            }
            Verdict::Incompatible => store.set_licensing(n, c, Licensing::Discarded),
            Verdict::Undetermined(watch) => {
                let g = store.add_goal(GoalKind::Principle(c), vec![n], GoalState::Delayed);
                store.register(g, watch);
                store.set_licensing(n, c, Licensing::Delayed(g));
                store.trace(|| format!("delay {} on node {}", con.name, n.index()));
            }
        }
    }
    Ok(())
}

/// Re-examines a delayed goal after one of its watched nodes changed.
pub(crate) fn wake(store: &mut Store<'_>, g: GoalId) -> Result<(), Fail> {
    let goal = store.goal(g).clone();
    if goal.state != GoalState::Delayed {
        return Ok(());
    }
    let set = &store.grammar().constraints;
    match goal.kind {
        GoalKind::Principle(c) | GoalKind::Clause { constraint: c, .. } => {
            let con = set.get(c);
            match check_antecedent(store, con, &goal.args) {
                Verdict::Satisfied => {
                    store.unregister(g);
                    store.set_goal_state(g, GoalState::Done);
                    if let GoalKind::Principle(_) = goal.kind {
                        store.set_licensing(goal.args[0], c, Licensing::Fired);
                    }
                    store.trace(|| format!("wake {}: fire", con.name));
                    fire(store, con, &goal.args)
                }
                Verdict::Incompatible => {
                    store.unregister(g);
                    store.set_goal_state(g, GoalState::Discarded);
                    if let GoalKind::Principle(_) = goal.kind {
                        store.set_licensing(goal.args[0], c, Licensing::Discarded);
                    }
                    store.trace(|| format!("wake {}: discard", con.name));
                    Ok(())
                }
                Verdict::Undetermined(watch) => {
                    store.register(g, watch);
                    Ok(())
                }
            }
        }
        GoalKind::Builtin(b) => run_builtin(store, g, b, &goal.args),
    }
}

/// Enforces the consequent of `c` with parameters bound to `args`.
pub(crate) fn fire(store: &mut Store<'_>, c: &ConditionalConstraint, args: &[NodeId]) -> Result<(), Fail> {
    let mut env: Vec<Option<NodeId>> = vec![None; c.vars.len()];
    for (i, &a) in args.iter().enumerate() {
        env[i] = Some(a);
    }
    for action in &c.consequent {
        match action {
            Action::Equate(l, r) => {
                match (eval_opt(store, l, &mut env)?, eval_opt(store, r, &mut env)?) {
                    (Some(a), Some(b)) => store.push(Task::Unify(a, b)),
                    (Some(a), None) => bind(r, a, &mut env),
                    (None, Some(b)) => bind(l, b, &mut env),
                    (None, None) => {
                        let n = store.top();
                        bind(l, n, &mut env);
                        bind(r, n, &mut env);
                    }
                }
                store.run()?;
            }
            Action::Call { callee, args: targs, name } => {
                let mut nodes = Vec::with_capacity(targs.len());
                for t in targs {
                    nodes.push(eval(store, t, &mut env)?);
                }
                post_call(store, callee.expect("calls are resolved at load time"), name, nodes);
            }
        }
    }
    Ok(())
}

fn post_call(store: &mut Store<'_>, callee: Callee, name: &str, nodes: Vec<NodeId>) {
    match callee {
        Callee::Relation(r) => {
            let rel = &store.grammar().constraints.relations()[r];
            let call = store.next_call();
            store.trace(|| format!("call {name}/{}", nodes.len()));
            for &clause in &rel.clauses {
                let g = store.add_goal(GoalKind::Clause { constraint: clause, call }, nodes.clone(), GoalState::Delayed);
                store.push(Task::Wake(g));
            }
        }
        Callee::Builtin(b) => {
            let g = store.add_goal(GoalKind::Builtin(b), nodes, GoalState::Delayed);
            store.push(Task::Wake(g));
        }
    }
}

pub(crate) fn call(store: &mut Store<'_>, name: &str, args: &[NodeId]) -> Result<(), Fail> {
    let set = &store.grammar().constraints;
    let callee = match set.relations().iter().position(|r| r.name == name && r.arity == args.len()) {
        Some(r) => Callee::Relation(r),
        None => match Builtin::by_name(name, args.len()) {
            Some(b) => Callee::Builtin(b),
            None => return Err(EngineError::UnknownRelation(name.to_string(), args.len()).into()),
        },
    };
    let name = name.to_string();
    let args = args.to_vec();
    store.transact(move |s| {
        post_call(s, callee, &name, args);
        s.run()
    })
}

fn bind(t: &Term, n: NodeId, env: &mut [Option<NodeId>]) {
    if let Term::Var(v) = t {
        env[*v] = Some(n);
    }
}

/// Value of a term; `None` for a still unbound variable.
fn eval_opt(store: &mut Store<'_>, t: &Term, env: &mut [Option<NodeId>]) -> Result<Option<NodeId>, Fail> {
    match t {
        Term::Var(v) => Ok(env[*v]),
        _ => eval(store, t, env).map(Some),
    }
}

fn eval(store: &mut Store<'_>, t: &Term, env: &mut [Option<NodeId>]) -> Result<NodeId, Fail> {
    Ok(match t {
        Term::Var(v) => match env[*v] {
            Some(n) => n,
            None => {
                let n = store.top();
                env[*v] = Some(n);
                n
            }
        },
        Term::Path(v, path) => {
            let root = match env[*v] {
                Some(n) => n,
                None => {
                    let n = store.top();
                    env[*v] = Some(n);
                    n
                }
            };
            store.path_get_inner(root, path)?
        }
        Term::Type(ty) => store.fresh_licensed(*ty),
        Term::Str(s) => {
            let n = store.new_string(s);
            store.push(Task::License(n));
            n
        }
    })
}

fn string_arg(store: &Store<'_>, n: NodeId) -> Result<Option<String>, Fail> {
    let types = store.types();
    match types.glb(store.type_of(n), STRING)? {
        None => Err(Fail::Clash),
        Some(_) => Ok(store.text(n).map(str::to_string)),
    }
}

fn put_string(store: &mut Store<'_>, n: NodeId, s: &str) {
    let v = store.new_string(s);
    store.push(Task::Unify(n, v));
}

/// Deterministic built-ins run here; nondeterministic ones are marked ready
/// for the search driver once their inputs are ground.
fn run_builtin(store: &mut Store<'_>, g: GoalId, b: Builtin, args: &[NodeId]) -> Result<(), Fail> {
    let finish = |store: &mut Store<'_>| {
        store.unregister(g);
        store.set_goal_state(g, GoalState::Done);
    };
    match b {
        Builtin::Concat => {
            let a = string_arg(store, args[0])?;
            let bb = string_arg(store, args[1])?;
            let c = string_arg(store, args[2])?;
            match (a, bb, c) {
                (Some(a), Some(b), Some(c)) => {
                    if format!("{a}{b}") != c {
                        return Err(Fail::Clash);
                    }
                    finish(store);
                }
                (Some(a), Some(b), None) => {
                    finish(store);
                    put_string(store, args[2], &format!("{a}{b}"));
                }
                (Some(a), None, Some(c)) => {
                    let rest = c.strip_prefix(a.as_str()).ok_or(Fail::Clash)?.to_string();
                    finish(store);
                    put_string(store, args[1], &rest);
                }
                (None, Some(b), Some(c)) => {
                    let rest = c.strip_suffix(b.as_str()).ok_or(Fail::Clash)?.to_string();
                    finish(store);
                    put_string(store, args[0], &rest);
                }
                _ => store.register(g, args.to_vec()),
            }
        }
        Builtin::Morphology => {
            let m = string_arg(store, args[0])?;
            let p = string_arg(store, args[1])?;
            if m.is_some() || p.is_some() {
                store.unregister(g);
                store.set_goal_state(g, GoalState::Ready);
            } else {
                store.register(g, vec![args[0], args[1]]);
            }
        }
        Builtin::Lexeme => {
            if string_arg(store, args[0])?.is_some() {
                store.unregister(g);
                store.set_goal_state(g, GoalState::Ready);
            } else {
                store.register(g, vec![args[0]]);
            }
        }
    }
    let state = store.goal(g).state;
    store.trace(|| format!("{} goal {} -> {state:?}", b.name(), g.index()));
    Ok(())
}

/// Labeling choices for a delayed relation clause: the node its first
/// undecided parameter typing is on, and every type that some delayed
/// clause goal requires of that node. Refining the node to each type in
/// turn decides at least one goal per branch.
pub fn labeling_options(store: &Store<'_>, g: GoalId) -> Vec<(NodeId, TypeId)> {
    let set = &store.grammar().constraints;
    let types = store.types();
    let goal = store.goal(g);
    let GoalKind::Clause { constraint, .. } = goal.kind else {
        return Vec::new();
    };
    let undecided = |a: &Antecedent, n: NodeId| !types.is_subtype(store.type_of(n), a.req.ty());
    let Some(node) = set
        .get(constraint)
        .antecedent
        .iter()
        .filter(|a| a.path.is_empty())
        .map(|a| (a, store.deref(goal.args[a.var])))
        .find(|&(a, n)| undecided(a, n))
        .map(|(_, n)| n)
    else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for other in store.goal_ids() {
        let og = store.goal(other);
        if og.state != GoalState::Delayed {
            continue;
        }
        let GoalKind::Clause { constraint, .. } = og.kind else {
            continue;
        };
        for a in &set.get(constraint).antecedent {
            if a.path.is_empty() && store.deref(og.args[a.var]) == node {
                let opt = (node, a.req.ty());
                if !out.contains(&opt) {
                    out.push(opt);
                }
            }
        }
    }
    out
}

/// Whether any live goal is still waiting. Used by result sweeps.
pub fn pending_goals(store: &Store<'_>) -> Vec<GoalId> {
    store
        .goal_ids()
        .filter(|g| matches!(store.goal(*g).state, GoalState::Delayed | GoalState::Ready))
        .collect()
}
