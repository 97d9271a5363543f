use std::collections::VecDeque;
use std::rc::Rc;

use crate::constraints::{self, Builtin, ConstraintId};
use crate::error::{EngineError, Fail};
use crate::grammar::Grammar;
use crate::type_system::{FeatId, TypeHierarchy, TypeId, STRING, TOP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoalId(pub(crate) u32);

impl GoalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How a principle stands with respect to one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Licensing {
    Fired,
    Discarded,
    Delayed(GoalId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalKind {
    /// A principle attached to the type of its single argument.
    Principle(ConstraintId),
    /// One clause of a relation call; clauses of one call share `call`.
    Clause { constraint: ConstraintId, call: u32 },
    Builtin(Builtin),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalState {
    Delayed,
    /// A nondeterministic built-in whose inputs are instantiated; it waits
    /// for the search driver.
    Ready,
    Done,
    Discarded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub kind: GoalKind,
    pub args: Vec<NodeId>,
    pub state: GoalState,
    pub(crate) watch: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Node {
    pub ty: TypeId,
    pub text: Option<Rc<str>>,
    /// `None` while the substructure is uninstantiated.
    pub dag: Option<Vec<(FeatId, NodeId)>>,
    pub goals: Vec<GoalId>,
    pub licensed: Vec<(ConstraintId, Licensing)>,
    pub forward: Option<NodeId>,
}

impl Node {
    fn fresh(ty: TypeId) -> Node {
        Node {
            ty,
            text: None,
            dag: None,
            goals: Vec::new(),
            licensed: Vec::new(),
            forward: None,
        }
    }
}

#[derive(Debug)]
enum Undo {
    Node(NodeId, Node),
    Goal(GoalId, Goal),
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    serial: u64,
    trail: usize,
    nodes: usize,
    goals: usize,
    calls: u32,
}

/// Opaque marker into the undo trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint {
    serial: u64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Task {
    Unify(NodeId, NodeId),
    Coerce(NodeId, TypeId),
    License(NodeId),
    Wake(GoalId),
}

/// Full store contents, for deep-equality checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    nodes: Vec<Node>,
    goals: Vec<Goal>,
}

/// A single-threaded constraint store of feature-structure nodes.
///
/// Nodes are never copied during unification: the losing node is forwarded
/// to the representative and every destructive change is recorded on the
/// trail so that it can be undone to a [`Checkpoint`].
pub struct Store<'g> {
    grammar: &'g Grammar,
    nodes: Vec<Node>,
    goals: Vec<Goal>,
    trail: Vec<Undo>,
    frames: Vec<Frame>,
    next_serial: u64,
    next_call: u32,
    queue: VecDeque<Task>,
    trace: Option<Vec<String>>,
}

impl<'g> Store<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Store {
            grammar,
            nodes: Vec::new(),
            goals: Vec::new(),
            trail: Vec::new(),
            frames: Vec::new(),
            next_serial: 0,
            next_call: 0,
            queue: VecDeque::new(),
            trace: None,
        }
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    pub fn types(&self) -> &'g TypeHierarchy {
        &self.grammar.types
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub(crate) fn trace(&mut self, msg: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            t.push(msg());
        }
    }

    pub fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    // ---- node creation and inspection ----

    /// A node of type `ty` with an uninstantiated substructure. The node is
    /// licensed when it first takes part in unification or on [`Store::license`].
    pub fn new_node(&mut self, ty: TypeId) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::fresh(ty));
        id
    }

    pub fn new_named(&mut self, ty: &str) -> Result<NodeId, EngineError> {
        let t = self.types().type_id(ty)?;
        Ok(self.new_node(t))
    }

    pub fn new_string(&mut self, s: &str) -> NodeId {
        let id = self.new_node(STRING);
        self.nodes[id.index()].text = Some(Rc::from(s));
        id
    }

    pub fn deref(&self, mut n: NodeId) -> NodeId {
        while let Some(f) = self.nodes[n.index()].forward {
            n = f;
        }
        n
    }

    fn node(&self, n: NodeId) -> &Node {
        &self.nodes[self.deref(n).index()]
    }

    pub fn type_of(&self, n: NodeId) -> TypeId {
        self.node(n).ty
    }

    pub fn type_name(&self, n: NodeId) -> &'g str {
        self.types().name(self.type_of(n))
    }

    pub fn text(&self, n: NodeId) -> Option<&str> {
        self.node(n).text.as_deref()
    }

    pub fn is_instantiated(&self, n: NodeId) -> bool {
        self.node(n).dag.is_some()
    }

    /// Value of `f` without forcing instantiation.
    pub fn feature(&self, n: NodeId, f: FeatId) -> Option<NodeId> {
        self.node(n)
            .dag
            .as_ref()
            .and_then(|d| d.iter().find(|(g, _)| *g == f).map(|(_, v)| *v))
    }

    pub fn features(&self, n: NodeId) -> Vec<(FeatId, NodeId)> {
        self.node(n).dag.clone().unwrap_or_default()
    }

    pub fn licensing(&self, n: NodeId, c: ConstraintId) -> Option<Licensing> {
        self.node(n)
            .licensed
            .iter()
            .find(|(d, _)| *d == c)
            .map(|(_, l)| *l)
    }

    /// Live delayed goals registered on `n`.
    pub fn delayed_goals(&self, n: NodeId) -> Vec<GoalId> {
        self.node(n)
            .goals
            .iter()
            .copied()
            .filter(|g| self.goals[g.index()].state == GoalState::Delayed)
            .collect()
    }

    pub fn goal(&self, g: GoalId) -> &Goal {
        &self.goals[g.index()]
    }

    pub fn goal_count(&self) -> usize {
        self.goals.len()
    }

    pub fn goal_ids(&self) -> impl Iterator<Item = GoalId> + '_ {
        (0..self.goals.len() as u32).map(GoalId)
    }

    pub fn ready_goals(&self) -> Vec<GoalId> {
        self.goal_ids()
            .filter(|g| self.goals[g.index()].state == GoalState::Ready)
            .collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            nodes: self.nodes.clone(),
            goals: self.goals.clone(),
        }
    }

    pub fn resolve_path(&self, path: &str) -> Result<Vec<FeatId>, EngineError> {
        if path.is_empty() {
            return Ok(Vec::new());
        }
        path.split([':', '|'])
            .map(|f| {
                self.types()
                    .feature(f.trim())
                    .ok_or_else(|| EngineError::UnknownFeature(f.to_string()))
            })
            .collect()
    }

    // ---- trail ----

    fn node_floor(&self) -> usize {
        self.frames.last().map_or(0, |f| f.nodes)
    }

    fn node_mut(&mut self, n: NodeId) -> &mut Node {
        if n.index() < self.node_floor() {
            let old = self.nodes[n.index()].clone();
            self.trail.push(Undo::Node(n, old));
        }
        &mut self.nodes[n.index()]
    }

    fn goal_mut(&mut self, g: GoalId) -> &mut Goal {
        if g.index() < self.frames.last().map_or(0, |f| f.goals) {
            let old = self.goals[g.index()].clone();
            self.trail.push(Undo::Goal(g, old));
        }
        &mut self.goals[g.index()]
    }

    pub fn checkpoint(&mut self) -> Checkpoint {
        let serial = self.next_serial;
        self.next_serial += 1;
        self.frames.push(Frame {
            serial,
            trail: self.trail.len(),
            nodes: self.nodes.len(),
            goals: self.goals.len(),
            calls: self.next_call,
        });
        Checkpoint { serial }
    }

    /// Restores the state at `cp`. Checkpoints taken after `cp` are closed;
    /// `cp` itself stays live and may be undone to again.
    pub fn undo_to(&mut self, cp: Checkpoint) -> Result<(), EngineError> {
        let pos = self
            .frames
            .iter()
            .rposition(|f| f.serial == cp.serial)
            .ok_or(EngineError::StaleCheckpoint)?;
        self.frames.truncate(pos + 1);
        let frame = self.frames[pos];
        while self.trail.len() > frame.trail {
            match self.trail.pop() {
                Some(Undo::Node(n, old)) => self.nodes[n.index()] = old,
                Some(Undo::Goal(g, old)) => self.goals[g.index()] = old,
                None => unreachable!(),
            }
        }
        self.nodes.truncate(frame.nodes);
        self.goals.truncate(frame.goals);
        self.next_call = frame.calls;
        self.queue.clear();
        Ok(())
    }

    /// Closes `cp` (and anything opened after it) keeping all changes.
    pub fn release(&mut self, cp: Checkpoint) -> Result<(), EngineError> {
        let pos = self
            .frames
            .iter()
            .rposition(|f| f.serial == cp.serial)
            .ok_or(EngineError::StaleCheckpoint)?;
        self.frames.truncate(pos);
        if self.frames.is_empty() {
            self.trail.clear();
        }
        Ok(())
    }

    /// Runs `f` and the resulting propagation atomically.
    pub(crate) fn transact<T>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<T, Fail>,
    ) -> Result<T, Fail> {
        let cp = self.checkpoint();
        let result = f(self).and_then(|v| self.run().map(|_| v));
        match result {
            Ok(v) => {
                self.release(cp)?;
                Ok(v)
            }
            Err(e) => {
                self.undo_to(cp)?;
                self.release(cp)?;
                Err(e)
            }
        }
    }

    // ---- public constraint operations ----

    /// Well-typed unification. On failure the store is left unchanged.
    pub fn unify(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, Fail> {
        self.transact(|s| {
            s.push(Task::Unify(a, b));
            s.run()?;
            Ok(s.deref(a))
        })
    }

    /// Narrows `n` to `ty`.
    pub fn coerce(&mut self, n: NodeId, ty: TypeId) -> Result<(), Fail> {
        self.transact(|s| {
            s.push(Task::Coerce(n, ty));
            s.push(Task::License(n));
            Ok(())
        })
    }

    /// Checks every principle against `n`, firing, discarding or delaying.
    pub fn license(&mut self, n: NodeId) -> Result<(), Fail> {
        self.transact(|s| {
            s.push(Task::License(n));
            Ok(())
        })
    }

    /// Calls relation or built-in `name` on `args`. Atomic: on failure the
    /// store is unchanged.
    pub fn call(&mut self, name: &str, args: &[NodeId]) -> Result<(), Fail> {
        constraints::call(self, name, args)
    }

    pub fn path_get(&mut self, n: NodeId, path: &[FeatId]) -> Result<NodeId, Fail> {
        self.transact(|s| s.path_get_inner(n, path))
    }

    pub fn path_get_str(&mut self, n: NodeId, path: &str) -> Result<NodeId, Fail> {
        let p = self.resolve_path(path)?;
        self.path_get(n, &p)
    }

    /// `path_get` followed by unification with `v`.
    pub fn path_put(&mut self, n: NodeId, path: &[FeatId], v: NodeId) -> Result<NodeId, Fail> {
        self.transact(|s| {
            let at = s.path_get_inner(n, path)?;
            s.push(Task::Unify(at, v));
            s.run()?;
            Ok(s.deref(at))
        })
    }

    pub fn path_put_str(&mut self, n: NodeId, path: &str, v: NodeId) -> Result<NodeId, Fail> {
        let p = self.resolve_path(path)?;
        self.path_put(n, &p, v)
    }

    // ---- engine internals ----

    pub(crate) fn push(&mut self, t: Task) {
        self.queue.push_back(t);
    }

    /// Processes queued tasks to a fixpoint.
    pub(crate) fn run(&mut self) -> Result<(), Fail> {
        while let Some(task) = self.queue.pop_front() {
            let r = match task {
                Task::Unify(a, b) => self.do_unify(a, b),
                Task::Coerce(n, t) => self.do_coerce(n, t),
                Task::License(n) => constraints::license_node(self, n),
                Task::Wake(g) => constraints::wake(self, g),
            };
            if let Err(e) = r {
                self.queue.clear();
                return Err(e);
            }
        }
        Ok(())
    }

    fn glb(&self, a: TypeId, b: TypeId) -> Result<TypeId, Fail> {
        self.types().glb(a, b)?.ok_or(Fail::Clash)
    }

    fn do_unify(&mut self, a: NodeId, b: NodeId) -> Result<(), Fail> {
        let (a, b) = (self.deref(a), self.deref(b));
        if a == b {
            return Ok(());
        }
        let (rep, other) = if a < b { (a, b) } else { (b, a) };
        let nr = self.nodes[rep.index()].clone();
        let no = self.nodes[other.index()].clone();
        let ty = self.glb(nr.ty, no.ty)?;
        let text = match (&nr.text, &no.text) {
            (Some(x), Some(y)) if x != y => return Err(Fail::Clash),
            (x, y) => x.clone().or_else(|| y.clone()),
        };
        let mut pending = Vec::new();
        let dag = match (nr.dag, no.dag) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d),
            (Some(mut d1), Some(d2)) => {
                for (f, v) in d2 {
                    match d1.iter().find(|(g, _)| *g == f) {
                        Some(&(_, u)) => pending.push(Task::Unify(u, v)),
                        None => d1.push((f, v)),
                    }
                }
                d1.sort_by_key(|(f, _)| *f);
                Some(d1)
            }
        };
        let mut goals = nr.goals;
        for g in no.goals {
            if !goals.contains(&g) {
                goals.push(g);
            }
        }
        let mut licensed = nr.licensed;
        let mut killed = Vec::new();
        for (c, lo) in no.licensed {
            match licensed.iter_mut().find(|(d, _)| *d == c) {
                None => licensed.push((c, lo)),
                Some((_, lr)) => match (*lr, lo) {
                    (Licensing::Fired, Licensing::Delayed(g)) => killed.push(g),
                    (Licensing::Delayed(g), Licensing::Fired) => {
                        killed.push(g);
                        *lr = Licensing::Fired;
                    }
                    (Licensing::Delayed(g1), Licensing::Delayed(g2)) if g1 != g2 => {
                        killed.push(g2)
                    }
                    (Licensing::Discarded, l @ Licensing::Delayed(_)) => *lr = l,
                    (Licensing::Discarded, Licensing::Fired) => *lr = Licensing::Fired,
                    _ => {}
                },
            }
        }
        goals.retain(|g| !killed.contains(g));
        let wake: Vec<GoalId> = goals.clone();
        {
            let n = self.node_mut(rep);
            n.ty = ty;
            n.text = text;
            n.dag = dag;
            n.goals = goals;
            n.licensed = licensed;
        }
        {
            let n = self.node_mut(other);
            n.forward = Some(rep);
            n.dag = None;
            n.goals = Vec::new();
            n.licensed = Vec::new();
        }
        for g in killed {
            self.unregister(g);
            self.goal_mut(g).state = GoalState::Discarded;
        }
        for t in pending {
            self.push(t);
        }
        self.complete_dag(rep);
        self.push(Task::License(rep));
        for g in wake {
            self.push(Task::Wake(g));
        }
        Ok(())
    }

    fn do_coerce(&mut self, n: NodeId, ty: TypeId) -> Result<(), Fail> {
        let n = self.deref(n);
        let old = self.nodes[n.index()].ty;
        let t = self.glb(old, ty)?;
        if t == old {
            return Ok(());
        }
        self.node_mut(n).ty = t;
        self.complete_dag(n);
        self.push(Task::License(n));
        let goals = self.nodes[n.index()].goals.clone();
        for g in goals {
            self.push(Task::Wake(g));
        }
        Ok(())
    }

    /// Adds features newly appropriate after a type change and narrows
    /// existing values to the current restrictions.
    fn complete_dag(&mut self, n: NodeId) {
        let Some(dag) = self.nodes[n.index()].dag.clone() else {
            return;
        };
        let ty = self.nodes[n.index()].ty;
        let approp = self.types().approp(ty);
        let mut new_dag = dag.clone();
        for (&f, &r) in approp {
            match dag.iter().find(|(g, _)| *g == f) {
                Some(&(_, v)) => {
                    if !self.types().is_subtype(self.type_of(v), r) {
                        self.push(Task::Coerce(v, r));
                    }
                }
                None => {
                    let fresh = self.new_node(r);
                    self.push(Task::License(fresh));
                    new_dag.push((f, fresh));
                }
            }
        }
        if new_dag.len() != dag.len() {
            new_dag.sort_by_key(|(f, _)| *f);
            self.node_mut(n).dag = Some(new_dag);
        }
    }

    /// Instantiates the substructure of `n` with one fresh node per
    /// appropriate feature.
    fn expand(&mut self, n: NodeId) {
        let n = self.deref(n);
        if self.nodes[n.index()].dag.is_some() {
            return;
        }
        let ty = self.nodes[n.index()].ty;
        let approp: Vec<(FeatId, TypeId)> =
            self.types().approp(ty).iter().map(|(f, t)| (*f, *t)).collect();
        let mut dag = Vec::with_capacity(approp.len());
        for (f, r) in approp {
            let fresh = self.new_node(r);
            self.push(Task::License(fresh));
            dag.push((f, fresh));
        }
        self.node_mut(n).dag = Some(dag);
        // antecedents may have been evaluated through virtual children
        let goals = self.nodes[n.index()].goals.clone();
        for g in goals {
            self.push(Task::Wake(g));
        }
    }

    /// One feature step. When `f` is not appropriate for the current type,
    /// the node is narrowed to the most general subtype carrying `f`.
    pub(crate) fn step(&mut self, n: NodeId, f: FeatId) -> Result<NodeId, Fail> {
        let n = self.deref(n);
        let ty = self.nodes[n.index()].ty;
        if self.types().approp_value(ty, f).is_none() {
            let host = self.types().feature_host(ty, f)?.ok_or(Fail::Clash)?;
            self.do_coerce(n, host)?;
        }
        self.expand(n);
        let n = self.deref(n);
        Ok(self
            .feature(n, f)
            .expect("appropriate feature present after expansion"))
    }

    pub(crate) fn path_get_inner(&mut self, n: NodeId, path: &[FeatId]) -> Result<NodeId, Fail> {
        let mut cur = self.deref(n);
        for &f in path {
            cur = self.step(cur, f)?;
        }
        Ok(self.deref(cur))
    }

    // ---- goal bookkeeping ----

    pub(crate) fn next_call(&mut self) -> u32 {
        self.next_call += 1;
        self.next_call
    }

    pub(crate) fn add_goal(&mut self, kind: GoalKind, args: Vec<NodeId>, state: GoalState) -> GoalId {
        let id = GoalId(self.goals.len() as u32);
        self.goals.push(Goal {
            kind,
            args,
            state,
            watch: Vec::new(),
        });
        id
    }

    pub(crate) fn set_goal_state(&mut self, g: GoalId, state: GoalState) {
        if self.goals[g.index()].state != state {
            self.goal_mut(g).state = state;
        }
    }

    pub(crate) fn unregister(&mut self, g: GoalId) {
        let watch = self.goals[g.index()].watch.clone();
        for w in watch {
            let w = self.deref(w);
            if self.nodes[w.index()].goals.contains(&g) {
                self.node_mut(w).goals.retain(|x| *x != g);
            }
        }
        if !self.goals[g.index()].watch.is_empty() {
            self.goal_mut(g).watch.clear();
        }
    }

    pub(crate) fn register(&mut self, g: GoalId, watch: Vec<NodeId>) {
        let mut watch: Vec<NodeId> = watch.into_iter().map(|w| self.deref(w)).collect();
        watch.sort();
        watch.dedup();
        let old: Vec<NodeId> = self.goals[g.index()]
            .watch
            .iter()
            .map(|w| self.deref(*w))
            .collect();
        if old == watch {
            return;
        }
        self.unregister(g);
        for &w in &watch {
            if !self.nodes[w.index()].goals.contains(&g) {
                self.node_mut(w).goals.push(g);
            }
        }
        self.goal_mut(g).watch = watch;
    }

    pub(crate) fn set_licensing(&mut self, n: NodeId, c: ConstraintId, l: Licensing) {
        let n = self.deref(n);
        let current = self.licensing(n, c);
        if current == Some(l) {
            return;
        }
        let node = self.node_mut(n);
        match node.licensed.iter_mut().find(|(d, _)| *d == c) {
            Some(slot) => slot.1 = l,
            None => node.licensed.push((c, l)),
        }
    }

    /// Node with the given type that has already been licensed.
    pub(crate) fn fresh_licensed(&mut self, ty: TypeId) -> NodeId {
        let n = self.new_node(ty);
        self.push(Task::License(n));
        n
    }

    pub(crate) fn top(&mut self) -> NodeId {
        self.fresh_licensed(TOP)
    }
}
