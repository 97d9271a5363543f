//! Type hierarchy with appropriateness conditions.
//!
//! Types form a DAG rooted at `top`. Each type carries an appropriateness
//! map from features to value restrictions; the map is inherited by every
//! subtype and may only be narrowed. Meets are closed-world: the greatest
//! lower bound of two types is the unique most general common subtype, and
//! two incomparable candidates are reported as an ambiguous meet instead of
//! being resolved by an implicit type.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub(crate) u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatId(pub(crate) u32);

impl FeatId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub const TOP: TypeId = TypeId(0);
pub const STRING: TypeId = TypeId(1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown parent type `{parent}` for `{name}`")]
    UnknownParent { name: String, parent: String },
    #[error("type `{0}` is already declared")]
    Redeclared(String),
    #[error("declaring `{0}` would introduce a cycle")]
    Cycle(String),
    #[error("appropriateness conflict on `{name}`: feature `{feature}` has no common value type")]
    AppropriatenessConflict { name: String, feature: String },
    #[error("atomic type `{0}` cannot carry features")]
    FeaturesOnAtom(String),
    #[error("ambiguous meet of `{0}` and `{1}`")]
    AmbiguousMeet(String, String),
}

/// Result of a meet query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Meet {
    Type(TypeId),
    Bottom,
    Ambiguous,
}

#[derive(Clone, Debug, Default)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn insert(&mut self, i: usize) {
        let w = i / 64;
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    fn union_with(&mut self, other: &BitSet) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

#[derive(Clone, Debug)]
pub struct TypeHierarchy {
    names: Vec<String>,
    by_name: HashMap<String, TypeId>,
    parents: Vec<Vec<TypeId>>,
    children: Vec<Vec<TypeId>>,
    /// `ancestors[t]` holds every `s` with `t <= s`, including `t`.
    ancestors: Vec<BitSet>,
    atomic: Vec<bool>,
    approp: Vec<BTreeMap<FeatId, TypeId>>,
    features: Vec<String>,
    feat_by_name: HashMap<String, FeatId>,
    meets: Option<Vec<Meet>>,
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeHierarchy {
    /// A hierarchy holding only `top` and the atomic `string` type.
    pub fn new() -> Self {
        let mut h = TypeHierarchy {
            names: Vec::new(),
            by_name: HashMap::new(),
            parents: Vec::new(),
            children: Vec::new(),
            ancestors: Vec::new(),
            atomic: Vec::new(),
            approp: Vec::new(),
            features: Vec::new(),
            feat_by_name: HashMap::new(),
            meets: None,
        };
        h.push_type("top", Vec::new(), false, BTreeMap::new());
        h.push_type("string", vec![TOP], true, BTreeMap::new());
        h
    }

    fn push_type(
        &mut self,
        name: &str,
        parents: Vec<TypeId>,
        atomic: bool,
        approp: BTreeMap<FeatId, TypeId>,
    ) -> TypeId {
        let id = TypeId(self.names.len() as u32);
        let mut anc = BitSet::default();
        anc.insert(id.index());
        for p in &parents {
            anc.union_with(&self.ancestors[p.index()]);
            self.children[p.index()].push(id);
        }
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        self.parents.push(parents);
        self.children.push(Vec::new());
        self.ancestors.push(anc);
        self.atomic.push(atomic);
        self.approp.push(approp);
        self.meets = None;
        id
    }

    pub fn intern_feature(&mut self, name: &str) -> FeatId {
        if let Some(&f) = self.feat_by_name.get(name) {
            return f;
        }
        let f = FeatId(self.features.len() as u32);
        self.features.push(name.to_string());
        self.feat_by_name.insert(name.to_string(), f);
        f
    }

    /// Declares a new type below `parents` (or below `top` when empty).
    ///
    /// The new type inherits the appropriateness of every parent; a feature
    /// inherited from several parents, or redeclared locally, gets the meet
    /// of all its restrictions.
    pub fn declare_type(
        &mut self,
        name: &str,
        parents: &[&str],
        features: &[(&str, &str)],
        atomic: bool,
    ) -> Result<TypeId, TypeError> {
        if self.by_name.contains_key(name) {
            return Err(TypeError::Redeclared(name.to_string()));
        }
        let mut parent_ids = Vec::new();
        for p in parents {
            if *p == name {
                return Err(TypeError::Cycle(name.to_string()));
            }
            let id = self.lookup(p).ok_or_else(|| TypeError::UnknownParent {
                name: name.to_string(),
                parent: p.to_string(),
            })?;
            if !parent_ids.contains(&id) {
                parent_ids.push(id);
            }
        }
        if parent_ids.is_empty() {
            parent_ids.push(TOP);
        }
        let atomic = atomic || parent_ids.iter().any(|p| self.atomic[p.index()]);
        if atomic && !features.is_empty() {
            return Err(TypeError::FeaturesOnAtom(name.to_string()));
        }

        let mut approp: BTreeMap<FeatId, TypeId> = BTreeMap::new();
        let conflict = |feat: &str| TypeError::AppropriatenessConflict {
            name: name.to_string(),
            feature: feat.to_string(),
        };
        for p in &parent_ids {
            for (&f, &r) in &self.approp[p.index()] {
                let merged = match approp.get(&f) {
                    None => r,
                    Some(&prev) => match self.meet(prev, r) {
                        Meet::Type(t) => t,
                        _ => return Err(conflict(&self.features[f.index()])),
                    },
                };
                approp.insert(f, merged);
            }
        }
        let mut local = Vec::new();
        for (feat, value) in features {
            let vt = self
                .lookup(value)
                .ok_or_else(|| TypeError::UnknownType(value.to_string()))?;
            local.push((*feat, vt));
        }
        for (feat, vt) in local {
            let f = self.intern_feature(feat);
            let merged = match approp.get(&f) {
                None => vt,
                Some(&prev) => match self.meet(prev, vt) {
                    Meet::Type(t) => t,
                    _ => return Err(conflict(feat)),
                },
            };
            approp.insert(f, merged);
        }
        Ok(self.push_type(name, parent_ids, atomic, approp))
    }

    /// Precomputes the meet table. Called once loading is complete.
    pub fn finalize(&mut self) {
        let n = self.names.len();
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(self.compute_meet(TypeId(a as u32), TypeId(b as u32)));
            }
        }
        self.meets = Some(table);
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> {
        (0..self.names.len() as u32).map(TypeId)
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    pub fn type_id(&self, name: &str) -> Result<TypeId, TypeError> {
        self.lookup(name)
            .ok_or_else(|| TypeError::UnknownType(name.to_string()))
    }

    pub fn name(&self, t: TypeId) -> &str {
        &self.names[t.index()]
    }

    pub fn feature(&self, name: &str) -> Option<FeatId> {
        self.feat_by_name.get(name).copied()
    }

    pub fn feature_name(&self, f: FeatId) -> &str {
        &self.features[f.index()]
    }

    pub fn parents(&self, t: TypeId) -> &[TypeId] {
        &self.parents[t.index()]
    }

    pub fn children(&self, t: TypeId) -> &[TypeId] {
        &self.children[t.index()]
    }

    pub fn is_atomic(&self, t: TypeId) -> bool {
        self.atomic[t.index()]
    }

    /// `sub <= sup`: `sub` is `sup` or one of its (transitive) subtypes.
    pub fn is_subtype(&self, sub: TypeId, sup: TypeId) -> bool {
        self.ancestors[sub.index()].contains(sup.index())
    }

    pub fn meet(&self, a: TypeId, b: TypeId) -> Meet {
        match &self.meets {
            Some(table) => table[a.index() * self.names.len() + b.index()],
            None => self.compute_meet(a, b),
        }
    }

    fn compute_meet(&self, a: TypeId, b: TypeId) -> Meet {
        if self.is_subtype(a, b) {
            return Meet::Type(a);
        }
        if self.is_subtype(b, a) {
            return Meet::Type(b);
        }
        let common: Vec<TypeId> = self
            .types()
            .filter(|&t| self.is_subtype(t, a) && self.is_subtype(t, b))
            .collect();
        let maximal: Vec<TypeId> = common
            .iter()
            .copied()
            .filter(|&t| !common.iter().any(|&s| s != t && self.is_subtype(t, s)))
            .collect();
        match maximal.as_slice() {
            [] => Meet::Bottom,
            [t] => Meet::Type(*t),
            _ => Meet::Ambiguous,
        }
    }

    /// Greatest lower bound; `Ok(None)` when the types are incompatible.
    pub fn glb(&self, a: TypeId, b: TypeId) -> Result<Option<TypeId>, TypeError> {
        match self.meet(a, b) {
            Meet::Type(t) => Ok(Some(t)),
            Meet::Bottom => Ok(None),
            Meet::Ambiguous => Err(TypeError::AmbiguousMeet(
                self.name(a).to_string(),
                self.name(b).to_string(),
            )),
        }
    }

    pub fn approp(&self, t: TypeId) -> &BTreeMap<FeatId, TypeId> {
        &self.approp[t.index()]
    }

    pub fn approp_value(&self, t: TypeId, f: FeatId) -> Option<TypeId> {
        self.approp[t.index()].get(&f).copied()
    }

    /// Appropriate features of `t` by name, inherited ones included.
    pub fn appropriate_features(&self, t: TypeId) -> BTreeMap<String, String> {
        self.approp(t)
            .iter()
            .map(|(f, v)| (self.feature_name(*f).to_string(), self.name(*v).to_string()))
            .collect()
    }

    /// The most general subtype of `t` for which `f` is appropriate.
    ///
    /// `Ok(None)` when no subtype of `t` carries `f`.
    pub fn feature_host(&self, t: TypeId, f: FeatId) -> Result<Option<TypeId>, TypeError> {
        if self.approp[t.index()].contains_key(&f) {
            return Ok(Some(t));
        }
        let hosts: Vec<TypeId> = self
            .types()
            .filter(|&s| self.is_subtype(s, t) && self.approp[s.index()].contains_key(&f))
            .collect();
        let maximal: Vec<TypeId> = hosts
            .iter()
            .copied()
            .filter(|&s| !hosts.iter().any(|&o| o != s && self.is_subtype(s, o)))
            .collect();
        match maximal.as_slice() {
            [] => Ok(None),
            [s] => Ok(Some(*s)),
            _ => Err(TypeError::AmbiguousMeet(
                self.name(t).to_string(),
                self.feature_name(f).to_string(),
            )),
        }
    }

    /// All pairs of types whose meet is ambiguous.
    pub fn ambiguous_meets(&self) -> Vec<(TypeId, TypeId)> {
        let mut out = Vec::new();
        for a in self.types() {
            for b in self.types().filter(|b| *b > a) {
                if self.meet(a, b) == Meet::Ambiguous {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

impl fmt::Display for TypeHierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.types() {
            let parents: Vec<&str> = self.parents(t).iter().map(|p| self.name(*p)).collect();
            writeln!(f, "{} < {}", self.name(t), parents.join(", "))?;
        }
        Ok(())
    }
}
